use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::bits::BitRow;
use super::domain::{Domain, DomainPoint, Point};
use crate::error::{Error, Result};

/// Brute-force limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Upper bound on `|C| * |X|` truth-table cells materialised for a class.
    pub class_cells: u64,
    /// Upper bound on projections evaluated by the VC-dimension search.
    pub projections: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            class_cells: 1 << 28,
            projections: 1 << 20,
        }
    }
}

/// Declarative description of a concept class.
///
/// JSON form uses a `family` tag, e.g. `{"family":"thresh","domain":{"kind":"bitline","bits":3}}`
/// or `{"family":"xor","base":{...}}`. Explicit classes carry their truth
/// tables (one 0/1 entry per domain point, in linear point order).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ClassSpec {
    Point {
        domain: Domain,
    },
    Thresh {
        domain: Domain,
    },
    Interval {
        domain: Domain,
    },
    Rect {
        domain: Domain,
    },
    Xor {
        base: Box<ClassSpec>,
    },
    Explicit {
        domain: Domain,
        #[serde(rename = "truthTables")]
        truth_tables: Vec<Vec<u8>>,
    },
}

impl ClassSpec {
    pub fn thresh(bits: u32) -> Self {
        ClassSpec::Thresh {
            domain: Domain::bitline(bits),
        }
    }

    pub fn point(bits: u32) -> Self {
        ClassSpec::Point {
            domain: Domain::bitline(bits),
        }
    }

    pub fn interval(bits: u32) -> Self {
        ClassSpec::Interval {
            domain: Domain::bitline(bits),
        }
    }

    pub fn rect(bits: u32, axes: u32) -> Self {
        ClassSpec::Rect {
            domain: Domain::grid(bits, axes),
        }
    }

    pub fn xor(base: ClassSpec) -> Self {
        ClassSpec::Xor {
            base: Box::new(base),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            ClassSpec::Point { domain }
            | ClassSpec::Thresh { domain }
            | ClassSpec::Interval { domain }
            | ClassSpec::Rect { domain }
            | ClassSpec::Explicit { domain, .. } => *domain,
            ClassSpec::Xor { base } => base.domain(),
        }
    }

    pub fn build(&self) -> Result<ConceptClass> {
        ConceptClass::build(self, Budget::default())
    }
}

/// Shorthand: `thresh:3`, `point:3`, `interval:3`, `rect:2x2` (bits x axes),
/// `xor(<spec>)`. Anything starting with `{` is parsed as JSON.
impl FromStr for ClassSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return serde_json::from_str(s).or_else(|_| load_explicit(s));
        }
        if let Some(inner) = s.strip_prefix("xor(").and_then(|r| r.strip_suffix(')')) {
            return Ok(ClassSpec::xor(inner.parse()?));
        }
        let (family, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("cannot parse class spec `{s}`")))?;
        let bits = |a: &str| -> Result<u32> {
            a.parse()
                .map_err(|_| Error::Config(format!("bad bit count `{a}` in `{s}`")))
        };
        match family {
            "thresh" => Ok(ClassSpec::thresh(bits(arg)?)),
            "point" => Ok(ClassSpec::point(bits(arg)?)),
            "interval" => Ok(ClassSpec::interval(bits(arg)?)),
            "rect" => {
                let (b, a) = arg.split_once('x').unwrap_or((arg, "1"));
                Ok(ClassSpec::rect(bits(b)?, bits(a)?))
            }
            other => Err(Error::Config(format!("unknown concept family `{other}`"))),
        }
    }
}

/// Closed-form description of one class member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    /// `c_j(x) = 1` iff `x < j`.
    Thresh(u32),
    /// `c_j(x) = 1` iff `x = j`.
    Point(u32),
    /// Closed interval `[a, b]`, or the empty interval.
    Interval(Option<(u32, u32)>),
    /// Axis-aligned box `a_i <= x_i <= b_i`, or the empty box.
    Rect(Option<(Vec<u32>, Vec<u32>)>),
    /// `h xor f` for the base members with these indices (canonical pair).
    Xor(usize, usize),
    Explicit(usize),
}

/// A member of a concept class, by canonical index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Concept {
    pub class_id: u64,
    pub index: usize,
}

/// A finite, fully materialised concept class.
#[derive(Clone)]
pub struct ConceptClass {
    id: String,
    id_hash: u64,
    spec: ClassSpec,
    domain: Domain,
    tables: Vec<BitRow>,
    members: Vec<Member>,
    known_vc: Option<usize>,
}

impl fmt::Debug for ConceptClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConceptClass")
            .field("id", &self.id)
            .field("size", &self.tables.len())
            .finish()
    }
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn check_cells(members: u64, domain: Domain, budget: Budget) -> Result<()> {
    let cells = members.saturating_mul(domain.cardinality() as u64);
    if cells > budget.class_cells {
        return Err(Error::resource(format!(
            "class needs {cells} truth-table cells, budget is {}",
            budget.class_cells
        )));
    }
    Ok(())
}

/// Intervals `[a, b]` with `a <= b` over `0..side`, lexicographic.
fn intervals(side: u32) -> Vec<(u32, u32)> {
    (0..side)
        .flat_map(|a| (a..side).map(move |b| (a, b)))
        .collect()
}

impl ConceptClass {
    pub fn build(spec: &ClassSpec, budget: Budget) -> Result<Self> {
        let domain = spec.domain();
        domain.validate()?;
        let card = domain.cardinality();
        let side = domain.side() as u32;
        let require_line = |name: &str| {
            if domain.is_line() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} is defined over a bitline domain")))
            }
        };

        let (tables, members, known_vc, id) = match spec {
            ClassSpec::Thresh { .. } => {
                require_line("THRESH")?;
                check_cells(u64::from(side) + 1, domain, budget)?;
                let members: Vec<Member> = (0..=side).map(Member::Thresh).collect();
                let tables = (0..=side)
                    .map(|j| BitRow::from_fn(card, |x| (x as u32) < j))
                    .collect();
                (tables, members, Some(1), format!("thresh[{}]", domain.describe()))
            }
            ClassSpec::Point { .. } => {
                require_line("POINT")?;
                check_cells(u64::from(side), domain, budget)?;
                let members = (0..side).map(Member::Point).collect();
                let tables = (0..side)
                    .map(|j| BitRow::from_fn(card, |x| x as u32 == j))
                    .collect();
                (tables, members, Some(1), format!("point[{}]", domain.describe()))
            }
            ClassSpec::Interval { .. } => {
                require_line("INTERVAL")?;
                let ivs = intervals(side);
                check_cells(ivs.len() as u64 + 1, domain, budget)?;
                let mut members = vec![Member::Interval(None)];
                let mut tables = vec![BitRow::zeros(card)];
                for (a, b) in ivs {
                    members.push(Member::Interval(Some((a, b))));
                    tables.push(BitRow::from_fn(card, |x| a <= x as u32 && x as u32 <= b));
                }
                (tables, members, Some(2), format!("interval[{}]", domain.describe()))
            }
            ClassSpec::Rect { .. } => Self::build_rect(domain, budget)?,
            ClassSpec::Xor { base } => {
                let base = ConceptClass::build(base, budget)?;
                let k = base.len() as u64;
                check_cells(k * (k + 1) / 2, domain, budget)?;
                let mut seen: HashMap<BitRow, usize> = HashMap::new();
                let mut tables = Vec::new();
                let mut members = Vec::new();
                for i in 0..base.len() {
                    for j in i..base.len() {
                        let t = base.tables[i].xor(&base.tables[j]);
                        if !seen.contains_key(&t) {
                            seen.insert(t.clone(), tables.len());
                            tables.push(t);
                            members.push(Member::Xor(i, j));
                        }
                    }
                }
                (tables, members, None, format!("xor({})", base.id))
            }
            ClassSpec::Explicit { truth_tables, .. } => {
                if truth_tables.is_empty() {
                    return Err(Error::domain("explicit class needs at least one truth table"));
                }
                check_cells(truth_tables.len() as u64, domain, budget)?;
                let mut seen = HashMap::new();
                let mut tables = Vec::with_capacity(truth_tables.len());
                for (k, raw) in truth_tables.iter().enumerate() {
                    if raw.len() != card {
                        return Err(Error::domain(format!(
                            "truth table {k} has {} entries, domain has {card} points",
                            raw.len()
                        )));
                    }
                    if let Some(bad) = raw.iter().find(|&&b| b > 1) {
                        return Err(Error::domain(format!("truth table {k} contains non-bit {bad}")));
                    }
                    let t = BitRow::from_fn(card, |x| raw[x] == 1);
                    if let Some(prev) = seen.insert(t.clone(), k) {
                        return Err(Error::domain(format!(
                            "truth tables {prev} and {k} define the same function"
                        )));
                    }
                    tables.push(t);
                }
                let members = (0..tables.len()).map(Member::Explicit).collect();
                let digest: u64 = tables
                    .iter()
                    .fold(0xcbf2_9ce4_8422_2325, |h, t| h.rotate_left(7) ^ fnv1a(&format!("{t:?}")));
                (
                    tables,
                    members,
                    None,
                    format!("explicit[{};{};{digest:016x}]", domain.describe(), truth_tables.len()),
                )
            }
        };

        Ok(ConceptClass {
            id_hash: fnv1a(&id),
            id,
            spec: spec.clone(),
            domain,
            tables,
            members,
            known_vc,
        })
    }

    #[allow(clippy::type_complexity)]
    fn build_rect(
        domain: Domain,
        budget: Budget,
    ) -> Result<(Vec<BitRow>, Vec<Member>, Option<usize>, String)> {
        let ivs = intervals(domain.side() as u32);
        let axes = domain.axes();
        let per_axis = ivs.len() as u64;
        let count = per_axis
            .checked_pow(axes)
            .and_then(|c| c.checked_add(1))
            .ok_or_else(|| Error::resource("rectangle class too large"))?;
        check_cells(count, domain, budget)?;
        let card = domain.cardinality();
        let mut members = vec![Member::Rect(None)];
        let mut tables = vec![BitRow::zeros(card)];
        for code in 0..per_axis.pow(axes) {
            // axis 0 is the most significant digit
            let mut lo = vec![0u32; axes as usize];
            let mut hi = vec![0u32; axes as usize];
            let mut rest = code;
            for axis in (0..axes as usize).rev() {
                let (a, b) = ivs[(rest % per_axis) as usize];
                lo[axis] = a;
                hi[axis] = b;
                rest /= per_axis;
            }
            tables.push(BitRow::from_fn(card, |x| {
                (0..axes).all(|ax| {
                    let c = domain.coord(Point(x as u32), ax);
                    lo[ax as usize] <= c && c <= hi[ax as usize]
                })
            }));
            members.push(Member::Rect(Some((lo, hi))));
        }
        // VC = 2l needs at least three points per axis
        let known = (domain.side() >= 3).then_some(2 * axes as usize);
        Ok((tables, members, known, format!("rect[{}]", domain.describe())))
    }

    /// `C xor C`: one member per distinct function `h xor f`.
    pub fn xor_class(&self) -> Result<ConceptClass> {
        ConceptClass::build(&ClassSpec::xor(self.spec.clone()), Budget::default())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn spec(&self) -> &ClassSpec {
        &self.spec
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn known_vc(&self) -> Option<usize> {
        self.known_vc
    }

    pub fn concept(&self, index: usize) -> Result<Concept> {
        if index >= self.len() {
            return Err(Error::domain(format!(
                "concept index {index} out of range for class of size {}",
                self.len()
            )));
        }
        Ok(Concept {
            class_id: self.id_hash,
            index,
        })
    }

    pub fn concepts(&self) -> impl Iterator<Item = Concept> + '_ {
        (0..self.len()).map(|index| Concept {
            class_id: self.id_hash,
            index,
        })
    }

    pub fn member(&self, index: usize) -> &Member {
        &self.members[index]
    }

    /// Lowest index of the member with this closed-form description.
    pub fn index_of(&self, member: &Member) -> Option<usize> {
        self.members.iter().position(|m| m == member)
    }

    pub fn table(&self, index: usize) -> &BitRow {
        &self.tables[index]
    }

    pub fn tables(&self) -> &[BitRow] {
        &self.tables
    }

    #[inline]
    pub fn eval(&self, index: usize, p: Point) -> bool {
        self.tables[index].get(p.index())
    }

    fn check_concept(&self, c: Concept) -> Result<()> {
        if c.class_id != self.id_hash {
            return Err(Error::domain(format!("concept does not belong to {}", self.id)));
        }
        self.concept(c.index).map(|_| ())
    }

    pub fn check_points(&self, pts: &[Point]) -> Result<()> {
        match pts.iter().find(|p| !self.domain.contains(**p)) {
            Some(p) => Err(Error::domain(format!(
                "point {} outside domain {}",
                p.0,
                self.domain.describe()
            ))),
            None => Ok(()),
        }
    }

    /// `c(x)`, validating class membership and point dimensionality.
    pub fn evaluate(&self, c: Concept, x: &DomainPoint) -> Result<bool> {
        self.check_concept(c)?;
        let p = self.domain.encode(x)?;
        Ok(self.eval(c.index, p))
    }

    /// The labels member `index` assigns to `pts`, as a bit row.
    pub fn pattern(&self, index: usize, pts: &[Point]) -> BitRow {
        let t = &self.tables[index];
        BitRow::from_fn(pts.len(), |i| t.get(pts[i].index()))
    }

    /// `Pi_C(B)`: every dichotomy the class realises on the distinct points of `B`.
    pub fn projection(&self, b: &[Point]) -> Result<Projection> {
        if b.is_empty() {
            return Err(Error::domain("projection needs a nonempty point set"));
        }
        self.check_points(b)?;
        let points = dedup_points(b);
        let patterns = (0..self.len()).map(|i| self.pattern(i, &points)).collect();
        Ok(Projection { points, patterns })
    }

    /// Lowest-index concept labelling `b` as `z`, or `None` if `z` is not realised.
    ///
    /// Repeated points in `b` must carry equal labels in `z`; otherwise no
    /// concept can agree.
    pub fn consistent_concept(&self, b: &[Point], z: &[bool]) -> Result<Option<Concept>> {
        if b.len() != z.len() {
            return Err(Error::domain(format!(
                "label vector has length {}, point list has {}",
                z.len(),
                b.len()
            )));
        }
        self.check_points(b)?;
        let found = (0..self.len()).find(|&i| {
            b.iter()
                .zip(z)
                .all(|(p, &y)| self.eval(i, *p) == y)
        });
        Ok(found.map(|index| Concept {
            class_id: self.id_hash,
            index,
        }))
    }

    /// One canonical (lowest-index) member per dichotomy of `pts`, in index order.
    pub fn canonical_hypotheses(&self, pts: &[Point]) -> Vec<usize> {
        let points = dedup_points(pts);
        let mut seen = BTreeSet::new();
        (0..self.len())
            .filter(|&i| seen.insert(self.pattern(i, &points)))
            .collect()
    }

    /// Whether the class realises all `2^|pts|` dichotomies on `pts`
    /// (assumed distinct, at most 30 of them).
    pub fn shatters(&self, pts: &[Point]) -> bool {
        let k = pts.len();
        debug_assert!(k <= 30);
        let needed = 1usize << k;
        if self.len() < needed {
            return false;
        }
        let mut seen = vec![0u64; needed.div_ceil(64)];
        let mut distinct = 0usize;
        for t in &self.tables {
            let mut code = 0usize;
            for (bit, p) in pts.iter().enumerate() {
                if t.get(p.index()) {
                    code |= 1 << bit;
                }
            }
            let (w, m) = (code >> 6, 1u64 << (code & 63));
            if seen[w] & m == 0 {
                seen[w] |= m;
                distinct += 1;
                if distinct == needed {
                    return true;
                }
            }
        }
        false
    }

    pub fn vc_dimension(&self) -> Result<usize> {
        self.vc_dimension_with_budget(Budget::default())
    }

    /// Exact VC dimension by level-wise search over shattered sets.
    ///
    /// Every subset of a shattered set is shattered, so level `k` only extends
    /// shattered sets of level `k - 1` by a larger point. The search stops at
    /// the first empty level.
    pub fn vc_dimension_with_budget(&self, budget: Budget) -> Result<usize> {
        let card = self.domain.cardinality();
        let mut used = 0u64;
        let mut level: Vec<Vec<Point>> = vec![Vec::new()];
        let mut vc = 0;
        loop {
            let mut next = Vec::new();
            for set in &level {
                let start = set.last().map_or(0, |p| p.0 + 1);
                for x in start..card as u32 {
                    used += 1;
                    if used > budget.projections {
                        return Err(Error::resource(format!(
                            "VC search exceeded {} projection evaluations on {}",
                            budget.projections, self.id
                        )));
                    }
                    let mut cand = set.clone();
                    cand.push(Point(x));
                    if self.shatters(&cand) {
                        next.push(cand);
                    }
                }
            }
            if next.is_empty() {
                return Ok(vc);
            }
            vc += 1;
            level = next;
        }
    }
}

/// Distinct points in first-occurrence order.
pub fn dedup_points(pts: &[Point]) -> Vec<Point> {
    let mut seen = BTreeSet::new();
    pts.iter().copied().filter(|p| seen.insert(*p)).collect()
}

/// The dichotomies a class realises on a point list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    /// Distinct points, first-occurrence order; pattern bit `i` is the label of `points[i]`.
    pub points: Vec<Point>,
    pub patterns: BTreeSet<BitRow>,
}

impl Projection {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains(&self, z: &[bool]) -> bool {
        self.patterns.contains(&BitRow::from_bools(z))
    }

    /// Patterns as 0/1 vectors, sorted.
    pub fn vectors(&self) -> BTreeSet<Vec<u8>> {
        self.patterns
            .iter()
            .map(|r| r.to_bools().into_iter().map(u8::from).collect())
            .collect()
    }

    /// `{u xor v : u, v in self}`.
    pub fn xor_closure(&self) -> BTreeSet<BitRow> {
        let mut out = BTreeSet::new();
        for u in &self.patterns {
            for v in &self.patterns {
                out.insert(u.xor(v));
            }
        }
        out
    }
}

/// Sauer's lemma: `|Pi_C(B)| <= (e |B| / VC)^VC` for `|B| > VC`.
/// A class of VC dimension zero is a single function, so the bound is 1.
pub fn sauer_bound(vc: usize, set_size: usize) -> f64 {
    if vc == 0 {
        return 1.0;
    }
    (std::f64::consts::E * set_size as f64 / vc as f64).powi(vc as i32)
}

/// Load an explicit class from the `{"domain": ..., "truthTables": [...]}` file format.
pub fn load_explicit(json: &str) -> Result<ClassSpec> {
    #[derive(Deserialize)]
    struct ExplicitFile {
        domain: Domain,
        #[serde(rename = "truthTables")]
        truth_tables: Vec<Vec<u8>>,
    }
    let f: ExplicitFile = serde_json::from_str(json)?;
    Ok(ClassSpec::Explicit {
        domain: f.domain,
        truth_tables: f.truth_tables,
    })
}
