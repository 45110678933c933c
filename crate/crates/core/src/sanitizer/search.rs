use std::collections::BTreeMap;

use rand::Rng;

use crate::concepts::{BitRow, ConceptClass, Point};
use crate::mechanisms::{Exponential, GumbelArgmax};

/// Distinct query truth tables, with the input counts `#c(D)` precomputed.
///
/// Complements are merged too: `|Q_c(D) - Q_c(D')|` is the same for `c` and
/// `not c`, and the constant queries are dropped since they never differ.
#[derive(Clone, Debug)]
pub struct QueryIndex {
    /// Query ids containing each domain point.
    containing: Vec<Vec<u32>>,
    input_counts: Vec<i64>,
    input_len: i64,
}

impl QueryIndex {
    pub fn new(queries: &ConceptClass, d: &[Point]) -> Self {
        let k = queries.domain().cardinality();
        let mut distinct: BTreeMap<BitRow, ()> = BTreeMap::new();
        for t in queries.tables() {
            let ones = t.count_ones();
            if ones == 0 || ones == k {
                continue;
            }
            // Representative of {t, not t}: the one not containing point 0.
            let rep = if t.get(0) {
                BitRow::from_fn(k, |x| !t.get(x))
            } else {
                t.clone()
            };
            distinct.insert(rep, ());
        }
        let mut hist = vec![0i64; k];
        for p in d {
            hist[p.index()] += 1;
        }
        let mut containing = vec![Vec::new(); k];
        let mut input_counts = Vec::with_capacity(distinct.len());
        for (q, row) in distinct.keys().enumerate() {
            let mut c = 0;
            for (x, list) in containing.iter_mut().enumerate() {
                if row.get(x) {
                    list.push(q as u32);
                    c += hist[x];
                }
            }
            input_counts.push(c);
        }
        QueryIndex {
            containing,
            input_counts,
            input_len: d.len() as i64,
        }
    }

    pub fn queries(&self) -> usize {
        self.input_counts.len()
    }

    fn domain_size(&self) -> usize {
        self.containing.len()
    }

    /// `#c(D_hat)` for every query.
    fn counts(&self, hist: &[u32]) -> Vec<i64> {
        let mut counts = vec![0i64; self.queries()];
        for (x, &h) in hist.iter().enumerate() {
            for &q in &self.containing[x] {
                counts[q as usize] += i64::from(h);
            }
        }
        counts
    }

    #[inline]
    fn score_counts(&self, counts: &[i64], m_hat: i64) -> i64 {
        let mut worst = 0;
        for (c, &cd) in counts.iter().zip(&self.input_counts) {
            worst = worst.max((m_hat * cd - self.input_len * c).abs());
        }
        -worst
    }

    /// Integer score of the multiset with histogram `hist`.
    pub fn score(&self, hist: &[u32]) -> i64 {
        let m_hat: u32 = hist.iter().sum();
        self.score_counts(&self.counts(hist), i64::from(m_hat))
    }
}

/// Visits every histogram of size `m_hat` in a fixed order, keeping the
/// per-query counts up to date incrementally.
struct Walk<'a, F> {
    index: &'a QueryIndex,
    m_hat: i64,
    hist: Vec<u32>,
    counts: Vec<i64>,
    visit: F,
}

impl<F: FnMut(&[u32], i64)> Walk<'_, F> {
    fn add(&mut self, x: usize, by: i64) {
        for &q in &self.index.containing[x] {
            self.counts[q as usize] += by;
        }
    }

    fn run(&mut self, x: usize, remaining: u32) {
        let last = self.hist.len() - 1;
        if x == last {
            self.hist[x] = remaining;
            self.add(x, i64::from(remaining));
            let s = self.index.score_counts(&self.counts, self.m_hat);
            (self.visit)(&self.hist, s);
            self.add(x, -i64::from(remaining));
            self.hist[x] = 0;
            return;
        }
        for c in 0..=remaining {
            if c > 0 {
                self.add(x, 1);
            }
            self.hist[x] = c;
            self.run(x + 1, remaining - c);
        }
        self.add(x, -i64::from(remaining));
        self.hist[x] = 0;
    }
}

fn walk(index: &QueryIndex, m_hat: usize, visit: impl FnMut(&[u32], i64)) {
    let mut w = Walk {
        index,
        m_hat: m_hat as i64,
        hist: vec![0; index.domain_size()],
        counts: vec![0; index.queries()],
        visit,
    };
    w.run(0, m_hat as u32);
}

/// Every candidate histogram with its score, in enumeration order.
pub fn exhaustive_scores(index: &QueryIndex, m_hat: usize) -> Vec<(Vec<u32>, i64)> {
    let mut out = Vec::new();
    walk(index, m_hat, |h, s| out.push((h.to_vec(), s)));
    out
}

pub(super) fn exhaustive_select<R: Rng + ?Sized>(
    index: &QueryIndex,
    m_hat: usize,
    mechanism: &Exponential,
    rng: &mut R,
) -> Vec<u32> {
    let mut best = GumbelArgmax::new();
    let mut chosen = Vec::new();
    let mut i = 0;
    walk(index, m_hat, |h, s| {
        if best.offer(i, mechanism.log_weight(s), rng) {
            chosen.clear();
            chosen.extend_from_slice(h);
        }
        i += 1;
    });
    chosen
}

/// Metropolis-Hastings over multisets: move one element to a uniform point.
///
/// Moving a copy of `x` to `y` is proposed with probability
/// `hist[x] / m_hat / k` and reversed with `(hist[y] + 1) / m_hat / k`, so the
/// acceptance ratio carries that correction. The walk starts from a
/// data-independent uniform multiset.
pub(super) fn metropolis_select<R: Rng + ?Sized>(
    index: &QueryIndex,
    m_hat: usize,
    mechanism: &Exponential,
    steps: usize,
    rng: &mut R,
) -> Vec<u32> {
    let k = index.domain_size();
    let mut hist = vec![0u32; k];
    for _ in 0..m_hat {
        hist[rng.random_range(0..k)] += 1;
    }
    let mut counts = index.counts(&hist);
    let mut score = index.score_counts(&counts, m_hat as i64);
    for _ in 0..steps {
        let mut pick = rng.random_range(0..m_hat as u32);
        let x = hist
            .iter()
            .position(|&h| {
                if pick < h {
                    true
                } else {
                    pick -= h;
                    false
                }
            })
            .expect("pick < m_hat");
        let y = rng.random_range(0..k);
        if x == y {
            continue;
        }
        for &q in &index.containing[x] {
            counts[q as usize] -= 1;
        }
        for &q in &index.containing[y] {
            counts[q as usize] += 1;
        }
        let proposed = index.score_counts(&counts, m_hat as i64);
        let log_ratio = mechanism.log_weight(proposed) - mechanism.log_weight(score)
            + (f64::from(hist[y] + 1) / f64::from(hist[x])).ln();
        let u: f64 = rng.random();
        if log_ratio >= 0.0 || u < log_ratio.exp() {
            hist[x] -= 1;
            hist[y] += 1;
            score = proposed;
        } else {
            for &q in &index.containing[y] {
                counts[q as usize] -= 1;
            }
            for &q in &index.containing[x] {
                counts[q as usize] += 1;
            }
        }
    }
    hist
}

pub(super) fn expand(hist: &[u32]) -> Vec<Point> {
    hist.iter()
        .enumerate()
        .flat_map(|(x, &h)| std::iter::repeat_n(Point(x as u32), h as usize))
        .collect()
}
