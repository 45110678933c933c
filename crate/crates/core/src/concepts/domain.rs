use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest domain the crate will materialise (points are stored as `u32`
/// linear indices and concept truth tables hold one bit per point).
pub const MAX_DOMAIN_POINTS: usize = 1 << 20;

/// A discrete domain: `{0,1}^d` read as the integers `[0, 2^d)`, or the grid
/// `([0, 2^d))^l` of `l` such axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Bitline { bits: u32 },
    Grid { bits: u32, axes: u32 },
}

/// A domain point as its linear index. For a grid the index is
/// `x_0 + x_1 * 2^d + x_2 * 2^{2d} + ...`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub u32);

impl Point {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A domain point as explicit coordinates, one per axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainPoint {
    pub coords: Vec<u32>,
}

impl DomainPoint {
    pub fn new(coords: impl Into<Vec<u32>>) -> Self {
        DomainPoint {
            coords: coords.into(),
        }
    }
}

impl Domain {
    pub fn bitline(bits: u32) -> Self {
        Domain::Bitline { bits }
    }

    pub fn grid(bits: u32, axes: u32) -> Self {
        Domain::Grid { bits, axes }
    }

    pub fn bits(&self) -> u32 {
        match *self {
            Domain::Bitline { bits } | Domain::Grid { bits, .. } => bits,
        }
    }

    pub fn axes(&self) -> u32 {
        match *self {
            Domain::Bitline { .. } => 1,
            Domain::Grid { axes, .. } => axes,
        }
    }

    /// Points per axis, `2^d`.
    pub fn side(&self) -> usize {
        1usize << self.bits()
    }

    pub fn is_line(&self) -> bool {
        self.axes() == 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits() == 0 || self.bits() > 20 {
            return Err(Error::domain(format!(
                "bits per axis must be in 1..=20, got {}",
                self.bits()
            )));
        }
        if self.axes() == 0 {
            return Err(Error::domain("grid needs at least one axis"));
        }
        let total = u64::from(self.bits()) * u64::from(self.axes());
        if total > 20 || (1usize << total) > MAX_DOMAIN_POINTS {
            return Err(Error::resource(format!(
                "domain of 2^{total} points exceeds the {MAX_DOMAIN_POINTS}-point limit"
            )));
        }
        Ok(())
    }

    /// Number of points, `2^d` or `(2^d)^l`.
    pub fn cardinality(&self) -> usize {
        self.side().pow(self.axes())
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        (0..self.cardinality() as u32).map(Point)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.index() < self.cardinality()
    }

    /// Encodes coordinates, checking dimensionality and bounds.
    pub fn encode(&self, x: &DomainPoint) -> Result<Point> {
        if x.coords.len() != self.axes() as usize {
            return Err(Error::domain(format!(
                "point has {} coordinates, domain has {} axes",
                x.coords.len(),
                self.axes()
            )));
        }
        let side = self.side() as u64;
        let mut index = 0u64;
        for &c in x.coords.iter().rev() {
            if u64::from(c) >= side {
                return Err(Error::domain(format!(
                    "coordinate {c} outside [0, {side})"
                )));
            }
            index = index * side + u64::from(c);
        }
        Ok(Point(index as u32))
    }

    pub fn decode(&self, p: Point) -> DomainPoint {
        let side = self.side() as u32;
        let mut rest = p.0;
        let coords = (0..self.axes())
            .map(|_| {
                let c = rest % side;
                rest /= side;
                c
            })
            .collect();
        DomainPoint { coords }
    }

    /// Coordinate of `p` on `axis` without allocating.
    #[inline]
    pub fn coord(&self, p: Point, axis: u32) -> u32 {
        (p.0 >> (self.bits() * axis)) & ((1u32 << self.bits()) - 1)
    }

    pub fn describe(&self) -> String {
        match *self {
            Domain::Bitline { bits } => format!("bitline:{bits}"),
            Domain::Grid { bits, axes } => format!("grid:{bits}x{axes}"),
        }
    }
}
