use serde::{Deserialize, Serialize};

use super::domain::Point;
use crate::error::{Error, Result};

/// A record `(x, y)` with `y` in `{0, 1, ⊥}`; `None` is the unlabeled marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledExample {
    pub point: Point,
    pub label: Option<bool>,
}

impl LabeledExample {
    pub fn labeled(point: Point, label: bool) -> Self {
        LabeledExample {
            point,
            label: Some(label),
        }
    }

    pub fn unlabeled(point: Point) -> Self {
        LabeledExample { point, label: None }
    }

    pub fn is_labeled(&self) -> bool {
        self.label.is_some()
    }
}

/// Label `points` with `target`.
pub fn label_with(points: &[Point], target: impl Fn(Point) -> bool) -> Vec<LabeledExample> {
    points
        .iter()
        .map(|&p| LabeledExample::labeled(p, target(p)))
        .collect()
}

pub fn require_labeled(sample: &[LabeledExample]) -> Result<()> {
    match sample.iter().position(|r| r.label.is_none()) {
        Some(i) => Err(Error::domain(format!("record {i} is unlabeled"))),
        None => Ok(()),
    }
}

/// Boundaries of the `S ∘ T ∘ D` layout: `S = [0, s_end)`, `T = [s_end, t_end)`,
/// `D = [t_end, len)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segments {
    pub s_end: usize,
    pub t_end: usize,
}

/// Ordered records, optionally split into a labeled prefix `S`, a middle
/// block `T` and an unlabeled tail `D`. Record order is significant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartiallyLabeledDatabase {
    records: Vec<LabeledExample>,
    segments: Option<Segments>,
}

impl PartiallyLabeledDatabase {
    pub fn new(records: Vec<LabeledExample>) -> Self {
        PartiallyLabeledDatabase {
            records,
            segments: None,
        }
    }

    /// `S ∘ T ∘ D`. `S` must be fully labeled and `D` fully unlabeled;
    /// `T` records may carry labels (they are ignored by consumers).
    pub fn segmented(
        s: Vec<LabeledExample>,
        t: Vec<LabeledExample>,
        d: Vec<LabeledExample>,
    ) -> Result<Self> {
        let s_end = s.len();
        let t_end = s_end + t.len();
        let mut records = s;
        records.extend(t);
        records.extend(d);
        let db = PartiallyLabeledDatabase {
            records,
            segments: Some(Segments { s_end, t_end }),
        };
        db.validate()?;
        Ok(db)
    }

    pub fn with_segments(records: Vec<LabeledExample>, segments: Segments) -> Result<Self> {
        let db = PartiallyLabeledDatabase {
            records,
            segments: Some(segments),
        };
        db.validate()?;
        Ok(db)
    }

    pub fn validate(&self) -> Result<()> {
        let Some(seg) = self.segments else {
            return Ok(());
        };
        if seg.s_end > seg.t_end || seg.t_end > self.records.len() {
            return Err(Error::domain(format!(
                "segment boundaries {}/{} invalid for {} records",
                seg.s_end,
                seg.t_end,
                self.records.len()
            )));
        }
        if self.records[..seg.s_end].iter().any(|r| r.label.is_none()) {
            return Err(Error::domain("S segment contains unlabeled records"));
        }
        if self.records[seg.t_end..].iter().any(|r| r.label.is_some()) {
            return Err(Error::domain("D segment contains labeled records"));
        }
        Ok(())
    }

    pub fn records(&self) -> &[LabeledExample] {
        &self.records
    }

    pub fn into_records(self) -> Vec<LabeledExample> {
        self.records
    }

    pub fn segments(&self) -> Option<Segments> {
        self.segments
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn seg(&self) -> Result<Segments> {
        self.segments
            .ok_or_else(|| Error::domain("database has no S/T/D segmentation"))
    }

    pub fn s(&self) -> Result<&[LabeledExample]> {
        let seg = self.seg()?;
        Ok(&self.records[..seg.s_end])
    }

    pub fn t(&self) -> Result<&[LabeledExample]> {
        let seg = self.seg()?;
        Ok(&self.records[seg.s_end..seg.t_end])
    }

    pub fn d(&self) -> Result<&[LabeledExample]> {
        let seg = self.seg()?;
        Ok(&self.records[seg.t_end..])
    }

    /// Copy with record `index` replaced.
    pub fn replaced(&self, index: usize, record: LabeledExample) -> Result<Self> {
        if index >= self.records.len() {
            return Err(Error::domain(format!(
                "index {index} out of range for {} records",
                self.records.len()
            )));
        }
        let mut out = self.clone();
        out.records[index] = record;
        out.validate()?;
        Ok(out)
    }
}
