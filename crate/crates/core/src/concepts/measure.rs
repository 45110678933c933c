use num_rational::Ratio;

use super::bits::BitRow;
use super::data::LabeledExample;
use super::domain::Point;
use crate::error::{Error, Result};

/// Anything that labels domain points.
pub trait Predicate {
    fn eval(&self, p: Point) -> bool;
}

impl Predicate for BitRow {
    fn eval(&self, p: Point) -> bool {
        self.get(p.index())
    }
}

impl<F: Fn(Point) -> bool> Predicate for F {
    fn eval(&self, p: Point) -> bool {
        self(p)
    }
}

/// Number of labeled records `h` gets wrong.
pub fn mistakes(h: &impl Predicate, sample: &[LabeledExample]) -> usize {
    sample
        .iter()
        .filter(|r| r.label.is_some_and(|y| h.eval(r.point) != y))
        .count()
}

/// Number of labeled records `h` gets right: the exponential-mechanism score.
pub fn agreements(h: &impl Predicate, sample: &[LabeledExample]) -> usize {
    sample
        .iter()
        .filter(|r| r.label.is_some_and(|y| h.eval(r.point) == y))
        .count()
}

/// `error_S(h)`, the fraction of `S` that `h` mislabels, as an exact rational.
pub fn empirical_error(h: &impl Predicate, sample: &[LabeledExample]) -> Result<Ratio<u64>> {
    if sample.is_empty() {
        return Err(Error::domain("empirical error of an empty sample"));
    }
    super::data::require_labeled(sample)?;
    Ok(Ratio::new(mistakes(h, sample) as u64, sample.len() as u64))
}

/// `error_D(h, c)`, the fraction of `D` on which `h` and `c` disagree.
pub fn disagreement(h: &impl Predicate, c: &impl Predicate, points: &[Point]) -> Result<Ratio<u64>> {
    if points.is_empty() {
        return Err(Error::domain("disagreement over an empty point list"));
    }
    let n = points.iter().filter(|&&p| h.eval(p) != c.eval(p)).count();
    Ok(Ratio::new(n as u64, points.len() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::data::label_with;

    fn pts(v: &[u32]) -> Vec<Point> {
        v.iter().map(|&x| Point(x)).collect()
    }

    #[test]
    fn constant_zero_on_three_positives() {
        let s: Vec<_> = (0..10)
            .map(|i| LabeledExample::labeled(Point(i), i < 3))
            .collect();
        let e = empirical_error(&|_: Point| false, &s).unwrap();
        assert_eq!(e, Ratio::new(3, 10));
        assert_eq!(*e.numer() * 10 / *e.denom(), 3);
    }

    #[test]
    fn perfect_hypothesis_has_zero_error() {
        let c = |p: Point| p.0.is_multiple_of(3);
        let s = label_with(&pts(&[0, 1, 2, 3, 4, 5, 6]), c);
        assert_eq!(empirical_error(&c, &s).unwrap(), Ratio::from_integer(0));
    }

    #[test]
    fn empty_and_unlabeled_samples_rejected() {
        assert!(empirical_error(&|_: Point| true, &[]).is_err());
        let s = [LabeledExample::unlabeled(Point(0))];
        assert!(empirical_error(&|_: Point| true, &s).is_err());
        assert!(disagreement(&|_: Point| true, &|_: Point| true, &[]).is_err());
    }

    #[test]
    fn disagreement_cases() {
        let d = pts(&[0, 1, 2, 3]);
        let c = |p: Point| p.0 < 2;
        assert_eq!(disagreement(&c, &c, &d).unwrap(), Ratio::from_integer(0));
        let h = |p: Point| p.0 < 3;
        assert_eq!(disagreement(&h, &c, &d).unwrap(), Ratio::new(1, 4));
        assert_eq!(
            disagreement(&h, &c, &d).unwrap(),
            empirical_error(&h, &label_with(&d, c)).unwrap()
        );
    }
}
