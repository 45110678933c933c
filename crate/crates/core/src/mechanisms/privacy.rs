use std::f64::consts::E;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Declared `(epsilon, delta)`. `delta == 0` is pure privacy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::domain(format!("epsilon must be finite and >= 0, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::domain(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(PrivacyParams { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Self {
        PrivacyParams { epsilon, delta: 0.0 }
    }

    pub fn is_pure(&self) -> bool {
        self.delta == 0.0
    }
}

/// `t = ceil((n / eps) * (3 + e^{eps_star}))`, the input size of the
/// subsampling wrapper around an `(eps_star, delta)`-private algorithm on `n` records.
pub fn subsample_input_size(n: usize, eps_star: f64, eps: f64) -> usize {
    ceil_tolerant(n as f64 / eps * (3.0 + eps_star.exp()))
}

/// `t = ceil((n / eps) * (3 + e^{2 eps_star}))` for the active subsampling wrapper.
pub fn active_pool_size(n: usize, eps_star: f64, eps: f64) -> usize {
    ceil_tolerant(n as f64 / eps * (3.0 + (2.0 * eps_star).exp()))
}

/// Ceiling that does not round `400.00000000000006` up to 401.
pub(crate) fn ceil_tolerant(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// A rule mapping the declared privacy of an inner algorithm to that of a
/// construction built around it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum PrivacyTransform {
    /// Relabel-then-run: `(eps, delta) -> (eps + 3, 4 e delta)`.
    LabelBoostProcedure,
    /// Run on `n` i.i.d. resamples: `(eps <= 1, delta) -> (ln 244, 2467 delta)`.
    IidResample,
    /// Random `n`-subset of `t` records: `(eps*, delta) -> (eps, 4 eps delta / (3 + e^{eps*}))`.
    Subsample { epsilon: f64 },
    /// Random index subset with the smallest `m` labeled:
    /// `(eps*, delta) -> (eps, (7 + e^{eps*}) / (3 + e^{2 eps*}) eps delta)`.
    ActiveSubsample { epsilon: f64 },
    /// Basic sequential composition with another mechanism on the same input.
    Compose { epsilon: f64, delta: f64 },
}

impl PrivacyTransform {
    pub fn apply(&self, p: PrivacyParams) -> Result<PrivacyParams> {
        match *self {
            PrivacyTransform::LabelBoostProcedure => Ok(PrivacyParams {
                epsilon: p.epsilon + 3.0,
                delta: 4.0 * E * p.delta,
            }),
            PrivacyTransform::IidResample => {
                if p.epsilon > 1.0 {
                    return Err(Error::domain(format!(
                        "i.i.d. resampling rule needs inner epsilon <= 1, got {}",
                        p.epsilon
                    )));
                }
                Ok(PrivacyParams {
                    epsilon: 244f64.ln(),
                    delta: 2467.0 * p.delta,
                })
            }
            PrivacyTransform::Subsample { epsilon } => {
                check_target(epsilon)?;
                Ok(PrivacyParams {
                    epsilon,
                    delta: 4.0 * epsilon * p.delta / (3.0 + p.epsilon.exp()),
                })
            }
            PrivacyTransform::ActiveSubsample { epsilon } => {
                check_target(epsilon)?;
                let factor = (7.0 + p.epsilon.exp()) / (3.0 + (2.0 * p.epsilon).exp());
                Ok(PrivacyParams {
                    epsilon,
                    delta: factor * epsilon * p.delta,
                })
            }
            PrivacyTransform::Compose { epsilon, delta } => Ok(PrivacyParams {
                epsilon: p.epsilon + epsilon,
                delta: p.delta + delta,
            }),
        }
    }
}

fn check_target(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("target epsilon must lie in (0, 1], got {eps}")))
    }
}

/// `label_boost_procedure`, `iid_resample`, `subsample:<eps>`,
/// `active_subsample:<eps>`, `compose:<eps>:<delta>`.
impl FromStr for PrivacyTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let rule = parts.next().unwrap_or_default();
        let mut num = || -> Result<f64> {
            parts
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::domain(format!("stage `{s}` needs a numeric argument")))
        };
        match rule {
            "label_boost_procedure" => Ok(PrivacyTransform::LabelBoostProcedure),
            "iid_resample" => Ok(PrivacyTransform::IidResample),
            "subsample" => Ok(PrivacyTransform::Subsample { epsilon: num()? }),
            "active_subsample" => Ok(PrivacyTransform::ActiveSubsample { epsilon: num()? }),
            "compose" => {
                let epsilon = num()?;
                let delta = num()?;
                Ok(PrivacyTransform::Compose { epsilon, delta })
            }
            other => Err(Error::domain(format!("unknown privacy stage rule `{other}`"))),
        }
    }
}

/// Folds a base guarantee through `stages`, innermost first.
pub fn compose_declared(base: PrivacyParams, stages: &[PrivacyTransform]) -> Result<PrivacyParams> {
    stages.iter().try_fold(base, |p, stage| stage.apply(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: PrivacyParams, eps: f64, delta: f64) -> bool {
        (a.epsilon - eps).abs() < 1e-12 && (a.delta - delta).abs() < 1e-15
    }

    #[test]
    fn subsample_size_example() {
        // 200 * (3 + e) = 1143.656...
        assert_eq!(subsample_input_size(100, 1.0, 0.5), 1144);
        assert_eq!(subsample_input_size(1, 0.0, 1.0), 4);
        assert_eq!(subsample_input_size(100, 0.0, 0.5), 800);
    }

    #[test]
    fn active_pool_size_example() {
        // 50 * (3 + e^2) = 519.45...
        assert_eq!(active_pool_size(50, 1.0, 1.0), 520);
    }

    #[test]
    fn perfectly_private_base_subsample_delta() {
        let d = 1e-6;
        let p = PrivacyTransform::Subsample { epsilon: 0.5 }
            .apply(PrivacyParams::new(0.0, d).unwrap())
            .unwrap();
        assert!(close(p, 0.5, 0.5 * d));
    }

    #[test]
    fn fold_examples() {
        let d = 1e-6;
        let base = PrivacyParams::new(1.0, d).unwrap();
        assert!(close(compose_declared(base, &[]).unwrap(), 1.0, d));
        assert!(close(
            compose_declared(base, &[PrivacyTransform::LabelBoostProcedure]).unwrap(),
            4.0,
            4.0 * E * d
        ));
        assert!(close(
            compose_declared(base, &[PrivacyTransform::IidResample]).unwrap(),
            244f64.ln(),
            2467.0 * d
        ));
        // iid rule is independent of base epsilon <= 1
        let low = PrivacyParams::new(0.1, d).unwrap();
        assert!(close(
            compose_declared(low, &[PrivacyTransform::IidResample]).unwrap(),
            244f64.ln(),
            2467.0 * d
        ));
        let high = PrivacyParams::new(2.0, d).unwrap();
        assert!(compose_declared(high, &[PrivacyTransform::IidResample]).is_err());
    }

    #[test]
    fn final_stage_of_label_boost_fold_stays_within_41_delta() {
        let d = 1e-6;
        let base = PrivacyParams::new(1.0, d).unwrap();
        let last = compose_declared(
            base,
            &[PrivacyTransform::IidResample, PrivacyTransform::Subsample { epsilon: 1.0 }],
        )
        .unwrap();
        assert!(last.epsilon <= 1.0 && last.delta <= 41.0 * d);
        let iter = compose_declared(
            PrivacyParams::new(1.0, 41.0 * d).unwrap(),
            &[PrivacyTransform::LabelBoostProcedure, PrivacyTransform::Subsample { epsilon: 1.0 }],
        )
        .unwrap();
        assert!(iter.epsilon <= 1.0 && iter.delta <= 41.0 * d);
    }

    #[test]
    fn stage_parsing() {
        assert_eq!(
            "subsample:0.5".parse::<PrivacyTransform>().unwrap(),
            PrivacyTransform::Subsample { epsilon: 0.5 }
        );
        assert!("nonsense".parse::<PrivacyTransform>().is_err());
        assert!("subsample".parse::<PrivacyTransform>().is_err());
    }

    #[test]
    fn fold_is_associative() {
        let base = PrivacyParams::new(0.7, 1e-5).unwrap();
        let stages = [
            PrivacyTransform::LabelBoostProcedure,
            PrivacyTransform::Subsample { epsilon: 1.0 },
            PrivacyTransform::IidResample,
            PrivacyTransform::Compose { epsilon: 0.5, delta: 1e-7 },
            PrivacyTransform::ActiveSubsample { epsilon: 0.25 },
        ];
        let whole = compose_declared(base, &stages).unwrap();
        for split in 0..=stages.len() {
            let mid = compose_declared(base, &stages[..split]).unwrap();
            let rest = compose_declared(mid, &stages[split..]).unwrap();
            assert_eq!(rest, whole);
        }
    }
}
