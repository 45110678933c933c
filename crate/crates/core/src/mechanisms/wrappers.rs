use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::mechanism::Mechanism;
use super::privacy::{subsample_input_size, PrivacyParams, PrivacyTransform};
use crate::error::{Error, Result};
use crate::rng::PrivRng;

/// `n` distinct indices out of `0..len`, uniformly at random, in random order.
pub fn subsample_indices<R: Rng + ?Sized>(len: usize, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if n > len {
        return Err(Error::domain(format!("cannot pick {n} of {len} records")));
    }
    let mut picked = index::sample(rng, len, n).into_vec();
    picked.shuffle(rng);
    Ok(picked)
}

/// `n` indices out of `0..len` drawn independently with replacement.
pub fn resample_indices<R: Rng + ?Sized>(len: usize, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if len == 0 && n > 0 {
        return Err(Error::domain("cannot resample from an empty database"));
    }
    Ok((0..n).map(|_| rng.random_range(0..len)).collect())
}

/// Runs `inner` on a uniformly random, shuffled `n`-subset of a database of
/// at least `t = ceil((n / eps)(3 + e^{eps*}))` records.
#[derive(Clone, Debug)]
pub struct Subsample<M> {
    inner: M,
    n: usize,
    epsilon: f64,
    inner_privacy: PrivacyParams,
}

impl<M> Subsample<M> {
    pub fn new<R>(inner: M, n: usize, epsilon: f64) -> Result<Self>
    where
        M: Mechanism<R>,
    {
        let inner_privacy = inner.declared_privacy();
        // Validates epsilon.
        PrivacyTransform::Subsample { epsilon }.apply(inner_privacy)?;
        Ok(Subsample {
            inner,
            n,
            epsilon,
            inner_privacy,
        })
    }

    /// Smallest database the wrapper accepts.
    pub fn input_size(&self) -> usize {
        subsample_input_size(self.n, self.inner_privacy.epsilon, self.epsilon)
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<R: Clone + Sync, M: Mechanism<R>> Mechanism<R> for Subsample<M> {
    type Outcome = M::Outcome;

    fn name(&self) -> String {
        format!("subsample[n={}, eps={}]({})", self.n, self.epsilon, self.inner.name())
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyTransform::Subsample { epsilon: self.epsilon }
            .apply(self.inner_privacy)
            .expect("validated in new")
    }

    fn run(&self, db: &[R], rng: &mut PrivRng) -> Result<M::Outcome> {
        let t = self.input_size();
        if db.len() < t {
            return Err(Error::domain(format!(
                "subsampling wrapper needs at least {t} records, got {}",
                db.len()
            )));
        }
        let picked = subsample_indices(db.len(), self.n, rng)?;
        let sub: Vec<R> = picked.iter().map(|&i| db[i].clone()).collect();
        self.inner.run(&sub, rng)
    }
}

/// Runs `inner` on `|db|` records drawn i.i.d. with replacement from `db`.
#[derive(Clone, Debug)]
pub struct IidResample<M> {
    inner: M,
    inner_privacy: PrivacyParams,
}

impl<M> IidResample<M> {
    pub fn new<R>(inner: M) -> Result<Self>
    where
        M: Mechanism<R>,
    {
        let inner_privacy = inner.declared_privacy();
        PrivacyTransform::IidResample.apply(inner_privacy)?;
        Ok(IidResample { inner, inner_privacy })
    }
}

impl<R: Clone + Sync, M: Mechanism<R>> Mechanism<R> for IidResample<M> {
    type Outcome = M::Outcome;

    fn name(&self) -> String {
        format!("iid_resample({})", self.inner.name())
    }

    fn declared_privacy(&self) -> PrivacyParams {
        PrivacyTransform::IidResample
            .apply(self.inner_privacy)
            .expect("validated in new")
    }

    fn run(&self, db: &[R], rng: &mut PrivRng) -> Result<M::Outcome> {
        let picked = resample_indices(db.len(), db.len(), rng)?;
        let sub: Vec<R> = picked.iter().map(|&i| db[i].clone()).collect();
        self.inner.run(&sub, rng)
    }
}
