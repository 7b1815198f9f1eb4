//! Simulated users: hidden preferences, candidate actions and noisy rewards.
//!
//! Every generator is a pure function of its seed (and round index), so two
//! policies driven by the same [`EnvironmentSpec`] see the same candidates and,
//! when they pick the same action, the same reward.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::hierarchy::{Hierarchy, ProfileSet};
use crate::{Error, RealMatrix, RealVector, Result};

const CONTEXT_STREAM: u64 = 0;
const REWARD_STREAM: u64 = 1;

fn round_rng(seed: u64, t: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t.wrapping_mul(2).wrapping_add(stream));
    rng
}

fn gaussian_vector(dim: usize, rng: &mut impl Rng) -> RealVector {
    RealVector::from_fn(dim, |_, _| rng.sample(StandardNormal))
}

/// Uniform draw from the unit sphere in `R^dim`.
pub fn unit_sphere(dim: usize, rng: &mut impl Rng) -> RealVector {
    loop {
        let g = gaussian_vector(dim, rng);
        let n = g.norm();
        if n > 1e-12 {
            return g / n;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    Bernoulli,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Standard deviation for Gaussian noise; ignored for Bernoulli.
    pub sigma: f64,
}

impl NoiseModel {
    pub fn gaussian(sigma: f64) -> Self {
        Self { kind: NoiseKind::Gaussian, sigma }
    }

    pub fn bernoulli() -> Self {
        Self { kind: NoiseKind::Bernoulli, sigma: 0.0 }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::gaussian(0.1)
    }
}

/// One simulated user.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvironmentSpec {
    pub w_star: RealVector,
    pub noise: NoiseModel,
    pub n_actions: usize,
    /// Scale each candidate by an independent uniform `[0.5, 1]` magnitude.
    pub scale_magnitudes: bool,
    /// Replaces the random candidates with the same fixed set every round.
    pub fixed_actions: Option<Vec<RealVector>>,
    pub seed: u64,
}

impl EnvironmentSpec {
    pub fn new(w_star: RealVector, seed: u64) -> Self {
        Self { w_star, noise: NoiseModel::default(), n_actions: 20, scale_magnitudes: false, fixed_actions: None, seed }
    }

    pub fn dim(&self) -> usize {
        self.w_star.len()
    }

    pub fn expected_reward(&self, x: &RealVector) -> f64 {
        self.w_star.dot(x)
    }
}

/// Candidate set for round `t`: `n_actions` points on the unit sphere.
pub fn gen_contexts(spec: &EnvironmentSpec, t: u64) -> Vec<RealVector> {
    if let Some(fixed) = &spec.fixed_actions {
        return fixed.clone();
    }
    let mut rng = round_rng(spec.seed, t, CONTEXT_STREAM);
    (0..spec.n_actions)
        .map(|_| {
            let x = unit_sphere(spec.dim(), &mut rng);
            if spec.scale_magnitudes {
                x * rng.random_range(0.5..=1.0)
            } else {
                x
            }
        })
        .collect()
}

/// Noisy reward for playing `x` in round `t`; mean `w*ᵀx`.
///
/// The noise draw depends only on `(seed, t)`, so policies that play the same
/// action in the same round observe the same reward.
pub fn sample_reward(spec: &EnvironmentSpec, x: &RealVector, t: u64) -> f64 {
    let mut rng = round_rng(spec.seed, t, REWARD_STREAM);
    let mean = spec.expected_reward(x);
    match spec.noise.kind {
        NoiseKind::Gaussian => {
            let eps: f64 = rng.sample(StandardNormal);
            mean + spec.noise.sigma * eps
        }
        NoiseKind::Bernoulli => {
            let u: f64 = rng.random();
            if u < mean.clamp(0.0, 1.0) {
                1.0
            } else {
                0.0
            }
        }
    }
}

/// Exhaustive `argmax_x w*ᵀx`; ties go to the lowest index.
pub fn best_action_value(spec: &EnvironmentSpec, contexts: &[RealVector]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, x) in contexts.iter().enumerate() {
        let v = spec.expected_reward(x);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.ok_or(Error::EmptyContext)
}

/// A unit-norm `w*` with in-subspace norm `√(1−β²)` on the first `k`
/// coordinates and residual norm `β` on the rest, plus the coordinate
/// hierarchy spanning that subspace.
pub fn gen_synthetic_wstar(dim: usize, k: usize, beta: f64, seed: u64) -> Result<(RealVector, Hierarchy)> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidConfig(format!("β = {beta} outside [0, 1]")));
    }
    if k == dim && beta > 0.0 {
        return Err(Error::InvalidConfig("β > 0 needs K < D".into()));
    }
    let h = Hierarchy::coordinate(dim, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inside = unit_sphere(k, &mut rng) * (1.0 - beta * beta).sqrt();
    let mut w = RealVector::zeros(dim);
    w.rows_mut(0, k).copy_from(&inside);
    if k < dim {
        let outside = unit_sphere(dim - k, &mut rng) * beta;
        w.rows_mut(k, dim - k).copy_from(&outside);
    }
    Ok((w, h))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub dim: usize,
    pub k_true: usize,
    pub n: usize,
    /// Per-profile residual magnitudes are drawn uniformly from `[beta_min, beta_max]`.
    pub beta_min: f64,
    pub beta_max: f64,
    pub norm: f64,
}

impl PopulationSpec {
    pub fn new(dim: usize, k_true: usize, n: usize) -> Self {
        Self { dim, k_true, n, beta_min: 0.0, beta_max: 0.5, norm: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.k_true == 0 || self.k_true > self.dim {
            return Err(Error::InvalidConfig(format!("need 1 ≤ K_true ≤ D, got K_true = {}, D = {}", self.k_true, self.dim)));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("population needs N ≥ 1".into()));
        }
        if !(0.0 <= self.beta_min && self.beta_min <= self.beta_max && self.beta_max <= 1.0) {
            return Err(Error::InvalidConfig(format!("β range [{}, {}] invalid", self.beta_min, self.beta_max)));
        }
        if self.k_true == self.dim && self.beta_max > 0.0 {
            return Err(Error::InvalidConfig("β > 0 needs K_true < D".into()));
        }
        if !(self.norm > 0.0 && self.norm.is_finite()) {
            return Err(Error::InvalidConfig("profile norm must be > 0".into()));
        }
        Ok(())
    }

    pub fn generate(&self, seed: u64) -> Result<Population> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = RealMatrix::from_fn(self.dim, self.k_true, |_, _| rng.sample(StandardNormal));
        let basis = g.qr().q();
        let population = Population { basis, norm: self.norm, profiles: None };
        let cols = (0..self.n)
            .map(|i| {
                let beta =
                    if self.beta_max > self.beta_min { rng.random_range(self.beta_min..=self.beta_max) } else { self.beta_min };
                population.sample_user(beta, seed.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ i as u64)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Population { profiles: Some(ProfileSet::from_columns(&cols)?), ..population })
    }
}

/// A generated population: the true shared subspace and the profiles drawn around it.
#[derive(Clone, Debug)]
pub struct Population {
    /// `D × K_true` orthonormal basis of the shared subspace.
    pub basis: RealMatrix,
    pub norm: f64,
    profiles: Option<ProfileSet>,
}

impl Population {
    pub fn profiles(&self) -> &ProfileSet {
        self.profiles.as_ref().expect("population generated without profiles")
    }

    /// A user whose preference has residual `β·norm` outside the shared subspace.
    pub fn sample_user(&self, beta: f64, seed: u64) -> Result<RealVector> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidConfig(format!("β = {beta} outside [0, 1]")));
        }
        let (d, k) = self.basis.shape();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coef = unit_sphere(k, &mut rng) * (1.0 - beta * beta).sqrt();
        let mut w = &self.basis * coef;
        if beta > 0.0 {
            if k == d {
                return Err(Error::InvalidConfig("β > 0 needs K_true < D".into()));
            }
            let residual = loop {
                let g = gaussian_vector(d, &mut rng);
                let r = &g - &self.basis * self.basis.tr_mul(&g);
                if r.norm() > 1e-8 {
                    break r.normalize();
                }
            };
            w += residual * beta;
        }
        Ok(w * self.norm)
    }

    pub fn true_hierarchy(&self) -> Result<Hierarchy> {
        Hierarchy::orthonormal(self.basis.clone())
    }
}

pub fn gen_profile_population(spec: &PopulationSpec, seed: u64) -> Result<ProfileSet> {
    Ok(spec.generate(seed)?.profiles().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{decompose, learn_u};

    fn spec(d: usize, seed: u64) -> EnvironmentSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EnvironmentSpec::new(unit_sphere(d, &mut rng), seed)
    }

    #[test]
    fn contexts_are_bounded_and_deterministic() {
        let mut s = spec(7, 3);
        for scaled in [false, true] {
            s.scale_magnitudes = scaled;
            for t in 0..50 {
                let xs = gen_contexts(&s, t);
                assert_eq!(xs.len(), 20);
                assert!(xs.iter().all(|x| x.norm() <= 1.0 + 1e-12));
                if scaled {
                    assert!(xs.iter().all(|x| x.norm() >= 0.5 - 1e-12));
                }
                assert_eq!(xs, gen_contexts(&s, t));
            }
        }
        assert_ne!(gen_contexts(&s, 0), gen_contexts(&s, 1));
    }

    #[test]
    fn context_mean_is_zero() {
        // Each coordinate of a uniform unit vector in R^d has variance 1/d.
        let mut s = spec(4, 11);
        s.n_actions = 100;
        let draws = 1000u64;
        let mut sum = RealVector::zeros(4);
        for t in 0..draws {
            for x in gen_contexts(&s, t) {
                sum += x;
            }
        }
        let n = (draws * 100) as f64;
        let band = 3.0 * (0.25 / n).sqrt();
        assert!((sum / n).iter().all(|m| m.abs() < band));
    }

    #[test]
    fn rewards() {
        let mut s = spec(5, 1);
        s.noise = NoiseModel::gaussian(0.0);
        let x = gen_contexts(&s, 0)[0].clone();
        assert_eq!(sample_reward(&s, &x, 0), s.w_star.dot(&x));

        s.noise = NoiseModel::gaussian(0.1);
        let mean = (0..10_000).map(|t| sample_reward(&s, &x, t)).sum::<f64>() / 1e4;
        assert!((mean - s.w_star.dot(&x)).abs() < 0.003);
        assert_eq!(sample_reward(&s, &x, 17), sample_reward(&s, &x, 17));

        s.noise = NoiseModel::bernoulli();
        let mut orth = RealVector::zeros(5);
        orth[0] = s.w_star[1];
        orth[1] = -s.w_star[0];
        assert!((0..1000).all(|t| sample_reward(&s, &orth, t) == 0.0));
    }

    #[test]
    fn best_action() {
        let s = spec(6, 2);
        let w = s.w_star.clone();
        let (i, v) = best_action_value(&s, &[w.clone(), -w.clone()]).unwrap();
        assert_eq!(i, 0);
        assert!((v - 1.0).abs() < 1e-12);
        assert!(matches!(best_action_value(&s, &[]), Err(Error::EmptyContext)));

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let xs: Vec<_> = (0..50).map(|_| unit_sphere(6, &mut rng)).collect();
        let mut brute = (0, f64::MIN);
        for (j, x) in xs.iter().enumerate() {
            let val: f64 = (0..6).map(|k| x[k] * w[k]).sum();
            if val > brute.1 {
                brute = (j, val);
            }
        }
        let (i, v) = best_action_value(&s, &xs).unwrap();
        assert_eq!(i, brute.0);
        assert!((v - brute.1).abs() < 1e-12);
    }

    #[test]
    fn synthetic_wstar_residuals() {
        for (seed, beta) in [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
            let (w, h) = gen_synthetic_wstar(25, 5, beta, seed as u64).unwrap();
            assert!((w.norm() - 1.0).abs() < 1e-10);
            let d = decompose(&w, &h).unwrap();
            assert!((d.s_perp - beta).abs() < 1e-10);
            assert!((d.s_tilde - (1.0 - beta * beta).sqrt()).abs() < 1e-10);
        }
        assert!(gen_synthetic_wstar(5, 5, 0.5, 0).is_err());
    }

    #[test]
    fn population_shapes_and_determinism() {
        let spec = PopulationSpec { beta_min: 0.0, beta_max: 0.0, ..PopulationSpec::new(12, 3, 20) };
        let p = gen_profile_population(&spec, 4).unwrap();
        assert_eq!((p.dim(), p.len()), (12, 20));
        assert!(p.matrix().column_iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
        assert_eq!(p, gen_profile_population(&spec, 4).unwrap());

        let h = learn_u(&p, 3, false).unwrap();
        for i in 0..p.len() {
            assert!(decompose(&p.profile(i), &h).unwrap().s_perp < 1e-8);
        }

        let big = gen_profile_population(&PopulationSpec::new(100, 5, 77), 1).unwrap();
        assert_eq!((big.dim(), big.len()), (100, 77));
    }

    #[test]
    fn population_outlier_residual() {
        let pop = PopulationSpec::new(10, 3, 5).generate(0).unwrap();
        let h = pop.true_hierarchy().unwrap();
        let w = pop.sample_user(0.9, 77).unwrap();
        assert!((w.norm() - 1.0).abs() < 1e-12);
        assert!((decompose(&w, &h).unwrap().s_perp - 0.9).abs() < 1e-10);
    }
}
