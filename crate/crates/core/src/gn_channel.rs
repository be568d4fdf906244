//! Gaussian-noise channel `χ(γ) → χ(γ) e^{−|γ|²σ²}`.
//!
//! Equivalently, a random displacement `D(α)` with
//! `p(α) = e^{−|α|²/σ²} / (πσ²)`, i.e. `⟨|α|²⟩ = σ²` and each quadrature
//! of `α` carrying variance `σ²/2`. In moment form: the mean is unchanged and
//! `σ²/2` is added to both quadrature variances.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::gaussian::{apply_displacement, symmetrize, GaussianState};
use crate::rng::{sample_chunked, BivariateStats};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnChannel {
    sigma2: f64,
}

/// Empirical output of the Kraus sampler with standard errors on every moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausEstimate {
    pub state: GaussianState,
    pub stats: Option<BivariateStats>,
}

impl GnChannel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return domain(format!("noise variance must be finite and >= 0, got {sigma2}"));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn apply(&self, state: &GaussianState) -> GaussianState {
        let mut out = *state;
        out.cov[(0, 0)] += 0.5 * self.sigma2;
        out.cov[(1, 1)] += 0.5 * self.sigma2;
        out
    }

    /// `apply(a) ∘ apply(b) = apply(a + b)`.
    pub fn compose(&self, other: &GnChannel) -> GnChannel {
        GnChannel {
            sigma2: self.sigma2 + other.sigma2,
        }
    }

    /// Draws one Kraus amplitude.
    pub fn sample_alpha<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let s = (0.5 * self.sigma2).sqrt();
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        Complex64::new(s * x, s * y)
    }

    pub fn apply_kraus_mc(&self, state: &GaussianState, n_samples: usize, seed: u64) -> Result<GaussianState> {
        Ok(self.apply_kraus_mc_with_errors(state, n_samples, seed)?.state)
    }

    /// Averages `D(α) ρ D(α)†` over `n_samples` draws. The returned state is the
    /// equal-weight mixture of the displaced states.
    pub fn apply_kraus_mc_with_errors(&self, state: &GaussianState, n_samples: usize, seed: u64) -> Result<KrausEstimate> {
        if n_samples == 0 {
            return domain("n_samples must be >= 1");
        }
        if self.sigma2 == 0.0 {
            return Ok(KrausEstimate { state: *state, stats: None });
        }
        let means = sample_chunked(seed, n_samples, |rng, _| {
            let m = apply_displacement(state, self.sample_alpha(rng)).mean;
            (m.re, m.im)
        });
        let stats = BivariateStats::from_samples(&means);
        let mut cov = state.cov;
        cov[(0, 0)] += stats.cov[0];
        cov[(0, 1)] += stats.cov[1];
        cov[(1, 0)] += stats.cov[1];
        cov[(1, 1)] += stats.cov[2];
        let out = GaussianState::from_parts_unchecked(Complex64::new(stats.mean[0], stats.mean[1]), symmetrize(cov));
        Ok(KrausEstimate {
            state: out,
            stats: Some(stats),
        })
    }
}

impl KrausEstimate {
    /// Largest deviation from `expected`, in standard errors of the sampled moments.
    pub fn z_score(&self, input: &GaussianState, expected: &GaussianState) -> f64 {
        match &self.stats {
            None => {
                if self.state == *expected {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Some(s) => {
                let added = expected.cov - input.cov;
                s.max_z_score(
                    [expected.mean.re, expected.mean.im],
                    [added[(0, 0)], added[(0, 1)], added[(1, 1)]],
                )
            }
        }
    }
}
