//! Single-mode Gaussian states in moment form.
//!
//! A state is stored as its mean amplitude `⟨a⟩` and the symmetrised
//! covariance of the quadratures `q = (a + a†)/2`, `p = (a − a†)/(2i)`.
//! With this convention the vacuum has covariance `diag(1/4, 1/4)` and the
//! characteristic function `χ(γ) = Tr[ρ D(γ)]`, `D(γ) = exp(γa† − γ*a)`, reads
//!
//! ```text
//! χ(γ) = exp(i kᵀx̄ − ½ kᵀ Σ k),   k = 2 (Im γ, −Re γ).
//! ```
//!
//! Every map in this crate is Gaussian, so the moments are a lossless
//! representation.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Tolerance used when validating the uncertainty bound.
pub const UNCERTAINTY_TOL: f64 = 1e-10;

/// Variance of either quadrature in the vacuum.
pub const VACUUM_VARIANCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean: Complex64,
    pub cov: Matrix2<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccupationSource {
    BosonicPlanck,
    SpinBrillouin,
}

/// Mean quantum number of an environment in equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalOccupation {
    pub n: f64,
    pub source: OccupationSource,
}

impl ThermalOccupation {
    pub fn new(n: f64, source: OccupationSource) -> Result<Self> {
        if !(n >= 0.0 && n.is_finite()) {
            return domain(format!("thermal occupation must be finite and >= 0, got {n}"));
        }
        Ok(Self { n, source })
    }

    pub fn bosonic(n: f64) -> Result<Self> {
        Self::new(n, OccupationSource::BosonicPlanck)
    }

    /// Planck occupation of a mode of frequency `omega` at temperature `temperature`.
    pub fn planck(omega: f64, temperature: f64) -> Result<Self> {
        Self::bosonic(planck_occupation(omega, temperature)?)
    }

    /// Quadrature variance `(n + 1/2)/2` of the corresponding thermal state.
    pub fn quadrature_variance(&self) -> f64 {
        0.5 * (self.n + 0.5)
    }
}

/// `n_T = 1/(e^{ω/T} − 1)`, with `T = 0` mapped to the vacuum limit.
pub fn planck_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return domain(format!("mode frequency must be positive, got {omega}"));
    }
    if !(temperature >= 0.0) {
        return domain(format!("temperature must be >= 0, got {temperature}"));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Inverse of [`planck_occupation`]: the temperature giving occupation `n`.
pub fn temperature_for_occupation(omega: f64, n: f64) -> Result<f64> {
    if !(omega > 0.0) || !(n >= 0.0) {
        return domain("need omega > 0 and n >= 0");
    }
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(omega / (1.0 / n).ln_1p())
}

impl GaussianState {
    /// Validated constructor: `cov` must be symmetric, positive and satisfy
    /// `det(cov) ≥ 1/16` (Robertson–Schrödinger bound).
    pub fn new(mean: Complex64, cov: Matrix2<f64>) -> Result<Self> {
        let state = Self { mean, cov };
        state.validate()?;
        Ok(state)
    }

    /// Constructor that skips validation. Used for empirical and oracle
    /// moments which may violate the bound by sampling or truncation error.
    pub fn from_parts_unchecked(mean: Complex64, cov: Matrix2<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn vacuum() -> Self {
        Self::thermal(0.0)
    }

    pub fn coherent(alpha: Complex64) -> Self {
        Self::vacuum().displaced(alpha)
    }

    /// Thermal state with mean occupation `n` (not validated, `n` must be >= 0).
    pub fn thermal(n: f64) -> Self {
        let v = 0.5 * (n + 0.5);
        Self {
            mean: Complex64::new(0.0, 0.0),
            cov: Matrix2::new(v, 0.0, 0.0, v),
        }
    }

    /// Displaced squeezed thermal state. `r` squeezes the quadrature at angle
    /// `theta` (measured from the q axis); the covariance is
    /// `(n+½)/2 · R(θ) diag(e^{−2r}, e^{2r}) R(θ)ᵀ`.
    pub fn squeezed_thermal(n: f64, r: f64, theta: f64, alpha: Complex64) -> Result<Self> {
        if !(n >= 0.0) {
            return domain("thermal occupation must be >= 0");
        }
        let nu = 0.5 * (n + 0.5);
        let (s, c) = theta.sin_cos();
        let rot = Matrix2::new(c, -s, s, c);
        let diag = Matrix2::new((-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp());
        let cov = rot * diag * rot.transpose() * nu;
        Self::new(alpha, symmetrize(cov))
    }

    /// Moments from ladder-operator expectations `⟨a⟩`, `⟨a†a⟩`, `⟨a²⟩`.
    pub fn from_ladder_moments(mean: Complex64, number: f64, a_squared: Complex64) -> Self {
        let n_c = number - mean.norm_sqr();
        let m2 = a_squared - mean * mean;
        let sym = 0.5 * (2.0 * n_c + 1.0);
        let vq = 0.5 * (sym + m2.re);
        let vp = 0.5 * (sym - m2.re);
        let vqp = 0.5 * m2.im;
        Self {
            mean,
            cov: Matrix2::new(vq, vqp, vqp, vp),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cov;
        if !(self.mean.re.is_finite() && self.mean.im.is_finite()) || c.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite moments".into()));
        }
        if (c[(0, 1)] - c[(1, 0)]).abs() > UNCERTAINTY_TOL {
            return Err(Error::InvalidState("covariance is not symmetric".into()));
        }
        if c[(0, 0)] <= 0.0 || c[(1, 1)] <= 0.0 {
            return Err(Error::InvalidState("covariance is not positive".into()));
        }
        if self.cov.determinant() < 1.0 / 16.0 - UNCERTAINTY_TOL {
            return Err(Error::InvalidState(format!(
                "uncertainty bound violated: det(cov) = {} < 1/16",
                self.cov.determinant()
            )));
        }
        Ok(())
    }

    /// Eigenvalues of the covariance, ascending.
    pub fn cov_eigenvalues(&self) -> [f64; 2] {
        let (a, b, d) = (self.cov[(0, 0)], self.cov[(0, 1)], self.cov[(1, 1)]);
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mid - rad, mid + rad]
    }

    /// `⟨a†a⟩`.
    pub fn number(&self) -> f64 {
        self.cov[(0, 0)] + self.cov[(1, 1)] - 0.5 + self.mean.norm_sqr()
    }

    /// `⟨a²⟩`.
    pub fn a_squared(&self) -> Complex64 {
        let centered = Complex64::new(self.cov[(0, 0)] - self.cov[(1, 1)], 2.0 * self.cov[(0, 1)]);
        centered + self.mean * self.mean
    }

    /// Characteristic function `Tr[ρ D(γ)]`.
    pub fn char_fn(&self, gamma: Complex64) -> Complex64 {
        let k0 = 2.0 * gamma.im;
        let k1 = -2.0 * gamma.re;
        let linear = k0 * self.mean.re + k1 * self.mean.im;
        let quad = k0 * k0 * self.cov[(0, 0)] + 2.0 * k0 * k1 * self.cov[(0, 1)] + k1 * k1 * self.cov[(1, 1)];
        Complex64::new(-0.5 * quad, linear).exp()
    }

    /// Action of the displacement operator: the mean shifts by `alpha`.
    pub fn displaced(&self, alpha: Complex64) -> Self {
        Self {
            mean: self.mean + alpha,
            cov: self.cov,
        }
    }

    /// Largest absolute difference over mean components and covariance entries.
    pub fn moment_distance(&self, other: &Self) -> f64 {
        let dm = self.mean - other.mean;
        let dc = (self.cov - other.cov).abs().max();
        dm.re.abs().max(dm.im.abs()).max(dc)
    }
}

/// Thermal state of a mode with frequency `omega` at temperature `temperature`.
pub fn thermal_state(omega: f64, temperature: f64) -> Result<GaussianState> {
    Ok(GaussianState::thermal(planck_occupation(omega, temperature)?))
}

/// `D(α) ρ D(α)†` at the moment level.
pub fn apply_displacement(state: &GaussianState, alpha: Complex64) -> GaussianState {
    state.displaced(alpha)
}

/// Real 2×2 matrix representing multiplication of `a` by the complex number `z`
/// acting on the quadrature vector `(q, p)`.
pub(crate) fn complex_as_rotation(z: Complex64) -> Matrix2<f64> {
    Matrix2::new(z.re, -z.im, z.im, z.re)
}

pub(crate) fn symmetrize(m: Matrix2<f64>) -> Matrix2<f64> {
    (m + m.transpose()) * 0.5
}
