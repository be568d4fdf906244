//! A mode driven by a classical Ornstein–Uhlenbeck field,
//!
//! ```text
//! H(t) = ν a†a + a ζ*(t) e^{iω_ζ t} + a† ζ(t) e^{−iω_ζ t},   ζ = ζ_x + i ζ_y,
//! ```
//!
//! where `ζ_x`, `ζ_y` are independent stationary OU processes with
//! autocovariance `K(Δt) = (G/2τ) e^{−|Δt|/τ}`.
//!
//! The Hamiltonian is linear in `a`, so in the frame rotating at `ν` each
//! realisation is a displacement by `α(t) = −i ∫₀ᵗ ζ(s) e^{−iδ_ζ s} ds`.
//! Both quadratures of `α` have variance
//!
//! ```text
//! σ(t) = ∫₀ᵗ∫₀ᵗ cos[δ_ζ (t₁ − t₂)] K(t₁ − t₂) dt₁ dt₂,
//! ```
//!
//! so the ensemble adds `σ(t)` to each quadrature variance. As a
//! Gaussian-noise channel (which adds `σ²/2`) this is `σ² = 2σ(t)`.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::gaussian::{symmetrize, GaussianState};
use crate::gn_channel::GnChannel;
use crate::rng::{substream, BivariateStats, CHUNK};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuParams {
    /// Amplitude `G`.
    pub g: f64,
    /// Correlation time `τ`.
    pub tau: f64,
    /// Carrier frequency `ω_ζ`.
    pub omega_zeta: f64,
    /// Detuning `δ_ζ = ω_ζ − ν`.
    pub delta_zeta: f64,
}

impl OuParams {
    pub fn new(g: f64, tau: f64, omega_zeta: f64, nu: f64) -> Result<Self> {
        Self::with_detuning(g, tau, omega_zeta, omega_zeta - nu)
    }

    pub fn with_detuning(g: f64, tau: f64, omega_zeta: f64, delta_zeta: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return domain(format!("correlation time must be > 0, got {tau}"));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return domain(format!("OU amplitude must be >= 0, got {g}"));
        }
        if !(omega_zeta.is_finite() && delta_zeta.is_finite()) {
            return domain("field frequencies must be finite");
        }
        Ok(Self {
            g,
            tau,
            omega_zeta,
            delta_zeta,
        })
    }

    /// Stationary variance `K(0) = G/2τ` of each component.
    pub fn stationary_variance(&self) -> f64 {
        self.g / (2.0 * self.tau)
    }

    pub fn kernel(&self, dt: f64) -> f64 {
        self.stationary_variance() * (-dt.abs() / self.tau).exp()
    }

    /// Default integration step: `min(τ/50, 0.01/max(|δ_ζ|, 1))`.
    pub fn default_dt(&self) -> f64 {
        (self.tau / 50.0).min(0.01 / self.delta_zeta.abs().max(1.0))
    }
}

/// Amplitude `G = 2τΛ²(n + ½)`, which makes the short-time law
/// `σ(t) ≈ (G/2τ) t²` coincide with `Λ² t² (n + ½)`.
pub fn matched_amplitude(lambda: f64, n: f64, tau: f64) -> f64 {
    2.0 * tau * lambda * lambda * (n + 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("time step must be > 0, got {dt}"));
        }
        Ok(Self { dt, n_steps })
    }

    /// Uniform grid on `[0, t]` whose step does not exceed `max_dt`.
    pub fn covering(t: f64, max_dt: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return domain(format!("final time must be >= 0, got {t}"));
        }
        if t == 0.0 {
            return Self::new(max_dt, 0);
        }
        // The relative slack keeps exact multiples of max_dt from rounding up.
        let n_steps = (t / max_dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(t / n_steps as f64, n_steps)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| i as f64 * self.dt).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrajectory {
    pub times: Vec<f64>,
    pub zx: Vec<f64>,
    pub zy: Vec<f64>,
}

/// One exact OU step for both components.
struct OuStepper {
    decay: f64,
    kick: f64,
    stationary_sd: f64,
}

impl OuStepper {
    fn new(p: &OuParams, dt: f64) -> Self {
        let decay = (-dt / p.tau).exp();
        let v = p.stationary_variance();
        Self {
            decay,
            kick: (v * -(-2.0 * dt / p.tau).exp_m1()).sqrt(),
            stationary_sd: v.sqrt(),
        }
    }

    fn initial(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        (self.stationary_sd * x, self.stationary_sd * y)
    }

    fn step(&self, rng: &mut ChaCha8Rng, z: (f64, f64)) -> (f64, f64) {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        (z.0 * self.decay + self.kick * x, z.1 * self.decay + self.kick * y)
    }
}

fn sample_with(params: &OuParams, grid: &TimeGrid, rng: &mut ChaCha8Rng) -> FieldTrajectory {
    let n = grid.n_steps + 1;
    let (mut zx, mut zy) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let st = OuStepper::new(params, grid.dt);
    let mut z = st.initial(rng);
    zx.push(z.0);
    zy.push(z.1);
    for _ in 0..grid.n_steps {
        z = st.step(rng, z);
        zx.push(z.0);
        zy.push(z.1);
    }
    FieldTrajectory {
        times: grid.times(),
        zx,
        zy,
    }
}

/// Stationary OU trajectory on `grid`, drawn from stream 0 of `seed`.
pub fn ou_sample(params: &OuParams, grid: &TimeGrid, seed: u64) -> FieldTrajectory {
    sample_with(params, grid, &mut substream(seed, 0))
}

/// `α = −i ∫ ζ(s) e^{−iδ s} ds` by the trapezoidal rule on the trajectory grid.
pub fn displacement_integral(traj: &FieldTrajectory, delta: f64) -> Complex64 {
    let f = |i: usize| Complex64::new(traj.zx[i], traj.zy[i]) * Complex64::from_polar(1.0, -delta * traj.times[i]);
    let n = traj.times.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let dt = traj.times[1] - traj.times[0];
    let mut acc = 0.5 * (f(0) + f(n - 1));
    for i in 1..n - 1 {
        acc += f(i);
    }
    -Complex64::i() * acc * dt
}

/// Closed form of `σ(t)`:
/// `(G/τ) Re[t/z − (1 − e^{−zt})/z²]`, `z = 1/τ − iδ_ζ`.
pub fn sigma_analytic(params: &OuParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("time must be >= 0, got {t}"));
    }
    let z = Complex64::new(1.0 / params.tau, -params.delta_zeta);
    let zt = z * t;
    let inner = if zt.norm() < 1e-3 {
        // t²(1/2 − zt/6 + (zt)²/24 − (zt)³/120 + (zt)⁴/720)
        let poly = 0.5 - zt / 6.0 + zt * zt / 24.0 - zt * zt * zt / 120.0 + zt * zt * zt * zt / 720.0;
        poly * t * t
    } else {
        t / z - (1.0 - (-zt).exp()) / (z * z)
    };
    Ok(params.g / params.tau * inner.re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    DoubleExponential,
    ClenshawCurtis,
}

/// `σ(t)` by numerical quadrature of the equivalent single integral
/// `2 ∫₀ᵗ (t − u) cos(δ_ζ u) K(u) du`.
pub fn sigma_quadrature(params: &OuParams, t: f64, rule: QuadratureRule, abs_tol: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("time must be >= 0, got {t}"));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let f = |u: f64| 2.0 * (t - u) * (params.delta_zeta * u).cos() * params.kernel(u);
    let out = match rule {
        QuadratureRule::DoubleExponential => quadrature::double_exponential::integrate(f, 0.0, t, abs_tol),
        QuadratureRule::ClenshawCurtis => quadrature::clenshaw_curtis::integrate(f, 0.0, t, abs_tol),
    };
    Ok(out.integral)
}

/// Gaussian-noise channel reproducing the ensemble average, `σ² = 2σ(t)`.
pub fn equivalent_channel(params: &OuParams, t: f64) -> Result<GnChannel> {
    GnChannel::new(2.0 * sigma_analytic(params, t)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StocEstimate {
    /// Ensemble-averaged state in the frame rotating at `ν`.
    pub state: GaussianState,
    /// Statistics of `(Re α, Im α)` over trajectories.
    pub alpha: BivariateStats,
    pub grid: TimeGrid,
}

impl StocEstimate {
    /// Largest deviation of the sampled displacement moments from a zero-mean,
    /// isotropic law with per-quadrature variance `var`, in standard errors.
    pub fn z_score_against(&self, var: f64) -> f64 {
        self.alpha.max_z_score([0.0, 0.0], [var, 0.0, var])
    }
}

/// Monte-Carlo ensemble average of the driven evolution with the default step.
pub fn evolve_stoc_mc(
    rho_a: &GaussianState,
    params: &OuParams,
    nu: f64,
    t: f64,
    n_traj: usize,
    seed: u64,
) -> Result<StocEstimate> {
    evolve_stoc_mc_with_dt(rho_a, params, nu, t, n_traj, seed, params.default_dt())
}

/// As [`evolve_stoc_mc`] with an explicit upper bound on the time step.
/// Trajectory `i` uses stream `i` of `seed`.
pub fn evolve_stoc_mc_with_dt(
    rho_a: &GaussianState,
    params: &OuParams,
    nu: f64,
    t: f64,
    n_traj: usize,
    seed: u64,
    max_dt: f64,
) -> Result<StocEstimate> {
    if n_traj == 0 {
        return domain("n_traj must be >= 1");
    }
    if !nu.is_finite() {
        return domain("system frequency must be finite");
    }
    let grid = TimeGrid::covering(t, max_dt)?;
    let delta = params.delta_zeta;
    let chunks = n_traj.div_ceil(CHUNK);
    let parts: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(n_traj);
            (lo..hi)
                .map(|i| {
                    let traj = sample_with(params, &grid, &mut substream(seed, i as u64));
                    let a = displacement_integral(&traj, delta);
                    (a.re, a.im)
                })
                .collect()
        })
        .collect();
    let samples: Vec<(f64, f64)> = parts.into_iter().flatten().collect();
    let alpha = BivariateStats::from_samples(&samples);
    let mut cov = rho_a.cov;
    cov[(0, 0)] += alpha.cov[0];
    cov[(0, 1)] += alpha.cov[1];
    cov[(1, 0)] += alpha.cov[1];
    cov[(1, 1)] += alpha.cov[2];
    let mean = rho_a.mean + Complex64::new(alpha.mean[0], alpha.mean[1]);
    Ok(StocEstimate {
        state: GaussianState::from_parts_unchecked(mean, symmetrize(cov)),
        alpha,
        grid,
    })
}
