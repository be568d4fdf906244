//! Exact propagator of the collective two-mode models.
//!
//! With `b = Λ⁻¹ Σ λ_k b_k` the narrow-spectrum models reduce to
//!
//! ```text
//! exchange:  ν a†a + ω b†b + Λ (a b† + a† b)
//! hopping:   ν a†a + ω b†b + Λ (a† b† + a b)
//! ```
//!
//! whose Heisenberg solutions in the frame rotating at `ω_j` are
//! `a(t) = μ(t) a + π(t) B`, with `B = b` (exchange) or `B = b†` (hopping).
//! The rotating-frame generator `M` satisfies `M² = κ·1` with
//! `κ = s Λ² − δ²`, `s = (−1)^j`, so `exp(Mt) = C(t) + M S(t)`:
//! trigonometric for `κ < 0`, hyperbolic for `κ > 0` and polynomial at `κ = 0`.

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Below this value of `Δ·|t|` the propagator is evaluated from its series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// j = 1, coupling `a†b + a b†`.
    Exchange,
    /// j = 2, coupling `a†b† + a b`.
    Hopping,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::Exchange, ModelKind::Hopping];

    /// `(−1)^j`.
    pub fn sign(self) -> f64 {
        match self {
            ModelKind::Exchange => -1.0,
            ModelKind::Hopping => 1.0,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            ModelKind::Exchange => 1,
            ModelKind::Hopping => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Exchange => "exchange",
            ModelKind::Hopping => "hopping",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeParams {
    pub nu: f64,
    pub omega: f64,
    pub lambda: f64,
}

impl TwoModeParams {
    pub fn new(nu: f64, omega: f64, lambda: f64) -> Result<Self> {
        if !(nu.is_finite() && omega.is_finite() && lambda.is_finite()) {
            return domain("two-mode parameters must be finite");
        }
        if lambda < 0.0 {
            return domain(format!("effective coupling must be >= 0, got {lambda}"));
        }
        Ok(Self { nu, omega, lambda })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Oscillatory,
    Hyperbolic,
    /// `Δ = 0` exactly; the propagator is linear in t.
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// `δ_j = (ν + (−)^j ω)/2`.
    pub delta: f64,
    /// `Δ_j = sqrt|δ_j² − (−)^j Λ²|`.
    pub gap: f64,
    /// `ω_j = (ν − (−)^j ω)/2`, the rotating-frame frequency.
    pub omega_rot: f64,
    /// `κ = (−)^j Λ² − δ_j²`.
    pub kappa: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub mu: Complex64,
    pub pi: Complex64,
    /// `|μ|²`; the short-time expansion reports exactly 1.
    pub mu_abs2: f64,
    pub constants: DerivedConstants,
    pub kind: ModelKind,
    pub t: f64,
}

impl CoefficientSet {
    /// `|μ|² − (−)^j |π|² − 1`, zero for the exact propagator.
    pub fn unitarity_residual(&self) -> f64 {
        self.mu.norm_sqr() - self.kind.sign() * self.pi.norm_sqr() - 1.0
    }

    /// Rotating-frame propagator acting on `(a, B)`, with rows
    /// `a(t) = μ a + π B` and `B(t) = (−)^j π* a + μ* B`.
    pub fn propagator(&self) -> [[Complex64; 2]; 2] {
        let s = self.kind.sign();
        [[self.mu, self.pi], [self.pi.conj() * s, self.mu.conj()]]
    }
}

pub fn derived_constants(params: &TwoModeParams, kind: ModelKind) -> DerivedConstants {
    let s = kind.sign();
    let delta = 0.5 * (params.nu + s * params.omega);
    let omega_rot = 0.5 * (params.nu - s * params.omega);
    let kappa = s * params.lambda * params.lambda - delta * delta;
    let gap = kappa.abs().sqrt();
    let regime = if kappa < 0.0 {
        Regime::Oscillatory
    } else if kappa > 0.0 {
        Regime::Hyperbolic
    } else {
        Regime::Degenerate
    };
    DerivedConstants {
        delta,
        gap,
        omega_rot,
        kappa,
        regime,
    }
}

/// `C(t)` and `S(t)` with `exp(Mt) = C + M S`.
fn even_odd_parts(k: &DerivedConstants, t: f64) -> (f64, f64) {
    let x = k.gap * t.abs();
    if x < SERIES_THRESHOLD {
        let kt2 = k.kappa * t * t;
        let c = 1.0 + kt2 / 2.0 + kt2 * kt2 / 24.0;
        let s = t * (1.0 + kt2 / 6.0 + kt2 * kt2 / 120.0);
        return (c, s);
    }
    match k.regime {
        Regime::Oscillatory => {
            let (sn, cs) = (k.gap * t).sin_cos();
            (cs, sn / k.gap)
        }
        Regime::Hyperbolic => ((k.gap * t).cosh(), (k.gap * t).sinh() / k.gap),
        Regime::Degenerate => (1.0, t),
    }
}

/// Exact `μ_j(t)`, `π_j(t)` in the rotating frame.
pub fn coefficients(params: &TwoModeParams, kind: ModelKind, t: f64) -> CoefficientSet {
    let constants = derived_constants(params, kind);
    let (c, s) = even_odd_parts(&constants, t);
    let mu = Complex64::new(c, -constants.delta * s);
    let pi = Complex64::new(0.0, -params.lambda * s);
    CoefficientSet {
        mu,
        pi,
        mu_abs2: mu.norm_sqr(),
        constants,
        kind,
        t,
    }
}

/// First-order expansion `μ ≈ 1 − iδt`, `π ≈ −iΛt`, `|μ|² ≈ 1`.
pub fn short_time_coefficients(params: &TwoModeParams, kind: ModelKind, t: f64) -> CoefficientSet {
    let constants = derived_constants(params, kind);
    CoefficientSet {
        mu: Complex64::new(1.0, -constants.delta * t),
        pi: Complex64::new(0.0, -params.lambda * t),
        mu_abs2: 1.0,
        constants,
        kind,
        t,
    }
}

/// Time scale `1/Δ_j` below which the short-time expansion holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horizon {
    /// `1/Δ_j`, or `+∞` when `Δ_j = 0`.
    pub time: f64,
    /// Set when `Δ_j = 0` and the horizon is unbounded.
    pub unbounded: bool,
}

pub fn short_time_horizon(params: &TwoModeParams, kind: ModelKind) -> Horizon {
    let gap = derived_constants(params, kind).gap;
    if gap == 0.0 {
        Horizon {
            time: f64::INFINITY,
            unbounded: true,
        }
    } else {
        Horizon {
            time: 1.0 / gap,
            unbounded: false,
        }
    }
}
