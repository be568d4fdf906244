//! Magnetic environment: N spins in a field `f`, coupled to the mode through
//! `g_i`. Replacing the collective `S^z` by its thermal value linearises the
//! spin algebra, leaving the bosonic two-mode problem with `ω → f`,
//! `Λ → Λ^S = g√(2m)` and occupation `n^S = S(1 − m)`, where `S = N/2`,
//! `x = S|f|/T` and `m = B_S(x)`.

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::gaussian::{OccupationSource, ThermalOccupation};
use crate::two_mode::TwoModeParams;

const SMALL_X: f64 = 1e-4;

fn check_spin(s: f64) -> Result<()> {
    let two_s = 2.0 * s;
    if !(two_s >= 1.0 && two_s.is_finite() && two_s.fract() == 0.0) {
        return domain(format!("spin must be a positive half-integer, got {s}"));
    }
    Ok(())
}

/// Brillouin function
/// `B_S(x) = a coth(a x) − b coth(b x)`, `a = (2S+1)/2S`, `b = 1/2S`.
pub fn brillouin(s: f64, x: f64) -> Result<f64> {
    check_spin(s)?;
    if !(x >= 0.0) {
        return domain(format!("Brillouin argument must be >= 0, got {x}"));
    }
    let a = (2.0 * s + 1.0) / (2.0 * s);
    let b = 1.0 / (2.0 * s);
    if x < SMALL_X {
        let a4_b4 = a.powi(4) - b.powi(4);
        return Ok((s + 1.0) / (3.0 * s) * x - a4_b4 * x.powi(3) / 45.0);
    }
    // a coth(ax) − b coth(bx) = a L(ax) − b L(bx): the 1/x poles cancel exactly.
    Ok(a * langevin(a * x) - b * langevin(b * x))
}

/// Langevin function `L(x) = coth x − 1/x`, the `S → ∞` limit of `B_S`.
pub fn langevin(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        return x * (1.0 / 3.0 - x2 * (1.0 / 45.0 - x2 * (2.0 / 945.0 - x2 / 4725.0)));
    }
    1.0 / x.tanh() - 1.0 / x
}

/// Leading large-`x` behaviour `B_S(x) ≈ 1 − e^{−x/S}/S`. For `S = 1` this
/// is `1 − e^{−x}`.
pub fn brillouin_low_temperature(s: f64, x: f64) -> f64 {
    1.0 - (-x / s).exp() / s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinEnvSpec {
    pub n_spins: usize,
    /// Level splitting `f > 0`.
    pub f: f64,
    pub couplings: Vec<Complex64>,
    /// Temperature `T ≥ 0`.
    pub temperature: f64,
}

impl SpinEnvSpec {
    pub fn new(f: f64, couplings: Vec<Complex64>, temperature: f64) -> Result<Self> {
        if couplings.is_empty() {
            return domain("at least one spin is required");
        }
        if !(f > 0.0 && f.is_finite()) {
            return domain(format!("level splitting must be > 0, got {f}"));
        }
        if !(temperature >= 0.0) || temperature.is_nan() {
            return domain(format!("temperature must be >= 0, got {temperature}"));
        }
        if couplings.iter().any(|g| !(g.re.is_finite() && g.im.is_finite())) {
            return domain("couplings must be finite");
        }
        Ok(Self {
            n_spins: couplings.len(),
            f,
            couplings,
            temperature,
        })
    }

    /// `N` spins with equal couplings `g/√N`, so that the aggregate is `g`.
    pub fn uniform(n_spins: usize, f: f64, g: f64, temperature: f64) -> Result<Self> {
        if n_spins == 0 {
            return domain("at least one spin is required");
        }
        if !(g >= 0.0) {
            return domain(format!("aggregate coupling must be >= 0, got {g}"));
        }
        let gi = Complex64::new(g / (n_spins as f64).sqrt(), 0.0);
        Self::new(f, vec![gi; n_spins], temperature)
    }

    /// `g = sqrt(Σ|g_i|²)`.
    pub fn aggregate_coupling(&self) -> f64 {
        self.couplings.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinThermal {
    /// `S = N/2`.
    pub s: f64,
    /// `x = S|f|/T` (infinite at `T = 0`).
    pub x: f64,
    /// Magnetisation per spin `m = B_S(x)`.
    pub m: f64,
    /// `n^S = S(1 − m)`.
    pub n_ts: f64,
    /// `Λ^S = g√(2m)`.
    pub lambda_s: f64,
}

pub fn spin_thermal(spec: &SpinEnvSpec) -> Result<SpinThermal> {
    let s = spec.n_spins as f64 / 2.0;
    let g = spec.aggregate_coupling();
    let (x, m) = if spec.temperature == 0.0 {
        (f64::INFINITY, 1.0)
    } else {
        let x = s * spec.f.abs() / spec.temperature;
        (x, brillouin(s, x)?)
    };
    Ok(SpinThermal {
        s,
        x,
        m,
        n_ts: s * (1.0 - m),
        lambda_s: g * (2.0 * m).sqrt(),
    })
}

/// Effective two-mode description of the spin environment for a mode of
/// frequency `nu`.
pub fn as_two_mode(spec: &SpinEnvSpec, nu: f64) -> Result<(TwoModeParams, ThermalOccupation)> {
    let th = spin_thermal(spec)?;
    let params = TwoModeParams::new(nu, spec.f, th.lambda_s)?;
    let occ = ThermalOccupation::new(th.n_ts, OccupationSource::SpinBrillouin)?;
    Ok((params, occ))
}
