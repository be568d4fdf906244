//! Reduced dynamics of mode `a` after tracing out a thermal collective mode.
//!
//! In the rotating frame `a(t) = μ a + π B`. For a factorised initial state
//! with a zero-mean thermal environment the output is Gaussian with
//!
//! ```text
//! ⟨a⟩  ← μ ⟨a⟩
//! Σ    ← M_μ Σ M_μᵀ + |π|² (n + ½)/2 · 1
//! ```
//!
//! where `M_μ` is multiplication by `μ` acting on `(q, p)`. The formula is the
//! same for both couplings because a thermal `b` and `b†` have identical
//! symmetrised quadrature noise; they differ only through `μ` and `π`.

use crate::gaussian::{complex_as_rotation, symmetrize, GaussianState, ThermalOccupation};
use crate::gn_channel::GnChannel;
use crate::two_mode::{coefficients, CoefficientSet, ModelKind, TwoModeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Exact,
    ShortTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedMapResult {
    pub state: GaussianState,
    /// `σ²(t)`, only for the short-time branch.
    pub sigma2: Option<f64>,
    pub branch: Branch,
}

/// Applies the map for precomputed coefficients.
pub fn apply_coefficients(rho_a: &GaussianState, env: &ThermalOccupation, c: &CoefficientSet) -> GaussianState {
    let m = complex_as_rotation(c.mu);
    let noise = c.pi.norm_sqr() * env.quadrature_variance();
    let mut cov = m * rho_a.cov * m.transpose();
    cov[(0, 0)] += noise;
    cov[(1, 1)] += noise;
    GaussianState::from_parts_unchecked(c.mu * rho_a.mean, symmetrize(cov))
}

pub fn evolve_exact(
    rho_a: &GaussianState,
    env: &ThermalOccupation,
    params: &TwoModeParams,
    kind: ModelKind,
    t: f64,
) -> GaussianState {
    apply_coefficients(rho_a, env, &coefficients(params, kind, t))
}

/// `σ²(t) = Λ² t² (n + ½)`.
pub fn short_time_sigma2(lambda: f64, env: &ThermalOccupation, t: f64) -> f64 {
    lambda * lambda * t * t * (env.n + 0.5)
}

/// Leading-order map: a Gaussian-noise channel of variance `σ²(t)`,
/// independent of the coupling type and of the detuning.
pub fn evolve_short_time(
    rho_a: &GaussianState,
    env: &ThermalOccupation,
    params: &TwoModeParams,
    _kind: ModelKind,
    t: f64,
) -> ReducedMapResult {
    let sigma2 = short_time_sigma2(params.lambda, env, t);
    let channel = GnChannel::new(sigma2).expect("σ² is a square times a non-negative factor");
    ReducedMapResult {
        state: channel.apply(rho_a),
        sigma2: Some(sigma2),
        branch: Branch::ShortTime,
    }
}

pub fn evolve(
    rho_a: &GaussianState,
    env: &ThermalOccupation,
    params: &TwoModeParams,
    kind: ModelKind,
    t: f64,
    branch: Branch,
) -> ReducedMapResult {
    match branch {
        Branch::Exact => ReducedMapResult {
            state: evolve_exact(rho_a, env, params, kind, t),
            sigma2: None,
            branch,
        },
        Branch::ShortTime => evolve_short_time(rho_a, env, params, kind, t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::loglog_slope;
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn env(n: f64) -> ThermalOccupation {
        ThermalOccupation::bosonic(n).unwrap()
    }

    fn params(nu: f64, omega: f64, lambda: f64) -> TwoModeParams {
        TwoModeParams::new(nu, omega, lambda).unwrap()
    }

    /// Independent route: Heisenberg-picture ladder moments
    /// `⟨a†a⟩ → |μ|²⟨a†a⟩ + |π|²⟨B†B⟩`, `⟨a²⟩ → μ²⟨a²⟩`.
    fn ladder_route(rho: &GaussianState, n: f64, c: &CoefficientSet) -> GaussianState {
        let bb = match c.kind {
            ModelKind::Exchange => n,
            ModelKind::Hopping => n + 1.0,
        };
        let number = c.mu.norm_sqr() * rho.number() + c.pi.norm_sqr() * bb;
        GaussianState::from_ladder_moments(c.mu * rho.mean, number, c.mu * c.mu * rho.a_squared())
    }

    #[test]
    fn identity_at_zero_time() {
        let rho = GaussianState::squeezed_thermal(0.3, 0.4, 0.2, Complex64::new(0.5, -0.1)).unwrap();
        for kind in ModelKind::ALL {
            let out = evolve_exact(&rho, &env(2.0), &params(1.0, 2.0, 0.7), kind, 0.0);
            assert!(out.moment_distance(&rho) < 1e-15);
            let st = evolve_short_time(&rho, &env(2.0), &params(1.0, 2.0, 0.7), kind, 0.0);
            assert_eq!(st.state, rho);
            assert_eq!(st.sigma2, Some(0.0));
        }
    }

    #[test]
    fn full_swap_delivers_environment_state() {
        let pr = params(1.0, 1.0, 0.5);
        let t = std::f64::consts::PI; // Λt = π/2
        let out = evolve_exact(&GaussianState::vacuum(), &env(0.0), &pr, ModelKind::Exchange, t);
        assert!(out.moment_distance(&GaussianState::vacuum()) < 1e-15);

        let rho = GaussianState::squeezed_thermal(0.1, 0.8, 1.0, Complex64::new(1.0, 2.0)).unwrap();
        let out = evolve_exact(&rho, &env(1.7), &pr, ModelKind::Exchange, t);
        assert!(out.moment_distance(&GaussianState::thermal(1.7)) < 1e-14);
    }

    #[test]
    fn vacuum_noise_equals_pi_squared() {
        let pr = params(2.0, 1.0, 0.3);
        let c = coefficients(&pr, ModelKind::Exchange, 1.3);
        let out = apply_coefficients(&GaussianState::vacuum(), &env(0.8), &c);
        let expected = c.mu.norm_sqr() * 0.25 + c.pi.norm_sqr() * 1.3 / 2.0;
        assert_relative_eq!(out.cov[(0, 0)], expected, epsilon = 1e-15);
        assert_relative_eq!(out.cov[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn short_time_example() {
        let r = evolve_short_time(&GaussianState::vacuum(), &env(0.0), &params(1.0, 1.0, 1.0), ModelKind::Exchange, 0.1);
        assert_relative_eq!(r.sigma2.unwrap(), 0.005, epsilon = 1e-17);
        assert_relative_eq!(r.state.cov[(0, 0)], 0.2525, epsilon = 1e-15);
        assert_relative_eq!(r.state.cov[(1, 1)], 0.2525, epsilon = 1e-15);
    }

    #[test]
    fn short_time_is_gn_channel_for_both_kinds() {
        let rho = GaussianState::squeezed_thermal(0.5, 0.3, 0.7, Complex64::new(0.2, 0.9)).unwrap();
        let (pr, e, t) = (params(2.0, 1.0, 0.3), env(5.0), 0.04);
        let ex = evolve_short_time(&rho, &e, &pr, ModelKind::Exchange, t);
        let ho = evolve_short_time(&rho, &e, &pr, ModelKind::Hopping, t);
        assert_eq!(ex.state, ho.state);
        let gn = GnChannel::new(ex.sigma2.unwrap()).unwrap().apply(&rho);
        assert_eq!(ex.state, gn);
    }

    #[test]
    fn short_time_error_scales_quadratically() {
        let pr = params(2.0, 1.0, 0.3);
        let ts: Vec<f64> = (0..9).map(|i| 1e-3 * 10f64.powf(i as f64 / 4.0)).collect();
        for n in [0.0, 0.5, 5.0, 50.0] {
            for kind in ModelKind::ALL {
                let rho = GaussianState::thermal(0.7);
                let errs: Vec<f64> = ts
                    .iter()
                    .map(|&t| {
                        let a = evolve_exact(&rho, &env(n), &pr, kind, t);
                        let b = evolve_short_time(&rho, &env(n), &pr, kind, t).state;
                        a.moment_distance(&b)
                    })
                    .collect();
                let slope = loglog_slope(&ts, &errs).slope;
                assert!((slope - 2.0).abs() < 0.1, "n={n} {kind:?} slope={slope}");
            }
        }
    }

    #[test]
    fn squeezed_input_rotates_with_mu() {
        // A squeezed input keeps its ellipse shape, rotated by arg μ and scaled by |μ|.
        let pr = params(2.0, 0.5, 0.2);
        let c = coefficients(&pr, ModelKind::Exchange, 2.0);
        let rho = GaussianState::squeezed_thermal(0.0, 1.0, 0.0, Complex64::new(0.0, 0.0)).unwrap();
        let out = apply_coefficients(&rho, &env(0.0), &c);
        let direct = ladder_route(&rho, 0.0, &c);
        assert!(out.moment_distance(&direct) < 1e-14);
        let noiseless = {
            let m = complex_as_rotation(c.mu);
            m * rho.cov * m.transpose()
        };
        let angle = c.mu.arg();
        let (s, co) = angle.sin_cos();
        let r = Matrix2::new(co, -s, s, co);
        let expected = r * rho.cov * r.transpose() * c.mu.norm_sqr();
        assert!((noiseless - expected).abs().max() < 1e-14);
    }

    fn arb_state() -> impl Strategy<Value = GaussianState> {
        (0.0..3.0f64, 0.0..1.2f64, 0.0..6.3f64, -2.0..2.0f64, -2.0..2.0f64)
            .prop_map(|(n, r, th, x, y)| GaussianState::squeezed_thermal(n, r, th, Complex64::new(x, y)).unwrap())
    }

    proptest! {
        #[test]
        fn agrees_with_ladder_route(
            rho in arb_state(),
            n in 0.0..10.0f64,
            nu in 0.1..5.0f64, om in 0.1..5.0f64, la in 0.0..3.0f64,
            t in -5.0..5.0f64, ex in any::<bool>(),
        ) {
            let kind = if ex { ModelKind::Exchange } else { ModelKind::Hopping };
            let c = coefficients(&params(nu, om, la), kind, t);
            let a = apply_coefficients(&rho, &env(n), &c);
            let b = ladder_route(&rho, n, &c);
            let scale = 1.0 + c.mu.norm_sqr() * (1.0 + rho.number()) + c.pi.norm_sqr() * (n + 1.0);
            prop_assert!(a.moment_distance(&b) <= 1e-12 * scale);
        }

        #[test]
        fn exchange_output_is_physical(
            rho in arb_state(),
            n in 0.0..10.0f64,
            nu in 0.1..5.0f64, om in 0.1..5.0f64, la in 0.0..3.0f64, t in 0.0..20.0f64,
        ) {
            let out = evolve_exact(&rho, &env(n), &params(nu, om, la), ModelKind::Exchange, t);
            prop_assert!(out.validate().is_ok());
            let det_floor = 1.0 / 16.0 - crate::gaussian::UNCERTAINTY_TOL;
            prop_assert!(out.cov.determinant() >= det_floor);
        }
    }
}
