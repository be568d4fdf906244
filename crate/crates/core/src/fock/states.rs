//! Single-mode states and observables in a truncated Fock basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::gaussian::GaussianState;

pub fn annihilation(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Working truncation for building operators that are cropped to `d`.
fn padded(d: usize) -> usize {
    (2 * d).max(d + 40)
}

/// `exp(−iK)` for Hermitian `K`.
fn unitary_from_hermitian(k: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = k.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e)));
    v * phases * v.adjoint()
}

/// `D(γ) = exp(γa† − γ*a)` on `d` levels.
pub fn displacement(gamma: Complex64, d: usize) -> DMatrix<Complex64> {
    let big = padded(d);
    let a = annihilation(big);
    // γa† − γ*a = −iK with K = i(γa† − γ*a).
    let k = (a.adjoint() * gamma - &a * gamma.conj()) * Complex64::i();
    unitary_from_hermitian(k).view((0, 0), (d, d)).into_owned()
}

/// Density matrix of a Gaussian state on `d` levels.
///
/// The state is written as `D(α) R(θ) S(r) ρ_th(n) S(r)† R(θ)† D(α)†` with
/// `S(r) = exp[r(a² − a†²)/2]` squeezing `q`, `R(θ) = exp(iθ a†a)` and
/// `(n, r, θ)` read off the covariance. The construction runs on a padded
/// basis and is cropped, so the result has trace `1 −` (population above `d`).
pub fn gaussian_density_matrix(state: &GaussianState, d: usize) -> Result<DMatrix<Complex64>> {
    state.validate()?;
    if d < 2 {
        return domain("truncation must be >= 2");
    }
    let big = padded(d);
    let nu_s = state.cov.determinant().sqrt();
    let n = (2.0 * nu_s - 0.5).max(0.0);
    let [lo, hi] = state.cov_eigenvalues();
    let r = 0.25 * (hi / lo).ln();
    let (a_, b_, d_) = (state.cov[(0, 0)], state.cov[(0, 1)], state.cov[(1, 1)]);
    // Direction of the small eigenvalue.
    let theta = if b_ == 0.0 && a_ <= d_ { 0.0 } else { (lo - a_).atan2(b_) };
    let theta = if b_ == 0.0 && a_ > d_ { std::f64::consts::FRAC_PI_2 } else { theta };

    let q = n / (n + 1.0);
    let mut rho = DMatrix::<Complex64>::zeros(big, big);
    let mut p = 1.0 / (n + 1.0);
    for k in 0..big {
        rho[(k, k)] = Complex64::new(p, 0.0);
        p *= q;
    }
    let a = annihilation(big);
    let ad = a.adjoint();
    let i = Complex64::i();
    let sq = unitary_from_hermitian((&a * &a - &ad * &ad) * (i * 0.5 * r));
    let rot = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(big, |k, _| Complex64::from_polar(1.0, theta * k as f64)));
    let alpha = state.mean;
    let disp = unitary_from_hermitian((&ad * alpha - &a * alpha.conj()) * i);
    let u = disp * rot * sq;
    let full = &u * rho * u.adjoint();
    Ok(full.view((0, 0), (d, d)).into_owned())
}

/// `Tr[ρ D(γ)]`.
pub fn char_fn_oracle(rho: &DMatrix<Complex64>, gamma: Complex64) -> Result<Complex64> {
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
        return domain(format!("density matrix trace {tr} differs from 1"));
    }
    let d = rho.nrows();
    Ok((rho * displacement(gamma, d)).trace())
}

/// `⟨a⟩`, `⟨a†a⟩`, `⟨a²⟩` of a truncated density matrix, as a Gaussian moment set.
pub fn moments_from_density(rho: &DMatrix<Complex64>) -> GaussianState {
    let d = rho.nrows();
    let mut mean = Complex64::new(0.0, 0.0);
    let mut a2 = Complex64::new(0.0, 0.0);
    let mut number = 0.0;
    for n in 0..d {
        number += n as f64 * rho[(n, n)].re;
        if n + 1 < d {
            mean += rho[(n + 1, n)] * ((n + 1) as f64).sqrt();
        }
        if n + 2 < d {
            a2 += rho[(n + 2, n)] * (((n + 1) * (n + 2)) as f64).sqrt();
        }
    }
    GaussianState::from_ladder_moments(mean, number, a2)
}

/// Population of the two highest levels.
pub fn top_population(rho: &DMatrix<Complex64>) -> f64 {
    let d = rho.nrows();
    (d.saturating_sub(2)..d).map(|k| rho[(k, k)].re).sum()
}
