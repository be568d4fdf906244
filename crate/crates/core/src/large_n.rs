//! Global environment operators, their 1/N Heisenberg algebra and the
//! coherent-state construction that turns the environment into a classical
//! drive.
//!
//! Everything is checked on two tiers: exact coefficient arithmetic (any `N`)
//! and sparse matrix realisations on a truncated multimode Fock space
//! (small `N`).

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fock::FockOperator;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Below this `|ε|` the group element uses the series for `ζ`.
pub const EPS_SERIES: f64 = 1e-6;

/// Above this population in the two highest levels of any mode a matrix
/// realisation is reported as contaminated by the truncation edge.
pub const EDGE_TOL: f64 = 1e-6;

/// `L = iN(εE + β*B + βB†) + c·1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraElement {
    pub eps: f64,
    pub beta: Complex64,
    pub central: Complex64,
    pub n: usize,
}

impl AlgebraElement {
    pub fn new(eps: f64, beta: Complex64, n: usize) -> Self {
        Self { eps, beta, central: C0, n }
    }

    /// Size of the non-central part, `N·√(ε² + N|β|²)`.
    ///
    /// `β` is weighted by `√N` so that couplings at their natural scale
    /// `|β| ~ 1/√N` count as order one.
    pub fn leading_norm(&self) -> f64 {
        let n = self.n as f64;
        n * (self.eps * self.eps + n * self.beta.norm_sqr()).sqrt()
    }

    /// The same element with the central term dropped.
    pub fn without_central(&self) -> Self {
        Self { central: C0, ..*self }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.n == other.n
            && (self.eps - other.eps).abs() <= tol
            && (self.beta - other.beta).norm() <= tol
            && (self.central - other.central).norm() <= tol
    }
}

/// Exact commutator `[a, b]` in coefficient form, including the central term
/// that vanishes only as `N → ∞`.
pub fn bracket(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    if a.n != b.n {
        return Err(Error::ModeCountMismatch { left: a.n, right: b.n });
    }
    let n = a.n as f64;
    Ok(AlgebraElement {
        eps: 0.0,
        beta: I * (b.beta * a.eps - a.beta * b.eps),
        central: -(a.beta.conj() * b.beta - a.beta * b.beta.conj()) * n,
        n: a.n,
    })
}

/// `|central| / leading_norm` of `[a, b]`.
pub fn relative_central(a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
    let c = bracket(a, b)?;
    let lead = c.leading_norm();
    if lead == 0.0 {
        return domain("bracket has no leading part");
    }
    Ok(c.central.norm() / lead)
}

/// Relative central size of `[L(ε₁, β̃₁/√N), L(ε₂, β̃₂/√N)]` for each `N`.
pub fn central_scaling(eps: [f64; 2], beta_scaled: [Complex64; 2], ns: &[usize]) -> Result<Vec<f64>> {
    ns.iter()
        .map(|&n| {
            let s = (n as f64).sqrt();
            let a = AlgebraElement::new(eps[0], beta_scaled[0] / s, n);
            let b = AlgebraElement::new(eps[1], beta_scaled[1] / s, n);
            relative_central(&a, &b)
        })
        .collect()
}

/// The 2×2 representation `ℓ(ε, β) = i[[0, β*], [0, ε]]`. It reproduces the
/// bracket with the central term dropped.
pub fn ell_matrix(eps: f64, beta: Complex64) -> Matrix2<Complex64> {
    Matrix2::new(C0, beta.conj(), C0, Complex64::new(eps, 0.0)) * I
}

/// `u(φ, ζ) = [[1, 0], [ζ, φ]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement2x2 {
    pub phi: Complex64,
    pub zeta: Complex64,
}

impl GroupElement2x2 {
    pub fn matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(Complex64::new(1.0, 0.0), C0, self.zeta, self.phi)
    }
}

/// `φ = e^{iε}`, `ζ = (β/ε)(e^{iε} − 1)`.
pub fn group_element(eps: f64, beta: Complex64) -> GroupElement2x2 {
    let phi = Complex64::from_polar(1.0, eps);
    let zeta = if eps.abs() < EPS_SERIES {
        // (e^{iε} − 1)/ε = i(1 + iε/2 − ε²/6 + …)
        beta * I * Complex64::new(1.0 - eps * eps / 6.0, eps / 2.0)
    } else {
        // e^{iε} − 1 = 2i sin(ε/2) e^{iε/2}, free of cancellation
        beta * I * Complex64::from_polar(2.0 * (eps / 2.0).sin() / eps, eps / 2.0)
    };
    GroupElement2x2 { phi, zeta }
}

/// `E = (1/N)Σ b_k†b_k` and `B = Σ λ_k b_k / (√N ‖λ‖)` on `N` modes with `d`
/// levels each.
#[derive(Debug, Clone)]
pub struct GlobalOps {
    n: usize,
    d: usize,
    e: FockOperator,
    b: FockOperator,
    b_dag: FockOperator,
    occupations: Vec<usize>,
    edge: Vec<bool>,
}

impl GlobalOps {
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        Self::new(&vec![Complex64::new(1.0 / (n.max(1) as f64).sqrt(), 0.0); n], d)
    }

    pub fn new(couplings: &[Complex64], d: usize) -> Result<Self> {
        let n = couplings.len();
        if n == 0 {
            return domain("need at least one mode");
        }
        if d < 2 {
            return domain("truncation must be >= 2");
        }
        let norm2: f64 = couplings.iter().map(|c| c.norm_sqr()).sum();
        if !(norm2 > 0.0) {
            return domain("couplings must not all vanish");
        }
        let dim = d.checked_pow(n as u32).ok_or(Error::DimensionCap { dim: usize::MAX, cap: crate::fock::configured_dim_cap() })?;
        let cap = crate::fock::configured_dim_cap();
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        let scale = 1.0 / ((n as f64) * norm2).sqrt();
        let mut e = Vec::with_capacity(dim);
        let mut b = Vec::with_capacity(dim * n);
        let mut occupations = Vec::with_capacity(dim);
        let mut edge = Vec::with_capacity(dim);
        let stride: Vec<usize> = (0..n).map(|k| d.pow((n - 1 - k) as u32)).collect();
        for idx in 0..dim {
            let digits: Vec<usize> = (0..n).map(|k| (idx / stride[k]) % d).collect();
            let total: usize = digits.iter().sum();
            occupations.push(total);
            edge.push(digits.iter().any(|&m| m + 2 >= d));
            e.push((idx, idx, Complex64::new(total as f64 / n as f64, 0.0)));
            for k in 0..n {
                if digits[k] > 0 {
                    let amp = couplings[k] * ((digits[k] as f64).sqrt() * scale);
                    b.push((idx - stride[k], idx, amp));
                }
            }
        }
        let b_dag = b.iter().map(|&(r, c, v)| (c, r, v.conj())).collect();
        Ok(Self {
            n,
            d,
            e: FockOperator::from_triplets(dim, e),
            b: FockOperator::from_triplets(dim, b),
            b_dag: FockOperator::from_triplets(dim, b_dag),
            occupations,
            edge,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn truncation(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    pub fn e(&self) -> &FockOperator {
        &self.e
    }

    pub fn b(&self) -> &FockOperator {
        &self.b
    }

    pub fn b_dag(&self) -> &FockOperator {
        &self.b_dag
    }

    /// Default low-lying cutoff: total occupation at most half the
    /// per-mode truncation.
    pub fn default_cutoff(&self) -> usize {
        self.d / 2
    }

    /// Basis indices with total occupation `<= cutoff`.
    pub fn low_lying(&self, cutoff: usize) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.occupations[i] <= cutoff).collect()
    }

    /// Matrix of `L = iN(εE + β*B + βB†)` (central part omitted).
    pub fn generator(&self, eps: f64, beta: Complex64) -> FockOperator {
        let n = self.n as f64;
        let mut t = Vec::with_capacity(self.e.nnz() + 2 * self.b.nnz());
        for (op, coef) in [(&self.e, Complex64::new(eps, 0.0)), (&self.b, beta.conj()), (&self.b_dag, beta)] {
            let c = I * n * coef;
            for r in 0..op.dim() {
                for (col, v) in op.row(r) {
                    t.push((r, col, c * v));
                }
            }
        }
        FockOperator::from_triplets(self.dim(), t)
    }

    /// Population of `v` in basis states that have some mode in one of its
    /// two highest levels.
    pub fn edge_population(&self, v: &[Complex64]) -> f64 {
        v.iter().zip(&self.edge).filter(|(_, &e)| e).map(|(z, _)| z.norm_sqr()).sum()
    }

    fn unit(&self, i: usize) -> Vec<Complex64> {
        let mut v = vec![C0; self.dim()];
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    /// Largest deviation of `[B,B†] − 1/N`, `[B,E] − B/N` and `[B†,E] + B†/N`
    /// over low-lying columns.
    pub fn commutator_defect(&self, cutoff: usize) -> f64 {
        let n = self.n as f64;
        let mut worst = 0.0f64;
        for j in self.low_lying(cutoff) {
            let ej = self.unit(j);
            let bj = self.b.matvec(&ej);
            let bdj = self.b_dag.matvec(&ej);
            let c1 = sub(&self.b.matvec(&bdj), &self.b_dag.matvec(&bj));
            let c2 = sub(&self.b.matvec(&self.e.matvec(&ej)), &self.e.matvec(&bj));
            let c3 = sub(&self.b_dag.matvec(&self.e.matvec(&ej)), &self.e.matvec(&bdj));
            for i in 0..self.dim() {
                let one = if i == j { 1.0 / n } else { 0.0 };
                worst = worst
                    .max((c1[i] - one).norm())
                    .max((c2[i] - bj[i] / n).norm())
                    .max((c3[i] + bdj[i] / n).norm());
            }
        }
        worst
    }
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `exp(s·A) v` by scaled Taylor steps; `A` sparse.
pub fn expm_multiply(a: &FockOperator, s: f64, v: &[Complex64]) -> Vec<Complex64> {
    let inf_norm = (0..a.dim())
        .map(|r| a.row(r).map(|(_, z)| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = ((inf_norm * s.abs()).ceil() as usize).max(1);
    let h = s / steps as f64;
    let mut out = v.to_vec();
    for _ in 0..steps {
        let scale = vec_norm(&out).max(f64::MIN_POSITIVE);
        let mut term = out.clone();
        let mut acc = out.clone();
        for k in 1..=60 {
            term = a.matvec(&term);
            let f = h / k as f64;
            term.iter_mut().for_each(|z| *z *= f);
            axpy(&mut acc, Complex64::new(1.0, 0.0), &term);
            if vec_norm(&term) < 1e-17 * scale {
                break;
            }
        }
        out = acc;
    }
    out
}

/// Outcome of a matrix-tier check.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixCheck {
    /// Norm of the tested residual on the low-lying block.
    pub residual_norm: f64,
    /// For the bracket check, `‖P R P − c·1‖`; otherwise zero.
    pub central_defect: f64,
    /// Worst edge population encountered.
    pub edge_population: f64,
    pub edge_flag: bool,
    pub block_dim: usize,
}

/// Realises `[L_a, L_b] − L_{[a,b]}` (central omitted) as a matrix and
/// returns its spectral norm on the low-lying block. The algebra predicts
/// exactly `central·1` there.
pub fn matrix_check_bracket(a: &AlgebraElement, b: &AlgebraElement, ops: &GlobalOps, cutoff: usize) -> Result<MatrixCheck> {
    let c = bracket(a, b)?;
    if a.n != ops.n_modes() {
        return Err(Error::ModeCountMismatch { left: a.n, right: ops.n_modes() });
    }
    let la = ops.generator(a.eps, a.beta);
    let lb = ops.generator(b.eps, b.beta);
    let lc = ops.generator(c.eps, c.beta);
    let low = ops.low_lying(cutoff);
    let mut block = DMatrix::<Complex64>::zeros(low.len(), low.len());
    let mut edge = 0.0f64;
    for (jj, &j) in low.iter().enumerate() {
        let ej = ops.unit(j);
        let vb = lb.matvec(&ej);
        let va = la.matvec(&ej);
        edge = edge.max(ops.edge_population(&vb)).max(ops.edge_population(&va));
        let col = sub(&sub(&la.matvec(&vb), &lb.matvec(&va)), &lc.matvec(&ej));
        for (ii, &i) in low.iter().enumerate() {
            block[(ii, jj)] = col[i];
        }
    }
    let residual_norm = block.singular_values().max();
    let defect = (&block - DMatrix::identity(low.len(), low.len()) * c.central)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(MatrixCheck {
        residual_norm,
        central_defect: defect,
        edge_population: edge,
        edge_flag: edge > EDGE_TOL || defect > 1e-8,
        block_dim: low.len(),
    })
}

/// `‖P (U⁻¹BU − ζ − φB) P‖_F` with `U = exp(L(ε, β))`, on the low-lying block.
pub fn gcs_conjugation_check(eps: f64, beta: Complex64, ops: &GlobalOps, cutoff: usize) -> Result<MatrixCheck> {
    let g = group_element(eps, beta);
    let l = ops.generator(eps, beta);
    let low = ops.low_lying(cutoff);
    let mut sum2 = 0.0;
    let mut edge = 0.0f64;
    for &j in &low {
        let ej = ops.unit(j);
        let u = expm_multiply(&l, 1.0, &ej);
        edge = edge.max(ops.edge_population(&u));
        let y = expm_multiply(&l, -1.0, &ops.b.matvec(&u));
        let bj = ops.b.matvec(&ej);
        for &i in &low {
            let expect = g.phi * bj[i] + if i == j { g.zeta } else { C0 };
            sum2 += (y[i] - expect).norm_sqr();
        }
    }
    Ok(MatrixCheck {
        residual_norm: sum2.sqrt(),
        central_defect: 0.0,
        edge_population: edge,
        edge_flag: edge > EDGE_TOL,
        block_dim: low.len(),
    })
}

/// Expectation values on `|u⟩ = U|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GcsSymbols {
    /// `⟨u|B|u⟩`.
    pub b: Complex64,
    /// `⟨u|B†|u⟩`.
    pub b_dag: Complex64,
    /// `⟨u|BB†|u⟩`.
    pub bb_dag: Complex64,
    /// `⟨u|E|u⟩`.
    pub e: f64,
    pub edge_population: f64,
    pub edge_flag: bool,
}

impl GcsSymbols {
    /// `⟨BB†⟩ − |⟨B⟩|²`: the quantum fluctuation that the classical limit
    /// drops; `1/N` on coherent states.
    pub fn fluctuation(&self) -> f64 {
        self.bb_dag.re - self.b.norm_sqr()
    }
}

pub fn gcs_symbols(eps: f64, beta: Complex64, ops: &GlobalOps) -> GcsSymbols {
    let l = ops.generator(eps, beta);
    let u = expm_multiply(&l, 1.0, &ops.unit(0));
    let dot = |x: &[Complex64], y: &[Complex64]| -> Complex64 { x.iter().zip(y).map(|(a, b)| a.conj() * b).sum() };
    let bu = ops.b.matvec(&u);
    let bdu = ops.b_dag.matvec(&u);
    let edge = ops.edge_population(&u);
    GcsSymbols {
        b: dot(&u, &bu),
        b_dag: dot(&u, &bdu),
        bb_dag: dot(&bdu, &bdu),
        e: dot(&u, &ops.e.matvec(&u)).re,
        edge_population: edge,
        edge_flag: edge > EDGE_TOL,
    }
}

/// Parameters of `H_eff = ν a†a + ω + drive*·a + drive·a†`.
///
/// At fixed field and with the drive frequency set to zero this has the same
/// operator content as the stochastic-field Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHamiltonian {
    pub nu: f64,
    pub omega_offset: f64,
    pub drive: Complex64,
}

/// Applies `ζ → ζΛ/√N`.
pub fn effective_hamiltonian_params(zeta: Complex64, nu: f64, omega: f64, lambda: f64, n: usize) -> Result<EffectiveHamiltonian> {
    if n == 0 {
        return domain("mode count must be positive");
    }
    Ok(EffectiveHamiltonian {
        nu,
        omega_offset: omega,
        drive: zeta * (lambda / (n as f64).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::loglog_slope;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bracket_examples() {
        let n = 9;
        let s = 1.0 / 3.0;
        let r = bracket(&AlgebraElement::new(1.0, C0, n), &AlgebraElement::new(0.0, c(s, 0.0), n)).unwrap();
        assert_eq!(r.eps, 0.0);
        assert!((r.beta - c(0.0, s)).norm() < 1e-15);
        assert_eq!(r.central, C0);

        let r = bracket(&AlgebraElement::new(0.7, c(0.2, 0.0), n), &AlgebraElement::new(-0.4, c(0.2, 0.0), n)).unwrap();
        assert_eq!(r.central, C0);

        let n = 16;
        let a = AlgebraElement::new(1.0, c(0.0, 0.25), n);
        let b = AlgebraElement::new(1.0, c(0.25, 0.0), n);
        let r = bracket(&a, &b).unwrap();
        assert!((r.central - c(0.0, 2.0)).norm() < 1e-14);

        assert!(bracket(&a, &AlgebraElement::new(1.0, C0, 4)).is_err());
    }

    #[test]
    fn central_term_scaling_slope() {
        let ns = [4usize, 16, 64, 256];
        let rel = central_scaling([1.0, 1.0], [c(0.0, 1.0), c(1.0, 0.0)], &ns).unwrap();
        let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let fit = loglog_slope(&x, &rel);
        assert!((fit.slope + 1.0).abs() < 0.05, "{fit:?}");
    }

    #[test]
    fn ell_representation_drops_only_the_central_term() {
        let (e1, b1, e2, b2) = (0.4, c(0.3, -0.2), -1.1, c(0.05, 0.7));
        let l1 = ell_matrix(e1, b1);
        let l2 = ell_matrix(e2, b2);
        let r = bracket(&AlgebraElement::new(e1, b1, 5), &AlgebraElement::new(e2, b2, 5)).unwrap();
        assert!((l1 * l2 - l2 * l1 - ell_matrix(r.eps, r.beta)).norm() < 1e-15);
    }

    #[test]
    fn group_element_is_exp_of_minus_ell_dagger() {
        for (eps, beta) in [(0.3, c(0.0, 0.1)), (-2.0, c(0.4, 0.5)), (1e-8, c(1.0, 0.0))] {
            let g = group_element(eps, beta);
            let u = (-ell_matrix(eps, beta).adjoint()).exp();
            assert!((u - g.matrix()).norm() < 1e-13, "{eps} {beta}");
        }
    }

    #[test]
    fn group_element_examples() {
        let g = group_element(0.0, c(0.3, 0.1));
        assert_eq!(g.phi, c(1.0, 0.0));
        assert!((g.zeta - c(-0.1, 0.3)).norm() < 1e-16);
        let g = group_element(std::f64::consts::PI, c(1.0, 0.0));
        assert!((g.phi + 1.0).norm() < 1e-15);
        assert!((g.zeta - c(-2.0 / std::f64::consts::PI, 0.0)).norm() < 1e-15);
        // series branch against the plain closed form just below the switch
        let (eps, beta) = (0.999e-6, c(0.2, 0.3));
        let direct = beta * (Complex64::from_polar(1.0, eps) - 1.0) / eps;
        assert!((group_element(eps, beta).zeta - direct).norm() < 1e-9);
    }

    #[test]
    fn global_operators_obey_heisenberg_algebra() {
        let ops = GlobalOps::uniform(3, 5).unwrap();
        assert!(ops.commutator_defect(ops.default_cutoff()) < 1e-10);
        let ops = GlobalOps::new(&[c(0.3, 0.1), c(-0.7, 0.2)], 6).unwrap();
        assert!(ops.commutator_defect(ops.default_cutoff()) < 1e-10);
        // the edge itself is not part of the algebra
        assert!(ops.commutator_defect(10) > 0.1);
    }

    #[test]
    fn matrix_bracket_matches_coefficients() {
        let ops = GlobalOps::uniform(4, 6).unwrap();
        let n = 4;
        let a = AlgebraElement::new(1.0, c(0.0, 0.5), n);
        let b = AlgebraElement::new(1.0, c(0.5, 0.0), n);
        let m = matrix_check_bracket(&a, &b, &ops, 2).unwrap();
        let cc = bracket(&a, &b).unwrap().central;
        assert!((m.residual_norm - cc.norm()).abs() < 1e-8, "{m:?} {cc}");
        assert!(m.central_defect < 1e-10);

        let a = AlgebraElement::new(0.3, c(0.2, 0.0), n);
        let b = AlgebraElement::new(-0.8, c(0.2, 0.0), n);
        assert!(matrix_check_bracket(&a, &b, &ops, 2).unwrap().residual_norm < 1e-10);
    }

    #[test]
    fn matrix_bracket_flags_edge() {
        let ops = GlobalOps::uniform(2, 4).unwrap();
        let a = AlgebraElement::new(1.0, c(0.0, 0.5), 2);
        let b = AlgebraElement::new(1.0, c(0.5, 0.0), 2);
        assert!(matrix_check_bracket(&a, &b, &ops, 6).unwrap().edge_flag);
    }

    #[test]
    fn expm_multiply_matches_dense() {
        let ops = GlobalOps::new(&[c(0.3, 0.1), c(-0.7, 0.2)], 4).unwrap();
        let l = ops.generator(0.7, c(0.2, -0.4));
        let dense = (l.to_dense() * c(1.3, 0.0)).exp();
        let v: Vec<Complex64> = (0..ops.dim()).map(|i| c((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let got = expm_multiply(&l, 1.3, &v);
        let want = &dense * nalgebra::DVector::from_vec(v);
        let err = got.iter().zip(want.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn conjugation_trivial_cases() {
        let ops = GlobalOps::uniform(2, 6).unwrap();
        assert!(gcs_conjugation_check(0.0, C0, &ops, 3).unwrap().residual_norm < 1e-14);
        // β = 0: pure rotation, exact even at the edge
        assert!(gcs_conjugation_check(0.9, C0, &ops, 6).unwrap().residual_norm < 1e-12);
    }

    #[test]
    fn conjugation_is_truncation_limited() {
        let (eps, beta) = (0.3, c(0.0, 0.1));
        let run = |d: usize| {
            let ops = GlobalOps::uniform(2, d).unwrap();
            gcs_conjugation_check(eps, beta, &ops, ops.default_cutoff()).unwrap()
        };
        let coarse = run(4);
        let fine = run(8);
        assert!(fine.residual_norm < 1e-6, "{fine:?}");
        assert!(coarse.residual_norm >= 10.0 * fine.residual_norm);
        assert!(coarse.edge_flag);
    }

    #[test]
    fn vacuum_symbols() {
        let ops = GlobalOps::uniform(2, 6).unwrap();
        let s = gcs_symbols(0.0, C0, &ops);
        assert_eq!(s.b, C0);
        assert!((s.bb_dag.re * 2.0 - 1.0).abs() < 1e-15);
        assert_eq!(s.e, 0.0);
    }

    #[test]
    fn symbols_follow_group_element() {
        let (eps, beta) = (0.2, c(0.05, 0.0));
        let ops = GlobalOps::uniform(2, 8).unwrap();
        let s = gcs_symbols(eps, beta, &ops);
        let z = group_element(eps, beta).zeta;
        assert!((s.b - z).norm() < beta.norm_sqr());
        assert!((s.b_dag - s.b.conj()).norm() < 1e-12);
        assert!((s.fluctuation() - 0.5).abs() < 1e-10);
        // one coherent amplitude ζ per mode
        assert!((s.e - z.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn effective_drive() {
        let h = effective_hamiltonian_params(c(0.1, 0.0), 1.0, 0.5, 2.0, 4).unwrap();
        assert!((h.drive - c(0.1, 0.0)).norm() < 1e-16);
        let h = effective_hamiltonian_params(C0, 1.0, 0.5, 2.0, 4).unwrap();
        assert_eq!((h.drive, h.omega_offset), (C0, 0.5));
        // fixed per-mode coupling g: Λ = g√N, drive independent of N
        let g = 0.3;
        let d: Vec<Complex64> = [1usize, 10, 1000]
            .iter()
            .map(|&n| effective_hamiltonian_params(c(0.2, 0.1), 1.0, 0.0, g * (n as f64).sqrt(), n).unwrap().drive)
            .collect();
        assert!(d.iter().all(|x| (x - d[0]).norm() < 1e-15));
    }

    proptest! {
        #[test]
        fn bracket_antisymmetric(e1 in -2.0..2.0f64, e2 in -2.0..2.0f64, b1 in -1.0..1.0f64, b2 in -1.0..1.0f64, b3 in -1.0..1.0f64, b4 in -1.0..1.0f64, n in 1usize..100) {
            let a = AlgebraElement::new(e1, c(b1, b2), n);
            let b = AlgebraElement::new(e2, c(b3, b4), n);
            let ab = bracket(&a, &b).unwrap();
            let ba = bracket(&b, &a).unwrap();
            prop_assert_eq!(ab.eps, -ba.eps + 0.0);
            prop_assert_eq!(ab.beta, -ba.beta);
            prop_assert_eq!(ab.central, -ba.central);
        }

        #[test]
        fn jacobi_identity(e in prop::array::uniform3(-2.0..2.0f64), br in prop::array::uniform3(-1.0..1.0f64), bi in prop::array::uniform3(-1.0..1.0f64), n in 1usize..50) {
            let x: Vec<AlgebraElement> = (0..3).map(|k| AlgebraElement::new(e[k], c(br[k], bi[k]), n)).collect();
            let mut sum = AlgebraElement::new(0.0, C0, n);
            for k in 0..3 {
                let inner = bracket(&x[k], &x[(k + 1) % 3]).unwrap();
                let outer = bracket(&inner, &x[(k + 2) % 3]).unwrap();
                sum.eps += outer.eps;
                sum.beta += outer.beta;
                sum.central += outer.central;
            }
            prop_assert!(sum.approx_eq(&AlgebraElement::new(0.0, C0, n), 1e-12 * n as f64), "{:?}", sum);
        }

        #[test]
        fn random_bracket_matrix_agreement(e1 in -1.0..1.0f64, e2 in -1.0..1.0f64, b in prop::array::uniform4(-0.6..0.6f64)) {
            let ops = GlobalOps::uniform(2, 6).unwrap();
            let a = AlgebraElement::new(e1, c(b[0], b[1]), 2);
            let bb = AlgebraElement::new(e2, c(b[2], b[3]), 2);
            let m = matrix_check_bracket(&a, &bb, &ops, 3).unwrap();
            let cc = bracket(&a, &bb).unwrap().central;
            prop_assert!((m.residual_norm - cc.norm()).abs() < 1e-8);
            prop_assert!(m.central_defect < 1e-10);
        }
    }
}
