use num_complex::Complex64;

use super::operator::FockOperator;
use crate::error::{domain, Error, Result};
use crate::two_mode::{derived_constants, ModelKind, TwoModeParams};

/// Default bound on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 20_000;

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "GNFIELD_ORACLE_DIM_CAP";

pub fn configured_dim_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Environment {
    /// Bosonic modes `b_k` with frequencies `ω_k`, couplings `λ_k` and a
    /// common truncation.
    Bosonic {
        omegas: Vec<f64>,
        couplings: Vec<Complex64>,
        d_env: usize,
    },
    /// Spin-½ sites with splitting `f` (`f s_z`, `s_z = ±½`) and couplings `g_i`.
    Spins { f: f64, couplings: Vec<Complex64> },
}

impl Environment {
    /// `N` bosonic modes at one frequency with equal real couplings `Λ/√N`.
    pub fn uniform_bosonic(n: usize, omega: f64, lambda: f64, d_env: usize) -> Self {
        Self::spread_bosonic(&vec![omega; n], lambda, d_env)
    }

    /// Equal real couplings `Λ/√N` over the given frequencies.
    pub fn spread_bosonic(omegas: &[f64], lambda: f64, d_env: usize) -> Self {
        let g = Complex64::new(lambda / (omegas.len() as f64).sqrt(), 0.0);
        Environment::Bosonic {
            omegas: omegas.to_vec(),
            couplings: vec![g; omegas.len()],
            d_env,
        }
    }

    pub fn n_sites(&self) -> usize {
        match self {
            Environment::Bosonic { couplings, .. } | Environment::Spins { couplings, .. } => couplings.len(),
        }
    }

    pub fn couplings(&self) -> &[Complex64] {
        match self {
            Environment::Bosonic { couplings, .. } | Environment::Spins { couplings, .. } => couplings,
        }
    }

    pub fn site_dim(&self) -> usize {
        match self {
            Environment::Bosonic { d_env, .. } => *d_env,
            Environment::Spins { .. } => 2,
        }
    }

    pub fn is_bosonic(&self) -> bool {
        matches!(self, Environment::Bosonic { .. })
    }

    /// Mean environment frequency (`f` for spins).
    pub fn reference_frequency(&self) -> f64 {
        match self {
            Environment::Bosonic { omegas, .. } => omegas.iter().sum::<f64>() / omegas.len() as f64,
            Environment::Spins { f, .. } => *f,
        }
    }

    /// Energy of one excitation of site `k`.
    fn site_frequency(&self, k: usize) -> f64 {
        match self {
            Environment::Bosonic { omegas, .. } => omegas[k],
            Environment::Spins { f, .. } => *f,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockSpaceSpec {
    pub nu: f64,
    pub d_sys: usize,
    pub env: Environment,
    pub model: ModelKind,
    pub dim_cap: usize,
}

impl FockSpaceSpec {
    pub fn new(nu: f64, d_sys: usize, env: Environment, model: ModelKind) -> Result<Self> {
        let spec = Self {
            nu,
            d_sys,
            env,
            model,
            dim_cap: configured_dim_cap(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_cap(mut self, cap: usize) -> Result<Self> {
        self.dim_cap = cap;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.d_sys < 2 {
            return domain("system truncation must be >= 2");
        }
        let n = self.env.n_sites();
        if n == 0 {
            return domain("environment needs at least one site");
        }
        match &self.env {
            Environment::Bosonic { omegas, d_env, .. } => {
                if omegas.len() != n {
                    return Err(Error::ModeCountMismatch {
                        left: omegas.len(),
                        right: n,
                    });
                }
                if *d_env < 2 {
                    return domain("environment truncation must be >= 2");
                }
                if omegas.iter().any(|w| !w.is_finite()) {
                    return domain("environment frequencies must be finite");
                }
            }
            Environment::Spins { f, .. } => {
                if !(*f > 0.0 && f.is_finite()) {
                    return domain("spin splitting must be > 0");
                }
            }
        }
        if !self.nu.is_finite() || self.env.couplings().iter().any(|g| !(g.re.is_finite() && g.im.is_finite())) {
            return domain("frequencies and couplings must be finite");
        }
        let dim = self.checked_dim().ok_or(Error::DimensionCap {
            dim: usize::MAX,
            cap: self.dim_cap,
        })?;
        if dim > self.dim_cap {
            return Err(Error::DimensionCap { dim, cap: self.dim_cap });
        }
        Ok(())
    }

    fn checked_dim(&self) -> Option<usize> {
        let mut d = self.d_sys;
        for _ in 0..self.env.n_sites() {
            d = d.checked_mul(self.env.site_dim())?;
        }
        Some(d)
    }

    pub fn env_dim(&self) -> usize {
        self.env.site_dim().pow(self.env.n_sites() as u32)
    }

    pub fn total_dim(&self) -> usize {
        self.d_sys * self.env_dim()
    }

    /// `Λ = sqrt(Σ|λ_k|²)`.
    pub fn collective_coupling(&self) -> f64 {
        self.env.couplings().iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Collective two-mode parameters with `ω` the mean environment frequency.
    pub fn collective_params(&self) -> TwoModeParams {
        TwoModeParams {
            nu: self.nu,
            omega: self.env.reference_frequency(),
            lambda: self.collective_coupling(),
        }
    }

    /// Frequency `ω_j` of the frame in which results are reported.
    pub fn rotating_frequency(&self) -> f64 {
        derived_constants(&self.collective_params(), self.model).omega_rot
    }

    /// Same spec with every truncation set to `d` (spins keep dimension 2).
    pub fn with_truncation(&self, d: usize) -> Result<Self> {
        let mut s = self.clone();
        s.d_sys = d;
        if let Environment::Bosonic { d_env, .. } = &mut s.env {
            *d_env = d;
        }
        s.validate()?;
        Ok(s)
    }

    /// Local occupation numbers of basis state `idx`: `[n_a, n_1, …, n_N]`
    /// (for spins `n_k = 1` means spin up).
    pub fn digits(&self, idx: usize) -> Vec<usize> {
        let n = self.env.n_sites();
        let base = self.env.site_dim();
        let mut out = vec![0; n + 1];
        let mut rest = idx;
        for k in (1..=n).rev() {
            out[k] = rest % base;
            rest /= base;
        }
        out[0] = rest;
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        let base = self.env.site_dim();
        digits[1..].iter().fold(digits[0], |acc, &d| acc * base + d)
    }

    /// Conserved charge: `n_a + Σ n_k` (exchange) or `n_a − Σ n_k` (hopping).
    pub fn charge(&self, digits: &[usize]) -> i64 {
        let env: i64 = digits[1..].iter().map(|&d| d as i64).sum();
        match self.model {
            ModelKind::Exchange => digits[0] as i64 + env,
            ModelKind::Hopping => digits[0] as i64 - env,
        }
    }

    /// Diagonal of the total excitation operator used as the charge, in the full basis.
    pub fn charge_diagonal(&self) -> Vec<f64> {
        (0..self.total_dim()).map(|i| self.charge(&self.digits(i)) as f64).collect()
    }

    /// Calls `emit(target, value)` for every nonzero `⟨target|H|idx⟩`.
    pub(crate) fn for_each_element(&self, digits: &[usize], couplings: &[Complex64], mut emit: impl FnMut(&[usize], Complex64)) {
        let ds = self.d_sys;
        let de = self.env.site_dim();
        let na = digits[0];
        let mut diag = self.nu * na as f64;
        for k in 0..self.env.n_sites() {
            let nk = digits[k + 1];
            diag += match &self.env {
                Environment::Bosonic { .. } => self.env.site_frequency(k) * nk as f64,
                Environment::Spins { f, .. } => f * (nk as f64 - 0.5),
            };
        }
        emit(digits, Complex64::new(diag, 0.0));

        let mut target = digits.to_vec();
        let amp = |n: usize| (n as f64).sqrt();
        let env_amp = |n: usize| if self.env.is_bosonic() { (n as f64).sqrt() } else { 1.0 };
        for (k, &lam) in couplings.iter().enumerate() {
            let nk = digits[k + 1];
            // Lowering a and raising site k / raising a and lowering site k.
            match self.model {
                ModelKind::Exchange => {
                    // λ* a b†
                    if na > 0 && nk + 1 < de {
                        target[0] = na - 1;
                        target[k + 1] = nk + 1;
                        emit(&target, lam.conj() * amp(na) * env_amp(nk + 1));
                    }
                    // λ a† b
                    if na + 1 < ds && nk > 0 {
                        target[0] = na + 1;
                        target[k + 1] = nk - 1;
                        emit(&target, lam * amp(na + 1) * env_amp(nk));
                    }
                }
                ModelKind::Hopping => {
                    // λ* a† b†
                    if na + 1 < ds && nk + 1 < de {
                        target[0] = na + 1;
                        target[k + 1] = nk + 1;
                        emit(&target, lam.conj() * amp(na + 1) * env_amp(nk + 1));
                    }
                    // λ a b
                    if na > 0 && nk > 0 {
                        target[0] = na - 1;
                        target[k + 1] = nk - 1;
                        emit(&target, lam * amp(na) * env_amp(nk));
                    }
                }
            }
            target[0] = na;
            target[k + 1] = nk;
        }
    }
}

/// Full Hamiltonian
///
/// ```text
/// exchange:  ν a†a + Σ ω_k b_k†b_k + Σ (λ_k* a b_k† + λ_k a† b_k)
/// hopping:   ν a†a + Σ ω_k b_k†b_k + Σ (λ_k* a† b_k† + λ_k a b_k)
/// ```
///
/// and the same with `b_k → s_k^-`, `ω_k b_k†b_k → f s_k^z` for spins.
pub fn build_hamiltonian(spec: &FockSpaceSpec) -> Result<FockOperator> {
    spec.validate()?;
    let dim = spec.total_dim();
    let couplings = spec.env.couplings().to_vec();
    let mut entries = Vec::new();
    for col in 0..dim {
        let digits = spec.digits(col);
        spec.for_each_element(&digits, &couplings, |t, v| entries.push((spec.index(t), col, v)));
    }
    Ok(FockOperator::from_triplets(dim, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn bos(n: usize, omega: f64, lambda: f64, d: usize, model: ModelKind) -> FockSpaceSpec {
        FockSpaceSpec::new(1.0, d, Environment::uniform_bosonic(n, omega, lambda, d), model).unwrap()
    }

    fn sorted_eigs(m: DMatrix<Complex64>) -> Vec<f64> {
        let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn decoupled_spectrum() {
        let spec = FockSpaceSpec::new(
            1.0,
            3,
            Environment::Bosonic {
                omegas: vec![1.7],
                couplings: vec![Complex64::new(0.0, 0.0)],
                d_env: 3,
            },
            ModelKind::Exchange,
        )
        .unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let e = sorted_eigs(h.to_dense());
        let mut want: Vec<f64> = (0..3).flat_map(|a| (0..3).map(move |b| a as f64 + 1.7 * b as f64)).collect();
        want.sort_by(f64::total_cmp);
        for (x, y) in e.iter().zip(&want) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn one_excitation_splitting() {
        let h = build_hamiltonian(&bos(1, 1.0, 0.5, 4, ModelKind::Exchange)).unwrap();
        let spec = bos(1, 1.0, 0.5, 4, ModelKind::Exchange);
        let block: Vec<usize> = [[1, 0], [0, 1]].iter().map(|d| spec.index(d)).collect();
        let m = DMatrix::from_fn(2, 2, |i, j| h.get(block[i], block[j]));
        assert_eq!(sorted_eigs(m), vec![0.5, 1.5]);
    }

    #[test]
    fn hermitian_with_complex_couplings() {
        for model in ModelKind::ALL {
            let spec = FockSpaceSpec::new(
                1.3,
                4,
                Environment::Bosonic {
                    omegas: vec![0.9, 1.1],
                    couplings: vec![Complex64::new(0.2, 0.3), Complex64::new(-0.1, 0.05)],
                    d_env: 3,
                },
                model,
            )
            .unwrap();
            let h = build_hamiltonian(&spec).unwrap();
            assert!(h.hermiticity_defect() < 1e-12);
            assert!(h.commutator_with_diagonal(&spec.charge_diagonal()) < 1e-12);
        }
    }

    #[test]
    fn spin_exchange_conserves_excitations() {
        let g = vec![Complex64::new(0.1, 0.02); 3];
        for model in ModelKind::ALL {
            let spec = FockSpaceSpec::new(1.0, 5, Environment::Spins { f: 1.0, couplings: g.clone() }, model).unwrap();
            let h = build_hamiltonian(&spec).unwrap();
            assert!(h.hermiticity_defect() < 1e-12);
            assert!(h.commutator_with_diagonal(&spec.charge_diagonal()) < 1e-12);
        }
    }

    #[test]
    fn exchange_charge_is_total_number() {
        let spec = bos(2, 1.0, 0.4, 3, ModelKind::Exchange);
        let number: Vec<f64> = (0..spec.total_dim()).map(|i| spec.digits(i).iter().sum::<usize>() as f64).collect();
        assert_eq!(number, spec.charge_diagonal());
    }

    #[test]
    fn digit_roundtrip() {
        let spec = bos(3, 1.0, 0.3, 4, ModelKind::Hopping);
        for i in 0..spec.total_dim() {
            assert_eq!(spec.index(&spec.digits(i)), i);
        }
        assert_eq!(spec.digits(spec.total_dim() - 1), vec![3, 3, 3, 3]);
    }

    #[test]
    fn dimension_cap() {
        let env = Environment::uniform_bosonic(3, 1.0, 0.3, 20);
        let err = FockSpaceSpec::new(1.0, 20, env, ModelKind::Exchange).unwrap_err();
        assert_eq!(err, Error::DimensionCap { dim: 160_000, cap: DEFAULT_DIM_CAP });
        let ok = bos(3, 1.0, 0.3, 10, ModelKind::Exchange);
        assert!(ok.clone().with_cap(9_999).is_err());
        assert!(ok.with_truncation(20).is_err());
    }

    #[test]
    fn collective_parameters() {
        let spec = FockSpaceSpec::new(2.0, 4, Environment::spread_bosonic(&[0.8, 1.0, 1.2], 0.3, 3), ModelKind::Exchange).unwrap();
        let p = spec.collective_params();
        assert!((p.omega - 1.0).abs() < 1e-15 && (p.lambda - 0.3).abs() < 1e-15);
        assert!((spec.rotating_frequency() - 1.5).abs() < 1e-15);
    }
}
