//! Exact evolution of `ρ_A ⊗ ρ_env` in the truncated space.
//!
//! The Hamiltonian conserves a charge (see [`FockSpaceSpec::charge`]), so it
//! is diagonalised block by block. The initial state is decomposed into pure
//! components `|φ_j⟩ ⊗ |config⟩` (eigenvectors of `ρ_A` times environment
//! number states, weighted by the product Gibbs distribution); each
//! component populates exactly one basis state per block, which makes the
//! projection onto block eigenvectors free.
//!
//! Coupling phases are gauged into the environment operators before
//! diagonalising. The environment state is diagonal in the number basis, so
//! the reduced state of `a` does not depend on them and every block is real.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::hamiltonian::{Environment, FockSpaceSpec};
use super::states::{gaussian_density_matrix, moments_from_density, top_population};
use crate::error::{domain, Error, Result};
use crate::gaussian::{planck_occupation, GaussianState};

/// Leakage above which a result is flagged.
pub const LEAKAGE_TOL: f64 = 1e-6;

/// Components per accumulation chunk; sums within and across chunks run in a
/// fixed order, so results do not depend on the worker count.
const COMPONENT_CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Components with weight below this are dropped.
    pub prune: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { prune: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub t: f64,
    /// Moments of `ρ_A(t)` in the frame rotating at `ω_j`.
    pub state: GaussianState,
    /// `ρ_A(t)` in the rotating frame.
    pub rho_a: DMatrix<Complex64>,
    /// Largest population in the top two levels of any bosonic mode.
    pub leakage: f64,
    pub leakage_flag: bool,
    /// Weight of the initial state discarded by truncation and pruning
    /// (the kept part is renormalised).
    pub discarded_weight: f64,
    /// `|Tr ρ(t) − Tr ρ(0)|`, a unitarity check.
    pub trace_drift: f64,
}

struct Block {
    /// Global basis indices, ascending.
    indices: Vec<usize>,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
}

struct Component {
    weight: f64,
    amplitudes: Vec<Complex64>,
    env_index: usize,
    env_digits: Vec<usize>,
}

/// Diagonalised truncated problem, reusable across times and initial states.
pub struct FockOracle {
    spec: FockSpaceSpec,
    charge_of: Vec<i64>,
    position: Vec<usize>,
    blocks: BTreeMap<i64, Block>,
}

/// Gibbs populations of one environment site, cropped to the truncation
/// (not renormalised; the missing tail is `1 − Σ p`).
fn gibbs_site_distribution(env: &Environment, k: usize, temperature: f64) -> Result<Vec<f64>> {
    match env {
        Environment::Bosonic { omegas, d_env, .. } => {
            let n = if temperature == 0.0 {
                0.0
            } else {
                planck_occupation(omegas[k], temperature)?
            };
            let q = n / (n + 1.0);
            let mut p = 1.0 / (n + 1.0);
            let mut out = Vec::with_capacity(*d_env);
            for _ in 0..*d_env {
                out.push(p);
                p *= q;
            }
            Ok(out)
        }
        Environment::Spins { f, .. } => {
            // H = f s_z: p_up = 1/(1 + e^{f/T}).
            let up = if temperature == 0.0 { 0.0 } else { 1.0 / (1.0 + (f / temperature).exp()) };
            Ok(vec![1.0 - up, up])
        }
    }
}

impl FockOracle {
    /// Block structure only; eigenproblems are solved on demand by [`Self::prepare`].
    pub fn new(spec: &FockSpaceSpec) -> Self {
        let dim = spec.total_dim();
        let mut members: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        let mut charge_of = Vec::with_capacity(dim);
        let mut position = Vec::with_capacity(dim);
        for idx in 0..dim {
            let q = spec.charge(&spec.digits(idx));
            let list = members.entry(q).or_default();
            position.push(list.len());
            list.push(idx);
            charge_of.push(q);
        }
        let blocks = members
            .into_iter()
            .map(|(q, indices)| {
                (
                    q,
                    Block {
                        indices,
                        energies: DVector::zeros(0),
                        vectors: DMatrix::zeros(0, 0),
                    },
                )
            })
            .collect();
        Self {
            spec: spec.clone(),
            charge_of,
            position,
            blocks,
        }
    }

    pub fn spec(&self) -> &FockSpaceSpec {
        &self.spec
    }

    pub fn block_sizes(&self) -> Vec<(i64, usize)> {
        self.blocks.iter().map(|(q, b)| (*q, b.indices.len())).collect()
    }

    fn gauged_couplings(&self) -> Vec<Complex64> {
        self.spec.env.couplings().iter().map(|g| Complex64::new(g.norm(), 0.0)).collect()
    }

    /// Diagonalises the listed blocks that are not yet solved.
    fn prepare(&mut self, charges: &[i64]) {
        let couplings = self.gauged_couplings();
        let spec = &self.spec;
        let position = &self.position;
        let todo: Vec<(i64, &Vec<usize>)> = self
            .blocks
            .iter()
            .filter(|(q, b)| charges.contains(q) && b.energies.is_empty())
            .map(|(q, b)| (*q, &b.indices))
            .collect();
        let solved: Vec<(i64, DVector<f64>, DMatrix<f64>)> = todo
            .into_par_iter()
            .map(|(q, indices)| {
                let n = indices.len();
                let mut h = DMatrix::<f64>::zeros(n, n);
                for (col, &idx) in indices.iter().enumerate() {
                    let digits = spec.digits(idx);
                    spec.for_each_element(&digits, &couplings, |t, v| {
                        let row = position[spec.index(t)];
                        h[(row, col)] += v.re;
                    });
                }
                let eig = h.symmetric_eigen();
                (q, eig.eigenvalues, eig.eigenvectors)
            })
            .collect();
        for (q, e, v) in solved {
            let b = self.blocks.get_mut(&q).unwrap();
            b.energies = e;
            b.vectors = v;
        }
    }

    fn components(&self, rho_a0: &DMatrix<Complex64>, temperature: f64, prune: f64) -> Result<(Vec<Component>, f64)> {
        let spec = &self.spec;
        let n_sites = spec.env.n_sites();
        let site_p: Vec<Vec<f64>> = (0..n_sites)
            .map(|k| gibbs_site_distribution(&spec.env, k, temperature))
            .collect::<Result<_>>()?;

        // Truncated tails are dropped and the remaining state renormalised;
        // the dropped mass is reported.
        let mut tail = 0.0;
        let site_p: Vec<Vec<f64>> = site_p
            .into_iter()
            .map(|p| {
                let z: f64 = p.iter().sum();
                tail += 1.0 - z;
                p.into_iter().map(|x| x / z).collect()
            })
            .collect();

        let herm = (rho_a0 + rho_a0.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let trace: f64 = eig.eigenvalues.iter().filter(|&&w| w > 0.0).sum();
        if !(trace > 0.0) {
            return domain("initial system state has no positive weight");
        }
        tail += (1.0 - trace).max(0.0);
        let mut sys: Vec<(f64, Vec<Complex64>)> = Vec::new();
        for j in 0..eig.eigenvalues.len() {
            let w = eig.eigenvalues[j] / trace;
            if w > prune {
                sys.push((w, eig.eigenvectors.column(j).iter().copied().collect()));
            }
        }
        if sys.is_empty() {
            return domain("initial system state has no weight above the pruning threshold");
        }
        let w_max = sys.iter().map(|s| s.0).fold(0.0, f64::max);

        // Depth-first enumeration of environment configurations; a partial
        // product bounds every completion, so pruning early is exact.
        let mut configs: Vec<(f64, Vec<usize>)> = Vec::new();
        let mut stack: Vec<(f64, Vec<usize>)> = vec![(1.0, Vec::new())];
        while let Some((p, digits)) = stack.pop() {
            if digits.len() == n_sites {
                configs.push((p, digits));
                continue;
            }
            let k = digits.len();
            for (n, &pk) in site_p[k].iter().enumerate().rev() {
                let w = p * pk;
                if w * w_max > prune {
                    let mut d = digits.clone();
                    d.push(n);
                    stack.push((w, d));
                }
            }
        }
        configs.sort_by(|a, b| a.1.cmp(&b.1));

        let base = spec.env.site_dim();
        let mut out = Vec::with_capacity(sys.len() * configs.len());
        let mut kept = 0.0;
        for (w, amps) in &sys {
            for (p, digits) in &configs {
                let weight = w * p;
                if weight <= prune {
                    continue;
                }
                kept += weight;
                out.push(Component {
                    weight,
                    amplitudes: amps.clone(),
                    env_index: digits.iter().fold(0, |acc, &d| acc * base + d),
                    env_digits: digits.clone(),
                });
            }
        }
        Ok((out, tail + (1.0 - kept).max(0.0)))
    }

    /// Evolves `ρ_A ⊗ ρ_env(T)` and reduces to mode `a` at every time in `times`.
    pub fn evolve_many(
        &mut self,
        rho_a0: &GaussianState,
        temperature: f64,
        times: &[f64],
        options: OracleOptions,
    ) -> Result<Vec<OracleResult>> {
        let rho0 = gaussian_density_matrix(rho_a0, self.spec.d_sys)?;
        self.evolve_density_many(&rho0, temperature, times, options)
    }

    pub fn evolve_density_many(
        &mut self,
        rho_a0: &DMatrix<Complex64>,
        temperature: f64,
        times: &[f64],
        options: OracleOptions,
    ) -> Result<Vec<OracleResult>> {
        if !(temperature >= 0.0) {
            return domain(format!("temperature must be >= 0, got {temperature}"));
        }
        if rho_a0.nrows() != self.spec.d_sys || rho_a0.ncols() != self.spec.d_sys {
            return Err(Error::ModeCountMismatch {
                left: rho_a0.nrows(),
                right: self.spec.d_sys,
            });
        }
        if times.is_empty() {
            return Ok(Vec::new());
        }
        let (components, discarded) = self.components(rho_a0, temperature, options.prune)?;
        let env_dim = self.spec.env_dim();
        let ds = self.spec.d_sys;
        let sign = match self.spec.model {
            crate::two_mode::ModelKind::Exchange => 1i64,
            crate::two_mode::ModelKind::Hopping => -1i64,
        };
        let mut needed: Vec<i64> = components
            .iter()
            .flat_map(|c| {
                let e: i64 = c.env_digits.iter().map(|&d| d as i64).sum();
                (0..ds as i64).map(move |na| na + sign * e)
            })
            .collect();
        needed.sort_unstable();
        needed.dedup();
        self.prepare(&needed);

        let nt = times.len();
        let this = &*self;
        let partials: Vec<Accumulator> = components
            .par_chunks(COMPONENT_CHUNK)
            .map(|chunk| {
                let mut acc = Accumulator::new(ds, env_dim, this.spec.env.n_sites(), nt);
                for c in chunk {
                    this.accumulate(c, times, &mut acc);
                }
                acc
            })
            .collect();
        let mut total = Accumulator::new(ds, env_dim, self.spec.env.n_sites(), nt);
        for p in partials {
            total.add(&p);
        }

        let initial_trace: f64 = components.iter().map(|c| c.weight).sum();
        let omega_rot = self.spec.rotating_frequency();
        let top = self.spec.env.site_dim();
        Ok((0..nt)
            .map(|k| {
                let t = times[k];
                let mut rho = total.rho[k].clone();
                for m in 0..ds {
                    for n in 0..ds {
                        rho[(m, n)] *= Complex64::from_polar(1.0, omega_rot * t * (m as f64 - n as f64));
                    }
                }
                let mut leakage = top_population(&rho);
                if self.spec.env.is_bosonic() {
                    for site in &total.site_pop[k] {
                        leakage = leakage.max(site[top - 2..].iter().sum());
                    }
                }
                OracleResult {
                    t,
                    state: moments_from_density(&rho),
                    trace_drift: (rho.trace().re - initial_trace).abs(),
                    rho_a: rho,
                    leakage,
                    leakage_flag: leakage > LEAKAGE_TOL,
                    discarded_weight: discarded,
                }
            })
            .collect())
    }

    fn accumulate(&self, c: &Component, times: &[f64], acc: &mut Accumulator) {
        let spec = &self.spec;
        let env_dim = spec.env_dim();
        let ds = spec.d_sys;
        let nt = times.len();
        let mut re = vec![DMatrix::<f64>::zeros(ds, env_dim); nt];
        let mut im = vec![DMatrix::<f64>::zeros(ds, env_dim); nt];
        for na in 0..ds {
            let amp = c.amplitudes[na];
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let idx = na * env_dim + c.env_index;
            let block = &self.blocks[&self.charge_of[idx]];
            let pos = self.position[idx];
            let dim = block.indices.len();
            // Coefficients in the eigenbasis, phased for every time; columns
            // are [Re(t_0..), Im(t_0..)].
            let mut coef = DMatrix::<f64>::zeros(dim, 2 * nt);
            for i in 0..dim {
                let v = block.vectors[(pos, i)] * amp;
                for (k, &t) in times.iter().enumerate() {
                    let z = v * Complex64::from_polar(1.0, -block.energies[i] * t);
                    coef[(i, k)] = z.re;
                    coef[(i, nt + k)] = z.im;
                }
            }
            let psi = &block.vectors * coef;
            for (row, &g) in block.indices.iter().enumerate() {
                let (m, e) = (g / env_dim, g % env_dim);
                for k in 0..nt {
                    re[k][(m, e)] += psi[(row, k)];
                    im[k][(m, e)] += psi[(row, nt + k)];
                }
            }
        }
        for k in 0..nt {
            let (r, i) = (&re[k], &im[k]);
            let rr = r * r.transpose() + i * i.transpose();
            let ii = i * r.transpose() - r * i.transpose();
            for m in 0..ds {
                for n in 0..ds {
                    acc.rho[k][(m, n)] += Complex64::new(rr[(m, n)], ii[(m, n)]) * c.weight;
                }
            }
            if spec.env.is_bosonic() {
                for e in 0..env_dim {
                    let mut p = 0.0;
                    for m in 0..ds {
                        p += r[(m, e)].powi(2) + i[(m, e)].powi(2);
                    }
                    if p == 0.0 {
                        continue;
                    }
                    let digits = spec.digits(e);
                    for (site, &n) in digits[1..].iter().enumerate() {
                        acc.site_pop[k][site][n] += c.weight * p;
                    }
                }
            }
        }
    }
}

struct Accumulator {
    rho: Vec<DMatrix<Complex64>>,
    site_pop: Vec<Vec<Vec<f64>>>,
}

impl Accumulator {
    fn new(ds: usize, env_dim: usize, n_sites: usize, nt: usize) -> Self {
        let site_dim = if n_sites == 0 { 0 } else { (env_dim as f64).powf(1.0 / n_sites as f64).round() as usize };
        Self {
            rho: vec![DMatrix::zeros(ds, ds); nt],
            site_pop: vec![vec![vec![0.0; site_dim]; n_sites]; nt],
        }
    }

    fn add(&mut self, other: &Accumulator) {
        for (a, b) in self.rho.iter_mut().zip(&other.rho) {
            *a += b;
        }
        for (a, b) in self.site_pop.iter_mut().zip(&other.site_pop) {
            for (x, y) in a.iter_mut().zip(b) {
                for (u, v) in x.iter_mut().zip(y) {
                    *u += v;
                }
            }
        }
    }
}

/// Single-time convenience wrapper.
pub fn evolve_and_reduce(spec: &FockSpaceSpec, rho_a0: &GaussianState, temperature: f64, t: f64) -> Result<OracleResult> {
    let mut oracle = FockOracle::new(spec);
    let mut out = oracle.evolve_many(rho_a0, temperature, &[t], OracleOptions::default())?;
    Ok(out.pop().unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRun {
    pub results: Vec<OracleResult>,
    /// Truncation actually used.
    pub truncation: usize,
    /// Set when the leakage target could not be met within the dimension cap.
    pub capped: bool,
}

/// Starts every bosonic truncation at `d_start` and doubles it until the
/// leakage over all `times` is below [`LEAKAGE_TOL`] or the next doubling
/// would exceed the dimension cap.
pub fn evolve_adaptive(
    spec: &FockSpaceSpec,
    rho_a0: &GaussianState,
    temperature: f64,
    times: &[f64],
    d_start: usize,
    options: OracleOptions,
) -> Result<AdaptiveRun> {
    let mut d = d_start;
    let mut current = spec.with_truncation(d)?;
    loop {
        let results = FockOracle::new(&current).evolve_many(rho_a0, temperature, times, options)?;
        let flagged = results.iter().any(|r| r.leakage_flag);
        if !flagged {
            return Ok(AdaptiveRun {
                results,
                truncation: d,
                capped: false,
            });
        }
        match spec.with_truncation(2 * d) {
            Ok(next) => {
                d *= 2;
                current = next;
            }
            Err(Error::DimensionCap { .. }) => {
                return Ok(AdaptiveRun {
                    results,
                    truncation: d,
                    capped: true,
                })
            }
            Err(e) => return Err(e),
        }
    }
}
