//! Seeded, partition-independent sampling.
//!
//! Samples are generated in fixed-size chunks; chunk `k` draws from the
//! ChaCha stream `k` of the user seed. Chunks may run on any number of
//! workers, but their results are concatenated in chunk order and every
//! reduction is done sequentially afterwards, so the output is bitwise
//! independent of the thread pool.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Number of consecutive samples drawn from one substream.
pub const CHUNK: usize = 1024;

pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `n` samples; `draw` receives the chunk generator and the global sample index.
pub fn sample_chunked<T, F>(seed: u64, n: usize, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = substream(seed, k as u64);
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(n);
            (lo..hi).map(|i| draw(&mut rng, i)).collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Sample moments of a bivariate real sample with standard errors.
///
/// The covariance is the population (1/n) covariance, which is exactly the
/// covariance of the equal-weight mixture the samples represent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateStats {
    pub n: usize,
    pub mean: [f64; 2],
    /// `[var x, cov xy, var y]`.
    pub cov: [f64; 3],
    pub mean_se: [f64; 2],
    pub cov_se: [f64; 3],
}

impl BivariateStats {
    pub fn from_samples(samples: &[(f64, f64)]) -> Self {
        let n = samples.len();
        assert!(n > 0, "empty sample");
        let nf = n as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        for &(x, y) in samples {
            sx += x;
            sy += y;
        }
        let (mx, my) = (sx / nf, sy / nf);
        let mut m2 = [0.0; 3];
        let mut m4 = [0.0; 3];
        for &(x, y) in samples {
            let (dx, dy) = (x - mx, y - my);
            let p = [dx * dx, dx * dy, dy * dy];
            for k in 0..3 {
                m2[k] += p[k];
                m4[k] += p[k] * p[k];
            }
        }
        let cov = m2.map(|v| v / nf);
        let mut cov_se = [0.0; 3];
        for k in 0..3 {
            cov_se[k] = ((m4[k] / nf - cov[k] * cov[k]).max(0.0) / nf).sqrt();
        }
        Self {
            n,
            mean: [mx, my],
            cov,
            mean_se: [(cov[0] / nf).sqrt(), (cov[2] / nf).sqrt()],
            cov_se,
        }
    }

    /// Largest deviation from the expected moments in units of standard errors.
    /// Entries with zero standard error are compared exactly.
    pub fn max_z_score(&self, mean: [f64; 2], cov: [f64; 3]) -> f64 {
        let z = |est: f64, se: f64, want: f64| {
            let d = (est - want).abs();
            if se > 0.0 {
                d / se
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        let mut worst: f64 = 0.0;
        for k in 0..2 {
            worst = worst.max(z(self.mean[k], self.mean_se[k], mean[k]));
        }
        for k in 0..3 {
            worst = worst.max(z(self.cov[k], self.cov_se[k], cov[k]));
        }
        worst
    }
}
