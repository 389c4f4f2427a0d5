//! Stochastic oracle: simulates individual measurement records.
//!
//! Each trajectory draws the first outcome `n` from the thermal populations,
//! the post-measurement level `l` from `q0[.][n]`, the second-measurement
//! level `m` from `|<E_m|U|E_l>|^2` and finally the level `k` the system is
//! left in from `qf[.][m]`. Only the inverse-CDF draws touch the generator, so
//! a fixed seed reproduces the estimates bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::measurement::MeasurementChannel;
use crate::tpm::{initial_populations, transition_matrix, Process};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Distance from `reference` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = (self.mean - reference).abs();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff <= 1e-12 * reference.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub samples: usize,
    pub mean_w: Estimate,
    /// Estimate of `<e^{-beta W}>`.
    pub jarzynski: Estimate,
    /// Estimate of the average energy change including the second back-action.
    pub energy_change: Estimate,
}

#[derive(Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn estimate(&self) -> Estimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        Estimate {
            mean: self.mean,
            stderr: (var / self.n).sqrt(),
        }
    }
}

fn cumulative(p: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    p.map(|x| {
        acc += x.max(0.0);
        acc
    })
    .collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    let target = u * cdf[cdf.len() - 1];
    cdf.iter().position(|&c| target < c).unwrap_or_else(|| {
        // Rounding at the top end: fall back to the last level with mass.
        let mut k = cdf.len() - 1;
        while k > 0 && cdf[k] == cdf[k - 1] {
            k -= 1;
        }
        k
    })
}

pub fn monte_carlo_tpm(
    process: &Process,
    beta: f64,
    channel0: &MeasurementChannel,
    channelf: &MeasurementChannel,
    samples: usize,
    seed: u64,
) -> Result<McResult> {
    if samples < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "{samples} samples; need at least 10000"
        )));
    }
    channel0.check_basis(&process.h0)?;
    channelf.check_basis(&process.hf)?;
    let d = process.dim();
    let p0 = initial_populations(process, beta)?;
    let t = transition_matrix(process);
    let cdf_p0 = cumulative(p0.iter().copied());
    let cdf_q0: Vec<Vec<f64>> = (0..d).map(|n| cumulative(channel0.q.iter().map(|r| r[n]))).collect();
    let cdf_t: Vec<Vec<f64>> = t.iter().map(|row| cumulative(row.iter().copied())).collect();
    let cdf_qf: Vec<Vec<f64>> = (0..d).map(|m| cumulative(channelf.q.iter().map(|r| r[m]))).collect();
    let (e0, ef) = (process.h0.eigenvalues(), process.hf.eigenvalues());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut w_acc, mut j_acc, mut e_acc) = (Welford::default(), Welford::default(), Welford::default());
    for _ in 0..samples {
        let n = draw(&cdf_p0, rng.gen::<f64>());
        let l = draw(&cdf_q0[n], rng.gen::<f64>());
        let m = draw(&cdf_t[l], rng.gen::<f64>());
        let k = draw(&cdf_qf[m], rng.gen::<f64>());
        let w = ef[m] - e0[n];
        w_acc.push(w);
        j_acc.push((-beta * w).exp());
        e_acc.push(ef[k] - e0[n]);
    }
    Ok(McResult {
        samples,
        mean_w: w_acc.estimate(),
        jarzynski: j_acc.estimate(),
        energy_change: e_acc.estimate(),
    })
}

/// Per-grid-point seed.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}
