//! Reference implementations used as test oracles.
//!
//! Everything here is written from the defining formulas with plain loops and
//! shares no code path with the library beyond reading input data.
#![allow(dead_code)]

use ntpm_core::{ComplexMatrix, HermitianOperator, Process, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn boltzmann(e: &[f64], beta: f64) -> Vec<f64> {
    let floor = e.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = e.iter().map(|x| (-beta * (x - floor)).exp()).collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

pub fn partition(e: &[f64], beta: f64) -> f64 {
    e.iter().map(|x| (-beta * x).exp()).sum()
}

pub fn free_energy_change(h0: &[f64], hf: &[f64], beta: f64) -> f64 {
    -(partition(hf, beta) / partition(h0, beta)).ln() / beta
}

fn ket(h: &HermitianOperator, k: usize) -> Vec<C64> {
    let w = h.eigenbasis();
    (0..h.dim()).map(|i| w[(i, k)]).collect()
}

/// `|<E_m^f| U |E_n^0>|^2`, indexed `[n][m]`.
pub fn transitions(p: &Process) -> Vec<Vec<f64>> {
    let d = p.dim();
    (0..d)
        .map(|n| {
            let a = ket(&p.h0, n);
            let ua: Vec<C64> = (0..d).map(|i| (0..d).map(|j| p.u[(i, j)] * a[j]).sum()).collect();
            (0..d)
                .map(|m| {
                    let b = ket(&p.hf, m);
                    let amp: C64 = (0..d).map(|i| b[i].conj() * ua[i]).sum();
                    amp.norm_sqr()
                })
                .collect()
        })
        .collect()
}

/// Group weights of a thermal pointer split into `d_s` equal groups by rank.
pub fn group_sums(pointer_energies: &[f64], beta_p: f64, d_s: usize) -> Vec<f64> {
    let mut w = boltzmann(pointer_energies, beta_p);
    w.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let lambda = w.len() / d_s;
    w.chunks(lambda).map(|c| c.iter().sum()).collect()
}

pub fn minimal_energy_rule(l: usize, n: usize) -> usize {
    if l == n {
        0
    } else if l < n {
        l + 1
    } else {
        l
    }
}

pub fn latin_rule(d: usize) -> impl Fn(usize, usize) -> usize {
    move |l, n| (l + d - n) % d
}

pub fn q_matrix(groups: &[f64], rule: impl Fn(usize, usize) -> usize) -> Vec<Vec<f64>> {
    let d = groups.len();
    (0..d).map(|l| (0..d).map(|n| groups[rule(l, n)]).collect()).collect()
}

pub fn ideal_work(p: &Process, beta: f64) -> f64 {
    let (e0, ef) = (p.h0.eigenvalues(), p.hf.eigenvalues());
    let p0 = boltzmann(e0, beta);
    let t = transitions(p);
    let mut w = 0.0;
    for n in 0..e0.len() {
        for m in 0..ef.len() {
            w += p0[n] * t[n][m] * (ef[m] - e0[n]);
        }
    }
    w
}

/// `P(n, m) = p_n sum_l q[l][n] T[l][m]`.
pub fn nonideal_table(p: &Process, beta: f64, q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = p.dim();
    let p0 = boltzmann(p.h0.eigenvalues(), beta);
    let t = transitions(p);
    (0..d)
        .map(|n| {
            (0..d)
                .map(|m| p0[n] * (0..d).map(|l| q[l][n] * t[l][m]).sum::<f64>())
                .collect()
        })
        .collect()
}

pub fn nonideal_work(p: &Process, beta: f64, q: &[Vec<f64>]) -> f64 {
    let (e0, ef) = (p.h0.eigenvalues(), p.hf.eigenvalues());
    let table = nonideal_table(p, beta, q);
    let mut w = 0.0;
    for (n, row) in table.iter().enumerate() {
        for (m, x) in row.iter().enumerate() {
            w += x * (ef[m] - e0[n]);
        }
    }
    w
}

pub fn nonideal_exp_work(p: &Process, beta: f64, q: &[Vec<f64>]) -> f64 {
    let (e0, ef) = (p.h0.eigenvalues(), p.hf.eigenvalues());
    let table = nonideal_table(p, beta, q);
    let mut acc = 0.0;
    for (n, row) in table.iter().enumerate() {
        for (m, x) in row.iter().enumerate() {
            acc += x * (-beta * (ef[m] - e0[n])).exp();
        }
    }
    acc
}

pub fn chi(p: &Process, beta: f64, q: &[Vec<f64>]) -> f64 {
    let d = p.dim();
    let pf = boltzmann(p.hf.eigenvalues(), beta);
    let t = transitions(p);
    (0..d)
        .map(|m| {
            pf[m]
                * (0..d)
                    .map(|l| (0..d).map(|n| q[l][n]).sum::<f64>() * t[l][m])
                    .sum::<f64>()
        })
        .sum()
}

/// State with populations `pops` in the eigenbasis of `h`.
pub fn diagonal_state(h: &HermitianOperator, pops: &[f64]) -> ComplexMatrix {
    let d = h.dim();
    let w = h.eigenbasis();
    ComplexMatrix::from_fn(d, d, |i, j| {
        (0..d).map(|k| w[(i, k)] * pops[k] * w[(j, k)].conj()).sum()
    })
}

pub fn binary_entropy(c: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(c) + h(1.0 - c)
}

pub fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|x| -x * x.ln()).sum()
}

/// Energies of an `n`-qubit register, bit `k` set adding `+e_p/2`.
pub fn qubit_register(n: usize, e_p: f64) -> Vec<f64> {
    (0..1usize << n)
        .map(|s| {
            (0..n)
                .map(|k| if s >> k & 1 == 1 { 0.5 * e_p } else { -0.5 * e_p })
                .sum()
        })
        .collect()
}

/// Energy a measurement injects into system plus pointer when the system
/// populations in the measured basis are `p`.
///
/// The coupling sends system level `n` with pointer level of weight rank
/// `rule(m, n) * lambda + i` to system level `m` with the `i`-th lowest
/// pointer level of outcome `n`. Coherences never touch the energy.
pub fn measurement_cost(
    p: &[f64],
    e_sys: &[f64],
    e_ptr: &[f64],
    beta_p: f64,
    rule: impl Fn(usize, usize) -> usize,
) -> f64 {
    let d = p.len();
    let lambda = e_ptr.len() / d;
    let w = boltzmann(e_ptr, beta_p);
    let mut by_weight: Vec<usize> = (0..e_ptr.len()).collect();
    by_weight.sort_by(|&a, &b| {
        w[b].partial_cmp(&w[a])
            .unwrap()
            .then(e_ptr[a].partial_cmp(&e_ptr[b]).unwrap())
    });
    let mut by_energy: Vec<usize> = (0..e_ptr.len()).collect();
    by_energy.sort_by(|&a, &b| e_ptr[a].partial_cmp(&e_ptr[b]).unwrap());

    let before: f64 =
        (0..d).map(|n| p[n] * e_sys[n]).sum::<f64>() + (0..e_ptr.len()).map(|k| w[k] * e_ptr[k]).sum::<f64>();
    let mut after = 0.0;
    for n in 0..d {
        for m in 0..d {
            for i in 0..lambda {
                let weight = w[by_weight[rule(m, n) * lambda + i]];
                let level = by_energy[n * lambda + i];
                after += p[n] * weight * (e_sys[m] + e_ptr[level]);
            }
        }
    }
    after - before
}

/// Discrete Fourier transform `omega^{jk} / sqrt(d)`.
pub fn fourier(d: usize) -> ComplexMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    ComplexMatrix::from_fn(d, d, |j, k| {
        C64::from_polar(norm, 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64)
    })
}

/// Three-qubit pointer with `E_P = 0.1`, the driven-atom setting.
pub fn atom_channel(beta_p: f64) -> ntpm_core::MeasurementChannel {
    let ptr = ntpm_core::PointerModel::qubits(3, 0.1, beta_p, 2).unwrap();
    ntpm_core::measurement::build_channel(ptr, ntpm_core::measurement::assignment_minimal_energy(2).unwrap()).unwrap()
}

/// Sum of all entries of a joint table.
pub fn table_total(p: &[Vec<f64>]) -> f64 {
    p.iter().flatten().sum()
}
