//! Forward and backward two-point energy measurement protocols.
//!
//! Tables are indexed `[n][m]` with `n` labelling the level of `h0` and `m`
//! the level of `hf`, in the order the operators store their eigenvalues.

use crate::error::{Error, Result};
use crate::linalg::{propagator, ComplexMatrix};
use crate::measurement::MeasurementChannel;
use crate::scenarios::rabi::rabi_unitary;
use crate::thermo::{gibbs, HermitianOperator};

const UNITARY_TOL: f64 = 1e-12;
const FAMILY_TOL: f64 = 1e-10;
const REVERSAL_TOL: f64 = 1e-10;
const ATOM_FLOOR: f64 = 1e-15;

/// Time-dependent propagator `U(t, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub enum TimeFamily {
    /// `U(omega t)` with the Rabi rotation about the y axis.
    Rabi { omega: f64 },
    /// Piecewise-constant Hamiltonians applied in order for the given durations.
    Piecewise { segments: Vec<(HermitianOperator, f64)> },
    /// Time-reversed partner of a forward family with total duration `t_f`:
    /// `conj(U(t_f - s) U(t_f)†)`.
    Reversed { forward: Box<TimeFamily>, t_f: f64 },
}

impl TimeFamily {
    pub fn unitary_at(&self, t: f64) -> ComplexMatrix {
        match self {
            TimeFamily::Rabi { omega } => rabi_unitary(omega * t),
            TimeFamily::Piecewise { segments } => {
                let d = segments.first().map(|(h, _)| h.dim()).unwrap_or(0);
                let mut u = ComplexMatrix::identity(d);
                let mut left = t;
                for (h, dur) in segments {
                    if left <= 0.0 {
                        break;
                    }
                    let step = left.min(*dur);
                    u = &propagator(h, step) * &u;
                    left -= step;
                }
                u
            }
            TimeFamily::Reversed { forward, t_f } => {
                let a = forward.unitary_at(t_f - t);
                let b = forward.unitary_at(*t_f);
                (&a * &b.adjoint()).conj()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Process {
    pub h0: HermitianOperator,
    pub hf: HermitianOperator,
    pub u: ComplexMatrix,
    pub family: Option<TimeFamily>,
    pub t_f: f64,
}

impl Process {
    pub fn new(h0: HermitianOperator, hf: HermitianOperator, u: ComplexMatrix) -> Result<Self> {
        let d = h0.dim();
        if hf.dim() != d || u.rows() != d || u.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: format!("dimension {d}"),
                got: format!("hf {}, U {}x{}", hf.dim(), u.rows(), u.cols()),
            });
        }
        let err = u.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Process {
            h0,
            hf,
            u,
            family: None,
            t_f: 0.0,
        })
    }

    /// Attaches a time family; it must start at the identity and end at `u`.
    pub fn with_family(mut self, family: TimeFamily, t_f: f64) -> Result<Self> {
        if !(t_f >= 0.0) || !t_f.is_finite() {
            return Err(Error::InvalidParameter(format!("t_f = {t_f}")));
        }
        let d = self.dim();
        let start = family.unitary_at(0.0);
        if start.rows() != d || start.max_abs_diff(&ComplexMatrix::identity(d)) > UNITARY_TOL {
            return Err(Error::InvalidParameter("family(0) is not the identity".into()));
        }
        let end = family.unitary_at(t_f);
        let err = end.max_abs_diff(&self.u);
        if err > FAMILY_TOL {
            return Err(Error::InvalidParameter(format!(
                "family(t_f) differs from U by {err:e}"
            )));
        }
        self.family = Some(family);
        self.t_f = t_f;
        Ok(self)
    }

    /// Process generated by a piecewise-constant Hamiltonian schedule.
    pub fn from_schedule(
        h0: HermitianOperator,
        hf: HermitianOperator,
        segments: Vec<(HermitianOperator, f64)>,
    ) -> Result<Self> {
        if segments.is_empty() || segments.iter().any(|(h, dt)| h.dim() != h0.dim() || !(*dt >= 0.0)) {
            return Err(Error::InvalidParameter("bad Hamiltonian schedule".into()));
        }
        let t_f: f64 = segments.iter().map(|(_, dt)| dt).sum();
        let family = TimeFamily::Piecewise { segments };
        let u = family.unitary_at(t_f);
        Process::new(h0, hf, u)?.with_family(family, t_f)
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn unitary_at(&self, t: f64) -> Result<ComplexMatrix> {
        let fam = self.family.as_ref().ok_or(Error::MissingTimeFamily)?;
        if t < -1e-12 || t > self.t_f + 1e-12 {
            return Err(Error::InvalidTime { t, t_f: self.t_f });
        }
        Ok(fam.unitary_at(t.clamp(0.0, self.t_f)))
    }
}

/// `T[n][m] = |<E_m^f| U |E_n^0>|^2`.
pub fn transition_matrix(process: &Process) -> Vec<Vec<f64>> {
    let m = &(&process.hf.eigenbasis().adjoint() * &process.u) * process.h0.eigenbasis();
    let d = process.dim();
    (0..d).map(|n| (0..d).map(|k| m[(k, n)].norm_sqr()).collect()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JointKind {
    Ideal,
    Nonideal,
    Backward,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    pub p: Vec<Vec<f64>>,
    pub kind: JointKind,
}

impl JointDistribution {
    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(())
}

pub(crate) fn initial_populations(process: &Process, beta: f64) -> Result<Vec<f64>> {
    check_beta(beta)?;
    Ok(gibbs(&process.h0, beta)?.populations)
}

/// `P(m|n) = sum_l q[l][n] T[l][m]`, indexed `[n][m]`.
pub(crate) fn conditional_transitions(t: &[Vec<f64>], ch: &MeasurementChannel) -> Vec<Vec<f64>> {
    let d = t.len();
    (0..d)
        .map(|n| (0..d).map(|m| (0..d).map(|l| ch.q[l][n] * t[l][m]).sum()).collect())
        .collect()
}

pub fn ideal_joint(process: &Process, beta: f64) -> Result<JointDistribution> {
    let p0 = initial_populations(process, beta)?;
    let t = transition_matrix(process);
    let p = (0..p0.len())
        .map(|n| t[n].iter().map(|x| p0[n] * x).collect())
        .collect();
    Ok(JointDistribution {
        p,
        kind: JointKind::Ideal,
    })
}

pub fn nonideal_joint(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<JointDistribution> {
    channel0.check_basis(&process.h0)?;
    let p0 = initial_populations(process, beta)?;
    let cond = conditional_transitions(&transition_matrix(process), channel0);
    let p = (0..p0.len())
        .map(|n| cond[n].iter().map(|x| p0[n] * x).collect())
        .collect();
    Ok(JointDistribution {
        p,
        kind: JointKind::Nonideal,
    })
}

/// Time-reversed process with `Theta` the complex conjugation.
pub fn backward_process(process: &Process) -> Result<Process> {
    for h in [&process.h0, &process.hf] {
        let m = h.matrix();
        let err = m.max_abs_diff(&m.conj());
        if err > REVERSAL_TOL {
            return Err(Error::NotTimeReversalSymmetric(err));
        }
    }
    Ok(Process {
        h0: process.hf.clone(),
        hf: process.h0.clone(),
        u: process.u.transpose(),
        family: process.family.clone().map(|f| TimeFamily::Reversed {
            forward: Box::new(f),
            t_f: process.t_f,
        }),
        t_f: process.t_f,
    })
}

/// Backward table `P_B[n][m] = sum_k T_B[k][n] qf[k][m] pf_m`, with `n` on
/// `h0` and `m` on `hf` like the forward tables.
pub fn backward_joint(process: &Process, beta: f64, channelf: &MeasurementChannel) -> Result<JointDistribution> {
    channelf.check_basis(&process.hf)?;
    check_beta(beta)?;
    let back = backward_process(process)?;
    let tb = transition_matrix(&back);
    let pf = gibbs(&process.hf, beta)?.populations;
    let d = process.dim();
    let p = (0..d)
        .map(|n| {
            (0..d)
                .map(|m| (0..d).map(|k| tb[k][n] * channelf.q[k][m]).sum::<f64>() * pf[m])
                .collect()
        })
        .collect();
    Ok(JointDistribution {
        p,
        kind: JointKind::Backward,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkDistribution {
    /// `(work, probability)` with strictly increasing work values.
    pub atoms: Vec<(f64, f64)>,
}

/// Groups outcome pairs by work value `E_m^f - E_n^0` (its negative for a
/// backward table). Values closer than `1e-9 max|E|` share an atom placed at
/// their probability-weighted mean. Atoms carrying less than `1e-15` are
/// dropped as numerically unsupported.
pub fn work_distribution(
    joint: &JointDistribution,
    h0: &HermitianOperator,
    hf: &HermitianOperator,
) -> WorkDistribution {
    let e0 = h0.eigenvalues();
    let ef = hf.eigenvalues();
    let scale = e0.iter().chain(ef).map(|e| e.abs()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;
    let sign = if joint.kind == JointKind::Backward { -1.0 } else { 1.0 };
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(e0.len() * ef.len());
    for (n, row) in joint.p.iter().enumerate() {
        for (m, &prob) in row.iter().enumerate() {
            pairs.push((sign * (ef[m] - e0[n]), prob));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut group: Vec<(f64, f64)> = Vec::new();
    let flush = |group: &mut Vec<(f64, f64)>, atoms: &mut Vec<(f64, f64)>| {
        if group.is_empty() {
            return;
        }
        let prob: f64 = group.iter().map(|g| g.1).sum();
        let w = if prob > 0.0 {
            group.iter().map(|g| g.0 * g.1).sum::<f64>() / prob
        } else {
            group.iter().map(|g| g.0).sum::<f64>() / group.len() as f64
        };
        atoms.push((w, prob));
        group.clear();
    };
    for pair in pairs {
        if let Some(first) = group.first() {
            if pair.0 - first.0 > tol {
                flush(&mut group, &mut atoms);
            }
        }
        group.push(pair);
    }
    flush(&mut group, &mut atoms);
    atoms.retain(|a| a.1 >= ATOM_FLOOR);
    WorkDistribution { atoms }
}

pub fn mean_work(dist: &WorkDistribution) -> f64 {
    dist.atoms.iter().map(|(w, p)| w * p).sum()
}

/// Mean work read directly off a forward table.
pub(crate) fn table_mean(p: &[Vec<f64>], e0: &[f64], ef: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (n, row) in p.iter().enumerate() {
        for (m, x) in row.iter().enumerate() {
            acc += x * (ef[m] - e0[n]);
        }
    }
    acc
}

/// Splits the non-ideal mean work into `C_max <W>_ideal` and the part fed by
/// misassigned outcomes.
pub fn work_decomposition(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<(f64, f64)> {
    channel0.check_basis(&process.h0)?;
    let p0 = initial_populations(process, beta)?;
    let t = transition_matrix(process);
    let (e0, ef) = (process.h0.eigenvalues(), process.hf.eigenvalues());
    let d = process.dim();
    let mut w_ideal = 0.0;
    let mut correction = 0.0;
    for n in 0..d {
        for m in 0..d {
            let de = ef[m] - e0[n];
            w_ideal += p0[n] * t[n][m] * de;
            for l in (0..d).filter(|&l| l != n) {
                correction += t[l][m] * channel0.q[l][n] * p0[n] * de;
            }
        }
    }
    Ok((channel0.c_max * w_ideal, correction))
}

/// `(1 - C_max) ||H_f||` with the operator norm.
pub fn deviation_bound(process: &Process, channel0: &MeasurementChannel) -> f64 {
    (1.0 - channel0.c_max) * process.hf.spectral_norm()
}

/// `(1 - C_max)(E_max^f - E_min^f)`, a bound that holds for every process.
///
/// The unconditional post-measurement state differs from the thermal one by
/// at most `2(1 - C_max)` in trace norm, and a traceless difference only sees
/// half the spread of `H_f`.
pub fn deviation_bound_rigorous(process: &Process, channel0: &MeasurementChannel) -> f64 {
    let e = process.hf.eigenvalues();
    let spread = e.iter().copied().fold(f64::NEG_INFINITY, f64::max) - e.iter().copied().fold(f64::INFINITY, f64::min);
    (1.0 - channel0.c_max) * spread
}

/// Average energy change when both measurements are non-ideal.
pub fn energy_change_nonideal(
    process: &Process,
    beta: f64,
    channel0: &MeasurementChannel,
    channelf: &MeasurementChannel,
) -> Result<f64> {
    let parts = energy_change_parts(process, beta, channel0, channelf)?;
    Ok(parts.triple_sum)
}

/// Terms of the energy change grouped by how many measurements hit the
/// "correct" block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyChangeParts {
    pub triple_sum: f64,
    /// `c0 cf <W>_ideal`.
    pub leading: f64,
    /// Exactly one measurement off-diagonal.
    pub cross: f64,
    /// Both measurements off-diagonal.
    pub remainder: f64,
}

pub fn energy_change_parts(
    process: &Process,
    beta: f64,
    channel0: &MeasurementChannel,
    channelf: &MeasurementChannel,
) -> Result<EnergyChangeParts> {
    channel0.check_basis(&process.h0)?;
    channelf.check_basis(&process.hf)?;
    let p0 = initial_populations(process, beta)?;
    let t = transition_matrix(process);
    let cond = conditional_transitions(&t, channel0);
    let (e0, ef) = (process.h0.eigenvalues(), process.hf.eigenvalues());
    let d = process.dim();
    let (c0, cf) = (channel0.c_max, channelf.c_max);

    let mut triple_sum = 0.0;
    for n in 0..d {
        for m in 0..d {
            for k in 0..d {
                triple_sum += channelf.q[k][m] * cond[n][m] * p0[n] * (ef[k] - e0[n]);
            }
        }
    }

    let mut w_ideal = 0.0;
    let mut cross = 0.0;
    let mut remainder = 0.0;
    for n in 0..d {
        for m in 0..d {
            w_ideal += p0[n] * t[n][m] * (ef[m] - e0[n]);
            let off_first: f64 = (0..d).filter(|&l| l != n).map(|l| channel0.q[l][n] * t[l][m]).sum();
            let off_second: f64 = (0..d)
                .filter(|&k| k != m)
                .map(|k| channelf.q[k][m] * (ef[k] - e0[n]))
                .sum();
            cross += p0[n] * (c0 * t[n][m] * off_second + cf * off_first * (ef[m] - e0[n]));
            remainder += p0[n] * off_first * off_second;
        }
    }
    Ok(EnergyChangeParts {
        triple_sum,
        leading: c0 * cf * w_ideal,
        cross,
        remainder,
    })
}
