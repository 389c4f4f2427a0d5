//! Fluctuation relations and entropy production under non-ideal measurements.

use crate::error::{Error, Result};
use crate::linalg::{relative_entropy, trace_log, vn_entropy, ComplexMatrix, C64};
use crate::measurement::MeasurementChannel;
use crate::thermo::{free_energy_difference, gibbs};
use crate::tpm::{
    backward_joint, backward_process, conditional_transitions, initial_populations, nonideal_joint, table_mean,
    transition_matrix, Process,
};

const SKIP_TOL: f64 = 1e-15;

/// `G(u) = Tr[e^{iuH_f} U sigma(u) U†]` with
/// `sigma(u) = sum_n e^{-iuE_n} p_n rho_n`.
pub fn characteristic_function(process: &Process, beta: f64, channel0: &MeasurementChannel, u: C64) -> Result<C64> {
    channel0.check_basis(&process.h0)?;
    let p0 = initial_populations(process, beta)?;
    let e0 = process.h0.eigenvalues();
    let d = process.dim();
    let i = C64::new(0.0, 1.0);
    let weights: Vec<C64> = (0..d)
        .map(|l| (0..d).map(|n| (-i * u * e0[n]).exp() * p0[n] * channel0.q[l][n]).sum())
        .collect();
    let w0 = process.h0.eigenbasis();
    let sigma = ComplexMatrix::from_fn(d, d, |a, b| {
        (0..d).map(|l| w0[(a, l)] * weights[l] * w0[(b, l)].conj()).sum()
    });
    let phase = process.hf.function(|e| (i * u * e).exp());
    let evolved = process.u.conjugate_by(&sigma);
    Ok(phase.trace_product(&evolved))
}

/// `<e^{-beta W}>` of the non-ideal protocol, i.e. `G(i beta)`.
pub fn jarzynski_functional(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<f64> {
    let g = characteristic_function(process, beta, channel0, C64::new(0.0, beta))?;
    if g.im.abs() > 1e-10 {
        return Err(Error::NonRealResult(g.im));
    }
    Ok(g.re)
}

/// Correction factor in `<e^{-beta W}> = chi e^{-beta Delta F}`.
pub fn chi(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<f64> {
    channel0.check_basis(&process.h0)?;
    let pf = gibbs(&process.hf, beta)?.populations;
    let t = transition_matrix(process);
    let d = process.dim();
    let mut acc = 0.0;
    for m in 0..d {
        let mut s = 0.0;
        for n in 0..d {
            for l in 0..d {
                s += channel0.q[l][n] * t[l][m];
            }
        }
        acc += pf[m] * s;
    }
    Ok(acc)
}

/// Lower bound `Delta F - log(chi)/beta` on the non-ideal mean work, and
/// whether the mean work respects it.
pub fn second_law_bound(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<(f64, bool)> {
    let c = chi(process, beta, channel0)?;
    if c < 1e-300 {
        return Err(Error::ChiZero(c));
    }
    let df = free_energy_difference(&process.h0, &process.hf, beta)?;
    let bound = df - c.ln() / beta;
    let w = nonideal_mean_work(process, beta, channel0)?;
    Ok((bound, w >= bound - 1e-10))
}

fn nonideal_mean_work(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<f64> {
    let j = nonideal_joint(process, beta, channel0)?;
    Ok(table_mean(&j.p, process.h0.eigenvalues(), process.hf.eigenvalues()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrooksPair {
    pub n: usize,
    pub m: usize,
    pub work: f64,
    pub p_f: f64,
    pub p_b: f64,
    /// `-log(P_B / P_F)`.
    pub sigma: f64,
    /// `log(P_F(m|n) / P_B(n|m))`.
    pub gamma: f64,
    /// `P_B e^{beta (W - Delta F)} / P_F`, equal to 1 for ideal measurements.
    pub crooks_ratio: f64,
    /// `|P_B - e^{-beta (W - Delta F)} e^{-gamma} P_F|`.
    pub modified_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrooksReport {
    pub pairs: Vec<CrooksPair>,
    pub delta_f: f64,
    /// Classical relative entropy `D(P_F || P_B)`.
    pub mean_sigma: f64,
    pub max_relative_violation: f64,
    pub max_modified_residual: f64,
}

pub fn crooks_report(
    process: &Process,
    beta: f64,
    channel0: &MeasurementChannel,
    channelf: &MeasurementChannel,
) -> Result<CrooksReport> {
    let pf_table = nonideal_joint(process, beta, channel0)?;
    let pb_table = backward_joint(process, beta, channelf)?;
    let delta_f = free_energy_difference(&process.h0, &process.hf, beta)?;
    let cond_f = conditional_transitions(&transition_matrix(process), channel0);
    let tb = transition_matrix(&backward_process(process)?);
    let (e0, ef) = (process.h0.eigenvalues(), process.hf.eigenvalues());
    let d = process.dim();

    let mut pairs = Vec::new();
    let mut mean_sigma = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut max_res: f64 = 0.0;
    for n in 0..d {
        for m in 0..d {
            let (p_f, p_b) = (pf_table.p[n][m], pb_table.p[n][m]);
            if p_f < SKIP_TOL && p_b < SKIP_TOL {
                continue;
            }
            if p_b <= 0.0 && p_f > 0.0 {
                return Err(Error::SupportViolation(format!(
                    "backward probability vanishes for (n, m) = ({n}, {m})"
                )));
            }
            if p_f > 0.0 {
                mean_sigma += p_f * (p_f / p_b).ln();
            }
            let work = ef[m] - e0[n];
            let back_cond: f64 = (0..d).map(|k| tb[k][n] * channelf.q[k][m]).sum();
            let gamma = (cond_f[n][m] / back_cond).ln();
            let boltz = (-beta * (work - delta_f)).exp();
            let crooks_ratio = p_b / (boltz * p_f);
            let modified_residual = (p_b - boltz * (-gamma).exp() * p_f).abs();
            if crooks_ratio.is_finite() {
                max_rel = max_rel.max((crooks_ratio - 1.0).abs());
            }
            max_res = max_res.max(modified_residual);
            pairs.push(CrooksPair {
                n,
                m,
                work,
                p_f,
                p_b,
                sigma: -(p_b / p_f).ln(),
                gamma,
                crooks_ratio,
                modified_residual,
            });
        }
    }
    Ok(CrooksReport {
        pairs,
        delta_f,
        mean_sigma,
        max_relative_violation: max_rel,
        max_modified_residual: max_res,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipationReport {
    /// `beta (<W>_non-id - Delta F)`.
    pub lhs: f64,
    /// Entropy change caused by the first measurement.
    pub delta_s0: f64,
    /// `D(rho_f || tau_f)` for the evolved post-measurement state.
    pub rel_ent_final: f64,
    /// `Tr[rho_f (log rho_B - log tau_f)]`, only for the forward/backward relation.
    pub delta_df: Option<f64>,
    /// Forward/backward relative entropy at the sampled time.
    pub rel_ent_fb: Option<f64>,
    pub residual: f64,
}

struct PostFirst {
    rho0: ComplexMatrix,
    rho_f: ComplexMatrix,
    tau_f: ComplexMatrix,
    delta_s0: f64,
}

fn post_first(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<PostFirst> {
    channel0.check_basis(&process.h0)?;
    let p0 = initial_populations(process, beta)?;
    let d = process.dim();
    let r: Vec<f64> = (0..d).map(|l| (0..d).map(|n| channel0.q[l][n] * p0[n]).sum()).collect();
    let rho0 = process.h0.diagonal_in_basis(&r);
    let tau0 = gibbs(&process.h0, beta)?.matrix;
    let delta_s0 = vn_entropy(&rho0)? - vn_entropy(&tau0)?;
    let rho_f = process.u.conjugate_by(&rho0);
    let tau_f = gibbs(&process.hf, beta)?.matrix;
    Ok(PostFirst {
        rho0,
        rho_f,
        tau_f,
        delta_s0,
    })
}

fn dissipation_lhs(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<f64> {
    let w = nonideal_mean_work(process, beta, channel0)?;
    let df = free_energy_difference(&process.h0, &process.hf, beta)?;
    Ok(beta * (w - df))
}

/// `beta(<W> - Delta F) = Delta S_0 + D(rho_f || tau_f)`.
pub fn dissipation_identity(process: &Process, beta: f64, channel0: &MeasurementChannel) -> Result<DissipationReport> {
    let post = post_first(process, beta, channel0)?;
    let lhs = dissipation_lhs(process, beta, channel0)?;
    let rel = relative_entropy(&post.rho_f, &post.tau_f)?;
    Ok(DissipationReport {
        lhs,
        delta_s0: post.delta_s0,
        rel_ent_final: rel,
        delta_df: None,
        rel_ent_fb: None,
        residual: (lhs - post.delta_s0 - rel).abs(),
    })
}

fn binary_entropy(c: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(c) + h(1.0 - c)
}

/// Continuity bound on the entropy the first measurement can create.
/// Returns `(Delta S_0, bound, Delta S_0 <= bound)`.
pub fn fannes_bound(channel0: &MeasurementChannel, process: &Process, beta: f64) -> Result<(f64, f64, bool)> {
    let d = channel0.d_s();
    if d < 2 {
        return Err(Error::InvalidParameter("need at least two outcomes".into()));
    }
    let post = post_first(process, beta, channel0)?;
    let c = channel0.c_max;
    let bound = (1.0 - c) * ((d - 1) as f64).ln() + binary_entropy(c);
    Ok((post.delta_s0, bound, post.delta_s0 <= bound + 1e-10))
}

/// Forward/backward form of the dissipation identity at intermediate time `t`.
pub fn kpv_extended(
    process: &Process,
    beta: f64,
    channel0: &MeasurementChannel,
    channelf: &MeasurementChannel,
    t: f64,
) -> Result<DissipationReport> {
    channelf.check_basis(&process.hf)?;
    let u_t = process.unitary_at(t)?;
    let post = post_first(process, beta, channel0)?;
    let lhs = dissipation_lhs(process, beta, channel0)?;

    let pf = gibbs(&process.hf, beta)?.populations;
    let d = process.dim();
    let b: Vec<f64> = (0..d).map(|k| (0..d).map(|m| pf[m] * channelf.q[k][m]).sum()).collect();
    let rho_b_final = process.hf.diagonal_in_basis(&b);

    let rho_fwd = u_t.conjugate_by(&post.rho0);
    // Backward protocol run for t_f - t, then mapped back through Theta.
    let back = backward_process(process)?;
    let u_back = back.unitary_at(process.t_f - t)?;
    let rho_bwd = u_back.conjugate_by(&rho_b_final).conj();

    let delta_df = trace_log(&post.rho_f, &rho_b_final)? - trace_log(&post.rho_f, &post.tau_f)?;
    let rel_fb = relative_entropy(&rho_fwd, &rho_bwd)?;
    let rel_final = relative_entropy(&post.rho_f, &post.tau_f)?;
    Ok(DissipationReport {
        lhs,
        delta_s0: post.delta_s0,
        rel_ent_final: rel_final,
        delta_df: Some(delta_df),
        rel_ent_fb: Some(rel_fb),
        residual: (lhs - (post.delta_s0 + delta_df + rel_fb)).abs(),
    })
}
