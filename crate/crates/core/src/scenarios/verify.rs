//! Self-check suite behind `ntpm verify`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fluct::{chi, crooks_report, dissipation_identity, fannes_bound, jarzynski_functional, kpv_extended};
use crate::linalg::{relative_entropy, trace_distance};
use crate::measurement::{
    apply_measurement, build_joint_post_state, build_measurement_unitary, conditional_state, correlation_value,
    measurement_energy_cost, measurement_energy_cost_blocks, MeasurementChannel,
};
use crate::random::{random_beta, random_channel, random_density, random_driven_process, random_process};
use crate::scenarios::config::GridPoint;
use crate::scenarios::figures::{fig2_config, fig_a3_config, reproduce_fig2, reproduce_fig_a3};
use crate::scenarios::montecarlo::monte_carlo_tpm;
use crate::scenarios::rabi::{rabi_process, rabi_work_closed_form};
use crate::thermo::{free_energy_difference, gibbs};
use crate::tpm::{deviation_bound_rigorous, ideal_joint, nonideal_joint, table_mean};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    match f() {
        Ok((passed, detail)) => CheckResult { name, passed, detail },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn any_channel(r: &mut ChaCha8Rng, d: usize) -> MeasurementChannel {
    let (lambda, latin) = (r.gen_range(1..4), r.gen_bool(0.5));
    random_channel(r, d, lambda, latin)
}

fn latin_channel(r: &mut ChaCha8Rng, d: usize) -> MeasurementChannel {
    let lambda = r.gen_range(1..4);
    random_channel(r, d, lambda, true)
}

fn rng(salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ salt)
}

/// Runs every check; `quick` shrinks the random sample sizes.
pub fn run_suite(quick: bool) -> Vec<CheckResult> {
    let n = |full: usize| if quick { full / 5 } else { full };
    let mut out = Vec::new();

    out.push(check("fig2_pipeline", || {
        let t = reproduce_fig2(&fig2_config(), 1)?;
        Ok((true, format!("{} rows", t.rows.len())))
    }));

    out.push(check("rabi_closed_form", || {
        let cfg = fig2_config();
        let mut worst: f64 = 0.0;
        for theta in cfg.thetas() {
            let p = rabi_process(1.0, theta, 1.0)?;
            let b = cfg.system.beta_s;
            let w = table_mean(&ideal_joint(&p, b)?.p, p.h0.eigenvalues(), p.hf.eigenvalues());
            worst = worst.max((w - rabi_work_closed_form(1.0, b, theta)).abs());
        }
        Ok((worst < 1e-12, format!("max error {worst:.3e}")))
    }));

    out.push(check("modified_jarzynski", || {
        let mut r = rng(4);
        let mut worst: f64 = 0.0;
        for k in 0..n(100) {
            let d = 2 + k % 3;
            let p = random_process(&mut r, d);
            let ch = any_channel(&mut r, d);
            let b = random_beta(&mut r);
            let lhs = jarzynski_functional(&p, b, &ch)?;
            let rhs = chi(&p, b, &ch)? * (-b * free_energy_difference(&p.h0, &p.hf, b)?).exp();
            worst = worst.max((lhs - rhs).abs());
        }
        Ok((worst < 1e-12, format!("max residual {worst:.3e}")))
    }));

    out.push(check("latin_square_jarzynski", || {
        let mut r = rng(5);
        let mut worst: f64 = 0.0;
        for k in 0..n(100) {
            let d = 2 + k % 3;
            let p = random_process(&mut r, d);
            let ch = latin_channel(&mut r, d);
            let b = random_beta(&mut r);
            let lhs = jarzynski_functional(&p, b, &ch)?;
            worst = worst.max((lhs - (-b * free_energy_difference(&p.h0, &p.hf, b)?).exp()).abs());
        }
        Ok((worst < 1e-12, format!("max residual {worst:.3e}")))
    }));

    out.push(check("deviation_bound", || {
        let mut r = rng(6);
        let mut violations = 0;
        for k in 0..n(200) {
            let d = 2 + k % 3;
            let p = random_process(&mut r, d);
            let ch = any_channel(&mut r, d);
            let b = random_beta(&mut r);
            let (e0, ef) = (p.h0.eigenvalues(), p.hf.eigenvalues());
            let dev =
                (table_mean(&nonideal_joint(&p, b, &ch)?.p, e0, ef) - table_mean(&ideal_joint(&p, b)?.p, e0, ef)).abs();
            if dev > deviation_bound_rigorous(&p, &ch) + 1e-12 {
                violations += 1;
            }
        }
        Ok((
            violations == 0,
            format!("{violations} violations of (1 - C_max)(E_max - E_min)"),
        ))
    }));

    out.push(check("channel_structure", || {
        let mut r = rng(7);
        let mut worst: f64 = 0.0;
        for k in 0..n(50) {
            let d = 2 + k % 3;
            let latin = r.gen_bool(0.5);
            let ch = {
                let lambda = r.gen_range(1..4);
                random_channel(&mut r, d, lambda, latin)
            };
            let h = crate::random::random_hamiltonian(&mut r, d, false);
            for col in 0..d {
                let s: f64 = ch.column(col).iter().sum();
                worst = worst.max((s - 1.0).abs()).max((ch.q[col][col] - ch.c_max).abs());
                let rho = conditional_state(&ch, col, &h)?;
                let td = trace_distance(&rho, &h.projector(col))?;
                worst = worst.max((td - (1.0 - ch.c_max)).abs());
                if latin {
                    let row: f64 = ch.q[col].iter().sum();
                    worst = worst.max((row - 1.0).abs());
                }
            }
        }
        Ok((worst < 1e-12, format!("max residual {worst:.3e}")))
    }));

    out.push(check("measurement_unitary", || {
        let mut r = rng(8);
        let mut worst: f64 = 0.0;
        for k in 0..n(50) {
            let d = 2 + k % 3;
            let ch = any_channel(&mut r, d);
            worst = worst.max(build_measurement_unitary(&ch.pointer, &ch.pi)?.unitarity_error());
            let h = crate::random::random_hamiltonian(&mut r, d, false);
            let rho = random_density(&mut r, d);
            let after = crate::measurement::JointPostState::from_matrix(
                apply_measurement(&rho, &h, &ch.pointer, &ch.pi)?,
                &ch.pointer,
            )?;
            let want = h.populations(&rho);
            for (a, b) in after.outcome_probabilities().iter().zip(&want) {
                worst = worst.max((a - b).abs());
            }
            let p = gibbs(&h, random_beta(&mut r))?.populations;
            let blocks = build_joint_post_state(&p, &ch.pointer, &ch.pi)?;
            let explicit = crate::measurement::JointPostState::from_matrix(
                apply_measurement(&h.diagonal_in_basis(&p), &h, &ch.pointer, &ch.pi)?,
                &ch.pointer,
            )?;
            worst = worst.max(blocks.matrix.max_abs_diff(&explicit.matrix));
            worst = worst.max((correlation_value(&blocks) - correlation_value(&explicit)).abs());
            let c1 = measurement_energy_cost(&h.diagonal_in_basis(&p), &h, &ch.pointer, &ch.pi)?;
            let c2 = measurement_energy_cost_blocks(&p, &h, &ch.pointer, &ch.pi)?;
            worst = worst.max((c1 - c2).abs());
        }
        Ok((worst < 1e-12, format!("max residual {worst:.3e}")))
    }));

    out.push(check("dissipation_identities", || {
        let mut r = rng(9);
        let mut worst: f64 = 0.0;
        for k in 0..n(50) {
            let d = 2 + k % 3;
            let p = random_driven_process(&mut r, d);
            let ch0 = any_channel(&mut r, d);
            let chf = any_channel(&mut r, d);
            let b = random_beta(&mut r);
            worst = worst.max(dissipation_identity(&p, b, &ch0)?.residual);
            for frac in [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0] {
                worst = worst.max(kpv_extended(&p, b, &ch0, &chf, frac * p.t_f)?.residual);
            }
            let ideal = MeasurementChannel::ideal(d)?;
            worst = worst.max(kpv_extended(&p, b, &ideal, &ideal, 0.5 * p.t_f)?.residual);
        }
        Ok((worst < 1e-10, format!("max residual {worst:.3e}")))
    }));

    out.push(check("crooks", || {
        let mut r = rng(10);
        let mut ideal_dev: f64 = 0.0;
        let mut sigma_err: f64 = 0.0;
        for k in 0..n(20) {
            let d = 2 + k % 3;
            let p = random_driven_process(&mut r, d);
            let b = random_beta(&mut r);
            let ideal = MeasurementChannel::ideal(d)?;
            let rep = crooks_report(&p, b, &ideal, &ideal)?;
            for pair in &rep.pairs {
                ideal_dev = ideal_dev.max((pair.crooks_ratio - 1.0).abs()).max(pair.gamma.abs());
            }
            let ch = random_channel(&mut r, d, 2, true);
            let rep = crooks_report(&p, b, &ch, &ch)?;
            let kl: f64 = rep
                .pairs
                .iter()
                .filter(|x| x.p_f > 0.0)
                .map(|x| x.p_f * (x.p_f / x.p_b).ln())
                .sum();
            sigma_err = sigma_err.max((kl - rep.mean_sigma).abs());
        }
        Ok((
            ideal_dev < 1e-12 && sigma_err < 1e-12,
            format!("ideal deviation {ideal_dev:.3e}, mean sigma error {sigma_err:.3e}"),
        ))
    }));

    out.push(check("fannes_bound", || {
        let mut r = rng(11);
        let mut failures = 0;
        for k in 0..n(100) {
            let d = 2 + k % 3;
            let p = random_process(&mut r, d);
            let ch = any_channel(&mut r, d);
            if !fannes_bound(&ch, &p, random_beta(&mut r))?.2 {
                failures += 1;
            }
        }
        Ok((failures == 0, format!("{failures} violations")))
    }));

    out.push(check("relative_entropy_sanity", || {
        let mut r = rng(12);
        let rho = random_density(&mut r, 3);
        let sigma = random_density(&mut r, 3);
        let self_d = relative_entropy(&rho, &rho)?;
        let cross = relative_entropy(&rho, &sigma)?;
        Ok((
            self_d.abs() < 1e-12 && cross >= 0.0,
            format!("D(rho||rho) = {self_d:.3e}"),
        ))
    }));

    out.push(check("monte_carlo", || {
        let cfg = fig2_config();
        let inst = cfg.instance(GridPoint { ratio: 1.0, theta: PI })?;
        let samples = if quick { 100_000 } else { 1_000_000 };
        let est = monte_carlo_tpm(&inst.process, inst.beta, &inst.channel0, &inst.channelf, samples, 7)?;
        let again = monte_carlo_tpm(&inst.process, inst.beta, &inst.channel0, &inst.channelf, samples, 7)?;
        let p = &inst.process;
        let w = table_mean(
            &nonideal_joint(p, inst.beta, &inst.channel0)?.p,
            p.h0.eigenvalues(),
            p.hf.eigenvalues(),
        );
        let j = jarzynski_functional(p, inst.beta, &inst.channel0)?;
        let (zw, zj) = (est.mean_w.z_score(w), est.jarzynski.z_score(j));
        Ok((
            zw < 4.0 && zj < 4.0 && est == again,
            format!("z(W) = {zw:.2}, z(jarzynski) = {zj:.2}"),
        ))
    }));

    out.push(check("fig_a3_pipeline", || {
        let mut cfg = fig_a3_config();
        if quick {
            cfg.pointer.ratios = Some((1..=750).step_by(7).map(f64::from).chain([750.0]).collect());
        }
        let t = reproduce_fig_a3(&cfg, 1)?;
        Ok((true, format!("{} rows", t.rows.len())))
    }));

    out
}
