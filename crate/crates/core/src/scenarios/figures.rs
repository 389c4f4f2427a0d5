//! Grid evaluation and the driven-atom figure pipelines.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fluct::{chi, crooks_report, dissipation_identity, fannes_bound, jarzynski_functional};
use crate::measurement::MeasurementChannel;
use crate::measurement::{measurement_energy_cost, measurement_energy_cost_blocks};
use crate::scenarios::config::{
    driven_atom_config, ChannelKind, GridPoint, Instance, ProcessConfig, Quantity, ScenarioConfig, ThetaGrid,
};
use crate::scenarios::csv::CsvTable;
use crate::scenarios::montecarlo::{monte_carlo_tpm, point_seed};
use crate::thermo::{cooling_cost, free_energy_difference, gibbs};
use crate::tpm::{deviation_bound, energy_change_nonideal, ideal_joint, nonideal_joint, table_mean, Process};

/// Pointer-to-system inverse temperature ratios shown in the work figure.
pub const FIG2_RATIOS: [f64; 6] = [1.0, 150.0, 300.0, 450.0, 600.0, 750.0];
pub const FIG2_POINTS: usize = 201;
const THETA_MATCH: f64 = 1e-12;

fn mean_works(p: &Process, beta: f64, ch0: &MeasurementChannel) -> Result<(f64, f64)> {
    let (e0, ef) = (p.h0.eigenvalues(), p.hf.eigenvalues());
    let ideal = table_mean(&ideal_joint(p, beta)?.p, e0, ef);
    let nonid = table_mean(&nonideal_joint(p, beta, ch0)?.p, e0, ef);
    Ok((ideal, nonid))
}

/// Energy the two measurements inject: the first acts on the thermal state,
/// the second on the evolved post-measurement state.
pub fn tpm_energy_cost(inst: &Instance) -> Result<f64> {
    let p = &inst.process;
    let (ch0, chf) = (&inst.channel0, &inst.channelf);
    let p0 = gibbs(&p.h0, inst.beta)?.populations;
    let first = measurement_energy_cost_blocks(&p0, &p.h0, &ch0.pointer, &ch0.pi)?;
    let d = p.dim();
    let r: Vec<f64> = (0..d).map(|l| (0..d).map(|n| ch0.q[l][n] * p0[n]).sum()).collect();
    let rho_f = p.u.conjugate_by(&p.h0.diagonal_in_basis(&r));
    let second = measurement_energy_cost(&rho_f, &p.hf, &chf.pointer, &chf.pi)?;
    Ok(first + second)
}

/// Cost of preparing the qubit pointer at `beta_p`, in absolute energy units.
/// NaN when the pointer is not a qubit register.
pub fn pointer_cooling_cost(cfg: &ScenarioConfig, beta_p: f64) -> Result<f64> {
    let (Some(n), Some(e_p)) = (cfg.pointer.n_qubits, cfg.pointer.e_p) else {
        return Ok(f64::NAN);
    };
    let gap = cfg.system.gap;
    Ok(cooling_cost(n, e_p, cfg.system.beta_s * gap, beta_p * gap)? * gap)
}

/// Evaluates the requested quantities at one grid point.
pub fn evaluate_point(cfg: &ScenarioConfig, point: GridPoint, quantities: &[Quantity]) -> Result<Vec<f64>> {
    let inst = cfg.instance(point)?;
    let (p, beta) = (&inst.process, inst.beta);
    let ch0 = &inst.channel0;
    let mut works = None;
    let mut works = || -> Result<(f64, f64)> {
        if works.is_none() {
            works = Some(mean_works(p, beta, ch0)?);
        }
        Ok(works.unwrap())
    };
    let mut row = Vec::with_capacity(quantities.len());
    for q in quantities {
        let v = match q {
            Quantity::Theta => point.theta,
            Quantity::Ratio => point.ratio,
            Quantity::WIdeal => works()?.0,
            Quantity::WNonid => works()?.1,
            Quantity::Deviation => {
                let (i, n) = works()?;
                (n - i).abs()
            }
            Quantity::DeviationRatio => {
                let (i, n) = works()?;
                (n - i).abs() / i
            }
            Quantity::Bound => deviation_bound(p, ch0),
            Quantity::CMax => ch0.c_max,
            Quantity::Chi => chi(p, beta, ch0)?,
            Quantity::Jarzynski => jarzynski_functional(p, beta, ch0)?,
            Quantity::ExpMinusBetaDf => (-beta * free_energy_difference(&p.h0, &p.hf, beta)?).exp(),
            Quantity::DeltaENonid => energy_change_nonideal(p, beta, ch0, &inst.channelf)?,
            Quantity::DeTpm => tpm_energy_cost(&inst)?,
            Quantity::DeCool => pointer_cooling_cost(cfg, inst.beta_p)?,
            Quantity::DeltaS0 => fannes_bound(ch0, p, beta)?.0,
            Quantity::FannesBound => fannes_bound(ch0, p, beta)?.1,
            Quantity::MeanSigma => crooks_report(p, beta, ch0, &inst.channelf)?.mean_sigma,
            Quantity::CrooksViolation => crooks_report(p, beta, ch0, &inst.channelf)?.max_relative_violation,
            Quantity::DissipationResidual => dissipation_identity(p, beta, ch0)?.residual,
        };
        row.push(v);
    }
    Ok(row)
}

/// Maps `f` over `items`, on `threads` workers when more than one is asked
/// for. Results keep the input order either way.
pub fn ordered_map<T, R, F>(items: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> Result<R> + Sync + Send,
{
    if threads <= 1 {
        return items.iter().enumerate().map(|(i, x)| f(i, x)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().enumerate().map(|(i, x)| f(i, x)).collect())
}

fn table_for(cfg: &ScenarioConfig, header: Vec<String>) -> CsvTable {
    CsvTable::new(header)
        .with_meta("tool", concat!("ntpm ", env!("CARGO_PKG_VERSION")))
        .with_meta("config_sha256", cfg.hash())
}

/// Evaluates the configured quantities over the whole grid.
pub fn sweep(cfg: &ScenarioConfig, threads: usize) -> Result<CsvTable> {
    cfg.validate()?;
    let quantities = &cfg.outputs.quantities;
    let grid = cfg.grid();
    let rows = ordered_map(&grid, threads, |_, &pt| evaluate_point(cfg, pt, quantities))?;
    let mut table = table_for(cfg, quantities.iter().map(|q| q.name().to_string()).collect());
    for row in rows {
        table.push(row)?;
    }
    Ok(table)
}

/// Compares the sampled estimates with the analytic values at every grid point.
pub fn monte_carlo_sweep(cfg: &ScenarioConfig, threads: usize) -> Result<CsvTable> {
    cfg.validate()?;
    let mc = cfg
        .mc
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("the mc section is required for sampling".into()))?;
    let grid = cfg.grid();
    let rows = ordered_map(&grid, threads, |i, &pt| {
        let inst = cfg.instance(pt)?;
        let (p, beta) = (&inst.process, inst.beta);
        let est = monte_carlo_tpm(
            p,
            beta,
            &inst.channel0,
            &inst.channelf,
            mc.samples,
            point_seed(mc.seed, i),
        )?;
        let w = mean_works(p, beta, &inst.channel0)?.1;
        let j = jarzynski_functional(p, beta, &inst.channel0)?;
        Ok(vec![
            pt.theta,
            pt.ratio,
            w,
            est.mean_w.mean,
            est.mean_w.stderr,
            est.mean_w.z_score(w),
            j,
            est.jarzynski.mean,
            est.jarzynski.stderr,
            est.jarzynski.z_score(j),
        ])
    })?;
    let header = [
        "theta",
        "ratio",
        "w_nonid",
        "mc_w",
        "mc_w_stderr",
        "w_z",
        "jarzynski",
        "mc_jarzynski",
        "mc_jarzynski_stderr",
        "jarzynski_z",
    ];
    let mut table = table_for(cfg, header.iter().map(|s| s.to_string()).collect())
        .with_meta("samples", mc.samples.to_string())
        .with_meta("seed", mc.seed.to_string());
    for row in rows {
        table.push(row)?;
    }
    Ok(table)
}

fn fig2_quantities(with_deviation: bool) -> Vec<Quantity> {
    let mut q = vec![Quantity::Theta, Quantity::Ratio, Quantity::WIdeal, Quantity::WNonid];
    if with_deviation {
        q.push(Quantity::Deviation);
    }
    q
}

/// Configuration of the work-deviation figure.
pub fn fig2_config() -> ScenarioConfig {
    driven_atom_config(
        FIG2_RATIOS.to_vec(),
        ProcessConfig::Rabi {
            theta: None,
            thetas: None,
            grid: Some(ThetaGrid {
                start: 0.0,
                stop: 2.0 * PI,
                points: FIG2_POINTS,
            }),
            omega: 1.0,
        },
        fig2_quantities(true),
    )
}

/// Configuration of the energy-cost figure.
pub fn fig_a3_config() -> ScenarioConfig {
    driven_atom_config(
        (1..=750).map(f64::from).collect(),
        ProcessConfig::Rabi {
            theta: None,
            thetas: Some(vec![PI / 2.0, PI]),
            grid: None,
            omega: 1.0,
        },
        vec![Quantity::Ratio, Quantity::Theta, Quantity::DeTpm, Quantity::DeCool],
    )
}

fn mismatch(what: &str) -> Error {
    Error::ConfigMismatch(what.to_string())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

/// Checks the physical setup shared by the driven-atom figures.
fn check_driven_atom(cfg: &ScenarioConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.d_s() != 2 || cfg.system.energies.is_some() {
        return Err(mismatch("the figures need the two-level atom built from system.gap"));
    }
    if !close(cfg.system.beta_s * cfg.system.gap, 1.0 / 30.0) {
        return Err(mismatch("beta_s * gap must be 1/30"));
    }
    if cfg.pointer.n_qubits != Some(3) || !cfg.pointer.e_p.is_some_and(|e| close(e, 0.1)) {
        return Err(mismatch("pointer must be three qubits with e_p = 0.1"));
    }
    if cfg.pointer.ratios.is_none() {
        return Err(mismatch("pointer temperatures must be given as ratios"));
    }
    if !matches!(cfg.process, ProcessConfig::Rabi { .. }) {
        return Err(mismatch("process must be the Rabi pulse"));
    }
    if cfg.channels.forward != ChannelKind::MinimalEnergy || cfg.channels.backward != ChannelKind::MinimalEnergy {
        return Err(mismatch("both measurements must use the minimal-energy channel"));
    }
    Ok(())
}

fn rows_at(table: &CsvTable, theta: f64) -> Vec<&Vec<f64>> {
    let col = table.header.iter().position(|h| h == "theta").expect("theta column");
    table
        .rows
        .iter()
        .filter(|r| (r[col] - theta).abs() < THETA_MATCH)
        .collect()
}

fn work_figure(cfg: &ScenarioConfig, threads: usize, with_deviation: bool) -> Result<CsvTable> {
    check_driven_atom(cfg)?;
    if cfg.ratios() != FIG2_RATIOS {
        return Err(mismatch("ratios must be 1, 150, 300, 450, 600, 750"));
    }
    let mut cfg = cfg.clone();
    cfg.outputs.quantities = fig2_quantities(true);
    let full = sweep(&cfg, threads)?;

    // Exact-estimation points and the quoted deviation ratio.
    let e_s = cfg.system.gap;
    for theta in [PI / 2.0, 3.0 * PI / 2.0] {
        for r in rows_at(&full, theta) {
            if r[4] >= 1e-12 * e_s {
                return Err(Error::VerificationFailed(format!(
                    "deviation {:e} at theta = {theta}, ratio = {}",
                    r[4], r[1]
                )));
            }
        }
    }
    for r in rows_at(&full, PI).into_iter().filter(|r| r[1] == 1.0) {
        let ratio = r[4] / r[2];
        if (ratio - 0.49875).abs() > 5e-4 {
            return Err(Error::VerificationFailed(format!(
                "deviation ratio {ratio} at theta = pi, ratio = 1"
            )));
        }
    }

    if with_deviation {
        return Ok(full);
    }
    let mut table = CsvTable::new(fig2_quantities(false).iter().map(|q| q.name().to_string()).collect());
    table.metadata = full.metadata.clone();
    for r in full.rows {
        table.push(r[..4].to_vec())?;
    }
    Ok(table)
}

/// Ideal and non-ideal mean work over the pulse area, with their deviation.
pub fn reproduce_fig2(cfg: &ScenarioConfig, threads: usize) -> Result<CsvTable> {
    work_figure(cfg, threads, true)
}

/// Same sweep as [`reproduce_fig2`] without the deviation column.
pub fn reproduce_fig_a2(cfg: &ScenarioConfig, threads: usize) -> Result<CsvTable> {
    work_figure(cfg, threads, false)
}

/// Measurement energy cost versus pointer cooling cost.
pub fn reproduce_fig_a3(cfg: &ScenarioConfig, threads: usize) -> Result<CsvTable> {
    check_driven_atom(cfg)?;
    let thetas = cfg.thetas();
    if thetas.len() != 2 || !close(thetas[0], PI / 2.0) || !close(thetas[1], PI) {
        return Err(mismatch("thetas must be [pi/2, pi]"));
    }
    let mut cfg = cfg.clone();
    cfg.outputs.quantities = vec![Quantity::Ratio, Quantity::Theta, Quantity::DeTpm, Quantity::DeCool];
    let table = sweep(&cfg, threads)?;

    let e_s = cfg.system.gap;
    if let Some(r) = table.rows.iter().find(|r| r[0] == 750.0) {
        if !(r[3] > 2.0 * e_s) {
            return Err(Error::VerificationFailed(format!("cooling cost {} at ratio 750", r[3])));
        }
    }
    if let Some(r) = table.rows.iter().find(|r| !(r[2] > 0.0)) {
        return Err(Error::VerificationFailed(format!(
            "measurement cost {} at ratio {}",
            r[2], r[0]
        )));
    }
    for pair in table.rows.chunks(2) {
        let (a, b) = (pair[0][2], pair[1][2]);
        let rel = (a - b).abs() / a.max(b);
        if rel >= 0.05 {
            return Err(Error::VerificationFailed(format!(
                "measurement cost varies by {:.2}% with theta at ratio {}",
                100.0 * rel,
                pair[0][0]
            )));
        }
    }
    Ok(table)
}
