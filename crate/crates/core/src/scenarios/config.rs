//! JSON scenario configuration.
//!
//! Energies are absolute when given as lists (`system.energies`,
//! `pointer.spectrum`); the pointer splitting `pointer.e_p` is relative to the
//! system gap `system.gap` (default 1). Inverse temperatures are absolute.
//!
//! ```json
//! {
//!   "system":   { "gap": 1.0, "beta_s": 0.0333333 },
//!   "pointer":  { "n_qubits": 3, "e_p": 0.1, "ratios": [1, 150, 300] },
//!   "process":  { "kind": "rabi", "grid": { "start": 0, "stop": 6.283185307179586, "points": 201 } },
//!   "channels": { "forward": "minimal_energy", "backward": "minimal_energy" },
//!   "outputs":  { "csv": "out.csv", "quantities": ["theta", "ratio", "w_ideal", "w_nonid"] },
//!   "mc":       { "samples": 1000000, "seed": 7 }
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::measurement::{
    assignment_min_invasive, assignment_minimal_energy, build_channel, MeasurementChannel, PointerModel,
};
use crate::scenarios::rabi::{atom_hamiltonian, rabi_process};
use crate::thermo::HermitianOperator;
use crate::tpm::Process;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemConfig,
    pub pointer: PointerConfig,
    pub process: ProcessConfig,
    #[serde(default)]
    pub channels: ChannelsConfig,
    #[serde(default)]
    pub outputs: OutputsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Qubit splitting `E_S`; also the unit for `pointer.e_p`.
    #[serde(default = "one")]
    pub gap: f64,
    /// Explicit system spectrum; overrides the qubit built from `gap`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    pub beta_s: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointerConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<usize>,
    /// Explicit pointer spectrum (absolute energies).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Vec<f64>>,
    /// Qubit splitting of each pointer qubit in units of the system gap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_p: Option<f64>,
    /// Grid of `beta_p / beta_s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessConfig {
    Rabi {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thetas: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<ThetaGrid>,
        #[serde(default = "one")]
        omega: f64,
    },
    Fourier,
    CustomUnitary {
        /// JSON file with `{"re": [[..]], "im": [[..]]}`.
        file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl ThetaGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| self.start + (self.stop - self.start) * (k as f64) / n)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    MinimalEnergy,
    MinInvasive,
    Ideal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsConfig {
    pub forward: ChannelKind,
    pub backward: ChannelKind,
}

impl Default for ChannelsConfig {
    fn default() -> Self {
        ChannelsConfig {
            forward: ChannelKind::MinimalEnergy,
            backward: ChannelKind::MinimalEnergy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Theta,
    Ratio,
    WIdeal,
    WNonid,
    Deviation,
    DeviationRatio,
    Bound,
    CMax,
    Chi,
    Jarzynski,
    ExpMinusBetaDf,
    DeltaENonid,
    DeTpm,
    DeCool,
    DeltaS0,
    FannesBound,
    MeanSigma,
    CrooksViolation,
    DissipationResidual,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Theta => "theta",
            Quantity::Ratio => "ratio",
            Quantity::WIdeal => "w_ideal",
            Quantity::WNonid => "w_nonid",
            Quantity::Deviation => "deviation",
            Quantity::DeviationRatio => "deviation_ratio",
            Quantity::Bound => "bound",
            Quantity::CMax => "c_max",
            Quantity::Chi => "chi",
            Quantity::Jarzynski => "jarzynski",
            Quantity::ExpMinusBetaDf => "exp_minus_beta_df",
            Quantity::DeltaENonid => "delta_e_nonid",
            Quantity::DeTpm => "de_tpm",
            Quantity::DeCool => "de_cool",
            Quantity::DeltaS0 => "delta_s0",
            Quantity::FannesBound => "fannes_bound",
            Quantity::MeanSigma => "mean_sigma",
            Quantity::CrooksViolation => "crooks_violation",
            Quantity::DissipationResidual => "dissipation_residual",
        }
    }
}

fn default_quantities() -> Vec<Quantity> {
    vec![
        Quantity::Theta,
        Quantity::Ratio,
        Quantity::WIdeal,
        Quantity::WNonid,
        Quantity::Deviation,
        Quantity::CMax,
        Quantity::Chi,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
}

impl Default for OutputsConfig {
    fn default() -> Self {
        OutputsConfig {
            csv: None,
            quantities: default_quantities(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
}

/// One point of the scenario grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub ratio: f64,
    /// Pulse area; NaN for non-Rabi processes.
    pub theta: f64,
}

/// Everything needed to evaluate one grid point.
#[derive(Debug, Clone)]
pub struct Instance {
    pub point: GridPoint,
    pub process: Process,
    pub beta: f64,
    pub beta_p: f64,
    pub channel0: MeasurementChannel,
    pub channelf: MeasurementChannel,
}

impl ScenarioConfig {
    /// Parses and validates a JSON document. Syntax errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        // Resolve a relative unitary file against the config's directory.
        if let ProcessConfig::CustomUnitary { file } = &mut cfg.process {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(compact.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let s = &self.system;
        if !(s.beta_s > 0.0) || !s.beta_s.is_finite() {
            return bad(format!("system.beta_s must be positive, got {}", s.beta_s));
        }
        if !(s.gap > 0.0) || !s.gap.is_finite() {
            return bad(format!("system.gap must be positive, got {}", s.gap));
        }
        if let Some(e) = &s.energies {
            if e.len() < 2 {
                return bad("system.energies needs at least two levels".into());
            }
        }
        let p = &self.pointer;
        match (p.n_qubits, &p.spectrum) {
            (Some(_), Some(_)) => return bad("give pointer.n_qubits or pointer.spectrum, not both".into()),
            (None, None) => return bad("pointer needs n_qubits or spectrum".into()),
            (Some(n), None) => {
                if !(1..=12).contains(&n) {
                    return bad(format!("pointer.n_qubits = {n} out of range 1..=12"));
                }
                if !(1usize << n).is_multiple_of(self.d_s()) {
                    return bad(format!(
                        "{} pointer levels cannot be split into {} outcomes",
                        1usize << n,
                        self.d_s()
                    ));
                }
                if !p.e_p.is_some_and(|e| e > 0.0 && e.is_finite()) {
                    return bad("qubit pointer needs a positive pointer.e_p".into());
                }
            }
            (None, Some(sp)) => {
                if sp.is_empty() || sp.len() % self.d_s() != 0 {
                    return bad("pointer.spectrum length must be a multiple of the system dimension".into());
                }
            }
        }
        match (&p.beta_p, &p.ratios) {
            (Some(_), Some(_)) => return bad("give pointer.beta_p or pointer.ratios, not both".into()),
            (Some(b), None) if !(*b >= 0.0) || !b.is_finite() => {
                return bad(format!("pointer.beta_p must be non-negative, got {b}"))
            }
            (None, Some(r)) if r.is_empty() => return bad("pointer.ratios is empty".into()),
            (None, Some(r)) if r.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) => {
                return bad("pointer.ratios must be non-negative".into())
            }
            _ => {}
        }
        match &self.process {
            ProcessConfig::Rabi {
                theta,
                thetas,
                grid,
                omega,
            } => {
                if self.d_s() != 2 {
                    return bad("the Rabi process needs a two-level system".into());
                }
                let given = theta.is_some() as usize + thetas.is_some() as usize + grid.is_some() as usize;
                if given != 1 {
                    return bad("rabi process needs exactly one of theta, thetas, grid".into());
                }
                if thetas.as_ref().is_some_and(|t| t.is_empty()) || grid.as_ref().is_some_and(|g| g.points == 0) {
                    return bad("theta grid is empty".into());
                }
                if !(*omega > 0.0) {
                    return bad(format!("omega must be positive, got {omega}"));
                }
            }
            ProcessConfig::Fourier | ProcessConfig::CustomUnitary { .. } => {}
        }
        if self.outputs.quantities.is_empty() {
            return bad("outputs.quantities is empty".into());
        }
        if let Some(mc) = &self.mc {
            if mc.samples < 10_000 {
                return bad(format!("mc.samples must be at least 10000, got {}", mc.samples));
            }
        }
        Ok(())
    }

    pub fn d_s(&self) -> usize {
        self.system.energies.as_ref().map_or(2, |e| e.len())
    }

    pub fn system_hamiltonian(&self) -> Result<HermitianOperator> {
        match &self.system.energies {
            Some(e) => HermitianOperator::diagonal(e),
            None => atom_hamiltonian(self.system.gap),
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        match &self.process {
            ProcessConfig::Rabi {
                theta, thetas, grid, ..
            } => {
                if let Some(t) = theta {
                    vec![*t]
                } else if let Some(ts) = thetas {
                    ts.clone()
                } else {
                    grid.as_ref().map(|g| g.values()).unwrap_or_default()
                }
            }
            _ => vec![f64::NAN],
        }
    }

    /// `beta_p / beta_s` values; a fixed `beta_p` becomes a single ratio.
    pub fn ratios(&self) -> Vec<f64> {
        match (&self.pointer.ratios, self.pointer.beta_p) {
            (Some(r), _) => r.clone(),
            (None, Some(b)) => vec![b / self.system.beta_s],
            (None, None) => vec![1.0],
        }
    }

    /// Grid points with the pointer ratio as the outer loop.
    pub fn grid(&self) -> Vec<GridPoint> {
        let thetas = self.thetas();
        self.ratios()
            .into_iter()
            .flat_map(|ratio| thetas.iter().map(move |&theta| GridPoint { ratio, theta }))
            .collect()
    }

    fn pointer_model(&self, beta_p: f64) -> Result<PointerModel> {
        let d_s = self.d_s();
        match (&self.pointer.spectrum, self.pointer.n_qubits) {
            (Some(sp), _) => PointerModel::new(HermitianOperator::diagonal(sp)?, beta_p, d_s),
            (None, Some(n)) => PointerModel::qubits(n, self.pointer.e_p.unwrap_or(0.0) * self.system.gap, beta_p, d_s),
            (None, None) => Err(Error::InvalidConfig("pointer needs n_qubits or spectrum".into())),
        }
    }

    fn channel(&self, kind: ChannelKind, beta_p: f64) -> Result<MeasurementChannel> {
        let d = self.d_s();
        match kind {
            ChannelKind::Ideal => MeasurementChannel::ideal(d),
            ChannelKind::MinimalEnergy => build_channel(self.pointer_model(beta_p)?, assignment_minimal_energy(d)?),
            ChannelKind::MinInvasive => build_channel(self.pointer_model(beta_p)?, assignment_min_invasive(d)?),
        }
    }

    fn process(&self, theta: f64) -> Result<Process> {
        let h = self.system_hamiltonian()?;
        match &self.process {
            ProcessConfig::Rabi { omega, .. } => rabi_process(self.system.gap, theta, *omega),
            ProcessConfig::Fourier => Process::new(h.clone(), h.clone(), fourier_unitary(&h)),
            ProcessConfig::CustomUnitary { file } => {
                let u = load_unitary(file)?;
                Process::new(h.clone(), h, u)
            }
        }
    }

    pub fn instance(&self, point: GridPoint) -> Result<Instance> {
        let beta = self.system.beta_s;
        let beta_p = point.ratio * beta;
        Ok(Instance {
            point,
            process: self.process(point.theta)?,
            beta,
            beta_p,
            channel0: self.channel(self.channels.forward, beta_p)?,
            channelf: self.channel(self.channels.backward, beta_p)?,
        })
    }
}

/// `U = d^{-1/2} sum_{j,k} e^{-2 pi i jk/d} |E_k><E_j|` in the eigenbasis of `h`.
pub fn fourier_unitary(h: &HermitianOperator) -> ComplexMatrix {
    let d = h.dim();
    let norm = 1.0 / (d as f64).sqrt();
    let f = ComplexMatrix::from_fn(d, d, |k, j| {
        C64::from_polar(norm, -2.0 * std::f64::consts::PI * ((j * k) % d) as f64 / d as f64)
    });
    h.from_eigenbasis(&f)
}

#[derive(Deserialize)]
struct UnitaryFile {
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

fn load_unitary(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let f: UnitaryFile =
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let d = f.re.len();
    let im = f.im.unwrap_or_else(|| vec![vec![0.0; d]; d]);
    if f.re.iter().chain(&im).any(|r| r.len() != d) || im.len() != d {
        return Err(Error::InvalidConfig(
            "unitary file must hold square re/im arrays".into(),
        ));
    }
    let data = (0..d * d)
        .map(|k| C64::new(f.re[k / d][k % d], im[k / d][k % d]))
        .collect();
    ComplexMatrix::from_vec(d, d, data)
}

/// Physical setup of the driven-atom figures.
pub fn driven_atom_config(ratios: Vec<f64>, process: ProcessConfig, quantities: Vec<Quantity>) -> ScenarioConfig {
    ScenarioConfig {
        system: SystemConfig {
            gap: 1.0,
            energies: None,
            beta_s: 1.0 / 30.0,
        },
        pointer: PointerConfig {
            n_qubits: Some(3),
            spectrum: None,
            e_p: Some(0.1),
            beta_p: None,
            ratios: Some(ratios),
        },
        process,
        channels: ChannelsConfig::default(),
        outputs: OutputsConfig { csv: None, quantities },
        mc: None,
    }
}
