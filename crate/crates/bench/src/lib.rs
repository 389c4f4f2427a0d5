//! Seeded fixtures shared by the kernel benchmarks.

use ntpm_core::measurement::{assignment_minimal_energy, build_channel};
use ntpm_core::random::{random_hermitian, random_pointer, random_process};
use ntpm_core::scenarios::{fig2_config, rabi_process, ScenarioConfig};
use ntpm_core::{ComplexMatrix, MeasurementChannel, PointerModel, Process};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hermitian(d: usize) -> ComplexMatrix {
    random_hermitian(&mut rng(d as u64), d, false)
}

pub fn pointer(d_s: usize, lambda: usize) -> PointerModel {
    random_pointer(&mut rng(7), d_s, lambda)
}

pub fn process(d: usize) -> Process {
    random_process(&mut rng(11), d)
}

/// The driven atom at a half-period pulse with a three-qubit pointer.
pub fn atom() -> (Process, MeasurementChannel) {
    let ptr = PointerModel::qubits(3, 0.1, 1.0 / 30.0, 2).expect("valid pointer");
    let ch = build_channel(ptr, assignment_minimal_energy(2).expect("d >= 2")).expect("matching dims");
    (rabi_process(1.0, std::f64::consts::PI, 1.0).expect("valid pulse"), ch)
}

/// The work figure restricted to `points` pulse areas.
pub fn small_sweep(points: usize) -> ScenarioConfig {
    let mut cfg = fig2_config();
    if let ntpm_core::scenarios::ProcessConfig::Rabi { grid: Some(g), .. } = &mut cfg.process {
        g.points = points;
    }
    cfg
}
