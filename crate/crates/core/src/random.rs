//! Random test instances shared by the verification suite, the benches and
//! the test targets. Everything is driven by a caller-supplied generator.

use rand::Rng;

use crate::linalg::{propagator, ComplexMatrix, C64};
use crate::measurement::{
    assignment_min_invasive, assignment_minimal_energy, build_channel, MeasurementChannel, PointerModel,
};
use crate::thermo::HermitianOperator;
use crate::tpm::Process;

/// Dense Hermitian matrix with entries uniform in the unit box; purely real
/// (symmetric) when `real` is set.
pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize, real: bool) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(rng.gen_range(-1.0..1.0), 0.0);
        for j in (i + 1)..d {
            let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
            let z = C64::new(rng.gen_range(-1.0..1.0), im);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Hamiltonian with a spectrum gap of at least `1e-3`.
pub fn random_hamiltonian<R: Rng>(rng: &mut R, d: usize, real: bool) -> HermitianOperator {
    loop {
        let h = HermitianOperator::from_matrix(&random_hermitian(rng, d, real)).expect("Hermitian by construction");
        if h.min_gap() > 1e-3 {
            return h;
        }
    }
}

/// `exp(-i H)` for a random Hermitian `H` scaled to spread phases widely.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> ComplexMatrix {
    let h = HermitianOperator::from_matrix(&random_hermitian(rng, d, false)).expect("Hermitian by construction");
    propagator(&h, 3.0)
}

/// Full-rank mixed state `G G† / Tr(G G†)`.
pub fn random_density<R: Rng>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

/// Random diagonal pointer of dimension `lambda * d_s` with `beta_p` in `[0.1, 3)`.
pub fn random_pointer<R: Rng>(rng: &mut R, d_s: usize, lambda: usize) -> PointerModel {
    let d_p = d_s * lambda;
    let energies: Vec<f64> = (0..d_p).map(|_| rng.gen_range(0.0..2.0)).collect();
    let beta_p = rng.gen_range(0.1..3.0);
    PointerModel::new(HermitianOperator::diagonal(&energies).expect("finite"), beta_p, d_s).expect("valid dims")
}

/// Minimal-energy or minimally invasive channel on a random pointer.
pub fn random_channel<R: Rng>(rng: &mut R, d_s: usize, lambda: usize, latin: bool) -> MeasurementChannel {
    let pi = if latin {
        assignment_min_invasive(d_s)
    } else {
        assignment_minimal_energy(d_s)
    }
    .expect("d_s >= 2");
    build_channel(random_pointer(rng, d_s, lambda), pi).expect("matching dims")
}

/// Process with unrelated random Hamiltonians and a random unitary.
pub fn random_process<R: Rng>(rng: &mut R, d: usize) -> Process {
    let h0 = random_hamiltonian(rng, d, false);
    let hf = random_hamiltonian(rng, d, false);
    Process::new(h0, hf, random_unitary(rng, d)).expect("unitary by construction")
}

/// Time-reversal symmetric process: real Hamiltonians and a schedule of one to
/// three real driving Hamiltonians.
pub fn random_driven_process<R: Rng>(rng: &mut R, d: usize) -> Process {
    let h0 = random_hamiltonian(rng, d, true);
    let hf = random_hamiltonian(rng, d, true);
    let segments = (0..rng.gen_range(1..=3))
        .map(|_| (random_hamiltonian(rng, d, true), rng.gen_range(0.2..1.5)))
        .collect();
    Process::from_schedule(h0, hf, segments).expect("valid schedule")
}

/// Inverse temperature in `[0.2, 2)`.
pub fn random_beta<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(0.2..2.0)
}
