//! Resonantly driven two-level atom.

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::thermo::HermitianOperator;
use crate::tpm::{Process, TimeFamily};

/// `cos(theta/2) I - i sin(theta/2) sigma_y`, which is real.
pub fn rabi_unitary(theta: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    ComplexMatrix::from_real(2, 2, &[c, -s, s, c]).expect("finite entries")
}

/// `-(e_s/2) sigma_z`: ground state `|0>` at `-e_s/2`.
pub fn atom_hamiltonian(e_s: f64) -> Result<HermitianOperator> {
    HermitianOperator::diagonal(&[-0.5 * e_s, 0.5 * e_s])
}

/// Rabi pulse of area `theta` driven at angular frequency `omega`, so
/// `t_f = theta / omega` and `U(t, 0) = U(omega t)`.
pub fn rabi_process(e_s: f64, theta: f64, omega: f64) -> Result<Process> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("omega = {omega}")));
    }
    if !theta.is_finite() || theta < 0.0 {
        return Err(Error::InvalidParameter(format!("theta = {theta}")));
    }
    let h = atom_hamiltonian(e_s)?;
    Process::new(h.clone(), h, rabi_unitary(theta))?.with_family(TimeFamily::Rabi { omega }, theta / omega)
}

/// Ideal mean work `E_S sin^2(theta/2) tanh(beta_S E_S / 2)`.
pub fn rabi_work_closed_form(e_s: f64, beta_s: f64, theta: f64) -> f64 {
    e_s * (0.5 * theta).sin().powi(2) * (0.5 * beta_s * e_s).tanh()
}
