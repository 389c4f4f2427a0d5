//! Hamiltonians, thermal states and free energies.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_spectrum, ComplexMatrix, C64};

const UNITARY_TOL: f64 = 1e-12;

/// An observable given by its eigenvalues and a unitary eigenbasis.
///
/// Eigenvalues keep the order in which they were supplied; column `i` of the
/// eigenbasis is `|E_i>`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    eigenvalues: Vec<f64>,
    eigenbasis: ComplexMatrix,
}

impl HermitianOperator {
    pub fn new(eigenvalues: Vec<f64>, eigenbasis: ComplexMatrix) -> Result<Self> {
        let d = eigenvalues.len();
        if eigenbasis.rows() != d || eigenbasis.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: format!("{d}x{d} eigenbasis"),
                got: format!("{}x{}", eigenbasis.rows(), eigenbasis.cols()),
            });
        }
        if eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("non-finite eigenvalue".into()));
        }
        let err = eigenbasis.unitarity_error();
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(HermitianOperator {
            eigenvalues,
            eigenbasis,
        })
    }

    /// Operator that is diagonal in the computational basis.
    pub fn diagonal(energies: &[f64]) -> Result<Self> {
        Self::new(energies.to_vec(), ComplexMatrix::identity(energies.len()))
    }

    /// Diagonalizes a Hermitian matrix; eigenvalues come out ascending.
    pub fn from_matrix(h: &ComplexMatrix) -> Result<Self> {
        let spec = hermitian_spectrum(h)?;
        Self::new(spec.eigenvalues, spec.eigenvectors)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &ComplexMatrix {
        &self.eigenbasis
    }

    pub fn ket(&self, i: usize) -> Vec<C64> {
        self.eigenbasis.column(i)
    }

    pub fn projector(&self, i: usize) -> ComplexMatrix {
        ComplexMatrix::outer(&self.ket(i))
    }

    /// `sum_i f(E_i) |E_i><E_i|`.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let w = &self.eigenbasis;
        let d = self.dim();
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&e| f(e)).collect();
        ComplexMatrix::from_fn(d, d, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += w[(i, k)] * fl[k] * w[(j, k)].conj();
            }
            acc
        })
    }

    /// Diagonal matrix in the eigenbasis built from real weights.
    pub fn diagonal_in_basis(&self, weights: &[f64]) -> ComplexMatrix {
        let d = self.dim();
        let w = &self.eigenbasis;
        ComplexMatrix::from_fn(d, d, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += w[(i, k)] * weights[k] * w[(j, k)].conj();
            }
            acc
        })
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.function(|e| C64::new(e, 0.0))
    }

    /// `W† X W`: expresses `x` in this operator's eigenbasis.
    pub fn to_eigenbasis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &(&self.eigenbasis.adjoint() * x) * &self.eigenbasis
    }

    /// `W X W†`: inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.eigenbasis.conjugate_by(x)
    }

    /// Populations `<E_i|rho|E_i>`.
    pub fn populations(&self, rho: &ComplexMatrix) -> Vec<f64> {
        (0..self.dim()).map(|i| rho.expectation(&self.ket(i)).re).collect()
    }

    /// Smallest gap between any two eigenvalues (infinite in dimension 1).
    pub fn min_gap(&self) -> f64 {
        let mut e = self.eigenvalues.clone();
        e.sort_by(f64::total_cmp);
        e.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Operator norm, i.e. the largest `|E_i|`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.abs()).fold(0.0, f64::max)
    }

    pub fn expectation(&self, rho: &ComplexMatrix) -> f64 {
        self.populations(rho)
            .iter()
            .zip(&self.eigenvalues)
            .map(|(p, e)| p * e)
            .sum()
    }
}

/// Thermal state `exp(-beta H) / Z`.
#[derive(Debug, Clone)]
pub struct GibbsState {
    pub hamiltonian: HermitianOperator,
    pub beta: f64,
    pub matrix: ComplexMatrix,
    /// `log Z`, kept in log form so large `beta E` cannot overflow.
    pub log_partition_function: f64,
    /// Populations in the order of the Hamiltonian's eigenvalues.
    pub populations: Vec<f64>,
}

impl GibbsState {
    pub fn partition_function(&self) -> f64 {
        self.log_partition_function.exp()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(())
}

/// Boltzmann populations and `log Z`, shifted by the ground energy.
pub fn thermal_populations(energies: &[f64], beta: f64) -> Result<(Vec<f64>, f64)> {
    check_beta(beta)?;
    let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|&e| (-beta * (e - e_min)).exp()).collect();
    let z_shifted: f64 = weights.iter().sum();
    let pops = weights.iter().map(|w| w / z_shifted).collect();
    Ok((pops, z_shifted.ln() - beta * e_min))
}

pub fn gibbs(h: &HermitianOperator, beta: f64) -> Result<GibbsState> {
    let (populations, log_z) = thermal_populations(h.eigenvalues(), beta)?;
    let matrix = h.diagonal_in_basis(&populations);
    Ok(GibbsState {
        hamiltonian: h.clone(),
        beta,
        matrix,
        log_partition_function: log_z,
        populations,
    })
}

/// `Delta F = (1/beta) log(Z0 / Zf)`.
pub fn free_energy_difference(h0: &HermitianOperator, hf: &HermitianOperator, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidBeta(beta));
    }
    let (_, lz0) = thermal_populations(h0.eigenvalues(), beta)?;
    let (_, lzf) = thermal_populations(hf.eigenvalues(), beta)?;
    Ok((lz0 - lzf) / beta)
}

/// Energy spent cooling an `n_qubits` pointer from `beta_s` to `beta_p`.
///
/// Uses `N (E_F - 1) (1/(e^{-beta_s E_F} + 1) - 1/(e^{-beta_s E_P} + 1))` with
/// `E_F = E_P beta_p / beta_s`, energies in units of the system gap. The bare
/// `- 1` mixes an energy with a pure number; below `E_F = 1` the expression
/// turns negative.
pub fn cooling_cost(n_qubits: usize, e_p: f64, beta_s: f64, beta_p: f64) -> Result<f64> {
    if !(beta_s > 0.0) || !beta_s.is_finite() {
        return Err(Error::InvalidBeta(beta_s));
    }
    if !beta_p.is_finite() {
        return Err(Error::InvalidBeta(beta_p));
    }
    if beta_p < beta_s {
        return Err(Error::InvalidTemperatureOrder { beta_s, beta_p });
    }
    let e_f = e_p * beta_p / beta_s;
    let occ = |e: f64| 1.0 / ((-beta_s * e).exp() + 1.0);
    Ok(n_qubits as f64 * (e_f - 1.0) * (occ(e_f) - occ(e_p)))
}
