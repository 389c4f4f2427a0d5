//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here is plain row-major `Vec<Complex64>` storage. Dimensions in
//! this crate stay well below a few hundred, so a cyclic Jacobi eigensolver is
//! both fast enough and fully deterministic.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::thermo::HermitianOperator;

pub type C64 = Complex64;

/// A density matrix is stored as a plain complex matrix; operations that need
/// a valid state check the relevant properties themselves.
pub type DensityMatrix = ComplexMatrix;

const HERMITIAN_TOL: f64 = 1e-12;
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 50;
const CLAMP_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                got: format!("{}", data.len()),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// `|v><v|` for a column vector `v`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        self.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max-abs distance between two equally shaped matrices.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut err: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                err = err.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Max-abs deviation of `A† A` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let p = &self.adjoint() * self;
        p.max_abs_diff(&Self::identity(self.rows))
    }

    /// `A X A†`.
    pub fn conjugate_by(&self, x: &Self) -> Self {
        &(self * x) * &self.adjoint()
    }

    /// `<v|A|v>` for a column vector `v`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..self.cols {
                row += self[(i, j)] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc
    }

    /// `Tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                got: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    /// `U f(Λ) U†` for a scalar function of the eigenvalues.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        let fl: Vec<C64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += u[(i, k)] * fl[k] * u[(j, k)].conj();
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|x| C64::new(x, 0.0))
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

/// Cyclic Jacobi diagonalization of a complex Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies a
/// real Givens rotation that zeroes it. Sweeps stop once the off-diagonal
/// Frobenius mass drops below `1e-14` relative to the matrix norm.
pub fn hermitian_spectrum(a: &ComplexMatrix) -> Result<HermitianSpectrum> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            got: format!("{}x{}", a.rows(), a.cols()),
        });
    }
    let herr = a.hermiticity_error();
    if herr > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herr));
    }
    let n = a.rows();
    // Symmetrize so the rotations act on an exactly Hermitian matrix.
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();

    let off = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut converged = off(&m) <= JACOBI_TOL * scale;
    let mut sweeps = 0;
    while !converged {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(JACOBI_MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = apq / g; // e^{i phi}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]] on (p, q).
                let gpp = C64::new(c, 0.0);
                let gpq = C64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                // M <- M G
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * gpp + mkq * gqp;
                    m[(k, q)] = mkp * gpq + mkq * gqq;
                }
                // M <- G† M
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = gpp.conj() * mpk + gqp.conj() * mqk;
                    m[(q, k)] = gpq.conj() * mpk + gqq.conj() * mqk;
                }
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
                // V <- V G
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
        converged = off(&m) <= JACOBI_TOL * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Kronecker product with `out[(i*rb + k, j*cb + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows(), b.cols());
    ComplexMatrix::from_fn(a.rows() * rb, a.cols() * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}

/// Traces out the second (pointer) factor of a `d_s * d_p` square matrix.
pub fn partial_trace_pointer(rho_sp: &ComplexMatrix, d_s: usize, d_p: usize) -> Result<ComplexMatrix> {
    let n = d_s * d_p;
    if rho_sp.rows() != n || rho_sp.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            got: format!("{}x{}", rho_sp.rows(), rho_sp.cols()),
        });
    }
    Ok(ComplexMatrix::from_fn(d_s, d_s, |i, j| {
        (0..d_p).map(|k| rho_sp[(i * d_p + k, j * d_p + k)]).sum()
    }))
}

/// Half the trace norm of `rho - sigma`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    rho.check_same_shape(sigma)?;
    let spec = hermitian_spectrum(&(rho - sigma))?;
    Ok(0.5 * spec.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

/// Eigenvalues of a state with tiny negative noise clamped to zero.
fn state_eigenvalues(rho: &ComplexMatrix) -> Result<HermitianSpectrum> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::NotAState(format!("trace is {tr}")));
    }
    let mut spec = hermitian_spectrum(rho)?;
    for x in spec.eigenvalues.iter_mut() {
        if *x < -CLAMP_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {x:e}")));
        }
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    Ok(spec)
}

fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Von Neumann entropy in nats.
pub fn vn_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let spec = state_eigenvalues(rho)?;
    Ok(-spec.eigenvalues.iter().map(|&x| xlogx(x)).sum::<f64>())
}

/// Quantum relative entropy `D(rho || sigma)` in nats.
///
/// Fails with `SupportViolation` when `rho` carries weight on the kernel of
/// `sigma`, i.e. when the divergence is infinite.
pub fn relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    rho.check_same_shape(sigma)?;
    let sr = state_eigenvalues(rho)?;
    let ss = state_eigenvalues(sigma)?;
    for (k, &lam) in sr.eigenvalues.iter().enumerate() {
        if lam > 1e-12 {
            let w = sigma.expectation(&sr.eigenvector(k)).re;
            if w <= 1e-14 {
                return Err(Error::SupportViolation(format!(
                    "rho eigenvalue {lam:e} lies outside supp(sigma)"
                )));
            }
        }
    }
    Ok(-entropy_of(&sr) - trace_rho_log(rho, &ss)?)
}

fn entropy_of(spec: &HermitianSpectrum) -> f64 {
    -spec.eigenvalues.iter().map(|&x| xlogx(x)).sum::<f64>()
}

/// `Tr[rho log sigma]` from the spectrum of `sigma`, skipping its kernel.
fn trace_rho_log(rho: &ComplexMatrix, ss: &HermitianSpectrum) -> Result<f64> {
    let mut acc = 0.0;
    for (k, &mu) in ss.eigenvalues.iter().enumerate() {
        let w = rho.expectation(&ss.eigenvector(k)).re;
        if mu <= 1e-14 {
            if w > 1e-12 {
                return Err(Error::SupportViolation(format!(
                    "weight {w:e} on an eigenvector with eigenvalue {mu:e}"
                )));
            }
            continue;
        }
        acc += w * mu.ln();
    }
    Ok(acc)
}

/// `Tr[rho log sigma]` for a state `sigma`; errors if the trace diverges.
pub fn trace_log(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    rho.check_same_shape(sigma)?;
    let ss = state_eigenvalues(sigma)?;
    trace_rho_log(rho, &ss)
}

/// `exp(-i H t)` through the eigenbasis of `h`.
pub fn propagator(h: &HermitianOperator, t: f64) -> ComplexMatrix {
    h.function(|e| C64::new(0.0, -e * t).exp())
}

/// Unitary evolution `e^{-iHt} rho e^{iHt}` with hbar = 1.
pub fn evolve(h: &HermitianOperator, t: f64, state: &ComplexMatrix) -> Result<ComplexMatrix> {
    if state.rows() != h.dim() || state.cols() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0}", h.dim()),
            got: format!("{}x{}", state.rows(), state.cols()),
        });
    }
    Ok(propagator(h, t).conjugate_by(state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn diagonal_input_sorted() {
        let s = hermitian_spectrum(&ComplexMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let s = hermitian_spectrum(&x).unwrap();
        assert!((s.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complex_pivot() {
        let y = ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, -2.0), c(0.0, 2.0), c(-1.0, 0.0)]).unwrap();
        let s = hermitian_spectrum(&y).unwrap();
        let r = 5f64.sqrt();
        assert!((s.eigenvalues[0] + r).abs() < 1e-14);
        assert!((s.eigenvalues[1] - r).abs() < 1e-14);
        assert!(s.reconstruct().max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_spectrum(&a), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn kron_index_layout() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = ComplexMatrix::from_real(2, 2, &[0.0, 5.0, 6.0, 7.0]).unwrap();
        let k = kron(&a, &b);
        assert_eq!(k[(0, 1)], c(5.0, 0.0));
        assert_eq!(k[(3, 2)], c(4.0 * 6.0, 0.0));
        assert_eq!(k[(2, 1)], c(3.0 * 5.0, 0.0));
    }

    #[test]
    fn entangled_marginal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        let rho = ComplexMatrix::outer(&psi);
        let r = partial_trace_pointer(&rho, 2, 2).unwrap();
        assert!(r.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn entropies() {
        let mixed = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
        assert!((vn_entropy(&mixed).unwrap() - 3f64.ln()).abs() < 1e-14);
        let zero = ComplexMatrix::diag_real(&[1.0, 0.0]);
        assert_eq!(vn_entropy(&zero).unwrap(), 0.0);
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!((relative_entropy(&zero, &half).unwrap() - 2f64.ln()).abs() < 1e-14);
        assert!(matches!(
            relative_entropy(&half, &zero),
            Err(Error::SupportViolation(_))
        ));
        assert!(matches!(
            vn_entropy(&ComplexMatrix::identity(2)),
            Err(Error::NotAState(_))
        ));
    }

    #[test]
    fn orthogonal_states_distance_one() {
        let a = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let b = ComplexMatrix::diag_real(&[0.0, 1.0]);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }
}
