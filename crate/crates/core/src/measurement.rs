//! Unbiased, maximally correlated energy measurements with a thermal pointer.
//!
//! A pointer of dimension `d_P = lambda * d_S` starts in its Gibbs state. Its
//! thermal populations, sorted in decreasing order, are cut into `d_S` groups
//! of `lambda`; group `k` has total weight `A_k` and `A_0 = C_max`. An
//! assignment matrix `pi` decides which group ends up in the block that pairs
//! system level `l` with pointer outcome `n`, which yields the conditional
//! probabilities `q[l][n] = A_{pi[l][n]}`.
//!
//! All joint system-pointer matrices in this module are written in the product
//! of the system eigenbasis and the pointer eigenbasis, with index
//! `s * d_P + j`.

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexMatrix, C64};
use crate::thermo::{thermal_populations, HermitianOperator};

const GAP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PointerModel {
    h_p: HermitianOperator,
    beta_p: f64,
    d_s: usize,
    lambda: usize,
    /// For each outcome, pointer eigenstate indices in ascending energy.
    outcome_subspaces: Vec<Vec<usize>>,
    weights: Vec<f64>,
    /// `order[r]` is the pointer index holding the `r`-th largest weight.
    order: Vec<usize>,
}

fn ascending_energy(energies: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..energies.len()).collect();
    idx.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
    idx
}

impl PointerModel {
    /// Pointer whose outcome `n` spans the eigenstates ranked
    /// `n*lambda .. (n+1)*lambda` in ascending energy.
    pub fn new(h_p: HermitianOperator, beta_p: f64, d_s: usize) -> Result<Self> {
        let lambda = Self::check_dims(&h_p, d_s)?;
        let asc = ascending_energy(h_p.eigenvalues());
        let subspaces = asc.chunks(lambda).map(|c| c.to_vec()).collect();
        Self::with_subspaces(h_p, beta_p, d_s, subspaces)
    }

    /// Pointer with caller-chosen outcome subspaces. They must partition the
    /// pointer levels into `d_s` sets of equal size.
    pub fn with_subspaces(h_p: HermitianOperator, beta_p: f64, d_s: usize, subspaces: Vec<Vec<usize>>) -> Result<Self> {
        let lambda = Self::check_dims(&h_p, d_s)?;
        let d_p = h_p.dim();
        if subspaces.len() != d_s || subspaces.iter().any(|s| s.len() != lambda) {
            return Err(Error::InvalidPointer(format!(
                "need {d_s} outcome subspaces of size {lambda}"
            )));
        }
        let mut seen = vec![false; d_p];
        for &j in subspaces.iter().flatten() {
            if j >= d_p || seen[j] {
                return Err(Error::InvalidPointer(
                    "outcome subspaces do not partition the pointer levels".into(),
                ));
            }
            seen[j] = true;
        }
        let energies = h_p.eigenvalues().to_vec();
        let subspaces = subspaces
            .into_iter()
            .map(|mut s| {
                s.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
                s
            })
            .collect();
        let (weights, _) = thermal_populations(&energies, beta_p)?;
        let mut order: Vec<usize> = (0..d_p).collect();
        order.sort_by(|&a, &b| {
            weights[b]
                .total_cmp(&weights[a])
                .then(energies[a].total_cmp(&energies[b]))
                .then(a.cmp(&b))
        });
        Ok(PointerModel {
            h_p,
            beta_p,
            d_s,
            lambda,
            outcome_subspaces: subspaces,
            weights,
            order,
        })
    }

    /// `n` non-interacting qubits with `H = sum_k -(e_p/2) sigma_z^(k)`.
    /// Bit `k` of a level index is the state of qubit `k`, `0` being the lower level.
    pub fn qubits(n: usize, e_p: f64, beta_p: f64, d_s: usize) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::InvalidPointer(format!("{n} pointer qubits")));
        }
        let energies: Vec<f64> = (0..1usize << n)
            .map(|idx| {
                (0..n)
                    .map(|k| if idx >> k & 1 == 1 { 0.5 * e_p } else { -0.5 * e_p })
                    .sum()
            })
            .collect();
        Self::new(HermitianOperator::diagonal(&energies)?, beta_p, d_s)
    }

    fn check_dims(h_p: &HermitianOperator, d_s: usize) -> Result<usize> {
        let d_p = h_p.dim();
        if d_s == 0 || d_p == 0 || !d_p.is_multiple_of(d_s) {
            return Err(Error::InvalidPointer(format!(
                "pointer dimension {d_p} is not a multiple of {d_s}"
            )));
        }
        Ok(d_p / d_s)
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.h_p
    }

    pub fn beta_p(&self) -> f64 {
        self.beta_p
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_p(&self) -> usize {
        self.h_p.dim()
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn outcome_subspaces(&self) -> &[Vec<usize>] {
        &self.outcome_subspaces
    }

    /// Thermal populations indexed by pointer eigenstate.
    pub fn thermal_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_order(&self) -> &[usize] {
        &self.order
    }

    /// Weight of the `i`-th largest element of group `k`.
    fn group_weight(&self, k: usize, i: usize) -> f64 {
        self.weights[self.order[k * self.lambda + i]]
    }

    /// Pointer index holding the `i`-th largest element of group `k`.
    fn group_index(&self, k: usize, i: usize) -> usize {
        self.order[k * self.lambda + i]
    }
}

/// Sums `A_0, ..., A_{d_S-1}` of the sorted thermal pointer weights.
pub fn group_weights(pointer: &PointerModel) -> Vec<f64> {
    (0..pointer.d_s)
        .map(|k| (0..pointer.lambda).map(|i| pointer.group_weight(k, i)).sum())
        .collect()
}

/// Integer matrix selecting which weight group fills each block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentMatrix {
    d: usize,
    entries: Vec<usize>,
    latin_square: bool,
}

fn is_permutation(vals: impl Iterator<Item = usize>, d: usize) -> bool {
    let mut seen = vec![false; d];
    for v in vals {
        if v >= d || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    seen.iter().all(|&s| s)
}

impl AssignmentMatrix {
    /// Validates that every column is a permutation and the diagonal is zero.
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidAssignment("matrix must be square and non-empty".into()));
        }
        let entries: Vec<usize> = rows.into_iter().flatten().collect();
        for j in 0..d {
            if !is_permutation((0..d).map(|i| entries[i * d + j]), d) {
                return Err(Error::InvalidAssignment(format!("column {j} is not a permutation")));
            }
            if entries[j * d + j] != 0 {
                return Err(Error::InvalidAssignment(format!("diagonal entry {j} is not 0")));
            }
        }
        let latin_square = (0..d).all(|i| is_permutation(entries[i * d..(i + 1) * d].iter().copied(), d));
        Ok(AssignmentMatrix {
            d,
            entries,
            latin_square,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.entries[i * self.d + j]
    }

    pub fn is_latin_square(&self) -> bool {
        self.latin_square
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.entries.chunks(self.d).map(|r| r.to_vec()).collect()
    }
}

/// Assignment of least energy: in each column the leftover groups fill the
/// off-diagonal rows top to bottom, so lower levels receive larger weight.
pub fn assignment_minimal_energy(d_s: usize) -> Result<AssignmentMatrix> {
    if d_s < 2 {
        return Err(Error::InvalidAssignment(format!("d_s = {d_s} < 2")));
    }
    let rows = (0..d_s)
        .map(|i| {
            (0..d_s)
                .map(|j| match i.cmp(&j) {
                    std::cmp::Ordering::Equal => 0,
                    std::cmp::Ordering::Less => i + 1,
                    std::cmp::Ordering::Greater => i,
                })
                .collect()
        })
        .collect();
    AssignmentMatrix::new(rows)
}

/// Cyclic Latin square `(i - j) mod d_s`.
pub fn assignment_min_invasive(d_s: usize) -> Result<AssignmentMatrix> {
    if d_s < 2 {
        return Err(Error::InvalidAssignment(format!("d_s = {d_s} < 2")));
    }
    let rows = (0..d_s)
        .map(|i| (0..d_s).map(|j| (i + d_s - j) % d_s).collect())
        .collect();
    AssignmentMatrix::new(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementChannel {
    pub pointer: PointerModel,
    pub pi: AssignmentMatrix,
    pub group_weights: Vec<f64>,
    /// `q[l][n]`: probability that the system sits in level `l` after outcome `n`.
    pub q: Vec<Vec<f64>>,
    pub c_max: f64,
}

fn check_pi(pointer: &PointerModel, pi: &AssignmentMatrix) -> Result<()> {
    if pi.dim() != pointer.d_s() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{0} assignment", pointer.d_s()),
            got: format!("{0}x{0}", pi.dim()),
        });
    }
    Ok(())
}

pub fn build_channel(pointer: PointerModel, pi: AssignmentMatrix) -> Result<MeasurementChannel> {
    check_pi(&pointer, &pi)?;
    let a = group_weights(&pointer);
    let d = pi.dim();
    let q = (0..d).map(|l| (0..d).map(|n| a[pi.get(l, n)]).collect()).collect();
    Ok(MeasurementChannel {
        c_max: a[0],
        group_weights: a,
        q,
        pointer,
        pi,
    })
}

impl MeasurementChannel {
    /// Projective measurement: a one-level-per-outcome pointer so cold that
    /// every excited weight underflows to zero, giving `q = I` exactly.
    pub fn ideal(d_s: usize) -> Result<Self> {
        let energies: Vec<f64> = (0..d_s).map(|k| k as f64).collect();
        let pointer = PointerModel::new(HermitianOperator::diagonal(&energies)?, 1e3, d_s)?;
        build_channel(pointer, assignment_min_invasive(d_s)?)
    }

    pub fn d_s(&self) -> usize {
        self.pi.dim()
    }

    /// Checks that `basis` can serve as the measured observable.
    pub fn check_basis(&self, basis: &HermitianOperator) -> Result<()> {
        if basis.dim() != self.d_s() {
            return Err(Error::BasisMismatch(format!(
                "channel has {} outcomes, observable has dimension {}",
                self.d_s(),
                basis.dim()
            )));
        }
        let gap = basis.min_gap();
        if gap <= GAP_TOL {
            return Err(Error::DegenerateSpectrum(gap));
        }
        Ok(())
    }

    /// Diagonal system state populations after outcome `n`.
    pub fn column(&self, n: usize) -> Vec<f64> {
        self.q.iter().map(|row| row[n]).collect()
    }
}

/// `rho_n = sum_l q[l][n] |E_l><E_l|` in the basis of `basis`.
pub fn conditional_state(channel: &MeasurementChannel, n: usize, basis: &HermitianOperator) -> Result<ComplexMatrix> {
    let d = channel.d_s();
    if n >= d {
        return Err(Error::OutcomeOutOfRange { n, d });
    }
    channel.check_basis(basis)?;
    Ok(basis.diagonal_in_basis(&channel.column(n)))
}

#[derive(Debug, Clone)]
pub struct JointPostState {
    /// Joint state in the system-eigenbasis x pointer-eigenbasis product basis.
    pub matrix: ComplexMatrix,
    /// `block_map[i][n]`: diagonal weights of the block pairing system level
    /// `i` with outcome `n`, listed along the outcome subspace.
    pub block_map: Vec<Vec<Vec<f64>>>,
    d_s: usize,
    d_p: usize,
    subspaces: Vec<Vec<usize>>,
}

impl JointPostState {
    /// Reads the block structure off an arbitrary joint matrix.
    pub fn from_matrix(matrix: ComplexMatrix, pointer: &PointerModel) -> Result<Self> {
        let (d_s, d_p) = (pointer.d_s(), pointer.d_p());
        if matrix.rows() != d_s * d_p || matrix.cols() != d_s * d_p {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", d_s * d_p),
                got: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        let subspaces = pointer.outcome_subspaces().to_vec();
        let block_map = (0..d_s)
            .map(|i| {
                subspaces
                    .iter()
                    .map(|sub| sub.iter().map(|&j| matrix[(i * d_p + j, i * d_p + j)].re).collect())
                    .collect()
            })
            .collect();
        Ok(JointPostState {
            matrix,
            block_map,
            d_s,
            d_p,
            subspaces,
        })
    }

    /// `Tr[(1 x Pi_n) rho]` for every outcome `n`.
    pub fn outcome_probabilities(&self) -> Vec<f64> {
        self.subspaces
            .iter()
            .map(|sub| {
                let mut acc = 0.0;
                for s in 0..self.d_s {
                    for &j in sub {
                        acc += self.matrix[(s * self.d_p + j, s * self.d_p + j)].re;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn system_marginal_diagonal(&self) -> Vec<f64> {
        (0..self.d_s)
            .map(|s| {
                (0..self.d_p)
                    .map(|j| self.matrix[(s * self.d_p + j, s * self.d_p + j)].re)
                    .sum()
            })
            .collect()
    }
}

/// Post-measurement state for a system that is diagonal in the measured basis.
pub fn build_joint_post_state(p: &[f64], pointer: &PointerModel, pi: &AssignmentMatrix) -> Result<JointPostState> {
    check_pi(pointer, pi)?;
    let (d_s, d_p) = (pointer.d_s(), pointer.d_p());
    if p.len() != d_s {
        return Err(Error::DimensionMismatch {
            expected: format!("{d_s} populations"),
            got: format!("{}", p.len()),
        });
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 || p.iter().any(|&x| x < -1e-14 || !x.is_finite()) {
        return Err(Error::NotNormalized(total));
    }
    let mut diag = vec![0.0; d_s * d_p];
    for m in 0..d_s {
        for n in 0..d_s {
            let g = pi.get(m, n);
            for (i, &psi) in pointer.outcome_subspaces()[n].iter().enumerate() {
                diag[m * d_p + psi] = p[n] * pointer.group_weight(g, i);
            }
        }
    }
    JointPostState::from_matrix(ComplexMatrix::diag_real(&diag), pointer)
}

fn permutation_matrix(n: usize, map: impl Fn(usize) -> usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for src in 0..n {
        m[(map(src), src)] = C64::new(1.0, 0.0);
    }
    m
}

/// Explicit measurement unitary `V * U_tilde` on the product eigenbasis.
///
/// `U_tilde` acts as a pointer permutation controlled by the system level
/// `n`: it moves the `i`-th largest weight of group `pi[m][n]` onto the `i`-th
/// lowest level of outcome subspace `m`. `V` then swaps `|n>|psi_i^(m)>` with
/// `|m>|psi_i^(n)>`, so overall
/// `|n>|order[pi[m][n]*lambda + i]> -> |m>|psi_i^(n)>`.
pub fn build_measurement_unitary(pointer: &PointerModel, pi: &AssignmentMatrix) -> Result<ComplexMatrix> {
    check_pi(pointer, pi)?;
    let (d_s, d_p, lambda) = (pointer.d_s(), pointer.d_p(), pointer.lambda());
    let subs = pointer.outcome_subspaces();
    let dim = d_s * d_p;

    // Where each pointer level sits inside its outcome subspace.
    let mut slot = vec![(0usize, 0usize); d_p];
    for (m, sub) in subs.iter().enumerate() {
        for (i, &j) in sub.iter().enumerate() {
            slot[j] = (m, i);
        }
    }

    let mut u_tilde = ComplexMatrix::zeros(dim, dim);
    for n in 0..d_s {
        for m in 0..d_s {
            let g = pi.get(m, n);
            for i in 0..lambda {
                let src = pointer.group_index(g, i);
                let dst = subs[m][i];
                u_tilde[(n * d_p + dst, n * d_p + src)] = C64::new(1.0, 0.0);
            }
        }
    }
    let v = permutation_matrix(dim, |idx| {
        let (n, j) = (idx / d_p, idx % d_p);
        let (m, i) = slot[j];
        m * d_p + subs[n][i]
    });
    Ok(&v * &u_tilde)
}

/// Joint state `U_meas (rho_S x tau_P) U_meas†` on the product eigenbasis.
pub fn apply_measurement(
    rho_s: &ComplexMatrix,
    h_s: &HermitianOperator,
    pointer: &PointerModel,
    pi: &AssignmentMatrix,
) -> Result<ComplexMatrix> {
    let (_, initial) = initial_joint(rho_s, h_s, pointer)?;
    let u = build_measurement_unitary(pointer, pi)?;
    Ok(u.conjugate_by(&initial))
}

fn initial_joint(
    rho_s: &ComplexMatrix,
    h_s: &HermitianOperator,
    pointer: &PointerModel,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let d_s = pointer.d_s();
    if h_s.dim() != d_s || rho_s.rows() != d_s || rho_s.cols() != d_s {
        return Err(Error::DimensionMismatch {
            expected: format!("system dimension {d_s}"),
            got: format!("state {}x{}, Hamiltonian {}", rho_s.rows(), rho_s.cols(), h_s.dim()),
        });
    }
    let r = h_s.to_eigenbasis(rho_s);
    let tau = ComplexMatrix::diag_real(pointer.thermal_weights());
    Ok((r.clone(), kron(&r, &tau)))
}

fn total_energies(h_s: &HermitianOperator, pointer: &PointerModel) -> Vec<f64> {
    let ep = pointer.hamiltonian().eigenvalues();
    h_s.eigenvalues()
        .iter()
        .flat_map(|&es| ep.iter().map(move |&e| es + e))
        .collect()
}

/// `Tr[(H_S + H_P)(rho_SP_after - rho_S x tau_P)]` through the explicit unitary.
pub fn measurement_energy_cost(
    rho_s: &ComplexMatrix,
    h_s: &HermitianOperator,
    pointer: &PointerModel,
    pi: &AssignmentMatrix,
) -> Result<f64> {
    let (_, initial) = initial_joint(rho_s, h_s, pointer)?;
    let u = build_measurement_unitary(pointer, pi)?;
    let after = u.conjugate_by(&initial);
    let e = total_energies(h_s, pointer);
    Ok(e.iter()
        .enumerate()
        .map(|(k, ek)| ek * (after[(k, k)].re - initial[(k, k)].re))
        .sum())
}

/// Same cost from the block formula; valid for states diagonal in the
/// measured basis with populations `p`.
pub fn measurement_energy_cost_blocks(
    p: &[f64],
    h_s: &HermitianOperator,
    pointer: &PointerModel,
    pi: &AssignmentMatrix,
) -> Result<f64> {
    if h_s.dim() != pointer.d_s() {
        return Err(Error::DimensionMismatch {
            expected: format!("system dimension {}", pointer.d_s()),
            got: format!("{}", h_s.dim()),
        });
    }
    let joint = build_joint_post_state(p, pointer, pi)?;
    let e = total_energies(h_s, pointer);
    let w = pointer.thermal_weights();
    let d_p = pointer.d_p();
    let after: f64 = (0..e.len()).map(|k| e[k] * joint.matrix[(k, k)].re).sum();
    let before: f64 = (0..e.len()).map(|k| e[k] * p[k / d_p] * w[k % d_p]).sum();
    Ok(after - before)
}

/// Probability that the pointer outcome matches the system level.
pub fn correlation_value(joint: &JointPostState) -> f64 {
    let mut c = 0.0;
    for (i, sub) in joint.subspaces.iter().enumerate() {
        for &j in sub {
            c += joint.matrix[(i * joint.d_p + j, i * joint.d_p + j)].re;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_examples() {
        assert_eq!(
            assignment_minimal_energy(3).unwrap().rows(),
            vec![vec![0, 1, 1], vec![1, 0, 2], vec![2, 2, 0]]
        );
        assert_eq!(
            assignment_min_invasive(3).unwrap().rows(),
            vec![vec![0, 2, 1], vec![1, 0, 2], vec![2, 1, 0]]
        );
        assert_eq!(
            assignment_minimal_energy(2).unwrap(),
            assignment_min_invasive(2).unwrap()
        );
        assert!(!assignment_minimal_energy(3).unwrap().is_latin_square());
        assert!(assignment_min_invasive(4).unwrap().is_latin_square());
    }

    #[test]
    fn prose_rule_is_rejected() {
        // Filling lower-left entries with the column index breaks unbiasedness.
        let r = AssignmentMatrix::new(vec![vec![0, 1, 1], vec![0, 0, 2], vec![0, 1, 0]]);
        assert!(matches!(r, Err(Error::InvalidAssignment(_))));
    }

    #[test]
    fn ideal_channel_is_identity() {
        let ch = MeasurementChannel::ideal(3).unwrap();
        for l in 0..3 {
            for n in 0..3 {
                assert_eq!(ch.q[l][n], if l == n { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn subspaces_must_partition() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let bad = PointerModel::with_subspaces(h, 1.0, 2, vec![vec![0, 1], vec![1, 2]]);
        assert!(matches!(bad, Err(Error::InvalidPointer(_))));
    }

    #[test]
    fn unitary_is_permutation() {
        let p = PointerModel::qubits(2, 0.3, 1.0, 2).unwrap();
        let u = build_measurement_unitary(&p, &assignment_min_invasive(2).unwrap()).unwrap();
        assert!(u.unitarity_error() == 0.0);
    }
}
