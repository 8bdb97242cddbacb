//! Dense exact diagonalization used as the verification oracle, plus a
//! symmetry-blocked solver for Hamiltonians that commute with the global
//! spin flip and the Z-parity.

use nalgebra::{DMatrix, SymmetricEigen};
use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use crate::statevector::{StateVector, C64, ZERO};
use crate::subspace::Parity;

/// Register size above which dense diagonalization is refused.
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Relative gap below which neighbouring eigenvalues form one cluster.
pub const DEFAULT_CLUSTER_TOLERANCE: f64 = 1e-8;

const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Ascending spectrum with orthonormal eigenvectors grouped into
/// near-degenerate clusters.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<C64>>,
    cluster_tolerance: f64,
    clusters: Vec<Range<usize>>,
}

impl EigenSolution {
    fn from_pairs(mut pairs: Vec<(f64, Vec<C64>)>, cluster_tolerance: f64) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, v) in pairs.iter_mut() {
            fix_phase(v);
        }
        let (eigenvalues, eigenvectors): (Vec<f64>, Vec<Vec<C64>>) = pairs.into_iter().unzip();
        let clusters = cluster_ranges(&eigenvalues, cluster_tolerance);
        Self {
            eigenvalues,
            eigenvectors,
            cluster_tolerance,
            clusters,
        }
    }

    /// Union of spectra on orthogonal subspaces, re-sorted and re-clustered.
    pub fn merge(parts: Vec<EigenSolution>, cluster_tolerance: f64) -> Self {
        let pairs = parts
            .into_iter()
            .flat_map(|p| p.eigenvalues.into_iter().zip(p.eigenvectors))
            .collect();
        Self::from_pairs(pairs, cluster_tolerance)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, index: usize) -> &[C64] {
        &self.eigenvectors[index]
    }

    pub fn cluster_tolerance(&self) -> f64 {
        self.cluster_tolerance
    }

    pub fn clusters(&self) -> &[Range<usize>] {
        &self.clusters
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(|r| r.len()).collect()
    }

    /// Representative eigenvalue (the mean) of each cluster.
    pub fn cluster_values(&self) -> Vec<f64> {
        self.clusters
            .iter()
            .map(|r| self.eigenvalues[r.clone()].iter().sum::<f64>() / r.len() as f64)
            .collect()
    }

    /// Cluster id of every eigenvalue, in ascending order.
    pub fn cluster_ids(&self) -> Vec<usize> {
        let mut ids = vec![0; self.len()];
        for (id, r) in self.clusters.iter().enumerate() {
            ids[r.clone()].iter_mut().for_each(|x| *x = id);
        }
        ids
    }

    /// Eigen-index range of the cluster that contains eigenvalue `index`.
    pub fn cluster_of(&self, index: usize) -> Result<Range<usize>> {
        self.clusters
            .iter()
            .find(|r| r.contains(&index))
            .cloned()
            .ok_or(Error::LevelIndexOutOfRange {
                index,
                size: self.len(),
            })
    }

    /// Eigen-index range of the `rank`-th distinct level.
    pub fn cluster_by_rank(&self, rank: usize) -> Result<Range<usize>> {
        self.clusters
            .get(rank)
            .cloned()
            .ok_or(Error::LevelIndexOutOfRange {
                index: rank,
                size: self.clusters.len(),
            })
    }

    /// `||P psi||` for the projector onto the eigenvectors in `range`.
    pub fn projected_norm(&self, psi: &StateVector, range: Range<usize>) -> Result<f64> {
        self.check_dim(psi)?;
        Ok(self.eigenvectors[range]
            .iter()
            .map(|v| overlap(v, psi.amplitudes()).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// `||(1 - P) psi||` for the projector onto the eigenvectors in `range`,
    /// computed from the explicit residual vector.
    pub fn outside_norm(&self, psi: &StateVector, range: Range<usize>) -> Result<f64> {
        self.check_dim(psi)?;
        let mut residual = psi.amplitudes().to_vec();
        for v in &self.eigenvectors[range] {
            let c = overlap(v, psi.amplitudes());
            for (r, vi) in residual.iter_mut().zip(v) {
                *r -= c * vi;
            }
        }
        Ok(residual.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt())
    }

    /// `P psi`
    pub fn project(&self, psi: &StateVector, range: Range<usize>) -> Result<StateVector> {
        self.check_dim(psi)?;
        let mut out = vec![ZERO; psi.dim()];
        for v in &self.eigenvectors[range] {
            let c = overlap(v, psi.amplitudes());
            for (o, vi) in out.iter_mut().zip(v) {
                *o += c * vi;
            }
        }
        StateVector::from_amplitudes(psi.num_qubits(), out)
    }

    /// `max_k ||H v_k - lambda_k v_k||`
    pub fn max_residual(&self, h: &Hamiltonian) -> Result<f64> {
        let mut worst = 0.0f64;
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let psi = StateVector::from_amplitudes(h.num_sites(), v.clone())?;
            let hv = h.apply(&psi)?;
            let r: f64 = hv
                .amplitudes()
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lambda * b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// `max |<v_i|v_j> - delta_ij|`
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.eigenvectors.iter().enumerate() {
            for (j, b) in self.eigenvectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((overlap(a, b) - target).norm());
            }
        }
        worst
    }

    fn check_dim(&self, psi: &StateVector) -> Result<()> {
        let dim = self.eigenvectors.first().map_or(0, |v| v.len());
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.dim(),
            });
        }
        Ok(())
    }
}

/// Full dense diagonalization of `h`.
pub fn dense_eigensolve(h: &Hamiltonian, cluster_tolerance: f64) -> Result<EigenSolution> {
    if h.num_sites() > DENSE_QUBIT_LIMIT {
        return Err(Error::TooLarge {
            what: "dense diagonalization",
            num_qubits: h.num_sites(),
            limit: DENSE_QUBIT_LIMIT,
        });
    }
    eigensolve_matrix(h.to_dense(), cluster_tolerance)
}

/// Diagonalizes an explicit Hermitian matrix.
pub fn eigensolve_matrix(m: DMatrix<C64>, cluster_tolerance: f64) -> Result<EigenSolution> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    let mut deviation = 0.0f64;
    let mut max_imag = 0.0f64;
    for r in 0..n {
        for c in r..n {
            deviation = deviation.max((m[(r, c)] - m[(c, r)].conj()).norm());
            max_imag = max_imag.max(m[(r, c)].im.abs());
        }
    }
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitian { deviation });
    }
    let pairs = if max_imag == 0.0 {
        real_pairs(m.map(|z| z.re))
    } else {
        complex_pairs(m)
    };
    Ok(EigenSolution::from_pairs(pairs, cluster_tolerance))
}

fn real_pairs(m: DMatrix<f64>) -> Vec<(f64, Vec<C64>)> {
    let eig = SymmetricEigen::new(m);
    eig.eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&l, v)| (l, v.iter().map(|&x| C64::new(x, 0.0)).collect()))
        .collect()
}

fn complex_pairs(m: DMatrix<C64>) -> Vec<(f64, Vec<C64>)> {
    let eig = SymmetricEigen::new(m);
    eig.eigenvalues
        .iter()
        .zip(eig.eigenvectors.column_iter())
        .map(|(&l, v)| (l, v.iter().copied().collect()))
        .collect()
}

/// Diagonalizes `h` inside one sector of the global spin flip
/// `X^{(x) L}`, splitting further by Z-parity into two independent blocks.
///
/// Eigenvectors are returned embedded in the full `2^L` space; the spectrum
/// holds `2^(L-1)` eigenvalues.
pub fn sector_eigensolve(
    h: &Hamiltonian,
    parity: Parity,
    cluster_tolerance: f64,
) -> Result<EigenSolution> {
    let l = h.num_sites();
    if l > DENSE_QUBIT_LIMIT + 1 {
        return Err(Error::TooLarge {
            what: "sector diagonalization",
            num_qubits: l,
            limit: DENSE_QUBIT_LIMIT + 1,
        });
    }
    if l % 2 != 0 {
        return Err(Error::InvalidRingSize(l, 2));
    }
    let flip = PauliString::from_letters(&vec![crate::pauli::Pauli::X; l]);
    let zpar = PauliString::from_letters(&vec![crate::pauli::Pauli::Z; l]);
    if !h
        .terms()
        .iter()
        .all(|t| t.string.commutes_with(&flip) && t.string.commutes_with(&zpar))
    {
        return Err(Error::Unsupported(
            "sector diagonalization needs a Hamiltonian commuting with the spin flip and Z-parity"
                .into(),
        ));
    }
    let sigma = parity.sign();
    let mut pairs = Vec::with_capacity(1 << (l - 1));
    for zeven in [true, false] {
        let reps: Vec<u64> = (0..1u64 << l)
            .filter(|b| b & 1 == 0 && (b.count_ones() % 2 == 0) == zeven)
            .collect();
        if reps.is_empty() {
            continue;
        }
        let position: HashMap<u64, usize> = reps.iter().enumerate().map(|(k, &b)| (b, k)).collect();
        let all = (1u64 << l) - 1;
        let m = reps.len();
        let mut block = DMatrix::<C64>::zeros(m, m);
        for (col, &b) in reps.iter().enumerate() {
            for t in h.terms() {
                let (image, phase) = t.string.apply_to_basis(b);
                let amp = t.coefficient * phase;
                if image & 1 == 0 {
                    block[(position[&image], col)] += amp;
                } else {
                    block[(position[&(image ^ all)], col)] += sigma * amp;
                }
            }
        }
        let block_pairs = if h.is_real() {
            real_pairs(block.map(|z| z.re))
        } else {
            complex_pairs(block)
        };
        for (lambda, v) in block_pairs {
            let mut full = vec![ZERO; 1 << l];
            for (k, &b) in reps.iter().enumerate() {
                full[b as usize] += v[k] * FRAC_1_SQRT_2;
                full[(b ^ all) as usize] += v[k] * (sigma * FRAC_1_SQRT_2);
            }
            pairs.push((lambda, full));
        }
    }
    Ok(EigenSolution::from_pairs(pairs, cluster_tolerance))
}

fn overlap(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn cluster_ranges(values: &[f64], tolerance: f64) -> Vec<Range<usize>> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        let split = k == values.len()
            || values[k] - values[k - 1] > tolerance * values[k - 1].abs().max(1.0);
        if split {
            clusters.push(start..k);
            start = k;
        }
    }
    clusters
}

/// First component above 1e-10 in magnitude is made real positive.
fn fix_phase(v: &mut [C64]) {
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-10).copied() {
        let rot = first.conj() / first.norm();
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Couplings;

    #[test]
    fn clustering_groups_close_values() {
        let r = cluster_ranges(&[-1.0, -1.0 + 1e-12, 0.0, 2.0, 2.0], 1e-8);
        assert_eq!(r, vec![0..2, 2..3, 3..5]);
    }

    #[test]
    fn identity_scaled_is_one_cluster() {
        let h = Hamiltonian::constant(3, 2.5);
        let sol = dense_eigensolve(&h, DEFAULT_CLUSTER_TOLERANCE).unwrap();
        assert_eq!(sol.cluster_sizes(), vec![8]);
        assert!(sol.eigenvalues().iter().all(|&l| (l - 2.5).abs() < 1e-12));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::<C64>::zeros(2, 2);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            eigensolve_matrix(m, DEFAULT_CLUSTER_TOLERANCE),
            Err(Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn too_large_rejected() {
        let h = Hamiltonian::bsap_initial(14, 1.0).unwrap();
        assert!(matches!(
            dense_eigensolve(&h, DEFAULT_CLUSTER_TOLERANCE),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn xyz_residuals_small() {
        let h = Hamiltonian::xyz(4, Couplings::new(0.3, 0.1, 1.0)).unwrap();
        let sol = dense_eigensolve(&h, DEFAULT_CLUSTER_TOLERANCE).unwrap();
        assert!(sol.max_residual(&h).unwrap() < 1e-9);
        assert!(sol.orthonormality_deviation() < 1e-10);
    }

    #[test]
    fn sector_spectra_partition_the_full_spectrum() {
        let h = Hamiltonian::xyz(6, Couplings::new(0.7, 0.4, 1.0)).unwrap();
        let full = dense_eigensolve(&h, DEFAULT_CLUSTER_TOLERANCE).unwrap();
        let plus = sector_eigensolve(&h, Parity::Plus, DEFAULT_CLUSTER_TOLERANCE).unwrap();
        let minus = sector_eigensolve(&h, Parity::Minus, DEFAULT_CLUSTER_TOLERANCE).unwrap();
        let mut merged: Vec<f64> = plus
            .eigenvalues()
            .iter()
            .chain(minus.eigenvalues())
            .copied()
            .collect();
        merged.sort_by(f64::total_cmp);
        for (a, b) in merged.iter().zip(full.eigenvalues()) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(plus.max_residual(&h).unwrap() < 1e-9);
        assert!(minus.orthonormality_deviation() < 1e-10);
        // every sector vector is an eigenvector of the spin flip
        for k in 0..plus.len() {
            let v = plus.eigenvector(k);
            let all = v.len() - 1;
            for b in 0..v.len() {
                assert!((v[b] - v[b ^ all]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn sector_solver_requires_symmetry() {
        let h = Hamiltonian::ap_initial(4, 1.0).unwrap();
        assert!(sector_eigensolve(&h, Parity::Plus, DEFAULT_CLUSTER_TOLERANCE).is_err());
    }

    #[test]
    fn outside_norm_of_eigenvector_is_zero() {
        let h = Hamiltonian::xyz(4, Couplings::new(0.5, 0.5, 1.0)).unwrap();
        let sol = dense_eigensolve(&h, DEFAULT_CLUSTER_TOLERANCE).unwrap();
        let v = StateVector::from_amplitudes(4, sol.eigenvector(3).to_vec()).unwrap();
        let cluster = sol.cluster_of(3).unwrap();
        assert!(sol.outside_norm(&v, cluster.clone()).unwrap() < 1e-10);
        assert!((sol.projected_norm(&v, cluster).unwrap() - 1.0).abs() < 1e-10);
    }
}
