//! Dense complex statevectors and gate application.
//!
//! Qubit 0 is the least significant bit of the basis index throughout the
//! crate: amplitude `k` belongs to the state whose qubit `j` equals bit `j`
//! of `k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        assert!(num_qubits <= MAX_QUBITS, "register too large");
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[index] = ONE;
        Self {
            num_qubits,
            amplitudes,
        }
    }

    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooLarge {
                what: "statevector",
                num_qubits,
                limit: MAX_QUBITS,
            });
        }
        if amplitudes.len() != 1 << num_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << num_qubits,
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    pub fn from_real(num_qubits: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(
            num_qubits,
            amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect(),
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm; a zero vector is left untouched.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }

    pub fn scale(&mut self, factor: C64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    /// `self += factor * other`
    pub fn add_scaled(&mut self, factor: C64, other: &StateVector) -> Result<()> {
        self.check_same_size(other)?;
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += factor * b;
        }
        Ok(())
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same_size(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.check_same_size(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Largest |imaginary part| over all amplitudes.
    pub fn max_imag(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.im.abs())
            .fold(0.0, f64::max)
    }

    /// `<self|H|self>`; the imaginary part vanishes for Hermitian `H`.
    pub fn expectation(&self, h: &Hamiltonian) -> Result<f64> {
        if h.num_sites() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: h.num_sites(),
                found: self.num_qubits,
            });
        }
        let hpsi = h.apply(self)?;
        Ok(self.inner(&hpsi)?.re)
    }

    fn check_same_size(&self, other: &StateVector) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: other.num_qubits,
            });
        }
        Ok(())
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for (n, &t) in targets.iter().enumerate() {
            if t >= self.num_qubits {
                return Err(Error::TargetOutOfRange {
                    index: t,
                    num_qubits: self.num_qubits,
                });
            }
            if targets[..n].contains(&t) {
                return Err(Error::DuplicateTarget(t));
            }
        }
        Ok(())
    }

    /// Applies `gate` in place. `targets[t]` is the register qubit carried by
    /// bit `t` of the gate's local index.
    pub fn apply_gate(&mut self, gate: &GateMatrix, targets: &[usize]) -> Result<()> {
        if gate.arity() != targets.len() {
            return Err(Error::ArityMismatch {
                arity: gate.arity(),
                targets: targets.len(),
            });
        }
        self.check_targets(targets)?;

        let local_dim = gate.dim();
        let offsets: Vec<usize> = (0..local_dim)
            .map(|local| {
                targets
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| local >> t & 1 == 1)
                    .map(|(_, &q)| 1usize << q)
                    .sum()
            })
            .collect();
        let mask: usize = targets.iter().map(|&q| 1usize << q).sum();

        let mut buf = vec![ZERO; local_dim];
        for base in (0..self.amplitudes.len()).filter(|b| b & mask == 0) {
            for (slot, off) in buf.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let entries = &gate.entries[row * local_dim..(row + 1) * local_dim];
                self.amplitudes[base | off] = entries.iter().zip(&buf).map(|(m, v)| m * v).sum();
            }
        }
        Ok(())
    }

    /// By-value form of [`StateVector::apply_gate`].
    pub fn with_gate(mut self, gate: &GateMatrix, targets: &[usize]) -> Result<Self> {
        self.apply_gate(gate, targets)?;
        Ok(self)
    }

    /// Applies the Pauli string itself (not its exponential).
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let mut out = vec![ZERO; self.amplitudes.len()];
        for (b, a) in self.amplitudes.iter().enumerate() {
            let (image, phase) = p.apply_to_basis(b as u64);
            out[image as usize] = phase * a;
        }
        self.amplitudes = out;
    }

    /// Applies `exp(-i theta P)` in place using `cos(theta) - i sin(theta) P`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) {
        let (s, c) = theta.sin_cos();
        let minus_i_s = C64::new(0.0, -s);
        let x = p.x_mask() as usize;
        if x == 0 {
            for (b, a) in self.amplitudes.iter_mut().enumerate() {
                *a *= c + minus_i_s * p.phase(b as u64);
            }
            return;
        }
        for b in 0..self.amplitudes.len() {
            let partner = b ^ x;
            if partner < b {
                continue;
            }
            let ab = self.amplitudes[b];
            let ap = self.amplitudes[partner];
            // P|partner> = phase(partner)|b>, P|b> = phase(b)|partner>
            self.amplitudes[b] = c * ab + minus_i_s * p.phase(partner as u64) * ap;
            self.amplitudes[partner] = c * ap + minus_i_s * p.phase(b as u64) * ab;
        }
    }

    /// Applies the global spin flip `X^{(x) L}`.
    pub fn apply_global_flip(&mut self) {
        let all = self.amplitudes.len() - 1;
        let flipped: Vec<C64> = (0..self.amplitudes.len())
            .map(|b| self.amplitudes[b ^ all])
            .collect();
        self.amplitudes = flipped;
    }

    /// Probability mass on basis states selected by `keep`.
    pub fn weight_where(&self, keep: impl Fn(usize) -> bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| keep(*b))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// A unitary acting on 1 to 4 qubits, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGate", into = "RawGate")]
pub struct GateMatrix {
    arity: usize,
    entries: Vec<C64>,
}

pub const UNITARY_TOLERANCE: f64 = 1e-12;

#[derive(Serialize, Deserialize)]
struct RawGate {
    arity: usize,
    entries: Vec<C64>,
}

impl TryFrom<RawGate> for GateMatrix {
    type Error = Error;
    fn try_from(raw: RawGate) -> Result<Self> {
        GateMatrix::new(raw.arity, raw.entries)
    }
}

impl From<GateMatrix> for RawGate {
    fn from(g: GateMatrix) -> Self {
        RawGate {
            arity: g.arity,
            entries: g.entries,
        }
    }
}

impl GateMatrix {
    pub fn new(arity: usize, entries: Vec<C64>) -> Result<Self> {
        let g = Self::new_unchecked(arity, entries)?;
        let deviation = g.unitarity_deviation();
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(g)
    }

    /// Builds the matrix without the unitarity check; intermediate products
    /// of unitary factors are checked once at the end instead.
    pub(crate) fn new_unchecked(arity: usize, entries: Vec<C64>) -> Result<Self> {
        if !(1..=4).contains(&arity) {
            return Err(Error::Unsupported(format!(
                "gate arity {arity} not in 1..=4"
            )));
        }
        let dim = 1usize << arity;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self { arity, entries })
    }

    pub fn from_real(arity: usize, entries: &[f64]) -> Result<Self> {
        Self::new(arity, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn identity(arity: usize) -> Self {
        let dim = 1usize << arity;
        let mut entries = vec![ZERO; dim * dim];
        (0..dim).for_each(|k| entries[k * dim + k] = ONE);
        Self { arity, entries }
    }

    pub fn pauli_x() -> Self {
        Self::from_real(1, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn hadamard() -> Self {
        let h = FRAC_1_SQRT_2;
        Self::from_real(1, &[h, h, h, -h]).unwrap()
    }

    /// `exp(-i theta Y / 2)`
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::from_real(1, &[c, -s, s, c]).unwrap()
    }

    /// `exp(-i theta Z / 2)`
    pub fn rz(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self {
            arity: 1,
            entries: vec![C64::new(c, -s), ZERO, ZERO, C64::new(c, s)],
        }
    }

    pub fn cz() -> Self {
        Self::diagonal(2, &[ONE, ONE, ONE, -ONE])
    }

    /// CNOT with local qubit 0 as control and local qubit 1 as target.
    pub fn cnot() -> Self {
        // local index = control + 2 * target
        Self::from_real(
            2,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0,
            ],
        )
        .unwrap()
    }

    pub fn diagonal(arity: usize, diag: &[C64]) -> Self {
        let dim = 1usize << arity;
        assert_eq!(diag.len(), dim);
        let mut entries = vec![ZERO; dim * dim];
        for (k, d) in diag.iter().enumerate() {
            entries[k * dim + k] = *d;
        }
        Self { arity, entries }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn matmul(&self, rhs: &GateMatrix) -> GateMatrix {
        assert_eq!(self.arity, rhs.arity);
        let dim = self.dim();
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[r * dim + c] = (0..dim).map(|k| self.entry(r, k) * rhs.entry(k, c)).sum();
            }
        }
        GateMatrix {
            arity: self.arity,
            entries,
        }
    }

    pub fn adjoint(&self) -> GateMatrix {
        let dim = self.dim();
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[c * dim + r] = self.entry(r, c).conj();
            }
        }
        GateMatrix {
            arity: self.arity,
            entries,
        }
    }

    /// `max |(U^dagger U - 1)_{rc}|`
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.adjoint().matmul(self);
        let dim = self.dim();
        let mut worst = 0.0f64;
        for r in 0..dim {
            for c in 0..dim {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((prod.entry(r, c) - target).norm());
            }
        }
        worst
    }

    pub fn max_imag(&self) -> f64 {
        self.entries.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }

    /// Builds the matrix column by column by simulating `circuit` on local
    /// basis states of an `arity`-qubit register.
    pub(crate) fn from_circuit(
        arity: usize,
        circuit: impl Fn(&mut StateVector) -> Result<()>,
    ) -> Result<Self> {
        let dim = 1usize << arity;
        let mut entries = vec![ZERO; dim * dim];
        for col in 0..dim {
            let mut psi = StateVector::basis(arity, col);
            circuit(&mut psi)?;
            for (row, a) in psi.amplitudes().iter().enumerate() {
                entries[row * dim + col] = *a;
            }
        }
        Self::new(arity, entries)
    }

    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_state(num_qubits: usize, seed: u64) -> StateVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1 << num_qubits)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let mut s = StateVector::from_amplitudes(num_qubits, amps).unwrap();
        s.normalize();
        s
    }

    #[test]
    fn identity_leaves_state_unchanged() {
        let psi = random_state(3, 1);
        let out = psi
            .clone()
            .with_gate(&GateMatrix::identity(2), &[0, 2])
            .unwrap();
        assert!(psi.distance(&out).unwrap() < 1e-15);
    }

    #[test]
    fn x_on_qubit_zero_sets_lowest_bit() {
        let out = StateVector::zero(2)
            .with_gate(&GateMatrix::pauli_x(), &[0])
            .unwrap();
        assert_eq!(out.amplitudes()[1], ONE);
        assert_eq!(out.norm_sqr(), 1.0);
    }

    #[test]
    fn hadamard_squared_is_identity() {
        let psi = random_state(4, 7);
        let out = psi
            .clone()
            .with_gate(&GateMatrix::hadamard(), &[1])
            .unwrap()
            .with_gate(&GateMatrix::hadamard(), &[1])
            .unwrap();
        assert!(psi.distance(&out).unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_targets() {
        let mut psi = StateVector::zero(2);
        assert_eq!(
            psi.apply_gate(&GateMatrix::cz(), &[1, 1]),
            Err(Error::DuplicateTarget(1))
        );
        assert!(matches!(
            psi.apply_gate(&GateMatrix::hadamard(), &[2]),
            Err(Error::TargetOutOfRange { index: 2, .. })
        ));
        assert!(matches!(
            psi.apply_gate(&GateMatrix::cz(), &[0]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn cnot_target_order() {
        // control qubit 1 set, target qubit 0 flips: |10> (index 2) -> |11> (index 3)
        let out = StateVector::basis(2, 2)
            .with_gate(&GateMatrix::cnot(), &[1, 0])
            .unwrap();
        assert_eq!(out.amplitudes()[3], ONE);
    }

    #[test]
    fn inner_products() {
        let psi = random_state(3, 3);
        assert!((psi.inner(&psi).unwrap() - ONE).norm() < 1e-12);
        let a = StateVector::basis(2, 0b01);
        let b = StateVector::basis(2, 0b10);
        assert_eq!(a.inner(&b).unwrap(), ZERO);
        let plus = StateVector::zero(1)
            .with_gate(&GateMatrix::hadamard(), &[0])
            .unwrap();
        let zero = StateVector::zero(1);
        assert!((plus.inner(&zero).unwrap().re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(
            a.inner(&StateVector::zero(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        assert!(matches!(
            GateMatrix::from_real(1, &[1.0, 1.0, 0.0, 1.0]),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn pauli_rotation_matches_dense_exponential() {
        let p = PauliString::parse("XYZ").unwrap();
        let theta = 0.37;
        let psi = random_state(3, 11);
        let mut rotated = psi.clone();
        rotated.apply_pauli_rotation(&p, theta);
        let mut ppsi = psi.clone();
        ppsi.apply_pauli(&p);
        let mut expected = psi.clone();
        expected.scale(C64::new(theta.cos(), 0.0));
        expected
            .add_scaled(C64::new(0.0, -theta.sin()), &ppsi)
            .unwrap();
        assert!(rotated.distance(&expected).unwrap() < 1e-14);
        assert!((rotated.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_unitaries_preserve_norm_and_commute_on_disjoint_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..20 {
            let a = GateMatrix::ry(rng.gen_range(-3.0..3.0))
                .matmul(&GateMatrix::rz(rng.gen_range(-3.0..3.0)));
            let b = GateMatrix::cz().matmul(&GateMatrix::cnot());
            let psi = random_state(4, 100 + trial);
            let ab = psi
                .clone()
                .with_gate(&a, &[0])
                .unwrap()
                .with_gate(&b, &[3, 1])
                .unwrap();
            let ba = psi
                .clone()
                .with_gate(&b, &[3, 1])
                .unwrap()
                .with_gate(&a, &[0])
                .unwrap();
            assert!(ab.distance(&ba).unwrap() < 1e-12);
            assert!((ab.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn global_flip_maps_index_to_complement() {
        let mut psi = StateVector::basis(4, 0b0110);
        psi.apply_global_flip();
        assert_eq!(psi.amplitudes()[0b1001], ONE);
    }
}
