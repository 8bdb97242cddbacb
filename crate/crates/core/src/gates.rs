//! The parametrized gate set used to explore a degenerate branch.
//!
//! Every gate is built by simulating its circuit diagram on a local register
//! (first drawn gate applied first), so the matrices carry whatever sign
//! conventions the diagrams imply. Conventions: `Ry(t) = exp(-i t Y/2)`,
//! `Rz(t) = exp(-i t Z/2)`, open controls fire on `|0>`.
//!
//! Local qubit order: a two-qubit gate on `(i, j)` has `i` as local bit 0;
//! a four-qubit gate on `(i, j, k, r)` has local bits 0..3 in that order.

use std::f64::consts::FRAC_PI_4;

use crate::error::Result;
use crate::statevector::{GateMatrix, StateVector, C64, ZERO};

/// `G_Y(i, j)`: real Givens rotation on `span{|01>, |10>}`.
pub fn gy2(alpha: f64) -> GateMatrix {
    GateMatrix::from_circuit(2, |psi| givens_y(psi, alpha, 0, 1)).expect("G_Y is unitary")
}

/// `G_X(i, j)`: `G_Y` conjugated by opposite `Rz(pi/4)` rotations.
pub fn gx2(alpha: f64) -> GateMatrix {
    GateMatrix::from_circuit(2, |psi| givens_x(psi, alpha, 0, 1)).expect("G_X is unitary")
}

/// `G_Z(i, j) = Rz(-alpha)_i Rz(alpha)_j`.
pub fn gz2(alpha: f64) -> GateMatrix {
    GateMatrix::from_circuit(2, |psi| {
        psi.apply_gate(&GateMatrix::rz(-alpha), &[0])?;
        psi.apply_gate(&GateMatrix::rz(alpha), &[1])
    })
    .expect("G_Z is unitary")
}

/// `G_Y(i,j)(k,r)`: rotates the weight-2 pattern `{i, j}` into `{k, r}`.
pub fn gy4(alpha: f64) -> GateMatrix {
    four_qubit(alpha, gy2)
}

/// `G_X(i,j)(k,r)`: as [`gy4`] with the inner `G_X`.
pub fn gx4(alpha: f64) -> GateMatrix {
    four_qubit(alpha, gx2)
}

fn givens_y(psi: &mut StateVector, alpha: f64, a: usize, b: usize) -> Result<()> {
    let h = GateMatrix::hadamard();
    psi.apply_gate(&h, &[a])?;
    psi.apply_gate(&h, &[b])?;
    psi.apply_gate(&GateMatrix::cz(), &[a, b])?;
    psi.apply_gate(&GateMatrix::ry(-alpha), &[a])?;
    psi.apply_gate(&GateMatrix::ry(alpha), &[b])?;
    psi.apply_gate(&GateMatrix::cz(), &[a, b])?;
    psi.apply_gate(&h, &[a])?;
    psi.apply_gate(&h, &[b])
}

fn givens_x(psi: &mut StateVector, alpha: f64, a: usize, b: usize) -> Result<()> {
    psi.apply_gate(&GateMatrix::rz(-FRAC_PI_4), &[a])?;
    psi.apply_gate(&GateMatrix::rz(FRAC_PI_4), &[b])?;
    givens_y(psi, alpha, a, b)?;
    psi.apply_gate(&GateMatrix::rz(FRAC_PI_4), &[a])?;
    psi.apply_gate(&GateMatrix::rz(-FRAC_PI_4), &[b])
}

/// CNOT that fires when `control` is `|0>`.
fn open_cnot(psi: &mut StateVector, control: usize, target: usize) -> Result<()> {
    psi.apply_gate(&GateMatrix::pauli_x(), &[control])?;
    psi.apply_gate(&GateMatrix::cnot(), &[control, target])?;
    psi.apply_gate(&GateMatrix::pauli_x(), &[control])
}

/// Embeds a two-qubit `inner` on local bits (1, 2) of a four-qubit register,
/// active only when bits 0 and 3 are both set.
fn doubly_controlled(inner: &GateMatrix) -> GateMatrix {
    const CONTROLS: usize = 0b1001;
    let mut entries = vec![ZERO; 256];
    for col in 0..16 {
        if col & CONTROLS != CONTROLS {
            entries[col * 16 + col] = C64::new(1.0, 0.0);
            continue;
        }
        let inner_col = (col >> 1) & 0b11;
        for inner_row in 0..4 {
            let row = (col & CONTROLS) | (inner_row << 1);
            entries[row * 16 + col] = inner.entry(inner_row, inner_col);
        }
    }
    GateMatrix::new(4, entries).expect("controlled unitary is unitary")
}

fn four_qubit(alpha: f64, inner: fn(f64) -> GateMatrix) -> GateMatrix {
    let controlled = doubly_controlled(&inner(alpha));
    GateMatrix::from_circuit(4, |psi| {
        open_cnot(psi, 1, 0)?;
        open_cnot(psi, 2, 3)?;
        psi.apply_gate(&controlled, &[0, 1, 2, 3])?;
        open_cnot(psi, 1, 0)?;
        open_cnot(psi, 2, 3)
    })
    .expect("four-qubit Givens gate is unitary")
}
