//! Circuit plans: ordered gate descriptors with a parameter vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{gx2, gx4, gy2, gy4, gz2};
use crate::statevector::{GateMatrix, StateVector};
use crate::subspace::{enumerate_branch, Bitstring, Branch, SubspaceBasis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    Gy2 {
        i: usize,
        j: usize,
    },
    Gx2 {
        i: usize,
        j: usize,
    },
    Gy4 {
        i: usize,
        j: usize,
        k: usize,
        r: usize,
    },
    Gx4 {
        i: usize,
        j: usize,
        k: usize,
        r: usize,
    },
    Gz2 {
        i: usize,
        j: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// `X` on every qubit.
    XLayer,
    /// Negates the amplitude of one basis state.
    SignFlip {
        basis: u64,
    },
    Fixed {
        matrix: GateMatrix,
        targets: Vec<usize>,
    },
}

impl GateKind {
    pub fn is_parametrized(&self) -> bool {
        matches!(
            self,
            GateKind::Gy2 { .. }
                | GateKind::Gx2 { .. }
                | GateKind::Gy4 { .. }
                | GateKind::Gx4 { .. }
                | GateKind::Gz2 { .. }
        )
    }

    /// Qubits touched by the gate (empty for whole-register gates).
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            GateKind::Gy2 { i, j } | GateKind::Gx2 { i, j } | GateKind::Gz2 { i, j } => {
                vec![*i, *j]
            }
            GateKind::Gy4 { i, j, k, r } | GateKind::Gx4 { i, j, k, r } => vec![*i, *j, *k, *r],
            GateKind::Cnot { control, target } => vec![*control, *target],
            GateKind::Fixed { targets, .. } => targets.clone(),
            GateKind::XLayer | GateKind::SignFlip { .. } => Vec::new(),
        }
    }

    /// Real in the computational basis for every angle.
    pub fn is_real(&self) -> bool {
        match self {
            GateKind::Gx2 { .. } | GateKind::Gx4 { .. } | GateKind::Gz2 { .. } => false,
            GateKind::Fixed { matrix, .. } => matrix.max_imag() == 0.0,
            _ => true,
        }
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let qubits = self.qubits();
        for (n, &q) in qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(Error::TargetOutOfRange {
                    index: q,
                    num_qubits,
                });
            }
            if qubits[..n].contains(&q) {
                return Err(Error::DuplicateTarget(q));
            }
        }
        match self {
            GateKind::Gy4 { i, j, k, r } | GateKind::Gx4 { i, j, k, r } if i > j || k > r => {
                Err(Error::Unsupported(format!(
                    "four-qubit gate needs i < j and k < r, got ({i},{j})({k},{r})"
                )))
            }
            GateKind::Fixed { matrix, targets } if matrix.arity() != targets.len() => {
                Err(Error::ArityMismatch {
                    arity: matrix.arity(),
                    targets: targets.len(),
                })
            }
            GateKind::SignFlip { basis } if num_qubits < 64 && *basis >> num_qubits != 0 => {
                Err(Error::TargetOutOfRange {
                    index: 64 - basis.leading_zeros() as usize - 1,
                    num_qubits,
                })
            }
            _ => Ok(()),
        }
    }

    /// Applies the gate at angle `alpha` (ignored by fixed gates).
    pub fn apply(&self, psi: &mut StateVector, alpha: f64) -> Result<()> {
        match self {
            GateKind::Gy2 { i, j } => psi.apply_gate(&gy2(alpha), &[*i, *j]),
            GateKind::Gx2 { i, j } => psi.apply_gate(&gx2(alpha), &[*i, *j]),
            GateKind::Gz2 { i, j } => psi.apply_gate(&gz2(alpha), &[*i, *j]),
            GateKind::Gy4 { i, j, k, r } => psi.apply_gate(&gy4(alpha), &[*i, *j, *k, *r]),
            GateKind::Gx4 { i, j, k, r } => psi.apply_gate(&gx4(alpha), &[*i, *j, *k, *r]),
            GateKind::Cnot { control, target } => {
                psi.apply_gate(&GateMatrix::cnot(), &[*control, *target])
            }
            GateKind::XLayer => {
                psi.apply_global_flip();
                Ok(())
            }
            GateKind::SignFlip { basis } => {
                let b = *basis as usize;
                if b >= psi.dim() {
                    return Err(Error::TargetOutOfRange {
                        index: b,
                        num_qubits: psi.num_qubits(),
                    });
                }
                psi.amplitudes_mut()[b] = -psi.amplitudes()[b];
                Ok(())
            }
            GateKind::Fixed { matrix, targets } => psi.apply_gate(matrix, targets),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDescriptor {
    #[serde(flatten)]
    pub kind: GateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_slot: Option<usize>,
}

impl GateDescriptor {
    pub fn fixed(kind: GateKind) -> Self {
        Self {
            kind,
            param_slot: None,
        }
    }

    pub fn parametrized(kind: GateKind, slot: usize) -> Self {
        Self {
            kind,
            param_slot: Some(slot),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlanMode {
    /// Complex gate set reaching every unit vector of the branch.
    FullUnitary,
    /// Real Givens rotations plus a reflection bit.
    Orthogonal,
}

/// An ordered gate list. The component bit, when set, applies a sign flip on
/// `component_flip` after every other gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitPlan {
    num_qubits: usize,
    gates: Vec<GateDescriptor>,
    num_params: usize,
    #[serde(default)]
    component_bit: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    component_flip: Option<u64>,
}

impl CircuitPlan {
    pub fn new(num_qubits: usize, gates: Vec<GateDescriptor>, num_params: usize) -> Result<Self> {
        let mut used = vec![false; num_params];
        for g in &gates {
            g.kind.validate(num_qubits)?;
            match (g.param_slot, g.kind.is_parametrized()) {
                (Some(slot), true) => {
                    if slot >= num_params {
                        return Err(Error::ParameterCount {
                            expected: num_params,
                            found: slot + 1,
                        });
                    }
                    if used[slot] {
                        return Err(Error::Unsupported(format!(
                            "parameter slot {slot} used twice"
                        )));
                    }
                    used[slot] = true;
                }
                (None, false) => {}
                (Some(_), false) => {
                    return Err(Error::Unsupported(
                        "fixed gate given a parameter slot".into(),
                    ));
                }
                (None, true) => {
                    return Err(Error::Unsupported(
                        "parametrized gate without a parameter slot".into(),
                    ));
                }
            }
        }
        Ok(Self {
            num_qubits,
            gates,
            num_params,
            component_bit: 0,
            component_flip: None,
        })
    }

    /// Declares the basis state negated when the component bit is set.
    pub fn with_component_flip(mut self, basis: u64) -> Result<Self> {
        GateKind::SignFlip { basis }.validate(self.num_qubits)?;
        self.component_flip = Some(basis);
        Ok(self)
    }

    pub fn with_component_bit(mut self, bit: u8) -> Result<Self> {
        if bit > 1 {
            return Err(Error::Unsupported(format!(
                "component bit must be 0 or 1, got {bit}"
            )));
        }
        if bit == 1 && self.component_flip.is_none() {
            return Err(Error::Unsupported("plan has no second component".into()));
        }
        self.component_bit = bit;
        Ok(self)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateDescriptor] {
        &self.gates
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_parametrized_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.param_slot.is_some()).count()
    }

    pub fn component_bit(&self) -> u8 {
        self.component_bit
    }

    pub fn component_flip(&self) -> Option<u64> {
        self.component_flip
    }

    /// Rotation angles plus the binary component choice, if the plan has one.
    pub fn num_trainable(&self) -> usize {
        self.num_params + usize::from(self.component_flip.is_some())
    }

    pub fn is_real(&self) -> bool {
        self.gates.iter().all(|g| g.kind.is_real())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Unsupported(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: CircuitPlan =
            serde_json::from_str(s).map_err(|e| Error::Unsupported(e.to_string()))?;
        let mut plan = CircuitPlan::new(raw.num_qubits, raw.gates, raw.num_params)?;
        if let Some(b) = raw.component_flip {
            plan = plan.with_component_flip(b)?;
        }
        plan.with_component_bit(raw.component_bit)
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params {
            return Err(Error::ParameterCount {
                expected: self.num_params,
                found: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("circuit parameter"));
        }
        Ok(())
    }

    /// Runs every gate on `psi` in order.
    pub fn apply(&self, psi: &mut StateVector, params: &[f64]) -> Result<()> {
        self.check_params(params)?;
        if psi.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: psi.num_qubits(),
            });
        }
        for g in &self.gates {
            let alpha = g.param_slot.map_or(0.0, |s| params[s]);
            g.kind.apply(psi, alpha)?;
        }
        if let (1, Some(basis)) = (self.component_bit, self.component_flip) {
            GateKind::SignFlip { basis }.apply(psi, 0.0)?;
        }
        Ok(())
    }
}

/// Parametrized plan exploring the weight-2 branch from `|reference_state>`
/// (ones at sites 0 and 1). Gate order: four-qubit rotations, then rotations
/// on `(0, a)`, then on `(1, a)`, then (full mode) `G_Z(1, 2)`.
pub fn build_n1_plan(num_sites: usize, mode: PlanMode) -> Result<CircuitPlan> {
    if num_sites < 4 || num_sites % 2 != 0 {
        return Err(Error::InvalidRingSize(num_sites, 4));
    }
    let full = mode == PlanMode::FullUnitary;
    let mut kinds = Vec::new();
    for a in 2..num_sites {
        for b in a + 1..num_sites {
            kinds.push(GateKind::Gy4 {
                i: 0,
                j: 1,
                k: a,
                r: b,
            });
            if full {
                kinds.push(GateKind::Gx4 {
                    i: 0,
                    j: 1,
                    k: a,
                    r: b,
                });
            }
        }
    }
    for i in 0..2 {
        for a in 2..num_sites {
            kinds.push(GateKind::Gy2 { i, j: a });
            if full {
                kinds.push(GateKind::Gx2 { i, j: a });
            }
        }
    }
    if full {
        kinds.push(GateKind::Gz2 { i: 1, j: 2 });
    }
    let num_params = kinds.len();
    let gates = kinds
        .into_iter()
        .enumerate()
        .map(|(slot, kind)| GateDescriptor::parametrized(kind, slot))
        .collect();
    let plan = CircuitPlan::new(num_sites, gates, num_params)?;
    match mode {
        PlanMode::FullUnitary => Ok(plan),
        PlanMode::Orthogonal => {
            let last = Bitstring::pair(num_sites, num_sites - 2, num_sites - 1);
            plan.with_component_flip(last.bits())
        }
    }
}

/// Only level 1 has a constructed exploration circuit.
pub fn build_level_plan(num_sites: usize, n: usize, mode: PlanMode) -> Result<CircuitPlan> {
    match n {
        1 => build_n1_plan(num_sites, mode),
        _ => Err(Error::Unsupported(format!(
            "level n = {n} exploration circuit is not constructed in this artifact"
        ))),
    }
}

/// `|reference_state>` of the level-1 plans.
pub fn n1_reference(num_sites: usize) -> Bitstring {
    Bitstring::pair(num_sites, 0, 1)
}

/// Applies `plan` to `|reference>`.
pub fn explore_state(
    plan: &CircuitPlan,
    params: &[f64],
    reference: Bitstring,
) -> Result<StateVector> {
    if reference.len() != plan.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: plan.num_qubits(),
            found: reference.len(),
        });
    }
    let mut psi = StateVector::basis(plan.num_qubits(), reference.index());
    plan.apply(&mut psi, params)?;
    Ok(psi)
}

/// A parametrized gate restricted to a branch, written as
/// `R(alpha) = P0 + cos(alpha) Pc + sin(alpha) Ps` (real, row-major).
#[derive(Debug, Clone)]
pub(crate) struct RestrictedGate {
    pub slot: usize,
    p0: Vec<f64>,
    pc: Vec<f64>,
    ps: Vec<f64>,
}

impl RestrictedGate {
    fn matrix(&self, alpha: f64, dim: usize) -> Vec<f64> {
        let (s, c) = alpha.sin_cos();
        (0..dim * dim)
            .map(|k| self.p0[k] + c * self.pc[k] + s * self.ps[k])
            .collect()
    }

    /// Coefficients `(a, b, c)` of `u^T R(alpha) v = a + b cos + c sin`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> (f64, f64, f64) {
        let dim = v.len();
        let form = |m: &[f64]| -> f64 {
            (0..dim)
                .map(|r| u[r] * (0..dim).map(|c| m[r * dim + c] * v[c]).sum::<f64>())
                .sum()
        };
        (form(&self.p0), form(&self.pc), form(&self.ps))
    }
}

/// An orthogonal-mode plan acting on the real coordinates of one branch.
#[derive(Debug, Clone)]
pub(crate) struct RestrictedCircuit {
    pub dim: usize,
    pub gates: Vec<RestrictedGate>,
    /// Position of the component-flip member, if any.
    pub flip: Option<usize>,
}

impl RestrictedCircuit {
    /// Restricts a real plan to `basis`. Fails when a gate leaks out of the
    /// branch or is complex.
    pub fn new(plan: &CircuitPlan, basis: &SubspaceBasis) -> Result<Self> {
        if !plan.is_real() {
            return Err(Error::Unsupported(
                "restricted fitting needs a real plan".into(),
            ));
        }
        let dim = basis.len();
        let mut gates = Vec::new();
        for g in plan.gates() {
            let slot = g.param_slot.ok_or_else(|| {
                Error::Unsupported("restricted plans take parametrized gates only".into())
            })?;
            let at = |alpha: f64| -> Result<Vec<f64>> {
                let mut m = vec![0.0; dim * dim];
                for (col, member) in basis.members.iter().enumerate() {
                    let mut psi = StateVector::basis(plan.num_qubits(), member.index());
                    g.kind.apply(&mut psi, alpha)?;
                    let mut captured = 0.0;
                    for (row, m_row) in basis.members.iter().enumerate() {
                        let a = psi.amplitudes()[m_row.index()];
                        m[row * dim + col] = a.re;
                        captured += a.norm_sqr();
                    }
                    if (captured - 1.0).abs() > 1e-10 {
                        return Err(Error::Unsupported("gate leaks out of the branch".into()));
                    }
                }
                Ok(m)
            };
            let r0 = at(0.0)?;
            let rh = at(std::f64::consts::FRAC_PI_2)?;
            let rp = at(std::f64::consts::PI)?;
            let p0: Vec<f64> = r0.iter().zip(&rp).map(|(a, b)| 0.5 * (a + b)).collect();
            let pc: Vec<f64> = r0.iter().zip(&rp).map(|(a, b)| 0.5 * (a - b)).collect();
            let ps: Vec<f64> = rh.iter().zip(&p0).map(|(a, b)| a - b).collect();
            gates.push(RestrictedGate { slot, p0, pc, ps });
        }
        let flip = match plan.component_flip() {
            Some(b) => Some(
                basis
                    .position(Bitstring::new(b, plan.num_qubits()))
                    .ok_or(Error::ReferenceOutsideBranch(b))?,
            ),
            None => None,
        };
        Ok(Self { dim, gates, flip })
    }

    pub fn apply_gate(&self, k: usize, alpha: f64, v: &[f64]) -> Vec<f64> {
        let m = self.gates[k].matrix(alpha, self.dim);
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| m[r * self.dim + c] * v[c]).sum())
            .collect()
    }

    pub fn apply_gate_transpose(&self, k: usize, alpha: f64, u: &[f64]) -> Vec<f64> {
        let m = self.gates[k].matrix(alpha, self.dim);
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| m[r * self.dim + c] * u[r]).sum())
            .collect()
    }

    /// Full restricted action on `v`, including the component flip.
    pub fn apply(&self, params: &[f64], component_bit: u8, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        for (k, g) in self.gates.iter().enumerate() {
            out = self.apply_gate(k, params[g.slot], &out);
        }
        if let (1, Some(f)) = (component_bit, self.flip) {
            out[f] = -out[f];
        }
        out
    }
}

/// Branch of the level-1 plans.
pub fn n1_branch(num_sites: usize) -> Result<SubspaceBasis> {
    enumerate_branch(num_sites, 1, Branch::W)
}
