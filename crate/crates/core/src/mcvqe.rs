//! Multistate-contracted eigensolver on an adiabatically evolved branch.
//!
//! Every branch member `w` is sent through `|w> -> phi_inverse_0 ->
//! (1 +- X)/sqrt(2) -> U`, the target Hamiltonian is measured on the evolved
//! span, and the small matrix is diagonalized classically. The circuit
//! parameters realizing a Ritz vector on hardware come from
//! [`fit_parameters`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use crate::adiabatic::{evolve, Schedule};
use crate::circuit::{CircuitPlan, RestrictedCircuit};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::linalg::jacobi_eigen;
use crate::statevector::{StateVector, C64};
use crate::subspace::{
    apply_parity_sector, phi_inverse_circuit, Bitstring, Branch, Parity, SubspaceBasis,
};

const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// How the off-diagonal entries `E_ml` are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixMethod {
    /// Energies of the overlap states `(w_m +- w_l)/sqrt(2)`, each sent
    /// through the pipeline: `E_ml = (E+ - E-)/2`.
    OverlapStates,
    /// `Re <U psi_m| HT |U psi_l>` from one evolution per member.
    #[default]
    Direct,
}

/// Real symmetric `E_ml` over one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceMatrix {
    pub entries: Vec<Vec<f64>>,
}

impl SubspaceMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn asymmetry(&self) -> f64 {
        crate::linalg::asymmetry(&self.entries)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Unsupported(format!("csv: {e}"));
        w.write_record(["m", "l", "value"]).map_err(io)?;
        for (m, row) in self.entries.iter().enumerate() {
            for (l, x) in row.iter().enumerate() {
                w.write_record([m.to_string(), l.to_string(), format!("{x:.15e}")])
                    .map_err(io)?;
            }
        }
        w.flush()
            .map_err(|e| Error::Unsupported(format!("csv: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructedEigenpair {
    pub energy: f64,
    /// Coefficients over the branch basis; first nonzero entry positive.
    pub coefficients: Vec<f64>,
    pub level_rank: usize,
}

/// Rejects Hamiltonians with terms that do not commute with the global flip.
fn check_flip_symmetric(h: &Hamiltonian) -> Result<()> {
    if h.terms()
        .iter()
        .any(|t| t.string.z_mask().count_ones() % 2 != 0)
    {
        return Err(Error::Unsupported(
            "pipeline needs Hamiltonians commuting with the global spin flip".into(),
        ));
    }
    Ok(())
}

/// `U (1 +- X)/sqrt(2) phi_inverse_0 |input>` for `input` in the weight
/// branch.
pub fn pipeline_state(
    input: &StateVector,
    parity: Parity,
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    sched: &Schedule,
) -> Result<StateVector> {
    let ladder = phi_inverse_circuit(input.num_qubits(), 0)?;
    let mut psi = input.clone();
    ladder.apply(&mut psi, &[])?;
    let psi = apply_parity_sector(&psi, parity)?;
    evolve(&psi, h0, ht, sched)
}

/// [`pipeline_state`] on a basis string.
pub fn pipeline_basis_state(
    w: Bitstring,
    parity: Parity,
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    sched: &Schedule,
) -> Result<StateVector> {
    pipeline_state(
        &StateVector::basis(w.len(), w.index()),
        parity,
        h0,
        ht,
        sched,
    )
}

/// `U phi_inverse_0 |w>` for every member of a weight branch. Both parity
/// sectors follow from these through [`sector_state`], since the global flip
/// commutes with the evolution.
pub fn evolve_branch(
    basis: &SubspaceBasis,
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    sched: &Schedule,
) -> Result<Vec<StateVector>> {
    if basis.branch != Branch::W {
        return Err(Error::Unsupported(
            "evolve_branch takes a weight branch".into(),
        ));
    }
    check_flip_symmetric(h0)?;
    check_flip_symmetric(ht)?;
    basis
        .members
        .iter()
        .map(|w| {
            let b0 = w.phi_inverse_0()?;
            evolve(&StateVector::basis(w.len(), b0.index()), h0, ht, sched)
        })
        .collect()
}

/// `(psi +- X psi)/sqrt(2)` without the branch-support check.
pub fn sector_state(evolved: &StateVector, parity: Parity) -> StateVector {
    let mut flipped = evolved.clone();
    flipped.apply_global_flip();
    let mut out = evolved.clone();
    out.add_scaled(C64::new(parity.sign(), 0.0), &flipped)
        .expect("same register");
    out.scale(C64::new(FRAC_1_SQRT_2, 0.0));
    out
}

/// `E_ml` over `basis` in the given parity sector.
pub fn build_subspace_matrix(
    basis: &SubspaceBasis,
    parity: Parity,
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    sched: &Schedule,
    method: MatrixMethod,
) -> Result<SubspaceMatrix> {
    if basis.is_empty() {
        return Err(Error::Empty("branch"));
    }
    match method {
        MatrixMethod::Direct => {
            let states: Vec<StateVector> = evolve_branch(basis, h0, ht, sched)?
                .iter()
                .map(|s| sector_state(s, parity))
                .collect();
            direct_matrix(&states, ht)
        }
        MatrixMethod::OverlapStates => overlap_matrix(basis, parity, h0, ht, sched),
    }
}

/// `E_ml = Re <psi_m| HT |psi_l>`
pub fn direct_matrix(states: &[StateVector], ht: &Hamiltonian) -> Result<SubspaceMatrix> {
    let h_states: Vec<StateVector> = states.iter().map(|s| ht.apply(s)).collect::<Result<_>>()?;
    let d = states.len();
    let mut entries = vec![vec![0.0; d]; d];
    for m in 0..d {
        for l in m..d {
            let a = states[m].inner(&h_states[l])?.re;
            let b = states[l].inner(&h_states[m])?.re;
            entries[m][l] = 0.5 * (a + b);
            entries[l][m] = entries[m][l];
        }
    }
    Ok(SubspaceMatrix { entries })
}

fn overlap_matrix(
    basis: &SubspaceBasis,
    parity: Parity,
    h0: &Hamiltonian,
    ht: &Hamiltonian,
    sched: &Schedule,
) -> Result<SubspaceMatrix> {
    let l_sites = ht.num_sites();
    let energy = |input: &StateVector| -> Result<f64> {
        pipeline_state(input, parity, h0, ht, sched)?.expectation(ht)
    };
    let member = |k: usize| StateVector::basis(l_sites, basis.members[k].index());
    let d = basis.len();
    let mut entries = vec![vec![0.0; d]; d];
    for m in 0..d {
        entries[m][m] = energy(&member(m))?;
        for l in m + 1..d {
            let mut plus = member(m);
            plus.add_scaled(C64::new(1.0, 0.0), &member(l))?;
            plus.scale(C64::new(FRAC_1_SQRT_2, 0.0));
            let mut minus = member(m);
            minus.add_scaled(C64::new(-1.0, 0.0), &member(l))?;
            minus.scale(C64::new(FRAC_1_SQRT_2, 0.0));
            let e = 0.5 * (energy(&plus)? - energy(&minus)?);
            entries[m][l] = e;
            entries[l][m] = e;
        }
    }
    Ok(SubspaceMatrix { entries })
}

/// Ascending Ritz pairs of `mat`.
pub fn diagonalize_subspace(mat: &SubspaceMatrix) -> Result<Vec<ReconstructedEigenpair>> {
    let eig = jacobi_eigen(&mat.entries, SYMMETRY_TOLERANCE)?;
    Ok(eig
        .eigenvalues
        .into_iter()
        .zip(eig.eigenvectors)
        .enumerate()
        .map(
            |(level_rank, (energy, coefficients))| ReconstructedEigenpair {
                energy,
                coefficients,
                level_rank,
            },
        )
        .collect())
}

/// `sum_l c_l |states_l>`
pub fn reconstruct(pair: &ReconstructedEigenpair, states: &[StateVector]) -> Result<StateVector> {
    let first = states.first().ok_or(Error::Empty("evolved branch"))?;
    if states.len() != pair.coefficients.len() {
        return Err(Error::DimensionMismatch {
            expected: pair.coefficients.len(),
            found: states.len(),
        });
    }
    let mut out =
        StateVector::from_amplitudes(first.num_qubits(), vec![C64::new(0.0, 0.0); first.dim()])?;
    for (c, s) in pair.coefficients.iter().zip(states) {
        out.add_scaled(C64::new(*c, 0.0), s)?;
    }
    Ok(out)
}

/// A branch solved in one parity sector.
#[derive(Debug, Clone)]
pub struct BranchSolution {
    pub basis: SubspaceBasis,
    pub parity: Parity,
    /// Evolved sector states, one per basis member.
    pub states: Vec<StateVector>,
    pub matrix: SubspaceMatrix,
    pub pairs: Vec<ReconstructedEigenpair>,
}

impl BranchSolution {
    /// Builds the sector solution from the output of [`evolve_branch`].
    pub fn from_evolved(
        basis: &SubspaceBasis,
        parity: Parity,
        evolved: &[StateVector],
        ht: &Hamiltonian,
    ) -> Result<Self> {
        let states: Vec<StateVector> = evolved.iter().map(|s| sector_state(s, parity)).collect();
        let matrix = direct_matrix(&states, ht)?;
        let pairs = diagonalize_subspace(&matrix)?;
        Ok(Self {
            basis: basis.clone(),
            parity,
            states,
            matrix,
            pairs,
        })
    }

    /// Prepared state for Ritz level `rank`.
    pub fn prepared(&self, rank: usize) -> Result<StateVector> {
        let pair = self.pairs.get(rank).ok_or(Error::LevelIndexOutOfRange {
            index: rank,
            size: self.pairs.len(),
        })?;
        reconstruct(pair, &self.states)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub seed: u64,
    /// Starting points tried per component; the first is all zeros.
    pub restarts: usize,
    pub max_sweeps: usize,
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 20,
            max_sweeps: 50,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub params: Vec<f64>,
    pub component_bit: u8,
    pub loss: f64,
    pub sweeps: usize,
}

/// Minimizes `1 - sum_l c_l a_l(alpha)` over the angles of a real plan, with
/// `a_l` the amplitudes of `explore_state(plan, alpha, reference)` on
/// `basis`. Each coordinate is solved exactly; starting points are the zero
/// vector and seeded random angles, for both components of the plan.
pub fn fit_parameters(
    target: &[f64],
    plan: &CircuitPlan,
    basis: &SubspaceBasis,
    reference: Bitstring,
    options: &FitOptions,
) -> Result<FitResult> {
    if target.len() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: target.len(),
        });
    }
    let norm = target.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    let start = basis
        .position(reference)
        .ok_or(Error::ReferenceOutsideBranch(reference.bits()))?;
    let rc = RestrictedCircuit::new(plan, basis)?;
    let mut v0 = vec![0.0; basis.len()];
    v0[start] = 1.0;

    let bits: &[u8] = if rc.flip.is_some() { &[0, 1] } else { &[0] };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<FitResult> = None;
    for restart in 0..options.restarts.max(1) {
        let init: Vec<f64> = if restart == 0 {
            vec![0.0; plan.num_params()]
        } else {
            (0..plan.num_params())
                .map(|_| rng.gen_range(-PI..PI))
                .collect()
        };
        for &bit in bits {
            let fit = descend(&rc, target, &v0, init.clone(), bit, options);
            if best.as_ref().map_or(true, |b| fit.loss < b.loss) {
                best = Some(fit);
            }
        }
        if best.as_ref().is_some_and(|b| b.loss < options.tolerance) {
            break;
        }
    }
    Ok(best.expect("at least one restart"))
}

fn overlap_of(rc: &RestrictedCircuit, target: &[f64], v0: &[f64], params: &[f64], bit: u8) -> f64 {
    rc.apply(params, bit, v0)
        .iter()
        .zip(target)
        .map(|(a, c)| a * c)
        .sum()
}

fn descend(
    rc: &RestrictedCircuit,
    target: &[f64],
    v0: &[f64],
    mut params: Vec<f64>,
    bit: u8,
    options: &FitOptions,
) -> FitResult {
    let mut adjoint_seed = target.to_vec();
    if let (1, Some(f)) = (bit, rc.flip) {
        adjoint_seed[f] = -adjoint_seed[f];
    }
    let mut loss = 1.0 - overlap_of(rc, target, v0, &params, bit);
    let mut sweeps = 0;
    while sweeps < options.max_sweeps && loss >= options.tolerance {
        let mut prefix = Vec::with_capacity(rc.gates.len() + 1);
        prefix.push(v0.to_vec());
        for (k, g) in rc.gates.iter().enumerate() {
            let next = rc.apply_gate(k, params[g.slot], prefix.last().expect("nonempty"));
            prefix.push(next);
        }
        let mut u = adjoint_seed.clone();
        for k in (0..rc.gates.len()).rev() {
            let (_, b, c) = rc.gates[k].bilinear(&u, &prefix[k]);
            let alpha = c.atan2(b);
            params[rc.gates[k].slot] = alpha;
            u = rc.apply_gate_transpose(k, alpha, &u);
        }
        sweeps += 1;
        let next = 1.0 - overlap_of(rc, target, v0, &params, bit);
        let stalled = loss - next < 1e-15;
        loss = next;
        if stalled {
            break;
        }
    }
    FitResult {
        params,
        component_bit: bit,
        loss,
        sweeps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_n1_plan, n1_branch, n1_reference, PlanMode};
    use crate::hamiltonian::Couplings;
    use crate::subspace::enumerate_branch;

    #[test]
    fn reference_target_needs_no_rotation() {
        let plan = build_n1_plan(4, PlanMode::Orthogonal).unwrap();
        let basis = n1_branch(4).unwrap();
        let mut target = vec![0.0; basis.len()];
        target[basis.position(n1_reference(4)).unwrap()] = 1.0;
        let fit = fit_parameters(
            &target,
            &plan,
            &basis,
            n1_reference(4),
            &FitOptions::default(),
        )
        .unwrap();
        assert!(fit.loss.abs() < 1e-12);
        assert!(fit.params.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn fit_rejects_unnormalized_target() {
        let plan = build_n1_plan(4, PlanMode::Orthogonal).unwrap();
        let basis = n1_branch(4).unwrap();
        let err = fit_parameters(
            &[1.0; 6],
            &plan,
            &basis,
            n1_reference(4),
            &FitOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotNormalized(_)));
    }

    #[test]
    fn negated_member_uses_component_bit() {
        let plan = build_n1_plan(4, PlanMode::Orthogonal).unwrap();
        let basis = n1_branch(4).unwrap();
        let mut target = vec![0.0; 6];
        target[5] = -1.0;
        let fit = fit_parameters(
            &target,
            &plan,
            &basis,
            n1_reference(4),
            &FitOptions::default(),
        )
        .unwrap();
        assert!(fit.loss < 1e-8, "loss {}", fit.loss);
    }

    #[test]
    fn scalar_matrix_for_level_zero() {
        let l = 4;
        let h0 = Hamiltonian::bsap_initial(l, 1.0).unwrap();
        let ht = Hamiltonian::xyz(l, Couplings::from_ratios(1.0, 0.4, 0.5)).unwrap();
        let sched = Schedule::for_ring(l);
        let basis = enumerate_branch(l, 0, Branch::W).unwrap();
        let m = build_subspace_matrix(
            &basis,
            Parity::Plus,
            &h0,
            &ht,
            &sched,
            MatrixMethod::OverlapStates,
        )
        .unwrap();
        let psi = pipeline_basis_state(basis.members[0], Parity::Plus, &h0, &ht, &sched).unwrap();
        assert_eq!(m.dim(), 1);
        assert!((m.entries[0][0] - psi.expectation(&ht).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn diagonal_matrix_pairs() {
        let m = SubspaceMatrix {
            entries: vec![vec![2.0, 0.0], vec![0.0, -1.0]],
        };
        let pairs = diagonalize_subspace(&m).unwrap();
        assert_eq!(pairs[0].energy, -1.0);
        assert_eq!(pairs[0].coefficients, vec![0.0, 1.0]);
        assert_eq!(pairs[1].level_rank, 1);
    }
}
