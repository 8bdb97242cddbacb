//! Checks against independently built references: Kronecker-product
//! Hamiltonians, brute-force bit arithmetic and closed-form spectra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use bsap::adiabatic::{evolve, spectral_flow, unit_grid, Schedule, SteppingMode};
use bsap::circuit::{build_n1_plan, explore_state, n1_branch, n1_reference, GateKind, PlanMode};
use bsap::eigen::{dense_eigensolve, sector_eigensolve};
use bsap::mcvqe::{
    build_subspace_matrix, fit_parameters, pipeline_basis_state, FitOptions, MatrixMethod,
};
use bsap::subspace::{binomial, enumerate_branch, parity_expectation, phi_inverse_circuit};
use bsap::*;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli(p: char) -> DMatrix<Complex64> {
    let o = c(0.0);
    let e = c(1.0);
    match p {
        'I' => DMatrix::from_row_slice(2, 2, &[e, o, o, e]),
        'X' => DMatrix::from_row_slice(2, 2, &[o, e, e, o]),
        'Y' => DMatrix::from_row_slice(2, 2, &[o, -I, I, o]),
        'Z' => DMatrix::from_row_slice(2, 2, &[e, o, o, -e]),
        _ => unreachable!(),
    }
}

/// Operator with `p` on sites `a` and `b`; site 0 is the least significant
/// tensor factor.
fn two_site(l: usize, a: usize, b: usize, p: char) -> DMatrix<Complex64> {
    let mut m = DMatrix::from_element(1, 1, c(1.0));
    for site in (0..l).rev() {
        let f = if site == a || site == b {
            pauli(p)
        } else {
            pauli('I')
        };
        m = m.kronecker(&f);
    }
    m
}

fn dense_xyz(l: usize, jx: f64, jy: f64, jz: f64) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(1 << l, 1 << l);
    for i in 0..l {
        let j = (i + 1) % l;
        h -= two_site(l, i, j, 'X') * c(jx)
            + two_site(l, i, j, 'Y') * c(jy)
            + two_site(l, i, j, 'Z') * c(jz);
    }
    h
}

#[test]
fn hamiltonian_matches_kronecker_construction() {
    for l in [4, 6] {
        let (jx, jy, jz) = (0.7, 0.3, 1.2);
        let h = Hamiltonian::xyz(l, Couplings::new(jx, jy, jz)).unwrap();
        let reference = dense_xyz(l, jx, jy, jz);
        assert!((h.to_dense() - &reference).camax() < 1e-12);

        let psi = StateVector::from_amplitudes(
            l,
            (0..1 << l)
                .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 0.11).cos()))
                .collect(),
        )
        .unwrap();
        let applied = h.apply(&psi).unwrap();
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        let expected = &reference * v;
        for (a, b) in applied.amplitudes().iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn interpolation_is_linear_in_the_schedule_weight() {
    let l = 4;
    let ht = Hamiltonian::xyz(l, Couplings::from_ratios(1.0, 0.6, 0.5)).unwrap();
    let h0 = Hamiltonian::bsap_initial(l, 1.0).unwrap();
    for s in [0.0, 0.3, 1.0] {
        let h = Hamiltonian::interpolate(&h0, &ht, s, ScheduleFunction::Linear).unwrap();
        let expected = h0.to_dense() * c(1.0 - s) + ht.to_dense() * c(s);
        assert!((h.to_dense() - expected).camax() < 1e-12);
    }
}

#[test]
fn phi_inverse_circuit_matches_the_formula_on_every_basis_state() {
    for l in [4, 6, 8] {
        for branch in [0u8, 1] {
            let plan = phi_inverse_circuit(l, branch).unwrap();
            for b in 0..1u64 << l {
                let w = Bitstring::new(b, l);
                // suffix parity: bit j = XOR of bits j..L-1
                let mut expected = 0u64;
                for j in 0..l {
                    let parity = (j..l).filter(|&k| b >> k & 1 == 1).count() % 2;
                    expected |= (parity as u64) << j;
                }
                if branch == 1 {
                    expected ^= (1 << l) - 1;
                }
                let mut psi = StateVector::basis(l, b as usize);
                plan.apply(&mut psi, &[]).unwrap();
                assert!(
                    (psi.amplitudes()[expected as usize] - c(1.0)).norm() < 1e-14,
                    "L={l} b={b:b}"
                );
                if w.hamming_weight() % 2 == 0 {
                    let formula = if branch == 0 {
                        w.phi_inverse_0()
                    } else {
                        w.phi_inverse_1()
                    };
                    let inv = formula.unwrap();
                    assert_eq!(inv.bits(), expected);
                    assert_eq!(inv.phi(), w);
                }
            }
        }
    }
}

#[test]
fn domain_wall_map_is_two_to_one_onto_even_weight() {
    for l in [4, 6, 8] {
        let mut hits = vec![0usize; 1 << l];
        for b in 0..1u64 << l {
            let image = Bitstring::new(b, l).phi();
            assert_eq!(image.hamming_weight() % 2, 0);
            assert_eq!(image, Bitstring::new(b, l).complement().phi());
            hits[image.index()] += 1;
        }
        for (w, &h) in hits.iter().enumerate() {
            let expected = if w.count_ones() % 2 == 0 { 2 } else { 0 };
            assert_eq!(h, expected);
        }
    }
}

#[test]
fn initial_spectrum_has_closed_form_levels() {
    for l in [4, 6, 8] {
        let jz = 1.3;
        let h0 = Hamiltonian::bsap_initial(l, jz).unwrap();
        let spec = dense_eigensolve(&h0, 1e-8).unwrap();
        let values = spec.cluster_values();
        let sizes = spec.cluster_sizes();
        assert_eq!(values.len(), l / 2 + 1);
        for n in 0..=l / 2 {
            assert!((values[n] + jz * (l as f64 - 4.0 * n as f64)).abs() < 1e-10);
            assert_eq!(sizes[n], 2 * binomial(l, 2 * n));
        }
        // every branch member of level n sits in that eigenspace
        for n in 0..=l / 2 {
            for b in enumerate_branch(l, n, Branch::B0).unwrap().members {
                assert!((h0.diagonal_element(b.bits()) - values[n]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn plan_gates_are_unitary_weight_preserving_and_real_when_orthogonal() {
    for l in [4, 6, 8] {
        for mode in [PlanMode::FullUnitary, PlanMode::Orthogonal] {
            let plan = build_n1_plan(l, mode).unwrap();
            assert_eq!(plan.is_real(), mode == PlanMode::Orthogonal);
            for g in plan.gates() {
                if mode == PlanMode::Orthogonal {
                    assert!(matches!(
                        g.kind,
                        GateKind::Gy2 { .. } | GateKind::Gy4 { .. }
                    ));
                }
                let qubits = g.kind.qubits();
                for col in 0..1usize << l {
                    let mut psi = StateVector::basis(l, col);
                    g.kind.apply(&mut psi, 0.83).unwrap();
                    assert!((psi.norm() - 1.0).abs() < 1e-12);
                    let leak = psi.weight_where(|b| b.count_ones() != col.count_ones());
                    assert!(leak < 1e-24, "{:?} on {col:b}", g.kind);
                    if mode == PlanMode::Orthogonal {
                        assert!(psi.max_imag() < 1e-14);
                    }
                    let outside = psi.weight_where(|b| {
                        (0..l)
                            .filter(|q| !qubits.contains(q))
                            .any(|q| (b ^ col) >> q & 1 == 1)
                    });
                    assert!(outside < 1e-24);
                }
            }
        }
    }
}

#[test]
fn plans_have_the_expected_parameter_counts() {
    for l in [4usize, 6, 8, 10] {
        let full = build_n1_plan(l, PlanMode::FullUnitary).unwrap();
        assert_eq!(full.num_parametrized_gates(), l * l - l - 1);
        let orth = build_n1_plan(l, PlanMode::Orthogonal).unwrap();
        assert_eq!(orth.num_trainable(), l * (l - 1) / 2);
        assert_eq!(orth.num_trainable(), n1_branch(l).unwrap().len());
    }
}

#[test]
fn exploration_stays_inside_the_weight_two_branch() {
    let l = 6;
    let basis = n1_branch(l).unwrap();
    for mode in [PlanMode::FullUnitary, PlanMode::Orthogonal] {
        let plan = build_n1_plan(l, mode).unwrap();
        let params: Vec<f64> = (0..plan.num_params())
            .map(|k| 0.3 + 0.41 * k as f64)
            .collect();
        let psi = explore_state(&plan, &params, n1_reference(l)).unwrap();
        let inside = psi.weight_where(|b| basis.position(Bitstring::new(b as u64, l)).is_some());
        assert!((inside - 1.0).abs() < 1e-12);
    }
}

#[test]
fn parity_is_conserved_through_evolution() {
    let l = 6;
    let ht = Hamiltonian::xyz(l, Couplings::from_ratios(1.0, 0.7, 0.4)).unwrap();
    let h0 = Hamiltonian::bsap_initial(l, 1.0).unwrap();
    for mode in [SteppingMode::Trotter, SteppingMode::Exact] {
        let sched = Schedule::new(6, 0.25, ScheduleFunction::Linear, mode).unwrap();
        for parity in Parity::BOTH {
            let w = Bitstring::parse("110000").unwrap();
            let psi = pipeline_basis_state(w, parity, &h0, &ht, &sched).unwrap();
            assert!((parity_expectation(&psi) - parity.sign()).abs() < 1e-9);
            assert!((psi.norm() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn trotter_error_is_first_order_in_the_step_count() {
    let l = 6;
    let ht = Hamiltonian::xyz(l, Couplings::from_ratios(1.0, 0.3, 0.3)).unwrap();
    let h0 = Hamiltonian::bsap_initial(l, 1.0).unwrap();
    let total = 3.0;
    let init = StateVector::basis(l, 0b000011);
    let distance = |n: usize| {
        let trotter = Schedule::new(
            n,
            total / n as f64,
            ScheduleFunction::Linear,
            SteppingMode::Trotter,
        )
        .unwrap();
        let exact = trotter.clone().with_mode(SteppingMode::Exact);
        let a = evolve(&init, &h0, &ht, &trotter).unwrap();
        let b = evolve(&init, &h0, &ht, &exact).unwrap();
        a.distance(&b).unwrap()
    };
    let (d12, d24, d48) = (distance(12), distance(24), distance(48));
    assert!(d24 < d12 && d48 < d24);
    for ratio in [d12 / d24, d24 / d48] {
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn subspace_matrix_agrees_across_constructions() {
    let l = 6;
    let ht = Hamiltonian::xyz(l, Couplings::from_ratios(1.0, 0.45, 0.6)).unwrap();
    let h0 = Hamiltonian::bsap_initial(l, 1.0).unwrap();
    let sched = Schedule::for_ring(l);
    let basis = enumerate_branch(l, 1, Branch::W).unwrap();
    for parity in Parity::BOTH {
        let direct =
            build_subspace_matrix(&basis, parity, &h0, &ht, &sched, MatrixMethod::Direct).unwrap();
        let overlap = build_subspace_matrix(
            &basis,
            parity,
            &h0,
            &ht,
            &sched,
            MatrixMethod::OverlapStates,
        )
        .unwrap();
        let states: Vec<StateVector> = basis
            .members
            .iter()
            .map(|&w| pipeline_basis_state(w, parity, &h0, &ht, &sched).unwrap())
            .collect();
        let dense = ht.to_dense();
        for m in 0..basis.len() {
            for k in 0..basis.len() {
                let v = nalgebra::DVector::from_column_slice(states[k].amplitudes());
                let hv = &dense * v;
                let brute: Complex64 = states[m]
                    .amplitudes()
                    .iter()
                    .zip(hv.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                assert!((direct.entries[m][k] - brute.re).abs() < 1e-10);
                assert!((overlap.entries[m][k] - brute.re).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn fitting_reaches_random_real_targets() {
    use rand::{Rng, SeedableRng};
    let l = 4;
    let plan = build_n1_plan(l, PlanMode::Orthogonal).unwrap();
    let basis = n1_branch(l).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let mut t: Vec<f64> = (0..basis.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        t.iter_mut().for_each(|x| *x /= norm);
        let fit =
            fit_parameters(&t, &plan, &basis, n1_reference(l), &FitOptions::default()).unwrap();
        assert!(fit.loss < 1e-6);
        let psi = explore_state(
            &plan.clone().with_component_bit(fit.component_bit).unwrap(),
            &fit.params,
            n1_reference(l),
        )
        .unwrap();
        for (k, w) in basis.members.iter().enumerate() {
            assert!((psi.amplitudes()[w.index()].re - t[k]).abs() < 1e-3);
        }
    }
}

#[test]
fn sector_solutions_partition_the_full_spectrum() {
    let l = 6;
    let ht = Hamiltonian::xyz(l, Couplings::from_ratios(1.0, 0.8, 0.3)).unwrap();
    let full = dense_eigensolve(&ht, 1e-8).unwrap();
    let mut merged: Vec<f64> = Parity::BOTH
        .iter()
        .flat_map(|&p| {
            sector_eigensolve(&ht, p, 1e-8)
                .unwrap()
                .eigenvalues()
                .to_vec()
        })
        .collect();
    merged.sort_by(f64::total_cmp);
    for (a, b) in merged.iter().zip(full.eigenvalues()) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn bsap_flow_keeps_the_ground_pair_separated() {
    let l = 4;
    let ht = Hamiltonian::xyz(l, Couplings::from_ratios(1.0, 0.5, 0.5)).unwrap();
    let h0 = Hamiltonian::bsap_initial(l, 1.0).unwrap();
    let flow = spectral_flow(
        &h0,
        &ht,
        ScheduleFunction::Linear,
        &unit_grid(41),
        1e-8,
        0.05,
    )
    .unwrap();
    assert_eq!(flow.degeneracies(0), vec![2, 12, 2]);
    // the lowest two levels stay apart from the rest along the whole path
    assert!(flow.partition_gap(0..2).iter().all(|&g| g > 0.1));
}

#[test]
fn ap_flow_has_avoided_crossings() {
    let l = 4;
    let h0 = Hamiltonian::ap_initial(l, 1.0).unwrap();
    let ht = Hamiltonian::xyz(l, Couplings::from_ratios(1.0, 0.6, 0.5)).unwrap();
    let flow = spectral_flow(
        &h0,
        &ht,
        ScheduleFunction::Linear,
        &unit_grid(201),
        1e-8,
        0.05,
    )
    .unwrap();
    assert!(!flow.crossings.is_empty());
    assert!(flow
        .crossings
        .iter()
        .all(|c| c.s > 0.0 && c.s < 1.0 && c.gap < 0.05));
}
