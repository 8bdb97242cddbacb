//! Pauli-sum Hamiltonians: the periodic XYZ ring, the two initial
//! Hamiltonians used for state preparation, and linear interpolation
//! between them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliTerm};
use crate::statevector::{StateVector, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Couplings {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl Couplings {
    pub fn new(jx: f64, jy: f64, jz: f64) -> Self {
        Self { jx, jy, jz }
    }

    /// `Jx = jx_ratio * Jz`, `Jy = jy_ratio * Jx`; the sweep axes.
    pub fn from_ratios(jz: f64, jx_ratio: f64, jy_ratio: f64) -> Self {
        let jx = jx_ratio * jz;
        Self {
            jx,
            jy: jy_ratio * jx,
            jz,
        }
    }

    /// Checks `|Jz| >= |Jx| >= |Jy|`. On failure the error names the axis
    /// relabelling (a global frame rotation) that restores the ordering.
    pub fn check_ordering(&self) -> Result<()> {
        for v in [self.jx, self.jy, self.jz] {
            if !v.is_finite() {
                return Err(Error::NonFinite("coupling"));
            }
        }
        if self.jz.abs() >= self.jx.abs() && self.jx.abs() >= self.jy.abs() {
            return Ok(());
        }
        let mut axes = [('x', self.jx), ('y', self.jy), ('z', self.jz)];
        axes.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        Err(Error::CouplingOrder {
            suggestion: format!(
                "relabel the spin axes {}->z, {}->x, {}->y (Jz'={}, Jx'={}, Jy'={})",
                axes[0].0, axes[1].0, axes[2].0, axes[0].1, axes[1].1, axes[2].1
            ),
        })
    }
}

/// Interpolation schedule `f` with `f(0) = 0` and `f(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleFunction {
    #[default]
    Linear,
    /// `3s^2 - 2s^3`
    Smoothstep,
    /// `sin^2(pi s / 2)`
    SinSquared,
}

impl ScheduleFunction {
    pub fn value(self, s: f64) -> f64 {
        match self {
            ScheduleFunction::Linear => s,
            ScheduleFunction::Smoothstep => s * s * (3.0 - 2.0 * s),
            ScheduleFunction::SinSquared => (0.5 * PI * s).sin().powi(2),
        }
    }

    /// `max_{s in [0,1]} |f'(s)|`
    pub fn max_slope(self) -> f64 {
        match self {
            ScheduleFunction::Linear => 1.0,
            ScheduleFunction::Smoothstep => 1.5,
            ScheduleFunction::SinSquared => 0.5 * PI,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    num_sites: usize,
    terms: Vec<PauliTerm>,
    couplings: Option<Couplings>,
}

impl Hamiltonian {
    pub fn new(num_sites: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        for t in &terms {
            if t.string.num_sites() != num_sites {
                return Err(Error::DimensionMismatch {
                    expected: num_sites,
                    found: t.string.num_sites(),
                });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::NonFinite("Pauli coefficient"));
            }
        }
        Ok(Self {
            num_sites,
            terms,
            couplings: None,
        })
    }

    pub fn zero(num_sites: usize) -> Self {
        Self {
            num_sites,
            terms: Vec::new(),
            couplings: None,
        }
    }

    /// `c * 1`
    pub fn constant(num_sites: usize, c: f64) -> Self {
        Self {
            num_sites,
            terms: vec![PauliTerm {
                coefficient: c,
                string: PauliString::identity(num_sites),
            }],
            couplings: None,
        }
    }

    /// Periodic XYZ ring
    /// `-sum_i [Jx X_i X_{i+1} + Jy Y_i Y_{i+1} + Jz Z_i Z_{i+1}]`, site L = site 0.
    ///
    /// Terms are emitted bond by bond in the order XX, YY, ZZ.
    pub fn xyz(num_sites: usize, couplings: Couplings) -> Result<Self> {
        check_ring(num_sites, 4)?;
        couplings.check_ordering()?;
        let mut terms = Vec::with_capacity(3 * num_sites);
        for i in 0..num_sites {
            let j = (i + 1) % num_sites;
            for (p, c) in [
                (Pauli::X, couplings.jx),
                (Pauli::Y, couplings.jy),
                (Pauli::Z, couplings.jz),
            ] {
                terms.push(PauliTerm {
                    coefficient: -c,
                    string: PauliString::pair(num_sites, i, j, p),
                });
            }
        }
        Ok(Self {
            num_sites,
            terms,
            couplings: Some(couplings),
        })
    }

    /// `-Jz sum_i Z_i Z_{i+1}` with periodic wraparound.
    pub fn bsap_initial(num_sites: usize, jz: f64) -> Result<Self> {
        check_ring(num_sites, 2)?;
        if !jz.is_finite() {
            return Err(Error::NonFinite("coupling"));
        }
        let terms = (0..num_sites)
            .map(|i| PauliTerm {
                coefficient: -jz,
                string: PauliString::pair(num_sites, i, (i + 1) % num_sites, Pauli::Z),
            })
            .collect();
        Ok(Self {
            num_sites,
            terms,
            couplings: Some(Couplings::new(0.0, 0.0, jz)),
        })
    }

    /// `-Jz sum_i Z_i / 2^i`: diagonal with a fully non-degenerate spectrum.
    pub fn ap_initial(num_sites: usize, jz: f64) -> Result<Self> {
        check_ring(num_sites, 2)?;
        if !jz.is_finite() {
            return Err(Error::NonFinite("coupling"));
        }
        let terms = (0..num_sites)
            .map(|i| PauliTerm {
                coefficient: -jz / (1u64 << i) as f64,
                string: PauliString::single(num_sites, i, Pauli::Z),
            })
            .collect();
        Ok(Self {
            num_sites,
            terms,
            couplings: None,
        })
    }

    /// `H(s) = H0 + f(s) [HT - H0]` with coefficients of equal strings merged.
    pub fn interpolate(
        h0: &Hamiltonian,
        ht: &Hamiltonian,
        s: f64,
        f: ScheduleFunction,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ScheduleOutOfRange(s));
        }
        Self::interpolate_weight(h0, ht, f.value(s))
    }

    /// `(1 - w) H0 + w HT` for an explicit schedule value `w`.
    pub fn interpolate_weight(h0: &Hamiltonian, ht: &Hamiltonian, w: f64) -> Result<Self> {
        if h0.num_sites != ht.num_sites {
            return Err(Error::DimensionMismatch {
                expected: h0.num_sites,
                found: ht.num_sites,
            });
        }
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        let mut terms: Vec<PauliTerm> = Vec::new();
        for (weight, h) in [(1.0 - w, h0), (w, ht)] {
            for t in &h.terms {
                let c = weight * t.coefficient;
                match index.get(&t.string) {
                    Some(&k) => terms[k].coefficient += c,
                    None => {
                        index.insert(t.string, terms.len());
                        terms.push(PauliTerm {
                            coefficient: c,
                            string: t.string,
                        });
                    }
                }
            }
        }
        terms.retain(|t| t.coefficient != 0.0);
        Ok(Self {
            num_sites: h0.num_sites,
            terms,
            couplings: None,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.num_sites
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn couplings(&self) -> Option<Couplings> {
        self.couplings
    }

    /// True when every string has an even number of Y factors, so the
    /// matrix is real symmetric.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.string.is_real())
    }

    /// Coefficients keyed by Pauli string, with equal strings summed.
    pub fn coefficient_map(&self) -> HashMap<PauliString, f64> {
        let mut map = HashMap::new();
        for t in &self.terms {
            *map.entry(t.string).or_insert(0.0) += t.coefficient;
        }
        map.retain(|_, c| *c != 0.0);
        map
    }

    /// `H|psi>`
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.num_qubits() != self.num_sites {
            return Err(Error::DimensionMismatch {
                expected: self.num_sites,
                found: psi.num_qubits(),
            });
        }
        let amps = psi.amplitudes();
        let mut out = vec![ZERO; amps.len()];
        for t in &self.terms {
            for (b, a) in amps.iter().enumerate() {
                let (image, phase) = t.string.apply_to_basis(b as u64);
                out[image as usize] += t.coefficient * phase * a;
            }
        }
        StateVector::from_amplitudes(self.num_sites, out)
    }

    /// `<b|H|b>` for a computational basis state.
    pub fn diagonal_element(&self, b: u64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.string.is_diagonal())
            .map(|t| t.coefficient * t.string.phase(b).re)
            .sum()
    }

    /// Dense `2^L x 2^L` matrix. Intended for oracles and small registers.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for t in &self.terms {
            for b in 0..dim {
                let (image, phase) = t.string.apply_to_basis(b as u64);
                m[(image as usize, b)] += t.coefficient * phase;
            }
        }
        m
    }
}

fn check_ring(num_sites: usize, min: usize) -> Result<()> {
    if num_sites < min || num_sites % 2 != 0 || num_sites > 20 {
        return Err(Error::InvalidRingSize(num_sites, min));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xyz_term_layout() {
        let h = Hamiltonian::xyz(4, Couplings::new(0.5, 0.2, 1.0)).unwrap();
        assert_eq!(h.terms().len(), 12);
        for t in h.terms() {
            let letters = t.string.letters();
            assert_eq!(letters.iter().filter(|p| **p != Pauli::I).count(), 2);
        }
        // last bond wraps 3 -> 0
        let wrap = &h.terms()[9..];
        for t in wrap {
            assert_eq!(t.string.letter(3), t.string.letter(0));
            assert_ne!(t.string.letter(0), Pauli::I);
        }
        assert!(h.is_real());
    }

    #[test]
    fn odd_or_small_rings_rejected() {
        let c = Couplings::new(0.0, 0.0, 1.0);
        assert!(matches!(
            Hamiltonian::xyz(5, c),
            Err(Error::InvalidRingSize(5, 4))
        ));
        assert!(matches!(
            Hamiltonian::xyz(2, c),
            Err(Error::InvalidRingSize(2, 4))
        ));
        assert!(Hamiltonian::bsap_initial(3, 1.0).is_err());
        assert!(Hamiltonian::ap_initial(2, 1.0).is_ok());
    }

    #[test]
    fn coupling_order_enforced_with_suggestion() {
        let err = Hamiltonian::xyz(4, Couplings::new(1.0, 0.2, 0.5)).unwrap_err();
        match err {
            Error::CouplingOrder { suggestion } => {
                assert!(suggestion.contains("x->z"), "{suggestion}")
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(Couplings::new(0.3, 0.5, 1.0).check_ordering().is_err());
        assert!(Couplings::new(-0.3, 0.1, -1.0).check_ordering().is_ok());
    }

    #[test]
    fn bsap_initial_diagonal_elements() {
        let h0 = Hamiltonian::bsap_initial(4, 1.0).unwrap();
        assert_eq!(h0.diagonal_element(0b0000), -4.0);
        assert_eq!(h0.diagonal_element(0b0101), 4.0);
        assert_eq!(h0.diagonal_element(0b0011), 0.0);
    }

    #[test]
    fn interpolation_endpoints_are_exact() {
        let h0 = Hamiltonian::bsap_initial(4, 1.0).unwrap();
        let ht = Hamiltonian::xyz(4, Couplings::new(0.7, 0.3, 1.0)).unwrap();
        let at0 = Hamiltonian::interpolate(&h0, &ht, 0.0, ScheduleFunction::Linear).unwrap();
        let at1 = Hamiltonian::interpolate(&h0, &ht, 1.0, ScheduleFunction::Linear).unwrap();
        assert_eq!(at0.coefficient_map(), h0.coefficient_map());
        assert_eq!(at1.coefficient_map(), ht.coefficient_map());
        assert!(matches!(
            Hamiltonian::interpolate(&h0, &ht, 1.5, ScheduleFunction::Linear),
            Err(Error::ScheduleOutOfRange(_))
        ));
    }

    #[test]
    fn schedules_hit_endpoints() {
        for f in [
            ScheduleFunction::Linear,
            ScheduleFunction::Smoothstep,
            ScheduleFunction::SinSquared,
        ] {
            assert!(f.value(0.0).abs() < 1e-15);
            assert!((f.value(1.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn apply_matches_dense() {
        let h = Hamiltonian::xyz(4, Couplings::new(0.6, 0.4, 1.0)).unwrap();
        let dense = h.to_dense();
        let psi = StateVector::from_amplitudes(
            4,
            (0..16)
                .map(|k| C64::new((k as f64).sin(), (k as f64 * 0.3).cos()))
                .collect(),
        )
        .unwrap();
        let hpsi = h.apply(&psi).unwrap();
        let v = nalgebra::DVector::from_vec(psi.amplitudes().to_vec());
        let expected = &dense * v;
        for (a, b) in hpsi.amplitudes().iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
