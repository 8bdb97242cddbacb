//! Bitstring machinery for the degenerate levels of `-Jz sum Z_i Z_{i+1}`.
//!
//! The domain-wall map `phi` sends a ring configuration to the string of
//! nearest-neighbour XORs. It is exactly 2-to-1 onto the even-weight
//! strings; the two preimages differ by a global flip and are told apart by
//! bit 0. Level `n` of the initial Hamiltonian is spanned by the preimages
//! of the weight-`2n` strings.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::circuit::{CircuitPlan, GateDescriptor, GateKind};
use crate::error::{Error, Result};
use crate::statevector::{StateVector, C64};

const PARITY_NORM_TOLERANCE: f64 = 1e-10;

/// A length-`L` configuration; bit `j` is site `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    bits: u64,
    len: usize,
}

impl Bitstring {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(len <= 63, "bitstring too long");
        Self {
            bits: bits & mask(len),
            len,
        }
    }

    /// Parses `"0110"`, where character `j` is site `j`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << j,
                other => return Err(Error::Unsupported(format!("invalid bit {other:?}"))),
            }
        }
        Ok(Self::new(bits, s.chars().count()))
    }

    /// The weight-2 string with ones at sites `a` and `b`.
    pub fn pair(len: usize, a: usize, b: usize) -> Self {
        Self::new((1 << a) | (1 << b), len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, j: usize) -> bool {
        self.bits >> j & 1 == 1
    }

    pub fn hamming_weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Global flip of every site.
    pub fn complement(&self) -> Self {
        Self::new(!self.bits, self.len)
    }

    /// Output bit `j` is `b_j XOR b_{j+1 mod L}`.
    pub fn phi(&self) -> Self {
        if self.len == 0 {
            return *self;
        }
        let rotated = (self.bits >> 1) | ((self.bits & 1) << (self.len - 1));
        Self::new(self.bits ^ rotated, self.len)
    }

    /// Preimage under `phi` with bit 0 cleared: bit `j` is the parity of
    /// bits `j..L`.
    pub fn phi_inverse_0(&self) -> Result<Self> {
        if self.hamming_weight() % 2 != 0 {
            return Err(Error::OddWeight(self.hamming_weight()));
        }
        let mut out = 0u64;
        let mut suffix = 0u64;
        for j in (0..self.len).rev() {
            suffix ^= self.bits >> j & 1;
            out |= suffix << j;
        }
        Ok(Self::new(out, self.len))
    }

    /// Preimage under `phi` with bit 0 set.
    pub fn phi_inverse_1(&self) -> Result<Self> {
        Ok(self.phi_inverse_0()?.complement())
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.len {
            write!(f, "{}", if self.bit(j) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// Eigenvalue sector of the global spin flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Parity {
    Plus,
    Minus,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Plus => 1.0,
            Parity::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Parity::Plus => 1,
            Parity::Minus => -1,
        }
    }

    pub const BOTH: [Parity; 2] = [Parity::Plus, Parity::Minus];
}

impl TryFrom<i8> for Parity {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Parity::Plus),
            -1 => Ok(Parity::Minus),
            other => Err(format!("parity must be +1 or -1, got {other}")),
        }
    }
}

impl From<Parity> for i8 {
    fn from(p: Parity) -> i8 {
        p.as_i8()
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Weight-`2n` strings (the image of `phi`).
    W,
    /// Preimages with bit 0 = 0.
    B0,
    /// Preimages with bit 0 = 1.
    B1,
}

/// Ordered computational basis of one branch of level `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBasis {
    pub level: usize,
    pub branch: Branch,
    pub members: Vec<Bitstring>,
}

impl SubspaceBasis {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, b: Bitstring) -> Option<usize> {
        self.members.binary_search(&b).ok()
    }
}

/// Members of branch `branch` of level `n`, sorted by integer value.
pub fn enumerate_branch(num_sites: usize, n: usize, branch: Branch) -> Result<SubspaceBasis> {
    if 2 * n > num_sites || num_sites > 30 {
        return Err(Error::LevelOutOfRange { n, num_sites });
    }
    let image: Vec<Bitstring> = (0..1u64 << num_sites)
        .filter(|b| b.count_ones() as usize == 2 * n)
        .map(|b| Bitstring::new(b, num_sites))
        .collect();
    let mut members = match branch {
        Branch::W => image,
        Branch::B0 => image
            .iter()
            .map(|b| b.phi_inverse_0())
            .collect::<Result<_>>()?,
        Branch::B1 => image
            .iter()
            .map(|b| b.phi_inverse_1())
            .collect::<Result<_>>()?,
    };
    members.sort();
    Ok(SubspaceBasis {
        level: n,
        branch,
        members,
    })
}

/// `C(L, 2n)`: dimension of one branch of level `n`.
pub fn branch_dimension(num_sites: usize, n: usize) -> usize {
    binomial(num_sites, 2 * n)
}

/// `2 C(L, 2n)`: degeneracy of level `n` of the initial Hamiltonian.
pub fn level_degeneracy(num_sites: usize, n: usize) -> usize {
    2 * branch_dimension(num_sites, n)
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// CNOT ladder realizing `phi_inverse_0` (branch 0) or `phi_inverse_1`
/// (branch 1, with a trailing X layer) on computational basis states.
pub fn phi_inverse_circuit(num_sites: usize, branch: u8) -> Result<CircuitPlan> {
    if branch > 1 {
        return Err(Error::Unsupported(format!(
            "branch must be 0 or 1, got {branch}"
        )));
    }
    let mut gates: Vec<GateDescriptor> = (0..num_sites.saturating_sub(1))
        .rev()
        .map(|j| {
            GateDescriptor::fixed(GateKind::Cnot {
                control: j + 1,
                target: j,
            })
        })
        .collect();
    if branch == 1 {
        gates.push(GateDescriptor::fixed(GateKind::XLayer));
    }
    CircuitPlan::new(num_sites, gates, 0)
}

/// `(|psi> + sign X|psi>) / sqrt(2)` for a state supported on bit-0 = 0.
pub fn apply_parity_sector(state: &StateVector, parity: Parity) -> Result<StateVector> {
    let mut flipped = state.clone();
    flipped.apply_global_flip();
    let mut out = state.clone();
    out.add_scaled(C64::new(parity.sign(), 0.0), &flipped)?;
    out.scale(C64::new(FRAC_1_SQRT_2, 0.0));
    let norm = out.norm();
    if (norm - state.norm()).abs() > PARITY_NORM_TOLERANCE {
        return Err(Error::ParityPrecondition { norm });
    }
    Ok(out)
}

/// `<psi| X^{(x) L} |psi>`
pub fn parity_expectation(state: &StateVector) -> f64 {
    let mut flipped = state.clone();
    flipped.apply_global_flip();
    state.inner(&flipped).map(|z| z.re).unwrap_or(0.0)
}
