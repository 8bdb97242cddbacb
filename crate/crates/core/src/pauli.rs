//! Pauli strings in symplectic (x-mask, z-mask) form.
//!
//! A string acts on a computational basis state as
//! `P|b> = i^{#Y} (-1)^{popcount(b & z)} |b ^ x>`, using `Y = i X Z`
//! (Z applied first). Bit `j` of every mask is site `j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    num_sites: usize,
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn identity(num_sites: usize) -> Self {
        Self {
            num_sites,
            x_mask: 0,
            z_mask: 0,
        }
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut x_mask = 0u64;
        let mut z_mask = 0u64;
        for (site, p) in letters.iter().enumerate() {
            let bit = 1u64 << site;
            match p {
                Pauli::I => {}
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                }
            }
        }
        Self {
            num_sites: letters.len(),
            x_mask,
            z_mask,
        }
    }

    /// Two-site string `P_a P_b` on an `num_sites` register.
    pub fn pair(num_sites: usize, a: usize, b: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; num_sites];
        letters[a] = p;
        letters[b] = p;
        Self::from_letters(&letters)
    }

    pub fn single(num_sites: usize, site: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; num_sites];
        letters[site] = p;
        Self::from_letters(&letters)
    }

    /// Parses strings such as `"XXII"`; character `j` is site `j`.
    pub fn parse(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Unsupported(format!(
                    "unknown Pauli letter {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_letters(&letters))
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn letter(&self, site: usize) -> Pauli {
        let bit = 1u64 << site;
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.num_sites).map(|j| self.letter(j)).collect()
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    pub fn is_diagonal(&self) -> bool {
        self.x_mask == 0
    }

    /// True when the string is real in the computational basis (even number of Y).
    pub fn is_real(&self) -> bool {
        self.y_count() % 2 == 0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti =
            (self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones();
        anti % 2 == 0
    }

    /// Image of basis state `b`: returns `(b ^ x, phase)`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (u64, Complex64) {
        (b ^ self.x_mask, self.phase(b))
    }

    /// Phase picked up by basis state `b`.
    #[inline]
    pub fn phase(&self, b: u64) -> Complex64 {
        let sign = if (b & self.z_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        match self.y_count() % 4 {
            0 => Complex64::new(sign, 0.0),
            1 => Complex64::new(0.0, sign),
            2 => Complex64::new(-sign, 0.0),
            _ => Complex64::new(0.0, -sign),
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.num_sites {
            write!(f, "{}", self.letter(j).symbol())?;
        }
        Ok(())
    }
}

/// A real-weighted Pauli string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::NonFinite("Pauli coefficient"));
        }
        Ok(Self {
            coefficient,
            string,
        })
    }
}
