//! Pauli words on n qubits and their dense forms. Qubit 0 is the leftmost
//! (most significant) tensor factor throughout the crate.

use crate::error::{Error, Result};
use crate::linalg::{CMat, C_I, C_ONE, C_ZERO};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'I' => Ok(PauliOp::I),
            'X' => Ok(PauliOp::X),
            'Y' => Ok(PauliOp::Y),
            'Z' => Ok(PauliOp::Z),
            _ => Err(Error::InvalidArgument(format!("unknown Pauli letter '{c}'"))),
        }
    }

    pub fn label(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    pub fn matrix(self) -> CMat {
        match self {
            PauliOp::I => CMat::identity(2),
            PauliOp::X => CMat::from_rows(vec![vec![C_ZERO, C_ONE], vec![C_ONE, C_ZERO]]),
            PauliOp::Y => CMat::from_rows(vec![vec![C_ZERO, -C_I], vec![C_I, C_ZERO]]),
            PauliOp::Z => CMat::from_rows(vec![vec![C_ONE, C_ZERO], vec![C_ZERO, -C_ONE]]),
        }
    }

    pub fn index(self) -> usize {
        match self {
            PauliOp::I => 0,
            PauliOp::X => 1,
            PauliOp::Y => 2,
            PauliOp::Z => 3,
        }
    }

    pub fn from_index(i: usize) -> Self {
        match i {
            0 => PauliOp::I,
            1 => PauliOp::X,
            2 => PauliOp::Y,
            3 => PauliOp::Z,
            _ => panic!("pauli index out of range"),
        }
    }
}

/// A tensor product of single-qubit Paulis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliWord(pub Vec<PauliOp>);

impl PauliWord {
    pub fn identity(n: usize) -> Self {
        PauliWord(vec![PauliOp::I; n])
    }

    pub fn parse(label: &str) -> Result<Self> {
        let ops: Result<Vec<PauliOp>> = label.chars().map(PauliOp::from_char).collect();
        let ops = ops?;
        if ops.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli label".into()));
        }
        Ok(PauliWord(ops))
    }

    pub fn n_qubits(&self) -> usize {
        self.0.len()
    }

    /// Qubits where the word acts non-trivially.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != PauliOp::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != PauliOp::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    pub fn dense(&self) -> CMat {
        let mut m = self.0[0].matrix();
        for p in &self.0[1..] {
            m = m.kron(&p.matrix());
        }
        m
    }

    /// Tr[P · X] without forming the dense Pauli matrix.
    pub fn trace_with(&self, x: &CMat) -> Complex64 {
        let n = self.n_qubits();
        let dim = 1usize << n;
        assert_eq!(x.rows(), dim, "operator dimension does not match Pauli word");
        let mut acc = C_ZERO;
        for col in 0..dim {
            // P has exactly one nonzero entry per column
            let mut row = 0usize;
            let mut phase = C_ONE;
            for (q, p) in self.0.iter().enumerate() {
                let bit = (col >> (n - 1 - q)) & 1;
                let (r_bit, f) = match p {
                    PauliOp::I => (bit, C_ONE),
                    PauliOp::X => (1 - bit, C_ONE),
                    PauliOp::Y => (1 - bit, if bit == 0 { C_I } else { -C_I }),
                    PauliOp::Z => (bit, if bit == 0 { C_ONE } else { -C_ONE }),
                };
                row |= r_bit << (n - 1 - q);
                phase *= f;
            }
            acc += phase * x[(col, row)];
        }
        acc
    }

    /// Enumerate all 4^n Pauli words on n qubits in lexicographic (I,X,Y,Z)
    /// order, identity first.
    pub fn enumerate(n: usize) -> Vec<PauliWord> {
        let total = 4usize.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut ops = vec![PauliOp::I; n];
                for q in (0..n).rev() {
                    ops[q] = PauliOp::from_index(idx % 4);
                    idx /= 4;
                }
                PauliWord(ops)
            })
            .collect()
    }

    /// All non-identity words supported on at most `ell` qubits.
    pub fn enumerate_local(n: usize, ell: usize) -> Vec<PauliWord> {
        PauliWord::enumerate(n)
            .into_iter()
            .filter(|w| {
                let wt = w.weight();
                wt >= 1 && wt <= ell
            })
            .collect()
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.label())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let w = PauliWord::parse("XIZ").unwrap();
        assert_eq!(w.to_string(), "XIZ");
        assert_eq!(w.weight(), 2);
        assert_eq!(w.support(), vec![0, 2]);
    }

    #[test]
    fn trace_with_matches_dense() {
        let words = PauliWord::enumerate(2);
        for w in &words {
            let dense = w.dense();
            for v in &words {
                let direct = w.trace_with(&v.dense());
                let full = dense.matmul(&v.dense()).trace();
                assert!((direct - full).norm() < 1e-12, "mismatch for {w} {v}");
            }
        }
    }

    #[test]
    fn pauli_orthogonality() {
        let words = PauliWord::enumerate(2);
        for (i, a) in words.iter().enumerate() {
            for (j, b) in words.iter().enumerate() {
                let t = a.trace_with(&b.dense());
                let expect = if i == j { 4.0 } else { 0.0 };
                assert!((t - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn local_enumeration_counts() {
        // n=3: weight-1 words 9, weight-2 words 27
        assert_eq!(PauliWord::enumerate_local(3, 1).len(), 9);
        assert_eq!(PauliWord::enumerate_local(3, 2).len(), 36);
    }
}
