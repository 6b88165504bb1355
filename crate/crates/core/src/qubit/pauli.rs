use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of non-identity Paulis on distinct qubits, sorted by qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    ops: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn new(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut ops: Vec<(usize, Pauli)> = ops.into_iter().filter(|(_, p)| *p != Pauli::I).collect();
        ops.sort_by_key(|(q, _)| *q);
        if ops.is_empty() {
            return Err(Error::UnsupportedString("empty Pauli string".into()));
        }
        if ops.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::UnsupportedString("repeated qubit in Pauli string".into()));
        }
        Ok(Self { ops })
    }

    pub fn single(qubit: usize, p: Pauli) -> Result<Self> {
        Self::new([(qubit, p)])
    }

    pub fn ops(&self) -> &[(usize, Pauli)] {
        &self.ops
    }

    pub fn on(&self, qubit: usize) -> Pauli {
        self.ops
            .iter()
            .find(|(q, _)| *q == qubit)
            .map_or(Pauli::I, |(_, p)| *p)
    }

    pub fn contains(&self, qubit: usize) -> bool {
        self.ops.iter().any(|(q, _)| *q == qubit)
    }

    pub fn min_qubit(&self) -> usize {
        self.ops[0].0
    }

    pub fn max_qubit(&self) -> usize {
        self.ops[self.ops.len() - 1].0
    }

    /// Same string with every qubit index shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            ops: self.ops.iter().map(|&(q, p)| (q + offset, p)).collect(),
        }
    }

    /// Bit mask of qubits flipped by X or Y.
    pub(crate) fn flip_mask(&self) -> usize {
        self.ops
            .iter()
            .filter(|(_, p)| matches!(p, Pauli::X | Pauli::Y))
            .fold(0, |m, (q, _)| m | (1 << q))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (q, p)) in self.ops.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{}{}", p.symbol(), q)?;
        }
        Ok(())
    }
}
