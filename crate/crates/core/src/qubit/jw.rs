//! Jordan–Wigner encoding of the impurity + bath modes.

use super::statevector::Statevector;
use crate::error::{Error, Result};
use crate::linalg::{kron, CMatrix, ONE, ZERO};

/// Number of fermionic modes (impurity plus `n_bath` sites, two spins each).
pub fn mode_count(n_bath: usize) -> usize {
    2 * (n_bath + 1)
}

/// Product state for the given mode occupations with the probe qubit (qubit 0)
/// in `|0⟩`; mode `j` sits on qubit `j + 1`.
pub fn jw_encode(occupations: &[bool], n_bath: usize) -> Result<Statevector> {
    let modes = mode_count(n_bath);
    if occupations.len() != modes {
        return Err(Error::Dimension {
            expected: modes,
            got: occupations.len(),
        });
    }
    let index = occupations
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .fold(0usize, |acc, (j, _)| acc | (1 << (j + 1)));
    Ok(Statevector::basis(modes + 1, index))
}

/// Annihilation operators `c_j` as dense matrices over the system register
/// (no probe): `c_j = σ^z_0 ⊗ … ⊗ σ^z_{j-1} ⊗ σ^+_j`, where `σ^+ = |0⟩⟨1|`
/// removes an occupation.
pub fn jw_operator_matrices(n_bath: usize) -> Vec<CMatrix> {
    let modes = mode_count(n_bath);
    jw_annihilators(modes)
}

/// Annihilators for an arbitrary number of modes.
pub fn jw_annihilators(modes: usize) -> Vec<CMatrix> {
    let id = CMatrix::identity(2, 2);
    let z = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    let lower = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    (0..modes)
        .map(|j| {
            // kron ordering puts the highest qubit leftmost
            let mut m = CMatrix::identity(1, 1);
            for q in (0..modes).rev() {
                let factor = if q < j {
                    &z
                } else if q == j {
                    &lower
                } else {
                    &id
                };
                m = kron(&m, factor);
            }
            m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        // impurity ↓ occupied -> qubit 1 set
        let s = jw_encode(&[true, false, false, false], 1).unwrap();
        assert_eq!(s.amplitudes()[0b00010], ONE);
        // doubly occupied bath site 1 -> qubits 3 and 4 set
        let s = jw_encode(&[false, false, true, true], 1).unwrap();
        assert_eq!(s.amplitudes()[0b11000], ONE);
        let s = jw_encode(&[false; 4], 1).unwrap();
        assert_eq!(s.amplitudes()[0], ONE);
        assert!(jw_encode(&[false; 3], 1).is_err());
    }

    #[test]
    fn number_operator_of_first_mode_is_diagonal() {
        let c = jw_operator_matrices(0);
        let n0 = c[0].adjoint() * &c[0];
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j && i & 1 == 1 { ONE } else { ZERO };
                assert_eq!(n0[(i, j)], expect);
            }
        }
    }
}
