//! Operator algebra: Pauli strings, local terms, dense assembly and the eigensolver.

pub mod hamiltonian;
pub mod linalg;
pub mod pauli;
pub mod random;
pub mod spectrum;

pub use hamiltonian::{embed, embed_add, pauli_decompose, Hamiltonian, LocalTerm, Term};
pub use linalg::{Mat, C64};
pub use pauli::{pauli_coefficient, pauli_expand, pauli_sum_matrix, Pauli, PauliTerm};
pub use spectrum::{diagonalize, diagonalize_with, low_energy_projector, Spectrum};

/// Dense matrix of a Hamiltonian under the default configuration.
pub fn assemble(h: &Hamiltonian) -> crate::error::Result<Mat> {
    h.assemble()
}

/// XX + YY + ZZ on two qubits.
pub fn heisenberg_block() -> Mat {
    let mut m = linalg::zeros(4, 4);
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        m += p.matrix().kronecker(&p.matrix());
    }
    m
}

/// XX + YY on two qubits.
pub fn xy_block() -> Mat {
    let mut m = linalg::zeros(4, 4);
    for p in [Pauli::X, Pauli::Y] {
        m += p.matrix().kronecker(&p.matrix());
    }
    m
}
