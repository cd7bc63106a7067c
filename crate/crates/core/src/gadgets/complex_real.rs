//! Real simulator for a complex qubit Hamiltonian: every Y letter picks up a partner Y on a
//! per-qubit ancilla, and a YY penalty chain keeps the ancillas aligned.

use super::{Ground, PerturbativeGadget};
use crate::config::Config;
use crate::encodings::complex_to_real_local;
use crate::error::{Error, Result};
use crate::hamcore::{Hamiltonian, Pauli, PauliTerm};

/// Σ|w| over the Pauli expansion.
pub fn pauli_one_norm(h: &Hamiltonian) -> Result<f64> {
    Ok(h.to_pauli(0.0)?
        .pauli_terms()
        .expect("Pauli form")
        .iter()
        .map(|t| t.weight.abs())
        .sum())
}

/// H on n qubits mapped to 2n qubits with Y_j ↦ Y_jY_{n+j}; the result is a real matrix.
pub fn phi_local(h: &Hamiltonian) -> Result<Hamiltonian> {
    if h.d != 2 {
        return Err(Error::NotQubit(h.d));
    }
    let n = h.n;
    let p = h.to_pauli(0.0)?;
    let mut out = Hamiltonian::qubits(2 * n);
    for t in p.pauli_terms().expect("Pauli form") {
        let mut pairs = t.pairs();
        pairs.extend(
            t.pairs()
                .into_iter()
                .filter(|q| q.1 == Pauli::Y)
                .map(|q| (n + q.0, Pauli::Y)),
        );
        let mut u = PauliTerm::new(&pairs, t.weight)?;
        u.tag = t.tag.clone();
        out.push(u);
    }
    Ok(out)
}

/// Penalty strength for an exact simulation: 3‖H‖₁ + 1.
pub fn c2r_delta(h: &Hamiltonian) -> Result<f64> {
    Ok(3.0 * pauli_one_norm(h)? + 1.0)
}

/// Cutoff separating the encoded block from the penalized one at [`c2r_delta`]:
/// 2‖H‖₁ + 1/2.
pub fn c2r_cutoff(h: &Hamiltonian) -> Result<f64> {
    Ok(2.0 * pauli_one_norm(h)? + 0.5)
}

/// First-order gadget with H0 = Σ_j (1 − Y_{n+j}Y_{n+j+1})/2 and H1 = φ(H). H1 commutes with
/// H0, so the simulation is exact for any Δ above the cutoff.
pub fn c2r_gadget(h: &Hamiltonian) -> Result<PerturbativeGadget> {
    let n = h.n;
    let h1 = phi_local(h)?;
    let mut h0 = Hamiltonian::qubits(2 * n);
    for j in 0..n.saturating_sub(1) {
        h0.push(PauliTerm::identity(0.5));
        h0.push(PauliTerm::new(
            &[(n + j, Pauli::Y), (n + j + 1, Pauli::Y)],
            -0.5,
        )?);
    }
    let ground = if h0.dim() <= Config::from_env().dim_cap {
        Ground::Fixed(complex_to_real_local(n)?)
    } else {
        Ground::Deferred((0..n).map(|j| (vec![j], vec![j, n + j])).collect())
    };
    PerturbativeGadget::new(
        "c2r",
        1,
        h.clone(),
        h0,
        h1,
        Hamiltonian::qubits(2 * n),
        None,
        ground,
    )
}
