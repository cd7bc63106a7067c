//! Standard encodings.

use super::local::{from_locality, product_projectors, Locality, SiteBlock};
use super::Encoding;
use crate::error::{Error, Result};
use crate::hamcore::linalg::{
    c, eye, factor_permutation, kron, kron_all, permute_rows, pow, zeros, Mat, Vector, I, ONE,
};

/// V = 1, p = 1, q = 0.
pub fn identity(dim: usize) -> Encoding {
    Encoding::new(eye(dim), dim, eye(1), zeros(1, 1)).expect("identity is an encoding")
}

/// Identity on n sites of dimension d, carried as one block per site.
pub fn identity_local(n: usize, d: usize) -> Encoding {
    let blocks = (0..n)
        .map(|i| SiteBlock::plain(vec![i], vec![i], eye(d)))
        .collect();
    let loc = Locality {
        n_in: n,
        d_in: d,
        n_out: n,
        d_out: d,
        blocks,
    };
    from_locality(loc, eye(1), zeros(1, 1)).expect("identity is an encoding")
}

/// Columns |+y⟩ = (|0⟩ + i|1⟩)/√2 and |−y⟩ = (|0⟩ − i|1⟩)/√2.
fn y_basis() -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_row_slice(2, 2, &[c(s), c(s), I * s, -I * s])
}

fn qubit_projector(bit: usize) -> Mat {
    let mut m = zeros(2, 2);
    m[(bit, bit)] = ONE;
    m
}

/// Complex-to-real encoding on n qubits: one ancilla qubit placed first on the output,
/// V(|ψ⟩|e⟩) = U|e⟩ ⊗ |ψ⟩ with U = [|+y⟩, |−y⟩], p = q = 1. Every encoded Hermitian
/// operator is a real matrix.
pub fn complex_to_real_enc(n: usize) -> Result<Encoding> {
    if n == 0 {
        return Err(Error::Invalid(
            "complex-to-real encoding needs at least one qubit".into(),
        ));
    }
    let dh = pow(2, n);
    let swap = factor_permutation(&[dh, 2], &[1, 0]);
    let v = kron(&y_basis(), &eye(dh)) * swap;
    Encoding::new(v, dh, qubit_projector(0), qubit_projector(1))
}

/// Local complex-to-real encoding: qubit j is paired with an ancilla qubit n + j that holds
/// |+y⟩ on the P branch and |−y⟩ on the Q branch. P = |0…0⟩⟨0…0| and Q = |1…1⟩⟨1…1| on the
/// n-qubit ancilla, so p = q = 1.
pub fn complex_to_real_local(n: usize) -> Result<Encoding> {
    if n == 0 {
        return Err(Error::Invalid(
            "complex-to-real encoding needs at least one qubit".into(),
        ));
    }
    let blocks = (0..n)
        .map(|j| SiteBlock {
            orig_sites: vec![j],
            sim_sites: vec![j, n + j],
            v: kron(&eye(2), &y_basis()),
            anc_dim: 2,
            proj_p: qubit_projector(0),
            proj_q: qubit_projector(1),
        })
        .collect();
    let loc = Locality {
        n_in: n,
        d_in: 2,
        n_out: 2 * n,
        d_out: 2,
        blocks,
    };
    let da = pow(2, n);
    let mut p = zeros(da, da);
    let mut q = zeros(da, da);
    p[(0, 0)] = ONE;
    q[(da - 1, da - 1)] = ONE;
    from_locality(loc, p, q)
}

/// Each qudit of dimension d becomes ⌈log2 d⌉ qubits holding its level in binary.
pub fn qudit_to_qubit(n: usize, d: usize) -> Result<Encoding> {
    if d < 2 {
        return Err(Error::Invalid("qudit dimension must be at least 2".into()));
    }
    let m = (usize::BITS - (d - 1).leading_zeros()) as usize;
    let mut vi = zeros(pow(2, m), d);
    for k in 0..d {
        vi[(k, k)] = ONE;
    }
    let blocks = (0..n)
        .map(|i| SiteBlock::plain(vec![i], (i * m..(i + 1) * m).collect(), vi.clone()))
        .collect();
    let loc = Locality {
        n_in: n,
        d_in: d,
        n_out: n * m,
        d_out: 2,
        blocks,
    };
    from_locality(loc, eye(1), zeros(1, 1))
}

/// Fixed state on new sites, owned by one original site.
#[derive(Debug, Clone)]
pub struct Attachment {
    pub owner: usize,
    /// Ascending simulator sites, all ≥ n_target.
    pub sites: Vec<usize>,
    /// Normalized state on `sites` in their listed order.
    pub state: Vector,
}

/// |ψ⟩ ↦ |ψ⟩ ⊗ (attached states), keeping original qubit i at simulator site i. Every
/// simulator site ≥ n_target must be covered by exactly one attachment.
pub fn attach_states(
    n_target: usize,
    n_sim: usize,
    attachments: &[Attachment],
) -> Result<Encoding> {
    let mut blocks = vec![];
    for t in 0..n_target {
        let mine: Vec<&Attachment> = attachments.iter().filter(|a| a.owner == t).collect();
        let mut order: Vec<usize> = vec![t];
        let mut factors: Vec<Mat> = vec![eye(2)];
        for a in &mine {
            if a.state.len() != pow(2, a.sites.len()) {
                return Err(Error::DimMismatch(format!(
                    "attachment on {:?} has a wrong-sized state",
                    a.sites
                )));
            }
            order.extend(&a.sites);
            factors.push(Mat::from_column_slice(a.state.len(), 1, a.state.as_slice()));
        }
        let k = kron_all(factors.iter());
        let mut sorted = order.clone();
        sorted.sort_unstable();
        // output factor j of the block is the factor that holds sorted[j]
        let perm: Vec<usize> = sorted
            .iter()
            .map(|s| order.iter().position(|o| o == s).unwrap())
            .collect();
        let v = permute_rows(&k, &vec![2; order.len()], &perm);
        blocks.push(SiteBlock::plain(vec![t], sorted, v));
    }
    if attachments.iter().any(|a| a.owner >= n_target) {
        return Err(Error::Invalid("attachment owner out of range".into()));
    }
    let loc = Locality {
        n_in: n_target,
        d_in: 2,
        n_out: n_sim,
        d_out: 2,
        blocks,
    };
    let (p, q) = product_projectors(&loc.blocks);
    from_locality(loc, p, q)
}

/// Logical qubit i lives in the two-dimensional span given by the columns of `basis` on the
/// physical sites `groups[i]`.
pub fn subspace_encoding(groups: &[Vec<usize>], n_phys: usize, basis: &Mat) -> Result<Encoding> {
    if basis.ncols() != 2 {
        return Err(Error::DimMismatch(
            "logical basis must have two columns".into(),
        ));
    }
    let mut blocks = vec![];
    for (i, g) in groups.iter().enumerate() {
        if basis.nrows() != pow(2, g.len()) {
            return Err(Error::DimMismatch(format!(
                "group {i} does not match the basis size"
            )));
        }
        blocks.push(SiteBlock::plain(vec![i], g.clone(), basis.clone()));
    }
    let loc = Locality {
        n_in: groups.len(),
        d_in: 2,
        n_out: n_phys,
        d_out: 2,
        blocks,
    };
    let (p, q) = product_projectors(&loc.blocks);
    from_locality(loc, p, q)
}
