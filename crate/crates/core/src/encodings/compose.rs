//! Composition of encodings.

use super::local::{from_locality, Locality, SiteBlock};
use super::Encoding;
use crate::error::{Error, Result};
use crate::hamcore::linalg::{conj, eye, kron, kron_all, permute_cols, permute_rows, Mat};

/// compose(e1, e2)(M) = e1(e2(M)): `e2` is applied first. The ancilla of the result is
/// E2 ⊗ E1, with P = P2 ⊗ P1 + Q̄2 ⊗ Q1 and Q = Q2 ⊗ P1 + P̄2 ⊗ Q1. When both inputs carry
/// block structure that nests, the result carries it too (its ancilla is then ordered
/// block by block).
pub fn compose(e1: &Encoding, e2: &Encoding) -> Result<Encoding> {
    if e2.dim_out() != e1.dim_in {
        return Err(Error::DimMismatch(format!(
            "inner encoding outputs {} dimensions, outer expects {}",
            e2.dim_out(),
            e1.dim_in
        )));
    }
    if let (Some(l1), Some(l2)) = (&e1.locality, &e2.locality) {
        if let Some(e) = compose_local(e1, l1, e2, l2)? {
            return Ok(e);
        }
    }
    let (p, q) = composed_projectors(e1, e2);
    let v = composed_isometry(&e1.v, &e1.proj_q, &e2.v);
    Encoding::new(v, e2.dim_in, p, q)
}

fn composed_projectors(e1: &Encoding, e2: &Encoding) -> (Mat, Mat) {
    let p = kron(&e2.proj_p, &e1.proj_p) + kron(&conj(&e2.proj_q), &e1.proj_q);
    let q = kron(&e2.proj_q, &e1.proj_p) + kron(&conj(&e2.proj_p), &e1.proj_q);
    (p, q)
}

/// V1 · (W ⊗ (1 − Q1) + W̄ ⊗ Q1), an isometry from H ⊗ E2 ⊗ E1.
fn composed_isometry(v1: &Mat, q1: &Mat, w: &Mat) -> Mat {
    let rest = eye(q1.nrows()) - q1;
    v1 * (kron(w, &rest) + kron(&conj(w), q1))
}

fn compose_local(
    e1: &Encoding,
    l1: &Locality,
    e2: &Encoding,
    l2: &Locality,
) -> Result<Option<Encoding>> {
    if l2.n_out != l1.n_in || l2.d_out != l1.d_in {
        return Ok(None);
    }
    // outer block j nests inside the inner block whose simulator sites contain its originals
    let mut owner = vec![usize::MAX; l1.blocks.len()];
    for (j, ob) in l1.blocks.iter().enumerate() {
        for (i, ib) in l2.blocks.iter().enumerate() {
            if ob.orig_sites.iter().all(|s| ib.sim_sites.contains(s)) {
                owner[j] = i;
            }
        }
        if owner[j] == usize::MAX {
            return Ok(None);
        }
    }
    let mut blocks = vec![];
    let mut anc_perm = vec![];
    for (i, ib) in l2.blocks.iter().enumerate() {
        let group: Vec<usize> = (0..l1.blocks.len()).filter(|&j| owner[j] == i).collect();
        let mut union: Vec<usize> = group
            .iter()
            .flat_map(|&j| l1.blocks[j].sim_sites.clone())
            .collect();
        union.sort_unstable();
        let pos_in = |s: usize| {
            ib.sim_sites
                .iter()
                .position(|&x| x == s)
                .expect("nested site")
        };
        let pos_out = |s: usize| union.iter().position(|&x| x == s).expect("union site");
        let sub_blocks: Vec<SiteBlock> = group
            .iter()
            .map(|&j| {
                let ob = &l1.blocks[j];
                SiteBlock {
                    orig_sites: ob.orig_sites.iter().map(|&s| pos_in(s)).collect(),
                    sim_sites: ob.sim_sites.iter().map(|&s| pos_out(s)).collect(),
                    ..ob.clone()
                }
            })
            .collect();
        let sub = Locality {
            n_in: ib.sim_sites.len(),
            d_in: l1.d_in,
            n_out: union.len(),
            d_out: l1.d_out,
            blocks: sub_blocks,
        };
        sub.validate()?;
        let v1g = sub.isometry();
        let p1g = kron_all(group.iter().map(|&j| &l1.blocks[j].proj_p));
        let q1g = kron_all(group.iter().map(|&j| &l1.blocks[j].proj_q));
        let v = composed_isometry(&v1g, &q1g, &ib.v);
        blocks.push(SiteBlock {
            orig_sites: ib.orig_sites.clone(),
            sim_sites: union,
            v,
            anc_dim: ib.anc_dim * p1g.nrows(),
            proj_p: kron(&ib.proj_p, &p1g) + kron(&conj(&ib.proj_q), &q1g),
            proj_q: kron(&ib.proj_q, &p1g) + kron(&conj(&ib.proj_p), &q1g),
        });
        anc_perm.push(i);
        anc_perm.extend(group.iter().map(|&j| l2.blocks.len() + j));
    }
    let loc = Locality {
        n_in: l2.n_in,
        d_in: l2.d_in,
        n_out: l1.n_out,
        d_out: l1.d_out,
        blocks,
    };
    let mut anc_dims: Vec<usize> = l2.blocks.iter().map(|b| b.anc_dim).collect();
    anc_dims.extend(l1.blocks.iter().map(|b| b.anc_dim));
    let (p, q) = composed_projectors(e1, e2);
    let reorder =
        |m: &Mat| permute_cols(&permute_rows(m, &anc_dims, &anc_perm), &anc_dims, &anc_perm);
    Ok(Some(from_locality(loc, reorder(&p), reorder(&q))?))
}
