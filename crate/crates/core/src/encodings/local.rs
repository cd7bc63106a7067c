//! Per-site structure of local encodings.

use super::Encoding;
use crate::error::{Error, Result};
use crate::hamcore::linalg::{
    eye, factor_perm_index, kron_all, max_abs_diff, permute_rows, zeros, Mat,
};

/// One original site group mapped to its simulator sites.
#[derive(Debug, Clone)]
pub struct SiteBlock {
    /// Ascending.
    pub orig_sites: Vec<usize>,
    /// Ascending; the output factors of `v` in this order.
    pub sim_sites: Vec<usize>,
    /// Isometry from (orig sites ⊗ E_i) to the simulator sites.
    pub v: Mat,
    pub anc_dim: usize,
    pub proj_p: Mat,
    pub proj_q: Mat,
}

#[derive(Debug, Clone)]
pub struct Locality {
    pub n_in: usize,
    pub d_in: usize,
    pub n_out: usize,
    pub d_out: usize,
    /// The global ancilla is E_0 ⊗ E_1 ⊗ … in this order.
    pub blocks: Vec<SiteBlock>,
}

impl SiteBlock {
    /// A block whose ancilla is trivial (dimension 1, P = 1, Q = 0).
    pub fn plain(orig_sites: Vec<usize>, sim_sites: Vec<usize>, v: Mat) -> SiteBlock {
        SiteBlock {
            orig_sites,
            sim_sites,
            v,
            anc_dim: 1,
            proj_p: eye(1),
            proj_q: zeros(1, 1),
        }
    }
}

impl Locality {
    pub fn validate(&self) -> Result<()> {
        let mut seen_in = vec![false; self.n_in];
        let mut seen_out = vec![false; self.n_out];
        for (b, blk) in self.blocks.iter().enumerate() {
            for (sites, seen) in [
                (&blk.orig_sites, &mut seen_in),
                (&blk.sim_sites, &mut seen_out),
            ] {
                if sites.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Invalid(format!(
                        "block {b} sites are not strictly ascending"
                    )));
                }
                for &s in sites.iter() {
                    if s >= seen.len() || seen[s] {
                        return Err(Error::Invalid(format!(
                            "block {b} site {s} out of range or repeated"
                        )));
                    }
                    seen[s] = true;
                }
            }
            let rows = self.d_out.pow(blk.sim_sites.len() as u32);
            let cols = self.d_in.pow(blk.orig_sites.len() as u32) * blk.anc_dim;
            if blk.v.shape() != (rows, cols) {
                return Err(Error::DimMismatch(format!("block {b} isometry shape")));
            }
        }
        if seen_in.iter().chain(seen_out.iter()).any(|s| !s) {
            return Err(Error::Invalid("blocks do not cover every site".into()));
        }
        Ok(())
    }

    pub fn anc_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.anc_dim).product()
    }

    /// Global isometry ⊗_i V_i with input ordered (sites, E_0, E_1, …) and output in natural
    /// site order.
    pub fn isometry(&self) -> Mat {
        let mut in_dims = vec![self.d_in; self.n_in];
        in_dims.extend(self.blocks.iter().map(|b| b.anc_dim));
        // input factor order seen by the block product
        let mut perm_in: Vec<usize> = vec![];
        let mut sim_order: Vec<usize> = vec![];
        for (b, blk) in self.blocks.iter().enumerate() {
            perm_in.extend(&blk.orig_sites);
            perm_in.push(self.n_in + b);
            sim_order.extend(&blk.sim_sites);
        }
        let k = kron_all(self.blocks.iter().map(|b| &b.v));
        let out_dims = vec![self.d_out; self.n_out];
        let mut perm_out = vec![0; self.n_out];
        for (pos, &s) in sim_order.iter().enumerate() {
            perm_out[s] = pos;
        }
        let k = permute_rows(&k, &out_dims, &perm_out);
        // column i of the result is column map[i] of the block product
        let map = factor_perm_index(&in_dims, &perm_in);
        let mut v = zeros(k.nrows(), k.ncols());
        for (i, &j) in map.iter().enumerate() {
            v.set_column(i, &k.column(j));
        }
        v
    }

    /// P_{E_b} (or Q_{E_b}) placed on factor b of the global ancilla.
    pub fn embed_ancilla(&self, b: usize, use_q: bool) -> Mat {
        let mats: Vec<Mat> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, blk)| {
                if i != b {
                    eye(blk.anc_dim)
                } else if use_q {
                    blk.proj_q.clone()
                } else {
                    blk.proj_p.clone()
                }
            })
            .collect();
        kron_all(mats.iter())
    }
}

/// Largest deviation from the local-encoding invariants: V against the block product, and
/// (P_{E_i} ⊗ 1)P = P, (Q_{E_i} ⊗ 1)Q = Q for every block.
pub fn check_locality(e: &Encoding) -> Result<f64> {
    let loc = e.locality.as_ref().ok_or(Error::NotLocalEncoding)?;
    loc.validate()?;
    if loc.anc_dim() != e.anc_dim || loc.d_in.pow(loc.n_in as u32) != e.dim_in {
        return Err(Error::DimMismatch(
            "locality metadata does not match the encoding".into(),
        ));
    }
    let mut worst = max_abs_diff(&loc.isometry(), &e.v);
    for b in 0..loc.blocks.len() {
        let pb = loc.embed_ancilla(b, false);
        let qb = loc.embed_ancilla(b, true);
        worst = worst.max(max_abs_diff(&(&pb * &e.proj_p), &e.proj_p));
        worst = worst.max(max_abs_diff(&(&qb * &e.proj_q), &e.proj_q));
    }
    Ok(worst)
}

/// Encoding assembled from blocks with explicit global projectors.
pub(super) fn from_locality(loc: Locality, proj_p: Mat, proj_q: Mat) -> Result<Encoding> {
    loc.validate()?;
    let v = loc.isometry();
    let dim_in = loc.d_in.pow(loc.n_in as u32);
    let mut e = Encoding::new(v, dim_in, proj_p, proj_q)?;
    e.locality = Some(loc);
    Ok(e)
}

/// Global projectors ⊗_i P_{E_i} and ⊗_i Q_{E_i}; only meaningful when every block has
/// Q_{E_i} = 0 or a single block carries the ancilla.
pub(super) fn product_projectors(blocks: &[SiteBlock]) -> (Mat, Mat) {
    let p = kron_all(blocks.iter().map(|b| &b.proj_p));
    let q = kron_all(blocks.iter().map(|b| &b.proj_q));
    (p, q)
}
