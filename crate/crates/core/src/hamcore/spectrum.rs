//! Deterministic Hermitian eigensolver contract.

use super::linalg::{hermitian_defect, max_abs, raw_eigh, zeros, Mat, C64};
use crate::config::Config;
use crate::error::{Error, Result};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns matching `eigenvalues`.
    pub eigenvectors: Mat,
    pub degeneracy_tol: f64,
}

pub fn diagonalize(a: &Mat) -> Result<Spectrum> {
    diagonalize_with(a, &Config::default())
}

/// Eigen-decomposition with ascending eigenvalues, each eigenvector's first entry of
/// modulus above `tol_phase` made real and non-negative, and degenerate clusters ordered
/// by their rounded entries.
pub fn diagonalize_with(a: &Mat, cfg: &Config) -> Result<Spectrum> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimMismatch(format!(
            "{}x{} is not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let defect = hermitian_defect(a);
    if defect > cfg.tol_herm * (1.0 + max_abs(a)) {
        return Err(Error::NotHermitian(defect));
    }
    let n = a.nrows();
    let (vals, mut vecs) = raw_eigh(a);
    for j in 0..n {
        normalize_phase(&mut vecs, j, cfg.tol_phase);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then(i.cmp(&j)));
    let keys: Vec<Vec<(i64, i64)>> = (0..n)
        .map(|j| {
            vecs.column(j)
                .iter()
                .map(|z| ((z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64))
                .collect()
        })
        .collect();
    // eigenvalues keep their ascending listing; vectors inside a near-degenerate cluster
    // are ordered by their rounded entries
    let mut listed: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && listed[end] - listed[end - 1] < cfg.degeneracy_tol {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by(|&i, &j| cmp_keys(&keys[i], &keys[j]).then(i.cmp(&j)));
        }
        start = end;
    }
    listed.sort_by(|x, y| x.total_cmp(y));
    let mut ev = zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        ev.set_column(k, &vecs.column(i));
    }
    Ok(Spectrum {
        eigenvalues: listed,
        eigenvectors: ev,
        degeneracy_tol: cfg.degeneracy_tol,
    })
}

fn cmp_keys(a: &[(i64, i64)], b: &[(i64, i64)]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match y.cmp(x) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn normalize_phase(vecs: &mut Mat, j: usize, tol: f64) {
    let n = vecs.nrows();
    let lead = (0..n).find(|&i| vecs[(i, j)].norm() > tol);
    if let Some(i) = lead {
        let z = vecs[(i, j)];
        let ph: C64 = z.conj() / z.norm();
        for k in 0..n {
            vecs[(k, j)] *= ph;
        }
        vecs[(i, j)] = C64::new(vecs[(i, j)].re.abs(), 0.0);
    }
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues ≤ Δ.
    pub fn count_below(&self, delta: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l <= delta).count()
    }

    /// Columns spanning the eigenspaces with eigenvalue ≤ Δ.
    pub fn low_vectors(&self, delta: f64) -> Mat {
        let k = self.count_below(delta);
        self.eigenvectors.columns(0, k).into_owned()
    }

    /// V diag(λ) V†.
    pub fn reconstruct(&self) -> Mat {
        let n = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for j in 0..n {
            let l = self.eigenvalues[j];
            for i in 0..n {
                scaled[(i, j)] *= l;
            }
        }
        &scaled * self.eigenvectors.adjoint()
    }
}

/// Projector onto the span of eigenvectors with eigenvalue ≤ Δ.
pub fn low_energy_projector(s: &Spectrum, delta: f64) -> Result<Mat> {
    if let Some(&l) = s
        .eigenvalues
        .iter()
        .find(|&&l| (l - delta).abs() < s.degeneracy_tol)
    {
        return Err(Error::DegenerateCut {
            cutoff: delta,
            eigenvalue: l,
            gap: (l - delta).abs(),
        });
    }
    let v = s.low_vectors(delta);
    Ok(&v * v.adjoint())
}
