//! Dense complex matrix helpers shared by every module.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Mat {
    Mat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x)))
}

pub fn dagger(a: &Mat) -> Mat {
    a.adjoint()
}

pub fn conj(a: &Mat) -> Mat {
    a.map(|z| z.conj())
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn kron_all<'a, I: IntoIterator<Item = &'a Mat>>(items: I) -> Mat {
    let mut out = eye(1);
    for m in items {
        out = out.kronecker(m);
    }
    out
}

pub fn max_abs(a: &Mat) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn hermitian_defect(a: &Mat) -> f64 {
    if a.nrows() != a.ncols() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut d: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            d = d.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    d
}

pub fn is_real(a: &Mat) -> bool {
    a.iter().all(|z| z.im == 0.0)
}

pub fn trace(a: &Mat) -> C64 {
    a.diagonal().iter().sum()
}

/// Hermitian part (A + A†)/2, used to remove rounding asymmetry before an eigensolve.
pub fn hermitize(a: &Mat) -> Mat {
    (a + a.adjoint()) * c(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, unsorted. Real input is routed through the
/// real symmetric solver, which is several times faster.
pub(crate) fn raw_eigh(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.nrows();
    if n == 0 {
        return (vec![], zeros(0, 0));
    }
    if is_real(a) {
        let re = DMatrix::<f64>::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re));
        let eig = re.symmetric_eigen();
        let vals = eig.eigenvalues.iter().copied().collect();
        (vals, eig.eigenvectors.map(c))
    } else {
        let eig = hermitize(a).symmetric_eigen();
        let vals = eig.eigenvalues.iter().copied().collect();
        (vals, eig.eigenvectors)
    }
}

/// Eigenvalues only of a Hermitian matrix, ascending.
pub fn eigvalsh(a: &Mat) -> Vec<f64> {
    let n = a.nrows();
    let mut v: Vec<f64> = if n == 0 {
        vec![]
    } else if is_real(a) {
        let re = DMatrix::<f64>::from_fn(n, n, |i, j| 0.5 * (a[(i, j)].re + a[(j, i)].re));
        re.symmetric_eigenvalues().iter().copied().collect()
    } else {
        hermitize(a)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    };
    v.sort_by(|x, y| x.total_cmp(y));
    v
}

/// f(A) for Hermitian A, computed spectrally.
pub fn herm_fn<F: Fn(f64) -> C64>(a: &Mat, f: F) -> Mat {
    let (vals, vecs) = raw_eigh(a);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let fj = f(l);
        for i in 0..n {
            scaled[(i, j)] *= fj;
        }
    }
    &scaled * vecs.adjoint()
}

/// e^{-iHt} for Hermitian H.
pub fn evolution(h: &Mat, t: f64) -> Mat {
    herm_fn(h, |l| C64::from_polar(1.0, -l * t))
}

/// Largest singular value.
pub fn op_norm(a: &Mat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    if a.nrows() == a.ncols() && hermitian_defect(a) <= 1e-12 * (1.0 + max_abs(a)) {
        return eigvalsh(a).iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    }
    let g = if a.nrows() >= a.ncols() {
        a.adjoint() * a
    } else {
        a * a.adjoint()
    };
    eigvalsh(&g).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Sum of singular values.
pub fn trace_norm(a: &Mat) -> f64 {
    if a.nrows() == a.ncols() && hermitian_defect(a) <= 1e-12 * (1.0 + max_abs(a)) {
        return eigvalsh(a).iter().map(|x| x.abs()).sum();
    }
    a.clone().svd(false, false).singular_values.iter().sum()
}

/// Unitary factor U of the polar decomposition A = U |A| for invertible square A.
pub fn polar_unitary(a: &Mat) -> Mat {
    let g = a.adjoint() * a;
    let inv_sqrt = herm_fn(&g, |l| c(1.0 / l.max(1e-300).sqrt()));
    a * inv_sqrt
}

/// Dimensions of a tensor product of `n` equal factors.
pub fn pow(d: usize, n: usize) -> usize {
    d.checked_pow(n as u32).expect("dimension overflow")
}

/// Index map for permuting tensor factors: entry `i` is where basis vector `i` of
/// x_0 ⊗ … ⊗ x_{m-1} lands in x_{perm[0]} ⊗ … ⊗ x_{perm[m-1]}. `dims[k]` is the dimension of
/// input factor k.
pub fn factor_perm_index(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    assert_eq!(dims.len(), perm.len(), "permutation length");
    let total: usize = dims.iter().product();
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut digits = vec![0usize; dims.len()];
    let mut map = Vec::with_capacity(total);
    for idx in 0..total {
        let mut r = idx;
        for k in (0..dims.len()).rev() {
            digits[k] = r % dims[k];
            r /= dims[k];
        }
        let mut out = 0usize;
        for (j, &src) in perm.iter().enumerate() {
            out = out * out_dims[j] + digits[src];
        }
        map.push(out);
    }
    map
}

/// Dense permutation matrix P with P·(x_0 ⊗ … ⊗ x_{m-1}) = x_{perm[0]} ⊗ … ⊗ x_{perm[m-1]}.
pub fn factor_permutation(dims: &[usize], perm: &[usize]) -> Mat {
    let map = factor_perm_index(dims, perm);
    let mut p = zeros(map.len(), map.len());
    for (i, &o) in map.iter().enumerate() {
        p[(o, i)] = ONE;
    }
    p
}

/// P·M for the factor permutation P, without forming P.
pub fn permute_rows(m: &Mat, dims: &[usize], perm: &[usize]) -> Mat {
    let map = factor_perm_index(dims, perm);
    let mut out = zeros(m.nrows(), m.ncols());
    for (i, &o) in map.iter().enumerate() {
        out.set_row(o, &m.row(i));
    }
    out
}

/// M·P† for the factor permutation P, without forming P.
pub fn permute_cols(m: &Mat, dims: &[usize], perm: &[usize]) -> Mat {
    let map = factor_perm_index(dims, perm);
    let mut out = zeros(m.nrows(), m.ncols());
    for (i, &o) in map.iter().enumerate() {
        out.set_column(o, &m.column(i));
    }
    out
}

/// Partial trace over the trailing factor of dimension `db` of an operator on A ⊗ B.
pub fn partial_trace_last(m: &Mat, da: usize, db: usize) -> Mat {
    let mut out = zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut s = ZERO;
            for k in 0..db {
                s += m[(i * db + k, j * db + k)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Partial trace keeping only the factors listed in `keep` (ascending) of a register
/// with per-factor dimensions `dims`.
pub fn partial_trace_keep(m: &Mat, dims: &[usize], keep: &[usize]) -> Mat {
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let mut perm: Vec<usize> = keep.to_vec();
    perm.extend(&traced);
    let p = factor_permutation(dims, &perm);
    let mp = &p * m * p.adjoint();
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    partial_trace_last(&mp, dk, dt)
}

/// Columns of an orthonormal basis for the range of a projector (eigenvalue ≈ 1).
pub fn projector_range(p: &Mat) -> Mat {
    let (vals, vecs) = raw_eigh(p);
    let mut idx: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    idx.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    let mut out = zeros(p.nrows(), idx.len());
    for (j, &i) in idx.iter().enumerate() {
        out.set_column(j, &vecs.column(i));
    }
    out
}

/// Rounded rank of a Hermitian projector.
pub fn projector_rank(p: &Mat) -> usize {
    trace(p).re.round().max(0.0) as usize
}
