//! Reductions between two-qubit interactions: deleting 1-local parts with an entangled
//! ancilla quadruple, and three-qubit subspace encodings that turn one interaction into
//! another at first order.

use super::{Ground, PerturbativeGadget};
use crate::encodings::{subspace_encoding, Attachment, Encoding};
use crate::error::{Error, Result};
use crate::hamcore::linalg::{
    c, eye, hermitian_defect, kron, max_abs, partial_trace_keep, zeros, Mat, Vector,
};
use crate::hamcore::{diagonalize, embed, Hamiltonian, LocalTerm, Pauli, PauliTerm};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// Real Pauli decomposition of a two-qubit operator: (identity, A-part on the first qubit,
/// B-part on the second, 3×3 correlation matrix).
fn decompose2(h: &Mat) -> (f64, [f64; 3], [f64; 3], [[f64; 3]; 3]) {
    let coef = |p: Pauli, q: Pauli| (kron(&p.matrix(), &q.matrix()) * h).trace().re / 4.0;
    let a = XYZ.map(|p| coef(p, Pauli::I));
    let b = XYZ.map(|q| coef(Pauli::I, q));
    let m = XYZ.map(|p| XYZ.map(|q| coef(p, q)));
    (coef(Pauli::I, Pauli::I), a, b, m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DeletionForm {
    /// Diagonal correlations with the same field on both qubits; quadruple
    /// H_ab + H_cd − H_ac − H_bd.
    Symmetric,
    /// s(XZ − ZX) with opposite fields; quadruple H_ab + H_bc + H_cd + H_da.
    Antisymmetric,
}

impl DeletionForm {
    pub fn detect(h: &Mat) -> Result<DeletionForm> {
        if h.shape() != (4, 4) {
            return Err(Error::BadForm("interaction must be a 4×4 operator".into()));
        }
        if hermitian_defect(h) > 1e-10 * (1.0 + max_abs(h)) {
            return Err(Error::BadForm("interaction is not Hermitian".into()));
        }
        let (_, a, b, m) = decompose2(h);
        let tol = 1e-9 * (1.0 + max_abs(h));
        let close = |x: f64, y: f64| (x - y).abs() <= tol;
        let diag = (0..3).all(|p| (0..3).all(|q| p == q || close(m[p][q], 0.0)));
        if diag && (0..3).any(|p| !close(m[p][p], 0.0)) && (0..3).all(|p| close(a[p], b[p])) {
            return Ok(DeletionForm::Symmetric);
        }
        let s = m[0][2];
        let anti = !close(s, 0.0)
            && close(m[2][0], -s)
            && (0..3).all(|p| {
                (0..3).all(|q| (p, q) == (0, 2) || (p, q) == (2, 0) || close(m[p][q], 0.0))
            });
        if anti && (0..3).all(|p| close(a[p], -b[p])) {
            return Ok(DeletionForm::Antisymmetric);
        }
        Err(Error::BadForm(
            "expected diagonal correlations with equal fields, or XZ − ZX with opposite fields"
                .into(),
        ))
    }

    fn quadruple(self) -> [(usize, usize, f64); 4] {
        match self {
            DeletionForm::Symmetric => [(0, 1, 1.0), (2, 3, 1.0), (0, 2, -1.0), (1, 3, -1.0)],
            DeletionForm::Antisymmetric => [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
        }
    }
}

/// First-order gadget that removes the 1-local parts of a two-qubit interaction h on
/// qubits (0, 1). Each qubit owns four ancillas (sites 2–5 and 6–9) in the unique ground
/// state of the quadruple Hamiltonian built from h, whose local parts cancel; the last
/// ancilla d of each quadruple is maximally mixed, so
/// H1 = h(0,1) − h(0,d_0) − h(d_1,1) + 2h_I has ground-space projection h − A⊗1 − 1⊗B.
pub fn one_local_deletion(h: &Mat) -> Result<PerturbativeGadget> {
    let form = DeletionForm::detect(h)?;
    let (h_id, _, _, m) = decompose2(h);
    let quad = form.quadruple();
    let mut hq = Hamiltonian::qubits(4);
    for &(x, y, w) in &quad {
        hq.push(LocalTerm::new(&[x, y], h.clone(), w, 2)?);
    }
    let spec = diagonalize(&hq.assemble()?)?;
    let gap = spec.eigenvalues[1] - spec.eigenvalues[0];
    if gap < 1e-8 * (1.0 + max_abs(h)) {
        return Err(Error::BadForm(
            "ground state of the ancilla quadruple is degenerate".into(),
        ));
    }
    let lowest = spec.eigenvalues[0];
    let psi: Vector = spec.eigenvectors.column(0).into_owned();
    let rho = &psi * psi.adjoint();
    let rho_d = partial_trace_keep(&rho, &[2, 2, 2, 2], &[3]);
    if max_abs(&(rho_d - eye(2) * c(0.5))) > 1e-8 {
        return Err(Error::BadForm(
            "last ancilla of the quadruple is not maximally mixed".into(),
        ));
    }

    let n_sim = 10;
    let quads = [[2, 3, 4, 5], [6, 7, 8, 9]];
    let mut h0 = Hamiltonian::qubits(n_sim);
    for q in &quads {
        for &(x, y, w) in &quad {
            h0.push(LocalTerm::new(&[q[x], q[y]], h.clone(), w / gap, 2)?);
        }
        h0.push(PauliTerm::identity(-lowest / gap));
    }
    let (du, dv) = (quads[0][3], quads[1][3]);
    let mut h1 = Hamiltonian::qubits(n_sim);
    h1.push(LocalTerm::new(&[0, 1], h.clone(), 1.0, 2)?);
    h1.push(LocalTerm::new(&[0, du], h.clone(), -1.0, 2)?);
    h1.push(LocalTerm::new(&[dv, 1], h.clone(), -1.0, 2)?);
    h1.push(PauliTerm::identity(2.0 * h_id));

    let mut target = Hamiltonian::qubits(2);
    target.push(PauliTerm::identity(h_id));
    for (p, row) in XYZ.iter().zip(&m) {
        for (q, &w) in XYZ.iter().zip(row) {
            if w != 0.0 {
                target.push(PauliTerm::new(&[(0, *p), (1, *q)], w)?);
            }
        }
    }
    let att: Vec<Attachment> = quads
        .iter()
        .enumerate()
        .map(|(owner, q)| Attachment {
            owner,
            sites: q.to_vec(),
            state: psi.clone(),
        })
        .collect();
    let mut g = PerturbativeGadget::new(
        "one_local_deletion",
        1,
        target,
        h0,
        h1,
        Hamiltonian::qubits(n_sim),
        None,
        Ground::Mediators(att),
    )?;
    g.allow_h1_leak = true;
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Subspace3Kind {
    /// XX + αYY on a chain H_ab + H_bc, realizing XX + YY.
    Xy { alpha: f64 },
    /// XX + αYY + βZZ on H_ab − H_bc, realizing XX + α′YY.
    Xyz { alpha: f64, beta: f64 },
    /// XZ − ZX on the triangle H_ab + H_bc + H_ca, realizing XX + YY.
    Antisym,
}

impl Subspace3Kind {
    fn interaction(self) -> Result<Mat> {
        let pp = |p: Pauli, q: Pauli| kron(&p.matrix(), &q.matrix());
        let finite_nonzero = |x: f64| x.is_finite() && x != 0.0;
        match self {
            Subspace3Kind::Xy { alpha } if finite_nonzero(alpha) => {
                Ok(pp(Pauli::X, Pauli::X) + pp(Pauli::Y, Pauli::Y) * c(alpha))
            }
            Subspace3Kind::Xyz { alpha, beta } if finite_nonzero(alpha) && finite_nonzero(beta) => {
                Ok(pp(Pauli::X, Pauli::X)
                    + pp(Pauli::Y, Pauli::Y) * c(alpha)
                    + pp(Pauli::Z, Pauli::Z) * c(beta))
            }
            Subspace3Kind::Antisym => Ok(pp(Pauli::X, Pauli::Z) - pp(Pauli::Z, Pauli::X)),
            other => Err(Error::BadKind(format!(
                "{other:?} needs finite nonzero parameters"
            ))),
        }
    }

    fn triple(self) -> Vec<(usize, usize, f64)> {
        match self {
            Subspace3Kind::Xy { .. } => vec![(0, 1, 1.0), (1, 2, 1.0)],
            Subspace3Kind::Xyz { .. } => vec![(0, 1, 1.0), (1, 2, -1.0)],
            Subspace3Kind::Antisym => vec![(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)],
        }
    }

    /// Symmetry splitting the ground doublet: Z⊗Z⊗Z, or Y⊗Y⊗Y for the antisymmetric kind.
    fn symmetry(self) -> Mat {
        let p = if self == Subspace3Kind::Antisym {
            Pauli::Y
        } else {
            Pauli::Z
        };
        kron(&kron(&p.matrix(), &p.matrix()), &p.matrix())
    }
}

/// One logical qubit in the two-dimensional ground space of a three-qubit Hamiltonian.
#[derive(Debug, Clone)]
pub struct Subspace3 {
    pub kind: Subspace3Kind,
    /// The physical two-qubit interaction.
    pub interaction: Mat,
    /// Three-qubit H0 with ground energy 0 and gap 1.
    pub h0: Mat,
    /// 8 × 2: |0_L⟩ in the +1 and |1_L⟩ in the −1 eigenspace of the symmetry, with
    /// ⟨0_L|X_0|1_L⟩ real and positive.
    pub basis: Mat,
}

#[derive(Debug, Clone, Serialize)]
pub struct Realization {
    /// Weight of the physical interaction between site i of one triple and site j of the
    /// other.
    pub weights: [[f64; 3]; 3],
    /// First-order logical coupling, 4 × 4.
    #[serde(skip)]
    pub effective: Mat,
    /// Logical XX/YY/ZZ… coefficients as a 3×3 table.
    pub correlations: [[f64; 3]; 3],
    /// YY coefficient of the realized XX + α′YY (second kind only).
    pub alpha_prime: Option<f64>,
    /// Largest deviation of the logical coupling from the intended form.
    pub residual: f64,
}

impl Subspace3 {
    pub fn new(kind: Subspace3Kind) -> Result<Subspace3> {
        let h = kind.interaction()?;
        let mut raw = zeros(8, 8);
        for (x, y, w) in kind.triple() {
            raw += embed(&h, &[x, y], 3, 2) * c(w);
        }
        let spec = diagonalize(&raw)?;
        let l = &spec.eigenvalues;
        let tol = 1e-8 * (1.0 + max_abs(&raw));
        if l[1] - l[0] > tol || l[2] - l[1] < tol {
            let dim = l.iter().filter(|&&x| x - l[0] < tol).count();
            return Err(Error::BadKind(format!(
                "ground space of {kind:?} is {dim}-dimensional, need 2"
            )));
        }
        let h0 = (raw - eye(8) * c(l[0])) / c(l[2] - l[0]);
        let ground = spec.eigenvectors.columns(0, 2).into_owned();
        let sym = kind.symmetry();
        let sector = |sign: f64| -> Result<Vector> {
            let proj = (eye(8) + &sym * c(sign)) * c(0.5);
            let g = &proj * &ground;
            let k = (0..2)
                .max_by(|&a, &b| g.column(a).norm().total_cmp(&g.column(b).norm()))
                .expect("two columns");
            let v = g.column(k).into_owned();
            let nv = v.norm();
            if nv < 1e-6 {
                return Err(Error::BadKind(format!(
                    "ground space of {kind:?} misses a symmetry sector"
                )));
            }
            Ok(v / c(nv))
        };
        let mut zero = sector(1.0)?;
        let mut one = sector(-1.0)?;
        let big = zero
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("nonempty");
        zero *= big.conj() / c(big.norm());
        let x0 = embed(&Pauli::X.matrix(), &[0], 3, 2);
        let m = (zero.adjoint() * &x0 * &one)[(0, 0)];
        if m.norm() > 1e-9 {
            one *= m.conj() / c(m.norm());
        }
        let mut basis = zeros(8, 2);
        basis.set_column(0, &zero.column(0));
        basis.set_column(1, &one.column(0));
        Ok(Subspace3 {
            kind,
            interaction: h,
            h0,
            basis,
        })
    }

    /// Logical qubit u on physical sites 3u, 3u+1, 3u+2.
    pub fn encoding(&self, n_logical: usize) -> Result<Encoding> {
        let groups: Vec<Vec<usize>> = (0..n_logical)
            .map(|u| (3 * u..3 * u + 3).collect())
            .collect();
        subspace_encoding(&groups, 3 * n_logical, &self.basis)
    }

    /// First-order logical coupling produced by the interaction between site i of one
    /// triple and site j of the next.
    pub fn coupling(&self, i: usize, j: usize) -> Result<Mat> {
        if i >= 3 || j >= 3 {
            return Err(Error::BadPair(i, j));
        }
        let b = kron(&self.basis, &self.basis);
        Ok(b.adjoint() * embed(&self.interaction, &[i, 3 + j], 6, 2) * b)
    }

    /// Cross-triple weights whose first-order coupling is XX + YY (first and third kinds)
    /// or XX + α′YY (second kind), by minimum-norm least squares.
    pub fn realize(&self) -> Result<Realization> {
        let couplings: Vec<Mat> = (0..9)
            .map(|k| self.coupling(k / 3, k % 3))
            .collect::<Result<_>>()?;
        let corr = |m: &Mat| decompose2(m).3;
        let columns: Vec<[[f64; 3]; 3]> = couplings.iter().map(corr).collect();
        let xy_only = !matches!(self.kind, Subspace3Kind::Xyz { .. });
        // equations over the 3×3 correlation table; the second kind leaves YY free
        let rows: Vec<(usize, usize, f64)> = (0..3)
            .flat_map(|p| (0..3).map(move |q| (p, q)))
            .filter(|&(p, q)| xy_only || (p, q) != (1, 1))
            .map(|(p, q)| {
                (
                    p,
                    q,
                    if p == q && (p == 0 || (p == 1 && xy_only)) {
                        1.0
                    } else {
                        0.0
                    },
                )
            })
            .collect();
        let a = DMatrix::from_fn(rows.len(), 9, |r, k| columns[k][rows[r].0][rows[r].1]);
        let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
        let w = a
            .clone()
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::BadKind(e.to_string()))?;
        let weights: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| w[3 * i + j]));
        let mut effective = zeros(4, 4);
        for (k, m) in couplings.iter().enumerate() {
            effective += m * c(w[k]);
        }
        let (_, la, lb, correlations) = decompose2(&effective);
        let alpha_prime = (!xy_only).then_some(correlations[1][1]);
        let mut want = [[0.0; 3]; 3];
        want[0][0] = 1.0;
        want[1][1] = alpha_prime.unwrap_or(1.0);
        let mut residual = la.iter().chain(&lb).fold(0.0f64, |m, x| m.max(x.abs()));
        for p in 0..3 {
            for q in 0..3 {
                residual = residual.max((correlations[p][q] - want[p][q]).abs());
            }
        }
        Ok(Realization {
            weights,
            effective,
            correlations,
            alpha_prime,
            residual,
        })
    }
}
