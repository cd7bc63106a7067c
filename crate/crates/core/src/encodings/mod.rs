//! Encodings E(M) = V(M ⊗ P + M̄ ⊗ Q)V†, their state maps, local structure and
//! composition.
//!
//! The input register of V is ordered H ⊗ E with the ancilla E last. P and Q are
//! orthogonal projectors on E; their sum may be smaller than the identity on E.

mod axioms;
mod compose;
mod constructors;
mod local;

pub use axioms::{verify_encoding_axioms, AxiomReport};
pub use compose::compose;
pub use constructors::{
    attach_states, complex_to_real_enc, complex_to_real_local, identity, identity_local,
    qudit_to_qubit, subspace_encoding, Attachment,
};
pub use local::{check_locality, Locality, SiteBlock};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::hamcore::linalg::{
    c, conj, eye, kron, max_abs, max_abs_diff, partial_trace_last, projector_range, projector_rank,
    zeros, Mat, I,
};

#[derive(Debug, Clone)]
pub struct Encoding {
    /// Isometry from dim_in · anc_dim to the simulator space.
    pub v: Mat,
    pub dim_in: usize,
    pub anc_dim: usize,
    pub p: usize,
    pub q: usize,
    pub proj_p: Mat,
    pub proj_q: Mat,
    pub locality: Option<Locality>,
}

impl Encoding {
    /// Validates shapes, isometry and the projector pair.
    pub fn new(v: Mat, dim_in: usize, proj_p: Mat, proj_q: Mat) -> Result<Encoding> {
        let cfg = Config::default();
        let anc = proj_p.nrows();
        if proj_p.shape() != (anc, anc) || proj_q.shape() != (anc, anc) {
            return Err(Error::DimMismatch(
                "ancilla projectors must be square and equal-sized".into(),
            ));
        }
        if v.ncols() != dim_in * anc {
            return Err(Error::DimMismatch(format!(
                "V has {} columns, expected {}",
                v.ncols(),
                dim_in * anc
            )));
        }
        let defect = max_abs_diff(&(v.adjoint() * &v), &eye(v.ncols()));
        if defect > cfg.tol_orth * (1.0 + v.ncols() as f64).sqrt() {
            return Err(Error::Invalid(format!(
                "V is not an isometry (defect {defect:.3e})"
            )));
        }
        let p = projector_rank(&proj_p);
        let q = projector_rank(&proj_q);
        if p + q == 0 {
            return Err(Error::DegenerateEncoding);
        }
        for (name, pr) in [("P", &proj_p), ("Q", &proj_q)] {
            if max_abs_diff(&(pr * pr), pr) > cfg.tol_orth
                || max_abs_diff(&pr.adjoint(), pr) > cfg.tol_orth
            {
                return Err(Error::Invalid(format!(
                    "{name} is not an orthogonal projector"
                )));
            }
        }
        if max_abs(&(&proj_p * &proj_q)) > cfg.tol_orth {
            return Err(Error::Invalid("P and Q are not orthogonal".into()));
        }
        Ok(Encoding {
            v,
            dim_in,
            anc_dim: anc,
            p,
            q,
            proj_p,
            proj_q,
            locality: None,
        })
    }

    pub fn dim_out(&self) -> usize {
        self.v.nrows()
    }

    /// p ≥ 1.
    pub fn standard(&self) -> bool {
        self.p >= 1
    }

    /// V(M ⊗ P + M̄ ⊗ Q)V†. Works for any square M, which gives the extended map.
    pub fn apply(&self, m: &Mat) -> Result<Mat> {
        if m.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimMismatch(format!(
                "operator is {}x{}, encoding input is {}",
                m.nrows(),
                m.ncols(),
                self.dim_in
            )));
        }
        let inner = kron(m, &self.proj_p) + kron(&conj(m), &self.proj_q);
        Ok(&self.v * inner * self.v.adjoint())
    }

    /// Projector E(1) onto the encoded subspace.
    pub fn encoded_projector(&self) -> Mat {
        let inner = kron(&eye(self.dim_in), &(&self.proj_p + &self.proj_q));
        &self.v * inner * self.v.adjoint()
    }

    /// Orthonormal columns spanning the encoded subspace, V(1 ⊗ basis of P + Q).
    pub fn encoded_basis(&self) -> Mat {
        let anc_basis = projector_range(&(&self.proj_p + &self.proj_q));
        &self.v * kron(&eye(self.dim_in), &anc_basis)
    }

    /// B†MB for the encoded basis B.
    pub fn restrict(&self, m: &Mat) -> Mat {
        let b = self.encoded_basis();
        b.adjoint() * m * b
    }

    /// proj_p / p for standard encodings, otherwise proj_q / q.
    pub fn default_ancilla_state(&self) -> Mat {
        if self.p >= 1 {
            &self.proj_p / c(self.p as f64)
        } else {
            &self.proj_q / c(self.q as f64)
        }
    }

    /// V(ρ ⊗ σ)V† (standard) or V(ρ̄ ⊗ σ)V†, with σ supported on P (resp. Q).
    pub fn estate(&self, rho: &Mat, sigma: &Mat) -> Result<Mat> {
        if rho.shape() != (self.dim_in, self.dim_in)
            || sigma.shape() != (self.anc_dim, self.anc_dim)
        {
            return Err(Error::DimMismatch(
                "state or ancilla state has the wrong size".into(),
            ));
        }
        let (proj, r) = if self.p >= 1 {
            (&self.proj_p, rho.clone())
        } else {
            (&self.proj_q, conj(rho))
        };
        let dev = max_abs_diff(&(proj * sigma), sigma);
        if dev > 1e-9 {
            return Err(Error::BadAncilla);
        }
        Ok(&self.v * kron(&r, sigma) * self.v.adjoint())
    }

    /// (F, B) with F = tr_E[(1 ⊗ P)V†ρ′V] and B = conj(tr_E[(1 ⊗ Q)V†ρ′V]).
    pub fn fb_maps(&self, rho_sim: &Mat) -> Result<(Mat, Mat)> {
        let d = self.dim_out();
        if rho_sim.shape() != (d, d) {
            return Err(Error::DimMismatch(
                "simulator state has the wrong size".into(),
            ));
        }
        let x = self.v.adjoint() * rho_sim * &self.v;
        let one = eye(self.dim_in);
        let f = partial_trace_last(&(kron(&one, &self.proj_p) * &x), self.dim_in, self.anc_dim);
        let b = partial_trace_last(&(kron(&one, &self.proj_q) * &x), self.dim_in, self.anc_dim);
        Ok((f, conj(&b)))
    }

    /// E(ρ)/(p+q).
    pub fn estate_gibbs(&self, rho: &Mat) -> Result<Mat> {
        Ok(self.apply(rho)? / c((self.p + self.q) as f64))
    }

    /// Measurement map paired with `estate_gibbs` so that tr[emeas(A)·estate(ρ)] = tr(Aρ).
    pub fn emeas_gibbs(&self, a: &Mat) -> Result<Mat> {
        if self.p + self.q == 0 {
            return Err(Error::DegenerateEncoding);
        }
        if a.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimMismatch("observable has the wrong size".into()));
        }
        let total = (self.p + self.q) as f64;
        let (inner, f) = if self.p != 0 {
            (kron(a, &self.proj_p), total / self.p as f64)
        } else {
            (kron(&conj(a), &self.proj_q), total / self.q as f64)
        };
        Ok(&self.v * inner * self.v.adjoint() * c(f))
    }

    /// The matrix that encodes i·1 on the encoded subspace (the J of the encoding).
    pub fn j_operator(&self) -> Mat {
        let mut m = zeros(self.dim_in, self.dim_in);
        for k in 0..self.dim_in {
            m[(k, k)] = I;
        }
        self.apply(&m).expect("identity has the input size")
    }
}

/// Free-function form of [`Encoding::apply`].
pub fn apply(e: &Encoding, m: &Mat) -> Result<Mat> {
    e.apply(m)
}
