//! Sample-based check of the encoding axioms.

use super::Encoding;
use crate::config::Config;
use crate::hamcore::linalg::{
    c, eigvalsh, eye, hermitian_defect, max_abs, max_abs_diff, projector_rank, Mat,
};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub pass: bool,
    pub worst_deviation: f64,
    pub isometry_violation: bool,
    pub failures: Vec<String>,
}

/// Checks, for every sample A: E(A) Hermitian and its spectrum on the encoded subspace equal
/// to spec(A) repeated p+q times; for consecutive sample pairs (A, B): convexity at
/// p ∈ {0, 0.25, 0.5, 1} and E′(AB) = E′(A)E′(B) on the encoded subspace. The isometry and
/// projector structure is checked first.
pub fn verify_encoding_axioms(e: &Encoding, samples: &[Mat]) -> AxiomReport {
    let cfg = Config::default();
    let mut failures = vec![];
    let mut worst: f64 = 0.0;
    let mut note = |what: String, dev: f64, tol: f64, failures: &mut Vec<String>| {
        worst = worst.max(dev);
        if !(dev <= tol) {
            failures.push(format!("{what}: deviation {dev:.3e}"));
        }
    };

    let iso = max_abs_diff(&(e.v.adjoint() * &e.v), &eye(e.v.ncols()));
    let isometry_violation = !(iso <= cfg.tol_orth * (1.0 + e.v.ncols() as f64).sqrt());
    note("isometry".into(), iso, f64::INFINITY, &mut failures);
    if isometry_violation {
        failures.push(format!("IsometryViolation: ‖V†V − 1‖ = {iso:.3e}"));
    }
    let pq = max_abs(&(&e.proj_p * &e.proj_q));
    note("P·Q = 0".into(), pq, cfg.tol_orth, &mut failures);
    if projector_rank(&e.proj_p) != e.p || projector_rank(&e.proj_q) != e.q {
        failures.push("projector ranks differ from p, q".into());
    }

    let basis = e.encoded_basis();
    let restrict = |m: &Mat| basis.adjoint() * m * &basis;
    let copies = e.p + e.q;
    let mut encoded = vec![];
    for (k, a) in samples.iter().enumerate() {
        let ea = match e.apply(a) {
            Ok(m) => m,
            Err(err) => {
                failures.push(format!("sample {k}: {err}"));
                encoded.push(None);
                continue;
            }
        };
        let scale = 1.0 + max_abs(a);
        note(
            format!("sample {k} hermiticity"),
            hermitian_defect(&ea) / scale,
            cfg.tol_herm,
            &mut failures,
        );
        let got = eigvalsh(&restrict(&ea));
        let mut want: Vec<f64> = eigvalsh(a)
            .into_iter()
            .flat_map(|l| std::iter::repeat_n(l, copies))
            .collect();
        want.sort_by(|x, y| x.total_cmp(y));
        let dev = if got.len() == want.len() {
            got.iter()
                .zip(&want)
                .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
                / scale
        } else {
            f64::INFINITY
        };
        note(
            format!("sample {k} spectrum"),
            dev,
            cfg.tol_eig,
            &mut failures,
        );
        encoded.push(Some(ea));
    }

    let n = samples.len();
    for k in 0..n.saturating_sub(1) {
        let (a, b) = (&samples[k], &samples[k + 1]);
        let (Some(ea), Some(eb)) = (&encoded[k], &encoded[k + 1]) else {
            continue;
        };
        let scale = (1.0 + max_abs(a)) * (1.0 + max_abs(b));
        for t in [0.0, 0.25, 0.5, 1.0] {
            let mix = a * c(t) + b * c(1.0 - t);
            let Ok(em) = e.apply(&mix) else { continue };
            let dev = max_abs_diff(&em, &(ea * c(t) + eb * c(1.0 - t))) / scale;
            note(
                format!("pair {k} convexity at {t}"),
                dev,
                cfg.tol_eig,
                &mut failures,
            );
        }
        let Ok(eab) = e.apply(&(a * b)) else { continue };
        let dev = max_abs_diff(&restrict(&eab), &restrict(&(ea * eb))) / scale;
        note(
            format!("pair {k} multiplicativity"),
            dev,
            cfg.tol_eig,
            &mut failures,
        );
    }

    AxiomReport {
        pass: failures.is_empty(),
        worst_deviation: worst,
        isometry_violation,
        failures,
    }
}
