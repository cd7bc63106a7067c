//! Complexity class of a set of one- and two-qubit interactions.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamcore::linalg::{hermitian_defect, Mat};
use crate::hamcore::Pauli;

const AXIS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionSet {
    /// 2×2 or 4×4 Hermitian blocks.
    pub interactions: Vec<Mat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Classical,
    Stoquastic,
    Universal,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Classical => "classical",
            Classification::Stoquastic => "stoquastic",
            Classification::Universal => "universal",
        }
    }
}

const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

fn coeff(h: &Mat, op: &Mat) -> f64 {
    (op * h).trace().re / op.nrows() as f64
}

/// Pauli coordinates of an interaction: 1-local vectors (one per site) and the 3×3
/// correlation matrix M_pq of σ_p ⊗ σ_q.
struct Parts {
    fields: Vec<Vector3<f64>>,
    m: Option<Matrix3<f64>>,
}

fn parts(h: &Mat) -> Result<Parts> {
    let defect = hermitian_defect(h);
    if defect > 1e-10 * (1.0 + h.norm()) {
        return Err(Error::NotHermitian(defect));
    }
    let id = Pauli::I.matrix();
    match h.nrows() {
        2 => Ok(Parts {
            fields: vec![Vector3::from_fn(|p, _| coeff(h, &XYZ[p].matrix()))],
            m: None,
        }),
        4 => {
            let kr = |a: &Mat, b: &Mat| a.kronecker(b);
            let a = Vector3::from_fn(|p, _| coeff(h, &kr(&XYZ[p].matrix(), &id)));
            let b = Vector3::from_fn(|p, _| coeff(h, &kr(&id, &XYZ[p].matrix())));
            let m = Matrix3::from_fn(|p, q| coeff(h, &kr(&XYZ[p].matrix(), &XYZ[q].matrix())));
            Ok(Parts {
                fields: vec![a, b],
                m: Some(m),
            })
        }
        k => Err(Error::DimMismatch(format!(
            "interaction of dimension {k} is neither 1- nor 2-qubit"
        ))),
    }
}

/// Classical if one single-qubit basis diagonalises every interaction, stoquastic if one
/// basis brings every 2-local part to a multiple of ZZ, universal otherwise.
pub fn classify(s: &InteractionSet) -> Result<Classification> {
    let all: Vec<Parts> = s.interactions.iter().map(parts).collect::<Result<_>>()?;
    let scale = all
        .iter()
        .flat_map(|p| {
            p.fields
                .iter()
                .map(|f| f.norm())
                .chain(p.m.iter().map(|m| m.norm()))
        })
        .fold(1.0f64, f64::max);
    let tol = AXIS_TOL * scale;
    let twos: Vec<Matrix3<f64>> = all
        .iter()
        .filter_map(|p| p.m)
        .filter(|m| m.norm() > tol)
        .collect();
    if twos.is_empty() {
        return Err(Error::Only1Local);
    }
    let mut axis: Option<Vector3<f64>> = None;
    for m in &twos {
        if (m - m.transpose()).norm() > tol {
            return Ok(Classification::Universal);
        }
        let eig = SymmetricEigen::new(*m);
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[j]
                .abs()
                .total_cmp(&eig.eigenvalues[i].abs())
        });
        if eig.eigenvalues[order[1]].abs() > tol {
            return Ok(Classification::Universal);
        }
        let v = eig.eigenvectors.column(order[0]).into_owned();
        match axis {
            None => axis = Some(v),
            Some(a) if a.cross(&v).norm() > AXIS_TOL => return Ok(Classification::Universal),
            Some(_) => {}
        }
    }
    let v = axis.expect("at least one 2-local part");
    let diagonal = all
        .iter()
        .flat_map(|p| p.fields.iter())
        .all(|f| f.cross(&v).norm() <= tol);
    Ok(if diagonal {
        Classification::Classical
    } else {
        Classification::Stoquastic
    })
}
