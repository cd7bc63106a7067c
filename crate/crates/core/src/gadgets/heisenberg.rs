//! Logical qubits encoded in the singlet ground space of four qubits coupled all-to-all by
//! Heisenberg (XX+YY+ZZ) or XY (XX+YY) interactions.

use super::{Ground, PerturbativeGadget};
use crate::config::Config;
use crate::encodings::subspace_encoding;
use crate::error::{Error, Result};
use crate::hamcore::linalg::{c, eye, kron, max_abs, zeros, Mat};
use crate::hamcore::random::seeded;
use crate::hamcore::{
    diagonalize, embed, embed_add, heisenberg_block, xy_block, Hamiltonian, LocalTerm, Pauli,
    PauliTerm,
};
use nalgebra::Matrix4;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Interaction {
    Heisenberg,
    Xy,
}

impl Interaction {
    pub fn block(self) -> Mat {
        match self {
            Interaction::Heisenberg => heisenberg_block(),
            Interaction::Xy => xy_block(),
        }
    }

    /// Number of Pauli products in one interaction term.
    pub fn multiplicity(self) -> f64 {
        match self {
            Interaction::Heisenberg => 3.0,
            Interaction::Xy => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Interaction::Heisenberg => "heisenberg",
            Interaction::Xy => "xy",
        }
    }

    /// (weight of each pair term, identity shift) normalizing the K4 Hamiltonian to ground
    /// energy 0 and gap 4.
    fn k4_normalization(self) -> (f64, f64) {
        match self {
            Interaction::Heisenberg => (1.0, 6.0),
            Interaction::Xy => (2.0, 8.0),
        }
    }
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Normalized all-to-all Hamiltonian on four qubits: Σ_{i<j}H_ij + 6 (Heisenberg) or
/// 2(Σ_{i<j}(XX+YY)_ij + 4) (XY).
pub fn k4_h0(inter: Interaction) -> Mat {
    let (w, shift) = inter.k4_normalization();
    let mut m = eye(16) * c(shift);
    let b = inter.block() * c(w);
    for (i, j) in PAIRS {
        embed_add(&mut m, &b, &[i, j], 4, 2);
    }
    m
}

fn k4_terms(h: &mut Hamiltonian, sites: &[usize], inter: Interaction) -> Result<()> {
    let (w, shift) = inter.k4_normalization();
    for (i, j) in PAIRS {
        h.push(LocalTerm::new(&[sites[i], sites[j]], inter.block(), w, 2)?);
    }
    h.push(PauliTerm::identity(shift));
    Ok(())
}

/// Product of singlets on the two given pairs of a 4-qubit register.
fn singlet_pairs(p: (usize, usize), q: (usize, usize)) -> Mat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let amp = |a: usize, b: usize| match (a, b) {
        (0, 1) => s,
        (1, 0) => -s,
        _ => 0.0,
    };
    let mut v = zeros(16, 1);
    for k in 0..16 {
        let bit = |i: usize| (k >> (3 - i)) & 1;
        v[(k, 0)] = c(amp(bit(p.0), bit(p.1)) * amp(bit(q.0), bit(q.1)));
    }
    v
}

#[derive(Debug, Clone)]
pub struct LogicalQubitGadget {
    pub physical_sites: [usize; 4],
    pub interaction: Interaction,
    /// 16 × 2: |0_L⟩ = Ψ⁻₀₂Ψ⁻₁₃ and |1_L⟩ = (2/√3)Ψ⁻₀₁Ψ⁻₂₃ − (1/√3)|0_L⟩.
    pub logical_basis: Mat,
}

impl LogicalQubitGadget {
    pub fn new(physical_sites: [usize; 4], interaction: Interaction) -> Result<LogicalQubitGadget> {
        let mut s = physical_sites.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != 4 {
            return Err(Error::Invalid(format!(
                "logical qubit sites {physical_sites:?} are not distinct"
            )));
        }
        Ok(LogicalQubitGadget {
            physical_sites,
            interaction,
            logical_basis: Self::basis(),
        })
    }

    pub fn basis() -> Mat {
        let zero = singlet_pairs((0, 2), (1, 3));
        let pair = singlet_pairs((0, 1), (2, 3));
        let one = pair * c(2.0 / 3f64.sqrt()) - &zero * c(1.0 / 3f64.sqrt());
        let mut b = zeros(16, 2);
        b.set_column(0, &zero.column(0));
        b.set_column(1, &one.column(0));
        b
    }

    pub fn h0(&self) -> Mat {
        k4_h0(self.interaction)
    }

    /// H0 on the physical sites of an n-site register.
    pub fn hamiltonian(&self, n: usize) -> Result<Hamiltonian> {
        let mut h = Hamiltonian::qubits(n);
        k4_terms(&mut h, &self.physical_sites, self.interaction)?;
        Ok(h)
    }
}

/// Real coefficients (I, X, Y, Z) of a 2×2 operator.
pub fn logical_pauli(m: &Mat) -> [f64; 4] {
    [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z].map(|p| (p.matrix() * m).trace().re / 2.0)
}

fn check_pair(i: usize, j: usize) -> Result<()> {
    if i >= 4 || j >= 4 || i == j {
        return Err(Error::BadPair(i, j));
    }
    Ok(())
}

/// Π X_iX_k Π on the logical basis; the identity for i = k.
fn transfer(i: usize, k: usize) -> Mat {
    if i == k {
        return eye(2);
    }
    let b = LogicalQubitGadget::basis();
    let xx = kron(&Pauli::X.matrix(), &Pauli::X.matrix());
    b.adjoint() * embed(&xx, &[i, k], 4, 2) * b
}

/// Π H_ij Π / 3 on the logical basis: Π X_iX_j Π for Heisenberg, 2/3 of it for XY.
pub fn heisenberg_first_order(i: usize, j: usize, inter: Interaction) -> Result<Mat> {
    check_pair(i, j)?;
    let b = LogicalQubitGadget::basis();
    Ok(b.adjoint() * embed(&inter.block(), &[i, j], 4, 2) * b / c(3.0))
}

/// [`heisenberg_first_order`] for all six pairs as (I, X, Y, Z) coefficients.
pub fn first_order_table(inter: Interaction) -> Vec<((usize, usize), [f64; 4])> {
    PAIRS
        .iter()
        .map(|&(i, j)| {
            (
                (i, j),
                logical_pauli(&heisenberg_first_order(i, j, inter).expect("valid pair")),
            )
        })
        .collect()
}

/// Interaction weights α_ij of H_{i,j′} between logical qubits u (sites 0–3) and v (4–7).
pub type PairWeights = [[f64; 4]; 4];

/// −B†H2 H0⁻¹ H2 B on two logical qubits with H2 = Σ α_ij H_{i,4+j}, evaluated densely on
/// eight qubits.
pub fn heisenberg_second_order(alpha: &PairWeights, inter: Interaction) -> Result<Mat> {
    let h0 = kron(&k4_h0(inter), &eye(16)) + kron(&eye(16), &k4_h0(inter));
    let mut h2 = zeros(256, 256);
    let block = inter.block();
    for (i, row) in alpha.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if a != 0.0 {
                embed_add(&mut h2, &(&block * c(a)), &[i, 4 + j], 8, 2);
            }
        }
    }
    let b1 = LogicalQubitGadget::basis();
    let b = kron(&b1, &b1);
    let low = max_abs(&(b.adjoint() * &h2 * &b));
    if low > 1e-9 * (1.0 + max_abs(&h2)) {
        return Err(Error::BlockViolation(format!(
            "(H2)−− is nonzero ({low:e})"
        )));
    }
    let spec = diagonalize(&h0)?;
    let mut w = spec.eigenvectors.clone();
    for (k, &l) in spec.eigenvalues.iter().enumerate() {
        w.column_mut(k)
            .scale_mut(if l > 0.5 { 1.0 / l } else { 0.0 });
    }
    let inv = w * spec.eigenvectors.adjoint();
    let raised = &h2 * &b;
    Ok(-(raised.adjoint() * inv * raised))
}

/// Components (T^I, T^X, T^Z) with Π X_iX_k Π = T^I_ik + T^X_ik X + T^Z_ik Z.
fn transfer_components() -> [Matrix4<f64>; 3] {
    let mut out = [Matrix4::zeros(); 3];
    for i in 0..4 {
        for k in 0..4 {
            let p = logical_pauli(&transfer(i, k));
            out[0][(i, k)] = p[0];
            out[1][(i, k)] = p[1];
            out[2][(i, k)] = p[3];
        }
    }
    out
}

fn m4(a: &PairWeights) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| a[i][j])
}

fn unm4(m: &Matrix4<f64>) -> PairWeights {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

/// Coefficient of P⊗Q in the closed form: −(n/8) tr(αᵀ T^P α T^Q).
fn closed_coefficient(
    t: &[Matrix4<f64>; 3],
    alpha: &Matrix4<f64>,
    p: usize,
    q: usize,
    mult: f64,
) -> f64 {
    -(mult / 8.0) * (alpha.transpose() * t[p] * alpha * t[q]).trace()
}

/// −(n/8) Σ α_ij α_kl T_ik ⊗ T_jl with T_ik = Π X_iX_k Π, T_ii = 1, and n = 3 (Heisenberg)
/// or 2 (XY).
pub fn second_order_closed_form(alpha: &PairWeights, inter: Interaction) -> Mat {
    let t = transfer_components();
    let a = m4(alpha);
    let letters = [Pauli::I, Pauli::X, Pauli::Z];
    let mut out = zeros(4, 4);
    for p in 0..3 {
        for q in 0..3 {
            let w = closed_coefficient(&t, &a, p, q, inter.multiplicity());
            out += kron(&letters[p].matrix(), &letters[q].matrix()) * c(w);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Row {
    pub label: &'static str,
    pub alpha: PairWeights,
    /// The logical coupling the row produces, up to a positive factor.
    pub coupling: (Pauli, Pauli),
    pub sign: f64,
}

/// Weight patterns realizing ±ZZ, ±ZX and ±XX between two logical qubits.
pub fn table2_rows() -> Vec<Table2Row> {
    let w = |entries: &[(usize, usize, f64)]| {
        let mut a = [[0.0; 4]; 4];
        for &(i, j, x) in entries {
            a[i][j] = x;
        }
        a
    };
    let (x, z) = (Pauli::X, Pauli::Z);
    vec![
        Table2Row {
            label: "H11' - H33'",
            alpha: w(&[(0, 0, 1.0), (2, 2, -1.0)]),
            coupling: (z, z),
            sign: 1.0,
        },
        Table2Row {
            label: "H11' + H33'",
            alpha: w(&[(0, 0, 1.0), (2, 2, 1.0)]),
            coupling: (z, z),
            sign: -1.0,
        },
        Table2Row {
            label: "H13' - H11' + H32'",
            alpha: w(&[(0, 2, 1.0), (0, 0, -1.0), (2, 1, 1.0)]),
            coupling: (z, x),
            sign: 1.0,
        },
        Table2Row {
            label: "H13' - H11' - H32'",
            alpha: w(&[(0, 2, 1.0), (0, 0, -1.0), (2, 1, -1.0)]),
            coupling: (z, x),
            sign: -1.0,
        },
        Table2Row {
            label: "H11' - 2H22' + H33'",
            alpha: w(&[(0, 0, 1.0), (1, 1, -2.0), (2, 2, 1.0)]),
            coupling: (x, x),
            sign: 1.0,
        },
        Table2Row {
            label: "35H11' + 5H22' - 3H33' + 5H44'",
            alpha: w(&[(0, 0, 35.0), (1, 1, 5.0), (2, 2, -3.0), (3, 3, 5.0)]),
            coupling: (x, x),
            sign: -1.0,
        },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSolution {
    pub alpha: PairWeights,
    /// Largest deviation of the XX, XZ, ZX, ZZ coefficients from the request.
    pub residual: f64,
    pub iterations: usize,
}

/// Index into (T^I, T^X, T^Z) of a logical X or Z.
fn xz_index(p: Pauli) -> usize {
    if p == Pauli::X {
        1
    } else {
        2
    }
}

/// Table row scaled to produce `value`·P⊗Q; XZ uses the transposed ZX row.
fn single_type_seed(p: Pauli, q: Pauli, value: f64, inter: Interaction) -> Matrix4<f64> {
    let t = transfer_components();
    let sign = value.signum();
    let (lookup, transpose) = if (p, q) == (Pauli::X, Pauli::Z) {
        ((Pauli::Z, Pauli::X), true)
    } else {
        ((p, q), false)
    };
    let row = table2_rows()
        .into_iter()
        .find(|r| r.coupling == lookup && r.sign == sign)
        .expect("every X/Z pair has rows");
    let mut a = m4(&row.alpha);
    if transpose {
        a = a.transpose();
    }
    let v = closed_coefficient(&t, &a, xz_index(p), xz_index(q), inter.multiplicity());
    a * (value / v).sqrt()
}

/// H2 weights between two logical qubits whose closed-form second-order coupling has
/// 2-local part Σ J_PQ P⊗Q, P, Q ∈ {X, Z} (`j[0]` is the X row, `j[1]` the Z row).
/// Levenberg–Marquardt on the four quadratic equations, seeded from the table rows.
pub fn solve_pair_weights(j: &[[f64; 2]; 2], inter: Interaction) -> Result<PairSolution> {
    let t = transfer_components();
    let mult = inter.multiplicity();
    let types = [
        (Pauli::X, Pauli::X),
        (Pauli::X, Pauli::Z),
        (Pauli::Z, Pauli::X),
        (Pauli::Z, Pauli::Z),
    ];
    let want = [j[0][0], j[0][1], j[1][0], j[1][1]];
    if want.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("non-finite coupling".into()));
    }
    let scale = want.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Ok(PairSolution {
            alpha: [[0.0; 4]; 4],
            residual: 0.0,
            iterations: 0,
        });
    }
    let tol = 1e-12 * (1.0 + scale);
    let residual = |a: &Matrix4<f64>| -> [f64; 4] {
        std::array::from_fn(|k| {
            let (p, q) = types[k];
            closed_coefficient(&t, a, xz_index(p), xz_index(q), mult) - want[k]
        })
    };
    let norm = |r: &[f64; 4]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));

    let mut seed = Matrix4::zeros();
    for (k, &(p, q)) in types.iter().enumerate() {
        if want[k] != 0.0 {
            seed += single_type_seed(p, q, want[k], inter);
        }
    }
    let mut rng = seeded(0x5eed);
    let mut total = 0;
    let mut best: Option<(Matrix4<f64>, f64)> = None;
    for attempt in 0..24 {
        let mut a = if attempt == 0 {
            seed
        } else {
            Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0)) * scale.sqrt()
        };
        let mut r = residual(&a);
        let mut lambda = 1e-3;
        for _ in 0..400 {
            if norm(&r) <= tol {
                break;
            }
            total += 1;
            // rows of the Jacobian, each ∂C_PQ/∂α = −(n/4) T^P α T^Q
            let rows: Vec<Matrix4<f64>> = types
                .iter()
                .map(|&(p, q)| t[xz_index(p)] * a * t[xz_index(q)] * (-mult / 4.0))
                .collect();
            let gram = nalgebra::Matrix4::from_fn(|x, y| rows[x].dot(&rows[y]));
            let rv = nalgebra::Vector4::from_fn(|k, _| r[k]);
            let Some(y) = (gram + Matrix4::identity() * lambda).lu().solve(&rv) else {
                lambda *= 10.0;
                continue;
            };
            let mut step = Matrix4::zeros();
            for k in 0..4 {
                step -= rows[k] * y[k];
            }
            let cand = a + step;
            let rc = residual(&cand);
            if norm(&rc) < norm(&r) {
                a = cand;
                r = rc;
                lambda = (lambda / 3.0).max(1e-15);
            } else {
                lambda *= 4.0;
                if lambda > 1e12 {
                    break;
                }
            }
        }
        let err = norm(&r);
        if best.as_ref().is_none_or(|b| err < b.1) {
            best = Some((a, err));
        }
        if err <= tol {
            break;
        }
    }
    let (a, err) = best.expect("at least one attempt");
    if err > 1e-9 * (1.0 + scale) {
        return Err(Error::RoutingFailure(format!(
            "no H2 weights reach the requested coupling (residual {err:e})"
        )));
    }
    Ok(PairSolution {
        alpha: unm4(&a),
        residual: err,
        iterations: total,
    })
}

fn letter_index(t: &PauliTerm, k: usize) -> Result<usize> {
    match t.letters[k] {
        Pauli::X => Ok(0),
        Pauli::Z => Ok(1),
        _ => Err(Error::UnsupportedFamily(format!(
            "term {} has a Y letter",
            t.label()
        ))),
    }
}

/// Replaces every target qubit u by the K4 block on sites 4u..4u+4 and realizes a real
/// X/Z Hamiltonian with at most 2-local terms: pair couplings through second-order H2
/// weights, fields through first-order H_{0,3} and H_{0,2} terms, and the identity exactly.
pub fn heisenberg_pass(target: &Hamiltonian, inter: Interaction) -> Result<PerturbativeGadget> {
    if target.d != 2 {
        return Err(Error::NotQubit(target.d));
    }
    let n = target.n;
    let p = target.to_pauli(0.0)?;
    let mut ident = 0.0;
    let mut field = vec![[0.0; 2]; n];
    let mut pairs: BTreeMap<(usize, usize), [[f64; 2]; 2]> = BTreeMap::new();
    for t in p.pauli_terms().expect("Pauli form") {
        match t.locality() {
            0 => ident += t.weight,
            1 => field[t.sites[0]][letter_index(t, 0)?] += t.weight,
            2 => {
                let j = pairs
                    .entry((t.sites[0], t.sites[1]))
                    .or_insert([[0.0; 2]; 2]);
                j[letter_index(t, 0)?][letter_index(t, 1)?] += t.weight;
            }
            k => {
                return Err(Error::UnsupportedFamily(format!(
                    "{k}-local term {}",
                    t.label()
                )))
            }
        }
    }
    let mult = inter.multiplicity();
    let n_sim = 4 * n;
    let mut h0 = Hamiltonian::qubits(n_sim);
    let groups: Vec<Vec<usize>> = (0..n).map(|u| (4 * u..4 * u + 4).collect()).collect();
    for g in &groups {
        k4_terms(&mut h0, g, inter)?;
    }
    let mut h2 = Hamiltonian::qubits(n_sim);
    let letters = [Pauli::I, Pauli::X, Pauli::Z];
    for (&(u, v), j) in &pairs {
        let sol = solve_pair_weights(j, inter)?;
        for (i, row) in sol.alpha.iter().enumerate() {
            for (k, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    h2.push(LocalTerm::new(
                        &[4 * u + i, 4 * v + k],
                        inter.block(),
                        a,
                        2,
                    )?);
                }
            }
        }
        // the second-order term also produces fields and a constant; cancel them in H1
        let eff = second_order_closed_form(&sol.alpha, inter);
        let coef = |a: usize, b: usize| {
            (kron(&letters[a].matrix(), &letters[b].matrix()) * &eff)
                .trace()
                .re
                / 4.0
        };
        ident -= coef(0, 0);
        field[u][0] -= coef(1, 0);
        field[u][1] -= coef(2, 0);
        field[v][0] -= coef(0, 1);
        field[v][1] -= coef(0, 2);
    }
    let mut h1 = Hamiltonian::qubits(n_sim);
    for (u, f) in field.iter().enumerate() {
        let b03 = 3f64.sqrt() * f[0] / mult;
        let b02 = b03 / 2.0 - 3.0 * f[1] / (2.0 * mult);
        for (k, b) in [(3, b03), (2, b02)] {
            if b != 0.0 {
                h1.push(LocalTerm::new(&[4 * u, 4 * u + k], inter.block(), b, 2)?);
            }
        }
        ident += mult * (b03 + b02) / 3.0;
    }
    h1.push(PauliTerm::identity(ident));
    let ground = if h0.dim() <= Config::from_env().dim_cap {
        Ground::Fixed(subspace_encoding(
            &groups,
            n_sim,
            &LogicalQubitGadget::basis(),
        )?)
    } else {
        Ground::Deferred(
            groups
                .iter()
                .enumerate()
                .map(|(u, g)| (vec![u], g.clone()))
                .collect(),
        )
    };
    let mut g = PerturbativeGadget::new(inter.name(), 2, target.clone(), h0, h1, h2, None, ground)?;
    g.allow_h1_leak = inter == Interaction::Xy;
    Ok(g)
}
