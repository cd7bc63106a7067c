//! Perturbative gadgets: the first-, second- and third-order engines and the concrete
//! constructions built on them.
//!
//! A gadget lives on a simulator register whose first `target.n` sites carry the target
//! qubits. Mediator-type gadgets append ancilla sites held in a fixed state by H0;
//! subspace-type gadgets replace each target qubit by a block of physical qubits.

mod complex_real;
mod heisenberg;
mod mediator;
mod reductions;

pub use complex_real::{c2r_cutoff, c2r_delta, c2r_gadget, pauli_one_norm, phi_local};
pub use heisenberg::{
    first_order_table, heisenberg_first_order, heisenberg_pass, heisenberg_second_order, k4_h0,
    logical_pauli, second_order_closed_form, solve_pair_weights, table2_rows, Interaction,
    LogicalQubitGadget, PairSolution, Table2Row,
};
pub use mediator::{
    crossing, fork, subdivide_term, subdivision, three_to_two, y_elimination, y_elimination_group,
    y_groupable,
};
pub use reductions::{one_local_deletion, DeletionForm, Realization, Subspace3, Subspace3Kind};

use crate::config::Config;
use crate::encodings::{attach_states, Attachment, Encoding};
use crate::error::{Error, Result};
use crate::hamcore::linalg::{eye, max_abs, op_norm, Mat};
use crate::hamcore::{diagonalize, Hamiltonian, PauliTerm};
use crate::simcheck::{verify_simulation, SimulationReport};

/// Largest register assembled densely when measuring Λ; larger gadgets use the term-wise
/// norm bound.
const DENSE_NORM_DIM: usize = 256;

/// How the ground space of H0 is identified with the target register.
#[derive(Debug, Clone)]
pub enum Ground {
    /// Ancillas attached to target sites in fixed states.
    Mediators(Vec<Attachment>),
    /// Any other encoding onto the ground space.
    Fixed(Encoding),
    /// A local encoding too large to hold densely, kept as (original sites, simulator sites)
    /// blocks.
    Deferred(Vec<(Vec<usize>, Vec<usize>)>),
}

#[derive(Debug, Clone)]
pub struct PerturbativeGadget {
    pub name: String,
    /// 1, 2 or 3.
    pub order: u8,
    /// Hamiltonian the gadget simulates, on the target register.
    pub target: Hamiltonian,
    pub h0: Hamiltonian,
    pub h1: Hamiltonian,
    pub h2: Hamiltonian,
    /// Third order only.
    pub h1prime: Option<Hamiltonian>,
    pub ground: Ground,
    /// max(‖H1‖, ‖H1′‖, ‖H2‖).
    pub lambda: f64,
    /// Accept an H1 that couples the ground space to excited states (its effect is then
    /// suppressed by Δ rather than absent).
    pub allow_h1_leak: bool,
}

/// Operator norm when the register is small enough to assemble, else the term-wise bound.
pub fn norm_estimate(h: &Hamiltonian) -> f64 {
    if h.terms.is_empty() {
        return 0.0;
    }
    if h.dim() <= DENSE_NORM_DIM {
        if let Ok(m) = h.assemble() {
            return op_norm(&m);
        }
    }
    h.norm_bound()
}

/// coeff·|1⟩⟨1| on one qubit as Pauli terms.
pub(crate) fn excited_projector(site: usize, coeff: f64) -> [PauliTerm; 2] {
    [
        PauliTerm::identity(coeff / 2.0),
        PauliTerm::new(&[(site, crate::Pauli::Z)], -coeff / 2.0).expect("one site"),
    ]
}

impl PerturbativeGadget {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: &str,
        order: u8,
        target: Hamiltonian,
        h0: Hamiltonian,
        h1: Hamiltonian,
        h2: Hamiltonian,
        h1prime: Option<Hamiltonian>,
        ground: Ground,
    ) -> Result<PerturbativeGadget> {
        if !(1..=3).contains(&order) {
            return Err(Error::Invalid(format!("perturbative order {order}")));
        }
        if (order == 3) != h1prime.is_some() {
            return Err(Error::Invalid(
                "H1′ is required exactly at third order".into(),
            ));
        }
        let n_sim = h0.n;
        for (part, h) in [("H1", &h1), ("H2", &h2)]
            .into_iter()
            .chain(h1prime.iter().map(|h| ("H1′", h)))
        {
            if h.n != n_sim || h.d != h0.d {
                return Err(Error::DimMismatch(format!(
                    "{part} is on {} sites, H0 on {n_sim}",
                    h.n
                )));
            }
        }
        if target.n > n_sim {
            return Err(Error::DimMismatch(
                "target register exceeds the simulator".into(),
            ));
        }
        let mut lambda = norm_estimate(&h1).max(norm_estimate(&h2));
        if let Some(h) = &h1prime {
            lambda = lambda.max(norm_estimate(h));
        }
        Ok(PerturbativeGadget {
            name: name.to_string(),
            order,
            target,
            h0,
            h1,
            h2,
            h1prime,
            ground,
            lambda,
            allow_h1_leak: false,
        })
    }

    pub fn n_sim(&self) -> usize {
        self.h0.n
    }

    pub fn n_target(&self) -> usize {
        self.target.n
    }

    /// The encoding onto the ground space of H0.
    pub fn encoding(&self) -> Result<Encoding> {
        match &self.ground {
            Ground::Mediators(att) => attach_states(self.target.n, self.n_sim(), att),
            Ground::Fixed(e) => Ok(e.clone()),
            Ground::Deferred(_) => Err(Error::DimensionCap {
                dim: self.h0.dim(),
                cap: Config::from_env().dim_cap,
            }),
        }
    }

    /// Which simulator sites carry each target site.
    pub fn site_blocks(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        match &self.ground {
            Ground::Mediators(att) => (0..self.n_target())
                .map(|t| {
                    let mut sim = vec![t];
                    sim.extend(
                        att.iter()
                            .filter(|a| a.owner == t)
                            .flat_map(|a| a.sites.iter().copied()),
                    );
                    sim.sort_unstable();
                    (vec![t], sim)
                })
                .collect(),
            Ground::Fixed(e) => match &e.locality {
                Some(l) => l
                    .blocks
                    .iter()
                    .map(|b| (b.orig_sites.clone(), b.sim_sites.clone()))
                    .collect(),
                None => vec![((0..self.n_target()).collect(), (0..self.n_sim()).collect())],
            },
            Ground::Deferred(b) => b.clone(),
        }
    }

    /// Adds terms that act on target sites only: they join the target and pass through H1
    /// unchanged.
    pub fn absorb(&mut self, h: &Hamiltonian) -> Result<()> {
        if h.n != self.target.n || h.d != self.target.d {
            return Err(Error::DimMismatch(
                "absorbed terms must live on the target register".into(),
            ));
        }
        if !matches!(self.ground, Ground::Mediators(_)) {
            return Err(Error::Invalid(
                "only mediator gadgets pass target terms through".into(),
            ));
        }
        self.target.extend(h);
        self.h1.extend(&h.widened(self.n_sim()));
        self.lambda = self.lambda.max(norm_estimate(&self.h1));
        Ok(())
    }

    /// Target Hamiltonian pushed through the encoding and restricted to the encoded basis:
    /// what [`effective_hamiltonian`] must reproduce.
    pub fn encoded_target(&self) -> Result<Mat> {
        let e = self.encoding()?;
        Ok(e.restrict(&e.apply(&self.target.assemble()?)?))
    }
}

/// Low-energy effective Hamiltonian on the encoded basis B = V(1 ⊗ basis of P+Q):
/// order 1: B†H1B; order 2: B†H1B − B†H2 H0⁻¹ H2B; order 3: B†H1B + B†H2 H0⁻¹ H2 H0⁻¹ H2B,
/// with H0⁻¹ the inverse on the excited space.
pub fn effective_hamiltonian(g: &PerturbativeGadget) -> Result<Mat> {
    let cfg = Config::from_env();
    let e = g.encoding()?;
    let h0 = g.h0.assemble_capped(cfg.dim_cap)?;
    let h1 = g.h1.assemble_capped(cfg.dim_cap)?;
    let h2 = g.h2.assemble_capped(cfg.dim_cap)?;
    if h0.nrows() != e.dim_out() {
        return Err(Error::DimMismatch(
            "encoding does not match the simulator register".into(),
        ));
    }
    let basis = e.encoded_basis();
    let rank = basis.ncols();
    let scale = 1.0 + g.lambda * g.lambda;
    let tol = cfg.tol_assemble * scale;

    let spec = diagonalize(&h0)?;
    let ground = spec.eigenvalues.iter().filter(|&&l| l < 0.5).count();
    if ground != rank {
        return Err(Error::BlockViolation(format!(
            "H0 has {ground} levels below 1/2, encoded rank is {rank}"
        )));
    }
    let lowest = spec.eigenvalues.first().copied().unwrap_or(0.0);
    if lowest.abs() > cfg.tol_assemble * (1.0 + max_abs(&h0)) {
        return Err(Error::BlockViolation(format!(
            "ground energy of H0 is {lowest:e}, not 0"
        )));
    }
    if let Some(&gap) = spec.eigenvalues.get(rank) {
        if gap < 1.0 - cfg.degeneracy_tol {
            return Err(Error::BlockViolation(format!(
                "first excited level of H0 is {gap} < 1"
            )));
        }
    }
    let leak0 = max_abs(&(&h0 * &basis));
    if leak0 > cfg.tol_assemble * (1.0 + max_abs(&h0)) {
        return Err(Error::BlockViolation(
            "encoded subspace is not the ground space of H0".into(),
        ));
    }
    let mut weighted = spec.eigenvectors.clone();
    for (j, &l) in spec.eigenvalues.iter().enumerate() {
        weighted
            .column_mut(j)
            .scale_mut(if l > 0.5 { 1.0 / l } else { 0.0 });
    }
    let inv = weighted * spec.eigenvectors.adjoint();
    let plus = eye(h0.nrows()) - &basis * basis.adjoint();

    let block_diagonal = |m: &Mat, what: &str| -> Result<()> {
        let leak = max_abs(&(&plus * m * &basis));
        if leak > tol {
            return Err(Error::BlockViolation(format!(
                "{what} couples the ground space out (leak {leak:e})"
            )));
        }
        Ok(())
    };
    if !g.allow_h1_leak {
        block_diagonal(&h1, "H1")?;
    }
    let mut eff = basis.adjoint() * &h1 * &basis;
    if g.order >= 2 {
        let low = max_abs(&(basis.adjoint() * &h2 * &basis));
        if low > tol {
            return Err(Error::BlockViolation(format!(
                "(H2)−− is nonzero ({low:e})"
            )));
        }
    }
    let raised = &inv * &h2 * &basis;
    match g.order {
        1 => {}
        2 => eff -= basis.adjoint() * &h2 * &raised,
        _ => {
            let h1p = g
                .h1prime
                .as_ref()
                .expect("order 3 carries H1′")
                .assemble_capped(cfg.dim_cap)?;
            block_diagonal(&h1p, "H1′")?;
            let second = basis.adjoint() * &h2 * &raised;
            let dev = max_abs(&(basis.adjoint() * &h1p * &basis - second));
            if dev > tol {
                return Err(Error::BlockViolation(format!(
                    "(H1′)−− differs from the second-order term by {dev:e}"
                )));
            }
            eff += basis.adjoint() * &h2 * &inv * &h2 * &raised;
        }
    }
    Ok(eff)
}

/// Coefficients (on H0, H2, H1′, H1) of the simulator Hamiltonian for a given order.
pub fn schedule(order: u8, delta: f64) -> Vec<(&'static str, f64)> {
    match order {
        1 => vec![("h0", delta), ("h1", 1.0)],
        2 => vec![("h0", delta), ("h2", delta.sqrt()), ("h1", 1.0)],
        _ => vec![
            ("h0", delta),
            ("h2", delta.powf(2.0 / 3.0)),
            ("h1prime", delta.cbrt()),
            ("h1", 1.0),
        ],
    }
}

/// ΔH0 + H1, ΔH0 + Δ^{1/2}H2 + H1 or ΔH0 + Δ^{2/3}H2 + Δ^{1/3}H1′ + H1. Every term not
/// already tagged is tagged `name:part`.
pub fn build_simulator(g: &PerturbativeGadget, delta: f64) -> Hamiltonian {
    let mut out = Hamiltonian::new(g.n_sim(), g.h0.d);
    for (part, coeff) in schedule(g.order, delta) {
        let h = match part {
            "h0" => &g.h0,
            "h1" => &g.h1,
            "h2" => &g.h2,
            _ => g.h1prime.as_ref().expect("order 3 carries H1′"),
        };
        out.extend(&h.scaled(coeff).tagged(&format!("{}:{part}", g.name)));
    }
    out
}

/// Starting point of the Δ search: 16 times the perturbative scaling for the gadget order.
pub fn delta_seed(g: &PerturbativeGadget, eps: f64, eta: f64) -> f64 {
    let l = g.lambda.max(1e-12);
    let c0 = 16.0;
    match g.order {
        1 => c0 * (l * l / eps + l / eta),
        2 => c0 * (l.powi(6) / (eps * eps) + l * l / (eta * eta)),
        _ => c0 * (l.powi(12) / eps.powi(3) + l.powi(3) / eta.powi(3)),
    }
}

/// Smallest Δ in the doubling sequence from [`delta_seed`] at which H_sim(Δ) verifies as a
/// (Δ/2, η, ε)-simulation of the target.
pub fn delta_for(g: &PerturbativeGadget, eps: f64, eta: f64) -> Result<f64> {
    delta_for_report(g, eps, eta).map(|(d, _)| d)
}

/// [`delta_for`] together with the passing report.
pub fn delta_for_report(
    g: &PerturbativeGadget,
    eps: f64,
    eta: f64,
) -> Result<(f64, SimulationReport)> {
    delta_search(g, eps, eta, delta_seed(g, eps, eta))
}

/// Doubling search for the smallest passing Δ, starting at `start`.
pub fn delta_search(
    g: &PerturbativeGadget,
    eps: f64,
    eta: f64,
    start: f64,
) -> Result<(f64, SimulationReport)> {
    if !(eps > 0.0 && eta > 0.0) {
        return Err(Error::Invalid("ε and η must be positive".into()));
    }
    let cap = Config::from_env().delta_cap;
    let e = g.encoding()?;
    let mut delta = start.max(1.0);
    while delta <= cap {
        let sim = build_simulator(g, delta);
        if let Ok(r) = verify_simulation(&g.target, &sim, &e, delta / 2.0) {
            let r = r.judge(eta, eps);
            if r.pass {
                return Ok((delta, r));
            }
        }
        delta *= 2.0;
    }
    Err(Error::CapExceeded { cap })
}

/// Runs mediator gadgets side by side on one register. All must share the target register
/// and order; mediator sites and H0 supports must be pairwise disjoint, and each H2 may
/// only touch target sites and its own mediators.
pub fn parallel_merge(gs: &[PerturbativeGadget]) -> Result<PerturbativeGadget> {
    let first = gs
        .first()
        .ok_or_else(|| Error::Invalid("nothing to merge".into()))?;
    if gs.len() == 1 {
        return Ok(first.clone());
    }
    let n_target = first.n_target();
    let n_sim = gs.iter().map(|g| g.n_sim()).max().unwrap_or(n_target);
    let mut owned: Vec<Option<usize>> = vec![None; n_sim];
    let mut attachments = vec![];
    for (i, g) in gs.iter().enumerate() {
        if g.n_target() != n_target || g.order != first.order || g.h0.d != first.h0.d {
            return Err(Error::Invalid(
                "merged gadgets must share target register, order and d".into(),
            ));
        }
        let Ground::Mediators(att) = &g.ground else {
            return Err(Error::Invalid(format!(
                "gadget {} is not mediator-type",
                g.name
            )));
        };
        let mine: Vec<usize> = att.iter().flat_map(|a| a.sites.iter().copied()).collect();
        for &s in &mine {
            if let Some(j) = owned[s] {
                return Err(Error::OverlapViolation(format!(
                    "site {s} is a mediator of gadgets {j} and {i}"
                )));
            }
            owned[s] = Some(i);
        }
        for t in &g.h0.terms {
            if let Some(&s) = t.support().iter().find(|&&s| !mine.contains(&s)) {
                return Err(Error::OverlapViolation(format!(
                    "H0 of gadget {i} acts on site {s}"
                )));
            }
        }
        for t in &g.h2.terms {
            if let Some(&s) = t
                .support()
                .iter()
                .find(|&&s| s >= n_target && !mine.contains(&s))
            {
                return Err(Error::OverlapViolation(format!(
                    "H2 of gadget {i} acts on foreign mediator {s}"
                )));
            }
        }
        attachments.extend(att.iter().cloned());
    }
    let widen = |h: &Hamiltonian| h.widened(n_sim);
    let mut target = Hamiltonian::new(n_target, first.target.d);
    let mut h0 = Hamiltonian::new(n_sim, first.h0.d);
    let mut h1 = h0.clone();
    let mut h2 = h0.clone();
    let mut h1p = first.h1prime.as_ref().map(|_| h0.clone());
    for g in gs {
        target.extend(&g.target);
        h0.extend(&widen(&g.h0).tagged(&format!("{}:h0", g.name)));
        h1.extend(&widen(&g.h1).tagged(&format!("{}:h1", g.name)));
        h2.extend(&widen(&g.h2).tagged(&format!("{}:h2", g.name)));
        if let (Some(acc), Some(h)) = (h1p.as_mut(), &g.h1prime) {
            acc.extend(&widen(h).tagged(&format!("{}:h1prime", g.name)));
        }
    }
    let mut names: Vec<&str> = gs.iter().map(|g| g.name.as_str()).collect();
    names.dedup();
    let mut merged = PerturbativeGadget::new(
        &names.join("+"),
        first.order,
        target,
        h0,
        h1,
        h2,
        h1p,
        Ground::Mediators(attachments),
    )?;
    merged.allow_h1_leak = gs.iter().any(|g| g.allow_h1_leak);
    Ok(merged)
}
