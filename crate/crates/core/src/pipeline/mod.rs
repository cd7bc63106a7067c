//! Pass manager: classification of interaction sets, the chain of gadget passes that
//! lowers a Hamiltonian into a target family, the (Δ, η, ε) budget across passes and
//! square-lattice routing.
//!
//! The chain is fixed: qudits to qubits, complex to real, Y elimination, subdivision down
//! to 3-local, 3→2, the Heisenberg/XY logical-qubit pass, then lattice routing. Passes that
//! have nothing to do are recorded as skipped. The budget split needs the pass count up
//! front, so every compilation first runs the chain structurally (all Δ = 1) to count it.

mod classify;
mod lattice;

pub use classify::{classify, Classification, InteractionSet};
pub use lattice::{
    lattice_violations, model_log10_delta, model_next_log10_weight, Cell, Round, RoundKind, Router,
    RoutingStats,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::encodings::{compose, identity_local, qudit_to_qubit, Encoding};
use crate::error::{Error, Result};
use crate::gadgets::{
    build_simulator, c2r_cutoff, c2r_delta, c2r_gadget, delta_search, delta_seed, heisenberg_pass,
    norm_estimate, parallel_merge, subdivide_term, three_to_two, y_elimination_group, y_groupable,
    Ground, Interaction, PerturbativeGadget,
};
use crate::hamcore::linalg::{eye, kron_all, op_norm, pow, zeros, ONE};
use crate::hamcore::{pauli_decompose, Hamiltonian, LocalTerm, Pauli, PauliTerm, Term};
use crate::simcheck::{compose_budget, verify_simulation, SimulationReport};

/// Above this log10 Δ a compile-only lattice run switches to symbolic weights.
const SYMBOLIC_LOG10: f64 = 15.0;
/// Largest simulator space for which compile-only mode still builds the output encoding.
const COMPILE_ENCODING_DIM: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "heisenberg")]
    Heisenberg,
    #[serde(rename = "xy")]
    Xy,
    #[serde(rename = "no_y_pauli")]
    NoYPauli,
    #[serde(rename = "real_2local_with_fields")]
    Real2LocalWithFields,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Heisenberg,
        Family::Xy,
        Family::NoYPauli,
        Family::Real2LocalWithFields,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Heisenberg => "heisenberg",
            Family::Xy => "xy",
            Family::NoYPauli => "no_y_pauli",
            Family::Real2LocalWithFields => "real_2local_with_fields",
        }
    }

    pub fn interaction(self) -> Option<Interaction> {
        match self {
            Family::Heisenberg => Some(Interaction::Heisenberg),
            Family::Xy => Some(Interaction::Xy),
            _ => None,
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnsupportedFamily(format!("unknown family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CompileOptions {
    pub family: Family,
    pub eps: f64,
    pub eta: f64,
    pub lattice: bool,
    /// Verify every pass and the end-to-end simulation by exact diagonalization.
    pub certify: bool,
}

impl CompileOptions {
    pub fn new(family: Family, eps: f64, eta: f64) -> CompileOptions {
        CompileOptions {
            family,
            eps,
            eta,
            lattice: false,
            certify: false,
        }
    }

    pub fn lattice(mut self, on: bool) -> Self {
        self.lattice = on;
        self
    }

    pub fn certify(mut self, on: bool) -> Self {
        self.certify = on;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub cutoff: f64,
    pub eps_measured: f64,
    pub eta_measured: f64,
    pub max_eigenvalue_error: f64,
    pub pass: bool,
}

impl From<&SimulationReport> for Certificate {
    fn from(r: &SimulationReport) -> Self {
        Certificate {
            cutoff: r.delta,
            eps_measured: r.eps_measured,
            eta_measured: r.eta_measured,
            max_eigenvalue_error: r.max_eigenvalue_error,
            pass: r.pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodingSummary {
    pub kind: String,
    pub blocks: usize,
    /// Most simulator sites carrying one original site.
    pub max_block: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PassRecord {
    pub name: String,
    pub order: u8,
    /// Gadget name → instances run side by side.
    pub gadgets: BTreeMap<String, usize>,
    pub n_in: usize,
    pub n_out: usize,
    /// None when the pass ran with symbolic weights.
    pub delta: Option<f64>,
    pub log10_delta: f64,
    pub cutoff: Option<f64>,
    pub eps: f64,
    pub eta: f64,
    pub encoding: EncodingSummary,
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedPass {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetPlan {
    pub eps: f64,
    pub eta: f64,
    /// (ε_i, η_i) per pass, innermost first.
    pub split: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainSummary {
    pub within_budget: bool,
    pub delta: Option<f64>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightStats {
    /// Largest non-identity term magnitude of the input.
    pub lambda0: f64,
    /// Same for the output; None when it only exists symbolically.
    pub lambda_sim: Option<f64>,
    pub log10_lambda_sim: f64,
    /// Gadget rounds run.
    pub rounds: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeSummary {
    #[serde(flatten)]
    pub stats: RoutingStats,
    /// Weights too large for f64 arithmetic were tracked as log10 only; the output carries
    /// the routed structure at Δ = 1.
    pub symbolic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompilationPlan {
    pub family: Family,
    pub mode: String,
    pub passes: Vec<PassRecord>,
    pub skipped: Vec<SkippedPass>,
    pub budget: BudgetPlan,
    pub chain: Option<ChainSummary>,
    pub end_to_end: Option<Certificate>,
    /// Original site → simulator sites that carry it.
    pub site_map: Vec<Vec<usize>>,
    pub weight_stats: WeightStats,
    pub lattice: Option<LatticeSummary>,
    pub warnings: Vec<String>,
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"))
}

impl CompilationPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    /// Whether every certificate present passed.
    pub fn certified(&self) -> bool {
        self.passes
            .iter()
            .filter_map(|p| p.certificate.as_ref())
            .all(|c| c.pass)
            && self.end_to_end.as_ref().is_none_or(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "family: {}", self.family.name());
        let _ = writeln!(s, "mode: {}", self.mode);
        let _ = writeln!(
            s,
            "requested: eps={:.6e} eta={:.6e}",
            self.budget.eps, self.budget.eta
        );
        for (i, p) in self.passes.iter().enumerate() {
            let gadgets: Vec<String> = p.gadgets.iter().map(|(k, v)| format!("{k}x{v}")).collect();
            let _ = writeln!(
                s,
                "pass {i}: {} order={} gadgets=[{}] n={}->{} delta={} log10_delta={:.4} cutoff={} eps={:.6e} eta={:.6e} encoding={}/{}",
                p.name,
                p.order,
                gadgets.join(","),
                p.n_in,
                p.n_out,
                fmt_opt(p.delta),
                p.log10_delta,
                fmt_opt(p.cutoff),
                p.eps,
                p.eta,
                p.encoding.kind,
                p.encoding.blocks
            );
            if let Some(c) = &p.certificate {
                let _ = writeln!(
                    s,
                    "  certificate: eps={:.6e} eta={:.6e} max_eig_err={:.6e} pass={}",
                    c.eps_measured, c.eta_measured, c.max_eigenvalue_error, c.pass
                );
            }
        }
        for k in &self.skipped {
            let _ = writeln!(s, "skipped: {} ({})", k.name, k.reason);
        }
        if let Some(c) = &self.chain {
            let _ = writeln!(
                s,
                "chain: within_budget={} delta={} eta={} eps={}{}",
                c.within_budget,
                fmt_opt(c.delta),
                fmt_opt(c.eta),
                fmt_opt(c.eps),
                c.error
                    .as_ref()
                    .map(|e| format!(" error={e}"))
                    .unwrap_or_default()
            );
        }
        if let Some(c) = &self.end_to_end {
            let _ = writeln!(
                s,
                "end_to_end: cutoff={:.6e} eps={:.6e} eta={:.6e} max_eig_err={:.6e} pass={}",
                c.cutoff, c.eps_measured, c.eta_measured, c.max_eigenvalue_error, c.pass
            );
        }
        let w = &self.weight_stats;
        let _ = writeln!(
            s,
            "weights: lambda0={:.6e} lambda_sim={} log10_lambda_sim={:.4} rounds={}",
            w.lambda0,
            fmt_opt(w.lambda_sim),
            w.log10_lambda_sim,
            w.rounds
        );
        if let Some(l) = &self.lattice {
            let t = &l.stats;
            let _ = writeln!(
                s,
                "lattice: {}x{} sites={} wires={} crossings={} forks={} subdivisions={} rounds={} sparse={} symbolic={}",
                t.height, t.width, t.sites, t.wires, t.crossings, t.forks, t.subdivisions, t.rounds, t.sparse, l.symbolic
            );
        }
        for (o, sims) in self.site_map.iter().enumerate() {
            let list: Vec<String> = sims.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "site {o}: {}", list.join(" "));
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct Compilation {
    pub hamiltonian: Hamiltonian,
    /// Composition of the per-pass encodings, when every pass had one small enough to build.
    pub encoding: Option<Encoding>,
    pub plan: CompilationPlan,
}

/// ε_i = ε/2^{count−i+1} and likewise η, for i = 1..count.
pub fn budget_split(eps: f64, eta: f64, count: usize) -> Vec<(f64, f64)> {
    (1..=count)
        .map(|i| {
            let f = 0.5f64.powi((count - i + 1) as i32);
            (eps * f, eta * f)
        })
        .collect()
}

fn term_magnitude(t: &Term) -> f64 {
    match t {
        Term::Pauli(p) => p.weight.abs(),
        Term::Local(l) => l.weight.abs() * op_norm(&l.block),
    }
}

/// Largest magnitude among terms that act on at least one site.
fn max_weight(h: &Hamiltonian) -> f64 {
    h.terms
        .iter()
        .filter(|t| !t.support().is_empty())
        .map(term_magnitude)
        .fold(0.0, f64::max)
}

fn pauli_parts(t: &Term) -> Option<Vec<PauliTerm>> {
    match t {
        Term::Pauli(p) => Some(vec![p.clone()]),
        Term::Local(l) => pauli_decompose(l, 2).ok(),
    }
}

/// Indices of terms that break the family's syntactic form. Heisenberg and XY allow
/// identities and 2-site blocks proportional to the family interaction; the Pauli
/// families look at the Pauli expansion of each term.
pub fn family_violations(h: &Hamiltonian, family: Family) -> Vec<usize> {
    let bad = |t: &Term| -> bool {
        if let Some(inter) = family.interaction() {
            let f = inter.block();
            return match t {
                Term::Pauli(p) => !p.is_identity(),
                Term::Local(l) if l.support.is_empty() => false,
                Term::Local(l) if l.support.len() == 2 && h.d == 2 => {
                    let c = (&f * &l.block).trace().re / (&f * &f).trace().re;
                    op_norm(&(&l.block - &f * crate::hamcore::linalg::c(c)))
                        > 1e-9 * (1.0 + op_norm(&l.block))
                }
                _ => true,
            };
        }
        if h.d != 2 {
            return true;
        }
        let max_k = if family == Family::Real2LocalWithFields {
            2
        } else {
            usize::MAX
        };
        match pauli_parts(t) {
            Some(parts) => parts
                .iter()
                .any(|p| p.weight != 0.0 && (p.y_count() > 0 || p.locality() > max_k)),
            None => true,
        }
    };
    h.terms
        .iter()
        .enumerate()
        .filter(|(_, t)| bad(t))
        .map(|(i, _)| i)
        .collect()
}

pub fn family_audit(h: &Hamiltonian, family: Family) -> bool {
    family_violations(h, family).is_empty()
}

fn nominal_report(cutoff: f64, eps: f64, eta: f64) -> SimulationReport {
    SimulationReport {
        delta: cutoff,
        eta_measured: eta,
        eta_bound: eta,
        eps_measured: eps,
        per_eigenvalue_errors: vec![],
        max_eigenvalue_error: eps,
        low_rank: 0,
        requested_eta: None,
        requested_eps: None,
        partition: None,
        time_evolution: vec![],
        noise: None,
        pass: true,
    }
}

/// Order-1 gadget from d-level qudits to ⌈log2 d⌉ qubits each: H1 is H pushed through the
/// binary embedding, H0 penalizes the unused levels of every qudit.
fn qudit_gadget(h: &Hamiltonian) -> Result<PerturbativeGadget> {
    let (n, d) = (h.n, h.d);
    let m = (usize::BITS - (d - 1).leading_zeros()) as usize;
    let mut vi = zeros(pow(2, m), d);
    for k in 0..d {
        vi[(k, k)] = ONE;
    }
    let block_sites = |s: usize| (s * m..(s + 1) * m).collect::<Vec<usize>>();
    let n_sim = n * m;
    let mut h1 = Hamiltonian::qubits(n_sim);
    for t in &h.terms {
        let Term::Local(l) = t else {
            return Err(Error::NotQubit(d));
        };
        let v = kron_all(std::iter::repeat_n(&vi, l.support.len()));
        let v = if l.support.is_empty() { eye(1) } else { v };
        let sites: Vec<usize> = l.support.iter().flat_map(|&s| block_sites(s)).collect();
        h1.push(LocalTerm::new(
            &sites,
            &v * &l.block * v.adjoint(),
            l.weight,
            2,
        )?);
    }
    let mut h0 = Hamiltonian::qubits(n_sim);
    if d < pow(2, m) {
        let unused = eye(pow(2, m)) - &vi * vi.adjoint();
        for s in 0..n {
            h0.push(LocalTerm::new(&block_sites(s), unused.clone(), 1.0, 2)?);
        }
    }
    let ground = if Hamiltonian::qubits(n_sim).dim() <= Config::from_env().dim_cap {
        Ground::Fixed(qudit_to_qubit(n, d)?)
    } else {
        Ground::Deferred((0..n).map(|s| (vec![s], block_sites(s))).collect())
    };
    PerturbativeGadget::new(
        "qudit_to_qubit",
        1,
        h.clone(),
        h0,
        h1,
        Hamiltonian::qubits(n_sim),
        None,
        ground,
    )
}

fn single(name: &str) -> BTreeMap<String, usize> {
    BTreeMap::from([(name.to_string(), 1)])
}

fn y_sites(t: &PauliTerm) -> Vec<usize> {
    t.sites
        .iter()
        .zip(&t.letters)
        .filter(|(_, &l)| l == Pauli::Y)
        .map(|(&s, _)| s)
        .collect()
}

fn as_hamiltonian(n: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Hamiltonian {
    let mut h = Hamiltonian::qubits(n);
    for t in terms {
        h.push(t);
    }
    h
}

fn pauli_list(h: &Hamiltonian) -> Vec<PauliTerm> {
    h.pauli_terms()
        .expect("Pauli form")
        .into_iter()
        .cloned()
        .collect()
}

/// log10(10^a + 10^b).
fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (1.0 + 10f64.powf(lo - hi)).log10()
}

#[derive(Clone, Copy)]
enum DeltaRule {
    /// Exact pass: fixed penalty and cutoff.
    Exact { delta: f64, cutoff: f64 },
    /// Perturbative pass: formula Δ for compile-only mode, search start for certification.
    Perturbative { compile: f64, start: f64 },
    /// Weights tracked in log10 only.
    Symbolic { log10: f64 },
}

struct Runner<'a> {
    opts: &'a CompileOptions,
    dry: bool,
    split: Vec<(f64, f64)>,
    h: Hamiltonian,
    passes: Vec<PassRecord>,
    skipped: Vec<SkippedPass>,
    reports: Vec<SimulationReport>,
    encodings: Option<Vec<Encoding>>,
    site_map: Vec<BTreeSet<usize>>,
    lattice: Option<LatticeSummary>,
    /// Components per lattice round, recorded by the dry run.
    lattice_rounds: Vec<usize>,
    max_log10_delta: f64,
    /// log10 of the largest term weight once the run has left f64 range.
    sym_log10_w: Option<f64>,
    warnings: Vec<String>,
}

impl<'a> Runner<'a> {
    fn new(
        h: &Hamiltonian,
        opts: &'a CompileOptions,
        dry: bool,
        split: Vec<(f64, f64)>,
        lattice_rounds: Vec<usize>,
    ) -> Self {
        Runner {
            opts,
            dry,
            split,
            h: h.clone(),
            passes: vec![],
            skipped: vec![],
            reports: vec![],
            encodings: if dry { None } else { Some(vec![]) },
            site_map: (0..h.n).map(|s| BTreeSet::from([s])).collect(),
            lattice: None,
            lattice_rounds,
            max_log10_delta: f64::NEG_INFINITY,
            sym_log10_w: None,
            warnings: vec![],
        }
    }

    fn budget(&self) -> (f64, f64) {
        self.split
            .get(self.passes.len())
            .copied()
            .unwrap_or((1.0, 1.0))
    }

    fn skip(&mut self, name: &str, reason: &str) {
        self.skipped.push(SkippedPass {
            name: name.into(),
            reason: reason.into(),
        });
    }

    fn certifying(&self) -> bool {
        self.opts.certify && !self.dry
    }

    /// log10 Δ for a compile-only round of `m` gadgets once Δ would leave f64 range, or None
    /// while real weights are still usable.
    fn symbolic_delta(&mut self, compile: f64, m: usize) -> Option<f64> {
        if self.dry || self.certifying() {
            return None;
        }
        let ld = compile.log10();
        if self.sym_log10_w.is_none() && ld.is_finite() && ld <= SYMBOLIC_LOG10 {
            return None;
        }
        let w = self
            .sym_log10_w
            .unwrap_or_else(|| max_weight(&self.h).max(1e-300).log10());
        let (eps, eta) = self.budget();
        let ld = match self.sym_log10_w {
            None if ld.is_finite() => ld,
            _ => model_log10_delta(w, m, eps, eta),
        };
        self.sym_log10_w = Some(model_next_log10_weight(w, ld));
        Some(ld)
    }

    /// Builds the simulator of `g`, records the pass and makes the simulator current.
    fn run_gadget(
        &mut self,
        name: &str,
        g: PerturbativeGadget,
        gadgets: BTreeMap<String, usize>,
        rule: DeltaRule,
    ) -> Result<()> {
        let (eps, eta) = self.budget();
        let n_in = self.h.n;
        let mut report = None;
        let (delta, log10_delta, cutoff) = if self.dry {
            (1.0, 0.0, Some(0.5))
        } else {
            match rule {
                DeltaRule::Exact { delta, cutoff } => {
                    if self.certifying() {
                        let sim = build_simulator(&g, delta);
                        let r = verify_simulation(&g.target, &sim, &g.encoding()?, cutoff)?
                            .judge(eta, eps);
                        report = Some(r);
                    } else {
                        report = Some(nominal_report(cutoff, 0.0, 0.0));
                    }
                    (delta, delta.log10(), Some(cutoff))
                }
                DeltaRule::Perturbative { compile, start } => {
                    let delta = if self.certifying() {
                        let (delta, r) = delta_search(&g, eps, eta, start)?;
                        report = Some(r);
                        delta
                    } else {
                        report = Some(nominal_report(compile / 2.0, eps, eta));
                        compile
                    };
                    (delta, delta.log10(), Some(delta / 2.0))
                }
                DeltaRule::Symbolic { log10 } => (1.0, log10, None),
            }
        };
        let symbolic = matches!(rule, DeltaRule::Symbolic { .. }) && !self.dry;
        self.max_log10_delta = self.max_log10_delta.max(log10_delta);
        let sim = build_simulator(&g, delta);
        let encoding = self.pass_encoding(&g)?;
        let blocks = g.site_blocks();
        self.site_map = self
            .site_map
            .iter()
            .map(|set| {
                blocks
                    .iter()
                    .filter(|(orig, _)| orig.iter().any(|o| set.contains(o)))
                    .flat_map(|(_, sim)| sim.iter().copied())
                    .collect()
            })
            .collect();
        let kind = match &g.ground {
            Ground::Mediators(_) => "mediator",
            Ground::Fixed(_) => "local",
            Ground::Deferred(_) => "local_deferred",
        };
        self.passes.push(PassRecord {
            name: name.to_string(),
            order: g.order,
            gadgets,
            n_in,
            n_out: g.n_sim(),
            delta: (!symbolic).then_some(delta),
            log10_delta,
            cutoff: if symbolic { None } else { cutoff },
            eps,
            eta,
            encoding: EncodingSummary {
                kind: kind.into(),
                blocks: blocks.len(),
                max_block: blocks.iter().map(|b| b.1.len()).max().unwrap_or(0),
            },
            certificate: report
                .as_ref()
                .filter(|_| self.certifying())
                .map(Certificate::from),
        });
        if let Some(r) = report {
            self.reports.push(r);
        }
        if let (Some(list), Some(e)) = (self.encodings.as_mut(), encoding) {
            list.push(e);
        } else {
            self.encodings = None;
        }
        self.h = sim;
        Ok(())
    }

    fn pass_encoding(&self, g: &PerturbativeGadget) -> Result<Option<Encoding>> {
        if self.encodings.is_none() {
            return Ok(None);
        }
        let cap = Config::from_env().dim_cap;
        let dim = g.h0.dim();
        if self.certifying() {
            return g.encoding().map(Some);
        }
        if dim > cap || dim > COMPILE_ENCODING_DIM {
            return Ok(None);
        }
        Ok(g.encoding().ok())
    }

    /// Merges side-by-side mediator gadgets, passes the rest of the Hamiltonian through and
    /// runs the round.
    fn mediator_round(
        &mut self,
        name: &str,
        comps: Vec<PerturbativeGadget>,
        pass: &Hamiltonian,
        symbolic: Option<f64>,
    ) -> Result<()> {
        let (eps, eta) = self.budget();
        let m = comps.len() as f64;
        let compile = comps
            .iter()
            .map(|c| delta_seed(c, eps / m, eta / m))
            .fold(0.0, f64::max);
        let mut gadgets = BTreeMap::new();
        for c in &comps {
            *gadgets.entry(c.name.clone()).or_insert(0) += 1;
        }
        let mut merged = parallel_merge(&comps)?;
        let start = delta_seed(&merged, eps, eta);
        merged.absorb(pass)?;
        let floor = 2.0 * (self.h.norm_bound() + 1.0);
        let symbolic = symbolic.or_else(|| self.symbolic_delta(compile.max(floor), comps.len()));
        let rule = match symbolic {
            Some(log10) => DeltaRule::Symbolic { log10 },
            None => DeltaRule::Perturbative {
                compile: compile.max(floor),
                start: start.max(2.0 * norm_estimate(&self.h)),
            },
        };
        self.run_gadget(name, merged, gadgets, rule)?;
        self.h = self.h.to_pauli(0.0)?;
        Ok(())
    }

    fn current_pauli(&mut self) -> Result<Vec<PauliTerm>> {
        self.h = self.h.to_pauli(0.0)?;
        Ok(pauli_list(&self.h))
    }

    fn run(mut self) -> Result<Runner<'a>> {
        let family = self.opts.family;
        let two_local = family != Family::NoYPauli || self.opts.lattice;

        if self.h.d > 2 {
            let g = qudit_gadget(&self.h)?;
            let b = self.h.norm_bound();
            self.run_gadget(
                "qudit_to_qubit",
                g,
                single("qudit_to_qubit"),
                DeltaRule::Exact {
                    delta: 2.0 * b + 1.0,
                    cutoff: b + 0.5,
                },
            )?;
        } else {
            self.skip("qudit_to_qubit", "input is already qubits");
        }

        let terms = self.current_pauli()?;
        if terms.iter().any(|t| t.y_count() % 2 == 1) {
            let p = self.h.clone();
            let g = c2r_gadget(&p)?;
            self.run_gadget(
                "complex_to_real",
                g,
                single("c2r"),
                DeltaRule::Exact {
                    delta: c2r_delta(&p)?,
                    cutoff: c2r_cutoff(&p)?,
                },
            )?;
        } else {
            self.skip("complex_to_real", "Hamiltonian is real");
        }

        let terms = self.current_pauli()?;
        if terms.iter().any(|t| t.y_count() > 0) {
            let n = self.h.n;
            let mut groups: BTreeMap<Vec<usize>, Vec<Vec<PauliTerm>>> = BTreeMap::new();
            let mut pass = vec![];
            for t in terms {
                let s = y_sites(&t);
                if s.is_empty() {
                    pass.push(t);
                    continue;
                }
                let subs = groups.entry(s).or_default();
                let slot = subs.iter().position(|g| {
                    let mut trial = g.clone();
                    trial.push(t.clone());
                    y_groupable(&trial)
                });
                match slot {
                    Some(k) => subs[k].push(t),
                    None => subs.push(vec![t]),
                }
            }
            let comps = groups
                .values()
                .flatten()
                .enumerate()
                .map(|(k, g)| y_elimination_group(g, n, n + k))
                .collect::<Result<Vec<_>>>()?;
            self.mediator_round("y_elimination", comps, &as_hamiltonian(n, pass), None)?;
        } else {
            self.skip("y_elimination", "no Y letters");
        }

        if two_local {
            let mut ran = false;
            loop {
                let terms = self.current_pauli()?;
                if terms.iter().all(|t| t.locality() <= 3) {
                    break;
                }
                let n = self.h.n;
                let (big, rest): (Vec<PauliTerm>, Vec<PauliTerm>) =
                    terms.into_iter().partition(|t| t.locality() > 3);
                let comps = big
                    .iter()
                    .enumerate()
                    .map(|(k, t)| subdivide_term(t, n, n + k))
                    .collect::<Result<Vec<_>>>()?;
                self.mediator_round("subdivision", comps, &as_hamiltonian(n, rest), None)?;
                ran = true;
            }
            if !ran {
                self.skip("subdivision", "no term above 3-local");
            }
            let terms = self.current_pauli()?;
            if terms.iter().any(|t| t.locality() == 3) {
                let n = self.h.n;
                let (big, rest): (Vec<PauliTerm>, Vec<PauliTerm>) =
                    terms.into_iter().partition(|t| t.locality() == 3);
                let comps = big
                    .iter()
                    .enumerate()
                    .map(|(k, t)| three_to_two(t, n, n + k))
                    .collect::<Result<Vec<_>>>()?;
                self.mediator_round("three_to_two", comps, &as_hamiltonian(n, rest), None)?;
            } else {
                self.skip("three_to_two", "no 3-local term");
            }
        } else {
            self.skip("subdivision", "family allows any locality");
            self.skip("three_to_two", "family allows any locality");
        }

        if let Some(inter) = family.interaction() {
            self.h = self.h.to_pauli(0.0)?;
            let g = heisenberg_pass(&self.h, inter)?;
            let (eps, eta) = self.budget();
            let seed = delta_seed(&g, eps, eta);
            let floor = 2.0 * (self.h.norm_bound() + 1.0);
            let rule = match self.symbolic_delta(seed.max(floor), 1) {
                Some(log10) => DeltaRule::Symbolic { log10 },
                None => DeltaRule::Perturbative {
                    compile: seed.max(floor),
                    start: seed,
                },
            };
            self.run_gadget(inter.name(), g, single(inter.name()), rule)?;
        } else {
            self.skip("heisenberg", "family is not an interaction family");
        }

        if self.opts.lattice {
            self.route()?;
        } else {
            self.skip("lattice", "not requested");
        }
        Ok(self)
    }

    /// log10 Δ of each lattice round under the weight model, or None when Δ stays in f64
    /// range and real weights are used.
    fn symbolic_schedule(&self) -> Option<Vec<f64>> {
        if self.dry || self.certifying() {
            return None;
        }
        let first = self.passes.len();
        let terms = self.h.terms.len().max(1) as f64;
        let mut w = self
            .sym_log10_w
            .unwrap_or_else(|| max_weight(&self.h).max(1e-300).log10());
        let mut norm = match self.sym_log10_w {
            Some(w) => w + terms.log10(),
            None => (self.h.norm_bound() + 1.0).log10(),
        };
        let mut out = vec![];
        for (k, &m) in self.lattice_rounds.iter().enumerate() {
            let (eps, eta) = self.split.get(first + k).copied().unwrap_or((1.0, 1.0));
            let ld = model_log10_delta(w, m, eps, eta).max(2f64.log10() + norm);
            norm = log_add(norm, (m as f64).log10() + ld);
            w = model_next_log10_weight(w, ld);
            out.push(ld);
        }
        (self.sym_log10_w.is_some() || out.iter().any(|&ld| ld > SYMBOLIC_LOG10)).then_some(out)
    }

    fn route(&mut self) -> Result<()> {
        self.current_pauli()?;
        let mut router = Router::new(&self.h)?;
        let schedule = self.symbolic_schedule();
        let mut k = 0;
        let mut counts = vec![];
        while let Some(round) = router.next_round()? {
            counts.push(round.components.len());
            let name = format!("lattice_{}", round.kind.name());
            let sym = schedule
                .as_ref()
                .map(|s| s.get(k).copied().unwrap_or(f64::NAN));
            self.mediator_round(&name, round.components, &round.passthrough, sym)?;
            router.absorb(&self.h)?;
            k += 1;
        }
        let (h, stats) = router.finish()?;
        self.h = h;
        if self.dry {
            self.lattice_rounds = counts;
        }
        self.lattice = Some(LatticeSummary {
            stats,
            symbolic: schedule.is_some(),
        });
        Ok(())
    }
}

fn identity_compilation(h: &Hamiltonian, opts: &CompileOptions) -> Compilation {
    let mut out = h.clone();
    out.family_tag = Some(opts.family.name().to_string());
    let dim = h.dim();
    let encoding = (dim <= Config::from_env().dim_cap && dim <= COMPILE_ENCODING_DIM)
        .then(|| identity_local(h.n, h.d));
    let lw = max_weight(h);
    let plan = CompilationPlan {
        family: opts.family,
        mode: if opts.certify { "certify" } else { "compile" }.into(),
        passes: vec![],
        skipped: vec![SkippedPass {
            name: "all".into(),
            reason: "input is already in the target family".into(),
        }],
        budget: BudgetPlan {
            eps: opts.eps,
            eta: opts.eta,
            split: vec![],
        },
        chain: None,
        end_to_end: None,
        site_map: (0..h.n).map(|s| vec![s]).collect(),
        weight_stats: WeightStats {
            lambda0: lw,
            lambda_sim: Some(lw),
            log10_lambda_sim: lw.max(1e-300).log10(),
            rounds: 0,
        },
        lattice: None,
        warnings: vec![],
    };
    Compilation {
        hamiltonian: out,
        encoding,
        plan,
    }
}

/// Lowers `h` into `opts.family` (and onto the square lattice when `opts.lattice`).
pub fn compile(h: &Hamiltonian, opts: &CompileOptions) -> Result<Compilation> {
    if !(opts.eps > 0.0 && opts.eps.is_finite() && opts.eta > 0.0 && opts.eta.is_finite()) {
        return Err(Error::Invalid("ε and η must be positive".into()));
    }
    h.validate()?;
    if opts.lattice && opts.family.interaction().is_some() {
        return Err(Error::UnsupportedFamily(format!(
            "lattice routing is available for Pauli families, not {}",
            opts.family.name()
        )));
    }
    let cap = Config::from_env().dim_cap;
    if opts.certify && h.dim() > cap {
        return Err(Error::DimensionCap { dim: h.dim(), cap });
    }
    if family_audit(h, opts.family) && !opts.lattice {
        return Ok(identity_compilation(h, opts));
    }

    let dry = Runner::new(h, opts, true, vec![], vec![]).run()?;
    let split = budget_split(opts.eps, opts.eta, dry.passes.len());
    let run = Runner::new(h, opts, false, split.clone(), dry.lattice_rounds).run()?;

    let norm_c = norm_estimate(h);
    let symbolic = run.sym_log10_w.is_some() || run.lattice.as_ref().is_some_and(|l| l.symbolic);
    let chain = if symbolic {
        Some(ChainSummary {
            within_budget: false,
            delta: None,
            eta: None,
            eps: None,
            error: Some(
                "the chain has passes with symbolic Δ and cannot be folded numerically".into(),
            ),
        })
    } else {
        run.reports.split_first().map(|(first, rest)| {
            let mut acc = first.clone();
            let mut error = None;
            for r in rest {
                match compose_budget(r, &acc, norm_c) {
                    Ok(b) => acc = nominal_report(b.delta, b.eps, b.eta),
                    Err(e) => {
                        error = Some(e.to_string());
                        break;
                    }
                }
            }
            let ok = error.is_none();
            ChainSummary {
                within_budget: ok && acc.eps_measured <= opts.eps && acc.eta_measured <= opts.eta,
                delta: ok.then_some(acc.delta),
                eta: ok.then_some(acc.eta_measured),
                eps: ok.then_some(acc.eps_measured),
                error,
            }
        })
    };

    let mut warnings = run.warnings.clone();
    let encoding = match &run.encodings {
        Some(list) if !list.is_empty() => {
            let mut acc = list[0].clone();
            for e in &list[1..] {
                acc = compose(e, &acc)?;
            }
            Some(acc)
        }
        _ => None,
    };

    let mut end_to_end = None;
    if opts.certify {
        let e = encoding.as_ref().ok_or(Error::NotLocalEncoding)?;
        let cutoff = match chain.as_ref().and_then(|c| c.delta) {
            Some(d) => d,
            None => {
                let first = run.passes.first().and_then(|p| p.cutoff).unwrap_or(0.0);
                first
                    - run
                        .reports
                        .iter()
                        .skip(1)
                        .map(|r| r.eps_measured)
                        .sum::<f64>()
            }
        };
        let r = verify_simulation(h, &run.h, e, cutoff)?.judge(opts.eta, opts.eps);
        if let Some(bound) = chain.as_ref().and_then(|c| c.eps) {
            if r.eps_measured > bound {
                warnings.push(format!(
                    "measured end-to-end eps {:.6e} exceeds the composed bound {bound:.6e}",
                    r.eps_measured
                ));
            }
        }
        end_to_end = Some(Certificate::from(&r));
    } else {
        warnings.push(
            "compile-only mode: Δ values follow the perturbative formulas and are not certified"
                .into(),
        );
    }

    let mut out = run.h;
    out.family_tag = Some(opts.family.name().to_string());
    let violations = family_violations(&out, opts.family);
    if !violations.is_empty() {
        warnings.push(format!(
            "{} output terms fail the {} audit",
            violations.len(),
            opts.family.name()
        ));
    }
    if symbolic {
        warnings.push("weights exceed f64 range; the output carries the gadget structure at unit Δ and log10 weights are reported".into());
    }
    let lambda_sim = max_weight(&out);
    let log10_lambda_sim = lambda_sim.max(1e-300).log10();
    let log10_lambda_sim = if symbolic {
        run.max_log10_delta.max(log10_lambda_sim)
    } else {
        log10_lambda_sim
    };
    let plan = CompilationPlan {
        family: opts.family,
        mode: if opts.certify { "certify" } else { "compile" }.into(),
        weight_stats: WeightStats {
            lambda0: max_weight(h),
            lambda_sim: (!symbolic).then_some(lambda_sim),
            log10_lambda_sim,
            rounds: run.passes.len(),
        },
        passes: run.passes,
        skipped: run.skipped,
        budget: BudgetPlan {
            eps: opts.eps,
            eta: opts.eta,
            split,
        },
        chain,
        end_to_end,
        site_map: run
            .site_map
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
        lattice: run.lattice,
        warnings,
    };
    Ok(Compilation {
        hamiltonian: out,
        encoding,
        plan,
    })
}

/// Routes a 2-local X/Z Hamiltonian onto the square lattice in compile-only mode.
pub fn layout_square_lattice(h: &Hamiltonian, eps: f64, eta: f64) -> Result<Compilation> {
    if !family_audit(h, Family::Real2LocalWithFields) {
        return Err(Error::UnsupportedFamily(
            "lattice layout needs a real 2-local Hamiltonian without Y letters".into(),
        ));
    }
    compile(
        h,
        &CompileOptions::new(Family::Real2LocalWithFields, eps, eta).lattice(true),
    )
}
