//! Gadgets with one mediator qubit held in |0⟩ by H0 = |1⟩⟨1|.

use super::{excited_projector, Ground, PerturbativeGadget};
use crate::encodings::Attachment;
use crate::error::{Error, Result};
use crate::hamcore::linalg::{kron, Vector, ONE, ZERO};
use crate::hamcore::{Hamiltonian, LocalTerm, Pauli, PauliTerm, Term};

fn zero_state() -> Vector {
    Vector::from_vec(vec![ONE, ZERO])
}

fn mediator_h0(n_sim: usize, site: usize) -> Hamiltonian {
    let mut h0 = Hamiltonian::qubits(n_sim);
    for t in excited_projector(site, 1.0) {
        h0.push(t);
    }
    h0
}

fn check_mediator(n_target: usize, mediator: usize, sites: &[usize]) -> Result<()> {
    if mediator < n_target {
        return Err(Error::OverlapViolation(format!(
            "mediator {mediator} is a target site"
        )));
    }
    if let Some(&s) = sites.iter().find(|&&s| s >= n_target) {
        return Err(Error::BadOperand(format!(
            "site {s} is outside the target register of {n_target}"
        )));
    }
    Ok(())
}

fn pauli(pairs: &[(usize, Pauli)], w: f64) -> PauliTerm {
    PauliTerm::new(pairs, w).expect("distinct sites")
}

/// coeff · t ⊗ σ_site.
fn with_letter(t: &Term, site: usize, letter: Pauli, coeff: f64) -> Result<Term> {
    match t {
        Term::Pauli(p) => {
            let mut pairs = p.pairs();
            pairs.push((site, letter));
            Ok(PauliTerm::new(&pairs, p.weight * coeff)?.into())
        }
        Term::Local(l) => {
            let mut sup = l.support.clone();
            sup.push(site);
            Ok(LocalTerm::new(&sup, kron(&l.block, &letter.matrix()), l.weight * coeff, 2)?.into())
        }
    }
}

fn square(t: &Term) -> Term {
    match t {
        Term::Pauli(p) => PauliTerm::identity(p.weight * p.weight).into(),
        Term::Local(l) => LocalTerm {
            support: l.support.clone(),
            block: &l.block * &l.block,
            weight: l.weight * l.weight,
            tag: None,
        }
        .into(),
    }
}

/// A ⊗ B for disjoint supports.
fn disjoint_product(a: &Term, b: &Term) -> Result<Term> {
    if let (Term::Pauli(p), Term::Pauli(q)) = (a, b) {
        return Ok(p.product(q).1.into());
    }
    let sup: Vec<usize> = a.support().iter().chain(b.support()).copied().collect();
    Ok(LocalTerm::new(&sup, kron(&a.local_block(2), &b.local_block(2)), 1.0, 2)?.into())
}

/// Second-order gadget for A ⊗ B: H0 = |1⟩⟨1|_c, H2 = (A X_c − X_c B)/√2, H1 = (A² + B²)/2.
/// The mediator is attached to the first site of A.
pub fn subdivision(
    a: &Term,
    b: &Term,
    n_target: usize,
    mediator: usize,
) -> Result<PerturbativeGadget> {
    if a.support().is_empty() || b.support().is_empty() {
        return Err(Error::BadOperand(
            "subdivision operands must act on at least one site".into(),
        ));
    }
    if let Some(s) = a.support().iter().find(|s| b.support().contains(s)) {
        return Err(Error::OverlapViolation(format!("A and B share site {s}")));
    }
    let all: Vec<usize> = a.support().iter().chain(b.support()).copied().collect();
    check_mediator(n_target, mediator, &all)?;
    let n_sim = mediator + 1;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut h2 = Hamiltonian::qubits(n_sim);
    h2.push(with_letter(a, mediator, Pauli::X, r)?);
    h2.push(with_letter(b, mediator, Pauli::X, -r)?);
    let mut h1 = Hamiltonian::qubits(n_sim);
    for t in [a, b] {
        let mut sq = square(t);
        sq.scale(0.5);
        h1.push(sq);
    }
    let mut target = Hamiltonian::qubits(n_target);
    target.push(disjoint_product(a, b)?);
    let att = Attachment {
        owner: a.support()[0],
        sites: vec![mediator],
        state: zero_state(),
    };
    PerturbativeGadget::new(
        "subdivision",
        2,
        target,
        mediator_h0(n_sim, mediator),
        h1,
        h2,
        None,
        Ground::Mediators(vec![att]),
    )
}

/// Subdivision of a k-local Pauli term into factors on its first ⌈k/2⌉ and remaining sites.
pub fn subdivide_term(
    t: &PauliTerm,
    n_target: usize,
    mediator: usize,
) -> Result<PerturbativeGadget> {
    let k = t.locality();
    if k < 2 {
        return Err(Error::BadOperand(format!(
            "cannot subdivide a {k}-local term"
        )));
    }
    let pairs = t.pairs();
    let split = k.div_ceil(2);
    let mag = t.weight.abs().sqrt();
    let a = pauli(&pairs[..split], mag);
    let b = pauli(&pairs[split..], t.weight.signum() * mag);
    let mut g = subdivision(&a.into(), &b.into(), n_target, mediator)?;
    g.target = Hamiltonian::qubits(n_target);
    g.target.push(t.clone());
    Ok(g)
}

/// Third-order gadget for a 3-local X/Z term A_a B_b C_c:
/// H2 = κA_aX_d + κB_bX_d + μC_c|1⟩⟨1|_d, H1′ = 2κ²(1 + A_aB_b), H1 = −wC_c,
/// with κ = (|w|/2)^{1/3} and μ = w/(2κ²). The mediator is attached to a.
pub fn three_to_two(t: &PauliTerm, n_target: usize, mediator: usize) -> Result<PerturbativeGadget> {
    if t.locality() != 3 {
        return Err(Error::BadOperand(format!(
            "3→2 needs a 3-local term, got {}",
            t.label()
        )));
    }
    if t.y_count() > 0 {
        return Err(Error::BadOperand(format!(
            "{} contains a Y letter",
            t.label()
        )));
    }
    check_mediator(n_target, mediator, &t.sites)?;
    let p = t.pairs();
    let w = t.weight;
    let kappa = (w.abs() / 2.0).cbrt();
    let mu = if kappa > 0.0 {
        w / (2.0 * kappa * kappa)
    } else {
        0.0
    };
    let n_sim = mediator + 1;
    let d = mediator;
    let mut h2 = Hamiltonian::qubits(n_sim);
    h2.push(pauli(&[p[0], (d, Pauli::X)], kappa));
    h2.push(pauli(&[p[1], (d, Pauli::X)], kappa));
    h2.push(pauli(&[p[2]], mu / 2.0));
    h2.push(pauli(&[p[2], (d, Pauli::Z)], -mu / 2.0));
    let mut h1p = Hamiltonian::qubits(n_sim);
    h1p.push(PauliTerm::identity(2.0 * kappa * kappa));
    h1p.push(pauli(&[p[0], p[1]], 2.0 * kappa * kappa));
    let mut h1 = Hamiltonian::qubits(n_sim);
    h1.push(pauli(&[p[2]], -w));
    let mut target = Hamiltonian::qubits(n_target);
    target.push(t.clone());
    let att = Attachment {
        owner: p[0].0,
        sites: vec![d],
        state: zero_state(),
    };
    PerturbativeGadget::new(
        "three_to_two",
        3,
        target,
        mediator_h0(n_sim, d),
        h1,
        h2,
        Some(h1p),
        Ground::Mediators(vec![att]),
    )
}

fn y_sites(t: &PauliTerm) -> Vec<usize> {
    t.pairs()
        .into_iter()
        .filter(|p| p.1 == Pauli::Y)
        .map(|p| p.0)
        .collect()
}

fn without_y(t: &PauliTerm) -> PauliTerm {
    let pairs: Vec<(usize, Pauli)> = t.pairs().into_iter().filter(|p| p.1 != Pauli::Y).collect();
    pauli(&pairs, 1.0)
}

/// Whether the Y-free remainders of `a` and `b` anticommute or multiply without an i
/// (no site carries X in one and Z in the other).
fn remainders_compatible(a: &PauliTerm, b: &PauliTerm) -> bool {
    let (ra, rb) = (without_y(a), without_y(b));
    if !ra.commutes_with(&rb) {
        return true;
    }
    ra.sites.iter().all(|&s| {
        let (x, y) = (ra.letter_at(s), rb.letter_at(s));
        y == Pauli::I || x == y
    })
}

/// Whether the terms can share one Y-elimination mediator: same nonempty even set of Y
/// sites and pairwise compatible remainders.
pub fn y_groupable(ts: &[PauliTerm]) -> bool {
    let Some(first) = ts.first() else {
        return false;
    };
    let s = y_sites(first);
    if s.is_empty() || s.len() % 2 == 1 {
        return false;
    }
    if ts.iter().any(|t| y_sites(t) != s) {
        return false;
    }
    ts.iter()
        .enumerate()
        .all(|(i, a)| ts[i + 1..].iter().all(|b| remainders_compatible(a, b)))
}

/// Y-elimination for a single term Y^{⊗2m} ⊗ A.
pub fn y_elimination(
    t: &PauliTerm,
    n_target: usize,
    mediator: usize,
) -> Result<PerturbativeGadget> {
    y_elimination_group(std::slice::from_ref(t), n_target, mediator)
}

/// Y-free second-order gadget for Σ_j w_j Y^S ⊗ A_j with a common Y set S of size 2m:
/// H2 = X_a(s X^S + (−1)^{m+1} Z^S Σ_j u_jA_j) with s = (Σ|w_j|/2)^{1/2}, u_j = w_j/(2s), and
/// H1 = s² + (Σ_j u_jA_j)², the square written out in Y-free strings.
pub fn y_elimination_group(
    ts: &[PauliTerm],
    n_target: usize,
    mediator: usize,
) -> Result<PerturbativeGadget> {
    let first = ts
        .first()
        .ok_or_else(|| Error::BadOperand("empty Y-elimination group".into()))?;
    let s_sites = y_sites(first);
    if s_sites.is_empty() || s_sites.len() % 2 == 1 {
        return Err(Error::OddYCount);
    }
    if !y_groupable(ts) {
        return Err(Error::BadOperand(
            "terms do not share a Y set with compatible remainders".into(),
        ));
    }
    let all: Vec<usize> = ts.iter().flat_map(|t| t.sites.iter().copied()).collect();
    check_mediator(n_target, mediator, &all)?;
    let m = s_sites.len() / 2;
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
    let total: f64 = ts.iter().map(|t| t.weight.abs()).sum();
    let s = (total / 2.0).sqrt();
    let u: Vec<f64> = ts
        .iter()
        .map(|t| if s > 0.0 { t.weight / (2.0 * s) } else { 0.0 })
        .collect();
    let rest: Vec<PauliTerm> = ts.iter().map(without_y).collect();
    let n_sim = mediator + 1;
    let a = mediator;

    let mut h2 = Hamiltonian::qubits(n_sim);
    let xs: Vec<(usize, Pauli)> = s_sites
        .iter()
        .map(|&q| (q, Pauli::X))
        .chain([(a, Pauli::X)])
        .collect();
    h2.push(pauli(&xs, s));
    for (r, &uj) in rest.iter().zip(&u) {
        let mut pairs: Vec<(usize, Pauli)> = s_sites.iter().map(|&q| (q, Pauli::Z)).collect();
        pairs.extend(r.pairs());
        pairs.push((a, Pauli::X));
        h2.push(pauli(&pairs, sign * uj));
    }

    let mut h1 = Hamiltonian::qubits(n_sim);
    h1.push(PauliTerm::identity(
        s * s + u.iter().map(|x| x * x).sum::<f64>(),
    ));
    for j in 0..rest.len() {
        for k in j + 1..rest.len() {
            if !rest[j].commutes_with(&rest[k]) {
                continue;
            }
            let (phase, prod) = rest[j].product(&rest[k]);
            h1.push(prod.scaled(2.0 * u[j] * u[k] * phase.re));
        }
    }

    let mut target = Hamiltonian::qubits(n_target);
    for t in ts {
        target.push(t.clone());
    }
    let att = Attachment {
        owner: s_sites[0],
        sites: vec![a],
        state: zero_state(),
    };
    PerturbativeGadget::new(
        "y_elimination",
        2,
        target,
        mediator_h0(n_sim, a),
        h1,
        h2,
        None,
        Ground::Mediators(vec![att]),
    )
}

fn two_local(t: &PauliTerm, what: &str) -> Result<()> {
    if t.locality() != 2 {
        return Err(Error::BadTopology(format!(
            "{what} needs 2-local terms, got {}",
            t.label()
        )));
    }
    Ok(())
}

/// Star gadget: H2 = X_e Σ c_i σ_i, with every product σ_iσ_j outside `wanted` cancelled in
/// H1 and the identity part of (Σ c_iσ_i)² restored.
fn star(
    name: &str,
    target: Hamiltonian,
    arms: &[(usize, Pauli, f64)],
    wanted: &[(usize, usize)],
    mediator: usize,
    owner: usize,
) -> Result<PerturbativeGadget> {
    let n_sim = mediator + 1;
    let mut h2 = Hamiltonian::qubits(n_sim);
    let mut h1 = Hamiltonian::qubits(n_sim);
    h1.push(PauliTerm::identity(arms.iter().map(|a| a.2 * a.2).sum()));
    for (i, &(s, p, ci)) in arms.iter().enumerate() {
        h2.push(pauli(&[(s, p), (mediator, Pauli::X)], ci));
        for &(r, q, cj) in &arms[i + 1..] {
            if wanted.contains(&(s.min(r), s.max(r))) {
                continue;
            }
            let w = 2.0 * ci * cj;
            if w != 0.0 {
                h1.push(pauli(&[(s, p), (r, q)], w));
            }
        }
    }
    let att = Attachment {
        owner,
        sites: vec![mediator],
        state: zero_state(),
    };
    PerturbativeGadget::new(
        name,
        2,
        target,
        mediator_h0(n_sim, mediator),
        h1,
        h2,
        None,
        Ground::Mediators(vec![att]),
    )
}

/// Two 2-local terms sharing vertex a with the same letter there, w₁σ_aσ_b + w₂σ_aσ_c, on a
/// star around mediator e: a keeps one simulator edge.
pub fn fork(
    t1: &PauliTerm,
    t2: &PauliTerm,
    n_target: usize,
    mediator: usize,
) -> Result<PerturbativeGadget> {
    two_local(t1, "fork")?;
    two_local(t2, "fork")?;
    let shared: Vec<usize> = t1
        .sites
        .iter()
        .copied()
        .filter(|s| t2.sites.contains(s))
        .collect();
    if shared.len() != 1 {
        return Err(Error::BadTopology(format!(
            "fork terms {} and {} must share exactly one site",
            t1.label(),
            t2.label()
        )));
    }
    let a = shared[0];
    if t1.letter_at(a) != t2.letter_at(a) {
        return Err(Error::BadTopology(format!(
            "fork terms act differently on the shared site {a}"
        )));
    }
    let b = *t1.sites.iter().find(|&&s| s != a).expect("2-local");
    let cc = *t2.sites.iter().find(|&&s| s != a).expect("2-local");
    check_mediator(n_target, mediator, &[a, b, cc])?;
    let ca = (t1.weight.abs().max(t2.weight.abs()) / 2.0).sqrt();
    let (cb, c2) = if ca > 0.0 {
        (-t1.weight / (2.0 * ca), -t2.weight / (2.0 * ca))
    } else {
        (0.0, 0.0)
    };
    let arms = [
        (a, t1.letter_at(a), ca),
        (b, t1.letter_at(b), cb),
        (cc, t2.letter_at(cc), c2),
    ];
    let mut target = Hamiltonian::qubits(n_target);
    target.push(t1.clone());
    target.push(t2.clone());
    star(
        "fork",
        target,
        &arms,
        &[(a.min(b), a.max(b)), (a.min(cc), a.max(cc))],
        mediator,
        a,
    )
}

/// Two 2-local terms on disjoint pairs (a, c) and (b, d) routed through one mediator e, so the
/// simulator interaction graph is the star on e.
pub fn crossing(
    t1: &PauliTerm,
    t2: &PauliTerm,
    n_target: usize,
    mediator: usize,
) -> Result<PerturbativeGadget> {
    two_local(t1, "crossing")?;
    two_local(t2, "crossing")?;
    if t1.sites.iter().any(|s| t2.sites.contains(s)) {
        return Err(Error::BadTopology(
            "crossing terms must act on disjoint pairs".into(),
        ));
    }
    let all: Vec<usize> = t1.sites.iter().chain(&t2.sites).copied().collect();
    check_mediator(n_target, mediator, &all)?;
    let halves = |t: &PauliTerm| {
        let c0 = (t.weight.abs() / 2.0).sqrt();
        let c1 = if c0 > 0.0 {
            -t.weight / (2.0 * c0)
        } else {
            0.0
        };
        [
            (t.sites[0], t.letters[0], c0),
            (t.sites[1], t.letters[1], c1),
        ]
    };
    let arms: Vec<(usize, Pauli, f64)> = halves(t1).into_iter().chain(halves(t2)).collect();
    let mut target = Hamiltonian::qubits(n_target);
    target.push(t1.clone());
    target.push(t2.clone());
    star(
        "crossing",
        target,
        &arms,
        &[(t1.sites[0], t1.sites[1]), (t2.sites[0], t2.sites[1])],
        mediator,
        t1.sites[0],
    )
}
