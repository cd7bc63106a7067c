//! Local terms, Hamiltonians and dense assembly.

use super::linalg::{c, hermitian_defect, max_abs, pow, zeros, Mat, ZERO};
use super::pauli::{pauli_expand, Pauli, PauliTerm};
use crate::config::Config;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A weighted dense Hermitian block on a sorted site list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTerm {
    pub support: Vec<usize>,
    pub block: Mat,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

impl LocalTerm {
    /// `block` is given in the order of `support` as passed; sites are sorted and the block
    /// permuted to match.
    pub fn new(support: &[usize], block: Mat, weight: f64, d: usize) -> Result<LocalTerm> {
        let k = support.len();
        if block.nrows() != pow(d, k) || block.ncols() != pow(d, k) {
            return Err(Error::DimMismatch(format!(
                "block is {}x{}, support of {k} sites needs {}",
                block.nrows(),
                block.ncols(),
                pow(d, k)
            )));
        }
        let defect = hermitian_defect(&block);
        if defect > Config::default().tol_herm * (1.0 + max_abs(&block)) {
            return Err(Error::NotHermitian(defect));
        }
        if !weight.is_finite() {
            return Err(Error::Invalid("non-finite weight".into()));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| support[i]);
        for w in order.windows(2) {
            if support[w[0]] == support[w[1]] {
                return Err(Error::Invalid(format!("duplicate site {}", support[w[0]])));
            }
        }
        let sorted: Vec<usize> = order.iter().map(|&i| support[i]).collect();
        let block = if order.iter().enumerate().all(|(i, &o)| i == o) {
            block
        } else {
            let p = super::linalg::factor_permutation(&vec![d; k], &order);
            &p * block * p.adjoint()
        };
        Ok(LocalTerm {
            support: sorted,
            block,
            weight,
            tag: None,
        })
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Term {
    Pauli(PauliTerm),
    Local(LocalTerm),
}

impl Term {
    pub fn support(&self) -> &[usize] {
        match self {
            Term::Pauli(p) => &p.sites,
            Term::Local(l) => &l.support,
        }
    }

    pub fn weight(&self) -> f64 {
        match self {
            Term::Pauli(p) => p.weight,
            Term::Local(l) => l.weight,
        }
    }

    pub fn tag(&self) -> Option<&str> {
        match self {
            Term::Pauli(p) => p.tag.as_deref(),
            Term::Local(l) => l.tag.as_deref(),
        }
    }

    pub fn set_tag(&mut self, tag: &str) {
        match self {
            Term::Pauli(p) => p.tag = Some(tag.to_string()),
            Term::Local(l) => l.tag = Some(tag.to_string()),
        }
    }

    pub fn scale(&mut self, f: f64) {
        match self {
            Term::Pauli(p) => p.weight *= f,
            Term::Local(l) => l.weight *= f,
        }
    }

    /// Weighted block on the term's own support.
    pub fn local_block(&self, d: usize) -> Mat {
        match self {
            Term::Pauli(p) => {
                assert_eq!(d, 2, "Pauli terms need qubits");
                p.local_matrix() * c(p.weight)
            }
            Term::Local(l) => &l.block * c(l.weight),
        }
    }

    pub fn relabel(&self, map: &dyn Fn(usize) -> usize, d: usize) -> Term {
        match self {
            Term::Pauli(p) => Term::Pauli(p.relabel(map)),
            Term::Local(l) => {
                let sup: Vec<usize> = l.support.iter().map(|&s| map(s)).collect();
                let mut t = LocalTerm::new(&sup, l.block.clone(), l.weight, d)
                    .expect("relabel of a valid term");
                t.tag = l.tag.clone();
                Term::Local(t)
            }
        }
    }
}

impl From<PauliTerm> for Term {
    fn from(p: PauliTerm) -> Self {
        Term::Pauli(p)
    }
}

impl From<LocalTerm> for Term {
    fn from(l: LocalTerm) -> Self {
        Term::Local(l)
    }
}

/// n sites of local dimension d with a list of terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    pub n: usize,
    pub d: usize,
    pub terms: Vec<Term>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<BTreeMap<usize, (i64, i64)>>,
}

impl Hamiltonian {
    pub fn new(n: usize, d: usize) -> Hamiltonian {
        Hamiltonian {
            n,
            d,
            terms: vec![],
            family_tag: None,
            geometry: None,
        }
    }

    pub fn qubits(n: usize) -> Hamiltonian {
        Hamiltonian::new(n, 2)
    }

    /// Convenience builder: `Hamiltonian::from_paulis(2, &[("X0 X1", 1.0), ("Z0", 0.5)])`.
    pub fn from_paulis(n: usize, spec: &[(&str, f64)]) -> Result<Hamiltonian> {
        let mut h = Hamiltonian::qubits(n);
        for (s, w) in spec {
            h.push(PauliTerm::parse(s, *w)?);
        }
        h.validate()?;
        Ok(h)
    }

    pub fn push(&mut self, t: impl Into<Term>) {
        self.terms.push(t.into());
    }

    /// d^n, saturating at `usize::MAX`.
    pub fn dim(&self) -> usize {
        self.d.checked_pow(self.n as u32).unwrap_or(usize::MAX)
    }

    pub fn max_locality(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.support().len())
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Invalid(format!("local dimension {} < 2", self.d)));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if let Some(&s) = t.support().iter().find(|&&s| s >= self.n) {
                return Err(Error::BadSupport {
                    term: i,
                    site: s,
                    n: self.n,
                });
            }
            if matches!(t, Term::Pauli(_)) && self.d != 2 {
                return Err(Error::NotQubit(self.d));
            }
            if let Term::Local(l) = t {
                if l.block.nrows() != pow(self.d, l.support.len()) {
                    return Err(Error::DimMismatch(format!(
                        "term {i} block does not match d = {}",
                        self.d
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn assemble(&self) -> Result<Mat> {
        self.assemble_capped(Config::from_env().dim_cap)
    }

    /// Σ_i weight_i · (block_i ⊗ 1), site 0 most significant.
    pub fn assemble_capped(&self, cap: usize) -> Result<Mat> {
        let dim = self.d.checked_pow(self.n as u32).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
        self.validate()?;
        let mut m = zeros(dim, dim);
        for t in &self.terms {
            match t {
                Term::Pauli(p) => p.add_to(&mut m, self.n),
                Term::Local(l) => embed_add(
                    &mut m,
                    &(&l.block * c(l.weight)),
                    &l.support,
                    self.n,
                    self.d,
                ),
            }
        }
        Ok(m)
    }

    /// Adds every term of `other` (same n and d).
    pub fn extend(&mut self, other: &Hamiltonian) {
        assert_eq!((self.n, self.d), (other.n, other.d));
        self.terms.extend(other.terms.iter().cloned());
    }

    pub fn scaled(&self, f: f64) -> Hamiltonian {
        let mut h = self.clone();
        for t in &mut h.terms {
            t.scale(f);
        }
        h
    }

    pub fn tagged(&self, tag: &str) -> Hamiltonian {
        let mut h = self.clone();
        for t in &mut h.terms {
            if t.tag().is_none() {
                t.set_tag(tag);
            }
        }
        h
    }

    /// Same terms on a larger register (extra sites appended).
    pub fn widened(&self, n: usize) -> Hamiltonian {
        assert!(n >= self.n);
        let mut h = self.clone();
        h.n = n;
        h
    }

    pub fn pauli_terms(&self) -> Option<Vec<&PauliTerm>> {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Pauli(p) => Some(p),
                Term::Local(_) => None,
            })
            .collect()
    }

    /// Sum of |weight|·‖block‖, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| match t {
                Term::Pauli(p) => p.weight.abs(),
                Term::Local(l) => l.weight.abs() * super::linalg::op_norm(&l.block),
            })
            .sum()
    }

    /// Rewrites every term as Pauli strings and merges equal strings. Requires d = 2.
    pub fn to_pauli(&self, tol: f64) -> Result<Hamiltonian> {
        if self.d != 2 {
            return Err(Error::NotQubit(self.d));
        }
        let mut acc: BTreeMap<Vec<(usize, Pauli)>, f64> = BTreeMap::new();
        for t in &self.terms {
            let parts = match t {
                Term::Pauli(p) => vec![p.clone()],
                Term::Local(l) => pauli_decompose(l, 2)?,
            };
            for p in parts {
                *acc.entry(p.pairs()).or_insert(0.0) += p.weight;
            }
        }
        let mut h = Hamiltonian {
            terms: vec![],
            ..self.clone()
        };
        for (pairs, w) in acc {
            if w.abs() > tol {
                h.push(PauliTerm::new(&pairs, w)?);
            }
        }
        Ok(h)
    }
}

/// Adds `block` (on `support`, sorted) ⊗ 1 into the full matrix.
pub fn embed_add(m: &mut Mat, block: &Mat, support: &[usize], n: usize, d: usize) {
    let k = support.len();
    let bd = pow(d, k);
    let dim = pow(d, n);
    if k == 0 {
        let v = block[(0, 0)];
        for i in 0..dim {
            m[(i, i)] += v;
        }
        return;
    }
    let strides: Vec<usize> = (0..n).map(|s| pow(d, n - 1 - s)).collect();
    let rest: Vec<usize> = (0..n).filter(|s| !support.contains(s)).collect();
    // offset of each local basis index within the full index
    let local_off: Vec<usize> = (0..bd)
        .map(|li| {
            let mut r = li;
            let mut off = 0;
            for j in (0..k).rev() {
                off += (r % d) * strides[support[j]];
                r /= d;
            }
            off
        })
        .collect();
    let nrest = pow(d, rest.len());
    for ri in 0..nrest {
        let mut r = ri;
        let mut base = 0;
        for j in (0..rest.len()).rev() {
            base += (r % d) * strides[rest[j]];
            r /= d;
        }
        for a in 0..bd {
            for b in 0..bd {
                let v = block[(a, b)];
                if v != ZERO {
                    m[(base + local_off[a], base + local_off[b])] += v;
                }
            }
        }
    }
}

/// Operator on the full register from a block on `support`.
pub fn embed(block: &Mat, support: &[usize], n: usize, d: usize) -> Mat {
    let dim = pow(d, n);
    let mut m = zeros(dim, dim);
    let mut order: Vec<usize> = (0..support.len()).collect();
    order.sort_by_key(|&i| support[i]);
    let sorted: Vec<usize> = order.iter().map(|&i| support[i]).collect();
    let b = if order.iter().enumerate().all(|(i, &o)| i == o) {
        block.clone()
    } else {
        let p = super::linalg::factor_permutation(&vec![d; support.len()], &order);
        &p * block * p.adjoint()
    };
    embed_add(&mut m, &b, &sorted, n, d);
    m
}

/// Pauli expansion of a qubit local term, relabelled onto its support. The identity
/// component, if nonzero, is returned first as an explicit identity term.
pub fn pauli_decompose(t: &LocalTerm, d: usize) -> Result<Vec<PauliTerm>> {
    if d != 2 {
        return Err(Error::NotQubit(d));
    }
    let k = t.support.len();
    let terms = pauli_expand(&t.block, k, 1e-14);
    Ok(terms
        .into_iter()
        .map(|p| {
            let w = p.weight * t.weight;
            let mut q = p.relabel(|s| t.support[s]).scaled(w);
            q.tag = t.tag.clone();
            q
        })
        .collect())
}
