//! Pauli letters and weighted Pauli strings.

use super::linalg::{c, from_real, zeros, Mat, C64, I, ONE, ZERO};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Mat {
        match self {
            Pauli::I => from_real(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            Pauli::X => from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            Pauli::Y => Mat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        }
    }

    pub fn from_char(ch: char) -> Option<Pauli> {
        match ch {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Single-qubit product a·b = phase · letter.
    pub fn mul(a: Pauli, b: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        match (a, b) {
            (I, p) | (p, I) => (ONE, p),
            (X, X) | (Y, Y) | (Z, Z) => (ONE, I),
            (X, Y) => (I_, Z),
            (Y, X) => (-I_, Z),
            (Y, Z) => (I_, X),
            (Z, Y) => (-I_, X),
            (Z, X) => (I_, Y),
            (X, Z) => (-I_, Y),
        }
    }
}

const I_: C64 = I;

/// A real multiple of a tensor product of Pauli letters. Empty `sites` is the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub sites: Vec<usize>,
    pub letters: Vec<Pauli>,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

impl PauliTerm {
    /// Builds a term, sorting by site and dropping identity letters.
    pub fn new(pairs: &[(usize, Pauli)], weight: f64) -> Result<PauliTerm> {
        let mut v: Vec<(usize, Pauli)> = pairs
            .iter()
            .copied()
            .filter(|(_, p)| *p != Pauli::I)
            .collect();
        v.sort_by_key(|x| x.0);
        for w in v.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Invalid(format!(
                    "duplicate site {} in Pauli term",
                    w[0].0
                )));
            }
        }
        if !weight.is_finite() {
            return Err(Error::Invalid("non-finite Pauli weight".into()));
        }
        Ok(PauliTerm {
            sites: v.iter().map(|x| x.0).collect(),
            letters: v.iter().map(|x| x.1).collect(),
            weight,
            tag: None,
        })
    }

    pub fn identity(weight: f64) -> PauliTerm {
        PauliTerm {
            sites: vec![],
            letters: vec![],
            weight,
            tag: None,
        }
    }

    /// Parses whitespace-separated tokens such as `"X0 Z3"`; `""` or `"I"` is the identity.
    pub fn parse(s: &str, weight: f64) -> Result<PauliTerm> {
        let mut pairs = vec![];
        for tok in s.split_whitespace() {
            let mut chars = tok.chars();
            let letter = chars
                .next()
                .and_then(Pauli::from_char)
                .ok_or_else(|| Error::Invalid(format!("bad Pauli token '{tok}'")))?;
            let rest: String = chars.collect();
            if rest.is_empty() && letter == Pauli::I {
                continue;
            }
            let site = rest
                .parse::<usize>()
                .map_err(|_| Error::Invalid(format!("bad Pauli token '{tok}'")))?;
            pairs.push((site, letter));
        }
        PauliTerm::new(&pairs, weight)
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn is_identity(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn locality(&self) -> usize {
        self.sites.len()
    }

    pub fn letter_at(&self, site: usize) -> Pauli {
        self.sites
            .iter()
            .position(|&s| s == site)
            .map(|k| self.letters[k])
            .unwrap_or(Pauli::I)
    }

    pub fn y_count(&self) -> usize {
        self.letters.iter().filter(|&&p| p == Pauli::Y).count()
    }

    pub fn pairs(&self) -> Vec<(usize, Pauli)> {
        self.sites
            .iter()
            .copied()
            .zip(self.letters.iter().copied())
            .collect()
    }

    /// Same operator string with a different weight.
    pub fn scaled(&self, weight: f64) -> PauliTerm {
        PauliTerm {
            weight,
            ..self.clone()
        }
    }

    /// Sites relabelled through `map`.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> PauliTerm {
        let pairs: Vec<(usize, Pauli)> =
            self.pairs().into_iter().map(|(s, p)| (map(s), p)).collect();
        let mut t = PauliTerm::new(&pairs, self.weight).expect("relabel keeps sites distinct");
        t.tag = self.tag.clone();
        t
    }

    /// Operator product of the strings (weights multiplied): returns (phase, term) with the
    /// term's weight equal to the product of weights.
    pub fn product(&self, other: &PauliTerm) -> (C64, PauliTerm) {
        let mut sites: Vec<usize> = self
            .sites
            .iter()
            .chain(other.sites.iter())
            .copied()
            .collect();
        sites.sort_unstable();
        sites.dedup();
        let mut phase = ONE;
        let mut pairs = vec![];
        for s in sites {
            let (ph, p) = Pauli::mul(self.letter_at(s), other.letter_at(s));
            phase *= ph;
            pairs.push((s, p));
        }
        (
            phase,
            PauliTerm::new(&pairs, self.weight * other.weight).expect("valid product"),
        )
    }

    pub fn commutes_with(&self, other: &PauliTerm) -> bool {
        let anti = self
            .sites
            .iter()
            .filter(|&&s| {
                let a = self.letter_at(s);
                let b = other.letter_at(s);
                b != Pauli::I && a != b
            })
            .count();
        anti % 2 == 0
    }

    /// Dense 2^k × 2^k matrix of the string on its own support, weight excluded.
    pub fn local_matrix(&self) -> Mat {
        let mut m = super::linalg::eye(1);
        for p in &self.letters {
            m = m.kronecker(&p.matrix());
        }
        m
    }

    /// (x-mask, z-mask, number of Y) on an n-qubit register, site 0 most significant.
    pub fn masks(&self, n: usize) -> (usize, usize, usize) {
        let mut x = 0usize;
        let mut z = 0usize;
        let mut ny = 0;
        for (&s, &p) in self.sites.iter().zip(&self.letters) {
            let bit = 1usize << (n - 1 - s);
            let (bx, bz) = p.bits();
            if bx {
                x |= bit;
            }
            if bz {
                z |= bit;
            }
            if p == Pauli::Y {
                ny += 1;
            }
        }
        (x, z, ny)
    }

    /// Adds weight·P to an n-qubit dense matrix in place.
    pub fn add_to(&self, m: &mut Mat, n: usize) {
        let (x, z, ny) = self.masks(n);
        let base = I.powu(ny as u32) * self.weight;
        for k in 0..(1usize << n) {
            let sign = if (k & z).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            m[(k ^ x, k)] += base * sign;
        }
    }

    pub fn label(&self) -> String {
        if self.is_identity() {
            return "I".into();
        }
        self.pairs()
            .iter()
            .map(|(s, p)| format!("{}{}", p.as_char(), s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+} {}", self.weight, self.label())
    }
}

/// Coefficient of the Pauli string with the given masks in an n-qubit operator: tr(P M)/2^n.
pub fn pauli_coefficient(m: &Mat, n: usize, x: usize, z: usize, ny: usize) -> C64 {
    let mut s = ZERO;
    for j in 0..(1usize << n) {
        let sign = if (j & z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        s += m[(j, j ^ x)] * sign;
    }
    s * I.powu(ny as u32) / c((1usize << n) as f64)
}

/// Full Pauli expansion of an n-qubit operator; coefficients below `tol` are dropped.
/// The identity coefficient, if kept, comes first.
pub fn pauli_expand(m: &Mat, n: usize, tol: f64) -> Vec<PauliTerm> {
    let mut out = vec![];
    let dim = 1usize << n;
    assert_eq!(m.nrows(), dim);
    for code in 0..(1usize << (2 * n)) {
        let mut pairs = vec![];
        let mut rest = code;
        for s in (0..n).rev() {
            let p = Pauli::ALL[rest & 3];
            rest >>= 2;
            if p != Pauli::I {
                pairs.push((s, p));
            }
        }
        let t = PauliTerm::new(&pairs, 1.0).expect("distinct sites");
        let (x, z, ny) = t.masks(n);
        let coef = pauli_coefficient(m, n, x, z, ny);
        if coef.re.abs() > tol {
            out.push(t.scaled(coef.re));
        }
    }
    out
}

/// Matrix of Σ weights on n qubits.
pub fn pauli_sum_matrix(terms: &[PauliTerm], n: usize) -> Mat {
    let mut m = zeros(1 << n, 1 << n);
    for t in terms {
        t.add_to(&mut m, n);
    }
    m
}
