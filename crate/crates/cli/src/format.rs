//! JSON documents for Hamiltonians, encodings and interaction sets.
//!
//! Stores are canonical: fixed key order, pretty-printed, shortest round-trip floats, and a
//! trailing newline. Loads are strict and report the offending field.

use crate::error::{CliError, Result};
use hamforge::encodings::{check_locality, Locality, SiteBlock};
use hamforge::hamcore::linalg::{hermitian_defect, max_abs};
use hamforge::pipeline::InteractionSet;
use hamforge::{Config, Encoding, Hamiltonian, LocalTerm, Mat, Pauli, PauliTerm, Term, C64};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

/// Largest site count a Hamiltonian file may declare.
pub const MAX_SITES: usize = 1 << 20;

/// Row-major complex matrix as rows of `[re, im]` pairs.
pub type MatrixData = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermEntry {
    pub sites: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixData>,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub schema_version: u32,
    pub n: usize,
    pub d: usize,
    pub terms: Vec<TermEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<BTreeMap<usize, [i64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_tag: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHamiltonian {
    schema_version: u32,
    n: usize,
    d: usize,
    terms: Vec<Value>,
    #[serde(default)]
    geometry: Option<BTreeMap<usize, [i64; 2]>>,
    #[serde(default)]
    family_tag: Option<String>,
}

pub fn matrix_data(m: &Mat) -> MatrixData {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

/// Checks shape and finiteness; `rows` and `cols` of None accept any size.
pub fn matrix_from_data(
    data: &MatrixData,
    rows: Option<usize>,
    cols: Option<usize>,
) -> std::result::Result<Mat, String> {
    let r = data.len();
    let c = data.first().map_or(0, |row| row.len());
    if let Some(want) = rows {
        if r != want {
            return Err(format!("expected {want} rows, found {r}"));
        }
    }
    if let Some(want) = cols {
        if c != want {
            return Err(format!("expected {want} columns, found {c}"));
        }
    }
    if let Some(i) = data.iter().position(|row| row.len() != c) {
        return Err(format!(
            "row {i} has {} entries, expected {c}",
            data[i].len()
        ));
    }
    if data.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err("non-finite entry".into());
    }
    Ok(Mat::from_fn(r, c, |i, j| {
        C64::new(data[i][j][0], data[i][j][1])
    }))
}

fn syntax(path: &str, text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| json_error(path, &e))
}

fn json_error(path: &str, e: &serde_json::Error) -> CliError {
    let msg = e.to_string();
    let msg = msg
        .rsplit_once(" at line ")
        .map_or(msg.as_str(), |(m, _)| m);
    CliError::parse(
        path,
        format!("line {}, column {}", e.line(), e.column()),
        msg,
    )
}

fn field<T: DeserializeOwned>(path: &str, location: &str, v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| {
        let msg = e.to_string();
        let msg = msg
            .rsplit_once(" at line ")
            .map_or(msg.as_str(), |(m, _)| m);
        CliError::parse(path, location, msg)
    })
}

fn check_version(path: &str, v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(CliError::parse(
            path,
            "schema_version",
            format!("unsupported version {v}, expected {SCHEMA_VERSION}"),
        ));
    }
    Ok(())
}

impl HamiltonianFile {
    pub fn from_hamiltonian(h: &Hamiltonian) -> HamiltonianFile {
        let terms = h
            .terms
            .iter()
            .map(|t| match t {
                Term::Pauli(p) => TermEntry {
                    sites: p.sites.clone(),
                    pauli: Some(p.letters.iter().map(|l| l.as_char()).collect()),
                    matrix: None,
                    weight: p.weight,
                    tag: p.tag.clone(),
                },
                Term::Local(l) => TermEntry {
                    sites: l.support.clone(),
                    pauli: None,
                    matrix: Some(matrix_data(&l.block)),
                    weight: l.weight,
                    tag: l.tag.clone(),
                },
            })
            .collect();
        HamiltonianFile {
            schema_version: SCHEMA_VERSION,
            n: h.n,
            d: h.d,
            terms,
            geometry: h
                .geometry
                .as_ref()
                .map(|g| g.iter().map(|(&s, &(r, c))| (s, [r, c])).collect()),
            family_tag: h.family_tag.clone(),
        }
    }

    /// Validates every invariant of the format; `path` only labels errors.
    pub fn to_hamiltonian(&self, path: &str) -> Result<Hamiltonian> {
        check_version(path, self.schema_version)?;
        if self.d < 2 {
            return Err(CliError::parse(
                path,
                "d",
                format!("local dimension {} < 2", self.d),
            ));
        }
        if self.n > MAX_SITES {
            return Err(CliError::parse(
                path,
                "n",
                format!("{} sites exceed the maximum {MAX_SITES}", self.n),
            ));
        }
        let cap = Config::from_env().dim_cap;
        let mut h = Hamiltonian::new(self.n, self.d);
        for (i, t) in self.terms.iter().enumerate() {
            let at = |f: &str| format!("terms[{i}].{f}");
            let bad = |f: &str, m: String| CliError::parse(path, at(f), m);
            if let Some(&s) = t.sites.iter().find(|&&s| s >= self.n) {
                return Err(bad(
                    "sites",
                    format!("site {s} out of range (n = {})", self.n),
                ));
            }
            let mut sorted = t.sites.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(bad("sites", "duplicate site".into()));
            }
            if !t.weight.is_finite() {
                return Err(bad("weight", "non-finite weight".into()));
            }
            let term: Term = match (&t.pauli, &t.matrix) {
                (Some(letters), None) => {
                    if self.d != 2 {
                        return Err(bad(
                            "pauli",
                            format!("Pauli terms need d = 2, file has d = {}", self.d),
                        ));
                    }
                    let letters: Vec<char> = letters.chars().collect();
                    if letters.len() != t.sites.len() {
                        return Err(bad(
                            "pauli",
                            format!("{} letters for {} sites", letters.len(), t.sites.len()),
                        ));
                    }
                    let mut pairs = vec![];
                    for (&s, &ch) in t.sites.iter().zip(&letters) {
                        let p = Pauli::from_char(ch)
                            .ok_or_else(|| bad("pauli", format!("unknown letter '{ch}'")))?;
                        pairs.push((s, p));
                    }
                    let mut p = PauliTerm::new(&pairs, t.weight)
                        .map_err(|e| bad("pauli", e.to_string()))?;
                    p.tag = t.tag.clone();
                    p.into()
                }
                (None, Some(data)) => {
                    let dim = self
                        .d
                        .checked_pow(t.sites.len() as u32)
                        .filter(|&d| d <= cap)
                        .ok_or_else(|| {
                            bad("matrix", format!("block dimension exceeds cap {cap}"))
                        })?;
                    let m = matrix_from_data(data, Some(dim), Some(dim))
                        .map_err(|e| bad("matrix", e))?;
                    let defect = hermitian_defect(&m);
                    if defect > Config::default().tol_herm * (1.0 + max_abs(&m)) {
                        return Err(bad("matrix", format!("not Hermitian (defect {defect:e})")));
                    }
                    let mut l = LocalTerm::new(&t.sites, m, t.weight, self.d)
                        .map_err(|e| bad("matrix", e.to_string()))?;
                    l.tag = t.tag.clone();
                    l.into()
                }
                _ => {
                    return Err(CliError::parse(
                        path,
                        format!("terms[{i}]"),
                        "exactly one of pauli and matrix is required",
                    ))
                }
            };
            h.push(term);
        }
        if let Some(g) = &self.geometry {
            if let Some(&s) = g.keys().find(|&&s| s >= self.n) {
                return Err(CliError::parse(
                    path,
                    "geometry",
                    format!("site {s} out of range (n = {})", self.n),
                ));
            }
            h.geometry = Some(g.iter().map(|(&s, &[r, c])| (s, (r, c))).collect());
        }
        h.family_tag = self.family_tag.clone();
        Ok(h)
    }
}

pub fn parse_hamiltonian(path: &str, text: &str) -> Result<Hamiltonian> {
    let v = syntax(path, text)?;
    let raw: RawHamiltonian = field(path, "document", v)?;
    let terms = raw
        .terms
        .into_iter()
        .enumerate()
        .map(|(i, t)| field(path, &format!("terms[{i}]"), t))
        .collect::<Result<Vec<TermEntry>>>()?;
    HamiltonianFile {
        schema_version: raw.schema_version,
        n: raw.n,
        d: raw.d,
        terms,
        geometry: raw.geometry,
        family_tag: raw.family_tag,
    }
    .to_hamiltonian(path)
}

pub fn store_hamiltonian(h: &Hamiltonian) -> String {
    let mut s = serde_json::to_string_pretty(&HamiltonianFile::from_hamiltonian(h))
        .expect("Hamiltonian file serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    pub orig_sites: Vec<usize>,
    pub sim_sites: Vec<usize>,
    pub v: MatrixData,
    pub proj_p: MatrixData,
    pub proj_q: MatrixData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalityFile {
    pub n_in: usize,
    pub d_in: usize,
    pub n_out: usize,
    pub d_out: usize,
    pub blocks: Vec<BlockFile>,
}

/// Dense isometry V with the ancilla projectors; ranks p and q are recomputed on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingFile {
    pub schema_version: u32,
    pub dim_in: usize,
    pub v: MatrixData,
    pub proj_p: MatrixData,
    pub proj_q: MatrixData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locality: Option<LocalityFile>,
}

/// Refuses isometries whose output dimension exceeds the configured cap.
pub fn store_encoding(e: &Encoding) -> Result<String> {
    let cap = Config::from_env().dim_cap;
    if e.dim_out() > cap {
        return Err(hamforge::Error::DimensionCap {
            dim: e.dim_out(),
            cap,
        }
        .into());
    }
    let locality = e.locality.as_ref().map(|l| LocalityFile {
        n_in: l.n_in,
        d_in: l.d_in,
        n_out: l.n_out,
        d_out: l.d_out,
        blocks: l
            .blocks
            .iter()
            .map(|b| BlockFile {
                orig_sites: b.orig_sites.clone(),
                sim_sites: b.sim_sites.clone(),
                v: matrix_data(&b.v),
                proj_p: matrix_data(&b.proj_p),
                proj_q: matrix_data(&b.proj_q),
            })
            .collect(),
    });
    let f = EncodingFile {
        schema_version: SCHEMA_VERSION,
        dim_in: e.dim_in,
        v: matrix_data(&e.v),
        proj_p: matrix_data(&e.proj_p),
        proj_q: matrix_data(&e.proj_q),
        locality,
    };
    let mut s = serde_json::to_string_pretty(&f).expect("encoding file serializes");
    s.push('\n');
    Ok(s)
}

pub fn parse_encoding(path: &str, text: &str) -> Result<Encoding> {
    let v = syntax(path, text)?;
    let f: EncodingFile = field(path, "document", v)?;
    check_version(path, f.schema_version)?;
    let cap = Config::from_env().dim_cap;
    if f.v.len() > cap {
        return Err(hamforge::Error::DimensionCap {
            dim: f.v.len(),
            cap,
        }
        .into());
    }
    let mat = |name: &str, d: &MatrixData| {
        matrix_from_data(d, None, None).map_err(|e| CliError::parse(path, name, e))
    };
    let mut e = Encoding::new(
        mat("v", &f.v)?,
        f.dim_in,
        mat("proj_p", &f.proj_p)?,
        mat("proj_q", &f.proj_q)?,
    )
    .map_err(|e| CliError::parse(path, "v", e.to_string()))?;
    if let Some(l) = &f.locality {
        let small = |d: usize, k: usize| d.checked_pow(k as u32).filter(|&x| x <= cap);
        if small(l.d_in, l.n_in) != Some(e.dim_in) || small(l.d_out, l.n_out) != Some(e.v.nrows()) {
            return Err(CliError::parse(
                path,
                "locality",
                "site counts do not match the isometry",
            ));
        }
        let mut blocks = vec![];
        for (i, b) in l.blocks.iter().enumerate() {
            let at = |name: &str| format!("locality.blocks[{i}].{name}");
            let m = |name: &str, d: &MatrixData| {
                matrix_from_data(d, None, None).map_err(|e| CliError::parse(path, at(name), e))
            };
            let proj_p = m("proj_p", &b.proj_p)?;
            let proj_q = m("proj_q", &b.proj_q)?;
            let v = m("v", &b.v)?;
            let anc = proj_p.nrows();
            let rows = small(l.d_out, b.sim_sites.len());
            let cols = small(l.d_in, b.orig_sites.len()).and_then(|x| x.checked_mul(anc));
            if anc == 0 || proj_p.shape() != (anc, anc) || proj_q.shape() != (anc, anc) {
                return Err(CliError::parse(
                    path,
                    at("proj_p"),
                    "ancilla projectors must be square and equal-sized",
                ));
            }
            if rows != Some(v.nrows()) || cols != Some(v.ncols()) {
                return Err(CliError::parse(
                    path,
                    at("v"),
                    "isometry shape does not match the block sites",
                ));
            }
            blocks.push(SiteBlock {
                orig_sites: b.orig_sites.clone(),
                sim_sites: b.sim_sites.clone(),
                v,
                anc_dim: anc,
                proj_p,
                proj_q,
            });
        }
        let loc = Locality {
            n_in: l.n_in,
            d_in: l.d_in,
            n_out: l.n_out,
            d_out: l.d_out,
            blocks,
        };
        loc.validate()
            .map_err(|err| CliError::parse(path, "locality", err.to_string()))?;
        if loc
            .blocks
            .iter()
            .try_fold(1usize, |a, b| a.checked_mul(b.anc_dim))
            != Some(e.anc_dim)
        {
            return Err(CliError::parse(
                path,
                "locality",
                "block ancillas do not match the encoding",
            ));
        }
        e.locality = Some(loc);
        let dev =
            check_locality(&e).map_err(|err| CliError::parse(path, "locality", err.to_string()))?;
        if dev > 1e-9 {
            return Err(CliError::parse(
                path,
                "locality",
                format!("blocks deviate from the isometry by {dev:e}"),
            ));
        }
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliWeight {
    /// One letter per site, e.g. "XZ" or "Z".
    pub pauli: String,
    pub weight: f64,
}

/// One interaction: a Pauli sum on one or two qubits, or a dense 2×2 or 4×4 block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<PauliWeight>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixData>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub interactions: Vec<InteractionEntry>,
}

pub fn parse_interactions(path: &str, text: &str) -> Result<InteractionSet> {
    let v = syntax(path, text)?;
    let f: InteractionFile = field(path, "document", v)?;
    check_version(path, f.schema_version)?;
    if f.interactions.is_empty() {
        return Err(CliError::parse(
            path,
            "interactions",
            "empty interaction set",
        ));
    }
    let mut out = vec![];
    for (i, entry) in f.interactions.iter().enumerate() {
        let at = |name: &str| format!("interactions[{i}].{name}");
        let m = match (&entry.terms, &entry.matrix) {
            (Some(terms), None) => {
                let k = terms.first().map_or(0, |t| t.pauli.chars().count());
                if !(1..=2).contains(&k) || terms.iter().any(|t| t.pauli.chars().count() != k) {
                    return Err(CliError::parse(
                        path,
                        at("terms"),
                        "every string needs the same length, 1 or 2",
                    ));
                }
                let mut m = Mat::zeros(1 << k, 1 << k);
                for (j, t) in terms.iter().enumerate() {
                    if !t.weight.is_finite() {
                        return Err(CliError::parse(
                            path,
                            format!("interactions[{i}].terms[{j}].weight"),
                            "non-finite weight",
                        ));
                    }
                    let mut op = Mat::identity(1, 1);
                    for ch in t.pauli.chars() {
                        let p = Pauli::from_char(ch).ok_or_else(|| {
                            CliError::parse(
                                path,
                                format!("interactions[{i}].terms[{j}].pauli"),
                                format!("unknown letter '{ch}'"),
                            )
                        })?;
                        op = op.kronecker(&p.matrix());
                    }
                    m += op * C64::new(t.weight, 0.0);
                }
                m
            }
            (None, Some(data)) => {
                let m = matrix_from_data(data, None, None)
                    .map_err(|e| CliError::parse(path, at("matrix"), e))?;
                if !(m.nrows() == 2 || m.nrows() == 4) || m.ncols() != m.nrows() {
                    return Err(CliError::parse(
                        path,
                        at("matrix"),
                        "expected a 2×2 or 4×4 block",
                    ));
                }
                if hermitian_defect(&m) > Config::default().tol_herm * (1.0 + max_abs(&m)) {
                    return Err(CliError::parse(path, at("matrix"), "not Hermitian"));
                }
                m
            }
            _ => {
                return Err(CliError::parse(
                    path,
                    format!("interactions[{i}]"),
                    "exactly one of terms and matrix is required",
                ))
            }
        };
        out.push(m);
    }
    Ok(InteractionSet {
        interactions: out,
        label: f.label,
    })
}
