//! The subcommands. Each returns its stdout text and exit code; nothing here prints.

use crate::error::{CliError, Result, EXIT_FAILED};
use crate::format::{
    parse_encoding, parse_hamiltonian, parse_interactions, store_encoding, store_hamiltonian,
};
use crate::numfmt::{fmt_num, symbolic_sum};
use hamforge::gadgets::{
    first_order_table, heisenberg_second_order, table2_rows, Interaction, Table2Row,
};
use hamforge::hamcore::diagonalize_with;
use hamforge::hamcore::linalg::{eigvalsh, kron};
use hamforge::pipeline::{classify, compile, CompileOptions, Family};
use hamforge::simcheck::{attach_downstream, verify_with_spectrum, Downstream};
use hamforge::{Config, Hamiltonian, Mat, Pauli};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub struct Output {
    pub stdout: String,
    pub code: i32,
}

impl Output {
    fn ok(stdout: String) -> Output {
        Output { stdout, code: 0 }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_hamiltonian(path: &Path) -> Result<Hamiltonian> {
    parse_hamiltonian(&path.display().to_string(), &read(path)?)
}

/// The `count` lowest eigenvalues, one per line. Values within 1e-12 of zero relative to the
/// spectral scale print as 0.
pub fn spectrum(path: &Path, count: Option<usize>) -> Result<Output> {
    let h = load_hamiltonian(path)?;
    let m = h.assemble_capped(Config::from_env().dim_cap)?;
    let evals = eigvalsh(&m);
    let scale = evals.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let mut out = String::new();
    for &x in evals.iter().take(count.unwrap_or(evals.len())) {
        let x = if x.abs() <= 1e-12 * scale { 0.0 } else { x };
        let _ = writeln!(out, "{}", fmt_num(x));
    }
    Ok(Output::ok(out))
}

pub struct CompileArgs {
    pub path: PathBuf,
    pub family: String,
    pub eps: f64,
    pub eta: f64,
    pub lattice: bool,
    pub certify: bool,
    pub out: Option<PathBuf>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(CliError::Usage(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// Sidecar path next to `out`: `sim.json` → `sim.<suffix>.json`.
pub fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.json"))
}

/// Prints the plan; with `out`, writes the simulator there plus `.plan.json` and, when the
/// composed encoding exists and fits the cap, `.encoding.json` beside it.
pub fn compile_cmd(a: &CompileArgs) -> Result<Output> {
    positive("--eps", a.eps)?;
    positive("--eta", a.eta)?;
    let family: Family = a.family.parse()?;
    let h = load_hamiltonian(&a.path)?;
    let opts = CompileOptions::new(family, a.eps, a.eta)
        .lattice(a.lattice)
        .certify(a.certify);
    let c = compile(&h, &opts)?;
    let mut stdout = c.plan.to_text();
    if let Some(out) = &a.out {
        write(out, &store_hamiltonian(&c.hamiltonian))?;
        let mut plan = c.plan.to_json();
        plan.push('\n');
        write(&sidecar(out, "plan"), &plan)?;
        match c.encoding.as_ref().map(store_encoding) {
            Some(Ok(text)) => write(&sidecar(out, "encoding"), &text)?,
            Some(Err(_)) => stdout.push_str("encoding: not written (dimension over cap)\n"),
            None => stdout.push_str("encoding: not built\n"),
        }
    }
    let code = if a.certify && !c.plan.certified() {
        EXIT_FAILED
    } else {
        0
    };
    Ok(Output { stdout, code })
}

pub struct VerifyArgs {
    pub target: PathBuf,
    pub sim: PathBuf,
    pub encoding: PathBuf,
    pub delta: f64,
    pub beta: Option<f64>,
    pub times: Vec<f64>,
    pub eps: Option<f64>,
    pub eta: Option<f64>,
}

/// Checks the simulator against the encoded target below `delta` and prints the report.
pub fn verify_cmd(a: &VerifyArgs) -> Result<Output> {
    positive("--delta", a.delta)?;
    for (name, v) in [("--eps", a.eps), ("--eta", a.eta), ("--beta", a.beta)] {
        if let Some(x) = v {
            positive(name, x)?;
        }
    }
    if let Some(t) = a.times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::Usage(format!(
            "--times must be non-negative, got {t}"
        )));
    }
    let h = load_hamiltonian(&a.target)?;
    let hs = load_hamiltonian(&a.sim)?;
    let e = parse_encoding(&a.encoding.display().to_string(), &read(&a.encoding)?)?;
    let cfg = Config::from_env();
    let hm = h.assemble_capped(cfg.dim_cap)?;
    let spec = diagonalize_with(&hs.assemble_capped(cfg.dim_cap)?, &cfg)?;
    let mut r = verify_with_spectrum(&hm, &spec, &e, a.delta)?;
    r.requested_eps = a.eps;
    r.requested_eta = a.eta;
    let opts = Downstream {
        beta: a.beta,
        times: a.times.clone(),
        rho: None,
        noise: None,
    };
    let r = attach_downstream(r, &hm, &spec, &e, &opts)?;
    let code = if r.pass { 0 } else { EXIT_FAILED };
    Ok(Output {
        stdout: r.to_text(),
        code,
    })
}

pub fn classify_cmd(path: &Path) -> Result<Output> {
    let set = parse_interactions(&path.display().to_string(), &read(path)?)?;
    Ok(Output::ok(format!("{}\n", classify(&set)?.name())))
}

fn pauli_coef(m: &Mat, p: Pauli, q: Pauli) -> f64 {
    (kron(&p.matrix(), &q.matrix()) * m).trace().re / 4.0
}

/// Largest 2-local coefficient of `m` other than the intended coupling.
fn off_coupling(m: &Mat, keep: (Pauli, Pauli)) -> f64 {
    let xyz = [Pauli::X, Pauli::Y, Pauli::Z];
    let mut worst = 0.0f64;
    for p in xyz {
        for q in xyz {
            if (p, q) != keep {
                worst = worst.max(pauli_coef(m, p, q).abs());
            }
        }
    }
    worst
}

fn coupling_label(r: &Table2Row) -> String {
    let sign = if r.sign > 0.0 { '+' } else { '-' };
    format!("{sign}{}{}", r.coupling.0.as_char(), r.coupling.1.as_char())
}

/// Table row numbers: a ± pair with the same weight pattern shares a row.
fn table2_numbers(rows: &[Table2Row]) -> Vec<usize> {
    let pattern = |r: &Table2Row| r.alpha.map(|row| row.map(|x| x != 0.0));
    let mut out = vec![];
    for (i, r) in rows.iter().enumerate() {
        let n = match i {
            0 => 1,
            _ if pattern(r) == pattern(&rows[i - 1]) && r.coupling == rows[i - 1].coupling => {
                out[i - 1]
            }
            _ => out[i - 1] + 1,
        };
        out.push(n);
    }
    out
}

pub struct Table1Row {
    pub pair: (usize, usize),
    /// (I, X, Y, Z).
    pub coefficients: [f64; 4],
    pub text: String,
}

pub struct Table2Entry {
    pub row: usize,
    pub label: &'static str,
    pub coupling: String,
    pub coefficient: f64,
    pub scale: f64,
    pub residual: f64,
}

pub struct Tables {
    pub interaction: Interaction,
    /// Ratio of this interaction's first-order values to the Heisenberg ones.
    pub scale: f64,
    pub table1: Vec<Table1Row>,
    pub table2: Vec<Table2Entry>,
}

pub fn tables(inter: Interaction) -> hamforge::Result<Tables> {
    let heis = first_order_table(Interaction::Heisenberg);
    let t1 = first_order_table(inter);
    let (num, den) = t1
        .iter()
        .zip(&heis)
        .fold((0.0, 0.0), |(n, d), ((_, a), (_, b))| {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let nb: f64 = b.iter().map(|y| y * y).sum();
            (n + dot, d + nb)
        });
    let table1 = t1
        .iter()
        .map(|&((i, j), coefficients)| {
            let [id, x, y, z] = coefficients;
            Table1Row {
                pair: (i + 1, j + 1),
                coefficients,
                text: symbolic_sum(&[(x, "X_L"), (y, "Y_L"), (z, "Z_L"), (id, "I")]),
            }
        })
        .collect();
    let rows = table2_rows();
    let numbers = table2_numbers(&rows);
    let mut table2 = vec![];
    for (r, &row) in rows.iter().zip(&numbers) {
        let eff = heisenberg_second_order(&r.alpha, inter)?;
        let coefficient = pauli_coef(&eff, r.coupling.0, r.coupling.1);
        table2.push(Table2Entry {
            row,
            label: r.label,
            coupling: coupling_label(r),
            coefficient,
            scale: coefficient * r.sign,
            residual: off_coupling(&eff, r.coupling),
        });
    }
    Ok(Tables {
        interaction: inter,
        scale: num / den,
        table1,
        table2,
    })
}

pub fn tables_cmd(xy: bool) -> Result<Output> {
    let inter = if xy {
        Interaction::Xy
    } else {
        Interaction::Heisenberg
    };
    let t = tables(inter)?;
    let mut s = String::new();
    let _ = writeln!(s, "interaction: {}", inter.name());
    let _ = writeln!(s, "scale relative to heisenberg: {}", fmt_num(t.scale));
    let _ = writeln!(s);
    let _ = writeln!(s, "table 1: projected X_iX_j on one logical qubit");
    let _ = writeln!(
        s,
        "{:<7}{:<34}{:>20}{:>20}{:>20}{:>20}",
        "pair", "logical form", "I", "X", "Y", "Z"
    );
    for r in &t.table1 {
        let [i, x, y, z] = r.coefficients.map(fmt_num);
        let pair = format!("({},{})", r.pair.0, r.pair.1);
        let _ = writeln!(s, "{pair:<7}{:<34}{i:>20}{x:>20}{y:>20}{z:>20}", r.text);
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "table 2: 2-local part of the second-order coupling between two logical qubits"
    );
    let _ = writeln!(
        s,
        "{:<5}{:<34}{:<10}{:>20}{:>20}{:>20}",
        "row", "H2", "coupling", "coefficient", "scale", "residual"
    );
    for e in &t.table2 {
        let _ = writeln!(
            s,
            "{:<5}{:<34}{:<10}{:>20}{:>20}{:>20}",
            e.row,
            e.label,
            e.coupling,
            fmt_num(e.coefficient),
            fmt_num(e.scale),
            fmt_num(e.residual)
        );
    }
    Ok(Output::ok(s))
}
