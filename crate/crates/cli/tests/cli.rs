mod common;

use common::{data, fuzz_corpus, hamforge};
use hamforge::encodings::identity_local;
use hamforge::gadgets::{build_simulator, y_elimination};
use hamforge::hamcore::random::{random_hermitian, seeded};
use hamforge::pipeline::{family_audit, Family};
use hamforge::{Hamiltonian, LocalTerm, PauliTerm, Term};
use hamforge_cli::error::CliError;
use hamforge_cli::format::{
    parse_encoding, parse_hamiltonian, parse_interactions, store_encoding, store_hamiltonian,
};
use hamforge_cli::run;
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::path::Path;

fn text(name: &str) -> String {
    std::fs::read_to_string(data(name)).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn cli(args: &[&str]) -> hamforge_cli::Run {
    run(std::iter::once("hamforge").chain(args.iter().copied()))
}

fn mixed_hamiltonian() -> Hamiltonian {
    let mut h = Hamiltonian::qubits(3);
    h.push(
        PauliTerm::parse("X0 Y2", 0.1 + 1e-17)
            .unwrap()
            .with_tag("a"),
    );
    h.push(PauliTerm::identity(-0.0));
    h.push(PauliTerm::parse("Z1", 1.0 / 3.0).unwrap());
    let block = random_hermitian(4, &mut seeded(3));
    h.push(LocalTerm::new(&[2, 0], block, std::f64::consts::PI, 2).unwrap());
    h.geometry = Some(BTreeMap::from([(0, (0, 0)), (1, (-3, 7)), (2, (1, 0))]));
    h.family_tag = Some("no_y_pauli".into());
    h
}

#[test]
fn hamiltonian_round_trip_is_bit_exact() {
    let h = mixed_hamiltonian();
    let stored = store_hamiltonian(&h);
    let back = parse_hamiltonian("mem", &stored).unwrap();
    assert_eq!(back, h);
    assert_eq!(store_hamiltonian(&back), stored);
    // the sign of zero survives too
    let Term::Pauli(id) = &back.terms[1] else {
        panic!()
    };
    assert!(id.weight.is_sign_negative());
    for name in ["k4.json", "qutrit.json", "real2.json", "empty.json"] {
        let h = parse_hamiltonian(name, &text(name)).unwrap();
        assert_eq!(parse_hamiltonian(name, &store_hamiltonian(&h)).unwrap(), h);
    }
}

proptest! {
    #[test]
    fn random_weights_round_trip(ws in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 1..8)) {
        let mut h = Hamiltonian::qubits(4);
        for (i, w) in ws.iter().enumerate() {
            h.push(PauliTerm::parse(&format!("X{} Z{}", i % 4, (i + 1) % 4), *w).unwrap());
        }
        let back = parse_hamiltonian("mem", &store_hamiltonian(&h)).unwrap();
        prop_assert_eq!(back, h);
    }
}

#[test]
fn encoding_round_trip_is_bit_exact() {
    let g = y_elimination(&PauliTerm::parse("Y0 Y1", 1.0).unwrap(), 2, 2).unwrap();
    let e = g.encoding().unwrap();
    let stored = store_encoding(&e).unwrap();
    let back = parse_encoding("mem", &stored).unwrap();
    assert_eq!(back.v, e.v);
    assert_eq!((back.p, back.q, back.anc_dim), (e.p, e.q, e.anc_dim));
    assert_eq!(
        back.locality.as_ref().unwrap().blocks.len(),
        e.locality.as_ref().unwrap().blocks.len()
    );
    assert_eq!(store_encoding(&back).unwrap(), stored);
}

#[test]
fn encoding_store_respects_the_cap() {
    std::env::set_var("HAMFORGE_DIM_CAP", "4");
    let r = store_encoding(&identity_local(3, 2));
    std::env::remove_var("HAMFORGE_DIM_CAP");
    assert!(matches!(
        r,
        Err(CliError::Core(hamforge::Error::DimensionCap {
            dim: 8,
            cap: 4
        }))
    ));
}

fn parse_error(doc: &str) -> (String, String) {
    match parse_hamiltonian("f.json", doc) {
        Err(CliError::Parse {
            location, message, ..
        }) => (location, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn parse_errors_are_located() {
    let head = r#"{"schema_version": 1, "n": 2, "d": 2, "terms": ["#;
    let ok = r#"{"sites": [0], "pauli": "Z", "weight": 1.0}"#;
    let cases = [
        (
            r#"{"sites": [0, "a"], "pauli": "XX", "weight": 1.0}"#,
            "terms[1]",
        ),
        (
            r#"{"sites": [0, 5], "pauli": "XX", "weight": 1.0}"#,
            "terms[1].sites",
        ),
        (
            r#"{"sites": [1, 1], "pauli": "XX", "weight": 1.0}"#,
            "terms[1].sites",
        ),
        (
            r#"{"sites": [0], "pauli": "XX", "weight": 1.0}"#,
            "terms[1].pauli",
        ),
        (
            r#"{"sites": [0], "pauli": "W", "weight": 1.0}"#,
            "terms[1].pauli",
        ),
        (r#"{"sites": [0], "weight": 1.0}"#, "terms[1]"),
        (
            r#"{"sites": [0], "pauli": "X", "matrix": [[[1,0],[0,0]],[[0,0],[1,0]]], "weight": 1.0}"#,
            "terms[1]",
        ),
        (
            r#"{"sites": [0], "matrix": [[[1,0],[1,0]],[[0,0],[1,0]]], "weight": 1.0}"#,
            "terms[1].matrix",
        ),
        (
            r#"{"sites": [0], "matrix": [[[1,0]]], "weight": 1.0}"#,
            "terms[1].matrix",
        ),
        (
            r#"{"sites": [0], "pauli": "X", "weight": 1.0, "colour": 2}"#,
            "terms[1]",
        ),
    ];
    for (term, want) in cases {
        let doc = format!("{head}{ok}, {term}]}}");
        let (loc, msg) = parse_error(&doc);
        assert_eq!(loc, want, "{term}: {msg}");
    }
    let (loc, _) = parse_error(r#"{"schema_version": 2, "n": 1, "d": 2, "terms": []}"#);
    assert_eq!(loc, "schema_version");
    let (loc, _) = parse_error(
        r#"{"schema_version": 1, "n": 1, "d": 3, "terms": [{"sites": [0], "pauli": "X", "weight": 1}]}"#,
    );
    assert_eq!(loc, "terms[0].pauli");
    let (loc, _) = parse_error("{\"schema_version\": 1,\n \"n\": 1,,}");
    assert_eq!(loc, "line 2, column 9");
    let (loc, _) = parse_error(r#"{"schema_version": 1, "n": 1, "d": 2}"#);
    assert_eq!(loc, "document");
}

#[test]
fn interaction_files_parse() {
    let set = parse_interactions("h", &text("set_heisenberg.json")).unwrap();
    assert_eq!(set.interactions.len(), 1);
    assert_eq!(set.interactions[0], hamforge::hamcore::heisenberg_block());
    let bad =
        r#"{"schema_version": 1, "interactions": [{"terms": [{"pauli": "XZZ", "weight": 1}]}]}"#;
    assert!(
        matches!(parse_interactions("b", bad), Err(CliError::Parse { location, .. }) if location == "interactions[0].terms")
    );
}

#[test]
fn spectrum_command() {
    let r = cli(&["spectrum", s(&data("k4.json")), "-k", "3"]);
    assert_eq!((r.stdout.as_str(), r.code), ("0\n0\n4\n", 0));
    let r = cli(&["spectrum", s(&data("k4.json"))]);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 16);
    assert_eq!(lines.iter().filter(|l| **l == "4").count(), 9);
    assert_eq!(lines.iter().filter(|l| **l == "12").count(), 5);
    let r = cli(&["spectrum", s(&data("empty.json"))]);
    assert_eq!(r.stdout, "0\n".repeat(8));
    let r = cli(&["spectrum", "/nonexistent.json"]);
    assert_eq!(r.code, 3);
}

#[test]
fn spectrum_honours_the_dimension_cap() {
    let out = std::process::Command::new(common::bin())
        .args(["spectrum", s(&data("k4.json"))])
        .env("HAMFORGE_DIM_CAP", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds cap 8"));
}

#[test]
fn malformed_file_names_the_term() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"schema_version": 1, "n": 2, "d": 2, "terms": [{"sites": "0", "pauli": "X", "weight": 1}]}"#).unwrap();
    let r = hamforge(&["spectrum", s(&p)]);
    assert_eq!(r.code, Some(3));
    assert!(r.stderr.contains("terms[0]"), "{}", r.stderr);
}

#[test]
fn compile_yy_to_no_y() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let r = cli(&[
        "compile",
        s(&data("yy.json")),
        "--family",
        "no_y_pauli",
        "--eps",
        "0.1",
        "--certify",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("pass 0: y_elimination"));
    let sim = parse_hamiltonian("sim", &std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sim.n, 3);
    assert!(family_audit(&sim, Family::NoYPauli));
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sim.plan.json")).unwrap())
            .unwrap();
    assert_eq!(plan["passes"][0]["name"], "y_elimination");
    assert!(dir.path().join("sim.encoding.json").exists());
}

#[test]
fn compile_to_heisenberg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let r = cli(&[
        "compile",
        s(&data("real2.json")),
        "--family",
        "heisenberg",
        "--eps",
        "0.15",
        "--certify",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    let sim = parse_hamiltonian("sim", &std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sim.n, 8);
    assert!(family_audit(&sim, Family::Heisenberg));
    assert_eq!(sim.family_tag.as_deref(), Some("heisenberg"));
}

#[test]
fn compile_usage_errors() {
    let yy = data("yy.json");
    for args in [
        vec!["compile", s(&yy), "--family", "no_y_pauli", "--eps", "0"],
        vec![
            "compile",
            s(&yy),
            "--family",
            "no_y_pauli",
            "--eps",
            "0.1",
            "--eta",
            "-1",
        ],
        vec!["compile", s(&yy), "--family", "ising", "--eps", "0.1"],
        vec![
            "compile",
            s(&yy),
            "--family",
            "heisenberg",
            "--eps",
            "0.1",
            "--lattice",
        ],
        vec!["compile", s(&yy), "--eps", "0.1"],
        vec!["frobnicate"],
    ] {
        let r = cli(&args);
        assert_eq!(r.code, 3, "{args:?}: {}", r.stderr);
    }
    let r = cli(&["compile", s(&yy), "--family", "no_y_pauli", "--eps", "0"]);
    assert!(r.stderr.contains("--eps must be positive"));
    assert_eq!(cli(&["--help"]).code, 0);
}

fn write_pair(
    dir: &Path,
    target: &Hamiltonian,
    sim: &Hamiltonian,
    e: &hamforge::Encoding,
) -> [String; 3] {
    let paths = ["target.json", "sim.json", "enc.json"].map(|n| dir.join(n));
    std::fs::write(&paths[0], store_hamiltonian(target)).unwrap();
    std::fs::write(&paths[1], store_hamiltonian(sim)).unwrap();
    std::fs::write(&paths[2], store_encoding(e).unwrap()).unwrap();
    paths.map(|p| p.to_str().unwrap().to_string())
}

#[test]
fn verify_perfect_pair() {
    let dir = tempfile::tempdir().unwrap();
    let h = parse_hamiltonian("k4", &text("k4.json")).unwrap();
    let [t, sm, e] = write_pair(dir.path(), &h, &h, &identity_local(4, 2));
    let r = cli(&[
        "verify", &t, &sm, &e, "--delta", "100", "--beta", "1", "--times", "0.5,1,2",
    ]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
    let field = |name: &str| -> f64 {
        let line = r.stdout.lines().find(|l| l.starts_with(name)).unwrap();
        line.split_once(": ").unwrap().1.parse().unwrap()
    };
    // zero up to the eigensolver's rounding
    assert!(field("eta_measured") < 1e-12, "{}", r.stdout);
    assert!(field("eps_measured") < 1e-12, "{}", r.stdout);
    assert_eq!(field("max_eigenvalue_error"), 0.0);
    assert!(r.stdout.ends_with("pass: true\n"));
}

#[test]
fn verify_fails_below_the_required_delta() {
    let dir = tempfile::tempdir().unwrap();
    let g = y_elimination(&PauliTerm::parse("Y0 Y1", 1.0).unwrap(), 2, 2).unwrap();
    let sim = build_simulator(&g, 50.0);
    let [t, sm, e] = write_pair(dir.path(), &g.target, &sim, &g.encoding().unwrap());
    let r = cli(&[
        "verify", &t, &sm, &e, "--delta", "25", "--eps", "0.01", "--eta", "0.1",
    ]);
    assert_eq!(r.code, 2, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.ends_with("pass: false\n"));
    // the same pair is fine once Δ is large enough
    let sim = build_simulator(&g, 1e5);
    let [t, sm, e] = write_pair(dir.path(), &g.target, &sim, &g.encoding().unwrap());
    let r = cli(&[
        "verify", &t, &sm, &e, "--delta", "5e4", "--eps", "0.01", "--eta", "0.1",
    ]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
}

#[test]
fn classify_command() {
    for (file, word) in [
        ("set_heisenberg.json", "universal"),
        ("set_xy.json", "universal"),
        ("set_tim.json", "stoquastic"),
        ("set_ising.json", "classical"),
        ("set_antisym.json", "universal"),
    ] {
        let r = cli(&["classify", s(&data(file))]);
        assert_eq!(
            (r.stdout.as_str(), r.code),
            (format!("{word}\n").as_str(), 0),
            "{file}"
        );
    }
    assert_eq!(cli(&["classify", s(&data("set_fields.json"))]).code, 3);
}

#[test]
fn tables_command() {
    let r = cli(&["tables"]);
    assert_eq!(r.code, 0);
    let row = r.stdout.lines().find(|l| l.starts_with("(1,3)")).unwrap();
    assert!(row.contains("-2/3 Z_L - 1/3 I"), "{row}");
    let t = hamforge_cli::commands::tables(hamforge::gadgets::Interaction::Heisenberg).unwrap();
    let row3: Vec<_> = t.table2.iter().filter(|e| e.row == 3).collect();
    assert_eq!(row3.len(), 1);
    assert_eq!(row3[0].coupling, "+XX");
    assert!(row3[0].scale > 0.0);
    let xy = cli(&["tables", "--xy"]);
    assert!(xy
        .stdout
        .contains("scale relative to heisenberg: 0.666666666667"));
    let row = xy.stdout.lines().find(|l| l.starts_with("(1,3)")).unwrap();
    assert!(row.contains("-4/9 Z_L - 2/9 I"), "{row}");
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn commands_are_byte_reproducible() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = dir.path().join("sim.json");
            let mut stdout = vec![];
            for args in [
                vec!["spectrum".to_string(), s(&data("k4.json")).into()],
                vec!["tables".into()],
                vec!["tables".into(), "--xy".into()],
                vec!["classify".into(), s(&data("set_tim.json")).into()],
                vec![
                    "compile".into(),
                    s(&data("real2.json")).into(),
                    "--family".into(),
                    "no_y_pauli".into(),
                    "--eps".into(),
                    "0.1".into(),
                    "--certify".into(),
                    "--out".into(),
                    s(&out).into(),
                ],
            ] {
                let r = hamforge(&args.iter().map(String::as_str).collect::<Vec<_>>());
                assert_eq!(r.code, Some(0), "{args:?}: {}", r.stderr);
                stdout.push(r.stdout);
            }
            let sim = s(&out).to_string();
            let enc = s(&dir.path().join("sim.encoding.json")).to_string();
            let r = hamforge(&[
                "verify",
                s(&data("real2.json")),
                &sim,
                &enc,
                "--delta",
                "1000",
                "--beta",
                "1",
                "--times",
                "0.5,1",
            ]);
            stdout.push(r.stdout);
            (stdout, snapshot(dir.path()))
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn fuzzed_files_never_crash() {
    let mut seeds: Vec<(String, String)> = ["k4.json", "yy.json", "qutrit.json", "real2.json"]
        .iter()
        .map(|n| ("hamiltonian".to_string(), text(n)))
        .collect();
    seeds.push(("set".into(), text("set_tim.json")));
    seeds.push(("set".into(), text("set_antisym.json")));
    let enc = store_encoding(&identity_local(2, 2)).unwrap();
    seeds.push(("encoding".into(), enc));
    let corpus = fuzz_corpus(&seeds, 100, 42);
    let dir = tempfile::tempdir().unwrap();
    let yy = data("yy.json");
    for (i, (kind, doc)) in corpus.iter().enumerate() {
        let p = dir.path().join(format!("m{i}.json"));
        std::fs::write(&p, doc).unwrap();
        let args: Vec<&str> = match kind.as_str() {
            "hamiltonian" => vec!["spectrum", s(&p)],
            "set" => vec!["classify", s(&p)],
            _ => vec!["verify", s(&yy), s(&yy), s(&p), "--delta", "10"],
        };
        let r = hamforge(&args);
        assert!(
            matches!(r.code, Some(0 | 2 | 3)),
            "mutant {i} ({kind}) crashed: {:?}\n{}\n{doc}",
            r.code,
            r.stderr
        );
    }
}
