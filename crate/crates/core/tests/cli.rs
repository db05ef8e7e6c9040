use std::path::PathBuf;
use std::process::Command;

use s2rank::cli::{run, EXIT_INCONSISTENT, EXIT_OK, EXIT_USAGE};
use s2rank::tableio::{parse_table, Format, TableKind};

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/data");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn s2rank(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("s2rank").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn check_reports_the_violating_minor() {
    let (code, out, _) = s2rank(&["check", &data("table_a.csv")]);
    assert_eq!(code, EXIT_INCONSISTENT);
    assert!(out.contains("points (1,2,3,4) coords (1,2): det_s2 = -7/1000"), "{out}");

    let (code, out, _) = s2rank(&["check", "--fast", &data("table_b.csv")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "S^2-rank 1: yes\n");
}

#[test]
fn eval_prints_both_formulas() {
    let (code, out, _) = s2rank(&["eval", &data("table_a.csv"), "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["det_s2"], "-7/1000");
    assert_eq!(v["companion"], "-7/1000");

    let (code, _, err) = s2rank(&["eval", &data("combined.csv")]);
    assert_eq!(code, EXIT_USAGE, "{err}");
}

#[test]
fn reconstruct_prints_the_population() {
    let (code, out, _) = s2rank(&["reconstruct", &data("table_b.csv"), "--intervals"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("primitive ray: 1 4 1 5 5 6"));
    assert!(out.contains("minimal population: N = 24"));
    assert!(out.contains("Y=1,2,12,1,14,13,15\nY=2,2,4,3,6,7,9\n"), "{out}");
    assert!(out.contains("(7/8, 1] X=4 Y=2"));

    let (code, _, err) = s2rank(&["reconstruct", &data("table_a.csv")]);
    assert_eq!(code, EXIT_INCONSISTENT, "{err}");
}

#[test]
fn joint_counts_are_accepted_where_tables_are() {
    let (_, from_counts, _) = s2rank(&["reconstruct", &data("joint_b.csv")]);
    let (_, from_table, _) = s2rank(&["reconstruct", &data("table_b.csv")]);
    assert_eq!(from_counts, from_table);
}

#[test]
fn complete_fills_unknown_cells() {
    let (code, out, _) = s2rank(&["complete", &data("combined.csv")]);
    assert_eq!(code, EXIT_OK);
    let doc = parse_table(&out, Format::Csv).unwrap();
    let fam = doc.to_family().unwrap();
    assert_eq!(
        fam.column(3, 5),
        parse_table("pair,(1,2)\nY=1,0.5\nY=2,0.5\n", Format::Csv)
            .unwrap()
            .to_family()
            .unwrap()
            .column(1, 2)
    );
    assert_eq!(doc.labels.as_deref().map(|l| l[0].as_str()), Some("watched"));

    let (code, out, _) = s2rank(&["complete", &data("table_a_new.csv"), "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        v["table"]["columns"]["1,3"],
        serde_json::json!(["0.425", "0.275", "0.3"])
    );
    assert_eq!(v["inferred"].as_array().unwrap().len(), 6);
}

#[test]
fn merge_then_complete() {
    let (code, out, _) = s2rank(&[
        "merge",
        &data("table_b.csv"),
        &data("table_c.csv"),
        "--map",
        &data("b_c_map.json"),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("# shared pairs: (1,2) (2,4) (1,4)\n"));
    let partial = parse_table(&out, Format::Csv).unwrap();
    assert_eq!(partial.kind, TableKind::PartialConditional);

    let (code, out, _) = s2rank(&[
        "merge",
        &data("table_b.csv"),
        &data("table_c.csv"),
        "--map",
        &data("b_c_map.json"),
        "--complete",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("Y=1,0.5,1,0.6,0.25,0.8,0.75,0.5,0.7,0.65,0.625"), "{out}");
}

#[test]
fn merge_reports_conflicts() {
    let (code, _, err) = s2rank(&[
        "merge",
        &data("table_a.csv"),
        &data("table_b.csv"),
        "--map",
        &data("b_c_map.json"),
    ]);
    assert_eq!(code, EXIT_INCONSISTENT);
    assert!(err.contains("incompatible tables"), "{err}");
}

#[test]
fn audit_flags_only_the_bad_table() {
    let (code, out, _) = s2rank(&[
        "audit",
        &data("table_a.csv"),
        &data("table_b.csv"),
        &data("table_c.csv"),
        "--json",
    ]);
    assert_eq!(code, EXIT_INCONSISTENT);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let flags: Vec<bool> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|l| l["consistent"].as_bool().unwrap())
        .collect();
    assert_eq!(flags, [false, true, true]);
    assert_eq!(v[2]["population"], "10");
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    assert_eq!(s2rank(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(s2rank(&["check"]).0, EXIT_USAGE);
    assert_eq!(s2rank(&["check", "no/such/file.csv"]).0, EXIT_USAGE);
    assert_eq!(
        s2rank(&[
            "merge",
            &data("table_b.csv"),
            &data("table_c.csv"),
            "--map",
            &data("table_b.csv")
        ])
        .0,
        EXIT_USAGE
    );
    assert_eq!(s2rank(&["--help"]).0, EXIT_OK);
}

#[test]
fn gen_joint_is_deterministic() {
    let first = s2rank(&["gen-joint", "--s", "5", "--d", "3", "--seed", "11"]);
    let second = s2rank(&["gen-joint", "--s", "5", "--d", "3", "--seed", "11"]);
    assert_eq!(first, second);
    let other = s2rank(&["gen-joint", "--s", "5", "--d", "3", "--seed", "12"]);
    assert_ne!(first.1, other.1);
    let doc = parse_table(&first.1, Format::Csv).unwrap();
    assert_eq!((doc.kind, doc.s, doc.d), (TableKind::JointCounts, 5, 3));
    doc.to_joint().unwrap();
}

#[test]
fn binary_reads_the_seed_from_the_environment() {
    let bin = env!("CARGO_BIN_EXE_s2rank");
    let with_env = Command::new(bin)
        .args(["gen-joint", "--d", "3"])
        .env("S2RANK_SEED", "99")
        .output()
        .unwrap();
    let with_flag = Command::new(bin)
        .args(["gen-joint", "--d", "3", "--seed", "99"])
        .output()
        .unwrap();
    assert!(with_env.status.success());
    assert_eq!(with_env.stdout, with_flag.stdout);

    let check = Command::new(bin)
        .args(["check", &data("table_a.csv")])
        .output()
        .unwrap();
    assert_eq!(check.status.code(), Some(EXIT_INCONSISTENT));
}
