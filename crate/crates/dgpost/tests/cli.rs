//! End-to-end checks of the binary against committed fixtures: exit
//! codes, golden reports, byte-for-byte determinism, and round-trip
//! fidelity of the file format.
//!
//! `cargo test --test cli -- --ignored regenerate` rewrites the fixtures
//! and golden reports from the current code.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dgpost::cells::{cell_category, CellKind};
use dgpost::exactlin::Field;
use dgpost::manifest;
use dgpost::obstruct::{GenSpec, LiftingProblem};
use dgpost::samples;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgpost"))
        .args(args)
        .current_dir(fixture_dir())
        .output()
        .expect("binary runs")
}

fn liftable_problem() -> LiftingProblem {
    let field = Field::Prime(2);
    let a = cell_category(field, CellKind::Sphere, 1).unwrap();
    let gens = vec![
        GenSpec {
            source: 0,
            target: 1,
            degree: 1,
            label: "h".into(),
            diff: vec![],
        },
        GenSpec {
            source: 0,
            target: 1,
            degree: 2,
            label: "q".into(),
            diff: vec![(field.one(), vec![0])],
        },
    ];
    LiftingProblem::new(
        a,
        vec!["u".into(), "v".into()],
        gens,
        vec![0, 1],
        BTreeMap::new(),
    )
    .unwrap()
}

const COMMANDS: &[(&str, &[&str])] = &[
    ("check_disk3", &["check", "disk3.dg"]),
    ("check_sphere2", &["check", "sphere2.dg"]),
    ("homology_sphere2", &["homology", "sphere2.dg"]),
    ("tower_sphere2", &["tower", "sphere2.dg", "--max", "3"]),
    ("fiberseq_sphere1", &["fiberseq", "sphere1.dg", "-n", "0", "--cap", "4"]),
    (
        "obstruct_blocked",
        &["obstruct", "--problem", "obstructed_f2.dg", "-n", "0"],
    ),
    (
        "rigidify_blocked",
        &["rigidify", "--problem", "obstructed_f2.dg"],
    ),
    (
        "rigidify_liftable",
        &["rigidify", "--problem", "liftable_f2.dg"],
    ),
];

#[test]
#[ignore]
fn regenerate() {
    let dir = fixture_dir();
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, text: &str| std::fs::write(dir.join(name), text).unwrap();
    let q = Field::Rationals;
    write(
        "sphere1.dg",
        &manifest::emit(&cell_category(q, CellKind::Sphere, 1).unwrap(), &[], None),
    );
    write(
        "sphere2.dg",
        &manifest::emit(&cell_category(q, CellKind::Sphere, 2).unwrap(), &[], None),
    );
    write(
        "disk3.dg",
        &manifest::emit(&cell_category(q, CellKind::Disk, 3).unwrap(), &[], None),
    );
    let blocked = samples::obstructed_problem(Field::Prime(2), 0);
    write(
        "obstructed_f2.dg",
        &manifest::emit(&blocked.target, &[], Some(&manifest::problem_spec(&blocked))),
    );
    let liftable = liftable_problem();
    write(
        "liftable_f2.dg",
        &manifest::emit(&liftable.target, &[], Some(&manifest::problem_spec(&liftable))),
    );
    for (name, args) in COMMANDS {
        let out = run(args);
        write(&format!("{name}.golden"), &String::from_utf8(out.stdout).unwrap());
    }
}

#[test]
fn fixtures_round_trip() {
    for name in [
        "sphere1.dg",
        "sphere2.dg",
        "disk3.dg",
        "obstructed_f2.dg",
        "liftable_f2.dg",
    ] {
        let text = std::fs::read_to_string(fixture_dir().join(name)).unwrap();
        let parsed = manifest::parse_str(&text).unwrap();
        let again = manifest::emit(
            &parsed.category,
            &parsed.functors,
            parsed.problem.as_ref().map(|p| p as _),
        );
        assert_eq!(again, text, "{name} is not canonical");
    }
}

#[test]
fn sphere_fixture_parses_to_cell_category() {
    let text = std::fs::read_to_string(fixture_dir().join("sphere2.dg")).unwrap();
    let parsed = manifest::parse_str(&text).unwrap();
    let expected = cell_category(Field::Rationals, CellKind::Sphere, 2).unwrap();
    assert_eq!(*parsed.category, *expected);
}

#[test]
fn golden_reports_and_exit_codes() {
    let expected_code = |name: &str| match name {
        "obstruct_blocked" | "rigidify_blocked" => 1,
        _ => 0,
    };
    for (name, args) in COMMANDS {
        let golden = std::fs::read_to_string(fixture_dir().join(format!("{name}.golden")))
            .unwrap_or_else(|_| panic!("missing golden for {name}; run the regenerate test"));
        let first = run(args);
        let second = run(args);
        assert_eq!(
            first.status.code(),
            Some(expected_code(name)),
            "{name}: {}",
            String::from_utf8_lossy(&first.stderr)
        );
        assert_eq!(first.stdout, second.stdout, "{name} output is not deterministic");
        assert_eq!(
            String::from_utf8(first.stdout).unwrap(),
            golden,
            "{name} deviates from its golden report"
        );
    }
}

#[test]
fn blocked_report_names_stage_and_derivation() {
    let out = run(&["rigidify", "--problem", "obstructed_f2.dg"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("stage 0"), "{text}");
    assert!(text.contains("does not vanish"), "{text}");
    assert!(text.contains("derivation on q"), "{text}");
}

#[test]
fn input_errors_exit_2() {
    let out = run(&["check", "no_such_file.dg"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["obstruct", "--problem", "sphere1.dg", "-n", "0"]);
    assert_eq!(out.status.code(), Some(2));
}
