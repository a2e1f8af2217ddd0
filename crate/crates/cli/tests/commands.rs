//! Exercises the `tqc` binary and the command layer: exit codes, output
//! shape and the simulator front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tqc_cli::{
    build_synthesis, cmd_decompose, cmd_sim, cmd_synth, cmd_verify, exit_code_for, parse_template, EXIT_FAIL,
    EXIT_NOT_UNITARY, EXIT_OK, EXIT_PARSE, EXIT_RECONSTRUCTION, SYNTH_NAMES,
};
use tqc_core::{Error, Template};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/haar_u3.txt")
}

fn tqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tqc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn exit_code_mapping() {
    assert_eq!(
        exit_code_for(&Error::Parse {
            line: 3,
            msg: "x".into()
        }),
        EXIT_PARSE
    );
    assert_eq!(exit_code_for(&Error::NotUnitary { deviation: 0.5 }), EXIT_NOT_UNITARY);
    assert_eq!(
        exit_code_for(&Error::ReconstructionFailed {
            residual: 1e-3,
            limit: 1e-9
        }),
        EXIT_RECONSTRUCTION
    );
    assert_eq!(exit_code_for(&Error::TooLarge { d: 7, limit: 6 }), EXIT_FAIL);
}

#[test]
fn template_flag_values() {
    assert_eq!(parse_template("eq4"), Some(Template::EightRotation));
    assert_eq!(parse_template("eq5"), Some(Template::ThreeFactor));
    assert_eq!(parse_template("qudit"), Some(Template::QuditRecursive));
    assert_eq!(parse_template("eq6"), None);
}

#[test]
fn decompose_prints_summary_and_ok() {
    let o = cmd_decompose(&fixture(), Template::EightRotation, None);
    assert_eq!(o.exit_code, EXIT_OK);
    let text = o.render();
    assert!(text.starts_with("dim 3\nwires 1\n"), "{text}");
    assert!(text.contains("rotations: 8\n"), "{text}");
    assert!(text.contains("subspaces: (0,1) (0,2)\n"), "{text}");
    assert!(o.last_line().starts_with("OK residual="));
}

#[test]
fn decompose_rejects_malformed_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    fs::write(&p, "3\n1,0 0,0\n").unwrap();
    let o = tqc(&["decompose", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_PARSE));
    assert!(
        stdout(&o).trim_end().ends_with("FAIL reason=ParseError"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn decompose_rejects_non_unitary() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nu.txt");
    fs::write(&p, "3\n1,0 0,0 0,0\n0,0 2,0 0,0\n0,0 0,0 1,0\n").unwrap();
    let o = tqc(&["decompose", p.to_str().unwrap(), "--template", "eq5"]);
    assert_eq!(o.status.code(), Some(EXIT_NOT_UNITARY));
    assert!(stdout(&o).contains("FAIL reason="));
}

#[test]
fn decompose_rejects_dimension_above_limit() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("id7.txt");
    let mut text = String::from("7\n");
    for i in 0..7 {
        let row: Vec<&str> = (0..7).map(|j| if i == j { "1,0" } else { "0,0" }).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    fs::write(&p, text).unwrap();
    let o = cmd_decompose(&p, Template::QuditRecursive, None);
    assert_eq!(o.exit_code, EXIT_FAIL);
    assert_eq!(o.last_line(), "FAIL reason=TooLarge");
}

#[test]
fn unknown_synth_name_is_a_parse_error() {
    let o = tqc(&["synth", "fredkin"]);
    assert_eq!(o.status.code(), Some(EXIT_PARSE));
    assert!(build_synthesis("fredkin", &[]).is_err());
}

#[test]
fn synth_parameters_are_validated() {
    assert!(build_synthesis("ms-z", &["0.1".into()]).is_err());
    assert!(build_synthesis("ms-phase", &["abc".into()]).is_err());
    assert!(build_synthesis("feynman", &["1".into()]).is_err());
    assert!(build_synthesis("toffoli-elem", &["1".into(), "2".into(), "0".into(), "2".into()]).is_ok());
    let o = tqc(&["synth", "ms-phase", "-0.7"]);
    assert_eq!(o.status.code(), Some(EXIT_OK), "{}", stdout(&o));
}

#[test]
fn every_synth_name_self_verifies() {
    for name in SYNTH_NAMES {
        let params: Vec<String> = match name {
            "ms-z" => ["0.3", "1.1", "-0.4", "2.0"].map(String::from).to_vec(),
            "ms-phase" => vec!["0.9".into()],
            _ => vec![],
        };
        let o = cmd_synth(name, &params, None, None);
        assert!(o.success(), "{name}: {}", o.render());
    }
}

#[test]
fn verify_reports_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let circ = dir.path().join("c.txt");
    let target = dir.path().join("t.txt");
    assert!(cmd_synth("feynman", &[], Some(&circ), Some(&target)).success());
    assert!(cmd_verify(&circ, &target, 1e-9).success());
    let swap_target = dir.path().join("s.txt");
    assert!(cmd_synth("swap", &[], None, Some(&swap_target)).success());
    let o = cmd_verify(&circ, &swap_target, 1e-9);
    assert_eq!(o.exit_code, EXIT_FAIL);
    assert_eq!(o.last_line(), "FAIL reason=Mismatch");
}

#[test]
fn sim_follows_basis_states() {
    let dir = tempfile::tempdir().unwrap();
    let circ = dir.path().join("f.txt");
    assert!(cmd_synth("feynman", &[], Some(&circ), None).success());
    // Feynman maps |a,b> to |a, a+b mod 3>.
    let o = cmd_sim(&circ, "|22⟩");
    assert!(o.success(), "{}", o.render());
    assert_eq!(o.lines[0], "|21⟩: 1,0");
    assert_eq!(o.lines.len(), 2);

    let empty = dir.path().join("e.txt");
    fs::write(&empty, "dim 3\nwires 2\n").unwrap();
    let o = tqc(&["sim", empty.to_str().unwrap(), "01"]);
    assert_eq!(o.status.code(), Some(EXIT_OK));
    assert!(stdout(&o).starts_with("|01⟩: 1,0\n"), "{}", stdout(&o));
}

#[test]
fn sim_rejects_bad_ket() {
    let dir = tempfile::tempdir().unwrap();
    let circ = dir.path().join("f.txt");
    fs::write(&circ, "dim 3\nwires 2\n").unwrap();
    let o = cmd_sim(&circ, "|2x⟩");
    assert_eq!(o.exit_code, EXIT_PARSE);
}
