//! Command implementations behind the `tqc` binary.
//!
//! Each command returns a [`CommandOutcome`] whose last line is either
//! `OK residual=<r>` or `FAIL reason=<code>`; the process exit code is 0
//! exactly when the command succeeded.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use tqc_core::decompose::{decompose_qudit, decompose_qutrit};
use tqc_core::numerics::{equal_up_to_phase, ComplexMatrix};
use tqc_core::synthlib::{self, MsParams, NamedSynthesis, SYNTH_TOL};
use tqc_core::{apply, circuit_unitary, emit_circuit, gate_counts, parse_circuit, Error, StateVector, Template};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NOT_UNITARY: i32 = 3;
pub const EXIT_RECONSTRUCTION: i32 = 4;

/// Default comparison tolerance for `verify`.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-9;

/// Amplitudes below this magnitude are not printed by `sim`.
pub const SIM_PRINT_FLOOR: f64 = 1e-12;

pub const SYNTH_NAMES: [&str; 8] = [
    "feynman",
    "gxor",
    "swap",
    "toffoli-elem",
    "toffoli-typical",
    "ms-z",
    "ms-phase",
    "tcz",
];

#[derive(Clone, Debug, PartialEq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub lines: Vec<String>,
}

impl CommandOutcome {
    fn ok(mut lines: Vec<String>, residual: f64) -> Self {
        lines.push(format!("OK residual={residual:e}"));
        CommandOutcome {
            exit_code: EXIT_OK,
            lines,
        }
    }

    fn fail(mut lines: Vec<String>, reason: &str, exit_code: i32) -> Self {
        lines.push(format!("FAIL reason={reason}"));
        CommandOutcome { exit_code, lines }
    }

    fn from_error(lines: Vec<String>, e: &Error) -> Self {
        let mut lines = lines;
        lines.push(format!("error: {e}"));
        Self::fail(lines, e.code(), exit_code_for(e))
    }

    pub fn success(&self) -> bool {
        self.exit_code == EXIT_OK
    }

    pub fn last_line(&self) -> &str {
        self.lines.last().map(String::as_str).unwrap_or("")
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        s
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => EXIT_PARSE,
        Error::NotUnitary { .. } => EXIT_NOT_UNITARY,
        Error::ReconstructionFailed { .. } => EXIT_RECONSTRUCTION,
        _ => EXIT_FAIL,
    }
}

fn read(path: &Path) -> std::result::Result<String, CommandOutcome> {
    fs::read_to_string(path).map_err(|e| {
        CommandOutcome::fail(
            vec![format!("error: cannot read {}: {e}", path.display())],
            "Io",
            EXIT_FAIL,
        )
    })
}

fn write(path: &Path, text: &str) -> std::result::Result<(), CommandOutcome> {
    fs::write(path, text).map_err(|e| {
        CommandOutcome::fail(
            vec![format!("error: cannot write {}: {e}", path.display())],
            "Io",
            EXIT_FAIL,
        )
    })
}

macro_rules! tryo {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(o) => return o,
        }
    };
    ($e:expr, $lines:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return CommandOutcome::from_error($lines, &err),
        }
    };
}

/// Maps the `--template` flag values to templates.
pub fn parse_template(s: &str) -> Option<Template> {
    match s {
        "eq4" => Some(Template::EightRotation),
        "eq5" => Some(Template::ThreeFactor),
        "qudit" => Some(Template::QuditRecursive),
        _ => None,
    }
}

pub fn cmd_decompose(matrix_file: &Path, template: Template, out: Option<&Path>) -> CommandOutcome {
    let text = tryo!(read(matrix_file));
    let m = tryo!(ComplexMatrix::from_text(&text), vec![]);
    let result = match template {
        Template::QuditRecursive => decompose_qudit(&m),
        t => decompose_qutrit(&m, t),
    };
    let r = tryo!(result, vec![]);
    let circuit_text = emit_circuit(&r.circuit);
    let mut lines = Vec::new();
    match out {
        Some(p) => tryo!(write(p, &circuit_text)),
        None => lines.extend(circuit_text.lines().map(str::to_owned)),
    }
    let pairs: Vec<String> = r.subspaces_used.iter().map(|p| p.to_string()).collect();
    lines.push(format!("template: {}", r.template.label()));
    lines.push(format!("rotations: {}", r.rotation_count()));
    lines.push(format!("subspaces: {}", pairs.join(" ")));
    lines.push(format!("global phase: {}", r.global_phase));
    lines.push(format!("residual: {:e}", r.residual));
    CommandOutcome::ok(lines, r.residual)
}

pub fn cmd_verify(circuit_file: &Path, matrix_file: &Path, tol: f64) -> CommandOutcome {
    let ctext = tryo!(read(circuit_file));
    let mtext = tryo!(read(matrix_file));
    let c = tryo!(parse_circuit(&ctext), vec![]);
    let m = tryo!(ComplexMatrix::from_text(&mtext), vec![]);
    if c.state_dim() != m.dim() {
        let e = Error::DimMismatch(format!(
            "circuit acts on dimension {} but the matrix is {}x{}",
            c.state_dim(),
            m.dim(),
            m.dim()
        ));
        return CommandOutcome::from_error(vec![], &e);
    }
    let u = tryo!(circuit_unitary(&c), vec![]);
    let (ok, phase) = tryo!(equal_up_to_phase(&u, &m, tol), vec![]);
    let err = tryo!(u.scale(tqc_core::numerics::cis(phase)).max_abs_diff(&m), vec![]);
    let lines = vec![format!("phase: {phase}"), format!("max error: {err:e}")];
    if ok {
        CommandOutcome::ok(lines, err)
    } else {
        CommandOutcome::fail(lines, "Mismatch", EXIT_FAIL)
    }
}

fn param<T: std::str::FromStr>(params: &[String], i: usize, default: Option<T>, what: &str) -> Result<T, String> {
    match params.get(i) {
        Some(s) => s.parse().map_err(|_| format!("bad value {s:?} for {what}")),
        None => default.ok_or_else(|| format!("missing parameter {what}")),
    }
}

fn check_arity(params: &[String], max: usize, name: &str) -> Result<(), String> {
    if params.len() > max {
        return Err(format!("{name} takes at most {max} parameters, got {}", params.len()));
    }
    Ok(())
}

/// Builds the named construction. Parameters are positional:
/// `toffoli-elem [n n' i j]`, `ms-z t1 t2 p0 p1`, `ms-phase phi`, `tcz [n m]`.
pub fn build_synthesis(name: &str, params: &[String]) -> Result<NamedSynthesis, String> {
    let core = |r: tqc_core::Result<NamedSynthesis>| r.map_err(|e| e.to_string());
    match name {
        "feynman" | "gxor" | "swap" | "toffoli-typical" => {
            check_arity(params, 0, name)?;
            core(match name {
                "feynman" => synthlib::synth_feynman(),
                "gxor" => synthlib::synth_gxor(),
                "swap" => synthlib::synth_swap(),
                _ => synthlib::synth_toffoli_typical(),
            })
        }
        "toffoli-elem" => {
            check_arity(params, 4, name)?;
            let n = param(params, 0, Some(0usize), "n")?;
            let n2 = param(params, 1, Some(0usize), "n'")?;
            let i = param(params, 2, Some(0usize), "i")?;
            let j = param(params, 3, Some(1usize), "j")?;
            core(synthlib::synth_toffoli_elementary(n, n2, i, j))
        }
        "ms-z" => {
            check_arity(params, 4, name)?;
            let p = MsParams {
                theta1: param(params, 0, None, "theta1")?,
                theta2: param(params, 1, None, "theta2")?,
                phi0: param(params, 2, None, "phi0")?,
                phi1: param(params, 3, None, "phi1")?,
            };
            core(synthlib::synth_ms_z(&p))
        }
        "ms-phase" => {
            check_arity(params, 1, name)?;
            core(synthlib::synth_ms_phase(param(params, 0, None, "phi")?))
        }
        "tcz" => {
            check_arity(params, 2, name)?;
            let n = param(params, 0, Some(0usize), "n")?;
            let m = param(params, 1, Some(0usize), "m")?;
            core(synthlib::tcz_from_tcx(n, m))
        }
        _ => Err(format!(
            "unknown construction {name:?}; expected one of {}",
            SYNTH_NAMES.join(", ")
        )),
    }
}

/// Builds, self-verifies, then writes the circuit (and optionally the
/// target matrix).
pub fn cmd_synth(name: &str, params: &[String], out: Option<&Path>, target_out: Option<&Path>) -> CommandOutcome {
    let s = match build_synthesis(name, params) {
        Ok(s) => s,
        Err(msg) => return CommandOutcome::fail(vec![format!("error: {msg}")], "ParseError", EXIT_PARSE),
    };
    let v = tryo!(s.verify(SYNTH_TOL), vec![]);
    let counts = gate_counts(&s.circuit);
    let mut lines = vec![
        format!("label: {}", s.label),
        format!("two-qudit gates: {}", counts.two_qudit),
        format!("one-qudit gates: {}", counts.one_qudit),
    ];
    for (k, n) in &counts.by_kind {
        lines.push(format!("  {k}: {n}"));
    }
    lines.push(format!("max error: {:e}", v.max_error));
    if !v.ok {
        return CommandOutcome::fail(lines, "VerificationFailed", EXIT_FAIL);
    }
    let text = emit_circuit(&s.circuit);
    match out {
        Some(p) => tryo!(write(p, &text)),
        None => lines.splice(0..0, text.lines().map(str::to_owned)).for_each(drop),
    }
    if let Some(p) = target_out {
        tryo!(write(p, &s.target.to_text()));
    }
    CommandOutcome::ok(lines, v.max_error)
}

pub fn cmd_sim(circuit_file: &Path, ket: &str) -> CommandOutcome {
    let ctext = tryo!(read(circuit_file));
    let c = tryo!(parse_circuit(&ctext), vec![]);
    let s = tryo!(StateVector::from_ket(c.d(), ket), vec![]);
    let out = tryo!(apply(&c, &s), vec![]);
    let mut lines = Vec::new();
    for (i, a) in out.amplitudes().iter().enumerate() {
        if a.norm() >= SIM_PRINT_FLOOR {
            lines.push(format!("{}: {},{}", out.ket_label(i), a.re, a.im));
        }
    }
    CommandOutcome::ok(lines, (out.norm() - 1.0).abs())
}
