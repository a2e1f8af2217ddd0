//! Multi-qutrit constructions, each paired with its definitional target.
//!
//! Targets are built directly from their basis-state action, never from a
//! circuit, so `NamedSynthesis::verify` is an independent check.

use std::f64::consts::FRAC_PI_2;

use crate::circuit::{circuit_unitary, digits_to_index, index_to_digits, Circuit, CircuitGate};
use crate::error::{Error, Result};
use crate::gates::{controlled_gate, Axis, ControlSpec, GateKind, SubspacePair};
use crate::numerics::{cis, equal_up_to_phase, ComplexMatrix, ONE};

/// Default tolerance used by [`NamedSynthesis::verify`].
pub const SYNTH_TOL: f64 = 1e-10;

/// Parameters of the state-to-`|2>` transform:
/// `c0 = cos t1 e^{i p0}`, `c1 = sin t1 cos t2 e^{i p1}`, `c2 = sin t1 sin t2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsParams {
    pub theta1: f64,
    pub theta2: f64,
    pub phi0: f64,
    pub phi1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedSynthesis {
    pub label: String,
    pub circuit: Circuit,
    pub target: ComplexMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verification {
    pub ok: bool,
    /// `lambda` with `e^{i lambda} U ~ target`.
    pub phase: f64,
    pub max_error: f64,
}

impl NamedSynthesis {
    pub fn verify(&self, tol: f64) -> Result<Verification> {
        let u = circuit_unitary(&self.circuit)?;
        let (ok, phase) = equal_up_to_phase(&u, &self.target, tol)?;
        let max_error = u.scale(cis(phase)).max_abs_diff(&self.target)?;
        Ok(Verification { ok, phase, max_error })
    }
}

fn pair(j: usize, k: usize) -> Result<SubspacePair> {
    SubspacePair::unordered(j, k)
}

fn x(j: usize, k: usize) -> Result<GateKind> {
    Ok(GateKind::XPair(pair(j, k)?))
}

fn ctrl(cw: usize, cv: usize, op: GateKind, tw: usize) -> CircuitGate {
    CircuitGate::controlled(cw, cv, op, tw)
}

fn rot(axis: Axis, j: usize, k: usize, theta: f64) -> GateKind {
    GateKind::Rot {
        axis,
        pair: SubspacePair::raw(j, k),
        theta,
    }
}

/// Unitary of the basis map `digits -> f(digits)`, which must be a bijection.
pub fn permutation_target(d: usize, width: usize, f: impl Fn(&[usize]) -> Vec<usize>) -> ComplexMatrix {
    let n = d.pow(width as u32);
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        let out = f(&index_to_digits(i, d, width));
        m[(digits_to_index(&out, d), i)] = ONE;
    }
    m
}

fn swap_level(v: usize, i: usize, j: usize) -> usize {
    if v == i {
        j
    } else if v == j {
        i
    } else {
        v
    }
}

fn check_qutrit_level(v: usize, what: &str) -> Result<()> {
    if v >= 3 {
        return Err(Error::BadSubspace(format!("{what} {v} out of range for d=3")));
    }
    Ok(())
}

/// Re-expresses a controlled `X^(jk)` with control value `new_value`:
/// `X^(n n')` on the control wire, the gate with value `n'`, `X^(n n')` again.
pub fn transform_tcx_control(g: &CircuitGate, new_value: usize) -> Result<Vec<CircuitGate>> {
    let c = g.control.ok_or_else(|| Error::BadWire("gate has no control".into()))?;
    if !matches!(g.op, GateKind::XPair(_)) {
        return Err(Error::BadSubspace("expected a controlled X gate".into()));
    }
    if c.value == new_value {
        return Ok(vec![g.clone()]);
    }
    let flip = CircuitGate::single(x(c.value, new_value)?, c.wire);
    let mut moved = g.clone();
    moved.control = Some(crate::circuit::Control {
        wire: c.wire,
        value: new_value,
    });
    Ok(vec![flip.clone(), moved, flip])
}

/// Turns a controlled `X^(ij)` into a controlled `X^(i'j')` by
/// conjugating its target with a level permutation `p`, where
/// `p X^(ij) p^dagger = X^(i'j')`. Returns `[p^dagger, g, p]` in time order.
pub fn transform_tcx_target(g: &CircuitGate, d: usize, new_pair: SubspacePair) -> Result<Vec<CircuitGate>> {
    let GateKind::XPair(old) = g.op else {
        return Err(Error::BadSubspace("expected a controlled X gate".into()));
    };
    if g.control.is_none() {
        return Err(Error::BadWire("gate has no control".into()));
    }
    new_pair.check(d)?;
    if old == new_pair {
        return Ok(vec![g.clone()]);
    }
    // p sends i -> i' and j -> j'; the other levels fill the gaps in order.
    let mut p = vec![usize::MAX; d];
    p[old.j()] = new_pair.j();
    p[old.k()] = new_pair.k();
    let mut free = (0..d).filter(|&l| !new_pair.contains(l));
    for slot in p.iter_mut() {
        if *slot == usize::MAX {
            *slot = free.next().expect("enough free levels");
        }
    }
    let moved: Vec<usize> = (0..d).filter(|&l| p[l] != l).collect();
    let (before, after) = if moved.len() == 2 && p[moved[0]] == moved[1] {
        let t = x(moved[0], moved[1])?;
        (t.clone(), t)
    } else {
        let mut inv = vec![0; d];
        for (i, &t) in p.iter().enumerate() {
            inv[t] = i;
        }
        (GateKind::Perm(inv), GateKind::Perm(p))
    };
    Ok(vec![
        CircuitGate::single(before, g.target),
        g.clone(),
        CircuitGate::single(after, g.target),
    ])
}

/// Controlled `Z^[m]` built from one controlled `X` by Hadamard conjugation
/// on the target, for qudits of dimension `d`.
pub fn gcz_from_gcx(d: usize, n: usize, m: usize) -> Result<NamedSynthesis> {
    if n >= d || m >= d || d < 2 {
        return Err(Error::BadSubspace(format!(
            "control {n} / level {m} out of range for d={d}"
        )));
    }
    let mut gates = Vec::new();
    // H X H on the pair (0, k) puts the sign on level k.
    let k = if m == 0 { 1 } else { m };
    let hp = GateKind::HPair(pair(0, k)?);
    if m == 0 {
        gates.push(CircuitGate::single(x(0, 1)?, 1));
    }
    gates.push(CircuitGate::single(hp.clone(), 1));
    gates.push(ctrl(0, n, x(0, k)?, 1));
    gates.push(CircuitGate::single(hp, 1));
    if m == 0 {
        gates.push(CircuitGate::single(x(0, 1)?, 1));
    }
    Ok(NamedSynthesis {
        label: format!("gcz d={d} n={n} m={m}"),
        circuit: Circuit::with_gates(d, 2, gates)?,
        target: controlled_gate(d, ControlSpec::new(n), &GateKind::ZLevel(m))?,
    })
}

pub fn tcz_from_tcx(n: usize, m: usize) -> Result<NamedSynthesis> {
    let mut s = gcz_from_gcx(3, n, m)?;
    s.label = format!("tcz n={n} m={m}");
    Ok(s)
}

/// `|a, b> -> |a, a + b mod 3>`.
pub fn synth_feynman() -> Result<NamedSynthesis> {
    let gates = vec![
        ctrl(0, 1, x(1, 2)?, 1),
        ctrl(0, 1, x(0, 1)?, 1),
        ctrl(0, 2, x(0, 1)?, 1),
        ctrl(0, 2, x(1, 2)?, 1),
    ];
    Ok(NamedSynthesis {
        label: "feynman".into(),
        circuit: Circuit::with_gates(3, 2, gates)?,
        target: permutation_target(3, 2, |v| vec![v[0], (v[0] + v[1]) % 3]),
    })
}

/// `|a, b> -> |a, a - b mod 3>`.
pub fn synth_gxor() -> Result<NamedSynthesis> {
    let gates = vec![
        ctrl(0, 0, x(1, 2)?, 1),
        ctrl(0, 1, x(0, 1)?, 1),
        ctrl(0, 2, x(0, 2)?, 1),
    ];
    Ok(NamedSynthesis {
        label: "gxor".into(),
        circuit: Circuit::with_gates(3, 2, gates)?,
        target: permutation_target(3, 2, |v| vec![v[0], (3 + v[0] - v[1]) % 3]),
    })
}

/// Conditional swap: exchanges `|i, j>` and `|j, i>`, fixes everything else.
fn conditional_swap(i: usize, j: usize) -> Result<Vec<CircuitGate>> {
    Ok(vec![
        ctrl(0, i, x(i, j)?, 1),
        ctrl(1, i, x(i, j)?, 0),
        ctrl(0, i, x(i, j)?, 1),
    ])
}

/// `|a, b> -> |b, a>` from three conditional swaps.
pub fn synth_swap() -> Result<NamedSynthesis> {
    let mut gates = Vec::new();
    for (i, j) in [(1, 2), (0, 2), (0, 1)] {
        gates.extend(conditional_swap(i, j)?);
    }
    Ok(NamedSynthesis {
        label: "swap".into(),
        circuit: Circuit::with_gates(3, 2, gates)?,
        target: permutation_target(3, 2, |v| vec![v[1], v[0]]),
    })
}

/// Applies `X^(ij)` to wire 2 iff wires 0 and 1 hold `|n>` and `|n'>`.
///
/// Five controlled-X gates and no one-qutrit gates: the target is hit by a
/// gate controlled on wire 0 and by two gates controlled on wire 1, the
/// second of which sees wire 1 with levels `p, q != n'` exchanged when
/// wire 0 holds `n`. The three hits cancel in pairs except at `|n, n'>`.
pub fn synth_toffoli_elementary(n: usize, n2: usize, i: usize, j: usize) -> Result<NamedSynthesis> {
    check_qutrit_level(n, "control value")?;
    check_qutrit_level(n2, "control value")?;
    check_qutrit_level(i, "level")?;
    check_qutrit_level(j, "level")?;
    let target_pair = pair(i, j)?;
    let others: Vec<usize> = (0..3).filter(|&l| l != n2).collect();
    let (p, q) = (others[0], others[1]);
    let tx = GateKind::XPair(target_pair);
    let gates = vec![
        ctrl(0, n, tx.clone(), 2),
        ctrl(1, p, tx.clone(), 2),
        ctrl(0, n, x(p, q)?, 1),
        ctrl(1, p, tx, 2),
        ctrl(0, n, x(p, q)?, 1),
    ];
    Ok(NamedSynthesis {
        label: format!("toffoli-elem n={n} n'={n2} pair={target_pair}"),
        circuit: Circuit::with_gates(3, 3, gates)?,
        target: permutation_target(3, 3, |v| {
            let c = if v[0] == n && v[1] == n2 {
                swap_level(v[2], i, j)
            } else {
                v[2]
            };
            vec![v[0], v[1], c]
        }),
    })
}

/// Adds 1 mod 3 to wire 2 iff wires 0 and 1 both hold `|1>`.
///
/// Alternating `X^(01)` (controlled by wire 0) and `X^(12)` (controlled by
/// wire 1) twice: each control alone applies an involution twice, both
/// together apply `(X^(12) X^(01))^2`, the +1 cycle.
pub fn synth_toffoli_typical() -> Result<NamedSynthesis> {
    let gates = vec![
        ctrl(0, 1, x(0, 1)?, 2),
        ctrl(1, 1, x(1, 2)?, 2),
        ctrl(0, 1, x(0, 1)?, 2),
        ctrl(1, 1, x(1, 2)?, 2),
    ];
    Ok(NamedSynthesis {
        label: "toffoli-typical".into(),
        circuit: Circuit::with_gates(3, 3, gates)?,
        target: permutation_target(3, 3, |v| {
            let c = if v[0] == 1 && v[1] == 1 { (v[2] + 1) % 3 } else { v[2] };
            vec![v[0], v[1], c]
        }),
    })
}

/// The one-qutrit matrix `P Q` sending `c0|0> + c1|1> + c2|2>` to `|2>`.
pub fn ms_z_matrix(p: &MsParams) -> ComplexMatrix {
    let (s1, c1) = p.theta1.sin_cos();
    let (s2, c2) = p.theta2.sin_cos();
    let mut pm = ComplexMatrix::identity(3);
    pm[(0, 0)] = s1.into();
    pm[(0, 2)] = -cis(p.phi0) * c1;
    pm[(2, 0)] = cis(-p.phi0) * c1;
    pm[(2, 2)] = s1.into();
    let mut qm = ComplexMatrix::identity(3);
    qm[(1, 1)] = s2.into();
    qm[(1, 2)] = -cis(p.phi1) * c2;
    qm[(2, 1)] = cis(-p.phi1) * c2;
    qm[(2, 2)] = s2.into();
    &pm * &qm
}

/// `V = R_z(-phi) R_y(pi/2 - theta) R_z(phi)` on `(j, k)`, in time order.
fn half_rotation(j: usize, k: usize, theta: f64, phi: f64) -> [GateKind; 3] {
    [
        rot(Axis::Z, j, k, phi),
        rot(Axis::Y, j, k, FRAC_PI_2 - theta),
        rot(Axis::Z, j, k, -phi),
    ]
}

/// Controlled (on `|2>`) version of [`ms_z_matrix`] from four controlled
/// `Z^[2]` gates. Each factor `V^2` is made as `V Z V^dagger Z`, which
/// collapses to the identity when the control is off.
pub fn synth_ms_z(p: &MsParams) -> Result<NamedSynthesis> {
    let cz = || ctrl(0, 2, GateKind::ZLevel(2), 1);
    let mut gates = Vec::new();
    for v in [
        half_rotation(1, 2, p.theta2, p.phi1),
        half_rotation(0, 2, p.theta1, p.phi0),
    ] {
        gates.push(cz());
        gates.extend(v.iter().rev().map(|g| CircuitGate::single(g.inverse(), 1)));
        gates.push(cz());
        gates.extend(v.iter().map(|g| CircuitGate::single(g.clone(), 1)));
    }
    let z = ms_z_matrix(p);
    let mut target = ComplexMatrix::identity(9);
    for r in 0..3 {
        for c in 0..3 {
            target[(6 + r, 6 + c)] = z[(r, c)];
        }
    }
    Ok(NamedSynthesis {
        label: "ms-z".into(),
        circuit: Circuit::with_gates(3, 2, gates)?,
        target,
    })
}

/// `diag(1, ..., 1, e^{i phi})` on two qutrits. The control picks up
/// `e^{i phi/3}` on `|2>`; the target compensates with controlled
/// `R_z^(02)(2 phi/3)` and `R_z^(12)(2 phi/3)`, each built from two
/// controlled-X gates around `R_z(-/+ phi/3)`.
pub fn synth_ms_phase(phi: f64) -> Result<NamedSynthesis> {
    let third = phi / 3.0;
    let mut gates = Vec::new();
    for (j, k) in [(0, 2), (1, 2)] {
        let r = rot(Axis::Z, j, k, third);
        gates.push(ctrl(0, 2, x(j, k)?, 1));
        gates.push(CircuitGate::single(r.inverse(), 1));
        gates.push(ctrl(0, 2, x(j, k)?, 1));
        gates.push(CircuitGate::single(r, 1));
    }
    gates.push(CircuitGate::single(GateKind::LevelPhase { level: 2, phi: third }, 0));
    let mut target = ComplexMatrix::identity(9);
    target[(8, 8)] = cis(phi);
    Ok(NamedSynthesis {
        label: "ms-phase".into(),
        circuit: Circuit::with_gates(3, 2, gates)?,
        target,
    })
}
