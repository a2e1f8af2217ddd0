//! Circuit IR over `width` qudits of dimension `d`.
//!
//! Wire 0 is the most significant digit of a basis index:
//! `index = sum_w digit_w * d^(width - 1 - w)`. Gates are stored in time
//! order, so the circuit unitary is `G_last * ... * G_first`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gates::{controlled_gate, gate_matrix, Axis, ControlSpec, GateKind, SubspacePair};
use crate::numerics::{cis, ComplexMatrix, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub wire: usize,
    pub value: usize,
}

/// A gate placed on the circuit's wires. `GlobalPhase` ignores `target`
/// and never carries a control.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitGate {
    pub op: GateKind,
    pub target: usize,
    pub control: Option<Control>,
}

impl CircuitGate {
    pub fn single(op: GateKind, wire: usize) -> Self {
        CircuitGate {
            op,
            target: wire,
            control: None,
        }
    }

    pub fn controlled(control_wire: usize, control_value: usize, op: GateKind, target: usize) -> Self {
        CircuitGate {
            op,
            target,
            control: Some(Control {
                wire: control_wire,
                value: control_value,
            }),
        }
    }

    pub fn global_phase(alpha: f64) -> Self {
        CircuitGate::single(GateKind::GlobalPhase(alpha), 0)
    }

    pub fn is_two_qudit(&self) -> bool {
        self.control.is_some()
    }

    pub fn is_global_phase(&self) -> bool {
        matches!(self.op, GateKind::GlobalPhase(_))
    }

    pub fn inverse(&self) -> Self {
        CircuitGate {
            op: self.op.inverse(),
            ..self.clone()
        }
    }

    pub fn validate(&self, d: usize, width: usize) -> Result<()> {
        self.op.validate(d)?;
        if self.is_global_phase() {
            if self.control.is_some() {
                return Err(Error::BadWire("a global phase cannot be controlled".into()));
            }
            return Ok(());
        }
        if self.target >= width {
            return Err(Error::BadWire(format!(
                "target wire {} out of range for width {width}",
                self.target
            )));
        }
        if let Some(c) = self.control {
            if c.wire >= width {
                return Err(Error::BadWire(format!(
                    "control wire {} out of range for width {width}",
                    c.wire
                )));
            }
            if c.wire == self.target {
                return Err(Error::BadWire(format!("control and target share wire {}", c.wire)));
            }
            if c.value >= d {
                return Err(Error::BadWire(format!(
                    "control value {} out of range for d={d}",
                    c.value
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    d: usize,
    width: usize,
    gates: Vec<CircuitGate>,
}

impl Circuit {
    pub fn new(d: usize, width: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::BadDimension(format!("qudit dimension {d} < 2")));
        }
        if width < 1 {
            return Err(Error::BadWire("a circuit needs at least one wire".into()));
        }
        Ok(Circuit {
            d,
            width,
            gates: Vec::new(),
        })
    }

    pub fn with_gates(d: usize, width: usize, gates: impl IntoIterator<Item = CircuitGate>) -> Result<Self> {
        let mut c = Self::new(d, width)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[CircuitGate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: CircuitGate) -> Result<()> {
        g.validate(self.d, self.width)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = CircuitGate>) -> Result<()> {
        for g in gates {
            self.push(g)?;
        }
        Ok(())
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Circuit) -> Result<Circuit> {
        if (self.d, self.width) != (other.d, other.width) {
            return Err(Error::DimMismatch(format!(
                "cannot join d={} width={} with d={} width={}",
                self.d, self.width, other.d, other.width
            )));
        }
        let mut c = self.clone();
        c.gates.extend(other.gates.iter().cloned());
        Ok(c)
    }

    pub fn inverse(&self) -> Circuit {
        Circuit {
            d: self.d,
            width: self.width,
            gates: self.gates.iter().rev().map(CircuitGate::inverse).collect(),
        }
    }

    pub fn state_dim(&self) -> usize {
        self.d.pow(self.width as u32)
    }
}

/// Permutation matrix reordering tensor factors: the output digit at
/// position `i` is the input digit of wire `order[i]`.
fn wire_permutation(d: usize, width: usize, order: &[usize]) -> ComplexMatrix {
    let n = d.pow(width as u32);
    let mut p = ComplexMatrix::zeros(n);
    for x in 0..n {
        let digits = index_to_digits(x, d, width);
        let y = order.iter().fold(0, |acc, &w| acc * d + digits[w]);
        p[(y, x)] = ONE;
    }
    p
}

fn padded(m: &ComplexMatrix, d: usize, before: usize, after: usize) -> ComplexMatrix {
    let left = ComplexMatrix::identity(d.pow(before as u32));
    let right = ComplexMatrix::identity(d.pow(after as u32));
    left.tensor(m).tensor(&right)
}

/// Full-space matrix of one placed gate.
pub fn embedded_gate_matrix(g: &CircuitGate, d: usize, width: usize) -> Result<ComplexMatrix> {
    g.validate(d, width)?;
    let n = d.pow(width as u32);
    match (&g.op, g.control) {
        (GateKind::GlobalPhase(a), _) => Ok(ComplexMatrix::identity(n).scale(cis(*a))),
        (op, None) => {
            let m = gate_matrix(d, op)?;
            Ok(padded(&m, d, g.target, width - g.target - 1))
        }
        (op, Some(c)) => {
            let m = controlled_gate(d, ControlSpec::new(c.value), op)?;
            if g.target == c.wire + 1 {
                return Ok(padded(&m, d, c.wire, width - g.target - 1));
            }
            let mut order = vec![c.wire, g.target];
            order.extend((0..width).filter(|&w| w != c.wire && w != g.target));
            let p = wire_permutation(d, width, &order);
            let inner = padded(&m, d, 0, width - 2);
            Ok(&(&p.dagger() * &inner) * &p)
        }
    }
}

/// Unitary of the whole circuit, built from tensor embeddings of each gate.
pub fn circuit_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    let mut u = ComplexMatrix::identity(c.state_dim());
    for g in &c.gates {
        let m = embedded_gate_matrix(g, c.d, c.width)?;
        u = &m * &u;
    }
    Ok(u)
}

pub fn index_to_digits(mut index: usize, d: usize, width: usize) -> Vec<usize> {
    let mut digits = vec![0; width];
    for w in (0..width).rev() {
        digits[w] = index % d;
        index /= d;
    }
    digits
}

pub fn digits_to_index(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    d: usize,
    width: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn basis(d: usize, digits: &[usize]) -> Result<Self> {
        if d < 2 || digits.is_empty() {
            return Err(Error::BadDimension("basis state needs d >= 2 and one wire".into()));
        }
        if let Some(&bad) = digits.iter().find(|&&x| x >= d) {
            return Err(Error::BadWire(format!("digit {bad} out of range for d={d}")));
        }
        let width = digits.len();
        let mut amps = vec![ZERO; d.pow(width as u32)];
        amps[digits_to_index(digits, d)] = ONE;
        Ok(StateVector { d, width, amps })
    }

    /// Normalizes nothing; the amplitudes must already have unit norm.
    pub fn from_amplitudes(d: usize, width: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != d.pow(width as u32) {
            return Err(Error::DimMismatch(format!(
                "{} amplitudes for d={d}, width={width}",
                amps.len()
            )));
        }
        let s = StateVector { d, width, amps };
        if (s.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::BadDimension(format!("state norm {} is not 1", s.norm())));
        }
        Ok(s)
    }

    /// Parses a basis ket such as `|12⟩`, `|12>` or `12`, one digit per wire.
    pub fn from_ket(d: usize, ket: &str) -> Result<Self> {
        let body = ket
            .trim()
            .trim_start_matches('|')
            .trim_end_matches('⟩')
            .trim_end_matches('>');
        let digits = body
            .chars()
            .map(|ch| {
                ch.to_digit(10)
                    .map(|v| v as usize)
                    .ok_or_else(|| Error::parse(1, format!("bad ket {ket:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::basis(d, &digits)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn ket_label(&self, index: usize) -> String {
        let digits: String = index_to_digits(index, self.d, self.width)
            .iter()
            .map(|x| x.to_string())
            .collect();
        format!("|{digits}⟩")
    }
}

/// Runs the circuit on a state gate by gate, without forming the full
/// unitary.
pub fn apply(c: &Circuit, s: &StateVector) -> Result<StateVector> {
    if (c.d, c.width) != (s.d, s.width) {
        return Err(Error::DimMismatch(format!(
            "circuit d={} width={} against state d={} width={}",
            c.d, c.width, s.d, s.width
        )));
    }
    let d = c.d;
    let mut amps = s.amps.clone();
    let mut buf = vec![ZERO; d];
    for g in &c.gates {
        if let GateKind::GlobalPhase(a) = g.op {
            let ph = cis(a);
            amps.iter_mut().for_each(|x| *x *= ph);
            continue;
        }
        let m = gate_matrix(d, &g.op)?;
        let stride = d.pow((c.width - 1 - g.target) as u32);
        let ctrl = g.control.map(|ctl| (d.pow((c.width - 1 - ctl.wire) as u32), ctl.value));
        for base in 0..amps.len() {
            if !(base / stride).is_multiple_of(d) {
                continue;
            }
            if let Some((cstride, value)) = ctrl {
                if (base / cstride) % d != value {
                    continue;
                }
            }
            for (r, out) in buf.iter_mut().enumerate() {
                *out = (0..d).map(|l| m[(r, l)] * amps[base + l * stride]).sum();
            }
            for (l, &v) in buf.iter().enumerate() {
                amps[base + l * stride] = v;
            }
        }
    }
    Ok(StateVector {
        d,
        width: c.width,
        amps,
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub two_qudit: usize,
    /// Uncontrolled gates, excluding global phases.
    pub one_qudit: usize,
    /// Uncontrolled rotations.
    pub rotations: usize,
    pub by_kind: BTreeMap<String, usize>,
}

pub fn gate_counts(c: &Circuit) -> GateCounts {
    let mut counts = GateCounts::default();
    for g in &c.gates {
        let key = if g.is_two_qudit() {
            counts.two_qudit += 1;
            format!("ctrl-{}", g.op.mnemonic())
        } else {
            if !g.is_global_phase() {
                counts.one_qudit += 1;
            }
            if matches!(g.op, GateKind::Rot { .. }) {
                counts.rotations += 1;
            }
            g.op.mnemonic().to_string()
        };
        *counts.by_kind.entry(key).or_default() += 1;
    }
    counts
}

// --- text format ---------------------------------------------------------

/// Random circuit of `len` gates, deterministic in `seed`. Roughly a third
/// of the gates are controlled; the rest are drawn from every one-qudit kind.
pub fn random_circuit(d: usize, width: usize, len: usize, seed: u64) -> Result<Circuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(d, width)?;
    for _ in 0..len {
        let controlled = width > 1 && rng.random_bool(0.35);
        let op = loop {
            let op = random_one_qudit(d, &mut rng);
            if !(controlled && matches!(op, GateKind::GlobalPhase(_))) {
                break op;
            }
        };
        let target = rng.random_range(0..width);
        let g = if controlled {
            let mut cw = rng.random_range(0..width - 1);
            if cw >= target {
                cw += 1;
            }
            CircuitGate::controlled(cw, rng.random_range(0..d), op, target)
        } else if let GateKind::GlobalPhase(a) = op {
            CircuitGate::global_phase(a)
        } else {
            CircuitGate::single(op, target)
        };
        c.push(g)?;
    }
    Ok(c)
}

fn random_one_qudit(d: usize, rng: &mut ChaCha8Rng) -> GateKind {
    let j = rng.random_range(0..d - 1);
    let k = rng.random_range(j + 1..d);
    let pair = SubspacePair::raw(j, k);
    let angle = rng.random_range(-TAU..TAU);
    match rng.random_range(0..7) {
        0 => GateKind::XPair(pair),
        1 => GateKind::ZLevel(rng.random_range(0..d)),
        2 => GateKind::HPair(pair),
        3 => {
            let mut p: Vec<usize> = (0..d).collect();
            p.shuffle(rng);
            GateKind::Perm(p)
        }
        4 => GateKind::Rot {
            axis: [Axis::X, Axis::Y, Axis::Z][rng.random_range(0..3)],
            pair,
            theta: angle,
        },
        5 => GateKind::LevelPhase {
            level: rng.random_range(0..d),
            phi: angle,
        },
        _ => GateKind::GlobalPhase(angle),
    }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| Error::parse(line, format!("bad {what} {tok:?}")))
}

fn parse_pair(toks: &[&str], line: usize) -> Result<SubspacePair> {
    let j = parse_num(toks.first(), line, "level")?;
    let k = parse_num(toks.get(1), line, "level")?;
    SubspacePair::new(j, k).map_err(|e| Error::BadSubspace(format!("line {line}: {e}")))
}

fn expect_len(toks: &[&str], n: usize, line: usize, what: &str) -> Result<()> {
    if toks.len() != n {
        return Err(Error::parse(
            line,
            format!("{what} takes {n} arguments, found {}", toks.len()),
        ));
    }
    Ok(())
}

fn parse_one_qudit(toks: &[&str], line: usize) -> Result<GateKind> {
    let (&name, args) = toks
        .split_first()
        .ok_or_else(|| Error::parse(line, "missing gate name"))?;
    match name {
        "x" | "h" => {
            expect_len(args, 2, line, name)?;
            let p = parse_pair(args, line)?;
            Ok(if name == "x" {
                GateKind::XPair(p)
            } else {
                GateKind::HPair(p)
            })
        }
        "z" => {
            expect_len(args, 1, line, name)?;
            Ok(GateKind::ZLevel(parse_num(args.first(), line, "level")?))
        }
        "perm" => {
            if args.is_empty() {
                return Err(Error::parse(line, "perm needs a permutation"));
            }
            let p = args
                .iter()
                .map(|t| parse_num(Some(t), line, "permutation entry"))
                .collect::<Result<Vec<usize>>>()?;
            Ok(GateKind::Perm(p))
        }
        "rot" => {
            expect_len(args, 4, line, name)?;
            let axis = match args[0] {
                "x" => Axis::X,
                "y" => Axis::Y,
                "z" => Axis::Z,
                other => return Err(Error::parse(line, format!("bad axis {other:?}"))),
            };
            let pair = parse_pair(&args[1..3], line)?;
            let theta = parse_num(args.get(3), line, "angle")?;
            Ok(GateKind::Rot { axis, pair, theta })
        }
        "lphase" => {
            expect_len(args, 2, line, name)?;
            Ok(GateKind::LevelPhase {
                level: parse_num(args.first(), line, "level")?,
                phi: parse_num(args.get(1), line, "angle")?,
            })
        }
        other => Err(Error::parse(line, format!("unknown gate {other:?}"))),
    }
}

fn split_wire<'a>(toks: &[&'a str], line: usize) -> Result<(usize, Vec<&'a str>)> {
    let (last, rest) = toks.split_last().ok_or_else(|| Error::parse(line, "empty gate line"))?;
    let w = last
        .strip_prefix('@')
        .ok_or_else(|| Error::parse(line, "gate line must end with @<wire>"))?;
    let w = w
        .parse()
        .map_err(|_| Error::parse(line, format!("bad wire {last:?}")))?;
    Ok((w, rest.to_vec()))
}

/// Parses the line-oriented circuit format (`dim`, `wires`, then one gate
/// per line; `#` starts a comment).
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut d: Option<usize> = None;
    let mut width: Option<usize> = None;
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "dim" | "wires" => {
                if circuit.is_some() {
                    return Err(Error::parse(line, "header after the first gate"));
                }
                expect_len(&toks[1..], 1, line, toks[0])?;
                let v: usize = parse_num(toks.get(1), line, toks[0])?;
                let slot = if toks[0] == "dim" { &mut d } else { &mut width };
                if slot.replace(v).is_some() {
                    return Err(Error::parse(line, format!("duplicate {} header", toks[0])));
                }
                continue;
            }
            _ => {}
        }
        if circuit.is_none() {
            let (Some(d), Some(width)) = (d, width) else {
                return Err(Error::parse(line, "gate before `dim` and `wires` headers"));
            };
            circuit = Some(Circuit::new(d, width).map_err(|e| Error::parse(line, e.to_string()))?);
        }
        let c = circuit.as_mut().unwrap();
        let gate = match toks[0] {
            "gphase" => {
                expect_len(&toks[1..], 1, line, "gphase")?;
                CircuitGate::global_phase(parse_num(toks.get(1), line, "angle")?)
            }
            "ctrl" => {
                let (tw, rest) = split_wire(&toks[1..], line)?;
                let cw = parse_num(rest.first(), line, "control wire")?;
                let cv = parse_num(rest.get(1), line, "control value")?;
                let op = parse_one_qudit(&rest[2.min(rest.len())..], line)?;
                CircuitGate::controlled(cw, cv, op, tw)
            }
            _ => {
                let (w, rest) = split_wire(&toks, line)?;
                CircuitGate::single(parse_one_qudit(&rest, line)?, w)
            }
        };
        c.push(gate).map_err(|e| match e {
            Error::BadSubspace(m) => Error::BadSubspace(format!("line {line}: {m}")),
            Error::BadWire(m) => Error::BadWire(format!("line {line}: {m}")),
            other => other,
        })?;
    }
    match circuit {
        Some(c) => Ok(c),
        None => {
            let (Some(d), Some(width)) = (d, width) else {
                return Err(Error::parse(
                    text.lines().count().max(1),
                    "missing `dim` or `wires` header",
                ));
            };
            Circuit::new(d, width)
        }
    }
}

fn emit_one_qudit(op: &GateKind) -> String {
    match op {
        GateKind::XPair(p) => format!("x {} {}", p.j(), p.k()),
        GateKind::HPair(p) => format!("h {} {}", p.j(), p.k()),
        GateKind::ZLevel(n) => format!("z {n}"),
        GateKind::Perm(p) => {
            let s: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            format!("perm {}", s.join(" "))
        }
        GateKind::Rot { axis, pair, theta } => {
            format!("rot {} {} {} {}", axis.letter(), pair.j(), pair.k(), theta)
        }
        GateKind::LevelPhase { level, phi } => format!("lphase {level} {phi}"),
        GateKind::GlobalPhase(a) => format!("gphase {a}"),
    }
}

pub fn emit_circuit(c: &Circuit) -> String {
    let mut s = format!("dim {}\nwires {}\n", c.d, c.width);
    for g in &c.gates {
        let line = match (&g.op, g.control) {
            (GateKind::GlobalPhase(_), _) => emit_one_qudit(&g.op),
            (op, None) => format!("{} @{}", emit_one_qudit(op), g.target),
            (op, Some(ctl)) => format!("ctrl {} {} {} @{}", ctl.wire, ctl.value, emit_one_qudit(op), g.target),
        };
        let _ = writeln!(s, "{line}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn x(j: usize, k: usize) -> GateKind {
        GateKind::x(j, k).unwrap()
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(3, 2).unwrap();
        assert_eq!(circuit_unitary(&c).unwrap(), ComplexMatrix::identity(9));
        assert_eq!(gate_counts(&c), GateCounts::default());
    }

    #[test]
    fn single_tcx_matches_controlled_gate() {
        let c = Circuit::with_gates(3, 2, [CircuitGate::controlled(0, 2, x(0, 1), 1)]).unwrap();
        let want = controlled_gate(3, ControlSpec::new(2), &x(0, 1)).unwrap();
        assert_eq!(circuit_unitary(&c).unwrap(), want);
    }

    #[test]
    fn inverted_wires_use_permutation() {
        // Control on wire 1, target on wire 0: conjugate by the wire swap.
        let c = Circuit::with_gates(3, 2, [CircuitGate::controlled(1, 0, x(1, 2), 0)]).unwrap();
        let u = circuit_unitary(&c).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let input = digits_to_index(&[a, b], 3);
                let a2 = if b == 0 { [0, 2, 1][a] } else { a };
                let out = digits_to_index(&[a2, b], 3);
                assert_eq!(u[(out, input)], ONE);
            }
        }
    }

    #[test]
    fn validation_errors() {
        let mut c = Circuit::new(3, 2).unwrap();
        assert_eq!(c.push(CircuitGate::single(x(0, 1), 2)).unwrap_err().code(), "BadWire");
        assert_eq!(
            c.push(CircuitGate::controlled(1, 0, x(0, 1), 1)).unwrap_err().code(),
            "BadWire"
        );
        assert_eq!(
            c.push(CircuitGate::controlled(0, 3, x(0, 1), 1)).unwrap_err().code(),
            "BadWire"
        );
        assert_eq!(
            c.push(CircuitGate::single(GateKind::ZLevel(4), 0)).unwrap_err().code(),
            "BadSubspace"
        );
        let bad_phase = CircuitGate {
            control: Some(Control { wire: 0, value: 0 }),
            ..CircuitGate::global_phase(1.0)
        };
        assert!(c.push(bad_phase).is_err());
    }

    #[test]
    fn apply_basis_examples() {
        let c = Circuit::new(3, 2).unwrap();
        let s = StateVector::from_ket(3, "|12⟩").unwrap();
        assert_eq!(apply(&c, &s).unwrap(), s);

        // A circuit adding the control into the target modulo 3.
        let sum = Circuit::with_gates(
            3,
            2,
            [
                CircuitGate::controlled(0, 1, x(1, 2), 1),
                CircuitGate::controlled(0, 1, x(0, 1), 1),
                CircuitGate::controlled(0, 2, x(0, 1), 1),
                CircuitGate::controlled(0, 2, x(1, 2), 1),
            ],
        )
        .unwrap();
        let out = apply(&sum, &StateVector::from_ket(3, "|22>").unwrap()).unwrap();
        assert_eq!(out, StateVector::from_ket(3, "|21>").unwrap());
    }

    #[test]
    fn apply_dimension_mismatch() {
        let c = Circuit::new(3, 2).unwrap();
        let s = StateVector::from_ket(3, "|120>").unwrap();
        assert_eq!(apply(&c, &s).unwrap_err().code(), "DimMismatch");
    }

    #[test]
    fn ket_parsing() {
        assert!(StateVector::from_ket(3, "|13⟩").is_err());
        assert!(StateVector::from_ket(3, "|1a⟩").is_err());
        let s = StateVector::from_ket(3, "01").unwrap();
        assert_eq!(s.amplitudes()[1], ONE);
        assert_eq!(s.ket_label(5), "|12⟩");
    }

    #[test]
    fn counts_breakdown() {
        let c = Circuit::with_gates(
            3,
            2,
            [
                CircuitGate::global_phase(0.3),
                CircuitGate::single(GateKind::rot(Axis::Y, 0, 1, 0.2).unwrap(), 0),
                CircuitGate::single(GateKind::h(0, 1).unwrap(), 1),
                CircuitGate::controlled(0, 1, x(0, 1), 1),
                CircuitGate::controlled(1, 2, GateKind::ZLevel(0), 0),
            ],
        )
        .unwrap();
        let n = gate_counts(&c);
        assert_eq!((n.two_qudit, n.one_qudit, n.rotations), (2, 2, 1));
        assert_eq!(n.by_kind["ctrl-x"], 1);
        assert_eq!(n.by_kind["ctrl-z"], 1);
        assert_eq!(n.by_kind["gphase"], 1);
    }

    #[test]
    fn parse_grammar_cases() {
        let c = parse_circuit("dim 3\nwires 2\nctrl 0 2 x 0 1 @1").unwrap();
        assert_eq!(c.gates(), &[CircuitGate::controlled(0, 2, x(0, 1), 1)]);

        let c = parse_circuit("dim 3\nwires 1\nrot y 0 1 1.5707963 @0").unwrap();
        match &c.gates()[0].op {
            GateKind::Rot {
                axis: Axis::Y,
                pair,
                theta,
            } => {
                assert_eq!((pair.j(), pair.k()), (0, 1));
                assert!((theta - FRAC_PI_2).abs() < 1e-7);
            }
            other => panic!("unexpected {other:?}"),
        }

        let text = "# comment\ndim 3\nwires 2\n\nperm 1 2 0 @0 # trailing\nlphase 2 -1e-3 @1\ngphase 0.5\nh 0 2 @1\nz 2 @0\nctrl 1 0 rot z 1 2 0.25 @0\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(parse_circuit(&emit_circuit(&c)).unwrap(), c);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_circuit("dim 3\nwires 2\nx 0 1 @0\nfoo 1 @0\n").unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 4,
                msg: "unknown gate \"foo\"".into()
            }
        );
        let e = parse_circuit("dim 3\nx 0 1 @0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_circuit("dim 3\nwires 2\nx 0 1 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = parse_circuit("dim 3\nwires 2\nx 0 1 @5\n").unwrap_err();
        assert_eq!(e.code(), "BadWire");
        let e = parse_circuit("dim 3\nwires 2\nctrl 0 1 x 0 1 @0\n").unwrap_err();
        assert_eq!(e.code(), "BadWire");
        let e = parse_circuit("dim 3\nwires 2\nx 1 3 @0\n").unwrap_err();
        assert_eq!(e.code(), "BadSubspace");
        assert!(parse_circuit("dim 3\n").is_err());
    }

    #[test]
    fn concatenation_is_multiplicative() {
        let a = Circuit::with_gates(3, 2, [CircuitGate::single(GateKind::h(0, 2).unwrap(), 0)]).unwrap();
        let b = Circuit::with_gates(3, 2, [CircuitGate::controlled(0, 0, x(1, 2), 1)]).unwrap();
        let joined = circuit_unitary(&a.concat(&b).unwrap()).unwrap();
        let prod = &circuit_unitary(&b).unwrap() * &circuit_unitary(&a).unwrap();
        assert!(joined.max_abs_diff(&prod).unwrap() < 1e-12);
    }
}
