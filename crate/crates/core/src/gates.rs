//! Named one-qudit gates and their single-control extensions.
//!
//! Level superscripts follow the usual two-level convention: a gate on the
//! subspace pair `(j, k)` acts as the corresponding qubit gate on the
//! basis `|j>, |k>` and as the identity on every other level.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{cis, ComplexMatrix, C64, I, ONE, ZERO};

/// Two distinct levels `j < k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubspacePair {
    j: usize,
    k: usize,
}

impl SubspacePair {
    pub fn new(j: usize, k: usize) -> Result<Self> {
        if j >= k {
            return Err(Error::BadSubspace(format!("pair ({j},{k}) needs j < k")));
        }
        Ok(SubspacePair { j, k })
    }

    pub(crate) const fn raw(j: usize, k: usize) -> Self {
        SubspacePair { j, k }
    }

    /// Orders the two levels; fails only if they coincide.
    pub fn unordered(a: usize, b: usize) -> Result<Self> {
        Self::new(a.min(b), a.max(b))
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn check(&self, d: usize) -> Result<()> {
        if self.k >= d {
            return Err(Error::BadSubspace(format!(
                "pair ({},{}) out of range for d={d}",
                self.j, self.k
            )));
        }
        Ok(())
    }

    pub fn contains(&self, level: usize) -> bool {
        self.j == level || self.k == level
    }
}

impl fmt::Display for SubspacePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn letter(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// A symbolic one-qudit gate.
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    /// `X^(jk)`: swaps levels `j` and `k`.
    XPair(SubspacePair),
    /// `Z^[n]`: flips the sign of level `n`.
    ZLevel(usize),
    /// Hadamard on the pair `(j, k)`.
    HPair(SubspacePair),
    /// Level permutation sending `|i>` to `|p[i]>`.
    Perm(Vec<usize>),
    /// `exp(-i theta sigma_axis^(jk) / 2)`.
    Rot { axis: Axis, pair: SubspacePair, theta: f64 },
    /// Multiplies level `level` by `e^{i phi}`.
    LevelPhase { level: usize, phi: f64 },
    /// `e^{i alpha} I`.
    GlobalPhase(f64),
}

impl GateKind {
    pub fn x(j: usize, k: usize) -> Result<Self> {
        Ok(GateKind::XPair(SubspacePair::new(j, k)?))
    }

    pub fn h(j: usize, k: usize) -> Result<Self> {
        Ok(GateKind::HPair(SubspacePair::new(j, k)?))
    }

    pub fn rot(axis: Axis, j: usize, k: usize, theta: f64) -> Result<Self> {
        Ok(GateKind::Rot {
            axis,
            pair: SubspacePair::new(j, k)?,
            theta,
        })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if d < 2 {
            return Err(Error::BadDimension(format!("qudit dimension {d} < 2")));
        }
        let level = |n: usize| {
            if n < d {
                Ok(())
            } else {
                Err(Error::BadSubspace(format!("level {n} out of range for d={d}")))
            }
        };
        match self {
            GateKind::XPair(p) | GateKind::HPair(p) => p.check(d),
            GateKind::Rot { pair, .. } => pair.check(d),
            GateKind::ZLevel(n) => level(*n),
            GateKind::LevelPhase { level: n, .. } => level(*n),
            GateKind::Perm(p) => {
                if p.len() != d {
                    return Err(Error::BadSubspace(format!(
                        "permutation has {} entries, expected {d}",
                        p.len()
                    )));
                }
                let mut seen = vec![false; d];
                for &v in p {
                    if v >= d || std::mem::replace(&mut seen[v], true) {
                        return Err(Error::BadSubspace(format!("{p:?} is not a permutation of 0..{d}")));
                    }
                }
                Ok(())
            }
            GateKind::GlobalPhase(_) => Ok(()),
        }
    }

    pub fn matrix(&self, d: usize) -> Result<ComplexMatrix> {
        gate_matrix(d, self)
    }

    /// The gate whose matrix is the adjoint of this one.
    pub fn inverse(&self) -> GateKind {
        match self {
            GateKind::XPair(_) | GateKind::ZLevel(_) | GateKind::HPair(_) => self.clone(),
            GateKind::Perm(p) => {
                let mut inv = vec![0; p.len()];
                for (i, &v) in p.iter().enumerate() {
                    inv[v] = i;
                }
                GateKind::Perm(inv)
            }
            GateKind::Rot { axis, pair, theta } => GateKind::Rot {
                axis: *axis,
                pair: *pair,
                theta: -theta,
            },
            GateKind::LevelPhase { level, phi } => GateKind::LevelPhase {
                level: *level,
                phi: -phi,
            },
            GateKind::GlobalPhase(a) => GateKind::GlobalPhase(-a),
        }
    }

    /// Short name used in gate-count breakdowns and the circuit text format.
    pub fn mnemonic(&self) -> &'static str {
        match self {
            GateKind::XPair(_) => "x",
            GateKind::ZLevel(_) => "z",
            GateKind::HPair(_) => "h",
            GateKind::Perm(_) => "perm",
            GateKind::Rot { .. } => "rot",
            GateKind::LevelPhase { .. } => "lphase",
            GateKind::GlobalPhase(_) => "gphase",
        }
    }
}

fn block_gate(d: usize, pair: SubspacePair, block: [[C64; 2]; 2]) -> ComplexMatrix {
    let b = ComplexMatrix::from_fn(2, |r, c| block[r][c]);
    ComplexMatrix::embed(&b, &[pair.j, pair.k], d)
}

/// The `d`x`d` matrix of a one-qudit gate.
pub fn gate_matrix(d: usize, g: &GateKind) -> Result<ComplexMatrix> {
    g.validate(d)?;
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    Ok(match g {
        GateKind::XPair(p) => block_gate(d, *p, [[ZERO, ONE], [ONE, ZERO]]),
        GateKind::HPair(p) => block_gate(d, *p, [[s, s], [s, -s]]),
        GateKind::ZLevel(n) => {
            let mut m = ComplexMatrix::identity(d);
            m[(*n, *n)] = -ONE;
            m
        }
        GateKind::Perm(p) => {
            let mut m = ComplexMatrix::zeros(d);
            for (i, &pi) in p.iter().enumerate() {
                m[(pi, i)] = ONE;
            }
            m
        }
        GateKind::Rot { axis, pair, theta } => {
            let (c, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            let c = C64::new(c, 0.0);
            let block = match axis {
                Axis::X => [[c, -I * sn], [-I * sn, c]],
                Axis::Y => [[c, C64::new(-sn, 0.0)], [C64::new(sn, 0.0), c]],
                Axis::Z => [[cis(-theta / 2.0), ZERO], [ZERO, cis(theta / 2.0)]],
            };
            block_gate(d, *pair, block)
        }
        GateKind::LevelPhase { level, phi } => {
            let mut m = ComplexMatrix::identity(d);
            m[(*level, *level)] = cis(*phi);
            m
        }
        GateKind::GlobalPhase(a) => ComplexMatrix::identity(d).scale(cis(*a)),
    })
}

/// The six level permutations of a qutrit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShiftGate {
    Id,
    Plus1,
    Plus2,
    Swap01,
    Swap02,
    Swap12,
}

impl ShiftGate {
    pub const ALL: [ShiftGate; 6] = [
        ShiftGate::Id,
        ShiftGate::Plus1,
        ShiftGate::Plus2,
        ShiftGate::Swap01,
        ShiftGate::Swap02,
        ShiftGate::Swap12,
    ];

    /// `perm()[i]` is the image of level `i`.
    pub fn perm(self) -> [usize; 3] {
        match self {
            ShiftGate::Id => [0, 1, 2],
            ShiftGate::Plus1 => [1, 2, 0],
            ShiftGate::Plus2 => [2, 0, 1],
            ShiftGate::Swap01 => [1, 0, 2],
            ShiftGate::Swap02 => [2, 1, 0],
            ShiftGate::Swap12 => [0, 2, 1],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ShiftGate::Id => "id",
            ShiftGate::Plus1 => "plus1",
            ShiftGate::Plus2 => "plus2",
            ShiftGate::Swap01 => "swap01",
            ShiftGate::Swap02 => "swap02",
            ShiftGate::Swap12 => "swap12",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn kind(self) -> GateKind {
        GateKind::Perm(self.perm().to_vec())
    }
}

pub fn shift_gate(s: ShiftGate) -> ComplexMatrix {
    gate_matrix(3, &s.kind()).expect("qutrit permutation is valid")
}

/// Control condition of a two-qudit controlled gate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ControlSpec {
    pub value: usize,
}

impl ControlSpec {
    pub fn new(value: usize) -> Self {
        ControlSpec { value }
    }
}

/// `sum_{a != n} |a><a| (x) I + |n><n| (x) G` on (control, target), with the
/// control as the more significant factor.
///
/// At `d = 3` this is TCX for an `XPair` target and TCZ for a `ZLevel`
/// target; for other `d` it is GCX/GCZ.
pub fn controlled_gate(d: usize, ctrl: ControlSpec, target_op: &GateKind) -> Result<ComplexMatrix> {
    if matches!(target_op, GateKind::GlobalPhase(_)) {
        return Err(Error::BadSubspace("a global phase cannot be controlled".into()));
    }
    if ctrl.value >= d {
        return Err(Error::BadSubspace(format!(
            "control value {} out of range for d={d}",
            ctrl.value
        )));
    }
    let g = gate_matrix(d, target_op)?;
    let mut m = ComplexMatrix::identity(d * d);
    let base = ctrl.value * d;
    for r in 0..d {
        for c in 0..d {
            m[(base + r, base + c)] = g[(r, c)];
        }
    }
    Ok(m)
}

/// `diag(1, ..., 1, e^{i phi})` on two qutrits.
pub fn ms_phase_gate(phi: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::identity(9);
    m[(8, 8)] = cis(phi);
    m
}
