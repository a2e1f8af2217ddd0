//! Compilation of one-qudit unitaries into two-level rotations.
//!
//! Every routine first strips a global phase so the remaining work happens
//! in `SU(d)`, then factors the matrix into rotations that each touch only
//! two levels. Output circuits are single-wire and contain only `Rot`
//! gates plus an optional leading `GlobalPhase`.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::{Matrix3, SymmetricEigen};

use crate::circuit::{circuit_unitary, Circuit, CircuitGate};
use crate::error::{Error, Result};
use crate::gates::{gate_matrix, Axis, GateKind, SubspacePair};
use crate::numerics::{cis, ComplexMatrix, C64, ONE, UNITARY_TOL, ZERO};

/// Hard residual limit for one-qutrit templates.
pub const QUTRIT_RESIDUAL_LIMIT: f64 = 1e-9;
/// Hard residual limit for the recursive qudit decomposition.
pub const QUDIT_RESIDUAL_LIMIT: f64 = 1e-8;
/// Largest dimension accepted by [`decompose_qudit`].
pub const MAX_QUDIT_DIM: usize = 6;

const EULER_RESIDUAL_LIMIT: f64 = 1e-9;
const DEGENERATE_EPS: f64 = 1e-12;
const CSD_EPS: f64 = 1e-14;
const PRUNE_EPS: f64 = 1e-15;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EulerMode {
    #[default]
    Zyz,
    Xyx,
}

impl EulerMode {
    pub fn outer_axis(self) -> Axis {
        match self {
            EulerMode::Zyz => Axis::Z,
            EulerMode::Xyx => Axis::X,
        }
    }
}

/// `U = e^{i alpha} R_a(phi1) R_y(theta) R_a(phi2)` on `subspace`, with
/// `a = z` or `x` depending on `mode`.
#[derive(Clone, Debug, PartialEq)]
pub struct EulerAngles {
    pub mode: EulerMode,
    pub subspace: SubspacePair,
    pub phi1: f64,
    pub theta: f64,
    pub phi2: f64,
    pub alpha: f64,
}

impl EulerAngles {
    /// The three rotations in time order (`phi2` first).
    pub fn rotations(&self) -> [GateKind; 3] {
        let a = self.mode.outer_axis();
        let rot = |axis, theta| GateKind::Rot {
            axis,
            pair: self.subspace,
            theta,
        };
        [rot(a, self.phi2), rot(Axis::Y, self.theta), rot(a, self.phi1)]
    }

    /// Reconstruction; the phase `alpha` multiplies only the two levels of
    /// the subspace.
    pub fn matrix(&self, d: usize) -> Result<ComplexMatrix> {
        let mut m = ComplexMatrix::identity(d);
        for g in self.rotations() {
            m = gate_matrix(d, &g)?.mat_mul(&m)?;
        }
        let ph = cis(self.alpha);
        for l in [self.subspace.j(), self.subspace.k()] {
            for c in 0..d {
                m[(l, c)] *= ph;
            }
        }
        Ok(m)
    }
}

/// Factors of a `(d-1, 1)` split `M = K1 * A * K2`.
///
/// `K1 = diag(U, 1)`, `A = R_y^(d-2,d-1)(beta)` and
/// `K2 = diag(W, e^{i psi})` with `U`, `W` unitary of size `d - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanFactors {
    pub k1: ComplexMatrix,
    pub a: ComplexMatrix,
    pub k2: ComplexMatrix,
    pub beta: f64,
    pub psi: f64,
    pub residual: f64,
}

impl CartanFactors {
    /// Block sizes of the partition.
    pub fn partition(&self) -> (usize, usize) {
        (self.k1.dim() - 1, 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Template {
    /// Eight rotations `y01 y02 y01 z01 z02 y01 y02 y01`: a real orthogonal
    /// factor, a diagonal core and a second real orthogonal factor.
    EightRotation,
    /// Three `SU(2)` factors: outer pair, core pair, outer pair.
    ThreeFactor,
    QuditRecursive,
}

impl Template {
    pub fn label(self) -> &'static str {
        match self {
            Template::EightRotation => "eight-rotation",
            Template::ThreeFactor => "three-factor",
            Template::QuditRecursive => "qudit-recursive",
        }
    }
}

/// Options for the three-factor qutrit template.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QutritOptions {
    pub mode: EulerMode,
    /// Pair used by the first and last factors.
    pub outer: SubspacePair,
    /// Pair used by the middle factor; must share exactly one level with `outer`.
    pub core: SubspacePair,
}

impl Default for QutritOptions {
    fn default() -> Self {
        QutritOptions {
            mode: EulerMode::Zyz,
            outer: SubspacePair::raw(0, 1),
            core: SubspacePair::raw(0, 2),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionResult {
    pub circuit: Circuit,
    pub template: Template,
    pub residual: f64,
    /// The pair family the template draws from.
    pub subspaces_used: BTreeSet<SubspacePair>,
    pub global_phase: f64,
}

impl DecompositionResult {
    pub fn rotation_count(&self) -> usize {
        self.circuit
            .gates()
            .iter()
            .filter(|g| matches!(g.op, GateKind::Rot { .. }))
            .count()
    }
}

/// Wraps into `(-2pi, 2pi]`; rotations have period `4pi`.
pub fn wrap_rotation_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * TAU);
    if t > TAU {
        t -= 2.0 * TAU;
    } else if t <= -TAU {
        t += 2.0 * TAU;
    }
    t
}

fn wrap_pi(x: f64) -> f64 {
    let mut t = x % TAU;
    if t > PI {
        t -= TAU;
    } else if t <= -PI {
        t += TAU;
    }
    t
}

fn check_unitary(m: &ComplexMatrix) -> Result<()> {
    let deviation = m.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

type Block2 = [[C64; 2]; 2];

fn mul2(a: &Block2, b: &Block2) -> Block2 {
    let mut r = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

fn dagger2(a: &Block2) -> Block2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// ZYZ angles `(alpha, phi1, theta, phi2)` of a 2x2 unitary.
fn zyz(b: &Block2) -> (f64, f64, f64, f64) {
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let alpha = det.arg() / 2.0;
    let ph = cis(-alpha);
    // Average the redundant entries of the SU(2) form [[p, -q*], [q, p*]].
    let p = (ph * b[0][0] + (ph * b[1][1]).conj()) * 0.5;
    let q = (ph * b[1][0] - (ph * b[0][1]).conj()) * 0.5;
    let (phi1, theta, phi2) = if q.norm() < DEGENERATE_EPS {
        (-2.0 * p.arg(), 0.0, 0.0)
    } else if p.norm() < DEGENERATE_EPS {
        (2.0 * q.arg(), PI, 0.0)
    } else {
        (q.arg() - p.arg(), 2.0 * q.norm().atan2(p.norm()), -p.arg() - q.arg())
    };
    (alpha, wrap_rotation_angle(phi1), theta, wrap_rotation_angle(phi2))
}

/// Euler-decomposes a unitary that acts only on the levels of `pair`.
pub fn euler_decompose(u: &ComplexMatrix, pair: SubspacePair, mode: EulerMode) -> Result<EulerAngles> {
    let d = u.dim();
    pair.check(d)?;
    let (j, k) = (pair.j(), pair.k());
    let mut deviation: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            if pair.contains(r) && pair.contains(c) {
                continue;
            }
            let ideal = if r == c { ONE } else { ZERO };
            deviation = deviation.max((u[(r, c)] - ideal).norm());
        }
    }
    if deviation > UNITARY_TOL {
        return Err(Error::NotSubspaceConfined { j, k, deviation });
    }
    let block: Block2 = [[u[(j, j)], u[(j, k)]], [u[(k, j)], u[(k, k)]]];
    let b = ComplexMatrix::from_rows(vec![block[0].to_vec(), block[1].to_vec()])?;
    check_unitary(&b)?;

    let zb = match mode {
        EulerMode::Zyz => block,
        EulerMode::Xyx => {
            // R_x = Q R_z Q^dagger with Q = R_y(pi/2).
            let c = C64::new(FRAC_1_SQRT_2, 0.0);
            let s = c;
            let q: Block2 = [[c, -s], [s, c]];
            mul2(&dagger2(&q), &mul2(&block, &q))
        }
    };
    let (alpha, phi1, theta, phi2) = zyz(&zb);
    let angles = EulerAngles {
        mode,
        subspace: pair,
        phi1,
        theta,
        phi2,
        alpha,
    };
    let residual = angles.matrix(d)?.max_abs_diff(u)?;
    if residual > EULER_RESIDUAL_LIMIT {
        return Err(Error::ReconstructionFailed {
            residual,
            limit: EULER_RESIDUAL_LIMIT,
        });
    }
    Ok(angles)
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// A unitary whose last column is the unit vector `v` (Householder reflector
/// followed by a phase on the last column).
fn unitary_with_last_column(v: &[C64]) -> ComplexMatrix {
    let n = v.len();
    let last = v[n - 1];
    let phase = if last.norm() > 0.0 { last / last.norm() } else { ONE };
    let mut w: Vec<C64> = v.iter().map(|x| -x).collect();
    w[n - 1] += phase;
    let ww: f64 = w.iter().map(|x| x.norm_sqr()).sum();
    let mut h = ComplexMatrix::identity(n);
    if ww > 1e-30 {
        for r in 0..n {
            for c in 0..n {
                h[(r, c)] -= w[r] * w[c].conj() * (2.0 / ww);
            }
        }
    }
    for r in 0..n {
        h[(r, n - 1)] *= phase;
    }
    h
}

struct CsdParts {
    u: ComplexMatrix,
    w: ComplexMatrix,
    beta: f64,
    psi: f64,
}

fn csd_parts(m: &ComplexMatrix) -> CsdParts {
    let d = m.dim();
    let n = d - 1;
    let e = m[(n, n)];
    let c: Vec<C64> = (0..n).map(|j| m[(n, j)]).collect();
    let s = vec_norm(&c);
    let top = m.principal_block(0, n);

    let (mut u, mut w, beta, psi) = if s < CSD_EPS {
        (top, ComplexMatrix::identity(n), 0.0, e.arg())
    } else {
        let v: Vec<C64> = c.iter().map(|x| x.conj() / s).collect();
        let vm = unitary_with_last_column(&v);
        let mut u = &top * &vm;
        let av: Vec<C64> = (0..n).map(|r| u[(r, n - 1)]).collect();
        let sigma = vec_norm(&av);
        let b: Vec<C64> = (0..n).map(|r| m[(r, n)]).collect();
        let last: Vec<C64> = if sigma >= s {
            av.iter().map(|x| x / sigma).collect()
        } else {
            let bn = vec_norm(&b);
            let mut col: Vec<C64> = b.iter().map(|x| x / bn).collect();
            let t: C64 = col.iter().zip(&av).map(|(x, y)| x.conj() * y).sum();
            if t.norm() > 0.0 {
                let ph = t / t.norm();
                col.iter_mut().for_each(|x| *x *= ph);
            }
            col
        };
        for r in 0..n {
            u[(r, n - 1)] = last[r];
        }
        let x: C64 = last.iter().zip(&b).map(|(x, y)| x.conj() * y).sum();
        let psi = (-x).arg();
        (u, vm.dagger(), 2.0 * s.atan2(sigma), psi)
    };

    // Gauge: positive-real diagonal on the columns of U that commute past A.
    for j in 0..n.saturating_sub(1) {
        let z = u[(j, j)];
        if z.norm() > DEGENERATE_EPS {
            let ph = z / z.norm();
            for r in 0..n {
                u[(r, j)] *= ph.conj();
            }
            for c in 0..n {
                w[(j, c)] *= ph;
            }
        }
    }
    CsdParts { u, w, beta, psi }
}

fn core_rotation(d: usize, beta: f64) -> ComplexMatrix {
    let pair = SubspacePair::raw(d - 2, d - 1);
    gate_matrix(
        d,
        &GateKind::Rot {
            axis: Axis::Y,
            pair,
            theta: beta,
        },
    )
    .expect("core pair is in range")
}

fn pad_with(block: &ComplexMatrix, corner: C64) -> ComplexMatrix {
    let n = block.dim();
    let levels: Vec<usize> = (0..n).collect();
    let mut m = ComplexMatrix::embed(block, &levels, n + 1);
    m[(n, n)] = corner;
    m
}

/// Splits `M` along the `(d-1, 1)` partition with a single `R_y` core on
/// the last two levels.
pub fn cartan_csd_2_1(m: &ComplexMatrix) -> Result<CartanFactors> {
    let d = m.dim();
    if d < 2 {
        return Err(Error::BadDimension(format!("split needs d >= 2, got {d}")));
    }
    check_unitary(m)?;
    let parts = csd_parts(m);
    let k1 = pad_with(&parts.u, ONE);
    let a = core_rotation(d, parts.beta);
    let k2 = pad_with(&parts.w, cis(parts.psi));
    let residual = (&(&k1 * &a) * &k2).max_abs_diff(m)?;
    if residual > QUTRIT_RESIDUAL_LIMIT {
        return Err(Error::ReconstructionFailed {
            residual,
            limit: QUTRIT_RESIDUAL_LIMIT,
        });
    }
    Ok(CartanFactors {
        k1,
        a,
        k2,
        beta: parts.beta,
        psi: parts.psi,
        residual,
    })
}

/// `M = diag(U_s, 1) * C * diag(W_s, 1)` with all three factors special
/// unitary and `C` confined to the last two levels.
fn su_split(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let d = m.dim();
    let n = d - 1;
    let CsdParts {
        mut u,
        mut w,
        beta,
        psi,
    } = csd_parts(m);
    let du = u.determinant();
    let dw = w.determinant();
    for r in 0..n {
        u[(r, n - 1)] *= du.conj();
    }
    for c in 0..n {
        w[(n - 1, c)] *= dw.conj();
    }
    let left = ComplexMatrix::from_diag(&[du, ONE]);
    let right = ComplexMatrix::from_diag(&[dw, cis(psi)]);
    let (cb, sb) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let ry = ComplexMatrix::from_real(&[&[cb, -sb], &[sb, cb]]);
    let c2 = &(&left * &ry) * &right;
    let core = ComplexMatrix::embed(&c2, &[n - 1, n], d);
    (u, core, w)
}

fn permutation_matrix(sigma: &[usize]) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(sigma.len());
    for (i, &t) in sigma.iter().enumerate() {
        p[(t, i)] = ONE;
    }
    p
}

/// Three Euler factors (time order) of a special unitary qutrit matrix.
fn three_factor(
    m: &ComplexMatrix,
    outer: SubspacePair,
    core: SubspacePair,
    mode: EulerMode,
) -> Result<[EulerAngles; 3]> {
    let shared: Vec<usize> = [outer.j(), outer.k()]
        .into_iter()
        .filter(|&l| core.contains(l))
        .collect();
    if outer == core || shared.len() != 1 {
        return Err(Error::BadSubspace(format!(
            "pairs {outer} and {core} must share exactly one level"
        )));
    }
    outer.check(3)?;
    core.check(3)?;
    let s = shared[0];
    let o = if outer.j() == s { outer.k() } else { outer.j() };
    let t = if core.j() == s { core.k() } else { core.j() };
    // Frame where outer = (0, 1) and core = (1, 2).
    let mut sigma = [0usize; 3];
    sigma[o] = 0;
    sigma[s] = 1;
    sigma[t] = 2;
    let p = permutation_matrix(&sigma);
    let pd = p.dagger();
    let framed = &(&p * m) * &pd;
    let (u, c, w) = su_split(&framed);
    let back = |x: &ComplexMatrix| &(&pd * x) * &p;
    let k1 = back(&ComplexMatrix::embed(&u, &[0, 1], 3));
    let k2 = back(&ComplexMatrix::embed(&w, &[0, 1], 3));
    let cc = back(&c);
    Ok([
        euler_decompose(&k2, outer, mode)?,
        euler_decompose(&cc, core, mode)?,
        euler_decompose(&k1, outer, mode)?,
    ])
}

/// Euler records in time order for a special unitary of any size >= 2.
fn su_factors(m: &ComplexMatrix, mode: EulerMode, out: &mut Vec<EulerAngles>) -> Result<()> {
    let d = m.dim();
    match d {
        2 => out.push(euler_decompose(m, SubspacePair::raw(0, 1), mode)?),
        3 => {
            let o = QutritOptions::default();
            out.extend(three_factor(m, o.outer, o.core, mode)?);
        }
        _ => {
            let (u, c, w) = su_split(m);
            su_factors(&w, mode, out)?;
            out.push(euler_decompose(&c, SubspacePair::raw(d - 2, d - 1), mode)?);
            su_factors(&u, mode, out)?;
        }
    }
    Ok(())
}

/// The pairs used by the recursive qudit decomposition of dimension `d`.
pub fn qudit_subspace_family(d: usize) -> BTreeSet<SubspacePair> {
    let mut set = BTreeSet::new();
    if d >= 2 {
        set.insert(SubspacePair::raw(0, 1));
    }
    if d >= 3 {
        set.insert(SubspacePair::raw(0, 2));
    }
    for k in 4..=d {
        set.insert(SubspacePair::raw(k - 2, k - 1));
    }
    set
}

/// Global phase `alpha` with `e^{-i alpha} M` special unitary.
///
/// Among the `d` admissible branches of `arg(det M) / d`, picks the one
/// closest to the argument of the largest-modulus entry, so that a phase
/// applied to `M` only shifts `alpha`.
pub fn canonical_phase(m: &ComplexMatrix) -> f64 {
    let d = m.dim() as f64;
    let base = m.determinant().arg() / d;
    let anchor = m
        .entries()
        .iter()
        .fold(
            (0.0f64, ZERO),
            |best, &z| if z.norm() > best.0 { (z.norm(), z) } else { best },
        )
        .1
        .arg();
    let mut best = (f64::INFINITY, base);
    for k in 0..m.dim() {
        let cand = wrap_pi(base + TAU * k as f64 / d);
        let dist = wrap_pi(cand - anchor).abs();
        if dist < best.0 - 1e-12 {
            best = (dist, cand);
        }
    }
    best.1
}

struct Rotation {
    axis: Axis,
    pair: SubspacePair,
    theta: f64,
}

fn assemble(
    m: &ComplexMatrix,
    global_phase: f64,
    rotations: Vec<Rotation>,
    template: Template,
    subspaces_used: BTreeSet<SubspacePair>,
    limit: f64,
) -> Result<DecompositionResult> {
    let mut circuit = Circuit::new(m.dim(), 1)?;
    let global_phase = wrap_pi(global_phase);
    if global_phase.abs() > PRUNE_EPS {
        circuit.push(CircuitGate::global_phase(global_phase))?;
    }
    for r in rotations {
        let theta = wrap_rotation_angle(r.theta);
        if theta.abs() <= PRUNE_EPS {
            continue;
        }
        circuit.push(CircuitGate::single(
            GateKind::Rot {
                axis: r.axis,
                pair: r.pair,
                theta,
            },
            0,
        ))?;
    }
    let residual = circuit_unitary(&circuit)?.max_abs_diff(m)?;
    if residual.is_nan() || residual > limit {
        return Err(Error::ReconstructionFailed { residual, limit });
    }
    Ok(DecompositionResult {
        circuit,
        template,
        residual,
        subspaces_used,
        global_phase,
    })
}

fn euler_rotations(factors: &[EulerAngles]) -> (f64, Vec<Rotation>) {
    let mut phase = 0.0;
    let mut rots = Vec::with_capacity(3 * factors.len());
    for f in factors {
        phase += f.alpha;
        for g in f.rotations() {
            if let GateKind::Rot { axis, pair, theta } = g {
                rots.push(Rotation { axis, pair, theta });
            }
        }
    }
    (phase, rots)
}

pub fn decompose_qutrit(m: &ComplexMatrix, template: Template) -> Result<DecompositionResult> {
    decompose_qutrit_with(m, template, &QutritOptions::default())
}

pub fn decompose_qutrit_with(
    m: &ComplexMatrix,
    template: Template,
    opts: &QutritOptions,
) -> Result<DecompositionResult> {
    if m.dim() != 3 {
        return Err(Error::DimMismatch(format!(
            "qutrit decomposition needs a 3x3 matrix, got {0}x{0}",
            m.dim()
        )));
    }
    check_unitary(m)?;
    let alpha = canonical_phase(m);
    let ms = m.scale(cis(-alpha));
    match template {
        Template::QuditRecursive => decompose_qudit_with(m, opts.mode),
        Template::ThreeFactor => {
            let factors = three_factor(&ms, opts.outer, opts.core, opts.mode)?;
            let (extra, rots) = euler_rotations(&factors);
            let family = [opts.outer, opts.core].into_iter().collect();
            assemble(m, alpha + extra, rots, template, family, QUTRIT_RESIDUAL_LIMIT)
        }
        Template::EightRotation => {
            let rots = eight_rotation(&ms)?;
            let family = QutritOptions::default();
            let family = [family.outer, family.core].into_iter().collect();
            assemble(m, alpha, rots, template, family, QUTRIT_RESIDUAL_LIMIT)
        }
    }
}

type Real3 = Matrix3<f64>;

fn split_parts(m: &ComplexMatrix) -> (Real3, Real3) {
    (Real3::from_fn(|r, c| m[(r, c)].re), Real3::from_fn(|r, c| m[(r, c)].im))
}

/// Half angles `(b, g, d)` with `o = G01(b) G02(g) G01(d)`, where `Gjk(t)`
/// rotates the `(j, k)` plane by `t` (the matrix of `R_y^(jk)(2t)`).
fn so3_half_angles(o: &Real3) -> (f64, f64, f64) {
    let sg = (o[(2, 0)].powi(2) + o[(2, 1)].powi(2)).sqrt();
    let g = sg.atan2(o[(2, 2)]);
    if sg > DEGENERATE_EPS {
        let d = (-o[(2, 1)]).atan2(o[(2, 0)]);
        let b = (-o[(1, 2)]).atan2(-o[(0, 2)]);
        (b, g, d)
    } else if o[(2, 2)] > 0.0 {
        (o[(1, 0)].atan2(o[(0, 0)]), 0.0, 0.0)
    } else {
        ((-o[(1, 0)]).atan2(-o[(0, 0)]), PI, 0.0)
    }
}

/// `M = O1 * D * O2` for `M` in `SU(3)`, with `O1, O2` real rotations and
/// `D` diagonal, each expanded into rotations (time order).
fn eight_rotation(ms: &ComplexMatrix) -> Result<Vec<Rotation>> {
    let s = &ms.transpose() * ms;
    let (sr, si) = split_parts(&s);
    // S = M^T M is unitary and symmetric, so Re S and Im S commute; a generic
    // real combination shares their eigenvectors.
    let mixes = [
        0.577_215_664_901_532_9,
        std::f64::consts::SQRT_2,
        -std::f64::consts::E,
        std::f64::consts::FRAC_1_PI,
    ];
    let mut o2 = None;
    for t in mixes {
        let eig = SymmetricEigen::new(sr + si * t);
        let cand = eig.eigenvectors.transpose();
        let dr = cand * sr * cand.transpose();
        let di = cand * si * cand.transpose();
        let mut off: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    off = off.max(dr[(r, c)].abs()).max(di[(r, c)].abs());
                }
            }
        }
        if off < 1e-9 {
            o2 = Some((cand, dr, di));
            break;
        }
    }
    let (mut o2, dr, di) = o2.ok_or(Error::ReconstructionFailed {
        residual: f64::NAN,
        limit: QUTRIT_RESIDUAL_LIMIT,
    })?;
    if o2.determinant() < 0.0 {
        for c in 0..3 {
            o2[(0, c)] = -o2[(0, c)];
        }
    }
    let mut dv: Vec<C64> = (0..3).map(|i| C64::new(dr[(i, i)], di[(i, i)]).sqrt()).collect();
    // O1 = M O2^T D^{-1}; real up to rounding.
    let o2t = ComplexMatrix::from_fn(3, |r, c| C64::new(o2[(c, r)], 0.0));
    let dinv = ComplexMatrix::from_diag(&dv.iter().map(|z| z.inv()).collect::<Vec<_>>());
    let o1c = &(ms * &o2t) * &dinv;
    let mut o1 = Real3::from_fn(|r, c| o1c[(r, c)].re);
    if o1.determinant() < 0.0 {
        for r in 0..3 {
            o1[(r, 0)] = -o1[(r, 0)];
        }
        dv[0] = -dv[0];
    }
    let (b1, g1, d1) = so3_half_angles(&o1);
    let (b2, g2, d2) = so3_half_angles(&o2);
    let p01 = SubspacePair::raw(0, 1);
    let p02 = SubspacePair::raw(0, 2);
    let y = |pair, half: f64| Rotation {
        axis: Axis::Y,
        pair,
        theta: 2.0 * half,
    };
    let z = |pair, theta| Rotation {
        axis: Axis::Z,
        pair,
        theta,
    };
    Ok(vec![
        y(p01, d2),
        y(p02, g2),
        y(p01, b2),
        z(p01, 2.0 * dv[1].arg()),
        z(p02, 2.0 * dv[2].arg()),
        y(p01, d1),
        y(p02, g1),
        y(p01, b1),
    ])
}

pub fn decompose_qudit(m: &ComplexMatrix) -> Result<DecompositionResult> {
    decompose_qudit_with(m, EulerMode::Zyz)
}

pub fn decompose_qudit_with(m: &ComplexMatrix, mode: EulerMode) -> Result<DecompositionResult> {
    let d = m.dim();
    if d < 2 {
        return Err(Error::BadDimension(format!(
            "qudit decomposition needs d >= 2, got {d}"
        )));
    }
    if d > MAX_QUDIT_DIM {
        return Err(Error::TooLarge {
            d,
            limit: MAX_QUDIT_DIM,
        });
    }
    check_unitary(m)?;
    let alpha = canonical_phase(m);
    let ms = m.scale(cis(-alpha));
    let mut factors = Vec::new();
    su_factors(&ms, mode, &mut factors)?;
    let (extra, rots) = euler_rotations(&factors);
    assemble(
        m,
        alpha + extra,
        rots,
        Template::QuditRecursive,
        qudit_subspace_family(d),
        QUDIT_RESIDUAL_LIMIT,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{equal_up_to_phase, haar_random_unitary};

    fn pair(j: usize, k: usize) -> SubspacePair {
        SubspacePair::new(j, k).unwrap()
    }

    fn rot(d: usize, axis: Axis, j: usize, k: usize, theta: f64) -> ComplexMatrix {
        gate_matrix(
            d,
            &GateKind::Rot {
                axis,
                pair: pair(j, k),
                theta,
            },
        )
        .unwrap()
    }

    fn rotations_of(r: &DecompositionResult) -> Vec<(Axis, SubspacePair, f64)> {
        r.circuit
            .gates()
            .iter()
            .filter_map(|g| match g.op {
                GateKind::Rot { axis, pair, theta } => Some((axis, pair, theta)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn pauli_x_euler() {
        let x = gate_matrix(2, &GateKind::x(0, 1).unwrap()).unwrap();
        let e = euler_decompose(&x, pair(0, 1), EulerMode::Zyz).unwrap();
        assert!((e.theta - PI).abs() < 1e-15);
        assert!(e.matrix(2).unwrap().max_abs_diff(&x).unwrap() < 1e-15);
        // e^{i pi/2} R_y(pi) R_z(pi) is X as well.
        let alt = (&rot(2, Axis::Y, 0, 1, PI) * &rot(2, Axis::Z, 0, 1, PI)).scale(cis(FRAC_PI_2));
        assert!(alt.max_abs_diff(&x).unwrap() < 1e-15);
    }

    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn euler_round_trip_both_modes() {
        for seed in 0..50 {
            let u2 = haar_random_unitary(2, seed).unwrap();
            for (j, k) in [(0, 1), (0, 2), (1, 2)] {
                let u = ComplexMatrix::embed(&u2, &[j, k], 3);
                for mode in [EulerMode::Zyz, EulerMode::Xyx] {
                    let e = euler_decompose(&u, pair(j, k), mode)
                        .unwrap_or_else(|err| panic!("{seed} {j}{k} {mode:?} {err}"));
                    assert!((0.0..=PI).contains(&e.theta));
                    assert!(e.matrix(3).unwrap().max_abs_diff(&u).unwrap() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn euler_degenerate_branches() {
        let u = rot(2, Axis::Z, 0, 1, 0.7);
        let e = euler_decompose(&u, pair(0, 1), EulerMode::Zyz).unwrap();
        assert_eq!((e.theta, e.phi2), (0.0, 0.0));
        assert!((e.phi1 - 0.7).abs() < 1e-14 && e.alpha.abs() < 1e-15);
        let id = euler_decompose(&ComplexMatrix::identity(3), pair(1, 2), EulerMode::Xyx).unwrap();
        assert_eq!((id.phi1, id.theta, id.phi2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn euler_rejects_leaky_and_nonunitary() {
        let u = haar_random_unitary(3, 1).unwrap();
        assert!(matches!(
            euler_decompose(&u, pair(0, 1), EulerMode::Zyz),
            Err(Error::NotSubspaceConfined { j: 0, k: 1, .. })
        ));
        let mut m = ComplexMatrix::identity(3);
        m[(0, 0)] = C64::new(2.0, 0.0);
        assert!(matches!(
            euler_decompose(&m, pair(0, 1), EulerMode::Zyz),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn csd_core_rotation_inputs() {
        let beta = 1.1;
        // Core already on the last pair: K1, K2 come out diagonal.
        let m = rot(3, Axis::Y, 1, 2, beta);
        let f = cartan_csd_2_1(&m).unwrap();
        assert!((f.beta - beta).abs() < 1e-12);
        for k in [&f.k1, &f.k2] {
            for r in 0..3 {
                for c in 0..3 {
                    if r != c {
                        assert!(k[(r, c)].norm() < 1e-12);
                    }
                }
            }
        }
        // A rotation on (0,2) needs a level exchange inside K1 and K2.
        let f = cartan_csd_2_1(&rot(3, Axis::Y, 0, 2, beta)).unwrap();
        assert!((f.beta - beta).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn csd_random_factors_have_block_form() {
        for d in 2..=6 {
            for seed in 0..20 {
                let m = haar_random_unitary(d, 100 + seed).unwrap();
                let f = cartan_csd_2_1(&m).unwrap();
                assert_eq!(f.partition(), (d - 1, 1));
                let rebuilt = &(&f.k1 * &f.a) * &f.k2;
                assert!(rebuilt.max_abs_diff(&m).unwrap() < 1e-10);
                assert!(f.k1.is_unitary(1e-10) && f.k2.is_unitary(1e-10));
                for j in 0..d - 1 {
                    assert!(f.k1[(j, d - 1)].norm() < 1e-12 && f.k1[(d - 1, j)].norm() < 1e-12);
                    assert!(f.k2[(j, d - 1)].norm() < 1e-12 && f.k2[(d - 1, j)].norm() < 1e-12);
                }
                assert!((f.k1[(d - 1, d - 1)] - ONE).norm() < 1e-15);
                assert!((0.0..=PI).contains(&f.beta));
                // The core angle matches the smallest singular value of the top block.
                let c = (f.beta / 2.0).cos();
                let tail: f64 = (0..d - 1).map(|j| m[(d - 1, j)].norm_sqr()).sum();
                assert!((c * c - (1.0 - tail)).abs() < 1e-10);
                for j in 0..d.saturating_sub(2) {
                    let z = f.k1[(j, j)];
                    assert!(z.im.abs() < 1e-12 && z.re >= 0.0);
                }
            }
        }
    }

    #[test]
    fn identity_gives_empty_circuit() {
        for t in [Template::ThreeFactor, Template::EightRotation, Template::QuditRecursive] {
            let r = decompose_qutrit(&ComplexMatrix::identity(3), t).unwrap();
            assert!(r.circuit.is_empty(), "{t:?}");
            assert_eq!(r.residual, 0.0);
        }
        for d in 2..=6 {
            assert!(decompose_qudit(&ComplexMatrix::identity(d)).unwrap().circuit.is_empty());
        }
    }

    #[test]
    fn three_factor_round_trip() {
        for seed in 0..200 {
            let m = haar_random_unitary(3, seed).unwrap();
            let r = decompose_qutrit(&m, Template::ThreeFactor).unwrap();
            assert!(r.residual < 1e-9);
            let u = circuit_unitary(&r.circuit).unwrap();
            assert!(u.max_abs_diff(&m).unwrap() < 1e-9);
            let rots = rotations_of(&r);
            assert_eq!(rots.len(), 9);
            let pairs: Vec<_> = rots.iter().map(|x| (x.1.j(), x.1.k())).collect();
            assert_eq!(pairs, [[(0, 1); 3], [(0, 2); 3], [(0, 1); 3]].concat());
        }
    }

    #[test]
    fn three_factor_other_pairs_and_modes() {
        let m = haar_random_unitary(3, 77).unwrap();
        for (outer, core) in [((0, 1), (1, 2)), ((1, 2), (0, 2)), ((0, 2), (0, 1))] {
            for mode in [EulerMode::Zyz, EulerMode::Xyx] {
                let opts = QutritOptions {
                    mode,
                    outer: pair(outer.0, outer.1),
                    core: pair(core.0, core.1),
                };
                let r = decompose_qutrit_with(&m, Template::ThreeFactor, &opts).unwrap();
                assert!(r.residual < 1e-9);
                assert!(rotations_of(&r).iter().all(|x| x.1 == opts.outer || x.1 == opts.core));
            }
        }
        let bad = QutritOptions {
            outer: pair(0, 1),
            core: pair(0, 1),
            ..QutritOptions::default()
        };
        assert!(matches!(
            decompose_qutrit_with(&m, Template::ThreeFactor, &bad),
            Err(Error::BadSubspace(_))
        ));
    }

    #[test]
    fn eight_rotation_pattern() {
        use Axis::{Y, Z};
        let want = [
            (Y, (0, 1)),
            (Y, (0, 2)),
            (Y, (0, 1)),
            (Z, (0, 1)),
            (Z, (0, 2)),
            (Y, (0, 1)),
            (Y, (0, 2)),
            (Y, (0, 1)),
        ];
        for seed in 0..200 {
            let m = haar_random_unitary(3, 5000 + seed).unwrap();
            let r = decompose_qutrit(&m, Template::EightRotation).unwrap();
            assert!(r.residual < 1e-9, "seed {seed}: {}", r.residual);
            let got: Vec<_> = rotations_of(&r).iter().map(|x| (x.0, (x.1.j(), x.1.k()))).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn eight_rotation_structured_inputs() {
        let inputs = [
            gate_matrix(3, &GateKind::x(0, 2).unwrap()).unwrap(),
            gate_matrix(3, &GateKind::h(1, 2).unwrap()).unwrap(),
            gate_matrix(3, &GateKind::Perm(vec![1, 2, 0])).unwrap(),
            ComplexMatrix::from_diag(&[cis(0.3), cis(-1.0), cis(2.0)]),
            rot(3, Axis::X, 0, 1, 0.4),
        ];
        for m in inputs {
            for t in [Template::EightRotation, Template::ThreeFactor] {
                let r = decompose_qutrit(&m, t).unwrap();
                let u = circuit_unitary(&r.circuit).unwrap();
                assert!(u.max_abs_diff(&m).unwrap() < 1e-9, "{t:?}");
            }
        }
    }

    #[test]
    fn phase_insensitive_rotations() {
        for seed in 0..30 {
            let m = haar_random_unitary(3, 900 + seed).unwrap();
            for lambda in [0.4, -2.9, 3.1] {
                let mp = m.scale(cis(lambda));
                for t in [Template::ThreeFactor, Template::EightRotation] {
                    let a = rotations_of(&decompose_qutrit(&m, t).unwrap());
                    let b = rotations_of(&decompose_qutrit(&mp, t).unwrap());
                    assert_eq!(a.len(), b.len());
                    for (x, y) in a.iter().zip(&b) {
                        assert_eq!((x.0, x.1), (y.0, y.1));
                        assert!((x.2 - y.2).abs() < 1e-9, "{t:?} {} {}", x.2, y.2);
                    }
                }
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let m = haar_random_unitary(5, 3).unwrap();
        assert_eq!(decompose_qudit(&m).unwrap(), decompose_qudit(&m).unwrap());
    }

    #[test]
    fn qudit_round_trip_and_budget() {
        let counts = [3, 9, 21, 45, 93];
        for d in 2..=6 {
            for seed in 0..30 {
                let m = haar_random_unitary(d, 40 * d as u64 + seed).unwrap();
                let r = decompose_qudit(&m).unwrap();
                assert!(r.residual < 1e-8);
                assert_eq!(r.subspaces_used.len(), d - 1);
                let rots = rotations_of(&r);
                assert_eq!(rots.len(), counts[d - 2]);
                let seen: BTreeSet<_> = rots.iter().map(|x| x.1).collect();
                assert_eq!(seen, r.subspaces_used);
                for x in &rots {
                    assert!(x.2 > -TAU && x.2 <= TAU);
                }
            }
        }
    }

    #[test]
    fn qudit_agrees_with_three_factor_at_d3() {
        let m = haar_random_unitary(3, 12).unwrap();
        let a = decompose_qudit(&m).unwrap();
        let b = decompose_qutrit(&m, Template::ThreeFactor).unwrap();
        assert_eq!(a.circuit.gates(), b.circuit.gates());
        let (eq, _) = equal_up_to_phase(&circuit_unitary(&a.circuit).unwrap(), &m, 1e-9).unwrap();
        assert!(eq);
    }

    #[test]
    fn qudit_limits() {
        assert!(matches!(
            decompose_qudit(&ComplexMatrix::identity(7)),
            Err(Error::TooLarge { d: 7, limit: 6 })
        ));
        assert!(matches!(
            decompose_qudit(&ComplexMatrix::identity(1)),
            Err(Error::BadDimension(_))
        ));
        let mut m = ComplexMatrix::identity(4);
        m[(3, 0)] = C64::new(0.1, 0.0);
        assert!(matches!(decompose_qudit(&m), Err(Error::NotUnitary { .. })));
        assert!(matches!(
            decompose_qutrit(&ComplexMatrix::identity(4), Template::ThreeFactor),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_rotation_angle(2.0 * TAU), 0.0);
        assert!((wrap_rotation_angle(-TAU) - TAU).abs() < 1e-15);
        assert!((wrap_rotation_angle(3.0 * PI) + PI).abs() < 1e-12);
    }
}
