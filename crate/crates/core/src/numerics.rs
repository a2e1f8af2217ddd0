//! Dense complex linear algebra used to represent every gate and circuit
//! unitary.
//!
//! All equality checks use the entrywise max-modulus norm, so tolerances
//! are per-entry and do not scale with the dimension.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default tolerance for unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `e^{i theta}`
#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row vectors, which must form a square array.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::BadDimension("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimMismatch(format!(
                    "row {r} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(ComplexMatrix { dim, data })
    }

    /// Convenience constructor for real matrices; panics on ragged input.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |r, c| {
            assert_eq!(rows[r].len(), dim, "ragged real matrix");
            C64::new(rows[r][c], 0.0)
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)])
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn mat_mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.dim, other.dim
            )));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                let orow = &mut out.data[r * n..(r + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product with `self` as the more significant factor.
    pub fn tensor(&self, other: &Self) -> Self {
        let (na, nb) = (self.dim, other.dim);
        let mut out = Self::zeros(na * nb);
        for ar in 0..na {
            for ac in 0..na {
                let a = self[(ar, ac)];
                if a == ZERO {
                    continue;
                }
                for br in 0..nb {
                    for bc in 0..nb {
                        out[(ar * nb + br, ac * nb + bc)] = a * other[(br, bc)];
                    }
                }
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimMismatch(format!(
                "vector of length {} against {0}x{0} matrix",
                v.len()
            )));
        }
        Ok((0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Entrywise max-modulus distance.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(format!(
                "comparing {0}x{0} with {1}x{1}",
                self.dim, other.dim
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `max |(a^dagger a - I)_{ij}|`
    pub fn unitarity_deviation(&self) -> f64 {
        let g = self.dagger().mat_mul(self).expect("same dimension");
        g.max_abs_diff(&Self::identity(self.dim)).expect("same dimension")
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// Copies the `size`x`size` principal block starting at `(offset, offset)`.
    pub fn principal_block(&self, offset: usize, size: usize) -> Self {
        Self::from_fn(size, |r, c| self[(offset + r, offset + c)])
    }

    /// Identity of dimension `dim` with `block` placed at rows/cols `levels`.
    pub fn embed(block: &Self, levels: &[usize], dim: usize) -> Self {
        debug_assert_eq!(block.dim, levels.len());
        let mut m = Self::identity(dim);
        for (br, &r) in levels.iter().enumerate() {
            for (bc, &c) in levels.iter().enumerate() {
                m[(r, c)] = block[(br, bc)];
            }
        }
        m
    }

    pub fn determinant(&self) -> C64 {
        // Gaussian elimination with partial pivoting; dimensions here are tiny.
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| a[x * n + col].norm().total_cmp(&a[y * n + col].norm()))
                .unwrap();
            if a[pivot * n + col] == ZERO {
                return ZERO;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= f * v;
                }
            }
        }
        det
    }

    /// Parses the matrix text format: the dimension on the first line, then
    /// one line per row of `re,im` entries separated by whitespace.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (ln, first) = lines.next().ok_or_else(|| Error::parse(1, "empty matrix file"))?;
        let dim: usize = first
            .parse()
            .map_err(|_| Error::parse(ln, format!("expected dimension, found {first:?}")))?;
        if dim == 0 {
            return Err(Error::parse(ln, "dimension must be positive"));
        }
        let mut rows = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(ln + rows.len() + 1, "missing matrix row"))?;
            let row = line
                .split_whitespace()
                .map(|tok| parse_complex(tok).ok_or_else(|| Error::parse(ln, format!("bad entry {tok:?}"))))
                .collect::<Result<Vec<_>>>()?;
            if row.len() != dim {
                return Err(Error::parse(ln, format!("expected {dim} entries, found {}", row.len())));
            }
            rows.push(row);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::parse(ln, "trailing content after matrix rows"));
        }
        Self::from_rows(rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.dim);
        for r in 0..self.dim {
            let row: Vec<String> = self.row(r).iter().map(|z| format!("{:e},{:e}", z.re, z.im)).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}

fn parse_complex(tok: &str) -> Option<C64> {
    let (re, im) = tok.split_once(',')?;
    Some(C64::new(re.parse().ok()?, im.parse().ok()?))
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Panics on a dimension mismatch; use [`ComplexMatrix::mat_mul`] for the
/// checked form.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.mat_mul(rhs).expect("matrix dimensions must agree")
    }
}

pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.mat_mul(b)
}

pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.tensor(b)
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

pub fn is_unitary(a: &ComplexMatrix, tol: f64) -> bool {
    a.is_unitary(tol)
}

/// Compares two matrices up to a global phase.
///
/// The phase is taken as `arg(tr(a^dagger b))`; when that trace vanishes
/// (below `dim * 1e-12`) no phase can be extracted and the result is
/// `(false, 0)`. Otherwise returns whether `e^{i lambda} a` matches `b`
/// within `tol` entrywise, together with `lambda`.
pub fn equal_up_to_phase(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<(bool, f64)> {
    let (err, phase) = phase_distance(a, b)?;
    Ok((err <= tol, phase.unwrap_or(0.0)))
}

/// Max entrywise error after phase alignment, and the phase used. The
/// error is infinite when the overlap trace is degenerate.
pub fn phase_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(f64, Option<f64>)> {
    let t = a.dagger().mat_mul(b)?.trace();
    if t.norm() < a.dim() as f64 * 1e-12 {
        return Ok((f64::INFINITY, None));
    }
    let lambda = t.arg();
    let err = a.scale(cis(lambda)).max_abs_diff(b)?;
    Ok((err, Some(lambda)))
}

/// Samples a Haar-distributed unitary of dimension `d`, deterministically
/// for a given seed.
///
/// A complex Gaussian matrix is orthonormalized column by column (modified
/// Gram-Schmidt). The implied triangular factor then has a positive real
/// diagonal, which is the normalization that makes the result Haar.
pub fn haar_random_unitary(d: usize, seed: u64) -> Result<ComplexMatrix> {
    if d < 1 {
        return Err(Error::BadDimension("Haar sampling needs d >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    C64::new(re, im)
                })
                .collect()
        })
        .collect();
    for j in 0..d {
        for k in 0..j {
            let (done, rest) = cols.split_at_mut(j);
            let q = &done[k];
            let v = &mut rest[0];
            let proj: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    Ok(ComplexMatrix::from_fn(d, |r, c| cols[c][r]))
}
