//! Symmetric-matrix kernel: storage, spectral decomposition, and the
//! elementary symmetric polynomials driving the eigenvalue dynamics.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Reconstruction budget for a spectral decomposition:
/// `max |U L U^T - S| <= RECONSTRUCTION_TOL * dim * max|S_ij|`.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

/// Orthogonality budget: `max |U^T U - I| <= ORTHOGONALITY_TOL * dim`.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Default relative threshold for numeric rank decisions.
pub const DEFAULT_RANK_EPSILON: f64 = 1e-9;

pub fn reconstruction_tol(dim: usize, max_abs: f64) -> f64 {
    RECONSTRUCTION_TOL * dim as f64 * max_abs
}

pub fn orthogonality_tol(dim: usize) -> f64 {
    ORTHOGONALITY_TOL * dim as f64
}

/// Dense symmetric matrix. The full square is stored row-major, and every
/// mutation writes both triangles, so `get(i, j) == get(j, i)` holds exactly
/// (bitwise) at all times.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        SymMatrix { dim, entries: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, c: f64) -> Self {
        let mut s = Self::zeros(dim);
        for i in 0..dim {
            s.entries[i * dim + i] = c;
        }
        s
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut s = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            s.entries[i * s.dim + i] = d;
        }
        s
    }

    /// Builds from a full row-major square; the input must already be
    /// exactly symmetric.
    pub fn from_entries(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if entries[i * dim + j] != entries[j * dim + i] {
                    return Err(Error::InvalidInput(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(SymMatrix { dim, entries })
    }

    /// Builds from the row-major upper triangle (diagonal included),
    /// `dim * (dim + 1) / 2` values.
    pub fn from_upper_triangle(dim: usize, upper: &[f64]) -> Result<Self> {
        let expected = dim * (dim + 1) / 2;
        if dim == 0 || upper.len() != expected {
            return Err(Error::InvalidInput(format!(
                "expected {expected} upper-triangle entries for dim {dim}, got {}",
                upper.len()
            )));
        }
        let mut s = Self::zeros(dim);
        let mut idx = 0;
        for i in 0..dim {
            for j in i..dim {
                s.set(i, j, upper[idx]);
                idx += 1;
            }
        }
        Ok(s)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Writes both (i, j) and (j, i).
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.dim + j] = v;
        self.entries[j * self.dim + i] = v;
    }

    /// Full row-major storage.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Row-major upper triangle, diagonal included.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim * (self.dim + 1) / 2);
        for i in 0..self.dim {
            for j in i..self.dim {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.is_finite())
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &SymMatrix, c: f64) -> Result<SymMatrix> {
        if other.dim != self.dim {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        let mut out = self.clone();
        for (o, e) in out.entries.iter_mut().zip(&other.entries) {
            *o += c * e;
        }
        Ok(out)
    }

    /// Trace of the product `self * other` (both symmetric).
    pub fn trace_product(&self, other: &SymMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub(crate) fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

/// Spectral decomposition of a [`SymMatrix`]: ascending eigenvalues and the
/// matching orthonormal eigenvectors (column `k` pairs with eigenvalue `k`).
#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    eigenvalues: Vec<f64>,
    /// Column-major so each eigenvector is contiguous.
    eigenvectors: Vec<f64>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k * self.dim..(k + 1) * self.dim]
    }

    /// `U g(L) U^T`, applying `g` to each eigenvalue. Fails with a domain
    /// error if `g` is not finite at some eigenvalue.
    pub fn apply(&self, g: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let p = self.dim;
        let mut gvals = Vec::with_capacity(p);
        for &l in &self.eigenvalues {
            let gl = g(l);
            if !gl.is_finite() {
                return Err(Error::Domain(format!(
                    "spectral function not finite at eigenvalue {l}"
                )));
            }
            gvals.push(gl);
        }
        let mut out = SymMatrix::zeros(p);
        for i in 0..p {
            for j in i..p {
                let mut acc = 0.0;
                for k in 0..p {
                    acc += gvals[k] * self.eigenvectors[k * p + i] * self.eigenvectors[k * p + j];
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `U L U^T`; infallible because eigenvalues are finite by construction.
    pub fn reconstruct(&self) -> SymMatrix {
        self.apply(|l| l).expect("eigenvalues are finite")
    }

    /// `max |U^T U - I|` over all entries.
    pub fn orthogonality_defect(&self) -> f64 {
        let p = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..p {
            for b in a..p {
                let dot: f64 = (0..p)
                    .map(|i| self.eigenvectors[a * p + i] * self.eigenvectors[b * p + i])
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Spectral decomposition with eigenvalues in ascending order.
///
/// Dimensions 1 and 2 use closed forms (these sit on the hot path of the
/// matrix integrator); larger dimensions go through a symmetric
/// tridiagonalization + QL solver.
pub fn eig(s: &SymMatrix) -> Result<Spectrum> {
    if !s.is_finite() {
        return Err(Error::InvalidInput(
            "matrix has a non-finite entry".into(),
        ));
    }
    match s.dim {
        1 => Ok(Spectrum {
            dim: 1,
            eigenvalues: vec![s.get(0, 0)],
            eigenvectors: vec![1.0],
        }),
        2 => {
            let (l1, l2, v1, v2) = eig2(s.get(0, 0), s.get(0, 1), s.get(1, 1));
            Ok(Spectrum {
                dim: 2,
                eigenvalues: vec![l1, l2],
                eigenvectors: vec![v1[0], v1[1], v2[0], v2[1]],
            })
        }
        _ => eig_general(s),
    }
}

/// Closed-form 2x2 symmetric eigendecomposition, ascending.
/// Returns (l1, l2, v1, v2) with exactly orthonormal v1, v2.
#[inline]
pub(crate) fn eig2(a: f64, b: f64, c: f64) -> (f64, f64, [f64; 2], [f64; 2]) {
    if b == 0.0 {
        return if a <= c {
            (a, c, [1.0, 0.0], [0.0, 1.0])
        } else {
            (c, a, [0.0, 1.0], [1.0, 0.0])
        };
    }
    let mid = 0.5 * (a + c);
    let disc = (0.5 * (a - c)).hypot(b);
    let l1 = mid - disc;
    let l2 = mid + disc;
    // (b, l2 - a) is an eigenvector for l2; l2 - a >= 0 so no cancellation.
    let t = l2 - a;
    let norm = b.hypot(t);
    let v2 = [b / norm, t / norm];
    let v1 = [-v2[1], v2[0]];
    (l1, l2, v1, v2)
}

fn eig_general(s: &SymMatrix) -> Result<Spectrum> {
    let p = s.dim;
    let se = nalgebra::SymmetricEigen::new(s.to_dmatrix());
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let mut eigenvalues = Vec::with_capacity(p);
    let mut eigenvectors = Vec::with_capacity(p * p);
    for &k in &order {
        eigenvalues.push(se.eigenvalues[k]);
        eigenvectors.extend(se.eigenvectors.column(k).iter());
    }
    Ok(Spectrum { dim: p, eigenvalues, eigenvectors })
}

/// `U g(L) U^T` for the decomposition of `s`.
pub fn spectral_apply(s: &SymMatrix, g: impl Fn(f64) -> f64) -> Result<SymMatrix> {
    eig(s)?.apply(g)
}

/// Writes `sqrt(|s|)` (spectral absolute value, then square root) into `out`
/// and returns the smallest eigenvalue of `s`. Allocation-free for dim <= 2;
/// this is the matrix integrator's inner loop.
pub fn sqrt_abs_into(s: &SymMatrix, out: &mut SymMatrix) -> Result<f64> {
    debug_assert_eq!(s.dim, out.dim);
    match s.dim {
        1 => {
            let l = s.get(0, 0);
            if !l.is_finite() {
                return Err(Error::InvalidInput("matrix has a non-finite entry".into()));
            }
            out.entries[0] = l.abs().sqrt();
            Ok(l)
        }
        2 => {
            let (a, b, c) = (s.get(0, 0), s.get(0, 1), s.get(1, 1));
            if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                return Err(Error::InvalidInput("matrix has a non-finite entry".into()));
            }
            let (l1, l2, v1, v2) = eig2(a, b, c);
            let g1 = l1.abs().sqrt();
            let g2 = l2.abs().sqrt();
            out.set(0, 0, g1 * v1[0] * v1[0] + g2 * v2[0] * v2[0]);
            out.set(0, 1, g1 * v1[0] * v1[1] + g2 * v2[0] * v2[1]);
            out.set(1, 1, g1 * v1[1] * v1[1] + g2 * v2[1] * v2[1]);
            Ok(l1)
        }
        _ => {
            let spec = eig(s)?;
            *out = spec.apply(|l| l.abs().sqrt())?;
            Ok(spec.eigenvalues[0])
        }
    }
}

/// Elementary symmetric polynomials `e_1..e_p` of the entries of `lambdas`
/// (`e_0 == 1` is implicit). Computed with the product recurrence over
/// `prod_i (1 + lambda_i x)`, O(p^2).
#[derive(Debug, Clone, PartialEq)]
pub struct PolyVector {
    values: Vec<f64>,
}

impl PolyVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `e_n`; `e(0) == 1`.
    pub fn e(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            self.values[n - 1]
        }
    }

    /// `e_1..e_p` as a slice.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn elementary_symmetric(lambdas: &[f64]) -> Result<PolyVector> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput(
            "elementary symmetric polynomials need at least one variable".into(),
        ));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput("non-finite eigenvalue".into()));
    }
    let p = lambdas.len();
    // values[n-1] holds e_n of the variables consumed so far.
    let mut values = vec![0.0; p];
    for (count, &l) in lambdas.iter().enumerate() {
        for n in (1..=count + 1).rev() {
            let lower = if n == 1 { 1.0 } else { values[n - 2] };
            values[n - 1] += l * lower;
        }
    }
    Ok(PolyVector { values })
}

/// `e_n` of `lambdas` with the entry at `excluded` (0-based) deleted.
/// `order == 0` gives 1; `order >= lambdas.len()` is out of range.
pub fn incomplete_symmetric(lambdas: &[f64], excluded: usize, order: usize) -> Result<f64> {
    let p = lambdas.len();
    if excluded >= p {
        return Err(Error::InvalidInput(format!(
            "excluded index {excluded} out of range for {p} variables"
        )));
    }
    if order >= p {
        return Err(Error::InvalidOrder(format!(
            "incomplete polynomial order {order} needs at most {} (p - 1)",
            p - 1
        )));
    }
    if order == 0 {
        return Ok(1.0);
    }
    // Recompute on the deleted variable set; O(p * order) and unconditionally
    // stable, unlike synthetic division by (1 + lambda_excluded x).
    let mut values = vec![0.0; order];
    let mut count = 0usize;
    for (i, &l) in lambdas.iter().enumerate() {
        if i == excluded {
            continue;
        }
        if !l.is_finite() {
            return Err(Error::InvalidInput("non-finite eigenvalue".into()));
        }
        count += 1;
        let top = order.min(count);
        for n in (1..=top).rev() {
            let lower = if n == 1 { 1.0 } else { values[n - 2] };
            values[n - 1] += l * lower;
        }
    }
    Ok(values[order - 1])
}

/// Numeric rank of a (nominally PSD) symmetric matrix, with a PSD violation
/// flag. Thresholds are relative to `max(largest eigenvalue, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NumericRank {
    pub rank: usize,
    /// Some eigenvalue fell below `-epsilon * max(lambda_max, 1)`.
    pub not_psd: bool,
}

pub fn rank_tol(s: &SymMatrix, epsilon: f64) -> Result<NumericRank> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "rank epsilon must be a nonnegative real, got {epsilon}"
        )));
    }
    let spec = eig(s)?;
    let lmax = *spec
        .eigenvalues()
        .last()
        .expect("dimension is at least one");
    let floor = epsilon * lmax.max(1.0);
    let rank = spec.eigenvalues().iter().filter(|&&l| l > floor).count();
    let not_psd = spec.eigenvalues().iter().any(|&l| l < -floor);
    Ok(NumericRank { rank, not_psd })
}
