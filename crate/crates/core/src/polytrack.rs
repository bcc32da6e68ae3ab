//! Elementary symmetric polynomials along matrix paths, the associated time
//! change, the martingale coefficients of the polynomial dynamics, and
//! regression tests of their drift and quadratic-variation structure.
//!
//! For a path on the PSD cone the polynomials e_n(X_t) are semimartingales
//! with drift (p-n+1)(alpha-n+1) e_{n-1} for n < p and (alpha-p+1) e_{p-1}
//! for n = p, and the top-degree martingale part has coefficient
//! 2 sqrt(e_{p-1} e_p). Those coefficients are what the statistical tests
//! here estimate from simulated increments.

use crate::error::{Error, Result};
use crate::sde::{GridSpec, MatrixPath};
use crate::symcore::{self, PolyVector};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Elementary symmetric polynomials of the eigenvalues along a matrix path.
#[derive(Debug, Clone)]
pub struct PolyPath {
    grid: GridSpec,
    alpha: f64,
    values: Vec<PolyVector>,
}

impl PolyPath {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn values(&self) -> &[PolyVector] {
        &self.values
    }

    /// Matrix dimension p (degree of the top polynomial).
    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    #[cfg(test)]
    pub(crate) fn from_raw(grid: GridSpec, alpha: f64, values: Vec<PolyVector>) -> Self {
        PolyPath { grid, alpha, values }
    }

    /// One row per grid node: `t,e1,...,ep`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let p = self.dim();
        write!(w, "t")?;
        for n in 1..=p {
            write!(w, ",e{n}")?;
        }
        writeln!(w)?;
        for (k, v) in self.values.iter().enumerate() {
            write!(w, "{}", self.grid.time(k))?;
            for n in 1..=p {
                write!(w, ",{}", v.e(n))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Cumulative trapezoid integral of e_{p-1} along a polynomial path.
#[derive(Debug, Clone)]
pub struct TimeChange {
    grid: GridSpec,
    values: Vec<f64>,
}

impl TimeChange {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0])
    }
}

/// Pointwise elementary symmetric polynomials of the eigenvalues.
pub fn polynomials_along_path(path: &MatrixPath) -> Result<PolyPath> {
    let mut values = Vec::with_capacity(path.states().len());
    for state in path.states() {
        let spec = symcore::eig(state)?;
        values.push(symcore::elementary_symmetric(spec.eigenvalues())?);
    }
    Ok(PolyPath { grid: path.grid(), alpha: path.alpha(), values })
}

/// Time change A_t = integral of e_{p-1}, trapezoid rule on the grid.
/// A_0 = 0; non-decreasing whenever e_{p-1} >= 0 along the path.
pub fn time_change(poly: &PolyPath) -> TimeChange {
    let p = poly.dim();
    let dt = poly.grid.dt();
    let mut values = Vec::with_capacity(poly.values.len());
    let mut acc = 0.0;
    values.push(0.0);
    for w in poly.values.windows(2) {
        acc += 0.5 * (w[0].e(p - 1) + w[1].e(p - 1)) * dt;
        values.push(acc);
    }
    TimeChange { grid: poly.grid, values }
}

/// Martingale coefficient of e_n:
/// `M_n = 2 (sum_i |lambda_i| (e_{n-1} of the others)^2)^(1/2)`.
pub fn martingale_coefficient(lambdas: &[f64], n: usize) -> Result<f64> {
    let p = lambdas.len();
    if n == 0 || n > p {
        return Err(Error::InvalidOrder(format!(
            "martingale coefficient needs 1 <= n <= {p}, got {n}"
        )));
    }
    let mut sum = 0.0;
    for i in 0..p {
        let e = symcore::incomplete_symmetric(lambdas, i, n - 1)?;
        sum += lambdas[i].abs() * e * e;
    }
    Ok(2.0 * sum.sqrt())
}

/// Drift coefficient of e_n in dimension p:
/// `(p-n+1)(alpha-n+1)` for n < p and `alpha-p+1` for n = p.
pub fn drift_coefficient(p: usize, alpha: f64, n: usize) -> f64 {
    if n == p {
        alpha - p as f64 + 1.0
    } else {
        (p - n + 1) as f64 * (alpha - n as f64 + 1.0)
    }
}

/// Through-origin least-squares summary with a heteroskedasticity-robust
/// standard error. `inconclusive` marks a degenerate (all-zero) predictor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionSummary {
    pub target: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub n_points: usize,
    pub inconclusive: bool,
}

impl RegressionSummary {
    /// Whether the estimate lies within `max(k * stderr, rel * |target|)`
    /// of the target.
    pub fn within(&self, k: f64, rel: f64) -> bool {
        !self.inconclusive
            && (self.estimate - self.target).abs()
                <= (k * self.stderr).max(rel * self.target.abs())
    }
}

/// Slope of y on x through the origin; the standard error uses the robust
/// (squared-residual-weighted) variance, so heteroskedastic increments do
/// not understate it. Points with x = 0 are inert.
fn regress_through_origin(xs: &[f64], ys: &[f64], target: f64) -> RegressionSummary {
    debug_assert_eq!(xs.len(), ys.len());
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += x * x;
        sxy += x * y;
    }
    if sxx <= 0.0 {
        return RegressionSummary {
            target,
            estimate: 0.0,
            stderr: 0.0,
            n_points: xs.len(),
            inconclusive: true,
        };
    }
    let slope = sxy / sxx;
    let mut meat = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - slope * x;
        meat += x * x * r * r;
    }
    RegressionSummary {
        target,
        estimate: slope,
        stderr: meat.sqrt() / sxx,
        n_points: xs.len(),
        inconclusive: false,
    }
}

fn check_ensemble(ensemble: &[PolyPath]) -> Result<(usize, f64, f64)> {
    let first = ensemble
        .first()
        .ok_or_else(|| Error::InvalidInput("empty path ensemble".into()))?;
    let (p, alpha, dt) = (first.dim(), first.alpha, first.grid.dt());
    for path in ensemble {
        if path.dim() != p || path.alpha != alpha || path.grid.dt() != dt {
            return Err(Error::InvalidInput(
                "ensemble mixes dimensions, drift parameters, or grids".into(),
            ));
        }
    }
    Ok((p, alpha, dt))
}

/// Regression of the increments of e_n on e_{n-1} dt; the slope estimates
/// the drift coefficient of e_n. Meaningful on PSD-retained ensembles.
pub fn drift_test(ensemble: &[PolyPath], n: usize) -> Result<RegressionSummary> {
    let (p, alpha, dt) = check_ensemble(ensemble)?;
    if n == 0 || n > p {
        return Err(Error::InvalidOrder(format!(
            "drift test needs 1 <= n <= {p}, got {n}"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for path in ensemble {
        for w in path.values.windows(2) {
            xs.push(w[0].e(n - 1) * dt);
            ys.push(w[1].e(n) - w[0].e(n));
        }
    }
    Ok(regress_through_origin(&xs, &ys, drift_coefficient(p, alpha, n)))
}

/// Regression of the squared increments of e_p on 4 e_{p-1} e_p dt;
/// the slope targets 1 when the martingale part of e_p has coefficient
/// 2 sqrt(e_{p-1} e_p).
pub fn qv_test(ensemble: &[PolyPath]) -> Result<RegressionSummary> {
    let (p, _, dt) = check_ensemble(ensemble)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for path in ensemble {
        for w in path.values.windows(2) {
            let de = w[1].e(p) - w[0].e(p);
            xs.push(4.0 * w[0].e(p - 1) * w[0].e(p) * dt);
            ys.push(de * de);
        }
    }
    Ok(regress_through_origin(&xs, &ys, 1.0))
}
