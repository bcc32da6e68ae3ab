//! Closed-form layer: membership oracles for the admissible parameter set of
//! the non-central Wishart family, the Laplace transform, the covariance
//! reduction, and the exact Gaussian outer-product sampler.
//!
//! The admissible set in dimension p is
//!
//! ```text
//! (beta >= (p-1)/2 and x0 PSD)  or  (2 beta in {0,...,p-2} and rk(x0) <= 2 beta)
//! ```
//!
//! and the matrix process with drift alpha corresponds to beta = alpha / 2.

use crate::error::{Error, Result};
use crate::rng::{NoiseSource, RngStream};
use crate::symcore::{self, SymMatrix};
use nalgebra::{Cholesky, DMatrix};
use serde::{Deserialize, Serialize};

/// Detection tolerance for "2 beta is an integer": beta arrives as a float
/// while membership in the discrete set is exact in the math.
pub const INTEGER_TOL: f64 = 1e-12;

/// Starting point and index of a non-central family member candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct WallachPoint {
    x0: SymMatrix,
    beta: f64,
}

impl WallachPoint {
    pub fn new(x0: SymMatrix, beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidPoint(format!(
                "index must be a nonnegative real, got {beta}"
            )));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidPoint("x0 has a non-finite entry".into()));
        }
        Ok(WallachPoint { x0, beta })
    }

    pub fn x0(&self) -> &SymMatrix {
        &self.x0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.x0.dim()
    }
}

/// Which branch of the characterization admitted the point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `beta >= (p-1)/2` (equivalently `alpha >= p-1`).
    Threshold,
    /// `2 beta` in `{0,...,p-2}` with a rank bound on x0.
    Discrete,
    /// Not a member.
    None,
}

/// Membership verdict with the evidence used to reach it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    pub branch: Branch,
    pub rank: usize,
}

/// `round(v)` if `v` is within [`INTEGER_TOL`] of an integer in
/// `{0,...,max}`; the discrete set is empty when `max` is none (p = 1).
fn integer_in_range(v: f64, max: Option<usize>) -> Option<usize> {
    let max = max?;
    let r = v.round();
    if (v - r).abs() <= INTEGER_TOL && r >= 0.0 && r <= max as f64 {
        Some(r as usize)
    } else {
        None
    }
}

fn discrete_max(p: usize) -> Option<usize> {
    p.checked_sub(2)
}

/// Central membership: `2 beta in {0,...,p-2}` or `beta >= (p-1)/2`.
pub fn central_member(beta: f64, p: usize) -> bool {
    assert!(p >= 1, "dimension must be at least 1");
    if !beta.is_finite() {
        return false;
    }
    beta >= (p as f64 - 1.0) / 2.0 || integer_in_range(2.0 * beta, discrete_max(p)).is_some()
}

/// Non-central membership of `(x0, beta)`. Errors if x0 is not PSD within
/// the rank tolerance; otherwise reports the admitting branch and the
/// numeric rank of x0.
pub fn noncentral_member(point: &WallachPoint, epsilon: f64) -> Result<Membership> {
    let nr = symcore::rank_tol(&point.x0, epsilon)?;
    if nr.not_psd {
        return Err(Error::InvalidPoint(
            "x0 has a negative eigenvalue beyond tolerance".into(),
        ));
    }
    let p = point.dim();
    if point.beta >= (p as f64 - 1.0) / 2.0 {
        return Ok(Membership { member: true, branch: Branch::Threshold, rank: nr.rank });
    }
    if let Some(two_beta) = integer_in_range(2.0 * point.beta, discrete_max(p)) {
        if nr.rank <= two_beta {
            return Ok(Membership { member: true, branch: Branch::Discrete, rank: nr.rank });
        }
    }
    Ok(Membership { member: false, branch: Branch::None, rank: nr.rank })
}

/// Whether the cone-valued matrix SDE with drift `alpha` and start `x0` has
/// a solution staying on the cone: `alpha >= p-1`, or `alpha` an integer in
/// `{0,...,p-2}` with `rk(x0) <= alpha`. Kept as an independent evaluation
/// of the alpha-form; it must agree with [`noncentral_member`] at
/// `beta = alpha / 2`.
pub fn cone_sde_solvable(x0: &SymMatrix, alpha: f64, epsilon: f64) -> Result<Membership> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!(
            "drift parameter must be finite, got {alpha}"
        )));
    }
    let nr = symcore::rank_tol(x0, epsilon)?;
    if nr.not_psd {
        return Err(Error::InvalidPoint(
            "x0 has a negative eigenvalue beyond tolerance".into(),
        ));
    }
    let p = x0.dim();
    if alpha >= p as f64 - 1.0 {
        return Ok(Membership { member: true, branch: Branch::Threshold, rank: nr.rank });
    }
    if let Some(a) = integer_in_range(alpha, discrete_max(p)) {
        if nr.rank <= a {
            return Ok(Membership { member: true, branch: Branch::Discrete, rank: nr.rank });
        }
    }
    Ok(Membership { member: false, branch: Branch::None, rank: nr.rank })
}

/// Conjugation `Sigma^(-1/2) x0 Sigma^(-1/2)` reducing a general covariance
/// to the identity-covariance coordinates. Rank is preserved (congruence).
pub fn reduce_sigma(x0: &SymMatrix, sigma: &SymMatrix) -> Result<SymMatrix> {
    if x0.dim() != sigma.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: x0 is {}x{0}, Sigma is {1}x{1}",
            x0.dim(),
            sigma.dim()
        )));
    }
    let spec = symcore::eig(sigma)?;
    if spec.eigenvalues()[0] <= 0.0 {
        return Err(Error::InvalidSigma(format!(
            "Sigma must be positive definite; smallest eigenvalue {}",
            spec.eigenvalues()[0]
        )));
    }
    let inv_half = spec.apply(|l| 1.0 / l.sqrt())?;
    let a = inv_half.to_dmatrix();
    let y = &a * x0.to_dmatrix() * &a;
    symmetrized(&y)
}

/// Averages the tiny numerical asymmetry of a product that is symmetric in
/// exact arithmetic.
fn symmetrized(m: &DMatrix<f64>) -> Result<SymMatrix> {
    let p = m.nrows();
    let mut upper = Vec::with_capacity(p * (p + 1) / 2);
    for i in 0..p {
        for j in i..p {
            upper.push(0.5 * (m[(i, j)] + m[(j, i)]));
        }
    }
    SymMatrix::from_upper_triangle(p, &upper)
}

/// Covariance argument of a Laplace transform query: either `Sigma = t I`
/// or a general positive definite matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSpec {
    Scaled(f64),
    Matrix(SymMatrix),
}

/// Evaluation point of the Laplace transform: `u` positive definite plus
/// the covariance specification.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceQuery {
    u: SymMatrix,
    sigma: SigmaSpec,
}

impl LaplaceQuery {
    fn check_u(u: &SymMatrix) -> Result<()> {
        let spec = symcore::eig(u)?;
        if spec.eigenvalues()[0] <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "u must be positive definite; smallest eigenvalue {}",
                spec.eigenvalues()[0]
            )));
        }
        Ok(())
    }

    /// Marginal-at-time-t form: `Sigma = t I`.
    pub fn at_time(u: SymMatrix, t: f64) -> Result<Self> {
        Self::check_u(&u)?;
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidInput(format!(
                "time must be a positive real, got {t}"
            )));
        }
        Ok(LaplaceQuery { u, sigma: SigmaSpec::Scaled(t) })
    }

    /// General covariance form.
    pub fn with_sigma(u: SymMatrix, sigma: SymMatrix) -> Result<Self> {
        Self::check_u(&u)?;
        if u.dim() != sigma.dim() {
            return Err(Error::InvalidInput("u and Sigma dimensions differ".into()));
        }
        let spec = symcore::eig(&sigma)?;
        if spec.eigenvalues()[0] <= 0.0 {
            return Err(Error::InvalidSigma(format!(
                "Sigma must be positive definite; smallest eigenvalue {}",
                spec.eigenvalues()[0]
            )));
        }
        Ok(LaplaceQuery { u, sigma: SigmaSpec::Matrix(sigma) })
    }

    pub fn u(&self) -> &SymMatrix {
        &self.u
    }

    pub fn sigma(&self) -> &SigmaSpec {
        &self.sigma
    }
}

/// Log-determinant of a symmetric positive definite matrix via Cholesky.
fn ln_det_spd(a: DMatrix<f64>) -> Result<f64> {
    let chol = Cholesky::new(a).ok_or_else(|| {
        Error::Evaluation("I + 2 Sigma u is numerically singular".into())
    })?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Closed-form Laplace transform
/// `det(I + 2 Sigma u)^(-beta) * exp(-Tr(x0 (I + 2 Sigma u)^(-1) u))`.
///
/// The determinant goes through the symmetric congruent form
/// `I + 2 Sigma^(1/2) u Sigma^(1/2)` (Cholesky); the trace factor solves the
/// linear system `(I + 2 Sigma u) Y = u` instead of forming an inverse.
pub fn laplace_closed_form(x0: &SymMatrix, beta: f64, query: &LaplaceQuery) -> Result<f64> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "index must be a nonnegative real, got {beta}"
        )));
    }
    let p = x0.dim();
    if p != query.u.dim() {
        return Err(Error::InvalidInput("x0 and u dimensions differ".into()));
    }
    if !x0.is_finite() {
        return Err(Error::InvalidInput("x0 has a non-finite entry".into()));
    }
    let u = query.u.to_dmatrix();
    let (ln_det, y) = match &query.sigma {
        SigmaSpec::Scaled(t) => {
            // I + 2 t u is itself symmetric positive definite.
            let a = DMatrix::identity(p, p) + 2.0 * *t * &u;
            let chol = Cholesky::new(a).ok_or_else(|| {
                Error::Evaluation("I + 2 t u is numerically singular".into())
            })?;
            let ln_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
            (ln_det, chol.solve(&u))
        }
        SigmaSpec::Matrix(sigma) => {
            let s_half = symcore::spectral_apply(sigma, f64::sqrt)?.to_dmatrix();
            let congruent = DMatrix::identity(p, p) + 2.0 * (&s_half * &u * &s_half);
            let ln_det = ln_det_spd(congruent)?;
            let m = DMatrix::identity(p, p) + 2.0 * (sigma.to_dmatrix() * &u);
            let y = m.lu().solve(&u).ok_or_else(|| {
                Error::Evaluation("I + 2 Sigma u is numerically singular".into())
            })?;
            (ln_det, y)
        }
    };
    let mut trace = 0.0;
    for i in 0..p {
        for j in 0..p {
            trace += x0.get(i, j) * y[(j, i)];
        }
    }
    Ok((-beta * ln_det - trace).exp())
}

/// Sum of outer products of independent Gaussian vectors with the given
/// means and common covariance `Sigma`; the generic noise source is the
/// test hook for injecting fixed draws.
pub fn sample_exact_with<N: NoiseSource + ?Sized>(
    means: &[Vec<f64>],
    sigma: &SymMatrix,
    noise: &mut N,
) -> Result<SymMatrix> {
    if means.is_empty() {
        return Err(Error::InvalidInput("sampler needs at least one Gaussian".into()));
    }
    let p = sigma.dim();
    if means.iter().any(|m| m.len() != p) {
        return Err(Error::InvalidInput(format!(
            "every mean vector must have length {p}"
        )));
    }
    let spec = symcore::eig(sigma)?;
    if spec.eigenvalues()[0] <= 0.0 {
        return Err(Error::InvalidSigma(format!(
            "Sigma must be positive definite; smallest eigenvalue {}",
            spec.eigenvalues()[0]
        )));
    }
    let s_half = spec.apply(f64::sqrt)?;
    let mut z = vec![0.0; p];
    let mut xi = vec![0.0; p];
    let mut out = SymMatrix::zeros(p);
    for m in means {
        noise.fill_standard_normal(&mut z);
        for j in 0..p {
            let mut acc = m[j];
            for k in 0..p {
                acc += s_half.get(j, k) * z[k];
            }
            xi[j] = acc;
        }
        for j in 0..p {
            for l in j..p {
                out.set(j, l, out.get(j, l) + xi[j] * xi[l]);
            }
        }
    }
    Ok(out)
}

/// Exact sampler on a keyed stream; the law has index `beta = n/2` and
/// non-centrality `x0 = sum of m_i m_i^T`.
pub fn sample_exact(
    means: &[Vec<f64>],
    sigma: &SymMatrix,
    stream: &mut RngStream,
) -> Result<SymMatrix> {
    sample_exact_with(means, sigma, stream)
}

/// Mean vectors realizing `sum of m_i m_i^T = x0` with exactly `n` vectors:
/// scaled eigenvectors of x0 for the top `rank` directions, zero-padded.
/// Requires `rank(x0) <= n`, which is the discrete-branch rank condition
/// when `n = 2 beta`.
pub fn means_factorization(x0: &SymMatrix, n: usize, epsilon: f64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidInput("sampler needs at least one Gaussian".into()));
    }
    let nr = symcore::rank_tol(x0, epsilon)?;
    if nr.not_psd {
        return Err(Error::InvalidPoint(
            "x0 has a negative eigenvalue beyond tolerance".into(),
        ));
    }
    if nr.rank > n {
        return Err(Error::InvalidInput(format!(
            "rank {} exceeds the number of Gaussians {n}",
            nr.rank
        )));
    }
    let p = x0.dim();
    let spec = symcore::eig(x0)?;
    let mut means = Vec::with_capacity(n);
    for k in (p - nr.rank)..p {
        let d = spec.eigenvalues()[k].sqrt();
        means.push(spec.eigenvector(k).iter().map(|v| d * v).collect());
    }
    means.resize(n, vec![0.0; p]);
    Ok(means)
}

/// JSON shape of a membership query:
/// `{p, beta, x0: row-major upper triangle, epsilon}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipQuery {
    pub p: usize,
    pub beta: f64,
    pub x0: Vec<f64>,
    #[serde(default = "default_rank_epsilon")]
    pub epsilon: f64,
}

fn default_rank_epsilon() -> f64 {
    symcore::DEFAULT_RANK_EPSILON
}

/// Evaluates a parsed membership query.
pub fn evaluate_membership_query(q: &MembershipQuery) -> Result<Membership> {
    if q.p == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let x0 = SymMatrix::from_upper_triangle(q.p, &q.x0)?;
    let point = WallachPoint::new(x0, q.beta)?;
    noncentral_member(&point, q.epsilon)
}
