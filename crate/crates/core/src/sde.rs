//! Euler integrators for the matrix squared Bessel process, its eigenvalue
//! particle system, scalar squared Bessel processes (including negative
//! dimension), and the coupled comparison process.
//!
//! All schemes apply the square root to the spectral absolute value of the
//! current state and never project back onto the PSD cone: leaving the cone
//! is a measurement, not an error.

use crate::error::{Error, Result};
use crate::rng::{NoiseSource, RngStream};
use crate::symcore::{self, SymMatrix};
use std::io::Write;

/// Default step size (2^-10) for the uniform grids used by experiments.
pub const DEFAULT_DT: f64 = 0.0009765625;

/// Default clamp for near-collision denominators in the particle drift.
pub const DEFAULT_EPS_REG: f64 = 1e-8;

/// Uniform time grid on `[0, t_end]` with `n_steps * dt == t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    t_end: f64,
    dt: f64,
    n_steps: usize,
}

impl GridSpec {
    pub fn new(t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "t_end must be a positive real, got {t_end}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "dt must be a positive real, got {dt}"
            )));
        }
        let ratio = t_end / dt;
        if ratio > 2f64.powi(31) {
            return Err(Error::InvalidGrid(format!(
                "grid would need {ratio:.3e} steps"
            )));
        }
        let n_steps = ratio.round() as usize;
        if n_steps == 0 || (n_steps as f64 * dt - t_end).abs() > 1e-12 * t_end {
            return Err(Error::InvalidGrid(format!(
                "dt {dt} does not divide t_end {t_end} evenly"
            )));
        }
        Ok(GridSpec { t_end, dt, n_steps })
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Time of grid node `k`, `0 <= k <= n_steps`.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Smallest node index whose time is `>= t`.
    pub fn first_node_at(&self, t: f64) -> usize {
        (0..=self.n_steps)
            .find(|&k| self.time(k) >= t)
            .unwrap_or(self.n_steps)
    }
}

/// Discrete trajectory of the matrix process on a uniform grid.
#[derive(Debug, Clone)]
pub struct MatrixPath {
    grid: GridSpec,
    alpha: f64,
    states: Vec<SymMatrix>,
}

impl MatrixPath {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn states(&self) -> &[SymMatrix] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &SymMatrix {
        &self.states[k]
    }

    pub fn origin(&self) -> &SymMatrix {
        &self.states[0]
    }

    /// One row per grid node: `t` followed by the row-major upper triangle.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let p = self.states[0].dim();
        write!(w, "t")?;
        for i in 1..=p {
            for j in i..=p {
                write!(w, ",x{i}{j}")?;
            }
        }
        writeln!(w)?;
        for (k, s) in self.states.iter().enumerate() {
            write!(w, "{}", self.grid.time(k))?;
            for v in s.upper_triangle() {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Discrete trajectory of the eigenvalue particle system. States are kept
/// sorted ascending; clamp activations are recorded per step.
#[derive(Debug, Clone)]
pub struct VectorPath {
    grid: GridSpec,
    alpha: f64,
    eps_reg: f64,
    states: Vec<Vec<f64>>,
    clamp_counts: Vec<u32>,
    order_violations: u64,
}

impl VectorPath {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eps_reg(&self) -> f64 {
        self.eps_reg
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k]
    }

    /// Clamp activations during step `k -> k+1`.
    pub fn clamp_counts(&self) -> &[u32] {
        &self.clamp_counts
    }

    /// Steps whose raw update came out of order before re-sorting.
    pub fn order_violations(&self) -> u64 {
        self.order_violations
    }

    /// Smallest adjacent gap over all nodes `k >= k0`.
    pub fn min_adjacent_gap_from(&self, k0: usize) -> f64 {
        let mut min_gap = f64::INFINITY;
        for s in &self.states[k0..] {
            for w in s.windows(2) {
                min_gap = min_gap.min(w[1] - w[0]);
            }
        }
        min_gap
    }

    /// Total clamp activations for steps landing at nodes `> k0`.
    pub fn clamp_activations_from(&self, k0: usize) -> u64 {
        self.clamp_counts[k0.min(self.clamp_counts.len())..]
            .iter()
            .map(|&c| c as u64)
            .sum()
    }

    /// One row per grid node: `t` followed by the sorted eigenvalues.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let p = self.states[0].len();
        write!(w, "t")?;
        for i in 1..=p {
            write!(w, ",lambda{i}")?;
        }
        writeln!(w)?;
        for (k, s) in self.states.iter().enumerate() {
            write!(w, "{}", self.grid.time(k))?;
            for v in s {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Discrete trajectory of a scalar process.
#[derive(Debug, Clone)]
pub struct ScalarPath {
    grid: GridSpec,
    delta: f64,
    values: Vec<f64>,
}

impl ScalarPath {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,x")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{v}", self.grid.time(k))?;
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!(
            "drift parameter must be finite, got {alpha}"
        )));
    }
    Ok(())
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "dt must be a positive real, got {dt}"
        )));
    }
    Ok(())
}

/// A `p x p` matrix of independent `N(0, dt)` entries, row-major,
/// deliberately not symmetrized.
pub fn brownian_matrix_increment<N: NoiseSource + ?Sized>(
    p: usize,
    dt: f64,
    noise: &mut N,
) -> Result<Vec<f64>> {
    if p == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    check_dt(dt)?;
    let sqrt_dt = dt.sqrt();
    let mut dw = vec![0.0; p * p];
    noise.fill_standard_normal(&mut dw);
    for v in dw.iter_mut() {
        *v *= sqrt_dt;
    }
    Ok(dw)
}

/// Scratch space for the matrix scheme; reused across steps so the p <= 2
/// hot path never allocates.
struct MatrixStepper {
    p: usize,
    alpha_dt: f64,
    sqrt_dt: f64,
    r: SymMatrix,
    dw: Vec<f64>,
    m: Vec<f64>,
}

impl MatrixStepper {
    fn new(p: usize, alpha: f64, dt: f64) -> Self {
        MatrixStepper {
            p,
            alpha_dt: alpha * dt,
            sqrt_dt: dt.sqrt(),
            r: SymMatrix::zeros(p),
            dw: vec![0.0; p * p],
            m: vec![0.0; p * p],
        }
    }

    /// Fills `r` with `sqrt(|x|)`; returns the smallest eigenvalue of `x`.
    fn decompose(&mut self, x: &SymMatrix) -> Result<f64> {
        symcore::sqrt_abs_into(x, &mut self.r)
    }

    /// One Euler update in place. `decompose` must have been called with the
    /// current state first.
    fn advance<N: NoiseSource + ?Sized>(&mut self, x: &mut SymMatrix, noise: &mut N) {
        let p = self.p;
        noise.fill_standard_normal(&mut self.dw);
        for v in self.dw.iter_mut() {
            *v *= self.sqrt_dt;
        }
        let r = self.r.entries();
        for i in 0..p {
            for j in 0..p {
                let mut acc = 0.0;
                for k in 0..p {
                    acc += r[i * p + k] * self.dw[k * p + j];
                }
                self.m[i * p + j] = acc;
            }
        }
        for i in 0..p {
            for j in i..p {
                let mut val = x.get(i, j) + (self.m[i * p + j] + self.m[j * p + i]);
                if i == j {
                    val += self.alpha_dt;
                }
                x.set(i, j, val);
            }
        }
    }
}

/// Drives the matrix scheme and hands every grid state to `observe` as
/// `(node index, state, smallest eigenvalue)` without storing the path.
pub(crate) fn simulate_matrix_observed<N: NoiseSource + ?Sized, F>(
    x0: &SymMatrix,
    alpha: f64,
    grid: GridSpec,
    noise: &mut N,
    mut observe: F,
) -> Result<()>
where
    F: FnMut(usize, &SymMatrix, f64),
{
    check_alpha(alpha)?;
    if !x0.is_finite() {
        return Err(Error::InvalidInput("x0 has a non-finite entry".into()));
    }
    let mut x = x0.clone();
    let mut stepper = MatrixStepper::new(x0.dim(), alpha, grid.dt());
    for k in 0..grid.n_steps() {
        let lambda_min = stepper.decompose(&x)?;
        observe(k, &x, lambda_min);
        stepper.advance(&mut x, noise);
    }
    let lambda_min = stepper.decompose(&x)?;
    observe(grid.n_steps(), &x, lambda_min);
    Ok(())
}

/// One Euler step of the matrix scheme:
/// `x + sqrt(|x|) dW + dW^T sqrt(|x|) + alpha dt I`.
pub fn step_matrix_besq<N: NoiseSource + ?Sized>(
    x: &SymMatrix,
    alpha: f64,
    dt: f64,
    noise: &mut N,
) -> Result<SymMatrix> {
    check_alpha(alpha)?;
    check_dt(dt)?;
    let mut stepper = MatrixStepper::new(x.dim(), alpha, dt);
    stepper.decompose(x)?;
    let mut out = x.clone();
    stepper.advance(&mut out, noise);
    Ok(out)
}

/// Full trajectory of the matrix scheme on `grid`.
pub fn simulate_matrix_besq<N: NoiseSource + ?Sized>(
    x0: &SymMatrix,
    alpha: f64,
    grid: GridSpec,
    noise: &mut N,
) -> Result<MatrixPath> {
    let mut states = Vec::with_capacity(grid.n_steps() + 1);
    simulate_matrix_observed(x0, alpha, grid, noise, |_, x, _| states.push(x.clone()))?;
    Ok(MatrixPath { grid, alpha, states })
}

/// Result of one particle-system step.
#[derive(Debug, Clone)]
pub struct ParticleStep {
    /// Updated configuration, re-sorted ascending.
    pub lambdas: Vec<f64>,
    /// Pairs whose gap fell below the regularization threshold.
    pub clamp_activations: u32,
    /// The raw update left ascending order before the re-sort.
    pub order_violated: bool,
}

fn check_particle_input(lambdas: &[f64], eps_reg: f64) -> Result<()> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("particle system needs p >= 1".into()));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput("non-finite particle position".into()));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput(
            "particle positions must be sorted ascending".into(),
        ));
    }
    if !(eps_reg.is_finite() && eps_reg >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "eps_reg must be a nonnegative real, got {eps_reg}"
        )));
    }
    Ok(())
}

/// Interaction drifts `alpha + sum_{k != i} (|l_i| + |l_k|) / (l_i - l_k)`
/// with near-collision denominators clamped to `+-eps_reg`. Returns the
/// number of clamped pairs.
fn particle_drifts(
    lambdas: &[f64],
    alpha: f64,
    eps_reg: f64,
    drifts: &mut [f64],
) -> Result<u32> {
    let p = lambdas.len();
    let mut clamps = 0u32;
    for i in 0..p {
        let mut drift = alpha;
        for k in 0..p {
            if k == i {
                continue;
            }
            let gap = lambdas[i] - lambdas[k];
            let denom = if gap.abs() >= eps_reg && gap != 0.0 {
                gap
            } else if eps_reg == 0.0 {
                return Err(Error::SingularDrift(format!(
                    "particles {i} and {k} collided with regularization disabled"
                )));
            } else {
                if i < k {
                    clamps += 1;
                }
                // Equal values fall back to index order (input is sorted).
                if gap > 0.0 {
                    eps_reg
                } else if gap < 0.0 {
                    -eps_reg
                } else if i < k {
                    -eps_reg
                } else {
                    eps_reg
                }
            };
            drift += (lambdas[i].abs() + lambdas[k].abs()) / denom;
        }
        drifts[i] = drift;
    }
    Ok(clamps)
}

fn particle_update(lambdas: &mut [f64], drifts: &[f64], db: &[f64], dt: f64) -> bool {
    for i in 0..lambdas.len() {
        let l = lambdas[i];
        lambdas[i] = (l + 2.0 * l.abs().sqrt() * db[i]) + drifts[i] * dt;
    }
    let violated = lambdas.windows(2).any(|w| w[1] < w[0]);
    if violated {
        lambdas.sort_unstable_by(f64::total_cmp);
    }
    violated
}

/// One Euler step of the eigenvalue particle system; the output is
/// re-sorted ascending.
pub fn step_particles<N: NoiseSource + ?Sized>(
    lambdas: &[f64],
    alpha: f64,
    dt: f64,
    noise: &mut N,
    eps_reg: f64,
) -> Result<ParticleStep> {
    check_alpha(alpha)?;
    check_dt(dt)?;
    check_particle_input(lambdas, eps_reg)?;
    let p = lambdas.len();
    let mut drifts = vec![0.0; p];
    let clamp_activations = particle_drifts(lambdas, alpha, eps_reg, &mut drifts)?;
    let mut db = vec![0.0; p];
    noise.fill_standard_normal(&mut db);
    let sqrt_dt = dt.sqrt();
    for v in db.iter_mut() {
        *v *= sqrt_dt;
    }
    let mut out = lambdas.to_vec();
    let order_violated = particle_update(&mut out, &drifts, &db, dt);
    Ok(ParticleStep { lambdas: out, clamp_activations, order_violated })
}

/// Full trajectory of the particle system on `grid`.
pub fn simulate_particles<N: NoiseSource + ?Sized>(
    lambda0: &[f64],
    alpha: f64,
    grid: GridSpec,
    noise: &mut N,
    eps_reg: f64,
) -> Result<VectorPath> {
    check_alpha(alpha)?;
    check_particle_input(lambda0, eps_reg)?;
    let p = lambda0.len();
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let mut states = Vec::with_capacity(grid.n_steps() + 1);
    let mut clamp_counts = Vec::with_capacity(grid.n_steps());
    let mut order_violations = 0u64;
    let mut current = lambda0.to_vec();
    let mut drifts = vec![0.0; p];
    let mut db = vec![0.0; p];
    states.push(current.clone());
    for _ in 0..grid.n_steps() {
        let clamps = particle_drifts(&current, alpha, eps_reg, &mut drifts)?;
        noise.fill_standard_normal(&mut db);
        for v in db.iter_mut() {
            *v *= sqrt_dt;
        }
        if particle_update(&mut current, &drifts, &db, dt) {
            order_violations += 1;
        }
        clamp_counts.push(clamps);
        states.push(current.clone());
    }
    Ok(VectorPath {
        grid,
        alpha,
        eps_reg,
        states,
        clamp_counts,
        order_violations,
    })
}

/// Euler scheme for the scalar process
/// `dx = 2 sqrt(|x|) dB + delta dt`, started at `x0 >= 0`.
pub fn simulate_scalar_besq<N: NoiseSource + ?Sized>(
    x0: f64,
    delta: f64,
    grid: GridSpec,
    noise: &mut N,
) -> Result<ScalarPath> {
    check_alpha(delta)?;
    if !(x0.is_finite() && x0 >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "scalar start must be a nonnegative real, got {x0}"
        )));
    }
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let delta_dt = delta * dt;
    let mut values = Vec::with_capacity(grid.n_steps() + 1);
    let mut x = x0;
    let mut z = [0.0];
    values.push(x);
    for _ in 0..grid.n_steps() {
        noise.fill_standard_normal(&mut z);
        let db = z[0] * sqrt_dt;
        x = (x + 2.0 * x.abs().sqrt() * db) + delta_dt;
        values.push(x);
    }
    Ok(ScalarPath { grid, delta, values })
}

/// Exact-law sampler for negative dimension from the origin: the process with
/// dimension `delta < 0` started at 0 equals in law the negation of the
/// nonnegative process with dimension `-delta` started at 0. The inner path
/// is drawn with exact transition sampling (Poisson-mixed gamma), so every
/// output value is `<= 0` surely, not just up to discretization error.
pub fn simulate_scalar_besq_exact_law(
    x0: f64,
    delta: f64,
    grid: GridSpec,
    stream: &mut RngStream,
) -> Result<ScalarPath> {
    check_alpha(delta)?;
    if delta >= 0.0 {
        return Err(Error::InvalidInput(format!(
            "exact-law mode is for negative dimension, got delta = {delta}"
        )));
    }
    if x0 != 0.0 {
        return Err(Error::InvalidInput(format!(
            "exact-law mode starts from 0, got x0 = {x0}"
        )));
    }
    let dim = -delta;
    let dt = grid.dt();
    let mut values = Vec::with_capacity(grid.n_steps() + 1);
    let mut y = 0.0;
    values.push(0.0);
    for _ in 0..grid.n_steps() {
        let k = stream.poisson(y / (2.0 * dt));
        let shape = 0.5 * dim + k;
        y = stream.gamma(shape, 2.0 * dt);
        values.push(if y == 0.0 { 0.0 } else { -y });
    }
    Ok(ScalarPath { grid, delta, values })
}

/// Runs the particle system and the scalar comparison process
/// `dl = 2 sqrt(|l|) dB_1 + (alpha - (p - 1)) dt` on the *same* increments:
/// the scalar consumes exactly the draw assigned to the lowest particle at
/// each step. Requires `lambda0` sorted with `lambda0[0] >= 0`.
pub fn simulate_coupled_comparison<N: NoiseSource + ?Sized>(
    lambda0: &[f64],
    alpha: f64,
    grid: GridSpec,
    noise: &mut N,
    eps_reg: f64,
) -> Result<(VectorPath, ScalarPath)> {
    check_alpha(alpha)?;
    check_particle_input(lambda0, eps_reg)?;
    if lambda0[0] < 0.0 {
        return Err(Error::InvalidInput(format!(
            "comparison needs lambda_1(0) >= 0, got {}",
            lambda0[0]
        )));
    }
    let p = lambda0.len();
    let delta = alpha - (p as f64 - 1.0);
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let delta_dt = delta * dt;

    let mut states = Vec::with_capacity(grid.n_steps() + 1);
    let mut clamp_counts = Vec::with_capacity(grid.n_steps());
    let mut order_violations = 0u64;
    let mut scalar_values = Vec::with_capacity(grid.n_steps() + 1);

    let mut current = lambda0.to_vec();
    let mut tilde = lambda0[0];
    let mut drifts = vec![0.0; p];
    let mut db = vec![0.0; p];
    states.push(current.clone());
    scalar_values.push(tilde);

    for _ in 0..grid.n_steps() {
        let clamps = particle_drifts(&current, alpha, eps_reg, &mut drifts)?;
        noise.fill_standard_normal(&mut db);
        for v in db.iter_mut() {
            *v *= sqrt_dt;
        }
        tilde = (tilde + 2.0 * tilde.abs().sqrt() * db[0]) + delta_dt;
        if particle_update(&mut current, &drifts, &db, dt) {
            order_violations += 1;
        }
        clamp_counts.push(clamps);
        states.push(current.clone());
        scalar_values.push(tilde);
    }

    Ok((
        VectorPath {
            grid,
            alpha,
            eps_reg,
            states,
            clamp_counts,
            order_violations,
        },
        ScalarPath { grid, delta, values: scalar_values },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{FixedNoise, ZeroNoise};
    use crate::symcore::spectral_apply;

    #[test]
    fn grid_accepts_power_of_two_steps() {
        let g = GridSpec::new(1.0, DEFAULT_DT).unwrap();
        assert_eq!(g.n_steps(), 1024);
        assert_eq!(g.time(1024), 1.0);
        assert_eq!(g.first_node_at(0.1), 103);
    }

    #[test]
    fn grid_rejects_non_dividing_or_nonpositive_steps() {
        assert!(matches!(GridSpec::new(1.0, 0.3), Err(Error::InvalidGrid(_))));
        assert!(GridSpec::new(1.0, 0.0).is_err());
        assert!(GridSpec::new(1.0, -0.1).is_err());
        assert!(GridSpec::new(0.0, 0.1).is_err());
        assert!(GridSpec::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn brownian_increment_scales_and_validates() {
        let dw = brownian_matrix_increment(3, 0.25, &mut ZeroNoise).unwrap();
        assert_eq!(dw.len(), 9);
        assert!(dw.iter().all(|&v| v == 0.0));
        let dw = brownian_matrix_increment(1, 0.25, &mut FixedNoise::new(vec![2.0])).unwrap();
        assert_eq!(dw[0], 1.0); // 2 * sqrt(0.25)
        assert!(brownian_matrix_increment(2, 0.0, &mut ZeroNoise).is_err());
    }

    #[test]
    fn matrix_step_drift_only_is_exact() {
        let x = SymMatrix::from_diagonal(&[1.0, 4.0]);
        let next = step_matrix_besq(&x, 2.0, 0.25, &mut ZeroNoise).unwrap();
        assert_eq!(next.get(0, 0), 1.5);
        assert_eq!(next.get(1, 1), 4.5);
        assert_eq!(next.get(0, 1), 0.0);
    }

    #[test]
    fn matrix_step_matches_manual_formula() {
        let x = SymMatrix::from_entries(2, vec![1.0, 0.25, 0.25, 2.0]).unwrap();
        let z = vec![0.3, -1.2, 0.7, 0.05];
        let (alpha, dt) = (1.5, 0.125);
        let step = step_matrix_besq(&x, alpha, dt, &mut FixedNoise::new(z.clone())).unwrap();

        let dw = brownian_matrix_increment(2, dt, &mut FixedNoise::new(z)).unwrap();
        let r = spectral_apply(&x, |l| l.abs().sqrt()).unwrap();
        let mut m = [0.0; 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    m[i * 2 + j] += r.get(i, k) * dw[k * 2 + j];
                }
            }
        }
        for i in 0..2 {
            for j in i..2 {
                let mut expect = x.get(i, j) + (m[i * 2 + j] + m[j * 2 + i]);
                if i == j {
                    expect += alpha * dt;
                }
                assert_eq!(step.get(i, j).to_bits(), expect.to_bits());
            }
        }
    }

    #[test]
    fn particle_step_drift_only_frozen_values() {
        // alpha + (|1| + |3|)/(1 - 3) = 0 for the low particle,
        // alpha + 4/2 = 4 for the high one.
        let step = step_particles(&[1.0, 3.0], 2.0, 0.1, &mut ZeroNoise, 0.0).unwrap();
        assert_eq!(step.lambdas, vec![1.0, 3.4]);
        assert_eq!(step.clamp_activations, 0);
        assert!(!step.order_violated);
    }

    #[test]
    fn particle_step_requires_sorted_finite_input() {
        assert!(step_particles(&[2.0, 1.0], 1.0, 0.1, &mut ZeroNoise, 0.0).is_err());
        assert!(step_particles(&[f64::NAN], 1.0, 0.1, &mut ZeroNoise, 0.0).is_err());
        assert!(step_particles(&[], 1.0, 0.1, &mut ZeroNoise, 0.0).is_err());
    }

    #[test]
    fn exact_collision_without_regularization_is_singular() {
        let err = step_particles(&[2.0, 2.0], 1.0, 0.1, &mut ZeroNoise, 0.0).unwrap_err();
        assert!(matches!(err, Error::SingularDrift(_)));
    }

    #[test]
    fn near_collision_clamps_are_counted_once_per_pair() {
        let step = step_particles(&[1.0, 1.0 + 1e-12], 1.0, 0.1, &mut ZeroNoise, 1e-8).unwrap();
        assert_eq!(step.clamp_activations, 1);
        // Clamped symmetric repulsion: the pair is pushed apart.
        assert!(step.lambdas[1] - step.lambdas[0] > 1e-12);
    }

    #[test]
    fn scalar_zero_dimension_from_zero_stays_zero() {
        let grid = GridSpec::new(1.0, 0.0625).unwrap();
        let mut stream = RngStream::new(9, 0);
        let path = simulate_scalar_besq(0.0, 0.0, grid, &mut stream).unwrap();
        assert!(path.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_rejects_negative_start() {
        let grid = GridSpec::new(1.0, 0.25).unwrap();
        assert!(simulate_scalar_besq(-1.0, 1.0, grid, &mut ZeroNoise).is_err());
    }

    #[test]
    fn exact_law_is_surely_nonpositive() {
        let grid = GridSpec::new(1.0, DEFAULT_DT).unwrap();
        let mut stream = RngStream::new(5, 3);
        let path = simulate_scalar_besq_exact_law(0.0, -1.0, grid, &mut stream).unwrap();
        assert_eq!(path.values()[0], 0.0);
        assert!(path.values()[1..].iter().all(|&v| v < 0.0));
    }

    #[test]
    fn exact_law_rejects_wrong_regime() {
        let grid = GridSpec::new(1.0, 0.25).unwrap();
        let mut stream = RngStream::new(5, 3);
        assert!(simulate_scalar_besq_exact_law(0.0, 1.0, grid, &mut stream).is_err());
        assert!(simulate_scalar_besq_exact_law(0.5, -1.0, grid, &mut stream).is_err());
    }

    #[test]
    fn dimension_one_schemes_coincide_bitwise() {
        // For p = 1 the matrix scheme, the particle system, and the scalar
        // Euler scheme are the same recursion and must agree to the bit.
        let grid = GridSpec::new(1.0, 0.0625).unwrap();
        let (alpha, x0) = (1.7, 0.3);

        let mut s1 = RngStream::new(99, 5);
        let matrix = simulate_matrix_besq(&SymMatrix::from_diagonal(&[x0]), alpha, grid, &mut s1)
            .unwrap();
        let mut s2 = RngStream::new(99, 5);
        let particles = simulate_particles(&[x0], alpha, grid, &mut s2, 0.0).unwrap();
        let mut s3 = RngStream::new(99, 5);
        let scalar = simulate_scalar_besq(x0, alpha, grid, &mut s3).unwrap();

        for k in 0..=grid.n_steps() {
            let m = matrix.state(k).get(0, 0);
            let v = particles.state(k)[0];
            let s = scalar.values()[k];
            assert_eq!(m.to_bits(), v.to_bits(), "node {k}");
            assert_eq!(m.to_bits(), s.to_bits(), "node {k}");
        }
    }

    #[test]
    fn coupled_comparison_coincides_for_p_equal_one() {
        let grid = GridSpec::new(1.0, 0.0625).unwrap();
        let mut stream = RngStream::new(17, 2);
        let (particles, tilde) =
            simulate_coupled_comparison(&[0.4], 1.3, grid, &mut stream, 0.0).unwrap();
        for k in 0..=grid.n_steps() {
            assert_eq!(particles.state(k)[0].to_bits(), tilde.values()[k].to_bits());
        }
    }

    #[test]
    fn coupled_comparison_drift_only() {
        // With increments forced to zero: the comparison process grows
        // linearly at rate alpha - 1 while the low particle starts flat,
        // and domination holds along the whole path.
        let grid = GridSpec::new(1.0, DEFAULT_DT).unwrap();
        let (particles, tilde) =
            simulate_coupled_comparison(&[1.0, 3.0], 2.0, grid, &mut ZeroNoise, 0.0).unwrap();
        assert_eq!(particles.state(1)[0], 1.0);
        assert_eq!(tilde.values()[1], 1.0 + grid.dt());
        for k in 1..=grid.n_steps() {
            assert!(tilde.values()[k] > tilde.values()[k - 1]);
            assert!(particles.state(k)[0] <= tilde.values()[k] + 1e-12);
        }
    }

    #[test]
    fn coupled_comparison_requires_nonnegative_lowest() {
        let grid = GridSpec::new(1.0, 0.25).unwrap();
        assert!(simulate_coupled_comparison(&[-0.5, 1.0], 1.0, grid, &mut ZeroNoise, 0.0).is_err());
    }

    #[test]
    fn replay_is_bit_identical_across_simulators() {
        let grid = GridSpec::new(0.5, 0.03125).unwrap();
        let x0 = SymMatrix::from_diagonal(&[1.0, 0.5]);

        let mut a = RngStream::new(4, 11);
        let mut b = RngStream::new(4, 11);
        let pa = simulate_matrix_besq(&x0, 2.5, grid, &mut a).unwrap();
        let pb = simulate_matrix_besq(&x0, 2.5, grid, &mut b).unwrap();
        for (sa, sb) in pa.states().iter().zip(pb.states()) {
            for (x, y) in sa.entries().iter().zip(sb.entries()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }

        let mut a = RngStream::new(4, 12);
        let mut b = RngStream::new(4, 12);
        let va = simulate_particles(&[0.0, 1.0], 0.5, grid, &mut a, DEFAULT_EPS_REG).unwrap();
        let vb = simulate_particles(&[0.0, 1.0], 0.5, grid, &mut b, DEFAULT_EPS_REG).unwrap();
        assert_eq!(va.states(), vb.states());

        let mut a = RngStream::new(4, 13);
        let mut b = RngStream::new(4, 13);
        let sa = simulate_scalar_besq_exact_law(0.0, -0.5, grid, &mut a).unwrap();
        let sb = simulate_scalar_besq_exact_law(0.0, -0.5, grid, &mut b).unwrap();
        assert_eq!(sa.values(), sb.values());
    }

    #[test]
    fn path_types_record_origin_and_shapes() {
        let grid = GridSpec::new(0.25, 0.0625).unwrap();
        let x0 = SymMatrix::from_diagonal(&[2.0, 3.0]);
        let mut stream = RngStream::new(1, 0);
        let path = simulate_matrix_besq(&x0, 1.0, grid, &mut stream).unwrap();
        assert_eq!(path.states().len(), grid.n_steps() + 1);
        assert_eq!(path.origin(), &x0);

        let mut stream = RngStream::new(1, 1);
        let vp = simulate_particles(&[0.5, 1.5], 1.0, grid, &mut stream, 1e-8).unwrap();
        assert_eq!(vp.states().len(), 5);
        assert_eq!(vp.clamp_counts().len(), 4);
        for s in vp.states() {
            assert!(s[0] <= s[1]);
        }
    }

    #[test]
    fn csv_dumps_have_expected_shape() {
        let grid = GridSpec::new(0.125, 0.0625).unwrap();
        let x0 = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let path = simulate_matrix_besq(&x0, 1.0, grid, &mut ZeroNoise).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x11,x12,x22");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,1,0,2"));

        let vp = simulate_particles(&[0.0, 1.0], 1.0, grid, &mut ZeroNoise, 1e-8).unwrap();
        let mut buf = Vec::new();
        vp.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,lambda1,lambda2\n"));

        let sp = simulate_scalar_besq(1.0, 2.0, grid, &mut ZeroNoise).unwrap();
        let mut buf = Vec::new();
        sp.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,x\n"));
    }
}
