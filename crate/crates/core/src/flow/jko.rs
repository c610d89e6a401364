//! Minimizing-movement step `argmin_nu F(nu) + W2(nu, mu)^2 / (2 tau)`.
//!
//! Measures are parametrised by the edges `x_0 < ... < x_M` of cells carrying
//! fixed masses `w_k`, with the mass spread uniformly inside each cell. This
//! is the quantile parametrisation on a fixed probability grid: the quantile
//! function is piecewise linear with nodes `x_j`. Monotonicity is kept by the
//! line search (every accepted iterate has positive cell widths).
//!
//! Both measures share the same mass partition, so the monotone map is the
//! piecewise-linear interpolation of the edge displacements `d = x - y` and
//!
//! ```text
//! W2^2 = sum_k w_k (d_k^2 + d_k d_{k+1} + d_{k+1}^2) / 3
//! ```
//!
//! exactly. The objective is smooth in `x`; its Hessian is tridiagonal minus
//! the rank-one interaction term, so Newton steps cost `O(M)` via
//! Sherman-Morrison.

use crate::measure::transport::{self, Segment};
use crate::measure::{Grid, GridMeasure};
use crate::numerics::solve_tridiagonal;
use crate::potential::PotentialSpec;
use crate::{Error, Result};

/// Leading and trailing cells lighter than this are dropped.
const TRIM_MASS: f64 = 1e-18;
/// Stationarity target on `max_j |dE/dx_j| / c_j` (a velocity).
const GRAD_TOL: f64 = 1e-8;
const MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianMeasure {
    edges: Vec<f64>,
    masses: Vec<f64>,
    half_width: f64,
}

impl LagrangianMeasure {
    /// Cells of `mu` as Lagrangian cells; interior cells lighter than the trim
    /// threshold are raised to it so every cell has positive mass.
    pub fn from_grid(mu: &GridMeasure) -> Self {
        let g = mu.grid();
        let p = mu.masses();
        let first = p.iter().position(|&w| w > TRIM_MASS).unwrap_or(0);
        let last = p.iter().rposition(|&w| w > TRIM_MASS).unwrap_or(p.len() - 1);
        let raw: Vec<f64> = p[first..=last].iter().map(|&w| w.max(TRIM_MASS)).collect();
        let total: f64 = raw.iter().sum();
        Self {
            edges: (first..=last + 1).map(|k| g.edge(k)).collect(),
            masses: raw.iter().map(|w| w / total).collect(),
            half_width: g.half_width(),
        }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn segments(&self) -> Vec<Segment> {
        self.masses
            .iter()
            .enumerate()
            .map(|(k, &w)| Segment::new(self.edges[k], self.edges[k + 1], w))
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(k, w)| w * 0.5 * (self.edges[k] + self.edges[k + 1]))
            .sum()
    }

    /// `sum w log(w / dx) + sum w Psi(midpoint) - (J/2) m^2`.
    pub fn free_energy(&self, spec: &PotentialSpec) -> f64 {
        free_energy_at(spec, &self.masses, &self.edges)
    }

    pub fn wasserstein2(&self, other: &LagrangianMeasure) -> f64 {
        transport::wasserstein2(&self.segments(), &other.segments())
    }

    pub fn wasserstein2_to_grid(&self, mu: &GridMeasure) -> f64 {
        transport::wasserstein2(&self.segments(), &mu.segments())
    }

    /// Rebins onto `grid` by overlap of each cell with the grid cells.
    pub fn to_grid(&self, grid: Grid) -> GridMeasure {
        let n = grid.len();
        let mut out = vec![0.0; n];
        for (k, &w) in self.masses.iter().enumerate() {
            let (a, b) = (self.edges[k], self.edges[k + 1]);
            let (ia, ib) = (grid.cell_of(a), grid.cell_of(b));
            if ia == ib {
                out[ia] += w;
                continue;
            }
            let density = w / (b - a);
            for (i, slot) in out.iter_mut().enumerate().take(ib + 1).skip(ia) {
                let lo = a.max(grid.edge(i));
                let hi = b.min(grid.edge(i + 1));
                if hi > lo {
                    *slot += density * (hi - lo);
                }
            }
        }
        GridMeasure::normalized(grid, out).expect("rebinned masses are positive")
    }

    /// One minimizing-movement step of length `tau`.
    pub fn jko_step(&self, spec: &PotentialSpec, tau: f64) -> Result<LagrangianMeasure> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::param("tau", format!("must be > 0, got {tau}")));
        }
        let problem = Problem {
            spec,
            w: &self.masses,
            y: &self.edges,
            tau,
            half_width: self.half_width,
        };
        let edges = problem.solve()?;
        Ok(Self {
            edges,
            masses: self.masses.clone(),
            half_width: self.half_width,
        })
    }
}

/// JKO step on a grid measure, rebinned onto the same grid.
pub fn jko_step(spec: &PotentialSpec, mu: &GridMeasure, tau: f64) -> Result<GridMeasure> {
    Ok(LagrangianMeasure::from_grid(mu).jko_step(spec, tau)?.to_grid(mu.grid()))
}

/// `n` JKO steps of length `tau` from `mu`, kept in Lagrangian form.
pub fn jko_flow(spec: &PotentialSpec, mu: &GridMeasure, tau: f64, n: usize) -> Result<LagrangianMeasure> {
    let mut lag = LagrangianMeasure::from_grid(mu);
    for _ in 0..n {
        lag = lag.jko_step(spec, tau)?;
    }
    Ok(lag)
}

fn free_energy_at(spec: &PotentialSpec, w: &[f64], x: &[f64]) -> f64 {
    let mut entropy = 0.0;
    let mut potential = 0.0;
    let mut m = 0.0;
    for (k, &wk) in w.iter().enumerate() {
        let mid = 0.5 * (x[k] + x[k + 1]);
        entropy += wk * (wk / (x[k + 1] - x[k])).ln();
        potential += wk * spec.psi(mid);
        m += wk * mid;
    }
    entropy + potential - 0.5 * spec.j * m * m
}

struct Problem<'a> {
    spec: &'a PotentialSpec,
    w: &'a [f64],
    y: &'a [f64],
    tau: f64,
    half_width: f64,
}

impl Problem<'_> {
    fn objective(&self, x: &[f64]) -> f64 {
        let mut transport = 0.0;
        for (k, &wk) in self.w.iter().enumerate() {
            let (d0, d1) = (x[k] - self.y[k], x[k + 1] - self.y[k + 1]);
            transport += wk * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
        }
        free_energy_at(self.spec, self.w, x) + transport / (2.0 * self.tau)
    }

    fn feasible(&self, x: &[f64]) -> bool {
        x[0] >= -self.half_width && x[x.len() - 1] <= self.half_width && x.windows(2).all(|p| p[1] > p[0])
    }

    /// `c_j = (w_{j-1} + w_j) / 2`, the mass attached to edge `j`.
    fn edge_mass(&self) -> Vec<f64> {
        let m = self.w.len();
        (0..=m)
            .map(|j| {
                let left = if j > 0 { self.w[j - 1] } else { 0.0 };
                let right = if j < m { self.w[j] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect()
    }

    fn gradient(&self, x: &[f64], c: &[f64]) -> Vec<f64> {
        let m = self.w.len();
        let mean: f64 = (0..m).map(|k| self.w[k] * 0.5 * (x[k] + x[k + 1])).sum();
        let mut g: Vec<f64> = c.iter().map(|cj| -self.spec.j * mean * cj).collect();
        let s = 1.0 / (2.0 * self.tau);
        for k in 0..m {
            let wk = self.w[k];
            let dx = x[k + 1] - x[k];
            let mid = 0.5 * (x[k] + x[k + 1]);
            let (d0, d1) = (x[k] - self.y[k], x[k + 1] - self.y[k + 1]);
            let force = 0.5 * wk * self.spec.dpsi(mid);
            g[k] += wk / dx + force + s * wk * (2.0 * d0 + d1) / 3.0;
            g[k + 1] += -wk / dx + force + s * wk * (d0 + 2.0 * d1) / 3.0;
        }
        g
    }

    /// Tridiagonal part of the Hessian as `(lower, diag, upper)`.
    fn hessian(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let m = self.w.len();
        let mut lower = vec![0.0; m + 1];
        let mut diag = vec![0.0; m + 1];
        let mut upper = vec![0.0; m + 1];
        for k in 0..m {
            let wk = self.w[k];
            let dx = x[k + 1] - x[k];
            let ent = wk / (dx * dx);
            let pot = 0.25 * wk * self.spec.ddpsi(0.5 * (x[k] + x[k + 1]));
            let tr = wk / (6.0 * self.tau);
            diag[k] += ent + pot + 2.0 * tr;
            diag[k + 1] += ent + pot + 2.0 * tr;
            upper[k] += -ent + pot + tr;
            lower[k + 1] += -ent + pot + tr;
        }
        (lower, diag, upper)
    }

    /// Newton direction for `T - J c c^T`, or `None` if it is not a descent direction.
    fn newton_direction(&self, x: &[f64], g: &[f64], c: &[f64]) -> Option<Vec<f64>> {
        let (lower, diag, upper) = self.hessian(x);
        let tg = solve_tridiagonal(&lower, &diag, &upper, g)?;
        let tc = solve_tridiagonal(&lower, &diag, &upper, c)?;
        let ctc: f64 = c.iter().zip(&tc).map(|(a, b)| a * b).sum();
        let ctg: f64 = c.iter().zip(&tg).map(|(a, b)| a * b).sum();
        let denom = 1.0 - self.spec.j * ctc;
        if !(denom > 0.0) {
            return None;
        }
        let factor = self.spec.j * ctg / denom;
        let p: Vec<f64> = tg.iter().zip(&tc).map(|(a, b)| -(a + factor * b)).collect();
        let slope: f64 = p.iter().zip(g).map(|(a, b)| a * b).sum();
        (slope < 0.0 && p.iter().all(|v| v.is_finite())).then_some(p)
    }

    fn solve(&self) -> Result<Vec<f64>> {
        let c = self.edge_mass();
        let mut x = self.y.to_vec();
        let mut energy = self.objective(&x);
        let mut residual = f64::INFINITY;
        for _ in 0..MAX_ITERS {
            let g = self.gradient(&x, &c);
            residual = g.iter().zip(&c).map(|(a, b)| (a / b).abs()).fold(0.0, f64::max);
            if residual <= GRAD_TOL {
                return Ok(x);
            }
            let p = self.newton_direction(&x, &g, &c).unwrap_or_else(|| {
                // mass-scaled steepest descent
                g.iter().zip(&c).map(|(a, b)| -self.tau * a / b).collect()
            });
            let slope: f64 = p.iter().zip(&g).map(|(a, b)| a * b).sum();
            let slack = 1e-13 * (1.0 + energy.abs());
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + alpha * b).collect();
                if self.feasible(&trial) {
                    let e = self.objective(&trial);
                    if e <= energy + 1e-4 * alpha * slope + slack {
                        x = trial;
                        energy = e;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Err(Error::JkoNotConverged {
            iterations: MAX_ITERS,
            residual,
        })
    }
}
