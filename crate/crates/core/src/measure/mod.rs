//! Probability measures on a uniform, symmetric grid of `[-L, L]`.
//!
//! A [`GridMeasure`] stores cell masses `p_i`; within a cell the mass is
//! spread uniformly, so the density is `rho_i = p_i / dz`. Entropy, transport
//! and the Fokker-Planck scheme all use this same piecewise-constant reading.

pub mod io;
pub mod transport;

use crate::numerics::{mirror_odd_dot, mirror_sum};
use crate::potential::PotentialSpec;
use crate::{Error, Result};

pub use transport::Segment;

/// Cells below this mass are treated as vacuum in log-density operations
/// (the density floor is `MASS_FLOOR / dz`).
pub const MASS_FLOOR: f64 = 1e-14;

/// Uniform grid of `n` cells on `[-L, L]`; `n` is even so that `0` is a cell edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("half_width", format!("must be > 0, got {half_width}")));
        }
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::param("n", format!("cell count must be even and >= 16, got {n}")));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dz(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Index of the mirror cell under `z -> -z`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    /// Cell center; `center(mirror(i)) == -center(i)` exactly.
    pub fn center(&self, i: usize) -> f64 {
        let half = self.n / 2;
        if i >= half {
            ((i - half) as f64 + 0.5) * self.dz()
        } else {
            -self.center(self.mirror(i))
        }
    }

    /// Left edge of cell `k` (`k == n` gives the right end `L`).
    pub fn edge(&self, k: usize) -> f64 {
        let half = self.n / 2;
        if k >= half {
            if k == self.n {
                self.half_width
            } else {
                (k - half) as f64 * self.dz()
            }
        } else {
            -self.edge(self.n - k)
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }

    /// Cell containing `x`, clipped to the domain. Mirror-consistent except at `x == 0`.
    pub fn cell_of(&self, x: f64) -> usize {
        let half = self.n / 2;
        let k = ((x.abs() / self.dz()).floor() as usize).min(half - 1);
        if x >= 0.0 {
            half + k
        } else {
            half - 1 - k
        }
    }

    /// Same grid with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.half_width, self.n * factor)
    }
}

/// A probability measure on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure {
    grid: Grid,
    masses: Vec<f64>,
}

impl GridMeasure {
    /// Validates non-negativity and unit total mass (to `1e-10`).
    pub fn from_masses(grid: Grid, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != grid.len() {
            return Err(Error::param(
                "masses",
                format!("expected {} cells, got {}", grid.len(), masses.len()),
            ));
        }
        if let Some(p) = masses.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::param("masses", format!("negative or non-finite mass {p}")));
        }
        let total = mirror_sum(&masses);
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::param("masses", format!("total mass {total} differs from 1")));
        }
        Ok(Self { grid, masses })
    }

    /// Divides by the total; rejects an all-zero or non-finite input.
    pub fn normalized(grid: Grid, mut masses: Vec<f64>) -> Result<Self> {
        if masses.len() != grid.len() {
            return Err(Error::param(
                "masses",
                format!("expected {} cells, got {}", grid.len(), masses.len()),
            ));
        }
        if masses.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::param("masses", "negative or non-finite mass"));
        }
        let total = mirror_sum(&masses);
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Underflow);
        }
        masses.iter_mut().for_each(|p| *p /= total);
        Ok(Self { grid, masses })
    }

    pub(crate) fn from_raw(grid: Grid, masses: Vec<f64>) -> Self {
        debug_assert_eq!(grid.len(), masses.len());
        Self { grid, masses }
    }

    pub fn point_mass(grid: Grid, cell: usize) -> Self {
        let mut masses = vec![0.0; grid.len()];
        masses[cell] = 1.0;
        Self { grid, masses }
    }

    /// Uniform density on the cells whose centers lie in `[lo, hi]`.
    pub fn uniform(grid: Grid, lo: f64, hi: f64) -> Result<Self> {
        let masses = (0..grid.len())
            .map(|i| {
                let z = grid.center(i);
                if z >= lo && z <= hi {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Self::normalized(grid, masses)
    }

    /// Binned Gaussian `N(mean, var)`, renormalised to the domain.
    ///
    /// Requires `|mean| + 4 sqrt(var) < L`. Cell masses are tail-probability
    /// differences, so the result is exact under `mean -> -mean` reflection.
    pub fn gaussian(grid: Grid, mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0 && var.is_finite()) {
            return Err(Error::param("var", format!("must be > 0, got {var}")));
        }
        let sd = var.sqrt();
        if mean.abs() + 4.0 * sd >= grid.half_width() {
            return Err(Error::param(
                "mean/var",
                format!(
                    "|mean| + 4 sd = {} does not fit in L = {}",
                    mean.abs() + 4.0 * sd,
                    grid.half_width()
                ),
            ));
        }
        let scale = sd * std::f64::consts::SQRT_2;
        // upper tail P(X > x) and lower tail P(X < x)
        let upper = |x: f64| 0.5 * libm::erfc((x - mean) / scale);
        let lower = |x: f64| 0.5 * libm::erfc((mean - x) / scale);
        let masses = (0..grid.len())
            .map(|i| {
                let (a, b) = (grid.edge(i), grid.edge(i + 1));
                if a >= mean {
                    upper(a) - upper(b)
                } else if b <= mean {
                    lower(b) - lower(a)
                } else {
                    1.0 - lower(a) - upper(b)
                }
            })
            .collect();
        Self::normalized(grid, masses)
    }

    /// Histogram of sample points (clipped to the domain), normalised to mass 1.
    pub fn from_samples(grid: Grid, points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("points", "empty sample"));
        }
        let mut counts = vec![0u64; grid.len()];
        for &x in points {
            if !x.is_finite() {
                return Err(Error::param("points", "non-finite sample"));
            }
            counts[grid.cell_of(x)] += 1;
        }
        let n = points.len() as f64;
        Ok(Self {
            grid,
            masses: counts.into_iter().map(|c| c as f64 / n).collect(),
        })
    }

    /// Convex combination `sum_k w_k mu_k` with weights normalised to 1.
    pub fn mixture(parts: &[(f64, &GridMeasure)]) -> Result<Self> {
        let grid = parts
            .first()
            .ok_or_else(|| Error::param("parts", "empty mixture"))?
            .1
            .grid;
        let mut masses = vec![0.0; grid.len()];
        for (w, mu) in parts {
            if mu.grid != grid {
                return Err(Error::GridMismatch);
            }
            if !(*w >= 0.0) {
                return Err(Error::param("weights", "mixture weights must be >= 0"));
            }
            for (m, p) in masses.iter_mut().zip(&mu.masses) {
                *m += w * p;
            }
        }
        Self::normalized(grid, masses)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn into_masses(self) -> Vec<f64> {
        self.masses
    }

    pub fn total_mass(&self) -> f64 {
        mirror_sum(&self.masses)
    }

    pub fn density(&self, i: usize) -> f64 {
        self.masses[i] / self.grid.dz()
    }

    /// Mean; negated exactly by [`reflect`](Self::reflect).
    pub fn mean(&self) -> f64 {
        mirror_odd_dot(&self.masses, &self.grid.centers())
    }

    /// `sum_i p_i |z_i|^power`.
    pub fn abs_moment(&self, power: f64) -> f64 {
        let terms: Vec<f64> = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.grid.center(i).abs().powf(power))
            .collect();
        mirror_sum(&terms)
    }

    pub fn second_moment(&self) -> f64 {
        self.abs_moment(2.0)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }

    /// Image under `z -> -z`.
    pub fn reflect(&self) -> Self {
        Self {
            grid: self.grid,
            masses: self.masses.iter().rev().copied().collect(),
        }
    }

    /// Translation by `cells` grid cells; mass pushed past the boundary is
    /// accumulated in the boundary cell.
    pub fn shift(&self, cells: isize) -> Self {
        let n = self.grid.len() as isize;
        let mut masses = vec![0.0; self.grid.len()];
        for (i, p) in self.masses.iter().enumerate() {
            let j = (i as isize + cells).clamp(0, n - 1) as usize;
            masses[j] += p;
        }
        Self {
            grid: self.grid,
            masses,
        }
    }

    /// Piecewise-uniform segments (one per cell) for transport computations.
    pub fn segments(&self) -> Vec<Segment> {
        (0..self.grid.len())
            .map(|i| Segment::new(self.grid.edge(i), self.grid.edge(i + 1), self.masses[i]))
            .collect()
    }

    /// Quantile function of the piecewise-uniform CDF at `u in [0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &p) in self.masses.iter().enumerate() {
            if p > 0.0 && acc + p >= u {
                let frac = ((u - acc) / p).clamp(0.0, 1.0);
                return self.grid.edge(i) + frac * self.grid.dz();
            }
            acc += p;
        }
        // rounding left u above the accumulated total: return the last occupied edge
        let last = self
            .masses
            .iter()
            .rposition(|p| *p > 0.0)
            .unwrap_or(self.grid.len() - 1);
        self.grid.edge(last + 1)
    }

    /// Exact `W2` between the piecewise-uniform readings of two measures on the same grid.
    pub fn wasserstein2(&self, other: &GridMeasure) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(transport::wasserstein2(&self.segments(), &other.segments()))
    }

    /// `sum_i p_i log(p_i / dz)` with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        let dz = self.grid.dz();
        let terms: Vec<f64> = self
            .masses
            .iter()
            .map(|&p| if p > 0.0 { p * (p / dz).ln() } else { 0.0 })
            .collect();
        mirror_sum(&terms)
    }

    pub fn potential_energy(&self, spec: &PotentialSpec) -> f64 {
        let terms: Vec<f64> = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, p)| p * spec.psi(self.grid.center(i)))
            .collect();
        mirror_sum(&terms)
    }

    /// `F = sum p log rho + sum p Psi - (J/2) m^2`.
    pub fn free_energy(&self, spec: &PotentialSpec) -> f64 {
        let m = self.mean();
        self.entropy() + self.potential_energy(spec) - 0.5 * spec.j * m * m
    }

    /// `H(self | other) = sum p log(p / q)`; `+inf` when `self` is not absolutely continuous.
    pub fn relative_entropy(&self, other: &GridMeasure) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut terms = Vec::with_capacity(self.masses.len());
        for (&p, &q) in self.masses.iter().zip(&other.masses) {
            if p > 0.0 {
                if q <= 0.0 {
                    return Ok(f64::INFINITY);
                }
                terms.push(p * (p / q).ln());
            } else {
                terms.push(0.0);
            }
        }
        Ok(mirror_sum(&terms))
    }

    /// Squared metric slope `sum_i p_i |D_i log rho + Psi'(z_i) - J m|^2`.
    ///
    /// `D_i` is a centered difference where both neighbours are above the
    /// mass floor, one-sided where only one is; isolated cells contribute 0.
    pub fn metric_slope_sq(&self, spec: &PotentialSpec) -> f64 {
        let n = self.grid.len();
        let dz = self.grid.dz();
        let jm = spec.j * self.mean();
        let alive = |i: usize| self.masses[i] > MASS_FLOOR;
        let lg = |i: usize| self.masses[i].ln();
        let terms: Vec<f64> = (0..n)
            .map(|i| {
                if !alive(i) {
                    return 0.0;
                }
                let left = i > 0 && alive(i - 1);
                let right = i + 1 < n && alive(i + 1);
                let grad = match (left, right) {
                    (true, true) => (lg(i + 1) - lg(i - 1)) / (2.0 * dz),
                    (false, true) => (lg(i + 1) - lg(i)) / dz,
                    (true, false) => (lg(i) - lg(i - 1)) / dz,
                    (false, false) => return 0.0,
                };
                let v = grad + spec.dpsi(self.grid.center(i)) - jm;
                self.masses[i] * v * v
            })
            .collect();
        mirror_sum(&terms)
    }
}
