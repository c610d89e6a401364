//! Tilted Gibbs measures and the macroscopic Hamiltonian.
//!
//! For a tilt `sigma` the Gibbs measure `mu^sigma` has density proportional to
//! `exp(sigma z - Psi(z))`. Its log-partition function `phi*(sigma)` is convex,
//! `phi*'(sigma)` is the mean of `mu^sigma`, and the Legendre transform `phi`
//! inverts that relation. The macroscopic Hamiltonian is
//! `Hbar(m) = phi(m) - (J/2) m^2`; its critical points `-m*, 0, m*` index the
//! three stationary measures of the flow.
//!
//! All integrals use the cell-centered rule on the computational [`Grid`], the
//! same discretisation the measures and the Fokker-Planck scheme use, so that
//! the discrete tilted measures are exact discrete fixed points of the flow.

use serde::Serialize;

use crate::measure::{Grid, GridMeasure};
use crate::numerics::{mirror_odd_dot, mirror_sum};
use crate::potential::PotentialSpec;
use crate::{Error, Result};

/// Number of probe points used to bracket the positive critical point.
const BRACKET_PROBES: usize = 256;
/// Lower end of the bracket for `m*`.
const M_LO: f64 = 1e-6;

/// Log-partition and Legendre machinery for one potential on one grid.
#[derive(Debug, Clone)]
pub struct Tilt {
    spec: PotentialSpec,
    grid: Grid,
    z: Vec<f64>,
    psi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoints {
    /// Positive critical point; `None` when `0` is the only one.
    pub m_star: Option<f64>,
    pub count: usize,
}

/// The stationary measures `mu^-`, `mu^0`, `mu^+` and their free energies.
#[derive(Debug, Clone)]
pub struct StationaryTriple {
    pub m_star: f64,
    pub sigma_star: f64,
    pub mu_minus: GridMeasure,
    pub mu_zero: GridMeasure,
    pub mu_plus: GridMeasure,
    pub f_minus: f64,
    pub f_zero: f64,
    pub f_plus: f64,
}

impl StationaryTriple {
    /// Free-energy barrier `F(mu^0) - F(mu^-)`.
    pub fn barrier(&self) -> f64 {
        self.f_zero - self.f_minus
    }
}

/// One row of the `Hbar` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HbarRow {
    pub m: f64,
    pub phi: f64,
    pub hbar: f64,
}

impl Tilt {
    pub fn new(spec: &PotentialSpec, grid: Grid) -> Result<Self> {
        if grid.half_width() > spec.half_width * (1.0 + 1e-12) {
            return Err(Error::param("grid", "grid extends beyond the truncation domain"));
        }
        let z = grid.centers();
        let psi = z.iter().map(|&x| spec.psi(x)).collect();
        Ok(Self {
            spec: spec.clone(),
            grid,
            z,
            psi,
        })
    }

    pub fn spec(&self) -> &PotentialSpec {
        &self.spec
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Largest mean any tilted measure can approach (the outermost cell center).
    pub fn max_mean(&self) -> f64 {
        self.z[self.z.len() - 1]
    }

    /// `exp(sigma z_i - Psi_i - shift)` with `shift` the maximal exponent.
    fn weights(&self, sigma: f64) -> Result<(Vec<f64>, f64)> {
        if !sigma.is_finite() {
            return Err(Error::NonFinite { sigma });
        }
        let exps: Vec<f64> = self.z.iter().zip(&self.psi).map(|(z, p)| sigma * z - p).collect();
        let shift = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !shift.is_finite() {
            return Err(Error::NonFinite { sigma });
        }
        Ok((exps.iter().map(|a| (a - shift).exp()).collect(), shift))
    }

    /// `phi*(sigma) = log sum_i dz exp(sigma z_i - Psi(z_i))`.
    pub fn log_partition(&self, sigma: f64) -> Result<f64> {
        let (w, shift) = self.weights(sigma)?;
        let v = shift + (self.grid.dz() * mirror_sum(&w)).ln();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { sigma })
        }
    }

    /// Mean of `mu^sigma`, i.e. `phi*'(sigma)`. Odd in `sigma`, exactly.
    pub fn tilted_mean(&self, sigma: f64) -> Result<f64> {
        let (w, _) = self.weights(sigma)?;
        Ok(mirror_odd_dot(&w, &self.z) / mirror_sum(&w))
    }

    /// Variance of `mu^sigma`, i.e. `phi*''(sigma)`.
    pub fn tilted_variance(&self, sigma: f64) -> Result<f64> {
        let (w, _) = self.weights(sigma)?;
        let total = mirror_sum(&w);
        let mean = mirror_odd_dot(&w, &self.z) / total;
        let second: Vec<f64> = w
            .iter()
            .zip(&self.z)
            .map(|(w, z)| w * (z - mean) * (z - mean))
            .collect();
        Ok(second.iter().sum::<f64>() / total)
    }

    /// Legendre transform: returns `(phi(m), phi'(m))`.
    ///
    /// `phi'(m)` is the tilt whose measure has mean `m`, found by bisection to
    /// a relative bracket width of `1e-12` and polished by two Newton steps.
    pub fn legendre(&self, m: f64) -> Result<(f64, f64)> {
        let limit = self.max_mean();
        if !(m.abs() < limit) {
            return Err(Error::BracketFailure { mean: m, limit });
        }
        let f = |s: f64| self.tilted_mean(s).map(|x| x - m);
        let (mut lo, mut hi) = (-1.0, 1.0);
        while f(hi)? < 0.0 {
            hi *= 2.0;
            if hi > 1e8 {
                return Err(Error::BracketFailure { mean: m, limit });
            }
        }
        while f(lo)? > 0.0 {
            lo *= 2.0;
            if lo < -1e8 {
                return Err(Error::BracketFailure { mean: m, limit });
            }
        }
        while hi - lo > 1e-12 * hi.abs().max(lo.abs()).max(1.0) {
            let mid = 0.5 * (lo + hi);
            let v = f(mid)?;
            if v == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut sigma = 0.5 * (lo + hi);
        for _ in 0..2 {
            let var = self.tilted_variance(sigma)?;
            if var <= 0.0 {
                break;
            }
            let next = sigma - f(sigma)? / var;
            if next.is_finite() && (next - sigma).abs() <= (hi - lo).max(1e-15) {
                sigma = next;
            }
        }
        let phi = sigma * m - self.log_partition(sigma)?;
        Ok((phi, sigma))
    }

    /// `Hbar(m) = phi(m) - (J/2) m^2`.
    pub fn hbar(&self, m: f64) -> Result<f64> {
        Ok(self.legendre(m)?.0 - 0.5 * self.spec.j * m * m)
    }

    /// `Hbar` at each requested mean.
    pub fn hbar_table(&self, ms: &[f64]) -> Result<Vec<HbarRow>> {
        ms.iter()
            .map(|&m| {
                let (phi, _) = self.legendre(m)?;
                Ok(HbarRow {
                    m,
                    phi,
                    hbar: phi - 0.5 * self.spec.j * m * m,
                })
            })
            .collect()
    }

    /// `g(m) = phi*'(J m) - m`; its roots are the critical points of `Hbar`.
    pub fn self_consistency_gap(&self, m: f64) -> Result<f64> {
        Ok(self.tilted_mean(self.spec.j * m)? - m)
    }

    /// Locates the positive root of `g` on `(1e-6, 0.99 max_mean]`.
    ///
    /// `count = 3` when a positive root exists (roots `-m*, 0, m*`), `1` otherwise.
    pub fn critical_points(&self) -> Result<CriticalPoints> {
        let m_hi = 0.99 * self.max_mean();
        let probes: Vec<f64> = (0..=BRACKET_PROBES)
            .map(|k| M_LO + (m_hi - M_LO) * k as f64 / BRACKET_PROBES as f64)
            .collect();
        let values = probes
            .iter()
            .map(|&m| self.self_consistency_gap(m))
            .collect::<Result<Vec<_>>>()?;
        let changes: Vec<usize> = (0..BRACKET_PROBES)
            .filter(|&k| (values[k] > 0.0) != (values[k + 1] > 0.0))
            .collect();
        match changes.as_slice() {
            [] => Ok(CriticalPoints { m_star: None, count: 1 }),
            [k] if values[*k] > 0.0 => {
                let (mut lo, mut hi) = (probes[*k], probes[*k + 1]);
                while hi - lo > 1e-12 {
                    let mid = 0.5 * (lo + hi);
                    if self.self_consistency_gap(mid)? > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(CriticalPoints {
                    m_star: Some(0.5 * (lo + hi)),
                    count: 3,
                })
            }
            _ => Err(Error::CriticalPointStructure(changes.len())),
        }
    }

    /// Discrete `mu^sigma`: cell masses proportional to `exp(sigma z_i - Psi(z_i))`.
    pub fn tilted_measure(&self, sigma: f64) -> Result<GridMeasure> {
        let (w, _) = self.weights(sigma)?;
        let total = mirror_sum(&w);
        if !(total > 0.0) {
            return Err(Error::Underflow);
        }
        Ok(GridMeasure::from_raw(self.grid, w.iter().map(|x| x / total).collect()))
    }

    /// `mu^{phi'(m)}`, the free-energy minimiser among measures of mean `m`.
    pub fn constrained_minimizer(&self, m: f64) -> Result<GridMeasure> {
        let (_, sigma) = self.legendre(m)?;
        self.tilted_measure(sigma)
    }

    pub fn stationary_triple(&self) -> Result<StationaryTriple> {
        let m_star = self.critical_points()?.m_star.ok_or(Error::NoSymmetryBreaking)?;
        let (_, sigma_star) = self.legendre(m_star)?;
        let mu_plus = self.tilted_measure(sigma_star)?;
        let mu_minus = self.tilted_measure(-sigma_star)?;
        let mu_zero = self.tilted_measure(0.0)?;
        Ok(StationaryTriple {
            m_star,
            sigma_star,
            f_minus: mu_minus.free_energy(&self.spec),
            f_zero: mu_zero.free_energy(&self.spec),
            f_plus: mu_plus.free_energy(&self.spec),
            mu_minus,
            mu_zero,
            mu_plus,
        })
    }
}

/// `count` equally spaced means on `[-m_max, m_max]`.
pub fn symmetric_means(m_max: f64, count: usize) -> Vec<f64> {
    let count = count.max(2);
    (0..count)
        .map(|k| -m_max + 2.0 * m_max * k as f64 / (count - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::make_quartic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quartic() -> Tilt {
        let spec = make_quartic(0.25, -0.5, 1.2, 4.0).unwrap();
        Tilt::new(&spec, Grid::new(4.0, 400).unwrap()).unwrap()
    }

    fn gaussian() -> Tilt {
        let spec = PotentialSpec::even_polynomial(vec![0.0, 0.5], 0.5, 12.0).unwrap();
        Tilt::new(&spec, Grid::new(12.0, 2400).unwrap()).unwrap()
    }

    const HALF_LOG_2PI: f64 = 0.918_938_533_204_672_7;

    #[test]
    fn gaussian_closed_forms() {
        let t = gaussian();
        assert!((t.log_partition(0.0).unwrap() - HALF_LOG_2PI).abs() < 1e-10);
        for s in [-1.0, 0.5] {
            assert!((t.tilted_mean(s).unwrap() - s).abs() < 1e-10);
        }
        for m in [-0.7, 0.0, 0.4] {
            let (phi, dphi) = t.legendre(m).unwrap();
            assert!((dphi - m).abs() < 1e-9);
            assert!((phi - (0.5 * m * m - HALF_LOG_2PI)).abs() < 1e-9);
        }
    }

    #[test]
    fn even_potential_symmetries() {
        let t = quartic();
        for s in [0.3, 1.1] {
            let d = t.log_partition(s).unwrap() - t.log_partition(-s).unwrap();
            assert!(d.abs() < 1e-10);
        }
        assert_eq!(t.tilted_mean(0.0).unwrap(), 0.0);
        assert_eq!(t.legendre(0.0).unwrap().1, 0.0);
        assert_eq!(t.self_consistency_gap(0.0).unwrap(), 0.0);
        assert_eq!(t.hbar(0.4).unwrap(), t.hbar(-0.4).unwrap());
    }

    #[test]
    fn log_partition_matches_refined_quadrature() {
        let t = quartic();
        let fine = Tilt::new(t.spec(), t.grid().refined(10).unwrap()).unwrap();
        let d = t.log_partition(0.0).unwrap() - fine.log_partition(0.0).unwrap();
        assert!(d.abs() < 1e-8, "{d}");
    }

    #[test]
    fn tilted_mean_is_derivative_of_log_partition() {
        let t = quartic();
        let h = 1e-4;
        let fd = (t.log_partition(0.7 + h).unwrap() - t.log_partition(0.7 - h).unwrap()) / (2.0 * h);
        assert!((fd - t.tilted_mean(0.7).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn tilted_mean_is_strictly_increasing() {
        let t = quartic();
        let means: Vec<f64> = (-40..=40).map(|k| t.tilted_mean(k as f64 * 0.1).unwrap()).collect();
        assert!(means.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn legendre_identities() {
        let t = quartic();
        for m in [0.2, 0.8, -1.3, 2.5] {
            let (phi, sigma) = t.legendre(m).unwrap();
            let residual = sigma * m - t.log_partition(sigma).unwrap() - phi;
            assert!(residual.abs() < 1e-9);
            assert!((t.tilted_mean(sigma).unwrap() - m).abs() < 1e-8);
        }
    }

    #[test]
    fn legendre_rejects_unattainable_means() {
        let t = quartic();
        assert!(matches!(t.legendre(4.0), Err(Error::BracketFailure { .. })));
        assert!(t.legendre(f64::NAN).is_err());
    }

    #[test]
    fn weak_coupling_has_single_critical_point() {
        let spec = make_quartic(0.25, -0.5, 0.5, 4.0).unwrap();
        let t = Tilt::new(&spec, Grid::new(4.0, 400).unwrap()).unwrap();
        let cp = t.critical_points().unwrap();
        assert_eq!(cp.count, 1);
        assert!(cp.m_star.is_none());
        assert!(matches!(t.stationary_triple(), Err(Error::NoSymmetryBreaking)));
    }

    #[test]
    fn m_star_matches_grid_minimisation_of_hbar() {
        let t = quartic();
        let m_star = t.critical_points().unwrap().m_star.unwrap();
        assert!((t.self_consistency_gap(m_star).unwrap()).abs() < 1e-11);
        // oracle: minimise Hbar over a 10^4-point grid of (0, 2]
        let h = 2.0 / 10_000.0;
        let (arg, _) = (1..=10_000)
            .map(|k| {
                let m = k as f64 * h;
                (m, t.hbar(m).unwrap())
            })
            .fold((0.0, f64::INFINITY), |acc, (m, v)| if v < acc.1 { (m, v) } else { acc });
        assert!((arg - m_star).abs() <= h, "grid argmin {arg}, m* {m_star}");
        assert!(t.hbar(m_star).unwrap() < t.hbar(0.0).unwrap());
    }

    #[test]
    fn hbar_equals_free_energy_of_constrained_minimiser() {
        let t = quartic();
        for m in [0.0, 0.5, -0.9] {
            let mu = t.constrained_minimizer(m).unwrap();
            let d = mu.free_energy(t.spec()) - t.hbar(m).unwrap();
            assert!(d.abs() < 1e-9, "m = {m}: {d}");
        }
    }

    #[test]
    fn tilted_measure_examples() {
        let t = quartic();
        let g = t.grid();
        let mu = t.tilted_measure(0.0).unwrap();
        let left: f64 = mu.masses()[..g.len() / 2].iter().sum();
        let right: f64 = mu.masses()[g.len() / 2..].iter().sum();
        assert!((left - right).abs() < 1e-12);
        assert_eq!(mu, mu.reflect());
        let tilted = t.tilted_measure(0.6).unwrap();
        assert!((tilted.mean() - t.tilted_mean(0.6).unwrap()).abs() < 1e-12);
        assert!((tilted.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_triple_invariants() {
        let t = quartic();
        let s = t.stationary_triple().unwrap();
        assert!(s.m_star > 0.0);
        assert!((s.mu_plus.mean() - s.m_star).abs() < 1e-10);
        assert!((s.mu_minus.mean() + s.m_star).abs() < 1e-10);
        assert_eq!(s.mu_zero.mean(), 0.0);
        assert_eq!(s.mu_minus, s.mu_plus.reflect());
        assert!((s.f_minus - s.f_plus).abs() < 1e-9);
        assert!(s.f_minus < s.f_zero);
        let spec = t.spec();
        for mu in [&s.mu_minus, &s.mu_zero, &s.mu_plus] {
            assert!(mu.metric_slope_sq(spec) < 1e-6);
        }
    }

    /// Random zero-mass, zero-mean perturbation of `mu`, keeping masses positive.
    fn perturb_at_fixed_mean(mu: &GridMeasure, rng: &mut impl Rng) -> GridMeasure {
        let g = mu.grid();
        let z = g.centers();
        let n = g.len();
        let mut v: Vec<f64> = (0..n).map(|i| mu.masses()[i] * (rng.random::<f64>() - 0.5)).collect();
        // project out constants and z in the mu-weighted sense: v <- v - mu (a + b z)
        let p = mu.masses();
        let (s0, s1, s2) = (1.0, mu.mean(), mu.second_moment());
        let v0: f64 = v.iter().sum();
        let v1: f64 = v.iter().zip(&z).map(|(a, b)| a * b).sum();
        let det = s0 * s2 - s1 * s1;
        let a = (v0 * s2 - v1 * s1) / det;
        let b = (v1 * s0 - v0 * s1) / det;
        for i in 0..n {
            v[i] -= p[i] * (a + b * z[i]);
        }
        let scale = (0..n)
            .filter(|&i| v[i] < 0.0)
            .map(|i| p[i] / -v[i])
            .fold(f64::INFINITY, f64::min)
            .min(1.0);
        let masses = (0..n).map(|i| (p[i] + 0.5 * scale * v[i]).max(0.0)).collect();
        GridMeasure::from_raw(g, masses)
    }

    #[test]
    fn constrained_minimiser_beats_random_competitors() {
        let t = quartic();
        let spec = t.spec();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &m in &[0.0, 0.4, -1.0] {
            let base = t.constrained_minimizer(m).unwrap();
            for _ in 0..10 {
                let mu = perturb_at_fixed_mean(&base, &mut rng);
                assert!((mu.mean() - m).abs() < 1e-9);
                assert!(mu.free_energy(spec) > base.free_energy(spec));
                // F(mu) = H(mu | mu^{phi'(m)}) + Hbar(m)
                let decomposition = mu.relative_entropy(&base).unwrap() + t.hbar(mu.mean()).unwrap();
                assert!((mu.free_energy(spec) - decomposition).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn symmetric_means_grid() {
        let ms = symmetric_means(1.5, 5);
        assert_eq!(ms, vec![-1.5, -0.75, 0.0, 0.75, 1.5]);
    }
}
