//! Single-site potentials and the audit of their structural assumptions.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::{Error, Result};

/// An even, twice differentiable single-site energy `Psi`.
///
/// Implementations must be even: `value(-z) == value(z)` and
/// `d1(-z) == -d1(z)`. The flow integrators rely on this holding bit-exactly
/// for exact reflection equivariance, so prefer formulations in `z * z`.
pub trait SiteEnergy: Send + Sync {
    fn value(&self, z: f64) -> f64;
    fn d1(&self, z: f64) -> f64;
    fn d2(&self, z: f64) -> f64;
    fn describe(&self) -> String;
}

/// `Psi(z) = sum_k coeffs[k] * z^(2k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenPolynomial {
    pub coeffs: Vec<f64>,
}

impl EvenPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Horner evaluation of `sum_k c_k u^k`.
    fn horner(c: impl DoubleEndedIterator<Item = f64>, u: f64) -> f64 {
        c.rev().fold(0.0, |acc, ck| acc * u + ck)
    }
}

impl SiteEnergy for EvenPolynomial {
    fn value(&self, z: f64) -> f64 {
        Self::horner(self.coeffs.iter().copied(), z * z)
    }

    fn d1(&self, z: f64) -> f64 {
        // Psi'(z) = z * sum_{k>=1} 2k c_k u^(k-1)
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &ck)| 2.0 * k as f64 * ck);
        z * Self::horner(c, z * z)
    }

    fn d2(&self, z: f64) -> f64 {
        // Psi''(z) = sum_{k>=1} 2k (2k-1) c_k u^(k-1)
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &ck)| (2 * k * (2 * k - 1)) as f64 * ck);
        Self::horner(c, z * z)
    }

    fn describe(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(k, c)| format!("{c} z^{}", 2 * k))
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// Potential, interaction strength and truncation domain.
///
/// The growth bound is audited in the form
/// `Psi(z) + growth_offset >= c_growth (|z|^(2 + eps_growth) - 1)`;
/// an additive constant in `Psi` changes neither the dynamics nor the
/// stationary measures, only the free energy by a constant.
#[derive(Clone)]
pub struct PotentialSpec {
    energy: Arc<dyn SiteEnergy>,
    pub j: f64,
    pub eps_growth: f64,
    pub c_growth: f64,
    pub growth_offset: f64,
    pub half_width: f64,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("psi", &self.energy.describe())
            .field("j", &self.j)
            .field("eps_growth", &self.eps_growth)
            .field("c_growth", &self.c_growth)
            .field("growth_offset", &self.growth_offset)
            .field("half_width", &self.half_width)
            .finish()
    }
}

impl PotentialSpec {
    pub fn new(
        energy: Arc<dyn SiteEnergy>,
        j: f64,
        eps_growth: f64,
        c_growth: f64,
        growth_offset: f64,
        half_width: f64,
    ) -> Result<Self> {
        if !(j >= 0.0 && j.is_finite()) {
            return Err(Error::param("j", format!("must be finite and >= 0, got {j}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("half_width", format!("must be > 0, got {half_width}")));
        }
        if !(eps_growth > 0.0) || !(c_growth > 0.0) || !(growth_offset >= 0.0) {
            return Err(Error::param(
                "growth",
                "eps_growth and c_growth must be > 0 and growth_offset >= 0",
            ));
        }
        Ok(Self {
            energy,
            j,
            eps_growth,
            c_growth,
            growth_offset,
            half_width,
        })
    }

    /// Convenience constructor for `Psi(z) = sum_k coeffs[k] z^(2k)`.
    ///
    /// Uses `eps = 2` and a unit growth constant; callers that audit the
    /// growth clause should set the constants explicitly.
    pub fn even_polynomial(coeffs: Vec<f64>, j: f64, half_width: f64) -> Result<Self> {
        Self::new(Arc::new(EvenPolynomial::new(coeffs)), j, 2.0, 1.0, 0.0, half_width)
    }

    #[inline]
    pub fn psi(&self, z: f64) -> f64 {
        self.energy.value(z)
    }

    #[inline]
    pub fn dpsi(&self, z: f64) -> f64 {
        self.energy.d1(z)
    }

    #[inline]
    pub fn ddpsi(&self, z: f64) -> f64 {
        self.energy.d2(z)
    }

    pub fn describe(&self) -> String {
        self.energy.describe()
    }

    /// A copy with a different interaction strength.
    pub fn with_j(&self, j: f64) -> Result<Self> {
        Self::new(
            self.energy.clone(),
            j,
            self.eps_growth,
            self.c_growth,
            self.growth_offset,
            self.half_width,
        )
    }
}

/// The canonical double well `Psi(z) = a z^4 + b z^2`.
///
/// The growth constants are `eps = 2`, `c'' = a/2`, and the smallest offset
/// for which `Psi + offset >= (a/2)(z^4 - 1)` on the whole line.
pub fn make_quartic(a: f64, b: f64, j: f64, half_width: f64) -> Result<PotentialSpec> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::param("a", format!("quartic coefficient must be > 0, got {a}")));
    }
    if !b.is_finite() {
        return Err(Error::param("b", "must be finite"));
    }
    let c = 0.5 * a;
    // max_{u >= 0} c (u^2 - 1) - a u^2 - b u, attained at u = -b/a when b < 0
    let offset = if b < 0.0 {
        (b * b / (2.0 * a) - 0.5 * a).max(0.0)
    } else {
        0.0
    };
    PotentialSpec::new(
        Arc::new(EvenPolynomial::new(vec![0.0, b, a])),
        j,
        2.0,
        c,
        offset,
        half_width,
    )
}

/// Per-clause outcome of [`check_assumptions`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub n_samples: usize,
    pub half_width: f64,
    pub tol: f64,

    /// (1) `Psi''` bounded below, and `>= c > 0` outside `[-convex_radius, convex_radius]`.
    pub clause1: bool,
    pub inf_ddpsi: f64,
    pub convex_radius: f64,
    pub c_outside: f64,

    /// (2) growth bound with the potential's `(eps, c'', offset)` plus the log-log
    /// growth exponent `L Psi'(L) / (Psi(L) + offset)` at the domain edge.
    pub clause2: bool,
    pub growth_margin: f64,
    pub edge_exponent: f64,

    /// (3) evenness.
    pub clause3: bool,
    pub max_asymmetry: f64,

    /// (4) variance of `e^{-Psi}/Z` against `1/J`.
    pub clause4: bool,
    pub variance: f64,
    pub threshold: f64,

    /// (5) convexity of `Psi'` on `[0, L]` via second differences.
    pub clause5: bool,
    pub min_second_difference: f64,

    /// `e^{-Psi(L)} / max e^{-Psi}`; non-negligible tails flag a too small domain.
    pub tail_ratio: f64,
    pub tail_warning: bool,

    /// Explicit constants of the free-energy lower bound
    /// `F(mu) >= lower_bound_c * int |z|^(2+eps) dmu - lower_bound_constant`.
    pub lower_bound_c: f64,
    pub lower_bound_constant: f64,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.clause1 && self.clause2 && self.clause3 && self.clause4 && self.clause5
    }

    pub fn failed_clauses(&self) -> Vec<u8> {
        [self.clause1, self.clause2, self.clause3, self.clause4, self.clause5]
            .iter()
            .enumerate()
            .filter(|(_, ok)| !**ok)
            .map(|(i, _)| i as u8 + 1)
            .collect()
    }
}

pub const TAIL_WARNING_RATIO: f64 = 1e-12;

/// Audits the five structural clauses on a uniform sample of `[-L, L]`.
///
/// Clause failures are reported, never raised; only `n_samples < 100` is an error.
pub fn check_assumptions(spec: &PotentialSpec, n_samples: usize, tol: f64) -> Result<AssumptionReport> {
    if n_samples < 100 {
        return Err(Error::param("n_samples", format!("need at least 100, got {n_samples}")));
    }
    let l = spec.half_width;
    let h = 2.0 * l / (n_samples - 1) as f64;
    let zs: Vec<f64> = (0..n_samples).map(|k| -l + h * k as f64).collect();
    let psi: Vec<f64> = zs.iter().map(|&z| spec.psi(z)).collect();
    let dd: Vec<f64> = zs.iter().map(|&z| spec.ddpsi(z)).collect();

    // (1)
    let inf_ddpsi = dd.iter().copied().fold(f64::INFINITY, f64::min);
    let convex_radius = zs
        .iter()
        .zip(&dd)
        .filter(|(_, &d)| d <= 0.0)
        .map(|(z, _)| z.abs())
        .fold(0.0, f64::max);
    let c_outside = zs
        .iter()
        .zip(&dd)
        .filter(|(z, _)| z.abs() > convex_radius)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    let clause1 = inf_ddpsi.is_finite() && c_outside.is_finite() && c_outside > 0.0;

    // (2)
    let exponent = 2.0 + spec.eps_growth;
    let growth_margin = zs
        .iter()
        .zip(&psi)
        .map(|(z, p)| p + spec.growth_offset - spec.c_growth * (z.abs().powf(exponent) - 1.0))
        .fold(f64::INFINITY, f64::min);
    let edge_value = spec.psi(l) + spec.growth_offset;
    let edge_exponent = if edge_value > 0.0 {
        l * spec.dpsi(l) / edge_value
    } else {
        f64::NEG_INFINITY
    };
    let clause2 = growth_margin >= -tol && edge_exponent >= exponent - tol;

    // (3)
    let max_asymmetry = zs
        .iter()
        .zip(&psi)
        .map(|(&z, &p)| (p - spec.psi(-z)).abs())
        .fold(0.0, f64::max);
    let clause3 = max_asymmetry <= tol;

    // (4)
    let psi_min = psi.iter().copied().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = psi.iter().map(|p| (psi_min - p).exp()).collect();
    let w2: Vec<f64> = w.iter().zip(&zs).map(|(w, z)| w * z * z).collect();
    let variance = crate::numerics::trapezoid(&w2, h) / crate::numerics::trapezoid(&w, h);
    let threshold = if spec.j > 0.0 { 1.0 / spec.j } else { f64::INFINITY };
    let clause4 = variance > threshold;

    // (5)
    let d1: Vec<f64> = zs.iter().map(|&z| spec.dpsi(z)).collect();
    let min_second_difference = (1..n_samples - 1)
        .filter(|&k| zs[k - 1] >= -1e-12 * l)
        .map(|k| {
            let sd = d1[k + 1] - 2.0 * d1[k] + d1[k - 1];
            let scale = 1.0 + d1[k + 1].abs().max(d1[k - 1].abs());
            sd / scale
        })
        .fold(f64::INFINITY, f64::min);
    let clause5 = min_second_difference >= -tol;

    let tail_ratio = (psi_min - psi[0]).exp().max((psi_min - psi[n_samples - 1]).exp());
    let (lower_bound_c, lower_bound_constant) = free_energy_lower_bound(spec);

    Ok(AssumptionReport {
        n_samples,
        half_width: l,
        tol,
        clause1,
        inf_ddpsi,
        convex_radius,
        c_outside,
        clause2,
        growth_margin,
        edge_exponent,
        clause3,
        max_asymmetry,
        clause4,
        variance,
        threshold,
        clause5,
        min_second_difference,
        tail_ratio,
        tail_warning: tail_ratio > TAIL_WARNING_RATIO,
        lower_bound_c,
        lower_bound_constant,
    })
}

/// Constants `(c, C)` with `F(mu) >= c int |z|^(2+eps) dmu - C` for every measure on `[-L, L]`.
///
/// Entropy is bounded below by `-log(2L)`, the potential by the growth bound,
/// and half of the growth term absorbs `-(J/2) m^2 >= -(J/2) int z^2`.
pub fn free_energy_lower_bound(spec: &PotentialSpec) -> (f64, f64) {
    let c = spec.c_growth;
    let eps = spec.eps_growth;
    // max_s (J/2) s^2 - (c/2) s^(2+eps)
    let s_eps = 2.0 * spec.j / (c * (2.0 + eps));
    let absorbed = 0.5 * spec.j * s_eps.powf(2.0 / eps) * eps / (2.0 + eps);
    let constant = (2.0 * spec.half_width).ln() + c + spec.growth_offset + absorbed;
    (0.5 * c, constant)
}
