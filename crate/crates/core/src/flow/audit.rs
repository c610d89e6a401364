//! Audits of the quantitative estimates satisfied by the exact gradient flow.

use super::{evolve_to, FlowTrajectory};
use crate::measure::GridMeasure;
use crate::potential::{AssumptionReport, PotentialSpec};
use crate::{Error, Result};

/// Relative defect in the energy-dissipation identity
///
/// ```text
/// F(mu_T) - F(mu_0) + 1/2 int_0^T (|dF|^2 + |mu'|^2) dt = 0 .
/// ```
///
/// The slope term is integrated by the trapezoid rule over the records; the
/// metric derivative is constant on each recorded interval.
pub fn check_energy_identity(traj: &FlowTrajectory) -> f64 {
    let s = &traj.states;
    if s.len() < 2 {
        return 0.0;
    }
    let mut dissipation = 0.0;
    for k in 0..s.len() - 1 {
        let dt = s[k + 1].t - s[k].t;
        let speed = traj.metric_derivative[k];
        dissipation += dt * (0.5 * (s[k].slope_sq + s[k + 1].slope_sq) + speed * speed);
    }
    let f0 = s[0].energy;
    let ft = s[s.len() - 1].energy;
    (ft - f0 + 0.5 * dissipation).abs() / (f0.abs() + 1.0)
}

/// Convexity modulus `lambda = min(0, inf Psi'') - J`.
pub fn lambda_bound(spec: &PotentialSpec, report: &AssumptionReport) -> Result<f64> {
    if !report.inf_ddpsi.is_finite() {
        return Err(Error::param("report", "inf Psi'' is not finite"));
    }
    Ok(report.inf_ddpsi.min(0.0) - spec.j)
}

/// `W2(S[mu](t), S[nu](t)) / (e^{-lambda t} W2(mu, nu))`; at most 1 for the exact flow.
pub fn check_contraction(
    spec: &PotentialSpec,
    mu: &GridMeasure,
    nu: &GridMeasure,
    t: f64,
    dt: f64,
    lambda: f64,
) -> Result<f64> {
    let before = mu.wasserstein2(nu)?;
    let after = evolve_to(spec, mu, t, dt)?.wasserstein2(&evolve_to(spec, nu, t, dt)?)?;
    Ok(after / ((-lambda * t).exp() * before))
}

/// `F(S[mu](t)) - F(nu) - lambda / (2 (e^{lambda t} - 1)) W2(mu, nu)^2`; at most 0
/// for the exact flow.
pub fn check_regularization(
    spec: &PotentialSpec,
    mu: &GridMeasure,
    nu: &GridMeasure,
    t: f64,
    dt: f64,
    lambda: f64,
) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param("t", format!("must be > 0, got {t}")));
    }
    let w = mu.wasserstein2(nu)?;
    let weight = if lambda == 0.0 {
        1.0 / (2.0 * t)
    } else {
        lambda / (2.0 * (lambda * t).exp_m1())
    };
    let evolved = evolve_to(spec, mu, t, dt)?;
    Ok(evolved.free_energy(spec) - nu.free_energy(spec) - weight * w * w)
}

/// `W2(S[mu](t + h), S[S[mu](h)](t))`.
pub fn check_semigroup(spec: &PotentialSpec, mu: &GridMeasure, h: f64, t: f64, dt: f64) -> Result<f64> {
    let direct = evolve_to(spec, mu, t + h, dt)?;
    let composed = evolve_to(spec, &evolve_to(spec, mu, h, dt)?, t, dt)?;
    direct.wasserstein2(&composed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{evolve, FlowParams};
    use crate::measure::Grid;
    use crate::potential::{check_assumptions, make_quartic};
    use crate::tilt::Tilt;

    fn grid() -> Grid {
        Grid::new(4.0, 400).unwrap()
    }

    fn quartic() -> PotentialSpec {
        make_quartic(0.25, -0.5, 1.2, 4.0).unwrap()
    }

    fn every_step(dt: f64, t_max: f64) -> FlowParams {
        FlowParams {
            dt,
            t_max,
            record_every: 1,
            stationarity_tol: 1e-300,
            lambda: -2.2,
            ..FlowParams::default()
        }
    }

    #[test]
    fn lambda_examples() {
        let spec = quartic();
        let report = check_assumptions(&spec, 2001, 1e-9).unwrap();
        assert!((lambda_bound(&spec, &report).unwrap() - (-1.0 - 1.2)).abs() < 1e-9);
        let convex = PotentialSpec::even_polynomial(vec![0.0, 0.0, 1.0], 1.0, 4.0).unwrap();
        let report = check_assumptions(&convex, 2001, 1e-9).unwrap();
        assert!((lambda_bound(&convex, &report).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_trajectory_has_no_defect() {
        let spec = quartic();
        let s = Tilt::new(&spec, grid()).unwrap().stationary_triple().unwrap();
        let traj = evolve(&spec, &s.mu_plus, &every_step(1e-2, 0.2)).unwrap();
        assert!(check_energy_identity(&traj) <= 1e-8);
    }

    #[test]
    fn energy_identity_is_reflection_invariant() {
        let spec = quartic();
        let mu = GridMeasure::gaussian(grid(), 0.5, 0.3).unwrap();
        let a = check_energy_identity(&evolve(&spec, &mu, &every_step(1e-2, 0.3)).unwrap());
        let b = check_energy_identity(&evolve(&spec, &mu.reflect(), &every_step(1e-2, 0.3)).unwrap());
        assert!((a - b).abs() <= 1e-10);
    }

    #[test]
    fn semigroup_on_step_multiples_is_exact() {
        let spec = quartic();
        let mu = GridMeasure::gaussian(grid(), 0.3, 0.4).unwrap();
        assert_eq!(check_semigroup(&spec, &mu, 0.1, 0.2, 1e-2).unwrap(), 0.0);
        assert_eq!(check_semigroup(&spec, &mu, 0.1, 0.0, 1e-2).unwrap(), 0.0);
    }

    #[test]
    fn semigroup_off_multiple_is_bounded_by_speed() {
        let spec = quartic();
        let dt = 1e-2;
        let mu = GridMeasure::gaussian(grid(), 0.3, 0.4).unwrap();
        let traj = evolve(&spec, &mu, &every_step(dt, 0.3)).unwrap();
        let max_speed = traj.metric_derivative.iter().copied().fold(0.0, f64::max);
        let gap = check_semigroup(&spec, &mu, 0.0137, 0.2, dt).unwrap();
        assert!(gap <= 2.0 * dt * max_speed, "{gap} vs {}", 2.0 * dt * max_speed);
    }

    #[test]
    fn regularization_at_stationarity_is_tight() {
        let spec = quartic();
        let s = Tilt::new(&spec, grid()).unwrap().stationary_triple().unwrap();
        let margin = check_regularization(&spec, &s.mu_plus, &s.mu_plus, 0.1, 1e-3, -2.2).unwrap();
        assert!(margin <= 1e-8);
    }

    #[test]
    fn contraction_holds_for_a_pair() {
        let spec = quartic();
        let mu = GridMeasure::gaussian(grid(), 0.3, 0.4).unwrap();
        let nu = GridMeasure::gaussian(grid(), -0.2, 0.6).unwrap();
        let ratio = check_contraction(&spec, &mu, &nu, 0.1, 1e-3, -2.2).unwrap();
        assert!(ratio <= 1.0 + 1e-3);
    }
}
