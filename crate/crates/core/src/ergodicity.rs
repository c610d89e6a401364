//! Long-time behaviour: which stationary measure a flow converges to.
//!
//! * [`classify`] runs the flow and labels the limit.
//! * [`small_basin_predict`] is the energy criterion: below the saddle energy,
//!   the sign of the mean decides the limit.
//! * [`basin_certificate`] builds the explicit radius `delta` of a `W2` ball
//!   around an anchor that lies in `B-` (or `B+`).
//! * [`basin_sweep`] and [`boundary_probe`] are experiment harnesses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::flow::{evolve, FlowParams, FlowTrajectory, Integrator, TerminalStatus};
use crate::measure::GridMeasure;
use crate::potential::PotentialSpec;
use crate::tilt::{StationaryTriple, Tilt};
use crate::{Error, Result};

/// A label needs `W2 < MATCH_TOL` to its stationary measure.
pub const MATCH_TOL: f64 = 1e-3;
pub const ENERGY_TOL: f64 = 1e-8;
pub const MEAN_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Minus,
    Zero,
    Plus,
    Undecided,
}

impl Label {
    /// Image under `z -> -z`.
    pub fn reflected(self) -> Self {
        match self {
            Label::Minus => Label::Plus,
            Label::Plus => Label::Minus,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Minus => "minus",
            Label::Zero => "zero",
            Label::Plus => "plus",
            Label::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationResult {
    pub label: Label,
    pub w2_minus: f64,
    pub w2_zero: f64,
    pub w2_plus: f64,
    pub f_final: f64,
    pub t_final: f64,
    pub status: TerminalStatus,
    #[serde(skip)]
    pub trajectory: FlowTrajectory,
}

impl ClassificationResult {
    /// `W2` to the stationary measure named by `label`.
    pub fn distance_to(&self, label: Label) -> Option<f64> {
        match label {
            Label::Minus => Some(self.w2_minus),
            Label::Zero => Some(self.w2_zero),
            Label::Plus => Some(self.w2_plus),
            Label::Undecided => None,
        }
    }
}

fn same_grid(triple: &StationaryTriple, mu: &GridMeasure) -> Result<()> {
    if triple.mu_zero.grid() == mu.grid() {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Nearest stationary measure if it is within `MATCH_TOL` and closer than
/// half the runner-up distance.
fn nearest(d: [f64; 3]) -> Label {
    let labels = [Label::Minus, Label::Zero, Label::Plus];
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let (best, second) = (d[order[0]], d[order[1]]);
    if best < MATCH_TOL && best < 0.5 * second {
        labels[order[0]]
    } else {
        Label::Undecided
    }
}

/// Runs the flow from `mu0` and labels its limit.
pub fn classify(
    spec: &PotentialSpec,
    triple: &StationaryTriple,
    mu0: &GridMeasure,
    params: &FlowParams,
) -> Result<ClassificationResult> {
    same_grid(triple, mu0)?;
    let trajectory = evolve(spec, mu0, params)?;
    let last = trajectory.last();
    let d = [
        last.measure.wasserstein2(&triple.mu_minus)?,
        last.measure.wasserstein2(&triple.mu_zero)?,
        last.measure.wasserstein2(&triple.mu_plus)?,
    ];
    let label = match trajectory.status {
        TerminalStatus::Stationary => nearest(d),
        TerminalStatus::Timeout => Label::Undecided,
    };
    Ok(ClassificationResult {
        label,
        w2_minus: d[0],
        w2_zero: d[1],
        w2_plus: d[2],
        f_final: last.energy,
        t_final: last.t,
        status: trajectory.status,
        trajectory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SmallBasinPrediction {
    pub applicable: bool,
    pub predicted: Label,
}

/// Energy criterion: if `F(mu0) <= F(mu^0)` and the mean is nonzero, the flow
/// converges to the stationary measure on the side of the mean.
pub fn small_basin_predict(spec: &PotentialSpec, triple: &StationaryTriple, mu0: &GridMeasure) -> SmallBasinPrediction {
    let m = mu0.mean();
    let applicable = mu0.free_energy(spec) <= triple.f_zero + ENERGY_TOL && m.abs() > MEAN_TOL;
    let predicted = match (applicable, m < 0.0) {
        (false, _) => Label::Undecided,
        (true, true) => Label::Minus,
        (true, false) => Label::Plus,
    };
    SmallBasinPrediction { applicable, predicted }
}

/// Radius of a `W2` ball around `anchor` contained in the basin of `target`.
#[derive(Debug, Clone)]
pub struct BasinCertificate {
    pub anchor: GridMeasure,
    pub target: Label,
    pub t_prime: f64,
    pub delta: f64,
    /// `W2(S[anchor](t'), mu^-+)`.
    pub w2_at_t_prime: f64,
    /// `F(S[anchor](t')) - F(mu^-+)`.
    pub energy_excess: f64,
    /// `e^{lambda t'}`.
    pub exp_lambda_t: f64,
    /// `F(mu^0) - F(mu^-)`.
    pub barrier: f64,
    pub lambda: f64,
    pub m_star: f64,
}

impl Serialize for BasinCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let g = self.anchor.grid();
        let mut st = s.serialize_struct("BasinCertificate", 13)?;
        st.serialize_field("target", &self.target)?;
        st.serialize_field("t_prime", &self.t_prime)?;
        st.serialize_field("delta", &self.delta)?;
        st.serialize_field("w2_at_t_prime", &self.w2_at_t_prime)?;
        st.serialize_field("energy_excess", &self.energy_excess)?;
        st.serialize_field("exp_lambda_t", &self.exp_lambda_t)?;
        st.serialize_field("barrier", &self.barrier)?;
        st.serialize_field("lambda", &self.lambda)?;
        st.serialize_field("m_star", &self.m_star)?;
        st.serialize_field("anchor_mean", &self.anchor.mean())?;
        st.serialize_field("anchor_half_width", &g.half_width())?;
        st.serialize_field("anchor_n", &g.len())?;
        st.serialize_field("anchor_masses", self.anchor.masses())?;
        st.end()
    }
}

/// `delta = min{ e^{2 lambda t'} m* / 4, sqrt(e^{2 lambda t'} Delta / (4 |lambda|)) }`.
pub fn certificate_radius(exp_lambda_t: f64, m_star: f64, barrier: f64, lambda: f64) -> f64 {
    let e2 = exp_lambda_t * exp_lambda_t;
    (e2 * m_star / 4.0).min((e2 * barrier / (4.0 * lambda.abs())).sqrt())
}

/// Certificate around `nu`, which must classify as minus or plus.
///
/// `t'` is the first record time at which `W2(S[nu](t'), mu) <= m*/4`,
/// `F(S[nu](t')) <= F(mu) + Delta/4` and `e^{lambda t'} <= 1/2`, with `mu` the
/// target stationary measure and `lambda = params.lambda`.
pub fn basin_certificate(
    spec: &PotentialSpec,
    triple: &StationaryTriple,
    nu: &GridMeasure,
    params: &FlowParams,
) -> Result<BasinCertificate> {
    let result = classify(spec, triple, nu, params)?;
    let (target, mu, f_target) = match result.label {
        Label::Minus => (Label::Minus, &triple.mu_minus, triple.f_minus),
        Label::Plus => (Label::Plus, &triple.mu_plus, triple.f_plus),
        other => {
            return Err(Error::param(
                "nu",
                format!(
                    "anchor must lie in the basin of mu- or mu+, classified {}",
                    other.as_str()
                ),
            ))
        }
    };
    let lambda = params.lambda;
    let barrier = triple.barrier();
    let mut integrator = Integrator::new(spec, nu, params)?;
    while let Some(state) = integrator.next_record()? {
        let w2 = state.measure.wasserstein2(mu)?;
        let excess = state.energy - f_target;
        let e = (lambda * state.t).exp();
        if w2 <= triple.m_star / 4.0 && excess <= barrier / 4.0 && e <= 0.5 {
            return Ok(BasinCertificate {
                anchor: nu.clone(),
                target,
                t_prime: state.t,
                delta: certificate_radius(e, triple.m_star, barrier, lambda),
                w2_at_t_prime: w2,
                energy_excess: excess,
                exp_lambda_t: e,
                barrier,
                lambda,
                m_star: triple.m_star,
            });
        }
    }
    Err(Error::CertificateUnavailable { t_max: params.t_max })
}

/// Random measure at `W2` distance `radius` from `nu` (or closer, if the
/// chosen direction cannot reach that far).
///
/// The perturbation is a convex mixture `(1 - s) nu + s kappa` with `kappa` a
/// shifted copy of `nu`, an exponential reweighting of `nu`, or a rescaled
/// Gaussian with the moments of `nu`; `s` is found by bisection.
pub fn perturb(nu: &GridMeasure, radius: f64, rng: &mut impl Rng) -> Result<GridMeasure> {
    let grid = nu.grid();
    let kappa = match rng.random_range(0..3) {
        0 => {
            let cells = rng.random_range(1i64..=3) as isize * if rng.random::<bool>() { 1 } else { -1 };
            nu.shift(cells)
        }
        1 => {
            let a = rng.random_range(-0.5..0.5);
            let w = nu
                .masses()
                .iter()
                .enumerate()
                .map(|(i, p)| p * (a * grid.center(i)).exp())
                .collect();
            GridMeasure::normalized(grid, w)?
        }
        _ => {
            let var = nu.variance() * rng.random_range(0.8..1.25);
            let mean = nu.mean();
            let sd_room = (grid.half_width() - mean.abs()) / 4.0;
            GridMeasure::gaussian(grid, mean, var.min(sd_room * sd_room * 0.99))?
        }
    };
    let mix = |s: f64| GridMeasure::mixture(&[(1.0 - s, nu), (s, &kappa)]);
    if kappa.wasserstein2(nu)? <= radius {
        return Ok(kappa);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mix(mid)?.wasserstein2(nu)? < radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mix(lo)
}

/// `count` seeded perturbations of `nu` with `W2` sizes uniform in `[0.5, 0.99] * delta`.
pub fn perturbations(nu: &GridMeasure, delta: f64, count: usize, seed: u64) -> Result<Vec<GridMeasure>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let r = delta * rng.random_range(0.5..0.99);
            perturb(nu, r, &mut rng)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub mean: f64,
    pub var: f64,
    pub label: Label,
    pub t_final: f64,
    pub w2_minus: f64,
    pub w2_zero: f64,
    pub w2_plus: f64,
    pub f_final: f64,
    pub reason: Option<String>,
}

/// Classifies the Gaussian initial condition for each `(mean, var)` pair, in input order.
pub fn basin_sweep(
    spec: &PotentialSpec,
    triple: &StationaryTriple,
    pairs: &[(f64, f64)],
    params: &FlowParams,
) -> Vec<SweepRow> {
    let grid = triple.mu_zero.grid();
    pairs
        .par_iter()
        .map(|&(mean, var)| {
            let outcome = GridMeasure::gaussian(grid, mean, var).and_then(|mu| classify(spec, triple, &mu, params));
            match outcome {
                Ok(r) => SweepRow {
                    mean,
                    var,
                    label: r.label,
                    t_final: r.t_final,
                    w2_minus: r.w2_minus,
                    w2_zero: r.w2_zero,
                    w2_plus: r.w2_plus,
                    f_final: r.f_final,
                    reason: None,
                },
                Err(e) => SweepRow {
                    mean,
                    var,
                    label: Label::Undecided,
                    t_final: f64::NAN,
                    w2_minus: f64::NAN,
                    w2_zero: f64::NAN,
                    w2_plus: f64::NAN,
                    f_final: f64::NAN,
                    reason: Some(e.to_string()),
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub eta: f64,
    pub label_negative: Label,
    pub label_positive: Label,
    /// `W2(mu^{phi'(eta)}, mu^0)`.
    pub w2_to_zero: f64,
}

/// Classifies `mu^{phi'(-eta)}` and `mu^{phi'(eta)}` for each `eta`.
pub fn boundary_probe(
    tilt: &Tilt,
    triple: &StationaryTriple,
    etas: &[f64],
    params: &FlowParams,
) -> Result<Vec<ProbeRow>> {
    if etas.iter().any(|e| !(*e > 0.0)) || etas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::param("etas", "must be positive and decreasing"));
    }
    let spec = tilt.spec();
    etas.par_iter()
        .map(|&eta| {
            let neg = tilt.constrained_minimizer(-eta)?;
            let pos = tilt.constrained_minimizer(eta)?;
            Ok(ProbeRow {
                eta,
                label_negative: classify(spec, triple, &neg, params)?.label,
                label_positive: classify(spec, triple, &pos, params)?.label,
                w2_to_zero: pos.wasserstein2(&triple.mu_zero)?,
            })
        })
        .collect()
}
