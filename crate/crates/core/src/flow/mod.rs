//! Time integration of the Wasserstein gradient flow of the free energy.
//!
//! [`evolve`] drives either the finite-volume Fokker-Planck scheme
//! ([`fokker_planck`]) or the minimizing-movement scheme ([`jko`]) and
//! records a [`FlowTrajectory`]. The quantitative estimates satisfied by the
//! exact flow are audited in [`audit`].

pub mod audit;
pub mod fokker_planck;
pub mod jko;

use serde::{Deserialize, Serialize};

use crate::measure::{Grid, GridMeasure};
use crate::potential::PotentialSpec;
use crate::{Error, Result};

pub use audit::{check_contraction, check_energy_identity, check_regularization, check_semigroup, lambda_bound};
pub use fokker_planck::{fp_step, FpStepper};
pub use jko::{jko_step, LagrangianMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FokkerPlanck,
    Jko,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub dt: f64,
    pub t_max: f64,
    /// Threshold on both the squared slope and the squared metric derivative.
    pub stationarity_tol: f64,
    /// Record a state every `record_every` steps.
    pub record_every: usize,
    pub scheme: Scheme,
    pub jko_tau: f64,
    /// Convexity modulus, see [`lambda_bound`].
    pub lambda: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            t_max: 200.0,
            stationarity_tol: 1e-10,
            record_every: 50,
            scheme: Scheme::FokkerPlanck,
            jko_tau: 1e-2,
            lambda: -1.0,
        }
    }
}

impl FlowParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be > 0, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_max", self.t_max)?;
        positive("stationarity_tol", self.stationarity_tol)?;
        positive("jko_tau", self.jko_tau)?;
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be >= 1"));
        }
        if !(self.lambda < 0.0) {
            return Err(Error::param("lambda", format!("must be < 0, got {}", self.lambda)));
        }
        Ok(())
    }

    /// Step length of the configured scheme.
    pub fn step(&self) -> f64 {
        match self.scheme {
            Scheme::FokkerPlanck => self.dt,
            Scheme::Jko => self.jko_tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub measure: GridMeasure,
    pub energy: f64,
    pub slope_sq: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    Stationary,
    Timeout,
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub states: Vec<FlowState>,
    pub status: TerminalStatus,
    /// `W2(mu_k, mu_{k+1}) / (t_{k+1} - t_k)` for each pair of consecutive records.
    pub metric_derivative: Vec<f64>,
}

impl FlowTrajectory {
    pub fn last(&self) -> &FlowState {
        self.states
            .last()
            .expect("trajectories hold at least the initial state")
    }

    pub fn first(&self) -> &FlowState {
        &self.states[0]
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

enum Driver {
    Fp(FpStepper, Vec<f64>),
    Jko(LagrangianMeasure),
}

/// Steps the configured scheme and yields a [`FlowState`] every `record_every`
/// steps (and at `t_max`).
pub struct Integrator<'a> {
    spec: &'a PotentialSpec,
    params: FlowParams,
    grid: Grid,
    driver: Driver,
    k: usize,
    n_steps: usize,
    last_step: f64,
}

impl<'a> Integrator<'a> {
    pub fn new(spec: &'a PotentialSpec, mu0: &GridMeasure, params: &FlowParams) -> Result<Self> {
        params.validate()?;
        let grid = mu0.grid();
        let driver = match params.scheme {
            Scheme::FokkerPlanck => Driver::Fp(FpStepper::new(spec, grid), mu0.masses().to_vec()),
            Scheme::Jko => Driver::Jko(LagrangianMeasure::from_grid(mu0)),
        };
        let (n_steps, last_step) = step_plan(params.t_max, params.step());
        Ok(Self {
            spec,
            params: *params,
            grid,
            driver,
            k: 0,
            n_steps,
            last_step,
        })
    }

    pub fn time(&self) -> f64 {
        if self.k == self.n_steps {
            self.params.t_max
        } else {
            self.k as f64 * self.params.step()
        }
    }

    /// The state at the current step.
    pub fn state(&self) -> FlowState {
        let (measure, energy, slope_sq) = match &self.driver {
            Driver::Fp(stepper, p) => {
                let mu = GridMeasure::from_raw(self.grid, p.clone());
                let energy = mu.free_energy(self.spec);
                (mu, energy, stepper.slope_sq(p))
            }
            Driver::Jko(lag) => {
                let mu = lag.to_grid(self.grid);
                let slope = mu.metric_slope_sq(self.spec);
                (mu, lag.free_energy(self.spec), slope)
            }
        };
        FlowState {
            t: self.time(),
            mean: measure.mean(),
            measure,
            energy,
            slope_sq,
        }
    }

    /// Advances to the next record; `None` once `t_max` has been reached.
    pub fn next_record(&mut self) -> Result<Option<FlowState>> {
        if self.k >= self.n_steps {
            return Ok(None);
        }
        loop {
            self.k += 1;
            let dt = if self.k == self.n_steps {
                self.last_step
            } else {
                self.params.step()
            };
            match &mut self.driver {
                Driver::Fp(stepper, p) => *p = stepper.step(p, dt)?,
                Driver::Jko(lag) => *lag = lag.jko_step(self.spec, dt)?,
            }
            if self.k.is_multiple_of(self.params.record_every) || self.k == self.n_steps {
                return Ok(Some(self.state()));
            }
        }
    }
}

/// Integrates the flow from `mu0` until stationarity or `t_max`.
///
/// Stationarity means that at a record both the squared slope and the squared
/// metric derivative over the last recorded interval are below
/// `stationarity_tol`.
pub fn evolve(spec: &PotentialSpec, mu0: &GridMeasure, params: &FlowParams) -> Result<FlowTrajectory> {
    let mut integrator = Integrator::new(spec, mu0, params)?;
    let mut states = vec![integrator.state()];
    let mut metric_derivative = Vec::new();
    let mut status = TerminalStatus::Timeout;
    while let Some(state) = integrator.next_record()? {
        let prev = states.last().expect("nonempty");
        let speed = state.measure.wasserstein2(&prev.measure)? / (state.t - prev.t);
        metric_derivative.push(speed);
        let tol = params.stationarity_tol;
        let stationary = state.slope_sq < tol && speed * speed < tol;
        states.push(state);
        if stationary {
            status = TerminalStatus::Stationary;
            break;
        }
    }
    Ok(FlowTrajectory {
        states,
        status,
        metric_derivative,
    })
}

/// Number of steps of length `h` covering `[0, t]`; the last one may be shorter.
fn step_count(t: f64, h: f64) -> usize {
    let ratio = t / h;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Step count and length of the final step. Durations within rounding of a
/// multiple of `h` use equal steps, so that splitting such a duration
/// reproduces the same step sequence.
fn step_plan(t: f64, h: f64) -> (usize, f64) {
    let n = step_count(t, h);
    let near_multiple = (t / h - (t / h).round()).abs() <= 1e-9 * (t / h).max(1.0);
    if n == 0 || near_multiple {
        (n, h)
    } else {
        (n, t - (n - 1) as f64 * h)
    }
}

/// `S[mu](t)` by Fokker-Planck steps of size `dt` (the last step may be shorter).
pub fn evolve_to(spec: &PotentialSpec, mu: &GridMeasure, t: f64, dt: f64) -> Result<GridMeasure> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param("t", format!("must be >= 0, got {t}")));
    }
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("must be > 0, got {dt}")));
    }
    let stepper = FpStepper::new(spec, mu.grid());
    let (n, last) = step_plan(t, dt);
    let mut p = mu.masses().to_vec();
    for k in 1..=n {
        p = stepper.step(&p, if k == n { last } else { dt })?;
    }
    Ok(GridMeasure::from_raw(mu.grid(), p))
}
