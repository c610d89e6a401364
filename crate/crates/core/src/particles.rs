//! The `N`-particle mean-field system
//!
//! ```text
//! dx_i = -Psi'(x_i) dt + (J / N) sum_j x_j dt + sqrt(2) dB_i
//! ```
//!
//! integrated by Euler-Maruyama. Each particle draws its noise from its own
//! ChaCha stream `(seed, stream_i)`, and the empirical mean is accumulated in
//! exact fixed point, so results do not depend on thread count, particle
//! order, or the sign convention of the noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::Serialize;

use crate::flow::evolve_to;
use crate::measure::{Grid, GridMeasure};
use crate::numerics::median;
use crate::potential::PotentialSpec;
use crate::{Error, Result};

/// Fractional bits of the fixed-point mean accumulator.
const MEAN_FRAC_BITS: i32 = 40;
/// Stream id reserved for initial sampling.
const SAMPLING_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    positions: Vec<f64>,
    streams: Vec<ChaCha8Rng>,
    t: f64,
    seed: u64,
    steps: u64,
    noise_sign: f64,
}

impl ParticleEnsemble {
    /// Particle `i` gets noise stream `i`.
    pub fn new(positions: Vec<f64>, seed: u64) -> Result<Self> {
        let ids: Vec<u64> = (0..positions.len() as u64).collect();
        Self::with_streams(positions, seed, &ids)
    }

    /// Explicit stream ids, e.g. to permute particles together with their noise.
    pub fn with_streams(positions: Vec<f64>, seed: u64, stream_ids: &[u64]) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::param("positions", "need at least 2 particles"));
        }
        if positions.len() != stream_ids.len() {
            return Err(Error::param("stream_ids", "one stream per particle"));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("positions", "must be finite"));
        }
        let streams = stream_ids
            .iter()
            .map(|&id| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(id);
                rng
            })
            .collect();
        Ok(Self {
            positions,
            streams,
            t: 0.0,
            seed,
            steps: 0,
            noise_sign: 1.0,
        })
    }

    /// `n` positions drawn by inverse CDF from `mu`.
    pub fn sample(mu: &GridMeasure, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(SAMPLING_STREAM);
        let unit = Uniform::new(0.0, 1.0).expect("valid range");
        let positions = (0..n).map(|_| mu.quantile(unit.sample(&mut rng))).collect();
        Self::new(positions, seed)
    }

    /// Mirror image: negated positions and negated noise.
    pub fn reflected(&self) -> Self {
        Self {
            positions: self.positions.iter().map(|x| -x).collect(),
            noise_sign: -self.noise_sign,
            ..self.clone()
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Empirical mean, exact in fixed point and independent of particle order.
    pub fn mean(&self) -> f64 {
        let scale = 2f64.powi(MEAN_FRAC_BITS);
        let sum: i128 = self.positions.iter().map(|x| (x * scale).round() as i128).sum();
        sum as f64 / scale / self.positions.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.positions.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.len() as f64
    }

    pub fn to_grid(&self, grid: Grid) -> Result<GridMeasure> {
        GridMeasure::from_samples(grid, &self.positions)
    }

    /// One Euler-Maruyama step.
    pub fn em_step(&mut self, spec: &PotentialSpec, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param("dt", format!("must be > 0, got {dt}")));
        }
        let jm = spec.j * self.mean();
        let noise = (2.0 * dt).sqrt();
        let sign = self.noise_sign;
        self.positions
            .par_iter_mut()
            .zip(self.streams.par_iter_mut())
            .for_each(|(x, rng)| {
                let xi: f64 = StandardNormal.sample(rng);
                *x += (jm - spec.dpsi(*x)) * dt + noise * (sign * xi);
            });
        self.steps += 1;
        self.t = self.steps as f64 * dt;
        if let Some(index) = self.positions.iter().position(|x| !x.is_finite()) {
            return Err(Error::ParticleBlowUp { index, t: self.t });
        }
        Ok(())
    }
}

/// Samples `n` particles from `mu0`, steps to `t_end`, and snapshots at each
/// requested time (rounded to the nearest step).
pub fn simulate(
    spec: &PotentialSpec,
    mu0: &GridMeasure,
    n: usize,
    dt: f64,
    t_end: f64,
    seed: u64,
    snapshot_times: &[f64],
) -> Result<Vec<ParticleEnsemble>> {
    let ens = ParticleEnsemble::sample(mu0, n, seed)?;
    run(spec, ens, dt, t_end, snapshot_times)
}

/// Steps an ensemble to `t_end`, snapshotting at the requested times.
pub fn run(
    spec: &PotentialSpec,
    mut ens: ParticleEnsemble,
    dt: f64,
    t_end: f64,
    snapshot_times: &[f64],
) -> Result<Vec<ParticleEnsemble>> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::param("dt", "dt must be > 0 and t_end >= 0"));
    }
    let n_steps = (t_end / dt).round() as u64;
    let mut marks: Vec<u64> = snapshot_times
        .iter()
        .map(|t| ((t / dt).round() as u64).min(n_steps))
        .collect();
    marks.sort_unstable();
    let mut out = Vec::with_capacity(marks.len());
    let mut next = 0;
    for k in 0..=n_steps {
        while next < marks.len() && marks[next] == k {
            out.push(ens.clone());
            next += 1;
        }
        if k < n_steps {
            ens.em_step(spec, dt)?;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub median: f64,
    pub gaps: Vec<f64>,
}

/// For each `n`, the median over seeds of `W2(binned ensemble at t_end, PDE state at t_end)`.
pub fn propagation_gap(
    spec: &PotentialSpec,
    mu0: &GridMeasure,
    n_list: &[usize],
    t_end: f64,
    dt: f64,
    seeds: &[u64],
) -> Result<Vec<GapRow>> {
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("n_list", "must be increasing"));
    }
    let grid = mu0.grid();
    let pde = evolve_to(spec, mu0, t_end, dt)?;
    n_list
        .iter()
        .map(|&n| {
            let gaps = seeds
                .par_iter()
                .map(|&seed| {
                    let snaps = simulate(spec, mu0, n, dt, t_end, seed, &[t_end])?;
                    snaps[0].to_grid(grid)?.wasserstein2(&pde)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(GapRow {
                n,
                median: median(&gaps),
                gaps,
            })
        })
        .collect()
}

/// Least-squares slope of `log median` against `log n`.
pub fn loglog_slope(rows: &[GapRow]) -> f64 {
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.n as f64).ln(), r.median.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
