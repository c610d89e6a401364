//! One function per subcommand. Each writes its artifacts into `out`.

use mkv_core::ergodicity::{
    basin_certificate, basin_sweep, boundary_probe, classify, perturbations, small_basin_predict,
};
use mkv_core::flow::{check_energy_identity, evolve, lambda_bound};
use mkv_core::measure::io::write_csv;
use mkv_core::particles::{loglog_slope, propagation_gap};
use mkv_core::potential::check_assumptions;
use mkv_core::tilt::symmetric_means;
use mkv_core::{FlowParams, Label, PotentialSpec, StationaryTriple, Tilt};
use rayon::prelude::*;
use serde_json::json;

use crate::artifacts::{Artifacts, Cell, Table};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Everything a command needs once the assumptions have been audited.
struct Setup {
    spec: PotentialSpec,
    tilt: Tilt,
    params: FlowParams,
}

impl Setup {
    fn new(cfg: &RunConfig) -> CliResult<Self> {
        let spec = cfg.spec()?;
        let report = check_assumptions(&spec, cfg.check.samples, cfg.check.tol)?;
        if !report.all_pass() {
            return Err(CliError::Clauses(report.failed_clauses()));
        }
        let tilt = Tilt::new(&spec, cfg.grid()?).map_err(|e| CliError::config(e.to_string()))?;
        let params = FlowParams {
            lambda: lambda_bound(&spec, &report)?,
            ..cfg.flow
        };
        Ok(Self { spec, tilt, params })
    }

    fn triple(&self) -> CliResult<StationaryTriple> {
        Ok(self.tilt.stationary_triple()?)
    }
}

pub fn check(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<()> {
    let spec = cfg.spec()?;
    let report = check_assumptions(&spec, cfg.check.samples, cfg.check.tol)?;
    let failed = report.failed_clauses();
    out.write_json(
        "check.json",
        &json!({
            "potential": spec.describe(),
            "j": spec.j,
            "all_pass": report.all_pass(),
            "failed_clauses": failed,
            "lambda": lambda_bound(&spec, &report).ok(),
            "report": report,
        }),
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Clauses(failed))
    }
}

pub fn stationary(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<()> {
    let s = Setup::new(cfg)?;
    let t = s.triple()?;
    out.write_json(
        "stationary.json",
        &json!({
            "m_star": t.m_star,
            "sigma_star": t.sigma_star,
            "f_minus": t.f_minus,
            "f_zero": t.f_zero,
            "f_plus": t.f_plus,
            "barrier": t.barrier(),
            "mean_minus": t.mu_minus.mean(),
            "mean_zero": t.mu_zero.mean(),
            "mean_plus": t.mu_plus.mean(),
            "slope_sq_minus": t.mu_minus.metric_slope_sq(&s.spec),
            "slope_sq_zero": t.mu_zero.metric_slope_sq(&s.spec),
            "slope_sq_plus": t.mu_plus.metric_slope_sq(&s.spec),
            "lambda": s.params.lambda,
        }),
    )?;
    let grid = s.tilt.grid();
    let mut table = Table::new(&["z", "mu_minus", "mu_zero", "mu_plus"]);
    for i in 0..grid.len() {
        table.row(&[
            Cell::F(grid.center(i)),
            Cell::F(t.mu_minus.masses()[i]),
            Cell::F(t.mu_zero.masses()[i]),
            Cell::F(t.mu_plus.masses()[i]),
        ]);
    }
    out.write_table("stationary.csv", &table)
}

pub fn hbar(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<()> {
    let s = Setup::new(cfg)?;
    let m_star = s
        .tilt
        .critical_points()?
        .m_star
        .ok_or(mkv_core::Error::NoSymmetryBreaking)?;
    let ms = symmetric_means(cfg.hbar.range * m_star, cfg.hbar.points);
    let rows = s.tilt.hbar_table(&ms)?;
    let mut table = Table::new(&["m", "phi", "hbar"]);
    for r in &rows {
        table.row(&[Cell::F(r.m), Cell::F(r.phi), Cell::F(r.hbar)]);
    }
    out.write_table("hbar.csv", &table)?;
    let min = rows.iter().map(|r| r.hbar).fold(f64::INFINITY, f64::min);
    let argmin: Vec<f64> = rows.iter().filter(|r| r.hbar - min <= 1e-12).map(|r| r.m).collect();
    out.write_json(
        "hbar.json",
        &json!({
            "m_star": m_star,
            "points": rows.len(),
            "min_hbar": min,
            "argmin": argmin,
            "hbar_zero": s.tilt.hbar(0.0)?,
            "hbar_m_star": s.tilt.hbar(m_star)?,
            "hbar_minus_m_star": s.tilt.hbar(-m_star)?,
        }),
    )
}

pub fn flow(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<()> {
    let s = Setup::new(cfg)?;
    let triple = s.triple().ok();
    let mut summary = Vec::new();
    for (k, init) in cfg.initial.iter().enumerate() {
        let mu = init.build(&s.tilt, triple.as_ref())?;
        let traj = evolve(&s.spec, &mu, &s.params)?;
        let mut table = Table::new(&["t", "energy", "slope_sq", "mean", "speed"]);
        for (i, st) in traj.states.iter().enumerate() {
            let speed = if i == 0 {
                f64::NAN
            } else {
                traj.metric_derivative[i - 1]
            };
            table.row(&[
                Cell::F(st.t),
                Cell::F(st.energy),
                Cell::F(st.slope_sq),
                Cell::F(st.mean),
                Cell::F(speed),
            ]);
        }
        out.write_table(&format!("flow_{k:03}.csv"), &table)?;
        let last = traj.last();
        let mut buf = Vec::new();
        write_csv(&last.measure, &mut buf)?;
        out.write(&format!("final_{k:03}.csv"), &buf)?;
        summary.push(json!({
            "initial": init,
            "status": traj.status,
            "t_final": last.t,
            "energy_final": last.energy,
            "mean_final": last.mean,
            "records": traj.states.len(),
            "energy_identity_residual": check_energy_identity(&traj),
        }));
    }
    out.write_json("flow.json", &json!({ "params": s.params, "runs": summary }))
}

pub fn classify_cmd(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<()> {
    let s = Setup::new(cfg)?;
    let triple = s.triple()?;
    let measures = cfg
        .initial
        .iter()
        .map(|init| init.build(&s.tilt, Some(&triple)))
        .collect::<CliResult<Vec<_>>>()?;
    let results = measures
        .par_iter()
        .map(|mu| classify(&s.spec, &triple, mu, &s.params))
        .collect::<mkv_core::Result<Vec<_>>>()?;
    let runs: Vec<_> = cfg
        .initial
        .iter()
        .zip(&measures)
        .zip(&results)
        .map(|((init, mu), r)| {
            json!({
                "initial": init,
                "initial_energy": mu.free_energy(&s.spec),
                "result": r,
                "prediction": small_basin_predict(&s.spec, &triple, mu),
            })
        })
        .collect();
    out.write_json(
        "classify.json",
        &json!({
            "m_star": triple.m_star,
            "f_minus": triple.f_minus,
            "f_zero": triple.f_zero,
            "f_plus": triple.f_plus,
            "runs": runs,
        }),
    )
}

fn label_counts<'a>(labels: impl Iterator<Item = &'a Label>) -> serde_json::Value {
    let mut c = [0usize; 4];
    for l in labels {
        c[match l {
            Label::Minus => 0,
            Label::Zero => 1,
            Label::Plus => 2,
            Label::Undecided => 3,
        }] += 1;
    }
    json!({ "minus": c[0], "zero": c[1], "plus": c[2], "undecided": c[3] })
}

pub fn basin_sweep_cmd(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<()> {
    let s = Setup::new(cfg)?;
    let triple = s.triple()?;
    let pairs: Vec<(f64, f64)> = cfg
        .sweep
        .means
        .iter()
        .flat_map(|&m| cfg.sweep.vars.iter().map(move |&v| (m, v)))
        .collect();
    let rows = basin_sweep(&s.spec, &triple, &pairs, &s.params);
    let mut table = Table::new(&[
        "mean", "var", "label", "t_final", "w2_minus", "w2_zero", "w2_plus", "f_final", "reason",
    ]);
    for r in &rows {
        let reason = r.reason.as_deref().unwrap_or("").replace([',', '\n'], ";");
        table.row(&[
            Cell::F(r.mean),
            Cell::F(r.var),
            Cell::S(r.label.as_str()),
            Cell::F(r.t_final),
            Cell::F(r.w2_minus),
            Cell::F(r.w2_zero),
            Cell::F(r.w2_plus),
            Cell::F(r.f_final),
            Cell::S(&reason),
        ]);
    }
    out.write_table("sweep.csv", &table)?;
    let probe = if cfg.sweep.etas.is_empty() {
        Vec::new()
    } else {
        boundary_probe(&s.tilt, &triple, &cfg.sweep.etas, &s.params)?
    };
    if !probe.is_empty() {
        let mut table = Table::new(&["eta", "label_negative", "label_positive", "w2_to_zero"]);
        for p in &probe {
            table.row(&[
                Cell::F(p.eta),
                Cell::S(p.label_negative.as_str()),
                Cell::S(p.label_positive.as_str()),
                Cell::F(p.w2_to_zero),
            ]);
        }
        out.write_table("probe.csv", &table)?;
    }
    out.write_json(
        "sweep.json",
        &json!({
            "cases": rows.len(),
            "labels": label_counts(rows.iter().map(|r| &r.label)),
            "probe_sign_rule_holds": probe
                .iter()
                .all(|p| p.label_negative == Label::Minus && p.label_positive == Label::Plus),
        }),
    )
}

pub fn certificate(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<()> {
    let seed = cfg.require_seed("certificate")?;
    let s = Setup::new(cfg)?;
    let triple = s.triple()?;
    let anchor = cfg.certificate.anchor.build(&s.tilt, Some(&triple))?;
    let cert = basin_certificate(&s.spec, &triple, &anchor, &s.params)?;
    let perturbed = perturbations(&anchor, cert.delta, cfg.certificate.perturbations, seed)?;
    let checks = perturbed
        .par_iter()
        .map(|mu| {
            Ok((
                mu.wasserstein2(&anchor)?,
                classify(&s.spec, &triple, mu, &s.params)?.label,
            ))
        })
        .collect::<mkv_core::Result<Vec<_>>>()?;
    let mut table = Table::new(&["index", "w2_to_anchor", "label"]);
    for (k, (w, l)) in checks.iter().enumerate() {
        table.row(&[Cell::U(k as u64), Cell::F(*w), Cell::S(l.as_str())]);
    }
    out.write_table("perturbations.csv", &table)?;
    out.write_json(
        "certificate.json",
        &json!({
            "certificate": cert,
            "perturbations": checks.len(),
            "all_in_target_basin": checks.iter().all(|c| c.1 == cert.target),
            "labels": label_counts(checks.iter().map(|c| &c.1)),
        }),
    )
}

pub fn particles(cfg: &RunConfig, out: &mut Artifacts) -> CliResult<()> {
    let seed = cfg.require_seed("particles")?;
    let s = Setup::new(cfg)?;
    let opts = &cfg.particles;
    let triple = s.triple().ok();
    let mu0 = opts.initial.build(&s.tilt, triple.as_ref())?;
    let seeds: Vec<u64> = (0..opts.replicas as u64).map(|k| seed.wrapping_add(k)).collect();
    let rows = propagation_gap(&s.spec, &mu0, &opts.sizes, opts.t_end, opts.dt, &seeds)?;
    let mut table = Table::new(&["n", "seed", "gap"]);
    for r in &rows {
        for (sd, g) in seeds.iter().zip(&r.gaps) {
            table.row(&[Cell::U(r.n as u64), Cell::U(*sd), Cell::F(*g)]);
        }
    }
    out.write_table("gaps.csv", &table)?;
    let medians: Vec<_> = rows.iter().map(|r| json!({ "n": r.n, "median": r.median })).collect();
    out.write_json(
        "particles.json",
        &json!({
            "t_end": opts.t_end,
            "dt": opts.dt,
            "seeds": seeds,
            "medians": medians,
            "loglog_slope": if rows.len() >= 2 { Some(loglog_slope(&rows)) } else { None },
        }),
    )
}
