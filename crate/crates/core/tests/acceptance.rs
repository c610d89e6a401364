//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//!
//! Reference problem: `Psi(z) = z^4/4 - z^2/2`, `L = 4`, `n = 400`, and
//! `J = 1.2`, picked above the threshold `1/Var` given by the variance
//! oracle below.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use mkv_core::ergodicity::{
    basin_certificate, classify, perturbations, small_basin_predict, ClassificationResult, Label,
};
use mkv_core::flow::jko::jko_flow;
use mkv_core::flow::{
    check_contraction, check_energy_identity, check_regularization, evolve, evolve_to, lambda_bound, FlowParams,
};
use mkv_core::measure::transport::wasserstein2_atoms;
use mkv_core::particles::{loglog_slope, propagation_gap};
use mkv_core::potential::{check_assumptions, make_quartic};
use mkv_core::tilt::symmetric_means;
use mkv_core::{Grid, GridMeasure, PotentialSpec, StationaryTriple, Tilt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const L: f64 = 4.0;
const N: usize = 400;
const J_REF: f64 = 1.2;

const STATIONARY_SLOPE_TOL: f64 = 1e-6;
const STATIONARY_W2_TOL: f64 = 1e-4;
const DISSIPATION_SLACK: f64 = 1e-10;
const ENERGY_IDENTITY_TOL: f64 = 0.02;
const T_MAX: f64 = 200.0;
const ENERGY_MATCH_TOL: f64 = 1e-3;
const EQUIVARIANCE_TOL: f64 = 1e-10;
const CONTRACTION_SLACK: f64 = 1e-3;
const REGULARIZATION_FACTOR: f64 = 0.05;
const HALVING_BAND: f64 = 0.3;
const HBAR_SYMMETRY_TOL: f64 = 1e-8;
const HBAR_ENERGY_TOL: f64 = 1e-6;
const GAUSSIAN_LOG_PARTITION_TOL: f64 = 1e-8;
const OT_ORACLE_TOL: f64 = 1e-10;
const SLOPE_BAND: (f64, f64) = (-0.8, -0.3);

struct Context {
    spec: PotentialSpec,
    grid: Grid,
    tilt: Tilt,
    triple: StationaryTriple,
    lambda: f64,
    params: FlowParams,
}

fn ctx() -> &'static Context {
    static CTX: OnceLock<Context> = OnceLock::new();
    CTX.get_or_init(|| {
        let spec = make_quartic(0.25, -0.5, J_REF, L).unwrap();
        let report = check_assumptions(&spec, 4001, 1e-9).unwrap();
        let lambda = lambda_bound(&spec, &report).unwrap();
        let grid = Grid::new(L, N).unwrap();
        let tilt = Tilt::new(&spec, grid).unwrap();
        let triple = tilt.stationary_triple().unwrap();
        let params = FlowParams {
            dt: 1e-2,
            t_max: T_MAX,
            stationarity_tol: 1e-10,
            record_every: 50,
            lambda,
            ..FlowParams::default()
        };
        Context {
            spec,
            grid,
            tilt,
            triple,
            lambda,
            params,
        }
    })
}

/// Independent variance oracle: composite Simpson on `[-L, L]` with 2^16 panels.
fn variance_oracle(psi: impl Fn(f64) -> f64) -> f64 {
    let panels = 1 << 16;
    let h = 2.0 * L / panels as f64;
    let (mut z0, mut z2) = (0.0, 0.0);
    for k in 0..=panels {
        let x = -L + k as f64 * h;
        let w = if k == 0 || k == panels {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let e = (-psi(x)).exp();
        z0 += w * e;
        z2 += w * x * x * e;
    }
    z2 / z0
}

/// Brute-force 1-D optimal transport: north-west-corner plan on sorted atoms.
fn ot_oracle(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let norm = |v: &[(f64, f64)]| {
        let t: f64 = v.iter().map(|p| p.1).sum();
        let mut s: Vec<(f64, f64)> = v.iter().map(|&(x, w)| (x, w / t)).collect();
        s.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        s
    };
    let (a, b) = (norm(a), norm(b));
    let mut plan = vec![vec![0.0; b.len()]; a.len()];
    let (mut ra, mut rb): (Vec<f64>, Vec<f64>) = (a.iter().map(|p| p.1).collect(), b.iter().map(|p| p.1).collect());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let q = ra[i].min(rb[j]);
        plan[i][j] += q;
        ra[i] -= q;
        rb[j] -= q;
        if ra[i] <= rb[j] {
            i += 1;
        } else {
            j += 1;
        }
    }
    let mut cost = 0.0;
    for (i, row) in plan.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            cost += g * (a[i].0 - b[j].0).powi(2);
        }
    }
    cost.sqrt()
}

fn max_gauss_var(mean: f64) -> f64 {
    let room = (L - mean.abs()) / 4.0;
    room * room * 0.99
}

/// Twenty Gaussian initial conditions: five means, four variances each.
fn trichotomy_suite() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &m in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
        let vmax = max_gauss_var(m).min(1.0);
        for k in 0..4 {
            out.push((m, 0.2 + (vmax - 0.2) * k as f64 / 3.0));
        }
    }
    out
}

fn trichotomy_results() -> &'static Vec<((f64, f64), ClassificationResult)> {
    static R: OnceLock<Vec<((f64, f64), ClassificationResult)>> = OnceLock::new();
    R.get_or_init(|| {
        use rayon::prelude::*;
        let c = ctx();
        trichotomy_suite()
            .into_par_iter()
            .map(|(m, v)| {
                let mu = GridMeasure::gaussian(c.grid, m, v).unwrap();
                ((m, v), classify(&c.spec, &c.triple, &mu, &c.params).unwrap())
            })
            .collect()
    })
}

fn f_of(label: Label, t: &StationaryTriple) -> f64 {
    match label {
        Label::Minus => t.f_minus,
        Label::Zero => t.f_zero,
        Label::Plus => t.f_plus,
        Label::Undecided => f64::NAN,
    }
}

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn c01_stationarity() -> Outcome {
    let c = ctx();
    let fine = Tilt::new(&c.spec, c.grid.refined(4).unwrap())
        .unwrap()
        .stationary_triple()
        .unwrap();
    let slopes = [
        fine.mu_minus.metric_slope_sq(&c.spec),
        fine.mu_zero.metric_slope_sq(&c.spec),
        fine.mu_plus.metric_slope_sq(&c.spec),
    ];
    let max_slope = slopes.iter().copied().fold(0.0, f64::max);
    let drift = [&c.triple.mu_minus, &c.triple.mu_plus]
        .iter()
        .map(|mu| evolve_to(&c.spec, mu, 5.0, 1e-3).unwrap().wasserstein2(mu).unwrap())
        .fold(0.0, f64::max);
    (
        max_slope <= STATIONARY_SLOPE_TOL && drift <= STATIONARY_W2_TOL,
        format!("max slope^2 at n=1600 {max_slope:.3e}, max W2(S(5), mu+-) {drift:.3e}"),
    )
}

fn c02_dissipation() -> Outcome {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = FlowParams {
        dt: 1e-3,
        t_max: 1.0,
        record_every: 1,
        stationarity_tol: 1e-300,
        ..c.params
    };
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let m = rng.random_range(-1.0..1.0);
        let v = rng.random_range(0.2..max_gauss_var(m).min(1.0));
        let mu = GridMeasure::gaussian(c.grid, m, v).unwrap();
        let e = evolve(&c.spec, &mu, &params).unwrap().energies();
        worst = e.windows(2).map(|w| w[1] - w[0]).fold(worst, f64::max);
    }
    (
        worst <= DISSIPATION_SLACK,
        format!("largest per-step increase {worst:.3e}"),
    )
}

fn energy_residual(n: usize, dt: f64) -> f64 {
    let c = ctx();
    let grid = Grid::new(L, n).unwrap();
    let mu = GridMeasure::gaussian(grid, 0.5, 0.3).unwrap();
    let params = FlowParams {
        dt,
        t_max: 1.0,
        record_every: 1,
        stationarity_tol: 1e-300,
        ..c.params
    };
    check_energy_identity(&evolve(&c.spec, &mu, &params).unwrap())
}

fn c03_energy_identity() -> Outcome {
    let coarse = energy_residual(N, 1e-3);
    let fine = energy_residual(2 * N, 5e-4);
    (
        coarse <= ENERGY_IDENTITY_TOL && fine < coarse,
        format!("residual {coarse:.3e} at (1e-3, 400), {fine:.3e} at (5e-4, 800)"),
    )
}

fn c04_trichotomy() -> Outcome {
    let c = ctx();
    let results = trichotomy_results();
    let mut ok = true;
    let mut counts = [0usize; 4];
    let mut worst_f: f64 = 0.0;
    let mut latest: f64 = 0.0;
    for ((m, v), r) in results {
        let idx = match r.label {
            Label::Minus => 0,
            Label::Zero => 1,
            Label::Plus => 2,
            Label::Undecided => 3,
        };
        counts[idx] += 1;
        if r.label == Label::Undecided {
            ok = false;
            println!("    undecided: mean {m}, var {v:.3}");
            continue;
        }
        let df = (r.f_final - f_of(r.label, &c.triple)).abs();
        worst_f = worst_f.max(df);
        latest = latest.max(r.t_final);
    }
    ok &= worst_f <= ENERGY_MATCH_TOL && results.len() == 20;
    (
        ok,
        format!(
            "minus/zero/plus/undecided = {}/{}/{}/{}, max |F - F*| {worst_f:.2e}, latest t {latest:.1}",
            counts[0], counts[1], counts[2], counts[3]
        ),
    )
}

fn c05_sign_rule() -> Outcome {
    let c = ctx();
    let mut ok = true;
    let mut applicable = 0;
    let mut agree = 0;
    let mut check = |mu: &GridMeasure, label: Label| {
        let p = small_basin_predict(&c.spec, &c.triple, mu);
        if p.applicable {
            applicable += 1;
            if p.predicted == label {
                agree += 1;
            }
        }
    };
    for eta in [0.05, 0.2, 0.4] {
        let neg = c.tilt.constrained_minimizer(-eta).unwrap();
        let pos = c.tilt.constrained_minimizer(eta).unwrap();
        let ln = classify(&c.spec, &c.triple, &neg, &c.params).unwrap().label;
        let lp = classify(&c.spec, &c.triple, &pos, &c.params).unwrap().label;
        ok &= ln == Label::Minus && lp == Label::Plus;
        check(&neg, ln);
        check(&pos, lp);
    }
    for ((m, v), r) in trichotomy_results() {
        check(&GridMeasure::gaussian(c.grid, *m, *v).unwrap(), r.label);
    }
    ok &= applicable > 0 && agree == applicable;
    (
        ok,
        format!("tilted pairs labelled correctly: {ok}, prediction agrees on {agree}/{applicable} applicable cases"),
    )
}

fn c06_symmetric_basin() -> Outcome {
    let c = ctx();
    let g = c.grid;
    let bump = |m: f64, v: f64| {
        let a = GridMeasure::gaussian(g, m, v).unwrap();
        GridMeasure::mixture(&[(0.5, &a), (0.5, &a.reflect())]).unwrap()
    };
    let symmetric = [
        GridMeasure::gaussian(g, 0.0, 0.3).unwrap(),
        GridMeasure::gaussian(g, 0.0, 0.9).unwrap(),
        GridMeasure::gaussian(g, 0.0, 0.05).unwrap(),
        bump(1.2, 0.2),
        bump(0.6, 0.1),
    ];
    let labels: Vec<Label> = symmetric
        .iter()
        .map(|mu| {
            assert_eq!(mu, &mu.reflect());
            classify(&c.spec, &c.triple, mu, &c.params).unwrap().label
        })
        .collect();
    let all_zero = labels.iter().all(|l| *l == Label::Zero);
    let params = FlowParams {
        t_max: 3.0,
        record_every: 10,
        ..c.params
    };
    let mut worst: f64 = 0.0;
    for (m, v) in [(0.5, 0.3), (-0.2, 0.6), (1.0, 0.2)] {
        let mu = GridMeasure::gaussian(g, m, v).unwrap();
        let a = evolve(&c.spec, &mu, &params).unwrap();
        let b = evolve(&c.spec, &mu.reflect(), &params).unwrap();
        for (x, y) in a.states.iter().zip(&b.states) {
            worst = worst.max(x.measure.reflect().wasserstein2(&y.measure).unwrap());
        }
    }
    (
        all_zero && worst <= EQUIVARIANCE_TOL,
        format!(
            "labels {:?}, max equivariance defect {worst:.1e}",
            labels.iter().map(|l| l.as_str()).collect::<Vec<_>>()
        ),
    )
}

fn random_gaussian(rng: &mut impl Rng, g: Grid) -> GridMeasure {
    let m = rng.random_range(-1.0..1.0);
    let v = rng.random_range(0.1..max_gauss_var(m).min(0.8));
    GridMeasure::gaussian(g, m, v).unwrap()
}

fn c07_contraction() -> Outcome {
    let c = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let mu = random_gaussian(&mut rng, c.grid);
        let nu = random_gaussian(&mut rng, c.grid);
        for t in [0.1, 1.0] {
            worst = worst.max(check_contraction(&c.spec, &mu, &nu, t, 1e-3, c.lambda).unwrap());
        }
    }
    (
        worst <= 1.0 + CONTRACTION_SLACK,
        format!(
            "lambda {:.3}, max W2(S mu, S nu) / (e^(-lambda t) W2(mu, nu)) = {worst:.4}",
            c.lambda
        ),
    )
}

/// Two narrow bumps with a fine-scale ripple.
fn rough_two_bump(g: Grid) -> GridMeasure {
    let a = GridMeasure::gaussian(g, -1.0, 0.05).unwrap();
    let b = GridMeasure::gaussian(g, 1.3, 0.08).unwrap();
    let mix = GridMeasure::mixture(&[(0.4, &a), (0.6, &b)]).unwrap();
    let rippled = mix
        .masses()
        .iter()
        .enumerate()
        .map(|(i, p)| p * (1.0 + 0.5 * if i % 2 == 0 { 1.0 } else { -1.0 }))
        .collect();
    GridMeasure::normalized(g, rippled).unwrap()
}

fn c08_regularization() -> Outcome {
    let c = ctx();
    let margins = |n: usize, dt: f64| -> Vec<(f64, f64)> {
        let g = Grid::new(L, n).unwrap();
        let triple = Tilt::new(&c.spec, g).unwrap().stationary_triple().unwrap();
        let cases = [
            (rough_two_bump(g), triple.mu_zero.clone(), 0.1),
            (triple.mu_plus.clone(), triple.mu_plus.clone(), 0.1),
            (
                GridMeasure::gaussian(g, 0.5, 0.3).unwrap(),
                triple.mu_minus.clone(),
                0.5,
            ),
            (rough_two_bump(g).reflect(), triple.mu_zero.clone(), 0.1),
        ];
        cases
            .iter()
            .map(|(mu, nu, t)| {
                let m = check_regularization(&c.spec, mu, nu, *t, dt, c.lambda).unwrap();
                (m, REGULARIZATION_FACTOR * (nu.free_energy(&c.spec).abs() + 1.0))
            })
            .collect()
    };
    let coarse = margins(N, 1e-3);
    let fine = margins(2 * N, 5e-4);
    let within = coarse.iter().all(|(m, bound)| m <= bound);
    // positive parts of the margins must not grow under refinement
    let shrinking = coarse
        .iter()
        .zip(&fine)
        .all(|(a, b)| b.0.max(0.0) <= a.0.max(0.0) + 1e-12);
    let symmetric = (coarse[0].0 - coarse[3].0).abs() <= 1e-10;
    (
        within && shrinking && symmetric,
        format!(
            "margins {:?} (coarse), {:?} (refined)",
            coarse.iter().map(|m| format!("{:.3e}", m.0)).collect::<Vec<_>>(),
            fine.iter().map(|m| format!("{:.3e}", m.0)).collect::<Vec<_>>()
        ),
    )
}

fn c09_scheme_cross_check() -> Outcome {
    let c = ctx();
    let mu = GridMeasure::gaussian(c.grid, 0.5, 0.3).unwrap();
    let t = 0.5;
    let fp = evolve_to(&c.spec, &mu, t, 1e-4).unwrap();
    let d = |tau: f64| {
        let steps = (t / tau).round() as usize;
        jko_flow(&c.spec, &mu, tau, steps).unwrap().wasserstein2_to_grid(&fp)
    };
    let (d2, d1) = (d(0.02), d(0.01));
    let ratio = d1 / d2;
    (
        (ratio - 0.5).abs() <= 0.5 * HALVING_BAND,
        format!("W2(FP, JKO) = {d2:.4e} at tau 0.02, {d1:.4e} at tau 0.01, ratio {ratio:.3}"),
    )
}

fn c10_hbar_landscape() -> Outcome {
    let c = ctx();
    let m_star = c.triple.m_star;
    let ms = symmetric_means(1.5 * m_star, 601);
    let table = c.tilt.hbar_table(&ms).unwrap();
    let slopes: Vec<f64> = table.windows(2).map(|w| w[1].hbar - w[0].hbar).collect();
    // sign changes of the discrete derivative, located at interior table points
    let changes: Vec<(usize, bool)> = slopes
        .windows(2)
        .enumerate()
        .filter(|(_, s)| (s[0] < 0.0) != (s[1] < 0.0))
        .map(|(k, s)| (k + 1, s[0] < 0.0))
        .collect();
    let h = ms[1] - ms[0];
    let minima: Vec<f64> = changes.iter().filter(|c| c.1).map(|c| ms[c.0]).collect();
    let maxima: Vec<f64> = changes.iter().filter(|c| !c.1).map(|c| ms[c.0]).collect();
    let positive_minima: Vec<f64> = minima.iter().copied().filter(|m| *m > 0.0).collect();
    let landscape = minima.len() == 2
        && maxima.len() == 1
        && maxima[0].abs() <= h
        && minima.iter().all(|m| (m.abs() - m_star).abs() <= h)
        && positive_minima.len() == 1;
    let h0 = c.tilt.hbar(0.0).unwrap();
    let hp = c.tilt.hbar(m_star).unwrap();
    let hm = c.tilt.hbar(-m_star).unwrap();
    let mut worst: f64 = 0.0;
    for m in symmetric_means(1.4 * m_star, 10) {
        let mu = c.tilt.constrained_minimizer(m).unwrap();
        worst = worst.max((mu.free_energy(&c.spec) - c.tilt.hbar(m).unwrap()).abs());
    }
    (
        landscape && h0 > hp && (hp - hm).abs() <= HBAR_SYMMETRY_TOL && worst <= HBAR_ENERGY_TOL,
        format!(
            "minima at {minima:?} (m* = {m_star:.6}), maximum at {maxima:?}, Hbar(0) - Hbar(m*) = {:.4e}, |F - Hbar| <= {worst:.1e}",
            h0 - hp
        ),
    )
}

fn c11_closed_forms() -> Outcome {
    let spec = PotentialSpec::even_polynomial(vec![0.0, 0.5], 0.5, 12.0).unwrap();
    let tilt = Tilt::new(&spec, Grid::new(12.0, 2400).unwrap()).unwrap();
    let log_partition_err = [0.0, 1.0, -1.0]
        .iter()
        .map(|&s: &f64| {
            (tilt.log_partition(s).unwrap() - (0.5 * s * s + 0.5 * (2.0 * std::f64::consts::PI).ln())).abs()
        })
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let atoms = |rng: &mut ChaCha8Rng| {
        let k = rng.random_range(1..=8);
        (0..k)
            .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(0.01..1.0)))
            .collect::<Vec<(f64, f64)>>()
    };
    let mut ot_err: f64 = 0.0;
    for _ in 0..50 {
        let a = atoms(&mut rng);
        let b = atoms(&mut rng);
        ot_err = ot_err.max((wasserstein2_atoms(&a, &b) - ot_oracle(&a, &b)).abs());
    }
    (
        log_partition_err <= GAUSSIAN_LOG_PARTITION_TOL && ot_err <= OT_ORACLE_TOL,
        format!("Gaussian log-partition error {log_partition_err:.1e}, W2 vs brute-force OT {ot_err:.1e}"),
    )
}

fn c12_basin_certificate() -> Outcome {
    let c = ctx();
    let anchor = c.tilt.constrained_minimizer(-0.3).unwrap();
    let cert = match basin_certificate(&c.spec, &c.triple, &anchor, &c.params) {
        Ok(cert) => cert,
        Err(e) => return (false, format!("no certificate: {e}")),
    };
    let perturbed = perturbations(&anchor, cert.delta, 50, 12).unwrap();
    use rayon::prelude::*;
    let labels: Vec<(Label, f64)> = perturbed
        .par_iter()
        .map(|mu| {
            (
                classify(&c.spec, &c.triple, mu, &c.params).unwrap().label,
                mu.wasserstein2(&anchor).unwrap(),
            )
        })
        .collect();
    let minus = labels.iter().filter(|l| l.0 == Label::Minus).count();
    let inside = labels.iter().all(|l| l.1 < cert.delta);
    (
        minus == 50 && inside,
        format!(
            "t' = {:.2}, delta = {:.4e}; {minus}/50 perturbations classify minus, all within delta: {inside}",
            cert.t_prime, cert.delta
        ),
    )
}

fn c13_particles() -> Outcome {
    let c = ctx();
    let mu0 = GridMeasure::gaussian(c.grid, 0.3, 0.5).unwrap();
    let seeds: Vec<u64> = (0..10).collect();
    let rows = propagation_gap(&c.spec, &mu0, &[100, 1000, 10_000], 2.0, 1e-3, &seeds).unwrap();
    let medians: Vec<f64> = rows.iter().map(|r| r.median).collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let slope = loglog_slope(&rows);
    (
        decreasing && slope >= SLOPE_BAND.0 && slope <= SLOPE_BAND.1,
        format!(
            "medians {:?}, log-log slope {slope:.3}",
            medians.iter().map(|m| format!("{m:.4e}")).collect::<Vec<_>>()
        ),
    )
}

fn main() -> ExitCode {
    let c = ctx();
    let var = variance_oracle(|z| c.spec.psi(z));
    println!(
        "setup: Var(e^-Psi) = {var:.6} (oracle), 1/Var = {:.6}, J = {J_REF}, m* = {:.6}, lambda = {}",
        1.0 / var,
        c.triple.m_star,
        c.lambda
    );
    assert!(
        J_REF > 1.0 / var,
        "reference coupling must exceed the variance threshold"
    );
    let criteria: [Criterion; 13] = [
        ("stationarity", c01_stationarity),
        ("dissipation", c02_dissipation),
        ("energy identity", c03_energy_identity),
        ("trichotomy", c04_trichotomy),
        ("sign rule", c05_sign_rule),
        ("symmetric basin", c06_symmetric_basin),
        ("contraction", c07_contraction),
        ("regularization", c08_regularization),
        ("scheme cross-check", c09_scheme_cross_check),
        ("Hbar landscape", c10_hbar_landscape),
        ("closed forms", c11_closed_forms),
        ("basin certificate", c12_basin_certificate),
        ("particles", c13_particles),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = f();
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {:<20} {verdict}  [{:.1}s] {detail}",
            i + 1,
            name,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!pass);
    }
    println!("acceptance: {} failed", failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
