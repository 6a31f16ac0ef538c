use cantorwave::geometry::{compute_exponents, discrete_measure, DiscreteMeasure, ExponentSet, ValidatedIfs};
use cantorwave::regularity::{
    cantor_weight_sweep, envelope_check, estimate_spatial_hoelder, estimate_temporal_hoelder, exponent_inequality_check,
    lyapunov_estimate, natural_family_sweep, pair_sites, predicted_exponents, word_aligned_pairs, EnvelopeCheck,
    HoelderReport, InequalityCheck, LyapunovReport, PredictedExponents,
};
use cantorwave::spde::{picard_solve, project_initial_data, simulate_paths, InitialData, NoisePlan, PathEnsemble};
use cantorwave::spectral::{
    assemble_string, eigendecompose, eigenvalue_scaling, resolvent_matrix, supnorm_growth_check, EigenSystem,
    PropagatorEvaluator, StieltjesString,
};
use serde::Serialize;

use crate::config::{InitialField, Loaded};
use crate::error::CliError;
use crate::output::{kv, num, Meta, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Dimension, spectral exponent and the hypothesis flag.
    Exponents,
    /// Eigenvalues and eigenfunction sup-norms of the discretised operator.
    Spectrum,
    /// Wave propagator sampled on a grid.
    Propagator,
    /// Resolvent density sampled on a grid.
    Resolvent,
    /// Monte Carlo ensemble of the stochastic wave equation.
    Simulate,
    /// Spatial and temporal moment-scaling exponents.
    Hoelder,
    /// Moment growth rates and their envelope.
    Intermittency,
    /// Exponent curves for the plotting scripts.
    Figures,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Exponents => "exponents",
            Command::Spectrum => "spectrum",
            Command::Propagator => "propagator",
            Command::Resolvent => "resolvent",
            Command::Simulate => "simulate",
            Command::Hoelder => "hoelder",
            Command::Intermittency => "intermittency",
            Command::Figures => "figures",
        }
    }
}

/// Validates the config for `cmd` and, unless `dry_run`, computes and writes its artifacts.
pub fn run(cmd: Command, cfg: &Loaded, dry_run: bool) -> Result<Vec<std::path::PathBuf>, CliError> {
    let mut sink = Sink::new(&cfg.out_dir, Meta::new(cmd.name(), &cfg.digest, cfg.seed));
    match cmd {
        Command::Exponents => exponents(cfg, dry_run, &mut sink)?,
        Command::Spectrum => spectrum(cfg, dry_run, &mut sink)?,
        Command::Propagator => propagator(cfg, dry_run, &mut sink)?,
        Command::Resolvent => resolvent(cfg, dry_run, &mut sink)?,
        Command::Simulate => simulate(cfg, dry_run, &mut sink)?,
        Command::Hoelder => hoelder(cfg, dry_run, &mut sink)?,
        Command::Intermittency => intermittency(cfg, dry_run, &mut sink)?,
        Command::Figures => figures(cfg, dry_run, &mut sink)?,
    }
    Ok(sink.written)
}

fn f(x: f64) -> String {
    num(x)
}

struct Setup {
    spec: ValidatedIfs<f64>,
    exponents: ExponentSet<f64>,
    measure: DiscreteMeasure<f64>,
}

fn setup(cfg: &Loaded) -> Result<Setup, CliError> {
    let spec = cfg.ifs()?;
    let measure = discrete_measure(&spec, cfg.level()?).map_err(|e| CliError::Config(format!("numerics.level: {e}")))?;
    Ok(Setup {
        exponents: compute_exponents(&spec),
        spec,
        measure,
    })
}

fn solve(cfg: &Loaded, s: &Setup) -> Result<(StieltjesString<f64>, EigenSystem<f64>), CliError> {
    let string = assemble_string(&s.measure, cfg.boundary())?;
    let modes = cfg.config.numerics.modes.unwrap_or(usize::MAX);
    let eigen = eigendecompose(&string, modes)?;
    if let Some(w) = eigen.spectral_gap_warning() {
        eprintln!("warning: {w}");
    }
    Ok((string, eigen))
}

fn check_sites(measure: &DiscreteMeasure<f64>, xs: &[f64], key: &str) -> Result<(), CliError> {
    for &x in xs {
        if measure.atom_index(x, 1e-9).is_none() {
            return Err(CliError::Config(format!(
                "{key}: {x} is not an atom at level {}",
                measure.level
            )));
        }
    }
    Ok(())
}

fn nearest_atom(measure: &DiscreteMeasure<f64>, x: f64) -> f64 {
    let i = measure.positions.partition_point(|&p| p < x);
    let mut best = measure.positions[i.min(measure.len() - 1)];
    if i > 0 && (measure.positions[i - 1] - x).abs() <= (best - x).abs() {
        best = measure.positions[i - 1];
    }
    best
}

fn hypothesis_warning(ex: &ExponentSet<f64>) -> Option<(String, String)> {
    if ex.hypothesis_i_satisfied {
        return None;
    }
    let msg = format!(
        "delta + 1 = {} is not below 1/gamma = {}; the Hölder predictions do not apply",
        ex.delta + 1.0,
        1.0 / ex.gamma
    );
    eprintln!("warning: {msg}");
    Some(kv("warning", msg))
}

fn grid_times(plan: &NoisePlan<f64>, xs: &[f64], key: &str) -> Result<Vec<f64>, CliError> {
    xs.iter()
        .map(|&t| {
            plan.step_of(t)
                .map(|j| plan.time(j))
                .map_err(|e| CliError::Config(format!("{key}: {e}")))
        })
        .collect()
}

fn initial_data(cfg: &Loaded, eigen: &EigenSystem<f64>) -> Result<InitialData<f64>, CliError> {
    let coeffs = |field: &InitialField| match field {
        InitialField::Constant(c) => {
            let c = *c;
            project_initial_data(|_| c, |_| 0.0, eigen).0.u0
        }
        InitialField::Coefficients(v) => v.clone(),
    };
    let init = InitialData::from_coefficients(
        &coeffs(&cfg.config.initial.u0),
        &coeffs(&cfg.config.initial.u1),
        eigen.k_count(),
    );
    init.validate(eigen).map_err(|e| CliError::Config(format!("initial: {e}")))?;
    Ok(init)
}

#[derive(Serialize)]
struct ExponentsDoc {
    exponents: ExponentSet<f64>,
    hypothesis_i_satisfied: bool,
    temporal_denominator: f64,
    supnorm_exponent: f64,
    inequality: InequalityCheck<f64>,
    predicted_limit: PredictedExponents<f64>,
}

fn exponents(cfg: &Loaded, dry_run: bool, sink: &mut Sink) -> Result<(), CliError> {
    let spec = cfg.ifs()?;
    if dry_run {
        return Ok(());
    }
    let ex = compute_exponents(&spec);
    let doc = ExponentsDoc {
        hypothesis_i_satisfied: ex.hypothesis_i_satisfied,
        temporal_denominator: ex.temporal_denominator(),
        supnorm_exponent: ex.supnorm_exponent(),
        inequality: exponent_inequality_check(&ex),
        predicted_limit: predicted_exponents(&ex, f64::INFINITY)?,
        exponents: ex,
    };
    sink.json("exponents.json", &doc)
}

fn spectrum(cfg: &Loaded, dry_run: bool, sink: &mut Sink) -> Result<(), CliError> {
    let s = setup(cfg)?;
    if dry_run {
        return Ok(());
    }
    let (string, eigen) = solve(cfg, &s)?;
    let ex = &s.exponents;
    let bound = ex.supnorm_exponent();
    let k = eigen.k_count();
    let [lo, hi] = cfg
        .config
        .task
        .fit_modes
        .unwrap_or([10, 150.min((k as f64 * 0.8) as usize)]);
    let mut extra = vec![
        kv("level", s.measure.level),
        kv("boundary", format!("{:?}", cfg.boundary()).to_lowercase()),
        kv("d_h", f(ex.d_h)),
        kv("gamma", f(ex.gamma)),
        kv("delta", f(ex.delta)),
        kv("orthonormality_defect", f(eigen.orthonormality_defect())),
        kv("relative_residual", f(eigen.relative_residual(&string))),
    ];
    match (eigenvalue_scaling(&eigen, ex.gamma, lo..=hi), supnorm_growth_check(&eigen, ex, lo..=hi)) {
        (Ok(w), Ok(sn)) => {
            extra.push(kv("fit_modes", format!("{lo}..{hi}")));
            extra.push(kv("weyl_slope", f(w.slope)));
            extra.push(kv("weyl_reference", f(1.0 / ex.gamma)));
            extra.push(kv("weyl_band", f(w.band)));
            extra.push(kv("supnorm_slope", f(sn.slope)));
            extra.push(kv("supnorm_bound", f(sn.bound)));
        }
        _ => extra.push(kv("fit", "unavailable")),
    }
    let rows = (0..k).map(|i| {
        let l = eigen.eigenvalues[i];
        let sup = eigen.supnorm(i);
        let ratio = if l > 0.0 { sup / l.powf(bound) } else { f64::NAN };
        [(i + 1).to_string(), f(l), f(sup), f(ratio)]
    });
    sink.csv(
        "spectrum.csv",
        &extra,
        &["k", "lambda", "supnorm", "lambda_times_gamma_delta_over_2_ratio"],
        rows,
    )
}

fn unit_grid(cfg: &Loaded) -> Result<Vec<f64>, CliError> {
    let n = cfg.config.task.grid.unwrap_or(33);
    if n < 2 {
        return Err(CliError::Config("task.grid: need at least 2 points".into()));
    }
    Ok((0..n).map(|i| i as f64 / (n - 1) as f64).collect())
}

fn grid_rows(xs: &[f64], mut value: impl FnMut(f64, f64) -> Result<f64, CliError>) -> Result<Vec<[String; 3]>, CliError> {
    let mut rows = Vec::with_capacity(xs.len() * xs.len());
    for &x in xs {
        for &y in xs {
            rows.push([f(x), f(y), f(value(x, y)?)]);
        }
    }
    Ok(rows)
}

fn propagator(cfg: &Loaded, dry_run: bool, sink: &mut Sink) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let xs = unit_grid(cfg)?;
    let t = cfg.config.task.t.unwrap_or(0.5);
    if !(t >= 0.0 && t.is_finite()) {
        return Err(CliError::Config(format!("task.t: must be a non-negative time, got {t}")));
    }
    if dry_run {
        return Ok(());
    }
    let (_, eigen) = solve(cfg, &s)?;
    let p = PropagatorEvaluator::with_default_truncation(&eigen);
    let mut extra = vec![kv("t", f(t)), kv("level", s.measure.level), kv("k_trunc", p.k_trunc)];
    for &x in &xs {
        if let Some(w) = p.check_truncation(x) {
            eprintln!("warning: {w}");
            extra.push(kv("warning", w));
        }
    }
    let rows = grid_rows(&xs, |x, y| Ok(p.eval(t, x, y)?))?;
    sink.csv("propagator.csv", &extra, &["x", "y", "value"], rows)
}

fn resolvent(cfg: &Loaded, dry_run: bool, sink: &mut Sink) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let xs = unit_grid(cfg)?;
    let lambda = cfg.config.task.lambda.unwrap_or(1.0);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CliError::Config(format!("task.lambda: must be positive, got {lambda}")));
    }
    if dry_run {
        return Ok(());
    }
    let string = assemble_string(&s.measure, cfg.boundary())?;
    let g = resolvent_matrix(&string, lambda)?;
    let extra = [kv("lambda", f(lambda)), kv("level", s.measure.level)];
    let rows = grid_rows(&xs, |x, y| Ok(g.eval(x, y)))?;
    sink.csv("resolvent.csv", &extra, &["x", "y", "value"], rows)
}

fn orders(cfg: &Loaded, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let o = cfg.config.task.orders.clone().unwrap_or_else(|| default.to_vec());
    if o.is_empty() || o.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(CliError::Config("task.orders: need positive finite moment orders".into()));
    }
    Ok(o)
}

fn sampled_steps(plan: &NoisePlan<f64>, every: f64) -> Result<Vec<f64>, CliError> {
    let stride = (every / plan.dt).round();
    if !(stride >= 1.0) {
        return Err(CliError::Config(format!("task.sample_every: {every} is shorter than numerics.dt")));
    }
    let mut steps: Vec<usize> = (0..=plan.steps).step_by(stride as usize).collect();
    if steps.last() != Some(&plan.steps) {
        steps.push(plan.steps);
    }
    Ok(steps.into_iter().map(|j| plan.time(j)).collect())
}

fn simulate(cfg: &Loaded, dry_run: bool, sink: &mut Sink) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let plan = cfg.plan()?;
    let drift = cfg.drift()?;
    let task = &cfg.config.task;
    let sites = match &task.sites {
        Some(v) => {
            check_sites(&s.measure, v, "task.sites")?;
            v.clone()
        }
        None => {
            let mut v: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|&x| nearest_atom(&s.measure, x)).collect();
            v.dedup();
            v
        }
    };
    let times = match &task.times {
        Some(v) => grid_times(&plan, v, "task.times")?,
        None => sampled_steps(&plan, task.sample_every.unwrap_or(plan.horizon / 10.0))?,
    };
    let qs = orders(cfg, &[2.0, 4.0])?;
    if dry_run {
        return Ok(());
    }
    let mut extra = vec![
        kv("level", s.measure.level),
        kv("paths", plan.n_paths),
        kv("dt", f(plan.dt)),
        kv("horizon", f(plan.horizon)),
    ];
    extra.extend(hypothesis_warning(&s.exponents));
    let (_, eigen) = solve(cfg, &s)?;
    let init = initial_data(cfg, &eigen)?;
    let mut ens: PathEnsemble<f64> = if task.picard.unwrap_or(false) {
        let tol = task.picard_tol.unwrap_or(1e-10);
        let max_iter = task.picard_max_iter.unwrap_or(50);
        let (ens, trace) = picard_solve(&eigen, &init, &drift, &plan, &sites, &times, tol, max_iter)?;
        extra.push(kv("picard_iterations", trace.iterations));
        extra.push(kv(
            "picard_differences",
            trace.differences.iter().map(|&d| f(d)).collect::<Vec<_>>().join(" "),
        ));
        ens
    } else {
        simulate_paths(&eigen, &init, &drift, &plan, &sites, &times)?
    };
    ens.config_digest = Some(cfg.digest.clone());

    let mut rows = Vec::with_capacity(ens.values.len());
    for p in 0..ens.n_paths {
        for (ti, &t) in ens.times.iter().enumerate() {
            for (si, &x) in ens.sites.iter().enumerate() {
                rows.push([p.to_string(), f(t), f(x), f(ens.value(p, ti, si))]);
            }
        }
    }
    sink.csv("ensemble.csv", &extra, &["path_id", "t", "x", "u"], rows)?;

    let mut columns = vec!["t".to_string(), "x".into(), "mean".into(), "var".into()];
    columns.extend(qs.iter().map(|q| format!("moment_{q}")));
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let summary = ens.summary();
    let n = ens.sites.len();
    let rows = summary.iter().enumerate().map(|(i, &(t, x, mean, var))| {
        let (ti, si) = (i / n, i % n);
        let mut row = vec![f(t), f(x), f(mean), f(var)];
        for &q in &qs {
            let m = (0..ens.n_paths).map(|p| ens.value(p, ti, si).abs().powf(q)).sum::<f64>() / ens.n_paths as f64;
            row.push(f(m));
        }
        row
    });
    sink.csv("summary.csv", &extra, &column_refs, rows)
}

#[derive(Serialize)]
struct HoelderDoc {
    exponents: ExponentSet<f64>,
    spatial: HoelderReport<f64>,
    temporal: HoelderReport<f64>,
    site: f64,
    paths: usize,
    dt: f64,
    horizon: f64,
    warning: Option<String>,
}

fn hoelder(cfg: &Loaded, dry_run: bool, sink: &mut Sink) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let plan = cfg.plan()?;
    let drift = cfg.drift()?;
    let task = &cfg.config.task;
    let q = task.q.unwrap_or(2.0);
    if !(q >= 2.0 && q.is_finite()) {
        return Err(CliError::Config(format!("task.q: need a finite order of at least 2, got {q}")));
    }
    let [l0, l1] = task.pair_levels.unwrap_or([2, (s.measure.level - 1).max(2)]);
    let pairs = word_aligned_pairs(&s.spec, l0..=l1, task.pairs_per_level.unwrap_or(8));
    let pair_xs = pair_sites(&pairs);
    check_sites(&s.measure, &pair_xs, "task.pair_levels")?;
    let [j0, j1] = task.lag_powers.unwrap_or([3, 7]);
    let t_space = grid_times(&plan, &[task.t.unwrap_or(plan.horizon)], "task.t")?[0];
    let site = match &task.sites {
        Some(v) if v.len() == 1 => v[0],
        Some(_) => return Err(CliError::Config("task.sites: hoelder takes exactly one site".into())),
        None => s.spec.contractions[s.spec.len() - 1].offset,
    };
    check_sites(&s.measure, &[site], "task.sites")?;
    if dry_run {
        return Ok(());
    }
    let warning = hypothesis_warning(&s.exponents).map(|(_, v)| v);
    let (_, eigen) = solve(cfg, &s)?;
    let init = initial_data(cfg, &eigen)?;
    let limit = predicted_exponents(&s.exponents, f64::INFINITY)?;

    let ens = simulate_paths(&eigen, &init, &drift, &plan, &pair_xs, &[t_space])?;
    let spatial = estimate_spatial_hoelder(&ens, &pairs, q, t_space, limit.spatial)?;
    drop(ens);
    let times: Vec<f64> = (plan.steps / 2..=plan.steps).map(|j| plan.time(j)).collect();
    let ens = simulate_paths(&eigen, &init, &drift, &plan, &[site], &times)?;
    let temporal = estimate_temporal_hoelder(&ens, q, site, plan.dt, j0..=j1, limit.temporal)?;
    drop(ens);

    sink.annotated("hoelder_spatial.csv", &spatial.to_csv())?;
    sink.annotated("hoelder_temporal.csv", &temporal.to_csv())?;
    sink.json(
        "hoelder.json",
        &HoelderDoc {
            exponents: s.exponents,
            spatial,
            temporal,
            site,
            paths: plan.n_paths,
            dt: plan.dt,
            horizon: plan.horizon,
            warning,
        },
    )
}

#[derive(Serialize)]
struct SiteGrowth {
    site: f64,
    reports: Vec<LyapunovReport<f64>>,
    envelope: Option<EnvelopeCheck<f64>>,
}

#[derive(Serialize)]
struct IntermittencyDoc {
    exponents: ExponentSet<f64>,
    sites: Vec<SiteGrowth>,
    lowest_order_positive: bool,
    envelope_bounded: bool,
    envelope_factor: f64,
    paths: usize,
    dt: f64,
    horizon: f64,
}

fn intermittency(cfg: &Loaded, dry_run: bool, sink: &mut Sink) -> Result<(), CliError> {
    let s = setup(cfg)?;
    let plan = cfg.plan()?;
    let drift = cfg.drift()?;
    let task = &cfg.config.task;
    let ps = orders(cfg, &[2.0, 4.0, 6.0])?;
    let sites = match &task.sites {
        Some(v) => v.clone(),
        None => {
            let last = s.spec.contractions[s.spec.len() - 1].offset;
            vec![s.spec.contractions[0].apply(last), last]
        }
    };
    check_sites(&s.measure, &sites, "task.sites")?;
    let times = sampled_steps(&plan, task.sample_every.unwrap_or(0.05))?;
    let [w0, w1] = task.window.unwrap_or([plan.horizon / 2.0, plan.horizon]);
    let factor = task.envelope_factor.unwrap_or(3.0);
    if dry_run {
        return Ok(());
    }
    let (_, eigen) = solve(cfg, &s)?;
    let init = initial_data(cfg, &eigen)?;
    let ens = simulate_paths(&eigen, &init, &drift, &plan, &sites, &times)?;
    let mut out = Vec::new();
    for &x in &sites {
        let reports = ps
            .iter()
            .map(|&p| lyapunov_estimate(&ens, p, x, (w0, w1)))
            .collect::<Result<Vec<_>, _>>()?;
        let envelope = if reports.len() >= 3 {
            match envelope_check(&reports, factor) {
                Ok(e) => Some(e),
                Err(e) => {
                    eprintln!("warning: envelope at x = {x}: {e}");
                    None
                }
            }
        } else {
            None
        };
        out.push(SiteGrowth { site: x, reports, envelope });
    }
    let doc = IntermittencyDoc {
        exponents: s.exponents,
        lowest_order_positive: out.iter().all(|g| g.reports[0].positive),
        envelope_bounded: out.iter().all(|g| g.envelope.as_ref().is_some_and(|e| e.bounded)),
        sites: out,
        envelope_factor: factor,
        paths: plan.n_paths,
        dt: plan.dt,
        horizon: plan.horizon,
    };
    sink.json("intermittency.json", &doc)
}

fn figures(cfg: &Loaded, dry_run: bool, sink: &mut Sink) -> Result<(), CliError> {
    let n = cfg.config.task.points.unwrap_or(33);
    if n < 2 {
        return Err(CliError::Config("task.points: need at least 2 points".into()));
    }
    if dry_run {
        return Ok(());
    }
    let ratios: Vec<f64> = (0..n).map(|i| 0.02 + 0.48 * i as f64 / (n - 1) as f64).collect();
    let dims = natural_family_sweep(&ratios)?;
    sink.csv(
        "fig1_exponents.csv",
        &[kv("family", "two-map symmetric Cantor sets, natural weights, ratio 0.02..0.5")],
        &["d_H", "spatial", "temporal"],
        dims.iter().map(|r| [f(r.d_h), f(r.spatial), f(r.temporal)]),
    )?;
    let mu: Vec<f64> = (1..n).map(|i| 0.18 + 0.32 * i as f64 / (n - 1) as f64).collect();
    let weights = cantor_weight_sweep(&mu)?;
    sink.csv(
        "fig2_cantor_weights.csv",
        &[kv("family", "middle-third Cantor set, weights (mu_min, 1 - mu_min), mu_min in (0.18, 0.5]")],
        &["mu_min", "temporal_exponent"],
        weights.iter().map(|r| [f(r.mu_min), f(r.temporal_exponent)]),
    )
}
