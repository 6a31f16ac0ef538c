use cantorwave::geometry::{discrete_measure, validate_ifs, Boundary, IfsSpec};
use cantorwave::spde::{
    deterministic_part, moment_estimator, picard_solve, project_initial_data, simulate_paths, Drift, DriftSpec,
    InitialData, NoisePlan,
};
use cantorwave::spectral::{assemble_string, eigendecompose, EigenSystem, PropagatorEvaluator};
use cantorwave::stats::{mean_estimate, shape, variance};

fn eigen(b: Boundary, level: usize) -> EigenSystem<f64> {
    let dm = discrete_measure(&validate_ifs(IfsSpec::cantor(b)).unwrap(), level).unwrap();
    eigendecompose(&assemble_string(&dm, b).unwrap(), usize::MAX).unwrap()
}

fn additive() -> DriftSpec<f64> {
    DriftSpec::new(Drift::Constant { value: 1.0 }).unwrap()
}

#[test]
fn no_noise_reproduces_deterministic_part() {
    let e = eigen(Boundary::Neumann, 5);
    let (init, _) = project_initial_data(|x| 1.0 + x, |x| x * x, &e);
    let plan = NoisePlan::new(3, 4, 1e-2, 1.0).unwrap();
    let sites = [e.nodes[0], e.nodes[7], e.nodes[20]];
    let times = [0.0, 0.25, 1.0];
    let ens = simulate_paths(&e, &init, &DriftSpec::new(Drift::Zero).unwrap(), &plan, &sites, &times).unwrap();
    for (ti, &t) in times.iter().enumerate() {
        for (si, &x) in sites.iter().enumerate() {
            let (v2, v3) = deterministic_part(&e, &init, t, x).unwrap();
            for p in 0..4 {
                assert!((ens.value(p, ti, si) - (v2 + v3)).abs() < 1e-10);
            }
            let m = moment_estimator(&ens, 2.0, ti, si).unwrap();
            assert!((m.value - (v2 + v3).powi(2)).abs() < 1e-9);
            assert_eq!(m.std_error, 0.0);
        }
    }
}

#[test]
fn walsh_isometry_and_zero_mean() {
    let e = eigen(Boundary::Dirichlet, 5);
    let init = InitialData::zero(e.k_count());
    let plan = NoisePlan::new(11, 1500, 2e-3, 0.6).unwrap();
    let sites = [e.nodes[5], e.nodes[16]];
    let times = [0.2, 0.6];
    let ens = simulate_paths(&e, &init, &additive(), &plan, &sites, &times).unwrap();
    let p = PropagatorEvaluator::new(&e, e.k_count()).unwrap();
    for (ti, &t) in times.iter().enumerate() {
        for (si, &x) in sites.iter().enumerate() {
            let m2 = moment_estimator(&ens, 2.0, ti, si).unwrap();
            let oracle = p.integrated_row_norm_squared(t, x, 400).unwrap();
            assert!(m2.z_score(oracle).abs() < 3.5, "t={t} x={x} {m2:?} {oracle}");
            let mean = mean_estimate(&ens.samples(ti, si));
            assert!(mean.z_score(0.0).abs() < 3.5);
        }
    }
}

#[test]
fn additive_noise_is_gaussian() {
    let e = eigen(Boundary::Dirichlet, 4);
    let init = InitialData::zero(e.k_count());
    let plan = NoisePlan::new(5, 5000, 5e-3, 0.5).unwrap();
    let ens = simulate_paths(&e, &init, &additive(), &plan, &[e.nodes[6]], &[0.5]).unwrap();
    let (skew, kurt) = shape(&ens.samples(0, 0));
    assert!(skew.z_score(0.0).abs() < 5.0 && kurt.z_score(0.0).abs() < 5.0);
}

#[test]
fn refinement_in_dt_is_consistent() {
    let e = eigen(Boundary::Dirichlet, 5);
    let init = InitialData::zero(e.k_count());
    let x = e.nodes[9];
    let p = PropagatorEvaluator::new(&e, e.k_count()).unwrap();
    // The scheme's variance is the left Riemann sum of the isometry integrand.
    let riemann = |dt: f64| {
        let n = (0.5 / dt).round() as usize;
        (0..n).map(|j| p.row_norm_squared(0.5 - j as f64 * dt, x).unwrap() * dt).sum::<f64>()
    };
    let (a, b) = (riemann(1e-3), riemann(5e-4));
    assert!((a / b - 1.0).abs() < 0.02);
    let plan = NoisePlan::new(1, 3000, 1e-3, 0.5).unwrap();
    let ens = simulate_paths(&e, &init, &additive(), &plan, &[x], &[0.5]).unwrap();
    let v = variance(&ens.samples(0, 0));
    assert!((v / a - 1.0).abs() < 4.0 * (2.0f64 / 3000.0).sqrt());
}

#[test]
fn deterministic_across_thread_counts() {
    let e = eigen(Boundary::Neumann, 4);
    let (init, _) = project_initial_data(|_| 1.0, |_| 1.0, &e);
    let drift = DriftSpec::new(Drift::Linear { lambda: 2.0 }).unwrap();
    let plan = NoisePlan::new(99, 37, 1e-2, 0.5).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_paths(&e, &init, &drift, &plan, &[e.nodes[3], e.nodes[9]], &[0.1, 0.5]).unwrap())
    };
    let a = run(1);
    let b = run(3);
    assert_eq!(a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    assert_eq!(a, run(1));
}

#[test]
fn picard_additive_converges_immediately() {
    let e = eigen(Boundary::Dirichlet, 4);
    let init = InitialData::zero(e.k_count());
    let plan = NoisePlan::new(8, 6, 1e-2, 0.4).unwrap();
    let sites = [e.nodes[4]];
    let (ens, trace) = picard_solve(&e, &init, &additive(), &plan, &sites, &[0.4], 1e-12, 10).unwrap();
    assert_eq!(trace.differences.len(), 2);
    assert!(trace.differences[0] > 0.0);
    assert_eq!(trace.differences[1], 0.0);
    let explicit = simulate_paths(&e, &init, &additive(), &plan, &sites, &[0.4]).unwrap();
    assert_eq!(ens.values, explicit.values);
}

#[test]
fn picard_linear_matches_explicit_scheme() {
    let e = eigen(Boundary::Neumann, 4);
    let (init, _) = project_initial_data(|_| 1.0, |_| 1.0, &e);
    let drift = DriftSpec::new(Drift::Linear { lambda: 1.0 }).unwrap();
    let plan = NoisePlan::new(21, 5, 1e-2, 0.3).unwrap();
    let sites = [e.nodes[2], e.nodes[11]];
    let times = [0.1, 0.3];
    let (ens, trace) = picard_solve(&e, &init, &drift, &plan, &sites, &times, 1e-12, 100).unwrap();
    let d = &trace.differences;
    assert!(d.len() > 3);
    // Factorial-type decay: late contraction ratios fall towards zero.
    let late = trace.contraction_estimates[d.len() / 2..].iter().copied().filter(|r| *r > 0.0).fold(0.0, f64::max);
    assert!(late < 0.5, "{:?}", trace.contraction_estimates);
    let explicit = simulate_paths(&e, &init, &drift, &plan, &sites, &times).unwrap();
    for (a, b) in ens.values.iter().zip(&explicit.values) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn picard_reports_non_convergence() {
    let e = eigen(Boundary::Neumann, 3);
    let (init, _) = project_initial_data(|_| 1.0, |_| 0.0, &e);
    let drift = DriftSpec::new(Drift::Linear { lambda: 3.0 }).unwrap();
    let plan = NoisePlan::new(2, 2, 1e-2, 0.5).unwrap();
    let err = picard_solve(&e, &init, &drift, &plan, &[e.nodes[1]], &[0.5], 1e-14, 2).unwrap_err();
    assert!(matches!(err, cantorwave::Error::NoConvergence { iterations: 2, .. }));
}

#[test]
fn rejects_off_grid_requests() {
    let e = eigen(Boundary::Neumann, 3);
    let init = InitialData::zero(e.k_count());
    let plan = NoisePlan::new(2, 2, 1e-2, 0.5).unwrap();
    assert!(simulate_paths(&e, &init, &additive(), &plan, &[0.5], &[0.5]).is_err());
    assert!(simulate_paths(&e, &init, &additive(), &plan, &[0.0], &[0.505]).is_err());
    assert!(simulate_paths(&e, &init, &additive(), &plan, &[0.0], &[0.5, 0.2]).is_err());
}

#[test]
fn multiplicative_blowup_is_reported() {
    let e = eigen(Boundary::Neumann, 3);
    let (init, _) = project_initial_data(|_| 1e300, |_| 1e300, &e);
    let drift = DriftSpec::new(Drift::Linear { lambda: 1e10 }).unwrap();
    let plan = NoisePlan::new(2, 2, 1e-2, 1.0).unwrap();
    let err = simulate_paths(&e, &init, &drift, &plan, &[0.0], &[1.0]).unwrap_err();
    assert!(matches!(err, cantorwave::Error::Blowup { path: 0, .. }));
}
