use cantorwave::geometry::{discrete_measure, validate_ifs, Boundary, IfsSpec};
use cantorwave::regularity::{
    envelope_check, estimate_spatial_hoelder, estimate_temporal_hoelder, lyapunov_estimate, pair_sites,
    word_aligned_pairs, HoelderReport, LyapunovReport,
};
use cantorwave::spde::{project_initial_data, simulate_paths, Drift, DriftSpec, InitialData, NoisePlan};
use cantorwave::spectral::{assemble_string, eigendecompose, EigenSystem};
use cantorwave::Error;

fn setup(spec: IfsSpec<f64>, level: usize) -> (cantorwave::geometry::ValidatedIfs<f64>, EigenSystem<f64>) {
    let b = spec.boundary;
    let spec = validate_ifs(spec).unwrap();
    let dm = discrete_measure(&spec, level).unwrap();
    let e = eigendecompose(&assemble_string(&dm, b).unwrap(), usize::MAX).unwrap();
    (spec, e)
}

#[test]
fn additive_cantor_moment_scaling() {
    let (spec, e) = setup(IfsSpec::cantor(Boundary::Dirichlet), 6);
    let init = InitialData::zero(e.k_count());
    let drift = DriftSpec::new(Drift::Constant { value: 1.0 }).unwrap();
    let plan = NoisePlan::new(4, 600, 1e-3, 1.0).unwrap();
    let pairs = word_aligned_pairs(&spec, 2..=5, 8);
    let ens = simulate_paths(&e, &init, &drift, &plan, &pair_sites(&pairs), &[1.0]).unwrap();
    let s = estimate_spatial_hoelder(&ens, &pairs, 2.0, 1.0, 0.5).unwrap();
    assert!(s.exponent > 0.35 && s.exponent < 0.65, "{s:?}");
    assert!(s.std_error > 0.0 && s.ci_low < s.exponent && s.exponent < s.ci_high);
    let json = serde_json::to_string(&s).unwrap();
    assert_eq!(serde_json::from_str::<HoelderReport<f64>>(&json).unwrap(), s);
    assert_eq!(HoelderReport::from_csv(&s.to_csv()).unwrap(), s);

    let times: Vec<f64> = (500..=1000).map(|j| j as f64 * 1e-3).collect();
    let ens = simulate_paths(&e, &init, &drift, &plan, &[2.0 / 3.0], &times).unwrap();
    let t = estimate_temporal_hoelder(&ens, 2.0, 2.0 / 3.0, 1e-3, 3..=7, 0.6131).unwrap();
    assert!(t.exponent > 0.5 && t.exponent < 0.75, "{t:?}");
    assert!(matches!(
        estimate_temporal_hoelder(&ens, 2.0, 2.0 / 3.0, 1e-3, 3..=5, 0.6131),
        Err(Error::InsufficientScales { found: 3, needed: 4 })
    ));
}

#[test]
fn too_few_spatial_scales() {
    let (spec, e) = setup(IfsSpec::cantor(Boundary::Dirichlet), 4);
    let init = InitialData::zero(e.k_count());
    let drift = DriftSpec::new(Drift::Constant { value: 1.0 }).unwrap();
    let plan = NoisePlan::new(4, 20, 1e-2, 0.5).unwrap();
    let pairs = word_aligned_pairs(&spec, 1..=3, 4);
    let ens = simulate_paths(&e, &init, &drift, &plan, &pair_sites(&pairs), &[0.5]).unwrap();
    assert!(matches!(
        estimate_spatial_hoelder(&ens, &pairs, 2.0, 0.5, 0.5),
        Err(Error::InsufficientScales { .. })
    ));
}

#[test]
fn linear_multiplicative_noise_grows() {
    let (_, e) = setup(IfsSpec::cantor(Boundary::Neumann), 4);
    let (init, _) = project_initial_data(|_| 1.0, |_| 1.0, &e);
    let drift = DriftSpec::new(Drift::Linear { lambda: 5.0 }).unwrap();
    let plan = NoisePlan::new(8, 400, 2e-3, 2.0).unwrap();
    let times: Vec<f64> = (0..=20).map(|j| j as f64 * 0.1).collect();
    let x = 2.0 / 3.0;
    let ens = simulate_paths(&e, &init, &drift, &plan, &[x], &times).unwrap();
    let reports: Vec<LyapunovReport<f64>> =
        [2.0, 4.0, 6.0].iter().map(|&p| lyapunov_estimate(&ens, p, x, (1.0, 2.0)).unwrap()).collect();
    assert!(reports[0].positive, "{:?}", reports[0]);
    let env = envelope_check(&reports, 3.0).unwrap();
    assert_eq!(env.normalized[0], 1.0);
    assert!(env.c_fit > 0.0);
    let json = serde_json::to_string(&reports[1]).unwrap();
    assert_eq!(serde_json::from_str::<LyapunovReport<f64>>(&json).unwrap(), reports[1]);
    assert!(matches!(lyapunov_estimate(&ens, 2.0, x, (0.5, 2.0)), Err(Error::InsufficientHorizon(_))));
}
