use besov_inflate::solver::{
    h1_energy, integrate, LipschitzMonitor, Silent, SolverConfig, StepEvent,
};
use besov_inflate::{Field, GridSpec};

fn grid(n: usize) -> GridSpec {
    GridSpec::periodic_2pi(n).unwrap()
}

fn smooth(g: GridSpec) -> Field {
    Field::from_fn(g, |x| {
        0.25 * x.cos() + 0.15 * (2.0 * x).sin() - 0.05 * (3.0 * x).cos()
    })
}

const RETURN_STEP: f64 = 0.05 / 8.0;

fn run(u0: &Field, dt: f64, t_end: f64) -> Field {
    let cfg = SolverConfig::new(*u0.grid(), dt, t_end).unwrap();
    integrate(u0, &cfg, &mut Silent).unwrap()
}

fn max_diff(a: &Field, b: &Field) -> f64 {
    a.sub(b).unwrap().max_abs()
}

#[test]
fn energy_is_conserved_for_a_small_cosine() {
    let g = grid(64);
    let u0 = Field::from_fn(g, |x| 0.1 * x.cos());
    let e0 = h1_energy(&u0);
    let mut drift: f64 = 0.0;
    let mut watch = |e: &StepEvent<'_>| {
        drift = drift.max((h1_energy(e.u) - e0).abs() / e0);
        Ok(())
    };
    let cfg = SolverConfig::new(g, 1e-3, 1.0).unwrap();
    integrate(&u0, &cfg, &mut watch).unwrap();
    assert!(drift <= 1e-8, "{drift:e}");
}

#[test]
fn time_reversal_error_is_fourth_order() {
    // v(t, x) = -u(-t, x) solves the same equation: run u0 forward to T with
    // step dt, negate, run forward again with a fine step and negate back.
    // Only the forward leg is coarse, so the return error is its O(dt^4).
    let g = grid(64);
    let u0 = smooth(g);
    let error = |dt: f64| {
        let back = run(&run(&u0, dt, 1.0).scale(-1.0), RETURN_STEP, 1.0).scale(-1.0);
        max_diff(&back, &u0)
    };
    let (e1, e2) = (error(0.1), error(0.05));
    let ratio = e1 / e2;
    assert!(
        (12.0..=20.0).contains(&ratio),
        "{e1:e} {e2:e} ratio {ratio}"
    );
}

#[test]
fn symmetric_round_trip_is_fifth_order() {
    // With the same step both ways the negated run is the RK4 map for -dt, so
    // the leading local errors cancel pairwise.
    let g = grid(64);
    let u0 = smooth(g);
    let error = |dt: f64| {
        let back = run(&run(&u0, dt, 1.0).scale(-1.0), dt, 1.0).scale(-1.0);
        max_diff(&back, &u0)
    };
    let ratio = error(0.1) / error(0.05);
    assert!((26.0..=38.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn halving_dt_gains_a_factor_sixteen() {
    let g = grid(64);
    let u0 = smooth(g);
    let reference = run(&u0, 0.0125, 1.0);
    let e1 = max_diff(&run(&u0, 0.1, 1.0), &reference);
    let e2 = max_diff(&run(&u0, 0.05, 1.0), &reference);
    let ratio = e1 / e2;
    assert!(ratio > 13.0 && ratio < 19.0, "ratio {ratio}");
}

#[test]
fn spatial_error_decays_spectrally() {
    // Analytic data: the error against a 4x finer run falls faster than any
    // fixed power of N, so successive reduction factors keep growing.
    let f = |x: f64| 0.3 / (1.2 - x.cos());
    let solve = |n: usize| run(&Field::from_fn(grid(n), f), 0.005, 0.3);
    let reference = solve(256);
    let error = |n: usize| {
        let u = solve(n);
        let step = 256 / n;
        u.samples()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - reference.samples()[i * step]).abs())
            .fold(0.0, f64::max)
    };
    let errs: Vec<f64> = [16, 32, 64].into_iter().map(error).collect();
    let (r1, r2) = (errs[0] / errs[1], errs[1] / errs[2]);
    assert!(r1 > 4.0 && r2 > 4.0 * r1, "{errs:?}");
}

#[test]
fn gronwall_constant_is_uniform_across_runs() {
    let data: Vec<Box<dyn Fn(f64) -> f64>> = vec![
        Box::new(|x: f64| 0.1 * x.cos()),
        Box::new(|x: f64| 0.5 * x.sin() + 0.2 * (3.0 * x).cos()),
        Box::new(|x: f64| 0.2 * (-2.0 * (1.0 - x.cos())).exp()),
        Box::new(|x: f64| 0.05 * (5.0 * x).cos() + 0.3 * (2.0 * x).sin()),
    ];
    let mut constants = Vec::new();
    for f in &data {
        let u0 = Field::from_fn(grid(128), f);
        let cfg = SolverConfig::new(*u0.grid(), 0.01, 1.0).unwrap();
        let mut monitor = LipschitzMonitor::new();
        integrate(&u0, &cfg, &mut monitor).unwrap();
        constants.push(monitor.max_constant);
    }
    let c_mon = 2.0;
    assert!(constants.iter().all(|&c| c <= c_mon), "{constants:?}");
}

#[test]
fn small_data_keeps_its_lipschitz_size() {
    // Lipschitz size n^{-1/2} log n at n = 16.
    let size = 16f64.ln() / 4.0;
    let g = grid(128);
    let shape = Field::from_fn(g, |x| x.cos() + 0.5 * (3.0 * x).sin());
    let lip = shape.max_abs() + shape.dx().max_abs();
    let u0 = shape.scale(size / lip);
    let cfg = SolverConfig::new(g, 0.01, 1.0).unwrap();
    let mut monitor = LipschitzMonitor::new();
    integrate(&u0, &cfg, &mut monitor).unwrap();
    assert!(monitor.max_ratio <= 2.0, "{}", monitor.max_ratio);
}

#[test]
fn zero_data_stays_zero_over_a_long_run() {
    let g = grid(32);
    let out = run(&Field::zeros(g), 0.05, 2.0);
    assert_eq!(out.max_abs(), 0.0);
}
