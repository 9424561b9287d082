use besov_inflate::initial_data::{
    self, build_u0, carriers, centering_shift, i1_closed_form, oscillatory, phi_derivative,
    spectral_bands, synthesis_grid, ConstructionParams, DataCutoff, Envelope, QuadratureBudget,
    Sign, GAMMA,
};
use besov_inflate::lp::{self, BesovIndex, BlockMode};
use besov_inflate::{Dealias, Error, Field, GridSpec};

fn params16() -> ConstructionParams {
    ConstructionParams::new(16, 4.0).unwrap()
}

fn u0_16() -> Field {
    let p = params16();
    build_u0(&p, synthesis_grid(&p).unwrap(), centering_shift(&p)).unwrap()
}

#[test]
fn synthesis_grid_is_the_experiment_grid() {
    let g = synthesis_grid(&params16()).unwrap();
    assert_eq!(g.points(), 1 << 22);
    assert_eq!(g.length(), 200.0);
}

#[test]
fn preconditions_are_enforced() {
    let p = params16();
    let coarse = GridSpec::new(200.0, 1 << 20).unwrap();
    assert!(matches!(
        build_u0(&p, coarse, centering_shift(&p)),
        Err(Error::Resolution { .. })
    ));
    let g = synthesis_grid(&p).unwrap();
    // Without recentering the bump sits at -362.7, far outside [-100, 100).
    assert!(matches!(build_u0(&p, g, 0.0), Err(Error::Coverage { .. })));
    assert!(matches!(
        build_u0(&p, g, centering_shift(&p) + 60.0),
        Err(Error::Coverage { .. })
    ));
}

#[test]
fn n16_data_properties() {
    let p = params16();
    let u0 = u0_16();

    // Spectral peak sits at a carrier, and the phase slope of u0^ near it
    // gives back the bump location (the origin after recentering).
    let spectrum = u0.fourier_transform();
    let (k_peak, _) = spectrum
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.norm().partial_cmp(&b.1 .1.norm()).unwrap())
        .unwrap();
    let xi_peak = spectrum[k_peak].0;
    let (hi, lo) = carriers(16, 8);
    assert!(
        (xi_peak - hi).abs() < 0.3 || (xi_peak - lo).abs() < 0.3,
        "peak {xi_peak}"
    );
    let dxi = u0.grid().wavenumber_step();
    let z0 = spectrum[k_peak].1;
    let z1 = spectrum[k_peak + 1].1;
    let location = -(z1 / z0).arg() / dxi;
    assert!(location.abs() < 1e-6, "location {location}");

    // Energy outside the stated annulus.
    let bands = spectral_bands(&p);
    let total = u0.spectral_energy(|_| true);
    let outside = u0.spectral_energy(|xi| !bands.iter().any(|&(a, b)| xi >= a && xi <= b));
    eprintln!("outside fraction {:e}", outside / total);
    assert!(
        outside <= 1e-10 * total,
        "outside fraction {:e}",
        outside / total
    );

    // Only block n - 1 = 15 carries u0.
    let b15 = lp::dyadic_block_with(&u0, 15, BlockMode::Lenient).unwrap();
    let diff = b15.sub(&u0).unwrap().lp_norm(2.0) / u0.lp_norm(2.0);
    assert!(diff < 1e-10, "{diff}");
    for j in [-1, 0, 8, 13, 14, 16] {
        let b = lp::dyadic_block_with(&u0, j, BlockMode::Lenient).unwrap();
        assert!(b.lp_norm(2.0) <= 1e-10 * u0.lp_norm(2.0), "block {j}");
    }
    let besov = lp::besov_norm(&u0, BesovIndex::new(1.0, 4.0, 1.0).unwrap()).unwrap();
    let single = 2f64.powi(15) * b15.lp_norm(4.0);
    assert!((besov - single).abs() <= 1e-10 * single);
}

#[test]
fn cancellation_structure_at_n16() {
    let p = params16();
    let g = synthesis_grid(&p).unwrap();
    let shift = centering_shift(&p);
    let d = |o, i| phi_derivative(&p, 8, o, i, g, shift).unwrap();
    let (pp_re, pp_im) = d(Sign::Plus, Sign::Plus);
    let (mm_re, mm_im) = d(Sign::Minus, Sign::Minus);
    let (pm_re, pm_im) = d(Sign::Plus, Sign::Minus);
    let (mp_re, mp_im) = d(Sign::Minus, Sign::Plus);
    let mul = |a: &Field, b: &Field| a.product(b, Dealias::On).unwrap();
    // Real part of (a + ib)(c + id) = ac - bd; imaginary part ad + bc.
    let re = |a, b, c, e| mul(a, c).sub(&mul(b, e)).unwrap();
    let im = |a, b, c, e| mul(a, e).add(&mul(b, c)).unwrap();

    let low_re = re(&pp_re, &pp_im, &mm_re, &mm_im)
        .add(&re(&pm_re, &pm_im, &mp_re, &mp_im))
        .unwrap();
    let low_im = im(&pp_re, &pp_im, &mm_re, &mm_im)
        .add(&im(&pm_re, &pm_im, &mp_re, &mp_im))
        .unwrap();
    let scale = low_re.lp_norm(2.0);
    let killed_re = lp::dyadic_block(&low_re, 8).unwrap().lp_norm(2.0);
    let killed_im = lp::dyadic_block(&low_im, 8).unwrap().lp_norm(2.0);
    assert!(
        killed_re <= 1e-10 * scale && killed_im <= 1e-10 * scale,
        "{killed_re} {killed_im} {scale}"
    );

    // The surviving pair reproduces I_1 at j = 8.
    let main_re = re(&pp_re, &pp_im, &mp_re, &mp_im)
        .add(&re(&pm_re, &pm_im, &mm_re, &mm_im))
        .unwrap();
    let nf = 16f64;
    let k = 2f64.powf(-2.0 * nf - 1.0) * nf.ln().powi(2) / nf;
    let block = lp::dyadic_block(&main_re, 8).unwrap().scale(k);
    let i1 = Field::from_fn(g, |x| i1_closed_form(&p, 8, x - shift));
    // The fields are periodized over a box of length 200, so each bump also
    // multiplies its own images; those cross terms are of relative size
    // |chi_check(200) / chi_check(0)|, a few 1e-6.
    let err = block.sub(&i1).unwrap().lp_norm(4.0) / i1.lp_norm(4.0);
    assert!(err < 1e-4, "{err}");
}

#[test]
fn lemma31_paths_agree_at_n16() {
    let p = params16();
    let grid = initial_data::lemma31_grid(&p, synthesis_grid(&p).unwrap()).unwrap();
    let closed = initial_data::lemma31_closed_form(&p).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    assert!(
        rel(grid.linf_u0, closed.linf_u0) < 1e-3,
        "{} {}",
        grid.linf_u0,
        closed.linf_u0
    );
    assert!(
        rel(grid.linf_dxu0, closed.linf_dxu0) < 1e-2,
        "{} {}",
        grid.linf_dxu0,
        closed.linf_dxu0
    );
    assert!(
        rel(grid.l1_u0, closed.l1_u0) < 2e-2,
        "{} {}",
        grid.l1_u0,
        closed.l1_u0
    );
    // Interpolation bounds the single-block Besov norm from above.
    let direct = grid.besov_direct.unwrap();
    assert!(direct <= grid.besov_b1p1 * (1.0 + 1e-12));
}

#[test]
fn lemma32_paths_agree_at_n16() {
    let p = params16();
    let grid = initial_data::lemma32_grid(&p, synthesis_grid(&p).unwrap()).unwrap();
    let closed = initial_data::lemma32_closed_form(&p, QuadratureBudget::default()).unwrap();
    let rel = (grid.value - closed.value).abs() / closed.value;
    assert!(rel < 1e-2, "grid {} closed {}", grid.value, closed.value);
    assert_eq!(closed.remainder, 0.0);
    let n = 16f64;
    let floor = n.ln().powi(2) / n;
    for &(_, v) in &grid.per_block {
        assert!(v >= 5e-3 * floor, "{}", v / floor);
    }
}

#[test]
fn riemann_limit_is_attained_for_band_limited_envelope() {
    let t = DataCutoff::shared();
    let g = |x: f64| t.check(x).powi(2);
    let env = Envelope::cosine(&g, (-200.0, 200.0));
    let mut prev = f64::INFINITY;
    for k in 6..=16 {
        let omega = 2f64.powi(k) * GAMMA;
        let r = oscillatory::oscillatory_lp_norm(
            &env,
            omega,
            4.0,
            QuadratureBudget { max_samples: 1e8 },
        )
        .unwrap();
        let gap = (r.finite_omega_value - r.limit_value).abs();
        assert!(gap <= 1e-10 * r.limit_value, "k={k}: gap {gap:e}");
        // Non-increasing above the quadrature noise floor.
        assert!(gap <= prev.max(1e-10 * r.limit_value));
        prev = gap;
        assert!(r.limit_value > 0.0);
    }
}

#[test]
fn i1_lower_bound_is_uniform_in_j() {
    let mut normalized_values = Vec::new();
    for n in [16u32, 32, 48, 64] {
        let p = ConstructionParams::new(n, 4.0).unwrap();
        for j in p.freq_set().members() {
            let v = initial_data::i1_norm(&p, j, QuadratureBudget::default()).unwrap();
            let nf = n as f64;
            let normalized = v.limit_value / (nf.ln().powi(2) / nf);
            assert!(normalized > 5e-3, "n={n} j={j}: {normalized}");
            normalized_values.push(normalized);
        }
    }
    let lo = normalized_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = normalized_values.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo < 1.01, "{normalized_values:?}");
}
