use fwlab_core::diagnostics::{count_peaks, detect_shocks, extrema_series, l1_stability};
use fwlab_core::helmholtz::HelmholtzSolver;
use fwlab_core::waves::{evolve_wave_as_initial_data, orbit_return_gap, solve_from_cosine};
use fwlab_core::{run, GodunovConfig, InitialData, PeriodicGrid, StateField};
use proptest::prelude::*;

fn rotate(values: &[f64], m: usize) -> Vec<f64> {
    let n = values.len();
    (0..n).map(|k| values[(k + n - m) % n]).collect()
}

fn field(values: Vec<f64>) -> StateField {
    let grid = PeriodicGrid::new(values.len()).unwrap();
    StateField::new(grid, values, 0.0).unwrap()
}

/// Sawtooth with `teeth` sharp drops plus bounded noise.
fn sawtooth(n: usize, teeth: usize, height: f64, noise: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let s = (k * teeth) as f64 / n as f64;
            height * (s - s.floor()) + noise[k % noise.len()]
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detection_commutes_with_rotation(
        teeth in 1usize..4,
        height in 0.5f64..3.0,
        noise in prop::collection::vec(-1e-3f64..1e-3, 17),
        shift in 0usize..120,
    ) {
        let n = 120;
        let base = sawtooth(n, teeth, height, &noise);
        let a = detect_shocks(&field(base.clone()), 0.25 * height);
        let b = detect_shocks(&field(rotate(&base, shift)), 0.25 * height);
        prop_assert_eq!(a.len(), teeth);
        prop_assert_eq!(a.len(), b.len());
        let h = 1.0 / n as f64;
        for ra in &a {
            let moved = (ra.position + shift as f64 * h).rem_euclid(1.0);
            let hit = b.iter().any(|rb| {
                let gap = (rb.position - moved).abs();
                gap.min(1.0 - gap) < 1e-12 && (rb.jump - ra.jump).abs() < 1e-15
            });
            prop_assert!(hit, "{:?} not found after rotation by {}", ra, shift);
        }
    }

    #[test]
    fn nonlocal_term_is_skew(values in prop::collection::vec(-1.0f64..1.0, 8..200)) {
        let u = field(values);
        let v = HelmholtzSolver::new(*u.grid()).apply_nonlocal(&u).unwrap();
        let scale = u.l2_norm() * v.l2_norm() + 1e-300;
        prop_assert!(u.dot(&v).abs() / scale < 1e-12);
        prop_assert!(v.mass().abs() < 1e-13 * (1.0 + u.l1_norm()));
    }

    #[test]
    fn godunov_conserves_mass(values in prop::collection::vec(-1.0f64..1.0, 16..96)) {
        let u0 = field(values);
        let cfg = GodunovConfig::new(u0.sup_norm().max(1e-3), 0.05).unwrap();
        let traj = run(&u0, &cfg).unwrap();
        let end = traj.last().unwrap();
        prop_assert!((end.mass() - u0.mass()).abs() < 1e-13);
        prop_assert!(end.max() <= u0.max() + 0.05 * 0.5 * u0.oscillation() + 1e-12);
    }

    #[test]
    fn peak_count_ignores_rotation(
        values in prop::collection::vec(-1.0f64..1.0, 4..64),
        shift in 0usize..64,
    ) {
        let shift = shift % values.len();
        prop_assert_eq!(count_peaks(&values), count_peaks(&rotate(&values, shift)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn l1_report_is_symmetric(
        a in prop::collection::vec(-1.0f64..1.0, 48),
        b in prop::collection::vec(-1.0f64..1.0, 48),
    ) {
        let (u0, v0) = (field(a), field(b));
        prop_assume!(u0.l1_distance(&v0).unwrap() > 0.0);
        let cfg = GodunovConfig::new(1.0, 0.2).unwrap().with_output_every(0.05);
        let uv = l1_stability(&u0, &v0, &cfg).unwrap();
        let vu = l1_stability(&v0, &u0, &cfg).unwrap();
        prop_assert_eq!(&uv.distances, &vu.distances);
        prop_assert_eq!(uv.max_ratio, vu.max_ratio);
        prop_assert!(uv.pass());
    }
}

#[test]
fn cosine_modes_have_matching_peak_counts() {
    let grid = PeriodicGrid::new(240).unwrap();
    for m in 1..=5 {
        let u = StateField::from_fn(grid, |x| (2.0 * std::f64::consts::PI * m as f64 * x).cos()).unwrap();
        assert_eq!(count_peaks(u.values()), m);
    }
    assert_eq!(count_peaks(&[1.0; 16]), 0);
}

#[test]
fn burgers_maximum_never_grows() {
    let grid = PeriodicGrid::new(400).unwrap();
    let u0 = InitialData::Data2.sample(grid).unwrap();
    let cfg = GodunovConfig::new(0.5, 2.0).unwrap().burgers_only().with_output_every(0.1);
    let series = extrema_series(&run(&u0, &cfg).unwrap());
    for w in series.max.windows(2) {
        assert!(w[1] <= w[0] + 1e-14);
    }
    for w in series.min.windows(2) {
        assert!(w[1] >= w[0] - 1e-14);
    }
    assert_eq!(series.peaks[0], 3);
}

#[test]
fn traveling_wave_orbit_closes_after_one_period() {
    let grid = PeriodicGrid::new(200).unwrap();
    let profile = solve_from_cosine(grid, 0.0255).unwrap();
    let evo = evolve_wave_as_initial_data(&profile, 1.2 / profile.c, None, 10.0).unwrap();
    let gap = orbit_return_gap(&evo.orbit, profile.c).unwrap();
    assert!(gap < 0.05 * profile.amplitude(), "{gap:e} vs {:e}", profile.amplitude());
}
