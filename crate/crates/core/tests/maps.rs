use bilip::maps::{by_name, default_step, gallery, sample_derivative_profile, SampleGrid, TestMap};
use bilip::spaces::{norm, SpaceSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(m: &TestMap, rng: &mut ChaCha8Rng, margin: f64) -> Vec<f64> {
    m.domain().iter().map(|&(a, b)| rng.gen_range(a + margin..b - margin)).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn bilipschitz_bounds_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in gallery() {
        let l = m.lipschitz();
        for _ in 0..10_000 {
            let (x, y) = (random_point(&m, &mut rng, 0.0), random_point(&m, &mut rng, 0.0));
            let (d, fd) = (dist(&x, &y), dist(&m.eval(&x), &m.eval(&y)));
            assert!(fd <= l * d * (1.0 + 1e-12), "{}: upper bound at {x:?}, {y:?}", m.name());
            assert!(d <= l * fd * (1.0 + 1e-12), "{}: lower bound at {x:?}, {y:?}", m.name());
        }
    }
}

#[test]
fn jacobian_bounds_on_grid() {
    for m in gallery() {
        let n = m.dim() as i32;
        let (lo, hi) = (m.lipschitz().powi(-n), m.lipschitz().powi(n));
        let grid = SampleGrid::new(m.domain().to_vec(), 64).unwrap();
        for x in grid.centers() {
            let j = m.jacobian(&x).abs();
            assert!(lo <= j && j <= hi, "{}: |J| = {j} at {x:?}", m.name());
        }
    }
}

#[test]
fn round_trip_on_all_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tol = 1e-12;
    for m in gallery() {
        for _ in 0..1000 {
            let x = random_point(&m, &mut rng, 0.0);
            let back = m.invert(&m.eval(&x), tol).unwrap();
            assert!(dist(&back, &x) <= 10.0 * tol * m.lipschitz(), "{} at {x:?}", m.name());
        }
    }
    let sine = by_name("SINE_1D").unwrap();
    for _ in 0..1000 {
        let y = [rng.gen_range(0.0..2.0 * std::f64::consts::PI)];
        let x = sine.invert(&y, tol).unwrap();
        assert!((sine.eval(&x)[0] - y[0]).abs() <= tol);
    }
}

#[test]
fn closed_form_jets_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // truncation h⁴ plus round-off ε/h^k, scaled by the size of the map
    let tolerance = |k: u32| if k <= 2 { 1e-7 } else { 1e-5 };
    for m in gallery() {
        for k in 1..=4 {
            let h = default_step(k);
            for _ in 0..20 {
                let x = random_point(&m, &mut rng, f64::from(k) * h + 1e-9);
                let exact = m.jet(k, &x).unwrap();
                let fd = m.fd_jet(k, &x, h).unwrap();
                let err = fd.max_abs_diff(&exact).unwrap();
                assert!(err <= tolerance(k), "{} k={k}: {err:e}", m.name());
            }
        }
    }
}

#[test]
fn sine_second_derivative_by_differences() {
    let m = by_name("SINE_1D").unwrap();
    for x in [0.5, 1.7, 3.0, 5.5] {
        let fd = m.fd_jet(2, &[x], 1e-3).unwrap().entries()[0];
        assert!((fd + 0.5 * f64::sin(x)).abs() < 1e-6);
    }
}

#[test]
fn inverse_second_derivative_by_differences() {
    let m = by_name("SINE_1D").unwrap();
    for y in [0.8, 2.0, 3.3, 5.0] {
        let x = m.invert(&[y], 1e-12).unwrap()[0];
        let (d1, d2) = (1.0 + 0.5 * x.cos(), -0.5 * x.sin());
        let expected = -d2 / d1.powi(3);
        let fd = m.fd_inverse_jet(2, &[y], 1e-3, 1e-12).unwrap().entries()[0];
        assert!((fd - expected).abs() < 1e-4, "y={y}: {fd} vs {expected}");
    }
}

#[test]
fn sine_profile_integral_converges() {
    let m = by_name("SINE_1D").unwrap();
    let l1: SpaceSpec = "Lp:1".parse().unwrap();
    let grid = SampleGrid::new(m.domain().to_vec(), 4096).unwrap();
    let p = sample_derivative_profile(&m, 2, &grid, false).unwrap();
    assert!((norm(&p, &l1).unwrap() - 2.0).abs() < 1e-5);
}

#[test]
fn profile_norm_stable_under_refinement() {
    let l2: SpaceSpec = "Lp:2".parse().unwrap();
    for name in ["SINE_1D", "SHEAR_2D"] {
        let m = by_name(name).unwrap();
        let at = |res| {
            let grid = SampleGrid::new(m.domain().to_vec(), res).unwrap();
            norm(&sample_derivative_profile(&m, 2, &grid, false).unwrap(), &l2).unwrap()
        };
        let (coarse, fine) = (at(32), at(64));
        assert!((fine - coarse).abs() / fine < 0.01, "{name}: {coarse} vs {fine}");
    }
}

#[test]
fn inverse_profile_lives_on_image_measure() {
    let m = by_name("SINE_1D").unwrap();
    let grid = SampleGrid::interior(&m, 0.05, 128).unwrap();
    let p = sample_derivative_profile(&m, 1, &grid, true).unwrap();
    // |f(G)| = ∫_G f' = f(b) - f(a)
    let (a, b) = grid.bounds()[0];
    let image = m.eval(&[b])[0] - m.eval(&[a])[0];
    assert!((p.total_measure() - image).abs() / image < 1e-4);
}
