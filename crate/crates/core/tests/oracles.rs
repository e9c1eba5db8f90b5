//! Exact finite-k values checked against distributions computed by statrs
//! and against direct summation, independently of the crate's own log-space code.

use approx::assert_relative_eq;
use bergman_core::asymptotics::{erf_cdf, predict_bulk, predict_interface, predict_onshell, tail_mass, BulkVariant};
use bergman_core::charsum::{interval_character, CharacterRoute};
use bergman_core::spectra::{BasisOptions, Interval, NormSource, WeightBasis};
use bergman_core::{ModelGeometry, Point};
use num_complex::Complex64;
use statrs::distribution::{Binomial, Discrete, DiscreteCDF, Poisson};

fn bf(k: u32, r: f64) -> WeightBasis {
    WeightBasis::build_with(&ModelGeometry::bf1(), k, BasisOptions { radius: r, norms: NormSource::ClosedForm }).unwrap()
}

fn re(x: f64) -> Point {
    Point::from_reals(&[x])
}

#[test]
fn poisson_pmf_at_k_100() {
    let v = bf(100, 1.0).equivariant_density(&re(1.0), 100).unwrap().to_f64();
    let oracle = 100.0 * Poisson::new(100.0).unwrap().pmf(100);
    assert_relative_eq!(v, oracle, max_relative = 1e-12);
    assert!((v - 3.98610).abs() < 5e-6);
    let pred = predict_onshell(&ModelGeometry::bf1(), 100, &re(1.0)).unwrap().value.to_f64();
    assert!((pred - 3.98942).abs() < 5e-6);
    assert!((v / pred - (1.0 - 1.0 / 1200.0)).abs() < 1e-5);
}

#[test]
fn bf_densities_are_scaled_poisson_weights() {
    for (k, r2) in [(20u32, 0.3f64), (75, 1.0), (300, 1.7)] {
        let z = re(r2.sqrt());
        let basis = bf(k, r2.sqrt() * 1.001);
        let p = Poisson::new(f64::from(k) * r2).unwrap();
        for (j, log) in basis.log_densities(&z).unwrap() {
            let oracle = f64::from(k).ln() + p.ln_pmf(j);
            if oracle > -600.0 {
                assert!((log - oracle).abs() < 1e-9 * oracle.abs().max(1.0), "k={k} j={j}");
            }
        }
    }
}

#[test]
fn cp1_densities_are_scaled_binomial_weights() {
    for (k, x) in [(10u32, 0.5f64), (64, 0.2), (500, 0.73)] {
        let z = re((x / (1.0 - x)).sqrt());
        let basis = WeightBasis::build(&ModelGeometry::cp1(), k).unwrap();
        let b = Binomial::new(x, u64::from(k)).unwrap();
        for (j, log) in basis.log_densities(&z).unwrap() {
            let oracle = f64::from(k + 1).ln() + b.ln_pmf(j);
            assert!((log - oracle).abs() < 1e-9 * oracle.abs().max(1.0), "k={k} j={j}");
        }
    }
}

#[test]
fn partial_density_is_a_poisson_cdf() {
    let v = bf(100, 1.0).partial_density(&re(1.0), &Interval::at_most(1.0)).unwrap().to_f64();
    assert_relative_eq!(v, 100.0 * Poisson::new(100.0).unwrap().cdf(100), max_relative = 1e-11);
    assert_relative_eq!(v / 100.0, 0.5265621985299985, max_relative = 1e-11);
}

#[test]
fn bulk_forbidden_against_poisson_cdf() {
    let z = re(1.5f64.sqrt());
    let exact = bf(200, 1.23).partial_density(&z, &Interval::below(1.0)).unwrap().to_f64();
    let oracle = 200.0 * Poisson::new(300.0).unwrap().cdf(199);
    assert_relative_eq!(exact, oracle, max_relative = 1e-8);
    let pred = predict_bulk(&ModelGeometry::bf1(), 200, 1.0, &z, BulkVariant::Standard).unwrap().value.to_f64();
    assert!((pred / exact - 1.0).abs() < 10.0 / 200.0);
}

#[test]
fn interface_value_at_beta_one_half() {
    let g = ModelGeometry::bf1();
    let ip = predict_interface(&g, 400, 1.0, &re(1.0), 0.5).unwrap();
    let from_beta = ip.from_beta.value.to_f64();
    assert_relative_eq!(from_beta, 400.0 * erf_cdf(-1.0), max_relative = 1e-12);
    assert!((from_beta - 63.46).abs() < 0.01);
    let lambda = 400.0 * (1.0f64 / 20.0).exp();
    let exact = bf(400, 1.05).partial_density(&ip.z_k, &Interval::at_most(1.0)).unwrap().to_f64();
    assert_relative_eq!(exact, 400.0 * Poisson::new(lambda).unwrap().cdf(400), max_relative = 1e-10);
    assert!((exact - from_beta).abs() / 400.0 < 2.0 / 20.0);
}

#[test]
fn normal_cdf_at_one() {
    assert!((erf_cdf(1.0) - 0.841345).abs() < 1e-6);
    assert!((erf_cdf(1.0) - 0.8413447460685429).abs() < 1e-15);
}

#[test]
fn tail_mass_matches_poisson_tail() {
    let k = 400u32;
    let p = Poisson::new(400.0).unwrap();
    let delta = 400f64.powf(-0.25);
    let lo = (400.0 * (1.0 - delta)).floor() as u64;
    let hi = (400.0 * (1.0 + delta)).ceil() as u64;
    let oracle = p.cdf(lo) + (1.0 - p.cdf(hi - 1));
    let v = tail_mass(&bf(k, 1.0), &re(1.0), delta).unwrap();
    assert_relative_eq!(v, oracle, max_relative = 1e-6);
    assert!(v <= 1e-4);
}

#[test]
fn character_against_direct_summation() {
    let w = Complex64::new(0.3, 0.0);
    let direct: f64 = (0..=3).map(|j| (0.3 * f64::from(j)).exp()).sum();
    for route in [CharacterRoute::DirectSum, CharacterRoute::GeometricClosedForm, CharacterRoute::EulerMacLaurin] {
        let v = interval_character(10, 0.35, w, route).unwrap().value;
        assert!((v - direct).norm() < 1e-12 * direct, "{route:?}");
    }
}

#[test]
fn action_integral_frozen_values() {
    let g = ModelGeometry::bf1();
    let above = g.level_point(&re(0.3f64.exp()), 1.0).unwrap();
    assert!((above.b_e - 0.2221188).abs() < 1e-7);
    assert!((g.action_integral_quadrature(&re(0.3f64.exp()), &above).unwrap() - above.b_e).abs() < 1e-9);
    let below = g.level_point(&re((-0.3f64).exp()), 1.0).unwrap();
    assert!((below.b_e - 0.1488116).abs() < 1e-7);
}
