//! The acceptance gate: ten criteria, each a list of numeric checks with
//! pinned thresholds. `report` and the `acceptance` test target both run
//! these functions.

use crate::error::HResult;
use crate::runners::{basis_for, bin_sigma};
use bergman_core::asymptotics::{
    agmon_fit, bernstein_apply, erf_cdf, interface_measure, limit_integral, limit_window_mass, predict_bulk,
    predict_onshell, predict_scaled, smooth_weyl_sum, tail_mass, BulkVariant, ScaledExponent,
};
use bergman_core::charsum::{character_range, contour_partial, CharacterRoute};
use bergman_core::fit::fit_power_law;
use bergman_core::randzeros::{
    angular_ks_statistic, empirical_radial_measure, expected_bin_masses, ks_critical_1pct, sample_zero_sets,
};
use bergman_core::spectra::{fourier_extract, Interval, WeightBasis};
use bergman_core::{LogReal, ModelGeometry, Point};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    /// Human-readable acceptance condition, e.g. `<= 1e-9`.
    pub condition: String,
    pub passed: bool,
}

impl Check {
    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { label: label.into(), value, condition: format!("<= {limit:e}"), passed: value <= limit }
    }

    pub fn within(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            label: label.into(),
            value,
            condition: format!("in [{lo}, {hi}]"),
            passed: lo <= value && value <= hi,
        }
    }

    pub fn outside(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            label: label.into(),
            value,
            condition: format!("outside [{lo}, {hi}]"),
            passed: value.is_finite() && !(lo <= value && value <= hi),
        }
    }

    pub fn greater(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Check { label: label.into(), value, condition: format!("> {limit}"), passed: value > limit }
    }

    fn failed_with(label: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Check { label: label.into(), value: f64::NAN, condition: format!("error: {err}"), passed: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn status(&self) -> &'static str {
        if self.passed() { "PASS" } else { "FAIL" }
    }

    /// `criterion 3 PASS: title`.
    pub fn line(&self) -> String {
        format!("criterion {} {}: {}", self.id, self.status(), self.title)
    }

    /// The summary line followed by one indented line per check.
    pub fn detail(&self) -> String {
        let mut s = self.line();
        for c in &self.checks {
            s.push_str(&format!(
                "\n    [{}] {} = {:.6e} ({})",
                if c.passed { "ok" } else { "FAIL" },
                c.label,
                c.value,
                c.condition
            ));
        }
        s
    }
}

pub const TITLES: [&str; 10] = [
    "exact identities",
    "on-shell equivariant density",
    "scaled equivariant density",
    "bulk partial density",
    "interface Erf law",
    "localization tail mass",
    "Bernstein jump",
    "interface measures",
    "random zeros",
    "Agmon decay",
];

fn outcome(id: u8, start: Instant, result: HResult<Vec<Check>>) -> CriterionOutcome {
    let checks = result.unwrap_or_else(|e| vec![Check::failed_with("evaluation", e)]);
    CriterionOutcome { id, title: TITLES[usize::from(id) - 1], checks, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    let start = Instant::now();
    let result = match id {
        1 => c1_exact_identities(),
        2 => c2_onshell(),
        3 => c3_scaled(),
        4 => c4_bulk(),
        5 => c5_interface(),
        6 => c6_localization(),
        7 => c7_bernstein(),
        8 => c8_interface_measures(),
        9 => c9_random_zeros(start),
        10 => c10_agmon(),
        _ => return None,
    };
    Some(outcome(id, start, result))
}

pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=10).filter_map(run_criterion).collect()
}

fn ks() -> [u32; 3] {
    [100, 400, 1600]
}

fn exponent(ks: &[u32], errs: &[f64]) -> f64 {
    let x: Vec<f64> = ks.iter().map(|&k| f64::from(k)).collect();
    fit_power_law(&x, errs).map_or(f64::NAN, |f| f.exponent)
}

fn ones(m: usize) -> Point {
    Point::from_reals(&vec![1.0; m])
}

fn random_point(rng: &mut ChaCha8Rng, m: usize) -> Point {
    Point(
        (0..m)
            .map(|_| Complex64::from_polar(rng.random_range(0.4..1.3), rng.random_range(-PI..PI)))
            .collect(),
    )
}

/// Log-space relative error `|log a − log b|`.
fn log_err(a: LogReal, b: LogReal) -> f64 {
    a.log_distance(&b)
}

/// Decay identity and scaling law on random tuples; Fourier extraction;
/// the two `b_E` routes; the three character routes; contour reconstruction.
fn c1_exact_identities() -> HResult<Vec<Check>> {
    let start = Instant::now();
    let geoms = [
        ModelGeometry::bf1(),
        ModelGeometry::bargmann_fock(vec![1, 2])?,
        ModelGeometry::cp1(),
        ModelGeometry::projective(vec![1, 2])?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut tuples = Vec::new();
    for _ in 0..200 {
        let g = geoms[rng.random_range(0..geoms.len())].clone();
        let k: u32 = rng.random_range(5..=40);
        let bmax = f64::from(g.max_weight());
        let e_hi = match g.kind() {
            bergman_core::GeometryKind::BargmannFock => 2.0,
            bergman_core::GeometryKind::ProjectiveSpace => 0.9 * bmax,
        };
        let j_lo = (0.15 * f64::from(k)).ceil() as u64;
        let j_hi = (e_hi * f64::from(k)).floor() as u64;
        let j = rng.random_range(j_lo..=j_hi);
        let z = random_point(&mut rng, g.dim());
        let alpha: f64 = rng.random_range(-0.4..0.4);
        tuples.push((g, k, j, z, alpha));
    }
    let (decay, scaling): (Vec<f64>, Vec<f64>) = tuples
        .par_iter()
        .map(|(g, k, j, z, alpha)| -> HResult<(f64, f64)> {
            let (k, j, alpha) = (*k, *j, *alpha);
            let kf = f64::from(k);
            let z_on = g.level_point(z, j as f64 / kf)?.z_e;
            let moved = g.flow_real(&z_on, alpha)?;
            let z_s = g.flow_real(z, alpha)?;
            let r = [z, &z_on, &moved, &z_s].iter().map(|p| p.norm()).fold(0.0, f64::max);
            let basis = basis_for(g, k, r)?;
            // decay identity on H⁻¹(j/k)
            let b = g.level_point(&moved, j as f64 / kf)?.b_e;
            let lhs = basis.equivariant_density(&moved, j)?;
            let rhs = basis.equivariant_density(&z_on, j)?.scale_exp(-kf * b);
            // scaling law at an arbitrary point
            let sl = basis.equivariant_density(&z_s, j)?.scale_exp(kf * g.kahler_potential(&z_s));
            let sr = basis
                .equivariant_density(z, j)?
                .scale_exp(kf * g.kahler_potential(z) + 2.0 * j as f64 * alpha);
            Ok((log_err(lhs, rhs), log_err(sl, sr)))
        })
        .collect::<HResult<Vec<_>>>()?
        .into_iter()
        .unzip();
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let mut checks = vec![
        Check::at_most("decay identity, max log error over 200 tuples", max(&decay), 1e-9),
        Check::at_most("scaling law, max log error over 200 tuples", max(&scaling), 1e-9),
    ];

    // Fourier extraction against the graded sum at the dominant weights
    let mut fourier: f64 = 0.0;
    for (g, k, z) in [
        (ModelGeometry::bf1(), 60u32, Point::from_reals(&[0.9])),
        (ModelGeometry::bargmann_fock(vec![1, 2])?, 30, Point::new(vec![Complex64::new(0.5, 0.3), Complex64::new(0.4, -0.6)])),
        (ModelGeometry::cp1(), 80, Point::new(vec![Complex64::new(0.7, 0.7)])),
        (ModelGeometry::projective(vec![1, 2])?, 25, Point::from_reals(&[0.8, 1.1])),
    ] {
        let basis = basis_for(&g, k, z.norm())?;
        let center = (f64::from(k) * g.hamiltonian(&z)).round() as u64;
        for j in center.saturating_sub(3)..=center + 3 {
            if basis.weight_dim(j) == 0 {
                continue;
            }
            let a = fourier_extract(&g, k, j, &z)?;
            let b = basis.equivariant_density(&z, j)?;
            fourier = fourier.max(a.rel_diff(&b));
        }
    }
    checks.push(Check::at_most("Fourier extraction vs graded sum", fourier, 1e-10));

    // b_E: closed form against quadrature of the orbit integral
    let mut dual: f64 = 0.0;
    for (g, z, e) in [
        (ModelGeometry::bf1(), Point::from_reals(&[1.3]), 0.4),
        (ModelGeometry::bf1(), Point::from_reals(&[0.5]), 2.0),
        (ModelGeometry::bargmann_fock(vec![1, 2])?, Point::from_reals(&[0.7, 0.9]), 1.1),
        (ModelGeometry::cp1(), Point::from_reals(&[2.0]), 0.3),
        (ModelGeometry::cp1(), Point::from_reals(&[0.2]), 0.9),
        (ModelGeometry::projective(vec![1, 2])?, Point::from_reals(&[0.6, 1.4]), 0.5),
        (ModelGeometry::projective(vec![1, 3])?, Point::from_reals(&[1.2, 0.3]), 2.2),
    ] {
        let level = g.level_point(&z, e)?;
        let q = g.action_integral_quadrature(&z, &level)?;
        dual = dual.max((level.b_e - q).abs() / level.b_e.abs().max(1.0));
    }
    checks.push(Check::at_most("b_E closed form vs quadrature", dual, 1e-9));

    // characters: direct, geometric and Euler-MacLaurin routes
    let mut chars: f64 = 0.0;
    let ws = [
        Complex64::new(0.3, 0.0),
        Complex64::new(-0.7, 2.0),
        Complex64::new(0.0, 1.3),
        Complex64::new(2e-4, -5e-4),
        Complex64::new(1e-7, 0.0),
        Complex64::new(-0.05, 3.0),
    ];
    for (lo, hi) in [(0u64, 9u64), (0, 34), (3, 120), (0, 499)] {
        for &w in &ws {
            let d = character_range(lo, hi, w, CharacterRoute::DirectSum)?.value;
            let g = character_range(lo, hi, w, CharacterRoute::GeometricClosedForm)?.value;
            let e = character_range(lo, hi, w, CharacterRoute::EulerMacLaurin)?.value;
            let scale: f64 = (lo..=hi).map(|j| (w.re * j as f64).exp()).sum();
            chars = chars.max((d - g).norm().max((d - e).norm()).max((g - e).norm()) / scale);
        }
    }
    checks.push(Check::at_most("three-route character agreement", chars, 1e-9));

    // contour reconstruction of partial densities
    let bf = ModelGeometry::bf1();
    let cp = ModelGeometry::cp1();
    let mut contour: f64 = 0.0;
    let cases: Vec<(ModelGeometry, u32, Interval, Point, f64)> = vec![
        (bf.clone(), 50, Interval::below(1.0), Point::from_reals(&[1.0]), 0.0),
        (bf.clone(), 50, Interval::below(1.0), Point::from_reals(&[1.3f64.sqrt()]), 0.0),
        (bf.clone(), 50, Interval::below(1.0), Point::from_reals(&[1.3f64.sqrt()]), 2.0 * 0.5 * 1.3f64.ln()),
        (cp.clone(), 40, Interval::all(), Point::from_reals(&[0.8]), 0.0),
        (cp.clone(), 40, Interval::below(0.5), Point::from_reals(&[1.5]), 0.3),
    ];
    for (g, k, p, z, tau) in cases {
        let basis = basis_for(&g, k, z.norm() * (2.0 * tau).exp().max(1.0))?;
        let exact = basis.partial_density(&z, &p)?;
        let c = contour_partial(&basis, &p, &z, tau, 0.5)?;
        contour = contour.max(c.value.rel_diff(&exact));
    }
    checks.push(Check::at_most("contour reconstruction", contour, 1e-8));
    checks.push(Check::at_most("runtime in seconds", start.elapsed().as_secs_f64(), 30.0));
    Ok(checks)
}

fn c2_onshell() -> HResult<Vec<Check>> {
    let mut checks = Vec::new();
    let bf = ModelGeometry::bf1();
    let cp = ModelGeometry::cp1();
    let one = ones(1);
    for k in ks() {
        let tol = 5.0 / f64::from(k);
        let exact = basis_for(&bf, k, 1.0)?.equivariant_density(&one, u64::from(k))?;
        let pred = predict_onshell(&bf, k, &one)?.value;
        if k == 100 {
            checks.push(Check::at_most("BF k=100 exact vs 3.98610", (exact.to_f64() - 3.98610).abs(), 5e-6));
        }
        checks.push(Check::at_most(format!("BF k={k} |ratio-1|"), (exact.ratio(&pred) - 1.0).abs(), tol));
        let exact = WeightBasis::build(&cp, k)?.equivariant_density(&one, u64::from(k / 2))?;
        let pred = predict_onshell(&cp, k, &one)?.value;
        checks.push(Check::at_most(format!("CP1 k={k} |ratio-1|"), (exact.ratio(&pred) - 1.0).abs(), tol));
    }
    Ok(checks)
}

fn scaled_errors(exponent_kind: ScaledExponent) -> HResult<Vec<f64>> {
    let bf = ModelGeometry::bf1();
    let one = ones(1);
    ks().iter()
        .map(|&k| {
            let basis = basis_for(&bf, k, (1.0 / f64::from(k).sqrt()).exp())?;
            let mut worst: f64 = 0.0;
            for beta in [-1.0, -0.5, 0.5, 1.0] {
                let q = bf.flow_real(&one, beta / f64::from(k).sqrt())?;
                let exact = basis.equivariant_density(&q, u64::from(k))?;
                let pred = predict_scaled(&bf, k, &one, beta, exponent_kind)?.value;
                worst = worst.max((exact.ratio(&pred) - 1.0).abs());
            }
            Ok(worst)
        })
        .collect()
}

fn c3_scaled() -> HResult<Vec<Check>> {
    let half = scaled_errors(ScaledExponent::Half)?;
    let full = scaled_errors(ScaledExponent::Full)?;
    let mut checks: Vec<Check> = ks()
        .iter()
        .zip(&half)
        .map(|(k, e)| Check::at_most(format!("k={k} max_beta |ratio-1|"), *e, 2.0 / f64::from(*k).sqrt()))
        .collect();
    checks.push(Check::within("fitted exponent, e^(-2 beta^2)", exponent(&ks(), &half), -0.7, -0.3));
    checks.push(Check::outside("fitted exponent, e^(-4 beta^2) must fail", exponent(&ks(), &full), -0.7, -0.3));
    Ok(checks)
}

fn c4_bulk() -> HResult<Vec<Check>> {
    let bf = ModelGeometry::bf1();
    let p = Interval::below(1.0);
    let tasks: Vec<(f64, u32)> = [1.2, 1.5, 2.0].iter().flat_map(|&h| [200u32, 800].map(move |k| (h, k))).collect();
    let mut checks: Vec<Check> = tasks
        .par_iter()
        .map(|&(h, k)| -> HResult<Check> {
            let z = Point::from_reals(&[f64::sqrt(h)]);
            let exact = basis_for(&bf, k, z.norm())?.partial_density(&z, &p)?;
            let pred = predict_bulk(&bf, k, 1.0, &z, BulkVariant::Standard)?.value;
            Ok(Check::at_most(format!("forbidden H={h} k={k} |ratio-1|"), (pred.ratio(&exact) - 1.0).abs(), 10.0 / f64::from(k)))
        })
        .collect::<HResult<_>>()?;
    let z = Point::from_reals(&[0.5f64.sqrt()]);
    let basis = basis_for(&bf, 200, z.norm())?;
    let partial = basis.partial_density(&z, &p)?;
    let full = basis.full_density(&z)?;
    checks.push(Check::at_most("allowed H=0.5 k=200 |partial/full-1|", partial.rel_diff(&full), 1e-6));
    Ok(checks)
}

/// `sup_β |k^{−m}Π_{k,(−∞,E]}(z_β) − Erf(−β|∇H|/√π)|` per k, and the β = 0 value.
pub fn interface_sup(geom: &ModelGeometry, energy: f64, k: u32) -> HResult<(f64, f64)> {
    let z_e = geom.level_point(&ones(geom.dim()), energy)?.z_e;
    let grad = geom.grad_norm_sq(&z_e).sqrt();
    let kf = f64::from(k);
    let betas: Vec<f64> = (-6..=6).map(|i| 0.5 * f64::from(i)).collect();
    let basis = basis_for(geom, k, z_e.norm() * (3.0 / kf.sqrt()).exp())?;
    let p = Interval::at_most(energy);
    let mut sup: f64 = 0.0;
    let mut at_zero = f64::NAN;
    for beta in betas {
        let zb = geom.flow_real(&z_e, beta / kf.sqrt())?;
        let v = basis.partial_density(&zb, &p)?.scale_exp(-(geom.dim() as f64) * kf.ln()).to_f64();
        sup = sup.max((v - erf_cdf(-beta * grad / PI.sqrt())).abs());
        if beta == 0.0 {
            at_zero = v;
        }
    }
    Ok((sup, at_zero))
}

fn c5_interface() -> HResult<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, geom, energy) in [("BF", ModelGeometry::bf1(), 1.0), ("CP1", ModelGeometry::cp1(), 0.5)] {
        let rows: Vec<(f64, f64)> = ks().iter().map(|&k| interface_sup(&geom, energy, k)).collect::<HResult<_>>()?;
        let sups: Vec<f64> = rows.iter().map(|r| r.0).collect();
        checks.push(Check::within(format!("{name} fitted exponent of sup error"), exponent(&ks(), &sups), -0.7, -0.3));
        for (k, (_, z0)) in ks().iter().zip(&rows) {
            checks.push(Check::at_most(format!("{name} k={k} |beta=0 value - 1/2|"), (z0 - 0.5).abs(), 2.0 / f64::from(*k).sqrt()));
        }
    }
    Ok(checks)
}

fn c6_localization() -> HResult<Vec<Check>> {
    let bf = ModelGeometry::bf1();
    let basis = basis_for(&bf, 400, 1.0)?;
    let one = ones(1);
    let k = 400f64;
    Ok(vec![
        Check::at_most("tail mass at delta=k^(-1/4)", tail_mass(&basis, &one, k.powf(-0.25))?, 1e-4),
        Check::at_most("tail mass at delta=k^(-0.4)", tail_mass(&basis, &one, k.powf(-0.4))?, 0.05),
    ])
}

/// Declared bound on `|B_k(1_{[0,1/2]})(z) − 1/2|·√k`.
pub const BERNSTEIN_BOUND: f64 = 1.0;
/// Largest allowed growth of that quantity from the first to the last k.
pub const BERNSTEIN_GROWTH: f64 = 1.5;

fn c7_bernstein() -> HResult<Vec<Check>> {
    let cp = ModelGeometry::cp1();
    let one = ones(1);
    let mut vals = Vec::new();
    let mut checks = Vec::new();
    for k in [64u32, 256, 1024] {
        let basis = WeightBasis::build(&cp, k)?;
        let b = bernstein_apply(&basis, &one, |x| if x <= 0.5 { 1.0 } else { 0.0 })?;
        let v = (b - 0.5).abs() * f64::from(k).sqrt();
        checks.push(Check::at_most(format!("k={k} |B_k(f)-1/2| sqrt(k)"), v, BERNSTEIN_BOUND));
        vals.push(v);
    }
    checks.push(Check::at_most("growth from k=64 to k=1024", vals[2] / vals[0], BERNSTEIN_GROWTH));
    Ok(checks)
}

/// β used for the interface-measure fits.
pub const INTERFACE_MEASURE_BETA: f64 = 0.5;

fn c8_interface_measures() -> HResult<Vec<Check>> {
    let bf = ModelGeometry::bf1();
    let one = ones(1);
    let beta = INTERFACE_MEASURE_BETA;
    let c = bf.d_rho_phi(&one, bergman_core::RhoOrder::Second);
    let gauss = |x: f64| (-x * x).exp();
    let gauss_limit = limit_integral(gauss, c, beta)?;
    let window_limit = limit_window_mass(2.0, c, beta);
    let (mut eg, mut ew) = (Vec::new(), Vec::new());
    for k in ks() {
        let basis = basis_for(&bf, k, (beta / f64::from(k).sqrt()).exp())?;
        let mu = interface_measure(&basis, 1.0, &one, beta)?;
        eg.push((smooth_weyl_sum(&mu, gauss) - gauss_limit).abs());
        // atoms land exactly on ±2 when √k is an integer; the slack keeps the closed window closed
        ew.push((smooth_weyl_sum(&mu, |x| if x.abs() <= 2.0 + 1e-9 { 1.0 } else { 0.0 }) - window_limit).abs());
    }
    Ok(vec![
        Check::within("Gaussian test function fitted exponent", exponent(&ks(), &eg), -0.8, -0.3),
        Check::within("window [-2,2] fitted exponent", exponent(&ks(), &ew), -0.8, -0.3),
        Check::at_most("|mu_inf total mass - 1|", (limit_integral(|_| 1.0, c, beta)? - 1.0).abs(), 1e-10),
    ])
}

fn c9_random_zeros(start: Instant) -> HResult<Vec<Check>> {
    let cp = ModelGeometry::cp1();
    let (k, n, seed, bins) = (100u32, 500usize, 42u64, 20usize);
    let p = Interval::below(0.5);
    let basis = WeightBasis::build(&cp, k)?;
    let sets = sample_zero_sets(&basis, &p, seed, n)?;
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    let hist = empirical_radial_measure(&sets, k, &edges)?;
    let expected = expected_bin_masses(&basis, &p, &edges)?;
    let mut worst: f64 = 0.0;
    for b in 0..bins {
        // bins touching the interface H = 1/2 are excluded
        if edges[b] == 0.5 || edges[b + 1] == 0.5 {
            continue;
        }
        let se = bin_sigma(hist.std_err[b], expected[b], k, n);
        worst = worst.max((hist.mean[b] - expected[b]).abs() / se);
    }
    let degree = basis.sections_in(&p).last().map_or(0, |e| e.weight);
    let exact_total = degree as f64 / f64::from(k);
    let all_full = sets.iter().all(|s| s.roots.len() as u64 == degree);
    let (d, pts) = angular_ks_statistic(&sets);
    Ok(vec![
        Check::at_most("worst bin deviation in standard errors", worst, 5.0),
        Check::at_most("|mean zero count/k - E_k|", (hist.total - exact_total).abs(), 1e-12),
        Check::at_most("samples with a root count other than kE_k", if all_full { 0.0 } else { 1.0 }, 0.0),
        Check::at_most("angular KS statistic minus 1% critical value", d - ks_critical_1pct(pts), 0.0),
        Check::at_most("runtime in seconds", start.elapsed().as_secs_f64(), 120.0),
    ])
}

fn c10_agmon() -> HResult<Vec<Check>> {
    let bf = ModelGeometry::bf1();
    let z = ones(1);
    let u = ones(1);
    let xs: Vec<f64> = (1..=10).map(|i| 0.3 * f64::from(i)).collect();
    let a = agmon_fit(&bf, 100, &z, &u, &xs)?;
    let b = agmon_fit(&bf, 400, &z, &u, &xs)?;
    Ok(vec![
        Check::greater("decay rate at k=100", a.rate, 0.0),
        Check::greater("decay rate at k=400", b.rate, 0.0),
        Check::at_most("relative drift of the rate", (a.rate - b.rate).abs() / a.rate, 0.2),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_constructors() {
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed);
        assert!(Check::within("b", -0.5, -0.7, -0.3).passed);
        assert!(Check::outside("c", 0.0, -0.7, -0.3).passed);
        assert!(!Check::outside("c", f64::NAN, -0.7, -0.3).passed);
    }

    #[test]
    fn outcome_line_format() {
        let o = CriterionOutcome { id: 6, title: TITLES[5], checks: vec![Check::at_most("x", 2.0, 1.0)], seconds: 0.0 };
        assert_eq!(o.line(), "criterion 6 FAIL: localization tail mass");
        assert!(!o.passed());
        assert!(run_criterion(11).is_none());
    }
}
