//! Zeros of Gaussian random sections of `S_{k,P} ⊂ H⁰(ℂP¹, O(k))`.
//!
//! A sample is `s = Σ_{j ∈ kP} a_j c_j z^j` with `a_j` i.i.d. standard complex
//! normal and `c_j² = (k+1) C(k,j)`. The exact finite-k expectation of the
//! normalized zero measure is `ω + (i/2πk) ∂∂̄ log Π_{k,P}`, which on an annulus
//! `ρ₁ < log|z| < ρ₂` integrates to `ΔH + [∂ρ log Π_{k,P}]/(2k)`.

use crate::error::{domain, Error, Result};
use crate::geometry::{GeometryKind, ModelGeometry, Point, RhoOrder};
use crate::spectra::{Interval, WeightBasis};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

/// Largest degree handled by the companion matrix.
pub const COMPANION_MAX_DEGREE: usize = 300;

/// Residual bound `|p(r)| ≤ RESIDUAL_TOL · Σ|p_j||r|^j`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Second-difference step in `ρ` for radial `∂∂̄`.
pub const STENCIL_STEP: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomSectionSample {
    pub k: u32,
    pub interval: Interval,
    pub seed: u64,
    pub stream: u64,
    /// Weights `j ∈ kP`, ascending.
    pub weights: Vec<u64>,
    pub coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    pub roots: Vec<Complex64>,
    pub degree: usize,
    pub max_residual: f64,
}

fn require_cp1(geom: &ModelGeometry) -> Result<()> {
    if geom.kind() != GeometryKind::ProjectiveSpace || geom.weights() != [1] {
        return domain("zero statistics are implemented for ℂP¹ with weight (1)");
    }
    Ok(())
}

/// Draws the coefficients for stream `stream` of generator `ChaCha8(seed)`.
pub fn sample_section_stream(basis: &WeightBasis, p: &Interval, seed: u64, stream: u64) -> Result<RandomSectionSample> {
    require_cp1(basis.geometry())?;
    let weights: Vec<u64> = basis.sections_in(p).iter().map(|e| e.weight).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let coeffs = weights
        .iter()
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
        })
        .collect();
    Ok(RandomSectionSample { k: basis.k(), interval: *p, seed, stream, weights, coeffs })
}

pub fn sample_section(basis: &WeightBasis, p: &Interval, seed: u64) -> Result<RandomSectionSample> {
    sample_section_stream(basis, p, seed, 0)
}

/// Monomial coefficients `p_j = a_j c_j` of the sampled polynomial, rescaled by a
/// common positive factor.
pub fn polynomial_coefficients(sample: &RandomSectionSample, basis: &WeightBasis) -> Result<Vec<Complex64>> {
    let top = *sample.weights.last().ok_or_else(|| Error::Domain("empty section space".into()))?;
    let logs: Vec<f64> = sample.weights.iter().map(|&j| 0.5 * basis.weight_entries(j)[0].log_sq_coeff).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = logs.iter().copied().fold(f64::INFINITY, f64::min);
    if max - min > 600.0 {
        return Err(Error::Resource(format!("coefficient range e^{:.0} exceeds double precision", max - min)));
    }
    let mut poly = vec![Complex64::new(0.0, 0.0); top as usize + 1];
    for ((&j, a), l) in sample.weights.iter().zip(&sample.coeffs).zip(&logs) {
        poly[j as usize] = a * (l - max).exp();
    }
    Ok(poly)
}

fn horner(poly: &[Complex64], x: Complex64) -> (Complex64, Complex64, f64) {
    // value, derivative, Σ|p_j||x|^j
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    let mut s = 0.0;
    let ax = x.norm();
    for c in poly.iter().rev() {
        d = d * x + v;
        v = v * x + c;
        s = s * ax + c.norm();
    }
    (v, d, s)
}

fn relative_residual(poly: &[Complex64], x: Complex64) -> f64 {
    let (v, _, s) = horner(poly, x);
    if s == 0.0 {
        0.0
    } else {
        v.norm() / s
    }
}

fn companion_roots(monic_tail: &[Complex64]) -> Result<Vec<Complex64>> {
    // monic_tail[i] = p_i / p_n for i < n; eigenvalues of the complex companion matrix
    let n = monic_tail.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -monic_tail[i];
    }
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("companion Schur iteration did not converge".into()))?;
    Ok(schur.eigenvalues().map(|e| e.iter().copied().collect()).unwrap_or_default())
}

fn aberth(poly: &[Complex64], start: Option<Vec<Complex64>>) -> Result<Vec<Complex64>> {
    let n = poly.len() - 1;
    let mut roots = match start {
        Some(r) if r.len() == n => r,
        _ => {
            // Cauchy-type radius from the coefficients
            let lead = poly[n].norm();
            let r = poly[..n]
                .iter()
                .enumerate()
                .map(|(i, c)| (c.norm() / lead).powf(1.0 / (n - i) as f64))
                .fold(0.0_f64, f64::max)
                .max(1e-3);
            (0..n)
                .map(|i| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * (i as f64 + 0.25) / n as f64))
                .collect()
        }
    };
    for _ in 0..1000 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let (v, d, _) = horner(poly, roots[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let repulse: Complex64 = (0..n).filter(|&l| l != i).map(|l| 1.0 / (roots[i] - roots[l])).sum();
            let step = ratio / (1.0 - ratio * repulse);
            if step.re.is_finite() && step.im.is_finite() {
                roots[i] -= step;
                moved = moved.max(step.norm() / roots[i].norm().max(1e-300));
            }
        }
        if moved < 1e-15 {
            return Ok(roots);
        }
    }
    Err(Error::Numeric("Aberth iteration did not converge".into()))
}

fn newton_polish(poly: &[Complex64], r: Complex64) -> Complex64 {
    let (v, d, _) = horner(poly, r);
    if d.norm() == 0.0 {
        return r;
    }
    let next = r - v / d;
    if next.re.is_finite() && next.im.is_finite() && horner(poly, next).0.norm() <= v.norm() {
        next
    } else {
        r
    }
}

/// Roots of a polynomial given by ascending coefficients. Zero roots from
/// vanishing low-order coefficients are returned exactly.
pub fn polynomial_roots(poly: &[Complex64]) -> Result<Vec<Complex64>> {
    let top = poly.iter().rposition(|c| c.norm() > 0.0).ok_or_else(|| Error::Domain("zero polynomial".into()))?;
    let low = poly.iter().position(|c| c.norm() > 0.0).unwrap_or(0);
    let core: Vec<Complex64> = poly[low..=top].to_vec();
    let n = core.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); low];
    if n == 0 {
        return Ok(roots);
    }
    let lead = core[n];
    let found = if n <= COMPANION_MAX_DEGREE {
        let tail: Vec<Complex64> = core[..n].iter().map(|c| c / lead).collect();
        companion_roots(&tail)?
    } else {
        aberth(&core, None)?
    };
    let mut polished: Vec<Complex64> = found.iter().map(|&r| newton_polish(&core, r)).collect();
    if polished.iter().any(|&r| relative_residual(&core, r) > RESIDUAL_TOL) {
        polished = aberth(&core, Some(polished))?.into_iter().map(|r| newton_polish(&core, r)).collect();
        if let Some(bad) = polished.iter().find(|&&r| relative_residual(&core, r) > RESIDUAL_TOL) {
            return Err(Error::Numeric(format!(
                "root {bad} fails the residual bound ({:e})",
                relative_residual(&core, *bad)
            )));
        }
    }
    roots.extend(polished);
    Ok(roots)
}

pub fn zeros(sample: &RandomSectionSample, basis: &WeightBasis) -> Result<ZeroSet> {
    let poly = polynomial_coefficients(sample, basis)?;
    if poly.len() < 2 {
        return domain("section has degree 0");
    }
    let roots = polynomial_roots(&poly).map_err(|e| match e {
        Error::Numeric(m) => Error::Numeric(format!("{m} (seed {}, stream {})", sample.seed, sample.stream)),
        other => other,
    })?;
    let max_residual = roots.iter().map(|&r| relative_residual(&poly, r)).fold(0.0, f64::max);
    Ok(ZeroSet { degree: roots.len(), roots, max_residual })
}

/// Zero sets of `n` samples, stream `i` for sample `i`.
pub fn sample_zero_sets(basis: &WeightBasis, p: &Interval, seed: u64, n: usize) -> Result<Vec<ZeroSet>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| zeros(&sample_section_stream(basis, p, seed, i)?, basis))
        .collect()
}

/// `H = |z|²/(1+|z|²)` on `ℂP¹`.
pub fn h_coordinate(z: Complex64) -> f64 {
    let r2 = z.norm_sqr();
    if r2.is_infinite() {
        1.0
    } else {
        r2 / (1.0 + r2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialHistogram {
    pub k: u32,
    pub edges: Vec<f64>,
    /// Mean zero count per bin per sample, divided by k.
    pub mean: Vec<f64>,
    /// Standard error of `mean`.
    pub std_err: Vec<f64>,
    pub samples: usize,
    /// Mean number of zeros per sample, divided by k.
    pub total: f64,
}

pub fn empirical_radial_measure(sets: &[ZeroSet], k: u32, edges: &[f64]) -> Result<RadialHistogram> {
    if sets.is_empty() {
        return domain("need at least one sample");
    }
    if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("bin edges must be strictly increasing");
    }
    let bins = edges.len() - 1;
    let kf = f64::from(k);
    let n = sets.len() as f64;
    let counts: Vec<Vec<f64>> = sets
        .iter()
        .map(|s| {
            let mut c = vec![0.0; bins];
            for &r in &s.roots {
                let h = h_coordinate(r);
                let idx = edges.partition_point(|&e| e <= h);
                if h == edges[bins] {
                    c[bins - 1] += 1.0;
                } else if (1..=bins).contains(&idx) {
                    c[idx - 1] += 1.0;
                }
            }
            c
        })
        .collect();
    let mut mean = vec![0.0; bins];
    let mut std_err = vec![0.0; bins];
    for b in 0..bins {
        let m = counts.iter().map(|c| c[b]).sum::<f64>() / n;
        let var = if sets.len() > 1 {
            counts.iter().map(|c| (c[b] - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mean[b] = m / kf;
        std_err[b] = (var / n).sqrt() / kf;
    }
    let total = sets.iter().map(|s| s.roots.len() as f64).sum::<f64>() / n / kf;
    Ok(RadialHistogram { k, edges: edges.to_vec(), mean, std_err, samples: sets.len(), total })
}

/// `∂ρ log Π_{k,P}` at `|z| = e^ρ`, in closed form `2E_w[j] − k∂ρφ`.
pub fn d_rho_log_partial(basis: &WeightBasis, p: &Interval, rho: f64) -> Result<f64> {
    let geom = basis.geometry();
    let k = f64::from(basis.k());
    let sections = basis.sections_in(p);
    if sections.is_empty() {
        return domain("empty section space");
    }
    let logs: Vec<f64> = sections.iter().map(|e| e.log_sq_coeff + 2.0 * e.weight as f64 * rho).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut num, mut den) = (0.0, 0.0);
    for (e, l) in sections.iter().zip(&logs) {
        let w = (l - max).exp();
        num += w * e.weight as f64;
        den += w;
    }
    let z = Point::from_reals(&[rho.exp()]);
    Ok(2.0 * num / den - k * geom.d_rho_phi(&z, RhoOrder::First))
}

/// `∂²ρ log Π_{k,P}` in closed form `4Var_w[j] − k∂²ρφ`.
pub fn d2_rho_log_partial(basis: &WeightBasis, p: &Interval, rho: f64) -> Result<f64> {
    let k = f64::from(basis.k());
    let sections = basis.sections_in(p);
    if sections.is_empty() {
        return domain("empty section space");
    }
    let logs: Vec<f64> = sections.iter().map(|e| e.log_sq_coeff + 2.0 * e.weight as f64 * rho).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let den: f64 = ws.iter().sum();
    let mean: f64 = sections.iter().zip(&ws).map(|(e, w)| w * e.weight as f64).sum::<f64>() / den;
    let var: f64 = sections.iter().zip(&ws).map(|(e, w)| w * (e.weight as f64 - mean).powi(2)).sum::<f64>() / den;
    let z = Point::from_reals(&[rho.exp()]);
    Ok(4.0 * var - k * basis.geometry().d_rho_phi(&z, RhoOrder::Second))
}

fn rho_of_h(h: f64) -> f64 {
    0.5 * (h / (1.0 - h)).ln()
}

/// Exact `(1/k) E[#zeros with H ∈ [x₁, x₂)]` for each bin.
pub fn expected_bin_masses(basis: &WeightBasis, p: &Interval, edges: &[f64]) -> Result<Vec<f64>> {
    require_cp1(basis.geometry())?;
    let k = f64::from(basis.k());
    let sections = basis.sections_in(p);
    let (lo, hi) = match (sections.first(), sections.last()) {
        (Some(a), Some(b)) => (a.weight as f64, b.weight as f64),
        _ => return domain("empty section space"),
    };
    let flux = |h: f64| -> Result<f64> {
        if h <= 0.0 {
            Ok(2.0 * lo)
        } else if h >= 1.0 {
            Ok(2.0 * hi - 2.0 * k)
        } else {
            d_rho_log_partial(basis, p, rho_of_h(h))
        }
    };
    edges
        .windows(2)
        .map(|w| Ok((w[1] - w[0]) + (flux(w[1])? - flux(w[0])?) / (2.0 * k)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRow {
    pub h: f64,
    /// Exact finite-k expected zero density with respect to `dH`.
    pub exact: f64,
    /// `k → ∞` limit: 1 on the allowed side, 0 on the forbidden side.
    pub limit: f64,
    /// The stencil straddles the interface `H = E`.
    pub flagged: bool,
}

/// Expected zero density with respect to `dH` on a grid of `H` values, from a
/// second difference of `log Π_{k,P}` in `ρ` with step `h = 0.02`.
pub fn expected_density(basis: &WeightBasis, p: &Interval, grid: &[f64], interface: Option<f64>) -> Result<Vec<DensityRow>> {
    let geom = basis.geometry();
    require_cp1(geom)?;
    let k = f64::from(basis.k());
    let log_partial = |rho: f64| -> Result<f64> {
        Ok(basis.partial_density(&Point::from_reals(&[rho.exp()]), p)?.log_mag())
    };
    grid.iter()
        .map(|&h| {
            if !(h > 0.0 && h < 1.0) {
                return domain(format!("grid value {h} is not inside (0, 1)"));
            }
            let rho = rho_of_h(h);
            let st = STENCIL_STEP;
            let f2 = (log_partial(rho + st)? - 2.0 * log_partial(rho)? + log_partial(rho - st)?) / (st * st);
            let c = geom.d_rho_phi(&Point::from_reals(&[rho.exp()]), RhoOrder::Second);
            let exact = 1.0 + f2 / (k * c);
            let (flagged, limit) = match interface {
                Some(e) => {
                    let lo = h_coordinate(Complex64::new((rho - st).exp(), 0.0));
                    let hi = h_coordinate(Complex64::new((rho + st).exp(), 0.0));
                    (lo <= e && e <= hi, if h < e { 1.0 } else { 0.0 })
                }
                None => (false, 1.0),
            };
            Ok(DensityRow { h, exact, limit, flagged })
        })
        .collect()
}

/// Kolmogorov–Smirnov distance of the pooled zero arguments from the uniform law.
pub fn angular_ks_statistic(sets: &[ZeroSet]) -> (f64, usize) {
    let mut u: Vec<f64> = sets
        .iter()
        .flat_map(|s| s.roots.iter())
        .filter(|r| r.norm() > 0.0)
        .map(|r| (r.arg() + std::f64::consts::PI) / (2.0 * std::f64::consts::PI))
        .collect();
    u.sort_by(f64::total_cmp);
    let n = u.len();
    let d = u
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n as f64 - x).max(x - i as f64 / n as f64))
        .fold(0.0, f64::max);
    (d, n)
}

/// Asymptotic one-sample KS critical value at level 1%.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}
