//! Interval characters `χ_{kP}(e^w) = Σ_{j ∈ kP} e^{jw}`, their exact
//! Euler–MacLaurin form, and reconstruction of partial densities by
//! integrating the full kernel against the character on a shifted contour.

use crate::asymptotics::lattice_ek;
use crate::error::{domain, Error, Result};
use crate::geometry::Point;
use crate::logreal::LogReal;
use crate::spectra::{Interval, WeightBasis};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Below this modulus, `L` and `exprel` switch to their Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CharacterRoute {
    DirectSum,
    GeometricClosedForm,
    EulerMacLaurin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacterEval {
    pub w: Complex64,
    pub value: Complex64,
    pub route: CharacterRoute,
}

/// `e^w − 1` accurate near zero.
pub fn cexpm1(w: Complex64) -> Complex64 {
    let (a, b) = (w.re, w.im);
    let half = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// `(e^w − 1)/w`, equal to 1 at 0.
pub fn cexprel(w: Complex64) -> Complex64 {
    if w.norm() < SERIES_THRESHOLD {
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 2..8 {
            term *= w / n as f64;
            sum += term;
        }
        sum
    } else {
        cexpm1(w) / w
    }
}

/// Excluded set `2πiℤ ∖ {0}` of the closed forms.
fn on_excluded_lattice(w: Complex64) -> bool {
    if w.re != 0.0 || w.im == 0.0 {
        return false;
    }
    let n = (w.im / (2.0 * PI)).round();
    n != 0.0 && (w.im - 2.0 * PI * n).abs() <= 1e-12 * w.im.abs().max(1.0)
}

/// `L(w) = (w/2)/tanh(w/2)`.
pub fn l_factor(w: Complex64) -> Result<Complex64> {
    if on_excluded_lattice(w) {
        return domain(format!("L(w) has a pole at w = {w}"));
    }
    if w.norm() < SERIES_THRESHOLD {
        let w2 = w * w;
        return Ok(1.0 + w2 / 12.0 - w2 * w2 / 720.0 + w2 * w2 * w2 / 30240.0);
    }
    let h = 0.5 * w;
    Ok(h / h.tanh())
}

/// `Σ_{j=lo}^{hi} e^{jw}` by the chosen route.
pub fn character_range(lo: u64, hi: u64, w: Complex64, route: CharacterRoute) -> Result<CharacterEval> {
    if hi < lo {
        return Ok(CharacterEval { w, value: Complex64::new(0.0, 0.0), route });
    }
    let n = (hi - lo) as f64;
    let shift = (w * lo as f64).exp();
    let base = match route {
        CharacterRoute::DirectSum => {
            let step = w.exp();
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            for i in 0..=(hi - lo) {
                if i % 64 == 0 {
                    term = (w * i as f64).exp();
                }
                sum += term;
                term *= step;
            }
            sum
        }
        CharacterRoute::GeometricClosedForm => {
            if on_excluded_lattice(w) {
                return domain(format!("geometric closed form is singular at w = {w}"));
            }
            if w.norm() < SERIES_THRESHOLD {
                (n + 1.0) * cexprel((n + 1.0) * w) / cexprel(w)
            } else {
                cexpm1((n + 1.0) * w) / cexpm1(w)
            }
        }
        CharacterRoute::EulerMacLaurin => {
            // L(w)·k∫₀^{E_k} e^{kwx} dx + ½(1 + e^{k E_k w}), with k∫ = n·exprel(nw)
            let l = l_factor(w)?;
            l * n * cexprel(n * w) + 0.5 * (1.0 + (n * w).exp())
        }
    };
    Ok(CharacterEval { w, value: shift * base, route })
}

/// `χ_{k[0,E)}(e^w) = Σ_{j=0}^{kE_k} e^{jw}`.
pub fn interval_character(k: u32, energy: f64, w: Complex64, route: CharacterRoute) -> Result<CharacterEval> {
    let top = lattice_ek(k, energy)?.j;
    character_range(0, top, w, route)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourResult {
    pub value: LogReal,
    pub tau: f64,
    pub nodes: usize,
    /// `log (Σ_j |K_j| · Σ_{j∈kP} e^{jτ})`, a bound on every term entering the sum.
    pub log_max_summand: f64,
    /// `log_max_summand − log |value|`: digits lost to cancellation, in nats.
    /// Measured against the computed value, so it is only trustworthy while small.
    pub log_conditioning: f64,
}

/// Reconstructs `Π_{k,P}(z)` as `(1/N) Σ_θ S_K(θ) χ_{kP}(e^{τ+iθ})` where
/// `S_K(θ) = Σ_j e^{−kφ(z)} K_{k,j}(e^{−aτ}·z, e^{−(1−a)τ}·z) e^{−ijθ}`.
///
/// The value is independent of `τ` and of the split `a`; `τ` only moves the
/// dominant terms and so the cancellation in the sum.
pub fn contour_partial(basis: &WeightBasis, p: &Interval, z: &Point, tau: f64, split: f64) -> Result<ContourResult> {
    let geom = basis.geometry();
    geom.validate_point(z)?;
    if !(0.0..=1.0).contains(&split) {
        return domain(format!("split must lie in [0, 1], got {split}"));
    }
    let k = basis.k();
    let inside: Vec<u64> = basis.weights_present().into_iter().filter(|&j| p.contains_weight(j, k)).collect();
    let (Some(&lo), Some(&hi)) = (inside.first(), inside.last()) else {
        return Ok(ContourResult {
            value: LogReal::ZERO,
            tau,
            nodes: 0,
            log_max_summand: f64::NEG_INFINITY,
            log_conditioning: 0.0,
        });
    };
    let x = geom.flow_real(z, -split * tau)?;
    let y = geom.flow_real(z, -(1.0 - split) * tau)?;
    let kphi = f64::from(k) * geom.kahler_potential(z);
    let kernels: Vec<(u64, f64, Complex64)> = basis
        .equivariant_kernels(&x, &y)?
        .into_iter()
        .filter(|t| t.1 > f64::NEG_INFINITY)
        .map(|(j, s, v)| (j, s - kphi, v))
        .collect();
    let top_weight = kernels.iter().map(|t| t.0).max().unwrap_or(0).max(hi);
    let nodes = 2 * top_weight as usize + 17;
    let scale = kernels.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);

    let summands: Vec<Result<Complex64>> = (0..nodes)
        .into_par_iter()
        .map(|i| {
            let theta = -PI + 2.0 * PI * (i as f64 + 0.5) / nodes as f64;
            let s: Complex64 = kernels
                .iter()
                .map(|&(j, sc, v)| v * (Complex64::new(sc - scale, -(j as f64) * theta)).exp())
                .sum();
            let chi = character_range(lo, hi, Complex64::new(tau, theta), CharacterRoute::DirectSum)?.value;
            Ok(s * chi)
        })
        .collect();
    let mut acc = 0.0;
    let mut comp = 0.0;
    for s in summands {
        let s = s?;
        let yv = s.re - comp;
        let t = acc + yv;
        comp = (t - acc) - yv;
        acc = t;
    }
    if !acc.is_finite() {
        return Err(Error::Range(format!("contour sum overflowed at τ = {tau}; retry with smaller |τ|")));
    }
    let value = LogReal::from_f64(acc / nodes as f64).scale_exp(scale);
    // every term of every summand is bounded by Σ_j |K_j| · Σ_{j∈kP} e^{jτ}
    let kernel_abs: f64 = kernels.iter().map(|&(_, sc, v)| (sc - scale).exp() * v.norm()).sum();
    let chi_abs = character_range(lo, hi, Complex64::new(tau, 0.0), CharacterRoute::DirectSum)?.value.re;
    let log_max_summand = kernel_abs.ln() + chi_abs.ln() + scale;
    Ok(ContourResult {
        value,
        tau,
        nodes,
        log_max_summand,
        log_conditioning: log_max_summand - value.log_mag(),
    })
}
