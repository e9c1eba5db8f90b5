//! Closed-form large-k predictors for equivariant and partial densities,
//! interface measures and localization diagnostics.

use crate::error::{domain, Result};
use crate::fit::{fit_line, LineFit};
use crate::geometry::{ModelGeometry, Point};
use crate::logreal::LogReal;
use crate::quad::{self, QuadOptions};
use crate::spectra::{cmp_scaled, log_full_density, offdiag_kernel_mag, WeightBasis};
use serde::Serialize;
use libm::erfc;
use std::cmp::Ordering;
use std::f64::consts::{PI, SQRT_2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    OnShell,
    OffShell,
    BulkAllowed,
    BulkForbidden,
    Interface,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub value: LogReal,
    pub regime: Regime,
    pub k: u32,
    pub energy: Option<f64>,
    pub weight: Option<u64>,
    pub beta: Option<f64>,
}

impl Prediction {
    fn new(value: LogReal, regime: Regime, k: u32) -> Self {
        Prediction { value, regime, k, energy: None, weight: None, beta: None }
    }
}

/// Standard normal distribution function `(2π)^{−1/2} ∫_{−∞}^x e^{−t²/2} dt`.
pub fn erf_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Largest lattice point `j/k` with `0 ≤ j/k < E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeLevel {
    pub j: u64,
    pub k: u32,
}

impl LatticeLevel {
    pub fn value(&self) -> f64 {
        self.j as f64 / f64::from(self.k)
    }
}

pub fn lattice_ek(k: u32, energy: f64) -> Result<LatticeLevel> {
    if k == 0 {
        return domain("k must be at least 1");
    }
    if !(energy > 0.0) || !energy.is_finite() {
        return domain(format!("lattice level needs a finite E > 0, got {energy}"));
    }
    let mut j = ((f64::from(k) * energy).ceil() as u64).saturating_sub(1);
    while j > 0 && cmp_scaled(j, k, energy) != Ordering::Less {
        j -= 1;
    }
    while cmp_scaled(j + 1, k, energy) == Ordering::Less {
        j += 1;
    }
    Ok(LatticeLevel { j, k })
}

fn onshell_log(geom: &ModelGeometry, k: u32, d2: f64) -> f64 {
    (geom.dim() as f64 - 0.5) * f64::from(k).ln() + 0.5 * (2.0 / (PI * d2)).ln()
}

fn require_free(geom: &ModelGeometry, z: &Point) -> Result<f64> {
    geom.validate_point(z)?;
    let d2 = geom.d_rho_phi(z, crate::geometry::RhoOrder::Second);
    if geom.is_fixed_point(z) || !(d2 > 0.0) {
        return domain("point is fixed by the circle action");
    }
    Ok(d2)
}

/// `k^{m−1/2} √(2/(π ∂²ρφ(z_E)))`.
pub fn predict_onshell(geom: &ModelGeometry, k: u32, z_e: &Point) -> Result<Prediction> {
    let d2 = require_free(geom, z_e)?;
    let mut p = Prediction::new(LogReal::from_log(onshell_log(geom, k, d2)), Regime::OnShell, k);
    p.energy = Some(geom.hamiltonian(z_e));
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffShellMode {
    /// `e^{−k b(z, j/k)}` with the constant at `z_{j/k}`.
    Direct,
    /// Linearization about a reference energy `E`: `e^{−k b(z,E)} e^{2τ_E (j − kE)}`,
    /// constant at `z_E`.
    Split { energy: f64 },
}

pub fn predict_offshell(geom: &ModelGeometry, k: u32, j: u64, z: &Point, mode: OffShellMode) -> Result<Prediction> {
    let e = match mode {
        OffShellMode::Direct => j as f64 / f64::from(k),
        OffShellMode::Split { energy } => energy,
    };
    let level = geom.level_point(z, e)?;
    let kf = f64::from(k);
    let mut log = onshell_log(geom, k, level.d2_rho_phi) - kf * level.b_e;
    if let OffShellMode::Split { energy } = mode {
        log += 2.0 * level.tau_e * (j as f64 - kf * energy);
    }
    let mut p = Prediction::new(LogReal::from_log(log), Regime::OffShell, k);
    p.energy = Some(e);
    p.weight = Some(j);
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaledExponent {
    /// `e^{−(β²/2) ∂²ρφ}`.
    Half,
    /// `e^{−β² ∂²ρφ}`, kept for comparison.
    Full,
}

/// Prediction for `Π_{k,kE}(e^{β/√k}·z_E)`.
pub fn predict_scaled(geom: &ModelGeometry, k: u32, z_e: &Point, beta: f64, exponent: ScaledExponent) -> Result<Prediction> {
    let d2 = require_free(geom, z_e)?;
    let factor = match exponent {
        ScaledExponent::Half => 0.5,
        ScaledExponent::Full => 1.0,
    };
    let mut p = Prediction::new(
        LogReal::from_log(onshell_log(geom, k, d2) - factor * beta * beta * d2),
        Regime::OnShell,
        k,
    );
    p.energy = Some(geom.hamiltonian(z_e));
    p.beta = Some(beta);
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BulkVariant {
    /// Constant and divisor from `z_E`, decay from `b(z, E_k)`.
    #[default]
    Standard,
    /// Everything evaluated at the lattice level `E_k`.
    Lattice,
}

/// `Π_{k,[0,E)}(z)` away from the interface.
pub fn predict_bulk(geom: &ModelGeometry, k: u32, energy: f64, z: &Point, variant: BulkVariant) -> Result<Prediction> {
    geom.validate_point(z)?;
    let h = geom.hamiltonian(z);
    let mut p = if h < energy {
        Prediction::new(LogReal::from_log(log_full_density(geom, k)), Regime::BulkAllowed, k)
    } else if h > energy {
        let ek = lattice_ek(k, energy)?.value();
        let at_e = geom.level_point(z, energy)?;
        let at_ek = geom.level_point(z, ek)?;
        let (d2, tau) = match variant {
            BulkVariant::Standard => (at_e.d2_rho_phi, at_e.tau_e),
            BulkVariant::Lattice => (at_ek.d2_rho_phi, at_ek.tau_e),
        };
        let log = onshell_log(geom, k, d2) - f64::from(k) * at_ek.b_e - (-(-2.0 * tau).exp_m1()).ln();
        Prediction::new(LogReal::from_log(log), Regime::BulkForbidden, k)
    } else {
        return domain("H(z) = E is on the interface; use the interface predictor");
    };
    p.energy = Some(energy);
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfacePrediction {
    /// `k^m Erf(√(4πk)(E − H(z_k))/|∇H(z_E)|)`.
    pub from_point: Prediction,
    /// `k^m Erf(−β|∇H(z_E)|/√π)`.
    pub from_beta: Prediction,
    /// `z_k = e^{β/√k}·z_E`.
    pub z_k: Point,
}

pub fn predict_interface(geom: &ModelGeometry, k: u32, energy: f64, z_e: &Point, beta: f64) -> Result<InterfacePrediction> {
    require_free(geom, z_e)?;
    let kf = f64::from(k);
    let grad = geom.grad_norm_sq(z_e).sqrt();
    let z_k = geom.flow_real(z_e, beta / kf.sqrt())?;
    let km = geom.dim() as f64 * kf.ln();
    let a = erf_cdf((4.0 * PI * kf).sqrt() * (energy - geom.hamiltonian(&z_k)) / grad);
    let b = erf_cdf(-beta * grad / PI.sqrt());
    let make = |v: f64| {
        let mut p = Prediction::new(LogReal::from_f64(v).scale_exp(km), Regime::Interface, k);
        p.energy = Some(energy);
        p.beta = Some(beta);
        p
    };
    Ok(InterfacePrediction { from_point: make(a), from_beta: make(b), z_k })
}

/// Share of `Π_k(z)` carried by weights with `|j/k − H(z)| ≥ δ`.
pub fn tail_mass(basis: &WeightBasis, z: &Point, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return domain(format!("δ must be positive, got {delta}"));
    }
    let h = basis.geometry().hamiltonian(z);
    let kf = f64::from(basis.k());
    let logs = basis.log_densities(z)?;
    let total = crate::logreal::log_sum_exp(&logs.iter().map(|x| x.1).collect::<Vec<_>>());
    let tail: Vec<f64> = logs
        .iter()
        .filter(|(j, _)| (*j as f64 / kf - h).abs() >= delta)
        .map(|&(_, l)| l)
        .collect();
    Ok((crate::logreal::log_sum_exp(&tail) - total).exp().clamp(0.0, 1.0))
}

/// Bernstein-type operator `Σ_j f(j/k) Π_{k,j}(z)/Π_k(z)`.
pub fn bernstein_apply(basis: &WeightBasis, z: &Point, f: impl Fn(f64) -> f64) -> Result<f64> {
    let kf = f64::from(basis.k());
    let logs = basis.log_densities(z)?;
    let total = crate::logreal::log_sum_exp(&logs.iter().map(|x| x.1).collect::<Vec<_>>());
    Ok(logs.iter().map(|&(j, l)| f(j as f64 / kf) * (l - total).exp()).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceMeasure {
    /// `(x_j, Π_{k,j}(z_k)/Π_k(z_k))` with `x_j = √k (j/k − E)`.
    pub atoms: Vec<(f64, f64)>,
    /// `Π_k(z_k)`.
    pub normalization: LogReal,
    /// `Π_k(z_k)/k^m`, the gap to the `k^{−m}` normalization.
    pub k_m_ratio: f64,
    pub z_k: Point,
    /// `∂²ρφ(z_E)`.
    pub c: f64,
    pub beta: f64,
}

impl InterfaceMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

pub fn interface_measure(basis: &WeightBasis, energy: f64, z_e: &Point, beta: f64) -> Result<InterfaceMeasure> {
    let geom = basis.geometry();
    let c = require_free(geom, z_e)?;
    let k = basis.k();
    let kf = f64::from(k);
    let z_k = geom.flow_real(z_e, beta / kf.sqrt())?;
    let logs = basis.log_densities(&z_k)?;
    let total = crate::logreal::log_sum_exp(&logs.iter().map(|x| x.1).collect::<Vec<_>>());
    let atoms = logs
        .iter()
        .map(|&(j, l)| (kf.sqrt() * (j as f64 / kf - energy), (l - total).exp()))
        .collect();
    Ok(InterfaceMeasure {
        atoms,
        normalization: LogReal::from_log(total),
        k_m_ratio: (total - geom.dim() as f64 * kf.ln()).exp(),
        z_k,
        c,
        beta,
    })
}

/// `∫ f dμ_k`.
pub fn smooth_weyl_sum(measure: &InterfaceMeasure, f: impl Fn(f64) -> f64) -> f64 {
    measure.atoms.iter().map(|&(x, w)| w * f(x)).sum()
}

/// Density of `μ_∞`: normal with mean `βc/2` and standard deviation `√c/2`.
pub fn limit_density(x: f64, c: f64, beta: f64) -> f64 {
    let u = 2.0 * x / c.sqrt() - beta * c.sqrt();
    (-0.5 * u * u).exp() * 2.0 / (2.0 * PI * c).sqrt()
}

/// `∫ f dμ_∞` by adaptive quadrature over ±40 standard deviations.
pub fn limit_integral(f: impl Fn(f64) -> f64, c: f64, beta: f64) -> Result<f64> {
    let mean = 0.5 * beta * c;
    let sd = 0.5 * c.sqrt();
    let mut total = 0.0;
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 4000 };
    for w in [(-40.0, -5.0), (-5.0, 0.0), (0.0, 5.0), (5.0, 40.0)] {
        total += quad::integrate(|x| f(x) * limit_density(x, c, beta), mean + w.0 * sd, mean + w.1 * sd, opts)?.value;
    }
    Ok(total)
}

/// `μ_∞([−M, M])` in closed form.
pub fn limit_window_mass(m: f64, c: f64, beta: f64) -> f64 {
    let mean = 0.5 * beta * c;
    let sd = 0.5 * c.sqrt();
    erf_cdf((m - mean) / sd) - erf_cdf((-m - mean) / sd)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgmonFit {
    pub k: u32,
    /// Decay rate: minus the slope of `log(|B_k(z,w)|/Π_k(z))` against `√k·d(z,w)`.
    pub rate: f64,
    pub r_squared: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Fits off-diagonal decay along the real line through `z` in the direction `u`,
/// sampling points whose scaled distance `√k·d` spans `xs`.
pub fn agmon_fit(geom: &ModelGeometry, k: u32, z: &Point, u: &Point, xs: &[f64]) -> Result<AgmonFit> {
    geom.validate_point(z)?;
    let un = u.norm();
    if un == 0.0 || u.0.len() != z.0.len() {
        return domain("direction must be a nonzero vector of the right dimension");
    }
    let kf = f64::from(k);
    let diag = offdiag_kernel_mag(geom, k, z, z)?;
    let mut samples = Vec::with_capacity(xs.len());
    for &x in xs {
        // Euclidean step matching the target distance to first order
        let scale = match geom.kind() {
            crate::geometry::GeometryKind::BargmannFock => 1.0,
            crate::geometry::GeometryKind::ProjectiveSpace => 1.0 + z.norm_sqr(),
        };
        let t = x / kf.sqrt() * PI.sqrt() * scale / un;
        let w = Point(z.0.iter().zip(&u.0).map(|(a, b)| a + b * t).collect());
        let d = geom.riemannian_distance(z, &w);
        let v = offdiag_kernel_mag(geom, k, z, &w)? / diag;
        samples.push((kf.sqrt() * d, v.log_mag()));
    }
    let (xv, yv): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
    let LineFit { slope, r_squared, .. } =
        fit_line(&xv, &yv).ok_or_else(|| crate::error::Error::Numeric("degenerate Agmon fit".into()))?;
    Ok(AgmonFit { k, rate: -slope, r_squared, samples })
}
