//! Model Kähler geometries with holomorphic circle actions.
//!
//! Two families are supported, both in a single affine chart:
//!
//! * Bargmann–Fock `ℂ^m` with potential `φ(z) = ‖z‖²`;
//! * projective space `ℂP^m` in the chart `{Z_0 ≠ 0}` with Fubini–Study
//!   potential `φ(z) = log(1 + ‖z‖²)`.
//!
//! The circle action rotates coordinate `z_j` with integer weight `b_j ≥ 0`
//! (the weight of `Z_0` is 0). Its complexification `e^w·z` scales `z_j` by
//! `e^{b_j w}`. Along a real orbit `ρ ↦ e^ρ·z` every quantity depends only on
//! `s_j(ρ) = log|z_j|² + 2 b_j ρ`, which is how everything below is evaluated.

use crate::error::{domain, Error, Result};
use crate::quad::{self, QuadOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Projective points with chart norm above this are rejected instead of chart-switched.
pub const CHART_RADIUS_LIMIT: f64 = 1e8;

const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryKind {
    BargmannFock,
    ProjectiveSpace,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelGeometry {
    kind: GeometryKind,
    weights: Vec<u32>,
}

/// Affine-chart coordinates of a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point(coords)
    }

    pub fn from_reals(coords: &[f64]) -> Self {
        Point(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// Which ρ-derivative of the potential along the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoOrder {
    First,
    Second,
}

/// Geometric packet for a point `z` and an energy `E` on its orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelData {
    pub energy: f64,
    /// Intersection of the real orbit of `z` with `H⁻¹(E)`.
    pub z_e: Point,
    /// Flow time with `z = e^{τ_E}·z_E`.
    pub tau_e: f64,
    pub b_e: f64,
    /// `∂ρφ(z_E)`, equal to `2E`.
    pub d_rho_phi: f64,
    /// `∂²ρφ(z_E)`, strictly positive off the fixed-point set.
    pub d2_rho_phi: f64,
}

/// Log-squared moduli and weights of the coordinates that move along an orbit.
#[derive(Debug, Clone)]
struct Orbit {
    kind: GeometryKind,
    /// `(log|z_j|², b_j)` for nonzero coordinates.
    terms: Vec<(f64, f64)>,
}

impl Orbit {
    fn s(&self, rho: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.terms.iter().map(move |&(l, b)| (l + 2.0 * b * rho, b))
    }

    fn phi(&self, rho: f64) -> f64 {
        match self.kind {
            GeometryKind::BargmannFock => self.s(rho).map(|(s, _)| s.exp()).sum(),
            GeometryKind::ProjectiveSpace => log1p_sum_exp(self.s(rho).map(|(s, _)| s)),
        }
    }

    /// Probabilities `p_j = |z_j|²e^{2b_jρ}/(1+Σ)` of the projective weights, Z_0 excluded.
    fn fs_probs(&self, rho: f64) -> Vec<(f64, f64)> {
        let lse = log1p_sum_exp(self.s(rho).map(|(s, _)| s));
        self.s(rho).map(|(s, b)| ((s - lse).exp(), b)).collect()
    }

    fn dphi(&self, rho: f64) -> f64 {
        match self.kind {
            GeometryKind::BargmannFock => 2.0 * self.s(rho).map(|(s, b)| b * s.exp()).sum::<f64>(),
            GeometryKind::ProjectiveSpace => {
                2.0 * self.fs_probs(rho).iter().map(|(p, b)| p * b).sum::<f64>()
            }
        }
    }

    fn d2phi(&self, rho: f64) -> f64 {
        match self.kind {
            GeometryKind::BargmannFock => {
                4.0 * self.s(rho).map(|(s, b)| b * b * s.exp()).sum::<f64>()
            }
            GeometryKind::ProjectiveSpace => {
                // 4·Var(b) under the weights (p_0, p_1, …) with b_0 = 0.
                let probs = self.fs_probs(rho);
                let mean: f64 = probs.iter().map(|(p, b)| p * b).sum();
                let p0 = 1.0 - probs.iter().map(|(p, _)| p).sum::<f64>();
                let var = p0.max(0.0) * mean * mean
                    + probs.iter().map(|(p, b)| p * (b - mean) * (b - mean)).sum::<f64>();
                4.0 * var
            }
        }
    }

    fn h(&self, rho: f64) -> f64 {
        0.5 * self.dphi(rho)
    }

    fn is_fixed(&self) -> bool {
        self.terms.iter().all(|&(_, b)| b == 0.0)
    }

    /// Open range `(lim_{ρ→−∞} H, lim_{ρ→+∞} H)` along the orbit.
    fn h_limits(&self) -> (f64, f64) {
        match self.kind {
            GeometryKind::BargmannFock => {
                if self.is_fixed() {
                    (0.0, 0.0)
                } else {
                    (0.0, f64::INFINITY)
                }
            }
            GeometryKind::ProjectiveSpace => {
                let top = self.terms.iter().map(|&(_, b)| b).fold(0.0, f64::max);
                (0.0, top)
            }
        }
    }

    /// Unique ρ with `∂ρφ(e^ρ·z) = target` (`target` strictly inside the orbit range).
    fn solve_dphi(&self, target: f64) -> Result<f64> {
        let f = |rho: f64| self.dphi(rho) - target;
        let f0 = f(0.0);
        if f0 == 0.0 {
            return Ok(0.0);
        }
        let dir = if f0 < 0.0 { 1.0 } else { -1.0 };
        let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
        let mut step = 0.5;
        let mut found = false;
        for _ in 0..64 {
            let probe = dir * step;
            let fp = f(probe);
            if !fp.is_finite() {
                return Err(Error::Range(format!("orbit evaluation overflowed at rho = {probe}")));
            }
            if (fp > 0.0) == (dir > 0.0) || fp == 0.0 {
                if dir > 0.0 {
                    hi = probe;
                } else {
                    lo = probe;
                }
                found = true;
                break;
            }
            if dir > 0.0 {
                lo = probe;
            } else {
                hi = probe;
            }
            step *= 2.0;
        }
        if !found {
            return Err(Error::Numeric(format!("could not bracket dphi = {target}")));
        }
        while hi - lo > ROOT_TOL * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut rho = 0.5 * (lo + hi);
        for _ in 0..2 {
            let d = self.d2phi(rho);
            if d <= 0.0 {
                break;
            }
            let next = rho - f(rho) / d;
            if next >= lo - ROOT_TOL && next <= hi + ROOT_TOL && f(next).abs() <= f(rho).abs() {
                rho = next;
            }
        }
        Ok(rho)
    }
}

fn log1p_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.collect();
    let max = xs.iter().copied().fold(0.0_f64, f64::max);
    let s: f64 = (-max).exp() + xs.iter().map(|x| (x - max).exp()).sum::<f64>();
    max + s.ln()
}

/// `e^x − 1 − x` without cancellation near zero.
pub(crate) fn expm1_minus_x(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut term = x * x / 2.0;
        let mut sum = term;
        for n in 3..20 {
            term *= x / n as f64;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        x.exp_m1() - x
    }
}

/// `ln(1 + u) − u` without cancellation near zero.
fn log1p_minus_u(u: f64) -> f64 {
    if u.abs() < 0.1 {
        let mut pow = u * u;
        let mut sum = 0.0;
        for n in 2..40 {
            let term = pow / n as f64;
            sum += if n % 2 == 0 { -term } else { term };
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            pow *= u;
        }
        sum
    } else {
        u.ln_1p() - u
    }
}

impl ModelGeometry {
    pub fn new(kind: GeometryKind, weights: Vec<u32>) -> Result<Self> {
        if weights.is_empty() {
            return domain("complex dimension must be at least 1");
        }
        if weights.iter().all(|&b| b == 0) {
            return domain("action weights must not all be zero");
        }
        Ok(ModelGeometry { kind, weights })
    }

    pub fn bargmann_fock(weights: Vec<u32>) -> Result<Self> {
        Self::new(GeometryKind::BargmannFock, weights)
    }

    pub fn projective(weights: Vec<u32>) -> Result<Self> {
        Self::new(GeometryKind::ProjectiveSpace, weights)
    }

    /// `ℂP¹` with the standard rotation.
    pub fn cp1() -> Self {
        ModelGeometry { kind: GeometryKind::ProjectiveSpace, weights: vec![1] }
    }

    /// `ℂ` with the standard rotation (isotropic oscillator, m = 1).
    pub fn bf1() -> Self {
        ModelGeometry { kind: GeometryKind::BargmannFock, weights: vec![1] }
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    /// Complex dimension m.
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn max_weight(&self) -> u32 {
        self.weights.iter().copied().max().unwrap_or(0)
    }

    /// `H(M)`: `[0, ∞)` for Bargmann–Fock, `[0, max b]` for projective space.
    pub fn hamiltonian_range(&self) -> (f64, f64) {
        match self.kind {
            GeometryKind::BargmannFock => (0.0, f64::INFINITY),
            GeometryKind::ProjectiveSpace => (0.0, f64::from(self.max_weight())),
        }
    }

    pub fn validate_point(&self, z: &Point) -> Result<()> {
        if z.0.len() != self.dim() {
            return domain(format!("point has {} coordinates, geometry has m = {}", z.0.len(), self.dim()));
        }
        if z.0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return domain("point has non-finite coordinates");
        }
        if self.kind == GeometryKind::ProjectiveSpace && z.norm() > CHART_RADIUS_LIMIT {
            return Err(Error::Range(format!(
                "chart norm {:e} exceeds {CHART_RADIUS_LIMIT:e}; chart switching is not supported",
                z.norm()
            )));
        }
        Ok(())
    }

    fn orbit(&self, z: &Point) -> Orbit {
        let terms = z
            .0
            .iter()
            .zip(&self.weights)
            .filter(|(c, _)| c.norm_sqr() > 0.0)
            .map(|(c, &b)| (c.norm_sqr().ln(), f64::from(b)))
            .collect();
        Orbit { kind: self.kind, terms }
    }

    /// True when every coordinate with nonzero weight vanishes.
    pub fn is_fixed_point(&self, z: &Point) -> bool {
        self.orbit(z).is_fixed()
    }

    /// Limits of `H` along the real orbit of `z` as `ρ → ∓∞`.
    pub fn orbit_energy_range(&self, z: &Point) -> (f64, f64) {
        self.orbit(z).h_limits()
    }

    pub fn kahler_potential(&self, z: &Point) -> f64 {
        match self.kind {
            GeometryKind::BargmannFock => z.norm_sqr(),
            GeometryKind::ProjectiveSpace => z.norm_sqr().ln_1p(),
        }
    }

    /// Complexified action `z_j ↦ e^{b_j w} z_j`.
    pub fn flow(&self, z: &Point, w: Complex64) -> Result<Point> {
        let coords: Vec<Complex64> = z
            .0
            .iter()
            .zip(&self.weights)
            .map(|(c, &b)| if b == 0 { *c } else { c * (w * f64::from(b)).exp() })
            .collect();
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Range(format!("flow by w = {w} overflowed")));
        }
        Ok(Point(coords))
    }

    pub fn flow_real(&self, z: &Point, rho: f64) -> Result<Point> {
        self.flow(z, Complex64::new(rho, 0.0))
    }

    /// First or second derivative of `ρ ↦ φ(e^ρ·z)` at `ρ = 0`.
    pub fn d_rho_phi(&self, z: &Point, order: RhoOrder) -> f64 {
        let orbit = self.orbit(z);
        match order {
            RhoOrder::First => orbit.dphi(0.0),
            RhoOrder::Second => orbit.d2phi(0.0),
        }
    }

    /// Moment map `H = ½ ∂ρφ`.
    pub fn hamiltonian(&self, z: &Point) -> f64 {
        0.5 * self.d_rho_phi(z, RhoOrder::First)
    }

    /// `|∇H|² = π ∂²ρφ`.
    pub fn grad_norm_sq(&self, z: &Point) -> f64 {
        PI * self.d_rho_phi(z, RhoOrder::Second)
    }

    /// Riemannian distance of the metric underlying `ω = (i/2π)∂∂̄φ`.
    pub fn riemannian_distance(&self, z: &Point, w: &Point) -> f64 {
        match self.kind {
            GeometryKind::BargmannFock => {
                let d2: f64 = z.0.iter().zip(&w.0).map(|(a, b)| (a - b).norm_sqr()).sum();
                (d2 / PI).sqrt()
            }
            GeometryKind::ProjectiveSpace => {
                let inner: Complex64 =
                    Complex64::new(1.0, 0.0) + z.0.iter().zip(&w.0).map(|(a, b)| a * b.conj()).sum::<Complex64>();
                let c = inner.norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt();
                c.min(1.0).acos() / PI.sqrt()
            }
        }
    }

    fn require_free(&self, z: &Point) -> Result<Orbit> {
        self.validate_point(z)?;
        let orbit = self.orbit(z);
        if orbit.is_fixed() {
            return domain("point is fixed by the circle action");
        }
        Ok(orbit)
    }

    fn require_energy(&self, orbit: &Orbit, energy: f64) -> Result<()> {
        let (lo, hi) = orbit.h_limits();
        if !(energy > lo && energy < hi) {
            return domain(format!("energy {energy} is not attained on the orbit (range ({lo}, {hi}))"));
        }
        Ok(())
    }

    /// Locates `z_E` on the real orbit of `z` and the associated flow data.
    pub fn level_point(&self, z: &Point, energy: f64) -> Result<LevelData> {
        let orbit = self.require_free(z)?;
        self.require_energy(&orbit, energy)?;
        let rho = if orbit.h(0.0) == energy { 0.0 } else { orbit.solve_dphi(2.0 * energy)? };
        let z_e = self.flow_real(z, rho)?;
        let tau_e = -rho;
        let mut level = LevelData {
            energy,
            z_e,
            tau_e,
            b_e: 0.0,
            d_rho_phi: orbit.dphi(rho),
            d2_rho_phi: orbit.d2phi(rho),
        };
        level.b_e = self.action_integral_formula(z, &level);
        Ok(level)
    }

    /// `b_E = φ(z) − φ(z_E) − τ_E ∂ρφ(z_E)`, evaluated without cancellation.
    pub fn action_integral_formula(&self, _z: &Point, level: &LevelData) -> f64 {
        let tau = level.tau_e;
        if tau == 0.0 {
            return 0.0;
        }
        let at_level = self.orbit(&level.z_e);
        match self.kind {
            GeometryKind::BargmannFock => at_level
                .terms
                .iter()
                .map(|&(l, b)| l.exp() * expm1_minus_x(2.0 * b * tau))
                .sum(),
            GeometryKind::ProjectiveSpace => {
                let probs = at_level.fs_probs(0.0);
                let u: f64 = probs.iter().map(|(p, b)| p * (2.0 * b * tau).exp_m1()).sum();
                let curvature: f64 = probs.iter().map(|(p, b)| p * expm1_minus_x(2.0 * b * tau)).sum();
                log1p_minus_u(u) + curvature
            }
        }
    }

    /// `b_E = 2∫₀^{τ_E} (H(e^σ·z_E) − E) dσ` by adaptive quadrature.
    pub fn action_integral_quadrature(&self, _z: &Point, level: &LevelData) -> Result<f64> {
        let at_level = self.orbit(&level.z_e);
        let e = level.energy;
        let r = quad::integrate(
            |s| 2.0 * (at_level.h(s) - e),
            0.0,
            level.tau_e,
            QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 4000 },
        )?;
        Ok(r.value)
    }

    /// Leafwise Legendre transform `u(I) = sup_ρ (Iρ − φ(e^ρ·z))`; returns `(u, ρ*)`.
    pub fn symplectic_potential(&self, z: &Point, action: f64) -> Result<(f64, f64)> {
        let orbit = self.require_free(z)?;
        self.require_energy(&orbit, action / 2.0)?;
        let rho = orbit.solve_dphi(action)?;
        Ok((action * rho - orbit.phi(rho), rho))
    }

    /// `b(z, E)` as a function of the energy, for derivative checks.
    pub fn action_integral(&self, z: &Point, energy: f64) -> Result<f64> {
        Ok(self.level_point(z, energy)?.b_e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Five-point central differences of `ρ ↦ φ(e^ρ z)`.
    fn fd_rho(g: &ModelGeometry, z: &Point, order: RhoOrder) -> f64 {
        let h = 1e-3;
        let phi = |r: f64| g.kahler_potential(&g.flow_real(z, r).unwrap());
        let (m2, m1, p0, p1, p2) = (phi(-2.0 * h), phi(-h), phi(0.0), phi(h), phi(2.0 * h));
        match order {
            RhoOrder::First => (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
            RhoOrder::Second => (-m2 + 16.0 * m1 - 30.0 * p0 + 16.0 * p1 - p2) / (12.0 * h * h),
        }
    }

    #[test]
    fn potentials() {
        let bf = ModelGeometry::bf1();
        let cp = ModelGeometry::cp1();
        assert_eq!(bf.kahler_potential(&Point::from_reals(&[1.0])), 1.0);
        assert_relative_eq!(cp.kahler_potential(&Point::from_reals(&[1.0])), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(bf.kahler_potential(&Point::from_reals(&[0.0])), 0.0);
        assert_eq!(cp.kahler_potential(&Point::from_reals(&[0.0])), 0.0);
    }

    #[test]
    fn flow_rotation_and_group_law() {
        let bf = ModelGeometry::bf1();
        let z = Point::from_reals(&[1.0]);
        let r = bf.flow(&z, c(0.0, PI)).unwrap();
        assert!((r.0[0] - c(-1.0, 0.0)).norm() < 1e-15);

        let g = ModelGeometry::bargmann_fock(vec![1, 2]).unwrap();
        let z = Point::new(vec![c(0.3, -0.2), c(0.7, 0.1)]);
        let a = g.flow(&g.flow(&z, c(0.1, 0.0)).unwrap(), c(0.2, 0.0)).unwrap();
        let b = g.flow(&z, c(0.3, 0.0)).unwrap();
        for (x, y) in a.0.iter().zip(&b.0) {
            assert!((x - y).norm() < 1e-14);
        }

        let cp = ModelGeometry::cp1();
        let e = cp.flow_real(&Point::from_reals(&[1.0]), 0.7).unwrap();
        assert_relative_eq!(e.0[0].re, 0.7f64.exp(), epsilon = 1e-15);
    }

    #[test]
    fn flow_overflow_is_range_error() {
        let bf = ModelGeometry::bf1();
        let err = bf.flow_real(&Point::from_reals(&[1.0]), 1e4).unwrap_err();
        assert!(matches!(err, Error::Range(_)));
    }

    #[test]
    fn rho_derivatives_closed_forms() {
        let bf = ModelGeometry::bf1();
        let z = Point::from_reals(&[1.0]);
        assert_relative_eq!(bf.d_rho_phi(&z, RhoOrder::Second), 4.0, epsilon = 1e-15);
        assert_relative_eq!(fd_rho(&bf, &z, RhoOrder::Second), 4.0, epsilon = 1e-6);

        let cp = ModelGeometry::cp1();
        let z = Point::from_reals(&[0.8]);
        let x = 0.64 / 1.64;
        assert_relative_eq!(cp.d_rho_phi(&z, RhoOrder::First), 2.0 * x, epsilon = 1e-15);
        assert_relative_eq!(cp.grad_norm_sq(&z), 4.0 * PI * x * (1.0 - x), epsilon = 1e-14);
        assert_eq!(cp.d_rho_phi(&Point::from_reals(&[0.0]), RhoOrder::First), 0.0);
    }

    #[test]
    fn hamiltonian_examples() {
        let bf = ModelGeometry::bargmann_fock(vec![1, 1, 1]).unwrap();
        let z = Point::new(vec![c(0.3, 0.4), c(-1.0, 0.2), c(0.0, 0.5)]);
        assert_relative_eq!(bf.hamiltonian(&z), z.norm_sqr(), epsilon = 1e-14);

        let cp = ModelGeometry::cp1();
        let z = Point::from_reals(&[1.0]);
        assert_relative_eq!(cp.hamiltonian(&z), 0.5, epsilon = 1e-15);
        assert_relative_eq!(0.5 * fd_rho(&cp, &z, RhoOrder::First), 0.5, epsilon = 1e-8);
        assert_eq!(cp.hamiltonian(&Point::from_reals(&[0.0])), 0.0);
        assert_eq!(cp.grad_norm_sq(&Point::from_reals(&[0.0])), 0.0);
    }

    #[test]
    fn level_point_examples() {
        let bf = ModelGeometry::bf1();
        let lv = bf.level_point(&Point::from_reals(&[0.3f64.exp()]), 1.0).unwrap();
        assert_relative_eq!(lv.z_e.0[0].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(lv.tau_e, 0.3, epsilon = 1e-12);
        assert_relative_eq!(lv.b_e, 0.6f64.exp() - 1.6, epsilon = 1e-12);

        let on = bf.level_point(&Point::from_reals(&[1.0]), 1.0).unwrap();
        assert_eq!(on.tau_e, 0.0);
        assert_eq!(on.b_e, 0.0);

        let cp = ModelGeometry::cp1();
        let lv = cp.level_point(&Point::from_reals(&[2.0]), 0.5).unwrap();
        assert_relative_eq!(lv.z_e.norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(lv.tau_e, 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn level_point_rejections() {
        let cp = ModelGeometry::cp1();
        assert!(matches!(cp.level_point(&Point::from_reals(&[0.0]), 0.5), Err(Error::Domain(_))));
        assert!(matches!(cp.level_point(&Point::from_reals(&[1.0]), 1.0), Err(Error::Domain(_))));
        assert!(matches!(cp.level_point(&Point::from_reals(&[1.0]), 0.0), Err(Error::Domain(_))));
        assert!(matches!(cp.level_point(&Point::from_reals(&[1e9]), 0.5), Err(Error::Range(_))));
        let bf = ModelGeometry::bf1();
        assert!(matches!(bf.level_point(&Point::from_reals(&[1.0]), -1.0), Err(Error::Domain(_))));
        // b = (1, 0): a point on the fixed hypersurface z_1 = 0
        let g = ModelGeometry::bargmann_fock(vec![1, 0]).unwrap();
        assert!(g.is_fixed_point(&Point::from_reals(&[0.0, 2.0])));
        assert!(matches!(g.level_point(&Point::from_reals(&[0.0, 2.0]), 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn projective_orbit_range_uses_support() {
        let g = ModelGeometry::projective(vec![1, 3]).unwrap();
        assert_eq!(g.orbit_energy_range(&Point::from_reals(&[0.5, 0.0])), (0.0, 1.0));
        assert_eq!(g.orbit_energy_range(&Point::from_reals(&[0.5, 0.5])), (0.0, 3.0));
        assert_eq!(g.hamiltonian_range(), (0.0, 3.0));
    }

    #[test]
    fn action_integral_examples() {
        let bf = ModelGeometry::bf1();
        let z = Point::from_reals(&[0.3f64.exp()]);
        let lv = bf.level_point(&z, 1.0).unwrap();
        let q = bf.action_integral_quadrature(&z, &lv).unwrap();
        assert_relative_eq!(lv.b_e, 0.222_118_800_390_508_6, epsilon = 1e-12);
        assert!((q - lv.b_e).abs() <= 1e-9);

        let z = Point::from_reals(&[(-0.3f64).exp()]);
        let lv = bf.level_point(&z, 1.0).unwrap();
        assert_relative_eq!(lv.tau_e, -0.3, epsilon = 1e-12);
        assert_relative_eq!(lv.b_e, (-0.6f64).exp() - 1.0 + 0.6, epsilon = 1e-12);
        assert!(lv.b_e > 0.0);

        let cp = ModelGeometry::cp1();
        let z = Point::from_reals(&[2.0]);
        let lv = cp.level_point(&z, 0.5).unwrap();
        let q = cp.action_integral_quadrature(&z, &lv).unwrap();
        assert!((q - lv.b_e).abs() / lv.b_e.abs().max(1.0) <= 1e-9);
        // direct bEFORM with raw potentials
        let direct = cp.kahler_potential(&z) - cp.kahler_potential(&lv.z_e) - lv.tau_e * lv.d_rho_phi;
        assert_relative_eq!(direct, lv.b_e, epsilon = 1e-12);
    }

    #[test]
    fn symplectic_potential_examples() {
        let bf = ModelGeometry::bf1();
        let (u, rho) = bf.symplectic_potential(&Point::from_reals(&[1.0]), 2.0).unwrap();
        assert!(rho.abs() < 1e-12);
        assert_relative_eq!(u, -1.0, epsilon = 1e-12);

        let z = Point::from_reals(&[0.3f64.exp()]);
        let (u, _) = bf.symplectic_potential(&z, 2.0).unwrap();
        let b = bf.action_integral(&z, 1.0).unwrap();
        assert_relative_eq!(bf.kahler_potential(&z) + u, b, epsilon = 1e-12);

        assert!(matches!(
            ModelGeometry::cp1().symplectic_potential(&Point::from_reals(&[1.0]), 2.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn energy_derivatives_of_action() {
        for (g, z, e) in [
            (ModelGeometry::bf1(), Point::from_reals(&[0.3f64.exp()]), 1.0),
            (ModelGeometry::cp1(), Point::from_reals(&[1.7]), 0.4),
            (ModelGeometry::projective(vec![1, 2]).unwrap(), Point::from_reals(&[0.6, 0.9]), 0.9),
        ] {
            let h = 1e-5 * f64::max(e, 1.0);
            let b = |en: f64| g.action_integral(&z, en).unwrap();
            let lv = g.level_point(&z, e).unwrap();
            let d1 = (b(e + h) - b(e - h)) / (2.0 * h);
            assert!((d1 + 2.0 * lv.tau_e).abs() < 1e-6, "dE b = {d1}, -2tau = {}", -2.0 * lv.tau_e);
            let d2 = (b(e + h) - 2.0 * b(e) + b(e - h)) / (h * h);
            let want = 4.0 / lv.d2_rho_phi;
            assert!(d2 > 0.0);
            assert!(((d2 - want) / want).abs() < 1e-5, "d2E b = {d2}, want {want}");
            let (u, _) = g.symplectic_potential(&z, 2.0 * e).unwrap();
            assert!((g.kahler_potential(&z) + u - b(e)).abs() < 1e-11);
        }
    }

    #[test]
    fn gradient_norm_matches_metric_finite_differences() {
        // |dH|² = 4π (∂∂̄φ)^{ij̄} ∂_i H ∂̄_j H with ∂_i = ½(∂_x − i∂_y);
        // checked here for m = 1 where the metric coefficient is scalar.
        for (g, z) in [
            (ModelGeometry::bf1(), c(0.7, -0.4)),
            (ModelGeometry::cp1(), c(0.5, 1.1)),
            (ModelGeometry::projective(vec![2]).unwrap(), c(-0.3, 0.6)),
        ] {
            let h = 1e-5;
            let ham = |w: Complex64| g.hamiltonian(&Point::new(vec![w]));
            let hx = (ham(z + c(h, 0.0)) - ham(z - c(h, 0.0))) / (2.0 * h);
            let hy = (ham(z + c(0.0, h)) - ham(z - c(0.0, h))) / (2.0 * h);
            let dh = 0.5 * Complex64::new(hx, -hy);
            let metric = match g.kind() {
                GeometryKind::BargmannFock => 1.0,
                GeometryKind::ProjectiveSpace => 1.0 / (1.0 + z.norm_sqr()).powi(2),
            };
            let fd = 4.0 * PI * dh.norm_sqr() / metric;
            let exact = g.grad_norm_sq(&Point::new(vec![z]));
            assert!(((fd - exact) / exact).abs() < 1e-6, "{fd} vs {exact}");
        }
    }

    #[test]
    fn projective_max_hamiltonian_is_max_weight() {
        let g = ModelGeometry::projective(vec![1, 3]).unwrap();
        let mut sup = 0.0_f64;
        for i in 0..200 {
            for j in 0..200 {
                let r1 = 10f64.powf(-4.0 + 8.0 * i as f64 / 199.0);
                let r2 = 10f64.powf(-4.0 + 8.0 * j as f64 / 199.0);
                sup = sup.max(g.hamiltonian(&Point::from_reals(&[r1, r2])));
            }
        }
        assert!((sup - 3.0).abs() < 1e-6, "sup H = {sup}");
    }

    #[test]
    fn riemannian_distance_basics() {
        let bf = ModelGeometry::bf1();
        let d = bf.riemannian_distance(&Point::from_reals(&[1.0]), &Point::from_reals(&[1.2]));
        assert_relative_eq!(d, 0.2 / PI.sqrt(), epsilon = 1e-15);
        let cp = ModelGeometry::cp1();
        let z = Point::from_reals(&[0.4]);
        assert!(cp.riemannian_distance(&z, &z) < 1e-7);
        // 0 and ∞ are antipodal: distance → (π/2)/√π
        let far = cp.riemannian_distance(&Point::from_reals(&[0.0]), &Point::from_reals(&[1e7]));
        assert_relative_eq!(far, 0.5 * PI.sqrt(), epsilon = 1e-6);
    }

    fn geom_strategy() -> impl Strategy<Value = (ModelGeometry, Point)> {
        (any::<bool>(), 1u32..4, 0u32..3, 0.05f64..2.0, 0.05f64..2.0, -3.0f64..3.0).prop_map(
            |(proj, b1, b2, r1, r2, th)| {
                let kind = if proj { GeometryKind::ProjectiveSpace } else { GeometryKind::BargmannFock };
                let g = ModelGeometry::new(kind, vec![b1, b2]).unwrap();
                let z = Point::new(vec![Complex64::from_polar(r1, th), Complex64::from_polar(r2, -th)]);
                (g, z)
            },
        )
    }

    proptest! {
        #[test]
        fn hamiltonian_is_half_rho_derivative((g, z) in geom_strategy()) {
            let fd = 0.5 * fd_rho(&g, &z, RhoOrder::First);
            prop_assert!((g.hamiltonian(&z) - fd).abs() <= 1e-8 * (1.0 + fd.abs()));
            prop_assert_eq!(g.hamiltonian(&z), 0.5 * g.d_rho_phi(&z, RhoOrder::First));
            let fd2 = fd_rho(&g, &z, RhoOrder::Second);
            prop_assert!((g.d_rho_phi(&z, RhoOrder::Second) - fd2).abs() <= 1e-5 * (1.0 + fd2.abs()));
        }

        #[test]
        fn hamiltonian_increases_along_orbit((g, z) in geom_strategy(), rho in -2.0f64..2.0, dr in 1e-3f64..0.5) {
            let a = g.hamiltonian(&g.flow_real(&z, rho).unwrap());
            let b = g.hamiltonian(&g.flow_real(&z, rho + dr).unwrap());
            prop_assert!(b > a);
        }

        #[test]
        fn action_integral_dual_route((g, z) in geom_strategy(), frac in 0.05f64..0.95) {
            let (lo, hi) = g.orbit_energy_range(&z);
            let hz = g.hamiltonian(&z);
            let e = if hi.is_finite() { lo + frac * (hi - lo) } else { hz * (0.3 + 1.4 * frac) };
            let lv = g.level_point(&z, e).unwrap();
            let back = g.flow_real(&lv.z_e, lv.tau_e).unwrap();
            for (x, y) in back.0.iter().zip(&z.0) {
                prop_assert!((x - y).norm() <= 1e-9 * (1.0 + y.norm()));
            }
            prop_assert!((g.hamiltonian(&lv.z_e) - e).abs() <= 1e-10 * (1.0 + e));
            let q = g.action_integral_quadrature(&z, &lv).unwrap();
            prop_assert!((q - lv.b_e).abs() / lv.b_e.abs().max(1.0) <= 1e-9, "{} vs {}", q, lv.b_e);
            prop_assert!(lv.b_e >= 0.0);
        }
    }
}
