//! Exact finite-k Bergman densities on the model geometries.
//!
//! `H⁰(M, L^k)` is spanned by monomials `z^α`, which are orthogonal and
//! diagonalize the circle action with weight `j = Σ b_i α_i`. With
//! `c_α² = ‖z^α‖⁻²` the equivariant density is
//! `Π_{k,j}(z) = Σ_{wt α = j} c_α² |z^α|² e^{−kφ(z)}`, evaluated in log space.

use crate::error::{domain, Error, Result};
use crate::geometry::{GeometryKind, ModelGeometry, Point};
use crate::logreal::{log_sum_exp, LogReal};
use crate::quad::{self, QuadOptions};
use num_complex::Complex64;
use serde::Serialize;
use libm::lgamma as ln_gamma;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

/// Upper bound on enumerated monomials.
pub const MAX_BASIS_ENTRIES: usize = 4_000_000;

/// Default query radius for the truncated Bargmann–Fock basis.
pub const DEFAULT_BF_RADIUS: f64 = 2.0;

/// Where projective monomial norms come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormSource {
    /// `‖z^α‖⁻² = (k+m)!/(α! (k−|α|)!)`.
    ClosedForm,
    /// Product of one-dimensional Beta integrals computed by adaptive quadrature.
    Quadrature,
}

#[derive(Debug, Clone, Copy)]
pub struct BasisOptions {
    /// Bargmann–Fock only: largest `‖z‖` for which densities are trusted.
    pub radius: f64,
    pub norms: NormSource,
}

impl Default for BasisOptions {
    fn default() -> Self {
        BasisOptions { radius: DEFAULT_BF_RADIUS, norms: NormSource::ClosedForm }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisEntry {
    pub alpha: Vec<u32>,
    pub weight: u64,
    /// `log c_α²`, the log squared normalizing constant of `z^α`.
    pub log_sq_coeff: f64,
}

/// Orthonormal monomial basis graded by weight. Entries are sorted by weight.
#[derive(Debug, Clone)]
pub struct WeightBasis {
    geom: ModelGeometry,
    k: u32,
    radius: Option<f64>,
    entries: Vec<BasisEntry>,
    /// `(weight, start, end)` ranges into `entries`.
    blocks: Vec<(u64, usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityResult {
    /// `Π_{k,j}(z)` for every weight present in the basis.
    pub per_weight: BTreeMap<u64, LogReal>,
    pub total: LogReal,
}

impl DensityResult {
    pub fn get(&self, j: u64) -> LogReal {
        self.per_weight.get(&j).copied().unwrap_or(LogReal::ZERO)
    }
}

/// Endpoint of an interval of energies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bound {
    Unbounded,
    Included(f64),
    Excluded(f64),
}

/// Energy interval `P`; `j` belongs to `kP` when `j/k ∈ P`, decided exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    /// `[a, b)`.
    pub fn half_open(a: f64, b: f64) -> Self {
        Interval { lo: Bound::Included(a), hi: Bound::Excluded(b) }
    }

    /// `[a, b]`.
    pub fn closed(a: f64, b: f64) -> Self {
        Interval { lo: Bound::Included(a), hi: Bound::Included(b) }
    }

    /// `[0, E)`, the default for partial densities.
    pub fn below(e: f64) -> Self {
        Interval::half_open(0.0, e)
    }

    /// `(−∞, E]`.
    pub fn at_most(e: f64) -> Self {
        Interval { lo: Bound::Unbounded, hi: Bound::Included(e) }
    }

    pub fn all() -> Self {
        Interval { lo: Bound::Unbounded, hi: Bound::Unbounded }
    }

    pub fn contains_weight(&self, j: u64, k: u32) -> bool {
        let lo_ok = match self.lo {
            Bound::Unbounded => true,
            Bound::Included(a) => cmp_scaled(j, k, a) != Ordering::Less,
            Bound::Excluded(a) => cmp_scaled(j, k, a) == Ordering::Greater,
        };
        let hi_ok = match self.hi {
            Bound::Unbounded => true,
            Bound::Included(b) => cmp_scaled(j, k, b) != Ordering::Greater,
            Bound::Excluded(b) => cmp_scaled(j, k, b) == Ordering::Less,
        };
        lo_ok && hi_ok
    }
}

/// Compares the integer `j` with the real number `k·x` exactly.
pub fn cmp_scaled(j: u64, k: u32, x: f64) -> Ordering {
    if x.is_nan() {
        return Ordering::Less;
    }
    let kf = f64::from(k);
    let p = kf * x;
    if p.is_infinite() {
        return if p > 0.0 { Ordering::Less } else { Ordering::Greater };
    }
    // k·x = p + e exactly
    let e = kf.mul_add(x, -p);
    let d = j as f64 - p;
    d.partial_cmp(&e).unwrap_or(Ordering::Equal)
}

fn log_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

/// Visits all multi-indices in `ℕ^m` with `|α| ≤ n`.
fn for_each_multi_index(m: usize, n: u32, f: &mut impl FnMut(&[u32])) {
    fn rec(alpha: &mut Vec<u32>, pos: usize, left: u32, f: &mut impl FnMut(&[u32])) {
        if pos == alpha.len() {
            f(alpha);
            return;
        }
        for a in 0..=left {
            alpha[pos] = a;
            rec(alpha, pos + 1, left - a, f);
        }
        alpha[pos] = 0;
    }
    let mut alpha = vec![0u32; m];
    rec(&mut alpha, 0, n, f);
}

fn multi_index_count(m: usize, n: u32) -> f64 {
    // C(n+m, m)
    let mut c = 1.0_f64;
    for i in 1..=m {
        c *= f64::from(n) + i as f64;
        c /= i as f64;
    }
    c
}

/// Truncation degree for the Bargmann–Fock basis at query radius `r`.
pub fn bf_truncation(k: u32, r: f64) -> u32 {
    let mean = f64::from(k) * r * r;
    (mean + 12.0 * mean.sqrt() + 40.0).ceil() as u32
}

fn beta_cache() -> &'static Mutex<HashMap<(u64, u64), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `log ∫₀^∞ t^a (1+t)^{−n} dt` by quadrature of the Beta integral
/// `∫₀¹ u^a (1−u)^{n−a−2} du`, normalized by its peak.
fn log_radial_integral(a: u64, n: u64) -> Result<f64> {
    if n < a + 2 {
        return domain(format!("radial integral diverges for a = {a}, n = {n}"));
    }
    if let Some(v) = beta_cache().lock().expect("cache poisoned").get(&(a, n)) {
        return Ok(*v);
    }
    let (p, q) = (a as f64, (n - a - 2) as f64);
    let peak = if p + q > 0.0 { p / (p + q) } else { 0.5 };
    let log_at = |u: f64| {
        let lp = if p == 0.0 { 0.0 } else { p * u.ln() };
        let lq = if q == 0.0 { 0.0 } else { q * (-u).ln_1p() };
        lp + lq
    };
    let top = log_at(peak);
    let g = |u: f64| (log_at(u) - top).exp();
    let opts = QuadOptions { abs_tol: 1e-300, rel_tol: 1e-14, max_intervals: 20_000 };
    let mut total = 0.0;
    for (x0, x1) in [(0.0, peak), (peak, 1.0)] {
        if x1 > x0 {
            total += quad::integrate(g, x0, x1, opts)?.value;
        }
    }
    let v = top + total.ln();
    beta_cache().lock().expect("cache poisoned").insert((a, n), v);
    Ok(v)
}

/// `log ‖z^α‖²` on `ℂP^m` with `h^k`, computed by iterated radial quadrature.
pub fn cp_monomial_log_norm_quadrature(k: u32, alpha: &[u32]) -> Result<f64> {
    let total: u64 = alpha.iter().map(|&a| u64::from(a)).sum();
    if total > u64::from(k) {
        return domain(format!("|α| = {total} exceeds degree k = {k}"));
    }
    let mut n = u64::from(k) + alpha.len() as u64 + 1;
    let mut acc = 0.0;
    for &a in alpha.iter().rev() {
        let a = u64::from(a);
        acc += log_radial_integral(a, n)?;
        n -= a + 1;
    }
    Ok(acc)
}

/// `log ‖z^α‖⁻²` on `ℂP^m` in closed form.
pub fn cp_log_sq_coeff(k: u32, alpha: &[u32]) -> f64 {
    let m = alpha.len() as u64;
    let total: u64 = alpha.iter().map(|&a| u64::from(a)).sum();
    log_factorial(u64::from(k) + m)
        - alpha.iter().map(|&a| log_factorial(u64::from(a))).sum::<f64>()
        - log_factorial(u64::from(k) - total)
}

/// `log ‖z^α‖⁻²` on Bargmann–Fock space.
pub fn bf_log_sq_coeff(k: u32, alpha: &[u32]) -> f64 {
    let total: u64 = alpha.iter().map(|&a| u64::from(a)).sum();
    (total + alpha.len() as u64) as f64 * f64::from(k).ln()
        - alpha.iter().map(|&a| log_factorial(u64::from(a))).sum::<f64>()
}

/// `log` of the full diagonal density, which is constant on both models.
pub fn log_full_density(geom: &ModelGeometry, k: u32) -> f64 {
    let m = geom.dim() as u64;
    match geom.kind() {
        GeometryKind::BargmannFock => m as f64 * f64::from(k).ln(),
        GeometryKind::ProjectiveSpace => log_factorial(u64::from(k) + m) - log_factorial(u64::from(k)),
    }
}

impl WeightBasis {
    pub fn build(geom: &ModelGeometry, k: u32) -> Result<Self> {
        Self::build_with(geom, k, BasisOptions::default())
    }

    pub fn build_with(geom: &ModelGeometry, k: u32, opts: BasisOptions) -> Result<Self> {
        if k == 0 {
            return domain("k must be at least 1");
        }
        let m = geom.dim();
        let (degree, radius) = match geom.kind() {
            GeometryKind::BargmannFock => {
                if !(opts.radius.is_finite() && opts.radius >= 0.0) {
                    return domain(format!("invalid basis radius {}", opts.radius));
                }
                (bf_truncation(k, opts.radius), Some(opts.radius))
            }
            GeometryKind::ProjectiveSpace => (k, None),
        };
        let count = multi_index_count(m, degree);
        if count > MAX_BASIS_ENTRIES as f64 {
            return Err(Error::Resource(format!(
                "basis would have {count:.0} monomials (m = {m}, degree {degree}); limit {MAX_BASIS_ENTRIES}"
            )));
        }
        let weights: Vec<u64> = geom.weights().iter().map(|&b| u64::from(b)).collect();
        let mut entries = Vec::with_capacity(count as usize);
        let mut failure = None;
        for_each_multi_index(m, degree, &mut |alpha| {
            if failure.is_some() {
                return;
            }
            let weight = alpha.iter().zip(&weights).map(|(&a, &b)| u64::from(a) * b).sum();
            let log_sq_coeff = match (geom.kind(), opts.norms) {
                (GeometryKind::BargmannFock, _) => bf_log_sq_coeff(k, alpha),
                (GeometryKind::ProjectiveSpace, NormSource::ClosedForm) => cp_log_sq_coeff(k, alpha),
                (GeometryKind::ProjectiveSpace, NormSource::Quadrature) => {
                    match cp_monomial_log_norm_quadrature(k, alpha) {
                        Ok(v) => -v,
                        Err(e) => {
                            failure = Some(e);
                            0.0
                        }
                    }
                }
            };
            entries.push(BasisEntry { alpha: alpha.to_vec(), weight, log_sq_coeff });
        });
        if let Some(e) = failure {
            return Err(e);
        }
        entries.sort_by(|a, b| a.weight.cmp(&b.weight).then_with(|| a.alpha.cmp(&b.alpha)));
        let mut blocks = Vec::new();
        let mut start = 0;
        for i in 1..=entries.len() {
            if i == entries.len() || entries[i].weight != entries[start].weight {
                blocks.push((entries[start].weight, start, i));
                start = i;
            }
        }
        Ok(WeightBasis { geom: geom.clone(), k, radius, entries, blocks })
    }

    pub fn geometry(&self) -> &ModelGeometry {
        &self.geom
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Query radius of a truncated Bargmann–Fock basis.
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct weights present, ascending.
    pub fn weights_present(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.0).collect()
    }

    pub fn weight_entries(&self, j: u64) -> &[BasisEntry] {
        match self.blocks.binary_search_by_key(&j, |b| b.0) {
            Ok(i) => &self.entries[self.blocks[i].1..self.blocks[i].2],
            Err(_) => &[],
        }
    }

    /// `dim V_k(j)` (within the truncation for Bargmann–Fock).
    pub fn weight_dim(&self, j: u64) -> usize {
        self.weight_entries(j).len()
    }

    /// Basis sections spanning `S_{k,P}`.
    pub fn sections_in(&self, p: &Interval) -> Vec<&BasisEntry> {
        self.entries.iter().filter(|e| p.contains_weight(e.weight, self.k)).collect()
    }

    fn check_query(&self, z: &Point) -> Result<Vec<f64>> {
        self.geom.validate_point(z)?;
        if let Some(r) = self.radius {
            if z.norm() > r * (1.0 + 1e-12) {
                return Err(Error::Range(format!(
                    "‖z‖ = {} exceeds the basis radius {r}; rebuild with a larger radius",
                    z.norm()
                )));
            }
        }
        Ok(z.0.iter().map(|c| c.norm_sqr().ln()).collect())
    }

    fn log_term(entry: &BasisEntry, log_abs2: &[f64]) -> f64 {
        let mut t = entry.log_sq_coeff;
        for (&a, &l) in entry.alpha.iter().zip(log_abs2) {
            if a > 0 {
                t += f64::from(a) * l;
            }
        }
        t
    }

    fn block_log(&self, range: (usize, usize), log_abs2: &[f64]) -> f64 {
        let terms: Vec<f64> =
            self.entries[range.0..range.1].iter().map(|e| Self::log_term(e, log_abs2)).collect();
        log_sum_exp(&terms)
    }

    /// `log Π_{k,j}(z)` for every weight present.
    pub fn log_densities(&self, z: &Point) -> Result<Vec<(u64, f64)>> {
        let ls = self.check_query(z)?;
        let shift = f64::from(self.k) * self.geom.kahler_potential(z);
        Ok(self.blocks.iter().map(|&(j, a, b)| (j, self.block_log((a, b), &ls) - shift)).collect())
    }

    /// Off-diagonal equivariant kernels `K_{k,j}(x, y) = Σ_{wt α = j} c_α² x^α ȳ^α`
    /// without the `e^{−kφ}` factors, as `(j, log scale, value)` with kernel `value·e^{scale}`.
    pub fn equivariant_kernels(&self, x: &Point, y: &Point) -> Result<Vec<(u64, f64, Complex64)>> {
        self.check_query(x)?;
        self.check_query(y)?;
        let logs: Vec<Complex64> = x.0.iter().zip(&y.0).map(|(a, b)| (a * b.conj()).ln()).collect();
        Ok(self
            .blocks
            .iter()
            .map(|&(j, a, b)| {
                let terms: Vec<Complex64> = self.entries[a..b]
                    .iter()
                    .map(|e| {
                        let mut t = Complex64::new(e.log_sq_coeff, 0.0);
                        for (&p, l) in e.alpha.iter().zip(&logs) {
                            if p > 0 {
                                t += f64::from(p) * l;
                            }
                        }
                        t
                    })
                    .collect();
                let scale = terms.iter().map(|t| t.re).fold(f64::NEG_INFINITY, f64::max);
                if scale == f64::NEG_INFINITY {
                    return (j, scale, Complex64::new(0.0, 0.0));
                }
                let v: Complex64 = terms.iter().map(|t| (t - scale).exp()).sum();
                (j, scale, v)
            })
            .collect())
    }

    pub fn densities(&self, z: &Point) -> Result<DensityResult> {
        let logs = self.log_densities(z)?;
        let per_weight: BTreeMap<u64, LogReal> = logs.iter().map(|&(j, l)| (j, LogReal::from_log(l))).collect();
        let all: Vec<f64> = logs.iter().map(|&(_, l)| l).collect();
        Ok(DensityResult { per_weight, total: LogReal::from_log(log_sum_exp(&all)) })
    }

    pub fn equivariant_density(&self, z: &Point, j: u64) -> Result<LogReal> {
        let ls = self.check_query(z)?;
        match self.blocks.binary_search_by_key(&j, |b| b.0) {
            Ok(i) => {
                let (_, a, b) = self.blocks[i];
                let shift = f64::from(self.k) * self.geom.kahler_potential(z);
                Ok(LogReal::from_log(self.block_log((a, b), &ls) - shift))
            }
            Err(_) => Ok(LogReal::ZERO),
        }
    }

    pub fn full_density(&self, z: &Point) -> Result<LogReal> {
        Ok(self.densities(z)?.total)
    }

    /// `Π_{k,P}(z) = Σ_{j/k ∈ P} Π_{k,j}(z)`.
    pub fn partial_density(&self, z: &Point, p: &Interval) -> Result<LogReal> {
        let logs: Vec<f64> = self
            .log_densities(z)?
            .into_iter()
            .filter(|&(j, _)| p.contains_weight(j, self.k))
            .map(|(_, l)| l)
            .collect();
        Ok(LogReal::from_log(log_sum_exp(&logs)))
    }
}

/// Fourier node count that makes the trapezoid rule exact (or alias-free to
/// machine precision for the truncated Bargmann–Fock series).
pub fn fourier_nodes(geom: &ModelGeometry, k: u32, z: &Point) -> usize {
    let bmax = geom.max_weight() as usize;
    match geom.kind() {
        GeometryKind::ProjectiveSpace => 2 * k as usize * bmax + 17,
        GeometryKind::BargmannFock => 2 * bmax * bf_truncation(k, z.norm()) as usize + 17,
    }
}

/// `log` of `e^{−kφ(z)} K_k(e^{iθ}z, z)` from the closed-form full kernel.
fn log_rotated_kernel(geom: &ModelGeometry, k: u32, z: &Point, theta: f64) -> Complex64 {
    let kf = f64::from(k);
    let rot = |b: u32| Complex64::new(0.0, f64::from(b) * theta).exp();
    match geom.kind() {
        GeometryKind::BargmannFock => {
            let s: Complex64 = z
                .0
                .iter()
                .zip(geom.weights())
                .map(|(c, &b)| (rot(b) - 1.0) * c.norm_sqr())
                .sum();
            log_full_density(geom, k) + kf * s
        }
        GeometryKind::ProjectiveSpace => {
            let num: Complex64 = Complex64::new(1.0, 0.0)
                + z.0.iter().zip(geom.weights()).map(|(c, &b)| rot(b) * c.norm_sqr()).sum::<Complex64>();
            log_full_density(geom, k) + kf * (num / (1.0 + z.norm_sqr())).ln()
        }
    }
}

/// `Π_{k,j}(z)` as the j-th Fourier coefficient of the full kernel along the circle orbit.
pub fn fourier_extract(geom: &ModelGeometry, k: u32, j: u64, z: &Point) -> Result<LogReal> {
    fourier_extract_with_nodes(geom, k, j, z, fourier_nodes(geom, k, z))
}

/// Trapezoid rule with an explicit node count; aliases when `n` is too small.
pub fn fourier_extract_with_nodes(geom: &ModelGeometry, k: u32, j: u64, z: &Point, n: usize) -> Result<LogReal> {
    geom.validate_point(z)?;
    if n == 0 {
        return domain("node count must be positive");
    }
    let scale = log_full_density(geom, k);
    let mut acc = 0.0;
    let mut comp = 0.0;
    for i in 0..n {
        let theta = 2.0 * PI * i as f64 / n as f64;
        let phase = Complex64::new(0.0, -(j as f64) * theta);
        let v = (log_rotated_kernel(geom, k, z, theta) - scale + phase).exp().re;
        // Kahan summation
        let y = v - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    Ok(LogReal::from_f64(acc / n as f64).scale_exp(scale))
}

/// `|B_k(z, w)|`, the pointwise norm of the off-diagonal Bergman kernel.
pub fn offdiag_kernel_mag(geom: &ModelGeometry, k: u32, z: &Point, w: &Point) -> Result<LogReal> {
    geom.validate_point(z)?;
    geom.validate_point(w)?;
    let kf = f64::from(k);
    let base = log_full_density(geom, k);
    let log = match geom.kind() {
        GeometryKind::BargmannFock => {
            let d2: f64 = z.0.iter().zip(&w.0).map(|(a, b)| (a - b).norm_sqr()).sum();
            base - 0.5 * kf * d2
        }
        GeometryKind::ProjectiveSpace => {
            let inner = Complex64::new(1.0, 0.0) + z.0.iter().zip(&w.0).map(|(a, b)| a * b.conj()).sum::<Complex64>();
            base + kf * inner.norm().ln() - 0.5 * kf * (z.norm_sqr().ln_1p() + w.norm_sqr().ln_1p())
        }
    };
    Ok(LogReal::from_log(log))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingReport {
    pub k: u32,
    pub t: f64,
    /// Degree-≤k monomials with weight `j ≥ tk`.
    pub selected: usize,
    /// Every selected monomial has `α_1 ≥ tk`.
    pub all_vanish_to_order: bool,
    /// Every monomial with `α_1 ≥ tk` was selected.
    pub complete: bool,
}

impl VanishingReport {
    pub fn holds(&self) -> bool {
        self.all_vanish_to_order && self.complete
    }
}

/// For weights `(1, 0, …, 0)` on `ℂ^m`, compares `⊕_{j ≥ tk} V_k(j)` among
/// degree-≤k monomials with the sections vanishing to order `tk` on `{z_1 = 0}`.
pub fn verify_vanishing_order(geom: &ModelGeometry, k: u32, t: f64) -> Result<VanishingReport> {
    let w = geom.weights();
    if geom.kind() != GeometryKind::BargmannFock || w[0] != 1 || w[1..].iter().any(|&b| b != 0) {
        return domain("vanishing-order check needs Bargmann–Fock with weights (1, 0, …, 0)");
    }
    if k == 0 {
        return domain("k must be at least 1");
    }
    if multi_index_count(geom.dim(), k) > MAX_BASIS_ENTRIES as f64 {
        return Err(Error::Resource("too many monomials for the vanishing-order check".into()));
    }
    let order = Interval { lo: Bound::Included(t), hi: Bound::Unbounded };
    let (mut selected, mut sound, mut complete) = (0usize, true, true);
    for_each_multi_index(geom.dim(), k, &mut |alpha| {
        let weight: u64 = alpha.iter().zip(w).map(|(&a, &b)| u64::from(a * b)).sum();
        let by_weight = order.contains_weight(weight, k);
        let by_order = order.contains_weight(u64::from(alpha[0]), k);
        if by_weight {
            selected += 1;
            sound &= by_order;
        }
        complete &= !by_order || by_weight;
    });
    Ok(VanishingReport { k, t, selected, all_vanish_to_order: sound, complete })
}
