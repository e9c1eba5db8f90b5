//! One runner per subcommand. Each returns a table plus extra metadata and
//! never writes anything itself.

use crate::config::{Command, ExperimentConfig};
use crate::error::{usage, HResult, HarnessError};
use crate::output::Table;
use bergman_core::asymptotics::{
    predict_bulk, predict_interface, predict_offshell, predict_scaled, BulkVariant, OffShellMode, ScaledExponent,
};
use bergman_core::charsum::{interval_character, CharacterRoute};
use bergman_core::fit::fit_power_law;
use bergman_core::randzeros::{
    angular_ks_statistic, empirical_radial_measure, expected_bin_masses, ks_critical_1pct, sample_zero_sets,
};
use bergman_core::spectra::{BasisOptions, NormSource, WeightBasis};
use bergman_core::{GeometryKind, LogReal, ModelGeometry};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub meta: Value,
}

/// `(k, exact, predicted, ratio, |ratio − 1|·k^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub k: u32,
    pub exact: LogReal,
    pub predicted: LogReal,
    pub ratio: f64,
    pub scaled_error: f64,
    pub p: f64,
}

impl ConvergenceRow {
    pub fn new(k: u32, exact: LogReal, predicted: LogReal, p: f64) -> HResult<Self> {
        if exact.is_zero() || predicted.is_zero() {
            return Err(HarnessError::Numeric(format!("zero value at k = {k}; ratio undefined")));
        }
        let ratio = (exact.log_mag() - predicted.log_mag()).exp();
        let scaled_error = (ratio - 1.0).abs() * f64::from(k).powf(p);
        if !ratio.is_finite() || !scaled_error.is_finite() {
            return Err(HarnessError::Numeric(format!("non-finite ratio at k = {k}")));
        }
        Ok(ConvergenceRow { k, exact, predicted, ratio, scaled_error, p })
    }
}

/// Monomial basis able to evaluate densities up to `max_norm`.
pub fn basis_for(geom: &ModelGeometry, k: u32, max_norm: f64) -> HResult<WeightBasis> {
    let opts = BasisOptions { radius: (max_norm * 1.0001).max(1e-6), norms: NormSource::ClosedForm };
    Ok(match geom.kind() {
        GeometryKind::BargmannFock => WeightBasis::build_with(geom, k, opts)?,
        GeometryKind::ProjectiveSpace => WeightBasis::build(geom, k)?,
    })
}

pub fn run(cfg: &ExperimentConfig) -> HResult<RunOutput> {
    match cfg.command {
        Command::Density => run_density(cfg),
        Command::Bulk => run_bulk(cfg),
        Command::Interface => run_interface(cfg),
        Command::Charsum => run_charsum(cfg),
        Command::Zeros => run_zeros(cfg),
        Command::Report => usage("report is handled by the criteria module"),
    }
}

fn require_weight(k: u32, e: f64) -> HResult<u64> {
    let j = (f64::from(k) * e).round();
    if !(j >= 0.0) {
        return usage(format!("no lattice weight near kE at k = {k}"));
    }
    Ok(j as u64)
}

/// Equivariant density at `j = round(kE)`.
///
/// With `β = 0` the exact value at the configured point is compared with the
/// off-shell formula (on-shell when `H(z) = j/k`). With `β ≠ 0` the point
/// is replaced by `e^{β/√k}·z_{j/k}` and the scaled prediction is used.
pub fn run_density(cfg: &ExperimentConfig) -> HResult<RunOutput> {
    let geom = &cfg.geometry;
    let z = cfg.resolve_point()?;
    let tasks: Vec<(u32, f64)> =
        cfg.k_list.iter().flat_map(|&k| cfg.beta_list.iter().map(move |&b| (k, b))).collect();
    let rows: Vec<(u32, f64, u64, f64, ConvergenceRow)> = tasks
        .par_iter()
        .map(|&(k, beta)| -> HResult<_> {
            let j = require_weight(k, cfg.energy)?;
            let e = j as f64 / f64::from(k);
            let (q, pred) = if beta == 0.0 {
                (z.clone(), predict_offshell(geom, k, j, &z, OffShellMode::Direct)?.value)
            } else {
                let z_e = geom.level_point(&z, e)?.z_e;
                let q = geom.flow_real(&z_e, beta / f64::from(k).sqrt())?;
                (q, predict_scaled(geom, k, &z_e, beta, ScaledExponent::Half)?.value)
            };
            let basis = basis_for(geom, k, q.norm())?;
            let exact = basis.equivariant_density(&q, j)?;
            let p = if beta == 0.0 { 1.0 } else { 0.5 };
            Ok((k, beta, j, geom.hamiltonian(&q), ConvergenceRow::new(k, exact, pred, p)?))
        })
        .collect::<HResult<_>>()?;
    let mut table = Table::new(&["k", "beta", "j", "h", "exact", "predicted", "ratio", "scaled_error", "p"]);
    for (k, beta, j, h, r) in &rows {
        table.push(vec![
            (*k).into(),
            (*beta).into(),
            (*j).into(),
            (*h).into(),
            r.exact.into(),
            r.predicted.into(),
            r.ratio.into(),
            r.scaled_error.into(),
            r.p.into(),
        ]);
    }
    Ok(RunOutput { table, meta: json!({ "point": z }) })
}

/// Partial density `Π_{k,P}(z)` against the bulk formulas for `[0, E)`.
pub fn run_bulk(cfg: &ExperimentConfig) -> HResult<RunOutput> {
    let geom = &cfg.geometry;
    let z = cfg.resolve_point()?;
    let h = geom.hamiltonian(&z);
    let rows: Vec<(u32, ConvergenceRow, LogReal, &'static str)> = cfg
        .k_list
        .par_iter()
        .map(|&k| -> HResult<_> {
            let basis = basis_for(geom, k, z.norm())?;
            let exact = basis.partial_density(&z, &cfg.interval)?;
            let std = predict_bulk(geom, k, cfg.energy, &z, BulkVariant::Standard)?;
            let lat = predict_bulk(geom, k, cfg.energy, &z, BulkVariant::Lattice)?;
            let regime = if h < cfg.energy { "allowed" } else { "forbidden" };
            Ok((k, ConvergenceRow::new(k, exact, std.value, 1.0)?, lat.value, regime))
        })
        .collect::<HResult<_>>()?;
    let mut table =
        Table::new(&["k", "h", "regime", "exact", "predicted", "predicted_lattice", "ratio", "scaled_error", "p"]);
    for (k, r, lat, regime) in &rows {
        table.push(vec![
            (*k).into(),
            h.into(),
            (*regime).into(),
            r.exact.into(),
            r.predicted.into(),
            (*lat).into(),
            r.ratio.into(),
            r.scaled_error.into(),
            r.p.into(),
        ]);
    }
    Ok(RunOutput { table, meta: json!({ "point": z, "h": h }) })
}

/// `k^{−m} Π_{k,P}(e^{β/√k}·z_E)` against both Erf forms, with a per-k
/// supremum and a fitted decay exponent in the metadata.
pub fn run_interface(cfg: &ExperimentConfig) -> HResult<RunOutput> {
    let geom = &cfg.geometry;
    let z = cfg.resolve_point()?;
    let z_e = geom.level_point(&z, cfg.energy)?.z_e;
    let m = geom.dim() as f64;
    let tasks: Vec<(u32, f64)> =
        cfg.k_list.iter().flat_map(|&k| cfg.beta_list.iter().map(move |&b| (k, b))).collect();
    let rows: Vec<(u32, f64, f64, f64, f64)> = tasks
        .par_iter()
        .map(|&(k, beta)| -> HResult<_> {
            let pred = predict_interface(geom, k, cfg.energy, &z_e, beta)?;
            let basis = basis_for(geom, k, pred.z_k.norm())?;
            let km = m * f64::from(k).ln();
            let exact = basis.partial_density(&pred.z_k, &cfg.interval)?.scale_exp(-km).to_f64();
            let from_beta = pred.from_beta.value.scale_exp(-km).to_f64();
            let from_point = pred.from_point.value.scale_exp(-km).to_f64();
            Ok((k, beta, exact, from_beta, from_point))
        })
        .collect::<HResult<_>>()?;
    let mut table = Table::new(&["k", "beta", "exact", "erf_beta", "erf_point", "diff_beta", "diff_point"]);
    let mut sup: Vec<(u32, f64)> = Vec::new();
    for &(k, beta, exact, fb, fp) in &rows {
        table.push(vec![
            k.into(),
            beta.into(),
            exact.into(),
            fb.into(),
            fp.into(),
            (exact - fb).abs().into(),
            (exact - fp).abs().into(),
        ]);
        match sup.last_mut() {
            Some((kk, s)) if *kk == k => *s = s.max((exact - fb).abs()),
            _ => sup.push((k, (exact - fb).abs())),
        }
    }
    let ks: Vec<f64> = sup.iter().map(|s| f64::from(s.0)).collect();
    let errs: Vec<f64> = sup.iter().map(|s| s.1).collect();
    let fit = if ks.len() >= 2 { fit_power_law(&ks, &errs) } else { None };
    Ok(RunOutput {
        table,
        meta: json!({
            "z_e": z_e,
            "sup_error": sup.iter().map(|(k, s)| json!({"k": k, "sup": s})).collect::<Vec<_>>(),
            "fitted_exponent": fit.map(|f| f.exponent),
        }),
    })
}

/// The interval character for `[0, E)` by all three routes.
pub fn run_charsum(cfg: &ExperimentConfig) -> HResult<RunOutput> {
    let w = cfg.w;
    let mut table = Table::new(&[
        "k", "top_weight", "direct_re", "direct_im", "geometric_re", "geometric_im", "em_re", "em_im",
        "max_rel_diff",
    ]);
    for &k in &cfg.k_list {
        let d = interval_character(k, cfg.energy, w, CharacterRoute::DirectSum)?.value;
        let g = interval_character(k, cfg.energy, w, CharacterRoute::GeometricClosedForm)?.value;
        let e = interval_character(k, cfg.energy, w, CharacterRoute::EulerMacLaurin)?.value;
        let top = bergman_core::asymptotics::lattice_ek(k, cfg.energy)?.j;
        // relative to the sum of moduli, which stays meaningful when the sum cancels
        let scale: f64 = (0..=top).map(|j| (w.re * j as f64).exp()).sum();
        let diff = [(d - g).norm(), (d - e).norm(), (g - e).norm()].into_iter().fold(0.0, f64::max) / scale;
        table.push(vec![
            k.into(),
            top.into(),
            d.re.into(),
            d.im.into(),
            g.re.into(),
            g.im.into(),
            e.re.into(),
            e.im.into(),
            diff.into(),
        ]);
    }
    Ok(RunOutput { table, meta: json!({ "w": [w.re, w.im] }) })
}

/// Zeros of Gaussian random sections of `V_{k,P}` on `ℂP¹`: radial histogram
/// in `H` against the exact expectation, total count and angular KS.
pub fn run_zeros(cfg: &ExperimentConfig) -> HResult<RunOutput> {
    if cfg.geometry != ModelGeometry::cp1() {
        return usage("zeros needs --geometry cpm --m 1 with weight 1");
    }
    let edges: Vec<f64> = (0..=cfg.bins).map(|i| i as f64 / cfg.bins as f64).collect();
    let mut table = Table::new(&["k", "h_lo", "h_hi", "mean", "std_err", "expected", "z_score"]);
    let mut summaries = Vec::new();
    for &k in &cfg.k_list {
        let basis = WeightBasis::build(&cfg.geometry, k)?;
        let sets = sample_zero_sets(&basis, &cfg.interval, cfg.seed, cfg.samples)?;
        let hist = empirical_radial_measure(&sets, k, &edges)?;
        let expected = expected_bin_masses(&basis, &cfg.interval, &edges)?;
        for b in 0..cfg.bins {
            let se = bin_sigma(hist.std_err[b], expected[b], k, cfg.samples);
            table.push(vec![
                k.into(),
                edges[b].into(),
                edges[b + 1].into(),
                hist.mean[b].into(),
                hist.std_err[b].into(),
                expected[b].into(),
                ((hist.mean[b] - expected[b]) / se).into(),
            ]);
        }
        let (d, n) = angular_ks_statistic(&sets);
        let degree = sets.first().map_or(0, |s| s.degree);
        summaries.push(json!({
            "k": k,
            "total": hist.total,
            "degree": degree,
            "ks_statistic": d,
            "ks_points": n,
            "ks_critical_1pct": ks_critical_1pct(n),
            "max_residual": sets.iter().map(|s| s.max_residual).fold(0.0, f64::max),
        }));
    }
    Ok(RunOutput { table, meta: json!({ "samples": cfg.samples, "summary": summaries }) })
}

/// Standard error used for bin z-scores. Bins with no observed zeros have an
/// empirical error of zero; there the Poisson scale `√(expected·k/N)/k` is used.
pub fn bin_sigma(empirical: f64, expected: f64, k: u32, samples: usize) -> f64 {
    let kf = f64::from(k);
    let poisson = (expected.max(0.0) * kf / samples as f64).sqrt() / kf;
    empirical.max(poisson).max(f64::MIN_POSITIVE)
}
