//! Experiment configuration: a `key=value` file merged with command-line
//! overrides, validated in one pass before any computation starts.

use crate::error::{usage, HResult};
use bergman_core::spectra::{Bound, Interval};
use bergman_core::{GeometryKind, ModelGeometry, Point};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const MAX_K_BF: u32 = 5000;
pub const MAX_K_CP: u32 = 2000;

/// Keys accepted in config files and on the command line.
pub const KEYS: &[&str] = &[
    "geometry", "m", "weights", "k", "E", "P", "beta", "point", "seed", "samples", "bins", "w", "out",
    "format", "tolerance", "no-timestamp",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Density,
    Bulk,
    Interface,
    Charsum,
    Zeros,
    Report,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density => "density",
            Command::Bulk => "bulk",
            Command::Interface => "interface",
            Command::Charsum => "charsum",
            Command::Zeros => "zeros",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// How the query point is given.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PointSpec {
    /// Explicit affine coordinates.
    Coords(Point),
    /// The point on the orbit of `(1,…,1)` with the given energy.
    Level(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub geometry: ModelGeometry,
    pub k_list: Vec<u32>,
    pub energy: f64,
    pub beta_list: Vec<f64>,
    pub point: PointSpec,
    pub interval: Interval,
    pub seed: u64,
    pub samples: usize,
    pub bins: usize,
    pub w: Complex64,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub timestamp: bool,
}

/// Reads `key=value` lines. Blank lines and `#` comments are skipped; keys
/// must be in [`KEYS`].
pub fn parse_config_text(text: &str) -> HResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key=value, got {raw:?}", n + 1));
        };
        let key = key.trim().trim_start_matches("--");
        if !KEYS.contains(&key) {
            return usage(format!("config line {}: unknown key {key:?}", n + 1));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return usage(format!("config line {}: duplicate key {key:?}", n + 1));
        }
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> HResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .or_else(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Overlays `cli` on `file`; command-line values win.
pub fn merge(mut file: BTreeMap<String, String>, cli: BTreeMap<String, String>) -> BTreeMap<String, String> {
    file.extend(cli);
    file
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> HResult<T> {
    s.trim().parse().or_else(|_| usage(format!("--{key}: cannot parse {s:?}")))
}

fn parse_list<T: FromStr>(key: &str, s: &str) -> HResult<Vec<T>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_num(key, t)).collect()
}

/// `a..b:step` (inclusive) or a comma-separated list.
pub fn parse_range(key: &str, s: &str) -> HResult<Vec<f64>> {
    if let Some((span, step)) = s.split_once(':') {
        let Some((a, b)) = span.split_once("..") else {
            return usage(format!("--{key}: expected a..b:step, got {s:?}"));
        };
        let (a, b, step): (f64, f64, f64) = (parse_num(key, a)?, parse_num(key, b)?, parse_num(key, step)?);
        if !(step > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
            return usage(format!("--{key}: bad range {s:?}"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        if n > 100_000 {
            return usage(format!("--{key}: range {s:?} has too many points"));
        }
        Ok((0..=n).map(|i| a + i as f64 * step).collect())
    } else {
        let v: Vec<f64> = parse_list(key, s)?;
        if v.iter().any(|x| !x.is_finite()) {
            return usage(format!("--{key}: values must be finite"));
        }
        Ok(v)
    }
}

fn parse_bound_value(s: &str) -> HResult<Option<f64>> {
    match s.trim() {
        "-inf" | "inf" | "+inf" => Ok(None),
        t => match t.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => usage(format!("--P: bad endpoint {t:?}")),
        },
    }
}

/// `[a,b)`, `(a,b]`, `(-inf,b]`, … or `all`.
pub fn parse_interval(s: &str) -> HResult<Interval> {
    let s = s.trim();
    if s == "all" {
        return Ok(Interval::all());
    }
    let bad = || usage(format!("--P: expected an interval like [0,1), got {s:?}"));
    if s.len() < 5 || !s.is_char_boundary(1) || !s.is_char_boundary(s.len() - 1) {
        return bad();
    }
    let (open, body, close) = (&s[..1], &s[1..s.len() - 1], &s[s.len() - 1..]);
    let Some((a, b)) = body.split_once(',') else { return bad() };
    let lo = match (open, parse_bound_value(a)?) {
        (_, None) => Bound::Unbounded,
        ("[", Some(x)) => Bound::Included(x),
        ("(", Some(x)) => Bound::Excluded(x),
        _ => return bad(),
    };
    let hi = match (close, parse_bound_value(b)?) {
        (_, None) => Bound::Unbounded,
        ("]", Some(x)) => Bound::Included(x),
        (")", Some(x)) => Bound::Excluded(x),
        _ => return bad(),
    };
    if let (Bound::Included(x) | Bound::Excluded(x), Bound::Included(y) | Bound::Excluded(y)) = (lo, hi) {
        if x > y {
            return usage(format!("--P: empty interval {s:?}"));
        }
    }
    Ok(Interval { lo, hi })
}

/// `ones`, `h=<energy>`, or comma-separated complex coordinates (`0.5`, `0.3+0.4i`).
pub fn parse_point(s: &str) -> HResult<Option<PointSpec>> {
    let s = s.trim();
    if s == "ones" {
        return Ok(None);
    }
    if let Some(h) = s.strip_prefix("h=") {
        let h: f64 = parse_num("point", h)?;
        return Ok(Some(PointSpec::Level(h)));
    }
    let coords = s
        .split(',')
        .map(|t| Complex64::from_str(t.trim()).or_else(|_| usage(format!("--point: cannot parse {t:?}"))))
        .collect::<HResult<Vec<_>>>()?;
    if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return usage("--point: coordinates must be finite");
    }
    Ok(Some(PointSpec::Coords(Point(coords))))
}

impl ExperimentConfig {
    pub fn from_map(command: Command, map: &BTreeMap<String, String>) -> HResult<Self> {
        for key in map.keys() {
            if !KEYS.contains(&key.as_str()) {
                return usage(format!("unknown option {key:?}"));
            }
        }
        let get = |k: &str| map.get(k).map(String::as_str);

        let kind = match get("geometry").unwrap_or("bf") {
            "bf" => GeometryKind::BargmannFock,
            "cpm" | "cp" => GeometryKind::ProjectiveSpace,
            other => return usage(format!("--geometry: expected bf or cpm, got {other:?}")),
        };
        let m: Option<usize> = get("m").map(|s| parse_num("m", s)).transpose()?;
        let weights: Vec<u32> = match (get("weights"), m) {
            (Some(w), m) => {
                let w: Vec<u32> = parse_list("weights", w)?;
                if m.is_some_and(|m| m != w.len()) {
                    return usage(format!("--m {} disagrees with {} weights", m.unwrap(), w.len()));
                }
                w
            }
            (None, Some(m)) => vec![1; m],
            (None, None) => vec![1],
        };
        let geometry = ModelGeometry::new(kind, weights).or_else(|e| usage(e.to_string()))?;
        let cap = match kind {
            GeometryKind::BargmannFock => MAX_K_BF,
            GeometryKind::ProjectiveSpace => MAX_K_CP,
        };

        let mut k_list: Vec<u32> = parse_list("k", get("k").unwrap_or("100,400,1600"))?;
        if k_list.is_empty() {
            return usage("--k: empty list");
        }
        k_list.sort_unstable();
        k_list.dedup();
        if k_list[0] == 0 {
            return usage("--k: k must be positive");
        }
        if let Some(&big) = k_list.iter().find(|&&k| k > cap) {
            return usage(format!("resource limit: k={big} exceeds the cap of {cap} for this geometry"));
        }

        let default_e = match kind {
            GeometryKind::BargmannFock => "1",
            GeometryKind::ProjectiveSpace => "0.5",
        };
        let energy: f64 = parse_num("E", get("E").unwrap_or(default_e))?;
        let (hmin, hmax) = geometry.hamiltonian_range();
        if !energy.is_finite() || energy < hmin || energy > hmax {
            return usage(format!("--E: {energy} lies outside the moment image [{hmin}, {hmax}]"));
        }

        let beta_list = parse_range("beta", get("beta").unwrap_or("0"))?;
        if beta_list.is_empty() {
            return usage("--beta: empty list");
        }

        let point = match get("point").map(parse_point).transpose()?.flatten() {
            Some(p) => p,
            None => PointSpec::Coords(Point::from_reals(&vec![1.0; geometry.dim()])),
        };
        match &point {
            PointSpec::Coords(p) => {
                if p.0.len() != geometry.dim() {
                    return usage(format!("--point: expected {} coordinates, got {}", geometry.dim(), p.0.len()));
                }
                geometry.validate_point(p).or_else(|e| usage(e.to_string()))?;
            }
            PointSpec::Level(h) => {
                if !(*h > hmin && *h < hmax) {
                    return usage(format!("--point: energy {h} must lie strictly inside ({hmin}, {hmax})"));
                }
            }
        }

        let interval = match get("P") {
            Some(s) => parse_interval(s)?,
            None => match command {
                Command::Interface => Interval::at_most(energy),
                _ => Interval::below(energy),
            },
        };

        let seed: u64 = parse_num("seed", get("seed").unwrap_or("42"))?;
        let samples: usize = parse_num("samples", get("samples").unwrap_or("500"))?;
        if samples == 0 || samples > 1_000_000 {
            return usage("--samples: must be between 1 and 1000000");
        }
        let bins: usize = parse_num("bins", get("bins").unwrap_or("20"))?;
        if bins == 0 || bins > 10_000 {
            return usage("--bins: must be between 1 and 10000");
        }
        let w = Complex64::from_str(get("w").unwrap_or("0.3").trim()).or_else(|_| usage("--w: cannot parse"))?;
        if !w.re.is_finite() || !w.im.is_finite() {
            return usage("--w: must be finite");
        }
        let tolerance: Option<f64> = get("tolerance").map(|s| parse_num("tolerance", s)).transpose()?;
        if tolerance.is_some_and(|t| !(t > 0.0)) {
            return usage("--tolerance: must be positive");
        }
        let format = match get("format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return usage(format!("--format: expected csv or json, got {other:?}")),
        };
        let timestamp = match get("no-timestamp") {
            None | Some("false") => true,
            Some("true") | Some("") => false,
            Some(other) => return usage(format!("no-timestamp: expected true or false, got {other:?}")),
        };

        Ok(ExperimentConfig {
            command,
            geometry,
            k_list,
            energy,
            beta_list,
            point,
            interval,
            seed,
            samples,
            bins,
            w,
            tolerance,
            out: get("out").map(PathBuf::from),
            format,
            timestamp,
        })
    }

    /// The query point, resolving `h=` specs on the orbit of `(1,…,1)`.
    pub fn resolve_point(&self) -> HResult<Point> {
        match &self.point {
            PointSpec::Coords(p) => Ok(p.clone()),
            PointSpec::Level(h) => {
                let ones = Point::from_reals(&vec![1.0; self.geometry.dim()]);
                Ok(self.geometry.level_point(&ones, *h)?.z_e)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(&str, &str)]) -> HResult<ExperimentConfig> {
        let map = pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        ExperimentConfig::from_map(Command::Density, &map)
    }

    #[test]
    fn defaults() {
        let c = cfg(&[]).unwrap();
        assert_eq!(c.k_list, vec![100, 400, 1600]);
        assert_eq!(c.energy, 1.0);
        assert_eq!(c.geometry, ModelGeometry::bf1());
        assert_eq!(c.format, Format::Csv);
        assert!(c.timestamp);
    }

    #[test]
    fn beta_range_is_inclusive() {
        let b = parse_range("beta", "-2..2:0.5").unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b[0], -2.0);
        assert_eq!(b[8], 2.0);
        assert_eq!(parse_range("beta", "0.5,1").unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn intervals() {
        assert_eq!(parse_interval("[0,1)").unwrap(), Interval::half_open(0.0, 1.0));
        assert_eq!(parse_interval("(-inf,0.5]").unwrap(), Interval::at_most(0.5));
        assert_eq!(parse_interval("all").unwrap(), Interval::all());
        assert!(parse_interval("[1,0)").is_err());
        assert!(parse_interval("0,1").is_err());
    }

    #[test]
    fn points() {
        assert_eq!(parse_point("h=0.7").unwrap(), Some(PointSpec::Level(0.7)));
        let Some(PointSpec::Coords(p)) = parse_point("0.3+0.4i,1").unwrap() else { panic!() };
        assert_eq!(p.0[0], Complex64::new(0.3, 0.4));
        assert!(parse_point("x").is_err());
    }

    #[test]
    fn k_cap_is_enforced() {
        assert!(cfg(&[("k", "5000")]).is_ok());
        let e = cfg(&[("k", "5001")]).unwrap_err();
        assert!(e.to_string().contains("resource limit"));
        assert!(cfg(&[("geometry", "cpm"), ("k", "2001")]).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(cfg(&[("geometry", "s2")]).is_err());
        assert!(cfg(&[("m", "2"), ("weights", "1")]).is_err());
        assert!(cfg(&[("geometry", "cpm"), ("E", "1.5")]).is_err());
        assert!(cfg(&[("point", "1,2")]).is_err());
        assert!(cfg(&[("format", "xml")]).is_err());
        assert!(cfg(&[("bogus", "1")]).is_err());
    }

    #[test]
    fn config_text_and_cli_precedence() {
        let file = parse_config_text("# sweep\nk = 50,100\nE=0.5\n\ngeometry=cpm\n").unwrap();
        let cli: BTreeMap<String, String> = [("k".to_string(), "64".to_string())].into();
        let merged = merge(file, cli);
        let c = ExperimentConfig::from_map(Command::Bulk, &merged).unwrap();
        assert_eq!(c.k_list, vec![64]);
        assert_eq!(c.energy, 0.5);
        assert_eq!(c.geometry, ModelGeometry::cp1());
        assert!(parse_config_text("k 50").is_err());
        assert!(parse_config_text("nope=1").is_err());
    }
}
