use bergman_harness::config::{merge, read_config_file, Command, ExperimentConfig, Format};
use bergman_harness::criteria::{run_criterion, CriterionOutcome};
use bergman_harness::error::{usage, HResult, HarnessError, EXIT_CRITERIA, EXIT_OK, EXIT_USAGE};
use bergman_harness::output::{emit, metadata, to_sorted_json, Table};
use bergman_harness::runners::run;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;

/// Exact Bergman densities and their asymptotic laws on model toric geometries.
#[derive(Parser)]
#[command(name = "bergman", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Equivariant density at j = round(kE) against the on/off-shell and scaled formulas.
    Density(Common),
    /// Partial density for P against the bulk formulas.
    Bulk(Common),
    /// Partial density near the interface against the Erf law.
    Interface(Common),
    /// Interval character by the direct, geometric and Euler-MacLaurin routes.
    Charsum(Common),
    /// Zeros of Gaussian random sections on CP1.
    Zeros(Common),
    /// Run the acceptance criteria.
    Report {
        #[command(flatten)]
        common: Common,
        /// Comma-separated criterion numbers (default: all).
        #[arg(long)]
        criteria: Option<String>,
    },
}

#[derive(Args, Default)]
struct Common {
    /// key=value file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// bf or cpm.
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    m: Option<String>,
    /// Comma-separated circle-action weights.
    #[arg(long)]
    weights: Option<String>,
    /// Comma-separated list of k.
    #[arg(long)]
    k: Option<String>,
    #[arg(long = "E", allow_hyphen_values = true)]
    energy: Option<String>,
    /// Interval such as [0,1) or (-inf,0.5].
    #[arg(long = "P", allow_hyphen_values = true)]
    interval: Option<String>,
    /// a..b:step or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,
    /// ones, h=<energy>, or comma-separated complex coordinates.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Number of H bins for zeros.
    #[arg(long)]
    bins: Option<String>,
    /// Complex exponent for charsum, e.g. 0.3 or 0.1+2i.
    #[arg(long, allow_hyphen_values = true)]
    w: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    no_timestamp: bool,
}

impl Common {
    fn to_map(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("geometry", &self.geometry),
            ("m", &self.m),
            ("weights", &self.weights),
            ("k", &self.k),
            ("E", &self.energy),
            ("P", &self.interval),
            ("beta", &self.beta),
            ("point", &self.point),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("bins", &self.bins),
            ("w", &self.w),
            ("out", &self.out),
            ("format", &self.format),
            ("tolerance", &self.tolerance),
        ];
        let mut map: BTreeMap<String, String> =
            pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect();
        if self.no_timestamp {
            map.insert("no-timestamp".into(), "true".into());
        }
        map
    }

    fn resolve(&self, command: Command) -> HResult<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        ExperimentConfig::from_map(command, &merge(file, self.to_map()))
    }
}

fn configure_threads() -> HResult<()> {
    let Ok(v) = std::env::var("BERGMAN_THREADS") else { return Ok(()) };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return usage(format!("BERGMAN_THREADS must be a positive integer, got {v:?}")),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Usage(format!("cannot configure thread pool: {e}")))
}

fn parse_ids(s: Option<&str>) -> HResult<Vec<u8>> {
    let Some(s) = s else { return Ok((1..=10).collect()) };
    s.split(',')
        .map(|t| match t.trim().parse::<u8>() {
            Ok(i) if (1..=10).contains(&i) => Ok(i),
            _ => usage(format!("--criteria: expected numbers 1 to 10, got {t:?}")),
        })
        .collect()
}

fn report(cfg: &ExperimentConfig, ids: &[u8]) -> HResult<i32> {
    let outcomes: Vec<CriterionOutcome> = ids.iter().filter_map(|&i| run_criterion(i)).collect();
    for o in &outcomes {
        eprintln!("{}", o.detail());
    }
    let all = outcomes.iter().all(CriterionOutcome::passed);
    match cfg.format {
        Format::Json => {
            let doc = json!({
                "meta": metadata(cfg, json!({}))?,
                "criteria": serde_json::to_value(&outcomes)?,
                "all_passed": all,
            });
            let text = to_sorted_json(&doc)?;
            match &cfg.out {
                Some(path) => std::fs::write(path, text)?,
                None => print!("{text}"),
            }
        }
        Format::Csv => {
            let mut table = Table::new(&["criterion", "title", "status", "check", "value", "condition", "passed"]);
            for o in &outcomes {
                for c in &o.checks {
                    table.push(vec![
                        u32::from(o.id).into(),
                        o.title.into(),
                        o.status().into(),
                        c.label.clone().into(),
                        c.value.into(),
                        c.condition.clone().into(),
                        c.passed.into(),
                    ]);
                }
            }
            emit(cfg, &table, json!({ "all_passed": all }))?;
        }
    }
    Ok(if all { EXIT_OK } else { EXIT_CRITERIA })
}

fn execute(cli: Cli) -> HResult<i32> {
    configure_threads()?;
    let (command, common, ids) = match &cli.command {
        Sub::Density(c) => (Command::Density, c, None),
        Sub::Bulk(c) => (Command::Bulk, c, None),
        Sub::Interface(c) => (Command::Interface, c, None),
        Sub::Charsum(c) => (Command::Charsum, c, None),
        Sub::Zeros(c) => (Command::Zeros, c, None),
        Sub::Report { common, criteria } => (Command::Report, common, Some(parse_ids(criteria.as_deref())?)),
    };
    let cfg = common.resolve(command)?;
    if let Some(ids) = ids {
        return report(&cfg, &ids);
    }
    let out = run(&cfg)?;
    emit(&cfg, &out.table, out.meta)?;
    Ok(EXIT_OK)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bergman: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
