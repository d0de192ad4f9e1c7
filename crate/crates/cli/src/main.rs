use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use xy_current::current::amplitudes_up_to;
use xy_current::rational::format_rational;
use xy_current::series::correlation_series;
use xy_current::{
    coefficient_identity_check, count_one_color, count_two_color, ginibre_gap_counts, ginibre_gap_series,
    mc_correlation, quadrature_correlation, verify_bijection, CountMethod, EdgeAmplitude, Gauge, Graph, SourceFunction,
};

#[derive(Parser)]
#[command(name = "xy-current", version, about = "Random-current and multigraph verification runs for the XY model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Graph file: {"vertices": [...], "edges": [{"u", "v", "J"}]}
    #[arg(long)]
    graph: PathBuf,
    /// Write JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Refuse runs whose estimated work exceeds this
    #[arg(long, default_value_t = 100_000_000)]
    max_work: u128,
    /// Run even above --max-work
    #[arg(long)]
    force: bool,
    /// Omit the meta block (version, timestamp)
    #[arg(long)]
    no_meta: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum Method {
    Direct,
    Multinomial,
}

impl From<Method> for CountMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Direct => CountMethod::Direct,
            Method::Multinomial => CountMethod::Multinomial,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// One-color counts of --phi, or two-color counts of (--phi, --psi), for every N with ΣN ≤ --sum-cap
    Count {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        sum_cap: u32,
        #[arg(long, value_enum, default_value = "multinomial")]
        method: Method,
    },
    /// Exhaustive split/merge check for every N with ΣN ≤ --sum-cap
    VerifyBijection {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sum_cap: u32,
    },
    /// Per-amplitude gap against the perfect square
    CheckGoal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        sum_cap: u32,
    },
    /// Truncated series for <σ^φ>
    Correlate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        degree_cap: u32,
    },
    /// Truncated <σ^{φ+ψ}> + <σ^{φ−ψ}> − 2<σ^φ><σ^ψ> numerator, checked nonnegative
    CheckGinibre {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        degree_cap: u32,
    },
    /// Quadrature (--grid) or Monte Carlo (--samples) estimate of <σ^φ>
    Oracle {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Truncated series against an oracle
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long)]
        degree_cap: u32,
        /// Allowed |series − quadrature|; Monte Carlo uses 3 standard errors
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Current-pair sums against two-color counts, amplitude by amplitude
    CoeffCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        phi: String,
        #[arg(long)]
        psi: String,
        #[arg(long)]
        degree_cap: u32,
    },
}

#[derive(Args, Clone)]
struct OracleArgs {
    #[arg(long)]
    phi: String,
    #[arg(long, conflicts_with = "samples")]
    grid: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Integrate over every angle instead of pinning vertex 0
    #[arg(long)]
    no_gauge: bool,
}

/// Exit status 2: bad input or a refused budget.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

struct Outcome {
    params: Value,
    result: Value,
    passed: bool,
    table: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Count { common, .. }
        | Command::VerifyBijection { common, .. }
        | Command::CheckGoal { common, .. }
        | Command::Correlate { common, .. }
        | Command::CheckGinibre { common, .. }
        | Command::Oracle { common, .. }
        | Command::Compare { common, .. }
        | Command::CoeffCheck { common, .. } => common.clone(),
    };
    match run(&cli.command, &common) {
        Ok(passed) => ExitCode::from(if passed { 0 } else { 1 }),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: &Command, common: &Common) -> Result<bool, InputError> {
    if common.threads == 0 {
        return Err(InputError("--threads must be at least 1".into()));
    }
    let text = fs::read_to_string(&common.graph).map_err(|e| format!("{}: {e}", common.graph.display()))?;
    let graph = Graph::from_json(&text).map_err(|e| format!("{}: {e}", common.graph.display()))?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(common.threads).build()?;
    let outcome = pool.install(|| execute(command, common, &graph))?;

    for line in &outcome.table {
        eprintln!("{line}");
    }
    let mut doc = json!({
        "command": command_name(command),
        "graph": graph.to_spec(),
        "params": outcome.params,
        "passed": outcome.passed,
        "result": outcome.result,
    });
    if !common.no_meta {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        doc["meta"] = json!({ "version": env!("CARGO_PKG_VERSION"), "timestamp": ts, "threads": common.threads });
    }
    let body = serde_json::to_string_pretty(&doc)? + "\n";
    match &common.out {
        Some(path) => fs::write(path, body).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(outcome.passed)
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Count { .. } => "count",
        Command::VerifyBijection { .. } => "verify-bijection",
        Command::CheckGoal { .. } => "check-goal",
        Command::Correlate { .. } => "correlate",
        Command::CheckGinibre { .. } => "check-ginibre",
        Command::Oracle { .. } => "oracle",
        Command::Compare { .. } => "compare",
        Command::CoeffCheck { .. } => "coeff-check",
    }
}

fn budget(common: &Common, work: u128) -> Result<(), InputError> {
    if work > common.max_work && !common.force {
        return Err(InputError(format!(
            "estimated work {work} exceeds --max-work {}; rerun with --force or a larger budget",
            common.max_work
        )));
    }
    Ok(())
}

fn source(graph: &Graph, text: Option<&str>) -> Result<SourceFunction, InputError> {
    match text {
        Some(t) => Ok(graph.parse_source(t)?),
        None => Ok(SourceFunction::zeros(graph.vertex_count())),
    }
}

/// Σ over `N` of `f(N)`, saturating.
fn sweep_work(graph: &Graph, cap: u32, f: impl Fn(&EdgeAmplitude) -> u128) -> u128 {
    amplitudes_up_to(graph.edge_count(), cap)
        .iter()
        .fold(0u128, |acc, n| acc.saturating_add(f(n)))
}

fn pow4(n: &EdgeAmplitude) -> u128 {
    4u128.saturating_pow(n.total())
}

/// Currents per amplitude: Π (N_e + 1).
fn currents(n: &EdgeAmplitude) -> u128 {
    n.values().iter().fold(1u128, |acc, &k| acc.saturating_mul(u128::from(k) + 1))
}

/// Current pairs per amplitude: Π C(N_e + 3, 3).
fn current_pairs(n: &EdgeAmplitude) -> u128 {
    n.values().iter().fold(1u128, |acc, &k| {
        let k = u128::from(k);
        acc.saturating_mul((k + 1) * (k + 2) * (k + 3) / 6)
    })
}

fn gauge(no_gauge: bool) -> Gauge {
    if no_gauge {
        Gauge::Full
    } else {
        Gauge::Fixed
    }
}

fn oracle_estimate(
    graph: &Graph,
    common: &Common,
    args: &OracleArgs,
    phi: &SourceFunction,
) -> Result<(Value, f64, Option<f64>), InputError> {
    match (args.grid, args.samples) {
        (Some(k), None) => {
            budget(common, xy_current::oracle::quadrature_work(graph, k, gauge(args.no_gauge)))?;
            let value = quadrature_correlation(graph, phi, k, gauge(args.no_gauge))?;
            let result = json!({ "method": "quadrature", "grid": k, "gauge_fixed": !args.no_gauge, "value": value });
            Ok((result, value, None))
        }
        (None, Some(samples)) => {
            let per_sample = graph.edge_count().max(1) as u128;
            budget(common, u128::from(samples).saturating_mul(per_sample))?;
            let est = mc_correlation(graph, phi, samples, args.seed)?;
            let result = json!({
                "method": "monte_carlo",
                "samples": est.samples,
                "seed": est.seed,
                "value": est.estimate,
                "stderr": est.stderr,
            });
            Ok((result, est.estimate, Some(est.stderr)))
        }
        _ => Err(InputError("give exactly one of --grid or --samples".into())),
    }
}

fn execute(command: &Command, common: &Common, graph: &Graph) -> Result<Outcome, InputError> {
    match command {
        Command::Count { phi, psi, sum_cap, method, .. } => {
            let f = source(graph, phi.as_deref())?;
            let method = CountMethod::from(*method);
            let two = psi.is_some();
            let g = source(graph, psi.as_deref())?;
            budget(
                common,
                match (two, method) {
                    (true, CountMethod::Direct) => sweep_work(graph, *sum_cap, pow4),
                    (true, CountMethod::Multinomial) => sweep_work(graph, *sum_cap, current_pairs),
                    (false, _) => sweep_work(graph, *sum_cap, currents),
                },
            )?;
            let mut rows = Vec::new();
            let mut table = vec![format!("{:<16} {:>24}", "N", "count")];
            for n in amplitudes_up_to(graph.edge_count(), *sum_cap) {
                let count = if two {
                    count_two_color(graph, &n, &f, &g, method)?
                } else {
                    count_one_color(graph, &n, &f)?
                };
                table.push(format!("{:<16} {:>24}", format!("{:?}", n.values()), count));
                rows.push(json!({ "N": n, "count": count.to_string() }));
            }
            let mut params = json!({ "phi": f, "sum_cap": sum_cap, "colors": if two { 2 } else { 1 } });
            if two {
                params["psi"] = serde_json::to_value(&g)?;
                params["method"] = json!(match method {
                    CountMethod::Direct => "direct",
                    CountMethod::Multinomial => "multinomial",
                });
            }
            Ok(Outcome { params, result: json!({ "per_N": rows }), passed: true, table })
        }

        Command::VerifyBijection { sum_cap, .. } => {
            if graph.edge_count() > 0 && *sum_cap > 15 {
                return Err(InputError("--sum-cap above 15 is beyond exhaustive reach".into()));
            }
            budget(common, sweep_work(graph, *sum_cap, |n| pow4(n).saturating_mul(2)))?;
            let mut reports = Vec::new();
            let mut table = vec![format!("{:<16} {:>12} {:>8} {:>9}", "N", "checked", "classes", "failures")];
            let mut passed = true;
            for n in amplitudes_up_to(graph.edge_count(), *sum_cap) {
                let r = verify_bijection(graph, &n)?;
                passed &= r.passed();
                table.push(format!(
                    "{:<16} {:>12} {:>8} {:>9}",
                    format!("{:?}", n.values()),
                    r.checked,
                    r.classes,
                    r.failures.len()
                ));
                reports.push(serde_json::to_value(&r)?);
            }
            Ok(Outcome {
                params: json!({ "sum_cap": sum_cap }),
                result: json!({ "amplitudes": reports.len(), "per_N": reports }),
                passed,
                table,
            })
        }

        Command::CheckGoal { phi, psi, sum_cap, .. } => {
            let (f, g) = (source(graph, Some(phi))?, source(graph, Some(psi))?);
            budget(common, sweep_work(graph, *sum_cap, |n| current_pairs(n).saturating_mul(3)))?;
            let mut rows = Vec::new();
            let mut table = vec![format!("{:<16} {:>16} {:>16} {:>4}", "N", "gap", "square", "ok")];
            let mut passed = true;
            for n in amplitudes_up_to(graph.edge_count(), *sum_cap) {
                let c = ginibre_gap_counts(graph, &n, &f, &g)?;
                passed &= c.holds();
                table.push(format!(
                    "{:<16} {:>16} {:>16} {:>4}",
                    format!("{:?}", n.values()),
                    c.gap(),
                    c.square(),
                    if c.holds() { "yes" } else { "NO" }
                ));
                rows.push(c.to_json());
            }
            Ok(Outcome {
                params: json!({ "phi": f, "psi": g, "sum_cap": sum_cap }),
                result: json!({ "per_N": rows }),
                passed,
                table,
            })
        }

        Command::Correlate { phi, degree_cap, .. } => {
            let f = source(graph, Some(phi))?;
            budget(common, sweep_work(graph, *degree_cap, currents).saturating_mul(2))?;
            let s = correlation_series(graph, &f, *degree_cap)?;
            let result = s.to_json();
            let table = vec![
                format!("<sigma^phi> at D = {}: {}", degree_cap, result["value_f64"]),
                format!("exact: {}", result["value"].as_str().unwrap_or_default()),
                format!("relative change from D - 1: {}", result["relative_change"]),
            ];
            Ok(Outcome { params: json!({ "phi": f, "degree_cap": degree_cap }), result, passed: true, table })
        }

        Command::CheckGinibre { phi, psi, degree_cap, .. } => {
            let (f, g) = (source(graph, Some(phi))?, source(graph, Some(psi))?);
            budget(common, sweep_work(graph, *degree_cap, |n| current_pairs(n).saturating_mul(3)))?;
            let s = ginibre_gap_series(graph, &f, &g, *degree_cap)?;
            let passed = s.holds();
            let table = vec![
                format!("gap series at D = {}: {}", degree_cap, format_rational(&s.value())),
                format!("nonnegative with per-N squares: {}", if passed { "yes" } else { "NO" }),
            ];
            Ok(Outcome {
                params: json!({ "phi": f, "psi": g, "degree_cap": degree_cap }),
                result: s.to_json(),
                passed,
                table,
            })
        }

        Command::Oracle { oracle, .. } => {
            let f = source(graph, Some(&oracle.phi))?;
            let (result, value, stderr) = oracle_estimate(graph, common, oracle, &f)?;
            let table = vec![match stderr {
                Some(se) => format!("<sigma^phi> ~ {value} +/- {se}"),
                None => format!("<sigma^phi> ~ {value}"),
            }];
            Ok(Outcome { params: json!({ "phi": f }), result, passed: true, table })
        }

        Command::Compare { oracle, degree_cap, tol, .. } => {
            let f = source(graph, Some(&oracle.phi))?;
            budget(common, sweep_work(graph, *degree_cap, currents).saturating_mul(2))?;
            let series = correlation_series(graph, &f, *degree_cap)?;
            let series_json = series.to_json();
            let series_value = series_json["value_f64"].as_f64().unwrap_or(f64::NAN);
            let (oracle_json, value, stderr) = oracle_estimate(graph, common, oracle, &f)?;
            let diff = (series_value - value).abs();
            let allowed = stderr.map_or(*tol, |se| 3.0 * se);
            let passed = diff <= allowed;
            let table = vec![
                format!("series  (D = {degree_cap}): {series_value}"),
                format!("oracle:          {value}"),
                format!("|diff| = {diff:e}, allowed {allowed:e}: {}", if passed { "ok" } else { "FAIL" }),
            ];
            Ok(Outcome {
                params: json!({ "phi": f, "degree_cap": degree_cap, "tol": tol }),
                result: json!({ "series": series_json, "oracle": oracle_json, "abs_diff": diff, "allowed": allowed }),
                passed,
                table,
            })
        }

        Command::CoeffCheck { phi, psi, degree_cap, .. } => {
            let (f, g) = (source(graph, Some(phi))?, source(graph, Some(psi))?);
            budget(common, sweep_work(graph, *degree_cap, current_pairs))?;
            let report = coefficient_identity_check(graph, &f, &g, *degree_cap)?;
            let passed = report.passed();
            let table = vec![format!(
                "{} amplitudes compared, {} mismatches",
                report.rows.len(),
                report.mismatches().count()
            )];
            Ok(Outcome {
                params: json!({ "phi": f, "psi": g, "degree_cap": degree_cap }),
                result: report.to_json(),
                passed,
                table,
            })
        }
    }
}
