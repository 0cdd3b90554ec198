//! Command-line front end: catalog inspection, single-entry verification,
//! spectra and Gauss-image dumps, hemisphere scans, and the full regression
//! suite over every shipped entry.
//!
//! Exit codes: 0 when every requested verdict passes, 1 on verification
//! failure, 2 on usage errors (bad flags, malformed manifold specs).

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use octoverify_core::catalog::catalog_list;
use octoverify_core::gauss::{gauss_field, laplacian_grid, node_weights};
use octoverify_core::hemisphere::{hemisphere_scan, mean_zero_check};
use octoverify_core::linalg::norm8;
use octoverify_core::runner::{
    prepare_entry, run, run_suite, CheckKind, RunConfig, Verdict, VerificationReport,
};
use octoverify_core::spectra::combined_normal;
use octoverify_core::Error;

#[derive(Parser)]
#[command(
    name = "octoverify",
    version,
    about = "Numerical verification of octonionic Gauss-map eigenmap identities on minimal submanifolds of the 7-sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct NumericOpts {
    /// Grid nodes per axis: one value (broadcast) or a comma list, minimum 8.
    /// Defaults depend on the dimension (24 for d<=3, 12 for d in {4,5}, 8 for d=6);
    /// grids are coarsened deterministically to keep node counts under 200000.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,

    /// Finite-difference step in chart coordinates, within [1e-6, 1e-1]
    #[arg(long, default_value_t = 1e-3)]
    fd_step: f64,

    /// Tolerance override NAME=VAL (repeatable); see README for names
    #[arg(long = "tolerance")]
    tolerance: Vec<String>,

    /// Worker threads (default: OCTOVERIFY_WORKERS env var, else all cores)
    #[arg(long)]
    workers: Option<usize>,

    /// Seed for the random sweeps and the candidate generator
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// List the shipped manifold catalog
    Catalog,

    /// Run verification checks for one manifold
    Verify {
        /// Manifold spec: great:M | product:N1,...[@R1,...] | compose:great:M/product:P,Q
        #[arg(long)]
        manifold: String,

        /// Comma list of checks (default: all): algebra,minimality,parallelism,
        /// isoparametric,lemma,theorem1,theorem2,corollary,hemisphere
        #[arg(long)]
        checks: Option<String>,

        /// Candidate budget of the hemisphere scan
        #[arg(long, default_value_t = 256)]
        budget: usize,

        /// Write the JSON report here
        #[arg(long)]
        out: Option<PathBuf>,

        /// Write a CSV sidecar of per-node eigenmap residuals here
        #[arg(long)]
        residuals: Option<PathBuf>,

        #[command(flatten)]
        numeric: NumericOpts,
    },

    /// Print the shape-operator Gram spectrum at the reference node
    Spectrum {
        #[arg(long)]
        manifold: String,

        #[arg(long)]
        out: Option<PathBuf>,

        #[command(flatten)]
        numeric: NumericOpts,
    },

    /// Dump the Gauss image of one eigen-direction over the grid
    GaussImage {
        #[arg(long)]
        manifold: String,

        /// Eigen-direction index into the ascending spectrum
        #[arg(long, default_value_t = 0)]
        direction: usize,

        /// Output format
        #[arg(long, default_value = "csv")]
        format: String,

        #[arg(long)]
        out: Option<PathBuf>,

        #[command(flatten)]
        numeric: NumericOpts,
    },

    /// Hemisphere scan of every eigen-direction
    Hemisphere {
        #[arg(long)]
        manifold: String,

        /// Candidate budget of the scan
        #[arg(long, default_value_t = 256)]
        budget: usize,

        #[arg(long)]
        out: Option<PathBuf>,

        #[command(flatten)]
        numeric: NumericOpts,
    },

    /// Run every catalog entry with all checks (the acceptance gate)
    Suite {
        #[arg(long, default_value_t = 256)]
        budget: usize,

        #[arg(long)]
        out: Option<PathBuf>,

        #[command(flatten)]
        numeric: NumericOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let usage = matches!(
                e.downcast_ref::<Error>(),
                Some(
                    Error::SpecParse { .. }
                        | Error::SpecInvalid(_)
                        | Error::InvalidConfig(_)
                        | Error::UnknownCheck(_)
                        | Error::UnknownTolerance(_)
                )
            );
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}

fn build_config(manifold: &str, numeric: &NumericOpts) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::new(manifold);
    cfg.grid = numeric.grid.clone();
    cfg.fd_step = numeric.fd_step;
    cfg.seed = numeric.seed;
    cfg.workers = numeric
        .workers
        .or_else(|| {
            std::env::var("OCTOVERIFY_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    for spec in &numeric.tolerance {
        let (name, value) = spec.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("tolerance override '{spec}' is not NAME=VAL"))
        })?;
        let value: f64 = value.parse().map_err(|_| {
            Error::InvalidConfig(format!("tolerance value '{value}' is not a number"))
        })?;
        cfg.override_tolerance(name.trim(), value)?;
    }
    Ok(cfg)
}

fn write_or_print(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => println!("{content}"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Catalog => {
            println!(
                "{:<34} {:>3} {:>3} {:>8}  radii",
                "name", "d", "k", "minimal"
            );
            for e in catalog_list() {
                let radii: Vec<String> = e
                    .spec
                    .factors()
                    .iter()
                    .map(|f| format!("{:.6}", f.radius))
                    .collect();
                println!(
                    "{:<34} {:>3} {:>3} {:>8}  {}",
                    e.name,
                    e.dim,
                    e.codim,
                    if e.minimal { "yes" } else { "no" },
                    radii.join(",")
                );
            }
            Ok(true)
        }

        Command::Verify {
            manifold,
            checks,
            budget,
            out,
            residuals,
            numeric,
        } => {
            let mut cfg = build_config(&manifold, &numeric)?;
            cfg.hemisphere_budget = budget;
            if let Some(list) = checks {
                cfg.checks = list
                    .split(',')
                    .map(|s| CheckKind::from_str(s.trim()))
                    .collect::<Result<Vec<_>, _>>()?;
            }
            let report = run(&cfg)?;
            print_report(&report);
            if let Some(path) = &out {
                fs::write(path, report.to_json())?;
            }
            if let Some(path) = &residuals {
                write_residual_csv(&cfg, path)?;
            }
            Ok(report.all_pass())
        }

        Command::Spectrum {
            manifold,
            out,
            numeric,
        } => {
            let cfg = build_config(&manifold, &numeric)?;
            let entry = prepare_entry(&cfg)?;
            let scan =
                octoverify_core::spectra::spectra_scan(&entry.chart, &entry.hints, cfg.fd_step)?;
            let node = entry.chart.node_u(0);
            let payload = serde_json::json!({
                "manifold": manifold,
                "node": node,
                "gram": entry.spectrum.gram,
                "sigma": entry.spectrum.sigma,
                "vectors": entry.spectrum.vectors,
                "degeneracies": entry.spectrum.degeneracies,
                "sigma_spread": scan.sigma_spread,
                "gram_spread": scan.gram_spread,
            });
            println!(
                "sigma = {:?}  (degeneracies {:?}, spread {:.3e})",
                entry.spectrum.sigma, entry.spectrum.degeneracies, scan.sigma_spread
            );
            let json = serde_json::to_string_pretty(&payload)?;
            if out.is_some() {
                write_or_print(&out, &json)?;
            }
            Ok(true)
        }

        Command::GaussImage {
            manifold,
            direction,
            format,
            out,
            numeric,
        } => {
            let cfg = build_config(&manifold, &numeric)?;
            let entry = prepare_entry(&cfg)?;
            if direction >= entry.spectrum.k {
                return Err(Error::InvalidConfig(format!(
                    "direction {direction} out of range (codimension {})",
                    entry.spectrum.k
                ))
                .into());
            }
            let eta = combined_normal(&entry.hints, &entry.spectrum.vectors[direction])?;
            let field = gauss_field(&entry.chart, eta, format!("eigen:{direction}"))?;
            match format.as_str() {
                "csv" => {
                    let mut buf = String::new();
                    let d = entry.chart.dim();
                    let header: Vec<String> = (1..=d)
                        .map(|i| format!("u{i}"))
                        .chain((1..=8).map(|i| format!("x{i}")))
                        .chain((1..=8).map(|i| format!("g{i}")))
                        .collect();
                    buf.push_str(&header.join(","));
                    buf.push('\n');
                    for (idx, g) in field.values.iter().enumerate() {
                        let u = entry.chart.node_u(idx);
                        let x = entry.chart.position(&u);
                        let row: Vec<String> = u
                            .iter()
                            .chain(x.iter())
                            .chain(g.iter())
                            .map(|v| format!("{v}"))
                            .collect();
                        buf.push_str(&row.join(","));
                        buf.push('\n');
                    }
                    write_or_print(&out, &buf)?;
                }
                "json" => {
                    let rows: Vec<serde_json::Value> = field
                        .values
                        .iter()
                        .enumerate()
                        .map(|(idx, g)| {
                            let u = entry.chart.node_u(idx);
                            let x = entry.chart.position(&u);
                            serde_json::json!({"u": u, "x": x, "gamma": g})
                        })
                        .collect();
                    write_or_print(&out, &serde_json::to_string_pretty(&rows)?)?;
                }
                other => {
                    return Err(Error::InvalidConfig(format!("unknown format '{other}'")).into())
                }
            }
            Ok(true)
        }

        Command::Hemisphere {
            manifold,
            budget,
            out,
            numeric,
        } => {
            let cfg = build_config(&manifold, &numeric)?;
            let entry = prepare_entry(&cfg)?;
            let weights = node_weights(&entry.chart);
            let mut reports = Vec::new();
            let mut ok = true;
            for j in 0..entry.spectrum.k {
                let eta = combined_normal(&entry.hints, &entry.spectrum.vectors[j])?;
                let field = gauss_field(&entry.chart, eta, format!("eigen:{j}"))?;
                let report = hemisphere_scan(
                    &entry.chart,
                    &format!("eigen:{j}"),
                    &field.values,
                    &weights,
                    budget,
                    cfg.seed,
                    cfg.tolerances.hemisphere_margin,
                )?;
                let mean = mean_zero_check(&field.values, &weights);
                println!(
                    "eigen:{j}  sigma={:+.6}  best_margin={:+.3e}  mean={:.3e}  {}",
                    entry.spectrum.sigma[j],
                    report.best_margin,
                    mean,
                    if report.consistent && mean < cfg.tolerances.mean_zero {
                        "consistent"
                    } else {
                        "VIOLATION"
                    }
                );
                if !report.consistent || mean >= cfg.tolerances.mean_zero {
                    ok = false;
                }
                reports.push(report);
            }
            if let Some(path) = &out {
                let payload = serde_json::json!({"entry": manifold, "reports": reports});
                fs::write(path, serde_json::to_string_pretty(&payload)?)?;
            }
            Ok(ok)
        }

        Command::Suite {
            budget,
            out,
            numeric,
        } => {
            let mut cfg = build_config("great:6", &numeric)?;
            cfg.hemisphere_budget = budget;
            let suite = run_suite(&cfg)?;
            for report in &suite.reports {
                for check in &report.checks {
                    println!(
                        "{:<34} {:<13} {}",
                        report.entry.name,
                        check.name,
                        verdict_str(check.verdict)
                    );
                }
            }
            println!("suite: {}", if suite.all_pass { "PASS" } else { "FAIL" });
            if let Some(path) = &out {
                fs::write(path, suite.to_json())?;
            }
            Ok(suite.all_pass)
        }
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "FAIL",
        Verdict::Refused => "refused",
        Verdict::Skipped => "skipped",
    }
}

fn print_report(report: &VerificationReport) {
    println!(
        "{}  (d={}, k={}, grid {:?}, h={})",
        report.entry.name,
        report.entry.dim,
        report.entry.codim,
        report.config.effective_grid,
        report.config.fd_step
    );
    for check in &report.checks {
        let key_stat = check
            .stats
            .iter()
            .next()
            .map(|(k, v)| format!("{k}={v:.3e}"))
            .unwrap_or_default();
        println!(
            "  {:<14} {:<8} {}{}",
            check.name,
            verdict_str(check.verdict),
            key_stat,
            check
                .reason
                .as_deref()
                .map(|r| format!("  ({r})"))
                .unwrap_or_default()
        );
    }
    if !report.eigenmap_table.is_empty() {
        println!("  eigenmap table (j, sigma, lambda, residual_l2):");
        for row in &report.eigenmap_table {
            println!(
                "    {}  {:+.8}  {:+.8}  {:.3e}  {}",
                row.j,
                row.sigma,
                row.lambda,
                row.residual_l2,
                if row.pass { "pass" } else { "FAIL" }
            );
        }
    }
    for hemi in &report.hemisphere {
        println!(
            "  hemisphere {}: margin {:+.3e} over {} candidates, mean |∫γ|/vol {:.3e}",
            hemi.label, hemi.best_margin, hemi.candidates, hemi.mean_norm
        );
    }
}

/// CSV sidecar: per-node residual norms of every eigen-direction.
fn write_residual_csv(cfg: &RunConfig, path: &PathBuf) -> anyhow::Result<()> {
    let entry = prepare_entry(cfg)?;
    let weights = node_weights(&entry.chart);
    let d7k = (7 - entry.chart.codim()) as f64;

    let mut columns: Vec<Vec<Option<f64>>> = Vec::new();
    for j in 0..entry.spectrum.k {
        let eta = combined_normal(&entry.hints, &entry.spectrum.vectors[j])?;
        let field = gauss_field(&entry.chart, eta, format!("eigen:{j}"))?;
        let laps = laplacian_grid(&entry.chart, &field.eta, cfg.fd_step)?;
        let lambda = d7k + entry.spectrum.sigma[j];
        let col: Vec<Option<f64>> = laps
            .iter()
            .zip(&field.values)
            .map(|(lap, g)| {
                lap.map(|lap| {
                    let mut r = [0.0; 8];
                    for c in 0..8 {
                        r[c] = lap[c] + lambda * g[c];
                    }
                    norm8(&r)
                })
            })
            .collect();
        columns.push(col);
    }

    let mut file = fs::File::create(path)?;
    let header: Vec<String> = std::iter::once("node".to_string())
        .chain((1..=entry.chart.dim()).map(|i| format!("u{i}")))
        .chain(std::iter::once("weight".to_string()))
        .chain((0..entry.spectrum.k).map(|j| format!("residual_eigen{j}")))
        .collect();
    writeln!(file, "{}", header.join(","))?;
    for idx in 0..entry.chart.node_count() {
        let u = entry.chart.node_u(idx);
        let mut row: Vec<String> = vec![idx.to_string()];
        row.extend(u.iter().map(|v| format!("{v}")));
        row.push(format!("{}", weights[idx]));
        for col in &columns {
            row.push(match col[idx] {
                Some(r) => format!("{r}"),
                None => String::new(),
            });
        }
        writeln!(file, "{}", row.join(","))?;
    }
    Ok(())
}
