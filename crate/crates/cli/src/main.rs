mod config;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use config::RunConfig;
use mpcc_core::experiments::{
    self, reference, sweep_mu_nu, table_dark_counts, table_detector_efficiency, CellDiff,
    SweepResult, SweepSpec, TABLE_ETAS, TABLE_ZETAS,
};
use mpcc_core::optics::mu_optimal;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mpcc", version, about = "Mirror phase-covariant cloning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweeps and tables (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; falls back to $MPCC_OUT_DIR, then the working directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// File formats to write for generated data sets.
    #[arg(long, global = true, value_enum, default_value_t = Format::Both)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and simulated figures of merit, side by side.
    Fidelity {
        /// TOML run configuration; defaults describe the optimal operating point.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Regenerate a characterization data set and diff it against golden values.
    ///
    /// Targets: table1 (efficiency scan), table2 (dark-count scan),
    /// fig3 (fidelity surface), fig4 (acceptance surface).
    Reproduce { target: String },
    /// Run a transmittance sweep described by a TOML or JSON spec file.
    Sweep { spec: PathBuf },
    /// Run the invariant suite and report each property.
    Validate,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

const USAGE_ERROR: u8 = 2;
const TOLERANCE_ERROR: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Fidelity { config } => cmd_fidelity(config.as_deref()),
        Command::Reproduce { target } => cmd_reproduce(target, &out_dir(cli), cli.format),
        Command::Sweep { spec } => cmd_sweep(spec, &out_dir(cli), cli.format),
        Command::Validate => cmd_validate(),
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("MPCC_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn cmd_fidelity(config_path: Option<&Path>) -> Result<u8> {
    let config = match config_path {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return Ok(USAGE_ERROR);
                }
            };
            match RunConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return Ok(USAGE_ERROR);
                }
            }
        }
        None => RunConfig::default(),
    };
    let analytic = match config::analytic_report(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(USAGE_ERROR);
        }
    };
    let pipeline = match config.pipeline() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(USAGE_ERROR);
        }
    };
    let simulated = experiments::average_over_inputs(&pipeline, config.quadrature_points)?;
    println!(
        "analytic   f1={} f2={} f_avg={} p_success={}",
        analytic.f1, analytic.f2, analytic.f_avg, analytic.p_success
    );
    println!(
        "simulated  f1={} f2={} f_avg={} p_success={}",
        simulated.f1, simulated.f2, simulated.f_avg, simulated.p_success
    );
    println!(
        "difference f1={} f2={} f_avg={} p_success={}",
        simulated.f1 - analytic.f1,
        simulated.f2 - analytic.f2,
        simulated.f_avg - analytic.f_avg,
        simulated.p_success - analytic.p_success
    );
    Ok(0)
}

fn write_outputs(result: &SweepResult, dir: &Path, stem: &str, format: Format) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    if format != Format::Json {
        let path = dir.join(format!("{stem}.csv"));
        fs::write(&path, result.to_csv())
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    if format != Format::Csv {
        let path = dir.join(format!("{stem}.json"));
        fs::write(&path, result.to_json())
            .with_context(|| format!("cannot write {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn column_value(result: &SweepResult, diff: &CellDiff) -> Option<f64> {
    let row = result.rows.iter().find(|r| {
        r.text("kind") == Some(diff.kind.as_str())
            && r.number("eta").map(|e| (e - diff.eta).abs() < 1e-12) == Some(true)
            && r.number("zeta")
                .map(|z| (z - diff.zeta).abs() <= 1e-12 + 1e-6 * diff.zeta.max(1.0))
                == Some(true)
    })?;
    match diff.column {
        "p_success" => Some(row.p_success),
        "f1" => Some(row.f1),
        "f2" => Some(row.f2),
        _ => None,
    }
}

/// Re-derives the failing cells at other pump strengths so misses can be
/// told apart from pump-strength mismatches.
fn pump_sensitivity_report(target: &str, misses: &[&CellDiff]) -> Result<()> {
    println!("pump-strength sensitivity of the out-of-tolerance cells:");
    for &gamma_squared in &[1e-6, 0.005, 0.01, 0.02] {
        let alt = match target {
            "table1" => table_detector_efficiency(&TABLE_ETAS, gamma_squared, 0.0)?,
            "table2" => table_dark_counts(&TABLE_ZETAS, gamma_squared)?,
            _ => return Ok(()),
        };
        for miss in misses {
            if let Some(value) = column_value(&alt, miss) {
                println!(
                    "  gamma2={gamma_squared}: {} eta={} zeta={} {} -> {:.4} (expected {:.4})",
                    miss.kind, miss.eta, miss.zeta, miss.column, value, miss.expected
                );
            }
        }
    }
    Ok(())
}

fn report_table(
    target: &str,
    result: &SweepResult,
    golden: &[reference::TableCell],
    dir: &Path,
    format: Format,
) -> Result<u8> {
    write_outputs(result, dir, target, format)?;
    let diffs = experiments::compare_table(result, golden);
    for diff in &diffs {
        println!("{diff}");
    }
    let misses: Vec<&CellDiff> = diffs.iter().filter(|d| !d.passed()).collect();
    if misses.is_empty() {
        println!("{target}: all {} cells within tolerance", diffs.len());
        Ok(0)
    } else {
        println!(
            "{target}: {} of {} cells out of tolerance",
            misses.len(),
            diffs.len()
        );
        pump_sensitivity_report(target, &misses)?;
        Ok(TOLERANCE_ERROR)
    }
}

/// Grid positions of one anti-diagonal row (mu + nu = 1 by index).
fn anti_diagonal(result: &SweepResult, n: usize) -> Vec<(f64, f64, f64, String)> {
    (0..n)
        .map(|i| {
            let row = &result.rows[i * n + (n - 1 - i)];
            (
                row.number("mu").unwrap_or(f64::NAN),
                row.f_avg,
                row.p_success,
                row.note.clone(),
            )
        })
        .collect()
}

fn report_figure(target: &str, dir: &Path, format: Format) -> Result<u8> {
    let spec = SweepSpec::default();
    let n = spec.mu.points;
    let result = sweep_mu_nu(&spec)?;
    write_outputs(&result, dir, target, format)?;
    let line = anti_diagonal(&result, n);
    let band: Vec<&(f64, f64, f64, String)> = line
        .iter()
        .filter(|(mu, _, _, note)| {
            *mu >= mu_optimal() - 1e-9 && *mu <= 1.0 - mu_optimal() + 1e-9 && note.is_empty()
        })
        .collect();
    if band.is_empty() {
        return Err(anyhow!("no feasible points found along mu + nu = 1"));
    }
    let mut failures = 0u32;
    match target {
        "fig3" => {
            let f_max = band.iter().map(|r| r.1).fold(f64::MIN, f64::max);
            let f_min = band.iter().map(|r| r.1).fold(f64::MAX, f64::min);
            let spread = f_max - f_min;
            let ok = spread < 1e-6;
            println!(
                "{} fidelity plateau along mu + nu = 1: spread {:.3e} (tol 1e-6)",
                if ok { "ok  " } else { "MISS" },
                spread
            );
            failures += u32::from(!ok);

            // Reflection through the mu + nu = 1 line, on index pairs up to
            // two grid steps off it. The cross mu = 1/2 or nu = 1/2 is
            // excluded: there one polarization is fully attenuated and the
            // surface has a genuine ridge, so reflected values diverge.
            let mut worst: f64 = 0.0;
            let grid = |k: usize| k as f64 / (n - 1) as f64;
            for i in 0..n {
                for j in 0..n {
                    let off = i + j;
                    if off == n - 1 || off < n.saturating_sub(3) || off > n + 1 {
                        continue;
                    }
                    let a = &result.rows[i * n + j];
                    let b = &result.rows[(n - 1 - j) * n + (n - 1 - i)];
                    let away_from_cross = [i, j, n - 1 - j, n - 1 - i]
                        .iter()
                        .all(|&k| (grid(k) - 0.5).abs() >= 0.06);
                    if away_from_cross && a.note.is_empty() && b.note.is_empty() {
                        worst = worst.max((a.f_avg - b.f_avg).abs());
                    }
                }
            }
            let sym_ok = worst < 1e-2;
            println!(
                "{} reflection symmetry near mu + nu = 1 (center ridge excluded): worst |dF| {:.3e} (tol 1e-2)",
                if sym_ok { "ok  " } else { "MISS" },
                worst
            );
            failures += u32::from(!sym_ok);
        }
        "fig4" => {
            let center = &result.rows[(n / 2) * n + n / 2];
            let center_ok = center.p_success == 0.0;
            println!(
                "{} acceptance vanishes at mu = nu = 1/2: P = {:e}",
                if center_ok { "ok  " } else { "MISS" },
                center.p_success
            );
            failures += u32::from(!center_ok);

            let best = band
                .iter()
                .max_by(|a, b| a.2.total_cmp(&b.2))
                .expect("band is nonempty");
            let step = 1.0 / (n - 1) as f64;
            let near_edge = (best.0 - mu_optimal()).abs() <= 0.5 * step + 1e-9
                || (best.0 - (1.0 - mu_optimal())).abs() <= 0.5 * step + 1e-9;
            println!(
                "{} feasible acceptance peaks at the band edge: argmax mu = {:.4}, P = {:.4}",
                if near_edge { "ok  " } else { "MISS" },
                best.0,
                best.2
            );
            failures += u32::from(!near_edge);
        }
        _ => unreachable!(),
    }
    Ok(if failures == 0 { 0 } else { TOLERANCE_ERROR })
}

fn cmd_reproduce(target: &str, dir: &Path, format: Format) -> Result<u8> {
    match target {
        "table1" => {
            let result = table_detector_efficiency(&TABLE_ETAS, 0.01, 0.0)?;
            report_table(target, &result, &reference::EFFICIENCY_TABLE, dir, format)
        }
        "table2" => {
            let result = table_dark_counts(&TABLE_ZETAS, 0.01)?;
            report_table(target, &result, &reference::DARK_COUNT_TABLE, dir, format)
        }
        "fig3" | "fig4" => report_figure(target, dir, format),
        other => {
            eprintln!("error: unknown reproduction target {other:?}; expected table1, table2, fig3, or fig4");
            Ok(USAGE_ERROR)
        }
    }
}

fn cmd_sweep(spec_path: &Path, dir: &Path, format: Format) -> Result<u8> {
    let text = match fs::read_to_string(spec_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", spec_path.display());
            return Ok(USAGE_ERROR);
        }
    };
    let is_json = spec_path.extension().map(|e| e == "json").unwrap_or(false);
    let spec: SweepSpec = if is_json {
        match serde_json::from_str(&text) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: invalid sweep spec: {e}");
                return Ok(USAGE_ERROR);
            }
        }
    } else {
        match toml::from_str(&text) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: invalid sweep spec: {e}");
                return Ok(USAGE_ERROR);
            }
        }
    };
    let result = sweep_mu_nu(&spec)?;
    let stem = spec_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("sweep");
    write_outputs(&result, dir, stem, format)?;
    println!("{} grid points", result.rows.len());
    Ok(0)
}

fn cmd_validate() -> Result<u8> {
    let checks = experiments::validation::run_all(0x4d50_4343);
    let mut all_passed = true;
    for check in &checks {
        all_passed &= check.passed;
        println!(
            "{} {}{}: {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            if check.expected_fail { " (expected-fail demo)" } else { "" },
            check.detail
        );
    }
    Ok(if all_passed { 0 } else { TOLERANCE_ERROR })
}
