//! Command-line surface: chart analysis, identity audits, the curvature
//! inequality table, and warped-product checks, over catalog charts or JSON
//! chart configurations.
//!
//! Exit codes: 0 all audited assertions pass, 1 audit failures, 2 config or
//! chart-level rejections (bad input, higher-order slant structure, improper
//! splits, non-warped charts), 3 internal errors.

pub mod config;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use slantgeom::audit::{analyze_chart, audit_chart, warped_report, AuditReport};
use slantgeom::catalog;
use slantgeom::grid::Grid;
use slantgeom::GeomError;

use config::{ChartConfig, Target};

#[derive(Parser)]
#[command(
    name = "slantgeom",
    version,
    about = "Geometry engine for pointwise slant submanifolds of flat Kahler space"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-point induced geometry and slant classification (JSON)
    Analyze {
        /// `catalog:NAME` or a path to a JSON chart config
        target: String,
        /// Grid points per axis (default 3, or the config's value)
        #[arg(long)]
        grid: Option<usize>,
        /// Override the audit residual tolerance
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
        /// Reject grid points the chart's source construction excludes
        #[arg(long)]
        strict_domain: bool,
    },
    /// Run every identity, characterization, and inequality audit
    Audit {
        target: String,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the JSON report here (the human summary always goes to
        /// standard output)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict_domain: bool,
    },
    /// Per-point lower bound table for the squared second fundamental form
    Inequality {
        target: String,
        /// Grid points per axis (default 6 so unit base points are sampled)
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        /// Write the CSV table here instead of standard output
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        strict_domain: bool,
    },
    /// Warp recovery, triviality, and the warped-product connection pattern
    Warped {
        target: String,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict_domain: bool,
    },
    /// Built-in chart catalog
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List the built-in charts
    List,
}

enum Failure {
    Config(String),
    Internal(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<GeomError> for Failure {
    fn from(e: GeomError) -> Failure {
        match e {
            GeomError::ConvergenceFailure | GeomError::NotNormal { .. } => {
                Failure::Internal(e.to_string())
            }
            other => Failure::Config(other.to_string()),
        }
    }
}

/// Parse and execute; returns the process exit code. Reports go to `out`,
/// diagnostics to `err`.
pub fn run<I, T, W, E>(args: I, out: &mut W, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(if code == 0 { &mut *out as &mut dyn Write } else { err }, "{e}");
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.exit_code()
        }
    }
}

fn execute<W: Write>(cli: Cli, out: &mut W) -> Result<i32, Failure> {
    match cli.command {
        Command::Catalog {
            action: CatalogAction::List,
        } => {
            for name in catalog::names() {
                writeln!(out, "{name}").map_err(io_fail)?;
            }
            Ok(0)
        }
        Command::Analyze {
            target,
            grid,
            tol,
            out: out_path,
            strict_domain,
        } => {
            let (target, grid) = prepare(&target, grid, tol, strict_domain, 3)?;
            let report = analyze_chart(&target.name, &target.chart, &grid, &target.tols)?;
            emit_json(out, out_path.as_deref(), &report)?;
            Ok(0)
        }
        Command::Audit {
            target,
            grid,
            tol,
            out: out_path,
            strict_domain,
        } => {
            let (target, grid) = prepare(&target, grid, tol, strict_domain, 3)?;
            let report = audit_chart(&target.name, &target.chart, &grid, &target.tols)?;
            print_audit_summary(out, &report).map_err(io_fail)?;
            match out_path.as_deref() {
                Some(path) => {
                    fs::write(path, output::to_json(&report)).map_err(io_fail)?;
                }
                None => {
                    writeln!(out).map_err(io_fail)?;
                    write!(out, "{}", output::to_json(&report)).map_err(io_fail)?;
                }
            }
            Ok(if report.pass { 0 } else { 1 })
        }
        Command::Inequality {
            target,
            grid,
            tol,
            csv,
            strict_domain,
        } => {
            let (target, grid) = prepare(&target, grid, tol, strict_domain, 6)?;
            let report = audit_chart(&target.name, &target.chart, &grid, &target.tols)?;
            let table = output::inequality_csv(
                &target.chart.param_names(),
                &report.inequality.rows,
            );
            match csv.as_deref() {
                Some(path) => {
                    fs::write(path, table).map_err(io_fail)?;
                    writeln!(
                        out,
                        "{} points, min slack {:.6e} at {:?}",
                        report.inequality.rows.len(),
                        report.inequality.min_slack,
                        report.inequality.worst_point
                    )
                    .map_err(io_fail)?;
                }
                None => {
                    write!(out, "{table}").map_err(io_fail)?;
                }
            }
            Ok(if report.inequality.pass { 0 } else { 1 })
        }
        Command::Warped {
            target,
            grid,
            tol,
            out: out_path,
            strict_domain,
        } => {
            let (target, grid) = prepare(&target, grid, tol, strict_domain, 3)?;
            let report = warped_report(&target.name, &target.chart, &grid, &target.tols)?;
            writeln!(
                out,
                "{} chart {}: block residual {:.3e}, connection pattern {}, \
                 warps {} (max log-gradient {:.3e})",
                if report.pass { "PASS" } else { "FAIL" },
                report.chart,
                report.block_residual,
                if report.connection_pattern.pass {
                    "ok"
                } else {
                    "violated"
                },
                if report.trivial { "trivial" } else { "non-trivial" },
                report.max_log_gradient_norm,
            )
            .map_err(io_fail)?;
            emit_json(out, out_path.as_deref(), &report)?;
            Ok(if report.pass { 0 } else { 1 })
        }
    }
}

fn io_fail(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn emit_json<W: Write, T: serde::Serialize>(
    out: &mut W,
    path: Option<&Path>,
    report: &T,
) -> Result<(), Failure> {
    let json = output::to_json(report);
    match path {
        Some(p) => fs::write(p, json).map_err(io_fail),
        None => write!(out, "{json}").map_err(io_fail),
    }
}

fn resolve_target(spec: &str) -> Result<Target, Failure> {
    if let Some(name) = spec.strip_prefix("catalog:") {
        Ok(catalog::entry(name)?.into())
    } else {
        let text = fs::read_to_string(spec)
            .map_err(|e| Failure::Config(format!("cannot read config `{spec}`: {e}")))?;
        let cfg: ChartConfig = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("config `{spec}`: {e}")))?;
        let name = Path::new(spec)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or(spec)
            .to_string();
        cfg.into_target(name).map_err(Failure::Config)
    }
}

fn prepare(
    spec: &str,
    grid_flag: Option<usize>,
    tol_flag: Option<f64>,
    strict_domain: bool,
    default_grid: usize,
) -> Result<(Target, Grid), Failure> {
    let mut target = resolve_target(spec)?;
    if let Some(t) = tol_flag {
        if !(t > 0.0) {
            return Err(Failure::Config(format!("tolerance must be positive, got {t}")));
        }
        target.tols.audit = t;
        target.tols.identity = t;
        target.tols.slack = t;
    }
    let n = grid_flag.or(target.grid_points).unwrap_or(default_grid);
    if n == 0 {
        return Err(Failure::Config("grid must have at least one point per axis".into()));
    }
    let grid = Grid::linspace(&target.sample_box, n);
    if strict_domain {
        for &(axis, value) in &target.excluded_values {
            if let Some(hit) = grid.axes.get(axis).and_then(|ax| {
                ax.iter().find(|&&s| (s - value).abs() < 1e-9)
            }) {
                return Err(Failure::Config(format!(
                    "strict domain: grid sample {hit} on axis `{}` hits the excluded value {value}",
                    target.chart.params[axis].name
                )));
            }
        }
    }
    Ok((target, grid))
}

fn print_audit_summary<W: Write>(out: &mut W, report: &AuditReport) -> std::io::Result<()> {
    writeln!(
        out,
        "chart {}: {} grid points, dims (holomorphic, totally real, slant) = ({}, {}, {}), \
         invariant normal {}, theta in [{:.6}, {:.6}], proper {}",
        report.chart,
        report.grid.total_points,
        report.classification.holomorphic_dim,
        report.classification.totally_real_dim,
        report.classification.slant_dim,
        report.classification.invariant_normal_dim,
        report.classification.theta_min,
        report.classification.theta_max,
        report.classification.proper,
    )?;
    for check in &report.identities {
        writeln!(
            out,
            "{} {:<34} max residual {:>12.3e}{}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.max_residual,
            if check.required { "" } else { "  (informational)" },
        )?;
    }
    for pred in &report.predicates {
        writeln!(
            out,
            "{} {:<34} residual {:>12.3e}",
            if pred.holds { "PASS" } else { "FAIL" },
            pred.name,
            pred.residual,
        )?;
    }
    writeln!(
        out,
        "{} inequality.sff_bound               min slack {:.6e} at {:?}",
        if report.inequality.pass { "PASS" } else { "FAIL" },
        report.inequality.min_slack,
        report.inequality.worst_point,
    )?;
    for flag in &report.equality.flags {
        writeln!(
            out,
            "INFO {:<34} residual {:>12.3e} holds {}",
            flag.name, flag.max_residual, flag.holds,
        )?;
    }
    writeln!(
        out,
        "INFO triviality: warps {}, mixed geodesic (real {}, slant {}), hypothesis met {}{}",
        if report.triviality.warps_trivial {
            "trivial"
        } else {
            "non-trivial"
        },
        report.triviality.mixed_geodesic_real.holds,
        report.triviality.mixed_geodesic_slant.holds,
        report.triviality.hypothesis_met,
        match report.triviality.equivalence_holds {
            Some(true) => ", equivalence observed",
            Some(false) => ", equivalence VIOLATED",
            None => "",
        },
    )?;
    writeln!(out, "VERDICT: {}", if report.pass { "PASS" } else { "FAIL" })
}
