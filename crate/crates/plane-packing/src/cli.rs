//! Command-line front end: argument parsing, certificate I/O, result files,
//! and the five subcommands (`search`, `verify`, `table`, `render`,
//! `ratios`). The binary in `src/bin/planepack.rs` is a thin wrapper around
//! [`run`].

use crate::geometry::{make_disc, make_regular_ngon, Shape, Vec2};
use crate::optimizer::{rank_table, search_and_refine, SearchSettings};
use crate::packing::{tau_contact, Certificate, Configuration};
use crate::report;
use crate::symmetry::{CellBounds, GroupName, GROUP_NAMES};
use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

/// Error class that maps to exit code 2 (usage / malformed input).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser, Debug)]
#[command(
    name = "planepack",
    about = "Densest plane-group packings of regular polygons and discs",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for the densest packing of one motif in one or more groups.
    Search(SearchArgs),
    /// Verify a certificate file; exit 0 iff feasible.
    Verify(VerifyArgs),
    /// Search a grid of (group, n) cells and emit density and rank CSVs.
    Table(TableArgs),
    /// Render a certificate as a deterministic SVG.
    Render(RenderArgs),
    /// Check the density-ratio identities against a results directory.
    Ratios(RatiosArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ShapeArgs {
    /// Vertex count of the regular polygon motif (n >= 3).
    #[arg(long)]
    pub n: Option<u32>,
    /// Use the disc motif instead of a polygon.
    #[arg(long, conflicts_with = "n")]
    pub disc: bool,
    /// Circumradius of the polygon (or disc radius).
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

impl ShapeArgs {
    pub fn to_shape(&self) -> Result<Shape> {
        if self.disc {
            return make_disc(self.radius, Vec2::zeros()).map_err(|e| usage(e.to_string()));
        }
        match self.n {
            Some(n) => make_regular_ngon(n, self.radius, Vec2::zeros(), 0.0)
                .map_err(|e| usage(e.to_string())),
            None => Err(usage("either --n <count> or --disc is required")),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SettingsArgs {
    /// Search preset: fast (2000 iterations, 15 refine rounds) or full
    /// (8000 iterations, 30 refine rounds).
    #[arg(long, default_value = "fast", value_parser = ["fast", "full"])]
    pub preset: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the iteration cap.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Override the number of refinement rounds.
    #[arg(long)]
    pub refine_rounds: Option<usize>,
    /// Override the per-iteration KL trust-region budget.
    #[arg(long)]
    pub kl_budget: Option<f64>,
    /// Override the elite fraction.
    #[arg(long)]
    pub elite_frac: Option<f64>,
    /// Lower bound for the cell generator lengths.
    #[arg(long)]
    pub lmin: Option<f64>,
    /// Upper bound for the cell generator lengths.
    #[arg(long)]
    pub lmax: Option<f64>,
}

impl SettingsArgs {
    pub fn to_settings(&self, shape: &Shape) -> Result<SearchSettings> {
        let mut s = match self.preset.as_str() {
            "full" => SearchSettings::full(self.seed),
            _ => SearchSettings::fast(self.seed),
        };
        if let Some(it) = self.iters {
            s.max_iterations = it;
        }
        if let Some(r) = self.refine_rounds {
            s.refine_rounds = r;
        }
        if let Some(k) = self.kl_budget {
            if k <= 0.0 {
                return Err(usage("--kl-budget must be positive"));
            }
            s.kl_budget = k;
        }
        if let Some(e) = self.elite_frac {
            if !(0.0 < e && e <= 1.0) {
                return Err(usage("--elite-frac must be in (0, 1]"));
            }
            s.elite_fraction = e;
        }
        if self.lmin.is_some() || self.lmax.is_some() {
            let mut bounds = CellBounds::for_shape(shape);
            if let Some(lo) = self.lmin {
                bounds.len_lo = lo;
            }
            if let Some(hi) = self.lmax {
                bounds.len_hi = hi;
            }
            if !(bounds.len_lo > 0.0 && bounds.len_hi > bounds.len_lo) {
                return Err(usage("cell length bounds must satisfy 0 < lmin < lmax"));
            }
            s.cell_bounds = Some(bounds);
        }
        Ok(s)
    }
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Plane groups to search: comma-separated IUCr names or "all".
    #[arg(long = "groups", alias = "group", value_delimiter = ',', default_value = "p2")]
    pub groups: Vec<String>,
    #[command(flatten)]
    pub settings: SettingsArgs,
    /// Output directory for result JSON and trace CSV files.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Certificate JSON file.
    pub certificate: PathBuf,
    /// Feasibility tolerance; defaults to 1e-9 x motif diameter.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Polygon vertex counts, comma separated.
    #[arg(long = "n", value_delimiter = ',')]
    pub n_values: Vec<u32>,
    /// Also include the disc motif.
    #[arg(long)]
    pub disc: bool,
    /// Plane groups: comma-separated names or "all".
    #[arg(long = "groups", alias = "group", value_delimiter = ',', default_value = "all")]
    pub groups: Vec<String>,
    #[command(flatten)]
    pub settings: SettingsArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    /// Certificate JSON file.
    pub certificate: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub cells_x: usize,
    #[arg(long, default_value_t = 3)]
    pub cells_y: usize,
    /// Overlap-highlight tolerance; defaults to 1e-9 x motif diameter.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Output SVG path; defaults to the certificate path with .svg.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RatiosArgs {
    /// Directory holding search result JSON files.
    pub results: PathBuf,
}

/// Search result as serialized to disk: the certificate plus the report and
/// run metadata.
#[derive(Debug, Serialize, Deserialize)]
pub struct SearchSummary {
    pub shape: String,
    pub group: String,
    pub certificate: Certificate,
    pub density: f64,
    pub violation: f64,
    pub feasible: bool,
    pub contacts: usize,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

pub fn shape_label(shape: &Shape) -> String {
    match shape {
        Shape::Disc { .. } => "disc".to_string(),
        Shape::Polygon { n, .. } => format!("{n}gon"),
    }
}

fn parse_groups(names: &[String]) -> Result<Vec<GroupName>> {
    if names.len() == 1 && names[0].eq_ignore_ascii_case("all") {
        return Ok(GROUP_NAMES.to_vec());
    }
    names
        .iter()
        .map(|s| GroupName::parse(s).map_err(|e| usage(e.to_string())))
        .collect()
}

/// Write via a temp file and rename so readers never see partial output.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn result_path(out: &Path, shape: &Shape, group: GroupName) -> PathBuf {
    out.join(format!("{}_{}.json", shape_label(shape), group))
}

/// Run one search-and-refine and persist its summary and trace.
pub fn run_one_search(
    shape: &Shape,
    group: GroupName,
    settings: &SearchSettings,
    out: &Path,
) -> Result<SearchSummary> {
    let result = search_and_refine(shape, group, settings)
        .with_context(|| format!("search {} in {group} failed", shape_label(shape)))?;
    let summary = SearchSummary {
        shape: shape_label(shape),
        group: group.as_str().to_string(),
        certificate: result.best.to_certificate(),
        density: result.report.density,
        violation: result.report.violation,
        feasible: result.report.feasible,
        contacts: result.report.contacts,
        iterations: result.iterations_used,
        converged: result.converged,
        seed: settings.seed,
    };
    write_atomic(
        &result_path(out, shape, group),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    write_atomic(
        &out.join(format!("{}_{}_trace.csv", shape_label(shape), group)),
        &report::trace_csv(&result.trace),
    )?;
    Ok(summary)
}

fn cmd_search(args: &SearchArgs) -> Result<i32> {
    let shape = args.shape.to_shape()?;
    let groups = parse_groups(&args.groups)?;
    let settings = args.settings.to_settings(&shape)?;
    for group in groups {
        let summary = run_one_search(&shape, group, &settings, &args.out)?;
        println!(
            "{} {}: density {} (feasible: {}, {} iterations)",
            summary.shape,
            summary.group,
            report::truncate5(summary.density),
            summary.feasible,
            summary.iterations
        );
    }
    Ok(0)
}

/// Load a certificate file into a configuration; malformed input is a
/// usage-class error (exit 2).
pub fn load_certificate(path: &Path) -> Result<Configuration> {
    let raw = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let cert: Certificate = serde_json::from_str(&raw)
        .map_err(|e| usage(format!("malformed certificate {}: {e}", path.display())))?;
    cert.into_configuration()
        .map_err(|e| usage(format!("invalid certificate {}: {e}", path.display())))
}

fn cmd_verify(args: &VerifyArgs) -> Result<i32> {
    let cfg = load_certificate(&args.certificate)?;
    let tau = args.tau.unwrap_or_else(|| tau_contact(&cfg.shape));
    let rep = cfg.verify(tau)?;
    println!("{}", serde_json::to_string_pretty(&rep)?);
    Ok(if rep.feasible { 0 } else { 1 })
}

fn cmd_table(args: &TableArgs) -> Result<i32> {
    let groups = parse_groups(&args.groups)?;
    let mut shapes: Vec<Shape> = Vec::new();
    for &n in &args.n_values {
        shapes
            .push(make_regular_ngon(n, 1.0, Vec2::zeros(), 0.0).map_err(|e| usage(e.to_string()))?);
    }
    if args.disc {
        shapes.push(make_disc(1.0, Vec2::zeros()).unwrap());
    }
    if shapes.is_empty() {
        return Err(usage("table needs --n values and/or --disc"));
    }

    let jobs: Vec<(Shape, GroupName)> = shapes
        .iter()
        .flat_map(|s| groups.iter().map(move |g| (*s, *g)))
        .collect();
    // Fan out across the worker pool; each job derives its own seed so the
    // outcome does not depend on scheduling.
    let summaries: Vec<SearchSummary> = jobs
        .par_iter()
        .map(|(shape, group)| {
            let mut settings = args.settings.to_settings(shape)?;
            let n_key = match shape {
                Shape::Polygon { n, .. } => *n as u64,
                Shape::Disc { .. } => 0,
            };
            settings.seed = crate::rng::derive(settings.seed, n_key, *group as u64);
            run_one_search(shape, *group, &settings, &args.out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<(u32, GroupName, f64)> = Vec::new();
    for s in &summaries {
        rows.push((
            s.certificate.n,
            GroupName::parse(&s.group).unwrap(),
            s.density,
        ));
    }
    rows.sort_by(|a, b| (a.0, a.1.as_str()).cmp(&(b.0, b.1.as_str())));
    write_atomic(&args.out.join("densities.csv"), &report::densities_csv(&rows))?;

    let mut n_values: Vec<u32> = rows.iter().map(|r| r.0).collect();
    n_values.sort_unstable();
    n_values.dedup();
    let entries = rank_table(&n_values, &groups, |n, g| {
        rows.iter()
            .find(|(rn, rg, _)| *rn == n && *rg == g)
            .map(|(_, _, d)| *d)
    })
    .map_err(|e| anyhow!(e))?;
    write_atomic(&args.out.join("ranks.csv"), &report::rank_csv(&entries))?;

    println!("{}", report::rank_csv(&entries));
    Ok(0)
}

fn cmd_render(args: &RenderArgs) -> Result<i32> {
    let cfg = load_certificate(&args.certificate)?;
    let tau = args.tau.unwrap_or_else(|| tau_contact(&cfg.shape));
    let svg = report::render_svg(&cfg, args.cells_x, args.cells_y, tau);
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| args.certificate.with_extension("svg"));
    write_atomic(&out, &svg)?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_ratios(args: &RatiosArgs) -> Result<i32> {
    let lookup = |n: u32, g: GroupName| -> Option<f64> {
        let path = args.results.join(format!("{n}gon_{g}.json"));
        let raw = fs::read_to_string(path).ok()?;
        let summary: SearchSummary = serde_json::from_str(&raw).ok()?;
        Some(summary.density)
    };
    let (outcomes, missing) = report::check_ratios(lookup);
    if !missing.is_empty() {
        return Err(usage(format!(
            "missing ratio inputs in {}: {}",
            args.results.display(),
            missing.join(", ")
        )));
    }
    print!("{}", report::ratios_table(&outcomes));
    Ok(0)
}

/// Execute a parsed command, returning the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Search(args) => cmd_search(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Table(args) => cmd_table(args),
        Command::Render(args) => cmd_render(args),
        Command::Ratios(args) => cmd_ratios(args),
    }
}

/// Map an error to its exit code: 2 for usage-class errors, 1 otherwise.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.is::<UsageError>() {
        2
    } else {
        1
    }
}
