use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gwflop::degeneration::EnumerationCaps;

use gwflop_cli::commands::{self, DegenerationKind};
use gwflop_cli::geometry::Geometry;
use gwflop_cli::table::read_table;
use gwflop_cli::text::coords;

/// Exact Gromov-Witten bookkeeping for standard flops and extremal transitions.
#[derive(Parser, Debug)]
#[command(name = "gwflop", version)]
struct Cli {
    /// Print what was read and what was rejected on stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the admissible triples of a degeneration for (g, n, β).
    Enumerate {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "blowup")]
        degeneration: Kind,
        #[arg(long, default_value_t = 0)]
        genus: u32,
        #[arg(long, default_value_t = 0)]
        points: usize,
        /// Curve class as comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[command(flatten)]
        caps: Caps,
    },
    /// Carry a GW table across the flop, in whichever direction its lattice dictates.
    TransformFlop {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        table: PathBuf,
    },
    /// Compute the invariants of the smoothing from a table on X.
    TransformTransition {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        table: PathBuf,
        /// Only compute this class of the smoothing.
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
    },
    /// Verify the identities listed in a checks file.
    Check {
        #[command(flatten)]
        io: Io,
        /// Tables, one per lattice; repeat the flag.
        #[arg(long)]
        table: Vec<PathBuf>,
        #[arg(long)]
        checks: PathBuf,
        #[command(flatten)]
        caps: Caps,
    },
    /// Normal form of a polynomial in a declared ring.
    RingNf {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        ring: String,
        expr: String,
    },
    /// Expand a Novikov series up to a degree cutoff.
    SeriesTruncate {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        cutoff: i64,
        /// Degree functional; defaults to the lattice's grading.
        #[arg(long)]
        ample: Option<String>,
        series: String,
    },
}

#[derive(Args, Debug)]
struct Io {
    #[arg(long)]
    geometry: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Caps {
    #[arg(long, default_value_t = 3)]
    max_vertices: usize,
    #[arg(long, default_value_t = 2)]
    max_genus: u32,
    #[arg(long, default_value_t = 3)]
    max_weight: u32,
}

impl Caps {
    fn build(&self) -> anyhow::Result<EnumerationCaps> {
        Ok(EnumerationCaps::new(self.max_vertices, self.max_genus, self.max_weight)?)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Blowup,
    Conifold,
}

impl From<Kind> for DegenerationKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Blowup => DegenerationKind::Blowup,
            Kind::Conifold => DegenerationKind::Conifold,
        }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_geometry(io: &Io) -> anyhow::Result<Geometry> {
    Geometry::from_text(&read(&io.geometry)?).with_context(|| format!("in {}", io.geometry.display()))
}

fn class(text: &str) -> anyhow::Result<Vec<i64>> {
    coords(0, text).map_err(|e| anyhow::anyhow!(e.message))
}

fn emit(io: &Io, text: &str) -> anyhow::Result<()> {
    match &io.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report_rejections(verbose: bool, rejected: &[String]) {
    if verbose || !rejected.is_empty() {
        eprintln!("{} entries rejected", rejected.len());
    }
    for r in rejected {
        eprintln!("{r}");
    }
}

/// Returns whether every requested check passed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Enumerate { io, degeneration, genus, points, beta, caps } => {
            let g = load_geometry(&io)?;
            emit(&io, &commands::enumerate(&g, degeneration.into(), genus, points, &class(&beta)?, &caps.build()?)?)?;
        }
        Command::TransformFlop { io, table } => {
            let g = load_geometry(&io)?;
            let t = read_table(&read(&table)?, &g).with_context(|| format!("in {}", table.display()))?;
            let (text, rejected) = commands::transform_flop(&g, &t)?;
            report_rejections(verbose, &rejected);
            emit(&io, &text)?;
        }
        Command::TransformTransition { io, table, beta } => {
            let g = load_geometry(&io)?;
            let t = read_table(&read(&table)?, &g).with_context(|| format!("in {}", table.display()))?;
            let beta = beta.as_deref().map(class).transpose()?;
            let (text, rejected) = commands::transform_transition(&g, &t, beta.as_deref())?;
            report_rejections(verbose, &rejected);
            emit(&io, &text)?;
        }
        Command::Check { io, table, checks, caps } => {
            let g = load_geometry(&io)?;
            let mut tables = BTreeMap::new();
            for path in &table {
                let t = read_table(&read(path)?, &g).with_context(|| format!("in {}", path.display()))?;
                let name = t.lattice().name().to_string();
                if verbose {
                    eprintln!("{}: {} entries on {name}", path.display(), t.len());
                }
                if tables.insert(name.clone(), t).is_some() {
                    bail!("two tables on `{name}`");
                }
            }
            let list = commands::parse_checks(&read(&checks)?).with_context(|| format!("in {}", checks.display()))?;
            let report = commands::run_checks(&g, &tables, &list, &caps.build()?)?;
            emit(&io, &report.text)?;
            return Ok(report.failed == 0);
        }
        Command::RingNf { io, ring, expr } => {
            let g = load_geometry(&io)?;
            emit(&io, &commands::ring_normal_form(&g, &ring, &expr)?)?;
        }
        Command::SeriesTruncate { io, lattice, cutoff, ample, series } => {
            let g = load_geometry(&io)?;
            let ample = ample.as_deref().map(class).transpose()?;
            emit(&io, &commands::series_truncate(&g, &lattice, &series, cutoff, ample.as_deref())?)?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
