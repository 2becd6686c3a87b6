//! Argument parsing and dispatch for the `stbranch` binary.
//!
//! Exit codes: 0 when every verification passes, 1 when one fails (the
//! report is still written), 2 for usage or configuration errors.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use stbranch_core::branch::{self, AnalysisOptions, BranchReport, SweepOutcome};
use stbranch_core::cache::TableCache;
use stbranch_core::groups::Family;
use stbranch_core::pairs::{build_galois_pair, Caps};
use stbranch_core::report::{self, Format};
use stbranch_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable naming a cache directory when `--cache-dir` is absent.
pub const CACHE_ENV: &str = "STBRANCH_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "stbranch",
    version,
    about = "Steinberg branching for Galois pairs over finite fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the pair and summarize its orbits on the projective line.
    Pair(PairArgs),
    /// Compute the character table of H and its orthogonality certificate.
    Chartable(PairArgs),
    /// Run every verification; the exit code reflects the outcome.
    Verify(PairArgs),
    /// Run everything and emit the full report.
    Report(PairArgs),
    /// Verify many pairs at once.
    Sweep(SweepArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed for the eigenspace-splitting random combinations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use this prime instead of the automatically chosen one.
    #[arg(long)]
    ell: Option<u64>,
    /// Character-table cache directory (falls back to $STBRANCH_CACHE_DIR).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Output format: json, csv or md.
    #[arg(long, default_value = "json")]
    format: Format,
    /// Largest q accepted.
    #[arg(long)]
    max_q: Option<u32>,
    /// Largest group order enumerated.
    #[arg(long)]
    max_order: Option<u64>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    threads: Option<usize>,
    /// Write the output here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include wall-clock timings and cache status in the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Debug, Clone)]
struct PairArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    n: u32,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    /// Comma-separated families.
    #[arg(long, value_delimiter = ',', default_value = "pgl2,sl2")]
    families: Vec<Family>,
    /// Comma-separated odd prime powers.
    #[arg(long = "q", value_delimiter = ',', required = true)]
    qs: Vec<u32>,
    #[command(flatten)]
    common: Common,
}

/// Exit code for a library error: bad input is a usage error, anything
/// raised during computation counts as a failed verification.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotPrime(_)
        | Error::EvenCharacteristic(_)
        | Error::SizeCapExceeded { .. }
        | Error::InvalidInput(_)
        | Error::NotPrimePower(_) => EXIT_USAGE,
        _ => EXIT_VERIFICATION,
    }
}

impl Common {
    fn options(&self) -> AnalysisOptions {
        let mut caps = Caps::default();
        if let Some(q) = self.max_q {
            caps.max_q = q;
        }
        if let Some(o) = self.max_order {
            caps.max_group_order = o;
        }
        let cache_dir = self
            .cache_dir
            .clone()
            .or_else(|| std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from));
        AnalysisOptions {
            seed: self.seed,
            ell_override: self.ell,
            caps,
            cache: cache_dir.map(TableCache::new),
            record_timings: self.timings,
        }
    }

    fn emit(&self, text: &str) -> Result<(), i32> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| {
                eprintln!("error: cannot write {}: {e}", path.display());
                EXIT_USAGE
            }),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|_| EXIT_VERIFICATION)
            }
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let threads = match &cli.command {
        Command::Pair(a) | Command::Chartable(a) | Command::Verify(a) | Command::Report(a) => a.common.threads,
        Command::Sweep(a) => a.common.threads,
    };
    if threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return EXIT_USAGE;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    pool.install(|| dispatch(cli.command))
}

fn dispatch(command: Command) -> i32 {
    let result = match command {
        Command::Pair(a) => cmd_pair(&a),
        Command::Chartable(a) => cmd_chartable(&a),
        Command::Verify(a) => cmd_report(&a, "verify"),
        Command::Report(a) => cmd_report(&a, "report"),
        Command::Sweep(a) => cmd_sweep(&a),
    };
    result.unwrap_or_else(|code| code)
}

fn fail(e: Error) -> i32 {
    eprintln!("error: {e}");
    exit_code(&e)
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

#[derive(Serialize)]
struct OrbitLine {
    index: usize,
    basepoint: String,
    size: usize,
    stabilizer_order: usize,
    stabilizer_cyclic: bool,
}

#[derive(Serialize)]
struct PairOverview {
    family: Family,
    p: u32,
    n: u32,
    q: u32,
    modulus: Vec<u32>,
    delta: String,
    h_order: usize,
    x_size: usize,
    y_size: usize,
    omega_size: usize,
    y_orbit_count: usize,
    r: usize,
    orbits: Vec<OrbitLine>,
}

fn cmd_pair(a: &PairArgs) -> Result<i32, i32> {
    let opts = a.common.options();
    let pair = build_galois_pair(a.family, a.p, a.n, &opts.caps).map_err(fail)?;
    let t = pair.tower();
    let orbits = pair
        .omega_orbits()
        .iter()
        .enumerate()
        .map(|(i, o)| OrbitLine {
            index: i + 1,
            basepoint: branch::format_point(&pair, o.basepoint),
            size: o.points.len(),
            stabilizer_order: o.stabilizer.order(),
            stabilizer_cyclic: o.stabilizer.is_cyclic(pair.h()),
        })
        .collect();
    let ov = PairOverview {
        family: pair.family(),
        p: t.p(),
        n: t.n(),
        q: t.q(),
        modulus: t.modulus().to_vec(),
        delta: t.format_fq(t.delta()),
        h_order: pair.h().order(),
        x_size: pair.x().len(),
        y_size: pair.y().len(),
        omega_size: pair.omega().len(),
        y_orbit_count: pair.y_orbit_count(),
        r: pair.r(),
        orbits,
    };
    let text = match a.common.format {
        Format::Json => report::to_canonical_json(&ov),
        Format::Csv => {
            let mut s = String::from("index,basepoint,size,stabilizer_order,stabilizer_cyclic\n");
            for o in &ov.orbits {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    o.index, o.basepoint, o.size, o.stabilizer_order, o.stabilizer_cyclic
                );
            }
            s
        }
        Format::Markdown => {
            let mut s = format!(
                "# {} over F_{}\n\n|H| = {}, |X| = {}, |Y| = {}, |Omega| = {}, r = {}\n\n| i | basepoint | size | |K_i| | cyclic |\n|---|---|---|---|---|\n",
                ov.family, ov.q * ov.q, ov.h_order, ov.x_size, ov.y_size, ov.omega_size, ov.r
            );
            for o in &ov.orbits {
                let _ = writeln!(
                    s,
                    "| {} | {} | {} | {} | {} |",
                    o.index, o.basepoint, o.size, o.stabilizer_order, o.stabilizer_cyclic
                );
            }
            s
        }
    };
    a.common.emit(&text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct TableRow {
    label: String,
    degree: u64,
    residues: Vec<u64>,
}

#[derive(Serialize)]
struct TableOverview {
    family: Family,
    q: u32,
    ell: u64,
    exponent: u64,
    zeta: u64,
    seed: u64,
    class_sizes: Vec<u64>,
    class_orders: Vec<u32>,
    rows: Vec<TableRow>,
    trivial_label: String,
    steinberg_label: String,
    orthogonality: bool,
}

fn cmd_chartable(a: &PairArgs) -> Result<i32, i32> {
    let opts = a.common.options();
    let prepared = branch::prepare(a.family, a.p, a.n, &opts).map_err(fail)?;
    warn_all(&prepared.warnings);
    let (cd, table) = (&prepared.cd, &prepared.table);
    let certified = table.verify(cd);
    if let Err(e) = &certified {
        eprintln!("error: {e}");
    }
    let ov = TableOverview {
        family: a.family,
        q: prepared.pair.q(),
        ell: table.ctx.ell,
        exponent: table.ctx.exponent,
        zeta: table.ctx.zeta,
        seed: table.ctx.seed,
        class_sizes: cd.sizes().to_vec(),
        class_orders: (0..cd.num_classes()).map(|k| cd.order(k)).collect(),
        rows: (0..table.num_rows())
            .map(|i| TableRow {
                label: table.label(i),
                degree: table.degrees[i],
                residues: table.rows[i].values.clone(),
            })
            .collect(),
        trivial_label: table.label(table.trivial),
        steinberg_label: table.steinberg.map(|i| table.label(i)).unwrap_or_default(),
        orthogonality: certified.is_ok(),
    };
    let text = match a.common.format {
        Format::Json => report::to_canonical_json(&ov),
        Format::Csv | Format::Markdown => {
            let md = a.common.format == Format::Markdown;
            let sep = if md { " | " } else { "," };
            let mut s = String::new();
            if md {
                let _ = writeln!(
                    s,
                    "# Character table of {} over F_{} (mod {})\n",
                    ov.family, ov.q, ov.ell
                );
            }
            let classes: Vec<String> = (0..ov.class_sizes.len()).map(|k| format!("c{:02}", k + 1)).collect();
            let wrap = |cells: Vec<String>| {
                if md {
                    format!("| {} |", cells.join(sep))
                } else {
                    cells.join(sep)
                }
            };
            let mut head = vec!["label".to_string(), "degree".into()];
            head.extend(classes);
            let width = head.len();
            let _ = writeln!(s, "{}", wrap(head));
            if md {
                let _ = writeln!(s, "|{}", "---|".repeat(width));
            }
            for r in &ov.rows {
                let mut cells = vec![r.label.clone(), r.degree.to_string()];
                cells.extend(r.residues.iter().map(u64::to_string));
                let _ = writeln!(s, "{}", wrap(cells));
            }
            s
        }
    };
    a.common.emit(&text)?;
    Ok(if certified.is_ok() { EXIT_OK } else { EXIT_VERIFICATION })
}

/// Builds the report for one pair; shared by `verify` and `report`.
pub fn build_report(
    family: Family,
    p: u32,
    n: u32,
    opts: &AnalysisOptions,
    command: &str,
) -> stbranch_core::Result<(BranchReport, Vec<String>)> {
    let (mut report, warnings) = branch::analyze(family, p, n, opts)?;
    report.meta.command = Some(command.to_string());
    Ok((report, warnings))
}

fn cmd_report(a: &PairArgs, command: &str) -> Result<i32, i32> {
    let opts = a.common.options();
    let (rep, warnings) = build_report(a.family, a.p, a.n, &opts, command).map_err(fail)?;
    warn_all(&warnings);
    a.common.emit(&report::render(&rep, a.common.format))?;
    if rep.all_ok() {
        Ok(EXIT_OK)
    } else {
        let failed: Vec<&str> = rep
            .rows
            .iter()
            .filter(|r| !r.ok && !r.trivial)
            .map(|r| r.label.as_str())
            .collect();
        eprintln!("verification failed: checks {:?}, rows {failed:?}", rep.checks);
        Ok(EXIT_VERIFICATION)
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<i32, i32> {
    let opts = a.common.options();
    let out: SweepOutcome = branch::sweep(&a.families, &a.qs, &opts);
    warn_all(&out.warnings);
    for e in &out.entries {
        if let Some(err) = &e.error {
            eprintln!("error: {} q={}: {err}", e.family, e.q);
        }
    }
    a.common.emit(&report::render_sweep(&out, a.common.format))?;
    Ok(if out.summary.all_ok { EXIT_OK } else { EXIT_VERIFICATION })
}
