mod cache;
mod render;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use skein::complex::{simplify, BigradedDims, StoredComplex};
use skein::diagram::{Diagram, Movie, TangleWord};
use skein::lasagna::{self, KirbyPresentation, LasagnaResult, Mode, CONVENTION};
use skein::onehandle;
use skein::Field;

use cache::Cache;

#[derive(Parser)]
#[command(name = "skein", version, about = "Khovanov homology and skein lasagna module presentations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Coefficient field: Q, or a prime such as 2 or F3
    #[arg(long, global = true)]
    field: Option<String>,
    /// Largest cable size r
    #[arg(long, global = true)]
    rmax: Option<usize>,
    /// Quantum window as MIN:MAX
    #[arg(long, global = true, allow_hyphen_values = true)]
    window: Option<String>,
    /// Box |alpha| <= bound for homology class representatives
    #[arg(long, global = true)]
    alpha_bound: Option<i64>,
    /// Largest braid power for the K0 bound
    #[arg(long, global = true)]
    braid_max: Option<usize>,
    #[arg(long, global = true, env = "SKEIN_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Khovanov homology of a closed diagram (word file, or PD code if *.pd)
    Kh { file: PathBuf },
    /// C_k decomposition of a (1,1)-tangle
    Decompose {
        file: PathBuf,
        /// label at which a closed PD diagram is cut open
        #[arg(long, default_value_t = 1)]
        cut: u32,
    },
    /// Trace classes of the category of tangles with 2p boundary points
    Hh0 {
        #[arg(long, default_value_t = 1)]
        points: usize,
    },
    /// Lefschetz trace of a movie from a closed diagram to itself
    Trace {
        file: PathBuf,
        /// `identity` or a file of frames
        #[arg(long, default_value = "identity")]
        movie: String,
    },
    /// Cabled module of K for the class alpha of the Kirby file, no 3-handles
    CableModule { file: PathBuf },
    /// Full handle pipeline on a Kirby file
    Pipeline { file: PathBuf },
    /// Khovanov dimensions of L with n full twists in place of each 1-handle
    RwProbe {
        file: PathBuf,
        /// largest twist count; counts 0..=N are probed
        #[arg(long, default_value_t = 3)]
        max_twists: i64,
        /// raw Khovanov bidegree H,Q; all bidegrees when omitted
        #[arg(long, allow_hyphen_values = true)]
        bidegree: Option<String>,
    },
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_pair(s: &str, sep: &[char]) -> anyhow::Result<(i32, i32)> {
    let parts: Vec<&str> = s.split(sep).map(str::trim).collect();
    if parts.len() != 2 {
        bail!("expected two integers in {s:?}");
    }
    Ok((parts[0].parse()?, parts[1].parse()?))
}

fn field(cli: &Cli) -> anyhow::Result<Field> {
    Ok(Field::parse(cli.field.as_deref().unwrap_or("Q"))?)
}

fn diagram(path: &Path, text: &str) -> anyhow::Result<Diagram> {
    if path.extension().is_some_and(|e| e == "pd") {
        Ok(Diagram::from_pd(text)?)
    } else {
        Ok(TangleWord::parse(text)?.diagram()?)
    }
}

fn cache(cli: &Cli) -> anyhow::Result<Option<Cache>> {
    cli.cache_dir.as_deref().map(Cache::open).transpose()
}

fn emit(cli: &Cli, table: String, value: serde_json::Value) {
    match cli.format {
        Format::Table => print!("{table}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).unwrap()),
    }
}

fn cmd_kh(cli: &Cli, file: &Path) -> anyhow::Result<()> {
    let text = read(file)?;
    let f = field(cli)?;
    let cache = cache(cli)?;
    let key = Cache::key(&["kh", &f.to_string(), &file.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_default(), &text]);
    let stored = cache.as_ref().and_then(|c| c.get::<StoredComplex>(&key));
    let minimal = match stored {
        Some(s) => s.load()?,
        None => {
            let d = diagram(file, &text)?;
            if !d.boundary().is_empty() {
                bail!("expected a closed diagram, found {} boundary points", d.boundary().len());
            }
            let m = simplify(&d.khovanov_complex(f), false).complex;
            if let Some(c) = &cache {
                c.put(&key, &StoredComplex::from(&m))?;
            }
            m
        }
    };
    let dims = minimal.homology_table()?;
    let poly = render::poincare(&dims);
    let table = format!("{}{poly}", render::table(&dims, "q", None));
    emit(cli, table, json!({"convention": CONVENTION, "command": "kh", "field": f.to_string(), "dims": render::dims_json(&dims, "q", None), "poincare": poly.trim_end()}));
    Ok(())
}

fn cmd_decompose(cli: &Cli, file: &Path, cut: u32) -> anyhow::Result<()> {
    let text = read(file)?;
    let f = field(cli)?;
    let patterns = if file.extension().is_some_and(|e| e == "pd") {
        let (long, _) = Diagram::from_pd(&text)?.cut(cut)?;
        onehandle::decompose_diagram(&long, f)?.patterns()
    } else {
        onehandle::decompose_11(&TangleWord::parse(&text)?, f)?
    };
    let mut by_k: BTreeMap<usize, usize> = BTreeMap::new();
    for p in &patterns {
        *by_k.entry(p.k).or_insert(0) += p.multiplicity;
    }
    let summary: Vec<String> = by_k.iter().map(|(k, m)| format!("C{k} x{m}")).collect();
    let mut table = format!("{}\n", summary.join(", "));
    for p in &patterns {
        table.push_str(&format!("{p}\n"));
    }
    let closure = onehandle::closure_homology(&patterns);
    table.push_str(&render::poincare(&closure));
    let pats: Vec<_> = patterns.iter().map(|p| json!({"k": p.k, "h": p.hom_shift, "q": p.q_shift, "multiplicity": p.multiplicity})).collect();
    emit(cli, table, json!({"convention": CONVENTION, "command": "decompose", "field": f.to_string(), "patterns": pats, "closure": render::dims_json(&closure, "q", None)}));
    Ok(())
}

fn cmd_hh0(cli: &Cli, points: usize) -> anyhow::Result<()> {
    let f = field(cli)?;
    if points >= 2 {
        let cert = onehandle::k0_lower_bound(points, cli.braid_max.unwrap_or(3), f)?;
        let table = format!("lower bound {} at (0,0) from {} braid powers\n", cert.bound, cert.entries.len());
        emit(cli, table, json!({"convention": CONVENTION, "command": "hh0", "points": points, "lower_bound": cert.bound}));
        return Ok(());
    }
    let classes = if points == 1 { onehandle::hh0_two_point(f)? } else { onehandle::hh0_empty(f)? };
    let mut table = format!("{} classes\n", classes.len());
    for c in &classes {
        table.push_str(&format!("{}\t{}\t{}\n", c.label, c.bidegree.0, c.bidegree.1));
    }
    let list: Vec<_> = classes.iter().map(|c| json!({"label": c.label.to_string(), "i": c.bidegree.0, "j": c.bidegree.1})).collect();
    emit(cli, table, json!({"convention": CONVENTION, "command": "hh0", "points": points, "classes": list}));
    Ok(())
}

fn cmd_trace(cli: &Cli, file: &Path, movie: &str) -> anyhow::Result<()> {
    let f = field(cli)?;
    let word = TangleWord::parse(&read(file)?)?;
    let frames = if movie == "identity" { vec![] } else { Movie::parse_frames(&read(Path::new(movie))?)? };
    let value = onehandle::lefschetz_trace(&Movie { start: word, frames }, f)?;
    emit(cli, format!("{value}\n"), json!({"convention": CONVENTION, "command": "trace", "field": f.to_string(), "trace": value.to_string()}));
    Ok(())
}

/// Command-line overrides of the `[compute]` section.
fn kirby(cli: &Cli, file: &Path) -> anyhow::Result<(KirbyPresentation, String)> {
    let text = read(file)?;
    let mut kp = KirbyPresentation::parse(&text).with_context(|| format!("in {}", file.display()))?;
    let c = &mut kp.compute;
    if let Some(fs) = &cli.field {
        c.field = Field::parse(fs)?;
    }
    if let Some(r) = cli.rmax {
        c.r_max = r;
        if cli.alpha_bound.is_none() {
            c.alpha_bound = r as i64;
        }
    }
    if let Some(w) = &cli.window {
        let (lo, hi) = parse_pair(w, &[':', ','])?;
        if lo > hi {
            bail!("window {lo}:{hi} is empty");
        }
        c.window = (lo, hi);
    }
    if let Some(b) = cli.alpha_bound {
        c.alpha_bound = b;
    }
    if let Some(b) = cli.braid_max {
        c.braid_max = b;
    }
    let params = format!("{:?}", kp.compute);
    Ok((kp, format!("{text}\n{params}")))
}

#[derive(Serialize, Deserialize)]
struct StoredResult {
    dims: Vec<((i32, i32), usize)>,
    stable: Vec<((i32, i32), bool)>,
    mode: String,
    dropped: usize,
    notes: Vec<String>,
}

fn render_lasagna(cli: &Cli, command: &str, kp: &KirbyPresentation, r: &StoredResult) {
    let dims: BigradedDims = r.dims.iter().copied().collect();
    let stable: BTreeMap<(i32, i32), bool> = r.stable.iter().copied().collect();
    let poly = render::poincare(&dims);
    let mut table = format!(
        "# {command}: convention {CONVENTION}, field {}, mode {}, r_max {}, window {}:{}\n",
        kp.compute.field, r.mode, kp.compute.r_max, kp.compute.window.0, kp.compute.window.1
    );
    for n in &r.notes {
        table.push_str(&format!("# {n}\n"));
    }
    if r.dropped > 0 {
        table.push_str(&format!("# {} relations left the truncation\n", r.dropped));
    }
    table.push_str(&render::table(&dims, "j", Some(&stable)));
    table.push_str(&poly);
    let value = json!({
        "convention": CONVENTION,
        "command": command,
        "field": kp.compute.field.to_string(),
        "mode": r.mode,
        "r_max": kp.compute.r_max,
        "window": [kp.compute.window.0, kp.compute.window.1],
        "dims": render::dims_json(&dims, "j", Some(&stable)),
        "dropped_relations": r.dropped,
        "notes": r.notes,
        "poincare": poly.trim_end(),
    });
    emit(cli, table, value);
}

fn cmd_lasagna(cli: &Cli, file: &Path, command: &str) -> anyhow::Result<()> {
    let (kp, content) = kirby(cli, file)?;
    let cache = cache(cli)?;
    let key = Cache::key(&[command, &content]);
    let hit = cache.as_ref().and_then(|c| c.get::<StoredResult>(&key));
    let result = match hit {
        Some(r) => r,
        None => {
            let r: LasagnaResult = if command == "pipeline" { lasagna::full_pipeline(&kp)? } else { lasagna::cable_module(&kp)? };
            let mode = match r.mode {
                Mode::Exact => "exact",
                Mode::Truncated => "truncated",
                Mode::LowerBound => "lower-bound",
            };
            let stored = StoredResult {
                dims: r.dims.into_iter().collect(),
                stable: r.stable.into_iter().collect(),
                mode: mode.into(),
                dropped: r.dropped,
                notes: r.notes,
            };
            if let Some(c) = &cache {
                c.put(&key, &stored)?;
            }
            stored
        }
    };
    render_lasagna(cli, command, &kp, &result);
    Ok(())
}

fn cmd_probe(cli: &Cli, file: &Path, max: i64, bidegree: Option<&str>) -> anyhow::Result<()> {
    let (kp, _) = kirby(cli, file)?;
    if max < 0 {
        bail!("twist counts must be nonnegative");
    }
    let steps: Vec<Vec<i64>> = (0..=max).map(|n| vec![n; kp.m]).collect();
    let mut table = String::from("# raw Khovanov bidegrees (h, q) of L(n), no grading shift applied\n");
    let mut rows = vec![];
    match bidegree {
        Some(b) => {
            let bd = parse_pair(b, &[','])?;
            let dims = lasagna::rw_probe(&kp, &steps, bd)?;
            table.push_str("n\tdim\n");
            for (n, d) in dims.iter().enumerate() {
                table.push_str(&format!("{n}\t{d}\n"));
                rows.push(json!({"n": n, "h": bd.0, "q": bd.1, "dim": d}));
            }
        }
        None => {
            for (n, s) in steps.iter().enumerate() {
                let w = lasagna::twisted_link(&kp, s)?;
                let dims = if w.gens.is_empty() {
                    BigradedDims::from([((0, 0), 1)])
                } else {
                    w.diagram()?.khovanov_complex(kp.compute.field).homology_table()?
                };
                table.push_str(&format!("n={n}\n{}", render::poincare(&dims)));
                rows.push(json!({"n": n, "dims": render::dims_json(&dims, "q", None)}));
            }
        }
    }
    emit(cli, table, json!({"convention": CONVENTION, "command": "rw-probe", "field": kp.compute.field.to_string(), "rows": rows}));
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Kh { file } => cmd_kh(cli, file),
        Command::Decompose { file, cut } => cmd_decompose(cli, file, *cut),
        Command::Hh0 { points } => cmd_hh0(cli, *points),
        Command::Trace { file, movie } => cmd_trace(cli, file, movie),
        Command::CableModule { file } => cmd_lasagna(cli, file, "cable-module"),
        Command::Pipeline { file } => cmd_lasagna(cli, file, "pipeline"),
        Command::RwProbe { file, max_twists, bidegree } => cmd_probe(cli, file, *max_twists, bidegree.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
