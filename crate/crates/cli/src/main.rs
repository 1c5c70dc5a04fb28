use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cayley_egp::curvature::{curvature_report, DEFAULT_IDLENESS};
use cayley_egp::dynamics::{mixing_time, MixingOptions, Starts};
use cayley_egp::io::{self, Format, GraphJson};
use cayley_egp::propagation::{
    sensitivity_probe, EgpModel, EgpSchedule, FeatureMatrix, Parity, ProbeOptions,
};
use cayley_egp::spectral::{analyze, EigenMode};
use cayley_egp::{build_cayley, generators, overlay_for, Graph};

const THREADS_ENV: &str = "EGP_THREADS";

#[derive(Parser)]
#[command(name = "egp", version, about = "Cayley expander graphs and expander propagation")]
struct Cli {
    /// Worker threads (defaults to $EGP_THREADS, then the core count).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// Where a graph comes from: a file, or `kind:size` with kind one of
/// path, cycle, complete, barbell, tree, cayley.
#[derive(clap::Args)]
struct GraphArg {
    graph: String,
    /// File format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Edgelist,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Edgelist => Format::Edgelist,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    /// Alternate, input graph first.
    Egp,
    /// Alternate, Cayley graph first.
    EgpCayleyFirst,
    /// Input graph only.
    Input,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Iterative,
}

#[derive(Subcommand)]
enum Command {
    /// Build a Cayley graph of SL(2, Z_n), or a slice sized for N nodes.
    #[command(group(ArgGroup::new("size").required(true).args(["n", "nodes"])))]
    Build {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Write a synthetic graph, e.g. `generate barbell:10 --out b.txt`.
    Generate {
        spec: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
    /// Spectral gap, Cheeger bounds, diameter and the Mohar bound as JSON.
    Analyze {
        #[command(flatten)]
        input: GraphArg,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-edge balanced Forman and Ollivier curvature.
    Curvature {
        #[command(flatten)]
        input: GraphArg,
        #[arg(long, default_value_t = DEFAULT_IDLENESS)]
        idleness: f64,
        /// Per-edge CSV instead of the JSON report.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lazy random walk mixing time.
    Mixing {
        #[command(flatten)]
        input: GraphArg,
        /// Measure against the degree-proportional distribution on
        /// non-regular graphs instead of refusing them.
        #[arg(long)]
        non_strict: bool,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Start vertices (default: all).
        #[arg(long, value_delimiter = ',')]
        start: Vec<usize>,
        /// Also write the deviation trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Forward pass; writes node features as CSV.
    Propagate {
        #[command(flatten)]
        input: GraphArg,
        /// CSV feature rows; one-hot node degree when omitted.
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        layers: usize,
        /// Output width of each layer, comma separated (one value is reused).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "egp")]
        schedule: ScheduleArg,
        /// Explicit comma-separated layer tags (input, cayley); overrides
        /// --schedule and --layers.
        #[arg(long)]
        tags: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference influence of one node's features on another's output.
    Probe {
        #[command(flatten)]
        input: GraphArg,
        #[arg(long)]
        source: usize,
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 6)]
        layers: usize,
        #[arg(long, value_enum, default_value = "egp")]
        schedule: ScheduleArg,
        #[arg(long)]
        tags: Option<String>,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_values_t = [0u64, 1, 2])]
        seeds: Vec<u64>,
        /// Also run the input-only schedule and report the ratio.
        #[arg(long)]
        compare: bool,
    },
}

/// A report that contradicts a proven bound.
#[derive(Debug)]
struct Inconsistent(String);

impl fmt::Display for Inconsistent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal consistency failure: {}", self.0)
    }
}

impl std::error::Error for Inconsistent {}

fn load_graph(arg: &GraphArg) -> Result<Graph> {
    let path = Path::new(&arg.graph);
    if !path.exists() {
        if let Some(g) = generated(&arg.graph)? {
            return Ok(g);
        }
    }
    io::read_graph(path, arg.format.map(Format::from))
        .with_context(|| format!("reading {}", path.display()))
}

fn generated(spec: &str) -> Result<Option<Graph>> {
    let Some((kind, size)) = spec.split_once(':') else {
        return Ok(None);
    };
    let size: usize = size.parse().with_context(|| format!("bad size in '{spec}'"))?;
    let g = match kind {
        "path" => generators::path(size)?,
        "cycle" => generators::cycle(size)?,
        "complete" => generators::complete(size)?,
        "barbell" => generators::barbell(size)?,
        "tree" => generators::binary_tree(u32::try_from(size)?)?,
        "cayley" => build_cayley(u32::try_from(size)?)?.to_graph(),
        _ => bail!("unknown generator '{kind}'"),
    };
    Ok(Some(g))
}

fn format_for(path: &Path, f: Option<FormatArg>) -> Format {
    f.map(Format::from).unwrap_or_else(|| Format::from_path(path))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn schedule_for(kind: ScheduleArg, layers: usize, tags: Option<&str>) -> Result<EgpSchedule> {
    if let Some(t) = tags {
        return Ok(EgpSchedule::parse_tags(t)?);
    }
    Ok(match kind {
        ScheduleArg::Egp => EgpSchedule::alternating(layers, Parity::InputFirst),
        ScheduleArg::EgpCayleyFirst => EgpSchedule::alternating(layers, Parity::CayleyFirst),
        ScheduleArg::Input => EgpSchedule::input_only(layers),
    })
}

fn read_features(path: &Path) -> Result<FeatureMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| cayley_egp::Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        rows.push(row);
    }
    Ok(FeatureMatrix::from_rows(&rows)?)
}

fn features_csv(h: &FeatureMatrix) -> String {
    let mut out = String::new();
    for row in h.rows() {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ProbeReport {
    source: usize,
    target: usize,
    layers: usize,
    influence: f64,
    relative_influence: f64,
    per_seed: Vec<(u64, f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<Baseline>,
}

#[derive(Serialize)]
struct Baseline {
    influence: f64,
    relative_influence: f64,
    influence_ratio: f64,
    relative_influence_ratio: f64,
}

fn run(cli: Cli) -> Result<()> {
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.parse().with_context(|| format!("{THREADS_ENV}={v}"))?),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }

    match cli.command {
        Command::Build { n, nodes, out, format } => {
            let format = format_for(&out, format);
            let (modulus, graph) = match (n, nodes) {
                (Some(n), None) => {
                    let c = build_cayley(n)?;
                    let g = c.to_graph();
                    match format {
                        Format::Json => io::write_graph_json(&out, &GraphJson::from_cayley(&c))?,
                        Format::Edgelist => io::write_graph(&out, &g, format)?,
                    }
                    (u64::from(n), g)
                }
                (None, Some(k)) => {
                    let s = overlay_for(k)?;
                    let mut doc = GraphJson::from_graph(&s.graph);
                    doc.n = Some(u64::from(s.source_n));
                    match format {
                        Format::Json => io::write_graph_json(&out, &doc)?,
                        Format::Edgelist => io::write_graph(&out, &s.graph, format)?,
                    }
                    (u64::from(s.source_n), s.graph)
                }
                _ => unreachable!("clap enforces exactly one of --n / --nodes"),
            };
            let diameter = graph
                .diameter()
                .map_or_else(|| "inf".to_string(), |d| d.to_string());
            println!(
                "n={modulus} nodes={} edges={} diameter={diameter}",
                graph.num_nodes(),
                graph.num_edges()
            );
        }
        Command::Generate { spec, out, format } => {
            let g = generated(&spec)?.ok_or_else(|| anyhow!("expected kind:size, got '{spec}'"))?;
            io::write_graph(&out, &g, format_for(&out, format))?;
            println!("nodes={} edges={}", g.num_nodes(), g.num_edges());
        }
        Command::Analyze { input, mode, tol, out } => {
            let g = load_graph(&input)?;
            let mode = match mode {
                ModeArg::Auto => EigenMode::Auto,
                ModeArg::Exact => EigenMode::Exact,
                ModeArg::Iterative => EigenMode::Iterative {
                    tol,
                    max_iter: g.num_nodes().max(1000),
                },
            };
            let report = analyze(&g, mode)?;
            emit(out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            if report.diameter > report.mohar_bound {
                return Err(Inconsistent(format!(
                    "diameter {} exceeds bound {}",
                    report.diameter, report.mohar_bound
                ))
                .into());
            }
            if !report.is_consistent() {
                return Err(Inconsistent("Cheeger or conductance sandwich violated".into()).into());
            }
        }
        Command::Curvature { input, idleness, csv, out } => {
            let g = load_graph(&input)?;
            let report = curvature_report(&g, idleness)?;
            let text = if csv {
                report.to_csv()
            } else {
                format!("{}\n", serde_json::to_string_pretty(&report)?)
            };
            emit(out.as_deref(), &text)?;
        }
        Command::Mixing { input, non_strict, max_steps, start, trajectory } => {
            let g = load_graph(&input)?;
            let opts = MixingOptions {
                starts: if start.is_empty() {
                    Starts::AllVertices
                } else {
                    Starts::Vertices(start)
                },
                strict: !non_strict,
                max_steps,
            };
            let r = mixing_time(&g, &opts)?;
            if let Some(p) = trajectory {
                fs::write(&p, r.trajectory_csv()).with_context(|| format!("writing {}", p.display()))?;
            }
            println!("{}", serde_json::to_string_pretty(&serde_json::json!({
                "num_nodes": g.num_nodes(),
                "mixing_time": r.mixing_time,
                "worst_start_deviation": r.worst_start_deviation,
                "stationary": r.stationary,
            }))?);
        }
        Command::Propagate { input, features, layers, dims, seed, schedule, tags, epsilon, out } => {
            let g = load_graph(&input)?;
            let x = match features {
                Some(p) => read_features(&p)?,
                None => FeatureMatrix::degree_one_hot(&g),
            };
            let schedule = schedule_for(schedule, layers, tags.as_deref())?;
            let widths = match dims.as_slice() {
                [] => vec![x.dim(); schedule.len()],
                [d] => vec![*d; schedule.len()],
                ds => ds.to_vec(),
            };
            let mut all = vec![x.dim()];
            all.extend(widths);
            let model = EgpModel::seeded(schedule, &all, epsilon, seed)?;
            let h = model.forward(&x, &g)?;
            emit(out.as_deref(), &features_csv(&h))?;
        }
        Command::Probe { input, source, target, layers, schedule, tags, dim, seeds, compare } => {
            let g = load_graph(&input)?;
            let schedule = schedule_for(schedule, layers, tags.as_deref())?;
            let opts = ProbeOptions {
                dim,
                seeds,
                ..ProbeOptions::default()
            };
            let r = sensitivity_probe(&g, &schedule, source, target, &opts)?;
            let baseline = if compare {
                let b = sensitivity_probe(&g, &EgpSchedule::input_only(schedule.len()), source, target, &opts)?;
                Some(Baseline {
                    influence: b.influence,
                    relative_influence: b.relative_influence,
                    influence_ratio: r.influence / b.influence,
                    relative_influence_ratio: r.relative_influence / b.relative_influence,
                })
            } else {
                None
            };
            let report = ProbeReport {
                source,
                target,
                layers: schedule.len(),
                influence: r.influence,
                relative_influence: r.relative_influence,
                per_seed: r.per_seed,
                baseline,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Inconsistent>().is_some() {
        return 3;
    }
    for cause in err.chain() {
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<cayley_egp::Error>() {
            return match e {
                cayley_egp::Error::Io(_) | cayley_egp::Error::Json(_) | cayley_egp::Error::Parse { .. } => 2,
                cayley_egp::Error::NoConvergence(_) | cayley_egp::Error::NonFinite(_) => 3,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
