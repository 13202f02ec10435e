use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use netcascade::edgelist::{read_edge_list, write_edge_list, LoadedGraph};
use netcascade::epidemic::sir_command;
use netcascade::graphcmd::{graph_command, LAYER_HEADER};
use netcascade::report::{lever_report, run_scenario, ANALYZE_HEADER, LEVER_HEADER};
use netcascade::scenario::ScenarioSpec;
use netcascade::simulate::{simulate_command, SIM_HEADER};
use netcascade::sweep::{sweep_grid, Axis, SweepSpec, DEFAULT_ROW_CAP};
use netcascade::{load_scenario, presets, write_csv, CliError, CliResult};
use netcascade_core::graph::{generate_graph, GraphFamily, SeedSpec};
use netcascade_core::sim::SimConfig;
use netcascade_core::sir::SirParams;
use netcascade_core::DEFAULT_CRITICAL_TOLERANCE;

/// Network-amplified impact: closed forms, graphs, simulation and SIR.
///
/// SCENARIO is a scenario file path or `preset:NAME` (see `presets`).
#[derive(Debug, Parser)]
#[command(name = "netcascade", version)]
struct Cli {
    /// Write CSV to PATH (`-` for stdout) instead of the table.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Half-width of the critical band around r = 1.
    #[arg(long, global = true, default_value_t = DEFAULT_CRITICAL_TOLERANCE)]
    tolerance: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Totals, regime, hop table and capture shares for one scenario.
    Analyze { scenario: String },
    /// Grid over parameters, one CSV row per point (stdout unless --csv).
    Sweep {
        scenario: String,
        /// name=start:stop:count or name=v1,v2,... ; repeat for more axes.
        #[arg(long = "axis", required = true, value_name = "AXIS")]
        axes: Vec<Axis>,
        #[arg(long, default_value_t = DEFAULT_ROW_CAP)]
        max_rows: u64,
    },
    /// Values of b, alpha and q that bring r to 1, and a depth cap.
    Levers {
        scenario: String,
        /// Largest acceptable multiplier M.
        #[arg(long)]
        budget: Option<f64>,
    },
    /// Monte Carlo estimate compared with the analytic total.
    Simulate {
        scenario: String,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// Agents affected per trial before it is truncated.
        #[arg(long, default_value_t = SimConfig::DEFAULT_CAP)]
        cap: u64,
    },
    /// Walk-sum total and Neumann margin on an edge-list network.
    Graph {
        scenario: String,
        #[arg(long)]
        graph_file: PathBuf,
        #[arg(long)]
        seed_node: usize,
    },
    /// SIR epidemic with fixed-step RK4.
    Sir {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        population: f64,
        /// Initially infectious; everyone else starts susceptible.
        #[arg(long)]
        i0: f64,
        #[arg(long, default_value_t = 160.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        /// Behavioural ratio to compare with R0.
        #[arg(long)]
        behavioral_r: Option<f64>,
    },
    /// List shipped scenarios, or print one.
    Presets { name: Option<String> },
    /// Write a synthetic network as an edge list.
    GenGraph {
        #[arg(value_enum)]
        family: Family,
        /// Node count (er, ba, complete, cycle) or leaves (star).
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Edge probability (er).
        #[arg(long, default_value_t = 0.05)]
        p: f64,
        /// Attachments per new node (ba).
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Children per node (tree).
        #[arg(long, default_value_t = 2)]
        b: u32,
        /// Levels below the root (tree).
        #[arg(long, default_value_t = 3)]
        depth: u32,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Output file; stdout when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Tree,
    Er,
    Ba,
    Complete,
    Cycle,
    Star,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn print(text: &str) -> CliResult<()> {
    io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e))
}

fn warn_graph(g: &LoadedGraph) {
    for w in g.warnings() {
        eprintln!("warning: {w}");
    }
}

fn scenario_graph(spec: &ScenarioSpec, base: Option<&Path>) -> CliResult<Option<(LoadedGraph, SeedSpec)>> {
    let loaded = spec.load_graph(base)?;
    if let Some((g, _)) = &loaded {
        warn_graph(g);
    }
    Ok(loaded)
}

fn run(cli: Cli) -> CliResult<u8> {
    let tol = cli.tolerance;
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::domain("tolerance", None, "must be a finite real >= 0"));
    }
    let csv = cli.csv.as_deref();
    match cli.command {
        Command::Analyze { scenario } => {
            let (spec, base) = load_scenario(&scenario)?;
            let graph = scenario_graph(&spec, base.as_deref())?;
            let a = run_scenario(&spec, graph.as_ref().map(|(g, s)| (&g.graph, *s)), tol)?;
            match csv {
                Some(path) => write_csv(path, ANALYZE_HEADER, &[a.csv_record()])?,
                None => print(&a.render())?,
            }
            if a.overflowed() {
                eprintln!("error: total overflows the floating range; see the overflow column");
                return Ok(2);
            }
        }
        Command::Sweep { scenario, axes, max_rows } => {
            let (base, _) = load_scenario(&scenario)?;
            if base.has_schedule() || base.graph.is_some() {
                eprintln!("note: sweeps use the homogeneous model; schedules and graph are ignored");
            }
            let spec = SweepSpec { row_cap: max_rows, ..SweepSpec::new(base, axes) };
            match csv.filter(|p| *p != Path::new("-")) {
                Some(path) => {
                    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
                    sweep_grid(&spec, tol, io::BufWriter::new(file))?;
                }
                None => {
                    sweep_grid(&spec, tol, io::stdout().lock())?;
                }
            }
        }
        Command::Levers { scenario, budget } => {
            let (spec, _) = load_scenario(&scenario)?;
            let rep = lever_report(&spec, budget, tol)?;
            match csv {
                Some(path) => write_csv(path, LEVER_HEADER, &rep.csv_records())?,
                None => print(&rep.render())?,
            }
        }
        Command::Simulate { scenario, trials, seed, cap } => {
            let (spec, base) = load_scenario(&scenario)?;
            let graph = scenario_graph(&spec, base.as_deref())?;
            let cfg = SimConfig::new(trials, seed).with_cap(cap);
            let rep = simulate_command(&spec, graph.as_ref().map(|(g, s)| (&g.graph, *s)), &cfg)?;
            match csv {
                Some(path) => write_csv(path, SIM_HEADER, &[rep.csv_record()])?,
                None => print(&rep.render())?,
            }
        }
        Command::Graph { scenario, graph_file, seed_node } => {
            let (spec, _) = load_scenario(&scenario)?;
            let loaded = read_edge_list(&graph_file)?;
            warn_graph(&loaded);
            let seed = SeedSpec::new(seed_node, &loaded.graph)
                .map_err(|e| CliError::domain("seed-node", None, e.to_string()))?;
            let rep = graph_command(&spec, &loaded.graph, seed, tol)?;
            match csv {
                Some(path) => write_csv(path, LAYER_HEADER, &rep.csv_records())?,
                None => print(&rep.render())?,
            }
        }
        Command::Sir { beta, gamma, population, i0, t_max, step, behavioral_r } => {
            let params = SirParams::outbreak(beta, gamma, population, i0)?;
            let run = sir_command(params, t_max, step, behavioral_r, tol)?;
            match csv {
                Some(path) if path == Path::new("-") => run.write_trajectory(io::stdout().lock())?,
                Some(path) => {
                    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
                    run.write_trajectory(io::BufWriter::new(file))?;
                }
                None => print(&run.render())?,
            }
        }
        Command::Presets { name } => match name {
            Some(name) => {
                let p = presets::find(&name).ok_or_else(|| CliError::Usage(format!("no preset `{name}`")))?;
                print(p.text)?;
            }
            None => {
                let mut out = String::new();
                for p in presets::PRESETS {
                    out.push_str(&format!("{:<22}{}\n", p.name, p.summary));
                }
                out.push_str("\nuse as `preset:NAME` wherever a scenario file is expected\n");
                print(&out)?;
            }
        },
        Command::GenGraph { family, n, p, m, b, depth, rng_seed, out } => {
            let family = match family {
                Family::Tree => GraphFamily::BAryTree { b, depth },
                Family::Er => GraphFamily::ErdosRenyi { n, p_edge: p, rng_seed },
                Family::Ba => GraphFamily::BarabasiAlbert { n, m_attach: m, rng_seed },
                Family::Complete => GraphFamily::Complete { n },
                Family::Cycle => GraphFamily::Cycle { n },
                Family::Star => GraphFamily::Star { leaves: n },
            };
            let text = write_edge_list(&generate_graph(family)?);
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| CliError::io(&path, e))?,
                None => print(&text)?,
            }
        }
    }
    Ok(0)
}
