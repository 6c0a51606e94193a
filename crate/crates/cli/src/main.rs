use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gjpo_core::{
    enumerate_outputs_with_graph, gjpo_generate, gpo_generate, reverse_engineer,
    rooted_spanning_trees, Error, FeedbackFunction, Pag, PeriodicSequence, RegisterState,
    StateGraph,
};

const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;
const EXIT_RUN: u8 = 4;
const EXIT_NO_TREES: u8 = 5;
const EXIT_COMPLEXITY: u8 = 6;

#[derive(Parser)]
#[command(
    name = "gjpo",
    version,
    about = "Greedy de Bruijn sequence generation and state-graph analysis"
)]
struct Cli {
    /// Emit JSON instead of text
    #[arg(long, global = true)]
    json: bool,

    /// Cap on the register order (default 20; config key max_order,
    /// env GJPO_MAX_ORDER)
    #[arg(long, global = true)]
    max_order: Option<usize>,

    /// Worker threads for enumeration (config key jobs, env GJPO_JOBS)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose the state graph and report PCPs and joining trees
    Analyze {
        /// Function spec: an ANF like "x1 + x2*x3" or a family name
        /// (zero, one, prefer-same, prefer-opposite, product:k,l,
        /// gproduct:k1,k2,..., lift:<anf>@m, example4, example6)
        func: String,
        #[arg(short = 'n', long = "order")]
        order: usize,
        /// Write a DOT rendering of the state graph to this file
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Run one generator and print a single period
    Generate {
        #[arg(value_enum)]
        mode: Mode,
        func: String,
        #[arg(short = 'n', long = "order")]
        order: usize,
        /// Initial state as a 0/1 string
        #[arg(short = 'u', long = "seed-state")]
        seed_state: String,
        /// Index into the rooted spanning tree list (gjpo only)
        #[arg(long)]
        tree: Option<usize>,
    },
    /// Run every (tree, initial state) pair and report the tally
    Enumerate {
        func: String,
        #[arg(short = 'n', long = "order")]
        order: usize,
        /// Include the canonical sequences in the output
        #[arg(long)]
        emit_sequences: bool,
    },
    /// Recover a generating (function, state) pair from a sequence
    Reverse {
        /// One period as a 0/1 string
        bits: String,
    },
    /// Check whether a sequence is de Bruijn of the given order
    Verify {
        bits: String,
        #[arg(short = 'n', long = "order")]
        order: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Gpo,
    Gjpo,
}

struct Config {
    max_order: usize,
    jobs: usize,
}

/// Precedence: command-line flag, then environment, then config file, then
/// the built-in default. The config file is key=value text at the path in
/// GJPO_CONFIG, falling back to ./gjpo.conf.
fn load_config(cli: &Cli) -> Result<Config, String> {
    let mut max_order = gjpo_core::DEFAULT_MAX_ORDER;
    let mut jobs = 1usize;

    let path = std::env::var("GJPO_CONFIG")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("gjpo.conf"));
    if let Ok(text) = std::fs::read_to_string(&path) {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected key=value",
                    path.display(),
                    lineno + 1
                ));
            };
            let value = value.trim();
            match key.trim() {
                "max_order" => {
                    max_order = value
                        .parse()
                        .map_err(|_| format!("bad max_order '{value}'"))?;
                }
                "jobs" => {
                    jobs = value.parse().map_err(|_| format!("bad jobs '{value}'"))?;
                }
                other => return Err(format!("unknown config key '{other}'")),
            }
        }
    }
    if let Ok(value) = std::env::var("GJPO_MAX_ORDER") {
        max_order = value
            .parse()
            .map_err(|_| format!("bad GJPO_MAX_ORDER '{value}'"))?;
    }
    if let Ok(value) = std::env::var("GJPO_JOBS") {
        jobs = value.parse().map_err(|_| format!("bad GJPO_JOBS '{value}'"))?;
    }
    if let Some(v) = cli.max_order {
        max_order = v;
    }
    if let Some(v) = cli.jobs {
        jobs = v;
    }
    if max_order < 2 {
        return Err("max_order must be at least 2".into());
    }
    Ok(Config { max_order, jobs })
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::OrderMismatch { .. }
        | Error::Syntax(_)
        | Error::VariableOutOfRange { .. }
        | Error::EmptySequence
        | Error::FamilyParameter(_)
        | Error::BadComponent(_) => EXIT_USAGE,
        Error::OrderOutOfRange { .. } => EXIT_RESOURCE,
        Error::LeafInitialState { .. }
        | Error::NonStandardFunction
        | Error::InitialStateOffRootCycle { .. }
        | Error::InvalidTree(_)
        | Error::NonsingularRequired => EXIT_RUN,
        Error::NoRootedTrees => EXIT_NO_TREES,
        Error::ComplexityTooLow { .. } => EXIT_COMPLEXITY,
    }
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(exit_code_for(err))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match &cli.command {
        Command::Analyze { func, order, dot } => {
            cmd_analyze(&cli, &config, func, *order, dot.as_ref())
        }
        Command::Generate {
            mode,
            func,
            order,
            seed_state,
            tree,
        } => cmd_generate(&cli, &config, *mode, func, *order, seed_state, *tree),
        Command::Enumerate {
            func,
            order,
            emit_sequences,
        } => cmd_enumerate(&cli, &config, func, *order, *emit_sequences),
        Command::Reverse { bits } => cmd_reverse(&cli, bits),
        Command::Verify { bits, order } => cmd_verify(&cli, bits, *order),
    }
}

fn parse_function(config: &Config, func: &str, order: usize) -> Result<FeedbackFunction, Error> {
    if order > config.max_order {
        return Err(Error::OrderOutOfRange {
            order,
            max: config.max_order,
        });
    }
    gjpo_core::families::parse_spec(func, order)
}

fn cmd_analyze(
    cli: &Cli,
    config: &Config,
    func: &str,
    order: usize,
    dot: Option<&PathBuf>,
) -> ExitCode {
    if cli.json && dot.is_some() {
        eprintln!("error: --json and --dot are mutually exclusive");
        return ExitCode::from(EXIT_USAGE);
    }
    let f = match parse_function(config, func, order) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let graph = match StateGraph::build_with_max_order(&f, config.max_order) {
        Ok(g) => g,
        Err(e) => return fail(&e),
    };
    let pag = Pag::from_graph(&graph);
    let trees = rooted_spanning_trees(&pag);
    let spanning = pag.simplified().spanning_trees().len();

    if let Some(path) = dot {
        if let Err(e) = std::fs::write(path, graph.to_dot(false)) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_RESOURCE);
        }
    }

    if cli.json {
        let mut value = graph.to_json();
        value["function"] = serde_json::Value::String(f.to_string());
        value["pcps"] = serde_json::Value::Array(
            pag.pcps().iter().map(gjpo_core::Pcp::to_json).collect(),
        );
        value["spanning_trees"] = spanning.into();
        value["rooted_trees"] = trees.len().into();
        value["trees"] = serde_json::Value::Array(
            trees
                .iter()
                .map(gjpo_core::RootedSpanningTree::to_json)
                .collect(),
        );
        println!("{value}");
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "order: {order}");
        let _ = writeln!(out, "function: {f}");
        let _ = writeln!(out, "components: {}", graph.components().len());
        for c in graph.components() {
            let cycle: Vec<String> = c.cycle.iter().map(|&v| graph.state(v).to_string()).collect();
            let _ = writeln!(
                out,
                "  component {}: size {}, cycle length {}, leaves {}, cycle ({})",
                c.id,
                c.size,
                c.cycle.len(),
                c.leaves.len(),
                cycle.join(" ")
            );
        }
        let _ = writeln!(out, "pcps: {}", pag.pcp_count());
        for p in pag.pcps() {
            let _ = writeln!(
                out,
                "  ({},{}) {} -> {}",
                p.state, p.companion, p.from, p.to
            );
        }
        let _ = writeln!(out, "spanning trees: {spanning}");
        let _ = writeln!(out, "rooted spanning trees: {}", trees.len());
        print!("{out}");
    }
    ExitCode::SUCCESS
}

fn cmd_generate(
    cli: &Cli,
    config: &Config,
    mode: Mode,
    func: &str,
    order: usize,
    seed_state: &str,
    tree: Option<usize>,
) -> ExitCode {
    let f = match parse_function(config, func, order) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let seed = match RegisterState::from_bit_str(seed_state) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let result = match mode {
        Mode::Gpo => gpo_generate(&f, seed).map(|s| (s, None)),
        Mode::Gjpo => {
            let graph = match StateGraph::build_with_max_order(&f, config.max_order) {
                Ok(g) => g,
                Err(e) => return fail(&e),
            };
            let trees = rooted_spanning_trees(&Pag::from_graph(&graph));
            if trees.is_empty() {
                return fail(&Error::NoRootedTrees);
            }
            let Some(index) = tree else {
                eprintln!(
                    "error: gjpo needs --tree (0..{} available; see analyze --json)",
                    trees.len() - 1
                );
                return ExitCode::from(EXIT_USAGE);
            };
            let Some(chosen) = trees.get(index) else {
                return fail(&Error::InvalidTree(format!(
                    "tree index {index} out of range (0..{})",
                    trees.len() - 1
                )));
            };
            gjpo_generate(&f, &graph, chosen, seed).map(|s| (s, Some(index)))
        }
    };
    match result {
        Ok((sequence, tree_index)) => {
            if cli.json {
                let mut value = serde_json::json!({
                    "n": order,
                    "bits": sequence.bit_string(),
                });
                if let Some(i) = tree_index {
                    value["tree"] = i.into();
                }
                println!("{value}");
            } else {
                println!("{}", sequence.bit_string());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn cmd_enumerate(
    cli: &Cli,
    config: &Config,
    func: &str,
    order: usize,
    emit_sequences: bool,
) -> ExitCode {
    let f = match parse_function(config, func, order) {
        Ok(f) => f,
        Err(e) => return fail(&e),
    };
    let graph = match StateGraph::build_with_max_order(&f, config.max_order) {
        Ok(g) => g,
        Err(e) => return fail(&e),
    };
    let report = match enumerate_outputs_with_graph(&f, &graph, config.jobs) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if cli.json {
        println!("{}", report.to_json(emit_sequences));
    } else {
        let mut out = String::new();
        let _ = writeln!(out, "components: {}", report.components);
        let _ = writeln!(out, "pcps: {}", report.pcps.len());
        let _ = writeln!(out, "spanning trees: {}", report.spanning_trees);
        let _ = writeln!(out, "rooted trees: {}", report.rooted_trees);
        let _ = writeln!(out, "runs: {}", report.runs);
        let _ = writeln!(out, "distinct: {}", report.distinct);
        let histogram: Vec<String> = report
            .histogram
            .iter()
            .map(|(m, c)| format!("{m}:{c}"))
            .collect();
        let _ = writeln!(out, "histogram: {}", histogram.join(" "));
        if emit_sequences {
            let _ = writeln!(out, "sequences:");
            for (s, m) in &report.sequences {
                let _ = writeln!(out, "  {} x{}", s.bit_string(), m);
            }
        }
        print!("{out}");
    }
    ExitCode::SUCCESS
}

fn cmd_reverse(cli: &Cli, bits: &str) -> ExitCode {
    let s = match PeriodicSequence::from_bit_str(bits) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let (f, u) = match reverse_engineer(&s) {
        Ok(pair) => pair,
        Err(e) => return fail(&e),
    };
    let round_trip = gpo_generate(&f, u)
        .map(|out| out.shift_equivalent(&s))
        .unwrap_or(false);
    if cli.json {
        println!(
            "{}",
            serde_json::json!({
                "n": f.order(),
                "initial_state": u.to_string(),
                "truth_table_hex": f.truth_table_hex(),
                "round_trip": round_trip,
            })
        );
    } else {
        println!("n: {}", f.order());
        println!("initial_state: {u}");
        println!("truth_table_hex: {}", f.truth_table_hex());
        println!("round_trip: {}", if round_trip { "ok" } else { "failed" });
    }
    if round_trip {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_verify(cli: &Cli, bits: &str, order: usize) -> ExitCode {
    let s = match PeriodicSequence::from_bit_str(bits) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let ok = s.is_de_bruijn(order);
    if cli.json {
        let mut value = serde_json::json!({
            "de_bruijn": ok,
            "n": order,
            "period": s.period(),
        });
        if !ok {
            if s.period() != 1usize << order {
                value["reason"] =
                    format!("period {} != {}", s.period(), 1usize << order).into();
            } else if let Some(w) = s.duplicate_window(order) {
                value["reason"] = format!("window {w} repeats").into();
            }
        }
        println!("{value}");
    } else {
        println!("{}", if ok { "true" } else { "false" });
        if !ok {
            if s.period() != 1usize << order {
                eprintln!("period {} != {}", s.period(), 1usize << order);
            } else if let Some(w) = s.duplicate_window(order) {
                eprintln!("window {w} repeats");
            }
        }
    }
    ExitCode::SUCCESS
}
