use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ptree::analyzer::{check_conditions, extension_core_width};
use ptree::core_ops::extension_core;
use ptree::csts::csts_all;
use ptree::ext::{ext_via_extcore, ExtInstance};
use ptree::frontend::{
    evaluate, load_tree, mapping_from_json, parse_facts, parse_pair, resolve, run_fuzz, solve,
    write_facts, Engine, FuzzOptions, Warning,
};
use ptree::gen::TreeParams;
use ptree::pattern::pp_solution_subtree;
use ptree::relational::treewidth_estimate;
use ptree::{Config, Error, Graph, Mapping, PatternTree, Structure};

#[derive(Parser)]
#[command(
    name = "ptree",
    version,
    about = "Evaluate and analyze pattern trees ({AND, OPTIONAL} queries)"
)]
struct Cli {
    #[command(flatten)]
    limits: Limits,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Limits {
    /// Variable budget of the brute-force oracle.
    #[arg(long, global = true, default_value_t = Config::default().oracle_max_vars)]
    oracle_max_vars: usize,
    /// Constant budget of the brute-force oracle.
    #[arg(long, global = true, default_value_t = Config::default().oracle_max_consts)]
    oracle_max_consts: usize,
    /// Most inherited variables a stop set may range over.
    #[arg(long, global = true, default_value_t = Config::default().stop_width_cap)]
    stop_width_cap: usize,
    /// Largest structure whose core is computed.
    #[arg(long, global = true, default_value_t = Config::default().core_domain_limit)]
    core_limit: usize,
}

impl Limits {
    fn config(&self) -> Config {
        Config {
            oracle_max_vars: self.oracle_max_vars,
            oracle_max_consts: self.oracle_max_consts,
            stop_width_cap: self.stop_width_cap,
            core_domain_limit: self.core_limit,
            ..Config::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a mapping is an answer. Exit 0 for yes, 1 for no.
    Eval {
        /// Query text or pattern-tree JSON.
        query: PathBuf,
        /// Fact file.
        data: PathBuf,
        /// Mapping JSON file, or inline JSON such as '{"x":"1"}'.
        mapping: String,
        #[arg(long, default_value = "auto")]
        engine: Engine,
        #[arg(long)]
        json: bool,
    },
    /// List every answer (reference semantics).
    Solve {
        query: PathBuf,
        data: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Tractability report for a width bound.
    Analyze {
        query: PathBuf,
        #[arg(long, default_value_t = 1)]
        c: usize,
        /// Most component combinations scanned for condition (c).
        #[arg(long, default_value_t = 10_000)]
        combo_cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// Critical pairs of a projection-free tree with their extension-core widths (JSON).
    Csts {
        query: PathBuf,
        #[arg(long, default_value_t = Config::default().subtree_cap)]
        subtree_cap: usize,
    },
    /// Extension core of a pair file.
    Extcore {
        pair: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide the extension problem. Exit 0 if an extension exists, 1 otherwise.
    Ext {
        pair: PathBuf,
        /// Target fact file.
        target: PathBuf,
        /// Bindings JSON for the anchor elements, file or inline.
        bindings: String,
        #[arg(long)]
        json: bool,
    },
    /// Treewidth of the Gaifman graph of a query or a fact file.
    Treewidth {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compare every applicable engine with the reference semantics on random instances.
    Fuzz {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = TreeParams::default().max_nodes)]
        max_nodes: usize,
        #[arg(long, default_value_t = TreeParams::default().max_atoms)]
        max_atoms: usize,
        #[arg(long, default_value_t = TreeParams::default().max_arity)]
        max_arity: usize,
        #[arg(long, default_value_t = TreeParams::default().max_vars)]
        max_vars: usize,
        /// Largest database domain.
        #[arg(long, default_value_t = TreeParams::default().domain)]
        domain: usize,
        /// Random mappings per instance besides the true answers.
        #[arg(long, default_value_t = 4)]
        mappings: usize,
        #[arg(long)]
        json: bool,
    },
}

enum Outcome {
    Yes,
    No,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_tree(path: &Path) -> anyhow::Result<PatternTree> {
    let (p, warnings) = load_tree(&read(path)?).with_context(|| path.display().to_string())?;
    for w in warnings {
        match w {
            Warning::UnknownVariable(v) => {
                eprintln!("warning: selected variable ?{v} does not occur in the query")
            }
        }
    }
    Ok(p)
}

fn read_facts(path: &Path) -> anyhow::Result<Structure> {
    parse_facts(&read(path)?).with_context(|| path.display().to_string())
}

fn read_mapping(arg: &str) -> anyhow::Result<Mapping> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    mapping_from_json(&text).context("mapping")
}

fn print_json(value: &impl serde::Serialize) {
    let text = serde_json::to_string_pretty(value).expect("plain data");
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn print_width(label: &str, w: ptree::relational::WidthEstimate) {
    if w.is_exact() {
        println!("{label}: {}", w.upper);
    } else {
        println!(
            "{label}: between {} and {} (upper bound from a heuristic decomposition)",
            w.lower, w.upper
        );
    }
}

fn yes_no(b: bool) -> Outcome {
    if b {
        Outcome::Yes
    } else {
        Outcome::No
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let cfg = cli.limits.config();
    match cli.command {
        Command::Eval {
            query,
            data,
            mapping,
            engine,
            json,
        } => {
            let p = read_tree(&query)?;
            let db = read_facts(&data)?;
            let mu = read_mapping(&mapping)?;
            let answer = evaluate(&p, &db, &mu, engine, &cfg)?;
            let used = if engine == Engine::Auto {
                resolve(&p)
            } else {
                engine
            };
            if json {
                print_json(&json!({
                    "answer": answer,
                    "engine": used,
                    "ppSubtree": pp_solution_subtree(&p, &db, &mu),
                }));
            } else {
                println!("{}", if answer { "yes" } else { "no" });
            }
            Ok(yes_no(answer))
        }
        Command::Solve { query, data, json } => {
            let p = read_tree(&query)?;
            let db = read_facts(&data)?;
            let answers = solve(&p, &db, &cfg)?;
            if json {
                print_json(&answers);
            } else {
                for mu in &answers {
                    println!("{mu}");
                }
                eprintln!("{} answer(s)", answers.len());
            }
            Ok(Outcome::Yes)
        }
        Command::Analyze {
            query,
            c,
            combo_cap,
            json,
        } => {
            let p = read_tree(&query)?;
            let report = check_conditions(&p, c, combo_cap, &cfg);
            if json {
                print_json(&report);
            } else {
                println!("bound: {c}");
                println!("well-designed: {}", report.well_designed);
                println!("simple: {}", report.simple);
                println!("projection-free: {}", report.projection_free);
                if let Some(a) = &report.condition_a {
                    print_width("(a) max extension-core width of a component", a.max_width);
                    println!("(a) {:?}", a.verdict);
                }
                if let Some(b) = &report.condition_b {
                    println!("(b) interface component width: {}", b.width);
                    println!("(b) {:?}", b.verdict);
                }
                if let Some(cc) = &report.condition_c {
                    print_width(
                        "(c) max extension-core width of a combination",
                        cc.pruned.max_width,
                    );
                    println!(
                        "(c) {:?} over {} combination(s)",
                        cc.pruned.verdict, cc.pruned.combinations
                    );
                }
                if let Some(cs) = &report.csts {
                    if let Some(w) = cs.max_width {
                        print_width("critical pairs, max extension-core width", w);
                    }
                    println!("critical pairs: {:?}", cs.verdict);
                }
                for n in &report.notices {
                    println!("note: {n}");
                }
            }
            Ok(Outcome::Yes)
        }
        Command::Csts { query, subtree_cap } => {
            let p = read_tree(&query)?;
            if !p.is_projection_free() {
                anyhow::bail!(Error::Invalid(
                    "critical pairs are defined for projection-free trees".into()
                ));
            }
            let pairs: Vec<_> = csts_all(&p, subtree_cap)?
                .into_iter()
                .map(|pair| {
                    let width = extension_core_width(&pair.extension_pair(), &cfg);
                    json!({
                        "subtree": pair.subtree,
                        "child": pair.child,
                        "context": pair.context,
                        "childLabel": pair.child_label,
                        "pinned": pair.pinned,
                        "extcore": width,
                    })
                })
                .collect();
            print_json(&pairs);
            Ok(Outcome::Yes)
        }
        Command::Extcore { pair, json } => {
            let pair = parse_pair(&read(&pair)?).with_context(|| pair.display().to_string())?;
            let ec = extension_core(&pair, cfg.core_domain_limit)?;
            let (width, td) = treewidth_estimate(&ec.gaifman_graph(), cfg.treewidth_vertex_limit);
            if json {
                print_json(&json!({ "extcore": ec, "treewidth": width, "decomposition": td }));
            } else {
                print!("{}", write_facts(&ec));
                print_width("# treewidth", width);
            }
            Ok(Outcome::Yes)
        }
        Command::Ext {
            pair,
            target,
            bindings,
            json,
        } => {
            let pair = parse_pair(&read(&pair)?).with_context(|| pair.display().to_string())?;
            let target = read_facts(&target)?;
            let h = read_mapping(&bindings)?;
            let inst = ExtInstance::new(pair, target, h)?;
            let answer = ext_via_extcore(&inst, &cfg)?;
            if json {
                print_json(&json!({ "extends": answer }));
            } else {
                println!("{}", if answer { "yes" } else { "no" });
            }
            Ok(yes_no(answer))
        }
        Command::Treewidth { file, json } => {
            let text = read(&file)?;
            let graph: Graph = match load_tree(&text) {
                Ok((p, _)) => p.structure(p.full()).gaifman_graph(),
                Err(query_err) => match parse_facts(&text) {
                    Ok(s) => s.gaifman_graph(),
                    Err(facts_err) => {
                        let e = if text.to_ascii_uppercase().contains("SELECT") {
                            query_err
                        } else {
                            facts_err
                        };
                        return Err(anyhow::Error::new(e).context(file.display().to_string()));
                    }
                },
            };
            let (width, td) = treewidth_estimate(&graph, cfg.treewidth_vertex_limit);
            td.validate(&graph)?;
            if json {
                print_json(
                    &json!({ "treewidth": width, "exact": width.is_exact(), "decomposition": td }),
                );
            } else {
                print_width("treewidth", width);
                for (i, bag) in td.bags().iter().enumerate() {
                    let parent = td.parent()[i].map_or("-".to_string(), |q| q.to_string());
                    println!(
                        "bag {i} (parent {parent}): {}",
                        bag.iter().cloned().collect::<Vec<_>>().join(" ")
                    );
                }
            }
            Ok(Outcome::Yes)
        }
        Command::Fuzz {
            trials,
            seed,
            max_nodes,
            max_atoms,
            max_arity,
            max_vars,
            domain,
            mappings,
            json,
        } => {
            let opts = FuzzOptions {
                trials,
                seed,
                mappings,
                params: TreeParams {
                    max_nodes,
                    max_atoms,
                    max_arity,
                    max_vars,
                    domain,
                    ..TreeParams::default()
                },
            };
            let report = run_fuzz(&opts, &cfg);
            if json {
                print_json(&report);
            } else {
                println!("trials: {}", report.trials);
                println!("checks: {}", report.checks);
                println!("skipped: {}", report.skipped);
                println!("divergences: {}", report.divergences.len());
                if let Some(m) = &report.minimized {
                    println!("first divergence, minimized:\n{m}");
                }
            }
            Ok(yes_no(report.divergences.is_empty()))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::BudgetExceeded(_)
            | Error::WidthCapExceeded { .. }
            | Error::CapExceeded { .. }
            | Error::VertexLimit { .. }
            | Error::DomainLimit { .. },
        ) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
