//! Differential testing of the engines against the reference semantics.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::engine::{evaluate, Engine};
use super::facts::write_facts;
use super::query::to_query_text;
use crate::config::Config;
use crate::gen::{random_database, random_mapping, random_tree, TreeParams};
use crate::pattern::{all_solutions_bruteforce, is_solution_bruteforce, PatternTree, Subtree};
use crate::relational::{Mapping, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FuzzOptions {
    pub trials: usize,
    pub seed: u64,
    pub params: TreeParams,
    /// Random mappings tried per instance, on top of the true answers.
    pub mappings: usize,
}

impl Default for FuzzOptions {
    fn default() -> Self {
        FuzzOptions {
            trials: 200,
            seed: 0,
            params: TreeParams::default(),
            mappings: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub trial: usize,
    pub engine: Engine,
    #[serde(serialize_with = "as_query_text")]
    pub tree: PatternTree,
    pub database: Structure,
    pub mapping: Mapping,
    pub expected: bool,
    /// The engine's answer, or its error.
    pub got: Result<bool, String>,
}

fn as_query_text<S: serde::Serializer>(p: &PatternTree, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&to_query_text(p))
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "trial {} engine {}: expected {}, got {:?}",
            self.trial, self.engine, self.expected, self.got
        )?;
        writeln!(f, "mapping {}", self.mapping)?;
        write!(f, "{}", to_query_text(&self.tree))?;
        write!(f, "{}", write_facts(&self.database))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub trials: usize,
    pub checks: usize,
    /// Instances the oracle could not handle within its budget.
    pub skipped: usize,
    pub divergences: Vec<Divergence>,
    /// The first divergence, shrunk.
    pub minimized: Option<Divergence>,
}

struct Trial {
    checks: usize,
    skipped: bool,
    divergences: Vec<Divergence>,
}

fn engines_for(p: &PatternTree) -> Vec<Engine> {
    let mut out = vec![Engine::Auto];
    if p.is_projection_free() {
        out.push(Engine::Csts);
    }
    if p.is_well_designed() {
        out.push(Engine::Fpt);
    }
    out
}

fn run_trial(opts: &FuzzOptions, cfg: &Config, trial: usize) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(trial as u64);
    let params = TreeParams {
        well_designed: rng.gen_bool(0.7),
        simple: rng.gen_bool(0.3),
        domain: rng.gen_range(2..=opts.params.domain.max(2)),
        ..opts.params
    };
    let mut p = random_tree(&mut rng, &params);
    if rng.gen_bool(0.3) {
        p = p.projection_free();
    }
    let db = random_database(&mut rng, &p.atoms(p.full()), params.domain, params.density);
    let Ok(answers) = all_solutions_bruteforce(&p, &db, cfg) else {
        return Trial {
            checks: 0,
            skipped: true,
            divergences: Vec::new(),
        };
    };
    let mut candidates: Vec<Mapping> = answers.iter().cloned().collect();
    for _ in 0..opts.mappings {
        candidates.push(random_mapping(&mut rng, p.free_vars(), &db));
    }
    let mut out = Trial {
        checks: 0,
        skipped: false,
        divergences: Vec::new(),
    };
    for mu in candidates {
        let expected = answers.contains(&mu);
        for engine in engines_for(&p) {
            out.checks += 1;
            let got = evaluate(&p, &db, &mu, engine, cfg).map_err(|e| e.to_string());
            if got != Ok(expected) {
                out.divergences.push(Divergence {
                    trial,
                    engine,
                    tree: p.clone(),
                    database: db.clone(),
                    mapping: mu.clone(),
                    expected,
                    got,
                });
            }
        }
    }
    out
}

pub fn run_fuzz(opts: &FuzzOptions, cfg: &Config) -> FuzzReport {
    #[cfg(feature = "parallel")]
    let trials: Vec<Trial> = {
        use rayon::prelude::*;
        (0..opts.trials)
            .into_par_iter()
            .map(|t| run_trial(opts, cfg, t))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let trials: Vec<Trial> = (0..opts.trials).map(|t| run_trial(opts, cfg, t)).collect();

    let mut report = FuzzReport {
        trials: opts.trials,
        checks: 0,
        skipped: 0,
        divergences: Vec::new(),
        minimized: None,
    };
    for t in trials {
        report.checks += t.checks;
        report.skipped += usize::from(t.skipped);
        report.divergences.extend(t.divergences);
    }
    report.minimized = report.divergences.first().map(|d| minimize(d, cfg));
    report
}

fn still_diverges(d: &Divergence, cfg: &Config) -> Option<Divergence> {
    if d.mapping.keys().any(|k| !d.tree.free_vars().contains(k)) {
        return None;
    }
    let expected = is_solution_bruteforce(&d.tree, &d.database, &d.mapping);
    let got = evaluate(&d.tree, &d.database, &d.mapping, d.engine, cfg).map_err(|e| e.to_string());
    (got != Ok(expected)).then(|| Divergence {
        expected,
        got,
        ..d.clone()
    })
}

/// Greedily drops facts and leaf nodes while the engine keeps disagreeing
/// with the oracle.
pub fn minimize(d: &Divergence, cfg: &Config) -> Divergence {
    let mut best = d.clone();
    loop {
        let mut shrunk = false;
        for atom in best.database.atoms() {
            let mut db = Structure::with_domain(best.database.domain().iter().cloned());
            for a in best.database.atoms() {
                if a != atom {
                    let tuple = a.names().map(str::to_string).collect();
                    db.add_tuple(a.symbol.clone(), tuple).expect("same arities");
                }
            }
            let candidate = Divergence {
                database: db,
                ..best.clone()
            };
            if let Some(c) = still_diverges(&candidate, cfg) {
                best = c;
                shrunk = true;
                break;
            }
        }
        if shrunk {
            continue;
        }
        for leaf in (1..best.tree.len())
            .rev()
            .filter(|&t| best.tree.children(t).is_empty())
        {
            let keep: Subtree = best.tree.full().without(leaf);
            let (tree, _) = best.tree.induced(keep);
            let candidate = Divergence {
                tree,
                ..best.clone()
            };
            if let Some(c) = still_diverges(&candidate, cfg) {
                best = c;
                shrunk = true;
                break;
            }
        }
        if !shrunk {
            return best;
        }
    }
}
