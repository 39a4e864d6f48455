//! Engine selection for membership queries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::csts::eval_projection_free;
use crate::error::{Error, Result};
use crate::fpt::eval_fpt;
use crate::pattern::{all_solutions_bruteforce, check_budget, is_solution_bruteforce, PatternTree};
use crate::relational::{Mapping, Structure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Critical subtrees for projection-free trees, the component engine for
    /// well-designed ones, the oracle otherwise.
    #[default]
    Auto,
    Brute,
    Csts,
    Fpt,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Engine::Auto),
            "brute" => Ok(Engine::Brute),
            "csts" => Ok(Engine::Csts),
            "fpt" => Ok(Engine::Fpt),
            _ => Err(Error::Invalid(format!(
                "unknown engine `{s}` (auto, brute, csts, fpt)"
            ))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Auto => "auto",
            Engine::Brute => "brute",
            Engine::Csts => "csts",
            Engine::Fpt => "fpt",
        })
    }
}

/// The engine `Auto` resolves to for `p`.
pub fn resolve(p: &PatternTree) -> Engine {
    if p.is_projection_free() {
        Engine::Csts
    } else if p.is_well_designed() {
        Engine::Fpt
    } else {
        Engine::Brute
    }
}

/// Fails unless every variable of `mu` is free in `p`.
pub fn check_mapping(p: &PatternTree, mu: &Mapping) -> Result<()> {
    match mu.keys().find(|k| !p.free_vars().contains(*k)) {
        Some(k) => Err(Error::Invalid(format!(
            "variable {k} is not selected by the query"
        ))),
        None => Ok(()),
    }
}

/// Decides `mu ∈ p(db)`. Unbound free variables stay unbound: `mu` must be
/// the whole answer, not a prefix of one.
pub fn evaluate(
    p: &PatternTree,
    db: &Structure,
    mu: &Mapping,
    engine: Engine,
    cfg: &Config,
) -> Result<bool> {
    check_mapping(p, mu)?;
    match engine {
        Engine::Auto => match resolve(p) {
            Engine::Fpt => match eval_fpt(p, db, mu, cfg) {
                Err(Error::WidthCapExceeded { .. }) => evaluate(p, db, mu, Engine::Brute, cfg),
                other => other,
            },
            resolved => evaluate(p, db, mu, resolved, cfg),
        },
        Engine::Brute => {
            check_budget(p, db, cfg)?;
            Ok(is_solution_bruteforce(p, db, mu))
        }
        Engine::Csts => eval_projection_free(p, db, mu, cfg),
        Engine::Fpt => eval_fpt(p, db, mu, cfg),
    }
}

/// `p(db)` by the reference semantics.
pub fn solve(p: &PatternTree, db: &Structure, cfg: &Config) -> Result<Vec<Mapping>> {
    Ok(all_solutions_bruteforce(p, db, cfg)?.into_iter().collect())
}
