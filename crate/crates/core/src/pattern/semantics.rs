//! pp-solutions and the brute-force reference semantics.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use super::tree::{NodeId, PatternTree, Subtree};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::relational::{find_homomorphism, Atom, Mapping, Structure};

/// `T_μ` if `μ` is a pp-solution with `dom(μ) = var(T_μ)`, else `None`.
pub fn pp_solution_subtree(p: &PatternTree, db: &Structure, mu: &Mapping) -> Option<Subtree> {
    let good = |t: NodeId| {
        let vars = p.node_vars(t);
        vars.iter().all(|v| mu.contains_key(v))
            && mu.maps_into(&p.structure(Subtree::empty().with(t)), db)
    };
    let sub = maximal_subtree(p, good)?;
    (p.vars(sub) == mu.domain()).then_some(sub)
}

/// The largest root-containing subtree whose nodes all satisfy `good`.
fn maximal_subtree(p: &PatternTree, mut good: impl FnMut(NodeId) -> bool) -> Option<Subtree> {
    if !good(p.root()) {
        return None;
    }
    let mut sub = Subtree::root_only();
    for t in 1..p.len() {
        if p.parent(t).is_some_and(|q| sub.contains(q)) && good(t) {
            sub = sub.with(t);
        }
    }
    Some(sub)
}

/// `μ_{≺t}`: `μ` restricted to the variables of the nodes before `t`.
pub fn restrict_before(p: &PatternTree, mu: &Mapping, t: NodeId) -> Mapping {
    mu.restrict(&p.vars(p.before(t)))
}

/// Whether a pp-solution `nu` with witness `t_nu` is maximal: no child of
/// `t_nu` admits a homomorphism extending `nu_{≺t'}`.
fn is_maximal(p: &PatternTree, db: &Structure, nu: &Mapping, t_nu: Subtree) -> bool {
    p.children_of(t_nu).into_iter().all(|c| {
        let fixed = restrict_before(p, nu, c);
        find_homomorphism(&p.structure(Subtree::empty().with(c)), db, &fixed).is_none()
    })
}

/// Calls `f` with every homomorphism from `atoms` into `db` that extends
/// `fixed`, until `f` breaks.
pub(crate) fn for_each_hom(
    atoms: &[Atom],
    db: &Structure,
    fixed: &Mapping,
    f: &mut impl FnMut(&Mapping) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let Some((first, rest)) = atoms.split_first() else {
        return f(fixed);
    };
    let Some(tuples) = db.relation(&first.symbol) else {
        return ControlFlow::Continue(());
    };
    for t in tuples {
        if t.len() != first.args.len() {
            continue;
        }
        let mut binding = fixed.clone();
        let consistent = first.args.iter().zip(t).all(|(arg, value)| {
            let v = arg.name();
            match binding.get(v) {
                Some(w) => w == value,
                None => {
                    binding.insert(v, value.clone());
                    true
                }
            }
        });
        if consistent {
            for_each_hom(rest, db, &binding, f)?;
        }
    }
    ControlFlow::Continue(())
}

/// Calls `f` with every `ν ∈ p'(D)` (the projection-free semantics) whose
/// restriction to `dom(seed)` is `seed`.
fn for_each_answer(
    p: &PatternTree,
    db: &Structure,
    seed: &Mapping,
    f: &mut impl FnMut(&Mapping) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let mut seen = BTreeSet::new();
    for sub in p.root_subtrees() {
        let atoms: Vec<Atom> = p.atoms(sub).into_iter().collect();
        let vars = p.vars(sub);
        if seed.keys().any(|k| !vars.contains(k)) {
            continue;
        }
        for_each_hom(&atoms, db, seed, &mut |nu| {
            // Different witnesses of the same ν give the same T_ν.
            if !seen.insert(nu.clone()) {
                return ControlFlow::Continue(());
            }
            let t_nu = pp_solution_subtree(p, db, nu)
                .expect("a homomorphism of a subtree is a pp-solution");
            if is_maximal(p, db, nu, t_nu) {
                f(nu)
            } else {
                ControlFlow::Continue(())
            }
        })?;
    }
    ControlFlow::Continue(())
}

/// Whether `mu ∈ p(db)`, by enumerating the projection-free answers that
/// agree with `mu` and checking their projection. Exponential.
pub fn is_solution_bruteforce(p: &PatternTree, db: &Structure, mu: &Mapping) -> bool {
    if mu.keys().any(|k| !p.free_vars().contains(k)) {
        return false;
    }
    let free = p.free_vars();
    for_each_answer(p, db, mu, &mut |nu| {
        if nu.restrict(free) == *mu {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .is_break()
}

/// `p(db)`. Fails when the tree or the database exceeds the oracle budget.
pub fn all_solutions_bruteforce(
    p: &PatternTree,
    db: &Structure,
    cfg: &Config,
) -> Result<BTreeSet<Mapping>> {
    check_budget(p, db, cfg)?;
    let mut out = BTreeSet::new();
    let free = p.free_vars();
    let _ = for_each_answer(p, db, &Mapping::new(), &mut |nu| {
        out.insert(nu.restrict(free));
        ControlFlow::Continue(())
    });
    Ok(out)
}

pub fn check_budget(p: &PatternTree, db: &Structure, cfg: &Config) -> Result<()> {
    let vars = p.all_vars().len();
    if vars > cfg.oracle_max_vars {
        return Err(Error::BudgetExceeded(format!(
            "{vars} variables, the oracle is limited to {}",
            cfg.oracle_max_vars
        )));
    }
    let consts = db.domain().len();
    if consts > cfg.oracle_max_consts {
        return Err(Error::BudgetExceeded(format!(
            "{consts} constants, the oracle is limited to {}",
            cfg.oracle_max_consts
        )));
    }
    Ok(())
}
