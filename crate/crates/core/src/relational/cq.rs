use super::decomp::hom_via_decomposition_unchecked;
use super::hom::find_homomorphism;
use super::structure::{Mapping, Structure};
use super::symbol::Atom;
use super::treewidth::treewidth_exact_with_limit;
use crate::config::Config;
use crate::error::{Error, Result};

/// Decides whether `binding` (defined on the free variables) is an answer of
/// the conjunctive query with the given body over `db`.
pub fn evaluate_cq(
    body: &[Atom],
    free: &[String],
    db: &Structure,
    binding: &Mapping,
    cfg: &Config,
) -> Result<bool> {
    if let Some(v) = binding.keys().find(|k| !free.contains(k)) {
        return Err(Error::Invalid(format!(
            "binding for {v}, which is not a free variable"
        )));
    }
    let mut source = Structure::from_atoms(body)?;
    for v in free {
        source.add_element(v.clone());
    }
    Ok(hom_exists(&source, db, binding, cfg))
}

/// Dynamic programming when the source has a decomposition of width at most
/// the configured budget, backtracking otherwise.
pub(crate) fn hom_exists(
    source: &Structure,
    target: &Structure,
    fixed: &Mapping,
    cfg: &Config,
) -> bool {
    match treewidth_exact_with_limit(
        &source.gaifman_graph(),
        cfg.width_budget,
        cfg.treewidth_vertex_limit,
    ) {
        Ok(Some(td)) => hom_via_decomposition_unchecked(source, &td, target, fixed).is_some(),
        _ => find_homomorphism(source, target, fixed).is_some(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::Symbol;

    #[test]
    fn single_atom_membership() {
        let body = [Atom::query("r1", &["x", "y"])];
        let mut db = Structure::new();
        db.add_tuple(Symbol::new("r1"), vec!["a".into(), "b".into()])
            .unwrap();
        let free = vec!["x".to_string()];
        let cfg = Config::default();
        let yes: Mapping = [("x", "a")].into_iter().collect();
        let no: Mapping = [("x", "b")].into_iter().collect();
        assert!(evaluate_cq(&body, &free, &db, &yes, &cfg).unwrap());
        assert!(!evaluate_cq(&body, &free, &db, &no, &cfg).unwrap());
    }
}
