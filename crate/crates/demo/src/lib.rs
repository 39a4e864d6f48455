//! Browser bindings. Every entry point takes plain text and returns a JSON
//! string; errors come back as a string message.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use ptree::analyzer::check_conditions;
use ptree::frontend::{
    evaluate, load_tree, mapping_from_json, parse_facts, resolve, solve, Engine,
};
use ptree::pattern::pp_solution_subtree;
use ptree::relational::treewidth_estimate;
use ptree::{Config, Graph, PatternTree};

fn tree(query: &str) -> Result<PatternTree, String> {
    load_tree(query)
        .map(|(p, _)| p)
        .map_err(|e| format!("query: {e}"))
}

fn pretty(v: Value) -> String {
    serde_json::to_string_pretty(&v).expect("plain data")
}

/// Membership of `mapping` (JSON object) in the answers of `query` over `facts`.
pub fn eval_json(query: &str, facts: &str, mapping: &str, engine: &str) -> Result<String, String> {
    let p = tree(query)?;
    let db = parse_facts(facts).map_err(|e| format!("facts: {e}"))?;
    let mu = mapping_from_json(mapping).map_err(|e| format!("mapping: {e}"))?;
    let engine: Engine = engine.parse().map_err(|e: ptree::Error| e.to_string())?;
    let cfg = Config::default();
    let answer = evaluate(&p, &db, &mu, engine, &cfg).map_err(|e| e.to_string())?;
    let answers = solve(&p, &db, &cfg).ok();
    Ok(pretty(json!({
        "answer": answer,
        "engine": if engine == Engine::Auto { resolve(&p) } else { engine },
        "ppSubtree": pp_solution_subtree(&p, &db, &mu),
        "allAnswers": answers,
    })))
}

pub fn analyze_json(query: &str, bound: usize) -> Result<String, String> {
    let p = tree(query)?;
    let report = check_conditions(&p, bound, 10_000, &Config::default());
    Ok(serde_json::to_string_pretty(&report).expect("plain data"))
}

/// Treewidth and a decomposition of the query's Gaifman graph, plus the
/// graph itself for drawing.
pub fn treewidth_json(query: &str) -> Result<String, String> {
    let p = tree(query)?;
    let g: Graph = p.structure(p.full()).gaifman_graph();
    let (width, td) = treewidth_estimate(&g, Config::default().treewidth_vertex_limit);
    Ok(pretty(json!({
        "treewidth": width,
        "exact": width.is_exact(),
        "vertices": g.vertices(),
        "edges": g.edges(),
        "decomposition": td,
    })))
}

#[wasm_bindgen(js_name = evaluate)]
pub fn eval(query: &str, facts: &str, mapping: &str, engine: &str) -> Result<String, JsValue> {
    eval_json(query, facts, mapping, engine).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze(query: &str, bound: usize) -> Result<String, JsValue> {
    analyze_json(query, bound).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn treewidth(query: &str) -> Result<String, JsValue> {
    treewidth_json(query).map_err(|e| JsValue::from_str(&e))
}
