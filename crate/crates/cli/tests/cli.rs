use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use tempfile::TempDir;

const TICKET_QUERY: &str = "SELECT * WHERE { ticket(?t) OPTIONAL { seatclass(?s,?c) empty(?s) class(?t,?c) } OPTIONAL { seatclass(?s,?c) empty(?s) } }";
const TICKET_FACTS: &str =
    "ticket(1).\nclass(1,E).\nseatclass(1,E).\nseatclass(2,F).\nempty(1).\nempty(2).\n";

fn ptree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn put(&self, name: &str, text: &str) -> String {
        let path: PathBuf = self.0.path().join(name);
        fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    }
}

#[test]
fn eval_ticket_yes_and_no() {
    let f = Files::new();
    let q = f.put("q.rq", TICKET_QUERY);
    let d = f.put("d.facts", TICKET_FACTS);
    let yes = f.put("yes.json", r#"{"t":"1","s":"1","c":"E"}"#);
    for engine in ["auto", "brute", "csts"] {
        let o = ptree(&["eval", &q, &d, &yes, "--engine", engine]);
        assert_eq!(o.status.code(), Some(0), "{engine}");
        assert_eq!(stdout(&o).trim(), "yes");
        let o = ptree(&[
            "eval",
            &q,
            &d,
            r#"{"?t":"1","s":"2","c":"F"}"#,
            "--engine",
            engine,
        ]);
        assert_eq!(o.status.code(), Some(1), "{engine}");
    }
}

#[test]
fn eval_json_reports_the_witnessing_subtree() {
    let f = Files::new();
    let q = f.put("q.rq", TICKET_QUERY);
    let d = f.put("d.facts", TICKET_FACTS);
    let o = ptree(&["eval", &q, &d, r#"{"t":"1","s":"2","c":"F"}"#, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["answer"], false);
    assert_eq!(v["engine"], "csts");
    assert_eq!(v["ppSubtree"], serde_json::json!([0, 2]));
}

#[test]
fn usage_and_data_errors_exit_2() {
    let f = Files::new();
    let q = f.put("q.rq", TICKET_QUERY);
    let d = f.put("d.facts", TICKET_FACTS);
    let bad = f.put("bad.facts", "ticket(1).\nticket(1,2).\n");
    assert_eq!(
        ptree(&["eval", &q, &d, r#"{"x":"1"}"#]).status.code(),
        Some(2)
    );
    assert_eq!(ptree(&["eval", &q, &bad, "{}"]).status.code(), Some(2));
    assert_eq!(
        ptree(&["eval", &q, &d, "{}", "--engine", "fast"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ptree(&["frobnicate"]).status.code(), Some(2));
    let o = ptree(&["eval", &q, &d, "{}", "--engine", "fpt"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("well-designed"));
}

#[test]
fn oracle_budget_exits_3() {
    let f = Files::new();
    let q = f.put("q.rq", TICKET_QUERY);
    let d = f.put("d.facts", TICKET_FACTS);
    let o = ptree(&["--oracle-max-vars", "1", "solve", &q, &d]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn solve_lists_the_single_answer() {
    let f = Files::new();
    let q = f.put("q.rq", TICKET_QUERY);
    let d = f.put("d.facts", TICKET_FACTS);
    let o = ptree(&["solve", &q, &d, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!([{"c": "E", "s": "1", "t": "1"}]));
}

#[test]
fn analyze_json_for_tree_json_input() {
    let f = Files::new();
    let q = f.put(
        "p.json",
        r#"{"freeVars":["x","w"],"nodes":[{"id":0,"parent":null,"atoms":["r1(x,y)"]},{"id":1,"parent":0,"atoms":["r2(y,z)","r3(z,w)"]}]}"#,
    );
    let o = ptree(&["analyze", &q, "--c", "1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["well_designed"], true);
    assert_eq!(v["condition_a"]["verdict"], "holds");
    assert_eq!(v["condition_b"]["width"], 1);
    assert_eq!(v["condition_c"]["max_width"]["upper"], 1);
}

#[test]
fn csts_prints_pairs_with_widths() {
    let f = Files::new();
    let q = f.put("q.rq", TICKET_QUERY);
    let o = ptree(&["csts", &q]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pairs = v.as_array().unwrap();
    assert!(!pairs.is_empty());
    assert!(pairs
        .iter()
        .all(|p| p["extcore"]["width"]["upper"].is_u64()));
    let projected = f.put(
        "p.rq",
        "SELECT ?t WHERE { ticket(?t) OPTIONAL { class(?t,?c) } }",
    );
    assert_eq!(ptree(&["csts", &projected]).status.code(), Some(2));
}

#[test]
fn extcore_and_ext_on_a_pair_file() {
    let f = Files::new();
    let pair = f.put("p.pair", "#anchor y\n#extension\nr2(y,z).\nr3(z,w).\n");
    let o = ptree(&["extcore", &pair]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("r2[1=y](z)."), "{text}");
    assert!(text.contains("# treewidth: 1"));

    let target = f.put("t.facts", "r2(a,b).\nr3(b,c).\nr2(d,d).\n");
    assert_eq!(
        ptree(&["ext", &pair, &target, r#"{"y":"a"}"#])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        ptree(&["ext", &pair, &target, r#"{"y":"d"}"#])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ptree(&["ext", &pair, &target, r#"{"y":"zz"}"#])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn treewidth_of_query_and_facts() {
    let f = Files::new();
    let q = f.put(
        "q.rq",
        "SELECT * WHERE { e(?a,?b) e(?b,?c) e(?c,?a) e(?a,?d) e(?b,?d) e(?c,?d) }",
    );
    let o = ptree(&["treewidth", &q, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["treewidth"]["upper"], 3);
    assert_eq!(v["exact"], true);
    let d = f.put("d.facts", "e(1,2).\ne(2,3).\ne(3,4).\ne(4,1).\n");
    assert!(stdout(&ptree(&["treewidth", &d])).starts_with("treewidth: 2"));
}

#[test]
fn fuzz_is_clean_and_deterministic() {
    let a = ptree(&["fuzz", "--trials", "40", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(stdout(&a).contains("divergences: 0"));
    let b = ptree(&["fuzz", "--trials", "40", "--seed", "7"]);
    assert_eq!(stdout(&a), stdout(&b));
}
