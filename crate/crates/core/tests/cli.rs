use std::fs;
use std::process::{Command, Output};

use gas_core::cpdag::essential_graph;
use gas_core::edgelist::parse_dag;

fn gascd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gascd")).args(args).output().unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn generate_then_discover_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let json = dir.path().join("out.json");
    let g = graph.to_str().unwrap();
    ok(gascd(&["generate", "--family", "er", "--p", "8", "--density", "2", "--seed", "3", "--out", g]));
    let dag = parse_dag(&fs::read_to_string(&graph).unwrap()).unwrap();
    let want = essential_graph(&dag);
    for algo in ["gas", "gas+", "pc"] {
        ok(gascd(&["discover", "--algo", algo, "--graph", g, "--out", json.to_str().unwrap()]));
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
        assert_eq!(v["algo"], algo);
        assert_eq!(v["p"], 8);
        let pairs = |k: &str| -> Vec<(usize, usize)> { serde_json::from_value(v["edges"][k].clone()).unwrap() };
        assert_eq!(pairs("directed"), want.directed_edges(), "{algo}");
        assert_eq!(pairs("undirected"), want.undirected_edges(), "{algo}");
    }
}

#[test]
fn discover_from_csv_samples() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, data) = (dir.path().join("g.txt"), dir.path().join("x.csv"));
    ok(gascd(&[
        "generate", "--family", "ba", "--p", "6", "--density", "1", "--out", graph.to_str().unwrap(),
        "--samples", data.to_str().unwrap(), "--n", "500",
    ]));
    let text = ok(gascd(&["discover", "--tester", "fisherz", "--data", data.to_str().unwrap()]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["p"], 6);
    assert!(v["distinct_ci"].as_u64().unwrap() > 0);
}

#[test]
fn bench_is_reproducible_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.cfg");
    fs::write(&cfg, "family=er\np=5,6\ndensity=2\nseeds=0,1\nalgos=gas,pc\n").unwrap();
    let run = || ok(gascd(&["bench", "--config", cfg.to_str().unwrap(), "--no-timing", "--strict"]));
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 2);
    let mut rows = csv::Reader::from_reader(a.as_bytes());
    let col = rows.headers().unwrap().iter().position(|h| h == "wall_seconds").unwrap();
    for r in rows.records() {
        assert_eq!(r.unwrap()[col].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn verify_lb_and_cpdag() {
    let table = ok(gascd(&["verify-lb", "--s", "3"]));
    assert!(table.contains("traces: 4"));
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    fs::write(&graph, "p=3\n0 -> 1\n2 -> 1\n").unwrap();
    let out = ok(gascd(&["cpdag", "--graph", graph.to_str().unwrap()]));
    assert_eq!(out, "p=3\n0 -> 1\n2 -> 1\n");
}

#[test]
fn bad_input_exits_with_error() {
    let out = gascd(&["discover", "--graph", "/nonexistent/graph.txt"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gascd(&["verify-lb", "--s", "99"]);
    assert!(!out.status.success());
}
