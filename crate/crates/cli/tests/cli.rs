use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const EDGE_C35: &str = "[[[0,0],[1,0]]]";
const GOLDEN_C35: &str = "0,1,6,8,13,14,15,20,21,22,27,29,34";

fn satreal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satreal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn satreal_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_satreal"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_golden_set() {
    let out = satreal(&[
        "verify", "--order", "5,1,7,1", "--set", GOLDEN_C35, "--edges", EDGE_C35,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["verified"], true);
}

#[test]
fn verify_rejects_trivial_set() {
    let out = satreal(&[
        "verify", "--order", "5,1,7,1", "--set", "0", "--edges", EDGE_C35,
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verified"], false);
}

#[test]
fn oracle_on_c10_lists_the_unrealizable_system() {
    let out = satreal(&["oracle", "--order", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(
        v["unrealized_saturated"],
        serde_json::json!([[[[0, 0], [0, 1]]]])
    );
    assert_eq!(v["theorem_applies"], false);
    assert_eq!(v["total"], 32);
}

#[test]
fn oracle_on_c35_passes() {
    let out = satreal(&["oracle", "--order", "5,1,7,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["census"].as_array().unwrap().len(), 7);
}

#[test]
fn oracle_respects_cap() {
    let out = satreal(&["oracle", "--order", "35", "--cap", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_satreal"))
        .args(["oracle", "--order", "35"])
        .env("SATREAL_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sampled_oracle_is_labelled() {
    let out = satreal(&[
        "oracle", "--order", "5,1,11,1", "--sample", "200", "--seed", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["mode"]["kind"], "sampled");
    assert_eq!(v["total"], 200);
}

#[test]
fn golden_realization_with_hand_choices() {
    let out = satreal(&[
        "realize",
        "--order",
        "5,1,7,1",
        "--edges",
        EDGE_C35,
        "--bezout",
        "-2,3",
        "--offset-policy",
        "paper-c35",
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some(GOLDEN_C35));
}

#[test]
fn realize_output_verifies() {
    for (order, edges) in [
        ("5,1,7,1", EDGE_C35),
        ("5,2,7,1", "[[[0,0],[1,0]],[[0,1],[1,1]]]"),
        ("7,1,5,2", "[]"),
        ("5,3,7,0", "[[[1,0],[2,0]]]"),
    ] {
        let out = satreal(&["realize", "--order", order, "--edges", edges, "--generate"]);
        assert_eq!(out.status.code(), Some(0), "{order} {edges}");
        let back = satreal_stdin(&["verify", "--certificate", "-"], &out.stdout);
        assert_eq!(
            back.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&back.stderr)
        );
    }
}

#[test]
fn realize_rejects_bad_input() {
    let out = satreal(&[
        "realize",
        "--order",
        "5,1,7,1",
        "--edges",
        "[[[0,0],[1,1]]]",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("restriction"));
    let out = satreal(&[
        "realize",
        "--order",
        "5,1,7,1",
        "--edges",
        "[[[0,0],[1,1]]]",
        "--generate",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("saturated"));
    let out = satreal(&["realize", "--order", "3,1,7,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = satreal(&["realize", "--order", "5,1,7,1", "--bezout", "1,1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = satreal(&["realize", "--order", "5,1,7"]);
    assert_eq!(out.status.code(), Some(2));
    let out = satreal(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn edges_from_file() {
    let dir = std::env::temp_dir().join(format!("satreal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("edges.json");
    std::fs::write(&path, EDGE_C35).unwrap();
    let out = satreal(&[
        "export-dot",
        "--order",
        "35",
        "--edges",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("s0_0 -> s1_0;"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn compare_macbrough() {
    let out = satreal(&[
        "compare-macbrough",
        "--order",
        "5,1,7,1",
        "--edges",
        EDGE_C35,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(
        v["diagrams"]["indexing_set"]["members"],
        serde_json::json!([0, 2, 5, 7, 12, 14, 21, 23, 28, 30, 33])
    );
    assert_eq!(v["agree"], true);

    let out = satreal(&[
        "compare-macbrough",
        "--order",
        "25",
        "--edges",
        "[[[1,0],[2,0]]]",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["same_set"], true);

    let out = satreal(&[
        "compare-macbrough",
        "--order",
        "35",
        "--edges",
        "[[[0,0],[1,0]],[[0,1],[1,1]]]",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["agree"], false);
}

#[test]
fn enumerate_and_subgroups() {
    let v = json(&satreal(&["enumerate", "--order", "35"]));
    assert_eq!(v["count"], 10);
    let v = json(&satreal(&["enumerate", "--order", "35", "--saturated"]));
    assert_eq!(v["count"], 7);
    let v = json(&satreal(&["subgroups", "--order", "5,1,7,1"]));
    let orders: Vec<u64> = v["subgroups"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["order"].as_u64().unwrap())
        .collect();
    assert_eq!(orders, vec![1, 7, 5, 35]);
}

#[test]
fn output_is_deterministic() {
    let a = satreal(&["oracle", "--order", "5,1,7,1"]);
    let b = satreal(&["oracle", "--order", "5,1,7,1"]);
    assert_eq!(a.stdout, b.stdout);
}
