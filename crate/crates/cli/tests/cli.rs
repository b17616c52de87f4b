use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use shm_core::{parse_program, Rational};
use tempfile::TempDir;

const COIN: &str = "0: [1/2] INC 0 | [1/2] DEC 9,2\n";
const TWO_THIRDS: &str = "0: [1/3] INC 0 | [1/3] INC 0 | [1/3] DEC 9,2\n";
const ONE_THIRD: &str = "0: [1/3] INC 0 | [2/3] DEC 9,2\n";
const LOOPING: &str = "0: INC 9\n1: DEC 9,0\n";
const ADD: &str = "# R0 += R1\n0: DEC 1,3\n1: INC 9\n2: DEC 9,6\n3: INC 0\n4: INC 9\n5: DEC 9,0\n";

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn shm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shm"))
        .args(args)
        .env_remove("SHM_NODE_CAP")
        .output()
        .unwrap()
}

fn shm_file(file: &Path, args: &[&str]) -> Output {
    let mut all = vec![args[0], file.to_str().unwrap()];
    all.extend_from_slice(&args[1..]);
    shm(&all)
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn structured(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn exact(v: &Value) -> Rational {
    v["exact"].as_str().unwrap().parse().unwrap()
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn run_add_program() {
    let dir = TempDir::new().unwrap();
    let add = write(&dir, "add.shm", ADD);
    let out = shm_file(
        &add,
        &[
            "run",
            "--reg",
            "0=2",
            "--reg",
            "1=3",
            "--fuel",
            "100",
            "--format",
            "structured",
        ],
    );
    assert_eq!(code(&out), 0);
    let doc = structured(&out);
    assert_eq!(doc["result"]["status"], "halted");
    assert_eq!(doc["result"]["steps"], 15);
    assert_eq!(doc["result"]["final"]["registers"]["0"], 5);
    assert_eq!(doc["result"]["final"]["counter"], 6);
}

#[test]
fn run_trace_lists_the_chain() {
    let dir = TempDir::new().unwrap();
    let add = write(&dir, "add.shm", ADD);
    let out = shm_file(
        &add,
        &[
            "run",
            "--reg",
            "0=2",
            "--reg",
            "1=3",
            "--trace",
            "--format",
            "structured",
        ],
    );
    let chain = structured(&out)["result"]["chain"].as_array().unwrap().clone();
    assert_eq!(chain.len(), 16);
    assert_eq!(chain[0]["counter"], 0);
    assert_eq!(chain[15]["counter"], 6);
    let text = stdout(&shm_file(&add, &["run", "--reg", "1=1", "--trace"]));
    assert!(text.contains("0: [R1=1] | 0"));
}

#[test]
fn run_empty_and_looping() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.shm", "");
    let out = shm_file(&empty, &["run"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("steps: 0"));

    let looping = write(&dir, "loop.shm", LOOPING);
    let out = shm_file(&looping, &["run", "--fuel", "50"]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).contains("status: fuel-exhausted"));
    assert!(stdout(&out).contains("steps: 50"));
}

#[test]
fn run_rejects_choice_lines() {
    let dir = TempDir::new().unwrap();
    let coin = write(&dir, "coin.shm", COIN);
    assert_eq!(code(&shm_file(&coin, &["run"])), 3);
}

#[test]
fn parse_errors_exit_two_with_location() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.shm", "0: INC 1\n1: JMP 3\n");
    for cmd in ["run", "tree", "prob", "check"] {
        let out = shm_file(&bad, &[cmd]);
        assert_eq!(code(&out), 2, "{cmd}");
        assert!(
            String::from_utf8_lossy(&out.stderr).contains("bad.shm:2:"),
            "{cmd}"
        );
    }
    assert_eq!(code(&shm(&["run", "/nonexistent/file.shm"])), 2);
    assert_eq!(code(&shm(&["prob"])), 2);
}

#[test]
fn tree_exports() {
    let dir = TempDir::new().unwrap();
    let branch = write(&dir, "branch.shm", "0: INC 0 | INC 1\n");
    let out = shm_file(&branch, &["tree", "--depth", "1", "--format", "structured"]);
    assert_eq!(code(&out), 0);
    let tree = &structured(&out)["result"]["tree"];
    assert_eq!(tree["node_count"], 3);
    assert_eq!(tree["edges"].as_array().unwrap().len(), 2);
    assert_eq!(tree["truncated"], false);
    assert_eq!(tree["nodes"][1]["status"], "leaf-halted");

    let dot = stdout(&shm_file(&branch, &["tree", "--depth", "1", "--format", "graph"]));
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("->").count(), 2);

    let looping = write(&dir, "loop.shm", LOOPING);
    let out = shm_file(&looping, &["tree", "--depth", "4", "--format", "structured"]);
    let doc = structured(&out);
    assert_eq!(doc["result"]["tree"]["truncated"], true);
    assert_eq!(doc["result"]["tree"]["edges"].as_array().unwrap().len(), 4);
    assert_eq!(doc["result"]["halting"]["all_halted"], false);
    assert_eq!(doc["result"]["accepting_leaf"]["status"], "inconclusive");
}

#[test]
fn prob_ground_truths() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (COIN, q(1, 2), q(1, 2), q(0, 1)),
        (TWO_THIRDS, q(2, 3), q(1, 3), q(0, 1)),
        (LOOPING, q(0, 1), q(0, 1), q(1, 1)),
    ];
    for (i, (text, a, r, u)) in cases.into_iter().enumerate() {
        let file = write(&dir, &format!("p{i}.shm"), text);
        for engine in ["naive", "memoized"] {
            let out = shm_file(
                &file,
                &[
                    "prob",
                    "--fuel",
                    "10",
                    "--engine",
                    engine,
                    "--format",
                    "structured",
                ],
            );
            assert_eq!(code(&out), 0);
            let result = &structured(&out)["result"];
            assert_eq!(exact(&result["accept"]), a);
            assert_eq!(exact(&result["reject"]), r);
            assert_eq!(exact(&result["unresolved"]), u);
        }
    }
}

#[test]
fn prob_weight_and_budget_errors() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.shm", "0: [1/2] INC 0 | [1/3] DEC 9,2\n");
    assert_eq!(code(&shm_file(&bad, &["prob"])), 5);
    assert_eq!(code(&shm_file(&bad, &["estimate", "--epsilon", "1/2"])), 5);
    assert_eq!(code(&shm_file(&bad, &["decide", "--eta", "1/6"])), 5);

    let looping = write(&dir, "loop.shm", LOOPING);
    assert_eq!(code(&shm_file(&looping, &["prob", "--node-cap", "5"])), 6);
    let out = Command::new(env!("CARGO_BIN_EXE_shm"))
        .args(["prob", looping.to_str().unwrap()])
        .env("SHM_NODE_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(code(&out), 6);
}

#[test]
fn estimate_reports() {
    let dir = TempDir::new().unwrap();
    let coin = write(&dir, "coin.shm", COIN);
    let out = shm_file(
        &coin,
        &[
            "estimate",
            "--epsilon",
            "1/10",
            "--seed",
            "42",
            "--format",
            "structured",
        ],
    );
    assert_eq!(code(&out), 0);
    let doc = structured(&out);
    assert_eq!(doc["result"]["sample_count"], 110);
    assert_eq!(doc["result"]["unresolved"], 0);
    assert_eq!(doc["parameters"]["seed"], 42);

    let accepting = write(&dir, "acc.shm", "0: INC 0\n");
    let out = shm_file(
        &accepting,
        &["estimate", "--epsilon", "1/4", "--format", "structured"],
    );
    assert_eq!(exact(&structured(&out)["result"]["estimate"]), q(1, 1));

    for eps in ["0", "3/2"] {
        assert_eq!(code(&shm_file(&coin, &["estimate", "--epsilon", eps])), 7);
    }
}

#[test]
fn decide_exit_codes() {
    let dir = TempDir::new().unwrap();
    let two = write(&dir, "two.shm", TWO_THIRDS);
    let one = write(&dir, "one.shm", ONE_THIRD);
    let looping = write(&dir, "loop.shm", LOOPING);
    assert_eq!(
        code(&shm_file(&two, &["decide", "--eta", "1/6", "--mode", "exact"])),
        0
    );
    assert_eq!(
        code(&shm_file(&one, &["decide", "--eta", "1/6", "--mode", "exact"])),
        1
    );
    let out = shm_file(
        &looping,
        &["decide", "--eta", "1/6", "--mode", "exact", "--fuel", "30"],
    );
    assert_eq!(code(&out), 8);
    assert!(stdout(&out).contains("undetermined"));
    assert_eq!(code(&shm_file(&two, &["decide", "--eta", "1/2"])), 7);

    let out = shm_file(
        &two,
        &[
            "decide",
            "--eta",
            "1/6",
            "--mode",
            "sampled",
            "--format",
            "structured",
        ],
    );
    let doc = structured(&out);
    assert_eq!(doc["result"]["evidence"]["kind"], "estimate");
    assert_eq!(doc["result"]["evidence"]["estimate"]["sample_count"], 40);
}

#[test]
fn gen_programs_parse() {
    let out = shm(&["gen", "--mode", "det", "--lines", "5", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let parsed = parse_program(&stdout(&out)).unwrap();
    assert_eq!(parsed.program.len(), 5);
    assert!(parsed.program.is_deterministic());

    let prob = shm(&[
        "gen",
        "--mode",
        "prob",
        "--lines",
        "6",
        "--max-choices",
        "3",
        "--seed",
        "4",
    ]);
    let text = stdout(&prob);
    assert!(text.contains('/'));
    parse_program(&text).unwrap();
    assert_eq!(
        text,
        stdout(&shm(&[
            "gen",
            "--mode",
            "prob",
            "--lines",
            "6",
            "--max-choices",
            "3",
            "--seed",
            "4"
        ]))
    );

    assert_eq!(code(&shm(&["gen", "--max-choices", "0"])), 9);
    assert_eq!(code(&shm(&["gen", "--lines", "5..2"])), 9);
}

#[test]
fn check_reports() {
    let dir = TempDir::new().unwrap();
    let two = write(&dir, "two.shm", TWO_THIRDS);
    let out = shm_file(&two, &["check"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("ok\n"));
    assert!(stdout(&out).contains("mode: probabilistic"));

    let empty = write(&dir, "empty.shm", "");
    let out = shm_file(&empty, &["check", "--format", "structured"]);
    assert_eq!(structured(&out)["result"]["lines"], 0);

    let bad = write(&dir, "bad.shm", "0: INC 1\n\n0: [1/2] INC 0 | [1/3] DEC 9,2\n");
    let out = shm_file(&bad, &["check"]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("bad.shm:3"), "{err}");
}

#[test]
fn timing_only_when_requested() {
    let dir = TempDir::new().unwrap();
    let coin = write(&dir, "coin.shm", COIN);
    let plain = structured(&shm_file(&coin, &["prob", "--format", "structured"]));
    assert!(plain["timing"].is_null());
    let timed = structured(&shm_file(&coin, &["prob", "--format", "structured", "--timing"]));
    assert!(timed["timing"]["wall_ms"].is_number());
}
