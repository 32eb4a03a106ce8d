use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lexsim::evaluation::summarize_pairs_csv;
use lexsim::fixtures::{planted_benchmark, PlantedConfig, TOY_EDGES};

fn lexsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lexsim"))
        .current_dir(dir)
        .args(args)
        .env_remove("LEXSIM_CONFIG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Single `error[code]: ...` line on stderr, nonzero exit.
fn failure(o: &Output) -> String {
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error["), "{err}");
    err
}

fn toy(dir: &Path) {
    fs::create_dir_all(dir.join("docs")).unwrap();
    for d in ["A", "B", "C", "D", "E", "F"] {
        let text = format!("Judgment {d}.\n\nThe appellant contended that {d} was wrong.\n\nWe dismiss the appeal.");
        fs::write(dir.join("docs").join(format!("{d}.txt")), text).unwrap();
    }
    let mut csv = String::from("src,dst\n");
    for (s, t) in TOY_EDGES {
        csv.push_str(&format!("{s},{t}\n"));
    }
    fs::write(dir.join("citations.csv"), csv).unwrap();
}

const TOY: [&str; 4] = ["--corpus", "docs", "--citations", "citations.csv"];

fn with<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    TOY.iter().copied().chain(extra.iter().copied()).collect()
}

#[test]
fn build_graph_stats_and_export() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = stdout(&lexsim(dir.path(), &with(&["build-graph", "--export", "edges.csv"])));
    assert_eq!(out, "6 nodes, 10 edges\n0 isolated nodes\n");
    let edges = fs::read_to_string(dir.path().join("edges.csv")).unwrap();
    assert_eq!(edges.lines().count(), 11);

    fs::write(dir.path().join("none.csv"), "src,dst\n").unwrap();
    let out = stdout(&lexsim(dir.path(), &["--corpus", "docs", "--citations", "none.csv", "build-graph"]));
    assert_eq!(out, "6 nodes, 0 edges\n6 isolated nodes\n");
}

#[test]
fn missing_corpus_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let err = failure(&lexsim(dir.path(), &["--corpus", "nowhere", "--citations", "citations.csv", "build-graph"]));
    assert!(err.contains("nowhere"), "{err}");
}

#[test]
fn sim_network_methods() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    assert_eq!(stdout(&lexsim(dir.path(), &with(&["sim", "biblio", "A", "B"]))), "biblio A B 0.500000\n");
    assert_eq!(stdout(&lexsim(dir.path(), &with(&["sim", "cocite", "A", "B"]))), "cocite A B 0.333333\n");
    assert_eq!(stdout(&lexsim(dir.path(), &with(&["sim", "dispersion", "A", "B"]))), "dispersion A B 0.500000\n");
    let err = failure(&lexsim(dir.path(), &with(&["sim", "biblio", "A", "A"])));
    assert!(err.starts_with("error[identical-pair]"), "{err}");
    let err = failure(&lexsim(dir.path(), &with(&["sim", "biblio", "A", "Z"])));
    assert!(err.starts_with("error[unknown-document]"), "{err}");
    let err = failure(&lexsim(dir.path(), &with(&["sim", "median", "A", "B"])));
    assert!(err.starts_with("error[usage]"), "{err}");
}

#[test]
fn train_node2vec_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let args = ["--dimensions", "16", "--walks", "4", "--walk-length", "20", "train", "node2vec"];
    let first = stdout(&lexsim(dir.path(), &with(&[&args[..], &["--out", "m1.txt"]].concat())));
    assert!(first.starts_with("6 node vectors"), "{first}");
    stdout(&lexsim(dir.path(), &with(&[&args[..], &["--out", "m2.txt"]].concat())));
    let m1 = fs::read(dir.path().join("m1.txt")).unwrap();
    assert_eq!(m1, fs::read(dir.path().join("m2.txt")).unwrap());
    let header = String::from_utf8(m1).unwrap().lines().next().unwrap().to_owned();
    for key in ["dimensions=16", "walks=4", "length=20", "p=1", "q=1", "seed="] {
        assert!(header.contains(key), "{header}");
    }

    let sim = stdout(&lexsim(dir.path(), &with(&["--node-model", "m1.txt", "sim", "node2vec", "A", "B"])));
    assert!(sim.starts_with("node2vec A B "), "{sim}");
}

#[test]
fn train_docvec_with_everything_held_out_fails() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    fs::write(dir.path().join("pairs.csv"), "doc_a,doc_b,score\nA,B,1\nC,D,2\nE,F,3\n").unwrap();
    let err = failure(&lexsim(dir.path(), &with(&["--pairs", "pairs.csv", "--out", "d.txt", "train", "docvec"])));
    assert!(err.starts_with("error[empty-training]"), "{err}");

    let out = stdout(&lexsim(dir.path(), &with(&["--doc-min-count", "1", "--out", "d.txt", "train", "docvec"])));
    assert!(out.starts_with("6 document vectors"), "{out}");
}

#[test]
fn segment_prints_and_writes_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    let out = stdout(&lexsim(dir.path(), &["--corpus", "docs", "segment", "A"]));
    assert_eq!(out, "A\tFacts\t0\nA\tArguments\t1\nA\tRulingPresentCourt\t2\n");
    stdout(&lexsim(dir.path(), &["--corpus", "docs", "--out", "segments", "segment"]));
    let sidecar = fs::read_to_string(dir.path().join("segments/B.tsv")).unwrap();
    assert_eq!(sidecar, "Facts\t0\nArguments\t1\nRulingPresentCourt\t2\n");

    // The written sidecars drive annotated thematic scoring.
    let out = stdout(&lexsim(dir.path(), &with(&["--segments-dir", "segments", "sim", "thematic-max", "A", "B"])));
    assert!(out.starts_with("thematic-max A B "), "{out}");
}

fn planted(dir: &Path, noise: f64) {
    let bench = planted_benchmark(&PlantedConfig { docs: 60, eval_docs: 30, pairs: 40, noise, seed: 5, ..Default::default() });
    bench.write_to(dir).unwrap();
}

const PLANTED: [&str; 6] = ["--corpus", "docs", "--citations", "citations.csv", "--pairs", "pairs.csv"];

#[test]
fn evaluate_noise_free_planted_relation_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path(), 0.0);
    let args: Vec<&str> = PLANTED.iter().copied().chain(["--method", "biblio", "--out", "r", "evaluate"]).collect();
    stdout(&lexsim(dir.path(), &args));
    let summary = fs::read_to_string(dir.path().join("r/summary.csv")).unwrap();
    let row = summary.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[0], "biblio");
    assert!((fields[1].parse::<f64>().unwrap() - 1.0).abs() <= 1e-9, "{row}");
}

#[test]
fn evaluate_zero_coverage_names_the_method() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path(), 1.0);
    fs::create_dir(dir.path().join("empty")).unwrap();
    let args: Vec<&str> = PLANTED
        .iter()
        .copied()
        .chain(["--segments-dir", "empty", "--method", "biblio", "--method", "thematic-max", "--out", "r", "evaluate"])
        .collect();
    let err = failure(&lexsim(dir.path(), &args));
    assert!(err.starts_with("error[no-scorable-pairs]") && err.contains("thematic-max"), "{err}");
}

#[test]
fn evaluate_summary_matches_pairs_file() {
    let dir = tempfile::tempdir().unwrap();
    planted(dir.path(), 1.0);
    let args: Vec<&str> = PLANTED
        .iter()
        .copied()
        .chain(["--method", "biblio", "--method", "cocite", "--method", "paralinks", "--method", "thematic-avg"])
        .chain(["--combine", "biblio:paralinks:max", "--combine", "cocite:thematic-avg:avg", "--rescale"])
        .chain(["--out", "r", "evaluate"])
        .collect();
    let printed = stdout(&lexsim(dir.path(), &args));
    let summary = fs::read_to_string(dir.path().join("r/summary.csv")).unwrap();
    assert_eq!(printed, summary);

    let pairs = fs::read_to_string(dir.path().join("r/pairs.csv")).unwrap();
    let recomputed = summarize_pairs_csv(&pairs).unwrap();
    let rows: Vec<Vec<String>> = summary.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect();
    assert_eq!(rows.len(), 8);
    for (row, (method, r, coverage)) in rows.iter().zip(recomputed) {
        assert_eq!(row[0], method);
        assert_eq!(row[1].parse::<f64>().unwrap(), r);
        assert_eq!(row[2].parse::<usize>().unwrap(), coverage);
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    toy(dir.path());
    fs::write(
        dir.path().join("run.toml"),
        "corpus = \"docs\"\ncitations = \"citations.csv\"\nseed = 3\n\n[node2vec]\ndimensions = 8\nwalks = 2\nwalk_length = 10\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lexsim"))
        .current_dir(dir.path())
        .args(["--dimensions", "4", "--out", "m.txt", "train", "node2vec"])
        .env("LEXSIM_CONFIG", "run.toml")
        .output()
        .unwrap();
    stdout(&out);
    let model = fs::read_to_string(dir.path().join("m.txt")).unwrap();
    let header = model.lines().next().unwrap();
    assert!(header.contains("dimensions=4") && header.contains("walks=2") && header.contains("seed=3"), "{header}");

    fs::write(dir.path().join("bad.toml"), "dimension = 3\n").unwrap();
    let err = failure(&lexsim(dir.path(), &["--config", "bad.toml", "build-graph"]));
    assert!(err.starts_with("error[config]"), "{err}");
}
