use std::fs;
use std::path::Path;

use lexsim::evaluation::{load_pairs, run_benchmark, summarize_pairs_csv};
use lexsim::fixtures::{planted_benchmark, PlantedConfig, TOY_EDGES};
use lexsim::node2vec::{generate_walks, train_node_embeddings};
use lexsim::{
    build_graph, load_corpus, ContextOptions, DocEmbeddingModel, Error, Method, NodeEmbeddingModel, ScoringContext,
    TrainConfig, WalkConfig,
};

fn write_docs(dir: &Path, names: &[&str]) {
    fs::create_dir_all(dir).unwrap();
    for n in names {
        fs::write(dir.join(format!("{n}.txt")), format!("Case {n}.\n\nReasons for {n}.")).unwrap();
    }
}

fn edges_file(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("citations.csv");
    fs::write(&path, format!("src,dst\n{body}")).unwrap();
    path
}

#[test]
fn toy_directory_loads() {
    let dir = tempfile::tempdir().unwrap();
    let docs = dir.path().join("docs");
    write_docs(&docs, &["A", "B", "C", "D", "E", "F"]);
    let body: String = TOY_EDGES.iter().map(|(s, t)| format!("{s},{t}\n")).collect();
    let corpus = load_corpus(&docs, &edges_file(dir.path(), &body), true).unwrap();
    assert_eq!(corpus.len(), 6);
    assert_eq!(corpus.citations.len(), 10);
    assert_eq!(corpus.get("C").unwrap().paragraphs, ["Case C.", "Reasons for C."]);
    assert_eq!(load_corpus(&docs, &edges_file(dir.path(), &body), true).unwrap(), corpus);

    let empty = load_corpus(&docs, &edges_file(dir.path(), ""), true).unwrap();
    assert!(empty.citations.is_empty());
    assert_eq!(build_graph(&empty).isolated_count(), 6);
}

#[test]
fn loader_errors() {
    let dir = tempfile::tempdir().unwrap();
    let docs = dir.path().join("docs");
    write_docs(&docs, &["A", "B"]);

    let self_loop = load_corpus(&docs, &edges_file(dir.path(), "A,A\n"), true);
    assert!(matches!(self_loop, Err(Error::Parse { line: 2, ref message, .. }) if message.contains("self-loop")));

    let unknown = edges_file(dir.path(), "A,B\nA,Z\n");
    assert!(matches!(load_corpus(&docs, &unknown, true), Err(Error::Parse { line: 3, .. })));
    let lenient = load_corpus(&docs, &unknown, false).unwrap();
    assert_eq!(build_graph(&lenient).node_count(), 3);

    let short = edges_file(dir.path(), "A\n");
    assert!(matches!(load_corpus(&docs, &short, true), Err(Error::Parse { .. })));
    fs::write(dir.path().join("bad.csv"), "from,to\nA,B\n").unwrap();
    assert!(load_corpus(&docs, &dir.path().join("bad.csv"), true).is_err());

    fs::write(docs.join("C.txt"), [0xff, 0xfe, 0x00]).unwrap();
    let edges = edges_file(dir.path(), "");
    assert!(matches!(load_corpus(&docs, &edges, true), Err(Error::InvalidUtf8 { .. })));
    fs::remove_file(docs.join("C.txt")).unwrap();

    assert!(matches!(load_corpus(&dir.path().join("missing"), &edges, true), Err(Error::Io { .. })));
}

#[test]
fn pairs_file_against_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let docs = dir.path().join("docs");
    write_docs(&docs, &["1992_47", "1992_76"]);
    let corpus = load_corpus(&docs, &edges_file(dir.path(), ""), true).unwrap();
    let pairs = dir.path().join("pairs.csv");
    fs::write(&pairs, "doc_a,doc_b,score\n1992_47,1992_76,0\n").unwrap();
    let loaded = load_pairs(&pairs, Some(&corpus), true).unwrap();
    assert_eq!(loaded.len(), 1);
    assert_eq!(loaded[0].expert_score, 0.0);
}

#[test]
fn model_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = build_graph(&lexsim::fixtures::toy_corpus());
    let walks = generate_walks(&g, &WalkConfig { num_walks_per_node: 3, walk_length: 10, ..Default::default() }).unwrap();
    let model = train_node_embeddings(&walks, &TrainConfig { dimensions: 8, ..TrainConfig::node2vec() }).unwrap();
    let path = dir.path().join("node.txt");
    model.save(&path).unwrap();
    let back = NodeEmbeddingModel::load(&path).unwrap();
    assert_eq!(back.vectors, model.vectors);
    assert_eq!(back.params, model.params);

    let (corpus, _) = lexsim::fixtures::two_topic_corpus(3, 10, 40, 1);
    let cfg = TrainConfig { dimensions: 8, epochs: 3, min_count: 1, ..TrainConfig::docvec() };
    let docs = lexsim::train_doc_embeddings(&corpus, &Default::default(), &cfg).unwrap();
    let path = dir.path().join("doc.txt");
    docs.save(&path).unwrap();
    let back = DocEmbeddingModel::load(&path).unwrap();
    assert!(back == docs);
    let mut again = Vec::new();
    back.write(&mut again).unwrap();
    assert_eq!(again, fs::read(&path).unwrap());
}

#[test]
fn report_round_trip_on_fixture() {
    let bench = planted_benchmark(&PlantedConfig { docs: 60, eval_docs: 30, pairs: 50, seed: 99, ..Default::default() });
    let ctx = ScoringContext::build(&bench.corpus, &bench.pairs, &[Method::Biblio, Method::ParagraphLinks], ContextOptions::default()).unwrap();
    let combos = vec!["biblio:paralinks:avg".parse().unwrap()];
    let report = run_benchmark(&ctx, &bench.pairs, &[Method::Biblio, Method::ParagraphLinks], &combos, false).unwrap();
    let mut csv = Vec::new();
    report.write_pairs_csv(&mut csv).unwrap();
    let recomputed: std::collections::BTreeMap<String, (f64, usize)> = summarize_pairs_csv(std::str::from_utf8(&csv).unwrap())
        .unwrap()
        .into_iter()
        .map(|(m, r, c)| (m, (r, c)))
        .collect();
    for r in &report.results {
        assert_eq!(recomputed[&r.method], (r.correlation, r.coverage));
    }
}
