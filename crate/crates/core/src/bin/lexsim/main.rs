mod config;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use config::{required, Cli, Command, ModelKind, RunConfig};
use lexsim::evaluation::{run_benchmark, ContextOptions, SegmentSource};
use lexsim::thematic::format_sidecar;
use lexsim::{
    build_graph, generate_walks, load_corpus, load_documents, load_pairs, train_node_embeddings, Corpus,
    CueLexicon, DocEmbeddingModel, DocumentId, Error, EvaluationPair, Method, NodeEmbeddingModel, Result,
    ScoringContext, Stopwords,
};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = RunConfig::resolve(cli.opts)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))?;
    match cli.command {
        Command::BuildGraph { export } => build_graph_cmd(&cfg, export.as_deref()),
        Command::Train { kind } => train_cmd(&cfg, kind),
        Command::Sim { method, a, b } => sim_cmd(&cfg, method, &a, &b),
        Command::Segment { ids } => segment_cmd(&cfg, &ids),
        Command::Evaluate => evaluate_cmd(&cfg),
    }
}

fn corpus(cfg: &RunConfig) -> Result<Corpus> {
    load_corpus(
        required(&cfg.corpus, "corpus")?,
        required(&cfg.citations, "citations")?,
        cfg.strict,
    )
}

fn stopwords(cfg: &RunConfig) -> Result<Stopwords> {
    cfg.stopwords.as_deref().map_or(Ok(Stopwords::empty()), Stopwords::load)
}

fn lexicon(cfg: &RunConfig) -> Result<CueLexicon> {
    cfg.lexicon.as_deref().map_or(Ok(CueLexicon::default()), CueLexicon::load)
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

fn build_graph_cmd(cfg: &RunConfig, export: Option<&Path>) -> Result<()> {
    let g = build_graph(&corpus(cfg)?);
    println!("{} nodes, {} edges", g.node_count(), g.edge_count());
    println!("{} isolated nodes", g.isolated_count());
    if let Some(path) = export.or(cfg.out.as_deref()) {
        create_parent(path)?;
        g.export_edges(path)?;
        log::info!("wrote edge list to {}", path.display());
    }
    Ok(())
}

fn train_cmd(cfg: &RunConfig, kind: ModelKind) -> Result<()> {
    let out = required(&cfg.out, "out")?;
    let corpus = corpus(cfg)?;
    create_parent(out)?;
    match kind {
        ModelKind::Node2vec => {
            let walks = generate_walks(&build_graph(&corpus), &cfg.walk)?;
            let model = train_node_embeddings(&walks, &cfg.node_train)?;
            model.save(out)?;
            println!("{} node vectors written to {}", model.vectors.len(), out.display());
        }
        ModelKind::Docvec => {
            // Documents in the pairs file are held out, as in `evaluate`.
            let holdout: BTreeSet<DocumentId> = match &cfg.pairs {
                Some(p) => load_pairs(p, Some(&corpus), cfg.strict)?
                    .into_iter()
                    .flat_map(|p| [p.a, p.b])
                    .collect(),
                None => BTreeSet::new(),
            };
            let model =
                lexsim::doc2vec::train_doc_embeddings_with(&corpus, &holdout, &cfg.doc_train, &stopwords(cfg)?)?;
            model.save(out)?;
            println!(
                "{} document vectors, {} words written to {}",
                model.doc_vectors.len(),
                model.vocabulary().len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn context_options(cfg: &RunConfig) -> Result<ContextOptions> {
    Ok(ContextOptions {
        walk: cfg.walk.clone(),
        node_train: cfg.node_train.clone(),
        doc_train: cfg.doc_train.clone(),
        infer_epochs: cfg.infer_epochs,
        para_threshold: cfg.para_threshold,
        dispersion_normalized: true,
        segments: match &cfg.segments_dir {
            Some(dir) => SegmentSource::Annotated(dir.clone()),
            None => SegmentSource::Heuristic(lexicon(cfg)?),
        },
        stopwords: stopwords(cfg)?,
        node_model: cfg.node_model.as_deref().map(NodeEmbeddingModel::load).transpose()?,
        doc_model: cfg.doc_model.as_deref().map(DocEmbeddingModel::load).transpose()?,
    })
}

fn sim_cmd(cfg: &RunConfig, method: Method, a: &str, b: &str) -> Result<()> {
    let corpus = corpus(cfg)?;
    let pair = EvaluationPair::new(DocumentId::new(a)?, DocumentId::new(b)?, 0.0)?;
    let ctx = ScoringContext::build(&corpus, std::slice::from_ref(&pair), &[method], context_options(cfg)?)?;
    let value = ctx.score(method, &pair.a, &pair.b)?;
    println!("{method} {a} {b} {value:.6}");
    Ok(())
}

fn segment_cmd(cfg: &RunConfig, ids: &[String]) -> Result<()> {
    let corpus = load_documents(required(&cfg.corpus, "corpus")?)?;
    let lexicon = lexicon(cfg)?;
    let docs: Vec<_> = if ids.is_empty() {
        corpus.documents.values().collect()
    } else {
        ids.iter()
            .map(|id| corpus.get(id).ok_or_else(|| Error::UnknownDocument(id.clone())))
            .collect::<Result<_>>()?
    };
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
    }
    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    for doc in docs {
        if doc.paragraphs.is_empty() {
            return Err(Error::EmptyDocument(doc.id.to_string()));
        }
        let labels = lexicon.label_paragraphs(doc);
        match &cfg.out {
            Some(dir) => {
                let path = dir.join(format!("{}.tsv", doc.id));
                fs::write(&path, format_sidecar(&labels)).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            }
            None => {
                for (i, role) in labels.iter().enumerate() {
                    writeln!(stdout, "{}\t{role}\t{i}", doc.id).map_err(|e| Error::Invalid(e.to_string()))?;
                }
            }
        }
    }
    Ok(())
}

fn evaluate_cmd(cfg: &RunConfig) -> Result<()> {
    let out = required(&cfg.out, "out")?;
    let corpus = corpus(cfg)?;
    let pairs = load_pairs(required(&cfg.pairs, "pairs")?, Some(&corpus), cfg.strict)?;
    let methods: Vec<Method> = if cfg.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        cfg.methods.clone()
    };
    let mut needed = methods.clone();
    needed.extend(cfg.combine.iter().flat_map(|c| [c.network, c.text]));

    let ctx = ScoringContext::build(&corpus, &pairs, &needed, context_options(cfg)?)?;
    let report = run_benchmark(&ctx, &pairs, &methods, &cfg.combine, cfg.rescale)?;

    fs::create_dir_all(out).map_err(|e| Error::Config(format!("{}: {e}", out.display())))?;
    let write = |name: &str, f: &dyn Fn(fs::File) -> Result<()>| -> Result<()> {
        let path = out.join(name);
        let file = fs::File::create(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        f(file)
    };
    write("pairs.csv", &|f| report.write_pairs_csv(f))?;
    write("summary.csv", &|f| report.write_summary_csv(f))?;
    if cfg.pretty {
        print!("{}", report.pretty());
    } else {
        report.write_summary_csv(std::io::stdout())?;
    }
    Ok(())
}
