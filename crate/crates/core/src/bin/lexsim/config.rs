//! Flag and config-file merging. Flags win over the file; the file wins over
//! built-in defaults. Relative paths in the file resolve against its
//! directory.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use lexsim::evaluation::Combination;
use lexsim::{Error, Method, Result, TrainConfig, WalkConfig};

#[derive(Parser, Debug)]
#[command(name = "lexsim", version, about = "Legal document similarity and benchmarking")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Load the corpus and print citation graph statistics.
    BuildGraph {
        /// Write the edge list as `src,dst` CSV.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Train and save an embedding model.
    Train {
        kind: ModelKind,
    },
    /// Score one document pair.
    Sim {
        method: Method,
        a: String,
        b: String,
    },
    /// Label paragraphs with rhetorical roles; writes sidecar files under
    /// `--out` or prints `<id>\t<role>\t<paragraph>` lines.
    Segment {
        /// Documents to segment; all when omitted.
        ids: Vec<String>,
    },
    /// Score expert-annotated pairs and write `pairs.csv` and `summary.csv`
    /// under `--out`.
    Evaluate,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Node2vec,
    Docvec,
}

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// TOML config file.
    #[arg(long, global = true, env = "LEXSIM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Directory of `<id>.txt` documents.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// `src,dst` citation CSV.
    #[arg(long, global = true)]
    pub citations: Option<PathBuf>,
    /// `doc_a,doc_b,score` expert pairs CSV.
    #[arg(long, global = true)]
    pub pairs: Option<PathBuf>,
    /// Directory of `<id>.tsv` role annotations; cue heuristic when absent.
    #[arg(long, global = true)]
    pub segments_dir: Option<PathBuf>,
    /// Cue lexicon replacing the shipped one.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Stopword file, one word per line.
    #[arg(long, global = true)]
    pub stopwords: Option<PathBuf>,
    /// Method to evaluate; repeatable.
    #[arg(long = "method", global = true)]
    pub methods: Vec<Method>,
    /// `network:text:agg` combination to evaluate; repeatable.
    #[arg(long = "combine", global = true)]
    pub combine: Vec<Combination>,
    #[arg(long, global = true)]
    pub para_threshold: Option<f64>,
    /// Also report combinations over min-max rescaled constituents.
    #[arg(long, global = true)]
    pub rescale: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// 1 is deterministic; more is faster.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (train) or directory (evaluate, segment).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Treat unknown citation endpoints and pair ids as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Pre-trained node embedding model.
    #[arg(long, global = true)]
    pub node_model: Option<PathBuf>,
    /// Pre-trained document embedding model.
    #[arg(long, global = true)]
    pub doc_model: Option<PathBuf>,
    /// Walk the directed citation graph instead of its undirected projection.
    #[arg(long, global = true)]
    pub directed_walks: bool,
    /// Print a human-readable table as well as the CSV reports.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[arg(long, global = true)]
    pub dimensions: Option<usize>,
    #[arg(long, global = true)]
    pub walks: Option<usize>,
    #[arg(long, global = true)]
    pub walk_length: Option<usize>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub window: Option<usize>,
    #[arg(long, global = true)]
    pub negative: Option<usize>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub doc_dimensions: Option<usize>,
    #[arg(long, global = true)]
    pub doc_epochs: Option<usize>,
    #[arg(long, global = true)]
    pub doc_min_count: Option<usize>,
    #[arg(long, global = true)]
    pub infer_epochs: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    citations: Option<PathBuf>,
    pairs: Option<PathBuf>,
    segments_dir: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    methods: Option<Vec<String>>,
    combine: Option<Vec<String>>,
    para_threshold: Option<f64>,
    rescale: Option<bool>,
    seed: Option<u64>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    strict: Option<bool>,
    node_model: Option<PathBuf>,
    doc_model: Option<PathBuf>,
    #[serde(default)]
    node2vec: NodeSection,
    #[serde(default)]
    docvec: DocSection,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct NodeSection {
    dimensions: Option<usize>,
    walks: Option<usize>,
    walk_length: Option<usize>,
    p: Option<f64>,
    q: Option<f64>,
    window: Option<usize>,
    negative: Option<usize>,
    epochs: Option<usize>,
    min_count: Option<usize>,
    directed: Option<bool>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct DocSection {
    dimensions: Option<usize>,
    negative: Option<usize>,
    epochs: Option<usize>,
    min_count: Option<usize>,
    infer_epochs: Option<usize>,
}

/// Fully resolved settings for one command.
#[derive(Debug)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub segments_dir: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub methods: Vec<Method>,
    pub combine: Vec<Combination>,
    pub para_threshold: f64,
    pub rescale: bool,
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub pretty: bool,
    pub node_model: Option<PathBuf>,
    pub doc_model: Option<PathBuf>,
    pub walk: WalkConfig,
    pub node_train: TrainConfig,
    pub doc_train: TrainConfig,
    pub infer_epochs: usize,
}

impl RunConfig {
    pub fn resolve(flags: Flags) -> Result<Self> {
        let (file, base) = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                let file: FileConfig =
                    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
                (file, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let path = |flag: Option<PathBuf>, file: Option<PathBuf>| flag.or_else(|| file.map(|p| base.join(p)));

        let methods = if flags.methods.is_empty() {
            file.methods
                .unwrap_or_default()
                .iter()
                .map(|m| m.parse())
                .collect::<Result<Vec<Method>>>()?
        } else {
            flags.methods
        };
        let combine = if flags.combine.is_empty() {
            file.combine
                .unwrap_or_default()
                .iter()
                .map(|c| c.parse())
                .collect::<Result<Vec<Combination>>>()?
        } else {
            flags.combine
        };

        let seed = flags.seed.or(file.seed).unwrap_or(lexsim::DEFAULT_SEED);
        let threads = flags.threads.or(file.threads).unwrap_or(1);
        if threads == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }

        let n = &file.node2vec;
        let defaults = WalkConfig::default();
        let walk = WalkConfig {
            num_walks_per_node: flags.walks.or(n.walks).unwrap_or(defaults.num_walks_per_node),
            walk_length: flags.walk_length.or(n.walk_length).unwrap_or(defaults.walk_length),
            p: flags.p.or(n.p).unwrap_or(defaults.p),
            q: flags.q.or(n.q).unwrap_or(defaults.q),
            seed,
            directed: flags.directed_walks || n.directed.unwrap_or(false),
            threads,
        };
        let base_node = TrainConfig::node2vec();
        let node_train = TrainConfig {
            dimensions: flags.dimensions.or(n.dimensions).unwrap_or(base_node.dimensions),
            window: flags.window.or(n.window).unwrap_or(base_node.window),
            negative_samples: flags.negative.or(n.negative).unwrap_or(base_node.negative_samples),
            epochs: flags.epochs.or(n.epochs).unwrap_or(base_node.epochs),
            min_count: n.min_count.unwrap_or(base_node.min_count),
            seed,
            threads,
            ..base_node
        };
        let d = &file.docvec;
        let base_doc = TrainConfig::docvec();
        let doc_train = TrainConfig {
            dimensions: flags.doc_dimensions.or(d.dimensions).unwrap_or(base_doc.dimensions),
            negative_samples: d.negative.unwrap_or(base_doc.negative_samples),
            epochs: flags.doc_epochs.or(d.epochs).unwrap_or(base_doc.epochs),
            min_count: flags.doc_min_count.or(d.min_count).unwrap_or(base_doc.min_count),
            seed,
            threads,
            ..base_doc
        };
        walk.validate()?;
        node_train.validate()?;
        doc_train.validate()?;

        Ok(RunConfig {
            corpus: path(flags.corpus, file.corpus),
            citations: path(flags.citations, file.citations),
            pairs: path(flags.pairs, file.pairs),
            segments_dir: path(flags.segments_dir, file.segments_dir),
            lexicon: path(flags.lexicon, file.lexicon),
            stopwords: path(flags.stopwords, file.stopwords),
            methods,
            combine,
            para_threshold: flags
                .para_threshold
                .or(file.para_threshold)
                .unwrap_or(lexsim::tfidf::DEFAULT_PARA_THRESHOLD),
            rescale: flags.rescale || file.rescale.unwrap_or(false),
            threads,
            out: path(flags.out, file.out),
            strict: flags.strict || file.strict.unwrap_or(false),
            pretty: flags.pretty,
            node_model: path(flags.node_model, file.node_model),
            doc_model: path(flags.doc_model, file.doc_model),
            walk,
            node_train,
            doc_train,
            infer_epochs: flags
                .infer_epochs
                .or(d.infer_epochs)
                .unwrap_or(lexsim::doc2vec::DEFAULT_INFER_EPOCHS),
        })
    }
}

/// The value of a required path setting.
pub fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| Error::Config(format!("--{flag} is required")))
}
