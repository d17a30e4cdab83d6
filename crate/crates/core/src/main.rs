use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tweetkg::entity_refine::{Annotator, SpotlightClient};
use tweetkg::kg_emit::{validate_graph, QuantifierMode};
use tweetkg::metrics::{agreement_report, read_ratings_csv};
use tweetkg::pipeline::{self, PipelineConfig};
use tweetkg::Error;

#[derive(Parser)]
#[command(name = "tweetkg", version, about = "Knowledge graph of claims from micro-blog posts")]
struct Cli {
    /// TOML config with [input], [normalize], [extract], [cluster], [linking] and [emit] sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel stages and linking requests.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Strip non-syntactic material and drop near-duplicate posts.
    Normalize(StageArgs),
    /// Extract entities and surface triples from the second-pass parses.
    Extract {
        #[command(flatten)]
        stage: StageArgs,
        #[command(flatten)]
        dump: DumpArgs,
    },
    /// Merge entities, cluster relations, emit and validate the graph.
    RefineEmit(StageArgs),
    /// All three stages in sequence.
    RunAll {
        #[command(flatten)]
        stage: StageArgs,
        #[command(flatten)]
        dump: DumpArgs,
    },
    /// Count statements and check reification shape of a Turtle file.
    Validate { ttl: PathBuf },
    /// Agreement statistics for a ratings CSV (one column per rater).
    Agreement { csv: PathBuf },
}

#[derive(Args, Clone, Default)]
struct StageArgs {
    #[arg(long)]
    posts: Option<PathBuf>,
    #[arg(long)]
    first_pass: Option<PathBuf>,
    #[arg(long)]
    second_pass: Option<PathBuf>,
    #[arg(long)]
    coref: Option<PathBuf>,
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Target dependency patterns, one per line.
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    dedup_threshold: Option<f64>,
    /// Spotlight-compatible annotation endpoint (base URL).
    #[arg(long)]
    linking_endpoint: Option<String>,
    #[arg(long)]
    linking_confidence: Option<f64>,
    #[arg(long)]
    no_linking: bool,
    /// Fail (exit 3) instead of emitting an unlinked graph when linking fails.
    #[arg(long)]
    strict_linking: bool,
    /// annotate | inline
    #[arg(long)]
    quantifiers: Option<QuantifierMode>,
    #[arg(long)]
    keep_interrogative: bool,
}

#[derive(Args, Clone, Default)]
struct DumpArgs {
    /// Print extracted entities as TSV.
    #[arg(long)]
    dump_entities: bool,
    /// Print extracted triples as TSV.
    #[arg(long)]
    dump_triples: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Invariant(_) | Error::Iri { .. } => 2,
        Error::Linking(_) => 3,
        _ => 1,
    }
}

fn build_config(cli: &Cli, args: &StageArgs) -> Result<PipelineConfig, Error> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    set(&mut cfg.input.posts, &args.posts);
    set(&mut cfg.input.first_pass, &args.first_pass);
    set(&mut cfg.input.second_pass, &args.second_pass);
    set(&mut cfg.input.coref, &args.coref);
    set(&mut cfg.input.vectors, &args.vectors);
    set(&mut cfg.extract.patterns, &args.patterns);
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir.clone_from(d);
    }
    if let Some(t) = args.dedup_threshold {
        cfg.normalize.dedup_threshold = t;
    }
    if let Some(e) = &args.linking_endpoint {
        cfg.linking.endpoint = Some(e.clone());
    }
    if let Some(c) = args.linking_confidence {
        cfg.linking.confidence = c;
    }
    if args.no_linking {
        cfg.linking.enabled = false;
    }
    if args.strict_linking {
        cfg.linking.strict = true;
    }
    if let Some(q) = args.quantifiers {
        cfg.emit.quantifiers = q;
    }
    if args.keep_interrogative {
        cfg.emit.keep_interrogative = true;
    }
    cfg.validate()?;
    // only fails when a pool already exists, which is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    Ok(cfg)
}

fn annotator(cfg: &PipelineConfig) -> Option<SpotlightClient> {
    match (&cfg.linking.endpoint, cfg.linking.enabled) {
        (Some(url), true) => Some(SpotlightClient::new(url)),
        _ => None,
    }
}

fn dump(dump: &DumpArgs, entities: &[tweetkg::entity_extract::CandidateEntity], triples: &[tweetkg::relation_extract::SurfaceTriple]) {
    if dump.dump_entities {
        for e in entities {
            println!("{}\t{}\t{}-{}\t{:?}\t{}", e.post_id, e.sent_index, e.span.0, e.span.1, e.kind, e.surface);
        }
    }
    if dump.dump_triples {
        for t in triples {
            let mut flags = Vec::new();
            if t.negated {
                flags.push("NEGATION");
            }
            if t.interrogative {
                flags.push("INTERROGATIVE");
            }
            println!(
                "{}\t{}\t{}\t{}\t[{}]\t{}",
                t.post_id,
                t.subject.surface,
                t.verb_surface,
                t.object.surface,
                t.pattern.join(","),
                flags.join(",")
            );
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Normalize(a) => {
            let cfg = build_config(&cli, a)?;
            print!("{}", pipeline::stage_normalize(&cfg)?);
        }
        Command::Extract { stage, dump: d } => {
            let cfg = build_config(&cli, stage)?;
            let (report, entities, triples) = pipeline::stage_extract(&cfg)?;
            dump(d, &entities, &triples);
            print!("{report}");
        }
        Command::RefineEmit(a) => {
            let cfg = build_config(&cli, a)?;
            let client = annotator(&cfg);
            print!("{}", pipeline::stage_refine_emit(&cfg, client.as_ref().map(|c| c as &dyn Annotator))?);
        }
        Command::RunAll { stage, dump: d } => {
            let cfg = build_config(&cli, stage)?;
            let client = annotator(&cfg);
            print!("{}", pipeline::stage_normalize(&cfg)?);
            let (report, entities, triples) = pipeline::stage_extract(&cfg)?;
            dump(d, &entities, &triples);
            print!("{report}");
            print!("{}", pipeline::stage_refine_emit(&cfg, client.as_ref().map(|c| c as &dyn Annotator))?);
        }
        Command::Validate { ttl } => {
            let report = validate_graph(ttl)?;
            println!("{}", report.to_json());
            if !report.violations.is_empty() {
                return Err(Error::Invariant(format!("{} violations", report.violations.len())));
            }
        }
        Command::Agreement { csv } => {
            let report = agreement_report(&read_ratings_csv(csv)?)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
