use std::error::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fedmesh::bench::fixtures::{write_fixtures, DEFAULT_SCALE};
use fedmesh::bench::{
    load_corpus, run_benchmark, source_selection_report, BenchConfig, FixtureSpec, Report, ReportFormat,
};
use fedmesh::endpoint::FederationConfig;
use fedmesh::mediator::{mediate, MediatorOptions, SelectionCache, UnreachablePolicy, DEFAULT_PARALLELISM};
use fedmesh::rdf::{NTriplesReader, Store};
use fedmesh::service::{serve, ServiceConfig};
use fedmesh::sparql::{evaluate, parse_query, serialize_results};

type Result<T> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "fedmesh", version, about = "Federated SPARQL query processing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse N-Triples files and report triple counts.
    Load { files: Vec<PathBuf> },
    /// Evaluate a query over N-Triples files loaded into one store.
    Query {
        #[arg(long, num_args = 1.., required = true)]
        store: Vec<PathBuf>,
        #[arg(long)]
        query: PathBuf,
    },
    /// Serve stores as SPARQL endpoints over HTTP until interrupted.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a query over a federation.
    Mediate {
        #[arg(long)]
        federation: PathBuf,
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        no_cache: bool,
        #[arg(long)]
        no_groups: bool,
        #[arg(long, default_value_t = DEFAULT_PARALLELISM)]
        parallel: usize,
        /// Treat unreachable members as irrelevant instead of failing.
        #[arg(long)]
        skip_unreachable: bool,
        /// Write the execution trace as JSON to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the query plan to stderr.
        #[arg(long)]
        plan: bool,
    },
    /// Run a benchmark configuration.
    Bench {
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate a synthetic federation with configs, corpus and manifest.
    GenFixtures {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 29)]
        members: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SCALE)]
        scale: usize,
        /// Copy about a tenth of each member's triples into another member.
        #[arg(long)]
        overlap: bool,
    },
    /// Relevant members per triple pattern for each corpus query.
    Analyze {
        #[arg(long)]
        federation: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        corpus: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

fn load_store(files: &[PathBuf]) -> Result<Store> {
    let mut store = Store::new();
    for f in files {
        store.load_file_into(f)?;
    }
    Ok(store)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()).into())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Load { files } => {
            let mut total = 0;
            for f in &files {
                let file = std::fs::File::open(f).map_err(|e| format!("cannot open {}: {e}", f.display()))?;
                let mut n = 0;
                for t in NTriplesReader::new(std::io::BufReader::new(file)) {
                    t?;
                    n += 1;
                }
                println!("{}\t{n}", f.display());
                total += n;
            }
            println!("total\t{total}");
        }
        Command::Query { store, query } => {
            let store = load_store(&store)?;
            let q = parse_query(&read(&query)?)?;
            let results = evaluate(&q, &store);
            println!("{}", String::from_utf8(serialize_results(&results))?);
        }
        Command::Serve { config } => {
            let config = ServiceConfig::load(&config)?;
            let handle = serve(&config)?;
            for path in config.bindings.iter().map(|b| &b.path) {
                eprintln!("{}", handle.url(path));
            }
            let stop = handle.stopper();
            ctrlc::set_handler(stop)?;
            handle.wait();
        }
        Command::Mediate { federation, query, no_cache, no_groups, parallel, skip_unreachable, trace, plan } => {
            let federation = FederationConfig::load(&federation)?.build()?;
            let options = MediatorOptions {
                caching: !no_cache,
                exclusive_groups: !no_groups,
                parallelism: parallel,
                unreachable: if skip_unreachable { UnreachablePolicy::Skip } else { UnreachablePolicy::Fail },
            };
            let m = mediate(&read(&query)?, &federation, &SelectionCache::new(), &options)?;
            if plan {
                eprint!("{}", m.plan);
            }
            println!("{}", String::from_utf8(serialize_results(&m.results))?);
            match trace {
                Some(path) => std::fs::write(path, serde_json::to_string_pretty(&m.trace)?)?,
                None => eprintln!(
                    "{} results, {} select + {} ask requests, {:.3} ms",
                    m.trace.result_count,
                    m.trace.select_requests,
                    m.trace.ask_requests,
                    m.trace.elapsed.as_secs_f64() * 1000.0
                ),
            }
        }
        Command::Bench { config } => {
            let config = BenchConfig::load(&config)?;
            let report = run_benchmark(&config)?;
            print!("{}", report.render(ReportFormat::Markdown));
        }
        Command::GenFixtures { seed, members, out, scale, overlap } => {
            if members == 0 {
                return Err("--members must be at least 1".into());
            }
            let spec = FixtureSpec::new(seed, members).scale(scale).overlapping(overlap);
            let manifest = write_fixtures(&spec, &out)?;
            let triples: usize = manifest.triples.values().sum();
            println!("wrote {} members, {triples} triples to {}", manifest.triples.len(), out.display());
        }
        Command::Analyze { federation, corpus, format } => {
            let federation = FederationConfig::load(&federation)?.build()?;
            let corpus = load_corpus(&corpus)?;
            let report =
                Report { queries: Vec::new(), source_selection: source_selection_report(&corpus, &federation) };
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report.source_selection)?),
                Format::Markdown => print!("{}", report.selection_table()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
