use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use unimod_core::experiments::{self, DimensionPath, ExperimentConfig, ExperimentKind, FourierGrid, RunRecord};
use unimod_core::exponents::{self, ExtendedExponent};
use unimod_core::normest::{self, AscentSettings, EstimatorSettings, MethodChoice, DEFAULT_VERTEX_LIMIT};
use unimod_core::tensors::{self, UnimodularTensor};
use unimod_core::{Error, FormInstance};

const EXIT_USAGE: u8 = 2;
const EXIT_CAPABILITY: u8 = 3;
const EXIT_IO: u8 = 4;

const EXPONENTS_SCHEMA: &str = "OUTPUT (json): {\"command\", \"config\": {\"p\"}, \"profile\": {ps, conjugates, theorem1, albuquerque_rezende, \
classical_ksz, bayart, gamma, rho, regime, theorem1_dominates}}. Exponent values are {\"exact\": \"a/b\" | null, \"value\": float}; \
inf is the string \"inf\". classical_ksz is null unless every p >= 2, bayart is null unless every p <= 2.";

const GENERATE_SCHEMA: &str = "OUTPUT: the tensor is written to --out as {\"dims\", \"field\", \"entries\", \"provenance\"} \
(real entries are +-1 integers, complex entries are [re, im] pairs). stdout (json): {\"command\", \"config\", \"tensor\": {dims, field, len, unimodularity_defect}}.";

const NORM_SCHEMA: &str = "OUTPUT (json): {\"command\", \"config\": {input, p, method, starts, seed, vertex_limit, tol, max_iter}, \
\"estimate\": {lower, upper, method, iterations, converged, witness}, \"value\", \"basis_lower_bound\", \"theorem1_bound\"}. \
lower is certified by the witness; upper is present only for exact engines (vertex, singular-value). Witness vectors are lists of [re, im] pairs.";

const RECORD_SCHEMA: &str = "OUTPUT (json): a run record {\"schema_version\", \"config\", \"rows\": [{dims, ps, method, values}], \"derived\"}; \
the wall-clock \"metadata\" field is added only with --with-metadata and in files written by --out. \
Use --describe for the CSV columns of this experiment.";

#[derive(Parser)]
#[command(name = "unimod", version, about = "Unimodular multilinear forms on mixed l_p domains: exponents, norms and experiments")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Worker threads for parallel trials and starts.
    #[arg(long, env = "UNIMOD_THREADS", global = true)]
    threads: Option<usize>,
    /// Print the output columns and schema of the subcommand and exit.
    #[arg(long, global = true)]
    describe: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Human,
}

#[derive(Subcommand)]
enum Command {
    /// Every exponent formula for a p-tuple.
    #[command(after_help = EXPONENTS_SCHEMA)]
    Exponents {
        /// Comma-separated exponents in [1, inf], e.g. 1.5,3,inf.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<ExtendedExponent>,
    },
    /// Generate a unimodular tensor file.
    #[command(after_help = GENERATE_SCHEMA)]
    Generate {
        #[arg(long, value_enum)]
        kind: GenKind,
        /// Dimensions as AxBxC.
        #[arg(long, value_delimiter = 'x', required = true, value_parser = parse_dim)]
        dims: Vec<usize>,
        /// Seed for random kinds; ignored by fourier.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination tensor file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate or compute the norm of a tensor file on an l_p product domain.
    #[command(after_help = NORM_SCHEMA)]
    Norm {
        /// Tensor file written by `generate`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<ExtendedExponent>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Smallest norm over random (or all) sign tensors of shape n x ... x n.
    #[command(after_help = RECORD_SCHEMA)]
    Search {
        /// Order of the form; a single --p value is repeated m times.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, value_delimiter = ',', default_value = "inf,inf")]
        p: Vec<ExtendedExponent>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Enumerate every sign tensor instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        record: RecordArgs,
    },
    /// Fitted growth exponent of the minimal norm along a dimension schedule.
    #[command(after_help = RECORD_SCHEMA)]
    Slope {
        #[arg(long, value_delimiter = ',', default_value = "inf,inf")]
        p: Vec<ExtendedExponent>,
        /// Strictly increasing comma-separated dimensions.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        schedule: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        record: RecordArgs,
    },
    /// Ratio of the optimal (3/2,3,3) bound to the conjectured order along a dimension path.
    #[command(after_help = RECORD_SCHEMA)]
    Conjecture {
        #[arg(long, value_enum, default_value_t = PathKind::TailPair)]
        path: PathKind,
        /// Path parameters N, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        schedule: Vec<usize>,
        #[command(flatten)]
        record: RecordArgs,
    },
    /// Norms of leading Fourier blocks against the optimal bound with constant 1.
    #[command(name = "fourier-scan", after_help = RECORD_SCHEMA)]
    FourierScan {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        n1: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
        n2: Vec<usize>,
        /// Exponents >= 2 for the first slot.
        #[arg(long, value_delimiter = ',', default_value = "2,4,inf")]
        p1: Vec<ExtendedExponent>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,inf")]
        p2: Vec<ExtendedExponent>,
        /// Also report the real-sign reference constant and the n1 = 1 deviation.
        #[arg(long)]
        compare_constant: bool,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        record: RecordArgs,
    },
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// auto, alternating, vertex or sv. auto picks the strongest applicable oracle.
    #[arg(long, default_value = "auto", value_parser = parse_method)]
    method: MethodChoice,
    /// Random ascent starts in addition to the structured ones.
    #[arg(long, default_value_t = 16)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on vertex enumerations for the exact oracle.
    #[arg(long, default_value_t = DEFAULT_VERTEX_LIMIT)]
    vertex_limit: u64,
    /// Relative improvement tolerance of one ascent cycle.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl EngineArgs {
    fn settings(&self) -> EstimatorSettings {
        EstimatorSettings {
            starts: self.starts,
            seed: self.seed,
            ascent: AscentSettings { tol: self.tol, max_iter: self.max_iter },
            vertex_limit: self.vertex_limit,
        }
    }
}

#[derive(Args, Clone)]
struct RecordArgs {
    /// Also write the full run record, metadata included, to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include the wall-clock metadata field on stdout.
    #[arg(long)]
    with_metadata: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Rademacher,
    Steinhaus,
    Fourier,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PathKind {
    TailPair,
    Diagonal,
}

fn parse_dim(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("malformed dimension '{s}' (expected AxBxC with positive integers)")),
    }
}

fn parse_method(s: &str) -> Result<MethodChoice, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Capability(_) => EXIT_CAPABILITY,
        Error::Io(_) | Error::Json(_) | Error::Schema(_) => EXIT_IO,
        Error::Argument(_) | Error::Domain(_) => EXIT_USAGE,
    }
}

struct Output {
    json: Value,
    csv: Option<String>,
    human: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.describe {
        return emit(&describe(&cli.command));
    }
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match dispatch(&cli) {
        Ok(out) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.json).expect("output serializes"),
                Format::Csv => match out.csv {
                    Some(csv) => csv.trim_end().to_string(),
                    None => {
                        eprintln!("error: csv output is only available for experiment subcommands");
                        return ExitCode::from(EXIT_USAGE);
                    }
                },
                Format::Human => out.human.trim_end().to_string(),
            };
            emit(&text)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(text: &str) -> ExitCode {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn describe(command: &Command) -> String {
    let kind = match command {
        Command::Exponents { .. } => return EXPONENTS_SCHEMA.to_string(),
        Command::Generate { .. } => return GENERATE_SCHEMA.to_string(),
        Command::Norm { .. } => return NORM_SCHEMA.to_string(),
        Command::Search { .. } => ExperimentKind::MinNormSearch,
        Command::Slope { .. } => ExperimentKind::Slope,
        Command::Conjecture { .. } => ExperimentKind::ConjectureRatio,
        Command::FourierScan { compare_constant, .. } => {
            if *compare_constant {
                ExperimentKind::ConstantOne
            } else {
                ExperimentKind::FourierScan
            }
        }
    };
    format!("{RECORD_SCHEMA}\n\nCSV columns:\n{}", experiments::describe(kind))
}

fn dispatch(cli: &Cli) -> unimod_core::Result<Output> {
    match &cli.command {
        Command::Exponents { p } => cmd_exponents(p),
        Command::Generate { kind, dims, seed, out } => cmd_generate(*kind, dims, *seed, out),
        Command::Norm { input, p, engine } => cmd_norm(input, p, engine),
        Command::Search { m, p, n, trials, exhaustive, engine, record } => {
            let ps = resolve_order(*m, p)?;
            let mut config = ExperimentConfig::new(ExperimentKind::MinNormSearch);
            config.ps = ps;
            config.schedule = vec![*n];
            config.trials = *trials;
            config.seed = engine.seed;
            config.method = engine.method;
            config.estimator = engine.settings();
            config.exhaustive = *exhaustive;
            record_output(experiments::run(&config)?, record)
        }
        Command::Slope { p, schedule, trials, engine, record } => {
            let mut config = ExperimentConfig::new(ExperimentKind::Slope);
            config.ps = p.clone();
            config.schedule = schedule.clone();
            config.trials = *trials;
            config.seed = engine.seed;
            config.method = engine.method;
            config.estimator = engine.settings();
            record_output(experiments::run(&config)?, record)
        }
        Command::Conjecture { path, schedule, record } => {
            let mut config = ExperimentConfig::new(ExperimentKind::ConjectureRatio);
            config.schedule = schedule.clone();
            config.path = Some(match path {
                PathKind::TailPair => DimensionPath::TailPair,
                PathKind::Diagonal => DimensionPath::Diagonal,
            });
            record_output(experiments::run(&config)?, record)
        }
        Command::FourierScan { n1, n2, p1, p2, compare_constant, engine, record } => {
            let kind = if *compare_constant { ExperimentKind::ConstantOne } else { ExperimentKind::FourierScan };
            let mut config = ExperimentConfig::new(kind);
            config.seed = engine.seed;
            config.method = engine.method;
            config.estimator = engine.settings();
            config.grid = Some(FourierGrid { n1: n1.clone(), n2: n2.clone(), p1: p1.clone(), p2: p2.clone() });
            record_output(experiments::run(&config)?, record)
        }
    }
}

fn resolve_order(m: Option<usize>, p: &[ExtendedExponent]) -> unimod_core::Result<Vec<ExtendedExponent>> {
    match m {
        None => Ok(p.to_vec()),
        Some(0) => Err(Error::Argument("--m must be positive".into())),
        Some(m) if p.len() == m => Ok(p.to_vec()),
        Some(m) if p.len() == 1 => Ok(vec![p[0].clone(); m]),
        Some(m) => Err(Error::Argument(format!("--m {m} does not match {} exponents in --p", p.len()))),
    }
}

fn cmd_exponents(p: &[ExtendedExponent]) -> unimod_core::Result<Output> {
    let profile = exponents::profile(p)?;
    let json = json!({
        "command": "exponents",
        "config": { "p": p },
        "profile": profile,
    });
    let opt = |r: &Option<exponents::Real>| r.as_ref().map(|r| format!("{r} ({})", r.to_f64())).unwrap_or_else(|| "n/a".into());
    let human = format!(
        "p            {}\nconjugates   {}\ntheorem1     {} ({})\nAR           {} ({})\nclassical    {}\nbayart       {}\ngamma        {}\nrho          {}\nregime       {}\ndominates    {}\n",
        join(&profile.ps),
        join(&profile.conjugates),
        profile.theorem1,
        profile.theorem1.to_f64(),
        profile.albuquerque_rezende,
        profile.albuquerque_rezende.to_f64(),
        opt(&profile.classical_ksz),
        opt(&profile.bayart),
        profile.gamma,
        profile.rho,
        serde_json::to_value(profile.regime)?.as_str().unwrap_or_default(),
        profile.theorem1_dominates,
    );
    Ok(Output { json, csv: None, human })
}

fn cmd_generate(kind: GenKind, dims: &[usize], seed: u64, out: &PathBuf) -> unimod_core::Result<Output> {
    let tensor = match kind {
        GenKind::Rademacher => tensors::rademacher(dims, seed)?,
        GenKind::Steinhaus => tensors::steinhaus(dims, seed)?,
        GenKind::Fourier => {
            if dims.len() != 2 {
                return Err(Error::Argument("fourier tensors have exactly two dimensions".into()));
            }
            tensors::fourier_matrix(dims[0].max(dims[1]))?.restrict(dims)?
        }
    };
    tensor.write(out)?;
    let kind_name = match kind {
        GenKind::Rademacher => "rademacher",
        GenKind::Steinhaus => "steinhaus",
        GenKind::Fourier => "fourier",
    };
    let json = json!({
        "command": "generate",
        "config": { "kind": kind_name, "dims": dims, "seed": seed, "out": out },
        "tensor": {
            "dims": tensor.dims(),
            "field": tensor.field(),
            "len": tensor.len(),
            "unimodularity_defect": tensor.unimodularity_defect(),
        },
    });
    let human = format!("wrote {kind_name} tensor {} to {}\n", dims_text(tensor.dims()), out.display());
    Ok(Output { json, csv: None, human })
}

fn cmd_norm(input: &PathBuf, p: &[ExtendedExponent], engine: &EngineArgs) -> unimod_core::Result<Output> {
    let tensor = UnimodularTensor::read(input)?;
    if tensor.order() != p.len() {
        return Err(Error::Argument(format!("tensor has order {} but {} exponents were given", tensor.order(), p.len())));
    }
    let f = FormInstance::with_exponents(tensor, p)?;
    let settings = engine.settings();
    let estimate = normest::estimate_norm(&f, engine.method, &settings)?;
    let basis = normest::basis_lower_bound(&f);
    let bound = normest::theorem1_upper_value(f.domain());
    let json = json!({
        "command": "norm",
        "config": {
            "input": input,
            "p": p,
            "method": engine.method,
            "starts": engine.starts,
            "seed": engine.seed,
            "vertex_limit": engine.vertex_limit,
            "tol": engine.tol,
            "max_iter": engine.max_iter,
        },
        "estimate": estimate,
        "value": estimate.value(),
        "basis_lower_bound": basis,
        "theorem1_bound": bound,
    });
    let method = serde_json::to_value(estimate.method)?;
    let upper = estimate.upper.map(|u| u.to_string()).unwrap_or_else(|| "none".into());
    let human = format!(
        "value        {}\nlower        {}\nupper        {upper}\nmethod       {}\nconverged    {}\nbasis bound  {basis}\ntheorem1     {bound} (C = 1)\n",
        estimate.value(),
        estimate.lower,
        method.as_str().unwrap_or_default(),
        estimate.converged,
    );
    Ok(Output { json, csv: None, human })
}

fn record_output(record: RunRecord, args: &RecordArgs) -> unimod_core::Result<Output> {
    if let Some(path) = &args.out {
        experiments::persist(&record, path)?;
    }
    let mut json = serde_json::to_value(&record)?;
    if !args.with_metadata {
        if let Value::Object(map) = &mut json {
            map.remove("metadata");
        }
    }
    let csv = record.to_csv()?;
    let mut human = String::new();
    for row in &record.rows {
        let values: Vec<String> = row.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let method = row.method.map(|m| serde_json::to_value(m).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default());
        human.push_str(&format!("{}  p=({})  {}{}\n", dims_text(&row.dims), join(&row.ps), method.map(|m| format!("[{m}] ")).unwrap_or_default(), values.join(" ")));
    }
    for (k, v) in &record.derived {
        human.push_str(&format!("{k}: {v}\n"));
    }
    Ok(Output { json, csv: Some(csv), human })
}

fn join(ps: &[ExtendedExponent]) -> String {
    ps.iter().map(ExtendedExponent::to_string).collect::<Vec<_>>().join(",")
}

fn dims_text(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}
