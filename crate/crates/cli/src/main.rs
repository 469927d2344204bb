//! `fuzzchip` command-line driver.
//!
//! Exit codes: 0 ok, 1 usage, 2 input-data error, 3 capacity or target error.

use std::fmt::Write as _;
use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzchip::codegen::{emit_table_binary, MAX_BYTESIZE};
use fuzzchip::dictionary::define_line;
use fuzzchip::{
    emit_table, gen_table, make_normal, make_triangle, normalize, parse_named, resolve, write_rule_image, Activation,
    ChipObject, ChipType, CodegenError, CrispOutput, FuzzyDictionary, Inference, MembershipFunction,
    OutputMembership, RuleSet,
};
use fuzzchip_service::{app, shared, SessionState};

#[derive(Parser)]
#[command(name = "fuzzchip", version, about = "Fuzzy control rule compiler and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, normalize and resolve a rule file, reporting every rule.
    Check(RuleArgs),
    /// Run input vectors through a chip built from a rule file.
    Simulate(SimulateArgs),
    /// Emit an inference-chip image or a memory-chip address table.
    Compile(CompileArgs),
    /// Inspect and extend a dictionary.
    Defs {
        /// Dictionary file (.fzd).
        #[arg(long)]
        dict: PathBuf,
        #[command(subcommand)]
        action: DefsAction,
    },
    /// Serve the workbench HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct RuleArgs {
    /// Rule file (.fzr).
    rules: PathBuf,
    /// Dictionary file (.fzd).
    #[arg(long)]
    dict: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Minmax,
    Mult,
}

impl From<Kind> for ChipType {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Minmax => ChipType::MinMax,
            Kind::Mult => ChipType::Multiplicative,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: RuleArgs,
    #[arg(long = "type", value_enum, default_value = "minmax")]
    kind: Kind,
    /// One input vector, comma separated.
    #[arg(long, conflicts_with = "batch", required_unless_present = "batch", allow_hyphen_values = true)]
    input: Option<String>,
    /// CSV file with one input vector per line; `#` starts a comment.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Also print the 16-level output membership functions.
    #[arg(long)]
    show_membership: bool,
    /// Also print per-rule activations.
    #[arg(long)]
    show_alpha: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    InferenceChip,
    MemoryChip,
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    source: RuleArgs,
    #[arg(long, value_enum)]
    target: Target,
    #[arg(long = "type", value_enum, default_value = "minmax")]
    kind: Kind,
    /// Output code width in bits for memory-chip tables; 0 stores real values.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u32).range(0..=MAX_BYTESIZE as i64))]
    bytesize: u32,
    /// Output path; defaults to the rule file with a .fzc or .tbl extension.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GeneratorArgs {
    #[arg(long)]
    name: String,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=15))]
    center: u8,
    #[arg(long, value_parser = clap::value_parser!(u8).range(0..=15))]
    tail: u8,
}

#[derive(Subcommand)]
enum DefsAction {
    /// List definition names.
    List,
    /// Print one definition as a bar chart.
    Show { name: String },
    /// Append a normal-distribution definition.
    MakeNormal(GeneratorArgs),
    /// Append a triangular definition.
    MakeTriangle(GeneratorArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// Dictionary file (.fzd); created on the first definition write if missing.
    #[arg(long)]
    dict: PathBuf,
    /// Directory of .fzr files to load as chips at startup.
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "minmax")]
    r#type: Kind,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Directory of static files served at `/`.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
    Capacity(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Capacity(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Capacity(m) => m,
        }
    }
}

impl From<CodegenError> for Failure {
    fn from(e: CodegenError) -> Self {
        match e {
            CodegenError::NotMinMax { .. } | CodegenError::Capacity { .. } | CodegenError::TableTooLarge(_) => {
                Failure::Capacity(e.to_string())
            }
            CodegenError::BadByteSize(_) | CodegenError::RealBinary => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn data<E: std::fmt::Display>(context: &Path) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", context.display()))
}

fn load_dict(path: &Path) -> Result<FuzzyDictionary, Failure> {
    FuzzyDictionary::load(path).map_err(data(path))
}

struct Loaded {
    parsed: RuleSet,
    normalized: RuleSet,
    chip: ChipObject,
}

fn load_chip(args: &RuleArgs, kind: ChipType) -> Result<Loaded, Failure> {
    let dict = load_dict(&args.dict)?;
    let text = fs::read_to_string(&args.rules).map_err(data(&args.rules))?;
    let source = args.rules.display().to_string();
    let parsed = parse_named(&source, &text).map_err(data(&args.rules))?;
    let normalized = normalize(&parsed);
    let compiled = resolve(&normalized, &dict).map_err(data(&args.rules))?;
    let stem = args.rules.file_stem().unwrap_or_default().to_string_lossy();
    let name = if fuzzchip::dictionary::is_valid_name(&stem) { stem.to_string() } else { "CHIP".to_string() };
    let chip = ChipObject::new(&name, kind, compiled).map_err(data(&args.rules))?;
    Ok(Loaded {
        parsed,
        normalized,
        chip,
    })
}

fn cmd_check(args: &RuleArgs) -> CmdResult {
    let loaded = load_chip(args, ChipType::MinMax)?;
    println!(
        "{} rules ({} after normalization)",
        loaded.parsed.rules.len(),
        loaded.normalized.rules.len()
    );
    let rs = &loaded.normalized;
    for (i, rule) in rs.rules.iter().enumerate() {
        let group = &rule.antecedent[0];
        let slot = |name: &str, clauses: &[fuzzchip::rulelang::Clause], pad: &str| {
            clauses
                .iter()
                .find(|c| c.signal == name)
                .map_or(format!("{name} IS {pad}"), |c| c.to_string())
        };
        let ante: Vec<String> = rs.inputs.iter().map(|d| slot(&d.name, group, "ANY")).collect();
        let cons: Vec<String> = rs.outputs.iter().map(|d| slot(&d.name, &rule.consequent, "NULL")).collect();
        println!("  rule {} ({}): {} => {}", i + 1, rule.location, ante.join(", "), cons.join(", "));
    }
    for d in &rs.inputs {
        let used = rs.rules.iter().any(|r| r.antecedent[0].iter().any(|c| c.signal == d.name));
        if !used {
            eprintln!("warning: {}: input {} is not used by any rule", args.rules.display(), d.name);
        }
    }
    Ok(())
}

fn parse_vector(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|f| {
            let f = f.trim();
            f.parse::<f64>().map_err(|_| format!("{f:?} is not a number"))
        })
        .collect()
}

fn render_inference(inf: &Inference, chip: &ChipObject, opts: &SimulateArgs, out: &mut String) {
    let values: Vec<String> = inf
        .outputs
        .iter()
        .map(|o| match o {
            CrispOutput::Value(v) => format!("{v:?}"),
            CrispOutput::NoActivation => "NO-ACTIVATION".to_string(),
        })
        .collect();
    writeln!(out, "{}", values.join(" ")).unwrap();
    if opts.show_alpha {
        let alphas: Vec<String> = match &inf.activation {
            Activation::Levels(v) => v.iter().map(|a| a.to_string()).collect(),
            Activation::Scaled(v) => v.iter().map(|a| format!("{a:?}")).collect(),
        };
        writeln!(out, "  alpha: {}", alphas.join(" ")).unwrap();
    }
    if opts.show_membership {
        let names = chip.compiled().outputs().iter().map(|d| d.name.as_str());
        let rows: Vec<String> = match &inf.membership {
            OutputMembership::Levels(v) => v
                .iter()
                .map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
                .collect(),
            OutputMembership::Scaled(v) => v
                .iter()
                .map(|b| b.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" "))
                .collect(),
        };
        for (name, row) in names.zip(rows) {
            writeln!(out, "  {name}: ({row})").unwrap();
        }
    }
}

fn cmd_simulate(args: &SimulateArgs) -> CmdResult {
    let chip = load_chip(&args.source, args.kind.into())?.chip;
    let vectors: Vec<(String, Vec<f64>)> = match (&args.input, &args.batch) {
        (Some(text), _) => vec![(
            "--input".to_string(),
            parse_vector(text).map_err(|e| Failure::Data(format!("--input: {e}")))?,
        )],
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(data(path))?;
            let mut vectors = Vec::new();
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let where_ = format!("{}:{}", path.display(), n + 1);
                let v = parse_vector(line).map_err(|e| Failure::Data(format!("{where_}: {e}")))?;
                vectors.push((where_, v));
            }
            vectors
        }
        (None, None) => return Err(Failure::Usage("either --input or --batch is required".into())),
    };
    let mut out = String::new();
    for (where_, xs) in &vectors {
        let inf = chip.assert_input(xs).map_err(|e| Failure::Data(format!("{where_}: {e}")))?;
        render_inference(&inf, &chip, args, &mut out);
    }
    print!("{out}");
    Ok(())
}

fn cmd_compile(args: &CompileArgs) -> CmdResult {
    let chip = load_chip(&args.source, args.kind.into())?.chip;
    let write = |path: &Path, bytes: &[u8]| fs::write(path, bytes).map_err(data(path));
    match args.target {
        Target::InferenceChip => {
            let image = write_rule_image(&chip)?;
            let path = args.output.clone().unwrap_or_else(|| args.source.rules.with_extension("fzc"));
            write(&path, image.as_bytes())?;
            println!("wrote {} ({} bytes, {} rules)", path.display(), image.as_bytes().len(), image.rule_count());
            let table = gen_table(&chip, 0)?;
            println!("NO-ACTIVATION addresses: {}", table.no_activation().len());
        }
        Target::MemoryChip => {
            let table = gen_table(&chip, args.bytesize)?;
            let path = args.output.clone().unwrap_or_else(|| args.source.rules.with_extension("tbl"));
            write(&path, emit_table(&table).as_bytes())?;
            println!("wrote {} ({} rows)", path.display(), table.row_count());
            if args.bytesize > 0 {
                let bin = path.with_extension("bin");
                let bytes = emit_table_binary(&table)?;
                write(&bin, &bytes)?;
                println!("wrote {} ({} bytes)", bin.display(), bytes.len());
            }
            println!("NO-ACTIVATION addresses: {}", table.no_activation().len());
        }
    }
    Ok(())
}

fn bar_chart(mf: &MembershipFunction) -> String {
    let mut out = String::new();
    for (k, &level) in mf.levels().iter().enumerate() {
        let bar = "#".repeat(level as usize);
        writeln!(out, "{k:>2} |{bar:<15}| {level}").unwrap();
    }
    out
}

fn cmd_defs(dict_path: &Path, action: &DefsAction) -> CmdResult {
    match action {
        DefsAction::List => {
            for name in load_dict(dict_path)?.names() {
                println!("{name}");
            }
        }
        DefsAction::Show { name } => {
            let dict = load_dict(dict_path)?;
            let mf = dict
                .lookup(name)
                .ok_or_else(|| Failure::Data(format!("{}: no definition {}", dict_path.display(), name.to_ascii_uppercase())))?;
            println!("{} {}", name.to_ascii_uppercase(), mf);
            print!("{}", bar_chart(&mf));
        }
        DefsAction::MakeNormal(g) | DefsAction::MakeTriangle(g) => {
            let generate = if matches!(action, DefsAction::MakeNormal(_)) { make_normal } else { make_triangle };
            let mf = generate(g.center as usize, g.tail as usize).map_err(|e| Failure::Data(e.to_string()))?;
            let mut dict = if dict_path.exists() { load_dict(dict_path)? } else { FuzzyDictionary::new() };
            // validates the name and rejects duplicates before touching the file
            dict.insert(&g.name, mf).map_err(data(dict_path))?;
            let mut text = if dict_path.exists() {
                fs::read_to_string(dict_path).map_err(data(dict_path))?
            } else {
                String::new()
            };
            if !text.is_empty() && !text.ends_with('\n') {
                text.push('\n');
            }
            text.push_str(&define_line(&g.name, &mf));
            fs::write(dict_path, text).map_err(data(dict_path))?;
            print!("{}", define_line(&g.name, &mf));
        }
    }
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> CmdResult {
    let mut session = SessionState::open(&args.dict).map_err(data(&args.dict))?;
    if let Some(dir) = &args.rules {
        let names = session.load_rule_dir(dir, args.r#type.into()).map_err(data(dir))?;
        eprintln!("loaded {} chips from {}", names.len(), dir.display());
    }
    let router = app(shared(session), args.static_dir.clone());
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Usage(e.to_string()))?;
    runtime.block_on(async {
        let addr = SocketAddr::new(args.bind, args.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| Failure::Usage(format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| Failure::Usage(e.to_string()))?;
        println!("listening on http://{local}");
        axum::serve(listener, router)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Failure::Usage(e.to_string()))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compile(a) => cmd_compile(a),
        Command::Defs { dict, action } => cmd_defs(dict, action),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
