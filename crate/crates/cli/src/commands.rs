//! Subcommands and their exit statuses.

use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyexplain_core::explain::{explain_why_with, WhyNotOptions, WhyOptions};
use polyexplain_core::marching::{MarchBudget, DEFAULT_MAX_SIGNATURES};
use polyexplain_core::oracle::full_decompose;
use polyexplain_core::render::{self, sig6, Style};
use polyexplain_core::{explain_why_not, Error, Network};
use serde::Serialize;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_FOUND: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "polyexplain", version, about = "Exact why and why-not explanations for small ReLU classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a point and print its activation signature.
    Predict(QueryArgs),
    /// Minimal constraint set that fixes the decision around a point.
    Why(WhyArgs),
    /// Nearest region where another class wins, and the constraints to cross.
    Whynot(WhyNotArgs),
    /// Enumerate every activation signature and report the feasible ones.
    Decompose(ModelArgs),
    /// Write a seeded random model file.
    Genfixture(GenArgs),
    /// Serve the HTTP API for one model.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    Hrep,
    Vrep,
    Text,
}

impl From<StyleArg> for Style {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Hrep => Style::Hrep,
            StyleArg::Vrep => Style::Vrep,
            StyleArg::Text => Style::Text,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model file, `toy_a`, or `fixture_<widths joined by _>`.
    #[arg(long)]
    pub model: String,
    /// Seed for `fixture_*` models.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated input point, e.g. `1,-1`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_reals)]
    pub input: Reals,
}

#[derive(Debug, Args)]
pub struct WhyArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Also compute vertex representations.
    #[arg(long)]
    pub vrep: bool,
    #[arg(long, value_enum, default_value_t = StyleArg::Hrep)]
    pub style: StyleArg,
}

#[derive(Debug, Args)]
pub struct WhyNotArgs {
    #[command(flatten)]
    pub why: WhyArgs,
    /// Counterfactual class index.
    #[arg(long = "class")]
    pub class: usize,
    /// Largest Hamming distance to search.
    #[arg(long)]
    pub max_distance: Option<usize>,
    /// Most signatures to examine.
    #[arg(long, default_value_t = DEFAULT_MAX_SIGNATURES)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Layer widths from input to output, e.g. `2,8,2`.
    #[arg(long, value_parser = parse_widths)]
    pub widths: Widths,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Destination file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub model: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

/// Newtypes so clap does not treat the lists as repeated flags.
#[derive(Debug, Clone)]
pub struct Reals(pub Vec<f64>);

#[derive(Debug, Clone)]
pub struct Widths(pub Vec<usize>);

fn parse_reals(s: &str) -> Result<Reals, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(format!("`{t}` is not a finite real number")),
            }
        })
        .collect::<Result<_, _>>()
        .map(Reals)
}

fn parse_widths(s: &str) -> Result<Widths, String> {
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a layer width"))).collect::<Result<_, _>>().map(Widths)
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments for this model: exit 2.
    Usage(String),
    /// Files, parsing, shapes and numerical failures: exit 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string().replace('\n', " ");
        match e {
            Error::DimensionMismatch { .. }
            | Error::InvalidClass { .. }
            | Error::FactualClass(_)
            | Error::DistanceOutOfRange { .. }
            | Error::VertexCap { .. } => CliError::Usage(msg),
            _ => CliError::Failure(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

/// Prediction payload shared with the HTTP API.
#[derive(Debug, Serialize)]
pub struct PredictResponse {
    pub logits: Vec<f64>,
    pub class_index: usize,
    pub class_name: Option<String>,
    pub signature: polyexplain_core::ActivationSignature,
    pub boundary: bool,
    pub inside_bounds: bool,
}

pub fn predict(net: &Network, x: &[f64]) -> polyexplain_core::Result<PredictResponse> {
    let p = net.forward(x)?;
    Ok(PredictResponse {
        class_name: net.class_name(p.class_index).map(str::to_owned),
        logits: p.logits,
        class_index: p.class_index,
        signature: p.signature,
        boundary: p.boundary,
        inside_bounds: p.inside_bounds,
    })
}

fn load(args: &ModelArgs) -> Result<Network, CliError> {
    Ok(crate::models::resolve(&args.model, args.seed)?)
}

fn check_arity(net: &Network, x: &[f64]) -> Result<(), CliError> {
    if x.len() != net.input_dim() {
        return Err(CliError::Usage(format!("--input has {} values but the model takes {}", x.len(), net.input_dim())));
    }
    Ok(())
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("explanations serialize");
    s.push('\n');
    s
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| sig6(*v)).collect::<Vec<_>>().join(", ")
}

/// Runs one subcommand, writing its report to `out`. Returns the exit status.
pub fn run(cli: Cli, out: &mut impl Write) -> Result<u8, CliError> {
    match cli.command {
        Command::Predict(args) => cmd_predict(&args, out),
        Command::Why(args) => cmd_why(&args, out),
        Command::Whynot(args) => cmd_whynot(&args, out),
        Command::Decompose(args) => cmd_decompose(&args, out),
        Command::Genfixture(args) => cmd_genfixture(&args, out),
        Command::Serve(args) => cmd_serve(&args),
    }
}

pub fn cmd_predict(args: &QueryArgs, out: &mut impl Write) -> Result<u8, CliError> {
    let net = load(&args.model)?;
    check_arity(&net, &args.input.0)?;
    let p = predict(&net, &args.input.0)?;
    match args.model.format {
        Format::Json => out.write_all(json(&p).as_bytes())?,
        Format::Text => {
            match &p.class_name {
                Some(n) => writeln!(out, "class {} ({n})", p.class_index)?,
                None => writeln!(out, "class {}", p.class_index)?,
            }
            writeln!(out, "logits: {}", list(&p.logits))?;
            writeln!(out, "signature: {}", p.signature)?;
            if p.boundary {
                writeln!(out, "note: boundary point (a hidden pre-activation is exactly 0)")?;
            }
            if !p.inside_bounds {
                writeln!(out, "note: input lies outside the model's input bounds")?;
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_why(args: &WhyArgs, out: &mut impl Write) -> Result<u8, CliError> {
    let net = load(&args.query.model)?;
    check_arity(&net, &args.query.input.0)?;
    let opts = WhyOptions { vrep: args.vrep || args.style == StyleArg::Vrep, ..WhyOptions::default() };
    let e = explain_why_with(&net, &args.query.input.0, &opts)?;
    let text = match args.query.model.format {
        Format::Json => json(&e),
        Format::Text => render::render_why(&e, args.style.into())?,
    };
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}

pub fn cmd_whynot(args: &WhyNotArgs, out: &mut impl Write) -> Result<u8, CliError> {
    let query = &args.why.query;
    let net = load(&query.model)?;
    check_arity(&net, &query.input.0)?;
    let opts = WhyNotOptions {
        budget: MarchBudget { max_signatures: args.budget, max_distance: args.max_distance, parallel: false },
        vrep: args.why.vrep || args.why.style == StyleArg::Vrep,
        vertex_dim_cap: None,
    };
    let e = explain_why_not(&net, &query.input.0, args.class, &opts)?;
    let text = match query.model.format {
        Format::Json => json(&e),
        Format::Text => render::render_why_not(&e, args.why.style.into())?,
    };
    out.write_all(text.as_bytes())?;
    Ok(if e.is_unreachable() { EXIT_NOT_FOUND } else { EXIT_OK })
}

pub fn cmd_decompose(args: &ModelArgs, out: &mut impl Write) -> Result<u8, CliError> {
    let net = load(args)?;
    let d = full_decompose(&net)?;
    match args.format {
        Format::Json => out.write_all(json(&d).as_bytes())?,
        Format::Text => {
            let widths: Vec<String> = net.layer_widths().iter().map(usize::to_string).collect();
            writeln!(out, "network {}: {} hidden neurons", widths.join("-"), net.total_hidden_neurons())?;
            writeln!(out, "{} feasible regions of {} signatures", d.feasible_count(), d.examined)?;
            for r in d.feasible() {
                let w = r.witness.as_deref().unwrap_or_default();
                let class = net.forward(w)?.class_index;
                writeln!(out, "{}  class {class}  at ({})", r.signature, list(w))?;
            }
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_genfixture(args: &GenArgs, out: &mut impl Write) -> Result<u8, CliError> {
    let net = Network::random(&args.widths.0, args.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut text = net.to_json_string();
    text.push('\n');
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_serve(args: &ServeArgs) -> Result<u8, CliError> {
    let net = crate::models::resolve(&args.model, args.seed)?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(async {
        let addr = SocketAddr::from(([127, 0, 0, 1], args.port));
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| CliError::Failure(format!("cannot bind {addr}: {e}")))?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, crate::service::router(Arc::new(net))).await?;
        Ok(EXIT_OK)
    })
}
