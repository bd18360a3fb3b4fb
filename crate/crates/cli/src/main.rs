//! Command-line entry point: one-shot synthesis and inspection commands plus
//! the HTTP service.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use polyvox::audio::encode_wav;
use polyvox::pipeline::PipelineOptions;
use polyvox::ssml::build_ssml;
use polyvox_cli::config::{build_runtime, Overrides, RunConfig, Runtime};
use polyvox_cli::error::CliError;
use polyvox_cli::wire::{segments_json, PlanJson};

#[derive(Parser)]
#[command(
    name = "polyvox",
    version,
    about = "Code-switching text-to-speech orchestrator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize text into a WAV file
    Synth(SynthArgs),
    /// Print the voice plan as JSON
    Plan(InputArgs),
    /// Print the rendered SSML document
    Ssml(InputArgs),
    /// Print the language-tagged segment list as JSON
    Segments(InputArgs),
    /// Run the HTTP service
    Serve(ServeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Text to process
    #[arg(long)]
    text: Option<String>,
    /// Read the text from a file instead
    #[arg(long, conflicts_with = "text")]
    file: Option<PathBuf>,
    /// Language hint for Latin-script text (ISO 639-1)
    #[arg(long)]
    hint: Option<String>,
    /// Voice mode: single_voice or multi_voice
    #[arg(long)]
    mode: Option<String>,
    /// SSML dialect: generic, google, polly, azure
    #[arg(long)]
    dialect: Option<String>,
    /// Engine: mock or http
    #[arg(long)]
    engine: Option<String>,
    /// Endpoint for the http engine
    #[arg(long)]
    endpoint: Option<String>,
    /// Boundary pause in milliseconds
    #[arg(long = "pause-ms")]
    pause_ms: Option<u32>,
    /// Render the whole utterance as one SSML request when possible
    #[arg(long = "single-request")]
    single_request: bool,
    /// JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Voice catalog JSON file
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Extra lexicon JSON files, merged over the bundled ones
    #[arg(long)]
    lexicons: Vec<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output WAV path (default out.wav, or the config file's `out`)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    /// Bind address
    #[arg(long, default_value = "127.0.0.1:8080")]
    bind: String,
    /// JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() {
    // Usage errors are input errors (exit 1); exit 2 is reserved for engine
    // failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            err.print().expect("argument error prints");
            std::process::exit(code);
        }
    };
    if let Err(err) = dispatch(cli) {
        let body = serde_json::to_string(&err.body)
            .unwrap_or_else(|_| "{\"code\":\"internal\"}".to_string());
        eprintln!("{body}");
        std::process::exit(err.exit_code);
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => synth(args),
        Command::Plan(args) => plan(args),
        Command::Ssml(args) => ssml(args),
        Command::Segments(args) => segments(args),
        Command::Serve(args) => serve(args),
    }
}

fn load_runtime(args: &InputArgs) -> Result<Runtime, CliError> {
    let config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        hint: args.hint.clone(),
        mode: args.mode.clone(),
        dialect: args.dialect.clone(),
        engine: args.engine.clone(),
        endpoint: args.endpoint.clone(),
        pause_ms: args.pause_ms,
        catalog: args.catalog.clone(),
        lexicons: args.lexicons.clone(),
        single_request: args.single_request,
    };
    build_runtime(config, &overrides)
}

fn resolve_text(args: &InputArgs) -> Result<String, CliError> {
    match (&args.text, &args.file) {
        (Some(text), _) => Ok(text.clone()),
        (None, Some(path)) => fs::read_to_string(path)
            .map_err(|e| CliError::input("bad_file", format!("cannot read {}: {e}", path.display()))),
        (None, None) => Err(CliError::input(
            "missing_text",
            "provide --text or --file",
        )),
    }
}

fn synth(args: SynthArgs) -> Result<(), CliError> {
    let runtime = load_runtime(&args.input)?;
    let text = resolve_text(&args.input)?;
    let opts = PipelineOptions {
        single_request: runtime.single_request,
        ..PipelineOptions::default()
    };
    let result = runtime
        .pipeline
        .run(
            &text,
            &runtime.prefs,
            &runtime.dialect,
            runtime.engine.as_ref(),
            &runtime.cache,
            &opts,
        )
        .map_err(CliError::from_pipeline)?;

    let out = args
        .out
        .or(runtime.out)
        .unwrap_or_else(|| PathBuf::from("out.wav"));
    fs::write(&out, encode_wav(&result.audio))
        .map_err(|e| CliError::input("write_failed", format!("cannot write {}: {e}", out.display())))?;
    eprintln!(
        "wrote {} ({:.3}s, {} entries)",
        out.display(),
        result.audio.duration_s(),
        result.plan.entries.len()
    );
    Ok(())
}

fn plan(args: InputArgs) -> Result<(), CliError> {
    let runtime = load_runtime(&args)?;
    let text = resolve_text(&args)?;
    let (_, plan) = runtime
        .pipeline
        .plan(&text, &runtime.prefs)
        .map_err(CliError::from_pipeline)?;
    let json = serde_json::to_string_pretty(&PlanJson::from(&plan))
        .expect("plan serialization cannot fail");
    println!("{json}");
    Ok(())
}

fn ssml(args: InputArgs) -> Result<(), CliError> {
    let runtime = load_runtime(&args)?;
    let text = resolve_text(&args)?;
    let (_, plan) = runtime
        .pipeline
        .plan(&text, &runtime.prefs)
        .map_err(CliError::from_pipeline)?;
    let doc = build_ssml(&plan, &runtime.dialect).map_err(|e| {
        CliError::from_pipeline(polyvox::PipelineError::Synthesis(e.into()))
    })?;
    println!("{}", doc.body);
    Ok(())
}

fn segments(args: InputArgs) -> Result<(), CliError> {
    let runtime = load_runtime(&args)?;
    let text = resolve_text(&args)?;
    let tagged = runtime
        .pipeline
        .tag_segments(&text, &runtime.prefs)
        .map_err(CliError::from_pipeline)?;
    let json = serde_json::to_string_pretty(&segments_json(&tagged))
        .expect("segment serialization cannot fail");
    println!("{json}");
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let runtime = build_runtime(config, &Overrides::default())?;
    let tokio_runtime = tokio::runtime::Runtime::new()
        .map_err(|e| CliError::config(format!("cannot start async runtime: {e}")))?;
    tokio_runtime
        .block_on(polyvox_cli::service::serve(Arc::new(runtime), &args.bind))
        .map_err(|e| CliError::config(format!("service failed: {e}")))
}
