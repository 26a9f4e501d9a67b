//! `moebiuslab` command-line front end.

mod commands;
mod io;
mod nagata_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use io::{envelope, render_text, write_document, Failure, Format, Output};

#[derive(Parser, Debug)]
#[command(name = "moebiuslab", version, about = "Finite quasi-metric spaces, cross-ratios and dimension tools")]
pub struct Cli {
    /// Seed for randomized generators.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "MOEBIUSLAB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a space file against the quasi-metric axioms.
    Validate { space: String },
    /// Rescale, involute, extend or normalize a space.
    #[command(subcommand)]
    Transform(Transform),
    /// Cross-ratio triple of four points.
    Crt { space: String, w: String, x: String, y: String, z: String },
    /// Check the four cross-ratio axioms on all admissible tuples.
    Axioms { space: String },
    /// Corner margin against the `1/K²` bound.
    Corner { space: String },
    /// Compare the cross-ratios of two spaces under a label map.
    Equiv {
        a: String,
        b: String,
        /// JSON object mapping labels of `a` to labels of `b`; identity if absent.
        #[arg(long)]
        map: Option<String>,
    },
    /// Box-counting dimension estimate from minimal ball covers.
    HausdorffDim(HausdorffDimArgs),
    /// Move a ball cover to the involuted space.
    TransportHausdorff(TransportHausdorffArgs),
    /// Nagata covers.
    #[command(subcommand)]
    Nagata(nagata_cmd::NagataCmd),
    /// Generate a space.
    Generate(commands::GenerateArgs),
    /// The built-in corpus.
    #[command(subcommand)]
    Corpus(CorpusCmd),
}

#[derive(Subcommand, Debug)]
pub enum Transform {
    Rescale {
        space: String,
        #[arg(long)]
        lambda: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Involute {
        space: String,
        /// Label of the point that becomes the point at infinity.
        #[arg(long)]
        o: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    Extend {
        space: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The representative normalized at the triple (omega, alpha, beta).
    Normalize {
        space: String,
        #[arg(long)]
        omega: String,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct HausdorffDimArgs {
    pub space: String,
    #[arg(long)]
    pub dmin: Option<String>,
    #[arg(long)]
    pub dmax: Option<String>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub exact_threshold: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TransportHausdorffArgs {
    pub space: String,
    #[arg(long)]
    pub o: String,
    #[arg(long)]
    pub eps: String,
    /// Build a minimal cover at this scale when no cover file is given.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub cover: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum CorpusCmd {
    /// Write every corpus space and the manifest into a directory.
    Emit { dir: PathBuf },
    /// List the corpus entries.
    List,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let mut inputs = Vec::new();
    let name = commands::command_name(&cli.command);
    let result = commands::run(&cli, &mut inputs);
    match result {
        Ok(Output::Document(text)) => match write_document(commands::output_path(&cli.command), &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(Failure::Usage(m) | Failure::Semantic(m)) => {
                eprintln!("error: {m}");
                ExitCode::from(2)
            }
        },
        Ok(Output::Report { ok, body }) => {
            emit(cli.format, &envelope(&name, &inputs, ok, body));
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Semantic(m)) => {
            emit(cli.format, &envelope(&name, &inputs, false, serde_json::json!({ "error": m })));
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn emit(format: Format, doc: &serde_json::Value) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(doc).expect("json")),
        Format::Text => print!("{}", render_text(doc)),
    }
}
