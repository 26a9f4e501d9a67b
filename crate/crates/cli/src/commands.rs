//! Subcommand implementations other than `nagata`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use num_rational::BigRational;
use serde_json::json;

use moebiuslab::crossratio::{check_axioms, corner_margin, crt_labels, identity_map, moebius_equivalence};
use moebiuslab::generators::{corpus, corpus_manifest, generate, GeneratorSpec};
use moebiuslab::hausdorff::{hausdorff_dim_estimate, min_delta_cover, transport_cover_involution, BallCover, DimConfig};
use moebiuslab::qspace::{parse_rational, validate, ExtRational};

use crate::io::{load_data, load_space, read_input, report, CmdResult, Failure, Input, Output};
use crate::{Cli, Command, CorpusCmd, Transform};

pub fn rational(name: &str, s: &str) -> Result<BigRational, Failure> {
    parse_rational(s).map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

pub fn command_name(cmd: &Command) -> String {
    match cmd {
        Command::Validate { .. } => "validate".into(),
        Command::Transform(t) => format!(
            "transform {}",
            match t {
                Transform::Rescale { .. } => "rescale",
                Transform::Involute { .. } => "involute",
                Transform::Extend { .. } => "extend",
                Transform::Normalize { .. } => "normalize",
            }
        ),
        Command::Crt { .. } => "crt".into(),
        Command::Axioms { .. } => "axioms".into(),
        Command::Corner { .. } => "corner".into(),
        Command::Equiv { .. } => "equiv".into(),
        Command::HausdorffDim(_) => "hausdorff-dim".into(),
        Command::TransportHausdorff(_) => "transport-hausdorff".into(),
        Command::Nagata(n) => format!("nagata {}", n.name()),
        Command::Generate(_) => "generate".into(),
        Command::Corpus(CorpusCmd::Emit { .. }) => "corpus emit".into(),
        Command::Corpus(CorpusCmd::List) => "corpus list".into(),
    }
}

/// Destination of document-producing commands; `None` is stdout.
pub fn output_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Transform(
            Transform::Rescale { output, .. }
            | Transform::Involute { output, .. }
            | Transform::Extend { output, .. }
            | Transform::Normalize { output, .. },
        ) => output.as_deref(),
        Command::Generate(g) => g.output.as_deref(),
        _ => None,
    }
}

pub fn load(inputs: &mut Vec<Input>, path: &str) -> Result<usize, Failure> {
    inputs.push(read_input(path)?);
    Ok(inputs.len() - 1)
}

pub fn run(cli: &Cli, inputs: &mut Vec<Input>) -> CmdResult {
    match &cli.command {
        Command::Validate { space } => {
            let i = load(inputs, space)?;
            let data = load_data(&inputs[i])?;
            let rep = validate(&data);
            report(rep.ok, &rep)
        }
        Command::Transform(t) => {
            let path = match t {
                Transform::Rescale { space, .. }
                | Transform::Involute { space, .. }
                | Transform::Extend { space, .. }
                | Transform::Normalize { space, .. } => space,
            };
            let i = load(inputs, path)?;
            let s = load_space(&inputs[i])?;
            let out = match t {
                Transform::Rescale { lambda, .. } => s.rescale(&rational("lambda", lambda)?)?,
                Transform::Involute { o, .. } => s.involute_at(o)?,
                Transform::Extend { .. } => s.extend_with_infinity()?,
                Transform::Normalize { omega, alpha, beta, .. } => {
                    s.normalize_da(s.index_of(omega)?, s.index_of(alpha)?, s.index_of(beta)?)?
                }
            };
            Ok(Output::Document(out.to_json()))
        }
        Command::Crt { space, w, x, y, z } => {
            let i = load(inputs, space)?;
            let s = load_space(&inputs[i])?;
            let t = crt_labels(&s, &[w, x, y, z])?;
            report(true, &json!({ "quadruple": [w, x, y, z], "crt": t.to_string() }))
        }
        Command::Axioms { space } => {
            let i = load(inputs, space)?;
            let s = load_space(&inputs[i])?;
            let rep = check_axioms(&s);
            report(rep.ok, &rep)
        }
        Command::Corner { space } => {
            let i = load(inputs, space)?;
            let s = load_space(&inputs[i])?;
            let m = corner_margin(&s);
            let k = s.quasi_constant().clone();
            let bound = ExtRational::from(BigRational::from_integer(1.into()) / (&k * &k));
            let holds = m.margin >= bound;
            report(
                holds,
                &json!({
                    "margin": m.margin,
                    "witness": m.witness,
                    "quadruples": m.quadruples,
                    "quasi_constant": k.to_string(),
                    "bound": bound,
                    "holds": holds,
                }),
            )
        }
        Command::Equiv { a, b, map } => {
            let ia = load(inputs, a)?;
            let ib = load(inputs, b)?;
            let sa = load_space(&inputs[ia])?;
            let sb = load_space(&inputs[ib])?;
            let f: HashMap<String, String> = match map {
                Some(p) => {
                    let im = load(inputs, p)?;
                    serde_json::from_str(&inputs[im].text).map_err(|e| Failure::Usage(format!("{p}: {e}")))?
                }
                None => identity_map(&sa),
            };
            let rep = moebius_equivalence(&sa, &sb, &f)?;
            report(rep.equivalent, &rep)
        }
        Command::HausdorffDim(args) => {
            let i = load(inputs, &args.space)?;
            let s = load_space(&inputs[i])?;
            let config = DimConfig {
                dmin: args.dmin.as_deref().map(|v| rational("dmin", v)).transpose()?,
                dmax: args.dmax.as_deref().map(|v| rational("dmax", v)).transpose()?,
                grid: args.grid,
                exact_threshold: args.exact_threshold,
            };
            let est = hausdorff_dim_estimate(&s, &config)?;
            report(true, &est)
        }
        Command::TransportHausdorff(args) => {
            let i = load(inputs, &args.space)?;
            let s = load_space(&inputs[i])?;
            let o = s.index_of(&args.o)?;
            let eps = rational("eps", &args.eps)?;
            let cover = match (&args.cover, &args.delta) {
                (Some(p), _) => {
                    let ic = load(inputs, p)?;
                    BallCover::from_json(&inputs[ic].text).map_err(|e| Failure::Usage(format!("{p}: {e}")))?
                }
                (None, Some(d)) => min_delta_cover(&s, &s.ordinary_set(), &rational("delta", d)?)?.cover,
                (None, None) => return Err(Failure::Usage("one of --cover or --delta is required".into())),
            };
            let t = transport_cover_involution(&s, &cover, o, &eps)?;
            report(t.check.ok, &t)
        }
        Command::Nagata(cmd) => crate::nagata_cmd::run(cmd, inputs),
        Command::Generate(args) => {
            let spec = args.spec(cli.seed, inputs)?;
            let g = generate(&spec)?;
            if !g.exact {
                eprintln!("note: some distances were rounded to rationals");
            }
            Ok(Output::Document(g.space.to_json()))
        }
        Command::Corpus(CorpusCmd::List) => {
            let entries = corpus_manifest();
            report(true, &json!({ "entries": entries }))
        }
        Command::Corpus(CorpusCmd::Emit { dir }) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
            let mut written = Vec::new();
            for (entry, g) in corpus()? {
                let path = dir.join(format!("{}.json", entry.name));
                fs::write(&path, g.space.to_json()).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                written.push(json!({ "name": entry.name, "points": g.space.len(), "exact": g.exact }));
            }
            let manifest = serde_json::to_string_pretty(&corpus_manifest()).expect("manifest") + "\n";
            fs::write(dir.join("manifest.json"), manifest).map_err(|e| Failure::Usage(e.to_string()))?;
            report(true, &json!({ "dir": dir, "spaces": written }))
        }
    }
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// line-grid, line-points, cantor, tree-ultrametric, snowflake,
    /// involuted, random-perturbed or extended.
    pub kind: Option<String>,
    /// A generator spec as a JSON file instead of a kind and flags.
    #[arg(long, conflicts_with = "kind")]
    pub spec: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub step: Option<String>,
    /// Comma-separated rationals.
    #[arg(long)]
    pub points: Option<String>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub branching: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Involution point label.
    #[arg(long)]
    pub o: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    /// Base generator spec (JSON text or a path to a JSON file).
    #[arg(long)]
    pub base: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

impl GenerateArgs {
    fn spec(&self, seed: u64, inputs: &mut Vec<Input>) -> Result<GeneratorSpec, Failure> {
        if let Some(p) = &self.spec {
            let input = read_input(p)?;
            let spec = serde_json::from_str(&input.text).map_err(|e| Failure::Usage(format!("{p}: {e}")))?;
            inputs.push(input);
            return Ok(spec);
        }
        let kind = self.kind.as_deref().ok_or_else(|| Failure::Usage("a kind or --spec is required".into()))?;
        let need = |v: &Option<String>, flag: &str| -> Result<String, Failure> {
            v.clone().ok_or_else(|| Failure::Usage(format!("{kind} needs --{flag}")))
        };
        let base = || -> Result<Box<GeneratorSpec>, Failure> {
            let text = self.base.as_deref().ok_or_else(|| Failure::Usage(format!("{kind} needs --base")))?;
            let text = if text.trim_start().starts_with('{') {
                text.to_string()
            } else {
                fs::read_to_string(text).map_err(|e| Failure::Usage(format!("{text}: {e}")))?
            };
            Ok(Box::new(serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("--base: {e}")))?))
        };
        Ok(match kind {
            "line-grid" => GeneratorSpec::LineGrid {
                n: self.n.ok_or_else(|| Failure::Usage("line-grid needs --n".into()))?,
                step: self.step.clone().unwrap_or_else(|| "1".into()),
            },
            "line-points" => GeneratorSpec::LinePoints {
                points: need(&self.points, "points")?.split(',').map(|s| s.trim().to_string()).collect(),
            },
            "cantor" => GeneratorSpec::Cantor {
                depth: self.depth.ok_or_else(|| Failure::Usage("cantor needs --depth".into()))?,
            },
            "tree-ultrametric" => GeneratorSpec::TreeUltrametric {
                depth: self.depth.ok_or_else(|| Failure::Usage("tree-ultrametric needs --depth".into()))?,
                branching: self.branching.unwrap_or(2),
                seed,
            },
            "snowflake" => GeneratorSpec::Snowflake { base: base()?, epsilon: need(&self.epsilon, "epsilon")? },
            "involuted" => GeneratorSpec::Involuted { base: base()?, o: need(&self.o, "o")? },
            "random-perturbed" => GeneratorSpec::RandomPerturbed { base: base()?, seed, eta: need(&self.eta, "eta")? },
            "extended" => GeneratorSpec::Extended { base: base()? },
            other => return Err(Failure::Usage(format!("unknown generator kind `{other}`"))),
        })
    }
}
