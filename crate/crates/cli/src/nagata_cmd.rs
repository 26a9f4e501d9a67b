//! `nagata` subcommands.

use clap::Subcommand;
use num_rational::BigRational;
use serde_json::json;

use moebiuslab::nagata::{
    build_hierarchical, nagata_bruteforce, split_cover, transport_cover_nagata, transport_domain, verify_hierarchical,
    verify_nagata_cover, NagataError, SetFamily,
};
use moebiuslab::qspace::{ExtRational, FiniteQSpace};

use crate::commands::{load, rational};
use crate::io::{load_space, report, CmdResult, Failure, Input};

#[derive(Subcommand, Debug)]
pub enum NagataCmd {
    /// Check that a family is a cs-bounded cover with s-multiplicity <= m.
    Verify {
        space: String,
        #[arg(long)]
        cover: String,
        /// Defaults to the family file's `s`.
        #[arg(long)]
        s: Option<String>,
        /// Defaults to the family file's `c`.
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        m: usize,
    },
    /// Split a cover into n+1 families of s-multiplicity 1.
    Split {
        space: String,
        #[arg(long)]
        cover: String,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        n: usize,
        /// Defaults to the family file's `c`, then 1.
        #[arg(long)]
        c: Option<String>,
    },
    /// Build and verify a hierarchical covering.
    Hier {
        space: String,
        #[arg(long)]
        r: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: String,
    },
    /// Build a hierarchical covering of X \ {inf, o} and transport it to d_o.
    Transport {
        space: String,
        #[arg(long)]
        o: String,
        #[arg(long)]
        s: String,
        #[arg(long, default_value = "16")]
        r: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value = "64")]
        c: String,
    },
    /// Exhaustive minimum multiplicity of cs-bounded covers (at most 8 points).
    Brute {
        space: String,
        #[arg(long)]
        s: String,
        #[arg(long)]
        c: String,
    },
}

impl NagataCmd {
    pub fn name(&self) -> &'static str {
        match self {
            NagataCmd::Verify { .. } => "verify",
            NagataCmd::Split { .. } => "split",
            NagataCmd::Hier { .. } => "hier",
            NagataCmd::Transport { .. } => "transport",
            NagataCmd::Brute { .. } => "brute",
        }
    }
}

fn semantic(e: NagataError) -> Failure {
    match e {
        NagataError::Precondition(_)
        | NagataError::Postcondition(_)
        | NagataError::IncreaseBase { .. }
        | NagataError::WindowTooSmall { .. } => Failure::Semantic(e.to_string()),
        other => Failure::Usage(other.to_string()),
    }
}

fn load_family(inputs: &mut Vec<Input>, space: &FiniteQSpace, path: &str) -> Result<SetFamily, Failure> {
    let i = load(inputs, path)?;
    SetFamily::from_json(space, &inputs[i].text).map_err(|e| Failure::Usage(format!("{path}: {e}")))
}

fn pick(flag: &Option<String>, name: &str, from_file: &Option<BigRational>) -> Result<Option<BigRational>, Failure> {
    match flag {
        Some(v) => rational(name, v).map(Some),
        None => Ok(from_file.clone()),
    }
}

pub fn run(cmd: &NagataCmd, inputs: &mut Vec<Input>) -> CmdResult {
    match cmd {
        NagataCmd::Verify { space, cover, s, c, m } => {
            let i = load(inputs, space)?;
            let sp = load_space(&inputs[i])?;
            let fam = load_family(inputs, &sp, cover)?;
            let s = pick(s, "s", &fam.s)?.ok_or_else(|| Failure::Usage("--s is required".into()))?;
            let c = pick(c, "c", &fam.c)?.ok_or_else(|| Failure::Usage("--c is required".into()))?;
            let bound = ExtRational::from(&c * &s);
            let check = verify_nagata_cover(&sp, &fam.sets, &ExtRational::from(s.clone()), &bound, *m);
            report(check.ok, &json!({ "s": s.to_string(), "c": c.to_string(), "check": check }))
        }
        NagataCmd::Split { space, cover, s, n, c } => {
            let i = load(inputs, space)?;
            let sp = load_space(&inputs[i])?;
            let fam = load_family(inputs, &sp, cover)?;
            let s = pick(s, "s", &fam.s)?.ok_or_else(|| Failure::Usage("--s is required".into()))?;
            let c = pick(c, "c", &fam.c)?.unwrap_or_else(|| BigRational::from_integer(1.into()));
            let out = split_cover(&sp, &fam.sets, &s, *n, &c).map_err(semantic)?;
            let families: Vec<_> = out
                .families
                .iter()
                .enumerate()
                .map(|(k, f)| {
                    SetFamily { sets: f.clone(), s: Some(s.clone()), c: None, color: Some(k), level: None }.to_file(&sp)
                })
                .collect();
            report(true, &json!({ "families": families, "split": out }))
        }
        NagataCmd::Hier { space, r, n, c } => {
            let i = load(inputs, space)?;
            let sp = load_space(&inputs[i])?;
            let h = build_hierarchical(&sp, &rational("r", r)?, *n, &rational("c", c)?).map_err(semantic)?;
            let check = verify_hierarchical(&sp, &h);
            report(check.ok, &json!({ "hierarchy": h.to_file(&sp), "verification": check }))
        }
        NagataCmd::Transport { space, o, s, r, n, c } => {
            let i = load(inputs, space)?;
            let sp = load_space(&inputs[i])?;
            let o = sp.index_of(o)?;
            let z = transport_domain(&sp, o).map_err(semantic)?;
            let h = build_hierarchical(&z, &rational("r", r)?, *n, &rational("c", c)?).map_err(semantic)?;
            let t = transport_cover_nagata(&sp, o, &h, &rational("s", s)?).map_err(semantic)?;
            report(
                t.ok(),
                &json!({
                    "window": [h.j_min(), h.j_max()],
                    "realized_c": h.realized_c(&z).to_string(),
                    "transport": t,
                }),
            )
        }
        NagataCmd::Brute { space, s, c } => {
            let i = load(inputs, space)?;
            let sp = load_space(&inputs[i])?;
            let b = nagata_bruteforce(&sp, &rational("s", s)?, &rational("c", c)?).map_err(semantic)?;
            report(true, &b)
        }
    }
}
