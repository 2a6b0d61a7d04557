use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hecke_core::decompose::DEFAULT_SEED;
use hecke_core::{CoeffField, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Latex,
}

impl Format {
    fn parse(s: &str) -> Result<Self> {
        <Format as ValueEnum>::from_str(s, true).map_err(|_| Error::Usage(format!("unknown format `{s}`")))
    }
}

/// Flags shared by every verb. All are optional so that a key-value file can
/// fill the gaps.
#[derive(Args, Debug, Default, Clone)]
pub struct JobArgs {
    /// Root datum label, e.g. A1~, A2~, B2, G2, GL2, PGL2.
    #[arg(long = "type", value_name = "LABEL")]
    pub cartan_type: Option<String>,
    /// Coefficient characteristic (a prime).
    #[arg(long)]
    pub ell: Option<u64>,
    /// Coefficient field: Q or a prime. Ignored when --ell is given.
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub bound: Option<usize>,
    /// Truncation level for the multiplicative side.
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Key-value file (`key = value` per line); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suite for `verify`: weyl, hecke, lkl, hom-formula, multside, steinberg or all.
    #[arg(long)]
    pub suite: Option<String>,
    /// Table file for `export`.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct JobConfig {
    pub cartan_label: String,
    pub field: CoeffField,
    pub length_bound: usize,
    pub level: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub suite: String,
    pub input: Option<PathBuf>,
}

const KEYS: &[&str] = &["type", "ell", "field", "bound", "level", "seed", "out", "format", "suite", "input"];

fn read_kv(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("{}:{}: expected key = value", path.display(), n + 1)))?;
        let k = k.trim().to_string();
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::Usage(format!("{}:{}: unknown key `{k}`", path.display(), n + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Usage(format!("bad value `{v}` for {key}")))
}

impl JobConfig {
    pub fn resolve(args: &JobArgs, default_field: CoeffField) -> Result<Self> {
        let file = match &args.config {
            Some(p) => read_kv(p)?,
            None => BTreeMap::new(),
        };
        let get = |k: &str| file.get(k).map(String::as_str);

        let cartan_label = args
            .cartan_type
            .clone()
            .or_else(|| get("type").map(str::to_string))
            .unwrap_or_else(|| "A1~".into());
        let ell = match args.ell {
            Some(p) => Some(p),
            None if args.field.is_some() => None,
            None => get("ell").map(|v| num::<u64>("ell", v)).transpose()?,
        };
        let field = match (ell, args.field.as_deref().or(get("field"))) {
            (Some(p), _) => CoeffField::parse(&p.to_string())?,
            (None, Some(s)) => CoeffField::parse(s)?,
            (None, None) => default_field,
        };
        let length_bound = match args.bound {
            Some(b) => b,
            None => get("bound").map(|v| num("bound", v)).transpose()?.unwrap_or(4),
        };
        let level = match args.level {
            Some(l) => l,
            None => get("level").map(|v| num("level", v)).transpose()?.unwrap_or(3),
        };
        let seed = match args.seed {
            Some(s) => s,
            None => get("seed").map(|v| num("seed", v)).transpose()?.unwrap_or(DEFAULT_SEED),
        };
        let format = match args.format {
            Some(f) => f,
            None => get("format").map(Format::parse).transpose()?.unwrap_or(Format::Json),
        };
        let out = args.out.clone().or_else(|| get("out").map(PathBuf::from));
        let input = args.input.clone().or_else(|| get("input").map(PathBuf::from));
        let suite = args
            .suite
            .clone()
            .or_else(|| get("suite").map(str::to_string))
            .unwrap_or_else(|| "all".into());

        if length_bound == 0 {
            return Err(Error::Usage("bound must be positive".into()));
        }
        if !(1..=3).contains(&level) {
            return Err(Error::Usage("level must be 1, 2 or 3".into()));
        }
        Ok(JobConfig {
            cartan_label,
            field,
            length_bound,
            level,
            seed,
            out,
            format,
            suite,
            input,
        })
    }
}
