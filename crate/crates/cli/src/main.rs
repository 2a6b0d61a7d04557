//! Batch front end for the table computations and verification suites.

mod config;

use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use hecke_core::decompose::classical_table;
use hecke_core::multside::{render_relations, MultContext};
use hecke_core::suites;
use hecke_core::{with_field, AffineWeyl, CoeffField, Error, LklTable, Report, Result};

use config::{Format, JobArgs, JobConfig};

#[derive(Parser)]
#[command(name = "hecke", version, about = "Kazhdan-Lusztig and l-KL tables for affine Weyl groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Elements of W up to the length bound.
    Weyl(JobArgs),
    /// Classical Kazhdan-Lusztig table.
    Kl(JobArgs),
    /// l-KL table computed from the bimodule category.
    Plkl(JobArgs),
    /// Tilting multiplicities, the l-KL table at v = 1.
    Tilting(JobArgs),
    /// Truncated modules on the multiplicative side.
    Multside(JobArgs),
    /// Run verification suites; the exit status is 0 iff every check passes.
    Verify(JobArgs),
    /// Convert a table file to another format.
    Export(JobArgs),
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Usage(_) | Error::UnknownLabel(_) | Error::Parse(_) | Error::Degenerate { .. }
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_workers() {
        eprintln!("hecke: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("hecke: {e}");
            ExitCode::from(if usage_error(&e) { 2 } else { 1 })
        }
    }
}

fn init_workers() -> Result<()> {
    let Ok(v) = std::env::var("HECKE_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Usage(format!("HECKE_WORKERS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Usage(e.to_string()))
}

fn run(cmd: Command) -> Result<bool> {
    let (verb, args) = match &cmd {
        Command::Weyl(a) => ("weyl", a),
        Command::Kl(a) => ("kl", a),
        Command::Plkl(a) => ("plkl", a),
        Command::Tilting(a) => ("tilting", a),
        Command::Multside(a) => ("multside", a),
        Command::Verify(a) => ("verify", a),
        Command::Export(a) => ("export", a),
    };
    let job = JobConfig::resolve(args, CoeffField::Rationals)?;
    if verb == "export" {
        return export(&job);
    }
    let weyl = Arc::new(AffineWeyl::from_label(&job.cartan_label)?);
    let label = weyl.datum.cartan_label.clone();
    let (text, ok) = match verb {
        "weyl" => (weyl_listing(&weyl, &job), true),
        "kl" => (table_text(&weyl, &classical_table(&weyl, &label, job.length_bound), job.format), true),
        "plkl" => {
            let t = suites::lkl_table(&weyl, &label, job.field, job.length_bound)?;
            (table_text(&weyl, &t, job.format), true)
        }
        "tilting" => {
            let t = suites::lkl_table(&weyl, &label, job.field, job.length_bound)?.tilting();
            let text = match job.format {
                Format::Json => t.to_json(&weyl),
                Format::Csv => t.to_csv(&weyl),
                Format::Latex => t.to_latex(&weyl),
            };
            (text, true)
        }
        "multside" => (multside_listing(&weyl, &job)?, true),
        _ => verify(&weyl, &job)?,
    };
    emit(&job, &text)?;
    Ok(ok)
}

fn emit(job: &JobConfig, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &job.out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn table_text(weyl: &AffineWeyl, t: &LklTable, format: Format) -> String {
    match format {
        Format::Json => t.to_json(weyl),
        Format::Csv => t.to_csv(weyl),
        Format::Latex => t.to_latex(weyl),
    }
}

fn word_string(word: &[usize]) -> String {
    word.iter().map(|s| s.to_string()).collect()
}

fn weyl_listing(weyl: &AffineWeyl, job: &JobConfig) -> String {
    let elems = weyl.ball_sorted(job.length_bound);
    let rows: Vec<(String, usize, String)> = elems
        .iter()
        .map(|w| (weyl.format(w), weyl.length(w), word_string(&weyl.reduced_word(w))))
        .collect();
    match job.format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "type": "weyl",
            "label": weyl.datum.cartan_label,
            "bound": job.length_bound,
            "elements": rows.iter().map(|(w, l, r)| serde_json::json!({"w": w, "length": l, "word": r})).collect::<Vec<_>>(),
        }))
        .expect("serializable"),
        Format::Csv => {
            let mut s = format!("# weyl {} {}\nw,length,word\n", weyl.datum.cartan_label, job.length_bound);
            for (w, l, r) in &rows {
                s.push_str(&format!("{w},{l},{r}\n"));
            }
            s
        }
        Format::Latex => {
            let mut s = String::from("\\begin{tabular}{lrl}\n$w$ & $\\ell(w)$ & word \\\\\n\\hline\n");
            for (w, l, r) in &rows {
                s.push_str(&format!("${w}$ & {l} & {r} \\\\\n"));
            }
            s.push_str("\\end{tabular}\n");
            s
        }
    }
}

fn multside_listing(weyl: &AffineWeyl, job: &JobConfig) -> Result<String> {
    let level = job.level;
    with_field!(job.field, |f| {
        let ctx = MultContext::new(weyl, &f, level)?;
        let mut rows = Vec::new();
        for w in 0..weyl.finite_order() {
            let word = weyl.finite_element(w).word;
            let name = if word.is_empty() { "e".to_string() } else { word_string(&word) };
            rows.push((format!("M_{name}"), ctx.m_module(w).dim, render_relations(weyl, w).join("; ")));
        }
        for i in 0..weyl.rank() {
            rows.push((format!("B_{}", i + 1), ctx.b_module(i)?.dim, String::new()));
        }
        rows.push(("O(D)".to_string(), ctx.d_algebra()?.dim, String::new()));
        Ok(match job.format {
            Format::Json => serde_json::to_string_pretty(&serde_json::json!({
                "type": "multside",
                "label": weyl.datum.cartan_label,
                "field": job.field.tag(),
                "level": level,
                "local_dim": ctx.torus.dim(),
                "modules": rows.iter().map(|(n, d, r)| serde_json::json!({"module": n, "dim": d, "relations": r})).collect::<Vec<_>>(),
            }))
            .expect("serializable"),
            Format::Csv => {
                let mut s = format!(
                    "# multside {} {} {level}\nmodule,dim,relations\n",
                    weyl.datum.cartan_label,
                    job.field.tag()
                );
                for (n, d, r) in &rows {
                    s.push_str(&format!("{n},{d},\"{r}\"\n"));
                }
                s
            }
            Format::Latex => {
                let mut s = String::from("\\begin{tabular}{lrl}\nmodule & dim & relations \\\\\n\\hline\n");
                for (n, d, r) in &rows {
                    s.push_str(&format!("${n}$ & {d} & ${r}$ \\\\\n"));
                }
                s.push_str("\\end{tabular}\n");
                s
            }
        })
    })
}

fn run_suite(name: &str, weyl: &Arc<AffineWeyl>, job: &JobConfig) -> Result<Vec<hecke_core::CheckRecord>> {
    match name {
        "weyl" => Ok(suites::weyl_suite(weyl, job.length_bound)),
        "hecke" => Ok(suites::hecke_suite(weyl, job.length_bound)),
        "lkl" => suites::lkl_suite(weyl, job.field, job.length_bound, job.seed),
        "hom-formula" => suites::hom_formula_suite(weyl, job.field, job.length_bound),
        "multside" => suites::multside_suite(weyl, job.field, job.level),
        "steinberg" => suites::steinberg_suite(job.field),
        other => Err(Error::Usage(format!(
            "unknown suite `{other}` (expected one of {} or all)",
            suites::SUITES.join(", ")
        ))),
    }
}

fn verify(weyl: &Arc<AffineWeyl>, job: &JobConfig) -> Result<(String, bool)> {
    let label = &weyl.datum.cartan_label;
    let field = job.field.tag();
    let mut reports = Vec::new();
    if job.suite == "all" {
        for name in suites::SUITES {
            match run_suite(name, weyl, job) {
                Ok(checks) => reports.push(Report::new(name, label, &field, checks)),
                // Suites that do not apply to this datum or field are skipped.
                Err(e) if usage_error(&e) => eprintln!("hecke: skipping {name}: {e}"),
                Err(e) => return Err(e),
            }
        }
    } else {
        let checks = run_suite(&job.suite, weyl, job)?;
        reports.push(Report::new(&job.suite, label, &field, checks));
    }
    let ok = reports.iter().all(|r| r.pass);
    for r in &reports {
        for c in r.failures() {
            eprintln!("FAIL {}: {} [{}] expected {} got {}", r.suite, c.name, c.inputs, c.expected, c.got);
        }
    }
    let text = match job.format {
        Format::Json if reports.len() == 1 => reports[0].to_json(),
        Format::Json => serde_json::to_string_pretty(&reports).expect("serializable"),
        Format::Csv => reports.iter().map(Report::to_csv).collect(),
        Format::Latex => return Err(Error::Usage("verify reports are json or csv".into())),
    };
    Ok((text, ok))
}

/// Table label from either serialized form, needed to rebuild the group
/// before parsing element names.
fn table_label(text: &str) -> Result<String> {
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        v.get("label")
            .and_then(|l| l.as_str())
            .map(str::to_string)
            .ok_or_else(|| Error::Parse("table has no label".into()))
    } else {
        text.lines()
            .next()
            .and_then(|h| h.split_whitespace().nth(2))
            .map(str::to_string)
            .ok_or_else(|| Error::Parse("table has no header".into()))
    }
}

fn export(job: &JobConfig) -> Result<bool> {
    let path = job
        .input
        .as_ref()
        .ok_or_else(|| Error::Usage("export needs --input".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
    let weyl = AffineWeyl::from_label(&table_label(&text)?)?;
    let table = if text.trim_start().starts_with('{') {
        LklTable::from_json(&weyl, &text)?
    } else {
        LklTable::from_csv(&weyl, &text)?
    };
    emit(job, &table_text(&weyl, &table, job.format))?;
    Ok(true)
}
