//! `archfix`: extract dependency facts, check them against constraints, and
//! recommend or apply refactorings for the violations.
//!
//! Exit codes: 0 clean (or fully repairable/repaired for `fix`/`apply`),
//! 1 violations remain, 2 operational error.

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use archfix_core::apply::{apply_all, PatchPlan, Skipped};
use archfix_core::checker::check;
use archfix_core::dcl::{lint_overlaps, parse_dcl, ConstraintSet};
use archfix_core::extract::extract;
use archfix_core::facts::FactsDatabase;
use archfix_core::recommend::{recommend_with, Recommendation, RecommendConfig};
use archfix_core::report::{
    fix_report_json, fix_report_text, patch_plan_json, violations_json, violations_text,
    ApplySummary, FixReport,
};

#[derive(Parser)]
#[command(
    name = "archfix",
    version,
    about = "Dependency-constraint conformance checking and repair recommendations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ApplyMode {
    None,
    Plan,
    Facts,
}

/// Exactly one input: a facts file or a source tree to extract.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Facts JSON file produced by `archfix extract`
    #[arg(long)]
    facts: Option<PathBuf>,
    /// Source directory to extract on the fly
    #[arg(long)]
    src: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a source tree and write its dependency facts
    Extract {
        /// Source directory
        #[arg(long)]
        src: PathBuf,
        /// Output facts file (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report constraint violations
    Check {
        #[command(flatten)]
        input: InputArgs,
        /// Constraint file
        #[arg(long)]
        dcl: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recommend refactorings per violation; optionally plan or apply them
    Fix {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        dcl: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Minimum similarity gap before a Move Class is proposed
        #[arg(long, default_value_t = 0.1)]
        gap: f64,
        /// Recommendations shown per violation
        #[arg(long = "max-recs", default_value_t = 1)]
        max_recs: usize,
        #[arg(long, value_enum, default_value_t = ApplyMode::None)]
        apply: ApplyMode,
        /// Artifact path: the patch plan (--apply plan) or post-apply facts (--apply facts)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply every recommendation and write the repaired facts
    Apply {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        dcl: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = 0.1)]
        gap: f64,
        /// Post-apply facts file
        #[arg(long)]
        out: PathBuf,
        /// Also write the patch plan here
        #[arg(long)]
        plan: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Extract { src, out } => cmd_extract(&src, out.as_deref()),
        Command::Check { input, dcl, format, out } => cmd_check(&input, &dcl, format, out.as_deref()),
        Command::Fix { input, dcl, format, gap, max_recs, apply, out } => cmd_fix(FixArgs {
            input,
            dcl,
            format,
            gap,
            max_recs,
            apply,
            out,
            plan: None,
        }),
        Command::Apply { input, dcl, format, gap, out, plan } => cmd_fix(FixArgs {
            input,
            dcl,
            format,
            gap,
            max_recs: 1,
            apply: ApplyMode::Facts,
            out: Some(out),
            plan,
        }),
    }
}

fn use_color() -> bool {
    std::env::var_os("ARCHFIX_NO_COLOR").is_none() && std::io::stdout().is_terminal()
}

fn load_database(input: &InputArgs) -> Result<FactsDatabase> {
    match (&input.facts, &input.src) {
        (Some(path), None) => {
            let (db, warnings) = FactsDatabase::load_path(path)
                .with_context(|| format!("loading facts from {}", path.display()))?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            Ok(db)
        }
        (None, Some(dir)) => {
            extract(dir).with_context(|| format!("extracting {}", dir.display()))
        }
        _ => bail!("exactly one of --facts or --src is required"),
    }
}

fn load_constraints(path: &Path) -> Result<ConstraintSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_dcl(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_extract(src: &Path, out: Option<&Path>) -> Result<u8> {
    let db = extract(src).with_context(|| format!("extracting {}", src.display()))?;
    emit(&db.to_json(), out)?;
    Ok(0)
}

fn cmd_check(input: &InputArgs, dcl: &Path, format: Format, out: Option<&Path>) -> Result<u8> {
    let db = load_database(input)?;
    let cs = load_constraints(dcl)?;
    for w in lint_overlaps(&cs, &db) {
        eprintln!("warning: {w}");
    }
    let violations = check(&db, &cs)?;
    let text = match format {
        Format::Text => violations_text(&violations, out.is_none() && use_color()),
        Format::Json => violations_json(&violations),
    };
    emit(&text, out)?;
    Ok(u8::from(!violations.is_empty()))
}

struct FixArgs {
    input: InputArgs,
    dcl: PathBuf,
    format: Format,
    gap: f64,
    max_recs: usize,
    apply: ApplyMode,
    out: Option<PathBuf>,
    plan: Option<PathBuf>,
}

fn cmd_fix(args: FixArgs) -> Result<u8> {
    if !(0.0..=1.0).contains(&args.gap) {
        bail!("--gap must lie in [0, 1]");
    }
    if args.max_recs == 0 {
        bail!("--max-recs must be positive");
    }
    let db = load_database(&args.input)?;
    let cs = load_constraints(&args.dcl)?;
    for w in lint_overlaps(&cs, &db) {
        eprintln!("warning: {w}");
    }
    let config = RecommendConfig { gap_threshold: args.gap };
    let violations = check(&db, &cs)?;

    let mut report = FixReport::default();
    let mut to_apply: Vec<Recommendation> = Vec::new();
    for v in &violations {
        let outcome = recommend_with(&db, &cs, v, &config)?;
        if let Some(first) = outcome.recommendations.first() {
            to_apply.push(first.clone());
        }
        report.push(v.clone(), outcome, args.max_recs);
    }
    let all_recommended = report.unresolved() == 0;

    let mut plan_to_write: Option<PatchPlan> = None;
    let mut fully_resolved = true;
    match args.apply {
        ApplyMode::None => {}
        ApplyMode::Plan => {
            let (_, plan, skipped) = apply_all(&db, &cs, &to_apply)?;
            report.skipped = skipped;
            plan_to_write = Some(plan);
        }
        ApplyMode::Facts => {
            let (new_db, plan, skipped) = apply_all(&db, &cs, &to_apply)?;
            let remaining = check(&new_db, &cs)?;
            fully_resolved = remaining.is_empty();
            report.apply = Some(ApplySummary {
                applied: to_apply.len() - skipped.len(),
                skipped: skipped.len(),
                remaining_violations: remaining.len(),
            });
            report.skipped = skipped;
            plan_to_write = Some(plan);
            let out = args
                .out
                .as_deref()
                .context("--apply facts needs --out for the post-apply facts file")?;
            new_db.save_path(out)
                .with_context(|| format!("writing {}", out.display()))?;
        }
    }

    let text = match args.format {
        Format::Text => fix_report_text(&report, use_color()),
        Format::Json => fix_report_json(&report),
    };
    print!("{text}");

    if let Some(plan) = plan_to_write {
        let rendered = match args.format {
            Format::Text => plan.to_text(),
            Format::Json => patch_plan_json(&plan),
        };
        match args.apply {
            ApplyMode::Plan => emit(&rendered, args.out.as_deref())?,
            ApplyMode::Facts => {
                if let Some(path) = &args.plan {
                    std::fs::write(path, patch_plan_json(&plan))
                        .with_context(|| format!("writing {}", path.display()))?;
                }
            }
            ApplyMode::None => {}
        }
    }

    let clean = violations.is_empty() || (all_recommended && fully_resolved);
    Ok(u8::from(!clean))
}

/// Unused helper kept for sorting skipped entries deterministically.
#[allow(dead_code)]
fn skipped_key(s: &Skipped) -> (String, String) {
    (s.recommendation.violation.constraint_id.clone(), s.recommendation.violation.offender.clone())
}
