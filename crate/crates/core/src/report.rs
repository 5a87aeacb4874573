//! Text and JSON renderings of violation reports, recommendation reports and
//! patch plans. Output is deterministic: identical inputs give identical text.

use serde::Serialize;

use crate::apply::{PatchPlan, Skipped};
use crate::checker::{Violation, ViolationFlavor};
use crate::recommend::{RecommendOutcome, Recommendation};

const RED: &str = "\x1b[31m";
const YELLOW: &str = "\x1b[33m";
const GREEN: &str = "\x1b[32m";
const BOLD: &str = "\x1b[1m";
const RESET: &str = "\x1b[0m";

/// One violation line: `ID flavor offender --kind--> counterpart @ file:line:col`.
pub fn violation_line(v: &Violation, color: bool) -> String {
    if !color {
        return v.to_string();
    }
    let tint = match v.flavor {
        ViolationFlavor::Divergence => RED,
        ViolationFlavor::Absence => YELLOW,
    };
    format!(
        "{BOLD}{}{RESET} {tint}{}{RESET} {} --{}--> {} @ {}",
        v.constraint_id, v.flavor, v.offender, v.kind, v.counterpart, v.location
    )
}

pub fn violations_text(violations: &[Violation], color: bool) -> String {
    let mut out = String::new();
    for v in violations {
        out.push_str(&violation_line(v, color));
        out.push('\n');
    }
    out
}

pub fn violations_json(violations: &[Violation]) -> String {
    let mut s = serde_json::to_string_pretty(violations).expect("violations serialize");
    s.push('\n');
    s
}

/// Per-violation entry of a fix report.
#[derive(Debug, Clone, Serialize)]
pub struct FixEntry {
    pub violation: Violation,
    pub recommendations: Vec<Recommendation>,
    pub diagnostics: Vec<String>,
}

/// Outcome counters when `fix` actually applied its recommendations.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ApplySummary {
    pub applied: usize,
    pub skipped: usize,
    pub remaining_violations: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FixReport {
    pub entries: Vec<FixEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<Skipped>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apply: Option<ApplySummary>,
}

impl FixReport {
    pub fn push(&mut self, violation: Violation, outcome: RecommendOutcome, max_recs: usize) {
        let mut recommendations = outcome.recommendations;
        recommendations.truncate(max_recs);
        self.entries.push(FixEntry { violation, recommendations, diagnostics: outcome.diagnostics });
    }

    /// Violations that received no recommendation at all.
    pub fn unresolved(&self) -> usize {
        self.entries.iter().filter(|e| e.recommendations.is_empty()).count()
    }
}

pub fn fix_report_text(report: &FixReport, color: bool) -> String {
    let mut out = String::new();
    for entry in &report.entries {
        out.push_str(&violation_line(&entry.violation, color));
        out.push('\n');
        for rec in &entry.recommendations {
            let rule = if color {
                format!("{GREEN}{}{RESET}", rec.rule)
            } else {
                rec.rule.to_string()
            };
            out.push_str(&format!("  -> {rule}: {}\n", rec.rationale));
            if let Some(similarity) = &rec.similarity {
                let scores: Vec<String> = similarity
                    .scores
                    .iter()
                    .map(|s| format!("{}={:.3}", s.module, s.score))
                    .collect();
                out.push_str(&format!("     similarity: {}\n", scores.join(" ")));
            }
        }
        if entry.recommendations.is_empty() {
            out.push_str("  !! no recommendation applicable:\n");
            for d in &entry.diagnostics {
                out.push_str(&format!("     {d}\n"));
            }
        }
    }
    for s in &report.skipped {
        out.push_str(&format!(
            "  ~~ skipped {} for {}: {}\n",
            s.recommendation.rule, s.recommendation.violation.offender, s.reason
        ));
    }
    if let Some(summary) = &report.apply {
        out.push_str(&format!(
            "applied {} recommendation(s), skipped {}, {} violation(s) remaining\n",
            summary.applied, summary.skipped, summary.remaining_violations
        ));
    }
    out
}

pub fn fix_report_json(report: &FixReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("fix report serialize");
    s.push('\n');
    s
}

pub fn patch_plan_json(plan: &PatchPlan) -> String {
    let mut s = serde_json::to_string_pretty(plan).expect("plan serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::{DependencyKind, SourceLocation};

    fn sample() -> Violation {
        Violation {
            constraint_id: "TC9".into(),
            flavor: ViolationFlavor::Divergence,
            offender: "app.Main".into(),
            counterpart: "app.ctl.Login".into(),
            kind: DependencyKind::Create,
            location: SourceLocation::new("Main.java", 4, 9),
            site: Some("s".into()),
        }
    }

    #[test]
    fn plain_line_matches_documented_format() {
        assert_eq!(
            violation_line(&sample(), false),
            "TC9 divergence app.Main --create--> app.ctl.Login @ Main.java:4:9"
        );
    }

    #[test]
    fn colored_line_keeps_all_fields() {
        let line = violation_line(&sample(), true);
        assert!(line.contains("TC9") && line.contains("app.Main") && line.contains("\x1b["));
    }

    #[test]
    fn violations_json_is_an_array() {
        let text = violations_json(&[sample()]);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 1);
        assert_eq!(parsed[0]["constraint_id"], "TC9");
        assert_eq!(parsed[0]["kind"], "create");
    }
}
