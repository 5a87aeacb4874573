//! The dependency constraint language: module definitions plus constraints of
//! the four modalities (`only A can-k B`, `A can-k-only B`, `A cannot-k B`,
//! `A must-k B`) over typed dependencies.

mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::facts::{DependencyKind, FactsDatabase};

pub use parser::parse_dcl;

/// Pseudo-modules that exist without a definition: the whole system and the
/// external API universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    System,
    Java,
}

/// One `prefix.**`, `prefix.*` or exact-name entry of a module definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Pattern {
    Exact(String),
    /// `prefix.*`: direct children of the prefix, one more segment.
    Segment(String),
    /// `prefix.**`: the whole subtree below the prefix.
    Subtree(String),
}

impl Pattern {
    pub fn parse(text: &str) -> Self {
        if let Some(p) = text.strip_suffix(".**") {
            Pattern::Subtree(p.to_string())
        } else if let Some(p) = text.strip_suffix(".*") {
            Pattern::Segment(p.to_string())
        } else {
            Pattern::Exact(text.to_string())
        }
    }

    pub fn matches(&self, id: &str) -> bool {
        match self {
            Pattern::Exact(name) => id == name,
            Pattern::Segment(prefix) => id
                .strip_prefix(prefix)
                .and_then(|rest| rest.strip_prefix('.'))
                .is_some_and(|rest| !rest.is_empty() && !rest.contains('.')),
            Pattern::Subtree(prefix) => id
                .strip_prefix(prefix)
                .and_then(|rest| rest.strip_prefix('.'))
                .is_some_and(|rest| !rest.is_empty()),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Exact(name) => f.write_str(name),
            Pattern::Segment(prefix) => write!(f, "{prefix}.*"),
            Pattern::Subtree(prefix) => write!(f, "{prefix}.**"),
        }
    }
}

/// A named set of classes, defined by patterns over type names.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleDef {
    pub name: String,
    pub patterns: Vec<Pattern>,
    /// Set for the pseudo-modules only; those carry no patterns.
    pub builtin: Option<Builtin>,
}

impl ModuleDef {
    pub fn new(name: impl Into<String>, patterns: Vec<Pattern>) -> Self {
        Self { name: name.into(), patterns, builtin: None }
    }
}

/// Constraint modality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    OnlyCan,
    CanOnly,
    Cannot,
    Must,
}

/// A single architectural constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    /// Stable identifier: an explicit label or a synthetic `C<n>`.
    pub id: String,
    pub modality: Modality,
    pub kind: DependencyKind,
    pub origin: String,
    pub targets: Vec<String>,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let targets = self.targets.join(", ");
        match self.modality {
            Modality::OnlyCan => write!(f, "only {} can-{} {}", self.origin, self.kind, targets),
            Modality::CanOnly => write!(f, "{} can-{}-only {}", self.origin, self.kind, targets),
            Modality::Cannot => write!(f, "{} cannot-{} {}", self.origin, self.kind, targets),
            Modality::Must => write!(f, "{} must-{} {}", self.origin, self.kind, targets),
        }
    }
}

/// Parsed module definitions plus constraints.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConstraintSet {
    pub modules: Vec<ModuleDef>,
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn constraint(&self, id: &str) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.id == id)
    }

    /// Names of modules defined in the file (excludes builtins and bare types).
    pub fn defined_module_names(&self) -> impl Iterator<Item = &str> {
        self.modules.iter().filter(|m| m.builtin.is_none()).map(|m| m.name.as_str())
    }
}

/// Errors from parsing or resolving DCL.
#[derive(Debug, Error)]
pub enum DclError {
    #[error("parse error at {line}:{column}: expected {expected}, found {found}")]
    Parse { line: u32, column: u32, expected: String, found: String },
    #[error("unknown dependency kind `{word}` at {line}:{column}")]
    UnknownKind { line: u32, column: u32, word: String },
    #[error("`{name}` is not a defined module, builtin, or known type name")]
    UnresolvedModule { name: String },
    #[error("type name `{name}` is ambiguous: {candidates:?}")]
    AmbiguousTypeName { name: String, candidates: Vec<String> },
}

/// Canonical textual form; parsing it back yields a structurally equal set.
pub fn print_dcl(cs: &ConstraintSet) -> String {
    let mut out = String::new();
    for m in &cs.modules {
        if m.builtin.is_some() {
            continue;
        }
        let patterns: Vec<String> = m.patterns.iter().map(Pattern::to_string).collect();
        out.push_str(&format!("module {}: {}\n", m.name, patterns.join(", ")));
    }
    for c in &cs.constraints {
        out.push_str(&format!("{}: {}\n", c.id, c));
    }
    out
}

fn is_builtin_system(name: &str) -> bool {
    name == "$system"
}

fn is_builtin_external(name: &str) -> bool {
    name == "$java" || name == "JavaAPI"
}

/// Resolves a module name to the set of type ids it denotes.
///
/// Order of interpretation: defined module (honoring move overrides), then
/// builtin (`$system`, `$java`/`JavaAPI`), then bare type name — first by
/// fully-qualified id, then by unique simple name.
pub fn resolve_module(
    cs: &ConstraintSet,
    db: &FactsDatabase,
    name: &str,
) -> Result<BTreeSet<String>, DclError> {
    if let Some(def) = cs.module(name) {
        if let Some(builtin) = def.builtin {
            return Ok(resolve_builtin(db, builtin));
        }
        let mut set: BTreeSet<String> = BTreeSet::new();
        for t in db.types() {
            if def.patterns.iter().any(|p| p.matches(&t.id)) {
                set.insert(t.id.clone());
            }
        }
        for ext in db.external_type_ids() {
            if def.patterns.iter().any(|p| p.matches(ext)) {
                set.insert(ext.clone());
            }
        }
        // Move overrides re-assign a type to exactly one defined module.
        for (type_id, module) in db.module_overrides() {
            if module == name {
                set.insert(type_id.clone());
            } else {
                set.remove(type_id);
            }
        }
        return Ok(set);
    }
    if is_builtin_system(name) {
        return Ok(resolve_builtin(db, Builtin::System));
    }
    if is_builtin_external(name) {
        return Ok(resolve_builtin(db, Builtin::Java));
    }

    // Bare type name: singleton module.
    if db.resolves(name) && (db.type_entity(name).is_some() || db.external_type_ids().contains(name)) {
        return Ok(BTreeSet::from([name.to_string()]));
    }
    let simple = |id: &str| id.rsplit('.').next().unwrap_or(id).to_string();
    let mut candidates: BTreeSet<String> = BTreeSet::new();
    for t in db.types() {
        if simple(&t.id) == name {
            candidates.insert(t.id.clone());
        }
    }
    for ext in db.external_type_ids() {
        if simple(ext) == name {
            candidates.insert(ext.clone());
        }
    }
    match candidates.len() {
        0 => Err(DclError::UnresolvedModule { name: name.to_string() }),
        1 => Ok(candidates),
        _ => Err(DclError::AmbiguousTypeName {
            name: name.to_string(),
            candidates: candidates.into_iter().collect(),
        }),
    }
}

fn resolve_builtin(db: &FactsDatabase, builtin: Builtin) -> BTreeSet<String> {
    match builtin {
        Builtin::System => db.internal_type_ids().map(str::to_string).collect(),
        Builtin::Java => db.external_type_ids().clone(),
    }
}

/// Warnings for overlapping module definitions. Overlap is legal; surfacing
/// it helps explain surprising membership during recommendation.
pub fn lint_overlaps(cs: &ConstraintSet, db: &FactsDatabase) -> Vec<String> {
    let mut warnings = Vec::new();
    let names: Vec<&str> = cs.defined_module_names().collect();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            let (Ok(sa), Ok(sb)) = (resolve_module(cs, db, a), resolve_module(cs, db, b)) else {
                continue;
            };
            let shared: Vec<&String> = sa.intersection(&sb).collect();
            if !shared.is_empty() {
                warnings.push(format!(
                    "modules `{a}` and `{b}` overlap on {} type(s), e.g. `{}`",
                    shared.len(),
                    shared[0]
                ));
            }
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::{FactsBuilder, TypeEntity, TypeKind};

    fn sample_db() -> FactsDatabase {
        let mut b = FactsBuilder::new();
        b.register_external("java.");
        b.push_type(TypeEntity::new("com.app.dao.UserDAO", TypeKind::Class));
        b.push_type(TypeEntity::new("com.app.web.C", TypeKind::Class));
        b.push_type({
            let mut t = TypeEntity::new("com.app.dto.D", TypeKind::Class);
            t.supertypes.push("java.io.Serializable".into());
            t
        });
        b.build().unwrap().0
    }

    #[test]
    fn patterns_match_expected_subsets() {
        assert!(Pattern::parse("com.app.dao.**").matches("com.app.dao.UserDAO"));
        assert!(Pattern::parse("com.app.dao.**").matches("com.app.dao.sub.X"));
        assert!(!Pattern::parse("com.app.dao.**").matches("com.app.web.C"));
        assert!(!Pattern::parse("com.app.dao.**").matches("com.app.dao"));
        assert!(Pattern::parse("com.app.dao.*").matches("com.app.dao.UserDAO"));
        assert!(!Pattern::parse("com.app.dao.*").matches("com.app.dao.sub.X"));
        assert!(Pattern::parse("com.app.web.C").matches("com.app.web.C"));
    }

    #[test]
    fn system_builtin_is_internal_types_only() {
        let db = sample_db();
        let cs = ConstraintSet::default();
        let set = resolve_module(&cs, &db, "$system").unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.contains("com.app.dao.UserDAO"));
        let ext = resolve_module(&cs, &db, "$java").unwrap();
        assert_eq!(ext, BTreeSet::from(["java.io.Serializable".to_string()]));
        assert_eq!(resolve_module(&cs, &db, "JavaAPI").unwrap(), ext);
    }

    #[test]
    fn bare_type_name_resolution_prefers_qualified_then_simple() {
        let db = sample_db();
        let cs = ConstraintSet::default();
        let set = resolve_module(&cs, &db, "com.app.web.C").unwrap();
        assert_eq!(set, BTreeSet::from(["com.app.web.C".to_string()]));
        let set = resolve_module(&cs, &db, "Serializable").unwrap();
        assert_eq!(set, BTreeSet::from(["java.io.Serializable".to_string()]));
        assert!(matches!(
            resolve_module(&cs, &db, "Nothing"),
            Err(DclError::UnresolvedModule { .. })
        ));
    }

    #[test]
    fn module_resolution_honors_move_overrides() {
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("com.app.dto.D", TypeKind::Class));
        let mut parts = b.build().unwrap().0.to_parts();
        parts.module_overrides.push(crate::facts::ModuleOverride {
            type_id: "com.app.dto.D".into(),
            module: "Constant".into(),
        });
        let (db, _) = FactsDatabase::from_parts(parts).unwrap();
        let cs = ConstraintSet {
            modules: vec![
                ModuleDef::new("DTO", vec![Pattern::parse("com.app.dto.**")]),
                ModuleDef::new("Constant", vec![Pattern::parse("com.app.constant.**")]),
            ],
            constraints: vec![],
        };
        assert!(resolve_module(&cs, &db, "DTO").unwrap().is_empty());
        assert!(resolve_module(&cs, &db, "Constant").unwrap().contains("com.app.dto.D"));
    }

    #[test]
    fn overlap_lint_reports_shared_members() {
        let db = sample_db();
        let cs = ConstraintSet {
            modules: vec![
                ModuleDef::new("A", vec![Pattern::parse("com.app.**")]),
                ModuleDef::new("B", vec![Pattern::parse("com.app.dao.**")]),
            ],
            constraints: vec![],
        };
        let warnings = lint_overlaps(&cs, &db);
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("overlap"));
    }
}
