//! Language-neutral dependency facts: types, members, typed dependency edges,
//! declaration/creation sites, and the immutable [`FactsDatabase`] snapshot.
//!
//! The database is loaded once (from a facts JSON file or from the extractor)
//! and never mutated; refactorings produce a new database via
//! [`FactsDatabase::to_parts`] + [`FactsDatabase::from_parts`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schema version accepted in facts files.
pub const FACTS_VERSION: u32 = 1;

/// A file/line/column position in source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceLocation {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourceLocation {
    pub fn new(file: impl Into<String>, line: u32, column: u32) -> Self {
        Self { file: file.into(), line, column }
    }

    /// Placeholder for entities whose position was never recorded.
    pub fn unknown() -> Self {
        Self { file: "<facts>".to_string(), line: 0, column: 0 }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// What a type entity is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeKind {
    Class,
    Interface,
    Annotation,
}

/// Declared element kind an annotation may be applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationTarget {
    Type,
    Method,
    Field,
}

/// Method or field distinction inside a [`MemberSignature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberKind {
    Method,
    Field,
}

/// A member a type provides. Fields are modeled with arity 0 and their
/// declared type in `return_type`; constructors use the name `<init>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSignature {
    pub name: String,
    pub arity: usize,
    pub param_types: Vec<String>,
    /// `None` is the void marker.
    pub return_type: Option<String>,
    pub is_static: bool,
    pub member_kind: MemberKind,
}

impl MemberSignature {
    pub fn method(name: impl Into<String>, param_types: Vec<String>, return_type: Option<String>) -> Self {
        let param_types: Vec<String> = param_types;
        Self {
            name: name.into(),
            arity: param_types.len(),
            param_types,
            return_type,
            is_static: false,
            member_kind: MemberKind::Method,
        }
    }

    pub fn static_method(name: impl Into<String>, param_types: Vec<String>, return_type: Option<String>) -> Self {
        Self { is_static: true, ..Self::method(name, param_types, return_type) }
    }

    pub fn field(name: impl Into<String>, field_type: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            arity: 0,
            param_types: Vec::new(),
            return_type: Some(field_type.into()),
            is_static: false,
            member_kind: MemberKind::Field,
        }
    }

    /// Signature identity used by substitution type checks: name, arity,
    /// parameter types and member kind. Return type and staticness are not
    /// part of call-site compatibility.
    pub fn matches_usage(&self, usage: &MemberSignature) -> bool {
        self.name == usage.name
            && self.arity == usage.arity
            && self.param_types == usage.param_types
            && self.member_kind == usage.member_kind
    }
}

/// The relation category between two types.
///
/// `Depend` and `Derive` are abstract query kinds: they appear in constraints
/// but never on stored dependency edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DependencyKind {
    Access,
    Declare,
    Create,
    Extend,
    Implement,
    Derive,
    UseAnnotation,
    Depend,
    Handle,
}

impl DependencyKind {
    pub const ALL: [DependencyKind; 9] = [
        DependencyKind::Access,
        DependencyKind::Declare,
        DependencyKind::Create,
        DependencyKind::Extend,
        DependencyKind::Implement,
        DependencyKind::Derive,
        DependencyKind::UseAnnotation,
        DependencyKind::Depend,
        DependencyKind::Handle,
    ];

    /// Kinds that may appear on a stored edge.
    pub fn is_concrete(self) -> bool {
        !matches!(self, DependencyKind::Depend | DependencyKind::Derive)
    }

    /// The DCL keyword for this kind.
    pub fn keyword(self) -> &'static str {
        match self {
            DependencyKind::Access => "access",
            DependencyKind::Declare => "declare",
            DependencyKind::Create => "create",
            DependencyKind::Extend => "extend",
            DependencyKind::Implement => "implement",
            DependencyKind::Derive => "derive",
            DependencyKind::UseAnnotation => "useannotation",
            DependencyKind::Depend => "depend",
            DependencyKind::Handle => "handle",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        DependencyKind::ALL.iter().copied().find(|k| k.keyword() == word)
    }
}

impl fmt::Display for DependencyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// True if `id` names the prefix itself or lives below it. Prefixes may be
/// written with or without a trailing dot (`java.` and `java` are equivalent).
fn external_prefix_matches(prefix: &str, id: &str) -> bool {
    match prefix.strip_suffix('.') {
        Some(stripped) => id == stripped || id.starts_with(prefix),
        None => id == prefix || id.strip_prefix(prefix).is_some_and(|r| r.starts_with('.')),
    }
}

/// Fixed subsumption order over dependency kinds: `depend` covers everything,
/// `derive` covers `extend` and `implement`, every kind covers itself.
pub fn kind_subsumes(general: DependencyKind, concrete: DependencyKind) -> bool {
    general == concrete
        || general == DependencyKind::Depend
        || (general == DependencyKind::Derive
            && matches!(concrete, DependencyKind::Extend | DependencyKind::Implement))
}

/// A class, interface or annotation known to the database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypeEntity {
    /// Fully-qualified name, unique within a database.
    pub id: String,
    pub kind: TypeKind,
    /// Direct supertypes (extends + implements), no duplicates, never `id`.
    #[serde(default)]
    pub supertypes: Vec<String>,
    /// Annotation types directly applied to this type.
    #[serde(default)]
    pub annotations: Vec<String>,
    /// Present iff `kind == Annotation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation_target: Option<AnnotationTarget>,
    #[serde(default)]
    pub members: Vec<MemberSignature>,
    /// Where the type is declared, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<SourceLocation>,
}

impl TypeEntity {
    pub fn new(id: impl Into<String>, kind: TypeKind) -> Self {
        Self {
            id: id.into(),
            kind,
            supertypes: Vec::new(),
            annotations: Vec::new(),
            annotation_target: None,
            members: Vec::new(),
            location: None,
        }
    }

    pub fn location_or_unknown(&self) -> SourceLocation {
        self.location.clone().unwrap_or_else(SourceLocation::unknown)
    }
}

/// One typed edge of the dependency graph. `kind` is always concrete.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dependency {
    pub from: String,
    pub to: String,
    pub kind: DependencyKind,
    pub location: SourceLocation,
    /// Link to the declaration or creation site this edge was raised from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<String>,
}

/// A `B b;` site: where a variable or field of `declared_type` is introduced
/// inside `enclosing_type`, together with the members actually used through it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclarationSite {
    pub site_id: String,
    pub enclosing_type: String,
    pub declared_type: String,
    pub variable_name: String,
    #[serde(default)]
    pub used_members: Vec<MemberSignature>,
    pub location: SourceLocation,
}

/// A `new B(exp)` site inside `enclosing_type`, with the static types of the
/// constructor arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreationSite {
    pub site_id: String,
    pub enclosing_type: String,
    pub created_type: String,
    #[serde(default)]
    pub arg_types: Vec<String>,
    pub result_discarded: bool,
    pub location: SourceLocation,
}

/// Explicit module re-assignment of one type, produced by a Move Class
/// refactoring. Overrides pattern-based membership during module resolution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleOverride {
    pub type_id: String,
    pub module: String,
}

/// Serializable form of a facts database: exactly the facts file schema.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactsParts {
    pub facts_version: u32,
    #[serde(default)]
    pub types: Vec<TypeEntity>,
    #[serde(default)]
    pub dependencies: Vec<Dependency>,
    #[serde(default)]
    pub declaration_sites: Vec<DeclarationSite>,
    #[serde(default)]
    pub creation_sites: Vec<CreationSite>,
    /// Type-name prefixes treated as external to the analyzed system.
    #[serde(default)]
    pub externals: Vec<String>,
    /// Module membership overrides from applied Move Class refactorings.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub module_overrides: Vec<ModuleOverride>,
}

/// Errors raised while loading, validating or querying facts.
#[derive(Debug, Error)]
pub enum FactsError {
    #[error("unsupported facts_version {found} (expected {FACTS_VERSION})")]
    Version { found: u32 },
    #[error("duplicate type id `{id}`")]
    DuplicateType { id: String },
    #[error("type `{id}`: {message}")]
    InvalidType { id: String, message: String },
    #[error("dependency {from} --{kind}--> {to}: {message}")]
    InvalidDependency { from: String, kind: DependencyKind, to: String, message: String },
    #[error("site `{site_id}`: {message}")]
    InvalidSite { site_id: String, message: String },
    #[error("unknown type id `{id}`")]
    UnknownType { id: String },
    #[error("supertype cycle involving `{id}`")]
    Cycle { id: String },
    #[error("facts file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Immutable snapshot of everything extracted from a codebase.
///
/// Safe to share across threads; refactorings build a new snapshot instead of
/// mutating this one.
#[derive(Debug, Clone, PartialEq)]
pub struct FactsDatabase {
    parts: FactsParts,
    type_index: HashMap<String, usize>,
    decl_index: HashMap<String, usize>,
    creation_index: HashMap<String, usize>,
    /// External type ids actually referenced anywhere (or declared as stubs).
    known_externals: BTreeSet<String>,
    overrides: BTreeMap<String, String>,
}

impl FactsDatabase {
    /// An empty, valid database.
    pub fn empty() -> Self {
        Self::from_parts(FactsParts { facts_version: FACTS_VERSION, ..FactsParts::default() })
            .expect("empty database is valid")
            .0
    }

    /// Builds a database from raw parts, validating every invariant.
    ///
    /// Dependencies whose target neither resolves to a type nor matches a
    /// registered external prefix are dropped (with their paired site) and
    /// reported as warnings; every other inconsistency is an error.
    pub fn from_parts(parts: FactsParts) -> Result<(Self, Vec<String>), FactsError> {
        let mut parts = parts;
        if parts.facts_version != FACTS_VERSION {
            return Err(FactsError::Version { found: parts.facts_version });
        }

        parts.externals.sort();
        parts.externals.dedup();

        // Canonical ordering makes emit/load a structural identity and keeps
        // every downstream traversal deterministic.
        parts.types.sort_by(|a, b| a.id.cmp(&b.id));
        parts.dependencies.sort();
        parts.declaration_sites.sort_by(|a, b| a.site_id.cmp(&b.site_id));
        parts.creation_sites.sort_by(|a, b| a.site_id.cmp(&b.site_id));
        parts.module_overrides.sort_by(|a, b| a.type_id.cmp(&b.type_id));

        let mut type_index = HashMap::new();
        for (i, t) in parts.types.iter().enumerate() {
            if type_index.insert(t.id.clone(), i).is_some() {
                return Err(FactsError::DuplicateType { id: t.id.clone() });
            }
        }

        let is_external = |id: &str| -> bool {
            parts.externals.iter().any(|p| external_prefix_matches(p, id))
        };
        let resolves = |id: &str| -> bool { type_index.contains_key(id) || is_external(id) };

        let mut warnings = Vec::new();

        // Type-level invariants.
        for t in &parts.types {
            let mut seen = BTreeSet::new();
            for s in &t.supertypes {
                if s == &t.id {
                    return Err(FactsError::InvalidType {
                        id: t.id.clone(),
                        message: "type lists itself as a supertype".into(),
                    });
                }
                if !seen.insert(s.clone()) {
                    return Err(FactsError::InvalidType {
                        id: t.id.clone(),
                        message: format!("duplicate supertype `{s}`"),
                    });
                }
            }
            match (t.kind, t.annotation_target.is_some()) {
                (TypeKind::Annotation, false) => {
                    return Err(FactsError::InvalidType {
                        id: t.id.clone(),
                        message: "annotation type without annotation_target".into(),
                    })
                }
                (TypeKind::Class | TypeKind::Interface, true) => {
                    return Err(FactsError::InvalidType {
                        id: t.id.clone(),
                        message: "annotation_target on a non-annotation type".into(),
                    })
                }
                _ => {}
            }
            for m in &t.members {
                if m.arity != m.param_types.len() {
                    return Err(FactsError::InvalidType {
                        id: t.id.clone(),
                        message: format!("member `{}` arity {} does not match {} parameter types", m.name, m.arity, m.param_types.len()),
                    });
                }
                if m.member_kind == MemberKind::Field && m.arity != 0 {
                    return Err(FactsError::InvalidType {
                        id: t.id.clone(),
                        message: format!("field member `{}` with non-zero arity", m.name),
                    });
                }
            }
            for referenced in t.supertypes.iter().chain(t.annotations.iter()) {
                if !resolves(referenced) {
                    return Err(FactsError::InvalidType {
                        id: t.id.clone(),
                        message: format!("references unresolvable type `{referenced}`"),
                    });
                }
            }
        }

        // Drop dependencies (and their sites) with unresolvable targets.
        let mut dropped_sites: BTreeSet<String> = BTreeSet::new();
        let mut kept = Vec::with_capacity(parts.dependencies.len());
        for d in parts.dependencies.drain(..) {
            if !d.kind.is_concrete() {
                return Err(FactsError::InvalidDependency {
                    from: d.from,
                    kind: d.kind,
                    to: d.to,
                    message: "stored dependencies must use a concrete kind".into(),
                });
            }
            if !type_index.contains_key(&d.from) {
                return Err(FactsError::InvalidDependency {
                    from: d.from.clone(),
                    kind: d.kind,
                    to: d.to.clone(),
                    message: "origin type does not resolve".into(),
                });
            }
            if resolves(&d.to) {
                kept.push(d);
            } else {
                warnings.push(format!(
                    "dropped dependency {} --{}--> {} at {}: target does not resolve",
                    d.from, d.kind, d.to, d.location
                ));
                if let Some(site) = &d.site {
                    dropped_sites.insert(site.clone());
                }
            }
        }
        parts.dependencies = kept;
        parts.declaration_sites.retain(|s| {
            let drop = dropped_sites.contains(&s.site_id);
            if drop {
                warnings.push(format!("dropped declaration site `{}` of unresolvable target", s.site_id));
            }
            !drop
        });
        parts.creation_sites.retain(|s| {
            let drop = dropped_sites.contains(&s.site_id);
            if drop {
                warnings.push(format!("dropped creation site `{}` of unresolvable target", s.site_id));
            }
            !drop
        });

        let mut decl_index = HashMap::new();
        for (i, s) in parts.declaration_sites.iter().enumerate() {
            if decl_index.insert(s.site_id.clone(), i).is_some() {
                return Err(FactsError::InvalidSite { site_id: s.site_id.clone(), message: "duplicate site id".into() });
            }
        }
        let mut creation_index = HashMap::new();
        for (i, s) in parts.creation_sites.iter().enumerate() {
            if creation_index.insert(s.site_id.clone(), i).is_some() || decl_index.contains_key(&s.site_id) {
                return Err(FactsError::InvalidSite { site_id: s.site_id.clone(), message: "duplicate site id".into() });
            }
        }

        // Site <-> dependency pairing, both directions.
        let mut declare_sites_seen: BTreeSet<String> = BTreeSet::new();
        let mut create_sites_seen: BTreeSet<String> = BTreeSet::new();
        for d in &parts.dependencies {
            match d.kind {
                DependencyKind::Declare => {
                    let site_id = d.site.as_deref().ok_or_else(|| FactsError::InvalidDependency {
                        from: d.from.clone(),
                        kind: d.kind,
                        to: d.to.clone(),
                        message: "declare dependency without a declaration site".into(),
                    })?;
                    let site = decl_index
                        .get(site_id)
                        .map(|&i| &parts.declaration_sites[i])
                        .ok_or_else(|| FactsError::InvalidSite {
                            site_id: site_id.to_string(),
                            message: "declare dependency names a missing declaration site".into(),
                        })?;
                    if site.enclosing_type != d.from || site.declared_type != d.to {
                        return Err(FactsError::InvalidSite {
                            site_id: site_id.to_string(),
                            message: "declaration site disagrees with its declare dependency".into(),
                        });
                    }
                    declare_sites_seen.insert(site_id.to_string());
                }
                DependencyKind::Create => {
                    let site_id = d.site.as_deref().ok_or_else(|| FactsError::InvalidDependency {
                        from: d.from.clone(),
                        kind: d.kind,
                        to: d.to.clone(),
                        message: "create dependency without a creation site".into(),
                    })?;
                    let site = creation_index
                        .get(site_id)
                        .map(|&i| &parts.creation_sites[i])
                        .ok_or_else(|| FactsError::InvalidSite {
                            site_id: site_id.to_string(),
                            message: "create dependency names a missing creation site".into(),
                        })?;
                    if site.enclosing_type != d.from || site.created_type != d.to {
                        return Err(FactsError::InvalidSite {
                            site_id: site_id.to_string(),
                            message: "creation site disagrees with its create dependency".into(),
                        });
                    }
                    create_sites_seen.insert(site_id.to_string());
                }
                _ => {}
            }
        }
        for s in &parts.declaration_sites {
            if !declare_sites_seen.contains(&s.site_id) {
                return Err(FactsError::InvalidSite {
                    site_id: s.site_id.clone(),
                    message: "declaration site has no declare dependency".into(),
                });
            }
            if !type_index.contains_key(&s.enclosing_type) {
                return Err(FactsError::InvalidSite {
                    site_id: s.site_id.clone(),
                    message: format!("enclosing type `{}` does not resolve", s.enclosing_type),
                });
            }
            if !resolves(&s.declared_type) {
                return Err(FactsError::InvalidSite {
                    site_id: s.site_id.clone(),
                    message: format!("declared type `{}` does not resolve", s.declared_type),
                });
            }
        }
        for s in &parts.creation_sites {
            if !create_sites_seen.contains(&s.site_id) {
                return Err(FactsError::InvalidSite {
                    site_id: s.site_id.clone(),
                    message: "creation site has no create dependency".into(),
                });
            }
            if !type_index.contains_key(&s.enclosing_type) {
                return Err(FactsError::InvalidSite {
                    site_id: s.site_id.clone(),
                    message: format!("enclosing type `{}` does not resolve", s.enclosing_type),
                });
            }
            if !resolves(&s.created_type) {
                return Err(FactsError::InvalidSite {
                    site_id: s.site_id.clone(),
                    message: format!("created type `{}` does not resolve", s.created_type),
                });
            }
            // Constructor arity check: only verifiable for internal types
            // with recorded constructors; a type with none has the default
            // zero-argument constructor.
            if let Some(&ti) = type_index.get(&s.created_type) {
                let t = &parts.types[ti];
                let ctor_arities: Vec<usize> = t
                    .members
                    .iter()
                    .filter(|m| m.name == "<init>")
                    .map(|m| m.arity)
                    .collect();
                let ok = if ctor_arities.is_empty() {
                    s.arg_types.is_empty()
                } else {
                    ctor_arities.contains(&s.arg_types.len())
                };
                if !ok {
                    return Err(FactsError::InvalidSite {
                        site_id: s.site_id.clone(),
                        message: format!(
                            "no constructor of `{}` takes {} arguments",
                            s.created_type,
                            s.arg_types.len()
                        ),
                    });
                }
            }
        }

        // External universe: stubs declared under an external prefix plus
        // every referenced external id.
        let mut known_externals: BTreeSet<String> = BTreeSet::new();
        let mut referenced: Vec<&str> = Vec::new();
        for t in &parts.types {
            if is_external(&t.id) {
                known_externals.insert(t.id.clone());
            }
            referenced.extend(t.supertypes.iter().map(String::as_str));
            referenced.extend(t.annotations.iter().map(String::as_str));
            for m in &t.members {
                referenced.extend(m.param_types.iter().map(String::as_str));
                if let Some(r) = &m.return_type {
                    referenced.push(r);
                }
            }
        }
        for d in &parts.dependencies {
            referenced.push(&d.to);
        }
        for s in &parts.declaration_sites {
            referenced.push(&s.declared_type);
            for m in &s.used_members {
                referenced.extend(m.param_types.iter().map(String::as_str));
            }
        }
        for s in &parts.creation_sites {
            referenced.push(&s.created_type);
            referenced.extend(s.arg_types.iter().map(String::as_str));
        }
        for id in referenced {
            if is_external(id) && !type_index.contains_key(id) {
                known_externals.insert(id.to_string());
            }
        }

        let mut overrides = BTreeMap::new();
        for o in &parts.module_overrides {
            if !type_index.contains_key(&o.type_id) {
                return Err(FactsError::UnknownType { id: o.type_id.clone() });
            }
            overrides.insert(o.type_id.clone(), o.module.clone());
        }

        Ok((
            Self { parts, type_index, decl_index, creation_index, known_externals, overrides },
            warnings,
        ))
    }

    /// Parses and validates a facts JSON document (strict schema).
    pub fn load_json(text: &str) -> Result<(Self, Vec<String>), FactsError> {
        let parts: FactsParts = serde_json::from_str(text)?;
        Self::from_parts(parts)
    }

    pub fn load_path(path: &Path) -> Result<(Self, Vec<String>), FactsError> {
        let text = std::fs::read_to_string(path)?;
        Self::load_json(&text)
    }

    /// Canonical JSON rendering; `load_json(to_json(db))` reproduces `db`.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.parts).expect("facts serialize");
        s.push('\n');
        s
    }

    pub fn save_path(&self, path: &Path) -> Result<(), FactsError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Clone of the raw parts, the starting point for building an edited database.
    pub fn to_parts(&self) -> FactsParts {
        self.parts.clone()
    }

    /// Re-checks every invariant; used after refactoring applications.
    pub fn validate(&self) -> Result<(), FactsError> {
        let (_, warnings) = Self::from_parts(self.parts.clone())?;
        if let Some(w) = warnings.into_iter().next() {
            return Err(FactsError::InvalidSite { site_id: "<post-apply>".into(), message: w });
        }
        Ok(())
    }

    pub fn types(&self) -> &[TypeEntity] {
        &self.parts.types
    }

    pub fn type_entity(&self, id: &str) -> Option<&TypeEntity> {
        self.type_index.get(id).map(|&i| &self.parts.types[i])
    }

    pub fn dependencies(&self) -> &[Dependency] {
        &self.parts.dependencies
    }

    pub fn declaration_sites(&self) -> &[DeclarationSite] {
        &self.parts.declaration_sites
    }

    pub fn creation_sites(&self) -> &[CreationSite] {
        &self.parts.creation_sites
    }

    pub fn declaration_site(&self, site_id: &str) -> Option<&DeclarationSite> {
        self.decl_index.get(site_id).map(|&i| &self.parts.declaration_sites[i])
    }

    pub fn creation_site(&self, site_id: &str) -> Option<&CreationSite> {
        self.creation_index.get(site_id).map(|&i| &self.parts.creation_sites[i])
    }

    pub fn externals(&self) -> &[String] {
        &self.parts.externals
    }

    /// Module re-assignments applied by Move Class refactorings.
    pub fn module_overrides(&self) -> &BTreeMap<String, String> {
        &self.overrides
    }

    /// True if the id falls under a registered external prefix.
    pub fn is_external_id(&self, id: &str) -> bool {
        self.parts.externals.iter().any(|p| external_prefix_matches(p, id))
    }

    /// True if the id resolves to a type entity or is external.
    pub fn resolves(&self, id: &str) -> bool {
        self.type_index.contains_key(id) || self.is_external_id(id)
    }

    /// Ids of types belonging to the analyzed system itself.
    pub fn internal_type_ids(&self) -> impl Iterator<Item = &str> {
        self.parts.types.iter().filter(|t| !self.is_external_id(&t.id)).map(|t| t.id.as_str())
    }

    /// Every external type id the database knows about: declared stubs plus
    /// all referenced externals.
    pub fn external_type_ids(&self) -> &BTreeSet<String> {
        &self.known_externals
    }

    /// Transitive supertype closure, breadth-first from most-specific to
    /// least-specific, lexicographic within a depth level, excluding `type_id`.
    ///
    /// Ids that do not resolve to an entity (externals) are included as leaves.
    pub fn resolve_super(&self, type_id: &str) -> Result<Vec<String>, FactsError> {
        if !self.resolves(type_id) {
            return Err(FactsError::UnknownType { id: type_id.to_string() });
        }
        self.check_super_acyclic(type_id)?;

        let mut result = Vec::new();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        seen.insert(type_id);
        let mut level: Vec<&str> = vec![type_id];
        while !level.is_empty() {
            let mut next: Vec<&str> = Vec::new();
            for id in &level {
                if let Some(t) = self.type_entity(id) {
                    for s in &t.supertypes {
                        if seen.insert(s.as_str()) {
                            next.push(s.as_str());
                        }
                    }
                }
            }
            next.sort();
            result.extend(next.iter().map(|s| s.to_string()));
            level = next;
        }
        Ok(result)
    }

    fn check_super_acyclic(&self, start: &str) -> Result<(), FactsError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            Grey,
            Black,
        }
        let mut colors: HashMap<&str, Color> = HashMap::new();
        // Iterative DFS with an explicit enter/exit stack.
        let mut stack: Vec<(&str, bool)> = vec![(self.intern(start)?, false)];
        while let Some((id, exiting)) = stack.pop() {
            if exiting {
                colors.insert(id, Color::Black);
                continue;
            }
            match colors.get(id) {
                Some(Color::Grey) => return Err(FactsError::Cycle { id: id.to_string() }),
                Some(Color::Black) => continue,
                None => {}
            }
            colors.insert(id, Color::Grey);
            stack.push((id, true));
            if let Some(t) = self.type_entity(id) {
                for s in &t.supertypes {
                    match colors.get(s.as_str()) {
                        Some(Color::Grey) => return Err(FactsError::Cycle { id: s.clone() }),
                        Some(Color::Black) => {}
                        None => stack.push((s.as_str(), false)),
                    }
                }
            }
        }
        Ok(())
    }

    /// Returns a reference with the lifetime of the database for the given id.
    fn intern(&self, id: &str) -> Result<&str, FactsError> {
        if let Some(&i) = self.type_index.get(id) {
            return Ok(self.parts.types[i].id.as_str());
        }
        if self.is_external_id(id) {
            // Externals have no stored entity; borrow from the known set when
            // possible, otherwise the id has no supertypes anyway.
            if let Some(k) = self.known_externals.get(id) {
                return Ok(k.as_str());
            }
        }
        Err(FactsError::UnknownType { id: id.to_string() })
    }

    /// Members declared by `type_id` plus everything inherited from its
    /// supertype closure, deduplicated by full signature.
    pub fn provided_members(&self, type_id: &str) -> Result<BTreeSet<MemberSignature>, FactsError> {
        let mut members: BTreeSet<MemberSignature> = BTreeSet::new();
        if let Some(t) = self.type_entity(type_id) {
            members.extend(t.members.iter().cloned());
        } else if !self.is_external_id(type_id) {
            return Err(FactsError::UnknownType { id: type_id.to_string() });
        }
        for sup in self.resolve_super(type_id)? {
            if let Some(t) = self.type_entity(&sup) {
                members.extend(t.members.iter().cloned());
            }
        }
        Ok(members)
    }
}

/// Incremental construction of a [`FactsDatabase`]; `build` validates.
#[derive(Debug, Default, Clone)]
pub struct FactsBuilder {
    parts: FactsParts,
}

impl FactsBuilder {
    pub fn new() -> Self {
        Self { parts: FactsParts { facts_version: FACTS_VERSION, ..FactsParts::default() } }
    }

    pub fn push_type(&mut self, t: TypeEntity) -> &mut Self {
        self.parts.types.push(t);
        self
    }

    pub fn push_dependency(&mut self, d: Dependency) -> &mut Self {
        self.parts.dependencies.push(d);
        self
    }

    pub fn push_declaration_site(&mut self, s: DeclarationSite) -> &mut Self {
        self.parts.declaration_sites.push(s);
        self
    }

    pub fn push_creation_site(&mut self, s: CreationSite) -> &mut Self {
        self.parts.creation_sites.push(s);
        self
    }

    pub fn register_external(&mut self, prefix: impl Into<String>) -> &mut Self {
        self.parts.externals.push(prefix.into());
        self
    }

    pub fn build(self) -> Result<(FactsDatabase, Vec<String>), FactsError> {
        FactsDatabase::from_parts(self.parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(line: u32) -> SourceLocation {
        SourceLocation::new("T.java", line, 1)
    }

    fn class(id: &str, supers: &[&str]) -> TypeEntity {
        TypeEntity {
            supertypes: supers.iter().map(|s| s.to_string()).collect(),
            ..TypeEntity::new(id, TypeKind::Class)
        }
    }

    #[test]
    fn subsumption_table() {
        use DependencyKind::*;
        for k in DependencyKind::ALL {
            assert!(kind_subsumes(Depend, k), "depend subsumes {k}");
            assert!(kind_subsumes(k, k), "{k} subsumes itself");
        }
        assert!(kind_subsumes(Derive, Extend));
        assert!(kind_subsumes(Derive, Implement));
        assert!(!kind_subsumes(Derive, Access));
        assert!(!kind_subsumes(Create, Declare));
        assert!(kind_subsumes(Create, Create));
        // Antisymmetry: the only mutual subsumption is equality.
        for a in DependencyKind::ALL {
            for b in DependencyKind::ALL {
                if kind_subsumes(a, b) && kind_subsumes(b, a) {
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn super_closure_breadth_first_and_lexicographic() {
        let mut b = FactsBuilder::new();
        b.push_type(class("C", &["B"]));
        b.push_type({
            let mut t = class("B", &["I"]);
            t.kind = TypeKind::Class;
            t
        });
        b.push_type(TypeEntity::new("I", TypeKind::Interface));
        let (db, _) = b.build().unwrap();
        assert_eq!(db.resolve_super("C").unwrap(), vec!["B".to_string(), "I".to_string()]);
        assert!(db.resolve_super("I").unwrap().is_empty());

        let mut b = FactsBuilder::new();
        b.push_type(class("C", &["I2", "I1"]));
        b.push_type(TypeEntity::new("I1", TypeKind::Interface));
        b.push_type(TypeEntity::new("I2", TypeKind::Interface));
        let (db, _) = b.build().unwrap();
        assert_eq!(db.resolve_super("C").unwrap(), vec!["I1".to_string(), "I2".to_string()]);
    }

    #[test]
    fn super_cycle_detected() {
        let mut b = FactsBuilder::new();
        b.push_type(class("A", &["B"]));
        b.push_type(class("B", &["C"]));
        b.push_type(class("C", &["B"]));
        let (db, _) = b.build().unwrap();
        assert!(matches!(db.resolve_super("A"), Err(FactsError::Cycle { .. })));
    }

    #[test]
    fn provided_members_unions_and_dedups() {
        let m = MemberSignature::method("save", vec!["P".into()], None);
        let mut b = FactsBuilder::new();
        b.push_type(class("P", &[]));
        b.push_type({
            let mut t = TypeEntity::new("I", TypeKind::Interface);
            t.members.push(m.clone());
            t
        });
        b.push_type({
            let mut t = TypeEntity::new("J", TypeKind::Interface);
            t.members.push(m.clone());
            t
        });
        b.push_type(class("C", &["I", "J"]));
        let (db, _) = b.build().unwrap();
        let provided = db.provided_members("C").unwrap();
        assert_eq!(provided.len(), 1);
        assert!(provided.contains(&m));
    }

    #[test]
    fn unresolvable_dependency_target_dropped_with_warning() {
        let mut b = FactsBuilder::new();
        b.push_type(class("A", &[]));
        b.push_dependency(Dependency {
            from: "A".into(),
            to: "Ghost".into(),
            kind: DependencyKind::Access,
            location: loc(3),
            site: None,
        });
        let (db, warnings) = b.build().unwrap();
        assert!(db.dependencies().is_empty());
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("Ghost"));
    }

    #[test]
    fn declare_dependency_requires_site() {
        let mut b = FactsBuilder::new();
        b.push_type(class("A", &[]));
        b.push_type(class("B", &[]));
        b.push_dependency(Dependency {
            from: "A".into(),
            to: "B".into(),
            kind: DependencyKind::Declare,
            location: loc(3),
            site: None,
        });
        assert!(b.build().is_err());
    }

    #[test]
    fn strict_schema_rejects_unknown_fields() {
        let text = r#"{"facts_version":1,"types":[],"dependencies":[],"declaration_sites":[],"creation_sites":[],"externals":[],"bogus":[]}"#;
        assert!(FactsDatabase::load_json(text).is_err());
    }

    #[test]
    fn version_is_mandatory_and_checked() {
        assert!(FactsDatabase::load_json(r#"{"types":[]}"#).is_err());
        assert!(matches!(
            FactsDatabase::load_json(r#"{"facts_version":2}"#),
            Err(FactsError::Version { found: 2 })
        ));
    }

    #[test]
    fn json_round_trip_identity() {
        let mut b = FactsBuilder::new();
        b.register_external("java.");
        b.push_type(class("com.app.A", &["java.io.Serializable"]));
        b.push_dependency(Dependency {
            from: "com.app.A".into(),
            to: "java.io.Serializable".into(),
            kind: DependencyKind::Implement,
            location: loc(1),
            site: None,
        });
        let (db, _) = b.build().unwrap();
        let (reloaded, warnings) = FactsDatabase::load_json(&db.to_json()).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(db, reloaded);
        assert!(reloaded.external_type_ids().contains("java.io.Serializable"));
    }
}
