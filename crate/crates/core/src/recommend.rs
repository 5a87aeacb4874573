//! The recommendation engine: maps each violation to concrete refactoring
//! recommendations with verified preconditions, plus the auxiliary functions
//! the rule preconditions are built from (member-coverage type checking,
//! factory search, module similarity).

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::apply;
use crate::checker::{can_inner, check, Resolver, Violation, ViolationFlavor};
use crate::dcl::{Constraint, ConstraintSet, DclError, Modality};
use crate::facts::{
    DeclarationSite, DependencyKind, FactsDatabase, FactsError, MemberSignature, TypeKind,
};

/// Identifier of a refactoring rule from the recommendation catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    D1,
    D11,
    D12,
    A3,
    A4,
    A6,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One module's similarity score against a subject type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleScore {
    pub module: String,
    pub score: f64,
}

/// Per-module Jaccard scores backing a `suitable_module` decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub subject: String,
    /// Sorted descending; the winner is first.
    pub scores: Vec<ModuleScore>,
    pub winner: String,
    pub runner_up_gap: f64,
}

/// Rule-specific parameters of a recommendation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bindings {
    D1 {
        chosen_supertype: String,
        site_id: String,
        /// Further admissible supertypes, most-specific first.
        alternatives: Vec<String>,
    },
    D11 {
        factory: String,
        method: MemberSignature,
        site_id: String,
    },
    D12 {
        site_id: String,
    },
    A3 {
        supertype: String,
        edge_kind: DependencyKind,
    },
    A4 {
        target_module: String,
    },
    A6 {
        annotation: String,
    },
}

/// A verified refactoring proposal for one violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub rule: RuleId,
    pub violation: Violation,
    pub bindings: Bindings,
    pub rationale: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub similarity: Option<SimilarityReport>,
}

/// Result of evaluating the rule catalog against one violation: the verified
/// recommendations (possibly empty) plus one diagnostic per rule that did not
/// fire, explaining which precondition failed.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RecommendOutcome {
    pub recommendations: Vec<Recommendation>,
    pub diagnostics: Vec<String>,
}

/// Tunables for the engine.
#[derive(Debug, Clone, Copy)]
pub struct RecommendConfig {
    /// Minimum Jaccard advantage of the winning module over the violated
    /// constraint's origin module before a Move Class is proposed.
    pub gap_threshold: f64,
}

impl Default for RecommendConfig {
    fn default() -> Self {
        Self { gap_threshold: 0.1 }
    }
}

#[derive(Debug, Error)]
pub enum RecommendError {
    #[error("no modules defined: the similarity function needs at least one")]
    NoModules,
    #[error("violation references unknown constraint `{id}`")]
    UnknownConstraint { id: String },
    #[error(transparent)]
    Dcl(#[from] DclError),
    #[error(transparent)]
    Facts(#[from] FactsError),
}

/// Distinct dependency targets of a type, excluding the type itself.
pub fn dependency_set(db: &FactsDatabase, type_id: &str) -> BTreeSet<String> {
    db.dependencies()
        .iter()
        .filter(|d| d.from == type_id && d.to != type_id)
        .map(|d| d.to.clone())
        .collect()
}

/// Jaccard similarity coefficient; two empty sets score 0.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    inter / union
}

/// The module whose aggregate dependency set is most similar to the type's
/// own, with the full score table for explainability.
///
/// Ties go to a module the type currently belongs to, then to the
/// lexicographically smallest name.
pub fn suitable_module(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    type_id: &str,
) -> Result<SimilarityReport, RecommendError> {
    let resolver = Resolver::new(db, cs);
    suitable_module_inner(&resolver, type_id)
}

fn suitable_module_inner(
    resolver: &Resolver<'_>,
    type_id: &str,
) -> Result<SimilarityReport, RecommendError> {
    let module_names: Vec<String> =
        resolver.cs.defined_module_names().map(str::to_string).collect();
    if module_names.is_empty() {
        return Err(RecommendError::NoModules);
    }
    let subject_deps = dependency_set(resolver.db, type_id);
    let mut scores = Vec::with_capacity(module_names.len());
    let mut home_modules: BTreeSet<String> = BTreeSet::new();
    for name in &module_names {
        let members = resolver.set(name)?;
        if members.contains(type_id) {
            home_modules.insert(name.clone());
        }
        let mut module_deps: BTreeSet<String> = BTreeSet::new();
        for member in members.iter().filter(|m| m.as_str() != type_id) {
            module_deps.extend(dependency_set(resolver.db, member));
        }
        scores.push(ModuleScore { module: name.clone(), score: jaccard(&subject_deps, &module_deps) });
    }
    scores.sort_by(|a, b| {
        b.score.partial_cmp(&a.score).expect("scores are finite").then_with(|| a.module.cmp(&b.module))
    });
    let max = scores[0].score;
    let winner = scores
        .iter()
        .filter(|s| s.score == max && home_modules.contains(&s.module))
        .map(|s| s.module.clone())
        .next()
        .unwrap_or_else(|| scores[0].module.clone());
    if let Some(pos) = scores.iter().position(|s| s.module == winner) {
        let w = scores.remove(pos);
        scores.insert(0, w);
    }
    let runner_up_gap = if scores.len() > 1 { scores[0].score - scores[1].score } else { 0.0 };
    Ok(SimilarityReport { subject: type_id.to_string(), scores, winner, runner_up_gap })
}

/// True iff `candidate` provides every member the site actually uses
/// (matched on name, arity, parameter types and member kind).
pub fn typecheck_substitution(db: &FactsDatabase, site: &DeclarationSite, candidate: &str) -> bool {
    let Ok(provided) = db.provided_members(candidate) else {
        return false;
    };
    site.used_members.iter().all(|u| provided.iter().any(|m| m.matches_usage(u)))
}

/// Searches for a factory: a type with a static method returning `created`
/// (or a supertype of it) whose parameters accept `arg_types` position-wise,
/// and which itself constructs `created`.
///
/// Candidates are ranked: exact return type first, then shortest type name,
/// then lexicographic.
pub fn find_factory(
    db: &FactsDatabase,
    created: &str,
    arg_types: &[String],
) -> Option<(String, MemberSignature)> {
    let created_supers: BTreeSet<String> = db.resolve_super(created).ok()?.into_iter().collect();
    let accepts = |param: &str, arg: &str| -> bool {
        if arg == "null" || param == arg {
            return true;
        }
        db.resolve_super(arg).map(|s| s.iter().any(|x| x == param)).unwrap_or(false)
    };
    let mut candidates: Vec<(bool, usize, String, MemberSignature)> = Vec::new();
    for t in db.types() {
        let constructs = db
            .dependencies()
            .iter()
            .any(|d| d.from == t.id && d.kind == DependencyKind::Create && d.to == created);
        if !constructs {
            continue;
        }
        for m in &t.members {
            if m.member_kind != crate::facts::MemberKind::Method || !m.is_static {
                continue;
            }
            let Some(ret) = &m.return_type else { continue };
            let exact = ret == created;
            if !exact && !created_supers.contains(ret) {
                continue;
            }
            if m.arity != arg_types.len()
                || !m.param_types.iter().zip(arg_types).all(|(p, a)| accepts(p, a))
            {
                continue;
            }
            candidates.push((exact, t.id.len(), t.id.clone(), m.clone()));
        }
    }
    candidates.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.name.cmp(&b.3.name))
            .then(a.3.param_types.cmp(&b.3.param_types))
    });
    candidates.into_iter().next().map(|(_, _, id, m)| (id, m))
}

/// Modules from which a create dependency on `target` would violate nothing.
/// An empty result means creation is globally forbidden.
pub fn allowed_creator_modules(
    cs: &ConstraintSet,
    db: &FactsDatabase,
    target: &str,
) -> Result<BTreeSet<String>, DclError> {
    let resolver = Resolver::new(db, cs);
    allowed_creator_modules_inner(&resolver, target)
}

fn allowed_creator_modules_inner(
    resolver: &Resolver<'_>,
    target: &str,
) -> Result<BTreeSet<String>, DclError> {
    let mut allowed = BTreeSet::new();
    let names: Vec<String> = resolver.cs.defined_module_names().map(str::to_string).collect();
    for name in names {
        let members = resolver.set(&name)?;
        let ok = if members.is_empty() {
            // No concrete representative: judge a hypothetical fresh member,
            // which would belong to this module and to the system.
            hypothetical_member_can_create(resolver, &name, target)?
        } else {
            let mut any = false;
            for member in members.iter() {
                if can_inner(resolver, member, DependencyKind::Create, target)? {
                    any = true;
                    break;
                }
            }
            any
        };
        if ok {
            allowed.insert(name);
        }
    }
    Ok(allowed)
}

fn hypothetical_member_can_create(
    resolver: &Resolver<'_>,
    module: &str,
    target: &str,
) -> Result<bool, DclError> {
    let rep_in = |name: &str| name == module || name == "$system";
    for c in &resolver.cs.constraints {
        if !crate::facts::kind_subsumes(c.kind, DependencyKind::Create) {
            continue;
        }
        let target_hit = resolver.targets(c)?.contains(target);
        let blocked = match c.modality {
            Modality::Cannot => rep_in(&c.origin) && target_hit,
            Modality::OnlyCan => !rep_in(&c.origin) && target_hit,
            Modality::CanOnly => {
                rep_in(&c.origin) && !target_hit && !resolver.set(&c.origin)?.contains(target)
            }
            Modality::Must => false,
        };
        if blocked {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Evaluates the rule catalog against one violation and returns every
/// recommendation whose preconditions hold, most-specific first. Each
/// candidate is verified to remove the violation without introducing a new
/// one before being returned; rules that do not fire leave a diagnostic.
pub fn recommend(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    v: &Violation,
) -> Result<RecommendOutcome, RecommendError> {
    recommend_with(db, cs, v, &RecommendConfig::default())
}

pub fn recommend_with(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    v: &Violation,
    config: &RecommendConfig,
) -> Result<RecommendOutcome, RecommendError> {
    let constraint = cs
        .constraint(&v.constraint_id)
        .ok_or_else(|| RecommendError::UnknownConstraint { id: v.constraint_id.clone() })?;
    let resolver = Resolver::new(db, cs);
    let mut outcome = RecommendOutcome::default();
    let push = |candidate: Result<Recommendation, String>, outcome: &mut RecommendOutcome| {
        match candidate {
            Ok(rec) => match verified_cleanly(db, cs, v, &rec) {
                Ok(true) => outcome.recommendations.push(rec),
                Ok(false) => outcome.diagnostics.push(format!(
                    "{}: would not cleanly remove the violation (hypothetical re-check found leftovers or new violations)",
                    rec.rule
                )),
                Err(e) => outcome.diagnostics.push(format!("{}: hypothetical application failed: {e}", rec.rule)),
            },
            Err(diag) => outcome.diagnostics.push(diag),
        }
    };

    match v.flavor {
        ViolationFlavor::Divergence => {
            push(try_d1(&resolver, constraint, v), &mut outcome);
            let d12_holds = match try_d12_precondition(&resolver, v) {
                Ok(flag) => flag,
                Err(e) => return Err(e.into()),
            };
            push(try_d11(&resolver, constraint, v, d12_holds), &mut outcome);
            push(try_d12(&resolver, constraint, v, d12_holds), &mut outcome);
        }
        ViolationFlavor::Absence => {
            let report = match suitable_module_inner(&resolver, &v.offender) {
                Ok(r) => Some(r),
                Err(RecommendError::NoModules) => None,
                Err(e) => return Err(e),
            };
            match &report {
                Some(report) => {
                    push(try_a3(&resolver, constraint, v, report), &mut outcome);
                    push(try_a6(&resolver, constraint, v, report), &mut outcome);
                    push(try_a4(constraint, v, report, config), &mut outcome);
                }
                None => outcome.diagnostics.push(
                    "A3/A4/A6: no modules defined, the suitable-module similarity cannot be computed"
                        .to_string(),
                ),
            }
        }
    }
    Ok(outcome)
}

/// Applies `rec` hypothetically and re-checks: the triggering violation must
/// disappear and no violation absent before may appear after.
fn verified_cleanly(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    v: &Violation,
    rec: &Recommendation,
) -> Result<bool, RecommendError> {
    let before = check(db, cs)?;
    let after_db = match apply::transform(db, rec) {
        Ok((new_db, _plan)) => new_db,
        Err(_) => return Ok(false),
    };
    let after = check(&after_db, cs)?;
    Ok(crate::checker::recheck_delta_ok(&before, &after, v))
}

fn divergence_modality(c: &Constraint) -> bool {
    matches!(c.modality, Modality::Cannot | Modality::OnlyCan | Modality::CanOnly)
}

fn try_d1(
    resolver: &Resolver<'_>,
    c: &Constraint,
    v: &Violation,
) -> Result<Recommendation, String> {
    if !divergence_modality(c) {
        return Err("D1: only divergences of cannot/only-can/can-only constraints qualify".into());
    }
    if v.kind != DependencyKind::Declare {
        return Err(format!("D1: requires a declare-kind dependency, found {}", v.kind));
    }
    let site_id = v.site.as_deref().ok_or("D1: violation carries no declaration site")?;
    let site = resolver
        .db
        .declaration_site(site_id)
        .ok_or_else(|| format!("D1: declaration site `{site_id}` not found"))?;
    let declared = site.declared_type.clone();
    let forbidden = resolver.targets(c).map_err(|e| format!("D1: {e}"))?;
    let supers = resolver
        .db
        .resolve_super(&declared)
        .map_err(|e| format!("D1: supertype closure of `{declared}` unavailable: {e}"))?;
    if supers.is_empty() {
        return Err(format!("D1: `{declared}` has no supertypes to retreat to"));
    }
    let mut admissible = Vec::new();
    let mut failures = Vec::new();
    for candidate in &supers {
        if forbidden.contains(candidate) {
            failures.push(format!("`{candidate}` is inside the constrained module"));
            continue;
        }
        if matches!(c.modality, Modality::OnlyCan | Modality::CanOnly)
            && !can_inner(resolver, &v.offender, DependencyKind::Declare, candidate)
                .map_err(|e| format!("D1: {e}"))?
        {
            failures.push(format!("declaring `{candidate}` would still violate a constraint"));
            continue;
        }
        if !typecheck_substitution(resolver.db, site, candidate) {
            failures.push(format!("`{candidate}` lacks used members"));
            continue;
        }
        admissible.push(candidate.clone());
    }
    let Some(primary) = admissible.first().cloned() else {
        return Err(format!("D1: no admissible supertype of `{declared}`: {}", failures.join("; ")));
    };
    let rationale = format!(
        "declared type `{}` can be replaced by its supertype `{}`: it provides all {} used member(s) of variable `{}` and is not covered by constraint {}",
        declared,
        primary,
        site.used_members.len(),
        site.variable_name,
        c.id
    );
    Ok(Recommendation {
        rule: RuleId::D1,
        violation: v.clone(),
        bindings: Bindings::D1 {
            chosen_supertype: primary,
            site_id: site_id.to_string(),
            alternatives: admissible[1..].to_vec(),
        },
        rationale,
        similarity: None,
    })
}

fn try_d12_precondition(resolver: &Resolver<'_>, v: &Violation) -> Result<bool, DclError> {
    if v.kind != DependencyKind::Create {
        return Ok(false);
    }
    Ok(allowed_creator_modules_inner(resolver, &v.counterpart)?.is_empty())
}

fn try_d11(
    resolver: &Resolver<'_>,
    c: &Constraint,
    v: &Violation,
    d12_holds: bool,
) -> Result<Recommendation, String> {
    if !matches!(c.modality, Modality::Cannot | Modality::OnlyCan) {
        return Err("D11: only divergences of cannot/only-can constraints qualify".into());
    }
    if v.kind != DependencyKind::Create {
        return Err(format!("D11: requires a create-kind dependency, found {}", v.kind));
    }
    if d12_holds {
        return Err("D11: creation is globally forbidden, a factory could not create it either (D12 applies)".into());
    }
    let site_id = v.site.as_deref().ok_or("D11: violation carries no creation site")?;
    let site = resolver
        .db
        .creation_site(site_id)
        .ok_or_else(|| format!("D11: creation site `{site_id}` not found"))?;
    let Some((factory, method)) = find_factory(resolver.db, &site.created_type, &site.arg_types)
    else {
        return Err(format!(
            "D11: no factory found: no type with a static creator for `{}` accepting {} argument(s) also constructs it",
            site.created_type,
            site.arg_types.len()
        ));
    };
    let permitted = can_inner(resolver, &v.offender, DependencyKind::Access, &factory)
        .map_err(|e| format!("D11: {e}"))?;
    if !permitted {
        return Err(format!("D11: factory `{factory}` found, but `{}` may not access it", v.offender));
    }
    let rationale = format!(
        "replace `new {}({})` with `{}.{}({})`: the factory already constructs the type and accessing it violates nothing",
        simple_name(&site.created_type),
        ellipsis(site.arg_types.len()),
        simple_name(&factory),
        method.name,
        ellipsis(site.arg_types.len()),
    );
    Ok(Recommendation {
        rule: RuleId::D11,
        violation: v.clone(),
        bindings: Bindings::D11 { factory, method, site_id: site_id.to_string() },
        rationale,
        similarity: None,
    })
}

fn try_d12(
    resolver: &Resolver<'_>,
    c: &Constraint,
    v: &Violation,
    d12_holds: bool,
) -> Result<Recommendation, String> {
    if !matches!(c.modality, Modality::Cannot | Modality::OnlyCan) {
        return Err("D12: only divergences of cannot/only-can constraints qualify".into());
    }
    if v.kind != DependencyKind::Create {
        return Err(format!("D12: requires a create-kind dependency, found {}", v.kind));
    }
    if !d12_holds {
        return Err(
            "D12: some module is still permitted to create the type, removal is not justified".into()
        );
    }
    let site_id = v.site.as_deref().ok_or("D12: violation carries no creation site")?;
    let site = resolver
        .db
        .creation_site(site_id)
        .ok_or_else(|| format!("D12: creation site `{site_id}` not found"))?;
    let rationale = format!(
        "no module of the system may create `{}`; {} the instantiation",
        site.created_type,
        if site.result_discarded { "remove" } else { "null out" }
    );
    Ok(Recommendation {
        rule: RuleId::D12,
        violation: v.clone(),
        bindings: Bindings::D12 { site_id: site_id.to_string() },
        rationale,
        similarity: None,
    })
}

/// Resolves a must-constraint target to the single concrete type it denotes.
fn single_target_type(
    resolver: &Resolver<'_>,
    c: &Constraint,
    rule: RuleId,
) -> Result<String, String> {
    let set = resolver.set(&c.targets[0]).map_err(|e| format!("{rule}: {e}"))?;
    if set.len() != 1 {
        return Err(format!(
            "{rule}: target `{}` denotes {} types, need exactly one",
            c.targets[0],
            set.len()
        ));
    }
    Ok(set.iter().next().unwrap().clone())
}

fn try_a3(
    resolver: &Resolver<'_>,
    c: &Constraint,
    v: &Violation,
    report: &SimilarityReport,
) -> Result<Recommendation, String> {
    if !matches!(
        v.kind,
        DependencyKind::Derive | DependencyKind::Implement | DependencyKind::Extend
    ) {
        return Err(format!("A3: requires a derive/implement/extend requirement, found {}", v.kind));
    }
    if report.winner != c.origin {
        return Err(format!(
            "A3: `{}` fits module `{}` better than its constrained module `{}`",
            v.offender, report.winner, c.origin
        ));
    }
    let supertype = single_target_type(resolver, c, RuleId::A3)?;
    let subject = resolver
        .db
        .type_entity(&v.offender)
        .ok_or_else(|| format!("A3: `{}` has no type entity", v.offender))?;
    if supertype == subject.id {
        return Err("A3: a type cannot derive itself".into());
    }
    if let Ok(supers) = resolver.db.resolve_super(&supertype) {
        if supers.iter().any(|s| s == &subject.id) {
            return Err(format!(
                "A3: adding `{supertype}` would create an inheritance cycle through `{}`",
                subject.id
            ));
        }
    }
    // Pick the concrete edge keyword and check declaration-level consistency;
    // an opaque external target is assumed to be a valid supertype.
    let target_kind = resolver.db.type_entity(&supertype).map(|t| t.kind);
    let edge_kind = match (v.kind, target_kind) {
        (_, Some(TypeKind::Annotation)) => {
            return Err(format!("A3: `{supertype}` is an annotation, not a derivable type"))
        }
        (DependencyKind::Implement, Some(TypeKind::Class)) => {
            return Err(format!("A3: `{supertype}` is a class, it cannot be implemented"))
        }
        (DependencyKind::Implement, _) if subject.kind != TypeKind::Class => {
            return Err(format!("A3: `{}` is not a class, it cannot implement", subject.id))
        }
        (DependencyKind::Implement, _) => DependencyKind::Implement,
        (DependencyKind::Extend, Some(TypeKind::Interface)) if subject.kind == TypeKind::Class => {
            return Err(format!("A3: class `{}` cannot extend interface `{supertype}`", subject.id))
        }
        (DependencyKind::Extend, Some(TypeKind::Class)) if subject.kind != TypeKind::Class => {
            return Err(format!("A3: `{}` cannot extend class `{supertype}`", subject.id))
        }
        (DependencyKind::Extend, _) => DependencyKind::Extend,
        (DependencyKind::Derive, Some(TypeKind::Interface)) if subject.kind == TypeKind::Class => {
            DependencyKind::Implement
        }
        (DependencyKind::Derive, Some(_)) => DependencyKind::Extend,
        (DependencyKind::Derive, None) if subject.kind == TypeKind::Class => DependencyKind::Implement,
        (DependencyKind::Derive, None) => DependencyKind::Extend,
        _ => unreachable!("kind filtered above"),
    };
    let rationale = format!(
        "`{}` is well placed in `{}` (score {:.3}); add `{} {}` to satisfy constraint {}",
        v.offender,
        report.winner,
        report.scores[0].score,
        keyword_for(edge_kind),
        simple_name(&supertype),
        c.id
    );
    Ok(Recommendation {
        rule: RuleId::A3,
        violation: v.clone(),
        bindings: Bindings::A3 { supertype, edge_kind },
        rationale,
        similarity: Some(report.clone()),
    })
}

fn try_a6(
    resolver: &Resolver<'_>,
    c: &Constraint,
    v: &Violation,
    report: &SimilarityReport,
) -> Result<Recommendation, String> {
    if v.kind != DependencyKind::UseAnnotation {
        return Err(format!("A6: requires a useannotation requirement, found {}", v.kind));
    }
    if report.winner != c.origin {
        return Err(format!(
            "A6: `{}` fits module `{}` better than its constrained module `{}`",
            v.offender, report.winner, c.origin
        ));
    }
    let annotation = single_target_type(resolver, c, RuleId::A6)?;
    let entity = resolver
        .db
        .type_entity(&annotation)
        .ok_or_else(|| format!("A6: `{annotation}` does not resolve to a declared annotation type"))?;
    if entity.kind != TypeKind::Annotation {
        return Err(format!("A6: `{annotation}` is not an annotation type"));
    }
    if entity.annotation_target != Some(crate::facts::AnnotationTarget::Type) {
        return Err(format!(
            "A6: `{annotation}` does not target type declarations (target is {:?})",
            entity.annotation_target
        ));
    }
    let rationale = format!(
        "`{}` is well placed in `{}` (score {:.3}); annotate it with `@{}` to satisfy constraint {}",
        v.offender,
        report.winner,
        report.scores[0].score,
        simple_name(&annotation),
        c.id
    );
    Ok(Recommendation {
        rule: RuleId::A6,
        violation: v.clone(),
        bindings: Bindings::A6 { annotation },
        rationale,
        similarity: Some(report.clone()),
    })
}

fn try_a4(
    c: &Constraint,
    v: &Violation,
    report: &SimilarityReport,
    config: &RecommendConfig,
) -> Result<Recommendation, String> {
    if report.winner == c.origin {
        return Err(format!("A4: `{}` already fits its constrained module `{}` best", v.offender, c.origin));
    }
    let Some(origin_score) = report.scores.iter().find(|s| s.module == c.origin) else {
        return Err(format!(
            "A4: constrained module `{}` is not a defined module, nothing to move out of",
            c.origin
        ));
    };
    let winner_score = report.scores[0].score;
    let gap = winner_score - origin_score.score;
    if gap < config.gap_threshold {
        return Err(format!(
            "A4: winning gap {:.3} over `{}` is below the {:.3} threshold",
            gap, c.origin, config.gap_threshold
        ));
    }
    let rationale = format!(
        "`{}` fits module `{}` (score {:.3}) better than its constrained module `{}` (score {:.3}, gap {:.3}); move it there",
        v.offender, report.winner, winner_score, c.origin, origin_score.score, gap
    );
    Ok(Recommendation {
        rule: RuleId::A4,
        violation: v.clone(),
        bindings: Bindings::A4 { target_module: report.winner.clone() },
        rationale,
        similarity: Some(report.clone()),
    })
}

fn simple_name(id: &str) -> &str {
    id.rsplit('.').next().unwrap_or(id)
}

fn ellipsis(arity: usize) -> &'static str {
    if arity == 0 {
        ""
    } else {
        "…"
    }
}

fn keyword_for(kind: DependencyKind) -> &'static str {
    match kind {
        DependencyKind::Implement => "implements",
        DependencyKind::Extend => "extends",
        other => other.keyword(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::{
        CreationSite, Dependency, FactsBuilder, SourceLocation, TypeEntity,
    };

    fn loc(line: u32) -> SourceLocation {
        SourceLocation::new("f.java", line, 1)
    }

    fn dep(from: &str, kind: DependencyKind, to: &str, line: u32) -> Dependency {
        Dependency { from: from.into(), to: to.into(), kind, location: loc(line), site: None }
    }

    #[test]
    fn dependency_set_dedups_and_excludes_self() {
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("A", TypeKind::Class));
        b.push_type(TypeEntity::new("B", TypeKind::Class));
        b.push_type(TypeEntity::new("C", TypeKind::Class));
        b.push_dependency(dep("A", DependencyKind::Access, "B", 1));
        b.push_dependency(dep("A", DependencyKind::Access, "B", 2));
        b.push_dependency(dep("A", DependencyKind::Handle, "C", 3));
        b.push_dependency(dep("A", DependencyKind::Access, "A", 4));
        let db = b.build().unwrap().0;
        let set = dependency_set(&db, "A");
        assert_eq!(set, BTreeSet::from(["B".to_string(), "C".to_string()]));
        assert!(dependency_set(&db, "B").is_empty());
    }

    #[test]
    fn jaccard_matches_hand_computation() {
        let s = |items: &[&str]| items.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        assert_eq!(jaccard(&s(&[]), &s(&[])), 0.0);
        assert_eq!(jaccard(&s(&["a"]), &s(&["a"])), 1.0);
        assert_eq!(jaccard(&s(&["a", "b", "c"]), &s(&["b", "c", "d"])), 0.5);
        assert_eq!(jaccard(&s(&["a"]), &s(&["b"])), 0.0);
    }

    #[test]
    fn suitable_module_prefers_profile_match_and_reports_scores() {
        // Subject depends on {b, c}; M1's aggregate is {b, c, d}; M2's is {a}.
        let mut b = FactsBuilder::new();
        for id in ["S", "m1.X", "m2.Y", "a", "b", "c", "d"] {
            b.push_type(TypeEntity::new(id, TypeKind::Class));
        }
        b.push_dependency(dep("S", DependencyKind::Access, "b", 1));
        b.push_dependency(dep("S", DependencyKind::Access, "c", 2));
        b.push_dependency(dep("m1.X", DependencyKind::Access, "b", 1));
        b.push_dependency(dep("m1.X", DependencyKind::Access, "c", 2));
        b.push_dependency(dep("m1.X", DependencyKind::Access, "d", 3));
        b.push_dependency(dep("m2.Y", DependencyKind::Access, "a", 1));
        let db = b.build().unwrap().0;
        let cs = crate::dcl::parse_dcl("module M1: m1.**\nmodule M2: m2.**\n").unwrap();
        let report = suitable_module(&db, &cs, "S").unwrap();
        assert_eq!(report.winner, "M1");
        assert_eq!(report.scores[0].score, 2.0 / 3.0);
        assert_eq!(report.scores[1].score, 0.0);
        assert!(report.runner_up_gap > 0.6);
    }

    #[test]
    fn suitable_module_tie_prefers_home_module() {
        let mut b = FactsBuilder::new();
        for id in ["zeta.S", "alpha.X", "t"] {
            b.push_type(TypeEntity::new(id, TypeKind::Class));
        }
        b.push_dependency(dep("zeta.S", DependencyKind::Access, "t", 1));
        b.push_dependency(dep("alpha.X", DependencyKind::Access, "t", 1));
        let db = b.build().unwrap().0;
        // Both modules aggregate to {t}: tie at J = 1. Home module wins even
        // though `Alpha` sorts first.
        let cs = crate::dcl::parse_dcl("module Alpha: alpha.**\nmodule Zeta: zeta.**, alpha.**\n").unwrap();
        let report = suitable_module(&db, &cs, "zeta.S").unwrap();
        assert_eq!(report.winner, "Zeta");
        assert_eq!(report.scores[0].module, "Zeta");
        assert!(matches!(
            suitable_module(&db, &ConstraintSet::default(), "zeta.S"),
            Err(RecommendError::NoModules)
        ));
    }

    #[test]
    fn typecheck_substitution_checks_member_coverage() {
        let save = MemberSignature::method("save", vec!["P".into()], None);
        let flush = MemberSignature::method("flush", vec![], None);
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("P", TypeKind::Class));
        b.push_type({
            let mut t = TypeEntity::new("I", TypeKind::Interface);
            t.members.push(save.clone());
            t
        });
        b.push_type({
            let mut t = TypeEntity::new("Impl", TypeKind::Class);
            t.supertypes.push("I".into());
            t.members.extend([save.clone(), flush.clone()]);
            t
        });
        b.push_type(TypeEntity::new("User", TypeKind::Class));
        b.push_dependency(Dependency {
            from: "User".into(),
            to: "Impl".into(),
            kind: DependencyKind::Declare,
            location: loc(5),
            site: Some("s1".into()),
        });
        b.push_declaration_site(DeclarationSite {
            site_id: "s1".into(),
            enclosing_type: "User".into(),
            declared_type: "Impl".into(),
            variable_name: "x".into(),
            used_members: vec![save.clone()],
            location: loc(5),
        });
        let db = b.build().unwrap().0;
        let site = db.declaration_site("s1").unwrap();
        assert!(typecheck_substitution(&db, site, "Impl"));
        assert!(typecheck_substitution(&db, site, "I"));

        let mut site2 = site.clone();
        site2.used_members.push(flush);
        assert!(typecheck_substitution(&db, &site2, "Impl"));
        assert!(!typecheck_substitution(&db, &site2, "I"));
    }

    #[test]
    fn find_factory_prefers_exact_return_and_requires_construction() {
        let mut b = FactsBuilder::new();
        b.push_type({
            let mut t = TypeEntity::new("dao.UserDAO", TypeKind::Class);
            t.supertypes.push("dao.IUser".into());
            t
        });
        b.push_type(TypeEntity::new("dao.IUser", TypeKind::Interface));
        b.push_type({
            let mut t = TypeEntity::new("dao.Base", TypeKind::Class);
            t.members.push(MemberSignature::static_method("getUserDAO", vec![], Some("dao.UserDAO".into())));
            t
        });
        b.push_type({
            // Supertype return only: loses against the exact return of Base.
            let mut t = TypeEntity::new("dao.Alt", TypeKind::Class);
            t.members.push(MemberSignature::static_method("make", vec![], Some("dao.IUser".into())));
            t
        });
        for (f, s) in [("dao.Base", "b1"), ("dao.Alt", "b2")] {
            b.push_dependency(Dependency {
                from: f.into(),
                to: "dao.UserDAO".into(),
                kind: DependencyKind::Create,
                location: loc(9),
                site: Some(s.into()),
            });
            b.push_creation_site(CreationSite {
                site_id: s.into(),
                enclosing_type: f.into(),
                created_type: "dao.UserDAO".into(),
                arg_types: vec![],
                result_discarded: false,
                location: loc(9),
            });
        }
        let db = b.build().unwrap().0;
        let (factory, method) = find_factory(&db, "dao.UserDAO", &[]).unwrap();
        assert_eq!(factory, "dao.Base");
        assert_eq!(method.name, "getUserDAO");
        // Nothing constructs the interface itself.
        assert!(find_factory(&db, "dao.IUser", &[]).is_none());
    }

    #[test]
    fn allowed_creators_match_constraint_semantics() {
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("app.factory.F", TypeKind::Class));
        b.push_type(TypeEntity::new("app.dao.D", TypeKind::Class));
        b.push_type(TypeEntity::new("app.web.W", TypeKind::Class));
        let db = b.build().unwrap().0;

        let cs = crate::dcl::parse_dcl(
            "module Factory: app.factory.**\nmodule DAO: app.dao.**\nmodule Web: app.web.**\nonly Factory can-create DAO\n",
        )
        .unwrap();
        let allowed = allowed_creator_modules(&cs, &db, "app.dao.D").unwrap();
        assert_eq!(allowed, BTreeSet::from(["Factory".to_string()]));

        let cs = crate::dcl::parse_dcl(
            "module Web: app.web.**\nmodule DAO: app.dao.**\n$system cannot-create Web\n",
        )
        .unwrap();
        assert!(allowed_creator_modules(&cs, &db, "app.web.W").unwrap().is_empty());

        let cs_empty = crate::dcl::parse_dcl("module Web: app.web.**\nmodule DAO: app.dao.**\n").unwrap();
        let allowed = allowed_creator_modules(&cs_empty, &db, "app.web.W").unwrap();
        assert_eq!(allowed.len(), 2);
    }
}
