//! Applies recommendations at the facts level, producing a new database plus
//! a location-anchored patch plan describing the corresponding source edit.

use serde::Serialize;
use thiserror::Error;

use crate::checker::{check, recheck_delta_ok, Violation};
use crate::dcl::{ConstraintSet, DclError};
use crate::facts::{
    AnnotationTarget, Dependency, DependencyKind, FactsDatabase, FactsError, SourceLocation,
    TypeKind,
};
use crate::recommend::{allowed_creator_modules, typecheck_substitution, Bindings, Recommendation};

/// Source-edit categories a patch plan can contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EditAction {
    ReplaceDeclaredType,
    ReplaceNewWithFactoryCall,
    RemoveInstantiation,
    AddSupertype,
    AddAnnotation,
    MoveType,
}

/// One location-anchored edit with human-readable before/after hints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edit {
    pub location: SourceLocation,
    pub action: EditAction,
    pub before_text_hint: String,
    pub after_text_hint: String,
}

/// Ordered edits, sorted by file then descending position so sequential
/// application never shifts a later edit's anchor.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PatchPlan {
    pub edits: Vec<Edit>,
}

impl PatchPlan {
    fn sort(&mut self) {
        self.edits.sort_by(|a, b| {
            a.location
                .file
                .cmp(&b.location.file)
                .then(b.location.line.cmp(&a.location.line))
                .then(b.location.column.cmp(&a.location.column))
        });
    }

    /// Diff-like rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.edits {
            out.push_str(&format!("--- {} [{}]\n", e.location, action_name(e.action)));
            if !e.before_text_hint.is_empty() {
                out.push_str(&format!("- {}\n", e.before_text_hint));
            }
            if !e.after_text_hint.is_empty() {
                out.push_str(&format!("+ {}\n", e.after_text_hint));
            }
        }
        out
    }
}

fn action_name(a: EditAction) -> &'static str {
    match a {
        EditAction::ReplaceDeclaredType => "replace_declared_type",
        EditAction::ReplaceNewWithFactoryCall => "replace_new_with_factory_call",
        EditAction::RemoveInstantiation => "remove_instantiation",
        EditAction::AddSupertype => "add_supertype",
        EditAction::AddAnnotation => "add_annotation",
        EditAction::MoveType => "move_type",
    }
}

/// A recommendation that could not be applied, with the reason.
#[derive(Debug, Clone, Serialize)]
pub struct Skipped {
    pub recommendation: Recommendation,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("stale recommendation: {reason}")]
    Stale { reason: String },
    #[error("conflicting edits at {location}")]
    Conflict { location: SourceLocation },
    #[error(transparent)]
    Facts(#[from] FactsError),
    #[error(transparent)]
    Dcl(#[from] DclError),
}

/// Applies one recommendation after re-validating its preconditions against
/// the current database. Returns the new database and the patch plan.
pub fn apply(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    rec: &Recommendation,
) -> Result<(FactsDatabase, PatchPlan), ApplyError> {
    if let Err(reason) = validate_preconditions(db, cs, rec) {
        return Err(ApplyError::Stale { reason });
    }
    transform(db, rec)
}

/// Applies recommendations sequentially, re-validating each against the
/// evolving database; invalidated ones are skipped and reported, never
/// force-applied.
pub fn apply_all(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    recs: &[Recommendation],
) -> Result<(FactsDatabase, PatchPlan, Vec<Skipped>), ApplyError> {
    let mut current = db.clone();
    let mut plan = PatchPlan::default();
    let mut skipped = Vec::new();
    for rec in recs {
        match validate_preconditions(&current, cs, rec) {
            Ok(()) => {
                let (next, step) = transform(&current, rec)?;
                current = next;
                plan.edits.extend(step.edits);
            }
            Err(reason) => skipped.push(Skipped { recommendation: rec.clone(), reason }),
        }
    }
    plan.sort();
    for pair in plan.edits.windows(2) {
        if pair[0].location == pair[1].location {
            return Err(ApplyError::Conflict { location: pair[0].location.clone() });
        }
    }
    Ok((current, plan, skipped))
}

/// Re-checks that the recommendation's rule preconditions still hold and that
/// applying it would remove its violation without introducing new ones.
fn validate_preconditions(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    rec: &Recommendation,
) -> Result<(), String> {
    let before = check(db, cs).map_err(|e| e.to_string())?;
    if !before.contains(&rec.violation) {
        return Err("the violation is no longer present".to_string());
    }
    structural_preconditions(db, cs, rec)?;
    let (after_db, _) = transform(db, rec).map_err(|e| format!("cannot apply: {e}"))?;
    let after = check(&after_db, cs).map_err(|e| e.to_string())?;
    if !recheck_delta_ok(&before, &after, &rec.violation) {
        return Err("applying would leave the violation or introduce new ones".to_string());
    }
    Ok(())
}

fn structural_preconditions(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    rec: &Recommendation,
) -> Result<(), String> {
    let v: &Violation = &rec.violation;
    match &rec.bindings {
        Bindings::D1 { chosen_supertype, site_id, .. } => {
            let site = db
                .declaration_site(site_id)
                .ok_or_else(|| format!("declaration site `{site_id}` disappeared"))?;
            if site.declared_type != v.counterpart {
                return Err(format!(
                    "site `{site_id}` now declares `{}`, not `{}`",
                    site.declared_type, v.counterpart
                ));
            }
            if !typecheck_substitution(db, site, chosen_supertype) {
                return Err(format!("`{chosen_supertype}` no longer provides the used members"));
            }
        }
        Bindings::D11 { factory, method, site_id } => {
            let site = db
                .creation_site(site_id)
                .ok_or_else(|| format!("creation site `{site_id}` disappeared"))?;
            let f = db
                .type_entity(factory)
                .ok_or_else(|| format!("factory `{factory}` disappeared"))?;
            if !f.members.iter().any(|m| m == method) {
                return Err(format!("factory `{factory}` no longer provides `{}`", method.name));
            }
            let constructs = db.dependencies().iter().any(|d| {
                d.from == *factory && d.kind == DependencyKind::Create && d.to == site.created_type
            });
            if !constructs {
                return Err(format!("factory `{factory}` no longer constructs `{}`", site.created_type));
            }
        }
        Bindings::D12 { site_id } => {
            let site = db
                .creation_site(site_id)
                .ok_or_else(|| format!("creation site `{site_id}` disappeared"))?;
            let allowed = allowed_creator_modules(cs, db, &site.created_type)
                .map_err(|e| e.to_string())?;
            if !allowed.is_empty() {
                return Err(format!(
                    "creation of `{}` is now permitted for {:?}",
                    site.created_type, allowed
                ));
            }
        }
        Bindings::A3 { supertype, .. } => {
            let t = db
                .type_entity(&v.offender)
                .ok_or_else(|| format!("type `{}` disappeared", v.offender))?;
            if t.supertypes.contains(supertype) {
                return Err(format!("`{}` already derives `{supertype}`", v.offender));
            }
            if let Ok(supers) = db.resolve_super(supertype) {
                if supers.iter().any(|s| s == &v.offender) {
                    return Err("adding the supertype would now create a cycle".to_string());
                }
            }
        }
        Bindings::A4 { target_module } => {
            db.type_entity(&v.offender)
                .ok_or_else(|| format!("type `{}` disappeared", v.offender))?;
            if cs.module(target_module).is_none() {
                return Err(format!("target module `{target_module}` is not defined"));
            }
        }
        Bindings::A6 { annotation } => {
            let t = db
                .type_entity(&v.offender)
                .ok_or_else(|| format!("type `{}` disappeared", v.offender))?;
            if t.annotations.contains(annotation) {
                return Err(format!("`{}` is already annotated with `{annotation}`", v.offender));
            }
            let a = db
                .type_entity(annotation)
                .ok_or_else(|| format!("annotation `{annotation}` disappeared"))?;
            if a.kind != TypeKind::Annotation || a.annotation_target != Some(AnnotationTarget::Type) {
                return Err(format!("`{annotation}` is no longer a type-targeted annotation"));
            }
        }
    }
    Ok(())
}

/// Pure facts transformation: no precondition re-validation. Also used by the
/// recommendation engine for its hypothetical re-check.
pub(crate) fn transform(
    db: &FactsDatabase,
    rec: &Recommendation,
) -> Result<(FactsDatabase, PatchPlan), ApplyError> {
    let mut parts = db.to_parts();
    let v = &rec.violation;
    let edit = match &rec.bindings {
        Bindings::D1 { chosen_supertype, site_id, .. } => {
            let site = parts
                .declaration_sites
                .iter_mut()
                .find(|s| s.site_id == *site_id)
                .ok_or_else(|| stale(format!("declaration site `{site_id}` not found")))?;
            let old = site.declared_type.clone();
            site.declared_type = chosen_supertype.clone();
            let location = site.location.clone();
            let variable = site.variable_name.clone();
            let dep = parts
                .dependencies
                .iter_mut()
                .find(|d| d.kind == DependencyKind::Declare && d.site.as_deref() == Some(site_id))
                .ok_or_else(|| stale(format!("declare dependency of site `{site_id}` not found")))?;
            dep.to = chosen_supertype.clone();
            Edit {
                location,
                action: EditAction::ReplaceDeclaredType,
                before_text_hint: format!("{} {}", simple(&old), variable),
                after_text_hint: format!("{} {}", simple(chosen_supertype), variable),
            }
        }
        Bindings::D11 { factory, method, site_id } => {
            let site = remove_creation_site(&mut parts, site_id)?;
            parts.dependencies.push(Dependency {
                from: site.enclosing_type.clone(),
                to: factory.clone(),
                kind: DependencyKind::Access,
                location: site.location.clone(),
                site: None,
            });
            let args = if site.arg_types.is_empty() { "" } else { "…" };
            Edit {
                location: site.location.clone(),
                action: EditAction::ReplaceNewWithFactoryCall,
                before_text_hint: format!("new {}({args})", simple(&site.created_type)),
                after_text_hint: format!("{}.{}({args})", simple(factory), method.name),
            }
        }
        Bindings::D12 { site_id } => {
            let site = remove_creation_site(&mut parts, site_id)?;
            let args = if site.arg_types.is_empty() { "" } else { "…" };
            Edit {
                location: site.location.clone(),
                action: EditAction::RemoveInstantiation,
                before_text_hint: format!("new {}({args})", simple(&site.created_type)),
                after_text_hint: if site.result_discarded { String::new() } else { "null".to_string() },
            }
        }
        Bindings::A3 { supertype, edge_kind } => {
            let t = parts
                .types
                .iter_mut()
                .find(|t| t.id == v.offender)
                .ok_or_else(|| stale(format!("type `{}` not found", v.offender)))?;
            if t.supertypes.contains(supertype) {
                return Err(stale(format!("`{}` already derives `{supertype}`", v.offender)));
            }
            t.supertypes.push(supertype.clone());
            let location = t.location.clone().unwrap_or_else(SourceLocation::unknown);
            let head = type_head(t.kind, &t.id);
            parts.dependencies.push(Dependency {
                from: v.offender.clone(),
                to: supertype.clone(),
                kind: *edge_kind,
                location: location.clone(),
                site: None,
            });
            let keyword = if *edge_kind == DependencyKind::Implement { "implements" } else { "extends" };
            Edit {
                location,
                action: EditAction::AddSupertype,
                before_text_hint: head.clone(),
                after_text_hint: format!("{head} {keyword} {}", simple(supertype)),
            }
        }
        Bindings::A4 { target_module } => {
            let t = parts
                .types
                .iter()
                .find(|t| t.id == v.offender)
                .ok_or_else(|| stale(format!("type `{}` not found", v.offender)))?;
            let location = t.location.clone().unwrap_or_else(SourceLocation::unknown);
            parts.module_overrides.retain(|o| o.type_id != v.offender);
            parts.module_overrides.push(crate::facts::ModuleOverride {
                type_id: v.offender.clone(),
                module: target_module.clone(),
            });
            Edit {
                location,
                action: EditAction::MoveType,
                before_text_hint: v.offender.clone(),
                after_text_hint: format!("{} moved to module {target_module}", v.offender),
            }
        }
        Bindings::A6 { annotation } => {
            let t = parts
                .types
                .iter_mut()
                .find(|t| t.id == v.offender)
                .ok_or_else(|| stale(format!("type `{}` not found", v.offender)))?;
            if t.annotations.contains(annotation) {
                return Err(stale(format!("`{}` is already annotated", v.offender)));
            }
            t.annotations.push(annotation.clone());
            let location = t.location.clone().unwrap_or_else(SourceLocation::unknown);
            let head = type_head(t.kind, &t.id);
            parts.dependencies.push(Dependency {
                from: v.offender.clone(),
                to: annotation.clone(),
                kind: DependencyKind::UseAnnotation,
                location: location.clone(),
                site: None,
            });
            Edit {
                location,
                action: EditAction::AddAnnotation,
                before_text_hint: head.clone(),
                after_text_hint: format!("@{} {head}", simple(annotation)),
            }
        }
    };
    let (new_db, warnings) = FactsDatabase::from_parts(parts)?;
    if let Some(w) = warnings.into_iter().next() {
        return Err(ApplyError::Facts(FactsError::InvalidSite {
            site_id: "<apply>".to_string(),
            message: format!("edit broke referential integrity: {w}"),
        }));
    }
    Ok((new_db, PatchPlan { edits: vec![edit] }))
}

fn remove_creation_site(
    parts: &mut crate::facts::FactsParts,
    site_id: &str,
) -> Result<crate::facts::CreationSite, ApplyError> {
    let idx = parts
        .creation_sites
        .iter()
        .position(|s| s.site_id == site_id)
        .ok_or_else(|| stale(format!("creation site `{site_id}` not found")))?;
    let site = parts.creation_sites.remove(idx);
    parts
        .dependencies
        .retain(|d| !(d.kind == DependencyKind::Create && d.site.as_deref() == Some(site_id)));
    Ok(site)
}

fn stale(reason: String) -> ApplyError {
    ApplyError::Stale { reason }
}

fn simple(id: &str) -> &str {
    id.rsplit('.').next().unwrap_or(id)
}

fn type_head(kind: TypeKind, id: &str) -> String {
    let kw = match kind {
        TypeKind::Class => "class",
        TypeKind::Interface => "interface",
        TypeKind::Annotation => "@interface",
    };
    format!("{kw} {}", simple(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check;
    use crate::dcl::parse_dcl;
    use crate::facts::{
        CreationSite, DeclarationSite, FactsBuilder, MemberSignature, TypeEntity,
    };
    use crate::recommend::recommend;

    fn loc(file: &str, line: u32) -> SourceLocation {
        SourceLocation::new(file, line, 5)
    }

    /// Controller declares a concrete DAO that also implements an interface.
    fn d1_db() -> FactsDatabase {
        let save = MemberSignature::method("save", vec!["app.model.Product".into()], None);
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("app.model.Product", TypeKind::Class));
        b.push_type({
            let mut t = TypeEntity::new("app.dao.IProductDAO", TypeKind::Interface);
            t.members.push(save.clone());
            t
        });
        b.push_type({
            let mut t = TypeEntity::new("app.dao.hib.ProductHibernateDAO", TypeKind::Class);
            t.supertypes.push("app.dao.IProductDAO".into());
            t.members.push(save.clone());
            t
        });
        b.push_type(TypeEntity::new("app.web.ProductController", TypeKind::Class));
        b.push_dependency(Dependency {
            from: "app.web.ProductController".into(),
            to: "app.dao.hib.ProductHibernateDAO".into(),
            kind: DependencyKind::Declare,
            location: loc("ProductController.java", 12),
            site: Some("s1".into()),
        });
        b.push_declaration_site(DeclarationSite {
            site_id: "s1".into(),
            enclosing_type: "app.web.ProductController".into(),
            declared_type: "app.dao.hib.ProductHibernateDAO".into(),
            variable_name: "dao".into(),
            used_members: vec![save],
            location: loc("ProductController.java", 12),
        });
        b.build().unwrap().0
    }

    #[test]
    fn d1_apply_removes_the_divergence() {
        let db = d1_db();
        let cs = parse_dcl(
            "module Controller: app.web.**\nmodule HibernateDAO: app.dao.hib.**\nController cannot-depend HibernateDAO\n",
        )
        .unwrap();
        let violations = check(&db, &cs).unwrap();
        assert_eq!(violations.len(), 1);
        let outcome = recommend(&db, &cs, &violations[0]).unwrap();
        let rec = &outcome.recommendations[0];
        assert!(matches!(&rec.bindings, Bindings::D1 { chosen_supertype, .. } if chosen_supertype == "app.dao.IProductDAO"));

        let (new_db, plan) = apply(&db, &cs, rec).unwrap();
        assert!(check(&new_db, &cs).unwrap().is_empty());
        assert_eq!(plan.edits.len(), 1);
        assert_eq!(plan.edits[0].action, EditAction::ReplaceDeclaredType);
        assert!(plan.edits[0].after_text_hint.contains("IProductDAO dao"));
        new_db.validate().unwrap();
        // The original snapshot is untouched.
        assert_eq!(check(&db, &cs).unwrap().len(), 1);
    }

    #[test]
    fn d12_apply_removes_site_and_dependency() {
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("app.Main", TypeKind::Class));
        b.push_type(TypeEntity::new("app.ctl.Login", TypeKind::Class));
        b.push_dependency(Dependency {
            from: "app.Main".into(),
            to: "app.ctl.Login".into(),
            kind: DependencyKind::Create,
            location: loc("Main.java", 4),
            site: Some("c1".into()),
        });
        b.push_creation_site(CreationSite {
            site_id: "c1".into(),
            enclosing_type: "app.Main".into(),
            created_type: "app.ctl.Login".into(),
            arg_types: vec![],
            result_discarded: true,
            location: loc("Main.java", 4),
        });
        let db = b.build().unwrap().0;
        let cs = parse_dcl("module Controller: app.ctl.**\n$system cannot-create Controller\n").unwrap();
        let violations = check(&db, &cs).unwrap();
        assert_eq!(violations.len(), 1);
        let outcome = recommend(&db, &cs, &violations[0]).unwrap();
        assert_eq!(outcome.recommendations.len(), 1);
        let rec = &outcome.recommendations[0];
        assert!(matches!(rec.bindings, Bindings::D12 { .. }));
        let (new_db, plan) = apply(&db, &cs, rec).unwrap();
        assert!(new_db.creation_sites().is_empty());
        assert!(new_db.dependencies().is_empty());
        assert!(check(&new_db, &cs).unwrap().is_empty());
        assert_eq!(plan.edits[0].after_text_hint, "");
        // Applying the same recommendation again is stale, not destructive.
        assert!(matches!(apply(&new_db, &cs, rec), Err(ApplyError::Stale { .. })));
    }

    #[test]
    fn apply_all_skips_conflicting_second_recommendation() {
        let db = d1_db();
        let cs = parse_dcl(
            "module Controller: app.web.**\nmodule HibernateDAO: app.dao.hib.**\nController cannot-depend HibernateDAO\n",
        )
        .unwrap();
        let violations = check(&db, &cs).unwrap();
        let outcome = recommend(&db, &cs, &violations[0]).unwrap();
        let rec = outcome.recommendations[0].clone();
        let (new_db, plan, skipped) = apply_all(&db, &cs, &[rec.clone(), rec]).unwrap();
        assert_eq!(plan.edits.len(), 1);
        assert_eq!(skipped.len(), 1);
        assert!(skipped[0].reason.contains("no longer present"));
        assert!(check(&new_db, &cs).unwrap().is_empty());
    }
}
