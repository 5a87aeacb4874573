//! Conformance checking: computes the divergences and absences of a facts
//! database against a constraint set.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::dcl::{resolve_module, Constraint, ConstraintSet, DclError, Modality};
use crate::facts::{kind_subsumes, DependencyKind, FactsDatabase, SourceLocation, TypeEntity, TypeKind};

/// A forbidden dependency that exists, or a required one that is missing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationFlavor {
    Divergence,
    Absence,
}

impl fmt::Display for ViolationFlavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationFlavor::Divergence => f.write_str("divergence"),
            ViolationFlavor::Absence => f.write_str("absence"),
        }
    }
}

/// One constraint violation.
///
/// For divergences `counterpart` is the dependency target type and `kind` the
/// concrete edge kind; for absences `counterpart` is the required target
/// module name and `kind` the constraint's kind.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub constraint_id: String,
    pub flavor: ViolationFlavor,
    pub offender: String,
    pub counterpart: String,
    pub kind: DependencyKind,
    pub location: SourceLocation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} --{}--> {} @ {}",
            self.constraint_id, self.flavor, self.offender, self.kind, self.counterpart, self.location
        )
    }
}

/// Module resolution with memoization, scoped to one (db, cs) pair.
pub(crate) struct Resolver<'a> {
    pub(crate) db: &'a FactsDatabase,
    pub(crate) cs: &'a ConstraintSet,
    cache: RefCell<BTreeMap<String, Rc<BTreeSet<String>>>>,
}

impl<'a> Resolver<'a> {
    pub(crate) fn new(db: &'a FactsDatabase, cs: &'a ConstraintSet) -> Self {
        Self { db, cs, cache: RefCell::new(BTreeMap::new()) }
    }

    pub(crate) fn set(&self, name: &str) -> Result<Rc<BTreeSet<String>>, DclError> {
        if let Some(hit) = self.cache.borrow().get(name) {
            return Ok(Rc::clone(hit));
        }
        let set = Rc::new(resolve_module(self.cs, self.db, name)?);
        self.cache.borrow_mut().insert(name.to_string(), Rc::clone(&set));
        Ok(set)
    }

    pub(crate) fn targets(&self, c: &Constraint) -> Result<BTreeSet<String>, DclError> {
        let mut union = BTreeSet::new();
        for t in &c.targets {
            union.extend(self.set(t)?.iter().cloned());
        }
        Ok(union)
    }
}

/// The kind a supertype edge `t -> s` would have: the explicit extend or
/// implement dependency when recorded, inferred from the entities' kinds
/// otherwise, `None` when the supertype is an opaque external.
fn supertype_edge_kind(db: &FactsDatabase, t: &TypeEntity, s: &str) -> Option<DependencyKind> {
    if let Some(d) = db.dependencies().iter().find(|d| {
        d.from == t.id
            && d.to == s
            && matches!(d.kind, DependencyKind::Extend | DependencyKind::Implement)
    }) {
        return Some(d.kind);
    }
    let sup = db.type_entity(s)?;
    if sup.kind == TypeKind::Interface && t.kind == TypeKind::Class {
        Some(DependencyKind::Implement)
    } else {
        Some(DependencyKind::Extend)
    }
}

/// Whether `t` already establishes the relation a `must-kind` constraint asks
/// for, towards any type in `targets`.
pub(crate) fn must_satisfied(
    db: &FactsDatabase,
    t: &TypeEntity,
    kind: DependencyKind,
    targets: &BTreeSet<String>,
) -> bool {
    match kind {
        // Only a directly applied annotation counts.
        DependencyKind::UseAnnotation => t.annotations.iter().any(|a| targets.contains(a)),
        // Read the direct supertype list; an unknown edge kind (opaque
        // external supertype) satisfies either keyword.
        DependencyKind::Implement | DependencyKind::Extend | DependencyKind::Derive => {
            t.supertypes.iter().any(|s| {
                targets.contains(s)
                    && (kind == DependencyKind::Derive
                        || supertype_edge_kind(db, t, s).map_or(true, |ek| ek == kind))
            })
        }
        _ => db
            .dependencies()
            .iter()
            .any(|d| d.from == t.id && targets.contains(&d.to) && kind_subsumes(kind, d.kind)),
    }
}

fn violation_sort_key(v: &Violation) -> (String, SourceLocation, String, DependencyKind) {
    (v.offender.clone(), v.location.clone(), v.counterpart.clone(), v.kind)
}

/// Computes every violation of `cs` in `db`, in deterministic order:
/// constraint file order, then offender id, then source location.
pub fn check(db: &FactsDatabase, cs: &ConstraintSet) -> Result<Vec<Violation>, DclError> {
    let resolver = Resolver::new(db, cs);
    let mut all = Vec::new();
    for c in &cs.constraints {
        let mut batch = check_constraint(&resolver, c)?;
        batch.sort_by_key(violation_sort_key);
        all.extend(batch);
    }
    Ok(all)
}

fn check_constraint(resolver: &Resolver<'_>, c: &Constraint) -> Result<Vec<Violation>, DclError> {
    let db = resolver.db;
    let origin = resolver.set(&c.origin)?;
    let targets = resolver.targets(c)?;
    let mut out = Vec::new();
    match c.modality {
        Modality::Cannot => {
            for d in db.dependencies() {
                if origin.contains(&d.from) && targets.contains(&d.to) && kind_subsumes(c.kind, d.kind) {
                    out.push(divergence(c, d));
                }
            }
        }
        Modality::OnlyCan => {
            for d in db.dependencies() {
                if !origin.contains(&d.from) && targets.contains(&d.to) && kind_subsumes(c.kind, d.kind) {
                    out.push(divergence(c, d));
                }
            }
        }
        Modality::CanOnly => {
            for d in db.dependencies() {
                if origin.contains(&d.from)
                    && !targets.contains(&d.to)
                    && !origin.contains(&d.to)
                    && d.to != d.from
                    && kind_subsumes(c.kind, d.kind)
                {
                    out.push(divergence(c, d));
                }
            }
        }
        Modality::Must => {
            for id in origin.iter() {
                // Requirements are only assertable on types the database has
                // an entity for; opaque externals are skipped.
                let Some(t) = db.type_entity(id) else { continue };
                if !must_satisfied(db, t, c.kind, &targets) {
                    out.push(Violation {
                        constraint_id: c.id.clone(),
                        flavor: ViolationFlavor::Absence,
                        offender: t.id.clone(),
                        counterpart: c.targets[0].clone(),
                        kind: c.kind,
                        location: t.location_or_unknown(),
                        site: None,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn divergence(c: &Constraint, d: &crate::facts::Dependency) -> Violation {
    Violation {
        constraint_id: c.id.clone(),
        flavor: ViolationFlavor::Divergence,
        offender: d.from.clone(),
        counterpart: d.to.clone(),
        kind: d.kind,
        location: d.location.clone(),
        site: d.site.clone(),
    }
}

/// True iff `after` no longer contains `removed` and introduces no violation
/// that was absent from `before` (multiset containment).
pub(crate) fn recheck_delta_ok(before: &[Violation], after: &[Violation], removed: &Violation) -> bool {
    if after.contains(removed) {
        return false;
    }
    let mut budget: BTreeMap<&Violation, usize> = BTreeMap::new();
    for b in before {
        *budget.entry(b).or_insert(0) += 1;
    }
    for a in after {
        match budget.get_mut(a) {
            Some(n) if *n > 0 => *n -= 1,
            _ => return false,
        }
    }
    true
}

/// Whether adding a hypothetical concrete dependency `(from, kind, to)` would
/// produce a new divergence under `cs`. Point query; `must` constraints can
/// never be violated by adding an edge.
pub fn can(
    db: &FactsDatabase,
    cs: &ConstraintSet,
    from: &str,
    kind: DependencyKind,
    to: &str,
) -> Result<bool, DclError> {
    let resolver = Resolver::new(db, cs);
    can_inner(&resolver, from, kind, to)
}

pub(crate) fn can_inner(
    resolver: &Resolver<'_>,
    from: &str,
    kind: DependencyKind,
    to: &str,
) -> Result<bool, DclError> {
    for c in &resolver.cs.constraints {
        if !kind_subsumes(c.kind, kind) {
            continue;
        }
        let origin = resolver.set(&c.origin)?;
        let blocked = match c.modality {
            Modality::Cannot => {
                origin.contains(from) && resolver.targets(c)?.contains(to)
            }
            Modality::OnlyCan => {
                !origin.contains(from) && resolver.targets(c)?.contains(to)
            }
            Modality::CanOnly => {
                origin.contains(from)
                    && !resolver.targets(c)?.contains(to)
                    && !origin.contains(to)
                    && to != from
            }
            Modality::Must => false,
        };
        if blocked {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcl::parse_dcl;
    use crate::facts::{Dependency, FactsBuilder, TypeEntity};

    fn loc(file: &str, line: u32) -> SourceLocation {
        SourceLocation::new(file, line, 1)
    }

    fn dep(from: &str, kind: DependencyKind, to: &str, line: u32) -> Dependency {
        Dependency { from: from.into(), to: to.into(), kind, location: loc("f.java", line), site: None }
    }

    fn view_model_db() -> FactsDatabase {
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("app.view.Screen", TypeKind::Class));
        b.push_type(TypeEntity::new("app.model.Account", TypeKind::Class));
        b.push_dependency(dep("app.view.Screen", DependencyKind::Access, "app.model.Account", 10));
        b.build().unwrap().0
    }

    #[test]
    fn cannot_access_raises_one_divergence() {
        let db = view_model_db();
        let cs = parse_dcl("module View: app.view.**\nmodule Model: app.model.**\nView cannot-access Model\n").unwrap();
        let vs = check(&db, &cs).unwrap();
        assert_eq!(vs.len(), 1);
        let v = &vs[0];
        assert_eq!(v.flavor, ViolationFlavor::Divergence);
        assert_eq!(v.offender, "app.view.Screen");
        assert_eq!(v.counterpart, "app.model.Account");
        assert_eq!(v.kind, DependencyKind::Access);
        assert_eq!(v.location.line, 10);
    }

    #[test]
    fn empty_db_has_no_divergences() {
        let db = FactsDatabase::empty();
        let cs = parse_dcl("module View: app.view.**\nmodule Model: app.model.**\nView cannot-access Model\n").unwrap();
        assert!(check(&db, &cs).unwrap().is_empty());
    }

    #[test]
    fn can_depend_only_flags_non_listed_targets_with_concrete_kind() {
        let mut b = FactsBuilder::new();
        b.register_external("java.");
        b.push_type(TypeEntity::new("app.util.Strings", TypeKind::Class));
        b.push_type(TypeEntity::new("app.util.Dates", TypeKind::Class));
        b.push_type(TypeEntity::new("app.core.Engine", TypeKind::Class));
        b.push_dependency(dep("app.util.Strings", DependencyKind::Access, "java.util.List", 3));
        b.push_dependency(dep("app.util.Strings", DependencyKind::Access, "app.core.Engine", 4));
        b.push_dependency(dep("app.util.Strings", DependencyKind::Access, "app.util.Dates", 5));
        let db = b.build().unwrap().0;
        let cs = parse_dcl("module Util: app.util.**\nUtil can-depend-only JavaAPI\n").unwrap();
        let vs = check(&db, &cs).unwrap();
        // Only the edge to app.core.Engine: java.util.List is external and
        // app.util.Dates is exempt as an intra-module target.
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].counterpart, "app.core.Engine");
        assert_eq!(vs[0].kind, DependencyKind::Access);
    }

    #[test]
    fn must_implement_reports_absences_per_missing_type() {
        let mut b = FactsBuilder::new();
        b.register_external("java.");
        b.push_type({
            let mut t = TypeEntity::new("app.dto.Good", TypeKind::Class);
            t.supertypes.push("java.io.Serializable".into());
            t.location = Some(loc("Good.java", 2));
            t
        });
        b.push_type({
            let mut t = TypeEntity::new("app.dto.Bad", TypeKind::Class);
            t.location = Some(loc("Bad.java", 2));
            t
        });
        b.push_dependency(dep("app.dto.Good", DependencyKind::Implement, "java.io.Serializable", 2));
        let db = b.build().unwrap().0;
        let cs = parse_dcl("module DTO: app.dto.**\nTC1: DTO must-implement java.io.Serializable\n").unwrap();
        let vs = check(&db, &cs).unwrap();
        assert_eq!(vs.len(), 1);
        assert_eq!(vs[0].flavor, ViolationFlavor::Absence);
        assert_eq!(vs[0].offender, "app.dto.Bad");
        assert_eq!(vs[0].counterpart, "java.io.Serializable");
        assert!(vs[0].site.is_none());
    }

    #[test]
    fn only_can_restricts_originators_not_kinds() {
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("app.factory.F", TypeKind::Class));
        b.push_type(TypeEntity::new("app.svc.S", TypeKind::Class));
        b.push_type(TypeEntity::new("app.dao.D", TypeKind::Class));
        b.push_dependency(dep("app.svc.S", DependencyKind::Access, "app.dao.D", 7));
        let db = b.build().unwrap().0;
        let cs = parse_dcl(
            "module Factory: app.factory.**\nmodule DAO: app.dao.**\nonly Factory can-create DAO\n",
        )
        .unwrap();
        // Access is not subsumed by create: no violation.
        assert!(check(&db, &cs).unwrap().is_empty());
        assert!(can(&db, &cs, "app.svc.S", DependencyKind::Access, "app.dao.D").unwrap());
        assert!(!can(&db, &cs, "app.svc.S", DependencyKind::Create, "app.dao.D").unwrap());
        assert!(can(&db, &cs, "app.factory.F", DependencyKind::Create, "app.dao.D").unwrap());
    }

    #[test]
    fn can_is_vacuously_true_without_constraints() {
        let db = view_model_db();
        let cs = ConstraintSet::default();
        assert!(can(&db, &cs, "app.view.Screen", DependencyKind::Create, "app.model.Account").unwrap());
    }

    #[test]
    fn cannot_depend_blocks_only_listed_module() {
        let mut b = FactsBuilder::new();
        b.push_type(TypeEntity::new("app.web.Controller", TypeKind::Class));
        b.push_type(TypeEntity::new("app.dao.hib.ProductHibernateDAO", TypeKind::Class));
        b.push_type(TypeEntity::new("app.dao.IProductDAO", TypeKind::Interface));
        let db = b.build().unwrap().0;
        let cs = parse_dcl(
            "module Controller: app.web.**\nmodule HibernateDAO: app.dao.hib.**\nController cannot-depend HibernateDAO\n",
        )
        .unwrap();
        assert!(!can(&db, &cs, "app.web.Controller", DependencyKind::Declare, "app.dao.hib.ProductHibernateDAO").unwrap());
        assert!(can(&db, &cs, "app.web.Controller", DependencyKind::Access, "app.dao.IProductDAO").unwrap());
    }
}
