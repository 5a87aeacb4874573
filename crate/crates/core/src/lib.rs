//! Architectural conformance checking and repair at the dependency-facts
//! level.
//!
//! The pipeline has four stages, each usable on its own:
//!
//! 1. [`extract`]: parse a bounded source subset into a [`FactsDatabase`].
//! 2. [`dcl`]: parse module definitions and dependency constraints.
//! 3. [`checker`]: compute divergences and absences.
//! 4. [`recommend`] + [`apply`]: propose verified refactorings per violation
//!    and apply them, producing a new database and a patch plan.

pub mod apply;
pub mod checker;
pub mod dcl;
pub mod extract;
pub mod facts;
pub mod recommend;
pub mod report;

pub use apply::{apply as apply_recommendation, apply_all, ApplyError, Edit, EditAction, PatchPlan};
pub use checker::{can, check, Violation, ViolationFlavor};
pub use dcl::{parse_dcl, print_dcl, resolve_module, Constraint, ConstraintSet, DclError, Modality, ModuleDef, Pattern};
pub use extract::{emit_facts, extract, ExtractError};
pub use facts::{
    kind_subsumes, AnnotationTarget, CreationSite, DeclarationSite, Dependency, DependencyKind,
    FactsBuilder, FactsDatabase, FactsError, MemberKind, MemberSignature, SourceLocation,
    TypeEntity, TypeKind,
};
pub use recommend::{
    allowed_creator_modules, dependency_set, find_factory, jaccard, recommend, recommend_with,
    suitable_module, typecheck_substitution, Bindings, Recommendation, RecommendConfig,
    RecommendError, RecommendOutcome, RuleId, SimilarityReport,
};
