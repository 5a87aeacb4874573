//! Extraction of a facts database from a bounded source subset corpus:
//! one type per `.java` file, headers, fields, methods, and shallow method
//! bodies (locals, creations, calls on locals/fields, catch clauses).

mod ast;
mod lexer;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use thiserror::Error;
use walkdir::WalkDir;

use crate::facts::{
    AnnotationTarget, CreationSite, DeclarationSite, Dependency, DependencyKind, FactsBuilder,
    FactsDatabase, FactsError, MemberKind, MemberSignature, SourceLocation, TypeEntity, TypeKind,
};

use ast::{
    AnnotationUse, CompilationUnit, Expr, LiteralKind, MethodDecl, Span, Stmt, TypeDecl,
    TypeDeclKind,
};

/// Primitive type names; always registered as externals so that member
/// signatures referencing them stay resolvable.
const PRIMITIVES: [&str; 9] =
    ["boolean", "byte", "char", "double", "float", "int", "long", "short", "void"];

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("{file}:{line}:{column}: {message}")]
    Parse { file: String, line: u32, column: u32, message: String },
    #[error("duplicate type `{id}` (second declaration in {file})")]
    DuplicateType { id: String, file: String },
    #[error(transparent)]
    Facts(#[from] FactsError),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Parses every `.java` file under `source_root` (sorted traversal) and
/// builds the facts database.
pub fn extract(source_root: &Path) -> Result<FactsDatabase, ExtractError> {
    let mut paths: Vec<PathBuf> = WalkDir::new(source_root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.into_path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "java"))
        .collect();
    paths.sort();

    let mut units: Vec<(String, CompilationUnit)> = Vec::new();
    for path in &paths {
        let rel = path
            .strip_prefix(source_root)
            .unwrap_or(path)
            .to_string_lossy()
            .into_owned();
        let text = std::fs::read_to_string(path)
            .map_err(|source| ExtractError::Io { path: rel.clone(), source })?;
        units.push((rel.clone(), parser::parse_unit(&rel, &text)?));
    }
    extract_units(&units)
}

fn fqn_of(unit: &CompilationUnit) -> String {
    match &unit.package {
        Some(p) => format!("{p}.{}", unit.ty.name),
        None => unit.ty.name.clone(),
    }
}

fn extract_units(units: &[(String, CompilationUnit)]) -> Result<FactsDatabase, ExtractError> {
    // Pass 1: the corpus universe, with duplicate detection.
    let mut corpus: BTreeSet<String> = BTreeSet::new();
    for (file, unit) in units {
        let fqn = fqn_of(unit);
        if !corpus.insert(fqn.clone()) {
            return Err(ExtractError::DuplicateType { id: fqn, file: file.clone() });
        }
    }

    let mut externals: BTreeSet<String> = PRIMITIVES.iter().map(|s| s.to_string()).collect();
    externals.insert("null".to_string());
    externals.insert("unknown".to_string());

    // Pass 2: headers and member signatures (the symbol table bodies resolve
    // against).
    let mut symbols: BTreeMap<String, SymbolInfo> = BTreeMap::new();
    let mut contexts: Vec<Ctx<'_>> = Vec::new();
    for (file, unit) in units {
        let ctx = Ctx::new(file, unit, &corpus);
        let info = ctx.header_info(&unit.ty, &mut externals);
        symbols.insert(ctx.fqn.clone(), info);
        contexts.push(ctx);
    }

    // Pass 3: entities, edges and sites.
    let mut builder = FactsBuilder::new();
    for (ctx, (_, unit)) in contexts.iter().zip(units) {
        let mut walker = Walker {
            ctx,
            symbols: &symbols,
            externals: &mut externals,
            deps: Vec::new(),
            decl_sites: Vec::new(),
            creation_sites: Vec::new(),
            scope: BTreeMap::new(),
        };
        let entity = walker.type_facts(&unit.ty);
        builder.push_type(entity);
        for d in walker.deps {
            builder.push_dependency(d);
        }
        for s in walker.decl_sites {
            builder.push_declaration_site(s);
        }
        for s in walker.creation_sites {
            builder.push_creation_site(s);
        }
    }
    for e in externals {
        builder.register_external(e);
    }
    let (db, _warnings) = builder.build()?;
    Ok(db)
}

/// Writes the facts JSON document; loading it back reproduces the database.
pub fn emit_facts(db: &FactsDatabase, path: &Path) -> Result<(), ExtractError> {
    db.save_path(path).map_err(ExtractError::Facts)
}

struct SymbolInfo {
    supertypes: Vec<String>,
    members: Vec<MemberSignature>,
}

/// Per-unit name resolution context.
struct Ctx<'a> {
    file: &'a str,
    fqn: String,
    simple_name: &'a str,
    package: Option<&'a str>,
    imports: BTreeMap<String, String>,
    corpus: &'a BTreeSet<String>,
}

impl<'a> Ctx<'a> {
    fn new(file: &'a str, unit: &'a CompilationUnit, corpus: &'a BTreeSet<String>) -> Self {
        let mut imports = BTreeMap::new();
        for imp in &unit.imports {
            let simple = imp.rsplit('.').next().unwrap_or(imp).to_string();
            imports.insert(simple, imp.clone());
        }
        Self {
            file,
            fqn: fqn_of(unit),
            simple_name: &unit.ty.name,
            package: unit.package.as_deref(),
            imports,
            corpus,
        }
    }

    /// Maps a source type name to a type id: corpus types by qualified or
    /// simple name (imports, then same package), everything else becomes an
    /// external registered as written.
    fn resolve(&self, name: &str, externals: &mut BTreeSet<String>) -> String {
        if PRIMITIVES.contains(&name) {
            return name.to_string();
        }
        if name.contains('.') {
            if self.corpus.contains(name) {
                return name.to_string();
            }
            externals.insert(name.to_string());
            return name.to_string();
        }
        if name == self.simple_name {
            return self.fqn.clone();
        }
        if let Some(full) = self.imports.get(name) {
            if !self.corpus.contains(full) {
                externals.insert(full.clone());
            }
            return full.clone();
        }
        if let Some(pkg) = self.package {
            let candidate = format!("{pkg}.{name}");
            if self.corpus.contains(&candidate) {
                return candidate;
            }
        }
        if self.corpus.contains(name) {
            return name.to_string();
        }
        externals.insert(name.to_string());
        name.to_string()
    }

    fn location(&self, span: Span) -> SourceLocation {
        SourceLocation::new(self.file, span.line, span.column)
    }

    fn header_info(&self, ty: &TypeDecl, externals: &mut BTreeSet<String>) -> SymbolInfo {
        let mut supertypes = Vec::new();
        for (n, _) in ty.extends.iter().chain(ty.implements.iter()) {
            supertypes.push(self.resolve(n, externals));
        }
        let mut members = Vec::new();
        for f in &ty.fields {
            let mut m = MemberSignature::field(&f.name, self.resolve(&f.ty, externals));
            m.is_static = f.is_static;
            members.push(m);
        }
        for m in &ty.methods {
            members.push(self.method_signature(m, externals));
        }
        SymbolInfo { supertypes, members }
    }

    fn method_signature(&self, m: &MethodDecl, externals: &mut BTreeSet<String>) -> MemberSignature {
        let params: Vec<String> =
            m.params.iter().map(|p| self.resolve(&p.ty, externals)).collect();
        let ret = m
            .return_type
            .as_deref()
            .filter(|r| *r != "void")
            .map(|r| self.resolve(r, externals));
        MemberSignature {
            name: m.name.clone(),
            arity: params.len(),
            param_types: params,
            return_type: ret,
            is_static: m.is_static,
            member_kind: MemberKind::Method,
        }
    }
}

#[derive(Clone)]
struct VarBinding {
    type_id: String,
    site_id: Option<String>,
}

struct Walker<'a> {
    ctx: &'a Ctx<'a>,
    symbols: &'a BTreeMap<String, SymbolInfo>,
    externals: &'a mut BTreeSet<String>,
    deps: Vec<Dependency>,
    decl_sites: Vec<DeclarationSite>,
    creation_sites: Vec<CreationSite>,
    scope: BTreeMap<String, VarBinding>,
}

impl<'a> Walker<'a> {
    fn type_facts(&mut self, ty: &TypeDecl) -> TypeEntity {
        let fqn = self.ctx.fqn.clone();
        let kind = match ty.kind {
            TypeDeclKind::Class => TypeKind::Class,
            TypeDeclKind::Interface => TypeKind::Interface,
            TypeDeclKind::Annotation => TypeKind::Annotation,
        };
        let mut entity = TypeEntity::new(fqn.clone(), kind);
        entity.location = Some(self.ctx.location(ty.span));
        if kind == TypeKind::Annotation {
            // The subset grammar carries no @Target metadata; extracted
            // annotations are treated as type-level.
            entity.annotation_target = Some(AnnotationTarget::Type);
        }

        for (name, span) in &ty.extends {
            let id = self.resolve(name);
            entity.supertypes.push(id.clone());
            self.edge(DependencyKind::Extend, &id, *span);
        }
        for (name, span) in &ty.implements {
            let id = self.resolve(name);
            entity.supertypes.push(id.clone());
            self.edge(DependencyKind::Implement, &id, *span);
        }
        for a in &ty.annotations {
            let id = self.use_annotation(a);
            entity.annotations.push(id);
        }

        let info = &self.symbols[&fqn];
        entity.members = info.members.clone();

        // Fields first: they are in scope for every method body.
        for f in &ty.fields {
            for a in &f.annotations {
                self.use_annotation(a);
            }
            let declared = self.resolve(&f.ty);
            let site_id = format!("{fqn}#{}@{}:{}", f.name, f.span.line, f.span.column);
            self.decl_sites.push(DeclarationSite {
                site_id: site_id.clone(),
                enclosing_type: fqn.clone(),
                declared_type: declared.clone(),
                variable_name: f.name.clone(),
                used_members: Vec::new(),
                location: self.ctx.location(f.span),
            });
            self.deps.push(Dependency {
                from: fqn.clone(),
                to: declared.clone(),
                kind: DependencyKind::Declare,
                location: self.ctx.location(f.span),
                site: Some(site_id.clone()),
            });
            self.scope.insert(f.name.clone(), VarBinding { type_id: declared, site_id: Some(site_id) });
        }
        let field_scope = self.scope.clone();
        for f in &ty.fields {
            if let Some(init) = &f.init {
                self.eval(init, false);
            }
        }

        for m in &ty.methods {
            for a in &m.annotations {
                self.use_annotation(a);
            }
            for (name, span) in &m.throws {
                let id = self.resolve(name);
                self.edge(DependencyKind::Handle, &id, *span);
            }
            if let Some(body) = &m.body {
                self.scope = field_scope.clone();
                for p in &m.params {
                    let ty_id = self.resolve(&p.ty);
                    self.scope.insert(p.name.clone(), VarBinding { type_id: ty_id, site_id: None });
                }
                for stmt in body {
                    self.stmt(stmt);
                }
            }
        }
        self.scope.clear();
        entity
    }

    fn resolve(&mut self, name: &str) -> String {
        self.ctx.resolve(name, self.externals)
    }

    fn use_annotation(&mut self, a: &AnnotationUse) -> String {
        let id = self.resolve(&a.name);
        self.edge(DependencyKind::UseAnnotation, &id, a.span);
        id
    }

    /// Records a site-less edge; self-references carry no information.
    fn edge(&mut self, kind: DependencyKind, to: &str, span: Span) {
        if to == self.ctx.fqn {
            return;
        }
        self.deps.push(Dependency {
            from: self.ctx.fqn.clone(),
            to: to.to_string(),
            kind,
            location: self.ctx.location(span),
            site: None,
        });
    }

    fn stmt(&mut self, stmt: &Stmt) {
        match stmt {
            Stmt::Local { ty, name, init, span } => {
                let declared = self.resolve(ty);
                let fqn = self.ctx.fqn.clone();
                let site_id = format!("{fqn}#{name}@{}:{}", span.line, span.column);
                self.decl_sites.push(DeclarationSite {
                    site_id: site_id.clone(),
                    enclosing_type: fqn.clone(),
                    declared_type: declared.clone(),
                    variable_name: name.clone(),
                    used_members: Vec::new(),
                    location: self.ctx.location(*span),
                });
                self.deps.push(Dependency {
                    from: fqn,
                    to: declared.clone(),
                    kind: DependencyKind::Declare,
                    location: self.ctx.location(*span),
                    site: Some(site_id.clone()),
                });
                if let Some(e) = init {
                    self.eval(e, false);
                }
                self.scope.insert(name.clone(), VarBinding { type_id: declared, site_id: Some(site_id) });
            }
            Stmt::Expr(e) => {
                self.eval(e, true);
            }
            Stmt::Assign { target, value } => {
                // A bare variable target is a rebind, not a member use.
                if !matches!(target, Expr::Name { parts, .. } if parts.len() == 1) {
                    self.eval(target, false);
                }
                self.eval(value, false);
            }
            Stmt::Return(Some(e)) | Stmt::Throw(e) => {
                self.eval(e, false);
            }
            Stmt::Return(None) => {}
            Stmt::Try { body, catches, finally } => {
                for s in body {
                    self.stmt(s);
                }
                for c in catches {
                    let handled = self.resolve(&c.ty);
                    self.edge(DependencyKind::Handle, &handled, c.span);
                    self.scope
                        .insert(c.name.clone(), VarBinding { type_id: handled, site_id: None });
                    for s in &c.body {
                        self.stmt(s);
                    }
                }
                if let Some(block) = finally {
                    for s in block {
                        self.stmt(s);
                    }
                }
            }
        }
    }

    /// Evaluates an expression for its facts, returning its static type when
    /// the bounded resolver can determine it.
    fn eval(&mut self, expr: &Expr, discarded: bool) -> Option<String> {
        match expr {
            Expr::Literal(kind, _) => Some(match kind {
                LiteralKind::Int => "int".to_string(),
                LiteralKind::Float => "double".to_string(),
                LiteralKind::Char => "char".to_string(),
                LiteralKind::Bool => "boolean".to_string(),
                LiteralKind::Null => "null".to_string(),
                LiteralKind::Str => self.resolve("String"),
            }),
            Expr::This(_) => Some(self.ctx.fqn.clone()),
            Expr::New { ty, args, span } => {
                let created = self.resolve(ty);
                let arg_types: Vec<String> = args
                    .iter()
                    .map(|a| self.eval(a, false).unwrap_or_else(|| "unknown".to_string()))
                    .collect();
                let fqn = self.ctx.fqn.clone();
                let site_id = format!("{fqn}#new@{}:{}", span.line, span.column);
                self.creation_sites.push(CreationSite {
                    site_id: site_id.clone(),
                    enclosing_type: fqn.clone(),
                    created_type: created.clone(),
                    arg_types,
                    result_discarded: discarded,
                    location: self.ctx.location(*span),
                });
                self.deps.push(Dependency {
                    from: fqn,
                    to: created.clone(),
                    kind: DependencyKind::Create,
                    location: self.ctx.location(*span),
                    site: Some(site_id),
                });
                Some(created)
            }
            Expr::Name { parts, span } => self.name_chain(parts, *span),
            Expr::Call { target, name, args, span } => {
                let arg_types: Vec<String> = args
                    .iter()
                    .map(|a| self.eval(a, false).unwrap_or_else(|| "unknown".to_string()))
                    .collect();
                let link = MemberUse { name: name.clone(), arity: args.len(), arg_types, kind: MemberKind::Method };
                let own_fqn = self.ctx.fqn.clone();
                match target.as_deref() {
                    None | Some(Expr::This(_)) => self.member_result(&own_fqn, &link),
                    Some(Expr::Name { parts, span: rspan }) => {
                        self.name_chain_call(parts, *rspan, *span, &link)
                    }
                    Some(inner) => {
                        let receiver = self.eval(inner, false)?;
                        self.member_access(&receiver, &link, *span, None)
                    }
                }
            }
            Expr::FieldOf { target, name, span } => {
                let link = MemberUse {
                    name: name.clone(),
                    arity: 0,
                    arg_types: Vec::new(),
                    kind: MemberKind::Field,
                };
                let own_fqn = self.ctx.fqn.clone();
                match &**target {
                    Expr::This(_) => self.member_result(&own_fqn, &link),
                    inner => {
                        let receiver = self.eval(inner, false)?;
                        self.member_access(&receiver, &link, *span, None)
                    }
                }
            }
        }
    }

    /// Resolves `a.b.c` as a value: a variable followed by field links, or a
    /// static field read on a type.
    fn name_chain(&mut self, parts: &[String], span: Span) -> Option<String> {
        if let Some(binding) = self.scope.get(&parts[0]).cloned() {
            let mut current = Some(binding.type_id.clone());
            for (i, part) in parts[1..].iter().enumerate() {
                let receiver = current?;
                let link = MemberUse {
                    name: part.clone(),
                    arity: 0,
                    arg_types: Vec::new(),
                    kind: MemberKind::Field,
                };
                let site = if i == 0 { binding.site_id.as_deref() } else { None };
                current = self.member_access(&receiver, &link, span, site);
            }
            return current;
        }
        if parts.len() == 1 {
            // An unknown bare name carries no facts.
            return None;
        }
        // Static chain on a type reference.
        let (type_id, rest) = self.resolve_type_prefix(parts);
        let mut current = Some(type_id);
        for part in rest {
            let receiver = current?;
            let link = MemberUse {
                name: part.clone(),
                arity: 0,
                arg_types: Vec::new(),
                kind: MemberKind::Field,
            };
            current = self.member_access(&receiver, &link, span, None);
        }
        current
    }

    /// Resolves the receiver of `a.b.m(args)` and records the call.
    fn name_chain_call(
        &mut self,
        parts: &[String],
        receiver_span: Span,
        call_span: Span,
        link: &MemberUse,
    ) -> Option<String> {
        if let Some(binding) = self.scope.get(&parts[0]).cloned() {
            let mut current = Some(binding.type_id.clone());
            for (i, part) in parts[1..].iter().enumerate() {
                let receiver = current?;
                let field = MemberUse {
                    name: part.clone(),
                    arity: 0,
                    arg_types: Vec::new(),
                    kind: MemberKind::Field,
                };
                let site = if i == 0 { binding.site_id.as_deref() } else { None };
                current = self.member_access(&receiver, &field, receiver_span, site);
            }
            let receiver = current?;
            let site = if parts.len() == 1 { binding.site_id.as_deref() } else { None };
            return self.member_access(&receiver, link, call_span, site);
        }
        let (type_id, rest) = self.resolve_type_prefix(parts);
        let mut current = Some(type_id);
        for part in rest {
            let receiver = current?;
            let field = MemberUse {
                name: part.clone(),
                arity: 0,
                arg_types: Vec::new(),
                kind: MemberKind::Field,
            };
            current = self.member_access(&receiver, &field, receiver_span, None);
        }
        let receiver = current?;
        self.member_access(&receiver, link, call_span, None)
    }

    /// Interprets a dotted name with no leading variable as a type reference:
    /// the whole name if it is a corpus type, otherwise the first segment
    /// (single-segment fallback) or the full name as an external.
    fn resolve_type_prefix(&mut self, parts: &[String]) -> (String, Vec<String>) {
        let joined = parts.join(".");
        if self.ctx.corpus.contains(&joined) {
            return (joined, Vec::new());
        }
        if parts.len() == 1 {
            return (self.resolve(&parts[0]), Vec::new());
        }
        let head = self.resolve(&parts[0]);
        if self.ctx.corpus.contains(&head) || self.ctx.imports.contains_key(&parts[0]) {
            return (head, parts[1..].to_vec());
        }
        self.externals.insert(joined.clone());
        (joined, Vec::new())
    }

    /// Records an access edge for a member use and returns the member's type
    /// when it resolves in the symbol table.
    fn member_access(
        &mut self,
        receiver: &str,
        link: &MemberUse,
        span: Span,
        var_site: Option<&str>,
    ) -> Option<String> {
        self.edge(DependencyKind::Access, receiver, span);
        let resolved = self.lookup_member(receiver, link);
        if let Some(site_id) = var_site {
            let signature = resolved.clone().unwrap_or_else(|| link.fallback_signature());
            if let Some(site) = self.decl_sites.iter_mut().find(|s| s.site_id == site_id) {
                if !site.used_members.contains(&signature) {
                    site.used_members.push(signature);
                }
            }
        }
        resolved.and_then(|m| m.return_type)
    }

    /// Return type of a member used on the current type itself (no edge).
    fn member_result(&mut self, receiver: &str, link: &MemberUse) -> Option<String> {
        self.lookup_member(receiver, link).and_then(|m| m.return_type)
    }

    /// Walks the symbol table (including supertypes) for a member matching
    /// name, arity and kind.
    fn lookup_member(&self, type_id: &str, link: &MemberUse) -> Option<MemberSignature> {
        let mut queue = vec![type_id.to_string()];
        let mut seen: BTreeSet<String> = BTreeSet::new();
        while let Some(current) = queue.pop() {
            if !seen.insert(current.clone()) {
                continue;
            }
            let Some(info) = self.symbols.get(&current) else { continue };
            if let Some(m) = info
                .members
                .iter()
                .find(|m| m.name == link.name && m.arity == link.arity && m.member_kind == link.kind)
            {
                return Some(m.clone());
            }
            queue.extend(info.supertypes.iter().cloned());
        }
        None
    }
}

struct MemberUse {
    name: String,
    arity: usize,
    arg_types: Vec<String>,
    kind: MemberKind,
}

impl MemberUse {
    /// Signature recorded when the member cannot be resolved (external
    /// receiver): name and arity from the use site, argument static types as
    /// parameter types.
    fn fallback_signature(&self) -> MemberSignature {
        MemberSignature {
            name: self.name.clone(),
            arity: self.arity,
            param_types: self.arg_types.clone(),
            return_type: None,
            is_static: false,
            member_kind: self.kind,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn extract_str(files: &[(&str, &str)]) -> FactsDatabase {
        let units: Vec<(String, CompilationUnit)> = files
            .iter()
            .map(|(name, text)| (name.to_string(), parser::parse_unit(name, text).unwrap()))
            .collect();
        extract_units(&units).unwrap()
    }

    #[test]
    fn empty_class_yields_one_type_and_no_dependencies() {
        let db = extract_str(&[("C.java", "class C {}")]);
        assert_eq!(db.types().len(), 1);
        assert!(db.dependencies().is_empty());
        assert_eq!(db.types()[0].id, "C");
    }

    #[test]
    fn local_declaration_creation_and_call_produce_the_expected_facts() {
        let db = extract_str(&[("C.java", "class C { void m() { D d = new D(); d.go(); } }")]);
        let kinds: Vec<(DependencyKind, &str)> =
            db.dependencies().iter().map(|d| (d.kind, d.to.as_str())).collect();
        assert!(kinds.contains(&(DependencyKind::Declare, "D")));
        assert!(kinds.contains(&(DependencyKind::Create, "D")));
        assert!(kinds.contains(&(DependencyKind::Access, "D")));
        assert_eq!(db.declaration_sites().len(), 1);
        let site = &db.declaration_sites()[0];
        assert_eq!(site.variable_name, "d");
        assert_eq!(site.used_members.len(), 1);
        assert_eq!(site.used_members[0].name, "go");
        assert_eq!(site.used_members[0].arity, 0);
        assert_eq!(db.creation_sites().len(), 1);
        assert!(db.creation_sites()[0].arg_types.is_empty());
        // The creation result is bound to `d`, so it is not discarded.
        assert!(!db.creation_sites()[0].result_discarded);
        // D never resolves: it is registered as an external.
        assert!(db.is_external_id("D"));
    }

    #[test]
    fn unresolved_annotation_becomes_an_external_useannotation_edge() {
        let db = extract_str(&[("C.java", "@Deprecated class C {}")]);
        let d = &db.dependencies()[0];
        assert_eq!(d.kind, DependencyKind::UseAnnotation);
        assert_eq!(d.to, "Deprecated");
        assert!(db.is_external_id("Deprecated"));
        assert_eq!(db.type_entity("C").unwrap().annotations, vec!["Deprecated".to_string()]);
    }

    #[test]
    fn headers_resolve_same_package_and_imported_types() {
        let db = extract_str(&[
            ("p/Base.java", "package p; public class Base { public void inherited() {} }"),
            ("p/I.java", "package p; public interface I { void go(); }"),
            (
                "p/C.java",
                "package p; import q.Ext; public class C extends Base implements I { Ext e; public void go() { e.ping(); } }",
            ),
        ]);
        let c = db.type_entity("p.C").unwrap();
        assert_eq!(c.supertypes, vec!["p.Base".to_string(), "p.I".to_string()]);
        assert!(db.is_external_id("q.Ext"));
        let extends: Vec<&str> = db
            .dependencies()
            .iter()
            .filter(|d| d.kind == DependencyKind::Extend)
            .map(|d| d.to.as_str())
            .collect();
        assert_eq!(extends, vec!["p.Base"]);
        // Field call: access edge plus a used member on the field's site.
        let site = db.declaration_sites().iter().find(|s| s.variable_name == "e").unwrap();
        assert_eq!(site.used_members[0].name, "ping");
        assert_eq!(db.resolve_super("p.C").unwrap(), vec!["p.Base".to_string(), "p.I".to_string()]);
    }

    #[test]
    fn catch_and_throws_produce_handle_edges() {
        let db = extract_str(&[(
            "C.java",
            "import app.AppError; class C { void m() throws AppError { try { run(); } catch (AppError e) { } } void run() {} }",
        )]);
        let handles: Vec<&str> = db
            .dependencies()
            .iter()
            .filter(|d| d.kind == DependencyKind::Handle)
            .map(|d| d.to.as_str())
            .collect();
        assert_eq!(handles, vec!["app.AppError", "app.AppError"]);
    }

    #[test]
    fn static_factory_call_is_an_access_edge() {
        let db = extract_str(&[
            ("dao/UserDAO.java", "package dao; public class UserDAO {}"),
            (
                "dao/Base.java",
                "package dao; public class Base { public static UserDAO getUserDAO() { return new UserDAO(); } }",
            ),
            (
                "svc/S.java",
                "package svc; import dao.Base; import dao.UserDAO; class S { void m() { UserDAO u = Base.getUserDAO(); u.toString(); } }",
            ),
        ]);
        let access: Vec<(&str, &str)> = db
            .dependencies()
            .iter()
            .filter(|d| d.kind == DependencyKind::Access)
            .map(|d| (d.from.as_str(), d.to.as_str()))
            .collect();
        assert!(access.contains(&("svc.S", "dao.Base")));
        assert!(access.contains(&("svc.S", "dao.UserDAO")));
        // The factory method's signature resolves in the symbol table.
        let base = db.type_entity("dao.Base").unwrap();
        assert!(base.members.iter().any(|m| m.name == "getUserDAO"
            && m.is_static
            && m.return_type.as_deref() == Some("dao.UserDAO")));
        // Creation facts live in the factory, not the caller.
        assert_eq!(db.creation_sites().len(), 1);
        assert_eq!(db.creation_sites()[0].enclosing_type, "dao.Base");
    }

    #[test]
    fn duplicate_types_are_rejected() {
        let units: Vec<(String, CompilationUnit)> = [
            ("a/C.java", "package p; class C {}"),
            ("b/C.java", "package p; class C {}"),
        ]
        .iter()
        .map(|(name, text)| (name.to_string(), parser::parse_unit(name, text).unwrap()))
        .collect();
        assert!(matches!(extract_units(&units), Err(ExtractError::DuplicateType { .. })));
    }

    #[test]
    fn constructor_arity_is_recorded_for_creation_sites() {
        let db = extract_str(&[
            ("p/D.java", "package p; public class D { public D(int n) {} }"),
            ("p/C.java", "package p; class C { void m() { D d = new D(3); } }"),
        ]);
        let site = &db.creation_sites()[0];
        assert_eq!(site.arg_types, vec!["int".to_string()]);
        let d = db.type_entity("p.D").unwrap();
        assert!(d.members.iter().any(|m| m.name == "<init>" && m.arity == 1));
    }
}
