//! Randomized instances for oracle-equivalence and round-trip suites. All
//! generators are driven by a caller-provided RNG so runs are reproducible.

use archfix_core::dcl::{Constraint, ConstraintSet, Modality, ModuleDef, Pattern};
use archfix_core::facts::{
    AnnotationTarget, CreationSite, DeclarationSite, Dependency, DependencyKind, FactsBuilder,
    FactsDatabase, SourceLocation, TypeEntity, TypeKind,
};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::Corpus;

const PACKAGES: [&str; 4] = ["pa", "pb", "pc", "pa.sub"];
const CONCRETE_KINDS: [DependencyKind; 7] = [
    DependencyKind::Access,
    DependencyKind::Declare,
    DependencyKind::Create,
    DependencyKind::Extend,
    DependencyKind::Implement,
    DependencyKind::UseAnnotation,
    DependencyKind::Handle,
];
const ALL_KINDS: [DependencyKind; 9] = [
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

/// A random facts database plus a constraint set that resolves against it.
/// Bounded: at most 12 types, 30 dependencies, 6 constraints.
pub fn instance<R: Rng>(rng: &mut R) -> (FactsDatabase, ConstraintSet) {
    let n_types = rng.gen_range(2..=12);
    let mut ids: Vec<String> = Vec::new();
    let mut kinds: Vec<TypeKind> = Vec::new();
    for i in 0..n_types {
        let pkg = PACKAGES[rng.gen_range(0..PACKAGES.len())];
        ids.push(format!("{pkg}.T{i}"));
        kinds.push(match rng.gen_range(0..10) {
            0..=5 => TypeKind::Class,
            6..=8 => TypeKind::Interface,
            _ => TypeKind::Annotation,
        });
    }

    let externals: Vec<String> = (0..3).map(|i| format!("ext.E{i}")).collect();
    let mut used_externals: Vec<String> = Vec::new();

    let mut builder = FactsBuilder::new();
    builder.register_external("ext");

    let mut entities: Vec<TypeEntity> = Vec::new();
    for i in 0..n_types {
        let mut t = TypeEntity::new(ids[i].clone(), kinds[i]);
        t.location = Some(SourceLocation::new(format!("{}.java", ids[i]), 1, 1));
        if kinds[i] == TypeKind::Annotation {
            t.annotation_target = Some(
                *[AnnotationTarget::Type, AnnotationTarget::Method, AnnotationTarget::Field]
                    .choose(rng)
                    .unwrap(),
            );
        }
        // Supertypes only point at higher indices: the graph stays acyclic.
        if kinds[i] != TypeKind::Annotation && i + 1 < n_types {
            for _ in 0..rng.gen_range(0..=2u32) {
                let j = rng.gen_range(i + 1..n_types);
                if kinds[j] == TypeKind::Annotation || t.supertypes.contains(&ids[j]) {
                    continue;
                }
                t.supertypes.push(ids[j].clone());
            }
        }
        entities.push(t);
    }

    let mut deps: Vec<Dependency> = Vec::new();
    let mut decl_sites: Vec<DeclarationSite> = Vec::new();
    let mut creation_sites: Vec<CreationSite> = Vec::new();
    let mut push_dep = |deps: &mut Vec<Dependency>, from: String, to: String, kind: DependencyKind, line: u32, site: Option<String>| {
        deps.push(Dependency {
            from: from.clone(),
            to,
            kind,
            location: SourceLocation::new(format!("{from}.java"), line, 1),
            site,
        });
    };

    // Header edges for some supertype links.
    let mut line = 100u32;
    for (i, t) in entities.iter().enumerate() {
        for s in &t.supertypes {
            if rng.gen_bool(0.7) {
                let j = ids.iter().position(|x| x == s).unwrap();
                let kind = if kinds[j] == TypeKind::Interface && kinds[i] == TypeKind::Class {
                    DependencyKind::Implement
                } else {
                    DependencyKind::Extend
                };
                push_dep(&mut deps, t.id.clone(), s.clone(), kind, line, None);
                line += 1;
            }
        }
    }
    // Annotation applications keep the list and the edge in step.
    let annotation_ids: Vec<String> = (0..n_types)
        .filter(|&i| kinds[i] == TypeKind::Annotation)
        .map(|i| ids[i].clone())
        .collect();
    for i in 0..n_types {
        if kinds[i] != TypeKind::Annotation && !annotation_ids.is_empty() && rng.gen_bool(0.3) {
            let a = annotation_ids[rng.gen_range(0..annotation_ids.len())].clone();
            if a != ids[i] && !entities[i].annotations.contains(&a) {
                entities[i].annotations.push(a.clone());
                push_dep(&mut deps, ids[i].clone(), a, DependencyKind::UseAnnotation, line, None);
                line += 1;
            }
        }
    }

    let n_deps = rng.gen_range(0..=24usize).min(30usize.saturating_sub(deps.len()));
    for k in 0..n_deps {
        let from = ids[rng.gen_range(0..n_types)].clone();
        let to = if rng.gen_bool(0.25) {
            let e = externals[rng.gen_range(0..externals.len())].clone();
            used_externals.push(e.clone());
            e
        } else {
            ids[rng.gen_range(0..n_types)].clone()
        };
        let kind = CONCRETE_KINDS[rng.gen_range(0..CONCRETE_KINDS.len())];
        line += 1;
        match kind {
            DependencyKind::Declare => {
                let site_id = format!("s{k}");
                decl_sites.push(DeclarationSite {
                    site_id: site_id.clone(),
                    enclosing_type: from.clone(),
                    declared_type: to.clone(),
                    variable_name: format!("v{k}"),
                    used_members: Vec::new(),
                    location: SourceLocation::new(format!("{from}.java"), line, 1),
                });
                push_dep(&mut deps, from, to, kind, line, Some(site_id));
            }
            DependencyKind::Create => {
                let site_id = format!("c{k}");
                creation_sites.push(CreationSite {
                    site_id: site_id.clone(),
                    enclosing_type: from.clone(),
                    created_type: to.clone(),
                    arg_types: Vec::new(),
                    result_discarded: rng.gen_bool(0.5),
                    location: SourceLocation::new(format!("{from}.java"), line, 1),
                });
                push_dep(&mut deps, from, to, kind, line, Some(site_id));
            }
            _ => push_dep(&mut deps, from, to, kind, line, None),
        }
    }

    for t in entities {
        builder.push_type(t);
    }
    for d in deps {
        builder.push_dependency(d);
    }
    for s in decl_sites {
        builder.push_declaration_site(s);
    }
    for s in creation_sites {
        builder.push_creation_site(s);
    }
    let (db, warnings) = builder.build().expect("generated instance is valid");
    assert!(warnings.is_empty(), "generator should not produce dangling targets: {warnings:?}");

    let cs = constraints_for(rng, &ids, &used_externals);
    (db, cs)
}

fn constraints_for<R: Rng>(rng: &mut R, ids: &[String], used_externals: &[String]) -> ConstraintSet {
    let n_modules = rng.gen_range(0..=4usize);
    let mut modules = Vec::new();
    for m in 0..n_modules {
        let mut patterns = Vec::new();
        for _ in 0..rng.gen_range(1..=2u32) {
            patterns.push(match rng.gen_range(0..3) {
                0 => Pattern::Subtree(PACKAGES[rng.gen_range(0..PACKAGES.len())].to_string()),
                1 => Pattern::Segment(PACKAGES[rng.gen_range(0..PACKAGES.len())].to_string()),
                _ => Pattern::Exact(ids[rng.gen_range(0..ids.len())].clone()),
            });
        }
        modules.push(ModuleDef::new(format!("M{m}"), patterns));
    }

    let mut name_pool: Vec<String> = modules.iter().map(|m| m.name.clone()).collect();
    name_pool.push("$system".to_string());
    name_pool.push("$java".to_string());
    name_pool.extend(ids.iter().cloned());
    name_pool.extend(used_externals.iter().cloned());

    let n_constraints = rng.gen_range(1..=6usize);
    let mut constraints = Vec::new();
    for c in 0..n_constraints {
        let modality = *[Modality::OnlyCan, Modality::CanOnly, Modality::Cannot, Modality::Must]
            .choose(rng)
            .unwrap();
        let kind = ALL_KINDS[rng.gen_range(0..ALL_KINDS.len())];
        let origin = name_pool[rng.gen_range(0..name_pool.len())].clone();
        let n_targets = if modality == Modality::Must { 1 } else { rng.gen_range(1..=2usize) };
        let mut targets = Vec::new();
        for _ in 0..n_targets {
            targets.push(name_pool[rng.gen_range(0..name_pool.len())].clone());
        }
        constraints.push(Constraint { id: format!("R{c}"), modality, kind, origin, targets });
    }
    ConstraintSet { modules, constraints }
}

/// A random well-formed constraint set, for print/parse round-trips.
pub fn constraint_set<R: Rng>(rng: &mut R) -> ConstraintSet {
    let module_names = ["Alpha", "Beta", "Gamma", "Delta"];
    let packages = ["com.app.core", "com.app.web", "org.lib"];
    let types = ["com.app.core.Engine", "com.app.web.Page", "org.lib.Util", "Serializable"];

    let n_modules = rng.gen_range(0..=3usize);
    let mut modules = Vec::new();
    for name in module_names.iter().take(n_modules) {
        let mut patterns = Vec::new();
        for _ in 0..rng.gen_range(1..=3u32) {
            patterns.push(match rng.gen_range(0..3) {
                0 => Pattern::Subtree(packages[rng.gen_range(0..packages.len())].to_string()),
                1 => Pattern::Segment(packages[rng.gen_range(0..packages.len())].to_string()),
                _ => Pattern::Exact(types[rng.gen_range(0..types.len())].to_string()),
            });
        }
        modules.push(ModuleDef::new(name.to_string(), patterns));
    }

    let mut name_pool: Vec<&str> = module_names[..n_modules].to_vec();
    name_pool.extend(["$system", "$java", "JavaAPI"]);
    name_pool.extend(types);

    let n_constraints = rng.gen_range(1..=5usize);
    let mut constraints = Vec::new();
    for c in 0..n_constraints {
        let modality = *[Modality::OnlyCan, Modality::CanOnly, Modality::Cannot, Modality::Must]
            .choose(rng)
            .unwrap();
        let kind = ALL_KINDS[rng.gen_range(0..ALL_KINDS.len())];
        let origin = name_pool[rng.gen_range(0..name_pool.len())].to_string();
        let n_targets = if modality == Modality::Must { 1 } else { rng.gen_range(1..=3usize) };
        let targets: Vec<String> = (0..n_targets)
            .map(|_| name_pool[rng.gen_range(0..name_pool.len())].to_string())
            .collect();
        constraints.push(Constraint { id: format!("R{c}"), modality, kind, origin, targets });
    }
    ConstraintSet { modules, constraints }
}

/// A random subset-grammar corpus: classes, interfaces and annotations with
/// headers, fields and small method bodies.
pub fn corpus<R: Rng>(rng: &mut R) -> Corpus {
    let n = rng.gen_range(3..=10usize);
    let packages = ["ra", "rb", "rc"];
    #[derive(Clone)]
    struct Decl {
        fqn: String,
        pkg: &'static str,
        name: String,
        kind: u8, // 0 class, 1 interface, 2 annotation
    }
    let mut decls: Vec<Decl> = Vec::new();
    for i in 0..n {
        let pkg = packages[rng.gen_range(0..packages.len())];
        let name = format!("C{i}");
        let kind = match rng.gen_range(0..10) {
            0..=6 => 0,
            7..=8 => 1,
            _ => 2,
        };
        decls.push(Decl { fqn: format!("{pkg}.{name}"), pkg, name, kind });
    }

    let mut files = Vec::new();
    for (i, d) in decls.iter().enumerate() {
        let mut imports: Vec<String> = Vec::new();
        let mut body = String::new();
        let mut header_suffix = String::new();

        let prev_classes: Vec<&Decl> = decls[..i].iter().filter(|p| p.kind == 0).collect();
        let prev_interfaces: Vec<&Decl> = decls[..i].iter().filter(|p| p.kind == 1).collect();
        let prev_annotations: Vec<&Decl> = decls[..i].iter().filter(|p| p.kind == 2).collect();

        let mut annotation_line = String::new();
        if d.kind != 2 && !prev_annotations.is_empty() && rng.gen_bool(0.3) {
            let a = prev_annotations[rng.gen_range(0..prev_annotations.len())];
            imports.push(a.fqn.clone());
            annotation_line = format!("@{}\n", a.name);
        }

        match d.kind {
            0 => {
                if !prev_classes.is_empty() && rng.gen_bool(0.4) {
                    let sup = prev_classes[rng.gen_range(0..prev_classes.len())];
                    imports.push(sup.fqn.clone());
                    header_suffix.push_str(&format!(" extends {}", sup.name));
                }
                if !prev_interfaces.is_empty() && rng.gen_bool(0.4) {
                    let sup = prev_interfaces[rng.gen_range(0..prev_interfaces.len())];
                    imports.push(sup.fqn.clone());
                    header_suffix.push_str(&format!(" implements {}", sup.name));
                }
                let mut fields = String::new();
                for f in 0..rng.gen_range(0..=2u32) {
                    if !prev_classes.is_empty() && rng.gen_bool(0.5) {
                        let ft = prev_classes[rng.gen_range(0..prev_classes.len())];
                        imports.push(ft.fqn.clone());
                        fields.push_str(&format!("    {} f{f};\n", ft.name));
                    } else {
                        fields.push_str(&format!("    String f{f};\n"));
                    }
                }
                let mut method = String::from("    public void run() {\n");
                if !prev_classes.is_empty() && rng.gen_bool(0.7) {
                    let t = prev_classes[rng.gen_range(0..prev_classes.len())];
                    imports.push(t.fqn.clone());
                    method.push_str(&format!("        {} v = new {}();\n", t.name, t.name));
                    method.push_str("        v.run();\n");
                }
                if rng.gen_bool(0.3) {
                    method.push_str(
                        "        try {\n            this.run();\n        } catch (ext.Err e) {\n        }\n",
                    );
                }
                method.push_str("    }\n");
                body = format!("{fields}{method}");
            }
            1 => {
                body = "    void run();\n".to_string();
            }
            2 => {
                body = String::new();
            }
            _ => unreachable!(),
        }

        imports.sort();
        imports.dedup();
        imports.retain(|imp| imp.rsplit('.').next() != Some(&d.name));
        let import_lines: String =
            imports.iter().map(|i| format!("import {i};\n")).collect();
        let keyword = match d.kind {
            0 => "class",
            1 => "interface",
            _ => "@interface",
        };
        let content = format!(
            "package {};\n\n{import_lines}\n{annotation_line}public {keyword} {} {{\n{body}}}\n",
            d.pkg, d.name
        );
        files.push((format!("{}/{}.java", d.pkg.replace('.', "/"), d.name), content));
    }

    Corpus { files, dcl: String::new() }
}
