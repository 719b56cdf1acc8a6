//! Class signature closures: each class's flattened nominal interface plus the
//! signatures of every class name it reaches.
//!
//! Inheritance here is additive. A subclass signature is its parent's signature
//! with the subclass's own members added, and inherited member signatures are
//! copied verbatim: a class name means the same thing in every class that
//! inherits a member mentioning it.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::nominal::{check_override, OverrideViolation};
use crate::syntax::{class_graph, ClassDecl, ClassGraph, ClassName, Label, Program, SyntaxError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodSig {
    pub params: Vec<ClassName>,
    pub ret: ClassName,
}

impl std::fmt::Display for MethodSig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let params: Vec<&str> = self.params.iter().map(ClassName::as_str).collect();
        write!(f, "({}) -> {}", params.join(", "), self.ret)
    }
}

/// A class's full member interface. Field order is declaration order with
/// ancestor fields first, which is also the constructor's argument order.
/// Equality ignores entry order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSignature {
    pub name: ClassName,
    /// Direct supertypes. Single inheritance keeps this at length one (empty for `Object`).
    pub super_names: Vec<ClassName>,
    pub fields: IndexMap<Label, ClassName>,
    pub methods: IndexMap<Label, MethodSig>,
}

impl ClassSignature {
    pub fn object() -> Self {
        ClassSignature {
            name: ClassName::object(),
            super_names: Vec::new(),
            fields: IndexMap::new(),
            methods: IndexMap::new(),
        }
    }

    /// Class names occurring anywhere in this signature.
    pub fn mentioned_names(&self) -> impl Iterator<Item = &ClassName> {
        self.super_names
            .iter()
            .chain(self.fields.values())
            .chain(
                self.methods
                    .values()
                    .flat_map(|m| m.params.iter().chain(std::iter::once(&m.ret))),
            )
    }
}

/// A signature together with everything it reaches, closed under name reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureClosure {
    pub root: ClassName,
    pub table: BTreeMap<ClassName, ClassSignature>,
}

impl SignatureClosure {
    pub fn root_signature(&self) -> &ClassSignature {
        &self.table[&self.root]
    }

    /// Every name mentioned by a signature in the table is itself a key.
    pub fn is_closed(&self) -> bool {
        self.table.contains_key(&self.root)
            && self
                .table
                .values()
                .all(|sig| sig.mentioned_names().all(|n| self.table.contains_key(n)))
    }

    /// Recomputes the closure of `root` from this table alone.
    pub fn reclose(&self) -> SignatureClosure {
        close_over(&self.root, &self.table)
    }

    /// The `extends` chain recorded in the closure, starting at the root.
    pub fn ancestry(&self) -> impl Iterator<Item = &ClassName> {
        std::iter::successors(Some(&self.root), move |c| {
            self.table.get(*c).and_then(|s| s.super_names.first())
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("class `{class}` redeclares inherited field `{label}`")]
    FieldShadowing { class: ClassName, label: Label },
    #[error("class `{class}` overrides `{label}` illegally: {violation}")]
    IllegalOverride {
        class: ClassName,
        label: Label,
        violation: OverrideViolation,
    },
    #[error("unknown class `{0}`")]
    UnknownClass(ClassName),
}

impl SignatureError {
    pub fn code(&self) -> &'static str {
        match self {
            SignatureError::Syntax(e) => e.code(),
            SignatureError::FieldShadowing { .. } => "SIG001",
            SignatureError::IllegalOverride { .. } => "NOM004",
            SignatureError::UnknownClass(_) => "SYN005",
        }
    }
}

/// Adds `decl`'s own members to its parent's signature.
fn extend_signature(
    graph: &ClassGraph,
    parent: &ClassSignature,
    decl: &ClassDecl,
) -> Result<ClassSignature, SignatureError> {
    let mut sig = ClassSignature {
        name: decl.name.clone(),
        super_names: vec![decl.super_name.clone()],
        fields: parent.fields.clone(),
        methods: parent.methods.clone(),
    };
    for field in &decl.fields {
        if sig.fields.contains_key(&field.name) {
            return Err(SignatureError::FieldShadowing {
                class: decl.name.clone(),
                label: field.name.clone(),
            });
        }
        sig.fields.insert(field.name.clone(), field.ty.clone());
    }
    for method in &decl.methods {
        let own = MethodSig {
            params: method.param_types().cloned().collect(),
            ret: method.ret.clone(),
        };
        if let Some(inherited) = parent.methods.get(&method.name) {
            check_override(graph, inherited, &own).map_err(|violation| {
                SignatureError::IllegalOverride {
                    class: decl.name.clone(),
                    label: method.name.clone(),
                    violation,
                }
            })?;
        }
        // Overrides keep the inherited slot's position.
        sig.methods.insert(method.name.clone(), own);
    }
    Ok(sig)
}

/// Flattened signature of one class.
pub fn build_signature(program: &Program, class: &ClassName) -> Result<ClassSignature, SignatureError> {
    let graph = class_graph(program)?;
    if !program.has_class(class) {
        return Err(SignatureError::UnknownClass(class.clone()));
    }
    let chain: Vec<&ClassName> = graph.ancestors(class).collect();
    let mut sig = ClassSignature::object();
    for name in chain.into_iter().rev().skip(1) {
        let decl = program.class(name).expect("resolved program");
        sig = extend_signature(&graph, &sig, decl)?;
    }
    Ok(sig)
}

/// The signature closure of one class.
pub fn build_closure(program: &Program, class: &ClassName) -> Result<SignatureClosure, SignatureError> {
    let table = SignatureTable::build(program)?;
    table
        .closure(class)
        .map(|c| (**c).clone())
        .ok_or_else(|| SignatureError::UnknownClass(class.clone()))
}

/// Closures compare as finite maps; source order and position play no part.
pub fn signature_equals(a: &SignatureClosure, b: &SignatureClosure) -> bool {
    a == b
}

fn close_over(root: &ClassName, sigs: &BTreeMap<ClassName, ClassSignature>) -> SignatureClosure {
    let mut table = BTreeMap::new();
    let mut pending: BTreeSet<&ClassName> = BTreeSet::from([root]);
    while let Some(name) = pending.pop_first() {
        if table.contains_key(name) {
            continue;
        }
        let Some(sig) = sigs.get(name) else { continue };
        pending.extend(sig.mentioned_names().filter(|n| !table.contains_key(*n)));
        table.insert(name.clone(), sig.clone());
    }
    SignatureClosure {
        root: root.clone(),
        table,
    }
}

/// Signatures and closures of every class in a program, computed eagerly.
#[derive(Debug, Clone)]
pub struct SignatureTable {
    graph: ClassGraph,
    sigs: BTreeMap<ClassName, ClassSignature>,
    closures: BTreeMap<ClassName, Arc<SignatureClosure>>,
}

impl SignatureTable {
    pub fn build(program: &Program) -> Result<Self, SignatureError> {
        let graph = class_graph(program)?;
        let mut sigs = BTreeMap::new();
        sigs.insert(ClassName::object(), ClassSignature::object());
        for name in graph.topological() {
            let decl = program.class(&name).expect("graph built from program");
            let sig = extend_signature(&graph, &sigs[&decl.super_name], decl)?;
            sigs.insert(name, sig);
        }
        let closures = sigs
            .keys()
            .map(|name| (name.clone(), Arc::new(close_over(name, &sigs))))
            .collect();
        Ok(SignatureTable {
            graph,
            sigs,
            closures,
        })
    }

    pub fn graph(&self) -> &ClassGraph {
        &self.graph
    }

    pub fn signature(&self, class: &ClassName) -> Option<&ClassSignature> {
        self.sigs.get(class)
    }

    pub fn closure(&self, class: &ClassName) -> Option<&Arc<SignatureClosure>> {
        self.closures.get(class)
    }

    pub fn signatures(&self) -> impl Iterator<Item = &ClassSignature> {
        self.sigs.values()
    }
}

/// Deterministic JSON dump: classes sorted by name, members sorted by label.
pub fn dump_json(program: &Program, table: &SignatureTable) -> String {
    #[derive(Serialize)]
    struct FieldOut<'a> {
        label: &'a str,
        #[serde(rename = "type")]
        ty: &'a str,
    }
    #[derive(Serialize)]
    struct MethodOut<'a> {
        label: &'a str,
        params: Vec<&'a str>,
        ret: &'a str,
    }
    #[derive(Serialize)]
    struct ClassOut<'a> {
        name: &'a str,
        #[serde(rename = "super")]
        super_names: Vec<&'a str>,
        fields: Vec<FieldOut<'a>>,
        methods: Vec<MethodOut<'a>>,
        closure: Vec<&'a str>,
        contracts: Vec<&'a str>,
    }
    #[derive(Serialize)]
    struct Dump<'a> {
        classes: Vec<ClassOut<'a>>,
    }

    let classes = table
        .signatures()
        .map(|sig| {
            let mut fields: Vec<FieldOut> = sig
                .fields
                .iter()
                .map(|(l, t)| FieldOut {
                    label: l.as_str(),
                    ty: t.as_str(),
                })
                .collect();
            fields.sort_by_key(|f| f.label);
            let mut methods: Vec<MethodOut> = sig
                .methods
                .iter()
                .map(|(l, m)| MethodOut {
                    label: l.as_str(),
                    params: m.params.iter().map(ClassName::as_str).collect(),
                    ret: m.ret.as_str(),
                })
                .collect();
            methods.sort_by_key(|m| m.label);
            let closure = table.closure(&sig.name).expect("closure for every signature");
            ClassOut {
                name: sig.name.as_str(),
                super_names: sig.super_names.iter().map(ClassName::as_str).collect(),
                fields,
                methods,
                closure: closure.table.keys().map(ClassName::as_str).collect(),
                contracts: program
                    .class(&sig.name)
                    .map(|d| d.contracts.iter().map(String::as_str).collect())
                    .unwrap_or_default(),
            }
        })
        .collect();
    serde_json::to_string_pretty(&Dump { classes }).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn sig(src: &str, class: &str) -> ClassSignature {
        build_signature(&parse_program(src).unwrap(), &class.into()).unwrap()
    }

    fn closure_names(src: &str, class: &str) -> Vec<String> {
        build_closure(&parse_program(src).unwrap(), &class.into())
            .unwrap()
            .table
            .keys()
            .map(|c| c.to_string())
            .collect()
    }

    fn msig(params: &[&str], ret: &str) -> MethodSig {
        MethodSig {
            params: params.iter().map(|p| ClassName::new(*p)).collect(),
            ret: ret.into(),
        }
    }

    const POINT: &str = "class P { P eq(P p) { return p; } } class CP extends P { CP c; }";
    const CHAIN: &str = "class A { A id(A a) { return a; } } class B extends A { Object b; } class C extends B { Object c; }";

    #[test]
    fn object_signature_is_empty() {
        let s = sig("", "Object");
        assert!(s.fields.is_empty() && s.methods.is_empty() && s.super_names.is_empty());
    }

    #[test]
    fn inherited_binary_method_keeps_parent_parameter_type() {
        let cp = sig(POINT, "CP");
        assert_eq!(cp.methods[&Label::new("eq")], msig(&["P"], "P"));
        assert_eq!(cp.fields[&Label::new("c")], ClassName::new("CP"));
        assert_eq!(cp.super_names, vec![ClassName::new("P")]);
    }

    #[test]
    fn three_level_chain_flattens_by_hand() {
        let c = sig(CHAIN, "C");
        let mut expected_fields = IndexMap::new();
        expected_fields.insert(Label::new("b"), ClassName::object());
        expected_fields.insert(Label::new("c"), ClassName::object());
        let mut expected_methods = IndexMap::new();
        expected_methods.insert(Label::new("id"), msig(&["A"], "A"));
        assert_eq!(c.fields, expected_fields);
        assert_eq!(c.methods, expected_methods);
        // Constructor order: ancestor fields first.
        assert_eq!(c.fields.keys().map(Label::as_str).collect::<Vec<_>>(), ["b", "c"]);
    }

    #[test]
    fn field_shadowing_rejected() {
        let p = parse_program("class A { Object f; } class B extends A { A f; }").unwrap();
        assert_eq!(
            SignatureTable::build(&p).unwrap_err(),
            SignatureError::FieldShadowing {
                class: "B".into(),
                label: "f".into()
            }
        );
    }

    #[test]
    fn illegal_override_surfaces_with_its_code() {
        let p = parse_program(
            "class P { P eq(P p) { return p; } } class CP extends P { P eq(CP p) { return p; } }",
        )
        .unwrap();
        let err = SignatureTable::build(&p).unwrap_err();
        assert_eq!(err.code(), "NOM004");
        assert!(matches!(err, SignatureError::IllegalOverride { ref label, .. } if label == "eq"));
    }

    #[test]
    fn override_replaces_in_place() {
        let s = sig(
            "class A { A m() { return this; } A n() { return this; } } class B extends A { B m() { return this; } }",
            "B",
        );
        assert_eq!(s.methods.keys().map(Label::as_str).collect::<Vec<_>>(), ["m", "n"]);
        assert_eq!(s.methods[&Label::new("m")], msig(&[], "B"));
    }

    #[test]
    fn closures() {
        assert_eq!(closure_names("", "Object"), ["Object"]);
        assert_eq!(closure_names("class P { P eq(P p) { return p; } }", "P"), ["Object", "P"]);
        assert_eq!(closure_names("class A { B f; } class B { A g; }", "A"), ["A", "B", "Object"]);
        assert_eq!(closure_names(CHAIN, "C"), ["A", "B", "C", "Object"]);
        // True/False only show up when referenced.
        assert_eq!(closure_names("class A { True t; }", "A"), ["A", "Object", "True"]);
    }

    #[test]
    fn closure_is_closed_and_idempotent() {
        let p = parse_program(CHAIN).unwrap();
        let table = SignatureTable::build(&p).unwrap();
        for name in p.all_names() {
            let c = table.closure(&name).unwrap();
            assert!(c.is_closed());
            assert_eq!(&c.reclose(), &**c);
        }
    }

    #[test]
    fn closure_equality() {
        let p1 = parse_program("class P { P eq(P p) { return p; } }").unwrap();
        let p2 = parse_program(
            "class Unrelated { Object u; }\n// moved down\nclass P { P eq(P other) { return this; } }",
        )
        .unwrap();
        let c1 = build_closure(&p1, &"P".into()).unwrap();
        assert!(signature_equals(&c1, &c1.clone()));
        assert!(!signature_equals(&c1, &build_closure(&p1, &"Object".into()).unwrap()));
        assert!(signature_equals(&c1, &build_closure(&p2, &"P".into()).unwrap()));
    }

    #[test]
    fn closure_records_ancestry() {
        let c = build_closure(&parse_program(CHAIN).unwrap(), &"C".into()).unwrap();
        let chain: Vec<&str> = c.ancestry().map(ClassName::as_str).collect();
        assert_eq!(chain, ["C", "B", "A", "Object"]);
    }

    #[test]
    fn dump_is_sorted_and_deterministic() {
        let p = parse_program("class Z { Object b; Object a; Z m(Z z) { return z; } Z k() { return this; } } class A { }").unwrap();
        let table = SignatureTable::build(&p).unwrap();
        let out = dump_json(&p, &table);
        assert_eq!(out, dump_json(&p, &SignatureTable::build(&p).unwrap()));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let names: Vec<&str> = v["classes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["name"].as_str().unwrap())
            .collect();
        assert_eq!(names, ["A", "False", "Object", "True", "Z"]);
        let z = &v["classes"][4];
        assert_eq!(z["fields"][0]["label"], "a");
        assert_eq!(z["methods"][0]["label"], "k");
        assert_eq!(z["closure"], serde_json::json!(["Object", "Z"]));
    }
}
