//! The nominal discipline: subtyping is declared ancestry, class names keep
//! their meaning under inheritance, and overriding follows the contravariant
//! parameter / covariant return rule.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::signatures::{MethodSig, SignatureError, SignatureTable};
use crate::syntax::{ClassGraph, ClassName, Expr, Label, Program, SyntaxError, VarName};

/// `sub <: sup` iff `sup` lies on `sub`'s `extends` chain.
pub fn nominal_subtype(graph: &ClassGraph, sub: &ClassName, sup: &ClassName) -> bool {
    graph.ancestors(sub).any(|c| c == sup)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OverrideViolation {
    Arity { expected: usize, found: usize },
    /// The overriding parameter must be a supertype of the inherited one.
    Parameter {
        index: usize,
        inherited: ClassName,
        found: ClassName,
    },
    /// The overriding return type must be a subtype of the inherited one.
    Return { inherited: ClassName, found: ClassName },
}

impl fmt::Display for OverrideViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OverrideViolation::Arity { expected, found } => {
                write!(f, "expected {expected} parameter(s), found {found}")
            }
            OverrideViolation::Parameter {
                index,
                inherited,
                found,
            } => write!(
                f,
                "parameter {} has type `{found}`, which must be a supertype of `{inherited}`",
                index + 1
            ),
            OverrideViolation::Return { inherited, found } => write!(
                f,
                "return type `{found}` must be a subtype of `{inherited}`"
            ),
        }
    }
}

pub fn check_override(
    graph: &ClassGraph,
    inherited: &MethodSig,
    child: &MethodSig,
) -> Result<(), OverrideViolation> {
    if inherited.params.len() != child.params.len() {
        return Err(OverrideViolation::Arity {
            expected: inherited.params.len(),
            found: child.params.len(),
        });
    }
    for (index, (parent_ty, child_ty)) in inherited.params.iter().zip(&child.params).enumerate() {
        if !nominal_subtype(graph, parent_ty, child_ty) {
            return Err(OverrideViolation::Parameter {
                index,
                inherited: parent_ty.clone(),
                found: child_ty.clone(),
            });
        }
    }
    if !nominal_subtype(graph, &child.ret, &inherited.ret) {
        return Err(OverrideViolation::Return {
            inherited: inherited.ret.clone(),
            found: child.ret.clone(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemberKind {
    Field,
    Method,
}

impl fmt::Display for MemberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MemberKind::Field => "field",
            MemberKind::Method => "method",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NominalError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("class `{class}` has no {kind} `{label}`")]
    UnknownMember {
        class: ClassName,
        kind: MemberKind,
        label: Label,
    },
    #[error("{site} expects {expected} argument(s), found {found}")]
    ArityMismatch {
        site: String,
        expected: usize,
        found: usize,
    },
    #[error("{site}: `{found}` is not a subtype of `{expected}`")]
    ArgumentTypeMismatch {
        site: String,
        expected: ClassName,
        found: ClassName,
    },
    #[error("cast from `{from}` to unrelated class `{to}`")]
    StupidCast { from: ClassName, to: ClassName },
    #[error("unbound variable `{0}`")]
    Unbound(String),
}

impl From<SyntaxError> for NominalError {
    fn from(e: SyntaxError) -> Self {
        NominalError::Signature(SignatureError::Syntax(e))
    }
}

impl NominalError {
    pub fn code(&self) -> &'static str {
        match self {
            NominalError::Signature(e) => e.code(),
            NominalError::UnknownMember { .. } => "NOM001",
            NominalError::ArityMismatch { .. } => "NOM002",
            NominalError::ArgumentTypeMismatch { .. } => "NOM003",
            NominalError::StupidCast { .. } => "NOM005",
            NominalError::Unbound(_) => "SYN005",
        }
    }
}

/// Variable typing context. `this` is bound only inside method bodies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnv {
    pub vars: HashMap<VarName, ClassName>,
    pub this: Option<ClassName>,
}

impl TypeEnv {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn with_this(class: ClassName) -> Self {
        TypeEnv {
            vars: HashMap::new(),
            this: Some(class),
        }
    }

    pub fn bind(mut self, var: &str, class: &str) -> Self {
        self.vars.insert(VarName::new(var), ClassName::new(class));
        self
    }
}

/// Nominal expression typing over a program's signature table.
pub struct NominalChecker<'a> {
    table: &'a SignatureTable,
}

impl<'a> NominalChecker<'a> {
    pub fn new(table: &'a SignatureTable) -> Self {
        NominalChecker { table }
    }

    fn subtype(&self, sub: &ClassName, sup: &ClassName) -> bool {
        nominal_subtype(self.table.graph(), sub, sup)
    }

    fn require_subtype(&self, found: ClassName, expected: &ClassName, site: impl FnOnce() -> String) -> Result<(), NominalError> {
        if self.subtype(&found, expected) {
            Ok(())
        } else {
            Err(NominalError::ArgumentTypeMismatch {
                site: site(),
                expected: expected.clone(),
                found,
            })
        }
    }

    pub fn type_expr(&self, env: &TypeEnv, expr: &Expr) -> Result<ClassName, NominalError> {
        match expr {
            Expr::Var(v) => env
                .vars
                .get(v)
                .cloned()
                .ok_or_else(|| NominalError::Unbound(v.to_string())),
            Expr::This => env
                .this
                .clone()
                .ok_or_else(|| NominalError::Unbound("this".to_owned())),
            Expr::FieldGet(recv, label) => {
                let class = self.type_expr(env, recv)?;
                let sig = self.signature(&class)?;
                sig.fields
                    .get(label)
                    .cloned()
                    .ok_or_else(|| NominalError::UnknownMember {
                        class,
                        kind: MemberKind::Field,
                        label: label.clone(),
                    })
            }
            Expr::Invoke(recv, label, args) => {
                let class = self.type_expr(env, recv)?;
                let sig = self.signature(&class)?;
                let method = sig.methods.get(label).ok_or_else(|| NominalError::UnknownMember {
                    class: class.clone(),
                    kind: MemberKind::Method,
                    label: label.clone(),
                })?;
                if method.params.len() != args.len() {
                    return Err(NominalError::ArityMismatch {
                        site: format!("method `{class}.{label}`"),
                        expected: method.params.len(),
                        found: args.len(),
                    });
                }
                for (i, (arg, param)) in args.iter().zip(&method.params).enumerate() {
                    let found = self.type_expr(env, arg)?;
                    self.require_subtype(found, param, || {
                        format!("argument {} of `{class}.{label}`", i + 1)
                    })?;
                }
                Ok(method.ret.clone())
            }
            Expr::New(class, args) => {
                let sig = self.signature(class)?;
                if sig.fields.len() != args.len() {
                    return Err(NominalError::ArityMismatch {
                        site: format!("constructor of `{class}`"),
                        expected: sig.fields.len(),
                        found: args.len(),
                    });
                }
                for (arg, (label, field_ty)) in args.iter().zip(&sig.fields) {
                    let found = self.type_expr(env, arg)?;
                    self.require_subtype(found, field_ty, || {
                        format!("field `{label}` of `new {class}`")
                    })?;
                }
                Ok(class.clone())
            }
            Expr::Cast(target, inner) => {
                let from = self.type_expr(env, inner)?;
                if self.subtype(&from, target) || self.subtype(target, &from) {
                    Ok(target.clone())
                } else {
                    Err(NominalError::StupidCast {
                        from,
                        to: target.clone(),
                    })
                }
            }
            Expr::InstanceOf(inner, class) => {
                self.type_expr(env, inner)?;
                self.signature(class)?;
                Ok(ClassName::object())
            }
        }
    }

    fn signature(&self, class: &ClassName) -> Result<&'a crate::signatures::ClassSignature, NominalError> {
        self.table
            .signature(class)
            .ok_or_else(|| SignatureError::UnknownClass(class.clone()).into())
    }
}

/// Types one expression against a program.
pub fn type_expr(program: &Program, env: &TypeEnv, expr: &Expr) -> Result<ClassName, NominalError> {
    let table = SignatureTable::build(program)?;
    NominalChecker::new(&table).type_expr(env, expr)
}

/// Outcome of checking a whole program nominally.
#[derive(Debug, Clone)]
pub struct NominalCheck {
    pub table: SignatureTable,
    pub main_type: Option<ClassName>,
}

/// Checks signatures, every method body and the main expression. Body errors
/// are collected across methods; signature errors stop the check.
pub fn check_program(program: &Program) -> Result<NominalCheck, Vec<NominalError>> {
    let table = SignatureTable::build(program).map_err(|e| vec![e.into()])?;
    let checker = NominalChecker::new(&table);
    let mut errors = Vec::new();
    for class in program.classes() {
        for method in &class.methods {
            let mut env = TypeEnv::with_this(class.name.clone());
            for p in &method.params {
                env.vars.insert(p.name.clone(), p.ty.clone());
            }
            let outcome = checker.type_expr(&env, &method.body).and_then(|found| {
                checker.require_subtype(found, &method.ret, || {
                    format!("body of `{}.{}`", class.name, method.name)
                })
            });
            if let Err(e) = outcome {
                errors.push(e);
            }
        }
    }
    let main_type = match program.main() {
        Some(main) => match checker.type_expr(&TypeEnv::empty(), main) {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(e);
                None
            }
        },
        None => None,
    };
    if errors.is_empty() {
        Ok(NominalCheck { table, main_type })
    } else {
        Err(errors)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InheritanceEntry {
    pub sub: ClassName,
    pub sup: ClassName,
    pub inherits: bool,
    pub subtype: bool,
}

/// The full ordered-pair matrix comparing declared inheritance with nominal subtyping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InheritanceReport {
    pub classes: Vec<ClassName>,
    pub entries: Vec<InheritanceEntry>,
}

impl InheritanceReport {
    pub fn violations(&self) -> impl Iterator<Item = &InheritanceEntry> {
        self.entries.iter().filter(|e| e.inherits != e.subtype)
    }

    pub fn holds(&self) -> bool {
        self.violations().next().is_none()
    }
}

/// Inheritance as the reflexive-transitive closure of the declared `extends`
/// edges, computed by saturation straight from the class declarations.
fn declared_inheritance(program: &Program, names: &[ClassName]) -> BTreeSet<(ClassName, ClassName)> {
    let mut rel: BTreeSet<(ClassName, ClassName)> =
        names.iter().map(|n| (n.clone(), n.clone())).collect();
    for decl in program.classes() {
        rel.insert((decl.name.clone(), decl.super_name.clone()));
    }
    loop {
        let mut added = Vec::new();
        for (a, b) in &rel {
            for (c, d) in rel.range((b.clone(), ClassName::new(""))..) {
                if c != b {
                    break;
                }
                if !rel.contains(&(a.clone(), d.clone())) {
                    added.push((a.clone(), d.clone()));
                }
            }
        }
        if added.is_empty() {
            return rel;
        }
        rel.extend(added);
    }
}

/// Checks, for every ordered pair of classes, that nominal subtyping coincides
/// with inheritance.
pub fn verify_inheritance_is_subtyping(program: &Program) -> Result<InheritanceReport, NominalError> {
    let table = SignatureTable::build(program)?;
    let classes = program.audited_names();
    let inherits = declared_inheritance(program, &classes);
    let mut entries = Vec::with_capacity(classes.len() * classes.len());
    for sub in &classes {
        for sup in &classes {
            entries.push(InheritanceEntry {
                sub: sub.clone(),
                sup: sup.clone(),
                inherits: inherits.contains(&(sub.clone(), sup.clone())),
                subtype: nominal_subtype(table.graph(), sub, sup),
            });
        }
    }
    Ok(InheritanceReport { classes, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{class_graph, parse_program};

    const POINT: &str = "class Point { Object x; Point eq(Point p) { return p; } } class ColorPoint extends Point { Object c; }";

    fn graph(src: &str) -> ClassGraph {
        class_graph(&parse_program(src).unwrap()).unwrap()
    }

    fn sig(params: &[&str], ret: &str) -> MethodSig {
        MethodSig {
            params: params.iter().map(|p| ClassName::new(*p)).collect(),
            ret: ret.into(),
        }
    }

    fn ty(src: &str, env: TypeEnv, expr: &str) -> Result<ClassName, NominalError> {
        let p = parse_program(src).unwrap();
        let e = parse_program(&format!("{src}\n{expr}"))
            .map(|q| q.main().cloned().unwrap())
            .unwrap_or_else(|_| {
                // Expressions with free variables do not resolve as a main expression.
                crate::syntax::parse_unresolved(expr).unwrap().1.unwrap()
            });
        type_expr(&p, &env, &e)
    }

    #[test]
    fn subtyping_basics() {
        let g = graph(POINT);
        let (cp, p, o): (ClassName, ClassName, ClassName) =
            ("ColorPoint".into(), "Point".into(), "Object".into());
        assert!(nominal_subtype(&g, &cp, &cp));
        assert!(nominal_subtype(&g, &cp, &o) && nominal_subtype(&g, &p, &o));
        assert!(nominal_subtype(&g, &cp, &p));
        assert!(!nominal_subtype(&g, &p, &cp));
        assert!(!nominal_subtype(&g, &o, &p));
    }

    #[test]
    fn override_rule() {
        let g = graph(POINT);
        assert_eq!(check_override(&g, &sig(&["Point"], "Point"), &sig(&["Point"], "Point")), Ok(()));
        // Object is above Point, so widening the parameter is fine.
        assert!(nominal_subtype(&g, &"Point".into(), &"Object".into()));
        assert_eq!(check_override(&g, &sig(&["Point"], "Point"), &sig(&["Object"], "Point")), Ok(()));
        assert_eq!(
            check_override(&g, &sig(&["Point"], "Point"), &sig(&["ColorPoint"], "Point")),
            Err(OverrideViolation::Parameter {
                index: 0,
                inherited: "Point".into(),
                found: "ColorPoint".into()
            })
        );
        assert_eq!(check_override(&g, &sig(&[], "Point"), &sig(&[], "ColorPoint")), Ok(()));
        assert!(matches!(
            check_override(&g, &sig(&[], "Point"), &sig(&[], "Object")),
            Err(OverrideViolation::Return { .. })
        ));
        assert!(matches!(
            check_override(&g, &sig(&["Point"], "Point"), &sig(&[], "Point")),
            Err(OverrideViolation::Arity { expected: 1, found: 0 })
        ));
    }

    #[test]
    fn binary_invocation_types() {
        let p_src = "class P { P eq(P p) { return p; } }";
        assert_eq!(ty(p_src, TypeEnv::empty().bind("p", "P"), "p.eq(p)").unwrap(), "P");
        // The inherited method still takes a Point; a ColorPoint argument is accepted by subsumption.
        assert_eq!(
            ty(POINT, TypeEnv::empty().bind("cp", "ColorPoint"), "cp.eq(cp)").unwrap(),
            "Point"
        );
    }

    #[test]
    fn casts() {
        assert_eq!(
            ty(POINT, TypeEnv::empty(), "(ColorPoint) new Point(new Object())").unwrap(),
            "ColorPoint"
        );
        assert_eq!(
            ty(POINT, TypeEnv::empty(), "(Object) new Point(new Object())").unwrap(),
            "Object"
        );
        let err = ty(
            &format!("{POINT} class Other {{ }}"),
            TypeEnv::empty(),
            "(Other) new Point(new Object())",
        )
        .unwrap_err();
        assert_eq!(err.code(), "NOM005");
    }

    #[test]
    fn instanceof_is_object_typed() {
        assert_eq!(
            ty(POINT, TypeEnv::empty(), "new Point(new Object()) instanceof ColorPoint").unwrap(),
            "Object"
        );
    }

    #[test]
    fn error_codes() {
        let env = || TypeEnv::empty().bind("p", "Point");
        assert_eq!(ty(POINT, env(), "p.nope").unwrap_err().code(), "NOM001");
        assert_eq!(ty(POINT, env(), "p.nope()").unwrap_err().code(), "NOM001");
        assert_eq!(ty(POINT, env(), "p.eq()").unwrap_err().code(), "NOM002");
        assert_eq!(ty(POINT, env(), "new Point()").unwrap_err().code(), "NOM002");
        assert_eq!(ty(POINT, env(), "p.eq(new Object())").unwrap_err().code(), "NOM003");
        assert_eq!(ty(POINT, env(), "p.x.eq(p)").unwrap_err().code(), "NOM001");
        let cyc = parse_program("class A extends B {} class B extends A {}").unwrap();
        assert_eq!(
            type_expr(&cyc, &TypeEnv::empty(), &Expr::This).unwrap_err().code(),
            "NOM006"
        );
    }

    #[test]
    fn field_and_method_namespaces_are_separate() {
        let src = "class A { Object f; A f() { return this; } }";
        assert_eq!(ty(src, TypeEnv::empty().bind("a", "A"), "a.f").unwrap(), "Object");
        assert_eq!(ty(src, TypeEnv::empty().bind("a", "A"), "a.f()").unwrap(), "A");
    }

    #[test]
    fn program_check_collects_body_errors() {
        let p = parse_program(
            "class A { A m() { return new Object(); } A n(A a) { return a.zip; } } new A()",
        )
        .unwrap();
        let errs = check_program(&p).unwrap_err();
        let codes: Vec<_> = errs.iter().map(NominalError::code).collect();
        assert_eq!(codes, ["NOM003", "NOM001"]);

        let ok = check_program(&parse_program(&format!("{POINT} new ColorPoint(new Object(), new Object()).eq(new Point(new Object()))")).unwrap()).unwrap();
        assert_eq!(ok.main_type, Some("Point".into()));
    }

    #[test]
    fn theorem_matrix_for_single_class() {
        let r = verify_inheritance_is_subtyping(&parse_program("class A {}").unwrap()).unwrap();
        assert_eq!(r.entries.len(), 4);
        assert!(r.holds());
        let a_obj = r.entries.iter().find(|e| e.sub == "A" && e.sup == "Object").unwrap();
        assert!(a_obj.inherits && a_obj.subtype);
    }

    #[test]
    fn theorem_matrix_for_points() {
        let r = verify_inheritance_is_subtyping(&parse_program(POINT).unwrap()).unwrap();
        assert_eq!(r.entries.len(), 9);
        assert!(r.holds());
        let e = r.entries.iter().find(|e| e.sub == "ColorPoint" && e.sup == "Point").unwrap();
        assert!(e.inherits && e.subtype);
    }

    #[test]
    fn declared_inheritance_saturates_long_chains() {
        let p = parse_program("class D extends C {} class C extends B {} class B extends A {} class A {}").unwrap();
        let names = p.audited_names();
        let rel = declared_inheritance(&p, &names);
        assert!(rel.contains(&("D".into(), "Object".into())));
        assert!(rel.contains(&("D".into(), "A".into())));
        assert!(!rel.contains(&("A".into(), "D".into())));
        assert_eq!(rel.len(), 5 + 4 + 3 + 2 + 1);
    }
}
