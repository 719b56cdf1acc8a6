use std::collections::HashMap;

use thiserror::Error;

use super::subtype::struct_subtype;
use super::translate::StructuralTypes;
use super::types::StructuralType;
use crate::nominal::MemberKind;
use crate::syntax::{ClassName, Expr, Label, Program, SyntaxError, VarName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("type `{ty}` has no {kind} `{label}`")]
    UnknownMember {
        ty: Box<StructuralType>,
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
        expected: Box<StructuralType>,
        found: Box<StructuralType>,
    },
    #[error("{construct} in {site}: no nominal information is available at run time")]
    RuntimeTypeTestUnavailable { construct: &'static str, site: String },
    #[error("unbound variable `{0}`")]
    Unbound(String),
}

impl StructuralError {
    pub fn code(&self) -> &'static str {
        match self {
            StructuralError::Syntax(e) => e.code(),
            StructuralError::UnknownMember { .. } => "STR001",
            StructuralError::ArityMismatch { .. } => "STR002",
            StructuralError::ArgumentTypeMismatch { .. } => "STR003",
            StructuralError::RuntimeTypeTestUnavailable { .. } => "STR004",
            StructuralError::Unbound(_) => "SYN005",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct StructEnv {
    pub vars: HashMap<VarName, StructuralType>,
    pub this: Option<StructuralType>,
}

impl StructEnv {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn bind(mut self, var: &str, ty: StructuralType) -> Self {
        self.vars.insert(VarName::new(var), ty);
        self
    }
}

/// Structural expression typing: class names mean their record types and
/// subsumption is structural subtyping.
pub struct StructuralChecker<'a> {
    program: &'a Program,
    types: StructuralTypes,
}

impl<'a> StructuralChecker<'a> {
    pub fn new(program: &'a Program) -> Result<Self, StructuralError> {
        Ok(StructuralChecker {
            program,
            types: StructuralTypes::build(program)?,
        })
    }

    pub fn types(&self) -> &StructuralTypes {
        &self.types
    }

    pub fn type_of(&self, class: &ClassName) -> &StructuralType {
        self.types.get(class).expect("resolved program names every class")
    }

    fn require_subtype(
        &self,
        found: StructuralType,
        expected: &StructuralType,
        site: impl FnOnce() -> String,
    ) -> Result<(), StructuralError> {
        if struct_subtype(&found, expected) {
            Ok(())
        } else {
            Err(StructuralError::ArgumentTypeMismatch {
                site: site(),
                expected: Box::new(expected.clone()),
                found: Box::new(found),
            })
        }
    }

    /// Types an expression; `site` names the enclosing declaration for diagnostics.
    pub fn type_expr(&self, env: &StructEnv, expr: &Expr, site: &str) -> Result<StructuralType, StructuralError> {
        match expr {
            Expr::Var(v) => env
                .vars
                .get(v)
                .cloned()
                .ok_or_else(|| StructuralError::Unbound(v.to_string())),
            Expr::This => env
                .this
                .clone()
                .ok_or_else(|| StructuralError::Unbound("this".to_owned())),
            Expr::FieldGet(recv, label) => {
                let ty = self.type_expr(env, recv, site)?;
                let record = ty.head_record();
                record
                    .fields
                    .get(label)
                    .cloned()
                    .ok_or_else(|| StructuralError::UnknownMember {
                        ty: Box::new(ty.clone()),
                        kind: MemberKind::Field,
                        label: label.clone(),
                    })
            }
            Expr::Invoke(recv, label, args) => {
                let ty = self.type_expr(env, recv, site)?;
                let mut record = ty.head_record();
                let Some(method) = record.methods.remove(label) else {
                    return Err(StructuralError::UnknownMember {
                        ty: Box::new(ty),
                        kind: MemberKind::Method,
                        label: label.clone(),
                    });
                };
                if method.params.len() != args.len() {
                    return Err(StructuralError::ArityMismatch {
                        site: format!("method `{label}`"),
                        expected: method.params.len(),
                        found: args.len(),
                    });
                }
                for (i, (arg, param)) in args.iter().zip(&method.params).enumerate() {
                    let found = self.type_expr(env, arg, site)?;
                    self.require_subtype(found, param, || format!("argument {} of `{label}`", i + 1))?;
                }
                Ok(method.ret)
            }
            Expr::New(class, args) => {
                let ty = self.type_of(class).clone();
                let record = ty.head_record();
                let layout = self.field_layout(class);
                if layout.len() != args.len() {
                    return Err(StructuralError::ArityMismatch {
                        site: format!("constructor of `{class}`"),
                        expected: layout.len(),
                        found: args.len(),
                    });
                }
                for (arg, label) in args.iter().zip(&layout) {
                    let found = self.type_expr(env, arg, site)?;
                    self.require_subtype(found, &record.fields[label], || {
                        format!("field `{label}` of `new {class}`")
                    })?;
                }
                Ok(ty)
            }
            Expr::Cast(..) => Err(StructuralError::RuntimeTypeTestUnavailable {
                construct: "cast",
                site: site.to_owned(),
            }),
            Expr::InstanceOf(..) => Err(StructuralError::RuntimeTypeTestUnavailable {
                construct: "instanceof",
                site: site.to_owned(),
            }),
        }
    }

    /// Constructor argument order: ancestor fields first, redeclared labels keep their slot.
    fn field_layout(&self, class: &ClassName) -> Vec<Label> {
        let mut chain: Vec<&ClassName> = self.types.graph().ancestors(class).collect();
        chain.reverse();
        let mut labels: Vec<Label> = Vec::new();
        for decl in chain.into_iter().filter_map(|c| self.program.class(c)) {
            for f in &decl.fields {
                if !labels.contains(&f.name) {
                    labels.push(f.name.clone());
                }
            }
        }
        labels
    }
}

/// Outcome of a structural check of a whole program.
#[derive(Debug, Clone)]
pub struct StructuralCheck {
    pub types: StructuralTypes,
    pub main_type: Option<StructuralType>,
}

/// Checks every method body in its declaring class and the main expression.
pub fn check_program_structural(program: &Program) -> Result<StructuralCheck, Vec<StructuralError>> {
    let checker = StructuralChecker::new(program).map_err(|e| vec![e])?;
    let mut errors = Vec::new();
    for class in program.classes() {
        let self_ty = checker.type_of(&class.name).clone();
        for method in &class.methods {
            let site = format!("method `{}.{}`", class.name, method.name);
            let mut env = StructEnv {
                vars: HashMap::new(),
                this: Some(self_ty.clone()),
            };
            for p in &method.params {
                env.vars.insert(p.name.clone(), checker.type_of(&p.ty).clone());
            }
            let outcome = checker.type_expr(&env, &method.body, &site).and_then(|found| {
                checker.require_subtype(found, checker.type_of(&method.ret), || format!("body of {site}"))
            });
            if let Err(e) = outcome {
                errors.push(e);
            }
        }
    }
    let main_type = match program.main() {
        Some(main) => match checker.type_expr(&StructEnv::empty(), main, "the main expression") {
            Ok(t) => Some(t),
            Err(e) => {
                errors.push(e);
                None
            }
        },
        None => None,
    };
    if errors.is_empty() {
        Ok(StructuralCheck {
            types: checker.types,
            main_type,
        })
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_program, parse_unresolved};

    const POINT: &str = "class P { Object x; P eq(P p) { return p; } } class CP extends P { Object c; }";

    fn expr(src: &str) -> Expr {
        parse_unresolved(src).unwrap().1.unwrap()
    }

    #[test]
    fn binary_call_at_the_declaring_class() {
        let p = parse_program(POINT).unwrap();
        let ch = StructuralChecker::new(&p).unwrap();
        let tp = ch.type_of(&"P".into()).clone();
        let env = StructEnv::empty().bind("p", tp.clone());
        let result = ch.type_expr(&env, &expr("p.eq(p)"), "test").unwrap();
        assert!(crate::structural::type_equivalent(&result, &tp));
    }

    #[test]
    fn binary_call_on_subclass_rejects_plain_parent() {
        let p = parse_program(POINT).unwrap();
        let ch = StructuralChecker::new(&p).unwrap();
        let env = StructEnv::empty()
            .bind("cp", ch.type_of(&"CP".into()).clone())
            .bind("p", ch.type_of(&"P".into()).clone());
        let err = ch.type_expr(&env, &expr("cp.eq(p)"), "test").unwrap_err();
        assert_eq!(err.code(), "STR003");
        // The subclass argument is still fine.
        assert!(ch.type_expr(&env, &expr("cp.eq(cp)"), "test").is_ok());
    }

    #[test]
    fn runtime_type_tests_are_unavailable() {
        let p = parse_program(POINT).unwrap();
        let ch = StructuralChecker::new(&p).unwrap();
        let env = StructEnv::empty().bind("p", ch.type_of(&"P".into()).clone());
        assert_eq!(ch.type_expr(&env, &expr("p instanceof P"), "t").unwrap_err().code(), "STR004");
        assert_eq!(ch.type_expr(&env, &expr("(CP) p"), "t").unwrap_err().code(), "STR004");
    }

    #[test]
    fn member_and_arity_errors() {
        let p = parse_program(POINT).unwrap();
        let ch = StructuralChecker::new(&p).unwrap();
        let env = StructEnv::empty().bind("p", ch.type_of(&"P".into()).clone());
        assert_eq!(ch.type_expr(&env, &expr("p.nope"), "t").unwrap_err().code(), "STR001");
        assert_eq!(ch.type_expr(&env, &expr("p.eq()"), "t").unwrap_err().code(), "STR002");
        assert_eq!(ch.type_expr(&env, &expr("new P()"), "t").unwrap_err().code(), "STR002");
    }

    #[test]
    fn shape_twins_are_interchangeable() {
        let p = parse_program(
            "class A { Object v; } class B { Object v; } class U { A use(A a) { return a; } } new U().use(new B(new Object()))",
        )
        .unwrap();
        let checked = check_program_structural(&p).unwrap();
        assert_eq!(checked.main_type.unwrap().to_string(), "{v: {}}");
    }

    #[test]
    fn programs_with_casts_fail_with_str004() {
        let p = parse_program(&format!("{POINT} (CP) new P(new Object())")).unwrap();
        let errs = check_program_structural(&p).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].code(), "STR004");
    }

    #[test]
    fn bodies_are_checked_against_return_types() {
        let p = parse_program("class A { Object f; A m() { return new Object(); } }").unwrap();
        let errs = check_program_structural(&p).unwrap_err();
        assert_eq!(errs[0].code(), "STR003");
    }
}
