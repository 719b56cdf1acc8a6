use std::collections::HashSet;
use std::sync::LazyLock;

use super::ast::{ClassDecl, ClassName, Expr, VarName, BUILTIN_CLASSES, FALSE, OBJECT, TRUE};
use super::error::SyntaxError;

/// The `True` and `False` singletons produced by `instanceof`. `Object` itself has no
/// declaration: it is the member-less root.
static BUILTIN_DECLS: LazyLock<[ClassDecl; 2]> =
    LazyLock::new(|| [ClassDecl::new(TRUE, OBJECT), ClassDecl::new(FALSE, OBJECT)]);

/// A resolved MiniOO program. Construction checks every naming invariant, so a
/// `Program` value is always well-scoped. Hierarchy acyclicity is checked
/// separately by [`super::class_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    classes: Vec<ClassDecl>,
    main: Option<Expr>,
}

impl Program {
    pub fn new(classes: Vec<ClassDecl>, main: Option<Expr>) -> Result<Self, SyntaxError> {
        let mut seen: HashSet<&ClassName> = HashSet::new();
        for decl in &classes {
            if decl.name.is_builtin() || !seen.insert(&decl.name) {
                return Err(SyntaxError::DuplicateClass(decl.name.clone()));
            }
        }
        let program = Program { classes, main };
        for decl in &program.classes {
            program.check_class(decl)?;
        }
        if let Some(main) = &program.main {
            program.check_expr(main, None, &HashSet::new(), "the main expression")?;
        }
        Ok(program)
    }

    /// User-declared classes in source order.
    pub fn classes(&self) -> &[ClassDecl] {
        &self.classes
    }

    pub fn main(&self) -> Option<&Expr> {
        self.main.as_ref()
    }

    /// Looks up a declaration, including the built-in `True`/`False`. `Object` has none.
    pub fn class(&self, name: &ClassName) -> Option<&ClassDecl> {
        self.classes
            .iter()
            .chain(BUILTIN_DECLS.iter())
            .find(|c| &c.name == name)
    }

    pub fn has_class(&self, name: &ClassName) -> bool {
        name.is_object() || self.class(name).is_some()
    }

    /// User classes plus `Object`, sorted: the universe the audit and the
    /// inheritance/subtyping verifier range over.
    pub fn audited_names(&self) -> Vec<ClassName> {
        let mut names: Vec<ClassName> = self.classes.iter().map(|c| c.name.clone()).collect();
        names.push(ClassName::object());
        names.sort();
        names
    }

    /// Every class the program knows about, built-ins included, sorted.
    pub fn all_names(&self) -> Vec<ClassName> {
        let mut names: Vec<ClassName> = self.classes.iter().map(|c| c.name.clone()).collect();
        names.extend(BUILTIN_CLASSES.iter().map(|n| ClassName::new(*n)));
        names.sort();
        names
    }

    fn require_class(&self, name: &ClassName, site: impl FnOnce() -> String) -> Result<(), SyntaxError> {
        if self.has_class(name) {
            Ok(())
        } else {
            Err(SyntaxError::UnknownName {
                name: name.to_string(),
                site: site(),
            })
        }
    }

    fn check_class(&self, decl: &ClassDecl) -> Result<(), SyntaxError> {
        let class = &decl.name;
        self.require_class(&decl.super_name, || format!("the header of class `{class}`"))?;

        let mut labels = HashSet::new();
        for field in &decl.fields {
            if !labels.insert(&field.name) {
                return Err(SyntaxError::DuplicateMember {
                    class: class.clone(),
                    label: field.name.clone(),
                });
            }
            self.require_class(&field.ty, || format!("field `{class}.{}`", field.name))?;
        }

        let mut labels = HashSet::new();
        for method in &decl.methods {
            if !labels.insert(&method.name) {
                return Err(SyntaxError::DuplicateMember {
                    class: class.clone(),
                    label: method.name.clone(),
                });
            }
            let site = || format!("method `{class}.{}`", method.name);
            self.require_class(&method.ret, site)?;
            let mut params = HashSet::new();
            for param in &method.params {
                if !params.insert(&param.name) {
                    return Err(SyntaxError::DuplicateParameter {
                        class: class.clone(),
                        method: method.name.clone(),
                        param: param.name.clone(),
                    });
                }
                self.require_class(&param.ty, site)?;
            }
            self.check_expr(&method.body, Some(class), &params, &site())?;
        }
        Ok(())
    }

    fn check_expr(
        &self,
        expr: &Expr,
        this: Option<&ClassName>,
        vars: &HashSet<&VarName>,
        site: &str,
    ) -> Result<(), SyntaxError> {
        let mut result = Ok(());
        expr.walk(&mut |e| {
            if result.is_err() {
                return;
            }
            result = match e {
                Expr::Var(v) if !vars.contains(v) => Err(SyntaxError::UnknownName {
                    name: v.to_string(),
                    site: site.to_owned(),
                }),
                Expr::This if this.is_none() => Err(SyntaxError::UnknownName {
                    name: "this".to_owned(),
                    site: site.to_owned(),
                }),
                Expr::New(c, _) | Expr::Cast(c, _) | Expr::InstanceOf(_, c) => {
                    self.require_class(c, || site.to_owned())
                }
                _ => Ok(()),
            };
        });
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    #[test]
    fn duplicate_classes_and_builtins() {
        assert_eq!(
            parse_program("class A {} class A {}").unwrap_err(),
            SyntaxError::DuplicateClass("A".into())
        );
        assert_eq!(
            parse_program("class Object {}").unwrap_err(),
            SyntaxError::DuplicateClass("Object".into())
        );
        assert_eq!(
            parse_program("class True {}").unwrap_err(),
            SyntaxError::DuplicateClass("True".into())
        );
    }

    #[test]
    fn duplicate_members_within_one_namespace() {
        assert_eq!(
            parse_program("class A { A f; Object f; }").unwrap_err(),
            SyntaxError::DuplicateMember {
                class: "A".into(),
                label: "f".into()
            }
        );
        assert_eq!(
            parse_program("class A { A m() { return this; } A m(A x) { return x; } }")
                .unwrap_err(),
            SyntaxError::DuplicateMember {
                class: "A".into(),
                label: "m".into()
            }
        );
    }

    #[test]
    fn duplicate_parameters() {
        assert!(matches!(
            parse_program("class A { A m(A x, A x) { return x; } }").unwrap_err(),
            SyntaxError::DuplicateParameter { .. }
        ));
    }

    #[test]
    fn unknown_names_are_reported_with_their_site() {
        let err = parse_program("class A extends B {}").unwrap_err();
        assert_eq!(
            err,
            SyntaxError::UnknownName {
                name: "B".into(),
                site: "the header of class `A`".into()
            }
        );
        assert!(matches!(
            parse_program("class A { Zed f; }").unwrap_err(),
            SyntaxError::UnknownName { .. }
        ));
        assert!(matches!(
            parse_program("class A { A m() { return y; } }").unwrap_err(),
            SyntaxError::UnknownName { name, .. } if name == "y"
        ));
        assert!(matches!(
            parse_program("this").unwrap_err(),
            SyntaxError::UnknownName { name, .. } if name == "this"
        ));
        assert!(matches!(
            parse_program("new Nope()").unwrap_err(),
            SyntaxError::UnknownName { name, .. } if name == "Nope"
        ));
    }

    #[test]
    fn forward_references_resolve() {
        let p = parse_program("class A { B b; } class B { A a; }").unwrap();
        assert!(p.has_class(&"B".into()));
        assert_eq!(
            p.audited_names(),
            vec![ClassName::new("A"), "B".into(), "Object".into()]
        );
    }

    #[test]
    fn builtins_are_visible() {
        let p = parse_program("new True()").unwrap();
        assert!(p.class(&"False".into()).is_some());
        assert!(p.class(&"Object".into()).is_none());
        assert!(p.has_class(&"Object".into()));
    }
}
