//! Surface syntax of MiniOO.

use std::fmt;

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(text: impl Into<String>) -> Self {
                Self(text.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(text: &str) -> Self {
                Self(text.to_owned())
            }
        }

        impl PartialEq<str> for $name {
            fn eq(&self, other: &str) -> bool {
                self.0 == other
            }
        }

        impl PartialEq<&str> for $name {
            fn eq(&self, other: &&str) -> bool {
                self.0 == *other
            }
        }
    };
}

name_type!(
    /// A class name. Doubles as a type name in both disciplines.
    ClassName
);
name_type!(
    /// A field or method label. Fields and methods live in separate namespaces.
    Label
);
name_type!(
    /// A method parameter name.
    VarName
);

pub const OBJECT: &str = "Object";
pub const TRUE: &str = "True";
pub const FALSE: &str = "False";

/// Names of the classes every program implicitly contains.
pub const BUILTIN_CLASSES: [&str; 3] = [OBJECT, TRUE, FALSE];

impl ClassName {
    pub fn object() -> Self {
        Self::new(OBJECT)
    }

    pub fn is_object(&self) -> bool {
        self.0 == OBJECT
    }

    pub fn is_builtin(&self) -> bool {
        BUILTIN_CLASSES.contains(&self.0.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Var(VarName),
    This,
    FieldGet(Box<Expr>, Label),
    Invoke(Box<Expr>, Label, Vec<Expr>),
    New(ClassName, Vec<Expr>),
    Cast(ClassName, Box<Expr>),
    InstanceOf(Box<Expr>, ClassName),
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(VarName::new(name))
    }

    pub fn field(self, label: &str) -> Self {
        Expr::FieldGet(Box::new(self), Label::new(label))
    }

    pub fn invoke(self, label: &str, args: Vec<Expr>) -> Self {
        Expr::Invoke(Box::new(self), Label::new(label), args)
    }

    pub fn new_object(class: &str, args: Vec<Expr>) -> Self {
        Expr::New(ClassName::new(class), args)
    }

    /// Calls `visit` on this expression and every subexpression, outermost first.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Expr)) {
        visit(self);
        match self {
            Expr::Var(_) | Expr::This => {}
            Expr::FieldGet(recv, _) => recv.walk(visit),
            Expr::Invoke(recv, _, args) => {
                recv.walk(visit);
                args.iter().for_each(|a| a.walk(visit));
            }
            Expr::New(_, args) => args.iter().for_each(|a| a.walk(visit)),
            Expr::Cast(_, inner) | Expr::InstanceOf(inner, _) => inner.walk(visit),
        }
    }

    /// True if the expression contains a cast or an `instanceof` test.
    pub fn uses_runtime_type_test(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| {
            if matches!(e, Expr::Cast(..) | Expr::InstanceOf(..)) {
                found = true;
            }
        });
        found
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: Label,
    pub ty: ClassName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: VarName,
    pub ty: ClassName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub name: Label,
    pub params: Vec<Param>,
    pub ret: ClassName,
    pub body: Expr,
}

impl MethodDecl {
    pub fn param_types(&self) -> impl Iterator<Item = &ClassName> {
        self.params.iter().map(|p| &p.ty)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: ClassName,
    pub super_name: ClassName,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    /// Free-form behavioral contracts taken from `//@` comments. Documentation only.
    pub contracts: Vec<String>,
}

impl ClassDecl {
    pub fn new(name: &str, super_name: &str) -> Self {
        ClassDecl {
            name: ClassName::new(name),
            super_name: ClassName::new(super_name),
            fields: Vec::new(),
            methods: Vec::new(),
            contracts: Vec::new(),
        }
    }

    pub fn field(&self, label: &Label) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| &f.name == label)
    }

    pub fn method(&self, label: &Label) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| &m.name == label)
    }

    /// Every class name mentioned in the declaration's header and member signatures.
    pub fn referenced_names(&self) -> impl Iterator<Item = &ClassName> {
        std::iter::once(&self.super_name)
            .chain(self.fields.iter().map(|f| &f.ty))
            .chain(
                self.methods
                    .iter()
                    .flat_map(|m| m.param_types().chain(std::iter::once(&m.ret))),
            )
    }
}
