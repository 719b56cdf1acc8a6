//! Built-in exemplar programs and a generator of random class hierarchies.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::syntax::{parse_program, ClassDecl, ClassName, Expr, FieldDecl, Label, MethodDecl, Param, Program, VarName};

#[derive(Debug, Clone, Copy)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub source: &'static str,
}

impl CorpusEntry {
    pub fn program(&self) -> Program {
        parse_program(self.source).expect("corpus programs parse")
    }
}

const POINT_BINARY: &str = "\
//@ eq answers whether two points denote the same location
class Point {
    Object x;
    Object y;
    Point eq(Point other) { return other; }
}

class ColorPoint extends Point {
    Object color;
}

new ColorPoint(new Object(), new Object(), new Object()).eq(new Point(new Object(), new Object()))
";

const POINT_BINARY_NARROWED: &str = "\
class Point {
    Object x;
    Object y;
    Point eq(Point other) { return other; }
}

class ColorPoint extends Point {
    Object color;
    Point eq(ColorPoint other) { return other; }
}

new ColorPoint(new Object(), new Object(), new Object()).eq(new Point(new Object(), new Object()))
";

const POINT_BINARY_WIDENED: &str = "\
class Point {
    Object x;
    Object y;
    Point eq(Point other) { return other; }
}

class ColorPoint extends Point {
    Object color;
    Point eq(Object other) { return this; }
}

new ColorPoint(new Object(), new Object(), new Object()).eq(new Point(new Object(), new Object()))
";

const TWINS: &str = "\
class A {
    Object v;
    A me() { return this; }
}

class B {
    Object v;
    B me() { return this; }
}

new A(new Object()).me()
";

const SPURIOUS: &str = "\
class Q {
    Q eq(Q other) { return other; }
}

// P only looks like Q; nothing relates them by declaration.
class P {
    P eq(Q other) { return this; }
}

new P().eq(new Q())
";

const CHAIN3: &str = "\
class A {
    A id(A other) { return other; }
}

class B extends A {
    Object b;
}

class C extends B {
    Object c;
}

new C(new Object(), new Object()).id(new A())
";

const MUTUAL: &str = "\
class Even {
    Odd next(Odd o) { return o; }
}

class Odd {
    Object tag;
    Even next(Even e) { return e; }
}

new Even().next(new Odd(new Object()))
";

const DOWNCAST: &str = "\
class Point {
    Object x;
}

class ColorPoint extends Point {
    Object color;
}

(ColorPoint) new Point(new Object())
";

const DIVERGE: &str = "\
class Loop {
    Object spin() { return this.spin(); }
    Object ignore(Object o) { return new Object(); }
}

new Loop().ignore(new Loop().spin())
";

const TYPETEST: &str = "\
class Animal {
    Object name;
}

class Dog extends Animal {
    Dog fetch() { return this; }
}

new Dog(new Object()).fetch() instanceof Animal
";

pub const CORPUS: &[CorpusEntry] = &[
    CorpusEntry {
        name: "point-binary",
        summary: "Point with a binary eq method and a ColorPoint subclass",
        source: POINT_BINARY,
    },
    CorpusEntry {
        name: "point-binary-narrowed",
        summary: "ColorPoint narrows the eq parameter (illegal override)",
        source: POINT_BINARY_NARROWED,
    },
    CorpusEntry {
        name: "point-binary-widened",
        summary: "ColorPoint widens the eq parameter to Object",
        source: POINT_BINARY_WIDENED,
    },
    CorpusEntry {
        name: "twins",
        summary: "two unrelated classes with identical shape",
        source: TWINS,
    },
    CorpusEntry {
        name: "spurious",
        summary: "a method whose parameter class merely looks like its own class",
        source: SPURIOUS,
    },
    CorpusEntry {
        name: "chain3",
        summary: "a binary method inherited through three levels",
        source: CHAIN3,
    },
    CorpusEntry {
        name: "mutual",
        summary: "mutually recursive classes",
        source: MUTUAL,
    },
    CorpusEntry {
        name: "downcast",
        summary: "a well-typed downcast that fails at run time",
        source: DOWNCAST,
    },
    CorpusEntry {
        name: "diverge",
        summary: "a strict call whose argument never terminates",
        source: DIVERGE,
    },
    CorpusEntry {
        name: "typetest",
        summary: "a runtime type test",
        source: TYPETEST,
    },
];

pub fn lookup(name: &str) -> Option<&'static CorpusEntry> {
    CORPUS.iter().find(|e| e.name == name)
}

/// Bounds for [`random_program`].
#[derive(Debug, Clone, Copy)]
pub struct HierarchyConfig {
    pub max_classes: usize,
    pub max_members: usize,
    pub overrides: bool,
}

impl Default for HierarchyConfig {
    fn default() -> Self {
        HierarchyConfig {
            max_classes: 8,
            max_members: 4,
            overrides: true,
        }
    }
}

/// A random acyclic hierarchy that passes the nominal checker. Overrides,
/// when enabled, widen parameters and keep or narrow results.
pub fn random_program(rng: &mut impl Rng, config: HierarchyConfig) -> Program {
    let n = rng.gen_range(1..=config.max_classes.max(1));
    let names: Vec<ClassName> = (0..n).map(|i| ClassName::new(format!("C{i}"))).collect();
    let object = ClassName::object();
    let parents: Vec<ClassName> = (0..n)
        .map(|i| {
            let pick = rng.gen_range(0..=i);
            if pick == i {
                object.clone()
            } else {
                names[pick].clone()
            }
        })
        .collect();
    let parent_of = |c: &ClassName| -> Option<&ClassName> {
        names.iter().position(|n| n == c).map(|i| &parents[i])
    };
    let ancestors = |c: &ClassName| -> Vec<ClassName> {
        let mut out = vec![c.clone()];
        let mut cur = c.clone();
        while let Some(p) = parent_of(&cur) {
            out.push(p.clone());
            cur = p.clone();
        }
        out
    };
    let subtype = |a: &ClassName, b: &ClassName| ancestors(a).contains(b);
    let mut universe = names.clone();
    universe.push(object.clone());

    let mut decls: Vec<ClassDecl> = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let mut decl = ClassDecl::new(name.as_str(), parents[i].as_str());
        // Methods visible from ancestors, nearest declaration first.
        let inherited: Vec<MethodDecl> = {
            let mut seen: Vec<MethodDecl> = Vec::new();
            for a in ancestors(name).iter().skip(1) {
                if let Some(d) = decls.iter().find(|d| &d.name == a) {
                    for m in &d.methods {
                        if !seen.iter().any(|s| s.name == m.name) {
                            seen.push(m.clone());
                        }
                    }
                }
            }
            seen
        };
        let members = rng.gen_range(0..=config.max_members);
        for k in 0..members {
            let roll = rng.gen_range(0..3);
            if roll == 0 {
                decl.fields.push(FieldDecl {
                    name: Label::new(format!("f{i}_{k}")),
                    ty: universe.choose(rng).expect("non-empty").clone(),
                });
                continue;
            }
            let target = (config.overrides && roll == 2)
                .then(|| inherited.choose(rng))
                .flatten()
                .filter(|m| decl.method(&m.name).is_none());
            let method = match target {
                Some(base) => {
                    let params: Vec<Param> = base
                        .params
                        .iter()
                        .map(|p| Param {
                            name: p.name.clone(),
                            ty: ancestors(&p.ty).choose(rng).expect("non-empty").clone(),
                        })
                        .collect();
                    let ret = base.ret.clone();
                    let body = well_typed_body(rng, name, &params, &ret, &subtype);
                    body.map(|body| MethodDecl {
                        name: base.name.clone(),
                        params,
                        ret,
                        body,
                    })
                }
                None => {
                    let arity = rng.gen_range(0..=2);
                    let params: Vec<Param> = (0..arity)
                        .map(|j| Param {
                            name: VarName::new(format!("p{j}")),
                            ty: universe.choose(rng).expect("non-empty").clone(),
                        })
                        .collect();
                    // Returning `this` or a parameter keeps the body well typed.
                    let mut candidates: Vec<ClassName> = ancestors(name);
                    candidates.extend(params.iter().flat_map(|p| ancestors(&p.ty)));
                    let ret = candidates.choose(rng).expect("non-empty").clone();
                    let body = well_typed_body(rng, name, &params, &ret, &subtype).expect("ret chosen to fit");
                    Some(MethodDecl {
                        name: Label::new(format!("m{i}_{k}")),
                        params,
                        ret,
                        body,
                    })
                }
            };
            if let Some(m) = method {
                decl.methods.push(m);
            }
        }
        decls.push(decl);
    }
    Program::new(decls, None).expect("generated programs resolve")
}

fn well_typed_body(
    rng: &mut impl Rng,
    this: &ClassName,
    params: &[Param],
    ret: &ClassName,
    subtype: &impl Fn(&ClassName, &ClassName) -> bool,
) -> Option<Expr> {
    let mut options: Vec<Expr> = params
        .iter()
        .filter(|p| subtype(&p.ty, ret))
        .map(|p| Expr::Var(p.name.clone()))
        .collect();
    if subtype(this, ret) {
        options.push(Expr::This);
    }
    if ret.is_object() {
        options.push(Expr::New(ClassName::object(), Vec::new()));
    }
    options.choose(rng).cloned()
}
