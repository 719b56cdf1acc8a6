//! Call-by-value evaluation over literal triples: every object carries its
//! signature closure, a fields record and a methods record.
//!
//! The machine keeps its continuation on the heap, so deep or divergent
//! programs are bounded by the step budget, never by the native stack.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;
use std::sync::{Arc, LazyLock};

use indexmap::IndexMap;
use thiserror::Error;

use crate::nominal::MemberKind;
use crate::signatures::{SignatureClosure, SignatureError, SignatureTable};
use crate::syntax::{ClassName, Expr, Label, MethodDecl, Program, VarName};

/// Default bound on method invocations per run.
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

pub type Value<'p> = Arc<ObjectValue<'p>>;

/// A method together with the class that declared it. `this` is bound at
/// invocation time.
#[derive(Debug, Clone, Copy)]
pub struct MethodClosure<'p> {
    pub declaring_class: &'p ClassName,
    pub decl: &'p MethodDecl,
}

impl MethodClosure<'_> {
    pub fn arity(&self) -> usize {
        self.decl.params.len()
    }
}

pub type MethodRecord<'p> = IndexMap<Label, MethodClosure<'p>>;

/// A runtime object.
#[derive(Debug)]
pub struct ObjectValue<'p> {
    sig: Arc<SignatureClosure>,
    fields: IndexMap<Label, Value<'p>>,
    methods: Arc<MethodRecord<'p>>,
}

impl<'p> ObjectValue<'p> {
    pub fn sig(&self) -> &SignatureClosure {
        &self.sig
    }

    pub fn class_name(&self) -> &ClassName {
        &self.sig.root
    }

    pub fn fields(&self) -> &IndexMap<Label, Value<'p>> {
        &self.fields
    }

    pub fn field(&self, label: &Label) -> Option<&Value<'p>> {
        self.fields.get(label)
    }

    pub fn methods(&self) -> &MethodRecord<'p> {
        &self.methods
    }

    /// The structural view: field structure and method labels, nothing else.
    pub fn erase(self: &Arc<Self>) -> ErasedObject<'p> {
        ErasedObject(Arc::clone(self))
    }
}

// Long field chains would otherwise be dropped recursively.
impl Drop for ObjectValue<'_> {
    fn drop(&mut self) {
        let mut pending: Vec<Value<'_>> = self.fields.drain(..).map(|(_, v)| v).collect();
        while let Some(v) = pending.pop() {
            if let Ok(mut inner) = Arc::try_unwrap(v) {
                pending.extend(inner.fields.drain(..).map(|(_, v)| v));
            }
        }
    }
}

/// `true` iff `class` lies on the `extends` chain recorded in the object's closure.
pub fn runtime_instance_of(value: &ObjectValue<'_>, class: &ClassName) -> bool {
    value.sig.ancestry().any(|c| c == class)
}

/// An object seen through the structural lens. Field values are erased on
/// access; equality compares field structure and method label sets.
#[derive(Debug, Clone)]
pub struct ErasedObject<'p>(Value<'p>);

impl<'p> ErasedObject<'p> {
    pub fn field(&self, label: &Label) -> Option<ErasedObject<'p>> {
        self.0.fields.get(label).map(|v| ErasedObject(Arc::clone(v)))
    }

    pub fn field_labels(&self) -> impl Iterator<Item = &Label> {
        self.0.fields.keys()
    }

    pub fn method_labels(&self) -> impl Iterator<Item = &Label> {
        self.0.methods.keys()
    }
}

impl PartialEq for ErasedObject<'_> {
    fn eq(&self, other: &Self) -> bool {
        let mut pending = vec![(Arc::clone(&self.0), Arc::clone(&other.0))];
        while let Some((a, b)) = pending.pop() {
            if Arc::ptr_eq(&a, &b) {
                continue;
            }
            let same_methods = a.methods.len() == b.methods.len()
                && a.methods.keys().all(|l| b.methods.contains_key(l));
            if !same_methods || a.fields.len() != b.fields.len() {
                return false;
            }
            for (label, va) in &a.fields {
                match b.fields.get(label) {
                    Some(vb) => pending.push((Arc::clone(va), Arc::clone(vb))),
                    None => return false,
                }
            }
        }
        true
    }
}

impl Eq for ErasedObject<'_> {}

impl fmt::Display for ErasedObject<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(&self.0, false))
    }
}

impl fmt::Display for ObjectValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{", self.class_name())?;
        for (i, (label, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{label}={}", render(v, true))?;
        }
        f.write_str("}")
    }
}

/// `Class{field=..., ...}` when `named`, `{field=..., ...}` otherwise.
fn render(value: &ObjectValue<'_>, named: bool) -> String {
    enum Piece<'a, 'p> {
        Open(&'a ObjectValue<'p>),
        Text(&'a str),
        Label(&'a Label),
    }
    let mut out = String::new();
    let mut work = vec![Piece::Open(value)];
    while let Some(piece) = work.pop() {
        match piece {
            Piece::Text(s) => out.push_str(s),
            Piece::Label(l) => {
                out.push_str(l.as_str());
                out.push('=');
            }
            Piece::Open(v) => {
                if named {
                    out.push_str(v.class_name().as_str());
                }
                out.push('{');
                work.push(Piece::Text("}"));
                for (i, (label, child)) in v.fields.iter().enumerate().rev() {
                    work.push(Piece::Open(child));
                    work.push(Piece::Label(label));
                    if i > 0 {
                        work.push(Piece::Text(", "));
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("CastError: cannot cast `{actual}` to `{target}`")]
    CastError { target: ClassName, actual: ClassName },
    #[error("MemberNotFound: no {kind} `{label}` on receiver")]
    MemberNotFound { kind: MemberKind, label: Label },
    #[error("ArityError: `{site}` expects {expected} argument(s), found {found}")]
    ArityError {
        site: String,
        expected: usize,
        found: usize,
    },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("Timeout: step budget of {0} method invocations exhausted")]
    Timeout(u64),
    #[error("signature consulted at `{0}` while signatures were poisoned")]
    PoisonedSignature(&'static str),
}

impl RuntimeError {
    pub fn code(&self) -> &'static str {
        match self {
            RuntimeError::CastError { .. } => "RUN001",
            RuntimeError::MemberNotFound { .. } => "RUN002",
            RuntimeError::ArityError { .. } => "RUN003",
            RuntimeError::Unbound(_) => "SYN005",
            RuntimeError::Timeout(_) => "RUN004",
            RuntimeError::PoisonedSignature(_) => "RUN005",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub step_budget: u64,
    /// Replace every signature closure with a sentinel that names no class.
    pub poison_signatures: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            step_budget: DEFAULT_STEP_BUDGET,
            poison_signatures: false,
        }
    }
}

static POISON: LazyLock<Arc<SignatureClosure>> = LazyLock::new(|| {
    Arc::new(SignatureClosure {
        root: ClassName::new("<poisoned>"),
        table: BTreeMap::new(),
    })
});

struct ClassRuntime<'p> {
    closure: Arc<SignatureClosure>,
    layout: Vec<Label>,
    methods: Arc<MethodRecord<'p>>,
}

struct Env<'p> {
    this: Option<Value<'p>>,
    vars: HashMap<&'p VarName, Value<'p>>,
}

enum Control<'p> {
    Eval(&'p Expr, Rc<Env<'p>>),
    Return(Value<'p>),
}

enum Kont<'p> {
    Field(&'p Label),
    Invoke {
        label: &'p Label,
        args: &'p [Expr],
        env: Rc<Env<'p>>,
        receiver: Option<Value<'p>>,
        done: Vec<Value<'p>>,
    },
    New {
        class: &'p ClassName,
        args: &'p [Expr],
        env: Rc<Env<'p>>,
        done: Vec<Value<'p>>,
    },
    Cast(&'p ClassName),
    InstanceOf(&'p ClassName),
}

/// Evaluator for one program. Class metadata is computed once; each call to
/// [`Evaluator::eval`] is an independent run.
pub struct Evaluator<'p> {
    classes: HashMap<&'p ClassName, ClassRuntime<'p>>,
    object_class: ClassRuntime<'p>,
    options: EvalOptions,
    truth: [Value<'p>; 2],
}

impl<'p> Evaluator<'p> {
    pub fn new(program: &'p Program, options: EvalOptions) -> Result<Self, SignatureError> {
        let table = SignatureTable::build(program)?;
        let closure_of = |name: &ClassName| -> Arc<SignatureClosure> {
            if options.poison_signatures {
                Arc::clone(&POISON)
            } else {
                Arc::clone(table.closure(name).expect("table covers every class"))
            }
        };
        let graph = table.graph();
        let mut classes = HashMap::new();
        for name in program.all_names() {
            if name.is_object() {
                continue;
            }
            let mut chain: Vec<&ClassName> = graph.ancestors(&name).collect();
            chain.reverse();
            let mut layout = Vec::new();
            let mut methods = MethodRecord::new();
            for ancestor in chain {
                let Some(decl) = program.class(ancestor) else { continue };
                layout.extend(decl.fields.iter().map(|f| f.name.clone()));
                for m in &decl.methods {
                    methods.insert(
                        m.name.clone(),
                        MethodClosure {
                            declaring_class: &decl.name,
                            decl: m,
                        },
                    );
                }
            }
            let decl = program.class(&name).expect("listed by program");
            classes.insert(
                &decl.name,
                ClassRuntime {
                    closure: closure_of(&name),
                    layout,
                    methods: Arc::new(methods),
                },
            );
        }
        let object_class = ClassRuntime {
            closure: closure_of(&ClassName::object()),
            layout: Vec::new(),
            methods: Arc::new(MethodRecord::new()),
        };
        let singleton = |name: &str| {
            let rt = &classes[&ClassName::new(name)];
            Arc::new(ObjectValue {
                sig: Arc::clone(&rt.closure),
                fields: IndexMap::new(),
                methods: Arc::clone(&rt.methods),
            })
        };
        let truth = [singleton(crate::syntax::FALSE), singleton(crate::syntax::TRUE)];
        Ok(Evaluator {
            classes,
            object_class,
            options,
            truth,
        })
    }

    fn runtime(&self, class: &ClassName) -> &ClassRuntime<'p> {
        if class.is_object() {
            &self.object_class
        } else {
            &self.classes[class]
        }
    }

    fn construct(&self, class: &ClassName, args: Vec<Value<'p>>) -> Result<Value<'p>, RuntimeError> {
        let rt = self.runtime(class);
        if rt.layout.len() != args.len() {
            return Err(RuntimeError::ArityError {
                site: format!("new {class}"),
                expected: rt.layout.len(),
                found: args.len(),
            });
        }
        Ok(Arc::new(ObjectValue {
            sig: Arc::clone(&rt.closure),
            fields: rt.layout.iter().cloned().zip(args).collect(),
            methods: Arc::clone(&rt.methods),
        }))
    }

    fn check_sig(&self, site: &'static str) -> Result<(), RuntimeError> {
        if self.options.poison_signatures {
            Err(RuntimeError::PoisonedSignature(site))
        } else {
            Ok(())
        }
    }

    /// Evaluates a closed expression (no free variables, no `this`).
    pub fn eval(&self, expr: &'p Expr) -> Result<Value<'p>, RuntimeError> {
        let root = Rc::new(Env {
            this: None,
            vars: HashMap::new(),
        });
        let mut steps = 0u64;
        let mut stack: Vec<Kont<'p>> = Vec::new();
        let mut control = Control::Eval(expr, root);
        loop {
            control = match control {
                Control::Eval(e, env) => match e {
                    Expr::Var(v) => Control::Return(
                        env.vars
                            .get(v)
                            .cloned()
                            .ok_or_else(|| RuntimeError::Unbound(v.to_string()))?,
                    ),
                    Expr::This => Control::Return(
                        env.this
                            .clone()
                            .ok_or_else(|| RuntimeError::Unbound("this".to_owned()))?,
                    ),
                    Expr::FieldGet(recv, label) => {
                        stack.push(Kont::Field(label));
                        Control::Eval(recv, env)
                    }
                    Expr::Invoke(recv, label, args) => {
                        stack.push(Kont::Invoke {
                            label,
                            args,
                            env: Rc::clone(&env),
                            receiver: None,
                            done: Vec::with_capacity(args.len()),
                        });
                        Control::Eval(recv, env)
                    }
                    Expr::New(class, args) => match args.first() {
                        None => Control::Return(self.construct(class, Vec::new())?),
                        Some(first) => {
                            stack.push(Kont::New {
                                class,
                                args,
                                env: Rc::clone(&env),
                                done: Vec::with_capacity(args.len()),
                            });
                            Control::Eval(first, env)
                        }
                    },
                    Expr::Cast(class, inner) => {
                        stack.push(Kont::Cast(class));
                        Control::Eval(inner, env)
                    }
                    Expr::InstanceOf(inner, class) => {
                        stack.push(Kont::InstanceOf(class));
                        Control::Eval(inner, env)
                    }
                },
                Control::Return(value) => match stack.pop() {
                    None => return Ok(value),
                    Some(Kont::Field(label)) => Control::Return(
                        value
                            .fields
                            .get(label)
                            .cloned()
                            .ok_or_else(|| RuntimeError::MemberNotFound {
                                kind: MemberKind::Field,
                                label: label.clone(),
                            })?,
                    ),
                    Some(Kont::New {
                        class,
                        args,
                        env,
                        mut done,
                    }) => {
                        done.push(value);
                        match args.get(done.len()) {
                            Some(next) => {
                                stack.push(Kont::New {
                                    class,
                                    args,
                                    env: Rc::clone(&env),
                                    done,
                                });
                                Control::Eval(next, env)
                            }
                            None => Control::Return(self.construct(class, done)?),
                        }
                    }
                    Some(Kont::Invoke {
                        label,
                        args,
                        env,
                        mut receiver,
                        mut done,
                    }) => {
                        if receiver.is_none() {
                            receiver = Some(value);
                        } else {
                            done.push(value);
                        }
                        if let Some(next) = args.get(done.len()) {
                            stack.push(Kont::Invoke {
                                label,
                                args,
                                env: Rc::clone(&env),
                                receiver,
                                done,
                            });
                            Control::Eval(next, env)
                        } else {
                            let receiver = receiver.expect("receiver evaluated first");
                            let method = *receiver.methods.get(label).ok_or_else(|| {
                                RuntimeError::MemberNotFound {
                                    kind: MemberKind::Method,
                                    label: label.clone(),
                                }
                            })?;
                            if method.arity() != done.len() {
                                return Err(RuntimeError::ArityError {
                                    site: format!("method {label}"),
                                    expected: method.arity(),
                                    found: done.len(),
                                });
                            }
                            steps += 1;
                            if steps > self.options.step_budget {
                                return Err(RuntimeError::Timeout(self.options.step_budget));
                            }
                            let vars = method.decl.params.iter().map(|p| &p.name).zip(done).collect();
                            let frame = Rc::new(Env {
                                this: Some(receiver),
                                vars,
                            });
                            Control::Eval(&method.decl.body, frame)
                        }
                    }
                    Some(Kont::Cast(class)) => {
                        self.check_sig("cast")?;
                        if runtime_instance_of(&value, class) {
                            Control::Return(value)
                        } else {
                            return Err(RuntimeError::CastError {
                                target: class.clone(),
                                actual: value.class_name().clone(),
                            });
                        }
                    }
                    Some(Kont::InstanceOf(class)) => {
                        self.check_sig("instanceof")?;
                        let verdict = runtime_instance_of(&value, class);
                        Control::Return(Arc::clone(&self.truth[usize::from(verdict)]))
                    }
                },
            };
        }
    }
}

/// Evaluates the main expression of `program`, or `None` when it has none.
pub fn run_program<'p>(
    program: &'p Program,
    options: EvalOptions,
) -> Result<Option<Result<Value<'p>, RuntimeError>>, SignatureError> {
    let evaluator = Evaluator::new(program, options)?;
    Ok(program.main().map(|main| evaluator.eval(main)))
}

/// Runs a program normally and with poisoned signatures, comparing the erased
/// results. `None` when the program has no main expression.
pub fn erasure_sound(program: &Program, step_budget: u64) -> Result<Option<bool>, SignatureError> {
    let Some(main) = program.main() else {
        return Ok(None);
    };
    let plain = Evaluator::new(
        program,
        EvalOptions {
            step_budget,
            poison_signatures: false,
        },
    )?;
    let poisoned = Evaluator::new(
        program,
        EvalOptions {
            step_budget,
            poison_signatures: true,
        },
    )?;
    let render = |r: Result<Value<'_>, RuntimeError>| match r {
        Ok(v) => v.erase().to_string(),
        Err(e) => e.to_string(),
    };
    Ok(Some(render(plain.eval(main)) == render(poisoned.eval(main))))
}
