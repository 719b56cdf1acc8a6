//! Recursive record types with de Bruijn-indexed binders.
//!
//! `Var(0)` refers to the innermost enclosing `Mu`. Because binders carry no
//! names, alpha-equivalent types are literally equal.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::syntax::Label;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructuralType {
    Var(usize),
    Mu(Box<StructuralType>),
    Record(Record),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Record {
    pub fields: BTreeMap<Label, StructuralType>,
    pub methods: BTreeMap<Label, MethodType>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MethodType {
    pub params: Vec<StructuralType>,
    pub ret: StructuralType,
}

impl Record {
    pub fn is_empty(&self) -> bool {
        self.fields.is_empty() && self.methods.is_empty()
    }

    pub fn with_field(mut self, label: &str, ty: StructuralType) -> Self {
        self.fields.insert(Label::new(label), ty);
        self
    }

    pub fn with_method(mut self, label: &str, params: Vec<StructuralType>, ret: StructuralType) -> Self {
        self.methods.insert(Label::new(label), MethodType { params, ret });
        self
    }

    fn map(&self, mut f: impl FnMut(&StructuralType) -> StructuralType) -> Record {
        Record {
            fields: self.fields.iter().map(|(l, t)| (l.clone(), f(t))).collect(),
            methods: self
                .methods
                .iter()
                .map(|(l, m)| {
                    (
                        l.clone(),
                        MethodType {
                            params: m.params.iter().map(&mut f).collect(),
                            ret: f(&m.ret),
                        },
                    )
                })
                .collect(),
        }
    }

    /// Every component type: field types, then parameter and return types.
    pub fn components(&self) -> impl Iterator<Item = &StructuralType> {
        self.fields.values().chain(
            self.methods
                .values()
                .flat_map(|m| m.params.iter().chain(std::iter::once(&m.ret))),
        )
    }
}

impl From<Record> for StructuralType {
    fn from(r: Record) -> Self {
        StructuralType::Record(r)
    }
}

impl StructuralType {
    /// The empty record, which every type is a subtype of.
    pub fn top() -> Self {
        StructuralType::Record(Record::default())
    }

    pub fn is_top(&self) -> bool {
        matches!(self, StructuralType::Record(r) if r.is_empty())
    }

    pub fn mu(body: impl Into<StructuralType>) -> Self {
        StructuralType::Mu(Box::new(body.into()))
    }

    /// Adds `amount` to every variable index at or above `cutoff`.
    pub fn shift(&self, amount: isize, cutoff: usize) -> StructuralType {
        match self {
            StructuralType::Var(i) if *i >= cutoff => {
                let shifted = *i as isize + amount;
                assert!(shifted >= 0, "shift would produce a negative index");
                StructuralType::Var(shifted as usize)
            }
            StructuralType::Var(i) => StructuralType::Var(*i),
            StructuralType::Mu(body) => StructuralType::mu(body.shift(amount, cutoff + 1)),
            StructuralType::Record(r) => StructuralType::Record(r.map(|t| t.shift(amount, cutoff))),
        }
    }

    /// Replaces variable `index` by `with`, removing that binder level.
    fn subst(&self, index: usize, with: &StructuralType) -> StructuralType {
        match self {
            StructuralType::Var(i) if *i == index => with.shift(index as isize, 0),
            StructuralType::Var(i) if *i > index => StructuralType::Var(i - 1),
            StructuralType::Var(i) => StructuralType::Var(*i),
            StructuralType::Mu(body) => StructuralType::mu(body.subst(index + 1, with)),
            StructuralType::Record(r) => StructuralType::Record(r.map(|t| t.subst(index, with))),
        }
    }

    /// One-step unfolding `μX.T  ↦  T[μX.T/X]`; non-`Mu` types are returned unchanged.
    pub fn unfold(&self) -> StructuralType {
        match self {
            StructuralType::Mu(body) => body.subst(0, self),
            other => other.clone(),
        }
    }

    /// Unfolds until the head is a record. Requires a closed, contractive type.
    pub fn head_record(&self) -> Record {
        let mut current = self.clone();
        loop {
            match current {
                StructuralType::Record(r) => return r,
                StructuralType::Mu(_) => current = current.unfold(),
                StructuralType::Var(_) => panic!("head_record on an open type"),
            }
        }
    }

    /// Whether variable `index` (relative to this term) occurs free.
    pub fn mentions(&self, index: usize) -> bool {
        match self {
            StructuralType::Var(i) => *i == index,
            StructuralType::Mu(body) => body.mentions(index + 1),
            StructuralType::Record(r) => r.components().any(|t| t.mentions(index)),
        }
    }

    pub fn is_closed(&self) -> bool {
        fn closed_under(t: &StructuralType, depth: usize) -> bool {
            match t {
                StructuralType::Var(i) => *i < depth,
                StructuralType::Mu(body) => closed_under(body, depth + 1),
                StructuralType::Record(r) => r.components().all(|c| closed_under(c, depth)),
            }
        }
        closed_under(self, 0)
    }

    /// Every bound variable is separated from its binder by at least one record.
    pub fn is_contractive(&self) -> bool {
        // `unguarded` counts the innermost binders not yet crossed by a record.
        fn check(t: &StructuralType, unguarded: usize) -> bool {
            match t {
                StructuralType::Var(i) => *i >= unguarded,
                StructuralType::Mu(body) => check(body, unguarded + 1),
                StructuralType::Record(r) => r.components().all(|c| check(c, 0)),
            }
        }
        check(self, 0)
    }

    /// Number of nodes, for generators and diagnostics.
    pub fn size(&self) -> usize {
        match self {
            StructuralType::Var(_) => 1,
            StructuralType::Mu(body) => 1 + body.size(),
            StructuralType::Record(r) => 1 + r.components().map(StructuralType::size).sum::<usize>(),
        }
    }

    pub fn mu_count(&self) -> usize {
        match self {
            StructuralType::Var(_) => 0,
            StructuralType::Mu(body) => 1 + body.mu_count(),
            StructuralType::Record(r) => r.components().map(StructuralType::mu_count).sum(),
        }
    }

    /// Record nesting depth; `{}` and variables count as zero.
    pub fn nesting(&self) -> usize {
        match self {
            StructuralType::Var(_) => 0,
            StructuralType::Mu(body) => body.nesting(),
            StructuralType::Record(r) if r.is_empty() => 0,
            StructuralType::Record(r) => 1 + r.components().map(StructuralType::nesting).max().unwrap_or(0),
        }
    }
}

const BINDER_NAMES: [&str; 4] = ["X", "Y", "Z", "W"];

fn binder_name(level: usize) -> String {
    BINDER_NAMES
        .get(level)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("X{level}"))
}

/// Canonical text: `μX.{f: T, ...; m(T1, ..., Tn): T, ...}` with fields before
/// methods and labels sorted; the empty record prints as `{}`.
impl fmt::Display for StructuralType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(f, self, 0)
    }
}

fn write_type(f: &mut fmt::Formatter<'_>, t: &StructuralType, depth: usize) -> fmt::Result {
    match t {
        StructuralType::Var(i) if *i < depth => f.write_str(&binder_name(depth - 1 - i)),
        StructuralType::Var(i) => write!(f, "#{}", i - depth),
        StructuralType::Mu(body) => {
            write!(f, "μ{}.", binder_name(depth))?;
            write_type(f, body, depth + 1)
        }
        StructuralType::Record(r) => {
            f.write_str("{")?;
            for (i, (label, ty)) in r.fields.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{label}: ")?;
                write_type(f, ty, depth)?;
            }
            if !r.fields.is_empty() && !r.methods.is_empty() {
                f.write_str("; ")?;
            }
            for (i, (label, m)) in r.methods.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{label}(")?;
                for (j, p) in m.params.iter().enumerate() {
                    if j > 0 {
                        f.write_str(", ")?;
                    }
                    write_type(f, p, depth)?;
                }
                f.write_str("): ")?;
                write_type(f, &m.ret, depth)?;
            }
            f.write_str("}")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad structural type at offset {offset}: {message}")]
pub struct TypeParseError {
    pub offset: usize,
    pub message: String,
}

/// Parses the canonical text form (`mu` is accepted for `μ`). Member order and
/// the `;` separator are not enforced on input.
impl FromStr for StructuralType {
    type Err = TypeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = TypeParser {
            src: s,
            pos: 0,
            binders: Vec::new(),
        };
        let t = p.ty()?;
        p.skip_ws();
        if p.pos != s.len() {
            return p.fail("trailing input");
        }
        Ok(t)
    }
}

struct TypeParser<'s> {
    src: &'s str,
    pos: usize,
    binders: Vec<String>,
}

impl TypeParser<'_> {
    fn fail<T>(&self, message: &str) -> Result<T, TypeParseError> {
        Err(TypeParseError {
            offset: self.pos,
            message: message.to_owned(),
        })
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), TypeParseError> {
        if self.eat(token) {
            Ok(())
        } else {
            self.fail(&format!("expected `{token}`"))
        }
    }

    fn ident(&mut self) -> Result<String, TypeParseError> {
        self.skip_ws();
        let len = self
            .rest()
            .char_indices()
            .find(|(_, c)| !(c.is_alphanumeric() || *c == '_'))
            .map(|(i, _)| i)
            .unwrap_or(self.rest().len());
        if len == 0 {
            return self.fail("expected identifier");
        }
        let word = self.rest()[..len].to_owned();
        self.pos += len;
        Ok(word)
    }

    fn ty(&mut self) -> Result<StructuralType, TypeParseError> {
        if self.eat("μ") || self.eat("mu ") {
            let name = self.ident()?;
            self.expect(".")?;
            self.binders.push(name);
            let body = self.ty();
            self.binders.pop();
            return Ok(StructuralType::mu(body?));
        }
        if self.eat("{") {
            let mut record = Record::default();
            if self.eat("}") {
                return Ok(record.into());
            }
            loop {
                let label = Label::new(self.ident()?);
                if self.eat("(") {
                    let mut params = Vec::new();
                    if !self.eat(")") {
                        loop {
                            params.push(self.ty()?);
                            if self.eat(")") {
                                break;
                            }
                            self.expect(",")?;
                        }
                    }
                    self.expect(":")?;
                    let ret = self.ty()?;
                    if record.methods.insert(label, MethodType { params, ret }).is_some() {
                        return self.fail("duplicate method label");
                    }
                } else {
                    self.expect(":")?;
                    let ty = self.ty()?;
                    if record.fields.insert(label, ty).is_some() {
                        return self.fail("duplicate field label");
                    }
                }
                if self.eat("}") {
                    return Ok(record.into());
                }
                if !self.eat(",") && !self.eat(";") {
                    return self.fail("expected `,`, `;` or `}`");
                }
            }
        }
        let name = self.ident()?;
        match self.binders.iter().rev().position(|b| *b == name) {
            Some(index) => Ok(StructuralType::Var(index)),
            None => self.fail(&format!("unbound type variable `{name}`")),
        }
    }
}
