//! Coinductive subtyping for recursive record types.
//!
//! Every rule is a conjunction, so a failed subgoal fails the whole query and
//! nothing is ever retracted. Assumptions therefore accumulate across the
//! whole derivation rather than along one path, and each pair of types is
//! examined at most once. Types are hash-consed so that a pair costs O(1) to
//! look up however large the types are.

use std::collections::{BTreeMap, HashMap, HashSet};

use super::types::StructuralType;
use crate::syntax::Label;

/// A subtyping goal together with the assumptions it may use.
#[derive(Debug, Clone)]
pub struct SubtypeQuery {
    pub lhs: StructuralType,
    pub rhs: StructuralType,
    /// Pairs assumed to be related.
    pub assumptions: HashSet<(StructuralType, StructuralType)>,
}

impl SubtypeQuery {
    pub fn new(lhs: StructuralType, rhs: StructuralType) -> Self {
        SubtypeQuery {
            lhs,
            rhs,
            assumptions: HashSet::new(),
        }
    }

    pub fn decide(self) -> bool {
        let mut arena = Arena::default();
        let mut assumed: HashSet<(Id, Id)> = self
            .assumptions
            .iter()
            .map(|(a, b)| (arena.intern(a), arena.intern(b)))
            .collect();
        let goal = (arena.intern(&self.lhs), arena.intern(&self.rhs));
        arena.decide(goal, &mut assumed)
    }
}

/// Answers many queries over the same types without re-interning them.
#[derive(Default)]
pub struct SubtypeSession {
    arena: Arena,
}

/// A type interned in a [`SubtypeSession`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TypeRef(Id);

impl SubtypeSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, ty: &StructuralType) -> TypeRef {
        TypeRef(self.arena.intern(ty))
    }

    pub fn subtype(&mut self, s: TypeRef, t: TypeRef) -> bool {
        self.arena.decide((s.0, t.0), &mut HashSet::new())
    }

    pub fn equivalent(&mut self, s: TypeRef, t: TypeRef) -> bool {
        self.subtype(s, t) && self.subtype(t, s)
    }
}

type Id = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Var(usize),
    Mu(Id),
    Record {
        fields: BTreeMap<Label, Id>,
        methods: BTreeMap<Label, (Vec<Id>, Id)>,
    },
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    /// All free variables of node `i` are below `bound[i]`.
    bound: Vec<usize>,
    index: HashMap<Node, Id>,
    substituted: HashMap<(Id, usize, Id), Id>,
}

impl Arena {
    fn node(&mut self, node: Node) -> Id {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let bound = match &node {
            Node::Var(i) => i + 1,
            Node::Mu(body) => self.bound[*body].saturating_sub(1),
            Node::Record { fields, methods } => fields
                .values()
                .chain(methods.values().flat_map(|(ps, r)| ps.iter().chain(std::iter::once(r))))
                .map(|&c| self.bound[c])
                .max()
                .unwrap_or(0),
        };
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.bound.push(bound);
        self.index.insert(node, id);
        id
    }

    fn intern(&mut self, ty: &StructuralType) -> Id {
        let node = match ty {
            StructuralType::Var(i) => Node::Var(*i),
            StructuralType::Mu(body) => Node::Mu(self.intern(body)),
            StructuralType::Record(r) => Node::Record {
                fields: r.fields.iter().map(|(l, t)| (l.clone(), self.intern(t))).collect(),
                methods: r
                    .methods
                    .iter()
                    .map(|(l, m)| {
                        let params = m.params.iter().map(|p| self.intern(p)).collect();
                        (l.clone(), (params, self.intern(&m.ret)))
                    })
                    .collect(),
            },
        };
        self.node(node)
    }

    /// Replaces variable `index` in `t` by the closed term `with`.
    fn subst(&mut self, t: Id, index: usize, with: Id) -> Id {
        if self.bound[t] <= index {
            return t;
        }
        if let Some(&done) = self.substituted.get(&(t, index, with)) {
            return done;
        }
        let result = match self.nodes[t].clone() {
            Node::Var(i) if i == index => with,
            Node::Var(i) => self.node(Node::Var(i - 1)),
            Node::Mu(body) => {
                let body = self.subst(body, index + 1, with);
                self.node(Node::Mu(body))
            }
            Node::Record { fields, methods } => {
                let fields = fields
                    .into_iter()
                    .map(|(l, c)| (l, self.subst(c, index, with)))
                    .collect();
                let methods = methods
                    .into_iter()
                    .map(|(l, (ps, r))| {
                        let ps = ps.into_iter().map(|p| self.subst(p, index, with)).collect();
                        (l, (ps, self.subst(r, index, with)))
                    })
                    .collect();
                self.node(Node::Record { fields, methods })
            }
        };
        self.substituted.insert((t, index, with), result);
        result
    }

    fn unfold(&mut self, t: Id) -> Id {
        match self.nodes[t] {
            Node::Mu(body) => self.subst(body, 0, t),
            _ => t,
        }
    }

    fn decide(&mut self, goal: (Id, Id), assumed: &mut HashSet<(Id, Id)>) -> bool {
        let mut pending = vec![goal];
        while let Some((s, t)) = pending.pop() {
            match (&self.nodes[s], &self.nodes[t]) {
                (_, Node::Record { fields, methods }) if fields.is_empty() && methods.is_empty() => {}
                (Node::Mu(_), _) | (_, Node::Mu(_)) => {
                    if assumed.insert((s, t)) {
                        pending.push((self.unfold(s), self.unfold(t)));
                    }
                }
                (
                    Node::Record {
                        fields: have_fields,
                        methods: have_methods,
                    },
                    Node::Record {
                        fields: want_fields,
                        methods: want_methods,
                    },
                ) => {
                    for (label, &want) in want_fields {
                        match have_fields.get(label) {
                            Some(&have) => pending.push((have, want)),
                            None => return false,
                        }
                    }
                    for (label, (want_params, want_ret)) in want_methods {
                        let Some((have_params, have_ret)) = have_methods.get(label) else {
                            return false;
                        };
                        if have_params.len() != want_params.len() {
                            return false;
                        }
                        // Parameters are contravariant.
                        pending.extend(want_params.iter().copied().zip(have_params.iter().copied()));
                        pending.push((*have_ret, *want_ret));
                    }
                }
                // Free variables never reach here for closed inputs.
                _ => return false,
            }
        }
        true
    }
}

/// `s <: t` for closed, contractive types: width and depth on fields,
/// contravariant parameters and covariant results on methods.
pub fn struct_subtype(s: &StructuralType, t: &StructuralType) -> bool {
    debug_assert!(s.is_closed() && t.is_closed(), "subtype query on open types");
    SubtypeQuery::new(s.clone(), t.clone()).decide()
}

/// Mutual subtyping.
pub fn type_equivalent(s: &StructuralType, t: &StructuralType) -> bool {
    struct_subtype(s, t) && struct_subtype(t, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> StructuralType {
        s.parse().unwrap()
    }

    fn sub(a: &str, b: &str) -> bool {
        struct_subtype(&t(a), &t(b))
    }

    #[test]
    fn reflexive_and_top() {
        for ty in ["{}", "μX.{m(X): X}", "{f: {g: {}}}", "μX.{f: μY.{g: X, h: Y}}"] {
            assert!(sub(ty, ty), "{ty}");
            assert!(sub(ty, "{}"), "{ty}");
        }
        assert!(!sub("{}", "{f: {}}"));
    }

    #[test]
    fn width_and_depth_on_fields() {
        assert!(sub("{f: {}, g: {}}", "{f: {}}"));
        assert!(sub("{f: {h: {}}}", "{f: {}}"));
        assert!(!sub("{f: {}}", "{f: {h: {}}}"));
        assert!(!sub("{f: {}}", "{g: {}}"));
    }

    #[test]
    fn methods_are_contra_co() {
        assert!(sub("{m({}): {f: {}}}", "{m({g: {}}): {}}"));
        assert!(!sub("{m({g: {}}): {}}", "{m({}): {}}"));
        assert!(!sub("{m(): {}}", "{m({}): {}}"));
        // Fields and methods are separate namespaces.
        assert!(!sub("{m: {}}", "{m(): {}}"));
    }

    #[test]
    fn binary_method_subclass_is_not_a_subtype() {
        let point = "μX.{x: {}; eq(X): X}";
        let color_point = "μX.{c: {}, x: {}; eq(X): X}";
        assert!(!sub(color_point, point));
        assert!(!sub(point, color_point));
    }

    #[test]
    fn covariant_self_reference_subclass_is_a_subtype() {
        assert!(sub("μX.{c: {}, x: {}; get(): X}", "μX.{x: {}; get(): X}"));
    }

    #[test]
    fn unfolding_is_equivalent() {
        let ty = t("μX.{m(X): X}");
        let once = ty.unfold();
        assert!(type_equivalent(&ty, &once));
        assert!(type_equivalent(&once.unfold(), &ty));
    }

    #[test]
    fn differently_rolled_types_are_equivalent() {
        // The same infinite tree, rolled with one and with two binders.
        assert!(type_equivalent(&t("μX.{f: X}"), &t("μX.{f: μY.{f: X}}")));
        assert!(type_equivalent(&t("μX.{f: X}"), &t("{f: μX.{f: X}}")));
        assert!(!type_equivalent(&t("μX.{f: X}"), &t("μX.{f: {f: X}, g: {}}")));
    }

    #[test]
    fn assumptions_short_circuit() {
        let q = SubtypeQuery {
            lhs: t("μX.{f: X}"),
            rhs: t("μX.{g: X}"),
            assumptions: HashSet::from([(t("μX.{f: X}"), t("μX.{g: X}"))]),
        };
        assert!(q.decide());
    }
}
