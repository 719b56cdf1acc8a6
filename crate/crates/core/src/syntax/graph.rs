use std::collections::{BTreeMap, BTreeSet};

use super::ast::ClassName;
use super::error::SyntaxError;
use super::program::Program;

/// The `extends` relation of a program: a tree rooted at `Object`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGraph {
    parent: BTreeMap<ClassName, ClassName>,
}

/// Builds the parent map and rejects inheritance cycles.
pub fn class_graph(program: &Program) -> Result<ClassGraph, SyntaxError> {
    let mut parent = BTreeMap::new();
    for name in program.all_names() {
        if let Some(decl) = program.class(&name) {
            parent.insert(name, decl.super_name.clone());
        }
    }

    // Walk each chain; a chain that revisits a class without reaching Object is a cycle.
    let mut known_acyclic: BTreeSet<ClassName> = BTreeSet::new();
    for start in parent.keys() {
        let mut path: Vec<&ClassName> = Vec::new();
        let mut current = start;
        loop {
            if current.is_object() || known_acyclic.contains(current) {
                break;
            }
            if let Some(pos) = path.iter().position(|c| *c == current) {
                let mut cycle: Vec<ClassName> = path[pos..].iter().map(|c| (*c).clone()).collect();
                cycle.sort();
                return Err(SyntaxError::InheritanceCycle(cycle));
            }
            path.push(current);
            current = &parent[current];
        }
        known_acyclic.extend(path.into_iter().cloned());
    }
    Ok(ClassGraph { parent })
}

impl ClassGraph {
    pub fn parent(&self, class: &ClassName) -> Option<&ClassName> {
        self.parent.get(class)
    }

    /// The chain `class, parent, ..., Object`.
    pub fn ancestors<'a>(&'a self, class: &'a ClassName) -> impl Iterator<Item = &'a ClassName> + 'a {
        std::iter::successors(Some(class), move |c| self.parent.get(*c))
    }

    /// Number of `extends` steps from `class` to `Object`.
    pub fn depth(&self, class: &ClassName) -> usize {
        self.ancestors(class).count() - 1
    }

    /// Steps from `sub` up to `sup`, if `sup` is on `sub`'s chain.
    pub fn distance(&self, sub: &ClassName, sup: &ClassName) -> Option<usize> {
        self.ancestors(sub).position(|c| c == sup)
    }

    /// Whether `sup` appears on `sub`'s `extends` chain (reflexively).
    pub fn inherits(&self, sub: &ClassName, sup: &ClassName) -> bool {
        self.distance(sub, sup).is_some()
    }

    /// Direct subclasses, sorted.
    pub fn children<'a>(&'a self, class: &'a ClassName) -> impl Iterator<Item = &'a ClassName> + 'a {
        self.parent
            .iter()
            .filter(move |(_, p)| *p == class)
            .map(|(c, _)| c)
    }

    /// Classes ordered so that every class follows its parent.
    pub fn topological(&self) -> Vec<ClassName> {
        let mut order: Vec<ClassName> = self.parent.keys().cloned().collect();
        order.sort_by_key(|c| (self.depth(c), c.clone()));
        order
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;

    fn graph(src: &str) -> Result<ClassGraph, SyntaxError> {
        class_graph(&parse_program(src).unwrap())
    }

    #[test]
    fn single_class_hangs_off_object() {
        let g = graph("class A extends Object {}").unwrap();
        assert_eq!(g.parent(&"A".into()), Some(&"Object".into()));
        assert_eq!(g.parent(&"Object".into()), None);
    }

    #[test]
    fn two_class_cycle() {
        assert_eq!(
            graph("class A extends B {} class B extends A {}").unwrap_err(),
            SyntaxError::InheritanceCycle(vec!["A".into(), "B".into()])
        );
    }

    #[test]
    fn cycle_reported_once_even_when_reached_from_outside() {
        assert_eq!(
            graph("class C extends A {} class A extends B {} class B extends A {}").unwrap_err(),
            SyntaxError::InheritanceCycle(vec!["A".into(), "B".into()])
        );
        assert_eq!(
            graph("class A extends A {}").unwrap_err(),
            SyntaxError::InheritanceCycle(vec!["A".into()])
        );
    }

    /// Transitive closure by repeated composition, independent of `ancestors`.
    fn closure_oracle(edges: &[(&str, &str)]) -> BTreeSet<(String, String)> {
        let mut rel: BTreeSet<(String, String)> = edges
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        loop {
            let extra: Vec<_> = rel
                .iter()
                .flat_map(|(a, b)| {
                    rel.iter()
                        .filter(move |(c, _)| c == b)
                        .map(move |(_, d)| (a.clone(), d.clone()))
                })
                .filter(|p| !rel.contains(p))
                .collect();
            if extra.is_empty() {
                return rel;
            }
            rel.extend(extra);
        }
    }

    #[test]
    fn three_level_chain_matches_hand_built_closure() {
        let g = graph("class C extends B {} class B extends A {} class A extends Object {}").unwrap();
        assert_eq!(g.depth(&"C".into()), 3);
        let chain: Vec<_> = g.ancestors(&"C".into()).map(|c| c.to_string()).collect();
        assert_eq!(chain, ["C", "B", "A", "Object"]);

        let oracle = closure_oracle(&[("C", "B"), ("B", "A"), ("A", "Object")]);
        for sub in ["A", "B", "C", "Object"] {
            for sup in ["A", "B", "C", "Object"] {
                let expected = sub == sup || oracle.contains(&(sub.to_string(), sup.to_string()));
                assert_eq!(g.inherits(&sub.into(), &sup.into()), expected, "{sub} -> {sup}");
            }
        }
        assert_eq!(g.distance(&"C".into(), &"A".into()), Some(2));
        assert_eq!(g.distance(&"A".into(), &"C".into()), None);
    }

    #[test]
    fn topological_order_puts_parents_first() {
        let g = graph("class C extends B {} class B extends A {} class A {}").unwrap();
        let order = g.topological();
        let pos = |n: &str| order.iter().position(|c| c == n).unwrap();
        assert!(pos("A") < pos("B") && pos("B") < pos("C"));
        assert_eq!(
            g.children(&"A".into()).cloned().collect::<Vec<_>>(),
            vec![ClassName::new("B")]
        );
    }
}
