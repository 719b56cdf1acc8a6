//! Classes as recursive record types.
//!
//! A class's own name inside its members denotes its self type. Inherited
//! members are re-read in the subclass with the declaring class's self
//! variable rebound to the subclass's self. Other class names expand in place;
//! a name already being expanded further out refers back to that binder.

use std::collections::BTreeMap;

use super::types::{MethodType, Record, StructuralType};
use crate::syntax::{class_graph, ClassGraph, ClassName, Program, SyntaxError};

/// The recursive record type a class denotes under structural typing.
pub fn structural_type_of(program: &Program, class: &ClassName) -> Result<StructuralType, SyntaxError> {
    let graph = class_graph(program)?;
    if !program.has_class(class) {
        return Err(SyntaxError::UnknownName {
            name: class.to_string(),
            site: "a structural type query".to_owned(),
        });
    }
    Ok(Translator::new(program, &graph).class_type(class))
}

/// Structural types of every class in a program, computed once.
#[derive(Debug, Clone)]
pub struct StructuralTypes {
    graph: ClassGraph,
    types: BTreeMap<ClassName, StructuralType>,
}

impl StructuralTypes {
    pub fn build(program: &Program) -> Result<Self, SyntaxError> {
        let graph = class_graph(program)?;
        let types = {
            let mut tr = Translator::new(program, &graph);
            program
                .all_names()
                .into_iter()
                .map(|name| {
                    let ty = tr.class_type(&name);
                    (name, ty)
                })
                .collect()
        };
        Ok(StructuralTypes { graph, types })
    }

    pub fn get(&self, class: &ClassName) -> Option<&StructuralType> {
        self.types.get(class)
    }

    pub fn graph(&self) -> &ClassGraph {
        &self.graph
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ClassName, &StructuralType)> {
        self.types.iter()
    }
}

struct Translator<'a> {
    program: &'a Program,
    graph: &'a ClassGraph,
    /// Classes whose binders are in scope, outermost first.
    stack: Vec<ClassName>,
}

impl<'a> Translator<'a> {
    fn new(program: &'a Program, graph: &'a ClassGraph) -> Self {
        Translator {
            program,
            graph,
            stack: Vec::new(),
        }
    }

    fn class_type(&mut self, class: &ClassName) -> StructuralType {
        self.stack.push(class.clone());
        let body = StructuralType::Record(self.members(class));
        self.stack.pop();
        // Drop binders nothing refers to, so member-less classes are exactly `{}`.
        if body.mentions(0) {
            StructuralType::mu(body)
        } else {
            body.shift(-1, 1)
        }
    }

    /// Members of `class` (the innermost binder), ancestors first, later
    /// declarations replacing earlier ones with the same label.
    fn members(&mut self, class: &ClassName) -> Record {
        let mut chain: Vec<ClassName> = self.graph.ancestors(class).cloned().collect();
        chain.reverse();
        let mut record = Record::default();
        for declaring in chain.iter().filter(|c| !c.is_object()) {
            let Some(decl) = self.program.class(declaring) else {
                continue;
            };
            for field in &decl.fields {
                let ty = self.name_type(&field.ty, declaring);
                record.fields.insert(field.name.clone(), ty);
            }
            for method in &decl.methods {
                let params = method
                    .param_types()
                    .map(|p| self.name_type(p, declaring))
                    .collect();
                let ret = self.name_type(&method.ret, declaring);
                record
                    .methods
                    .insert(method.name.clone(), MethodType { params, ret });
            }
        }
        record
    }

    /// Interprets a class name occurring in a member declared by `declaring`,
    /// directly under the current class's binder.
    fn name_type(&mut self, name: &ClassName, declaring: &ClassName) -> StructuralType {
        if name == declaring {
            // Self type, rebound to the class being translated.
            return StructuralType::Var(0);
        }
        if let Some(pos) = self.stack.iter().position(|c| c == name) {
            return StructuralType::Var(self.stack.len() - 1 - pos);
        }
        self.class_type(name)
    }
}
