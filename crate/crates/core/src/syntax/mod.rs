//! MiniOO front end: lexer, parser, resolved program representation, pretty
//! printer and the `extends` graph.

mod ast;
mod error;
mod graph;
mod lexer;
mod parser;
mod pretty;
mod program;

pub use ast::{
    ClassDecl, ClassName, Expr, FieldDecl, Label, MethodDecl, Param, VarName, BUILTIN_CLASSES,
    FALSE, OBJECT, TRUE,
};
pub use error::SyntaxError;
pub use graph::{class_graph, ClassGraph};
pub use parser::{parse_program, parse_unresolved};
pub use pretty::{pretty_print, print_expr};
pub use program::Program;
