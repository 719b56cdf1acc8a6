//! The structural discipline: classes read as recursive record types, names
//! as abbreviations, and inheritance as rebinding of the self type.

mod check;
mod oracle;
mod subtype;
mod translate;
mod types;
pub mod universe;

pub use check::{check_program_structural, StructEnv, StructuralCheck, StructuralChecker, StructuralError};
pub use oracle::{oracle_subtype, SimulationOracle, TermGraph};
pub use subtype::{struct_subtype, type_equivalent, SubtypeQuery, SubtypeSession, TypeRef};
pub use translate::{structural_type_of, StructuralTypes};
pub use types::{MethodType, Record, StructuralType, TypeParseError};
