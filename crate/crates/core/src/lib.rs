//! A laboratory for nominal versus structural object typing.

pub mod auditor;
pub mod corpus;
pub mod eval;
pub mod nominal;
pub mod signatures;
pub mod structural;
pub mod syntax;
