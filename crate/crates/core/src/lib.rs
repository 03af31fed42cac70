//! Exact verification of representations of the Dipper–Donkin quantum GL2
//! by 4×4 matrices: relations, generated algebras, centralizers and the
//! tabulated case corpus.

pub mod algebra;
pub mod clifford;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod matd;
pub mod presentation;
pub mod scalar;
pub mod verify;
