//! Test inputs and outputs of a subroutine (IO marks) and the
//! specifications its outputs are judged against.

pub mod formulas;
mod mark;
mod spec;

pub use mark::{IOMark, IoVar, MarkError, VarKind};
pub use spec::{
    all_rounds_same, BasisMap, ClassicalExpectation, OracleInfo, OutcomeRule, ProgramSpec, SpecContext, SpecError,
};
