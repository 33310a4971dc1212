//! Game about Squares: rules engine, SAT reduction, witness synthesis and an
//! exhaustive solver for the down-left restricted game.

pub mod cnf;
pub mod engine;
pub mod format;
pub mod model;
pub mod reduction;
pub mod solver;

pub use cnf::{parse_dimacs, preprocess, Assignment, Clause, CnfFormula, Literal};
pub use engine::{
    ArrowSpec, Direction, EngineError, Game, GameInstance, GameState, Position, PushTrace, SquareId, SquareSpec,
    SquareState, Viewport,
};
pub use reduction::{reduce, synthesize_witness, LayoutPlan};
pub use solver::{brute_force_sat, solve, verify_trace, SearchBudget, SolveOptions, Verdict};
