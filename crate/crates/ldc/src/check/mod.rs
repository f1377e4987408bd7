//! Type checkers for the simple and dependent fragments.

pub mod beta;
pub mod pts;
pub mod simple;
pub mod unify;

use thiserror::Error;

use crate::algebra::{AlgebraError, Grade};
use crate::syntax::Name;

pub use beta::{beta_equal, whnf, BetaError, DEFAULT_FUEL};
pub use pts::{check_pts, synth_pts, PtsSpec};
pub use simple::{check, synth, synth_config, synth_expected, ConfigBinding, ConfigTyping, SynthResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("rule {rule}: expected {expected}, found {found}")]
    Mismatch { rule: &'static str, expected: String, found: String },
    #[error("{0}")]
    NotSimple(String),
    #[error("rule {rule}: `{var}` is available at grade {available}, which is not <: its demand {demand}")]
    Usage { rule: &'static str, var: Name, available: Grade, demand: Grade },
    #[error("rule {rule}: elimination grade {q0} is not <: 1")]
    ElimGrade { rule: &'static str, q0: Grade },
    #[error("rule Case: the branches demand `{var}` at incompatible grades {left} and {right}")]
    Branches { var: Name, left: Grade, right: Grade },
    #[error("rule LamOmega: binder grade {binder} at observer grade {grade} admits no factorisation")]
    Unfair { binder: Grade, grade: Grade },
    #[error("rule {rule}: no rule ({s1}, {s2}, _) in the type system")]
    NoRule { rule: &'static str, s1: Name, s2: Name },
    #[error("sort `{0}` has no type in the type system")]
    NoAxiom(Name),
    #[error("rule {rule}: `{term}` is not a sort")]
    NotSort { rule: &'static str, term: String },
    #[error("rule Conv: `{left}` and `{right}` are not convertible (normal forms `{left_nf}` and `{right_nf}`)")]
    NotConvertible { left: String, right: String, left_nf: String, right_nf: String },
    #[error("cannot infer the type of `{0}`; add an annotation or an expected type")]
    NeedsAnnotation(String),
    #[error("conversion check ran out of fuel")]
    FuelExhausted,
}
