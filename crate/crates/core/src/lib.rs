//! A workbench for differential linear logic proof-structures.
//!
//! The crate provides, in dependency order:
//!
//! - [`algebra`]: exact scalars over pluggable semiring modes, finite
//!   multisets, formal linear combinations, and the generalized binomial /
//!   multinomial combinatorics used by the weighted model;
//! - [`syntax`]: proof trees, cuts, simple proof-structures and their
//!   weighted sums, alpha-canonicalization and linear substitution;
//! - [`typing`]: linear logic types, duality and the local typing judgment
//!   with inference for unannotated (co)weakenings;
//! - [`logic`]: sequent derivations, their checker, and bounded
//!   backtracking proof search (sequentialization);
//! - [`rewrite`]: the cut-elimination engine with basic, promotion and
//!   commutative rules, contextual closure over weighted sums, strategies
//!   and fuel-bounded normalization;
//! - [`web`], [`rel`], [`wrel`]: finite webs with degree-truncated
//!   exponentials and the two executable models (relations and exact
//!   rational matrices), including Taylor operators and antiderivatives;
//! - [`resource`]: the differential lambda-calculus and the finite resource
//!   calculus, Taylor expansion and the syntactic antiderivative;
//! - [`parse`]: text grammars for nets, types and terms;
//! - [`corpus`]: seeded generation of derivable nets for the invariance
//!   checks;
//! - [`laws`]: the named law suites run by tests and the command line.

pub mod algebra;
pub mod logic;
pub mod parse;
pub mod rewrite;
pub mod resource;
pub mod syntax;
pub mod typing;
