//! fasolve-core: a solver for disjunctive fuzzy logic programs with fuzzy
//! aggregates.
//!
//! Programs are sets of rules over atoms annotated with exact rational truth
//! grades in [0, 1]. Rule bodies may contain fuzzy aggregate atoms that fold a
//! fuzzy multiset (built from a set term and the current interpretation) into
//! a (value, grade) pair and compare the value against a guard. Answer sets
//! are the minimal fuzzy models of the program's reduct.
//!
//! Pipeline: [`parse`] -> [`ground`] -> [`solver`]. The [`classical`] module
//! embeds ordinary disjunctive programs (with classical aggregates) by
//! annotating everything with grade 1, and [`harness`] provides generators and
//! independent brute-force oracles for differential testing.

pub mod aggregate;
pub mod classical;
pub mod ground;
pub mod harness;
pub mod model;
pub mod parse;
pub mod solver;
