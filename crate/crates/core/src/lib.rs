//! Specification-guided fault localization and repair for contract-annotated
//! integer programs.
//!
//! The pipeline: parse a `.dfy` subset program ([`lang`]), propagate state
//! forward with Hoare rules to produce entailments ([`hoare`]), discharge
//! them with an SMT solver or a bounded brute-force evaluator ([`entail`]),
//! rank suspicious lines from the failures ([`faultloc`]), generate and
//! validate candidate patches ([`repair`]), and run batch benchmarks over
//! mutation-generated corpora ([`mutate`], [`eval`]).

pub mod entail;
pub mod eval;
pub mod faultloc;
pub mod hoare;
pub mod lang;
pub mod mutate;
pub mod repair;
