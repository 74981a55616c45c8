//! Exact dense univariate polynomial multiplication over prime fields,
//! extension fields and the rationals, with every algebraic operation
//! routed through an explicit cost ledger.
//!
//! The crate provides several multiplication engines sharing one oracle
//! (schoolbook multiplication):
//!
//! * [`algos::mul_naive`] — schoolbook, the correctness oracle.
//! * [`algos::mul_direct_dft`] — evaluation/interpolation at roots of unity
//!   when the ground field has them.
//! * [`algos::mul_schonhage_strassen`] — negacyclic ring extensions for
//!   characteristic ≠ 2.
//! * [`algos::mul_schonhage_char2`] — trinomial ring extensions for
//!   characteristic 2.
//! * [`algos::mul_cantor_kaltofen`] — cyclotomic ring extensions for any
//!   field, parameterized by a base `s`.
//! * [`algos::mul_generalized`] — a single embed/transform/multiply/
//!   back-transform/unembed driver that reproduces each of the above from
//!   a strategy value.
//!
//! DFTs are computed by [`dft`] (naive evaluation, Cooley-Tukey splits and
//! Rader's prime-order reduction, with a planner choosing between them),
//! over either a field or one of the quotient-ring families in [`rings`].
//! [`meta`] holds the supporting number theory (totients, cyclotomic
//! polynomials, extension-degree functions, DFT-order suitability).

pub mod algos;
pub mod dft;
pub mod fields;
pub mod ledger;
pub mod meta;
pub mod rings;

pub use algos::Poly;
pub use fields::{Field, FieldElement};
pub use ledger::{CostLedger, CostReport};
