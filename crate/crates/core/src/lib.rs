//! Executable pieces of a Weyl-type hierarchy of distal functions.
//!
//! `F₀` is the set of unimodular constants and `F_k` collects unimodular
//! functions whose translation cocycles `f_σ` (defined by `σ(f) = f_σ·f`)
//! all lie in `F_{k−1}`. The crate makes this concrete on:
//!
//! * the integers, where `F_k` is exactly the set of phase polynomials of
//!   degree `k` ([`phase`], [`certify`]);
//! * the bicyclic monoid `⟨p, q | pq = 1⟩` ([`bicyclic`]);
//! * finite semigroups given by multiplication tables ([`semigroup`]);
//! * additive groups of finite commutative rings ([`ring`]);
//!
//! and adds Birkhoff-average and equidistribution checks ([`ergodic`]) plus
//! a deterministic invariant suite ([`selftest`]).

pub mod bicyclic;
pub mod certify;
pub mod ergodic;
pub mod error;
pub mod lattice;
pub mod phase;
pub mod ring;
pub mod selftest;
pub mod semigroup;
pub mod torus;

pub use error::{Error, Result};
pub use phase::PhasePolynomial;
pub use torus::{Mode, TorusPoint};
