//! Exact-rational laboratory for joinings of finite measure-preserving
//! systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`space`]: finite probability spaces, automorphisms, the Halmos metric;
//! * [`markov`]: measure-intertwining kernels, Koopman operators and `Θ`;
//! * [`joining`]: joining tensors, marginals, defects, the operator pairing,
//!   pushforwards and disintegration;
//! * [`polytope`]: exact LP over invariant joinings with independent faces,
//!   backed by the Bland-rule simplex in [`simplex`];
//! * [`torus`]: the group `Z₂^k`, its automorphisms and the measure η;
//! * [`skew`]: skew products, cocycles and rigidity statistics;
//! * [`mixing`]: multiple-mixing correlations and relative mixing.
//!
//! Every number is an arbitrary-precision rational; comparisons are exact.

pub mod error;
pub mod joining;
pub mod markov;
pub mod mixing;
pub mod polytope;
pub mod rational;
pub mod simplex;
pub mod skew;
pub mod space;
pub mod torus;

pub use error::{Error, Result};
pub use joining::{EquivariantField, JoiningTensor, MeasureTensor};
pub use markov::MarkovOperator;
pub use mixing::OffsetVector;
pub use polytope::{LpOutcome, LpStatus, PolytopeSpec, TrivialityCertificate};
pub use rational::Rational;
pub use skew::{RigiditySequence, SampleMode, SkewProduct};
pub use space::{ActionGenerators, Automorphism, FiniteSpace, MeasurableSet};
pub use torus::Z2kContext;
