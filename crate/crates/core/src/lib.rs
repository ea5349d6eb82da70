//! Exact-arithmetic toolkit for bipartite and tripartite no-signalling
//! boxes with binary inputs and outputs.
//!
//! * [`boxes`]: tables, validation, marginals, relabelings, builtins and
//!   the text file format.
//! * [`wiring`]: bipartitions, wirings into effective bipartite boxes and
//!   exhaustive wiring search.
//! * [`bell`]: CHSH, Uffink, GYNI and the three-party quantum inequality.
//! * [`lp`] and [`membership`]: exact simplex with certificates, locality
//!   and time-ordered bilocality tests.

pub mod bell;
pub mod boxes;
pub mod error;
pub mod lp;
pub mod membership;
pub mod rational;
pub mod wiring;

pub use error::{Error, Result};
pub use rational::Rational;
