//! Exact computation of real radicals of left modules over the free *-algebra.
//!
//! The pipeline: reduced left Gröbner bases ([`groebner`]), chip spaces and
//! their orders ([`chips`], [`orders`]), SOS detection through a linear matrix
//! pencil and a dense SDP core ([`sos`], [`sdp`]), the real radical fixpoint
//! ([`realradical`]), GNS witnesses for non-membership ([`witness`]) and the
//! reduction of ℂ/ℍ-coefficient problems to the real case ([`fieldext`]).

pub mod chips;
pub mod error;
pub mod fieldext;
pub mod freealg;
pub mod groebner;
pub mod linalg;
pub mod orders;
pub mod problem;
pub mod realradical;
pub mod sdp;
pub mod sos;
pub mod syntax;
pub mod witness;

pub use error::{Error, Result};
