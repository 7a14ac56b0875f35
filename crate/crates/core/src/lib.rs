//! Finite-dimensional quantum AIXI.
//!
//! Density operators and instruments ([`linalg`], [`channel`]), an
//! enumerable class of quantum environments ([`env`]), Bayesian mixtures
//! over that class ([`induction`]), exact expectimax planning and the
//! interaction loop ([`agent`]), and the experiment harness ([`harness`]).

pub mod agent;
pub mod channel;
pub mod env;
pub mod error;
pub mod harness;
pub mod induction;
pub mod linalg;
pub mod random;
pub mod reference;

pub use error::{Error, Result};
