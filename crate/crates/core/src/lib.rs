//! Numerical toolkit for pointwise regularity in weighted Calderón–Zygmund
//! spaces `T^p_phi(x)` and `t^p_{phi,n}(x)` on sampled functions.
//!
//! The crate covers Boyd weights and their indices ([`boyd`]), sampled test
//! signals ([`signals`]), best local `L^p` polynomial approximation
//! ([`lp_approx`]), jet extraction by polynomial-reproducing mollifiers
//! ([`jet_extract`]), oscillation profiles and membership verdicts
//! ([`oscillation`]), one-dimensional Whitney extension ([`whitney`]) and
//! seeded experiments ([`experiments`]).

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boyd;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod jet_extract;
pub mod lp_approx;
pub mod multi_index;
pub mod oscillation;
pub mod quadrature;
pub mod report;
pub mod signals;
pub mod taylor;
pub mod whitney;

pub use error::{Error, Result};
