//! Fox calculus, bar chains and differential-form identities for surface
//! group representation spaces in SU(n).
//!
//! The crate has two halves. The exact half ([`freegroup`], [`surfacegroup`],
//! [`barcomplex`]) manipulates words, Fox derivatives and bar chains of the
//! surface group. The numerical half ([`liegroup`], [`forms`]) evaluates the
//! corresponding forms on `SU(n)^{2g}` and checks the chain-level identities
//! pointwise. [`report`] and [`cli`] package both as reproducible suites.

pub mod barcomplex;
pub mod cli;
pub mod forms;
pub mod freegroup;
pub mod liegroup;
pub mod report;
pub mod suites;
pub mod surfacegroup;
