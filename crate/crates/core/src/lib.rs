//! Mirror semiquantum key distribution under collective attacks.
//!
//! The crate models the two-mode photonic Fock space used by the Mirror
//! protocol, Alice's four classical operations, Eve's two-stage collective
//! attack, and the observable round statistics those attacks induce. From the
//! statistics it evaluates the Devetak-Winter key rate using the
//! conditional-entropy lower bound minimized over the two unobservable inner
//! products `Re<E0|E3>` and `Re<E1|E2>`.
//!
//! Module map:
//!
//! - [`fock`]: truncated Fock states, basis changes and detector-model
//!   measurement probabilities.
//! - [`protocol`]: Alice's operations, Bob's bases, round classification.
//! - [`adversary`]: Eve's forward state and reverse isometry, plus channel
//!   dilations and a random attack generator.
//! - [`statistics`]: exact and Monte Carlo round statistics.
//! - [`keyrate`]: entropy bound, constraints, minimization, key rate.
//! - [`scenarios`]: closed-form example scenarios, fiber loss, BB84 baseline,
//!   thresholds and curves.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]
#![warn(missing_docs)]

extern crate alloc;

pub mod adversary;
mod error;
pub mod fock;
pub mod keyrate;
mod math;
pub mod protocol;
pub mod scenarios;
pub mod statistics;
pub mod tolerance;

pub use error::{Error, Result};
