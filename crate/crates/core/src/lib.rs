//! Noisy duplication channel toolkit.
//!
//! A noisy duplication channel repeats each input symbol a random number of
//! times (the duration distribution) and passes every copy through a
//! memoryless noise kernel. This crate provides:
//!
//! - channel building blocks: Markov sources, duration distributions, and
//!   finite-output noise models ([`model`]);
//! - seeded trajectory simulation ([`sim`]);
//! - the embedded Markov chain on (symbol, elapsed-duration) pairs that turns
//!   the semi-Markov output process into an ordinary HMM ([`embed`]);
//! - exact forward-algorithm log-probabilities with brute-force enumeration
//!   oracles ([`trellis`]);
//! - Monte Carlo entropy-rate and information-rate estimators together with
//!   convergence diagnostics ([`estimator`]).
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate. All entropies and rates are in bits (log base 2).

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod embed;
pub mod error;
pub mod estimator;
pub mod model;
mod num;
pub mod sim;
mod solve;
pub mod trellis;

pub use error::Error;
pub use model::{
    binary_entropy, bsc_capacity, bsc_two_look_capacity, DurationDistribution, DurationFamily,
    MarkovSource, NoiseModel,
};
pub use sim::Trajectory;
