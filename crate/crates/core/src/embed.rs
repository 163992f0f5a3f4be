//! Embedded Markov chain of the semi-Markov output process.
//!
//! The chain lives on pairs (s, k): source symbol s and elapsed duration k
//! within the current segment. From (s, k) it either extends to (s, k + 1)
//! with the continuation hazard P(K > k | K >= k), or terminates to (s', 1)
//! with P(s' | s) times the stopping hazard P(K = k | K >= k). Every state
//! emits through the noise row of its symbol, so the observed process is an
//! ordinary HMM and the classical forward algorithm applies.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{DurationDistribution, MarkovSource, NoiseModel};
use crate::num;
use crate::solve;

/// HMM on (symbol, elapsed-duration) pairs.
#[derive(Debug, Clone)]
pub struct EmbeddedChain {
    /// States (s, k), s-major then k; states with P(K >= k) = 0 are pruned.
    states: Vec<(usize, usize)>,
    /// Dense row-major transition matrix over `states`.
    transition: Vec<f64>,
    /// Per-state emission rows, `emission[i * num_outputs + y]`.
    emission: Vec<f64>,
    /// Start distribution: the source's initial mass on segment starts (s, 1).
    start: Vec<f64>,
    /// index lookup: (s * k_max + k - 1) -> state index.
    index: Vec<Option<usize>>,
    num_symbols: usize,
    k_max: usize,
    num_outputs: usize,
    duration_mean: f64,
}

impl EmbeddedChain {
    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    #[inline]
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    #[inline]
    pub fn num_symbols(&self) -> usize {
        self.num_symbols
    }

    #[inline]
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn duration_mean(&self) -> f64 {
        self.duration_mean
    }

    /// State index of (s, k), if present.
    pub fn state_index(&self, s: usize, k: usize) -> Option<usize> {
        self.index.get(s * self.k_max + k - 1).copied().flatten()
    }

    #[inline]
    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.states.len() + to]
    }

    pub fn transition_row(&self, from: usize) -> &[f64] {
        let n = self.states.len();
        &self.transition[from * n..(from + 1) * n]
    }

    #[inline]
    pub fn emit(&self, state: usize, y: usize) -> f64 {
        self.emission[state * self.num_outputs + y]
    }

    pub fn emission_row(&self, state: usize) -> &[f64] {
        &self.emission[state * self.num_outputs..(state + 1) * self.num_outputs]
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    pub fn is_irreducible(&self) -> bool {
        solve::is_irreducible(&self.transition, self.states.len())
    }

    /// Plain-text matrix dump: header comment with state labels, one
    /// transition row per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push('#');
        for &(s, k) in &self.states {
            let _ = write!(out, " ({s},{k})");
        }
        out.push('\n');
        let n = self.states.len();
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{:.17}", self.transition[i * n + j]);
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the embedded chain for a source/duration/noise triple.
pub fn build_embedded_chain(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
) -> Result<EmbeddedChain> {
    if source.num_symbols() != noise.num_inputs() {
        return Err(Error::Dimension {
            expected: source.num_symbols(),
            found: noise.num_inputs(),
        });
    }
    let ns = source.num_symbols();
    let k_max = duration.k_max();
    let num_outputs = noise.num_outputs();

    let mut states = Vec::new();
    let mut index = vec![None; ns * k_max];
    for s in 0..ns {
        for k in 1..=k_max {
            if duration.survival(k) > 0.0 {
                index[s * k_max + k - 1] = Some(states.len());
                states.push((s, k));
            }
        }
    }
    let n = states.len();

    let mut transition = vec![0.0f64; n * n];
    let mut emission = vec![0.0f64; n * num_outputs];
    let mut start = vec![0.0f64; n];
    for (i, &(s, k)) in states.iter().enumerate() {
        let extend = duration.hazard_continue(k);
        if extend > 0.0 {
            let j = index[s * k_max + k].expect("extend target exists when hazard > 0");
            transition[i * n + j] = extend;
        }
        let stop = duration.hazard_stop(k);
        if stop > 0.0 {
            for s2 in 0..ns {
                let p = source.transition(s, s2) * stop;
                if p > 0.0 {
                    let j = index[s2 * k_max].expect("segment-start state exists");
                    transition[i * n + j] = p;
                }
            }
        }
        emission[i * num_outputs..(i + 1) * num_outputs]
            .copy_from_slice(noise.emission_row(s));
        if k == 1 {
            start[i] = source.initial(s);
        }
    }

    Ok(EmbeddedChain {
        states,
        transition,
        emission,
        start,
        index,
        num_symbols: ns,
        k_max,
        num_outputs,
        duration_mean: duration.mean(),
    })
}

/// Stationary distribution of the embedded chain with renewal-theoretic
/// cross-check fields.
#[derive(Debug, Clone)]
pub struct StationaryAnalysis {
    /// Stationary probability per embedded state, aligned with `states()`.
    pub pi: Vec<f64>,
    /// Total mass on segment-start states (s, 1); equals 1 / E[K].
    pub segment_start_mass: f64,
    /// 1 / segment_start_mass, for comparison against E[K].
    pub expected_duration_check: f64,
}

pub fn stationary_distribution(chain: &EmbeddedChain) -> Result<StationaryAnalysis> {
    let n = chain.num_states();
    let pi = solve::stationary(&chain.transition, n)?;
    let mut mass = 0.0;
    for (i, &(_, k)) in chain.states.iter().enumerate() {
        if k == 1 {
            mass += pi[i];
        }
    }
    if mass <= 0.0 {
        return Err(Error::SingularSystem);
    }
    Ok(StationaryAnalysis {
        pi,
        segment_start_mass: mass,
        expected_duration_check: 1.0 / mass,
    })
}

impl StationaryAnalysis {
    /// Max elementwise residual of pi P - pi.
    pub fn residual(&self, chain: &EmbeddedChain) -> f64 {
        let n = chain.num_states();
        let mut worst = 0.0f64;
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += self.pi[i] * chain.transition(i, j);
            }
            worst = worst.max(num::abs(acc - self.pi[j]));
        }
        worst
    }
}
