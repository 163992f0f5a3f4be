//! Channel building blocks: Markov source, duration distribution, noise
//! model, plus closed-form reference quantities.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num;
use crate::solve;

/// Tolerance for accepting a probability vector before renormalization.
const VALIDATE_TOL: f64 = 1e-9;

fn validate_pmf(v: &mut [f64], row: usize) -> Result<()> {
    let mut sum = 0.0;
    for &x in v.iter() {
        if !(0.0..=1.0 + VALIDATE_TOL).contains(&x) || !x.is_finite() {
            return Err(Error::RowSum { row, sum: x });
        }
        sum += x;
    }
    if num::abs(sum - 1.0) > VALIDATE_TOL {
        return Err(Error::RowSum { row, sum });
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
    Ok(())
}

/// Ergodic Markov source over symbols `0..num_symbols`.
///
/// `transition[i * n + j]` is P(next = j | current = i). Irreducibility is
/// validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSource {
    n: usize,
    transition: Vec<f64>,
    initial: Vec<f64>,
}

impl MarkovSource {
    pub fn new(transition: Vec<Vec<f64>>, initial: Vec<f64>) -> Result<Self> {
        let n = transition.len();
        if n == 0 || initial.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: initial.len(),
            });
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in transition.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            let mut row = row;
            validate_pmf(&mut row, i)?;
            flat.extend_from_slice(&row);
        }
        let mut initial = initial;
        validate_pmf(&mut initial, usize::MAX)?;
        if !solve::is_irreducible(&flat, n) {
            return Err(Error::Reducible);
        }
        Ok(MarkovSource {
            n,
            transition: flat,
            initial,
        })
    }

    /// The i.i.d. uniform binary source used throughout the experiments.
    pub fn ber_half() -> Self {
        MarkovSource::new(
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![0.5, 0.5],
        )
        .expect("Ber(1/2) source is valid")
    }

    /// Copy of this source restarted from its stationary distribution.
    pub fn with_stationary_initial(&self) -> Result<Self> {
        let pi = self.stationary()?;
        Ok(MarkovSource {
            n: self.n,
            transition: self.transition.clone(),
            initial: pi,
        })
    }

    #[inline]
    pub fn num_symbols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transition[from * self.n + to]
    }

    pub fn transition_row(&self, from: usize) -> &[f64] {
        &self.transition[from * self.n..(from + 1) * self.n]
    }

    #[inline]
    pub fn initial(&self, s: usize) -> f64 {
        self.initial[s]
    }

    pub fn initial_vec(&self) -> &[f64] {
        &self.initial
    }

    pub fn stationary(&self) -> Result<Vec<f64>> {
        solve::stationary(&self.transition, self.n)
    }

    /// Analytic entropy rate sum_s pi(s) H(P(.|s)) in bits per symbol.
    pub fn entropy_rate(&self) -> Result<f64> {
        let pi = self.stationary()?;
        let mut h = 0.0;
        for s in 0..self.n {
            h += pi[s] * num::entropy_bits(self.transition_row(s));
        }
        Ok(h)
    }
}

/// Named parameters of the built-in duration families, kept for provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DurationParam {
    Bernoulli { pd: f64 },
    Geometric { pd: f64, k_max: usize },
}

/// I.i.d. duration distribution on a finite support of positive integers.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationDistribution {
    support: Vec<usize>,
    pmf: Vec<f64>,
    /// pmf re-indexed densely over 1..=max(support), zeros filled in.
    dense: Vec<f64>,
    /// survival[k-1] = P(K >= k) for k in 1..=max(support).
    survival: Vec<f64>,
    mean: f64,
    param: Option<DurationParam>,
}

impl DurationDistribution {
    pub fn new(support: Vec<usize>, pmf: Vec<f64>) -> Result<Self> {
        Self::with_param(support, pmf, None)
    }

    fn with_param(
        support: Vec<usize>,
        pmf: Vec<f64>,
        param: Option<DurationParam>,
    ) -> Result<Self> {
        if support.is_empty() || support.len() != pmf.len() {
            return Err(Error::Dimension {
                expected: support.len(),
                found: pmf.len(),
            });
        }
        for w in support.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("duration support must be strictly increasing"));
            }
        }
        if support[0] == 0 {
            return Err(Error::Config("duration support must be strictly positive"));
        }
        let mut pmf = pmf;
        validate_pmf(&mut pmf, 0)?;
        let k_max = *support.last().unwrap();
        let mut dense = vec![0.0; k_max];
        for (&k, &p) in support.iter().zip(pmf.iter()) {
            dense[k - 1] = p;
        }
        let mut survival = vec![0.0; k_max];
        let mut tail = 0.0;
        for k in (1..=k_max).rev() {
            tail += dense[k - 1];
            survival[k - 1] = tail;
        }
        let mean = support
            .iter()
            .zip(pmf.iter())
            .map(|(&k, &p)| k as f64 * p)
            .sum();
        Ok(DurationDistribution {
            support,
            pmf,
            dense,
            survival,
            mean,
            param,
        })
    }

    /// Durations on {1, 2}: each symbol is duplicated once with probability
    /// `pd`. Degenerate endpoints keep the two-element support with a zero
    /// entry.
    pub fn bernoulli(pd: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pd) {
            return Err(Error::Range {
                name: "pd",
                value: pd,
            });
        }
        Self::with_param(
            vec![1, 2],
            vec![1.0 - pd, pd],
            Some(DurationParam::Bernoulli { pd }),
        )
    }

    /// Geometric durations P(K = k) proportional to pd^(k-1) (1 - pd),
    /// truncated to {1..k_max} and renormalized.
    pub fn geometric(pd: f64, k_max: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&pd) {
            return Err(Error::Range {
                name: "pd",
                value: pd,
            });
        }
        if k_max < 1 {
            return Err(Error::Range {
                name: "k_max",
                value: k_max as f64,
            });
        }
        let mut weights = Vec::with_capacity(k_max);
        let mut w = 1.0 - pd;
        for _ in 0..k_max {
            weights.push(w);
            w *= pd;
        }
        let total: f64 = weights.iter().sum();
        for x in weights.iter_mut() {
            *x /= total;
        }
        Self::with_param(
            (1..=k_max).collect(),
            weights,
            Some(DurationParam::Geometric { pd, k_max }),
        )
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    #[inline]
    pub fn min_duration(&self) -> usize {
        // Smallest duration with positive mass; zero-mass entries at the low
        // end (e.g. Bernoulli pd = 1) do not shrink the feasible band.
        self.support
            .iter()
            .zip(self.pmf.iter())
            .find(|(_, &p)| p > 0.0)
            .map(|(&k, _)| k)
            .unwrap_or(self.support[0])
    }

    #[inline]
    pub fn max_duration(&self) -> usize {
        self.support
            .iter()
            .zip(self.pmf.iter())
            .rev()
            .find(|(_, &p)| p > 0.0)
            .map(|(&k, _)| k)
            .unwrap_or(*self.support.last().unwrap())
    }

    /// Largest support point (including zero-mass entries).
    #[inline]
    pub fn k_max(&self) -> usize {
        *self.support.last().unwrap()
    }

    /// P(K = k) for any k >= 1.
    #[inline]
    pub fn prob(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.dense.len() {
            self.dense[k - 1]
        } else {
            0.0
        }
    }

    /// P(K >= k).
    #[inline]
    pub fn survival(&self, k: usize) -> f64 {
        if k < 1 {
            1.0
        } else if k <= self.survival.len() {
            self.survival[k - 1]
        } else {
            0.0
        }
    }

    /// Hazard P(K = k | K >= k); 0 where P(K >= k) = 0.
    #[inline]
    pub fn hazard_stop(&self, k: usize) -> f64 {
        let s = self.survival(k);
        if s > 0.0 {
            self.prob(k) / s
        } else {
            0.0
        }
    }

    /// Continuation P(K > k | K >= k).
    #[inline]
    pub fn hazard_continue(&self, k: usize) -> f64 {
        let s = self.survival(k);
        if s > 0.0 {
            self.survival(k + 1) / s
        } else {
            0.0
        }
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn param(&self) -> Option<DurationParam> {
        self.param
    }
}

/// Built-in duration families, used by sweeps and CLI presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DurationFamily {
    Bernoulli,
    Geometric { k_max: usize },
}

impl DurationFamily {
    pub fn build(&self, pd: f64) -> Result<DurationDistribution> {
        match *self {
            DurationFamily::Bernoulli => DurationDistribution::bernoulli(pd),
            DurationFamily::Geometric { k_max } => DurationDistribution::geometric(pd, k_max),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DurationFamily::Bernoulli => "bernoulli",
            DurationFamily::Geometric { .. } => "geometric",
        }
    }

    pub fn k_max(&self) -> usize {
        match *self {
            DurationFamily::Bernoulli => 2,
            DurationFamily::Geometric { k_max } => k_max,
        }
    }
}

/// Discrete memoryless noise: one emission row per source symbol.
///
/// The channel mapping and the noise kernel are fused into the single
/// row-stochastic matrix `emission[s * num_outputs + y] = P(Y = y | Z = s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    num_inputs: usize,
    num_outputs: usize,
    emission: Vec<f64>,
}

impl NoiseModel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let num_inputs = rows.len();
        if num_inputs == 0 {
            return Err(Error::Dimension {
                expected: 1,
                found: 0,
            });
        }
        let num_outputs = rows[0].len();
        let mut emission = Vec::with_capacity(num_inputs * num_outputs);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != num_outputs {
                return Err(Error::Dimension {
                    expected: num_outputs,
                    found: row.len(),
                });
            }
            let mut row = row;
            validate_pmf(&mut row, i)?;
            emission.extend_from_slice(&row);
        }
        Ok(NoiseModel {
            num_inputs,
            num_outputs,
            emission,
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Range { name: "p", value: p });
        }
        NoiseModel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    #[inline]
    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    #[inline]
    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    #[inline]
    pub fn emit(&self, s: usize, y: usize) -> f64 {
        self.emission[s * self.num_outputs + y]
    }

    pub fn emission_row(&self, s: usize) -> &[f64] {
        &self.emission[s * self.num_outputs..(s + 1) * self.num_outputs]
    }
}

/// Binary entropy function H_b(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -num::xlog2x(p) - num::xlog2x(1.0 - p)
}

/// Capacity of the BSC with crossover probability `p`: 1 - H_b(p) bits.
pub fn bsc_capacity(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range { name: "p", value: p });
    }
    Ok(1.0 - binary_entropy(p))
}

/// Capacity of the BSC with two independent looks at the same input bit.
///
/// By symmetry the uniform input achieves capacity, so this is the mutual
/// information of x -> (y1, y2) with uniform x, computed from the 4-outcome
/// output distribution.
pub fn bsc_two_look_capacity(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range { name: "p", value: p });
    }
    let q = 1.0 - p;
    let out = [
        0.5 * (q * q + p * p), // (0,0)
        p * q,                 // (0,1)
        p * q,                 // (1,0)
        0.5 * (q * q + p * p), // (1,1)
    ];
    Ok(num::entropy_bits(&out) - 2.0 * binary_entropy(p))
}
