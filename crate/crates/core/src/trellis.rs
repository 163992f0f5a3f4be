//! Exact log-probability computations by dynamic programming, plus
//! brute-force enumeration oracles for validating them.
//!
//! All log-probabilities are log base 2. The forward recursions run in the
//! linear domain with per-step normalization; the accumulated log
//! normalizers give the total log-probability without underflow.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::embed::{build_embedded_chain, EmbeddedChain};
use crate::error::{Error, Result};
use crate::model::{DurationDistribution, MarkovSource, NoiseModel};
use crate::num;

/// Enumeration guard for the brute-force oracles.
const ENUM_GUARD: u64 = 1_000_000;

/// Result of a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardResult {
    /// log2 probability of the observation sequence (<= 0).
    pub log_prob: f64,
    /// Number of trellis steps taken.
    pub steps: usize,
    /// Per-step log2 normalizers, retained on request for diagnostics.
    pub per_step_log_normalizers: Option<Vec<f64>>,
}

/// log2 P(S_1^m = s_seq) under the Markov source.
pub fn log_prob_source(source: &MarkovSource, s_seq: &[usize]) -> Result<ForwardResult> {
    if s_seq.is_empty() {
        return Err(Error::Length {
            len: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let mut log_prob = 0.0;
    let p0 = source.initial(s_seq[0]);
    if p0 <= 0.0 {
        return Err(Error::ZeroProbability { step: 0 });
    }
    log_prob += num::log2(p0);
    for (step, w) in s_seq.windows(2).enumerate() {
        let p = source.transition(w[0], w[1]);
        if p <= 0.0 {
            return Err(Error::ZeroProbability { step: step + 1 });
        }
        log_prob += num::log2(p);
    }
    Ok(ForwardResult {
        log_prob,
        steps: s_seq.len(),
        per_step_log_normalizers: None,
    })
}

/// log2 P(Y_1^t = y_seq) under the embedded HMM (unconstrained marginal,
/// fresh-segment start), by the scaled forward algorithm.
pub fn forward_log_prob_embedded(chain: &EmbeddedChain, y_seq: &[usize]) -> Result<ForwardResult> {
    forward_log_prob_embedded_with(chain, y_seq, false)
}

pub fn forward_log_prob_embedded_with(
    chain: &EmbeddedChain,
    y_seq: &[usize],
    keep_normalizers: bool,
) -> Result<ForwardResult> {
    if y_seq.is_empty() {
        return Err(Error::Length {
            len: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let n = chain.num_states();
    // Incoming sparse edges per destination state.
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, &p) in chain.transition_row(i).iter().enumerate() {
            if p > 0.0 {
                incoming[j].push((i, p));
            }
        }
    }

    let mut normalizers = if keep_normalizers {
        Some(Vec::with_capacity(y_seq.len()))
    } else {
        None
    };
    let mut alpha = vec![0.0f64; n];
    let mut next = vec![0.0f64; n];
    let mut log_prob = 0.0;

    for (t, &y) in y_seq.iter().enumerate() {
        if t == 0 {
            for j in 0..n {
                alpha[j] = chain.start()[j] * chain.emit(j, y);
            }
        } else {
            for (j, edges) in incoming.iter().enumerate() {
                let mut acc = 0.0;
                for &(i, p) in edges {
                    acc += alpha[i] * p;
                }
                next[j] = acc * chain.emit(j, y);
            }
            core::mem::swap(&mut alpha, &mut next);
        }
        let norm: f64 = alpha.iter().sum();
        if norm <= 0.0 {
            return Err(Error::ZeroProbability { step: t });
        }
        let inv = 1.0 / norm;
        for a in alpha.iter_mut() {
            *a *= inv;
        }
        let l = num::log2(norm);
        log_prob += l;
        if let Some(ns) = normalizers.as_mut() {
            ns.push(l);
        }
    }

    Ok(ForwardResult {
        log_prob,
        steps: y_seq.len(),
        per_step_log_normalizers: normalizers,
    })
}

/// log2 P(Y_1^{T_m} = y_seq | S_1^m = s_seq), marginalizing the duration
/// vector subject to the total-length constraint, via a segment-aligned
/// lattice over (segment index, elapsed duration).
///
/// Exact: the lattice is restricted only by the feasibility band.
pub fn forward_log_prob_conditional(
    s_seq: &[usize],
    duration: &DurationDistribution,
    noise: &NoiseModel,
    y_seq: &[usize],
) -> Result<ForwardResult> {
    forward_log_prob_conditional_pruned(s_seq, duration, noise, y_seq, 0.0)
}

/// As [`forward_log_prob_conditional`], additionally dropping lattice rows
/// whose normalized mass falls below `prune_threshold` at each step.
///
/// The exact band is quadratic in the block length; for long Monte Carlo
/// blocks a small threshold (say 1e-13) keeps the active window narrow while
/// the discarded mass stays far below the Monte Carlo noise floor. A zero
/// threshold disables pruning.
pub fn forward_log_prob_conditional_pruned(
    s_seq: &[usize],
    duration: &DurationDistribution,
    noise: &NoiseModel,
    y_seq: &[usize],
    prune_threshold: f64,
) -> Result<ForwardResult> {
    let m = s_seq.len();
    if m == 0 {
        return Err(Error::Length {
            len: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let kmin = duration.min_duration();
    let km = duration.max_duration();
    let t_total = y_seq.len();
    if t_total < m * kmin || t_total > m * km {
        return Err(Error::Length {
            len: t_total,
            min: m * kmin,
            max: m * km,
        });
    }

    // Hazards indexed by elapsed duration 1..=km.
    let h_ext: Vec<f64> = (1..=km).map(|k| duration.hazard_continue(k)).collect();
    let h_stop: Vec<f64> = (1..=km).map(|k| duration.hazard_stop(k)).collect();

    // Active window over segment indices [lo..=hi], each row km wide.
    let mut lo = 1usize;
    let mut hi = 1usize;
    let mut alpha = vec![0.0f64; km];
    alpha[0] = noise.emit(s_seq[0], y_seq[0]);
    let mut next: Vec<f64> = Vec::new();
    let mut log_prob = 0.0;

    // Feasibility of holding state (l, k) after `consumed` samples.
    let feasible = |l: usize, k: usize, consumed: usize| -> bool {
        let rem = t_total - consumed;
        rem >= (m - l) * kmin && rem <= (m - l) * km + (km - k)
    };

    // Apply feasibility to the initial cell, then normalize step 1.
    if !feasible(1, 1, 1) {
        alpha[0] = 0.0;
    }
    let norm0: f64 = alpha.iter().sum();
    if norm0 <= 0.0 {
        return Err(Error::ZeroProbability { step: 0 });
    }
    log_prob += num::log2(norm0);
    for a in alpha.iter_mut() {
        *a /= norm0;
    }

    for t in 1..t_total {
        let new_lo = lo;
        let new_hi = (hi + 1).min(m);
        let width = new_hi - new_lo + 1;
        next.clear();
        next.resize(width * km, 0.0);
        for l in lo..=hi {
            let base = (l - lo) * km;
            let nbase = (l - new_lo) * km;
            for k in 1..=km {
                let a = alpha[base + k - 1];
                if a <= 0.0 {
                    continue;
                }
                if k < km && h_ext[k - 1] > 0.0 {
                    next[nbase + k] += a * h_ext[k - 1];
                }
                if l < m && h_stop[k - 1] > 0.0 {
                    next[(l + 1 - new_lo) * km] += a * h_stop[k - 1];
                }
            }
        }
        // Emissions for y_t and feasibility, then normalize.
        let consumed = t + 1;
        let mut norm = 0.0;
        for l in new_lo..=new_hi {
            let w_row = noise.emission_row(s_seq[l - 1]);
            let base = (l - new_lo) * km;
            for k in 1..=km {
                let cell = &mut next[base + k - 1];
                if *cell <= 0.0 {
                    continue;
                }
                if feasible(l, k, consumed) {
                    *cell *= w_row[y_seq[t]];
                    norm += *cell;
                } else {
                    *cell = 0.0;
                }
            }
        }
        if norm <= 0.0 {
            return Err(Error::ZeroProbability { step: t });
        }
        let inv = 1.0 / norm;
        for a in next.iter_mut() {
            *a *= inv;
        }
        log_prob += num::log2(norm);

        // Trim window ends whose row mass dropped below the threshold.
        let (mut lo2, mut hi2) = (new_lo, new_hi);
        if prune_threshold > 0.0 {
            let row_mass = |l: usize| -> f64 {
                let base = (l - new_lo) * km;
                next[base..base + km].iter().sum()
            };
            while lo2 < hi2 && row_mass(lo2) < prune_threshold {
                lo2 += 1;
            }
            while hi2 > lo2 && row_mass(hi2) < prune_threshold {
                hi2 -= 1;
            }
        }
        if lo2 != new_lo || hi2 != new_hi {
            let width2 = hi2 - lo2 + 1;
            let mut trimmed = vec![0.0f64; width2 * km];
            trimmed.copy_from_slice(
                &next[(lo2 - new_lo) * km..(lo2 - new_lo) * km + width2 * km],
            );
            alpha = trimmed;
        } else {
            core::mem::swap(&mut alpha, &mut next);
        }
        lo = lo2;
        hi = hi2;
    }

    // The final segment must terminate exactly at t_total.
    if m < lo || m > hi {
        return Err(Error::ZeroProbability { step: t_total });
    }
    let base = (m - lo) * km;
    let mut tail = 0.0;
    for k in 1..=km {
        tail += alpha[base + k - 1] * h_stop[k - 1];
    }
    if tail <= 0.0 {
        return Err(Error::ZeroProbability { step: t_total });
    }
    log_prob += num::log2(tail);

    Ok(ForwardResult {
        log_prob,
        steps: t_total,
        per_step_log_normalizers: None,
    })
}

/// log2 P(Y_1^{T_m} = y_seq with exactly m completed segments), marginalizing
/// both the source path and the durations. Forward pass over (symbol,
/// elapsed duration, segments started); intended for small and medium
/// instances.
pub fn exact_log_prob_output_constrained(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    m: usize,
    y_seq: &[usize],
) -> Result<ForwardResult> {
    if m == 0 {
        return Err(Error::Range {
            name: "m",
            value: 0.0,
        });
    }
    let kmin = duration.min_duration();
    let km = duration.max_duration();
    let ns = source.num_symbols();
    let t_total = y_seq.len();
    if t_total < m * kmin || t_total > m * km {
        return Err(Error::Length {
            len: t_total,
            min: m * kmin,
            max: m * km,
        });
    }

    let h_ext: Vec<f64> = (1..=km).map(|k| duration.hazard_continue(k)).collect();
    let h_stop: Vec<f64> = (1..=km).map(|k| duration.hazard_stop(k)).collect();

    // alpha[((l - 1) * ns + s) * km + k - 1], l = current segment 1..=m.
    let size = m * ns * km;
    let mut alpha = vec![0.0f64; size];
    let mut next = vec![0.0f64; size];
    let idx = |l: usize, s: usize, k: usize| ((l - 1) * ns + s) * km + k - 1;
    let feasible = |l: usize, k: usize, consumed: usize| -> bool {
        let rem = t_total - consumed;
        rem >= (m - l) * kmin && rem <= (m - l) * km + (km - k)
    };

    let mut log_prob = 0.0;
    for s in 0..ns {
        if feasible(1, 1, 1) {
            alpha[idx(1, s, 1)] = source.initial(s) * noise.emit(s, y_seq[0]);
        }
    }
    let norm0: f64 = alpha.iter().sum();
    if norm0 <= 0.0 {
        return Err(Error::ZeroProbability { step: 0 });
    }
    for a in alpha.iter_mut() {
        *a /= norm0;
    }
    log_prob += num::log2(norm0);

    for t in 1..t_total {
        next.iter_mut().for_each(|x| *x = 0.0);
        for l in 1..=m {
            for s in 0..ns {
                for k in 1..=km {
                    let a = alpha[idx(l, s, k)];
                    if a <= 0.0 {
                        continue;
                    }
                    if k < km && h_ext[k - 1] > 0.0 {
                        next[idx(l, s, k + 1)] += a * h_ext[k - 1];
                    }
                    if l < m && h_stop[k - 1] > 0.0 {
                        let w = a * h_stop[k - 1];
                        for s2 in 0..ns {
                            let p = source.transition(s, s2);
                            if p > 0.0 {
                                next[idx(l + 1, s2, 1)] += w * p;
                            }
                        }
                    }
                }
            }
        }
        let consumed = t + 1;
        let mut norm = 0.0;
        for l in 1..=m {
            for s in 0..ns {
                let e = noise.emit(s, y_seq[t]);
                for k in 1..=km {
                    let cell = &mut next[idx(l, s, k)];
                    if *cell <= 0.0 {
                        continue;
                    }
                    if feasible(l, k, consumed) {
                        *cell *= e;
                        norm += *cell;
                    } else {
                        *cell = 0.0;
                    }
                }
            }
        }
        if norm <= 0.0 {
            return Err(Error::ZeroProbability { step: t });
        }
        let inv = 1.0 / norm;
        for a in next.iter_mut() {
            *a *= inv;
        }
        log_prob += num::log2(norm);
        core::mem::swap(&mut alpha, &mut next);
    }

    let mut tail = 0.0;
    for s in 0..ns {
        for k in 1..=km {
            tail += alpha[idx(m, s, k)] * h_stop[k - 1];
        }
    }
    if tail <= 0.0 {
        return Err(Error::ZeroProbability { step: t_total });
    }
    log_prob += num::log2(tail);

    Ok(ForwardResult {
        log_prob,
        steps: t_total,
        per_step_log_normalizers: None,
    })
}

/// Which output law the brute-force oracle enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalVariant {
    /// P(Y_1^{T_m} = y, T_m = t): exactly m completed segments.
    Constrained,
    /// P(Y_1^t = y) under the embedded-chain law (no segment-count
    /// constraint).
    Unconstrained,
}

/// Exact probability table over all y in (output alphabet)^t by exhaustive
/// enumeration; entry `i` is the probability of the base-|Y| encoding of y.
pub fn brute_force_output_marginal(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    m: usize,
    t: usize,
    variant: MarginalVariant,
) -> Result<Vec<f64>> {
    let n_out = noise.num_outputs();
    let table_len = checked_pow(n_out as u64, t as u32).ok_or(Error::TooLarge {
        terms: u64::MAX,
        limit: ENUM_GUARD,
    })?;
    match variant {
        MarginalVariant::Unconstrained => {
            let chain = build_embedded_chain(source, duration, noise)?;
            let n = chain.num_states() as u64;
            let terms = checked_pow(n * n_out as u64, t as u32).unwrap_or(u64::MAX);
            if terms > ENUM_GUARD {
                return Err(Error::TooLarge {
                    terms,
                    limit: ENUM_GUARD,
                });
            }
            let mut table = vec![0.0f64; table_len as usize];
            // Joint recursion over (state path, output string).
            fn recurse(
                chain: &EmbeddedChain,
                t: usize,
                depth: usize,
                state: usize,
                y_code: usize,
                prob: f64,
                table: &mut [f64],
            ) {
                if depth == t {
                    table[y_code] += prob;
                    return;
                }
                let n = chain.num_states();
                let n_out = chain.num_outputs();
                for j in 0..n {
                    let pt = if depth == 0 {
                        if j == state {
                            chain.start()[j]
                        } else {
                            0.0
                        }
                    } else {
                        chain.transition(state, j)
                    };
                    if pt <= 0.0 {
                        continue;
                    }
                    for y in 0..n_out {
                        let pe = chain.emit(j, y);
                        if pe > 0.0 {
                            recurse(
                                chain,
                                t,
                                depth + 1,
                                j,
                                y_code * n_out + y,
                                prob * pt * pe,
                                table,
                            );
                        }
                    }
                }
            }
            // Seed the recursion once per possible first state; the depth-0
            // branch only takes j == state, so each start state is counted
            // exactly once.
            for first in 0..chain.num_states() {
                recurse(&chain, t, 0, first, 0, 1.0, &mut table);
            }
            Ok(table)
        }
        MarginalVariant::Constrained => {
            let ns = source.num_symbols();
            let supp: Vec<usize> = duration
                .support()
                .iter()
                .zip(duration.pmf().iter())
                .filter(|(_, &p)| p > 0.0)
                .map(|(&k, _)| k)
                .collect();
            let probs: Vec<f64> = duration.pmf().iter().copied().filter(|&p| p > 0.0).collect();
            // Total y-work bound: ns^m * (sum_k n_out^k)^m.
            let per_seg: u64 = supp
                .iter()
                .map(|&k| checked_pow(n_out as u64, k as u32).unwrap_or(u64::MAX))
                .fold(0u64, |a, b| a.saturating_add(b));
            let terms = checked_pow(ns as u64, m as u32)
                .and_then(|a| checked_pow(per_seg, m as u32).map(|b| a.saturating_mul(b)))
                .unwrap_or(u64::MAX);
            if terms > ENUM_GUARD {
                return Err(Error::TooLarge {
                    terms,
                    limit: ENUM_GUARD,
                });
            }
            let mut table = vec![0.0f64; table_len as usize];
            let mut s_vec = vec![0usize; m];
            let mut k_idx = vec![0usize; m];
            loop {
                // Source path probability.
                let mut ps = source.initial(s_vec[0]);
                for w in s_vec.windows(2) {
                    ps *= source.transition(w[0], w[1]);
                }
                if ps > 0.0 {
                    loop {
                        let total: usize = k_idx.iter().map(|&i| supp[i]).sum();
                        if total == t {
                            let pk: f64 = k_idx.iter().map(|&i| probs[i]).product();
                            // Expand z and accumulate over all y.
                            let mut z = Vec::with_capacity(t);
                            for (l, &ki) in k_idx.iter().enumerate() {
                                for _ in 0..supp[ki] {
                                    z.push(s_vec[l]);
                                }
                            }
                            accumulate_outputs(noise, &z, ps * pk, &mut table);
                        }
                        if !advance(&mut k_idx, supp.len()) {
                            break;
                        }
                    }
                }
                if !advance(&mut s_vec, ns) {
                    break;
                }
            }
            Ok(table)
        }
    }
}

/// Adds p * prod_t W[z_t][y_t] to table[y] for every y.
fn accumulate_outputs(noise: &NoiseModel, z: &[usize], p: f64, table: &mut [f64]) {
    let n_out = noise.num_outputs();
    fn recurse(
        noise: &NoiseModel,
        z: &[usize],
        depth: usize,
        y_code: usize,
        prob: f64,
        n_out: usize,
        table: &mut [f64],
    ) {
        if depth == z.len() {
            table[y_code] += prob;
            return;
        }
        let row = noise.emission_row(z[depth]);
        for (y, &pe) in row.iter().enumerate() {
            if pe > 0.0 {
                recurse(noise, z, depth + 1, y_code * n_out + y, prob * pe, n_out, table);
            }
        }
    }
    recurse(noise, z, 0, 0, p, n_out, table);
}

/// Mixed-radix counter increment; returns false on wrap-around.
fn advance(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

/// Exact block entropies (in bits, not rates) from exhaustive enumeration.
#[derive(Debug, Clone, Copy)]
pub struct BlockEntropies {
    /// H(S_1^m).
    pub h_source: f64,
    /// H(Y_1^{T_m}) over the variable-length output law.
    pub h_output: f64,
    /// H(S_1^m, Y_1^{T_m}).
    pub h_joint: f64,
}

pub fn exact_block_entropies(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    m: usize,
) -> Result<BlockEntropies> {
    if m == 0 {
        return Err(Error::Range {
            name: "m",
            value: 0.0,
        });
    }
    let ns = source.num_symbols();
    let n_out = noise.num_outputs();
    let supp: Vec<usize> = duration
        .support()
        .iter()
        .zip(duration.pmf().iter())
        .filter(|(_, &p)| p > 0.0)
        .map(|(&k, _)| k)
        .collect();
    let probs: Vec<f64> = duration.pmf().iter().copied().filter(|&p| p > 0.0).collect();
    let per_seg: u64 = supp
        .iter()
        .map(|&k| checked_pow(n_out as u64, k as u32).unwrap_or(u64::MAX))
        .fold(0u64, |a, b| a.saturating_add(b));
    let terms = checked_pow(ns as u64, m as u32)
        .and_then(|a| checked_pow(per_seg, m as u32).map(|b| a.saturating_mul(b)))
        .unwrap_or(u64::MAX);
    if terms > ENUM_GUARD {
        return Err(Error::TooLarge {
            terms,
            limit: ENUM_GUARD,
        });
    }

    let mut h_source_acc = 0.0;
    // Keyed by (t, y_code) and (s_code, t, y_code); different lengths are
    // distinct outcomes of the variable-length output law.
    let mut p_y: BTreeMap<(usize, u64), f64> = BTreeMap::new();
    let mut p_sy: BTreeMap<(u64, usize, u64), f64> = BTreeMap::new();

    let mut s_vec = vec![0usize; m];
    loop {
        let mut ps = source.initial(s_vec[0]);
        for w in s_vec.windows(2) {
            ps *= source.transition(w[0], w[1]);
        }
        if ps > 0.0 {
            h_source_acc -= num::xlog2x(ps);
            let s_code = s_vec.iter().fold(0u64, |acc, &s| acc * ns as u64 + s as u64);
            let mut k_idx = vec![0usize; m];
            loop {
                let pk: f64 = k_idx.iter().map(|&i| probs[i]).product();
                if pk > 0.0 {
                    let t: usize = k_idx.iter().map(|&i| supp[i]).sum();
                    let mut z = Vec::with_capacity(t);
                    for (l, &ki) in k_idx.iter().enumerate() {
                        for _ in 0..supp[ki] {
                            z.push(s_vec[l]);
                        }
                    }
                    accumulate_entropy_maps(
                        noise, &z, ps * pk, s_code, t, &mut p_y, &mut p_sy,
                    );
                }
                if !advance(&mut k_idx, supp.len()) {
                    break;
                }
            }
        }
        if !advance(&mut s_vec, ns) {
            break;
        }
    }

    let h_output = -p_y.values().map(|&p| num::xlog2x(p)).sum::<f64>();
    let h_joint = -p_sy.values().map(|&p| num::xlog2x(p)).sum::<f64>();
    Ok(BlockEntropies {
        h_source: h_source_acc,
        h_output,
        h_joint,
    })
}

fn accumulate_entropy_maps(
    noise: &NoiseModel,
    z: &[usize],
    p: f64,
    s_code: u64,
    t: usize,
    p_y: &mut BTreeMap<(usize, u64), f64>,
    p_sy: &mut BTreeMap<(u64, usize, u64), f64>,
) {
    let n_out = noise.num_outputs();
    fn recurse(
        noise: &NoiseModel,
        z: &[usize],
        depth: usize,
        y_code: u64,
        prob: f64,
        n_out: usize,
        s_code: u64,
        t: usize,
        p_y: &mut BTreeMap<(usize, u64), f64>,
        p_sy: &mut BTreeMap<(u64, usize, u64), f64>,
    ) {
        if depth == z.len() {
            *p_y.entry((t, y_code)).or_insert(0.0) += prob;
            *p_sy.entry((s_code, t, y_code)).or_insert(0.0) += prob;
            return;
        }
        let row = noise.emission_row(z[depth]);
        for (y, &pe) in row.iter().enumerate() {
            if pe > 0.0 {
                recurse(
                    noise,
                    z,
                    depth + 1,
                    y_code * n_out as u64 + y as u64,
                    prob * pe,
                    n_out,
                    s_code,
                    t,
                    p_y,
                    p_sy,
                );
            }
        }
    }
    recurse(noise, z, 0, 0, p, n_out, s_code, t, p_y, p_sy);
}
