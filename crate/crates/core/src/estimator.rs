//! Monte Carlo estimation of entropy rates and the achievable information
//! rate, convergence diagnostics, and numerical checks of the supporting
//! identities.
//!
//! Per replicate, one trajectory supplies all three sample entropy rates
//! (one information-density sample): the source term from the exact Markov
//! likelihood, the output term from the embedded-HMM forward marginal, and
//! the joint term from the duration-marginalizing conditional lattice.

use alloc::vec::Vec;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::embed::{build_embedded_chain, EmbeddedChain};
use crate::error::{Error, Result};
use crate::model::{DurationDistribution, DurationFamily, MarkovSource, NoiseModel};
use crate::num;
use crate::sim::{replicate_seeds, sample_trajectory};
use crate::trellis;

/// Default lattice pruning threshold for long Monte Carlo blocks. The
/// discarded mass is orders of magnitude below the Monte Carlo noise floor.
pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-13;

/// Estimator knobs.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorOptions {
    /// Report the analytic source entropy rate instead of the sampled one.
    /// The information-rate estimate is unaffected (the source term cancels
    /// in the information density).
    pub analytic_source: bool,
    /// Pruning threshold for the conditional lattice; 0 disables pruning.
    pub prune_threshold: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            analytic_source: false,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        }
    }
}

/// One information-density sample from a single trajectory.
#[derive(Debug, Clone, Copy)]
pub struct DensitySample {
    /// -(1/m) log2 P(S_1^m), bits per channel use.
    pub h_source: f64,
    /// -(1/m) log2 P_emb(Y_1^{T_m}), bits per channel use.
    pub h_output: f64,
    /// -(1/m) log2 P(Y_1^{T_m} | S_1^m), bits per channel use.
    pub h_cond: f64,
    /// Realized output length T_m.
    pub t_m: usize,
}

impl DensitySample {
    /// Joint sample entropy rate.
    pub fn h_joint(&self) -> f64 {
        self.h_source + self.h_cond
    }

    /// Information density: h_output - h_cond (the source term cancels).
    pub fn info(&self) -> f64 {
        self.h_output - self.h_cond
    }
}

/// Draws one trajectory and computes its information-density sample,
/// reusing a prebuilt embedded chain.
pub fn information_density_sample(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    chain: &EmbeddedChain,
    m: usize,
    seed: u64,
    prune_threshold: f64,
) -> Result<DensitySample> {
    let tr = sample_trajectory(source, duration, noise, m, seed)?;
    let mf = m as f64;
    let h_source = -trellis::log_prob_source(source, &tr.states)?.log_prob / mf;
    let h_output = -trellis::forward_log_prob_embedded(chain, &tr.outputs)?.log_prob / mf;
    let h_cond = -trellis::forward_log_prob_conditional_pruned(
        &tr.states,
        duration,
        noise,
        &tr.outputs,
        prune_threshold,
    )?
    .log_prob
        / mf;
    Ok(DensitySample {
        h_source,
        h_output,
        h_cond,
        t_m: tr.total_length(),
    })
}

/// Aggregated Monte Carlo estimate.
#[derive(Debug, Clone)]
pub struct EstimateResult {
    /// Source sample entropy rate (or analytic rate, on request).
    pub h_source: f64,
    /// Output sample entropy rate via the embedded-HMM marginal.
    pub h_output: f64,
    /// Joint sample entropy rate.
    pub h_joint: f64,
    /// Information-rate estimate, bits per channel use.
    pub info_rate: f64,
    pub m: usize,
    /// Mean realized output length across replicates.
    pub t_m: f64,
    pub replicates: usize,
    /// 95% confidence half-width from the replicate standard error; absent
    /// for single-replicate runs.
    pub ci95_halfwidth: Option<f64>,
    pub seed: u64,
    /// Filled in by callers that time the run; 0 otherwise.
    pub wall_time_s: f64,
}

/// Merges per-replicate samples into an [`EstimateResult`].
pub fn aggregate_samples(
    samples: &[DensitySample],
    m: usize,
    master_seed: u64,
    analytic_source: Option<f64>,
) -> EstimateResult {
    let n = samples.len();
    let nf = n as f64;
    let mean = |f: &dyn Fn(&DensitySample) -> f64| samples.iter().map(|s| f(s)).sum::<f64>() / nf;
    let h_source = match analytic_source {
        Some(h) => h,
        None => mean(&|s| s.h_source),
    };
    let h_cond = mean(&|s| s.h_cond);
    let h_output = mean(&|s| s.h_output);
    let info_rate = mean(&|s| s.info());
    let t_m = mean(&|s| s.t_m as f64);
    let ci95_halfwidth = if n >= 2 {
        let var = samples
            .iter()
            .map(|s| {
                let d = s.info() - info_rate;
                d * d
            })
            .sum::<f64>()
            / (nf - 1.0);
        Some(1.96 * num::sqrt(var / nf))
    } else {
        None
    };
    EstimateResult {
        h_source,
        h_output,
        h_joint: h_source + h_cond,
        info_rate,
        m,
        t_m,
        replicates: n,
        ci95_halfwidth,
        seed: master_seed,
        wall_time_s: 0.0,
    }
}

/// Monte Carlo estimate of the information rate from `replicates`
/// independent trajectories of block length `m`.
pub fn estimate_information_rate(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    m: usize,
    master_seed: u64,
    replicates: usize,
    opts: &EstimatorOptions,
) -> Result<EstimateResult> {
    if replicates == 0 {
        return Err(Error::Range {
            name: "replicates",
            value: 0.0,
        });
    }
    let chain = build_embedded_chain(source, duration, noise)?;
    let seeds = replicate_seeds(master_seed, replicates);
    let mut samples = Vec::with_capacity(replicates);
    for &seed in &seeds {
        samples.push(information_density_sample(
            source,
            duration,
            noise,
            &chain,
            m,
            seed,
            opts.prune_threshold,
        )?);
    }
    let analytic = if opts.analytic_source {
        Some(source.entropy_rate()?)
    } else {
        None
    };
    Ok(aggregate_samples(&samples, m, master_seed, analytic))
}

/// One row of a duplication-probability sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub pd: f64,
    pub result: Result<EstimateResult>,
}

/// Sweeps the duplication probability over `pd_grid`, one independent child
/// seed per grid point. Per-point errors are recorded in the row rather than
/// aborting the sweep.
pub fn sweep_information_rate(
    source: &MarkovSource,
    family: &DurationFamily,
    noise: &NoiseModel,
    pd_grid: &[f64],
    m: usize,
    master_seed: u64,
    replicates: usize,
    opts: &EstimatorOptions,
) -> Vec<SweepRow> {
    let point_seeds = replicate_seeds(master_seed, pd_grid.len());
    pd_grid
        .iter()
        .zip(point_seeds.iter())
        .map(|(&pd, &seed)| {
            let result = family.build(pd).and_then(|duration| {
                estimate_information_rate(source, &duration, noise, m, seed, replicates, opts)
            });
            SweepRow { pd, result }
        })
        .collect()
}

/// Empirical convergence witness for the AEP: per-m mean and standard
/// deviation of the output and joint sample entropy rates across replicates.
#[derive(Debug, Clone)]
pub struct AepDiagnostic {
    pub m_grid: Vec<usize>,
    pub mean_g: Vec<f64>,
    pub std_g: Vec<f64>,
    pub mean_g_joint: Vec<f64>,
    pub std_g_joint: Vec<f64>,
    pub replicates: usize,
}

pub fn aep_convergence_diagnostic(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    m_grid: &[usize],
    replicates: usize,
    master_seed: u64,
    opts: &EstimatorOptions,
) -> Result<AepDiagnostic> {
    if m_grid.is_empty() || m_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("m_grid must be strictly increasing"));
    }
    if replicates < 2 {
        return Err(Error::Range {
            name: "replicates",
            value: replicates as f64,
        });
    }
    let chain = build_embedded_chain(source, duration, noise)?;
    let seeds = replicate_seeds(master_seed, m_grid.len() * replicates);
    let mut mean_g = Vec::with_capacity(m_grid.len());
    let mut std_g = Vec::with_capacity(m_grid.len());
    let mut mean_g_joint = Vec::with_capacity(m_grid.len());
    let mut std_g_joint = Vec::with_capacity(m_grid.len());
    for (mi, &m) in m_grid.iter().enumerate() {
        let mut g = Vec::with_capacity(replicates);
        let mut gj = Vec::with_capacity(replicates);
        for r in 0..replicates {
            let s = information_density_sample(
                source,
                duration,
                noise,
                &chain,
                m,
                seeds[mi * replicates + r],
                opts.prune_threshold,
            )?;
            g.push(s.h_output);
            gj.push(s.h_joint());
        }
        let (mg, sg) = mean_std(&g);
        let (mj, sj) = mean_std(&gj);
        mean_g.push(mg);
        std_g.push(sg);
        mean_g_joint.push(mj);
        std_g_joint.push(sj);
    }
    Ok(AepDiagnostic {
        m_grid: m_grid.to_vec(),
        mean_g,
        std_g,
        mean_g_joint,
        std_g_joint,
        replicates,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, num::sqrt(var))
}

/// Two-sided Monte Carlo check of the randomly indexed identity
/// H(Y^T) = E[K] H(Y).
#[derive(Debug, Clone)]
pub struct RelationCheckReport {
    /// Fixed output length of the per-output-sample run.
    pub t: usize,
    /// -(1/t) log2 P_emb(Y_1^t).
    pub h_y_per_output: f64,
    /// Completed segments within the first t outputs of that run.
    pub segments_completed: usize,
    pub mean_duration: f64,
    /// H(Y^T) estimate from an independent fixed-m run.
    pub lhs: f64,
    /// E[K] times the per-output estimate.
    pub rhs: f64,
    pub abs_gap: f64,
}

pub fn check_randomly_indexed_relation(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    t: usize,
    m: usize,
    master_seed: u64,
    opts: &EstimatorOptions,
) -> Result<RelationCheckReport> {
    if t == 0 || m == 0 {
        return Err(Error::Range {
            name: "t/m",
            value: 0.0,
        });
    }
    let chain = build_embedded_chain(source, duration, noise)?;
    let seeds = replicate_seeds(master_seed, 2);

    // Fixed-t side: durations are at least 1, so m = t segments always cover
    // t output samples.
    let tr = sample_trajectory(source, duration, noise, t, seeds[0])?;
    let prefix = &tr.outputs[..t];
    let h_y_per_output =
        -trellis::forward_log_prob_embedded(&chain, prefix)?.log_prob / t as f64;
    let segments_completed = tr.segments_completed(t);

    // Fixed-m side.
    let fixed_m = information_density_sample(
        source,
        duration,
        noise,
        &chain,
        m,
        seeds[1],
        opts.prune_threshold,
    )?;
    let lhs = fixed_m.h_output;
    let rhs = duration.mean() * h_y_per_output;
    Ok(RelationCheckReport {
        t,
        h_y_per_output,
        segments_completed,
        mean_duration: duration.mean(),
        lhs,
        rhs,
        abs_gap: num::abs(lhs - rhs),
    })
}

/// Exact entropy of the d-th jump time T_d by d-fold convolution of the
/// duration pmf. Returns (H(T_d) bits, H(T_d) / d).
pub fn jump_time_entropy(duration: &DurationDistribution, d: usize) -> Result<(f64, f64)> {
    if d == 0 {
        return Err(Error::Range {
            name: "d",
            value: 0.0,
        });
    }
    let km = duration.k_max();
    let max_support = (d as u64) * (km as u64);
    if max_support > 1_000_000 {
        return Err(Error::TooLarge {
            terms: max_support,
            limit: 1_000_000,
        });
    }
    // Dense pmf of K over 1..=km.
    let base: Vec<f64> = (1..=km).map(|k| duration.prob(k)).collect();
    // pmf of T_j over j..=j*km, index 0 <-> value j.
    let mut acc = base.clone();
    for _ in 1..d {
        let mut out = alloc::vec![0.0f64; acc.len() + km - 1];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in base.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        acc = out;
    }
    let h = num::entropy_bits(&acc);
    Ok((h, h / d as f64))
}

/// Outcome of the randomized H(Y,A) - H(Y) <= 2 H(A) property run.
#[derive(Debug, Clone, Copy)]
pub struct LemmaA1Report {
    pub trials: usize,
    pub violations: usize,
    /// Smallest observed slack 2 H(A) - (H(Y,A) - H(Y)); negative would be a
    /// violation beyond the 1e-12 tolerance.
    pub min_slack: f64,
}

impl LemmaA1Report {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples random joint pmfs over small alphabets and checks the entropy
/// difference bound exactly on each.
pub fn lemma_a1_property_test(rng_seed: u64, trials: usize) -> LemmaA1Report {
    let mut rng = ChaCha12Rng::seed_from_u64(rng_seed);
    let mut violations = 0usize;
    let mut min_slack = f64::INFINITY;
    for _ in 0..trials {
        let ny = 2 + (rng.next_u64() % 7) as usize; // |Y| in 2..=8
        let na = 2 + (rng.next_u64() % 7) as usize; // |A| in 2..=8
        let mut joint = Vec::with_capacity(ny * na);
        let mut total = 0.0;
        for _ in 0..ny * na {
            // Exponential weights give a flat Dirichlet joint.
            let u = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
            let w = -libm::log(u);
            joint.push(w);
            total += w;
        }
        for x in joint.iter_mut() {
            *x /= total;
        }
        let h_joint = num::entropy_bits(&joint);
        let mut p_y = alloc::vec![0.0f64; ny];
        let mut p_a = alloc::vec![0.0f64; na];
        for y in 0..ny {
            for a in 0..na {
                p_y[y] += joint[y * na + a];
                p_a[a] += joint[y * na + a];
            }
        }
        let h_y = num::entropy_bits(&p_y);
        let h_a = num::entropy_bits(&p_a);
        let slack = 2.0 * h_a - (h_joint - h_y);
        if slack < min_slack {
            min_slack = slack;
        }
        if slack < -1e-12 {
            violations += 1;
        }
    }
    LemmaA1Report {
        trials,
        violations,
        min_slack,
    }
}
