//! Self-check suites behind `dupchan verify`.

use dupchan_core::embed::{build_embedded_chain, stationary_distribution};
use dupchan_core::estimator::{
    check_randomly_indexed_relation, jump_time_entropy, lemma_a1_property_test, EstimatorOptions,
};
use dupchan_core::model::{DurationDistribution, MarkovSource, NoiseModel};
use dupchan_core::trellis::{
    brute_force_output_marginal, exact_block_entropies, exact_log_prob_output_constrained,
    forward_log_prob_conditional, forward_log_prob_embedded, log_prob_source, MarginalVariant,
};

pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn suite(name: &'static str, outcome: Result<String, String>) -> SuiteResult {
    match outcome {
        Ok(detail) => SuiteResult {
            name,
            passed: true,
            detail,
        },
        Err(detail) => SuiteResult {
            name,
            passed: false,
            detail,
        },
    }
}

fn small_grid() -> Vec<(DurationDistribution, NoiseModel, String)> {
    let mut out = Vec::new();
    for &p in &[0.0, 0.1, 0.5] {
        let noise = NoiseModel::bsc(p).unwrap();
        for &pd in &[0.0, 0.3, 1.0] {
            out.push((
                DurationDistribution::bernoulli(pd).unwrap(),
                noise.clone(),
                format!("bernoulli pd={pd} p={p}"),
            ));
        }
        out.push((
            DurationDistribution::geometric(0.4, 3).unwrap(),
            noise.clone(),
            format!("geometric pd=0.4 p={p}"),
        ));
    }
    out
}

fn decode(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut y = vec![0usize; len];
    for i in (0..len).rev() {
        y[i] = code % base;
        code /= base;
    }
    y
}

/// Forward-algorithm likelihoods vs exhaustive enumeration, all three
/// variants, on the small parameter grid.
fn oracle_suite() -> Result<String, String> {
    let source = MarkovSource::ber_half();
    let tol = 1e-10;
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for (dur, noise, label) in small_grid() {
        let chain = build_embedded_chain(&source, &dur, &noise)
            .map_err(|e| format!("{label}: {e}"))?;
        for t in 1..=3usize {
            let table = brute_force_output_marginal(
                &source,
                &dur,
                &noise,
                0,
                t,
                MarginalVariant::Unconstrained,
            )
            .map_err(|e| format!("{label}: {e}"))?;
            for (code, &pr) in table.iter().enumerate() {
                let y = decode(code, 2, t);
                let q = forward_log_prob_embedded(&chain, &y)
                    .map(|r| (2.0f64).powf(r.log_prob))
                    .unwrap_or(0.0);
                worst = worst.max((q - pr).abs());
                checks += 1;
            }
        }
        for m in 1..=3usize {
            for t in m * dur.min_duration()..=m * dur.max_duration() {
                let table = brute_force_output_marginal(
                    &source,
                    &dur,
                    &noise,
                    m,
                    t,
                    MarginalVariant::Constrained,
                )
                .map_err(|e| format!("{label}: {e}"))?;
                for (code, &pr) in table.iter().enumerate() {
                    let y = decode(code, 2, t);
                    let q = exact_log_prob_output_constrained(&source, &dur, &noise, m, &y)
                        .map(|r| (2.0f64).powf(r.log_prob))
                        .unwrap_or(0.0);
                    let mut mixed = 0.0f64;
                    for s_code in 0..(1usize << m) {
                        let s = decode(s_code, 2, m);
                        let lp = log_prob_source(&source, &s).unwrap().log_prob;
                        if let Ok(c) = forward_log_prob_conditional(&s, &dur, &noise, &y) {
                            mixed += (2.0f64).powf(lp + c.log_prob);
                        }
                    }
                    worst = worst.max((q - pr).abs()).max((mixed - pr).abs());
                    checks += 2;
                }
            }
        }
    }
    if worst < tol {
        Ok(format!("{checks} comparisons, worst gap {worst:.2e}"))
    } else {
        Err(format!("worst gap {worst:.2e} exceeds {tol:.0e}"))
    }
}

/// Stationary-distribution residuals and the segment-start-mass identity.
fn stationary_suite() -> Result<String, String> {
    let source = MarkovSource::ber_half();
    let mut worst = 0.0f64;
    for (dur, noise, label) in small_grid() {
        let chain =
            build_embedded_chain(&source, &dur, &noise).map_err(|e| format!("{label}: {e}"))?;
        let st = stationary_distribution(&chain).map_err(|e| format!("{label}: {e}"))?;
        worst = worst
            .max(st.residual(&chain))
            .max((st.segment_start_mass * dur.mean() - 1.0).abs());
    }
    if worst < 1e-9 {
        Ok(format!("worst residual {worst:.2e}"))
    } else {
        Err(format!("worst residual {worst:.2e}"))
    }
}

/// Subadditivity of exact output block entropies, m up to 4.
fn subadditivity_suite() -> Result<String, String> {
    let source = MarkovSource::ber_half();
    let cases = [
        (DurationDistribution::bernoulli(0.3).unwrap(), NoiseModel::bsc(0.1).unwrap()),
        (DurationDistribution::geometric(0.4, 3).unwrap(), NoiseModel::bsc(0.1).unwrap()),
    ];
    for (dur, noise) in &cases {
        let h: Vec<f64> = (1..=4usize)
            .map(|m| {
                exact_block_entropies(&source, dur, noise, m)
                    .map(|b| b.h_output)
                    .map_err(|e| format!("m={m}: {e}"))
            })
            .collect::<Result<_, _>>()?;
        for l in 1..4usize {
            for n in 1..4usize {
                if l + n <= 4 && h[l + n - 1] > h[l - 1] + h[n - 1] + 1e-9 {
                    return Err(format!(
                        "H_{} = {:.6} > H_{} + H_{} = {:.6}",
                        l + n,
                        h[l + n - 1],
                        l,
                        n,
                        h[l - 1] + h[n - 1]
                    ));
                }
            }
        }
    }
    Ok("all block pairs up to m=4".into())
}

/// Randomized H(Y,A) - H(Y) <= 2 H(A) check.
fn entropy_bound_suite() -> Result<String, String> {
    let report = lemma_a1_property_test(20240901, 10_000);
    if report.passed() {
        Ok(format!(
            "{} joints, min slack {:.3e}",
            report.trials, report.min_slack
        ))
    } else {
        Err(format!("{} violations", report.violations))
    }
}

/// Exact-convolution jump-time entropy: H(T_d)/d shrinks with d.
fn jump_time_suite() -> Result<String, String> {
    let dur = DurationDistribution::bernoulli(0.5).unwrap();
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    for d in [1usize, 4, 16, 64, 256] {
        let (_, ratio) = jump_time_entropy(&dur, d).map_err(|e| format!("d={d}: {e}"))?;
        if ratio >= prev {
            return Err(format!("ratio not decreasing at d={d}"));
        }
        prev = ratio;
        last = ratio;
    }
    if last < 0.05 {
        Ok(format!("H(T_256)/256 = {last:.4}"))
    } else {
        Err(format!("H(T_256)/256 = {last:.4} >= 0.05"))
    }
}

/// Randomly indexed entropy identity H(Y^T) = E[K] H(Y), Monte Carlo at
/// t = m = 1e5.
fn indexed_relation_suite() -> Result<String, String> {
    let source = MarkovSource::ber_half();
    let noise = NoiseModel::bsc(0.1).unwrap();
    let cases = [
        ("bernoulli 0.5", DurationDistribution::bernoulli(0.5).unwrap()),
        ("geometric 0.4", DurationDistribution::geometric(0.4, 15).unwrap()),
    ];
    let mut gaps = Vec::new();
    for (label, dur) in &cases {
        let r = check_randomly_indexed_relation(
            &source,
            dur,
            &noise,
            100_000,
            100_000,
            7,
            &EstimatorOptions::default(),
        )
        .map_err(|e| format!("{label}: {e}"))?;
        if r.abs_gap > 0.01 {
            return Err(format!("{label}: gap {:.4} > 0.01", r.abs_gap));
        }
        gaps.push(format!("{label} gap {:.5}", r.abs_gap));
    }
    Ok(gaps.join(", "))
}

/// Runs every suite; returns results in display order.
pub fn run_all() -> Vec<SuiteResult> {
    vec![
        suite("oracle-equivalence", oracle_suite()),
        suite("stationary", stationary_suite()),
        suite("subadditivity", subadditivity_suite()),
        suite("entropy-bound", entropy_bound_suite()),
        suite("jump-time-entropy", jump_time_suite()),
        suite("indexed-relation", indexed_relation_suite()),
    ]
}
