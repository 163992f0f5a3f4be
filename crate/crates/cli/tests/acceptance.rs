//! Acceptance gate: every release-blocking criterion, one test (and one
//! pass/fail line) each. Run with `cargo test --test acceptance`.

use dupchan_core::embed::build_embedded_chain;
use dupchan_core::estimator::{
    check_randomly_indexed_relation, estimate_information_rate, jump_time_entropy,
    lemma_a1_property_test, aep_convergence_diagnostic, EstimatorOptions,
};
use dupchan_core::model::{
    bsc_capacity, bsc_two_look_capacity, DurationDistribution, MarkovSource, NoiseModel,
};
use dupchan_core::trellis::{
    brute_force_output_marginal, exact_block_entropies, exact_log_prob_output_constrained,
    forward_log_prob_conditional, forward_log_prob_embedded, log_prob_source, MarginalVariant,
};

fn model(pd: f64, p: f64) -> (MarkovSource, DurationDistribution, NoiseModel) {
    (
        MarkovSource::ber_half(),
        DurationDistribution::bernoulli(pd).unwrap(),
        NoiseModel::bsc(p).unwrap(),
    )
}

fn estimate(dur: &DurationDistribution, p: f64, m: usize, seed: u64, reps: usize) -> f64 {
    let source = MarkovSource::ber_half();
    let noise = NoiseModel::bsc(p).unwrap();
    estimate_information_rate(
        &source,
        dur,
        &noise,
        m,
        seed,
        reps,
        &EstimatorOptions::default(),
    )
    .unwrap()
    .info_rate
}

fn report(name: &str, ok: bool, detail: &str) {
    println!(
        "acceptance: {name}: {} ({detail})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{name}: {detail}");
}

#[test]
fn criterion_01_endpoint_capacities() {
    let cases = [
        (bsc_capacity(0.1).unwrap(), 0.5310),
        (bsc_capacity(0.01).unwrap(), 0.9192),
        (bsc_two_look_capacity(0.1).unwrap(), 0.7421),
        (bsc_two_look_capacity(0.01).unwrap(), 0.9787),
    ];
    let worst = cases
        .iter()
        .map(|(got, want)| (got - want).abs())
        .fold(0.0f64, f64::max);
    report(
        "criterion 1 endpoint capacities",
        worst < 5e-4,
        &format!("worst gap {worst:.2e}"),
    );
}

#[test]
fn criterion_02_figure1_checkpoints() {
    let m = 1_000_000;
    // (p, pd, expected)
    let checks = [
        (0.1, 0.0, 0.5325),
        (0.1, 0.5, 0.2961),
        (0.1, 1.0, 0.7420),
        (0.01, 0.0, 0.9194),
        (0.01, 0.2, 0.5854),
        (0.01, 1.0, 0.9787),
    ];
    let mut worst = 0.0f64;
    for &(p, pd, want) in &checks {
        let dur = DurationDistribution::bernoulli(pd).unwrap();
        let got = estimate(&dur, p, m, 1, 1);
        worst = worst.max((got - want).abs());
    }
    report(
        "criterion 2 figure-1 checkpoints",
        worst < 0.01,
        &format!("worst gap {worst:.4}"),
    );
}

#[test]
fn criterion_03_figure2_checkpoints() {
    let m = 1_000_000;
    let checks = [
        (0.01, 0.3, 0.4227),
        (0.01, 0.6, 0.2570),
        (0.1, 0.6, 0.1036),
        (0.0, 0.6, 0.3245),
    ];
    let mut worst = 0.0f64;
    for &(p, pd, want) in &checks {
        let dur = DurationDistribution::geometric(pd, 15).unwrap();
        let got = estimate(&dur, p, m, 1, 1);
        worst = worst.max((got - want).abs());
    }
    report(
        "criterion 3 figure-2 checkpoints",
        worst < 0.01,
        &format!("worst gap {worst:.4}"),
    );
}

fn decode(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut y = vec![0usize; len];
    for i in (0..len).rev() {
        y[i] = code % base;
        code /= base;
    }
    y
}

#[test]
fn criterion_04_oracle_equivalence() {
    let source = MarkovSource::ber_half();
    let mut durations = Vec::new();
    for &pd in &[0.0, 0.3, 1.0] {
        durations.push(DurationDistribution::bernoulli(pd).unwrap());
    }
    for &pd in &[0.0, 0.3, 1.0] {
        if pd < 1.0 {
            durations.push(DurationDistribution::geometric(pd, 3).unwrap());
        }
    }
    let mut worst = 0.0f64;
    let mut checks = 0usize;
    for &p in &[0.0, 0.1, 0.5] {
        let noise = NoiseModel::bsc(p).unwrap();
        for dur in &durations {
            let chain = build_embedded_chain(&source, dur, &noise).unwrap();
            for t in 1..=4usize {
                let table = brute_force_output_marginal(
                    &source,
                    dur,
                    &noise,
                    0,
                    t,
                    MarginalVariant::Unconstrained,
                )
                .unwrap();
                for (code, &pr) in table.iter().enumerate() {
                    let y = decode(code, 2, t);
                    let q = forward_log_prob_embedded(&chain, &y)
                        .map(|r| (2.0f64).powf(r.log_prob))
                        .unwrap_or(0.0);
                    worst = worst.max((q - pr).abs());
                    checks += 1;
                }
            }
            for m in 1..=4usize {
                for t in m * dur.min_duration()..=m * dur.max_duration() {
                    let table = brute_force_output_marginal(
                        &source,
                        dur,
                        &noise,
                        m,
                        t,
                        MarginalVariant::Constrained,
                    )
                    .unwrap();
                    for (code, &pr) in table.iter().enumerate() {
                        let y = decode(code, 2, t);
                        let q = exact_log_prob_output_constrained(&source, dur, &noise, m, &y)
                            .map(|r| (2.0f64).powf(r.log_prob))
                            .unwrap_or(0.0);
                        let mut mixed = 0.0f64;
                        for s_code in 0..(1usize << m) {
                            let s = decode(s_code, 2, m);
                            let lp = log_prob_source(&source, &s).unwrap().log_prob;
                            if let Ok(c) = forward_log_prob_conditional(&s, dur, &noise, &y) {
                                mixed += (2.0f64).powf(lp + c.log_prob);
                            }
                        }
                        worst = worst.max((q - pr).abs()).max((mixed - pr).abs());
                        checks += 2;
                    }
                }
            }
        }
    }
    report(
        "criterion 4 oracle equivalence",
        worst < 1e-10,
        &format!("{checks} comparisons, worst gap {worst:.2e}"),
    );
}

#[test]
fn criterion_05_randomly_indexed_identity() {
    let source = MarkovSource::ber_half();
    let noise = NoiseModel::bsc(0.1).unwrap();
    let cases = [
        DurationDistribution::bernoulli(0.5).unwrap(),
        DurationDistribution::geometric(0.4, 15).unwrap(),
    ];
    let mut worst = 0.0f64;
    for dur in &cases {
        let r = check_randomly_indexed_relation(
            &source,
            dur,
            &noise,
            100_000,
            100_000,
            7,
            &EstimatorOptions::default(),
        )
        .unwrap();
        worst = worst.max(r.abs_gap);
    }
    report(
        "criterion 5 randomly indexed identity",
        worst <= 0.01,
        &format!("worst gap {worst:.5}"),
    );
}

#[test]
fn criterion_06_jump_time_entropy_decay() {
    let dur = DurationDistribution::bernoulli(0.5).unwrap();
    let mut prev = f64::INFINITY;
    let mut ok = true;
    let mut last = 0.0;
    for d in [1usize, 4, 16, 64, 256] {
        let (_, ratio) = jump_time_entropy(&dur, d).unwrap();
        ok &= ratio < prev;
        prev = ratio;
        last = ratio;
    }
    ok &= last < 0.05;
    report(
        "criterion 6 jump-time entropy decay",
        ok,
        &format!("H(T_256)/256 = {last:.4}"),
    );
}

#[test]
fn criterion_07_entropy_difference_bound() {
    let r = lemma_a1_property_test(20240901, 10_000);
    report(
        "criterion 7 entropy difference bound",
        r.passed(),
        &format!("{} joints, {} violations, min slack {:.3e}", r.trials, r.violations, r.min_slack),
    );
}

#[test]
fn criterion_08_block_entropy_subadditivity() {
    let source = MarkovSource::ber_half();
    // (duration, noise, max m): the geometric case stops at m=4 to stay
    // within the enumeration guard.
    let cases = [
        (DurationDistribution::bernoulli(0.3).unwrap(), NoiseModel::bsc(0.1).unwrap(), 5usize),
        (DurationDistribution::bernoulli(0.5).unwrap(), NoiseModel::bsc(0.0).unwrap(), 5),
        (DurationDistribution::bernoulli(0.5).unwrap(), NoiseModel::bsc(0.5).unwrap(), 5),
        (DurationDistribution::geometric(0.4, 3).unwrap(), NoiseModel::bsc(0.1).unwrap(), 4),
    ];
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for (dur, noise, m_max) in &cases {
        let h: Vec<f64> = (1..=*m_max)
            .map(|m| {
                exact_block_entropies(&source, dur, noise, m)
                    .unwrap()
                    .h_output
            })
            .collect();
        for m in 2..=*m_max {
            for l in 1..m {
                let excess = h[m - 1] - h[l - 1] - h[m - l - 1];
                worst = worst.max(excess);
                ok &= excess <= 1e-9;
            }
        }
    }
    report(
        "criterion 8 block-entropy subadditivity",
        ok,
        &format!("max excess {worst:.2e}"),
    );
}

#[test]
fn criterion_09_aep_std_decay() {
    let (s, d, n) = model(0.5, 0.1);
    let diag = aep_convergence_diagnostic(
        &s,
        &d,
        &n,
        &[100, 1000, 10_000],
        30,
        1,
        &EstimatorOptions::default(),
    )
    .unwrap();
    let ok = diag.std_g.windows(2).all(|w| w[1] < w[0]);
    report(
        "criterion 9 AEP std decay",
        ok,
        &format!("std_g = {:?}", diag.std_g),
    );
}

#[test]
fn criterion_10_degenerate_channels() {
    // Useless BSC: estimate within 3 ci95 of zero, up to the deterministic
    // O(log m / m) offset from the unconstrained output marginal (it omits
    // the block-length distribution factor, which at p = 0.5 contributes
    // exactly (1/m) log2 P(sum K = T_m) ~ -log2(sqrt(m)) / m).
    let m = 10_000usize;
    let (s, d, n) = model(0.5, 0.5);
    let r = estimate_information_rate(&s, &d, &n, m, 5, 10, &EstimatorOptions::default())
        .unwrap();
    let ci = r.ci95_halfwidth.unwrap();
    let length_term = (m as f64).log2() / m as f64;
    let useless_ok = r.info_rate.abs() <= 3.0 * ci + length_term;
    // Clean channel, no duplication: exactly 1 bit per use.
    let (s0, d0, n0) = model(0.0, 0.0);
    let r0 = estimate_information_rate(&s0, &d0, &n0, 10_000, 5, 1, &EstimatorOptions::default())
        .unwrap();
    let clean_ok = r0.info_rate == 1.0;
    report(
        "criterion 10 degenerate channels",
        useless_ok && clean_ok,
        &format!("p=0.5 rate {:.2e} (ci {ci:.2e}), clean rate {}", r.info_rate, r0.info_rate),
    );
}
