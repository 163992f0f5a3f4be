//! Cross-checks of the forward-algorithm likelihoods against exhaustive
//! enumeration on small instances, over a grid of noise and duplication
//! parameters.

use dupchan_core::embed::build_embedded_chain;
use dupchan_core::model::{DurationDistribution, DurationFamily, MarkovSource, NoiseModel};
use dupchan_core::trellis::{
    brute_force_output_marginal, exact_block_entropies, exact_log_prob_output_constrained,
    forward_log_prob_conditional, forward_log_prob_embedded, log_prob_source, MarginalVariant,
};

const TOL: f64 = 1e-10;

fn grid() -> Vec<(DurationDistribution, NoiseModel, String)> {
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
        for &pd in &[0.3, 0.5] {
            out.push((
                DurationDistribution::geometric(pd, 3).unwrap(),
                noise.clone(),
                format!("geometric pd={pd} p={p}"),
            ));
        }
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

#[test]
fn embedded_forward_matches_unconstrained_enumeration() {
    let source = MarkovSource::ber_half();
    for (dur, noise, label) in grid() {
        let chain = build_embedded_chain(&source, &dur, &noise).unwrap();
        for t in 1..=4usize {
            let table =
                brute_force_output_marginal(&source, &dur, &noise, 0, t, MarginalVariant::Unconstrained)
                    .unwrap();
            for (code, &p) in table.iter().enumerate() {
                let y = decode(code, 2, t);
                let fwd = forward_log_prob_embedded(&chain, &y);
                match fwd {
                    Ok(r) => {
                        let q = (2.0f64).powf(r.log_prob);
                        assert!(
                            (q - p).abs() < TOL,
                            "{label} t={t} y={y:?}: forward {q} vs table {p}"
                        );
                    }
                    Err(_) => assert!(p < TOL, "{label} t={t} y={y:?}: table {p} but forward zero"),
                }
            }
        }
    }
}

#[test]
fn constrained_forward_matches_enumeration() {
    let source = MarkovSource::ber_half();
    for (dur, noise, label) in grid() {
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
                .unwrap();
                for (code, &p) in table.iter().enumerate() {
                    let y = decode(code, 2, t);
                    match exact_log_prob_output_constrained(&source, &dur, &noise, m, &y) {
                        Ok(r) => {
                            let q = (2.0f64).powf(r.log_prob);
                            assert!(
                                (q - p).abs() < TOL,
                                "{label} m={m} t={t} y={y:?}: forward {q} vs table {p}"
                            );
                        }
                        Err(_) => {
                            assert!(p < TOL, "{label} m={m} t={t} y={y:?}: table {p}, forward zero")
                        }
                    }
                }
            }
        }
    }
}

/// Mixing the conditional lattice over all source paths must reproduce the
/// constrained output marginal.
#[test]
fn conditional_lattice_consistent_with_constrained_marginal() {
    let source = MarkovSource::ber_half();
    for (dur, noise, label) in grid() {
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
                .unwrap();
                for (code, &p) in table.iter().enumerate() {
                    let y = decode(code, 2, t);
                    let mut mixed = 0.0f64;
                    for s_code in 0..(1usize << m) {
                        let s = decode(s_code, 2, m);
                        let lp_s = log_prob_source(&source, &s).unwrap().log_prob;
                        if let Ok(c) = forward_log_prob_conditional(&s, &dur, &noise, &y) {
                            mixed += (2.0f64).powf(lp_s + c.log_prob);
                        }
                    }
                    assert!(
                        (mixed - p).abs() < TOL,
                        "{label} m={m} t={t} y={y:?}: mixture {mixed} vs table {p}"
                    );
                }
            }
        }
    }
}

/// H(Y_1^{T_m}) is subadditive in the block length.
#[test]
fn output_block_entropy_is_subadditive() {
    let source = MarkovSource::ber_half();
    let cases = [
        (DurationFamily::Bernoulli.build(0.3).unwrap(), NoiseModel::bsc(0.1).unwrap()),
        (DurationFamily::Bernoulli.build(0.5).unwrap(), NoiseModel::bsc(0.0).unwrap()),
        (
            DurationFamily::Geometric { k_max: 3 }.build(0.4).unwrap(),
            NoiseModel::bsc(0.1).unwrap(),
        ),
    ];
    for (dur, noise) in &cases {
        let h: Vec<f64> = (1..=4usize)
            .map(|m| {
                exact_block_entropies(&source, dur, noise, m)
                    .unwrap()
                    .h_output
            })
            .collect();
        for l in 1..=3usize {
            for n in 1..=3usize {
                if l + n <= 4 {
                    assert!(
                        h[l + n - 1] <= h[l - 1] + h[n - 1] + 1e-9,
                        "H_{} = {} > H_{} + H_{} = {}",
                        l + n,
                        h[l + n - 1],
                        l,
                        n,
                        h[l - 1] + h[n - 1]
                    );
                }
            }
        }
    }
}
