//! Seeded generation of channel trajectories (S, K, T, Z, Y).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{DurationDistribution, MarkovSource, NoiseModel};

/// Name of the deterministic generator, recorded in CSV metadata.
pub const RNG_NAME: &str = "chacha12";

/// One sampled channel realization for `m` channel uses.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Channel states S_1..S_m.
    pub states: Vec<usize>,
    /// Durations K_1..K_m.
    pub durations: Vec<usize>,
    /// Jump times T_l = K_1 + ... + K_l.
    pub jump_times: Vec<usize>,
    /// Duplicated states Z_1..Z_{T_m}.
    pub duplicated: Vec<usize>,
    /// Noisy outputs Y_1..Y_{T_m}.
    pub outputs: Vec<usize>,
    pub seed: u64,
    pub m: usize,
}

impl Trajectory {
    /// Total output length T_m.
    pub fn total_length(&self) -> usize {
        *self.jump_times.last().unwrap_or(&0)
    }

    /// Number of completed segments within the first `t` output samples.
    pub fn segments_completed(&self, t: usize) -> usize {
        self.jump_times.iter().take_while(|&&tl| tl <= t).count()
    }

    /// Debug dump: four lines per record (S:, K:, Z:, Y:).
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let write_line = |out: &mut String, tag: &str, xs: &[usize]| {
            out.push_str(tag);
            for x in xs {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        };
        write_line(&mut out, "S:", &self.states);
        write_line(&mut out, "K:", &self.durations);
        write_line(&mut out, "Z:", &self.duplicated);
        write_line(&mut out, "Y:", &self.outputs);
        out
    }
}

/// Uniform double in [0, 1) from the top 53 bits of a u64 draw.
#[inline]
fn next_f64(rng: &mut ChaCha12Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse-CDF draw from a probability vector.
#[inline]
fn sample_index(rng: &mut ChaCha12Rng, pmf: &[f64]) -> usize {
    let u = next_f64(rng);
    let mut acc = 0.0;
    for (i, &p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    pmf.len() - 1
}

/// Samples one trajectory; deterministic given (model, m, seed).
///
/// S_1 is drawn from the source's initial distribution, subsequent states
/// from its transition matrix; durations are i.i.d. from the duration pmf;
/// each duplicated state is noised independently.
pub fn sample_trajectory(
    source: &MarkovSource,
    duration: &DurationDistribution,
    noise: &NoiseModel,
    m: usize,
    seed: u64,
) -> Result<Trajectory> {
    if m == 0 {
        return Err(Error::Range {
            name: "m",
            value: 0.0,
        });
    }
    if source.num_symbols() != noise.num_inputs() {
        return Err(Error::Dimension {
            expected: source.num_symbols(),
            found: noise.num_inputs(),
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let support = duration.support();
    let dur_pmf = duration.pmf();

    let mut states = Vec::with_capacity(m);
    let mut durations = Vec::with_capacity(m);
    let mut jump_times = Vec::with_capacity(m);
    let est_len = crate::num::ceil(m as f64 * duration.mean()) as usize + 1;
    let mut duplicated = Vec::with_capacity(est_len);
    let mut outputs = Vec::with_capacity(est_len);

    let mut t = 0usize;
    let mut state = sample_index(&mut rng, source.initial_vec());
    for l in 0..m {
        if l > 0 {
            state = sample_index(&mut rng, source.transition_row(state));
        }
        let k = support[sample_index(&mut rng, dur_pmf)];
        states.push(state);
        durations.push(k);
        t += k;
        jump_times.push(t);
        let row = noise.emission_row(state);
        for _ in 0..k {
            duplicated.push(state);
            outputs.push(sample_index(&mut rng, row));
        }
    }

    Ok(Trajectory {
        states,
        durations,
        jump_times,
        duplicated,
        outputs,
        seed,
        m,
    })
}

/// SplitMix64 finalizer.
#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives `n` child seeds from a master seed.
///
/// Child `i` is the SplitMix64 hash of `master + (i + 1) * golden-gamma`, so
/// the sequence is stable under extension: the first `k` children of
/// `(master, n)` equal those of `(master, k)`.
pub fn replicate_seeds(master_seed: u64, n: usize) -> Vec<u64> {
    (0..n)
        .map(|i| {
            splitmix64(
                master_seed
                    .wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DurationDistribution, MarkovSource, NoiseModel};

    fn ber_model(pd: f64, p: f64) -> (MarkovSource, DurationDistribution, NoiseModel) {
        (
            MarkovSource::ber_half(),
            DurationDistribution::bernoulli(pd).unwrap(),
            NoiseModel::bsc(p).unwrap(),
        )
    }

    fn check_invariants(tr: &Trajectory) {
        let mut acc = 0;
        for (l, (&k, &tl)) in tr.durations.iter().zip(tr.jump_times.iter()).enumerate() {
            acc += k;
            assert_eq!(acc, tl, "jump time mismatch at segment {l}");
        }
        assert_eq!(tr.total_length(), tr.duplicated.len());
        assert_eq!(tr.total_length(), tr.outputs.len());
        let mut t = 0;
        for (l, &k) in tr.durations.iter().enumerate() {
            for _ in 0..k {
                assert_eq!(tr.duplicated[t], tr.states[l]);
                t += 1;
            }
        }
    }

    #[test]
    fn no_duplication_copies_source() {
        let (s, d, n) = ber_model(0.0, 0.0);
        let tr = sample_trajectory(&s, &d, &n, 500, 7).unwrap();
        assert_eq!(tr.total_length(), 500);
        assert_eq!(tr.duplicated, tr.states);
        assert_eq!(tr.outputs, tr.states); // noiseless
        check_invariants(&tr);
    }

    #[test]
    fn full_duplication_doubles_length() {
        let (s, d, n) = ber_model(1.0, 0.1);
        let tr = sample_trajectory(&s, &d, &n, 300, 9).unwrap();
        assert_eq!(tr.total_length(), 600);
        for (l, &st) in tr.states.iter().enumerate() {
            assert_eq!(tr.duplicated[2 * l], st);
            assert_eq!(tr.duplicated[2 * l + 1], st);
        }
        check_invariants(&tr);
    }

    #[test]
    fn invariants_hold_for_small_blocks() {
        let (s, d, n) = ber_model(0.3, 0.1);
        for m in [1usize, 2, 10, 1000] {
            let tr = sample_trajectory(&s, &d, &n, m, 3).unwrap();
            assert!(tr.total_length() >= m && tr.total_length() <= 2 * m);
            check_invariants(&tr);
        }
    }

    #[test]
    fn empirical_duration_mean_matches() {
        let (s, d, n) = ber_model(0.3, 0.0);
        let m = 100_000;
        let tr = sample_trajectory(&s, &d, &n, m, 11).unwrap();
        let mean = tr.durations.iter().sum::<usize>() as f64 / m as f64;
        // CLT bound: 3 sigma / sqrt(m) with sigma^2 = pd (1 - pd).
        let sigma = (0.3f64 * 0.7).sqrt();
        assert!((mean - 1.3).abs() < 3.0 * sigma / (m as f64).sqrt());
    }

    #[test]
    fn empirical_state_frequency_matches_stationary() {
        let (s, d, n) = ber_model(0.3, 0.1);
        let m = 100_000;
        let tr = sample_trajectory(&s, &d, &n, m, 13).unwrap();
        let ones = tr.states.iter().filter(|&&x| x == 1).count() as f64 / m as f64;
        assert!((ones - 0.5).abs() < 0.01);
    }

    #[test]
    fn sampling_is_deterministic() {
        let (s, d, n) = ber_model(0.5, 0.1);
        let a = sample_trajectory(&s, &d, &n, 2000, 42).unwrap();
        let b = sample_trajectory(&s, &d, &n, 2000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_trajectory(&s, &d, &n, 2000, 43).unwrap();
        assert_ne!(a.outputs, c.outputs);
    }

    #[test]
    fn replicate_seeds_are_stable_and_distinct() {
        let a = replicate_seeds(42, 3);
        assert_eq!(a.len(), 3);
        assert_eq!(replicate_seeds(42, 1)[0], a[0]);
        assert_eq!(replicate_seeds(42, 2)[1], a[1]);
        let many_a = replicate_seeds(41, 1000);
        let many_b = replicate_seeds(42, 1000);
        let mut all: alloc::vec::Vec<u64> =
            many_a.iter().chain(many_b.iter()).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 2000, "seed collision across masters");
    }

    #[test]
    fn dump_format_has_four_lines() {
        let (s, d, n) = ber_model(0.5, 0.0);
        let tr = sample_trajectory(&s, &d, &n, 3, 1).unwrap();
        let dump = tr.dump();
        let lines: alloc::vec::Vec<&str> = dump.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("S:"));
        assert!(lines[3].starts_with("Y:"));
    }
}
