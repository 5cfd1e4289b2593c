//! Random binary NFAs under the uniform and Poisson cardinality models.
//!
//! Every pair `(q, s)` owns a ChaCha8 stream: the generator is seeded with
//! the spec seed and switched to stream `2(q − 1) + s`. The first draw of the
//! stream picks `|δ(q, s)|`, the following draws pick the subset. Results
//! therefore do not depend on the order in which pairs are visited, and the
//! filter can be decided from the cardinalities alone.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::nfa::{Nfa, State};

pub const ALPHABET: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// `k` uniform on `{0, …, n}`.
    Uniform,
    /// `k < n` with Poisson(λ) mass, `k = n` with the remaining tail.
    Poisson { lambda: f64 },
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Uniform => "uniform",
            ModelKind::Poisson { .. } => "poisson",
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            ModelKind::Uniform => None,
            ModelKind::Poisson { lambda } => Some(lambda),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Uniform => f.write_str("uniform"),
            ModelKind::Poisson { lambda } => write!(f, "poisson({lambda})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("state count must be at least 1")]
    NoStates,
    #[error("Poisson rate must be a positive finite number, got {0}")]
    BadLambda(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub states: usize,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, states: usize, seed: u64) -> Result<ModelSpec, ModelError> {
        if states == 0 {
            return Err(ModelError::NoStates);
        }
        if let ModelKind::Poisson { lambda } = kind {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(ModelError::BadLambda(lambda));
            }
        }
        Ok(ModelSpec { kind, states, seed })
    }
}

/// Probability of each cardinality `0..=n`.
pub fn cardinality_probabilities(kind: ModelKind, n: usize) -> Vec<f64> {
    match kind {
        ModelKind::Uniform => alloc::vec![1.0 / (n + 1) as f64; n + 1],
        ModelKind::Poisson { lambda } => {
            let ln_lambda = libm::log(lambda);
            let mut p: Vec<f64> = (0..n)
                .map(|k| libm::exp(-lambda + k as f64 * ln_lambda - libm::lgamma(k as f64 + 1.0)))
                .collect();
            let head: f64 = p.iter().sum();
            p.push((1.0 - head).max(0.0));
            p
        }
    }
}

/// Inverse-CDF sampler over `0..=n`.
#[derive(Debug, Clone)]
pub struct CardinalitySampler {
    kind: ModelKind,
    n: usize,
    cdf: Vec<f64>,
}

impl CardinalitySampler {
    pub fn new(kind: ModelKind, n: usize) -> CardinalitySampler {
        let mut acc = 0.0;
        let cdf = cardinality_probabilities(kind, n)
            .into_iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        CardinalitySampler { kind, n, cdf }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        match self.kind {
            ModelKind::Uniform => rng.random_range(0..=self.n),
            ModelKind::Poisson { .. } => {
                let u: f64 = rng.random();
                // the last bucket absorbs rounding in the accumulated sum
                self.cdf[..self.n].iter().position(|&c| u < c).unwrap_or(self.n)
            }
        }
    }
}

fn pair_stream(seed: u64, q: State, s: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((q - 1) * ALPHABET + s) as u64);
    rng
}

/// `k` distinct states from `1..=n`, uniformly among all k-subsets, sorted.
pub fn sample_subset<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<State> {
    let mut pool: Vec<State> = (1..=n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool.sort_unstable();
    pool
}

pub fn generate(spec: &ModelSpec) -> Nfa {
    generate_with(&CardinalitySampler::new(spec.kind, spec.states), spec.seed)
}

/// As [`generate`] with a sampler built once for many seeds.
pub fn generate_with(sampler: &CardinalitySampler, seed: u64) -> Nfa {
    let n = sampler.n;
    let delta = (1..=n)
        .map(|q| {
            (0..ALPHABET)
                .map(|s| {
                    let mut rng = pair_stream(seed, q, s);
                    let k = sampler.sample(&mut rng);
                    sample_subset(&mut rng, n, k)
                })
                .collect()
        })
        .collect();
    Nfa::new(n, ALPHABET, delta).expect("generated successors are in range")
}

/// Whether [`generate_with`] at this seed would pass the filter, drawing
/// only the cardinalities and stopping at the first empty set per symbol.
pub fn passes_filter_fast(sampler: &CardinalitySampler, seed: u64) -> bool {
    (0..ALPHABET).any(|s| (1..=sampler.n).all(|q| sampler.sample(&mut pair_stream(seed, q, s)) > 0))
}

/// Some symbol is defined at every state.
pub fn passes_filter(nfa: &Nfa) -> bool {
    nfa.everywhere_defined_symbol().is_some()
}

fn filter_formula(p: f64, n: usize) -> f64 {
    let pn = libm::pow(p, n as f64);
    2.0 * pn - pn * pn
}

/// `2(1 − 1/(n+1))^n − (1 − 1/(n+1))^{2n}`.
pub fn prob_filter_uniform(n: usize) -> f64 {
    filter_formula(1.0 - 1.0 / (n + 1) as f64, n)
}

/// `2(1 − e^{−λ})^n − (1 − e^{−λ})^{2n}`.
pub fn prob_filter_poisson(n: usize, lambda: f64) -> f64 {
    filter_formula(1.0 - libm::exp(-lambda), n)
}

pub fn prob_filter(kind: ModelKind, n: usize) -> f64 {
    match kind {
        ModelKind::Uniform => prob_filter_uniform(n),
        ModelKind::Poisson { lambda } => prob_filter_poisson(n, lambda),
    }
}

/// SplitMix64 finalizer applied to `base + (index + 1)·γ`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A generated automaton that passed the filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filtered {
    pub nfa: Nfa,
    pub seed: u64,
    /// Index of the attempt that produced it.
    pub attempt: u64,
}

/// Draws attempts `start, start + 1, …` with seeds `derive_seed(base, i)`
/// until one passes the filter.
pub fn next_filtered(sampler: &CardinalitySampler, base: u64, start: u64) -> Filtered {
    let mut attempt = start;
    loop {
        let seed = derive_seed(base, attempt);
        if passes_filter_fast(sampler, seed) {
            let nfa = generate_with(sampler, seed);
            debug_assert!(passes_filter(&nfa));
            return Filtered { nfa, seed, attempt };
        }
        attempt += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize, seed: u64) -> ModelSpec {
        ModelSpec::new(ModelKind::Uniform, n, seed).unwrap()
    }

    fn poisson(n: usize, lambda: f64, seed: u64) -> ModelSpec {
        ModelSpec::new(ModelKind::Poisson { lambda }, n, seed).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert_eq!(ModelSpec::new(ModelKind::Uniform, 0, 1), Err(ModelError::NoStates));
        assert!(ModelSpec::new(ModelKind::Poisson { lambda: 0.0 }, 3, 1).is_err());
        assert!(ModelSpec::new(ModelKind::Poisson { lambda: f64::NAN }, 3, 1).is_err());
    }

    #[test]
    fn same_seed_same_automaton() {
        for seed in 0..20 {
            assert_eq!(generate(&uniform(12, seed)), generate(&uniform(12, seed)));
            assert_eq!(generate(&poisson(12, 2.0, seed)), generate(&poisson(12, 2.0, seed)));
        }
        assert_ne!(generate(&uniform(12, 1)), generate(&uniform(12, 2)));
    }

    #[test]
    fn fast_filter_agrees_with_generation() {
        for kind in [ModelKind::Uniform, ModelKind::Poisson { lambda: 1.0 }] {
            let sampler = CardinalitySampler::new(kind, 6);
            for seed in 0..2000 {
                assert_eq!(passes_filter_fast(&sampler, seed), passes_filter(&generate_with(&sampler, seed)));
            }
        }
    }

    #[test]
    fn single_state_uniform_halves() {
        let trials = 20_000;
        let empty = (0..trials)
            .filter(|&s| generate(&uniform(1, s)).successors(1, 0).is_empty())
            .count();
        let frac = empty as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 0.02, "{frac}");
    }

    fn out_degrees(spec: impl Fn(u64) -> ModelSpec, samples: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(samples);
        let mut seed = 0;
        while out.len() < samples {
            let nfa = generate(&spec(seed));
            for q in 1..=nfa.states() {
                for s in 0..ALPHABET {
                    out.push(nfa.successors(q, s).len());
                }
            }
            seed += 1;
        }
        out.truncate(samples);
        out
    }

    fn assert_histogram_within_3_sigma(ks: &[usize], probs: &[f64]) {
        let total = ks.len() as f64;
        let mut counts = alloc::vec![0usize; probs.len()];
        for &k in ks {
            counts[k] += 1;
        }
        for (k, (&c, &p)) in counts.iter().zip(probs).enumerate() {
            let expect = total * p;
            let sigma = libm::sqrt(total * p * (1.0 - p));
            assert!(
                (c as f64 - expect).abs() <= 3.0 * sigma + 1.0,
                "k = {k}: {c} vs {expect:.1} ± {sigma:.1}"
            );
        }
    }

    #[test]
    fn uniform_cardinalities() {
        let ks = out_degrees(|s| uniform(10, s), 100_000);
        let mean = ks.iter().sum::<usize>() as f64 / ks.len() as f64;
        assert!((mean - 5.0).abs() < 0.05, "{mean}");
        assert_histogram_within_3_sigma(&ks, &cardinality_probabilities(ModelKind::Uniform, 10));
    }

    #[test]
    fn poisson_cardinalities() {
        let probs = cardinality_probabilities(ModelKind::Poisson { lambda: 2.0 }, 10);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((probs[0] - libm::exp(-2.0)).abs() < 1e-15);
        let ks = out_degrees(|s| poisson(10, 2.0, s), 100_000);
        let mean = ks.iter().sum::<usize>() as f64 / ks.len() as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
        assert_histogram_within_3_sigma(&ks, &probs);
    }

    #[test]
    fn subsets_are_uniform() {
        // all 10 two-element subsets of 1..=5 should appear about equally often
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts = alloc::collections::BTreeMap::new();
        for _ in 0..50_000 {
            *counts.entry(sample_subset(&mut rng, 5, 2)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 10);
        for (subset, c) in counts {
            assert!((c as f64 - 5000.0).abs() < 3.0 * libm::sqrt(5000.0 * 0.9), "{subset:?}: {c}");
        }
    }

    #[test]
    fn closed_forms() {
        assert!((prob_filter_uniform(1) - 0.75).abs() < 1e-15);
        assert!((prob_filter_poisson(1, core::f64::consts::LN_2) - 0.75).abs() < 1e-12);
        let limit = 2.0 * libm::exp(-1.0) - libm::exp(-2.0);
        assert!((limit - 0.600).abs() < 1e-3);
        let at100 = prob_filter_uniform(100);
        assert!(at100 > 0.595 && at100 < 0.610, "{at100}");
        assert!((prob_filter_uniform(10_000) - limit).abs() < 1e-3);
        assert!(prob_filter_poisson(500, 2.0) < 1e-6);
    }

    #[test]
    fn monte_carlo_pass_rates() {
        for n in [5, 10, 20] {
            for kind in [ModelKind::Uniform, ModelKind::Poisson { lambda: 1.0 }, ModelKind::Poisson { lambda: 2.0 }] {
                let sampler = CardinalitySampler::new(kind, n);
                let trials = 100_000u64;
                let pass = (0..trials).filter(|&i| passes_filter_fast(&sampler, derive_seed(99, i))).count();
                let rate = pass as f64 / trials as f64;
                let want = prob_filter(kind, n);
                assert!((rate - want).abs() < 0.01, "{kind} n={n}: {rate} vs {want}");
            }
        }
    }

    #[test]
    fn filtered_draws_pass() {
        let sampler = CardinalitySampler::new(ModelKind::Poisson { lambda: 1.0 }, 8);
        let mut start = 0;
        for _ in 0..20 {
            let f = next_filtered(&sampler, 5, start);
            assert!(passes_filter(&f.nfa));
            assert_eq!(f.seed, derive_seed(5, f.attempt));
            start = f.attempt + 1;
        }
    }
}
