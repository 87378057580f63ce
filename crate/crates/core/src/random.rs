//! Injected randomness.
//!
//! Every probabilistic decision in the crate (Born sampling, coin flips, noisy
//! source draws) goes through [`Randomness::choose`]. Monte Carlo runs back it
//! with a seeded ChaCha stream; exact analyses back it with [`enumerate_executions`],
//! which replays a computation once per branch of its decision tree.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator family recorded in every report.
pub const RNG_FAMILY: &str = "ChaCha8 (rand_chacha 0.3), seed_from_u64(seed), stream = trial index";

/// Branches with relative weight at or below this are treated as impossible
/// during exact enumeration.
pub const SUPPORT_TOL: f64 = 1e-12;

pub trait Randomness {
    /// Picks an index with probability proportional to `weights`.
    fn choose(&mut self, weights: &[f64]) -> usize;

    /// A fair coin.
    fn bit(&mut self) -> u8 {
        self.choose(&[0.5, 0.5]) as u8
    }
}

/// Sampling adapter over any `rand` generator.
#[derive(Clone, Debug)]
pub struct Sampled<R>(pub R);

impl<R: RngCore> Randomness for Sampled<R> {
    fn choose(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "choose() needs a positive total weight");
        let mut u = self.0.gen::<f64>() * total;
        let mut last = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
        last
    }

    fn bit(&mut self) -> u8 {
        self.0.gen::<bool>() as u8
    }
}

pub type TrialRng = Sampled<ChaCha8Rng>;

/// Independent stream for trial `index` of an experiment seeded with `seed`.
///
/// Streams depend only on `(seed, index)`, so parallel trials reproduce
/// regardless of scheduling.
pub fn trial_stream(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    Sampled(rng)
}

/// Replays a fixed prefix of decisions, then takes the first supported branch.
struct Replay {
    prefix: Vec<usize>,
    pos: usize,
    trace: Vec<(Vec<f64>, usize)>,
}

impl Randomness for Replay {
    fn choose(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "choose() needs a positive total weight");
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let idx = if self.pos < self.prefix.len() {
            self.prefix[self.pos]
        } else {
            probs
                .iter()
                .position(|&p| p > SUPPORT_TOL)
                .expect("at least one supported branch")
        };
        self.pos += 1;
        self.trace.push((probs, idx));
        idx
    }
}

/// Runs `run` once per supported path of its decision tree and returns each
/// result with the path probability. Probabilities sum to one up to the
/// pruning of branches below [`SUPPORT_TOL`].
pub fn enumerate_executions<T>(mut run: impl FnMut(&mut dyn Randomness) -> T) -> Vec<(f64, T)> {
    let mut out = Vec::new();
    let mut prefix: Vec<usize> = Vec::new();
    loop {
        let mut replay = Replay {
            prefix: prefix.clone(),
            pos: 0,
            trace: Vec::new(),
        };
        let value = run(&mut replay);
        let prob: f64 = replay.trace.iter().map(|(p, i)| p[*i]).product();
        out.push((prob, value));

        // advance to the next unexplored sibling, deepest first
        let mut trace = replay.trace;
        let next = loop {
            let Some((probs, idx)) = trace.pop() else {
                break None;
            };
            if let Some(sib) = (idx + 1..probs.len()).find(|&j| probs[j] > SUPPORT_TOL) {
                let mut p: Vec<usize> = trace.iter().map(|(_, i)| *i).collect();
                p.push(sib);
                break Some(p);
            }
        };
        match next {
            Some(p) => prefix = p,
            None => return out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = trial_stream(7, 3);
        let mut b = trial_stream(7, 3);
        let mut c = trial_stream(7, 4);
        let xs: Vec<u8> = (0..64).map(|_| a.bit()).collect();
        let ys: Vec<u8> = (0..64).map(|_| b.bit()).collect();
        let zs: Vec<u8> = (0..64).map(|_| c.bit()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn enumeration_covers_tree() {
        let paths = enumerate_executions(|r| {
            let a = r.bit();
            if a == 0 {
                (a, r.choose(&[0.25, 0.0, 0.75]))
            } else {
                (a, 9)
            }
        });
        assert_eq!(paths.len(), 3);
        let total: f64 = paths.iter().map(|(p, _)| p).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(paths.contains(&(0.125, (0, 0))));
        assert!(paths.contains(&(0.375, (0, 2))));
        assert!(paths.contains(&(0.5, (1, 9))));
    }

    #[test]
    fn sampled_choose_skips_zero_weight() {
        let mut r = trial_stream(1, 0);
        for _ in 0..1000 {
            assert_ne!(r.choose(&[0.0, 1.0, 0.0, 2.0]) % 2, 0);
        }
    }
}
