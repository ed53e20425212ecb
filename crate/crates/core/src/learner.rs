//! Exponential-weights learner over a finite arm set.
//!
//! Only the played arm's weight is touched by an update: it is multiplied by
//! `exp(-eta * y / w_j)` (an importance-weighted loss estimate) and the vector
//! is renormalized. There is no uniform exploration mixing.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SliceError};
use crate::space::SuperAction;

/// Lower clamp on the update exponent. Keeps weights positive (subnormal at
/// worst) so that exact zeros only come from the initial distribution.
pub const MIN_EXPONENT: f64 = -700.0;

/// Initial probability vector. Arm indices here are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum InitScheme {
    Uniform,
    /// Uniform mass on `size` contiguous arms centered at `center`, zero elsewhere.
    Sbs { center: usize, size: usize },
    /// Discretized Gaussian over arm indices.
    Gbs { mu: f64, sigma: f64 },
}

impl InitScheme {
    /// Number of arms carrying initial mass, used in place of `J` for the
    /// learning-rate formula.
    pub fn effective_arms(&self, arms: usize) -> usize {
        match *self {
            InitScheme::Sbs { size, .. } => size,
            _ => arms,
        }
    }
}

/// 0-based range of the strictly biased window, shifted inward at the edges.
pub fn sbs_window(center: usize, size: usize, arms: usize) -> Result<Range<usize>> {
    if size < 1 || size > arms {
        return Err(SliceError::config(
            "init.size",
            format!("subset size must be in 1..={arms}, got {size}"),
        ));
    }
    if center < 1 || center > arms {
        return Err(SliceError::config(
            "init.center",
            format!("center must be an arm index in 1..={arms}, got {center}"),
        ));
    }
    let start = (center - 1).saturating_sub(size / 2).min(arms - size);
    Ok(start..start + size)
}

pub fn init_weights(scheme: &InitScheme, arms: usize) -> Result<Vec<f64>> {
    if arms == 0 {
        return Err(SliceError::config("arms", "need at least one arm"));
    }
    match *scheme {
        InitScheme::Uniform => Ok(vec![1.0 / arms as f64; arms]),
        InitScheme::Sbs { center, size } => {
            let window = sbs_window(center, size, arms)?;
            let mut w = vec![0.0; arms];
            w[window].fill(1.0 / size as f64);
            Ok(w)
        }
        InitScheme::Gbs { mu, sigma } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(SliceError::config("init.sigma", format!("must be positive, got {sigma}")));
            }
            if !mu.is_finite() {
                return Err(SliceError::config("init.mu", "must be finite"));
            }
            let dens: Vec<f64> = (1..=arms)
                .map(|j| {
                    let d = j as f64 - mu;
                    (-d * d / (2.0 * sigma * sigma)).exp()
                })
                .collect();
            let total: f64 = dens.iter().sum();
            if !(total > 0.0) {
                return Err(SliceError::config(
                    "init.sigma",
                    "gaussian places no representable mass on any arm",
                ));
            }
            Ok(dens.into_iter().map(|d| d / total).collect())
        }
    }
}

/// Learning rate minimizing `ln(J)/eta + eta*J*T`.
pub fn optimal_eta(arms: usize, horizon: u64) -> Result<f64> {
    if arms < 2 {
        return Err(SliceError::config("eta", "optimal learning rate is zero for a single arm"));
    }
    if horizon < 1 {
        return Err(SliceError::config("horizon", "must be at least 1"));
    }
    let j = arms as f64;
    Ok(((j).ln() / (j * horizon as f64)).sqrt())
}

/// Expected-regret upper bound after `horizon` slots.
pub fn regret_bound(arms: usize, eta: f64, horizon: u64) -> f64 {
    let j = arms as f64;
    j.ln() / eta + eta * j * horizon as f64
}

#[derive(Clone, Debug)]
pub struct LearnerState {
    weights: Vec<f64>,
    eta: f64,
    slot: u64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl LearnerState {
    pub fn new(weights: Vec<f64>, eta: f64, seed: u64) -> Result<Self> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(SliceError::config("eta", format!("must lie in (0, 1), got {eta}")));
        }
        if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(SliceError::config("weights", "need a non-empty non-negative vector"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(SliceError::config("weights", format!("must sum to 1, got {total}")));
        }
        Ok(LearnerState {
            weights,
            eta,
            slot: 1,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Slot of the next decision, starting at 1.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_arms(&self) -> usize {
        self.weights.len()
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Draws a 0-based arm index with probability `w_j`. Never returns a zero-weight arm.
    pub fn sample_arm(&mut self) -> usize {
        let u: f64 = self.rng.random();
        pick(&self.weights, u)
    }

    /// Multiplicative update of arm `j` (0-based) after observing loss `y`.
    pub fn update(&mut self, j: usize, y: f64) {
        debug_assert!((0.0..=1.0).contains(&y), "loss {y} outside [0, 1]");
        let wj = self.weights[j];
        debug_assert!(wj > 0.0, "arm {j} has zero probability");
        self.slot += 1;
        let exponent = (-self.eta * y / wj).max(MIN_EXPONENT);
        if exponent == 0.0 {
            return;
        }
        // A product that underflows is pinned to the smallest subnormal.
        self.weights[j] = (wj * exponent.exp()).max(f64::from_bits(1));
        let total: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= total;
        }
    }
}

fn pick(weights: &[f64], u: f64) -> usize {
    let target = u * weights.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (j, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = j;
            if target < acc {
                return j;
            }
        }
    }
    last_positive
}

/// Uniform draw of one sub-action; returns an index into `sa.subs`.
pub fn sample_sub_action<R: Rng + ?Sized>(sa: &SuperAction, rng: &mut R) -> usize {
    debug_assert!(!sa.subs.is_empty());
    rng.random_range(0..sa.subs.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn uniform_and_sbs_init() {
        assert_eq!(init_weights(&InitScheme::Uniform, 4).unwrap(), vec![0.25; 4]);
        let w = init_weights(&InitScheme::Sbs { center: 40, size: 5 }, 100).unwrap();
        for (j, &x) in w.iter().enumerate() {
            let idx = j + 1;
            if (38..=42).contains(&idx) {
                assert_abs_diff_eq!(x, 0.2, epsilon = 1e-15);
            } else {
                assert_eq!(x, 0.0);
            }
        }
    }

    #[test]
    fn sbs_window_is_clipped_at_edges() {
        assert_eq!(sbs_window(1, 5, 10).unwrap(), 0..5);
        assert_eq!(sbs_window(10, 5, 10).unwrap(), 5..10);
        assert_eq!(sbs_window(5, 10, 10).unwrap(), 0..10);
        assert!(sbs_window(5, 0, 10).is_err());
        assert!(sbs_window(5, 11, 10).is_err());
        assert!(sbs_window(11, 3, 10).is_err());
    }

    #[test]
    fn gbs_init() {
        let w = init_weights(&InitScheme::Gbs { mu: 2.0, sigma: 1.0 }, 3).unwrap();
        assert_abs_diff_eq!(w[0], 0.27406, epsilon = 1e-5);
        assert_abs_diff_eq!(w[1], 0.45187, epsilon = 1e-5);
        assert_abs_diff_eq!(w[2], 0.27406, epsilon = 1e-5);
        assert!(init_weights(&InitScheme::Gbs { mu: 2.0, sigma: 0.0 }, 3).is_err());
    }

    #[test]
    fn update_examples() {
        let mut s = LearnerState::new(vec![0.5, 0.5], 0.5, 0).unwrap();
        s.update(0, 1.0);
        assert_abs_diff_eq!(s.weights()[0], 0.26894, epsilon = 1e-5);
        assert_abs_diff_eq!(s.weights()[1], 0.73106, epsilon = 1e-5);

        let mut s = LearnerState::new(vec![0.25, 0.75], 0.1, 0).unwrap();
        s.update(0, 0.5);
        assert_abs_diff_eq!(s.weights()[0], 0.21440, epsilon = 1e-5);
        assert_abs_diff_eq!(s.weights()[1], 0.78560, epsilon = 1e-5);

        let w = vec![0.1, 0.2, 0.3, 0.4];
        let mut s = LearnerState::new(w.clone(), 0.3, 0).unwrap();
        s.update(2, 0.0);
        assert_eq!(s.weights(), w.as_slice());
        assert_eq!(s.slot(), 2);
    }

    #[test]
    fn eta_and_bound() {
        assert_abs_diff_eq!(optimal_eta(720, 20).unwrap(), 0.021375, epsilon = 1e-5);
        assert_abs_diff_eq!(optimal_eta(2, 1).unwrap(), 0.58870, epsilon = 1e-5);
        assert!(optimal_eta(1, 10).is_err());
        for j in 3..200 {
            assert!(optimal_eta(j + 1, 50).unwrap() < optimal_eta(j, 50).unwrap());
        }
        let eta = optimal_eta(720, 20).unwrap();
        assert_abs_diff_eq!(regret_bound(720, eta, 20), 615.62, epsilon = 0.1);
        assert_abs_diff_eq!((720f64).ln() / eta, eta * 720.0 * 20.0, epsilon = 1e-9);
        assert_eq!(regret_bound(1, 0.3, 7), 0.3 * 7.0);
        let best = regret_bound(720, eta, 20);
        for other in [0.001, 0.01, 0.02, 0.022, 0.05, 0.5] {
            assert!(best <= regret_bound(720, other, 20));
        }
    }

    #[test]
    fn eta_outside_unit_interval_is_rejected() {
        assert!(LearnerState::new(vec![1.0], 1.5, 0).is_err());
        assert!(LearnerState::new(vec![1.0], 0.0, 0).is_err());
        assert!(LearnerState::new(vec![0.5, 0.4], 0.1, 0).is_err());
    }

    #[test]
    fn sampling_respects_support() {
        let mut s = LearnerState::new(vec![0.0, 1.0, 0.0], 0.1, 9).unwrap();
        assert!((0..1000).all(|_| s.sample_arm() == 1));

        let w = init_weights(&InitScheme::Sbs { center: 20, size: 5 }, 50).unwrap();
        let mut s = LearnerState::new(w, 0.1, 3).unwrap();
        assert!((0..5000).all(|_| (17..22).contains(&s.sample_arm())));
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let mut s = LearnerState::new(vec![0.25; 4], 0.1, 42).unwrap();
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[s.sample_arm()] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.25).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn sub_action_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let single = SuperAction { combo: 0, subs: vec![7] };
        assert!((0..100).all(|_| sample_sub_action(&single, &mut rng) == 0));

        let three = SuperAction { combo: 0, subs: vec![1, 2, 3] };
        let mut counts = [0usize; 3];
        let n = 30_000;
        for _ in 0..n {
            counts[sample_sub_action(&three, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
        let draws: Vec<usize> = (0..20).map(|_| sample_sub_action(&three, &mut rng)).collect();
        assert!(draws.iter().any(|&d| d != draws[0]));
    }

    #[test]
    fn same_seed_same_sequence() {
        let run = |seed| {
            let mut s = LearnerState::new(vec![0.2; 5], 0.2, seed).unwrap();
            let mut seq = Vec::new();
            for _ in 0..200 {
                let j = s.sample_arm();
                s.update(j, 0.1 * j as f64);
                seq.push(j);
            }
            (seq, s.weights().to_vec())
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11).0, run(12).0);
    }

    #[test]
    fn biased_subset_bounds_improve() {
        let t = 500;
        for j_sub in 2..40usize {
            for j in (j_sub + 1)..60 {
                let b_sub = regret_bound(j_sub, optimal_eta(j_sub, t).unwrap(), t);
                let b = regret_bound(j, optimal_eta(j, t).unwrap(), t);
                assert!(b_sub < b);
                if j_sub >= 3 {
                    assert!(optimal_eta(j_sub, t).unwrap() > optimal_eta(j, t).unwrap());
                }
            }
        }
        // ln(2)/2 < ln(3)/3, so the two-arm rate is below the three-arm rate.
        assert!(optimal_eta(2, t).unwrap() < optimal_eta(3, t).unwrap());
    }

    fn weight_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 2..12).prop_filter_map("needs mass", |raw| {
            let total: f64 = raw.iter().sum();
            (total > 1e-3).then(|| raw.iter().map(|x| x / total).collect())
        })
    }

    proptest! {
        #[test]
        fn update_keeps_a_distribution(w in weight_vec(), eta in 0.0001f64..0.99, y in 0.0f64..=1.0, pick in 0usize..64) {
            let positive: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 0.0).collect();
            let j = positive[pick % positive.len()];
            let mut s = LearnerState::new(w.clone(), eta, 0).unwrap();
            s.update(j, y);
            let after = s.weights();
            let total: f64 = after.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(after.iter().all(|&x| x >= 0.0));
            for k in 0..w.len() {
                // zeros stay zero, positives stay positive
                prop_assert_eq!(w[k] == 0.0, after[k] == 0.0);
            }
            // ratios of untouched arms are preserved
            let others: Vec<usize> = positive.iter().copied().filter(|&k| k != j).collect();
            for pair in others.windows(2) {
                let before = w[pair[0]] / w[pair[1]];
                let now = after[pair[0]] / after[pair[1]];
                prop_assert!((before - now).abs() <= 1e-9 * before.abs().max(1.0));
            }
            if y > 0.0 && others.iter().any(|&k| w[k] > 0.0) {
                prop_assert!(after[j] < w[j]);
                for &k in &others {
                    prop_assert!(after[k] > w[k]);
                }
            }
        }

        #[test]
        fn sbs_zeros_persist(center in 1usize..40, size in 1usize..10, seed in any::<u64>()) {
            let arms = 40;
            let size = size.min(arms);
            let w = init_weights(&InitScheme::Sbs { center, size }, arms).unwrap();
            let window = sbs_window(center, size, arms).unwrap();
            let mut s = LearnerState::new(w, 0.3, seed).unwrap();
            for _ in 0..200 {
                let j = s.sample_arm();
                prop_assert!(window.contains(&j));
                s.update(j, 0.7);
            }
            for (k, &x) in s.weights().iter().enumerate() {
                prop_assert_eq!(window.contains(&k), x > 0.0);
            }
        }
    }
}
