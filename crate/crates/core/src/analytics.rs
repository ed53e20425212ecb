//! Run instrumentation: slot-by-slot traces, regret and reward curves,
//! optimal-arm probability, and abstract operation counts.

use serde::Serialize;

use crate::baselines::OracleResult;
use crate::env::{self, Environment};
use crate::error::{Result, SliceError};
use crate::learner::{init_weights, sample_sub_action, InitScheme, LearnerState};
use crate::space::{ArmRef, Arms, DecisionSpace};

/// Counts of the major operations of a run.
///
/// Pre-learning units: one per constraint check of a candidate combination,
/// one per super action stored, one per candidacy comparison. Learning: one
/// weight update per arm per slot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCounters {
    pub feasibility_checks: u64,
    pub merges: u64,
    pub candidacy_comparisons: u64,
    pub learn_ops_per_slot: u64,
}

impl OpCounters {
    pub fn prelearn_ops(&self) -> u64 {
        self.feasibility_checks + self.merges + self.candidacy_comparisons
    }
}

/// Cumulative operation count at slots `0..=horizon`.
pub fn cumulative_complexity(counters: &OpCounters, horizon: u64) -> Vec<u64> {
    (0..=horizon)
        .map(|t| counters.prelearn_ops() + t * counters.learn_ops_per_slot)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlotRecord {
    pub slot: u64,
    /// 0-based arm index in the space.
    pub arm: usize,
    pub decision: ArmRef,
    pub performance: f64,
    pub loss: f64,
    /// Clamped per-model accuracies.
    pub accuracies: Vec<f64>,
    /// Probability mass on the optimal arm(s) when the arm was drawn.
    pub prob_optimal: f64,
    /// Probability of the drawn arm when it was drawn.
    pub prob_selected: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub seed: u64,
    pub records: Vec<SlotRecord>,
    /// `(slot, weights before the draw)` at the configured cadence.
    pub snapshots: Option<Vec<(u64, Vec<f64>)>>,
    pub final_weights: Vec<f64>,
}

impl RunTrace {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn performances(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.performance)
    }
}

/// Snapshot cadence used when none is configured.
pub fn default_snapshot_every(arms: usize) -> u64 {
    if arms <= 1000 {
        1
    } else {
        10
    }
}

#[derive(Clone, Debug)]
pub struct RunSettings {
    pub eta: f64,
    pub init: InitScheme,
    pub horizon: u64,
    pub seed: u64,
    /// Record weights every this many slots; `None` disables snapshots.
    pub snapshot_every: Option<u64>,
}

/// Plays the learner against the environment for `settings.horizon` slots.
/// `tracked` lists the 0-based arms whose summed probability is recorded.
pub fn simulate(
    space: &DecisionSpace,
    env: &Environment,
    settings: &RunSettings,
    tracked: &[usize],
) -> Result<RunTrace> {
    let weights = init_weights(&settings.init, space.len())?;
    let mut state = LearnerState::new(weights, settings.eta, settings.seed)?;
    let mut records = Vec::with_capacity(settings.horizon as usize);
    let mut snapshots = settings.snapshot_every.map(|_| Vec::new());
    for slot in 1..=settings.horizon {
        if let (Some(every), Some(snaps)) = (settings.snapshot_every, snapshots.as_mut()) {
            if every > 0 && (slot - 1) % every == 0 {
                snaps.push((slot, state.weights().to_vec()));
            }
        }
        let prob_optimal: f64 = tracked.iter().map(|&k| state.weights()[k]).sum();
        let arm = state.sample_arm();
        let prob_selected = state.weights()[arm];
        let decision = match space.arms() {
            Arms::Decisions(arms) => arms[arm],
            Arms::Super(supers) => {
                let sa = &supers[arm];
                let k = sample_sub_action(sa, state.rng_mut());
                ArmRef { hyper: sa.combo, resource: sa.subs[k] }
            }
        };
        let hyper = space.hyper_combos()[decision.hyper as usize].values();
        let accuracies = env::model_accuracies(hyper.iter().copied(), env, slot);
        let performance = env::performance_of(hyper.iter().copied(), env, slot);
        let loss = env::loss(performance);
        state.update(arm, loss);
        records.push(SlotRecord {
            slot,
            arm,
            decision,
            performance,
            loss,
            accuracies,
            prob_optimal,
            prob_selected,
        });
    }
    Ok(RunTrace {
        seed: settings.seed,
        records,
        snapshots,
        final_weights: state.weights().to_vec(),
    })
}

/// `R_t = sum_{tau<=t} f(a*) - f(a_tau)` for each slot.
pub fn cumulative_regret(trace: &RunTrace, optimal_per_slot: &[f64]) -> Vec<f64> {
    debug_assert_eq!(trace.horizon(), optimal_per_slot.len());
    let mut acc = 0.0;
    trace
        .performances()
        .zip(optimal_per_slot)
        .map(|(f, best)| {
            acc += best - f;
            acc
        })
        .collect()
}

pub fn average_regret(trace: &RunTrace, optimal_per_slot: &[f64]) -> Vec<f64> {
    cumulative_regret(trace, optimal_per_slot)
        .into_iter()
        .enumerate()
        .map(|(k, r)| r / (k + 1) as f64)
        .collect()
}

pub fn average_reward(trace: &RunTrace) -> Vec<f64> {
    let mut acc = 0.0;
    trace
        .performances()
        .enumerate()
        .map(|(k, f)| {
            acc += f;
            acc / (k + 1) as f64
        })
        .collect()
}

/// Probability of the optimal arm at each recorded snapshot. For OLS the
/// weights of all K optimal decisions are summed.
pub fn optimal_probability(trace: &RunTrace, oracle: &OracleResult, space: &DecisionSpace) -> Result<Vec<(u64, f64)>> {
    let snaps = trace.snapshots.as_ref().ok_or(SliceError::SnapshotsUnavailable)?;
    let tracked = oracle.arms_in(space);
    Ok(snaps
        .iter()
        .map(|(slot, w)| (*slot, tracked.iter().map(|&k| w[k]).sum()))
        .collect())
}

/// Slot-wise mean of equally long series.
pub fn mean_series<'a, I>(series: I) -> Vec<f64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut out: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for s in series {
        if out.is_empty() {
            out = vec![0.0; s.len()];
        }
        debug_assert_eq!(out.len(), s.len());
        for (o, x) in out.iter_mut().zip(s) {
            *o += x;
        }
        n += 1;
    }
    if n > 0 {
        for o in &mut out {
            *o /= n as f64;
        }
    }
    out
}
