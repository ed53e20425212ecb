//! Benchmark policies: exhaustive optimal allocation and a fixed allocation.

use crate::env::{self, AllocationDecision, Environment};
use crate::error::{Result, SliceError};
use crate::space::{validate_action, ArmRef, DecisionSpace, HyperCombo};

/// Performances within this distance of the maximum are co-optimal.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub optimal_performance: f64,
    /// Every maximizing decision, canonical order.
    pub optimal_arms: Vec<ArmRef>,
    /// Hyper-list indices of the maximizers, ascending and distinct.
    pub optimal_combos: Vec<usize>,
}

impl OracleResult {
    pub fn k(&self) -> usize {
        self.optimal_arms.len()
    }

    pub fn optimal_decisions(&self, space: &DecisionSpace) -> Vec<AllocationDecision> {
        self.optimal_arms.iter().map(|&a| space.decision(a)).collect()
    }

    /// Hyper combination shared by the maximizers (the first one if several tie).
    pub fn optimal_combo<'a>(&self, space: &'a DecisionSpace) -> &'a HyperCombo {
        &space.hyper_combos()[self.optimal_combos[0]]
    }

    /// 0-based arms of `space` whose decisions are all optimal: the K
    /// maximizing decisions for OLS, the optimal super action otherwise.
    pub fn arms_in(&self, space: &DecisionSpace) -> Vec<usize> {
        (0..space.len())
            .filter(|&j| self.optimal_combos.contains(&space.arm_combo_index(j)))
            .collect()
    }
}

fn argmax_over<F>(space: &DecisionSpace, mut score: F) -> Result<OracleResult>
where
    F: FnMut(usize) -> f64,
{
    let candidates = space.all_decisions();
    if candidates.is_empty() {
        return Err(SliceError::NoFeasibleAction("oracle needs a non-empty space".into()));
    }
    // Scores depend on the hyper combination only; cache per combination.
    let mut cache: Vec<Option<f64>> = vec![None; space.hyper_combos().len()];
    let mut scored = Vec::with_capacity(candidates.len());
    let mut best = f64::NEG_INFINITY;
    for arm in candidates {
        let h = arm.hyper as usize;
        let f = *cache[h].get_or_insert_with(|| score(h));
        best = best.max(f);
        scored.push((arm, f));
    }
    let optimal_arms: Vec<ArmRef> = scored
        .into_iter()
        .filter(|&(_, f)| f >= best - TIE_TOLERANCE)
        .map(|(a, _)| a)
        .collect();
    let mut optimal_combos: Vec<usize> = optimal_arms.iter().map(|a| a.hyper as usize).collect();
    optimal_combos.sort_unstable();
    optimal_combos.dedup();
    Ok(OracleResult {
        optimal_performance: best,
        optimal_arms,
        optimal_combos,
    })
}

/// Exhaustive search for the best decision at `slot`. Works on any space; for
/// super-action spaces the union of sub-actions is searched.
pub fn oa_oracle(space: &DecisionSpace, env: &Environment, slot: u64) -> Result<OracleResult> {
    argmax_over(space, |h| {
        env::performance_of(space.hyper_combos()[h].values().iter().copied(), env, slot)
    })
}

/// Best fixed decision in hindsight over slots `1..=horizon`, and its per-slot performance.
#[derive(Clone, Debug)]
pub struct OaTrack {
    pub best: OracleResult,
    pub per_slot: Vec<f64>,
}

pub fn oa_track(space: &DecisionSpace, env: &Environment, horizon: u64) -> Result<OaTrack> {
    if !env.has_schedule() {
        let best = oa_oracle(space, env, 1)?;
        let per_slot = vec![best.optimal_performance; horizon as usize];
        return Ok(OaTrack { best, per_slot });
    }
    let scheduled: Vec<u64> = env.scheduled_slots().filter(|&t| t <= horizon).collect();
    let plain = horizon - scheduled.len() as u64;
    let best = argmax_over(space, |h| {
        let values = space.hyper_combos()[h].values();
        let base = env::performance_of(values.iter().copied(), env, env::DEFAULT_SLOT);
        plain as f64 * base
            + scheduled
                .iter()
                .map(|&t| env::performance_of(values.iter().copied(), env, t))
                .sum::<f64>()
    })?;
    let values = space.hyper_combos()[best.optimal_combos[0]].values();
    let per_slot = (1..=horizon)
        .map(|t| env::performance_of(values.iter().copied(), env, t))
        .collect();
    Ok(OaTrack { best, per_slot })
}

/// Per-slot performance of playing `fixed` for `horizon` slots.
pub fn fa_policy(fixed: &AllocationDecision, env: &Environment, horizon: u64) -> Result<Vec<f64>> {
    if !validate_action(fixed, env) {
        return Err(SliceError::config("baselines.fa", "fixed allocation violates the constraints"));
    }
    Ok((1..=horizon).map(|t| env::system_performance(fixed, env, t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{AccuracyCoeffs, ModelAllocation, ModelSpec, ResourcePool};
    use crate::scenario;
    use crate::space::{build_space, Algorithm, Grids, ModelGrid};
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_model_optimum() {
        let env = scenario::two_model_env();
        let ols = build_space(&scenario::two_model_grids(), &env, Algorithm::Ols).unwrap();
        let oa = oa_oracle(&ols, &env, 1).unwrap();
        assert_abs_diff_eq!(oa.optimal_performance, 0.86551, epsilon = 1e-4);
        assert_eq!(oa.k(), 3);
        assert_eq!(oa.optimal_combos.len(), 1);
        assert_eq!(oa.optimal_combo(&ols).values(), &[(100.0, 5), (50.0, 5)]);
        for d in oa.optimal_decisions(&ols) {
            assert!((env::system_performance(&d, &env, 1) - oa.optimal_performance).abs() <= TIE_TOLERANCE);
        }
        assert_eq!(oa.arms_in(&ols).len(), 3);

        let rsa = build_space(&scenario::two_model_grids(), &env, Algorithm::OlsRsa).unwrap();
        let oa_rsa = oa_oracle(&rsa, &env, 1).unwrap();
        assert_eq!(oa_rsa.optimal_performance, oa.optimal_performance);
        assert_eq!(oa_rsa.arms_in(&rsa).len(), 1);
    }

    #[test]
    fn single_arm_and_resource_ties() {
        let model = ModelSpec {
            id: 1,
            coeffs: AccuracyCoeffs::DL_MODEL_1,
            alpha: 1.0,
            c_max: 10.0,
            d_max: 100.0,
            l_min: 25.0,
            l_max: 100.0,
            m_min: 2,
            m_max: 10,
        };
        let env = Environment::new(vec![model], ResourcePool::reference()).unwrap();
        let one = Grids(vec![ModelGrid { l: vec![50.0], m: vec![5], psi: vec![1.5], lambda: vec![1.0] }]);
        let space = build_space(&one, &env, Algorithm::Ols).unwrap();
        let oa = oa_oracle(&space, &env, 1).unwrap();
        assert_eq!(oa.k(), 1);

        let two = Grids(vec![ModelGrid { l: vec![50.0], m: vec![5], psi: vec![1.5, 2.2], lambda: vec![1.0] }]);
        let space = build_space(&two, &env, Algorithm::Ols).unwrap();
        let oa = oa_oracle(&space, &env, 1).unwrap();
        assert_eq!(oa.k(), 2);
    }

    #[test]
    fn fixed_allocation_is_constant_and_below_optimum() {
        let env = scenario::two_model_env();
        let seq = fa_policy(&scenario::two_model_fixed_allocation(), &env, 50).unwrap();
        assert_eq!(seq.len(), 50);
        assert_abs_diff_eq!(seq[0], 0.81552, epsilon = 1e-4);
        assert!(seq.iter().all(|&f| f == seq[0]));
        let ols = build_space(&scenario::two_model_grids(), &env, Algorithm::Ols).unwrap();
        let oa = oa_track(&ols, &env, 50).unwrap();
        assert!(seq.iter().zip(&oa.per_slot).all(|(fa, oa)| fa <= oa));
    }

    #[test]
    fn infeasible_fixed_allocation_is_rejected() {
        let env = scenario::two_model_env();
        let slice = ModelAllocation { l: 50.0, m: 5, psi: 2.2, lambda: 2.0 };
        assert!(fa_policy(&AllocationDecision(vec![slice; 2]), &env, 5).is_err());
    }

    #[test]
    fn hindsight_optimum_follows_the_schedule() {
        let mut env = scenario::two_model_env();
        let ols = build_space(&scenario::two_model_grids(), &env, Algorithm::OlsSa).unwrap();
        // Flat coefficients for every slot make all decisions tie at 0.5.
        let flat = AccuracyCoeffs([0.0, 0.0, 50.0, 0.0, 0.0, 0.0]);
        for t in 1..=10 {
            env.schedule_coeffs(t, vec![flat; 2]).unwrap();
        }
        let track = oa_track(&ols, &env, 10).unwrap();
        assert!(track.per_slot.iter().all(|&f| (f - 0.5).abs() < 1e-12));
        assert_eq!(track.best.optimal_combos.len(), 48);

        // Scheduling a few slots keeps the default optimum for the rest.
        let mut env = scenario::two_model_env();
        env.schedule_coeffs(3, vec![flat; 2]).unwrap();
        let track = oa_track(&ols, &env, 5).unwrap();
        assert_abs_diff_eq!(track.per_slot[2], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(track.per_slot[0], 0.86550, epsilon = 1e-4);
    }
}
