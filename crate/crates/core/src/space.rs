//! Construction of the combinatorial decision space.
//!
//! Every decision variable is discretized on a per-model grid. The pre-learning
//! pipeline enumerates hyper-parameter combinations and resource combinations,
//! drops resource combinations that break the capacity or budget constraints,
//! pairs the survivors under the latency deadline, and optionally groups the
//! resulting decisions into super actions and prunes super actions that are
//! dominated in every `(l, m)` coordinate.
//!
//! Arm order is canonical: lexicographic over grid indices with model 1
//! outermost and `(l, m, psi, lambda)` within a model. Super actions follow the
//! same rule restricted to `(l, m)`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::OpCounters;
use crate::env::{self, AllocationDecision, Environment, ModelAllocation};
use crate::error::{Result, SliceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ols")]
    Ols,
    #[serde(rename = "ols-sa")]
    OlsSa,
    #[serde(rename = "ols-rsa")]
    OlsRsa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ols, Algorithm::OlsSa, Algorithm::OlsRsa];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Ols => "ols",
            Algorithm::OlsSa => "ols-sa",
            Algorithm::OlsRsa => "ols-rsa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = SliceError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ols" => Ok(Algorithm::Ols),
            "ols-sa" => Ok(Algorithm::OlsSa),
            "ols-rsa" => Ok(Algorithm::OlsRsa),
            other => Err(SliceError::config(
                "algorithm",
                format!("unknown algorithm `{other}` (expected ols, ols-sa or ols-rsa)"),
            )),
        }
    }
}

/// Discretization of one model's decision variables. All grids ascend strictly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelGrid {
    pub l: Vec<f64>,
    pub m: Vec<u32>,
    pub psi: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grids(pub Vec<ModelGrid>);

fn check_ascending<T: PartialOrd + Copy + fmt::Debug>(path: &str, values: &[T]) -> Result<()> {
    if values.is_empty() {
        return Err(SliceError::config(path, "grid is empty"));
    }
    if values.len() > usize::from(u16::MAX) {
        return Err(SliceError::config(path, "grid has too many points"));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SliceError::config(path, format!("grid must be strictly ascending, got {values:?}")));
    }
    Ok(())
}

impl Grids {
    /// The same grid for each of `models` models.
    pub fn uniform(grid: ModelGrid, models: usize) -> Self {
        Grids(vec![grid; models])
    }

    pub fn models(&self) -> &[ModelGrid] {
        &self.0
    }

    pub fn validate(&self, env: &Environment) -> Result<()> {
        if self.0.len() != env.num_models() {
            return Err(SliceError::config(
                "grids",
                format!("expected {} model grids, got {}", env.num_models(), self.0.len()),
            ));
        }
        let pool = env.pool();
        for (i, (grid, model)) in self.0.iter().zip(env.models()).enumerate() {
            let path = format!("grids[{i}]");
            check_ascending(&format!("{path}.l"), &grid.l)?;
            check_ascending(&format!("{path}.m"), &grid.m)?;
            check_ascending(&format!("{path}.psi"), &grid.psi)?;
            check_ascending(&format!("{path}.lambda"), &grid.lambda)?;
            if let Some(l) = grid.l.iter().find(|&&l| l < model.l_min || l > model.l_max) {
                return Err(SliceError::config(
                    format!("{path}.l"),
                    format!("value {l} outside [{}, {}]", model.l_min, model.l_max),
                ));
            }
            if let Some(m) = grid.m.iter().find(|&&m| m < model.m_min || m > model.m_max) {
                return Err(SliceError::config(
                    format!("{path}.m"),
                    format!("value {m} outside [{}, {}]", model.m_min, model.m_max),
                ));
            }
            if let Some(p) = grid.psi.iter().find(|&&p| !(p > 0.0 && p <= pool.psi_max)) {
                return Err(SliceError::config(
                    format!("{path}.psi"),
                    format!("value {p} outside (0, {}]", pool.psi_max),
                ));
            }
            if let Some(r) = grid.lambda.iter().find(|&&r| !(r > 0.0 && r <= pool.lambda_max)) {
                return Err(SliceError::config(
                    format!("{path}.lambda"),
                    format!("value {r} outside (0, {}]", pool.lambda_max),
                ));
            }
        }
        Ok(())
    }
}

/// Per-model `(l, m)` choice, with the grid indices it was drawn from.
#[derive(Clone, Debug)]
pub struct HyperCombo {
    idx: Vec<[u16; 2]>,
    values: Vec<(f64, u32)>,
}

impl HyperCombo {
    /// `(l_i, m_i)` for each model.
    pub fn values(&self) -> &[(f64, u32)] {
        &self.values
    }

    /// 0-based `(l, m)` grid indices for each model.
    pub fn indices(&self) -> &[[u16; 2]] {
        &self.idx
    }

    /// Componentwise `>=` over the vector `(l_1, m_1, ..., l_I, m_I)`.
    pub fn covers(&self, other: &HyperCombo) -> bool {
        self.values
            .iter()
            .zip(&other.values)
            .all(|(&(l, m), &(ol, om))| l >= ol && m >= om)
    }
}

impl PartialEq for HyperCombo {
    fn eq(&self, other: &Self) -> bool {
        self.idx == other.idx
    }
}

impl Eq for HyperCombo {}

/// Per-model `(psi, lambda)` choice, with grid indices.
#[derive(Clone, Debug)]
pub struct ResourceCombo {
    idx: Vec<[u16; 2]>,
    values: Vec<(f64, f64)>,
}

impl ResourceCombo {
    pub fn values(&self) -> &[(f64, f64)] {
        &self.values
    }

    pub fn indices(&self) -> &[[u16; 2]] {
        &self.idx
    }
}

impl PartialEq for ResourceCombo {
    fn eq(&self, other: &Self) -> bool {
        self.idx == other.idx
    }
}

impl Eq for ResourceCombo {}

/// Cartesian product of per-slot choices in lexicographic order (first slot outermost).
fn odometer(radices: &[usize]) -> Vec<Vec<u16>> {
    let total: usize = radices.iter().product();
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return out;
    }
    let mut cur = vec![0u16; radices.len()];
    for _ in 0..total {
        out.push(cur.clone());
        for k in (0..radices.len()).rev() {
            cur[k] += 1;
            if usize::from(cur[k]) < radices[k] {
                break;
            }
            cur[k] = 0;
        }
    }
    out
}

fn pair_up(flat: &[u16]) -> Vec<[u16; 2]> {
    flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect()
}

pub fn enumerate_hyperparams(grids: &Grids) -> Result<Vec<HyperCombo>> {
    if grids.0.is_empty() {
        return Err(SliceError::config("grids", "no model grids"));
    }
    let mut radices = Vec::with_capacity(2 * grids.0.len());
    for (i, g) in grids.0.iter().enumerate() {
        if g.l.is_empty() || g.m.is_empty() {
            return Err(SliceError::config(format!("grids[{i}]"), "empty l or m grid"));
        }
        radices.extend([g.l.len(), g.m.len()]);
    }
    Ok(odometer(&radices)
        .into_iter()
        .map(|flat| {
            let idx = pair_up(&flat);
            let values = idx
                .iter()
                .zip(&grids.0)
                .map(|(&[li, mi], g)| (g.l[usize::from(li)], g.m[usize::from(mi)]))
                .collect();
            HyperCombo { idx, values }
        })
        .collect())
}

pub fn enumerate_resources(grids: &Grids) -> Result<Vec<ResourceCombo>> {
    if grids.0.is_empty() {
        return Err(SliceError::config("grids", "no model grids"));
    }
    let mut radices = Vec::with_capacity(2 * grids.0.len());
    for (i, g) in grids.0.iter().enumerate() {
        if g.psi.is_empty() || g.lambda.is_empty() {
            return Err(SliceError::config(format!("grids[{i}]"), "empty psi or lambda grid"));
        }
        radices.extend([g.psi.len(), g.lambda.len()]);
    }
    Ok(odometer(&radices)
        .into_iter()
        .map(|flat| {
            let idx = pair_up(&flat);
            let values = idx
                .iter()
                .zip(&grids.0)
                .map(|(&[pi, ri], g)| (g.psi[usize::from(pi)], g.lambda[usize::from(ri)]))
                .collect();
            ResourceCombo { idx, values }
        })
        .collect())
}

/// Keeps resource combinations within total compute, total rate, and every
/// model's budget. One feasibility check is counted per candidate.
pub fn filter_resources(combos: &[ResourceCombo], env: &Environment, ops: &mut OpCounters) -> Vec<ResourceCombo> {
    let pool = env.pool();
    ops.feasibility_checks += combos.len() as u64;
    combos
        .iter()
        .filter(|s| {
            let psi_total: f64 = s.values.iter().map(|v| v.0).sum();
            let lambda_total: f64 = s.values.iter().map(|v| v.1).sum();
            env::within(psi_total, pool.psi_max)
                && env::within(lambda_total, pool.lambda_max)
                && s
                    .values
                    .iter()
                    .zip(env.models())
                    .all(|(&(psi, lambda), model)| env::within(env::cost(psi, lambda, pool), model.c_max))
        })
        .cloned()
        .collect()
}

fn meets_deadlines(o: &HyperCombo, s: &ResourceCombo, env: &Environment) -> bool {
    let pool = env.pool();
    o.values
        .iter()
        .zip(&s.values)
        .zip(env.models())
        .all(|((&(l, m), &(psi, lambda)), model)| {
            let slice = ModelAllocation { l, m, psi, lambda };
            env::within(env::learning_latency(&slice, pool), model.d_max)
        })
}

/// One OLS arm: indices into the space's hyper and feasible-resource lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArmRef {
    pub hyper: u32,
    pub resource: u32,
}

/// A group of feasible decisions sharing one hyper-parameter combination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperAction {
    /// Index into the space's hyper list.
    pub combo: u32,
    /// Indices into the space's feasible-resource list, canonical order.
    pub subs: Vec<u32>,
}

#[derive(Clone, Debug)]
pub enum Arms {
    Decisions(Vec<ArmRef>),
    Super(Vec<SuperAction>),
}

/// Arms of one algorithm plus the combination tables they index into.
#[derive(Clone, Debug)]
pub struct DecisionSpace {
    kind: Algorithm,
    hyper: Arc<Vec<HyperCombo>>,
    resources: Arc<Vec<ResourceCombo>>,
    arms: Arms,
    ops: OpCounters,
}

impl DecisionSpace {
    pub fn kind(&self) -> Algorithm {
        self.kind
    }

    pub fn len(&self) -> usize {
        match &self.arms {
            Arms::Decisions(a) => a.len(),
            Arms::Super(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn arms(&self) -> &Arms {
        &self.arms
    }

    pub fn hyper_combos(&self) -> &[HyperCombo] {
        &self.hyper
    }

    pub fn feasible_resources(&self) -> &[ResourceCombo] {
        &self.resources
    }

    /// Pre-learning operation count, and `J` weight updates per slot.
    pub fn op_counters(&self) -> OpCounters {
        OpCounters {
            learn_ops_per_slot: self.len() as u64,
            ..self.ops
        }
    }

    /// Index into the hyper list of arm `j` (0-based).
    pub fn arm_combo_index(&self, j: usize) -> usize {
        match &self.arms {
            Arms::Decisions(a) => a[j].hyper as usize,
            Arms::Super(s) => s[j].combo as usize,
        }
    }

    pub fn arm_combo(&self, j: usize) -> &HyperCombo {
        &self.hyper[self.arm_combo_index(j)]
    }

    pub fn super_action(&self, j: usize) -> Option<&SuperAction> {
        match &self.arms {
            Arms::Decisions(_) => None,
            Arms::Super(s) => Some(&s[j]),
        }
    }

    /// Number of concrete decisions behind arm `j`.
    pub fn arm_size(&self, j: usize) -> usize {
        self.super_action(j).map_or(1, |sa| sa.subs.len())
    }

    pub fn decision(&self, arm: ArmRef) -> AllocationDecision {
        let o = &self.hyper[arm.hyper as usize];
        let s = &self.resources[arm.resource as usize];
        AllocationDecision(
            o.values
                .iter()
                .zip(&s.values)
                .map(|(&(l, m), &(psi, lambda))| ModelAllocation { l, m, psi, lambda })
                .collect(),
        )
    }

    /// Every concrete decision the space can play, in canonical order.
    pub fn all_decisions(&self) -> Vec<ArmRef> {
        match &self.arms {
            Arms::Decisions(a) => a.clone(),
            Arms::Super(s) => s
                .iter()
                .flat_map(|sa| sa.subs.iter().map(move |&r| ArmRef { hyper: sa.combo, resource: r }))
                .collect(),
        }
    }

    /// Index of the arm whose hyper combination is `combo_index`, if any.
    pub fn arm_with_combo(&self, combo_index: usize) -> Option<usize> {
        match &self.arms {
            Arms::Decisions(_) => None,
            Arms::Super(s) => s.iter().position(|sa| sa.combo as usize == combo_index),
        }
    }

    pub fn arm_performance(&self, j: usize, env: &Environment, slot: u64) -> f64 {
        env::performance_of(self.arm_combo(j).values.iter().copied(), env, slot)
    }
}

/// Interleaved `(l, m, psi, lambda)` per-model comparison of two OLS arms.
fn canonical_cmp(a: ArmRef, b: ArmRef, hyper: &[HyperCombo], resources: &[ResourceCombo]) -> Ordering {
    let (ha, hb) = (&hyper[a.hyper as usize].idx, &hyper[b.hyper as usize].idx);
    let (ra, rb) = (&resources[a.resource as usize].idx, &resources[b.resource as usize].idx);
    for i in 0..ha.len() {
        let ka = [ha[i][0], ha[i][1], ra[i][0], ra[i][1]];
        let kb = [hb[i][0], hb[i][1], rb[i][0], rb[i][1]];
        match ka.cmp(&kb) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

/// For each hyper combination (in order), the feasible resources meeting every deadline.
fn latency_feasible(hyper: &[HyperCombo], feasible_res: &[ResourceCombo], env: &Environment) -> Vec<Vec<u32>> {
    hyper
        .par_iter()
        .map(|o| {
            feasible_res
                .iter()
                .enumerate()
                .filter(|(_, s)| meets_deadlines(o, s, env))
                .map(|(k, _)| k as u32)
                .collect()
        })
        .collect()
}

/// Pairs every hyper combination with every pre-filtered resource combination
/// and keeps the pairs that meet each model's deadline.
pub fn build_ols_space(
    hyper: &[HyperCombo],
    feasible_res: &[ResourceCombo],
    env: &Environment,
    ops: &mut OpCounters,
) -> Result<DecisionSpace> {
    ops.feasibility_checks += (hyper.len() * feasible_res.len()) as u64;
    let per_combo = latency_feasible(hyper, feasible_res, env);
    let mut arms: Vec<ArmRef> = per_combo
        .iter()
        .enumerate()
        .flat_map(|(h, subs)| subs.iter().map(move |&r| ArmRef { hyper: h as u32, resource: r }))
        .collect();
    if arms.is_empty() {
        return Err(SliceError::NoFeasibleAction(
            "no (hyper-parameter, resource) pair satisfies every constraint".into(),
        ));
    }
    arms.sort_unstable_by(|&a, &b| canonical_cmp(a, b, hyper, feasible_res));
    Ok(DecisionSpace {
        kind: Algorithm::Ols,
        hyper: Arc::new(hyper.to_vec()),
        resources: Arc::new(feasible_res.to_vec()),
        arms: Arms::Decisions(arms),
        ops: *ops,
    })
}

/// Groups feasible decisions by hyper combination. One merge is counted per
/// super action stored.
pub fn build_super_actions(
    hyper: &[HyperCombo],
    feasible_res: &[ResourceCombo],
    env: &Environment,
    ops: &mut OpCounters,
) -> Result<DecisionSpace> {
    ops.feasibility_checks += (hyper.len() * feasible_res.len()) as u64;
    let supers: Vec<SuperAction> = latency_feasible(hyper, feasible_res, env)
        .into_iter()
        .enumerate()
        .filter(|(_, subs)| !subs.is_empty())
        .map(|(h, subs)| SuperAction { combo: h as u32, subs })
        .collect();
    ops.merges += supers.len() as u64;
    if supers.is_empty() {
        return Err(SliceError::NoFeasibleAction(
            "no hyper-parameter combination has a feasible sub-action".into(),
        ));
    }
    Ok(DecisionSpace {
        kind: Algorithm::OlsSa,
        hyper: Arc::new(hyper.to_vec()),
        resources: Arc::new(feasible_res.to_vec()),
        arms: Arms::Super(supers),
        ops: *ops,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Candidacy {
    /// The newcomer covers the incumbent in every coordinate.
    Overtakes,
    /// The incumbent covers the newcomer.
    Overtaken,
    /// Some coordinates favor each side.
    TradeOff,
}

fn candidacy(newcomer: &HyperCombo, incumbent: &HyperCombo) -> Candidacy {
    if newcomer.covers(incumbent) {
        Candidacy::Overtakes
    } else if incumbent.covers(newcomer) {
        Candidacy::Overtaken
    } else {
        Candidacy::TradeOff
    }
}

/// Keeps only candidates for the optimal super action: those whose `(l, m)`
/// vector is not covered componentwise by another feasible super action.
///
/// Super actions are visited in canonical order and compared against the
/// current candidate set. A newcomer that covers an incumbent removes it; a
/// newcomer covered by any incumbent is dropped; otherwise it joins the set.
/// One comparison is counted per (newcomer, incumbent) pair examined.
pub fn reduce_super_actions(space: &DecisionSpace) -> Result<DecisionSpace> {
    let Arms::Super(supers) = &space.arms else {
        return Err(SliceError::config("algorithm", "reduction needs a super-action space"));
    };
    let mut ops = space.ops;
    let mut candidates: Vec<usize> = Vec::new();
    for (k, b) in supers.iter().enumerate() {
        let combo = &space.hyper[b.combo as usize];
        if candidates.is_empty() {
            candidates.push(k);
            continue;
        }
        let mut is_candidate = true;
        let mut overtaken = Vec::new();
        for &c in &candidates {
            ops.candidacy_comparisons += 1;
            match candidacy(combo, &space.hyper[supers[c].combo as usize]) {
                Candidacy::Overtakes => overtaken.push(c),
                Candidacy::Overtaken => {
                    is_candidate = false;
                    break;
                }
                Candidacy::TradeOff => {}
            }
        }
        if is_candidate {
            candidates.retain(|c| !overtaken.contains(c));
            candidates.push(k);
        }
    }
    candidates.sort_unstable();
    Ok(DecisionSpace {
        kind: Algorithm::OlsRsa,
        hyper: Arc::clone(&space.hyper),
        resources: Arc::clone(&space.resources),
        arms: Arms::Super(candidates.into_iter().map(|k| supers[k].clone()).collect()),
        ops,
    })
}

/// Independent re-check of every constraint of the allocation problem.
pub fn validate_action(a: &AllocationDecision, env: &Environment) -> bool {
    if a.0.len() != env.num_models() {
        return false;
    }
    let pool = env.pool();
    let mut psi_total = 0.0;
    let mut lambda_total = 0.0;
    for (slice, model) in a.0.iter().zip(env.models()) {
        if !(slice.psi > 0.0 && slice.lambda > 0.0) {
            return false;
        }
        psi_total += slice.psi;
        lambda_total += slice.lambda;
        let samples = slice.l / 100.0 * pool.dataset_size;
        let transfer = samples / pool.batch_size / slice.lambda / 60.0 + pool.epsilon;
        let compute = f64::from(slice.m) * pool.phi * samples / (slice.psi * 1e9) / 60.0;
        let spend = pool.c_psi * slice.psi + pool.c_lambda * slice.lambda;
        let ok = env::within(transfer + compute, model.d_max)
            && env::within(spend, model.c_max)
            && slice.l >= model.l_min
            && slice.l <= model.l_max
            && slice.m >= model.m_min
            && slice.m <= model.m_max;
        if !ok {
            return false;
        }
    }
    env::within(psi_total, pool.psi_max) && env::within(lambda_total, pool.lambda_max)
}

/// Runs the pre-learning pipeline for `algorithm`.
pub fn build_space(grids: &Grids, env: &Environment, algorithm: Algorithm) -> Result<DecisionSpace> {
    grids.validate(env)?;
    let hyper = enumerate_hyperparams(grids)?;
    let all_res = enumerate_resources(grids)?;
    let mut ops = OpCounters::default();
    let feasible = filter_resources(&all_res, env, &mut ops);
    let annotate = |e: SliceError| match e {
        SliceError::NoFeasibleAction(msg) => {
            SliceError::NoFeasibleAction(format!("{msg}; {}", diagnose_infeasibility(grids, env)))
        }
        other => other,
    };
    if feasible.is_empty() {
        return Err(annotate(SliceError::NoFeasibleAction(
            "no resource combination satisfies the capacity and budget constraints".into(),
        )));
    }
    match algorithm {
        Algorithm::Ols => build_ols_space(&hyper, &feasible, env, &mut ops).map_err(annotate),
        Algorithm::OlsSa => build_super_actions(&hyper, &feasible, env, &mut ops).map_err(annotate),
        Algorithm::OlsRsa => {
            let sa = build_super_actions(&hyper, &feasible, env, &mut ops).map_err(annotate)?;
            reduce_super_actions(&sa)
        }
    }
}

/// Names the constraint furthest from being satisfiable by the most permissive
/// grid choice.
pub fn diagnose_infeasibility(grids: &Grids, env: &Environment) -> String {
    let pool = env.pool();
    let min_of = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max_of = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut worst: Option<(f64, String)> = None;
    let mut consider = |need: f64, limit: f64, what: String| {
        let ratio = need / limit;
        if ratio > 1.0 + env::FEASIBILITY_TOLERANCE && worst.as_ref().is_none_or(|(r, _)| ratio > *r) {
            worst = Some((ratio, what));
        }
    };
    let psi_need: f64 = grids.0.iter().map(|g| min_of(&g.psi)).sum();
    consider(
        psi_need,
        pool.psi_max,
        format!("total compute: smallest grid sum {psi_need} exceeds psi_max {}", pool.psi_max),
    );
    let lambda_need: f64 = grids.0.iter().map(|g| min_of(&g.lambda)).sum();
    consider(
        lambda_need,
        pool.lambda_max,
        format!("total rate: smallest grid sum {lambda_need} exceeds lambda_max {}", pool.lambda_max),
    );
    for (g, model) in grids.0.iter().zip(env.models()) {
        let c = env::cost(min_of(&g.psi), min_of(&g.lambda), pool);
        consider(
            c,
            model.c_max,
            format!("budget of model {}: cheapest allocation costs {c} > c_max {}", model.id, model.c_max),
        );
        let fastest = ModelAllocation {
            l: min_of(&g.l),
            m: g.m.iter().copied().min().unwrap_or(1),
            psi: max_of(&g.psi),
            lambda: max_of(&g.lambda),
        };
        let d = env::learning_latency(&fastest, pool);
        consider(
            d,
            model.d_max,
            format!("deadline of model {}: fastest training takes {d} min > d_max {}", model.id, model.d_max),
        );
    }
    match worst {
        Some((ratio, what)) => format!("tightest constraint is {what} (ratio {ratio:.4})"),
        None => "no single constraint is violated in isolation; the capacity, budget and deadline \
                 constraints are jointly infeasible on these grids"
            .to_string(),
    }
}
