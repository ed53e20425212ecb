//! Closed-form environment model.
//!
//! Inference accuracy follows a three-term exponential regression in the
//! data-size percentage `l` and epoch count `m`. Learning latency is the sum of
//! a transfer term (samples moved in batches at the allocated rate) and a
//! processing term (CPU cycles over allocated frequency). All latencies are in
//! minutes; deadlines are given in minutes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SliceError};

/// Relative slack applied to every `value <= limit` constraint check, so that
/// sums such as `0.2 * 2.2 + 0.02 * 1.0` compare equal to a `0.46` budget.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Never scheduled; evaluating at this slot always uses the default coefficients.
pub const DEFAULT_SLOT: u64 = 0;

#[inline]
pub(crate) fn within(value: f64, limit: f64) -> bool {
    value <= limit + FEASIBILITY_TOLERANCE * limit.abs().max(1.0)
}

/// Coefficients `(g1, ..., g6)` of the accuracy regression, in percent units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AccuracyCoeffs(pub [f64; 6]);

impl AccuracyCoeffs {
    pub const DL_MODEL_1: Self = AccuracyCoeffs([-60.0, -0.03109, 96.98, 0.0006553, -120.0, -0.8355]);
    pub const DL_MODEL_2: Self = AccuracyCoeffs([-48.0, -0.03, 98.5, 0.001, -97.0, -0.5]);
    pub const DL_MODEL_3: Self = AccuracyCoeffs([-40.0, -0.04, 97.0, 0.002, -110.0, -0.6]);
    pub const DL_MODEL_4: Self = AccuracyCoeffs([-38.0, -0.04, 95.0, 0.0015, -100.0, -0.64]);

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|g| g.is_finite())
    }
}

/// One AI service: its accuracy regression plus the request tuple
/// `(alpha, c_max, d_max, l_min, l_max, m_min, m_max)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// 1-based model index.
    pub id: usize,
    pub coeffs: AccuracyCoeffs,
    /// Priority weight.
    pub alpha: f64,
    /// Budget in dollars.
    pub c_max: f64,
    /// Deadline in minutes.
    pub d_max: f64,
    /// Data-size range in percent of the full dataset.
    pub l_min: f64,
    pub l_max: f64,
    pub m_min: u32,
    pub m_max: u32,
}

impl ModelSpec {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !self.coeffs.is_finite() {
            return Err(SliceError::config(format!("{path}.coeffs"), "coefficients must be finite"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(SliceError::config(format!("{path}.alpha"), "must be positive"));
        }
        if !(self.c_max > 0.0 && self.c_max.is_finite()) {
            return Err(SliceError::config(format!("{path}.c_max"), "must be positive"));
        }
        // An infinite deadline is allowed: it disables the latency constraint.
        if !(self.d_max > 0.0) {
            return Err(SliceError::config(format!("{path}.d_max"), "must be positive"));
        }
        if !(self.l_min > 0.0 && self.l_min <= self.l_max && self.l_max <= 100.0) {
            return Err(SliceError::config(
                format!("{path}.l_min"),
                format!("need 0 < l_min <= l_max <= 100, got [{}, {}]", self.l_min, self.l_max),
            ));
        }
        if !(self.m_min >= 1 && self.m_min <= self.m_max) {
            return Err(SliceError::config(
                format!("{path}.m_min"),
                format!("need 1 <= m_min <= m_max, got [{}, {}]", self.m_min, self.m_max),
            ));
        }
        // The regression is monotone in each argument per term, so the extreme
        // magnitudes over the box are reached at its corners.
        for l in [self.l_min, self.l_max] {
            for m in [self.m_min, self.m_max] {
                accuracy(&self.coeffs, l, m).map_err(|e| SliceError::config(format!("{path}.coeffs"), e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// Shared capacities and unit costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourcePool {
    /// Total compute in GHz.
    pub psi_max: f64,
    /// Total transfer rate in batches per second.
    pub lambda_max: f64,
    /// CPU cycles needed per sample per epoch.
    pub phi: f64,
    /// Dollars per GHz.
    pub c_psi: f64,
    /// Dollars per unit of rate.
    pub c_lambda: f64,
    /// Channel access delay in minutes.
    #[serde(default)]
    pub epsilon: f64,
    /// Samples corresponding to `l = 100`.
    #[serde(default = "default_dataset_size")]
    pub dataset_size: f64,
    /// Samples per batch.
    #[serde(default = "default_batch_size")]
    pub batch_size: f64,
}

fn default_dataset_size() -> f64 {
    245_921.0
}

fn default_batch_size() -> f64 {
    10_000.0
}

impl ResourcePool {
    /// Resources and unit costs of the reference two-model setup.
    pub fn reference() -> Self {
        ResourcePool {
            psi_max: 3.7,
            lambda_max: 5.0,
            phi: 350_000.0,
            c_psi: 0.2,
            c_lambda: 0.02,
            epsilon: 0.0,
            dataset_size: default_dataset_size(),
            batch_size: default_batch_size(),
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        let positive = [
            ("psi_max", self.psi_max),
            ("lambda_max", self.lambda_max),
            ("phi", self.phi),
            ("c_psi", self.c_psi),
            ("c_lambda", self.c_lambda),
            ("dataset_size", self.dataset_size),
            ("batch_size", self.batch_size),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SliceError::config(format!("{path}.{name}"), format!("must be positive, got {v}")));
            }
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(SliceError::config(format!("{path}.epsilon"), "must be >= 0"));
        }
        Ok(())
    }

    /// Sample count for a data-size percentage. Not rounded.
    #[inline]
    pub fn samples(&self, l: f64) -> f64 {
        l / 100.0 * self.dataset_size
    }
}

/// Per-model slice of an allocation decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelAllocation {
    /// Data size in percent.
    pub l: f64,
    /// Epochs.
    pub m: u32,
    /// Compute in GHz.
    pub psi: f64,
    /// Rate in batches per second.
    pub lambda: f64,
}

/// The joint decision `(l_i, m_i, psi_i, lambda_i)` for every model, in model order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AllocationDecision(pub Vec<ModelAllocation>);

impl AllocationDecision {
    pub fn slices(&self) -> &[ModelAllocation] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    models: Vec<ModelSpec>,
    pool: ResourcePool,
    coeff_schedule: BTreeMap<u64, Vec<AccuracyCoeffs>>,
}

impl Environment {
    pub fn new(models: Vec<ModelSpec>, pool: ResourcePool) -> Result<Self> {
        if models.is_empty() {
            return Err(SliceError::config("models", "at least one model is required"));
        }
        for (k, model) in models.iter().enumerate() {
            let path = format!("models[{k}]");
            if model.id != k + 1 {
                return Err(SliceError::config(
                    format!("{path}.id"),
                    format!("model ids must be 1..I without gaps, expected {} got {}", k + 1, model.id),
                ));
            }
            model.validate(&path)?;
        }
        pool.validate("pool")?;
        Ok(Environment {
            models,
            pool,
            coeff_schedule: BTreeMap::new(),
        })
    }

    /// Overrides the accuracy coefficients of every model at `slot` (1-based).
    pub fn schedule_coeffs(&mut self, slot: u64, coeffs: Vec<AccuracyCoeffs>) -> Result<()> {
        let path = format!("coeff_schedule[{slot}]");
        if slot == DEFAULT_SLOT {
            return Err(SliceError::config(path, "slots are numbered from 1"));
        }
        if coeffs.len() != self.models.len() {
            return Err(SliceError::config(
                path,
                format!("expected {} coefficient rows, got {}", self.models.len(), coeffs.len()),
            ));
        }
        for (model, c) in self.models.iter().zip(&coeffs) {
            let mut probe = model.clone();
            probe.coeffs = *c;
            probe.validate(&path)?;
        }
        self.coeff_schedule.insert(slot, coeffs);
        Ok(())
    }

    pub fn models(&self) -> &[ModelSpec] {
        &self.models
    }

    pub fn pool(&self) -> &ResourcePool {
        &self.pool
    }

    pub fn num_models(&self) -> usize {
        self.models.len()
    }

    pub fn scheduled_slots(&self) -> impl Iterator<Item = u64> + '_ {
        self.coeff_schedule.keys().copied()
    }

    pub fn has_schedule(&self) -> bool {
        !self.coeff_schedule.is_empty()
    }

    /// Coefficients of model `i` (0-based) in effect at `slot`.
    pub fn coeffs_at(&self, i: usize, slot: u64) -> &AccuracyCoeffs {
        match self.coeff_schedule.get(&slot) {
            Some(row) => &row[i],
            None => &self.models[i].coeffs,
        }
    }

    fn alpha_total(&self) -> f64 {
        self.models.iter().map(|m| m.alpha).sum()
    }
}

/// Raw regression output as a fraction. May leave `[0, 1]` for extreme inputs.
pub fn accuracy(coeffs: &AccuracyCoeffs, l: f64, m: u32) -> Result<f64> {
    let [g1, g2, g3, g4, g5, g6] = coeffs.0;
    let m = f64::from(m);
    let q = (g1 * (g2 * l).exp() + g3 * (g4 * m).exp() + g5 * (g6 * m).exp()) / 100.0;
    if q.is_finite() {
        Ok(q)
    } else {
        Err(SliceError::Domain(format!("accuracy is not finite at l={l}, m={m} for {coeffs:?}")))
    }
}

/// Time to move `samples` at `lambda` batches/sec, plus channel access delay. Minutes.
pub fn comm_delay(samples: f64, lambda: f64, pool: &ResourcePool) -> f64 {
    samples / pool.batch_size / lambda / 60.0 + pool.epsilon
}

/// `m` epochs over `samples` at `phi` cycles each on `psi` GHz. Minutes.
pub fn proc_delay(samples: f64, m: u32, psi: f64, pool: &ResourcePool) -> f64 {
    f64::from(m) * pool.phi * samples / (psi * 1e9) / 60.0
}

pub fn learning_latency(slice: &ModelAllocation, pool: &ResourcePool) -> f64 {
    let samples = pool.samples(slice.l);
    comm_delay(samples, slice.lambda, pool) + proc_delay(samples, slice.m, slice.psi, pool)
}

pub fn cost(psi: f64, lambda: f64, pool: &ResourcePool) -> f64 {
    pool.c_psi * psi + pool.c_lambda * lambda
}

/// Accuracy of each model clamped into `[0, 1]`.
pub fn model_accuracies<I>(hyper: I, env: &Environment, slot: u64) -> Vec<f64>
where
    I: IntoIterator<Item = (f64, u32)>,
{
    hyper
        .into_iter()
        .enumerate()
        .map(|(i, (l, m))| clamped_accuracy(env.coeffs_at(i, slot), l, m))
        .collect()
}

#[inline]
fn clamped_accuracy(coeffs: &AccuracyCoeffs, l: f64, m: u32) -> f64 {
    // Coefficients are validated to stay finite over each model's range.
    accuracy(coeffs, l, m).unwrap_or(0.0).clamp(0.0, 1.0)
}

/// Priority-weighted mean accuracy over models, given each model's `(l, m)`.
pub fn performance_of<I>(hyper: I, env: &Environment, slot: u64) -> f64
where
    I: IntoIterator<Item = (f64, u32)>,
{
    let weighted: f64 = hyper
        .into_iter()
        .enumerate()
        .map(|(i, (l, m))| env.models[i].alpha * clamped_accuracy(env.coeffs_at(i, slot), l, m))
        .sum();
    weighted / env.alpha_total()
}

pub fn system_performance(decision: &AllocationDecision, env: &Environment, slot: u64) -> f64 {
    debug_assert_eq!(decision.0.len(), env.num_models());
    performance_of(decision.0.iter().map(|s| (s.l, s.m)), env, slot)
}

pub fn loss(performance: f64) -> f64 {
    1.0 - performance
}
