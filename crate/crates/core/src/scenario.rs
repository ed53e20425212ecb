//! Reference setups: the two-model learning-rate/algorithm comparison and the
//! four-model service evaluation.

use crate::env::{AccuracyCoeffs, AllocationDecision, Environment, ModelAllocation, ModelSpec, ResourcePool};
use crate::space::{Grids, ModelGrid};

fn request(id: usize, coeffs: AccuracyCoeffs, c_max: f64, d_max: f64, l_min: f64, m_min: u32) -> ModelSpec {
    ModelSpec {
        id,
        coeffs,
        alpha: 1.0,
        c_max,
        d_max,
        l_min,
        l_max: 100.0,
        m_min,
        m_max: 10,
    }
}

/// DL models 1 and 2 with the base resource pool.
pub fn two_model_env() -> Environment {
    Environment::new(
        vec![
            request(1, AccuracyCoeffs::DL_MODEL_1, 0.46, 3.70, 25.0, 2),
            request(2, AccuracyCoeffs::DL_MODEL_2, 0.36, 4.50, 25.0, 2),
        ],
        ResourcePool::reference(),
    )
    .expect("reference two-model setup is valid")
}

pub fn two_model_grids() -> Grids {
    Grids::uniform(
        ModelGrid {
            l: vec![25.0, 50.0, 100.0],
            m: vec![2, 5, 10],
            psi: vec![1.5, 1.8, 2.2],
            lambda: vec![1.0, 2.0, 3.0],
        },
        2,
    )
}

/// Fixed allocation benchmark: `l = 50, m = 5, psi = 1.5, lambda = 2` for every model.
pub fn two_model_fixed_allocation() -> AllocationDecision {
    let slice = ModelAllocation { l: 50.0, m: 5, psi: 1.5, lambda: 2.0 };
    AllocationDecision(vec![slice; 2])
}

/// All four DL models with the larger pool and the adjusted requests.
pub fn four_model_env() -> Environment {
    let mut pool = ResourcePool::reference();
    pool.psi_max = 7.0;
    pool.lambda_max = 7.0;
    Environment::new(
        vec![
            request(1, AccuracyCoeffs::DL_MODEL_1, 0.46, 3.07, 20.0, 3),
            request(2, AccuracyCoeffs::DL_MODEL_2, 0.46, 3.07, 20.0, 3),
            request(3, AccuracyCoeffs::DL_MODEL_3, 0.38, 4.4, 20.0, 3),
            request(4, AccuracyCoeffs::DL_MODEL_4, 0.36, 5.3, 20.0, 3),
        ],
        pool,
    )
    .expect("reference four-model setup is valid")
}

pub fn four_model_grids() -> Grids {
    Grids::uniform(
        ModelGrid {
            l: vec![20.0, 55.0, 80.0, 100.0],
            m: vec![3, 5, 8, 10],
            psi: vec![1.5, 1.8, 2.2],
            lambda: vec![1.0, 2.0, 3.0],
        },
        4,
    )
}
