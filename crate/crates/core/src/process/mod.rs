//! Process specifications and reproducible simulators.

pub mod innovation;
pub mod linear;
pub mod matrix_series;
pub mod var;

use serde::{Deserialize, Serialize};

pub use innovation::InnovationLaw;
pub use linear::{CoefficientRule, LinearProcessSpec, LinearSampler};
pub use matrix_series::{MatrixGenerator, MatrixSampler, MatrixSeriesSpec, RadialClip};
pub use var::{stationary_covariance, InnovationCov, Transition, VarSampler, VarSpec};

use crate::error::{ensure, Result};
use crate::linalg::Matrix;
use crate::rng::{self, purpose};

/// Any generating mechanism the toolkit can simulate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessSpec {
    Linear(LinearProcessSpec),
    Var(VarSpec),
    MatrixSeries(MatrixSeriesSpec),
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Linear(s) => s.validate(),
            ProcessSpec::Var(s) => s.validate(),
            ProcessSpec::MatrixSeries(s) => s.validate(),
        }
    }

    /// Width of one observation: 1 for scalar series, d for VAR, d·d for matrices.
    pub fn dimension(&self) -> usize {
        match self {
            ProcessSpec::Linear(_) => 1,
            ProcessSpec::Var(s) => s.dimension,
            ProcessSpec::MatrixSeries(s) => s.dimension(),
        }
    }
}

/// A simulated length-n fragment with everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFragment {
    /// n rows of d values.
    pub values: Vec<Vec<f64>>,
    pub spec: ProcessSpec,
    pub seed: u64,
    pub burn_in: usize,
    /// Σ_{j>L} f_j² dropped by truncation (linear processes only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discarded_tail: Option<f64>,
}

impl SeriesFragment {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Column `k` as a flat vector.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[k]).collect()
    }
}

/// Sequence of symmetric matrices plus regeneration metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFragment {
    /// n matrices, each a list of d rows.
    pub matrices: Vec<Vec<Vec<f64>>>,
    pub spec: MatrixSeriesSpec,
    pub seed: u64,
    pub burn_in: usize,
}

impl MatrixFragment {
    pub fn to_matrices(&self) -> Result<Vec<Matrix>> {
        self.matrices.iter().map(|m| Matrix::from_rows(m)).collect()
    }
}

fn check_len(n: usize) -> Result<()> {
    ensure(n >= 1, "n", || "must be at least 1".into())
}

pub fn simulate_linear(spec: &LinearProcessSpec, n: usize, seed: u64) -> Result<SeriesFragment> {
    check_len(n)?;
    linear::reject_divergent(&spec.coefficients)?;
    let sampler = spec.sampler()?;
    let mut r = rng::stream(seed, purpose::INNOVATIONS, 0);
    let values = sampler.path(n, &mut r).into_iter().map(|x| vec![x]).collect();
    Ok(SeriesFragment {
        values,
        spec: ProcessSpec::Linear(spec.clone()),
        seed,
        burn_in: 0,
        discarded_tail: Some(spec.discarded_tail()),
    })
}

pub fn simulate_var(spec: &VarSpec, n: usize, seed: u64) -> Result<SeriesFragment> {
    check_len(n)?;
    let sampler = spec.sampler()?;
    let mut r = rng::stream(seed, purpose::INNOVATIONS, 0);
    Ok(SeriesFragment {
        values: sampler.path(n, &mut r),
        spec: ProcessSpec::Var(spec.clone()),
        seed,
        burn_in: sampler.burn_in(),
        discarded_tail: None,
    })
}

pub fn simulate_matrix_series(spec: &MatrixSeriesSpec, n: usize, seed: u64) -> Result<MatrixFragment> {
    check_len(n)?;
    let sampler = spec.sampler()?;
    let mut r = rng::stream(seed, purpose::INNOVATIONS, 0);
    Ok(MatrixFragment {
        matrices: sampler.path(n, &mut r).iter().map(Matrix::to_rows).collect(),
        spec: spec.clone(),
        seed,
        burn_in: sampler.burn_in(),
    })
}

/// Simulates any process; matrix series are flattened row-major into d·d columns.
pub fn simulate(spec: &ProcessSpec, n: usize, seed: u64) -> Result<SeriesFragment> {
    match spec {
        ProcessSpec::Linear(s) => simulate_linear(s, n, seed),
        ProcessSpec::Var(s) => simulate_var(s, n, seed),
        ProcessSpec::MatrixSeries(s) => {
            let frag = simulate_matrix_series(s, n, seed)?;
            Ok(SeriesFragment {
                values: frag.matrices.iter().map(|m| m.concat()).collect(),
                spec: spec.clone(),
                seed,
                burn_in: frag.burn_in,
                discarded_tail: None,
            })
        }
    }
}
