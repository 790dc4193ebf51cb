use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Right-hand side bounds a probability; clamped at one.
    Probability,
    /// Right-hand side bounds a moment or norm; never clamped.
    Moment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantsSource {
    Explicit,
    UserSupplied,
}

/// An evaluated inequality right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub bound_id: String,
    pub kind: BoundKind,
    pub raw_value: f64,
    /// min(raw, 1) for probability bounds, raw for moment bounds.
    pub clamped: f64,
    pub vacuous: bool,
    pub constants_source: ConstantsSource,
    pub inputs_echo: BTreeMap<String, Value>,
    /// Derived quantities (optimizing t, thresholds, internal constants).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

impl BoundResult {
    pub fn probability(bound_id: &str, raw: f64, source: ConstantsSource) -> Self {
        let raw = raw.max(0.0);
        Self {
            bound_id: bound_id.into(),
            kind: BoundKind::Probability,
            raw_value: raw,
            clamped: raw.min(1.0),
            vacuous: raw >= 1.0,
            constants_source: source,
            inputs_echo: BTreeMap::new(),
            extras: BTreeMap::new(),
        }
    }

    pub fn moment(bound_id: &str, raw: f64, source: ConstantsSource) -> Self {
        Self {
            bound_id: bound_id.into(),
            kind: BoundKind::Moment,
            raw_value: raw,
            clamped: raw,
            vacuous: false,
            constants_source: source,
            inputs_echo: BTreeMap::new(),
            extras: BTreeMap::new(),
        }
    }

    pub fn echo(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.inputs_echo.insert(name.into(), value.into());
        self
    }

    pub fn echo_constants(mut self, consts: &ConstantPack) -> Self {
        for (k, v) in &consts.values {
            self.inputs_echo.insert(format!("const_{k}"), (*v).into());
        }
        self
    }

    pub fn extra(mut self, name: &str, value: f64) -> Self {
        self.extras.insert(name.into(), value);
        self
    }
}

/// Constants an inequality asserts exist without quantifying; each defaults to one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConstantPack {
    pub values: BTreeMap<String, f64>,
}

impl ConstantPack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.values.insert(name.into(), value);
        self
    }

    /// Fills defaults for `names`, rejecting unknown or nonpositive entries.
    pub fn resolve(&self, names: &[&str]) -> Result<ConstantPack> {
        for (k, v) in &self.values {
            ensure(names.contains(&k.as_str()), "constants", || {
                format!("unknown constant `{k}`; expected one of {names:?}")
            })?;
            ensure(*v > 0.0 && v.is_finite(), "constants", || format!("`{k}` must be positive, got {v}"))?;
        }
        let values = names.iter().map(|n| (n.to_string(), self.values.get(*n).copied().unwrap_or(1.0))).collect();
        Ok(ConstantPack { values })
    }

    pub fn get(&self, name: &str) -> f64 {
        self.values.get(name).copied().unwrap_or(1.0)
    }
}

pub(crate) fn positive(name: &str, v: f64) -> Result<()> {
    ensure(v > 0.0 && v.is_finite(), name, || format!("must be positive, got {v}"))
}

pub(crate) fn nonnegative(name: &str, v: f64) -> Result<()> {
    ensure(v >= 0.0 && v.is_finite(), name, || format!("must be nonnegative, got {v}"))
}

pub(crate) fn require_p_above_two(p: f64) -> Result<()> {
    ensure(p > 2.0 && p.is_finite(), "p", || format!("must exceed 2, got {p}"))
}

pub(crate) fn reject_boundary(alpha: f64, p: f64) -> Result<()> {
    let boundary = 0.5 - 1.0 / p;
    if alpha == boundary {
        return Err(Error::invalid(
            "alpha",
            format!("alpha = 1/2 − 1/p = {boundary} is the boundary between regimes, where the inequality is not stated"),
        ));
    }
    Ok(())
}
