//! Fixed dDst/dt models: the complexity hierarchy, the five data-driven
//! models, and the Burton-McPherron-Russell and O'Brien-McPherron baselines.

use crate::expr::{parse, ComplexityWeights, Expr, VarSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Piecewise empirical baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// Burton-McPherron-Russell: fixed decay rate 0.13 /hr.
    Bmr,
    /// O'Brien-McPherron: decay time 7.7 h below the Ey threshold, 3.5 h above.
    Obm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Expression(Expr),
    Builtin(Builtin),
}

/// A named rate model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub name: String,
    pub kind: ModelKind,
    /// Complexity as published, when there is one.
    pub reported_complexity: Option<u32>,
    pub features: VarSet,
}

/// Ey injection threshold, mV/m.
const EY_THRESHOLD: f64 = 0.5;
/// Injection coefficient, nT/hr per mV/m.
const INJECTION_GAIN: f64 = -5.4;
const PRESSURE_GAIN: f64 = 0.2;
const QUIET_OFFSET: f64 = 20.0;
const BMR_DECAY: f64 = 0.13;
const OBM_TAU_QUIET: f64 = 7.7;
const OBM_TAU_DRIVEN: f64 = 3.5;

/// Injection term `-5.4 (Ey - 0.5)` above threshold, 0 below.
pub fn injection(ey: f64) -> f64 {
    if ey >= EY_THRESHOLD {
        INJECTION_GAIN * (ey - EY_THRESHOLD)
    } else {
        0.0
    }
}

/// OBM decay time, hours.
pub fn obm_tau(ey: f64) -> f64 {
    if ey < EY_THRESHOLD {
        OBM_TAU_QUIET
    } else {
        OBM_TAU_DRIVEN
    }
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Bmr => "BMR",
            Builtin::Obm => "OBM",
        }
    }

    /// Published form, for display only.
    pub fn formula(self) -> &'static str {
        match self {
            Builtin::Bmr => "-0.13*(Dst - 0.2*sqrt(Pdyn) + 20.0) + Q(Ey)",
            Builtin::Obm => "-(1/tau(Ey))*(Dst - 0.2*sqrt(Pdyn) + 20.0) + Q(Ey)",
        }
    }

    pub fn rate(self, dst: f64, ey: f64, pdyn: f64) -> f64 {
        let corrected = dst - PRESSURE_GAIN * libm::sqrt(pdyn) + QUIET_OFFSET;
        let decay = match self {
            Builtin::Bmr => BMR_DECAY,
            Builtin::Obm => 1.0 / obm_tau(ey),
        };
        -decay * corrected + injection(ey)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("model {name}: {source}")]
pub struct ModelError {
    pub name: String,
    pub source: crate::expr::ParseError,
}

impl ModelSpec {
    /// Expression model parsed from `text`.
    pub fn from_text(
        name: impl Into<String>,
        text: &str,
        reported_complexity: Option<u32>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let expr = parse(text).map_err(|source| ModelError {
            name: name.clone(),
            source,
        })?;
        Ok(Self::from_expr(name, expr, reported_complexity))
    }

    pub fn from_expr(name: impl Into<String>, expr: Expr, reported_complexity: Option<u32>) -> Self {
        ModelSpec {
            name: name.into(),
            features: expr.variables(),
            kind: ModelKind::Expression(expr),
            reported_complexity,
        }
    }

    pub fn builtin(which: Builtin) -> Self {
        use crate::expr::Var;
        ModelSpec {
            name: which.name().into(),
            kind: ModelKind::Builtin(which),
            reported_complexity: None,
            features: VarSet::of(&[Var::Dst, Var::Ey, Var::Pdyn]),
        }
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.kind {
            ModelKind::Expression(e) => Some(e),
            ModelKind::Builtin(_) => None,
        }
    }

    /// Unit-weight complexity of expression models.
    pub fn computed_complexity(&self) -> Option<u32> {
        self.expr().map(|e| e.complexity(&ComplexityWeights::default()))
    }

    /// Expression text, or the published piecewise form for built-ins.
    pub fn text(&self) -> String {
        match &self.kind {
            ModelKind::Expression(e) => e.to_string(),
            ModelKind::Builtin(b) => b.formula().into(),
        }
    }

    /// dDst/dt in nT/hr. NaN results are returned as-is.
    pub fn rate(&self, dst: f64, ey: f64, pdyn: f64, pb: f64) -> f64 {
        match &self.kind {
            ModelKind::Expression(e) => e.eval_point(&[dst, ey, pdyn, pb]),
            ModelKind::Builtin(b) => b.rate(dst, ey, pdyn),
        }
    }
}

/// `(name, expression text, reported complexity)` for the catalog's
/// expression models, in catalog order.
pub const CATALOG_EXPRESSIONS: [(&str, &str, u32); 12] = [
    ("C3", "-0.031*Dst", 3),
    ("C5", "-0.041*Dst - Ey", 5),
    ("C7", "-0.05*Dst - max(Ey, -0.16)", 7),
    ("C9", "-0.062*Dst - max(-0.062, Ey/0.638)", 9),
    ("C10", "-0.057*Dst - max(sqrt(Pdyn)*Ey, -0.098)", 10),
    ("C12", "min((-0.05*Dst - Ey)*sqrt(Pdyn), -0.055*Dst)", 12),
    (
        "C19",
        "(-0.036*(Pdyn + Dst) - max(-0.008*Dst, Ey))*sqrt(Pdyn + 1.278) + 0.319",
        19,
    ),
    (
        "DDM#1",
        "(-0.036*(Pdyn + Dst) - max(-0.008*Dst, Ey))*sqrt(Pdyn + 1.278) + 0.319",
        19,
    ),
    (
        "DDM#2",
        "(-0.042*(Pdyn + Dst) - max(0.168, Ey))*sqrt(Pdyn + max(0.097, min(Ey, 3.385))) + 0.381",
        20,
    ),
    (
        "DDM#3",
        "min(-0.0443*Dst, (0.621 + sqrt(Pdyn))*(-0.0443*Dst - max(Ey, -0.728))) + 0.194",
        18,
    ),
    (
        "DDM#4",
        "min(-0.0443*Dst, (0.621 + sqrt(Pdyn))*(-0.0443*Dst - Ey)) + 0.194",
        16,
    ),
    (
        "DDM#5",
        "min(sqrt(Pdyn + 1.058)*(-0.0434*Dst - Ey), -0.0434*Dst) + 0.136*(2.537 - 0.735*Pdyn)",
        22,
    ),
];

/// Names of the five data-driven models.
pub const DDM_NAMES: [&str; 5] = ["DDM#1", "DDM#2", "DDM#3", "DDM#4", "DDM#5"];

/// The 14 fixed models: hierarchy C3..C19, DDM#1..5, BMR, OBM.
pub fn catalog() -> Vec<ModelSpec> {
    let mut out: Vec<ModelSpec> = CATALOG_EXPRESSIONS
        .iter()
        .map(|&(name, text, c)| {
            ModelSpec::from_text(name, text, Some(c)).expect("catalog expressions parse")
        })
        .collect();
    out.push(ModelSpec::builtin(Builtin::Bmr));
    out.push(ModelSpec::builtin(Builtin::Obm));
    out
}

/// Looks up a catalog model by name (case-insensitive).
pub fn catalog_model(name: &str) -> Option<ModelSpec> {
    catalog()
        .into_iter()
        .find(|m| m.name.eq_ignore_ascii_case(name))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StormClass {
    None,
    Moderate,
    Intense,
    Extreme,
}

impl fmt::Display for StormClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StormClass::None => "none",
            StormClass::Moderate => "moderate",
            StormClass::Intense => "intense",
            StormClass::Extreme => "extreme",
        })
    }
}

/// Storm class from the minimum Dst (nT). Boundary values go to the more
/// severe class.
pub fn classify_storm(min_dst: f64) -> StormClass {
    if min_dst <= -250.0 {
        StormClass::Extreme
    } else if min_dst <= -100.0 {
        StormClass::Intense
    } else if min_dst <= -50.0 {
        StormClass::Moderate
    } else {
        StormClass::None
    }
}
