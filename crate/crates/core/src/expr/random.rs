use super::{Expr, OperatorSet, VarSet};
use alloc::vec::Vec;
use rand::Rng;

/// Interval constants are drawn from, uniformly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRange {
    pub lo: f64,
    pub hi: f64,
}

impl Default for ConstantRange {
    fn default() -> Self {
        ConstantRange { lo: -1.0, hi: 1.0 }
    }
}

impl ConstantRange {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.hi > self.lo {
            rng.random_range(self.lo..self.hi)
        } else {
            self.lo
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RandomExprError {
    #[error("feature set is empty")]
    NoFeatures,
    #[error("max_depth must be at least 1")]
    ZeroDepth,
}

/// Probability of stopping early with a leaf above the depth limit.
const EARLY_LEAF: f64 = 0.3;

/// Grows a random tree of depth at most `max_depth`.
///
/// Leaves are a feature or a constant with equal probability; internal nodes
/// pick uniformly among all operators in `operators`.
pub fn random_expr<R: Rng + ?Sized>(
    rng: &mut R,
    max_depth: usize,
    features: VarSet,
    operators: &OperatorSet,
    constants: ConstantRange,
) -> Result<Expr, RandomExprError> {
    if features.is_empty() {
        return Err(RandomExprError::NoFeatures);
    }
    if max_depth == 0 {
        return Err(RandomExprError::ZeroDepth);
    }
    let vars: Vec<_> = features.iter().collect();
    Ok(grow(rng, max_depth, &vars, operators, constants))
}

fn grow<R: Rng + ?Sized>(
    rng: &mut R,
    depth: usize,
    vars: &[super::Var],
    ops: &OperatorSet,
    constants: ConstantRange,
) -> Expr {
    let n_ops = ops.unary.len() + ops.binary.len();
    if depth <= 1 || n_ops == 0 || rng.random_bool(EARLY_LEAF) {
        return if rng.random_bool(0.5) {
            Expr::Var(vars[rng.random_range(0..vars.len())])
        } else {
            Expr::Const(constants.sample(rng))
        };
    }
    let k = rng.random_range(0..n_ops);
    if k < ops.unary.len() {
        Expr::unary(ops.unary[k], grow(rng, depth - 1, vars, ops, constants))
    } else {
        let op = ops.binary[k - ops.unary.len()];
        let l = grow(rng, depth - 1, vars, ops, constants);
        let r = grow(rng, depth - 1, vars, ops, constants);
        Expr::binary(op, l, r)
    }
}
