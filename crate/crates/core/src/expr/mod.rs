//! Expression trees for rate models.
//!
//! An [`Expr`] is an immutable tree over the four model variables, finite
//! constants, and a closed operator set. Evaluation is protected: domain
//! errors produce NaN rather than panicking, and NaN propagates through every
//! operator (including `max`/`min`, unlike `f64::max`).
//!
//! Signed constants are single leaves, so `-0.031*Dst` has complexity 3.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

mod parse;
mod random;

pub use parse::{parse, ParseError, ParseErrorKind};
pub use random::{random_expr, ConstantRange, RandomExprError};

/// Model input variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Dst index, nT.
    Dst,
    /// Convective electric field, mV/m.
    Ey,
    /// Solar-wind dynamic pressure, nPa.
    Pdyn,
    /// IMF magnetic pressure, nPa.
    PB,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::Dst, Var::Ey, Var::Pdyn, Var::PB];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Dst => "Dst",
            Var::Ey => "Ey",
            Var::Pdyn => "Pdyn",
            Var::PB => "PB",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of model variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct VarSet(u8);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);
    pub const ALL: VarSet = VarSet(0b1111);

    pub fn of(vars: &[Var]) -> VarSet {
        vars.iter().fold(VarSet::EMPTY, |s, &v| s.with(v))
    }

    pub fn with(self, v: Var) -> VarSet {
        VarSet(self.0 | 1 << v.index())
    }

    pub fn contains(self, v: Var) -> bool {
        self.0 & (1 << v.index()) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: VarSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Var> {
        Var::ALL.into_iter().filter(move |&v| self.contains(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnaryOp {
    Exp,
    Log,
    Sqrt,
    Square,
    Sign,
    Neg,
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 6] = [
        UnaryOp::Exp,
        UnaryOp::Log,
        UnaryOp::Sqrt,
        UnaryOp::Square,
        UnaryOp::Sign,
        UnaryOp::Neg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Square => "square",
            UnaryOp::Sign => "sign",
            UnaryOp::Neg => "neg",
        }
    }

    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            UnaryOp::Exp => libm::exp(x),
            UnaryOp::Log => {
                if x > 0.0 {
                    libm::log(x)
                } else {
                    f64::NAN
                }
            }
            UnaryOp::Sqrt => {
                if x >= 0.0 {
                    libm::sqrt(x)
                } else {
                    f64::NAN
                }
            }
            UnaryOp::Square => x * x,
            UnaryOp::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    // 0 -> 0, NaN -> NaN
                    x * 0.0
                }
            }
            UnaryOp::Neg => -x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Max,
    Min,
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 6] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Max,
        BinaryOp::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Max => "max",
            BinaryOp::Min => "min",
        }
    }

    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinaryOp::Add => a + b,
            BinaryOp::Sub => a - b,
            BinaryOp::Mul => a * b,
            BinaryOp::Div => {
                if b == 0.0 {
                    f64::NAN
                } else {
                    a / b
                }
            }
            BinaryOp::Max => {
                if a.is_nan() || b.is_nan() {
                    f64::NAN
                } else if a >= b {
                    a
                } else {
                    b
                }
            }
            BinaryOp::Min => {
                if a.is_nan() || b.is_nan() {
                    f64::NAN
                } else if a <= b {
                    a
                } else {
                    b
                }
            }
        }
    }
}

/// Operators available to random generation and mutation.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    pub unary: Vec<UnaryOp>,
    pub binary: Vec<BinaryOp>,
}

impl OperatorSet {
    pub fn contains_unary(&self, op: UnaryOp) -> bool {
        self.unary.contains(&op)
    }

    pub fn contains_binary(&self, op: BinaryOp) -> bool {
        self.binary.contains(&op)
    }

    pub fn is_empty(&self) -> bool {
        self.unary.is_empty() && self.binary.is_empty()
    }
}

impl Default for OperatorSet {
    /// `+ - * / max min exp log sqrt square sign`; `neg` is left out because
    /// signed constants already cover it.
    fn default() -> Self {
        OperatorSet {
            unary: vec![
                UnaryOp::Exp,
                UnaryOp::Log,
                UnaryOp::Sqrt,
                UnaryOp::Square,
                UnaryOp::Sign,
            ],
            binary: BinaryOp::ALL.to_vec(),
        }
    }
}

/// Per-node-kind complexity weights. All weights are positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityWeights {
    constant: u32,
    variable: u32,
    unary: [u32; 6],
    binary: [u32; 6],
}

impl Default for ComplexityWeights {
    fn default() -> Self {
        ComplexityWeights {
            constant: 1,
            variable: 1,
            unary: [1; 6],
            binary: [1; 6],
        }
    }
}

impl ComplexityWeights {
    pub fn with_constant(mut self, w: u32) -> Self {
        assert!(w > 0, "complexity weights must be positive");
        self.constant = w;
        self
    }

    pub fn with_variable(mut self, w: u32) -> Self {
        assert!(w > 0, "complexity weights must be positive");
        self.variable = w;
        self
    }

    pub fn with_unary(mut self, op: UnaryOp, w: u32) -> Self {
        assert!(w > 0, "complexity weights must be positive");
        self.unary[op as usize] = w;
        self
    }

    pub fn with_binary(mut self, op: BinaryOp, w: u32) -> Self {
        assert!(w > 0, "complexity weights must be positive");
        self.binary[op as usize] = w;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("variable {0} is not bound")]
    Unbound(Var),
    #[error("table has no column for variable {0}")]
    MissingColumn(Var),
}

/// Values for the model variables at a single point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    values: [Option<f64>; 4],
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    /// All four variables bound.
    pub fn full(dst: f64, ey: f64, pdyn: f64, pb: f64) -> Self {
        Bindings {
            values: [Some(dst), Some(ey), Some(pdyn), Some(pb)],
        }
    }

    pub fn with(mut self, var: Var, value: f64) -> Self {
        self.values[var.index()] = Some(value);
        self
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        self.values[var.index()]
    }
}

/// Columnar variable table for batch evaluation. Columns may be absent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    len: usize,
    columns: [Option<Vec<f64>>; 4],
}

impl FeatureTable {
    pub fn new(len: usize) -> Self {
        FeatureTable {
            len,
            columns: Default::default(),
        }
    }

    /// Adds or replaces a column. Panics if its length differs from the table's.
    pub fn with_column(mut self, var: Var, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.len, "column length mismatch");
        self.columns[var.index()] = Some(values);
        self
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn column(&self, var: Var) -> Option<&[f64]> {
        self.columns[var.index()].as_deref()
    }

    pub fn row(&self, i: usize) -> Bindings {
        let mut b = Bindings::new();
        for v in Var::ALL {
            if let Some(c) = self.column(v) {
                b = b.with(v, c[i]);
            }
        }
        b
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn unary(op: UnaryOp, child: Expr) -> Expr {
        Expr::Unary(op, Box::new(child))
    }

    pub fn binary(op: BinaryOp, left: Expr, right: Expr) -> Expr {
        Expr::Binary(op, Box::new(left), Box::new(right))
    }

    /// Evaluates at a point. Fails only for unbound variables; domain errors
    /// yield NaN.
    pub fn evaluate(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        let mut point = [0.0; 4];
        for v in self.variables().iter() {
            point[v.index()] = bindings.get(v).ok_or(EvalError::Unbound(v))?;
        }
        Ok(self.eval_point(&point))
    }

    /// Evaluates with variables indexed by [`Var::index`].
    pub fn eval_point(&self, point: &[f64; 4]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => point[v.index()],
            Expr::Unary(op, a) => op.apply(a.eval_point(point)),
            Expr::Binary(op, a, b) => op.apply(a.eval_point(point), b.eval_point(point)),
        }
    }

    /// Evaluates every row of `table`, preserving order.
    pub fn evaluate_batch(&self, table: &FeatureTable) -> Result<Vec<f64>, EvalError> {
        for v in self.variables().iter() {
            if table.column(v).is_none() {
                return Err(EvalError::MissingColumn(v));
            }
        }
        Ok(self.eval_columns(table))
    }

    fn eval_columns(&self, table: &FeatureTable) -> Vec<f64> {
        match self {
            Expr::Const(c) => vec![*c; table.len()],
            Expr::Var(v) => table.column(*v).map(<[f64]>::to_vec).unwrap_or_default(),
            Expr::Unary(op, a) => {
                let mut out = a.eval_columns(table);
                for x in &mut out {
                    *x = op.apply(*x);
                }
                out
            }
            Expr::Binary(op, a, b) => {
                let mut out = a.eval_columns(table);
                match &**b {
                    Expr::Const(c) => out.iter_mut().for_each(|x| *x = op.apply(*x, *c)),
                    Expr::Var(v) => {
                        let col = table.column(*v).unwrap_or(&[]);
                        out.iter_mut().zip(col).for_each(|(x, y)| *x = op.apply(*x, *y));
                    }
                    _ => {
                        let rhs = b.eval_columns(table);
                        out.iter_mut().zip(&rhs).for_each(|(x, y)| *x = op.apply(*x, *y));
                    }
                }
                out
            }
        }
    }

    /// Unit-weight complexity (node count).
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn complexity(&self, weights: &ComplexityWeights) -> u32 {
        match self {
            Expr::Const(_) => weights.constant,
            Expr::Var(_) => weights.variable,
            Expr::Unary(op, a) => weights.unary[*op as usize] + a.complexity(weights),
            Expr::Binary(op, a, b) => {
                weights.binary[*op as usize] + a.complexity(weights) + b.complexity(weights)
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn variables(&self) -> VarSet {
        match self {
            Expr::Const(_) => VarSet::EMPTY,
            Expr::Var(v) => VarSet::EMPTY.with(*v),
            Expr::Unary(_, a) => a.variables(),
            Expr::Binary(_, a, b) => VarSet(a.variables().0 | b.variables().0),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Const(_) | Expr::Var(_))
    }

    /// Node at preorder index `i`.
    pub fn node(&self, i: usize) -> Option<&Expr> {
        if i == 0 {
            return Some(self);
        }
        match self {
            Expr::Const(_) | Expr::Var(_) => None,
            Expr::Unary(_, a) => a.node(i - 1),
            Expr::Binary(_, a, b) => {
                let ls = a.size();
                if i <= ls {
                    a.node(i - 1)
                } else {
                    b.node(i - 1 - ls)
                }
            }
        }
    }

    /// Copy of `self` with the subtree at preorder index `i` replaced.
    /// Out-of-range indices return an unchanged copy.
    pub fn replace_node(&self, i: usize, replacement: Expr) -> Expr {
        let mut out = self.clone();
        if let Some(slot) = out.node_mut(i) {
            *slot = replacement;
        }
        out
    }

    fn node_mut(&mut self, i: usize) -> Option<&mut Expr> {
        if i == 0 {
            return Some(self);
        }
        match self {
            Expr::Const(_) | Expr::Var(_) => None,
            Expr::Unary(_, a) => a.node_mut(i - 1),
            Expr::Binary(_, a, b) => {
                let ls = a.size();
                if i <= ls {
                    a.node_mut(i - 1)
                } else {
                    b.node_mut(i - 1 - ls)
                }
            }
        }
    }

    /// Constants in preorder.
    pub fn constants(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants(&self, out: &mut Vec<f64>) {
        match self {
            Expr::Const(c) => out.push(*c),
            Expr::Var(_) => {}
            Expr::Unary(_, a) => a.collect_constants(out),
            Expr::Binary(_, a, b) => {
                a.collect_constants(out);
                b.collect_constants(out);
            }
        }
    }

    /// Copy with constants replaced, in preorder, by `values`.
    pub fn with_constants(&self, values: &[f64]) -> Expr {
        let mut it = values.iter().copied();
        self.map_constants(&mut |c| it.next().unwrap_or(c))
    }

    pub fn map_constants(&self, f: &mut impl FnMut(f64) -> f64) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(f(*c)),
            Expr::Var(v) => Expr::Var(*v),
            Expr::Unary(op, a) => Expr::unary(*op, a.map_constants(f)),
            Expr::Binary(op, a, b) => {
                let l = a.map_constants(f);
                let r = b.map_constants(f);
                Expr::binary(*op, l, r)
            }
        }
    }

    /// Replaces every all-constant subtree with its value when that value is
    /// finite.
    pub fn fold_constants(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, a) => {
                let a = a.fold_constants();
                if let Expr::Const(x) = a {
                    let v = op.apply(x);
                    if v.is_finite() {
                        return Expr::Const(v);
                    }
                }
                Expr::unary(*op, a)
            }
            Expr::Binary(op, a, b) => {
                let a = a.fold_constants();
                let b = b.fold_constants();
                if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
                    let v = op.apply(*x, *y);
                    if v.is_finite() {
                        return Expr::Const(v);
                    }
                }
                Expr::binary(*op, a, b)
            }
        }
    }

    /// Text form used for deduplication: constants folded, then rounded to
    /// six significant digits.
    pub fn canonical_key(&self) -> String {
        self.fold_constants()
            .map_constants(&mut |c| round_significant(c, 6))
            .to_string()
    }

    /// Text form with constants rounded to `digits` significant digits.
    /// Not guaranteed to re-parse to the same tree.
    pub fn to_string_rounded(&self, digits: usize) -> String {
        self.map_constants(&mut |c| round_significant(c, digits))
            .to_string()
    }

    pub fn all_constants_finite(&self) -> bool {
        self.constants().iter().all(|c| c.is_finite())
    }
}

/// Rounds to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 || digits == 0 {
        return x;
    }
    alloc::format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_ATOM: u8 = 4;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) | Expr::Var(_) => PREC_ATOM,
        Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Expr::Unary(..) => PREC_ATOM,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_ADD,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => PREC_MUL,
        Expr::Binary(BinaryOp::Max | BinaryOp::Min, ..) => PREC_ATOM,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    /// Canonical infix form; `parse(&e.to_string())` rebuilds `e` exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Unary(UnaryOp::Neg, a) => {
                // a bare literal after '-' would re-parse as a signed constant
                let parens = matches!(**a, Expr::Const(_)) || precedence(a) < PREC_ATOM;
                f.write_str("-")?;
                write_wrapped(f, a, parens)
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op @ (BinaryOp::Max | BinaryOp::Min), a, b) => {
                write!(f, "{}({a}, {b})", op.name())
            }
            Expr::Binary(op, a, b) => {
                let p = precedence(self);
                write_wrapped(f, a, precedence(a) < p)?;
                match op {
                    BinaryOp::Add => f.write_str(" + ")?,
                    BinaryOp::Sub => f.write_str(" - ")?,
                    BinaryOp::Mul => f.write_str("*")?,
                    BinaryOp::Div => f.write_str("/")?,
                    BinaryOp::Max | BinaryOp::Min => unreachable!(),
                }
                write_wrapped(f, b, precedence(b) <= p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn ddm1_offset_at_origin() {
        let e = p("(-0.036*(Pdyn + Dst) - max(-0.008*Dst, Ey))*sqrt(Pdyn + 1.278) + 0.319");
        let v = e.evaluate(&Bindings::full(0.0, 0.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(v, 0.319, max_relative = 1e-12);
    }

    #[test]
    fn linear_decay_value() {
        let v = p("-0.031*Dst")
            .evaluate(&Bindings::new().with(Var::Dst, -100.0))
            .unwrap();
        assert_relative_eq!(v, 3.1, max_relative = 1e-12);
    }

    #[test]
    fn protected_domains_give_nan() {
        let b = Bindings::full(-1.0, 0.0, -1.0, 0.0);
        assert!(p("sqrt(Pdyn)").evaluate(&b).unwrap().is_nan());
        assert!(p("log(Ey)").evaluate(&b).unwrap().is_nan());
        assert!(p("log(Dst)").evaluate(&b).unwrap().is_nan());
        assert!(p("Dst/Ey").evaluate(&b).unwrap().is_nan());
        assert!(p("0/Ey").evaluate(&b).unwrap().is_nan());
        assert_eq!(p("sign(Ey)").evaluate(&b).unwrap(), 0.0);
        assert_eq!(p("sign(Dst)").evaluate(&b).unwrap(), -1.0);
        assert_eq!(p("square(Dst)").evaluate(&b).unwrap(), 1.0);
    }

    #[test]
    fn nan_propagates_through_max_and_min() {
        let b = Bindings::full(1.0, 2.0, -1.0, 0.0);
        assert!(p("max(sqrt(Pdyn), Ey)").evaluate(&b).unwrap().is_nan());
        assert!(p("min(Ey, sqrt(Pdyn))").evaluate(&b).unwrap().is_nan());
        assert!(p("sign(sqrt(Pdyn))").evaluate(&b).unwrap().is_nan());
    }

    #[test]
    fn unbound_is_an_error_not_nan() {
        let err = p("Dst + Ey").evaluate(&Bindings::new().with(Var::Dst, 1.0));
        assert_eq!(err, Err(EvalError::Unbound(Var::Ey)));
    }

    #[test]
    fn batch_matches_pointwise() {
        let t = FeatureTable::new(3).with_column(Var::Ey, vec![0.5, -1.0, 2.0]);
        assert_eq!(p("2.0").evaluate_batch(&t).unwrap(), vec![2.0; 3]);
        assert_eq!(p("Ey").evaluate_batch(&t).unwrap(), vec![0.5, -1.0, 2.0]);
        assert_eq!(
            p("Dst").evaluate_batch(&t),
            Err(EvalError::MissingColumn(Var::Dst))
        );
    }

    #[test]
    fn ddm4_batch_single_row() {
        let e = p("min(-0.0443*Dst, (0.621 + sqrt(Pdyn))*(-0.0443*Dst - Ey)) + 0.194");
        let t = FeatureTable::new(1)
            .with_column(Var::Dst, vec![-50.0])
            .with_column(Var::Ey, vec![0.0])
            .with_column(Var::Pdyn, vec![0.0]);
        // min(2.215, 0.621*2.215) + 0.194
        let v = e.evaluate_batch(&t).unwrap();
        assert_relative_eq!(v[0], 0.621 * 2.215 + 0.194, max_relative = 1e-12);
        assert_relative_eq!(v[0], 1.569515, max_relative = 1e-12);
    }

    #[test]
    fn complexity_counts_nodes() {
        let w = ComplexityWeights::default();
        assert_eq!(p("-0.031*Dst").complexity(&w), 3);
        assert_eq!(p("-0.05*Dst - max(Ey, -0.16)").complexity(&w), 7);
        assert_eq!(p("Dst").complexity(&w), 1);
        assert_eq!(p("-Ey").complexity(&w), 2);
    }

    #[test]
    fn weighted_complexity() {
        let w = ComplexityWeights::default()
            .with_unary(UnaryOp::Exp, 3)
            .with_constant(2);
        assert_eq!(p("exp(Dst) + 1").complexity(&w), 1 + 3 + 1 + 2);
    }

    #[test]
    fn printing() {
        assert_eq!(Expr::Const(0.319).to_string(), "0.319");
        let e = Expr::binary(BinaryOp::Max, Expr::Var(Var::Ey), Expr::Const(-0.16));
        assert_eq!(e.to_string(), "max(Ey, -0.16)");
        assert_eq!(p("Dst - (Ey - PB)").to_string(), "Dst - (Ey - PB)");
        assert_eq!(p("(Dst - Ey) - PB").to_string(), "Dst - Ey - PB");
        assert_eq!(p("-(2)").to_string(), "-(2)");
        assert_eq!(p("-Dst*Ey").to_string(), "-Dst*Ey");
    }

    #[test]
    fn print_round_trips_catalog_forms() {
        for s in [
            "(-0.036*(Pdyn + Dst) - max(-0.008*Dst, Ey))*sqrt(Pdyn + 1.278) + 0.319",
            "min(sqrt(Pdyn + 1.058)*(-0.0434*Dst - Ey), -0.0434*Dst) + 0.136*(2.537 - 0.735*Pdyn)",
            "Dst/(Ey/PB)",
            "-(-Dst)",
            "Dst*-0.5 - -2",
        ] {
            let e = p(s);
            assert_eq!(p(&e.to_string()), e, "{s}");
        }
    }

    #[test]
    fn folding() {
        assert_eq!(p("2.0 + 3.0").fold_constants(), Expr::Const(5.0));
        let e = p("sqrt(-1.0) + Dst");
        assert_eq!(e.fold_constants(), e);
        assert_eq!(p("Dst * (1.0 + 1.0)").fold_constants(), p("Dst * 2.0"));
        assert_eq!(p("-(2)").fold_constants(), Expr::Const(-2.0));
    }

    #[test]
    fn canonical_key_rounds() {
        assert_eq!(
            p("0.1234567*Dst").canonical_key(),
            p("0.12345671*Dst").canonical_key()
        );
        assert_eq!(p("(1 + 1)*Dst").canonical_key(), "2*Dst");
        assert_ne!(p("Dst + Ey").canonical_key(), p("Ey + Dst").canonical_key());
    }

    #[test]
    fn node_indexing() {
        let e = p("max(Ey, Dst*2)");
        assert_eq!(e.size(), 5);
        assert_eq!(e.node(1), Some(&Expr::Var(Var::Ey)));
        assert_eq!(e.node(3), Some(&Expr::Var(Var::Dst)));
        assert_eq!(e.node(5), None);
        let r = e.replace_node(2, Expr::Var(Var::PB));
        assert_eq!(r, p("max(Ey, PB)"));
        assert_eq!(e.with_constants(&[3.0]), p("max(Ey, Dst*3)"));
    }

    #[test]
    fn round_significant_digits() {
        assert_eq!(round_significant(0.1234567, 6), 0.123457);
        assert_eq!(round_significant(-1234567.0, 6), -1234570.0);
        assert_eq!(round_significant(0.0, 6), 0.0);
    }
}
