//! Evolutionary symbolic regression for dDst/dt.
//!
//! Each population evolves independently under tournament selection with
//! single elitism. Fitness is the mean absolute error on the training rows
//! plus `parsimony * complexity`; any NaN prediction makes the loss
//! infinite. Constants are tuned with restarted Nelder-Mead: on the best
//! member and one random member every generation, on a random share of
//! offspring, and on the final hall of fame.
//!
//! Every population and run owns an RNG stream derived from the master seed,
//! so results are identical whether populations and runs execute serially or
//! on the rayon pool.

use crate::dataset::DerivedRecord;
use crate::expr::{
    random_expr, ComplexityWeights, ConstantRange, Expr, FeatureTable, OperatorSet, UnaryOp, Var,
    VarSet,
};
use crate::rng::{self, Rng};
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use rand::Rng as _;

/// Candidates above this complexity are dropped by [`consolidate`].
pub const MAX_CONSOLIDATED_COMPLEXITY: u32 = 30;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("training set is empty")]
    EmptyTraining,
    #[error("invalid search configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("target and feature lengths differ ({target} vs {features})")]
    LengthMismatch { target: usize, features: usize },
}

/// Relative frequencies of the mutation kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationWeights {
    /// Swap an operator for another of the same arity.
    pub operator: f64,
    /// Replace a subtree with a fresh random one.
    pub subtree: f64,
    /// Remove an internal node, promoting one child.
    pub delete: f64,
    /// Scale one constant.
    pub constant: f64,
    /// Wrap a subtree in a new unary or binary node.
    pub insert: f64,
}

impl Default for MutationWeights {
    fn default() -> Self {
        MutationWeights {
            operator: 0.2,
            subtree: 0.15,
            delete: 0.15,
            constant: 0.35,
            insert: 0.15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MutationKind {
    Operator,
    Subtree,
    Delete,
    Constant,
    Insert,
}

impl MutationWeights {
    fn total(&self) -> f64 {
        self.operator + self.subtree + self.delete + self.constant + self.insert
    }

    fn pick(&self, rng: &mut Rng) -> MutationKind {
        let mut x = rng.random_range(0.0..self.total());
        for (w, k) in [
            (self.operator, MutationKind::Operator),
            (self.subtree, MutationKind::Subtree),
            (self.delete, MutationKind::Delete),
            (self.constant, MutationKind::Constant),
        ] {
            if x < w {
                return k;
            }
            x -= w;
        }
        MutationKind::Insert
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Independent populations per run.
    pub population_count: usize,
    pub population_size: usize,
    /// Generations per population.
    pub iterations: usize,
    /// Weight of the complexity penalty.
    pub parsimony: f64,
    pub max_complexity: u32,
    /// Depth limit for initial trees and inserted subtrees.
    pub max_depth: usize,
    pub operators: OperatorSet,
    pub features: VarSet,
    pub constant_range: ConstantRange,
    pub tournament_size: usize,
    pub mutation_weights: MutationWeights,
    /// Probability an offspring comes from crossover rather than mutation.
    pub crossover_probability: f64,
    /// Nelder-Mead restarts when tuning constants. Each generation tunes
    /// the best member and one random non-elite member; the final hall of
    /// fame is tuned as well.
    pub constant_rounds: usize,
    /// Probability an offspring gets a single Nelder-Mead pass.
    pub constant_probability: f64,
    pub seed: u64,
    /// Run populations (and ensemble runs) on the rayon pool when the `std`
    /// feature is enabled. Results do not depend on this flag.
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            population_count: 4,
            population_size: 50,
            iterations: 100,
            parsimony: 0.0,
            max_complexity: MAX_CONSOLIDATED_COMPLEXITY,
            max_depth: 4,
            operators: OperatorSet::default(),
            features: VarSet::ALL,
            constant_range: ConstantRange::default(),
            tournament_size: 5,
            mutation_weights: MutationWeights::default(),
            crossover_probability: 0.1,
            constant_rounds: 8,
            constant_probability: 0.1,
            seed: 0,
            parallel: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m| Err(SearchError::InvalidConfig(m));
        if self.population_size < 2 {
            return bad("population_size must be at least 2");
        }
        if self.population_count == 0 {
            return bad("population_count must be at least 1");
        }
        if self.max_complexity == 0 {
            return bad("max_complexity must be at least 1");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be at least 1");
        }
        if self.tournament_size == 0 {
            return bad("tournament_size must be at least 1");
        }
        if self.features.is_empty() {
            return bad("feature set is empty");
        }
        if !(self.parsimony >= 0.0 && self.parsimony.is_finite()) {
            return bad("parsimony must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.crossover_probability) {
            return bad("crossover_probability must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.constant_probability) {
            return bad("constant_probability must be in [0, 1]");
        }
        let w = self.mutation_weights;
        if [w.operator, w.subtree, w.delete, w.constant, w.insert]
            .iter()
            .any(|x| !(*x >= 0.0 && x.is_finite()))
            || w.total() <= 0.0
        {
            return bad("mutation weights must be non-negative with a positive sum");
        }
        if !(self.constant_range.lo.is_finite() && self.constant_range.hi.is_finite()) {
            return bad("constant range must be finite");
        }
        Ok(())
    }
}

/// Features and dDst/dt target, restricted to fully finite rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    table: FeatureTable,
    target: Vec<f64>,
}

impl TrainingSet {
    /// Rows where any feature or the target is non-finite are dropped.
    pub fn from_records(rows: &[DerivedRecord]) -> Self {
        let kept: Vec<DerivedRecord> = rows
            .iter()
            .filter(|r| r.drivers_finite() && r.ddst_dt.is_finite())
            .copied()
            .collect();
        TrainingSet {
            table: crate::dataset::feature_table(&kept),
            target: kept.iter().map(|r| r.ddst_dt).collect(),
        }
    }

    pub fn new(table: FeatureTable, target: Vec<f64>) -> Result<Self, SearchError> {
        if table.len() != target.len() {
            return Err(SearchError::LengthMismatch {
                target: target.len(),
                features: table.len(),
            });
        }
        Ok(TrainingSet { table, target })
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn table(&self) -> &FeatureTable {
        &self.table
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// Mean absolute error; `+inf` if any prediction is NaN or the
    /// expression needs a column the table lacks.
    fn l1(&self, expr: &Expr) -> f64 {
        let Ok(pred) = expr.evaluate_batch(&self.table) else {
            return f64::INFINITY;
        };
        let mut sum = 0.0;
        for (p, t) in pred.iter().zip(&self.target) {
            if p.is_nan() {
                return f64::INFINITY;
            }
            sum += (p - t).abs();
        }
        let loss = sum / self.target.len() as f64;
        if loss.is_nan() {
            f64::INFINITY
        } else {
            loss
        }
    }
}

/// Mean absolute error of `expr` against the training target.
pub fn loss_l1(expr: &Expr, train: &TrainingSet) -> Result<f64, SearchError> {
    if train.is_empty() {
        return Err(SearchError::EmptyTraining);
    }
    Ok(train.l1(expr))
}

/// `loss + parsimony * complexity`.
pub fn fitness(loss: f64, complexity: u32, parsimony: f64) -> f64 {
    if loss == f64::INFINITY {
        return f64::INFINITY;
    }
    loss + parsimony * complexity as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub expr: Expr,
    /// Unit-weight complexity.
    pub complexity: u32,
    /// Mean absolute error on the training rows.
    pub loss: f64,
    pub fitness: f64,
}

impl Candidate {
    pub fn evaluate(expr: Expr, train: &TrainingSet, parsimony: f64) -> Candidate {
        let complexity = expr.complexity(&ComplexityWeights::default());
        let loss = train.l1(&expr);
        Candidate {
            fitness: fitness(loss, complexity, parsimony),
            expr,
            complexity,
            loss,
        }
    }
}

/// Lowest-loss candidate seen at each complexity.
#[derive(Debug, Clone, PartialEq)]
pub struct HallOfFame {
    max_complexity: u32,
    entries: BTreeMap<u32, Candidate>,
}

impl HallOfFame {
    pub fn new(max_complexity: u32) -> Self {
        HallOfFame {
            max_complexity,
            entries: BTreeMap::new(),
        }
    }

    /// Records `c` if it beats the current entry at its complexity. Returns
    /// whether it was stored. Non-finite losses are never stored.
    pub fn insert(&mut self, c: &Candidate) -> bool {
        if c.complexity > self.max_complexity || !c.loss.is_finite() {
            return false;
        }
        match self.entries.get(&c.complexity) {
            Some(cur) if cur.loss <= c.loss => false,
            _ => {
                self.entries.insert(c.complexity, c.clone());
                true
            }
        }
    }

    pub fn merge(&mut self, other: &HallOfFame) {
        for c in other.entries.values() {
            self.insert(c);
        }
    }

    pub fn get(&self, complexity: u32) -> Option<&Candidate> {
        self.entries.get(&complexity)
    }

    /// Entries in ascending complexity.
    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_complexity(&self) -> u32 {
        self.max_complexity
    }

    /// Lowest-loss entry overall; ties go to the simpler one.
    pub fn best(&self) -> Option<&Candidate> {
        self.entries
            .values()
            .min_by(|a, b| a.loss.total_cmp(&b.loss))
    }
}

fn random_leaf(rng: &mut Rng, config: &SearchConfig) -> Expr {
    random_expr(rng, 1, config.features, &config.operators, config.constant_range)
        .unwrap_or(Expr::Const(0.0))
}

fn random_tree(rng: &mut Rng, config: &SearchConfig, max_depth: usize) -> Expr {
    random_expr(rng, max_depth.max(1), config.features, &config.operators, config.constant_range)
        .unwrap_or(Expr::Const(0.0))
}

fn internal_nodes(e: &Expr) -> Vec<usize> {
    (0..e.size())
        .filter(|&i| e.node(i).is_some_and(|n| !n.is_leaf()))
        .collect()
}

fn constant_nodes(e: &Expr) -> Vec<usize> {
    (0..e.size())
        .filter(|&i| matches!(e.node(i), Some(Expr::Const(_))))
        .collect()
}

/// New value for a constant: a multiplicative step of log-uniform size, an
/// occasional sign flip, or a fresh draw when the constant is zero.
fn perturb_constant(c: f64, rng: &mut Rng, range: ConstantRange) -> f64 {
    if c == 0.0 {
        let v = range.sample(rng);
        return if v == 0.0 { 1.0 } else { v };
    }
    if rng.random_bool(0.1) {
        return -c;
    }
    let step = libm::pow(10.0, rng.random_range(-4.0..0.0));
    let factor = if rng.random_bool(0.5) { 1.0 + step } else { 1.0 / (1.0 + step) };
    let v = c * factor;
    if v.is_finite() && v != c {
        v
    } else {
        -c
    }
}

fn try_mutate(expr: &Expr, kind: MutationKind, rng: &mut Rng, config: &SearchConfig) -> Option<Expr> {
    let ops = &config.operators;
    match kind {
        MutationKind::Operator => {
            let nodes = internal_nodes(expr);
            if nodes.is_empty() {
                return None;
            }
            let i = nodes[rng.random_range(0..nodes.len())];
            let replacement = match expr.node(i)? {
                Expr::Unary(op, a) => {
                    let choices: Vec<UnaryOp> =
                        ops.unary.iter().copied().filter(|o| o != op).collect();
                    if choices.is_empty() {
                        return None;
                    }
                    Expr::Unary(choices[rng.random_range(0..choices.len())], a.clone())
                }
                Expr::Binary(op, a, b) => {
                    let choices: Vec<_> = ops.binary.iter().copied().filter(|o| o != op).collect();
                    if choices.is_empty() {
                        return None;
                    }
                    Expr::Binary(choices[rng.random_range(0..choices.len())], a.clone(), b.clone())
                }
                _ => return None,
            };
            Some(expr.replace_node(i, replacement))
        }
        MutationKind::Subtree => {
            let i = rng.random_range(0..expr.size());
            let depth = rng.random_range(1..=config.max_depth.clamp(1, 3));
            Some(expr.replace_node(i, random_tree(rng, config, depth)))
        }
        MutationKind::Delete => {
            let nodes = internal_nodes(expr);
            if nodes.is_empty() {
                return None;
            }
            let i = nodes[rng.random_range(0..nodes.len())];
            let child = match expr.node(i)? {
                Expr::Unary(_, a) => (**a).clone(),
                Expr::Binary(_, a, b) => {
                    if rng.random_bool(0.5) {
                        (**a).clone()
                    } else {
                        (**b).clone()
                    }
                }
                _ => return None,
            };
            Some(expr.replace_node(i, child))
        }
        MutationKind::Constant => {
            let nodes = constant_nodes(expr);
            if nodes.is_empty() {
                return None;
            }
            let i = nodes[rng.random_range(0..nodes.len())];
            let Some(Expr::Const(c)) = expr.node(i) else {
                return None;
            };
            let v = perturb_constant(*c, rng, config.constant_range);
            Some(expr.replace_node(i, Expr::Const(v)))
        }
        MutationKind::Insert => {
            let n_ops = ops.unary.len() + ops.binary.len();
            if n_ops == 0 {
                return None;
            }
            let i = rng.random_range(0..expr.size());
            let sub = expr.node(i)?.clone();
            let k = rng.random_range(0..n_ops);
            let wrapped = if k < ops.unary.len() {
                Expr::unary(ops.unary[k], sub)
            } else {
                let op = ops.binary[k - ops.unary.len()];
                let leaf = random_leaf(rng, config);
                if rng.random_bool(0.5) {
                    Expr::binary(op, sub, leaf)
                } else {
                    Expr::binary(op, leaf, sub)
                }
            };
            Some(expr.replace_node(i, wrapped))
        }
    }
}

const MAX_ATTEMPTS: usize = 16;

fn within_limit(e: &Expr, config: &SearchConfig) -> bool {
    e.size() as u32 <= config.max_complexity && e.all_constants_finite()
}

/// One random mutation of `expr`, respecting `config.max_complexity`.
/// Falls back to an unchanged copy when no valid mutation is found.
pub fn mutate(expr: &Expr, rng: &mut Rng, config: &SearchConfig) -> Expr {
    for _ in 0..MAX_ATTEMPTS {
        let kind = config.mutation_weights.pick(rng);
        if let Some(e) = try_mutate(expr, kind, rng, config) {
            if within_limit(&e, config) {
                return e;
            }
        }
    }
    expr.clone()
}

/// Copy of `a` with a random subtree replaced by a random subtree of `b`.
/// Falls back to a copy of `a` when every attempt exceeds `max_complexity`.
pub fn crossover(a: &Expr, b: &Expr, rng: &mut Rng, max_complexity: u32) -> Expr {
    for _ in 0..MAX_ATTEMPTS {
        let i = rng.random_range(0..a.size());
        let j = rng.random_range(0..b.size());
        let Some(donor) = b.node(j) else { continue };
        let child = a.replace_node(i, donor.clone());
        if child.size() as u32 <= max_complexity {
            return child;
        }
    }
    a.clone()
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    a.fitness.total_cmp(&b.fitness) == Ordering::Less
}

fn best_index(pop: &[Candidate]) -> usize {
    let mut best = 0;
    for i in 1..pop.len() {
        if better(&pop[i], &pop[best]) {
            best = i;
        }
    }
    best
}

fn tournament<'a>(pop: &'a [Candidate], size: usize, rng: &mut Rng) -> &'a Candidate {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..size {
        let i = rng.random_range(0..pop.len());
        if better(&pop[i], &pop[best]) || (pop[i].fitness == pop[best].fitness && i < best) {
            best = i;
        }
    }
    &pop[best]
}

/// Nelder-Mead on the L1 loss over the constants of `expr`, started from
/// `x0`. Stops after `max_evals` loss evaluations or when the simplex
/// collapses. Returns the best point and its loss.
fn nelder_mead(
    expr: &Expr,
    x0: &[f64],
    f0: f64,
    train: &TrainingSet,
    max_evals: usize,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let eval = |x: &[f64]| {
        if x.iter().all(|v| v.is_finite()) {
            train.l1(&expr.with_constants(x))
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += if x[i] == 0.0 { 0.1 } else { 0.1 * x[i] };
        let f = eval(&x);
        simplex.push((x, f));
    }
    let mut evals = n;
    let point = |c: &[f64], d: &[f64], t: f64| -> Vec<f64> {
        c.iter().zip(d).map(|(a, b)| a + t * (b - a)).collect()
    };
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if !best.is_finite() {
            break;
        }
        let spread = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs() / (1e-12 + b.abs())))
            .fold(0.0, f64::max);
        if spread < 1e-12 || (worst - best).abs() <= 1e-15 * (1.0 + best.abs()) {
            break;
        }
        let mut centroid = alloc::vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let xr = point(&centroid, &simplex[n].0, -1.0);
        let fr = eval(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = point(&centroid, &simplex[n].0, -2.0);
            let fe = eval(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = point(&centroid, &xr, 0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = point(&centroid, &simplex[n].0, 0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for (x, f) in simplex[1..].iter_mut() {
                    *x = point(&x0, x, 0.5);
                    *f = eval(x);
                }
                evals += n;
            }
        }
    }
    simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex is non-empty")
}

/// Tunes the constants of `c`: `rounds` restarts of Nelder-Mead, the first
/// from the current values and later ones from a jittered copy of the best
/// point so far. Only strict improvements are kept.
fn refine_constants(
    c: &Candidate,
    rounds: usize,
    train: &TrainingSet,
    config: &SearchConfig,
    rng: &mut Rng,
    hof: &mut HallOfFame,
) -> Candidate {
    let consts = c.expr.constants();
    if consts.is_empty() || rounds == 0 || !c.loss.is_finite() {
        return c.clone();
    }
    let n = consts.len();
    let budget = 6 * (n + 1);
    let (mut bx, mut bf) = (consts, c.loss);
    for r in 0..rounds {
        let start: Vec<f64> = if r == 0 {
            bx.clone()
        } else {
            bx.iter()
                .map(|&v| {
                    let step = libm::pow(10.0, rng.random_range(-3.0..0.0));
                    if v == 0.0 {
                        config.constant_range.sample(rng) * step
                    } else {
                        v * (1.0 + if rng.random_bool(0.5) { step } else { -step })
                    }
                })
                .collect()
        };
        let f0 = train.l1(&c.expr.with_constants(&start));
        let (x, f) = nelder_mead(&c.expr, &start, f0, train, budget);
        if f < bf {
            bx = x;
            bf = f;
        }
    }
    if bf < c.loss {
        let trial = Candidate::evaluate(c.expr.with_constants(&bx), train, config.parsimony);
        if better(&trial, c) {
            hof.insert(&trial);
            return trial;
        }
    }
    c.clone()
}

/// Result of one population: its hall of fame and the best fitness after
/// initialization and after each generation.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub hall_of_fame: HallOfFame,
    pub best_fitness: Vec<f64>,
}

fn initial_member(rng: &mut Rng, config: &SearchConfig) -> Expr {
    for _ in 0..MAX_ATTEMPTS {
        let depth = rng.random_range(1..=config.max_depth);
        let e = random_tree(rng, config, depth);
        if within_limit(&e, config) {
            return e;
        }
    }
    random_leaf(rng, config)
}

fn run_population(config: &SearchConfig, train: &TrainingSet, seed: u64) -> PopulationTrace {
    let mut rng = rng::stream(seed);
    let mut hof = HallOfFame::new(config.max_complexity);
    let mut pop: Vec<Candidate> = (0..config.population_size)
        .map(|_| {
            let c = Candidate::evaluate(initial_member(&mut rng, config), train, config.parsimony);
            hof.insert(&c);
            c
        })
        .collect();
    let mut history = Vec::with_capacity(config.iterations + 1);
    history.push(pop[best_index(&pop)].fitness);

    for _ in 0..config.iterations {
        let elite = pop[best_index(&pop)].clone();
        let mut next = Vec::with_capacity(config.population_size);
        next.push(elite);
        while next.len() < config.population_size {
            let expr = if rng.random_bool(config.crossover_probability) {
                let a = tournament(&pop, config.tournament_size, &mut rng).expr.clone();
                let b = tournament(&pop, config.tournament_size, &mut rng);
                crossover(&a, &b.expr, &mut rng, config.max_complexity)
            } else {
                let p = tournament(&pop, config.tournament_size, &mut rng);
                mutate(&p.expr, &mut rng, config)
            };
            let mut child = Candidate::evaluate(expr, train, config.parsimony);
            hof.insert(&child);
            if rng.random_bool(config.constant_probability) {
                child = refine_constants(&child, 1, train, config, &mut rng, &mut hof);
            }
            next.push(child);
        }
        pop = next;
        let pick = rng.random_range(1..pop.len());
        pop[pick] = refine_constants(&pop[pick], config.constant_rounds, train, config, &mut rng, &mut hof);
        let b = best_index(&pop);
        pop[b] = refine_constants(&pop[b], config.constant_rounds, train, config, &mut rng, &mut hof);
        history.push(pop[best_index(&pop)].fitness);
    }
    let entries: Vec<Candidate> = hof.iter().cloned().collect();
    for c in &entries {
        refine_constants(c, config.constant_rounds, train, config, &mut rng, &mut hof);
    }
    PopulationTrace {
        hall_of_fame: hof,
        best_fitness: history,
    }
}

fn map_maybe_parallel<T: Sync, U: Send>(
    items: &[T],
    parallel: bool,
    f: impl Fn(&T) -> U + Sync + Send,
) -> Vec<U> {
    #[cfg(feature = "std")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// Runs every population and returns the per-population traces in order.
pub fn evolve_traced(config: &SearchConfig, train: &TrainingSet) -> Result<Vec<PopulationTrace>, SearchError> {
    config.validate()?;
    if train.is_empty() {
        return Err(SearchError::EmptyTraining);
    }
    let seeds: Vec<u64> = (0..config.population_count as u64)
        .map(|p| rng::derive_seed(config.seed, p))
        .collect();
    Ok(map_maybe_parallel(&seeds, config.parallel, |&s| {
        run_population(config, train, s)
    }))
}

/// Evolves `population_count` independent populations and merges their
/// halls of fame.
pub fn evolve(config: &SearchConfig, train: &TrainingSet) -> Result<HallOfFame, SearchError> {
    let traces = evolve_traced(config, train)?;
    let mut hof = HallOfFame::new(config.max_complexity);
    for t in &traces {
        hof.merge(&t.hall_of_fame);
    }
    Ok(hof)
}

/// Hyperparameter intervals sampled per ensemble run (both inclusive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperparameterRanges {
    pub parsimony: (f64, f64),
    pub population_size: (usize, usize),
}

impl Default for HyperparameterRanges {
    fn default() -> Self {
        HyperparameterRanges {
            parsimony: (0.0, 0.9),
            population_size: (20, 120),
        }
    }
}

/// Hyperparameters drawn for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub parsimony: f64,
    pub population_size: usize,
    /// Seed passed to [`evolve`] for this run.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run_id: usize,
    pub hyperparameters: Hyperparameters,
    pub hall_of_fame: HallOfFame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEnsemble {
    pub master_seed: u64,
    pub runs: Vec<RunResult>,
}

/// Draws the hyperparameters of run `run_id` from its own stream.
pub fn sample_hyperparameters(master_seed: u64, run_id: usize, ranges: &HyperparameterRanges) -> Hyperparameters {
    let run_seed = rng::derive_seed(master_seed, run_id as u64);
    let mut r = rng::stream(run_seed);
    let (plo, phi) = ranges.parsimony;
    let parsimony = if phi > plo { r.random_range(plo..=phi) } else { plo };
    let (slo, shi) = ranges.population_size;
    let population_size = if shi > slo { r.random_range(slo..=shi) } else { slo };
    Hyperparameters {
        parsimony,
        population_size,
        seed: r.random(),
    }
}

/// `n_runs` independent searches with sampled parsimony and population
/// size (default ranges).
pub fn multi_run(base: &SearchConfig, n_runs: usize, train: &TrainingSet) -> Result<RunEnsemble, SearchError> {
    multi_run_with(base, n_runs, &HyperparameterRanges::default(), train)
}

pub fn multi_run_with(
    base: &SearchConfig,
    n_runs: usize,
    ranges: &HyperparameterRanges,
    train: &TrainingSet,
) -> Result<RunEnsemble, SearchError> {
    if n_runs == 0 {
        return Err(SearchError::InvalidConfig("n_runs must be at least 1"));
    }
    base.validate()?;
    if train.is_empty() {
        return Err(SearchError::EmptyTraining);
    }
    let ids: Vec<usize> = (0..n_runs).collect();
    let runs = map_maybe_parallel(&ids, base.parallel, |&run_id| {
        let hyperparameters = sample_hyperparameters(base.seed, run_id, ranges);
        let config = SearchConfig {
            parsimony: hyperparameters.parsimony,
            population_size: hyperparameters.population_size.max(2),
            seed: hyperparameters.seed,
            ..base.clone()
        };
        evolve(&config, train).map(|hall_of_fame| RunResult {
            run_id,
            hyperparameters,
            hall_of_fame,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(RunEnsemble {
        master_seed: base.seed,
        runs,
    })
}

/// A deduplicated, ranked candidate with the run that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    /// 1-based.
    pub rank: usize,
    pub candidate: Candidate,
    /// Deduplication key, see [`Expr::canonical_key`].
    pub key: String,
    pub run_id: usize,
    pub parsimony: f64,
    pub population_size: usize,
    pub seed: u64,
}

/// Pools every run's hall of fame, drops complexity above 30, removes
/// duplicates and ranks by ascending L1 loss.
pub fn consolidate(ensemble: &RunEnsemble) -> Vec<RankedCandidate> {
    consolidate_with(ensemble, MAX_CONSOLIDATED_COMPLEXITY)
}

/// [`consolidate`] with a custom complexity cap. Among duplicates the
/// lowest-loss copy is kept (first seen on ties). Ties in loss are ordered
/// by complexity, then key.
pub fn consolidate_with(ensemble: &RunEnsemble, max_complexity: u32) -> Vec<RankedCandidate> {
    let mut unique: BTreeMap<String, RankedCandidate> = BTreeMap::new();
    for run in &ensemble.runs {
        for c in run.hall_of_fame.iter() {
            if c.complexity > max_complexity || !c.loss.is_finite() {
                continue;
            }
            let key = c.expr.canonical_key();
            let entry = RankedCandidate {
                rank: 0,
                candidate: c.clone(),
                key: key.clone(),
                run_id: run.run_id,
                parsimony: run.hyperparameters.parsimony,
                population_size: run.hyperparameters.population_size,
                seed: run.hyperparameters.seed,
            };
            match unique.get(&key) {
                Some(cur) if cur.candidate.loss <= c.loss => {}
                _ => {
                    unique.insert(key, entry);
                }
            }
        }
    }
    let mut out: Vec<RankedCandidate> = unique.into_values().collect();
    out.sort_by(|a, b| {
        a.candidate
            .loss
            .total_cmp(&b.candidate.loss)
            .then(a.candidate.complexity.cmp(&b.candidate.complexity))
            .then_with(|| a.key.cmp(&b.key))
    });
    for (i, c) in out.iter_mut().enumerate() {
        c.rank = i + 1;
    }
    out
}

/// Training set from explicit columns, mainly for synthetic data.
pub fn training_set_from_columns(
    dst: Vec<f64>,
    ey: Vec<f64>,
    pdyn: Vec<f64>,
    pb: Vec<f64>,
    target: Vec<f64>,
) -> Result<TrainingSet, SearchError> {
    let n = dst.len();
    if [ey.len(), pdyn.len(), pb.len()].iter().any(|&l| l != n) {
        return Err(SearchError::LengthMismatch {
            target: target.len(),
            features: n,
        });
    }
    let table = FeatureTable::new(n)
        .with_column(Var::Dst, dst)
        .with_column(Var::Ey, ey)
        .with_column(Var::Pdyn, pdyn)
        .with_column(Var::PB, pb);
    TrainingSet::new(table, target)
}
