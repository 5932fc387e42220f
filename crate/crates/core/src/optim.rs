//! Sparse parameter updates: SGD, Adagrad, and Adam.
//!
//! A batch only touches the embedding rows of its triples plus the slack, so
//! updates are applied per parameter handle rather than over the full
//! matrices. An all-zero gradient is a no-op for every rule: parameters,
//! accumulators, and step counters stay untouched.

use crate::error::{Error, Result};
use crate::scoring::EmbeddingState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OptimizerKind {
    Sgd,
    #[default]
    Adagrad,
    Adam,
}

impl OptimizerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Adam => "adam",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "adagrad" => Ok(OptimizerKind::Adagrad),
            "adam" => Ok(OptimizerKind::Adam),
            other => Err(Error::Config(format!(
                "unknown optimizer {other:?} (expected sgd|adagrad|adam)"
            ))),
        }
    }
}

/// Handle naming one updatable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Param {
    Entity(usize),
    Relation(usize),
    /// The shared slack scalar.
    Slack,
    /// One element of the soft-margin per-triple slack vector.
    TripleSlack(usize),
}

/// Gradient for one parameter: a row for embeddings, a scalar for slacks.
#[derive(Debug, Clone, Copy)]
pub enum Gradient<'a> {
    Row(&'a [f64]),
    Scalar(f64),
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const EPSILON: f64 = 1e-8;

/// Per-coordinate accumulators shaped like the embedding state.
#[derive(Debug, Clone, Default)]
struct Store {
    entities: Vec<f64>,
    relations: Vec<f64>,
    slack: f64,
    triple_slack: Vec<f64>,
}

impl Store {
    fn shaped_like(state: &EmbeddingState) -> Self {
        Store {
            entities: vec![0.0; state.entities.len()],
            relations: vec![0.0; state.relations.len()],
            slack: 0.0,
            triple_slack: vec![0.0; state.per_triple_slack.as_ref().map_or(0, Vec::len)],
        }
    }
}

#[derive(Debug, Clone)]
enum Moments {
    Sgd,
    Adagrad(Store),
    Adam {
        m: Store,
        v: Store,
        ent_steps: Vec<u64>,
        rel_steps: Vec<u64>,
        slack_steps: u64,
        tslack_steps: Vec<u64>,
    },
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    pub epsilon: f64,
    moments: Moments,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, learning_rate: f64, state: &EmbeddingState) -> Self {
        let moments = match kind {
            OptimizerKind::Sgd => Moments::Sgd,
            OptimizerKind::Adagrad => Moments::Adagrad(Store::shaped_like(state)),
            OptimizerKind::Adam => Moments::Adam {
                m: Store::shaped_like(state),
                v: Store::shaped_like(state),
                ent_steps: vec![0; state.n_entities],
                rel_steps: vec![0; state.n_relations],
                slack_steps: 0,
                tslack_steps: vec![0; state.per_triple_slack.as_ref().map_or(0, Vec::len)],
            },
        };
        Optimizer { kind, learning_rate, epsilon: EPSILON, moments }
    }

    /// Apply one update to the addressed parameter, in place.
    pub fn apply_update(&mut self, state: &mut EmbeddingState, param: Param, grad: Gradient) {
        let dim = state.dim;
        match (param, grad) {
            (Param::Entity(i), Gradient::Row(g)) => {
                debug_assert_eq!(g.len(), dim);
                if g.iter().all(|&x| x == 0.0) {
                    return;
                }
                let span = i * dim..(i + 1) * dim;
                let p = &mut state.entities[span.clone()];
                match &mut self.moments {
                    Moments::Sgd => sgd(p, g, self.learning_rate),
                    Moments::Adagrad(acc) => {
                        adagrad(p, g, &mut acc.entities[span], self.learning_rate, self.epsilon)
                    }
                    Moments::Adam { m, v, ent_steps, .. } => {
                        ent_steps[i] += 1;
                        adam(
                            p,
                            g,
                            &mut m.entities[span.clone()],
                            &mut v.entities[span],
                            ent_steps[i],
                            self.learning_rate,
                            self.epsilon,
                        )
                    }
                }
            }
            (Param::Relation(i), Gradient::Row(g)) => {
                debug_assert_eq!(g.len(), dim);
                if g.iter().all(|&x| x == 0.0) {
                    return;
                }
                let span = i * dim..(i + 1) * dim;
                let p = &mut state.relations[span.clone()];
                match &mut self.moments {
                    Moments::Sgd => sgd(p, g, self.learning_rate),
                    Moments::Adagrad(acc) => {
                        adagrad(p, g, &mut acc.relations[span], self.learning_rate, self.epsilon)
                    }
                    Moments::Adam { m, v, rel_steps, .. } => {
                        rel_steps[i] += 1;
                        adam(
                            p,
                            g,
                            &mut m.relations[span.clone()],
                            &mut v.relations[span],
                            rel_steps[i],
                            self.learning_rate,
                            self.epsilon,
                        )
                    }
                }
            }
            (Param::Slack, Gradient::Scalar(g)) => {
                if g == 0.0 {
                    return;
                }
                let mut p = state.slack;
                match &mut self.moments {
                    Moments::Sgd => sgd(std::slice::from_mut(&mut p), &[g], self.learning_rate),
                    Moments::Adagrad(acc) => adagrad(
                        std::slice::from_mut(&mut p),
                        &[g],
                        std::slice::from_mut(&mut acc.slack),
                        self.learning_rate,
                        self.epsilon,
                    ),
                    Moments::Adam { m, v, slack_steps, .. } => {
                        *slack_steps += 1;
                        adam(
                            std::slice::from_mut(&mut p),
                            &[g],
                            std::slice::from_mut(&mut m.slack),
                            std::slice::from_mut(&mut v.slack),
                            *slack_steps,
                            self.learning_rate,
                            self.epsilon,
                        )
                    }
                }
                state.slack = p;
            }
            (Param::TripleSlack(i), Gradient::Scalar(g)) => {
                if g == 0.0 {
                    return;
                }
                let slacks = state
                    .per_triple_slack
                    .as_mut()
                    .expect("per-triple slack updated without a slack vector");
                let p = &mut slacks[i..=i];
                match &mut self.moments {
                    Moments::Sgd => sgd(p, &[g], self.learning_rate),
                    Moments::Adagrad(acc) => adagrad(
                        p,
                        &[g],
                        &mut acc.triple_slack[i..=i],
                        self.learning_rate,
                        self.epsilon,
                    ),
                    Moments::Adam { m, v, tslack_steps, .. } => {
                        tslack_steps[i] += 1;
                        adam(
                            p,
                            &[g],
                            &mut m.triple_slack[i..=i],
                            &mut v.triple_slack[i..=i],
                            tslack_steps[i],
                            self.learning_rate,
                            self.epsilon,
                        )
                    }
                }
            }
            (p, _) => unreachable!("gradient shape does not match parameter {p:?}"),
        }
    }

    #[cfg(test)]
    fn adagrad_slack_accumulator(&self) -> f64 {
        match &self.moments {
            Moments::Adagrad(acc) => acc.slack,
            _ => panic!("not an adagrad optimizer"),
        }
    }
}

fn sgd(p: &mut [f64], g: &[f64], lr: f64) {
    for (pi, gi) in p.iter_mut().zip(g) {
        *pi -= lr * gi;
    }
}

fn adagrad(p: &mut [f64], g: &[f64], acc: &mut [f64], lr: f64, eps: f64) {
    for ((pi, gi), ai) in p.iter_mut().zip(g).zip(acc) {
        *ai += gi * gi;
        *pi -= lr * gi / (ai.sqrt() + eps);
    }
}

fn adam(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], t: u64, lr: f64, eps: f64) {
    let bc1 = 1.0 - ADAM_BETA1.powi(t as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(t as i32);
    for (((pi, gi), mi), vi) in p.iter_mut().zip(g).zip(m).zip(v) {
        *mi = ADAM_BETA1 * *mi + (1.0 - ADAM_BETA1) * gi;
        *vi = ADAM_BETA2 * *vi + (1.0 - ADAM_BETA2) * gi * gi;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        *pi -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Rescale every entity row to unit L2 norm; zero rows are left untouched.
pub fn normalize_entities(state: &mut EmbeddingState) {
    let dim = state.dim;
    for row in state.entities.chunks_mut(dim) {
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::{LossKind, LossSpec};
    use approx::assert_abs_diff_eq;

    fn tiny_state() -> EmbeddingState {
        let mut s = EmbeddingState::init(2, 1, 2, 0, &LossSpec::new(LossKind::Mrl), 0);
        s.entities = vec![1.0, 1.0, 1.0, 1.0];
        s.relations = vec![1.0, 1.0];
        s
    }

    #[test]
    fn sgd_step_is_plain_arithmetic() {
        let mut state = tiny_state();
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, &state);
        opt.apply_update(&mut state, Param::Entity(0), Gradient::Row(&[2.0, 0.0]));
        assert_abs_diff_eq!(state.entity(0)[0], 0.8, epsilon = 1e-15);
        assert_eq!(state.entity(0)[1], 1.0);
    }

    #[test]
    fn adagrad_first_step_normalizes_gradient_magnitude() {
        let mut state = tiny_state();
        let mut opt = Optimizer::new(OptimizerKind::Adagrad, 0.1, &state);
        opt.apply_update(&mut state, Param::Entity(0), Gradient::Row(&[3.0, 0.0]));
        // acc = 9, step = 0.1 * 3 / (3 + 1e-8)
        assert_abs_diff_eq!(state.entity(0)[0], 0.9, epsilon = 1e-8);
    }

    #[test]
    fn adam_first_step_is_lr_times_sign() {
        let mut state = tiny_state();
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.01, &state);
        opt.apply_update(&mut state, Param::Entity(0), Gradient::Row(&[-4.0, 0.5]));
        // bias-corrected first step: lr * g / (|g| + eps)
        assert_abs_diff_eq!(state.entity(0)[0], 1.01, epsilon = 1e-7);
        assert_abs_diff_eq!(state.entity(0)[1], 0.99, epsilon = 1e-7);
    }

    #[test]
    fn zero_gradient_is_identity() {
        for kind in [OptimizerKind::Sgd, OptimizerKind::Adagrad, OptimizerKind::Adam] {
            let mut state = tiny_state();
            let mut opt = Optimizer::new(kind, 0.1, &state);
            let before = state.clone();
            opt.apply_update(&mut state, Param::Entity(1), Gradient::Row(&[0.0, 0.0]));
            opt.apply_update(&mut state, Param::Slack, Gradient::Scalar(0.0));
            assert_eq!(state, before);
            if kind == OptimizerKind::Adagrad {
                assert_eq!(opt.adagrad_slack_accumulator(), 0.0);
            }
        }
    }

    #[test]
    fn adagrad_accumulator_is_monotone() {
        let mut state = tiny_state();
        let mut opt = Optimizer::new(OptimizerKind::Adagrad, 0.1, &state);
        let mut last = 0.0;
        for g in [1.0, -2.0, 0.5, -0.25, 3.0] {
            opt.apply_update(&mut state, Param::Slack, Gradient::Scalar(g));
            let acc = opt.adagrad_slack_accumulator();
            assert!(acc >= last);
            last = acc;
        }
    }

    #[test]
    fn slack_updates_move_the_scalar() {
        let mut state = tiny_state();
        state.slack = 1.0;
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.5, &state);
        opt.apply_update(&mut state, Param::Slack, Gradient::Scalar(1.0));
        assert_eq!(state.slack, 0.5);
    }

    #[test]
    fn per_triple_slack_updates_one_element() {
        let mut state = EmbeddingState::init(2, 1, 2, 0, &LossSpec::new(LossKind::Sm), 3);
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, &state);
        opt.apply_update(&mut state, Param::TripleSlack(1), Gradient::Scalar(-2.0));
        let slacks = state.per_triple_slack.as_ref().unwrap();
        assert_eq!(slacks[0], 0.0);
        assert_abs_diff_eq!(slacks[1], 0.2, epsilon = 1e-15);
        assert_eq!(slacks[2], 0.0);
    }

    #[test]
    fn normalize_rescales_rows() {
        let mut state = tiny_state();
        state.entities = vec![3.0, 4.0, 0.0, 0.0];
        normalize_entities(&mut state);
        assert_eq!(state.entity(0), &[0.6, 0.8]);
        assert_eq!(state.entity(1), &[0.0, 0.0]); // zero row untouched
    }

    #[test]
    fn normalize_is_idempotent_on_unit_rows() {
        let mut state = tiny_state();
        state.entities = vec![0.6, 0.8, 1.0, 0.0];
        let before = state.entities.clone();
        normalize_entities(&mut state);
        for (a, b) in state.entities.iter().zip(&before) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
