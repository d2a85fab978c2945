//! Dense tabular Q-function.

use serde::{Deserialize, Serialize};

use super::quantize::Observation;

/// One interaction step as seen by a learning agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_state: Observation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
    /// Learning rate.
    pub alpha: f64,
    /// Discount factor.
    pub delta: f64,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize, alpha: f64, delta: f64) -> Self {
        QTable {
            n_states,
            n_actions,
            values: vec![0.0; n_states * n_actions],
            alpha,
            delta,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.n_actions + action] = value;
    }

    pub fn max_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Q(s,a) <- (1-alpha) Q(s,a) + alpha (r + delta max_a' Q(s',a'))`.
    pub fn update(&mut self, state: usize, action: usize, reward: f64, next_state: usize) {
        let target = reward + self.delta * self.max_value(next_state);
        let q = self.get(state, action);
        self.set(state, action, (1.0 - self.alpha) * q + self.alpha * target);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Applies one tabular update for a transition between quantized observations.
pub fn ql_update(table: &mut QTable, t: &Transition, levels: usize) {
    table.update(
        t.state.state_index(levels),
        t.action,
        t.reward,
        t.next_state.state_index(levels),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_alpha_leaves_table() {
        let mut t = QTable::new(3, 2, 0.0, 0.7);
        t.set(1, 1, 4.0);
        let before = t.clone();
        t.update(0, 1, 9.0, 1);
        assert_eq!(t, before);
    }

    #[test]
    fn unit_alpha_no_discount_stores_reward() {
        let mut t = QTable::new(3, 2, 1.0, 0.0);
        t.set(2, 0, 8.0);
        t.update(0, 1, -3.5, 2);
        assert_eq!(t.get(0, 1), -3.5);
    }

    #[test]
    fn hand_substituted_update() {
        let mut t = QTable::new(2, 2, 0.5, 0.7);
        t.set(0, 0, 1.0);
        t.set(1, 0, 3.0);
        t.set(1, 1, -2.0);
        t.update(0, 0, 2.0, 1);
        assert!((t.get(0, 0) - 2.55).abs() < 1e-15);
        // only the visited entry moves
        assert_eq!(t.get(0, 1), 0.0);
        assert_eq!(t.get(1, 0), 3.0);
        assert_eq!(t.get(1, 1), -2.0);
    }
}
