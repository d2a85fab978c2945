//! Epsilon-greedy action selection and its decay schedule.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Index of the first maximal entry.
pub fn greedy(qvalues: &[f64]) -> usize {
    let mut best = 0;
    for (i, q) in qvalues.iter().enumerate().skip(1) {
        if *q > qvalues[best] {
            best = i;
        }
    }
    best
}

/// Picks the greedy action with probability `1 - eps`, otherwise one of the
/// remaining actions uniformly, so each non-greedy action has probability
/// `eps / (|actions| - 1)`.
pub fn select_action<R: Rng + ?Sized>(qvalues: &[f64], eps: f64, rng: &mut R) -> usize {
    let best = greedy(qvalues);
    let n = qvalues.len();
    if n < 2 {
        return best;
    }
    if rng.random::<f64>() < eps {
        let k = rng.random_range(0..n - 1);
        if k >= best {
            k + 1
        } else {
            k
        }
    } else {
        best
    }
}

/// Multiplicative exploration decay with a floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub decay: f64,
    pub floor: f64,
    epsilon: f64,
    steps: u64,
}

impl EpsilonSchedule {
    pub fn new(start: f64, decay: f64, floor: f64) -> Self {
        EpsilonSchedule {
            start,
            decay,
            floor,
            epsilon: start.max(floor),
            steps: 0,
        }
    }

    pub fn constant(eps: f64) -> Self {
        Self::new(eps, 1.0, eps)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn advance(&mut self) {
        self.steps += 1;
        self.epsilon = (self.epsilon * self.decay).max(self.floor);
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule::new(0.9, 0.998, 0.05)
    }
}
