//! Power-allocation agents: tabular Q-learning (shared or selfish reward)
//! and deep Q-learning with optional hot booting.

pub mod checkpoint;
pub mod dqn;
pub mod hot_boot;
pub mod mlp;
pub mod policy;
pub mod qtable;
pub mod quantize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rates::{cell_qos, UtilityParams};

pub use checkpoint::AgentCheckpoint;
pub use dqn::{DqnAgent, DqnConfig};
pub use hot_boot::hot_boot;
pub use mlp::Mlp;
pub use policy::{select_action, EpsilonSchedule};
pub use qtable::{ql_update, QTable, Transition};
pub use quantize::{Observation, SinrQuantizer};

/// A base station's learner. Each agent owns its parameters and RNG stream.
pub trait PowerAgent: Send {
    fn act(&mut self, obs: &Observation) -> usize;
    fn learn(&mut self, t: &Transition);
    fn epsilon(&self) -> f64;
}

/// Tabular epsilon-greedy Q-learner over quantized-SINR states.
#[derive(Debug, Clone)]
pub struct QlAgent {
    pub table: QTable,
    pub schedule: EpsilonSchedule,
    levels: usize,
    rng: ChaCha8Rng,
}

impl QlAgent {
    pub fn new(levels: usize, n_actions: usize, alpha: f64, delta: f64, schedule: EpsilonSchedule, seed: u64) -> Self {
        QlAgent {
            table: QTable::new(levels.pow(4), n_actions, alpha, delta),
            schedule,
            levels,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }
}

impl PowerAgent for QlAgent {
    fn act(&mut self, obs: &Observation) -> usize {
        let row = self.table.row(obs.state_index(self.levels));
        select_action(row, self.schedule.epsilon(), &mut self.rng)
    }

    fn learn(&mut self, t: &Transition) {
        ql_update(&mut self.table, t, self.levels);
        self.schedule.advance();
    }

    fn epsilon(&self) -> f64 {
        self.schedule.epsilon()
    }
}

/// Single-cell analog of the shared utility used by the selfish baseline:
/// the own cell's soft QoS indicator times its own sum rate plus the jamming cost.
pub fn selfish_reward(rates: &[f64; 4], own_cell: usize, p_j: f64, params: &UtilityParams) -> f64 {
    let own = &rates[2 * own_cell..2 * own_cell + 2];
    let indicator = if cell_qos(rates, own_cell, params.r0) { 1.0 } else { params.z };
    indicator * (own.iter().sum::<f64>() + params.gamma * p_j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selfish_reward_values() {
        let p = UtilityParams { r0: 1.0, gamma: 0.5, z: 0.01 };
        assert_eq!(selfish_reward(&[2.0, 2.0, 0.0, 0.0], 0, 2.0, &p), 5.0);
        assert!((selfish_reward(&[0.5, 3.5, 9.0, 9.0], 0, 2.0, &p) - 0.05).abs() < 1e-15);
        assert_eq!(
            selfish_reward(&[2.0, 2.0, 0.0, 0.0], 0, 2.0, &p),
            selfish_reward(&[2.0, 2.0, 7.0, 0.3], 0, 2.0, &p)
        );
        assert_eq!(selfish_reward(&[0.0, 0.0, 2.0, 2.0], 1, 2.0, &p), 5.0);
    }

    #[test]
    fn frozen_greedy_agent_is_deterministic() {
        let mut a = QlAgent::new(8, 6, 0.2, 0.7, EpsilonSchedule::constant(0.0), 1);
        a.table.set(Observation([1, 2, 3, 4]).state_index(8), 4, 3.0);
        let o = Observation([1, 2, 3, 4]);
        assert!((0..100).all(|_| a.act(&o) == 4));
    }

    #[test]
    fn selfish_and_shared_agents_share_machinery() {
        // identical seeds and identical rewards give identical trajectories
        let mut a = QlAgent::new(8, 6, 0.2, 0.7, EpsilonSchedule::default(), 11);
        let mut b = QlAgent::new(8, 6, 0.2, 0.7, EpsilonSchedule::default(), 11);
        let mut s = Observation([0, 7, 3, 7]);
        for k in 0..500 {
            let (x, y) = (a.act(&s), b.act(&s));
            assert_eq!(x, y);
            let next = Observation([k % 8, 7, x % 8, 7]);
            let t = Transition { state: s, action: x, reward: (x as f64).sin(), next_state: next };
            a.learn(&t);
            b.learn(&t);
            s = next;
        }
        assert_eq!(a.table, b.table);
    }

    /// Value iteration on a frozen two-state MDP bounds the learned table.
    #[test]
    fn q_values_stay_within_value_iteration_bound() {
        use rand::Rng;
        // two states, two actions; action a moves to state a, reward table below
        let reward = [[1.0, -2.0], [0.5, 3.0]];
        let delta = 0.7;
        let mut v = [[0.0f64; 2]; 2];
        for _ in 0..500 {
            let max_next = [v[0][0].max(v[0][1]), v[1][0].max(v[1][1])];
            for s in 0..2 {
                for a in 0..2 {
                    v[s][a] = reward[s][a] + delta * max_next[a];
                }
            }
        }
        let mut table = QTable::new(2, 2, 0.2, delta);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = 0;
        for _ in 0..20_000 {
            let a = rng.random_range(0..2);
            table.update(s, a, reward[s][a], a);
            s = a;
        }
        let r_max: f64 = 3.0;
        for s in 0..2 {
            for a in 0..2 {
                assert!(table.get(s, a).abs() <= r_max / (1.0 - delta) + 1e-9);
                assert!((table.get(s, a) - v[s][a]).abs() < 1e-6, "{} vs {}", table.get(s, a), v[s][a]);
            }
        }
    }
}
