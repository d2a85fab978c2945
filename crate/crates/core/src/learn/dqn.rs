//! Deep Q-learning: replay buffer, target network and the SGD training step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, Mlp};
use super::policy::{select_action, EpsilonSchedule};
use super::qtable::Transition;
use super::quantize::Observation;
use super::PowerAgent;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    /// SGD step size.
    pub lr: f64,
    pub delta: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Slots between hard copies of the main network into the target network.
    pub sync_period: usize,
    /// Without replay the agent trains on the latest transition only.
    pub use_replay: bool,
    /// Rewards are divided by this before they reach the network.
    pub reward_scale: f64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            lr: 0.1,
            delta: 0.7,
            batch_size: 32,
            replay_capacity: 10_000,
            sync_period: 100,
            use_replay: true,
            reward_scale: 100.0,
        }
    }
}

/// Fixed-capacity ring buffer with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            capacity: capacity.max(1),
            items: Vec::new(),
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Uniform draw with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Transition> {
        (0..n)
            .map(|_| self.items[rng.random_range(0..self.items.len())])
            .collect()
    }
}

/// Bootstrapped regression target `r + delta * max_a' T(s', a')`.
pub fn dqn_target(target_net: &Mlp, t: &Transition, delta: f64, levels: usize) -> Result<f64> {
    let next = target_net.forward(&t.next_state.normalized(levels))?;
    let best = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(t.reward + delta * best)
}

/// Mean squared TD loss of `main` over a batch with targets from `target_net`.
pub fn batch_loss(main: &Mlp, target_net: &Mlp, batch: &[Transition], delta: f64, levels: usize) -> Result<f64> {
    let mut loss = 0.0;
    for t in batch {
        let y = dqn_target(target_net, t, delta, levels)?;
        let q = main.forward(&t.state.normalized(levels))?[t.action];
        loss += 0.5 * (y - q).powi(2);
    }
    Ok(loss / batch.len() as f64)
}

/// One gradient-descent step of `main` on the batch; `target_net` stays frozen.
/// Returns the batch loss before the step.
pub fn dqn_train_step(
    main: &mut Mlp,
    target_net: &Mlp,
    batch: &[Transition],
    lr: f64,
    delta: f64,
    levels: usize,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Config("empty training batch".into()));
    }
    let mut grads = Gradients::zeros_like(main);
    let mut loss = 0.0;
    for t in batch {
        let x = t.state.normalized(levels);
        let y = dqn_target(target_net, t, delta, levels)?;
        let q = main.forward(&x)?[t.action];
        loss += 0.5 * (y - q).powi(2);
        grads.add_assign(&main.backward(&x, t.action, y)?);
    }
    let n = batch.len() as f64;
    grads.scale(1.0 / n);
    main.descend(&grads, lr);
    Ok(loss / n)
}

/// Hard copy of every parameter.
pub fn target_sync(main: &Mlp, target_net: &mut Mlp) -> Result<()> {
    if main.sizes() != target_net.sizes() {
        return Err(Error::Shape("main and target networks differ in shape".into()));
    }
    target_net.clone_from(main);
    Ok(())
}

/// Epsilon-greedy agent backed by a main/target network pair.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub main: Mlp,
    pub target: Mlp,
    pub cfg: DqnConfig,
    pub schedule: EpsilonSchedule,
    levels: usize,
    replay: ReplayBuffer,
    rng: ChaCha8Rng,
    steps: u64,
    syncs: u64,
    last_loss: f64,
}

impl DqnAgent {
    pub fn new(n_actions: usize, levels: usize, cfg: DqnConfig, schedule: EpsilonSchedule, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let main = Mlp::q_network(n_actions, &mut rng);
        Self::from_params(main, levels, cfg, schedule, rng)
    }

    /// Starts from given weights (hot booting); the target network is a copy.
    pub fn with_params(main: Mlp, levels: usize, cfg: DqnConfig, schedule: EpsilonSchedule, seed: u64) -> Self {
        Self::from_params(main, levels, cfg, schedule, ChaCha8Rng::seed_from_u64(seed))
    }

    fn from_params(main: Mlp, levels: usize, cfg: DqnConfig, schedule: EpsilonSchedule, rng: ChaCha8Rng) -> Self {
        DqnAgent {
            target: main.clone(),
            main,
            cfg,
            schedule,
            levels,
            replay: ReplayBuffer::new(cfg.replay_capacity),
            rng,
            steps: 0,
            syncs: 0,
            last_loss: 0.0,
        }
    }

    pub fn sync_count(&self) -> u64 {
        self.syncs
    }

    pub fn last_loss(&self) -> f64 {
        self.last_loss
    }

    pub fn q_values(&self, obs: &Observation) -> Vec<f64> {
        self.main
            .forward(&obs.normalized(self.levels))
            .expect("observation width matches the network")
    }
}

impl PowerAgent for DqnAgent {
    fn act(&mut self, obs: &Observation) -> usize {
        let q = self.q_values(obs);
        select_action(&q, self.schedule.epsilon(), &mut self.rng)
    }

    fn learn(&mut self, t: &Transition) {
        let mut t = *t;
        t.reward /= self.cfg.reward_scale;
        let batch = if self.cfg.use_replay {
            self.replay.push(t);
            if self.replay.len() >= self.cfg.batch_size {
                Some(self.replay.sample(self.cfg.batch_size, &mut self.rng))
            } else {
                None
            }
        } else {
            Some(vec![t])
        };
        if let Some(batch) = batch {
            self.last_loss = dqn_train_step(&mut self.main, &self.target, &batch, self.cfg.lr, self.cfg.delta, self.levels)
                .expect("batch shapes match the network");
        }
        self.steps += 1;
        if self.cfg.sync_period > 0 && self.steps % self.cfg.sync_period as u64 == 0 {
            self.target.clone_from(&self.main);
            self.syncs += 1;
        }
        self.schedule.advance();
    }

    fn epsilon(&self) -> f64 {
        self.schedule.epsilon()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(a: usize, b: usize) -> Observation {
        Observation([a, b, 3, 7])
    }

    fn toy_batch() -> Vec<Transition> {
        vec![
            Transition { state: obs(1, 2), action: 0, reward: 1.0, next_state: obs(2, 2) },
            Transition { state: obs(4, 6), action: 2, reward: -0.5, next_state: obs(0, 1) },
            Transition { state: obs(7, 0), action: 1, reward: 0.25, next_state: obs(7, 7) },
        ]
    }

    #[test]
    fn zero_discount_targets_are_rewards() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let target = Mlp::q_network(3, &mut rng);
        for t in toy_batch() {
            assert_eq!(dqn_target(&target, &t, 0.0, 8).unwrap(), t.reward);
        }
    }

    #[test]
    fn consistent_single_transition_leaves_main_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut main = Mlp::q_network(3, &mut rng);
        let target = Mlp::zeros(&[4, 24, 24, 3]);
        let mut t = toy_batch()[0];
        t.reward = main.forward(&t.state.normalized(8)).unwrap()[t.action];
        let before = main.clone();
        dqn_train_step(&mut main, &target, &[t], 0.1, 0.7, 8).unwrap();
        assert_eq!(main, before);
    }

    #[test]
    fn loss_decreases_on_fixed_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut main = Mlp::q_network(3, &mut rng);
        let target = main.clone();
        let batch = toy_batch();
        let mut prev = batch_loss(&main, &target, &batch, 0.7, 8).unwrap();
        for _ in 0..200 {
            dqn_train_step(&mut main, &target, &batch, 0.01, 0.7, 8).unwrap();
            let now = batch_loss(&main, &target, &batch, 0.7, 8).unwrap();
            assert!(now < prev, "{now} >= {prev}");
            prev = now;
        }
    }

    #[test]
    fn empty_batch_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut main = Mlp::q_network(3, &mut rng);
        let target = main.clone();
        assert!(dqn_train_step(&mut main, &target, &[], 0.1, 0.7, 8).is_err());
    }

    #[test]
    fn sync_copies_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let main = Mlp::q_network(5, &mut rng);
        let mut target = Mlp::q_network(5, &mut rng);
        target_sync(&main, &mut target).unwrap();
        let once = target.clone();
        target_sync(&main, &mut target).unwrap();
        assert_eq!(target, once);
        for k in 0..8 {
            let x = obs(k, 7 - k).normalized(8);
            assert_eq!(main.forward(&x).unwrap(), target.forward(&x).unwrap());
        }
        let mut wrong = Mlp::q_network(4, &mut rng);
        assert!(target_sync(&main, &mut wrong).is_err());
    }

    #[test]
    fn sync_count_follows_period() {
        let cfg = DqnConfig { sync_period: 100, ..DqnConfig::default() };
        let mut agent = DqnAgent::new(3, 8, cfg, EpsilonSchedule::default(), 9);
        let n = 1234;
        for k in 0..n {
            let t = Transition { state: obs(k % 8, 1), action: k % 3, reward: 1.0, next_state: obs(2, 2) };
            agent.act(&t.state);
            agent.learn(&t);
        }
        assert_eq!(agent.sync_count(), (n / 100) as u64);
    }

    #[test]
    fn replay_ring_overwrites_oldest() {
        let mut buf = ReplayBuffer::new(3);
        for r in 0..5 {
            buf.push(Transition { state: obs(0, 0), action: 0, reward: r as f64, next_state: obs(0, 0) });
        }
        assert_eq!(buf.len(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rewards: Vec<f64> = buf.sample(200, &mut rng).iter().map(|t| t.reward).collect();
        assert!(rewards.iter().all(|r| *r >= 2.0));
    }
}
