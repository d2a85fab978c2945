//! The smart jammer: exact best response to the base stations' powers, a
//! numerical unimodality probe of its utility, and the Q-learning jammer
//! used in the slot-level simulations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::learn::policy::{select_action, EpsilonSchedule};
use crate::learn::QTable;
use crate::numeric::golden_section_max;
use crate::rates::{jammer_utility, rates_from_sinr, sinr_vector, StrategyProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JammerConfig {
    /// Power cap `P_J`.
    pub p_j_max: f64,
    /// Cost per unit jamming power.
    pub gamma: f64,
    /// Number of power steps of the learning jammer; actions are `k * P_J / levels`.
    pub grid_levels: usize,
    /// Width of the final golden-section bracket.
    pub search_tolerance: f64,
}

impl Default for JammerConfig {
    fn default() -> Self {
        JammerConfig {
            p_j_max: 20.0,
            gamma: 0.5,
            grid_levels: 10,
            search_tolerance: 1e-7,
        }
    }
}

impl JammerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_j_max > 0.0) {
            return Err(Error::Config("p_j_max must be positive".into()));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Config("gamma must be non-negative".into()));
        }
        if self.grid_levels < 2 {
            return Err(Error::Config("jammer grid needs at least 2 levels".into()));
        }
        if !(self.search_tolerance > 0.0) {
            return Err(Error::Config("search tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn action_power(&self, k: usize) -> f64 {
        k as f64 * self.p_j_max / self.grid_levels as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestResponse {
    pub p_j_star: f64,
    /// Whether the maximizer lies strictly inside `(0, P_J)`.
    pub interior: bool,
    pub u_at_star: f64,
}

/// Jammer utility as a function of its own power for fixed BS allocations.
pub fn jammer_payoff(ch: &ChannelRealization, alloc1: (f64, f64), alloc2: (f64, f64), gamma: f64, p_j: f64) -> f64 {
    let prof = StrategyProfile::new(alloc1, alloc2, p_j);
    jammer_utility(&rates_from_sinr(&sinr_vector(ch, &prof)), p_j, gamma)
}

const PROBE_POINTS: usize = 64;
const FALLBACK_GRID: usize = 4096;

/// Maximizes the exact jammer utility over `[0, P_J]`.
///
/// A coarse slope probe confirms unimodality before golden-section search;
/// otherwise a dense grid picks the bracket that is then refined. Both
/// endpoints are always compared, which realizes the clamping to `0` / `P_J`.
pub fn best_response(ch: &ChannelRealization, alloc1: (f64, f64), alloc2: (f64, f64), cfg: &JammerConfig) -> BestResponse {
    let f = |p: f64| jammer_payoff(ch, alloc1, alloc2, cfg.gamma, p);
    let hi = cfg.p_j_max;
    let probe = concavity_probe(ch, alloc1, alloc2, cfg, PROBE_POINTS);
    let inner = if probe.unimodal {
        golden_section_max(f, 0.0, hi, cfg.search_tolerance)
    } else {
        let step = hi / FALLBACK_GRID as f64;
        let best_k = (0..=FALLBACK_GRID)
            .map(|k| (k, f(k as f64 * step)))
            .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc })
            .0;
        let lo = (best_k as f64 - 1.0).max(0.0) * step;
        let up = ((best_k + 1) as f64 * step).min(hi);
        golden_section_max(f, lo, up, cfg.search_tolerance)
    };

    let mut p_star = inner;
    let mut u_star = f(inner);
    for edge in [0.0, hi] {
        let u = f(edge);
        if u >= u_star {
            p_star = edge;
            u_star = u;
        }
    }
    BestResponse {
        p_j_star: p_star,
        interior: p_star > 0.0 && p_star < hi,
        u_at_star: u_star,
    }
}

/// Best response for a full profile; returns the profile with the jammer filled in.
pub fn respond(ch: &ChannelRealization, prof: &StrategyProfile, cfg: &JammerConfig) -> (StrategyProfile, BestResponse) {
    let br = best_response(ch, prof.alloc1(), prof.alloc2(), cfg);
    (prof.with_jammer(br.p_j_star), br)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub unimodal: bool,
    pub sign_changes: usize,
}

/// Samples the jammer utility on a uniform grid over `[0, P_J]` and counts
/// sign changes of the finite-difference slope. Unimodal means at most one
/// change, from rising to falling. Differences within rounding noise count
/// as flat.
pub fn concavity_probe(
    ch: &ChannelRealization,
    alloc1: (f64, f64),
    alloc2: (f64, f64),
    cfg: &JammerConfig,
    n_points: usize,
) -> ConcavityReport {
    let n = n_points.max(10);
    let values: Vec<f64> = (0..n)
        .map(|k| jammer_payoff(ch, alloc1, alloc2, cfg.gamma, cfg.p_j_max * k as f64 / (n - 1) as f64))
        .collect();
    let mut last_sign = 0i8;
    let mut changes = 0;
    let mut falling_to_rising = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        let noise = 64.0 * f64::EPSILON * w[0].abs().max(w[1].abs()).max(1.0);
        let sign = if d > noise {
            1
        } else if d < -noise {
            -1
        } else {
            0
        };
        if sign == 0 {
            continue;
        }
        if last_sign != 0 && sign != last_sign {
            changes += 1;
            if last_sign < 0 {
                falling_to_rising = true;
            }
        }
        last_sign = sign;
    }
    ConcavityReport {
        unimodal: changes <= 1 && !falling_to_rising,
        sign_changes: changes,
    }
}

/// What the learning jammer sees: the previous slot's BS total powers,
/// quantized on `[0, p_bs_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct JammerObservation {
    pub bs1: usize,
    pub bs2: usize,
}

impl JammerObservation {
    pub fn quantize(p_bs1: f64, p_bs2: f64, p_bs_max: f64, levels: usize) -> Self {
        let q = |p: f64| ((p / p_bs_max * levels as f64).round().max(0.0) as usize).min(levels);
        JammerObservation { bs1: q(p_bs1), bs2: q(p_bs2) }
    }

    fn index(&self, levels: usize) -> usize {
        self.bs1 * (levels + 1) + self.bs2
    }
}

/// Tabular Q-learning jammer rewarded with its own utility.
#[derive(Debug, Clone)]
pub struct JammerAgent {
    pub table: QTable,
    pub schedule: EpsilonSchedule,
    pub cfg: JammerConfig,
    obs_levels: usize,
    pending: Option<(usize, usize)>,
    rng: ChaCha8Rng,
}

impl JammerAgent {
    /// `obs_levels` is the quantization of each BS power in the observation.
    pub fn new(cfg: JammerConfig, obs_levels: usize, alpha: f64, delta: f64, schedule: EpsilonSchedule, seed: u64) -> Self {
        let n_states = (obs_levels + 1) * (obs_levels + 1);
        JammerAgent {
            table: QTable::new(n_states, cfg.grid_levels + 1, alpha, delta),
            schedule,
            cfg,
            obs_levels,
            pending: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn obs_levels(&self) -> usize {
        self.obs_levels
    }

    /// Chooses a jamming power for this slot and remembers the decision.
    pub fn act(&mut self, obs: JammerObservation) -> f64 {
        let s = obs.index(self.obs_levels);
        let a = select_action(self.table.row(s), self.schedule.epsilon(), &mut self.rng);
        self.pending = Some((s, a));
        self.cfg.action_power(a)
    }

    /// Credits the last decision with `reward` and moves to `next_obs`.
    pub fn learn(&mut self, reward: f64, next_obs: JammerObservation) {
        if let Some((s, a)) = self.pending.take() {
            self.table.update(s, a, reward, next_obs.index(self.obs_levels));
        }
        self.schedule.advance();
    }
}

/// One learning-jammer step: choose a power for `obs`, then credit the
/// resulting utility `reward_of(p_j)` and move to `next_obs`.
pub fn jql_step<F>(agent: &mut JammerAgent, obs: JammerObservation, next_obs: JammerObservation, reward_of: F) -> f64
where
    F: FnOnce(f64) -> f64,
{
    let p_j = agent.act(obs);
    agent.learn(reward_of(p_j), next_obs);
    p_j
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channels, Fading, Geometry};

    fn default_channel(seed: u64) -> ChannelRealization {
        draw_channels(&Geometry::default(), seed, Fading::Rayleigh).unwrap()
    }

    #[test]
    fn zero_cost_jams_at_full_power() {
        let cfg = JammerConfig { gamma: 0.0, ..JammerConfig::default() };
        for seed in 0..20 {
            let br = best_response(&default_channel(seed), (20.0, 10.0), (15.0, 5.0), &cfg);
            assert_eq!(br.p_j_star, cfg.p_j_max);
            assert!(!br.interior);
        }
    }

    #[test]
    fn prohibitive_cost_stays_silent() {
        let ch = default_channel(1);
        let (a1, a2) = ((20.0, 10.0), (15.0, 5.0));
        let base = JammerConfig::default();
        let drop = jammer_payoff(&ch, a1, a2, 0.0, base.p_j_max) - jammer_payoff(&ch, a1, a2, 0.0, 0.0);
        // any gamma above the full-power rate drop per unit power
        let cfg = JammerConfig { gamma: 10.0 * (drop / base.p_j_max + 1e3), ..base };
        let br = best_response(&ch, a1, a2, &cfg);
        assert_eq!(br.p_j_star, 0.0);
    }

    #[test]
    fn matches_dense_grid() {
        use rand::Rng;
        let cfg = JammerConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let step = cfg.p_j_max / n as f64;
        for seed in 0..5 {
            let ch = default_channel(seed);
            let a1 = (rng.random_range(0.1..30.0), rng.random_range(0.1..10.0));
            let a2 = (rng.random_range(0.1..30.0), rng.random_range(0.1..10.0));
            let br = best_response(&ch, a1, a2, &cfg);
            let (k_best, _) = (0..=n)
                .map(|k| (k, jammer_payoff(&ch, a1, a2, cfg.gamma, k as f64 * step)))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            assert!((br.p_j_star - k_best as f64 * step).abs() <= step, "seed {seed}");
            assert_eq!(br.u_at_star, jammer_payoff(&ch, a1, a2, cfg.gamma, br.p_j_star));
        }
    }

    #[test]
    fn gamma_never_raises_jamming() {
        let ch = default_channel(3);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let cfg = JammerConfig { gamma: 0.05 * k as f64, ..JammerConfig::default() };
            let p = best_response(&ch, (25.0, 5.0), (12.0, 8.0), &cfg).p_j_star;
            assert!(p <= last + 1e-6, "gamma {} gave {p} after {last}", cfg.gamma);
            last = p;
        }
    }

    #[test]
    fn probe_on_zero_cost_and_blind_jammer() {
        let cfg0 = JammerConfig { gamma: 0.0, ..JammerConfig::default() };
        assert!(concavity_probe(&default_channel(2), (20.0, 10.0), (20.0, 10.0), &cfg0, 200).unimodal);
        let ch = ChannelRealization::from_gains([[30.0, 20.0, 0.0], [4e5, 3.0, 0.0], [5.0, 900.0, 0.0], [2.0, 4e5, 0.0]], 0).unwrap();
        let r = concavity_probe(&ch, (20.0, 10.0), (20.0, 10.0), &JammerConfig::default(), 200);
        assert!(r.unimodal);
        assert_eq!(r.sign_changes, 0);
    }

    #[test]
    fn learning_jammer_greedy_and_uniform_exploration() {
        let cfg = JammerConfig::default();
        let mut agent = JammerAgent::new(cfg, 4, 0.2, 0.7, EpsilonSchedule::constant(0.0), 1);
        let obs = JammerObservation::quantize(30.0, 20.0, 40.0, 4);
        agent.table.set(obs.index(4), 3, 1.0);
        assert_eq!(agent.act(obs), cfg.action_power(3));

        let mut agent = JammerAgent::new(cfg, 4, 0.2, 0.7, EpsilonSchedule::constant(1.0), 2);
        let n = 100_000;
        let mut counts = vec![0usize; cfg.grid_levels + 1];
        for _ in 0..n {
            let p = agent.act(obs);
            counts[(p / cfg.p_j_max * cfg.grid_levels as f64).round() as usize] += 1;
        }
        // greedy action 0 of an all-zero table is never drawn, the rest are uniform
        assert_eq!(counts[0], 0);
        let m = (cfg.grid_levels) as f64;
        let expect = n as f64 / m;
        let sd = (n as f64 * (1.0 / m) * (1.0 - 1.0 / m)).sqrt();
        for c in &counts[1..] {
            assert!((*c as f64 - expect).abs() < 3.0 * sd + 1.0, "{counts:?}");
        }
    }

    #[test]
    fn learning_jammer_approaches_best_response() {
        let cfg = JammerConfig::default();
        let ch = default_channel(4);
        let (a1, a2) = ((30.0, 10.0), (25.0, 10.0));
        let br = best_response(&ch, a1, a2, &cfg);
        let mut agent = JammerAgent::new(cfg, 4, 0.2, 0.7, EpsilonSchedule::new(0.9, 0.998, 0.0), 3);
        let obs = JammerObservation::quantize(a1.0 + a1.1, a2.0 + a2.1, 40.0, 4);
        let mut chosen = Vec::new();
        for _ in 0..10_000 {
            let p = jql_step(&mut agent, obs, obs, |p| jammer_payoff(&ch, a1, a2, cfg.gamma, p));
            chosen.push(p);
        }
        let tail = &chosen[chosen.len() - 1000..];
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        assert!(
            (mean - br.p_j_star).abs() <= cfg.p_j_max / cfg.grid_levels as f64,
            "mean {mean} vs best response {}",
            br.p_j_star
        );
    }
}
