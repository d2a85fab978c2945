use crate::channel::{draw_channels, ChannelRealization};
use crate::error::Result;
use crate::game::StrategyGrid;
use crate::jammer::{best_response, JammerAgent, JammerObservation};
use crate::learn::{selfish_reward, Observation, PowerAgent, Transition};
use crate::rates::{RateReport, StrategyProfile};

use super::config::{ExperimentConfig, JammerMode, Scheme};
use super::record::SlotRecord;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent RNG stream `stream` of run seed `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

/// Channel seed of redraw block `block`; block 0 uses the run seed itself so
/// that analysis and learning runs with the same seed see the same channel.
pub fn channel_seed(seed: u64, block: usize) -> u64 {
    if block == 0 {
        seed
    } else {
        derive_seed(seed, 1000 + block as u64)
    }
}

/// The jammer side of a slot.
#[derive(Debug, Clone)]
pub enum JammerPlayer {
    Learning(Box<JammerAgent>),
    BestResponse,
}

impl JammerPlayer {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Self {
        match cfg.jammer_mode {
            JammerMode::BestResponse => JammerPlayer::BestResponse,
            JammerMode::Learning => JammerPlayer::Learning(Box::new(JammerAgent::new(
                cfg.jammer,
                cfg.grid_levels,
                cfg.jammer_alpha,
                cfg.delta,
                cfg.epsilon,
                seed,
            ))),
        }
    }
}

/// Per-seed simulation state shared by both base stations.
#[derive(Debug, Clone)]
pub struct Env {
    cfg: ExperimentConfig,
    grid: StrategyGrid,
    seed: u64,
    ch: ChannelRealization,
    redraw: bool,
    selfish: bool,
    slot: usize,
    prev_sinr: [f64; 4],
    prev_totals: (f64, f64),
}

impl Env {
    pub fn new(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        let ch = draw_channels(&cfg.geometry, channel_seed(seed, 0), cfg.fading)?;
        let mut env = Self::with_channel(cfg, seed, ch)?;
        env.redraw = cfg.redraw_period > 0;
        Ok(env)
    }

    /// Environment on a fixed, externally drawn realization.
    pub fn with_channel(cfg: &ExperimentConfig, seed: u64, ch: ChannelRealization) -> Result<Self> {
        Ok(Env {
            grid: StrategyGrid::new(cfg.grid_levels, cfg.p_bs_max)?,
            cfg: cfg.clone(),
            seed,
            ch,
            redraw: false,
            selfish: cfg.scheme == Scheme::Qls,
            slot: 0,
            prev_sinr: [0.0; 4],
            prev_totals: (0.0, 0.0),
        })
    }

    pub fn channel(&self) -> &ChannelRealization {
        &self.ch
    }

    pub fn grid(&self) -> &StrategyGrid {
        &self.grid
    }

    pub fn slot(&self) -> usize {
        self.slot
    }

    /// What each base station sees before acting: last slot's quantized SINRs.
    pub fn observations(&self) -> [Observation; 2] {
        let q = &self.cfg.quantizer;
        [Observation::for_bs(0, &self.prev_sinr, q), Observation::for_bs(1, &self.prev_sinr, q)]
    }

    fn maybe_redraw(&mut self) -> Result<()> {
        let period = self.cfg.redraw_period;
        if self.redraw && self.slot > 0 && self.slot % period == 0 {
            self.ch = draw_channels(&self.cfg.geometry, channel_seed(self.seed, self.slot / period), self.cfg.fading)?;
        }
        Ok(())
    }
}

/// One slot: both base stations act on their own observations, then the
/// jammer answers, then rates and rewards are computed and every learner is
/// updated.
pub fn run_slot(env: &mut Env, bs1: &mut dyn PowerAgent, bs2: &mut dyn PowerAgent, jammer: &mut JammerPlayer) -> Result<SlotRecord> {
    env.maybe_redraw()?;
    let obs = env.observations();
    let a1 = bs1.act(&obs[0]);
    let a2 = bs2.act(&obs[1]);
    let (alloc1, alloc2) = (env.grid.action(a1), env.grid.action(a2));

    let p_j = match jammer {
        JammerPlayer::BestResponse => best_response(&env.ch, alloc1, alloc2, &env.cfg.jammer).p_j_star,
        JammerPlayer::Learning(agent) => {
            let seen = JammerObservation::quantize(env.prev_totals.0, env.prev_totals.1, env.cfg.p_bs_max, agent.obs_levels());
            agent.act(seen)
        }
    };
    let profile = StrategyProfile::new(alloc1, alloc2, p_j);
    let rep = RateReport::evaluate(&env.ch, &profile, &env.cfg.params);
    let selfish = [0, 1].map(|c| selfish_reward(&rep.rate, c, p_j, &env.cfg.params));
    let reward = if env.selfish { selfish } else { [rep.u_bs; 2] };

    let q = &env.cfg.quantizer;
    let next = [Observation::for_bs(0, &rep.sinr, q), Observation::for_bs(1, &rep.sinr, q)];
    bs1.learn(&Transition {
        state: obs[0],
        action: a1,
        reward: reward[0],
        next_state: next[0],
    });
    bs2.learn(&Transition {
        state: obs[1],
        action: a2,
        reward: reward[1],
        next_state: next[1],
    });
    if let JammerPlayer::Learning(agent) = jammer {
        let seen = JammerObservation::quantize(profile.p_bs1(), profile.p_bs2(), env.cfg.p_bs_max, agent.obs_levels());
        agent.learn(rep.u_jammer, seen);
    }

    let record = SlotRecord {
        seed: env.seed,
        slot: env.slot,
        channel_seed: env.ch.seed,
        action_bs1: a1,
        action_bs2: a2,
        p: profile.p,
        p_j,
        rate: rep.rate,
        objective: rep.objective,
        u_bs: rep.u_bs,
        reward,
        selfish,
        sum_rate: rep.sum_rate(),
        qos: rep.qos_ok,
    };
    env.prev_sinr = rep.sinr;
    env.prev_totals = (profile.p_bs1(), profile.p_bs2());
    env.slot += 1;
    Ok(record)
}
