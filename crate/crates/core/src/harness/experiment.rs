use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::draw_channels;
use crate::error::{Error, Result};
use crate::learn::{hot_boot, DqnAgent, PowerAgent, QlAgent};

use super::config::{ExperimentConfig, Scheme};
use super::env::{derive_seed, run_slot, Env, JammerPlayer};
use super::metrics::{mean, standard_error, window_mean};
use super::record::{export_csv, SlotRecord};

const STREAM_BS1: u64 = 1;
const STREAM_BS2: u64 = 2;
const STREAM_JAMMER: u64 = 3;
const STREAM_SCENARIO: u64 = 100;
const STREAM_SCENARIO_AGENTS: u64 = 200;

/// One seed's slot stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub records: Vec<SlotRecord>,
    /// Mean training loss per pre-training scenario (hot booting only).
    pub hot_boot_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    /// Shared utility averaged over the last `window` slots.
    pub final_reward: f64,
    pub final_objective: f64,
    pub final_sum_rate: f64,
    pub final_selfish: [f64; 2],
    /// Shared utility averaged over the first `window` slots.
    pub first_reward: f64,
}

/// Across-seed means and standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheme: Scheme,
    pub slots: usize,
    pub window: usize,
    pub per_seed: Vec<SeedSummary>,
    pub final_reward: (f64, f64),
    pub final_objective: (f64, f64),
    pub final_sum_rate: (f64, f64),
    pub first_reward: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub runs: Vec<SeedRun>,
    pub summary: Summary,
}

impl ExperimentOutput {
    /// All records, seeds in config order.
    pub fn records(&self) -> Vec<SlotRecord> {
        self.runs.iter().flat_map(|r| r.records.iter().cloned()).collect()
    }
}

fn ql_pair(cfg: &ExperimentConfig, seed: u64, n_actions: usize) -> [QlAgent; 2] {
    [STREAM_BS1, STREAM_BS2].map(|s| {
        QlAgent::new(cfg.quantizer.levels, n_actions, cfg.alpha_ql, cfg.delta, cfg.epsilon, derive_seed(seed, s))
    })
}

fn dqn_pair(cfg: &ExperimentConfig, seed: u64, n_actions: usize) -> [DqnAgent; 2] {
    [STREAM_BS1, STREAM_BS2]
        .map(|s| DqnAgent::new(n_actions, cfg.quantizer.levels, cfg.dqn_config(), cfg.epsilon, derive_seed(seed, s)))
}

fn run_loop<A: PowerAgent>(
    env: &mut Env,
    agents: &mut [A; 2],
    jammer: &mut JammerPlayer,
    slots: usize,
    mut after_slot: impl FnMut(&[A; 2]),
) -> Result<Vec<SlotRecord>> {
    let mut out = Vec::with_capacity(slots);
    for _ in 0..slots {
        let [a, b] = agents;
        out.push(run_slot(env, a, b, jammer)?);
        after_slot(agents);
    }
    Ok(out)
}

/// Pre-trains a pair of deep agents on freshly drawn realizations of the
/// same geometry and returns them with the per-scenario mean losses.
fn hot_booted_pair(cfg: &ExperimentConfig, seed: u64, n_actions: usize) -> Result<([DqnAgent; 2], Vec<f64>)> {
    let fresh = dqn_pair(cfg, derive_seed(seed, STREAM_SCENARIO_AGENTS), n_actions);
    let mut failure = None;
    let (trained, losses) = hot_boot(cfg.hot_boot_scenarios, cfg.hot_boot_slots, fresh, |k, agents, budget| {
        let k = k as u64;
        let scenario = draw_channels(&cfg.geometry, derive_seed(seed, STREAM_SCENARIO + k), cfg.fading)
            .and_then(|ch| Env::with_channel(cfg, seed, ch));
        let mut env = match scenario {
            Ok(env) => env,
            Err(e) => {
                failure.get_or_insert(e);
                return f64::NAN;
            }
        };
        let mut jammer = JammerPlayer::new(cfg, derive_seed(seed, STREAM_SCENARIO_AGENTS + 1 + k));
        let mut loss = 0.0;
        if let Err(e) = run_loop(&mut env, agents, &mut jammer, budget, |a| loss += a[0].last_loss() + a[1].last_loss()) {
            failure.get_or_insert(e);
        }
        loss / (2 * budget.max(1)) as f64
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let agents = [STREAM_BS1, STREAM_BS2].map(|s| {
        let k = s as usize - 1;
        let schedule = if cfg.hot_boot_keep_epsilon { trained[k].schedule } else { cfg.epsilon };
        DqnAgent::with_params(trained[k].main.clone(), cfg.quantizer.levels, cfg.dqn_config(), schedule, derive_seed(seed, s))
    });
    Ok((agents, losses))
}

/// Runs one seed of a learning scheme.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun> {
    let mut env = Env::new(cfg, seed)?;
    let n_actions = env.grid().len();
    let mut jammer = JammerPlayer::new(cfg, derive_seed(seed, STREAM_JAMMER));
    let mut hot_boot_losses = Vec::new();
    let records = match cfg.scheme {
        Scheme::Qlu | Scheme::Qls => run_loop(&mut env, &mut ql_pair(cfg, seed, n_actions), &mut jammer, cfg.slots, |_| ())?,
        Scheme::Dqlu => run_loop(&mut env, &mut dqn_pair(cfg, seed, n_actions), &mut jammer, cfg.slots, |_| ())?,
        Scheme::Hbdqlu => {
            let (mut agents, losses) = hot_booted_pair(cfg, seed, n_actions)?;
            hot_boot_losses = losses;
            run_loop(&mut env, &mut agents, &mut jammer, cfg.slots, |_| ())?
        }
        Scheme::NeAnalysis => return Err(Error::Config("NE-ANALYSIS is not a learning scheme".into())),
    };
    Ok(SeedRun {
        seed,
        records,
        hot_boot_losses,
    })
}

pub fn summarize(cfg: &ExperimentConfig, runs: &[SeedRun]) -> Summary {
    let w = cfg.window.min(cfg.slots);
    let tail = cfg.slots - w;
    let per_seed: Vec<SeedSummary> = runs
        .iter()
        .map(|r| SeedSummary {
            seed: r.seed,
            final_reward: window_mean(&r.records, tail, cfg.slots, |x| x.u_bs),
            final_objective: window_mean(&r.records, tail, cfg.slots, |x| x.objective),
            final_sum_rate: window_mean(&r.records, tail, cfg.slots, |x| x.sum_rate),
            final_selfish: [0, 1].map(|b| window_mean(&r.records, tail, cfg.slots, |x| x.selfish[b])),
            first_reward: window_mean(&r.records, 0, w, |x| x.u_bs),
        })
        .collect();
    let stat = |f: fn(&SeedSummary) -> f64| {
        let xs: Vec<f64> = per_seed.iter().map(f).collect();
        (mean(&xs), standard_error(&xs))
    };
    Summary {
        scheme: cfg.scheme,
        slots: cfg.slots,
        window: w,
        final_reward: stat(|s| s.final_reward),
        final_objective: stat(|s| s.final_objective),
        final_sum_rate: stat(|s| s.final_sum_rate),
        first_reward: stat(|s| s.first_reward),
        per_seed,
    }
}

/// Runs every seed (in parallel, each seed sequential) and summarizes.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let runs: Vec<SeedRun> = cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect::<Result<_>>()?;
    let summary = summarize(cfg, &runs);
    Ok(ExperimentOutput {
        config: cfg.clone(),
        runs,
        summary,
    })
}

/// Writes `<scheme>_slots.csv`, `<scheme>_summary.json` and the effective
/// config into `dir`; returns the CSV path.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = out.config.scheme.file_stem();
    let csv = dir.join(format!("{stem}_slots.csv"));
    export_csv(&out.records(), &csv)?;
    let json = dir.join(format!("{stem}_summary.json"));
    let text = serde_json::to_string_pretty(&out.summary)?;
    std::fs::write(&json, text).map_err(|e| Error::io(&json, e))?;
    let cfg_path = dir.join(format!("{stem}_config.txt"));
    std::fs::write(&cfg_path, out.config.to_kv_string()).map_err(|e| Error::io(&cfg_path, e))?;
    Ok(csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(scheme: Scheme) -> ExperimentConfig {
        ExperimentConfig {
            scheme,
            slots: 60,
            seeds: vec![1, 2],
            window: 20,
            hot_boot_slots: 40,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn one_seed_one_slot_gives_one_record() {
        let cfg = ExperimentConfig {
            slots: 1,
            seeds: vec![1],
            ..ExperimentConfig::default()
        };
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records().len(), 1);
    }

    #[test]
    fn every_scheme_runs_and_counts_rows() {
        for scheme in Scheme::LEARNING {
            let out = run_experiment(&small(scheme)).unwrap();
            assert_eq!(out.records().len(), 120, "{scheme}");
            assert_eq!(out.runs[1].records[0].seed, 2);
            if scheme == Scheme::Hbdqlu {
                assert_eq!(out.runs[0].hot_boot_losses.len(), 3);
            }
        }
    }

    #[test]
    fn adding_seeds_keeps_earlier_streams() {
        let a = run_experiment(&small(Scheme::Dqlu)).unwrap();
        let mut cfg = small(Scheme::Dqlu);
        cfg.seeds = vec![1, 2, 3, 4];
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.runs[..], b.runs[..2]);
    }

    #[test]
    fn summary_means_match_records() {
        let out = run_experiment(&small(Scheme::Qls)).unwrap();
        for (run, s) in out.runs.iter().zip(&out.summary.per_seed) {
            let tail: Vec<f64> = run.records[40..].iter().map(|r| r.objective).collect();
            assert_eq!(s.final_objective, mean(&tail));
        }
    }

    #[test]
    fn analysis_scheme_is_not_a_learning_run() {
        let cfg = small(Scheme::NeAnalysis);
        assert!(run_seed(&cfg, 1).unwrap_err().is_config());
    }
}
