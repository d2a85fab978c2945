use std::collections::HashMap;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::draw_channels;
use crate::error::{Error, Result};
use crate::game::{analyze, GameContext, NeAnalysis, NeCertificate, StrategyGrid};

use super::config::{ExperimentConfig, Scheme};
use super::env::channel_seed;
use super::record::{import_csv, SlotRecord};

/// Power units `(weak, strong)` of both base stations.
pub type JointUnits = [(usize, usize); 2];

/// How a learned run compares with the analytic equilibria of its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedCheck {
    pub scheme: Scheme,
    pub seed: u64,
    /// Why the comparison was not made, if it was not.
    pub skipped: Option<String>,
    pub modal_units: Option<JointUnits>,
    /// Chebyshev distance in grid steps to the nearest certificate.
    pub distance: Option<usize>,
    pub within_one_step: bool,
    pub on_pareto: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub levels: usize,
    pub p_bs_max: f64,
    pub seeds: Vec<NeAnalysis>,
    pub learned: Vec<LearnedCheck>,
}

/// Most frequent joint action over the last `window` slots of `seed`, in
/// grid units; ties go to the lexicographically smallest.
pub fn modal_joint_action(records: &[SlotRecord], seed: u64, window: usize, grid: &StrategyGrid) -> Option<JointUnits> {
    let rows: Vec<&SlotRecord> = records.iter().filter(|r| r.seed == seed).collect();
    let tail = &rows[rows.len().saturating_sub(window)..];
    let mut counts: HashMap<JointUnits, usize> = HashMap::new();
    for r in tail {
        if r.action_bs1 >= grid.len() || r.action_bs2 >= grid.len() {
            return None;
        }
        *counts.entry([grid.units(r.action_bs1), grid.units(r.action_bs2)]).or_default() += 1;
    }
    counts.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(k, _)| k)
}

fn chebyshev(a: JointUnits, b: JointUnits) -> usize {
    let d = |x: usize, y: usize| x.abs_diff(y);
    [d(a[0].0, b[0].0), d(a[0].1, b[0].1), d(a[1].0, b[1].0), d(a[1].1, b[1].1)].into_iter().max().unwrap_or(0)
}

fn cert_units(c: &NeCertificate, grid: &StrategyGrid) -> JointUnits {
    [grid.units(c.indices.0), grid.units(c.indices.1)]
}

/// Nearest certificate to `units` and its Chebyshev distance in grid steps.
pub fn near_certificate<'a>(units: JointUnits, certs: &[&'a NeCertificate], grid: &StrategyGrid) -> Option<(&'a NeCertificate, usize)> {
    certs.iter().map(|c| (*c, chebyshev(units, cert_units(c, grid)))).min_by_key(|(_, d)| *d)
}

/// Equilibrium analysis of one seed on the grid with zero weak power allowed.
pub fn analyze_seed(cfg: &ExperimentConfig, seed: u64) -> Result<NeAnalysis> {
    let ch = draw_channels(&cfg.geometry, channel_seed(seed, 0), cfg.fading)?;
    let ctx = GameContext::new(ch, analysis_grid(cfg)?, cfg.jammer, cfg.params)?;
    analyze(&ctx)
}

fn analysis_grid(cfg: &ExperimentConfig) -> Result<StrategyGrid> {
    if cfg.analysis_zero_weak {
        StrategyGrid::with_zero_weak(cfg.grid_levels, cfg.p_bs_max)
    } else {
        StrategyGrid::new(cfg.grid_levels, cfg.p_bs_max)
    }
}

/// Compares the final-window modal action of a learned run with the
/// certificates of each seed.
pub fn check_learned(cfg: &ExperimentConfig, scheme: Scheme, records: &[SlotRecord], analyses: &[NeAnalysis]) -> Result<Vec<LearnedCheck>> {
    let learn_grid = StrategyGrid::new(cfg.grid_levels, cfg.p_bs_max)?;
    let ne_grid = analysis_grid(cfg)?;
    Ok(analyses
        .iter()
        .map(|a| {
            let skip = |why: &str| LearnedCheck {
                scheme,
                seed: a.seed,
                skipped: Some(why.to_string()),
                modal_units: None,
                distance: None,
                within_one_step: false,
                on_pareto: false,
            };
            let rows: Vec<&SlotRecord> = records.iter().filter(|r| r.seed == a.seed).collect();
            let Some(first) = rows.first() else {
                return skip("seed not in run");
            };
            if first.channel_seed != channel_seed(a.seed, 0) || rows.iter().any(|r| r.channel_seed != first.channel_seed) {
                return skip("channel differs from the analyzed realization");
            }
            let Some(units) = modal_joint_action(records, a.seed, cfg.window, &learn_grid) else {
                return skip("action index outside the grid");
            };
            let certs: Vec<&NeCertificate> = a.certificates().collect();
            let near = near_certificate(units, &certs, &ne_grid);
            let on_pareto = a
                .pareto_l1
                .as_ref()
                .is_some_and(|p| cert_units(&p.best, &ne_grid) == units);
            LearnedCheck {
                scheme,
                seed: a.seed,
                skipped: near.is_none().then(|| "no certificate".to_string()),
                modal_units: Some(units),
                distance: near.map(|(_, d)| d),
                within_one_step: near.is_some_and(|(_, d)| d <= 1),
                on_pareto,
            }
        })
        .collect())
}

/// Analyzes every seed, cross-checks any QLU/DQLU slot logs already in
/// `out_dir`, and writes `ne_analysis.json` there.
pub fn run_ne_analysis(cfg: &ExperimentConfig) -> Result<(AnalysisReport, PathBuf)> {
    cfg.validate()?;
    let seeds: Vec<NeAnalysis> = cfg.seeds.par_iter().map(|&s| analyze_seed(cfg, s)).collect::<Result<_>>()?;
    let dir = Path::new(&cfg.out_dir);
    let mut learned = Vec::new();
    for scheme in [Scheme::Qlu, Scheme::Dqlu] {
        let path = dir.join(format!("{}_slots.csv", scheme.file_stem()));
        if !path.exists() {
            info!("{} not found, skipping the learned-action check", path.display());
            continue;
        }
        match import_csv(&path) {
            Ok(records) => learned.extend(check_learned(cfg, scheme, &records, &seeds)?),
            Err(e) => warn!("cannot read {}: {e}", path.display()),
        }
    }
    let report = AnalysisReport {
        levels: cfg.grid_levels,
        p_bs_max: cfg.p_bs_max,
        seeds,
        learned,
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("ne_analysis.json");
    std::fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(|e| Error::io(&path, e))?;
    Ok((report, path))
}
