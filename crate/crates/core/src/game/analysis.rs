use serde::{Deserialize, Serialize};

use super::brute::brute_force_ne;
use super::monotone::{monotonicity_check, MonotonicityReport};
use super::mood::{mood_classify, PsEntry};
use super::ne::{find_ne_l1, find_ne_l2, find_ne_l3, pareto_ne_l1, L2Result, NeCertificate, ParetoChoice};
use super::{GameContext, NE_TOLERANCE};
use crate::error::Result;

/// Everything the game module says about one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeAnalysis {
    pub seed: u64,
    pub levels: usize,
    pub p_bs_max: f64,
    pub mood: u8,
    pub ps: Vec<PsEntry>,
    pub ne_l1: Vec<NeCertificate>,
    pub pareto_l1: Option<ParetoChoice>,
    pub ne_l2: L2Result,
    pub ne_l3: L2Result,
    /// Every grid equilibrium found by exhaustive enumeration.
    pub brute_force: Vec<(usize, usize)>,
    /// Each analytic certificate is among the brute-force equilibria.
    pub all_confirmed: bool,
    /// No brute-force equilibrium beats the Pareto choice.
    pub pareto_undominated: Option<bool>,
    pub slope_sign_disagreements: usize,
    pub monotonicity: MonotonicityReport,
}

impl NeAnalysis {
    pub fn certificates(&self) -> impl Iterator<Item = &NeCertificate> {
        self.ne_l1.iter().chain(&self.ne_l2.set).chain(&self.ne_l3.set)
    }
}

pub fn analyze(ctx: &GameContext) -> Result<NeAnalysis> {
    let mood = mood_classify(ctx);
    let mut ne_l1 = find_ne_l1(ctx, &mood);
    let pareto_l1 = pareto_ne_l1(&ne_l1).ok();
    if let Some(p) = &pareto_l1 {
        for c in ne_l1.iter_mut() {
            if c.indices == p.best.indices {
                c.pareto = true;
                c.tie = p.best.tie;
            }
        }
    }
    let ne_l2 = find_ne_l2(ctx, mood.mood);
    let ne_l3 = find_ne_l3(ctx, mood.mood)?;
    let brute = brute_force_ne(&ctx.ch, &ctx.grid, &ctx.jammer, &ctx.params, NE_TOLERANCE);
    let brute_force: Vec<(usize, usize)> = brute.iter().map(|b| b.indices).collect();
    let pareto_undominated = pareto_l1
        .as_ref()
        .map(|p| brute.iter().all(|b| b.u <= p.best.u + NE_TOLERANCE));

    let mut out = NeAnalysis {
        seed: ctx.ch.seed,
        levels: ctx.grid.levels(),
        p_bs_max: ctx.grid.p_bs_max(),
        mood: mood.mood.number(),
        ps: mood.ps,
        ne_l1,
        pareto_l1,
        ne_l2,
        ne_l3,
        all_confirmed: true,
        brute_force,
        pareto_undominated,
        slope_sign_disagreements: 0,
        monotonicity: MonotonicityReport::default(),
    };
    let confirmed = out.certificates().all(|c| out.brute_force.contains(&c.indices));
    out.all_confirmed = confirmed;
    out.slope_sign_disagreements = out.certificates().filter(|c| !c.evidence.signs_agree).count();
    let region: Vec<(usize, usize)> = out.certificates().map(|c| c.indices).collect();
    out.monotonicity = monotonicity_check(ctx, &region);
    Ok(out)
}
