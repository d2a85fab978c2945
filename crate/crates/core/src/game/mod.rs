//! The base stations' game with the jammer folded in as its best response:
//! Mood classification, analytic equilibrium finders, a brute-force
//! equilibrium oracle and numerical checks of the monotonicity claims.
//!
//! Every result is relative to a [`StrategyGrid`]; certificates say nothing
//! about equilibria that fall between grid points.

mod analysis;
mod brute;
mod grid;
mod monotone;
mod mood;
mod ne;
mod path;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::jammer::{best_response, BestResponse, JammerConfig};
use crate::rates::{RateReport, StrategyProfile, UtilityParams};

pub use analysis::{analyze, NeAnalysis};
pub use brute::{brute_force_ne, BruteNe};
pub use grid::StrategyGrid;
pub use monotone::{monotonicity_check, MonotonicityReport};
pub use mood::{mood_classify, qos_binding_split, Mood, MoodReport, PsEntry};
pub use ne::{
    find_ne_l1, find_ne_l2, find_ne_l3, pareto_ne_l1, printed_eq1, printed_eq2, printed_l2_factor, L2Result, NeCertificate,
    NeClass, ParetoChoice, SlopeEvidence,
};

/// Utility tolerance for equilibrium and tie decisions.
pub const NE_TOLERANCE: f64 = 1e-9;

/// One joint grid profile with the jammer at its best response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointEval {
    pub profile: StrategyProfile,
    pub best_response: BestResponse,
    pub report: RateReport,
}

impl JointEval {
    pub fn utility(&self) -> f64 {
        self.report.u_bs
    }

    pub fn cell_ok(&self, cell: usize) -> bool {
        self.report.qos_ok[2 * cell] && self.report.qos_ok[2 * cell + 1]
    }

    pub fn all_ok(&self) -> bool {
        self.report.qos_ok.iter().all(|&q| q)
    }
}

/// A channel realization, a grid and the utility parameters, with every joint
/// grid profile evaluated up front.
#[derive(Debug, Clone)]
pub struct GameContext {
    pub ch: ChannelRealization,
    pub grid: StrategyGrid,
    pub jammer: JammerConfig,
    pub params: UtilityParams,
    table: Vec<JointEval>,
}

impl GameContext {
    pub fn new(ch: ChannelRealization, grid: StrategyGrid, jammer: JammerConfig, params: UtilityParams) -> Result<Self> {
        jammer.validate()?;
        if jammer.gamma != params.gamma {
            return Err(Error::Config(format!(
                "jammer cost {} differs from utility cost {}",
                jammer.gamma, params.gamma
            )));
        }
        let mut ctx = GameContext {
            ch,
            grid,
            jammer,
            params,
            table: Vec::new(),
        };
        let n = ctx.grid.len();
        ctx.table = (0..n * n)
            .map(|k| ctx.evaluate(ctx.grid.action(k / n), ctx.grid.action(k % n)))
            .collect();
        Ok(ctx)
    }

    /// Best-response evaluation at arbitrary (off-grid) allocations.
    pub fn evaluate(&self, alloc1: (f64, f64), alloc2: (f64, f64)) -> JointEval {
        let br = best_response(&self.ch, alloc1, alloc2, &self.jammer);
        let profile = StrategyProfile::new(alloc1, alloc2, br.p_j_star);
        JointEval {
            report: RateReport::evaluate(&self.ch, &profile, &self.params),
            profile,
            best_response: br,
        }
    }

    pub fn joint(&self, i: usize, j: usize) -> &JointEval {
        &self.table[i * self.grid.len() + j]
    }

    pub fn utility(&self, i: usize, j: usize) -> f64 {
        self.joint(i, j).utility()
    }

    /// Smallest utility loss over all unilateral grid deviations of either
    /// base station; infinite when no deviation exists.
    pub fn deviation_margin(&self, i: usize, j: usize) -> f64 {
        let u = self.utility(i, j);
        let n = self.grid.len();
        let bs1 = (0..n).filter(|&k| k != i).map(|k| u - self.utility(k, j));
        let bs2 = (0..n).filter(|&k| k != j).map(|k| u - self.utility(i, k));
        bs1.chain(bs2).fold(f64::INFINITY, f64::min)
    }

    pub fn is_ne(&self, i: usize, j: usize) -> bool {
        self.deviation_margin(i, j) >= -NE_TOLERANCE
    }

    /// The same game with the cells relabeled.
    pub fn mirrored(&self) -> Result<GameContext> {
        GameContext::new(self.ch.mirrored(), self.grid.clone(), self.jammer, self.params)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::channel::{draw_channels, Fading, Geometry};

    pub fn default_ctx(seed: u64, levels: usize, zero_weak: bool) -> GameContext {
        let ch = draw_channels(&Geometry::default(), seed, Fading::Rayleigh).unwrap();
        let grid = if zero_weak {
            StrategyGrid::with_zero_weak(levels, 40.0).unwrap()
        } else {
            StrategyGrid::new(levels, 40.0).unwrap()
        };
        GameContext::new(ch, grid, JammerConfig::default(), UtilityParams::default()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::default_ctx;
    use super::*;
    use crate::jammer::best_response;

    #[test]
    fn table_holds_best_response_jammer() {
        let ctx = default_ctx(3, 4, false);
        for i in 0..ctx.grid.len() {
            for j in 0..ctx.grid.len() {
                let e = ctx.joint(i, j);
                let br = best_response(&ctx.ch, ctx.grid.action(i), ctx.grid.action(j), &ctx.jammer);
                assert_eq!(e.profile.p_j, br.p_j_star);
                assert_eq!(e.profile.alloc1(), ctx.grid.action(i));
            }
        }
    }

    #[test]
    fn single_action_grid_is_trivially_ne() {
        let ch = ChannelRealization::from_gains([[1.0; 3]; 4], 0).unwrap();
        let ctx = GameContext::new(
            ch,
            StrategyGrid::new(2, 10.0).unwrap(),
            JammerConfig::default(),
            UtilityParams::default(),
        )
        .unwrap();
        assert_eq!(ctx.deviation_margin(0, 0), f64::INFINITY);
        assert!(ctx.is_ne(0, 0));
    }

    #[test]
    fn mismatched_costs_rejected() {
        let ch = ChannelRealization::from_gains([[1.0; 3]; 4], 0).unwrap();
        let jam = JammerConfig { gamma: 0.1, ..JammerConfig::default() };
        assert!(GameContext::new(ch, StrategyGrid::new(3, 1.0).unwrap(), jam, UtilityParams::default()).is_err());
    }
}
