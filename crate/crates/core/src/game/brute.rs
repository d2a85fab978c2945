use serde::{Deserialize, Serialize};

use super::StrategyGrid;
use crate::channel::ChannelRealization;
use crate::jammer::{best_response, JammerConfig};
use crate::rates::{bs_utility, rates_from_sinr, sinr_vector, StrategyProfile, UtilityParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteNe {
    pub indices: (usize, usize),
    pub profile: StrategyProfile,
    pub u: f64,
}

/// Enumerates every joint grid profile, re-solving the jammer for each, and
/// keeps those where no unilateral switch raises the deviating base
/// station's utility by more than `eps`.
pub fn brute_force_ne(
    ch: &ChannelRealization,
    grid: &StrategyGrid,
    jammer: &JammerConfig,
    params: &UtilityParams,
    eps: f64,
) -> Vec<BruteNe> {
    let actions = grid.actions();
    let n = actions.len();
    let mut profiles = Vec::with_capacity(n * n);
    let mut utility = vec![0.0; n * n];
    for (i, &a1) in actions.iter().enumerate() {
        for (j, &a2) in actions.iter().enumerate() {
            let p_j = best_response(ch, a1, a2, jammer).p_j_star;
            let prof = StrategyProfile::new(a1, a2, p_j);
            utility[i * n + j] = bs_utility(&rates_from_sinr(&sinr_vector(ch, &prof)), p_j, params);
            profiles.push(prof);
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let u = utility[i * n + j];
            let bs1_gain = (0..n).any(|k| utility[k * n + j] > u + eps);
            let bs2_gain = (0..n).any(|k| utility[i * n + k] > u + eps);
            if !bs1_gain && !bs2_gain {
                out.push(BruteNe {
                    indices: (i, j),
                    profile: profiles[i * n + j],
                    u,
                });
            }
        }
    }
    out
}
