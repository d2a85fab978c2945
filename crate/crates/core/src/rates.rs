//! SINRs, achievable rates, the QoS-gated network objective and the three
//! players' utilities for a single strategy profile.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Source, USERS};
use crate::error::{Error, Result};

/// Powers chosen by both base stations and the jammer in one slot.
///
/// `p[0]`, `p[1]` belong to BS1 (UE1 weak, UE2 strong); `p[2]`, `p[3]` to BS2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub p: [f64; USERS],
    pub p_j: f64,
}

impl StrategyProfile {
    pub fn new(alloc1: (f64, f64), alloc2: (f64, f64), p_j: f64) -> Self {
        StrategyProfile {
            p: [alloc1.0, alloc1.1, alloc2.0, alloc2.1],
            p_j,
        }
    }

    pub fn p_bs1(&self) -> f64 {
        self.p[0] + self.p[1]
    }

    pub fn p_bs2(&self) -> f64 {
        self.p[2] + self.p[3]
    }

    pub fn alloc1(&self) -> (f64, f64) {
        (self.p[0], self.p[1])
    }

    pub fn alloc2(&self) -> (f64, f64) {
        (self.p[2], self.p[3])
    }

    pub fn with_jammer(mut self, p_j: f64) -> Self {
        self.p_j = p_j;
        self
    }

    /// Checks the per-BS budget and the jammer's power cap.
    pub fn validate(&self, p_bs_max: f64, p_j_max: f64) -> Result<()> {
        if self.p.iter().chain(std::iter::once(&self.p_j)).any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::Domain(format!("negative or non-finite power in {self:?}")));
        }
        let slack = 1e-12 * p_bs_max.max(1.0);
        if self.p_bs1() > p_bs_max + slack || self.p_bs2() > p_bs_max + slack {
            return Err(Error::Domain(format!("BS power budget {p_bs_max} exceeded")));
        }
        if self.p_j > p_j_max {
            return Err(Error::Domain(format!("jammer power {} above {p_j_max}", self.p_j)));
        }
        Ok(())
    }
}

/// QoS threshold, jamming cost and soft-indicator floor shared by all utilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityParams {
    /// Minimum per-user rate, bit/s/Hz.
    pub r0: f64,
    /// Cost per unit of jamming power.
    pub gamma: f64,
    /// Value of a failed soft indicator, `0 < z << 1`.
    pub z: f64,
}

impl Default for UtilityParams {
    fn default() -> Self {
        UtilityParams {
            r0: 1.0,
            gamma: 0.5,
            z: 0.01,
        }
    }
}

/// SINRs after SIC: the weak users see intra-cell, cross-cell and jamming
/// interference, the strong users only jamming.
pub fn sinr_vector(ch: &ChannelRealization, prof: &StrategyProfile) -> [f64; USERS] {
    use Source::*;
    let [p1, p2, p3, p4] = prof.p;
    let pj = prof.p_j;
    let g = |u, s| ch.gain(u, s);
    [
        p1 * g(0, Bs1) / (1.0 + p2 * g(0, Bs1) + (p3 + p4) * g(0, Bs2) + pj * g(0, Jammer)),
        p2 * g(1, Bs1) / (1.0 + pj * g(1, Jammer)),
        p3 * g(2, Bs2) / (1.0 + p4 * g(2, Bs2) + (p1 + p2) * g(2, Bs1) + pj * g(2, Jammer)),
        p4 * g(3, Bs2) / (1.0 + pj * g(3, Jammer)),
    ]
}

pub fn rates_from_sinr(sinr: &[f64; USERS]) -> [f64; USERS] {
    sinr.map(|s| s.ln_1p() / std::f64::consts::LN_2)
}

/// Sum rate when every user meets the QoS threshold, zero otherwise.
pub fn objective_p2(rates: &[f64; USERS], r0: f64) -> f64 {
    if min_rate(rates) >= r0 {
        rates.iter().sum()
    } else {
        0.0
    }
}

fn min_rate(rates: &[f64]) -> f64 {
    rates.iter().copied().fold(f64::INFINITY, f64::min)
}

fn soft_indicator(ok: bool, z: f64) -> f64 {
    if ok {
        1.0
    } else {
        z
    }
}

/// True when both users of the cell (0 = BS1, 1 = BS2) reach `r0`.
pub fn cell_qos(rates: &[f64; USERS], cell: usize, r0: f64) -> bool {
    min_rate(&rates[2 * cell..2 * cell + 2]) >= r0
}

/// Shared utility of both base stations: each cell contributes a soft QoS
/// indicator and the payoff is the sum rate plus the jammer's spent cost.
pub fn bs_utility(rates: &[f64; USERS], p_j: f64, params: &UtilityParams) -> f64 {
    let i1 = soft_indicator(cell_qos(rates, 0, params.r0), params.z);
    let i2 = soft_indicator(cell_qos(rates, 1, params.r0), params.z);
    i1 * i2 * (rates.iter().sum::<f64>() + params.gamma * p_j)
}

pub fn jammer_utility(rates: &[f64; USERS], p_j: f64, gamma: f64) -> f64 {
    -(rates.iter().sum::<f64>() + gamma * p_j)
}

/// Everything derived from one profile on one channel realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub sinr: [f64; USERS],
    pub rate: [f64; USERS],
    pub qos_ok: [bool; USERS],
    pub objective: f64,
    pub u_bs: f64,
    pub u_jammer: f64,
}

impl RateReport {
    pub fn evaluate(ch: &ChannelRealization, prof: &StrategyProfile, params: &UtilityParams) -> Self {
        let sinr = sinr_vector(ch, prof);
        let rate = rates_from_sinr(&sinr);
        RateReport {
            sinr,
            rate,
            qos_ok: rate.map(|r| r >= params.r0),
            objective: objective_p2(&rate, params.r0),
            u_bs: bs_utility(&rate, prof.p_j, params),
            u_jammer: jammer_utility(&rate, prof.p_j, params.gamma),
        }
    }

    pub fn sum_rate(&self) -> f64 {
        self.rate.iter().sum()
    }
}
