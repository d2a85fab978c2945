use serde::{Deserialize, Serialize};

use super::GameContext;
use crate::channel::{ChannelRealization, Source};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mood {
    /// Some grid total-power pair lets all four users meet QoS.
    One,
    /// No grid profile satisfies every user.
    Two,
}

impl Mood {
    pub fn number(self) -> u8 {
        match self {
            Mood::One => 1,
            Mood::Two => 2,
        }
    }
}

/// A feasible total-power pair and its best feasible split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsEntry {
    pub total_units: (usize, usize),
    pub p_bs1: f64,
    pub p_bs2: f64,
    /// Grid indices of the utility-maximizing feasible split pair.
    pub best: (usize, usize),
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoodReport {
    pub mood: Mood,
    pub ps: Vec<PsEntry>,
}

/// Collects every grid total-power pair for which some split pair meets QoS
/// for all four users against the best-responding jammer.
pub fn mood_classify(ctx: &GameContext) -> MoodReport {
    let g = &ctx.grid;
    let mut ps = Vec::new();
    for &t1 in &g.totals() {
        for &t2 in &g.totals() {
            let mut best: Option<(usize, usize, f64)> = None;
            for &i in &g.splits(t1) {
                for &j in &g.splits(t2) {
                    let e = ctx.joint(i, j);
                    if e.all_ok() && best.is_none_or(|b| e.utility() > b.2) {
                        best = Some((i, j, e.utility()));
                    }
                }
            }
            if let Some((i, j, u)) = best {
                ps.push(PsEntry {
                    total_units: (t1, t2),
                    p_bs1: g.power(t1),
                    p_bs2: g.power(t2),
                    best: (i, j),
                    u,
                });
            }
        }
    }
    MoodReport {
        mood: if ps.is_empty() { Mood::Two } else { Mood::One },
        ps,
    }
}

/// Weak-user power that puts the weak user of `cell` (0 or 1) exactly at the
/// QoS threshold, given both totals and the jammer power.
pub fn qos_binding_split(ch: &ChannelRealization, p_bs1: f64, p_bs2: f64, p_j: f64, r0: f64, cell: usize) -> Result<f64> {
    let (own, other, ch) = match cell {
        0 => (p_bs1, p_bs2, ch.clone()),
        1 => (p_bs2, p_bs1, ch.mirrored()),
        _ => return Err(Error::Domain(format!("cell index {cell} out of range"))),
    };
    let g_own = ch.gain(0, Source::Bs1);
    if !(g_own > 0.0) {
        return Err(Error::Domain("weak user has no gain from its own base station".into()));
    }
    let target = r0.exp2();
    let interference = 1.0 + own * g_own + other * ch.gain(0, Source::Bs2) + p_j * ch.gain(0, Source::Jammer);
    let p_weak = (target - 1.0) * interference / (g_own * target);
    if p_weak > own {
        return Err(Error::InfeasibleSplit {
            required: p_weak,
            available: own,
        });
    }
    Ok(p_weak)
}
