use serde::{Deserialize, Serialize};

use super::mood::{Mood, MoodReport};
use super::path::{settle, slope, Alloc};
use super::{GameContext, NE_TOLERANCE};
use crate::channel::{ChannelRealization, Source};
use crate::error::{Error, Result};
use crate::numeric::bisect;
use crate::rates::StrategyProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NeClass {
    #[serde(rename = "NE_L1")]
    L1,
    #[serde(rename = "NE_L2")]
    L2,
    #[serde(rename = "NE_L3")]
    L3,
    #[serde(rename = "none")]
    None,
}

/// Slope information behind a certificate.
///
/// `slope_bs*` is the finite-difference slope of the sum rate plus jamming
/// cost along the base station's own total power with its weak user held at
/// the QoS threshold (its sign is that of the derivative of `2^U`). The
/// `printed_*` values are the closed-form expressions from the literature,
/// kept for comparison only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeEvidence {
    pub slope_bs1: f64,
    pub slope_bs2: f64,
    pub printed_bs1: Option<f64>,
    pub printed_bs2: Option<f64>,
    pub signs_agree: bool,
    /// The sign-dependent one-step move check passed for both base stations.
    pub grid_condition: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeCertificate {
    pub profile: StrategyProfile,
    /// Grid indices of the two base stations' actions.
    pub indices: (usize, usize),
    pub class: NeClass,
    pub mood: u8,
    pub pareto: bool,
    /// Another equilibrium of the same class reaches the same utility within tolerance.
    pub tie: bool,
    /// Smallest utility loss over unilateral grid deviations; only meaningful at grid resolution.
    pub deviation_margin: f64,
    pub u: f64,
    pub rates: [f64; 4],
    pub evidence: SlopeEvidence,
}

fn strong_gain(ch: &ChannelRealization, user: usize, own: Source, p_j: f64) -> f64 {
    ch.gain(user, own) / (1.0 + p_j * ch.gain(user, Source::Jammer))
}

fn printed_prefactor(ch: &ChannelRealization, p_j: f64, r0: f64, gamma: f64) -> f64 {
    strong_gain(ch, 1, Source::Bs1, p_j) * strong_gain(ch, 3, Source::Bs2, p_j) * (gamma * p_j + 2.0 * r0).exp2()
}

/// Closed-form first-cell slope expression as printed for the all-QoS regime.
pub fn printed_eq1(ch: &ChannelRealization, p_bs1: f64, p_bs2: f64, p_j: f64, r0: f64, gamma: f64) -> f64 {
    use Source::*;
    let g = |u, s| ch.gain(u, s);
    let c = r0.exp2();
    let x31 = g(2, Bs1) / g(2, Bs2);
    let x12 = g(0, Bs2) / g(0, Bs1);
    let bracket = -2.0 * p_bs1 / c * x31 + (1.0 / (c * c) + x31 * x12) * p_bs2 - (1.0 + p_j * g(2, Jammer)) / (c * g(2, Bs2))
        + x31 * (1.0 + p_j * g(0, Jammer)) / g(0, Bs1);
    printed_prefactor(ch, p_j, r0, gamma) * bracket
}

/// Second-cell counterpart of [`printed_eq1`].
pub fn printed_eq2(ch: &ChannelRealization, p_bs1: f64, p_bs2: f64, p_j: f64, r0: f64, gamma: f64) -> f64 {
    use Source::*;
    let g = |u, s| ch.gain(u, s);
    let c = r0.exp2();
    let x31 = g(2, Bs1) / g(2, Bs2);
    let x12 = g(0, Bs2) / g(0, Bs1);
    let bracket = -2.0 * p_bs2 / c * x12 + (1.0 / (c * c) + x31 * x12) * p_bs1 - (1.0 + p_j * g(0, Jammer)) / (c * g(0, Bs1))
        + x12 * (1.0 + p_j * g(2, Jammer)) / g(2, Bs2);
    printed_prefactor(ch, p_j, r0, gamma) * bracket
}

/// Printed slope factor for the regime where cell 1 gives up on QoS and BS2
/// runs at full power. Its zero in `p_bs1` marks the Pareto point.
pub fn printed_l2_factor(ch: &ChannelRealization, p_bs1: f64, p_bs_max: f64, p_j: f64, r0: f64) -> f64 {
    use Source::*;
    let g = |u, s| ch.gain(u, s);
    let lead = p_bs_max / r0.exp2() - 2.0 * g(2, Bs1) / g(2, Bs2) * p_bs1 - (1.0 + p_j * g(2, Jammer)) / g(2, Bs2);
    lead * strong_gain(ch, 3, Bs2, p_j) * strong_gain(ch, 1, Bs1, p_j)
}

/// Best utility over one base station's actions that spend `total` steps,
/// the other base station's action held at `other`.
fn best_at_total(ctx: &GameContext, bs: usize, total: usize, other: usize) -> Option<f64> {
    ctx.grid
        .splits(total)
        .into_iter()
        .map(|k| if bs == 0 { ctx.utility(k, other) } else { ctx.utility(other, k) })
        .reduce(f64::max)
}

/// Grid reading of the slope conditions: with a non-negative slope the base
/// station must gain nothing from one more step of total power, with a
/// negative slope nothing from one step less.
fn one_step_condition(ctx: &GameContext, bs: usize, own: usize, other: usize, slope: f64) -> bool {
    let t = ctx.grid.total_units(own);
    let u = if bs == 0 { ctx.utility(own, other) } else { ctx.utility(other, own) };
    let neighbour = if slope >= 0.0 { t + 1 } else { t.wrapping_sub(1) };
    match best_at_total(ctx, bs, neighbour, other) {
        Some(v) => v <= u + NE_TOLERANCE,
        None => true,
    }
}

fn step_h(ctx: &GameContext) -> f64 {
    1e-5 * ctx.grid.p_bs_max()
}

fn certificate(ctx: &GameContext, i: usize, j: usize, class: NeClass, mood: Mood, evidence: SlopeEvidence) -> NeCertificate {
    let e = ctx.joint(i, j);
    NeCertificate {
        profile: e.profile,
        indices: (i, j),
        class,
        mood: mood.number(),
        pareto: false,
        tie: false,
        deviation_margin: ctx.deviation_margin(i, j),
        u: e.utility(),
        rates: e.report.rate,
        evidence,
    }
}

/// Equilibria in the regime where every user can meet QoS: for each feasible
/// total-power pair, the best feasible split pair is checked against the
/// sign-dependent slope conditions and then certified against all
/// unilateral grid deviations.
pub fn find_ne_l1(ctx: &GameContext, mood: &MoodReport) -> Vec<NeCertificate> {
    if mood.mood != Mood::One {
        return Vec::new();
    }
    let (lo, hi, h) = (0.0, ctx.grid.p_bs_max(), step_h(ctx));
    let mut out = Vec::new();
    for entry in &mood.ps {
        let (i, j) = entry.best;
        let e = ctx.joint(i, j);
        let a1 = e.profile.alloc1();
        let a2 = e.profile.alloc2();
        let s1 = slope(|x| settle(ctx, Alloc::Binding(x), Alloc::Fixed(a2.0, a2.1)).value, entry.p_bs1, lo, hi, h);
        let s2 = slope(|y| settle(ctx, Alloc::Fixed(a1.0, a1.1), Alloc::Binding(y)).value, entry.p_bs2, lo, hi, h);
        let (r0, gamma, pj) = (ctx.params.r0, ctx.params.gamma, e.profile.p_j);
        let eq1 = printed_eq1(&ctx.ch, entry.p_bs1, entry.p_bs2, pj, r0, gamma);
        let eq2 = printed_eq2(&ctx.ch, entry.p_bs1, entry.p_bs2, pj, r0, gamma);
        let signs_agree = (s1 >= 0.0) == (eq1 >= 0.0) && (s2 >= 0.0) == (eq2 >= 0.0);
        if !signs_agree {
            log::debug!(
                "seed {}: printed slope signs ({eq1:.3e}, {eq2:.3e}) disagree with numeric ({s1:.3e}, {s2:.3e}) at {:?}",
                ctx.ch.seed,
                entry.total_units
            );
        }
        let grid_condition = one_step_condition(ctx, 0, i, j, s1) && one_step_condition(ctx, 1, j, i, s2);
        let evidence = SlopeEvidence {
            slope_bs1: s1,
            slope_bs2: s2,
            printed_bs1: Some(eq1),
            printed_bs2: Some(eq2),
            signs_agree,
            grid_condition,
        };
        if grid_condition && ctx.is_ne(i, j) {
            out.push(certificate(ctx, i, j, NeClass::L1, Mood::One, evidence));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoChoice {
    pub best: NeCertificate,
    /// Indices of the other equilibria within tolerance of the best utility.
    pub ties: Vec<(usize, usize)>,
}

/// Utility-maximizing equilibrium; ties within tolerance go to the first in
/// grid order and are reported.
pub fn pareto_ne_l1(set: &[NeCertificate]) -> Result<ParetoChoice> {
    let top = set
        .iter()
        .map(|c| c.u)
        .reduce(f64::max)
        .ok_or_else(|| Error::Domain("no equilibrium to choose from".into()))?;
    let mut near: Vec<&NeCertificate> = set.iter().filter(|c| c.u >= top - NE_TOLERANCE).collect();
    near.sort_by_key(|c| c.indices);
    let mut best = near[0].clone();
    best.pareto = true;
    best.tie = near.len() > 1;
    if best.tie {
        log::info!("Pareto tie between {:?}", near.iter().map(|c| c.indices).collect::<Vec<_>>());
    }
    Ok(ParetoChoice {
        ties: near[1..].iter().map(|c| c.indices).collect(),
        best,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L2Result {
    pub set: Vec<NeCertificate>,
    pub pne: Option<NeCertificate>,
    /// Zero of the printed slope factor in the sacrificing base station's total power.
    pub p_bar: Option<f64>,
}

/// Equilibria where cell 1 cannot meet QoS: BS1 keeps its weak user at the
/// smallest grid power, BS2 spends its full budget with cell 2 feasible.
pub fn find_ne_l2(ctx: &GameContext, mood: Mood) -> L2Result {
    let mut res = L2Result {
        set: Vec::new(),
        pne: None,
        p_bar: None,
    };
    if mood != Mood::Two {
        return res;
    }
    let g = &ctx.grid;
    let (levels, p_max, h) = (g.levels(), g.p_bs_max(), step_h(ctx));
    let w0 = g.min_weak_units();
    let weak = g.power(w0);
    let full = g.splits(levels);
    let path = |x: f64| settle(ctx, Alloc::Fixed(weak, x - weak), Alloc::Binding(p_max));

    for t1 in (w0 + 1)..=levels {
        let Some(i) = g.index_of((w0, t1 - w0)) else { continue };
        let Some(j) = full
            .iter()
            .copied()
            .filter(|&j| ctx.joint(i, j).cell_ok(1))
            .reduce(|a, b| if ctx.utility(i, b) > ctx.utility(i, a) { b } else { a })
        else {
            continue;
        };
        if g.splits(t1).iter().any(|&k| ctx.joint(k, j).cell_ok(0)) {
            continue;
        }
        let e = ctx.joint(i, j);
        let a1 = e.profile.alloc1();
        let p_bs1 = g.power(t1);
        let s1 = slope(|x| path(x).value, p_bs1, weak, p_max, h);
        let s2 = slope(|y| settle(ctx, Alloc::Fixed(a1.0, a1.1), Alloc::Binding(y)).value, p_max, 0.0, p_max, h);
        let printed = printed_l2_factor(&ctx.ch, p_bs1, p_max, e.profile.p_j, ctx.params.r0);
        let signs_agree = (s1 >= 0.0) == (printed >= 0.0);
        if !signs_agree {
            log::debug!("seed {}: printed factor {printed:.3e} vs numeric slope {s1:.3e} at p_bs1 = {p_bs1}", ctx.ch.seed);
        }
        let grid_condition = one_step_condition(ctx, 0, i, j, s1);
        let evidence = SlopeEvidence {
            slope_bs1: s1,
            slope_bs2: s2,
            printed_bs1: Some(printed),
            printed_bs2: None,
            signs_agree,
            grid_condition,
        };
        if grid_condition && ctx.is_ne(i, j) {
            res.set.push(certificate(ctx, i, j, NeClass::L2, Mood::Two, evidence));
        }
    }

    let factor = |x: f64| printed_l2_factor(&ctx.ch, x, p_max, path(x).profile.p_j, ctx.params.r0);
    res.p_bar = bisect(factor, weak, p_max, 1e-6 * p_max);
    let pick = match res.p_bar {
        Some(pb) => nearest(&res.set, |c| (c.profile.p_bs1() - pb).abs()),
        None => nearest(&res.set, |c| -c.u),
    };
    if let Some(k) = pick {
        res.set[k].pareto = true;
        res.pne = Some(res.set[k].clone());
    }
    res
}

fn nearest<F: Fn(&NeCertificate) -> f64>(set: &[NeCertificate], key: F) -> Option<usize> {
    (0..set.len()).reduce(|a, b| if key(&set[b]) < key(&set[a]) { b } else { a })
}

/// Mirror image of [`find_ne_l2`]: cell 2 gives up on QoS, BS1 runs at full
/// power. Solved on the relabeled game and mapped back, then re-certified on
/// the original table.
pub fn find_ne_l3(ctx: &GameContext, mood: Mood) -> Result<L2Result> {
    let mirrored = ctx.mirrored()?;
    let res = find_ne_l2(&mirrored, mood);
    let map = |c: &NeCertificate| -> Option<NeCertificate> {
        let (i, j) = (c.indices.1, c.indices.0);
        if !ctx.is_ne(i, j) {
            return None;
        }
        let ev = c.evidence;
        let evidence = SlopeEvidence {
            slope_bs1: ev.slope_bs2,
            slope_bs2: ev.slope_bs1,
            printed_bs1: ev.printed_bs2,
            printed_bs2: ev.printed_bs1,
            ..ev
        };
        let mut out = certificate(ctx, i, j, NeClass::L3, mood, evidence);
        out.pareto = c.pareto;
        Some(out)
    };
    let set: Vec<NeCertificate> = res.set.iter().filter_map(map).collect();
    let pne = set.iter().find(|c| c.pareto).cloned();
    Ok(L2Result {
        set,
        pne,
        p_bar: res.p_bar,
    })
}
