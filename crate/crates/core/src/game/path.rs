//! Continuous paths through the strategy space along which a weak user is
//! held at its QoS threshold, used for the slope conditions.

use super::mood::qos_binding_split;
use super::GameContext;
use crate::error::Error;
use crate::jammer::best_response;
use crate::rates::{rates_from_sinr, sinr_vector, StrategyProfile};

#[derive(Debug, Clone, Copy)]
pub(crate) enum Alloc {
    Fixed(f64, f64),
    /// Total power with the weak user at the binding split.
    Binding(f64),
}

impl Alloc {
    fn total(self) -> f64 {
        match self {
            Alloc::Fixed(w, s) => w + s,
            Alloc::Binding(t) => t,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PathPoint {
    pub profile: StrategyProfile,
    /// Sum rate plus jamming cost, without the QoS indicators.
    pub value: f64,
    /// False when a binding split had to be clamped to the whole budget.
    pub feasible: bool,
}

const MAX_SWEEPS: usize = 200;

/// Alternates binding splits and jammer best responses until the jammer's
/// power settles.
pub(crate) fn settle(ctx: &GameContext, a1: Alloc, a2: Alloc) -> PathPoint {
    let (t1, t2) = (a1.total(), a2.total());
    let split = |a: Alloc, cell: usize, p_j: f64| -> ((f64, f64), bool) {
        match a {
            Alloc::Fixed(w, s) => ((w, s), true),
            Alloc::Binding(total) => match qos_binding_split(&ctx.ch, t1, t2, p_j, ctx.params.r0, cell) {
                Ok(w) => ((w, total - w), true),
                Err(Error::InfeasibleSplit { .. }) => ((total, 0.0), false),
                Err(_) => ((0.0, total), false),
            },
        }
    };
    let tol = 1e-12 * ctx.jammer.p_j_max.max(1.0);
    let mut p_j = 0.0;
    for _ in 0..MAX_SWEEPS {
        let (x1, _) = split(a1, 0, p_j);
        let (x2, _) = split(a2, 1, p_j);
        let next = best_response(&ctx.ch, x1, x2, &ctx.jammer).p_j_star;
        let done = (next - p_j).abs() <= tol;
        p_j = next;
        if done {
            break;
        }
    }
    let (x1, f1) = split(a1, 0, p_j);
    let (x2, f2) = split(a2, 1, p_j);
    let profile = StrategyProfile::new(x1, x2, p_j);
    let rates = rates_from_sinr(&sinr_vector(&ctx.ch, &profile));
    PathPoint {
        profile,
        value: rates.iter().sum::<f64>() + ctx.params.gamma * p_j,
        feasible: f1 && f2,
    }
}

/// Central finite difference of `f` at `x`, one-sided when `x` sits within a
/// step of either end of `[lo, hi]`.
pub(crate) fn slope<F: Fn(f64) -> f64>(f: F, x: f64, lo: f64, hi: f64, h: f64) -> f64 {
    let a = (x - h).max(lo);
    let b = (x + h).min(hi);
    if b <= a {
        return 0.0;
    }
    (f(b) - f(a)) / (b - a)
}
