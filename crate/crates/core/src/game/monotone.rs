use serde::{Deserialize, Serialize};

use super::path::{settle, Alloc};
use super::GameContext;

/// Violation counts of the derivative-sign and concavity claims over a set of
/// grid profiles.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// Shifting power from strong to weak user within BS1 should not raise utility.
    pub p1_checks: usize,
    pub p1_violations: usize,
    pub p3_checks: usize,
    pub p3_violations: usize,
    /// Second differences of `2^U` along each total power, weak user at threshold.
    pub concavity_checks: usize,
    pub concavity_violations: usize,
    /// Points where the QoS pattern changes inside the stencil.
    pub skipped: usize,
}

impl MonotonicityReport {
    pub fn violations(&self) -> usize {
        self.p1_violations + self.p3_violations + self.concavity_violations
    }
}

fn tol(u: f64) -> f64 {
    1e-9 * u.abs().max(1.0)
}

/// Finite-difference sign and curvature checks at every profile in `region`
/// (pairs of grid indices).
pub fn monotonicity_check(ctx: &GameContext, region: &[(usize, usize)]) -> MonotonicityReport {
    let mut rep = MonotonicityReport::default();
    let h = 1e-3 * ctx.grid.step();
    let p_max = ctx.grid.p_bs_max();
    for &(i, j) in region {
        let centre = ctx.joint(i, j);
        let (a1, a2) = (centre.profile.alloc1(), centre.profile.alloc2());

        for cell in 0..2 {
            let (w, s) = if cell == 0 { a1 } else { a2 };
            if w < h || s < h {
                continue;
            }
            let shifted = |d: f64| {
                if cell == 0 {
                    ctx.evaluate((w + d, s - d), a2)
                } else {
                    ctx.evaluate(a1, (w + d, s - d))
                }
            };
            let (lo, hi) = (shifted(-h), shifted(h));
            if lo.report.qos_ok != centre.report.qos_ok || hi.report.qos_ok != centre.report.qos_ok {
                rep.skipped += 1;
                continue;
            }
            let bad = hi.utility() - lo.utility() > tol(centre.utility());
            if cell == 0 {
                rep.p1_checks += 1;
                rep.p1_violations += bad as usize;
            } else {
                rep.p3_checks += 1;
                rep.p3_violations += bad as usize;
            }
        }

        let step = 0.5 * ctx.grid.step();
        for cell in 0..2 {
            let x = if cell == 0 { centre.profile.p_bs1() } else { centre.profile.p_bs2() };
            if x - step <= 0.0 || x + step > p_max {
                continue;
            }
            let at = |t: f64| {
                if cell == 0 {
                    settle(ctx, Alloc::Binding(t), Alloc::Fixed(a2.0, a2.1))
                } else {
                    settle(ctx, Alloc::Fixed(a1.0, a1.1), Alloc::Binding(t))
                }
            };
            let pts = [at(x - step), at(x), at(x + step)];
            if pts.iter().any(|p| !p.feasible) {
                rep.skipped += 1;
                continue;
            }
            let v = pts.map(|p| p.value.exp2());
            rep.concavity_checks += 1;
            rep.concavity_violations += (v[0] - 2.0 * v[1] + v[2] > tol(v[1])) as usize;
        }
    }
    rep
}
