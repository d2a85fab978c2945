use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quantized per-BS action set: `(p_weak, p_strong)` pairs in multiples of
/// `p_bs_max / levels` with the pair's sum inside the budget.
///
/// Actions are stored as integer step counts, ordered lexicographically by
/// `(weak, strong)`, which is the tie-breaking order everywhere in the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyGrid {
    levels: usize,
    p_bs_max: f64,
    zero_weak: bool,
    units: Vec<(usize, usize)>,
}

impl StrategyGrid {
    /// Learning action set: both powers strictly positive.
    pub fn new(levels: usize, p_bs_max: f64) -> Result<Self> {
        Self::build(levels, p_bs_max, false)
    }

    /// Analysis grid that also contains `(0, k)` actions, so a base station can
    /// give up on its weak user entirely.
    pub fn with_zero_weak(levels: usize, p_bs_max: f64) -> Result<Self> {
        Self::build(levels, p_bs_max, true)
    }

    fn build(levels: usize, p_bs_max: f64, zero_weak: bool) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Config("grid needs at least one power level".into()));
        }
        if !(p_bs_max > 0.0) || !p_bs_max.is_finite() {
            return Err(Error::Config(format!("p_bs_max must be positive, got {p_bs_max}")));
        }
        let first_weak = if zero_weak { 0 } else { 1 };
        let units: Vec<(usize, usize)> = (first_weak..levels)
            .flat_map(|w| (1..=levels - w).map(move |s| (w, s)))
            .collect();
        if units.is_empty() {
            return Err(Error::Config(format!("{levels} level(s) leave no action with both powers positive")));
        }
        Ok(StrategyGrid {
            levels,
            p_bs_max,
            zero_weak,
            units,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn p_bs_max(&self) -> f64 {
        self.p_bs_max
    }

    pub fn has_zero_weak(&self) -> bool {
        self.zero_weak
    }

    /// Power of one grid step.
    pub fn step(&self) -> f64 {
        self.p_bs_max / self.levels as f64
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self, index: usize) -> (usize, usize) {
        self.units[index]
    }

    pub fn action(&self, index: usize) -> (f64, f64) {
        let (w, s) = self.units[index];
        (self.power(w), self.power(s))
    }

    pub fn actions(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|i| self.action(i)).collect()
    }

    pub fn total_units(&self, index: usize) -> usize {
        let (w, s) = self.units[index];
        w + s
    }

    pub fn power(&self, units: usize) -> f64 {
        units as f64 * self.p_bs_max / self.levels as f64
    }

    pub fn index_of(&self, units: (usize, usize)) -> Option<usize> {
        self.units.binary_search(&units).ok()
    }

    /// Indices of all actions spending exactly `total` steps, in grid order.
    pub fn splits(&self, total: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.total_units(i) == total).collect()
    }

    /// Smallest weak-user step count present in the grid.
    pub fn min_weak_units(&self) -> usize {
        if self.zero_weak {
            0
        } else {
            1
        }
    }

    /// Total step counts that some action spends, ascending.
    pub fn totals(&self) -> Vec<usize> {
        let lo = if self.zero_weak { 1 } else { 2 };
        (lo..=self.levels).collect()
    }
}
