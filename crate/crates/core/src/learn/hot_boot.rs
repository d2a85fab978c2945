//! Hot booting: pre-train on similar scenarios and reuse the result as the
//! starting point of a fresh run.

use log::info;

use crate::error::{Error, Result};

/// Trains `agents` sequentially on `n_scenarios` scenarios, `train_budget`
/// slots each. `train(k, agents, budget)` runs scenario `k` and returns its
/// mean training loss, which is logged per scenario to expose overfitting.
pub fn hot_boot<A, F>(n_scenarios: usize, train_budget: usize, mut agents: A, mut train: F) -> Result<(A, Vec<f64>)>
where
    F: FnMut(usize, &mut A, usize) -> f64,
{
    if n_scenarios == 0 {
        return Err(Error::Config("hot booting needs at least one scenario".into()));
    }
    let mut losses = Vec::with_capacity(n_scenarios);
    for k in 0..n_scenarios {
        let loss = train(k, &mut agents, train_budget);
        info!("hot boot scenario {}/{}: mean loss {:.6}", k + 1, n_scenarios, loss);
        losses.push(loss);
    }
    Ok((agents, losses))
}
