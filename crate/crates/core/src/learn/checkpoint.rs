//! JSON checkpoints of agent parameters and exploration position.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::policy::EpsilonSchedule;
use super::qtable::QTable;
use super::{DqnAgent, QlAgent};
use crate::error::{Error, Result};

/// Parameters of one agent. The schedule carries the exploration position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentCheckpoint {
    Tabular {
        levels: usize,
        schedule: EpsilonSchedule,
        table: QTable,
    },
    Deep {
        levels: usize,
        schedule: EpsilonSchedule,
        main: Mlp,
        target: Mlp,
    },
}

impl AgentCheckpoint {
    pub fn from_ql(agent: &QlAgent) -> Self {
        AgentCheckpoint::Tabular {
            levels: agent.levels(),
            schedule: agent.schedule,
            table: agent.table.clone(),
        }
    }

    pub fn from_dqn(agent: &DqnAgent, levels: usize) -> Self {
        AgentCheckpoint::Deep {
            levels,
            schedule: agent.schedule,
            main: agent.main.clone(),
            target: agent.target.clone(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: AgentCheckpoint = serde_json::from_str(&text)?;
        if let AgentCheckpoint::Deep { main, target, .. } = &ck {
            main.validate()?;
            target.validate()?;
        }
        Ok(ck)
    }
}
