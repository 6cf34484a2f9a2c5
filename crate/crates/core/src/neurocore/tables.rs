use serde::{Deserialize, Serialize};

use crate::noc::{DepBody, DepFlag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockReason {
    /// Some pre-dependency has not finished the current timestep.
    Pre,
    /// Some post-dependency is too far behind for the spike buffer window.
    Post,
}

/// Latest timestep each neighbour reported: FINISH from pre-dependencies,
/// START from post-dependencies. Entries only grow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyTables {
    pub pre_finish: Vec<i64>,
    pub post_start: Vec<i64>,
}

impl DependencyTables {
    /// Nothing finished yet; every core is taken to have started timestep 0.
    pub fn new(n_pre: usize, n_post: usize) -> Self {
        DependencyTables { pre_finish: vec![-1; n_pre], post_start: vec![0; n_post] }
    }

    /// Why a core whose last completed timestep is `t_cur` may not begin
    /// `t_cur + 1`, or `None` when it may.
    pub fn blocking_reason(&self, t_cur: i64, m: u32) -> Option<BlockReason> {
        if self.pre_finish.iter().any(|&f| f < t_cur) {
            return Some(BlockReason::Pre);
        }
        let floor = t_cur - i64::from(m) + 1;
        if self.post_start.iter().any(|&s| s <= floor) {
            return Some(BlockReason::Post);
        }
        None
    }

    pub fn advance_condition(&self, t_cur: i64, m: u32) -> bool {
        self.blocking_reason(t_cur, m).is_none()
    }

    pub fn on_dep_packet(&mut self, dep: &DepBody) -> Result<(), String> {
        let (table, name) = match dep.flag {
            DepFlag::Finish => (&mut self.pre_finish, "pre"),
            DepFlag::Start => (&mut self.post_start, "post"),
        };
        let rows = table.len();
        let entry = table
            .get_mut(usize::from(dep.dep_id))
            .ok_or_else(|| format!("dep id {} outside {name}-table of {rows} rows", dep.dep_id))?;
        *entry = (*entry).max(i64::from(dep.timestep));
        Ok(())
    }
}
