//! Look plans: the common output of the heuristic, the exact search and a
//! decoded MILP solution.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Cell `c` imaged by swath `s` at resolution `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Look {
    pub c: usize,
    pub s: usize,
    pub r: u8,
}

impl Look {
    pub fn new(c: usize, s: usize, r: u8) -> Self {
        Look { c, s, r }
    }
}

/// Looks sorted by `(s, c)`. Serialized as a bare JSON list of `{c, s, r}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LookPlan {
    pub looks: Vec<Look>,
}

impl LookPlan {
    /// Sorts by `(s, c, r)`.
    pub fn new(mut looks: Vec<Look>) -> Self {
        looks.sort_by_key(|l| (l.s, l.c, l.r));
        LookPlan { looks }
    }

    pub fn len(&self) -> usize {
        self.looks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.looks.is_empty()
    }

    /// `looked[c - 1][s]` for `s` in 0..=S.
    pub fn look_matrix(&self, cells: usize, swaths: usize) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; swaths + 1]; cells];
        for l in &self.looks {
            if l.c >= 1 && l.c <= cells && l.s <= swaths {
                m[l.c - 1][l.s] = true;
            }
        }
        m
    }

    /// Looks per cell (index `c - 1`).
    pub fn looks_per_cell(&self, cells: usize) -> Vec<u32> {
        let mut n = vec![0; cells];
        for l in &self.looks {
            if l.c >= 1 && l.c <= cells {
                n[l.c - 1] += 1;
            }
        }
        n
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plan serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: LookPlan = serde_json::from_str(text)?;
        Ok(LookPlan::new(plan.looks))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

/// Swaths since the last look: `gaps[c - 1][s]`, `s` in 0..=S.
///
/// `gap[c][0] = 0`; a look at `s` resets to 0, otherwise the gap grows by one.
pub fn gap_trajectories(plan: &LookPlan, cells: usize, swaths: usize) -> Vec<Vec<usize>> {
    plan.look_matrix(cells, swaths)
        .into_iter()
        .map(|looked| {
            let mut g = vec![0usize; swaths + 1];
            for s in 1..=swaths {
                g[s] = if looked[s] { 0 } else { g[s - 1] + 1 };
            }
            g
        })
        .collect()
}
