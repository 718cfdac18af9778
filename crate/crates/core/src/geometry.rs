//! Which cells each swath sees.
//!
//! Strip footprints use the center-point rule: a cell is covered when its
//! center lies within `width / 2` of the entry-exit segment. The boundary is
//! inclusive.

use std::collections::BTreeSet;

use crate::exec::{try_map_range, Execution};
use crate::scenario::{Footprint, GridCell, Point, Scenario, Strip, Swath};
use crate::{Error, Result};

/// `covered[s - 1]` holds the ids of the cells swath `s` sees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageSets {
    pub covered: Vec<BTreeSet<usize>>,
}

impl CoverageSets {
    pub fn for_swath(&self, s: usize) -> &BTreeSet<usize> {
        &self.covered[s - 1]
    }

    pub fn covers(&self, s: usize, c: usize) -> bool {
        s >= 1 && s <= self.covered.len() && self.covered[s - 1].contains(&c)
    }

    pub fn num_swaths(&self) -> usize {
        self.covered.len()
    }

    /// For each cell (index `c - 1`), the swaths that see it, ascending.
    pub fn swaths_by_cell(&self, cells: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); cells];
        for (i, set) in self.covered.iter().enumerate() {
            for &c in set {
                out[c - 1].push(i + 1);
            }
        }
        out
    }
}

/// Euclidean distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.x + t * dx, a.y + t * dy);
    (p.x - cx).hypot(p.y - cy)
}

fn strip_covers(strip: &Strip, center: Point, swath: usize) -> Result<bool> {
    if strip.entry == strip.exit {
        return Err(Error::DegenerateStrip { swath });
    }
    if !(strip.width > 0.0) {
        return Err(Error::BadStripWidth {
            swath,
            width: strip.width,
        });
    }
    Ok(point_segment_distance(center, strip.entry, strip.exit) <= strip.width / 2.0)
}

pub fn swath_covers(swath: &Swath, cell: &GridCell) -> Result<bool> {
    match &swath.footprint {
        Footprint::Cells(ids) => Ok(ids.contains(&cell.id)),
        Footprint::Strip(strip) => strip_covers(strip, cell.center, swath.index),
    }
}

pub fn coverage_sets(scn: &Scenario) -> Result<CoverageSets> {
    coverage_sets_with(scn, Execution::default())
}

pub fn coverage_sets_with(scn: &Scenario, exec: Execution) -> Result<CoverageSets> {
    let covered = try_map_range::<_, Error, _>(exec, scn.num_swaths(), |i| {
        let swath = &scn.swaths[i];
        match &swath.footprint {
            Footprint::Cells(ids) => Ok(ids.iter().copied().collect()),
            Footprint::Strip(strip) => {
                let mut set = BTreeSet::new();
                for cell in &scn.cells {
                    if strip_covers(strip, cell.center, i + 1)? {
                        set.insert(cell.id);
                    }
                }
                Ok(set)
            }
        }
    })?;
    Ok(CoverageSets { covered })
}
