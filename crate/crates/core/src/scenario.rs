//! Problem data: grid cells, penalty curves, sensors, swaths.
//!
//! A [`Scenario`] is the single source of truth for every other module. It
//! round-trips through JSON with top-level keys `cells`, `curves`,
//! `sensors`, `swaths` and `params`. Times are hours, distances km, areas
//! sq km. Cell ids and swath indices are 1-based and dense; swath index 0
//! is the implicit scenario start at time 0 and is never stored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::exec::{map_range, Execution};
use crate::{Error, Result};

/// Highest resolution level a sensor budget table may list.
pub const MAX_RESOLUTION: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityClass {
    High,
    Low,
}

impl PriorityClass {
    pub const ALL: [PriorityClass; 2] = [PriorityClass::High, PriorityClass::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            PriorityClass::High => "high",
            PriorityClass::Low => "low",
        }
    }
}

impl fmt::Display for PriorityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub id: usize,
    /// Row 0 is the northernmost row.
    pub row: u32,
    /// Column 0 is the westernmost column.
    pub col: u32,
    pub center: Point,
    pub priority_class: PriorityClass,
    pub curve_id: String,
    pub rmin: u8,
}

/// Piecewise-linear penalty as a function of hours since the last look.
///
/// Beyond the final breakpoint the last segment's slope is continued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyCurve {
    pub breakpoints: Vec<(f64, f64)>,
}

impl PenaltyCurve {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Self {
        PenaltyCurve { breakpoints }
    }

    /// Penalty after `dt` hours without a look.
    pub fn eval(&self, dt: f64) -> Result<f64> {
        if dt < 0.0 || dt.is_nan() {
            return Err(Error::NegativeElapsed(dt));
        }
        if dt == 0.0 {
            return Ok(0.0);
        }
        let bp = &self.breakpoints;
        match bp.len() {
            0 => return Ok(0.0),
            1 => return Ok(bp[0].1),
            _ => {}
        }
        // index of the first breakpoint with t >= dt
        let i = bp.partition_point(|&(t, _)| t < dt);
        if i < bp.len() && bp[i].0 == dt {
            return Ok(bp[i].1);
        }
        let (lo, hi) = if i == 0 {
            (bp[0], bp[1])
        } else if i == bp.len() {
            (bp[bp.len() - 2], bp[bp.len() - 1])
        } else {
            (bp[i - 1], bp[i])
        };
        let w = (dt - lo.0) / (hi.0 - lo.0);
        Ok(lo.1 + (hi.1 - lo.1) * w)
    }

    fn violations(&self, id: &str, out: &mut Vec<String>) {
        let bp = &self.breakpoints;
        if bp.is_empty() {
            out.push(format!("curve {id}: no breakpoints"));
            return;
        }
        if bp[0] != (0.0, 0.0) {
            out.push(format!("curve {id}: first breakpoint must be (0, 0)"));
        }
        if bp
            .iter()
            .any(|&(t, p)| !t.is_finite() || !p.is_finite() || p < 0.0)
        {
            out.push(format!(
                "curve {id}: breakpoints must be finite with p >= 0"
            ));
        }
        if bp.windows(2).any(|w| w[1].0 <= w[0].0) {
            out.push(format!(
                "curve {id}: breakpoint times not strictly increasing"
            ));
        }
        if bp.windows(2).any(|w| w[1].1 < w[0].1) {
            out.push(format!("curve {id}: curve not nondecreasing"));
        }
    }
}

/// Free-function form of [`PenaltyCurve::eval`].
pub fn eval_curve(curve: &PenaltyCurve, dt: f64) -> Result<f64> {
    curve.eval(dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    ElectroOptical,
    InfraredDay,
    InfraredNight,
    Sar,
}

impl SensorKind {
    pub const ALL: [SensorKind; 4] = [
        SensorKind::ElectroOptical,
        SensorKind::InfraredDay,
        SensorKind::InfraredNight,
        SensorKind::Sar,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SensorKind::ElectroOptical => "electro_optical",
            SensorKind::InfraredDay => "infrared_day",
            SensorKind::InfraredNight => "infrared_night",
            SensorKind::Sar => "sar",
        }
    }

    /// Reference budget table for this kind of sensor: `(r, area sq km, looks)`.
    pub fn default_budget_rows(self) -> BTreeMap<u8, BudgetRow> {
        const ELECTRO_OPTICAL: [(u8, f64, f64); 3] =
            [(1, 500_000.0, 100.0), (4, 10_000.0, 90.0), (9, 500.0, 20.0)];
        const OTHER: [(u8, f64, f64); 9] = [
            (1, 500_000.0, 100.0),
            (2, 100_000.0, 100.0),
            (3, 50_000.0, 90.0),
            (4, 10_000.0, 90.0),
            (5, 5_000.0, 80.0),
            (6, 1_000.0, 80.0),
            (7, 500.0, 70.0),
            (8, 100.0, 50.0),
            (9, 50.0, 40.0),
        ];
        let rows: &[(u8, f64, f64)] = match self {
            SensorKind::ElectroOptical => &ELECTRO_OPTICAL,
            _ => &OTHER,
        };
        rows.iter()
            .map(|&(r, area_budget, look_budget)| {
                (
                    r,
                    BudgetRow {
                        area_budget,
                        look_budget,
                    },
                )
            })
            .collect()
    }
}

impl fmt::Display for SensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetRow {
    pub area_budget: f64,
    pub look_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sensor {
    pub id: String,
    pub kind: SensorKind,
    pub budget_rows: BTreeMap<u8, BudgetRow>,
}

impl Sensor {
    /// Sensor with the reference budget table for its kind.
    pub fn with_default_budgets(id: impl Into<String>, kind: SensorKind) -> Self {
        Sensor {
            id: id.into(),
            kind,
            budget_rows: kind.default_budget_rows(),
        }
    }
}

/// Fraction of a swath's unit budget one look consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostFactor {
    Factor(f64),
    /// The look alone would exceed the whole budget.
    Omitted,
}

impl CostFactor {
    pub fn value(self) -> Option<f64> {
        match self {
            CostFactor::Factor(v) => Some(v),
            CostFactor::Omitted => None,
        }
    }
}

/// `1 / min(area_budget / cell_area, look_budget)`, or `Omitted` when that
/// exceeds 1.
pub fn cost_factor(sensor: &Sensor, r: u8, cell_area: f64) -> Result<CostFactor> {
    let row = sensor
        .budget_rows
        .get(&r)
        .ok_or_else(|| Error::UnknownResolution {
            sensor: sensor.id.clone(),
            resolution: r,
        })?;
    let looks = (row.area_budget / cell_area).min(row.look_budget);
    let cost = 1.0 / looks;
    Ok(if cost > 1.0 {
        CostFactor::Omitted
    } else {
        CostFactor::Factor(cost)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub entry: Point,
    pub exit: Point,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Footprint {
    /// Covered cell ids given verbatim.
    Cells(Vec<usize>),
    Strip(Strip),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Swath {
    pub index: usize,
    pub time: f64,
    pub sensor_id: String,
    pub footprint: Footprint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub cell_area: f64,
    /// Number of resolution levels in play (levels 1..=R).
    #[serde(rename = "R")]
    pub resolutions: u8,
    pub never: f64,
    pub maxlow: u32,
    #[serde(default = "default_looks_required")]
    pub looks_required: u32,
}

fn default_looks_required() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub cells: Vec<GridCell>,
    pub curves: BTreeMap<String, PenaltyCurve>,
    pub sensors: BTreeMap<String, Sensor>,
    pub swaths: Vec<Swath>,
    pub params: Params,
}

impl Scenario {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_swaths(&self) -> usize {
        self.swaths.len()
    }

    pub fn num_resolutions(&self) -> u8 {
        self.params.resolutions
    }

    /// Cell by 1-based id. Assumes a validated scenario.
    pub fn cell(&self, c: usize) -> &GridCell {
        &self.cells[c - 1]
    }

    /// Swath by 1-based index. Assumes a validated scenario.
    pub fn swath(&self, s: usize) -> &Swath {
        &self.swaths[s - 1]
    }

    /// Time of swath `s`, with `t_0 = 0`.
    pub fn time(&self, s: usize) -> f64 {
        if s == 0 {
            0.0
        } else {
            self.swaths[s - 1].time
        }
    }

    pub fn curve_of(&self, c: usize) -> &PenaltyCurve {
        &self.curves[&self.cell(c).curve_id]
    }

    pub fn sensor_of(&self, s: usize) -> &Sensor {
        &self.sensors[&self.swath(s).sensor_id]
    }

    /// Usable cost of resolution `r` on swath `s`: `None` when `r` is outside
    /// 1..=R, unlisted for the sensor, or omitted.
    pub fn cost(&self, s: usize, r: u8) -> Option<f64> {
        if r == 0 || r > self.params.resolutions {
            return None;
        }
        cost_factor(self.sensor_of(s), r, self.params.cell_area)
            .ok()
            .and_then(CostFactor::value)
    }

    /// Per-swath cost table; `costs()[s - 1][r - 1]`.
    pub fn costs(&self) -> Vec<Vec<Option<f64>>> {
        (1..=self.num_swaths())
            .map(|s| {
                (1..=self.params.resolutions)
                    .map(|r| self.cost(s, r))
                    .collect()
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
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

    /// Loads and validates, turning violations into an error.
    pub fn load_valid(path: impl AsRef<Path>) -> Result<Self> {
        let scn = Self::load(path)?;
        validate(&scn).map_err(Error::InvalidScenario)?;
        Ok(scn)
    }

    /// Stable content hash used to tell reports of different scenarios apart.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(serde_json::to_vec(self).expect("scenario serializes"));
        hex::encode(&digest[..8])
    }
}

/// Checks every structural invariant and returns all violations found.
pub fn validate(scn: &Scenario) -> std::result::Result<(), Vec<String>> {
    let mut v = Vec::new();
    let p = &scn.params;
    let r_max = p.resolutions;

    if !(p.never > 0.0) {
        v.push(format!("params: never must be > 0, got {}", p.never));
    }
    if !(p.cell_area > 0.0) {
        v.push(format!(
            "params: cell_area must be > 0, got {}",
            p.cell_area
        ));
    }
    if r_max == 0 || r_max > MAX_RESOLUTION {
        v.push(format!(
            "params: R must be in 1..={MAX_RESOLUTION}, got {r_max}"
        ));
    }
    if p.looks_required == 0 {
        v.push("params: looks_required must be >= 1".to_string());
    }

    let mut positions = BTreeSet::new();
    for (i, cell) in scn.cells.iter().enumerate() {
        if cell.id != i + 1 {
            v.push(format!(
                "cell at position {}: id {} breaks dense numbering 1..C",
                i + 1,
                cell.id
            ));
        }
        if cell.rmin == 0 || cell.rmin > r_max {
            v.push(format!(
                "cell {}: rmin {} outside 1..={}",
                cell.id, cell.rmin, r_max
            ));
        }
        if !positions.insert((cell.row, cell.col)) {
            v.push(format!(
                "cell {}: duplicate grid position ({}, {})",
                cell.id, cell.row, cell.col
            ));
        }
        if !scn.curves.contains_key(&cell.curve_id) {
            v.push(format!("cell {}: unknown curve {}", cell.id, cell.curve_id));
        }
    }

    for (id, curve) in &scn.curves {
        curve.violations(id, &mut v);
    }

    for (key, sensor) in &scn.sensors {
        if &sensor.id != key {
            v.push(format!("sensor {key}: id field says {}", sensor.id));
        }
        for (&r, row) in &sensor.budget_rows {
            if r == 0 || r > MAX_RESOLUTION {
                v.push(format!("sensor {key}: resolution {r} outside 1..=9"));
            }
            if !(row.area_budget > 0.0) || !(row.look_budget > 0.0) {
                v.push(format!(
                    "sensor {key}: non-positive budget at resolution {r}"
                ));
            }
        }
    }

    let mut prev_time = 0.0;
    for (i, swath) in scn.swaths.iter().enumerate() {
        let s = i + 1;
        if swath.index != s {
            v.push(format!(
                "swath at position {s}: index {} breaks dense numbering 1..S",
                swath.index
            ));
        }
        if !(swath.time > 0.0) || !swath.time.is_finite() {
            v.push(format!("swath {s}: time must be > 0, got {}", swath.time));
        }
        if swath.time < prev_time {
            v.push(format!(
                "swath {s}: time {} precedes previous swath",
                swath.time
            ));
        }
        prev_time = swath.time;
        if !scn.sensors.contains_key(&swath.sensor_id) {
            v.push(format!("swath {s}: unknown sensor {}", swath.sensor_id));
        }
        match &swath.footprint {
            Footprint::Cells(ids) => {
                for &c in ids {
                    if c == 0 || c > scn.cells.len() {
                        v.push(format!("swath {s}: footprint references missing cell {c}"));
                    }
                }
            }
            Footprint::Strip(strip) => {
                if strip.entry == strip.exit {
                    v.push(format!("swath {s}: degenerate strip (entry equals exit)"));
                }
                if !(strip.width > 0.0) {
                    v.push(format!("swath {s}: strip width must be > 0"));
                }
            }
        }
    }

    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

/// Penalty tensor `pen[c][s][g]` for `c` in 1..=C, `s` in 1..=S, `g` in 0..=s.
///
/// Stored per cell as a lower-triangular block over `(s, g)`, `s` in 0..=S.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyTable {
    cells: usize,
    swaths: usize,
    data: Vec<f64>,
}

impl PenaltyTable {
    fn block(swaths: usize) -> usize {
        (swaths + 1) * (swaths + 2) / 2
    }

    fn offset(&self, c: usize, s: usize, g: usize) -> usize {
        assert!(c >= 1 && c <= self.cells, "cell {c} out of range");
        assert!(s <= self.swaths, "swath {s} out of range");
        assert!(g <= s, "gap {g} exceeds swath {s}");
        (c - 1) * Self::block(self.swaths) + s * (s + 1) / 2 + g
    }

    /// Builds a table from a closure; `f(c, s, g)` is only called for `s >= 1`
    /// and `1 <= g <= s`.
    pub fn from_fn(cells: usize, swaths: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; cells * Self::block(swaths)];
        let mut t = PenaltyTable {
            cells,
            swaths,
            data: Vec::new(),
        };
        for c in 1..=cells {
            for s in 1..=swaths {
                for g in 1..=s {
                    data[(c - 1) * Self::block(swaths) + s * (s + 1) / 2 + g] = f(c, s, g);
                }
            }
        }
        t.data = data;
        t
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    pub fn num_swaths(&self) -> usize {
        self.swaths
    }

    pub fn get(&self, c: usize, s: usize, g: usize) -> f64 {
        self.data[self.offset(c, s, g)]
    }

    /// Contiguous `(s, g)` block of one cell, for comparing slices.
    pub fn cell_slice(&self, c: usize) -> &[f64] {
        let b = Self::block(self.swaths);
        &self.data[(c - 1) * b..c * b]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        PenaltyTable {
            cells: self.cells,
            swaths: self.swaths,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Worst-case penalty: every cell ignored for the whole horizon.
    pub fn never_looked_total(&self) -> f64 {
        let mut total = 0.0;
        for c in 1..=self.cells {
            for s in 1..=self.swaths {
                total += self.get(c, s, s);
            }
        }
        total
    }
}

/// `pen[c][s][g] = curve_c(t_s - t_{s-g})`, zero at `g = 0`.
pub fn precompute_pen(scn: &Scenario) -> Result<PenaltyTable> {
    precompute_pen_with(scn, Execution::default())
}

pub fn precompute_pen_with(scn: &Scenario, exec: Execution) -> Result<PenaltyTable> {
    let cells = scn.num_cells();
    let swaths = scn.num_swaths();
    let block = PenaltyTable::block(swaths);
    let times: Vec<f64> = (0..=swaths).map(|s| scn.time(s)).collect();
    let blocks = map_range(exec, cells, |i| -> Result<Vec<f64>> {
        let curve = scn.curve_of(i + 1);
        let mut out = vec![0.0; block];
        for s in 1..=swaths {
            for g in 1..=s {
                out[s * (s + 1) / 2 + g] = curve.eval(times[s] - times[s - g])?;
            }
        }
        Ok(out)
    });
    let mut data = Vec::with_capacity(cells * block);
    for b in blocks {
        data.extend(b?);
    }
    Ok(PenaltyTable {
        cells,
        swaths,
        data,
    })
}
