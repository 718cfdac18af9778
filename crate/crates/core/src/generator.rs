//! Seeded synthetic scenarios.
//!
//! Cells sit on a square grid with row 0 to the north. Each satellite makes
//! evenly spaced passes as straight strips at a random heading through a
//! random point of the area; every sensor on the satellite yields one swath
//! per pass, all at the pass time.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scenario::{
    validate, BudgetRow, Footprint, GridCell, Params, PenaltyCurve, Point, PriorityClass, Scenario,
    Sensor, SensorKind, Strip, Swath, MAX_RESOLUTION,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: u32,
    pub cols: u32,
    pub cell_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatelliteSpec {
    pub sensors: Vec<SensorKind>,
}

/// Breakpoints `(hours, penalty)` for each priority class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveTemplates {
    pub high: Vec<(f64, f64)>,
    pub low: Vec<(f64, f64)>,
}

impl Default for CurveTemplates {
    fn default() -> Self {
        CurveTemplates {
            high: vec![(0.0, 0.0), (20.0, 0.42), (37.0, 1.2), (48.0, 2.0)],
            low: vec![
                (0.0, 0.0),
                (20.0, 0.01),
                (37.0, 0.05),
                (48.0, 0.2),
                (60.0, 0.6),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub seed: u64,
    pub grid: GridSpec,
    pub n_high: usize,
    pub n_low: usize,
    pub satellites: Vec<SatelliteSpec>,
    pub passes_per_day: f64,
    pub horizon_hours: f64,
    pub swath_width_km: f64,
    #[serde(default)]
    pub curves: CurveTemplates,
    #[serde(rename = "R", default = "default_resolutions")]
    pub resolutions: u8,
    #[serde(default = "default_never")]
    pub never: f64,
    #[serde(default)]
    pub maxlow: u32,
    #[serde(default = "default_rmin")]
    pub rmin: u8,
    #[serde(default = "default_looks_required")]
    pub looks_required: u32,
}

fn default_resolutions() -> u8 {
    5
}

fn default_never() -> f64 {
    100_000.0
}

fn default_rmin() -> u8 {
    4
}

fn default_looks_required() -> u32 {
    1
}

fn recon() -> SatelliteSpec {
    SatelliteSpec {
        sensors: vec![
            SensorKind::ElectroOptical,
            SensorKind::InfraredDay,
            SensorKind::InfraredNight,
            SensorKind::Sar,
        ],
    }
}

fn three_sensor() -> SatelliteSpec {
    SatelliteSpec {
        sensors: vec![
            SensorKind::ElectroOptical,
            SensorKind::InfraredNight,
            SensorKind::Sar,
        ],
    }
}

impl GenSpec {
    /// 1,415 cells (257 high, 1,158 low) on a 38 x 38 grid of 50 km cells;
    /// five satellites carrying 4, 4, 3, 3 and 3 sensors with four passes a
    /// day, giving 34 swaths over 12 hours.
    pub fn base_case(seed: u64) -> Self {
        GenSpec {
            seed,
            grid: GridSpec {
                rows: 38,
                cols: 38,
                cell_km: 50.0,
            },
            n_high: 257,
            n_low: 1158,
            satellites: vec![
                recon(),
                recon(),
                three_sensor(),
                three_sensor(),
                three_sensor(),
            ],
            passes_per_day: 4.0,
            horizon_hours: 12.0,
            swath_width_km: 400.0,
            curves: CurveTemplates::default(),
            resolutions: 5,
            never: 100_000.0,
            maxlow: 0,
            rmin: 4,
            looks_required: 1,
        }
    }

    /// 100 cells and 16 swaths (two four-sensor satellites, two passes each)
    /// for model-size comparisons.
    pub fn dense_sizing(seed: u64) -> Self {
        GenSpec {
            seed,
            grid: GridSpec {
                rows: 10,
                cols: 10,
                cell_km: 50.0,
            },
            n_high: 20,
            n_low: 80,
            satellites: vec![recon(), recon()],
            passes_per_day: 4.0,
            horizon_hours: 12.0,
            swath_width_km: 150.0,
            ..GenSpec::base_case(seed)
        }
    }

    /// Six cells, four swaths, two resolutions: inside the default oracle
    /// limits.
    pub fn desk(seed: u64) -> Self {
        GenSpec {
            seed,
            grid: GridSpec {
                rows: 2,
                cols: 3,
                cell_km: 50.0,
            },
            n_high: 2,
            n_low: 4,
            satellites: vec![SatelliteSpec {
                sensors: vec![SensorKind::InfraredDay, SensorKind::Sar],
            }],
            passes_per_day: 2.0,
            horizon_hours: 24.0,
            swath_width_km: 40.0,
            curves: CurveTemplates::default(),
            resolutions: 2,
            never: 100_000.0,
            maxlow: 0,
            rmin: 1,
            looks_required: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    fn passes(&self) -> usize {
        (self.horizon_hours * self.passes_per_day / 24.0 + 1e-9).floor() as usize
    }

    /// Expected swath count.
    pub fn num_swaths(&self) -> usize {
        let sensors: usize = self.satellites.iter().map(|s| s.sensors.len()).sum();
        sensors * self.passes()
    }

    fn check(&self) -> Result<()> {
        let mut v = Vec::new();
        let slots = self.grid.rows as usize * self.grid.cols as usize;
        if self.n_high + self.n_low > slots {
            v.push(format!(
                "n_high + n_low = {} exceeds {} grid positions",
                self.n_high + self.n_low,
                slots
            ));
        }
        if !(self.grid.cell_km > 0.0) {
            v.push("grid.cell_km must be > 0".into());
        }
        if !(self.horizon_hours > 0.0) {
            v.push("horizon_hours must be > 0".into());
        }
        if !(self.passes_per_day > 0.0) {
            v.push("passes_per_day must be > 0".into());
        }
        if !(self.swath_width_km > 0.0) {
            v.push("swath_width_km must be > 0".into());
        }
        if self.satellites.is_empty() || self.satellites.iter().any(|s| s.sensors.is_empty()) {
            v.push("every satellite needs at least one sensor".into());
        }
        if self.passes() == 0 {
            v.push("no pass falls inside the horizon".into());
        }
        if self.resolutions == 0 || self.resolutions > MAX_RESOLUTION {
            v.push(format!("R must be in 1..={MAX_RESOLUTION}"));
        }
        if self.rmin == 0 || self.rmin > self.resolutions {
            v.push(format!(
                "rmin {} outside 1..={}",
                self.rmin, self.resolutions
            ));
        }
        if !(self.never > 0.0) {
            v.push("never must be > 0".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGenSpec(v.join("; ")))
        }
    }
}

/// Builds the scenario described by `spec`. Equal specs give equal
/// scenarios.
pub fn generate(spec: &GenSpec) -> Result<Scenario> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let g = &spec.grid;
    let km = g.cell_km;

    let mut slots: Vec<(u32, u32)> = (0..g.rows)
        .flat_map(|row| (0..g.cols).map(move |col| (row, col)))
        .collect();
    let n = spec.n_high + spec.n_low;
    slots.shuffle(&mut rng);
    slots.truncate(n);
    slots.sort_unstable();
    let mut classes: Vec<PriorityClass> = std::iter::repeat_n(PriorityClass::High, spec.n_high)
        .chain(std::iter::repeat_n(PriorityClass::Low, spec.n_low))
        .collect();
    classes.shuffle(&mut rng);

    let cells = slots
        .iter()
        .zip(&classes)
        .enumerate()
        .map(|(i, (&(row, col), &class))| GridCell {
            id: i + 1,
            row,
            col,
            center: Point::new(
                (f64::from(col) + 0.5) * km,
                (f64::from(g.rows - row) - 0.5) * km,
            ),
            priority_class: class,
            curve_id: class.as_str().to_string(),
            rmin: spec.rmin,
        })
        .collect();
    let curves = [
        (
            "high".to_string(),
            PenaltyCurve::new(spec.curves.high.clone()),
        ),
        (
            "low".to_string(),
            PenaltyCurve::new(spec.curves.low.clone()),
        ),
    ]
    .into_iter()
    .collect();

    let width = f64::from(g.cols) * km;
    let height = f64::from(g.rows) * km;
    let reach = width.hypot(height);
    let period = 24.0 / spec.passes_per_day;
    let n_sat = spec.satellites.len();
    let mut sensors = BTreeMap::new();
    let mut raw = Vec::new();
    for (i, sat) in spec.satellites.iter().enumerate() {
        let phase = period * (i + 1) as f64 / (n_sat + 1) as f64;
        for (j, &kind) in sat.sensors.iter().enumerate() {
            let id = format!("sat{}-{}", i + 1, j + 1);
            sensors.insert(id.clone(), Sensor::with_default_budgets(id, kind));
        }
        for k in 0..spec.passes() {
            let time = phase + k as f64 * period;
            let heading = rng.gen_range(0.0..std::f64::consts::PI);
            let mid = Point::new(rng.gen_range(0.0..width), rng.gen_range(0.0..height));
            let (dx, dy) = (heading.cos() * reach, heading.sin() * reach);
            let strip = Strip {
                entry: Point::new(mid.x - dx, mid.y - dy),
                exit: Point::new(mid.x + dx, mid.y + dy),
                width: spec.swath_width_km,
            };
            for j in 0..sat.sensors.len() {
                raw.push((time, i, j, strip.clone()));
            }
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let swaths = raw
        .into_iter()
        .enumerate()
        .map(|(s, (time, i, j, strip))| Swath {
            index: s + 1,
            time,
            sensor_id: format!("sat{}-{}", i + 1, j + 1),
            footprint: Footprint::Strip(strip),
        })
        .collect();

    let scn = Scenario {
        cells,
        curves,
        sensors,
        swaths,
        params: Params {
            cell_area: km * km,
            resolutions: spec.resolutions,
            never: spec.never,
            maxlow: spec.maxlow,
            looks_required: spec.looks_required,
        },
    };
    validate(&scn).map_err(Error::InvalidScenario)?;
    Ok(scn)
}

/// Shape of a [`tiny_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TinyShape {
    pub cells: usize,
    pub swaths: usize,
    pub resolutions: u8,
    /// Chance that a swath sees a given cell.
    pub coverage: f64,
    pub never: f64,
}

impl TinyShape {
    /// Random shape with C in 1..=6, S in 1..=4, R in 1..=2.
    pub fn random(rng: &mut impl Rng) -> Self {
        TinyShape {
            cells: rng.gen_range(1..=6),
            swaths: rng.gen_range(1..=4),
            resolutions: rng.gen_range(1..=2),
            coverage: 0.5,
            never: 1000.0,
        }
    }
}

/// Oracle-sized scenario with explicit footprints, random curves with
/// penalties below 5, and per-sensor budgets allowing one to three looks.
/// With `never = 1000` the `never` term dominates every penalty sum.
pub fn tiny_instance(seed: u64, shape: TinyShape) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = shape.resolutions;
    let mut curves = BTreeMap::new();
    let cells = (1..=shape.cells)
        .map(|c| {
            let mut t = 0.0;
            let mut p = 0.0;
            let mut bp = vec![(0.0, 0.0)];
            for _ in 0..rng.gen_range(1..=3) {
                t += f64::from(rng.gen_range(4..=16u32));
                p += f64::from(rng.gen_range(0..=8u32)) / 8.0;
                bp.push((t, p));
            }
            let id = format!("c{c}");
            curves.insert(id.clone(), PenaltyCurve::new(bp));
            GridCell {
                id: c,
                row: 0,
                col: c as u32 - 1,
                center: Point::new(25.0 + 50.0 * (c as f64 - 1.0), 25.0),
                priority_class: if rng.gen_bool(0.3) {
                    PriorityClass::High
                } else {
                    PriorityClass::Low
                },
                curve_id: id,
                rmin: rng.gen_range(1..=r_max),
            }
        })
        .collect();
    let mut sensors = BTreeMap::new();
    let mut time = 0.0;
    let swaths = (1..=shape.swaths)
        .map(|s| {
            let id = format!("s{s}");
            let budget_rows = (1..=r_max)
                .map(|r| {
                    let looks = f64::from(rng.gen_range(1..=4 - u32::from(r)));
                    (
                        r,
                        BudgetRow {
                            area_budget: 1e9,
                            look_budget: looks,
                        },
                    )
                })
                .collect();
            sensors.insert(
                id.clone(),
                Sensor {
                    id: id.clone(),
                    kind: SensorKind::Sar,
                    budget_rows,
                },
            );
            time += f64::from(rng.gen_range(1..=12u32));
            let covered: BTreeSet<usize> = (1..=shape.cells)
                .filter(|_| rng.gen_bool(shape.coverage))
                .collect();
            Swath {
                index: s,
                time,
                sensor_id: id,
                footprint: Footprint::Cells(covered.into_iter().collect()),
            }
        })
        .collect();
    Scenario {
        cells,
        curves,
        sensors,
        swaths,
        params: Params {
            cell_area: 2500.0,
            resolutions: r_max,
            never: shape.never,
            maxlow: rng.gen_range(0..=1),
            looks_required: 1,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::coverage_sets;
    use crate::oracle::SearchLimits;

    #[test]
    fn base_case_counts() {
        let scn = generate(&GenSpec::base_case(1)).unwrap();
        assert_eq!(scn.num_cells(), 1415);
        let high = scn
            .cells
            .iter()
            .filter(|c| c.priority_class == PriorityClass::High)
            .count();
        assert_eq!((high, scn.num_cells() - high), (257, 1158));
        assert_eq!(scn.num_swaths(), 34);
        assert_eq!(scn.num_resolutions(), 5);
        assert!(scn.swaths.last().unwrap().time <= 12.0);
    }

    #[test]
    fn swath_count_formula() {
        for spec in [
            GenSpec::base_case(3),
            GenSpec::dense_sizing(3),
            GenSpec::desk(3),
        ] {
            assert_eq!(generate(&spec).unwrap().num_swaths(), spec.num_swaths());
        }
        assert_eq!(GenSpec::dense_sizing(0).num_swaths(), 16);
        assert_eq!(GenSpec::desk(0).num_swaths(), 4);
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = generate(&GenSpec::base_case(9)).unwrap().to_json();
        let b = generate(&GenSpec::base_case(9)).unwrap().to_json();
        assert_eq!(a, b);
        let c = generate(&GenSpec::base_case(10)).unwrap().to_json();
        assert_ne!(a, c);
    }

    #[test]
    fn desk_within_oracle_limits() {
        for seed in 0..10 {
            let scn = generate(&GenSpec::desk(seed)).unwrap();
            SearchLimits::default().check(&scn).unwrap();
        }
    }

    #[test]
    fn simultaneous_sensor_swaths_share_strip() {
        let scn = generate(&GenSpec::desk(4)).unwrap();
        let cov = coverage_sets(&scn).unwrap();
        assert_eq!(scn.swaths[0].time, scn.swaths[1].time);
        assert_eq!(cov.for_swath(1), cov.for_swath(2));
    }

    #[test]
    fn rejects_overfull_grid() {
        let mut spec = GenSpec::desk(0);
        spec.n_low = 5;
        assert!(matches!(generate(&spec), Err(Error::InvalidGenSpec(_))));
        let mut spec = GenSpec::desk(0);
        spec.horizon_hours = 0.0;
        assert!(matches!(generate(&spec), Err(Error::InvalidGenSpec(_))));
    }

    #[test]
    fn spec_json_round_trip_with_defaults() {
        let spec = GenSpec::desk(5);
        assert_eq!(GenSpec::from_json(&spec.to_json()).unwrap(), spec);
        let mut v: serde_json::Value = serde_json::from_str(&spec.to_json()).unwrap();
        let obj = v.as_object_mut().unwrap();
        for k in ["curves", "R", "never", "maxlow", "rmin", "looks_required"] {
            obj.remove(k);
        }
        let parsed: GenSpec = serde_json::from_value(v).unwrap();
        assert_eq!(parsed.resolutions, 5);
        assert_eq!(parsed.never, 100_000.0);
        assert_eq!(parsed.rmin, 4);
    }

    #[test]
    fn tiny_instances_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for seed in 0..50 {
            let scn = tiny_instance(seed, TinyShape::random(&mut rng));
            validate(&scn).unwrap();
            SearchLimits::default().check(&scn).unwrap();
            for s in 1..=scn.num_swaths() {
                for r in 1..=scn.num_resolutions() {
                    assert!(scn.cost(s, r).is_some());
                }
            }
        }
    }
}
