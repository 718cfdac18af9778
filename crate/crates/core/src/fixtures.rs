//! Small hand-checkable scenarios shipped with the crate.
//!
//! The three-cell curves pass exactly through the narrated anchor points
//! (cell 1: 0.01 at 20 h and 0.05 at 37 h; cell 2: 0.42 at 20 h; cell 3:
//! 0.08 at 20 h). Their shape between and beyond those anchors is a fixture
//! choice, not reference data.

use std::collections::BTreeMap;

use crate::scenario::{
    Footprint, GridCell, Params, PenaltyCurve, Point, PriorityClass, Scenario, Sensor, SensorKind,
    Swath,
};

/// Curves for cells 1, 2 and 3 of [`three_cell_scenario`].
pub fn three_cell_curves() -> [PenaltyCurve; 3] {
    [
        PenaltyCurve::new(vec![
            (0.0, 0.0),
            (20.0, 0.01),
            (37.0, 0.05),
            (48.0, 0.2),
            (60.0, 0.6),
        ]),
        PenaltyCurve::new(vec![(0.0, 0.0), (20.0, 0.42), (37.0, 1.2), (48.0, 2.0)]),
        PenaltyCurve::new(vec![(0.0, 0.0), (20.0, 0.08), (37.0, 0.3), (48.0, 0.6)]),
    ]
}

/// Three cells in one row, two electro-optical swaths at 20 h and 37 h that
/// both see every cell.
pub fn three_cell_scenario() -> Scenario {
    let curves: BTreeMap<String, PenaltyCurve> = ["cell1", "cell2", "cell3"]
        .into_iter()
        .map(String::from)
        .zip(three_cell_curves())
        .collect();
    let cells = (1..=3)
        .map(|id| GridCell {
            id,
            row: 0,
            col: id as u32 - 1,
            center: Point::new(25.0 + 50.0 * (id as f64 - 1.0), 25.0),
            priority_class: if id == 2 {
                PriorityClass::High
            } else {
                PriorityClass::Low
            },
            curve_id: format!("cell{id}"),
            rmin: 1,
        })
        .collect();
    let sensor = Sensor::with_default_budgets("eo", SensorKind::ElectroOptical);
    let swaths = [20.0, 37.0]
        .into_iter()
        .enumerate()
        .map(|(i, time)| Swath {
            index: i + 1,
            time,
            sensor_id: "eo".into(),
            footprint: Footprint::Cells(vec![1, 2, 3]),
        })
        .collect();
    Scenario {
        cells,
        curves,
        sensors: [("eo".to_string(), sensor)].into_iter().collect(),
        swaths,
        params: Params {
            cell_area: 2500.0,
            resolutions: 5,
            never: 100_000.0,
            maxlow: 0,
            looks_required: 1,
        },
    }
}
