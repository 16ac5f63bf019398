//! The synthetic TMI-2 trace. Every value between the cited waypoints is
//! invented; shapes are piecewise constant or linear with integer rounding.

use super::ScenarioError;
use crate::npp_kb::{saturation_pressure, KbConfig};
use crate::replay::{AttemptedAction, SensorSample};

pub const HORIZON: i64 = 8521;

/// Linear interpolation between `(t0, v0)` and `(t1, v1)`, rounded half
/// away from zero.
fn lerp(t: i64, (t0, v0): (i64, i64), (t1, v1): (i64, i64)) -> i64 {
    let (num, den) = ((v1 - v0) * (t - t0), t1 - t0);
    let q = (2 * num.abs() + den) / (2 * den);
    v0 + num.signum() * q
}

/// Primary loop pressure (PSI) through the pinned waypoints.
pub fn primary_pressure(t: i64) -> i64 {
    const KNOTS: [(i64, i64); 8] = [
        (0, 2155),
        (7, 2255),
        (11, 2355),
        (16, 2245),
        (18, 2201),
        (117, 1606),
        (118, 1599),
        (901, 1213),
    ];
    if t >= 901 {
        return lerp(t, (901, 1213), (HORIZON, 1400));
    }
    let k = KNOTS.windows(2).find(|w| t <= w[1].0).expect("t within knots");
    lerp(t, k[0], k[1])
}

fn step(t: i64, at: i64, before: i64, after: i64) -> i64 {
    if t < at {
        before
    } else {
        after
    }
}

/// Value of one stream at second `t`.
pub fn value(stream: &str, t: i64) -> i64 {
    match stream {
        "primary_loop_pressure" => primary_pressure(t),
        "steam_generator_a_water_level" | "steam_generator_b_water_level" => {
            if t < 2 {
                50
            } else if t < 1500 {
                20
            } else {
                45
            }
        }
        "primary_pump_a_flow" => step(t, 4403, 100, 0),
        "primary_pump_b_flow" => step(t, 6037, 100, 0),
        "inlet_temperature_a" => step(t, 847, 560, 573),
        "inlet_temperature_b" => 540,
        "condensate_pump_a_flow" | "condensate_pump_b_flow" => step(t, 1, 100, 0),
        "feedwater_pump_a_flow" | "feedwater_pump_b_flow" => step(t, 2, 100, 0),
        "auxiliary_feedwater_pump_a_flow" | "auxiliary_feedwater_pump_b_flow" => step(t, 2, 0, 50),
        "high_pressure_injection_pump_flow" => {
            if (122..278).contains(&t) {
                40
            } else {
                0
            }
        }
        "reactor_power" => step(t, 11, 100, 0),
        "turbine_power" => step(t, 2, 100, 0),
        _ => panic!("no trace for stream {stream}"),
    }
}

/// Threshold intervals `(lo, hi]` the trace is calibrated for.
fn feasible(cfg: &KbConfig) -> Result<(), ScenarioError> {
    let checks: [(&str, i64, i64, i64); 4] = [
        ("upper_pressure_boundary_primary_loop", cfg.upper_pressure_boundary_primary_loop, 2245, 2255),
        ("porv_closure_setpoint", cfg.porv_closure_setpoint, 2201, 2223),
        ("hpis_actuation_pressure", cfg.hpis_actuation_pressure, 1599, 1606),
        ("water_level_minimum", cfg.water_level_minimum, 20, 45),
    ];
    for (key, v, lo, hi) in checks {
        if !(lo < v && v <= hi) {
            return Err(ScenarioError::Infeasible(format!(
                "{key}={v} contradicts the trace waypoints (needs {lo} < value <= {hi})"
            )));
        }
    }
    cfg.validate().map_err(|e| ScenarioError::Infeasible(e.to_string()))
}

/// Sensor samples at every change point (plus `t = 0` for each stream) and
/// the eight logged operator attempts.
pub fn synthesize_tmi2(cfg: &KbConfig) -> Result<(Vec<SensorSample>, Vec<AttemptedAction>), ScenarioError> {
    feasible(cfg)?;
    let mut samples = Vec::new();
    for t in 0..=HORIZON {
        for b in crate::npp_kb::variable_bindings() {
            let v = value(b.stream_name, t);
            if t == 0 || value(b.stream_name, t - 1) != v {
                samples.push(SensorSample {
                    time: t,
                    variable: b.stream_name.to_string(),
                    value: v,
                });
            }
        }
    }
    Ok((samples, attempted_actions()))
}

pub fn attempted_actions() -> Vec<AttemptedAction> {
    [
        (7, "open", "pressurizer_pilot_operated_relief_valve"),
        (11, "close", "pressurizer_pilot_operated_relief_valve"),
        (279, "turn_off", "high_pressure_injection_pump"),
        (499, "open", "auxiliary_feedwater_a_block_valve"),
        (500, "open", "auxiliary_feedwater_b_block_valve"),
        (4402, "turn_off", "primary_pump_a"),
        (6036, "turn_off", "primary_pump_b"),
        (8521, "close", "pressurizer_block_valve"),
    ]
    .into_iter()
    .map(|(time, p, c)| AttemptedAction {
        time,
        procedure: p.to_string(),
        component: c.to_string(),
    })
    .collect()
}

/// Whether steam should form in loop A at `t`, computed from the trace and
/// the table without the rule engine.
pub fn steam_expected_a(t: i64) -> bool {
    saturation_pressure(value("inlet_temperature_a", t)).is_ok_and(|s| primary_pressure(t) < s)
}

/// Every pinned waypoint that the trace must satisfy, as `(description,
/// holds)`.
pub fn check_waypoints(samples: &[SensorSample]) -> Vec<String> {
    let store = crate::replay::SensorStore::new(samples);
    let v = |s: &str, t: i64| store.value_at(s, t);
    let mut failed = Vec::new();
    let mut expect = |what: &str, ok: bool| {
        if !ok {
            failed.push(what.to_string());
        }
    };
    for s in ["condensate_pump_a_flow", "condensate_pump_b_flow"] {
        expect(&format!("{s} 100 -> 0 at t=1"), v(s, 0) > Some(0) && v(s, 1) == Some(0));
    }
    for s in ["feedwater_pump_a_flow", "feedwater_pump_b_flow", "turbine_power"] {
        expect(&format!("{s} -> 0 at t=2"), v(s, 1) > Some(0) && v(s, 2) == Some(0));
    }
    for s in ["auxiliary_feedwater_pump_a_flow", "auxiliary_feedwater_pump_b_flow"] {
        expect(&format!("{s} 0 -> positive at t=2"), v(s, 1) == Some(0) && v(s, 2) > Some(0));
    }
    let p = "primary_loop_pressure";
    expect("pressure 2255 at t=7", v(p, 7) == Some(2255));
    expect("pressure declines after t=11", v(p, 12) < v(p, 11));
    expect("reactor power -> 0 at t=11", v("reactor_power", 10) > Some(0) && v("reactor_power", 11) == Some(0));
    let h = "high_pressure_injection_pump_flow";
    expect("HPIS 0 -> positive at t=122", v(h, 121) == Some(0) && v(h, 122) > Some(0));
    expect("HPIS -> 0 at t=278", v(h, 277) > Some(0) && v(h, 278) == Some(0));
    expect("primary pump A -> 0 at t=4403", v("primary_pump_a_flow", 4402) > Some(0) && v("primary_pump_a_flow", 4403) == Some(0));
    expect("primary pump B -> 0 at t=6037", v("primary_pump_b_flow", 6036) > Some(0) && v("primary_pump_b_flow", 6037) == Some(0));
    expect("pressure 1213 at t=901", v(p, 901) == Some(1213));
    expect(
        "loop A inlet saturation 1258 at t=901",
        v("inlet_temperature_a", 901).and_then(|x| saturation_pressure(x).ok()) == Some(1258),
    );
    expect("SG A water level 20 at t=1201", v("steam_generator_a_water_level", 1201) == Some(20));
    let steam = |t| {
        matches!((v(p, t), v("inlet_temperature_a", t)), (Some(pr), Some(x))
            if saturation_pressure(x).is_ok_and(|s| pr < s))
    };
    expect("steam in loop A first at t=847", steam(847) && !(0..847).any(steam));
    failed
}
