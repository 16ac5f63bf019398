use crate::engine::GroundAtom;
use crate::rulelang::Value;

/// How a sensor stream becomes a fact: `pred(Value,T)` or
/// `pred(component,Value,T)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VariableBinding {
    pub stream_name: &'static str,
    pub description: &'static str,
    pub predicate: &'static str,
    pub component: Option<&'static str>,
}

impl VariableBinding {
    pub fn fact(&self, value: i64, time: i64) -> GroundAtom {
        let mut args = Vec::with_capacity(3);
        if let Some(c) = self.component {
            args.push(Value::sym(c));
        }
        args.push(Value::Int(value));
        args.push(Value::Int(time));
        GroundAtom::new(self.predicate, args)
    }
}

const fn b(
    stream_name: &'static str,
    description: &'static str,
    predicate: &'static str,
    component: Option<&'static str>,
) -> VariableBinding {
    VariableBinding {
        stream_name,
        description,
        predicate,
        component,
    }
}

static BINDINGS: [VariableBinding; 16] = [
    b("primary_loop_pressure", "Reactor coolant system pressure", "primary_loop_pressure", None),
    b("steam_generator_a_water_level", "Steam generator water level (loop A)", "water_level", Some("steam_generator_secondary_a")),
    b("steam_generator_b_water_level", "Steam generator water level (loop B)", "water_level", Some("steam_generator_secondary_b")),
    b("primary_pump_a_flow", "Primary pumps' flow rates (loop A)", "pump_flow", Some("primary_pump_a")),
    b("primary_pump_b_flow", "Primary pumps' flow rates (loop B)", "pump_flow", Some("primary_pump_b")),
    b("inlet_temperature_a", "RCS inlet temperature (loop A)", "inlet_temperature_a", None),
    b("inlet_temperature_b", "RCS inlet temperature (loop B)", "inlet_temperature_b", None),
    b("condensate_pump_a_flow", "Condensate pump flow rate (loop A)", "pump_flow", Some("condensate_pump_a")),
    b("condensate_pump_b_flow", "Condensate pump flow rate (loop B)", "pump_flow", Some("condensate_pump_b")),
    b("feedwater_pump_a_flow", "Feedwater pump flow rate (loop A)", "pump_flow", Some("feedwater_pump_a")),
    b("feedwater_pump_b_flow", "Feedwater pump flow rate (loop B)", "pump_flow", Some("feedwater_pump_b")),
    b("auxiliary_feedwater_pump_a_flow", "Emergency feedwater pump flow rate (loop A)", "pump_flow", Some("auxiliary_feedwater_pump_a")),
    b("auxiliary_feedwater_pump_b_flow", "Emergency feedwater pump flow rate (loop B)", "pump_flow", Some("auxiliary_feedwater_pump_b")),
    b("high_pressure_injection_pump_flow", "HPIS pump flow rate", "pump_flow", Some("high_pressure_injection_pump")),
    b("reactor_power", "Reactor power", "power", Some("reactor1")),
    b("turbine_power", "Turbine power", "power", Some("turbine1")),
];

/// The sixteen monitored variables in table order.
pub fn variable_bindings() -> &'static [VariableBinding] {
    &BINDINGS
}

pub fn binding(stream_name: &str) -> Option<&'static VariableBinding> {
    BINDINGS.iter().find(|b| b.stream_name == stream_name)
}
