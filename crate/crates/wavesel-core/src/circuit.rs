//! DC-equivalent description of the in-bridge RC load and its closed-form
//! charging behavior.
//!
//! Once the bridge rectifies the carrier, the cell behaves like a DC source
//! `E_0` driving the diode resistance `R_d` in series with the parallel
//! `R_C || C` load. The capacitor then charges with time constant
//! `tau = C R_C R_d / (R_C + R_d)` toward `R_C E_0 / (R_C + R_d)`.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// The in-bridge parallel RC plus the effective bridge resistance and the
/// port reference impedance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BridgeLoad {
    /// In-bridge capacitance C (F).
    pub capacitance: f64,
    /// In-bridge parallel resistance R_C (Ω).
    pub resistance: f64,
    /// Effective resistance R_d of the two conducting bridge diodes (Ω).
    pub effective_diode_resistance: f64,
    /// Rectified DC drive amplitude E_0 (V).
    pub source_amplitude: f64,
    /// Power-wave reference impedance Z_0 (Ω).
    pub port_impedance: f64,
}

impl BridgeLoad {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("C", self.capacitance),
            ("R_C", self.resistance),
            ("R_d", self.effective_diode_resistance),
            ("Z_0", self.port_impedance),
        ];
        for (name, value) in fields {
            if !(value > 0.0) || !value.is_finite() {
                return Err(CoreError::DomainError(format!(
                    "{name} = {value} must be finite and > 0"
                )));
            }
        }
        Ok(())
    }

    /// Steady-state resistance seen by the source: R_d + R_C (capacitor open).
    pub fn steady_state_resistance(&self) -> f64 {
        self.effective_diode_resistance + self.resistance
    }
}

/// Charging time constant `tau = C R_C R_d / (R_C + R_d)`.
pub fn time_constant(load: &BridgeLoad) -> f64 {
    let rc = load.resistance;
    let rd = load.effective_diode_resistance;
    load.capacitance * rc * rd / (rc + rd)
}

/// Closed-form capacitor voltage of the reduced circuit under constant drive:
///
/// `v_C(t) = R_C / (R_C + R_d) * E_0 * (1 - exp(-t / tau))`.
pub fn analytic_capacitor_voltage(load: &BridgeLoad, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    let rc = load.resistance;
    let rd = load.effective_diode_resistance;
    let steady = rc / (rc + rd) * load.source_amplitude;
    steady * (1.0 - (-t / time_constant(load)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(c: f64, rc: f64, rd: f64) -> BridgeLoad {
        BridgeLoad {
            capacitance: c,
            resistance: rc,
            effective_diode_resistance: rd,
            source_amplitude: 1.0,
            port_impedance: 377.0,
        }
    }

    #[test]
    fn time_constant_hand_value() {
        // C = 1 nF, R_C = 10 kΩ, R_d = 100 Ω -> 99.0099 ns
        let tau = time_constant(&load(1e-9, 10e3, 100.0));
        assert!((tau - 9.900990099009901e-8).abs() < 1e-20);
    }

    #[test]
    fn time_constant_large_rc_limit() {
        // R_C >> R_d: tau -> C * R_d
        let tau = time_constant(&load(1e-9, 1e9, 100.0));
        assert!((tau - 1e-9 * 100.0).abs() / tau < 1e-6);
    }

    #[test]
    fn time_constant_vanishing_capacitance() {
        let tau = time_constant(&load(1e-30, 10e3, 100.0));
        assert!(tau > 0.0 && tau < 1e-27);
    }

    #[test]
    fn analytic_voltage_endpoints() {
        let l = load(1e-9, 10e3, 100.0);
        assert_eq!(analytic_capacitor_voltage(&l, 0.0), 0.0);
        let steady = 10e3 / (10e3 + 100.0);
        let v_inf = analytic_capacitor_voltage(&l, 1.0);
        assert!((v_inf - steady).abs() < 1e-12);
        // one time constant: 1 - 1/e of steady state
        let tau = time_constant(&l);
        let v_tau = analytic_capacitor_voltage(&l, tau);
        assert!((v_tau / steady - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn validate_rejects_non_positive_fields() {
        let mut l = load(1e-9, 10e3, 100.0);
        l.capacitance = 0.0;
        assert!(l.validate().is_err());
    }
}
