//! Temperature-dependent capacitor and photocell models.
//!
//! The datasheet curves of the physical parts are not public, so both models
//! are the simplest monotone forms consistent with the observed behavior:
//! linear-in-temperature capacitance with a floor, and a power-law
//! light-dependent resistance. The photocell is calibrated by inverting the
//! steady-state reflectance model at measured anchor points.

use crate::error::{CoreError, Result};
use crate::scattering::steady_state_reflectance;
use serde::{Deserialize, Serialize};

/// Ground-truth environment labeling one trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorEnvironment {
    /// Metasurface temperature (°C).
    pub temperature: f64,
    /// Surrounding light intensity (lux).
    pub light_intensity: f64,
}

pub const TEMPERATURE_RANGE: (f64, f64) = (15.0, 80.0);
pub const LIGHT_RANGE: (f64, f64) = (1.0, 2500.0);

impl SensorEnvironment {
    pub fn validate(&self) -> Result<()> {
        if self.temperature < TEMPERATURE_RANGE.0 || self.temperature > TEMPERATURE_RANGE.1 {
            return Err(CoreError::DomainError(format!(
                "temperature {} °C outside [{}, {}]",
                self.temperature, TEMPERATURE_RANGE.0, TEMPERATURE_RANGE.1
            )));
        }
        if self.light_intensity < LIGHT_RANGE.0 || self.light_intensity > LIGHT_RANGE.1 {
            return Err(CoreError::DomainError(format!(
                "light intensity {} lux outside [{}, {}]",
                self.light_intensity, LIGHT_RANGE.0, LIGHT_RANGE.1
            )));
        }
        Ok(())
    }
}

/// Linear-in-temperature capacitor with a floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoCapacitor {
    /// Capacitance at the reference temperature (F).
    pub reference_capacitance: f64,
    /// Reference temperature (°C).
    pub reference_temperature: f64,
    /// Fractional capacitance loss per °C.
    pub slope: f64,
    /// Lowest capacitance the part can reach (F).
    pub floor: f64,
}

impl Default for ThermoCapacitor {
    /// Calibrated so the capacitance halves from 23.5 °C to 65.0 °C,
    /// reproducing the direction and scale of the measured transient shift.
    fn default() -> Self {
        Self {
            reference_capacitance: 10e-9,
            reference_temperature: 23.5,
            slope: 0.5 / 41.5,
            floor: 0.5e-9,
        }
    }
}

/// `C(T) = max(C_min, C_ref (1 - α (T - T_ref)))`.
pub fn capacitance_at(cap: &ThermoCapacitor, temperature: f64) -> Result<f64> {
    if temperature < TEMPERATURE_RANGE.0 || temperature > TEMPERATURE_RANGE.1 {
        return Err(CoreError::DomainError(format!(
            "temperature {temperature} °C outside supported range"
        )));
    }
    let linear = cap.reference_capacitance
        * (1.0 - cap.slope * (temperature - cap.reference_temperature));
    Ok(linear.max(cap.floor))
}

/// Power-law light-dependent resistor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Photocell {
    /// Resistance at the reference illuminance (Ω).
    pub reference_resistance: f64,
    /// Reference illuminance (lux).
    pub reference_light: f64,
    /// Log-log slope γ > 0.
    pub exponent: f64,
}

/// Dark-resistance cap; avoids numerically open circuits.
pub const MAX_PHOTOCELL_RESISTANCE: f64 = 1e7;
/// Search bracket for calibration root finding.
const CAL_R_MIN: f64 = 10.0;

/// `R(L) = R_ref (L / L_ref)^(-γ)`, capped at the dark-resistance limit.
pub fn resistance_at(cell: &Photocell, light: f64) -> Result<f64> {
    if !(light > 0.0) {
        return Err(CoreError::DomainError(format!(
            "light intensity {light} lux must be > 0"
        )));
    }
    let r = cell.reference_resistance * (light / cell.reference_light).powf(-cell.exponent);
    Ok(r.min(MAX_PHOTOCELL_RESISTANCE))
}

/// Steady-state circuit context the calibration inverts: the capacitor is
/// open, so the port sees R_d in series with the photocell resistance.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationContext {
    pub effective_diode_resistance: f64,
    pub port_impedance: f64,
}

impl CalibrationContext {
    fn reflectance_db(&self, r_c: f64) -> f64 {
        steady_state_reflectance(self.effective_diode_resistance + r_c, self.port_impedance)
    }

    /// Lower edge of the monotone branch: R_load just above Z_0, where
    /// lowering R_C lowers the reflectance (the measured direction).
    fn bracket_min(&self) -> f64 {
        CAL_R_MIN.max(self.port_impedance - self.effective_diode_resistance + 1e-9)
    }
}

/// Solve for the photocell resistance that reproduces one steady-state
/// reflectance target, by bisection on the monotone branch.
fn solve_resistance(ctx: &CalibrationContext, target_db: f64) -> Result<f64> {
    let (mut lo, mut hi) = (ctx.bracket_min(), MAX_PHOTOCELL_RESISTANCE);
    let (f_lo, f_hi) = (ctx.reflectance_db(lo), ctx.reflectance_db(hi));
    if target_db < f_lo || target_db > f_hi {
        return Err(CoreError::CalibrationFailure(format!(
            "target {target_db} dB outside achievable [{f_lo}, {f_hi}] dB \
             for R in [{lo}, {hi}] Ω"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ctx.reflectance_db(mid) < target_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Calibrate (R_ref, γ) so the steady-state reflectance matches every
/// `(lux, dB)` target. Each target is inverted by root finding, then γ comes
/// from a log-log fit. Needs at least two targets with distinct lux.
pub fn calibrate_photocell(
    targets: &[(f64, f64)],
    ctx: &CalibrationContext,
) -> Result<Photocell> {
    if targets.len() < 2 {
        return Err(CoreError::CalibrationFailure(
            "need at least two (lux, dB) targets".into(),
        ));
    }
    let mut pts = Vec::with_capacity(targets.len());
    for &(lux, db) in targets {
        if !(lux > 0.0) {
            return Err(CoreError::CalibrationFailure(format!(
                "target lux {lux} must be > 0"
            )));
        }
        let r = solve_resistance(ctx, db)?;
        pts.push((lux.ln(), r.ln()));
    }
    let n = pts.len() as f64;
    let mean_l = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_r = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_l).powi(2)).sum();
    if sxx < 1e-12 {
        return Err(CoreError::CalibrationFailure(
            "targets share the same lux value".into(),
        ));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_l) * (p.1 - mean_r)).sum();
    let gamma = -sxy / sxx;
    if !(gamma > 0.0) {
        return Err(CoreError::CalibrationFailure(format!(
            "fitted exponent γ = {gamma} violates γ > 0 (resistance must fall with light)"
        )));
    }
    let l_ref = targets[0].0;
    // ln R = a - γ ln L evaluated at L_ref, with a = mean_r + γ mean_l
    let r_ref = (mean_r - gamma * (l_ref.ln() - mean_l)).exp();
    Ok(Photocell {
        reference_resistance: r_ref,
        reference_light: l_ref,
        exponent: gamma,
    })
}

/// Single-anchor calibration with a fixed exponent.
pub fn calibrate_photocell_fixed_gamma(
    target: (f64, f64),
    gamma: f64,
    ctx: &CalibrationContext,
) -> Result<Photocell> {
    if !(gamma > 0.0) {
        return Err(CoreError::CalibrationFailure(format!(
            "fixed γ = {gamma} must be > 0"
        )));
    }
    let r = solve_resistance(ctx, target.1)?;
    Ok(Photocell {
        reference_resistance: r,
        reference_light: target.0,
        exponent: gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The measured anchors: (3 lux, -30.9 dB), (1970 lux, -37.5 dB) with
    /// C = 1 nF fixed in absorber mode.
    pub const LIGHT_ANCHORS: [(f64, f64); 2] = [(3.0, -30.9), (1970.0, -37.5)];

    fn ctx() -> CalibrationContext {
        CalibrationContext {
            effective_diode_resistance: 67.836,
            port_impedance: 377.0,
        }
    }

    #[test]
    fn capacitance_reference_point_and_halving() {
        let cap = ThermoCapacitor::default();
        let c_ref = capacitance_at(&cap, 23.5).unwrap();
        assert_eq!(c_ref, cap.reference_capacitance);
        let ratio = capacitance_at(&cap, 65.0).unwrap() / c_ref;
        assert!((ratio - 0.5).abs() < 1e-12, "ratio = {ratio}");
    }

    #[test]
    fn capacitance_floor_clamp() {
        let cap = ThermoCapacitor {
            slope: 0.05,
            ..ThermoCapacitor::default()
        };
        // 1 - 0.05*(80-23.5) < 0, so the floor takes over
        assert_eq!(capacitance_at(&cap, 80.0).unwrap(), cap.floor);
    }

    #[test]
    fn capacitance_monotone_until_floor() {
        let cap = ThermoCapacitor::default();
        let mut prev = f64::INFINITY;
        let mut t = 15.0;
        while t <= 80.0 {
            let c = capacitance_at(&cap, t).unwrap();
            assert!(c <= prev);
            prev = c;
            t += 0.5;
        }
    }

    #[test]
    fn capacitance_out_of_range_rejected() {
        assert!(capacitance_at(&ThermoCapacitor::default(), 100.0).is_err());
    }

    #[test]
    fn resistance_reference_and_power_law() {
        let cell = Photocell {
            reference_resistance: 1000.0,
            reference_light: 10.0,
            exponent: 1.0,
        };
        assert_eq!(resistance_at(&cell, 10.0).unwrap(), 1000.0);
        assert!((resistance_at(&cell, 100.0).unwrap() - 100.0).abs() < 1e-9);
        assert!(resistance_at(&cell, 0.0).is_err());
    }

    #[test]
    fn resistance_strictly_decreasing() {
        let cell = Photocell {
            reference_resistance: 330.0,
            reference_light: 3.0,
            exponent: 0.006,
        };
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let lux = 1.0 * 1.2f64.powi(k);
            let r = resistance_at(&cell, lux).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn calibration_reproduces_anchors() {
        let cell = calibrate_photocell(&LIGHT_ANCHORS, &ctx()).unwrap();
        assert!(cell.exponent > 0.0);
        for (lux, target) in LIGHT_ANCHORS {
            let r = resistance_at(&cell, lux).unwrap();
            let db = ctx().reflectance_db(r);
            assert!((db - target).abs() < 0.1, "at {lux} lux: {db} vs {target}");
        }
        assert!(
            resistance_at(&cell, 3.0).unwrap() > resistance_at(&cell, 1970.0).unwrap()
        );
    }

    #[test]
    fn calibration_degenerate_lux_rejected() {
        let res = calibrate_photocell(&[(100.0, -30.0), (100.0, -35.0)], &ctx());
        assert!(matches!(res, Err(CoreError::CalibrationFailure(_))));
    }

    #[test]
    fn calibration_unreachable_target_rejected() {
        // steadier than the floor allows
        let res = calibrate_photocell(&[(3.0, -120.0), (1970.0, -130.0)], &ctx());
        assert!(matches!(res, Err(CoreError::CalibrationFailure(_))));
    }

    #[test]
    fn calibration_inverted_slope_rejected() {
        // reflectance rising with lux would need γ < 0
        let res = calibrate_photocell(&[(3.0, -37.5), (1970.0, -30.9)], &ctx());
        assert!(matches!(res, Err(CoreError::CalibrationFailure(_))));
    }

    #[test]
    fn single_anchor_fixed_gamma() {
        let cell = calibrate_photocell_fixed_gamma((328.0, -33.0), 0.7, &ctx()).unwrap();
        let r = resistance_at(&cell, 328.0).unwrap();
        let db = ctx().reflectance_db(r);
        assert!((db + 33.0).abs() < 0.01);
        assert_eq!(cell.exponent, 0.7);
    }

    #[test]
    fn environment_range_checks() {
        assert!(SensorEnvironment { temperature: 22.1, light_intensity: 328.0 }
            .validate()
            .is_ok());
        assert!(SensorEnvironment { temperature: 5.0, light_intensity: 328.0 }
            .validate()
            .is_err());
        assert!(SensorEnvironment { temperature: 22.1, light_intensity: 0.5 }
            .validate()
            .is_err());
    }
}
