//! Shockley diode evaluation for the HSMS-286x bridge diodes.
//!
//! The current through a diode with series resistance is implicit,
//! `i = I_S (exp((v - i R_S) / (N V_T)) - 1)`, and is solved here with a
//! damped Newton iteration on the junction voltage. Breakdown and junction
//! capacitance parameters are carried along but not evaluated; the bridge
//! never operates anywhere near the 7 V breakdown of these diodes.

use crate::error::{CoreError, Result};
use serde::{Deserialize, Serialize};

/// SPICE-style parameters of one bridge diode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeModel {
    /// Saturation current I_S (A).
    pub saturation_current: f64,
    /// Ideality factor N.
    pub ideality: f64,
    /// Series resistance R_S (Ω).
    pub series_resistance: f64,
    /// Reverse breakdown voltage V_B (V). Stored, not evaluated.
    pub breakdown_voltage: f64,
    /// Zero-bias junction capacitance C_j (F). Stored, not evaluated.
    pub junction_capacitance: f64,
    /// Junction grading coefficient M. Stored, not evaluated.
    pub grading: f64,
    /// Built-in potential P_B (V). Stored, not evaluated.
    pub built_in_potential: f64,
    /// Bandgap energy E_G (eV). Stored, not evaluated.
    pub bandgap: f64,
    /// Current at breakdown I_BV (A). Stored, not evaluated.
    pub breakdown_current: f64,
    /// Thermal voltage V_T (V), fixed at 300 K.
    pub thermal_voltage: f64,
}

impl Default for DiodeModel {
    /// HSMS-286x parameters.
    fn default() -> Self {
        Self {
            saturation_current: 5e-8,
            ideality: 1.08,
            series_resistance: 6.0,
            breakdown_voltage: 7.0,
            junction_capacitance: 0.18e-12,
            grading: 0.5,
            built_in_potential: 0.65,
            bandgap: 0.69,
            breakdown_current: 1e-15,
            thermal_voltage: 0.02585,
        }
    }
}

impl DiodeModel {
    /// N * V_T, the exponential slope voltage.
    pub fn emission_voltage(&self) -> f64 {
        self.ideality * self.thermal_voltage
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.saturation_current > 0.0) {
            return Err(CoreError::DomainError("I_S must be > 0".into()));
        }
        if !(self.ideality >= 1.0) {
            return Err(CoreError::DomainError("N must be >= 1".into()));
        }
        if !(self.series_resistance >= 0.0) {
            return Err(CoreError::DomainError("R_S must be >= 0".into()));
        }
        if !(self.thermal_voltage > 0.0) {
            return Err(CoreError::DomainError("V_T must be > 0".into()));
        }
        Ok(())
    }
}

/// Supported terminal-voltage range. Below -V_B the breakdown branch (not
/// modeled) would dominate; above +2 V the device would dissipate far beyond
/// its rating.
const V_MAX: f64 = 2.0;

const MAX_NEWTON: usize = 200;

/// Terminal current of one diode at terminal voltage `v`.
///
/// Solves the implicit Shockley + series-resistance equation by Newton on the
/// internal junction voltage `u = v - i R_S`, which keeps the residual well
/// conditioned for any R_S >= 0. Residual tolerance 1e-12 A on a relative
/// scale.
pub fn diode_current(model: &DiodeModel, v: f64) -> Result<f64> {
    model.validate()?;
    if !v.is_finite() || v < -model.breakdown_voltage || v > V_MAX {
        return Err(CoreError::DomainError(format!(
            "diode voltage {v} V outside [-{}, {}] V",
            model.breakdown_voltage, V_MAX
        )));
    }
    let is = model.saturation_current;
    let nvt = model.emission_voltage();
    let rs = model.series_resistance;

    if rs == 0.0 {
        return Ok(is * ((v / nvt).exp() - 1.0));
    }
    // Reverse and weak forward bias: the series drop i*R_S is negligible
    // (|i| <= I_S * e few), so the explicit form already meets tolerance.
    if v <= 0.0 {
        return Ok(is * ((v / nvt).exp() - 1.0));
    }

    // Newton on u: g(u) = (v - u)/R_S - I_S (exp(u/NVT) - 1) = 0.
    // g is strictly decreasing, so the root is unique. Steps are limited to
    // one slope voltage decade to avoid exp overflow on the first iterations.
    let mut u = v.min(0.65);
    for _ in 0..MAX_NEWTON {
        let e = (u / nvt).exp();
        let g = (v - u) / rs - is * (e - 1.0);
        let dg = -1.0 / rs - is * e / nvt;
        let mut du = -g / dg;
        let cap = 10.0 * nvt;
        if du > cap {
            du = cap;
        } else if du < -cap {
            du = -cap;
        }
        u += du;
        let i = (v - u) / rs;
        let residual = is * ((u / nvt).exp() - 1.0) - i;
        if residual.abs() < 1e-12 * (1.0 + i.abs()) {
            return Ok(i);
        }
    }
    Err(CoreError::NonConvergence(format!(
        "diode_current Newton exceeded {MAX_NEWTON} iterations at v = {v} V"
    )))
}

/// Terminal current and conductance without domain checks, for use inside
/// the bridge Newton iteration where intermediate iterates may wander
/// outside the physical operating range. Reverse bias uses the explicit
/// Shockley form (the series drop is negligible there); forward bias reuses
/// the junction-voltage Newton. Returns `(i, di/dv)`.
pub(crate) fn diode_iv_unchecked(model: &DiodeModel, v: f64) -> (f64, f64) {
    let is = model.saturation_current;
    let nvt = model.emission_voltage();
    let rs = model.series_resistance;
    if v <= 0.0 || rs == 0.0 {
        // exp argument is clamped: far reverse bias saturates at -I_S anyway
        let e = (v.min(1.0) / nvt).exp();
        let i = is * (e - 1.0);
        let gj = is * e / nvt;
        return (i, gj / (1.0 + rs * gj));
    }
    let mut u = v.min(0.65);
    for _ in 0..MAX_NEWTON {
        let e = (u / nvt).exp();
        let g = (v - u) / rs - is * (e - 1.0);
        let dg = -1.0 / rs - is * e / nvt;
        let du = (-g / dg).clamp(-10.0 * nvt, 10.0 * nvt);
        u += du;
        if du.abs() < 1e-15 * (1.0 + u.abs()) {
            break;
        }
    }
    let i = (v - u) / rs;
    let gj = is * (u / nvt).exp() / nvt;
    (i, gj / (1.0 + rs * gj))
}

/// Small-signal conductance di/dv of one diode at terminal voltage `v`.
///
/// Derivative of the implicit terminal current:
/// `g = g_j / (1 + R_S g_j)` with `g_j = I_S exp(u/NVT) / NVT` the junction
/// conductance at the solved operating point.
pub fn diode_conductance(model: &DiodeModel, v: f64) -> Result<f64> {
    let i = diode_current(model, v)?;
    let u = v - i * model.series_resistance;
    let gj = model.saturation_current * (u / model.emission_voltage()).exp()
        / model.emission_voltage();
    Ok(gj / (1.0 + model.series_resistance * gj))
}

/// Effective series resistance R_d of the two conducting bridge diodes at the
/// operating current `i_on`:
///
/// `R_d = 2 (N V_T / i_on + R_S)`.
pub fn diode_dynamic_resistance(model: &DiodeModel, i_on: f64) -> Result<f64> {
    model.validate()?;
    if !(i_on > 0.0) {
        return Err(CoreError::DomainError(format!(
            "operating current i_on = {i_on} A must be > 0"
        )));
    }
    Ok(2.0 * (model.emission_voltage() / i_on + model.series_resistance))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: bisection on i over [0, 1 A] for the implicit
    /// equation, tolerance 1e-15 A. Never calls the Newton path.
    fn bisection_oracle(model: &DiodeModel, v: f64) -> f64 {
        let nvt = model.emission_voltage();
        let f = |i: f64| {
            model.saturation_current * (((v - i * model.series_resistance) / nvt).exp() - 1.0) - i
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn zero_bias_gives_zero_current() {
        let i = diode_current(&DiodeModel::default(), 0.0).unwrap();
        assert_eq!(i, 0.0);
    }

    #[test]
    fn forward_bias_matches_bisection_oracle() {
        let model = DiodeModel::default();
        let oracle = bisection_oracle(&model, 0.3);
        // Frozen from the oracle; also guards the oracle itself.
        assert!((oracle - 1.6340423167e-3).abs() < 1e-12);
        let i = diode_current(&model, 0.3).unwrap();
        assert!((i - oracle).abs() < 1e-12, "i = {i}, oracle = {oracle}");
    }

    #[test]
    fn reverse_bias_bounded_by_saturation_current() {
        let model = DiodeModel::default();
        let i = diode_current(&model, -0.2).unwrap();
        assert!(i < 0.0 && i > -model.saturation_current);
        assert!(i.abs() < 5e-8);
    }

    #[test]
    fn out_of_range_voltage_rejected() {
        let model = DiodeModel::default();
        assert!(matches!(
            diode_current(&model, -8.0),
            Err(CoreError::DomainError(_))
        ));
        assert!(matches!(
            diode_current(&model, 3.0),
            Err(CoreError::DomainError(_))
        ));
    }

    #[test]
    fn dynamic_resistance_table_s3_point() {
        let rd = diode_dynamic_resistance(&DiodeModel::default(), 1e-3).unwrap();
        assert!((rd - 67.836).abs() < 1e-9, "rd = {rd}");
    }

    #[test]
    fn dynamic_resistance_cross_checks_finite_difference() {
        // dv/di of the terminal characteristic at i_on, times two diodes,
        // must agree with the closed form.
        let model = DiodeModel::default();
        let i_on = 1e-3;
        // invert i(v) around i_on by bisection on v
        let v_of_i = |target: f64| {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if bisection_oracle(&model, mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let dv = v_of_i(i_on * 1.001) - v_of_i(i_on * 0.999);
        let di = i_on * 0.002;
        let rd_fd = 2.0 * dv / di;
        let rd = diode_dynamic_resistance(&model, i_on).unwrap();
        assert!((rd_fd - rd).abs() / rd < 1e-3, "fd = {rd_fd}, formula = {rd}");
    }

    #[test]
    fn dynamic_resistance_zero_series_term() {
        let model = DiodeModel {
            series_resistance: 0.0,
            ..DiodeModel::default()
        };
        // pick i_on so that N V_T / i_on = 25 Ω
        let i_on = model.emission_voltage() / 25.0;
        let rd = diode_dynamic_resistance(&model, i_on).unwrap();
        assert!((rd - 50.0).abs() < 1e-12);
    }

    #[test]
    fn doubling_i_on_halves_junction_term() {
        let model = DiodeModel::default();
        let i_on = 0.4e-3;
        let rd1 = diode_dynamic_resistance(&model, i_on).unwrap();
        let rd2 = diode_dynamic_resistance(&model, 2.0 * i_on).unwrap();
        let junction1 = rd1 - 2.0 * model.series_resistance;
        let junction2 = rd2 - 2.0 * model.series_resistance;
        assert!((junction2 - junction1 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_i_on_rejected() {
        assert!(matches!(
            diode_dynamic_resistance(&DiodeModel::default(), 0.0),
            Err(CoreError::DomainError(_))
        ));
    }

    #[test]
    fn conductance_matches_secant() {
        let model = DiodeModel::default();
        for &v in &[0.2, 0.35, 0.5] {
            let g = diode_conductance(&model, v).unwrap();
            let h = 1e-6;
            let sec = (diode_current(&model, v + h).unwrap()
                - diode_current(&model, v - h).unwrap())
                / (2.0 * h);
            assert!((g - sec).abs() / sec < 1e-5, "v = {v}: g = {g}, sec = {sec}");
        }
    }
}
