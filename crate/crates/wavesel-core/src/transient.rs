//! Transient solver for the two fixed topologies: the reduced DC-equivalent
//! circuit (source -> R_d -> R_C || C) and the full four-diode bridge driven
//! by an RF sine through the port impedance.
//!
//! Both paths use trapezoidal implicit integration. The bridge path runs a
//! per-step Newton iteration on the three node voltages with a small leakage
//! conductance across each diode so the Jacobian stays regular when all
//! diodes are off. A step that fails to converge is retried at half the step
//! size, down to 1/64 of the requested step.

use crate::circuit::BridgeLoad;
use crate::diode::{diode_iv_unchecked, DiodeModel};
use crate::error::{CoreError, Result};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Drive description for one transient run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub mode: StimulusMode,
    /// Carrier frequency (Hz), used in `RfSine` mode only.
    pub frequency: f64,
    /// Drive is on for `t < pulse_width`, off afterwards. A continuous wave
    /// is expressed as `pulse_width == total_duration`.
    pub pulse_width: f64,
    /// Drive amplitude (V).
    pub amplitude: f64,
    /// Output sample spacing (s).
    pub sample_step: f64,
    pub total_duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StimulusMode {
    /// Rectified-envelope drive of the reduced circuit (diodes replaced by
    /// the fixed resistance R_d).
    DcEnvelope,
    /// Sine drive of the full four-diode bridge.
    RfSine,
}

impl StimulusSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_step > 0.0) {
            return Err(CoreError::InvalidStimulus(format!(
                "sample_step = {} must be > 0",
                self.sample_step
            )));
        }
        if self.total_duration < self.pulse_width {
            return Err(CoreError::InvalidStimulus(format!(
                "total_duration {} < pulse_width {}",
                self.total_duration, self.pulse_width
            )));
        }
        if !(self.pulse_width >= 0.0) || !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(CoreError::InvalidStimulus(
                "pulse_width must be >= 0 and amplitude finite, >= 0".into(),
            ));
        }
        if self.mode == StimulusMode::RfSine && !(self.frequency > 0.0) {
            return Err(CoreError::InvalidStimulus(
                "rf_sine mode needs frequency > 0".into(),
            ));
        }
        Ok(())
    }

    /// Instantaneous open-circuit source voltage.
    pub fn drive(&self, t: f64) -> f64 {
        if t > self.pulse_width {
            return 0.0;
        }
        match self.mode {
            StimulusMode::DcEnvelope => self.amplitude,
            StimulusMode::RfSine => {
                self.amplitude * (2.0 * std::f64::consts::PI * self.frequency * t).sin()
            }
        }
    }
}

/// Solver state at one output sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitState {
    pub time: f64,
    /// Capacitor (bridge-output) voltage v_C.
    pub capacitor_voltage: f64,
    pub capacitor_current: f64,
    pub resistor_current: f64,
    pub stored_charge: f64,
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 50;
const MAX_HALVINGS: u32 = 6; // step/64
/// Leakage across each diode; keeps the nodal matrix regular in cutoff.
const G_MIN: f64 = 1e-12;

/// Integrate the stimulus against the load and return states at
/// `sample_step` spacing, starting at t = 0. Deterministic for identical
/// inputs.
pub fn transient_solve(
    model: &DiodeModel,
    load: &BridgeLoad,
    stimulus: &StimulusSpec,
) -> Result<Vec<CircuitState>> {
    stimulus.validate()?;
    load.validate()?;
    model.validate()?;
    match stimulus.mode {
        StimulusMode::DcEnvelope => solve_dc_envelope(load, stimulus),
        StimulusMode::RfSine => solve_rf_bridge(model, load, stimulus),
    }
}

fn sample_count(stimulus: &StimulusSpec) -> usize {
    (stimulus.total_duration / stimulus.sample_step).floor() as usize
}

/// Reduced circuit: E(t) across R_d in series with R_C || C. Linear, so the
/// trapezoidal update solves in closed form each step.
fn solve_dc_envelope(load: &BridgeLoad, stimulus: &StimulusSpec) -> Result<Vec<CircuitState>> {
    let c = load.capacitance;
    let rd = load.effective_diode_resistance;
    let rc = load.resistance;
    let h = stimulus.sample_step;
    let g = 1.0 / rd + 1.0 / rc;
    let geq = 2.0 * c / h;

    let n = sample_count(stimulus);
    let mut states = Vec::with_capacity(n + 1);
    let mut v = 0.0f64;
    let mut e_prev = stimulus.drive(0.0);
    states.push(state_from_node(0.0, v, e_prev, rd, rc, c));
    for k in 1..=n {
        let t = k as f64 * h;
        let e = stimulus.drive(t);
        v = (v * (geq - g) + (e + e_prev) / rd) / (geq + g);
        states.push(state_from_node(t, v, e, rd, rc, c));
        e_prev = e;
    }
    Ok(states)
}

fn state_from_node(t: f64, v: f64, e: f64, rd: f64, rc: f64, c: f64) -> CircuitState {
    let i_r = v / rc;
    // KCL at the capacitor node: the R_d branch current splits into R_C and C.
    let i_c = (e - v) / rd - i_r;
    CircuitState {
        time: t,
        capacitor_voltage: v,
        capacitor_current: i_c,
        resistor_current: i_r,
        stored_charge: c * v,
    }
}

/// Nodal state of the bridge between Newton steps.
struct BridgeState {
    /// (v_a, v_p, v_n): source-side node and the two bridge-output nodes.
    x: Vector3<f64>,
    /// Capacitor voltage at the last accepted step.
    v_l: f64,
    /// Capacitor current at the last accepted step (trapezoidal history).
    i_c: f64,
}

fn solve_rf_bridge(
    model: &DiodeModel,
    load: &BridgeLoad,
    stimulus: &StimulusSpec,
) -> Result<Vec<CircuitState>> {
    let period = 1.0 / stimulus.frequency;
    // The carrier must be resolved regardless of the output spacing.
    let n_sub = (stimulus.sample_step / (period / 64.0)).ceil().max(1.0) as usize;
    let h = stimulus.sample_step / n_sub as f64;

    let n = sample_count(stimulus);
    let mut states = Vec::with_capacity(n + 1);
    let mut st = BridgeState {
        x: Vector3::zeros(),
        v_l: 0.0,
        i_c: 0.0,
    };
    states.push(CircuitState {
        time: 0.0,
        capacitor_voltage: 0.0,
        capacitor_current: 0.0,
        resistor_current: 0.0,
        stored_charge: 0.0,
    });
    let mut t = 0.0f64;
    for k in 1..=n {
        let t_target = k as f64 * stimulus.sample_step;
        for _ in 0..n_sub {
            bridge_step(model, load, stimulus, &mut st, t, h, 0)?;
            t += h;
        }
        states.push(CircuitState {
            time: t_target,
            capacitor_voltage: st.v_l,
            capacitor_current: st.i_c,
            resistor_current: st.v_l / load.resistance,
            stored_charge: load.capacitance * st.v_l,
        });
    }
    Ok(states)
}

/// Advance the bridge by one step of size `h` starting at `t0`, halving on
/// Newton failure.
fn bridge_step(
    model: &DiodeModel,
    load: &BridgeLoad,
    stimulus: &StimulusSpec,
    st: &mut BridgeState,
    t0: f64,
    h: f64,
    depth: u32,
) -> Result<()> {
    let e = stimulus.drive(t0 + h);
    match bridge_newton(model, load, e, st, h) {
        Some((x, v_l, i_c)) => {
            st.x = x;
            st.v_l = v_l;
            st.i_c = i_c;
            Ok(())
        }
        None if depth < MAX_HALVINGS => {
            bridge_step(model, load, stimulus, st, t0, h / 2.0, depth + 1)?;
            bridge_step(model, load, stimulus, st, t0 + h / 2.0, h / 2.0, depth + 1)
        }
        None => Err(CoreError::NonConvergence(format!(
            "bridge Newton failed at t = {} s with step {} s",
            t0 + h,
            h
        ))),
    }
}

/// Newton iteration on the three node voltages for one trapezoidal step.
/// Returns the converged nodes plus the new capacitor voltage and current.
fn bridge_newton(
    model: &DiodeModel,
    load: &BridgeLoad,
    e: f64,
    st: &BridgeState,
    h: f64,
) -> Option<(Vector3<f64>, f64, f64)> {
    let z0 = load.port_impedance;
    let g_r = 1.0 / load.resistance;
    let g_eq = 2.0 * load.capacitance / h;
    let mut x = st.x;

    for _ in 0..NEWTON_MAX_ITER {
        let (va, vp, vn) = (x[0], x[1], x[2]);
        let (i1, g1) = diode_leaky(model, va - vp);
        let (i2, g2) = diode_leaky(model, -vp);
        let (i3, g3) = diode_leaky(model, vn - va);
        let (i4, g4) = diode_leaky(model, vn);
        let v_l = vp - vn;
        let i_r = v_l * g_r;
        let i_c = g_eq * (v_l - st.v_l) - st.i_c;

        let r = Vector3::new(
            (e - va) / z0 + i3 - i1,
            i1 + i2 - i_r - i_c,
            i_r + i_c - i3 - i4,
        );
        let j = Matrix3::new(
            -1.0 / z0 - g1 - g3,
            g1,
            g3,
            g1,
            -g1 - g2 - g_r - g_eq,
            g_r + g_eq,
            g3,
            g_r + g_eq,
            -g_r - g_eq - g3 - g4,
        );
        let dx = j.lu().solve(&(-r))?;
        x += dx;
        let scale = 1.0 + x.amax();
        if dx.amax() < NEWTON_TOL * scale {
            let v_l = x[1] - x[2];
            let i_c = g_eq * (v_l - st.v_l) - st.i_c;
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
            return Some((x, v_l, i_c));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    None
}

fn diode_leaky(model: &DiodeModel, v: f64) -> (f64, f64) {
    let (i, g) = diode_iv_unchecked(model, v);
    (i + G_MIN * v, g + G_MIN)
}

/// Write states as `time_s,v_c_volts,i_c_amps,i_r_amps` in scientific
/// notation with 14 significant digits.
pub fn write_states_csv<W: Write>(mut w: W, states: &[CircuitState]) -> Result<()> {
    writeln!(w, "time_s,v_c_volts,i_c_amps,i_r_amps")?;
    for s in states {
        writeln!(
            w,
            "{:.13e},{:.13e},{:.13e},{:.13e}",
            s.time, s.capacitor_voltage, s.capacitor_current, s.resistor_current
        )?;
    }
    Ok(())
}
