//! Observable reflectance / transmittance traces from circuit transients.
//!
//! The trace machinery mirrors the measurement pipeline: incident and
//! reflected power waves are formed at the reference port, windowed energy
//! ratios give the time-varying reflectance in dB, and a lumped resonator
//! surrogate produces the two-state (short pulse vs CW) frequency profiles.

use crate::circuit::BridgeLoad;
use crate::error::{CoreError, Result};
use crate::transient::{CircuitState, StimulusMode, StimulusSpec};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Port configuration of the surrogate surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceConfig {
    pub mode: SurfaceMode,
    /// Resonator inductance L_add (H).
    pub resonator_inductance: f64,
    /// Resonator capacitance C_add (F).
    pub resonator_capacitance: f64,
    /// Wave reference impedance Z_0 (Ω).
    pub port_impedance: f64,
    /// Moving-average window (s).
    pub averaging_window: f64,
    /// Output spacing of the averaged trace (s).
    pub averaging_step: f64,
    /// Impedance scaling applied when the lumped circuit is mapped onto the
    /// radiating sheet in the frequency surrogate. The absorber default puts
    /// the discharged (short-pulse) state near the free-space impedance,
    /// which is the designed matched-absorption condition.
    pub lumped_to_sheet_ratio: f64,
    /// Cascaded unit cells in the one-dimensional line model.
    pub line_sections: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurfaceMode {
    /// Free-space absorber; the observable is reflectance.
    AbsorberReflect,
    /// Microstrip band-stop; the observable is transmittance.
    MicrostripTransmit,
    /// One-dimensional metasurface line; the observable is transmittance.
    LineTransmit,
}

impl SurfaceMode {
    pub fn is_transmit(&self) -> bool {
        !matches!(self, SurfaceMode::AbsorberReflect)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SurfaceMode::AbsorberReflect => "absorber_reflect",
            SurfaceMode::MicrostripTransmit => "microstrip_transmit",
            SurfaceMode::LineTransmit => "line_transmit",
        }
    }
}

impl SurfaceConfig {
    pub fn absorber() -> Self {
        Self {
            mode: SurfaceMode::AbsorberReflect,
            resonator_inductance: 2.7e-9,
            resonator_capacitance: 0.4e-12,
            port_impedance: 377.0,
            averaging_window: 250e-9,
            averaging_step: 100e-12,
            lumped_to_sheet_ratio: 5.56,
            line_sections: 9,
        }
    }

    pub fn microstrip() -> Self {
        Self {
            mode: SurfaceMode::MicrostripTransmit,
            port_impedance: 50.0,
            lumped_to_sheet_ratio: 1.0,
            ..Self::absorber()
        }
    }

    pub fn line() -> Self {
        Self {
            mode: SurfaceMode::LineTransmit,
            port_impedance: 50.0,
            lumped_to_sheet_ratio: 1.0,
            ..Self::absorber()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.averaging_window > self.averaging_step && self.averaging_step > 0.0) {
            return Err(CoreError::DomainError(format!(
                "need averaging_window ({}) > averaging_step ({}) > 0",
                self.averaging_window, self.averaging_step
            )));
        }
        if !(self.resonator_inductance > 0.0 && self.resonator_capacitance > 0.0) {
            return Err(CoreError::DomainError(
                "resonator L_add and C_add must be > 0".into(),
            ));
        }
        if !(self.port_impedance > 0.0) {
            return Err(CoreError::DomainError("Z_0 must be > 0".into()));
        }
        Ok(())
    }
}

/// Windowed reflectance (or transmittance) samples in dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransientTrace {
    pub id: String,
    pub mode: SurfaceMode,
    pub times: Vec<f64>,
    pub values_db: Vec<f64>,
    pub stimulus: StimulusSpec,
}

/// Floor applied to energy-ratio dB values so features stay finite.
pub const DB_FLOOR: f64 = -80.0;
/// Discretization slack allowed above 0 dB before passivity is violated.
pub const PASSIVITY_TOL_DB: f64 = 0.5;

/// Power-wave decomposition at the reference port:
/// `a = (v + Z_0 i) / (2 sqrt(Z_0))`, `b = (v - Z_0 i) / (2 sqrt(Z_0))`.
pub fn instantaneous_power_waves(v: f64, i: f64, z0: f64) -> (f64, f64) {
    debug_assert!(z0 > 0.0);
    let s = 2.0 * z0.sqrt();
    ((v + z0 * i) / s, (v - z0 * i) / s)
}

/// Steady-state reflectance of a purely resistive load against Z_0, in dB,
/// clipped at the -80 dB floor.
pub fn steady_state_reflectance(load_resistance: f64, z0: f64) -> f64 {
    debug_assert!(load_resistance > 0.0 && z0 > 0.0);
    let gamma = (load_resistance - z0).abs() / (load_resistance + z0);
    if gamma <= 0.0 {
        return DB_FLOOR;
    }
    (20.0 * gamma.log10()).max(DB_FLOOR)
}

/// Port voltage and current reconstructed from a solved state.
///
/// In the DC-envelope topology the source is ideal, so the port voltage is
/// the drive itself and the port current is the full load current. In the RF
/// bridge the load current is steered by whichever diode pair conducts, so
/// the port current carries the sign of the drive.
fn port_sample(state: &CircuitState, stimulus: &StimulusSpec, z0: f64) -> (f64, f64) {
    let i_load = state.capacitor_current + state.resistor_current;
    let e = stimulus.drive(state.time);
    match stimulus.mode {
        StimulusMode::DcEnvelope => (e, i_load),
        StimulusMode::RfSine => {
            let i_port = e.signum() * i_load;
            (e - z0 * i_port, i_port)
        }
    }
}

/// Moving-average energy-ratio trace over the solved states.
///
/// Absorber mode forms `10 log10(sum b^2 / sum a^2)` per window. Transmit
/// modes map the window's least-squares load resistance through the mode's
/// transmission coefficient instead: the microstrip gap is a series element
/// (`T = 2 Z_0 / (2 Z_0 + R)`, falling as the capacitor charges), while each
/// line cell loads the guide in shunt (`T = (R / (R + Z_0/2))^N`, rising).
pub fn reflectance_trace(
    states: &[CircuitState],
    config: &SurfaceConfig,
    stimulus: &StimulusSpec,
) -> Result<TransientTrace> {
    config.validate()?;
    if states.len() < 2 {
        return Err(CoreError::EmptyTrace(
            "need at least two states for a trace".into(),
        ));
    }
    let duration = states.last().unwrap().time;
    if config.averaging_window > duration {
        return Err(CoreError::WindowTooLarge {
            window_s: config.averaging_window,
            duration_s: duration,
        });
    }
    let dt = states[1].time - states[0].time;
    if dt > config.averaging_step * (1.0 + 1e-9) {
        return Err(CoreError::DomainError(format!(
            "state spacing {dt} s exceeds averaging_step {} s",
            config.averaging_step
        )));
    }

    let z0 = config.port_impedance;
    let n = states.len();
    // prefix sums over a^2, b^2, v*i and i^2
    let mut pa = vec![0.0f64; n + 1];
    let mut pb = vec![0.0f64; n + 1];
    let mut pvi = vec![0.0f64; n + 1];
    let mut pii = vec![0.0f64; n + 1];
    for (j, s) in states.iter().enumerate() {
        let (v, i) = port_sample(s, stimulus, z0);
        let (a, b) = instantaneous_power_waves(v, i, z0);
        pa[j + 1] = pa[j] + a * a;
        pb[j + 1] = pb[j] + b * b;
        pvi[j + 1] = pvi[j] + v * i;
        pii[j + 1] = pii[j] + i * i;
    }

    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut m = (config.averaging_window / config.averaging_step).ceil() as u64;
    loop {
        let t_out = m as f64 * config.averaging_step;
        if t_out > duration * (1.0 + 1e-12) {
            break;
        }
        let j_hi = (((t_out / dt) + 1e-9).floor() as usize).min(n - 1);
        let t_lo = t_out - config.averaging_window;
        let j_lo = (((t_lo / dt) + 1.0 - 1e-9).ceil().max(0.0)) as usize;
        let (sa, sb) = (pa[j_hi + 1] - pa[j_lo], pb[j_hi + 1] - pb[j_lo]);
        let db = if config.mode.is_transmit() {
            let (svi, sii) = (pvi[j_hi + 1] - pvi[j_lo], pii[j_hi + 1] - pii[j_lo]);
            let r_w = if sii > 0.0 { (svi / sii).max(0.0) } else { f64::INFINITY };
            transmit_db(r_w, config)
        } else if sa > 0.0 && sb > 0.0 {
            (10.0 * (sb / sa).log10()).max(DB_FLOOR)
        } else {
            DB_FLOOR
        };
        times.push(t_out);
        values.push(db);
        m += 1;
    }

    Ok(TransientTrace {
        id: String::new(),
        mode: config.mode,
        times,
        values_db: values,
        stimulus: *stimulus,
    })
}

fn transmit_db(r: f64, config: &SurfaceConfig) -> f64 {
    let z0 = config.port_impedance;
    let t = match config.mode {
        SurfaceMode::MicrostripTransmit => {
            if r.is_infinite() {
                0.0
            } else {
                2.0 * z0 / (2.0 * z0 + r)
            }
        }
        SurfaceMode::LineTransmit => {
            let per = if r.is_infinite() { 1.0 } else { r / (r + z0 / 2.0) };
            per.powi(config.line_sections as i32)
        }
        SurfaceMode::AbsorberReflect => unreachable!(),
    };
    if t <= 0.0 {
        DB_FLOOR
    } else {
        (20.0 * t.log10()).max(DB_FLOOR)
    }
}

/// Regime selector for the two-state frequency surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateRegime {
    /// Capacitor still discharged; the RC path is shorted and the bridge
    /// presents R_d alone.
    ShortPulse,
    /// Capacitor fully charged (open); the load is R_d + R_C.
    Cw,
}

/// Linear two-state frequency response of the loaded resonator.
///
/// The branch is the series L_add - C_add resonator terminated by the
/// regime's effective resistance, scaled by the lumped-to-sheet ratio. The
/// absorber is the ground-backed one-port (`Γ = (Z - Z_0)/(Z + Z_0)`); the
/// transmit modes place the branch in shunt across the guide.
pub fn frequency_response_surrogate(
    config: &SurfaceConfig,
    load: &BridgeLoad,
    f_grid: &[f64],
    regime: SurrogateRegime,
) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    load.validate()?;
    let r_eff = match regime {
        SurrogateRegime::ShortPulse => load.effective_diode_resistance,
        SurrogateRegime::Cw => load.steady_state_resistance(),
    };
    let n2 = config.lumped_to_sheet_ratio;
    let z0 = config.port_impedance;
    let mut out = Vec::with_capacity(f_grid.len());
    for &f in f_grid {
        if !(f > 0.0) {
            return Err(CoreError::DomainError(format!("frequency {f} Hz must be > 0")));
        }
        let w = 2.0 * std::f64::consts::PI * f;
        let x = w * config.resonator_inductance - 1.0 / (w * config.resonator_capacitance);
        let (zr, zi) = (n2 * r_eff, n2 * x);
        let mag = match config.mode {
            SurfaceMode::AbsorberReflect => {
                // |Z - Z0| / |Z + Z0|
                (hypot2(zr - z0, zi) / hypot2(zr + z0, zi)).sqrt()
            }
            SurfaceMode::MicrostripTransmit | SurfaceMode::LineTransmit => {
                // shunt branch: T = Z / (Z + Z0/2)
                let per = (hypot2(zr, zi) / hypot2(zr + z0 / 2.0, zi)).sqrt();
                if config.mode == SurfaceMode::LineTransmit {
                    per.powi(config.line_sections as i32)
                } else {
                    per
                }
            }
        };
        let db = if mag <= 0.0 {
            DB_FLOOR
        } else {
            (20.0 * mag.log10()).max(DB_FLOOR)
        };
        out.push((f, db));
    }
    Ok(out)
}

fn hypot2(re: f64, im: f64) -> f64 {
    re * re + im * im
}

/// Resonance frequency of the series L_add / C_add resonator.
pub fn resonance_frequency(config: &SurfaceConfig) -> f64 {
    1.0 / (2.0
        * std::f64::consts::PI
        * (config.resonator_inductance * config.resonator_capacitance).sqrt())
}

/// Trace CSV: `time_s,reflectance_db` (or `transmittance_db`).
pub fn write_trace_csv<W: Write>(mut w: W, trace: &TransientTrace) -> Result<()> {
    let col = if trace.mode.is_transmit() {
        "transmittance_db"
    } else {
        "reflectance_db"
    };
    writeln!(w, "time_s,{col}")?;
    for (t, v) in trace.times.iter().zip(&trace.values_db) {
        writeln!(w, "{t:.13e},{v:.13e}")?;
    }
    Ok(())
}

/// Frequency CSV: `freq_hz,magnitude_db`.
pub fn write_frequency_csv<W: Write>(mut w: W, points: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "freq_hz,magnitude_db")?;
    for (f, v) in points {
        writeln!(w, "{f:.13e},{v:.13e}")?;
    }
    Ok(())
}
