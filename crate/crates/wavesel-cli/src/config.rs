//! Flat key/value experiment configuration.
//!
//! The config file is a plain text document of `key = value` lines with `#`
//! comments. Every key has a default; an unrecognized key is a hard error so
//! typos cannot silently fall back to defaults. `config_reference()` renders
//! the full key list with defaults for `--help`.

use crate::error::{CliError, Result};
use wavesel_core::{ForestHyperparams, StimulusMode, SurfaceMode};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    // (temperature, light) grid
    pub grid_points: usize,
    pub grid_repeats: usize,
    pub temperature_min: f64,
    pub temperature_max: f64,
    pub light_min: f64,
    pub light_max: f64,
    // trace noise
    pub noise_sigma_db: f64,
    // stimulus
    pub stimulus_mode: StimulusMode,
    pub stimulus_amplitude: f64,
    pub stimulus_frequency: f64,
    pub sample_step: f64,
    pub total_duration: f64,
    pub pulse_width: f64,
    // moving-average trace reduction
    pub averaging_window: f64,
    pub averaging_step: f64,
    // surface topology
    pub surface_mode: SurfaceMode,
    // thermo-capacitor
    pub capacitance_ref: f64,
    pub temperature_ref: f64,
    pub capacitance_slope: f64,
    pub capacitance_min: f64,
    // diode linearization
    pub bias_current: f64,
    // photocell calibration anchors: (lux, steady-state dB)
    pub anchor_low: (f64, f64),
    pub anchor_high: (f64, f64),
    // feature extraction
    pub feature_segments: usize,
    // regressors
    pub forest: ForestHyperparams,
    pub ridge_lambda: f64,
    // N_tr sweep
    pub n_tr_list: Vec<usize>,
    pub sweep_seeds: usize,
    // single-trace simulation point
    pub sim_temperature: f64,
    pub sim_light: f64,
    // frequency sweep grid
    pub freq_min: f64,
    pub freq_max: f64,
    pub freq_points: usize,
    pub master_seed: u64,
}

/// Test-set sizes of the reference N_tr sweep; N_tr = dataset size - N_te.
const DEFAULT_N_TE: [usize; 25] = [
    115, 229, 344, 458, 573, 687, 802, 916, 1031, 1145, 1260, 1374, 1489, 1603, 1718, 1832,
    1947, 2061, 2176, 2268, 2279, 2281, 2284, 2286, 2288,
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        let dataset_size = 458 * 5;
        Self {
            grid_points: 458,
            grid_repeats: 5,
            temperature_min: 23.5,
            temperature_max: 65.0,
            light_min: 3.0,
            light_max: 1970.0,
            noise_sigma_db: 0.5,
            stimulus_mode: StimulusMode::DcEnvelope,
            stimulus_amplitude: 1.0,
            stimulus_frequency: 3.9e9,
            sample_step: 2e-9,
            total_duration: 5e-6,
            pulse_width: 5e-6,
            averaging_window: 50e-9,
            averaging_step: 10e-9,
            surface_mode: SurfaceMode::AbsorberReflect,
            capacitance_ref: 10e-9,
            temperature_ref: 23.5,
            capacitance_slope: 0.5 / 41.5,
            capacitance_min: 0.5e-9,
            bias_current: 1e-3,
            anchor_low: (3.0, -30.9),
            anchor_high: (1970.0, -37.5),
            feature_segments: 40,
            forest: ForestHyperparams::default(),
            ridge_lambda: 1.0,
            n_tr_list: DEFAULT_N_TE.iter().map(|te| dataset_size - te).collect(),
            sweep_seeds: 5,
            sim_temperature: 23.5,
            sim_light: 3.0,
            freq_min: 2e9,
            freq_max: 8e9,
            freq_points: 601,
            master_seed: 42,
        }
    }
}

impl ExperimentConfig {
    pub fn dataset_size(&self) -> usize {
        self.grid_points * self.grid_repeats
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points == 0 || self.grid_repeats == 0 {
            return Err(CliError::Config(
                "grid.points and grid.repeats must be >= 1".into(),
            ));
        }
        if !(self.temperature_min < self.temperature_max) {
            return Err(CliError::Config(format!(
                "grid.temperature_min {} must be < grid.temperature_max {}",
                self.temperature_min, self.temperature_max
            )));
        }
        if !(0.0 < self.light_min && self.light_min < self.light_max) {
            return Err(CliError::Config(format!(
                "need 0 < grid.light_min {} < grid.light_max {}",
                self.light_min, self.light_max
            )));
        }
        if !(self.noise_sigma_db >= 0.0) {
            return Err(CliError::Config("noise.sigma_db must be >= 0".into()));
        }
        if self.feature_segments == 0 {
            return Err(CliError::Config("features.segments must be >= 1".into()));
        }
        if self.forest.n_trees == 0 || self.forest.features_per_split == 0 {
            return Err(CliError::Config(
                "forest.trees and forest.features_per_split must be >= 1".into(),
            ));
        }
        if self.sweep_seeds == 0 {
            return Err(CliError::Config("sweep.seeds must be >= 1".into()));
        }
        let size = self.dataset_size();
        for &n_tr in &self.n_tr_list {
            if n_tr == 0 || n_tr >= size {
                return Err(CliError::Config(format!(
                    "sweep.n_tr entry {n_tr} must be in 1..{size} (dataset size)"
                )));
            }
        }
        if !(self.freq_min > 0.0 && self.freq_min < self.freq_max) || self.freq_points < 2 {
            return Err(CliError::Config(
                "need 0 < freq.min < freq.max and freq.points >= 2".into(),
            ));
        }
        Ok(())
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| CliError::Config(format!("key '{key}': {what} '{value}'"));
        let as_f64 = || value.parse::<f64>().map_err(|_| bad("not a number"));
        let as_usize = || value.parse::<usize>().map_err(|_| bad("not a count"));
        match key {
            "grid.points" => self.grid_points = as_usize()?,
            "grid.repeats" => self.grid_repeats = as_usize()?,
            "grid.temperature_min" => self.temperature_min = as_f64()?,
            "grid.temperature_max" => self.temperature_max = as_f64()?,
            "grid.light_min" => self.light_min = as_f64()?,
            "grid.light_max" => self.light_max = as_f64()?,
            "noise.sigma_db" => self.noise_sigma_db = as_f64()?,
            "stimulus.mode" => {
                self.stimulus_mode = match value {
                    "dc_envelope" => StimulusMode::DcEnvelope,
                    "rf_sine" => StimulusMode::RfSine,
                    _ => return Err(bad("expected dc_envelope or rf_sine, got")),
                }
            }
            "stimulus.amplitude" => self.stimulus_amplitude = as_f64()?,
            "stimulus.frequency" => self.stimulus_frequency = as_f64()?,
            "stimulus.sample_step" => self.sample_step = as_f64()?,
            "stimulus.total_duration" => self.total_duration = as_f64()?,
            "stimulus.pulse_width" => self.pulse_width = as_f64()?,
            "trace.window" => self.averaging_window = as_f64()?,
            "trace.step" => self.averaging_step = as_f64()?,
            "surface.mode" => self.surface_mode = parse_surface_mode(value)?,
            "sensor.capacitance_ref" => self.capacitance_ref = as_f64()?,
            "sensor.temperature_ref" => self.temperature_ref = as_f64()?,
            "sensor.capacitance_slope" => self.capacitance_slope = as_f64()?,
            "sensor.capacitance_min" => self.capacitance_min = as_f64()?,
            "diode.bias_current" => self.bias_current = as_f64()?,
            "calibration.light_low" => self.anchor_low.0 = as_f64()?,
            "calibration.db_low" => self.anchor_low.1 = as_f64()?,
            "calibration.light_high" => self.anchor_high.0 = as_f64()?,
            "calibration.db_high" => self.anchor_high.1 = as_f64()?,
            "features.segments" => self.feature_segments = as_usize()?,
            "forest.trees" => self.forest.n_trees = as_usize()?,
            "forest.features_per_split" => self.forest.features_per_split = as_usize()?,
            "forest.min_leaf" => self.forest.min_leaf = as_usize()?,
            "forest.bootstrap" => {
                self.forest.bootstrap = value
                    .parse::<bool>()
                    .map_err(|_| bad("expected true or false, got"))?
            }
            "ridge.lambda" => self.ridge_lambda = as_f64()?,
            "sweep.n_tr" => {
                self.n_tr_list = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>().map_err(|_| bad("bad list entry in")))
                    .collect::<Result<Vec<usize>>>()?
            }
            "sweep.seeds" => self.sweep_seeds = as_usize()?,
            "simulate.temperature" => self.sim_temperature = as_f64()?,
            "simulate.light" => self.sim_light = as_f64()?,
            "freq.min" => self.freq_min = as_f64()?,
            "freq.max" => self.freq_max = as_f64()?,
            "freq.points" => self.freq_points = as_usize()?,
            "seed" => {
                self.master_seed = value.parse::<u64>().map_err(|_| bad("not a seed"))?
            }
            _ => return Err(CliError::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            config.set(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}

pub fn parse_surface_mode(value: &str) -> Result<SurfaceMode> {
    match value {
        "absorber_reflect" => Ok(SurfaceMode::AbsorberReflect),
        "microstrip_transmit" => Ok(SurfaceMode::MicrostripTransmit),
        "line_transmit" => Ok(SurfaceMode::LineTransmit),
        _ => Err(CliError::Config(format!(
            "surface mode '{value}' is not one of absorber_reflect, microstrip_transmit, line_transmit"
        ))),
    }
}

/// Key reference with defaults, rendered into `--help`.
pub fn config_reference() -> String {
    let d = ExperimentConfig::default();
    let n_tr: Vec<String> = d.n_tr_list.iter().map(|n| n.to_string()).collect();
    format!(
        "CONFIG KEYS (key = value per line, '#' comments; defaults shown):\n\
         \x20 grid.points = {}               (T, L) grid points\n\
         \x20 grid.repeats = {}                noisy repeats per grid point\n\
         \x20 grid.temperature_min = {}     degC\n\
         \x20 grid.temperature_max = {}     degC\n\
         \x20 grid.light_min = {}            lux\n\
         \x20 grid.light_max = {}           lux\n\
         \x20 noise.sigma_db = {}            Gaussian dB noise on trace values\n\
         \x20 stimulus.mode = dc_envelope      dc_envelope | rf_sine\n\
         \x20 stimulus.amplitude = {}          V\n\
         \x20 stimulus.frequency = {:e}      Hz (rf_sine only)\n\
         \x20 stimulus.sample_step = {:e}      s\n\
         \x20 stimulus.total_duration = {:e}   s\n\
         \x20 stimulus.pulse_width = {:e}      s (equal to total_duration for CW)\n\
         \x20 trace.window = {:e}            s moving-average window\n\
         \x20 trace.step = {:e}              s trace output spacing\n\
         \x20 surface.mode = absorber_reflect  absorber_reflect | microstrip_transmit | line_transmit\n\
         \x20 sensor.capacitance_ref = {:e}    F at the reference temperature\n\
         \x20 sensor.temperature_ref = {}   degC\n\
         \x20 sensor.capacitance_slope = {:.6} 1/degC fractional slope\n\
         \x20 sensor.capacitance_min = {:e}    F floor\n\
         \x20 diode.bias_current = {:e}        A linearization point for R_d\n\
         \x20 calibration.light_low = {}        lux  \\\n\
         \x20 calibration.db_low = {}       dB    > photocell calibration anchors\n\
         \x20 calibration.light_high = {}    lux  /\n\
         \x20 calibration.db_high = {}      dB\n\
         \x20 features.segments = {}\n\
         \x20 forest.trees = {}\n\
         \x20 forest.features_per_split = {}\n\
         \x20 forest.min_leaf = {}\n\
         \x20 forest.bootstrap = {}\n\
         \x20 ridge.lambda = {}\n\
         \x20 sweep.n_tr = {}\n\
         \x20 sweep.seeds = {}\n\
         \x20 simulate.temperature = {}     degC\n\
         \x20 simulate.light = {}              lux\n\
         \x20 freq.min = {:e}                  Hz\n\
         \x20 freq.max = {:e}                  Hz\n\
         \x20 freq.points = {}\n\
         \x20 seed = {}",
        d.grid_points,
        d.grid_repeats,
        d.temperature_min,
        d.temperature_max,
        d.light_min,
        d.light_max,
        d.noise_sigma_db,
        d.stimulus_amplitude,
        d.stimulus_frequency,
        d.sample_step,
        d.total_duration,
        d.pulse_width,
        d.averaging_window,
        d.averaging_step,
        d.capacitance_ref,
        d.temperature_ref,
        d.capacitance_slope,
        d.capacitance_min,
        d.bias_current,
        d.anchor_low.0,
        d.anchor_low.1,
        d.anchor_high.0,
        d.anchor_high.1,
        d.feature_segments,
        d.forest.n_trees,
        d.forest.features_per_split,
        d.forest.min_leaf,
        d.forest.bootstrap,
        d.ridge_lambda,
        n_tr.join(","),
        d.sweep_seeds,
        d.sim_temperature,
        d.sim_light,
        d.freq_min,
        d.freq_max,
        d.freq_points,
        d.master_seed,
    )
}
