//! Experiment driver: trace synthesis over the (temperature, light) grid,
//! the N_tr sweep, and CSV/report emission.

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::Path;
use wavesel_core::{
    calibrate_photocell, capacitance_at, determination_coefficient, diode_dynamic_resistance,
    extract_features, random_split, reflectance_trace, resistance_at, train_forest, train_ridge,
    transient_solve, BridgeLoad, CalibrationContext, CircuitState, Dataset, DiodeModel,
    Photocell, RegressorModel, SensorEnvironment, SplitSpec, StimulusSpec, SurfaceConfig,
    SurfaceMode, Target, ThermoCapacitor, TransientTrace,
};

/// Everything derived once from the config before any trace is simulated.
pub struct Pipeline {
    pub config: ExperimentConfig,
    pub diode: DiodeModel,
    pub effective_diode_resistance: f64,
    pub thermo: ThermoCapacitor,
    pub photocell: Photocell,
    pub surface: SurfaceConfig,
    pub stimulus: StimulusSpec,
}

impl Pipeline {
    pub fn build(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let diode = DiodeModel::default();
        let r_d = diode_dynamic_resistance(&diode, config.bias_current)?;
        let base = match config.surface_mode {
            SurfaceMode::AbsorberReflect => SurfaceConfig::absorber(),
            SurfaceMode::MicrostripTransmit => SurfaceConfig::microstrip(),
            SurfaceMode::LineTransmit => SurfaceConfig::line(),
        };
        let surface = SurfaceConfig {
            averaging_window: config.averaging_window,
            averaging_step: config.averaging_step,
            ..base
        };
        let ctx = CalibrationContext {
            effective_diode_resistance: r_d,
            // calibration anchors were measured on the free-space absorber
            port_impedance: SurfaceConfig::absorber().port_impedance,
        };
        let photocell = calibrate_photocell(&[config.anchor_low, config.anchor_high], &ctx)?;
        let thermo = ThermoCapacitor {
            reference_capacitance: config.capacitance_ref,
            reference_temperature: config.temperature_ref,
            slope: config.capacitance_slope,
            floor: config.capacitance_min,
        };
        let stimulus = StimulusSpec {
            mode: config.stimulus_mode,
            frequency: config.stimulus_frequency,
            pulse_width: config.pulse_width,
            amplitude: config.stimulus_amplitude,
            sample_step: config.sample_step,
            total_duration: config.total_duration,
        };
        Ok(Self {
            config,
            diode,
            effective_diode_resistance: r_d,
            thermo,
            photocell,
            surface,
            stimulus,
        })
    }

    pub fn load_for(&self, env: &SensorEnvironment) -> Result<BridgeLoad> {
        env.validate()?;
        Ok(BridgeLoad {
            capacitance: capacitance_at(&self.thermo, env.temperature)?,
            resistance: resistance_at(&self.photocell, env.light_intensity)?,
            effective_diode_resistance: self.effective_diode_resistance,
            source_amplitude: self.config.stimulus_amplitude,
            port_impedance: self.surface.port_impedance,
        })
    }

    /// Solve one environment and reduce it to a (possibly noisy) trace.
    pub fn simulate_trace(
        &self,
        env: &SensorEnvironment,
        trace_id: &str,
        noise_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Vec<CircuitState>, TransientTrace)> {
        let load = self.load_for(env)?;
        let states = transient_solve(&self.diode, &load, &self.stimulus)?;
        let mut trace = reflectance_trace(&states, &self.surface, &self.stimulus)?;
        trace.id = trace_id.to_string();
        if let Some(rng) = noise_rng {
            let sigma = self.config.noise_sigma_db;
            if sigma > 0.0 {
                for v in &mut trace.values_db {
                    *v += sigma * sample_standard_normal(rng);
                }
            }
        }
        Ok((states, trace))
    }
}

/// Box-Muller draw; two uniforms per normal keeps the stream layout simple
/// and deterministic.
fn sample_standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Independent substream of the master seed; splitmix64 over (seed, salt).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The (T, L) grid: temperatures uniform, light levels log-uniform, paired
/// by a seeded permutation so both label ranges still hit their configured
/// endpoints exactly.
pub fn grid_environments(config: &ExperimentConfig) -> Vec<SensorEnvironment> {
    let n = config.grid_points;
    let temp = |k: usize| {
        if n == 1 {
            config.temperature_min
        } else {
            config.temperature_min
                + (config.temperature_max - config.temperature_min) * k as f64 / (n - 1) as f64
        }
    };
    let light = |k: usize| {
        if n == 1 {
            config.light_min
        } else {
            config.light_min
                * (config.light_max / config.light_min).powf(k as f64 / (n - 1) as f64)
        }
    };
    let mut light_order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, 0x6772_6964)); // "grid"
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        light_order.swap(i, j);
    }
    (0..n)
        .map(|k| SensorEnvironment {
            temperature: temp(k),
            light_intensity: light(light_order[k]),
        })
        .collect()
}

/// Simulate the full labeled dataset: every grid point × noisy repeats.
pub fn generate_dataset(pipeline: &Pipeline) -> Result<Dataset> {
    let config = &pipeline.config;
    let envs = grid_environments(config);
    let mut rows = Vec::with_capacity(config.dataset_size());
    for (point, env) in envs.iter().enumerate() {
        // one trace per grid point; repeats differ only in their noise draw
        let (_, clean) = pipeline
            .simulate_trace(env, &format!("g{point:04}"), None)
            .map_err(|e| tag_grid_point(e, point, env))?;
        for rep in 0..config.grid_repeats {
            let trace_index = (point * config.grid_repeats + rep) as u64;
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, 0x1000_0000 + trace_index));
            let mut trace = clean.clone();
            trace.id = format!("g{point:04}_r{rep}");
            if config.noise_sigma_db > 0.0 {
                for v in &mut trace.values_db {
                    *v += config.noise_sigma_db * sample_standard_normal(&mut rng);
                }
            }
            let features = extract_features(&trace, config.feature_segments)
                .map_err(|e| tag_grid_point(CliError::from(e), point, env))?;
            rows.push((features, *env));
        }
    }
    Dataset::new(rows).map_err(CliError::from)
}

fn tag_grid_point(e: impl Into<CliError>, point: usize, env: &SensorEnvironment) -> CliError {
    let e = e.into();
    let msg = format!(
        "grid point {point} (T = {} degC, L = {} lux): {e}",
        env.temperature, env.light_intensity
    );
    match e {
        CliError::Config(_) => CliError::Config(msg),
        CliError::Numerical(_) => CliError::Numerical(msg),
        CliError::Io(_) => CliError::Io(msg),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n_te: usize,
    pub n_tr: usize,
    pub r2_temperature: f64,
    pub r2_light: f64,
    pub regressor: &'static str,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Per-target scatter data for one (regressor, N_tr) configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterSet {
    pub target: Target,
    pub n_tr: usize,
    pub points: Vec<(f64, f64)>, // (actual, estimated)
}

fn train_model(
    train: &Dataset,
    target: Target,
    regressor: &'static str,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<RegressorModel> {
    Ok(match regressor {
        "forest" => RegressorModel::Forest(train_forest(train, target, &config.forest, seed)?),
        "ridge" => RegressorModel::Ridge(train_ridge(train, target, config.ridge_lambda)?),
        other => return Err(CliError::Config(format!("unknown regressor '{other}'"))),
    })
}

fn evaluate(model: &RegressorModel, test: &Dataset, target: Target) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut actual = Vec::with_capacity(test.len());
    let mut estimated = Vec::with_capacity(test.len());
    for (fv, env) in test.rows() {
        actual.push(target.of(env));
        estimated.push(model.predict(&fv.segment_means_db)?);
    }
    let r2 = determination_coefficient(&actual, &estimated)?;
    Ok((r2, actual.into_iter().zip(estimated).collect()))
}

/// For each N_tr, regressor and seed repetition: split, train both targets,
/// score on the held-out rows. Scatter data is captured for the forest on
/// the first seed of each N_tr.
pub fn run_ntr_sweep(
    dataset: &Dataset,
    config: &ExperimentConfig,
) -> Result<(SweepResult, Vec<ScatterSet>)> {
    let size = dataset.len();
    let mut result = SweepResult::default();
    let mut scatters = Vec::new();
    for (list_idx, &n_tr) in config.n_tr_list.iter().enumerate() {
        if n_tr >= size {
            return Err(CliError::Config(format!(
                "sweep entry N_tr = {n_tr} must be smaller than the dataset ({size} rows)"
            )));
        }
        for rep in 0..config.sweep_seeds {
            let seed = derive_seed(
                config.master_seed,
                0x2000_0000 + (list_idx as u64) * 1000 + rep as u64,
            );
            let spec = SplitSpec {
                n_train: n_tr,
                n_test: size - n_tr,
                seed,
            };
            let (train, test) = random_split(dataset, &spec)?;
            for regressor in ["forest", "ridge"] {
                let mut r2 = [0.0f64; 2];
                for (slot, target) in [Target::Temperature, Target::Light].iter().enumerate() {
                    let model = train_model(&train, *target, regressor, config, seed)?;
                    let (score, points) = evaluate(&model, &test, *target)?;
                    r2[slot] = score;
                    if regressor == "forest" && rep == 0 {
                        scatters.push(ScatterSet {
                            target: *target,
                            n_tr,
                            points,
                        });
                    }
                }
                result.rows.push(SweepRow {
                    n_te: size - n_tr,
                    n_tr,
                    r2_temperature: r2[0],
                    r2_light: r2[1],
                    regressor,
                    seed,
                });
            }
        }
    }
    Ok((result, scatters))
}

pub fn write_sweep_csv(path: &Path, sweep: &SweepResult) -> Result<()> {
    let mut text = String::from("n_te,n_tr,r2_temperature,r2_light,regressor,seed\n");
    for row in &sweep.rows {
        text.push_str(&format!(
            "{},{},{:.16e},{:.16e},{},{}\n",
            row.n_te, row.n_tr, row.r2_temperature, row.r2_light, row.regressor, row.seed
        ));
    }
    fs::write(path, text).map_err(CliError::from)
}

pub fn read_sweep_csv(path: &Path) -> Result<SweepResult> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(CliError::Config(format!(
                "sweep.csv line {}: expected 6 fields",
                lineno + 1
            )));
        }
        let bad = |what| CliError::Config(format!("sweep.csv line {}: {what}", lineno + 1));
        rows.push(SweepRow {
            n_te: f[0].parse().map_err(|_| bad("bad n_te"))?,
            n_tr: f[1].parse().map_err(|_| bad("bad n_tr"))?,
            r2_temperature: f[2].parse().map_err(|_| bad("bad r2_temperature"))?,
            r2_light: f[3].parse().map_err(|_| bad("bad r2_light"))?,
            regressor: match f[4] {
                "forest" => "forest",
                "ridge" => "ridge",
                _ => return Err(bad("bad regressor tag")),
            },
            seed: f[5].parse().map_err(|_| bad("bad seed"))?,
        });
    }
    Ok(SweepResult { rows })
}

/// Write `sweep.csv`, the per-configuration scatter files, and a plot script
/// consuming them. Nothing is written for an empty sweep.
pub fn emit_reports(
    sweep: &SweepResult,
    scatters: &[ScatterSet],
    outdir: &Path,
) -> Result<Vec<std::path::PathBuf>> {
    if sweep.rows.is_empty() {
        return Err(CliError::Config("sweep has no rows to report".into()));
    }
    fs::create_dir_all(outdir)?;
    let mut written = Vec::new();
    let sweep_path = outdir.join("sweep.csv");
    write_sweep_csv(&sweep_path, sweep)?;
    written.push(sweep_path);
    for s in scatters {
        let path = outdir.join(format!("scatter_{}_{}.csv", s.target.tag(), s.n_tr));
        let mut text = String::from("actual,estimated\n");
        for (a, e) in &s.points {
            text.push_str(&format!("{a:.13e},{e:.13e}\n"));
        }
        fs::write(&path, text)?;
        written.push(path);
    }
    let refs: Vec<(String, usize)> = scatters
        .iter()
        .map(|s| (format!("scatter_{}_{}", s.target.tag(), s.n_tr), s.n_tr))
        .collect();
    let script_path = outdir.join("plot_sweep.gp");
    fs::write(&script_path, plot_script(&refs))?;
    written.push(script_path);
    Ok(written)
}

/// Plain-text gnuplot script for the R²-vs-N_tr curves and the
/// actual-vs-estimated scatter panels. `scatter_refs` pairs each scatter
/// file stem with its N_tr.
pub fn plot_script(scatter_refs: &[(String, usize)]) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script; run from the output directory\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key left bottom\n\n");
    s.push_str("set terminal pngcairo size 900,600\n");
    s.push_str("set output 'r2_vs_ntr.png'\n");
    s.push_str("set logscale x\n");
    s.push_str("set xlabel 'training datasets N_{tr}'\n");
    s.push_str("set ylabel 'determination coefficient'\n");
    s.push_str(
        "plot 'sweep.csv' using ($6 eq 'forest' ? $2 : 1/0):3 title 'forest, temperature', \\\n\
         \x20    'sweep.csv' using ($6 eq 'forest' ? $2 : 1/0):4 title 'forest, light', \\\n\
         \x20    'sweep.csv' using ($6 eq 'ridge' ? $2 : 1/0):3 title 'ridge, temperature', \\\n\
         \x20    'sweep.csv' using ($6 eq 'ridge' ? $2 : 1/0):4 title 'ridge, light'\n\n",
    );
    s.push_str("unset logscale x\n");
    for (stem, n_tr) in scatter_refs {
        s.push_str(&format!(
            "set output '{stem}.png'\nset xlabel 'actual'\nset ylabel 'estimated'\n\
             plot '{stem}.csv' using 1:2 with points title 'N_{{tr}} = {n_tr}', x notitle\n\n"
        ));
    }
    s
}
