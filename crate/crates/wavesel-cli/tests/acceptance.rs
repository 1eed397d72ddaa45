//! Acceptance gate: one test per criterion, each printing a PASS line on
//! success (cargo shows the failure otherwise). Criteria 8 and 9 share one
//! full-size benchmark run.

use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;
use wavesel_cli::{generate_dataset, run_ntr_sweep, ExperimentConfig, Pipeline, SweepResult};
use wavesel_core::{
    analytic_capacitor_voltage, determination_coefficient, reflectance_trace, resistance_at,
    time_constant, train_forest, train_ridge, transient_solve, BridgeLoad, Dataset, DiodeModel,
    FeatureVector, ForestHyperparams, SensorEnvironment, StimulusMode, StimulusSpec,
    SurfaceConfig, SurfaceMode, Target,
};

fn dc_load(c: f64, rc: f64, rd: f64) -> BridgeLoad {
    BridgeLoad {
        capacitance: c,
        resistance: rc,
        effective_diode_resistance: rd,
        source_amplitude: 1.0,
        port_impedance: 377.0,
    }
}

fn dc_cw(load: &BridgeLoad, duration: f64, step: f64) -> StimulusSpec {
    StimulusSpec {
        mode: StimulusMode::DcEnvelope,
        frequency: 0.0,
        pulse_width: duration,
        amplitude: load.source_amplitude,
        sample_step: step,
        total_duration: duration,
    }
}

#[test]
fn criterion_01_analytic_oracle_equivalence() {
    let start = Instant::now();
    let diode = DiodeModel::default();
    for c in [1e-9, 10e-9, 100e-9] {
        for rc in [1e3, 10e3, 100e3] {
            for rd in [50.0, 100.0, 500.0] {
                let load = dc_load(c, rc, rd);
                let tau = time_constant(&load);
                let stim = dc_cw(&load, 8.0 * tau, tau / 500.0);
                let states = transient_solve(&diode, &load, &stim).unwrap();
                let steady = load.resistance / (load.resistance + rd);
                let mut sq = 0.0;
                for s in &states {
                    let d = s.capacitor_voltage - analytic_capacitor_voltage(&load, s.time);
                    sq += d * d;
                }
                let rms = (sq / states.len() as f64).sqrt();
                assert!(
                    rms < 0.01 * steady,
                    "(C={c:e}, R_C={rc}, R_d={rd}): rms {rms:e} vs steady {steady}"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 1 PASS: dc transient matches analytic charging curve (RMS < 1% of steady) \
         on the 3x3x3 grid in {elapsed:?}"
    );
}

/// First crossing of 63.2% of the steady value, linearly interpolated.
fn rise_time(load: &BridgeLoad) -> f64 {
    let tau = time_constant(load);
    let stim = dc_cw(load, 10.0 * tau, tau / 2000.0);
    let states = transient_solve(&DiodeModel::default(), load, &stim).unwrap();
    let steady = load.source_amplitude * load.resistance
        / (load.resistance + load.effective_diode_resistance);
    let target = (1.0 - (-1.0f64).exp()) * steady;
    for pair in states.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.capacitor_voltage < target && b.capacitor_voltage >= target {
            let f = (target - a.capacitor_voltage) / (b.capacitor_voltage - a.capacitor_voltage);
            return a.time + f * (b.time - a.time);
        }
    }
    panic!("rise level never reached");
}

#[test]
fn criterion_02_time_constant_law() {
    // tau = C R_C R_d / (R_C + R_d); in the R_C >> R_d regime it collapses
    // to C R_d and doubling C doubles the rise time
    for (c, rc, rd) in [(10e-9, 10e3, 67.836), (4.7e-9, 50e3, 100.0), (1e-9, 20e3, 200.0)] {
        assert!(rc >= 100.0 * rd);
        let load = dc_load(c, rc, rd);
        let fitted = rise_time(&load);
        let tau = time_constant(&load);
        let err = (fitted - tau).abs() / tau;
        assert!(err < 0.02, "fitted {fitted:e} vs tau {tau:e} ({err:e})");

        let doubled = rise_time(&dc_load(2.0 * c, rc, rd));
        let ratio = doubled / fitted;
        assert!((ratio - 2.0).abs() < 0.04, "doubling C gave ratio {ratio}");
    }
    println!(
        "criterion 2 PASS: fitted 63.2% rise time tracks C*R_C*R_d/(R_C+R_d) within 2% and \
         scales linearly in C"
    );
}

#[test]
fn criterion_03_steady_state_anchor_reproduction() {
    // run long enough (>17 tau) that the last window is genuinely steady
    let config = ExperimentConfig {
        total_duration: 10e-6,
        pulse_width: 10e-6,
        ..ExperimentConfig::default()
    };
    let pipeline = Pipeline::build(config).unwrap();
    for (lux, target_db) in [(3.0, -30.9), (1970.0, -37.5)] {
        let env = SensorEnvironment {
            temperature: pipeline.config.temperature_ref,
            light_intensity: lux,
        };
        let (_, trace) = pipeline.simulate_trace(&env, "anchor", None).unwrap();
        let simulated = *trace.values_db.last().unwrap();
        assert!(
            (simulated - target_db).abs() < 0.1,
            "at {lux} lux: simulated {simulated} dB vs {target_db} dB"
        );
    }
    println!(
        "criterion 3 PASS: calibrated photocell reproduces the steady-state anchors \
         (-30.9 dB at 3 lux, -37.5 dB at 1970 lux) within 0.1 dB in simulation"
    );
}

#[test]
fn criterion_04_capacitance_knee_and_rc_level() {
    let start = Instant::now();
    let pipeline = Pipeline::build(ExperimentConfig::default()).unwrap();
    let r_d = pipeline.effective_diode_resistance;
    let rc = resistance_at(&pipeline.photocell, 3.0).unwrap();

    // knee time: where the windowed reflectance crosses the midpoint between
    // its early and steady levels
    let knee = |c: f64| -> f64 {
        let load = dc_load(c, rc, r_d);
        let tau = time_constant(&load);
        let stim = dc_cw(&load, 12.0 * tau, tau / 500.0);
        let states = transient_solve(&DiodeModel::default(), &load, &stim).unwrap();
        let surface = SurfaceConfig {
            averaging_window: tau / 10.0,
            averaging_step: tau / 100.0,
            ..SurfaceConfig::absorber()
        };
        let trace = reflectance_trace(&states, &surface, &stim).unwrap();
        let mid = 0.5 * (trace.values_db[0] + trace.values_db.last().unwrap());
        trace
            .times
            .iter()
            .zip(&trace.values_db)
            .find(|(_, &v)| v <= mid)
            .map(|(t, _)| *t)
            .expect("knee not reached")
    };
    let ratio = knee(100e-9) / knee(10e-9);
    assert!(
        (5.0..20.0).contains(&ratio),
        "expected ~10x knee shift, got {ratio}"
    );

    // steady-state level ordering under R_C
    let steady = |rc: f64| -> f64 {
        let load = dc_load(10e-9, rc, r_d);
        let tau = time_constant(&load);
        let stim = dc_cw(&load, 15.0 * tau, tau / 500.0);
        let states = transient_solve(&DiodeModel::default(), &load, &stim).unwrap();
        let surface = SurfaceConfig {
            averaging_window: tau,
            averaging_step: tau / 10.0,
            ..SurfaceConfig::absorber()
        };
        *reflectance_trace(&states, &surface, &stim)
            .unwrap()
            .values_db
            .last()
            .unwrap()
    };
    let high = steady(10e3);
    let low = steady(1e3);
    assert!(low < high - 1.0, "R_C 1k gave {low} dB vs 10k {high} dB");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 4 PASS: 10x capacitance shifts the reflectance knee by {ratio:.1}x in time \
         and lowering R_C 10k->1k lowers the steady level ({high:.1} -> {low:.1} dB) in {elapsed:?}"
    );
}

#[test]
fn criterion_05_mode_contrast() {
    for (mode, rising) in [
        (SurfaceMode::MicrostripTransmit, false),
        (SurfaceMode::LineTransmit, true),
    ] {
        let config = ExperimentConfig {
            surface_mode: mode,
            ..ExperimentConfig::default()
        };
        let pipeline = Pipeline::build(config).unwrap();
        let env = SensorEnvironment {
            temperature: 23.5,
            light_intensity: 3.0,
        };
        let (_, trace) = pipeline.simulate_trace(&env, "contrast", None).unwrap();
        assert!(trace.values_db.len() > 10);
        for pair in trace.values_db.windows(2) {
            if rising {
                assert!(pair[1] >= pair[0] - 1e-9, "{mode:?} trace fell");
            } else {
                assert!(pair[1] <= pair[0] + 1e-9, "{mode:?} trace rose");
            }
        }
    }
    println!(
        "criterion 5 PASS: microstrip transmittance is non-increasing and line transmittance \
         non-decreasing over the full trace"
    );
}

// ---- criterion 6 oracles -------------------------------------------------

/// Exhaustive-split CART: at every node, try every feature and every
/// midpoint threshold; pick the minimum summed child SSE with ties broken by
/// (feature, threshold). Mirrors the production tie-break exactly.
fn oracle_cart_predict(x: &[Vec<f64>], y: &[f64], rows: &[usize], probe: &[f64]) -> f64 {
    let mean = rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64;
    if rows.len() < 2 {
        return mean;
    }
    let sse_of = |idx: &[usize]| -> f64 {
        let m = idx.iter().map(|&r| y[r]).sum::<f64>() / idx.len() as f64;
        idx.iter().map(|&r| (y[r] - m).powi(2)).sum()
    };
    if sse_of(rows) <= f64::EPSILON * rows.len() as f64 {
        return mean;
    }
    let mut best: Option<(f64, usize, f64)> = None; // (sse, feature, threshold)
    for feature in 0..x[0].len() {
        let mut vals: Vec<f64> = rows.iter().map(|&r| x[r][feature]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in vals.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let threshold = 0.5 * (w[0] + w[1]);
            let left: Vec<usize> = rows
                .iter()
                .cloned()
                .filter(|&r| x[r][feature] < threshold)
                .collect();
            let right: Vec<usize> = rows
                .iter()
                .cloned()
                .filter(|&r| x[r][feature] >= threshold)
                .collect();
            let sse = sse_of(&left) + sse_of(&right);
            let candidate = (sse, feature, threshold);
            if best.map_or(true, |b| candidate < b) {
                best = Some(candidate);
            }
        }
    }
    match best {
        None => mean,
        Some((_, feature, threshold)) => {
            let side: Vec<usize> = rows
                .iter()
                .cloned()
                .filter(|&r| (x[r][feature] < threshold) == (probe[feature] < threshold))
                .collect();
            oracle_cart_predict(x, y, &side, probe)
        }
    }
}

fn toy_dataset(x: &[Vec<f64>], y: &[f64]) -> Dataset {
    let rows = x
        .iter()
        .zip(y)
        .enumerate()
        .map(|(k, (fv, &t))| {
            (
                FeatureVector::from_means(format!("r{k}"), fv.clone()),
                SensorEnvironment {
                    temperature: t,
                    light_intensity: 1.0 + t.abs(),
                },
            )
        })
        .collect();
    Dataset::new(rows).unwrap()
}

/// Small deterministic PRNG for instance generation (xorshift64*).
struct Prng(u64);
impl Prng {
    fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_F491_4F6C_DD1D) >> 11) as f64 / (1u64 << 53) as f64
    }
    fn next_usize(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_f64() * (hi - lo + 1) as f64) as usize
    }
}

#[test]
fn criterion_06_regressor_oracles() {
    let mut rng = Prng(0x5EED_CAFE);
    // single-tree CART vs brute-force enumeration
    for instance in 0..100 {
        let n = rng.next_usize(2, 8);
        let d = rng.next_usize(1, 3);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| (rng.next_f64() * 8.0).round()).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| (rng.next_f64() * 10.0).round()).collect();
        let ds = toy_dataset(&x, &y);
        let hyper = ForestHyperparams {
            n_trees: 1,
            features_per_split: d,
            min_leaf: 1,
            bootstrap: false,
        };
        let model = train_forest(&ds, Target::Temperature, &hyper, instance).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let mut probes: Vec<Vec<f64>> = x.clone();
        probes.push((0..d).map(|_| rng.next_f64() * 8.0).collect());
        for probe in &probes {
            let got = model.predict(probe).unwrap();
            let want = oracle_cart_predict(&x, &y, &all, probe);
            assert!(
                (got - want).abs() < 1e-12,
                "instance {instance}: tree {got} vs oracle {want} at {probe:?}"
            );
        }
    }

    // ridge vs exact normal equations (standardized 2-feature systems)
    for instance in 0..50 {
        let n = rng.next_usize(3, 5);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|k| vec![k as f64 + rng.next_f64(), rng.next_f64() * 5.0])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| 1.3 * r[0] - 0.4 * r[1] + rng.next_f64())
            .collect();
        for lambda in [0.0, 0.1, 10.0] {
            let model = train_ridge(&toy_dataset(&x, &y), Target::Temperature, lambda).unwrap();
            let (w0, w1) = exact_ridge_2d(&x, &y, lambda);
            for (got, want) in model.weights.iter().zip([w0, w1]) {
                let rel = (got - want).abs() / want.abs().max(1.0);
                assert!(rel < 1e-10, "instance {instance} λ={lambda}: {got} vs {want}");
            }
        }
    }
    println!(
        "criterion 6 PASS: single-tree CART equals brute-force split enumeration on 100 random \
         instances; ridge matches exact normal-equation solutions to 1e-10"
    );
}

/// Cramer's-rule solve of the standardized ridge normal equations, d = 2.
fn exact_ridge_2d(x: &[Vec<f64>], y: &[f64], lambda: f64) -> (f64, f64) {
    let n = y.len() as f64;
    let mean = |col: usize| x.iter().map(|r| r[col]).sum::<f64>() / n;
    let (m0, m1) = (mean(0), mean(1));
    let scale =
        |col: usize, m: f64| (x.iter().map(|r| (r[col] - m).powi(2)).sum::<f64>() / n).sqrt();
    let (s0, s1) = (scale(0, m0), scale(1, m1));
    let ym = y.iter().sum::<f64>() / n;
    let z: Vec<(f64, f64)> = x.iter().map(|r| ((r[0] - m0) / s0, (r[1] - m1) / s1)).collect();
    let a = z.iter().map(|p| p.0 * p.0).sum::<f64>() + lambda;
    let b = z.iter().map(|p| p.0 * p.1).sum::<f64>();
    let d = z.iter().map(|p| p.1 * p.1).sum::<f64>() + lambda;
    let r0 = z.iter().zip(y).map(|(p, &v)| p.0 * (v - ym)).sum::<f64>();
    let r1 = z.iter().zip(y).map(|(p, &v)| p.1 * (v - ym)).sum::<f64>();
    let det = a * d - b * b;
    ((d * r0 - b * r1) / det, (a * r1 - b * r0) / det)
}

#[test]
fn criterion_07_r2_definition() {
    let y = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(determination_coefficient(&y, &y).unwrap(), 1.0);
    let mean_pred = [2.5; 4];
    assert!(determination_coefficient(&y, &mean_pred).unwrap().abs() < 1e-15);
    assert_eq!(
        determination_coefficient(&[0.0, 1.0], &[1.0, 0.0]).unwrap(),
        -3.0
    );
    println!(
        "criterion 7 PASS: R^2 gives 1 for perfect prediction, 0 for the mean predictor, \
         and exactly -3 for y=[0,1], y_hat=[1,0]"
    );
}

// ---- shared full-size benchmark for criteria 8 and 9 ---------------------

fn benchmark_sweep() -> &'static SweepResult {
    static SWEEP: OnceLock<SweepResult> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let config = ExperimentConfig {
            n_tr_list: vec![11, 458],
            sweep_seeds: 5,
            ..ExperimentConfig::default()
        };
        let pipeline = Pipeline::build(config).unwrap();
        let dataset = generate_dataset(&pipeline).unwrap();
        assert_eq!(dataset.len(), 2290);
        let (sweep, _) = run_ntr_sweep(&dataset, &pipeline.config).unwrap();
        sweep
    })
}

fn mean_r2(sweep: &SweepResult, regressor: &str, n_tr: usize, target: Target) -> f64 {
    let scores: Vec<f64> = sweep
        .rows
        .iter()
        .filter(|r| r.regressor == regressor && r.n_tr == n_tr)
        .map(|r| match target {
            Target::Temperature => r.r2_temperature,
            Target::Light => r.r2_light,
        })
        .collect();
    assert_eq!(scores.len(), 5);
    scores.iter().sum::<f64>() / scores.len() as f64
}

#[test]
fn criterion_08_end_to_end_trend() {
    let start = Instant::now();
    let sweep = benchmark_sweep();
    for target in [Target::Temperature, Target::Light] {
        let at_458 = mean_r2(sweep, "forest", 458, target);
        let at_11 = mean_r2(sweep, "forest", 11, target);
        assert!(at_458 >= 0.95, "{target:?}: mean R^2 at N_tr=458 is {at_458}");
        assert!(
            at_11 < at_458,
            "{target:?}: R^2 did not degrade ({at_11} vs {at_458})"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 8 PASS: on the 2290-row benchmark, mean forest R^2 at N_tr=458 is \
         {:.4}/{:.4} (T/L) >= 0.95 and degrades to {:.4}/{:.4} at N_tr=11, in {elapsed:?}",
        mean_r2(sweep, "forest", 458, Target::Temperature),
        mean_r2(sweep, "forest", 458, Target::Light),
        mean_r2(sweep, "forest", 11, Target::Temperature),
        mean_r2(sweep, "forest", 11, Target::Light),
    );
}

#[test]
fn criterion_09_small_n_ridge_robustness() {
    let sweep = benchmark_sweep();
    let seeds: Vec<u64> = sweep
        .rows
        .iter()
        .filter(|r| r.n_tr == 11 && r.regressor == "forest")
        .map(|r| r.seed)
        .collect();
    let mut better_targets = Vec::new();
    for target in [Target::Temperature, Target::Light] {
        let ridge = mean_r2(sweep, "ridge", 11, target);
        let forest = mean_r2(sweep, "forest", 11, target);
        if ridge > forest {
            better_targets.push((target, ridge, forest));
        }
    }
    // soft criterion: a miss is reported with the seed set instead of
    // failing the build
    if better_targets.is_empty() {
        println!(
            "criterion 9 SOFT-FAIL: ridge did not beat the forest at N_tr=11 for any target \
             over split seeds {seeds:?}"
        );
    } else {
        let (target, ridge, forest) = better_targets[0];
        println!(
            "criterion 9 PASS: at N_tr=11 mean ridge R^2 {ridge:.4} exceeds forest {forest:.4} \
             for {target:?} over 5 seeds"
        );
    }
}

#[test]
fn criterion_10_reproducibility() {
    let bin = env!("CARGO_BIN_EXE_wavesel");
    let base = std::env::temp_dir().join("wavesel_acceptance_repro");
    let _ = std::fs::remove_dir_all(&base);
    std::fs::create_dir_all(&base).unwrap();
    let config_path = base.join("config.txt");
    std::fs::write(
        &config_path,
        "grid.points = 30\ngrid.repeats = 2\nsweep.n_tr = 10,40\nsweep.seeds = 2\nforest.trees = 25\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = base.join(run);
        let status = Command::new(bin)
            .args(["--config"])
            .arg(&config_path)
            .args(["--seed", "7", "--out"])
            .arg(&out)
            .arg("sweep-ntr")
            .status()
            .unwrap();
        assert!(status.success());
        let mut files: Vec<_> = std::fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        let blobs: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read(p).unwrap(),
                )
            })
            .collect();
        outputs.push(blobs);
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1], "CSV outputs differ between runs");
    println!(
        "criterion 10 PASS: two sweep-ntr runs with identical config and seed produced \
         byte-identical CSV outputs ({} files)",
        outputs[0].len()
    );
}
