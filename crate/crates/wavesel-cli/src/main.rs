//! `wavesel`: simulate waveform-selective metasurface sensor transients and
//! run the machine-learning estimation pipeline end to end.

use clap::{Parser, Subcommand};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wavesel_cli::{
    config_reference, emit_reports, generate_dataset, parse_surface_mode, plot_script,
    read_sweep_csv, run_ntr_sweep, CliError, ExperimentConfig, Pipeline, Result,
};
use wavesel_core::{
    determination_coefficient, frequency_response_surrogate, load_model, read_dataset_csv,
    save_model, train_forest, train_ridge, write_dataset_csv, write_frequency_csv,
    write_states_csv, write_trace_csv, Dataset, RegressorModel, SensorEnvironment,
    SurrogateRegime, Target,
};

#[derive(Parser)]
#[command(
    name = "wavesel",
    about = "Waveform-selective metasurface sensing: circuit simulation, dataset synthesis, and regression benchmarks",
    after_long_help = config_reference_help()
)]
struct Cli {
    /// Experiment config file (flat `key = value` lines; see --help for keys)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed; overrides the config file's `seed`
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Surface topology; overrides the config file's `surface.mode`
    #[arg(long, global = true, value_parser = ["absorber_reflect", "microstrip_transmit", "line_transmit"])]
    mode: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trace at (simulate.temperature, simulate.light) and
    /// write states.csv + trace.csv
    Simulate,
    /// Two-state (short pulse vs CW) frequency response of the loaded
    /// resonator surrogate
    FreqSweep,
    /// Generate the labeled synthetic dataset (dataset.csv)
    GenDataset,
    /// Train forest and ridge models per target on dataset.csv
    Train,
    /// Run the N_tr sweep and emit sweep.csv, scatter files, and plot script
    SweepNtr,
    /// Evaluate saved models against dataset.csv
    Eval,
    /// Regenerate the plot script from an existing sweep.csv
    Report,
}

fn config_reference_help() -> String {
    config_reference()
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read config '{}': {e}", path.display()))
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(mode) = &cli.mode {
        config.surface_mode = parse_surface_mode(mode)?;
    }
    config.validate()?;
    Ok(config)
}

fn ensure_outdir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(CliError::from)
}

fn cmd_simulate(config: ExperimentConfig, out: &Path) -> Result<()> {
    let pipeline = Pipeline::build(config)?;
    let env = SensorEnvironment {
        temperature: pipeline.config.sim_temperature,
        light_intensity: pipeline.config.sim_light,
    };
    let (states, trace) = pipeline.simulate_trace(&env, "simulate", None)?;
    ensure_outdir(out)?;
    let states_path = out.join("states.csv");
    let mut buf = Vec::new();
    write_states_csv(&mut buf, &states)?;
    fs::write(&states_path, buf)?;
    let trace_path = out.join("trace.csv");
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &trace)?;
    fs::write(&trace_path, buf)?;
    println!(
        "simulated T = {} degC, L = {} lux: {} states -> {}, {} trace samples -> {}",
        env.temperature,
        env.light_intensity,
        states.len(),
        states_path.display(),
        trace.times.len(),
        trace_path.display()
    );
    Ok(())
}

fn cmd_freq_sweep(config: ExperimentConfig, out: &Path) -> Result<()> {
    let pipeline = Pipeline::build(config)?;
    let env = SensorEnvironment {
        temperature: pipeline.config.sim_temperature,
        light_intensity: pipeline.config.sim_light,
    };
    let load = pipeline.load_for(&env)?;
    let c = &pipeline.config;
    let grid: Vec<f64> = (0..c.freq_points)
        .map(|k| c.freq_min + (c.freq_max - c.freq_min) * k as f64 / (c.freq_points - 1) as f64)
        .collect();
    ensure_outdir(out)?;
    for (regime, name) in [
        (SurrogateRegime::ShortPulse, "freq_short_pulse.csv"),
        (SurrogateRegime::Cw, "freq_cw.csv"),
    ] {
        let points = frequency_response_surrogate(&pipeline.surface, &load, &grid, regime)?;
        let mut buf = Vec::new();
        write_frequency_csv(&mut buf, &points)?;
        let path = out.join(name);
        fs::write(&path, buf)?;
        println!("{} points -> {}", points.len(), path.display());
    }
    Ok(())
}

fn cmd_gen_dataset(config: ExperimentConfig, out: &Path) -> Result<()> {
    let pipeline = Pipeline::build(config)?;
    let dataset = generate_dataset(&pipeline)?;
    ensure_outdir(out)?;
    let path = out.join("dataset.csv");
    let mut buf = Vec::new();
    write_dataset_csv(&mut buf, &dataset)?;
    fs::write(&path, buf)?;
    println!("{} rows -> {}", dataset.len(), path.display());
    Ok(())
}

fn open_dataset(out: &Path) -> Result<Dataset> {
    let path = out.join("dataset.csv");
    let file = fs::File::open(&path).map_err(|e| {
        CliError::Io(format!(
            "cannot open {} (run gen-dataset first): {e}",
            path.display()
        ))
    })?;
    read_dataset_csv(std::io::BufReader::new(file)).map_err(CliError::from)
}

fn model_path(out: &Path, kind: &str, target: Target) -> PathBuf {
    out.join(format!("model_{kind}_{}.json", target.tag()))
}

fn cmd_train(config: ExperimentConfig, out: &Path) -> Result<()> {
    let dataset = open_dataset(out)?;
    for target in [Target::Temperature, Target::Light] {
        let forest = RegressorModel::Forest(train_forest(
            &dataset,
            target,
            &config.forest,
            config.master_seed,
        )?);
        let ridge = RegressorModel::Ridge(train_ridge(&dataset, target, config.ridge_lambda)?);
        for model in [forest, ridge] {
            let path = model_path(out, model.kind(), target);
            save_model(&path, &model)?;
            println!("trained {} for {} -> {}", model.kind(), target.tag(), path.display());
        }
    }
    Ok(())
}

fn cmd_eval(out: &Path) -> Result<()> {
    let dataset = open_dataset(out)?;
    for target in [Target::Temperature, Target::Light] {
        for kind in ["forest", "ridge"] {
            let path = model_path(out, kind, target);
            let model = load_model(&path).map_err(|e| {
                CliError::Io(format!(
                    "cannot load {} (run train first): {e}",
                    path.display()
                ))
            })?;
            let mut actual = Vec::with_capacity(dataset.len());
            let mut estimated = Vec::with_capacity(dataset.len());
            for (fv, env) in dataset.rows() {
                actual.push(target.of(env));
                estimated.push(model.predict(&fv.segment_means_db)?);
            }
            let r2 = determination_coefficient(&actual, &estimated)?;
            println!("{kind} {} R^2 = {r2:.4} over {} rows", target.tag(), dataset.len());
        }
    }
    Ok(())
}

fn cmd_sweep_ntr(config: ExperimentConfig, out: &Path) -> Result<()> {
    let dataset = if out.join("dataset.csv").exists() {
        open_dataset(out)?
    } else {
        let pipeline = Pipeline::build(config.clone())?;
        let dataset = generate_dataset(&pipeline)?;
        ensure_outdir(out)?;
        let mut buf = Vec::new();
        write_dataset_csv(&mut buf, &dataset)?;
        fs::write(out.join("dataset.csv"), buf)?;
        dataset
    };
    let (sweep, scatters) = run_ntr_sweep(&dataset, &config)?;
    let files = emit_reports(&sweep, &scatters, out)?;
    for f in &files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_report(out: &Path) -> Result<()> {
    let sweep_path = out.join("sweep.csv");
    let sweep = read_sweep_csv(&sweep_path)?;
    if sweep.rows.is_empty() {
        return Err(CliError::Config(format!(
            "{} has no data rows",
            sweep_path.display()
        )));
    }
    // rebuild the scatter list from the files actually present
    let mut refs = Vec::new();
    for entry in fs::read_dir(out)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(stem) = name.strip_suffix(".csv") {
            if let Some(rest) = stem.strip_prefix("scatter_") {
                if let Some((_, ntr)) = rest.rsplit_once('_') {
                    if let Ok(n_tr) = ntr.parse::<usize>() {
                        refs.push((stem.to_string(), n_tr));
                    }
                }
            }
        }
    }
    refs.sort();
    let path = out.join("plot_sweep.gp");
    fs::write(&path, plot_script(&refs))?;
    println!(
        "report over {} sweep rows, {} scatter files -> {}",
        sweep.rows.len(),
        refs.len(),
        path.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Simulate => cmd_simulate(config, &cli.out),
        Command::FreqSweep => cmd_freq_sweep(config, &cli.out),
        Command::GenDataset => cmd_gen_dataset(config, &cli.out),
        Command::Train => cmd_train(config, &cli.out),
        Command::SweepNtr => cmd_sweep_ntr(config, &cli.out),
        Command::Eval => cmd_eval(&cli.out),
        Command::Report => cmd_report(&cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavesel: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
