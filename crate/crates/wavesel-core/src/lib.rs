//! Time-domain simulation and sensing pipeline for waveform-selective
//! metasurface unit cells: a diode bridge feeding a parallel RC load whose
//! charging transient encodes the ambient temperature (capacitance) and
//! light intensity (photocell resistance). The crate covers the circuit
//! solver, scattering traces, sensor transduction models, log-time feature
//! extraction, and the forest/ridge regressors that invert the traces back
//! to environmental quantities.

pub mod circuit;
pub mod dataset;
pub mod diode;
pub mod error;
pub mod features;
pub mod forest;
pub mod metrics;
pub mod model;
pub mod ridge;
pub mod scattering;
pub mod sensors;
pub mod transient;

pub use circuit::{analytic_capacitor_voltage, time_constant, BridgeLoad};
pub use dataset::{random_split, read_dataset_csv, write_dataset_csv, Dataset, SplitSpec, Target};
pub use diode::{diode_conductance, diode_current, diode_dynamic_resistance, DiodeModel};
pub use error::{CoreError, Result};
pub use features::{extract_features, FeatureVector, DEFAULT_SEGMENTS};
pub use forest::{train_forest, ForestHyperparams, ForestModel};
pub use metrics::determination_coefficient;
pub use model::{load_model, save_model, RegressorModel, MODEL_FORMAT_VERSION};
pub use ridge::{train_ridge, RidgeModel};
pub use scattering::{
    frequency_response_surrogate, reflectance_trace, resonance_frequency,
    steady_state_reflectance, write_frequency_csv, write_trace_csv, SurfaceConfig, SurfaceMode,
    SurrogateRegime, TransientTrace,
};
pub use sensors::{
    calibrate_photocell, calibrate_photocell_fixed_gamma, capacitance_at, resistance_at,
    CalibrationContext, Photocell, SensorEnvironment, ThermoCapacitor,
};
pub use transient::{transient_solve, write_states_csv, CircuitState, StimulusMode, StimulusSpec};
