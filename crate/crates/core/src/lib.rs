//! Vibrational polaritons in an optical cavity and their double-quantum-coherence
//! 2DIR spectra.
//!
//! All energies are in wavenumbers (cm^-1); delays are in femtoseconds.

pub mod analysis;
pub mod config;
pub mod error;
pub mod fock;
pub mod fourier;
pub mod hamiltonian;
pub mod model;
pub mod output;
pub mod polariton;
pub mod presets;
pub mod selfcheck;
pub mod signal;
pub mod units;

pub use error::{Error, Result};
pub use model::{CavitySpec, CouplingSource, DephasingModel, SystemSpec, VibrationalMode, WeakCouplingPolicy};
pub use polariton::{transition_table, PolaritonSystem, TransitionTable};
pub use signal::{signal_at, spectrum, time_signal, Axis, FrequencyGrid, Pathway, SignalValue, SpectrumGrid};
