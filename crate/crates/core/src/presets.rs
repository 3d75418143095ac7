//! Amide-I and Amide-I+II systems of N-methylacetamide in an infrared cavity.
//!
//! All values in cm^-1. Couplings start at zero; sweeps scale a unit base
//! vector, so the sweep value is g~ for every mode.

use crate::error::{Error, Result};
use crate::model::{CavitySpec, CouplingSource, SystemSpec, VibrationalMode};

pub const AMIDE_I: &str = "amide-I";
pub const AMIDE_I_II: &str = "amide-I+II";

pub const CAVITY_CUTOFF: f64 = 1625.0;
pub const CAVITY_DECAY: f64 = 0.0;
pub const N_EFF: f64 = 0.5;
pub const AMIDE_I_FREQUENCY: f64 = 1625.0;
pub const AMIDE_II_FREQUENCY: f64 = 1545.0;
pub const DEPHASING: f64 = 20.0;
pub const AMIDE_I_ANHARMONICITY: f64 = 15.0;
pub const AMIDE_II_ANHARMONICITY: f64 = 11.0;
pub const CROSS_ANHARMONICITY: f64 = 10.0;
pub const SCALAR_COUPLING: f64 = 15.0;

fn cavity() -> CavitySpec {
    CavitySpec::at_normal_incidence(CAVITY_CUTOFF, N_EFF, CAVITY_DECAY).expect("preset cavity")
}

fn mode(frequency: f64) -> VibrationalMode {
    VibrationalMode::new(frequency, DEPHASING, 1.0, 1.0).expect("preset mode")
}

/// Single Amide-I mode resonant with the cavity cutoff.
pub fn amide_i() -> SystemSpec {
    SystemSpec::builder(vec![mode(AMIDE_I_FREQUENCY)], cavity())
        .anharmonicity(vec![vec![AMIDE_I_ANHARMONICITY]])
        .couplings(CouplingSource::Direct(vec![0.0]))
        .build()
        .expect("preset amide-I")
}

/// Coupled Amide-I and Amide-II modes.
pub fn amide_i_ii() -> SystemSpec {
    SystemSpec::builder(vec![mode(AMIDE_I_FREQUENCY), mode(AMIDE_II_FREQUENCY)], cavity())
        .scalar_coupling(vec![vec![0.0, SCALAR_COUPLING], vec![SCALAR_COUPLING, 0.0]])
        .anharmonicity(vec![
            vec![AMIDE_I_ANHARMONICITY, CROSS_ANHARMONICITY],
            vec![CROSS_ANHARMONICITY, AMIDE_II_ANHARMONICITY],
        ])
        .couplings(CouplingSource::Direct(vec![0.0, 0.0]))
        .build()
        .expect("preset amide-I+II")
}

pub fn by_name(name: &str) -> Result<SystemSpec> {
    match name {
        AMIDE_I => Ok(amide_i()),
        AMIDE_I_II => Ok(amide_i_ii()),
        other => Err(Error::Config(format!(
            "unknown preset `{other}` (expected `{AMIDE_I}` or `{AMIDE_I_II}`)"
        ))),
    }
}

pub fn names() -> [&'static str; 2] {
    [AMIDE_I, AMIDE_I_II]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(by_name("amide-I").unwrap().mode_count(), 1);
        assert_eq!(by_name("amide-I+II").unwrap().mode_count(), 2);
        assert!(by_name("amide-III").is_err());
    }

    #[test]
    fn table_values() {
        let s = amide_i_ii();
        assert_eq!(s.cavity_frequency(), 1625.0);
        assert_eq!(s.detunings(), vec![0.0, -80.0]);
        assert_eq!(s.scalar_coupling()[(0, 1)], 15.0);
        assert_eq!(s.anharmonicity()[(1, 1)], 11.0);
        assert_eq!(s.slot_rates(), vec![0.0, 20.0, 20.0]);
    }
}
