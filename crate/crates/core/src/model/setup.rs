use serde::{Deserialize, Serialize};

use crate::dynamics::Engine;
use crate::error::{Error, Result};
use crate::model::{
    validate_config, NoiseEfficiencyParams, ParametricCavityParams, PhysicalConfig, PulseSchedule,
    QubitParams, ReadoutCavityParams, TibParams, Violation,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct IntegratorSettings<T> {
    pub dt_ns: T,
}

/// On-disk layout of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", deny_unknown_fields)]
struct Document<T> {
    qubit: QubitParams<T>,
    readout: ReadoutCavityParams<T>,
    paramp: ParametricCavityParams<T>,
    tib1: TibParams<T>,
    tib2: TibParams<T>,
    noise: NoiseEfficiencyParams<T>,
    schedule: PulseSchedule<T>,
    integrator: IntegratorSettings<T>,
}

/// Device parameters together with the measurement sequence they run.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup<T> {
    pub config: PhysicalConfig<T>,
    pub schedule: PulseSchedule<T>,
}

impl<T: Real> Setup<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document<T> = serde_json::from_str(text)?;
        Ok(Self {
            config: PhysicalConfig {
                qubit: doc.qubit,
                readout: doc.readout,
                paramp: doc.paramp,
                tib1: doc.tib1,
                tib2: doc.tib2,
                noise: doc.noise,
                dt_ns: doc.integrator.dt_ns,
            },
            schedule: doc.schedule,
        })
    }

    pub fn to_json(&self) -> String {
        let c = self.config.clone();
        let doc = Document {
            qubit: c.qubit,
            readout: c.readout,
            paramp: c.paramp,
            tib1: c.tib1,
            tib2: c.tib2,
            noise: c.noise,
            schedule: self.schedule.clone(),
            integrator: IntegratorSettings { dt_ns: c.dt_ns },
        };
        serde_json::to_string_pretty(&doc).expect("configuration serialises")
    }

    /// Static invariants, followed by the efficiency budget once those hold.
    pub fn violations(&self) -> Vec<Violation> {
        let v = validate_config(&self.config, &self.schedule);
        if !v.is_empty() {
            return v;
        }
        match Engine::new(&self.config, &self.schedule) {
            Ok(engine) => engine.budget().violations(),
            Err(e) => vec![Violation::new("schedule", format!("sequence cannot be integrated: {e}"))],
        }
    }

    /// Fail with every violation when the setup is invalid.
    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }

    pub fn cast<U: Real>(&self) -> Setup<U> {
        Setup {
            config: self.config.cast(),
            schedule: self.schedule.cast(),
        }
    }
}

/// Reference operating point shipped with the crate.
pub const PAPER_JSON: &str = include_str!("../../examples/paper.json");

pub fn paper_setup() -> Setup<f64> {
    Setup::from_json(PAPER_JSON).expect("bundled configuration parses")
}
