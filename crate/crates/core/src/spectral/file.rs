//! JSON measure files.
//!
//! ```json
//! {"kind":"atomic","kappa":"two_pi","atoms":[{"x":1.0,"y":0.0,"w":0.5}, ...]}
//! {"kind":"preset","name":"uniform_circle","params":{"K":64}}
//! ```
//!
//! Numbers are written in shortest round-trip form, so writing and reading
//! back reproduces every `f64` bit for bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Kappa, Preset, SpectralMeasure};
use crate::error::{NodalError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomRecord {
    pub x: f64,
    pub y: f64,
    pub w: f64,
}

/// `"two_pi"`, `"one"`, or a bare positive number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KappaRecord {
    Named(KappaName),
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaName {
    TwoPi,
    One,
}

impl From<Kappa> for KappaRecord {
    fn from(k: Kappa) -> Self {
        match k {
            Kappa::TwoPi => KappaRecord::Named(KappaName::TwoPi),
            Kappa::One => KappaRecord::Named(KappaName::One),
            Kappa::Custom(v) => KappaRecord::Value(v),
        }
    }
}

impl From<KappaRecord> for Kappa {
    fn from(k: KappaRecord) -> Self {
        match k {
            KappaRecord::Named(KappaName::TwoPi) => Kappa::TwoPi,
            KappaRecord::Named(KappaName::One) => Kappa::One,
            KappaRecord::Value(v) => Kappa::Custom(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureFile {
    Atomic {
        kappa: KappaRecord,
        atoms: Vec<AtomRecord>,
    },
    Preset {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa: Option<KappaRecord>,
    },
}

impl MeasureFile {
    pub fn atomic<F: Real>(m: &SpectralMeasure<F>) -> Self {
        MeasureFile::Atomic {
            kappa: m.kappa().into(),
            atoms: m
                .atoms()
                .iter()
                .map(|a| AtomRecord { x: a.xi[0].f64(), y: a.xi[1].f64(), w: a.w.f64() })
                .collect(),
        }
    }

    pub fn preset(p: &Preset) -> Self {
        MeasureFile::Preset {
            name: p.name().to_string(),
            params: p.params().into_iter().collect(),
            kappa: None,
        }
    }

    pub fn build<F: Real>(&self) -> Result<SpectralMeasure<F>> {
        match self {
            MeasureFile::Atomic { kappa, atoms } => SpectralMeasure::make_atomic(
                atoms.iter().map(|a| ([F::of(a.x), F::of(a.y)], F::of(a.w))),
                (*kappa).into(),
            ),
            MeasureFile::Preset { name, params, kappa } => {
                let m = Preset::from_parts(name, |k| params.get(k).copied())?.build::<F>()?;
                Ok(match kappa {
                    Some(k) => m.with_kappa((*k).into()),
                    None => m,
                })
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| NodalError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("measure files always serialize")
    }
}
