//! JSON report types. Floating-point values are written with 17 significant
//! digits so that reruns can be compared byte for byte.

use std::collections::BTreeMap;

use serde::ser::{Serialize, Serializer};
use serde_json::value::RawValue;

/// An `f64` serialized as `d.dddddddddddddddde±x`; non-finite values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: Sig17,
    pub batch_se: Option<Sig17>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_error: Option<Sig17>,
}

impl Estimate {
    pub fn with_se(value: f64, se: f64) -> Self {
        Self { value: Sig17(value), batch_se: Some(Sig17(se)), quadrature_error: None }
    }

    pub fn quadrature(value: f64, error: f64) -> Self {
        Self { value: Sig17(value), batch_se: None, quadrature_error: Some(Sig17(error)) }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Reference {
    pub value: Sig17,
    /// Estimate minus reference.
    pub delta: Sig17,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EstimateReport {
    pub run_type: String,
    pub config: serde_json::Value,
    pub estimates: BTreeMap<String, Estimate>,
    pub reference: BTreeMap<String, Reference>,
    pub counts: BTreeMap<String, u64>,
    pub wall_time_s: Sig17,
}

impl EstimateReport {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.estimates.get(name).map(|e| e.value.0)
    }

    pub fn batch_se(&self, name: &str) -> Option<f64> {
        self.estimates.get(name).and_then(|e| e.batch_se).map(|s| s.0)
    }

    pub fn count(&self, name: &str) -> Option<u64> {
        self.counts.get(name).copied()
    }

    pub fn add_reference(&mut self, estimate: &str, key: &str, reference: f64) {
        if let Some(v) = self.value(estimate) {
            self.reference.insert(key.to_string(), Reference { value: Sig17(reference), delta: Sig17(v - reference) });
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// The report as JSON with `wall_time_s` removed.
    pub fn to_json_without_timing(&self) -> String {
        #[derive(serde::Serialize)]
        struct Untimed<'a> {
            run_type: &'a str,
            config: &'a serde_json::Value,
            estimates: &'a BTreeMap<String, Estimate>,
            reference: &'a BTreeMap<String, Reference>,
            counts: &'a BTreeMap<String, u64>,
        }
        let u = Untimed {
            run_type: &self.run_type,
            config: &self.config,
            estimates: &self.estimates,
            reference: &self.reference,
            counts: &self.counts,
        };
        serde_json::to_string_pretty(&u).expect("report serialization")
    }
}
