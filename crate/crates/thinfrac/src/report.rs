use std::collections::BTreeMap;

/// A boolean check outcome together with the numeric margin that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub margin: f64,
}

/// Named scalar metrics plus per-check verdicts.
///
/// `BTreeMap` keeps iteration order deterministic, which the CSV writers
/// rely on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalysisReport {
    pub metrics: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, Verdict>,
}

impl AnalysisReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: f64) -> &mut Self {
        self.metrics.insert(key.to_string(), value);
        self
    }

    pub fn verdict(&mut self, key: &str, pass: bool, margin: f64) -> &mut Self {
        self.verdicts.insert(key.to_string(), Verdict { pass, margin });
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }
}
