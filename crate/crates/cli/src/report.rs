//! Run reports and their JSON / CSV serialisations.

use std::collections::BTreeMap;

use cavity_ghz::{AtomFamily, GhzRun, OutcomeRecord, Sign};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: String,
    pub sign: String,
    pub shots: usize,
    pub seed: u64,
    pub cutoff: usize,
    pub tol: f64,
}

impl RunConfig {
    pub fn new(family: AtomFamily, sign: Sign, shots: usize, seed: u64, cutoff: usize, tol: f64) -> Self {
        let sign = match sign {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        };
        Self { family: family.to_string(), sign: sign.to_string(), shots, seed, cutoff, tol }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub i: usize,
    pub labels: Vec<String>,
    pub eigs: Vec<i8>,
    pub product: i8,
}

impl From<&OutcomeRecord> for ShotRecord {
    fn from(r: &OutcomeRecord) -> Self {
        Self { i: r.shot, labels: r.labels.clone(), eigs: r.eigs.clone(), product: r.product }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub shots: Vec<ShotRecord>,
    /// Counts keyed by the comma-joined detection triple.
    pub histogram: BTreeMap<String, usize>,
    pub empirical_product: f64,
    /// `⟨D⟩` on the state entering readout, rounded to ±1 when within `tol`.
    #[serde(rename = "expected_D")]
    pub expected_d: f64,
    pub pass: bool,
}

impl RunReport {
    pub fn new(config: RunConfig, run: &GhzRun<f64>) -> Self {
        let tol = config.tol;
        let expected_d = run.expected_sign(tol).map_or(run.expected_d, f64::from);
        let histogram = run.histogram.iter().map(|(k, &v)| (k.join(","), v)).collect();
        Self {
            shots: run.records.iter().map(ShotRecord::from).collect(),
            histogram,
            empirical_product: run.empirical_product,
            expected_d,
            pass: run.passed(tol),
            config,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("shot,label1,label2,label3,eig1,eig2,eig3,product\n");
        for r in &self.shots {
            let labels = r.labels.join(",");
            let eigs: Vec<String> = r.eigs.iter().map(i8::to_string).collect();
            out.push_str(&format!("{},{},{},{}\n", r.i, labels, eigs.join(","), r.product));
        }
        out
    }
}
