use serde::{Deserialize, Serialize};

use congest_mincut::driver::{CutSource, PackingPolicy, TraceEvent};
use congest_mincut::RoundStats;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct InputSummary {
    pub path: String,
    pub n: usize,
    pub m: usize,
    pub m_multi: u64,
    pub max_weight: u64,
    pub diameter: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub k: u64,
    pub theta: f64,
    pub policy: PackingPolicy,
    pub bits: u32,
    pub round_limit: u64,
    pub seed: u64,
    pub exhaustive: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CutReport {
    pub weight: u64,
    pub side_size: usize,
    /// Members of the side that holds vertex 0.
    pub side: Vec<u32>,
    pub side_digest: String,
    pub source: CutSource,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub lambda: u64,
    pub side: Vec<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub input: InputSummary,
    pub config: ConfigEcho,
    pub result: CutReport,
    pub oracle: Option<OracleReport>,
    pub ratio: Option<f64>,
    pub check_passed: Option<bool>,
    pub stats: RoundStats,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TraceEvent>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub schema_version: u32,
    pub error: ErrorBody,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<RoundStats>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OracleRun {
    pub schema_version: u32,
    pub input: InputSummary,
    pub lambda: u64,
    pub side: Vec<u32>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub diameter: usize,
    pub sqrt_n: f64,
    pub seed: u64,
    pub fragments: usize,
    pub decompose: u64,
    pub preorder: u64,
    pub lowhigh: u64,
    pub bridges: u64,
    pub max_bits: u32,
    pub budget: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub rows: Vec<BenchRow>,
}

/// FNV-1a over the little-endian member ids.
pub fn side_digest(members: &[u32]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for m in members {
        for b in m.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}
