//! Serializable result documents and the CSV renderings of each verb.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ChannelSummary {
    pub rows: usize,
    pub cols: usize,
    pub row_sparse: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_ris: Option<ChannelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ris_rx: Option<ChannelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<ChannelSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub incident_row: usize,
    pub tx_col: usize,
    pub outgoing_col: usize,
    pub gain: f64,
    pub shift: i64,
    pub snr: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectBeamReport {
    pub column: usize,
    pub gain: f64,
    pub snr: f64,
    pub snr_db: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AllocationReport {
    pub rank: usize,
    pub capacity: f64,
    pub r: Vec<f64>,
    pub q_reflected: Vec<f64>,
    pub q_direct: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubarrayReport {
    /// Index into `pairs` of the beam pair this subarray serves.
    pub pair: usize,
    pub area_ratio: f64,
    pub element_count: usize,
    pub shift: i64,
    pub phase_step_rad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RisReport {
    pub n_elements: usize,
    pub subarrays: Vec<SubarrayReport>,
    pub element_phases_rad: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BudgetEcho {
    pub noise_power: f64,
    pub bandwidth: f64,
    pub p_max: f64,
    pub total_power: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverEcho {
    pub eps_conv: f64,
    pub max_iterations: usize,
}

/// Everything a scenario run produces.
#[derive(Debug, Clone, Serialize)]
pub struct ResultDocument {
    pub scenario: String,
    pub mode: String,
    pub seed: u64,
    pub budget: BudgetEcho,
    pub solver: SolverEcho,
    pub channels: ChannelsReport,
    pub pairs: Vec<PairReport>,
    pub direct_beams: Vec<DirectBeamReport>,
    pub allocation: AllocationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ris: Option<RisReport>,
}

impl ResultDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    /// Per-beam summary table. Reflected beams come first in pairing order,
    /// then direct beams; `beam` is the ordinal within its kind (matching the
    /// allocation vectors) and the area column is empty for direct beams.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,beam,snr,snr_db,area_share,power_share\n");
        for (j, pair) in self.pairs.iter().enumerate() {
            let r = self.allocation.r.get(j).copied().unwrap_or(0.0);
            let q = self.allocation.q_reflected.get(j).copied().unwrap_or(0.0);
            out.push_str(&format!(
                "reflected,{},{},{},{},{}\n",
                j, pair.snr, pair.snr_db, r, q
            ));
        }
        for (j, beam) in self.direct_beams.iter().enumerate() {
            let q = self.allocation.q_direct.get(j).copied().unwrap_or(0.0);
            out.push_str(&format!(
                "direct,{},{},{},,{}\n",
                j, beam.snr, beam.snr_db, q
            ));
        }
        out
    }
}

/// Oracle cross-check of one scenario.
#[derive(Debug, Clone, Serialize)]
pub struct OracleDocument {
    pub scenario: String,
    pub objective: String,
    pub n_starts: usize,
    pub seed: u64,
    pub oracle_capacity: f64,
    pub best_r: Vec<f64>,
    pub best_q: Vec<f64>,
    pub max_kkt_residual: f64,
    pub algorithm_capacity: f64,
    pub tolerance: f64,
    pub agreement: bool,
}

impl OracleDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }

    pub fn to_csv(&self) -> String {
        format!(
            "scenario,objective,n_starts,seed,oracle_capacity,algorithm_capacity,tolerance,agreement\n{},{},{},{},{},{},{},{}\n",
            self.scenario,
            self.objective,
            self.n_starts,
            self.seed,
            self.oracle_capacity,
            self.algorithm_capacity,
            self.tolerance,
            self.agreement
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub beam_pairs: usize,
    pub snr_db: Vec<f64>,
    pub capacity: f64,
    pub r_star: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Row {
    pub beams: String,
    pub snr_direct_db: Vec<f64>,
    pub snr_reflected_db: Vec<f64>,
    pub capacity_reflected: f64,
    pub capacity_direct: f64,
    pub capacity_total: f64,
    pub r_star: Vec<f64>,
    pub q_reflected: Vec<f64>,
    pub q_direct: Vec<f64>,
}

/// Fixed four-decimal rendering used by the reference-table CSVs.
pub fn fmt4(value: f64) -> String {
    format!("{value:.4}")
}

pub fn join4(values: &[f64]) -> String {
    values.iter().map(|&v| fmt4(v)).collect::<Vec<_>>().join(";")
}

pub fn table1_csv(rows: &[Table1Row]) -> String {
    let mut out = String::from("beam_pairs,snr_db,capacity,r_star\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.beam_pairs,
            join4(&row.snr_db),
            fmt4(row.capacity),
            join4(&row.r_star)
        ));
    }
    out
}

pub fn table2_csv(rows: &[Table2Row]) -> String {
    let mut out = String::from(
        "beams,snr_direct_db,snr_reflected_db,capacity_reflected,capacity_direct,capacity_total,r_star,q_reflected,q_direct\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.beams,
            join4(&row.snr_direct_db),
            join4(&row.snr_reflected_db),
            fmt4(row.capacity_reflected),
            fmt4(row.capacity_direct),
            fmt4(row.capacity_total),
            join4(&row.r_star),
            join4(&row.q_reflected),
            join4(&row.q_direct)
        ));
    }
    out
}

/// A plain numeric table (figure plot data).
#[derive(Debug, Clone, Serialize)]
pub struct NumericTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}
