//! The experiment pipelines behind each CLI verb.

use anyhow::{anyhow, bail, Context, Result};

use ris_sparse::alloc::{
    dir_ris_rank_sweep, direct_capacity, joint_power_dir_ris_alloc_1, joint_power_ris_alloc_1,
    mimo_vs_reflection_sweep, opt_dir_ris_rank_traced, opt_ris_rank_traced,
    reflection_capacity_rq, ris_rank_sweep, AllocationResult, SolverConfig,
};
use ris_sparse::channel::{build_virtual_channel, nonzero_tx_beams, VirtualChannel};
use ris_sparse::direct::direct_link_capacity;
use ris_sparse::oracle::{capacity_surface, projected_gradient_multistart, CapacityObjective};
use ris_sparse::reflection::{encode_subarrays, pair_beams, synthesize_phase_vector, BeamPair};

use crate::report::{
    table1_csv, table2_csv, AllocationReport, BudgetEcho, ChannelSummary, ChannelsReport,
    DirectBeamReport, NumericTable, OracleDocument, PairReport, ResultDocument, RisReport,
    SolverEcho, SubarrayReport, Table1Row, Table2Row,
};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Reference inputs for the built-in tables and convergence figures (dB).
const TABLE1_SNR_DB: [f64; 4] = [22.0, 21.0, 20.0, 19.0];
const TABLE2_REFLECTED_DB: [f64; 4] = [24.0, 22.0, 21.0, 20.0];
const TABLE2_DIRECT_DB: [f64; 4] = [20.0, 19.0, 18.0, 17.0];

/// Agreement tolerance between a solver and the multistart oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-4;

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

fn db_vec(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&d| db_to_linear(d)).collect()
}

// ---------------------------------------------------------------------------
// Scenario pipeline
// ---------------------------------------------------------------------------

struct BuiltChannels {
    tx_ris: Option<VirtualChannel>,
    ris_rx: Option<VirtualChannel>,
    direct: Option<VirtualChannel>,
}

fn build_channels(s: &Scenario) -> Result<BuiltChannels> {
    let ris = s.ris.as_ref();
    let tx_ris = if s.has_reflected_route() {
        Some(
            build_virtual_channel(&s.paths_tx_ris, &s.tx, ris.expect("validated"))
                .context("building the tx-ris channel")?,
        )
    } else {
        None
    };
    let ris_rx = if s.has_reflected_route() {
        Some(
            build_virtual_channel(&s.paths_ris_rx, ris.expect("validated"), &s.rx)
                .context("building the ris-rx channel")?,
        )
    } else {
        None
    };
    let direct = if s.paths_direct.is_empty() {
        None
    } else {
        Some(
            build_virtual_channel(&s.paths_direct, &s.tx, &s.rx)
                .context("building the direct channel")?,
        )
    };

    for (name, channel) in [
        ("tx-ris", tx_ris.as_ref()),
        ("ris-rx", ris_rx.as_ref()),
        ("direct", direct.as_ref()),
    ] {
        if let Some(c) = channel {
            if !c.is_row_sparse() {
                bail!(
                    "{name} channel is not row-sparse (offending rows: {:?}); \
                     move the paths onto the beam grid or enlarge the arrays",
                    c.offending_rows()
                );
            }
        }
    }
    Ok(BuiltChannels {
        tx_ris,
        ris_rx,
        direct,
    })
}

fn summarize(c: &VirtualChannel) -> ChannelSummary {
    ChannelSummary {
        rows: c.n_rows(),
        cols: c.n_cols(),
        row_sparse: c.is_row_sparse(),
    }
}

fn pair_report(p: &BeamPair) -> PairReport {
    PairReport {
        incident_row: p.incident_row,
        tx_col: p.tx_col,
        outgoing_col: p.outgoing_col,
        gain: p.gain,
        shift: p.shift,
        snr: p.snr_normalized,
        snr_db: linear_to_db(p.snr_normalized),
    }
}

fn allocation_report(a: &AllocationResult) -> AllocationReport {
    AllocationReport {
        rank: a.rank,
        capacity: a.capacity,
        r: a.r.clone(),
        q_reflected: a.q_reflected.clone(),
        q_direct: a.q_direct.clone(),
        iterations: a.iterations,
        converged: a.converged,
    }
}

fn ris_report(
    allocation: &AllocationResult,
    pairs: &[BeamPair],
    n_elements: usize,
) -> Result<Option<RisReport>> {
    let active: Vec<(usize, f64, i64)> = allocation
        .r
        .iter()
        .enumerate()
        .filter(|&(_, &r)| r > 0.0)
        .map(|(j, &r)| (j, r, pairs[j].shift))
        .collect();
    if active.is_empty() {
        return Ok(None);
    }
    let ratios: Vec<f64> = active.iter().map(|&(_, r, _)| r).collect();
    let shifts: Vec<i64> = active.iter().map(|&(_, _, s)| s).collect();
    let encoding =
        encode_subarrays(&ratios, &shifts, n_elements).context("surface encoding")?;
    let counts = encoding.element_counts().context("surface encoding")?;
    let phases = synthesize_phase_vector(&encoding).context("surface phase synthesis")?;
    let subarrays = active
        .iter()
        .zip(counts.iter())
        .zip(encoding.phase_params.iter())
        .map(|((&(pair, area_ratio, shift), &element_count), &phase_step_rad)| SubarrayReport {
            pair,
            area_ratio,
            element_count,
            shift,
            phase_step_rad,
        })
        .collect();
    Ok(Some(RisReport {
        n_elements,
        subarrays,
        element_phases_rad: phases.iter().map(|z| z.arg()).collect(),
    }))
}

/// Full pipeline: channels, row-sparse validation, beam pairing, allocation,
/// surface synthesis, result document.
pub fn run_scenario(s: &Scenario, solver: &SolverConfig) -> Result<ResultDocument> {
    let built = build_channels(s)?;

    let pairs: Vec<BeamPair> = match (&built.tx_ris, &built.ris_rx) {
        (Some(h1), Some(h2)) => pair_beams(h1, h2, &s.budget).map_err(|e| anyhow!("{e}"))?,
        _ => Vec::new(),
    };
    let snr_reflected: Vec<f64> = pairs.iter().map(|p| p.snr_normalized).collect();

    let snr_scale = s.budget.total_power() / s.budget.noise_power();
    let direct_beams: Vec<(usize, f64)> = built
        .direct
        .as_ref()
        .map(nonzero_tx_beams)
        .unwrap_or_default();

    let (mode, allocation, direct_reports) = if pairs.is_empty() && !direct_beams.is_empty() {
        // pure direct link: absolute-power water filling over N_T * p_max
        let h = built.direct.as_ref().expect("direct beams imply a channel");
        let link = direct_link_capacity(h, &s.budget).map_err(|e| anyhow!("{e}"))?;
        let total = h.n_cols() as f64 * s.budget.p_max();
        let direct_scale = total / s.budget.noise_power();
        let reports: Vec<DirectBeamReport> = link
            .beams
            .iter()
            .zip(direct_beams.iter())
            .map(|(&column, &(_, gain))| DirectBeamReport {
                column,
                gain,
                snr: gain * direct_scale,
                snr_db: linear_to_db(gain * direct_scale),
            })
            .collect();
        let q_direct: Vec<f64> = link.allocation.levels.iter().map(|&p| p / total).collect();
        let allocation = AllocationResult {
            rank: q_direct.iter().filter(|&&q| q > 0.0).count(),
            r: Vec::new(),
            q_reflected: Vec::new(),
            q_direct,
            capacity: link.capacity,
            iterations: 0,
            converged: true,
        };
        ("direct", allocation, reports)
    } else if !pairs.is_empty() && direct_beams.is_empty() {
        let allocation =
            joint_power_ris_alloc_1(&snr_reflected, solver).map_err(|e| anyhow!("{e}"))?;
        ("reflection", allocation, Vec::new())
    } else if !pairs.is_empty() {
        let snr_direct: Vec<f64> = direct_beams.iter().map(|&(_, g)| g * snr_scale).collect();
        let reports: Vec<DirectBeamReport> = direct_beams
            .iter()
            .map(|&(column, gain)| DirectBeamReport {
                column,
                gain,
                snr: gain * snr_scale,
                snr_db: linear_to_db(gain * snr_scale),
            })
            .collect();
        let allocation = joint_power_dir_ris_alloc_1(&snr_direct, &snr_reflected, solver)
            .map_err(|e| anyhow!("{e}"))?;
        ("composite", allocation, reports)
    } else {
        bail!("no usable beams: every channel is empty at the sparsity tolerance");
    };

    let ris = if mode == "direct" {
        None
    } else {
        ris_report(
            &allocation,
            &pairs,
            s.ris.as_ref().expect("reflected mode implies a surface").n_elements(),
        )?
    };

    Ok(ResultDocument {
        scenario: s.name.clone(),
        mode: mode.to_string(),
        seed: s.seed,
        budget: BudgetEcho {
            noise_power: s.budget.noise_power(),
            bandwidth: s.budget.bandwidth(),
            p_max: s.budget.p_max(),
            total_power: s.budget.total_power(),
        },
        solver: SolverEcho {
            eps_conv: solver.eps_conv,
            max_iterations: solver.max_iterations,
        },
        channels: ChannelsReport {
            tx_ris: built.tx_ris.as_ref().map(summarize),
            ris_rx: built.ris_rx.as_ref().map(summarize),
            direct: built.direct.as_ref().map(summarize),
        },
        pairs: pairs.iter().map(pair_report).collect(),
        direct_beams: direct_reports,
        allocation: allocation_report(&allocation),
        ris,
    })
}

// ---------------------------------------------------------------------------
// Oracle verb
// ---------------------------------------------------------------------------

/// Re-run a scenario's allocation and cross-check it against the
/// projected-gradient multistart oracle.
pub fn run_oracle(
    s: &Scenario,
    solver: &SolverConfig,
    n_starts: usize,
    seed: u64,
) -> Result<OracleDocument> {
    let doc = run_scenario(s, solver)?;
    let snr_reflected: Vec<f64> = doc.pairs.iter().map(|p| p.snr).collect();
    let snr_direct: Vec<f64> = doc.direct_beams.iter().map(|b| b.snr).collect();

    let (objective, kind) = match doc.mode.as_str() {
        "reflection" => (CapacityObjective::Reflection, "reflection"),
        _ => (CapacityObjective::Composite, "composite"),
    };
    // the oracle works in spectral units; the direct-link capacity carries
    // the bandwidth factor and must be divided out before comparing
    let algorithm_capacity = if doc.mode == "direct" {
        doc.allocation.capacity / doc.budget.bandwidth
    } else {
        doc.allocation.capacity
    };
    let mut report =
        projected_gradient_multistart(objective, &snr_direct, &snr_reflected, n_starts, seed)
            .map_err(|e| anyhow!("{e}"))?;
    let agreement = report.check_agreement(algorithm_capacity, ORACLE_TOLERANCE);

    Ok(OracleDocument {
        scenario: s.name.clone(),
        objective: kind.to_string(),
        n_starts,
        seed,
        oracle_capacity: report.best_capacity,
        best_r: report.best_r,
        best_q: report.best_q,
        max_kkt_residual: report.max_kkt_residual,
        algorithm_capacity,
        tolerance: ORACLE_TOLERANCE,
        agreement,
    })
}

// ---------------------------------------------------------------------------
// Reference tables
// ---------------------------------------------------------------------------

pub fn table1_rows(solver: &SolverConfig) -> Result<Vec<Table1Row>> {
    let snr = db_vec(&TABLE1_SNR_DB);
    let sweep = ris_rank_sweep(&snr, solver).map_err(|e| anyhow!("{e}"))?;
    Ok(sweep
        .iter()
        .enumerate()
        .map(|(i, result)| Table1Row {
            beam_pairs: i + 1,
            snr_db: TABLE1_SNR_DB[..=i].to_vec(),
            capacity: result.capacity,
            r_star: result.r.clone(),
        })
        .collect())
}

pub fn table2_rows(solver: &SolverConfig) -> Result<Vec<Table2Row>> {
    let snr_r = db_vec(&TABLE2_REFLECTED_DB);
    let snr_d = db_vec(&TABLE2_DIRECT_DB);
    let sweep = dir_ris_rank_sweep(&snr_d, &snr_r, solver).map_err(|e| anyhow!("{e}"))?;
    Ok(sweep
        .iter()
        .enumerate()
        .map(|(i, result)| {
            let k = i + 1;
            Table2Row {
                beams: format!("{}+{}", TABLE2_DIRECT_DB.len(), k),
                snr_direct_db: TABLE2_DIRECT_DB.to_vec(),
                snr_reflected_db: TABLE2_REFLECTED_DB[..k].to_vec(),
                capacity_reflected: reflection_capacity_rq(
                    &result.r,
                    &result.q_reflected,
                    &snr_r[..k],
                ),
                capacity_direct: direct_capacity(&result.q_direct, &snr_d),
                capacity_total: result.capacity,
                r_star: result.r.clone(),
                q_reflected: result.q_reflected.clone(),
                q_direct: result.q_direct.clone(),
            }
        })
        .collect())
}

pub fn render_table(id: &str, format: OutputFormat, solver: &SolverConfig) -> Result<String> {
    match (id, format) {
        ("table1", OutputFormat::Csv) => Ok(table1_csv(&table1_rows(solver)?)),
        ("table1", OutputFormat::Json) => {
            Ok(serde_json::to_string_pretty(&table1_rows(solver)?)?)
        }
        ("table2", OutputFormat::Csv) => Ok(table2_csv(&table2_rows(solver)?)),
        ("table2", OutputFormat::Json) => {
            Ok(serde_json::to_string_pretty(&table2_rows(solver)?)?)
        }
        _ => bail!("unknown table {id:?} (expected table1 or table2)"),
    }
}

// ---------------------------------------------------------------------------
// Figures
// ---------------------------------------------------------------------------

const SURFACE_SNR_DB: [f64; 3] = [5.0, 20.0, 30.0];
const SWEEP_RANGE_DB: (i32, i32) = (10, 30);

pub fn figure_table(id: &str, solver: &SolverConfig) -> Result<NumericTable> {
    match id {
        "fig3" => {
            let mut table = NumericTable::new("fig3", &["snr_db", "r1", "capacity"]);
            for &snr_db in &SURFACE_SNR_DB {
                let s = db_to_linear(snr_db);
                let surface = capacity_surface(&[s, s], 400).map_err(|e| anyhow!("{e}"))?;
                for point in surface.points {
                    table.push(vec![snr_db, point.r[0], point.capacity]);
                }
            }
            Ok(table)
        }
        "fig4_5" => {
            let mut table = NumericTable::new("fig4_5", &["snr_db", "r1", "r2", "r3", "capacity"]);
            for &snr_db in &SURFACE_SNR_DB {
                let s = db_to_linear(snr_db);
                let surface = capacity_surface(&[s, s, s], 80).map_err(|e| anyhow!("{e}"))?;
                for point in surface.points {
                    table.push(vec![snr_db, point.r[0], point.r[1], point.r[2], point.capacity]);
                }
            }
            Ok(table)
        }
        "fig6" => {
            let snr = db_vec(&TABLE1_SNR_DB);
            let (_, trace) = opt_ris_rank_traced(&snr, solver).map_err(|e| anyhow!("{e}"))?;
            let mut table = NumericTable::new("fig6", &["iteration", "r1", "r2", "r3", "r4"]);
            for (i, r) in trace.iter().enumerate() {
                let mut row = vec![i as f64];
                row.extend_from_slice(r);
                table.push(row);
            }
            Ok(table)
        }
        "fig7" => {
            let range: Vec<f64> = (SWEEP_RANGE_DB.0..=SWEEP_RANGE_DB.1)
                .map(|d| d as f64)
                .collect();
            let rows = mimo_vs_reflection_sweep(4, &range);
            let mut table = NumericTable::new(
                "fig7",
                &[
                    "snr_db",
                    "mimo_rank",
                    "mimo_capacity",
                    "mimo_layer_snr",
                    "refl_rank",
                    "refl_capacity",
                    "refl_layer_snr",
                ],
            );
            for row in rows {
                table.push(vec![
                    row.snr_db,
                    row.mimo_rank as f64,
                    row.mimo_capacity,
                    row.mimo_layer_snr,
                    row.refl_rank as f64,
                    row.refl_capacity,
                    row.refl_layer_snr,
                ]);
            }
            Ok(table)
        }
        "fig8" => {
            let snr_r = db_vec(&TABLE2_REFLECTED_DB);
            let snr_d = db_vec(&TABLE2_DIRECT_DB);
            let (_, trace) =
                opt_dir_ris_rank_traced(&snr_d, &snr_r, solver).map_err(|e| anyhow!("{e}"))?;
            let mut columns: Vec<String> = vec!["iteration".into()];
            columns.extend((1..=4).map(|j| format!("q_r{j}")));
            columns.extend((1..=4).map(|j| format!("q_d{j}")));
            columns.extend((1..=4).map(|j| format!("r{j}")));
            let column_refs: Vec<&str> = columns.iter().map(|c| c.as_str()).collect();
            let mut table = NumericTable::new("fig8", &column_refs);
            for (i, step) in trace.iter().enumerate() {
                let mut row = vec![i as f64];
                row.extend_from_slice(&step.q);
                row.extend_from_slice(&step.r);
                table.push(row);
            }
            Ok(table)
        }
        _ => bail!("unknown figure {id:?} (expected fig3, fig4_5, fig6, fig7 or fig8)"),
    }
}

pub fn render_figure(id: &str, format: OutputFormat, solver: &SolverConfig) -> Result<String> {
    let table = figure_table(id, solver)?;
    Ok(match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    })
}
