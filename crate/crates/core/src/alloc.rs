//! Joint transmit-power / surface-area allocation across beam pairs.
//!
//! Each reflected beam pair `j` receives a share `q_j` of the transmit power
//! and a share `r_j` of the reflecting surface; its SNR scales as
//! `r_j^2 * q_j * SNR_j^o` because the surface response grows linearly with
//! aperture. At any stationary point of the reflection-only problem the two
//! shares coincide (`q* = r*`), which collapses the objective to
//! `sum log2(1 + r_j^3 * SNR_j^o)` over one simplex. The landscape is neither
//! convex nor concave: a centroid-started water-filling fixed-point iteration
//! finds the interior candidate, and an induction over the number of strongest
//! pairs compares it with the boundary candidates.
//!
//! The composite solvers add direct beams, which carry no area share: their
//! SNR is `q_j * SNR_j^o`, the power simplex spans both beam sets, and the
//! area shares renormalize over the reflected subset each sweep.

use crate::direct::waterfill;
use crate::error::{Error, Result};

/// Convergence control for the iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Iteration stops when the infinity norm of the iterate difference
    /// drops below this.
    pub eps_conv: f64,
    /// Hard cap on update sweeps.
    pub max_iterations: usize,
}

impl SolverConfig {
    pub fn new(eps_conv: f64, max_iterations: usize) -> Result<Self> {
        if !(eps_conv > 0.0 && eps_conv.is_finite()) {
            return Err(Error::InvalidSolverConfig {
                reason: format!("eps_conv must be positive, got {eps_conv}"),
            });
        }
        if max_iterations == 0 {
            return Err(Error::InvalidSolverConfig {
                reason: "max_iterations must be positive".into(),
            });
        }
        Ok(Self {
            eps_conv,
            max_iterations,
        })
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_conv: 1e-4,
            max_iterations: 1000,
        }
    }
}

/// Outcome of an allocation solve.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Number of beams (direct + reflected) holding nonzero resources.
    pub rank: usize,
    /// Area ratios of the reflected pairs (empty when none were offered).
    pub r: Vec<f64>,
    /// Power ratios of the reflected pairs.
    pub q_reflected: Vec<f64>,
    /// Power ratios of the direct beams (empty for reflection-only solves).
    pub q_direct: Vec<f64>,
    /// Capacity in bits/s/Hz.
    pub capacity: f64,
    /// Update sweeps performed by the inner solver.
    pub iterations: usize,
    /// Whether the inner solver met `eps_conv` before the iteration cap.
    pub converged: bool,
}

/// One recorded sweep of an iterative solver: the area vector and the full
/// power vector (reflected shares first, then direct).
#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub r: Vec<f64>,
    pub q: Vec<f64>,
}

/// Sweep summary row of [`mimo_vs_reflection_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub mimo_rank: usize,
    pub mimo_capacity: f64,
    /// Effective per-layer SNR of the conventional link at uniform power:
    /// `snr / rank`.
    pub mimo_layer_snr: f64,
    pub refl_rank: usize,
    pub refl_capacity: f64,
    /// Effective per-layer SNR of the reflected link at uniform shares:
    /// `snr / rank^3`.
    pub refl_layer_snr: f64,
}

// ---------------------------------------------------------------------------
// Capacity forms
// ---------------------------------------------------------------------------

/// Reflection-only capacity with the power shares folded into the area shares:
/// `sum log2(1 + r_j^3 snr_j)`.
pub fn reflection_capacity(r: &[f64], snr: &[f64]) -> f64 {
    r.iter()
        .zip(snr.iter())
        .map(|(&r, &s)| (1.0 + r * r * r * s).log2())
        .sum()
}

/// Reflection-only capacity with independent area and power shares:
/// `sum log2(1 + r_j^2 q_j snr_j)`.
pub fn reflection_capacity_rq(r: &[f64], q: &[f64], snr: &[f64]) -> f64 {
    r.iter()
        .zip(q.iter())
        .zip(snr.iter())
        .map(|((&r, &q), &s)| (1.0 + r * r * q * s).log2())
        .sum()
}

/// Capacity of power-only beams: `sum log2(1 + q_j snr_j)`.
pub fn direct_capacity(q: &[f64], snr: &[f64]) -> f64 {
    q.iter()
        .zip(snr.iter())
        .map(|(&q, &s)| (1.0 + q * s).log2())
        .sum()
}

/// Composite capacity: reflected pairs plus direct beams.
pub fn composite_capacity(
    r: &[f64],
    q_reflected: &[f64],
    q_direct: &[f64],
    snr_reflected: &[f64],
    snr_direct: &[f64],
) -> f64 {
    reflection_capacity_rq(r, q_reflected, snr_reflected) + direct_capacity(q_direct, snr_direct)
}

// ---------------------------------------------------------------------------
// Input validation
// ---------------------------------------------------------------------------

fn check_descending_positive(snr: &[f64]) -> Result<()> {
    if snr.is_empty() {
        return Err(Error::EmptySnr);
    }
    for window in snr.windows(2) {
        if window[1] > window[0] {
            return Err(Error::SnrNotDescending);
        }
    }
    if snr.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::SnrNotDescending);
    }
    Ok(())
}

fn check_positive(snr: &[f64]) -> Result<()> {
    for &s in snr {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidSnr { value: s });
        }
    }
    Ok(())
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn count_active(values: &[f64]) -> usize {
    values.iter().filter(|&&v| v > 0.0).count()
}

// ---------------------------------------------------------------------------
// Reflection-only solvers
// ---------------------------------------------------------------------------

/// Fixed-rank allocation over reflected pairs: starting from the centroid,
/// repeatedly water-fill unit power over the noise equivalents
/// `1 / (r_j^2 snr_j)` until the area vector stops moving. Dropped pairs
/// (`r_j = 0`) have infinite noise equivalents and stay dropped. Returns the
/// allocation with `q = r` and capacity `sum log2(1 + r^3 snr)`.
pub fn opt_ris_rank(snr: &[f64], cfg: &SolverConfig) -> Result<AllocationResult> {
    opt_ris_rank_traced(snr, cfg).map(|(result, _)| result)
}

/// [`opt_ris_rank`] plus the per-sweep area vectors (the first entry is the
/// centroid start).
pub fn opt_ris_rank_traced(
    snr: &[f64],
    cfg: &SolverConfig,
) -> Result<(AllocationResult, Vec<Vec<f64>>)> {
    check_descending_positive(snr)?;
    let n = snr.len();
    let mut r = vec![1.0 / n as f64; n];
    let mut trace = vec![r.clone()];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        let noise: Vec<f64> = r
            .iter()
            .zip(snr.iter())
            .map(|(&r, &s)| 1.0 / (r * r * s))
            .collect();
        let next = waterfill(&noise, 1.0)?.levels;
        let delta = inf_norm_diff(&next, &r);
        r = next;
        iterations += 1;
        trace.push(r.clone());
        if delta < cfg.eps_conv {
            converged = true;
            break;
        }
    }

    let capacity = reflection_capacity(&r, snr);
    let result = AllocationResult {
        rank: count_active(&r),
        q_reflected: r.clone(),
        r,
        q_direct: Vec::new(),
        capacity,
        iterations,
        converged,
    };
    Ok((result, trace))
}

/// Rank selection by induction: solve for the strongest `k` pairs,
/// `k = 1, 2, ...`, and stop at the first `k` that fails to improve on
/// `k - 1` (capacity of zero pairs counts as 0). Returns the best solve.
pub fn joint_power_ris_alloc_1(snr: &[f64], cfg: &SolverConfig) -> Result<AllocationResult> {
    check_descending_positive(snr)?;
    let mut best: Option<AllocationResult> = None;
    let mut prev_capacity = 0.0;
    for k in 1..=snr.len() {
        let result = opt_ris_rank(&snr[..k], cfg)?;
        if result.capacity <= prev_capacity {
            break;
        }
        prev_capacity = result.capacity;
        best = Some(result);
    }
    Ok(best.expect("first rank always improves on zero capacity"))
}

/// Rank selection by the uniform-share approximation: estimate the capacity
/// of rank `k` as `sum_{i<=k} log2(1 + snr_i / k^3)`, pick the first peak,
/// then run [`opt_ris_rank`] at that rank.
pub fn joint_power_ris_alloc_2(snr: &[f64], cfg: &SolverConfig) -> Result<AllocationResult> {
    check_descending_positive(snr)?;
    let j_max = snr.len();
    let mut rk = j_max;
    let mut prev_capacity = 0.0;
    for k in 1..=j_max {
        let k3 = (k * k * k) as f64;
        let estimate: f64 = snr[..k].iter().map(|&s| (1.0 + s / k3).log2()).sum();
        if estimate <= prev_capacity {
            rk = k - 1;
            break;
        }
        prev_capacity = estimate;
    }
    opt_ris_rank(&snr[..rk.max(1)], cfg)
}

/// Fixed-rank solves for every prefix `k = 1..=snr.len()`, without the early
/// stop. This is the sweep behind the capacity-versus-rank tables.
pub fn ris_rank_sweep(snr: &[f64], cfg: &SolverConfig) -> Result<Vec<AllocationResult>> {
    check_descending_positive(snr)?;
    (1..=snr.len())
        .map(|k| opt_ris_rank(&snr[..k], cfg))
        .collect()
}

// ---------------------------------------------------------------------------
// Composite solvers (direct + reflected)
// ---------------------------------------------------------------------------

/// Fixed-rank allocation over direct beams plus reflected pairs: water-fill
/// unit power over the concatenated noise equivalents
/// `[1/(r_j^2 snr_R_j), 1/snr_D_j]`, renormalize the reflected power shares
/// into area shares, and repeat until the power vector stops moving.
///
/// Either beam set may be empty (not both): an empty direct set reduces to
/// [`opt_ris_rank`], an empty reflected set to plain water filling.
pub fn opt_dir_ris_rank(
    snr_direct: &[f64],
    snr_reflected: &[f64],
    cfg: &SolverConfig,
) -> Result<AllocationResult> {
    opt_dir_ris_rank_traced(snr_direct, snr_reflected, cfg).map(|(result, _)| result)
}

/// [`opt_dir_ris_rank`] plus the per-sweep `(r, q)` snapshots.
pub fn opt_dir_ris_rank_traced(
    snr_direct: &[f64],
    snr_reflected: &[f64],
    cfg: &SolverConfig,
) -> Result<(AllocationResult, Vec<TraceStep>)> {
    let n_r = snr_reflected.len();
    let n_d = snr_direct.len();
    if n_r + n_d == 0 {
        return Err(Error::NoBeams);
    }
    check_positive(snr_direct)?;
    if n_r > 0 {
        check_descending_positive(snr_reflected)?;
    }

    let total = (n_r + n_d) as f64;
    let mut r = vec![1.0 / n_r.max(1) as f64; n_r];
    let mut q = vec![1.0 / total; n_r + n_d];
    let mut trace = vec![TraceStep {
        r: r.clone(),
        q: q.clone(),
    }];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < cfg.max_iterations {
        let noise: Vec<f64> = r
            .iter()
            .zip(snr_reflected.iter())
            .map(|(&r, &s)| 1.0 / (r * r * s))
            .chain(snr_direct.iter().map(|&s| 1.0 / s))
            .collect();
        let next_q = waterfill(&noise, 1.0)?.levels;
        let reflected_sum: f64 = next_q[..n_r].iter().sum();
        r = if reflected_sum > 0.0 {
            next_q[..n_r].iter().map(|&q| q / reflected_sum).collect()
        } else {
            vec![0.0; n_r]
        };
        let delta = inf_norm_diff(&next_q, &q);
        q = next_q;
        iterations += 1;
        trace.push(TraceStep {
            r: r.clone(),
            q: q.clone(),
        });
        if delta < cfg.eps_conv {
            converged = true;
            break;
        }
    }

    let capacity = composite_capacity(&r, &q[..n_r], &q[n_r..], snr_reflected, snr_direct);
    let result = AllocationResult {
        rank: count_active(&q),
        r,
        q_reflected: q[..n_r].to_vec(),
        q_direct: q[n_r..].to_vec(),
        capacity,
        iterations,
        converged,
    };
    Ok((result, trace))
}

/// Composite rank selection by induction over the reflected-pair count: every
/// candidate includes all direct beams plus the strongest `k` reflected
/// pairs; stop at the first non-improving `k`.
pub fn joint_power_dir_ris_alloc_1(
    snr_direct: &[f64],
    snr_reflected: &[f64],
    cfg: &SolverConfig,
) -> Result<AllocationResult> {
    if snr_reflected.is_empty() {
        return opt_dir_ris_rank(snr_direct, &[], cfg);
    }
    check_descending_positive(snr_reflected)?;
    let mut best: Option<AllocationResult> = None;
    let mut prev_capacity = 0.0;
    for k in 1..=snr_reflected.len() {
        let result = opt_dir_ris_rank(snr_direct, &snr_reflected[..k], cfg)?;
        if result.capacity <= prev_capacity {
            break;
        }
        prev_capacity = result.capacity;
        best = Some(result);
    }
    Ok(best.expect("first reflected rank always improves on zero capacity"))
}

/// Composite rank selection by the uniform-area approximation: estimate rank
/// `k` by a single water-fill over `[snr_R(1..k)/k^2, snr_D]` (areas pinned
/// to `1/k`, powers still optimized), pick the first peak, then run
/// [`opt_dir_ris_rank`] at that rank.
pub fn joint_power_dir_ris_alloc_2(
    snr_direct: &[f64],
    snr_reflected: &[f64],
    cfg: &SolverConfig,
) -> Result<AllocationResult> {
    if snr_reflected.is_empty() {
        return opt_dir_ris_rank(snr_direct, &[], cfg);
    }
    check_positive(snr_direct)?;
    check_descending_positive(snr_reflected)?;

    let n_r = snr_reflected.len();
    let mut rk = n_r;
    let mut prev_capacity = 0.0;
    for k in 1..=n_r {
        let k2 = (k * k) as f64;
        let noise: Vec<f64> = snr_reflected[..k]
            .iter()
            .map(|&s| k2 / s)
            .chain(snr_direct.iter().map(|&s| 1.0 / s))
            .collect();
        let q = waterfill(&noise, 1.0)?.levels;
        let estimate: f64 = snr_reflected[..k]
            .iter()
            .zip(q[..k].iter())
            .map(|(&s, &q)| (1.0 + q * s / k2).log2())
            .sum::<f64>()
            + direct_capacity(&q[k..], snr_direct);
        if estimate <= prev_capacity {
            rk = k - 1;
            break;
        }
        prev_capacity = estimate;
    }
    opt_dir_ris_rank(snr_direct, &snr_reflected[..rk.max(1)], cfg)
}

/// Fixed-rank composite solves for every reflected prefix, without the early
/// stop (table sweeps).
pub fn dir_ris_rank_sweep(
    snr_direct: &[f64],
    snr_reflected: &[f64],
    cfg: &SolverConfig,
) -> Result<Vec<AllocationResult>> {
    check_descending_positive(snr_reflected)?;
    (1..=snr_reflected.len())
        .map(|k| opt_dir_ris_rank(snr_direct, &snr_reflected[..k], cfg))
        .collect()
}

// ---------------------------------------------------------------------------
// Conventional-vs-reflection comparison
// ---------------------------------------------------------------------------

/// Compare a conventional multi-beam link against a reflected link, both with
/// `n_beams` equal-strength beams, across an SNR range. The conventional side
/// water-fills unit power directly over the beams (per-layer SNR `snr/k`);
/// the reflected side pays the cubic sharing penalty (per-layer SNR
/// `snr/k^3`), which is what keeps its rank low until far higher SNR.
pub fn mimo_vs_reflection_sweep(n_beams: usize, snr_db_range: &[f64]) -> Vec<SweepRow> {
    assert!(n_beams >= 1, "need at least one beam");
    let cfg = SolverConfig::default();
    snr_db_range
        .iter()
        .map(|&snr_db| {
            let snr = 10f64.powf(snr_db / 10.0);

            let noise = vec![1.0 / snr; n_beams];
            let power = waterfill(&noise, 1.0)
                .expect("positive finite noise equivalents")
                .levels;
            let mimo_rank = count_active(&power);
            let mimo_capacity = direct_capacity(&power, &vec![snr; n_beams]);

            let refl = joint_power_ris_alloc_1(&vec![snr; n_beams], &cfg)
                .expect("equal positive snrs are valid");

            SweepRow {
                snr_db,
                mimo_rank,
                mimo_capacity,
                mimo_layer_snr: snr / mimo_rank as f64,
                refl_rank: refl.rank,
                refl_capacity: refl.capacity,
                refl_layer_snr: snr / (refl.rank * refl.rank * refl.rank) as f64,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
