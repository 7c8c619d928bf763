//! Capacity and precoding for the direct TX-RX sparse channel.
//!
//! With a row-sparse virtual channel the link decomposes into parallel AWGN
//! subchannels, one per transmit beam with nonzero gain. The transmitter
//! water-fills its total power over those subchannels and sends each stream
//! on a DFT column, which keeps the per-antenna transmit power uniform so
//! every power amplifier runs at its rated level.

use ndarray::Array2;
use num_complex::Complex64;

use crate::channel::{nonzero_tx_beams, ArrayGeometry, VirtualChannel};
use crate::dft::dft_matrix;
use crate::error::{Error, Result};

/// Link-level power and bandwidth bookkeeping.
///
/// `bandwidth` defaults to 1 in most scenarios so capacities read as
/// bits/s/Hz. `p_max` is the per-antenna power used by the direct link's
/// total-power constraint `N_T * p_max`; `total_power` is the normalization
/// constant for the reflection-channel SNRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    noise_power: f64,
    bandwidth: f64,
    p_max: f64,
    total_power: f64,
}

impl LinkBudget {
    pub fn new(noise_power: f64, bandwidth: f64, p_max: f64, total_power: f64) -> Result<Self> {
        for (name, v) in [
            ("noise_power", noise_power),
            ("bandwidth", bandwidth),
            ("p_max", p_max),
            ("total_power", total_power),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidBudget {
                    reason: format!("{name} must be positive and finite, got {v}"),
                });
            }
        }
        Ok(Self {
            noise_power,
            bandwidth,
            p_max,
            total_power,
        })
    }

    /// Unit noise, unit bandwidth, unit powers.
    pub fn normalized() -> Self {
        Self {
            noise_power: 1.0,
            bandwidth: 1.0,
            p_max: 1.0,
            total_power: 1.0,
        }
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }
}

/// Per-beam power levels produced by [`waterfill`].
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// Nonnegative power per beam, aligned with the caller's beam order.
    pub levels: Vec<f64>,
    /// The requested total. Levels sum to this unless every beam was unusable.
    pub total: f64,
}

impl PowerAllocation {
    pub fn sum(&self) -> f64 {
        self.levels.iter().sum()
    }
}

/// Result of [`direct_link_capacity`].
#[derive(Debug, Clone)]
pub struct DirectLink {
    /// Capacity in `bandwidth`-scaled bits/s (bits/s/Hz at unit bandwidth).
    pub capacity: f64,
    /// Power per selected beam, aligned with `beams`.
    pub allocation: PowerAllocation,
    /// Selected transmit beam columns, strongest first.
    pub beams: Vec<usize>,
}

// ---------------------------------------------------------------------------
// Water filling
// ---------------------------------------------------------------------------

/// Standard water filling over parallel AWGN channels.
///
/// Given noise equivalents `n_i` (positive, or `+inf` for an unusable beam)
/// and a total power, finds the water level `v` such that
/// `p_i = max(v - n_i, 0)` and `sum p_i = total_power`. The level is located
/// by bisection on `[min n_i, min n_i + total]` to 1e-12 absolute.
pub fn waterfill(noise_equivalents: &[f64], total_power: f64) -> Result<PowerAllocation> {
    if noise_equivalents.is_empty() {
        return Err(Error::EmptyNoiseList);
    }
    for &n in noise_equivalents {
        if n.is_nan() || n <= 0.0 {
            return Err(Error::InvalidNoiseEquivalent { value: n });
        }
    }
    if !(total_power > 0.0 && total_power.is_finite()) {
        return Err(Error::InvalidTotalPower { value: total_power });
    }

    let n_min = noise_equivalents.iter().cloned().fold(f64::INFINITY, f64::min);
    if !n_min.is_finite() {
        // every beam unusable: nothing to allocate
        return Ok(PowerAllocation {
            levels: vec![0.0; noise_equivalents.len()],
            total: total_power,
        });
    }

    let mut lo = n_min;
    let mut hi = n_min + total_power;
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let spent: f64 = noise_equivalents.iter().map(|&n| (mid - n).max(0.0)).sum();
        if spent < total_power {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    let levels = noise_equivalents.iter().map(|&n| (v - n).max(0.0)).collect();
    Ok(PowerAllocation {
        levels,
        total: total_power,
    })
}

// ---------------------------------------------------------------------------
// Direct link
// ---------------------------------------------------------------------------

/// Capacity of the direct link: water-fill `N_T * p_max` over the nonzero
/// transmit beams (noise equivalents `sigma^2 / s_k^2`) and sum the per-beam
/// Shannon rates `W log2(1 + sp_k s_k^2 / sigma^2)`.
///
/// An all-zero channel yields zero capacity and an empty allocation.
pub fn direct_link_capacity(h: &VirtualChannel, budget: &LinkBudget) -> Result<DirectLink> {
    if !h.is_row_sparse() {
        return Err(Error::NotRowSparse {
            rows: h.offending_rows(),
        });
    }
    let beams = nonzero_tx_beams(h);
    if beams.is_empty() {
        return Ok(DirectLink {
            capacity: 0.0,
            allocation: PowerAllocation {
                levels: Vec::new(),
                total: h.n_cols() as f64 * budget.p_max(),
            },
            beams: Vec::new(),
        });
    }

    let total = h.n_cols() as f64 * budget.p_max();
    let noise: Vec<f64> = beams
        .iter()
        .map(|&(_, gain)| budget.noise_power() / gain)
        .collect();
    let allocation = waterfill(&noise, total)?;
    let capacity: f64 = beams
        .iter()
        .zip(allocation.levels.iter())
        .map(|(&(_, gain), &power)| {
            budget.bandwidth() * (1.0 + power * gain / budget.noise_power()).log2()
        })
        .sum();
    Ok(DirectLink {
        capacity,
        allocation,
        beams: beams.into_iter().map(|(k, _)| k).collect(),
    })
}

/// Build the `N_T x N_T` precoding matrix `P = DFT * diag(sqrt(sp))`, with
/// the allocation's powers placed on the given beam columns.
///
/// Sending independent unit-power symbols through `P` loads every antenna
/// with the same power `sum(sp) / N_T`, regardless of how the beam powers are
/// split — the identity that lets the amplifiers run fully utilized.
pub fn build_precoder(
    allocation: &PowerAllocation,
    tx: &ArrayGeometry,
    beam_indices: &[usize],
) -> Result<Array2<Complex64>> {
    let n = tx.n_elements();
    if beam_indices.len() != allocation.levels.len() {
        return Err(Error::InvalidBeamIndices {
            reason: format!(
                "{} indices for {} power levels",
                beam_indices.len(),
                allocation.levels.len()
            ),
        });
    }
    let mut seen = vec![false; n];
    for &b in beam_indices {
        if b >= n {
            return Err(Error::InvalidBeamIndices {
                reason: format!("index {b} out of range for {n} antennas"),
            });
        }
        if seen[b] {
            return Err(Error::InvalidBeamIndices {
                reason: format!("index {b} duplicated"),
            });
        }
        seen[b] = true;
    }

    let dft = dft_matrix(n);
    let mut p = Array2::from_elem((n, n), Complex64::new(0.0, 0.0));
    for (&b, &power) in beam_indices.iter().zip(allocation.levels.iter()) {
        let scale = power.sqrt();
        for i in 0..n {
            p[(i, b)] = dft[(i, b)] * scale;
        }
    }
    Ok(p)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
