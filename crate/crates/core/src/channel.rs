//! Virtual (beamspace) channel model for sparse multi-path MIMO links.
//!
//! A channel made of a few discrete propagation paths, observed through large
//! uniform linear arrays, concentrates in the DFT bases of those arrays: each
//! path lands in (approximately) one angular bin per side. Under the standing
//! assumption that no two paths share an arrival angle, the resulting virtual
//! matrix `H_v` is *row-sparse* — at most one non-negligible entry per row —
//! and admits a closed-form SVD whose right basis is the identity: the
//! singular values are simply the column norms, and the left vectors the
//! normalized columns.
//!
//! Entries of the virtual matrix are
//!
//! `H_v(i, k) = sum_n beta_n * f_NR(theta_n^R - 2 pi i / N_R) * f_NT(2 pi k / N_T - theta_n^T)`
//!
//! with `f_N` the Dirichlet kernel of an `N`-element array, so that
//! `A_R * H_v * A_T^H` reconstructs the antenna-domain channel exactly when
//! `A_R`, `A_T` are the unitary DFT matrices.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Relative sparsity tolerance: an entry counts as nonzero when its magnitude
/// exceeds this fraction of the largest entry magnitude. Off-grid Dirichlet
/// leakage never vanishes exactly, so the predicate is relative by design.
pub const SPARSITY_REL_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One physical propagation path.
///
/// Angles are normalized to `[0, 2*pi)` (spatial frequency of the array, not
/// the physical azimuth). The relative delay `tau` is retained for
/// completeness; single-subband operation folds the subband phase into `beta`
/// before construction, so it is not used afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathDescriptor {
    /// Complex path gain.
    pub beta: Complex64,
    /// Normalized angle of departure at the transmit side, in `[0, 2*pi)`.
    pub theta_t: f64,
    /// Normalized angle of arrival at the receive side, in `[0, 2*pi)`.
    pub theta_r: f64,
    /// Relative delay in seconds (unused after subband fixing).
    pub tau: f64,
}

impl PathDescriptor {
    pub fn new(beta: Complex64, theta_t: f64, theta_r: f64, tau: f64) -> Result<Self> {
        for value in [theta_t, theta_r] {
            if !(0.0..TAU).contains(&value) {
                return Err(Error::AngleOutOfRange { value });
            }
        }
        Ok(Self {
            beta,
            theta_t,
            theta_r,
            tau,
        })
    }

    /// Path with angles given as (possibly fractional) grid positions:
    /// `theta = 2 pi * g / n`. On-grid integer positions land exactly in one
    /// beamspace bin.
    pub fn on_grid(beta: Complex64, grid_t: f64, n_t: usize, grid_r: f64, n_r: usize) -> Result<Self> {
        Self::new(
            beta,
            TAU * grid_t / n_t as f64,
            TAU * grid_r / n_r as f64,
            0.0,
        )
    }
}

/// Geometry of a uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    n_elements: usize,
    spacing_over_lambda: f64,
}

impl ArrayGeometry {
    /// `n_elements >= 1`, `spacing_over_lambda` in `(0, 0.5]` (no grating lobes).
    pub fn new(n_elements: usize, spacing_over_lambda: f64) -> Result<Self> {
        if n_elements < 1 {
            return Err(Error::InvalidGeometry {
                reason: "n_elements must be >= 1".into(),
            });
        }
        if !(spacing_over_lambda > 0.0 && spacing_over_lambda <= 0.5) {
            return Err(Error::InvalidGeometry {
                reason: format!("spacing_over_lambda {spacing_over_lambda} outside (0, 0.5]"),
            });
        }
        Ok(Self {
            n_elements,
            spacing_over_lambda,
        })
    }

    /// Half-wavelength array, the common default.
    pub fn half_wavelength(n_elements: usize) -> Result<Self> {
        Self::new(n_elements, 0.5)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn spacing_over_lambda(&self) -> f64 {
        self.spacing_over_lambda
    }
}

/// A channel matrix in the beamspace bases: rows index receive-side beams,
/// columns transmit-side beams.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualChannel {
    entries: Array2<Complex64>,
    max_magnitude: f64,
    row_sparse: bool,
}

impl VirtualChannel {
    /// Wrap an explicit matrix, computing the row-sparsity flag.
    pub fn from_entries(entries: Array2<Complex64>) -> Self {
        let max_magnitude = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = SPARSITY_REL_TOL * max_magnitude;
        let row_sparse = entries
            .rows()
            .into_iter()
            .all(|row| row.iter().filter(|z| z.norm() > tol).count() <= 1);
        Self {
            entries,
            max_magnitude,
            row_sparse,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    /// Whether every row has at most one entry above the sparsity tolerance.
    pub fn is_row_sparse(&self) -> bool {
        self.row_sparse
    }

    pub fn max_magnitude(&self) -> f64 {
        self.max_magnitude
    }

    /// Absolute magnitude threshold below which entries count as zero.
    pub fn tolerance(&self) -> f64 {
        SPARSITY_REL_TOL * self.max_magnitude
    }

    /// Rows with two or more entries above tolerance (empty iff row-sparse).
    pub fn offending_rows(&self) -> Vec<usize> {
        let tol = self.tolerance();
        self.entries
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(_, row)| row.iter().filter(|z| z.norm() > tol).count() > 1)
            .map(|(i, _)| i)
            .collect()
    }

    /// Euclidean norm of column `k`.
    pub fn column_norm(&self, k: usize) -> f64 {
        self.entries
            .column(k)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// All entries above the sparsity tolerance as `(row, col, magnitude)`.
    pub fn nonzero_entries(&self) -> Vec<(usize, usize, f64)> {
        let tol = self.tolerance();
        self.entries
            .indexed_iter()
            .filter_map(|((i, k), z)| {
                let mag = z.norm();
                (mag > tol).then_some((i, k, mag))
            })
            .collect()
    }

    /// Copy with every sub-tolerance entry set to exactly zero.
    ///
    /// This is the explicit lossy step for pipelines that need the row-sparse
    /// hypothesis to hold literally; rows that keep two or more above-tolerance
    /// entries still leave the result non-row-sparse.
    pub fn hard_threshold(&self) -> VirtualChannel {
        let tol = self.tolerance();
        let thresholded = self.entries.mapv(|z| {
            if z.norm() > tol {
                z
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        VirtualChannel::from_entries(thresholded)
    }

    /// CSV rendering for debugging: each matrix entry occupies a `re,im` cell
    /// pair, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.entries.rows() {
            let mut first = true;
            for z in row {
                if !first {
                    out.push(',');
                }
                write!(out, "{},{}", z.re, z.im).unwrap();
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// The closed-form SVD of a row-sparse matrix: `H = U S` with right basis the
/// identity. One component per column with norm above tolerance.
#[derive(Debug, Clone)]
pub struct SparseSvd {
    n_rows: usize,
    n_cols: usize,
    /// Components in ascending column order.
    pub components: Vec<SvdComponent>,
}

/// One singular triple `(s_k, u_k, e_k)`; the right vector is implicitly the
/// standard basis vector of `column`.
#[derive(Debug, Clone)]
pub struct SvdComponent {
    pub column: usize,
    pub singular_value: f64,
    pub left_vector: Array1<Complex64>,
}

impl SparseSvd {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Singular values in descending order.
    pub fn singular_values_sorted(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.components.iter().map(|c| c.singular_value).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// Rebuild the dense matrix `sum_k s_k u_k e_k^H`.
    pub fn reconstruct(&self) -> Array2<Complex64> {
        let mut m = Array2::from_elem((self.n_rows, self.n_cols), Complex64::new(0.0, 0.0));
        for comp in &self.components {
            for (i, u) in comp.left_vector.iter().enumerate() {
                m[(i, comp.column)] = u * comp.singular_value;
            }
        }
        m
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Dirichlet kernel `(1/n) * sum_{m=0}^{n-1} exp(-j m theta)`: the angular
/// leakage function of an `n`-element uniform array.
pub fn dirichlet_kernel(theta: f64, n: usize) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let den = one - Complex64::from_polar(1.0, -theta);
    if den.norm() == 0.0 {
        // theta is an exact multiple of 2*pi: every summand is 1.
        return one;
    }
    let num = one - Complex64::from_polar(1.0, -(n as f64) * theta);
    num / (den * n as f64)
}

/// Build the virtual channel matrix for a set of paths observed through the
/// given arrays (`rx.n_elements()` rows by `tx.n_elements()` columns).
///
/// Rejects an empty path set and any pair of paths sharing an arrival angle;
/// the latter would break the row-sparsity assumption unrecoverably.
pub fn build_virtual_channel(
    paths: &[PathDescriptor],
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
) -> Result<VirtualChannel> {
    if paths.is_empty() {
        return Err(Error::EmptyPaths);
    }
    for p in paths {
        for value in [p.theta_t, p.theta_r] {
            if !(0.0..TAU).contains(&value) {
                return Err(Error::AngleOutOfRange { value });
            }
        }
    }
    for (a, pa) in paths.iter().enumerate() {
        for pb in &paths[a + 1..] {
            if pa.theta_r == pb.theta_r {
                return Err(Error::DuplicateArrivalAngle { theta_r: pa.theta_r });
            }
        }
    }

    let n_r = rx.n_elements();
    let n_t = tx.n_elements();

    // Per-path kernel factors, evaluated once per beam index.
    let rx_factors: Vec<Vec<Complex64>> = paths
        .iter()
        .map(|p| {
            (0..n_r)
                .map(|i| dirichlet_kernel(p.theta_r - TAU * i as f64 / n_r as f64, n_r))
                .collect()
        })
        .collect();
    let tx_factors: Vec<Vec<Complex64>> = paths
        .iter()
        .map(|p| {
            (0..n_t)
                .map(|k| dirichlet_kernel(TAU * k as f64 / n_t as f64 - p.theta_t, n_t))
                .collect()
        })
        .collect();

    let entries = Array2::from_shape_fn((n_r, n_t), |(i, k)| {
        paths
            .iter()
            .enumerate()
            .map(|(n, p)| p.beta * rx_factors[n][i] * tx_factors[n][k])
            .sum()
    });
    Ok(VirtualChannel::from_entries(entries))
}

/// Closed-form SVD of a row-sparse matrix. Fails when the input is not
/// row-sparse (the hypothesis the decomposition rests on).
pub fn sparse_svd(h: &VirtualChannel) -> Result<SparseSvd> {
    if !h.is_row_sparse() {
        return Err(Error::NotRowSparse {
            rows: h.offending_rows(),
        });
    }
    let tol = h.tolerance();
    let mut components = Vec::new();
    for k in 0..h.n_cols() {
        let norm = h.column_norm(k);
        if norm > tol {
            let left_vector = h.entries().column(k).mapv(|z| z / norm);
            components.push(SvdComponent {
                column: k,
                singular_value: norm,
                left_vector,
            });
        }
    }
    Ok(SparseSvd {
        n_rows: h.n_rows(),
        n_cols: h.n_cols(),
        components,
    })
}

/// Transmit-side beams with nonzero gain: `(column index, squared norm)`
/// sorted by descending gain, ties broken by ascending column index.
pub fn nonzero_tx_beams(h: &VirtualChannel) -> Vec<(usize, f64)> {
    let tol = h.tolerance();
    let mut beams: Vec<(usize, f64)> = (0..h.n_cols())
        .filter_map(|k| {
            let norm = h.column_norm(k);
            (norm > tol).then_some((k, norm * norm))
        })
        .collect();
    beams.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    beams
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
