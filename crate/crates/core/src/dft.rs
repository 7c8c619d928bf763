//! Unitary DFT matrices and cyclic-shift operators.
//!
//! The beamspace representation expresses antenna-domain channels in the DFT
//! bases of the arrays. All DFT matrices here carry the unitary 1/sqrt(N)
//! normalization, so their columns are exactly the array response vectors
//! sampled on the beam grid.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Unitary DFT matrix of size `n`: `W[m, k] = exp(-j 2 pi m k / n) / sqrt(n)`.
pub fn dft_matrix(n: usize) -> Array2<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    Array2::from_shape_fn((n, n), |(m, k)| {
        // Reduce m*k mod n before forming the phase so on-grid products stay exact.
        let phase = -TAU * ((m * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    })
}

/// Column `k` of [`dft_matrix`]: the response vector of an `n`-element ULA in
/// the `k`-th grid direction.
pub fn dft_column(n: usize, k: usize) -> Array1<Complex64> {
    let scale = 1.0 / (n as f64).sqrt();
    Array1::from_shape_fn(n, |m| {
        let phase = -TAU * ((m * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    })
}

/// Hermitian (conjugate) transpose.
pub fn hermitian(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|z| z.conj())
}

/// Cyclic shift matrix `C(shift)` of size `n`.
///
/// `C(shift) * x` moves the entry at index `i` to index `(i + shift) mod n`,
/// so left-multiplying a matrix relocates its row `i` to row `i + shift`.
/// The shift diagonalizes in the DFT basis:
/// `DFT_n * C(shift) * DFT_n^H = diag(exp(j m phi))` with
/// `phi = -2 pi shift / n`, which is what a linear-phase reflection profile
/// implements on a uniform surface.
pub fn cyclic_shift_matrix(n: usize, shift: i64) -> Array2<Complex64> {
    let s = shift.rem_euclid(n as i64) as usize;
    Array2::from_shape_fn((n, n), |(m, c)| {
        if c == (m + n - s) % n {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
