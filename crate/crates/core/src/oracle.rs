//! Independent optimizers used to validate the allocation solvers.
//!
//! The allocation landscape is nonconvex, so the solvers' answers are checked
//! against two unrelated search strategies: exhaustive evaluation on a simplex
//! lattice (small dimensions only) and projected-gradient ascent from many
//! random starting points. Neither shares code with the solvers beyond the
//! capacity formulas themselves.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

use crate::alloc::{composite_capacity, reflection_capacity};
use crate::error::{Error, Result};

/// Which search produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    SimplexGrid,
    ProjectedGradientMultistart,
}

/// Which capacity function a search ascends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapacityObjective {
    /// Reflection-only: area shares with powers folded in (cubic law).
    Reflection,
    /// Direct beams plus reflected pairs: independent power and area simplices.
    Composite,
}

/// Outcome of an oracle search.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub best_capacity: f64,
    /// Area shares of the best point (reflected pairs).
    pub best_r: Vec<f64>,
    /// Power shares of the best point, reflected first then direct. For the
    /// reflection-only objective this equals `best_r`.
    pub best_q: Vec<f64>,
    pub method: OracleMethod,
    /// Random starts for the multistart search; lattice points evaluated for
    /// the grid search.
    pub n_starts: usize,
    /// Seed the randomness was drawn from (0 for the deterministic grid).
    pub seed: u64,
    /// Worst first-order stationarity residual across terminal points
    /// (multistart only; 0 for the grid).
    pub max_kkt_residual: f64,
    /// Set by [`OracleReport::check_agreement`]; `None` until compared.
    pub agreement: Option<bool>,
}

impl OracleReport {
    /// Compare against the capacity an allocation solver produced and record
    /// whether the two match within `tol`.
    pub fn check_agreement(&mut self, algorithm_capacity: f64, tol: f64) -> bool {
        let agree = (self.best_capacity - algorithm_capacity).abs() <= tol;
        self.agreement = Some(agree);
        agree
    }
}

/// One sampled point of a capacity surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    /// Full barycentric area shares (length 2 or 3).
    pub r: Vec<f64>,
    pub capacity: f64,
}

/// Capacity sampled over the whole area simplex, for plotting and for the
/// qualitative landscape checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySurface {
    pub snr: Vec<f64>,
    pub resolution: usize,
    pub points: Vec<SurfacePoint>,
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

/// Gradient of [`reflection_capacity`]:
/// `dC/dr_j = 3 r_j^2 snr_j / (ln 2 * (1 + r_j^3 snr_j))`.
pub fn reflection_capacity_gradient(r: &[f64], snr: &[f64]) -> Vec<f64> {
    r.iter()
        .zip(snr.iter())
        .map(|(&r, &s)| 3.0 * r * r * s / (LN_2 * (1.0 + r * r * r * s)))
        .collect()
}

/// Gradient of [`composite_capacity`] in `(r, q)`; `q` holds the reflected
/// shares first, then the direct shares.
pub fn composite_capacity_gradient(
    r: &[f64],
    q: &[f64],
    snr_reflected: &[f64],
    snr_direct: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n_r = snr_reflected.len();
    let grad_r: Vec<f64> = (0..n_r)
        .map(|j| {
            let denom = 1.0 + r[j] * r[j] * q[j] * snr_reflected[j];
            2.0 * r[j] * q[j] * snr_reflected[j] / (LN_2 * denom)
        })
        .collect();
    let grad_q: Vec<f64> = (0..n_r + snr_direct.len())
        .map(|j| {
            if j < n_r {
                let denom = 1.0 + r[j] * r[j] * q[j] * snr_reflected[j];
                r[j] * r[j] * snr_reflected[j] / (LN_2 * denom)
            } else {
                let s = snr_direct[j - n_r];
                s / (LN_2 * (1.0 + q[j] * s))
            }
        })
        .collect();
    (grad_r, grad_q)
}

// ---------------------------------------------------------------------------
// Simplex geometry
// ---------------------------------------------------------------------------

/// Euclidean projection onto the probability simplex (sort-based, exact).
pub fn project_to_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        }
    }
    y.iter().map(|&v| (v - threshold).max(0.0)).collect()
}

fn random_simplex_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    // exponential spacings give the uniform (flat Dirichlet) distribution
    let draws: Vec<f64> = (0..dim)
        .map(|_| (-(1.0 - rng.gen::<f64>()).ln()).max(1e-300))
        .collect();
    let sum: f64 = draws.iter().sum();
    draws.iter().map(|&d| d / sum).collect()
}

/// Simplex point biased toward the vertices (cubed exponential spacings).
/// Boundary maxima of the capacity landscape can have narrow basins that
/// uniform starts rarely enter; these starts cover them.
fn random_vertex_biased_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..dim)
        .map(|_| {
            let e = (-(1.0 - rng.gen::<f64>()).ln()).max(1e-300);
            e * e * e
        })
        .collect();
    let sum: f64 = draws.iter().sum();
    draws.iter().map(|&d| d / sum).collect()
}

// ---------------------------------------------------------------------------
// Projected gradient ascent
// ---------------------------------------------------------------------------

const KKT_TOL: f64 = 1e-8;
const MAX_ASCENT_SWEEPS: usize = 200_000;
const ARMIJO_SIGMA: f64 = 1e-4;
// Largest per-coordinate move allowed in one sweep. Without this cap a grown
// step jumps straight onto a simplex vertex and the search degenerates into
// vertex enumeration instead of following the local ascent flow.
const MAX_DISPLACEMENT: f64 = 0.25;

/// Ascend a smooth objective over a product of simplices (one block per
/// simplex). Returns the terminal point, its value, and the first-order
/// residual `|| P(x + grad) - x ||_inf` at termination.
fn projected_ascent<F, G>(mut x: Vec<Vec<f64>>, value: F, gradient: G) -> (Vec<Vec<f64>>, f64, f64)
where
    F: Fn(&[Vec<f64>]) -> f64,
    G: Fn(&[Vec<f64>]) -> Vec<Vec<f64>>,
{
    let project = |blocks: &[Vec<f64>]| -> Vec<Vec<f64>> {
        blocks.iter().map(|b| project_to_simplex(b)).collect()
    };
    let residual = |x: &[Vec<f64>], g: &[Vec<f64>]| -> f64 {
        let stepped: Vec<Vec<f64>> = x
            .iter()
            .zip(g.iter())
            .map(|(xb, gb)| {
                let moved: Vec<f64> = xb.iter().zip(gb.iter()).map(|(a, b)| a + b).collect();
                project_to_simplex(&moved)
            })
            .collect();
        stepped
            .iter()
            .zip(x.iter())
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };

    x = project(&x);
    let mut fx = value(&x);
    let mut step = 1.0f64;
    let mut res = f64::INFINITY;

    for _ in 0..MAX_ASCENT_SWEEPS {
        let grad = gradient(&x);
        res = residual(&x, &grad);
        if res < KKT_TOL {
            break;
        }

        let grad_inf = grad
            .iter()
            .flat_map(|b| b.iter())
            .fold(0.0f64, |m, &g| m.max(g.abs()));
        let step_cap = if grad_inf > 0.0 {
            MAX_DISPLACEMENT / grad_inf
        } else {
            1.0
        };
        step = (step * 2.0).min(step_cap);
        let mut moved_by = 0.0f64;
        let mut advanced = false;
        while step > 1e-18 {
            let trial: Vec<Vec<f64>> = x
                .iter()
                .zip(grad.iter())
                .map(|(xb, gb)| {
                    let moved: Vec<f64> =
                        xb.iter().zip(gb.iter()).map(|(a, g)| a + step * g).collect();
                    project_to_simplex(&moved)
                })
                .collect();
            let inner: f64 = trial
                .iter()
                .zip(x.iter())
                .zip(grad.iter())
                .flat_map(|((t, xb), gb)| {
                    t.iter()
                        .zip(xb.iter())
                        .zip(gb.iter())
                        .map(|((a, b), g)| g * (a - b))
                })
                .sum();
            let ft = value(&trial);
            if ft >= fx + ARMIJO_SIGMA * inner && ft.is_finite() {
                moved_by = trial
                    .iter()
                    .zip(x.iter())
                    .flat_map(|(a, b)| a.iter().zip(b.iter()))
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                x = trial;
                fx = ft;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if !advanced || moved_by < 1e-13 {
            // the iterate stopped moving: stationary to machine precision
            res = residual(&x, &gradient(&x));
            break;
        }
    }
    (x, fx, res)
}

/// Global search by projected-gradient ascent from `n_starts` starting
/// points: the area-simplex vertices first, then random simplex points
/// (deterministic given the seed). Terminal points satisfy the first-order
/// condition to within `max_kkt_residual`; the best terminal point is
/// reported.
pub fn projected_gradient_multistart(
    objective: CapacityObjective,
    snr_direct: &[f64],
    snr_reflected: &[f64],
    n_starts: usize,
    seed: u64,
) -> Result<OracleReport> {
    if n_starts == 0 {
        return Err(Error::NoStarts);
    }
    for &s in snr_direct.iter().chain(snr_reflected.iter()) {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidSnr { value: s });
        }
    }
    let n_r = snr_reflected.len();
    let n_d = snr_direct.len();
    match objective {
        CapacityObjective::Reflection if n_r == 0 => return Err(Error::EmptySnr),
        CapacityObjective::Composite if n_r + n_d == 0 => return Err(Error::NoBeams),
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assemble = |r: Vec<f64>, q: Vec<f64>| -> Vec<Vec<f64>> {
        match objective {
            CapacityObjective::Reflection => vec![r],
            CapacityObjective::Composite if n_r > 0 => vec![q, r],
            CapacityObjective::Composite => vec![q],
        }
    };
    // Deterministic first: one start per area-simplex vertex. A vertex is
    // stationary in the area block, so each of these evaluates the
    // whole-surface-on-one-pair candidate exactly; their basins are narrow
    // and random starts alone cover them unreliably.
    let mut starts: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n_starts);
    for j in 0..n_r.min(n_starts) {
        let mut vertex = vec![0.0; n_r];
        vertex[j] = 1.0;
        let q = vec![1.0 / (n_r + n_d) as f64; n_r + n_d];
        starts.push(assemble(vertex, q));
    }
    // Fill the rest with random starts. The power subproblem is concave at
    // fixed areas, so only the area block alternates between uniform and
    // vertex-biased draws.
    for i in starts.len()..n_starts {
        let area = if i % 2 == 0 {
            random_simplex_point(&mut rng, n_r)
        } else {
            random_vertex_biased_point(&mut rng, n_r)
        };
        let q = random_simplex_point(&mut rng, n_r + n_d);
        starts.push(assemble(area, q));
    }

    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    let mut max_kkt_residual = 0.0f64;
    for x0 in starts {
        let (x, fx, res) = match objective {
            CapacityObjective::Reflection => projected_ascent(
                x0,
                |blocks| reflection_capacity(&blocks[0], snr_reflected),
                |blocks| vec![reflection_capacity_gradient(&blocks[0], snr_reflected)],
            ),
            CapacityObjective::Composite => projected_ascent(
                x0,
                |blocks| {
                    let q = &blocks[0];
                    let r: &[f64] = if n_r > 0 { &blocks[1] } else { &[] };
                    composite_capacity(r, &q[..n_r], &q[n_r..], snr_reflected, snr_direct)
                },
                |blocks| {
                    let q = &blocks[0];
                    let r: Vec<f64> = if n_r > 0 { blocks[1].clone() } else { Vec::new() };
                    let (grad_r, grad_q) =
                        composite_capacity_gradient(&r, q, snr_reflected, snr_direct);
                    if n_r > 0 {
                        vec![grad_q, grad_r]
                    } else {
                        vec![grad_q]
                    }
                },
            ),
        };
        max_kkt_residual = max_kkt_residual.max(res);
        if best.as_ref().is_none_or(|(b, _)| fx > *b) {
            best = Some((fx, x));
        }
    }

    let (best_capacity, blocks) = best.expect("at least one start");
    let (best_r, best_q) = match objective {
        CapacityObjective::Reflection => (blocks[0].clone(), blocks[0].clone()),
        CapacityObjective::Composite => {
            let q = blocks[0].clone();
            let r = if n_r > 0 { blocks[1].clone() } else { Vec::new() };
            (r, q)
        }
    };
    Ok(OracleReport {
        best_capacity,
        best_r,
        best_q,
        method: OracleMethod::ProjectedGradientMultistart,
        n_starts,
        seed,
        max_kkt_residual,
        agreement: None,
    })
}

// ---------------------------------------------------------------------------
// Simplex lattice search
// ---------------------------------------------------------------------------

fn for_each_composition(total: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn recurse(remaining: usize, slot: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if slot + 1 == buf.len() {
            buf[slot] = remaining;
            f(buf);
            return;
        }
        for v in 0..=remaining {
            buf[slot] = v;
            recurse(remaining - v, slot + 1, buf, f);
        }
    }
    let mut buf = vec![0usize; parts];
    recurse(total, 0, &mut buf, f);
}

/// Exhaustive evaluation of the reflection-only capacity over the simplex
/// lattice with the given spacing (boundary faces included). Supported up to
/// four beam pairs; the lattice blows up combinatorially beyond that and the
/// multistart search should be used instead.
pub fn grid_search_reflection(snr: &[f64], step: f64) -> Result<OracleReport> {
    if snr.is_empty() {
        return Err(Error::EmptySnr);
    }
    if snr.len() > 4 {
        return Err(Error::GridTooLarge {
            max: 4,
            got: snr.len(),
        });
    }
    if !(1e-3..=0.1).contains(&step) {
        return Err(Error::GridStepOutOfRange {
            step,
            min: 1e-3,
            max: 0.1,
        });
    }
    for &s in snr {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidSnr { value: s });
        }
    }

    let divisions = (1.0 / step).round().max(1.0) as usize;
    let mut best_capacity = f64::NEG_INFINITY;
    let mut best_r = vec![0.0; snr.len()];
    let mut evaluated = 0usize;
    for_each_composition(divisions, snr.len(), &mut |composition| {
        evaluated += 1;
        let r: Vec<f64> = composition
            .iter()
            .map(|&c| c as f64 / divisions as f64)
            .collect();
        let capacity = reflection_capacity(&r, snr);
        if capacity > best_capacity {
            best_capacity = capacity;
            best_r.copy_from_slice(&r);
        }
    });

    Ok(OracleReport {
        best_capacity,
        best_q: best_r.clone(),
        best_r,
        method: OracleMethod::SimplexGrid,
        n_starts: evaluated,
        seed: 0,
        max_kkt_residual: 0.0,
        agreement: None,
    })
}

/// Sample the reflection-only capacity over the whole area simplex for two or
/// three beam pairs, at `resolution` divisions per axis.
pub fn capacity_surface(snr: &[f64], resolution: usize) -> Result<CapacitySurface> {
    let j = snr.len();
    if !(2..=3).contains(&j) {
        return Err(Error::SurfaceDimension { got: j });
    }
    for &s in snr {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidSnr { value: s });
        }
    }
    let res = resolution.max(1);
    let mut points = Vec::new();
    if j == 2 {
        for i in 0..=res {
            let r1 = i as f64 / res as f64;
            let r = vec![r1, 1.0 - r1];
            let capacity = reflection_capacity(&r, snr);
            points.push(SurfacePoint { r, capacity });
        }
    } else {
        for i in 0..=res {
            for k in 0..=(res - i) {
                let r1 = i as f64 / res as f64;
                let r2 = k as f64 / res as f64;
                let r = vec![r1, r2, 1.0 - r1 - r2];
                let capacity = reflection_capacity(&r, snr);
                points.push(SurfacePoint { r, capacity });
            }
        }
    }
    Ok(CapacitySurface {
        snr: snr.to_vec(),
        resolution: res,
        points,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
