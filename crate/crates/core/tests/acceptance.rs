//! Acceptance suite: every release-gating behavior, one test per criterion.
//!
//! Each test prints a `[criterion N] PASS — ...` line on success (visible with
//! `cargo test --test acceptance -- --nocapture`); a failing criterion fails
//! its test with the offending numbers in the panic message.

use ndarray::Array2;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::time::Instant;

use ris_sparse::alloc::{
    composite_capacity, dir_ris_rank_sweep, direct_capacity, joint_power_dir_ris_alloc_1,
    joint_power_dir_ris_alloc_2, joint_power_ris_alloc_1, joint_power_ris_alloc_2,
    mimo_vs_reflection_sweep, opt_dir_ris_rank_traced, opt_ris_rank_traced, reflection_capacity,
    reflection_capacity_rq, ris_rank_sweep, SolverConfig,
};
use ris_sparse::channel::{
    build_virtual_channel, sparse_svd, ArrayGeometry, PathDescriptor, VirtualChannel,
};
use ris_sparse::dft::hermitian;
use ris_sparse::direct::{build_precoder, PowerAllocation};
use ris_sparse::oracle::{
    capacity_surface, composite_capacity_gradient, projected_gradient_multistart,
    reflection_capacity_gradient, CapacityObjective,
};
use ris_sparse::reflection::{best_rank1_reflection, verify_reflection_gain};

fn db(values: &[f64]) -> Vec<f64> {
    values.iter().map(|&d| 10f64.powf(d / 10.0)).collect()
}

fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() <= tol, "{what}: {a} vs {b} (tol {tol})");
}

fn random_row_sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> VirtualChannel {
    let mut m = Array2::from_elem((rows, cols), Complex64::new(0.0, 0.0));
    for i in 0..rows {
        if rng.gen::<f64>() < 0.6 {
            let k = rng.gen_range(0..cols);
            m[(i, k)] = Complex64::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(0.0..TAU));
        }
    }
    VirtualChannel::from_entries(m)
}

#[test]
fn criterion_01_table1_reproduction() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let snr = db(&[22.0, 21.0, 20.0, 19.0]);

    let sweep = ris_rank_sweep(&snr, &cfg).unwrap();
    let expect_capacity = [7.3173, 8.4444, 7.5295, 7.5295];
    let expect_r: [&[f64]; 4] = [
        &[1.0],
        &[0.5037, 0.4963],
        &[0.3619, 0.3422, 0.2959],
        &[0.3619, 0.3422, 0.2959, 0.0],
    ];
    for (k, result) in sweep.iter().enumerate() {
        assert_close(
            result.capacity,
            expect_capacity[k],
            1e-3,
            &format!("capacity at k={}", k + 1),
        );
        assert_eq!(result.r.len(), expect_r[k].len());
        for (j, &r) in expect_r[k].iter().enumerate() {
            assert_close(result.r[j], r, 1e-3, &format!("r[{j}] at k={}", k + 1));
        }
    }

    let best = joint_power_ris_alloc_1(&snr, &cfg).unwrap();
    assert_eq!(best.rank, 2, "optimal transmission rank");
    assert_close(best.capacity, 8.4444, 1e-3, "selected capacity");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[criterion 1] PASS — capacities per rank {:?}, optimal rank 2, {:?}",
        sweep.iter().map(|r| r.capacity).collect::<Vec<_>>(),
        elapsed
    );
}

#[test]
fn criterion_02_table2_reproduction() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let snr_d = db(&[20.0, 19.0, 18.0, 17.0]);
    let snr_r = db(&[24.0, 22.0, 21.0, 20.0]);

    let sweep = dir_ris_rank_sweep(&snr_d, &snr_r, &cfg).unwrap();
    let expect_total = [21.3817, 21.1777, 21.1777, 21.1777];
    for (k, result) in sweep.iter().enumerate() {
        assert_close(
            result.capacity,
            expect_total[k],
            1e-3,
            &format!("total capacity at k={}", k + 1),
        );
    }

    // row 1: the reflected/direct split and the full allocation vectors
    let row1 = &sweep[0];
    let c_refl = reflection_capacity_rq(&row1.r, &row1.q_reflected, &snr_r[..1]);
    let c_dir = direct_capacity(&row1.q_direct, &snr_d);
    assert_close(c_refl, 5.7380, 1e-3, "row 1 reflected capacity");
    assert_close(c_dir, 15.6437, 1e-3, "row 1 direct capacity");
    assert_close(row1.r[0], 1.0, 1e-3, "row 1 r*");
    assert_close(row1.q_reflected[0], 0.2085, 1e-3, "row 1 q_R*");
    for (j, &expect) in [0.2025, 0.1999, 0.1966, 0.1925].iter().enumerate() {
        assert_close(row1.q_direct[j], expect, 1e-3, &format!("row 1 q_D[{j}]"));
    }

    // row 2 (and the identical rows 3, 4) allocation vectors
    let row2 = &sweep[1];
    for (j, &expect) in [0.5193, 0.4807].iter().enumerate() {
        assert_close(row2.r[j], expect, 1e-3, &format!("row 2 r[{j}]"));
    }
    for (j, &expect) in [0.1686, 0.1561].iter().enumerate() {
        assert_close(row2.q_reflected[j], expect, 1e-3, &format!("row 2 q_R[{j}]"));
    }
    for (j, &expect) in [0.1734, 0.1708, 0.1676, 0.1635].iter().enumerate() {
        assert_close(row2.q_direct[j], expect, 1e-3, &format!("row 2 q_D[{j}]"));
    }
    for k in [2usize, 3] {
        let row = &sweep[k];
        for (j, &expect) in [0.5193, 0.4807].iter().enumerate() {
            assert_close(row.r[j], expect, 1e-3, &format!("row {} r[{j}]", k + 1));
        }
        for j in 2..=k {
            assert_eq!(row.r[j], 0.0, "row {} extra pair got area", k + 1);
            assert_eq!(row.q_reflected[j], 0.0, "row {} extra pair got power", k + 1);
        }
    }

    let best = joint_power_dir_ris_alloc_1(&snr_d, &snr_r, &cfg).unwrap();
    assert_eq!(best.r.len(), 1, "optimal reflected-beam count");
    assert_eq!(best.rank, 5, "total transmission rank");
    assert_close(best.capacity, 21.3817, 1e-3, "selected capacity");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[criterion 2] PASS — totals {:?}, reflected count 1, rank 5, {:?}",
        sweep.iter().map(|r| r.capacity).collect::<Vec<_>>(),
        elapsed
    );
}

#[test]
fn criterion_03_oracle_agreement() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = Vec::new();

    for trial in 0..200 {
        let j = rng.gen_range(1..=4);
        let mut snr_db: Vec<f64> = (0..j).map(|_| rng.gen_range(0.0..40.0)).collect();
        snr_db.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let snr = db(&snr_db);
        let solver = joint_power_ris_alloc_1(&snr, &cfg).unwrap();
        let mut oracle = projected_gradient_multistart(
            CapacityObjective::Reflection,
            &[],
            &snr,
            50,
            9000 + trial,
        )
        .unwrap();
        if !oracle.check_agreement(solver.capacity, 1e-4) {
            violations.push(format!(
                "reflection trial {trial}: snr_db={snr_db:?} solver={} oracle={}",
                solver.capacity, oracle.best_capacity
            ));
        }
    }

    for trial in 0..100 {
        let n_d = rng.gen_range(0..=4);
        let n_r = rng.gen_range(if n_d == 0 { 1 } else { 0 }..=4);
        let snr_d_db: Vec<f64> = (0..n_d).map(|_| rng.gen_range(0.0..40.0)).collect();
        let mut snr_r_db: Vec<f64> = (0..n_r).map(|_| rng.gen_range(0.0..40.0)).collect();
        snr_r_db.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let snr_d = db(&snr_d_db);
        let snr_r = db(&snr_r_db);
        let solver = joint_power_dir_ris_alloc_1(&snr_d, &snr_r, &cfg).unwrap();
        let mut oracle = projected_gradient_multistart(
            CapacityObjective::Composite,
            &snr_d,
            &snr_r,
            50,
            41000 + trial,
        )
        .unwrap();
        if !oracle.check_agreement(solver.capacity, 1e-4) {
            violations.push(format!(
                "composite trial {trial}: d={snr_d_db:?} r={snr_r_db:?} solver={} oracle={}",
                solver.capacity, oracle.best_capacity
            ));
        }
    }

    for v in &violations {
        println!("COUNTEREXAMPLE: {v}");
    }
    let elapsed = start.elapsed();
    assert!(
        violations.is_empty(),
        "{} oracle disagreements (see log)",
        violations.len()
    );
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!("[criterion 3] PASS — 200 reflection + 100 composite instances within 1e-4, {elapsed:?}");
}

#[test]
fn criterion_04_algorithm_equivalence() {
    let cfg = SolverConfig::default();

    // reference inputs: exact agreement demanded
    let snr = db(&[22.0, 21.0, 20.0, 19.0]);
    let a1 = joint_power_ris_alloc_1(&snr, &cfg).unwrap();
    let a2 = joint_power_ris_alloc_2(&snr, &cfg).unwrap();
    assert_close(a1.capacity, a2.capacity, 1e-6, "reflection strategies on reference");

    let snr_d = db(&[20.0, 19.0, 18.0, 17.0]);
    let snr_r = db(&[24.0, 22.0, 21.0, 20.0]);
    let b1 = joint_power_dir_ris_alloc_1(&snr_d, &snr_r, &cfg).unwrap();
    let b2 = joint_power_dir_ris_alloc_2(&snr_d, &snr_r, &cfg).unwrap();
    assert_close(b1.capacity, b2.capacity, 1e-6, "composite strategies on reference");

    // randomized instances: report the agreement rate, log discrepancies
    let mut rng = ChaCha8Rng::seed_from_u64(515);
    let mut refl_agree = 0;
    for trial in 0..200 {
        let j = rng.gen_range(1..=6);
        let mut snr_db: Vec<f64> = (0..j).map(|_| rng.gen_range(0.0..40.0)).collect();
        snr_db.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let snr = db(&snr_db);
        let x = joint_power_ris_alloc_1(&snr, &cfg).unwrap();
        let y = joint_power_ris_alloc_2(&snr, &cfg).unwrap();
        if (x.capacity - y.capacity).abs() <= 1e-6 {
            refl_agree += 1;
        } else {
            println!(
                "DISCREPANCY reflection trial {trial}: snr_db={snr_db:?} full={} uniform={}",
                x.capacity, y.capacity
            );
        }
    }
    let mut comp_agree = 0;
    for trial in 0..100 {
        let n_d = rng.gen_range(0..=4);
        let n_r = rng.gen_range(if n_d == 0 { 1 } else { 0 }..=4);
        let snr_d: Vec<f64> = (0..n_d).map(|_| 10f64.powf(rng.gen_range(0.0..40.0) / 10.0)).collect();
        let mut snr_r_db: Vec<f64> = (0..n_r).map(|_| rng.gen_range(0.0..40.0)).collect();
        snr_r_db.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let snr_r = db(&snr_r_db);
        let x = joint_power_dir_ris_alloc_1(&snr_d, &snr_r, &cfg).unwrap();
        let y = joint_power_dir_ris_alloc_2(&snr_d, &snr_r, &cfg).unwrap();
        if (x.capacity - y.capacity).abs() <= 1e-6 {
            comp_agree += 1;
        } else {
            println!(
                "DISCREPANCY composite trial {trial}: d={snr_d:?} r={snr_r:?} full={} uniform={}",
                x.capacity, y.capacity
            );
        }
    }
    println!(
        "[criterion 4] PASS — reference inputs agree to 1e-6; random agreement rates: reflection {refl_agree}/200, composite {comp_agree}/100"
    );
}

#[test]
fn criterion_05_row_sparse_svd_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(1234);
    for trial in 0..500 {
        let rows = rng.gen_range(2..=64);
        let cols = rng.gen_range(2..=64);
        let h = random_row_sparse(&mut rng, rows, cols);

        // Gram matrix diagonal
        let gram = hermitian(h.entries()).dot(h.entries());
        for ((i, j), v) in gram.indexed_iter() {
            if i != j {
                assert!(
                    v.norm() < 1e-9,
                    "trial {trial}: gram off-diagonal ({i},{j}) = {v}"
                );
            }
        }

        let svd = sparse_svd(&h).unwrap();

        // singular values against the dense decomposition
        let mut ours = svd.singular_values_sorted();
        let dense = nalgebra::DMatrix::from_fn(rows, cols, |i, j| h.entries()[(i, j)]);
        let mut theirs: Vec<f64> = dense.singular_values().iter().cloned().collect();
        theirs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        theirs.truncate(ours.len());
        ours.truncate(theirs.len());
        for (a, b) in ours.iter().zip(theirs.iter()) {
            assert!(
                (a - b).abs() <= 1e-9 * b.max(1.0),
                "trial {trial}: singular value {a} vs {b}"
            );
        }

        // reconstruction
        let back = svd.reconstruct();
        let err = back
            .iter()
            .zip(h.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "trial {trial}: reconstruction error {err}");
    }
    println!("[criterion 5] PASS — 500 row-sparse matrices up to 64x64: gram diagonal, dense-SVD match, reconstruction < 1e-9");
}

#[test]
fn criterion_06_precoder_power_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut checked = 0;
    for &n in &[4usize, 8, 16, 64] {
        let tx = ArrayGeometry::half_wavelength(n).unwrap();
        for _ in 0..25 {
            let n_beams = rng.gen_range(1..=n.min(6));
            let mut cols: Vec<usize> = (0..n).collect();
            cols.shuffle(&mut rng);
            let beams = &cols[..n_beams];
            let levels: Vec<f64> = (0..n_beams).map(|_| rng.gen_range(0.05..5.0)).collect();
            let total: f64 = levels.iter().sum();
            let alloc = PowerAllocation { levels, total };
            let p = build_precoder(&alloc, &tx, beams).unwrap();
            let cov = p.dot(&hermitian(&p));
            let expect = total / n as f64;
            for i in 0..n {
                let d = cov[(i, i)];
                assert!(
                    (d.re - expect).abs() < 1e-9 && d.im.abs() < 1e-9,
                    "n={n} antenna {i}: {d} vs {expect}"
                );
            }
            checked += 1;
        }
    }
    println!("[criterion 6] PASS — {checked} random allocations: per-antenna transmit power = sum(sp)/N_T within 1e-9");
}

#[test]
fn criterion_07_rank1_reflection_end_to_end() {
    let n = 16;
    let geo = ArrayGeometry::half_wavelength(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(321);
    let mut checked = 0;
    for _ in 0..20 {
        let n_paths = rng.gen_range(1..=4);
        let mut pick = |count: usize| {
            let mut v: Vec<usize> = (0..n).collect();
            v.shuffle(&mut rng);
            v.truncate(count);
            v
        };
        let (rows1, cols1, rows2, cols2) =
            (pick(n_paths), pick(n_paths), pick(n_paths), pick(n_paths));
        let build = |rows: &[usize], cols: &[usize], rng: &mut ChaCha8Rng| {
            let paths: Vec<PathDescriptor> = rows
                .iter()
                .zip(cols.iter())
                .map(|(&r, &c)| {
                    PathDescriptor::on_grid(
                        Complex64::from_polar(rng.gen_range(0.3..4.0), rng.gen_range(0.0..TAU)),
                        c as f64,
                        n,
                        r as f64,
                        n,
                    )
                    .unwrap()
                })
                .collect();
            build_virtual_channel(&paths, &geo, &geo).unwrap()
        };
        let h1 = build(&rows1, &cols1, &mut rng);
        let h2 = build(&rows2, &cols2, &mut rng);

        let pair = best_rank1_reflection(&h1, &h2).unwrap();
        let measured = verify_reflection_gain(&h1, &h2, &pair, n).unwrap();
        assert!(
            (measured - pair.gain).abs() <= 1e-6 * pair.gain,
            "aligned gain {measured} vs analytic {}",
            pair.gain
        );

        // control case: deflect onto a provably empty outgoing column (a bare
        // +1 offset could land on another path of h2)
        let offset = (1..n as i64)
            .find(|d| {
                let col = (pair.incident_row as i64 + pair.shift + d).rem_euclid(n as i64);
                h2.column_norm(col as usize) <= h2.tolerance()
            })
            .expect("some outgoing column is empty");
        let mut wrong = pair;
        wrong.shift += offset;
        let missed = verify_reflection_gain(&h1, &h2, &wrong, n).unwrap();
        assert!(
            missed < 1e-9 * measured,
            "mis-shifted control leaked {missed} (aligned {measured})"
        );
        checked += 1;
    }
    println!("[criterion 7] PASS — {checked} on-grid scenarios: measured gain within 1e-6 relative, mis-shifted control < 1e-9 of aligned");
}

#[test]
fn criterion_08_landscape_qualitative_checks() {
    // low SNR: the grid maximum sits at both endpoints
    let low = capacity_surface(&db(&[5.0, 5.0]), 400).unwrap();
    let caps: Vec<f64> = low.points.iter().map(|p| p.capacity).collect();
    let max = caps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((caps[0] - max).abs() < 1e-12, "low SNR: left endpoint not maximal");
    assert!(
        (caps[caps.len() - 1] - max).abs() < 1e-12,
        "low SNR: right endpoint not maximal"
    );
    let interior_max = caps[1..caps.len() - 1]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(interior_max < max, "low SNR: interior point ties the endpoints");

    // high SNR: interior maximum at the center, local minima strictly inside
    // on both sides, and neither minimum at an endpoint
    let high = capacity_surface(&db(&[30.0, 30.0]), 400).unwrap();
    let caps: Vec<f64> = high.points.iter().map(|p| p.capacity).collect();
    let mid = caps.len() / 2;
    assert!(
        caps[mid] > caps[mid - 1] && caps[mid] > caps[mid + 1],
        "high SNR: no local maximum at the center"
    );
    let global = caps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((caps[mid] - global).abs() < 1e-12, "high SNR: center is not the global maximum");
    let left_min = (1..mid).find(|&i| caps[i] < caps[i - 1] && caps[i] < caps[i + 1]);
    let right_min =
        (mid + 1..caps.len() - 1).find(|&i| caps[i] < caps[i - 1] && caps[i] < caps[i + 1]);
    let li = left_min.expect("high SNR: no interior minimum left of center");
    let ri = right_min.expect("high SNR: no interior minimum right of center");
    assert!(li > 0 && ri < caps.len() - 1);
    println!(
        "[criterion 8] PASS — endpoint maxima at 5 dB; center max with interior minima at r1={:.3} and r1={:.3} at 30 dB",
        high.points[li].r[0],
        high.points[ri].r[0]
    );
}

#[test]
fn criterion_09_rank_versus_snr_behavior() {
    let range: Vec<f64> = (10..=30).map(|d| d as f64).collect();
    let rows = mimo_vs_reflection_sweep(4, &range);

    assert_eq!(rows[0].mimo_rank, 4, "conventional side below full rank at 10 dB");
    assert_eq!(rows[0].refl_rank, 1, "reflection side above rank 1 at 10 dB");
    assert_eq!(
        rows.last().unwrap().refl_rank,
        4,
        "reflection side below full rank at 30 dB"
    );
    let mut prev = 0usize;
    for row in &rows {
        assert!(
            row.refl_rank >= prev,
            "reflection rank dropped at {} dB",
            row.snr_db
        );
        prev = row.refl_rank;

        let snr = 10f64.powf(row.snr_db / 10.0);
        let k_m = row.mimo_rank as f64;
        let k_r = row.refl_rank as f64;
        assert_eq!(row.mimo_layer_snr, snr / k_m, "per-layer SNR of the conventional side");
        assert_eq!(
            row.refl_layer_snr,
            snr / (k_r * k_r * k_r),
            "per-layer SNR of the reflection side"
        );
    }
    let first_full = rows.iter().find(|r| r.refl_rank == 4).unwrap().snr_db;
    println!("[criterion 9] PASS — conventional rank 4 throughout; reflection rank 1 at 10 dB reaching 4 at {first_full} dB");
}

#[test]
fn criterion_10_high_snr_centroid() {
    let cfg = SolverConfig::default();
    for j in [2usize, 3, 4] {
        let snr = vec![1e6; j]; // 60 dB
        let result = joint_power_ris_alloc_1(&snr, &cfg).unwrap();
        assert_eq!(result.rank, j, "rank at j={j}");
        for (idx, &share) in result.r.iter().enumerate() {
            assert!(
                (share - 1.0 / j as f64).abs() <= 1e-2,
                "j={j} share[{idx}]={share}"
            );
        }
    }
    println!("[criterion 10] PASS — equal pairs at 60 dB settle within 1e-2 of the uniform split for J in {{2,3,4}}");
}

#[test]
fn criterion_11_convergence_traces() {
    let cfg = SolverConfig::default();

    let snr = db(&[22.0, 21.0, 20.0, 19.0]);
    let (refl, refl_trace) = opt_ris_rank_traced(&snr, &cfg).unwrap();
    assert!(refl.converged, "reflection solver did not converge");
    let drop = refl_trace
        .iter()
        .position(|r| r[3] == 0.0)
        .expect("weakest pair never dropped");
    assert!(
        drop < refl_trace.len() - 1,
        "weakest pair dropped only at the final sweep"
    );

    let snr_d = db(&[20.0, 19.0, 18.0, 17.0]);
    let snr_r = db(&[24.0, 22.0, 21.0, 20.0]);
    let (comp, comp_trace) = opt_dir_ris_rank_traced(&snr_d, &snr_r, &cfg).unwrap();
    assert!(comp.converged, "composite solver did not converge");
    let drop2 = comp_trace
        .iter()
        .position(|s| s.q[2] == 0.0 && s.q[3] == 0.0)
        .expect("weakest reflected beams never dropped");
    assert!(drop2 < comp_trace.len() - 1);

    // iteration counts are reported, not asserted: they depend on water-level
    // search internals
    println!(
        "[criterion 11] PASS — reflection solver converged in {} sweeps (weakest pair zero from sweep {}); composite solver converged in {} sweeps (two weakest reflected zero from sweep {})",
        refl.iterations, drop, comp.iterations, drop2
    );
}

#[test]
fn criterion_12_gradient_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(888);
    let h = 1e-6;
    let random_interior = |dim: usize, rng: &mut ChaCha8Rng| -> Vec<f64> {
        let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|&v| v / sum).collect()
    };
    for _ in 0..100 {
        let n_r = rng.gen_range(1..=4);
        let n_d = rng.gen_range(0..=3);
        let snr_r: Vec<f64> = (0..n_r).map(|_| 10f64.powf(rng.gen_range(0.0..35.0) / 10.0)).collect();
        let snr_d: Vec<f64> = (0..n_d).map(|_| 10f64.powf(rng.gen_range(0.0..35.0) / 10.0)).collect();
        let r = random_interior(n_r, &mut rng);
        let q = random_interior(n_r + n_d, &mut rng);

        let g = reflection_capacity_gradient(&r, &snr_r);
        for j in 0..n_r {
            let mut plus = r.clone();
            plus[j] += h;
            let mut minus = r.clone();
            minus[j] -= h;
            let fd =
                (reflection_capacity(&plus, &snr_r) - reflection_capacity(&minus, &snr_r)) / (2.0 * h);
            assert!(
                (g[j] - fd).abs() <= 1e-4 * fd.abs().max(1e-6),
                "reflection grad[{j}]: {} vs {fd}",
                g[j]
            );
        }

        let (gr, gq) = composite_capacity_gradient(&r, &q, &snr_r, &snr_d);
        let eval =
            |r: &[f64], q: &[f64]| composite_capacity(r, &q[..n_r], &q[n_r..], &snr_r, &snr_d);
        for j in 0..n_r {
            let mut plus = r.clone();
            plus[j] += h;
            let mut minus = r.clone();
            minus[j] -= h;
            let fd = (eval(&plus, &q) - eval(&minus, &q)) / (2.0 * h);
            assert!(
                (gr[j] - fd).abs() <= 1e-4 * fd.abs().max(1e-6),
                "composite area grad[{j}]: {} vs {fd}",
                gr[j]
            );
        }
        for j in 0..n_r + n_d {
            let mut plus = q.clone();
            plus[j] += h;
            let mut minus = q.clone();
            minus[j] -= h;
            let fd = (eval(&r, &plus) - eval(&r, &minus)) / (2.0 * h);
            assert!(
                (gq[j] - fd).abs() <= 1e-4 * fd.abs().max(1e-6),
                "composite power grad[{j}]: {} vs {fd}",
                gq[j]
            );
        }
    }
    println!("[criterion 12] PASS — closed-form gradients match central differences (step 1e-6) within 1e-4 relative at 100 interior points");
}

// Cross-checks tying the iterative solvers to the exhaustive searches: the
// capacity of the rank-selecting solver must dominate both lattice maxima
// (power/area split jointly, and the collapsed single-simplex form).
#[test]
fn solver_dominates_lattice_searches() {
    use ris_sparse::oracle::grid_search_reflection;
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let j = rng.gen_range(2..=3);
        let mut snr: Vec<f64> = (0..j).map(|_| 10f64.powf(rng.gen_range(5.0..35.0) / 10.0)).collect();
        snr.sort_by(|a, b| b.partial_cmp(a).unwrap());

        let solver = joint_power_ris_alloc_1(&snr, &cfg).unwrap();
        let collapsed = grid_search_reflection(&snr, 0.01).unwrap();

        // joint lattice over independent (r, q): never better than the
        // collapsed form beyond discretization, and both below the solver
        let divisions = 100usize;
        let mut joint_best = f64::NEG_INFINITY;
        let mut compositions: Vec<Vec<f64>> = Vec::new();
        fn fill(total: usize, parts: usize, buf: &mut Vec<usize>, out: &mut Vec<Vec<f64>>, div: usize) {
            if parts == 1 {
                buf.push(total);
                out.push(buf.iter().map(|&c| c as f64 / div as f64).collect());
                buf.pop();
                return;
            }
            for v in 0..=total {
                buf.push(v);
                fill(total - v, parts - 1, buf, out, div);
                buf.pop();
            }
        }
        fill(divisions, j, &mut Vec::new(), &mut compositions, divisions);
        for r in &compositions {
            for q in &compositions {
                let c = reflection_capacity_rq(r, q, &snr);
                if c > joint_best {
                    joint_best = c;
                }
            }
        }

        assert!(
            (joint_best - collapsed.best_capacity).abs() < 0.02,
            "joint lattice {joint_best} vs collapsed lattice {}",
            collapsed.best_capacity
        );
        assert!(joint_best >= collapsed.best_capacity - 1e-12);
        assert!(
            solver.capacity >= joint_best - 1e-3,
            "solver {} below joint lattice {joint_best}",
            solver.capacity
        );
        assert!(
            solver.capacity >= collapsed.best_capacity - 1e-3,
            "solver {} below collapsed lattice {}",
            solver.capacity,
            collapsed.best_capacity
        );
    }
}
