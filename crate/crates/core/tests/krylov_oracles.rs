mod common;

use aar_core::solve::IterateRecorder;
use aar_core::{
    aar_solve, bicgstab_solve, cg_solve, cg_solve_monitored, gmres_solve, AarOptions, CsrMatrix, KrylovOptions,
    Preconditioner, SolveStatus,
};
use nalgebra::{DMatrix, DVector};

/// Symmetric, strictly diagonally dominant, positive diagonal: SPD.
fn random_spd(n: usize, seed: u64) -> CsrMatrix<f64> {
    let s = common::random_diag_dominant(n, 0.1, 0.5, seed);
    let mut e = Vec::new();
    let mut rowsum = vec![0.0; n];
    for (i, j, v) in s.triplets() {
        if i < j {
            e.push((i, j, v));
            e.push((j, i, v));
            rowsum[i] += v.abs();
            rowsum[j] += v.abs();
        }
    }
    for (i, r) in rowsum.iter().enumerate() {
        e.push((i, i, r + 1.0 + (i % 5) as f64));
    }
    CsrMatrix::from_triplets(n, n, &e).unwrap()
}

/// Dirichlet 5-point Laplacian on a `k × k` grid.
fn laplacian_2d(k: usize) -> CsrMatrix<f64> {
    let mut e = Vec::new();
    for y in 0..k {
        for x in 0..k {
            let i = y * k + x;
            e.push((i, i, 4.0));
            if x > 0 {
                e.push((i, i - 1, -1.0));
            }
            if x + 1 < k {
                e.push((i, i + 1, -1.0));
            }
            if y > 0 {
                e.push((i, i - k, -1.0));
            }
            if y + 1 < k {
                e.push((i, i + k, -1.0));
            }
        }
    }
    CsrMatrix::from_triplets(k * k, k * k, &e).unwrap()
}

/// `min_y ‖b − A V_k y‖ / ‖b‖` for `k = 1..=kmax`, with an orthonormal Krylov
/// basis built by twice-repeated classical Gram-Schmidt and an SVD solve.
fn dense_gmres_residuals(a: &DMatrix<f64>, b: &[f64], kmax: usize) -> Vec<f64> {
    let n = b.len();
    let b = DVector::from_column_slice(b);
    let mut basis: Vec<DVector<f64>> = vec![b.normalize()];
    let mut out = Vec::new();
    for k in 1..=kmax {
        let v = DMatrix::from_columns(&basis);
        let av = a * &v;
        let y = av.clone().svd(true, true).solve(&b, 1e-15).unwrap();
        out.push((&b - &av * y).norm() / b.norm());
        if k == n {
            break;
        }
        let mut w = a * basis.last().unwrap();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&w);
                w -= q * c;
            }
        }
        basis.push(w.normalize());
    }
    out
}

#[test]
fn gmres_matches_dense_krylov_oracle() {
    for seed in 0..5u64 {
        let n = 30;
        let a = common::random_well_conditioned(n, 1.5, seed);
        let b = common::random_vec(n, seed + 10);
        let opts = KrylovOptions { tol: 1e-300, max_iter: n, restart: n };
        let rep = gmres_solve(&a, &b, &vec![0.0; n], &Preconditioner::identity(n), &opts).unwrap();
        let oracle = dense_gmres_residuals(&common::dense_real(&a), &b, n);
        for (k, &o) in oracle.iter().enumerate() {
            let k = k + 1;
            if o <= 1e-10 {
                break;
            }
            let (_, g) = *rep.residual_trace.iter().find(|&&(j, _)| j == k).unwrap();
            assert!((g - o).abs() <= 1e-8, "seed {seed}, k = {k}: {g} vs {o}");
        }
    }
}

#[test]
fn gmres_residual_is_monotone_within_each_cycle() {
    for seed in 0..20u64 {
        let n = 40;
        let a = common::random_diag_dominant(n, 0.3, 0.05, seed + 77);
        let b = common::random_vec(n, seed + 78);
        let p = if seed % 2 == 0 { Preconditioner::identity(n) } else { Preconditioner::ilu0(&a).unwrap() };
        let restart = 7;
        let opts = KrylovOptions { tol: 1e-10, max_iter: 200, restart };
        let rep = gmres_solve(&a, &b, &vec![0.0; n], &p, &opts).unwrap();
        // a cycle ends with the true residual recorded at the same index as
        // its last estimate; only estimates within a cycle are compared
        let mut prev: Option<(usize, f64)> = None;
        for &(k, r) in &rep.residual_trace {
            if let Some((pk, pr)) = prev {
                if k != pk {
                    assert!(r <= pr * (1.0 + 1e-12), "seed {seed}: {pr} -> {r} at {k}");
                }
            }
            prev = Some((k, r));
        }
    }
}

#[test]
fn cg_error_energy_norm_is_nonincreasing() {
    for seed in 0..10u64 {
        let n = 20 + 4 * seed as usize;
        let a = random_spd(n, seed);
        let b = common::random_vec(n, seed + 1);
        let xs = DVector::from_vec(common::dense_solve(&a, &b));
        let ad = common::dense_real(&a);
        let energy = |x: &[f64]| {
            let e = DVector::from_column_slice(x) - &xs;
            e.dot(&(&ad * &e)).sqrt()
        };
        for p in [Preconditioner::identity(n), Preconditioner::jacobi(&a).unwrap()] {
            let mut rec = IterateRecorder::default();
            let opts = KrylovOptions { tol: 1e-12, ..KrylovOptions::default() };
            let rep = cg_solve_monitored(&a, &b, &vec![0.0; n], &p, &opts, &mut rec).unwrap();
            assert!(rep.converged());
            let mut last = energy(&vec![0.0; n]);
            for (_, x) in &rec.iterates {
                let e = energy(x);
                assert!(e <= last * (1.0 + 1e-10) + 1e-14, "seed {seed}: {last} -> {e}");
                last = e;
            }
        }
    }
}

#[test]
fn cg_terminates_on_diagonal() {
    let d: Vec<f64> = (1..=10).map(|v| v as f64).collect();
    let a = CsrMatrix::from_diagonal(&d);
    let b = vec![1.0; 10];
    let opts = KrylovOptions { tol: 1e-12, ..KrylovOptions::default() };
    let rep = cg_solve(&a, &b, &[0.0; 10], &Preconditioner::identity(10), &opts).unwrap();
    assert!(rep.converged());
    assert!(rep.iterations <= 10);
}

#[test]
fn identity_takes_one_step() {
    let a = CsrMatrix::<f64>::identity(6);
    let b = common::random_vec(6, 1);
    let p = Preconditioner::identity(6);
    let o = KrylovOptions::default();
    for rep in [
        gmres_solve(&a, &b, &[0.0; 6], &p, &o).unwrap(),
        bicgstab_solve(&a, &b, &[0.0; 6], &p, &o).unwrap(),
        cg_solve(&a, &b, &[0.0; 6], &p, &o).unwrap(),
    ] {
        assert!(rep.converged());
        assert_eq!(rep.iterations, 1);
        assert!(common::rel_diff(&rep.x, &b) < 1e-15);
    }
}

#[test]
fn bicgstab_agrees_with_cg_on_laplacian() {
    let a = laplacian_2d(10);
    let b = common::random_vec(100, 3);
    let p = Preconditioner::jacobi(&a).unwrap();
    let o = KrylovOptions { tol: 1e-12, ..KrylovOptions::default() };
    let bi = bicgstab_solve(&a, &b, &vec![0.0; 100], &p, &o).unwrap();
    let cg = cg_solve(&a, &b, &vec![0.0; 100], &p, &o).unwrap();
    assert!(bi.converged() && cg.converged());
    assert!(common::rel_diff(&bi.x, &cg.x) <= 1e-8);
}

#[test]
fn all_solvers_agree_on_spd_system() {
    let tol = 1e-6;
    for seed in 0..5u64 {
        let n = 50;
        let a = random_spd(n, seed + 90);
        let b = common::random_vec(n, seed + 91);
        let x0 = vec![0.0; n];
        let p = Preconditioner::jacobi(&a).unwrap();
        let o = KrylovOptions { tol, ..KrylovOptions::default() };
        let exact = common::dense_solve(&a, &b);
        let sols = [
            gmres_solve(&a, &b, &x0, &p, &o).unwrap(),
            bicgstab_solve(&a, &b, &x0, &p, &o).unwrap(),
            cg_solve(&a, &b, &x0, &p, &o).unwrap(),
            aar_solve(&a, &b, &x0, &p, &AarOptions { tol, ..AarOptions::default() }).unwrap(),
        ];
        for s in &sols {
            assert!(s.converged());
            assert!(s.final_relative_residual() <= tol);
        }
        for i in 0..sols.len() {
            assert!(common::rel_diff(&sols[i].x, &exact) <= 10.0 * tol);
            for j in 0..i {
                assert!(common::rel_diff(&sols[i].x, &sols[j].x) <= 10.0 * tol, "seed {seed}: {i} vs {j}");
            }
        }
    }
}

#[test]
fn cg_detects_indefinite_matrix() {
    let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
    let rep = cg_solve(&a, &[1.0, 1.0], &[0.0, 0.0], &Preconditioner::identity(2), &KrylovOptions::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Breakdown("indefinite"));
}

#[test]
fn krylov_counters_reduce_at_least_once_per_iteration() {
    let a = laplacian_2d(12);
    let b = common::random_vec(144, 4);
    let p = Preconditioner::jacobi(&a).unwrap();
    let o = KrylovOptions::default();
    for rep in [
        gmres_solve(&a, &b, &vec![0.0; 144], &p, &o).unwrap(),
        bicgstab_solve(&a, &b, &vec![0.0; 144], &p, &o).unwrap(),
        cg_solve(&a, &b, &vec![0.0; 144], &p, &o).unwrap(),
    ] {
        assert!(rep.converged());
        assert!(rep.residual_norm_evals >= rep.iterations);
        assert!(rep.reductions >= rep.residual_norm_evals);
    }
}
