mod common;

use aar_core::aar::{AndersonHistory, ProjectionAudit};
use aar_core::solve::{AndersonStep, IterateRecorder, Monitor};
use aar_core::{
    aar_solve, aar_solve_monitored, anderson_gamma, gmres_solve, richardson_solve_monitored, AarOptions,
    CsrMatrix, KrylovOptions, Preconditioner, SolveStatus, C64,
};
use nalgebra::{DMatrix, DVector};

/// Records audits, window sizes and projected residual norms at every
/// Anderson step.
#[derive(Default)]
struct Auditor {
    audits: Vec<ProjectionAudit>,
    windows: Vec<(usize, usize)>,
    projected: Vec<(usize, f64)>,
}

impl<T: aar_core::Scalar> Monitor<T> for Auditor {
    fn on_anderson(&mut self, step: &AndersonStep<'_, T>) {
        let cols: Vec<&[T]> = step.history.df_columns().collect();
        let audit = ProjectionAudit::compute(&cols, step.f, step.gamma);
        self.windows.push((step.iteration, step.history.len()));
        self.projected.push((step.iteration, audit.projected_norm));
        self.audits.push(audit);
    }
}

#[test]
fn converges_to_dense_lu_solution() {
    let n = 30;
    let a = common::random_diag_dominant(n, 0.3, 0.5, 11);
    let b = common::random_vec(n, 12);
    let p = Preconditioner::jacobi(&a).unwrap();
    let rep = aar_solve(&a, &b, &vec![0.0; n], &p, &AarOptions::default()).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert!(rep.final_relative_residual() <= 1e-6);

    let oracle = common::dense_solve(&a, &b);
    let sv = common::dense_real(&a).singular_values();
    let kappa = sv.max() / sv.min();
    assert!(common::rel_diff(&rep.x, &oracle) <= 1e-6 * kappa);
}

#[test]
fn gamma_matches_least_squares_oracle() {
    for seed in 0..20 {
        let n = 20;
        let cols: Vec<Vec<f64>> = (0..3).map(|j| common::random_vec(n, 100 * seed + j)).collect();
        let f = common::random_vec(n, 100 * seed + 50);
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let gamma = anderson_gamma(&refs, &f, 1e-14).unwrap();

        let fm = DMatrix::from_fn(n, 3, |i, j| cols[j][i]);
        let oracle = fm.svd(true, true).solve(&DVector::from_column_slice(&f), 1e-14).unwrap();
        let oracle: Vec<f64> = oracle.iter().copied().collect();
        assert!(common::rel_diff(&gamma, &oracle) <= 1e-10, "seed {seed}");
    }
}

#[test]
fn complex_gamma_matches_least_squares_oracle() {
    let n = 20;
    let cols: Vec<Vec<C64>> = (0..3).map(|j| common::random_cvec(n, 300 + j)).collect();
    let f = common::random_cvec(n, 399);
    let refs: Vec<&[C64]> = cols.iter().map(|c| c.as_slice()).collect();
    let gamma = anderson_gamma(&refs, &f, 1e-14).unwrap();
    let fm = DMatrix::from_fn(n, 3, |i, j| cols[j][i]);
    let oracle = fm.svd(true, true).solve(&DVector::from_column_slice(&f), 1e-14).unwrap();
    let oracle: Vec<C64> = oracle.iter().copied().collect();
    assert!(common::rel_diff(&gamma, &oracle) <= 1e-10);
}

#[test]
fn gamma_trivial_cases() {
    let d = [1.0, -2.0, 0.5];
    let f = [2.0, -4.0, 1.0];
    let g = anderson_gamma(&[&d], &f, 1e-14).unwrap();
    assert!((g[0] - 2.0).abs() < 1e-15);

    let c1 = [1.0, 0.0, 0.0];
    let c2 = [0.0, 1.0, 0.0];
    let g = anderson_gamma(&[&c1, &c2], &[0.0, 0.0, 3.0], 1e-14).unwrap();
    assert_eq!(g, vec![0.0, 0.0]);

    let z = [0.0; 3];
    assert_eq!(anderson_gamma(&[&z], &f, 1e-14).unwrap(), vec![0.0]);
}

#[test]
fn richardson_limit_is_bitwise_on_random_systems() {
    for seed in 0..100u64 {
        let n = 2 + (seed as usize * 7) % 49;
        let a = common::random_diag_dominant(n, 0.2, 0.5, seed);
        let b = common::random_vec(n, seed + 1000);
        let x0 = common::random_vec(n, seed + 2000);
        let p = Preconditioner::jacobi(&a).unwrap();
        let max_iter = 40;
        let opts = AarOptions { p: max_iter + 1, max_iter, tol: 1e-300, ..AarOptions::default() };

        let mut ra = IterateRecorder::default();
        let mut rr = IterateRecorder::default();
        aar_solve_monitored(&a, &b, &x0, &p, &opts, &mut ra).unwrap();
        richardson_solve_monitored(&a, &b, &x0, &p, 0.6, 1e-300, max_iter, max_iter + 1, &mut rr).unwrap();
        assert_eq!(ra.iterates.len(), max_iter);
        assert_eq!(ra.iterates, rr.iterates, "seed {seed}");
    }
}

#[test]
fn jacobi_scaling_invariance() {
    let n = 40;
    let a = common::random_diag_dominant(n, 0.2, 1.0, 5);
    let b = common::random_vec(n, 6);
    let opts = AarOptions { tol: 1e-12, ..AarOptions::default() };
    let run = |c: f64| {
        let ac = a.map(|v| c * v);
        let bc: Vec<f64> = b.iter().map(|v| c * v).collect();
        let p = Preconditioner::jacobi(&ac).unwrap();
        let mut rec = IterateRecorder::default();
        let rep = aar_solve_monitored(&ac, &bc, &vec![0.0; n], &p, &opts, &mut rec).unwrap();
        (rep, rec.iterates)
    };
    let (base, base_it) = run(1.0);
    for c in [1e-3, 1e3] {
        let (rep, it) = run(c);
        assert_eq!(rep.residual_trace.len(), base.residual_trace.len());
        for (&(k, _), &(k2, _)) in base.residual_trace.iter().zip(&rep.residual_trace) {
            assert_eq!(k, k2);
            if k == 0 {
                continue;
            }
            let xa = &base_it[k - 1].1;
            let xb = &it[k - 1].1;
            assert!(common::rel_diff(xb, xa) <= 1e-13, "c = {c}, k = {k}: {}", common::rel_diff(xb, xa));
        }
    }
}

#[test]
fn history_window_is_min_m_k() {
    let n = 25;
    let a = common::random_diag_dominant(n, 0.3, 0.5, 8);
    let b = common::random_vec(n, 9);
    let p = Preconditioner::jacobi(&a).unwrap();
    for (m, period) in [(3, 1), (9, 8), (5, 2)] {
        let opts = AarOptions { m, p: period, tol: 1e-300, max_iter: 60, ..AarOptions::default() };
        let mut aud = Auditor::default();
        aar_solve_monitored(&a, &b, &vec![0.0; n], &p, &opts, &mut aud).unwrap();
        assert!(!aud.windows.is_empty());
        for &(k, len) in &aud.windows {
            assert_eq!(len, m.min(k), "m = {m}, p = {period}");
        }
    }

    let mut h = AndersonHistory::new(2);
    let (mut xp, mut fp) = (vec![0.0], vec![0.0]);
    for k in 1..5 {
        h.push_difference(&[k as f64], &mut xp, &[-(k as f64)], &mut fp);
        assert_eq!(h.len(), 2.min(k));
    }
    assert_eq!(h.dx_columns().collect::<Vec<_>>(), vec![&[1.0][..], &[1.0][..]]);
}

#[test]
fn trace_respects_check_economy() {
    let n = 30;
    let a = common::random_diag_dominant(n, 0.3, 0.1, 21);
    let b = common::random_vec(n, 22);
    for (period, max_iter) in [(8, 50), (3, 17), (1, 9), (8, 7)] {
        let opts = AarOptions { p: period, max_iter, tol: 1e-300, ..AarOptions::default() };
        let rep = aar_solve(&a, &b, &vec![0.0; n], &Preconditioner::identity(n), &opts).unwrap();
        assert!(rep.residual_trace.len() <= max_iter.div_ceil(period) + 1);
        let (last, body) = rep.residual_trace.split_last().unwrap();
        for w in rep.residual_trace.windows(2) {
            assert!(w[0].0 < w[1].0);
        }
        for &(k, _) in body {
            assert_eq!(k % period, period - 1);
        }
        assert_eq!(last.0, rep.iterations);
    }
}

fn audit_all(aud: &Auditor, rcond: f64) {
    for a in &aud.audits {
        assert!(a.is_non_expansive(), "{a:?}");
        assert!(a.normal_equations_hold(rcond), "{a:?}");
    }
}

#[test]
fn projection_is_optimal_at_every_step() {
    let mut steps = 0;
    for seed in 0..30u64 {
        let n = 10 + seed as usize;
        let a = common::random_diag_dominant(n, 0.25, 0.2, seed + 500);
        let b = common::random_vec(n, seed + 600);
        let p = Preconditioner::ilu0(&a).unwrap();
        let opts = AarOptions { p: 1 + seed as usize % 8, tol: 1e-12, ..AarOptions::default() };
        let mut aud = Auditor::default();
        aar_solve_monitored(&a, &b, &vec![1.0; n], &p, &opts, &mut aud).unwrap();
        audit_all(&aud, opts.rcond);
        steps += aud.audits.len();

        let bc: Vec<C64> = common::random_cvec(n, seed + 700);
        let ac = a.map(|v| C64::new(v, 0.1 * v));
        let pc = Preconditioner::jacobi(&ac).unwrap();
        let opts = AarOptions::<C64> { tol: 1e-12, ..AarOptions::default() };
        let mut aud = Auditor::default();
        aar_solve_monitored(&ac, &bc, &vec![C64::new(0.0, 0.0); n], &pc, &opts, &mut aud).unwrap();
        audit_all(&aud, opts.rcond);
        steps += aud.audits.len();
    }
    assert!(steps > 100);
}

#[test]
fn anderson_with_p1_tracks_full_gmres() {
    for seed in 0..50u64 {
        let n = 5 + (seed as usize % 26);
        let a = common::random_well_conditioned(n, 0.9, seed + 40);
        let b = common::random_vec(n, seed + 41);
        let x0 = vec![0.0; n];
        let id = Preconditioner::identity(n);
        let b_norm = common::norm(&b);

        let opts = AarOptions { p: 1, m: n, tol: 1e-300, max_iter: n, omega: 1.0, beta: 1.0, ..AarOptions::default() };
        let mut aud = Auditor::default();
        aar_solve_monitored(&a, &b, &x0, &id, &opts, &mut aud).unwrap();

        let kopts = KrylovOptions { tol: 1e-300, max_iter: n, restart: n };
        let g = gmres_solve(&a, &b, &x0, &id, &kopts).unwrap();

        let mut compared = 0;
        for &(k, proj) in aud.projected.iter().skip(1) {
            let ar = proj / b_norm;
            let Some(&(_, gm)) = g.residual_trace.iter().find(|&&(j, _)| j == k) else { continue };
            if ar <= 1e-10 || gm <= 1e-10 {
                break;
            }
            assert!((ar - gm).abs() <= 1e-6, "seed {seed}, k = {k}: {ar} vs {gm}");
            compared += 1;
        }
        assert!(compared >= 1, "seed {seed}");
    }
}

#[test]
fn zero_rhs_and_identity_edge_cases() {
    let a = CsrMatrix::<f64>::identity(4);
    let p = Preconditioner::identity(4);
    let rep = aar_solve(&a, &[0.0; 4], &[1.0; 4], &p, &AarOptions::default()).unwrap();
    assert_eq!(rep.x, vec![0.0; 4]);
    assert!(rep.converged());

    let b = [1.0, -2.0, 3.0, 0.5];
    let opts = AarOptions { omega: 1.0, ..AarOptions::default() };
    let rep = aar_solve(&a, &b, &[0.0; 4], &p, &opts).unwrap();
    assert!(rep.converged());
    assert_eq!(rep.x, b.to_vec());
}
