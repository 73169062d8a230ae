mod common;

use ajd_core::linalg::{sym_eig, JACOBI_REL_TOL};
use ajd_core::sdiag::{
    compute_m, compute_m_n, energy_balance, gamma_criterion, normalize_columns, off_criterion, optimal_directions,
    sdiag_run, sdiag_step, sphering, stationarity_residual, theorem_diagnostics, EigStrategy, Init, SdiagConfig,
};
use ajd_core::simkit::{performance_index, Mixing, SimRng};
use ajd_core::{Matrix, MatrixSet, SymmetricMatrix};
use common::{exact_set, random_matrix, random_set, subspace_gap};
use proptest::prelude::*;

fn set_of(ms: &[&[&[f64]]]) -> MatrixSet {
    MatrixSet::new(ms.iter().map(|m| SymmetricMatrix::from_rows(m)).collect()).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gamma_equals_off(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=8, cols in 1usize..=6) {
        let mut rng = SimRng::new(seed);
        let c = random_set(&mut rng, n, k);
        let b = random_matrix(&mut rng, n, cols);
        let off = off_criterion(&c, &b).unwrap();
        let gamma = gamma_criterion(&c, &b).unwrap();
        prop_assert!((off - gamma).abs() <= 1e-9 * off.abs().max(1e-300) + 1e-13 * gamma.abs(), "{} vs {}", off, gamma);
    }

    #[test]
    fn m_is_sum_of_m_n(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=8) {
        let mut rng = SimRng::new(seed);
        let c = random_set(&mut rng, n, k);
        let b = random_matrix(&mut rng, n, n);
        let direct = compute_m(&c, &b).unwrap();
        let mut summed = SymmetricMatrix::zeros(n);
        for j in 0..n {
            summed = summed.add(&compute_m_n(&c, &b.column(j)).unwrap());
        }
        let scale = direct.max_abs().max(1e-300);
        prop_assert!(direct.max_abs_diff(&summed) <= 1e-10 * scale);
    }

    #[test]
    fn whitened_traces_sum_to_rank(seed in any::<u64>(), n in 2usize..=8, k in 1usize..=10) {
        let mut rng = SimRng::new(seed);
        let c = random_set(&mut rng, n, k);
        let b = random_matrix(&mut rng, n, n);
        let step = sdiag_step(&c, &b, &SdiagConfig::default()).unwrap();
        prop_assert!(rel_close(step.trace_sum, step.rank as f64, 1e-8));
        // Recomputed from the returned H, independently of the step's own bookkeeping.
        let d = theorem_diagnostics(&step.h, &c, &b, &step.u).unwrap();
        prop_assert!(rel_close(d.trace_sum, step.rank as f64, 1e-8), "{} vs {}", d.trace_sum, step.rank);
    }

    #[test]
    fn sphering_whitens_m(seed in any::<u64>(), n in 2usize..=8, k in 1usize..=10) {
        let mut rng = SimRng::new(seed);
        let c = random_set(&mut rng, n, k);
        let m = compute_m(&c, &random_matrix(&mut rng, n, n)).unwrap();
        let sph = sphering(&m, 1e12).unwrap();
        // VᵀMV keeps the Jacobi stopping residual (≤ JACOBI_REL_TOL·‖M‖_F) and
        // M itself is formed in floating point; whitening divides both by λ_R.
        let cond = sph.eigenvalues[0] / sph.eigenvalues[sph.rank - 1];
        let defect = m.congruence(&sph.h).max_abs_diff(&Matrix::identity(sph.rank));
        let bound = (JACOBI_REL_TOL * (n as f64).sqrt() + 64.0 * f64::EPSILON) * cond;
        prop_assert!(defect <= bound, "{} at condition {:e}", defect, cond);
    }
}

#[test]
fn sphering_examples() {
    let s = sphering(&SymmetricMatrix::identity(3), 100.0).unwrap();
    assert_eq!(s.rank, 3);
    assert!(s.h.max_abs_diff(&Matrix::identity(3)) <= 1e-15);

    let m = SymmetricMatrix::from_diag(&[4.0, 1.0]);
    let s = sphering(&m, 100.0).unwrap();
    assert_eq!(s.rank, 2);
    assert!(s.h.max_abs_diff(&Matrix::from_diag(&[0.5, 1.0])) <= 1e-15);
    assert!(m.congruence(&s.h).max_abs_diff(&Matrix::identity(2)) <= 1e-14);

    let s = sphering(&SymmetricMatrix::from_diag(&[1.0, 1e-6]), 100.0).unwrap();
    assert_eq!(s.rank, 1);
    assert_eq!(s.h, Matrix::from_rows(&[&[1.0], &[0.0]]));
}

#[test]
fn directions_on_diagonal_pair() {
    let c = set_of(&[&[&[1.0, 0.0], &[0.0, 2.0]], &[&[3.0, 0.0], &[0.0, 1.0]]]);
    let cfg = SdiagConfig::default();
    let b = Matrix::identity(2);
    let m = compute_m(&c, &b).unwrap();
    assert_eq!(m.as_matrix(), &Matrix::from_diag(&[10.0, 5.0]));
    let sph = sphering(&m, 100.0).unwrap();
    for strategy in [EigStrategy::FullEig, EigStrategy::PowerPasses] {
        let cfg = SdiagConfig {
            eig_strategy: strategy,
            ..cfg.clone()
        };
        let d = optimal_directions(&sph.h, &c, &b, &cfg).unwrap();
        assert!(d.u.max_abs_diff(&Matrix::identity(2)) <= 1e-12, "{strategy:?}");
    }
    assert!(stationarity_residual(&c, &b).unwrap() <= 1e-12);
}

#[test]
fn directions_with_single_rank() {
    let c = set_of(&[&[&[1.0, 0.0], &[0.0, 1e-4]]]);
    let b = Matrix::identity(2);
    let sph = sphering(&compute_m(&c, &b).unwrap(), 100.0).unwrap();
    assert_eq!(sph.rank, 1);
    let d = optimal_directions(&sph.h, &c, &b, &SdiagConfig::default()).unwrap();
    assert_eq!(d.u.shape(), (1, 1));
    assert!((d.u[(0, 0)] - 1.0).abs() <= 1e-15);
    assert_eq!(d.selected, vec![0]);
}

fn true_demixer(c: &MatrixSet, a: &Matrix) -> Matrix {
    // B = A⁻ᵀ gives BᵀC_kB = D_k
    let inv_t = ajd_core::linalg::inverse(&a.transpose()).unwrap();
    normalize_columns(c, &inv_t).unwrap()
}

#[test]
fn exact_solution_is_rank_one_in_whitened_space() {
    let mut rng = SimRng::new(21);
    let (c, a) = exact_set(&mut rng, 5, 10, Mixing::General);
    let b = true_demixer(&c, &a);
    let sph = sphering(&compute_m(&c, &b).unwrap(), 1e12).unwrap();
    let cfg = SdiagConfig {
        eig_strategy: EigStrategy::PowerPasses,
        power_pass_cap: 2,
        ..SdiagConfig::default()
    };
    let d = optimal_directions(&sph.h, &c, &b, &cfg).unwrap();
    assert_eq!(d.power_fallbacks, 0);
    for &l in &d.top_eigenvalues {
        assert!((l - 1.0).abs() <= 1e-6, "{l}");
    }
}

#[test]
fn exact_solution_is_a_fixed_point() {
    let mut rng = SimRng::new(3);
    for mixing in [Mixing::Orthogonal, Mixing::General] {
        let (c, a) = exact_set(&mut rng, 6, 12, mixing);
        let b = true_demixer(&c, &a);
        let energy = c.total_energy();
        assert!(off_criterion(&c, &b).unwrap() <= 1e-12 * energy);
        let step = sdiag_step(&c, &b, &SdiagConfig::default()).unwrap();
        assert!(off_criterion(&c, &step.b_next).unwrap() <= 1e-12 * energy);
        assert!(subspace_gap(&b, &step.b_next) <= 1e-6);
        assert!(performance_index(&step.b_next.tr_matmul(&a)).unwrap() >= 1.0 - 1e-9);
    }
}

#[test]
fn diagonal_family_stays_diagonal() {
    let c = set_of(&[
        &[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 0.5]],
        &[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 4.0]],
        &[&[0.2, 0.0, 0.0], &[0.0, 1.5, 0.0], &[0.0, 0.0, 1.0]],
    ]);
    let step = sdiag_step(&c, &Matrix::identity(3), &SdiagConfig::default()).unwrap();
    assert_eq!(off_criterion(&c, &step.b_next).unwrap(), 0.0);
    assert_eq!(off_norm(&step.b_next), 0.0);

    let report = sdiag_run(&c, &SdiagConfig::default()).unwrap();
    let d = &report.diagonalizer;
    assert!(d.converged);
    assert!(d.iterations_run <= 2);
    assert_eq!(d.final_off, 0.0);
    assert_eq!(performance_index(&d.b).unwrap(), 1.0);
}

fn off_norm(b: &Matrix) -> f64 {
    ajd_core::linalg::off_norm2(b)
}

#[test]
fn exact_recovery_and_convergence_diagnostics() {
    for seed in 0..5 {
        let mut rng = SimRng::new(100 + seed);
        let (c, a) = exact_set(&mut rng, 5, 10, Mixing::General);
        let report = sdiag_run(&c, &SdiagConfig::default()).unwrap();
        let d = &report.diagonalizer;
        assert!(d.converged, "seed {seed}");
        assert!(d.iterations_run <= 1000);
        assert!(
            performance_index(&d.b.tr_matmul(&a)).unwrap() >= 1.0 - 1e-6,
            "seed {seed}"
        );
        assert!(d.final_off <= 1e-10 * c.total_energy(), "seed {seed}: {}", d.final_off);

        assert!(report.u_orthogonality_final <= 1e-6);
        assert!(report.top_eigs_final.iter().all(|l| (l - 1.0).abs() <= 1e-6));
        assert!(report.second_eigs_final.iter().all(|&l| l <= 1e-6));
        assert!(report.stationarity_residual_final <= 1e-6);
        for (t, r) in report.trace_sum_per_iter.iter().zip(&report.rank_per_iter) {
            assert!(rel_close(*t, *r as f64, 1e-8));
        }

        let bal = energy_balance(&c, &d.b).unwrap();
        assert!(bal.off_max <= 1e-8 && bal.max_deviation <= 1e-8, "{bal:?}");
        for j in 0..d.b.cols() {
            let e: f64 = c
                .iter()
                .map(|ck| ck.bilinear(&d.b.column(j), &d.b.column(j)).powi(2))
                .sum();
            assert!((e - 1.0).abs() <= 1e-8);
        }
    }
}

#[test]
fn scaled_and_permuted_solution_still_diagonalizes() {
    let mut rng = SimRng::new(8);
    let (c, _) = exact_set(&mut rng, 4, 8, Mixing::General);
    let b = sdiag_run(&c, &SdiagConfig::default()).unwrap().diagonalizer.b;
    let perm = [2usize, 0, 3, 1];
    let scales = [-3.0, 0.25, 7.0, -1.0];
    let transformed = Matrix::from_fn(4, 4, |i, j| b[(i, perm[j])] * scales[j]);
    let renorm = normalize_columns(&c, &transformed).unwrap();
    assert!(off_criterion(&c, &renorm).unwrap() <= 1e-10 * c.total_energy());
}

#[test]
fn rank_deficient_sets_keep_full_column_rank() {
    // every C_k lives on a 3-dimensional subspace of R^5
    let mut rng = SimRng::new(13);
    let basis = random_matrix(&mut rng, 5, 3);
    let mats: Vec<SymmetricMatrix> = (0..6)
        .map(|_| {
            let d: Vec<f64> = (0..3).map(|_| rng.gaussian().powi(2)).collect();
            ajd_core::simkit::congruent_diagonal(&basis, &d)
        })
        .collect();
    let c = MatrixSet::new(mats).unwrap();
    let report = sdiag_run(&c, &SdiagConfig::default()).unwrap();
    let b = &report.diagonalizer.b;
    assert!(b.cols() >= 1 && b.cols() <= 5);
    assert_eq!(report.diagonalizer.rank, b.cols());
    let e = sym_eig(&SymmetricMatrix::symmetrize(b.tr_matmul(b))).unwrap();
    let (hi, lo) = (e.values[0], *e.values.last().unwrap());
    assert!(lo > 1e-10 * hi, "singular values {:?}", e.values);
}

#[test]
fn parallel_matches_sequential_bitwise() {
    let mut rng = SimRng::new(44);
    let (c, _) = exact_set(&mut rng, 8, 12, Mixing::General);
    let noisy = MatrixSet::new(
        c.iter()
            .map(|m| m.add(&SymmetricMatrix::symmetrize(random_matrix(&mut rng, 8, 8).scale(0.01))))
            .collect(),
    )
    .unwrap();
    let seq = sdiag_run(&noisy, &SdiagConfig::default()).unwrap();
    let par = sdiag_run(
        &noisy,
        &SdiagConfig {
            parallel: true,
            ..SdiagConfig::default()
        },
    )
    .unwrap();
    assert_eq!(seq, par);
}

#[test]
fn power_strategy_agrees_with_full_eig() {
    let mut rng = SimRng::new(71);
    for _ in 0..3 {
        let (c, a) = exact_set(&mut rng, 6, 15, Mixing::General);
        let full = sdiag_run(&c, &SdiagConfig::default()).unwrap();
        let cfg = SdiagConfig {
            eig_strategy: EigStrategy::PowerPasses,
            ..SdiagConfig::default()
        };
        let power = sdiag_run(&c, &cfg).unwrap();
        let pf = performance_index(&full.diagonalizer.b.tr_matmul(&a)).unwrap();
        let pp = performance_index(&power.diagonalizer.b.tr_matmul(&a)).unwrap();
        assert!(pf >= 1.0 - 1e-6 && pp >= 1.0 - 1e-6, "{pf} {pp}");
    }
}

#[test]
fn user_init_is_accepted_and_validated() {
    let mut rng = SimRng::new(5);
    let (c, a) = exact_set(&mut rng, 4, 6, Mixing::General);
    let init = random_matrix(&mut rng, 4, 4);
    let cfg = SdiagConfig {
        init: Init::Matrix(init),
        ..SdiagConfig::default()
    };
    let r = sdiag_run(&c, &cfg).unwrap();
    assert!(performance_index(&r.diagonalizer.b.tr_matmul(&a)).unwrap() >= 1.0 - 1e-6);

    let bad = SdiagConfig {
        init: Init::Matrix(Matrix::identity(3)),
        ..SdiagConfig::default()
    };
    assert!(sdiag_run(&c, &bad).is_err());
    let singular = SdiagConfig {
        init: Init::Matrix(Matrix::zeros(4, 4)),
        ..SdiagConfig::default()
    };
    assert!(sdiag_run(&c, &singular).is_err());
}

#[test]
fn small_k_is_flagged() {
    let c = set_of(&[&[&[2.0, 1.0], &[1.0, 3.0]], &[&[1.0, 0.0], &[0.0, 4.0]]]);
    let r = sdiag_run(&c, &SdiagConfig::default()).unwrap();
    assert_eq!(r.warnings.len(), 1);
    // two matrices are always exactly jointly diagonalizable (generalized eigenproblem)
    assert!(r.diagonalizer.final_off <= 1e-10 * c.total_energy());
}

#[test]
fn zero_set_is_degenerate() {
    let c = MatrixSet::new(vec![SymmetricMatrix::zeros(3); 4]).unwrap();
    assert!(sdiag_run(&c, &SdiagConfig::default()).unwrap_err().is_degenerate_data());
}
