#![allow(dead_code)]

use ajd_core::simkit::{congruent_diagonal, gen_mixing, Mixing, SimRng};
use ajd_core::{Matrix, MatrixSet, SymmetricMatrix};

pub fn random_matrix(rng: &mut SimRng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gaussian())
}

pub fn random_symmetric(rng: &mut SimRng, n: usize) -> SymmetricMatrix {
    SymmetricMatrix::symmetrize(random_matrix(rng, n, n))
}

pub fn random_set(rng: &mut SimRng, n: usize, k: usize) -> MatrixSet {
    MatrixSet::new((0..k).map(|_| random_symmetric(rng, n)).collect()).unwrap()
}

/// Noiseless `{A·D_k·Aᵀ}` with χ²₁ diagonals, plus the mixing `A`.
pub fn exact_set(rng: &mut SimRng, n: usize, k: usize, mixing: Mixing) -> (MatrixSet, Matrix) {
    let a = gen_mixing(rng, n, mixing, 0).unwrap();
    let mats = (0..k)
        .map(|_| {
            let d: Vec<f64> = (0..n).map(|_| rng.gaussian().powi(2)).collect();
            congruent_diagonal(&a, &d)
        })
        .collect();
    (MatrixSet::new(mats).unwrap(), a)
}

/// Orthonormal basis of the column space of a full-column-rank matrix.
pub fn orthonormal_columns(a: &Matrix) -> Matrix {
    let mut q: Vec<Vec<f64>> = Vec::new();
    for j in 0..a.cols() {
        let mut v = a.column(j);
        for _ in 0..2 {
            for qi in &q {
                let r: f64 = qi.iter().zip(&v).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(qi).for_each(|(x, y)| *x -= r * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        q.push(v.into_iter().map(|x| x / norm).collect());
    }
    Matrix::from_columns(&q)
}

/// Largest sine of the principal angles between the column spaces.
pub fn subspace_gap(a: &Matrix, b: &Matrix) -> f64 {
    let qa = orthonormal_columns(a);
    let qb = orthonormal_columns(b);
    let mut worst: f64 = 0.0;
    for j in 0..qa.cols() {
        let p = qb.tr_matvec(&qa.column(j));
        let captured: f64 = p.iter().map(|x| x * x).sum();
        worst = worst.max((1.0 - captured).max(0.0).sqrt());
    }
    worst
}
