use super::rng::{sub_seed, trial_seed, SimRng};
use super::scenario::{Mixing, Scenario};
use crate::error::{Error, Result};
use crate::linalg::{qr_orthonormalize, solve_linear, Matrix, SymmetricMatrix};
use crate::set::MatrixSet;

const RESAMPLE_SALT: u64 = 0x5245_5341_4D50_4C45;

/// `k` diagonal matrices with i.i.d. χ²₁ entries (squared standard normals).
pub fn gen_diag_targets(rng: &mut SimRng, n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let z = rng.gaussian();
                    z * z
                })
                .collect()
        })
        .collect()
}

fn gaussian_matrix(rng: &mut SimRng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.gaussian())
}

fn general_mixing(rng: &mut SimRng, n: usize) -> Result<Matrix> {
    let mut w = gaussian_matrix(rng, n);
    for i in 0..n {
        let norm = w.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
        for j in 0..n {
            w[(i, j)] /= norm;
        }
    }
    solve_linear(&w, &Matrix::identity(n))
}

/// Mixing matrix `A`.
///
/// `General`: the inverse of a Gaussian matrix whose rows are scaled to unit
/// norm. Poor conditioning is kept on purpose. A numerically singular draw is
/// retried once on the sub-stream `sub_seed(resample_seed, ·)`.
///
/// `Orthogonal`: the `Q` factor of a Gaussian matrix.
pub fn gen_mixing(rng: &mut SimRng, n: usize, kind: Mixing, resample_seed: u64) -> Result<Matrix> {
    match kind {
        Mixing::Orthogonal => match qr_orthonormalize(&gaussian_matrix(rng, n)) {
            Ok(q) => Ok(q),
            Err(Error::RankDeficient { .. }) => {
                let mut retry = SimRng::new(sub_seed(resample_seed, RESAMPLE_SALT));
                qr_orthonormalize(&gaussian_matrix(&mut retry, n))
            }
            Err(e) => Err(e),
        },
        Mixing::General => match general_mixing(rng, n) {
            Ok(a) => Ok(a),
            Err(Error::Singular { .. }) => {
                let mut retry = SimRng::new(sub_seed(resample_seed, RESAMPLE_SALT));
                general_mixing(&mut retry, n)
            }
            Err(e) => Err(e),
        },
    }
}

/// Symmetric noise with i.i.d. `N(0, σ²)` entries on and above the diagonal.
pub fn gen_noise(rng: &mut SimRng, n: usize, sigma: f64) -> SymmetricMatrix {
    if sigma == 0.0 {
        return SymmetricMatrix::zeros(n);
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = sigma * rng.gaussian();
        }
    }
    SymmetricMatrix::from_upper(m)
}

/// `A·diag(d)·Aᵀ`, symmetric by construction.
pub fn congruent_diagonal(a: &Matrix, d: &[f64]) -> SymmetricMatrix {
    let n = a.rows();
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for (l, &dl) in d.iter().enumerate() {
                acc += a[(i, l)] * dl * a[(j, l)];
            }
            c[(i, j)] = acc;
        }
    }
    SymmetricMatrix::from_upper(c)
}

/// Everything drawn for one trial.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialSet {
    /// `{A·D_k·Aᵀ + N_k}`.
    pub set: MatrixSet,
    pub mixing: Matrix,
    pub diagonals: Vec<Vec<f64>>,
    pub seed: u64,
}

/// Draws trial `trial_index` of `scenario` from its own derived stream:
/// first `A`, then all `D_k`, then `N_k` for `k = 1..K`.
pub fn build_trial_set(scenario: &Scenario, trial_index: usize) -> Result<TrialSet> {
    scenario.validate()?;
    if trial_index >= scenario.trials {
        return Err(Error::InvalidConfig(format!(
            "trial index {trial_index} out of range for {} trials",
            scenario.trials
        )));
    }
    let seed = trial_seed(scenario.master_seed, trial_index as u64);
    let mut rng = SimRng::new(seed);
    let n = scenario.n;
    let a = gen_mixing(&mut rng, n, scenario.mixing, seed)?;
    let diagonals = gen_diag_targets(&mut rng, n, scenario.k);
    let mut matrices = Vec::with_capacity(scenario.k);
    for d in &diagonals {
        let clean = congruent_diagonal(&a, d);
        let noise = gen_noise(&mut rng, n, scenario.sigma);
        matrices.push(if scenario.sigma == 0.0 {
            clean
        } else {
            clean.add(&noise)
        });
    }
    Ok(TrialSet {
        set: MatrixSet::new(matrices)?,
        mixing: a,
        diagonals,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_square_targets() {
        let mut rng = SimRng::new(11);
        let ds = gen_diag_targets(&mut rng, 10, 10_000);
        let xs: Vec<f64> = ds.into_iter().flatten().collect();
        assert!(xs.iter().all(|&x| x >= 0.0));
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((0.97..=1.03).contains(&mean), "mean {mean}");
        assert!((1.9..=2.1).contains(&var), "var {var}");

        let again = gen_diag_targets(&mut SimRng::new(11), 10, 3);
        let first = gen_diag_targets(&mut SimRng::new(11), 10, 3);
        assert_eq!(again, first);
    }

    #[test]
    fn orthogonal_mixing_is_orthogonal() {
        let mut rng = SimRng::new(5);
        let a = gen_mixing(&mut rng, 8, Mixing::Orthogonal, 5).unwrap();
        assert!(a.tr_matmul(&a).max_abs_diff(&Matrix::identity(8)) <= 1e-10);
    }

    #[test]
    fn general_mixing_inverts_unit_rows() {
        let mut rng = SimRng::new(9);
        let a = gen_mixing(&mut rng, 8, Mixing::General, 9).unwrap();
        let w = solve_linear(&a, &Matrix::identity(8)).unwrap();
        for i in 0..8 {
            let norm = w.row(i).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() <= 1e-10, "row {i}: {norm}");
        }
        let b = gen_mixing(&mut SimRng::new(9), 8, Mixing::General, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noise_statistics() {
        assert_eq!(gen_noise(&mut SimRng::new(1), 4, 0.0), SymmetricMatrix::zeros(4));
        let mut rng = SimRng::new(2);
        let mut xs = Vec::new();
        while xs.len() < 100_000 {
            let m = gen_noise(&mut rng, 20, 0.03);
            for i in 0..20 {
                for j in i..20 {
                    assert_eq!(m[(i, j)], m[(j, i)]);
                    xs.push(m[(i, j)]);
                }
            }
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((0.0297..=0.0303).contains(&sd), "sd {sd}");
    }
}
