//! Orthogonal joint diagonalization by cyclic Givens rotations.
//!
//! Every rotation acts in one coordinate plane `(i, j)` and uses the angle
//! that minimizes the off-criterion over that plane, so the criterion never
//! increases. The demixing matrix stays orthogonal, which is exactly what
//! prevents it from inverting a non-orthogonal mixing.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::linalg::{off_norm2, Matrix};
use crate::set::MatrixSet;

#[derive(Clone, Debug, PartialEq)]
pub struct OjdConfig {
    pub max_sweeps: usize,
    /// Rotations with `|θ|` at or below this are skipped; a sweep without any
    /// rotation ends the run.
    pub angle_tol: f64,
}

impl Default for OjdConfig {
    fn default() -> Self {
        OjdConfig {
            max_sweeps: 100,
            angle_tol: 1e-12,
        }
    }
}

impl OjdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be at least 1".into()));
        }
        if !(self.angle_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "angle_tol must be positive, got {}",
                self.angle_tol
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OjdResult {
    /// Orthogonal `N×N` demixing matrix.
    pub b: Matrix,
    pub sweeps_used: usize,
    pub final_off: f64,
    pub converged: bool,
    /// Off-criterion after each sweep.
    pub off_history: Vec<f64>,
    pub rotations: usize,
    /// Largest increase of the off-criterion caused by a single rotation
    /// (0 when every rotation descended).
    pub max_rotation_increase: f64,
}

/// Angle of the plane rotation `(i, j)` minimizing the joint off-criterion.
///
/// With `p_k = C_k[i,i] − C_k[j,j]` and `q_k = 2·C_k[i,j]`,
/// `θ = ¼·atan2(2·Σ p_k q_k, Σ (p_k² − q_k²))`, in `(−π/4, π/4]`.
pub fn givens_angle(c: &MatrixSet, i: usize, j: usize) -> f64 {
    let mats: Vec<&Matrix> = c.iter().map(|m| m.as_matrix()).collect();
    angle_of(&mats, i, j)
}

fn angle_of<M: AsRef<Matrix>>(mats: &[M], i: usize, j: usize) -> f64 {
    assert_ne!(i, j, "givens_angle: i and j must differ");
    let mut num = 0.0;
    let mut den = 0.0;
    for m in mats {
        let m = m.as_ref();
        let p = m[(i, i)] - m[(j, j)];
        let q = 2.0 * m[(i, j)];
        num += p * q;
        den += p * p - q * q;
    }
    // atan2(-0, x<0) is −π; fold it onto +π to stay in (−π/4, π/4].
    let num = if num == 0.0 { 0.0 } else { 2.0 * num };
    let theta = 0.25 * num.atan2(den);
    if theta <= -FRAC_PI_4 {
        FRAC_PI_4
    } else {
        theta
    }
}

impl AsRef<Matrix> for Matrix {
    fn as_ref(&self) -> &Matrix {
        self
    }
}

/// Applies `A ← RᵀAR` to every matrix, where `R` is the identity except for
/// `R[i,i] = R[j,j] = cos θ`, `R[j,i] = sin θ`, `R[i,j] = −sin θ`.
/// Returns `Σ_k` of the squared `(i, j)` entries before and after.
pub fn rotate_set(mats: &mut [Matrix], i: usize, j: usize, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let mut before = 0.0;
    let mut after = 0.0;
    for a in mats.iter_mut() {
        let n = a.rows();
        let aii = a[(i, i)];
        let ajj = a[(j, j)];
        let aij = a[(i, j)];
        before += aij * aij;
        for k in 0..n {
            if k == i || k == j {
                continue;
            }
            let aki = a[(k, i)];
            let akj = a[(k, j)];
            let new_i = c * aki + s * akj;
            let new_j = c * akj - s * aki;
            a[(k, i)] = new_i;
            a[(i, k)] = new_i;
            a[(k, j)] = new_j;
            a[(j, k)] = new_j;
        }
        let cs = c * s;
        a[(i, i)] = c * c * aii + 2.0 * cs * aij + s * s * ajj;
        a[(j, j)] = s * s * aii - 2.0 * cs * aij + c * c * ajj;
        let new_ij = cs * (ajj - aii) + (c * c - s * s) * aij;
        a[(i, j)] = new_ij;
        a[(j, i)] = new_ij;
        after += new_ij * new_ij;
    }
    (before, after)
}

fn rotate_columns(b: &mut Matrix, i: usize, j: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    for k in 0..b.rows() {
        let bi = b[(k, i)];
        let bj = b[(k, j)];
        b[(k, i)] = c * bi + s * bj;
        b[(k, j)] = c * bj - s * bi;
    }
}

/// Cyclic sweeps over all pairs `i < j` in lexicographic order until a full
/// sweep applies no rotation or `max_sweeps` is exhausted.
pub fn ojd_run(c: &MatrixSet, cfg: &OjdConfig) -> Result<OjdResult> {
    cfg.validate()?;
    let n = c.n();
    let mut mats: Vec<Matrix> = c.iter().map(|m| m.as_matrix().clone()).collect();
    let mut b = Matrix::identity(n);
    let mut off_history = Vec::new();
    let mut rotations = 0;
    let mut max_rotation_increase: f64 = 0.0;
    let mut converged = false;
    let mut sweeps_used = 0;

    while sweeps_used < cfg.max_sweeps {
        sweeps_used += 1;
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let theta = angle_of(&mats, i, j);
                if theta.abs() <= cfg.angle_tol {
                    continue;
                }
                let (before, after) = rotate_set(&mut mats, i, j, theta);
                // only the (i, j) pair changes the off-criterion
                max_rotation_increase = max_rotation_increase.max(2.0 * (after - before));
                rotate_columns(&mut b, i, j, theta);
                rotations += 1;
                rotated = true;
            }
        }
        let off: f64 = mats.iter().map(off_norm2).sum();
        if !off.is_finite() {
            return Err(Error::NonFiniteIterate { iteration: sweeps_used });
        }
        off_history.push(off);
        if !rotated {
            converged = true;
            break;
        }
    }

    Ok(OjdResult {
        b,
        sweeps_used,
        final_off: *off_history.last().expect("at least one sweep"),
        converged,
        off_history,
        rotations,
        max_rotation_increase,
    })
}
