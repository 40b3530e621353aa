//! Closed-form eigen decomposition of real 3×3 matrices.
//!
//! Eigenvalues come from the characteristic cubic (Cardano when it has one
//! real root, the trigonometric form when it has three) and are polished by
//! Newton iterations on the same cubic. Eigenvectors are extracted as the
//! null vector of `A - λI` from cross products of its rows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Matrix3, Vec3};

pub type CVec3 = [Complex64; 3];

/// Relative separation below which two eigenvalues count as repeated.
pub const REPEATED_TOL: f64 = 1e-9;
pub const NEWTON_MAX_ITERS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("repeated eigenvalue {0}")]
    RepeatedEigenvalue(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Spectrum {
    /// One real eigenvalue and a complex-conjugate pair.
    SaddleFocus,
    AllReal,
}

/// Eigenvalues with matching unit right and left eigenvectors.
///
/// With one real root the order is `[γ, c, conj(c)]` where `Im c > 0`;
/// with three real roots they are ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub spectrum: Spectrum,
    pub eigenvalues: [Complex64; 3],
    pub right: [CVec3; 3],
    pub left: [CVec3; 3],
}

/// Coefficients `(a, b, c)` of `λ³ + aλ² + bλ + c = det(λI - A)`.
pub fn characteristic_coefficients(m: &Matrix3) -> [f64; 3] {
    [-m.trace(), m.principal_minor_sum(), -m.determinant()]
}

fn cubic(coef: [f64; 3], z: Complex64) -> (Complex64, Complex64) {
    let [a, b, c] = coef;
    let f = ((z + a) * z + b) * z + c;
    let df = (3.0 * z + 2.0 * a) * z + b;
    (f, df)
}

fn polish(coef: [f64; 3], mut z: Complex64) -> Complex64 {
    let (mut f, _) = cubic(coef, z);
    for _ in 0..NEWTON_MAX_ITERS {
        let (_, df) = cubic(coef, z);
        if df.norm() == 0.0 || f.norm() == 0.0 {
            break;
        }
        let next = z - f / df;
        let (fn_, _) = cubic(coef, next);
        if !(fn_.norm() < f.norm()) {
            break;
        }
        z = next;
        f = fn_;
    }
    z
}

/// Roots of the monic cubic, classified by the sign of its discriminant.
pub fn cubic_roots(coef: [f64; 3]) -> (Spectrum, [Complex64; 3]) {
    let [a, b, c] = coef;
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    if disc > 0.0 {
        let sd = disc.sqrt();
        // Pick the sign that avoids cancellation.
        let u = (-q / 2.0 - q.signum() * sd).cbrt();
        let v = if u != 0.0 { -p / (3.0 * u) } else { 0.0 };
        let real = polish(coef, Complex64::new(u + v - shift, 0.0)).re;
        let mut pair = Complex64::new(-(u + v) / 2.0 - shift, (3.0f64).sqrt() / 2.0 * (u - v).abs());
        pair = polish(coef, pair);
        if pair.im < 0.0 {
            pair = pair.conj();
        }
        (Spectrum::SaddleFocus, [Complex64::new(real, 0.0), pair, pair.conj()])
    } else {
        let mut roots = if p == 0.0 {
            [-shift; 3]
        } else {
            let r = 2.0 * (-p / 3.0).sqrt();
            let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            let tau = 2.0 * std::f64::consts::PI / 3.0;
            [0.0, 1.0, 2.0].map(|k| r * (phi - tau * k).cos() - shift)
        };
        for root in roots.iter_mut() {
            *root = polish(coef, Complex64::new(*root, 0.0)).re;
        }
        roots.sort_by(|x, y| x.total_cmp(y));
        (Spectrum::AllReal, roots.map(|r| Complex64::new(r, 0.0)))
    }
}

fn ccross(a: CVec3, b: CVec3) -> CVec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn cnorm(a: &CVec3) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit vector with its largest-modulus component real and positive.
fn canonical_phase(v: CVec3) -> CVec3 {
    let pivot = v
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |best, (k, z)| if z.norm() > best.1 { (k, z.norm()) } else { best })
        .0;
    let phase = v[pivot].conj() / v[pivot].norm();
    let n = cnorm(&v);
    v.map(|z| z * phase / n)
}

/// Null vector of `A - λI`, taken from the best-conditioned pair of rows.
fn null_vector(m: &Matrix3, lambda: Complex64) -> CVec3 {
    let rows: [CVec3; 3] = std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            let d = if r == c { lambda } else { Complex64::new(0.0, 0.0) };
            Complex64::new(m.0[r][c], 0.0) - d
        })
    });
    let candidates = [ccross(rows[0], rows[1]), ccross(rows[0], rows[2]), ccross(rows[1], rows[2])];
    let best = candidates
        .into_iter()
        .max_by(|x, y| cnorm(x).total_cmp(&cnorm(y)))
        .unwrap();
    canonical_phase(best)
}

pub fn eigen_decompose(m: &Matrix3) -> Result<EigenDecomposition, EigenError> {
    if !m.is_finite() {
        return Err(EigenError::NonFinite);
    }
    let (spectrum, eigenvalues) = cubic_roots(characteristic_coefficients(m));
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    for i in 0..3 {
        for j in i + 1..3 {
            if (eigenvalues[i] - eigenvalues[j]).norm() <= REPEATED_TOL * scale {
                return Err(EigenError::RepeatedEigenvalue(eigenvalues[i]));
            }
        }
    }
    let mt = m.transpose();
    let right = eigenvalues.map(|l| null_vector(m, l));
    let left = eigenvalues.map(|l| null_vector(&mt, l));
    Ok(EigenDecomposition { spectrum, eigenvalues, right, left })
}

impl EigenDecomposition {
    /// Index of the distinguished real eigenvalue γ: the only real one for a
    /// saddle-focus, otherwise the one whose sign differs from the other two
    /// (falling back to the largest magnitude).
    pub fn real_index(&self) -> usize {
        match self.spectrum {
            Spectrum::SaddleFocus => 0,
            Spectrum::AllReal => {
                let signs: Vec<bool> = self.eigenvalues.iter().map(|z| z.re > 0.0).collect();
                (0..3)
                    .find(|&k| signs.iter().filter(|&&s| s == signs[k]).count() == 1)
                    .unwrap_or_else(|| {
                        (0..3).max_by(|&x, &y| self.eigenvalues[x].re.abs().total_cmp(&self.eigenvalues[y].re.abs())).unwrap()
                    })
            }
        }
    }

    pub fn real_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.real_index()].re
    }

    /// Real part of the left eigenvector for γ (its imaginary part is zero).
    pub fn real_left_eigenvector(&self) -> Vec3 {
        self.left[self.real_index()].map(|z| z.re)
    }

    /// Indices of the two eigenpairs other than γ.
    pub fn other_indices(&self) -> [usize; 2] {
        let g = self.real_index();
        let mut it = (0..3).filter(|&k| k != g);
        [it.next().unwrap(), it.next().unwrap()]
    }

    /// `‖A v − λ v‖ / (‖A‖_F ‖v‖)` for right eigenpair `k`.
    pub fn right_residual(&self, m: &Matrix3, k: usize) -> f64 {
        let v = self.right[k];
        let l = self.eigenvalues[k];
        let r: CVec3 = std::array::from_fn(|row| {
            (0..3).map(|c| v[c] * m.0[row][c]).sum::<Complex64>() - l * v[row]
        });
        cnorm(&r) / (m.frobenius_norm() * cnorm(&v))
    }

    /// `‖wᵀ A − λ wᵀ‖ / (‖A‖_F ‖w‖)` for left eigenpair `k`.
    pub fn left_residual(&self, m: &Matrix3, k: usize) -> f64 {
        let w = self.left[k];
        let l = self.eigenvalues[k];
        let r: CVec3 = std::array::from_fn(|col| {
            (0..3).map(|row| w[row] * m.0[row][col]).sum::<Complex64>() - l * w[col]
        });
        cnorm(&r) / (m.frobenius_norm() * cnorm(&w))
    }
}
