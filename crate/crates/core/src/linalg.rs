//! Small dense complex linear algebra: Schur form, eigendecomposition,
//! matrix polynomials.
//!
//! The matrices handled here are at most a few dozen rows (one FR element),
//! so everything is dense and unblocked.

use num_complex::Complex64;

use crate::{CMat, CVec, RMat};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Lift a real matrix to the complex field.
pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Frobenius norm of a complex matrix.
pub fn fro_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean norm of a complex vector.
pub fn norm2(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Inverse via LU with partial pivoting. `None` when numerically singular.
pub fn inverse(m: &CMat) -> Option<CMat> {
    let inv = m.clone().try_inverse()?;
    if inv.iter().all(|z| z.is_finite()) {
        Some(inv)
    } else {
        None
    }
}

/// Solve `m x = rhs`.
pub fn solve(m: &CMat, rhs: &CVec) -> Option<CVec> {
    let x = m.clone().lu().solve(rhs)?;
    x.iter().all(|z| z.is_finite()).then_some(x)
}

/// Evaluate `sum_j coeffs[j] * z^j` by Horner's rule.
pub fn poly_eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(ZERO, |acc, &c| acc * z + Complex64::new(c, 0.0))
}

/// Evaluate `sum_j coeffs[j] * X^j` by Horner's rule.
pub fn matrix_poly(coeffs: &[f64], x: &CMat) -> CMat {
    let n = x.nrows();
    let mut acc = CMat::zeros(n, n);
    for &c in coeffs.iter().rev() {
        acc = &acc * x;
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    acc
}

/// `X^m` by repeated squaring.
pub fn matrix_pow(x: &CMat, mut m: usize) -> CMat {
    let n = x.nrows();
    let mut result = CMat::identity(n, n);
    let mut base = x.clone();
    while m > 0 {
        if m & 1 == 1 {
            result = &result * &base;
        }
        m >>= 1;
        if m > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Complex Schur decomposition `A = Z T Z^*` with `T` upper triangular and
/// `Z` unitary.
#[derive(Debug, Clone)]
pub struct Schur {
    pub z: CMat,
    pub t: CMat,
}

impl Schur {
    /// Householder reduction to Hessenberg form followed by single-shift QR
    /// sweeps with Wilkinson shifts. Returns `None` if the iteration fails to
    /// converge.
    pub fn new(a: &CMat) -> Option<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "Schur form of a non-square matrix");
        let mut h = a.clone();
        let mut z = CMat::identity(n, n);
        if n <= 1 {
            return Some(Schur { z, t: h });
        }
        hessenberg(&mut h, &mut z);

        let scale = fro_norm(&h).max(f64::MIN_POSITIVE);
        let eps = f64::EPSILON;
        let mut hi = n - 1;
        let mut iter = 0usize;
        let mut since_deflation = 0usize;
        let max_iter = 100 * n.max(4);

        while hi > 0 {
            // Deflate negligible subdiagonal entries.
            for i in 1..=hi {
                let s = h[(i, i)].norm() + h[(i - 1, i - 1)].norm();
                let s = if s == 0.0 { scale } else { s };
                if h[(i, i - 1)].norm() <= eps * s {
                    h[(i, i - 1)] = ZERO;
                }
            }
            if h[(hi, hi - 1)] == ZERO {
                hi -= 1;
                since_deflation = 0;
                continue;
            }
            let mut lo = hi - 1;
            while lo > 0 && h[(lo, lo - 1)] != ZERO {
                lo -= 1;
            }

            iter += 1;
            since_deflation += 1;
            if iter > max_iter {
                return None;
            }

            let shift = if since_deflation % 11 == 10 {
                // Exceptional shift to break cycles.
                h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
            } else {
                wilkinson_shift(
                    h[(hi - 1, hi - 1)],
                    h[(hi - 1, hi)],
                    h[(hi, hi - 1)],
                    h[(hi, hi)],
                )
            };

            qr_sweep(&mut h, &mut z, lo, hi, shift);
        }

        // Clean the strictly lower part.
        for j in 0..n {
            for i in (j + 1)..n {
                h[(i, j)] = ZERO;
            }
        }
        Some(Schur { z, t: h })
    }

    pub fn eigenvalues(&self) -> CVec {
        CVec::from_iterator(self.t.nrows(), (0..self.t.nrows()).map(|i| self.t[(i, i)]))
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, ONE);
    }
    let r = an.hypot(bn);
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

fn qr_sweep(h: &mut CMat, z: &mut CMat, lo: usize, hi: usize, shift: Complex64) {
    let n = h.nrows();
    for i in lo..=hi {
        h[(i, i)] -= shift;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
        for j in i..n {
            let x = h[(i, j)];
            let y = h[(i + 1, j)];
            h[(i, j)] = x * c + s * y;
            h[(i + 1, j)] = -s.conj() * x + y * c;
        }
        h[(i + 1, i)] = ZERO;
        rots.push((c, s));
    }
    for (offset, &(c, s)) in rots.iter().enumerate() {
        let i = lo + offset;
        let rows = (i + 2).min(hi + 1);
        for r in 0..rows {
            let x = h[(r, i)];
            let y = h[(r, i + 1)];
            h[(r, i)] = x * c + y * s.conj();
            h[(r, i + 1)] = -x * s + y * c;
        }
        for r in 0..n {
            let x = z[(r, i)];
            let y = z[(r, i + 1)];
            z[(r, i)] = x * c + y * s.conj();
            z[(r, i + 1)] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += shift;
    }
}

fn hessenberg(h: &mut CMat, z: &mut CMat) {
    let n = h.nrows();
    for k in 0..n.saturating_sub(2) {
        let xnorm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            ONE
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for c in v.iter_mut() {
            *c /= vnorm;
        }
        // H <- (I - 2 v v^*) H
        for j in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(t, vi)| vi.conj() * h[(k + 1 + t, j)])
                .sum();
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * dot * 2.0;
            }
        }
        // H <- H (I - 2 v v^*), Z <- Z (I - 2 v v^*)
        for m in [&mut *h, &mut *z] {
            for i in 0..n {
                let dot: Complex64 = v
                    .iter()
                    .enumerate()
                    .map(|(t, vi)| m[(i, k + 1 + t)] * vi)
                    .sum();
                for (t, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= dot * vi.conj() * 2.0;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
}

/// Eigendecomposition `A = V diag(λ) V^{-1}`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: CVec,
    /// Eigenvectors as columns, each scaled to unit RMS (2-norm `sqrt(n)`).
    pub vectors: CMat,
    pub inverse: CMat,
}

impl Eigen {
    /// Eigenvectors are recovered from the Schur form by back substitution.
    /// Fails when the eigenvector matrix is singular or the reconstruction
    /// residual exceeds `tol * ||A||_F`.
    pub fn new(a: &CMat, tol: f64) -> Result<Self, String> {
        let n = a.nrows();
        let schur = Schur::new(a).ok_or_else(|| "QR iteration did not converge".to_string())?;
        let t = &schur.t;
        let anorm = fro_norm(a).max(f64::MIN_POSITIVE);
        let small = f64::EPSILON * anorm;

        let mut y = CMat::zeros(n, n);
        for j in 0..n {
            let lambda = t[(j, j)];
            y[(j, j)] = ONE;
            for i in (0..j).rev() {
                let mut acc = ZERO;
                for m in (i + 1)..=j {
                    acc += t[(i, m)] * y[(m, j)];
                }
                let mut denom = t[(i, i)] - lambda;
                if denom.norm() < small {
                    denom = Complex64::new(small, 0.0);
                }
                y[(i, j)] = -acc / denom;
            }
        }
        let mut vectors = &schur.z * y;
        let rms_target = (n as f64).sqrt();
        for j in 0..n {
            let nrm = (0..n)
                .map(|i| vectors[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if nrm == 0.0 || !nrm.is_finite() {
                return Err(format!("eigenvector {j} vanished"));
            }
            let s = rms_target / nrm;
            for i in 0..n {
                vectors[(i, j)] *= s;
            }
        }
        let values = schur.eigenvalues();
        let inverse =
            inverse(&vectors).ok_or_else(|| "eigenvector matrix is singular".to_string())?;
        let recon = &vectors * CMat::from_diagonal(&values) * &inverse;
        let resid = fro_norm(&(recon - a));
        if !(resid <= tol * anorm) {
            return Err(format!(
                "reconstruction residual {resid:e} exceeds {:e} (matrix likely defective)",
                tol * anorm
            ));
        }
        Ok(Eigen {
            values,
            vectors,
            inverse,
        })
    }
}

/// Spectral radius computed from the Schur form.
pub fn spectral_radius(a: &CMat) -> Option<f64> {
    let s = Schur::new(a)?;
    Some(s.eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max))
}
