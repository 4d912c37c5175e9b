//! Legendre polynomials, Gauss–Legendre points, Lagrange bases and the
//! Radau correction functions that recover nodal DG.

use crate::RMat;

/// `(L_n(x), L_n'(x))` via the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut l_prev, mut l) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    if n == 0 {
        return (1.0, 0.0);
    }
    for m in 1..n {
        let mf = m as f64;
        let l_next = ((2.0 * mf + 1.0) * x * l - mf * l_prev) / (mf + 1.0);
        // L'_{m+1} = L'_{m-1} + (2m + 1) L_m
        let d_next = d_prev + (2.0 * mf + 1.0) * l;
        l_prev = l;
        l = l_next;
        d_prev = d;
        d = d_next;
    }
    (l, d)
}

/// The `n` roots of `L_n`, ascending, by Newton iteration.
pub fn gauss_legendre_points(n: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..n)
        .map(|i| {
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (l, d) = legendre(n, x);
                let dx = l / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            x
        })
        .collect();
    pts.sort_by(f64::total_cmp);
    pts
}

/// Gauss–Legendre quadrature weights matching [`gauss_legendre_points`].
pub fn gauss_legendre_weights(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    points
        .iter()
        .map(|&x| {
            let (_, d) = legendre(n, x);
            2.0 / ((1.0 - x * x) * d * d)
        })
        .collect()
}

/// Values of the Lagrange basis on `nodes` at `x`.
pub fn lagrange_at(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .map(|(_, &xm)| (x - xm) / (nodes[j] - xm))
                .product()
        })
        .collect()
}

/// Nodal differentiation matrix, `D[(i, j)] = l_j'(x_i)`, so that `D u`
/// differentiates the interpolant of `u`.
pub fn differentiation_matrix(nodes: &[f64]) -> RMat {
    let n = nodes.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            1.0 / (0..n)
                .filter(|&m| m != j)
                .map(|m| nodes[j] - nodes[m])
                .product::<f64>()
        })
        .collect();
    let mut d = RMat::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Legendre Vandermonde matrix `V[(i, n)] = L_n(x_i)`.
pub fn vandermonde(nodes: &[f64]) -> RMat {
    RMat::from_fn(nodes.len(), nodes.len(), |i, n| legendre(n, nodes[i]).0)
}

/// Gradients at `nodes` of the left and right Radau correction functions of
/// degree `p + 1`:
/// `h_L = (-1)^p (L_p - L_{p+1}) / 2`, `h_R = (L_p + L_{p+1}) / 2`.
pub fn radau_correction_gradients(p: usize, nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    nodes
        .iter()
        .map(|&x| {
            let (_, dp) = legendre(p, x);
            let (_, dp1) = legendre(p + 1, x);
            (0.5 * sign * (dp - dp1), 0.5 * (dp + dp1))
        })
        .unzip()
}
