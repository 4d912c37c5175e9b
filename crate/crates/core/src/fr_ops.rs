//! Nodal flux-reconstruction operators and the Bloch-wave spatial operator.
//!
//! With the α-weighted common interface value
//! `u^I_{i-1/2} = α u_{i-1}(+1) + (1 - α) u_i(-1)`, the FR derivative on
//! element `i` is
//!
//! ```text
//! du_i/dx = (2/h) (C_- u_{i-1} + C_0 u_i + C_+ u_{i+1})
//! C_- = α g_L l_R^T
//! C_0 = D - α g_L l_L^T - (1 - α) g_R l_R^T
//! C_+ = (1 - α) g_R l_L^T
//! ```
//!
//! so `α = 1` is fully upwinded and `α = 1/2` central. Second derivatives
//! nest the first-derivative operator (built with `α_d`) twice, giving the
//! five-element stencil `B_{-2} .. B_{+2}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Eigen};
use crate::polynomial;
use crate::{CMat, CVec, RMat};

/// Tolerance on `||Q - ik W Λ W^{-1}||_F / ||Q||_F`.
pub const EIGEN_RECONSTRUCTION_TOL: f64 = 1e-9;

/// Where the solution points sit in the reference element.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum NodeSet {
    #[default]
    GaussLegendre,
    /// Explicit points in `[-1, 1]`, strictly increasing.
    Custom(Vec<f64>),
}

/// Correction-function family. Only the Radau pair recovering nodal DG is
/// provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    #[default]
    Dg,
}

/// One interface stencil `(C_-, C_0, C_+)` for a given upwinding.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil3 {
    pub minus: RMat,
    pub centre: RMat,
    pub plus: RMat,
}

/// Nodal FR matrices for one polynomial degree.
#[derive(Debug, Clone, PartialEq)]
pub struct FrOperatorSet {
    pub p: usize,
    pub nodes: Vec<f64>,
    pub d: RMat,
    pub g_l: Vec<f64>,
    pub g_r: Vec<f64>,
    /// Interpolation of the solution points to `ξ = -1`.
    pub l_l: Vec<f64>,
    /// Interpolation of the solution points to `ξ = +1`.
    pub l_r: Vec<f64>,
    pub alpha_a: f64,
    pub alpha_d: f64,
    /// First-derivative stencil with advective upwinding `α_a`.
    pub adv: Stencil3,
    /// First-derivative stencil with diffusive upwinding `α_d`.
    pub diff: Stencil3,
    pub bm2: RMat,
    pub bm: RMat,
    pub b0: RMat,
    pub bp: RMat,
    pub bp2: RMat,
}

impl FrOperatorSet {
    pub fn cm(&self) -> &RMat {
        &self.adv.minus
    }
    pub fn c0(&self) -> &RMat {
        &self.adv.centre
    }
    pub fn cp(&self) -> &RMat {
        &self.adv.plus
    }

    pub fn n_points(&self) -> usize {
        self.p + 1
    }

    /// Physical positions of the solution points in the element `[0, h]`.
    pub fn physical_points(&self, h: f64) -> Vec<f64> {
        self.nodes.iter().map(|xi| 0.5 * (xi + 1.0) * h).collect()
    }
}

fn outer(a: &[f64], b: &[f64]) -> RMat {
    RMat::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
}

fn stencil(d: &RMat, g_l: &[f64], g_r: &[f64], l_l: &[f64], l_r: &[f64], alpha: f64) -> Stencil3 {
    let minus = outer(g_l, l_r) * alpha;
    let centre = d - outer(g_l, l_l) * alpha - outer(g_r, l_r) * (1.0 - alpha);
    let plus = outer(g_r, l_l) * (1.0 - alpha);
    Stencil3 {
        minus,
        centre,
        plus,
    }
}

fn check_alpha(name: &'static str, a: f64) -> Result<()> {
    if !(0.5..=1.0).contains(&a) {
        return Err(Error::param(name, format!("{a} is outside [0.5, 1]")));
    }
    Ok(())
}

/// Build the full FR operator set for degree `p`.
pub fn build_fr_operators(
    p: usize,
    alpha_a: f64,
    alpha_d: f64,
    nodes: &NodeSet,
    correction: Correction,
) -> Result<FrOperatorSet> {
    check_alpha("alpha_a", alpha_a)?;
    check_alpha("alpha_d", alpha_d)?;
    let Correction::Dg = correction;
    let pts = match nodes {
        NodeSet::GaussLegendre => polynomial::gauss_legendre_points(p + 1),
        NodeSet::Custom(v) => {
            if v.len() != p + 1 {
                return Err(Error::param(
                    "nodes",
                    format!("{} points for degree {p}", v.len()),
                ));
            }
            if v.windows(2).any(|w| !(w[0] < w[1])) || v.iter().any(|x| !(-1.0..=1.0).contains(x)) {
                return Err(Error::param(
                    "nodes",
                    "points must be strictly increasing in [-1, 1]",
                ));
            }
            v.clone()
        }
    };
    let d = polynomial::differentiation_matrix(&pts);
    let (g_l, g_r) = polynomial::radau_correction_gradients(p, &pts);
    let l_l = polynomial::lagrange_at(&pts, -1.0);
    let l_r = polynomial::lagrange_at(&pts, 1.0);
    let adv = stencil(&d, &g_l, &g_r, &l_l, &l_r, alpha_a);
    let diff = stencil(&d, &g_l, &g_r, &l_l, &l_r, alpha_d);
    let (m, c, pl) = (&diff.minus, &diff.centre, &diff.plus);
    let bm2 = m * m;
    let bm = m * c + c * m;
    let b0 = m * pl + c * c + pl * m;
    let bp = c * pl + pl * c;
    let bp2 = pl * pl;
    Ok(FrOperatorSet {
        p,
        nodes: pts,
        d,
        g_l,
        g_r,
        l_l,
        l_r,
        alpha_a,
        alpha_d,
        adv,
        diff,
        bm2,
        bm,
        b0,
        bp,
        bp2,
    })
}

/// `(Q_a, Q_d, Q)` at wavenumber `k` without the eigendecomposition.
pub fn bloch_matrices(base: &FrOperatorSet, h: f64, mu: f64, k: f64) -> (CMat, CMat, CMat) {
    let ph = |m: i32| Complex64::from_polar(1.0, m as f64 * k * h);
    let c = linalg::to_complex;
    let qa = (c(base.cm()) * ph(-1) + c(base.c0()) + c(base.cp()) * ph(1))
        * Complex64::new(2.0 / h, 0.0);
    let qd = (c(&base.bm2) * ph(-2)
        + c(&base.bm) * ph(-1)
        + c(&base.b0)
        + c(&base.bp) * ph(1)
        + c(&base.bp2) * ph(2))
        * Complex64::new(4.0 / (h * h), 0.0);
    let q = &qd * Complex64::new(mu, 0.0) - &qa;
    (qa, qd, q)
}

/// Bloch-wave operator `Q = -Q_a + μ Q_d = ik W diag(Λ_Q) W^{-1}`.
///
/// Modes are ordered by decreasing `|β_j|`, the weight of the exact wave in
/// each eigenvector, so index 0 is the primary (physical) mode.
#[derive(Debug, Clone)]
pub struct BlochOperator {
    pub base: FrOperatorSet,
    pub h: f64,
    pub mu: f64,
    pub k: f64,
    pub qa: CMat,
    pub qd: CMat,
    pub q: CMat,
    pub w: CMat,
    pub w_inv: CMat,
    pub lambda_q: CVec,
    /// Mode weights of the exact wave sampled on the reference element.
    pub beta: CVec,
}

impl BlochOperator {
    /// Eigenvalues of `Q` itself, `ik Λ_Q`.
    pub fn q_eigenvalues(&self) -> CVec {
        self.lambda_q.map(|l| Complex64::new(0.0, self.k) * l)
    }

    /// The exact wave sampled at the reference element's points.
    pub fn exact_wave(&self) -> CVec {
        exact_wave(&self.base, self.h, self.k, 0.0)
    }

    /// Exact dispersion relation `ω = k (1 - i μ k)`.
    pub fn omega(&self) -> Complex64 {
        exact_omega(self.k, self.mu)
    }

    /// Project a nodal vector onto eigenmode coordinates, `W^{-1} u`.
    pub fn modal_coordinates(&self, u: &CVec) -> CVec {
        &self.w_inv * u
    }
}

/// `ω = k (1 - i μ k)`.
pub fn exact_omega(k: f64, mu: f64) -> Complex64 {
    Complex64::new(k, -mu * k * k)
}

/// `exp(i k x)` at the solution points of an element whose left edge is at
/// `offset`.
pub fn exact_wave(base: &FrOperatorSet, h: f64, k: f64, offset: f64) -> CVec {
    let x = base.physical_points(h);
    CVec::from_iterator(
        x.len(),
        x.iter()
            .map(|xj| Complex64::from_polar(1.0, k * (xj + offset))),
    )
}

/// Assemble `Q` at wavenumber `k` and diagonalise it.
pub fn build_bloch(base: &FrOperatorSet, h: f64, mu: f64, k: f64) -> Result<BlochOperator> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::param("h", format!("must be positive, got {h}")));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::param(
            "mu",
            format!("must be non-negative, got {mu}"),
        ));
    }
    if k == 0.0 || !k.is_finite() {
        return Err(Error::param("k", "must be nonzero and finite"));
    }
    let (qa, qd, q) = bloch_matrices(base, h, mu, k);
    let eig_err = |reason: String| Error::Eigen {
        p: base.p,
        k,
        alpha_a: base.alpha_a,
        alpha_d: base.alpha_d,
        reason,
    };
    let eig = Eigen::new(&q, EIGEN_RECONSTRUCTION_TOL).map_err(eig_err)?;
    let v = exact_wave(base, h, k, 0.0);
    let beta_raw = &eig.inverse * &v;

    let n = base.n_points();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| beta_raw[b].norm().total_cmp(&beta_raw[a].norm()));
    let w = CMat::from_fn(n, n, |i, j| eig.vectors[(i, order[j])]);
    let w_inv = CMat::from_fn(n, n, |i, j| eig.inverse[(order[i], j)]);
    let ik = Complex64::new(0.0, k);
    let lambda_q = CVec::from_iterator(n, order.iter().map(|&j| eig.values[j] / ik));
    let beta = CVec::from_iterator(n, order.iter().map(|&j| beta_raw[j]));

    Ok(BlochOperator {
        base: base.clone(),
        h,
        mu,
        k,
        qa,
        qd,
        q,
        w,
        w_inv,
        lambda_q,
        beta,
    })
}

/// Mode weights `β` solving `W β = exp(i k x̃)` on the reference element.
pub fn mode_weights(op: &BlochOperator) -> Result<CVec> {
    linalg::solve(&op.w, &op.exact_wave())
        .ok_or_else(|| Error::Singular("eigenvector matrix W".into()))
}
