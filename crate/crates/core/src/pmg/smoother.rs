//! Pseudo-time smoothers shared by the Fourier and physical-space levels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fr_ops::FrOperatorSet;
use crate::linalg;
use crate::schemes::ButcherTableau;
use crate::{CMat, CVec};

/// Smoother applied on every level of a cycle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Smoother {
    /// The configured explicit RK pseudo-time scheme.
    #[default]
    Erk,
    /// Relaxed element-Jacobi with relaxation factor `kappa`.
    ElementJacobi { kappa: f64 },
}

impl Smoother {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Smoother::Erk => Ok(()),
            Smoother::ElementJacobi { kappa } if kappa > 0.0 && kappa <= 1.0 => Ok(()),
            Smoother::ElementJacobi { kappa } => Err(Error::param(
                "kappa",
                format!("must lie in (0, 1], got {kappa}"),
            )),
        }
    }
}

/// One explicit RK pseudo step evaluated stage by stage.
///
/// Stage derivatives are `q_i = Q(u + Δτ sum_j a_ij q_j) - (u + src)/(Δt B_0) - r`
/// with the source frozen at the step's starting state `u`.
pub fn erk_step(
    tab: &ButcherTableau,
    dtau: f64,
    dt_b0: f64,
    apply_q: &dyn Fn(&CVec) -> CVec,
    u: &CVec,
    src: &CVec,
    r: Option<&CVec>,
) -> CVec {
    let mut g = -(u + src).unscale(dt_b0);
    if let Some(r) = r {
        g -= r;
    }
    let a = tab.a();
    let mut q: Vec<CVec> = Vec::with_capacity(tab.stages());
    for i in 0..tab.stages() {
        let mut stage = u.clone();
        for (j, qj) in q.iter().enumerate() {
            let aij = a[(i, j)];
            if aij != 0.0 {
                stage.axpy(
                    Complex64::new(dtau * aij, 0.0),
                    qj,
                    Complex64::new(1.0, 0.0),
                );
            }
        }
        q.push(apply_q(&stage) + &g);
    }
    let mut out = u.clone();
    for (bi, qi) in tab.b().iter().zip(&q) {
        out.axpy(Complex64::new(dtau * bi, 0.0), qi, Complex64::new(1.0, 0.0));
    }
    out
}

/// Element-diagonal block of `T = Q - I/(Δt B_0)`:
/// `-(2/h) C_0 + μ (4/h²) B_0 - I/(Δt B_0)`.
pub fn element_jacobian(ops: &FrOperatorSet, h: f64, mu: f64, dt_b0: f64) -> CMat {
    let n = ops.n_points();
    let real = ops.c0() * (-2.0 / h) + &ops.b0 * (mu * 4.0 / (h * h))
        - crate::RMat::identity(n, n) / dt_b0;
    linalg::to_complex(&real)
}

/// Inverse of [`element_jacobian`].
pub(crate) fn element_jacobian_inverse(
    ops: &FrOperatorSet,
    h: f64,
    mu: f64,
    dt_b0: f64,
) -> Result<CMat> {
    linalg::inverse(&element_jacobian(ops, h, mu, dt_b0))
        .ok_or_else(|| Error::Singular(format!("element Jacobian block at degree {}", ops.p)))
}
