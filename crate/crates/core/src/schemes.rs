//! Temporal building blocks: explicit Runge–Kutta tableaux for pseudo time,
//! BDF coefficients for physical time, and the coefficient split of the
//! coupled pseudo-step update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::RMat;

/// Largest number of stages accepted.
pub const MAX_STAGES: usize = 16;

const ROW_SUM_TOL: f64 = 1e-12;
const LOAD_SUM_TOL: f64 = 1e-9;

/// Explicit Runge–Kutta tableau with strictly lower-triangular `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    a: RMat,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    /// Validate `a` and `b`; `c` is taken as the row sums of `a`.
    pub fn new(a: RMat, b: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(a, b, ROW_SUM_TOL)
    }

    fn with_tolerance(a: RMat, b: Vec<f64>, sum_tol: f64) -> Result<Self> {
        let r = b.len();
        if r == 0 || r > MAX_STAGES {
            return Err(Error::InvalidTableau {
                field: "stages",
                reason: format!("{r} stages; expected 1..={MAX_STAGES}"),
            });
        }
        if a.nrows() != r || a.ncols() != r {
            return Err(Error::InvalidTableau {
                field: "A",
                reason: format!("shape {:?} does not match {r} stages", a.shape()),
            });
        }
        for i in 0..r {
            for j in i..r {
                if a[(i, j)] != 0.0 {
                    return Err(Error::InvalidTableau {
                        field: "A",
                        reason: format!(
                            "entry ({i}, {j}) = {} but an explicit scheme needs a strictly lower triangular A",
                            a[(i, j)]
                        ),
                    });
                }
            }
        }
        if a.iter().chain(b.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidTableau {
                field: "A",
                reason: "non-finite coefficient".into(),
            });
        }
        let sum_b: f64 = b.iter().sum();
        if (sum_b - 1.0).abs() > sum_tol {
            return Err(Error::InvalidTableau {
                field: "b",
                reason: format!("b does not sum to 1 (sum = {sum_b})"),
            });
        }
        let c = (0..r).map(|i| a.row(i).sum()).collect();
        Ok(ButcherTableau { a, b, c })
    }

    /// Three-stage, third-order strong-stability-preserving scheme.
    pub fn ssprk3() -> Self {
        let a = RMat::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.25, 0.25, 0.0]);
        Self::new(a, vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]).expect("SSPRK3 is a valid tableau")
    }

    /// Forward Euler, mostly useful in tests.
    pub fn euler() -> Self {
        Self::new(RMat::zeros(1, 1), vec![1.0]).expect("forward Euler is a valid tableau")
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &RMat {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    /// `b^T A^j e` for `j = 0..r`. Since `A` is nilpotent these are the only
    /// nonzero terms of `b^T (I - zA)^{-1} e = sum_j z^j b^T A^j e`.
    pub fn neumann_coefficients(&self) -> Vec<f64> {
        let r = self.stages();
        let mut v = nalgebra::DVector::from_element(r, 1.0);
        let b = nalgebra::DVector::from_column_slice(&self.b);
        let mut out = Vec::with_capacity(r);
        for _ in 0..r {
            out.push(b.dot(&v));
            v = &self.a * v;
        }
        out
    }

    /// Coefficients of the plain stability polynomial
    /// `R(z) = 1 + sum_j b^T A^j e z^{j+1}`.
    pub fn stability_coefficients(&self) -> Vec<f64> {
        let mut out = vec![1.0];
        out.extend(self.neumann_coefficients());
        out
    }

    pub fn to_config(&self) -> TableauConfig {
        TableauConfig {
            stages: self.stages(),
            a: (0..self.stages())
                .map(|i| self.a.row(i).iter().copied().collect())
                .collect(),
            b: self.b.clone(),
        }
    }
}

/// On-disk form of a tableau: `{"stages": r, "A": [[..], ..], "b": [..]}`
/// with `A` given as full rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableauConfig {
    pub stages: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Build a validated tableau from its config record.
pub fn load_tableau(source: &TableauConfig) -> Result<ButcherTableau> {
    let r = source.stages;
    if source.b.len() != r {
        return Err(Error::InvalidTableau {
            field: "b",
            reason: format!("{} entries for {r} stages", source.b.len()),
        });
    }
    if source.a.len() != r || source.a.iter().any(|row| row.len() != r) {
        return Err(Error::InvalidTableau {
            field: "A",
            reason: format!("expected {r} rows of {r} entries"),
        });
    }
    let a = RMat::from_fn(r, r, |i, j| source.a[i][j]);
    ButcherTableau::with_tolerance(a, source.b.clone(), LOAD_SUM_TOL)
}

/// Parse a tableau from JSON text.
pub fn parse_tableau(json: &str) -> Result<ButcherTableau> {
    let cfg: TableauConfig = serde_json::from_str(json)?;
    load_tableau(&cfg)
}

/// Backward-difference formula
/// `u_{n+1} = -sum_{i<s} B_{i+1} u_{n-i} + Δt B_0 λ u_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BdfScheme {
    order: usize,
    coeffs: Vec<f64>,
}

impl BdfScheme {
    pub fn new(order: usize) -> Result<Self> {
        let coeffs = match order {
            1 => vec![1.0, -1.0],
            2 => vec![2.0 / 3.0, -4.0 / 3.0, 1.0 / 3.0],
            3 => vec![6.0 / 11.0, -18.0 / 11.0, 9.0 / 11.0, -2.0 / 11.0],
            _ => return Err(Error::UnsupportedBdfOrder(order)),
        };
        Ok(BdfScheme { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `B_0`.
    pub fn b0(&self) -> f64 {
        self.coeffs[0]
    }

    /// `B_1 .. B_s`, the history weights.
    pub fn history(&self) -> &[f64] {
        &self.coeffs[1..]
    }

    /// `B_0 .. B_s`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Shorthand for [`BdfScheme::new`].
pub fn make_bdf(order: usize) -> Result<BdfScheme> {
    BdfScheme::new(order)
}

/// Shorthand for [`ButcherTableau::ssprk3`].
pub fn make_ssprk3() -> ButcherTableau {
    ButcherTableau::ssprk3()
}

/// Coefficients of the coupled pseudo-step update written as polynomials in
/// `z = λΔτ`:
///
/// * `P(z) = sum_{j=0}^{r} gamma[j] z^j` multiplies the current iterate,
/// * `C(z) = sum_{j<r} kappa[j] z^j` multiplies the BDF history sum,
/// * `K(z) = Δτ sum_{j<r} neumann[j] z^j` multiplies a multigrid source,
///
/// so that `u_{m+1} = P u_m - C sum_l B_{l+1} u_{n-l} - K r`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityPolynomial {
    pub gamma: Vec<f64>,
    pub kappa: Vec<f64>,
    pub neumann: Vec<f64>,
    pub tau_over_t: f64,
}

impl StabilityPolynomial {
    pub fn p(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        crate::linalg::poly_eval(&self.gamma, z)
    }

    pub fn c(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        crate::linalg::poly_eval(&self.kappa, z)
    }

    /// `K(z) / Δτ`.
    pub fn k_over_dtau(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        crate::linalg::poly_eval(&self.neumann, z)
    }
}

/// Closed-form split of the pseudo-step update, exact through the
/// nilpotency of `A`.
pub fn stability_polynomial(
    tab: &ButcherTableau,
    bdf: &BdfScheme,
    tau_over_t: f64,
) -> Result<StabilityPolynomial> {
    if !(tau_over_t > 0.0) || !tau_over_t.is_finite() {
        return Err(Error::param(
            "tau_over_t",
            format!("must be positive, got {tau_over_t}"),
        ));
    }
    let a = tab.neumann_coefficients();
    let r = a.len();
    let sigma = tau_over_t / bdf.b0();
    let mut gamma = vec![0.0; r + 1];
    gamma[0] = 1.0 - sigma * a[0];
    for j in 1..r {
        gamma[j] = a[j - 1] - sigma * a[j];
    }
    gamma[r] = a[r - 1];
    let kappa = a.iter().map(|x| sigma * x).collect();
    Ok(StabilityPolynomial {
        gamma,
        kappa,
        neumann: a,
        tau_over_t,
    })
}
