//! Closed-form dual-time analysis at a single wavenumber.
//!
//! With history taken from the analytic Bloch wave,
//! `sum_l B_{l+1} u_{n-l} = σ u_n` where `σ = sum_l B_{l+1} exp(iωlΔt)`,
//! and `M` pseudo steps started from `u_{n+1,0} = u_n` give
//!
//! ```text
//! u_{n+1,M} = R_M u_n,    R_M = P^M - S_M C σ,    S_M = sum_{m<M} P^m.
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fr_ops::{self, BlochOperator, FrOperatorSet};
use crate::linalg::{self, Schur};
use crate::schemes::{stability_polynomial, BdfScheme, ButcherTableau, StabilityPolynomial};
use crate::{CMat, CVec};

/// Physical and pseudo time stepping parameters.
#[derive(Debug, Clone)]
pub struct DualTimeConfig {
    pub dt: f64,
    pub dtau: f64,
    /// Pseudo steps per physical step.
    pub m: usize,
    pub bdf: BdfScheme,
    pub tab: ButcherTableau,
}

impl DualTimeConfig {
    /// Validated constructor; requires `0 < dtau < dt`.
    pub fn new(dt: f64, dtau: f64, m: usize, bdf: BdfScheme, tab: ButcherTableau) -> Result<Self> {
        let cfg = DualTimeConfig {
            dt,
            dtau,
            m,
            bdf,
            tab,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param(
                "dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        if !(self.dtau > 0.0) || !self.dtau.is_finite() {
            return Err(Error::param(
                "dtau",
                format!("must be positive, got {}", self.dtau),
            ));
        }
        if self.dtau >= self.dt {
            return Err(Error::param(
                "dtau",
                format!(
                    "pseudo step {} must be smaller than the physical step {}",
                    self.dtau, self.dt
                ),
            ));
        }
        Ok(())
    }

    /// Same configuration with a different pseudo step.
    pub fn with_dtau(&self, dtau: f64) -> Self {
        DualTimeConfig {
            dtau,
            ..self.clone()
        }
    }

    pub fn with_m(&self, m: usize) -> Self {
        DualTimeConfig { m, ..self.clone() }
    }

    pub fn polynomial(&self) -> Result<StabilityPolynomial> {
        stability_polynomial(&self.tab, &self.bdf, self.dtau / self.dt)
    }

    /// `Δt B_0`.
    pub fn dt_b0(&self) -> f64 {
        self.dt * self.bdf.b0()
    }
}

/// `σ = sum_l B_{l+1} exp(iωlΔt)`.
pub fn history_sum(bdf: &BdfScheme, omega: Complex64, dt: f64) -> Complex64 {
    bdf.history()
        .iter()
        .enumerate()
        .map(|(l, &b)| b * (Complex64::i() * omega * (l as f64 * dt)).exp())
        .sum()
}

/// `C_B = σ / (Δt B_0)`.
pub fn c_b(bdf: &BdfScheme, omega: Complex64, dt: f64) -> Complex64 {
    history_sum(bdf, omega, dt) / (dt * bdf.b0())
}

/// Matrix polynomials of `ΔτQ` that define one pseudo step.
#[derive(Debug, Clone)]
pub struct StepMatrices {
    pub p: CMat,
    pub c: CMat,
    pub k: CMat,
    pub poly: StabilityPolynomial,
    pub dtau: f64,
}

impl StepMatrices {
    pub fn new(q: &CMat, dtau: f64, poly: StabilityPolynomial) -> Self {
        let z = q * Complex64::new(dtau, 0.0);
        let p = linalg::matrix_poly(&poly.gamma, &z);
        let c = linalg::matrix_poly(&poly.kappa, &z);
        let k = linalg::matrix_poly(&poly.neumann, &z) * Complex64::new(dtau, 0.0);
        StepMatrices {
            p,
            c,
            k,
            poly,
            dtau,
        }
    }

    pub fn spectral_radius(&self) -> f64 {
        linalg::spectral_radius(&self.p).unwrap_or(f64::INFINITY)
    }

    /// `(P^M, S_M)` with `S_M = sum_{m<M} P^m` accumulated iteratively.
    pub fn power_and_sum(&self, m: usize) -> (CMat, CMat) {
        let n = self.p.nrows();
        let mut s = CMat::zeros(n, n);
        let mut pm = CMat::identity(n, n);
        for _ in 0..m {
            s += &pm;
            pm = &pm * &self.p;
        }
        (pm, s)
    }
}

/// Every matrix needed to propagate one physical step at one wavenumber.
#[derive(Debug, Clone)]
pub struct PropagatorSet {
    pub p: CMat,
    pub c: CMat,
    pub k: CMat,
    pub r_m: CMat,
    pub s_m: CMat,
    pub p_m: CMat,
    /// `C_B = σ / (Δt B_0)`.
    pub c_b: Complex64,
    /// `σ = sum_l B_{l+1} exp(iωlΔt)`.
    pub sigma: Complex64,
    pub m: usize,
    pub dt: f64,
    pub dtau: f64,
    pub rho_p: f64,
}

/// Build `P, C, K, S_M, R_M` from a spatial operator `Q`. Fails when the
/// spectral radius of `P` is not below one.
pub fn propagators_for(q: &CMat, cfg: &DualTimeConfig, omega: Complex64) -> Result<PropagatorSet> {
    let step = StepMatrices::new(q, cfg.dtau, cfg.polynomial()?);
    let rho_p = step.spectral_radius();
    if !(rho_p < 1.0) {
        return Err(Error::PseudoUnstable {
            rho: rho_p,
            dtau: cfg.dtau,
        });
    }
    let sigma = history_sum(&cfg.bdf, omega, cfg.dt);
    let (p_m, s_m) = step.power_and_sum(cfg.m);
    let r_m = &p_m - &s_m * &step.c * sigma;
    Ok(PropagatorSet {
        p: step.p,
        c: step.c,
        k: step.k,
        r_m,
        s_m,
        p_m,
        c_b: sigma / cfg.dt_b0(),
        sigma,
        m: cfg.m,
        dt: cfg.dt,
        dtau: cfg.dtau,
        rho_p,
    })
}

/// [`propagators_for`] on a Bloch operator.
pub fn build_propagators(
    op: &BlochOperator,
    cfg: &DualTimeConfig,
    omega: Complex64,
) -> Result<PropagatorSet> {
    propagators_for(&op.q, cfg, omega)
}

/// History factor used by [`scalar_amplification`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HistoryFactor {
    /// History of the ODE `u' = λu`: `u_{n-l} = exp(-λlΔt) u_n`.
    Ode,
    /// `u_{n-l} = exp(λlΔt) u_n`, the sign convention of the usual contour
    /// formula.
    Forward,
    /// A precomputed `σ = sum_l B_{l+1} u_{n-l} / u_n`.
    Given(Complex64),
}

/// Which form of the geometric sum to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AmplificationForm {
    /// Explicit sum over `j < M`; valid for any `P`.
    #[default]
    FiniteSum,
    /// `(1 - P^M) / (1 - P)`; assumes `|P| < 1`.
    Closed,
}

/// `u_{n+1,M} / u_n = P^M - [sum_{j<M} P^j] C σ` for scalar `λ`.
pub fn scalar_amplification(
    lambda: Complex64,
    cfg: &DualTimeConfig,
    history: HistoryFactor,
    form: AmplificationForm,
) -> Result<Complex64> {
    let poly = cfg.polynomial()?;
    Ok(amplification_with(&poly, lambda, cfg, history, form))
}

pub(crate) fn amplification_with(
    poly: &StabilityPolynomial,
    lambda: Complex64,
    cfg: &DualTimeConfig,
    history: HistoryFactor,
    form: AmplificationForm,
) -> Complex64 {
    let z = lambda * cfg.dtau;
    let p = poly.p(z);
    let c = poly.c(z);
    let sigma = match history {
        HistoryFactor::Given(s) => s,
        HistoryFactor::Ode | HistoryFactor::Forward => {
            let sign = if history == HistoryFactor::Ode {
                -1.0
            } else {
                1.0
            };
            cfg.bdf
                .history()
                .iter()
                .enumerate()
                .map(|(l, &b)| b * (sign * lambda * (l as f64 * cfg.dt)).exp())
                .sum()
        }
    };
    let (pm, sum) = match form {
        AmplificationForm::FiniteSum => {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut pm = Complex64::new(1.0, 0.0);
            for _ in 0..cfg.m {
                sum += pm;
                pm *= p;
            }
            (pm, sum)
        }
        AmplificationForm::Closed => {
            let pm = p.powu(cfg.m as u32);
            (
                pm,
                (Complex64::new(1.0, 0.0) - pm) / (Complex64::new(1.0, 0.0) - p),
            )
        }
    };
    pm - sum * c * sigma
}

/// Coupled space-time Nyquist limit `k_Nq = min(π/Δt, (p+1)π/h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nyquist {
    pub k_nq: f64,
}

impl Nyquist {
    /// `k̂ = π k / k_Nq`.
    pub fn normalize(&self, k: f64) -> f64 {
        std::f64::consts::PI * k / self.k_nq
    }

    /// Inverse of [`Nyquist::normalize`].
    pub fn wavenumber(&self, k_hat: f64) -> f64 {
        k_hat * self.k_nq / std::f64::consts::PI
    }
}

pub fn nyquist(p: usize, h: f64, dt: f64) -> Nyquist {
    let pi = std::f64::consts::PI;
    Nyquist {
        k_nq: (pi / dt).min((p as f64 + 1.0) * pi / h),
    }
}

/// Fully discrete error of one physical step.
#[derive(Debug, Clone)]
pub struct DiscreteError {
    pub e_vec: CVec,
    pub e_norm: f64,
}

/// `e = exp(i(k x_0 - ω n Δt)) (R_M - exp(-iωΔt) I) W β`, where `x_0` is the
/// left edge of the element (`offset`).
pub fn discrete_error(
    props: &PropagatorSet,
    op: &BlochOperator,
    omega: Complex64,
    n: usize,
    offset: f64,
) -> DiscreteError {
    let wb = &op.w * &op.beta;
    let i = Complex64::i();
    let phase = (i * (op.k * offset - omega * (n as f64 * props.dt))).exp();
    let exact = (-i * omega * props.dt).exp();
    let e_vec = (&props.r_m * &wb - wb * exact) * phase;
    let e_norm = linalg::norm2(&e_vec);
    DiscreteError { e_vec, e_norm }
}

/// `||(R_m - exp(-iωΔt)) W β||` for `m = 0..=m_max`, the error after each
/// pseudo step of the first physical step.
pub fn error_history(
    op: &BlochOperator,
    cfg: &DualTimeConfig,
    omega: Complex64,
    m_max: usize,
) -> Result<Vec<f64>> {
    let step = StepMatrices::new(&op.q, cfg.dtau, cfg.polynomial()?);
    let sigma = history_sum(&cfg.bdf, omega, cfg.dt);
    let exact = (-Complex64::i() * omega * cfg.dt).exp();
    let wb = &op.w * &op.beta;
    let n = wb.len();
    let source = &step.c * &wb * sigma;
    let mut u = wb.clone();
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        out.push(linalg::norm2(&(&u - &wb * exact)));
        if m < m_max {
            u = &step.p * &u - &source;
        }
    }
    debug_assert_eq!(u.len(), n);
    Ok(out)
}

/// Pseudo-time steady state `u_∞` solving `(Q - I/(ΔtB_0)) u = C_B u_n`.
pub fn pseudo_steady_state(
    q: &CMat,
    cfg: &DualTimeConfig,
    omega: Complex64,
    u_n: &CVec,
) -> Result<CVec> {
    let n = q.nrows();
    let t = q - CMat::identity(n, n) * Complex64::new(1.0 / cfg.dt_b0(), 0.0);
    let rhs = u_n * c_b(&cfg.bdf, omega, cfg.dt);
    linalg::solve(&t, &rhs).ok_or_else(|| Error::Singular("pseudo-residual operator T".into()))
}

/// Wavenumber sample sets over `(0, k_max]`.
#[derive(Debug, Clone, PartialEq)]
pub enum WavenumberGrid {
    /// `n` log-spaced points from `min_fraction * k_max` to `k_max`.
    LogSpaced {
        n: usize,
        min_fraction: f64,
    },
    /// `n` uniformly spaced points `k_max * j / n`, `j = 1..=n`.
    Uniform {
        n: usize,
    },
    Explicit(Vec<f64>),
}

impl Default for WavenumberGrid {
    fn default() -> Self {
        WavenumberGrid::LogSpaced {
            n: 64,
            min_fraction: 1e-3,
        }
    }
}

impl WavenumberGrid {
    pub fn points(&self, k_max: f64) -> Vec<f64> {
        match self {
            WavenumberGrid::LogSpaced { n, min_fraction } => {
                let n = (*n).max(1);
                if n == 1 {
                    return vec![k_max];
                }
                let lo = (k_max * min_fraction).ln();
                let hi = k_max.ln();
                (0..n)
                    .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
            WavenumberGrid::Uniform { n } => {
                (1..=*n).map(|j| k_max * j as f64 / *n as f64).collect()
            }
            WavenumberGrid::Explicit(v) => v.clone(),
        }
    }
}

/// Which stability set a maximum step is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityMode {
    /// Plain ERK on `du/dt = Qu`: `ρ(R(ΔτQ)) <= 1`.
    Explicit,
    /// Dual time: `ρ(R_M(Δτ, Δt)) <= |σ|`.
    Coupled,
}

/// Inputs for a maximum-pseudo-step search.
#[derive(Debug, Clone)]
pub struct DtauSearch {
    pub ops: FrOperatorSet,
    pub h: f64,
    pub mu: f64,
    pub grid: WavenumberGrid,
    pub mode: StabilityMode,
    /// Initial bisection bracket; `None` means `[1e-8, 10 h / (p+1)^2]`.
    pub bracket: Option<(f64, f64)>,
    pub rel_tol: f64,
}

impl DtauSearch {
    pub fn new(ops: FrOperatorSet, h: f64, mu: f64, mode: StabilityMode) -> Self {
        DtauSearch {
            ops,
            h,
            mu,
            grid: WavenumberGrid::default(),
            mode,
            bracket: None,
            rel_tol: 1e-4,
        }
    }

    fn default_bracket(&self) -> (f64, f64) {
        let n = (self.ops.p + 1) as f64;
        (1e-8, 10.0 * self.h / (n * n))
    }
}

struct WaveSample {
    eigs: Vec<Complex64>,
    sigma: Complex64,
}

/// Largest stable margin over the sampled wavenumbers; `<= 0` is stable.
/// Relative slack on the stability threshold, so modes that sit exactly on
/// it (e.g. the constant mode once converged) are not decided by roundoff.
const MARGIN_RTOL: f64 = 1e-10;

fn nan_max(a: f64, b: f64) -> f64 {
    if b.is_nan() {
        f64::INFINITY
    } else {
        a.max(b)
    }
}

fn worst_margin(samples: &[WaveSample], cfg: &DualTimeConfig, mode: StabilityMode) -> f64 {
    let tab_coeffs = cfg.tab.stability_coefficients();
    let poly = match mode {
        StabilityMode::Coupled => match cfg.polynomial() {
            Ok(p) => Some(p),
            Err(_) => return f64::INFINITY,
        },
        StabilityMode::Explicit => None,
    };
    let mut worst = f64::NEG_INFINITY;
    for s in samples {
        let (rho, threshold) = match mode {
            StabilityMode::Explicit => {
                let rho = s
                    .eigs
                    .iter()
                    .map(|l| linalg::poly_eval(&tab_coeffs, *l * cfg.dtau).norm())
                    .fold(0.0, nan_max);
                (rho, 1.0)
            }
            StabilityMode::Coupled => {
                let poly = poly.as_ref().expect("coupled mode has a polynomial");
                let rho = s
                    .eigs
                    .iter()
                    .map(|l| {
                        amplification_with(
                            poly,
                            *l,
                            cfg,
                            HistoryFactor::Given(s.sigma),
                            AmplificationForm::FiniteSum,
                        )
                        .norm()
                    })
                    .fold(0.0, nan_max);
                (rho, s.sigma.norm())
            }
        };
        let margin = if rho.is_finite() {
            rho - threshold * (1.0 + MARGIN_RTOL)
        } else {
            f64::INFINITY
        };
        worst = worst.max(margin);
    }
    worst
}

const LOW_SCAN: usize = 256;

/// Largest stable pseudo step over a wavenumber sweep of `(0, k_Nq]`, by
/// bracketed bisection.
///
/// `cfg.dtau` is ignored. In explicit mode `cfg.dt` is ignored as well and
/// the sweep covers the spatial limit `(p+1)π/h`. The upper end of the
/// bracket is doubled (up to 30 times) while it is still stable. When the
/// lower end is unstable the bisection starts from the first stable point
/// of a log scan of the bracket.
pub fn dtau_max(search: &DtauSearch, cfg: &DualTimeConfig) -> Result<f64> {
    let k_nq = match search.mode {
        StabilityMode::Coupled => nyquist(search.ops.p, search.h, cfg.dt).k_nq,
        StabilityMode::Explicit => (search.ops.p as f64 + 1.0) * std::f64::consts::PI / search.h,
    };
    let ks = search.grid.points(k_nq);
    let samples: Vec<WaveSample> = ks
        .iter()
        .filter(|k| **k != 0.0)
        .map(|&k| {
            let (_, _, q) = fr_ops::bloch_matrices(&search.ops, search.h, search.mu, k);
            let eigs = Schur::new(&q)
                .map(|s| s.eigenvalues().iter().copied().collect())
                .unwrap_or_default();
            let omega = fr_ops::exact_omega(k, search.mu);
            WaveSample {
                eigs,
                sigma: history_sum(&cfg.bdf, omega, cfg.dt),
            }
        })
        .collect();

    let (mut lo, mut hi) = search.bracket.unwrap_or_else(|| search.default_bracket());
    let stable = |dtau: f64| worst_margin(&samples, &cfg.with_dtau(dtau), search.mode) <= 0.0;
    if !stable(lo) {
        // With damping the stable set need not reach down to zero; start
        // from the first stable point of a log scan instead.
        let (a, b) = (lo.ln(), hi.ln());
        lo = (1..=LOW_SCAN)
            .map(|i| (a + (b - a) * i as f64 / LOW_SCAN as f64).exp())
            .find(|&d| stable(d))
            .ok_or(Error::NoStableStep { lo, hi })?;
        if lo >= hi {
            hi = lo * 2.0;
        }
    }
    let mut expansions = 0;
    while stable(hi) {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 30 {
            return Ok(lo);
        }
    }
    while (hi - lo) > search.rel_tol * lo {
        let mid = 0.5 * (lo + hi);
        if stable(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// [`dtau_max`] for several physical steps at once.
pub fn dtau_max_many(
    search: &DtauSearch,
    cfgs: &[DualTimeConfig],
    exec: Execution,
) -> Vec<Result<f64>> {
    exec.map(cfgs, |cfg| dtau_max(search, cfg))
}
