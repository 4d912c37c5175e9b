//! Physical-space periodic FR solver for advection-diffusion with the same
//! dual-time and p-multigrid machinery as the Fourier analysis.
//!
//! Global vectors store element `e`, node `j` at index `e (p+1) + j`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::DualTimeConfig;
use crate::fr_ops::{build_fr_operators, Correction, FrOperatorSet, NodeSet};
use crate::linalg;
use crate::output::{Cell, Header, Table};
use crate::pmg::{
    build_transfers, element_jacobian, erk_step, run_cycle, CoarseSource, CycleSpec, LevelSystem,
    Smoother,
};
use crate::schemes::make_bdf;
use crate::{CMat, CVec};

/// Uniform periodic mesh of `n` elements of width `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub n: usize,
    pub h: f64,
}

impl Grid1D {
    pub fn new(n: usize, h: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("n", "need at least one element"));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::param("h", format!("must be positive, got {h}")));
        }
        Ok(Grid1D { n, h })
    }

    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }

    /// Periodic element index `e + offset`.
    pub fn wrap(&self, e: usize, offset: isize) -> usize {
        (e as isize + offset).rem_euclid(self.n as isize) as usize
    }

    /// Wavenumber `2πj / (N h)` of the `j`-th periodic Fourier mode.
    pub fn wavenumber(&self, j: i64) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.length()
    }

    /// Positions of every solution point.
    pub fn positions(&self, ops: &FrOperatorSet) -> Vec<f64> {
        let local = ops.physical_points(self.h);
        (0..self.n)
            .flat_map(|e| local.iter().map(move |x| e as f64 * self.h + x))
            .collect()
    }

    /// `f` sampled at every solution point.
    pub fn sample(&self, ops: &FrOperatorSet, f: impl Fn(f64) -> Complex64) -> CVec {
        let x = self.positions(ops);
        CVec::from_iterator(x.len(), x.iter().map(|&x| f(x)))
    }

    /// `exp(i k x)` at every solution point.
    pub fn bloch_wave(&self, ops: &FrOperatorSet, k: f64) -> CVec {
        self.sample(ops, |x| Complex64::from_polar(1.0, k * x))
    }

    /// Global vector whose element `e` block is `exp(i k e h) v`.
    pub fn replicate(&self, v: &CVec, k: f64) -> CVec {
        let n = v.len();
        let mut out = CVec::zeros(self.n * n);
        for e in 0..self.n {
            let phase = Complex64::from_polar(1.0, k * e as f64 * self.h);
            out.rows_mut(e * n, n).copy_from(&(v * phase));
        }
        out
    }
}

/// `-∂u/∂x + μ ∂²u/∂x²` on a periodic grid as a block stencil over element
/// offsets `-2..=2`.
#[derive(Debug, Clone)]
pub struct SpatialOperator {
    pub grid: Grid1D,
    pub mu: f64,
    pub p: usize,
    blocks: Vec<(isize, CMat)>,
}

impl SpatialOperator {
    pub fn new(ops: &FrOperatorSet, grid: Grid1D, mu: f64) -> Self {
        let (a, d) = (-2.0 / grid.h, mu * 4.0 / (grid.h * grid.h));
        let blocks = vec![
            (-2, &ops.bm2 * d),
            (-1, ops.cm() * a + &ops.bm * d),
            (0, ops.c0() * a + &ops.b0 * d),
            (1, ops.cp() * a + &ops.bp * d),
            (2, &ops.bp2 * d),
        ];
        let blocks = blocks
            .into_iter()
            .filter(|(_, m)| m.amax() > 0.0)
            .map(|(o, m)| (o, linalg::to_complex(&m)))
            .collect();
        SpatialOperator {
            grid,
            mu,
            p: ops.p,
            blocks,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.n * (self.p + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn apply(&self, u: &CVec) -> CVec {
        let n = self.p + 1;
        let mut out = CVec::zeros(u.len());
        for e in 0..self.grid.n {
            let mut acc = out.rows_mut(e * n, n);
            for (offset, block) in &self.blocks {
                let src = self.grid.wrap(e, *offset);
                acc.gemv(
                    Complex64::new(1.0, 0.0),
                    block,
                    &u.rows(src * n, n),
                    Complex64::new(1.0, 0.0),
                );
            }
        }
        out
    }
}

/// Spatial residual `-∂u/∂x + μ ∂²u/∂x²` of a global vector.
pub fn residual(u: &CVec, mu: f64, ops: &FrOperatorSet, grid: &Grid1D) -> CVec {
    SpatialOperator::new(ops, *grid, mu).apply(u)
}

fn blockwise(m: &CMat, v: &CVec, n_elems: usize) -> CVec {
    let (rows, cols) = m.shape();
    let mut out = CVec::zeros(n_elems * rows);
    for e in 0..n_elems {
        out.rows_mut(e * rows, rows).gemv(
            Complex64::new(1.0, 0.0),
            m,
            &v.rows(e * cols, cols),
            Complex64::new(0.0, 0.0),
        );
    }
    out
}

struct TdLevel {
    op: SpatialOperator,
    dtau: f64,
    jinv: Option<CMat>,
}

/// Physical-space operators for every degree from `l_min` to `p`.
pub struct TimeDomainLevels {
    p: usize,
    grid: Grid1D,
    dt_b0: f64,
    tab: crate::schemes::ButcherTableau,
    smoother: Smoother,
    levels: Vec<Option<TdLevel>>,
    rho: Vec<CMat>,
    pi: Vec<CMat>,
}

impl TimeDomainLevels {
    pub fn new(
        fine: &FrOperatorSet,
        grid: Grid1D,
        mu: f64,
        cfg: &DualTimeConfig,
        l_min: usize,
        f_tau: f64,
        smoother: Smoother,
    ) -> Result<Self> {
        cfg.validate()?;
        smoother.validate()?;
        let p = fine.p;
        if l_min > p {
            return Err(Error::param("l_min", format!("{l_min} exceeds p={p}")));
        }
        if !(f_tau >= 1.0) {
            return Err(Error::param("f_tau", format!("must be >= 1, got {f_tau}")));
        }
        let dt_b0 = cfg.dt_b0();
        let mut levels: Vec<Option<TdLevel>> = (0..=p).map(|_| None).collect();
        for l in l_min..=p {
            let ops = if l == p {
                fine.clone()
            } else {
                build_fr_operators(
                    l,
                    fine.alpha_a,
                    fine.alpha_d,
                    &NodeSet::GaussLegendre,
                    Correction::Dg,
                )?
            };
            let jinv = match smoother {
                Smoother::Erk => None,
                Smoother::ElementJacobi { .. } => Some(
                    linalg::inverse(&element_jacobian(&ops, grid.h, mu, dt_b0)).ok_or_else(
                        || Error::Singular(format!("element Jacobian block at degree {l}")),
                    )?,
                ),
            };
            levels[l] = Some(TdLevel {
                op: SpatialOperator::new(&ops, grid, mu),
                dtau: cfg.dtau * f_tau.powi((p - l) as i32),
                jinv,
            });
        }
        let (rho, pi) = if p >= 1 {
            let tr = build_transfers(p)?;
            (
                tr.restrict.iter().map(linalg::to_complex).collect(),
                tr.prolong.iter().map(linalg::to_complex).collect(),
            )
        } else {
            (Vec::new(), Vec::new())
        };
        Ok(TimeDomainLevels {
            p,
            grid,
            dt_b0,
            tab: cfg.tab.clone(),
            smoother,
            levels,
            rho,
            pi,
        })
    }

    fn level(&self, l: usize) -> &TdLevel {
        self.levels[l]
            .as_ref()
            .unwrap_or_else(|| panic!("degree {l} was not built"))
    }

    pub fn operator(&self, l: usize) -> &SpatialOperator {
        &self.level(l).op
    }
}

impl LevelSystem for TimeDomainLevels {
    fn finest(&self) -> usize {
        self.p
    }

    fn dt_b0(&self) -> f64 {
        self.dt_b0
    }

    fn apply_t(&self, level: usize, u: &CVec) -> CVec {
        self.operator(level).apply(u) - u.unscale(self.dt_b0)
    }

    fn smooth(
        &self,
        level: usize,
        steps: usize,
        mut u: CVec,
        src: &CVec,
        r: Option<&CVec>,
    ) -> Result<CVec> {
        let lv = self.level(level);
        match self.smoother {
            Smoother::Erk => {
                for _ in 0..steps {
                    u = erk_step(
                        &self.tab,
                        lv.dtau,
                        self.dt_b0,
                        &|v| lv.op.apply(v),
                        &u,
                        src,
                        r,
                    );
                }
            }
            Smoother::ElementJacobi { kappa } => {
                let jinv = lv.jinv.as_ref().expect("EJ levels carry Jacobian inverses");
                for _ in 0..steps {
                    let mut res = self.residual(level, &u, src);
                    if let Some(r) = r {
                        res -= r;
                    }
                    u -= blockwise(jinv, &res, self.grid.n) * Complex64::new(kappa, 0.0);
                }
            }
        }
        Ok(u)
    }

    fn restrict(&self, level: usize, v: &CVec) -> CVec {
        blockwise(&self.rho[level - 1], v, self.grid.n)
    }

    fn prolong(&self, level: usize, v: &CVec) -> CVec {
        blockwise(&self.pi[level - 1], v, self.grid.n)
    }
}

/// Outcome of one physical step.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub u: CVec,
    /// `‖T u - src / (Δt B_0)‖` after every pseudo step (or cycle).
    pub residual_norms: Vec<f64>,
}

/// Dual-time stepping on the physical grid, optionally wrapped in
/// p-multigrid cycles.
pub struct DualTimeSolver {
    levels: TimeDomainLevels,
    cfg: DualTimeConfig,
    spec: Option<CycleSpec>,
    coarse: CoarseSource,
    /// Abort when `‖u‖` exceeds this multiple of its starting value.
    pub divergence_factor: f64,
}

impl DualTimeSolver {
    /// Without a cycle each physical step takes `cfg.m` pseudo steps; with
    /// one it takes `cfg.m` cycles.
    pub fn new(
        fine: &FrOperatorSet,
        grid: Grid1D,
        mu: f64,
        cfg: &DualTimeConfig,
        spec: Option<CycleSpec>,
        smoother: Smoother,
    ) -> Result<Self> {
        let (l_min, f_tau) = match &spec {
            Some(s) => {
                s.validate()?;
                if s.finest() != fine.p {
                    return Err(Error::InvalidCycle(format!(
                        "cycle starts at degree {} but the operators are degree {}",
                        s.finest(),
                        fine.p
                    )));
                }
                (s.coarsest(), s.f_tau)
            }
            None => (fine.p, 1.0),
        };
        Ok(DualTimeSolver {
            levels: TimeDomainLevels::new(fine, grid, mu, cfg, l_min, f_tau, smoother)?,
            cfg: cfg.clone(),
            spec,
            coarse: CoarseSource::Restricted,
            divergence_factor: 1e6,
        })
    }

    pub fn levels(&self) -> &TimeDomainLevels {
        &self.levels
    }

    /// `sum_l B_{l+1} u_{n-l}` from `history = [u_n, u_{n-1}, ...]`.
    pub fn history_sum(&self, history: &[CVec]) -> Result<CVec> {
        let coeffs = self.cfg.bdf.history();
        if history.len() < coeffs.len() {
            return Err(Error::param(
                "history",
                format!(
                    "BDF{} needs {} previous states, got {}",
                    self.cfg.bdf.order(),
                    coeffs.len(),
                    history.len()
                ),
            ));
        }
        let mut src = CVec::zeros(history[0].len());
        for (b, u) in coeffs.iter().zip(history) {
            src.axpy(Complex64::new(*b, 0.0), u, Complex64::new(1.0, 0.0));
        }
        Ok(src)
    }

    /// Pseudo residual `T u - src / (Δt B_0)` on the finest level.
    pub fn pseudo_residual(&self, u: &CVec, src: &CVec) -> CVec {
        self.levels.residual(self.levels.p, u, src)
    }

    /// Advance one physical step from `u_{n+1,0} = u_n`.
    pub fn step(&self, history: &[CVec]) -> Result<StepReport> {
        self.step_observed(history, &mut |_, _| {})
    }

    /// As [`DualTimeSolver::step`], calling `observe(m, u)` after every
    /// pseudo step or cycle `m = 1..`.
    pub fn step_observed(
        &self,
        history: &[CVec],
        observe: &mut dyn FnMut(usize, &CVec),
    ) -> Result<StepReport> {
        let src = self.history_sum(history)?;
        let mut u = history[0].clone();
        let start = linalg::norm2(&u).max(f64::MIN_POSITIVE);
        let mut residual_norms = Vec::with_capacity(self.cfg.m);
        let p = self.levels.p;
        for m in 1..=self.cfg.m {
            u = match &self.spec {
                Some(spec) => run_cycle(&self.levels, spec, &u, &src, self.coarse)?,
                None => self.levels.smooth(p, 1, u, &src, None)?,
            };
            let growth = linalg::norm2(&u) / start;
            if !(growth <= self.divergence_factor) {
                return Err(Error::Diverged { step: m, growth });
            }
            residual_norms.push(linalg::norm2(&self.pseudo_residual(&u, &src)));
            observe(m, &u);
        }
        Ok(StepReport { u, residual_norms })
    }
}

/// March `n_steps` physical steps from `u0`, bootstrapping BDF`s` with
/// BDF1, BDF2, ... while history accumulates. Returns `[u_0, ..., u_n]`.
pub fn integrate(
    fine: &FrOperatorSet,
    grid: Grid1D,
    mu: f64,
    cfg: &DualTimeConfig,
    spec: Option<CycleSpec>,
    smoother: Smoother,
    u0: CVec,
    n_steps: usize,
) -> Result<Vec<CVec>> {
    let order = cfg.bdf.order();
    let mut solvers = Vec::with_capacity(order);
    for s in 1..=order {
        let c = DualTimeConfig {
            bdf: make_bdf(s)?,
            ..cfg.clone()
        };
        solvers.push(DualTimeSolver::new(
            fine,
            grid,
            mu,
            &c,
            spec.clone(),
            smoother,
        )?);
    }
    let mut states = vec![u0];
    for _ in 0..n_steps {
        let s = states.len().min(order);
        let history: Vec<CVec> = states.iter().rev().take(s).cloned().collect();
        let next = solvers[s - 1].step(&history)?.u;
        states.push(next);
    }
    Ok(states)
}

/// Snapshot table with columns `element,node,x,re,im`.
pub fn snapshot_table(ops: &FrOperatorSet, grid: &Grid1D, u: &CVec, header: Header) -> Table {
    let x = grid.positions(ops);
    let n = ops.n_points();
    let mut t = Table::new(header, &["element", "node", "x", "re", "im"]);
    for (i, (xi, ui)) in x.iter().zip(u.iter()).enumerate() {
        t.push(vec![
            Cell::from(i / n),
            Cell::from(i % n),
            Cell::from(*xi),
            Cell::from(ui.re),
            Cell::from(ui.im),
        ]);
    }
    t
}

/// Write a snapshot CSV.
pub fn write_snapshot<W: Write>(
    out: W,
    ops: &FrOperatorSet,
    grid: &Grid1D,
    u: &CVec,
    header: Header,
) -> Result<()> {
    snapshot_table(ops, grid, u, header).write(out)
}
