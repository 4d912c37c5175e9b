//! Parameter sweeps behind each analysis: unity-amplification contours,
//! pseudo-step limits, error histories, contraction factors, mode energies
//! and per-cycle convergence. Every sweep is a pure map over its grid and
//! returns an [`output::Table`](crate::output::Table).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fourier::{
    dtau_max, error_history, nyquist, scalar_amplification, AmplificationForm, DtauSearch,
    DualTimeConfig, HistoryFactor, StabilityMode, WavenumberGrid,
};
use crate::fr_ops::{build_bloch, BlochOperator, FrOperatorSet};
use crate::linalg;
use crate::output::{Cell, Header, Table};
use crate::pmg::{
    contraction, run_fourier_cycles, CoarseSource, ContractionForm, CycleRecord, CycleSpec,
    FourierLevels, FourierRunConfig, Smoother,
};

/// Rectangular scan of `z = λΔτ` for unity-amplification contours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityScan {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    /// Pseudo-step counts to contour.
    pub ms: Vec<usize>,
    /// Also contour the uncoupled `|R(z)| = 1` boundary.
    pub erk_reference: bool,
    pub history: ContourHistory,
}

/// History model for [`sweep_stability`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContourHistory {
    /// `u_{n-l} = exp(λlΔt) u_n`.
    #[default]
    Forward,
    /// `u_{n-l} = exp(-λlΔt) u_n`, the exact history of `u' = λu`.
    Ode,
}

impl Default for StabilityScan {
    fn default() -> Self {
        StabilityScan {
            x_min: -6.0,
            x_max: 1.0,
            y_min: -5.0,
            y_max: 5.0,
            nx: 401,
            ny: 401,
            ms: vec![1, 2, 5, 10],
            erk_reference: true,
            history: ContourHistory::Forward,
        }
    }
}

/// Piecewise-linear `|amp| = 1` curve as unordered segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub label: String,
    pub segments: Vec<[(f64, f64); 2]>,
}

impl Contour {
    /// Leftmost crossing of the real axis, if any.
    pub fn leftmost_real_crossing(&self) -> Option<f64> {
        self.segments
            .iter()
            .filter_map(|[(x0, y0), (x1, y1)]| {
                if (y0 <= &0.0 && y1 >= &0.0) || (y0 >= &0.0 && y1 <= &0.0) {
                    if y0 == y1 {
                        Some(x0.min(*x1))
                    } else {
                        Some(x0 + (x1 - x0) * (-y0) / (y1 - y0))
                    }
                } else {
                    None
                }
            })
            .min_by(f64::total_cmp)
    }
}

/// Marching squares on `f` sampled at `xs × ys` (`f[j][i]` at `(xs[i], ys[j])`),
/// returning segments of the zero level set.
pub fn marching_squares(xs: &[f64], ys: &[f64], f: &[Vec<f64>]) -> Vec<[(f64, f64); 2]> {
    let mut segs = Vec::new();
    let lerp = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        let t = a.2 / (a.2 - b.2);
        (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
    };
    for j in 0..ys.len().saturating_sub(1) {
        for i in 0..xs.len().saturating_sub(1) {
            // Corners counter-clockwise from the lower left.
            let c = [
                (xs[i], ys[j], f[j][i]),
                (xs[i + 1], ys[j], f[j][i + 1]),
                (xs[i + 1], ys[j + 1], f[j + 1][i + 1]),
                (xs[i], ys[j + 1], f[j + 1][i]),
            ];
            let mut pts = Vec::with_capacity(4);
            for e in 0..4 {
                let (a, b) = (c[e], c[(e + 1) % 4]);
                if (a.2 < 0.0) != (b.2 < 0.0) {
                    pts.push(lerp(a, b));
                }
            }
            match pts.len() {
                2 => segs.push([pts[0], pts[1]]),
                4 => {
                    let centre = c.iter().map(|v| v.2).sum::<f64>() / 4.0;
                    if (centre < 0.0) == (c[0].2 < 0.0) {
                        segs.push([pts[0], pts[3]]);
                        segs.push([pts[1], pts[2]]);
                    } else {
                        segs.push([pts[0], pts[1]]);
                        segs.push([pts[2], pts[3]]);
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Unity-amplification contours of the coupled scheme for each `m`, plus
/// the uncoupled reference when requested. `cfg.dt`, `cfg.dtau`, BDF and
/// tableau are taken from `cfg`; `cfg.m` is ignored.
pub fn sweep_stability(
    cfg: &DualTimeConfig,
    scan: &StabilityScan,
    exec: Execution,
) -> Result<Vec<Contour>> {
    if scan.nx < 2 || scan.ny < 2 {
        return Err(Error::param("nx/ny", "need at least two samples per axis"));
    }
    let xs = linspace(scan.x_min, scan.x_max, scan.nx);
    let ys = linspace(scan.y_min, scan.y_max, scan.ny);
    let rows: Vec<usize> = (0..ys.len()).collect();
    let clamp = |v: f64| if v.is_finite() { v - 1.0 } else { f64::MAX };
    let history = match scan.history {
        ContourHistory::Forward => HistoryFactor::Forward,
        ContourHistory::Ode => HistoryFactor::Ode,
    };
    let mut out = Vec::new();
    for &m in &scan.ms {
        let c = cfg.with_m(m);
        let field: Vec<Vec<f64>> = exec
            .map(&rows, |&j| {
                xs.iter()
                    .map(|&x| {
                        let lambda = Complex64::new(x, ys[j]) / c.dtau;
                        scalar_amplification(lambda, &c, history, AmplificationForm::FiniteSum)
                            .map(|a| clamp(a.norm()))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .into_iter()
            .collect::<Result<_>>()?;
        out.push(Contour {
            label: format!("m={m}"),
            segments: marching_squares(&xs, &ys, &field),
        });
    }
    if scan.erk_reference {
        let coeffs = cfg.tab.stability_coefficients();
        let field: Vec<Vec<f64>> = exec.map(&rows, |&j| {
            xs.iter()
                .map(|&x| clamp(linalg::poly_eval(&coeffs, Complex64::new(x, ys[j])).norm()))
                .collect()
        });
        out.push(Contour {
            label: "erk".into(),
            segments: marching_squares(&xs, &ys, &field),
        });
    }
    for c in &out {
        if c.segments.is_empty() {
            log::warn!(
                "no |amp| = 1 contour for {} inside the scan window",
                c.label
            );
        }
    }
    Ok(out)
}

/// Columns `curve,segment,x0,y0,x1,y1` in `z = λΔτ`.
pub fn contour_table(contours: &[Contour], header: Header) -> Table {
    let mut t = Table::new(header, &["curve", "segment", "x0", "y0", "x1", "y1"]);
    for c in contours {
        for (s, [(x0, y0), (x1, y1)]) in c.segments.iter().enumerate() {
            t.push(vec![
                Cell::from(c.label.as_str()),
                Cell::from(s),
                Cell::from(*x0),
                Cell::from(*y0),
                Cell::from(*x1),
                Cell::from(*y1),
            ]);
        }
    }
    t
}

/// `Δτ_max` of the uncoupled explicit scheme for each `(p, μ)`.
/// Columns `p,mu,dtau_max`.
pub fn sweep_cfl_explicit(
    ops: &[FrOperatorSet],
    mus: &[f64],
    h: f64,
    cfg: &DualTimeConfig,
    grid: &WavenumberGrid,
    exec: Execution,
    header: Header,
) -> Result<Table> {
    let points: Vec<(usize, f64)> = (0..ops.len())
        .flat_map(|i| mus.iter().map(move |&mu| (i, mu)))
        .collect();
    let values = exec.map(&points, |&(i, mu)| {
        let mut search = DtauSearch::new(ops[i].clone(), h, mu, StabilityMode::Explicit);
        search.grid = grid.clone();
        dtau_max(&search, cfg)
    });
    let mut t = Table::new(header, &["p", "mu", "dtau_max"]);
    for (&(i, mu), v) in points.iter().zip(values) {
        t.push(vec![Cell::from(ops[i].p), Cell::from(mu), Cell::from(v?)]);
    }
    Ok(t)
}

/// `Δτ_max` of the coupled scheme for each `(m, Δt)`. Columns `m,dt,dtau_max`.
pub fn sweep_cfl_coupled(
    ops: &FrOperatorSet,
    mu: f64,
    h: f64,
    cfg: &DualTimeConfig,
    ms: &[usize],
    dts: &[f64],
    grid: &WavenumberGrid,
    exec: Execution,
    header: Header,
) -> Result<Table> {
    let points: Vec<(usize, f64)> = ms
        .iter()
        .flat_map(|&m| dts.iter().map(move |&dt| (m, dt)))
        .collect();
    let mut search = DtauSearch::new(ops.clone(), h, mu, StabilityMode::Coupled);
    search.grid = grid.clone();
    let values = exec.map(&points, |&(m, dt)| {
        let c = DualTimeConfig {
            dt,
            dtau: dt.min(cfg.dtau),
            m,
            ..cfg.clone()
        };
        dtau_max(&search, &c)
    });
    let mut t = Table::new(header, &["m", "dt", "dtau_max"]);
    for (&(m, dt), v) in points.iter().zip(values) {
        t.push(vec![Cell::from(m), Cell::from(dt), Cell::from(v?)]);
    }
    Ok(t)
}

/// Error norm after each pseudo step for each normalised wavenumber
/// `k̂ ∈ (0, π]`. Columns `k_hat,k,m,error`.
pub fn sweep_error(
    ops: &FrOperatorSet,
    h: f64,
    mu: f64,
    cfg: &DualTimeConfig,
    k_hats: &[f64],
    exec: Execution,
    header: Header,
) -> Result<Table> {
    let nq = nyquist(ops.p, h, cfg.dt);
    let rows = exec.map(k_hats, |&k_hat| {
        let k = nq.wavenumber(k_hat);
        let op = build_bloch(ops, h, mu, k)?;
        Ok::<_, Error>((k, error_history(&op, cfg, op.omega(), cfg.m)?))
    });
    let mut t = Table::new(header, &["k_hat", "k", "m", "error"]);
    for (&k_hat, r) in k_hats.iter().zip(rows) {
        let (k, hist) = r?;
        for (m, e) in hist.iter().enumerate() {
            t.push(vec![
                Cell::from(k_hat),
                Cell::from(k),
                Cell::from(m),
                Cell::from(*e),
            ]);
        }
    }
    Ok(t)
}

/// Fixed settings of a cycle analysis at one wavenumber.
#[derive(Debug, Clone)]
pub struct CycleSetup {
    pub op: BlochOperator,
    pub cfg: DualTimeConfig,
    pub smoother: Smoother,
    pub coarse: CoarseSource,
}

impl CycleSetup {
    pub fn new(op: BlochOperator, cfg: DualTimeConfig, smoother: Smoother) -> Self {
        CycleSetup {
            op,
            cfg,
            smoother,
            coarse: CoarseSource::Restricted,
        }
    }

    /// Records `0..=n_cycles` of `spec` applied to the first physical step.
    pub fn run(&self, spec: &CycleSpec, n_cycles: usize) -> Result<Vec<CycleRecord>> {
        let levels = FourierLevels::new(
            &self.op,
            &self.cfg,
            spec.coarsest(),
            spec.f_tau,
            self.smoother,
        )?;
        run_fourier_cycles(
            &self.op,
            &levels,
            &self.cfg,
            spec,
            &FourierRunConfig {
                n_cycles,
                coarse: self.coarse,
            },
        )
    }

    /// Contraction per fine pseudo step over the first cycle.
    pub fn contraction(&self, spec: &CycleSpec, form: ContractionForm) -> Result<f64> {
        let recs = self.run(spec, 1)?;
        contraction(
            recs[0].error,
            recs[1].error,
            spec.fine_steps(),
            self.op.base.p,
            form,
        )
    }
}

/// Fine pseudo time at which the error first falls to `threshold`,
/// interpolating `log ‖e‖` linearly between records.
pub fn crossing_time(records: &[CycleRecord], threshold: f64) -> Option<f64> {
    let first = records.first()?;
    if first.error <= threshold {
        return Some(first.tau);
    }
    records.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        (b.error <= threshold).then(|| {
            let (la, lb, lt) = (a.error.ln(), b.error.ln(), threshold.ln());
            a.tau + (b.tau - a.tau) * (la - lt) / (la - lb)
        })
    })
}

/// Contraction sweep over `Δt/Δτ` at fixed `Δτ`.
#[derive(Debug, Clone)]
pub struct ContractionSweep {
    pub ops: FrOperatorSet,
    pub h: f64,
    pub mu: f64,
    pub k: f64,
    pub cfg: DualTimeConfig,
    pub ratios: Vec<f64>,
    pub cycle: CycleSpec,
    pub smoother: Smoother,
    pub form: ContractionForm,
}

/// One point of a contraction sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionPoint {
    pub ratio: f64,
    pub dt: f64,
    pub gamma_base: f64,
    pub gamma_pmg: f64,
}

impl ContractionPoint {
    /// `γ_pmg / γ_base`; below one when the cycle helps.
    pub fn relative(&self) -> f64 {
        self.gamma_pmg / self.gamma_base
    }
}

/// `γ` of the cycle and of plain smoothing with the same number of fine
/// steps, at each `Δt = ratio·Δτ`.
pub fn sweep_contraction(
    sweep: &ContractionSweep,
    exec: Execution,
) -> Result<Vec<ContractionPoint>> {
    let op = build_bloch(&sweep.ops, sweep.h, sweep.mu, sweep.k)?;
    let base = CycleSpec::single(sweep.ops.p, sweep.cycle.fine_steps());
    exec.map(&sweep.ratios, |&ratio| {
        let dt = ratio * sweep.cfg.dtau;
        let cfg = DualTimeConfig {
            dt,
            ..sweep.cfg.clone()
        };
        cfg.validate()?;
        let setup = CycleSetup::new(op.clone(), cfg, sweep.smoother);
        Ok(ContractionPoint {
            ratio,
            dt,
            gamma_base: setup.contraction(&base, sweep.form)?,
            gamma_pmg: setup.contraction(&sweep.cycle, sweep.form)?,
        })
    })
    .into_iter()
    .collect()
}

/// Index of the largest benefit (smallest `γ_pmg/γ_base`).
pub fn argmax_benefit(points: &[ContractionPoint]) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.relative().is_finite())
        .min_by(|a, b| a.1.relative().total_cmp(&b.1.relative()))
        .map(|(i, _)| i)
}

/// Columns `ratio,dt,gamma_base,gamma_pmg,relative,argmax`.
pub fn contraction_table(points: &[ContractionPoint], header: Header) -> Table {
    let best = argmax_benefit(points);
    let mut t = Table::new(
        header,
        &[
            "ratio",
            "dt",
            "gamma_base",
            "gamma_pmg",
            "relative",
            "argmax",
        ],
    );
    for (i, p) in points.iter().enumerate() {
        t.push(vec![
            Cell::from(p.ratio),
            Cell::from(p.dt),
            Cell::from(p.gamma_base),
            Cell::from(p.gamma_pmg),
            Cell::from(p.relative()),
            Cell::from(usize::from(best == Some(i))),
        ]);
    }
    t
}

/// `Δτ_max` of pure advection with the uncoupled scheme.
pub fn advection_dtau_max(ops: &FrOperatorSet, h: f64, cfg: &DualTimeConfig) -> Result<f64> {
    dtau_max(
        &DtauSearch::new(ops.clone(), h, 0.0, StabilityMode::Explicit),
        cfg,
    )
}

/// Per-cycle rows `cycle,tau,error,error_exact,beta0,beta1`, where `beta_j`
/// is the magnitude of the `j`-th eigenmode coordinate of the solution.
pub fn cycle_run_table(records: &[CycleRecord], header: Header) -> Table {
    let mut t = Table::new(
        header,
        &["cycle", "tau", "error", "error_exact", "beta0", "beta1"],
    );
    for r in records {
        let b = |j: usize| r.modes.get(j).map_or(f64::NAN, |v| v.norm());
        t.push(vec![
            Cell::from(r.cycle),
            Cell::from(r.tau),
            Cell::from(r.error),
            Cell::from(r.error_exact),
            Cell::from(b(0)),
            Cell::from(b(1)),
        ]);
    }
    t
}

/// `|W^{-1}(u - u_∞)|_j²` for each record.
pub fn mode_energies(records: &[CycleRecord]) -> Vec<Vec<f64>> {
    records
        .iter()
        .map(|r| r.error_modes.iter().map(|v| v.norm_sqr()).collect())
        .collect()
}

/// Rows `cycle,tau,mode,energy`.
pub fn mode_energy_table(records: &[CycleRecord], header: Header) -> Table {
    let mut t = Table::new(header, &["cycle", "tau", "mode", "energy"]);
    for (r, e) in records.iter().zip(mode_energies(records)) {
        for (j, v) in e.iter().enumerate() {
            t.push(vec![
                Cell::from(r.cycle),
                Cell::from(r.tau),
                Cell::from(j),
                Cell::from(*v),
            ]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fr_ops::{build_fr_operators, Correction, NodeSet};
    use crate::schemes::{make_bdf, ButcherTableau};
    use std::f64::consts::PI;

    fn cfg(dt: f64, dtau: f64, m: usize) -> DualTimeConfig {
        DualTimeConfig::new(dt, dtau, m, make_bdf(2).unwrap(), ButcherTableau::ssprk3()).unwrap()
    }

    fn small_scan() -> StabilityScan {
        StabilityScan {
            nx: 141,
            ny: 201,
            ms: vec![1, 10],
            ..StabilityScan::default()
        }
    }

    #[test]
    fn marching_squares_traces_a_circle() {
        let xs = linspace(-2.0, 2.0, 81);
        let ys = linspace(-2.0, 2.0, 81);
        let f: Vec<Vec<f64>> = ys
            .iter()
            .map(|y| xs.iter().map(|x| x * x + y * y - 1.0).collect())
            .collect();
        let segs = marching_squares(&xs, &ys, &f);
        assert!(!segs.is_empty());
        for s in &segs {
            for (x, y) in s {
                assert!(((x * x + y * y).sqrt() - 1.0).abs() < 5e-3);
            }
        }
        let c = Contour {
            label: "c".into(),
            segments: segs,
        };
        assert!((c.leftmost_real_crossing().unwrap() + 1.0).abs() < 1e-3);
    }

    #[test]
    fn erk_reference_matches_ssprk3_real_limit() {
        let contours =
            sweep_stability(&cfg(0.2, 0.05, 1), &small_scan(), Execution::Sequential).unwrap();
        let erk = contours.iter().find(|c| c.label == "erk").unwrap();
        // 1 + z + z²/2 + z³/6 = -1 at z ≈ -2.5127.
        assert!((erk.leftmost_real_crossing().unwrap() + 2.5127).abs() < 0.02);
    }

    #[test]
    fn contours_are_symmetric_about_real_axis() {
        let contours =
            sweep_stability(&cfg(0.2, 0.05, 1), &small_scan(), Execution::Parallel).unwrap();
        for c in &contours {
            for [(x0, y0), (x1, y1)] in &c.segments {
                let mirrored = c.segments.iter().any(|[(a0, b0), (a1, b1)]| {
                    let close = |p: (f64, f64), q: (f64, f64)| {
                        (p.0 - q.0).abs() < 1e-9 && (p.1 + q.1).abs() < 1e-9
                    };
                    (close((*a0, *b0), (*x0, *y0)) && close((*a1, *b1), (*x1, *y1)))
                        || (close((*a0, *b0), (*x1, *y1)) && close((*a1, *b1), (*x0, *y0)))
                });
                assert!(mirrored, "{}: ({x0},{y0})-({x1},{y1})", c.label);
            }
        }
    }

    #[test]
    fn pseudo_step_count_both_grows_and_shrinks_the_region() {
        let c = cfg(0.2, 0.05, 1);
        let (mut grown, mut shrunk) = (0, 0);
        for i in 0..71 {
            for j in 0..101 {
                let z = Complex64::new(-6.0 + 0.1 * i as f64, -5.0 + 0.1 * j as f64);
                let amp = |m: usize| {
                    scalar_amplification(
                        z / c.dtau,
                        &c.with_m(m),
                        HistoryFactor::Forward,
                        AmplificationForm::FiniteSum,
                    )
                    .unwrap()
                    .norm()
                };
                match (amp(1) <= 1.0, amp(10) <= 1.0) {
                    (false, true) => grown += 1,
                    (true, false) => shrunk += 1,
                    _ => {}
                }
            }
        }
        assert!(grown > 0 && shrunk > 0, "grown {grown} shrunk {shrunk}");
    }

    #[test]
    fn empty_window_gives_empty_contours() {
        let scan = StabilityScan {
            x_min: -1.5,
            x_max: -1.4,
            y_min: -0.05,
            y_max: 0.05,
            nx: 5,
            ny: 5,
            ms: vec![1],
            erk_reference: false,
            history: ContourHistory::Forward,
        };
        let c = sweep_stability(&cfg(0.2, 0.05, 1), &scan, Execution::Sequential).unwrap();
        assert!(c[0].segments.is_empty());
        assert_eq!(contour_table(&c, Header::new()).rows.len(), 0);
    }

    #[test]
    fn explicit_limit_decreases_with_degree() {
        let ops: Vec<_> = (1..=4)
            .map(|p| {
                build_fr_operators(p, 1.0, 0.5, &NodeSet::GaussLegendre, Correction::Dg).unwrap()
            })
            .collect();
        let t = sweep_cfl_explicit(
            &ops,
            &[0.01],
            1.0,
            &cfg(1.0, 0.01, 1),
            &WavenumberGrid::Uniform { n: 24 },
            Execution::Parallel,
            Header::new(),
        )
        .unwrap();
        let v: Vec<f64> = t
            .rows
            .iter()
            .map(|r| match r[2] {
                Cell::Float(x) => x,
                _ => unreachable!(),
            })
            .collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let ops = build_fr_operators(3, 1.0, 0.5, &NodeSet::GaussLegendre, Correction::Dg).unwrap();
        let c = cfg(0.07, 7e-3, 30);
        let k_hats = [PI / 16.0, PI / 8.0, PI / 2.0];
        let a = sweep_error(
            &ops,
            1.0,
            0.1,
            &c,
            &k_hats,
            Execution::Sequential,
            Header::new(),
        )
        .unwrap();
        let b = sweep_error(
            &ops,
            1.0,
            0.1,
            &c,
            &k_hats,
            Execution::Parallel,
            Header::new(),
        )
        .unwrap();
        assert_eq!(a.to_string_lossy(), b.to_string_lossy());
    }

    #[test]
    fn crossing_time_interpolates_logarithmically() {
        let rec = |cycle: usize, tau: f64, error: f64| CycleRecord {
            cycle,
            tau,
            error,
            error_exact: error,
            modes: crate::CVec::zeros(1),
            error_modes: crate::CVec::zeros(1),
        };
        let rs = [rec(0, 0.0, 1.0), rec(1, 1.0, 1e-2), rec(2, 2.0, 1e-4)];
        assert!((crossing_time(&rs, 1e-3).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(crossing_time(&rs, 2.0), Some(0.0));
        assert_eq!(crossing_time(&rs, 1e-5), None);
    }

    #[test]
    fn single_leg_cycle_matches_its_base() {
        let ops = build_fr_operators(3, 1.0, 0.5, &NodeSet::GaussLegendre, Correction::Dg).unwrap();
        let sweep = ContractionSweep {
            ops,
            h: 1.0,
            mu: 0.1,
            k: PI / 4.0,
            cfg: cfg(0.05, 5e-3, 1),
            ratios: vec![2.0, 10.0, 100.0],
            cycle: CycleSpec::single(3, 2),
            smoother: Smoother::Erk,
            form: ContractionForm::Ratio,
        };
        let pts = sweep_contraction(&sweep, Execution::Parallel).unwrap();
        for p in &pts {
            assert!((p.relative() - 1.0).abs() < 1e-12);
        }
        let t = contraction_table(&pts, Header::new());
        assert_eq!(t.rows.len(), 3);
    }
}
