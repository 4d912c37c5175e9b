//! Exact Fourier-space execution of p-multigrid cycles at one wavenumber.

use num_complex::Complex64;

use super::smoother::{element_jacobian_inverse, erk_step, Smoother};
use super::transfer::build_transfers;
use super::{run_cycle, CoarseSource, CycleSpec, LevelSystem};
use crate::error::{Error, Result};
use crate::fourier::{history_sum, pseudo_steady_state, DualTimeConfig, StepMatrices};
use crate::fr_ops::{bloch_matrices, build_fr_operators, BlochOperator, Correction, NodeSet};
use crate::linalg;
use crate::schemes::ButcherTableau;
use crate::{CMat, CVec};

/// How an ERK smoothing step is evaluated on Bloch matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErkForm {
    /// `u <- P u - C src - K r` with precomputed matrix polynomials.
    #[default]
    Polynomial,
    /// Stage-by-stage evaluation of the tableau.
    Stages,
}

#[derive(Debug, Clone)]
struct Level {
    q: CMat,
    t: CMat,
    dtau: f64,
    step: Option<StepMatrices>,
    jinv: Option<CMat>,
}

/// Bloch matrices for every degree from `l_min` to `p` at a fixed wavenumber.
#[derive(Debug, Clone)]
pub struct FourierLevels {
    p: usize,
    l_min: usize,
    dt_b0: f64,
    tab: ButcherTableau,
    smoother: Smoother,
    form: ErkForm,
    levels: Vec<Option<Level>>,
    rho: Vec<CMat>,
    pi: Vec<CMat>,
}

impl FourierLevels {
    /// Levels sharing `fine`'s upwinding, mesh, viscosity and wavenumber, with
    /// pseudo steps `Δτ_l = Δτ f_τ^{p-l}`.
    pub fn new(
        fine: &BlochOperator,
        cfg: &DualTimeConfig,
        l_min: usize,
        f_tau: f64,
        smoother: Smoother,
    ) -> Result<Self> {
        cfg.validate()?;
        smoother.validate()?;
        let p = fine.base.p;
        if l_min > p {
            return Err(Error::param("l_min", format!("{l_min} exceeds p={p}")));
        }
        if !(f_tau >= 1.0) {
            return Err(Error::param("f_tau", format!("must be >= 1, got {f_tau}")));
        }
        let dt_b0 = cfg.dt_b0();
        let mut levels: Vec<Option<Level>> = (0..=p).map(|_| None).collect();
        for l in l_min..=p {
            let ops = if l == p {
                fine.base.clone()
            } else {
                build_fr_operators(
                    l,
                    fine.base.alpha_a,
                    fine.base.alpha_d,
                    &NodeSet::GaussLegendre,
                    Correction::Dg,
                )?
            };
            let q = if l == p {
                fine.q.clone()
            } else {
                bloch_matrices(&ops, fine.h, fine.mu, fine.k).2
            };
            let n = l + 1;
            let t = &q - CMat::identity(n, n).unscale(dt_b0);
            let dtau = cfg.dtau * f_tau.powi((p - l) as i32);
            let (step, jinv) = match smoother {
                Smoother::Erk => {
                    let poly = cfg.with_dtau(dtau).polynomial()?;
                    let step = StepMatrices::new(&q, dtau, poly);
                    let rho = step.spectral_radius();
                    if !(rho < 1.0) {
                        return Err(Error::LevelUnstable {
                            level: l,
                            rho,
                            dtau,
                        });
                    }
                    (Some(step), None)
                }
                Smoother::ElementJacobi { .. } => (
                    None,
                    Some(element_jacobian_inverse(&ops, fine.h, fine.mu, dt_b0)?),
                ),
            };
            levels[l] = Some(Level {
                q,
                t,
                dtau,
                step,
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
        Ok(FourierLevels {
            p,
            l_min,
            dt_b0,
            tab: cfg.tab.clone(),
            smoother,
            form: ErkForm::Polynomial,
            levels,
            rho,
            pi,
        })
    }

    pub fn with_form(mut self, form: ErkForm) -> Self {
        self.form = form;
        self
    }

    pub fn l_min(&self) -> usize {
        self.l_min
    }

    fn level(&self, l: usize) -> &Level {
        self.levels[l].as_ref().unwrap_or_else(|| {
            panic!(
                "degree {l} is outside the built range {}..={}",
                self.l_min, self.p
            )
        })
    }

    pub fn q(&self, l: usize) -> &CMat {
        &self.level(l).q
    }

    pub fn t(&self, l: usize) -> &CMat {
        &self.level(l).t
    }

    pub fn dtau(&self, l: usize) -> f64 {
        self.level(l).dtau
    }

    /// Pseudo-step matrices at degree `l` (ERK smoother only).
    pub fn step(&self, l: usize) -> Option<&StepMatrices> {
        self.level(l).step.as_ref()
    }

    pub fn rho(&self, l: usize) -> &CMat {
        &self.rho[l - 1]
    }

    pub fn pi(&self, l: usize) -> &CMat {
        &self.pi[l - 1]
    }
}

impl LevelSystem for FourierLevels {
    fn finest(&self) -> usize {
        self.p
    }

    fn dt_b0(&self) -> f64 {
        self.dt_b0
    }

    fn apply_t(&self, level: usize, u: &CVec) -> CVec {
        self.t(level) * u
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
                let step = lv.step.as_ref().expect("ERK levels carry step matrices");
                match self.form {
                    ErkForm::Polynomial => {
                        let mut forcing = &step.c * src;
                        if let Some(r) = r {
                            forcing += &step.k * r;
                        }
                        for _ in 0..steps {
                            u = &step.p * &u - &forcing;
                        }
                    }
                    ErkForm::Stages => {
                        let q = &lv.q;
                        for _ in 0..steps {
                            u = erk_step(&self.tab, lv.dtau, self.dt_b0, &|v| q * v, &u, src, r);
                        }
                    }
                }
            }
            Smoother::ElementJacobi { kappa } => {
                let jinv = lv.jinv.as_ref().expect("EJ levels carry Jacobian inverses");
                for _ in 0..steps {
                    let mut res = self.residual(level, &u, src);
                    if let Some(r) = r {
                        res -= r;
                    }
                    u -= jinv * res * Complex64::new(kappa, 0.0);
                }
            }
        }
        Ok(u)
    }

    fn restrict(&self, level: usize, v: &CVec) -> CVec {
        self.rho(level) * v
    }

    fn prolong(&self, level: usize, v: &CVec) -> CVec {
        self.pi(level) * v
    }
}

/// Closed-form operator of a one-level V-cycle with `m` steps on each of its
/// three legs, history sum `σ u_n` and restricted coarse history:
///
/// ```text
/// R      = P_p^m - S_p C_p σ                     fine smoothing
/// T_pM   = T_p R - (σ / Δt B_0) I                fine residual, d_p = -T_pM
/// r_c    = T_c ρ R - (σ / Δt B_0) ρ - ρ T_pM     coarse forcing
/// G      = P_c^m ρ R - S_c (C_c σ ρ + K_c r_c)   coarse smoothing
/// v      = R - π (ρ R - G)                       correction
/// u_out  = P_p^m v - S_p C_p σ                   final smoothing
/// ```
pub fn one_level_v_operator(levels: &FourierLevels, m: usize, sigma: Complex64) -> Result<CMat> {
    let p = levels.p;
    if p < 1 || levels.l_min > p - 1 {
        return Err(Error::InvalidCycle(
            "one-level V-cycle needs degrees p and p-1".into(),
        ));
    }
    let c = p - 1;
    let (fine, coarse) = match (levels.step(p), levels.step(c)) {
        (Some(f), Some(g)) => (f, g),
        _ => {
            return Err(Error::InvalidCycle(
                "closed form needs the ERK smoother".into(),
            ))
        }
    };
    let dtb0 = levels.dt_b0;
    let n = p + 1;
    let (pf_m, sf) = fine.power_and_sum(m);
    let (pc_m, sc) = coarse.power_and_sum(m);
    let hist_f = &sf * &fine.c * sigma;
    let r_fine = &pf_m - &hist_f;
    let t_pm = levels.t(p) * &r_fine - CMat::identity(n, n) * (sigma / dtb0);
    let rho = levels.rho(p);
    let rho_r = rho * &r_fine;
    let r_c = levels.t(c) * &rho_r - rho * (sigma / dtb0) - rho * &t_pm;
    let g = &pc_m * &rho_r - &sc * (&coarse.c * rho * sigma + &coarse.k * r_c);
    let v = &r_fine - levels.pi(p) * (&rho_r - g);
    Ok(&pf_m * v - hist_f)
}

/// Settings for repeated cycles within one physical step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierRunConfig {
    pub n_cycles: usize,
    pub coarse: CoarseSource,
}

/// Fine-level state after a cycle.
#[derive(Debug, Clone)]
pub struct CycleRecord {
    pub cycle: usize,
    /// Cumulative fine-level pseudo time `(n_sp + n_sp') n_cycle Δτ`.
    pub tau: f64,
    /// `‖u - u_∞‖` against the pseudo-time steady state.
    pub error: f64,
    /// `‖u - exp(-iωΔt) u_n‖` against the exact solution.
    pub error_exact: f64,
    /// Eigenmode coordinates `W^{-1} u` of the fine solution.
    pub modes: CVec,
    /// Eigenmode coordinates `W^{-1} (u - u_∞)` of the error.
    pub error_modes: CVec,
}

/// Run `n_cycles` cycles of the first physical step from `u_{n+1,0} = u_n`,
/// the exact wave projected on the reference element. Record 0 is the
/// initial state.
pub fn run_fourier_cycles(
    fine: &BlochOperator,
    levels: &FourierLevels,
    cfg: &DualTimeConfig,
    spec: &CycleSpec,
    run: &FourierRunConfig,
) -> Result<Vec<CycleRecord>> {
    let omega = fine.omega();
    let sigma = history_sum(&cfg.bdf, omega, cfg.dt);
    let u_n = &fine.w * &fine.beta;
    let src = &u_n * sigma;
    let steady = pseudo_steady_state(&fine.q, cfg, omega, &u_n)?;
    let exact = &u_n * (-Complex64::i() * omega * cfg.dt).exp();
    let record = |cycle: usize, u: &CVec| CycleRecord {
        cycle,
        tau: (cycle * spec.fine_steps()) as f64 * cfg.dtau,
        error: linalg::norm2(&(u - &steady)),
        error_exact: linalg::norm2(&(u - &exact)),
        modes: fine.modal_coordinates(u),
        error_modes: fine.modal_coordinates(&(u - &steady)),
    };
    let mut out = Vec::with_capacity(run.n_cycles + 1);
    let mut u = u_n.clone();
    out.push(record(0, &u));
    for cycle in 1..=run.n_cycles {
        u = run_cycle(levels, spec, &u, &src, run.coarse)?;
        out.push(record(cycle, &u));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::build_propagators;
    use crate::fr_ops::build_bloch;
    use crate::pmg::{cycle_matrix, run_cycle_traced, Phase};
    use crate::schemes::make_bdf;

    fn setup(p: usize, k: f64, mu: f64) -> (BlochOperator, DualTimeConfig) {
        let ops = build_fr_operators(p, 1.0, 0.5, &NodeSet::GaussLegendre, Correction::Dg).unwrap();
        let op = build_bloch(&ops, 1.0, mu, k).unwrap();
        let cfg = DualTimeConfig::new(
            0.07,
            7e-3,
            4,
            make_bdf(2).unwrap(),
            ButcherTableau::ssprk3(),
        )
        .unwrap();
        (op, cfg)
    }

    #[test]
    fn single_leg_matches_propagator() {
        let (op, cfg) = setup(4, 0.9, 0.5);
        let levels = FourierLevels::new(&op, &cfg, 4, 1.0, Smoother::Erk).unwrap();
        let spec = CycleSpec::single(4, cfg.m);
        let sigma = history_sum(&cfg.bdf, op.omega(), cfg.dt);
        let s = cycle_matrix(&levels, &spec, sigma, CoarseSource::Restricted).unwrap();
        let props = build_propagators(&op, &cfg, op.omega()).unwrap();
        assert!(linalg::max_abs_diff(&s, &props.r_m) < 1e-12);
    }

    #[test]
    fn zero_steps_leave_state() {
        let (op, cfg) = setup(3, 0.5, 0.1);
        let levels = FourierLevels::new(&op, &cfg, 2, 1.0, Smoother::Erk).unwrap();
        let u = op.exact_wave();
        let out = levels.smooth(3, 0, u.clone(), &u, None).unwrap();
        assert_eq!(out, u);
    }

    #[test]
    fn closed_form_one_level_cycle() {
        for (p, k, mu, m) in [(4, 0.9, 0.5, 1), (3, 2.1, 0.0, 3), (5, 0.3, 0.2, 2)] {
            let (op, cfg) = setup(p, k, mu);
            let levels = FourierLevels::new(&op, &cfg, p - 1, 1.0, Smoother::Erk)
                .unwrap()
                .with_form(ErkForm::Stages);
            let sigma = history_sum(&cfg.bdf, op.omega(), cfg.dt);
            let spec = CycleSpec::v(p, p - 1, m).unwrap();
            let stepwise = cycle_matrix(&levels, &spec, sigma, CoarseSource::Restricted).unwrap();
            let closed = one_level_v_operator(&levels, m, sigma).unwrap();
            assert!(linalg::max_abs_diff(&stepwise, &closed) < 1e-10, "p={p}");
        }
    }

    #[test]
    fn stage_and_polynomial_forms_agree() {
        let (op, cfg) = setup(4, 1.3, 0.5);
        let spec = CycleSpec::preset("vap", 4, 0)
            .unwrap()
            .with_f_tau(1.1)
            .unwrap();
        let a = FourierLevels::new(&op, &cfg, 0, 1.1, Smoother::Erk).unwrap();
        let b = FourierLevels::new(&op, &cfg, 0, 1.1, Smoother::Erk)
            .unwrap()
            .with_form(ErkForm::Stages);
        let sigma = history_sum(&cfg.bdf, op.omega(), cfg.dt);
        let sa = cycle_matrix(&a, &spec, sigma, CoarseSource::Restricted).unwrap();
        let sb = cycle_matrix(&b, &spec, sigma, CoarseSource::Restricted).unwrap();
        assert!(linalg::max_abs_diff(&sa, &sb) < 1e-12);
    }

    #[test]
    fn converged_fine_state_is_a_fixed_point() {
        let (op, cfg) = setup(4, 0.8, 0.5);
        let sigma = history_sum(&cfg.bdf, op.omega(), cfg.dt);
        let u_n = op.exact_wave();
        let src = &u_n * sigma;
        let steady = pseudo_steady_state(&op.q, &cfg, op.omega(), &u_n).unwrap();
        for smoother in [Smoother::Erk, Smoother::ElementJacobi { kappa: 0.5 }] {
            let levels = FourierLevels::new(&op, &cfg, 0, 1.1, smoother).unwrap();
            let spec = CycleSpec::preset("v3", 4, 0).unwrap();
            let (out, trace) =
                run_cycle_traced(&levels, &spec, &steady, &src, CoarseSource::Restricted).unwrap();
            assert!((&out - &steady).camax() < 1e-9);
            for leg in trace.iter().filter(|t| t.phase == Phase::Prolong) {
                assert!(
                    (&leg.after - &leg.before).camax() < 1e-9,
                    "level {}",
                    leg.level
                );
            }
        }
    }

    #[test]
    fn unstable_coarse_step_is_reported() {
        let (op, cfg) = setup(4, 1.0, 0.5);
        let cfg = cfg.with_dtau(0.05);
        match FourierLevels::new(&op, &cfg, 0, 3.0, Smoother::Erk) {
            Err(Error::LevelUnstable { level, .. }) => assert!(level < 4),
            other => panic!("expected LevelUnstable, got {:?}", other.err()),
        }
    }

    #[test]
    fn records_start_from_initial_state() {
        let (op, cfg) = setup(4, 0.9, 0.5);
        let levels = FourierLevels::new(&op, &cfg, 0, 1.0, Smoother::Erk).unwrap();
        let spec = CycleSpec::preset("v1", 4, 0).unwrap();
        let run = FourierRunConfig {
            n_cycles: 5,
            coarse: CoarseSource::Restricted,
        };
        let recs = run_fourier_cycles(&op, &levels, &cfg, &spec, &run).unwrap();
        assert_eq!(recs.len(), 6);
        assert_eq!(recs[0].tau, 0.0);
        assert!((recs[5].tau - 5.0 * 2.0 * 7e-3).abs() < 1e-15);
        assert!(recs[5].error < recs[0].error);
        assert!((recs[0].modes[0].norm() - op.beta[0].norm()).abs() < 1e-12);
    }
}
