//! p-multigrid cycles over polynomial degree.
//!
//! A cycle is driven generically over a [`LevelSystem`], so the same leg
//! walk runs on Bloch matrices ([`FourierLevels`]) and on the physical-space
//! solver in [`crate::timedomain`].
//!
//! Working variables follow the general V-cycle: on the way down each level
//! is smoothed, its deficit `d_l = r_l - (T_l u_{l,M} - src_l / (Δt B_0))` is
//! restricted together with the solution, and the coarse forcing is
//! `r_{l-1} = T_{l-1} u_{l-1,0} - ρ src_l / (Δt B_0) + d_{l-1}`. On the way up
//! `Δ_l = u_{l,0} - u_{l,M}` is measured against the state the level was
//! entered with from above, prolongated and subtracted from the finer level.

mod cycle;
mod fourier_levels;
mod smoother;
mod transfer;

pub use cycle::{CycleSpec, Leg, Phase};
pub use fourier_levels::{
    one_level_v_operator, run_fourier_cycles, CycleRecord, ErkForm, FourierLevels, FourierRunConfig,
};
pub use smoother::{element_jacobian, erk_step, Smoother};
pub use transfer::{build_transfers, TransferOperators};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::{CMat, CVec};

/// History source used on coarse levels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CoarseSource {
    /// The finer level's history sum, restricted.
    #[default]
    Restricted,
    /// `σ u_{l,0}`: the level's own entry state stands in for its history.
    LevelStart { sigma: Complex64 },
}

/// Operations a cycle needs from a hierarchy of discretisations.
pub trait LevelSystem {
    fn finest(&self) -> usize;

    /// `Δt B_0`.
    fn dt_b0(&self) -> f64;

    /// `T_l u = Q_l u - u / (Δt B_0)`.
    fn apply_t(&self, level: usize, u: &CVec) -> CVec;

    /// `steps` smoothing iterations with BDF history sum `src` and
    /// multigrid forcing `r`.
    fn smooth(
        &self,
        level: usize,
        steps: usize,
        u: CVec,
        src: &CVec,
        r: Option<&CVec>,
    ) -> Result<CVec>;

    /// Degree `level` to `level - 1`.
    fn restrict(&self, level: usize, v: &CVec) -> CVec;

    /// Degree `level - 1` to `level`.
    fn prolong(&self, level: usize, v: &CVec) -> CVec;

    /// Pseudo residual `T_l u - src / (Δt B_0)`.
    fn residual(&self, level: usize, u: &CVec, src: &CVec) -> CVec {
        self.apply_t(level, u) - src.unscale(self.dt_b0())
    }
}

/// State of one level around a smoothing leg.
#[derive(Debug, Clone)]
pub struct LegTrace {
    pub level: usize,
    pub phase: Phase,
    pub steps: usize,
    pub before: CVec,
    pub after: CVec,
}

/// One cycle from `u` with fine history sum `src`.
pub fn run_cycle<S: LevelSystem + ?Sized>(
    sys: &S,
    spec: &CycleSpec,
    u: &CVec,
    src: &CVec,
    coarse: CoarseSource,
) -> Result<CVec> {
    walk(sys, spec, u, src, coarse, None)
}

/// As [`run_cycle`], also returning every leg's entry and exit state.
pub fn run_cycle_traced<S: LevelSystem + ?Sized>(
    sys: &S,
    spec: &CycleSpec,
    u: &CVec,
    src: &CVec,
    coarse: CoarseSource,
) -> Result<(CVec, Vec<LegTrace>)> {
    let mut trace = Vec::with_capacity(spec.legs.len());
    let out = walk(sys, spec, u, src, coarse, Some(&mut trace))?;
    Ok((out, trace))
}

fn walk<S: LevelSystem + ?Sized>(
    sys: &S,
    spec: &CycleSpec,
    u: &CVec,
    src: &CVec,
    coarse: CoarseSource,
    mut trace: Option<&mut Vec<LegTrace>>,
) -> Result<CVec> {
    spec.validate()?;
    let p = sys.finest();
    if spec.finest() != p {
        return Err(Error::InvalidCycle(format!(
            "cycle starts at degree {} but the level system is degree {p}",
            spec.finest()
        )));
    }
    let n = p + 1;
    let mut cur: Vec<Option<CVec>> = vec![None; n];
    let mut entry: Vec<Option<CVec>> = vec![None; n];
    let mut forcing: Vec<Option<CVec>> = vec![None; n];
    let mut hist: Vec<Option<CVec>> = vec![None; n];
    cur[p] = Some(u.clone());
    entry[p] = Some(u.clone());
    hist[p] = Some(src.clone());

    let missing =
        |l: usize| Error::InvalidCycle(format!("level {l} visited before it was restricted to"));
    let dtb0 = sys.dt_b0();

    for (i, leg) in spec.legs.iter().enumerate() {
        let l = leg.level;
        if i > 0 {
            let from = spec.legs[i - 1].level;
            if l < from {
                let u_m = cur[from].as_ref().ok_or_else(|| missing(from))?;
                let h = hist[from].as_ref().ok_or_else(|| missing(from))?;
                let mut d = -sys.residual(from, u_m, h);
                if let Some(r) = &forcing[from] {
                    d += r;
                }
                let u0 = sys.restrict(from, u_m);
                let h_restricted = sys.restrict(from, h);
                let r = sys.apply_t(l, &u0) - h_restricted.unscale(dtb0) + sys.restrict(from, &d);
                hist[l] = Some(match coarse {
                    CoarseSource::Restricted => h_restricted,
                    CoarseSource::LevelStart { sigma } => &u0 * sigma,
                });
                forcing[l] = Some(r);
                entry[l] = Some(u0.clone());
                cur[l] = Some(u0);
            } else {
                let e = entry[from].as_ref().ok_or_else(|| missing(from))?;
                let c = cur[from].as_ref().ok_or_else(|| missing(from))?;
                let delta = sys.prolong(l, &(e - c));
                let target = cur[l].as_mut().ok_or_else(|| missing(l))?;
                *target -= delta;
            }
        }
        let before = cur[l].take().ok_or_else(|| missing(l))?;
        let h = hist[l].as_ref().ok_or_else(|| missing(l))?;
        let after = sys.smooth(l, leg.steps, before.clone(), h, forcing[l].as_ref())?;
        if let Some(t) = trace.as_deref_mut() {
            t.push(LegTrace {
                level: l,
                phase: spec.phase(i),
                steps: leg.steps,
                before,
                after: after.clone(),
            });
        }
        cur[l] = Some(after);
    }
    cur[p].take().ok_or_else(|| missing(p))
}

/// Matrix of the affine cycle map `u_n -> u_{n+1}` when the history sum is
/// `σ u_n` and the cycle starts from `u_{n+1,0} = u_n`, built column by column.
pub fn cycle_matrix<S: LevelSystem + ?Sized>(
    sys: &S,
    spec: &CycleSpec,
    sigma: Complex64,
    coarse: CoarseSource,
) -> Result<CMat> {
    let n = sys.finest() + 1;
    let mut m = CMat::zeros(n, n);
    for j in 0..n {
        let mut e = CVec::zeros(n);
        e[j] = Complex64::new(1.0, 0.0);
        let src = &e * sigma;
        let col = run_cycle(sys, spec, &e, &src, coarse)?;
        m.set_column(j, &col);
    }
    Ok(m)
}

/// How the contraction factor is formed from two error norms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContractionForm {
    /// `(‖e_after‖ / ‖e_before‖)^{1/(n_sp + n_sp')}`.
    #[default]
    Ratio,
    /// `((‖e_after‖ - ‖e_before‖) / (p + 1))^{1/(n_sp + n_sp')}`; NaN when
    /// the base is negative.
    LiteralDifference,
}

/// Contraction factor per fine-level pseudo step.
pub fn contraction(
    before: f64,
    after: f64,
    fine_steps: usize,
    p: usize,
    form: ContractionForm,
) -> Result<f64> {
    if fine_steps == 0 {
        return Err(Error::param("fine_steps", "cycle has no fine smoothing"));
    }
    let inv = 1.0 / fine_steps as f64;
    match form {
        ContractionForm::Ratio => {
            if !(before > 0.0) {
                return Err(Error::param(
                    "before",
                    "error norm before the cycle must be positive",
                ));
            }
            Ok((after / before).powf(inv))
        }
        ContractionForm::LiteralDifference => Ok(((after - before) / (p as f64 + 1.0)).powf(inv)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contraction_examples() {
        assert_eq!(
            contraction(2.0, 2.0, 4, 4, ContractionForm::Ratio).unwrap(),
            1.0
        );
        assert_eq!(
            contraction(2.0, 1.0, 1, 4, ContractionForm::Ratio).unwrap(),
            0.5
        );
        assert!(
            (contraction(1.0, 1.0 / 16.0, 4, 4, ContractionForm::Ratio).unwrap() - 0.5).abs()
                < 1e-15
        );
        assert!(contraction(0.0, 1.0, 1, 4, ContractionForm::Ratio).is_err());
        assert!(
            (contraction(2.0, 1.0, 1, 4, ContractionForm::LiteralDifference).unwrap() + 0.2).abs()
                < 1e-15
        );
        assert!(
            contraction(2.0, 1.0, 2, 4, ContractionForm::LiteralDifference)
                .unwrap()
                .is_nan()
        );
        assert!(
            (contraction(1.0, 6.0, 1, 4, ContractionForm::LiteralDifference).unwrap() - 1.0).abs()
                < 1e-15
        );
    }
}
