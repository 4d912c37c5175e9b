//! Run configuration: one JSON document with `scheme`, `space`, `dualtime`,
//! `cycle` and `sweep` sections. Every field has a default, so `{}` is a
//! valid config.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use frpmg::fourier::{nyquist, DualTimeConfig, WavenumberGrid};
use frpmg::fr_ops::{build_fr_operators, Correction, FrOperatorSet, NodeSet};
use frpmg::output::Header;
use frpmg::pmg::{ContractionForm, CycleSpec, Leg, Smoother};
use frpmg::schemes::{load_tableau, make_bdf, ButcherTableau, TableauConfig};
use frpmg::sweeps::StabilityScan;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scheme: SchemeSection,
    pub space: SpaceSection,
    pub dualtime: DualTimeSection,
    pub cycle: CycleSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableauChoice {
    Named(String),
    Inline(TableauConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    pub bdf: usize,
    /// `"ssprk3"`, `"euler"`, a path to a tableau JSON file, or an inline
    /// `{"stages","A","b"}` record.
    pub tableau: TableauChoice,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            bdf: 2,
            tableau: TableauChoice::Named("ssprk3".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeChoice {
    Named(String),
    Points(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpaceSection {
    pub p: usize,
    pub alpha_a: f64,
    pub alpha_d: f64,
    pub h: f64,
    pub mu: f64,
    pub nodes: NodeChoice,
    /// Elements in the periodic time-domain grid.
    pub n_elements: usize,
}

impl Default for SpaceSection {
    fn default() -> Self {
        SpaceSection {
            p: 4,
            alpha_a: 1.0,
            alpha_d: 0.5,
            h: 1.0,
            mu: 0.0,
            nodes: NodeChoice::Named("legendre".into()),
            n_elements: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualTimeSection {
    pub dt: f64,
    pub dtau: f64,
    /// Pseudo steps per physical step.
    pub m: usize,
}

impl Default for DualTimeSection {
    fn default() -> Self {
        DualTimeSection {
            dt: 0.2,
            dtau: 0.05,
            m: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SmootherChoice {
    Erk,
    Ej { kappa: f64 },
}

impl From<SmootherChoice> for Smoother {
    fn from(s: SmootherChoice) -> Self {
        match s {
            SmootherChoice::Erk => Smoother::Erk,
            SmootherChoice::Ej { kappa } => Smoother::ElementJacobi { kappa },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleSection {
    /// `v1`, `v3`, `vap`, `w` or `none`; ignored when `legs` is given.
    pub preset: String,
    pub legs: Option<Vec<Leg>>,
    pub f_tau: f64,
    pub l_min: usize,
    pub smoother: SmootherChoice,
    pub n_cycles: usize,
}

impl Default for CycleSection {
    fn default() -> Self {
        CycleSection {
            preset: "vap".into(),
            legs: None,
            f_tau: 1.0,
            l_min: 0,
            smoother: SmootherChoice::Erk,
            n_cycles: 30,
        }
    }
}

/// A list of values or a linear/logarithmic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        n: usize,
        #[serde(default)]
        log: bool,
    },
}

impl Values {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Values::List(v) => v.clone(),
            Values::Range {
                start,
                stop,
                n,
                log,
            } => {
                let n = (*n).max(1);
                let t = |i: usize| {
                    if n == 1 {
                        0.0
                    } else {
                        i as f64 / (n - 1) as f64
                    }
                };
                if *log {
                    let (a, b) = (start.ln(), stop.ln());
                    (0..n).map(|i| (a + (b - a) * t(i)).exp()).collect()
                } else {
                    (0..n).map(|i| start + (stop - start) * t(i)).collect()
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CflMode {
    Explicit,
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormChoice {
    Ratio,
    LiteralDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Normalised wavenumbers `k̂/π` with `k̂ = πk/k_Nq`.
    pub k_hat_over_pi: Vec<f64>,
    /// Absolute wavenumber `k/π`; overrides `k_hat_over_pi`.
    pub k_over_pi: Option<f64>,
    pub ps: Vec<usize>,
    pub mus: Values,
    pub ms: Vec<usize>,
    pub dts: Values,
    pub ratios: Values,
    pub cfl_mode: CflMode,
    /// Wavenumber samples per `Δτ_max` search.
    pub n_k: usize,
    /// When set, `Δτ = dtau_factor · Δτ_max` of pure advection.
    pub dtau_factor: Option<f64>,
    pub contraction_form: FormChoice,
    /// Cycles compared by `modes`; `none` is plain smoothing.
    pub cycles: Vec<String>,
    pub stability: StabilityScan,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            k_hat_over_pi: vec![0.125],
            k_over_pi: None,
            ps: vec![1, 2, 3, 4, 5],
            mus: Values::Range {
                start: 1e-3,
                stop: 1.0,
                n: 31,
                log: true,
            },
            ms: vec![1, 10, 20],
            dts: Values::Range {
                start: 0.05,
                stop: 2.0,
                n: 40,
                log: true,
            },
            ratios: Values::Range {
                start: 1.05,
                stop: 1e4,
                n: 200,
                log: true,
            },
            cfl_mode: CflMode::Explicit,
            n_k: 64,
            dtau_factor: None,
            contraction_form: FormChoice::Ratio,
            cycles: vec!["none".into(), "v1".into(), "v3".into(), "vap".into()],
            stability: StabilityScan::default(),
        }
    }
}

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.json")),
    ("fig3a", include_str!("../presets/fig3a.json")),
    ("fig3b", include_str!("../presets/fig3b.json")),
    ("fig3b-k8", include_str!("../presets/fig3b-k8.json")),
    ("fig5", include_str!("../presets/fig5.json")),
    ("fig6", include_str!("../presets/fig6.json")),
    ("fig7", include_str!("../presets/fig7.json")),
    ("fig7-bdf3", include_str!("../presets/fig7-bdf3.json")),
    ("fig8", include_str!("../presets/fig8.json")),
    ("fig9", include_str!("../presets/fig9.json")),
];

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            anyhow!("unknown preset `{name}`; available: {}", names.join(", "))
        })?;
        Self::parse(text).with_context(|| format!("preset `{name}`"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn check(&self) -> Result<()> {
        self.ops()?;
        self.dual_time()?;
        Smoother::from(self.cycle.smoother).validate()?;
        Ok(())
    }

    pub fn tableau(&self) -> Result<ButcherTableau> {
        Ok(match &self.scheme.tableau {
            TableauChoice::Named(n) if n == "ssprk3" => ButcherTableau::ssprk3(),
            TableauChoice::Named(n) if n == "euler" => ButcherTableau::euler(),
            TableauChoice::Named(path) => {
                let text = std::fs::read_to_string(path).with_context(|| {
                    format!("tableau `{path}` is neither ssprk3, euler nor a readable file")
                })?;
                frpmg::schemes::parse_tableau(&text)?
            }
            TableauChoice::Inline(t) => load_tableau(t)?,
        })
    }

    pub fn node_set(&self) -> Result<NodeSet> {
        match &self.space.nodes {
            NodeChoice::Named(n) if n == "legendre" || n == "gauss-legendre" => {
                Ok(NodeSet::GaussLegendre)
            }
            NodeChoice::Named(n) => {
                bail!("unknown node set `{n}`; use \"legendre\" or a list of points")
            }
            NodeChoice::Points(v) => Ok(NodeSet::Custom(v.clone())),
        }
    }

    pub fn ops_for(&self, p: usize) -> Result<FrOperatorSet> {
        let nodes = if p == self.space.p {
            self.node_set()?
        } else {
            NodeSet::GaussLegendre
        };
        Ok(build_fr_operators(
            p,
            self.space.alpha_a,
            self.space.alpha_d,
            &nodes,
            Correction::Dg,
        )?)
    }

    pub fn ops(&self) -> Result<FrOperatorSet> {
        self.ops_for(self.space.p)
    }

    pub fn dual_time(&self) -> Result<DualTimeConfig> {
        let d = &self.dualtime;
        Ok(DualTimeConfig::new(
            d.dt,
            d.dtau,
            d.m,
            make_bdf(self.scheme.bdf)?,
            self.tableau()?,
        )?)
    }

    pub fn smoother(&self) -> Smoother {
        self.cycle.smoother.into()
    }

    /// The cycle named `name` (`none` for plain smoothing with `steps` fine
    /// steps), or the configured one for `None`.
    pub fn cycle_spec(&self, name: Option<&str>, steps: usize) -> Result<CycleSpec> {
        let p = self.space.p;
        let spec = match (name, &self.cycle.legs) {
            (None, Some(legs)) => CycleSpec::new(legs.clone(), 1.0)?,
            (name, _) => match name.unwrap_or(&self.cycle.preset) {
                "none" => CycleSpec::single(p, steps),
                other => CycleSpec::preset(other, p, self.cycle.l_min)?,
            },
        };
        Ok(spec.with_f_tau(self.cycle.f_tau)?)
    }

    pub fn contraction_form(&self) -> ContractionForm {
        match self.sweep.contraction_form {
            FormChoice::Ratio => ContractionForm::Ratio,
            FormChoice::LiteralDifference => ContractionForm::LiteralDifference,
        }
    }

    pub fn k_grid(&self) -> WavenumberGrid {
        WavenumberGrid::LogSpaced {
            n: self.sweep.n_k,
            min_fraction: 1e-3,
        }
    }

    /// `(k̂, k)` pairs for the configured `Δt`.
    pub fn wavenumbers(&self) -> Vec<(f64, f64)> {
        let nq = nyquist(self.space.p, self.space.h, self.dualtime.dt);
        match self.sweep.k_over_pi {
            Some(k) => vec![(nq.normalize(k * PI), k * PI)],
            None => self
                .sweep
                .k_hat_over_pi
                .iter()
                .map(|&kh| (kh * PI, nq.wavenumber(kh * PI)))
                .collect(),
        }
    }

    /// `key=value` echo of the settings shared by every output.
    pub fn header(&self, command: &str) -> Header {
        let tableau = match &self.scheme.tableau {
            TableauChoice::Named(n) => n.clone(),
            TableauChoice::Inline(t) => format!("inline-{}-stage", t.stages),
        };
        Header::new()
            .with("command", command)
            .with("p", self.space.p)
            .with("alpha_a", self.space.alpha_a)
            .with("alpha_d", self.space.alpha_d)
            .with("h", self.space.h)
            .with("mu", self.space.mu)
            .with("bdf", self.scheme.bdf)
            .with("tableau", tableau)
            .with("dt", self.dualtime.dt)
            .with("dtau", self.dualtime.dtau)
            .with("m", self.dualtime.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_valid() {
        let c = Config::parse("{}").unwrap();
        assert_eq!(c, Config::default());
    }

    #[test]
    fn every_preset_parses() {
        for (name, _) in PRESETS {
            Config::preset(name).unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse(r#"{"space": {"q": 3}}"#).is_err());
        assert!(Config::parse(r#"{"extra": {}}"#).is_err());
    }

    #[test]
    fn ranges_expand() {
        let v = Values::Range {
            start: 1.0,
            stop: 100.0,
            n: 3,
            log: true,
        };
        let pts = v.points();
        assert!((pts[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn inline_tableau_loads() {
        let c = Config::parse(
            r#"{"scheme": {"bdf": 3, "tableau": {"stages": 1, "A": [[0.0]], "b": [1.0]}}}"#,
        )
        .unwrap();
        assert_eq!(c.tableau().unwrap().stages(), 1);
    }
}
