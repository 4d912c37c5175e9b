//! Declarative cycle descriptions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a leg sits in the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Restrict,
    Prolong,
    Final,
}

/// Smoothing `steps` pseudo iterations at degree `level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub level: usize,
    pub steps: usize,
}

/// A p-multigrid cycle as an ordered list of legs plus the per-level
/// pseudo-step factor `f_tau` (`Δτ_i = Δτ f_tau^{p-i}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSpec {
    #[serde(default = "one")]
    pub f_tau: f64,
    pub legs: Vec<Leg>,
}

fn one() -> f64 {
    1.0
}

impl CycleSpec {
    pub fn new(legs: Vec<Leg>, f_tau: f64) -> Result<Self> {
        let spec = CycleSpec { f_tau, legs };
        spec.validate()?;
        Ok(spec)
    }

    /// Plain dual-time stepping: `m` pseudo steps at degree `p`.
    pub fn single(p: usize, m: usize) -> Self {
        CycleSpec {
            f_tau: 1.0,
            legs: vec![Leg { level: p, steps: m }],
        }
    }

    /// V-cycle from `p` down to `l_min` with `n_s` steps on every leg.
    pub fn v(p: usize, l_min: usize, n_s: usize) -> Result<Self> {
        Self::v_ap(p, l_min, n_s, n_s)
    }

    /// V-cycle with `n_s` steps on the way down and `n_prolong` steps on the
    /// bottom level and the way up, including the final fine smoothing.
    pub fn v_ap(p: usize, l_min: usize, n_s: usize, n_prolong: usize) -> Result<Self> {
        if l_min >= p {
            return Err(Error::InvalidCycle(format!(
                "l_min={l_min} must be below p={p}"
            )));
        }
        let mut legs: Vec<Leg> = (l_min + 1..=p)
            .rev()
            .map(|level| Leg { level, steps: n_s })
            .collect();
        legs.extend((l_min..=p).map(|level| Leg {
            level,
            steps: n_prolong,
        }));
        Self::new(legs, 1.0)
    }

    /// W-cycle visiting `p - 2` twice.
    pub fn w(p: usize, n_s: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidCycle(format!(
                "W-cycle needs p >= 2, got {p}"
            )));
        }
        let legs = [p, p - 1, p - 2, p - 1, p - 2, p - 1, p]
            .into_iter()
            .map(|level| Leg { level, steps: n_s })
            .collect();
        Self::new(legs, 1.0)
    }

    /// Named presets: `v1`, `v3`, `vap`, `w`.
    pub fn preset(name: &str, p: usize, l_min: usize) -> Result<Self> {
        match name {
            "v1" => Self::v(p, l_min, 1),
            "v3" => Self::v(p, l_min, 3),
            "vap" => Self::v_ap(p, l_min, 1, 3),
            "w" => Self::w(p, 1),
            other => Err(Error::InvalidCycle(format!(
                "unknown cycle preset `{other}`; expected v1, v3, vap or w"
            ))),
        }
    }

    pub fn with_f_tau(mut self, f_tau: f64) -> Result<Self> {
        self.f_tau = f_tau;
        self.validate()?;
        Ok(self)
    }

    pub fn finest(&self) -> usize {
        self.legs.first().map_or(0, |l| l.level)
    }

    pub fn coarsest(&self) -> usize {
        self.legs.iter().map(|l| l.level).min().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_tau.is_finite() && self.f_tau >= 1.0) {
            return Err(Error::InvalidCycle(format!(
                "f_tau={} must be >= 1",
                self.f_tau
            )));
        }
        let (first, last) = match (self.legs.first(), self.legs.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidCycle("no legs".into())),
        };
        if first.level != last.level {
            return Err(Error::InvalidCycle(format!(
                "first leg at degree {} but last at {}",
                first.level, last.level
            )));
        }
        if self.legs.iter().any(|l| l.level > first.level) {
            return Err(Error::InvalidCycle(
                "a leg is finer than the first leg".into(),
            ));
        }
        for w in self.legs.windows(2) {
            if w[0].level.abs_diff(w[1].level) != 1 {
                return Err(Error::InvalidCycle(format!(
                    "legs must change degree by exactly one, found {} -> {}",
                    w[0].level, w[1].level
                )));
            }
        }
        Ok(())
    }

    /// Phase of leg `i`: legs followed by a coarser one restrict, legs
    /// followed by a finer one prolong, the last leg is final.
    pub fn phase(&self, i: usize) -> Phase {
        match self.legs.get(i + 1) {
            None => Phase::Final,
            Some(next) if next.level < self.legs[i].level => Phase::Restrict,
            Some(_) => Phase::Prolong,
        }
    }

    /// Fine smoothing at the start of the cycle.
    pub fn n_sp(&self) -> usize {
        self.legs[0].steps
    }

    /// Fine smoothing at the end of the cycle (zero for a single leg).
    pub fn n_sp_prime(&self) -> usize {
        if self.legs.len() > 1 {
            self.legs[self.legs.len() - 1].steps
        } else {
            0
        }
    }

    /// Fine-level pseudo steps per cycle.
    pub fn fine_steps(&self) -> usize {
        self.n_sp() + self.n_sp_prime()
    }

    /// Pseudo step at `level` for finest degree `p`.
    pub fn level_dtau(&self, dtau: f64, p: usize, level: usize) -> f64 {
        dtau * self.f_tau.powi((p - level) as i32)
    }

    pub fn parse(json: &str) -> Result<Self> {
        let spec: CycleSpec = serde_json::from_str(json)?;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn levels(s: &CycleSpec) -> Vec<usize> {
        s.legs.iter().map(|l| l.level).collect()
    }

    #[test]
    fn presets_have_expected_shapes() {
        let v = CycleSpec::preset("v1", 4, 0).unwrap();
        assert_eq!(levels(&v), vec![4, 3, 2, 1, 0, 1, 2, 3, 4]);
        assert!(v.legs.iter().all(|l| l.steps == 1));
        let ap = CycleSpec::preset("vap", 4, 2).unwrap();
        assert_eq!(levels(&ap), vec![4, 3, 2, 3, 4]);
        assert_eq!(
            ap.legs.iter().map(|l| l.steps).collect::<Vec<_>>(),
            vec![1, 1, 3, 3, 3]
        );
        assert_eq!((ap.n_sp(), ap.n_sp_prime()), (1, 3));
        let w = CycleSpec::preset("w", 4, 0).unwrap();
        assert_eq!(levels(&w), vec![4, 3, 2, 3, 2, 3, 4]);
        assert!(CycleSpec::preset("x", 4, 0).is_err());
    }

    #[test]
    fn phases() {
        let v = CycleSpec::v(2, 1, 1).unwrap();
        assert_eq!(v.phase(0), Phase::Restrict);
        assert_eq!(v.phase(1), Phase::Prolong);
        assert_eq!(v.phase(2), Phase::Final);
        assert_eq!(CycleSpec::single(3, 5).phase(0), Phase::Final);
        assert_eq!(CycleSpec::single(3, 5).fine_steps(), 5);
    }

    #[test]
    fn validator_rejects_jumps_and_bad_ends() {
        let jump = CycleSpec {
            f_tau: 1.0,
            legs: vec![
                Leg { level: 4, steps: 1 },
                Leg { level: 2, steps: 1 },
                Leg { level: 4, steps: 1 },
            ],
        };
        assert!(jump.validate().is_err());
        let open = CycleSpec {
            f_tau: 1.0,
            legs: vec![Leg { level: 4, steps: 1 }, Leg { level: 3, steps: 1 }],
        };
        assert!(open.validate().is_err());
        assert!(CycleSpec::single(3, 1).with_f_tau(0.9).is_err());
        assert!(CycleSpec::v(3, 3, 1).is_err());
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"f_tau":1.1,"legs":[{"level":4,"steps":1},{"level":3,"steps":3},{"level":4,"steps":3}]}"#;
        let spec = CycleSpec::parse(json).unwrap();
        assert_eq!(spec.f_tau, 1.1);
        let back = CycleSpec::parse(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        let default_f = CycleSpec::parse(r#"{"legs":[{"level":2,"steps":4}]}"#).unwrap();
        assert_eq!(default_f.f_tau, 1.0);
    }

    #[test]
    fn f_tau_one_keeps_dtau() {
        let s = CycleSpec::v(5, 0, 1).unwrap();
        for l in 0..=5 {
            assert_eq!(s.level_dtau(7e-3, 5, l), 7e-3);
        }
        let s = s.with_f_tau(1.1).unwrap();
        assert!((s.level_dtau(7e-3, 5, 3) - 7e-3 * 1.21).abs() < 1e-15);
    }
}
