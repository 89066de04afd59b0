//! Run configuration: `key = value` text with `#` comments, plus command-line overrides.

use crate::error::{Error, Result};
use crate::filter::{Cutoff, FilterSpec};
use crate::reference::{BlochSettings, LeapfrogSettings};
use crate::source::{SourceTerm, SpatialProfile, TimePulse};
use crate::torus::{media, CellCoefficients};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Built-in medium name, see [`media::named`].
    pub medium: String,
    /// Optional coefficient file in the plain-text format; overrides `medium`.
    pub medium_file: Option<PathBuf>,
    pub dim: usize,
    pub cell_n: usize,
    /// Strictly decreasing.
    pub eps: Vec<f64>,
    pub k_classical: usize,
    pub k_criminal: usize,
    pub alpha: f64,
    pub psi1: (f64, f64),
    pub psi2: (f64, f64),
    /// Box length; `0` picks the smallest admissible length.
    pub box_len: f64,
    pub times: Vec<f64>,
    pub dt: f64,
    pub pulse: String,
    pub width: f64,
    pub cell_modes: usize,
    pub fiber_tol: f64,
    pub mode_tol: f64,
    pub points_per_period: usize,
    pub cfl: f64,
    pub out: PathBuf,
    /// Target order and half-width for the classical and criminal fits; negative disables.
    pub classical_order: f64,
    pub criminal_order: f64,
    pub order_tol: f64,
    /// Largest admissible ratio of the reference discretization estimate to a measured error.
    pub budget: f64,
    pub longtime_eps: f64,
    pub longtime_points: usize,
    pub longtime_start: f64,
    pub criminal_slope_max: f64,
    pub classical_slope_min: f64,
    pub contrast_from: f64,
    pub delta: f64,
    pub big_n: usize,
    pub breakdown_c: f64,
    pub criminal_ratio_max: f64,
    pub window: (f64, f64),
    pub growth_samples: usize,
    pub growth_levels: usize,
    pub growth_tol: f64,
    pub growth_margin: f64,
    pub random_seeds: Vec<u64>,
    pub drift_max: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            medium: "two_phase(1,4,0.5,0.1)".into(),
            medium_file: None,
            dim: 1,
            cell_n: 128,
            eps: vec![0.125, 0.0625, 0.03125],
            k_classical: 1,
            k_criminal: 2,
            alpha: 0.8,
            psi1: (3.0, 4.0),
            psi2: (5.0, 6.0),
            box_len: 0.0,
            times: vec![10.0],
            dt: 1e-3,
            pulse: "bump".into(),
            width: 1.0,
            cell_modes: 32,
            fiber_tol: 1e-16,
            mode_tol: 1e-15,
            points_per_period: 32,
            cfl: 0.9,
            out: PathBuf::from("out"),
            classical_order: -1.0,
            criminal_order: -1.0,
            order_tol: 0.5,
            budget: 0.1,
            longtime_eps: 0.0625,
            longtime_points: 10,
            longtime_start: 10.0,
            criminal_slope_max: 1.3,
            classical_slope_min: 1.5,
            contrast_from: 50.0,
            delta: 0.5,
            big_n: 2,
            breakdown_c: 1.0,
            criminal_ratio_max: 0.1,
            window: (25.0, 400.0),
            growth_samples: 9,
            growth_levels: 2,
            growth_tol: 0.2,
            growth_margin: 0.25,
            random_seeds: vec![1, 2, 3],
            drift_max: 1e-3,
            seed: 1,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|e| Error::invalid(format!("{key} = '{v}': {e}")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.trim().parse::<usize>().map_err(|e| Error::invalid(format!("{key} = '{v}': {e}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_f64(key, s)).collect()
}

fn parse_pair(key: &str, v: &str) -> Result<(f64, f64)> {
    match parse_list(key, v)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::invalid(format!("{key} needs two comma-separated numbers"))),
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "medium" => self.medium = v.to_string(),
            "medium_file" => self.medium_file = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "dim" => self.dim = parse_usize(key, v)?,
            "cell_n" => self.cell_n = parse_usize(key, v)?,
            "eps" => self.eps = parse_list(key, v)?,
            "k_classical" => self.k_classical = parse_usize(key, v)?,
            "k_criminal" => self.k_criminal = parse_usize(key, v)?,
            "alpha" => self.alpha = parse_f64(key, v)?,
            "psi1" => self.psi1 = parse_pair(key, v)?,
            "psi2" => self.psi2 = parse_pair(key, v)?,
            "box" => self.box_len = parse_f64(key, v)?,
            "times" => self.times = parse_list(key, v)?,
            "dt" => self.dt = parse_f64(key, v)?,
            "pulse" => self.pulse = v.to_string(),
            "width" => self.width = parse_f64(key, v)?,
            "cell_modes" => self.cell_modes = parse_usize(key, v)?,
            "fiber_tol" => self.fiber_tol = parse_f64(key, v)?,
            "mode_tol" => self.mode_tol = parse_f64(key, v)?,
            "points_per_period" => self.points_per_period = parse_usize(key, v)?,
            "cfl" => self.cfl = parse_f64(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "classical_order" => self.classical_order = parse_f64(key, v)?,
            "criminal_order" => self.criminal_order = parse_f64(key, v)?,
            "order_tol" => self.order_tol = parse_f64(key, v)?,
            "budget" => self.budget = parse_f64(key, v)?,
            "longtime_eps" => self.longtime_eps = parse_f64(key, v)?,
            "longtime_points" => self.longtime_points = parse_usize(key, v)?,
            "longtime_start" => self.longtime_start = parse_f64(key, v)?,
            "criminal_slope_max" => self.criminal_slope_max = parse_f64(key, v)?,
            "classical_slope_min" => self.classical_slope_min = parse_f64(key, v)?,
            "contrast_from" => self.contrast_from = parse_f64(key, v)?,
            "delta" => self.delta = parse_f64(key, v)?,
            "big_n" => self.big_n = parse_usize(key, v)?,
            "breakdown_c" => self.breakdown_c = parse_f64(key, v)?,
            "criminal_ratio_max" => self.criminal_ratio_max = parse_f64(key, v)?,
            "window" => self.window = parse_pair(key, v)?,
            "growth_samples" => self.growth_samples = parse_usize(key, v)?,
            "growth_levels" => self.growth_levels = parse_usize(key, v)?,
            "growth_tol" => self.growth_tol = parse_f64(key, v)?,
            "growth_margin" => self.growth_margin = parse_f64(key, v)?,
            "random_seeds" => self.random_seeds = parse_list(key, v)?.into_iter().map(|s| s as u64).collect(),
            "drift_max" => self.drift_max = parse_f64(key, v)?,
            "seed" => self.seed = parse_usize(key, v)? as u64,
            other => return Err(Error::invalid(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key = value, found '{line}'"),
            })?;
            self.set(k, v).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Applies `key=value` overrides in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o.split_once('=').ok_or_else(|| Error::invalid(format!("override '{o}' is not key=value")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::invalid("eps values must lie in (0, 1]"));
        }
        if !(self.longtime_eps > 0.0 && self.longtime_eps <= 1.0) {
            return Err(Error::invalid("longtime_eps must lie in (0, 1]"));
        }
        if self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("the eps list must be strictly decreasing"));
        }
        if self.times.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::invalid("output times must be nonnegative"));
        }
        if !(self.width > 0.0) || !(self.dt > 0.0) {
            return Err(Error::invalid("width and dt must be positive"));
        }
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::invalid("dim must be 1 or 2"));
        }
        if !(self.delta >= 0.0 && self.delta <= 1.0) {
            return Err(Error::invalid("delta must lie in [0, 1]"));
        }
        TimePulse::parse(&self.pulse)?;
        self.filter()?;
        Ok(())
    }

    pub fn coefficients(&self) -> Result<CellCoefficients> {
        match &self.medium_file {
            Some(p) => media::parse_coefficients(&std::fs::read_to_string(p)?),
            None => media::named(&self.medium, self.dim, self.cell_n),
        }
    }

    pub fn filter(&self) -> Result<FilterSpec> {
        FilterSpec::new(self.alpha, Cutoff::new(self.psi1.0, self.psi1.1), Cutoff::new(self.psi2.0, self.psi2.1))
    }

    /// Pulses without compact support in `[0, 1]` are not representable by [`TimePulse`].
    pub fn source(&self) -> Result<SourceTerm> {
        Ok(SourceTerm::new(TimePulse::parse(&self.pulse)?, SpatialProfile::gaussian(self.width)))
    }

    pub fn bloch(&self) -> BlochSettings {
        BlochSettings {
            cell_modes: self.cell_modes,
            fiber_tol: self.fiber_tol,
            mode_tol: self.mode_tol,
        }
    }

    pub fn leapfrog(&self) -> LeapfrogSettings {
        LeapfrogSettings {
            points_per_period: self.points_per_period,
            cfl: self.cfl,
        }
    }

    /// Every key with its effective value, one `key = value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("medium", self.medium.clone());
        kv("medium_file", self.medium_file.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        kv("dim", self.dim.to_string());
        kv("cell_n", self.cell_n.to_string());
        kv("eps", join(&self.eps));
        kv("k_classical", self.k_classical.to_string());
        kv("k_criminal", self.k_criminal.to_string());
        kv("alpha", self.alpha.to_string());
        kv("psi1", join(&[self.psi1.0, self.psi1.1]));
        kv("psi2", join(&[self.psi2.0, self.psi2.1]));
        kv("box", self.box_len.to_string());
        kv("times", join(&self.times));
        kv("dt", self.dt.to_string());
        kv("pulse", self.pulse.clone());
        kv("width", self.width.to_string());
        kv("cell_modes", self.cell_modes.to_string());
        kv("fiber_tol", self.fiber_tol.to_string());
        kv("mode_tol", self.mode_tol.to_string());
        kv("points_per_period", self.points_per_period.to_string());
        kv("cfl", self.cfl.to_string());
        kv("out", self.out.display().to_string());
        kv("classical_order", self.classical_order.to_string());
        kv("criminal_order", self.criminal_order.to_string());
        kv("order_tol", self.order_tol.to_string());
        kv("budget", self.budget.to_string());
        kv("longtime_eps", self.longtime_eps.to_string());
        kv("longtime_points", self.longtime_points.to_string());
        kv("longtime_start", self.longtime_start.to_string());
        kv("criminal_slope_max", self.criminal_slope_max.to_string());
        kv("classical_slope_min", self.classical_slope_min.to_string());
        kv("contrast_from", self.contrast_from.to_string());
        kv("delta", self.delta.to_string());
        kv("big_n", self.big_n.to_string());
        kv("breakdown_c", self.breakdown_c.to_string());
        kv("criminal_ratio_max", self.criminal_ratio_max.to_string());
        kv("window", join(&[self.window.0, self.window.1]));
        kv("growth_samples", self.growth_samples.to_string());
        kv("growth_levels", self.growth_levels.to_string());
        kv("growth_tol", self.growth_tol.to_string());
        kv("growth_margin", self.growth_margin.to_string());
        kv("random_seeds", self.random_seeds.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(","));
        kv("drift_max", self.drift_max.to_string());
        kv("seed", self.seed.to_string());
        s
    }
}
