//! Scenario files, time sweeps and transition detection.
//!
//! A scenario file is flat `key = value` text; `#` starts a comment. Keys are
//! the field names below, unknown or repeated keys are errors.
//!
//! ```text
//! name = fig3
//! kappa = 0
//! temperature = 1e-4
//! p = 11
//! r_s = 3
//! t_end = 200
//! outputs = nu1, nu1_pt, E_N, C_xi
//! ```

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{
    check_stability, coefficients_with, regime_mismatch, CoefficientOptions, MarkovCoefficients, PhysicalParams,
    RegimeTag, StabilityReport,
};
use crate::gaussian::{epr_initial, symplectic_eigenvalues, InfoReport};
use crate::propagator::{Covariance4, Propagator};
use crate::special::{solve_cubic, CubicRoots};
use crate::output::fmt_f64;
use crate::{Error, Result, DEFAULT_TOL, OMEGA, VERSION};

/// Bisection stops once the bracket is this narrow (units of 1/Ω).
pub const EVENT_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

impl FromStr for Spacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            _ => Err(Error::InvalidInput(format!("spacing must be linear or log, got '{s}'"))),
        }
    }
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
    pub spacing: Spacing,
}

impl TimeGrid {
    pub fn linear(t_start: f64, t_end: f64, n_points: usize) -> Self {
        TimeGrid {
            t_start,
            t_end,
            n_points,
            spacing: Spacing::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidInput(format!("n_points must be >= 2, got {}", self.n_points)));
        }
        if !(self.t_start >= 0.0) || !self.t_end.is_finite() || !(self.t_end > self.t_start) {
            return Err(Error::InvalidInput(format!(
                "need 0 <= t_start < t_end, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if self.spacing == Spacing::Log && !(self.t_start > 0.0) {
            return Err(Error::InvalidInput("log spacing needs t_start > 0".into()));
        }
        Ok(())
    }

    /// Grid points; the end points are hit exactly.
    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.t_end;
                }
                let f = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.t_start + (self.t_end - self.t_start) * f,
                    Spacing::Log => self.t_start * (self.t_end / self.t_start).powf(f),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub params: PhysicalParams,
    pub regime: RegimeTag,
    pub p: f64,
    pub r_s: f64,
    pub grid: TimeGrid,
    pub outputs: Vec<String>,
    pub tol: f64,
    pub allow_unstable: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "custom".into(),
            params: PhysicalParams::reference_bath(1.0, 0.0),
            regime: RegimeTag::ExactFiniteT,
            p: 1.0,
            r_s: 0.0,
            grid: TimeGrid::linear(0.0, 100.0, 2001),
            outputs: InfoReport::FIELDS.iter().map(|s| s.to_string()).collect(),
            tol: DEFAULT_TOL,
            allow_unstable: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidInput(format!("{key}: expected true or false, got '{value}'"))),
    }
}

impl Scenario {
    pub const KEYS: [&'static str; 15] = [
        "name",
        "omega_c",
        "gamma",
        "temperature",
        "kappa",
        "regime",
        "p",
        "r_s",
        "t_start",
        "t_end",
        "n_points",
        "spacing",
        "outputs",
        "tol",
        "allow_unstable",
    ];

    /// Parses a scenario file on top of [`Scenario::default`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut scenario = Scenario::default();
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::InvalidInput(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            scenario
                .set(key, value.trim())
                .map_err(|e| Error::InvalidInput(format!("line {}: {e}", lineno + 1)))?;
        }
        scenario.validate()?;
        Ok(scenario)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "name" => self.name = value.to_string(),
            "omega_c" => self.params.omega_c = parse_num(key, value)?,
            "gamma" => self.params.gamma = parse_num(key, value)?,
            "temperature" => self.params.temperature = parse_num(key, value)?,
            "kappa" => self.params.kappa = parse_num(key, value)?,
            "regime" => self.regime = value.parse()?,
            "p" => self.p = parse_num(key, value)?,
            "r_s" => self.r_s = parse_num(key, value)?,
            "t_start" => self.grid.t_start = parse_num(key, value)?,
            "t_end" => self.grid.t_end = parse_num(key, value)?,
            "n_points" => self.grid.n_points = parse_num(key, value)?,
            "spacing" => self.grid.spacing = value.parse()?,
            "outputs" => {
                self.outputs = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "tol" => self.tol = parse_num(key, value)?,
            "allow_unstable" => self.allow_unstable = parse_bool(key, value)?,
            _ => return Err(Error::InvalidInput(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid.validate()?;
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return Err(Error::InvalidInput(format!("p must be >= 1, got {}", self.p)));
        }
        if !self.r_s.is_finite() {
            return Err(Error::InvalidInput("r_s must be finite".into()));
        }
        if !(self.tol >= 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidInput(format!("tol must be >= 0, got {}", self.tol)));
        }
        for name in &self.outputs {
            if !InfoReport::FIELDS.contains(&name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "unknown output '{name}' (expected one of {})",
                    InfoReport::FIELDS.join(", ")
                )));
            }
        }
        Ok(())
    }

    /// The figure parameter sets: "fig1", "fig2", "fig3",
    /// "fig4a" (κ = 5), "fig4b" (κ = 15), "fig5" and "fig5-hot".
    pub fn preset(name: &str) -> Option<Self> {
        let base = Scenario {
            name: name.to_string(),
            ..Scenario::default()
        };
        let with = |t: f64, kappa: f64, p: f64, r_s: f64, window: (f64, f64)| Scenario {
            params: PhysicalParams::reference_bath(t, kappa),
            p,
            r_s,
            grid: TimeGrid::linear(window.0, window.1, 2001),
            ..base.clone()
        };
        Some(match name {
            "fig1" => with(0.1, -0.2, 1.0, 1.0, (0.0, 50.0)),
            "fig2" => with(10.0, 0.2, 1.1, 3.0, (0.0, 50.0)),
            "fig3" => with(1e-4, 0.0, 11.0, 3.0, (0.0, 200.0)),
            // asymptotic window: e^{-2 lambda t} ~ 1e-7 at t = 1000
            "fig4a" => with(1.0, 5.0, 1.2, 1.0, (1000.0, 1050.0)),
            "fig4b" => with(1.0, 15.0, 1.2, 1.0, (1000.0, 1050.0)),
            "fig5" => with(1e-4, -0.249999, 1.2, 0.0, (0.0, 4000.0)),
            "fig5-hot" => with(200.0, -0.249999, 1.2, 0.0, (0.0, 4000.0)),
            _ => return None,
        })
    }

    pub const PRESETS: [&'static str; 7] = ["fig1", "fig2", "fig3", "fig4a", "fig4b", "fig5", "fig5-hot"];
}

/// A validated scenario with its coefficients, propagator and initial state.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub roots: CubicRoots,
    pub coeffs: MarkovCoefficients,
    pub stability: StabilityReport,
    pub warnings: Vec<String>,
    pub propagator: Propagator,
    pub sigma0: Covariance4,
}

impl Prepared {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let params = &scenario.params;
        let roots = solve_cubic(OMEGA, params.omega_c, params.gamma)?;
        let options = CoefficientOptions {
            strict_regime: !scenario.allow_unstable,
        };
        let coeffs = coefficients_with(params, scenario.regime, options)?;
        let stability = check_stability(&coeffs, &roots);
        if !stability.is_stable() && !scenario.allow_unstable {
            return Err(Error::Stability(format!(
                "violated bounds: {}",
                stability.violations().join(", ")
            )));
        }
        let mut warnings: Vec<String> = regime_mismatch(params, scenario.regime).into_iter().collect();
        if !stability.is_stable() {
            warnings.push(format!("unstable: {}", stability.violations().join(", ")));
        }
        Ok(Prepared {
            scenario: scenario.clone(),
            roots,
            coeffs,
            stability,
            warnings,
            propagator: Propagator::new(&coeffs)?,
            sigma0: epr_initial(scenario.p, scenario.r_s)?,
        })
    }

    pub fn covariance_at(&self, t: f64) -> Result<Covariance4> {
        self.propagator.evolve_covariance(&self.sigma0, t).map_err(|e| e.at_time(t))
    }

    pub fn report_at(&self, t: f64) -> Result<InfoReport> {
        let sigma = self.covariance_at(t)?;
        InfoReport::compute(t, &sigma, self.scenario.tol).map_err(|e| e.at_time(t))
    }

    /// ν̃₁ − 1 or ν₁ − 1 at time t.
    pub fn channel_value(&self, channel: Channel, t: f64) -> Result<f64> {
        match channel {
            Channel::Separability => Ok(self.report_at(t)?.nu1_pt - 1.0),
            Channel::Positivity => {
                let s = symplectic_eigenvalues(&self.covariance_at(t)?).map_err(|e| e.at_time(t))?;
                Ok(s.nu1 - 1.0)
            }
        }
    }

    /// Scenario parameters and derived constants, for output headers.
    pub fn header(&self) -> Vec<(String, String)> {
        let s = &self.scenario;
        let c = &self.coeffs;
        let mut h: Vec<(String, String)> = vec![
            ("hpz_version".into(), VERSION.into()),
            ("scenario".into(), s.name.clone()),
            ("regime".into(), s.regime.to_string()),
            ("omega_c".into(), fmt_f64(s.params.omega_c)),
            ("gamma".into(), fmt_f64(s.params.gamma)),
            ("temperature".into(), fmt_f64(s.params.temperature)),
            ("kappa".into(), fmt_f64(s.params.kappa)),
            ("p".into(), fmt_f64(s.p)),
            ("r_s".into(), fmt_f64(s.r_s)),
            ("t_start".into(), fmt_f64(s.grid.t_start)),
            ("t_end".into(), fmt_f64(s.grid.t_end)),
            ("n_points".into(), s.grid.n_points.to_string()),
            ("spacing".into(), s.grid.spacing.to_string()),
            ("tol".into(), fmt_f64(s.tol)),
        ];
        for (i, z) in self.roots.z.iter().enumerate() {
            h.push((format!("z{}", i + 1), format_complex(z.re, z.im)));
        }
        h.extend([
            ("A".into(), fmt_f64(c.a)),
            ("B".into(), fmt_f64(c.b)),
            ("C".into(), fmt_f64(c.c)),
            ("D".into(), fmt_f64(c.d)),
            ("lambda".into(), fmt_f64(c.lambda)),
            ("omega_c_eff".into(), fmt_f64(c.omega_c())),
            ("omega_d".into(), fmt_f64(c.omega_d())),
            ("D_px".into(), fmt_f64(c.d_px)),
            ("D_pp".into(), fmt_f64(c.d_pp)),
            ("gamma_crit".into(), fmt_f64(s.params.gamma_crit())),
            ("kappa_crit".into(), fmt_f64(PhysicalParams::kappa_crit())),
            ("stable".into(), self.stability.is_stable().to_string()),
            ("units".into(), "hbar=m=Omega=1; entropies in nats; E_N in bits".into()),
        ]);
        for w in &self.warnings {
            h.push(("warning".into(), w.clone()));
        }
        h
    }
}

pub fn format_complex(re: f64, im: f64) -> String {
    if im < 0.0 {
        format!("{}-{}i", fmt_f64(re), fmt_f64(-im))
    } else {
        format!("{}+{}i", fmt_f64(re), fmt_f64(im))
    }
}

/// Evaluates the scenario on its grid, in parallel, rows in time order.
pub fn run_scenario(scenario: &Scenario) -> Result<(Prepared, Vec<InfoReport>)> {
    let prepared = Prepared::new(scenario)?;
    let reports = evaluate_grid(&prepared, &scenario.grid.points())?;
    Ok((prepared, reports))
}

pub fn evaluate_grid(prepared: &Prepared, times: &[f64]) -> Result<Vec<InfoReport>> {
    times.par_iter().map(|&t| prepared.report_at(t)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Separability,
    Positivity,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Separability => "separability",
            Channel::Positivity => "positivity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    Entangle,
    Disentangle,
    PositivityGain,
    PositivityLoss,
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitionKind::Entangle => "entangle",
            TransitionKind::Disentangle => "disentangle",
            TransitionKind::PositivityGain => "positivity_gain",
            TransitionKind::PositivityLoss => "positivity_loss",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionEvent {
    pub kind: TransitionKind,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionScan {
    pub channel: Channel,
    pub events: Vec<TransitionEvent>,
    pub warnings: Vec<String>,
    /// Verdict at the last grid point: separable, or physical.
    pub holds_at_end: bool,
    pub window: (f64, f64),
}

impl TransitionScan {
    /// Separability onset tₛ: the last disentangle event with no later
    /// entangle event in the window. `None` if the state is still entangled at
    /// the end of the window, the window start if it never was entangled.
    pub fn separability_onset(&self) -> Option<f64> {
        if self.channel != Channel::Separability || !self.holds_at_end {
            return None;
        }
        match self.events.last() {
            Some(e) => Some(e.t),
            None => Some(self.window.0),
        }
    }

    pub fn times_of(&self, kind: TransitionKind) -> Vec<f64> {
        self.events.iter().filter(|e| e.kind == kind).map(|e| e.t).collect()
    }
}

fn holds(channel: Channel, report: &InfoReport) -> bool {
    match channel {
        Channel::Separability => report.separable,
        Channel::Positivity => report.positive,
    }
}

/// Brackets verdict changes of one channel on the report grid and refines
/// each by bisection on the closed-form pipeline.
pub fn detect_transitions(prepared: &Prepared, reports: &[InfoReport], channel: Channel) -> Result<TransitionScan> {
    if reports.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidInput("time grid must be strictly increasing".into()));
    }
    let tol = prepared.scenario.tol;
    let brackets: Vec<(usize, bool)> = reports
        .windows(2)
        .enumerate()
        .filter(|(_, w)| holds(channel, &w[0]) != holds(channel, &w[1]))
        .map(|(i, w)| (i, holds(channel, &w[1])))
        .collect();

    let events = brackets
        .par_iter()
        .map(|&(i, gained)| {
            let (mut lo, mut hi) = (reports[i].t, reports[i + 1].t);
            while hi - lo > EVENT_RESOLUTION {
                let mid = 0.5 * (lo + hi);
                let v = prepared.channel_value(channel, mid)?;
                // same comparisons as InfoReport::separable / ::positive
                let ok = match channel {
                    Channel::Separability => v >= -tol,
                    Channel::Positivity => v > -tol,
                };
                if ok == gained {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let kind = match (channel, gained) {
                (Channel::Separability, true) => TransitionKind::Disentangle,
                (Channel::Separability, false) => TransitionKind::Entangle,
                (Channel::Positivity, true) => TransitionKind::PositivityGain,
                (Channel::Positivity, false) => TransitionKind::PositivityLoss,
            };
            Ok((i, TransitionEvent { kind, t: 0.5 * (lo + hi) }))
        })
        .collect::<Result<Vec<_>>>()?;

    let warnings = events
        .windows(2)
        .filter(|w| w[1].0 - w[0].0 < 3)
        .map(|w| {
            format!(
                "grid too coarse: {channel} events at t = {} and t = {} are fewer than 3 grid steps apart",
                w[0].1.t, w[1].1.t
            )
        })
        .collect();

    let (first, last) = match (reports.first(), reports.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidInput("empty report stream".into())),
    };
    Ok(TransitionScan {
        channel,
        events: events.into_iter().map(|(_, e)| e).collect(),
        warnings,
        holds_at_end: holds(channel, last),
        window: (first.t, last.t),
    })
}
