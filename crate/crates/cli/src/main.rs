//! `hpz`: coefficient reports, time evolution, transition scans, parameter
//! sweeps and oracle checks for the two-oscillator Markovian bath model.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use hpz_core::coefficients::{check_stability, coefficients_with, regime_mismatch, CoefficientOptions, RegimeTag};
use hpz_core::oracle::{integrate_moments_checkpoints, master_equation_residual, r2_quadrature, step_bound};
use hpz_core::output::{fmt_f64, Cell, Format, Table};
use hpz_core::scenario::{detect_transitions, format_complex, run_scenario, Channel, Prepared, Scenario};
use hpz_core::special::solve_cubic;
use hpz_core::{Error, ErrorClass, OMEGA, VERSION};
use nalgebra::Vector4;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "hpz", version, about = "Exact Markovian dynamics of two coupled oscillators in a common bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Markovian coefficients, drift constants and stability margins.
    Coeffs(Common),
    /// Information quantities on the scenario's time grid.
    Evolve(Common),
    /// Entangle/disentangle and positivity events, with the separability onset.
    Entangle(Common),
    /// Re-run the scenario for several values of one key.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Scenario key to vary.
        #[arg(long)]
        param: String,
        /// Comma-separated values for the key.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Closed form against the RK4 integrator, the master equation and quadrature.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Integrate the moment equations on [0, horizon].
        #[arg(long, default_value_t = 50.0)]
        horizon: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file with key = value lines.
    #[arg(long, conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in figure scenario (fig1, fig2, fig3, fig4a, fig4b, fig5, fig5-hot).
    #[arg(long)]
    preset: Option<String>,
    /// Override one scenario key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Coefficient regime, or `all` for `coeffs`.
    #[arg(long)]
    regime: Option<String>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance for positivity and separability verdicts.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    allow_unstable: bool,
    /// Leave the generation timestamp out of the header.
    #[arg(long)]
    reproducible: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::InvalidInput => 2,
            ErrorClass::Stability => 3,
            ErrorClass::Numeric => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

impl Common {
    /// Scenario from file or preset, then `--set`, `--regime`, `--tol` and
    /// `--allow-unstable`. `--regime all` is only meaningful for `coeffs`,
    /// which passes `all_regimes` and handles it itself.
    fn scenario_with(&self, all_regimes: bool) -> CliResult<Scenario> {
        let mut s = match (&self.scenario, &self.preset) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
                Scenario::parse(&text).map_err(|e| Failure::from(e).context(&path.display().to_string()))?
            }
            (None, Some(name)) => Scenario::preset(name).ok_or_else(|| {
                Failure::invalid(format!("unknown preset '{name}' (expected one of {})", Scenario::PRESETS.join(", ")))
            })?,
            (None, None) => Scenario::default(),
        };
        for kv in &self.overrides {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Failure::invalid(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            s.set(k.trim(), v.trim())?;
        }
        match self.regime.as_deref() {
            Some("all") if all_regimes => {}
            Some("all") => return Err(Failure::invalid("--regime all is only accepted by coeffs")),
            Some(r) => s.regime = r.parse()?,
            None => {}
        }
        if let Some(tol) = self.tol {
            s.tol = tol;
        }
        s.allow_unstable |= self.allow_unstable;
        s.validate()?;
        Ok(s)
    }

    fn scenario(&self) -> CliResult<Scenario> {
        self.scenario_with(false)
    }

    fn format(&self) -> CliResult<Format> {
        Ok(self.format.parse()?)
    }

    fn emit(&self, mut table: Table) -> CliResult<()> {
        if !self.reproducible {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            table.meta.push(("generated_unix".into(), secs.to_string()));
        }
        let mut buf = Vec::new();
        table.write(self.format()?, &mut buf)?;
        match &self.out {
            Some(path) => fs::write(path, buf)
                .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(&buf)
                .map_err(|e| Failure::invalid(format!("cannot write output: {e}"))),
        }
    }
}

fn coeffs(common: &Common) -> CliResult<()> {
    // validated up front so a bad format fails before any work
    common.format()?;
    let s = common.scenario_with(true)?;
    let regimes: Vec<RegimeTag> = match common.regime.as_deref() {
        Some("all") => RegimeTag::ALL.to_vec(),
        _ => vec![s.regime],
    };
    let p = &s.params;
    let roots = solve_cubic(OMEGA, p.omega_c, p.gamma)?;
    let mut meta = vec![
        ("hpz_version".to_string(), VERSION.to_string()),
        ("omega_c".into(), fmt_f64(p.omega_c)),
        ("gamma".into(), fmt_f64(p.gamma)),
        ("temperature".into(), fmt_f64(p.temperature)),
        ("kappa".into(), fmt_f64(p.kappa)),
        ("units".into(), "hbar=m=Omega=1".into()),
    ];

    let mut columns: Vec<Vec<(String, Cell)>> = Vec::new();
    for &regime in &regimes {
        if let Some(w) = regime_mismatch(p, regime) {
            meta.push(("warning".into(), w));
        }
        let c = coefficients_with(p, regime, CoefficientOptions::default())?;
        let stability = check_stability(&c, &roots);
        let mut rec: Vec<(String, Cell)> = roots
            .z
            .iter()
            .enumerate()
            .map(|(i, z)| (format!("z{}", i + 1), Cell::Text(format_complex(z.re, z.im))))
            .collect();
        rec.extend([
            ("A".into(), c.a.into()),
            ("B".into(), c.b.into()),
            ("C".into(), c.c.into()),
            ("D".into(), c.d.into()),
            ("lambda".into(), c.lambda.into()),
            ("omega_c_eff".into(), c.omega_c().into()),
            ("omega_d".into(), c.omega_d().into()),
            ("D_px".into(), c.d_px.into()),
            ("D_pp".into(), c.d_pp.into()),
            ("gamma_crit".into(), p.gamma_crit().into()),
            ("kappa_crit".into(), hpz_core::coefficients::PhysicalParams::kappa_crit().into()),
            ("stable".into(), Cell::Bool(stability.is_stable())),
            ("roots_stable".into(), Cell::Bool(stability.roots_stable)),
            ("drift_stable".into(), Cell::Bool(stability.drift_stable)),
            ("diffusion_stable".into(), Cell::Bool(stability.diffusion_stable)),
        ]);
        rec.extend(stability.margins.iter().map(|m| (format!("margin_{}", m.name), m.value.into())));
        columns.push(rec);
    }

    let header: Vec<String> = if regimes.len() == 1 {
        meta.push(("regime".into(), regimes[0].to_string()));
        vec!["key".into(), "value".into()]
    } else {
        std::iter::once("key".to_string()).chain(regimes.iter().map(|r| r.to_string())).collect()
    };
    let mut table = Table::new(meta, header);
    for (i, (key, _)) in columns[0].iter().enumerate() {
        let mut row = vec![Cell::Text(key.clone())];
        row.extend(columns.iter().map(|col| col[i].1.clone()));
        table.push(row);
    }
    common.emit(table)
}

fn evolve(common: &Common) -> CliResult<()> {
    common.format()?;
    let s = common.scenario()?;
    let (prep, reports) = run_scenario(&s)?;
    common.emit(Table::from_reports(prep.header(), &s.outputs, &reports)?)
}

fn entangle(common: &Common) -> CliResult<()> {
    common.format()?;
    let s = common.scenario()?;
    let (prep, reports) = run_scenario(&s)?;
    let mut meta = prep.header();
    let mut table = Table::new(Vec::new(), vec!["channel".into(), "kind".into(), "t".into()]);
    for channel in [Channel::Separability, Channel::Positivity] {
        let scan = detect_transitions(&prep, &reports, channel)?;
        if channel == Channel::Separability {
            let ts = scan.separability_onset().map_or("none".to_string(), fmt_f64);
            meta.push(("t_s".into(), ts));
            meta.push(("window".into(), format!("[{}, {}]", fmt_f64(scan.window.0), fmt_f64(scan.window.1))));
            meta.push(("separable_at_end".into(), scan.holds_at_end.to_string()));
        } else {
            meta.push(("physical_at_end".into(), scan.holds_at_end.to_string()));
        }
        meta.extend(scan.warnings.iter().map(|w| ("warning".to_string(), w.clone())));
        for e in &scan.events {
            table.push(vec![
                Cell::Text(channel.to_string()),
                Cell::Text(e.kind.to_string()),
                Cell::Num(e.t),
            ]);
        }
    }
    table.meta = meta;
    common.emit(table)
}

fn sweep(common: &Common, param: &str, values: &[String]) -> CliResult<()> {
    common.format()?;
    if param == "outputs" || !Scenario::KEYS.contains(&param) {
        return Err(Failure::invalid(format!("cannot sweep over '{param}'")));
    }
    let base = common.scenario()?;
    let runs = values
        .par_iter()
        .map(|v| {
            let label = format!("{param}={v}");
            let mut s = base.clone();
            s.set(param, v).map_err(|e| Failure::from(e).context(&label))?;
            run_scenario(&s).map_err(|e| Failure::from(e).context(&label))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut meta = vec![
        ("hpz_version".to_string(), VERSION.to_string()),
        ("sweep_param".into(), param.to_string()),
        ("sweep_values".into(), values.join(",")),
    ];
    for (v, (prep, _)) in values.iter().zip(&runs) {
        meta.extend(
            prep.header()
                .into_iter()
                .filter(|(k, _)| k != "hpz_version")
                .map(|(k, val)| (format!("{k}[{param}={v}]"), val)),
        );
    }
    if base.outputs.is_empty() {
        return common.emit(Table::new(meta, Vec::new()));
    }
    let mut table = Table::new(meta, Vec::new());
    for (v, (prep, reports)) in values.iter().zip(&runs) {
        let part = Table::from_reports(Vec::new(), &prep.scenario.outputs, reports)?;
        if table.columns.is_empty() {
            table.columns = std::iter::once(param.to_string()).chain(part.columns.iter().cloned()).collect();
        }
        for row in part.rows {
            table.push(std::iter::once(Cell::Text(v.clone())).chain(row).collect());
        }
    }
    common.emit(table)
}

/// Deterministic low-discrepancy point in [0, 1): the fractional part of
/// i times an irrational.
fn weyl(i: usize, alpha: f64) -> f64 {
    (i as f64 * alpha).fract()
}

fn validate(common: &Common, horizon: f64) -> CliResult<bool> {
    common.format()?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Failure::invalid(format!("horizon must be positive, got {horizon}")));
    }
    let s = common.scenario()?;
    let prep = Prepared::new(&s)?;
    let prop = &prep.propagator;
    let mut checks: Vec<(String, f64, f64)> = Vec::new();

    let n = horizon.ceil() as usize;
    let times: Vec<f64> = (1..=n).map(|i| horizon * i as f64 / n as f64).collect();
    let dt = step_bound(&prep.coeffs) / 4.0;
    let rk = integrate_moments_checkpoints(prop, &prep.sigma0, &times, dt)?;
    let mut worst = 0.0f64;
    for (t, sigma) in times.iter().zip(&rk) {
        let closed = prop.evolve_covariance(&prep.sigma0, *t)?;
        worst = worst.max((closed.sigma() - sigma.sigma()).amax());
    }
    checks.push(("rk4_max_abs_diff".into(), worst, 1e-8));

    let mut worst = 0.0f64;
    for i in 1..=100 {
        let t = horizon * weyl(i, 0.6180339887498949).max(1e-3);
        let w = Vector4::new(
            weyl(i, 0.4142135623730951),
            weyl(i, 0.7320508075688772),
            weyl(i, 0.2360679774997898),
            weyl(i, 0.6457513110645907),
        )
        .map(|x| 0.1 * x - 0.05);
        worst = worst.max(master_equation_residual(prop, &prep.sigma0, &w, t)?);
    }
    checks.push(("master_residual_max".into(), worst, 1e-8));

    for t in [horizon / 10.0, horizon / 2.0, horizon] {
        let closed = prop.r2(t)?;
        let quad = r2_quadrature(prop, t, 1e-13 * closed.amax().max(1e-300));
        let rel = (closed - quad).amax() / closed.amax().max(f64::MIN_POSITIVE);
        checks.push((format!("r2_quadrature_rel_diff[t={}]", fmt_f64(t)), rel, 1e-8));
    }

    let passed = checks.iter().all(|(_, v, thr)| *v < *thr);
    let mut meta = prep.header();
    meta.push(("horizon".into(), fmt_f64(horizon)));
    meta.push(("rk4_dt".into(), fmt_f64(dt)));
    meta.push(("verdict".into(), if passed { "pass" } else { "fail" }.into()));
    let mut table = Table::new(meta, vec!["check".into(), "value".into(), "threshold".into(), "pass".into()]);
    for (name, v, thr) in checks {
        table.push(vec![Cell::Text(name), Cell::Num(v), Cell::Num(thr), Cell::Bool(v < thr)]);
    }
    common.emit(table)?;
    Ok(passed)
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Coeffs(c) => coeffs(c),
        Command::Evolve(c) => evolve(c),
        Command::Entangle(c) => entangle(c),
        Command::Sweep { common, param, values } => sweep(common, param, values),
        Command::Validate { common, horizon } => {
            if validate(common, *horizon)? {
                Ok(())
            } else {
                Err(Failure {
                    code: 4,
                    message: "validation failed".into(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hpz: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
