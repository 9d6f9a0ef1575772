//! The CLI commands. Each writes one CSV table to `out` and notes to `note`.
//!
//! Schemas (column order is fixed):
//!
//! | command   | columns |
//! |-----------|---------|
//! | price     | `moneyness,call,bs,diff` |
//! | smile     | `moneyness,implied_vol_annual` |
//! | density   | `x,p` |
//! | greeks    | `moneyness,delta` |
//! | simulate  | `moneyness,mc_price,std_err,analytic,abs_diff` |
//! | stats     | `tau,leverage_mc,leverage_fml,autocorr_mc,autocorr_fml,leverage_se,autocorr_se` |
//! | calibrate | `lambda0,lambda1,rmse,n_quotes,converged,iterations` |
//!
//! Moneyness is spot over strike. Prices, deltas and simulated prices keep
//! the configured spot and set the strike to `spot / moneyness`. Missing
//! values (failed implied-vol inversions, autocorrelation at negative lags)
//! are empty fields.

use std::io::Write;
use std::path::{Path, PathBuf};

use expou_core::calibration::{calibrate_risk_aversion, reprice};
use expou_core::mc::{mc_call_prices, mc_return_stats, simulate_paths, DEFAULT_SAMPLE_BUDGET};
use expou_core::model::{leverage, squared_return_autocorr};
use expou_core::pricer::{delta, expou_call, OptionSpec};
use expou_core::risk_neutral::{expansion_coeffs, return_density, ExpansionCoeffs, RegimeWarning};
use expou_core::{
    smile_curve, CalibOptions, InitialLogVol, Market, MartingaleParams, Measure, SdeParams, SimConfig, Weighting,
};

use crate::config::{linspace, ConfigError, Resolved, Start};
use crate::exec::Rayon;
use crate::format::fmt_g;
use crate::quotes::{load_quotes, QuoteFileError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Quotes(#[from] QuoteFileError),
    #[error("{0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("computation failed: {0}")]
    Compute(#[from] expou_core::Error),
}

impl CliError {
    /// 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(_) => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn io(path: &str) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: PathBuf::from(path),
        source,
    }
}

/// CSV writer for rows of numbers.
struct Table<'a> {
    out: &'a mut dyn Write,
}

impl<'a> Table<'a> {
    fn new(out: &'a mut dyn Write, header: &[&str]) -> Result<Self> {
        writeln!(out, "{}", header.join(",")).map_err(io("output"))?;
        Ok(Self { out })
    }

    fn row(&mut self, cells: &[Option<f64>]) -> Result<()> {
        let line: Vec<String> = cells.iter().map(|c| c.map(fmt_g).unwrap_or_default()).collect();
        writeln!(self.out, "{}", line.join(",")).map_err(io("output"))
    }

    fn values(&mut self, cells: &[f64]) -> Result<()> {
        let cells: Vec<Option<f64>> = cells.iter().copied().map(Some).collect();
        self.row(&cells)
    }
}

/// Accumulates regime warnings over a grid and reports them once.
#[derive(Default)]
struct RegimeNotes {
    flagged: usize,
    any: RegimeWarning,
}

impl RegimeNotes {
    fn add(&mut self, w: RegimeWarning) {
        if w.any() {
            self.flagged += 1;
            self.any.small_lambda |= w.small_lambda;
            self.any.large_corrections |= w.large_corrections;
            self.any.negative_price |= w.negative_price;
        }
    }

    fn report(&self, note: &mut dyn Write) {
        if self.flagged == 0 {
            return;
        }
        let mut reasons = Vec::new();
        if self.any.small_lambda {
            reasons.push("lambda = k / m_bar is small");
        }
        if self.any.large_corrections {
            reasons.push("correction terms are large");
        }
        if self.any.negative_price {
            reasons.push("negative approximate price");
        }
        let _ = writeln!(
            note,
            "note: {} point(s) outside the trusted regime of the expansion ({})",
            self.flagged,
            reasons.join("; ")
        );
    }
}

fn setup(cfg: &Resolved) -> Result<(MartingaleParams, ExpansionCoeffs)> {
    let mp = cfg.martingale()?;
    let coeffs = expansion_coeffs(&mp, cfg.grid.maturity, cfg.rate)?;
    Ok((mp, coeffs))
}

fn spec_at(cfg: &Resolved, moneyness: f64) -> Result<OptionSpec> {
    Ok(OptionSpec::new(cfg.spot, cfg.spot / moneyness, cfg.grid.maturity, cfg.rate)?)
}

fn print_warnings(cfg: &Resolved, note: &mut dyn Write) {
    for w in &cfg.warnings {
        let _ = writeln!(note, "warning: {w}");
    }
}

/// Corrected and Black-Scholes call prices over the moneyness grid.
pub fn cmd_price(cfg: &Resolved, out: &mut dyn Write, note: &mut dyn Write) -> Result<()> {
    print_warnings(cfg, note);
    let (mp, coeffs) = setup(cfg)?;
    let mut t = Table::new(out, &["moneyness", "call", "bs", "diff"])?;
    let mut notes = RegimeNotes::default();
    for &g in &cfg.grid.moneyness {
        let b = expou_call(&spec_at(cfg, g)?, &mp, &coeffs)?;
        notes.add(b.warning);
        t.values(&[g, b.total, b.bs, b.total - b.bs])?;
    }
    notes.report(note);
    Ok(())
}

/// Annualised implied volatility of the corrected price.
pub fn cmd_smile(cfg: &Resolved, out: &mut dyn Write, note: &mut dyn Write) -> Result<()> {
    print_warnings(cfg, note);
    let (mp, coeffs) = setup(cfg)?;
    let template = OptionSpec::new(cfg.spot, cfg.spot, cfg.grid.maturity, cfg.rate)?;
    let smile = smile_curve(&mp, &coeffs, &cfg.grid.moneyness, &template)?;
    let mut t = Table::new(out, &["moneyness", "implied_vol_annual"])?;
    let mut failed = 0;
    for p in smile {
        failed += usize::from(p.implied_vol_annual.is_none());
        t.row(&[Some(p.moneyness), p.implied_vol_annual])?;
    }
    if failed > 0 {
        let _ = writeln!(note, "note: implied volatility not found at {failed} point(s); left empty");
    }
    Ok(())
}

/// Risk-neutral log-return density over the drift plus or minus six
/// standard deviations, on `grid.points` points.
pub fn cmd_density(cfg: &Resolved, out: &mut dyn Write, note: &mut dyn Write) -> Result<()> {
    print_warnings(cfg, note);
    let (_, coeffs) = setup(cfg)?;
    let sd = coeffs.base_variance().sqrt();
    let xs = linspace(coeffs.drift - 6.0 * sd, coeffs.drift + 6.0 * sd, cfg.grid.moneyness.len().max(2));
    let mut t = Table::new(out, &["x", "p"])?;
    let mut negative = 0;
    for x in xs {
        let p = return_density(&coeffs, x)?;
        negative += usize::from(p < 0.0);
        t.values(&[x, p])?;
    }
    if negative > 0 {
        let _ = writeln!(note, "note: density is negative at {negative} point(s); the expansion is stretched");
    }
    Ok(())
}

/// Hedge ratio of the corrected call.
pub fn cmd_greeks(cfg: &Resolved, out: &mut dyn Write, note: &mut dyn Write) -> Result<()> {
    print_warnings(cfg, note);
    let (mp, coeffs) = setup(cfg)?;
    let mut t = Table::new(out, &["moneyness", "delta"])?;
    for &g in &cfg.grid.moneyness {
        t.values(&[g, delta(&spec_at(cfg, g)?, &mp, &coeffs)?])?;
    }
    Ok(())
}

/// Optional raw-path export for [`cmd_simulate`].
#[derive(Debug, Clone)]
pub struct PathExport {
    pub path: PathBuf,
    /// Number of leading paths to write.
    pub n_paths: usize,
}

/// Monte Carlo prices against the corrected formula.
pub fn cmd_simulate(
    cfg: &Resolved,
    export: Option<&PathExport>,
    out: &mut dyn Write,
    note: &mut dyn Write,
) -> Result<()> {
    print_warnings(cfg, note);
    let (mp, coeffs) = setup(cfg)?;
    let sim = SimConfig::for_horizon(cfg.sim.n_paths, cfg.grid.maturity, cfg.sim.dt, cfg.sim.seed, Measure::Martingale)?
        .with_antithetic(cfg.sim.antithetic)?;
    let sde = SdeParams::martingale(&mp, cfg.rate);
    let init = InitialLogVol::Fixed(mp.z0());
    let strikes: Vec<f64> = cfg.grid.moneyness.iter().map(|g| cfg.spot / g).collect();
    let mc = mc_call_prices(&sde, &sim, init, cfg.spot, &strikes, &Rayon)?;
    let mut t = Table::new(out, &["moneyness", "mc_price", "std_err", "analytic", "abs_diff"])?;
    for (&g, est) in cfg.grid.moneyness.iter().zip(&mc) {
        let analytic = expou_call(&spec_at(cfg, g)?, &mp, &coeffs)?.total;
        t.values(&[g, est.value, est.std_error, analytic, (est.value - analytic).abs()])?;
    }
    if let Some(export) = export {
        // Path i of a smaller ensemble uses the same random stream as path i
        // of the full run, so the export shows the simulated paths.
        let n = if cfg.sim.antithetic { export.n_paths.next_multiple_of(2) } else { export.n_paths };
        let sub = SimConfig::new(n.max(1), sim.n_steps(), sim.dt(), sim.seed(), Measure::Martingale)?
            .with_antithetic(cfg.sim.antithetic)?;
        let ens = simulate_paths(&sde, &sub, init, DEFAULT_SAMPLE_BUDGET, &Rayon)?;
        write_paths(&export.path, &ens, export.n_paths.min(ens.n_paths()))?;
    }
    Ok(())
}

fn write_paths(path: &Path, ens: &expou_core::mc::PathEnsemble, n_paths: usize) -> Result<()> {
    let err = |source| CliError::Output {
        path: path.to_owned(),
        source,
    };
    let file = std::fs::File::create(path).map_err(err)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "path,step,t_days,x,y").map_err(err)?;
    for p in 0..n_paths {
        for s in 0..=ens.n_steps() {
            let t = s as f64 * ens.dt();
            writeln!(w, "{},{},{},{},{}", p, s, fmt_g(t), fmt_g(ens.x(p, s)), fmt_g(ens.y(p, s))).map_err(err)?;
        }
    }
    w.flush().map_err(err)
}

/// Settings of [`cmd_stats`].
#[derive(Debug, Clone)]
pub struct StatsRequest {
    /// Lags in days; each must be a whole number of steps.
    pub taus: Vec<f64>,
    /// Simulated horizon in days; must exceed every lag.
    pub horizon: f64,
    pub bootstrap: usize,
}

/// Physical-measure leverage and squared-return autocorrelation against the
/// closed forms. The autocorrelation at lag zero is one by construction of
/// the estimator; the closed form there is the `tau -> 0+` limit.
pub fn cmd_stats(cfg: &Resolved, req: &StatsRequest, out: &mut dyn Write, note: &mut dyn Write) -> Result<()> {
    print_warnings(cfg, note);
    let sim = SimConfig::for_horizon(cfg.sim.n_paths, req.horizon, cfg.sim.dt, cfg.sim.seed, Measure::Physical)?
        .with_antithetic(cfg.sim.antithetic)?;
    let opts = expou_core::mc::StatsOptions {
        bootstrap: req.bootstrap,
        drift: 0.0,
    };
    let stats = mc_return_stats(&cfg.params, &sim, &req.taus, &opts, &Rayon)?;
    let mut t = Table::new(
        out,
        &["tau", "leverage_mc", "leverage_fml", "autocorr_mc", "autocorr_fml", "leverage_se", "autocorr_se"],
    )?;
    for s in stats {
        let fml = squared_return_autocorr(&cfg.params, s.tau).ok();
        t.row(&[
            Some(s.tau),
            Some(s.leverage.value),
            Some(leverage(&cfg.params, s.tau)),
            s.sq_autocorr.map(|e| e.value),
            fml,
            Some(s.leverage.std_error),
            s.sq_autocorr.map(|e| e.std_error),
        ])?;
    }
    Ok(())
}

/// Settings of [`cmd_calibrate`].
#[derive(Debug, Clone)]
pub struct CalibrateRequest {
    pub quotes: PathBuf,
    pub weighting: Weighting,
    /// Where to write the per-quote repricing table, if anywhere.
    pub residuals: Option<PathBuf>,
}

/// Fits the risk aversion to a quote file.
pub fn cmd_calibrate(cfg: &Resolved, req: &CalibrateRequest, out: &mut dyn Write, note: &mut dyn Write) -> Result<()> {
    print_warnings(cfg, note);
    let Start::LogVol(y0) = cfg.start else {
        return Err(CliError::Input(
            "calibrate needs market.sigma0_annual: the martingale state z0 depends on the fitted risk aversion".to_owned(),
        ));
    };
    let quotes = load_quotes(&req.quotes)?;
    let market = Market {
        spot: cfg.spot,
        rate: cfg.rate,
        y0,
    };
    let opts = CalibOptions {
        weighting: req.weighting,
        ..CalibOptions::default()
    };
    let fit = calibrate_risk_aversion(&quotes, &cfg.params, &market, &opts)?;
    if !fit.converged {
        let _ = writeln!(note, "note: calibration hit the iteration cap; reporting the best point found");
    }
    let t = Table::new(out, &["lambda0", "lambda1", "rmse", "n_quotes", "converged", "iterations"])?;
    writeln!(
        t.out,
        "{},{},{},{},{},{}",
        fmt_g(fit.lambda0),
        fmt_g(fit.lambda1),
        fmt_g(fit.rmse),
        fit.n_quotes,
        fit.converged,
        fit.iterations
    )
    .map_err(io("output"))?;
    if let Some(path) = &req.residuals {
        let model = reprice(&quotes, &cfg.params, &market, fit.risk_aversion())?;
        let err = |source| CliError::Output {
            path: path.clone(),
            source,
        };
        let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(err)?);
        let mut t = Table::new(&mut w, &["strike", "mid", "model", "residual"])?;
        for (q, m) in quotes.iter().zip(&model) {
            t.values(&[q.strike(), q.mid(), *m, m - q.mid()])?;
        }
        w.flush().map_err(err)?;
    }
    Ok(())
}
