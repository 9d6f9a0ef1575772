//! Seeded Monte Carlo simulation of the expOU system.
//!
//! Scheme, per step of length `dt`:
//!
//! ```text
//! g1, g_perp ~ N(0, 1) independent,  g2 = rho g1 + sqrt(1 - rho^2) g_perp
//! sigma = level * exp(y)
//! x    += (drift - sigma^2 / 2) dt + sigma sqrt(dt) g1
//! y     = y e^{-reversion dt} + sqrt(k^2 / (2 reversion) (1 - e^{-2 reversion dt})) g2
//! ```
//!
//! The log-volatility uses its exact Gaussian transition, so its marginals
//! carry no discretisation error; the log-price is an Euler step, which keeps
//! `E[exp(x_{n+1} - x_n) | F_n] = exp(drift dt)` exact.
//!
//! Randomness: path `i` owns the ChaCha8 stream `i` of the generator seeded
//! with `seed_from_u64(seed)`. Normals are drawn with `rand_distr`'s
//! ziggurat `StandardNormal`, in the order initial state (stationary start
//! only), then `g1, g_perp` for each step. With antithetic variates, paths
//! `2j` and `2j + 1` share stream `j` and the odd path negates every draw.
//!
//! Estimators split the paths into fixed-size chunks whose size depends only
//! on the configuration. Chunks may run on any [`PathExecutor`]; results are
//! merged in chunk order, so serial and parallel runs agree bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, expm1, round, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::ModelParams;
use crate::risk_neutral::MartingaleParams;
use crate::{Error, Result};

/// Probability measure a simulation runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Physical,
    Martingale,
}

/// Simulation size and seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    n_paths: usize,
    n_steps: usize,
    dt: f64,
    seed: u64,
    measure: Measure,
    antithetic: bool,
}

impl SimConfig {
    pub fn new(n_paths: usize, n_steps: usize, dt: f64, seed: u64, measure: Measure) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::InvalidParameter {
                name: "n_paths",
                value: 0.0,
                reason: "need at least one path",
            });
        }
        if n_steps == 0 {
            return Err(Error::InvalidParameter {
                name: "n_steps",
                value: 0.0,
                reason: "need at least one step",
            });
        }
        crate::model::positive("dt", dt)?;
        Ok(Self {
            n_paths,
            n_steps,
            dt,
            seed,
            measure,
            antithetic: false,
        })
    }

    /// Configuration covering `horizon` days with steps of about `dt`.
    pub fn for_horizon(n_paths: usize, horizon: f64, dt: f64, seed: u64, measure: Measure) -> Result<Self> {
        crate::model::positive("horizon", horizon)?;
        crate::model::positive("dt", dt)?;
        let n_steps = (round(horizon / dt) as usize).max(1);
        Self::new(n_paths, n_steps, horizon / n_steps as f64, seed, measure)
    }

    /// Enables antithetic pairs. Needs an even number of paths.
    pub fn with_antithetic(mut self, antithetic: bool) -> Result<Self> {
        if antithetic && self.n_paths % 2 != 0 {
            return Err(Error::InvalidParameter {
                name: "n_paths",
                value: self.n_paths as f64,
                reason: "antithetic sampling needs an even number of paths",
            });
        }
        self.antithetic = antithetic;
        Ok(self)
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn antithetic(&self) -> bool {
        self.antithetic
    }

    /// Total simulated time, `n_steps * dt`.
    pub fn horizon(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

/// Coefficients of the simulated diffusion under one measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeParams {
    level: f64,
    reversion: f64,
    k: f64,
    rho: f64,
    drift: f64,
    measure: Measure,
}

impl SdeParams {
    /// Physical dynamics with price drift `drift` (day^-1).
    pub fn physical(p: &ModelParams, drift: f64) -> Self {
        Self {
            level: p.m(),
            reversion: p.alpha(),
            k: p.k(),
            rho: p.rho(),
            drift,
            measure: Measure::Physical,
        }
    }

    /// Risk-neutral dynamics; the price drifts at the risk-free `rate`.
    pub fn martingale(mp: &MartingaleParams, rate: f64) -> Self {
        Self {
            level: mp.m_bar(),
            reversion: mp.alpha_bar(),
            k: mp.k(),
            rho: mp.rho(),
            drift: rate,
            measure: Measure::Martingale,
        }
    }

    /// Arbitrary coefficients. Unlike [`ModelParams`], `k = 0` is allowed,
    /// which freezes the volatility onto its deterministic relaxation.
    pub fn new(level: f64, reversion: f64, k: f64, rho: f64, drift: f64, measure: Measure) -> Result<Self> {
        crate::model::positive("level", level)?;
        crate::model::positive("reversion", reversion)?;
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "k",
                value: k,
                reason: "vol-of-vol must be finite and nonnegative",
            });
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "correlation must lie in [-1, 1]",
            });
        }
        if !drift.is_finite() {
            return Err(Error::InvalidParameter {
                name: "drift",
                value: drift,
                reason: "must be finite",
            });
        }
        Ok(Self {
            level,
            reversion,
            k,
            rho,
            drift,
            measure,
        })
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// Stationary variance of the log-volatility.
    pub fn stationary_variance(&self) -> f64 {
        self.k * self.k / (2.0 * self.reversion)
    }
}

/// Starting log-volatility of every path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialLogVol {
    Fixed(f64),
    /// Drawn from the stationary law `N(0, k^2 / (2 reversion))`.
    Stationary,
}

/// Runs independent tasks, possibly in parallel, returning results in task
/// order.
pub trait PathExecutor {
    fn run<T, F>(&self, n_tasks: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs tasks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl PathExecutor for Serial {
    fn run<T, F>(&self, n_tasks: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n_tasks).map(task).collect()
    }
}

/// Simulates path `path` and calls `visit(step, x, y)` for every step
/// `0..=n_steps`, where `x` is the log-return since time 0.
pub fn simulate_path<V: FnMut(usize, f64, f64)>(sde: &SdeParams, cfg: &SimConfig, init: InitialLogVol, path: usize, mut visit: V) {
    let (stream, sign) = if cfg.antithetic {
        (path / 2, if path % 2 == 1 { -1.0 } else { 1.0 })
    } else {
        (path, 1.0)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream as u64);
    let mut draw = || -> f64 { sign * rng.sample::<f64, _>(StandardNormal) };

    let dt = cfg.dt;
    let sqrt_dt = sqrt(dt);
    let decay = exp(-sde.reversion * dt);
    let innovation = sqrt(sde.stationary_variance() * -expm1(-2.0 * sde.reversion * dt));
    let rho_perp = sqrt((1.0 - sde.rho * sde.rho).max(0.0));

    let mut y = match init {
        InitialLogVol::Fixed(y0) => y0,
        InitialLogVol::Stationary => sqrt(sde.stationary_variance()) * draw(),
    };
    let mut x = 0.0;
    visit(0, x, y);
    for step in 1..=cfg.n_steps {
        let g1 = draw();
        let g_perp = draw();
        let g2 = sde.rho * g1 + rho_perp * g_perp;
        let sigma = sde.level * exp(y);
        x += (sde.drift - 0.5 * sigma * sigma) * dt + sigma * sqrt_dt * g1;
        y = y * decay + innovation * g2;
        visit(step, x, y);
    }
}

/// Stored log-price and log-volatility samples of every path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    n_paths: usize,
    n_steps: usize,
    dt: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Log-return of `path` at `step` (`0..=n_steps`).
    pub fn x(&self, path: usize, step: usize) -> f64 {
        self.x[path * (self.n_steps + 1) + step]
    }

    /// Log-volatility of `path` at `step`.
    pub fn y(&self, path: usize, step: usize) -> f64 {
        self.y[path * (self.n_steps + 1) + step]
    }
}

/// Default cap on stored samples per ensemble (two `f64` each, ~800 MB).
pub const DEFAULT_SAMPLE_BUDGET: usize = 50_000_000;

/// Simulates and stores every path. Fails with [`Error::OverBudget`] when
/// `n_paths * (n_steps + 1)` exceeds `budget`; the estimators below stream
/// their statistics instead and have no such limit.
pub fn simulate_paths<E: PathExecutor>(
    sde: &SdeParams,
    cfg: &SimConfig,
    init: InitialLogVol,
    budget: usize,
    exec: &E,
) -> Result<PathEnsemble> {
    let width = cfg.n_steps + 1;
    let samples = cfg.n_paths.saturating_mul(width);
    if samples > budget {
        return Err(Error::OverBudget { samples, budget });
    }
    let rows = exec.run(cfg.n_paths, |path| {
        let mut xs = Vec::with_capacity(width);
        let mut ys = Vec::with_capacity(width);
        simulate_path(sde, cfg, init, path, |_, x, y| {
            xs.push(x);
            ys.push(y);
        });
        (xs, ys)
    });
    let mut x = Vec::with_capacity(samples);
    let mut y = Vec::with_capacity(samples);
    for (xs, ys) in rows {
        x.extend(xs);
        y.extend(ys);
    }
    Ok(PathEnsemble {
        n_paths: cfg.n_paths,
        n_steps: cfg.n_steps,
        dt: cfg.dt,
        x,
        y,
    })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Number of independent samples behind the estimate.
    pub n_effective: usize,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1.0;
        let d = v - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (v - self.mean);
    }

    fn merge(&mut self, o: &Self) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n / n;
        self.m2 += o.m2 + d * d * self.n * o.n / n;
        self.n = n;
    }

    fn estimate(&self) -> McEstimate {
        let var = if self.n > 1.0 { self.m2 / (self.n - 1.0) } else { 0.0 };
        McEstimate {
            value: self.mean,
            std_error: sqrt(var / self.n),
            n_effective: self.n as usize,
        }
    }
}

/// Paths per chunk for the pricing estimators. Even, so antithetic pairs
/// never straddle chunks.
const PRICE_CHUNK: usize = 1024;

fn chunks(n_paths: usize, size: usize) -> usize {
    n_paths.div_ceil(size)
}

/// Terminal log-return `x(T)` of every path, in path order.
pub fn mc_terminal_log_returns<E: PathExecutor>(sde: &SdeParams, cfg: &SimConfig, init: InitialLogVol, exec: &E) -> Vec<f64> {
    exec.run(cfg.n_paths, |path| {
        let mut last = 0.0;
        simulate_path(sde, cfg, init, path, |_, x, _| last = x);
        last
    })
}

/// Discounted call payoffs `e^{-rT} max(S e^{x(T)} - K, 0)` averaged over
/// paths for each strike, with `T` the simulated horizon and `r` the drift.
///
/// Needs the martingale measure. Strikes may be zero, in which case the
/// estimate is the discounted forward and should equal `spot`. With
/// antithetic pairs the error is computed from pair averages.
pub fn mc_call_prices<E: PathExecutor>(
    sde: &SdeParams,
    cfg: &SimConfig,
    init: InitialLogVol,
    spot: f64,
    strikes: &[f64],
    exec: &E,
) -> Result<Vec<McEstimate>> {
    if sde.measure != Measure::Martingale || cfg.measure != Measure::Martingale {
        return Err(Error::MeasureMismatch {
            expected: Measure::Martingale,
        });
    }
    let discount = exp(-sde.drift * cfg.horizon());
    let n_chunks = chunks(cfg.n_paths, PRICE_CHUNK);
    let per_chunk = exec.run(n_chunks, |c| {
        let start = c * PRICE_CHUNK;
        let end = (start + PRICE_CHUNK).min(cfg.n_paths);
        let mut acc = vec![Moments::default(); strikes.len()];
        let mut pending: Vec<f64> = vec![0.0; strikes.len()];
        for path in start..end {
            let mut last = 0.0;
            simulate_path(sde, cfg, init, path, |_, x, _| last = x);
            let terminal = spot * exp(last);
            for (j, &k) in strikes.iter().enumerate() {
                let payoff = discount * (terminal - k).max(0.0);
                if !cfg.antithetic {
                    acc[j].push(payoff);
                } else if path % 2 == 0 {
                    pending[j] = payoff;
                } else {
                    acc[j].push(0.5 * (pending[j] + payoff));
                }
            }
        }
        acc
    });
    let mut total = vec![Moments::default(); strikes.len()];
    for acc in &per_chunk {
        for (t, a) in total.iter_mut().zip(acc) {
            t.merge(a);
        }
    }
    Ok(total.iter().map(Moments::estimate).collect())
}

/// Monte Carlo price of one call. The simulated horizon must equal the
/// maturity.
pub fn mc_call_price<E: PathExecutor>(
    mp: &MartingaleParams,
    cfg: &SimConfig,
    spec: &crate::pricer::OptionSpec,
    exec: &E,
) -> Result<McEstimate> {
    if (cfg.horizon() - spec.maturity()).abs() > 1e-9 * spec.maturity() {
        return Err(Error::HorizonMismatch {
            horizon: cfg.horizon(),
            required: spec.maturity(),
        });
    }
    let sde = SdeParams::martingale(mp, spec.rate());
    let est = mc_call_prices(&sde, cfg, InitialLogVol::Fixed(mp.z0()), spec.spot(), &[spec.strike()], exec)?;
    Ok(est[0])
}

/// Normalised histogram of the terminal log-return.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Bin edges, one more than the number of bins.
    pub edges: Vec<f64>,
    /// Samples per bin.
    pub counts: Vec<u64>,
    /// Density per bin; integrates to one over the binned range.
    pub density: Vec<f64>,
    /// Samples that fell outside the binned range.
    pub outside: u64,
    /// Total number of samples.
    pub total: u64,
}

/// Histogram of `x(T)` over `bins` equal bins spanning `[lo, hi)`.
///
/// The density is normalised by the in-range count, so its mass is exactly
/// one; `outside` reports what was left out.
pub fn mc_return_density<E: PathExecutor>(
    sde: &SdeParams,
    cfg: &SimConfig,
    init: InitialLogVol,
    lo: f64,
    hi: f64,
    bins: usize,
    exec: &E,
) -> Result<Histogram> {
    if sde.measure != Measure::Martingale || cfg.measure != Measure::Martingale {
        return Err(Error::MeasureMismatch {
            expected: Measure::Martingale,
        });
    }
    if !(hi > lo) || bins == 0 {
        return Err(Error::Domain {
            name: "hi",
            value: hi,
            reason: "need hi > lo and at least one bin",
        });
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut outside = 0u64;
    for x in mc_terminal_log_returns(sde, cfg, init, exec) {
        let idx = (x - lo) / width;
        if idx >= 0.0 && idx < bins as f64 {
            counts[idx as usize] += 1;
        } else {
            outside += 1;
        }
    }
    let inside: u64 = counts.iter().sum();
    let density = counts
        .iter()
        .map(|&c| if inside > 0 { c as f64 / (inside as f64 * width) } else { 0.0 })
        .collect();
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    Ok(Histogram {
        edges,
        counts,
        density,
        outside,
        total: cfg.n_paths as u64,
    })
}

/// Physical-measure return statistics at one lag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagStat {
    /// Lag in days.
    pub tau: f64,
    /// Leverage correlation estimate.
    pub leverage: McEstimate,
    /// Squared-return autocorrelation; absent for negative lags.
    pub sq_autocorr: Option<McEstimate>,
}

/// Options for the return-statistics estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsOptions {
    /// Bootstrap resamples used for standard errors.
    pub bootstrap: usize,
    /// Physical price drift, day^-1.
    pub drift: f64,
}

impl Default for StatsOptions {
    fn default() -> Self {
        Self {
            bootstrap: 200,
            drift: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct LagSums {
    n: f64,
    // sum of r_t r_{t+L}^2
    lev: f64,
    // sums over pairs (u, v) = (r_t^2, r_{t+L}^2)
    u: f64,
    v: f64,
    uu: f64,
    vv: f64,
    uv: f64,
}

impl LagSums {
    fn add(&mut self, o: &Self) {
        self.n += o.n;
        self.lev += o.lev;
        self.u += o.u;
        self.v += o.v;
        self.uu += o.uu;
        self.vv += o.vv;
        self.uv += o.uv;
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ChunkSums {
    n_returns: f64,
    sum_sq: f64,
    lags: Vec<LagSums>,
}

impl ChunkSums {
    fn new(n_lags: usize) -> Self {
        Self {
            n_returns: 0.0,
            sum_sq: 0.0,
            lags: vec![LagSums::default(); n_lags],
        }
    }

    fn add(&mut self, o: &Self) {
        self.n_returns += o.n_returns;
        self.sum_sq += o.sum_sq;
        for (a, b) in self.lags.iter_mut().zip(&o.lags) {
            a.add(b);
        }
    }

    fn leverage(&self, i: usize) -> f64 {
        let second = self.sum_sq / self.n_returns;
        let l = &self.lags[i];
        (l.lev / l.n) / (second * second)
    }

    fn sq_autocorr(&self, i: usize) -> f64 {
        let l = &self.lags[i];
        let (mu, mv) = (l.u / l.n, l.v / l.n);
        let cov = l.uv / l.n - mu * mv;
        let var_u = l.uu / l.n - mu * mu;
        let var_v = l.vv / l.n - mv * mv;
        cov / sqrt(var_u * var_v)
    }
}

/// Converts lags in days to whole steps.
fn lag_steps(taus: &[f64], cfg: &SimConfig) -> Result<Vec<isize>> {
    taus.iter()
        .map(|&tau| {
            let steps = tau / cfg.dt;
            let rounded = round(steps);
            if !((steps - rounded).abs() <= 1e-9 * rounded.abs().max(1.0)) {
                return Err(Error::Domain {
                    name: "tau",
                    value: tau,
                    reason: "lag must be a whole number of time steps",
                });
            }
            if rounded.abs() >= cfg.n_steps as f64 {
                return Err(Error::LagBeyondHorizon {
                    tau,
                    horizon: cfg.horizon(),
                });
            }
            Ok(rounded as isize)
        })
        .collect()
}

/// Leverage and squared-return autocorrelation estimated from stationary
/// physical-measure paths.
///
/// Returns are one-step simple returns `exp(x_{n+1} - x_n) - 1`, demeaned by
/// their exact expectation `exp(drift dt) - 1`. Estimators:
///
/// * leverage: `mean(r_t r_{t+L}^2) / mean(r^2)^2`
/// * autocorrelation: Pearson correlation of the pairs `(r_t^2, r_{t+L}^2)`
///   pooled over all paths.
///
/// Standard errors come from a bootstrap over groups of paths, seeded from
/// the configuration seed.
pub fn mc_return_stats<E: PathExecutor>(
    p: &ModelParams,
    cfg: &SimConfig,
    taus: &[f64],
    opts: &StatsOptions,
    exec: &E,
) -> Result<Vec<LagStat>> {
    if cfg.measure != Measure::Physical {
        return Err(Error::MeasureMismatch {
            expected: Measure::Physical,
        });
    }
    let lags = lag_steps(taus, cfg)?;
    let sde = SdeParams::physical(p, opts.drift);
    let expected = expm1(opts.drift * cfg.dt);
    // About 500 groups for the bootstrap, each an even number of paths.
    let group = cfg.n_paths.div_ceil(500).next_multiple_of(2).max(2);
    let n_groups = chunks(cfg.n_paths, group);

    let per_group = exec.run(n_groups, |g| {
        let start = g * group;
        let end = (start + group).min(cfg.n_paths);
        let mut sums = ChunkSums::new(lags.len());
        let mut returns = Vec::with_capacity(cfg.n_steps);
        for path in start..end {
            returns.clear();
            let mut prev = 0.0;
            simulate_path(&sde, cfg, InitialLogVol::Stationary, path, |step, x, _| {
                if step > 0 {
                    returns.push(expm1(x - prev) - expected);
                }
                prev = x;
            });
            accumulate(&returns, &lags, &mut sums);
        }
        sums
    });

    let mut total = ChunkSums::new(lags.len());
    for s in &per_group {
        total.add(s);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    let mut lev_boot = vec![Moments::default(); lags.len()];
    let mut acf_boot = vec![Moments::default(); lags.len()];
    for _ in 0..opts.bootstrap {
        let mut sample = ChunkSums::new(lags.len());
        for _ in 0..n_groups {
            sample.add(&per_group[rng.random_range(0..n_groups)]);
        }
        for i in 0..lags.len() {
            lev_boot[i].push(sample.leverage(i));
            if lags[i] >= 0 {
                acf_boot[i].push(sample.sq_autocorr(i));
            }
        }
    }
    let spread = |m: &Moments| if m.n > 1.0 { sqrt(m.m2 / (m.n - 1.0)) } else { 0.0 };

    Ok(taus
        .iter()
        .enumerate()
        .map(|(i, &tau)| LagStat {
            tau,
            leverage: McEstimate {
                value: total.leverage(i),
                std_error: spread(&lev_boot[i]),
                n_effective: cfg.n_paths,
            },
            sq_autocorr: (lags[i] >= 0).then(|| McEstimate {
                value: total.sq_autocorr(i),
                std_error: spread(&acf_boot[i]),
                n_effective: cfg.n_paths,
            }),
        })
        .collect())
}

fn accumulate(r: &[f64], lags: &[isize], sums: &mut ChunkSums) {
    let n = r.len();
    sums.n_returns += n as f64;
    sums.sum_sq += r.iter().map(|v| v * v).sum::<f64>();
    for (lag, acc) in lags.iter().zip(sums.lags.iter_mut()) {
        let shift = lag.unsigned_abs();
        // Pairs (t, t + lag) with both indices inside the path.
        let (lead, follow) = if *lag >= 0 { (&r[..n - shift], &r[shift..]) } else { (&r[shift..], &r[..n - shift]) };
        for (&a, &b) in lead.iter().zip(follow) {
            let (u, v) = (a * a, b * b);
            acc.n += 1.0;
            acc.lev += a * v;
            acc.u += u;
            acc.v += v;
            acc.uu += u * u;
            acc.vv += v * v;
            acc.uv += u * v;
        }
    }
}

/// Leverage estimates; see [`mc_return_stats`]. Negative lags are allowed.
pub fn mc_leverage<E: PathExecutor>(
    p: &ModelParams,
    cfg: &SimConfig,
    taus: &[f64],
    opts: &StatsOptions,
    exec: &E,
) -> Result<Vec<McEstimate>> {
    Ok(mc_return_stats(p, cfg, taus, opts, exec)?.into_iter().map(|s| s.leverage).collect())
}

/// Squared-return autocorrelation estimates; see [`mc_return_stats`].
pub fn mc_sq_autocorr<E: PathExecutor>(
    p: &ModelParams,
    cfg: &SimConfig,
    taus: &[f64],
    opts: &StatsOptions,
    exec: &E,
) -> Result<Vec<McEstimate>> {
    if let Some(&tau) = taus.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            reason: "autocorrelation lag must be nonnegative",
        });
    }
    Ok(mc_return_stats(p, cfg, taus, opts, exec)?
        .into_iter()
        .filter_map(|s| s.sq_autocorr)
        .collect())
}
