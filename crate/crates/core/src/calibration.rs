//! Fitting the risk-aversion parameters to quoted call prices.
//!
//! The physical parameters are taken as known; only `(lambda0, lambda1)` are
//! fitted, by least squares on prices with a bounded Nelder-Mead search
//! started from zero risk aversion.

use alloc::vec::Vec;

use libm::{log, sqrt};

use crate::model::ModelParams;
use crate::optimize::NelderMead;
use crate::pricer::{expou_call, OptionSpec};
use crate::risk_neutral::{expansion_coeffs, to_martingale, ExpansionCoeffs, RiskAversion};
use crate::units::annual_vol_to_daily;
use crate::{Error, Result};

/// One quoted call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionQuote {
    strike: f64,
    maturity: f64,
    bid: f64,
    ask: f64,
    mid: f64,
}

impl OptionQuote {
    /// Quote from a two-sided market; the mid is the average.
    pub fn from_bid_ask(strike: f64, maturity: f64, bid: f64, ask: f64) -> Result<Self> {
        if bid > ask {
            return Err(Error::Crossed { bid, ask });
        }
        Self::validated(strike, maturity, bid, ask, 0.5 * (bid + ask))
    }

    /// Quote known only by its mid price; bid and ask are set to the mid.
    pub fn from_mid(strike: f64, maturity: f64, mid: f64) -> Result<Self> {
        Self::validated(strike, maturity, mid, mid, mid)
    }

    fn validated(strike: f64, maturity: f64, bid: f64, ask: f64, mid: f64) -> Result<Self> {
        crate::model::positive("strike", strike)?;
        crate::model::positive("maturity", maturity)?;
        crate::model::positive("bid", bid)?;
        crate::model::positive("ask", ask)?;
        Ok(Self {
            strike,
            maturity,
            bid,
            ask,
            mid,
        })
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    /// Maturity in days.
    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn bid(&self) -> f64 {
        self.bid
    }

    pub fn ask(&self) -> f64 {
        self.ask
    }

    pub fn mid(&self) -> f64 {
        self.mid
    }

    pub fn spread(&self) -> f64 {
        self.ask - self.bid
    }
}

/// Initial log-volatility `ln(sigma0 / m)` from an annualised volatility
/// index level.
pub fn y0_from_vol_index(sigma0_annual: f64, m: f64) -> Result<f64> {
    if !(sigma0_annual > 0.0) {
        return Err(Error::Domain {
            name: "sigma0_annual",
            value: sigma0_annual,
            reason: "volatility index must be positive",
        });
    }
    crate::model::positive("m", m)?;
    Ok(log(annual_vol_to_daily(sigma0_annual) / m))
}

/// How squared price errors are weighted in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Plain squared error in currency units.
    #[default]
    Uniform,
    /// Squared error divided by the squared bid-ask spread. Every quote
    /// needs a positive spread.
    InverseSpread,
}

/// Calibration settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibOptions {
    /// Box bound on `|lambda0|` and `|lambda1|`.
    pub bound: f64,
    pub max_iterations: usize,
    /// Simplex diameter at which the search stops.
    pub tolerance: f64,
    /// Edge of the initial simplex around `(0, 0)`.
    pub initial_step: f64,
    pub weighting: Weighting,
}

impl Default for CalibOptions {
    fn default() -> Self {
        Self {
            bound: 1.0,
            max_iterations: 500,
            tolerance: 1e-9,
            initial_step: 1e-2,
            weighting: Weighting::Uniform,
        }
    }
}

/// Fitted risk aversion and fit quality.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibResult {
    pub lambda0: f64,
    pub lambda1: f64,
    /// Root-mean-square repricing error against mids, unweighted.
    pub rmse: f64,
    pub n_quotes: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Best objective value after each iteration.
    pub objective_trace: Vec<f64>,
}

impl CalibResult {
    pub fn risk_aversion(&self) -> RiskAversion {
        RiskAversion::new(self.lambda0, self.lambda1)
    }
}

/// Market state shared by every quote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Market {
    pub spot: f64,
    /// Risk-free rate, day^-1.
    pub rate: f64,
    /// Initial physical log-volatility.
    pub y0: f64,
}

/// Model prices of every quote under risk aversion `ra`, in input order.
pub fn reprice(quotes: &[OptionQuote], p: &ModelParams, market: &Market, ra: RiskAversion) -> Result<Vec<f64>> {
    let mp = to_martingale(p, ra, market.y0)?;
    let mut cache: Vec<ExpansionCoeffs> = Vec::new();
    quotes
        .iter()
        .map(|q| {
            let coeffs = match cache.iter().find(|c| c.maturity == q.maturity) {
                Some(c) => *c,
                None => {
                    let c = expansion_coeffs(&mp, q.maturity, market.rate)?;
                    cache.push(c);
                    c
                }
            };
            let spec = OptionSpec::new(market.spot, q.strike, q.maturity, market.rate)?;
            Ok(expou_call(&spec, &mp, &coeffs)?.total)
        })
        .collect()
}

/// Root-mean-square difference between model prices and mids.
pub fn rmse(quotes: &[OptionQuote], model: &[f64]) -> f64 {
    let sum: f64 = quotes.iter().zip(model).map(|(q, m)| (m - q.mid) * (m - q.mid)).sum();
    sqrt(sum / quotes.len() as f64)
}

/// Least-squares fit of `(lambda0, lambda1)` to quoted mids.
///
/// Quotes are put in a canonical order first, so the result does not depend
/// on the input order. Points outside the box or with
/// `alpha + k lambda1 <= 0` are infeasible. Hitting the iteration cap is not
/// an error: the best point found is returned with `converged = false`.
pub fn calibrate_risk_aversion(
    quotes: &[OptionQuote],
    p: &ModelParams,
    market: &Market,
    opts: &CalibOptions,
) -> Result<CalibResult> {
    if quotes.len() < 2 {
        return Err(Error::Underdetermined { quotes: quotes.len() });
    }
    if !(opts.bound > 0.0) {
        return Err(Error::InvalidParameter {
            name: "bound",
            value: opts.bound,
            reason: "risk-aversion box must have positive size",
        });
    }
    let mut sorted = quotes.to_vec();
    sorted.sort_by(|a, b| {
        a.maturity
            .total_cmp(&b.maturity)
            .then(a.strike.total_cmp(&b.strike))
            .then(a.mid.total_cmp(&b.mid))
            .then(a.bid.total_cmp(&b.bid))
    });
    let weights: Vec<f64> = match opts.weighting {
        Weighting::Uniform => sorted.iter().map(|_| 1.0).collect(),
        Weighting::InverseSpread => sorted
            .iter()
            .map(|q| {
                if q.spread() > 0.0 {
                    Ok(1.0 / (q.spread() * q.spread()))
                } else {
                    Err(Error::InvalidParameter {
                        name: "spread",
                        value: q.spread(),
                        reason: "spread weighting needs bid < ask on every quote",
                    })
                }
            })
            .collect::<Result<_>>()?,
    };
    // Validate the market once so the objective can treat failures as infeasible.
    OptionSpec::new(market.spot, sorted[0].strike, sorted[0].maturity, market.rate)?;

    let objective = |x: &[f64]| -> f64 {
        if x[0].abs() > opts.bound || x[1].abs() > opts.bound {
            return f64::INFINITY;
        }
        match reprice(&sorted, p, market, RiskAversion::new(x[0], x[1])) {
            Ok(model) => sorted
                .iter()
                .zip(&model)
                .zip(&weights)
                .map(|((q, m), w)| w * (m - q.mid) * (m - q.mid))
                .sum(),
            Err(_) => f64::INFINITY,
        }
    };
    let nm = NelderMead {
        initial_step: opts.initial_step,
        diameter_tol: opts.tolerance,
        max_iterations: opts.max_iterations,
    };
    let best = nm.minimize(objective, &[0.0, 0.0]);
    let ra = RiskAversion::new(best.point[0], best.point[1]);
    let model = reprice(&sorted, p, market, ra)?;
    Ok(CalibResult {
        lambda0: ra.lambda0,
        lambda1: ra.lambda1,
        rmse: rmse(&sorted, &model),
        n_quotes: sorted.len(),
        converged: best.converged,
        iterations: best.iterations,
        objective_trace: best.trace,
    })
}
