//! Black-Scholes inversion and smile curves.

use alloc::vec::Vec;

use crate::pricer::{bs_call, bs_vega, expou_call, OptionSpec};
use crate::risk_neutral::{ExpansionCoeffs, MartingaleParams};
use crate::units::daily_vol_to_annual;
use crate::{Error, Result};

/// Lower end of the volatility search bracket, day^-1/2.
pub const MIN_VOL: f64 = 1e-6;
/// Upper end of the volatility search bracket, day^-1/2.
pub const MAX_VOL: f64 = 10.0;
/// Price residual, relative to the target price, at which the solver stops.
pub const PRICE_TOL: f64 = 1e-12;
/// Iteration cap of the solver.
pub const MAX_ITER: usize = 100;

/// Volatility (day^-1/2) at which the Black-Scholes call reproduces `price`.
///
/// Newton steps are taken while they stay inside the current bracket;
/// otherwise the bracket is bisected. The bracket shrinks every iteration,
/// so the solver always terminates.
pub fn implied_vol(price: f64, spec: &OptionSpec) -> Result<f64> {
    let lower = (spec.spot() - spec.discounted_strike()).max(0.0);
    if !(price > lower) {
        return Err(Error::PriceBelowLowerBound { price, bound: lower });
    }
    if !(price < spec.spot()) {
        return Err(Error::PriceAboveUpperBound {
            price,
            bound: spec.spot(),
        });
    }
    let f = |v: f64| bs_call(spec, v).map(|c| c - price);
    let (mut lo, mut hi) = (MIN_VOL, MAX_VOL);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    // Relative to the target price, so deep out-of-the-money prices still
    // pin the volatility down.
    let tol = PRICE_TOL * price;
    if f_lo > tol {
        return Err(Error::VolBelowMin { price, min_vol: MIN_VOL });
    }
    if f_hi < -tol {
        return Err(Error::VolAboveMax { price, max_vol: MAX_VOL });
    }
    if f_lo.abs() <= tol {
        return Ok(lo);
    }
    if f_hi.abs() <= tol {
        return Ok(hi);
    }

    // Start from the at-the-money approximation, which is exact to first
    // order in the time value.
    let mut v = (2.5 * price / (spec.spot() * libm::sqrt(spec.maturity()))).clamp(lo, hi);
    let mut resid = f(v)?;
    for _ in 0..MAX_ITER {
        if resid.abs() <= tol {
            return Ok(v);
        }
        if resid > 0.0 {
            hi = v;
        } else {
            lo = v;
        }
        let vega = bs_vega(spec, v);
        let newton = v - resid / vega;
        v = if vega > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        resid = f(v)?;
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    // A collapsed bracket means the price is resolved to rounding; accept it
    // against the spot-relative tolerance.
    if resid.abs() <= tol || resid.abs() <= PRICE_TOL * spec.spot() {
        Ok(v)
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_ITER,
            residual: resid,
        })
    }
}

/// One point of a smile curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmilePoint {
    /// Spot over strike.
    pub moneyness: f64,
    /// Annualised implied volatility, absent when inversion fails.
    pub implied_vol_annual: Option<f64>,
    /// Model call price.
    pub price: f64,
}

/// Implied-volatility smile of the corrected call over a moneyness grid.
///
/// The template's strike, maturity and rate are kept and the spot is set to
/// `moneyness * strike`. Failed inversions are reported as absent values.
pub fn smile_curve(
    mp: &MartingaleParams,
    coeffs: &ExpansionCoeffs,
    grid: &[f64],
    template: &OptionSpec,
) -> Result<Vec<SmilePoint>> {
    grid.iter()
        .map(|&g| {
            let spec = template.with_spot(g * template.strike())?;
            let price = expou_call(&spec, mp, coeffs)?.total;
            let iv = implied_vol(price, &spec).ok().map(daily_vol_to_annual);
            Ok(SmilePoint {
                moneyness: g,
                implied_vol_annual: iv,
                price,
            })
        })
        .collect()
}
