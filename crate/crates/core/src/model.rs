//! Physical-measure expOU model.
//!
//! The log-volatility `Y` is Gaussian with conditional moments
//! `E[Y(t) | Y0] = Y0 e^{-alpha t}` and
//! `Var[Y(t) | Y0] = beta^2 (1 - e^{-2 alpha t})`, where
//! `beta^2 = k^2 / (2 alpha)` is the stationary variance. The volatility
//! `sigma = m e^Y` is therefore lognormal with median `m` in the stationary
//! regime.

use core::f64::consts::PI;

use libm::{exp, expm1, log, sqrt};

use crate::{Error, Result};

/// Parameters of the two-dimensional diffusion under the physical measure.
///
/// Units: `m` in day^-1/2, `alpha` in day^-1, `k` in day^-1/2, `rho`
/// dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    m: f64,
    alpha: f64,
    k: f64,
    rho: f64,
}

impl ModelParams {
    pub fn new(m: f64, alpha: f64, k: f64, rho: f64) -> Result<Self> {
        positive("m", m)?;
        positive("alpha", alpha)?;
        positive("k", k)?;
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "correlation must lie in [-1, 1]",
            });
        }
        let beta_sq = k * k / (2.0 * alpha);
        if !(beta_sq.is_finite() && beta_sq > 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "k^2 / (2 alpha) must be finite and positive",
            });
        }
        Ok(Self { m, alpha, k, rho })
    }

    /// Normal volatility level (median of the stationary volatility).
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Mean-reversion rate of the log-volatility.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Vol-of-vol.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Correlation between the price and log-volatility noises.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Stationary variance of the log-volatility, `k^2 / (2 alpha)`.
    pub fn beta_sq(&self) -> f64 {
        stationary_log_vol_variance(self)
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

/// Log-volatility state `y` observed after `t` days.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuState {
    y: f64,
    t: f64,
}

impl OuState {
    pub fn new(y: f64, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain {
                name: "t",
                value: t,
                reason: "elapsed time must be nonnegative",
            });
        }
        if !y.is_finite() {
            return Err(Error::Domain {
                name: "y",
                value: y,
                reason: "log-volatility must be finite",
            });
        }
        Ok(Self { y, t })
    }

    /// Initial state `Y(0) = y0`.
    pub fn initial(y0: f64) -> Result<Self> {
        Self::new(y0, 0.0)
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Conditional mean and variance of `Y(self.t + dt)` given this state.
    pub fn moments_after(&self, p: &ModelParams, dt: f64) -> (f64, f64) {
        ou_conditional_moments(p, self.y, dt)
    }
}

/// Mean and variance of `Y(t)` given `Y(0) = y0`. `t` must be nonnegative.
pub fn ou_conditional_moments(p: &ModelParams, y0: f64, t: f64) -> (f64, f64) {
    debug_assert!(t >= 0.0, "negative elapsed time {t}");
    let decay = exp(-p.alpha * t);
    // 1 - e^{-2 alpha t} via expm1 keeps precision for small t.
    let variance = p.beta_sq() * -expm1(-2.0 * p.alpha * t);
    (y0 * decay, variance)
}

/// `beta^2 = k^2 / (2 alpha)`.
pub fn stationary_log_vol_variance(p: &ModelParams) -> f64 {
    p.k * p.k / (2.0 * p.alpha)
}

/// Density of `sigma(t)` given `sigma(0) = sigma0`.
pub fn vol_conditional_pdf(p: &ModelParams, sigma: f64, t: f64, sigma0: f64) -> Result<f64> {
    positive_domain("sigma", sigma)?;
    positive_domain("sigma0", sigma0)?;
    positive_domain("t", t)?;
    let y0 = log(sigma0 / p.m);
    let (mean, var) = ou_conditional_moments(p, y0, t);
    Ok(lognormal_pdf(sigma, p.m, mean, var))
}

/// Stationary lognormal density of the volatility.
pub fn vol_stationary_pdf(p: &ModelParams, sigma: f64) -> Result<f64> {
    positive_domain("sigma", sigma)?;
    Ok(lognormal_pdf(sigma, p.m, 0.0, p.beta_sq()))
}

fn lognormal_pdf(sigma: f64, m: f64, mean: f64, var: f64) -> f64 {
    let z = log(sigma / m) - mean;
    exp(-z * z / (2.0 * var)) / (sigma * sqrt(2.0 * PI * var))
}

fn positive_domain(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be positive",
        })
    }
}

/// `Corr[dR(t)^2, dR(t + tau)^2]` for the stationary process.
pub fn squared_return_autocorr(p: &ModelParams, tau: f64) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::Domain {
            name: "tau",
            value: tau,
            reason: "lag must be nonnegative",
        });
    }
    let b4 = 4.0 * p.beta_sq();
    Ok(expm1(b4 * exp(-p.alpha * tau)) / (3.0 * exp(b4) - 1.0))
}

/// Long-lag asymptote of [`squared_return_autocorr`], valid for `alpha tau >> 1`.
pub fn squared_return_autocorr_long_lag(p: &ModelParams, tau: f64) -> f64 {
    let b4 = 4.0 * p.beta_sq();
    b4 * exp(-p.alpha * tau) / (3.0 * exp(b4) - 1.0)
}

/// Leverage correlation `E[dR(t) dR(t + tau)^2] / E[dR(t)^2]^2`.
///
/// Zero for negative lags: past volatility does not respond to future
/// returns.
pub fn leverage(p: &ModelParams, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    let decay = exp(-p.alpha * tau);
    amplitude(p) * exp(-p.alpha * tau + 2.0 * p.beta_sq() * (decay - 0.75))
}

/// Short-lag asymptote of [`leverage`] (`alpha tau << 1`).
pub fn leverage_short_lag(p: &ModelParams, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    amplitude(p) * exp(p.beta_sq() / 2.0 - p.k * p.k * tau)
}

/// Long-lag asymptote of [`leverage`] (`alpha tau >> 1`).
pub fn leverage_long_lag(p: &ModelParams, tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    amplitude(p) * exp(-1.5 * p.beta_sq() - p.alpha * tau)
}

fn amplitude(p: &ModelParams) -> f64 {
    2.0 * p.rho * p.k / p.m
}
