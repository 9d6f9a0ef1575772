use crate::mc::Measure;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("`{name}` = {value} is outside the domain: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("risk aversion destabilizes reversion: alpha + k * lambda1 = {alpha_bar} <= 0")]
    UnstableReversion { alpha_bar: f64 },

    #[error("price {price} is at or below the no-arbitrage lower bound {bound}")]
    PriceBelowLowerBound { price: f64, bound: f64 },

    #[error("price {price} is at or above the no-arbitrage upper bound (spot) {bound}")]
    PriceAboveUpperBound { price: f64, bound: f64 },

    #[error("price {price} needs a volatility above the solver cap {max_vol} day^-1/2")]
    VolAboveMax { price: f64, max_vol: f64 },

    #[error("price {price} needs a volatility below the solver floor {min_vol} day^-1/2")]
    VolBelowMin { price: f64, min_vol: f64 },

    #[error("root finder did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("simulation measure mismatch: this operation needs the {expected:?} measure")]
    MeasureMismatch { expected: Measure },

    #[error("simulation horizon {horizon} days does not match the required {required} days")]
    HorizonMismatch { horizon: f64, required: f64 },

    #[error("lag {tau} days does not fit inside the simulated horizon of {horizon} days")]
    LagBeyondHorizon { tau: f64, horizon: f64 },

    #[error("{samples} stored path samples exceed the budget of {budget}; use the streaming estimators")]
    OverBudget { samples: usize, budget: usize },

    #[error("calibration is underdetermined: {quotes} quote(s) for 2 free parameters")]
    Underdetermined { quotes: usize },

    #[error("crossed market: bid {bid} > ask {ask}")]
    Crossed { bid: f64, ask: f64 },
}
