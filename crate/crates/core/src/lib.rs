//! Option pricing under the exponential Ornstein-Uhlenbeck (expOU) stochastic
//! volatility model.
//!
//! The asset follows a log-Brownian motion whose volatility is `m * exp(Y)`,
//! with `Y` an Ornstein-Uhlenbeck process correlated with the price noise:
//!
//! ```text
//! dS/S = mu dt + m e^Y dW1
//! dY   = -alpha Y dt + k dW2,      <dW1 dW2> = rho dt
//! ```
//!
//! The crate is organised by concern:
//!
//! * [`model`]: physical-measure parameters, OU moments, volatility densities,
//!   squared-return autocorrelation and the leverage correlation.
//! * [`risk_neutral`]: the measure change with a linear market price of risk,
//!   the large `lambda = k / m_bar` characteristic-function expansion and the
//!   Hermite-corrected return density.
//! * [`pricer`]: Black-Scholes baseline, correction components, the corrected
//!   call, put-call parity and delta.
//! * [`implied_vol`]: Black-Scholes inversion and smile curves.
//! * [`mc`]: seeded Monte Carlo simulation used as a brute-force oracle.
//! * [`calibration`]: fitting the risk-aversion parameters to quoted prices.
//!
//! All quantities are in daily units (days, day^-1, day^-1/2). Annualisation
//! helpers live in [`units`].
//!
//! The crate is `no_std` and needs only `alloc`; transcendental functions come
//! from `libm` so results do not depend on the platform math library.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN.
#![cfg_attr(not(test), no_std)]
#![deny(missing_debug_implementations)]

extern crate alloc;

pub mod calibration;
mod error;
pub mod implied_vol;
pub mod mc;
pub mod model;
pub mod optimize;
pub mod pricer;
pub mod risk_neutral;
pub mod units;

pub use error::{Error, Result};

pub use calibration::{CalibOptions, CalibResult, Market, OptionQuote, Weighting};
pub use implied_vol::{implied_vol, smile_curve, SmilePoint};
pub use mc::{InitialLogVol, McEstimate, Measure, PathExecutor, SdeParams, Serial, SimConfig};
pub use model::{ModelParams, OuState};
pub use pricer::{OptionSpec, PriceBreakdown};
pub use risk_neutral::{ExpansionCoeffs, MartingaleParams, RegimeWarning, RiskAversion};
