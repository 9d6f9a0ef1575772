//! Conversions between the daily units used internally and yearly quotes.

/// Trading days per year used for every annualisation.
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;

/// Converts an annual volatility (year^-1/2) to day^-1/2.
pub fn annual_vol_to_daily(vol: f64) -> f64 {
    vol / libm::sqrt(TRADING_DAYS_PER_YEAR)
}

/// Converts a daily volatility (day^-1/2) to year^-1/2.
pub fn daily_vol_to_annual(vol: f64) -> f64 {
    vol * libm::sqrt(TRADING_DAYS_PER_YEAR)
}

/// Converts an annual continuously-compounded rate to day^-1.
pub fn annual_rate_to_daily(rate: f64) -> f64 {
    rate / TRADING_DAYS_PER_YEAR
}
