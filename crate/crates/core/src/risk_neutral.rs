//! Risk-neutral dynamics and the large-`lambda` expansion.
//!
//! With a market price of volatility risk linear in `Y`,
//! `Lambda(Y) = lambda0 + lambda1 Y`, the martingale dynamics keep the expOU
//! form with a faster reversion `alpha_bar = alpha + k lambda1` and a lower
//! normal level `m_bar = m exp(-k lambda0 / alpha_bar)`.
//!
//! The log-return characteristic function is expanded in powers of
//! `1 / lambda`, `lambda = k / m_bar`. Truncating at order `lambda^-4` gives a
//! Gaussian times a quartic polynomial in the frequency, which in turn gives
//! a Gram-Charlier density built from physicists' Hermite polynomials.

use core::f64::consts::PI;

use libm::{exp, expm1, pow, sqrt};
use num_complex::Complex64;

use crate::model::{positive, ModelParams};
use crate::{Error, Result};

/// Market price of volatility risk, `Lambda(Y) = lambda0 + lambda1 Y`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RiskAversion {
    pub lambda0: f64,
    pub lambda1: f64,
}

impl RiskAversion {
    pub fn new(lambda0: f64, lambda1: f64) -> Self {
        Self { lambda0, lambda1 }
    }
}

/// Parameters of the log-volatility process under the martingale measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartingaleParams {
    m_bar: f64,
    alpha_bar: f64,
    k: f64,
    rho: f64,
    z0: f64,
}

/// Change to the martingale measure, starting from log-volatility `y0`.
pub fn to_martingale(p: &ModelParams, ra: RiskAversion, y0: f64) -> Result<MartingaleParams> {
    let alpha_bar = p.alpha() + p.k() * ra.lambda1;
    if !(alpha_bar > 0.0) {
        return Err(Error::UnstableReversion { alpha_bar });
    }
    let shift = p.k() * ra.lambda0 / alpha_bar;
    MartingaleParams::from_parts(p.m() * exp(-shift), alpha_bar, p.k(), p.rho(), y0 + shift)
}

impl MartingaleParams {
    /// Builds the parameters directly. `z0` is the shifted initial
    /// log-volatility `y0 + k lambda0 / alpha_bar`.
    pub fn from_parts(m_bar: f64, alpha_bar: f64, k: f64, rho: f64, z0: f64) -> Result<Self> {
        positive("m_bar", m_bar)?;
        if !(alpha_bar > 0.0) {
            return Err(Error::UnstableReversion { alpha_bar });
        }
        positive("alpha_bar", alpha_bar)?;
        positive("k", k)?;
        if !(-1.0..=1.0).contains(&rho) {
            return Err(Error::InvalidParameter {
                name: "rho",
                value: rho,
                reason: "correlation must lie in [-1, 1]",
            });
        }
        if !z0.is_finite() {
            return Err(Error::InvalidParameter {
                name: "z0",
                value: z0,
                reason: "initial log-volatility must be finite",
            });
        }
        Ok(Self {
            m_bar,
            alpha_bar,
            k,
            rho,
            z0,
        })
    }

    /// Same parameters with a different initial log-volatility.
    pub fn with_z0(mut self, z0: f64) -> Self {
        self.z0 = z0;
        self
    }

    /// Risk-neutral normal volatility level.
    pub fn m_bar(&self) -> f64 {
        self.m_bar
    }

    /// Risk-neutral reversion rate.
    pub fn alpha_bar(&self) -> f64 {
        self.alpha_bar
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Shifted initial log-volatility.
    pub fn z0(&self) -> f64 {
        self.z0
    }

    /// Scale ratio `k / m_bar`, the large parameter of the expansion.
    pub fn lambda(&self) -> f64 {
        self.k / self.m_bar
    }

    /// `alpha_bar / k^2`, equal to `1 / (2 beta_bar^2)`.
    pub fn nu(&self) -> f64 {
        self.alpha_bar / (self.k * self.k)
    }

    /// Stationary variance of the risk-neutral log-volatility.
    pub fn beta_bar_sq(&self) -> f64 {
        self.k * self.k / (2.0 * self.alpha_bar)
    }

    /// Initial state in rescaled units, `lambda z0`.
    pub fn v0(&self) -> f64 {
        self.lambda() * self.z0
    }
}

/// Time-dependent coefficients of the truncated expansion at one maturity.
///
/// The characteristic function of the log-return `X(t)` is
/// `exp(-i w drift - w^2 base_variance / 2) * (1 - variance w^2 + i rho skew w^3 + quartic w^4)`
/// with `quartic = kurtosis + variance^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoeffs {
    /// Mean log-return, `r t - m_bar^2 t / 2`.
    pub drift: f64,
    /// Correction to the variance from the initial volatility offset.
    pub variance: f64,
    /// Skewness coefficient; enters multiplied by `rho`.
    pub skew: f64,
    /// Kurtosis coefficient.
    pub kurtosis: f64,
    /// Price/volatility correlation the coefficients were computed with.
    pub rho: f64,
    /// Risk-neutral volatility level; `m_bar^2 t` is the Gaussian variance.
    pub m_bar: f64,
    /// Maturity in days.
    pub maturity: f64,
    /// Risk-free rate, day^-1.
    pub rate: f64,
}

impl ExpansionCoeffs {
    /// Black-Scholes limit: every correction vanishes.
    pub fn gaussian(m_bar: f64, maturity: f64, rate: f64) -> Self {
        Self {
            drift: rate * maturity - 0.5 * m_bar * m_bar * maturity,
            variance: 0.0,
            skew: 0.0,
            kurtosis: 0.0,
            rho: 0.0,
            m_bar,
            maturity,
            rate,
        }
    }

    /// Weight of the fourth-order term, `kurtosis + variance^2 / 2`.
    pub fn quartic_weight(&self) -> f64 {
        self.kurtosis + 0.5 * self.variance * self.variance
    }

    /// Weight of the third-order term, `rho * skew`.
    pub fn cubic_weight(&self) -> f64 {
        self.rho * self.skew
    }

    /// Gaussian variance `m_bar^2 t`.
    pub fn base_variance(&self) -> f64 {
        self.m_bar * self.m_bar * self.maturity
    }

    /// Corrections divided by the matching power of `2 m_bar^2 t`, i.e. the
    /// weights of `H2`, `H3`, `H4` in the density. Zero at `t = 0`.
    pub fn hermite_weights(&self) -> [f64; 3] {
        let s2 = 2.0 * self.base_variance();
        if s2 <= 0.0 {
            return [0.0; 3];
        }
        [
            self.variance / s2,
            self.cubic_weight() / pow(s2, 1.5),
            self.quartic_weight() / (s2 * s2),
        ]
    }
}

struct Brackets {
    x: f64,
    // 1 - e^{-x}
    a: f64,
    // x e^{-x}
    b: f64,
    // (1 - e^{-2x}) / 2
    half_double: f64,
}

impl Brackets {
    fn at(x: f64) -> Self {
        Self {
            x,
            a: -expm1(-x),
            b: x * exp(-x),
            half_double: -0.5 * expm1(-2.0 * x),
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "t",
            value: t,
            reason: "maturity must be nonnegative",
        })
    }
}

/// Expansion coefficients at maturity `t` for the fixed initial state `z0`.
///
/// The `rho^2` part of the kurtosis uses `1 / (lambda^4 nu^3)`, the
/// coefficient obtained by expanding the full characteristic exponent (see
/// [`char_fn_full`]).
pub fn expansion_coeffs(mp: &MartingaleParams, t: f64, rate: f64) -> Result<ExpansionCoeffs> {
    check_time(t)?;
    let (l, nu, z0) = (mp.lambda(), mp.nu(), mp.z0());
    let br = Brackets::at(mp.alpha_bar() * t);
    let l2nu = l * l * nu;
    let l3nu2 = l2nu * l * nu;
    let l4nu3 = l3nu2 * l * nu;
    let variance = z0 * br.a / l2nu;
    let skew = ((br.x - br.a) - z0 * (br.b - br.a)) / l3nu2;
    let kurtosis = (br.x + br.half_double - 2.0 * br.a) / (2.0 * l4nu3)
        + mp.rho() * mp.rho() * (br.x - 2.0 * br.a + br.b) / l4nu3;
    Ok(ExpansionCoeffs {
        drift: rate * t - 0.5 * mp.m_bar() * mp.m_bar() * t,
        variance,
        skew,
        // Both brackets are nonnegative; max() only absorbs rounding at tiny t.
        kurtosis: kurtosis.max(0.0),
        rho: mp.rho(),
        m_bar: mp.m_bar(),
        maturity: t,
        rate,
    })
}

/// Coefficients averaged over a stationary initial state
/// `z0 ~ N(0, beta_bar^2)`.
///
/// The variance correction averages out, and its square is folded into the
/// kurtosis, so [`ExpansionCoeffs::quartic_weight`] returns the averaged
/// quartic weight directly. `mp.z0()` is ignored.
pub fn expansion_coeffs_averaged(mp: &MartingaleParams, t: f64, rate: f64) -> Result<ExpansionCoeffs> {
    check_time(t)?;
    let (l, nu) = (mp.lambda(), mp.nu());
    let br = Brackets::at(mp.alpha_bar() * t);
    let l3nu2 = l * l * l * nu * nu;
    let l4nu3 = l3nu2 * l * nu;
    let kurtosis = (br.x - br.a) / (2.0 * l4nu3) + mp.rho() * mp.rho() * (br.x - 2.0 * br.a + br.b) / l4nu3;
    Ok(ExpansionCoeffs {
        drift: rate * t - 0.5 * mp.m_bar() * mp.m_bar() * t,
        variance: 0.0,
        skew: (br.x - br.a) / l3nu2,
        kurtosis: kurtosis.max(0.0),
        rho: mp.rho(),
        m_bar: mp.m_bar(),
        maturity: t,
        rate,
    })
}

/// Exponent `C(w1, t')` of the full (untruncated in time) characteristic
/// function, in rescaled units: frequency `w1 = w / lambda`, time
/// `t' = k^2 t`, initial state `v0 = lambda z0`.
///
/// Stated in the `E[exp(-i w X)]` convention used by the rest of the crate,
/// so the rho-odd terms carry the sign that makes `rho < 0` skew returns to
/// the left (`gamma = nu + i rho w1`).
pub fn char_exponent_full(mp: &MartingaleParams, omega1: f64, t_prime: f64, v0: f64, rate: f64) -> Complex64 {
    let i = Complex64::i();
    let (l, nu, rho) = (mp.lambda(), mp.nu(), mp.rho());
    let w = Complex64::new(omega1, 0.0);
    let gamma = Complex64::new(nu, rho * omega1);
    let e1 = Complex64::new(1.0, 0.0) - (-gamma * t_prime).exp();
    let e2 = Complex64::new(1.0, 0.0) - (-gamma * (2.0 * t_prime)).exp();
    let drift = (rate / (mp.m_bar() * mp.m_bar()) - 0.5) * t_prime / l;
    let w2 = w * w;
    i * w * drift
        + 0.5 * w2 * t_prime
        + v0 * w2 * e1 / (l * gamma)
        - i * rho * w2 * w / gamma * (t_prime - e1 / gamma)
        - w2 * w2 / (2.0 * gamma * gamma) * (t_prime + e2 / (2.0 * gamma) - 2.0 * e1 / gamma)
}

/// `E[exp(-i w X)]` with `w = lambda * omega1`, as `exp(-C)`.
pub fn char_fn_full(mp: &MartingaleParams, omega1: f64, t_prime: f64, v0: f64, rate: f64) -> Complex64 {
    (-char_exponent_full(mp, omega1, t_prime, v0, rate)).exp()
}

/// Truncated characteristic function `E[exp(-i w X(t))]` built from `coeffs`.
pub fn char_fn_expanded(coeffs: &ExpansionCoeffs, omega: f64) -> Complex64 {
    let w2 = omega * omega;
    let gauss = Complex64::new(-0.5 * w2 * coeffs.base_variance(), -omega * coeffs.drift).exp();
    let poly = Complex64::new(
        1.0 - coeffs.variance * w2 + coeffs.quartic_weight() * w2 * w2,
        coeffs.cubic_weight() * w2 * omega,
    );
    gauss * poly
}

/// Physicists' Hermite polynomial `H_n(x)` for `n` in `0..=4`.
pub fn hermite_poly(n: u32, x: f64) -> Result<f64> {
    let x2 = x * x;
    Ok(match n {
        0 => 1.0,
        1 => 2.0 * x,
        2 => 4.0 * x2 - 2.0,
        3 => (8.0 * x2 - 12.0) * x,
        4 => (16.0 * x2 - 48.0) * x2 + 12.0,
        _ => {
            return Err(Error::Domain {
                name: "n",
                value: n as f64,
                reason: "Hermite order must be in 0..=4",
            })
        }
    })
}

/// Hermite-corrected risk-neutral density of the log-return at `x`.
///
/// Not clamped: far in the tails the truncated series can go negative.
pub fn return_density(coeffs: &ExpansionCoeffs, x: f64) -> Result<f64> {
    if !(coeffs.maturity > 0.0) {
        return Err(Error::Domain {
            name: "t",
            value: coeffs.maturity,
            reason: "density needs a positive maturity",
        });
    }
    let s2 = 2.0 * coeffs.base_variance();
    let u = (x - coeffs.drift) / sqrt(s2);
    let [w2, w3, w4] = coeffs.hermite_weights();
    let correction = 1.0 + w2 * hermite_poly(2, u)? + w3 * hermite_poly(3, u)? + w4 * hermite_poly(4, u)?;
    Ok(exp(-u * u) / sqrt(PI * s2) * correction)
}

/// Validity diagnostics for the truncated expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegimeWarning {
    /// `lambda < 5`: the series in `1 / lambda` converges too slowly.
    pub small_lambda: bool,
    /// Some normalised Hermite weight exceeds 0.5 in magnitude.
    pub large_corrections: bool,
    /// The approximate price came out negative.
    pub negative_price: bool,
}

/// Smallest `lambda` for which the expansion is trusted.
pub const MIN_TRUSTED_LAMBDA: f64 = 5.0;
/// Largest normalised correction for which the expansion is trusted.
pub const MAX_TRUSTED_CORRECTION: f64 = 0.5;

impl RegimeWarning {
    pub fn check(mp: &MartingaleParams, coeffs: &ExpansionCoeffs) -> Self {
        Self {
            small_lambda: mp.lambda() < MIN_TRUSTED_LAMBDA,
            large_corrections: coeffs
                .hermite_weights()
                .iter()
                .any(|w| !(w.abs() <= MAX_TRUSTED_CORRECTION)),
            negative_price: false,
        }
    }

    pub fn any(&self) -> bool {
        self.small_lambda || self.large_corrections || self.negative_price
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> ModelParams {
        ModelParams::new(0.01, 8e-3, 0.11, -0.4).unwrap()
    }

    fn fig1_mp(y0: f64) -> MartingaleParams {
        to_martingale(&fig1(), RiskAversion::new(1e-3, 1e-3), y0).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn zero_risk_aversion_is_identity() {
        let mp = to_martingale(&fig1(), RiskAversion::default(), 0.0).unwrap();
        assert_eq!(mp.m_bar(), 0.01);
        assert_eq!(mp.alpha_bar(), 8e-3);
        assert_eq!(mp.z0(), 0.0);
    }

    #[test]
    fn fig1_martingale_params() {
        let mp = fig1_mp(0.0);
        assert!(close(mp.alpha_bar(), 8.11e-3, 1e-15));
        assert!(close(mp.m_bar(), 0.01 * (-0.11e-3f64 / 8.11e-3).exp(), 1e-15));
        assert!(close(mp.m_bar(), 9.865_28e-3, 1e-8));
        assert!(close(mp.lambda(), 11.150_2, 1e-4));
        assert!(close(mp.nu(), 0.670_248, 1e-6));
        assert!(close(mp.nu(), 1.0 / (2.0 * mp.beta_bar_sq()), 1e-15));
        assert!(close(mp.z0(), 0.11e-3 / 8.11e-3, 1e-15));
        assert!(mp.m_bar() < 0.01);
        assert!(close(mp.v0(), mp.lambda() * mp.z0(), 1e-15));
    }

    #[test]
    fn unstable_reversion_rejected() {
        let err = to_martingale(&fig1(), RiskAversion::new(0.0, -1.0), 0.0).unwrap_err();
        assert!(matches!(err, Error::UnstableReversion { .. }));
        assert!(MartingaleParams::from_parts(0.01, 0.0, 0.1, 0.0, 0.0).is_err());
        assert!(MartingaleParams::from_parts(0.01, 1e-3, 0.1, 1.5, 0.0).is_err());
    }

    #[test]
    fn coeffs_vanish_at_zero_maturity() {
        let c = expansion_coeffs(&fig1_mp(0.3), 0.0, 1e-4).unwrap();
        assert_eq!((c.drift, c.variance, c.skew, c.kurtosis), (0.0, 0.0, 0.0, 0.0));
        let c = expansion_coeffs_averaged(&fig1_mp(0.3), 0.0, 1e-4).unwrap();
        assert_eq!((c.drift, c.variance, c.skew, c.kurtosis), (0.0, 0.0, 0.0, 0.0));
        assert!(expansion_coeffs(&fig1_mp(0.0), -1.0, 0.0).is_err());
    }

    #[test]
    fn zero_z0_drops_state_terms() {
        let mp = MartingaleParams::from_parts(9.9e-3, 8.1e-3, 0.11, -0.4, 0.0).unwrap();
        let c = expansion_coeffs(&mp, 20.0, 0.0).unwrap();
        assert_eq!(c.variance, 0.0);
        let x = mp.alpha_bar() * 20.0;
        let l3nu2 = mp.lambda().powi(3) * mp.nu().powi(2);
        assert!(close(c.skew, (x - (1.0 - (-x).exp())) / l3nu2, 1e-18));
        let avg = expansion_coeffs_averaged(&mp, 20.0, 0.0).unwrap();
        assert!(close(avg.skew, c.skew, 1e-18));
    }

    #[test]
    fn fig1_kurtosis_closed_form() {
        let c = expansion_coeffs(&fig1_mp(0.0).with_z0(0.0), 20.0, 0.0).unwrap();
        let mp = fig1_mp(0.0).with_z0(0.0);
        let x = mp.alpha_bar() * 20.0;
        let (a, b) = (1.0 - (-x).exp(), x * (-x).exp());
        let (l, nu) = (mp.lambda(), mp.nu());
        let k_ref = (x + 0.5 * (1.0 - (-2.0 * x).exp()) - 2.0 * a) / (2.0 * l.powi(4) * nu.powi(3))
            + 0.16 * (x - 2.0 * a + b) / (l.powi(4) * nu.powi(3));
        assert!(close(c.kurtosis, k_ref, 1e-20));
        assert!(c.skew > 0.0 && c.kurtosis > 0.0);
        assert!(close(c.drift, -0.5 * mp.m_bar().powi(2) * 20.0, 1e-18));
    }

    #[test]
    fn large_time_growth() {
        let mp = fig1_mp(0.5);
        let t1 = expansion_coeffs(&mp, 5000.0, 0.0).unwrap();
        let t2 = expansion_coeffs(&mp, 6000.0, 0.0).unwrap();
        let sat = mp.z0() / (mp.lambda().powi(2) * mp.nu());
        assert!(close(t1.variance, sat, 1e-12 * sat.abs().max(1.0)));
        let l3nu2 = mp.lambda().powi(3) * mp.nu().powi(2);
        let slope = (t2.skew - t1.skew) / 1000.0;
        assert!(close(slope, mp.alpha_bar() / l3nu2, 1e-12));
    }

    #[test]
    fn averaged_kurtosis_matches_gauss_hermite_average() {
        // Average over z0 ~ N(0, beta_bar^2). The integrand is a polynomial
        // of degree 2 in z0, so three-point Gauss-Hermite is exact.
        let base = fig1_mp(0.0);
        let sd = base.beta_bar_sq().sqrt();
        let nodes = [(-3f64.sqrt(), 1.0 / 6.0), (0.0, 2.0 / 3.0), (3f64.sqrt(), 1.0 / 6.0)];
        for t in [1.0, 20.0, 60.0, 500.0] {
            let mut avg_q = 0.0;
            let mut avg_s = 0.0;
            for (z, w) in nodes {
                let c = expansion_coeffs(&base.with_z0(z * sd), t, 0.0).unwrap();
                avg_q += w * c.quartic_weight();
                avg_s += w * c.skew;
            }
            let a = expansion_coeffs_averaged(&base, t, 0.0).unwrap();
            assert!(close(a.quartic_weight(), avg_q, 1e-12 * avg_q), "t={t}");
            assert!(close(a.skew, avg_s, 1e-12 * avg_s), "t={t}");
            assert_eq!(a.variance, 0.0);
        }
    }

    #[test]
    fn char_fn_full_trivial_points() {
        let mp = fig1_mp(0.2);
        assert_eq!(char_fn_full(&mp, 0.0, 3.0, mp.v0(), 1e-4), Complex64::new(1.0, 0.0));
        let at0 = char_fn_full(&mp, 1.3, 0.0, mp.v0(), 1e-4);
        assert!((at0 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn char_fn_full_conjugate_symmetric_and_bounded() {
        let mp = fig1_mp(0.2);
        let tp = mp.k() * mp.k() * 20.0;
        for i in -20..=20 {
            let w = 0.1 * i as f64;
            let a = char_fn_full(&mp, w, tp, mp.v0(), 0.0);
            let b = char_fn_full(&mp, -w, tp, mp.v0(), 0.0);
            assert!((a - b.conj()).norm() < 1e-14);
            assert!(a.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn expanded_rho_zero_has_linear_phase() {
        let mp = MartingaleParams::from_parts(9.9e-3, 8.1e-3, 0.11, 0.0, 0.1).unwrap();
        let c = expansion_coeffs(&mp, 20.0, 1e-4).unwrap();
        for w in [0.3, 1.0, 7.0] {
            let v = char_fn_expanded(&c, w);
            let phase_removed = v * Complex64::new(0.0, w * c.drift).exp();
            assert!(phase_removed.im.abs() < 1e-15);
        }
        assert_eq!(char_fn_expanded(&c, 0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn hermite_values() {
        assert_eq!(hermite_poly(2, 0.0).unwrap(), -2.0);
        assert_eq!(hermite_poly(3, 1.0).unwrap(), -4.0);
        assert_eq!(hermite_poly(4, 1.0).unwrap(), -20.0);
        assert!(hermite_poly(5, 1.0).is_err());
    }

    #[test]
    fn hermite_rodrigues_by_finite_differences() {
        // d^n/da^n e^{-a^2} = e^{-a^2} H_n(-a). Checked one derivative at a
        // time: a central difference of the order-(n-1) right-hand side must
        // reproduce the order-n one, which proves every order by induction
        // from H_0 = 1.
        let rhs = |n: u32, a: f64| (-a * a).exp() * hermite_poly(n, -a).unwrap();
        let h = 1e-5;
        for a in [-1.0, 0.5, 2.0] {
            for n in 1..=4 {
                let fd = (rhs(n - 1, a + h) - rhs(n - 1, a - h)) / (2.0 * h);
                let exact = rhs(n, a);
                assert!(close(fd, exact, 1e-6), "n={n} a={a}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn density_is_gaussian_without_corrections() {
        let c = ExpansionCoeffs::gaussian(0.01, 20.0, 0.0);
        let s2 = c.base_variance();
        for x in [-0.1, -0.02, 0.0, 0.013, 0.08] {
            let g = (-(x - c.drift).powi(2) / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt();
            assert!(close(return_density(&c, x).unwrap(), g, 1e-12 * g.max(1.0)));
        }
        let zero_t = ExpansionCoeffs::gaussian(0.01, 0.0, 0.0);
        assert!(return_density(&zero_t, 0.0).is_err());
    }

    #[test]
    fn regime_flags() {
        let mp = fig1_mp(0.0);
        let c = expansion_coeffs(&mp, 20.0, 0.0).unwrap();
        assert!(!RegimeWarning::check(&mp, &c).any());
        let small = MartingaleParams::from_parts(0.05, 8e-3, 0.11, -0.4, 0.0).unwrap();
        let cs = expansion_coeffs(&small, 20.0, 0.0).unwrap();
        assert!(RegimeWarning::check(&small, &cs).small_lambda);
        let mut wild = c;
        wild.kurtosis = 1.0;
        assert!(RegimeWarning::check(&mp, &wild).large_corrections);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn quartic_weight_nonnegative(
                m in 1e-3f64..0.05, a in 1e-4f64..0.2, k in 1e-3f64..0.5,
                rho in -1.0f64..=1.0, z0 in -5.0f64..5.0, t in 0.0f64..2000.0,
            ) {
                let mp = MartingaleParams::from_parts(m, a, k, rho, z0).unwrap();
                let c = expansion_coeffs(&mp, t, 0.0).unwrap();
                prop_assert!(c.kurtosis >= 0.0);
                prop_assert!(c.quartic_weight() >= 0.0);
                let avg = expansion_coeffs_averaged(&mp, t, 0.0).unwrap();
                prop_assert!(avg.kurtosis >= 0.0);
            }

            #[test]
            fn coeffs_continuous_in_time(t in 0.0f64..500.0) {
                let mp = to_martingale(&fig1(), RiskAversion::new(1e-3, 1e-3), 0.3).unwrap();
                let c1 = expansion_coeffs(&mp, t, 1e-4).unwrap();
                let c2 = expansion_coeffs(&mp, t + 1e-9, 1e-4).unwrap();
                prop_assert!((c1.skew - c2.skew).abs() < 1e-12);
                prop_assert!((c1.kurtosis - c2.kurtosis).abs() < 1e-12);
                prop_assert!((c1.variance - c2.variance).abs() < 1e-12);
            }
        }
    }
}
