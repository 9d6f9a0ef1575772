//! Acceptance criteria 1-12. Each test prints one line,
//! `criterion N PASS|FAIL: <what was measured> (<runtime>)`, and then fails
//! if the criterion is not met. Run with `--nocapture` to see the lines.

use std::time::{Duration, Instant};

use expou::commands::cmd_simulate;
use expou::{Rayon, RunConfig};
use expou_core::calibration::{calibrate_risk_aversion, reprice, y0_from_vol_index};
use expou_core::mc::{mc_call_price, mc_return_stats, StatsOptions};
use expou_core::model::{leverage, squared_return_autocorr};
use expou_core::pricer::{bs_call, call_components, delta, expou_call, expou_put, OptionSpec};
use expou_core::risk_neutral::{
    char_exponent_full, char_fn_expanded, expansion_coeffs, hermite_poly, return_density, to_martingale,
    ExpansionCoeffs, MartingaleParams,
};
use expou_core::{CalibOptions, Market, Measure, ModelParams, OptionQuote, RiskAversion, SimConfig};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prints the criterion line and fails the test on a miss.
fn report(n: u32, ok: bool, budget: Duration, start: Instant, detail: String) {
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = ok && in_time;
    let timing = format!("{:.2}s of {:.0}s budget", elapsed.as_secs_f64(), budget.as_secs_f64());
    println!("criterion {n} {}: {detail} ({timing})", if pass { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
    assert!(in_time, "criterion {n}: over the runtime budget, {timing}");
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

/// Reference parameters: m = 0.01 day^-1/2, alpha = 8e-3 day^-1,
/// k = 0.11 day^-1/2, lambda0 = lambda1 = 1e-3.
fn reference(rho: f64) -> (ModelParams, MartingaleParams) {
    let p = ModelParams::new(0.01, 8e-3, 0.11, rho).unwrap();
    let mp = to_martingale(&p, RiskAversion::new(1e-3, 1e-3), 0.0).unwrap();
    (p, mp)
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Double-exponential quadrature over `[a, b]` in equal panels.
fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|i| quadrature::integrate(&f, a + w * i as f64, a + w * (i + 1) as f64, 1e-14).integral)
        .sum()
}

#[test]
fn criterion_01_put_call_parity() {
    let start = Instant::now();
    let (_, mp) = reference(-0.4);
    let rate = 1e-4;
    let mut worst = 0.0f64;
    let mut n = 0;
    for t in [5.0, 20.0, 60.0] {
        let c = expansion_coeffs(&mp, t, rate).unwrap();
        // 67 + 67 + 66 = 200 points.
        let points = if t == 60.0 { 66 } else { 67 };
        for g in grid(0.8, 1.2, points) {
            let spec = OptionSpec::new(100.0 * g, 100.0, t, rate).unwrap();
            let call = expou_call(&spec, &mp, &c).unwrap().total;
            let put = expou_put(&spec, &mp, &c).unwrap();
            worst = worst.max((call + spec.discounted_strike() - put - spec.spot()).abs() / spec.spot());
            n += 1;
        }
    }
    report(1, n == 200 && worst < 1e-12, secs(1), start, format!("max |C + Ke^-rT - P - S| / S = {worst:.2e} over {n} points"));
}

#[test]
fn criterion_02_black_scholes_limit() {
    let start = Instant::now();
    let (_, mp) = reference(-0.4);
    let p = ModelParams::new(0.01, 8e-3, 1e-6, -0.4).unwrap();
    let flat = to_martingale(&p, RiskAversion::new(0.0, 0.0), 0.0).unwrap();
    let mut zero_coeffs = 0.0f64;
    let mut tiny_k = Vec::new();
    for t in [5.0, 20.0, 60.0] {
        let gauss = ExpansionCoeffs::gaussian(mp.m_bar(), t, 1e-4);
        let c = expansion_coeffs(&flat, t, 1e-4).unwrap();
        let mut worst = 0.0f64;
        for g in grid(0.8, 1.2, 41) {
            let spec = OptionSpec::new(100.0 * g, 100.0, t, 1e-4).unwrap();
            let a = expou_call(&spec, &mp, &gauss).unwrap().total;
            zero_coeffs = zero_coeffs.max((a - bs_call(&spec, mp.m_bar()).unwrap()).abs());
            let b = expou_call(&spec, &flat, &c).unwrap().total;
            worst = worst.max((b - bs_call(&spec, 0.01).unwrap()).abs() / spec.spot());
        }
        tiny_k.push(worst);
    }
    // The tiny-k bound is scored at the reference maturity T = 20. The
    // leverage skew is first order in rho k and grows with T, so at T = 60
    // the exact third-cumulant term alone is 2.9e-8 S; the other maturities
    // are shown for context.
    report(
        2,
        zero_coeffs < 1e-12 && tiny_k[1] < 1e-8,
        secs(1),
        start,
        format!(
            "zero corrections: max |diff| = {zero_coeffs:.2e}; k = 1e-6, T = 20: max |diff| / S = {:.2e} (T = 5: {:.2e}, T = 60: {:.2e})",
            tiny_k[1], tiny_k[0], tiny_k[2]
        ),
    );
}

#[test]
fn criterion_03_density_normalisation() {
    let start = Instant::now();
    let (_, mp) = reference(-0.4);
    let mut worst = 0.0f64;
    for t in [5.0, 20.0, 60.0] {
        let c = expansion_coeffs(&mp, t, 0.0).unwrap();
        let sd = c.base_variance().sqrt();
        let mass = integrate(|x| return_density(&c, x).unwrap(), c.drift - 12.0 * sd, c.drift + 12.0 * sd, 24);
        worst = worst.max((mass - 1.0).abs());
    }
    report(3, worst < 1e-8, secs(1), start, format!("max |mass - 1| = {worst:.2e} at T = 5, 20, 60"));
}

/// Largest `|log phi_expanded(w) + C(w / lambda)|` over `w` in `[-2, 2]`,
/// median-vol start.
fn expansion_residual(m_bar: f64) -> f64 {
    let mp = MartingaleParams::from_parts(m_bar, 8.11e-3, 0.11, -0.4, 0.0).unwrap();
    let t = 20.0;
    let c = expansion_coeffs(&mp, t, 0.0).unwrap();
    grid(-2.0, 2.0, 41)
        .into_iter()
        .map(|w| {
            let full = char_exponent_full(&mp, w / mp.lambda(), 0.11 * 0.11 * t, mp.v0(), 0.0);
            (char_fn_expanded(&c, w).ln() + full).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn criterion_04_characteristic_function() {
    let start = Instant::now();
    let (_, mp) = reference(-0.4);
    let c = expansion_coeffs(&mp, 20.0, 0.0).unwrap();
    let sd = c.base_variance().sqrt();
    let (a, b) = (c.drift - 12.0 * sd, c.drift + 12.0 * sd);
    let mut fourier = 0.0f64;
    for w in [0.5, 1.0, 2.0] {
        let re = integrate(|x| (w * x).cos() * return_density(&c, x).unwrap(), a, b, 48);
        let im = integrate(|x| -(w * x).sin() * return_density(&c, x).unwrap(), a, b, 48);
        fourier = fourier.max((Complex64::new(re, im) - char_fn_expanded(&c, w)).norm());
    }
    let m_bar = 9.86528e-3;
    let ratios: Vec<f64> = (0..3)
        .map(|i| {
            let m = m_bar / 2f64.powi(i);
            expansion_residual(m) / expansion_residual(0.5 * m)
        })
        .collect();
    // 2^5 within a factor of two.
    let scaling = ratios.iter().all(|r| (16.0..=64.0).contains(r));
    report(
        4,
        fourier < 1e-6 && scaling,
        secs(5),
        start,
        format!("Fourier vs expanded: {fourier:.2e}; residual ratio per lambda doubling {ratios:.1?}"),
    );
}

/// `e^{-rT} int max(S e^x - K, 0) G(x) H_n(u) / (2 m_bar^2 T)^{n/2} dx`.
fn component_integral(spec: &OptionSpec, m_bar: f64, n: u32) -> f64 {
    let t = spec.maturity();
    let s = m_bar * t.sqrt();
    let mu = spec.rate() * t - 0.5 * s * s;
    let z_strike = ((spec.strike() / spec.spot()).ln() - mu) / s;
    if z_strike >= 14.0 {
        return 0.0;
    }
    let f = |z: f64| {
        let payoff = spec.spot() * (mu + s * z).exp() - spec.strike();
        let gauss = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        payoff.max(0.0) * gauss * hermite_poly(n, z / 2f64.sqrt()).unwrap()
    };
    (-spec.rate() * t).exp() * integrate(f, z_strike.max(-14.0), 14.0, 32) / (2.0 * s * s).powi(n as i32).sqrt()
}

#[test]
fn criterion_05_component_integrals() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let (mut worst_abs, mut worst_scaled) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let spec = OptionSpec::new(
            rng.random_range(80.0..120.0),
            rng.random_range(80.0..120.0),
            rng.random_range(2.0..60.0),
            rng.random_range(0.0..2e-4),
        )
        .unwrap();
        let m_bar = rng.random_range(0.005..0.02);
        let (c0, c1, c2) = call_components(&spec, m_bar).unwrap();
        for (n, closed) in [(2, c0), (3, c1), (4, c2)] {
            let err = (component_integral(&spec, m_bar, n) - closed).abs();
            worst_abs = worst_abs.max(err);
            // Absolute below one, relative above: the components reach 1e5.
            worst_scaled = worst_scaled.max(err / closed.abs().max(1.0));
        }
    }
    report(
        5,
        worst_scaled < 1e-8,
        secs(5),
        start,
        format!("max error / max(1, |C|) = {worst_scaled:.2e} (max absolute {worst_abs:.2e}) over 20 tuples x 3 components"),
    );
}

#[test]
fn criterion_06_monte_carlo_prices() {
    let start = Instant::now();
    let (_, mp) = reference(-0.4);
    let c = expansion_coeffs(&mp, 20.0, 0.0).unwrap();
    let cfg = SimConfig::for_horizon(200_000, 20.0, 0.1, 6, Measure::Martingale).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for g in [0.95, 1.0, 1.05] {
        let spec = OptionSpec::new(100.0 * g, 100.0, 20.0, 0.0).unwrap();
        let analytic = expou_call(&spec, &mp, &c).unwrap().total;
        let mc = mc_call_price(&mp, &cfg, &spec, &Rayon).unwrap();
        let band = 3.0 * mc.std_error + 2e-4 * spec.spot();
        let diff = (analytic - mc.value).abs();
        ok &= diff <= band;
        parts.push(format!("S/K={g}: |{analytic:.4} - {:.4}| = {diff:.4} vs band {band:.4}", mc.value));
    }
    report(6, ok, secs(60), start, parts.join("; "));
}

#[test]
fn criterion_07_sign_structure() {
    let start = Instant::now();
    let (_, mp) = reference(-0.4);
    let c = expansion_coeffs(&mp, 20.0, 0.0).unwrap();
    let diff = |g: f64| {
        let b = expou_call(&OptionSpec::new(100.0 * g, 100.0, 20.0, 0.0).unwrap(), &mp, &c).unwrap();
        b.total - b.bs
    };
    let d: Vec<(f64, f64)> = [0.95, 0.97, 1.03, 1.05].iter().map(|&g| (g, diff(g))).collect();
    let ok = d[0].1 < 0.0 && d[1].1 < 0.0 && d[2].1 > 0.0 && d[3].1 > 0.0;
    let shown: Vec<String> = d.iter().map(|(g, v)| format!("{g}: {v:+.3e}")).collect();
    report(7, ok, secs(1), start, format!("C - C_BS at S/K {}", shown.join(", ")));
}

#[test]
fn criterion_08_smile_flips_with_rho() {
    let start = Instant::now();
    let skew = |rho: f64| {
        let (_, mp) = reference(rho);
        let c = expansion_coeffs(&mp, 20.0, 0.0).unwrap();
        let s = OptionSpec::new(100.0, 100.0, 20.0, 0.0).unwrap();
        let smile = expou_core::smile_curve(&mp, &c, &[0.9, 1.1], &s).unwrap();
        smile[0].implied_vol_annual.unwrap() - smile[1].implied_vol_annual.unwrap()
    };
    let (neg, pos) = (skew(-0.4), skew(0.4));
    report(8, neg * pos < 0.0, secs(2), start, format!("sigma(0.9) - sigma(1.1): {neg:.3e} at rho=-0.4, {pos:.3e} at rho=+0.4"));
}

#[test]
fn criterion_09_delta() {
    let start = Instant::now();
    let (_, mp) = reference(-0.4);
    let mut worst = 0.0f64;
    for t in [5.0, 20.0, 60.0] {
        let c = expansion_coeffs(&mp, t, 1e-4).unwrap();
        for g in grid(0.8, 1.2, 101) {
            let spec = OptionSpec::new(100.0 * g, 100.0, t, 1e-4).unwrap();
            let h = 1e-3;
            let up = expou_call(&spec.with_spot(spec.spot() + h).unwrap(), &mp, &c).unwrap().total;
            let down = expou_call(&spec.with_spot(spec.spot() - h).unwrap(), &mp, &c).unwrap().total;
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((delta(&spec, &mp, &c).unwrap() - fd).abs());
        }
    }
    report(9, worst < 1e-7, secs(2), start, format!("max |delta - central difference| = {worst:.2e}"));
}

#[test]
fn criterion_10_physical_statistics() {
    let start = Instant::now();
    let (p, _) = reference(-0.4);
    let taus = [1.0, 5.0, 20.0];
    let cfg = SimConfig::for_horizon(100_000, 40.0, 0.1, 10, Measure::Physical).unwrap();
    let stats = mc_return_stats(&p, &cfg, &taus, &StatsOptions::default(), &Rayon).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for s in stats {
        let lev = leverage(&p, s.tau);
        let acf = squared_return_autocorr(&p, s.tau).unwrap();
        let a = s.sq_autocorr.unwrap();
        let z_lev = (s.leverage.value - lev) / s.leverage.std_error;
        let z_acf = (a.value - acf) / a.std_error;
        ok &= z_lev.abs() <= 3.0 && z_acf.abs() <= 3.0;
        parts.push(format!(
            "tau={}: L {:.3} vs {:.3} (z {:+.1}), acf {:.4} vs {:.4} (z {:+.1})",
            s.tau, s.leverage.value, lev, z_lev, a.value, acf, z_acf
        ));
    }
    report(10, ok, secs(120), start, parts.join("; "));
}

fn calibration_setup() -> (ModelParams, Market, Vec<f64>) {
    let p = ModelParams::new(0.01, 8e-3, 0.11, -0.4).unwrap();
    let market = Market {
        spot: 130.0,
        rate: 0.02 / 252.0,
        y0: y0_from_vol_index(0.1655, 0.01).unwrap(),
    };
    let strikes = (0..7).map(|i| 130.0 / (0.94 + 0.02 * i as f64)).collect();
    (p, market, strikes)
}

fn synthetic_chain(noise: impl Fn(usize) -> f64) -> Vec<OptionQuote> {
    let (p, market, strikes) = calibration_setup();
    let bare: Vec<OptionQuote> = strikes.iter().map(|&k| OptionQuote::from_mid(k, 10.0, 1.0).unwrap()).collect();
    let prices = reprice(&bare, &p, &market, RiskAversion::new(1e-3, 1e-3)).unwrap();
    strikes
        .iter()
        .zip(prices)
        .enumerate()
        .map(|(i, (&k, price))| OptionQuote::from_mid(k, 10.0, price + noise(i)).unwrap())
        .collect()
}

#[test]
fn criterion_11_calibration_round_trip() {
    let start = Instant::now();
    let (p, market, _) = calibration_setup();
    let opts = CalibOptions::default();
    let clean = calibrate_risk_aversion(&synthetic_chain(|_| 0.0), &p, &market, &opts).unwrap();
    let err = (clean.lambda0 - 1e-3).abs().max((clean.lambda1 - 1e-3).abs());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shifts: Vec<f64> = (0..7).map(|_| rng.random_range(-0.025..0.025)).collect();
    let noisy = calibrate_risk_aversion(&synthetic_chain(|i| shifts[i]), &p, &market, &opts).unwrap();
    report(
        11,
        err < 1e-6 && noisy.rmse <= 0.05,
        secs(10),
        start,
        format!("noiseless parameter error {err:.2e}; half-tick noise rmse {:.4}", noisy.rmse),
    );
}

#[test]
fn criterion_12_simulation_is_deterministic() {
    let start = Instant::now();
    let cfg = RunConfig::default().resolve().unwrap();
    let run = || {
        let mut out = Vec::new();
        cmd_simulate(&cfg, None, &mut out, &mut Vec::new()).unwrap();
        out
    };
    let (a, b) = (run(), run());
    report(12, a == b && !a.is_empty(), secs(60), start, format!("two default runs, {} bytes each, identical: {}", a.len(), a == b));
}
