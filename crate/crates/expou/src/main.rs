use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use expou::commands::{self, CalibrateRequest, CliError, PathExport, StatsRequest};
use expou::config::{RunConfig, CONFIG_ENV};
use expou_core::Weighting;

/// Option prices, smiles, densities and Monte Carlo checks for the
/// exponential Ornstein-Uhlenbeck stochastic volatility model. Every command
/// writes one CSV table.
#[derive(Debug, Parser)]
#[command(name = "expou", version)]
struct Cli {
    /// TOML configuration file; built-in defaults when absent.
    #[arg(long, short, env = CONFIG_ENV, global = true)]
    config: Option<PathBuf>,

    /// Write the table here instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

/// Flags that override single configuration keys.
#[derive(Debug, clap::Args)]
struct Overrides {
    #[arg(long, global = true, allow_hyphen_values = true)]
    m: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    lambda1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    spot: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    rate_annual: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    sigma0_annual: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    z0: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    maturity_days: Option<f64>,
    #[arg(long, global = true)]
    points: Option<usize>,
    #[arg(long, global = true)]
    n_paths: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    antithetic: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrected and Black-Scholes call prices: moneyness,call,bs,diff
    Price,
    /// Implied volatility smile: moneyness,implied_vol_annual
    Smile,
    /// Risk-neutral log-return density: x,p
    Density,
    /// Call delta: moneyness,delta
    Greeks,
    /// Monte Carlo prices: moneyness,mc_price,std_err,analytic,abs_diff
    Simulate {
        /// Also write raw paths (path,step,t_days,x,y) to this file.
        #[arg(long)]
        paths: Option<PathBuf>,
        /// Number of paths to export.
        #[arg(long, default_value_t = 10)]
        export_paths: usize,
    },
    /// Leverage and squared-return autocorrelation, simulated and closed form
    Stats {
        /// Comma-separated lags in days.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-5.0, -1.0, 0.0, 1.0, 5.0, 20.0])]
        taus: Vec<f64>,
        /// Simulated horizon in days.
        #[arg(long, default_value_t = 60.0)]
        horizon: f64,
        /// Bootstrap resamples for the standard errors.
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
    },
    /// Fit lambda0, lambda1 to a quote file (strike,maturity_days,bid,ask or strike,maturity_days,mid)
    Calibrate {
        quotes: PathBuf,
        #[arg(long, value_enum, default_value_t = WeightArg::Uniform)]
        weighting: WeightArg,
        /// Write the per-quote table strike,mid,model,residual here.
        #[arg(long)]
        residuals: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WeightArg {
    Uniform,
    /// Inverse squared bid-ask spread.
    Spread,
}

impl Overrides {
    fn apply(&self, c: &mut RunConfig) {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut c.model.m, self.m);
        set(&mut c.model.alpha, self.alpha);
        set(&mut c.model.k, self.k);
        set(&mut c.model.rho, self.rho);
        set(&mut c.risk_aversion.lambda0, self.lambda0);
        set(&mut c.risk_aversion.lambda1, self.lambda1);
        set(&mut c.market.spot, self.spot);
        set(&mut c.market.rate_annual, self.rate_annual);
        set(&mut c.grid.maturity_days, self.maturity_days);
        set(&mut c.sim.dt, self.dt);
        if self.sigma0_annual.is_some() {
            c.market.sigma0_annual = self.sigma0_annual;
            // A flag beats a file: a vol index on the command line replaces a
            // z0 from the config unless z0 is also given as a flag.
            if self.z0.is_none() {
                c.market.z0 = None;
            }
        }
        if self.z0.is_some() {
            c.market.z0 = self.z0;
        }
        if let Some(p) = self.points {
            c.grid.points = p;
        }
        if let Some(n) = self.n_paths {
            c.sim.n_paths = n;
        }
        if let Some(s) = self.seed {
            c.sim.seed = s;
        }
        if self.antithetic {
            c.sim.antithetic = true;
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut config);
    let cfg = config.resolve()?;

    let output = cli.output.clone().or_else(|| cfg.output.clone());
    let mut buf = Vec::new();
    let mut note = std::io::stderr();
    match &cli.command {
        Command::Price => commands::cmd_price(&cfg, &mut buf, &mut note)?,
        Command::Smile => commands::cmd_smile(&cfg, &mut buf, &mut note)?,
        Command::Density => commands::cmd_density(&cfg, &mut buf, &mut note)?,
        Command::Greeks => commands::cmd_greeks(&cfg, &mut buf, &mut note)?,
        Command::Simulate { paths, export_paths } => {
            let export = paths.clone().map(|path| PathExport {
                path,
                n_paths: *export_paths,
            });
            commands::cmd_simulate(&cfg, export.as_ref(), &mut buf, &mut note)?
        }
        Command::Stats {
            taus,
            horizon,
            bootstrap,
        } => {
            let req = StatsRequest {
                taus: taus.clone(),
                horizon: *horizon,
                bootstrap: *bootstrap,
            };
            commands::cmd_stats(&cfg, &req, &mut buf, &mut note)?
        }
        Command::Calibrate {
            quotes,
            weighting,
            residuals,
        } => {
            let req = CalibrateRequest {
                quotes: quotes.clone(),
                weighting: match weighting {
                    WeightArg::Uniform => Weighting::Uniform,
                    WeightArg::Spread => Weighting::InverseSpread,
                },
                residuals: residuals.clone(),
            };
            commands::cmd_calibrate(&cfg, &req, &mut buf, &mut note)?
        }
    }
    // The table is written only once the command has succeeded.
    let written = match &output {
        Some(path) => std::fs::write(path, &buf).map_err(|source| (path.clone(), source)),
        None => std::io::stdout()
            .lock()
            .write_all(&buf)
            .map_err(|source| (PathBuf::from("standard output"), source)),
    };
    written.map_err(|(path, source)| CliError::Output { path, source })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
