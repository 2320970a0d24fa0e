use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qgallager::bounds::{
    curve_sweep, theorem1_slack, BoundMethod, BoundQuery, CodeOutput, Sweep,
};
use qgallager::divergence::{binary_renyi_ln_beta, hockey_stick, renyi_divergence, RenyiOrder};
use qgallager::exponent::{e0_channel, k_lambda, k_lambda_numeric, OptimizerOptions, SParam};
use qgallager::io::{read_channel, read_operator};
use qgallager::verify::{run_suite, Suite};
use qgallager::Error;

#[derive(Parser)]
#[command(name = "qgallager", version, about = "Renyi exponents and converse bounds for quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Renyi divergence D_λ(ρ‖σ), or the hockey-stick divergence with --hockey.
    Divergence {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, required_unless_present = "hockey")]
        lambda: Option<f64>,
        #[arg(long, requires = "gamma")]
        hockey: bool,
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Closed-form K_λ(A⟩B), optionally with the numeric infimum.
    KLambda {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        starts: usize,
    },
    /// E₀(s) of a channel for a given input state ρ^{AA'}.
    E0 {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
    },
    /// Fidelity-bound curve for the erasure channel, written as CSV.
    ErasureCurve {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        d: usize,
        #[command(flatten)]
        rate: RateArg,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        n_step: usize,
        #[arg(long, default_value = "renyi")]
        method: String,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slack of the converse K_λ(A⟩Bⁿ) − 𝔻_λ(𝔽 ‖ e^{−nR}) for a code.
    Theorem1 {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        fidelity: f64,
        #[command(flatten)]
        rate: RateArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        lambda: f64,
    },
    /// Seeded property suites; exit 1 if any property fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RateArg {
    /// Rate in nats per channel use.
    #[arg(long)]
    rate: Option<f64>,
    /// Rate in bits per channel use.
    #[arg(long)]
    rate_bits: Option<f64>,
}

impl RateArg {
    fn nats(&self) -> f64 {
        match (self.rate, self.rate_bits) {
            (Some(r), _) => r,
            (None, Some(b)) => b * std::f64::consts::LN_2,
            (None, None) => unreachable!("clap enforces one rate flag"),
        }
    }
}

enum Failure {
    Input(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(cli.command, &mut out);
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e15)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn run(command: Command, out: &mut String) -> Result<(), Failure> {
    match command {
        Command::Divergence {
            rho,
            sigma,
            lambda,
            hockey,
            gamma,
        } => {
            let rho = read_operator(rho)?.psd()?;
            let sigma = read_operator(sigma)?.psd()?;
            let v = if hockey {
                hockey_stick(&rho, &sigma, gamma.expect("clap requires --gamma"))?
            } else {
                let order = RenyiOrder::new(lambda.expect("clap requires --lambda"))?;
                renyi_divergence(&rho, &sigma, order)?
            };
            out.push_str(&format!("{}\n", num(v)));
        }
        Command::KLambda {
            state,
            lambda,
            numeric,
            seed,
            starts,
        } => {
            let order = RenyiOrder::new(lambda)?;
            let rho = read_operator(state)?.bipartite()?;
            rho.density()?;
            let closed = k_lambda(&rho, order);
            if numeric {
                out.push_str(&format!("# seed = {seed}\n"));
            }
            out.push_str(&format!("closed_form {}\n", num(closed)));
            if numeric {
                let opts = OptimizerOptions {
                    seed,
                    starts,
                    ..OptimizerOptions::default()
                };
                let value = k_lambda_numeric(&rho, order, &opts)?;
                out.push_str(&format!("numeric {}\n", num(value)));
                out.push_str(&format!("difference {}\n", num(value - closed)));
            }
        }
        Command::E0 { channel, input, s } => {
            let ch = read_channel(channel)?;
            let rho = read_operator(input)?.bipartite()?;
            let v = e0_channel(&ch, &rho, SParam::new(s)?)?;
            out.push_str(&format!("{}\n", num(v)));
        }
        Command::ErasureCurve {
            p,
            d,
            rate,
            n_min,
            n_max,
            n_step,
            method,
            out: path,
        } => {
            let method: BoundMethod = method.parse()?;
            if n_min == 0 || n_step == 0 || n_max < n_min {
                return Err(Error::InvalidArgument(format!(
                    "need 1 <= n-min <= n-max and n-step >= 1 (got {n_min}, {n_max}, {n_step})"
                ))
                .into());
            }
            let q = BoundQuery::new(n_min, rate.nats(), p, d)?;
            let ns: Vec<usize> = (n_min..=n_max).step_by(n_step).collect();
            let csv = curve_sweep(&q, &Sweep::OverN(ns), method)?.to_csv();
            match path {
                Some(path) => {
                    std::fs::write(&path, &csv)
                        .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
                    let rows = csv.lines().count() - 1;
                    out.push_str(&format!("wrote {rows} rows to {}\n", path.display()));
                }
                None => out.push_str(&csv),
            }
        }
        Command::Theorem1 {
            channel,
            input,
            fidelity,
            rate,
            n,
            lambda,
        } => {
            let order = RenyiOrder::new(lambda)?;
            let ch = read_channel(channel)?;
            let rho = read_operator(input)?.bipartite()?;
            let r = rate.nats();
            let slack = theorem1_slack(fidelity, n, r, CodeOutput::Channel { channel: &ch, input: &rho }, order)?;
            let d = binary_renyi_ln_beta(fidelity, -(n as f64) * r, order)?;
            out.push_str(&format!("k_lambda {}\n", num(slack + d)));
            out.push_str(&format!("binary_renyi {}\n", num(d)));
            out.push_str(&format!("slack {}\n", num(slack)));
        }
        Command::Verify { suite, seed } => {
            let suite: Suite = suite.parse()?;
            out.push_str(&format!("# suite = {suite}, seed = {seed}\n"));
            let results = run_suite(suite, seed);
            let failed = results.iter().filter(|r| !r.passed).count();
            for r in &results {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                out.push_str(&format!("{tag} {}: {}\n", r.name, r.detail));
            }
            out.push_str(&format!("{}/{} properties passed\n", results.len() - failed, results.len()));
            if failed > 0 {
                return Err(Failure::Verification);
            }
        }
    }
    Ok(())
}
