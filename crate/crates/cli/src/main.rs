//! `gauss-sphere`: lattice counts in 3-balls, iterated integrals, their
//! series, lattice-sum constants and the verification suite.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gauss_sphere::lattice_sums::{c_constant_direct, c_constant_ewald, ConstantSet};
use gauss_sphere::report::asymptotics::asymptotics_report;
use gauss_sphere::report::figure::{figure_pipeline, format_real, write_csv};
use gauss_sphere::report::suite::{run_suite, Profile, SuiteOptions};
use gauss_sphere::series::{q_polynomial, quadruple, CoefficientSource, OscillatorySeries};
use gauss_sphere::smeared::{
    fourier_check, make_bump, pair_counting, verify_delta_identity, verify_nd_identity, BumpFunction,
};
use gauss_sphere::step_calculus::IteratedEvaluator;
use gauss_sphere::{build_table, SqrtRadius};

use output::{csv, json as emit_json, json_only, sink, Emit};

/// Precision of the constants used by `series` and `asymptotics`.
const CONSTANT_TARGET: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "gauss-sphere", version, about)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    emit: Emit,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "quick")]
    profile: Profile,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// r_d(n) and cumulative counts.
    Counts {
        #[arg(long, default_value_t = 3)]
        dim: u8,
        #[arg(long, default_value_t = 100)]
        max_n: u64,
    },
    /// N_{3,k} at Σ = sqrt(p/q).
    Iterated {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        sigma2: SqrtRadius,
        #[arg(long, default_value = "off")]
        oracle: Toggle,
    },
    /// o_k with its bound, the full expansion and the exact value.
    Series {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        sigma2: SqrtRadius,
        #[arg(long, default_value_t = 10_000)]
        terms: u64,
        /// Use the printed closed form for β_k (known to be wrong at odd k).
        #[arg(long)]
        printed_beta: bool,
    },
    /// Coefficient quadruples and Q_k in exact form.
    Coeffs {
        #[arg(long, default_value_t = 0)]
        from: u64,
        #[arg(long, default_value_t = 8)]
        to: u64,
    },
    /// C_j by Ewald summation or by direct summation with a certified tail.
    Constants {
        #[arg(long)]
        j: u32,
        #[arg(long, default_value = "ewald")]
        method: Method,
        #[arg(long, default_value_t = 100_000)]
        terms: u64,
        #[arg(long, default_value_t = 1e-9)]
        target: f64,
    },
    /// ∫χ N_{3,k} for a bump χ.
    Pair {
        #[command(flatten)]
        bump: BumpArgs,
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// Smeared check of the Δ_d identity.
    VerifyDelta {
        #[arg(long, default_value_t = 3)]
        dim: u8,
        #[command(flatten)]
        bump: BumpArgs,
        #[arg(long, default_value_t = 10_000)]
        terms: u64,
    },
    /// Smeared check of the N_d identity.
    VerifyNd {
        #[arg(long, default_value_t = 3)]
        dim: u8,
        #[command(flatten)]
        bump: BumpArgs,
        #[arg(long, default_value_t = 10_000)]
        terms: u64,
    },
    /// Damped Fourier transform of N_3 - (4π/3)Σ³ against its series.
    Fourier {
        #[arg(long, allow_hyphen_values = true)]
        tau: f64,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 10_000)]
        terms: u64,
        #[arg(long, default_value_t = 60.0)]
        rmax: f64,
    },
    /// Rows λ, Σ², N_{3,4} and the three residuals on Σ² = λ/8.
    Figure {
        #[arg(long, default_value_t = 1600)]
        lambda_max: u64,
        #[arg(long, default_value_t = 10_000)]
        terms: u64,
    },
    /// Dyadic-window growth of N_{3,k} minus its main terms.
    Asymptotics {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 100.0)]
        sigma_max: f64,
    },
    /// All acceptance checks and module invariants; nonzero exit on failure.
    Suite {
        #[arg(long)]
        printed_beta: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Toggle {
    Off,
    On,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Method {
    Ewald,
    Direct,
}

#[derive(Args)]
struct BumpArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Comma-separated moment orders from 1..=4.
    #[arg(long, value_delimiter = ',')]
    kill_moments: Vec<u32>,
}

impl BumpArgs {
    fn build(&self) -> Result<BumpFunction> {
        Ok(make_bump(self.a, self.b, &self.kill_moments)?)
    }
}

fn source(printed: bool) -> CoefficientSource {
    if printed {
        CoefficientSource::PrintedClosedForm
    } else {
        CoefficientSource::Recursion
    }
}

fn shells_for(sigma_max: f64) -> u64 {
    (sigma_max * sigma_max).ceil() as u64 + 1
}

fn run(cli: Cli) -> Result<bool> {
    let out = || sink(cli.out.as_deref());
    let emit = cli.emit;
    match cli.command {
        Command::Counts { dim, max_n } => {
            let t = build_table(dim, max_n)?;
            match emit {
                Emit::Csv => csv(
                    &["n", "r", "cumulative"],
                    (0..=max_n).map(|n| vec![n.to_string(), t.r(n).to_string(), t.cumulative_at(n).to_string()]),
                    out()?,
                )?,
                Emit::Json => emit_json(
                    &json!({ "dim": dim, "max_n": max_n, "r": t.counts(), "cumulative": t.cumulative() }),
                    out()?,
                )?,
            }
        }
        Command::Iterated { k, sigma2, oracle } => {
            let t = build_table(3, sigma2.floor_square() + 1)?;
            let e = IteratedEvaluator::new(&t)?;
            let value = e.eval_exact(k, &sigma2)?;
            let oracle_value = match oracle {
                Toggle::On => Some(e.eval_quadrature(k, &sigma2, 1e-12)?),
                Toggle::Off => None,
            };
            match emit {
                Emit::Csv => {
                    let mut header = vec!["k", "sigma2", "value"];
                    let mut row = vec![k.to_string(), sigma2.to_string(), format_real(value)];
                    if let Some(o) = oracle_value {
                        header.push("oracle_value");
                        row.push(format_real(o));
                    }
                    csv(&header, [row], out()?)?;
                }
                Emit::Json => {
                    let mut v = json!({ "k": k, "sigma2": sigma2.to_string(), "value": value });
                    if let Some(o) = oracle_value {
                        v["oracle_value"] = json!(o);
                    }
                    emit_json(&v, out()?)?;
                }
            }
        }
        Command::Series { k, sigma2, terms, printed_beta } => {
            let t = build_table(3, terms.max(sigma2.floor_square() + 1))?;
            let s = OscillatorySeries::with_source(&t, source(printed_beta))?;
            let sigma = sigma2.to_f64();
            let ok = s.eval_ok(k, sigma, terms)?;
            let cs = ConstantSet::ewald(k.saturating_sub(1), CONSTANT_TARGET)?;
            let full = s.main_formula(k, sigma, terms, &cs)?;
            let exact = IteratedEvaluator::new(&t)?.eval_exact(k, &sigma2)?;
            match emit {
                Emit::Csv => csv(
                    &["k", "sigma2", "o_k", "bound", "terms", "main_formula", "formula_bound", "exact"],
                    [vec![
                        k.to_string(),
                        sigma2.to_string(),
                        format_real(ok.value),
                        format_real(ok.bound),
                        terms.to_string(),
                        format_real(full.value),
                        format_real(full.bound),
                        format_real(exact),
                    ]],
                    out()?,
                )?,
                Emit::Json => emit_json(
                    &json!({
                        "k": k,
                        "sigma2": sigma2.to_string(),
                        "o_k": ok,
                        "main_formula": full,
                        "exact": exact,
                    }),
                    out()?,
                )?,
            }
        }
        Command::Coeffs { from, to } => {
            let mut rows = Vec::new();
            for k in from..=to {
                let q = quadruple(k)?;
                let poly = u32::try_from(k).ok().and_then(|k| q_polynomial(k).ok()).map(|p| p.to_string());
                rows.push((q, poly));
            }
            match emit {
                Emit::Csv => csv(
                    &["k", "alpha", "beta", "gamma", "delta", "Q"],
                    rows.iter().map(|(q, p)| {
                        let [a, b, c, d] = q.to_array();
                        vec![
                            q.k.to_string(),
                            a.to_string(),
                            b.to_string(),
                            c.to_string(),
                            d.to_string(),
                            p.clone().unwrap_or_default(),
                        ]
                    }),
                    out()?,
                )?,
                Emit::Json => emit_json(
                    &rows
                        .iter()
                        .map(|(q, p)| json!({ "quadruple": q, "Q": p }))
                        .collect::<Vec<_>>(),
                    out()?,
                )?,
            }
        }
        Command::Constants { j, method, terms, target } => {
            let c = match method {
                Method::Ewald => c_constant_ewald(j, target)?,
                Method::Direct => c_constant_direct(&build_table(3, terms)?, j, terms)?,
            };
            match emit {
                Emit::Csv => csv(
                    &["j", "value", "bound", "method"],
                    [vec![j.to_string(), format_real(c.value), format_real(c.bound), c.method.to_string()]],
                    out()?,
                )?,
                Emit::Json => emit_json(&c, out()?)?,
            }
        }
        Command::Pair { bump, k } => {
            json_only(emit, "pair")?;
            let chi = bump.build()?;
            let t = build_table(3, shells_for(bump.b))?;
            let q = pair_counting(&t, k, &chi)?;
            emit_json(
                &json!({
                    "k": k,
                    "support": chi.support(),
                    "value": q.value,
                    "quadrature_estimate": q.error_estimate,
                    "residual_moments": chi.residual_moments(),
                }),
                out()?,
            )?;
        }
        Command::VerifyDelta { dim, bump, terms } => {
            json_only(emit, "verify-delta")?;
            let t = build_table(dim, terms.max(shells_for(bump.b)))?;
            let r = verify_delta_identity(&t, &bump.build()?, terms)?;
            emit_json(&r, out()?)?;
            return Ok(r.passed());
        }
        Command::VerifyNd { dim, bump, terms } => {
            json_only(emit, "verify-nd")?;
            let t = build_table(dim, terms.max(shells_for(bump.b)))?;
            let r = verify_nd_identity(&t, &bump.build()?, terms)?;
            emit_json(&r, out()?)?;
            return Ok(r.passed());
        }
        Command::Fourier { tau, eps, terms, rmax } => {
            json_only(emit, "fourier")?;
            let t = build_table(3, terms.max(shells_for(rmax)))?;
            let r = fourier_check(&t, tau, eps, terms, rmax)?;
            emit_json(&r, out()?)?;
            return Ok(r.passed());
        }
        Command::Figure { lambda_max, terms } => {
            let t = build_table(3, terms.max(lambda_max / 8 + 1))?;
            let data = figure_pipeline(&t, lambda_max, terms)?;
            match emit {
                Emit::Csv => write_csv(&data.rows, out()?)?,
                Emit::Json => emit_json(&data, out()?)?,
            }
        }
        Command::Asymptotics { k, sigma_max } => {
            let t = build_table(3, shells_for(sigma_max))?;
            let cs = ConstantSet::ewald(4, CONSTANT_TARGET)?;
            let rep = asymptotics_report(&t, k, sigma_max, &cs)?;
            match emit {
                Emit::Csv => csv(
                    &["lo", "hi", "points", "max_weighted", "argmax", "max_sharpness"],
                    rep.windows.iter().map(|w| {
                        vec![
                            format_real(w.lo),
                            format_real(w.hi),
                            w.points.to_string(),
                            format_real(w.max_weighted),
                            format_real(w.argmax),
                            format_real(w.max_sharpness),
                        ]
                    }),
                    out()?,
                )?,
                Emit::Json => emit_json(&rep, out()?)?,
            }
        }
        Command::Suite { printed_beta } => {
            json_only(emit, "suite")?;
            let summary = run_suite(SuiteOptions {
                profile: cli.profile,
                source: source(printed_beta),
            });
            for c in &summary.criteria {
                eprintln!("{}", c.line());
            }
            for i in &summary.invariants {
                eprintln!("[{}] {} ({:.2} s)", if i.passed { "PASS" } else { "FAIL" }, i.name, i.elapsed_s);
            }
            emit_json(&summary, out()?)?;
            return Ok(summary.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli).context("gauss-sphere failed") {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
