mod bench;
mod format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ldst::approx::approximate;
use ldst::mdp::{nominal_optimal_policy, validate, DeterministicPolicy};
use ldst::oracle::exact_optimum;
use ldst::reductions::{self, Certificate};
use ldst::robust::worst_case;
use ldst::{Error, Instance};
use serde::Serialize;

use format::sig;

#[derive(Parser)]
#[command(name = "ldst", version, about = "Robust finite-horizon MDPs under budgeted uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file; prints one diagnostic per line.
    Validate { path: PathBuf },
    /// Compute a policy and its value.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long)]
        policy_out: Option<PathBuf>,
        #[arg(long)]
        report_out: Option<PathBuf>,
    },
    /// Nominal reward, worst-case reward, loss and witness of a policy.
    Eval { path: PathBuf, policy: PathBuf },
    /// Write a generated instance (and a `.cert.json` sidecar).
    Gen {
        #[command(subcommand)]
        generator: Generator,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Run approx and exact on every instance of a directory.
    Bench {
        dir: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Nominal,
    Exact,
    Approx,
}

#[derive(Subcommand)]
enum Generator {
    /// Bin-packing instance from item sizes `--b` and bin size `--B`.
    ThreePartition {
        #[arg(long, value_delimiter = ',', required = true)]
        b: Vec<u64>,
        #[arg(long = "B")]
        big_b: u64,
    },
    /// Reward-uncertainty instance from a source/sink graph.
    DisjointPaths {
        /// Layered graph, or a plain DAG with "arcs" and "pairs" to be layered.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Transition-uncertainty instance from a row/column partitioned graph.
    MaxminVc {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Instance with k = 2 from a DIMACS 3-CNF file.
    ThreeSat {
        #[arg(long)]
        cnf: PathBuf,
    },
    /// Seeded random 2-stage instance with k = 1.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        s1: usize,
        #[arg(long, default_value_t = 5)]
        s2: usize,
        #[arg(long, default_value_t = 3)]
        actions: usize,
        #[arg(long, default_value_t = 0.0)]
        reward_min: f64,
        #[arg(long, default_value_t = 10.0)]
        reward_max: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    if e.is_shape_or_cap() {
        2
    } else {
        1
    }
}

pub(crate) fn read_instance(path: &Path) -> ldst::Result<Instance> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> ldst::Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> ldst::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Serialize)]
struct SolveReport<'a> {
    method: &'static str,
    value: f64,
    policy: &'a DeterministicPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    robust: Option<ldst::Report>,
    #[serde(skip_serializing_if = "Option::is_none")]
    approx: Option<ldst::approx::ApproxReport<f64>>,
}

fn solve(
    path: &Path,
    method: Method,
    epsilon: f64,
    policy_out: Option<&Path>,
    report_out: Option<&Path>,
) -> ldst::Result<()> {
    let instance = read_instance(path)?;
    let (policy, value, name, approx) = match method {
        Method::Nominal => {
            let (p, v) = nominal_optimal_policy(&instance)?;
            (p, v, "nominal", None)
        }
        Method::Exact => {
            let (p, v) = exact_optimum(&instance)?;
            (p, v, "exact", None)
        }
        Method::Approx => {
            let (p, v, r) = approximate(&instance, epsilon)?;
            (p, v, "approx", Some(r))
        }
    };
    let robust = match worst_case(&instance, &policy) {
        Ok(r) => Some(r),
        Err(Error::CapExceeded { .. }) if matches!(method, Method::Nominal) => None,
        Err(e) => return Err(e),
    };
    println!("value={}", sig(value));
    if let Some(p) = policy_out {
        write_json(p, &policy)?;
    }
    if let Some(r) = report_out {
        let report = SolveReport {
            method: name,
            value,
            policy: &policy,
            robust,
            approx,
        };
        write_json(r, &report)?;
    }
    Ok(())
}

fn eval(path: &Path, policy: &Path) -> ldst::Result<()> {
    let instance = read_instance(path)?;
    let policy: DeterministicPolicy = read_json(policy)?;
    let report = worst_case(&instance, &policy)?;
    println!(
        "R={} R\u{302}={} L={}",
        sig(report.nominal),
        sig(report.worst_case),
        sig(report.loss)
    );
    println!("witness={}", serde_json::to_string(&report.witness)?);
    Ok(())
}

fn generate(generator: &Generator) -> ldst::Result<(Instance, Certificate)> {
    Ok(match generator {
        Generator::ThreePartition { b, big_b } => {
            let m = reductions::gen_3partition(b, *big_b)?;
            let n = b.len() / 3;
            let cert = Certificate::ThreePartition {
                n,
                threshold: 1.0 - 1.0 / n as f64,
            };
            (m, cert)
        }
        Generator::DisjointPaths { graph, epsilon } => {
            let value: serde_json::Value = read_json(graph)?;
            let layered = if value.get("layers").is_some() {
                serde_json::from_value(value)?
            } else {
                reductions::layerize(&serde_json::from_value(value)?)?
            };
            let m = reductions::gen_disjoint_paths(&layered, *epsilon)?;
            let cert = Certificate::DisjointPaths {
                pairs: layered.pairs.len(),
                epsilon: *epsilon,
            };
            (m, cert)
        }
        Generator::MaxminVc { graph } => {
            let g: reductions::PartitionedGraph = read_json(graph)?;
            let (m, padded, params) = reductions::gen_maxmin_vc(&g)?;
            let cert = Certificate::MaxminVc {
                ell: g.ell,
                m: padded.m(),
                params,
                padded,
            };
            (m, cert)
        }
        Generator::ThreeSat { cnf } => {
            let text = std::fs::read_to_string(cnf)?;
            let f = reductions::CnfFormula::from_dimacs(&text)?;
            (reductions::gen_3sat(&f)?, Certificate::ThreeSat { threshold: 0.5 })
        }
        Generator::Random {
            seed,
            s1,
            s2,
            actions,
            reward_min,
            reward_max,
        } => {
            let spec = reductions::RandomSpec {
                s1_count: *s1,
                s2_count: *s2,
                actions_per_state: *actions,
                reward_range: (*reward_min, *reward_max),
                seed: *seed,
            };
            (reductions::gen_random(&spec)?, Certificate::Random { spec })
        }
    })
}

fn certificate_path(out: &Path) -> PathBuf {
    out.with_extension("cert.json")
}

fn run(cli: Cli) -> ldst::Result<u8> {
    match cli.command {
        Command::Validate { path } => {
            let instance = read_instance(&path)?;
            let diags = validate(&instance);
            if diags.is_empty() {
                println!("valid");
                return Ok(0);
            }
            for d in &diags {
                println!("{}: {}: {}", d.location, d.kind.label(), d.detail);
            }
            Ok(1)
        }
        Command::Solve {
            path,
            method,
            epsilon,
            policy_out,
            report_out,
        } => {
            solve(&path, method, epsilon, policy_out.as_deref(), report_out.as_deref())?;
            Ok(0)
        }
        Command::Eval { path, policy } => {
            eval(&path, &policy)?;
            Ok(0)
        }
        Command::Gen { generator, out } => {
            let (instance, cert) = generate(&generator)?;
            match out {
                Some(out) => {
                    write_json(&out, &instance)?;
                    write_json(&certificate_path(&out), &cert)?;
                }
                None => println!("{}", serde_json::to_string_pretty(&instance)?),
            }
            Ok(0)
        }
        Command::Bench { dir, epsilon, report } => {
            let rows = bench::bench(&dir, epsilon)?;
            print!("{}", bench::table(&rows));
            if let Some(r) = report {
                write_json(&r, &rows)?;
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
