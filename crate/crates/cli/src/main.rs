use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use shiftlab::precision::DIGITS_ENV;
use shiftlab::recurrence::Verdict;
use shiftlab::{Error, Result};
use shiftlab_cli::report::Report;
use shiftlab_cli::run::{execute, write_outcome};
use shiftlab_cli::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "shiftlab",
    version,
    about = "Certify weighted shift hypotheses and run operator experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files, each into its own output directory.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Output directory (only with a single scenario).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge certificates found under the given directories into one table.
    Report {
        paths: Vec<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Tabulate weights and check the composition rule.
    Weights {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_min: Option<u64>,
        #[arg(long, default_value_t = 50)]
        n_max: u64,
    },
    /// Certify Hyp1-Hyp3 (and the strict damping variant) for a space.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long = "hyp", value_enum)]
        hypotheses: Vec<Hyp>,
        #[command(flatten)]
        gamma: GammaArgs,
        /// |λ| values for Hyp3, as decimal strings.
        #[arg(long = "lambda-abs")]
        lambda_abs: Vec<String>,
        #[arg(long)]
        hyp1_n_max: Option<u64>,
    },
    /// Solve the three-term recurrence for one λ.
    Recurrence {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1")]
        re: String,
        #[arg(long, default_value = "0")]
        im: String,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[command(flatten)]
        gamma: GammaArgs,
    },
    /// Iterate a truncated operator on a basis vector.
    Orbit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Op::BackwardShift)]
        operator: Op,
        /// Natural index of the starting basis vector.
        #[arg(long)]
        basis: i64,
        #[arg(long, default_value_t = 40)]
        dim: usize,
        #[arg(long, default_value_t = 10)]
        steps: usize,
    },
    /// Periodic points: of H_p + H_p* from roots of unity (`--root n/k`), or of H_p with `--s` and `--period`.
    Periodic {
        #[command(flatten)]
        common: Common,
        #[arg(long = "root")]
        roots: Vec<String>,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long)]
        s: Option<u64>,
        #[arg(long)]
        period: Option<u64>,
        #[arg(long)]
        n_trunc: Option<u64>,
    },
    /// Quadrature checks of inner products, adjoints and kernels.
    Quadrature {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n_max: Option<u64>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        sample_index: Option<u64>,
    },
    /// Compare weights with their growth model at probe indices.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        #[arg(long = "probe", required = true)]
        probes: Vec<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    Classic,
    Generalized,
    Theta,
    Disk,
}

#[derive(Clone, Copy, ValueEnum)]
enum Hyp {
    Hyp1,
    Hyp2,
    Hyp3,
    Alt311,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    BackwardShift,
    ForwardShift,
    JacobiSum,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = SpaceArg::Classic)]
    space: SpaceArg,
    #[arg(long, default_value_t = 0)]
    p: u32,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    /// Significant decimal digits.
    #[arg(long, env = DIGITS_ENV)]
    digits: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GammaArgs {
    /// sqrt_n_log_n or theta_geometric (with --beta-prime)
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    beta_prime: Option<String>,
}

impl GammaArgs {
    fn to_json(&self) -> Option<Value> {
        let name = self.gamma.clone()?;
        let mut m = Map::new();
        m.insert("name".into(), name.into());
        if let Some(b) = &self.beta_prime {
            m.insert("beta_prime".into(), b.clone().into());
        }
        Some(Value::Object(m))
    }
}

fn space_json(c: &Common) -> Value {
    let mut m = Map::new();
    let kind = match c.space {
        SpaceArg::Classic => "classic_bargmann",
        SpaceArg::Generalized => "generalized_bargmann",
        SpaceArg::Theta => "theta_fock_bargmann",
        SpaceArg::Disk => "poincare_disk",
    };
    m.insert("kind".into(), kind.into());
    for (k, v) in [("beta", &c.beta), ("nu", &c.nu), ("alpha", &c.alpha)] {
        if let Some(v) = v {
            m.insert(k.into(), v.clone().into());
        }
    }
    m.insert("p".into(), c.p.into());
    Value::Object(m)
}

fn insert_opt<T: Into<Value>>(m: &mut Value, key: &str, v: Option<T>) {
    if let Some(v) = v {
        m[key] = v.into();
    }
}

/// Flag form of a scenario, validated through the scenario parser.
fn flag_scenario(cmd: Command) -> Result<(Scenario, Option<PathBuf>)> {
    let (common, task) = match cmd {
        Command::Weights {
            common,
            n_min,
            n_max,
        } => {
            let mut t = json!({"type": "weights", "n_max": n_max});
            insert_opt(&mut t, "n_min", n_min);
            (common, t)
        }
        Command::Certify {
            common,
            hypotheses,
            gamma,
            lambda_abs,
            hyp1_n_max,
        } => {
            let mut t = json!({"type": "certify"});
            if !hypotheses.is_empty() {
                let names: Vec<&str> = hypotheses
                    .iter()
                    .map(|h| match h {
                        Hyp::Hyp1 => "Hyp1",
                        Hyp::Hyp2 => "Hyp2",
                        Hyp::Hyp3 => "Hyp3",
                        Hyp::Alt311 => "Alt311",
                    })
                    .collect();
                t["hypotheses"] = json!(names);
            }
            insert_opt(&mut t, "gamma", gamma.to_json());
            if !lambda_abs.is_empty() {
                t["lambda_abs"] = json!(lambda_abs);
            }
            insert_opt(&mut t, "hyp1_n_max", hyp1_n_max);
            (common, t)
        }
        Command::Recurrence {
            common,
            re,
            im,
            n,
            gamma,
        } => {
            let mut t = json!({"type": "recurrence", "lambda": {"re": re, "im": im}, "n": n});
            insert_opt(&mut t, "gamma", gamma.to_json());
            (common, t)
        }
        Command::Orbit {
            common,
            operator,
            basis,
            dim,
            steps,
        } => {
            let op = match operator {
                Op::BackwardShift => "backward_shift",
                Op::ForwardShift => "forward_shift",
                Op::JacobiSum => "jacobi_sum",
            };
            let t = json!({"type": "orbit", "operator": op, "start": {"type": "basis", "k": basis}, "dim": dim, "steps": steps});
            (common, t)
        }
        Command::Periodic {
            common,
            roots,
            n,
            s,
            period,
            n_trunc,
        } => match (s, period) {
            (Some(s), Some(period)) => {
                let nt = n_trunc.unwrap_or(s + 4 * period);
                (
                    common,
                    json!({"type": "periodic_hp", "s": s, "period": period, "n_trunc": nt}),
                )
            }
            (None, None) if !roots.is_empty() => {
                let mut rs = Vec::new();
                for r in &roots {
                    let (a, b) = r
                        .split_once('/')
                        .ok_or_else(|| Error::Config(format!("--root expects n/k, got `{r}`")))?;
                    let a: i64 = a
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad root numerator `{a}`")))?;
                    let b: u64 = b
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad root denominator `{b}`")))?;
                    rs.push(json!({"n": a, "k": b}));
                }
                (common, json!({"type": "periodic_sum", "roots": rs, "n": n}))
            }
            _ => {
                return Err(Error::Config(
                    "periodic needs either --root n/k or both --s and --period".into(),
                ))
            }
        },
        Command::Quadrature {
            common,
            n_max,
            order,
            sample_index,
        } => {
            let mut t = json!({"type": "quadrature"});
            insert_opt(&mut t, "n_max", n_max);
            insert_opt(&mut t, "order", order);
            insert_opt(&mut t, "sample_index", sample_index);
            (common, t)
        }
        Command::Asymptotics { common, probes } => {
            (common, json!({"type": "asymptotics", "probes": probes}))
        }
        Command::Run { .. } | Command::Report { .. } => unreachable!("handled by main"),
    };
    let mut doc = json!({"space": space_json(&common), "task": task});
    insert_opt(&mut doc, "digits", common.digits);
    let sc = Scenario::parse(&doc.to_string(), "<flags>")?;
    Ok((sc, common.out))
}

fn run_one(sc: &Scenario, dir: &Path) -> Result<Verdict> {
    let t = Instant::now();
    let out = execute(sc)?;
    write_outcome(sc, &out, dir, t.elapsed().as_secs_f64())?;
    let verdict = out.verdict();
    println!("{}: {} -> {}", sc.label(), verdict.as_str(), dir.display());
    for c in &out.checks {
        println!("  [{}] {}: {}", c.verdict.as_str(), c.name, c.detail);
    }
    for (name, c) in &out.certificates {
        println!(
            "  [{}] {name} (threshold_n0 {:?})",
            c.verdict.as_str(),
            c.threshold_n0
        );
        if c.verdict != Verdict::Pass {
            for n in &c.notes {
                eprintln!("  {name}: {n}");
            }
        }
    }
    for c in out.checks.iter().filter(|c| c.verdict == Verdict::Fail) {
        eprintln!("{}: failed check `{}` ({})", sc.label(), c.name, c.detail);
    }
    Ok(verdict)
}

fn scenario_dir(sc: &Scenario, file: &Path, out: Option<&PathBuf>) -> PathBuf {
    if let Some(o) = out {
        return o.clone();
    }
    let base = file.parent().unwrap_or(Path::new("."));
    match &sc.output {
        Some(o) if o.is_absolute() => o.clone(),
        Some(o) => base.join(o),
        None => base.join("out").join(sc.label()),
    }
}

fn run_files(files: &[PathBuf], out: Option<PathBuf>) -> Result<Verdict> {
    if files.len() > 1 && out.is_some() {
        return Err(Error::Config("--out applies to a single scenario".into()));
    }
    let scenarios = files
        .iter()
        .map(|f| Scenario::load(f))
        .collect::<Result<Vec<_>>>()?;
    let results: Vec<Result<Verdict>> = std::thread::scope(|s| {
        let handles: Vec<_> = scenarios
            .iter()
            .zip(files)
            .map(|(sc, f)| {
                let dir = scenario_dir(sc, f, out.as_ref());
                s.spawn(move || run_one(sc, &dir))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    if results.len() == 1 {
        return results.into_iter().next().unwrap();
    }
    let mut verdicts = Vec::new();
    for (r, sc) in results.into_iter().zip(&scenarios) {
        verdicts.push(r.unwrap_or_else(|e| {
            eprintln!("{}: error: {e}", sc.label());
            Verdict::Fail
        }));
    }
    Ok(Verdict::worst(verdicts).unwrap_or(Verdict::Pass))
}

fn dispatch(cmd: Command) -> Result<Verdict> {
    match cmd {
        Command::Run { scenarios, out } => run_files(&scenarios, out),
        Command::Report { paths, csv } => {
            let r = Report::load(&paths)?;
            print!("{}", r.table());
            if let Some(p) = csv {
                r.write_csv(&p)?;
            }
            Ok(r.verdict())
        }
        cmd => {
            let (sc, out) = flag_scenario(cmd)?;
            let dir = out.unwrap_or_else(|| PathBuf::from("out").join(sc.label()));
            run_one(&sc, &dir)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
