mod report;
mod spec;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use konic::catalog::{self, CatalogId, HorosymParams, LinearFactor, Polarization, RootLength};
use konic::degeneration::{self, DEFAULT_CREPANT_BOUND};
use konic::kstability::{self, PolarizedLogCone, Verdict};
use konic::rootdata::RootType;

use crate::spec::{ConeSpec, ConeSpecFile};

#[derive(Parser)]
#[command(name = "konic", version, about = "Exact K-stability of spherical cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Exit with status 2 when the verdict is KUnstable.
    #[arg(long, global = true)]
    strict: bool,
    /// Include wall-clock timings in the report (makes output nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// K-stability verdict at the Reeb vector given in the spec.
    Verdict { spec: PathBuf },
    /// Futaki invariant along a valuation.
    Futaki {
        spec: PathBuf,
        /// Comma-separated coordinates, e.g. `-1,0` or `1/2,3`.
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
    },
    /// Solve for the K-semistable Reeb vector.
    Reeb { spec: PathBuf },
    /// Central fiber of a test configuration.
    Degenerate {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["kstable", "horospherical"])]
        nu: Option<String>,
        #[arg(long, conflicts_with = "horospherical")]
        kstable: bool,
        #[arg(long)]
        horospherical: bool,
    },
    /// Search for equivariant crepant resolutions of the G2 cone.
    CrepantCheck {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        m: u32,
        #[arg(long, default_value_t = DEFAULT_CREPANT_BOUND)]
        bound: u64,
    },
    /// Built-in examples.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Show {
        #[command(flatten)]
        args: CatalogArgs,
        /// Print only the cone specification, ready to feed to the other commands.
        #[arg(long)]
        spec_only: bool,
    },
    Run(CatalogArgs),
}

#[derive(Args)]
struct CatalogArgs {
    id: String,
    #[arg(long)]
    m: Option<u32>,
    /// Rank-two root system for boundary_divisor_cone: B2, C2 or G2.
    #[arg(long = "type")]
    kind: Option<String>,
    /// `long` or `short`, for boundary_divisor_cone.
    #[arg(long)]
    root: Option<String>,
    /// Lower end of the segment, for horosym_rank_one.
    #[arg(long, allow_hyphen_values = true)]
    q_minus: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q_plus: Option<String>,
    /// Density factor `c0,c1,mult` meaning `(c0 + c1 u)^mult`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    factor: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("KONIC_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: KONIC_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(1);
            }
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let start = Instant::now();
    let (mut out, verdict) = dispatch(&cli.command)?;
    if cli.timings {
        if let Value::Object(map) = &mut out {
            map.insert("timings".into(), json!({ "total_seconds": start.elapsed().as_secs_f64() }));
        }
    }
    let text = serde_json::to_string_pretty(&out)? + "\n";
    match &cli.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    if cli.strict && verdict == Some(Verdict::KUnstable) {
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn load(path: &PathBuf) -> Result<(ConeSpecFile, ConeSpec)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = ConeSpecFile::parse_str(&text).with_context(|| format!("in {}", path.display()))?;
    let spec = file.to_spec().with_context(|| format!("in {}", path.display()))?;
    Ok((file, spec))
}

fn polarized(spec: &ConeSpec) -> Result<PolarizedLogCone> {
    let reeb = spec.reeb.clone().ok_or_else(|| anyhow!("reeb: the spec has no Reeb vector (use `konic reeb` to solve for one)"))?;
    Ok(PolarizedLogCone::new(spec.data.clone(), spec.angles.clone(), reeb)?)
}

fn dispatch(cmd: &Command) -> Result<(Value, Option<Verdict>)> {
    match cmd {
        Command::Verdict { spec } => {
            let (file, s) = load(spec)?;
            let p = polarized(&s)?;
            let r = kstability::verdict(&p)?;
            let v = r.verdict;
            Ok((report::with_header("verdict", Some(&file), report::verdict(&r)), Some(v)))
        }
        Command::Futaki { spec, nu } => {
            let (file, s) = load(spec)?;
            let p = polarized(&s)?;
            let nu = spec::parse_cli_vector(nu, s.data.lattice_rank)?;
            let value = kstability::futaki(&p, &nu)?;
            let body = json!({ "nu": spec::strings(&nu), "futaki": value.to_string() });
            Ok((report::with_header("futaki", Some(&file), body), None))
        }
        Command::Reeb { spec } => {
            let (file, s) = load(spec)?;
            let sol = kstability::reeb_solve(&s.data, &s.angles, s.family.as_ref())?;
            let v = match &sol.outcome {
                kstability::ReebOutcome::Found { report, .. } => Some(report.verdict),
                kstability::ReebOutcome::NoStableReeb(kstability::Obstruction::NegativeFutaki { .. }) => {
                    Some(Verdict::KUnstable)
                }
                _ => None,
            };
            Ok((report::with_header("reeb", Some(&file), report::solution(&sol)), v))
        }
        Command::Degenerate { spec, nu, kstable, horospherical } => {
            let (file, s) = load(spec)?;
            let body = if *kstable {
                let reeb = s.reeb.clone().ok_or_else(|| anyhow!("reeb: --kstable needs a Reeb vector in the spec"))?;
                let d = degeneration::kstable_degeneration(&s.data, &s.angles, &reeb)?;
                report::kstable_degeneration(&d, &s.angles)
            } else if *horospherical {
                report::step(&degeneration::horospherical_degeneration(&s.data)?, &s.angles)
            } else {
                let nu = nu.as_ref().ok_or_else(|| anyhow!("degenerate needs one of --nu, --kstable, --horospherical"))?;
                let nu = spec::parse_cli_vector(nu, s.data.lattice_rank)?;
                let step = degeneration::central_fiber(&s.data, &nu)?;
                if let Some(c) = &step.rescaled {
                    eprintln!("warning: --nu was not primitive; divided by {c}");
                }
                report::step(&step, &s.angles)
            };
            Ok((report::with_header("degenerate", Some(&file), body), None))
        }
        Command::CrepantCheck { m, bound } => {
            let out = degeneration::crepant_check(*m, *bound);
            Ok((report::with_header("crepant-check", None, report::crepant(&out)), None))
        }
        Command::Catalog { action } => catalog_command(action),
    }
}

fn parse_root_type(s: &str) -> Result<RootType> {
    match s.to_ascii_uppercase().as_str() {
        "G2" => Ok(RootType::G2),
        "B2" => Ok(RootType::B(2)),
        "C2" => Ok(RootType::C(2)),
        "A2" => Ok(RootType::A(2)),
        other => bail!("--type: unsupported rank-two type {other:?}"),
    }
}

fn catalog_id(a: &CatalogArgs) -> Result<CatalogId> {
    let kind = a.kind.as_deref().map(parse_root_type).transpose()?;
    let root = a.root.as_deref().map(str::parse::<RootLength>).transpose()?;
    let horosym = if a.q_minus.is_some() || a.q_plus.is_some() || !a.factor.is_empty() {
        let q_minus = spec::rational(a.q_minus.as_deref().ok_or_else(|| anyhow!("--q-minus is required"))?, "--q-minus")?;
        let q_plus = spec::rational(a.q_plus.as_deref().ok_or_else(|| anyhow!("--q-plus is required"))?, "--q-plus")?;
        let factors = a
            .factor
            .iter()
            .map(|f| {
                let parts: Vec<&str> = f.split(',').map(str::trim).collect();
                let [c0, c1, m] = parts[..] else { bail!("--factor: expected c0,c1,mult, got {f:?}") };
                Ok(LinearFactor {
                    c0: spec::rational(c0, "--factor c0")?,
                    c1: spec::rational(c1, "--factor c1")?,
                    multiplicity: m.parse().map_err(|_| anyhow!("--factor: bad multiplicity {m:?}"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Some(HorosymParams { q_minus, q_plus, factors })
    } else {
        None
    };
    Ok(catalog::parse_id(&a.id, a.m, kind, root, horosym)?)
}

fn catalog_command(action: &CatalogAction) -> Result<(Value, Option<Verdict>)> {
    match action {
        CatalogAction::List => {
            let entries: Vec<Value> = catalog::list().into_iter().map(|(id, d)| json!({ "id": id, "description": d })).collect();
            Ok((report::with_header("catalog list", None, json!({ "entries": entries })), None))
        }
        CatalogAction::Show { args, spec_only } => {
            let e = catalog::build(&catalog_id(args)?)?;
            let (reeb, family) = match &e.polarization {
                Polarization::Reeb(x) => (Some(x), None),
                Polarization::Family(f) => (None, Some(f)),
                Polarization::Solve => (None, None),
            };
            let file = ConeSpecFile::from_data(&e.data, &e.angles, reeb, family);
            if *spec_only {
                return Ok((serde_json::to_value(&file)?, None));
            }
            let body = json!({
                "id": e.id.to_string(),
                "description": e.description,
                "spec": file,
                "expected": report::expectations(&e.expected),
            });
            Ok((report::with_header("catalog show", None, body), None))
        }
        CatalogAction::Run(a) => {
            let e = catalog::build(&catalog_id(a)?)?;
            let r = catalog::run(&e)?;
            let v = r.report.as_ref().map(|x| x.verdict);
            Ok((report::with_header("catalog run", None, report::catalog_run(&e, &r)), v))
        }
    }
}
