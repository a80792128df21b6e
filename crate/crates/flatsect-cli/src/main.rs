//! Command-line front end: evaluate the closed-form constants and distance
//! laws, draw samples, and run the Monte Carlo validation suite.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or domain error.

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flatsect::densities::{FlatFamily, RadialDensity};
use flatsect::specfun;
use flatsect::subspaces::LinearSubspace;
use flatsect::suite::{run_suite, to_json_lines, SuiteConfig, SCHEMA_VERSION};
use flatsect::validation::Family;
use flatsect::CaseTriple;

#[derive(Parser)]
#[command(
    name = "flatsect",
    about = "Distance laws for intersections of random linear and affine subspaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every closed-form constant for one dimension triple.
    Constants(ConstantsArgs),
    /// Tabulate the density and CDF of d(o, E∩L) on a grid (plot data).
    Density(DensityArgs),
    /// Draw intersection distances and emit them.
    Sample(SampleArgs),
    /// Run the validation suite and emit a JSON-lines report.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    /// E conditioned to hit the centered ball of radius h, L uniform.
    Ball,
    /// E tangent to the unit sphere, L uniform.
    Tangent,
    /// E conditioned to hit the unit ball, L fixed to the coordinate q-plane.
    Fixed,
}

#[derive(Args)]
struct TripleArgs {
    /// Ambient dimension n >= 2.
    #[arg(long)]
    n: usize,
    /// Linear subspace dimension, 1 <= q <= n-1.
    #[arg(long)]
    q: usize,
    /// Intersection dimension, 0 <= gamma <= q-1.
    #[arg(long)]
    gamma: usize,
}

impl TripleArgs {
    fn case(&self) -> flatsect::Result<CaseTriple> {
        CaseTriple::new(self.n, self.q, self.gamma)
    }
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    triple: TripleArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    /// Write to this path instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    triple: TripleArgs,
    #[arg(long, value_enum, default_value = "ball")]
    family: FamilyArg,
    /// Ball radius for the ball-restricted family.
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Comma-separated evaluation points, e.g. 0.5,1,2.
    #[arg(long, value_parser = parse_grid)]
    grid: Grid,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    triple: TripleArgs,
    #[arg(long, value_enum, default_value = "ball")]
    family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Substream chunks (part of the reproducible run layout).
    #[arg(long, default_value_t = 8)]
    chunks: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Base sample count for the heaviest Monte Carlo checks.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 8)]
    chunks: usize,
    /// Goodness-of-fit test level.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// Self-test switch: perturb every target; the run must then fail.
    #[arg(long, hide = true)]
    tamper_targets: bool,
}

#[derive(Clone)]
struct Grid(Vec<f64>);

fn parse_grid(raw: &str) -> Result<Grid, String> {
    let mut points = Vec::new();
    for part in raw.split(',') {
        let trimmed = part.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: f64 = trimmed
            .parse()
            .map_err(|e| format!("bad grid entry {trimmed:?}: {e}"))?;
        if !value.is_finite() || value < 0.0 {
            return Err(format!("grid entries must be finite and nonnegative, got {value}"));
        }
        points.push(value);
    }
    if points.is_empty() {
        return Err("grid must contain at least one point".into());
    }
    Ok(Grid(points))
}

/// 17 significant digits: round-trips f64 exactly.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_output(out: &Option<std::path::PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())
        }
    }
}

fn cmd_constants(args: &ConstantsArgs) -> flatsect::Result<String> {
    let c = args.triple.case()?;
    let n = c.n() as u32;
    let rows: Vec<(&str, f64)> = vec![
        ("omega_n", specfun::omega(n)?),
        ("kappa_n", specfun::kappa(n)?),
        ("d_constant", specfun::d_constant(&c)),
        ("d_tilde_constant", specfun::d_tilde_constant(&c)),
        ("hit_probability", specfun::hit_probability(&c)),
        (
            "hit_probability_gamma_form",
            specfun::hit_probability_gamma_form(&c),
        ),
        (
            "hit_probability_asymptotic",
            specfun::hit_probability_asymptotic(&c),
        ),
        ("ball_moment_window_low", specfun::ball_moment_window(&c).0),
        ("ball_moment_window_high", specfun::ball_moment_window(&c).1),
        ("tangent_moment_bound", specfun::tangent_moment_bound(&c)),
    ];
    Ok(match args.format {
        OutputFormat::Csv => {
            let mut s = String::from("quantity,value\n");
            for (name, value) in rows {
                s.push_str(&format!("{name},{}\n", fmt17(value)));
            }
            s
        }
        OutputFormat::Json => {
            let mut map = serde_json::Map::new();
            map.insert("schema_version".into(), SCHEMA_VERSION.into());
            map.insert("n".into(), c.n().into());
            map.insert("q".into(), c.q().into());
            map.insert("gamma".into(), c.gamma().into());
            for (name, value) in rows {
                map.insert(name.into(), value.into());
            }
            let mut s = serde_json::to_string(&serde_json::Value::Object(map))
                .expect("constants serialize");
            s.push('\n');
            s
        }
    })
}

fn cmd_density(args: &DensityArgs) -> flatsect::Result<String> {
    let c = args.triple.case()?;
    let family = match args.family {
        FamilyArg::Ball | FamilyArg::Fixed => FlatFamily::BallRestricted { h: args.h },
        FamilyArg::Tangent => FlatFamily::Tangent,
    };
    let law = RadialDensity::new(c, family)?;
    let mut rows = Vec::with_capacity(args.grid.0.len());
    for &x in &args.grid.0 {
        rows.push((x, law.pdf(x)?, law.cdf(x)?));
    }
    Ok(match args.format {
        OutputFormat::Csv => {
            let mut s = String::from("x,pdf,cdf\n");
            for (x, pdf, cdf) in rows {
                s.push_str(&format!("{},{},{}\n", fmt17(x), fmt17(pdf), fmt17(cdf)));
            }
            s
        }
        OutputFormat::Json => {
            let mut s = String::new();
            for (x, pdf, cdf) in rows {
                let record = serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "x": x,
                    "pdf": pdf,
                    "cdf": cdf,
                });
                s.push_str(&serde_json::to_string(&record).expect("row serializes"));
                s.push('\n');
            }
            s
        }
    })
}

fn cmd_sample(args: &SampleArgs) -> flatsect::Result<String> {
    let c = args.triple.case()?;
    let family = match args.family {
        FamilyArg::Ball => Family::BallRestricted { h: args.h },
        FamilyArg::Tangent => Family::Tangent,
        FamilyArg::Fixed => {
            Family::FixedSubspace(LinearSubspace::coordinate(c.n(), c.q())?)
        }
    };
    let sample = flatsect::suite::sample_distances_chunked(
        args.seed,
        0,
        args.chunks,
        0,
        &c,
        &family,
        args.samples,
    )?;
    Ok(match args.format {
        OutputFormat::Csv => {
            let mut s = String::from("distance\n");
            for d in &sample.distances {
                s.push_str(&fmt17(*d));
                s.push('\n');
            }
            s
        }
        OutputFormat::Json => {
            let record = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "seed": sample.seed,
                "rejected": sample.rejected,
                "distances": sample.distances,
            });
            let mut s = serde_json::to_string(&record).expect("sample serializes");
            s.push('\n');
            s
        }
    })
}

fn cmd_validate(args: &ValidateArgs) -> flatsect::Result<(String, bool)> {
    if args.alpha.is_nan() || args.alpha <= 0.0 || args.alpha >= 1.0 {
        return Err(flatsect::Error::Domain(format!(
            "alpha must lie in (0,1), got {}",
            args.alpha
        )));
    }
    let cfg = SuiteConfig {
        seed: args.seed,
        alpha: args.alpha,
        base_samples: args.samples,
        chunks: args.chunks,
        threads: 0,
        tamper: args.tamper_targets,
    };
    let records = run_suite(&cfg)?;
    let all_pass = records.iter().all(|r| r.pass);
    Ok((to_json_lines(&records), all_pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: flatsect::Result<(String, Option<&std::path::PathBuf>, bool)> =
        match &cli.command {
            Command::Constants(args) => {
                cmd_constants(args).map(|s| (s, args.out.as_ref(), true))
            }
            Command::Density(args) => cmd_density(args).map(|s| (s, args.out.as_ref(), true)),
            Command::Sample(args) => cmd_sample(args).map(|s| (s, args.out.as_ref(), true)),
            Command::Validate(args) => {
                cmd_validate(args).map(|(s, pass)| (s, args.out.as_ref(), pass))
            }
        };
    match result {
        Ok((content, out, pass)) => {
            if let Err(e) = write_output(&out.cloned(), &content) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("validation failed: at least one check did not pass");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
