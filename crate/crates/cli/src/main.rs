//! `archimedean`: batch front end for the copula toolkit.
//!
//! Every subcommand writes to `--out` (stdout when absent) and, for file
//! outputs, a `<out>.config.json` sidecar echoing the run configuration.
//! Errors go to stderr as one JSON line; exit 1 for bad input, 2 for I/O.

mod output;

use std::fs::File;
use std::io::{self, BufReader};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use archimedean::copula::{CopulaDensity, KendallFunction};
use archimedean::diagnostics::{diagnose, empirical_kendall, fit_generator};
use archimedean::monotonicity::{check_d_monotone_with, DEFAULT_POINTS};
use archimedean::sampling::{sample_copula_seeded, sample_frailty_clayton_seeded};
use archimedean::{
    copula_cdf, kendall_tau, level_set_mass, make_family, radial_from_generator, FamilyId, FamilyParams,
    Generator, GeneratorConfig, SampleMatrix,
};
use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{write_sidecar, Format, Sink, Table};

#[derive(Parser)]
#[command(
    name = "archimedean",
    version,
    about = "Archimedean copulas: sampling, evaluation and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// `location:mass` pairs separated by commas, e.g. `1:0.6667,2:0.3333`.
#[derive(Debug, Clone, PartialEq)]
struct AtomList(Vec<[f64; 2]>);

impl FromStr for AtomList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|pair| {
                let (loc, mass) = pair
                    .split_once(':')
                    .ok_or_else(|| format!("atom `{pair}` is not location:mass"))?;
                let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("atom `{pair}`: {e}"));
                Ok([parse(loc)?, parse(mass)?])
            })
            .collect::<Result<Vec<_>, _>>()
            .map(AtomList)
    }
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// clayton, independence, lower_bound, reciprocal_uniform, power_kink,
    /// discrete_radial or piecewise_quadratic.
    #[arg(long)]
    family: String,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Radial atoms for discrete_radial.
    #[arg(long)]
    atoms: Option<AtomList>,
    /// Geometric radial law for discrete_radial.
    #[arg(long)]
    p: Option<f64>,
    /// Rescale ψ(x/scale); the copula does not change.
    #[arg(long)]
    scale: Option<f64>,
}

impl ModelArgs {
    fn family_id(&self) -> Result<FamilyId, Failure> {
        FamilyId::parse(&self.family)
            .filter(|f| *f != FamilyId::Custom)
            .ok_or_else(|| Failure::usage("invalid_parameter", format!("unknown family `{}`", self.family)))
    }

    fn params(&self) -> FamilyParams {
        FamilyParams {
            theta: self.theta,
            a: self.a,
            b: self.b,
            atoms: self.atoms.as_ref().map(|a| a.0.clone()),
            p: self.p,
            scale: self.scale,
        }
    }

    fn build(&self, d: usize) -> Result<Generator, Failure> {
        Ok(make_family(self.family_id()?, &self.params(), d)?)
    }
}

#[derive(Args, Debug, Clone)]
struct OutArgs {
    /// Output file; stdout when absent or `-`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    /// R·S with R from the radial law and S uniform on the simplex.
    Williamson,
    /// Gamma frailty; Clayton with θ > 0 only.
    Frailty,
}

#[derive(Subcommand)]
enum Command {
    /// Draw n rows from the d-dimensional copula (CSV, header u1..ud).
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; the output does not depend on this.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, value_enum, default_value_t = Method::Williamson)]
        method: Method,
        /// Output file; stdout when absent or `-`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Radial distribution F_R and, when available, its density on a grid.
    Radial {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Number of grid intervals on [0, x_max].
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Right end of the grid; defaults to the support end or the 0.9999 quantile.
        #[arg(long, allow_negative_numbers = true)]
        x_max: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Copula CDF at one point; d is the number of coordinates.
    Cdf {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        u: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Copula density at one interior point.
    Density {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        u: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Kendall distribution function K(x) = P(C(U) <= x) on a grid.
    Kendall {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Kendall's tau of the bivariate copula.
    Tau {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// d-monotonicity report (JSON).
    Check {
        #[command(flatten)]
        model: ModelArgs,
        /// Dimension to test.
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Dimension the family is built for (lower_bound, reciprocal_uniform,
        /// discrete_radial). Defaults to d for those and 2 otherwise.
        #[arg(long)]
        family_d: Option<usize>,
        /// Log-spaced grid points.
        #[arg(long, default_value_t = DEFAULT_POINTS)]
        grid: usize,
        /// Output file; stdout when absent or `-`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mass of the level sets {C = s}.
    Levelset {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        s: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Radial, uniformity and independence tests on a sample CSV (JSON).
    Diagnose {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        input: PathBuf,
        /// Also write the empirical Kendall function as CSV (x,K).
        #[arg(long)]
        kendall_out: Option<PathBuf>,
        /// Output file; stdout when absent or `-`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimum-distance fit of a one-parameter family to a sample CSV (JSON).
    Fit {
        #[arg(long)]
        family: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        hi: f64,
        /// Output file; stdout when absent or `-`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Echo of a run, written next to every output file.
#[derive(Debug, Default, Serialize)]
struct RunConfig {
    subcommand: &'static str,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    generator: Option<GeneratorConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<Format>,
}

impl RunConfig {
    fn new(subcommand: &'static str) -> Self {
        Self {
            subcommand,
            version: env!("CARGO_PKG_VERSION"),
            ..Self::default()
        }
    }
}

#[derive(Debug)]
enum Failure {
    Model(archimedean::Error),
    Usage { kind: &'static str, message: String },
    Io { path: Option<PathBuf>, source: io::Error },
}

impl Failure {
    fn usage(kind: &'static str, message: impl Into<String>) -> Self {
        Failure::Usage {
            kind,
            message: message.into(),
        }
    }

    fn io(path: Option<&Path>) -> impl FnOnce(io::Error) -> Failure + '_ {
        move |source| Failure::Io {
            path: path.map(Path::to_path_buf),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Io { .. } => 2,
            _ => 1,
        }
    }

    fn to_json(&self) -> serde_json::Value {
        let (kind, message) = match self {
            Failure::Model(e) => (e.kind(), e.to_string()),
            Failure::Usage { kind, message } => (*kind, message.clone()),
            Failure::Io { path: Some(p), source } => ("io", format!("{}: {source}", p.display())),
            Failure::Io { path: None, source } => ("io", source.to_string()),
        };
        serde_json::json!({ "error": kind, "message": message })
    }
}

impl From<archimedean::Error> for Failure {
    fn from(e: archimedean::Error) -> Self {
        Failure::Model(e)
    }
}

/// Writes the main output and, for files, its sidecar.
fn emit(
    out: Option<&Path>,
    config: &RunConfig,
    write: impl FnOnce(&Sink) -> io::Result<()>,
) -> Result<(), Failure> {
    let sink = Sink::new(out);
    write(&sink).map_err(Failure::io(sink.path()))?;
    if let Some(path) = sink.path() {
        write_sidecar(path, config).map_err(Failure::io(Some(path)))?;
    }
    Ok(())
}

fn read_sample(path: &Path) -> Result<SampleMatrix, Failure> {
    let file = File::open(path).map_err(Failure::io(Some(path)))?;
    Ok(SampleMatrix::read_csv(BufReader::new(file))?)
}

/// Default right end for radial grids: the support end when finite,
/// otherwise the 0.9999 quantile.
fn radial_x_max(radial: &archimedean::RadialDistribution) -> Result<f64, Failure> {
    let upper = radial.upper();
    if upper.is_finite() {
        return Ok(upper);
    }
    Ok(radial.quantile(0.9999)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sample {
            model,
            d,
            n,
            seed,
            threads,
            method,
            out,
        } => {
            let g = model.build(d)?;
            let sample = match method {
                Method::Williamson => sample_copula_seeded(&g, d, n, seed, threads)?,
                Method::Frailty => {
                    if model.family_id()? != FamilyId::Clayton {
                        return Err(Failure::usage(
                            "invalid_parameter",
                            "the frailty method needs --family clayton",
                        ));
                    }
                    let theta = g.theta().unwrap_or(f64::NAN);
                    sample_frailty_clayton_seeded(theta, d, n, seed, threads)?
                }
            };
            let config = RunConfig {
                generator: g.config(),
                d: Some(d),
                n: Some(n),
                seed: Some(seed),
                threads: Some(threads),
                method: Some(method),
                format: Some(Format::Csv),
                ..RunConfig::new("sample")
            };
            emit(out.as_deref(), &config, |sink| sink.write_with(|w| sample.write_csv(w)))
        }

        Command::Radial {
            model,
            d,
            grid,
            x_max,
            out,
        } => {
            if grid == 0 {
                return Err(Failure::usage("invalid_input", "--grid must be positive"));
            }
            let g = model.build(d)?;
            let radial = radial_from_generator(&g, d)?;
            let x_max = match x_max {
                Some(x) if x > 0.0 && x.is_finite() => x,
                Some(x) => return Err(Failure::usage("invalid_input", format!("--x-max {x} must be positive"))),
                None => radial_x_max(&radial)?,
            };
            let mut table = Table::new(["x", "cdf", "density"]);
            for i in 0..=grid {
                let x = x_max * i as f64 / grid as f64;
                table.push(vec![Some(x), Some(radial.cdf(x)), radial.density(x)]);
            }
            let config = RunConfig {
                generator: g.config(),
                d: Some(d),
                grid: Some(grid),
                x_max: Some(x_max),
                format: Some(out.format),
                ..RunConfig::new("radial")
            };
            emit(out.out.as_deref(), &config, |sink| sink.write_table(&table, out.format))
        }

        Command::Cdf { model, u, out } => {
            let d = u.len();
            let g = model.build(d)?;
            if u.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Failure::usage("invalid_input", "coordinates of --u must lie in [0, 1]"));
            }
            let mut table = Table::new(["value"]);
            table.push(vec![Some(copula_cdf(&g, &u))]);
            let config = RunConfig {
                generator: g.config(),
                d: Some(d),
                points: Some(u),
                format: Some(out.format),
                ..RunConfig::new("cdf")
            };
            emit(out.out.as_deref(), &config, |sink| sink.write_table(&table, out.format))
        }

        Command::Density { model, u, out } => {
            let d = u.len();
            let g = model.build(d)?;
            let value = CopulaDensity::new(&g, d)?.eval(&u)?;
            let mut table = Table::new(["value", "numeric"]);
            table.push(vec![Some(value.value), Some(if value.numeric { 1.0 } else { 0.0 })]);
            let config = RunConfig {
                generator: g.config(),
                d: Some(d),
                points: Some(u),
                format: Some(out.format),
                ..RunConfig::new("density")
            };
            emit(out.out.as_deref(), &config, |sink| sink.write_table(&table, out.format))
        }

        Command::Kendall { model, d, grid, out } => {
            if grid == 0 {
                return Err(Failure::usage("invalid_input", "--grid must be positive"));
            }
            let g = model.build(d)?;
            let k = KendallFunction::new(&g, d)?;
            let mut table = Table::new(["x", "K"]);
            for i in 0..=grid {
                let x = i as f64 / grid as f64;
                table.push(vec![Some(x), Some(k.eval(x))]);
            }
            let config = RunConfig {
                generator: g.config(),
                d: Some(d),
                grid: Some(grid),
                format: Some(out.format),
                ..RunConfig::new("kendall")
            };
            emit(out.out.as_deref(), &config, |sink| sink.write_table(&table, out.format))
        }

        Command::Tau { model, out } => {
            let g = model.build(2)?;
            let mut table = Table::new(["tau"]);
            table.push(vec![Some(kendall_tau(&g)?)]);
            let config = RunConfig {
                generator: g.config(),
                d: Some(2),
                format: Some(out.format),
                ..RunConfig::new("tau")
            };
            emit(out.out.as_deref(), &config, |sink| sink.write_table(&table, out.format))
        }

        Command::Check {
            model,
            d,
            family_d,
            grid,
            out,
        } => {
            if d < 2 {
                return Err(Failure::usage("invalid_input", "--d must be at least 2"));
            }
            if grid < 2 {
                return Err(Failure::usage("invalid_input", "--grid must be at least 2"));
            }
            let family = model.family_id()?;
            let family_d = family_d.unwrap_or(match family {
                FamilyId::LowerBound | FamilyId::ReciprocalUniform | FamilyId::DiscreteRadial => d,
                _ => 2,
            });
            let g = model.build(family_d)?;
            let report = check_d_monotone_with(&g, d, grid);
            let config = RunConfig {
                generator: g.config(),
                d: Some(d),
                grid: Some(grid),
                format: Some(Format::Json),
                ..RunConfig::new("check")
            };
            emit(out.as_deref(), &config, |sink| sink.write_report(&report))
        }

        Command::Levelset { model, d, s, out } => {
            let g = model.build(d)?;
            let mut table = Table::new(["s", "mass"]);
            for &level in &s {
                table.push(vec![Some(level), Some(level_set_mass(&g, d, level)?)]);
            }
            let config = RunConfig {
                generator: g.config(),
                d: Some(d),
                points: Some(s),
                format: Some(out.format),
                ..RunConfig::new("levelset")
            };
            emit(out.out.as_deref(), &config, |sink| sink.write_table(&table, out.format))
        }

        Command::Diagnose {
            model,
            input,
            kendall_out,
            out,
        } => {
            let sample = read_sample(&input)?;
            let g = model.build(sample.d())?;
            let report = diagnose(&g, &sample, None)?;
            let config = RunConfig {
                generator: g.config(),
                d: Some(sample.d()),
                n: Some(sample.n()),
                input: Some(input.clone()),
                format: Some(Format::Json),
                ..RunConfig::new("diagnose")
            };
            if let Some(path) = kendall_out.as_deref() {
                let khat = empirical_kendall(&sample)?;
                let kconfig = RunConfig {
                    generator: config.generator.clone(),
                    d: config.d,
                    n: config.n,
                    input: config.input.clone(),
                    format: Some(Format::Csv),
                    ..RunConfig::new("diagnose")
                };
                emit(Some(path), &kconfig, |sink| sink.write_with(|w| khat.write_csv(w)))?;
            }
            emit(out.as_deref(), &config, |sink| sink.write_report(&report))
        }

        Command::Fit {
            family,
            input,
            lo,
            hi,
            out,
        } => {
            let id = FamilyId::parse(&family)
                .ok_or_else(|| Failure::usage("invalid_parameter", format!("unknown family `{family}`")))?;
            let sample = read_sample(&input)?;
            let fit = fit_generator(id, &sample, (lo, hi))?;
            let config = RunConfig {
                d: Some(sample.d()),
                n: Some(sample.n()),
                bounds: Some([lo, hi]),
                input: Some(input.clone()),
                format: Some(Format::Json),
                ..RunConfig::new("fit")
            };
            emit(out.as_deref(), &config, |sink| sink.write_report(&fit))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => e.exit(),
            _ => {
                let message = e.to_string();
                let first = message.lines().next().unwrap_or("").trim_start_matches("error: ");
                eprintln!("{}", serde_json::json!({ "error": "usage", "message": first }));
                return ExitCode::from(1);
            }
        },
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
