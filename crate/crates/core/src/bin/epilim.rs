//! Command-line front end. Results go to stdout as JSON.
//!
//! Exit codes: 0 when the command succeeds and its check passes, 1 when a
//! check fails or a certificate is refuted, 2 on input or configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use epilim::config::{DEFAULT_SEED, ZERO_TOL};
use epilim::epilimit::{builtin_family, epilimit_mode, EpiMode, EpiOptions, FunctionSequence, BUILTIN_FAMILIES};
use epilim::legendre::{biconjugate, conjugate, conjugate_bruteforce, conjugate_fast_1d, DualGrid};
use epilim::measure::{
    biting_extract, conjugate_interchange_check, default_eps_ladder, delta_plus_greedy, uniform_integrability_test,
    young_from_ui, AtomSequence, BitingOptions, Integrand, MeasureSpace, SimpleFunction, UiOptions,
};
use epilim::scenarios::{run_all, run_scenario, Profile, SuiteReport};
use epilim::sequence::Sequence;
use epilim::subdiff::{
    ball_covering_grid, builtin_integrand, frechet_certificate, global_lower_bound_checks, growth_certificate,
    Certificate, FrechetOptions, GrowthCondition, LowerBoundVariant, SubdiffInstance, BUILTIN_INTEGRANDS,
};
use epilim::{Error, Grid, GridFunction};

#[derive(Parser)]
#[command(name = "epilim", version, about = "Conjugates, epi-limits, integral functionals and subdifferential certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Conjugate of a grid function on a dual grid.
    Conj {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        dual_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        dual_max: f64,
        #[arg(long)]
        dual_n: usize,
        /// Use the linear-time 1-D transform.
        #[arg(long)]
        fast: bool,
    },
    /// Convex envelope (biconjugate) of a grid function.
    Envelope {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Epi-limit of a builtin family or of a sequence file.
    Epi {
        /// Builtin name or a JSON file `{"terms": [GridFunction...], "window": w}`.
        #[arg(long)]
        family: String,
        #[arg(long, value_enum, default_value = "lower")]
        mode: ModeArg,
        /// Comma-separated descending radii, multiples of the grid spacing.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        /// Window half-width of builtin families.
        #[arg(long, default_value_t = 3.0)]
        half_width: f64,
        /// Grid spacing of builtin families.
        #[arg(long, default_value_t = 0.01)]
        h: f64,
    },
    /// δ⁺ surrogate of a sequence `{"space", "terms": [[u...]...], "window"}`.
    DeltaPlus {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Uniform integrability of a family `{"space", "family": [SimpleFunction...]}`.
    UiTest {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// de la Vallée Poussin profile of a uniformly integrable family.
    Dlvp {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Biting extraction for a bounded sequence `{"space", "family": [...]}`.
    Biting {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// `(I_f)*(x*) = I_{f*}(x*)` for `{"space", "slices": [GridFunction...], "x_star"}`.
    Interchange {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Subdifferentiability certificate of an integral functional.
    Subdiff {
        /// Builtin integrand name or a JSON file `{"slices": [GridFunction...]}`.
        #[arg(long)]
        f: String,
        /// Base point, a SimpleFunction JSON file.
        #[arg(long)]
        x0: PathBuf,
        /// Candidate subgradient, a SimpleFunction JSON file.
        #[arg(long)]
        xstar: PathBuf,
        /// Measure space JSON; defaults to equal weights summing to one.
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, value_enum)]
        variant: VariantArg,
        /// Points of the per-atom direction grid.
        #[arg(long, default_value_t = 161)]
        grid_n: usize,
        /// Constant `c` of the slope bound (sp).
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        c: f64,
        /// Constant `a` of the slope bound (sp).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        /// Local radius (sinfty).
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
    },
    /// Runs a scenario or all of them.
    Verify {
        /// Scenario name or `all`.
        scenario: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "quick")]
        profile: String,
        /// Also write the report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lower,
    Upper,
    Seq,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Frechet,
    Growth,
    Mr,
    Wh,
    Sp,
    Sinfty,
}

/// Command outcome: the JSON to print and whether its check passed.
struct Outcome {
    value: Value,
    pass: bool,
}

impl Outcome {
    fn ok(value: Value) -> Outcome {
        Outcome { value, pass: true }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

#[derive(Deserialize)]
struct TermsFile<T> {
    terms: Vec<T>,
    window: Option<usize>,
}

/// Tail window used when a sequence file does not set one.
const DEFAULT_WINDOW: usize = 4;

#[derive(Deserialize)]
struct AtomTermsFile {
    space: MeasureSpace,
    terms: Vec<Vec<f64>>,
    window: Option<usize>,
    eps: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct FamilyFile {
    space: MeasureSpace,
    family: Vec<SimpleFunction>,
}

#[derive(Deserialize)]
struct SlicesFile {
    space: Option<MeasureSpace>,
    slices: Vec<GridFunction>,
    x_star: Option<SimpleFunction>,
}

/// Explicit windows must fit the terms; the default is cut to the length.
fn terms_window(len: usize, window: Option<usize>) -> Result<usize, Error> {
    let window = window.unwrap_or(DEFAULT_WINDOW.min(len));
    if len == 0 || window == 0 || window > len {
        return Err(Error::InvalidInput(format!("need 1 ≤ window ≤ number of terms ({len}), got {window}")));
    }
    Ok(window)
}

fn certificate_value(c: &Certificate) -> Outcome {
    Outcome { value: to_value(c), pass: !c.refuted() }
}

fn run(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Conj { input, dual_min, dual_max, dual_n, fast } => {
            let f: GridFunction = read_json(&input)?;
            let dual = match f.grid.dim {
                1 => DualGrid::line(dual_min, dual_max, dual_n)?,
                _ => DualGrid(Grid::unanchored(2, vec![dual_min; 2], vec![dual_max; 2], vec![dual_n; 2])?),
            };
            let r = if fast { conjugate_fast_1d(&f, &dual)? } else if f.grid.dim == 1 { conjugate(&f, &dual)? } else { conjugate_bruteforce(&f, &dual)? };
            Ok(Outcome::ok(to_value(&r)))
        }
        Command::Envelope { input } => {
            let f: GridFunction = read_json(&input)?;
            Ok(Outcome::ok(to_value(&biconjugate(&f)?)))
        }
        Command::Epi { family, mode, radii, half_width, h } => {
            let seq: FunctionSequence = if BUILTIN_FAMILIES.contains(&family.as_str()) {
                builtin_family(&family, half_width, h)?
            } else {
                let file: TermsFile<GridFunction> = read_json(Path::new(&family))?;
                let w = terms_window(file.terms.len(), file.window)?;
                Sequence::from_terms(family.clone(), file.terms, w)
            };
            let grid = seq.get(1).grid.clone();
            let opts = match radii {
                Some(r) => EpiOptions::new(r),
                None => EpiOptions::default_for(&grid),
            };
            let mode = match mode {
                ModeArg::Lower => EpiMode::Lower,
                ModeArg::Upper => EpiMode::Upper,
                ModeArg::Seq => EpiMode::Seq,
            };
            Ok(Outcome::ok(to_value(&epilimit_mode(&seq, &opts, mode)?)))
        }
        Command::DeltaPlus { input } => {
            let file: AtomTermsFile = read_json(&input)?;
            let w = terms_window(file.terms.len(), file.window)?;
            let eps = file.eps.unwrap_or_else(|| default_eps_ladder(&file.space));
            let u: AtomSequence = Sequence::from_terms("u", file.terms, w);
            let rep = delta_plus_greedy(&u, &file.space, &eps)?;
            let pass = rep.value <= epilim::ExtReal::Finite(ZERO_TOL);
            Ok(Outcome { value: json!({"pass": pass, "value": rep.value, "witness": rep.witness, "report": rep}), pass })
        }
        Command::UiTest { input } => {
            let file: FamilyFile = read_json(&input)?;
            let rep = uniform_integrability_test(&file.family, &file.space, &UiOptions::for_space(&file.space))?;
            let value = rep.modulus.last().map(|m| m.1).unwrap_or(0.0);
            Ok(Outcome { value: json!({"pass": rep.ui, "value": value, "witness": rep.witness, "report": rep}), pass: rep.ui })
        }
        Command::Dlvp { input } => {
            let file: FamilyFile = read_json(&input)?;
            match young_from_ui(&file.family, &file.space) {
                Ok(cert) => Ok(Outcome::ok(json!({"pass": true, "value": cert.sup_integral, "profile": cert.profile}))),
                Err(Error::Refused(msg)) => Ok(Outcome { value: json!({"pass": false, "value": null, "witness": msg}), pass: false }),
                Err(e) => Err(e),
            }
        }
        Command::Biting { input } => {
            let file: FamilyFile = read_json(&input)?;
            let rep = biting_extract(&file.family, &file.space, &BitingOptions::default())?;
            Ok(Outcome::ok(to_value(&rep)))
        }
        Command::Interchange { input } => {
            let file: SlicesFile = read_json(&input)?;
            let space = file.space.ok_or_else(|| Error::InvalidInput("interchange needs a space".into()))?;
            let x_star = file.x_star.ok_or_else(|| Error::InvalidInput("interchange needs x_star".into()))?;
            if file.slices.len() != space.len() {
                return Err(Error::InvalidInput(format!("{} slices for {} atoms", file.slices.len(), space.len())));
            }
            let f = Integrand::tabulated("tabulated", file.slices)?;
            let rep = conjugate_interchange_check(&f, &x_star, &space)?;
            Ok(Outcome { value: json!({"pass": rep.pass, "value": rep.gap, "report": rep}), pass: rep.pass })
        }
        Command::Subdiff { f, x0, xstar, space, p, variant, grid_n, c, a, eta } => {
            let x0: SimpleFunction = read_json(&x0)?;
            let xs: SimpleFunction = read_json(&xstar)?;
            let space = match space {
                Some(path) => read_json(&path)?,
                None => MeasureSpace::finite(vec![1.0 / x0.len() as f64; x0.len()])?,
            };
            let integrand = if BUILTIN_INTEGRANDS.contains(&f.as_str()) {
                builtin_integrand(&f)?
            } else {
                let file: SlicesFile = read_json(Path::new(&f))?;
                if file.slices.len() != space.len() {
                    return Err(Error::InvalidInput(format!("{} slices for {} atoms", file.slices.len(), space.len())));
                }
                Integrand::tabulated(f.clone(), file.slices)?
            };
            let p: f64 = match p.as_str() {
                "inf" | "infinity" => f64::INFINITY,
                s => s.parse().map_err(|_| Error::InvalidInput(format!("p must be a number ≥ 1 or 'inf', got '{s}'")))?,
            };
            if !(p >= 1.0) {
                return Err(Error::InvalidInput("p must be ≥ 1".into()));
            }
            let grid = ball_covering_grid(&space, p, 1.0, grid_n)?;
            let inst = SubdiffInstance::new(integrand, x0, xs, space, grid)?;
            let cert = match variant {
                VariantArg::Frechet => frechet_certificate(&inst, &FrechetOptions::new(p))?,
                VariantArg::Growth => {
                    let cond = if p.is_finite() { GrowthCondition::lp(p) } else { GrowthCondition::linf(1.0) };
                    growth_certificate(&inst, &cond)?
                }
                VariantArg::Mr => global_lower_bound_checks(&inst, LowerBoundVariant::MoreauRockafellar)?,
                VariantArg::Wh => global_lower_bound_checks(&inst, LowerBoundVariant::WeakHadamard)?,
                VariantArg::Sp => global_lower_bound_checks(&inst, LowerBoundVariant::Sp { p, c, a })?,
                VariantArg::Sinfty => global_lower_bound_checks(&inst, LowerBoundVariant::SInfty { eta })?,
            };
            Ok(certificate_value(&cert))
        }
        Command::Verify { scenario, seed, profile, json } => {
            let profile: Profile = profile.parse()?;
            let suite = if scenario == "all" {
                run_all(seed, profile)?
            } else {
                SuiteReport::new(seed, profile, vec![run_scenario(&scenario, seed, profile)?])
            };
            for r in &suite.scenarios {
                eprintln!("{:<16} {} ({:.2?})", r.scenario, if r.pass { "pass" } else { "FAIL" }, r.wall_time);
            }
            let text = suite.to_json();
            if let Some(path) = json {
                fs::write(&path, &text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            }
            Ok(Outcome { value: serde_json::from_str(&text)?, pass: suite.pass })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.value).expect("json values print"));
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("epilim: {e}");
            ExitCode::from(2)
        }
    }
}
