//! The `mixv` command-line tool.
//!
//! Every command prints exactly one JSON document on standard output: a run
//! report, a generated model, or an error report. Exit codes: 0 equal or
//! success, 1 not equal, 2 input error, 3 numeric or guard failure.

mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::equivalence::{
    brute_force_equivalence, check_equivalence_traced, verify_witness, EquivalenceError, Verdict,
};
use crate::generators::{self, GenError, Seed};
use crate::ising::{
    self, BruteTvOracle, ExactMarginalOracle, GadgetParams, IsingError, Spin, TvMarginalOracle,
};
use crate::models::{format_rational, parse_rational, Alphabet, IsingModel, Mixture, ModelError};

pub use report::{Failure, RunReport, EXIT_EQUAL, EXIT_INPUT, EXIT_NOT_EQUAL, EXIT_NUMERIC};

/// Tolerance on the gap between brute-force TV and the gadget identity.
pub const GADGET_RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "mixv", version, about = "Equivalence checking for mixtures of products and Ising reductions")]
pub struct Cli {
    /// Report `timing_ms` as null so output is byte-stable.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether two mixture files describe the same distribution.
    EqCheck(EqCheckArgs),
    /// Ising-model quantities and reductions.
    #[command(subcommand)]
    Ising(IsingCommand),
    /// Generate models.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Args)]
pub struct EqCheckArgs {
    pub p: PathBuf,
    pub q: PathBuf,
    /// Also decide by enumeration and require both answers to agree.
    #[arg(long)]
    pub brute: bool,
    /// Include the two differing prefix probabilities with the witness.
    #[arg(long)]
    pub emit_witness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Via {
    Brute,
    Marginals,
    Tv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReduceTarget {
    Partition,
    Marginal,
}

#[derive(Debug, Args)]
pub struct Accuracy {
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.05)]
    pub conf: f64,
}

#[derive(Debug, Args)]
pub struct Target {
    /// Spin index (zero-based).
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Spin value, +1 or -1.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub s: i64,
}

#[derive(Debug, Subcommand)]
pub enum IsingCommand {
    /// log Z.
    Partition {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Via::Brute)]
        via: Via,
        #[command(flatten)]
        accuracy: Accuracy,
    },
    /// Pr[x_k = s].
    Marginal {
        model: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Via::Brute)]
        via: Via,
        #[command(flatten)]
        accuracy: Accuracy,
    },
    /// Total variation distance between two models.
    Tv { a: PathBuf, b: PathBuf },
    /// Build the dummy-spin gadget and check its identities by enumeration.
    Gadget {
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, allow_negative_numbers = true)]
        h0: f64,
        #[arg(long)]
        delta: f64,
    },
    /// Run a full reduction chain and compare it with enumeration.
    Reduce {
        #[arg(value_enum)]
        what: ReduceTarget,
        model: PathBuf,
        #[command(flatten)]
        target: Target,
        #[command(flatten)]
        accuracy: Accuracy,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Random mixture of products.
    Mixture {
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(short = 'k', long)]
        k: usize,
        /// Comma-separated symbols.
        #[arg(long, value_delimiter = ',', default_value = "0,1")]
        alphabet: Vec<String>,
        #[arg(long, default_value_t = 10)]
        denominator_bound: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// A different description of the same distribution.
    Rewrite {
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Shift one entry; the ground-truth verdict goes to standard error.
    Perturb {
        model: PathBuf,
        #[arg(long, default_value = "1/10")]
        magnitude: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Random Ising model.
    Ising {
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        weight_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        weight_max: f64,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        field_min: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        field_max: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Output of one command before it is wrapped in a report.
enum Outcome {
    Report { result: Value, tolerances: Value, exit: i32 },
    Document(String),
}

/// Runs the tool on `std::env::args` and returns the exit code.
pub fn main() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    let (code, stdout) = run(&argv);
    print!("{stdout}");
    code
}

/// Runs the tool on `argv` (program name first) and returns the exit code
/// and everything that would go to standard output.
pub fn run(argv: &[String]) -> (i32, String) {
    let echo: Vec<String> = argv.iter().skip(1).cloned().collect();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return (EXIT_EQUAL, e.to_string());
            }
            eprint!("{e}");
            let fail = Failure::input("usage", e.kind().to_string());
            return (EXIT_INPUT, RunReport::failure(echo, String::new(), &fail).to_json());
        }
    };
    let start = Instant::now();
    let mut digest = InputDigest::default();
    let outcome = dispatch(&cli.command, &mut digest);
    let timing = (!cli.no_timing).then(|| start.elapsed().as_secs_f64() * 1e3);
    match outcome {
        Ok(Outcome::Document(doc)) => (EXIT_EQUAL, doc),
        Ok(Outcome::Report { result, tolerances, exit }) => {
            let r = RunReport::success(echo, digest.finish(), result, tolerances, timing).with_exit_code(exit);
            (exit, r.to_json())
        }
        Err(fail) => (fail.exit_code, RunReport::failure(echo, digest.finish(), &fail).to_json()),
    }
}

/// SHA-256 over every input file, each preceded by its byte length.
#[derive(Default)]
struct InputDigest(Sha256);

impl InputDigest {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = std::fs::read(path)
            .map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))?;
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(&bytes);
        String::from_utf8(bytes).map_err(|_| Failure::input("io", format!("{}: not UTF-8", path.display())))
    }

    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

fn load_mixture(d: &mut InputDigest, path: &Path) -> Result<Mixture, Failure> {
    let m = Mixture::from_json(&d.read(path)?).map_err(|e| Failure::model(path, e))?;
    m.check().map_err(|e| Failure::model(path, e))?;
    Ok(m)
}

fn load_ising(d: &mut InputDigest, path: &Path) -> Result<IsingModel, Failure> {
    IsingModel::from_json(&d.read(path)?).map_err(|e| Failure::model(path, e))
}

fn dispatch(cmd: &Command, d: &mut InputDigest) -> Result<Outcome, Failure> {
    match cmd {
        Command::EqCheck(a) => eq_check(a, d),
        Command::Ising(c) => ising_cmd(c, d),
        Command::Gen(c) => gen_cmd(c, d),
    }
}

fn verdict_name(v: &Verdict) -> &'static str {
    if v.is_equal() {
        "Equal"
    } else {
        "NotEqual"
    }
}

fn eq_check(a: &EqCheckArgs, d: &mut InputDigest) -> Result<Outcome, Failure> {
    let p = load_mixture(d, &a.p)?;
    let q = load_mixture(d, &a.q)?;
    let run = check_equivalence_traced(&p, &q).map_err(Failure::from)?;
    let mut result = json!({
        "verdict": verdict_name(&run.verdict),
        "basis_sizes": run.basis_sizes,
    });
    if let Verdict::NotEqual(w) = &run.verdict {
        if !verify_witness(&p, &q, &w.prefix).map_err(Failure::from)? {
            return Err(Failure::numeric("unverified_witness", "checker produced a witness that does not verify"));
        }
        let mut wj = json!({
            "length": w.len(),
            "prefix": p.alphabet().decode(&w.prefix),
            "verified": true,
        });
        if a.emit_witness {
            wj["p"] = json!(format_rational(&p.prefix_prob(&w.prefix).map_err(Failure::from)?));
            wj["q"] = json!(format_rational(&q.prefix_prob(&w.prefix).map_err(Failure::from)?));
        }
        result["witness"] = wj;
    }
    if a.brute {
        let brute = brute_force_equivalence(&p, &q).map_err(Failure::from)?;
        if brute.is_equal() != run.verdict.is_equal() {
            return Err(Failure::numeric(
                "oracle_disagreement",
                format!("checker says {}, enumeration says {}", verdict_name(&run.verdict), verdict_name(&brute)),
            ));
        }
        let mut bj = json!({ "verdict": verdict_name(&brute) });
        if let Some(w) = brute.witness() {
            bj["point"] = json!(p.alphabet().decode(&w.prefix));
        }
        result["brute"] = bj;
    }
    let exit = if run.verdict.is_equal() { EXIT_EQUAL } else { EXIT_NOT_EQUAL };
    Ok(Outcome::Report {
        result,
        tolerances: json!({ "arithmetic": "exact" }),
        exit,
    })
}

fn spin(s: i64) -> Result<Spin, Failure> {
    Spin::try_from(s).map_err(Failure::from)
}

fn accuracy_json(a: &Accuracy) -> Value {
    json!({ "eps": a.eps, "conf": a.conf })
}

fn ok(result: Value, tolerances: Value) -> Result<Outcome, Failure> {
    Ok(Outcome::Report {
        result,
        tolerances,
        exit: EXIT_EQUAL,
    })
}

/// `|Z_est / Z_ref − 1|` from log values.
fn relative_error_from_logs(est: f64, reference: f64) -> f64 {
    (est - reference).exp_m1().abs()
}

fn within_factor(est: f64, reference: f64, eps: f64) -> bool {
    let r = (est - reference).abs();
    r <= eps.ln_1p()
}

fn ising_cmd(c: &IsingCommand, d: &mut InputDigest) -> Result<Outcome, Failure> {
    match c {
        IsingCommand::Partition { model, via, accuracy } => {
            let m = load_ising(d, model)?;
            let log_z = match via {
                Via::Brute => ising::partition_brute(&m)?.ln(),
                Via::Marginals => {
                    ising::partition_via_marginals(&m, &mut ExactMarginalOracle, accuracy.eps, accuracy.conf)?
                        .log_z
                        .ln()
                }
                Via::Tv => {
                    let mut oracle = TvMarginalOracle { tv: BruteTvOracle };
                    ising::partition_via_marginals(&m, &mut oracle, accuracy.eps, accuracy.conf)?
                        .log_z
                        .ln()
                }
            };
            let tol = if *via == Via::Brute { Value::Null } else { accuracy_json(accuracy) };
            ok(json!({ "n": m.n(), "via": via_name(*via), "log_z": log_z }), tol)
        }
        IsingCommand::Marginal { model, target, via, accuracy } => {
            let m = load_ising(d, model)?;
            let s = spin(target.s)?;
            let (value, extra) = match via {
                Via::Brute => (ising::marginal_brute(&m, target.k, s)?, Value::Null),
                Via::Tv => {
                    let est = ising::marginal_via_tv(&m, target.k, s, accuracy.eps, accuracy.conf, &mut BruteTvOracle)?;
                    (est.value, params_json(&est.params))
                }
                Via::Marginals => {
                    return Err(Failure::input("bad_flag", "--via marginals applies to partition only"));
                }
            };
            let tol = if *via == Via::Brute { Value::Null } else { accuracy_json(accuracy) };
            let mut result = json!({ "k": target.k, "s": s.to_string(), "via": via_name(*via), "marginal": value });
            if !extra.is_null() {
                result["gadget"] = extra;
            }
            ok(result, tol)
        }
        IsingCommand::Tv { a, b } => {
            let ma = load_ising(d, a)?;
            let mb = load_ising(d, b)?;
            let tv = ising::tv_brute_detailed(&ma, &mb)?;
            let value = ising::tv_brute(&ma, &mb)?;
            ok(
                json!({ "tv": value, "half_l1": tv.half_l1, "positive_part": tv.positive_part }),
                json!({ "formula_agreement": ising::brute::TV_FORMULA_TOLERANCE }),
            )
        }
        IsingCommand::Gadget { model, k, h0, delta } => {
            let m = load_ising(d, model)?;
            let params = GadgetParams::new(*k, *h0, *delta)?;
            let (p0, q0) = ising::build_marginal_gadget(&m, &params)?;
            let tv = ising::tv_brute(&p0, &q0)?;
            let rhs = ising::eq1_rhs(&m, &params)?;
            let residual = (tv - rhs).abs();
            let target = params.target();
            let marginal = ising::marginal_brute(&m, *k, target)?;
            let bound = ising::gadget_error_bound(&m, &params)?;
            let sign = ising::gadget_sign_check(&m, &params)?;
            let error = (tv - marginal).abs();
            ok(
                json!({
                    "params": params_json(&params),
                    "tv": tv,
                    "identity_rhs": rhs,
                    "identity_residual": residual,
                    "identity_holds": residual <= GADGET_RESIDUAL_TOLERANCE,
                    "sign_check": {
                        "holds": sign.holds(),
                        "violations": sign.violations,
                        "first_violation": sign.first_violation.map(|b| ising::spins_from_bits(b, p0.n())),
                    },
                    "marginal": marginal,
                    "marginal_error": error,
                    "error_bound": bound.value,
                    "log_partition_ratio": bound.log_partition_ratio,
                    "bound_holds": error <= bound.value,
                    "informative": bound.informative,
                }),
                json!({ "identity_residual": GADGET_RESIDUAL_TOLERANCE }),
            )
        }
        IsingCommand::Reduce { what, model, target, accuracy } => {
            let m = load_ising(d, model)?;
            let (estimate, reference, relative_error, within) = match what {
                ReduceTarget::Partition => {
                    let mut oracle = TvMarginalOracle { tv: BruteTvOracle };
                    let est = ising::partition_via_marginals(&m, &mut oracle, accuracy.eps, accuracy.conf)?;
                    let reference = ising::partition_brute(&m)?.ln();
                    let est = est.log_z.ln();
                    (
                        json!({ "log_z": est }),
                        json!({ "log_z": reference }),
                        relative_error_from_logs(est, reference),
                        within_factor(est, reference, accuracy.eps),
                    )
                }
                ReduceTarget::Marginal => {
                    let s = spin(target.s)?;
                    let est = ising::marginal_via_tv(&m, target.k, s, accuracy.eps, accuracy.conf, &mut BruteTvOracle)?;
                    let reference = ising::marginal_brute(&m, target.k, s)?;
                    (
                        json!({ "k": target.k, "s": s.to_string(), "marginal": est.value, "gadget": params_json(&est.params) }),
                        json!({ "marginal": reference }),
                        (est.value / reference - 1.0).abs(),
                        within_factor(est.value.ln(), reference.ln(), accuracy.eps),
                    )
                }
            };
            let exit = if within { EXIT_EQUAL } else { EXIT_NUMERIC };
            Ok(Outcome::Report {
                result: json!({
                    "target": match what { ReduceTarget::Partition => "partition", ReduceTarget::Marginal => "marginal" },
                    "estimate": estimate,
                    "reference": reference,
                    "relative_error": relative_error,
                    "within_tolerance": within,
                }),
                tolerances: accuracy_json(accuracy),
                exit,
            })
        }
    }
}

fn via_name(v: Via) -> &'static str {
    match v {
        Via::Brute => "brute",
        Via::Marginals => "marginals",
        Via::Tv => "tv",
    }
}

fn params_json(p: &GadgetParams) -> Value {
    json!({ "k": p.k, "h0": p.h0, "delta": p.delta, "target": p.target().to_string() })
}

fn gen_cmd(c: &GenCommand, d: &mut InputDigest) -> Result<Outcome, Failure> {
    let doc = match c {
        GenCommand::Mixture { n, k, alphabet, denominator_bound, seed } => {
            let a = Alphabet::new(alphabet.iter().cloned()).map_err(Failure::from)?;
            generators::random_mixture(*n, *k, &a, Seed(*seed), *denominator_bound)?.to_json()
        }
        GenCommand::Rewrite { model, seed } => {
            let m = load_mixture(d, model)?;
            generators::equivalent_rewrite(&m, Seed(*seed))?.to_json()
        }
        GenCommand::Perturb { model, magnitude, seed } => {
            let m = load_mixture(d, model)?;
            let mag = parse_rational(magnitude).map_err(Failure::from)?;
            let pair = generators::perturbed_pair(&m, Seed(*seed), &mag)?;
            eprintln!("{}", json!({ "equal": pair.equal, "magnitude": format_rational(&mag) }));
            pair.mixture.to_json()
        }
        GenCommand::Ising { n, density, weight_min, weight_max, field_min, field_max, seed } => {
            generators::random_ising(*n, *density, (*weight_min, *weight_max), (*field_min, *field_max), Seed(*seed))?
                .to_json()
        }
    };
    Ok(Outcome::Document(doc + "\n"))
}

impl From<IsingError> for Failure {
    fn from(e: IsingError) -> Self {
        let numeric = matches!(
            e,
            IsingError::TooLarge { .. }
                | IsingError::InfeasibleGadget { .. }
                | IsingError::TvDisagreement { .. }
                | IsingError::NonPositiveEstimate(_)
                | IsingError::Oracle(_)
        );
        if let IsingError::InfeasibleGadget { h0_magnitude, delta, limit } = e {
            let mut f = Failure::numeric("infeasible_gadget", e.to_string());
            f.detail = Some(json!({ "required_h0_magnitude": h0_magnitude, "required_delta": delta, "limit": limit }));
            return f;
        }
        if numeric {
            Failure::numeric("numeric", e.to_string())
        } else {
            Failure::input("invalid_input", e.to_string())
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        if matches!(e, ModelError::TooLarge { .. }) {
            Failure::numeric("guard", e.to_string())
        } else {
            Failure::input("invalid_model", e.to_string())
        }
    }
}

impl From<EquivalenceError> for Failure {
    fn from(e: EquivalenceError) -> Self {
        match e {
            EquivalenceError::Model(m) => m.into(),
            EquivalenceError::BasisBound { .. } | EquivalenceError::Linalg(_) => {
                Failure::numeric("internal", e.to_string())
            }
            other => Failure::input("incompatible_models", other.to_string()),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Model(m) => m.into(),
            GenError::Equivalence(q) => q.into(),
            other => Failure::input("bad_generator_parameter", other.to_string()),
        }
    }
}

impl Failure {
    fn model(path: &Path, e: ModelError) -> Failure {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}
