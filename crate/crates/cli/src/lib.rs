//! The `entverify` command line.
//!
//! Every command prints a JSON [`Report`] on standard output. The exit code
//! is 0 when the verdict is true (or a construction succeeded), 1 when it is
//! false and 2 on usage or input errors. `--output PATH` additionally writes
//! the command's main artifact (a dilation, inverse channel, UEB, ...).

use clap::{Args, Parser, Subcommand, ValueEnum};
use entverify::algebra::{MultimatrixAlgebra, ResourceState};
use entverify::channel::{dilation_to_channel, is_cp, is_trace_preserving, minimal_dilation, Channel, TraceConvention};
use entverify::diagram::DEFAULT_TOL;
use entverify::format::*;
use entverify::schemes::*;
use entverify::ueb::*;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "entverify", version, about = "Check and build entanglement-assisted channels")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Numerical tolerance for parsing (state norms, UEB axioms).
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Threshold on residuals for true/false verdicts.
    #[arg(long, global = true, default_value_t = VERDICT_TOL)]
    pub verdict_tol: f64,
    /// Seed for randomized constructions.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Rescale unnormalized states instead of rejecting them.
    #[arg(long, global = true)]
    pub renormalize: bool,
    /// Write the main artifact of the command to this file.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ChannelArg {
    /// Channel file.
    #[arg(long)]
    pub channel: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    /// Channel file.
    #[arg(long)]
    pub channel: PathBuf,
    /// Resource state file.
    #[arg(long)]
    pub state: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Minimal dilation of a channel.
    Dilate(ChannelArg),
    /// Complete positivity of the Choi blocks.
    CheckCp(ChannelArg),
    /// Trace preservation in either convention.
    CheckTp {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long, value_enum, default_value_t = Convention::Matrix)]
        convention: Convention,
    },
    /// Biunitarity of the minimal dilation and the bijection equations.
    CheckQbij(ChannelArg),
    /// Entanglement inverse of a quantum bijection with a maximally entangled state.
    Invert(ChannelArg),
    /// Entanglement reversibility of a channel with a resource state.
    CheckEntrev(PairArgs),
    /// Entanglement invertibility of a channel with a resource state.
    CheckEntinv(PairArgs),
    /// Build a quantum bijection between two algebras of equal dimension.
    ConstructQbij {
        /// Source factor sizes, e.g. `1,2`.
        #[arg(long, value_delimiter = ',', required = true)]
        source: Vec<usize>,
        /// Target factor sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<usize>,
    },
    /// Unitary error bases.
    #[command(subcommand)]
    Ueb(UebCommand),
    /// Recognize tight teleportation and dense coding schemes.
    #[command(subcommand)]
    Classify(ClassifyCommand),
}

#[derive(Subcommand, Debug)]
pub enum UebCommand {
    /// Generate the Weyl basis, or a random basis with `--random`.
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        random: bool,
    },
    /// Check the UEB axioms on a list of matrices.
    Check {
        #[arg(long)]
        ueb: PathBuf,
    },
    /// The teleportation or dense coding channel of a UEB.
    Channel {
        #[arg(long)]
        ueb: PathBuf,
        #[arg(long, value_enum)]
        protocol: Protocol,
    },
}

#[derive(Subcommand, Debug)]
pub enum ClassifyCommand {
    TightTeleportation(PairArgs),
    TightDenseCoding(PairArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Convention {
    Matrix,
    Special,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Protocol {
    Teleportation,
    DenseCoding,
}

/// What a run produced: exit code plus the text for each stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parse `args` (including the program name) and execute the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code: 2, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok(rep) => {
            let code = if rep.verdict == Some(false) { 1 } else { 0 };
            Output { code, stdout: rep.to_json() + "\n", stderr: String::new() }
        }
        Err(msg) => Output { code: 2, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}

type Res<T> = Result<T, String>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn context<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

fn opts(g: &Global) -> ParseOptions {
    ParseOptions { renormalize: g.renormalize, tol: g.tol, ..ParseOptions::default() }
}

fn load_channel(path: &Path, g: &Global) -> Res<Channel> {
    parse_channel(&read(path)?, &opts(g)).map_err(context(path))
}

fn load_state(path: &Path, g: &Global) -> Res<ResourceState> {
    parse_state(&read(path)?, &opts(g)).map_err(context(path))
}

fn write_artifact(g: &Global, text: &str) -> Res<()> {
    if let Some(p) = &g.output {
        std::fs::write(p, text.to_string() + "\n").map_err(|e| format!("{}: {e}", p.display()))?;
    }
    Ok(())
}

fn report(name: &str, g: &Global) -> Report {
    let mut r = Report::new(name);
    r.tolerance("tol", g.tol).tolerance("verdict_tol", g.verdict_tol);
    r
}

fn execute(cli: &Cli) -> Res<Report> {
    let g = &cli.global;
    let vt = g.verdict_tol;
    match &cli.command {
        Command::Dilate(a) => {
            let ch = load_channel(&a.channel, g)?;
            let d = minimal_dilation(&ch).map_err(|e| e.to_string())?;
            let mut r = report("dilate", g);
            r.residual("reconstruction", dilation_to_channel(&d).distance(&ch).map_err(|e| e.to_string())?);
            r.residual("isometry", d.isometry_residual());
            r.certificate("env_dims", json!(d.env_dims()));
            write_artifact(g, &dilation_to_json(&d))?;
            Ok(r)
        }
        Command::CheckCp(a) => {
            let ch = parse_channel(&read(&a.channel)?, &ParseOptions { check_psd: false, ..opts(g) })
                .map_err(context(&a.channel))?;
            let cp = is_cp(&ch);
            let (i, j, e) = cp.worst_block();
            let mut r = report("check-cp", g);
            r.verdict = Some(cp.verdict);
            r.residual("negativity", -cp.most_negative());
            r.certificate("worst_block", json!({"i": i, "j": j, "min_eig": e}));
            Ok(r)
        }
        Command::CheckTp { channel, convention } => {
            let ch = load_channel(&channel.channel, g)?;
            let conv = match convention {
                Convention::Matrix => TraceConvention::Matrix,
                Convention::Special => TraceConvention::Special,
            };
            let tp = is_trace_preserving(&ch, conv, vt);
            let mut r = report("check-tp", g);
            r.verdict = Some(tp.verdict);
            r.residual("trace_preservation", tp.residual);
            if let Some(iso) = tp.isometry_residual {
                r.residual("isometry", iso);
            }
            r.certificate("convention", json!(conv));
            r.certificate("per_factor", json!(tp.per_factor));
            Ok(r)
        }
        Command::CheckQbij(a) => {
            let ch = load_channel(&a.channel, g)?.with_explicit_aux().to_convention(TraceConvention::Matrix);
            let d = minimal_dilation(&ch).map_err(|e| e.to_string())?;
            let b = biunitarity(&d, vt).map_err(|e| e.to_string())?;
            let eqs = check_qbij_equations(&d).map_err(|e| e.to_string())?;
            let mut r = report("check-qbij", g);
            r.verdict = Some(b.verdict);
            biunitarity_residuals(&mut r, "", &b);
            r.residual("multiplication", eqs.multiplication)
                .residual("comultiplication", eqs.comultiplication)
                .residual("unit", eqs.unit);
            Ok(r)
        }
        Command::Invert(a) => {
            let ch = load_channel(&a.channel, g)?;
            let mut r = report("invert", g);
            match QuantumBijection::new(&ch, vt) {
                Ok(q) => {
                    let inv = entanglement_inverse_maxent(&q);
                    let pair = check_entanglement_pair(q.channel(), &inv, &ResourceState::max_entangled(q.h()))
                        .map_err(|e| e.to_string())?;
                    r.verdict = Some(pair.passes(vt));
                    biunitarity_residuals(&mut r, "", q.report());
                    r.residual("oracle_left", pair.left).residual("oracle_right", pair.right);
                    r.certificate("inverse", channel_to_value(&inv));
                    write_artifact(g, &channel_to_json(&inv))?;
                }
                Err(SchemeError::NotBiunitary(_)) => {
                    let d = minimal_dilation(&ch.with_explicit_aux()).map_err(|e| e.to_string())?;
                    let b = biunitarity(&d, vt).map_err(|e| e.to_string())?;
                    r.verdict = Some(false);
                    biunitarity_residuals(&mut r, "", &b);
                }
                Err(e) => return Err(e.to_string()),
            }
            Ok(r)
        }
        Command::CheckEntrev(p) => {
            let (m, w) = (load_channel(&p.channel, g)?, load_state(&p.state, g)?);
            let rev = is_entanglement_reversible(&m, &w, vt).map_err(|e| e.to_string())?;
            let mut r = report("check-entrev", g);
            r.verdict = Some(rev.verdict);
            reversibility_fields(&mut r, &rev);
            if rev.verdict {
                let n = if rev.dims.equal() && w.is_pure() {
                    entanglement_left_inverse(&m, &w, &rev)
                } else {
                    recovery_channel(&m, &w)
                }
                .map_err(|e| e.to_string())?;
                r.residual("left_inverse", left_residual(&m, &n, &w).map_err(|e| e.to_string())?);
                r.certificate("left_inverse", channel_to_value(&n));
                write_artifact(g, &channel_to_json(&n))?;
            }
            Ok(r)
        }
        Command::CheckEntinv(p) => {
            let (m, w) = (load_channel(&p.channel, g)?, load_state(&p.state, g)?);
            let inv = is_entanglement_invertible(&m, &w, vt).map_err(|e| e.to_string())?;
            let mut r = report("check-entinv", g);
            r.verdict = Some(inv.verdict);
            reversibility_fields(&mut r, &inv.reversibility);
            for (k, b) in inv.biunitarity.iter().enumerate() {
                if let Some(b) = b {
                    biunitarity_residuals(&mut r, &format!("component_{k}_"), b);
                }
            }
            for (k, t) in inv.intertwiner.iter().enumerate() {
                if let Some(t) = t {
                    r.residual(&format!("component_{k}_intertwiner"), t.residual);
                }
            }
            r.residual("oracle_left", inv.oracle.left).residual("oracle_right", inv.oracle.right);
            r.certificate("inverse", channel_to_value(&inv.inverse));
            if inv.verdict {
                write_artifact(g, &channel_to_json(&inv.inverse))?;
            }
            Ok(r)
        }
        Command::ConstructQbij { source, target } => {
            let a = MultimatrixAlgebra::new(source.clone()).map_err(|e| format!("--source: {e}"))?;
            let b = MultimatrixAlgebra::new(target.clone()).map_err(|e| format!("--target: {e}"))?;
            let q = construct_qbij(&a, &b, vt).map_err(|e| e.to_string())?;
            let mut r = report("construct-qbij", g);
            biunitarity_residuals(&mut r, "", q.report());
            r.certificate("aux_dim", json!(q.h()));
            r.certificate("channel", channel_to_value(q.channel()));
            write_artifact(g, &channel_to_json(q.channel()))?;
            Ok(r)
        }
        Command::Ueb(UebCommand::Gen { dim, random }) => {
            if *dim == 0 {
                return Err("--dim must be positive".into());
            }
            let u = if *random { random_ueb(*dim, g.seed) } else { weyl_basis(*dim) };
            let check = is_ueb(u.elements(), g.tol);
            let mut r = report("ueb gen", g);
            r.residual("unitarity", check.unitarity_residual).residual("orthogonality", check.orthogonality_residual);
            r.certificate("ueb", ueb_to_value(&u));
            write_artifact(g, &ueb_to_json(&u))?;
            Ok(r)
        }
        Command::Ueb(UebCommand::Check { ueb }) => {
            let mats = parse_matrices(&read(ueb)?).map_err(context(ueb))?;
            let check = is_ueb(&mats, g.tol);
            let mut r = report("ueb check", g);
            r.verdict = Some(check.verdict);
            if !check.ragged {
                r.residual("unitarity", check.unitarity_residual)
                    .residual("orthogonality", check.orthogonality_residual);
            }
            r.certificate("count_ok", json!(check.count_ok));
            r.certificate("square_and_equal_sizes", json!(!check.ragged));
            Ok(r)
        }
        Command::Ueb(UebCommand::Channel { ueb, protocol }) => {
            let u = parse_ueb(&read(ueb)?, &opts(g)).map_err(context(ueb))?;
            let ch = match protocol {
                Protocol::Teleportation => teleportation_channel(&u),
                Protocol::DenseCoding => dense_coding_channel(&u),
            }
            .map_err(|e| e.to_string())?;
            let mut r = report("ueb channel", g);
            r.certificate("channel", channel_to_value(&ch));
            write_artifact(g, &channel_to_json(&ch))?;
            Ok(r)
        }
        Command::Classify(c) => {
            let (name, p, f): (&str, &PairArgs, fn(&Channel, &ResourceState, f64) -> _) = match c {
                ClassifyCommand::TightTeleportation(p) => {
                    ("classify tight-teleportation", p, classify_tight_teleportation as fn(&_, &_, _) -> _)
                }
                ClassifyCommand::TightDenseCoding(p) => ("classify tight-dense-coding", p, classify_tight_dense_coding),
            };
            let (m, w) = (load_channel(&p.channel, g)?, load_state(&p.state, g)?);
            let outcome: Result<Classification, Refusal> = f(&m, &w, vt).map_err(|e| e.to_string())?;
            let mut r = report(name, g);
            match outcome {
                Ok(cls) => {
                    r.verdict = Some(true);
                    r.residual("omega_unitarity", cls.certificate.omega_unitarity_residual)
                        .residual("reversibility", cls.certificate.reversibility_residual);
                    r.certificate("scale", json!(cls.certificate.scale));
                    r.certificate("ueb", ueb_to_value(&cls.ueb));
                    write_artifact(g, &ueb_to_json(&cls.ueb))?;
                }
                Err(refusal) => {
                    r.verdict = Some(false);
                    r.residual("refusal", refusal.residual);
                    for (k, v) in &refusal.details {
                        r.residual(k, *v);
                    }
                    r.certificate("refusal", serde_json::to_value(&refusal).map_err(|e| e.to_string())?);
                }
            }
            Ok(r)
        }
    }
}

fn biunitarity_residuals(r: &mut Report, prefix: &str, b: &BiunitarityReport) {
    for (k, name) in ["first", "second"].iter().enumerate() {
        r.residual(&format!("{prefix}{name}_isometry"), b.isometry_residuals[k]);
        r.residual(&format!("{prefix}{name}_coisometry"), b.coisometry_residuals[k]);
    }
}

fn reversibility_fields(r: &mut Report, rev: &ReversibilityReport) {
    r.residual("nu_solve", rev.solve_residual());
    r.residual("oracle_recovery_left", rev.oracle_left_residual);
    r.certificate("dims", json!({"dim_a": rev.dims.dim_a, "dim_b": rev.dims.dim_b}));
    let cert: Value = match &rev.certificate {
        ReversibilityCertificate::Pure { kappa, nu, nu_min_eig, rank, .. } => json!({
            "kind": "pure",
            "rank": rank,
            "nu_min_eig": nu_min_eig,
            "kappa": blockmap_to_value(kappa),
            "nu": blockmap_to_value(nu),
        }),
        ReversibilityCertificate::Mixed { weights, nu, .. } => json!({
            "kind": "mixed",
            "weights": weights,
            "nu": nu.iter().map(|row| row.iter().map(blockmap_to_value).collect::<Vec<_>>()).collect::<Vec<_>>(),
        }),
    };
    r.certificate("reversibility", cert);
}
