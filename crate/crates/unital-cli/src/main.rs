//! Command-line front end. Every subcommand prints exactly one JSON envelope
//! {command, inputs, outputs, status} on stdout; figure subcommands also write
//! a CSV file. Output is byte-identical across runs for fixed argv (all
//! randomized subcommands take an explicit --seed).
//!
//! Exit codes: 0 success; 2 argv does not match the grammar (clap); 3 a file
//! input is unreadable, malformed, or unsuitable for the requested operation;
//! 4 a scalar parameter is outside its documented domain or the parameter
//! combination is unsupported.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

use unital::birkhoff::{
    depolarizing_restores_birkhoff, depolarizing_y_expectation, epsilon_star,
    quaternion_certificate, theta_curve, two_copy_coords_of_state, two_copy_membership,
    y_expectation,
};
use unital::channel::{
    affine_unitary_decomposition, hs_contraction_decomposition, kraus_to_choi, ChoiState,
    KrausChannel,
};
use unital::covariant::{
    covariant_family, covariant_family_state, m_curve, membership_in_u, negativity,
    CovariantState,
};
use unital::extremal::{exceptional_channel, extremality_test};
use unital::linalg::CMatrix;
use unital::optimize::{
    manifold_minimize, Objective, DEFAULT_GRAD_TOL, DEFAULT_MAX_ITER, DEFAULT_RESTARTS,
};
use unital::witness::{evaluate, flip_witness};
use unital::DEFAULT_TOL;

// --- grammar ----------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "unital",
    version,
    about = "Analysis toolkit for unital quantum channels: representation checks, \
             unitary-mixture decompositions, extremality tests, separation witnesses, \
             covariant-plane geometry, tensor-product membership certificates, and \
             unitary-manifold optimization."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report complete positivity, trace preservation and unitality of a
    /// Kraus-form channel file.
    Check {
        /// Channel JSON: {"d": n, "kraus": [{"rows","cols","re","im"}, ...]}
        channel: String,
    },
    /// Print the dual (Choi-Jamiolkowski) density operator of a channel file.
    Choi {
        /// Channel JSON file.
        channel: String,
    },
    /// Decompose a unital channel into unitary conjugations.
    Decompose {
        #[command(subcommand)]
        which: DecomposeCmd,
    },
    /// Test extremality of a channel inside all channels and inside the
    /// unital subset, via the rank of its Kraus-product families.
    Extremal {
        /// Channel JSON file (omit when using --example).
        #[arg(required_unless_present = "example", conflicts_with = "example")]
        channel: Option<String>,
        /// Use the built-in rank-3 channel that is extremal among unital
        /// channels but not among all channels.
        #[arg(long)]
        example: bool,
        /// Rank tolerance for the Gram-spectrum decision.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Build the flip-ansatz witness W = (1 (x) B) F (1 (x) B^dag) + w(B) 1
    /// with its sharpest constant, optionally evaluating tr[W rho] on a dual
    /// state (negative value = certified outside the unitary-mixture set).
    Witness {
        /// Matrix JSON file for the B parameter.
        #[arg(long)]
        b: String,
        /// Optional dual-state JSON file: {"d": n, "rho": matrix}.
        #[arg(long)]
        rho: Option<String>,
    },
    /// Orthogonal-covariant plane: coordinates x = tr[rho F], y = d<Omega|rho|Omega>,
    /// membership in the unitary-mixture region, and the closed-form negativity.
    Covariant {
        #[command(subcommand)]
        which: CovariantCmd,
    },
    /// Tensor-product membership certificates: two copies of the covariant
    /// family, a completely depolarizing partner, and quaternion unitaries.
    Birkhoff {
        #[command(subcommand)]
        which: BirkhoffCmd,
    },
    /// Minimize a normalized trace objective over the unitary manifold with
    /// seeded random restarts.
    Optimize {
        /// Which objective to minimize.
        #[arg(long, value_enum)]
        objective: ObjectiveKind,
        /// First tensor factor dimension.
        #[arg(long)]
        d: usize,
        /// Second tensor factor dimension.
        #[arg(long = "D", value_name = "D")]
        big_d: usize,
        /// Number of random restarts.
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        /// RNG seed (required: runs must be reproducible).
        #[arg(long)]
        seed: u64,
        /// Iteration budget per restart.
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Gradient-norm convergence tolerance.
        #[arg(long, default_value_t = DEFAULT_GRAD_TOL)]
        tol: f64,
        /// Also emit the minimizing unitary.
        #[arg(long)]
        emit_minimizer: bool,
    },
    /// Emit plot-ready CSV (comma separator, '.' decimal, header row naming
    /// the axes, leading section column).
    Figure {
        #[command(subcommand)]
        which: FigureCmd,
    },
}

#[derive(Subcommand)]
enum DecomposeCmd {
    /// Affine combination of unitary conjugations: seeded random generators
    /// plus the identity, coefficients summing to one by least squares.
    Affine {
        /// Channel JSON file (must be unital).
        channel: String,
        /// RNG seed (required: runs must be reproducible).
        #[arg(long)]
        seed: u64,
        /// Number of generators; defaults to (d^2-1)^2 + 2, the generic
        /// affine dimension plus one.
        #[arg(long)]
        generators: Option<usize>,
    },
    /// Exact two-term mixture of Hilbert-Schmidt unitaries containing the
    /// channel's superoperator: T_hat = (U_+ + U_-)/2.
    Hs {
        /// Channel JSON file (superoperator must be a contraction).
        channel: String,
    },
}

#[derive(Subcommand)]
enum CovariantCmd {
    /// Commutant-plane coordinates of a covariant state.
    Coords(CovariantPoint),
    /// Is the state a mixture of unitary-conjugation duals?
    Membership(CovariantPoint),
    /// Distance from the unitary-mixture region as minimal negative weight
    /// (odd d; zero on members, 1/(d-1) at the antisymmetric corner).
    Negativity(CovariantPoint),
}

/// A covariant state given either by simplex weights on the three extreme
/// states (q0 ideal, q1 antisymmetric, q2 symmetric-traceless) or by the
/// one-parameter family rho(eps) with tr[rho F] = -1 + 2/d - eps. An epsilon
/// within 1e-3 beyond an endpoint of [0, 2/d] snaps to that endpoint, so
/// decimal approximations of 2/d land exactly on the antisymmetric state.
#[derive(Args)]
#[command(group(clap::ArgGroup::new("point").required(true).args(["q0", "epsilon"])))]
struct CovariantPoint {
    /// Local dimension.
    #[arg(long)]
    d: usize,
    /// Weight of the ideal-channel state (requires --q1 and --q2).
    #[arg(long, requires = "q1", requires = "q2", allow_negative_numbers = true)]
    q0: Option<f64>,
    /// Weight of the antisymmetric state.
    #[arg(long, requires = "q0", allow_negative_numbers = true)]
    q1: Option<f64>,
    /// Weight of the symmetric-traceless state.
    #[arg(long, requires = "q0", allow_negative_numbers = true)]
    q2: Option<f64>,
    /// Family parameter in [0, 2/d] (odd d only).
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
}

#[derive(Subcommand)]
enum BirkhoffCmd {
    /// Pair coordinates (f, f12) of two copies of the d=3 family member
    /// rho(eps), and whether they lie in the unitary hull: true means the
    /// single-copy escapee returns to the mixture set when doubled.
    TwoCopy {
        /// Family parameter in [0, 2/3] (1e-3 endpoint snap as in covariant).
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
    },
    /// Pair the family member rho(eps) with a completely depolarizing partner
    /// of dimension D and test the certified membership criterion.
    Depolarizing {
        /// Family dimension (odd, >= 3).
        #[arg(long)]
        d: usize,
        /// Partner dimension (the certificate covers D = 2).
        #[arg(long = "D", value_name = "D")]
        big_d: usize,
        /// Family parameter in [0, 2/d] (1e-3 endpoint snap as in covariant).
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
    },
    /// Hermitian unitary built from a quaternion matrix certifying the
    /// minimal partial-transpose overlap y = -1 + 2/d^2 for a qubit partner.
    Quaternion {
        /// Quaternion model dimension (3 or 5).
        #[arg(long)]
        d: usize,
    },
}

#[derive(Subcommand)]
enum FigureCmd {
    /// Covariant plane: state triangle, unitary-mixture boundary, and the
    /// fully covariant segment. Columns: section,x,y.
    Covariant {
        /// Local dimension (>= 2; the boundary curve needs odd d).
        #[arg(long)]
        d: usize,
        /// Output CSV path.
        #[arg(long)]
        out: String,
    },
    /// Negativity level sets: uniform scalings of the unitary-mixture
    /// boundary about the symmetric-traceless corner, at levels k/5 of the
    /// maximum 1/(d-1). Columns: section,x,y.
    Negativity {
        /// Local dimension (odd, >= 3).
        #[arg(long)]
        d: usize,
        /// Output CSV path.
        #[arg(long)]
        out: String,
    },
    /// Two-copy pair plane for d = 3: state triangle, unitary-hull boundary,
    /// the self-pairing parabola with its single-copy-member part, and the
    /// threshold marker where the parabola re-enters the hull.
    /// Columns: section,f,f12.
    TwoCopy {
        /// Local dimension (the pair analysis is for d = 3).
        #[arg(long)]
        d: usize,
        /// Output CSV path.
        #[arg(long)]
        out: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveKind {
    /// tr[U conj(U)^{T2}]/(d*D) with the partial transpose on the D factor.
    #[value(name = "tr-u-ubar-t2")]
    TrUUbarT2,
    /// tr[U_s conj(U_s)^{T2}]/(d*D) with U_s = (U + U^T)/2.
    #[value(name = "tr-usym-pt")]
    TrUsymPt,
}

// --- result envelope ---------------------------------------------------------

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    inputs: Value,
    outputs: T,
    status: &'a str,
}

fn emit<T: Serialize>(command: &str, inputs: &Value, outputs: T) {
    let env = Envelope {
        command,
        inputs: inputs.clone(),
        outputs,
        status: "ok",
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&env).expect("envelope serialization cannot fail")
    );
}

/// CLI failure carrying its exit code.
enum Failure {
    /// Exit 3: unreadable, malformed, or unsuitable file input.
    File(String),
    /// Exit 4: parameter outside its documented domain / unsupported combination.
    Domain(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::File(_) => 3,
            Failure::Domain(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::File(m) | Failure::Domain(m) => m,
        }
    }
}

/// Any library error raised while loading or applying a file input.
fn file_err(e: unital::Error) -> Failure {
    Failure::File(e.to_string())
}

/// Library errors raised by parameter-driven computations: range and support
/// problems are the caller's parameters (4), anything else traces back to
/// file contents (3).
fn domain_err(e: unital::Error) -> Failure {
    match e {
        unital::Error::OutOfRange { .. } | unital::Error::Unsupported(_) => {
            Failure::Domain(e.to_string())
        }
        other => Failure::File(other.to_string()),
    }
}

// --- file loading --------------------------------------------------------------

fn read_file(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(Path::new(path))
        .map_err(|e| Failure::File(format!("{path}: {e}")))
}

fn load_channel(path: &str) -> Result<KrausChannel, Failure> {
    KrausChannel::from_json_str(&read_file(path)?).map_err(file_err)
}

fn load_matrix(path: &str) -> Result<CMatrix, Failure> {
    CMatrix::from_json_str(&read_file(path)?).map_err(file_err)
}

fn load_choi(path: &str) -> Result<ChoiState, Failure> {
    ChoiState::from_json_str(&read_file(path)?).map_err(file_err)
}

// --- shared helpers -----------------------------------------------------------

/// Width inside which a command-line epsilon snaps to the nearest endpoint of
/// its domain, so that decimal approximations of 2/d are accepted exactly.
const EPSILON_SNAP: f64 = 1e-3;

fn snap_epsilon(eps: f64, hi: f64) -> f64 {
    if (-EPSILON_SNAP..0.0).contains(&eps) {
        0.0
    } else if eps > hi && eps <= hi + EPSILON_SNAP {
        hi
    } else {
        eps
    }
}

fn covariant_state_of(args: &CovariantPoint) -> Result<(CovariantState, Option<f64>), Failure> {
    if args.d < 2 {
        return Err(Failure::Domain(format!(
            "d = {} is outside [2, inf)",
            args.d
        )));
    }
    match args.epsilon {
        Some(eps) => {
            let eff = snap_epsilon(eps, 2.0 / args.d as f64);
            let state = covariant_family_state(args.d, eff).map_err(domain_err)?;
            Ok((state, Some(eff)))
        }
        None => {
            // clap guarantees all three weights are present here
            let (q0, q1, q2) = (
                args.q0.expect("grammar"),
                args.q1.expect("grammar"),
                args.q2.expect("grammar"),
            );
            let state = CovariantState::new(args.d, q0, q1, q2).map_err(domain_err)?;
            Ok((state, None))
        }
    }
}

fn covariant_point_inputs(name: &str, args: &CovariantPoint) -> Value {
    let mut v = json!({ "d": args.d });
    if let Some(e) = args.epsilon {
        v["epsilon"] = json!(e);
    } else {
        v["q0"] = json!(args.q0);
        v["q1"] = json!(args.q1);
        v["q2"] = json!(args.q2);
    }
    let _ = name;
    v
}

// --- dispatch -------------------------------------------------------------------

fn main() {
    let cli = Cli::parse();
    let (name, inputs) = describe(&cli.cmd);
    if let Err(f) = run(cli.cmd, &name, &inputs) {
        let env = Envelope {
            command: &name,
            inputs: inputs.clone(),
            outputs: json!({ "message": f.message() }),
            status: "error",
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&env).expect("envelope serialization cannot fail")
        );
        std::process::exit(f.code());
    }
}

/// Command name and echo of the parsed arguments, used in the envelope for
/// both the success and the error paths.
fn describe(cmd: &Command) -> (String, Value) {
    match cmd {
        Command::Check { channel } => ("check".into(), json!({ "channel": channel })),
        Command::Choi { channel } => ("choi".into(), json!({ "channel": channel })),
        Command::Decompose { which } => match which {
            DecomposeCmd::Affine {
                channel,
                seed,
                generators,
            } => (
                "decompose affine".into(),
                json!({ "channel": channel, "seed": seed, "generators": generators }),
            ),
            DecomposeCmd::Hs { channel } => {
                ("decompose hs".into(), json!({ "channel": channel }))
            }
        },
        Command::Extremal {
            channel,
            example,
            tol,
        } => (
            "extremal".into(),
            json!({ "channel": channel, "example": example, "tol": tol }),
        ),
        Command::Witness { b, rho } => ("witness".into(), json!({ "b": b, "rho": rho })),
        Command::Covariant { which } => match which {
            CovariantCmd::Coords(p) => ("covariant coords".into(), covariant_point_inputs("coords", p)),
            CovariantCmd::Membership(p) => (
                "covariant membership".into(),
                covariant_point_inputs("membership", p),
            ),
            CovariantCmd::Negativity(p) => (
                "covariant negativity".into(),
                covariant_point_inputs("negativity", p),
            ),
        },
        Command::Birkhoff { which } => match which {
            BirkhoffCmd::TwoCopy { epsilon } => {
                ("birkhoff two-copy".into(), json!({ "epsilon": epsilon }))
            }
            BirkhoffCmd::Depolarizing { d, big_d, epsilon } => (
                "birkhoff depolarizing".into(),
                json!({ "d": d, "D": big_d, "epsilon": epsilon }),
            ),
            BirkhoffCmd::Quaternion { d } => ("birkhoff quaternion".into(), json!({ "d": d })),
        },
        Command::Optimize {
            objective,
            d,
            big_d,
            restarts,
            seed,
            max_iter,
            tol,
            emit_minimizer,
        } => (
            "optimize".into(),
            json!({
                "objective": match objective {
                    ObjectiveKind::TrUUbarT2 => "tr-u-ubar-t2",
                    ObjectiveKind::TrUsymPt => "tr-usym-pt",
                },
                "d": d,
                "D": big_d,
                "restarts": restarts,
                "seed": seed,
                "max_iter": max_iter,
                "tol": tol,
                "emit_minimizer": emit_minimizer,
            }),
        ),
        Command::Figure { which } => match which {
            FigureCmd::Covariant { d, out } => {
                ("figure covariant".into(), json!({ "d": d, "out": out }))
            }
            FigureCmd::Negativity { d, out } => {
                ("figure negativity".into(), json!({ "d": d, "out": out }))
            }
            FigureCmd::TwoCopy { d, out } => {
                ("figure two-copy".into(), json!({ "d": d, "out": out }))
            }
        },
    }
}

fn run(cmd: Command, name: &str, inputs: &Value) -> Result<(), Failure> {
    match cmd {
        Command::Check { channel } => {
            let ch = load_channel(&channel)?;
            emit(
                name,
                inputs,
                json!({
                    "d": ch.d(),
                    "n_kraus": ch.n_kraus(),
                    "cp": ch.is_cp(DEFAULT_TOL),
                    "tp": ch.is_tp(DEFAULT_TOL),
                    "tp_defect": ch.tp_defect(),
                    "unital": ch.is_unital(DEFAULT_TOL),
                    "unital_defect": ch.unital_defect(),
                }),
            );
        }
        Command::Choi { channel } => {
            let ch = load_channel(&channel)?;
            let state = kraus_to_choi(&ch);
            emit(
                name,
                inputs,
                json!({
                    "tp_defect": state.tp_defect(),
                    "unital_defect": state.unital_defect(),
                    "state": state,
                }),
            );
        }
        Command::Decompose { which } => match which {
            DecomposeCmd::Affine {
                channel,
                seed,
                generators,
            } => {
                let ch = load_channel(&channel)?;
                let n = ch.d() * ch.d();
                let count = generators.unwrap_or((n - 1).pow(2) + 2);
                let combo =
                    affine_unitary_decomposition(&ch, count, seed).map_err(domain_err)?;
                let residual =
                    (&combo.superoperator().t_hat - &ch.superoperator().t_hat).max_abs();
                let sum: f64 = combo.coefficients.iter().sum();
                emit(
                    name,
                    inputs,
                    json!({
                        "generators": combo.unitaries.len(),
                        "coefficient_sum": sum,
                        "residual": residual,
                        "coefficients": combo.coefficients,
                        "unitaries": combo.unitaries,
                    }),
                );
            }
            DecomposeCmd::Hs { channel } => {
                let ch = load_channel(&channel)?;
                let sup = ch.superoperator();
                let dec = hs_contraction_decomposition(&sup).map_err(file_err)?;
                let residual = (&dec.reconstruct() - &sup.t_hat).max_abs();
                emit(
                    name,
                    inputs,
                    json!({
                        "weights": dec.weights,
                        "residual": residual,
                        "hs_unitaries": [&dec.hs_unitaries[0], &dec.hs_unitaries[1]],
                    }),
                );
            }
        },
        Command::Extremal {
            channel,
            example,
            tol,
        } => {
            let ch = if example {
                exceptional_channel()
            } else {
                load_channel(channel.as_deref().expect("grammar"))?
            };
            let report = extremality_test(&ch, tol).map_err(domain_err)?;
            emit(name, inputs, json!({ "d": ch.d(), "report": report }));
        }
        Command::Witness { b, rho } => {
            let b_mat = load_matrix(&b)?;
            let wit = flip_witness(&b_mat).map_err(file_err)?;
            let mut out = json!({ "d": wit.d, "w": wit.w, "matrix": wit.matrix });
            if let Some(rho_path) = rho {
                let state = load_choi(&rho_path)?;
                let value = evaluate(&wit, &state).map_err(file_err)?;
                out["value"] = json!(value);
                out["certifies_outside"] = json!(value < 0.0);
            }
            emit(name, inputs, out);
        }
        Command::Covariant { which } => match which {
            CovariantCmd::Coords(p) => {
                let (state, eff) = covariant_state_of(&p)?;
                let coords = state.coords();
                let mut out = json!({
                    "x": coords.x,
                    "y": coords.y,
                    "q0": state.q0,
                    "q1": state.q1,
                    "q2": state.q2,
                });
                if let Some(e) = eff {
                    out["epsilon_used"] = json!(e);
                }
                emit(name, inputs, out);
            }
            CovariantCmd::Membership(p) => {
                let (state, eff) = covariant_state_of(&p)?;
                let coords = state.coords();
                let mut out = json!({
                    "x": coords.x,
                    "y": coords.y,
                    "member": membership_in_u(coords, p.d),
                });
                if let Some(e) = eff {
                    out["epsilon_used"] = json!(e);
                }
                emit(name, inputs, out);
            }
            CovariantCmd::Negativity(p) => {
                let (state, eff) = covariant_state_of(&p)?;
                let coords = state.coords();
                let value = negativity(&state).map_err(domain_err)?;
                let mut out = json!({
                    "negativity": value,
                    "x": coords.x,
                    "y": coords.y,
                });
                if let Some(e) = eff {
                    out["epsilon_used"] = json!(e);
                }
                emit(name, inputs, out);
            }
        },
        Command::Birkhoff { which } => match which {
            BirkhoffCmd::TwoCopy { epsilon } => {
                let eff = snap_epsilon(epsilon, 2.0 / 3.0);
                let rho = covariant_family(3, eff).map_err(domain_err)?;
                let coords = two_copy_coords_of_state(&rho, &rho).map_err(domain_err)?;
                emit(
                    name,
                    inputs,
                    json!({
                        "d": 3,
                        "f": coords.f,
                        "f12": coords.f12,
                        "member": two_copy_membership(coords),
                        "epsilon_star": epsilon_star(),
                        "epsilon_used": eff,
                    }),
                );
            }
            BirkhoffCmd::Depolarizing { d, big_d, epsilon } => {
                let eff = snap_epsilon(epsilon, 2.0 / d.max(1) as f64);
                let y = depolarizing_y_expectation(d, eff).map_err(domain_err)?;
                let restored =
                    depolarizing_restores_birkhoff(d, big_d, eff).map_err(domain_err)?;
                emit(
                    name,
                    inputs,
                    json!({
                        "y": y,
                        "floor": -1.0 + 2.0 / (d as f64 * d as f64),
                        "restored": restored,
                        "epsilon_used": eff,
                    }),
                );
            }
            BirkhoffCmd::Quaternion { d } => {
                let u = quaternion_certificate(d).map_err(domain_err)?;
                let y = y_expectation(&u, d, 2).map_err(domain_err)?;
                #[derive(Serialize)]
                struct QuaternionOut {
                    y: f64,
                    hermitian: bool,
                    unitary: bool,
                }
                emit(
                    name,
                    inputs,
                    QuaternionOut {
                        y,
                        hermitian: u.hermitian_defect() <= 1e-10,
                        unitary: u.unitary_defect() <= 1e-10,
                    },
                );
            }
        },
        Command::Optimize {
            objective,
            d,
            big_d,
            restarts,
            seed,
            max_iter,
            tol,
            emit_minimizer,
        } => {
            let obj = match objective {
                ObjectiveKind::TrUUbarT2 => Objective::TrUUbarT2 { d, big_d },
                ObjectiveKind::TrUsymPt => Objective::TrUsymPt { d1: d, d2: big_d },
            };
            let res = manifold_minimize(obj, restarts, seed, max_iter, tol).map_err(domain_err)?;
            let mut out = json!({
                "value": res.value,
                "stationarity_residual": res.stationarity_residual,
                "restarts_used": res.restarts_used,
                "converged": res.converged,
            });
            if emit_minimizer {
                out["minimizer"] = serde_json::to_value(&res.minimizer)
                    .expect("matrix serialization cannot fail");
            }
            emit(name, inputs, out);
        }
        Command::Figure { which } => match which {
            FigureCmd::Covariant { d, out } => {
                let rows = covariant_figure(d)?;
                let summary = write_csv(&out, "section,x,y", &rows)?;
                emit(name, inputs, summary);
            }
            FigureCmd::Negativity { d, out } => {
                let rows = negativity_figure(d)?;
                let summary = write_csv(&out, "section,x,y", &rows)?;
                emit(name, inputs, summary);
            }
            FigureCmd::TwoCopy { d, out } => {
                let rows = two_copy_figure(d)?;
                let summary = write_csv(&out, "section,f,f12", &rows)?;
                emit(name, inputs, summary);
            }
        },
    }
    Ok(())
}

// --- figure data ----------------------------------------------------------------

type FigureRows = Vec<(String, f64, f64)>;

fn push_poly(rows: &mut FigureRows, section: &str, points: &[(f64, f64)]) {
    for &(a, b) in points {
        rows.push((section.to_string(), a, b));
    }
}

const CURVE_SAMPLES: usize = 400;

/// Left boundary of the unitary-mixture region for odd d, sampled bottom-up:
/// the vertical edge from (-1 + 2/d, 0) to the curve's foot at height 1/d,
/// then (x, d m(x)^2) for x in [-1 + 2/d, 1].
fn boundary_samples(d: usize) -> FigureRows {
    const EDGE_SAMPLES: usize = 40;
    let df = d as f64;
    let lo = -1.0 + 2.0 / df;
    let mut rows = Vec::with_capacity(EDGE_SAMPLES + CURVE_SAMPLES + 1);
    for j in 0..EDGE_SAMPLES {
        rows.push(("boundary".to_string(), lo, j as f64 / EDGE_SAMPLES as f64 / df));
    }
    for j in 0..=CURVE_SAMPLES {
        let x = (lo + (1.0 - lo) * j as f64 / CURVE_SAMPLES as f64).clamp(lo, 1.0);
        let m = m_curve(x, d).expect("x clamped into the curve domain");
        rows.push(("boundary".to_string(), x, df * m * m));
    }
    rows
}

fn state_triangle(d: usize) -> [(f64, f64); 4] {
    let df = d as f64;
    [(1.0, df), (-1.0, 0.0), (1.0, 0.0), (1.0, df)]
}

fn covariant_figure(d: usize) -> Result<FigureRows, Failure> {
    if d < 2 {
        return Err(Failure::Domain(format!("d = {d} is outside [2, inf)")));
    }
    let df = d as f64;
    let mut rows = Vec::new();
    push_poly(&mut rows, "triangle", &state_triangle(d));
    if d % 2 == 1 {
        rows.extend(boundary_samples(d));
    } else {
        // in even dimension every covariant state is a mixture of unitary
        // duals: the boundary is the triangle itself
        push_poly(&mut rows, "boundary", &state_triangle(d));
    }
    // the fully covariant channels: segment from the antisymmetric state to
    // the normalized symmetric projector at (1, 2/(d+1))
    push_poly(
        &mut rows,
        "covariant_segment",
        &[(-1.0, 0.0), (1.0, 2.0 / (df + 1.0))],
    );
    Ok(rows)
}

fn negativity_figure(d: usize) -> Result<FigureRows, Failure> {
    if d % 2 == 0 || d < 3 {
        return Err(Failure::Domain(format!(
            "negativity level sets are defined for odd d >= 3, got d = {d}"
        )));
    }
    let df = d as f64;
    let mut rows = Vec::new();
    push_poly(&mut rows, "triangle", &state_triangle(d));
    let boundary = boundary_samples(d);
    rows.extend(boundary.iter().cloned());
    // each level set is the boundary scaled about the symmetric-traceless
    // corner (1, 0) by 1 + level, clipped to the state triangle
    for k in 1..=5usize {
        let level = k as f64 / 5.0 / (df - 1.0);
        let scale = 1.0 + level;
        let section = format!("level_{k}");
        for (_, x, y) in &boundary {
            let xs = 1.0 + scale * (x - 1.0);
            let ys = scale * y;
            if ys <= df * (xs + 1.0) / 2.0 + 1e-12 {
                rows.push((section.clone(), xs, ys));
            }
        }
    }
    Ok(rows)
}

fn two_copy_figure(d: usize) -> Result<FigureRows, Failure> {
    if d != 3 {
        return Err(Failure::Domain(format!(
            "the two-copy pair plane is computed for d = 3, got d = {d}"
        )));
    }
    let mut rows = Vec::new();
    // outer triangle of pair expectations of commuting +-1 observables
    push_poly(
        &mut rows,
        "triangle",
        &[(1.0, 1.0), (-1.0, 1.0), (0.0, -1.0), (1.0, 1.0)],
    );
    // unitary-hull boundary: minimizing curve, then bottom, right and top edges
    for j in 0..=CURVE_SAMPLES {
        let theta = std::f64::consts::FRAC_PI_2 * j as f64 / CURVE_SAMPLES as f64;
        let c = theta_curve(theta).expect("theta sampled inside [0, pi/2]");
        rows.push(("region".to_string(), c.f, c.f12));
    }
    push_poly(
        &mut rows,
        "region",
        &[
            (1.0 / 9.0, -7.0 / 9.0),
            (1.0, 1.0),
            (-23.0 / 27.0, 1.0),
        ],
    );
    // self-pairing coordinates (x, x^2) of all product states ...
    for j in 0..=CURVE_SAMPLES {
        let x = -1.0 + 2.0 * j as f64 / CURVE_SAMPLES as f64;
        rows.push(("parabola".to_string(), x, x * x));
    }
    // ... and the part coming from single-copy members, x >= -1 + 2/3
    for j in 0..=CURVE_SAMPLES {
        let x = -1.0 / 3.0 + (4.0 / 3.0) * j as f64 / CURVE_SAMPLES as f64;
        rows.push(("parabola_member".to_string(), x, x * x));
    }
    // where the family parabola re-enters the hull
    let xs = -1.0 / 3.0 - epsilon_star();
    rows.push(("epsilon_star".to_string(), xs, xs * xs));
    Ok(rows)
}

fn write_csv(path: &str, header: &str, rows: &FigureRows) -> Result<Value, Failure> {
    let mut body = String::with_capacity(header.len() + 1 + rows.len() * 48);
    body.push_str(header);
    body.push('\n');
    let mut sections: Vec<&str> = Vec::new();
    for (section, a, b) in rows {
        if sections.last() != Some(&section.as_str()) && !sections.contains(&section.as_str()) {
            sections.push(section);
        }
        body.push_str(&format!("{section},{a},{b}\n"));
    }
    std::fs::write(Path::new(path), body).map_err(|e| Failure::File(format!("{path}: {e}")))?;
    Ok(json!({ "out": path, "rows": rows.len(), "sections": sections }))
}
