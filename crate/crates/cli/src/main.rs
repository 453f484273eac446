//! `loglap`: matrices, solves, convergence tables and spectra as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use loglap::assembly::{assemble_b, assemble_frac, assemble_log, assemble_mass, DEFAULT_B_ORDER};
use loglap::problems::{solve_dirichlet, Operator, ProblemName, ProblemSpec};
use loglap::quadrature::error_l2;
use loglap::report::{convergence_csv, convergence_table, fmt17, write_text, Table};
use loglap::spectral::{
    discrete_eigenvalues, eigenvalue_by_scaling, find_lk, lk_csv, scan_condition, EigenKind, LkTable,
};
use loglap::{Error, Mesh};

/// Brackets isolating L_1..L_6 on (−L, L).
const LK_BRACKETS: [(f64, f64); 6] = [
    (0.6, 0.8),
    (2.3, 2.5),
    (3.8, 4.0),
    (5.4, 5.6),
    (6.95, 7.15),
    (8.55, 8.75),
];

/// Reference λ_1..λ_6 of L_Δ on (−1, 1).
const LAMBDA_REFERENCE: [f64; 6] = [-0.6878, 1.7331, 2.7275, 3.4122, 3.9091, 4.3142];

#[derive(Parser)]
#[command(name = "loglap", version, about = "Finite elements for the logarithmic Laplacian in 1D")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Log,
    Frac,
    Mass,
    Bform,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Torsion,
    U1,
    U2,
    U3,
    Udef,
}

impl From<Problem> for ProblemName {
    fn from(p: Problem) -> Self {
        match p {
            Problem::Torsion => ProblemName::Torsion,
            Problem::U1 => ProblemName::U1,
            Problem::U2 => ProblemName::U2,
            Problem::U3 => ProblemName::U3,
            Problem::Udef => ProblemName::Udef,
        }
    }
}

#[derive(Subcommand)]
#[allow(non_snake_case)]
enum Command {
    /// Write a stiffness, mass or B matrix on the mesh of (0, L).
    Assemble {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Interval length
        #[arg(long = "L")]
        L: f64,
        /// Interior nodes
        #[arg(long = "N")]
        N: usize,
        /// Fractional order, required for --kind frac
        #[arg(long)]
        s: Option<f64>,
        /// Output CSV (stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a Dirichlet problem on (−L, L); writes (x_i, α_i).
    Solve {
        #[arg(long, value_enum)]
        problem: Problem,
        /// Half-length of the interval
        #[arg(long = "L")]
        L: f64,
        #[arg(long = "N")]
        N: usize,
        /// Use the fractional Laplacian of order s (torsion only)
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error table (a_h, b_h, c_h and slopes) over a list of N.
    Converge {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long = "L", default_value_t = 1.0)]
        L: f64,
        #[arg(long = "N", num_args = 1.., default_values_t = [25, 50, 100, 200, 400])]
        N: Vec<usize>,
        /// Window K for b_h, centered coordinates
        #[arg(long = "K-window", num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true,
              default_values_t = [-0.9, 0.9])]
        K_window: Vec<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Condition number of the stiffness matrix over a grid of half-lengths.
    Scan {
        #[arg(long = "N")]
        N: usize,
        #[arg(long = "Lmin")]
        Lmin: f64,
        #[arg(long = "Lmax")]
        Lmax: f64,
        /// Grid points, endpoints included
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Golden-section search for the half-length L_k where 0 is an eigenvalue.
    Findlk {
        #[arg(long = "N")]
        N: usize,
        /// Index k; selects a default bracket when --bracket is omitted
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        bracket: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest eigenvalues on (−L, L).
    Eigs {
        #[arg(long = "L")]
        L: f64,
        #[arg(long = "N")]
        N: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Use 2 ln(L_k/L) from golden-section L_k instead of the discrete pencil
        #[arg(long)]
        scaled: bool,
        /// Eigenvalues of the stiffness matrix alone instead of the pencil (A, M)
        #[arg(long, conflicts_with = "scaled")]
        raw: bool,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: &Option<PathBuf>, text: &str) -> loglap::Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn operator(s: Option<f64>) -> Operator {
    s.map_or(Operator::Log, Operator::Frac)
}

fn run(cmd: Command) -> loglap::Result<()> {
    match cmd {
        Command::Assemble { kind, L, N, s, out } => {
            let mesh = Mesh::new(L, N)?;
            let a = match kind {
                Kind::Log => assemble_log(&mesh),
                Kind::Mass => assemble_mass(&mesh),
                Kind::Bform => assemble_b(&mesh, DEFAULT_B_ORDER)?,
                Kind::Frac => {
                    let s = s.ok_or_else(|| Error::Argument("--kind frac needs --s".into()))?;
                    assemble_frac(&mesh, s)?
                }
            };
            if out.is_some() {
                println!("{0}x{0} matrix, h = {1}", a.order(), fmt17(mesh.h()));
            }
            emit(&out, &a.to_csv())
        }
        Command::Solve { problem, L, N, s, out } => {
            let spec = ProblemSpec::new(operator(s), problem.into(), L)?;
            let r = solve_dirichlet(&spec, N)?;
            let mut t = Table::new(["x", "alpha"]);
            for (x, a) in r.centered_nodes() {
                t.push_values(&[x, a]);
            }
            if out.is_some() || spec.has_exact() {
                eprintln!(
                    "extreme coefficient {}, residual {}",
                    fmt17(r.extreme_value()),
                    fmt17(r.residual_norm)
                );
                if r.near_singular {
                    eprintln!("warning: stiffness matrix is nearly singular at this L");
                }
            }
            if spec.has_exact() {
                let a_h = error_l2(|y| spec.exact(y).unwrap_or(0.0), &r.solution, None);
                eprintln!("a_h = {}", fmt17(a_h));
            }
            emit(&out, &t.to_csv())
        }
        Command::Converge {
            problem,
            L,
            N,
            K_window,
            s,
            out,
        } => {
            let spec = ProblemSpec::new(operator(s), problem.into(), L)?;
            let rows = convergence_table(&spec, &N, (K_window[0], K_window[1]))?;
            emit(&out, &convergence_csv(&rows).to_csv())
        }
        Command::Scan {
            N,
            Lmin,
            Lmax,
            steps,
            out,
        } => {
            let r = scan_condition(N, Lmin, Lmax, steps)?;
            let peaks = r.local_maxima(1.0);
            if !peaks.is_empty() {
                let at: Vec<String> = peaks.iter().map(|&i| format!("{:.4}", r.lengths[i])).collect();
                eprintln!("local maxima of cond at L = {}", at.join(", "));
            }
            emit(&out, &r.to_table().to_csv())
        }
        Command::Findlk {
            N,
            k,
            bracket,
            tol,
            out,
        } => {
            let bracket = match (bracket, k) {
                (Some(b), _) => (b[0], b[1]),
                (None, Some(k)) if (1..=LK_BRACKETS.len()).contains(&k) => LK_BRACKETS[k - 1],
                (None, Some(k)) => {
                    return Err(Error::Argument(format!("no default bracket for k = {k}; pass --bracket")))
                }
                (None, None) => return Err(Error::Argument("pass --k or --bracket".into())),
            };
            let t = find_lk(N, bracket, tol)?;
            if let Some(k) = k {
                if k != t.k {
                    return Err(Error::Bracket {
                        a: bracket.0,
                        b: bracket.1,
                        reason: format!("spike found is L_{}, not L_{k}", t.k),
                    });
                }
            }
            println!("L_{} = {:.4} (N = {N}, {})", t.k, t.lk, fmt17(t.lk));
            match out {
                Some(path) => write_text(&path, &lk_csv(&[t]).to_csv()),
                None => Ok(()),
            }
        }
        Command::Eigs {
            L,
            N,
            k,
            scaled,
            raw,
            tol,
            out,
        } => {
            let values = if scaled {
                if k > LK_BRACKETS.len() {
                    return Err(Error::Argument(format!("--scaled supports k ≤ {}", LK_BRACKETS.len())));
                }
                let tables = LK_BRACKETS[..k]
                    .iter()
                    .map(|&b| find_lk(N, b, tol))
                    .collect::<loglap::Result<Vec<LkTable>>>()?;
                tables
                    .iter()
                    .enumerate()
                    .map(|(j, t)| eigenvalue_by_scaling(L, j + 1, t))
                    .collect::<loglap::Result<Vec<f64>>>()?
            } else {
                let kind = if raw { EigenKind::Raw } else { EigenKind::Pencil };
                discrete_eigenvalues(L, N, k, kind)?
            };
            let mut t = Table::new(["k", "lambda", "reference"]).integer_columns(&["k"]);
            for (j, v) in values.iter().enumerate() {
                // references are for (−1, 1); shift by the scaling law
                let reference = LAMBDA_REFERENCE.get(j).map(|r| r - 2.0 * L.ln());
                println!(
                    "lambda_{} = {v:.4}{}",
                    j + 1,
                    reference.map(|r| format!("   reference {r:.4}")).unwrap_or_default()
                );
                t.push(vec![Some((j + 1) as f64), Some(*v), reference]);
            }
            match out {
                Some(path) => write_text(&path, &t.to_csv()),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_argument_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
