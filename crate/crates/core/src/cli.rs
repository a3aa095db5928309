//! Command-line front end. `run` parses arguments, dispatches, prints
//! JSON to stdout and returns the process exit code.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::bounds::{
    bound, rank0_test, rank1_sufficient, rank_formula_bounds, rank_lower_search,
    rank_recursive_upper, rank_upper_probe, DVector, Hierarchy, RankKind, RankOf, RankReport,
    Witness, T_TOL,
};
use crate::certificates::verify;
use crate::copositivity::{brute_oracle, cop5_test, CopVerdict, OracleVerdict, COP5_MARGIN, ORACLE_DEPTH};
use crate::error::{CoposError, Result};
use crate::graph::{parse_graph, to_dimacs, Family, Graph, StableMode};
use crate::matrix::{parse_matrix, SymMatrix};
use crate::membership::{membership, qtilde_membership, Cone, MembershipOptions, MembershipStatus, SosCertificate};
use crate::reproduce::{reproduce, round_floats, Experiment};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "copos", version, about = "Copositive bounds on graph stability numbers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build a graph from a named family.
    Gen {
        /// cycle, complete, complete-bipartite, star, graph-b, graph-c, gk, lk, lk-prime, icosahedron
        #[arg(long)]
        family: String,
        params: Vec<usize>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
        #[arg(long)]
        dimacs: bool,
    },
    /// Stability number and related counts.
    Alpha {
        #[arg(short)]
        g: PathBuf,
    },
    /// Compute a bound of one hierarchy.
    Bound {
        #[arg(long)]
        hierarchy: String,
        #[arg(long)]
        r: u32,
        #[arg(short)]
        g: PathBuf,
        #[arg(long, default_value_t = T_TOL)]
        t_tol: f64,
        /// Also write the certificate to this file.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Test cone membership of a matrix.
    Membership {
        #[arg(long)]
        cone: String,
        #[arg(long, default_value_t = 0)]
        r: u32,
        #[arg(short)]
        m: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Lower or upper bounds on the ranks.
    Rank {
        #[arg(long, conflicts_with = "upper")]
        lower: bool,
        #[arg(long)]
        upper: bool,
        #[arg(short)]
        g: PathBuf,
        #[arg(long, default_value_t = 6)]
        size_cap: usize,
        /// Confirm the best upper bound with a conic probe.
        #[arg(long)]
        probe: bool,
    },
    /// Exact copositivity test for 5×5 matrices.
    Cop5 {
        #[arg(short)]
        m: PathBuf,
        #[arg(long, default_value_t = COP5_MARGIN)]
        margin: f64,
    },
    /// Sufficient copositivity test at level r, optionally with the oracle.
    Copositive {
        #[arg(short)]
        m: PathBuf,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long)]
        oracle: bool,
    },
    /// Check a certificate against a matrix.
    VerifyCert {
        #[arg(short)]
        m: PathBuf,
        #[arg(short)]
        c: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run a scripted experiment and print its report.
    Reproduce {
        #[arg(long)]
        experiment: String,
        k: Option<usize>,
        /// Directory for `<experiment>.json` and `<experiment>.md`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Print JSON instead of markdown.
        #[arg(long)]
        json: bool,
    },
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn read_graph(path: &Path) -> Result<Graph> {
    parse_graph(&read(path)?)
}

fn read_matrix(path: &Path) -> Result<SymMatrix> {
    parse_matrix(&read(path)?)
}

fn emit(out: &mut dyn Write, mut v: Value) -> Result<()> {
    round_floats(&mut v);
    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    Ok(())
}

fn status_code(s: MembershipStatus) -> i32 {
    match s {
        MembershipStatus::Member => EXIT_OK,
        MembershipStatus::NotMember => EXIT_NEGATIVE,
        MembershipStatus::Unknown => EXIT_UNKNOWN,
    }
}

fn cop_code(v: CopVerdict) -> i32 {
    match v {
        CopVerdict::Copositive => EXIT_OK,
        CopVerdict::NotCopositive => EXIT_NEGATIVE,
        CopVerdict::Unknown => EXIT_UNKNOWN,
    }
}

fn error_code(e: &CoposError) -> i32 {
    match e {
        CoposError::ResourceCap { .. } => EXIT_CAP,
        CoposError::SolverUnknown(_) => EXIT_UNKNOWN,
        _ => EXIT_USAGE,
    }
}

fn upper_reports(g: &Graph, opts: &MembershipOptions) -> Result<Vec<RankReport>> {
    let mut out = Vec::new();
    if rank0_test(g, opts)? {
        out.push(RankReport {
            kind: RankKind::Upper,
            rank: RankOf::NuTilde,
            bound: 0,
            witness: Witness::Formula {
                tag: "rank0".into(),
                value: 0.0,
            },
            verified: true,
            note: None,
        });
        return Ok(out);
    }
    if let Some(r) = rank1_sufficient(g, None, opts)? {
        out.push(r);
    }
    match rank_recursive_upper(g, &DVector::ones(g.n()), opts) {
        Ok(r) => out.push(r),
        Err(CoposError::ResourceCap { .. }) => {}
        Err(e) => return Err(e),
    }
    out.extend(rank_formula_bounds(g, opts)?);
    Ok(out)
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let opts = MembershipOptions::default();
    match cli.cmd {
        Cmd::Gen { family: f, params, output, dimacs } => {
            let g = Family::from_name(&f, &params)?.build()?;
            let text = if dimacs {
                to_dimacs(&g)
            } else {
                serde_json::to_string(&g)? + "\n"
            };
            match output {
                Some(path) => fs::write(path, text)?,
                None => write!(out, "{text}")?,
            }
            Ok(EXIT_OK)
        }
        Cmd::Alpha { g } => {
            let g = read_graph(&g)?;
            let imax = g.stable_sets(StableMode::MaximumOnly)?;
            emit(
                out,
                json!({
                    "n": g.n(),
                    "edges": g.edge_count(),
                    "alpha": imax.alpha,
                    "clique_cover_number": g.clique_cover_number()?,
                    "maximum_stable_sets": imax.sets.len(),
                }),
            )?;
            Ok(EXIT_OK)
        }
        Cmd::Bound { hierarchy, r, g, t_tol, certificate } => {
            let h: Hierarchy = hierarchy.parse()?;
            let g = read_graph(&g)?;
            let mut res = bound(h, &g, r, t_tol, &opts)?;
            if let (Some(path), Some(cert)) = (certificate, &res.certificate) {
                fs::write(path, serde_json::to_string_pretty(&cert.to_json())?)?;
            }
            res.certificate = None;
            let code = if res.verified { EXIT_OK } else { EXIT_UNKNOWN };
            emit(out, serde_json::to_value(&res)?)?;
            Ok(code)
        }
        Cmd::Membership { cone, r, m, margin, certificate } => {
            let cone: Cone = cone.parse()?;
            let m = read_matrix(&m)?;
            let v = membership(cone, &m, r, &MembershipOptions { margin, ..opts })?;
            if let (Some(path), Some(cert)) = (certificate, &v.certificate) {
                fs::write(path, serde_json::to_string_pretty(&cert.to_json())?)?;
            }
            emit(
                out,
                json!({
                    "cone": cone,
                    "r": r,
                    "status": v.status,
                    "margin": v.margin,
                    "residual": v.residual,
                    "solver_status": v.solver_status,
                }),
            )?;
            Ok(status_code(v.status))
        }
        Cmd::Rank { lower, upper, g, size_cap, probe } => {
            let g = read_graph(&g)?;
            if lower == upper {
                return Err(CoposError::InvalidParameter(
                    "pass exactly one of --lower and --upper".into(),
                ));
            }
            if lower {
                let r = rank_lower_search(&g, size_cap)?;
                emit(out, serde_json::to_value(&r)?)?;
                return Ok(EXIT_OK);
            }
            let reports = upper_reports(&g, &opts)?;
            let best = reports.iter().map(|r| r.bound).min().unwrap_or(u64::MAX);
            let mut doc = json!({ "best": best, "reports": reports });
            let mut code = EXIT_OK;
            if probe && best <= 3 {
                let s = rank_upper_probe(&g, best as u32, &opts)?;
                doc["probe"] = json!({ "r": best, "status": s });
                code = status_code(s);
            }
            emit(out, doc)?;
            Ok(code)
        }
        Cmd::Cop5 { m, margin } => {
            let m = read_matrix(&m)?;
            let v = cop5_test(&m, margin, &opts)?;
            emit(out, json!({ "verdict": v, "margin": margin }))?;
            Ok(cop_code(v))
        }
        Cmd::Copositive { m, r, oracle } => {
            let m = read_matrix(&m)?;
            let v = qtilde_membership(&m, r, &opts)?;
            let verdict = if v.is_member() {
                CopVerdict::Copositive
            } else {
                CopVerdict::Unknown
            };
            let mut doc = json!({ "r": r, "verdict": verdict, "qtilde": v.status });
            let mut code = status_code(v.status);
            if oracle {
                let o = brute_oracle(&m, ORACLE_DEPTH);
                if code != EXIT_OK {
                    code = match o {
                        OracleVerdict::Copositive => EXIT_OK,
                        OracleVerdict::NotCopositive { .. } => EXIT_NEGATIVE,
                        OracleVerdict::Unknown => code,
                    };
                }
                doc["oracle"] = serde_json::to_value(o)?;
            }
            emit(out, doc)?;
            Ok(code)
        }
        Cmd::VerifyCert { m, c, tol } => {
            let m = read_matrix(&m)?;
            let cert: SosCertificate = serde_json::from_str(&read(&c)?)?;
            let rep = verify(&m, &cert, tol)?;
            emit(out, serde_json::to_value(rep)?)?;
            Ok(if rep.pass { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Cmd::Reproduce { experiment, k, out_dir, json } => {
            let exp = Experiment::parse(&experiment, k)?;
            let rep = reproduce(exp, &opts)?;
            let doc = rep.to_json();
            let md = rep.to_markdown();
            if let Some(dir) = out_dir {
                fs::create_dir_all(&dir)?;
                let slug = exp.slug();
                fs::write(dir.join(format!("{slug}.json")), serde_json::to_string_pretty(&doc)?)?;
                fs::write(dir.join(format!("{slug}.md")), &md)?;
            }
            if json {
                emit(out, doc)?;
            } else {
                write!(out, "{md}")?;
            }
            Ok(if rep.pass { EXIT_OK } else { EXIT_NEGATIVE })
        }
    }
}

/// Runs the CLI on `argv` (including the program name), writing results to
/// `out` and diagnostics to stderr.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock())
}
