//! Stability-number bounds from the cone hierarchies, and the rank
//! machinery built on top of them.

mod rank;

pub use rank::{
    check_ineq_d, find_d, multiplier_imax, multiplier_theorem, rank0_test, rank1_sufficient,
    rank_formula_bounds, rank_lower_cert, rank_lower_search, rank_recursive_upper,
    rank_upper_probe, DVector, IneqD, RANK_EPS, LowerCert, Multiplier, RankKind, RankOf, RankReport,
    RecursionNode, Witness,
};

use serde::{Deserialize, Serialize};

use crate::certificates;
use crate::error::{CoposError, Result};
use crate::graph::Graph;
use crate::membership::{
    c_membership, ctilde_membership, qtilde_membership, Layout, Lhs, MembershipOptions,
    MembershipStatus, MembershipVerdict, SosCertificate, SosProgram,
};
use crate::poly::HomPoly;
use crate::matrix::SymMatrix;

/// Default stopping width of the binary searches.
pub const T_TOL: f64 = 1e-4;
/// Factor by which a search interval may grow past `n` before giving up.
pub const WIDEN_CAP: f64 = 1024.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hierarchy {
    Nu,
    NuTilde,
    Zeta,
    ZetaTilde,
    Theta,
}

impl std::str::FromStr for Hierarchy {
    type Err = CoposError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "nu" => Hierarchy::Nu,
            "nutilde" => Hierarchy::NuTilde,
            "zeta" => Hierarchy::Zeta,
            "zetatilde" => Hierarchy::ZetaTilde,
            "theta" => Hierarchy::Theta,
            _ => {
                return Err(CoposError::InvalidParameter(format!(
                    "unknown hierarchy {s:?}"
                )))
            }
        })
    }
}

/// One membership probe of a search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub t: f64,
    pub verdict: MembershipStatus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundResult {
    pub hierarchy: Hierarchy,
    pub r: u32,
    /// `+∞` when no feasible `t` was found up to the widening cap.
    #[serde(with = "inf_float")]
    pub value: f64,
    pub alpha: usize,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<SosCertificate>,
    pub search_trace: Vec<Probe>,
    /// False when some probe came back unknown (treated as infeasible).
    pub verified: bool,
    pub solver_status: String,
}

impl BoundResult {
    pub fn largest_infeasible(&self) -> Option<f64> {
        self.search_trace
            .iter()
            .filter(|p| p.verdict != MembershipStatus::Member)
            .map(|p| p.t)
            .fold(None, |a, t| Some(a.map_or(t, |a: f64| a.max(t))))
    }

    pub fn smallest_feasible(&self) -> Option<f64> {
        self.search_trace
            .iter()
            .filter(|p| p.verdict == MembershipStatus::Member)
            .map(|p| p.t)
            .fold(None, |a, t| Some(a.map_or(t, |a: f64| a.min(t))))
    }
}

/// Serializes infinite values as the string `"inf"`.
mod inf_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Text(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("bad float {s:?}"))),
        }
    }
}

fn nonempty(g: &Graph) -> Result<usize> {
    if g.n() == 0 {
        return Err(CoposError::InvalidParameter(
            "bounds are undefined for the empty graph".into(),
        ));
    }
    g.alpha()
}

/// `min t` with `(Σx)^r x^T (t(A+I) - J) x` in the given layout, solved as
/// one conic program.
fn direct_min(
    g: &Graph,
    r: u32,
    layout: Layout,
    hierarchy: Hierarchy,
    opts: &MembershipOptions,
) -> Result<BoundResult> {
    let alpha = nonempty(g)?;
    let n = g.n();
    let s = HomPoly::simplex_power(n, r);
    let norm = s.norm1();
    let a_i = g.adjacency_matrix().shift_diagonal(1.0);
    let dir = s.multiply(&HomPoly::quad_form(&a_i))?.scale(1.0 / norm);
    let base = s
        .multiply(&HomPoly::quad_form(&SymMatrix::ones(n)))?
        .scale(-1.0 / norm);
    let mult = s.scale(1.0 / norm);
    let prog = SosProgram::build(n, r, layout, Lhs::Affine { base, dir }, Some(mult))?;
    let sol = prog.problem.solve(&opts.tols)?;
    let t_var = prog.t.expect("affine program has a t variable");
    if !sol.is_feasible() {
        return Err(CoposError::SolverUnknown(format!(
            "{hierarchy:?}^({r}) minimization on {}: solver status {}, residual {:.3e}, min eig {:.3e}",
            g.name().unwrap_or("graph"),
            sol.solver_status,
            sol.max_equality_residual,
            sol.min_block_eigenvalue
        )));
    }
    let t = sol.scalars[t_var];
    let cert = prog.certificate(&sol);
    let report = certificates::verify(&g.m_matrix(Some(t))?, &cert, opts.verify_tol)?;
    Ok(BoundResult {
        hierarchy,
        r,
        value: t,
        alpha,
        tolerance: opts.tols.feas_tol,
        certificate: Some(cert),
        search_trace: Vec::new(),
        verified: report.pass,
        solver_status: sol.solver_status,
    })
}

/// `ν^(r)(G)`: direct minimization over the Q-cone.
pub fn nu_bound(g: &Graph, r: u32, opts: &MembershipOptions) -> Result<BoundResult> {
    direct_min(g, r, Layout::Q, Hierarchy::Nu, opts)
}

/// `ϑ^(r)(G)`: direct minimization over the K-cone, `r ≤ opts.k_level_cap`.
pub fn theta_bound(g: &Graph, r: u32, opts: &MembershipOptions) -> Result<BoundResult> {
    if r > opts.k_level_cap {
        return Err(CoposError::ResourceCap {
            what: "K-cone level",
            size: r as usize,
            limit: opts.k_level_cap as usize,
        });
    }
    direct_min(g, r, Layout::K, Hierarchy::Theta, opts)
}

/// Bisection of `t` with a monotone membership oracle. Starts from
/// `[1, n]`, widening the upper end while it is infeasible.
fn bisect(
    g: &Graph,
    r: u32,
    hierarchy: Hierarchy,
    t_tol: f64,
    probe: impl Fn(&SymMatrix) -> Result<MembershipVerdict>,
) -> Result<BoundResult> {
    let alpha = nonempty(g)?;
    if !(t_tol > 0.0) {
        return Err(CoposError::InvalidParameter(format!(
            "t_tol must be positive, got {t_tol}"
        )));
    }
    let n = g.n() as f64;
    let mut trace = Vec::new();
    let mut verified = true;
    let run = |t: f64, trace: &mut Vec<Probe>| -> Result<MembershipVerdict> {
        let v = probe(&g.m_matrix(Some(t))?)?;
        trace.push(Probe { t, verdict: v.status });
        Ok(v)
    };

    let mut lo = 1.0;
    let v = run(lo, &mut trace)?;
    if v.is_member() {
        return Ok(BoundResult {
            hierarchy,
            r,
            value: lo,
            alpha,
            tolerance: t_tol,
            certificate: v.certificate,
            search_trace: trace,
            verified,
            solver_status: v.solver_status,
        });
    }
    verified &= v.status != MembershipStatus::Unknown;

    let mut best;
    let mut last_status;
    let mut hi = n.max(1.0);
    loop {
        let v = run(hi, &mut trace)?;
        last_status = v.solver_status.clone();
        if v.is_member() {
            best = v.certificate;
            break;
        }
        verified &= v.status != MembershipStatus::Unknown;
        lo = hi;
        if hi >= n.max(1.0) * WIDEN_CAP {
            return Ok(BoundResult {
                hierarchy,
                r,
                value: f64::INFINITY,
                alpha,
                tolerance: t_tol,
                certificate: None,
                search_trace: trace,
                verified,
                solver_status: last_status,
            });
        }
        hi *= 2.0;
    }

    while hi - lo > t_tol {
        let mid = 0.5 * (lo + hi);
        let v = run(mid, &mut trace)?;
        match v.status {
            MembershipStatus::Member => {
                hi = mid;
                best = v.certificate;
                last_status = v.solver_status;
            }
            MembershipStatus::NotMember => lo = mid,
            MembershipStatus::Unknown => {
                verified = false;
                lo = mid;
            }
        }
    }
    Ok(BoundResult {
        hierarchy,
        r,
        value: hi,
        alpha,
        tolerance: t_tol,
        certificate: best,
        search_trace: trace,
        verified,
        solver_status: last_status,
    })
}

/// `ν̃^(r)(G)` by bisection with `qtilde_membership` probes.
pub fn nu_tilde_bound(
    g: &Graph,
    r: u32,
    t_tol: f64,
    opts: &MembershipOptions,
) -> Result<BoundResult> {
    bisect(g, r, Hierarchy::NuTilde, t_tol, |m| {
        qtilde_membership(m, r, opts)
    })
}

/// `ζ^(r)(G)` (fixed multiplier `(Σx)^r`) or `ζ̃^(r)(G)` (free multiplier)
/// by bisection with the LP cones.
pub fn zeta_bounds(
    g: &Graph,
    r: u32,
    fixed_multiplier: bool,
    t_tol: f64,
    opts: &MembershipOptions,
) -> Result<BoundResult> {
    if fixed_multiplier {
        bisect(g, r, Hierarchy::Zeta, t_tol, |m| c_membership(m, r, opts))
    } else {
        bisect(g, r, Hierarchy::ZetaTilde, t_tol, |m| {
            ctilde_membership(m, r, opts)
        })
    }
}

/// Dispatches on the hierarchy tag.
pub fn bound(
    hierarchy: Hierarchy,
    g: &Graph,
    r: u32,
    t_tol: f64,
    opts: &MembershipOptions,
) -> Result<BoundResult> {
    match hierarchy {
        Hierarchy::Nu => nu_bound(g, r, opts),
        Hierarchy::NuTilde => nu_tilde_bound(g, r, t_tol, opts),
        Hierarchy::Zeta => zeta_bounds(g, r, true, t_tol, opts),
        Hierarchy::ZetaTilde => zeta_bounds(g, r, false, t_tol, opts),
        Hierarchy::Theta => theta_bound(g, r, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn opts() -> MembershipOptions {
        MembershipOptions::default()
    }

    #[test]
    fn c5_nu() {
        let g = Family::Cycle(5).build().unwrap();
        let b0 = nu_bound(&g, 0, &opts()).unwrap();
        assert!((b0.value - 5f64.sqrt()).abs() < 1e-3, "{}", b0.value);
        assert!(b0.verified);
        let b1 = nu_bound(&g, 1, &opts()).unwrap();
        assert!((b1.value - 2.0).abs() < 1e-3, "{}", b1.value);
    }

    #[test]
    fn complete_graph_is_one() {
        let g = Family::Complete(4).build().unwrap();
        for fixed in [true, false] {
            let b = zeta_bounds(&g, 1, fixed, T_TOL, &opts()).unwrap();
            assert_eq!(b.value, 1.0);
        }
    }

    #[test]
    fn star_zeta_zero_is_infinite() {
        let g = Family::Star(3).build().unwrap();
        let b = zeta_bounds(&g, 0, true, T_TOL, &opts()).unwrap();
        assert!(b.value.is_infinite());
        let json = serde_json::to_string(&b).unwrap();
        let back: BoundResult = serde_json::from_str(&json).unwrap();
        assert!(back.value.is_infinite());
    }

    #[test]
    fn c5_nu_tilde_search() {
        let g = Family::Cycle(5).build().unwrap();
        let b = nu_tilde_bound(&g, 0, 1e-3, &opts()).unwrap();
        assert!((b.value - 5f64.sqrt()).abs() < 2e-3, "{}", b.value);
        assert!(b.largest_infeasible().unwrap() < b.value);
        assert_eq!(b.smallest_feasible(), Some(b.value));
    }

    #[test]
    fn theta_matches_nu_low_levels() {
        let g = Family::Cycle(5).build().unwrap();
        let t = theta_bound(&g, 1, &opts()).unwrap();
        assert!((t.value - 2.0).abs() < 1e-3);
        assert!(theta_bound(&g, 4, &opts()).is_err());
    }

    #[test]
    fn hierarchy_names() {
        for (s, h) in [
            ("nu", Hierarchy::Nu),
            ("nutilde", Hierarchy::NuTilde),
            ("zeta", Hierarchy::Zeta),
            ("zetatilde", Hierarchy::ZetaTilde),
            ("theta", Hierarchy::Theta),
        ] {
            assert_eq!(s.parse::<Hierarchy>().unwrap(), h);
        }
    }
}
