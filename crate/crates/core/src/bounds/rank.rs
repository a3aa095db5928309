//! Upper and lower bounds on the ranks of the ν and ν̃ hierarchies.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{FeasibilityProblem, ScalarKind, SolveStatus, Var};
use crate::error::{CoposError, Result};
use crate::graph::{Graph, StableMode};
use crate::membership::{q0_split, qtilde_membership, MembershipOptions, MembershipStatus, Q0Split};
use crate::poly::HomPoly;

/// Offset above `α` at which rank probes test feasibility.
pub const RANK_EPS: f64 = 1e-3;
/// Upper limit on nodes visited by the recursive rank bound.
pub const RECURSION_CAP: usize = 20_000;
/// Upper limit on monomials in a constructed multiplier.
pub const MULTIPLIER_TERM_CAP: f64 = 5e6;

const D_TOL: f64 = 1e-9;

/// Nonnegative weights on the vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DVector(pub Vec<f64>);

impl DVector {
    pub fn ones(n: usize) -> Self {
        DVector(vec![1.0; n])
    }

    pub fn indicator(n: usize, set: &[usize]) -> Self {
        let mut d = vec![0.0; n];
        for &i in set {
            d[i] = 1.0;
        }
        DVector(d)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IneqD {
    Valid,
    /// Triples `(i, j, k)` with `i` adjacent to both `j < k`, `j`, `k`
    /// non-adjacent and `d_j + d_k < d_i`.
    Violations(Vec<(usize, usize, usize)>),
}

impl IneqD {
    pub fn is_valid(&self) -> bool {
        matches!(self, IneqD::Valid)
    }
}

/// Induced paths `j - i - k`.
fn cherries(g: &Graph) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..g.n() {
        let nb: Vec<usize> = g.neighbors(i).collect();
        for (a, &j) in nb.iter().enumerate() {
            for &k in &nb[a + 1..] {
                if !g.adjacent(j, k) {
                    out.push((i, j.min(k), j.max(k)));
                }
            }
        }
    }
    out
}

pub fn check_ineq_d(g: &Graph, d: &DVector) -> Result<IneqD> {
    if d.0.len() != g.n() {
        return Err(CoposError::DimensionMismatch {
            expected: g.n(),
            got: d.0.len(),
        });
    }
    if d.0.iter().any(|&v| !(v >= 0.0)) {
        return Err(CoposError::InvalidParameter(
            "d must be a nonnegative vector".into(),
        ));
    }
    let bad: Vec<_> = cherries(g)
        .into_iter()
        .filter(|&(i, j, k)| d.0[j] + d.0[k] < d.0[i] - D_TOL)
        .collect();
    Ok(if bad.is_empty() {
        IneqD::Valid
    } else {
        IneqD::Violations(bad)
    })
}

/// Searches for a valid `d` by linear programming. With a target, asks for
/// `d_i ≥ 1` on it; without one, maximizes `Σ min(d_i, 1)`. Vertices in
/// `forced_zero` get weight 0.
pub fn find_d(
    g: &Graph,
    target: Option<&[usize]>,
    forced_zero: &[usize],
    opts: &MembershipOptions,
) -> Result<Option<DVector>> {
    let n = g.n();
    if n == 0 {
        return Ok(None);
    }
    if let Some(&v) = target
        .unwrap_or(&[])
        .iter()
        .chain(forced_zero)
        .find(|&&v| v >= n)
    {
        return Err(CoposError::InvalidParameter(format!(
            "vertex {v} out of range 0..{n}"
        )));
    }
    let mut p = FeasibilityProblem::new();
    let d: Vec<usize> = (0..n).map(|_| p.add_scalar(ScalarKind::Nonneg)).collect();
    for (i, j, k) in cherries(g) {
        let s = p.add_scalar(ScalarKind::Nonneg);
        p.add_equality(
            vec![
                (Var::Scalar(d[j]), 1.0),
                (Var::Scalar(d[k]), 1.0),
                (Var::Scalar(d[i]), -1.0),
                (Var::Scalar(s), -1.0),
            ],
            0.0,
        );
    }
    for &v in forced_zero {
        p.add_equality(vec![(Var::Scalar(d[v]), 1.0)], 0.0);
    }
    match target {
        Some(set) => {
            for &v in set {
                let s = p.add_scalar(ScalarKind::Nonneg);
                p.add_equality(vec![(Var::Scalar(d[v]), 1.0), (Var::Scalar(s), -1.0)], 1.0);
            }
        }
        None => {
            let mut obj = Vec::new();
            for &dv in &d {
                // u ≤ 1 and u ≤ d, u free.
                let u = p.add_scalar(ScalarKind::Free);
                let s1 = p.add_scalar(ScalarKind::Nonneg);
                let s2 = p.add_scalar(ScalarKind::Nonneg);
                p.add_equality(vec![(Var::Scalar(u), 1.0), (Var::Scalar(s1), 1.0)], 1.0);
                p.add_equality(
                    vec![(Var::Scalar(u), 1.0), (Var::Scalar(s2), 1.0), (Var::Scalar(dv), -1.0)],
                    0.0,
                );
                obj.push((Var::Scalar(u), -1.0));
            }
            p.set_objective(obj);
        }
    }
    let sol = p.solve(&opts.tols)?;
    if sol.status != SolveStatus::Feasible {
        return Ok(None);
    }
    let mut raw: Vec<f64> = d.iter().map(|&v| sol.scalars[v]).collect();
    let scale = raw.iter().cloned().fold(0.0, f64::max);
    if scale <= 1e-6 {
        return Ok(None);
    }
    for v in raw.iter_mut() {
        *v = if *v < 1e-7 * scale { 0.0 } else { *v };
    }
    for &v in forced_zero {
        raw[v] = 0.0;
    }
    let cand = DVector(raw);
    Ok(check_ineq_d(g, &cand)?.is_valid().then_some(cand))
}

/// `ν̃-rank(G) = 0`: `χ̄(G) = α(G)`, or a psd + nonnegative split of
/// `M_G` at `t = α + RANK_EPS`. An unknown solver answer counts as false.
pub fn rank0_test(g: &Graph, opts: &MembershipOptions) -> Result<bool> {
    if g.n() == 0 {
        return Ok(true);
    }
    let alpha = g.alpha()?;
    if g.clique_cover_number()? == alpha {
        return Ok(true);
    }
    let m = g.m_matrix(Some(alpha as f64 + RANK_EPS))?;
    Ok(matches!(q0_split(&m, opts)?, Q0Split::Split { .. }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankKind {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankOf {
    Nu,
    NuTilde,
}

/// How `ν̃-rank` of a subgraph was bounded in the recursion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionNode {
    /// Vertex labels in the top-level graph.
    pub vertices: Vec<usize>,
    pub bound: u64,
    /// One of `empty`, `rank0`, `rank1`, `components`, `recursive`, `memo`.
    pub method: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<RecursionNode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    StableSet {
        set: Vec<usize>,
    },
    DVector {
        d: DVector,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tree: Option<RecursionNode>,
    },
    Formula {
        tag: String,
        value: f64,
    },
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub kind: RankKind,
    pub rank: RankOf,
    pub bound: u64,
    pub witness: Witness,
    pub verified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// The sufficient condition for `ν̃-rank ≤ 1`: every `G \ i^⊥` with
/// `i ∈ S` has rank 0, and no `k ∈ S` is a common neighbour of two
/// non-adjacent vertices outside `S`. With `s = None`, starts from all
/// vertices passing the first test and greedily drops centres of
/// offending paths.
pub fn rank1_sufficient(
    g: &Graph,
    s: Option<&[usize]>,
    opts: &MembershipOptions,
) -> Result<Option<RankReport>> {
    let n = g.n();
    let rank0_local = |i: usize| -> Result<bool> { rank0_test(&g.delete_extended_neighborhood(&[i]).0, opts) };
    let mut in_s = vec![false; n];
    match s {
        Some(set) => {
            for &i in set {
                if i >= n {
                    return Err(CoposError::InvalidParameter(format!(
                        "vertex {i} out of range 0..{n}"
                    )));
                }
                in_s[i] = true;
            }
            for &i in set {
                if !rank0_local(i)? {
                    return Ok(None);
                }
            }
        }
        None => {
            let flags: Vec<bool> = (0..n)
                .into_par_iter()
                .map(rank0_local)
                .collect::<Result<_>>()?;
            in_s = flags;
        }
    }
    let paths = cherries(g);
    loop {
        let mut count = vec![0usize; n];
        for &(i, j, k) in &paths {
            if in_s[i] && !in_s[j] && !in_s[k] {
                count[i] += 1;
            }
        }
        let worst = (0..n).max_by_key(|&v| (count[v], std::cmp::Reverse(v)));
        match worst {
            Some(v) if count[v] > 0 => {
                if s.is_some() {
                    return Ok(None);
                }
                in_s[v] = false;
            }
            _ => break,
        }
    }
    let set: Vec<usize> = (0..n).filter(|&v| in_s[v]).collect();
    if set.is_empty() {
        return Ok(None);
    }
    Ok(Some(RankReport {
        kind: RankKind::Upper,
        rank: RankOf::NuTilde,
        bound: 1,
        witness: Witness::DVector {
            d: DVector::indicator(n, &set),
            tree: None,
        },
        verified: true,
        note: None,
    }))
}

type Memo = HashMap<u64, Vec<(Graph, u64)>>;

struct Recursion<'a> {
    memo: Memo,
    visited: usize,
    opts: &'a MembershipOptions,
}

impl Recursion<'_> {
    fn node(&mut self, h: &Graph, labels: &[usize]) -> Result<RecursionNode> {
        self.visited += 1;
        if self.visited > RECURSION_CAP {
            return Err(CoposError::ResourceCap {
                what: "recursive rank bound nodes",
                size: self.visited,
                limit: RECURSION_CAP,
            });
        }
        let leaf = |bound, method: &str| RecursionNode {
            vertices: labels.to_vec(),
            bound,
            method: method.into(),
            children: Vec::new(),
        };
        if h.n() == 0 {
            return Ok(leaf(0, "empty"));
        }
        let key = h.fingerprint();
        if let Some(hit) = self
            .memo
            .get(&key)
            .and_then(|v| v.iter().find(|(k, _)| k == h))
        {
            return Ok(leaf(hit.1, "memo"));
        }
        let node = if rank0_test(h, self.opts)? {
            leaf(0, "rank0")
        } else if !h.is_connected() {
            let mut children = Vec::new();
            for comp in h.components() {
                let (sub, map) = h.induced(&comp);
                let sub_labels: Vec<usize> = map.iter().map(|&v| labels[v]).collect();
                children.push(self.node(&sub, &sub_labels)?);
            }
            RecursionNode {
                vertices: labels.to_vec(),
                bound: children.iter().map(|c| c.bound).sum(),
                method: "components".into(),
                children,
            }
        } else if rank1_sufficient(h, None, self.opts)?.is_some() {
            leaf(1, "rank1")
        } else {
            let all: Vec<usize> = (0..h.n()).collect();
            self.expand(h, labels, &all)?
        };
        self.memo.entry(key).or_default().push((h.clone(), node.bound));
        Ok(node)
    }

    /// `1 + Σ_{i ∈ support} bound(G \ i^⊥)`.
    fn expand(&mut self, h: &Graph, labels: &[usize], support: &[usize]) -> Result<RecursionNode> {
        let mut children = Vec::new();
        for &i in support {
            let (sub, map) = h.delete_extended_neighborhood(&[i]);
            let sub_labels: Vec<usize> = map.iter().map(|&v| labels[v]).collect();
            children.push(self.node(&sub, &sub_labels)?);
        }
        Ok(RecursionNode {
            vertices: labels.to_vec(),
            bound: 1 + children.iter().map(|c| c.bound).sum::<u64>(),
            method: "recursive".into(),
            children,
        })
    }
}

/// `ν̃-rank(G) ≤ 1 + Σ_{d_i > 0} ν̃-rank(G \ i^⊥)`, with the subgraph ranks
/// bounded recursively.
pub fn rank_recursive_upper(
    g: &Graph,
    d: &DVector,
    opts: &MembershipOptions,
) -> Result<RankReport> {
    if let IneqD::Violations(v) = check_ineq_d(g, d)? {
        return Err(CoposError::Precondition(format!(
            "d violates the path inequalities at {v:?}"
        )));
    }
    if d.is_zero() {
        return Err(CoposError::Precondition("d must be nonzero".into()));
    }
    let labels: Vec<usize> = (0..g.n()).collect();
    let mut rec = Recursion {
        memo: Memo::new(),
        visited: 0,
        opts,
    };
    let tree = if rank0_test(g, opts)? {
        RecursionNode {
            vertices: labels,
            bound: 0,
            method: "rank0".into(),
            children: Vec::new(),
        }
    } else {
        rec.expand(g, &labels, &d.support())?
    };
    Ok(RankReport {
        kind: RankKind::Upper,
        rank: RankOf::NuTilde,
        bound: tree.bound,
        witness: Witness::DVector {
            d: d.clone(),
            tree: Some(tree),
        },
        verified: true,
        note: None,
    })
}

/// `⌊((n + α) / α)^α⌋`, exactly when it fits in 128 bits.
fn general_formula(n: u64, alpha: u64) -> f64 {
    let pow = |b: u64| -> Option<u128> {
        (0..alpha).try_fold(1u128, |acc, _| acc.checked_mul(b as u128))
    };
    match (pow(n + alpha), pow(alpha)) {
        (Some(num), Some(den)) => (num / den) as f64,
        _ => ((n as f64 / alpha as f64) + 1.0).powi(alpha as i32).floor(),
    }
}

fn imax_formula(alpha: u64, imax: u64) -> f64 {
    (alpha * alpha) as f64 + 2f64.powi(alpha as i32) * imax as f64
}

fn formula_report(tag: &str, value: f64, note: Option<String>) -> RankReport {
    RankReport {
        kind: RankKind::Upper,
        rank: RankOf::NuTilde,
        bound: if value >= u64::MAX as f64 {
            u64::MAX
        } else {
            value as u64
        },
        witness: Witness::Formula {
            tag: tag.into(),
            value,
        },
        verified: true,
        note,
    }
}

/// Best cheap upper bound for one connected graph: 0, 1, or the smaller
/// closed form.
fn component_upper(g: &Graph, opts: &MembershipOptions) -> Result<u64> {
    if rank0_test(g, opts)? {
        return Ok(0);
    }
    if rank1_sufficient(g, None, opts)?.is_some() {
        return Ok(1);
    }
    let alpha = g.alpha()? as u64;
    let imax = g.stable_sets(StableMode::MaximumOnly)?.sets.len() as u64;
    let v = general_formula(g.n() as u64, alpha).min(imax_formula(alpha, imax));
    Ok(v as u64)
}

/// The two closed-form upper bounds on `ν̃-rank`, plus the sum over
/// connected components when the graph is disconnected.
pub fn rank_formula_bounds(g: &Graph, opts: &MembershipOptions) -> Result<Vec<RankReport>> {
    let alpha = g.alpha()? as u64;
    if alpha == 0 {
        return Err(CoposError::InvalidParameter(
            "rank bounds are undefined for the empty graph".into(),
        ));
    }
    let n = g.n() as u64;
    let imax = g.stable_sets(StableMode::MaximumOnly)?.sets.len() as u64;
    let mut out = vec![
        formula_report("general", general_formula(n, alpha), None),
        formula_report(
            "imax",
            imax_formula(alpha, imax),
            Some(format!("|I^max| = {imax}")),
        ),
    ];
    if !g.is_connected() {
        let mut parts = Vec::new();
        for comp in g.components() {
            parts.push(component_upper(&g.induced(&comp).0, opts)?);
        }
        let total: u64 = parts.iter().sum();
        out.push(formula_report(
            "component_sum",
            total as f64,
            Some(format!("component bounds {parts:?}")),
        ));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum LowerCert {
    Valid(RankReport),
    Invalid { reason: String },
}

impl LowerCert {
    pub fn report(&self) -> Option<&RankReport> {
        match self {
            LowerCert::Valid(r) => Some(r),
            LowerCert::Invalid { .. } => None,
        }
    }
}

fn subsets(set: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(set: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..set.len() {
            cur.push(set[i]);
            go(set, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(set, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Lower bound `ν-rank(G) ≥ |S| - 1` from a stable set with
/// `α(G \ S^⊥) = α(G) - |S|` and `(G \ S'^⊥)_c` connected for every
/// `S' ⊆ S` of size `|S| - 2`.
pub fn rank_lower_cert(g: &Graph, s: &[usize]) -> Result<LowerCert> {
    if s.iter().any(|&v| v >= g.n()) || !g.is_stable(s) {
        return Err(CoposError::InvalidParameter(format!(
            "{s:?} is not a stable set of the graph"
        )));
    }
    let mut set = s.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.len() <= 1 {
        return Ok(LowerCert::Valid(RankReport {
            kind: RankKind::Lower,
            rank: RankOf::Nu,
            bound: 0,
            witness: Witness::StableSet { set },
            verified: true,
            note: Some("trivial".into()),
        }));
    }
    if !g.extends_to_maximum(&set)? {
        return Ok(LowerCert::Invalid {
            reason: "alpha(G \\ S^perp) != alpha(G) - |S|".into(),
        });
    }
    for sub in subsets(&set, set.len() - 2) {
        let (rest, _) = g.delete_extended_neighborhood(&sub);
        if !rest.critical_subgraph_connected()? {
            return Ok(LowerCert::Invalid {
                reason: format!("critical graph of G \\ {sub:?}^perp is disconnected"),
            });
        }
    }
    Ok(LowerCert::Valid(RankReport {
        kind: RankKind::Lower,
        rank: RankOf::Nu,
        bound: set.len() as u64 - 1,
        witness: Witness::StableSet { set },
        verified: true,
        note: None,
    }))
}

/// Best lower certificate over stable sets of size at most `size_cap`,
/// tried from the largest size down.
pub fn rank_lower_search(g: &Graph, size_cap: usize) -> Result<RankReport> {
    let fam = g.stable_sets(StableMode::AllUpToAlpha)?;
    let top = size_cap.min(fam.alpha);
    for size in (2..=top).rev() {
        let cands: Vec<&Vec<usize>> = fam.sets.iter().filter(|s| s.len() == size).collect();
        let found = cands
            .par_iter()
            .map(|s| rank_lower_cert(g, s))
            .find_map_first(|r| match r {
                Ok(LowerCert::Valid(rep)) => Some(Ok(rep)),
                Ok(LowerCert::Invalid { .. }) => None,
                Err(e) => Some(Err(e)),
            });
        if let Some(r) = found {
            return r;
        }
    }
    Ok(RankReport {
        kind: RankKind::Lower,
        rank: RankOf::Nu,
        bound: 0,
        witness: Witness::None,
        verified: true,
        note: Some(format!("no valid stable set up to size {top}")),
    })
}

/// Confirms `ν̃-rank ≤ r` at precision `RANK_EPS`:
/// `M` at `t = α + RANK_EPS` lies in `Q̃^(r)`.
pub fn rank_upper_probe(g: &Graph, r: u32, opts: &MembershipOptions) -> Result<MembershipStatus> {
    let m = g.m_matrix(Some(g.alpha()? as f64 + RANK_EPS))?;
    Ok(qtilde_membership(&m, r, opts)?.status)
}

/// A constructed multiplier together with the stable sets indexing its
/// linear factors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Multiplier {
    pub poly: HomPoly,
    pub degree: u32,
    /// Degree predicted by the counting argument.
    pub formula_degree: u64,
    pub sets: Vec<Vec<usize>>,
}

fn binom(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `m_{S,d} = Σ_{i ∉ S^⊥} d_i x_i`, or 1 when `S^⊥ = V`.
fn m_factor(g: &Graph, s: &[usize], d: &[f64]) -> HomPoly {
    let n = g.n();
    let closed = g.extended_neighborhood(s);
    if closed.len() == n {
        return HomPoly::constant(n, 1.0);
    }
    let mut c = vec![0.0; n];
    for i in 0..n {
        if closed.binary_search(&i).is_err() {
            c[i] = d[i];
        }
    }
    HomPoly::linear(&c)
}

fn product(n: usize, factors: &[HomPoly]) -> Result<HomPoly> {
    let degree: u32 = factors.iter().map(HomPoly::degree).sum();
    let terms = binom(n as u64 + degree as u64 - 1, degree as u64);
    if n > 0 && terms > MULTIPLIER_TERM_CAP {
        return Err(CoposError::ResourceCap {
            what: "multiplier monomials",
            size: terms as usize,
            limit: MULTIPLIER_TERM_CAP as usize,
        });
    }
    factors
        .iter()
        .try_fold(HomPoly::constant(n, 1.0), |acc, f| acc.multiply(f))
}

/// `∏_{S ∈ I⁻(G[supp d])} m_{S,d}`, after checking that `d` is valid and
/// that `G \ S^⊥` has rank 0 for every stable `S` with `supp d ⊆ S^⊥`.
pub fn multiplier_theorem(g: &Graph, d: &DVector, opts: &MembershipOptions) -> Result<Multiplier> {
    if let IneqD::Violations(v) = check_ineq_d(g, d)? {
        return Err(CoposError::Precondition(format!(
            "d violates the path inequalities at {v:?}"
        )));
    }
    if d.is_zero() {
        return Err(CoposError::Precondition("d must be nonzero".into()));
    }
    let support = d.support();
    for s in g.stable_sets(StableMode::AllUpToAlpha)?.sets {
        let closed = g.extended_neighborhood(&s);
        if support.iter().all(|v| closed.binary_search(v).is_ok())
            && !rank0_test(&g.delete_vertices(&closed).0, opts)?
        {
            return Err(CoposError::Precondition(format!(
                "G \\ {s:?}^perp does not have rank 0"
            )));
        }
    }
    let (sub, map) = g.induced(&support);
    let sets: Vec<Vec<usize>> = sub
        .stable_sets(StableMode::StrictlyBelowAlpha)?
        .sets
        .into_iter()
        .map(|s| s.into_iter().map(|v| map[v]).collect())
        .collect();
    let factors: Vec<HomPoly> = sets.iter().map(|s| m_factor(g, s, &d.0)).collect();
    let poly = product(g.n(), &factors)?;
    Ok(Multiplier {
        degree: poly.degree(),
        formula_degree: sets.len() as u64,
        poly,
        sets,
    })
}

/// `m_∅^{α²} ∏_{U ∈ I^max} ∏_{S ⊆ U} m_S` with unit weights. Factors with
/// `S^⊥ = V` (in particular `S = U`) equal 1, so the actual degree can be
/// below the counting bound `α² + 2^α |I^max|`.
pub fn multiplier_imax(g: &Graph) -> Result<Multiplier> {
    let n = g.n();
    let fam = g.stable_sets(StableMode::MaximumOnly)?;
    let alpha = fam.alpha;
    let ones = vec![1.0; n];
    let mut sets = vec![Vec::new(); alpha * alpha];
    for u in &fam.sets {
        for mask in 0u64..(1u64 << u.len()) {
            sets.push(
                (0..u.len())
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| u[b])
                    .collect(),
            );
        }
    }
    let factors: Vec<HomPoly> = sets.iter().map(|s| m_factor(g, s, &ones)).collect();
    let poly = product(n, &factors)?;
    Ok(Multiplier {
        degree: poly.degree(),
        formula_degree: imax_formula(alpha as u64, fam.sets.len() as u64) as u64,
        poly,
        sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, GRAPH_B_MARKED, GRAPH_C_MARKED};

    fn opts() -> MembershipOptions {
        MembershipOptions::default()
    }

    fn path3() -> Graph {
        Graph::new(3, [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn ineq_d() {
        let g = path3();
        assert!(check_ineq_d(&g, &DVector::ones(3)).unwrap().is_valid());
        assert_eq!(
            check_ineq_d(&g, &DVector(vec![0.0, 1.0, 0.0])).unwrap(),
            IneqD::Violations(vec![(1, 0, 2)])
        );
        let b = Family::GraphB.build().unwrap();
        let d = DVector::indicator(b.n(), &GRAPH_B_MARKED);
        assert!(check_ineq_d(&b, &d).unwrap().is_valid());
    }

    #[test]
    fn find_d_cases() {
        let c5 = Family::Cycle(5).build().unwrap();
        let all: Vec<usize> = (0..5).collect();
        assert!(find_d(&c5, Some(&all), &[], &opts()).unwrap().is_some());
        let star = Family::Star(3).build().unwrap();
        assert!(find_d(&star, Some(&[0]), &[1, 2, 3], &opts()).unwrap().is_none());
        let c = Family::GraphC.build().unwrap();
        assert!(find_d(&c, Some(&GRAPH_C_MARKED), &[], &opts()).unwrap().is_some());
        let free = find_d(&c5, None, &[], &opts()).unwrap().unwrap();
        assert!(check_ineq_d(&c5, &free).unwrap().is_valid());
    }

    #[test]
    fn rank0_examples() {
        assert!(rank0_test(&Family::Cycle(4).build().unwrap(), &opts()).unwrap());
        assert!(!rank0_test(&Family::Cycle(5).build().unwrap(), &opts()).unwrap());
    }

    #[test]
    fn rank1_examples() {
        let c5 = Family::Cycle(5).build().unwrap();
        let all: Vec<usize> = (0..5).collect();
        assert!(rank1_sufficient(&c5, Some(&all), &opts()).unwrap().is_some());
        let b = Family::GraphB.build().unwrap();
        assert!(rank1_sufficient(&b, Some(&GRAPH_B_MARKED), &opts()).unwrap().is_some());
        assert!(rank1_sufficient(&b, None, &opts()).unwrap().is_some());
    }

    #[test]
    fn recursion() {
        let c5 = Family::Cycle(5).build().unwrap();
        let r = rank_recursive_upper(&c5, &DVector::ones(5), &opts()).unwrap();
        assert_eq!(r.bound, 1);
        let c4 = Family::Cycle(4).build().unwrap();
        assert_eq!(rank_recursive_upper(&c4, &DVector::ones(4), &opts()).unwrap().bound, 0);
        let g2 = Family::Gk(2).build().unwrap();
        let d = DVector::indicator(g2.n(), &Family::gk_uv(2));
        assert_eq!(rank_recursive_upper(&g2, &d, &opts()).unwrap().bound, 1);
        assert!(rank_recursive_upper(&path3(), &DVector(vec![0.0, 1.0, 0.0]), &opts()).is_err());
    }

    #[test]
    fn formulas() {
        let c5 = Family::Cycle(5).build().unwrap();
        let r = rank_formula_bounds(&c5, &opts()).unwrap();
        assert_eq!(r[0].bound, 12);
        assert_eq!(r[1].bound, 24);
        assert_eq!(r.len(), 2);
        let k4 = Family::Complete(4).build().unwrap();
        let r = rank_formula_bounds(&k4, &opts()).unwrap();
        assert_eq!((r[0].bound, r[1].bound), (5, 9));
        let cc = c5.disjoint_union(&c5);
        let r = rank_formula_bounds(&cc, &opts()).unwrap();
        assert_eq!(r[2].bound, 2);
    }

    #[test]
    fn lower_certs() {
        let c4 = Family::Cycle(4).build().unwrap();
        assert!(rank_lower_cert(&c4, &[0, 2]).unwrap().report().is_none());
        let g3 = Family::Gk(3).build().unwrap();
        let rep = rank_lower_cert(&g3, &Family::gk_w_set(3)).unwrap();
        assert_eq!(rep.report().unwrap().bound, 2);
        assert!(rank_lower_cert(&c4, &[0, 1]).is_err());
        assert_eq!(rank_lower_search(&g3, 4).unwrap().bound, 2);
        assert_eq!(rank_lower_search(&c4, 4).unwrap().bound, 0);
    }

    #[test]
    fn multipliers() {
        let k1 = Graph::empty(1);
        let m = multiplier_theorem(&k1, &DVector::ones(1), &opts()).unwrap();
        assert_eq!(m.poly, HomPoly::var(1, 0));
        let c5 = Family::Cycle(5).build().unwrap();
        let m = multiplier_theorem(&c5, &DVector::ones(5), &opts()).unwrap();
        assert_eq!(m.degree, 6);
        let x = [0.3, 0.1, 0.7, 0.2, 0.5];
        let s: f64 = x.iter().sum();
        let direct = s * (0..5)
            .map(|i| x[(i + 2) % 5] + x[(i + 3) % 5])
            .product::<f64>();
        assert!((m.poly.eval(&x) - direct).abs() < 1e-12);
        let mi = multiplier_imax(&c5).unwrap();
        assert_eq!(mi.formula_degree, 24);
        assert_eq!(mi.degree, 19);
    }
}
