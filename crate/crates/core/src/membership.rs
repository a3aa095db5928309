//! Coefficient-matching systems for the cones H, Q^(r), K^(r), Q̃^(r),
//! C^(r) and C̃^(r).
//!
//! Every cone is an instance of one template: a left-hand polynomial of
//! degree `r+2` (fixed, affine in a free scalar `t`, or a free nonnegative
//! multiplier times a fixed form) is matched coefficient by coefficient
//! against `Σ x^β z_k^T P_β z_k + Σ c_A x^A`, where `z_k` are the monomials
//! of degree `k`, `P_β ⪰ 0` and `c_A ≥ 0`.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certificates;
use crate::conic::{FeasibilityProblem, ScalarKind, SolveResult, SolveStatus, Tolerances, Var};
use crate::error::{CoposError, Result};
use crate::matrix::SymMatrix;
use crate::poly::{monomials, HomPoly, Monomial, MonomialTable};

/// Largest level accepted by the K-cone variant by default.
pub const K_LEVEL_CAP: u32 = 3;
/// Residual tolerance used when re-verifying certificates of `member` verdicts.
pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cone {
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "Qtilde")]
    QTilde,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "C")]
    C,
    #[serde(rename = "Ctilde")]
    CTilde,
    #[serde(rename = "Q0")]
    Q0,
}

impl std::str::FromStr for Cone {
    type Err = CoposError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Q" | "q" => Cone::Q,
            "Qtilde" | "qtilde" => Cone::QTilde,
            "K" | "k" => Cone::K,
            "C" | "c" => Cone::C,
            "Ctilde" | "ctilde" => Cone::CTilde,
            "Q0" | "q0" => Cone::Q0,
            _ => return Err(CoposError::InvalidParameter(format!("unknown cone {s:?}"))),
        })
    }
}

/// One term `x^β z^T P z` with `z` the degree-`degree` monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct GramBlock {
    pub beta: Monomial,
    pub degree: u32,
    pub p: SymMatrix,
}

/// Data witnessing `multiplier · x^T M x = Σ x^β z^T P_β z + Σ c_A x^A`.
#[derive(Clone, Debug, PartialEq)]
pub struct SosCertificate {
    pub nvars: usize,
    pub r: u32,
    pub multiplier: HomPoly,
    pub gram: Vec<GramBlock>,
    /// Nonnegative monomial coefficients, keyed by exponent vector.
    pub c: Vec<(Monomial, f64)>,
}

impl SosCertificate {
    /// Certificate with no blocks; verifies only against forms that vanish.
    pub fn empty(nvars: usize, r: u32, multiplier: HomPoly) -> Self {
        Self {
            nvars,
            r,
            multiplier,
            gram: Vec::new(),
            c: Vec::new(),
        }
    }

    /// Level-0 certificate `x^T P x = x^T P x` for a psd matrix `P`.
    pub fn psd(p: &SymMatrix) -> Self {
        let n = p.dim();
        Self {
            nvars: n,
            r: 0,
            multiplier: HomPoly::constant(n, 1.0),
            gram: vec![GramBlock {
                beta: Monomial::one(n),
                degree: 1,
                p: p.clone(),
            }],
            c: Vec::new(),
        }
    }

    /// Certificate for `λM` from one for `M` (`λ ≥ 0`); the multiplier is kept.
    pub fn for_scaled_matrix(&self, lambda: f64) -> Self {
        let mut out = self.scaled(lambda);
        out.multiplier = self.multiplier.clone();
        out
    }

    /// The right-hand side `Σ x^β z^T P_β z + Σ c_A x^A`.
    pub fn sos_part(&self) -> HomPoly {
        let n = self.nvars;
        let mut out = HomPoly::zero(n, self.r + 2);
        let mut tables: HashMap<u32, Vec<Monomial>> = HashMap::new();
        for blk in &self.gram {
            let basis = tables
                .entry(blk.degree)
                .or_insert_with(|| monomials(n, blk.degree));
            for a in 0..basis.len() {
                for b in a..basis.len() {
                    let v = blk.p.get(a, b);
                    if v == 0.0 {
                        continue;
                    }
                    let w = if a == b { v } else { 2.0 * v };
                    out.add_term(blk.beta.mul(&basis[a]).mul(&basis[b]), w);
                }
            }
        }
        for (a, v) in &self.c {
            out.add_term(a.clone(), *v);
        }
        out
    }

    pub fn min_gram_eigenvalue(&self) -> f64 {
        self.gram
            .iter()
            .map(|b| b.p.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_c(&self) -> f64 {
        self.c.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min)
    }

    /// Multiplies the whole identity by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            nvars: self.nvars,
            r: self.r,
            multiplier: self.multiplier.scale(s),
            gram: self
                .gram
                .iter()
                .map(|b| GramBlock {
                    beta: b.beta.clone(),
                    degree: b.degree,
                    p: b.p.scale(s),
                })
                .collect(),
            c: self.c.iter().map(|(a, v)| (a.clone(), v * s)).collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("certificate serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct GramRepr {
    beta: Vec<u32>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    degree: u32,
    #[serde(rename = "P")]
    p: SymMatrix,
}

fn one() -> u32 {
    1
}

fn is_one(d: &u32) -> bool {
    *d == 1
}

#[derive(Serialize, Deserialize)]
struct CRepr {
    #[serde(rename = "A")]
    a: Vec<u32>,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct CertRepr {
    r: u32,
    multiplier: HomPoly,
    gram: Vec<GramRepr>,
    c: Vec<CRepr>,
}

impl Serialize for SosCertificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertRepr {
            r: self.r,
            multiplier: self.multiplier.clone(),
            gram: self
                .gram
                .iter()
                .map(|b| GramRepr {
                    beta: b.beta.exps().to_vec(),
                    degree: b.degree,
                    p: b.p.clone(),
                })
                .collect(),
            c: self
                .c
                .iter()
                .map(|(a, v)| CRepr {
                    a: a.exps().to_vec(),
                    value: *v,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SosCertificate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = CertRepr::deserialize(d)?;
        let n = repr.multiplier.nvars();
        if repr.multiplier.degree() != repr.r {
            return Err(D::Error::custom("multiplier degree differs from r"));
        }
        let mut gram = Vec::with_capacity(repr.gram.len());
        for g in repr.gram {
            let beta = Monomial::new(g.beta);
            let size = monomials(n, g.degree).len();
            if beta.nvars() != n || g.p.dim() != size {
                return Err(D::Error::custom("gram block shape does not match nvars"));
            }
            if beta.degree() + 2 * g.degree != repr.r + 2 {
                return Err(D::Error::custom("gram block degree does not add up to r+2"));
            }
            gram.push(GramBlock {
                beta,
                degree: g.degree,
                p: g.p,
            });
        }
        let mut c = Vec::with_capacity(repr.c.len());
        for e in repr.c {
            let a = Monomial::new(e.a);
            if a.nvars() != n || a.degree() != repr.r + 2 {
                return Err(D::Error::custom("c entry has the wrong shape"));
            }
            c.push((a, e.value));
        }
        Ok(SosCertificate {
            nvars: n,
            r: repr.r,
            multiplier: repr.multiplier,
            gram,
            c,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipStatus {
    Member,
    NotMember,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct MembershipVerdict {
    pub status: MembershipStatus,
    pub certificate: Option<SosCertificate>,
    pub margin: f64,
    /// Verification residual of the certificate, when one was produced.
    pub residual: Option<f64>,
    pub solver_status: String,
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        self.status == MembershipStatus::Member
    }

    pub fn is_not_member(&self) -> bool {
        self.status == MembershipStatus::NotMember
    }
}

#[derive(Clone, Copy, Debug)]
pub struct MembershipOptions {
    /// The matrix actually tested is `M + margin·I`.
    pub margin: f64,
    pub tols: Tolerances,
    pub verify_tol: f64,
    pub k_level_cap: u32,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self {
            margin: 0.0,
            tols: Tolerances::default(),
            verify_tol: VERIFY_TOL,
            k_level_cap: K_LEVEL_CAP,
        }
    }
}

impl MembershipOptions {
    pub fn with_margin(margin: f64) -> Self {
        Self {
            margin,
            ..Self::default()
        }
    }
}

/// Shape of the right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Layout {
    /// Blocks `|β| = r` of size n, plus `c_A` on square-free `A`.
    Q,
    /// Blocks for every `|β| ≤ r` with `|β| ≡ r (mod 2)`, plus square-free `c_A`.
    K,
    /// No blocks; `c_A` on every monomial of degree `r+2`.
    Lp,
}

/// The left-hand side of the identity.
#[derive(Clone, Debug)]
pub(crate) enum Lhs {
    Fixed(HomPoly),
    /// `base + t·dir` with a free scalar `t` that is minimized.
    Affine { base: HomPoly, dir: HomPoly },
    /// `p · form` with `p ∈ N_{n,r}`, `‖p‖₁ = 1`.
    FreeMultiplier { form: HomPoly, r: u32 },
}

pub(crate) struct SosProgram {
    pub problem: FeasibilityProblem,
    n: usize,
    r: u32,
    blocks: Vec<(Monomial, u32, usize)>,
    cvars: Vec<(Monomial, usize)>,
    mult: Vec<(Monomial, usize)>,
    pub t: Option<usize>,
    /// LP programs with a free multiplier maximize a common slack `s` in
    /// `c_A = u_A + s`, `u ≥ 0`; the cone test is then `s* ≥ 0`.
    slack: Option<usize>,
    fixed_multiplier: Option<HomPoly>,
}

impl SosProgram {
    pub(crate) fn build(
        n: usize,
        r: u32,
        layout: Layout,
        lhs: Lhs,
        fixed_multiplier: Option<HomPoly>,
    ) -> Result<Self> {
        let deg = r + 2;
        let table = MonomialTable::new(n, deg);
        let mut rows: Vec<Vec<(Var, f64)>> = vec![Vec::new(); table.len()];
        let mut rhs = vec![0.0; table.len()];
        let mut problem = FeasibilityProblem::new();
        let mut blocks = Vec::new();

        let mut block_degrees = Vec::new();
        match layout {
            Layout::Q => block_degrees.push(1u32),
            Layout::K => {
                let mut k = 1;
                while 2 * k <= deg {
                    block_degrees.push(k);
                    k += 1;
                }
            }
            Layout::Lp => {}
        }
        for &k in &block_degrees {
            let basis = monomials(n, k);
            for beta in monomials(n, deg - 2 * k) {
                let id = problem.add_block(basis.len());
                for a in 0..basis.len() {
                    for b in a..basis.len() {
                        let g = beta.mul(&basis[a]).mul(&basis[b]);
                        let row = table.get(&g).expect("monomial of degree r+2");
                        let w = if a == b { 1.0 } else { 2.0 };
                        rows[row].push((Var::Entry { block: id, i: a, j: b }, w));
                    }
                }
                blocks.push((beta, k, id));
            }
        }

        let slack = (layout == Layout::Lp && matches!(lhs, Lhs::FreeMultiplier { .. })).then(|| {
            let s = problem.add_scalar(ScalarKind::Free);
            let cap = problem.add_scalar(ScalarKind::Nonneg);
            problem.add_equality(vec![(Var::Scalar(s), 1.0), (Var::Scalar(cap), 1.0)], 1.0);
            problem.set_objective(vec![(Var::Scalar(s), -1.0)]);
            s
        });
        let mut cvars = Vec::new();
        for (row, g) in table.iter().enumerate() {
            if layout == Layout::Lp || g.is_square_free() {
                let s = problem.add_scalar(ScalarKind::Nonneg);
                rows[row].push((Var::Scalar(s), 1.0));
                if let Some(sl) = slack {
                    rows[row].push((Var::Scalar(sl), 1.0));
                }
                cvars.push((g.clone(), s));
            }
        }

        let mut mult = Vec::new();
        let mut t = None;
        match &lhs {
            Lhs::Fixed(f) => {
                check_shape(f, n, deg)?;
                for (m, c) in f.terms() {
                    rhs[table.get(m).expect("checked degree")] += c;
                }
            }
            Lhs::Affine { base, dir } => {
                check_shape(base, n, deg)?;
                check_shape(dir, n, deg)?;
                let tv = problem.add_scalar(ScalarKind::Free);
                for (m, c) in base.terms() {
                    rhs[table.get(m).expect("checked degree")] += c;
                }
                for (m, c) in dir.terms() {
                    rows[table.get(m).expect("checked degree")].push((Var::Scalar(tv), -c));
                }
                problem.set_objective(vec![(Var::Scalar(tv), 1.0)]);
                t = Some(tv);
            }
            Lhs::FreeMultiplier { form, r: pr } => {
                if form.nvars() != n || form.degree() + pr != deg {
                    return Err(CoposError::DegreeMismatch {
                        expected: deg,
                        got: form.degree() + pr,
                    });
                }
                let mut norm = Vec::new();
                for alpha in monomials(n, *pr) {
                    let s = problem.add_scalar(ScalarKind::Nonneg);
                    norm.push((Var::Scalar(s), 1.0));
                    for (m, c) in form.terms() {
                        let row = table.get(&alpha.mul(m)).expect("degree adds up");
                        rows[row].push((Var::Scalar(s), -c));
                    }
                    mult.push((alpha, s));
                }
                problem.add_equality(norm, 1.0);
            }
        }

        for (row, expr) in rows.into_iter().enumerate() {
            let expr = crate::conic::compact(expr);
            if expr.is_empty() && rhs[row] == 0.0 {
                continue;
            }
            problem.add_equality(expr, rhs[row]);
        }

        Ok(Self {
            problem,
            n,
            r,
            blocks,
            cvars,
            mult,
            t,
            slack,
            fixed_multiplier,
        })
    }

    pub(crate) fn certificate(&self, sol: &SolveResult) -> SosCertificate {
        let multiplier = match &self.fixed_multiplier {
            Some(p) => p.clone(),
            None => {
                let terms = self
                    .mult
                    .iter()
                    .map(|(a, s)| (a.clone(), sol.scalars[*s].max(0.0)));
                HomPoly::from_terms(self.n, self.r, terms).expect("multiplier shape")
            }
        };
        let gram = self
            .blocks
            .iter()
            .map(|(beta, k, id)| GramBlock {
                beta: beta.clone(),
                degree: *k,
                p: sol.blocks[*id].clone(),
            })
            .collect();
        let shift = self.slack.map_or(0.0, |s| sol.scalars[s]);
        let c = self
            .cvars
            .iter()
            .map(|(a, s)| (a.clone(), sol.scalars[*s] + shift))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        SosCertificate {
            nvars: self.n,
            r: self.r,
            multiplier,
            gram,
            c,
        }
    }
}

fn check_shape(f: &HomPoly, n: usize, deg: u32) -> Result<()> {
    if f.nvars() != n {
        return Err(CoposError::DimensionMismatch {
            expected: n,
            got: f.nvars(),
        });
    }
    if f.degree() != deg && !f.is_zero() {
        return Err(CoposError::DegreeMismatch {
            expected: deg,
            got: f.degree(),
        });
    }
    Ok(())
}

/// Solves a program and turns the outcome into a verdict, re-verifying the
/// certificate of any `member` answer against `m` (or against the fixed
/// polynomial when `m` is `None`).
fn decide(
    prog: &SosProgram,
    target: Target<'_>,
    opts: &MembershipOptions,
) -> Result<MembershipVerdict> {
    let sol = prog.problem.solve(&opts.tols)?;
    let mut verdict = MembershipVerdict {
        status: MembershipStatus::Unknown,
        certificate: None,
        margin: opts.margin,
        residual: None,
        solver_status: sol.solver_status.clone(),
    };
    let best_slack = prog.slack.map(|s| sol.scalars[s]);
    match sol.status {
        SolveStatus::Feasible if best_slack.is_some_and(|s| s < -opts.tols.feas_tol) => {
            verdict.status = MembershipStatus::NotMember;
            verdict.solver_status =
                format!("{} (best slack {:.3e})", sol.solver_status, best_slack.unwrap_or(0.0));
        }
        SolveStatus::Feasible => {
            let cert = prog.certificate(&sol);
            let report = match target {
                Target::Matrix(m) => certificates::verify(m, &cert, opts.verify_tol)?,
                Target::Poly(f) => certificates::verify_poly(f, &cert, opts.verify_tol)?,
            };
            verdict.residual = Some(report.residual_inf);
            if report.pass {
                verdict.status = MembershipStatus::Member;
            }
            verdict.certificate = Some(cert);
        }
        SolveStatus::Infeasible => verdict.status = MembershipStatus::NotMember,
        SolveStatus::Unknown => {}
    }
    // Every cone here sits inside COP, so a negative point settles it.
    if verdict.status != MembershipStatus::Member {
        if let Target::Matrix(m) = target {
            if verdict.status == MembershipStatus::Unknown && crate::copositivity::quick_witness(m).is_some() {
                verdict.status = MembershipStatus::NotMember;
                verdict.solver_status = format!("{} (negative point found)", verdict.solver_status);
            }
        }
    }
    Ok(verdict)
}

enum Target<'a> {
    Matrix(&'a SymMatrix),
    Poly(&'a HomPoly),
}

fn shifted(m: &SymMatrix, margin: f64) -> Result<SymMatrix> {
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(CoposError::InvalidParameter(format!(
            "margin must be a finite nonnegative number, got {margin}"
        )));
    }
    Ok(m.shift_diagonal(margin))
}

/// Is `f` (degree `r+2`) of the form `Σ_{|β|=r} x^β x^T P_β x + Σ c_A x^A`?
/// The returned certificate carries a zero multiplier; it is checked
/// against `f` itself.
pub fn h_membership(f: &HomPoly, r: u32, opts: &MembershipOptions) -> Result<MembershipVerdict> {
    h_membership_with_multiplier(f, r, None, opts)
}

pub(crate) fn h_membership_with_multiplier(
    f: &HomPoly,
    r: u32,
    multiplier: Option<HomPoly>,
    opts: &MembershipOptions,
) -> Result<MembershipVerdict> {
    if f.degree() != r + 2 && !f.is_zero() {
        return Err(CoposError::DegreeMismatch {
            expected: r + 2,
            got: f.degree(),
        });
    }
    let n = f.nvars();
    let mult = multiplier.unwrap_or_else(|| HomPoly::zero(n, r));
    let prog = SosProgram::build(n, r, Layout::Q, Lhs::Fixed(f.clone()), Some(mult))?;
    decide(&prog, Target::Poly(f), opts)
}

fn q_like(m: &SymMatrix, r: u32, layout: Layout, opts: &MembershipOptions) -> Result<MembershipVerdict> {
    let m = shifted(m, opts.margin)?;
    let n = m.dim();
    let s = HomPoly::simplex_power(n, r);
    let f = s.multiply(&HomPoly::quad_form(&m))?;
    let scale = s.norm1();
    let prog = SosProgram::build(n, r, layout, Lhs::Fixed(f.scale(1.0 / scale)), Some(s.scale(1.0 / scale)))?;
    decide(&prog, Target::Matrix(&m), opts)
}

/// `(Σx)^r x^T M x ∈ H_{n,r}`.
pub fn q_membership(m: &SymMatrix, r: u32, opts: &MembershipOptions) -> Result<MembershipVerdict> {
    q_like(m, r, Layout::Q, opts)
}

/// The K-cone: like Q but with SOS terms of every admissible degree.
pub fn k_membership(m: &SymMatrix, r: u32, opts: &MembershipOptions) -> Result<MembershipVerdict> {
    if r > opts.k_level_cap {
        return Err(CoposError::ResourceCap {
            what: "K-cone level",
            size: r as usize,
            limit: opts.k_level_cap as usize,
        });
    }
    q_like(m, r, Layout::K, opts)
}

/// `p · x^T M x ∈ H_{n,r}` for some `p ∈ N_{n,r}` with `‖p‖₁ = 1`.
pub fn qtilde_membership(
    m: &SymMatrix,
    r: u32,
    opts: &MembershipOptions,
) -> Result<MembershipVerdict> {
    let m = shifted(m, opts.margin)?;
    let lhs = Lhs::FreeMultiplier {
        form: HomPoly::quad_form(&m),
        r,
    };
    let prog = SosProgram::build(m.dim(), r, Layout::Q, lhs, None)?;
    decide(&prog, Target::Matrix(&m), opts)
}

/// `(Σx)^r x^T M x` has nonnegative coefficients. Decided exactly from
/// the expanded coefficients, without a solver.
pub fn c_membership(m: &SymMatrix, r: u32, opts: &MembershipOptions) -> Result<MembershipVerdict> {
    let m = shifted(m, opts.margin)?;
    let n = m.dim();
    let s = HomPoly::simplex_power(n, r);
    let scale = s.norm1();
    let f = s.multiply(&HomPoly::quad_form(&m))?.scale(1.0 / scale);
    let member = f.is_nonneg_coeffs(0.0);
    let certificate = member.then(|| SosCertificate {
        nvars: n,
        r,
        multiplier: s.scale(1.0 / scale),
        gram: Vec::new(),
        c: f.terms().map(|(a, v)| (a.clone(), v)).collect(),
    });
    Ok(MembershipVerdict {
        status: if member {
            MembershipStatus::Member
        } else {
            MembershipStatus::NotMember
        },
        certificate,
        margin: opts.margin,
        residual: member.then_some(0.0),
        solver_status: "exact".into(),
    })
}

/// `p · x^T M x` has nonnegative coefficients for some `p ∈ N_{n,r}`,
/// `‖p‖₁ = 1` (an LP).
pub fn ctilde_membership(
    m: &SymMatrix,
    r: u32,
    opts: &MembershipOptions,
) -> Result<MembershipVerdict> {
    let m = shifted(m, opts.margin)?;
    let lhs = Lhs::FreeMultiplier {
        form: HomPoly::quad_form(&m),
        r,
    };
    let prog = SosProgram::build(m.dim(), r, Layout::Lp, lhs, None)?;
    decide(&prog, Target::Matrix(&m), opts)
}

/// Outcome of the psd + nonnegative split.
#[derive(Clone, Debug)]
pub enum Q0Split {
    Split { p: SymMatrix, n: SymMatrix },
    NotMember,
    Unknown,
}

/// `M = P + N` with `P ⪰ 0` and `N ≥ 0`, when such a split exists.
pub fn q0_split(m: &SymMatrix, opts: &MembershipOptions) -> Result<Q0Split> {
    let v = q_membership(m, 0, opts)?;
    Ok(match v.status {
        MembershipStatus::Member => {
            let cert = v.certificate.expect("member verdicts carry a certificate");
            let dim = m.dim();
            let p = cert
                .gram
                .first()
                .map(|b| b.p.clone())
                .unwrap_or_else(|| SymMatrix::zeros(dim));
            // c on x_i x_j is 2·N_ij; N carries no diagonal.
            let mut nn = vec![vec![0.0; dim]; dim];
            for (a, val) in &cert.c {
                let s = a.support();
                if let [i, j] = s[..] {
                    nn[i][j] = val / 2.0;
                    nn[j][i] = val / 2.0;
                }
            }
            let n = SymMatrix::from_rows(&nn).expect("symmetric by construction");
            Q0Split::Split { p, n }
        }
        MembershipStatus::NotMember => Q0Split::NotMember,
        MembershipStatus::Unknown => Q0Split::Unknown,
    })
}

/// Dispatches on the cone tag.
pub fn membership(
    cone: Cone,
    m: &SymMatrix,
    r: u32,
    opts: &MembershipOptions,
) -> Result<MembershipVerdict> {
    match cone {
        Cone::Q => q_membership(m, r, opts),
        Cone::Q0 => q_membership(m, 0, opts),
        Cone::QTilde => qtilde_membership(m, r, opts),
        Cone::K => k_membership(m, r, opts),
        Cone::C => c_membership(m, r, opts),
        Cone::CTilde => ctilde_membership(m, r, opts),
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
    fn horn_levels() {
        let h = SymMatrix::horn();
        let v1 = q_membership(&h, 1, &opts()).unwrap();
        assert!(v1.is_member(), "{:?} {:?}", v1.status, v1.solver_status);
        assert!(v1.residual.unwrap() <= 1e-6);
        let v0 = q_membership(&h, 0, &opts()).unwrap();
        assert!(v0.is_not_member(), "{:?}", v0.solver_status);
        assert!(matches!(q0_split(&h, &opts()).unwrap(), Q0Split::NotMember));
    }

    #[test]
    fn h_membership_examples() {
        let s = HomPoly::simplex_power(2, 2);
        assert!(h_membership(&s, 0, &opts()).unwrap().is_member());
        let h = HomPoly::quad_form(&SymMatrix::horn());
        assert!(h_membership(&h, 0, &opts()).unwrap().is_not_member());
        let f = HomPoly::simplex_power(5, 1).multiply(&h).unwrap();
        assert!(h_membership(&f, 1, &opts()).unwrap().is_member());
        assert!(h_membership(&f, 0, &opts()).is_err());
    }

    #[test]
    fn c4_split() {
        let m = Family::Cycle(4).build().unwrap().m_matrix(Some(2.0)).unwrap();
        match q0_split(&m, &opts()).unwrap() {
            Q0Split::Split { p, n } => {
                assert!(p.min_eigenvalue() >= -1e-7);
                assert!(n.min_entry() >= -1e-7);
                assert!(p.add(&n).unwrap().max_abs_diff(&m) <= 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lp_cones() {
        let star = Family::Star(3).build().unwrap().m_matrix(Some(3.0)).unwrap();
        for r in 0..=2 {
            assert!(c_membership(&star, r, &opts()).unwrap().is_not_member());
            assert!(ctilde_membership(&star, r, &opts()).unwrap().is_not_member());
        }
        let z = SymMatrix::zeros(2);
        assert!(c_membership(&z, 3, &opts()).unwrap().is_member());
        let pos = SymMatrix::ones(3);
        assert!(ctilde_membership(&pos, 2, &opts()).unwrap().is_member());
    }

    #[test]
    fn certificate_json_roundtrip() {
        let v = q_membership(&SymMatrix::horn(), 1, &opts()).unwrap();
        let cert = v.certificate.unwrap();
        let s = serde_json::to_string(&cert).unwrap();
        let back: SosCertificate = serde_json::from_str(&s).unwrap();
        assert_eq!(back.gram.len(), cert.gram.len());
        assert!(certificates::verify(&SymMatrix::horn(), &back, 1e-6).unwrap().pass);
    }

    #[test]
    fn qtilde_nonconvexity() {
        let h = SymMatrix::horn();
        let z = SymMatrix::zeros(5);
        let a = qtilde_membership(&h.direct_sum(&z), 1, &opts()).unwrap();
        let b = qtilde_membership(&z.direct_sum(&h), 1, &opts()).unwrap();
        let c = qtilde_membership(&h.direct_sum(&h), 1, &opts()).unwrap();
        assert!(a.is_member() && b.is_member());
        assert!(c.is_not_member());
    }
}
