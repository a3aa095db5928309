//! Scripted experiments with JSON and markdown reports.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounds::{
    nu_bound, nu_tilde_bound, rank0_test, rank1_sufficient, rank_lower_cert, zeta_bounds,
    BoundResult, RANK_EPS, T_TOL,
};
use crate::certificates::{form_zeros, kernel_check};
use crate::conic::Tolerances;
use crate::copositivity::{cop5_test, oracle_with_margin, CopVerdict, COP5_MARGIN, ORACLE_DEPTH};
use crate::error::{CoposError, Result};
use crate::graph::{Family, Graph, GRAPH_B_MARKED, GRAPH_C_MARKED};
use crate::matrix::SymMatrix;
use crate::membership::{
    ctilde_membership, q0_split, q_membership, qtilde_membership, MembershipOptions, Q0Split,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Seed of the random agreement experiments.
pub const SEED: u64 = 20240917;
/// Robustness margin of the oracle in the agreement experiments.
pub const AGREEMENT_MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Horn,
    Icosahedron,
    Bc,
    Gk(usize),
    Lk(usize),
    StarZeta,
    Cop4Agreement,
    Nonconvexity,
}

impl Experiment {
    pub fn parse(name: &str, k: Option<usize>) -> Result<Self> {
        let need_k = || {
            k.ok_or_else(|| CoposError::InvalidParameter(format!("experiment {name} needs K")))
        };
        Ok(match name {
            "horn" => Experiment::Horn,
            "icosahedron" => Experiment::Icosahedron,
            "bc" => Experiment::Bc,
            "gk" => Experiment::Gk(need_k()?),
            "lk" => Experiment::Lk(need_k()?),
            "star-zeta" => Experiment::StarZeta,
            "cop4-agreement" => Experiment::Cop4Agreement,
            "nonconvexity" => Experiment::Nonconvexity,
            _ => {
                return Err(CoposError::InvalidParameter(format!(
                    "unknown experiment {name:?}"
                )))
            }
        })
    }

    pub fn slug(&self) -> String {
        match self {
            Experiment::Gk(k) => format!("gk{k}"),
            Experiment::Lk(k) => format!("lk{k}"),
            other => serde_json::to_value(other)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub tool_version: String,
    pub tolerances: Tolerances,
    pub t_tol: f64,
    pub checks: Vec<Check>,
    /// Search traces and other raw outputs, keyed by check name.
    pub data: Vec<(String, Value)>,
    pub pass: bool,
}

/// Rounds every float in a JSON value to 12 significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| !n.is_i64() && !n.is_u64()) {
                let r: f64 = format!("{f:.11e}").parse().unwrap_or(f);
                if let Some(num) = serde_json::Number::from_f64(r) {
                    *n = num;
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Formats a float with 12 significant digits.
pub fn fmt12(f: f64) -> String {
    if !f.is_finite() {
        return if f > 0.0 { "inf".into() } else if f < 0.0 { "-inf".into() } else { "nan".into() };
    }
    let r: f64 = format!("{f:.11e}").parse().unwrap_or(f);
    format!("{r}")
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).unwrap_or(Value::Null);
        round_floats(&mut v);
        v
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!(
            "# {}\n\ncopos {} | feas_tol {} | psd_tol {} | t_tol {}\n\n| check | expected | observed | pass | s |\n|---|---|---|---|---|\n",
            self.experiment,
            self.tool_version,
            fmt12(self.tolerances.feas_tol),
            fmt12(self.tolerances.psd_tol),
            fmt12(self.t_tol)
        );
        for c in &self.checks {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {:.2} |\n",
                c.name,
                c.expected,
                c.observed,
                if c.pass { "yes" } else { "NO" },
                c.seconds
            ));
        }
        s.push_str(&format!(
            "\nresult: {}\n",
            if self.pass { "pass" } else { "FAIL" }
        ));
        s
    }
}

struct Builder {
    report: Report,
}

impl Builder {
    fn new(exp: Experiment, opts: &MembershipOptions) -> Self {
        Builder {
            report: Report {
                experiment: exp.slug(),
                tool_version: VERSION.into(),
                tolerances: opts.tols,
                t_tol: T_TOL,
                checks: Vec::new(),
                data: Vec::new(),
                pass: true,
            },
        }
    }

    fn check<T>(
        &mut self,
        name: impl Into<String>,
        expected: impl Into<String>,
        f: impl FnOnce() -> Result<(String, bool, T)>,
    ) -> Result<Option<T>> {
        let start = Instant::now();
        let (observed, pass, out) = match f() {
            Ok((o, p, t)) => (o, p, Some(t)),
            Err(CoposError::SolverUnknown(msg)) => (format!("solver unknown: {msg}"), false, None),
            Err(e) => return Err(e),
        };
        self.report.pass &= pass;
        self.report.checks.push(Check {
            name: name.into(),
            expected: expected.into(),
            observed,
            pass,
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    fn data(&mut self, key: impl Into<String>, v: impl Serialize) {
        self.report
            .data
            .push((key.into(), serde_json::to_value(v).unwrap_or(Value::Null)));
    }

    fn bound(&mut self, name: &str, expected: &str, b: Result<BoundResult>, ok: impl Fn(f64) -> bool) -> Result<()> {
        let out = self.check(name, expected, || {
            let b = b?;
            Ok((fmt12(b.value), ok(b.value), b))
        })?;
        if let Some(mut b) = out {
            b.certificate = None;
            self.data(name, b);
        }
        Ok(())
    }
}

fn status_str<T: Serialize>(s: &T) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn q0_str(s: &Q0Split) -> &'static str {
    match s {
        Q0Split::Split { .. } => "member",
        Q0Split::NotMember => "not_member",
        Q0Split::Unknown => "unknown",
    }
}

/// Runs one experiment.
pub fn reproduce(exp: Experiment, opts: &MembershipOptions) -> Result<Report> {
    let mut b = Builder::new(exp, opts);
    match exp {
        Experiment::Horn => horn(&mut b, opts)?,
        Experiment::Icosahedron => icosahedron(&mut b, opts)?,
        Experiment::Bc => bc(&mut b, opts)?,
        Experiment::Gk(k) => gk(&mut b, k, opts)?,
        Experiment::Lk(k) => lk(&mut b, k, opts)?,
        Experiment::StarZeta => star_zeta(&mut b, opts)?,
        Experiment::Cop4Agreement => agreement(&mut b, opts)?,
        Experiment::Nonconvexity => nonconvexity(&mut b, opts)?,
    }
    Ok(b.report)
}

fn horn(b: &mut Builder, opts: &MembershipOptions) -> Result<()> {
    let h = SymMatrix::horn();
    let cert = b.check("Q^(1) membership", "member, residual <= 1e-6", || {
        let v = q_membership(&h, 1, opts)?;
        let res = v.residual.unwrap_or(f64::INFINITY);
        Ok((
            format!("{} residual {}", status_str(&v.status), fmt12(res)),
            v.is_member() && res <= 1e-6,
            v.certificate,
        ))
    })?;
    b.check("Q^(0) membership", "not_member", || {
        let v = q_membership(&h, 0, opts)?;
        Ok((status_str(&v.status), v.is_not_member(), ()))
    })?;
    b.check("psd + nonnegative split", "not_member", || {
        let s = q0_split(&h, opts)?;
        Ok((q0_str(&s).into(), matches!(s, Q0Split::NotMember), ()))
    })?;
    if let Some(Some(cert)) = cert {
        b.check("kernel at the C5 zeros", "max violation <= 1e-5", || {
            let g = Family::Cycle(5).build()?;
            let zeros = form_zeros(&g)?;
            let k = kernel_check(&h, &cert, &zeros, 1e-5)?;
            Ok((fmt12(k.max_violation), k.pass, ()))
        })?;
    }
    Ok(())
}

fn icosahedron(b: &mut Builder, opts: &MembershipOptions) -> Result<()> {
    let g = Family::Icosahedron.build()?;
    let target = 1.0 + 5f64.sqrt();
    let near = |x: f64, tol: f64| move |v: f64| (v - x).abs() <= tol;
    b.bound("nu^(0)", "3.2361 +- 5e-3", nu_bound(&g, 0, opts), near(target, 5e-3))?;
    let nu1 = nu_bound(&g, 1, opts);
    let nu1_value = nu1.as_ref().map(|r| r.value).ok();
    b.bound("nu^(1)", "3.2361 +- 5e-3", nu1, near(target, 5e-3))?;
    b.bound("nu^(2)", "3 +- 1e-3", nu_bound(&g, 2, opts), near(3.0, 1e-3))?;
    let reference = nu1_value.unwrap_or(f64::NAN);
    b.bound(
        "nu~^(1)",
        "equal to nu^(1) within 2e-3",
        nu_tilde_bound(&g, 1, T_TOL, opts),
        move |v| (v - reference).abs() <= 2e-3,
    )?;
    Ok(())
}

fn bc(b: &mut Builder, opts: &MembershipOptions) -> Result<()> {
    for (fam, marked) in [
        (Family::GraphB, &GRAPH_B_MARKED[..]),
        (Family::GraphC, &GRAPH_C_MARKED[..]),
    ] {
        let g = fam.build()?;
        let name = g.name().unwrap_or("?").to_owned();
        let alpha = g.alpha()?;
        b.check(format!("{name}: alpha"), "3", || Ok((alpha.to_string(), alpha == 3, ())))?;
        b.check(format!("{name}: rank 0 test"), "false", || {
            let r = rank0_test(&g, opts)?;
            Ok((r.to_string(), !r, ()))
        })?;
        b.check(format!("{name}: Q^(1) at alpha"), "not_member", || {
            let v = q_membership(&g.m_matrix(None)?, 1, opts)?;
            Ok((status_str(&v.status), v.is_not_member(), ()))
        })?;
        b.check(format!("{name}: Q~^(1) at alpha + 1e-3"), "member", || {
            let v = qtilde_membership(&g.m_matrix(Some(alpha as f64 + RANK_EPS))?, 1, opts)?;
            Ok((status_str(&v.status), v.is_member(), ()))
        })?;
        b.check(format!("{name}: rank 1 condition on marked set"), "holds", || {
            let r = rank1_sufficient(&g, Some(marked), opts)?;
            Ok((if r.is_some() { "holds" } else { "fails" }.into(), r.is_some(), ()))
        })?;
    }
    Ok(())
}

fn gk(b: &mut Builder, k: usize, opts: &MembershipOptions) -> Result<()> {
    let g = Family::Gk(k).build()?;
    let alpha = g.alpha()?;
    b.check("alpha", format!("{}", k + 1), || {
        Ok((alpha.to_string(), alpha == k + 1, ()))
    })?;
    b.check("rank 1 condition on u, v vertices", "holds", || {
        let r = rank1_sufficient(&g, Some(&Family::gk_uv(k)), opts)?;
        Ok((if r.is_some() { "holds" } else { "fails" }.into(), r.is_some(), ()))
    })?;
    if k >= 2 {
        b.check("lower certificate on w vertices", format!("valid, nu-rank >= {}", k - 1), || {
            let c = rank_lower_cert(&g, &Family::gk_w_set(k))?;
            let bound = c.report().map(|r| r.bound);
            Ok((
                bound.map_or("invalid".into(), |v| format!("nu-rank >= {v}")),
                bound == Some(k as u64 - 1),
                (),
            ))
        })?;
        let r = k as u32 - 2;
        b.check(format!("Q^({r}) at alpha"), "not_member", || {
            let v = q_membership(&g.m_matrix(None)?, r, opts)?;
            Ok((status_str(&v.status), v.is_not_member(), ()))
        })?;
    }
    if k <= 3 {
        let a = alpha as f64;
        b.bound("nu~^(1)", &format!("{a} +- 1e-3"), nu_tilde_bound(&g, 1, T_TOL, opts), move |v| {
            (v - a).abs() <= 1e-3
        })?;
    }
    Ok(())
}

fn lk(b: &mut Builder, k: usize, opts: &MembershipOptions) -> Result<()> {
    let g = Family::Lk(k).build()?;
    let alpha = g.alpha()?;
    b.check("alpha", k.to_string(), || Ok((alpha.to_string(), alpha == k, ())))?;
    b.check("lower certificate on s vertices", format!("valid, nu-rank >= {}", k - 1), || {
        let c = rank_lower_cert(&g, &Family::lk_s_set(k))?;
        let bound = c.report().map(|r| r.bound);
        Ok((
            bound.map_or("invalid".into(), |v| format!("nu-rank >= {v}")),
            bound == Some(k as u64 - 1),
            (),
        ))
    })?;
    if k <= 3 {
        let a = alpha as f64;
        b.bound("nu~^(1)", &format!("{a} +- 1e-3"), nu_tilde_bound(&g, 1, T_TOL, opts), move |v| {
            (v - a).abs() <= 1e-3
        })?;
    }
    Ok(())
}

fn star_zeta(b: &mut Builder, opts: &MembershipOptions) -> Result<()> {
    for n in 2..=4 {
        let g = Family::Star(n).build()?;
        let m = g.m_matrix(Some(n as f64))?;
        for r in 0..=4 {
            b.check(format!("T{n}: C~^({r}) at t = {n}"), "not_member", || {
                let v = ctilde_membership(&m, r, opts)?;
                Ok((status_str(&v.status), v.is_not_member(), ()))
            })?;
        }
    }
    let g = Family::Star(3).build()?;
    let mut zeta = Vec::new();
    for r in 0..=4 {
        let res = zeta_bounds(&g, r, true, T_TOL, opts)?;
        zeta.push(res.value);
        b.data(format!("T3 zeta^({r})"), &res);
    }
    let exact: Vec<f64> = (0..=4).map(|r| zeta_closed_form(&g, r)).collect();
    b.check(
        "T3: zeta^(r), r = 0..4",
        exact.iter().map(|&v| fmt12(v)).collect::<Vec<_>>().join(", "),
        || {
            let close = zeta.iter().zip(&exact).all(|(&v, &e)| {
                (v.is_infinite() && e.is_infinite()) || (v - e).abs() <= 2.0 * T_TOL
            });
            let above = zeta.iter().all(|&v| v > 3.0 + T_TOL);
            let nonincreasing = zeta.windows(2).all(|w| w[1] <= w[0] + T_TOL);
            let shown: Vec<String> = zeta.iter().map(|&v| fmt12(v)).collect();
            Ok((shown.join(", "), close && above && nonincreasing, ()))
        },
    )?;
    let mut tilde = Vec::new();
    for r in 0..=4 {
        let res = zeta_bounds(&g, r, false, T_TOL, opts)?;
        tilde.push(res.value);
        b.data(format!("T3 zeta~^({r})"), &res);
    }
    b.check(
        "T3: zeta~^(r), r = 0..4",
        "above 3, strictly decreasing where finite, at most zeta^(r)",
        || {
            let above = tilde.iter().all(|&v| v > 3.0 + T_TOL);
            let finite: Vec<f64> = tilde.iter().copied().filter(|v| v.is_finite()).collect();
            let dec = finite.windows(2).all(|w| w[1] < w[0]);
            let below = tilde.iter().zip(&zeta).all(|(&a, &z)| a <= z + T_TOL);
            let shown: Vec<String> = tilde.iter().map(|&v| fmt12(v)).collect();
            Ok((shown.join(", "), above && dec && below && !finite.is_empty(), ()))
        },
    )?;
    Ok(())
}

/// `ζ^(r)` by enumeration: the coefficient of `x^γ` in
/// `(Σx)^r x^T M x` is a positive multiple of `t·s(γ) − m(m−1)` with
/// `m = r+2` and `s(γ) = γ^T(A+I)γ − m`.
pub fn zeta_closed_form(g: &Graph, r: u32) -> f64 {
    let n = g.n();
    let m = r as i64 + 2;
    let mut worst = 0.0f64;
    let mut gamma = vec![0i64; n];
    fn rec(g: &Graph, gamma: &mut Vec<i64>, i: usize, left: i64, m: i64, worst: &mut f64) {
        let n = gamma.len();
        if i + 1 == n {
            gamma[i] = left;
            let mut s: i64 = gamma.iter().map(|&x| x * x).sum::<i64>() - m;
            for &(a, b) in g.edges() {
                s += 2 * gamma[a] * gamma[b];
            }
            let need = (m * (m - 1)) as f64;
            *worst = if s == 0 { f64::INFINITY } else { worst.max(need / s as f64) };
            return;
        }
        for v in 0..=left {
            gamma[i] = v;
            rec(g, gamma, i + 1, left - v, m, worst);
        }
    }
    if n == 0 {
        return f64::INFINITY;
    }
    rec(g, &mut gamma, 0, m, m, &mut worst);
    worst
}

/// Symmetric matrix with a mix of structured and random entries; about
/// half of the draws are copositive.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    let kind = rng.gen_range(0..3);
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                rng.gen_range(0.2..1.5)
            } else {
                rng.gen_range(-1.0..1.0)
            };
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    let base = SymMatrix::from_rows(&rows).expect("symmetric");
    match kind {
        0 if n == 5 => {
            let d: Vec<f64> = (0..5).map(|_| rng.gen_range(0.5..2.0)).collect();
            let h = SymMatrix::horn().congruence_diag(&d).expect("5x5");
            let shift = rng.gen_range(-0.3..0.3);
            h.add(&base.scale(0.25))
                .expect("same size")
                .add(&SymMatrix::ones(5).scale(shift))
                .expect("same size")
        }
        1 => {
            let shift = rng.gen_range(0.0..0.6);
            base.add(&SymMatrix::ones(n).scale(shift)).expect("same size")
        }
        _ => base,
    }
}

/// Draws seeded matrices until `count` have a robust oracle verdict.
pub fn agreement_sample(n: usize, count: usize, seed: u64) -> Vec<(SymMatrix, CopVerdict)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut draws = 0;
    while out.len() < count && draws < 100 * count {
        draws += 1;
        let m = random_matrix(&mut rng, n);
        let v = oracle_with_margin(&m, AGREEMENT_MARGIN, ORACLE_DEPTH);
        if v != CopVerdict::Unknown {
            out.push((m, v));
        }
    }
    out
}

fn agreement(b: &mut Builder, opts: &MembershipOptions) -> Result<()> {
    let four = agreement_sample(4, 50, SEED);
    let cop4 = four.iter().filter(|(_, v)| *v == CopVerdict::Copositive).count();
    b.check("4x4: split exists iff copositive", "50 / 50 agree", || {
        let mut agree = 0;
        for (m, v) in &four {
            let split = matches!(q0_split(m, opts)?, Q0Split::Split { .. });
            agree += usize::from(split == (*v == CopVerdict::Copositive));
        }
        Ok((
            format!("{agree} / {} agree ({cop4} copositive)", four.len()),
            agree == 50 && four.len() == 50,
            (),
        ))
    })?;
    let five = agreement_sample(5, 50, SEED + 1);
    let cop5 = five.iter().filter(|(_, v)| *v == CopVerdict::Copositive).count();
    b.check("5x5: exact test agrees with oracle", "50 / 50 agree", || {
        let mut agree = 0;
        for (m, v) in &five {
            agree += usize::from(cop5_test(m, COP5_MARGIN, opts)? == *v);
        }
        Ok((
            format!("{agree} / {} agree ({cop5} copositive)", five.len()),
            agree == 50 && five.len() == 50,
            (),
        ))
    })?;
    Ok(())
}

fn nonconvexity(b: &mut Builder, opts: &MembershipOptions) -> Result<()> {
    let h = SymMatrix::horn();
    let z = SymMatrix::zeros(5);
    for (name, m, want) in [
        ("H + 0", h.direct_sum(&z), true),
        ("0 + H", z.direct_sum(&h), true),
        ("H + H", h.direct_sum(&h), false),
    ] {
        let expected = if want { "member" } else { "not_member" };
        b.check(format!("Q~^(1): {name}"), expected, || {
            let v = qtilde_membership(&m, 1, opts)?;
            let ok = if want { v.is_member() } else { v.is_not_member() };
            Ok((status_str(&v.status), ok, ()))
        })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn rounding() {
        let mut v = json!({"a": 0.1234567890123456, "b": [1, 2.0], "c": "x"});
        round_floats(&mut v);
        assert_eq!(v["a"].as_f64().unwrap(), 0.123456789012);
        assert_eq!(fmt12(f64::INFINITY), "inf");
    }

    #[test]
    fn experiment_names() {
        assert_eq!(Experiment::parse("gk", Some(3)).unwrap(), Experiment::Gk(3));
        assert!(Experiment::parse("gk", None).is_err());
        assert_eq!(Experiment::parse("star-zeta", None).unwrap().slug(), "star-zeta");
    }

    #[test]
    fn horn_report() {
        let r = reproduce(Experiment::Horn, &MembershipOptions::default()).unwrap();
        assert!(r.pass, "{}", r.to_markdown());
        assert!(r.to_markdown().contains("Q^(1) membership"));
    }
}
