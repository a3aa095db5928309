//! Sparse homogeneous polynomials with real coefficients.

use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoposError, Result};
use crate::matrix::SymMatrix;

/// Default cap on the size of a permutation group closed by [`HomPoly::symmetrize`].
pub const GROUP_CAP: usize = 100_000;

/// An exponent vector. Ordered graded-lexicographically with `x_0` largest,
/// so for two variables the degree-2 monomials sort as `x0², x0x1, x1²`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    pub fn one(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Monomial)
    }

    pub fn is_square_free(&self) -> bool {
        self.0.iter().all(|&e| e <= 1)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0).collect()
    }

    /// `∏ x_i^{e_i}` at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of degree `d` in `n` variables, in graded-lex order.
pub fn monomials(n: usize, d: u32) -> Vec<Monomial> {
    fn go(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i + 1 == n {
            cur[i] = left;
            out.push(Monomial(cur.clone()));
            cur[i] = 0;
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            go(n, i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    go(n, 0, d, &mut vec![0; n], &mut out);
    out
}

/// Dense index of the degree-`d` monomials in `n` variables.
#[derive(Clone, Debug)]
pub struct MonomialTable {
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialTable {
    pub fn new(n: usize, d: u32) -> Self {
        let monos = monomials(n, d);
        let index = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Self { monos, index }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn get(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn monomial(&self, i: usize) -> &Monomial {
        &self.monos[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Monomial> {
        self.monos.iter()
    }
}

/// A homogeneous polynomial. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct HomPoly {
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Monomial, f64>,
}

impl HomPoly {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        Self {
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars, 0);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(nvars, 1);
        p.add_term(Monomial::var(nvars, i), 1.0);
        p
    }

    /// `Σ c_i x_i`.
    pub fn linear(c: &[f64]) -> Self {
        let mut p = Self::zero(c.len(), 1);
        for (i, &ci) in c.iter().enumerate() {
            p.add_term(Monomial::var(c.len(), i), ci);
        }
        p
    }

    pub fn from_terms(
        nvars: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (Monomial, f64)>,
    ) -> Result<Self> {
        let mut p = Self::zero(nvars, degree);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(CoposError::DimensionMismatch {
                    expected: nvars,
                    got: m.nvars(),
                });
            }
            if m.degree() != degree {
                return Err(CoposError::DegreeMismatch {
                    expected: degree,
                    got: m.degree(),
                });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    /// Adds `c·m`; the caller guarantees matching shape.
    pub(crate) fn add_term(&mut self, m: Monomial, c: f64) {
        debug_assert_eq!(m.degree(), self.degree);
        if c == 0.0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// `x^T M x`.
    pub fn quad_form(m: &SymMatrix) -> Self {
        let n = m.dim();
        let mut p = Self::zero(n, 2);
        for i in 0..n {
            p.add_term(Monomial::var(n, i).mul(&Monomial::var(n, i)), m.get(i, i));
            for j in (i + 1)..n {
                p.add_term(Monomial::var(n, i).mul(&Monomial::var(n, j)), 2.0 * m.get(i, j));
            }
        }
        p
    }

    /// `(Σ x_i)^r`.
    pub fn simplex_power(n: usize, r: u32) -> Self {
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        let rf = fact(r);
        let mut p = Self::zero(n, r);
        for m in monomials(n, r) {
            let denom: f64 = m.exps().iter().map(|&e| fact(e)).product();
            p.add_term(m, rf / denom);
        }
        p
    }

    fn check_same_vars(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(CoposError::DimensionMismatch {
                expected: self.nvars,
                got: other.nvars,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut acc: HashMap<Monomial, f64> = HashMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                *acc.entry(a.mul(b)).or_insert(0.0) += ca * cb;
            }
        }
        let mut p = Self::zero(self.nvars, self.degree + other.degree);
        p.terms = acc.into_iter().filter(|(_, c)| *c != 0.0).collect();
        Ok(p)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(CoposError::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let degree = if self.is_zero() { other.degree } else { self.degree };
        let mut p = Self::zero(self.nvars, degree);
        p.terms = self.terms.clone();
        for (m, &c) in &other.terms {
            *p.terms.entry(m.clone()).or_insert(0.0) += c;
        }
        p.terms.retain(|_, c| *c != 0.0);
        Ok(p)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut p = Self::zero(self.nvars, self.degree);
        if s != 0.0 {
            p.terms = self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect();
            p.terms.retain(|_, c| *c != 0.0);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        let mut out = Self::constant(self.nvars, 1.0);
        for _ in 0..k {
            out = out.multiply(self)?;
        }
        Ok(out)
    }

    /// `‖p‖₁ = Σ |p_α|`.
    pub fn norm1(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn min_coeff(&self) -> f64 {
        self.terms.values().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn normalize_one(&self) -> Result<Self> {
        let s = self.norm1();
        if s == 0.0 {
            return Err(CoposError::InvalidParameter(
                "cannot normalize the zero polynomial".into(),
            ));
        }
        Ok(self.scale(1.0 / s))
    }

    pub fn is_nonneg_coeffs(&self, tol: f64) -> bool {
        self.terms.values().all(|&c| c >= -tol)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c * m.eval(x)).sum()
    }

    /// Substitutes `x_i ← c_i · x_{σ(i)}` for `map[i] = (σ(i), c_i)`, with
    /// all `c_i > 0`. The result lives in `target_nvars` variables.
    pub fn substitute_positive(&self, map: &[(usize, f64)], target_nvars: usize) -> Result<Self> {
        if map.len() != self.nvars {
            return Err(CoposError::DimensionMismatch {
                expected: self.nvars,
                got: map.len(),
            });
        }
        for &(t, c) in map {
            if !(c > 0.0) {
                return Err(CoposError::InvalidParameter(format!(
                    "substitution factor must be positive, got {c}"
                )));
            }
            if t >= target_nvars {
                return Err(CoposError::InvalidParameter(format!(
                    "target variable {t} out of range"
                )));
            }
        }
        let mut p = Self::zero(target_nvars, self.degree);
        for (m, &c) in &self.terms {
            let mut e = vec![0u32; target_nvars];
            let mut f = c;
            for (i, &ei) in m.exps().iter().enumerate() {
                if ei > 0 {
                    e[map[i].0] += ei;
                    f *= map[i].1.powi(ei as i32);
                }
            }
            *p.terms.entry(Monomial(e)).or_insert(0.0) += f;
        }
        p.terms.retain(|_, c| *c != 0.0);
        Ok(p)
    }

    /// Diagonal scaling `p(d_1 x_1, …, d_n x_n)`.
    pub fn scale_vars(&self, d: &[f64]) -> Result<Self> {
        let map: Vec<(usize, f64)> = d.iter().copied().enumerate().collect();
        self.substitute_positive(&map, self.nvars)
    }

    /// Re-embeds into `total` variables with variable `i` sent to `offset + i`.
    pub fn embed(&self, total: usize, offset: usize) -> Self {
        let mut p = Self::zero(total, self.degree);
        for (m, &c) in &self.terms {
            let mut e = vec![0u32; total];
            e[offset..offset + self.nvars].copy_from_slice(m.exps());
            p.terms.insert(Monomial(e), c);
        }
        p
    }

    /// `p^σ`, where variable `i` is renamed `σ(i)`.
    pub fn permute(&self, sigma: &[usize]) -> Self {
        let mut p = Self::zero(self.nvars, self.degree);
        for (m, &c) in &self.terms {
            let mut e = vec![0u32; self.nvars];
            for (i, &ei) in m.exps().iter().enumerate() {
                e[sigma[i]] = ei;
            }
            p.terms.insert(Monomial(e), c);
        }
        p
    }

    /// Group average of `p` over the group generated by `generators`,
    /// normalized to unit ℓ₁ norm.
    pub fn symmetrize(&self, generators: &[Vec<usize>]) -> Result<Self> {
        self.symmetrize_with_cap(generators, GROUP_CAP)
    }

    pub fn symmetrize_with_cap(&self, generators: &[Vec<usize>], cap: usize) -> Result<Self> {
        let group = close_group(self.nvars, generators, cap)?;
        let mut acc = Self::zero(self.nvars, self.degree);
        for sigma in &group {
            for (m, c) in self.permute(sigma).terms {
                *acc.terms.entry(m).or_insert(0.0) += c;
            }
        }
        acc.terms.retain(|_, c| *c != 0.0);
        acc.scale(1.0 / group.len() as f64).normalize_one()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("polynomial serialization cannot fail")
    }
}

/// Closes a set of permutations under composition.
pub fn close_group(n: usize, generators: &[Vec<usize>], cap: usize) -> Result<Vec<Vec<usize>>> {
    for g in generators {
        let mut seen = vec![false; n];
        let ok = g.len() == n && g.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true));
        if !ok {
            return Err(CoposError::InvalidParameter(format!(
                "not a permutation of 0..{n}: {g:?}"
            )));
        }
    }
    let id: Vec<usize> = (0..n).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in generators {
            let q: Vec<usize> = p.iter().map(|&v| g[v]).collect();
            if seen.insert(q.clone()) {
                if seen.len() > cap {
                    return Err(CoposError::ResourceCap {
                        what: "permutation group size",
                        size: seen.len(),
                        limit: cap,
                    });
                }
                order.push(q.clone());
                queue.push_back(q);
            }
        }
    }
    Ok(order)
}

impl fmt::Display for HomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
            } else if *c < 0.0 {
                write!(f, "-")?;
            }
            let vars: Vec<String> = m
                .exps()
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(i, &e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
                .collect();
            let a = c.abs();
            if vars.is_empty() {
                write!(f, "{a}")?;
            } else if a == 1.0 {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{a}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<u32>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    nvars: usize,
    degree: u32,
    terms: Vec<TermRepr>,
}

impl Serialize for HomPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyRepr {
            nvars: self.nvars,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(m, &c)| TermRepr {
                    exp: m.0.clone(),
                    c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HomPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        HomPoly::from_terms(
            repr.nvars,
            repr.degree,
            repr.terms.into_iter().map(|t| (Monomial(t.exp), t.c)),
        )
        .map_err(serde::de::Error::custom)
    }
}
