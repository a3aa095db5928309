//! Independent verification of SOS certificates, the scaling / bordering /
//! sum transformations, and kernel diagnostics at known zeros.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{CoposError, Result};
use crate::graph::{Graph, StableMode};
use crate::matrix::SymMatrix;
use crate::membership::{GramBlock, SosCertificate};
use crate::poly::{monomials, HomPoly, Monomial, MonomialTable};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub residual_inf: f64,
    pub min_gram_eig: f64,
    pub min_c: f64,
    pub pass: bool,
}

fn check_blocks(cert: &SosCertificate) -> Result<()> {
    for b in &cert.gram {
        let size = monomials(cert.nvars, b.degree).len();
        if b.beta.nvars() != cert.nvars || b.p.dim() != size {
            return Err(CoposError::DimensionMismatch {
                expected: size,
                got: b.p.dim(),
            });
        }
        if b.beta.degree() + 2 * b.degree != cert.r + 2 {
            return Err(CoposError::DegreeMismatch {
                expected: cert.r + 2,
                got: b.beta.degree() + 2 * b.degree,
            });
        }
    }
    for (a, _) in &cert.c {
        if a.nvars() != cert.nvars || a.degree() != cert.r + 2 {
            return Err(CoposError::DegreeMismatch {
                expected: cert.r + 2,
                got: a.degree(),
            });
        }
    }
    Ok(())
}

fn report(lhs: &HomPoly, cert: &SosCertificate, tol: f64) -> Result<VerifyReport> {
    check_blocks(cert)?;
    let diff = lhs.sub(&cert.sos_part())?;
    let residual_inf = diff.max_abs_coeff();
    let min_gram_eig = cert.min_gram_eigenvalue();
    let min_c = cert.min_c();
    let pass = residual_inf <= tol && min_gram_eig >= -tol && min_c >= -tol;
    Ok(VerifyReport {
        residual_inf,
        min_gram_eig,
        min_c,
        pass,
    })
}

/// Recomputes `p · x^T M x − Σ x^β z^T P_β z − Σ c_A x^A` coefficient-wise.
/// Also requires the multiplier to have nonnegative coefficients.
pub fn verify(m: &SymMatrix, cert: &SosCertificate, tol: f64) -> Result<VerifyReport> {
    if m.dim() != cert.nvars || cert.multiplier.nvars() != cert.nvars {
        return Err(CoposError::DimensionMismatch {
            expected: cert.nvars,
            got: m.dim(),
        });
    }
    if cert.multiplier.degree() != cert.r && !cert.multiplier.is_zero() {
        return Err(CoposError::DegreeMismatch {
            expected: cert.r,
            got: cert.multiplier.degree(),
        });
    }
    let lhs = cert.multiplier.multiply(&HomPoly::quad_form(m))?;
    let mut rep = report(&lhs, cert, tol)?;
    if !cert.multiplier.is_nonneg_coeffs(tol) {
        rep.pass = false;
    }
    Ok(rep)
}

/// Checks the certificate against an explicit polynomial instead of
/// `multiplier · x^T M x`.
pub fn verify_poly(f: &HomPoly, cert: &SosCertificate, tol: f64) -> Result<VerifyReport> {
    if f.nvars() != cert.nvars {
        return Err(CoposError::DimensionMismatch {
            expected: cert.nvars,
            got: f.nvars(),
        });
    }
    report(f, cert, tol)
}

/// Accumulates Gram blocks and monomial coefficients in `n` variables.
struct Builder {
    n: usize,
    r: u32,
    blocks: BTreeMap<(Monomial, u32), Vec<Vec<f64>>>,
    c: BTreeMap<Monomial, f64>,
    tables: HashMap<u32, MonomialTable>,
}

impl Builder {
    fn new(n: usize, r: u32) -> Self {
        Self {
            n,
            r,
            blocks: BTreeMap::new(),
            c: BTreeMap::new(),
            tables: HashMap::new(),
        }
    }

    fn table(&mut self, k: u32) -> &MonomialTable {
        let n = self.n;
        self.tables.entry(k).or_insert_with(|| MonomialTable::new(n, k))
    }

    /// Adds `w · x^{β'} z'^T P z'` where `src` is a block over `src_n`
    /// variables embedded at `offset` and `shift` multiplies `x^β`.
    fn add_block(&mut self, src: &GramBlock, src_n: usize, offset: usize, shift: &Monomial, w: f64) {
        let k = src.degree;
        let src_basis = monomials(src_n, k);
        let n = self.n;
        let embed = |m: &Monomial| {
            let mut e = vec![0u32; n];
            e[offset..offset + src_n].copy_from_slice(m.exps());
            Monomial::new(e)
        };
        let beta = embed(&src.beta).mul(shift);
        let table = self.table(k);
        let idx: Vec<usize> = src_basis
            .iter()
            .map(|m| table.get(&embed(m)).expect("embedded basis monomial"))
            .collect();
        let size = table.len();
        let blk = self
            .blocks
            .entry((beta, k))
            .or_insert_with(|| vec![vec![0.0; size]; size]);
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                blk[idx[a]][idx[b]] += w * src.p.get(a, b);
            }
        }
    }

    fn add_c(&mut self, a: Monomial, v: f64) {
        *self.c.entry(a).or_insert(0.0) += v;
    }

    /// Moves nonnegative coefficients on non-square-free monomials into the
    /// diagonal of a degree-1 Gram block (`x^γ = x^{γ−2e_i} · x_i²`).
    fn fold_square_terms(&mut self) {
        let moved: Vec<(Monomial, f64)> = self
            .c
            .iter()
            .filter(|(a, v)| !a.is_square_free() && **v >= 0.0)
            .map(|(a, v)| (a.clone(), *v))
            .collect();
        let n = self.n;
        for (a, v) in moved {
            self.c.remove(&a);
            let i = a.exps().iter().position(|&e| e >= 2).expect("not square-free");
            let beta = a.div(&Monomial::var(n, i).mul(&Monomial::var(n, i))).expect("divisible");
            let blk = self
                .blocks
                .entry((beta, 1))
                .or_insert_with(|| vec![vec![0.0; n]; n]);
            blk[i][i] += v;
        }
    }

    fn finish(self, multiplier: HomPoly) -> SosCertificate {
        let gram = self
            .blocks
            .into_iter()
            .map(|((beta, degree), rows)| GramBlock {
                beta,
                degree,
                p: SymMatrix::from_fn(rows.len(), |i, j| 0.5 * (rows[i][j] + rows[j][i])),
            })
            .collect();
        let c = self.c.into_iter().filter(|(_, v)| *v != 0.0).collect();
        SosCertificate {
            nvars: self.n,
            r: self.r,
            multiplier,
            gram,
            c,
        }
    }
}

fn has_gram(certs: &[&SosCertificate]) -> bool {
    certs.iter().any(|c| !c.gram.is_empty())
}

/// Certificate for `D M D` from one for `M`, by the substitution
/// `x_i → d_i x_i` followed by renormalizing the multiplier.
pub fn transform_scale(cert: &SosCertificate, d: &[f64]) -> Result<SosCertificate> {
    if d.len() != cert.nvars {
        return Err(CoposError::DimensionMismatch {
            expected: cert.nvars,
            got: d.len(),
        });
    }
    if let Some(bad) = d.iter().find(|v| !(**v > 0.0)) {
        return Err(CoposError::InvalidParameter(format!(
            "scaling entries must be positive, got {bad}"
        )));
    }
    let p = cert.multiplier.scale_vars(d)?;
    let s = p.norm1();
    if s == 0.0 {
        return Err(CoposError::InvalidParameter("zero multiplier".into()));
    }
    let gram = cert
        .gram
        .iter()
        .map(|b| {
            let basis = monomials(cert.nvars, b.degree);
            let dz: Vec<f64> = basis.iter().map(|m| m.eval(d)).collect();
            let f = b.beta.eval(d) / s;
            GramBlock {
                beta: b.beta.clone(),
                degree: b.degree,
                p: SymMatrix::from_fn(dz.len(), |i, j| f * dz[i] * b.p.get(i, j) * dz[j]),
            }
        })
        .collect();
    let c = cert
        .c
        .iter()
        .map(|(a, v)| (a.clone(), v * a.eval(d) / s))
        .collect();
    Ok(SosCertificate {
        nvars: cert.nvars,
        r: cert.r,
        multiplier: p.scale(1.0 / s),
        gram,
        c,
    })
}

/// Adds `w(y) · (certificate identity over x)` into `b`, with the
/// certificate's variables placed at `offset` and `w` over all variables.
fn add_shifted(b: &mut Builder, cert: &SosCertificate, offset: usize, w: &HomPoly) {
    let n = b.n;
    let embed = |m: &Monomial| {
        let mut e = vec![0u32; n];
        e[offset..offset + cert.nvars].copy_from_slice(m.exps());
        Monomial::new(e)
    };
    for (shift, wv) in w.terms() {
        for blk in &cert.gram {
            b.add_block(blk, cert.nvars, offset, shift, wv);
        }
        for (a, v) in &cert.c {
            b.add_c(embed(a).mul(shift), wv * v);
        }
    }
}

/// Certificate for `diag(M1, M2)` at level `r1 + r2` from certificates for
/// `M1` and `M2`, via
/// `p1(x)p2(y)(x^T M1 x + y^T M2 y) = p2(y)·[p1 x^T M1 x] + p1(x)·[p2 y^T M2 y]`.
pub fn transform_border(c1: &SosCertificate, c2: &SosCertificate) -> Result<SosCertificate> {
    let (n, m) = (c1.nvars, c2.nvars);
    let total = n + m;
    let p1 = c1.multiplier.embed(total, 0);
    let p2 = c2.multiplier.embed(total, n);
    let mut b = Builder::new(total, c1.r + c2.r);
    add_shifted(&mut b, c1, 0, &p2);
    add_shifted(&mut b, c2, n, &p1);
    if has_gram(&[c1, c2]) {
        b.fold_square_terms();
    }
    normalized(b, p1.multiply(&p2)?)
}

/// Certificate for `M0 + M1` at level `r0 + r1`, via
/// `p0 p1 x^T(M0+M1)x = p1·[p0 x^T M0 x] + p0·[p1 x^T M1 x]`.
pub fn transform_sum(c0: &SosCertificate, c1: &SosCertificate) -> Result<SosCertificate> {
    if c0.nvars != c1.nvars {
        return Err(CoposError::DimensionMismatch {
            expected: c0.nvars,
            got: c1.nvars,
        });
    }
    let mut b = Builder::new(c0.nvars, c0.r + c1.r);
    add_shifted(&mut b, c0, 0, &c1.multiplier);
    add_shifted(&mut b, c1, 0, &c0.multiplier);
    if has_gram(&[c0, c1]) {
        b.fold_square_terms();
    }
    normalized(b, c0.multiplier.multiply(&c1.multiplier)?)
}

fn normalized(b: Builder, multiplier: HomPoly) -> Result<SosCertificate> {
    let s = multiplier.norm1();
    if s == 0.0 {
        return Err(CoposError::InvalidParameter("zero multiplier".into()));
    }
    Ok(b.finish(multiplier).scaled(1.0 / s))
}

/// Raises the level of a certificate by multiplying with `(Σx)^k`
/// normalized (keeps the same matrix).
pub fn lift(cert: &SosCertificate, k: u32) -> Result<SosCertificate> {
    let s = HomPoly::simplex_power(cert.nvars, k);
    let unit = SosCertificate::empty(cert.nvars, k, s);
    // (Σx)^k · [p x^TMx] + p · [(Σx)^k x^T 0 x]
    transform_sum(cert, &unit)
}

/// Indicator-type zeros `(1/α)·χ^S` of `x^T M_G x` over maximum stable sets.
pub fn form_zeros(g: &Graph) -> Result<Vec<Vec<f64>>> {
    let alpha = g.alpha()?;
    if g.n() == 0 {
        return Ok(Vec::new());
    }
    let m = g.m_matrix(None)?;
    let fam = g.stable_sets(StableMode::MaximumOnly)?;
    let mut out = Vec::with_capacity(fam.sets.len());
    for s in &fam.sets {
        let mut a = vec![0.0; g.n()];
        for &v in s {
            a[v] = 1.0 / alpha as f64;
        }
        let val = m.quad(&a);
        if val.abs() > 1e-12 {
            return Err(CoposError::Precondition(format!(
                "indicator of {s:?} is not a zero (value {val})"
            )));
        }
        out.push(a);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    /// Largest `‖P_β a‖_∞` over zeros `a` and blocks with `supp β ⊆ supp a`.
    pub max_violation: f64,
    /// Number of (zero, block) pairs inspected.
    pub checked: usize,
    pub pass: bool,
}

/// For every zero `a` and every degree-1 block with `supp β ⊆ supp a`,
/// measures `‖P_β a‖_∞`.
pub fn kernel_check(
    m: &SymMatrix,
    cert: &SosCertificate,
    zeros: &[Vec<f64>],
    tol: f64,
) -> Result<KernelReport> {
    let mut max_violation: f64 = 0.0;
    let mut checked = 0;
    for a in zeros {
        if a.len() != m.dim() {
            return Err(CoposError::DimensionMismatch {
                expected: m.dim(),
                got: a.len(),
            });
        }
        if a.iter().any(|v| *v < 0.0) || m.quad(a) > tol {
            return Err(CoposError::InvalidParameter(
                "kernel check needs nonnegative zeros of the form".into(),
            ));
        }
        for blk in cert.gram.iter().filter(|b| b.degree == 1) {
            if blk.beta.support().iter().any(|&i| a[i] == 0.0) {
                continue;
            }
            checked += 1;
            let pa = blk.p.as_dmatrix() * nalgebra::DVector::from_column_slice(a);
            max_violation = max_violation.max(pa.amax());
        }
    }
    Ok(KernelReport {
        max_violation,
        checked,
        pass: max_violation <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;
    use crate::membership::{q_membership, MembershipOptions};

    fn horn_cert() -> SosCertificate {
        q_membership(&SymMatrix::horn(), 1, &MembershipOptions::default())
            .unwrap()
            .certificate
            .unwrap()
    }

    #[test]
    fn verify_examples() {
        let h = SymMatrix::horn();
        let cert = horn_cert();
        assert!(verify(&h, &cert, 1e-6).unwrap().pass);
        let mut bad = cert.clone();
        let (_, v) = bad.c.iter_mut().find(|(_, v)| *v > 1e-3).expect("some c_A > 0");
        *v = -*v;
        let rep = verify(&h, &bad, 1e-6).unwrap();
        assert!(!rep.pass && rep.min_c < -1e-6);
        let z = SosCertificate::empty(3, 1, HomPoly::simplex_power(3, 1));
        assert!(verify(&SymMatrix::zeros(3), &z, 1e-12).unwrap().pass);
        assert!(verify(&SymMatrix::zeros(4), &z, 1e-12).is_err());
    }

    #[test]
    fn scaling() {
        let h = SymMatrix::horn();
        let cert = horn_cert();
        let same = transform_scale(&cert, &[1.0; 5]).unwrap();
        assert!(same.multiplier.sub(&cert.multiplier).unwrap().max_abs_coeff() < 1e-15);
        let d = [1.0, 2.0, 1.0, 1.0, 1.0];
        let scaled = transform_scale(&cert, &d).unwrap();
        let dhd = h.congruence_diag(&d).unwrap();
        assert!(verify(&dhd, &scaled, 1e-6).unwrap().pass);
        assert!(transform_scale(&cert, &[1.0, 0.0, 1.0, 1.0, 1.0]).is_err());
        let p = SymMatrix::ones(3);
        let dp = transform_scale(&SosCertificate::psd(&p), &[0.5, 2.0, 3.0]).unwrap();
        assert!(verify(&p.congruence_diag(&[0.5, 2.0, 3.0]).unwrap(), &dp, 1e-9).unwrap().pass);
    }

    #[test]
    fn bordering() {
        let h = SymMatrix::horn();
        let cert = horn_cert();
        let zero = SosCertificate::empty(1, 0, HomPoly::constant(1, 1.0));
        let b = transform_border(&cert, &zero).unwrap();
        assert!(verify(&h.direct_sum(&SymMatrix::zeros(1)), &b, 1e-6).unwrap().pass);
        let hh = transform_border(&cert, &cert).unwrap();
        assert_eq!(hh.r, 2);
        assert!(verify(&h.direct_sum(&h), &hh, 1e-6).unwrap().pass);
        let (p, q) = (SymMatrix::identity(2), SymMatrix::ones(2));
        let pq = transform_border(&SosCertificate::psd(&p), &SosCertificate::psd(&q)).unwrap();
        assert!(verify(&p.direct_sum(&q), &pq, 1e-12).unwrap().pass);
    }

    #[test]
    fn sums() {
        let h = SymMatrix::horn();
        let cert = horn_cert();
        let zero = SosCertificate::empty(5, 1, HomPoly::simplex_power(5, 1).normalize_one().unwrap());
        let lifted = transform_sum(&cert, &zero).unwrap();
        assert_eq!(lifted.r, 2);
        assert!(verify(&h, &lifted, 1e-6).unwrap().pass);
        let (p, q) = (SymMatrix::identity(3), SymMatrix::ones(3));
        let s = transform_sum(&SosCertificate::psd(&p), &SosCertificate::psd(&q)).unwrap();
        assert!(verify(&p.add(&q).unwrap(), &s, 1e-12).unwrap().pass);
    }

    #[test]
    fn union_with_isolated_vertex() {
        // M_{C5 ⊕ K1} = (3/2)(H ⊕ 0) + 3(0 ⊕ M_{K1}) + [[J/2, -J], [-J, 2]].
        let g = Family::DisjointUnion(Box::new(Family::Cycle(5)), Box::new(Family::Complete(1)))
            .build()
            .unwrap();
        let target = g.m_matrix(None).unwrap();
        let k1 = SosCertificate::empty(1, 0, HomPoly::constant(1, 1.0));
        let first = transform_border(&horn_cert().for_scaled_matrix(1.5), &k1).unwrap();
        let psd = SymMatrix::from_fn(6, |i, j| match (i < 5, j < 5) {
            (true, true) => 0.5,
            (false, false) => 2.0,
            _ => -1.0,
        });
        assert!(psd.min_eigenvalue() > -1e-12);
        let cert = transform_sum(&first, &SosCertificate::psd(&psd)).unwrap();
        let rep = verify(&target, &cert, 1e-6).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn zeros_and_kernels() {
        let c5 = Family::Cycle(5).build().unwrap();
        let zs = form_zeros(&c5).unwrap();
        assert_eq!(zs.len(), 5);
        assert!(zs.iter().all(|a| a.iter().filter(|v| **v == 0.5).count() == 2));
        let k4 = Family::Complete(4).build().unwrap();
        assert_eq!(form_zeros(&k4).unwrap().len(), 4);

        let h = SymMatrix::horn();
        let cert = horn_cert();
        let rep = kernel_check(&h, &cert, &zs, 1e-5).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.checked > 0);

        let pd = SymMatrix::identity(3).shift_diagonal(1.0);
        let vac = kernel_check(&pd, &SosCertificate::psd(&pd), &[], 1e-5).unwrap();
        assert!(vac.pass && vac.checked == 0);

        let mut bad = cert.clone();
        let blk = bad.gram.iter_mut().find(|b| b.beta.exps()[0] == 1).unwrap();
        blk.p = blk.p.add(&SymMatrix::ones(5).scale(1e-2)).unwrap();
        assert!(!kernel_check(&h, &bad, &zs, 1e-5).unwrap().pass);
    }
}
