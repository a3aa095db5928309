//! Copositivity deciders: a simplex-subdivision oracle, the exact 5×5 test
//! and a sufficient test at any level.

use serde::{Deserialize, Serialize};

use crate::error::{CoposError, Result};
use crate::matrix::SymMatrix;
use crate::membership::{q0_split, qtilde_membership, MembershipOptions, MembershipStatus, Q0Split};

/// Default subdivision depth of the oracle.
pub const ORACLE_DEPTH: usize = 40;
/// Upper limit on simplices examined by one oracle call.
pub const ORACLE_NODE_CAP: usize = 2_000_000;
/// Default margin of the 5×5 test.
pub const COP5_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum OracleVerdict {
    Copositive,
    /// `witness ≥ 0` on the simplex with `witness^T M witness = value < 0`.
    NotCopositive { witness: Vec<f64>, value: f64 },
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopVerdict {
    Copositive,
    NotCopositive,
    Unknown,
}

struct Simplex {
    verts: Vec<Vec<f64>>,
    depth: usize,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Subdivides the standard simplex. A piece is certified when all
/// `v_i^T M v_j ≥ 0`; a vertex with `v^T M v < 0` is a witness; otherwise
/// the longest edge is halved (ties broken by the most negative pairing).
pub fn brute_oracle(m: &SymMatrix, max_depth: usize) -> OracleVerdict {
    brute_oracle_capped(m, max_depth, ORACLE_NODE_CAP)
}

pub fn brute_oracle_capped(m: &SymMatrix, max_depth: usize, node_cap: usize) -> OracleVerdict {
    let n = m.dim();
    if n == 0 {
        return OracleVerdict::Copositive;
    }
    let start: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for v in &start {
        let q = m.quad(v);
        if q < 0.0 {
            return OracleVerdict::NotCopositive {
                witness: v.clone(),
                value: q,
            };
        }
    }
    let mut stack = vec![Simplex {
        verts: start,
        depth: 0,
    }];
    let mut exhausted = false;
    let mut visited = 0;
    while let Some(s) = stack.pop() {
        visited += 1;
        if visited > node_cap {
            return OracleVerdict::Unknown;
        }
        let k = s.verts.len();
        let mut split = None;
        let mut key = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..k {
            for j in (i + 1)..k {
                let b = m.bilinear(&s.verts[i], &s.verts[j]);
                if b >= 0.0 {
                    continue;
                }
                let cand = (dist2(&s.verts[i], &s.verts[j]), b);
                if cand.0 > key.0 + 1e-15 || ((cand.0 - key.0).abs() <= 1e-15 && cand.1 < key.1) {
                    key = cand;
                    split = Some((i, j));
                }
            }
        }
        let Some((i, j)) = split else { continue };
        if s.depth >= max_depth {
            exhausted = true;
            continue;
        }
        let mid: Vec<f64> = s.verts[i]
            .iter()
            .zip(&s.verts[j])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let q = m.quad(&mid);
        if q < 0.0 {
            return OracleVerdict::NotCopositive {
                witness: mid,
                value: q,
            };
        }
        let mut left = s.verts.clone();
        left[j] = mid.clone();
        let mut right = s.verts;
        right[i] = mid;
        stack.push(Simplex {
            verts: left,
            depth: s.depth + 1,
        });
        stack.push(Simplex {
            verts: right,
            depth: s.depth + 1,
        });
    }
    if exhausted {
        OracleVerdict::Unknown
    } else {
        OracleVerdict::Copositive
    }
}

/// Oracle verdict that holds robustly: copositive when `M - δJ` is
/// certified, not copositive when `M + δJ` has a witness. Since
/// `x^T J x = 1` on the simplex, this separates matrices whose simplex
/// minimum is at least `δ` away from 0.
pub fn oracle_with_margin(m: &SymMatrix, margin: f64, max_depth: usize) -> CopVerdict {
    let j = SymMatrix::ones(m.dim());
    let lower = m.sub(&j.scale(margin)).expect("same dimension");
    if brute_oracle(&lower, max_depth) == OracleVerdict::Copositive {
        return CopVerdict::Copositive;
    }
    let upper = m.add(&j.scale(margin)).expect("same dimension");
    match brute_oracle(&upper, max_depth) {
        OracleVerdict::NotCopositive { .. } => CopVerdict::NotCopositive,
        _ => CopVerdict::Unknown,
    }
}

/// A point of the simplex where the form is negative, found with a small
/// subdivision budget. Used to settle inconclusive solver answers.
pub(crate) fn quick_witness(m: &SymMatrix) -> Option<Vec<f64>> {
    match brute_oracle_capped(m, 24, 20_000) {
        OracleVerdict::NotCopositive { witness, .. } => Some(witness),
        _ => None,
    }
}

fn from_status(s: MembershipStatus) -> CopVerdict {
    match s {
        MembershipStatus::Member => CopVerdict::Copositive,
        MembershipStatus::NotMember => CopVerdict::NotCopositive,
        MembershipStatus::Unknown => CopVerdict::Unknown,
    }
}

/// Two-sided probe: member at `m` ⇒ copositive; not a member at
/// `m + margin·I` ⇒ not copositive.
fn two_sided(
    m: &SymMatrix,
    margin: f64,
    opts: &MembershipOptions,
    test: impl Fn(&SymMatrix, &MembershipOptions) -> Result<MembershipStatus>,
) -> Result<CopVerdict> {
    let exact = MembershipOptions { margin: 0.0, ..*opts };
    if test(m, &exact)? == MembershipStatus::Member {
        return Ok(CopVerdict::Copositive);
    }
    let shifted = MembershipOptions { margin, ..*opts };
    Ok(match test(m, &shifted)? {
        MembershipStatus::NotMember => CopVerdict::NotCopositive,
        _ => CopVerdict::Unknown,
    })
}

/// Exact copositivity for 5×5 matrices, up to `margin`.
pub fn cop5_test(m: &SymMatrix, margin: f64, opts: &MembershipOptions) -> Result<CopVerdict> {
    if m.dim() != 5 {
        return Err(CoposError::DimensionMismatch {
            expected: 5,
            got: m.dim(),
        });
    }
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(CoposError::InvalidParameter(format!(
            "margin must be a finite nonnegative number, got {margin}"
        )));
    }
    if (0..5).any(|i| m.get(i, i) < -margin) {
        return Ok(CopVerdict::NotCopositive);
    }
    let zero: Vec<usize> = (0..5).filter(|&i| m.get(i, i).abs() <= margin).collect();
    for &i in &zero {
        if (0..5).any(|j| m.get(i, j) < -margin) {
            return Ok(CopVerdict::NotCopositive);
        }
    }
    let verdict = if !zero.is_empty() {
        let keep: Vec<usize> = (0..5).filter(|i| !zero.contains(i)).collect();
        if keep.is_empty() {
            return Ok(CopVerdict::Copositive);
        }
        let sub = m.principal(&keep);
        two_sided(&sub, margin, opts, |a, o| {
            Ok(match q0_split(a, o)? {
                Q0Split::Split { .. } => MembershipStatus::Member,
                Q0Split::NotMember => MembershipStatus::NotMember,
                Q0Split::Unknown => MembershipStatus::Unknown,
            })
        })?
    } else {
        let d: Vec<f64> = (0..5).map(|i| 1.0 / m.get(i, i).sqrt()).collect();
        let unit = m.congruence_diag(&d)?;
        two_sided(&unit, margin, opts, |a, o| Ok(qtilde_membership(a, 1, o)?.status))?
    };
    Ok(verdict)
}

/// Sufficient test: copositive when `m ∈ Q̃^(r)`; never claims the converse.
pub fn cop_inner_test(m: &SymMatrix, r: u32, opts: &MembershipOptions) -> Result<CopVerdict> {
    Ok(match from_status(qtilde_membership(m, r, opts)?.status) {
        CopVerdict::Copositive => CopVerdict::Copositive,
        _ => CopVerdict::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_basics() {
        assert_eq!(brute_oracle(&SymMatrix::identity(4), 30), OracleVerdict::Copositive);
        assert_eq!(brute_oracle(&SymMatrix::horn(), 40), OracleVerdict::Copositive);
        let h = SymMatrix::horn().sub(&SymMatrix::ones(5).scale(0.1)).unwrap();
        match brute_oracle(&h, 30) {
            OracleVerdict::NotCopositive { witness, value } => {
                assert!(value < 0.0);
                assert!(witness.iter().all(|&x| x >= 0.0));
                assert!((h.quad(&witness) - value).abs() < 1e-12);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn cop5() {
        let o = MembershipOptions::default();
        let h = SymMatrix::horn();
        assert_eq!(cop5_test(&h, COP5_MARGIN, &o).unwrap(), CopVerdict::Copositive);
        let dhd = h.congruence_diag(&[1.0, 3.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(cop5_test(&dhd, COP5_MARGIN, &o).unwrap(), CopVerdict::Copositive);
        let bad = h.sub(&SymMatrix::ones(5).scale(0.05)).unwrap();
        assert_eq!(cop5_test(&bad, COP5_MARGIN, &o).unwrap(), CopVerdict::NotCopositive);
        assert!(cop5_test(&SymMatrix::identity(4), COP5_MARGIN, &o).is_err());
    }

    #[test]
    fn zero_diagonal_reduction() {
        let o = MembershipOptions::default();
        let mut rows = SymMatrix::identity(5).rows();
        rows[0][0] = 0.0;
        rows[0][1] = -0.5;
        rows[1][0] = -0.5;
        let m = SymMatrix::from_rows(&rows).unwrap();
        assert_eq!(cop5_test(&m, COP5_MARGIN, &o).unwrap(), CopVerdict::NotCopositive);
        rows[0][1] = 0.5;
        rows[1][0] = 0.5;
        let m = SymMatrix::from_rows(&rows).unwrap();
        assert_eq!(cop5_test(&m, COP5_MARGIN, &o).unwrap(), CopVerdict::Copositive);
    }

    #[test]
    fn inner() {
        let o = MembershipOptions::default();
        assert_eq!(cop_inner_test(&SymMatrix::horn(), 1, &o).unwrap(), CopVerdict::Copositive);
        assert_eq!(
            cop_inner_test(&SymMatrix::identity(3).add(&SymMatrix::ones(3)).unwrap(), 0, &o).unwrap(),
            CopVerdict::Copositive
        );
    }
}
