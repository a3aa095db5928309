use proptest::prelude::*;

use copos::bounds::{check_ineq_d, find_d, nu_bound, nu_tilde_bound, IneqD, T_TOL};
use copos::certificates::{transform_border, transform_scale, verify};
use copos::copositivity::cop5_test;
use copos::graph::{Family, StableMode};
use copos::membership::{
    c_membership, ctilde_membership, q_membership, qtilde_membership, MembershipOptions,
    MembershipStatus,
};
use copos::poly::HomPoly;
use copos::{Graph, SymMatrix};

fn opts() -> MembershipOptions {
    MembershipOptions::default()
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let m = pairs.len();
        proptest::collection::vec(any::<bool>(), m).prop_map(move |mask| {
            let edges = pairs.iter().zip(&mask).filter(|(_, &b)| b).map(|(&e, _)| e);
            Graph::new(n, edges).unwrap()
        })
    })
}

fn stable_brute(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    (0u32..1 << n)
        .map(|s| (0..n).filter(|&i| s & (1 << i) != 0).collect::<Vec<_>>())
        .filter(|s| g.is_stable(s))
        .collect()
}

fn alpha_brute(g: &Graph) -> usize {
    stable_brute(g).iter().map(Vec::len).max().unwrap_or(0)
}

/// Maximum matching by augmenting paths, sides `0..a` and `a..n`.
fn max_matching(g: &Graph, a: usize) -> usize {
    fn augment(g: &Graph, u: usize, a: usize, seen: &mut [bool], mate: &mut [Option<usize>]) -> bool {
        for v in a..g.n() {
            if g.adjacent(u, v) && !seen[v] {
                seen[v] = true;
                if mate[v].map_or(true, |w| augment(g, w, a, seen, mate)) {
                    mate[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut mate = vec![None; g.n()];
    (0..a)
        .filter(|&u| augment(g, u, a, &mut vec![false; g.n()], &mut mate))
        .count()
}

fn poly_strategy(n: usize, d: u32) -> impl Strategy<Value = HomPoly> {
    let mons = copos::poly::monomials(n, d);
    let k = mons.len();
    proptest::collection::vec(prop_oneof![3 => Just(0i32), 2 => -4i32..=4], k).prop_map(
        move |c| {
            HomPoly::from_terms(n, d, mons.iter().cloned().zip(c.iter().map(|&v| v as f64)))
                .unwrap()
        },
    )
}

fn sym_strategy(n: usize) -> impl Strategy<Value = SymMatrix> {
    proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        SymMatrix::from_fn(n, |i, j| if i <= j { v[i * n + j] } else { v[j * n + i] })
    })
}

/// `B B^T + N`, `N ≥ 0` off the diagonal.
fn q0_strategy(n: usize) -> impl Strategy<Value = SymMatrix> {
    (
        proptest::collection::vec(-1.0f64..1.0, n * n),
        proptest::collection::vec(0.0f64..0.5, n * n),
    )
        .prop_map(move |(b, nn)| {
            SymMatrix::from_fn(n, |i, j| {
                let p: f64 = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum();
                let (a, c) = (i.min(j), i.max(j));
                p + if i == j { 0.0 } else { nn[a * n + c] }
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_edges_are_canonical(g in graph_strategy(9)) {
        for &(i, j) in g.edges() {
            prop_assert!(i < j && j < g.n());
        }
        let mut e = g.edges().to_vec();
        e.dedup();
        prop_assert_eq!(e.len(), g.edge_count());
    }

    #[test]
    fn alpha_matches_enumeration(g in graph_strategy(10)) {
        prop_assert_eq!(g.alpha().unwrap(), alpha_brute(&g));
        let fam = g.stable_sets(StableMode::AllUpToAlpha).unwrap();
        prop_assert!(fam.sets.iter().any(|s| s.is_empty()));
        prop_assert!(fam.sets.iter().all(|s| g.is_stable(s)));
        prop_assert_eq!(fam.sets.iter().map(Vec::len).max().unwrap(), alpha_brute(&g));
        prop_assert_eq!(fam.sets.len(), stable_brute(&g).len());
    }

    #[test]
    fn konig_on_bipartite(a in 1usize..5, b in 1usize..5, mask in proptest::collection::vec(any::<bool>(), 16)) {
        let edges = (0..a).flat_map(|i| (0..b).map(move |j| (i, a + j)))
            .enumerate().filter(|(k, _)| mask[*k]).map(|(_, e)| e);
        let g = Graph::new(a + b, edges).unwrap();
        prop_assert_eq!(g.alpha().unwrap(), a + b - max_matching(&g, a));
    }

    #[test]
    fn removing_extended_neighbourhoods(g in graph_strategy(9)) {
        let alpha = alpha_brute(&g);
        for s in stable_brute(&g) {
            let (h, _) = g.delete_extended_neighborhood(&s);
            prop_assert!(h.alpha().unwrap() + s.len() <= alpha);
        }
    }

    #[test]
    fn local_graph_alpha(g in graph_strategy(9)) {
        let alpha = alpha_brute(&g);
        let max_sets: Vec<Vec<usize>> =
            stable_brute(&g).into_iter().filter(|s| s.len() == alpha).collect();
        for i in 0..g.n() {
            let a = g.local_graph(i).unwrap().alpha().unwrap();
            prop_assert!(a <= alpha);
            let covered = max_sets.iter().any(|s| s.contains(&i));
            prop_assert_eq!(a == alpha, covered);
        }
    }

    #[test]
    fn stable_indicator_quadratic(g in graph_strategy(9)) {
        let alpha = alpha_brute(&g);
        let m = g.m_matrix(None).unwrap();
        for s in stable_brute(&g) {
            let chi: Vec<f64> = (0..g.n()).map(|i| if s.contains(&i) { 1.0 } else { 0.0 }).collect();
            let q = m.quad(&chi);
            let k = s.len() as f64;
            prop_assert_eq!(q, k * (alpha as f64 - k));
            if s.len() == alpha && alpha > 0 {
                let x: Vec<f64> = chi.iter().map(|v| v / k).collect();
                prop_assert!(HomPoly::quad_form(&m).eval(&x).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn multiply_laws(p in poly_strategy(3, 2), q in poly_strategy(3, 1), s in poly_strategy(3, 2)) {
        let pq = p.multiply(&q).unwrap();
        prop_assert_eq!(&pq, &q.multiply(&p).unwrap());
        prop_assert_eq!(pq.multiply(&s).unwrap(), p.multiply(&q.multiply(&s).unwrap()).unwrap());
        prop_assert!(pq.norm1() <= p.norm1() * q.norm1() + 1e-9);
        let (pa, qa) = (abs(&p), abs(&q));
        prop_assert!((pa.multiply(&qa).unwrap().norm1() - pa.norm1() * qa.norm1()).abs() < 1e-9);
        for (m, _) in pq.terms() {
            prop_assert_eq!(m.degree(), 3);
        }
        prop_assert!(pq.terms().all(|(_, c)| c != 0.0));
    }

    #[test]
    fn identity_substitution(p in poly_strategy(4, 3)) {
        let map: Vec<(usize, f64)> = (0..4).map(|i| (i, 1.0)).collect();
        prop_assert_eq!(p.substitute_positive(&map, 4).unwrap(), p);
    }

    #[test]
    fn symmetrize_is_invariant(p in poly_strategy(4, 3), which in 0usize..3) {
        let gens: Vec<Vec<usize>> = match which {
            0 => vec![vec![1, 2, 3, 0]],
            1 => vec![vec![1, 0, 2, 3], vec![0, 1, 3, 2]],
            _ => vec![vec![1, 0, 2, 3], vec![1, 2, 3, 0]],
        };
        let s = p.symmetrize(&gens).unwrap();
        for g in &gens {
            let t = s.permute(g);
            prop_assert!(t.sub(&s).unwrap().max_abs_coeff() < 1e-12);
        }
    }
}

fn abs(p: &HomPoly) -> HomPoly {
    HomPoly::from_terms(
        p.nvars(),
        p.degree(),
        p.terms().map(|(m, c)| (m.clone(), c.abs())),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cone_nesting(m in sym_strategy(4), shift in 0.0f64..1.0) {
        let m = m.shift_diagonal(shift);
        for r in 0..=1 {
            let q = q_membership(&m, r, &opts()).unwrap();
            let qt = qtilde_membership(&m, r, &opts()).unwrap();
            if q.is_member() {
                prop_assert!(qt.is_member());
            }
            let c = c_membership(&m, r, &opts()).unwrap();
            let ct = ctilde_membership(&m, r, &opts()).unwrap();
            if c.is_member() {
                prop_assert!(ct.is_member());
            }
            for v in [q, qt, c, ct] {
                if v.is_member() {
                    let cert = v.certificate.expect("member without certificate");
                    let rep = verify(&m, &cert, 1e-6).unwrap();
                    prop_assert!(rep.pass, "residual {}", rep.residual_inf);
                }
            }
        }
    }

    #[test]
    fn level_zero_agrees(m in sym_strategy(4), shift in 0.0f64..1.0) {
        let m = m.shift_diagonal(shift);
        let a = q_membership(&m, 0, &opts()).unwrap().status;
        let b = qtilde_membership(&m, 0, &opts()).unwrap().status;
        if a != MembershipStatus::Unknown && b != MembershipStatus::Unknown {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn solves_are_deterministic(m in sym_strategy(4)) {
        let a = q_membership(&m, 1, &opts()).unwrap();
        let b = q_membership(&m, 1, &opts()).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert_eq!(a.solver_status, b.solver_status);
    }

    #[test]
    fn certificate_transforms(m1 in q0_strategy(3), m2 in q0_strategy(2),
                              d in proptest::collection::vec(0.2f64..4.0, 3)) {
        let c1 = q_membership(&m1, 0, &opts()).unwrap().certificate.unwrap();
        let c2 = q_membership(&m2, 1, &opts()).unwrap().certificate.unwrap();
        let s = transform_scale(&c1, &d).unwrap();
        prop_assert!(verify(&m1.congruence_diag(&d).unwrap(), &s, 1e-6).unwrap().pass);
        let b = transform_border(&c1, &c2).unwrap();
        prop_assert!(verify(&m1.direct_sum(&m2), &b, 1e-6).unwrap().pass);
    }

    #[test]
    fn cop5_scaling(m in sym_strategy(5), d in proptest::collection::vec(0.5f64..2.0, 5)) {
        let m = m.shift_diagonal(1.0);
        let a = cop5_test(&m, 1e-6, &opts()).unwrap();
        let b = cop5_test(&m.congruence_diag(&d).unwrap(), 1e-6, &opts()).unwrap();
        use copos::copositivity::CopVerdict::Unknown;
        if a != Unknown && b != Unknown {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn bound_ordering(g in graph_strategy(6)) {
        let a = alpha_brute(&g) as f64;
        let nu0 = nu_bound(&g, 0, &opts()).unwrap().value;
        let nu1 = nu_bound(&g, 1, &opts()).unwrap().value;
        let nt0 = nu_tilde_bound(&g, 0, T_TOL, &opts()).unwrap();
        prop_assert!(nu1 <= nu0 + 1e-4);
        prop_assert!(a - 1e-3 <= nt0.value && nt0.value <= nu0 + 1e-3);
        prop_assert!(nu0 <= g.clique_cover_number().unwrap() as f64 + 1e-3);
        if let (Some(lo), Some(hi)) = (nt0.largest_infeasible(), nt0.smallest_feasible()) {
            prop_assert!(lo < nt0.value && nt0.value <= hi);
        }
    }

    #[test]
    fn found_d_satisfies_ineq(g in graph_strategy(7)) {
        if let Some(d) = find_d(&g, None, &[], &opts()).unwrap() {
            prop_assert_eq!(check_ineq_d(&g, &d).unwrap(), IneqD::Valid);
        }
    }
}

#[test]
fn family_alphas() {
    for k in 1..=5 {
        assert_eq!(Family::Gk(k).build().unwrap().alpha().unwrap(), k + 1, "G_{k}");
    }
    for k in 2..=5 {
        assert_eq!(Family::Lk(k).build().unwrap().alpha().unwrap(), k, "L_{k}");
    }
    for k in 1..=2 {
        assert_eq!(alpha_brute(&Family::Gk(k).build().unwrap()), k + 1);
    }
    assert_eq!(alpha_brute(&Family::Lk(3).build().unwrap()), 3);
}
