use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{CoposError, Result};

/// Named graph families.
///
/// Labelling conventions:
/// * `Star(n)`: centre 0, leaves `1..=n`.
/// * `CompleteBipartite(a, b)`: sides `0..a` and `a..a+b`.
/// * `Gk(k)`: `u_0..u_k`, then `v_0..v_k`, then `w_1..w_k`.
/// * `Lk(k)`: `s_1..s_k`, then for each pair `i < j` in lexicographic order
///   the triple `a_ij, b_ij, c_ij`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Cycle(usize),
    Complete(usize),
    CompleteBipartite(usize, usize),
    Star(usize),
    GraphB,
    GraphC,
    Gk(usize),
    Lk(usize),
    LkPrime(usize),
    Icosahedron,
    DisjointUnion(Box<Family>, Box<Family>),
}

/// 8-cycle `0..7` plus chords {1,3} and {2,6}, read off the drawing of B.
const GRAPH_B_CHORDS: [(usize, usize); 2] = [(1, 3), (2, 6)];
/// 8-cycle `0..7` plus chords {1,5} and {2,6}, read off the drawing of C.
const GRAPH_C_CHORDS: [(usize, usize); 2] = [(1, 5), (2, 6)];
/// Vertices of B marked in its drawing (a valid support for rank-1 tests).
pub const GRAPH_B_MARKED: [usize; 6] = [1, 2, 3, 5, 6, 7];
/// Vertices of C marked in its drawing.
pub const GRAPH_C_MARKED: [usize; 4] = [1, 2, 5, 6];

/// Icosahedron edge list (1-based, as drawn).
const ICOSAHEDRON: [(usize, usize); 30] = [
    (1, 2),
    (2, 3),
    (3, 1),
    (4, 5),
    (5, 6),
    (6, 7),
    (7, 8),
    (8, 9),
    (9, 4),
    (5, 2),
    (4, 2),
    (6, 2),
    (4, 1),
    (1, 9),
    (1, 8),
    (8, 3),
    (7, 3),
    (6, 3),
    (10, 11),
    (11, 12),
    (12, 10),
    (10, 5),
    (5, 11),
    (10, 4),
    (10, 9),
    (12, 9),
    (12, 8),
    (7, 12),
    (7, 11),
    (11, 6),
];

fn positive(what: &str, k: usize, min: usize) -> Result<()> {
    if k < min {
        Err(CoposError::InvalidParameter(format!(
            "{what} requires a parameter >= {min}, got {k}"
        )))
    } else {
        Ok(())
    }
}

fn cycle_edges(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).map(move |i| (i, (i + 1) % n))
}

/// Index helpers for the `G_k` labelling.
pub fn gk_u(_k: usize, i: usize) -> usize {
    i
}
pub fn gk_v(k: usize, i: usize) -> usize {
    k + 1 + i
}
pub fn gk_w(k: usize, i: usize) -> usize {
    assert!(i >= 1 && i <= k);
    2 * (k + 1) + i - 1
}

/// Pairs `(i, j)`, `i < j`, of `0..k` in lexicographic order.
fn lk_pairs(k: usize) -> Vec<(usize, usize)> {
    (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect()
}

/// Label of `a_ij` (`which = 0`), `b_ij` (1) or `c_ij` (2) in `L_k`.
pub fn lk_triple(k: usize, pair: usize, which: usize) -> usize {
    k + 3 * pair + which
}

fn lk_edges(k: usize, prime: bool) -> Vec<(usize, usize)> {
    let pairs = lk_pairs(k);
    let mut edges = Vec::new();
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let (a, b, c) = (lk_triple(k, p, 0), lk_triple(k, p, 1), lk_triple(k, p, 2));
        edges.extend([(i, a), (a, b), (b, j), (j, c), (c, i)]);
    }
    for p in 0..pairs.len() {
        for q in (p + 1)..pairs.len() {
            for x in 0..3 {
                for y in 0..3 {
                    // L_k' drops {a,c} and {b,c} across distinct pairs.
                    if prime && (x == 2) != (y == 2) {
                        continue;
                    }
                    edges.push((lk_triple(k, p, x), lk_triple(k, q, y)));
                }
            }
        }
    }
    edges
}

impl Family {
    /// Family from its command-line name and integer parameters.
    pub fn from_name(name: &str, p: &[usize]) -> Result<Family> {
        let arg = |i: usize| {
            p.get(i).copied().ok_or_else(|| {
                CoposError::InvalidParameter(format!("family {name} needs {} parameter(s)", i + 1))
            })
        };
        Ok(match name {
            "cycle" => Family::Cycle(arg(0)?),
            "complete" => Family::Complete(arg(0)?),
            "complete-bipartite" => Family::CompleteBipartite(arg(0)?, arg(1)?),
            "star" => Family::Star(arg(0)?),
            "graph-b" | "b" => Family::GraphB,
            "graph-c" | "c" => Family::GraphC,
            "gk" => Family::Gk(arg(0)?),
            "lk" => Family::Lk(arg(0)?),
            "lk-prime" => Family::LkPrime(arg(0)?),
            "icosahedron" => Family::Icosahedron,
            _ => return Err(CoposError::InvalidParameter(format!("unknown family {name:?}"))),
        })
    }

    pub fn build(&self) -> Result<Graph> {
        let g = match self {
            &Family::Cycle(n) => {
                positive("cycle", n, 3)?;
                Graph::new(n, cycle_edges(n))?.with_name(format!("C{n}"))
            }
            &Family::Complete(n) => {
                positive("complete", n, 1)?;
                let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
                Graph::new(n, edges)?.with_name(format!("K{n}"))
            }
            &Family::CompleteBipartite(a, b) => {
                positive("complete_bipartite", a.min(b), 1)?;
                let edges = (0..a).flat_map(|i| (a..a + b).map(move |j| (i, j)));
                Graph::new(a + b, edges)?.with_name(format!("K{a},{b}"))
            }
            &Family::Star(n) => {
                positive("star", n, 1)?;
                Graph::new(n + 1, (1..=n).map(|i| (0, i)))?.with_name(format!("T{n}"))
            }
            Family::GraphB => {
                Graph::new(8, cycle_edges(8).chain(GRAPH_B_CHORDS))?.with_name("B")
            }
            Family::GraphC => {
                Graph::new(8, cycle_edges(8).chain(GRAPH_C_CHORDS))?.with_name("C")
            }
            &Family::Gk(k) => {
                positive("G_k", k, 1)?;
                let mut edges = Vec::new();
                for i in 0..=k {
                    for j in 0..=k {
                        if i != j || i == 0 {
                            edges.push((gk_u(k, i), gk_v(k, j)));
                        }
                    }
                }
                for i in 1..=k {
                    edges.push((gk_u(k, i), gk_w(k, i)));
                    edges.push((gk_v(k, i), gk_w(k, i)));
                }
                Graph::new(3 * k + 2, edges)?.with_name(format!("G_{k}"))
            }
            &Family::Lk(k) | &Family::LkPrime(k) => {
                positive("L_k", k, 2)?;
                let prime = matches!(self, Family::LkPrime(_));
                let n = k + 3 * lk_pairs(k).len();
                let name = if prime {
                    format!("L'_{k}")
                } else {
                    format!("L_{k}")
                };
                Graph::new(n, lk_edges(k, prime))?.with_name(name)
            }
            Family::Icosahedron => {
                Graph::new(12, ICOSAHEDRON.iter().map(|&(a, b)| (a - 1, b - 1)))?
                    .with_name("icosahedron")
            }
            Family::DisjointUnion(a, b) => {
                let (g, h) = (a.build()?, b.build()?);
                let name = format!(
                    "{}+{}",
                    g.name().unwrap_or("G"),
                    h.name().unwrap_or("H")
                );
                g.disjoint_union(&h).with_name(name)
            }
        };
        Ok(g)
    }

    /// The vertex set `{u_0..u_k, v_0..v_k}` of `G_k`.
    pub fn gk_uv(k: usize) -> Vec<usize> {
        (0..2 * (k + 1)).collect()
    }

    /// The vertex set `{w_1..w_k}` of `G_k`.
    pub fn gk_w_set(k: usize) -> Vec<usize> {
        (1..=k).map(|i| gk_w(k, i)).collect()
    }

    /// The set `S_k = {s_1..s_k}` of `L_k`.
    pub fn lk_s_set(k: usize) -> Vec<usize> {
        (0..k).collect()
    }

    /// The clique `{a_ij, b_ij}` over all pairs in `L_k` / `L_k'`.
    pub fn lk_ab_set(k: usize) -> Vec<usize> {
        (0..lk_pairs(k).len())
            .flat_map(|p| [lk_triple(k, p, 0), lk_triple(k, p, 1)])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_cycle(g: &Graph, order: &[usize]) -> bool {
        g.edge_count() == order.len()
            && (0..order.len()).all(|i| g.adjacent(order[i], order[(i + 1) % order.len()]))
    }

    #[test]
    fn g1_is_a_five_cycle() {
        let g = Family::Gk(1).build().unwrap();
        // u0 - v1 - w1 - u1 - v0 - u0
        let order = [gk_u(1, 0), gk_v(1, 1), gk_w(1, 1), gk_u(1, 1), gk_v(1, 0)];
        assert!(is_cycle(&g, &order));
    }

    #[test]
    fn l2_is_a_five_cycle() {
        let g = Family::Lk(2).build().unwrap();
        // s1 - a12 - b12 - s2 - c12
        assert!(is_cycle(&g, &[0, 2, 3, 1, 4]));
    }

    #[test]
    fn icosahedron_is_five_regular() {
        let g = Family::Icosahedron.build().unwrap();
        assert_eq!(g.n(), 12);
        assert_eq!(g.edge_count(), 30);
        assert!((0..12).all(|v| g.degree(v) == 5));
    }

    #[test]
    fn sizes() {
        assert_eq!(Family::Gk(2).build().unwrap().n(), 8);
        assert_eq!(Family::Gk(3).build().unwrap().n(), 11);
        assert_eq!(Family::Lk(3).build().unwrap().n(), 12);
        assert_eq!(Family::Star(3).build().unwrap().n(), 4);
        let l = Family::Lk(3).build().unwrap();
        let lp = Family::LkPrime(3).build().unwrap();
        assert!(lp.edges().iter().all(|e| l.edges().contains(e)));
        assert!(lp.edge_count() < l.edge_count());
    }

    #[test]
    fn lk_cliques() {
        let l = Family::Lk(3).build().unwrap();
        assert!(l.is_clique(&Family::lk_ab_set(3)));
        let cs: Vec<usize> = (0..3).map(|p| lk_triple(3, p, 2)).collect();
        assert!(l.is_clique(&cs));
    }

    #[test]
    fn invalid_parameters() {
        assert!(Family::Cycle(2).build().is_err());
        assert!(Family::Gk(0).build().is_err());
        assert!(Family::Lk(1).build().is_err());
    }
}
