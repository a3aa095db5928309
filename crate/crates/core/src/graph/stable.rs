//! Exact stability number, stable-set enumeration, clique covers and
//! critical edges. All routines are exponential and guarded by a vertex cap.

use serde::{Deserialize, Serialize};

use super::{Graph, DEFAULT_VERTEX_CAP};
use crate::error::{CoposError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StableMode {
    /// Every stable set, including the empty one (`I(G)`).
    AllUpToAlpha,
    /// Stable sets of size `< α` (`I⁻(G)`).
    StrictlyBelowAlpha,
    /// Maximum stable sets (`I^max(G)`).
    MaximumOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StableSetFamily {
    pub sets: Vec<Vec<usize>>,
    pub alpha: usize,
    pub mode: StableMode,
}

fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(v)
        }
    })
}

fn to_vec(m: u128) -> Vec<usize> {
    bits(m).collect()
}

/// Greedy partition of `cand` into cliques; the count bounds `α(cand)`.
fn clique_cover_bound(adj: &[u128], cand: u128) -> usize {
    let mut rest = cand;
    let mut count = 0;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        let mut clique = 1u128 << v;
        let mut common = adj[v] & rest;
        while common != 0 {
            let u = common.trailing_zeros() as usize;
            clique |= 1u128 << u;
            common &= adj[u];
        }
        rest &= !clique;
        count += 1;
    }
    count
}

fn mis(adj: &[u128], cand: u128, size: usize, best: &mut usize) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + clique_cover_bound(adj, cand) <= *best {
        return;
    }
    // A vertex of degree <= 1 inside `cand` is always in some maximum
    // stable set of the remaining graph.
    let mut pick = None;
    let mut best_deg = 0;
    for v in bits(cand) {
        let d = (adj[v] & cand).count_ones();
        if d <= 1 {
            mis(adj, cand & !adj[v] & !(1u128 << v), size + 1, best);
            return;
        }
        if pick.is_none() || d > best_deg {
            pick = Some(v);
            best_deg = d;
        }
    }
    let v = pick.expect("cand is non-empty");
    mis(adj, cand & !adj[v] & !(1u128 << v), size + 1, best);
    mis(adj, cand & !(1u128 << v), size, best);
}

pub(crate) fn alpha_of_masks(adj: &[u128]) -> usize {
    let n = adj.len();
    let all = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let mut best = 0;
    mis(adj, all, 0, &mut best);
    best
}

fn enumerate(adj: &[u128], cand: u128, current: u128, max_size: usize, out: &mut Vec<u128>) {
    out.push(current);
    if current.count_ones() as usize == max_size {
        return;
    }
    for v in bits(cand) {
        let above = if v == 127 { 0 } else { !((1u128 << (v + 1)) - 1) };
        enumerate(
            adj,
            cand & !adj[v] & above,
            current | (1u128 << v),
            max_size,
            out,
        );
    }
}

/// k-colourability of the complement by backtracking with the usual
/// "new colour is at most one past the largest used" symmetry break.
fn partition_into_cliques(adj: &[u128], order: &[usize], k: usize) -> bool {
    fn go(adj: &[u128], order: &[usize], idx: usize, groups: &mut Vec<u128>, k: usize) -> bool {
        if idx == order.len() {
            return true;
        }
        let v = order[idx];
        for g in 0..groups.len() {
            if groups[g] & !adj[v] == 0 {
                groups[g] |= 1u128 << v;
                if go(adj, order, idx + 1, groups, k) {
                    return true;
                }
                groups[g] &= !(1u128 << v);
            }
        }
        if groups.len() < k {
            groups.push(1u128 << v);
            if go(adj, order, idx + 1, groups, k) {
                return true;
            }
            groups.pop();
        }
        false
    }
    go(adj, order, 0, &mut Vec::new(), k)
}

impl Graph {
    /// `α(G)` with the default vertex cap.
    pub fn alpha(&self) -> Result<usize> {
        self.alpha_with_cap(DEFAULT_VERTEX_CAP)
    }

    /// `α(G)` by branch and bound with greedy clique-cover pruning. The
    /// result is cached on the graph.
    pub fn alpha_with_cap(&self, cap: usize) -> Result<usize> {
        if let Some(&a) = self.alpha.get() {
            return Ok(a);
        }
        let adj = self.masks(cap)?;
        let a = alpha_of_masks(&adj);
        Ok(*self.alpha.get_or_init(|| a))
    }

    pub fn stable_sets(&self, mode: StableMode) -> Result<StableSetFamily> {
        self.stable_sets_with_cap(mode, DEFAULT_VERTEX_CAP)
    }

    /// Complete enumeration of stable sets in the requested mode, ordered
    /// by size and then lexicographically.
    pub fn stable_sets_with_cap(&self, mode: StableMode, cap: usize) -> Result<StableSetFamily> {
        let adj = self.masks(cap)?;
        let alpha = self.alpha_with_cap(cap)?;
        let all = if self.n == 128 {
            u128::MAX
        } else {
            (1u128 << self.n) - 1
        };
        let mut raw = Vec::new();
        enumerate(&adj, all, 0, alpha, &mut raw);
        let keep = |m: &u128| {
            let s = m.count_ones() as usize;
            match mode {
                StableMode::AllUpToAlpha => true,
                StableMode::StrictlyBelowAlpha => s < alpha,
                StableMode::MaximumOnly => s == alpha,
            }
        };
        let mut sets: Vec<Vec<usize>> = raw.into_iter().filter(keep).map(to_vec).collect();
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(StableSetFamily { sets, alpha, mode })
    }

    pub fn clique_cover_number(&self) -> Result<usize> {
        self.clique_cover_number_with_cap(DEFAULT_VERTEX_CAP)
    }

    /// `χ̄(G)`: fewest cliques covering `V`, found by exact colouring of the
    /// complement from `α(G)` upward.
    pub fn clique_cover_number_with_cap(&self, cap: usize) -> Result<usize> {
        if self.n == 0 {
            return Ok(0);
        }
        let adj = self.masks(cap)?;
        let all = if self.n == 128 {
            u128::MAX
        } else {
            (1u128 << self.n) - 1
        };
        let upper = clique_cover_bound(&adj, all);
        // Low-degree vertices first: they have the fewest clique options.
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&v| adj[v].count_ones());
        let lower = self.alpha_with_cap(cap)?;
        for k in lower..upper {
            if partition_into_cliques(&adj, &order, k) {
                return Ok(k);
            }
        }
        Ok(upper)
    }

    pub fn critical_edges(&self) -> Result<Vec<(usize, usize)>> {
        self.critical_edges_with_cap(DEFAULT_VERTEX_CAP)
    }

    /// Edges `e` with `α(G \ e) = α(G) + 1`.
    pub fn critical_edges_with_cap(&self, cap: usize) -> Result<Vec<(usize, usize)>> {
        let mut adj = self.masks(cap)?;
        let alpha = self.alpha_with_cap(cap)?;
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            adj[a] &= !(1u128 << b);
            adj[b] &= !(1u128 << a);
            if alpha_of_masks(&adj) > alpha {
                out.push((a, b));
            }
            adj[a] |= 1u128 << b;
            adj[b] |= 1u128 << a;
        }
        Ok(out)
    }

    /// Whether `G_c = (V, critical edges)` is connected.
    pub fn critical_subgraph_connected(&self) -> Result<bool> {
        if self.n <= 1 {
            return Ok(true);
        }
        let critical = Graph::new(self.n, self.critical_edges()?)?;
        Ok(critical.is_connected())
    }

    /// Checks `α(G \ S^⊥) = α(G) - |S|` for a stable set `S`.
    pub fn extends_to_maximum(&self, set: &[usize]) -> Result<bool> {
        if !self.is_stable(set) {
            return Err(CoposError::InvalidParameter(format!(
                "{set:?} is not a stable set"
            )));
        }
        let (rest, _) = self.delete_extended_neighborhood(set);
        Ok(rest.alpha()? + set.len() == self.alpha()?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn brute_alpha(g: &Graph) -> usize {
        let n = g.n();
        (0u32..(1 << n))
            .filter(|m| {
                let set: Vec<usize> = (0..n).filter(|&i| m & (1 << i) != 0).collect();
                g.is_stable(&set)
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(Family::Cycle(5).build().unwrap().alpha().unwrap(), 2);
        assert_eq!(Family::Complete(4).build().unwrap().alpha().unwrap(), 1);
        assert_eq!(Family::Gk(3).build().unwrap().alpha().unwrap(), 4);
        assert_eq!(Graph::empty(0).alpha().unwrap(), 0);
    }

    #[test]
    fn alpha_matches_brute_force_on_families() {
        for fam in [
            Family::GraphB,
            Family::GraphC,
            Family::Icosahedron,
            Family::Gk(2),
            Family::Lk(3),
            Family::LkPrime(3),
            Family::Star(4),
        ] {
            let g = fam.build().unwrap();
            assert_eq!(g.alpha().unwrap(), brute_alpha(&g), "{fam:?}");
        }
    }

    #[test]
    fn resource_cap() {
        let g = Graph::empty(10);
        assert!(matches!(
            g.alpha_with_cap(5),
            Err(CoposError::ResourceCap { .. })
        ));
    }

    #[test]
    fn stable_set_examples() {
        let c5 = Family::Cycle(5).build().unwrap();
        let fam = c5.stable_sets(StableMode::MaximumOnly).unwrap();
        assert_eq!(fam.sets.len(), 5);
        assert!(fam.sets.iter().all(|s| s.len() == 2));

        let k3 = Family::Complete(3).build().unwrap();
        let fam = k3.stable_sets(StableMode::StrictlyBelowAlpha).unwrap();
        assert_eq!(fam.sets, vec![Vec::<usize>::new()]);

        let l3 = Family::Lk(3).build().unwrap();
        let fam = l3.stable_sets(StableMode::MaximumOnly).unwrap();
        assert!(fam.sets.contains(&vec![0, 1, 2]));

        let all = c5.stable_sets(StableMode::AllUpToAlpha).unwrap();
        assert_eq!(all.sets.len(), 1 + 5 + 5);
        assert!(all.sets[0].is_empty());
    }

    #[test]
    fn clique_cover_examples() {
        assert_eq!(
            Family::Cycle(5).build().unwrap().clique_cover_number().unwrap(),
            3
        );
        assert_eq!(
            Family::Complete(6).build().unwrap().clique_cover_number().unwrap(),
            1
        );
        assert_eq!(
            Family::Cycle(4).build().unwrap().clique_cover_number().unwrap(),
            2
        );
    }

    #[test]
    fn critical_edge_examples() {
        let c5 = Family::Cycle(5).build().unwrap();
        assert_eq!(c5.critical_edges().unwrap().len(), 5);
        assert!(c5.critical_subgraph_connected().unwrap());
        let c4 = Family::Cycle(4).build().unwrap();
        assert!(c4.critical_edges().unwrap().is_empty());
        assert!(!c4.critical_subgraph_connected().unwrap());
        let k2 = Family::Complete(2).build().unwrap();
        assert_eq!(k2.critical_edges().unwrap(), vec![(0, 1)]);
        assert!(Graph::empty(1).critical_subgraph_connected().unwrap());
    }

    #[test]
    fn g2_critical_subgraph_connected() {
        let g2 = Family::Gk(2).build().unwrap();
        assert!(g2.critical_subgraph_connected().unwrap());
    }

    #[test]
    fn konig_on_bipartite() {
        // α = n - ν (maximum matching) for bipartite graphs.
        fn max_matching(g: &Graph) -> usize {
            let edges = g.edges();
            (0u64..(1 << edges.len()))
                .filter(|m| {
                    let mut used = vec![false; g.n()];
                    edges.iter().enumerate().all(|(k, &(a, b))| {
                        if m & (1 << k) == 0 {
                            return true;
                        }
                        let ok = !used[a] && !used[b];
                        used[a] = true;
                        used[b] = true;
                        ok
                    })
                })
                .map(|m| m.count_ones() as usize)
                .max()
                .unwrap()
        }
        for g in [
            Family::Cycle(6).build().unwrap(),
            Family::CompleteBipartite(2, 3).build().unwrap(),
            Family::Star(4).build().unwrap(),
        ] {
            assert_eq!(g.alpha().unwrap(), g.n() - max_matching(&g));
        }
    }
}
