//! Minimum-cost bipartite matching saturating the left side, exact costs.

use crate::rational::Rat;

struct Arc {
    to: usize,
    cap: i32,
    cost: Rat,
}

/// Matches every left vertex to a distinct right vertex along `edges = (left, right, cost)`,
/// minimizing total cost. `None` if no such matching exists.
pub fn min_cost_left_perfect(n_left: usize, n_right: usize, edges: &[(usize, usize, Rat)]) -> Option<Vec<usize>> {
    let source = n_left + n_right;
    let sink = source + 1;
    let nodes = sink + 1;
    let mut arcs: Vec<Arc> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let add = |arcs: &mut Vec<Arc>, adj: &mut Vec<Vec<usize>>, a: usize, b: usize, cost: Rat| {
        adj[a].push(arcs.len());
        arcs.push(Arc { to: b, cap: 1, cost: cost.clone() });
        adj[b].push(arcs.len());
        arcs.push(Arc { to: a, cap: 0, cost: -cost });
    };
    for l in 0..n_left {
        add(&mut arcs, &mut adj, source, l, Rat::default());
    }
    for r in 0..n_right {
        add(&mut arcs, &mut adj, n_left + r, sink, Rat::default());
    }
    for (l, r, c) in edges {
        add(&mut arcs, &mut adj, *l, n_left + r, c.clone());
    }

    for _ in 0..n_left {
        // Bellman-Ford: residual costs may be negative, but there is no negative cycle.
        let mut dist: Vec<Option<Rat>> = vec![None; nodes];
        let mut via: Vec<Option<usize>> = vec![None; nodes];
        dist[source] = Some(Rat::default());
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                let Some(du) = dist[u].clone() else { continue };
                for &a in &adj[u] {
                    if arcs[a].cap == 0 {
                        continue;
                    }
                    let nd = &du + &arcs[a].cost;
                    let v = arcs[a].to;
                    if dist[v].as_ref().map_or(true, |d| nd < *d) {
                        dist[v] = Some(nd);
                        via[v] = Some(a);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist[sink].as_ref()?;
        let mut v = sink;
        while v != source {
            let a = via[v].expect("path recorded");
            arcs[a].cap -= 1;
            arcs[a ^ 1].cap += 1;
            v = arcs[a ^ 1].to;
        }
    }

    let mut out = vec![usize::MAX; n_left];
    for l in 0..n_left {
        for &a in &adj[l] {
            let to = arcs[a].to;
            if a % 2 == 0 && to >= n_left && to < n_left + n_right && arcs[a].cap == 0 {
                out[l] = to - n_left;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn brute(n_left: usize, n_right: usize, edges: &[(usize, usize, Rat)]) -> Option<Rat> {
        fn go(l: usize, n_left: usize, used: &mut Vec<bool>, edges: &[(usize, usize, Rat)], acc: Rat, best: &mut Option<Rat>) {
            if l == n_left {
                if best.as_ref().map_or(true, |b| acc < *b) {
                    *best = Some(acc);
                }
                return;
            }
            for (a, r, c) in edges {
                if *a == l && !used[*r] {
                    used[*r] = true;
                    go(l + 1, n_left, used, edges, &acc + c, best);
                    used[*r] = false;
                }
            }
        }
        let mut best = None;
        go(0, n_left, &mut vec![false; n_right], edges, Rat::default(), &mut best);
        best
    }

    #[test]
    fn picks_cheaper_crossing() {
        let e = vec![(0, 0, int(1)), (0, 1, int(2)), (1, 0, int(1)), (1, 1, int(5))];
        let m = min_cost_left_perfect(2, 2, &e).unwrap();
        assert_eq!(m, vec![1, 0]);
        assert!(min_cost_left_perfect(2, 1, &[(0, 0, int(1)), (1, 0, int(1))]).is_none());
    }

    proptest! {
        #[test]
        fn matches_brute_force(n_left in 1usize..5, n_right in 1usize..6, raw in prop::collection::vec((0usize..5, 0usize..6, 0i64..10), 0..20)) {
            let mut edges: Vec<(usize, usize, Rat)> = raw.into_iter()
                .filter(|(l, r, _)| *l < n_left && *r < n_right)
                .map(|(l, r, c)| (l, r, int(c)))
                .collect();
            edges.sort();
            edges.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
            let got = min_cost_left_perfect(n_left, n_right, &edges);
            let want = brute(n_left, n_right, &edges);
            match (got, want) {
                (None, None) => {}
                (Some(m), Some(w)) => {
                    let mut seen = vec![false; n_right];
                    let mut cost = Rat::default();
                    for (l, &r) in m.iter().enumerate() {
                        prop_assert!(!seen[r]);
                        seen[r] = true;
                        let c = edges.iter().find(|e| e.0 == l && e.1 == r).map(|e| e.2.clone());
                        prop_assert!(c.is_some());
                        cost += c.unwrap();
                    }
                    prop_assert_eq!(cost, w);
                }
                (g, w) => prop_assert!(false, "{:?} vs {:?}", g, w),
            }
        }
    }
}
