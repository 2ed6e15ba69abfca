//! Maximum bipartite matching (Hopcroft–Karp). Left vertices are processed in
//! index order and adjacency lists in the order given, so the result is a
//! deterministic function of the input.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    /// Right partner of each left vertex.
    pub left: Vec<Option<usize>>,
    /// Left partner of each right vertex.
    pub right: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left.iter().filter(|m| m.is_some()).count()
    }
}

pub fn hopcroft_karp(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> Matching {
    assert_eq!(adj.len(), n_left);
    let mut ml = vec![NIL; n_left];
    let mut mr = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];
    loop {
        // layered BFS from free left vertices
        let mut q = VecDeque::new();
        for u in 0..n_left {
            if ml[u] == NIL {
                dist[u] = 0;
                q.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                let w = mr[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut it = vec![0usize; n_left];
        for u in 0..n_left {
            if ml[u] == NIL {
                augment(u, adj, &mut ml, &mut mr, &mut dist, &mut it);
            }
        }
    }
    let opt = |x: usize| (x != NIL).then_some(x);
    Matching {
        left: ml.into_iter().map(opt).collect(),
        right: mr.into_iter().map(opt).collect(),
    }
}

fn augment(
    root: usize,
    adj: &[Vec<usize>],
    ml: &mut [usize],
    mr: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    // iterative DFS along the BFS layers
    let mut stack = vec![root];
    while let Some(&u) = stack.last() {
        if it[u] == adj[u].len() {
            dist[u] = usize::MAX;
            stack.pop();
            continue;
        }
        let v = adj[u][it[u]];
        let w = mr[v];
        if w == NIL {
            // flip the path
            for &x in stack.iter().rev() {
                let y = adj[x][it[x]];
                ml[x] = y;
                mr[y] = x;
            }
            return true;
        }
        if dist[w] == dist[u].wrapping_add(1) {
            stack.push(w);
        } else {
            it[u] += 1;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(n_right: usize, adj: &[Vec<usize>]) -> usize {
        fn go(u: usize, adj: &[Vec<usize>], used: &mut Vec<bool>) -> usize {
            if u == adj.len() {
                return 0;
            }
            let mut best = go(u + 1, adj, used);
            for &v in &adj[u] {
                if !used[v] {
                    used[v] = true;
                    best = best.max(1 + go(u + 1, adj, used));
                    used[v] = false;
                }
            }
            best
        }
        go(0, adj, &mut vec![false; n_right])
    }

    #[test]
    fn small_example() {
        let m = hopcroft_karp(2, 3, &[vec![0, 1], vec![1, 2]]);
        assert_eq!(m.size(), 2);
        assert_eq!(m.left, vec![Some(0), Some(1)]);
    }

    #[test]
    fn agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let nl = r.gen_range(0..7);
            let nr = r.gen_range(1..7);
            let adj: Vec<Vec<usize>> = (0..nl)
                .map(|_| (0..nr).filter(|_| r.gen_bool(0.35)).collect())
                .collect();
            let m = hopcroft_karp(nl, nr, &adj);
            assert_eq!(m.size(), brute(nr, &adj));
            for (u, v) in m.left.iter().enumerate() {
                if let Some(v) = v {
                    assert!(adj[u].contains(v));
                    assert_eq!(m.right[*v], Some(u));
                }
            }
        }
    }
}
