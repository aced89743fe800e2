//! Dinic's blocking-flow maximum flow on integer capacities.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    to: Vec<u32>,
    cap: Vec<i64>,
    adj: Vec<Vec<u32>>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Number of arcs, counting each residual pair once.
    pub fn num_arcs(&self) -> usize {
        self.to.len() / 2
    }

    /// Adds arc `u -> v` with capacity `c_uv` and its reverse with `c_vu`.
    pub fn add_edge(&mut self, u: usize, v: usize, c_uv: i64, c_vu: i64) {
        debug_assert!(c_uv >= 0 && c_vu >= 0);
        let e = self.to.len() as u32;
        self.to.push(v as u32);
        self.cap.push(c_uv);
        self.to.push(u as u32);
        self.cap.push(c_vu);
        self.adj[u].push(e);
        self.adj[v].push(e + 1);
    }

    fn bfs(&self, s: usize, t: usize, level: &mut [i32]) -> bool {
        level.fill(-1);
        level[s] = 0;
        let mut q = VecDeque::new();
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e as usize] as usize;
                if self.cap[e as usize] > 0 && level[v] < 0 {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        level[t] >= 0
    }

    /// Maximum `s`-`t` flow; the network keeps the residual capacities.
    pub fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        assert!(s != t);
        let mut total: i64 = 0;
        let mut level = vec![-1i32; self.n];
        let mut it = vec![0usize; self.n];
        let mut path: Vec<u32> = Vec::new();
        while self.bfs(s, t, &mut level) {
            it.fill(0);
            // iterative DFS with current-arc pointers
            loop {
                let u = match path.last() {
                    Some(&e) => self.to[e as usize] as usize,
                    None => s,
                };
                if u == t {
                    let f = path
                        .iter()
                        .map(|&e| self.cap[e as usize])
                        .min()
                        .unwrap_or(0);
                    let mut cut_at = path.len();
                    for (i, &e) in path.iter().enumerate() {
                        self.cap[e as usize] -= f;
                        self.cap[(e ^ 1) as usize] += f;
                        if self.cap[e as usize] == 0 && cut_at == path.len() {
                            cut_at = i;
                        }
                    }
                    total += f;
                    path.truncate(cut_at);
                    continue;
                }
                let mut advanced = false;
                while it[u] < self.adj[u].len() {
                    let e = self.adj[u][it[u]];
                    let v = self.to[e as usize] as usize;
                    if self.cap[e as usize] > 0 && level[v] == level[u] + 1 {
                        path.push(e);
                        advanced = true;
                        break;
                    }
                    it[u] += 1;
                }
                if advanced {
                    continue;
                }
                // dead end: retreat
                level[u] = -1;
                match path.pop() {
                    Some(e) => {
                        let p = self.to[(e ^ 1) as usize] as usize;
                        it[p] += 1;
                    }
                    None => break,
                }
            }
        }
        total
    }

    /// Nodes reachable from `s` in the residual network (after `max_flow`).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &e in &self.adj[u] {
                let v = self.to[e as usize] as usize;
                if self.cap[e as usize] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn classic_example() {
        // CLRS figure: max flow 23
        let mut g = FlowNetwork::new(6);
        let edges = [
            (0, 1, 16),
            (0, 2, 13),
            (1, 2, 10),
            (2, 1, 4),
            (1, 3, 12),
            (3, 2, 9),
            (2, 4, 14),
            (4, 3, 7),
            (3, 5, 20),
            (4, 5, 4),
        ];
        for (u, v, c) in edges {
            g.add_edge(u, v, c, 0);
        }
        assert_eq!(g.max_flow(0, 5), 23);
    }

    /// Brute-force minimum cut over all subsets containing `s` and not `t`.
    fn brute_min_cut(n: usize, edges: &[(usize, usize, i64)]) -> i64 {
        let mut best = i64::MAX;
        for mask in 0..(1u32 << n) {
            if mask & 1 == 0 || mask >> (n - 1) & 1 == 1 {
                continue;
            }
            let c: i64 = edges
                .iter()
                .filter(|(u, v, _)| mask >> u & 1 == 1 && mask >> v & 1 == 0)
                .map(|e| e.2)
                .sum();
            best = best.min(c);
        }
        best
    }

    #[test]
    fn random_graphs_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.gen_range(2..9);
            let m = rng.gen_range(0..20);
            let mut edges = Vec::new();
            let mut g = FlowNetwork::new(n);
            for _ in 0..m {
                let u = rng.gen_range(0..n);
                let v = rng.gen_range(0..n);
                if u == v {
                    continue;
                }
                let c = rng.gen_range(0..10);
                edges.push((u, v, c));
                g.add_edge(u, v, c, 0);
            }
            let f = g.max_flow(0, n - 1);
            assert_eq!(f, brute_min_cut(n, &edges));
            let side = g.source_side(0);
            assert!(!side[n - 1]);
            let cut: i64 = edges
                .iter()
                .filter(|(u, v, _)| side[*u] && !side[*v])
                .map(|e| e.2)
                .sum();
            assert_eq!(cut, f);
        }
    }
}
