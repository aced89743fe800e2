//! Exact ground states for small `N` by branch and bound over lattice animals.
//!
//! Connected sets are generated with Redelmeier's method: each translation
//! class appears once, rooted at its smallest site in `(cell, sub)` order,
//! with the root placed in cell `(0, 0, 0)`. A branch is cut when
//!
//! `bonds(S) + w_max * (top r contact counts) + b*(r) <= best`,
//!
//! where `r` atoms remain to be placed and `b*(r)` is the exact optimum for
//! `r` atoms, computed first for every smaller size.

use std::sync::Arc;

use crate::discrete::{energy, Configuration};
use crate::lattice::{LatticeSpec, Region, SiteId};

use super::CrystalError;

/// Largest `N` accepted by [`exact_ground_state`].
pub const EXACT_MAX_N: usize = 10;

struct Grid {
    side: i64,
    k: usize,
    n: i64,
}

impl Grid {
    fn index(&self, cell: [i64; 3], sub: usize) -> Option<usize> {
        let s = self.side;
        let c = [cell[0] + self.n, cell[1] + self.n, cell[2] + self.n];
        if c.iter().any(|&v| v < 0 || v >= s) {
            return None;
        }
        Some((((c[0] * s + c[1]) * s + c[2]) as usize) * self.k + sub)
    }

    fn site(&self, idx: usize) -> SiteId {
        let sub = idx % self.k;
        let mut r = (idx / self.k) as i64;
        let s = self.side;
        let z = r % s;
        r /= s;
        let y = r % s;
        let x = r / s;
        SiteId::new([x - self.n, y - self.n, z - self.n], sub)
    }
}

struct Search {
    target: usize,
    nbrs: Vec<Vec<(u32, f64)>>,
    allowed: Vec<bool>,
    marked: Vec<bool>,
    in_s: Vec<bool>,
    count: Vec<u8>,
    hist: Vec<u32>,
    s_list: Vec<u32>,
    bonds: f64,
    best: f64,
    best_set: Vec<u32>,
    bstar: Vec<f64>,
    w_max: f64,
    nodes: u64,
}

impl Search {
    fn add(&mut self, v: usize) {
        if self.count[v] > 0 {
            self.hist[self.count[v] as usize] -= 1;
        }
        self.in_s[v] = true;
        self.s_list.push(v as u32);
        for k in 0..self.nbrs[v].len() {
            let (u, w) = self.nbrs[v][k];
            let u = u as usize;
            if self.in_s[u] {
                self.bonds += w;
                continue;
            }
            if !self.allowed[u] {
                continue;
            }
            if self.count[u] > 0 {
                self.hist[self.count[u] as usize] -= 1;
            }
            self.count[u] += 1;
            self.hist[self.count[u] as usize] += 1;
        }
    }

    fn remove(&mut self, v: usize) {
        self.s_list.pop();
        self.in_s[v] = false;
        for k in 0..self.nbrs[v].len() {
            let (u, w) = self.nbrs[v][k];
            let u = u as usize;
            if self.in_s[u] {
                self.bonds -= w;
                continue;
            }
            if !self.allowed[u] {
                continue;
            }
            self.hist[self.count[u] as usize] -= 1;
            self.count[u] -= 1;
            if self.count[u] > 0 {
                self.hist[self.count[u] as usize] += 1;
            }
        }
        if self.count[v] > 0 {
            self.hist[self.count[v] as usize] += 1;
        }
    }

    fn bound(&self) -> f64 {
        let mut r = self.target - self.s_list.len();
        let rest = self.bstar[r];
        let mut top = 0u64;
        for c in (1..self.hist.len()).rev() {
            if r == 0 {
                break;
            }
            let take = (self.hist[c] as usize).min(r);
            top += (take * c) as u64;
            r -= take;
        }
        self.bonds + self.w_max * top as f64 + rest
    }

    fn improve(&mut self) {
        if self.bonds > self.best + 1e-9 {
            self.best = self.bonds;
            self.best_set = self.s_list.clone();
        }
    }

    fn run(&mut self, untried: &mut Vec<u32>) {
        while let Some(v) = untried.pop() {
            let v = v as usize;
            self.nodes += 1;
            self.add(v);
            if self.s_list.len() == self.target {
                self.improve();
            } else if self.bound() > self.best + 1e-9 {
                let mut next = untried.clone();
                let mut newly = Vec::new();
                for &(u, _) in &self.nbrs[v] {
                    let ui = u as usize;
                    if self.allowed[ui] && !self.marked[ui] && !self.in_s[ui] {
                        self.marked[ui] = true;
                        newly.push(u);
                        next.push(u);
                    }
                }
                self.run(&mut next);
                for u in newly {
                    self.marked[u as usize] = false;
                }
            }
            self.remove(v);
        }
    }
}

/// Result of the exhaustive search.
#[derive(Debug, Clone)]
pub struct ExactResult {
    pub config: Configuration,
    pub energy: f64,
    /// Weighted count of occupied-occupied bonds.
    pub bonds: f64,
    /// Search nodes visited for the final size.
    pub nodes: u64,
}

/// Minimal-energy connected configuration of `n <= 10` atoms, rooted at its
/// smallest site in cell `(0, 0, 0)`, sites sorted.
pub fn exact_ground_state(spec: &Arc<LatticeSpec>, n: usize) -> Result<ExactResult, CrystalError> {
    if n == 0 || n > EXACT_MAX_N {
        return Err(CrystalError::ExactRange(n));
    }
    let mut bstar = vec![0.0; n + 1];
    let mut last = None;
    for size in 1..=n {
        let r = search_size(spec, size, &bstar);
        bstar[size] = r.0;
        last = Some(r);
    }
    let (bonds, sites, nodes) = last.expect("n >= 1");
    let mut sites = sites;
    sites.sort();
    let config = Configuration::unscaled(spec.clone(), sites)?;
    let e = energy(&config, &Region::All);
    Ok(ExactResult {
        config,
        energy: e,
        bonds,
        nodes,
    })
}

fn search_size(spec: &LatticeSpec, n: usize, bstar: &[f64]) -> (f64, Vec<SiteId>, u64) {
    let k = spec.num_sublattices();
    let grid = Grid {
        side: 2 * n as i64 + 1,
        k,
        n: n as i64,
    };
    let total = (grid.side * grid.side * grid.side) as usize * k;
    let mut nbrs = Vec::with_capacity(total);
    let mut w_max: f64 = 0.0;
    let mut z_max = 0;
    for idx in 0..total {
        let s = grid.site(idx);
        let list: Vec<(u32, f64)> = spec
            .stencil(s.sub)
            .iter()
            .filter_map(|b| {
                let y = spec.neighbor_along(&s, b);
                grid.index(y.cell, y.sub).map(|j| (j as u32, b.weight))
            })
            .collect();
        for b in spec.stencil(s.sub) {
            w_max = w_max.max(b.weight);
        }
        z_max = z_max.max(spec.stencil(s.sub).len());
        nbrs.push(list);
    }
    let mut best: (f64, Vec<SiteId>, u64) = (-1.0, Vec::new(), 0);
    for root_sub in 0..k {
        let root = SiteId::new([0, 0, 0], root_sub);
        let root_idx = grid.index(root.cell, root.sub).expect("root in grid");
        let allowed: Vec<bool> = (0..total).map(|i| grid.site(i) > root).collect();
        let mut search = Search {
            target: n,
            nbrs: nbrs.clone(),
            allowed,
            marked: vec![false; total],
            in_s: vec![false; total],
            count: vec![0; total],
            hist: vec![0; z_max + 1],
            s_list: Vec::with_capacity(n),
            bonds: 0.0,
            best: best.0,
            best_set: Vec::new(),
            bstar: bstar.to_vec(),
            w_max,
            nodes: 0,
        };
        search.marked[root_idx] = true;
        search.run(&mut vec![root_idx as u32]);
        if !search.best_set.is_empty() {
            let sites = search
                .best_set
                .iter()
                .map(|&i| grid.site(i as usize))
                .collect();
            best = (search.best, sites, best.2 + search.nodes);
        } else {
            best.2 += search.nodes;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_cubic, make_fcc};

    #[test]
    fn small_sizes_fcc() {
        let l = Arc::new(make_fcc());
        let expect = [(1, 12.0), (2, 22.0), (3, 30.0), (4, 36.0)];
        for (n, e) in expect {
            let r = exact_ground_state(&l, n).unwrap();
            assert_eq!(r.energy, e, "n = {n}");
            assert_eq!(r.config.len(), n);
        }
    }

    #[test]
    fn cubic_square_and_cube() {
        let l = Arc::new(make_cubic());
        // 4 atoms: a unit square, 4 bonds
        assert_eq!(exact_ground_state(&l, 4).unwrap().bonds, 4.0);
        // 8 atoms: the unit cube, 12 bonds
        assert_eq!(exact_ground_state(&l, 8).unwrap().bonds, 12.0);
    }

    /// Exhaustive count over all subsets of a small ball, with no pruning.
    #[test]
    fn agrees_with_unpruned_enumeration() {
        let l = Arc::new(make_fcc());
        let ball = l
            .enumerate_sites(&Region::Ball {
                center: crate::geometry::Vec3::zeros(),
                radius: 1.45,
            })
            .unwrap();
        for n in 2..=5 {
            let mut best = 0usize;
            let m = ball.len();
            let mut idx: Vec<usize> = (0..n).collect();
            loop {
                let sites: Vec<SiteId> = idx.iter().map(|&i| ball[i]).collect();
                let c = Configuration::unscaled(l.clone(), sites).unwrap();
                best = best.max(crate::discrete::bond_count(&c));
                // next combination
                let mut i = n;
                while i > 0 && idx[i - 1] == m - n + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..n {
                    idx[j] = idx[j - 1] + 1;
                }
            }
            assert_eq!(
                exact_ground_state(&l, n).unwrap().bonds,
                best as f64,
                "n = {n}"
            );
        }
    }

    #[test]
    fn range_is_checked() {
        let l = Arc::new(make_fcc());
        assert!(exact_ground_state(&l, 0).is_err());
        assert!(exact_ground_state(&l, 11).is_err());
    }
}
