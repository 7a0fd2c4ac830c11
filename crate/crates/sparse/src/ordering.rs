//! Fill-reducing orderings on symmetric adjacency graphs.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    Rcm,
    #[default]
    NestedDissection,
    /// minimum degree; `SparseLu` delays weak-diagonal rows until a coupled neighbour is eliminated
    MinimumDegree,
}

impl Ordering {
    pub fn permutation(self, adj: &[Vec<usize>]) -> Vec<usize> {
        match self {
            Ordering::Natural => (0..adj.len()).collect(),
            Ordering::Rcm => rcm(adj),
            Ordering::NestedDissection => nested_dissection(adj),
            Ordering::MinimumDegree => crate::minimum_degree(adj),
        }
    }
}

/// BFS level structure restricted to nodes with `inset[v] == stamp`.
fn levels(adj: &[Vec<usize>], root: usize, inset: &[u32], stamp: u32, seen: &mut [u32], seen_stamp: u32) -> Vec<Vec<usize>> {
    let mut out = vec![vec![root]];
    seen[root] = seen_stamp;
    loop {
        let mut next = Vec::new();
        for &v in out.last().unwrap() {
            for &w in &adj[v] {
                if inset[w] == stamp && seen[w] != seen_stamp {
                    seen[w] = seen_stamp;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return out;
        }
        out.push(next);
    }
}

struct Graph<'a> {
    adj: &'a [Vec<usize>],
    inset: Vec<u32>,
    seen: Vec<u32>,
    stamp: u32,
}

impl<'a> Graph<'a> {
    fn new(adj: &'a [Vec<usize>]) -> Self {
        Self { adj, inset: vec![0; adj.len()], seen: vec![0; adj.len()], stamp: 0 }
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp += 1;
        self.stamp
    }

    fn mark(&mut self, nodes: &[usize]) -> u32 {
        let s = self.next_stamp();
        for &v in nodes {
            self.inset[v] = s;
        }
        s
    }

    fn degree(&self, v: usize, set: u32) -> usize {
        self.adj[v].iter().filter(|&&w| self.inset[w] == set).count()
    }

    fn bfs(&mut self, root: usize, set: u32) -> Vec<Vec<usize>> {
        let s = self.next_stamp();
        levels(self.adj, root, &self.inset, set, &mut self.seen, s)
    }

    /// Pseudo-peripheral node by repeated BFS from a minimum-degree start.
    fn peripheral(&mut self, nodes: &[usize], set: u32) -> (usize, Vec<Vec<usize>>) {
        let mut root = *nodes.iter().min_by_key(|&&v| (self.degree(v, set), v)).unwrap();
        let mut lv = self.bfs(root, set);
        loop {
            let last = lv.last().unwrap();
            let cand = *last.iter().min_by_key(|&&v| (self.degree(v, set), v)).unwrap();
            let lc = self.bfs(cand, set);
            if lc.len() > lv.len() {
                root = cand;
                lv = lc;
            } else {
                return (root, lv);
            }
        }
    }

    fn components(&mut self, nodes: &[usize], set: u32) -> Vec<Vec<usize>> {
        let s = self.next_stamp();
        let mut comps = Vec::new();
        for &v in nodes {
            if self.seen[v] == s {
                continue;
            }
            let lv = levels(self.adj, v, &self.inset, set, &mut self.seen, s);
            comps.push(lv.into_iter().flatten().collect());
        }
        comps
    }
}

/// Reverse Cuthill–McKee ordering; returns `perm` with `perm[new] = old`.
pub fn rcm(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut g = Graph::new(adj);
    let all: Vec<usize> = (0..n).collect();
    let set = g.mark(&all);
    let mut order = Vec::with_capacity(n);
    for comp in g.components(&all, set) {
        let (root, _) = g.peripheral(&comp, set);
        let s = g.next_stamp();
        let mut q = VecDeque::from([root]);
        g.seen[root] = s;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = adj[v].iter().copied().filter(|&w| g.seen[w] != s).collect();
            nb.sort_by_key(|&w| (adj[w].len(), w));
            for w in nb {
                g.seen[w] = s;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

const LEAF: usize = 32;

/// Nested dissection with BFS level-set separators on the graph of
/// supervariables (nodes with equal closed neighbourhoods); `perm[new] = old`.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let rep = crate::mindeg::compress(adj, &vec![false; n]);
    let mut id = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        if rep[v] == v {
            id[v] = members.len();
            members.push(Vec::new());
        }
    }
    for v in 0..n {
        members[id[rep[v]]].push(v);
    }
    let qadj: Vec<Vec<usize>> = members
        .iter()
        .enumerate()
        .map(|(s, m)| {
            let mut nb: Vec<usize> = adj[m[0]].iter().map(|&u| id[rep[u]]).filter(|&t| t != s).collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    nested_dissection_plain(&qadj).into_iter().flat_map(|s| members[s].iter().copied()).collect()
}

fn nested_dissection_plain(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut g = Graph::new(adj);
    let mut order = Vec::with_capacity(n);
    // Explicit stack of tasks; separators are emitted after both halves.
    enum Task {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Task::Split((0..n).collect())];
    while let Some(t) = stack.pop() {
        match t {
            Task::Emit(s) => order.extend(s),
            Task::Split(nodes) => {
                if nodes.len() <= LEAF {
                    order.extend(leaf_order(&mut g, nodes));
                    continue;
                }
                let set = g.mark(&nodes);
                let comps = g.components(&nodes, set);
                if comps.len() > 1 {
                    for c in comps.into_iter().rev() {
                        stack.push(Task::Split(c));
                    }
                    continue;
                }
                let (_, lv) = g.peripheral(&nodes, set);
                if lv.len() < 3 {
                    order.extend(leaf_order(&mut g, nodes));
                    continue;
                }
                let total = nodes.len() as f64;
                let mut best = None;
                let mut before = 0usize;
                for (i, l) in lv.iter().enumerate() {
                    let frac = before as f64 / total;
                    if i > 0 && i + 1 < lv.len() && (0.3..=0.6).contains(&frac) {
                        match best {
                            Some((_, sz)) if sz <= l.len() => {}
                            _ => best = Some((i, l.len())),
                        }
                    }
                    before += l.len();
                }
                let sidx = best.map(|b| b.0).unwrap_or_else(|| {
                    let mut acc = 0;
                    let mut k = 1;
                    for (i, l) in lv.iter().enumerate() {
                        acc += l.len();
                        if acc as f64 >= total / 2.0 {
                            k = i.clamp(1, lv.len() - 2);
                            break;
                        }
                    }
                    k
                });
                let a: Vec<usize> = lv[..sidx].iter().flatten().copied().collect();
                let b: Vec<usize> = lv[sidx + 1..].iter().flatten().copied().collect();
                let s = lv[sidx].clone();
                stack.push(Task::Emit(s));
                stack.push(Task::Split(b));
                stack.push(Task::Split(a));
            }
        }
    }
    order
}

fn leaf_order(g: &mut Graph<'_>, nodes: Vec<usize>) -> Vec<usize> {
    let set = g.mark(&nodes);
    let mut v = nodes;
    v.sort_by_key(|&x| (g.degree(x, set), x));
    v
}
