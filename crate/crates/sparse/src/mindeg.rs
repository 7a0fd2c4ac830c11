//! Minimum-degree ordering on the quotient graph with supervariables.
//!
//! Nodes with identical closed neighbourhoods (all unknowns of one mesh
//! entity) are merged before elimination; variables that become
//! indistinguishable during elimination are merged as well. Degrees are
//! exact external degrees. Delayed nodes (negligible diagonal) only become
//! eligible once one of their releasing neighbours has been eliminated, so
//! that their diagonal has received fill by the time they are pivots.

use std::collections::{BTreeSet, HashMap};

struct State {
    /// weight (number of original nodes) of each alive supervariable
    w: Vec<usize>,
    /// original nodes represented by each supervariable
    members: Vec<Vec<usize>>,
    alive: Vec<bool>,
    eliminated: Vec<bool>,
    vadj: Vec<Vec<usize>>,
    eadj: Vec<Vec<usize>>,
    evars: Vec<Vec<usize>>,
    deg: Vec<usize>,
    mark: Vec<u32>,
    stamp: u32,
}

impl State {
    fn next_stamp(&mut self) -> u32 {
        self.stamp += 1;
        self.stamp
    }

    fn live(&self, v: usize) -> bool {
        self.alive[v] && !self.eliminated[v]
    }

    fn external_degree(&mut self, i: usize) -> usize {
        let s = self.next_stamp();
        self.mark[i] = s;
        let mut d = 0;
        for k in 0..self.vadj[i].len() {
            let v = self.vadj[i][k];
            if self.live(v) && self.mark[v] != s {
                self.mark[v] = s;
                d += self.w[v];
            }
        }
        for k in 0..self.eadj[i].len() {
            let e = self.eadj[i][k];
            for m in 0..self.evars[e].len() {
                let v = self.evars[e][m];
                if self.live(v) && self.mark[v] != s {
                    self.mark[v] = s;
                    d += self.w[v];
                }
            }
        }
        d
    }
}

/// Groups nodes with equal closed neighbourhoods; returns the representative of every node.
pub(crate) fn compress(adj: &[Vec<usize>], delayed: &[bool]) -> Vec<usize> {
    let n = adj.len();
    let key = |v: usize| -> (bool, Vec<usize>) {
        let mut k: Vec<usize> = adj[v].iter().copied().chain(std::iter::once(v)).collect();
        k.sort_unstable();
        k.dedup();
        (delayed[v], k)
    };
    let mut rep: Vec<usize> = (0..n).collect();
    let mut seen: HashMap<(bool, Vec<usize>), usize> = HashMap::new();
    for v in 0..n {
        let r = *seen.entry(key(v)).or_insert(v);
        rep[v] = r;
    }
    rep
}

/// Minimum-degree ordering; returns `perm` with `perm[new] = old`.
pub fn minimum_degree(adj: &[Vec<usize>]) -> Vec<usize> {
    minimum_degree_delayed(adj, &vec![Vec::new(); adj.len()])
}

/// Minimum-degree ordering in which a node with a nonempty `release` list
/// waits until one of the listed nodes has been eliminated.
pub fn minimum_degree_delayed(adj: &[Vec<usize>], release: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    assert_eq!(release.len(), n, "one release list per node");
    let delayed: Vec<bool> = release.iter().map(|r| !r.is_empty()).collect();
    // releases[v]: delayed nodes freed by eliminating v
    let mut releases = vec![Vec::new(); n];
    for (d, r) in release.iter().enumerate() {
        for &v in r {
            releases[v].push(d);
        }
    }
    let delayed = &delayed[..];
    let rep = compress(adj, delayed);
    let mut st = State {
        w: vec![0; n],
        members: vec![Vec::new(); n],
        alive: vec![false; n],
        eliminated: vec![false; n],
        vadj: vec![Vec::new(); n],
        eadj: vec![Vec::new(); n],
        evars: vec![Vec::new(); n],
        deg: vec![0; n],
        mark: vec![0; n],
        stamp: 0,
    };
    for v in 0..n {
        let r = rep[v];
        st.w[r] += 1;
        st.members[r].push(v);
        st.alive[r] = true;
    }
    for v in 0..n {
        if rep[v] != v {
            continue;
        }
        let mut nb: Vec<usize> = adj[v].iter().map(|&u| rep[u]).filter(|&r| r != v).collect();
        nb.sort_unstable();
        nb.dedup();
        st.vadj[v] = nb;
    }
    // supervariable currently holding each original node
    let mut owner = rep.clone();
    let mut queue = BTreeSet::new();
    for v in 0..n {
        if st.alive[v] {
            st.deg[v] = st.external_degree(v);
            if !delayed[v] {
                queue.insert((st.deg[v], v));
            }
        }
    }
    let mut queued: Vec<bool> = (0..n).map(|v| st.alive[v] && !delayed[v]).collect();
    let mut order = Vec::with_capacity(n);
    loop {
        let p = match queue.pop_first() {
            Some((_, p)) => p,
            None => {
                // delayed nodes nobody can release
                let rest: Vec<usize> = (0..n).filter(|&v| st.live(v) && !queued[v]).collect();
                if rest.is_empty() {
                    break;
                }
                for v in rest {
                    queued[v] = true;
                    queue.insert((st.deg[v], v));
                }
                continue;
            }
        };
        st.eliminated[p] = true;
        order.extend(st.members[p].iter().copied());
        // new element: all live variables reachable from p
        let s = st.next_stamp();
        st.mark[p] = s;
        let mut lp = Vec::new();
        let vp = std::mem::take(&mut st.vadj[p]);
        for v in vp {
            if st.live(v) && st.mark[v] != s {
                st.mark[v] = s;
                lp.push(v);
            }
        }
        let absorbed = std::mem::take(&mut st.eadj[p]);
        for &e in &absorbed {
            let ev = std::mem::take(&mut st.evars[e]);
            for v in ev {
                if st.live(v) && st.mark[v] != s {
                    st.mark[v] = s;
                    lp.push(v);
                }
            }
        }
        let in_lp = s;
        // absorbed elements are empty now; drop them and p itself from neighbours
        for &i in &lp {
            let mark = &st.mark;
            let eliminated = &st.eliminated;
            let evars = &st.evars;
            st.eadj[i].retain(|&e| !evars[e].is_empty());
            st.eadj[i].push(p);
            st.vadj[i].retain(|&v| mark[v] != in_lp && v != p && !eliminated[v]);
        }
        st.evars[p] = lp.clone();
        // merge indistinguishable variables of lp
        let mut groups: HashMap<(Vec<usize>, Vec<usize>), usize> = HashMap::new();
        for &i in &lp {
            if !st.live(i) {
                continue;
            }
            let mut ea = st.eadj[i].clone();
            ea.sort_unstable();
            let mut va: Vec<usize> = st.vadj[i].iter().copied().filter(|&v| st.live(v)).collect();
            va.sort_unstable();
            va.push(usize::from(delayed[i]));
            match groups.get(&(ea.clone(), va.clone())) {
                Some(&j) => {
                    if queued[i] {
                        queue.remove(&(st.deg[i], i));
                    }
                    queued[j] |= queued[i];
                    st.alive[i] = false;
                    st.w[j] += st.w[i];
                    let m = std::mem::take(&mut st.members[i]);
                    for &v in &m {
                        owner[v] = j;
                    }
                    st.members[j].extend(m);
                }
                None => {
                    groups.insert((ea, va), i);
                }
            }
        }
        for m in st.members[p].clone() {
            for &d in &releases[m] {
                let o = owner[d];
                if st.live(o) && !queued[o] {
                    queued[o] = true;
                    st.deg[o] = st.external_degree(o);
                    queue.insert((st.deg[o], o));
                }
            }
        }
        for &i in &lp {
            if !st.live(i) {
                continue;
            }
            if queued[i] {
                queue.remove(&(st.deg[i], i));
            }
            st.deg[i] = st.external_degree(i);
            if queued[i] {
                queue.insert((st.deg[i], i));
            }
        }
        st.evars[p].retain(|&v| st.alive[v]);
    }
    order
}
