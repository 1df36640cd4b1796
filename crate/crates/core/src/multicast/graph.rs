//! Directed acyclic multicast networks and max-flow.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    /// Packets per slot.
    pub capacity: u32,
}

/// A DAG with designated source and receiver nodes. Node ids are
/// `0..num_nodes`; parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGraph {
    num_nodes: usize,
    edges: Vec<Edge>,
    sources: Vec<usize>,
    receivers: Vec<usize>,
    topo: Vec<usize>,
}

impl NetworkGraph {
    /// Checks ids, capacities and acyclicity. Reachability of receivers is
    /// left to [`NetworkGraph::check_reachable`] so that disconnected
    /// receivers can still be simulated.
    pub fn new(
        num_nodes: usize,
        edges: Vec<Edge>,
        sources: Vec<usize>,
        receivers: Vec<usize>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::Graph(msg));
        for e in &edges {
            if e.from >= num_nodes || e.to >= num_nodes {
                return bad(format!("edge {}->{} outside 0..{num_nodes}", e.from, e.to));
            }
            if e.capacity == 0 {
                return bad(format!("edge {}->{} has zero capacity", e.from, e.to));
            }
            if e.from == e.to {
                return bad(format!("self loop at node {}", e.from));
            }
        }
        for (what, list) in [("source", &sources), ("receiver", &receivers)] {
            let mut seen = vec![false; num_nodes];
            for &v in list {
                if v >= num_nodes {
                    return bad(format!("{what} {v} outside 0..{num_nodes}"));
                }
                if std::mem::replace(&mut seen[v], true) {
                    return bad(format!("{what} {v} listed twice"));
                }
            }
        }
        if let Some(v) = sources.iter().find(|v| receivers.contains(v)) {
            return bad(format!("node {v} is both source and receiver"));
        }
        if sources.is_empty() || receivers.is_empty() {
            return bad("need at least one source and one receiver".into());
        }
        let topo = topological_order(num_nodes, &edges)
            .ok_or_else(|| Error::Graph("graph has a directed cycle".into()))?;
        Ok(Self {
            num_nodes,
            edges,
            sources,
            receivers,
            topo,
        })
    }

    /// `n` sources each wired to one receiver by a unit edge.
    pub fn depth1(n: usize) -> Result<Self> {
        let edges = (0..n)
            .map(|i| Edge {
                from: i,
                to: n,
                capacity: 1,
            })
            .collect();
        Self::new(n + 1, edges, (0..n).collect(), vec![n])
    }

    /// The two-source, two-receiver butterfly with unit capacities.
    ///
    /// Nodes: s1=0, s2=1, a=2, b=3, c=4, d=5, t1=6, t2=7; `c -> d` is the
    /// shared bottleneck.
    pub fn butterfly() -> Self {
        let e = |from, to| Edge {
            from,
            to,
            capacity: 1,
        };
        let edges = vec![
            e(0, 2),
            e(1, 3),
            e(2, 4),
            e(3, 4),
            e(2, 6),
            e(3, 7),
            e(4, 5),
            e(5, 6),
            e(5, 7),
        ];
        Self::new(8, edges, vec![0, 1], vec![6, 7]).expect("static topology")
    }

    /// Built-in topology by name: `butterfly` or `depth1(n)`.
    pub fn named(name: &str) -> Result<Self> {
        let name = name.trim();
        if name == "butterfly" {
            return Ok(Self::butterfly());
        }
        if let Some(arg) = name.strip_prefix("depth1(").and_then(|r| r.strip_suffix(')')) {
            let n = arg
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad depth1 argument {arg:?}")))?;
            return Self::depth1(n);
        }
        Err(Error::Parse(format!("unknown topology {name:?}")))
    }

    /// Parses the edge-list format: one `u v cap` per line, plus
    /// `sources: ...` and `receivers: ...` lines. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut sources = None;
        let mut receivers = None;
        let ids = |s: &str, line: usize| -> Result<Vec<usize>> {
            s.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse()
                        .map_err(|_| Error::Parse(format!("line {line}: bad node id {t:?}")))
                })
                .collect()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("sources:") {
                sources = Some(ids(rest, i + 1)?);
            } else if let Some(rest) = line.strip_prefix("receivers:") {
                receivers = Some(ids(rest, i + 1)?);
            } else {
                let f = ids(line, i + 1)?;
                if f.len() != 3 {
                    return Err(Error::Parse(format!(
                        "line {}: expected `u v cap`, got {line:?}",
                        i + 1
                    )));
                }
                let capacity = u32::try_from(f[2])
                    .map_err(|_| Error::Parse(format!("line {}: capacity too large", i + 1)))?;
                edges.push(Edge {
                    from: f[0],
                    to: f[1],
                    capacity,
                });
            }
        }
        let sources = sources.ok_or_else(|| Error::Parse("missing `sources:` line".into()))?;
        let receivers =
            receivers.ok_or_else(|| Error::Parse("missing `receivers:` line".into()))?;
        let num_nodes = edges
            .iter()
            .flat_map(|e| [e.from, e.to])
            .chain(sources.iter().copied())
            .chain(receivers.iter().copied())
            .max()
            .map_or(0, |v| v + 1);
        let g = Self::new(num_nodes, edges, sources, receivers)?;
        g.check_reachable()?;
        Ok(g)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_edge_list(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let mut s = format!(
            "sources: {}\nreceivers: {}\n",
            join(&self.sources),
            join(&self.receivers)
        );
        for e in &self.edges {
            s.push_str(&format!("{} {} {}\n", e.from, e.to, e.capacity));
        }
        s
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn sources(&self) -> &[usize] {
        &self.sources
    }
    pub fn receivers(&self) -> &[usize] {
        &self.receivers
    }
    /// Nodes in a fixed topological order.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Fails if some receiver cannot be reached from any source.
    pub fn check_reachable(&self) -> Result<()> {
        let reach = self.reachable_from(&self.sources, &[]);
        let missing: Vec<usize> = self
            .receivers
            .iter()
            .copied()
            .filter(|&r| !reach[r])
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Graph(format!("receivers {missing:?} unreachable")))
        }
    }

    /// Nodes reachable from `from` with the edges flagged in `removed` deleted.
    pub fn reachable_from(&self, from: &[usize], removed: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.num_nodes];
        let mut queue: VecDeque<usize> = from.iter().copied().collect();
        for &s in from {
            seen[s] = true;
        }
        while let Some(u) = queue.pop_front() {
            for (i, e) in self.edges.iter().enumerate() {
                if e.from == u && !removed.get(i).copied().unwrap_or(false) && !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }

    /// Copy with one edge deleted.
    pub fn without_edge(&self, index: usize) -> Result<Self> {
        if index >= self.edges.len() {
            return Err(Error::OutOfRange {
                index,
                len: self.edges.len(),
            });
        }
        let mut edges = self.edges.clone();
        edges.remove(index);
        Self::new(
            self.num_nodes,
            edges,
            self.sources.clone(),
            self.receivers.clone(),
        )
    }
}

fn topological_order(num_nodes: usize, edges: &[Edge]) -> Option<Vec<usize>> {
    let mut indeg = vec![0usize; num_nodes];
    for e in edges {
        indeg[e.to] += 1;
    }
    let mut queue: VecDeque<usize> = (0..num_nodes).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(num_nodes);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for e in edges.iter().filter(|e| e.from == u) {
            indeg[e.to] -= 1;
            if indeg[e.to] == 0 {
                queue.push_back(e.to);
            }
        }
    }
    (order.len() == num_nodes).then_some(order)
}

/// Integral maximum flow from a set of sources to one receiver.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxFlow {
    pub value: u64,
    /// Flow on each graph edge, in edge order.
    pub edge_flow: Vec<u64>,
}

impl MaxFlow {
    /// Capacity and conservation violations; empty for a valid flow.
    pub fn violations(&self, g: &NetworkGraph, sources: &[usize], receiver: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut net = vec![0i64; g.num_nodes()];
        for (i, e) in g.edges().iter().enumerate() {
            let f = self.edge_flow[i];
            if f > e.capacity as u64 {
                out.push(format!("edge {i} carries {f} > capacity {}", e.capacity));
            }
            net[e.from] -= f as i64;
            net[e.to] += f as i64;
        }
        for v in 0..g.num_nodes() {
            if sources.contains(&v) {
                continue;
            }
            if v == receiver {
                if net[v] != self.value as i64 {
                    out.push(format!("receiver inflow {} != value {}", net[v], self.value));
                }
            } else if net[v] != 0 {
                out.push(format!("node {v} not conserved (net {})", net[v]));
            }
        }
        out
    }
}

/// Edmonds-Karp max-flow from a virtual super-source wired to `sources`.
pub fn max_flow(g: &NetworkGraph, sources: &[usize], receiver: usize) -> Result<MaxFlow> {
    let n = g.num_nodes();
    if receiver >= n {
        return Err(Error::Graph(format!("receiver {receiver} outside 0..{n}")));
    }
    if let Some(&s) = sources.iter().find(|&&s| s >= n) {
        return Err(Error::Graph(format!("source {s} outside 0..{n}")));
    }
    if sources.contains(&receiver) {
        return Err(Error::Graph(format!("receiver {receiver} is also a source")));
    }
    let sup = n;
    let inf: u64 = g.edges().iter().map(|e| e.capacity as u64).sum::<u64>() + 1;
    // arcs 2i / 2i+1 are edge i and its reverse
    let mut head = Vec::new();
    let mut cap = Vec::new();
    let mut adj = vec![Vec::new(); n + 1];
    let mut add = |u: usize, v: usize, c: u64, head: &mut Vec<usize>, cap: &mut Vec<u64>| {
        adj[u].push(head.len());
        head.push(v);
        cap.push(c);
        adj[v].push(head.len());
        head.push(u);
        cap.push(0);
    };
    for e in g.edges() {
        add(e.from, e.to, e.capacity as u64, &mut head, &mut cap);
    }
    for &s in sources {
        add(sup, s, inf, &mut head, &mut cap);
    }
    let original = cap.clone();
    let mut value = 0u64;
    loop {
        let mut prev_arc = vec![usize::MAX; n + 1];
        let mut seen = vec![false; n + 1];
        seen[sup] = true;
        let mut queue = VecDeque::from([sup]);
        while let Some(u) = queue.pop_front() {
            if u == receiver {
                break;
            }
            for &a in &adj[u] {
                let v = head[a];
                if cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    prev_arc[v] = a;
                    queue.push_back(v);
                }
            }
        }
        if !seen[receiver] {
            break;
        }
        let mut bottleneck = u64::MAX;
        let mut v = receiver;
        while v != sup {
            let a = prev_arc[v];
            bottleneck = bottleneck.min(cap[a]);
            v = head[a ^ 1];
        }
        let mut v = receiver;
        while v != sup {
            let a = prev_arc[v];
            cap[a] -= bottleneck;
            cap[a ^ 1] += bottleneck;
            v = head[a ^ 1];
        }
        value += bottleneck;
    }
    let edge_flow = (0..g.edges().len())
        .map(|i| original[2 * i] - cap[2 * i])
        .collect();
    Ok(MaxFlow { value, edge_flow })
}

/// Max-flow value, which equals the minimum edge cut.
pub fn min_cut(g: &NetworkGraph, sources: &[usize], receiver: usize) -> Result<u64> {
    Ok(max_flow(g, sources, receiver)?.value)
}

/// Largest edge count accepted by [`brute_force_min_cut`].
pub const BRUTE_FORCE_EDGE_CAP: usize = 20;

/// Minimum total capacity over all edge subsets whose removal disconnects
/// `receiver` from every source, by enumerating all `2^|E|` subsets.
pub fn brute_force_min_cut(g: &NetworkGraph, sources: &[usize], receiver: usize) -> Result<u64> {
    let e = g.edges().len();
    if e > BRUTE_FORCE_EDGE_CAP {
        return Err(Error::CapExceeded {
            count: 1u128 << e,
            cap: 1u128 << BRUTE_FORCE_EDGE_CAP,
        });
    }
    if sources.contains(&receiver) {
        return Err(Error::Graph(format!("receiver {receiver} is also a source")));
    }
    let mut best = u64::MAX;
    let mut removed = vec![false; e];
    for mask in 0u32..(1u32 << e) {
        let mut weight = 0u64;
        for (i, r) in removed.iter_mut().enumerate() {
            *r = mask >> i & 1 == 1;
            if *r {
                weight += g.edges()[i].capacity as u64;
            }
        }
        if weight < best && !g.reachable_from(sources, &removed)[receiver] {
            best = weight;
        }
    }
    Ok(best)
}
