//! The Graph Joining Method.
//!
//! A standard feedback function usually splits its state graph into several
//! components, each with one cycle, and the plain GPO run can never leave
//! the cycle structure it started in. Joining works through preference
//! companion pairs: a cycle state `w` in one component whose companion is a
//! leaf of another. Forcing `w` to follow its off-cycle child pulls the
//! whole component of `w` into the run. A set of such forced states that
//! forms a rooted spanning tree (an anti-arborescence) over the components
//! turns the output into a de Bruijn sequence.

use std::collections::BTreeMap;
use std::thread;

use crate::error::{Error, Result};
use crate::function::FeedbackFunction;
use crate::gpo::run_loop;
use crate::graph::StateGraph;
use crate::sequence::PeriodicSequence;
use crate::state::RegisterState;

/// A preference companion pair from component `from` to component `to`:
/// `state` lies on the cycle of `from`, and its companion is a leaf of `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pcp {
    pub state: RegisterState,
    pub companion: RegisterState,
    pub from: usize,
    pub to: usize,
}

impl Pcp {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "state": self.state.to_string(),
            "companion": self.companion.to_string(),
            "from": self.from,
            "to": self.to,
        })
    }
}

/// The preference adjacency graph: a directed multigraph on the components
/// with one edge per PCP. Contains no self-edges by construction.
#[derive(Debug, Clone)]
pub struct Pag {
    order: usize,
    components: usize,
    /// `k[i][j]` lists the PCP states from component i to component j,
    /// ascending.
    k: Vec<Vec<Vec<u32>>>,
}

impl Pag {
    /// Scans every cycle state of every component for a companion that is a
    /// leaf of some other component.
    pub fn from_graph(g: &StateGraph) -> Pag {
        let t = g.components().len();
        let mut k = vec![vec![Vec::new(); t]; t];
        for comp in g.components() {
            for &w in &comp.cycle {
                let companion = w ^ 1;
                let j = g.component_of(companion);
                if j != comp.id && g.is_leaf(companion) {
                    k[comp.id][j].push(w);
                }
            }
        }
        for row in &mut k {
            for list in row.iter_mut() {
                list.sort_unstable();
            }
        }
        Pag {
            order: g.order(),
            components: t,
            k,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn pcp_states(&self, from: usize, to: usize) -> &[u32] {
        &self.k[from][to]
    }

    /// All PCPs, ordered by (from, to, state).
    pub fn pcps(&self) -> Vec<Pcp> {
        let mut out = Vec::new();
        for from in 0..self.components {
            for to in 0..self.components {
                for &w in &self.k[from][to] {
                    out.push(Pcp {
                        state: RegisterState::new(self.order, w).unwrap(),
                        companion: RegisterState::new(self.order, w ^ 1).unwrap(),
                        from,
                        to,
                    });
                }
            }
        }
        out
    }

    pub fn pcp_count(&self) -> usize {
        self.k
            .iter()
            .map(|row| row.iter().map(Vec::len).sum::<usize>())
            .sum()
    }

    /// The simplified undirected graph: one edge between two components
    /// whenever a PCP exists in either direction. No multi-edges.
    pub fn simplified(&self) -> Multigraph {
        let mut g = Multigraph::new(self.components);
        for i in 0..self.components {
            for j in i + 1..self.components {
                if !self.k[i][j].is_empty() || !self.k[j][i].is_empty() {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }
}

/// An undirected multigraph on vertices `0..vertices`; parallel edges are
/// stored repeatedly and identified by index.
#[derive(Debug, Clone, Default)]
pub struct Multigraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Multigraph {
    pub fn new(vertices: usize) -> Self {
        Multigraph {
            vertices,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a < self.vertices && b < self.vertices);
        self.edges.push((a.min(b), a.max(b)));
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn is_connected(vertices: usize, edges: &[(usize, usize, usize)]) -> bool {
        if vertices <= 1 {
            return true;
        }
        let mut parent: Vec<usize> = (0..vertices).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        let mut groups = vertices;
        for &(a, b, _) in edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                groups -= 1;
            }
        }
        groups == 1
    }

    /// All spanning trees as sorted lists of edge indices, enumerated by
    /// contraction and deletion with a fixed edge order. Returns an empty
    /// list iff the graph is disconnected (or has no vertices).
    pub fn spanning_trees(&self) -> Vec<Vec<usize>> {
        if self.vertices == 0 {
            return Vec::new();
        }
        let edges: Vec<(usize, usize, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(id, &(a, b))| (a, b, id))
            .collect();
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        Self::enumerate_trees(self.vertices, edges, &mut chosen, &mut out);
        for tree in &mut out {
            tree.sort_unstable();
        }
        out
    }

    fn enumerate_trees(
        vertices: usize,
        edges: Vec<(usize, usize, usize)>,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if vertices == 1 {
            out.push(chosen.clone());
            return;
        }
        if !Self::is_connected(vertices, &edges) {
            return;
        }
        let (ea, eb, id) = edges[0];
        let (a, b) = (ea.min(eb), ea.max(eb));
        let last = vertices - 1;

        // Include the first edge: contract b into a, relabel the last
        // vertex into b's freed slot to keep ids dense, drop self-loops.
        let map = |v: usize| {
            if v == b {
                a
            } else if v == last {
                b
            } else {
                v
            }
        };
        let contracted: Vec<(usize, usize, usize)> = edges[1..]
            .iter()
            .filter_map(|&(x, y, eid)| {
                let (x, y) = (map(x), map(y));
                (x != y).then_some((x, y, eid))
            })
            .collect();
        chosen.push(id);
        Self::enumerate_trees(vertices - 1, contracted, chosen, out);
        chosen.pop();

        // Exclude it.
        Self::enumerate_trees(vertices, edges[1..].to_vec(), chosen, out);
    }

    /// The integer Laplacian: degree counts on the diagonal, minus the edge
    /// multiplicities off it.
    pub fn laplacian(&self) -> Vec<Vec<i64>> {
        let mut lap = vec![vec![0i64; self.vertices]; self.vertices];
        for &(a, b) in &self.edges {
            if a == b {
                continue;
            }
            lap[a][a] += 1;
            lap[b][b] += 1;
            lap[a][b] -= 1;
            lap[b][a] -= 1;
        }
        lap
    }
}

/// Any cofactor of a Laplacian counts the spanning trees of the underlying
/// weighted graph. This takes the (0,0) cofactor with a fraction-free
/// integer elimination.
pub fn count_spanning_trees_kirchhoff(laplacian: &[Vec<i64>]) -> u64 {
    let n = laplacian.len();
    if n <= 1 {
        return 1;
    }
    let m = n - 1;
    let mut a = vec![vec![0i128; m]; m];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = laplacian[i + 1][j + 1] as i128;
        }
    }
    // Bareiss elimination keeps every intermediate value an integer.
    let mut prev = 1i128;
    let mut sign = 1i128;
    for k in 0..m {
        if a[k][k] == 0 {
            let Some(pivot) = (k + 1..m).find(|&r| a[r][k] != 0) else {
                return 0;
            };
            a.swap(k, pivot);
            sign = -sign;
        }
        for i in k + 1..m {
            for j in k + 1..m {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    let det = sign * a[m - 1][m - 1];
    debug_assert!(det >= 0);
    det as u64
}

/// Counts the unordered companion pairs whose two states lie on cycles of
/// distinct components. For a nonsingular function this is the adjacency
/// structure used by the cycle joining method.
pub fn inter_cycle_companion_pairs(g: &StateGraph) -> usize {
    companion_pair_multigraph(g).edges().len()
}

/// One vertex per component, one edge per inter-cycle companion pair.
pub fn companion_pair_multigraph(g: &StateGraph) -> Multigraph {
    let mut mg = Multigraph::new(g.components().len());
    for v in 0..g.state_count() as u32 {
        if v & 1 != 0 {
            continue;
        }
        let w = v | 1;
        if g.is_on_cycle(v)
            && g.is_on_cycle(w)
            && g.component_of(v) != g.component_of(w)
        {
            mg.add_edge(g.component_of(v), g.component_of(w));
        }
    }
    mg
}

/// A spanning tree of the PAG with every edge directed toward the root:
/// each non-root component contributes exactly one PCP pointing at its
/// parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedSpanningTree {
    pub root: usize,
    /// One PCP per non-root component, ascending by `from`.
    pub edges: Vec<Pcp>,
}

impl RootedSpanningTree {
    /// The forced joining states of the tree.
    pub fn forced_states(&self) -> Vec<u32> {
        self.edges.iter().map(|e| e.state.bits()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "root": self.root,
            "edges": self.edges.iter().map(Pcp::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Enumerates every rooted spanning tree of the PAG: each undirected
/// spanning tree of the simplified graph is oriented toward each root in
/// turn, and every combination of PCP choices along the oriented edges is
/// emitted. Orienting a tree toward a root is unique, so this equals the
/// direction-enumeration of the PAG filtered down to anti-arborescences.
pub fn rooted_spanning_trees(pag: &Pag) -> Vec<RootedSpanningTree> {
    let t = pag.component_count();
    if t == 0 {
        return Vec::new();
    }
    if t == 1 {
        return vec![RootedSpanningTree {
            root: 0,
            edges: Vec::new(),
        }];
    }
    let h = pag.simplified();
    let undirected = h.spanning_trees();
    let mut out = Vec::new();
    for tree in &undirected {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); t];
        for &eid in tree {
            let (a, b) = h.edges()[eid];
            adj[a].push(b);
            adj[b].push(a);
        }
        'root: for root in 0..t {
            // Orient toward the root: parent[] via a BFS from the root.
            let mut parent = vec![usize::MAX; t];
            parent[root] = root;
            let mut queue = vec![root];
            while let Some(v) = queue.pop() {
                for &w in &adj[v] {
                    if parent[w] == usize::MAX {
                        parent[w] = v;
                        queue.push(w);
                    }
                }
            }
            let mut slots: Vec<(usize, &[u32])> = Vec::with_capacity(t - 1);
            for (v, &p) in parent.iter().enumerate() {
                if v == root {
                    continue;
                }
                let options = pag.pcp_states(v, p);
                if options.is_empty() {
                    continue 'root;
                }
                slots.push((v, options));
            }
            // Cartesian product over the PCP choices, slot by slot.
            let mut idx = vec![0usize; slots.len()];
            loop {
                let edges: Vec<Pcp> = slots
                    .iter()
                    .zip(&idx)
                    .map(|(&(v, options), &i)| Pcp {
                        state: RegisterState::new(pag.order(), options[i]).unwrap(),
                        companion: RegisterState::new(pag.order(), options[i] ^ 1).unwrap(),
                        from: v,
                        to: parent[v],
                    })
                    .collect();
                out.push(RootedSpanningTree { root, edges });
                let mut carry = slots.len();
                while carry > 0 {
                    idx[carry - 1] += 1;
                    if idx[carry - 1] < slots[carry - 1].1.len() {
                        break;
                    }
                    idx[carry - 1] = 0;
                    carry -= 1;
                }
                if carry == 0 {
                    break;
                }
            }
        }
    }
    out
}

fn validate_tree(g: &StateGraph, tree: &RootedSpanningTree) -> Result<()> {
    let t = g.components().len();
    if tree.root >= t {
        return Err(Error::InvalidTree(format!(
            "root {} is not a component id",
            tree.root
        )));
    }
    if tree.edges.len() != t - 1 {
        return Err(Error::InvalidTree(format!(
            "expected {} edges, found {}",
            t - 1,
            tree.edges.len()
        )));
    }
    let mut parent = vec![usize::MAX; t];
    for e in &tree.edges {
        let w = e.state;
        if w.order() != g.order() {
            return Err(Error::InvalidTree(format!(
                "state {w} has the wrong order"
            )));
        }
        if e.companion.bits() != w.bits() ^ 1 {
            return Err(Error::InvalidTree(format!(
                "{} is not the companion of {}",
                e.companion, w
            )));
        }
        if e.from >= t || e.to >= t || e.from == e.to {
            return Err(Error::InvalidTree(format!(
                "edge {} -> {} is not between distinct components",
                e.from, e.to
            )));
        }
        if g.component_of(w.bits()) != e.from || !g.is_on_cycle(w.bits()) {
            return Err(Error::InvalidTree(format!(
                "{w} is not on the cycle of component {}",
                e.from
            )));
        }
        let c = w.bits() ^ 1;
        if g.component_of(c) != e.to || !g.is_leaf(c) {
            return Err(Error::InvalidTree(format!(
                "companion of {w} is not a leaf of component {}",
                e.to
            )));
        }
        if e.from == tree.root {
            return Err(Error::InvalidTree(
                "an edge leaves the root component".into(),
            ));
        }
        if parent[e.from] != usize::MAX {
            return Err(Error::InvalidTree(format!(
                "component {} has two outgoing edges",
                e.from
            )));
        }
        parent[e.from] = e.to;
    }
    // With one out-edge per non-root component, reaching the root from
    // everywhere is exactly the anti-arborescence condition.
    for start in 0..t {
        let mut v = start;
        let mut steps = 0;
        while v != tree.root {
            v = parent[v];
            steps += 1;
            if v == usize::MAX || steps > t {
                return Err(Error::InvalidTree(format!(
                    "component {start} does not reach the root"
                )));
            }
        }
    }
    Ok(())
}

/// Runs the GPO loop with the forced assignments of a rooted spanning tree.
/// The initial state must lie on the cycle of the root component; the
/// output is a de Bruijn sequence of the function's order.
pub fn gjpo_generate(
    f: &FeedbackFunction,
    g: &StateGraph,
    tree: &RootedSpanningTree,
    u: RegisterState,
) -> Result<PeriodicSequence> {
    u.check_order(f.order())?;
    if !f.is_standard() {
        return Err(Error::NonStandardFunction);
    }
    validate_tree(g, tree)?;
    let root = g.component(tree.root)?;
    if !root.cycle.contains(&u.bits()) {
        return Err(Error::InitialStateOffRootCycle {
            state: u.to_string(),
            root: tree.root,
        });
    }
    let mut forced = tree.forced_states();
    let (bits, _) = run_loop(f, u.bits(), &mut forced);
    debug_assert!(forced.is_empty(), "every forced state is consumed once");
    Ok(PeriodicSequence::new(bits)
        .expect("run emits at least one bit")
        .with_declared_order(f.order()))
}

/// Everything the enumeration over all rooted trees and root-cycle initial
/// states produces, with canonical forms and multiplicities.
#[derive(Debug, Clone)]
pub struct EnumerationReport {
    pub components: usize,
    pub pcps: Vec<Pcp>,
    /// Spanning trees of the simplified undirected graph.
    pub spanning_trees: usize,
    pub rooted_trees: usize,
    pub runs: usize,
    pub distinct: usize,
    /// multiplicity -> number of canonical sequences seen that many times.
    pub histogram: BTreeMap<usize, usize>,
    /// Canonical sequences with multiplicities, ascending by bit string.
    pub sequences: Vec<(PeriodicSequence, usize)>,
}

impl EnumerationReport {
    pub fn to_json(&self, emit_sequences: bool) -> serde_json::Value {
        let histogram: BTreeMap<String, usize> = self
            .histogram
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let mut obj = serde_json::json!({
            "components": self.components,
            "pcps": self.pcps.iter().map(Pcp::to_json).collect::<Vec<_>>(),
            "spanning_trees": self.spanning_trees,
            "rooted_trees": self.rooted_trees,
            "runs": self.runs,
            "distinct": self.distinct,
            "histogram": histogram,
        });
        if emit_sequences {
            obj["sequences"] = serde_json::Value::Array(
                self.sequences
                    .iter()
                    .map(|(s, m)| {
                        serde_json::json!({
                            "bits": s.bit_string(),
                            "multiplicity": m,
                        })
                    })
                    .collect(),
            );
        }
        obj
    }
}

/// Runs [`gjpo_generate`] for every rooted spanning tree and every initial
/// state on its root cycle, deduplicating by least rotation.
pub fn enumerate_outputs(f: &FeedbackFunction) -> Result<EnumerationReport> {
    enumerate_outputs_jobs(f, 1)
}

/// Parallel variant: tasks are split over `jobs` threads and merged in task
/// order, so the report does not depend on the thread count.
pub fn enumerate_outputs_jobs(f: &FeedbackFunction, jobs: usize) -> Result<EnumerationReport> {
    let g = StateGraph::build(f)?;
    enumerate_outputs_with_graph(f, &g, jobs)
}

/// As [`enumerate_outputs_jobs`], reusing an already built state graph.
pub fn enumerate_outputs_with_graph(
    f: &FeedbackFunction,
    g: &StateGraph,
    jobs: usize,
) -> Result<EnumerationReport> {
    if !f.is_standard() {
        return Err(Error::NonStandardFunction);
    }
    let pag = Pag::from_graph(g);
    let trees = rooted_spanning_trees(&pag);
    if trees.is_empty() {
        return Err(Error::NoRootedTrees);
    }
    let tasks: Vec<(usize, u32)> = trees
        .iter()
        .enumerate()
        .flat_map(|(i, tree)| {
            g.components()[tree.root]
                .cycle
                .iter()
                .map(move |&u| (i, u))
        })
        .collect();

    let run = |&(i, u): &(usize, u32)| -> Result<PeriodicSequence> {
        gjpo_generate(f, g, &trees[i], RegisterState::new(f.order(), u).unwrap())
    };

    let outputs: Vec<PeriodicSequence> = if jobs <= 1 || tasks.len() < 2 {
        tasks.iter().map(run).collect::<Result<_>>()?
    } else {
        let jobs = jobs.min(tasks.len());
        let chunk = tasks.len().div_ceil(jobs);
        thread::scope(|scope| {
            let handles: Vec<_> = tasks
                .chunks(chunk)
                .map(|part| scope.spawn(move || part.iter().map(run).collect::<Result<Vec<_>>>()))
                .collect();
            let mut all = Vec::with_capacity(tasks.len());
            for h in handles {
                all.extend(h.join().expect("worker thread panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    };

    let mut multiset: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for s in &outputs {
        *multiset
            .entry(s.rotation_canonical().bits().to_vec())
            .or_insert(0) += 1;
    }
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for &m in multiset.values() {
        *histogram.entry(m).or_insert(0) += 1;
    }
    let sequences: Vec<(PeriodicSequence, usize)> = multiset
        .iter()
        .map(|(bits, &m)| {
            (
                PeriodicSequence::new(bits.clone())
                    .unwrap()
                    .with_declared_order(f.order()),
                m,
            )
        })
        .collect();

    Ok(EnumerationReport {
        components: g.components().len(),
        pcps: pag.pcps(),
        spanning_trees: pag.simplified().spanning_trees().len(),
        rooted_trees: trees.len(),
        runs: tasks.len(),
        distinct: multiset.len(),
        histogram,
        sequences,
    })
}
