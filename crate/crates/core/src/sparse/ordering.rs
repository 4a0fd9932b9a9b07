//! Fill-reducing orderings for symmetric sparsity patterns.
//!
//! Nested dissection uses level-structure separators (rooted at a
//! pseudo-peripheral vertex) and finishes small subgraphs with an exact
//! minimum-degree elimination.

use std::collections::VecDeque;

/// Symmetric adjacency structure without self loops.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    xadj: Vec<usize>,
    adjncy: Vec<usize>,
}

impl AdjacencyGraph {
    pub fn from_lists(lists: &[Vec<usize>]) -> Self {
        let mut xadj = Vec::with_capacity(lists.len() + 1);
        xadj.push(0);
        let mut adjncy = Vec::new();
        for (v, l) in lists.iter().enumerate() {
            adjncy.extend(l.iter().copied().filter(|&u| u != v));
            xadj.push(adjncy.len());
        }
        Self { xadj, adjncy }
    }

    pub fn len(&self) -> usize {
        self.xadj.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjncy[self.xadj[v]..self.xadj[v + 1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ordering {
    Natural,
    MinimumDegree,
    #[default]
    NestedDissection,
}

impl Ordering {
    /// Permutation `perm` with `perm[new] = old`.
    pub fn compute(self, graph: &AdjacencyGraph) -> Vec<usize> {
        match self {
            Ordering::Natural => (0..graph.len()).collect(),
            Ordering::MinimumDegree => minimum_degree(graph),
            Ordering::NestedDissection => nested_dissection(graph),
        }
    }
}

const LEAF_SIZE: usize = 96;

/// Exact minimum-degree ordering on the explicit elimination graph. Ties
/// are broken by the lowest vertex index. Quadratic memory in the worst
/// case, so intended for small graphs and dissection leaves.
pub fn minimum_degree(graph: &AdjacencyGraph) -> Vec<usize> {
    let vertices: Vec<usize> = (0..graph.len()).collect();
    let mut local = vec![usize::MAX; graph.len()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v] = i;
    }
    minimum_degree_subset(graph, &vertices, &local)
}

fn minimum_degree_subset(graph: &AdjacencyGraph, vertices: &[usize], local: &[usize]) -> Vec<usize> {
    let m = vertices.len();
    let mut adj: Vec<Vec<usize>> = vertices
        .iter()
        .map(|&v| {
            let mut l: Vec<usize> = graph
                .neighbors(v)
                .iter()
                .filter_map(|&u| {
                    let lu = local[u];
                    (lu < m && vertices[lu] == u).then_some(lu)
                })
                .collect();
            l.sort_unstable();
            l.dedup();
            l
        })
        .collect();
    let mut eliminated = vec![false; m];
    let mut order = Vec::with_capacity(m);
    let mut merged = Vec::new();
    for _ in 0..m {
        let pivot = (0..m)
            .filter(|&i| !eliminated[i])
            .min_by_key(|&i| (adj[i].len(), i))
            .unwrap();
        eliminated[pivot] = true;
        order.push(vertices[pivot]);
        let nbrs = std::mem::take(&mut adj[pivot]);
        for &a in &nbrs {
            merged.clear();
            let (mut x, mut y) = (0, 0);
            let la = &adj[a];
            while x < la.len() || y < nbrs.len() {
                let next = match (la.get(x), nbrs.get(y)) {
                    (Some(&p), Some(&q)) if p < q => {
                        x += 1;
                        p
                    }
                    (Some(&p), Some(&q)) if q < p => {
                        y += 1;
                        q
                    }
                    (Some(&p), Some(_)) => {
                        x += 1;
                        y += 1;
                        p
                    }
                    (Some(&p), None) => {
                        x += 1;
                        p
                    }
                    (None, Some(&q)) => {
                        y += 1;
                        q
                    }
                    (None, None) => unreachable!(),
                };
                if next != a && next != pivot {
                    merged.push(next);
                }
            }
            std::mem::swap(&mut adj[a], &mut merged);
        }
    }
    order
}

/// Nested dissection ordering; separators are numbered after the parts
/// they split.
pub fn nested_dissection(graph: &AdjacencyGraph) -> Vec<usize> {
    let n = graph.len();
    let mut order = Vec::with_capacity(n);
    // label[v] identifies the subproblem v currently belongs to
    let mut label = vec![0u32; n];
    let mut next_label = 1u32;
    let mut local = vec![usize::MAX; n];
    let mut level = vec![usize::MAX; n];

    let all: Vec<usize> = (0..n).collect();
    // explicit stack of tasks so deep dissections cannot overflow
    enum Task {
        Split(Vec<usize>),
        Emit(Vec<usize>),
    }
    let mut stack = vec![Task::Split(all)];
    while let Some(task) = stack.pop() {
        let nodes = match task {
            Task::Emit(sep) => {
                order.extend(sep);
                continue;
            }
            Task::Split(nodes) => nodes,
        };
        if nodes.is_empty() {
            continue;
        }
        let id = next_label;
        next_label += 1;
        for &v in &nodes {
            label[v] = id;
        }
        if nodes.len() <= LEAF_SIZE {
            for (i, &v) in nodes.iter().enumerate() {
                local[v] = i;
            }
            order.extend(minimum_degree_subset(graph, &nodes, &local));
            continue;
        }

        let components = components(graph, &nodes, &label, id, &mut level);
        if components.len() > 1 {
            // components are independent; their relative order is irrelevant
            for comp in components.into_iter().rev() {
                stack.push(Task::Split(comp));
            }
            continue;
        }

        let levels = level_structure(graph, &nodes, &label, id, &mut level);
        if levels.len() < 3 {
            for (i, &v) in nodes.iter().enumerate() {
                local[v] = i;
            }
            order.extend(minimum_degree_subset(graph, &nodes, &local));
            continue;
        }
        // middle level: first level at which the cumulative count reaches half
        let half = nodes.len() / 2;
        let mut acc = 0;
        let mut mid = 1;
        for (k, lv) in levels.iter().enumerate() {
            acc += lv.len();
            if acc >= half {
                mid = k;
                break;
            }
        }
        mid = mid.clamp(1, levels.len() - 2);

        let mut part_a: Vec<usize> = levels[..mid].iter().flatten().copied().collect();
        let mut separator = Vec::new();
        for &v in &levels[mid] {
            let touches_next = graph
                .neighbors(v)
                .iter()
                .any(|&u| label[u] == id && level[u] == mid + 1);
            if touches_next {
                separator.push(v);
            } else {
                part_a.push(v);
            }
        }
        let part_b: Vec<usize> = levels[mid + 1..].iter().flatten().copied().collect();
        stack.push(Task::Emit(separator));
        stack.push(Task::Split(part_b));
        stack.push(Task::Split(part_a));
    }
    debug_assert_eq!(order.len(), n);
    order
}

fn components(
    graph: &AdjacencyGraph,
    nodes: &[usize],
    label: &[u32],
    id: u32,
    seen: &mut [usize],
) -> Vec<Vec<usize>> {
    for &v in nodes {
        seen[v] = usize::MAX;
    }
    let mut comps = Vec::new();
    let mut queue = VecDeque::new();
    for &start in nodes {
        if seen[start] != usize::MAX {
            continue;
        }
        let cid = comps.len();
        let mut comp = vec![start];
        seen[start] = cid;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &u in graph.neighbors(v) {
                if label[u] == id && seen[u] == usize::MAX {
                    seen[u] = cid;
                    comp.push(u);
                    queue.push_back(u);
                }
            }
        }
        comps.push(comp);
    }
    comps
}

fn bfs_levels(
    graph: &AdjacencyGraph,
    nodes: &[usize],
    root: usize,
    label: &[u32],
    id: u32,
    level: &mut [usize],
) -> Vec<Vec<usize>> {
    for &v in nodes {
        level[v] = usize::MAX;
    }
    let mut levels = vec![vec![root]];
    level[root] = 0;
    loop {
        let mut next = Vec::new();
        let depth = levels.len();
        for &v in levels.last().unwrap() {
            for &u in graph.neighbors(v) {
                if label[u] == id && level[u] == usize::MAX {
                    level[u] = depth;
                    next.push(u);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    levels
}

/// Rooted level structure from a pseudo-peripheral vertex (George–Liu).
fn level_structure(
    graph: &AdjacencyGraph,
    nodes: &[usize],
    label: &[u32],
    id: u32,
    level: &mut [usize],
) -> Vec<Vec<usize>> {
    let degree = |v: usize| graph.neighbors(v).iter().filter(|&&u| label[u] == id).count();
    let mut root = nodes[0];
    let mut levels = bfs_levels(graph, nodes, root, label, id, level);
    for _ in 0..8 {
        let candidate = *levels
            .last()
            .unwrap()
            .iter()
            .min_by_key(|&&v| (degree(v), v))
            .unwrap();
        let trial = bfs_levels(graph, nodes, candidate, label, id, level);
        if trial.len() > levels.len() {
            root = candidate;
            levels = trial;
        } else {
            break;
        }
    }
    // `level` must describe the returned structure
    bfs_levels(graph, nodes, root, label, id, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> AdjacencyGraph {
        let idx = |i: usize, j: usize| i * n + j;
        let mut lists = vec![Vec::new(); n * n];
        for i in 0..n {
            for j in 0..n {
                if i + 1 < n {
                    lists[idx(i, j)].push(idx(i + 1, j));
                    lists[idx(i + 1, j)].push(idx(i, j));
                }
                if j + 1 < n {
                    lists[idx(i, j)].push(idx(i, j + 1));
                    lists[idx(i, j + 1)].push(idx(i, j));
                }
            }
        }
        AdjacencyGraph::from_lists(&lists)
    }

    fn is_permutation(p: &[usize], n: usize) -> bool {
        let mut seen = vec![false; n];
        p.len() == n && p.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
    }

    #[test]
    fn orderings_are_permutations() {
        let g = grid(23);
        for ord in [Ordering::Natural, Ordering::MinimumDegree, Ordering::NestedDissection] {
            assert!(is_permutation(&ord.compute(&g), g.len()), "{ord:?}");
        }
    }

    #[test]
    fn minimum_degree_starts_at_a_corner() {
        let g = grid(5);
        let p = minimum_degree(&g);
        assert!([0, 4, 20, 24].contains(&p[0]));
    }

    #[test]
    fn disconnected_graph_is_ordered() {
        let mut lists = vec![Vec::new(); 300];
        for i in 0..299 {
            if i % 100 != 99 {
                lists[i].push(i + 1);
                lists[i + 1].push(i);
            }
        }
        let g = AdjacencyGraph::from_lists(&lists);
        assert!(is_permutation(&nested_dissection(&g), 300));
    }
}
