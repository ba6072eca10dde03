//! Finite weighted metric trees.
//!
//! A tree is given by `n-1` weighted edges over nodes `0..n` plus a root.
//! Points are nodes or interior points of edges; distances are unique-path
//! lengths. The designated boundary ray is the path from the root to the
//! deepest node (ties broken toward the smallest index).

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::rng::SplitMix64;

const TOL: f64 = 1e-9;

/// A point of a metric tree: a node, or an interior point of an edge at
/// `offset` from the edge's first endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreePoint {
    Node(usize),
    Edge { edge: usize, offset: f64 },
}

/// JSON form of a tree file: `{"edges": [[u, v, length], ...], "root": u}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeFile {
    pub edges: Vec<(usize, usize, f64)>,
    pub root: usize,
}

#[derive(Debug, Clone)]
pub struct MetricTree {
    edges: Vec<(usize, usize, f64)>,
    adj: Vec<Vec<(usize, usize)>>, // (neighbor, edge index)
    root: usize,
    parent: Vec<Option<(usize, usize)>>, // (parent node, edge index)
    depth: Vec<f64>,
    hops: Vec<usize>,
    ray_nodes: Vec<usize>,
    ray_pos: Vec<Option<f64>>,
    ray_len: f64,
}

impl MetricTree {
    pub fn new(edges: Vec<(usize, usize, f64)>, root: usize) -> Result<Self, ModelError> {
        let n = edges
            .iter()
            .flat_map(|&(u, v, _)| [u, v])
            .max()
            .map_or(0, |m| m + 1)
            .max(root + 1);
        if edges.len() + 1 != n {
            return Err(ModelError::InvalidTree(format!(
                "{} edges cannot form a tree on {} nodes",
                edges.len(),
                n
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for (idx, &(u, v, w)) in edges.iter().enumerate() {
            if u == v {
                return Err(ModelError::InvalidTree(format!("self-loop at node {u}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(ModelError::InvalidTree(format!(
                    "edge ({u}, {v}) has non-positive length {w}"
                )));
            }
            adj[u].push((v, idx));
            adj[v].push((u, idx));
        }

        let mut parent = vec![None; n];
        let mut depth = vec![f64::NAN; n];
        let mut hops = vec![0usize; n];
        let mut queue = std::collections::VecDeque::from([root]);
        depth[root] = 0.0;
        while let Some(u) = queue.pop_front() {
            for &(v, e) in &adj[u] {
                if depth[v].is_nan() {
                    parent[v] = Some((u, e));
                    depth[v] = depth[u] + edges[e].2;
                    hops[v] = hops[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if depth.iter().any(|d| d.is_nan()) {
            return Err(ModelError::InvalidTree(
                "tree is not connected from the root".into(),
            ));
        }

        // Designated ray: root to the deepest node, smallest index on ties.
        let mut deepest = root;
        for u in 0..n {
            if depth[u] > depth[deepest] {
                deepest = u;
            }
        }
        let mut chain = vec![deepest];
        let mut cur = deepest;
        while let Some((p, _)) = parent[cur] {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        let mut ray_pos = vec![None; n];
        for &u in &chain {
            ray_pos[u] = Some(depth[u]);
        }
        let ray_len = depth[deepest];

        Ok(Self {
            edges,
            adj,
            root,
            parent,
            depth,
            hops,
            ray_nodes: chain,
            ray_pos,
            ray_len,
        })
    }

    pub fn from_file(file: TreeFile) -> Result<Self, ModelError> {
        Self::new(file.edges, file.root)
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn ray_length(&self) -> f64 {
        self.ray_len
    }

    /// Maximum distance from the root.
    pub fn eccentricity(&self) -> f64 {
        self.depth.iter().cloned().fold(0.0, f64::max)
    }

    /// Normalize an edge point: offsets at the ends collapse to nodes.
    pub fn point_on_edge(&self, edge: usize, offset: f64) -> Result<TreePoint, ModelError> {
        let &(u, v, len) = self
            .edges
            .get(edge)
            .ok_or_else(|| ModelError::PointOutsideDomain(format!("no edge {edge}")))?;
        if offset < -TOL || offset > len + TOL {
            return Err(ModelError::PointOutsideDomain(format!(
                "offset {offset} outside edge {edge} of length {len}"
            )));
        }
        let offset = offset.clamp(0.0, len);
        Ok(if offset == 0.0 {
            TreePoint::Node(u)
        } else if offset == len {
            TreePoint::Node(v)
        } else {
            TreePoint::Edge { edge, offset }
        })
    }

    pub fn validate_point(&self, p: &TreePoint) -> Result<(), ModelError> {
        match *p {
            TreePoint::Node(u) if u < self.adj.len() => Ok(()),
            TreePoint::Node(u) => Err(ModelError::PointOutsideDomain(format!("no node {u}"))),
            TreePoint::Edge { edge, offset } => {
                self.point_on_edge(edge, offset).map(|_| ())
            }
        }
    }

    fn dist_nodes(&self, mut u: usize, mut v: usize) -> f64 {
        let mut acc = 0.0;
        while self.hops[u] > self.hops[v] {
            let (p, e) = self.parent[u].unwrap();
            acc += self.edges[e].2;
            u = p;
        }
        while self.hops[v] > self.hops[u] {
            let (p, e) = self.parent[v].unwrap();
            acc += self.edges[e].2;
            v = p;
        }
        while u != v {
            let (pu, eu) = self.parent[u].unwrap();
            let (pv, ev) = self.parent[v].unwrap();
            acc += self.edges[eu].2 + self.edges[ev].2;
            u = pu;
            v = pv;
        }
        acc
    }

    /// Candidate exits: (endpoint node, cost to reach it).
    fn exits(&self, p: &TreePoint) -> Vec<(usize, f64)> {
        match *p {
            TreePoint::Node(u) => vec![(u, 0.0)],
            TreePoint::Edge { edge, offset } => {
                let (u, v, len) = self.edges[edge];
                vec![(u, offset), (v, len - offset)]
            }
        }
    }

    pub fn distance(&self, p: &TreePoint, q: &TreePoint) -> Result<f64, ModelError> {
        self.validate_point(p)?;
        self.validate_point(q)?;
        if let (TreePoint::Edge { edge: e1, offset: o1 }, TreePoint::Edge { edge: e2, offset: o2 }) =
            (p, q)
        {
            if e1 == e2 {
                return Ok((o1 - o2).abs());
            }
        }
        let best = self
            .exits(p)
            .iter()
            .flat_map(|&(n1, c1)| {
                self.exits(q)
                    .into_iter()
                    .map(move |(n2, c2)| c1 + c2 + self.dist_nodes(n1, n2))
            })
            .fold(f64::INFINITY, f64::min);
        Ok(best)
    }

    /// Node sequence from `u` to `v` (inclusive).
    fn node_path(&self, u: usize, v: usize) -> Vec<usize> {
        let (mut a, mut b) = (u, v);
        let mut up = vec![a];
        let mut down = vec![b];
        while self.hops[a] > self.hops[b] {
            a = self.parent[a].unwrap().0;
            up.push(a);
        }
        while self.hops[b] > self.hops[a] {
            b = self.parent[b].unwrap().0;
            down.push(b);
        }
        while a != b {
            a = self.parent[a].unwrap().0;
            b = self.parent[b].unwrap().0;
            up.push(a);
            down.push(b);
        }
        down.pop();
        up.extend(down.into_iter().rev());
        up
    }

    fn edge_between(&self, u: usize, v: usize) -> usize {
        if let Some((p, e)) = self.parent[u] {
            if p == v {
                return e;
            }
        }
        if let Some((p, e)) = self.parent[v] {
            if p == u {
                return e;
            }
        }
        unreachable!("nodes {u} and {v} are not adjacent")
    }

    /// The point at arc length `s` from `p` on the unique path to `q`.
    pub fn geodesic_point(
        &self,
        p: &TreePoint,
        q: &TreePoint,
        s: f64,
    ) -> Result<TreePoint, ModelError> {
        let total = self.distance(p, q)?;
        if s < -TOL || s > total + TOL {
            return Err(ModelError::ParameterOutOfRange {
                value: s,
                lo: 0.0,
                hi: total,
            });
        }
        let s = s.clamp(0.0, total);
        if s == 0.0 || total == 0.0 {
            return Ok(*p);
        }
        if s == total {
            return Ok(*q);
        }

        if let (TreePoint::Edge { edge: e1, offset: o1 }, TreePoint::Edge { edge: e2, offset: o2 }) =
            (p, q)
        {
            if e1 == e2 {
                let dir = if o2 > o1 { 1.0 } else { -1.0 };
                return self.point_on_edge(*e1, o1 + dir * s);
            }
        }

        // Pick the exit/entry endpoints realizing the distance.
        let (exit, exit_cost) = self
            .exits(p)
            .into_iter()
            .min_by(|a, b| {
                let da = a.1 + self.exits(q).iter().map(|&(n, c)| c + self.dist_nodes(a.0, n)).fold(f64::INFINITY, f64::min);
                let db = b.1 + self.exits(q).iter().map(|&(n, c)| c + self.dist_nodes(b.0, n)).fold(f64::INFINITY, f64::min);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let (entry, entry_cost) = self
            .exits(q)
            .into_iter()
            .min_by(|a, b| {
                let da = a.1 + self.dist_nodes(exit, a.0);
                let db = b.1 + self.dist_nodes(exit, b.0);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();

        // Walk: p → exit (partial edge), node path, entry → q (partial edge).
        let mut remaining = s;
        if exit_cost > 0.0 {
            if remaining < exit_cost {
                if let TreePoint::Edge { edge, offset } = *p {
                    let (u, _, _) = self.edges[edge];
                    let dir = if exit == u { -1.0 } else { 1.0 };
                    return self.point_on_edge(edge, offset + dir * remaining);
                }
                unreachable!("positive exit cost from a node point");
            }
            remaining -= exit_cost;
        }
        let path = self.node_path(exit, entry);
        for win in path.windows(2) {
            let (a, b) = (win[0], win[1]);
            let e = self.edge_between(a, b);
            let len = self.edges[e].2;
            if remaining <= len + TOL {
                let (u, _, _) = self.edges[e];
                let off = if a == u { remaining } else { len - remaining };
                return self.point_on_edge(e, off);
            }
            remaining -= len;
        }
        // Inside the entry fringe toward q.
        if let TreePoint::Edge { edge, .. } = *q {
            let (u, _, len) = self.edges[edge];
            let off = if entry == u { remaining } else { len - remaining };
            let _ = entry_cost;
            return self.point_on_edge(edge, off);
        }
        Ok(*q)
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.adj.len())
            .filter(|&u| self.adj[u].len() <= 1 && (u != self.root || self.adj.len() == 1))
            .collect()
    }

    /// The point at distance `r` from the root toward a seeded choice of
    /// leaf deep enough to realize it.
    pub fn radial_point(&self, r: f64, rng: &mut SplitMix64) -> Result<TreePoint, ModelError> {
        if r <= TOL {
            return Ok(TreePoint::Node(self.root));
        }
        let ecc = self.eccentricity();
        if r > ecc + TOL {
            return Err(ModelError::RadiusExceedsTree {
                radius: r,
                eccentricity: ecc,
            });
        }
        let feasible: Vec<usize> = self
            .leaves()
            .into_iter()
            .filter(|&l| self.depth[l] >= r - TOL)
            .collect();
        let leaf = feasible[rng.next_index(feasible.len())];
        self.geodesic_point(
            &TreePoint::Node(self.root),
            &TreePoint::Node(leaf),
            r.min(self.depth[leaf]),
        )
    }

    /// The designated ray evaluated at arc length `t` from the root.
    pub fn ray_point(&self, t: f64) -> Result<TreePoint, ModelError> {
        if t < -TOL || t > self.ray_len + TOL {
            return Err(ModelError::ParameterOutOfRange {
                value: t,
                lo: 0.0,
                hi: self.ray_len,
            });
        }
        let end = *self.ray_nodes.last().unwrap();
        self.geodesic_point(
            &TreePoint::Node(self.root),
            &TreePoint::Node(end),
            t.clamp(0.0, self.ray_len),
        )
    }

    /// Projection of `p` onto the designated ray: `(s, q)` where the
    /// nearest ray point sits at arc `s` and `q = d(p, ray)`.
    pub fn ray_projection(&self, p: &TreePoint) -> Result<(f64, f64), ModelError> {
        self.validate_point(p)?;
        match *p {
            TreePoint::Node(u) => {
                let mut cur = u;
                while self.ray_pos[cur].is_none() {
                    cur = self.parent[cur].unwrap().0;
                }
                Ok((self.ray_pos[cur].unwrap(), self.depth[u] - self.depth[cur]))
            }
            TreePoint::Edge { edge, offset } => {
                let (u, v, len) = self.edges[edge];
                if let (Some(pu), Some(pv)) = (self.ray_pos[u], self.ray_pos[v]) {
                    // Interior of a ray edge.
                    let s = if pv > pu { pu + offset } else { pu - offset };
                    return Ok((s, 0.0));
                }
                // Walk up from the parent-side endpoint.
                let (child, toward_parent_cost) = if self.parent[u].map(|(pp, _)| pp) == Some(v) {
                    // u is the child: the parent side is v, len − offset away.
                    (u, len - offset)
                } else {
                    (v, offset)
                };
                let parent_end = self.parent[child].unwrap().0;
                let mut cur = parent_end;
                while self.ray_pos[cur].is_none() {
                    cur = self.parent[cur].unwrap().0;
                }
                let q = toward_parent_cost + self.depth[parent_end] - self.depth[cur];
                Ok((self.ray_pos[cur].unwrap(), q))
            }
        }
    }

    /// Busemann value of `p` along the designated ray, in closed form:
    /// `B(p) = q − s` for the projection `(s, q)`.
    pub fn busemann_exact(&self, p: &TreePoint) -> Result<f64, ModelError> {
        let (s, q) = self.ray_projection(p)?;
        Ok(q - s)
    }

    /// The point at distance `walk` from `p` along the path toward the far
    /// end of the ray (through the projection). Clamps at the ray end.
    pub fn toward_ray_end(&self, p: &TreePoint, walk: f64) -> Result<TreePoint, ModelError> {
        let (s, q) = self.ray_projection(p)?;
        if walk <= q {
            let junction = self.ray_point(s)?;
            return self.geodesic_point(p, &junction, walk.max(0.0));
        }
        let t = (s + (walk - q)).min(self.ray_len);
        self.ray_point(t)
    }

    /// Greatest distance reachable from `u` without stepping onto `avoid`.
    fn max_reach(&self, u: usize, avoid: Option<usize>) -> f64 {
        self.adj[u]
            .iter()
            .filter(|&&(v, _)| Some(v) != avoid)
            .map(|&(v, e)| self.edges[e].2 + self.max_reach(v, Some(u)))
            .fold(0.0, f64::max)
    }

    /// A point at Busemann level `level`, decorated off the ray when a
    /// deep enough side branch exists, otherwise on the ray itself.
    /// Requires `−ray_length ≤ level ≤ 0` for the on-ray fallback.
    pub fn horosphere_point(
        &self,
        level: f64,
        rng: &mut SplitMix64,
    ) -> Result<TreePoint, ModelError> {
        let feasible: Vec<(usize, f64)> = self
            .ray_nodes
            .iter()
            .filter_map(|&j| {
                let s = self.ray_pos[j].unwrap();
                let q = level + s;
                if q <= TOL {
                    return None;
                }
                let reach = self
                    .adj[j]
                    .iter()
                    .filter(|&&(v, _)| self.ray_pos[v].is_none())
                    .map(|&(v, e)| self.edges[e].2 + self.max_reach(v, Some(j)))
                    .fold(0.0, f64::max);
                (q <= reach + TOL).then_some((j, q))
            })
            .collect();
        if !feasible.is_empty() && rng.next_unit() < 0.75 {
            let (j, q) = feasible[rng.next_index(feasible.len())];
            return self.descend_off_ray(j, q.min(self.max_off_ray(j)), rng);
        }
        if level <= TOL && -level <= self.ray_len + TOL {
            return self.ray_point((-level).clamp(0.0, self.ray_len));
        }
        Err(ModelError::ParameterOutOfRange {
            value: level,
            lo: -self.ray_len,
            hi: 0.0,
        })
    }

    fn max_off_ray(&self, j: usize) -> f64 {
        self.adj[j]
            .iter()
            .filter(|&&(v, _)| self.ray_pos[v].is_none())
            .map(|&(v, e)| self.edges[e].2 + self.max_reach(v, Some(j)))
            .fold(0.0, f64::max)
    }

    fn descend_off_ray(
        &self,
        junction: usize,
        mut remaining: f64,
        rng: &mut SplitMix64,
    ) -> Result<TreePoint, ModelError> {
        let mut cur = junction;
        let mut came: Option<usize> = None;
        loop {
            let options: Vec<(usize, usize)> = self.adj[cur]
                .iter()
                .filter(|&&(v, _)| {
                    Some(v) != came
                        && !(cur == junction && self.ray_pos[v].is_some())
                })
                .filter(|&&(v, e)| self.edges[e].2 + self.max_reach(v, Some(cur)) >= remaining - TOL)
                .cloned()
                .collect();
            let &(v, e) = options
                .get(rng.next_index(options.len().max(1)).min(options.len().saturating_sub(1)))
                .ok_or_else(|| {
                    ModelError::InvalidTree("horosphere descent ran out of branches".into())
                })?;
            let len = self.edges[e].2;
            if remaining <= len + TOL {
                let (u, _, _) = self.edges[e];
                let off = if u == cur { remaining.min(len) } else { len - remaining.min(len) };
                return self.point_on_edge(e, off);
            }
            remaining -= len;
            came = Some(cur);
            cur = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Tripod: center 0, leaves 1, 2, 3 with leg lengths 2, 3, 4.
    fn tripod() -> MetricTree {
        MetricTree::new(
            vec![(0, 1, 2.0), (0, 2, 3.0), (0, 3, 4.0)],
            1, // root at the leaf with leg 2
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(MetricTree::new(vec![(0, 0, 1.0)], 0).is_err());
        assert!(MetricTree::new(vec![(0, 1, -1.0)], 0).is_err());
        assert!(MetricTree::new(vec![(0, 1, 1.0), (2, 3, 1.0), (1, 2, 1.0)], 0).is_ok());
        assert!(MetricTree::new(vec![(0, 1, 1.0), (0, 1, 1.0)], 0).is_err());
    }

    #[test]
    fn tripod_leaf_distances() {
        let t = tripod();
        let d = |a, b| t.distance(&TreePoint::Node(a), &TreePoint::Node(b)).unwrap();
        assert_eq!(d(1, 2), 5.0);
        assert_eq!(d(1, 3), 6.0);
        assert_eq!(d(2, 3), 7.0);
        assert_eq!(d(0, 3), 4.0);
    }

    #[test]
    fn interior_point_distances() {
        let t = tripod();
        let p = t.point_on_edge(0, 1.5).unwrap(); // on (0,1), 1.5 from center
        let q = t.point_on_edge(2, 2.0).unwrap(); // on (0,3), 2.0 from center
        assert_eq!(t.distance(&p, &q).unwrap(), 3.5);
        let r = t.point_on_edge(0, 0.5).unwrap();
        assert_eq!(t.distance(&p, &r).unwrap(), 1.0);
    }

    #[test]
    fn geodesic_walks_through_the_center() {
        let t = tripod();
        let leaf1 = TreePoint::Node(1);
        let leaf2 = TreePoint::Node(2);
        // 2 from leaf1 is the center
        assert_eq!(
            t.geodesic_point(&leaf1, &leaf2, 2.0).unwrap(),
            TreePoint::Node(0)
        );
        // 3.5 from leaf1 is halfway down the second leg
        let w = t.geodesic_point(&leaf1, &leaf2, 3.5).unwrap();
        assert_eq!(t.distance(&leaf1, &w).unwrap(), 3.5);
        assert_eq!(t.distance(&w, &leaf2).unwrap(), 1.5);
    }

    #[test]
    fn geodesic_from_leaf_toward_root_enters_edge() {
        let t = tripod();
        let w = t
            .geodesic_point(&TreePoint::Node(3), &TreePoint::Node(1), 1.0)
            .unwrap();
        assert_eq!(t.distance(&TreePoint::Node(3), &w).unwrap(), 1.0);
        assert!(matches!(w, TreePoint::Edge { .. }));
    }

    #[test]
    fn radial_point_contract() {
        let t = tripod();
        let mut rng = SplitMix64::new(11);
        for r in [0.0, 1.0, 2.5, 5.9] {
            let p = t.radial_point(r, &mut rng).unwrap();
            let d = t.distance(&TreePoint::Node(1), &p).unwrap();
            assert!((d - r).abs() < 1e-12, "r = {r}, d = {d}");
        }
        // eccentricity from root 1 is 6 (to leaf 3)
        assert!(matches!(
            t.radial_point(7.0, &mut rng),
            Err(ModelError::RadiusExceedsTree { .. })
        ));
    }

    #[test]
    fn ray_runs_to_the_deepest_leaf() {
        let t = tripod();
        assert_eq!(t.ray_length(), 6.0);
        assert_eq!(t.ray_point(0.0).unwrap(), TreePoint::Node(1));
        assert_eq!(t.ray_point(2.0).unwrap(), TreePoint::Node(0));
        assert_eq!(t.ray_point(6.0).unwrap(), TreePoint::Node(3));
    }

    #[test]
    fn projection_and_busemann_formula() {
        let t = tripod();
        // Leaf 2 hangs off the ray at the center (s = 2), q = 3.
        let (s, q) = t.ray_projection(&TreePoint::Node(2)).unwrap();
        assert_eq!((s, q), (2.0, 3.0));
        assert_eq!(t.busemann_exact(&TreePoint::Node(2)).unwrap(), 1.0);
        // A point on the ray: B = −s.
        let p = t.ray_point(5.0).unwrap();
        assert_eq!(t.busemann_exact(&p).unwrap(), -5.0);
    }

    #[test]
    fn toward_ray_end_walks_through_junction() {
        let t = tripod();
        let p = TreePoint::Node(2); // q = 3 to the center, then along the ray
        let w = t.toward_ray_end(&p, 3.0).unwrap();
        assert_eq!(w, TreePoint::Node(0));
        let w = t.toward_ray_end(&p, 5.0).unwrap();
        assert_eq!(t.distance(&w, &TreePoint::Node(0)).unwrap(), 2.0);
        assert_eq!(t.busemann_exact(&w).unwrap(), -4.0);
        // Clamps at the ray end.
        let w = t.toward_ray_end(&p, 100.0).unwrap();
        assert_eq!(w, TreePoint::Node(3));
    }

    #[test]
    fn horosphere_points_sit_at_their_level() {
        let t = tripod();
        let mut rng = SplitMix64::new(3);
        for level in [-0.5, -1.5, -3.0, 0.5] {
            if let Ok(p) = t.horosphere_point(level, &mut rng) {
                let b = t.busemann_exact(&p).unwrap();
                assert!((b - level).abs() < 1e-12, "level {level}, got {b}");
            }
        }
    }
}
