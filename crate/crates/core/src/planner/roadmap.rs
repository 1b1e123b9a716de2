use std::collections::HashMap;

use petgraph::algo::astar;
use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ProblemDomain, WorldModel};
use crate::error::{Error, Result};
use crate::geometry::{Point, PointKey};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrmConfig {
    pub samples: usize,
    pub neighbors: usize,
    pub seed: u64,
}

impl Default for PrmConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            neighbors: 8,
            seed: 0,
        }
    }
}

/// Undirected graph of free-space points joined by collision-free segments.
#[derive(Clone, Debug)]
pub struct Roadmap<T> {
    graph: UnGraph<Point<T>, T>,
    index: HashMap<PointKey, NodeIndex>,
    neighbors: usize,
    total_edge_length: T,
    /// Connected-component label per vertex index.
    component: Vec<usize>,
}

/// Samples `n_samples` free points uniformly (at most `50·n_samples` draws),
/// adds every `mandatory` point, and links each vertex to its `k_neighbors`
/// nearest neighbours where the straight segment is free.
pub fn build_roadmap<T: Scalar>(
    world: &WorldModel<T>,
    mandatory: &[Point<T>],
    n_samples: usize,
    k_neighbors: usize,
    seed: u64,
) -> Result<Roadmap<T>> {
    if n_samples == 0 {
        return Err(Error::Roadmap("at least one sample required".into()));
    }
    if world.bounds.is_degenerate() {
        return Err(Error::Roadmap("world bounds have no area".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x0, y0) = (
        world.bounds.min.x.to_f64_lossy(),
        world.bounds.min.y.to_f64_lossy(),
    );
    let (x1, y1) = (
        world.bounds.max.x.to_f64_lossy(),
        world.bounds.max.y.to_f64_lossy(),
    );
    let mut samples = Vec::with_capacity(n_samples);
    for _ in 0..n_samples * 50 {
        if samples.len() == n_samples {
            break;
        }
        let p = Point::new(
            T::lit(rng.gen_range(x0..=x1)),
            T::lit(rng.gen_range(y0..=y1)),
        );
        if world.is_free(&p) {
            samples.push(p);
        }
    }
    if samples.is_empty() {
        return Err(Error::Roadmap(format!(
            "no free sample found in {} draws",
            n_samples * 50
        )));
    }

    let mut roadmap = Roadmap {
        graph: UnGraph::default(),
        index: HashMap::new(),
        neighbors: k_neighbors,
        total_edge_length: T::zero(),
        component: Vec::new(),
    };
    for p in mandatory.iter().chain(&samples) {
        roadmap.add_vertex(*p);
    }
    let nodes: Vec<NodeIndex> = roadmap.graph.node_indices().collect();
    for v in nodes {
        roadmap.connect(world, v);
    }
    roadmap.label_components();
    Ok(roadmap)
}

impl<T: Scalar> Roadmap<T> {
    /// Roadmap over every robot start and task site of `domain`.
    pub fn for_domain(domain: &ProblemDomain<T>, config: &PrmConfig) -> Result<Self> {
        build_roadmap(
            &domain.world,
            &mandatory_points(domain),
            config.samples,
            config.neighbors,
            config.seed,
        )
    }

    fn add_vertex(&mut self, p: Point<T>) -> (NodeIndex, bool) {
        if let Some(&v) = self.index.get(&p.key()) {
            return (v, false);
        }
        let v = self.graph.add_node(p);
        self.index.insert(p.key(), v);
        (v, true)
    }

    fn connect(&mut self, world: &WorldModel<T>, v: NodeIndex) {
        let here = self.graph[v];
        let mut near: Vec<(T, NodeIndex)> = self
            .graph
            .node_indices()
            .filter(|&u| u != v)
            .map(|u| (here.distance(&self.graph[u]), u))
            .collect();
        near.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        });
        for &(d, u) in near.iter().take(self.neighbors) {
            if self.graph.find_edge(v, u).is_none() && world.segment_is_free(&here, &self.graph[u])
            {
                self.graph.add_edge(v, u, d);
                self.total_edge_length = self.total_edge_length + d;
            }
        }
    }

    /// Adds `p` as a vertex (linked like any other) if it is not one already.
    pub fn ensure_vertex(&mut self, world: &WorldModel<T>, p: Point<T>) {
        let (v, added) = self.add_vertex(p);
        if added {
            self.connect(world, v);
            self.label_components();
        }
    }

    fn label_components(&mut self) {
        let mut uf = UnionFind::new(self.graph.node_count());
        for e in self.graph.edge_indices() {
            let (a, b) = self.graph.edge_endpoints(e).expect("edge exists");
            uf.union(a.index(), b.index());
        }
        self.component = uf.into_labeling();
    }

    /// Whether a path joins `a` and `b`; `None` if either is not a vertex.
    pub fn connected(&self, a: &Point<T>, b: &Point<T>) -> Option<bool> {
        let a = self.index.get(&a.key())?;
        let b = self.index.get(&b.key())?;
        Some(self.component[a.index()] == self.component[b.index()])
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        self.index.contains_key(&p.key())
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point<T>> + '_ {
        self.graph.node_weights().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point<T>, Point<T>, T)> + '_ {
        self.graph.edge_indices().map(|e| {
            let (a, b) = self.graph.edge_endpoints(e).expect("edge exists");
            (self.graph[a], self.graph[b], self.graph[e])
        })
    }

    /// Sum of all edge lengths; an upper bound on any shortest path.
    pub fn total_edge_length(&self) -> T {
        self.total_edge_length
    }

    /// Shortest vertex sequence from `from` to `to`, or `None` if either is not
    /// a vertex or they lie in different components.
    pub fn shortest_path(&self, from: &Point<T>, to: &Point<T>) -> Option<Vec<Point<T>>> {
        let s = *self.index.get(&from.key())?;
        let g = *self.index.get(&to.key())?;
        let (_, path) = astar(&self.graph, s, |n| n == g, |e| *e.weight(), |_| T::zero())?;
        Some(path.into_iter().map(|n| self.graph[n]).collect())
    }
}

/// Points every plan may start or end at.
pub fn mandatory_points<T: Scalar>(domain: &ProblemDomain<T>) -> Vec<Point<T>> {
    domain
        .world
        .robot_starts
        .iter()
        .copied()
        .chain(
            domain
                .network
                .tasks
                .iter()
                .flat_map(|t| [t.initial, t.terminal]),
        )
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Obstacle};

    fn world(obstacles: Vec<Obstacle<f64>>) -> WorldModel<f64> {
        WorldModel {
            bounds: Aabb::new(Point::new(0.0, 0.0), Point::new(10.0, 10.0)),
            obstacles,
            robot_starts: vec![],
            robot_speeds: vec![],
        }
    }

    fn components(r: &Roadmap<f64>) -> usize {
        petgraph::algo::connected_components(&r.graph)
    }

    #[test]
    fn open_world_is_connected_across_seeds() {
        for seed in 0..10 {
            let r = build_roadmap(&world(vec![]), &[], 50, 5, seed).unwrap();
            assert_eq!(r.vertex_count(), 50);
            assert_eq!(components(&r), 1, "seed {seed}");
        }
    }

    #[test]
    fn fully_blocked_world_fails() {
        let w = world(vec![Obstacle::Rect {
            min: Point::new(0.0, 0.0),
            max: Point::new(10.0, 10.0),
        }]);
        assert!(matches!(
            build_roadmap(&w, &[], 20, 5, 1),
            Err(Error::Roadmap(_))
        ));
    }

    #[test]
    fn same_seed_same_roadmap() {
        let w = world(vec![Obstacle::Circle {
            center: Point::new(5.0, 5.0),
            radius: 2.0,
        }]);
        let a = build_roadmap(&w, &[Point::new(1.0, 1.0)], 80, 6, 42).unwrap();
        let b = build_roadmap(&w, &[Point::new(1.0, 1.0)], 80, 6, 42).unwrap();
        assert_eq!(
            a.vertices().collect::<Vec<_>>(),
            b.vertices().collect::<Vec<_>>()
        );
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_eq!(a.total_edge_length(), b.total_edge_length());
    }

    #[test]
    fn edges_avoid_obstacles_and_sum_up() {
        let w = world(vec![Obstacle::Rect {
            min: Point::new(4.0, 0.0),
            max: Point::new(6.0, 8.0),
        }]);
        let r = build_roadmap(&w, &[], 150, 8, 3).unwrap();
        let mut sum = 0.0;
        for (a, b, len) in r.edges() {
            assert!(w.segment_is_free(&a, &b));
            assert!((a.distance(&b) - len).abs() < 1e-12);
            sum += len;
        }
        assert!((sum - r.total_edge_length()).abs() < 1e-9);
    }

    #[test]
    fn ensure_vertex_is_idempotent() {
        let w = world(vec![]);
        let mut r = build_roadmap(&w, &[], 30, 4, 9).unwrap();
        let p = Point::new(3.3, 3.3);
        r.ensure_vertex(&w, p);
        let n = r.vertex_count();
        r.ensure_vertex(&w, p);
        assert_eq!(r.vertex_count(), n);
        assert!(r.contains(&p));
    }
}
