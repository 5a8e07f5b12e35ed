//! Superficial degree of divergence of QID graphs.
//!
//! Graph JSON:
//!
//! ```json
//! {
//!   "vertices": [{"id": 0, "type": "gauge3"}, {"id": 1, "type": "ghost"}],
//!   "internal_edges": [{"from": 0, "to": 1, "kind": "gauge"}],
//!   "external_legs": [{"vertex": 1, "kind": "ghost_in"}]
//! }
//! ```
//!
//! Ghost edges are directed along the ghost-number flow: `from` emits,
//! `to` absorbs. External ghost legs are `ghost_in` (entering the vertex) or
//! `ghost_out`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexType {
    Gauge3,
    Gauge4,
    Ghost,
}

impl VertexType {
    pub const ALL: [VertexType; 3] = [VertexType::Gauge3, VertexType::Gauge4, VertexType::Ghost];

    /// `(lines b, spacetime derivatives d)`.
    pub fn lines_and_derivatives(self) -> (i64, i64) {
        match self {
            VertexType::Gauge3 => (3, 1),
            VertexType::Gauge4 => (4, 0),
            VertexType::Ghost => (3, 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Gauge,
    Ghost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExternalKind {
    Gauge,
    GhostIn,
    GhostOut,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vertex {
    pub id: u32,
    #[serde(rename = "type")]
    pub vtype: VertexType,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub kind: EdgeKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct External {
    pub vertex: u32,
    pub kind: ExternalKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeynmanGraph {
    pub vertices: Vec<Vertex>,
    pub internal_edges: Vec<Edge>,
    pub external_legs: Vec<External>,
}

/// `b + d − 4`.
pub fn divergence_index(v: VertexType) -> i64 {
    let (b, d) = v.lines_and_derivatives();
    b + d - 4
}

#[derive(Default, Clone, Copy)]
struct Slots {
    gauge: usize,
    ghost_in: usize,
    ghost_out: usize,
}

impl FeynmanGraph {
    pub fn from_json(s: &str) -> Result<FeynmanGraph> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    /// Checks ids, valences and ghost-line orientation.
    pub fn validate(&self) -> Result<()> {
        let mut types = BTreeMap::new();
        for v in &self.vertices {
            if types.insert(v.id, v.vtype).is_some() {
                return Err(Error::MalformedGraph(format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut slots: BTreeMap<u32, Slots> = types.keys().map(|k| (*k, Slots::default())).collect();
        fn at(slots: &mut BTreeMap<u32, Slots>, id: u32) -> Result<&mut Slots> {
            slots
                .get_mut(&id)
                .ok_or_else(|| Error::MalformedGraph(format!("unknown vertex {id}")))
        }
        for e in &self.internal_edges {
            match e.kind {
                EdgeKind::Gauge => {
                    at(&mut slots, e.from)?.gauge += 1;
                    at(&mut slots, e.to)?.gauge += 1;
                }
                EdgeKind::Ghost => {
                    at(&mut slots, e.from)?.ghost_out += 1;
                    at(&mut slots, e.to)?.ghost_in += 1;
                }
            }
        }
        for x in &self.external_legs {
            let s = at(&mut slots, x.vertex)?;
            match x.kind {
                ExternalKind::Gauge => s.gauge += 1,
                ExternalKind::GhostIn => s.ghost_in += 1,
                ExternalKind::GhostOut => s.ghost_out += 1,
            }
        }
        for (id, s) in &slots {
            let ok = match types[id] {
                VertexType::Gauge3 => s.gauge == 3 && s.ghost_in == 0 && s.ghost_out == 0,
                VertexType::Gauge4 => s.gauge == 4 && s.ghost_in == 0 && s.ghost_out == 0,
                VertexType::Ghost => s.gauge == 1 && s.ghost_in == 1 && s.ghost_out == 1,
            };
            if !ok {
                return Err(Error::MalformedGraph(format!(
                    "vertex {id} ({:?}) has {} gauge, {} incoming and {} outgoing ghost lines",
                    types[id], s.gauge, s.ghost_in, s.ghost_out
                )));
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let Some(first) = self.vertices.first() else {
            return false;
        };
        let mut adj: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for e in &self.internal_edges {
            adj.entry(e.from).or_default().push(e.to);
            adj.entry(e.to).or_default().push(e.from);
        }
        let mut seen = BTreeSet::from([first.id]);
        let mut queue = VecDeque::from([first.id]);
        while let Some(v) = queue.pop_front() {
            for w in adj.get(&v).into_iter().flatten() {
                if seen.insert(*w) {
                    queue.push_back(*w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Number of external gauge and ghost lines.
    pub fn external_count(&self) -> usize {
        self.external_legs.len()
    }

    pub fn loop_count(&self) -> i64 {
        self.internal_edges.len() as i64 - self.vertices.len() as i64 + 1
    }
}

/// `4 − B`.
pub fn superficial_degree(g: &FeynmanGraph) -> Result<i64> {
    g.validate()?;
    Ok(4 - g.external_count() as i64)
}

/// `4L − 2I + Σ_v d_v` counted from the graph itself.
pub fn brute_degree(g: &FeynmanGraph) -> Result<i64> {
    g.validate()?;
    if !g.is_connected() {
        return Err(Error::MalformedGraph("graph is disconnected".into()));
    }
    let derivs: i64 = g.vertices.iter().map(|v| v.vtype.lines_and_derivatives().1).sum();
    Ok(4 * g.loop_count() - 2 * g.internal_edges.len() as i64 + derivs)
}

/// External-line counts `B ≥ 1` with `ω ≥ 0`, scanning up to `max_b`.
pub fn divergent_leg_counts(max_b: usize) -> Vec<usize> {
    (1..=max_b).filter(|b| 4 - *b as i64 >= 0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stub {
    Gauge,
    GhostIn,
    GhostOut,
}

fn stubs(t: VertexType) -> Vec<Stub> {
    match t {
        VertexType::Gauge3 => vec![Stub::Gauge; 3],
        VertexType::Gauge4 => vec![Stub::Gauge; 4],
        VertexType::Ghost => vec![Stub::Gauge, Stub::GhostIn, Stub::GhostOut],
    }
}

/// Joins a free stub of `a` with a compatible free stub of `b`.
fn join(free: &mut [Vec<Stub>], a: usize, b: usize, rng: &mut impl Rng) -> Option<Edge> {
    let mut options = Vec::new();
    for (i, sa) in free[a].iter().enumerate() {
        for (j, sb) in free[b].iter().enumerate() {
            if a == b && i == j {
                continue;
            }
            let edge = match (sa, sb) {
                (Stub::Gauge, Stub::Gauge) => Some((EdgeKind::Gauge, a, b)),
                (Stub::GhostOut, Stub::GhostIn) => Some((EdgeKind::Ghost, a, b)),
                (Stub::GhostIn, Stub::GhostOut) => Some((EdgeKind::Ghost, b, a)),
                _ => None,
            };
            if let Some(e) = edge {
                options.push((i, j, e));
            }
        }
    }
    let (i, j, (kind, from, to)) = *options.choose(rng)?;
    let (hi, lo) = if a == b { (i.max(j), i.min(j)) } else { (i, j) };
    if a == b {
        free[a].remove(hi);
        free[a].remove(lo);
    } else {
        free[a].remove(i);
        free[b].remove(j);
    }
    Some(Edge {
        from: from as u32,
        to: to as u32,
        kind,
    })
}

/// A random valid connected graph with `1..=max_vertices` vertices.
pub fn random_graph(max_vertices: usize, rng: &mut impl Rng) -> FeynmanGraph {
    loop {
        let n = rng.gen_range(1..=max_vertices.max(1));
        let types: Vec<VertexType> = (0..n).map(|_| *VertexType::ALL.choose(rng).unwrap()).collect();
        let mut free: Vec<Vec<Stub>> = types.iter().map(|t| stubs(*t)).collect();
        let mut edges = Vec::new();
        let mut ok = true;
        for v in 1..n {
            let u = rng.gen_range(0..v);
            match join(&mut free, u, v, rng) {
                Some(e) => edges.push(e),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let extra = rng.gen_range(0..=n + 1);
        for _ in 0..extra {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if let Some(e) = join(&mut free, a, b, rng) {
                edges.push(e);
            }
        }
        let external_legs = free
            .iter()
            .enumerate()
            .flat_map(|(v, ss)| {
                ss.iter().map(move |s| External {
                    vertex: v as u32,
                    kind: match s {
                        Stub::Gauge => ExternalKind::Gauge,
                        Stub::GhostIn => ExternalKind::GhostIn,
                        Stub::GhostOut => ExternalKind::GhostOut,
                    },
                })
            })
            .collect();
        return FeynmanGraph {
            vertices: types
                .into_iter()
                .enumerate()
                .map(|(i, vtype)| Vertex { id: i as u32, vtype })
                .collect(),
            internal_edges: edges,
            external_legs,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(id: u32, vtype: VertexType) -> Vertex {
        Vertex { id, vtype }
    }

    fn gauge(from: u32, to: u32) -> Edge {
        Edge {
            from,
            to,
            kind: EdgeKind::Gauge,
        }
    }

    fn ext(vertex: u32) -> External {
        External {
            vertex,
            kind: ExternalKind::Gauge,
        }
    }

    #[test]
    fn vertex_indices_vanish() {
        for t in VertexType::ALL {
            assert_eq!(divergence_index(t), 0);
        }
    }

    #[test]
    fn self_energy() {
        let g = FeynmanGraph {
            vertices: vec![v(0, VertexType::Gauge3), v(1, VertexType::Gauge3)],
            internal_edges: vec![gauge(0, 1), gauge(0, 1)],
            external_legs: vec![ext(0), ext(1)],
        };
        assert_eq!(superficial_degree(&g).unwrap(), 2);
        assert_eq!(brute_degree(&g).unwrap(), 2);
    }

    #[test]
    fn tadpole() {
        let g = FeynmanGraph {
            vertices: vec![v(0, VertexType::Gauge4)],
            internal_edges: vec![gauge(0, 0)],
            external_legs: vec![ext(0), ext(0)],
        };
        assert_eq!(brute_degree(&g).unwrap(), 2);
        assert_eq!(superficial_degree(&g).unwrap(), 2);
    }

    #[test]
    fn tree() {
        let g = FeynmanGraph {
            vertices: vec![v(0, VertexType::Gauge3), v(1, VertexType::Gauge3)],
            internal_edges: vec![gauge(0, 1)],
            external_legs: vec![ext(0), ext(0), ext(1), ext(1)],
        };
        assert_eq!(brute_degree(&g).unwrap(), 0);
        assert_eq!(superficial_degree(&g).unwrap(), 0);
    }

    #[test]
    fn convergent_five_point() {
        let g = FeynmanGraph {
            vertices: vec![v(0, VertexType::Gauge3), v(1, VertexType::Gauge4)],
            internal_edges: vec![gauge(0, 1)],
            external_legs: vec![ext(0), ext(0), ext(1), ext(1), ext(1)],
        };
        assert_eq!(superficial_degree(&g).unwrap(), -1);
    }

    #[test]
    fn ghost_loop() {
        let ghost = |from, to| Edge {
            from,
            to,
            kind: EdgeKind::Ghost,
        };
        let g = FeynmanGraph {
            vertices: vec![v(0, VertexType::Ghost), v(1, VertexType::Ghost)],
            internal_edges: vec![ghost(0, 1), ghost(1, 0)],
            external_legs: vec![ext(0), ext(1)],
        };
        assert_eq!(brute_degree(&g).unwrap(), superficial_degree(&g).unwrap());
    }

    #[test]
    fn malformed_rejected() {
        let g = FeynmanGraph {
            vertices: vec![v(0, VertexType::Gauge3)],
            internal_edges: vec![],
            external_legs: vec![ext(0)],
        };
        assert!(matches!(superficial_degree(&g), Err(Error::MalformedGraph(_))));
        let wrong_ghost = FeynmanGraph {
            vertices: vec![v(0, VertexType::Ghost)],
            internal_edges: vec![],
            external_legs: vec![ext(0), ext(0), ext(0)],
        };
        assert!(wrong_ghost.validate().is_err());
    }

    #[test]
    fn disconnected_rejected() {
        let g = FeynmanGraph {
            vertices: vec![v(0, VertexType::Gauge4), v(1, VertexType::Gauge4)],
            internal_edges: vec![gauge(0, 0), gauge(1, 1)],
            external_legs: vec![ext(0), ext(0), ext(1), ext(1)],
        };
        assert!(brute_degree(&g).is_err());
    }

    #[test]
    fn vacuum_graph_reports_four() {
        let g = FeynmanGraph {
            vertices: vec![v(0, VertexType::Gauge4)],
            internal_edges: vec![gauge(0, 0), gauge(0, 0)],
            external_legs: vec![],
        };
        assert_eq!(superficial_degree(&g).unwrap(), 4);
        assert_eq!(brute_degree(&g).unwrap(), 4);
    }

    #[test]
    fn only_few_external_counts_diverge() {
        assert_eq!(divergent_leg_counts(12), vec![1, 2, 3, 4]);
    }

    #[test]
    fn random_graphs_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let g = random_graph(8, &mut rng);
            g.validate().unwrap();
            assert!(g.is_connected());
            let back = FeynmanGraph::from_json(&g.to_json()).unwrap();
            assert_eq!(back, g);
        }
    }
}
