//! Base graphs and a compact constructor for hand-written maps.

use std::collections::BTreeMap;

use crate::annulus_map::{AnnulusMap, Dart, Edge, MapError};
use crate::format::parse_dart;
use crate::moves::{add_diagonal, add_pendant, corner_count, FreshIds};

/// Builds a map from labels: edges are `(id, tail, head)`, rotations list
/// dart strings per vertex, and each end is named by any dart on its face.
pub fn from_labels(
    vertices: &[&str],
    edges: &[(&str, &str, &str)],
    rotation: &[&[&str]],
    end_darts: [Option<&str>; 2],
) -> Result<AnnulusMap, MapError> {
    let vindex: BTreeMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let vertex = |v: &str| vindex.get(v).copied().ok_or_else(|| MapError::Malformed(format!("unknown vertex {v}")));
    let mut es = Vec::new();
    for (id, t, h) in edges {
        es.push(Edge { id: id.to_string(), tail: vertex(t)?, head: vertex(h)? });
    }
    let eindex: BTreeMap<&str, usize> = edges.iter().enumerate().map(|(i, e)| (e.0, i)).collect();
    let dart = |s: &str| parse_dart(s, &eindex).map_err(|e| MapError::Malformed(e.to_string()));
    let mut rot = Vec::new();
    for r in rotation {
        rot.push(r.iter().map(|s| dart(s)).collect::<Result<Vec<Dart>, _>>()?);
    }
    let ends = [end_darts[0].map(dart).transpose()?, end_darts[1].map(dart).transpose()?];
    AnnulusMap::build_with_end_darts(vertices.iter().map(|v| v.to_string()).collect(), es, rot, ends)
}

/// Which base graph a construction starts from.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Base {
    K,
    L,
    M,
}

impl Base {
    pub fn map(self) -> AnnulusMap {
        match self {
            Base::K => k_graph(),
            Base::L => l_graph(),
            Base::M => m_graph(),
        }
    }

    pub fn n_vertices(self) -> usize {
        match self {
            Base::M => 1,
            _ => 2,
        }
    }
}

/// One edge, both ends in its single face.
pub fn k_graph() -> AnnulusMap {
    from_labels(&["a", "b"], &[("e0", "a", "b")], &[&["e0+"], &["e0-"]], [Some("e0+"), Some("e0+")])
        .expect("K is valid")
}

/// Two parallel edges forming a cycle that winds once.
pub fn l_graph() -> AnnulusMap {
    from_labels(
        &["a", "b"],
        &[("e0", "a", "b"), ("e1", "a", "b")],
        &[&["e0+", "e1+"], &["e0-", "e1-"]],
        [Some("e0+"), Some("e1+")],
    )
    .expect("L is valid")
}

/// A single winding loop.
pub fn m_graph() -> AnnulusMap {
    from_labels(&["a"], &[("e0", "a", "a")], &[&["e0+", "e0-"]], [Some("e0+"), Some("e0-")]).expect("M is valid")
}

/// A single vertex with no edges.
pub fn isolated_vertex() -> AnnulusMap {
    from_labels(&["a"], &[], &[&[]], [None, None]).expect("a point is valid")
}

/// Every connected map with at most `max_edges` edges, one per isomorphism
/// class, ordered by edge count. Grown from a point by pendant edges and
/// diagonals, which reach every connected map.
pub fn enumerate_maps(max_edges: usize) -> Vec<AnnulusMap> {
    let mut seen = std::collections::HashSet::new();
    let point = isolated_vertex();
    seen.insert(crate::canonical_code(&point));
    let mut layer = vec![point];
    let mut out = layer.clone();
    for _ in 0..max_edges {
        let mut next = Vec::new();
        for map in &layer {
            for child in one_edge_extensions(map) {
                if seen.insert(crate::canonical_code(&child)) {
                    next.push(child);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// All maps obtained by adding one edge, as a pendant or as a diagonal.
pub fn one_edge_extensions(map: &AnnulusMap) -> Vec<AnnulusMap> {
    let ids = FreshIds::for_map(map);
    let mut out = Vec::new();
    for f in 0..map.n_faces() {
        let c = corner_count(map, f);
        let sides: &[[bool; 2]] = if map.end_faces().contains(&f) {
            &[[true, true], [true, false], [false, true], [false, false]]
        } else {
            &[[true, true]]
        };
        for i in 0..c {
            out.extend(add_pendant(map, f, i, &ids.vertex, &ids.edges[0]));
            for j in i..c {
                for &s in sides {
                    out.extend(add_diagonal(map, f, i, j, s, &ids.edges[0]));
                }
            }
        }
    }
    out
}

/// A random connected map with `edges` edges.
pub fn random_map<R: rand::Rng>(rng: &mut R, edges: usize) -> AnnulusMap {
    let mut map = isolated_vertex();
    while map.n_edges() < edges {
        let ids = FreshIds::for_map(&map);
        let f = rng.gen_range(0..map.n_faces());
        let c = corner_count(&map, f);
        let i = rng.gen_range(0..c);
        let next = if rng.gen_bool(0.35) {
            add_pendant(&map, f, i, &ids.vertex, &ids.edges[0])
        } else {
            add_diagonal(&map, f, i, rng.gen_range(0..c), [rng.gen(), rng.gen()], &ids.edges[0])
        };
        map = next.expect("insertion into a face is valid");
    }
    map
}
