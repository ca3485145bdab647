use std::collections::{HashMap, VecDeque};
use std::ops::Range;
use std::sync::Arc;

use super::{sorted2, MeshTopology, Region, SimplicialMesh, LOCAL_EDGES};
use crate::geom;
use crate::{Error, Point, Result};

/// Bookkeeping for one refinement step (level `j >= 1`).
#[derive(Clone, Debug, Default)]
pub struct LevelRecord {
    /// Level `j - 1` element ids passed to the refinement call.
    pub marked: Vec<usize>,
    /// Per level-`j` element: created by this refinement (bisection or
    /// closure). The union is the refinement region.
    pub created: Vec<bool>,
    /// Per level-`j` element: descends from a marked element. The union is
    /// the marked region.
    pub in_marked: Vec<bool>,
}

/// Nested sequence of conforming meshes produced by longest-edge bisection.
///
/// Node ids are append-only: the nodes of level `j - 1` keep their ids on
/// level `j`, and the fine nodes of level `j` are the id range
/// `N_{j-1}..N_j`.
#[derive(Clone, Debug)]
pub struct MeshHierarchy {
    levels: Vec<Arc<SimplicialMesh>>,
    records: Vec<LevelRecord>,
    /// Bisected edge of every node created after level 0, indexed by
    /// `node - N_0`.
    parents: Vec<[usize; 2]>,
}

impl MeshHierarchy {
    pub fn new(coarse: SimplicialMesh) -> Self {
        Self { levels: vec![Arc::new(coarse)], records: vec![LevelRecord::default()], parents: Vec::new() }
    }

    /// Index of the finest level `J`.
    pub fn finest_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn mesh(&self, level: usize) -> &SimplicialMesh {
        &self.levels[level]
    }

    pub fn finest(&self) -> &SimplicialMesh {
        self.levels.last().unwrap()
    }

    /// Shared handle to the level mesh, for building finite element spaces.
    pub fn mesh_arc(&self, level: usize) -> Arc<SimplicialMesh> {
        Arc::clone(&self.levels[level])
    }

    pub fn record(&self, level: usize) -> &LevelRecord {
        &self.records[level]
    }

    /// `N_j`.
    pub fn num_nodes(&self, level: usize) -> usize {
        self.levels[level].num_vertices()
    }

    /// Ids of the nodes first appearing on `level`.
    pub fn fine_nodes(&self, level: usize) -> Range<usize> {
        if level == 0 {
            0..self.num_nodes(0)
        } else {
            self.num_nodes(level - 1)..self.num_nodes(level)
        }
    }

    /// Endpoints of the edge whose midpoint created `node`, or `None` for a
    /// level-0 node.
    pub fn parent_edge(&self, node: usize) -> Option<[usize; 2]> {
        let n0 = self.num_nodes(0);
        if node < n0 {
            None
        } else {
            self.parents.get(node - n0).copied()
        }
    }

    /// Drops every level above `level`.
    pub fn truncate(&mut self, level: usize) {
        let n = self.num_nodes(level);
        self.levels.truncate(level + 1);
        self.records.truncate(level + 1);
        self.parents.truncate(n - self.num_nodes(0));
    }

    /// Bisects every marked element of the finest mesh along its longest
    /// edge, closes the result to a conforming mesh and appends it as a new
    /// level.
    pub fn bisect_refine(&mut self, marked: &[usize]) -> Result<()> {
        if marked.is_empty() {
            return Err(Error::NothingToRefine);
        }
        let mesh = self.mesh_arc(self.finest_level());
        let nt = mesh.num_elements();
        if let Some(&id) = marked.iter().find(|&&k| k >= nt) {
            return Err(Error::InvalidElement { id, count: nt });
        }
        let topo = MeshTopology::new(&mesh);
        let verts = mesh.vertices();
        let split_edges = close_marking(verts, &topo, marked);

        let mut vertices: Vec<Point> = verts.to_vec();
        let mut midpoints: HashMap<[usize; 2], usize> = HashMap::with_capacity(split_edges.len());
        for e in &split_edges {
            let [a, b] = topo.edges[*e];
            midpoints.insert([a, b], vertices.len());
            vertices.push(geom::midpoint(&verts[a], &verts[b]));
            self.parents.push([a, b]);
        }

        let mut is_marked = vec![false; nt];
        for &k in marked {
            is_marked[k] = true;
        }
        let mut tets = Vec::with_capacity(nt + 2 * split_edges.len());
        let mut regions = Vec::with_capacity(tets.capacity());
        let mut created = Vec::with_capacity(tets.capacity());
        let mut in_marked = Vec::with_capacity(tets.capacity());
        let mut scratch = Vec::new();
        for (k, t) in mesh.tets().iter().enumerate() {
            let touched = topo.tet_edges[k].iter().any(|&e| split_edges.binary_search(&e).is_ok());
            if !touched {
                tets.push(*t);
                regions.push(mesh.regions()[k]);
                created.push(false);
                in_marked.push(false);
                continue;
            }
            scratch.clear();
            bisect_recursive(*t, verts, &midpoints, &mut scratch);
            for child in &scratch {
                tets.push(*child);
                regions.push(mesh.regions()[k]);
                created.push(true);
                in_marked.push(is_marked[k]);
            }
        }

        let fine = SimplicialMesh::from_elements(vertices, tets, regions)?;
        let mut marked = marked.to_vec();
        marked.sort_unstable();
        marked.dedup();
        self.levels.push(Arc::new(fine));
        self.records.push(LevelRecord { marked, created, in_marked });
        Ok(())
    }

    /// Refines every element of the finest mesh.
    pub fn refine_uniform(&mut self) -> Result<()> {
        let all: Vec<usize> = (0..self.finest().num_elements()).collect();
        self.bisect_refine(&all)
    }
}

/// Total order on edges used to pick the refinement edge: longer first,
/// ties broken by the lexicographically smallest sorted vertex pair.
#[inline]
fn edge_precedes(verts: &[Point], a: [usize; 2], b: [usize; 2]) -> bool {
    let la = geom::dist2(&verts[a[0]], &verts[a[1]]);
    let lb = geom::dist2(&verts[b[0]], &verts[b[1]]);
    la > lb || (la == lb && a < b)
}

fn longest_of(verts: &[Point], topo: &MeshTopology, edges: &[usize]) -> usize {
    let mut best = edges[0];
    for &e in &edges[1..] {
        if edge_precedes(verts, topo.edges[e], topo.edges[best]) {
            best = e;
        }
    }
    best
}

/// Marks the longest edge of every marked element, then closes the edge
/// set so that every element and every face carrying a marked edge has its
/// longest edge marked. Returns the sorted edge ids to bisect.
fn close_marking(verts: &[Point], topo: &MeshTopology, marked: &[usize]) -> Vec<usize> {
    let nt = topo.tet_edges.len();
    let tet_longest: Vec<usize> =
        (0..nt).map(|k| longest_of(verts, topo, &topo.tet_edges[k])).collect();
    let face_edges = |k: usize, lf: usize| -> [usize; 3] {
        let le = MeshTopology::local_face_edges(lf);
        [topo.tet_edges[k][le[0]], topo.tet_edges[k][le[1]], topo.tet_edges[k][le[2]]]
    };

    let mut is_split = vec![false; topo.edges.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mark = |e: usize, is_split: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
        if !is_split[e] {
            is_split[e] = true;
            queue.extend(topo.edge_tets(e));
        }
    };
    for &k in marked {
        mark(tet_longest[k], &mut is_split, &mut queue);
    }
    while let Some(k) = queue.pop_front() {
        if !is_split[tet_longest[k]] {
            mark(tet_longest[k], &mut is_split, &mut queue);
        }
        for lf in 0..4 {
            let fe = face_edges(k, lf);
            if fe.iter().any(|&e| is_split[e]) {
                let longest = longest_of(verts, topo, &fe);
                if !is_split[longest] {
                    mark(longest, &mut is_split, &mut queue);
                }
            }
        }
    }
    (0..topo.edges.len()).filter(|&e| is_split[e]).collect()
}

/// Bisects `tet` along its longest still-unsplit marked edge until no marked
/// edge remains, appending the leaves in depth-first order.
fn bisect_recursive(
    tet: [usize; 4],
    verts: &[Point],
    midpoints: &HashMap<[usize; 2], usize>,
    out: &mut Vec<[usize; 4]>,
) {
    let mut best: Option<(usize, usize, [usize; 2])> = None;
    for e in LOCAL_EDGES {
        let key = sorted2(tet[e[0]], tet[e[1]]);
        if !midpoints.contains_key(&key) {
            continue;
        }
        if best.is_none_or(|(_, _, b)| edge_precedes(verts, key, b)) {
            best = Some((e[0], e[1], key));
        }
    }
    match best {
        None => out.push(tet),
        Some((i, j, key)) => {
            let m = midpoints[&key];
            // Replacing one endpoint by the midpoint keeps the orientation.
            let mut first = tet;
            first[j] = m;
            let mut second = tet;
            second[i] = m;
            bisect_recursive(first, verts, midpoints, out);
            bisect_recursive(second, verts, midpoints, out);
        }
    }
}

impl MeshHierarchy {
    /// Region label counts `(solute, solvent)` of a set of finest-level
    /// elements.
    pub fn count_regions(&self, elements: &[usize]) -> (usize, usize) {
        let regions = self.finest().regions();
        let m = elements.iter().filter(|&&k| regions[k] == Region::Solute).count();
        (m, elements.len() - m)
    }
}
