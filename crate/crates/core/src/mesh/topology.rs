use super::{sorted2, sorted3, SimplicialMesh};

/// Local vertex pairs of the six edges of a tetrahedron.
pub const LOCAL_EDGES: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];

/// Local vertices of face `k`, which lies opposite local vertex `k`.
pub const LOCAL_FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]];

/// Marker for the missing second element of a boundary face.
pub const NO_NEIGHBOR: usize = usize::MAX;

/// Edge and face numbering with element adjacency.
#[derive(Clone, Debug)]
pub struct MeshTopology {
    /// Sorted vertex pairs, in lexicographic order.
    pub edges: Vec<[usize; 2]>,
    /// Edge ids per element in [`LOCAL_EDGES`] order.
    pub tet_edges: Vec<[usize; 6]>,
    /// Sorted vertex triples, in lexicographic order.
    pub faces: Vec<[usize; 3]>,
    /// Face ids per element in [`LOCAL_FACES`] order.
    pub tet_faces: Vec<[usize; 4]>,
    /// The one or two elements sharing each face; the second is
    /// [`NO_NEIGHBOR`] on the boundary.
    pub face_tets: Vec<[usize; 2]>,
    edge_tet_offsets: Vec<usize>,
    edge_tet_list: Vec<usize>,
}

impl MeshTopology {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let tets = mesh.tets();
        let nt = tets.len();

        let mut keyed: Vec<([usize; 2], usize)> = Vec::with_capacity(6 * nt);
        for (k, t) in tets.iter().enumerate() {
            for (le, e) in LOCAL_EDGES.iter().enumerate() {
                keyed.push((sorted2(t[e[0]], t[e[1]]), 6 * k + le));
            }
        }
        keyed.sort_unstable();
        let mut edges = Vec::new();
        let mut tet_edges = vec![[0usize; 6]; nt];
        for (pair, slot) in &keyed {
            if edges.last() != Some(pair) {
                edges.push(*pair);
            }
            tet_edges[slot / 6][slot % 6] = edges.len() - 1;
        }

        let mut keyed: Vec<([usize; 3], usize)> = Vec::with_capacity(4 * nt);
        for (k, t) in tets.iter().enumerate() {
            for (lf, f) in LOCAL_FACES.iter().enumerate() {
                keyed.push((sorted3([t[f[0]], t[f[1]], t[f[2]]]), 4 * k + lf));
            }
        }
        keyed.sort_unstable();
        let mut faces = Vec::new();
        let mut face_tets: Vec<[usize; 2]> = Vec::new();
        let mut tet_faces = vec![[0usize; 4]; nt];
        for (tri, slot) in &keyed {
            let k = slot / 4;
            if faces.last() != Some(tri) {
                faces.push(*tri);
                face_tets.push([k, NO_NEIGHBOR]);
            } else {
                face_tets.last_mut().unwrap()[1] = k;
            }
            tet_faces[k][slot % 4] = faces.len() - 1;
        }

        let mut edge_tet_offsets = vec![0usize; edges.len() + 1];
        for te in &tet_edges {
            for &e in te {
                edge_tet_offsets[e + 1] += 1;
            }
        }
        for i in 0..edges.len() {
            edge_tet_offsets[i + 1] += edge_tet_offsets[i];
        }
        let mut fill = edge_tet_offsets.clone();
        let mut edge_tet_list = vec![0usize; edge_tet_offsets[edges.len()]];
        for (k, te) in tet_edges.iter().enumerate() {
            for &e in te {
                edge_tet_list[fill[e]] = k;
                fill[e] += 1;
            }
        }

        Self { edges, tet_edges, faces, tet_faces, face_tets, edge_tet_offsets, edge_tet_list }
    }

    /// Elements containing edge `e`, in ascending order.
    pub fn edge_tets(&self, e: usize) -> &[usize] {
        &self.edge_tet_list[self.edge_tet_offsets[e]..self.edge_tet_offsets[e + 1]]
    }

    /// Edge id of the sorted pair `(a, b)`, if it is an edge of the mesh.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&sorted2(a, b)).ok()
    }

    pub fn is_boundary_face(&self, f: usize) -> bool {
        self.face_tets[f][1] == NO_NEIGHBOR
    }

    /// The element across local face `lf` of element `k`, if any.
    pub fn neighbor(&self, k: usize, lf: usize) -> Option<usize> {
        let [a, b] = self.face_tets[self.tet_faces[k][lf]];
        if b == NO_NEIGHBOR {
            None
        } else if a == k {
            Some(b)
        } else {
            Some(a)
        }
    }

    /// Local edge indices (into [`LOCAL_EDGES`]) of local face `lf`.
    pub fn local_face_edges(lf: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut n = 0;
        for (le, e) in LOCAL_EDGES.iter().enumerate() {
            if e[0] != lf && e[1] != lf {
                out[n] = le;
                n += 1;
            }
        }
        out
    }
}
