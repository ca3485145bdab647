use std::sync::{Arc, OnceLock};

use crate::geom;
use crate::mesh::{ElementGeometry, MeshTopology, PointLocator, SimplicialMesh, LOCAL_EDGES, LOCAL_FACES};
use crate::{Error, Point, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Degree {
    P1,
    P2,
}

impl Degree {
    pub fn local_dofs(self) -> usize {
        match self {
            Degree::P1 => 4,
            Degree::P2 => 10,
        }
    }
}

/// Continuous piecewise-linear or piecewise-quadratic Lagrange space.
///
/// Dofs are numbered vertices first (`0..N`), then edge midpoints in
/// [`MeshTopology`] edge order (`N + e`).
#[derive(Debug)]
pub struct FeSpace {
    mesh: Arc<SimplicialMesh>,
    topology: MeshTopology,
    geometry: Vec<ElementGeometry>,
    degree: Degree,
    boundary: Vec<bool>,
    locator: OnceLock<PointLocator>,
    pattern: OnceLock<(Vec<usize>, Vec<usize>)>,
}

impl FeSpace {
    pub fn new(mesh: Arc<SimplicialMesh>, degree: Degree) -> Result<Self> {
        let topology = MeshTopology::new(&mesh);
        let geometry = (0..mesh.num_elements())
            .map(|k| {
                ElementGeometry::new(&mesh.element_points(k))
                    .ok_or(Error::DegenerateElement { element: k, volume: mesh.volume(k) })
            })
            .collect::<Result<Vec<_>>>()?;
        let nv = mesh.num_vertices();
        let ndofs = match degree {
            Degree::P1 => nv,
            Degree::P2 => nv + topology.edges.len(),
        };
        let mut boundary = vec![false; ndofs];
        for (f, tets) in topology.face_tets.iter().enumerate() {
            if tets[1] != crate::mesh::NO_NEIGHBOR {
                continue;
            }
            let k = tets[0];
            let lf = topology.tet_faces[k].iter().position(|&x| x == f).unwrap();
            for lv in LOCAL_FACES[lf] {
                boundary[mesh.tets()[k][lv]] = true;
            }
            if degree == Degree::P2 {
                for le in MeshTopology::local_face_edges(lf) {
                    boundary[nv + topology.tet_edges[k][le]] = true;
                }
            }
        }
        Ok(Self {
            mesh,
            topology,
            geometry,
            degree,
            boundary,
            locator: OnceLock::new(),
            pattern: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &SimplicialMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<SimplicialMesh> {
        &self.mesh
    }

    pub fn topology(&self) -> &MeshTopology {
        &self.topology
    }

    pub fn geometry(&self, k: usize) -> &ElementGeometry {
        &self.geometry[k]
    }

    pub fn degree(&self) -> Degree {
        self.degree
    }

    pub fn num_dofs(&self) -> usize {
        self.boundary.len()
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.boundary[dof]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Global dofs of element `k` in local basis order.
    pub fn element_dofs(&self, k: usize) -> ([usize; 10], usize) {
        let t = self.mesh.tets()[k];
        let mut d = [0usize; 10];
        d[..4].copy_from_slice(&t);
        match self.degree {
            Degree::P1 => (d, 4),
            Degree::P2 => {
                let nv = self.mesh.num_vertices();
                for le in 0..6 {
                    d[4 + le] = nv + self.topology.tet_edges[k][le];
                }
                (d, 10)
            }
        }
    }

    /// Physical location of a dof (vertex or edge midpoint).
    pub fn dof_point(&self, dof: usize) -> Point {
        let nv = self.mesh.num_vertices();
        let v = self.mesh.vertices();
        if dof < nv {
            v[dof]
        } else {
            let [a, b] = self.topology.edges[dof - nv];
            geom::midpoint(&v[a], &v[b])
        }
    }

    /// Physical point with barycentric coordinates `lambda` in element `k`.
    pub fn map_point(&self, k: usize, lambda: &[f64; 4]) -> Point {
        let p = self.mesh.element_points(k);
        let mut x = [0.0; 3];
        for i in 0..4 {
            x = geom::add(&x, &geom::scale(&p[i], lambda[i]));
        }
        x
    }

    pub fn locator(&self) -> &PointLocator {
        self.locator.get_or_init(|| PointLocator::new(&self.mesh))
    }

    /// Element containing `x` and its barycentric coordinates there.
    pub fn locate(&self, x: &Point) -> Result<(usize, [f64; 4])> {
        self.locator().locate(x).ok_or(Error::PointOutsideMesh(*x))
    }

    /// Sparsity pattern of the dof coupling graph (CSR row pointers and
    /// sorted column indices).
    pub fn pattern(&self) -> &(Vec<usize>, Vec<usize>) {
        self.pattern.get_or_init(|| {
            let n = self.num_dofs();
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for k in 0..self.num_elements() {
                let (d, m) = self.element_dofs(k);
                for &i in &d[..m] {
                    for &j in &d[..m] {
                        pairs.push((i, j));
                    }
                }
            }
            pairs.sort_unstable();
            pairs.dedup();
            let mut row_ptr = vec![0usize; n + 1];
            for &(i, _) in &pairs {
                row_ptr[i + 1] += 1;
            }
            for i in 0..n {
                row_ptr[i + 1] += row_ptr[i];
            }
            (row_ptr, pairs.into_iter().map(|(_, j)| j).collect())
        })
    }
}

/// Basis values and physical gradients on one element at one point.
#[derive(Clone, Copy, Debug)]
pub struct LocalBasis {
    pub n: usize,
    pub values: [f64; 10],
    pub grads: [Point; 10],
}

impl LocalBasis {
    pub fn eval(degree: Degree, geometry: &ElementGeometry, lambda: &[f64; 4]) -> Self {
        let gl = &geometry.grad_lambda;
        let mut values = [0.0; 10];
        let mut grads = [[0.0; 3]; 10];
        match degree {
            Degree::P1 => {
                values[..4].copy_from_slice(lambda);
                grads[..4].copy_from_slice(gl);
                Self { n: 4, values, grads }
            }
            Degree::P2 => {
                for i in 0..4 {
                    values[i] = lambda[i] * (2.0 * lambda[i] - 1.0);
                    grads[i] = geom::scale(&gl[i], 4.0 * lambda[i] - 1.0);
                }
                for (le, [i, j]) in LOCAL_EDGES.iter().copied().enumerate() {
                    values[4 + le] = 4.0 * lambda[i] * lambda[j];
                    grads[4 + le] = geom::add(
                        &geom::scale(&gl[j], 4.0 * lambda[i]),
                        &geom::scale(&gl[i], 4.0 * lambda[j]),
                    );
                }
                Self { n: 10, values, grads }
            }
        }
    }

    /// Value and gradient of the local combination `sum c_i phi_i`.
    pub fn combine(&self, coeffs: &[f64]) -> (f64, Point) {
        let mut v = 0.0;
        let mut g = [0.0; 3];
        for i in 0..self.n {
            v += coeffs[i] * self.values[i];
            g = geom::add(&g, &geom::scale(&self.grads[i], coeffs[i]));
        }
        (v, g)
    }
}
