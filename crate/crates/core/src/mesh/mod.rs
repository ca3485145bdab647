//! Conforming tetrahedral meshes and their refinement hierarchies.

mod generate;
mod geometry;
mod hierarchy;
mod io;
mod locate;
mod smoothing;
mod topology;

pub use generate::{generate_born_mesh, generate_fitted_born_mesh, unit_cube_mesh};
pub use geometry::{mesh_geometry, ElementGeometry, MeshGeometry};
pub use hierarchy::{LevelRecord, MeshHierarchy};
pub use io::{read_pbmesh, write_pbmesh};
pub use locate::PointLocator;
pub use smoothing::{smoothing_set, SmoothingVariant};
pub use topology::{MeshTopology, LOCAL_EDGES, LOCAL_FACES, NO_NEIGHBOR};

use std::collections::HashMap;

use crate::geom;
use crate::{Error, Point, Result};

/// Subdomain label of a tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// Molecular interior, dielectric `eps_m`, no mobile ions.
    Solute,
    /// Bulk solvent, dielectric `eps_s`, ionic strength `kappa_s`.
    Solvent,
}

impl Region {
    pub fn tag(self) -> char {
        match self {
            Region::Solute => 'm',
            Region::Solvent => 's',
        }
    }
}

/// A conforming tetrahedral mesh with region labels.
///
/// Every tetrahedron is stored with strictly positive orientation:
/// `det[v1 - v0, v2 - v0, v3 - v0] > 0`.
#[derive(Clone, Debug)]
pub struct SimplicialMesh {
    vertices: Vec<Point>,
    tets: Vec<[usize; 4]>,
    regions: Vec<Region>,
    boundary_faces: Vec<[usize; 3]>,
}

impl SimplicialMesh {
    /// Builds a mesh and derives its boundary faces from face incidence.
    pub fn from_elements(
        vertices: Vec<Point>,
        tets: Vec<[usize; 4]>,
        regions: Vec<Region>,
    ) -> Result<Self> {
        let mut mesh = Self::unchecked(vertices, tets, regions)?;
        mesh.boundary_faces = mesh.faces_with_count(1)?;
        Ok(mesh)
    }

    /// Builds a mesh and checks the supplied boundary faces against face
    /// incidence counting.
    pub fn new(
        vertices: Vec<Point>,
        tets: Vec<[usize; 4]>,
        regions: Vec<Region>,
        boundary_faces: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let mut mesh = Self::unchecked(vertices, tets, regions)?;
        let derived = mesh.faces_with_count(1)?;
        let mut given: Vec<[usize; 3]> = boundary_faces.iter().map(|f| sorted3(*f)).collect();
        given.sort_unstable();
        given.dedup();
        if given.len() != boundary_faces.len() {
            return Err(Error::Mesh("duplicate boundary face".into()));
        }
        if given != derived {
            return Err(Error::Mesh(format!(
                "boundary faces do not match the mesh: {} given, {} faces with a single element",
                given.len(),
                derived.len()
            )));
        }
        mesh.boundary_faces = boundary_faces;
        Ok(mesh)
    }

    fn unchecked(
        vertices: Vec<Point>,
        mut tets: Vec<[usize; 4]>,
        regions: Vec<Region>,
    ) -> Result<Self> {
        if tets.len() != regions.len() {
            return Err(Error::Mesh(format!(
                "{} elements but {} region labels",
                tets.len(),
                regions.len()
            )));
        }
        if tets.is_empty() {
            return Err(Error::Mesh("mesh has no elements".into()));
        }
        let nv = vertices.len();
        for (k, t) in tets.iter_mut().enumerate() {
            if t.iter().any(|&v| v >= nv) {
                return Err(Error::Mesh(format!("element {k} references a missing vertex")));
            }
            let d = geom::det6(&vertices[t[0]], &vertices[t[1]], &vertices[t[2]], &vertices[t[3]]);
            if !(d.abs() > 0.0) {
                return Err(Error::DegenerateElement { element: k, volume: d / 6.0 });
            }
            if d < 0.0 {
                t.swap(2, 3);
            }
        }
        Ok(Self { vertices, tets, regions, boundary_faces: Vec::new() })
    }

    /// Sorted faces incident to exactly `count` elements. Fails if any face
    /// has more than two incident elements.
    fn faces_with_count(&self, count: usize) -> Result<Vec<[usize; 3]>> {
        let mut faces: Vec<[usize; 3]> = Vec::with_capacity(4 * self.tets.len());
        for t in &self.tets {
            for lf in LOCAL_FACES {
                faces.push(sorted3([t[lf[0]], t[lf[1]], t[lf[2]]]));
            }
        }
        faces.sort_unstable();
        let mut out = Vec::new();
        let mut i = 0;
        while i < faces.len() {
            let mut j = i + 1;
            while j < faces.len() && faces[j] == faces[i] {
                j += 1;
            }
            if j - i > 2 {
                return Err(Error::Mesh(format!("face {:?} shared by {} elements", faces[i], j - i)));
            }
            if j - i == count {
                out.push(faces[i]);
            }
            i = j;
        }
        Ok(out)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn boundary_faces(&self) -> &[[usize; 3]] {
        &self.boundary_faces
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.tets.len()
    }

    pub fn element_points(&self, k: usize) -> [Point; 4] {
        let t = self.tets[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]], self.vertices[t[3]]]
    }

    pub fn centroid(&self, k: usize) -> Point {
        let p = self.element_points(k);
        let mut c = [0.0; 3];
        for q in &p {
            c = geom::add(&c, q);
        }
        geom::scale(&c, 0.25)
    }

    /// Signed volume of element `k` (positive for a valid mesh).
    pub fn volume(&self, k: usize) -> f64 {
        let p = self.element_points(k);
        geom::det6(&p[0], &p[1], &p[2], &p[3]) / 6.0
    }

    /// Faces separating a solute element from a solvent element, as sorted
    /// vertex triples.
    pub fn interface_faces(&self) -> Vec<[usize; 3]> {
        let mut owner: HashMap<[usize; 3], Region> = HashMap::new();
        let mut out = Vec::new();
        for (t, r) in self.tets.iter().zip(&self.regions) {
            for lf in LOCAL_FACES {
                let f = sorted3([t[lf[0]], t[lf[1]], t[lf[2]]]);
                match owner.get(&f) {
                    Some(other) if other != r => out.push(f),
                    Some(_) => {}
                    None => {
                        owner.insert(f, *r);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Verifies conformity and orientation: every face is shared by at most
    /// two elements, the stored boundary faces are exactly the faces with a
    /// single element, and all signed volumes are positive.
    pub fn check_conformity(&self) -> Result<()> {
        for k in 0..self.tets.len() {
            let v = self.volume(k);
            if !(v > 0.0) {
                return Err(Error::DegenerateElement { element: k, volume: v });
            }
        }
        let derived = self.faces_with_count(1)?;
        let mut given: Vec<[usize; 3]> = self.boundary_faces.iter().map(|f| sorted3(*f)).collect();
        given.sort_unstable();
        if given != derived {
            return Err(Error::Mesh("boundary faces out of sync with face incidence".into()));
        }
        // A hanging node leaves some edge covered by an odd number of
        // single-element faces.
        let mut edge_count: HashMap<[usize; 2], usize> = HashMap::new();
        for f in &derived {
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                *edge_count.entry([f[a], f[b]]).or_default() += 1;
            }
        }
        if let Some((e, c)) = edge_count.iter().find(|(_, &c)| c % 2 != 0) {
            return Err(Error::Mesh(format!("boundary edge {e:?} used by {c} boundary faces")));
        }
        Ok(())
    }

    /// Total volume of all elements.
    pub fn total_volume(&self) -> f64 {
        (0..self.tets.len()).map(|k| self.volume(k)).sum()
    }
}

pub(crate) fn sorted3(mut f: [usize; 3]) -> [usize; 3] {
    f.sort_unstable();
    f
}

pub(crate) fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}
