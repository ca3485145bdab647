use super::{SimplicialMesh, LOCAL_EDGES, LOCAL_FACES};
use crate::geom;
use crate::{Error, Point, Result};

/// Per-element geometric quantities.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    pub volume: f64,
    /// Longest edge length `h_K`.
    pub diameter: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [Point; 4],
    /// Area of the face opposite each local vertex.
    pub face_area: [f64; 4],
    /// Longest edge of the face opposite each local vertex.
    pub face_diameter: [f64; 4],
    /// Outward unit normal of the face opposite each local vertex.
    pub face_normal: [Point; 4],
}

impl ElementGeometry {
    pub fn new(p: &[Point; 4]) -> Option<Self> {
        let d6 = geom::det6(&p[0], &p[1], &p[2], &p[3]);
        if !(d6 > 0.0) {
            return None;
        }
        let volume = d6 / 6.0;
        // grad lambda_k is the inward face normal scaled by area / (3 V).
        let mut grad_lambda = [[0.0; 3]; 4];
        let mut face_area = [0.0; 4];
        let mut face_normal = [[0.0; 3]; 4];
        let mut face_diameter = [0.0; 4];
        for k in 0..4 {
            let [a, b, c] = LOCAL_FACES[k];
            let n = geom::cross(&geom::sub(&p[b], &p[a]), &geom::sub(&p[c], &p[a]));
            let twice_area = geom::norm(&n);
            let mut unit = geom::scale(&n, 1.0 / twice_area);
            // orient away from vertex k
            if geom::dot(&unit, &geom::sub(&p[k], &p[a])) > 0.0 {
                unit = geom::scale(&unit, -1.0);
            }
            face_area[k] = 0.5 * twice_area;
            face_normal[k] = unit;
            grad_lambda[k] = geom::scale(&unit, -face_area[k] / (3.0 * volume));
            face_diameter[k] = [(a, b), (a, c), (b, c)]
                .iter()
                .map(|&(i, j)| geom::dist2(&p[i], &p[j]))
                .fold(0.0, f64::max)
                .sqrt();
        }
        let diameter = LOCAL_EDGES
            .iter()
            .map(|e| geom::dist2(&p[e[0]], &p[e[1]]))
            .fold(0.0, f64::max)
            .sqrt();
        Some(Self { volume, diameter, grad_lambda, face_area, face_diameter, face_normal })
    }

    /// Barycentric coordinates of `x` relative to vertex 0 at `p0`.
    pub fn barycentric(&self, p0: &Point, x: &Point) -> [f64; 4] {
        let d = geom::sub(x, p0);
        let l1 = geom::dot(&self.grad_lambda[1], &d);
        let l2 = geom::dot(&self.grad_lambda[2], &d);
        let l3 = geom::dot(&self.grad_lambda[3], &d);
        [1.0 - l1 - l2 - l3, l1, l2, l3]
    }
}

/// Geometry of every element plus the interface faces of a mesh.
#[derive(Clone, Debug)]
pub struct MeshGeometry {
    pub elements: Vec<ElementGeometry>,
    pub interface_faces: Vec<[usize; 3]>,
}

/// Computes element diameters, volumes, face areas and outward normals.
pub fn mesh_geometry(mesh: &SimplicialMesh) -> Result<MeshGeometry> {
    let elements = (0..mesh.num_elements())
        .map(|k| {
            ElementGeometry::new(&mesh.element_points(k))
                .ok_or(Error::DegenerateElement { element: k, volume: mesh.volume(k) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MeshGeometry { elements, interface_faces: mesh.interface_faces() })
}
