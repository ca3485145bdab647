use super::{ElementGeometry, SimplicialMesh};
use crate::Point;

/// Uniform-grid bucket index for point location.
#[derive(Clone, Debug)]
pub struct PointLocator {
    lo: Point,
    cell: Point,
    dims: [usize; 3],
    offsets: Vec<usize>,
    items: Vec<usize>,
    geometry: Vec<ElementGeometry>,
    origin: Vec<Point>,
}

const BARY_TOL: f64 = 1e-10;

impl PointLocator {
    pub fn new(mesh: &SimplicialMesh) -> Self {
        let verts = mesh.vertices();
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in verts {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let nt = mesh.num_elements();
        let per_axis = ((nt as f64 / 2.0).cbrt().ceil() as usize).max(1);
        let mut dims = [per_axis; 3];
        let mut cell = [0.0; 3];
        for d in 0..3 {
            let ext = (hi[d] - lo[d]).max(1e-300);
            if hi[d] - lo[d] <= 0.0 {
                dims[d] = 1;
            }
            cell[d] = ext / dims[d] as f64;
        }
        let ncell = dims[0] * dims[1] * dims[2];
        let mut ranges = Vec::with_capacity(nt);
        let mut counts = vec![0usize; ncell + 1];
        for k in 0..nt {
            let p = mesh.element_points(k);
            let mut blo = [usize::MAX; 3];
            let mut bhi = [0usize; 3];
            for q in &p {
                for d in 0..3 {
                    let c = Self::coord(lo[d], cell[d], dims[d], q[d]);
                    blo[d] = blo[d].min(c);
                    bhi[d] = bhi[d].max(c);
                }
            }
            for i in blo[0]..=bhi[0] {
                for j in blo[1]..=bhi[1] {
                    for l in blo[2]..=bhi[2] {
                        counts[(i * dims[1] + j) * dims[2] + l + 1] += 1;
                    }
                }
            }
            ranges.push((blo, bhi));
        }
        for c in 0..ncell {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut items = vec![0usize; counts[ncell]];
        for (k, (blo, bhi)) in ranges.iter().enumerate() {
            for i in blo[0]..=bhi[0] {
                for j in blo[1]..=bhi[1] {
                    for l in blo[2]..=bhi[2] {
                        let c = (i * dims[1] + j) * dims[2] + l;
                        items[fill[c]] = k;
                        fill[c] += 1;
                    }
                }
            }
        }
        let geometry = (0..nt)
            .map(|k| ElementGeometry::new(&mesh.element_points(k)).expect("valid mesh"))
            .collect();
        let origin = mesh.tets().iter().map(|t| verts[t[0]]).collect();
        Self { lo, cell, dims, offsets: counts, items, geometry, origin }
    }

    fn coord(lo: f64, cell: f64, dim: usize, x: f64) -> usize {
        let c = ((x - lo) / cell).floor();
        if c < 0.0 {
            0
        } else {
            (c as usize).min(dim - 1)
        }
    }

    /// Element containing `x` and the barycentric coordinates of `x` in it.
    /// Points on shared faces resolve to the lowest element id.
    pub fn locate(&self, x: &Point) -> Option<(usize, [f64; 4])> {
        for d in 0..3 {
            let span = self.cell[d] * self.dims[d] as f64;
            let slack = 1e-9 * span.max(1.0);
            if x[d] < self.lo[d] - slack || x[d] > self.lo[d] + span + slack {
                return None;
            }
        }
        let i = Self::coord(self.lo[0], self.cell[0], self.dims[0], x[0]);
        let j = Self::coord(self.lo[1], self.cell[1], self.dims[1], x[1]);
        let l = Self::coord(self.lo[2], self.cell[2], self.dims[2], x[2]);
        let c = (i * self.dims[1] + j) * self.dims[2] + l;
        self.items[self.offsets[c]..self.offsets[c + 1]].iter().find_map(|&k| {
            let b = self.geometry[k].barycentric(&self.origin[k], x);
            b.iter().all(|&l| l >= -BARY_TOL).then_some((k, b))
        })
    }

    pub fn geometry(&self, k: usize) -> &ElementGeometry {
        &self.geometry[k]
    }
}
