use super::{Region, SimplicialMesh};
use crate::geom;
use crate::{Error, Point, Result};

/// Kuhn split of the unit cube into six tetrahedra sharing the diagonal
/// from corner 0 to corner 7. Corner index bits are (x, y, z).
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

/// Structured tetrahedral mesh of the tensor grid `coords^3`. Cells are
/// mirrored across the middle grid line so the mesh is symmetric under the
/// reflections that reverse `coords`.
fn grid_mesh(coords: &[f64]) -> (Vec<Point>, Vec<[usize; 4]>) {
    let n = coords.len() - 1;
    let id = |i: usize, j: usize, k: usize| (i * (n + 1) + j) * (n + 1) + k;
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for &x in coords {
        for &y in coords {
            for &z in coords {
                vertices.push([x, y, z]);
            }
        }
    }
    let half = n as f64 / 2.0;
    let mut tets = Vec::with_capacity(6 * n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // The Kuhn diagonal points away from the grid center.
                let flip = [(i as f64) < half, (j as f64) < half, (k as f64) < half];
                let corner = |c: usize| {
                    let mut b = [c & 4 != 0, c & 2 != 0, c & 1 != 0];
                    for d in 0..3 {
                        b[d] ^= flip[d];
                    }
                    id(i + b[0] as usize, j + b[1] as usize, k + b[2] as usize)
                };
                for t in KUHN {
                    tets.push([corner(t[0]), corner(t[1]), corner(t[2]), corner(t[3])]);
                }
            }
        }
    }
    (vertices, tets)
}

fn box_mesh(lo: f64, hi: f64, n: usize) -> (Vec<Point>, Vec<[usize; 4]>) {
    let h = (hi - lo) / n as f64;
    let coords: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
    grid_mesh(&coords)
}

fn check_born_args(half_width: f64, radius: f64) -> Result<()> {
    if !(radius > 0.0) || !(radius < half_width) {
        return Err(Error::Parameter(format!(
            "sphere radius {radius} must satisfy 0 < a < L = {half_width}"
        )));
    }
    Ok(())
}

/// The cube `[-L, L]^3` split into `n^3` subcubes of six tetrahedra each,
/// with elements whose centroid lies within `a` of the origin labelled
/// solute and the rest solvent.
pub fn generate_born_mesh(half_width: f64, radius: f64, n: usize) -> Result<SimplicialMesh> {
    check_born_args(half_width, radius)?;
    if n < 2 {
        return Err(Error::Parameter(format!("need n >= 2 subdivisions, got {n}")));
    }
    let (vertices, tets) = box_mesh(-half_width, half_width, n);
    let r2 = radius * radius;
    let regions = tets
        .iter()
        .map(|t| {
            let mut c = [0.0; 3];
            for &v in t {
                c = geom::add(&c, &vertices[v]);
            }
            let c = geom::scale(&c, 0.25);
            if geom::dot(&c, &c) <= r2 {
                Region::Solute
            } else {
                Region::Solvent
            }
        })
        .collect();
    SimplicialMesh::from_elements(vertices, tets, regions)
}

/// Body-fitted mesh of the cube `[-L, L]^3` whose solute region is a
/// polyhedron inscribed in the sphere of radius `a`.
///
/// A tensor grid with `n` cells per axis (`n` even) is refined inside an
/// inner cube of half-width `c = 0.8 a`. Each point is moved along its ray
/// from the origin: the inner cube is mapped onto the ball, its surface
/// onto the sphere, and the shell between the inner cube and the outer
/// boundary is stretched linearly so that the outer boundary stays fixed.
/// Elements inside the inner cube are solute.
pub fn generate_fitted_born_mesh(half_width: f64, radius: f64, n: usize) -> Result<SimplicialMesh> {
    check_born_args(half_width, radius)?;
    if n < 4 || n % 2 != 0 {
        return Err(Error::Parameter(format!("need an even n >= 4 subdivisions, got {n}")));
    }
    let (l, a) = (half_width, radius);
    let c = 0.8 * a;
    if c >= l {
        return Err(Error::Parameter("sphere too large for the domain".into()));
    }
    // Split each half axis so the mapped inner and outer spacings are
    // comparable, with at least one cell on each side.
    let half = n / 2;
    let inner = ((half as f64 * 2.0 * a / (2.0 * a + l - a)).round() as usize).clamp(1, half - 1);
    let outer = half - inner;
    let mut pos: Vec<f64> = (0..=inner).map(|i| c * i as f64 / inner as f64).collect();
    pos.extend((1..=outer).map(|i| c + (l - c) * i as f64 / outer as f64));
    let mut coords: Vec<f64> = pos.iter().rev().map(|x| -x).collect();
    coords.extend(&pos[1..]);
    let (grid, tets) = grid_mesh(&coords);

    let regions = tets
        .iter()
        .map(|t| {
            let mut m = [0.0f64; 3];
            for &v in t {
                m = geom::add(&m, &grid[v]);
            }
            let inf = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) / 4.0;
            if inf < c {
                Region::Solute
            } else {
                Region::Solvent
            }
        })
        .collect();
    let vertices = grid
        .iter()
        .map(|x| {
            let t = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if t == 0.0 {
                return *x;
            }
            let d = geom::scale(x, 1.0 / t);
            let alpha = a / geom::norm(&d);
            let r = if t <= c {
                let s = t / c;
                s * a + s * s * (alpha - a)
            } else {
                alpha + (t - c) * (l - alpha) / (l - c)
            };
            // Keep boundary coordinates exact.
            if t == l { *x } else { geom::scale(&d, r) }
        })
        .collect();
    SimplicialMesh::from_elements(vertices, tets, regions)
}

/// The unit cube `[0, 1]^3` as `6 n^3` solvent tetrahedra.
pub fn unit_cube_mesh(n: usize) -> SimplicialMesh {
    let (vertices, tets) = box_mesh(0.0, 1.0, n.max(1));
    let regions = vec![Region::Solvent; tets.len()];
    SimplicialMesh::from_elements(vertices, tets, regions).expect("structured mesh is valid")
}
