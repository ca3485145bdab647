use std::collections::VecDeque;
use std::f64::consts::PI;

use crate::fespace::quadrature::tet_rule;
use crate::fespace::{FeSpace, FieldVector, LocalBasis};
use crate::mesh::{SimplicialMesh, LOCAL_EDGES, LOCAL_FACES};
use crate::problem::MolecularSystem;
use crate::{geom, Error, Point, Result};

/// Subdivision depth of elements cut by a mollifier sphere is chosen so the
/// cut sub-elements are about `sigma / SUBCELLS_PER_RADIUS` across.
const SUBCELLS_PER_RADIUS: f64 = 8.0;
const MAX_DEPTH: u32 = 7;

/// The solvation energy functional with a step-function mollifier of
/// radius `sigma[i]` around atom `i`.
#[derive(Clone, Debug)]
pub struct GoalFunctional {
    system: MolecularSystem,
    sigma: Vec<f64>,
}

impl GoalFunctional {
    pub fn new(system: MolecularSystem, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != system.len() {
            return Err(Error::Dimension(format!("{} radii for {} atoms", sigma.len(), system.len())));
        }
        if let Some(i) = sigma.iter().position(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Parameter(format!("mollification radius {} for atom {i} must be positive", sigma[i])));
        }
        Ok(Self { system, sigma })
    }

    /// One radius for every atom.
    pub fn uniform(system: MolecularSystem, sigma: f64) -> Result<Self> {
        let n = system.len();
        Self::new(system, vec![sigma; n])
    }

    /// Half the distance from each atom to the nearest interface vertex of
    /// `mesh`, capped at the atom radius.
    pub fn with_default_radius(system: MolecularSystem, mesh: &SimplicialMesh) -> Result<Self> {
        let mut verts: Vec<usize> = mesh.interface_faces().into_iter().flatten().collect();
        verts.sort_unstable();
        verts.dedup();
        let sigma = system
            .atoms()
            .iter()
            .map(|a| {
                let d = verts
                    .iter()
                    .map(|&v| geom::dist2(&a.position, &mesh.vertices()[v]))
                    .fold(f64::INFINITY, f64::min)
                    .sqrt();
                (0.5 * d).min(a.radius)
            })
            .collect();
        Self::new(system, sigma)
    }

    pub fn system(&self) -> &MolecularSystem {
        &self.system
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Checks that every mollifier ball stays clear of the interface faces
    /// of `mesh`.
    pub fn check_interface(&self, mesh: &SimplicialMesh) -> Result<()> {
        let faces = mesh.interface_faces();
        let v = mesh.vertices();
        for (i, (a, &s)) in self.system.atoms().iter().zip(&self.sigma).enumerate() {
            let d = faces
                .iter()
                .map(|f| geom::point_triangle_distance(&a.position, &v[f[0]], &v[f[1]], &v[f[2]]))
                .fold(f64::INFINITY, f64::min);
            if s >= d {
                return Err(Error::MollifierTooWide { atom: i, sigma: s, distance: d });
            }
        }
        Ok(())
    }
}

/// `S(u) = (1/2) sum_i q_i u(x_i)`.
pub fn solvation_energy(u: &FieldVector, system: &MolecularSystem) -> Result<f64> {
    let mut s = 0.0;
    for (i, a) in system.atoms().iter().enumerate() {
        let v = u
            .evaluate(&a.position)
            .map_err(|_| Error::AtomOutsideMesh { atom: i, position: a.position })?;
        s += 0.5 * a.charge * v;
    }
    Ok(s)
}

/// Quadrature for the mollified goal: points given by element and
/// barycentric coordinates, with weights that already include
/// `q_i / (2 |B_sigma|)`. Points are grouped by ascending element id.
#[derive(Clone, Debug, Default)]
pub struct BallQuadrature {
    pub points: Vec<(usize, [f64; 4], f64)>,
}

impl BallQuadrature {
    pub fn new(space: &FeSpace, goal: &GoalFunctional) -> Result<Self> {
        goal.check_interface(space.mesh())?;
        let mut points = Vec::new();
        for (i, (atom, &sigma)) in goal.system.atoms().iter().zip(&goal.sigma).enumerate() {
            let scale = 0.5 * atom.charge / (4.0 / 3.0 * PI * sigma.powi(3));
            let ball = Ball { center: atom.position, radius: sigma };
            let start = space
                .locate(&atom.position)
                .map_err(|_| Error::AtomOutsideMesh { atom: i, position: atom.position })?
                .0;
            let topo = space.topology();
            let mesh = space.mesh();
            let mut seen = vec![false; space.num_elements()];
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(k) = queue.pop_front() {
                let p = mesh.element_points(k);
                if ball.excludes(&p) {
                    continue;
                }
                for lf in 0..4 {
                    match topo.neighbor(k, lf) {
                        Some(n) if !seen[n] => {
                            seen[n] = true;
                            queue.push_back(n);
                        }
                        Some(_) => {}
                        None => {
                            let [a, b, c] = LOCAL_FACES[lf].map(|l| p[l]);
                            if geom::point_triangle_distance(&ball.center, &a, &b, &c) < sigma {
                                return Err(Error::BallOutsideMesh { atom: i, sigma });
                            }
                        }
                    }
                }
                let g = space.geometry(k);
                let depth = ((g.diameter * SUBCELLS_PER_RADIUS / sigma).log2().ceil().max(0.0) as u32).min(MAX_DEPTH);
                let corners = [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
                ball.integrate(space, k, corners, g.volume, depth, scale, &mut points);
            }
        }
        points.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(Self { points })
    }

    /// Points of element `k`.
    pub fn element(&self, k: usize) -> &[(usize, [f64; 4], f64)] {
        let lo = self.points.partition_point(|p| p.0 < k);
        let hi = self.points.partition_point(|p| p.0 <= k);
        &self.points[lo..hi]
    }
}

struct Ball {
    center: Point,
    radius: f64,
}

impl Ball {
    /// Conservative test that the simplex with vertices `p` misses the ball.
    fn excludes(&self, p: &[Point; 4]) -> bool {
        let c = geom::scale(&geom::add(&geom::add(&p[0], &p[1]), &geom::add(&p[2], &p[3])), 0.25);
        let r = p.iter().map(|x| geom::dist2(x, &c)).fold(0.0, f64::max).sqrt();
        geom::dist2(&c, &self.center).sqrt() > self.radius + r
    }

    fn contains(&self, x: &Point) -> bool {
        geom::dist2(x, &self.center) <= self.radius * self.radius
    }

    /// Adds quadrature points for the part of the sub-simplex `sub` (given
    /// by barycentric corners in element `k`) inside the ball.
    #[allow(clippy::too_many_arguments)]
    fn integrate(
        &self,
        space: &FeSpace,
        k: usize,
        sub: [[f64; 4]; 4],
        volume: f64,
        depth: u32,
        scale: f64,
        out: &mut Vec<(usize, [f64; 4], f64)>,
    ) {
        let p = sub.map(|l| space.map_point(k, &l));
        if self.excludes(&p) {
            return;
        }
        let inside = p.iter().all(|x| self.contains(x));
        if !inside && depth > 0 {
            for child in red_children(&sub) {
                self.integrate(space, k, child, volume / 8.0, depth - 1, scale, out);
            }
            return;
        }
        let rule = tet_rule();
        for (mu, w) in rule.points.iter().zip(&rule.weights) {
            let mut lambda = [0.0; 4];
            for (j, s) in sub.iter().enumerate() {
                for d in 0..4 {
                    lambda[d] += mu[j] * s[d];
                }
            }
            if inside || self.contains(&space.map_point(k, &lambda)) {
                out.push((k, lambda, w * volume * scale));
            }
        }
    }
}

/// The eight children of regular refinement, cutting the inner octahedron
/// along the diagonal between the midpoints of edges 02 and 13.
fn red_children(v: &[[f64; 4]; 4]) -> [[[f64; 4]; 4]; 8] {
    let mut m = [[0.0; 4]; 6];
    for (e, [a, b]) in LOCAL_EDGES.iter().copied().enumerate() {
        for d in 0..4 {
            m[e][d] = 0.5 * (v[a][d] + v[b][d]);
        }
    }
    let [m01, m02, m03, m12, m13, m23] = m;
    [
        [v[0], m01, m02, m03],
        [m01, v[1], m12, m13],
        [m02, m12, v[2], m23],
        [m03, m13, m23, v[3]],
        [m01, m02, m03, m13],
        [m01, m02, m12, m13],
        [m02, m03, m13, m23],
        [m02, m12, m13, m23],
    ]
}

/// `s_i = S_sigma(phi_i)` for every basis function of `space`.
pub fn mollified_goal_vector(space: &FeSpace, goal: &GoalFunctional) -> Result<Vec<f64>> {
    let quad = BallQuadrature::new(space, goal)?;
    Ok(goal_vector_from(space, &quad))
}

pub(crate) fn goal_vector_from(space: &FeSpace, quad: &BallQuadrature) -> Vec<f64> {
    let mut s = vec![0.0; space.num_dofs()];
    for &(k, lambda, w) in &quad.points {
        let basis = LocalBasis::eval(space.degree(), space.geometry(k), &lambda);
        let (dofs, n) = space.element_dofs(k);
        for i in 0..n {
            s[dofs[i]] += w * basis.values[i];
        }
    }
    s
}
