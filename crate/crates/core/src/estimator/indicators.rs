use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Matrix6, Vector6};

use super::goal::{BallQuadrature, GoalFunctional};
use crate::fespace::quadrature::{tet_rule, tri_rule};
use crate::fespace::{Degree, FeSpace, FieldVector};
use crate::mesh::{LOCAL_EDGES, LOCAL_FACES};
use crate::problem::{coulomb, MolecularSystem, Nonlinearity, PbeParameters};
use crate::{geom, Error, Point, Result};

const MAX_EXP_ARG: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IndicatorKind {
    Energy,
    GoalLinear,
    GoalQuadratic,
}

impl IndicatorKind {
    pub const ALL: [IndicatorKind; 3] = [IndicatorKind::Energy, IndicatorKind::GoalLinear, IndicatorKind::GoalQuadratic];

    pub fn name(self) -> &'static str {
        match self {
            IndicatorKind::Energy => "energy",
            IndicatorKind::GoalLinear => "goal_linear",
            IndicatorKind::GoalQuadratic => "goal_quadratic",
        }
    }

    pub fn is_goal(self) -> bool {
        self != IndicatorKind::Energy
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndicatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::Parameter(format!("unknown indicator '{s}'")))
    }
}

/// Per-element error indicators.
#[derive(Clone, Debug)]
pub struct IndicatorField {
    pub kind: IndicatorKind,
    /// `eta_K`; nonnegative except for the goal-linear kind.
    pub values: Vec<f64>,
    /// Signed element contributions to the goal error (goal kinds only).
    pub signed: Option<Vec<f64>>,
}

impl IndicatorField {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `|eta_K|`, the quantity used for marking.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.abs()).collect()
    }

    /// Sum of the signed contributions, or zero for the energy kind.
    pub fn signed_sum(&self) -> f64 {
        self.signed.as_ref().map_or(0.0, |s| s.iter().sum())
    }

    /// `(sum eta_K^2)^(1/2)` for the energy kind, `|sum signed_K|` otherwise.
    pub fn global_estimate(&self) -> f64 {
        match self.kind {
            IndicatorKind::Energy => self.values.iter().map(|v| v * v).sum::<f64>().sqrt(),
            _ => self.signed_sum().abs(),
        }
    }
}

/// Element data shared by the indicators.
struct Setup<'a> {
    space: &'a FeSpace,
    system: &'a MolecularSystem,
    params: &'a PbeParameters,
    eps: Vec<f64>,
    kappa2: Vec<f64>,
    mode: Nonlinearity,
}

impl<'a> Setup<'a> {
    fn new(space: &'a FeSpace, system: &'a MolecularSystem, params: &'a PbeParameters, mode: Nonlinearity) -> Result<Self> {
        params.validate()?;
        let c = params.coefficients();
        let regions = space.mesh().regions();
        Ok(Self {
            space,
            system,
            params,
            eps: regions.iter().map(|&r| c.eps(r)).collect(),
            kappa2: regions.iter().map(|&r| c.kappa2(r)).collect(),
            mode,
        })
    }

    fn f(&self, t: f64) -> Result<f64> {
        match self.mode {
            Nonlinearity::Linear => Ok(t),
            Nonlinearity::Sinh if t.abs() <= MAX_EXP_ARG => Ok(t.sinh()),
            Nonlinearity::Sinh => Err(Error::Overflow { value: t }),
        }
    }

    /// `(eps_k - eps_m) grad u_c + eps_k grad_u` at `x`.
    fn flux(&self, k: usize, x: &Point, grad_u: &Point) -> Result<Point> {
        let de = self.eps[k] - self.params.eps_m;
        let mut g = geom::scale(grad_u, self.eps[k]);
        if de != 0.0 {
            let (_, gc) = coulomb(self.system, self.params, x)?;
            g = geom::add(&g, &geom::scale(&gc, de));
        }
        Ok(g)
    }

    /// `kappa2 f(u_c + u)` at `x`.
    fn ionic(&self, k: usize, x: &Point, u: f64) -> Result<f64> {
        if self.kappa2[k] == 0.0 {
            return Ok(0.0);
        }
        let (uc, _) = coulomb(self.system, self.params, x)?;
        Ok(self.kappa2[k] * self.f(uc + u)?)
    }

    /// Calls `visit(q_weight, lambda, x)` for the [`tri_rule`] points of
    /// local face `lf` of element `k`.
    fn face_points(&self, k: usize, lf: usize, mut visit: impl FnMut(f64, &[f64; 4], &Point) -> Result<()>) -> Result<()> {
        let area = self.space.geometry(k).face_area[lf];
        let rule = tri_rule();
        for (mu, w) in rule.points.iter().zip(&rule.weights) {
            let mut lambda = [0.0; 4];
            for (j, &l) in LOCAL_FACES[lf].iter().enumerate() {
                lambda[l] = mu[j];
            }
            let x = self.space.map_point(k, &lambda);
            visit(w * area, &lambda, &x)?;
        }
        Ok(())
    }

    /// Weak residual `L(v) - a(u, v) - (kappa2 f(u + u_c), v)` restricted
    /// to element `k`, for the test function `test(lambda) = (v, grad v)`;
    /// returns the integral and the integral of its absolute integrand.
    fn element_residual(
        &self,
        k: usize,
        u: &FieldVector,
        test: impl Fn(&[f64; 4]) -> (f64, Point),
    ) -> Result<(f64, f64)> {
        let g = self.space.geometry(k);
        let rule = tet_rule();
        let (mut signed, mut abs) = (0.0, 0.0);
        for (lambda, w) in rule.points.iter().zip(&rule.weights) {
            let (v, gv) = test(lambda);
            if v == 0.0 && gv == [0.0; 3] {
                continue;
            }
            let x = self.space.map_point(k, lambda);
            let (uh, gu) = u.eval_local(k, lambda);
            let integrand = -geom::dot(&self.flux(k, &x, &gu)?, &gv) - self.ionic(k, &x, uh)? * v;
            signed += w * g.volume * integrand;
            abs += w * g.volume * integrand.abs();
        }
        Ok((signed, abs))
    }
}

/// Value and gradient of the edge bubble `4 lambda_i lambda_j` of local
/// edge `le`.
fn bubble(g: &crate::mesh::ElementGeometry, lambda: &[f64; 4], le: usize) -> (f64, Point) {
    let [i, j] = LOCAL_EDGES[le];
    let gl = &g.grad_lambda;
    (
        4.0 * lambda[i] * lambda[j],
        geom::add(&geom::scale(&gl[j], 4.0 * lambda[i]), &geom::scale(&gl[i], 4.0 * lambda[j])),
    )
}

fn require_p1(u: &FieldVector, what: &str) -> Result<()> {
    if u.space().degree() != Degree::P1 {
        return Err(Error::Dimension(format!("{what} must be a P1 field")));
    }
    Ok(())
}

fn same_mesh(a: &FeSpace, b: &FeSpace) -> Result<()> {
    let (ma, mb) = (a.mesh_arc(), b.mesh_arc());
    if Arc::ptr_eq(ma, mb) || (ma.tets() == mb.tets() && ma.vertices() == mb.vertices()) {
        Ok(())
    } else {
        Err(Error::Dimension("fields live on different meshes".into()))
    }
}

/// Energy-norm residual indicator
/// `eta_K^2 = h_K^2 |r_K|^2 + (1/4) sum_F h_F |r_F|^2` with the interior
/// residual `-kappa2 f(u_c + u)` and the normal flux jump
/// `n . [(eps - eps_m) grad u_c + eps grad u]` on interior faces.
pub fn indicator_energy(
    u: &FieldVector,
    system: &MolecularSystem,
    params: &PbeParameters,
    mode: Nonlinearity,
) -> Result<IndicatorField> {
    require_p1(u, "primal solution")?;
    let space = u.space().as_ref();
    let s = Setup::new(space, system, params, mode)?;
    let nt = space.num_elements();
    let mut eta2 = vec![0.0; nt];
    let rule = tet_rule();
    for k in (0..nt).filter(|&k| s.kappa2[k] != 0.0) {
        let g = space.geometry(k);
        let mut r2 = 0.0;
        for (lambda, w) in rule.points.iter().zip(&rule.weights) {
            let x = space.map_point(k, lambda);
            let r = s.ionic(k, &x, u.eval_local(k, lambda).0)?;
            r2 += w * g.volume * r * r;
        }
        eta2[k] += g.diameter * g.diameter * r2;
    }
    let topo = space.topology();
    for (f, &[k, n]) in topo.face_tets.iter().enumerate() {
        if topo.is_boundary_face(f) {
            continue;
        }
        let lf = topo.tet_faces[k].iter().position(|&x| x == f).unwrap();
        let normal = space.geometry(k).face_normal[lf];
        let gk = geom::scale(&u.eval_local(k, &[0.25; 4]).1, s.eps[k]);
        let gn = geom::scale(&u.eval_local(n, &[0.25; 4]).1, s.eps[n]);
        let base = geom::dot(&normal, &geom::sub(&gk, &gn));
        let de = s.eps[k] - s.eps[n];
        let mut j2 = 0.0;
        s.face_points(k, lf, |wa, _, x| {
            let mut jump = base;
            if de != 0.0 {
                jump += de * geom::dot(&normal, &coulomb(system, params, x)?.1);
            }
            j2 += wa * jump * jump;
            Ok(())
        })?;
        let c = 0.25 * space.geometry(k).face_diameter[lf] * j2;
        eta2[k] += c;
        eta2[n] += c;
    }
    Ok(IndicatorField { kind: IndicatorKind::Energy, values: eta2.into_iter().map(f64::sqrt).collect(), signed: None })
}

/// Goal-oriented indicator from a P2 dual `w2`: the weak residual of `u`
/// tested with `w2 - P w2` (P the vertex injection into P1), element by
/// element.
pub fn indicator_goal_quadratic(
    u: &FieldVector,
    w2: &FieldVector,
    system: &MolecularSystem,
    params: &PbeParameters,
    mode: Nonlinearity,
) -> Result<IndicatorField> {
    require_p1(u, "primal solution")?;
    if w2.space().degree() != Degree::P2 {
        return Err(Error::Dimension("dual solution must be a P2 field".into()));
    }
    same_mesh(u.space(), w2.space())?;
    let space = u.space().as_ref();
    let s = Setup::new(space, system, params, mode)?;
    let nt = space.num_elements();
    let mut values = vec![0.0; nt];
    let mut signed = vec![0.0; nt];
    for k in 0..nt {
        let c = w2.element_coeffs(k);
        let mut corr = [0.0; 6];
        for (le, [i, j]) in LOCAL_EDGES.iter().copied().enumerate() {
            corr[le] = c[4 + le] - 0.5 * (c[i] + c[j]);
        }
        if corr.iter().all(|&v| v == 0.0) {
            continue;
        }
        let g = space.geometry(k);
        let (sg, ab) = s.element_residual(k, u, |lambda| {
            let mut v = 0.0;
            let mut gv = [0.0; 3];
            for (le, &cl) in corr.iter().enumerate() {
                let (b, gb) = bubble(g, lambda, le);
                v += cl * b;
                gv = geom::add(&gv, &geom::scale(&gb, cl));
            }
            (v, gv)
        })?;
        signed[k] = sg;
        values[k] = ab;
    }
    Ok(IndicatorField { kind: IndicatorKind::GoalQuadratic, values, signed: Some(signed) })
}

/// The weak residual of `u` applied to `w` (a field on the same mesh,
/// vanishing on the boundary), summed over elements in ascending order.
pub fn residual_functional(
    u: &FieldVector,
    w: &FieldVector,
    system: &MolecularSystem,
    params: &PbeParameters,
    mode: Nonlinearity,
) -> Result<f64> {
    require_p1(u, "primal solution")?;
    same_mesh(u.space(), w.space())?;
    let s = Setup::new(u.space(), system, params, mode)?;
    let mut total = 0.0;
    for k in 0..u.space().num_elements() {
        total += s.element_residual(k, u, |lambda| w.eval_local(k, lambda))?.0;
    }
    Ok(total)
}

/// Local matrix of `(eps grad v, grad w) + (kappa2 v, w)` on the six edge
/// bubbles of element `k`.
pub fn bubble_matrix(space: &FeSpace, k: usize, eps: f64, kappa2: f64) -> [[f64; 6]; 6] {
    let g = space.geometry(k);
    let rule = tet_rule();
    let mut m = [[0.0; 6]; 6];
    for (lambda, w) in rule.points.iter().zip(&rule.weights) {
        let b: [(f64, Point); 6] = std::array::from_fn(|le| bubble(g, lambda, le));
        for i in 0..6 {
            for j in 0..6 {
                m[i][j] += w * g.volume * (eps * geom::dot(&b[i].1, &b[j].1) + kappa2 * (b[i].0 * b[j].0));
            }
        }
    }
    m
}

/// `x^T B y`.
pub fn energy_product(b: &[[f64; 6]; 6], x: &[f64; 6], y: &[f64; 6]) -> f64 {
    (0..6).map(|i| x[i] * (0..6).map(|j| b[i][j] * y[j]).sum::<f64>()).sum()
}

/// `(1/4) |x + y|_B^2 - (1/4) |x - y|_B^2`.
pub fn parallelogram_product(b: &[[f64; 6]; 6], x: &[f64; 6], y: &[f64; 6]) -> f64 {
    let p: [f64; 6] = std::array::from_fn(|i| x[i] + y[i]);
    let m: [f64; 6] = std::array::from_fn(|i| x[i] - y[i]);
    0.25 * energy_product(b, &p, &p) - 0.25 * energy_product(b, &m, &m)
}

/// Goal-oriented indicator from a P1 dual `w1` by the element residual
/// method: with the local error estimates `phi_K`, `psi_K` of
/// [`erm_local_errors`],
/// `eta_K = (1/4)|phi + psi|^2 - (1/4)|phi - psi|^2` in the element energy
/// norm.
pub fn indicator_goal_linear(
    u: &FieldVector,
    w1: &FieldVector,
    goal: &GoalFunctional,
    params: &PbeParameters,
    mode: Nonlinearity,
    flux: FluxAverage,
) -> Result<IndicatorField> {
    let locals = erm_local_errors(u, w1, goal, params, mode, flux)?;
    let values: Vec<f64> = locals.iter().map(|l| parallelogram_product(&l.matrix, &l.primal, &l.dual)).collect();
    let signed = values.clone();
    Ok(IndicatorField { kind: IndicatorKind::GoalLinear, values, signed: Some(signed) })
}

/// How the flux data of the local problems combines the traces of the two
/// elements sharing an interior face.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum FluxAverage {
    /// `(F_K + F_K') / 2`.
    Arithmetic,
    /// `(eps_K' F_K + eps_K F_K') / (eps_K + eps_K')`, favouring the side
    /// with the smaller dielectric.
    #[default]
    DielectricWeighted,
}

impl FluxAverage {
    /// Weights of the traces from `K` and from its neighbour.
    pub fn weights(self, eps_k: f64, eps_n: f64) -> (f64, f64) {
        match self {
            FluxAverage::Arithmetic => (0.5, 0.5),
            FluxAverage::DielectricWeighted => {
                let t = eps_k + eps_n;
                (eps_n / t, eps_k / t)
            }
        }
    }
}

impl FromStr for FluxAverage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "arithmetic" => Ok(FluxAverage::Arithmetic),
            "dielectric_weighted" | "weighted" => Ok(FluxAverage::DielectricWeighted),
            _ => Err(Error::Parameter(format!("unknown flux average '{s}'"))),
        }
    }
}

/// Local error estimates of one element in the edge-bubble basis.
#[derive(Clone, Debug)]
pub struct LocalErrors {
    /// Bubble-space operator `(eps grad, grad) + (kappa2, )` on the element.
    pub matrix: [[f64; 6]; 6],
    pub primal: [f64; 6],
    pub dual: [f64; 6],
}

/// Element residual method: per element, the primal and dual local error
/// estimates solving bubble-space Neumann problems with averaged flux data.
/// Boundary faces carry the element's own flux.
pub fn erm_local_errors(
    u: &FieldVector,
    w1: &FieldVector,
    goal: &GoalFunctional,
    params: &PbeParameters,
    mode: Nonlinearity,
    flux: FluxAverage,
) -> Result<Vec<LocalErrors>> {
    require_p1(u, "primal solution")?;
    require_p1(w1, "dual solution")?;
    same_mesh(u.space(), w1.space())?;
    let space = u.space().as_ref();
    let system = goal.system();
    let s = Setup::new(space, system, params, mode)?;
    let quad = BallQuadrature::new(space, goal)?;
    let topo = space.topology();
    let nt = space.num_elements();
    let grad_u: Vec<Point> = (0..nt).map(|k| u.eval_local(k, &[0.25; 4]).1).collect();
    let grad_w: Vec<Point> = (0..nt).map(|k| w1.eval_local(k, &[0.25; 4]).1).collect();
    let rule = tet_rule();
    let mut out = Vec::with_capacity(nt);
    for k in 0..nt {
        let g = space.geometry(k);
        let mut ru = [0.0; 6];
        let mut rw = [0.0; 6];
        for (lambda, w) in rule.points.iter().zip(&rule.weights) {
            let x = space.map_point(k, lambda);
            let fu = s.flux(k, &x, &grad_u[k])?;
            let ion = s.ionic(k, &x, u.eval_local(k, lambda).0)?;
            let fw = geom::scale(&grad_w[k], s.eps[k]);
            let wh = w1.eval_local(k, lambda).0;
            for le in 0..6 {
                let (b, gb) = bubble(g, lambda, le);
                ru[le] += w * g.volume * (-geom::dot(&fu, &gb) - ion * b);
                rw[le] += w * g.volume * (-geom::dot(&fw, &gb) - s.kappa2[k] * wh * b);
            }
        }
        for &(_, lambda, w) in quad.element(k) {
            for (le, r) in rw.iter_mut().enumerate() {
                *r += w * bubble(g, &lambda, le).0;
            }
        }
        for lf in 0..4 {
            let normal = g.face_normal[lf];
            let nb = topo.neighbor(k, lf);
            let (wu, ww, de) = match nb {
                Some(n) => {
                    let (a, b) = flux.weights(s.eps[k], s.eps[n]);
                    (
                        geom::add(&geom::scale(&grad_u[k], a * s.eps[k]), &geom::scale(&grad_u[n], b * s.eps[n])),
                        geom::add(&geom::scale(&grad_w[k], a * s.eps[k]), &geom::scale(&grad_w[n], b * s.eps[n])),
                        a * s.eps[k] + b * s.eps[n] - params.eps_m,
                    )
                }
                None => (
                    geom::scale(&grad_u[k], s.eps[k]),
                    geom::scale(&grad_w[k], s.eps[k]),
                    s.eps[k] - params.eps_m,
                ),
            };
            let base_u = geom::dot(&normal, &wu);
            let base_w = geom::dot(&normal, &ww);
            s.face_points(k, lf, |wa, lambda, x| {
                let mut fu = base_u;
                if de != 0.0 {
                    fu += de * geom::dot(&normal, &coulomb(system, params, x)?.1);
                }
                for le in 0..6 {
                    let b = bubble(g, lambda, le).0;
                    ru[le] += wa * fu * b;
                    rw[le] += wa * base_w * b;
                }
                Ok(())
            })?;
        }
        let b = bubble_matrix(space, k, s.eps[k], s.kappa2[k]);
        let chol = Matrix6::from_fn(|i, j| b[i][j]).cholesky().ok_or(Error::SingularLocal(k))?;
        let phi = chol.solve(&Vector6::from_column_slice(&ru));
        let psi = chol.solve(&Vector6::from_column_slice(&rw));
        out.push(LocalErrors {
            matrix: b,
            primal: std::array::from_fn(|i| phi[i]),
            dual: std::array::from_fn(|i| psi[i]),
        });
    }
    Ok(out)
}
