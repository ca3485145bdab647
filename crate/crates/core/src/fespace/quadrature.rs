//! Symmetric quadrature rules on the tetrahedron and the triangle.

use std::sync::OnceLock;

/// Quadrature rule on a simplex in barycentric coordinates. Weights sum to
/// one, so integrals are `measure * sum(w_q f(x_q))`.
#[derive(Clone, Debug)]
pub struct Quadrature<const B: usize> {
    pub points: Vec<[f64; B]>,
    pub weights: Vec<f64>,
}

pub type TetQuadrature = Quadrature<4>;
pub type TriQuadrature = Quadrature<3>;

/// 14-point rule, exact for polynomials of degree 5, positive weights.
pub fn tet_rule() -> &'static TetQuadrature {
    static RULE: OnceLock<TetQuadrature> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut points = Vec::with_capacity(14);
        let mut weights = Vec::with_capacity(14);
        for (a, w) in [
            (0.092_735_250_310_891_226_4, 0.073_493_043_116_361_949_5),
            (0.310_885_919_263_300_610, 0.112_687_925_718_015_850),
        ] {
            let b = 1.0 - 3.0 * a;
            for k in 0..4 {
                let mut p = [a; 4];
                p[k] = b;
                points.push(p);
                weights.push(w);
            }
        }
        let c = 0.045_503_704_125_649_649_4;
        let d = 0.5 - c;
        let w = (1.0 - weights.iter().sum::<f64>()) / 6.0;
        for [i, j] in crate::mesh::LOCAL_EDGES {
            let mut p = [c; 4];
            p[i] = d;
            p[j] = d;
            points.push(p);
            weights.push(w);
        }
        Quadrature { points, weights }
    })
}

/// 6-point rule, exact for polynomials of degree 4.
pub fn tri_rule() -> &'static TriQuadrature {
    static RULE: OnceLock<TriQuadrature> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut points = Vec::with_capacity(6);
        let mut weights = Vec::with_capacity(6);
        for (a, w) in [
            (0.445_948_490_915_965, 0.223_381_589_678_011),
            (0.091_576_213_509_771, 0.109_951_743_655_322),
        ] {
            let b = 1.0 - 2.0 * a;
            for k in 0..3 {
                let mut p = [a; 3];
                p[k] = b;
                points.push(p);
                weights.push(w);
            }
        }
        Quadrature { points, weights }
    })
}
