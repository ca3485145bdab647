use std::sync::Arc;

use pbamr::fespace::{
    assemble_operator, composite_prolongation, p1_to_p2, prolongation, Coefficients, CsrMatrix,
    Degree, FeSpace, FieldVector,
};
use pbamr::mesh::{generate_born_mesh, unit_cube_mesh, MeshHierarchy, Region, SimplicialMesh};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn locally_refined(levels: usize, seed: u64) -> MeshHierarchy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = MeshHierarchy::new(generate_born_mesh(4.0, 2.0, 4).unwrap());
    for _ in 0..levels {
        let nt = h.finest().num_elements();
        let mut marked: Vec<usize> = (0..nt).filter(|_| rng.random_bool(0.15)).collect();
        if marked.is_empty() {
            marked.push(0);
        }
        h.bisect_refine(&marked).unwrap();
    }
    h
}

fn space(h: &MeshHierarchy, level: usize) -> FeSpace {
    FeSpace::new(h.mesh_arc(level), Degree::P1).unwrap()
}

#[test]
fn prolongation_rows_and_constants() {
    let h = locally_refined(3, 5);
    for j in 1..=h.finest_level() {
        let p = prolongation(&h, j).unwrap();
        assert_eq!((p.nrows(), p.ncols()), (h.num_nodes(j), h.num_nodes(j - 1)));
        for i in 0..p.nrows() {
            let (cols, vals) = p.row(i);
            if i < h.num_nodes(j - 1) {
                assert_eq!((cols, vals), (&[i][..], &[1.0][..]));
            } else {
                let [a, b] = h.parent_edge(i).unwrap();
                assert_eq!(cols, &[a, b]);
                assert_eq!(vals, &[0.5, 0.5]);
            }
        }
        let ones = p.mul_vec(&vec![1.0; p.ncols()]);
        assert!(ones.iter().all(|&v| v == 1.0));
    }
    for j in 0..=h.finest_level() {
        let p = composite_prolongation(&h, j).unwrap();
        assert_eq!((p.nrows(), p.ncols()), (h.num_nodes(h.finest_level()), h.num_nodes(j)));
        let ones = p.mul_vec(&vec![1.0; p.ncols()]);
        assert!(ones.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }
    assert!(prolongation(&h, 0).is_err());
    assert!(prolongation(&h, 4).is_err());
}

#[test]
fn prolongation_interpolates_linear_functions_exactly() {
    let h = locally_refined(2, 9);
    let f = |x: &[f64; 3]| 0.3 - x[0] + 2.0 * x[1] + 0.5 * x[2];
    let coarse: Vec<f64> = h.mesh(0).vertices().iter().map(f).collect();
    let fine = composite_prolongation(&h, 0).unwrap().mul_vec(&coarse);
    for (v, x) in fine.iter().zip(h.finest().vertices()) {
        assert!((v - f(x)).abs() < 1e-13);
    }
}

#[test]
fn galerkin_chain_under_uniform_refinement() {
    let mut h = MeshHierarchy::new(generate_born_mesh(3.0, 1.5, 2).unwrap());
    h.refine_uniform().unwrap();
    h.refine_uniform().unwrap();
    let coeffs = Coefficients { eps_solute: 2.0, eps_solvent: 80.0, kappa2_solute: 0.0, kappa2_solvent: 0.7 };
    let fine = assemble_operator(&space(&h, 2), &coeffs).unwrap();
    for j in 0..2 {
        let coarse = assemble_operator(&space(&h, j), &coeffs).unwrap();
        let p = composite_prolongation(&h, j).unwrap();
        let g = fine.galerkin(&p);
        let rel = g.frobenius_distance(&coarse) / coarse.frobenius_norm();
        assert!(rel < 1e-12, "level {j}: relative Frobenius error {rel}");
    }
}

#[test]
fn galerkin_identity_also_holds_for_local_refinement() {
    let h = locally_refined(2, 17);
    let coeffs = Coefficients::uniform(1.5, 0.2);
    let a1 = assemble_operator(&space(&h, 2), &coeffs).unwrap();
    let a0 = assemble_operator(&space(&h, 1), &coeffs).unwrap();
    let g = a1.galerkin(&prolongation(&h, 2).unwrap());
    assert!(g.frobenius_distance(&a0) / a0.frobenius_norm() < 1e-12);
}

#[test]
fn restriction_is_the_transpose() {
    let h = locally_refined(2, 3);
    let p = prolongation(&h, 2).unwrap();
    let pt = p.transpose();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r: Vec<f64> = (0..p.nrows()).map(|_| rng.random_range(-1.0..1.0)).collect();
    assert_eq!(pt.mul_vec(&r), p.transpose_mul(&r));
    assert_eq!(pt.transpose().to_dense(), p.to_dense());
}

#[test]
fn assembly_is_deterministic_and_order_independent() {
    let mesh = generate_born_mesh(4.0, 2.0, 4).unwrap();
    let coeffs = Coefficients { eps_solute: 2.0, eps_solvent: 80.0, kappa2_solute: 0.0, kappa2_solvent: 1.0 };
    let s = FeSpace::new(Arc::new(mesh.clone()), Degree::P2).unwrap();
    let a = assemble_operator(&s, &coeffs).unwrap();
    let b = assemble_operator(&s, &coeffs).unwrap();
    assert_eq!(a.values(), b.values());
    assert_eq!(a.asymmetry(), 0.0);

    let n = mesh.num_elements();
    let perm: Vec<usize> = (0..n).rev().collect();
    let tets: Vec<_> = perm.iter().map(|&k| mesh.tets()[k]).collect();
    let regions: Vec<Region> = perm.iter().map(|&k| mesh.regions()[k]).collect();
    let reordered = SimplicialMesh::from_elements(mesh.vertices().to_vec(), tets, regions).unwrap();
    let s1 = FeSpace::new(Arc::new(mesh), Degree::P1).unwrap();
    let s2 = FeSpace::new(Arc::new(reordered), Degree::P1).unwrap();
    let a1 = assemble_operator(&s1, &coeffs).unwrap();
    let a2 = assemble_operator(&s2, &coeffs).unwrap();
    assert_eq!(a1.col_idx(), a2.col_idx());
    for (x, y) in a1.values().iter().zip(a2.values()) {
        assert!((x - y).abs() <= 1e-13 * x.abs().max(1.0));
    }
}

#[test]
fn boundary_dofs_lie_on_boundary_faces() {
    let mesh = Arc::new(unit_cube_mesh(3));
    for degree in [Degree::P1, Degree::P2] {
        let s = FeSpace::new(mesh.clone(), degree).unwrap();
        let expected = match degree {
            Degree::P1 => mesh.num_vertices(),
            Degree::P2 => mesh.num_vertices() + s.topology().edges.len(),
        };
        assert_eq!(s.num_dofs(), expected);
        for i in 0..s.num_dofs() {
            let x = s.dof_point(i);
            let on_box = x.iter().any(|&c| c.abs() < 1e-14 || (c - 1.0).abs() < 1e-14);
            assert_eq!(s.is_boundary(i), on_box, "dof {i} at {x:?}");
        }
    }
}

#[test]
fn p1_embeds_into_p2() {
    let mesh = Arc::new(unit_cube_mesh(2));
    let p1 = Arc::new(FeSpace::new(mesh.clone(), Degree::P1).unwrap());
    let p2 = Arc::new(FeSpace::new(mesh, Degree::P2).unwrap());
    let e = p1_to_p2(&p2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u: Vec<f64> = (0..p1.num_dofs()).map(|_| rng.random::<f64>()).collect();
    let f1 = FieldVector::new(p1, u.clone()).unwrap();
    let f2 = FieldVector::new(p2.clone(), e.mul_vec(&u)).unwrap();
    for _ in 0..20 {
        let x = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
        assert!((f1.evaluate(&x).unwrap() - f2.evaluate(&x).unwrap()).abs() < 1e-13);
    }
    // The P2 stiffness restricted to the embedded P1 space is the P1 stiffness.
    let c = Coefficients::uniform(1.0, 0.3);
    let a2 = assemble_operator(&p2, &c).unwrap();
    let a1 = assemble_operator(f1.space(), &c).unwrap();
    let g: CsrMatrix = a2.galerkin(&e);
    assert!(g.frobenius_distance(&a1) / a1.frobenius_norm() < 1e-12);
}
