use std::collections::{HashMap, HashSet};

use pbamr::mesh::{
    generate_born_mesh, mesh_geometry, read_pbmesh, smoothing_set, unit_cube_mesh, write_pbmesh,
    MeshHierarchy, Region, SimplicialMesh, SmoothingVariant,
};
use pbamr::{Error, Point};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference_tet() -> SimplicialMesh {
    let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    SimplicialMesh::from_elements(v, vec![[0, 1, 2, 3]], vec![Region::Solute]).unwrap()
}

/// Two Kuhn tetrahedra of the unit cube sharing the face (0, 1, 7), which
/// carries the cube diagonal 0-7.
fn two_tets() -> SimplicialMesh {
    let corner = |c: usize| -> Point {
        [((c >> 2) & 1) as f64, ((c >> 1) & 1) as f64, (c & 1) as f64]
    };
    let v: Vec<Point> = (0..8).map(corner).collect();
    SimplicialMesh::from_elements(
        v,
        vec![[0, 1, 3, 7], [0, 1, 5, 7]],
        vec![Region::Solute, Region::Solvent],
    )
    .unwrap()
}

/// Oracle: every face shared by one or two elements, hanging-node free,
/// boundary area and volume conserved relative to `parent`.
fn assert_conforming(mesh: &SimplicialMesh, parent_volume: f64, parent_area: f64) {
    let mut count: HashMap<[usize; 3], usize> = HashMap::new();
    for t in mesh.tets() {
        for f in [[t[1], t[2], t[3]], [t[0], t[2], t[3]], [t[0], t[1], t[3]], [t[0], t[1], t[2]]] {
            let mut f = f;
            f.sort_unstable();
            *count.entry(f).or_default() += 1;
        }
    }
    assert!(count.values().all(|&c| c == 1 || c == 2));
    let boundary: Vec<_> = count.iter().filter(|(_, &c)| c == 1).map(|(f, _)| *f).collect();
    assert_eq!(boundary.len(), mesh.boundary_faces().len());
    let v = mesh.vertices();
    let area: f64 = boundary
        .iter()
        .map(|f| {
            let a = sub(&v[f[1]], &v[f[0]]);
            let b = sub(&v[f[2]], &v[f[0]]);
            0.5 * norm(&cross(&a, &b))
        })
        .sum();
    assert!((area - parent_area).abs() < 1e-10 * parent_area);
    assert!((mesh.total_volume() - parent_volume).abs() < 1e-12 * parent_volume);
    for k in 0..mesh.num_elements() {
        assert!(mesh.volume(k) > 0.0);
    }
    mesh.check_conformity().unwrap();
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Point, b: &Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &Point) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn boundary_area(mesh: &SimplicialMesh) -> f64 {
    let v = mesh.vertices();
    mesh.boundary_faces()
        .iter()
        .map(|f| 0.5 * norm(&cross(&sub(&v[f[1]], &v[f[0]]), &sub(&v[f[2]], &v[f[0]]))))
        .sum()
}

fn min_dihedral(mesh: &SimplicialMesh) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..mesh.num_elements() {
        let p = mesh.element_points(k);
        // Angle along edge (i, j) between faces (i, j, k) and (i, j, l).
        for (i, j, a, b) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2), (1, 2, 0, 3), (1, 3, 0, 2), (2, 3, 0, 1)] {
            let e = sub(&p[j], &p[i]);
            let n1 = cross(&e, &sub(&p[a], &p[i]));
            let n2 = cross(&e, &sub(&p[b], &p[i]));
            let c = (n1[0] * n2[0] + n1[1] * n2[1] + n1[2] * n2[2]) / (norm(&n1) * norm(&n2));
            best = best.min(c.clamp(-1.0, 1.0).acos());
        }
    }
    best
}

#[test]
fn single_tet_bisects_into_two_children() {
    let mut h = MeshHierarchy::new(reference_tet());
    h.bisect_refine(&[0]).unwrap();
    let m = h.finest();
    assert_eq!(m.num_elements(), 2);
    assert_eq!(m.num_vertices(), 5);
    // Longest edges have length sqrt(2); the tie goes to the smallest pair (1, 2).
    assert_eq!(h.parent_edge(4), Some([1, 2]));
    assert_eq!(m.vertices()[4], [0.5, 0.5, 0.0]);
    for k in 0..2 {
        assert!(m.tets()[k].contains(&4));
        assert_eq!(m.regions()[k], Region::Solute);
    }
    assert!((m.total_volume() - 1.0 / 6.0).abs() < 1e-15);
    assert_eq!(h.fine_nodes(1), 4..5);
}

#[test]
fn closure_bisects_the_neighbour_across_the_longest_edge() {
    let mesh = two_tets();
    let (vol, area) = (mesh.total_volume(), boundary_area(&mesh));
    let mut h = MeshHierarchy::new(mesh);
    h.bisect_refine(&[0]).unwrap();
    let m = h.finest();
    assert_eq!(m.num_elements(), 4);
    assert_eq!(h.parent_edge(8), Some([0, 7]));
    assert_conforming(m, vol, area);
    let labels: Vec<_> = m.regions().to_vec();
    assert_eq!(labels.iter().filter(|&&r| r == Region::Solute).count(), 2);
    let rec = h.record(1);
    assert_eq!(rec.marked, vec![0]);
    assert!(rec.created.iter().all(|&c| c));
    assert_eq!(rec.in_marked.iter().filter(|&&c| c).count(), 2);
}

#[test]
fn two_tet_smoothing_sets_by_hand() {
    let mut h = MeshHierarchy::new(two_tets());
    h.bisect_refine(&[0]).unwrap();
    let set = |v| smoothing_set(&h, 1, v).unwrap();
    // Node 8 is the new midpoint; node 5 only touches children of the
    // unmarked element; every element of level 1 was created.
    assert_eq!(set(SmoothingVariant::Hb), vec![8]);
    assert_eq!(set(SmoothingVariant::Bpx), vec![0, 1, 3, 5, 7, 8]);
    assert_eq!(set(SmoothingVariant::Bek), vec![0, 1, 3, 7, 8]);
    assert_eq!(set(SmoothingVariant::OneRing), vec![0, 1, 3, 5, 7, 8]);
    assert_eq!(set(SmoothingVariant::Mg), (0..9).collect::<Vec<_>>());
    // Unused vertices 2, 4, 6 have empty stars and are never smoothed.
    assert!(matches!(smoothing_set(&h, 0, SmoothingVariant::Mg), Err(Error::CoarsestLevel)));
    assert!(matches!(smoothing_set(&h, 2, SmoothingVariant::Mg), Err(Error::InvalidLevel { .. })));
}

#[test]
fn refinement_errors() {
    let mut h = MeshHierarchy::new(reference_tet());
    assert!(matches!(h.bisect_refine(&[]), Err(Error::NothingToRefine)));
    assert_eq!(Error::NothingToRefine.to_string(), "nothing to refine");
    assert!(matches!(h.bisect_refine(&[1]), Err(Error::InvalidElement { id: 1, count: 1 })));
    assert_eq!(h.num_levels(), 1);
}

#[test]
fn random_marking_keeps_the_cube_conforming() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..10 {
        let mesh = unit_cube_mesh(1);
        assert_eq!(mesh.num_elements(), 6);
        let mut h = MeshHierarchy::new(mesh);
        for round in 0..5 {
            let nt = h.finest().num_elements();
            let mut marked: Vec<usize> = (0..nt).filter(|_| rng.random_bool(0.3)).collect();
            if marked.is_empty() {
                marked.push(rng.random_range(0..nt));
            }
            let before = h.num_nodes(h.finest_level());
            h.bisect_refine(&marked).unwrap();
            let m = h.finest();
            assert_conforming(m, 1.0, 6.0);
            assert!(m.num_vertices() > before, "trial {trial} round {round}");
            // Nested node sets: old coordinates unchanged, new nodes are
            // midpoints of level j-1 edges.
            let coarse = h.mesh(h.finest_level() - 1);
            assert_eq!(&m.vertices()[..before], coarse.vertices());
            for v in h.fine_nodes(h.finest_level()) {
                let [a, b] = h.parent_edge(v).unwrap();
                assert!(a < b && b < before);
                let mid = [0, 1, 2].map(|d| 0.5 * (coarse.vertices()[a][d] + coarse.vertices()[b][d]));
                assert_eq!(m.vertices()[v], mid);
            }
        }
    }
}

#[test]
fn dihedral_angles_stay_bounded_under_uniform_bisection() {
    let mut h = MeshHierarchy::new(reference_tet());
    let mut angles = vec![min_dihedral(h.finest())];
    for _ in 0..8 {
        h.refine_uniform().unwrap();
        angles.push(min_dihedral(h.finest()));
    }
    assert_eq!(h.finest().num_elements(), 256);
    let floor = angles[3];
    assert!(floor > 0.1, "min dihedral angles {angles:?}");
    for a in &angles[3..] {
        assert!(*a >= floor - 1e-12, "min dihedral angles {angles:?}");
    }
}

#[test]
fn reference_tet_geometry() {
    let g = mesh_geometry(&reference_tet()).unwrap();
    let e = &g.elements[0];
    assert!((e.volume - 1.0 / 6.0).abs() < 1e-15);
    assert!((e.diameter - 2f64.sqrt()).abs() < 1e-15);
    // Faces opposite vertices 1..3 are axis-aligned with area 1/2.
    for k in 1..4 {
        assert!((e.face_area[k] - 0.5).abs() < 1e-15);
        assert!((norm(&e.face_normal[k]) - 1.0).abs() < 1e-15);
        assert!((e.face_normal[k][k - 1] + 1.0).abs() < 1e-15);
    }
    assert!((e.face_area[0] - 3f64.sqrt() / 2.0).abs() < 1e-15);
}

#[test]
fn unit_area_face() {
    let v = vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.3, 0.2, 5.0]];
    let m = SimplicialMesh::from_elements(v, vec![[0, 1, 2, 3]], vec![Region::Solvent]).unwrap();
    let e = &mesh_geometry(&m).unwrap().elements[0];
    assert!((e.face_area[3] - 1.0).abs() < 1e-15);
    assert_eq!(e.face_normal[3], [0.0, 0.0, -1.0]);
}

#[test]
fn degenerate_element_is_named() {
    let v = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
    let err = SimplicialMesh::from_elements(v, vec![[0, 1, 2, 3]], vec![Region::Solvent]).unwrap_err();
    assert!(matches!(err, Error::DegenerateElement { element: 0, .. }));
}

proptest! {
    #[test]
    fn affine_images_match_determinant(
        m in prop::array::uniform9(-2.0f64..2.0),
        t in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let a = [[m[0], m[1], m[2]], [m[3], m[4], m[5]], [m[6], m[7], m[8]]];
        let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        prop_assume!(det.abs() > 1e-3);
        let map = |x: [f64; 3]| -> Point {
            [0, 1, 2].map(|r| a[r][0] * x[0] + a[r][1] * x[1] + a[r][2] * x[2] + t[r])
        };
        let v = vec![map([0.0; 3]), map([1.0, 0.0, 0.0]), map([0.0, 1.0, 0.0]), map([0.0, 0.0, 1.0])];
        let mesh = SimplicialMesh::from_elements(v, vec![[0, 1, 2, 3]], vec![Region::Solvent]).unwrap();
        let g = mesh_geometry(&mesh).unwrap();
        prop_assert!((g.elements[0].volume - det.abs() / 6.0).abs() < 1e-12 * (1.0 + det.abs()));
        prop_assert!(mesh.volume(0) > 0.0);
    }

    #[test]
    fn smoothing_sets_are_nested(seed in 0u64..1000, n in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = MeshHierarchy::new(generate_born_mesh(2.0, 1.0, 2 * n).unwrap());
        for _ in 0..3 {
            let nt = h.finest().num_elements();
            let marked: Vec<usize> = (0..nt).filter(|_| rng.random_bool(0.1)).collect();
            let marked = if marked.is_empty() { vec![rng.random_range(0..nt)] } else { marked };
            h.bisect_refine(&marked).unwrap();
        }
        for j in 1..=h.finest_level() {
            let set = |v| -> HashSet<usize> { smoothing_set(&h, j, v).unwrap().into_iter().collect() };
            let (hb, bpx, bek, one, mg) = (
                set(SmoothingVariant::Hb),
                set(SmoothingVariant::Bpx),
                set(SmoothingVariant::Bek),
                set(SmoothingVariant::OneRing),
                set(SmoothingVariant::Mg),
            );
            prop_assert!(hb.is_subset(&bpx));
            prop_assert!(hb.is_subset(&bek));
            prop_assert!(bek.is_subset(&one));
            prop_assert!(bpx.is_subset(&one));
            prop_assert!(one.is_subset(&mg));
            prop_assert_eq!(mg.len(), h.num_nodes(j));
            prop_assert_eq!(hb, h.fine_nodes(j).collect::<HashSet<_>>());
        }
    }
}

#[test]
fn local_refinement_smooths_fewer_than_all_nodes() {
    let mut h = MeshHierarchy::new(unit_cube_mesh(3));
    h.bisect_refine(&[0]).unwrap();
    let n = h.num_nodes(1);
    for v in [SmoothingVariant::Hb, SmoothingVariant::Bpx, SmoothingVariant::Bek, SmoothingVariant::OneRing] {
        assert!(smoothing_set(&h, 1, v).unwrap().len() < n, "{}", v.name());
    }
}

#[test]
fn born_generator() {
    let m = generate_born_mesh(12.0, 3.0, 2).unwrap();
    assert_eq!(m.num_elements(), 48);
    assert!((m.total_volume() - 24f64.powi(3)).abs() < 1e-12 * 24f64.powi(3));
    assert!(matches!(generate_born_mesh(3.0, 3.0, 4), Err(Error::Parameter(_))));
    assert!(generate_born_mesh(12.0, 3.0, 1).is_err());

    let m = generate_born_mesh(12.0, 6.0, 8).unwrap();
    m.check_conformity().unwrap();
    let solute = m.regions().iter().filter(|&&r| r == Region::Solute).count();
    assert!(solute > 0 && solute < m.num_elements());
    let faces = m.interface_faces();
    assert!(!faces.is_empty());
    let mut edge_count: HashMap<[usize; 2], usize> = HashMap::new();
    for f in &faces {
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            *edge_count.entry([f[a], f[b]]).or_default() += 1;
        }
    }
    assert!(edge_count.values().all(|c| c % 2 == 0));
    for k in 0..m.num_elements() {
        let c = m.centroid(k);
        let inside = c[0] * c[0] + c[1] * c[1] + c[2] * c[2] <= 36.0;
        assert_eq!(inside, m.regions()[k] == Region::Solute);
    }
}

#[test]
fn pbmesh_round_trip() {
    let m = generate_born_mesh(12.0, 5.0, 4).unwrap();
    let text = write_pbmesh(&m);
    let r = read_pbmesh(&text).unwrap();
    assert_eq!(r.vertices(), m.vertices());
    assert_eq!(r.tets(), m.tets());
    assert_eq!(r.regions(), m.regions());
    assert_eq!(r.boundary_faces().len(), m.boundary_faces().len());
}

#[test]
fn pbmesh_errors_carry_line_numbers() {
    let bad_label = "pbmesh 1\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ntets 1\n0 1 2 3 x\nbfaces 0\n";
    assert!(matches!(read_pbmesh(bad_label), Err(Error::Parse { line: 8, .. })));
    let bad_number = "pbmesh 1\nvertices 1\n0 zero 0\n";
    assert!(matches!(read_pbmesh(bad_number), Err(Error::Parse { line: 3, .. })));
    assert!(read_pbmesh("pbmesh 2\n").is_err());
    let missing_faces = "pbmesh 1\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ntets 1\n0 1 2 3 m\nbfaces 1\n0 1 2\n";
    assert!(read_pbmesh(missing_faces).is_err());
    let ok = "pbmesh 1\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ntets 1\n0 1 2 3 m\nbfaces 4\n0 1 2\n0 1 3\n0 2 3\n1 2 3\n";
    let m = read_pbmesh(ok).unwrap();
    assert_eq!(m.regions(), &[Region::Solute]);
}
