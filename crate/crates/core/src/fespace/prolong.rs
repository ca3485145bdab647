use super::{CsrMatrix, Degree, FeSpace};
use crate::mesh::MeshHierarchy;
use crate::{Error, Result};

/// Nodal interpolation `P_{j-1}^j` from the level `j - 1` P1 space to the
/// level `j` P1 space: identity rows for inherited nodes, `(1/2, 1/2)` on
/// the parent edge for new nodes.
pub fn prolongation(hierarchy: &MeshHierarchy, level: usize) -> Result<CsrMatrix> {
    if level == 0 || level > hierarchy.finest_level() {
        return Err(Error::InvalidLevel { level, finest: hierarchy.finest_level() });
    }
    let nc = hierarchy.num_nodes(level - 1);
    let nf = hierarchy.num_nodes(level);
    let mut row_ptr = Vec::with_capacity(nf + 1);
    let mut col_idx = Vec::with_capacity(nc + 2 * (nf - nc));
    let mut values = Vec::with_capacity(col_idx.capacity());
    row_ptr.push(0);
    for i in 0..nf {
        if i < nc {
            col_idx.push(i);
            values.push(1.0);
        } else {
            let [a, b] = hierarchy.parent_edge(i).expect("fine node has a parent edge");
            debug_assert!(a < b && b < nc);
            col_idx.extend([a, b]);
            values.extend([0.5, 0.5]);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(CsrMatrix::from_parts(nf, nc, row_ptr, col_idx, values, false))
}

/// Composite prolongation `P_{J-1}^J ... P_j^{j+1}` from level `j` to the
/// finest level `J` (the identity for `j = J`).
pub fn composite_prolongation(hierarchy: &MeshHierarchy, level: usize) -> Result<CsrMatrix> {
    let finest = hierarchy.finest_level();
    if level > finest {
        return Err(Error::InvalidLevel { level, finest });
    }
    let mut p = CsrMatrix::identity(hierarchy.num_nodes(level));
    for j in level + 1..=finest {
        p = prolongation(hierarchy, j)?.matmul(&p);
    }
    Ok(p)
}

/// Embedding of the P1 space into the P2 space on the same mesh.
pub fn p1_to_p2(p2: &FeSpace) -> Result<CsrMatrix> {
    if p2.degree() != Degree::P2 {
        return Err(Error::Dimension("p1_to_p2 needs a P2 space".into()));
    }
    let nv = p2.mesh().num_vertices();
    let edges = &p2.topology().edges;
    let mut triplets = Vec::with_capacity(nv + 2 * edges.len());
    for v in 0..nv {
        triplets.push((v, v, 1.0));
    }
    for (e, &[a, b]) in edges.iter().enumerate() {
        triplets.push((nv + e, a, 0.5));
        triplets.push((nv + e, b, 0.5));
    }
    Ok(CsrMatrix::from_triplets(nv + edges.len(), nv, &triplets))
}

/// Interpolates a level `j - 1` P1 coefficient vector onto level `j`.
pub fn prolongate_field(hierarchy: &MeshHierarchy, level: usize, coarse: &[f64]) -> Result<Vec<f64>> {
    Ok(prolongation(hierarchy, level)?.mul_vec(coarse))
}
