use super::MeshHierarchy;
use crate::{Error, Result};

/// Node set smoothed on a level by a multilevel preconditioner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SmoothingVariant {
    /// Fine nodes of the level only.
    Hb,
    /// Nodes whose basis support lies entirely inside the refinement region.
    Bpx,
    /// Fine nodes plus nodes whose support meets the marked region.
    Bek,
    /// Nodes whose support meets the refinement region.
    OneRing,
    /// Every node (classical multigrid).
    Mg,
}

impl SmoothingVariant {
    pub const ALL: [SmoothingVariant; 5] =
        [Self::Hb, Self::Bpx, Self::Bek, Self::OneRing, Self::Mg];

    pub fn name(self) -> &'static str {
        match self {
            Self::Hb => "HB",
            Self::Bpx => "BPX",
            Self::Bek => "BEK",
            Self::OneRing => "ONERING",
            Self::Mg => "MG",
        }
    }
}

/// Sorted node ids of the smoothing set `X_j` of `variant` on `level`.
///
/// Supports are those of the level-`j` P1 basis: the star of elements
/// around a node. Set membership is decided by positive-measure overlap,
/// i.e. by whether an element of the star is in the refinement (or marked)
/// region.
pub fn smoothing_set(
    hierarchy: &MeshHierarchy,
    level: usize,
    variant: SmoothingVariant,
) -> Result<Vec<usize>> {
    if level == 0 {
        return Err(Error::CoarsestLevel);
    }
    if level > hierarchy.finest_level() {
        return Err(Error::InvalidLevel { level, finest: hierarchy.finest_level() });
    }
    let mesh = hierarchy.mesh(level);
    let n = mesh.num_vertices();
    let fine = hierarchy.fine_nodes(level);
    if variant == SmoothingVariant::Mg {
        return Ok((0..n).collect());
    }
    if variant == SmoothingVariant::Hb {
        return Ok(fine.collect());
    }
    let rec = hierarchy.record(level);
    // any_created / all_created / any_marked over each node's star
    let mut any_created = vec![false; n];
    let mut all_created = vec![true; n];
    let mut in_mesh = vec![false; n];
    let mut any_marked = vec![false; n];
    for (k, t) in mesh.tets().iter().enumerate() {
        for &v in t {
            in_mesh[v] = true;
            any_created[v] |= rec.created[k];
            all_created[v] &= rec.created[k];
            any_marked[v] |= rec.in_marked[k];
        }
    }
    let keep: Box<dyn Fn(usize) -> bool> = match variant {
        SmoothingVariant::Bpx => Box::new(|v| in_mesh[v] && all_created[v]),
        SmoothingVariant::Bek => Box::new(|v| fine.contains(&v) || any_marked[v]),
        SmoothingVariant::OneRing => Box::new(|v| any_created[v]),
        SmoothingVariant::Hb | SmoothingVariant::Mg => unreachable!(),
    };
    Ok((0..n).filter(|&v| keep(v)).collect())
}
