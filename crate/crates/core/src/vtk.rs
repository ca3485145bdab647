//! Legacy ASCII VTK export of tetrahedral meshes with point and cell
//! scalars.

use std::io::{self, Write};

use crate::mesh::{Region, SimplicialMesh};

const VTK_TETRA: u8 = 10;

/// Writes `mesh` as an unstructured grid. Every point field must have one
/// value per vertex and every cell field one value per element. Region
/// labels are always written as the cell field `region` (0 solute,
/// 1 solvent).
pub fn write_vtk<W: Write>(
    out: &mut W,
    mesh: &SimplicialMesh,
    point_data: &[(&str, &[f64])],
    cell_data: &[(&str, &[f64])],
) -> io::Result<()> {
    let nv = mesh.num_vertices();
    let nt = mesh.num_elements();
    for (name, v) in point_data {
        if v.len() != nv {
            return Err(invalid(format!("point field '{name}' has {} values for {nv} vertices", v.len())));
        }
    }
    for (name, v) in cell_data {
        if v.len() != nt {
            return Err(invalid(format!("cell field '{name}' has {} values for {nt} cells", v.len())));
        }
    }
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "pbamr solution")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {nv} double")?;
    for p in mesh.vertices() {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2])?;
    }
    writeln!(out, "CELLS {nt} {}", 5 * nt)?;
    for t in mesh.tets() {
        writeln!(out, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "{VTK_TETRA}")?;
    }
    if !point_data.is_empty() {
        writeln!(out, "POINT_DATA {nv}")?;
        for (name, v) in point_data {
            scalars(out, name, v.iter().copied())?;
        }
    }
    writeln!(out, "CELL_DATA {nt}")?;
    let regions = mesh.regions().iter().map(|&r| if r == Region::Solute { 0.0 } else { 1.0 });
    scalars(out, "region", regions)?;
    for (name, v) in cell_data {
        scalars(out, name, v.iter().copied())?;
    }
    Ok(())
}

fn scalars<W: Write>(out: &mut W, name: &str, values: impl Iterator<Item = f64>) -> io::Result<()> {
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(invalid(format!("invalid field name '{name}'")));
    }
    writeln!(out, "SCALARS {name} double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidInput, msg)
}
