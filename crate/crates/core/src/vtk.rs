//! Legacy ASCII VTK output of meshes and field states.

use std::io::Write;

use crate::error::Result;
use crate::fem::SpaceKind;
use crate::mesh::Mesh;
use crate::scalar::Real;
use crate::solver::{Discretization, FieldState};

fn write_geometry<T: Real, W: Write>(mesh: &Mesh<T>, title: &str, w: &mut W) -> Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.num_vertices())?;
    for v in &mesh.vertices {
        writeln!(w, "{:e} {:e} 0", v[0].to_f64_lossy(), v[1].to_f64_lossy())?;
    }
    let nc = mesh.num_cells();
    writeln!(w, "CELLS {} {}", nc, 4 * nc)?;
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(w, "5")?;
    }
    Ok(())
}

pub fn write_mesh<T: Real, W: Write>(mesh: &Mesh<T>, w: &mut W) -> Result<()> {
    write_geometry(mesh, "mesh", w)
}

/// Fields at the mesh vertices: `u` keeps only its vertex values, `p` is P1, and
/// `q` goes to point data (P1) or cell data (P0).
pub fn write_state<T: Real, W: Write>(disc: &Discretization<T>, state: &FieldState<T>, w: &mut W) -> Result<()> {
    let mesh = &disc.mesh;
    write_geometry(mesh, &format!("biot3f t={}", state.t.to_f64_lossy()), w)?;
    let nv = mesh.num_vertices();
    writeln!(w, "POINT_DATA {nv}")?;
    writeln!(w, "VECTORS u double")?;
    for v in 0..nv {
        writeln!(w, "{:e} {:e} 0", state.u[2 * v].to_f64_lossy(), state.u[2 * v + 1].to_f64_lossy())?;
    }
    let scalars = |w: &mut W, name: &str, vals: &[T]| -> Result<()> {
        writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
        for v in vals {
            writeln!(w, "{:e}", v.to_f64_lossy())?;
        }
        Ok(())
    };
    scalars(w, "p", &state.p[..nv])?;
    if disc.space_q.kind == SpaceKind::P0 {
        writeln!(w, "CELL_DATA {}", mesh.num_cells())?;
        scalars(w, "q", &state.q)?;
    } else {
        scalars(w, "q", &state.q[..nv])?;
    }
    Ok(())
}
