//! OFF and OBJ mesh file formats.
//!
//! Both writers emit shortest-roundtrip floats, so write → read is exact.
//! OBJ files carry the boundary loops as `l` polyline elements under groups
//! named `facet_<i>`; OFF files carry geometry only, and boundary tags are
//! reconstructed from the container's facet equations on import.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use capillary_core::capmesh::trace_boundary_loops;
use capillary_core::mesh::BoundaryLoop;
use capillary_core::{Container, TriMesh, Vec3};

/// Raw indexed geometry plus optional boundary-edge facet tags.
pub struct RawMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    /// Directed boundary edges tagged by facet (from OBJ `facet_<i>` groups).
    pub edge_tags: BTreeMap<(u32, u32), u32>,
}

pub fn write_off(mesh: &TriMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} 0", mesh.vertex_count(), mesh.face_count());
    for v in mesh.positions() {
        let _ = writeln!(out, "{} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_off(path: &Path) -> Result<RawMesh> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace().map(String::from).collect::<Vec<_>>());
    let header = tokens.next().context("empty OFF file")?;
    if header != "OFF" {
        bail!("not an OFF file (header {header:?})");
    }
    let mut next_num = |what: &str| -> Result<f64> {
        tokens.next().with_context(|| format!("OFF: missing {what}"))?.parse::<f64>().with_context(|| format!("OFF: bad {what}"))
    };
    let nv = next_num("vertex count")? as usize;
    let nf = next_num("face count")? as usize;
    let _ne = next_num("edge count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (x, y, z) = (next_num("x")?, next_num("y")?, next_num("z")?);
        vertices.push(Vec3::new(x, y, z));
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let arity = next_num("face arity")? as usize;
        if arity != 3 {
            bail!("only triangle faces are supported (got {arity}-gon)");
        }
        let mut f = [0u32; 3];
        for slot in &mut f {
            *slot = next_num("face index")? as u32;
        }
        faces.push(f);
    }
    Ok(RawMesh { vertices, faces, edge_tags: BTreeMap::new() })
}

pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<()> {
    let mut out = String::new();
    for v in mesh.positions() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    out.push_str("g surface\n");
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    // boundary loops as closed polylines grouped by facet runs
    for lp in mesh.boundary_loops() {
        for (facet, chain, cyclic) in capillary_core::boundary::facet_runs(lp) {
            let _ = writeln!(out, "g facet_{facet}");
            let mut line = String::from("l");
            for &v in &chain {
                let _ = write!(line, " {}", v + 1);
            }
            if cyclic {
                let _ = write!(line, " {}", chain[0] + 1);
            }
            out.push_str(&line);
            out.push('\n');
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_obj(path: &Path) -> Result<RawMesh> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut edge_tags = BTreeMap::new();
    let mut current_facet: Option<u32> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let key = it.next().unwrap();
        let ctx = || format!("{}:{}", path.display(), lineno + 1);
        match key {
            "v" => {
                let mut c = [0.0f64; 3];
                for slot in &mut c {
                    *slot = it.next().with_context(ctx)?.parse().with_context(ctx)?;
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            "f" => {
                let idx: Vec<u32> = it
                    .map(|tok| {
                        let lead = tok.split('/').next().unwrap_or(tok);
                        lead.parse::<u32>().map(|i| i - 1)
                    })
                    .collect::<std::result::Result<_, _>>()
                    .with_context(ctx)?;
                if idx.len() != 3 {
                    bail!("{}: only triangle faces are supported", ctx());
                }
                faces.push([idx[0], idx[1], idx[2]]);
            }
            "g" => {
                current_facet = it
                    .next()
                    .and_then(|name| name.strip_prefix("facet_"))
                    .and_then(|n| n.parse().ok());
            }
            "l" => {
                if let Some(facet) = current_facet {
                    let idx: Vec<u32> = it
                        .map(|tok| tok.parse::<u32>().map(|i| i - 1))
                        .collect::<std::result::Result<_, _>>()
                        .with_context(ctx)?;
                    for pair in idx.windows(2) {
                        edge_tags.insert((pair[0], pair[1]), facet);
                    }
                }
            }
            _ => {}
        }
    }
    Ok(RawMesh { vertices, faces, edge_tags })
}

/// Assemble a validated `TriMesh` from raw geometry. Boundary loops are
/// traced in face direction; edges take their facet from the file tags
/// when present, otherwise from the container's facet equations.
pub fn assemble_mesh(raw: RawMesh, container: Option<&Container>) -> Result<TriMesh> {
    let RawMesh { vertices, faces, edge_tags } = raw;
    let verts = vertices.clone();
    let loops: Vec<BoundaryLoop> =
        trace_boundary_loops(verts.len(), &faces, |a, b| {
            if let Some(&t) = edge_tags.get(&(a, b)) {
                return Ok(t);
            }
            if let Some(c) = container {
                let mut best: Option<(f64, u32)> = None;
                for f in 0..c.facet_count() {
                    let d = c
                        .signed_offset(f, &verts[a as usize])
                        .abs()
                        .max(c.signed_offset(f, &verts[b as usize]).abs());
                    if d < 1e-9 && best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, f as u32));
                    }
                }
                best.map(|(_, f)| f)
                    .ok_or(capillary_core::MeshError::UntaggedBoundaryEdge(a, b))
            } else {
                Err(capillary_core::MeshError::UntaggedBoundaryEdge(a, b))
            }
        })
        .context("tracing boundary loops")?;
    let mesh = TriMesh::new(vertices, faces, loops).context("validating mesh topology")?;
    if let Some(c) = container {
        mesh.validate_against(c).context("validating boundary against container")?;
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use capillary_core::capmesh::build_cap_mesh;
    use capillary_core::caps::CapSolution;

    #[test]
    fn off_round_trip_is_exact() {
        let c = Container::floor(0.5).unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.15).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.off");
        write_off(&m, &path).unwrap();
        let raw = read_off(&path).unwrap();
        let m2 = assemble_mesh(raw, Some(&c)).unwrap();
        assert_eq!(m.vertex_count(), m2.vertex_count());
        assert_eq!(m.faces(), m2.faces());
        for (a, b) in m.positions().iter().zip(m2.positions()) {
            assert_eq!(a, b);
        }
        assert_eq!(m.boundary_loops().len(), m2.boundary_loops().len());
    }

    #[test]
    fn obj_round_trip_keeps_facet_tags() {
        let c = Container::wedge(
            vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0)],
            vec![0.0, 0.0],
        )
        .unwrap();
        let cap = CapSolution::with_radius(&c, 1.0, None).unwrap();
        let m = build_cap_mesh(&c, &cap, 0.12).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cap.obj");
        write_obj(&m, &path).unwrap();
        let raw = read_obj(&path).unwrap();
        assert!(!raw.edge_tags.is_empty());
        // tags alone suffice: no container needed to re-tag
        let m2 = assemble_mesh(raw, None).unwrap();
        m2.validate_against(&c).unwrap();
        let tags = |m: &TriMesh| {
            let mut t: Vec<(u32, u32)> = m
                .boundary_loops()
                .iter()
                .flat_map(|lp| {
                    lp.vertices
                        .iter()
                        .zip(&lp.edge_facets)
                        .map(|(v, f)| (*v, *f))
                        .collect::<Vec<_>>()
                })
                .collect();
            t.sort_unstable();
            t
        };
        assert_eq!(tags(&m), tags(&m2));
    }

    #[test]
    fn closed_mesh_round_trips_without_container() {
        let m = capillary_core::capmesh::icosphere(Vec3::new(0.1, 0.2, 0.3), 0.7, 2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sphere.off");
        write_off(&m, &path).unwrap();
        let m2 = assemble_mesh(read_off(&path).unwrap(), None).unwrap();
        assert!(m2.is_closed());
        assert_eq!(m.face_count(), m2.face_count());
    }
}
