use std::path::Path;

use crate::centerline::Centerline;
use crate::logcentric::{CartesianPoint, Heightmap, LogCentricPoint, LogFrame};
use crate::{Error, Result};

use super::pointcloud::{append_vertices, ply_header};
use super::{write_atomic, PlyFormat};

/// Triangle mesh in Cartesian millimeters.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<CartesianPoint>,
    pub faces: Vec<[u32; 3]>,
}

impl Mesh {
    /// Volume enclosed by a closed mesh, positive when faces wind outward.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i as usize]);
                (a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) + a.z * (b.x * c.y - b.y * c.x)) / 6.0
            })
            .sum()
    }

    fn flip(&mut self) {
        self.faces.iter_mut().for_each(|f| f.swap(1, 2));
    }
}

fn index(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("mesh index {n} exceeds u32")))
}

/// Triangulates a heightmap around `centerline`: one vertex per cell center,
/// quads closed cyclically in `theta`. With `caps` each end gets a center
/// vertex on the centerline and a triangle fan, making the mesh watertight.
pub fn heightmap_mesh(centerline: &Centerline, h: &Heightmap, caps: bool) -> Result<Mesh> {
    h.check_physical()?;
    let frame = LogFrame::new(centerline)?;
    let g = h.grid;
    let (nt, nl) = (g.n_theta, g.n_l);
    let mut vertices = Vec::with_capacity(nt * nl + 2);
    for r in 0..nl {
        for c in 0..nt {
            vertices.push(frame.from_log_centric(&LogCentricPoint::new(g.theta(c), g.l(r), h.get(r, c)))?);
        }
    }
    let id = |r: usize, c: usize| index(r * nt + c % nt);
    let mut faces = Vec::with_capacity(2 * nt * nl);
    for r in 0..nl - 1 {
        for c in 0..nt {
            let (a, b, d, e) = (id(r, c)?, id(r, c + 1)?, id(r + 1, c)?, id(r + 1, c + 1)?);
            faces.push([a, b, e]);
            faces.push([a, e, d]);
        }
    }
    if caps {
        for (r, flip) in [(0, true), (nl - 1, false)] {
            let center = index(vertices.len())?;
            vertices.push(frame.from_log_centric(&LogCentricPoint::new(0.0, g.l(r), 0.0))?);
            for c in 0..nt {
                let (a, b) = (id(r, c)?, id(r, c + 1)?);
                faces.push(if flip { [center, b, a] } else { [center, a, b] });
            }
        }
    }
    let mut mesh = Mesh { vertices, faces };
    if caps && mesh.signed_volume() < 0.0 {
        mesh.flip();
    }
    Ok(mesh)
}

/// Closed tube through knot shell rings of `samples_angle` points each, as
/// produced by the knot body sampler, with the last ring capped by a fan
/// around its centroid.
pub fn knot_shell_mesh(centerline: &Centerline, shell: &[LogCentricPoint], samples_angle: usize) -> Result<Mesh> {
    if samples_angle < 3 || shell.len() < 2 * samples_angle || shell.len() % samples_angle != 0 {
        return Err(Error::InvalidParameter(format!(
            "knot shell of {} points is not a whole number of rings of {samples_angle}",
            shell.len()
        )));
    }
    let frame = LogFrame::new(centerline)?;
    let mut vertices = shell.iter().map(|p| frame.from_log_centric(p)).collect::<Result<Vec<_>>>()?;
    let rings = shell.len() / samples_angle;
    let id = |r: usize, j: usize| index(r * samples_angle + j % samples_angle);
    let mut faces = Vec::with_capacity(2 * rings * samples_angle);
    for r in 0..rings - 1 {
        for j in 0..samples_angle {
            let (a, b, d, e) = (id(r, j)?, id(r, j + 1)?, id(r + 1, j)?, id(r + 1, j + 1)?);
            faces.push([a, b, e]);
            faces.push([a, e, d]);
        }
    }
    let last = &vertices[(rings - 1) * samples_angle..];
    let n = samples_angle as f64;
    let centroid = CartesianPoint::new(
        last.iter().map(|p| p.x).sum::<f64>() / n,
        last.iter().map(|p| p.y).sum::<f64>() / n,
        last.iter().map(|p| p.z).sum::<f64>() / n,
    );
    let center = index(vertices.len())?;
    vertices.push(centroid);
    for j in 0..samples_angle {
        faces.push([center, id(rings - 1, j)?, id(rings - 1, j + 1)?]);
    }
    let mut mesh = Mesh { vertices, faces };
    if mesh.signed_volume() < 0.0 {
        mesh.flip();
    }
    Ok(mesh)
}

pub fn write_mesh_ply(path: impl AsRef<Path>, mesh: &Mesh, format: PlyFormat) -> Result<()> {
    let mut out = ply_header(format, mesh.vertices.len(), Some(mesh.faces.len())).into_bytes();
    append_vertices(&mut out, &mesh.vertices, format);
    match format {
        PlyFormat::Ascii => {
            let mut s = String::with_capacity(mesh.faces.len() * 24);
            for f in &mesh.faces {
                s.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
            }
            out.extend_from_slice(s.as_bytes());
        }
        PlyFormat::BinaryLittleEndian => {
            for f in &mesh.faces {
                out.push(3);
                for i in f {
                    out.extend_from_slice(&i.to_le_bytes());
                }
            }
        }
    }
    write_atomic(path, &out)
}
