//! Z-buffered triangle rasterizer.
//!
//! Coverage: a pixel belongs to a triangle iff its center lies inside the
//! projected triangle, with a top-left fill rule for centers exactly on an
//! edge, so shared edges are partition-exact and coverage is deterministic.
//! Depth and UV interpolation are perspective-correct (1/z-weighted).
//! Back-face culling is disabled; the z-buffer resolves orientation.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::{Point2, Vector3};

use crate::error::{CoreError, Result};
use crate::geometry::{Camera, Mesh};
use crate::texture::TextureMap;

/// Sentinel face index for background pixels.
pub const BACKGROUND_FACE: usize = usize::MAX;

/// Per-pixel output buffers of one rasterization pass, row-major.
#[derive(Debug, Clone)]
pub struct RenderBuffers {
    pub width: usize,
    pub height: usize,
    /// Foreground mask; equals `face_id != BACKGROUND_FACE` per pixel.
    pub silhouette: Vec<bool>,
    /// Camera-space depth; `f64::INFINITY` on background.
    pub depth: Vec<f64>,
    pub face_id: Vec<usize>,
    /// Screen-space barycentric triple (non-negative, sums to 1 on foreground).
    pub bary: Vec<[f64; 3]>,
    /// Perspective-correct interpolated texture coordinate.
    pub uv: Vec<[f64; 2]>,
    /// 8-bit RGB shading output, present when a texture or light was supplied.
    pub color: Option<Vec<[u8; 3]>>,
}

impl RenderBuffers {
    fn background(width: usize, height: usize, with_color: bool) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            silhouette: vec![false; n],
            depth: vec![f64::INFINITY; n],
            face_id: vec![BACKGROUND_FACE; n],
            bary: vec![[0.0; 3]; n],
            uv: vec![[0.0; 2]; n],
            color: with_color.then(|| vec![[0u8; 3]; n]),
        }
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Number of foreground pixels.
    pub fn coverage(&self) -> usize {
        self.silhouette.iter().filter(|&&s| s).count()
    }

    /// Tight bounds of the silhouette as (x1, y1, x2, y2) in pixel units,
    /// or `None` when the silhouette is empty.
    pub fn silhouette_bbox(&self) -> Option<[f64; 4]> {
        let mut min_x = usize::MAX;
        let mut min_y = usize::MAX;
        let mut max_x = 0usize;
        let mut max_y = 0usize;
        let mut any = false;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.silhouette[y * self.width + x] {
                    any = true;
                    min_x = min_x.min(x);
                    min_y = min_y.min(y);
                    max_x = max_x.max(x);
                    max_y = max_y.max(y);
                }
            }
        }
        any.then(|| [min_x as f64, min_y as f64, (max_x + 1) as f64, (max_y + 1) as f64])
    }
}

/// Edge function: twice the signed area of (a, b, p).
#[inline]
fn edge(a: Point2<f64>, b: Point2<f64>, px: f64, py: f64) -> f64 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

/// Top-left rule for a pixel center exactly on an edge with direction `d`
/// (screen coordinates, y down, positive-area winding).
#[inline]
fn edge_accepts_boundary(dx: f64, dy: f64) -> bool {
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

/// Rasterize a mesh with a pinhole camera into `width x height` buffers.
///
/// Fails if any vertex lies at or behind the camera plane (no clipping).
/// With `texture` only, the color output is the unlit texel; with `light`
/// (a unit direction) the output is `texel * max(0, n.l) + 0.2`, clamped.
pub fn rasterize(
    mesh: &Mesh,
    camera: &Camera,
    size: (usize, usize),
    texture: Option<&TextureMap>,
    light: Option<Vector3<f64>>,
) -> Result<RenderBuffers> {
    let (width, height) = size;
    let mut buf = RenderBuffers::background(width, height, texture.is_some() || light.is_some());
    if mesh.faces.is_empty() {
        return Ok(buf);
    }

    let mut screen = Vec::with_capacity(mesh.vertices.len());
    let mut inv_z = Vec::with_capacity(mesh.vertices.len());
    for v in &mesh.vertices {
        let cam_p = camera.to_camera(v);
        if cam_p.z <= 0.0 {
            return Err(CoreError::Render(format!(
                "vertex at camera depth {} cannot be rasterized (no clipping)",
                cam_p.z
            )));
        }
        screen.push(camera.project(v)?);
        inv_z.push(1.0 / cam_p.z);
    }

    for (face_id, face) in mesh.faces.iter().enumerate() {
        let [i0, i1, i2] = *face;
        let (a, mut b, mut c) = (screen[i0], screen[i1], screen[i2]);
        let (iz0, mut iz1, mut iz2) = (inv_z[i0], inv_z[i1], inv_z[i2]);
        let (uv0, mut uv1, mut uv2) = (mesh.uv[i0], mesh.uv[i1], mesh.uv[i2]);
        let mut area2 = edge(a, b, c.x, c.y);
        // Swap to positive winding so one fill rule covers both orientations.
        let mut swapped = false;
        if area2 < 0.0 {
            core::mem::swap(&mut b, &mut c);
            core::mem::swap(&mut iz1, &mut iz2);
            core::mem::swap(&mut uv1, &mut uv2);
            area2 = -area2;
            swapped = true;
        }
        if area2 == 0.0 {
            continue;
        }

        let min_x = (a.x.min(b.x).min(c.x) - 0.5).floor().max(0.0) as usize;
        let max_x = ((a.x.max(b.x).max(c.x) - 0.5).ceil() as isize).min(width as isize - 1);
        let min_y = (a.y.min(b.y).min(c.y) - 0.5).floor().max(0.0) as usize;
        let max_y = ((a.y.max(b.y).max(c.y) - 0.5).ceil() as isize).min(height as isize - 1);
        if max_x < min_x as isize || max_y < min_y as isize {
            continue;
        }

        let accept0 = edge_accepts_boundary(c.x - b.x, c.y - b.y); // opposite vertex a
        let accept1 = edge_accepts_boundary(a.x - c.x, a.y - c.y); // opposite vertex b
        let accept2 = edge_accepts_boundary(b.x - a.x, b.y - a.y); // opposite vertex c

        for y in min_y..=(max_y as usize) {
            let py = y as f64 + 0.5;
            for x in min_x..=(max_x as usize) {
                let px = x as f64 + 0.5;
                let e0 = edge(b, c, px, py);
                let e1 = edge(c, a, px, py);
                let e2 = edge(a, b, px, py);
                let inside = (e0 > 0.0 || (e0 == 0.0 && accept0))
                    && (e1 > 0.0 || (e1 == 0.0 && accept1))
                    && (e2 > 0.0 || (e2 == 0.0 && accept2));
                if !inside {
                    continue;
                }
                let l0 = e0 / area2;
                let l1 = e1 / area2;
                let l2 = e2 / area2;
                let denom = l0 * iz0 + l1 * iz1 + l2 * iz2;
                let z = 1.0 / denom;
                let idx = y * width + x;
                let closer = z < buf.depth[idx]
                    || (z == buf.depth[idx] && face_id < buf.face_id[idx]);
                if !closer {
                    continue;
                }
                let u = (l0 * uv0.x * iz0 + l1 * uv1.x * iz1 + l2 * uv2.x * iz2) / denom;
                let v = (l0 * uv0.y * iz0 + l1 * uv1.y * iz1 + l2 * uv2.y * iz2) / denom;
                buf.depth[idx] = z;
                buf.face_id[idx] = face_id;
                buf.silhouette[idx] = true;
                // Report barycentrics in the mesh's vertex order.
                buf.bary[idx] = if swapped { [l0, l2, l1] } else { [l0, l1, l2] };
                buf.uv[idx] = [u, v];
            }
        }
    }

    if let Some(color) = buf.color.as_mut() {
        // Face normals from the original winding (parts are built outward).
        let shade: Vec<f64> = match light {
            Some(l) => mesh
                .faces
                .iter()
                .map(|f| {
                    let n = (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                        .cross(&(mesh.vertices[f[2]] - mesh.vertices[f[0]]));
                    let norm = n.norm();
                    if norm == 0.0 {
                        0.0
                    } else {
                        (n.dot(&l) / norm).max(0.0)
                    }
                })
                .collect(),
            None => vec![1.0; mesh.faces.len()],
        };
        let ambient = if light.is_some() { 0.2 } else { 0.0 };
        for idx in 0..width * height {
            if !buf.silhouette[idx] {
                continue;
            }
            let base = match texture {
                Some(t) => t.sample_nearest(buf.uv[idx][0], buf.uv[idx][1]),
                None => [0.75, 0.75, 0.75],
            };
            let s = shade[buf.face_id[idx]];
            let mut px = [0u8; 3];
            for ch in 0..3 {
                let v = base[ch] * s + ambient;
                px[ch] = libm::round(v.clamp(0.0, 1.0) * 255.0) as u8;
            }
            color[idx] = px;
        }
    }

    Ok(buf)
}
