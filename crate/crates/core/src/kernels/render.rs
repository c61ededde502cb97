//! Depth rendering by rasterization: triangle projection, bounding-box
//! traversal and per-pixel distance with a Z-buffer.

use serde::{Deserialize, Serialize};

use super::exec::run_bands;
use super::mesh::{norm, Pose6D, TriangleMesh};
use super::BandPlan;
use crate::error::KernelError;
use crate::frame::{BitDepth, Frame};

/// Pixel value for rays that hit nothing.
pub const DEPTH_MISS: u16 = u16::MAX;

const MAX_CODE: f64 = (DEPTH_MISS - 1) as f64;

/// Pinhole intrinsics and the depth quantization range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub near: f64,
    pub far: f64,
}

impl Camera {
    /// Square image with the principal point at the centre.
    pub fn square(size: usize, focal: f64) -> Self {
        Camera {
            width: size,
            height: size,
            fx: focal,
            fy: focal,
            cx: size as f64 / 2.0,
            cy: size as f64 / 2.0,
            near: 0.1,
            far: 100.0,
        }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        let finite = [self.fx, self.fy, self.cx, self.cy, self.near, self.far]
            .iter()
            .all(|v| v.is_finite());
        if self.width == 0 || self.height == 0 || !finite || self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(KernelError::Parameter(format!("invalid camera {self:?}")));
        }
        if !(self.near >= 0.0 && self.far > self.near) {
            return Err(KernelError::Parameter(format!(
                "depth range [{}, {}] is empty",
                self.near, self.far
            )));
        }
        Ok(())
    }

    /// Unnormalized ray direction through the centre of pixel (x, y), with
    /// unit Z component.
    pub fn ray(&self, x: usize, y: usize) -> [f64; 3] {
        [
            (x as f64 + 0.5 - self.cx) / self.fx,
            (y as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        ]
    }
}

impl Default for Camera {
    fn default() -> Self {
        Camera::square(1024, 1024.0)
    }
}

/// Linear map of [near, far] onto codes 0..=65534.
pub fn quantize_depth(distance: f64, near: f64, far: f64) -> u16 {
    let t = (distance - near) / (far - near);
    (t * MAX_CODE).round().clamp(0.0, MAX_CODE) as u16
}

struct Projected {
    u: [f64; 3],
    v: [f64; 3],
    inv_z: [f64; 3],
    area: f64,
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

fn edge(ua: f64, va: f64, ub: f64, vb: f64, pu: f64, pv: f64) -> f64 {
    (ub - ua) * (pv - va) - (vb - va) * (pu - ua)
}

/// Centres `i + 0.5` lying in [lo, hi], clipped to 0..n. None if empty.
fn center_span(lo: f64, hi: f64, n: usize) -> Option<(usize, usize)> {
    let first = (lo - 0.5).ceil().max(0.0);
    let last = (hi - 0.5).floor().min(n as f64 - 1.0);
    (first <= last).then(|| (first as usize, last as usize + 1))
}

fn project(mesh: &TriangleMesh, pose: &Pose6D, cam: &Camera) -> Vec<Projected> {
    let mut out = Vec::with_capacity(mesh.triangles().len());
    for t in 0..mesh.triangles().len() {
        let c = mesh.triangle(t).map(|p| pose.to_camera(p));
        // No near-plane clipping: triangles reaching behind the camera are skipped.
        if c.iter().any(|p| p[2] <= 1e-9) {
            continue;
        }
        let u = c.map(|p| cam.fx * p[0] / p[2] + cam.cx);
        let v = c.map(|p| cam.fy * p[1] / p[2] + cam.cy);
        let area = edge(u[0], v[0], u[1], v[1], u[2], v[2]);
        if area.abs() < 1e-12 {
            continue;
        }
        let umin = u.iter().cloned().fold(f64::INFINITY, f64::min);
        let umax = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (Some((x0, x1)), Some((y0, y1))) =
            (center_span(umin, umax, cam.width), center_span(vmin, vmax, cam.height))
        else {
            continue;
        };
        out.push(Projected {
            u,
            v,
            inv_z: c.map(|p| 1.0 / p[2]),
            area,
            x0,
            x1,
            y0,
            y1,
        });
    }
    out
}

fn rasterize(tri: &Projected, cam: &Camera, y: usize, zrow: &mut [f64]) {
    let pv = y as f64 + 0.5;
    let (u, v) = (&tri.u, &tri.v);
    for (x, z) in zrow.iter_mut().enumerate().take(tri.x1).skip(tri.x0) {
        let pu = x as f64 + 0.5;
        let w0 = edge(u[1], v[1], u[2], v[2], pu, pv) / tri.area;
        let w1 = edge(u[2], v[2], u[0], v[0], pu, pv) / tri.area;
        let w2 = edge(u[0], v[0], u[1], v[1], pu, pv) / tri.area;
        if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
            continue;
        }
        // 1/z is affine in screen space, so this is the exact ray/plane hit.
        let inv_z = w0 * tri.inv_z[0] + w1 * tri.inv_z[1] + w2 * tri.inv_z[2];
        if inv_z <= 0.0 {
            continue;
        }
        let dist = norm(cam.ray(x, y)) / inv_z;
        if dist >= cam.near && dist <= cam.far && dist < *z {
            *z = dist;
        }
    }
}

/// Renders the Euclidean camera-to-surface distance per pixel as a 16 bpp
/// frame. Output rows are split into bands per `plan`; any partition gives
/// the same image.
pub fn render_depth(
    mesh: &TriangleMesh,
    pose: &Pose6D,
    camera: &Camera,
    plan: &BandPlan,
) -> Result<Frame, KernelError> {
    camera.validate()?;
    let (w, h) = (camera.width, camera.height);
    let tris = project(mesh, pose, camera);
    let partition = plan.partition(h)?;
    let mut out = vec![DEPTH_MISS as u32; w * h];
    run_bands(plan.executor, &partition, w, &mut out, |rows, band| {
        let mut zbuf = vec![f64::INFINITY; band.len()];
        for tri in tris.iter().filter(|t| t.y0 < rows.end && t.y1 > rows.start) {
            for y in tri.y0.max(rows.start)..tri.y1.min(rows.end) {
                let off = (y - rows.start) * w;
                rasterize(tri, camera, y, &mut zbuf[off..off + w]);
            }
        }
        for (px, &z) in band.iter_mut().zip(&zbuf) {
            if z.is_finite() {
                *px = quantize_depth(z, camera.near, camera.far) as u32;
            }
        }
    });
    Ok(Frame::new(w, h, BitDepth::Sixteen, out)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_at(d: f64, half: f64) -> TriangleMesh {
        TriangleMesh::new(
            vec![[-half, -half, d], [half, -half, d], [half, half, d], [-half, half, d]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn empty_mesh_is_all_miss() {
        let cam = Camera::square(16, 16.0);
        let f = render_depth(&TriangleMesh::empty(), &Pose6D::default(), &cam, &BandPlan::dynamic(4)).unwrap();
        assert!(f.pixels().iter().all(|&p| p == DEPTH_MISS as u32));
        assert_eq!(f.bpp(), BitDepth::Sixteen);
    }

    #[test]
    fn fronto_parallel_square_by_hand() {
        // 8x8 image, f = 8, principal point at the centre: pixel centre
        // (x+0.5, y+0.5) maps to the ray ((x+0.5-4)/8, (y+0.5-4)/8, 1).
        // A square at z = 2 with half-width 0.5 projects to u in [2, 6], so
        // centres 2.5..5.5 (x = 2..=5) are covered.
        let cam = Camera {
            near: 0.0,
            far: 10.0,
            ..Camera::square(8, 8.0)
        };
        let f = render_depth(&square_at(2.0, 0.5), &Pose6D::default(), &cam, &BandPlan::single_worker()).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let covered = (2..=5).contains(&x) && (2..=5).contains(&y);
                let got = f.get(x, y);
                if covered {
                    let (rx, ry) = ((x as f64 + 0.5 - 4.0) / 8.0, (y as f64 + 0.5 - 4.0) / 8.0);
                    let d = 2.0 * (rx * rx + ry * ry + 1.0).sqrt();
                    assert_eq!(got, quantize_depth(d, 0.0, 10.0) as u32, "({x},{y})");
                } else {
                    assert_eq!(got, DEPTH_MISS as u32, "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn quantization_endpoints() {
        assert_eq!(quantize_depth(0.1, 0.1, 100.0), 0);
        assert_eq!(quantize_depth(100.0, 0.1, 100.0), 65534);
        assert_eq!(quantize_depth(1e9, 0.1, 100.0), 65534);
    }

    #[test]
    fn surfaces_outside_depth_range_are_clipped() {
        let cam = Camera::square(8, 8.0);
        let f = render_depth(&square_at(200.0, 100.0), &Pose6D::default(), &cam, &BandPlan::single_worker()).unwrap();
        assert!(f.pixels().iter().all(|&p| p == DEPTH_MISS as u32));
    }

    #[test]
    fn triangles_behind_camera_are_skipped() {
        let cam = Camera::square(8, 8.0);
        let f = render_depth(&square_at(-3.0, 1.0), &Pose6D::default(), &cam, &BandPlan::single_worker()).unwrap();
        assert!(f.pixels().iter().all(|&p| p == DEPTH_MISS as u32));
    }

    #[test]
    fn bad_camera_rejected() {
        let cam = Camera {
            far: 0.05,
            ..Camera::square(8, 8.0)
        };
        assert!(render_depth(&TriangleMesh::empty(), &Pose6D::default(), &cam, &BandPlan::single_worker()).is_err());
    }
}
