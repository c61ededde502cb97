//! Independent reference implementations shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use copro::kernels::{Camera, Pose6D, TriangleMesh, DEPTH_MISS};
use copro::{BitDepth, Frame};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const CUBE_OFF: &str = include_str!("../../../../fixtures/meshes/cube.off");

/// Bitwise CRC-16/XMODEM straight from the polynomial definition.
pub fn crc_bitwise(bytes: &[u8]) -> u16 {
    let mut crc: u16 = 0;
    for &b in bytes {
        for i in (0..8).rev() {
            let bit = ((b >> i) & 1) as u16;
            let top = crc >> 15;
            crc <<= 1;
            if top ^ bit == 1 {
                crc ^= 0x1021;
            }
        }
    }
    crc
}

pub fn random_frame(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Frame {
    let px = (0..w * h).map(|_| rng.gen_range(0..=255)).collect();
    Frame::new(w, h, BitDepth::Eight, px).unwrap()
}

/// Quadruple loop over an explicitly zero-padded copy of the image.
pub fn naive_convolution(f: &Frame, k: usize, weights: &[f32]) -> Vec<u32> {
    let (w, h) = (f.width(), f.height());
    let r = k / 2;
    let pw = w + 2 * r;
    let mut padded = vec![0.0f32; pw * (h + 2 * r)];
    for y in 0..h {
        for x in 0..w {
            padded[(y + r) * pw + x + r] = f.get(x, y) as f32;
        }
    }
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f32;
            for ky in 0..k {
                for kx in 0..k {
                    acc += padded[(y + ky) * pw + x + kx] * weights[ky * k + kx];
                }
            }
            out.push(acc.round().clamp(0.0, 255.0) as u32);
        }
    }
    out
}

pub fn binning_oracle(f: &Frame) -> Vec<u32> {
    let mut out = Vec::new();
    for y in (0..f.height()).step_by(2) {
        for x in (0..f.width()).step_by(2) {
            let s = f.get(x, y) + f.get(x + 1, y) + f.get(x, y + 1) + f.get(x + 1, y + 1);
            out.push(s / 4);
        }
    }
    out
}

pub type V3 = [f64; 3];

pub fn mat_mul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    m
}

/// Camera-to-model rotation built from the three elementary rotations.
pub fn rotation(r: V3) -> [[f64; 3]; 3] {
    let (sa, ca) = r[0].sin_cos();
    let (sb, cb) = r[1].sin_cos();
    let (sc, cc) = r[2].sin_cos();
    let rx = [[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]];
    let ry = [[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]];
    let rz = [[cc, -sc, 0.0], [sc, cc, 0.0], [0.0, 0.0, 1.0]];
    mat_mul(mat_mul(rx, ry), rz)
}

pub fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
pub fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
pub fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Möller–Trumbore ray/triangle intersection; returns the ray parameter.
pub fn intersect(orig: V3, dir: V3, tri: [V3; 3]) -> Option<f64> {
    let e1 = sub(tri[1], tri[0]);
    let e2 = sub(tri[2], tri[0]);
    let p = cross(dir, e2);
    let det = dot(e1, p);
    if det.abs() < 1e-12 {
        return None;
    }
    let inv = 1.0 / det;
    let s = sub(orig, tri[0]);
    let u = dot(s, p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = cross(s, e1);
    let v = dot(dir, q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = dot(e2, q) * inv;
    (t > 0.0).then_some(t)
}

/// Casts one model-space ray per pixel centre and keeps the nearest hit.
pub fn raycast(mesh: &TriangleMesh, pose: &Pose6D, cam: &Camera) -> Vec<u16> {
    let r = rotation(pose.rotation);
    let mut out = Vec::with_capacity(cam.width * cam.height);
    for y in 0..cam.height {
        for x in 0..cam.width {
            let d_cam = [
                (x as f64 + 0.5 - cam.cx) / cam.fx,
                (y as f64 + 0.5 - cam.cy) / cam.fy,
                1.0,
            ];
            let dir = [dot(r[0], d_cam), dot(r[1], d_cam), dot(r[2], d_cam)];
            let len = dot(dir, dir).sqrt();
            let best = (0..mesh.triangles().len())
                .filter_map(|i| intersect(pose.translation, dir, mesh.triangle(i)))
                .map(|t| t * len)
                .filter(|&d| d >= cam.near && d <= cam.far)
                .fold(f64::INFINITY, f64::min);
            out.push(if best.is_finite() {
                ((best - cam.near) / (cam.far - cam.near) * 65534.0).round().min(65534.0) as u16
            } else {
                DEPTH_MISS
            });
        }
    }
    out
}

/// The same six layers in plain f32, with no intermediate rounding.
pub fn cnn_f32(tensors: &[Vec<f32>], patch: &[f32]) -> f32 {
    fn conv(input: &[f32], cin: usize, n: usize, w: &[f32], b: &[f32], cout: usize) -> Vec<f32> {
        let mut out = vec![0.0; cout * n * n];
        for o in 0..cout {
            for y in 0..n {
                for x in 0..n {
                    let mut acc = b[o];
                    for c in 0..cin {
                        for ky in 0..3 {
                            for kx in 0..3 {
                                let (sy, sx) = (y + ky, x + kx);
                                if sy == 0 || sx == 0 || sy > n || sx > n {
                                    continue;
                                }
                                acc += input[(c * n + sy - 1) * n + sx - 1] * w[((o * cin + c) * 3 + ky) * 3 + kx];
                            }
                        }
                    }
                    out[(o * n + y) * n + x] = acc.max(0.0);
                }
            }
        }
        out
    }
    fn pool(input: &[f32], ch: usize, n: usize, k: usize) -> Vec<f32> {
        let m = n.div_ceil(k);
        let mut out = Vec::with_capacity(ch * m * m);
        for c in 0..ch {
            for oy in 0..m {
                for ox in 0..m {
                    let mut best = f32::NEG_INFINITY;
                    for y in oy * k..((oy + 1) * k).min(n) {
                        for x in ox * k..((ox + 1) * k).min(n) {
                            best = best.max(input[(c * n + y) * n + x]);
                        }
                    }
                    out.push(best);
                }
            }
        }
        out
    }
    let a = conv(patch, 3, 128, &tensors[0], &tensors[1], 8);
    let a = pool(&a, 8, 128, 4);
    let a = conv(&a, 8, 32, &tensors[2], &tensors[3], 16);
    let a = pool(&a, 16, 32, 3);
    let hidden: Vec<f32> = (0..64)
        .map(|o| {
            let row = &tensors[4][o * a.len()..(o + 1) * a.len()];
            (tensors[5][o] + row.iter().zip(&a).map(|(w, x)| w * x).sum::<f32>()).max(0.0)
        })
        .collect();
    let logit = tensors[7][0] + tensors[6].iter().zip(&hidden).map(|(w, x)| w * x).sum::<f32>();
    1.0 / (1.0 + (-logit).exp())
}
