use serde::{Deserialize, Serialize};

use crate::error::KernelError;

pub(crate) type Vec3 = [f64; 3];

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Indexed triangle mesh in model units.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Checks indices and drops zero-area triangles.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self, KernelError> {
        if let Some(v) = vertices.iter().find(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(KernelError::Mesh(format!("non-finite vertex {v:?}")));
        }
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= vertices.len())) {
            return Err(KernelError::Mesh(format!(
                "triangle {t:?} references a vertex beyond {}",
                vertices.len()
            )));
        }
        let triangles = triangles
            .into_iter()
            .filter(|t| {
                let [a, b, c] = t.map(|i| vertices[i]);
                norm(cross(sub(b, a), sub(c, a))) > 1e-12
            })
            .collect();
        Ok(TriangleMesh {
            vertices,
            triangles,
        })
    }

    pub fn empty() -> Self {
        TriangleMesh::default()
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|v| self.vertices[v])
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Returns a copy with one more triangle (vertices appended).
    pub fn with_triangle(&self, tri: [Vec3; 3]) -> Result<Self, KernelError> {
        let mut vertices = self.vertices.clone();
        let base = vertices.len();
        vertices.extend(tri);
        let mut triangles = self.triangles.clone();
        triangles.push([base, base + 1, base + 2]);
        TriangleMesh::new(vertices, triangles)
    }

    /// Parses ASCII OFF. Polygons with more than three vertices are fan
    /// triangulated; `#` starts a comment.
    pub fn from_off(text: &str) -> Result<Self, KernelError> {
        let bad = |what: &str| KernelError::Mesh(format!("OFF: {what}"));
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        if tokens.next() != Some("OFF") {
            return Err(bad("missing OFF header"));
        }
        let mut next_num = |what: &str| -> Result<f64, KernelError> {
            tokens
                .next()
                .ok_or_else(|| bad(&format!("unexpected end of file reading {what}")))?
                .parse::<f64>()
                .map_err(|_| bad(&format!("invalid number for {what}")))
        };
        let as_count = |v: f64, what: &str| -> Result<usize, KernelError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(bad(&format!("{what} must be a non-negative integer")))
            }
        };

        let nv = as_count(next_num("vertex count")?, "vertex count")?;
        let nf = as_count(next_num("face count")?, "face count")?;
        let _edges = next_num("edge count")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            vertices.push([next_num("x")?, next_num("y")?, next_num("z")?]);
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let n = as_count(next_num("face arity")?, "face arity")?;
            if n < 3 {
                return Err(bad("face with fewer than 3 vertices"));
            }
            let idx = (0..n)
                .map(|_| next_num("face index").and_then(|v| as_count(v, "face index")))
                .collect::<Result<Vec<_>, _>>()?;
            for i in 1..n - 1 {
                triangles.push([idx[0], idx[i], idx[i + 1]]);
            }
        }
        TriangleMesh::new(vertices, triangles)
    }

    pub fn to_off(&self) -> String {
        let mut s = format!("OFF\n{} {} 0\n", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            s.push_str(&format!("{} {} {}\n", v[0], v[1], v[2]));
        }
        for t in &self.triangles {
            s.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
        }
        s
    }
}

/// Camera pose in model coordinates: position plus intrinsic X-Y-Z Euler
/// angles (radians). The camera looks down its +Z axis with +X right and
/// +Y down in the image.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose6D {
    pub translation: Vec3,
    pub rotation: Vec3,
}

impl Pose6D {
    pub fn new(translation: Vec3, rotation: Vec3) -> Result<Self, KernelError> {
        if translation.iter().chain(&rotation).any(|v| !v.is_finite()) {
            return Err(KernelError::Parameter("pose components must be finite".into()));
        }
        Ok(Pose6D {
            translation,
            rotation,
        })
    }

    /// Camera-to-model rotation `Rx(a) * Ry(b) * Rz(c)`, row-major.
    pub fn rotation_matrix(&self) -> [Vec3; 3] {
        let [a, b, c] = self.rotation;
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let (sc, cc) = c.sin_cos();
        [
            [cb * cc, -cb * sc, sb],
            [ca * sc + sa * sb * cc, ca * cc - sa * sb * sc, -sa * cb],
            [sa * sc - ca * sb * cc, sa * cc + ca * sb * sc, ca * cb],
        ]
    }

    /// Model point to camera coordinates.
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let r = self.rotation_matrix();
        let d = sub(p, self.translation);
        // R^T * d
        [
            r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2],
            r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2],
            r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2],
        ]
    }

    /// The six values as sent over the bus: translation then rotation.
    pub fn to_array(&self) -> [f64; 6] {
        let [x, y, z] = self.translation;
        let [a, b, c] = self.rotation;
        [x, y, z, a, b, c]
    }

    pub fn from_array(v: [f64; 6]) -> Result<Self, KernelError> {
        Pose6D::new([v[0], v[1], v[2]], [v[3], v[4], v[5]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE: &str = "OFF
# unit cube
8 6 12
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 3 2 1
4 4 5 6 7
4 0 1 5 4
4 2 3 7 6
4 0 4 7 3
4 1 2 6 5
";

    #[test]
    fn parses_off_and_triangulates_quads() {
        let m = TriangleMesh::from_off(CUBE).unwrap();
        assert_eq!(m.vertices().len(), 8);
        assert_eq!(m.triangles().len(), 12);
        let again = TriangleMesh::from_off(&m.to_off()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn off_errors() {
        assert!(TriangleMesh::from_off("").is_err());
        assert!(TriangleMesh::from_off("PLY\n").is_err());
        assert!(TriangleMesh::from_off("OFF\n3 1 0\n0 0 0\n1 0 0\n").is_err());
        assert!(TriangleMesh::from_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n").is_err());
    }

    #[test]
    fn degenerate_triangles_dropped() {
        let m = TriangleMesh::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 1, 3], [1, 1, 3]],
        )
        .unwrap();
        assert_eq!(m.triangles(), &[[0, 1, 3]]);
    }

    #[test]
    fn rotation_convention() {
        // Identity pose: camera axes equal model axes.
        let p = Pose6D::new([0.0, 0.0, -5.0], [0.0; 3]).unwrap();
        assert_eq!(p.to_camera([1.0, 2.0, 0.0]), [1.0, 2.0, 5.0]);

        // Quarter turn about Y: the camera's +Z axis points along model +X.
        let p = Pose6D::new([0.0; 3], [0.0, std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        let c = p.to_camera([3.0, 0.0, 0.0]);
        assert!((c[2] - 3.0).abs() < 1e-12 && c[0].abs() < 1e-12);

        // Intrinsic X then Y then Z equals the matrix product Rx*Ry*Rz.
        let p = Pose6D::new([0.0; 3], [0.3, -0.7, 1.1]).unwrap();
        let r = p.rotation_matrix();
        for row in r {
            assert!((dot(row, row) - 1.0).abs() < 1e-12);
        }
        assert!((r[0][2] - (-0.7f64).sin()).abs() < 1e-12);
    }
}
