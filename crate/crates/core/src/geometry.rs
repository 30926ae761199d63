//! Vectors, array layouts, GCS to LCS rotation and polarized element patterns.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, GbsmError, Result};

/// A 3D position (m), velocity (m/s) or distance vector in the global frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vector3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vector3 {
    pub const ZERO: Vector3 = Vector3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Point at `distance` along the direction given by azimuth and elevation.
    pub fn from_spherical(distance: f64, azimuth: f64, elevation: f64) -> Self {
        let (sa, ca) = azimuth.sin_cos();
        let (se, ce) = elevation.sin_cos();
        Self::new(distance * ce * ca, distance * ce * sa, distance * se)
    }

    pub fn dot(&self, other: &Vector3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Vector3) -> f64 {
        (*self - *other).norm()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vector3 {
    type Output = Vector3;
    fn add(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vector3 {
    fn add_assign(&mut self, o: Vector3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vector3 {
    type Output = Vector3;
    fn sub(self, o: Vector3) -> Vector3 {
        Vector3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vector3 {
    type Output = Vector3;
    fn neg(self) -> Vector3 {
        Vector3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vector3 {
    type Output = Vector3;
    fn mul(self, s: f64) -> Vector3 {
        Vector3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Orientation of an array's local coordinate system relative to the global one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(pub [[f64; 3]; 3]);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn apply(&self, v: Vector3) -> Vector3 {
        let m = &self.0;
        Vector3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Rotation {
        let m = &self.0;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[j][i];
            }
        }
        Rotation(t)
    }

    pub fn compose(&self, rhs: &Rotation) -> Rotation {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Rotation(out)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }
}

/// `R = Rz(gamma) * Ry(beta) * Rx(alpha)`: rotate about x, then the new y,
/// then the new z.
pub fn rotation_matrix(alpha: f64, beta: f64, gamma: f64) -> Rotation {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let rz = Rotation([[cg, -sg, 0.0], [sg, cg, 0.0], [0.0, 0.0, 1.0]]);
    let ry = Rotation([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]]);
    let rx = Rotation([[1.0, 0.0, 0.0], [0.0, ca, -sa], [0.0, sa, ca]]);
    rz.compose(&ry).compose(&rx)
}

/// Local azimuth `theta` and elevation `phi` of `a - b` seen through `rot`.
///
/// `theta = atan2(y, x)` is measured from the local x axis and
/// `phi = atan2(z, hypot(x, y))` from the local xy plane.
pub fn to_local_angles(a: Vector3, b: Vector3, rot: &Rotation) -> Result<(f64, f64)> {
    let d = a - b;
    if d.norm() == 0.0 {
        return Err(GbsmError::CoincidentPoints);
    }
    let l = rot.apply(d);
    let theta = l.y.atan2(l.x);
    let phi = l.z.atan2(l.x.hypot(l.y));
    Ok((theta, phi))
}

/// Vertical and horizontal field components of one antenna element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizedField {
    pub vertical: f64,
    pub horizontal: f64,
}

/// Tabulated gain on a regular `(theta, phi)` grid, bilinearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternTable {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// Row-major over `thetas`, i.e. `gains[i * phis.len() + j]`.
    pub gains: Vec<f64>,
}

impl PatternTable {
    pub fn new(thetas: Vec<f64>, phis: Vec<f64>, gains: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || phis.is_empty() {
            return Err(GbsmError::EmptyInput("pattern table axes"));
        }
        if gains.len() != thetas.len() * phis.len() {
            return Err(invalid(
                "pattern table",
                format!(
                    "{} gains for a {}x{} grid",
                    gains.len(),
                    thetas.len(),
                    phis.len()
                ),
            ));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&thetas) || !increasing(&phis) {
            return Err(invalid("pattern table", "axes must be strictly increasing"));
        }
        Ok(Self {
            thetas,
            phis,
            gains,
        })
    }

    /// Parse whitespace separated `theta_rad phi_rad gain` rows covering a
    /// full grid. Lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| GbsmError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            if vals.len() != 3 {
                return Err(GbsmError::Parse {
                    line: i + 1,
                    message: format!("expected 3 columns, found {}", vals.len()),
                });
            }
            rows.push((vals[0], vals[1], vals[2]));
        }
        let mut thetas: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut phis: Vec<f64> = rows.iter().map(|r| r.1).collect();
        for axis in [&mut thetas, &mut phis] {
            axis.sort_by(f64::total_cmp);
            axis.dedup();
        }
        if rows.len() != thetas.len() * phis.len() {
            return Err(invalid("pattern table", "rows do not form a complete grid"));
        }
        let mut gains = vec![f64::NAN; rows.len()];
        for (t, p, g) in rows {
            let i = thetas.partition_point(|&v| v < t);
            let j = phis.partition_point(|&v| v < p);
            gains[i * phis.len() + j] = g;
        }
        if gains.iter().any(|g| g.is_nan()) {
            return Err(invalid("pattern table", "duplicate grid rows"));
        }
        Self::new(thetas, phis, gains)
    }

    pub fn gain(&self, theta: f64, phi: f64) -> f64 {
        let (i0, i1, wi) = bracket(&self.thetas, theta);
        let (j0, j1, wj) = bracket(&self.phis, phi);
        let n = self.phis.len();
        let g = |i: usize, j: usize| self.gains[i * n + j];
        let lo = g(i0, j0) * (1.0 - wj) + g(i0, j1) * wj;
        let hi = g(i1, j0) * (1.0 - wj) + g(i1, j1) * wj;
        lo * (1.0 - wi) + hi * wi
    }
}

// Clamped bracketing for bilinear interpolation.
fn bracket(axis: &[f64], x: f64) -> (usize, usize, f64) {
    let last = axis.len() - 1;
    if x <= axis[0] {
        return (0, 0, 0.0);
    }
    if x >= axis[last] {
        return (last, last, 0.0);
    }
    let hi = axis.partition_point(|&v| v <= x);
    let lo = hi - 1;
    (lo, hi, (x - axis[lo]) / (axis[hi] - axis[lo]))
}

/// Element gain pattern.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    #[default]
    Omnidirectional,
    HalfWaveDipole,
    Custom(PatternTable),
}

/// Peak field gain of the half-wave dipole, `sqrt(1.64)`.
pub const DIPOLE_PEAK_GAIN: f64 = 1.280_624_847_486_569_8;

impl PatternKind {
    pub fn gain(&self, theta: f64, phi: f64) -> f64 {
        match self {
            PatternKind::Omnidirectional => 1.0,
            PatternKind::HalfWaveDipole => {
                let s = phi.sin();
                if s.abs() < 1e-9 {
                    0.0
                } else {
                    DIPOLE_PEAK_GAIN * (FRAC_PI_2 * phi.cos()).cos() / s
                }
            }
            PatternKind::Custom(table) => table.gain(theta, phi),
        }
    }
}

/// Field components for the direction `a - b`: `F_H = G cos(theta)`,
/// `F_V = G sin(theta)`.
pub fn field_pattern(kind: &PatternKind, a: Vector3, b: Vector3, rot: &Rotation) -> Result<PolarizedField> {
    let (theta, phi) = to_local_angles(a, b, rot)?;
    Ok(field_from_angles(kind, theta, phi))
}

pub fn field_from_angles(kind: &PatternKind, theta: f64, phi: f64) -> PolarizedField {
    let g = kind.gain(theta, phi);
    let (s, c) = theta.sin_cos();
    PolarizedField {
        vertical: g * s,
        horizontal: g * c,
    }
}

/// An antenna array moving rigidly with constant velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray {
    /// Array center at `t = 0` in the global frame.
    pub center: Vector3,
    /// Element offsets from the array center.
    pub element_offsets: Vec<Vector3>,
    pub broadside_azimuth: f64,
    pub broadside_elevation: f64,
    /// `(alpha, beta, gamma)` for the local coordinate system.
    pub rotation_angles: [f64; 3],
    pub velocity: Vector3,
    pub pattern: PatternKind,
    rotation: Rotation,
}

impl AntennaArray {
    pub fn new(
        center: Vector3,
        element_offsets: Vec<Vector3>,
        broadside_azimuth: f64,
        broadside_elevation: f64,
        rotation_angles: [f64; 3],
        velocity: Vector3,
        pattern: PatternKind,
    ) -> Result<Self> {
        if element_offsets.is_empty() {
            return Err(invalid("element_offsets", "array needs at least one element"));
        }
        let [a, b, g] = rotation_angles;
        Ok(Self {
            center,
            element_offsets,
            broadside_azimuth,
            broadside_elevation,
            rotation_angles,
            velocity,
            pattern,
            rotation: rotation_matrix(a, b, g),
        })
    }

    /// Uniform linear array along the horizontal axis orthogonal to the
    /// broadside azimuth, centered on `center`.
    pub fn linear_axis(broadside_azimuth: f64) -> Vector3 {
        Vector3::new(-broadside_azimuth.sin(), broadside_azimuth.cos(), 0.0)
    }

    pub fn linear_offsets(elements: usize, spacing: f64, broadside_azimuth: f64) -> Vec<Vector3> {
        let axis = Self::linear_axis(broadside_azimuth);
        let mid = (elements as f64 - 1.0) / 2.0;
        (0..elements)
            .map(|k| axis * ((k as f64 - mid) * spacing))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.element_offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.element_offsets.is_empty()
    }

    pub fn rotation(&self) -> &Rotation {
        &self.rotation
    }

    pub fn center_at(&self, t: f64) -> Vector3 {
        self.center + self.velocity * t
    }

    /// Global position of element `index` at time `t`.
    pub fn element_position(&self, index: usize, t: f64) -> Result<Vector3> {
        let off = self
            .element_offsets
            .get(index)
            .ok_or(GbsmError::IndexOutOfRange {
                index,
                len: self.len(),
            })?;
        Ok(self.center + *off + self.velocity * t)
    }

    pub fn positions_at(&self, t: f64) -> Vec<Vector3> {
        let c = self.center_at(t);
        self.element_offsets.iter().map(|o| c + *o).collect()
    }

    pub fn field(&self, a: Vector3, b: Vector3) -> Result<PolarizedField> {
        field_pattern(&self.pattern, a, b, &self.rotation)
    }
}
