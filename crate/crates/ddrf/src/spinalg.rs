//! Dense complex matrices for few-qubit operators, spin-1/2 algebra, and the
//! closed-form 2x2 Hermitian exponential the propagator code is built on.
//!
//! Conventions: `rot(n, theta) = exp(-i theta n.I) = cos(theta/2) 1 - i
//! sin(theta/2) n.sigma`, spin operators `I_j = sigma_j / 2`, basis ordering
//! `|up> = (1, 0)^T`.

use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

pub type C64 = num_complex::Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Error, PartialEq)]
pub enum SpinAlgError {
    #[error("axis is not unit length: |axis| = {0}")]
    NonUnitAxis(f64),
    #[error("matrix is not Hermitian within tolerance (defect {0:.3e})")]
    NonHermitian(f64),
    #[error("matrix is not unitary within tolerance (defect {0:.3e})")]
    NonUnitary(f64),
    #[error("dimension mismatch: ({0}x{1}) vs ({2}x{3})")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("operation requires a {0}x{0} matrix, got {1}x{2}")]
    BadShape(usize, usize, usize),
}

/// Dense row-major complex matrix. Sized for registers of a few qubits; no
/// attempt is made to scale past dimension ~16.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        CMatrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix, SpinAlgError> {
        if self.cols != other.rows {
            return Err(SpinAlgError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix, SpinAlgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SpinAlgError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x += y;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix, SpinAlgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SpinAlgError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let mut out = self.clone();
        for (x, y) in out.data.iter_mut().zip(&other.data) {
            *x -= y;
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> CMatrix {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= s;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise modulus; used as the working matrix norm throughout.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_abs` of the difference, the distance used by all tolerance checks.
    pub fn distance(&self, other: &CMatrix) -> Result<f64, SpinAlgError> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `max_abs(U^dag U - 1)`; zero for exactly unitary matrices.
    pub fn unitarity_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        let prod = self.dagger().matmul(self).expect("square");
        let id = CMatrix::identity(self.rows);
        prod.sub(&id).expect("same shape").max_abs()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        self.sub(&self.dagger()).expect("same shape").max_abs()
    }

    pub fn col(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Apply a 2x2 matrix to a two-component state vector.
    pub fn mul_vec2(&self, v: [C64; 2]) -> [C64; 2] {
        debug_assert!(self.rows == 2 && self.cols == 2);
        [
            self[(0, 0)] * v[0] + self[(0, 1)] * v[1],
            self[(1, 0)] * v[0] + self[(1, 1)] * v[1],
        ]
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Display for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Kronecker product, left factor on the slow index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            let s = a[(ar, ac)];
            if s == ZERO {
                continue;
            }
            for br in 0..b.rows() {
                for bc in 0..b.cols() {
                    out[(ar * b.rows() + br, ac * b.cols() + bc)] = s * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of factors, first factor slowest.
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    assert!(!factors.is_empty(), "kron_all needs at least one factor");
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = kron(&out, f);
    }
    out
}

/// Spin-1/2 operators `(I_x, I_y, I_z) = (sigma_x, sigma_y, sigma_z) / 2`.
pub fn spin_half_ops() -> (CMatrix, CMatrix, CMatrix) {
    let h = C64::new(0.5, 0.0);
    let ix = CMatrix::from_rows(&[&[ZERO, h], &[h, ZERO]]);
    let iy = CMatrix::from_rows(&[&[ZERO, h * (-I)], &[h * I, ZERO]]);
    let iz = CMatrix::from_rows(&[&[h, ZERO], &[ZERO, -h]]);
    (ix, iy, iz)
}

/// Hermitian 2x2 from coefficients of `c0*1 + cx*I_x + cy*I_y + cz*I_z`.
/// Off-diagonals are mirrored so the result is exactly Hermitian.
pub fn hermitian2(c0: f64, cx: f64, cy: f64, cz: f64) -> CMatrix {
    let lower = C64::new(cx / 2.0, cy / 2.0);
    CMatrix::from_rows(&[
        &[C64::new(c0 + cz / 2.0, 0.0), lower.conj()],
        &[lower, C64::new(c0 - cz / 2.0, 0.0)],
    ])
}

const UNIT_AXIS_TOL: f64 = 1e-12;

/// `exp(-i theta n.I)` for unit axis `n`; rejects axes off unit length by
/// more than 1e-12.
pub fn rot(axis: [f64; 3], theta: f64) -> Result<CMatrix, SpinAlgError> {
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if (norm - 1.0).abs() > UNIT_AXIS_TOL {
        return Err(SpinAlgError::NonUnitAxis(norm));
    }
    Ok(rot_unit(axis, theta))
}

/// `rot` without the axis check, for axes that are unit by construction.
pub(crate) fn rot_unit(axis: [f64; 3], theta: f64) -> CMatrix {
    let (nx, ny, nz) = (axis[0], axis[1], axis[2]);
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    CMatrix::from_rows(&[
        &[C64::new(c, -s * nz), C64::new(-s * ny, -s * nx)],
        &[C64::new(s * ny, -s * nx), C64::new(c, s * nz)],
    ])
}

const HERMITIAN_TOL: f64 = 1e-9;

/// Closed-form `exp(-i H t)` for Hermitian 2x2 `H = a0*1 + a.sigma`:
/// `exp(-i a0 t) (cos(|a| t) 1 - i sin(|a| t) a_hat.sigma)`.
pub fn expm_herm2(h: &CMatrix, t: f64) -> Result<CMatrix, SpinAlgError> {
    if !(h.rows() == 2 && h.cols() == 2) {
        return Err(SpinAlgError::BadShape(2, h.rows(), h.cols()));
    }
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(SpinAlgError::NonHermitian(defect));
    }
    let a0 = (h[(0, 0)].re + h[(1, 1)].re) / 2.0;
    let az = (h[(0, 0)].re - h[(1, 1)].re) / 2.0;
    let ax = h[(1, 0)].re;
    let ay = h[(1, 0)].im;
    let a = (ax * ax + ay * ay + az * az).sqrt();
    let phase = C64::from_polar(1.0, -a0 * t);
    if a == 0.0 {
        return Ok(CMatrix::identity(2).scale(phase));
    }
    let u = rot_unit([ax / a, ay / a, az / a], 2.0 * a * t);
    Ok(u.scale(phase))
}

/// Axis-angle decomposition `U = exp(i phase) rot(axis, angle)` of a 2x2
/// unitary, with `angle` canonicalized into `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: [f64; 3],
    pub angle: f64,
    pub phase: f64,
}

impl AxisAngle {
    pub fn matrix(&self) -> CMatrix {
        rot_unit(self.axis, self.angle).scale(C64::from_polar(1.0, self.phase))
    }
}

const UNITARY_TOL: f64 = 1e-9;
const AXIS_TIE_TOL: f64 = 1e-9;

/// Extract axis, angle, and global phase from a 2x2 unitary.
///
/// Near angle 0 the axis is reported as +z; at the angle = pi branch point the
/// axis sign is fixed by requiring its first nonzero component positive.
pub fn axis_angle_of(u: &CMatrix) -> Result<AxisAngle, SpinAlgError> {
    if !(u.rows() == 2 && u.cols() == 2) {
        return Err(SpinAlgError::BadShape(2, u.rows(), u.cols()));
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(SpinAlgError::NonUnitary(defect));
    }
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let mut phase = det.arg() / 2.0;
    let v = u.scale(C64::from_polar(1.0, -phase));
    // v = cos(angle/2) 1 - i sin(angle/2) n.sigma up to rounding
    let a = (v[(0, 0)].re + v[(1, 1)].re) / 2.0;
    let m00 = I * (v[(0, 0)] - C64::new(a, 0.0));
    let m10 = I * v[(1, 0)];
    let (vx, vy, vz) = (m10.re, m10.im, m00.re);
    let s = (vx * vx + vy * vy + vz * vz).sqrt();
    let mut angle = 2.0 * s.atan2(a);
    let mut axis = if s < 1e-12 {
        [0.0, 0.0, 1.0]
    } else {
        [vx / s, vy / s, vz / s]
    };
    if angle > std::f64::consts::PI {
        angle = 2.0 * std::f64::consts::PI - angle;
        axis = [-axis[0], -axis[1], -axis[2]];
        phase += std::f64::consts::PI;
    }
    if (angle - std::f64::consts::PI).abs() < AXIS_TIE_TOL {
        // rot(n, pi) = -rot(-n, pi): fix the sign convention at the branch tie
        let flip = if axis[0].abs() > AXIS_TIE_TOL {
            axis[0] < 0.0
        } else if axis[1].abs() > AXIS_TIE_TOL {
            axis[1] < 0.0
        } else {
            axis[2] < 0.0
        };
        if flip {
            axis = [-axis[0], -axis[1], -axis[2]];
            phase += std::f64::consts::PI;
        }
    }
    let tau = 2.0 * std::f64::consts::PI;
    phase = phase.rem_euclid(tau);
    if phase > std::f64::consts::PI {
        phase -= tau;
    }
    Ok(AxisAngle { axis, angle, phase })
}
