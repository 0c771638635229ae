//! Small fixed-size matrices: SU(2) propagators and SO(3) rotors.

use num_complex::Complex64;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    /// `exp(-i h (v . sigma))` for a real 3-vector `v`.
    pub fn exp_pauli(v: [f64; 3], h: f64) -> Mat2 {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let angle = norm * h;
        if norm == 0.0 || angle == 0.0 {
            return Mat2::IDENTITY;
        }
        let (s, c) = angle.sin_cos();
        let (nx, ny, nz) = (v[0] / norm, v[1] / norm, v[2] / norm);
        // cos(a) I - i sin(a) (n . sigma)
        Mat2([
            [C64::new(c, -s * nz), C64::new(-s * ny, -s * nx)],
            [C64::new(s * ny, -s * nx), C64::new(c, s * nz)],
        ])
    }

    /// Rotation `exp(-i theta (cos phi sigma_x + sin phi sigma_y) / 2)`.
    pub fn rotation(theta: f64, phi: f64) -> Mat2 {
        Mat2::exp_pauli([phi.cos(), phi.sin(), 0.0], theta / 2.0)
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    pub fn adjoint(&self) -> Mat2 {
        let a = &self.0;
        Mat2([[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Frobenius norm of `U^dagger U - I`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { ONE } else { ZERO };
                acc += (p.0[i][j] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `1 - |Tr(self^dagger other)|^2 / 4`, evaluated without cancellation for
    /// near-identical SU(2) elements.
    pub fn infidelity_to(&self, other: &Mat2) -> f64 {
        let v = self.adjoint().mul(other);
        // project onto the SU(2) form [[a, -b*], [b, a*]]
        let a = (v.0[0][0] + v.0[1][1].conj()) * 0.5;
        let b = (v.0[1][0] - v.0[0][1].conj()) * 0.5;
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm == 0.0 {
            return 1.0;
        }
        let (a, b) = (a / norm, b / norm);
        (a.im * a.im + b.norm_sqr()).clamp(0.0, 1.0)
    }

    /// Gate fidelity `|Tr(self^dagger other)|^2 / 4`.
    pub fn fidelity_to(&self, other: &Mat2) -> f64 {
        1.0 - self.infidelity_to(other)
    }

    /// Trace distance up to global phase, `sqrt(1 - |Tr(A^dagger B)|^2/4)`.
    pub fn phase_distance(&self, other: &Mat2) -> f64 {
        self.infidelity_to(other).sqrt()
    }

    /// Population `|<1| U |0>|^2`.
    pub fn population_up(&self) -> f64 {
        self.0[1][0].norm_sqr()
    }

    pub fn apply(&self, psi: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * psi[0] + self.0[0][1] * psi[1],
            self.0[1][0] * psi[0] + self.0[1][1] * psi[1],
        ]
    }
}

/// 3x3 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Rodrigues rotation by `angle` about the unit vector `axis`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Mat3 {
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        let [x, y, z] = axis;
        Mat3([
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ])
    }

    pub fn mul(&self, rhs: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    pub fn transpose(&self) -> Mat3 {
        let a = &self.0;
        Mat3([[a[0][0], a[1][0], a[2][0]], [a[0][1], a[1][1], a[2][1]], [a[0][2], a[1][2], a[2][2]]])
    }

    /// `v^T M`, i.e. a row vector times this matrix.
    pub fn left_mul(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| v[k] * self.0[k][j]).sum();
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Frobenius norm of `M M^T - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let p = self.mul(&self.transpose());
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d = p.0[i][j] - if i == j { 1.0 } else { 0.0 };
                acc += d * d;
            }
        }
        acc.sqrt()
    }
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
