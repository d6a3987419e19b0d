//! Small fixed-size linear algebra used throughout the crate.

use alloc::vec::Vec;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// `det(a, b, c) = <a, b × c>`.
#[inline]
pub fn det3(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    dot(a, &cross(b, c))
}

/// A 2×2 matrix in row-major order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn symmetric(a: f64, b: f64, c: f64) -> Self {
        Mat2([[a, b], [b, c]])
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[a, 0.0], [0.0, b]])
    }

    #[inline]
    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        let scale = self.max_abs();
        if !d.is_finite() || scale == 0.0 || libm::fabs(d) <= 1e-300 + 1e-15 * scale * scale {
            return None;
        }
        let m = &self.0;
        Some(Mat2([
            [m[1][1] / d, -m[0][1] / d],
            [-m[1][0] / d, m[0][0] / d],
        ]))
    }

    pub fn max_abs(&self) -> f64 {
        let m = &self.0;
        libm::fmax(
            libm::fmax(libm::fabs(m[0][0]), libm::fabs(m[0][1])),
            libm::fmax(libm::fabs(m[1][0]), libm::fabs(m[1][1])),
        )
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &other.0;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    #[inline]
    pub fn apply(&self, x: &[f64; 2]) -> [f64; 2] {
        [
            self.0[0][0] * x[0] + self.0[0][1] * x[1],
            self.0[1][0] * x[0] + self.0[1][1] * x[1],
        ]
    }

    /// Bilinear form `xᵀ M y`.
    #[inline]
    pub fn form(&self, x: &[f64; 2], y: &[f64; 2]) -> f64 {
        let my = self.apply(y);
        x[0] * my[0] + x[1] * my[1]
    }

    pub fn scaled(&self, s: f64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn add(&self, other: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &other.0;
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    pub fn sub(&self, other: &Mat2) -> Mat2 {
        self.add(&other.scaled(-1.0))
    }
}

/// Dense least squares `min |A x - b|` by Householder QR.
///
/// `rows` holds the design matrix row by row; every row has `cols` entries.
/// Returns `None` when the design is rank deficient.
pub fn least_squares(rows: &[Vec<f64>], rhs: &[f64], cols: usize) -> Option<Vec<f64>> {
    let m = rows.len();
    if m < cols || rhs.len() != m {
        return None;
    }
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut b: Vec<f64> = rhs.to_vec();
    for k in 0..cols {
        let mut norm2 = 0.0;
        for row in a.iter().skip(k) {
            norm2 += row[k] * row[k];
        }
        let alpha = libm::sqrt(norm2);
        if alpha < 1e-300 {
            return None;
        }
        let alpha = if a[k][k] > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = a.iter().skip(k).map(|row| row[k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..cols {
            let s: f64 = v.iter().zip(a.iter().skip(k)).map(|(vi, row)| vi * row[j]).sum();
            let f = 2.0 * s / vnorm2;
            for (vi, row) in v.iter().zip(a.iter_mut().skip(k)) {
                row[j] -= f * vi;
            }
        }
        let s: f64 = v.iter().zip(b.iter().skip(k)).map(|(vi, bi)| vi * bi).sum();
        let f = 2.0 * s / vnorm2;
        for (vi, bi) in v.iter().zip(b.iter_mut().skip(k)) {
            *bi -= f * vi;
        }
    }
    let mut x = alloc::vec![0.0; cols];
    for k in (0..cols).rev() {
        let diag = a[k][k];
        if libm::fabs(diag) < 1e-14 * libm::fabs(a[0][0]).max(1e-300) {
            return None;
        }
        let mut s = b[k];
        for j in k + 1..cols {
            s -= a[k][j] * x[j];
        }
        x[k] = s / diag;
    }
    Some(x)
}
