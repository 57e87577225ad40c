//! Small fixed-size vector/matrix helpers. Dimensions up to 4 are stored in
//! `[f64; 4]` padded with zeros so that d = 3 and d = 4 share one code path.

pub type Vec4 = [f64; 4];
pub type Mat4 = [[f64; 4]; 4];

pub const ZERO_VEC: Vec4 = [0.0; 4];
pub const ZERO_MAT: Mat4 = [[0.0; 4]; 4];

pub fn dot(a: &Vec4, b: &Vec4) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn norm(a: &Vec4) -> f64 {
    dot(a, a).sqrt()
}

pub fn scale(a: &Vec4, s: f64) -> Vec4 {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

pub fn add(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[allow(dead_code)] // exercised by the geometry tests
pub fn sub(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn axpy(y: &mut Vec4, alpha: f64, x: &Vec4) {
    for i in 0..4 {
        y[i] += alpha * x[i];
    }
}

/// `alpha (a b^t + b a^t)` accumulated into `m`.
pub fn add_sym_outer(m: &mut Mat4, alpha: f64, a: &Vec4, b: &Vec4) {
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += alpha * (a[i] * b[j] + b[i] * a[j]);
        }
    }
}

/// `alpha a a^t` accumulated into `m`.
pub fn add_outer(m: &mut Mat4, alpha: f64, a: &Vec4) {
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += alpha * a[i] * a[j];
        }
    }
}

pub fn mat_add(m: &mut Mat4, alpha: f64, other: &Mat4) {
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += alpha * other[i][j];
        }
    }
}

pub fn mat_vec(m: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = ZERO_VEC;
    for i in 0..4 {
        for j in 0..4 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

pub fn frobenius_sq(m: &Mat4) -> f64 {
    let mut s = 0.0;
    for row in m {
        for &v in row {
            s += v * v;
        }
    }
    s
}

pub fn trace(m: &Mat4) -> f64 {
    m[0][0] + m[1][1] + m[2][2] + m[3][3]
}
