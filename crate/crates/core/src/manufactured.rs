//! Manufactured solutions of  curl curl u + u = f  on the unit square.
//!
//! Each case carries the exact field u, its scalar curl, and the load
//! f = (d/dy curl u, -d/dx curl u) + u, all hand-differentiated. Cases 1 and
//! 2 have vanishing tangential trace on the boundary; case 3 does not and
//! exercises the inhomogeneous data path. The closed forms are cross-checked
//! against finite differences in the tests, so a slip in any derivative
//! breaks the build rather than the convergence tables.

use crate::error::MwgError;

#[derive(Debug, Clone, Copy)]
pub struct ManufacturedCase {
    pub id: u8,
    /// True when u . t = 0 on the whole boundary.
    pub homogeneous: bool,
    pub u: fn(f64, f64) -> [f64; 2],
    pub curl_u: fn(f64, f64) -> f64,
    pub f: fn(f64, f64) -> [f64; 2],
}

impl ManufacturedCase {
    /// Tangential boundary data g = u . t at a point with unit tangent `t`.
    pub fn g_t(&self, x: f64, y: f64, t: [f64; 2]) -> f64 {
        let u = (self.u)(x, y);
        u[0] * t[0] + u[1] * t[1]
    }
}

/// Look up one of the three study cases.
pub fn get_case(id: u8) -> Result<ManufacturedCase, MwgError> {
    match id {
        1 => Ok(CASE1),
        2 => Ok(CASE2),
        3 => Ok(CASE3),
        other => Err(MwgError::UnknownCase(other)),
    }
}

/// u = (w, w) with w = x(1-x)y(1-y); u . t = 0 on the boundary.
const CASE1: ManufacturedCase = ManufacturedCase {
    id: 1,
    homogeneous: true,
    u: |x, y| {
        let w = x * (1.0 - x) * y * (1.0 - y);
        [w, w]
    },
    curl_u: |x, y| (1.0 - 2.0 * x) * y * (1.0 - y) - x * (1.0 - x) * (1.0 - 2.0 * y),
    f: |x, y| {
        let w = x * (1.0 - x) * y * (1.0 - y);
        let cross = (1.0 - 2.0 * x) * (1.0 - 2.0 * y);
        [
            cross + 2.0 * x * (1.0 - x) + w,
            2.0 * y * (1.0 - y) + cross + w,
        ]
    },
};

/// u = (e^{x-y} x y (1-x)(1-y), sin(pi x) sin(pi y)); u . t = 0 on the boundary.
const CASE2: ManufacturedCase = ManufacturedCase {
    id: 2,
    homogeneous: true,
    u: |x, y| {
        let e = (x - y).exp();
        let a = x * (1.0 - x);
        let b = y * (1.0 - y);
        [
            e * a * b,
            (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * y).sin(),
        ]
    },
    curl_u: |x, y| {
        let pi = std::f64::consts::PI;
        let e = (x - y).exp();
        let a = x * (1.0 - x);
        let b = y * (1.0 - y);
        let db = 1.0 - 2.0 * y;
        pi * (pi * x).cos() * (pi * y).sin() - e * a * (db - b)
    },
    f: |x, y| {
        let pi = std::f64::consts::PI;
        let e = (x - y).exp();
        let a = x * (1.0 - x);
        let da = 1.0 - 2.0 * x;
        let b = y * (1.0 - y);
        let db = 1.0 - 2.0 * y;
        let sinsin = (pi * x).sin() * (pi * y).sin();
        // d/dy curl u = -pi^2 cos cos ... careful: d/dy [pi cos(pi x) sin(pi y)]
        //             = pi^2 cos(pi x) cos(pi y);
        // d/dy [e a (db - b)] = e a (b - db) + e a (-2 - db)
        //                     = e a (b - 2 db - 2).
        let dcurl_dy = pi * pi * (pi * x).cos() * (pi * y).cos() - e * a * (b - 2.0 * db - 2.0);
        // d/dx curl u = -pi^2 sin sin - e (a + da)(db - b).
        let dcurl_dx = -pi * pi * sinsin - e * (a + da) * (db - b);
        [dcurl_dy + e * a * b, -dcurl_dx + sinsin]
    },
};

/// u = (x^2 y^2, x(1-x)y(1-y)); u . t = x^2 along the top edge, so the
/// tangential data are inhomogeneous.
const CASE3: ManufacturedCase = ManufacturedCase {
    id: 3,
    homogeneous: false,
    u: |x, y| [x * x * y * y, x * (1.0 - x) * y * (1.0 - y)],
    curl_u: |x, y| (1.0 - 2.0 * x) * y * (1.0 - y) - 2.0 * x * x * y,
    f: |x, y| {
        [
            (1.0 - 2.0 * x) * (1.0 - 2.0 * y) - 2.0 * x * x + x * x * y * y,
            2.0 * y * (1.0 - y) + 4.0 * x * y + x * (1.0 - x) * y * (1.0 - y),
        ]
    },
};
