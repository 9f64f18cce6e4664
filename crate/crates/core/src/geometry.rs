//! Polar and hyperspherical offsets around a center point.
//!
//! Angles follow the usual hyperspherical convention: for `n` dimensions
//! there are `n - 1` angles, the first `n - 2` in `[0, pi]` and the last in
//! `[0, 2pi)`. In two dimensions this is the ordinary polar angle.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// Below this radius the direction is meaningless and the zero offset is returned.
pub const ZERO_RADIUS: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Center(Vec<f64>);

impl Center {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::usage(format!(
                "center needs at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::usage("center coordinates must be finite"));
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Center {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Center::new(v)
    }
}

impl From<Center> for Vec<f64> {
    fn from(c: Center) -> Self {
        c.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarOffset {
    pub r: f64,
    pub angles: Vec<f64>,
}

impl PolarOffset {
    pub fn new(r: f64, angles: Vec<f64>) -> Self {
        Self { r, angles }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            r: 0.0,
            angles: vec![0.0; dim.saturating_sub(1)],
        }
    }

    /// The polar angle in 2-D, or the last hyperspherical angle otherwise.
    pub fn phi(&self) -> f64 {
        self.angles.last().copied().unwrap_or(0.0)
    }

    pub fn dim(&self) -> usize {
        self.angles.len() + 1
    }
}

/// Maps an angle onto `[0, 2pi)`.
pub fn wrap_angle(phi: f64) -> f64 {
    let mut a = phi % TAU;
    if a < 0.0 {
        a += TAU;
    }
    // -tiny + 2pi rounds to 2pi
    if a >= TAU {
        a = 0.0;
    }
    a
}

/// `(sin, cos)` that is exact on the quarter turns `k * pi/2`.
///
/// Without this, `sin(pi)` is about 1.2e-16 and the "axis" ray at `pi` is
/// really the line `y = 1.2e-16 x`, which matters for functions that are
/// sensitive to `y / x^2` near the axis.
pub fn sin_cos(a: f64) -> (f64, f64) {
    const QUARTERS: [(f64, f64); 4] = [(0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0)];
    for (k, sc) in QUARTERS.iter().enumerate() {
        if a == k as f64 * FRAC_PI_2 {
            return *sc;
        }
    }
    a.sin_cos()
}

/// Unit direction for the given hyperspherical angles (no center, r = 1).
pub fn direction(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut prod = 1.0;
    for a in angles {
        let (s, c) = sin_cos(*a);
        out.push(prod * c);
        prod *= s;
    }
    out.push(prod);
    out
}

pub fn from_polar(center: &Center, offset: &PolarOffset) -> Result<Vec<f64>> {
    check_dim(center.dim(), offset.dim())?;
    // one code path for every n; for n = 2 this is (r cos phi, r sin phi)
    let mut out = Vec::with_capacity(center.dim());
    let mut prod = offset.r;
    for (c, a) in center.coords().iter().zip(&offset.angles) {
        let (s, co) = sin_cos(*a);
        out.push(c + prod * co);
        prod *= s;
    }
    out.push(center.coords()[center.dim() - 1] + prod);
    Ok(out)
}

pub fn to_polar(center: &Center, point: &[f64]) -> Result<PolarOffset> {
    check_dim(center.dim(), point.len())?;
    let d: Vec<f64> = point.iter().zip(center.coords()).map(|(p, c)| p - c).collect();
    let r = norm(&d);
    let n = d.len();
    if !(r >= ZERO_RADIUS) {
        return Ok(PolarOffset::zero(n));
    }
    let mut angles = Vec::with_capacity(n - 1);
    // tail[k] = |(d_k, ..., d_n)|
    let mut tail = vec![0.0_f64; n + 1];
    for k in (0..n).rev() {
        tail[k] = tail[k + 1].hypot(d[k]);
    }
    for k in 0..n.saturating_sub(2) {
        angles.push(tail[k + 1].atan2(d[k]));
    }
    angles.push(wrap_angle(d[n - 1].atan2(d[n - 2])));
    Ok(PolarOffset { r, angles })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.hypot(*x))
}

pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(a.len(), b.len())?;
    Ok(a.iter().zip(b).fold(0.0_f64, |acc, (x, y)| acc.hypot(x - y)))
}

/// Circular distance between two angles, in `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (wrap_angle(a) - wrap_angle(b)).abs();
    d.min(TAU - d)
}

/// Deterministic grid of at least `count` unit directions in `dim` dimensions.
///
/// In 2-D these are the angles `2pi j / count`. In higher dimensions each of
/// the `dim - 1` angles gets `ceil(count^(1/(dim-1)))` values; the polar-type
/// angles sit at cell midpoints of `[0, pi]` so no direction is degenerate.
pub fn direction_grid(dim: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 2);
    let count = count.max(1);
    if dim == 2 {
        return (0..count)
            .map(|j| vec![TAU * j as f64 / count as f64])
            .collect();
    }
    let axes = dim - 1;
    let mut per = (count as f64).powf(1.0 / axes as f64).ceil() as usize;
    while per.pow(axes as u32) < count {
        per += 1;
    }
    let total = per.pow(axes as u32);
    (0..total)
        .map(|mut code| {
            let mut angles = Vec::with_capacity(axes);
            for axis in 0..axes {
                let j = code % per;
                code /= per;
                let a = if axis + 1 == axes {
                    TAU * j as f64 / per as f64
                } else {
                    PI * (j as f64 + 0.5) / per as f64
                };
                angles.push(a);
            }
            angles
        })
        .collect()
}
