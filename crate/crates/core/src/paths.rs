//! Approach paths parameterised by the distance `r` to the center.
//!
//! A polyline through points whose distances drop by more than half at each
//! vertex, and whose consecutive directions are within `pi/4`, has strictly
//! decreasing distance along every segment: the far angle of each triangle
//! (center, `P_k`, `P_k+1`) is obtuse. [`check_descent`] issues that
//! certificate, and only certified polylines can be evaluated by `r`.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::construction::BisectionWitness;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{distance, from_polar, to_polar, wrap_angle, Center, PolarOffset};

const POWER_SOLVE_REL_TOL: f64 = 1e-14;
const POWER_SOLVE_MAX_ITERS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

/// An approach path to the center. Angles follow [`crate::geometry`].
///
/// JSON form: `{"type": "ray" | "power" | "spiral" | "polyline" | "samples", ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PathSpec {
    Ray {
        phi0: Vec<f64>,
    },
    /// `y = c x^(m/n)` approached from `x > 0` or, for odd `n`, `x < 0`. 2-D only.
    #[serde(rename = "power")]
    PowerCurve {
        c: f64,
        m: u32,
        n: u32,
        branch: Branch,
    },
    /// Last angle is `phi0 + amplitude * r^q`; the others stay at `phi0`.
    Spiral {
        phi0: Vec<f64>,
        amplitude: f64,
        q: f64,
    },
    /// Vertices ordered by strictly decreasing distance to the center.
    Polyline {
        vertices: Vec<Vec<f64>>,
    },
    /// A bare point sequence; evaluated point by point, not by `r`.
    #[serde(rename = "samples")]
    SampleSeq {
        points: Vec<Vec<f64>>,
    },
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl PathSpec {
    pub fn ray_2d(phi: f64) -> Self {
        PathSpec::Ray { phi0: vec![phi] }
    }

    pub fn power(c: f64, m: u32, n: u32, branch: Branch) -> Result<Self> {
        let p = PathSpec::PowerCurve { c, m, n, branch };
        p.check_shape()?;
        Ok(p)
    }

    /// Ambient dimension implied by the path, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            PathSpec::Ray { phi0 } | PathSpec::Spiral { phi0, .. } => Some(phi0.len() + 1),
            PathSpec::PowerCurve { .. } => Some(2),
            PathSpec::Polyline { vertices } => vertices.first().map(Vec::len),
            PathSpec::SampleSeq { points } => points.first().map(Vec::len),
        }
    }

    /// Checks the invariants that do not depend on the center.
    pub fn check_shape(&self) -> Result<()> {
        match self {
            PathSpec::Ray { phi0 } => {
                if phi0.is_empty() || phi0.iter().any(|a| !a.is_finite()) {
                    return Err(Error::usage("ray needs finite angles"));
                }
            }
            PathSpec::PowerCurve { c, m, n, branch } => {
                if !(c.is_finite() && *c != 0.0) {
                    return Err(Error::usage("power curve needs a finite nonzero c"));
                }
                if *m == 0 || *n == 0 {
                    return Err(Error::usage("power curve needs positive m and n"));
                }
                if gcd(*m, *n) != 1 {
                    return Err(Error::usage(format!("power curve needs gcd(m, n) = 1, got m={m}, n={n}")));
                }
                if *branch == Branch::Negative && n % 2 == 0 {
                    return Err(Error::usage("x^(m/n) with even n has no x < 0 branch"));
                }
            }
            PathSpec::Spiral { phi0, amplitude, q } => {
                if phi0.is_empty() || phi0.iter().any(|a| !a.is_finite()) || !amplitude.is_finite() {
                    return Err(Error::usage("spiral needs finite angles and amplitude"));
                }
                if !(*q > 0.0 && q.is_finite()) {
                    return Err(Error::usage("spiral exponent q must be positive"));
                }
            }
            PathSpec::Polyline { vertices } => {
                if vertices.len() < 2 {
                    return Err(Error::usage("polyline needs at least 2 vertices"));
                }
                let d = vertices[0].len();
                if vertices.iter().any(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
                    return Err(Error::usage("polyline vertices must be finite and share a dimension"));
                }
            }
            PathSpec::SampleSeq { points } => {
                if points.is_empty() {
                    return Err(Error::usage("sample sequence is empty"));
                }
                let d = points[0].len();
                if points.iter().any(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
                    return Err(Error::usage("sample points must be finite and share a dimension"));
                }
            }
        }
        Ok(())
    }

    fn check_center(&self, center: &Center) -> Result<()> {
        self.check_shape()?;
        if let Some(d) = self.dim() {
            check_dim(center.dim(), d)?;
        }
        if let PathSpec::Polyline { vertices } = self {
            let mut prev = f64::INFINITY;
            for v in vertices {
                let d = distance(center.coords(), v)?;
                if !(d < prev) || d == 0.0 {
                    return Err(Error::usage(
                        "polyline vertices must have strictly decreasing, nonzero distance to the center",
                    ));
                }
                prev = d;
            }
        }
        Ok(())
    }
}

/// One triangle (center, `P_k`, `P_k+1`). `cos_c` is the cosine of the angle at `P_k+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub angle_at_center: f64,
    pub side_ratio: f64,
    pub cos_c: f64,
}

impl Triangle {
    /// Law of cosines from the near side `b`, far side `c` and center angle.
    pub fn from_sides_and_angle(b: f64, c: f64, angle_at_center: f64) -> Self {
        let a2 = b * b + c * c - 2.0 * b * c * angle_at_center.cos();
        let a = a2.max(0.0).sqrt();
        Triangle {
            angle_at_center,
            side_ratio: c / b,
            cos_c: (a2 + b * b - c * c) / (2.0 * a * b),
        }
    }

    pub fn passes(&self) -> bool {
        self.angle_at_center <= FRAC_PI_4 && self.side_ratio > 2.0 && self.cos_c < 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentCertificate {
    pub triangles: Vec<Triangle>,
    pub ok: bool,
}

/// Builds the triangle certificate for consecutive polyline vertices.
pub fn check_descent(path: &PathSpec, center: &Center) -> Result<DescentCertificate> {
    let PathSpec::Polyline { vertices } = path else {
        return Err(Error::usage("descent certificates apply to polylines only"));
    };
    path.check_shape()?;
    check_dim(center.dim(), vertices[0].len())?;
    let p0 = center.coords();
    let mut triangles = Vec::with_capacity(vertices.len() - 1);
    for pair in vertices.windows(2) {
        let (far, near) = (&pair[0], &pair[1]);
        let u: Vec<f64> = far.iter().zip(p0).map(|(x, c)| x - c).collect();
        let v: Vec<f64> = near.iter().zip(p0).map(|(x, c)| x - c).collect();
        let c_side = distance(p0, far)?;
        let b_side = distance(p0, near)?;
        let a_side = distance(far, near)?;
        if a_side == 0.0 {
            return Err(Error::usage("polyline has coincident consecutive vertices"));
        }
        if b_side == 0.0 || c_side == 0.0 {
            return Err(Error::usage("polyline vertex coincides with the center"));
        }
        let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let angle = if u.len() == 2 {
            (u[0] * v[1] - u[1] * v[0]).abs().atan2(dot)
        } else {
            (dot / (b_side * c_side)).clamp(-1.0, 1.0).acos()
        };
        let cos_c = (a_side * a_side + b_side * b_side - c_side * c_side) / (2.0 * a_side * b_side);
        triangles.push(Triangle {
            angle_at_center: angle,
            side_ratio: c_side / b_side,
            cos_c,
        });
    }
    let ok = triangles.iter().all(Triangle::passes);
    Ok(DescentCertificate { triangles, ok })
}

/// The path point at distance `r` from the center.
pub fn point_at(path: &PathSpec, center: &Center, r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::usage("path radius must be positive and finite"));
    }
    path.check_center(center)?;
    match path {
        PathSpec::Ray { phi0 } => from_polar(center, &PolarOffset::new(r, phi0.clone())),
        PathSpec::Spiral { .. } => from_polar(center, &PolarOffset::new(r, spiral_angles(path, r))),
        PathSpec::PowerCurve { c, m, n, branch } => {
            let (x, y) = power_curve_offset(*c, *m, *n, *branch, r);
            Ok(vec![center.coords()[0] + x, center.coords()[1] + y])
        }
        PathSpec::Polyline { vertices } => {
            if !check_descent(path, center)?.ok {
                return Err(Error::usage(
                    "polyline has no descent certificate, so r is not a valid parameter",
                ));
            }
            polyline_point(vertices, center, r)
        }
        PathSpec::SampleSeq { .. } => Err(Error::usage(
            "a sample sequence is evaluated point by point and has no point at a given r",
        )),
    }
}

fn spiral_angles(path: &PathSpec, r: f64) -> Vec<f64> {
    let PathSpec::Spiral { phi0, amplitude, q } = path else {
        unreachable!("spiral_angles on a non-spiral path");
    };
    let mut angles = phi0.clone();
    let last = angles.len() - 1;
    angles[last] = wrap_angle(angles[last] + amplitude * r.powf(*q));
    angles
}

/// `|x|^(m/n)` with the sign of `x^m` for odd `n`.
fn signed_power(x: f64, m: u32, n: u32) -> f64 {
    let mag = x.abs().powf(m as f64 / n as f64);
    if x < 0.0 && m % 2 == 1 {
        -mag
    } else {
        mag
    }
}

/// Offset `(x, y)` on `y = c x^(m/n)` with `hypot(x, y) = r`, by bisection on `|x|`.
fn power_curve_offset(c: f64, m: u32, n: u32, branch: Branch, r: f64) -> (f64, f64) {
    let p = m as f64 / n as f64;
    let ca = c.abs();
    let dist = |a: f64| a.hypot(ca * a.powf(p));
    // |x| <= r and |c||x|^p <= r bound from above; both <= r/sqrt2 bounds from below
    let mut hi = r.min((r / ca).powf(1.0 / p));
    let mut lo = (r / SQRT_2).min((r / (SQRT_2 * ca)).powf(1.0 / p));
    for _ in 0..POWER_SOLVE_MAX_ITERS {
        if hi - lo <= POWER_SOLVE_REL_TOL * hi {
            break;
        }
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if dist(mid) <= r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = if (dist(lo) - r).abs() <= (dist(hi) - r).abs() { lo } else { hi };
    let x = branch.sign() * a;
    (x, c * signed_power(x, m, n))
}

fn polyline_point(vertices: &[Vec<f64>], center: &Center, r: f64) -> Result<Vec<f64>> {
    let p0 = center.coords();
    let dists: Vec<f64> = vertices
        .iter()
        .map(|v| distance(p0, v))
        .collect::<Result<_>>()?;
    if r > dists[0] || r < dists[dists.len() - 1] {
        return Err(Error::OutOfRange { r });
    }
    for k in 0..vertices.len() - 1 {
        if r == dists[k] {
            return Ok(vertices[k].clone());
        }
        if r < dists[k] && r >= dists[k + 1] {
            if r == dists[k + 1] {
                return Ok(vertices[k + 1].clone());
            }
            let u: Vec<f64> = vertices[k].iter().zip(p0).map(|(x, c)| x - c).collect();
            let w: Vec<f64> = vertices[k + 1].iter().zip(&vertices[k]).map(|(b, a)| b - a).collect();
            // |u + t w|^2 = r^2; distance decreases on [0, 1], take the smaller root
            let qa: f64 = w.iter().map(|x| x * x).sum();
            let qb: f64 = 2.0 * u.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>();
            let qc = (dists[k] - r) * (dists[k] + r);
            let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
            let q = (-qb + disc.sqrt()) / 2.0;
            let t = if q > 0.0 { (qc / q).clamp(0.0, 1.0) } else { 1.0 };
            return Ok(vertices[k]
                .iter()
                .zip(&w)
                .map(|(a, d)| a + t * d)
                .collect());
        }
    }
    Err(Error::OutOfRange { r })
}

/// Polyline through the picked samples from the third one on.
///
/// The first two picks sit in intervals wider than `pi/4`, so the angle bound
/// of the descent certificate is only guaranteed from the third pick onward.
pub fn polyline_from_witness(witness: &BisectionWitness) -> Result<PathSpec> {
    if witness.picked.len() < 4 {
        return Err(Error::usage(format!(
            "witness has {} picked samples; a polyline needs at least 4 (two from position 3 on)",
            witness.picked.len()
        )));
    }
    let tail = &witness.picked[2..];
    if tail.windows(2).any(|w| !(w[1].offset.r < w[0].offset.r)) {
        return Err(Error::usage("picked samples do not have strictly decreasing radii"));
    }
    Ok(PathSpec::Polyline {
        vertices: tail.iter().map(|s| s.point.clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSample {
    pub r: f64,
    pub angles: Vec<f64>,
}

impl AngleSample {
    pub fn phi(&self) -> f64 {
        self.angles.last().copied().unwrap_or(0.0)
    }
}

/// `phi(r)` along the path. Rays and spirals report their defining angles;
/// other paths go through `to_polar` of the path point.
pub fn angle_function(path: &PathSpec, center: &Center, r_schedule: &[f64]) -> Result<Vec<AngleSample>> {
    r_schedule
        .iter()
        .map(|&r| {
            let angles = match path {
                PathSpec::Ray { phi0 } => {
                    path.check_center(center)?;
                    phi0.clone()
                }
                PathSpec::Spiral { .. } => {
                    path.check_center(center)?;
                    spiral_angles(path, r)
                }
                _ => to_polar(center, &point_at(path, center, r)?)?.angles,
            };
            Ok(AngleSample { r, angles })
        })
        .collect()
}
