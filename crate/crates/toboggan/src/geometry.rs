//! Small numeric helpers shared by the contour and winding machinery:
//! angle wrapping/unwrapping, smooth polynomial ramps and cubic Hermite
//! paths through complex waypoints.

use crate::{Complex64, Error, Result};
use std::f64::consts::PI;

/// Wrap an angle into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Distance between two directions, ignoring full turns.
pub fn angle_dist(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Continuous lift of a sequence of principal arguments: each output differs
/// from its predecessor by less than π.
pub fn unwrap_angles(args: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(args.len());
    let mut offset = 0.0;
    for (i, &a) in args.iter().enumerate() {
        if i > 0 {
            let prev = out[i - 1];
            let mut lifted = a + offset;
            while lifted - prev > PI {
                lifted -= 2.0 * PI;
                offset -= 2.0 * PI;
            }
            while lifted - prev < -PI {
                lifted += 2.0 * PI;
                offset += 2.0 * PI;
            }
            out.push(lifted);
        } else {
            out.push(a);
        }
    }
    out
}

/// Lift `arg` (a principal value) next to `near` by adding a multiple of 2π.
pub fn lift_near(arg: f64, near: f64) -> f64 {
    let k = ((near - arg) / (2.0 * PI)).round();
    arg + 2.0 * PI * k
}

/// Quintic smoothstep: 0 at t≤0, 1 at t≥1, C² at both ends.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// Odd quintic ramp on [-1, 1]: τ(±1) = ±1 with τ' = τ'' = 0 there.
pub fn ramp_odd(t: f64) -> f64 {
    if t <= -1.0 {
        -1.0
    } else if t >= 1.0 {
        1.0
    } else {
        (15.0 * t - 10.0 * t * t * t + 3.0 * t * t * t * t * t) / 8.0
    }
}

/// Derivative of [`ramp_odd`].
pub fn ramp_odd_deriv(t: f64) -> f64 {
    if !(-1.0..=1.0).contains(&t) {
        0.0
    } else {
        let u = 1.0 - t * t;
        15.0 * u * u / 8.0
    }
}

/// Monotone cubic Hermite on [s0, s1] with prescribed end values and slopes.
#[derive(Debug, Clone, Copy)]
pub struct Hermite1 {
    pub s0: f64,
    pub s1: f64,
    pub v0: f64,
    pub v1: f64,
    pub d0: f64,
    pub d1: f64,
}

impl Hermite1 {
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let h = self.s1 - self.s0;
        let t = (s - self.s0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.v0 + h10 * h * self.d0 + h01 * self.v1 + h11 * h * self.d1;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -6.0 * t2 + 6.0 * t;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let d = (dh00 * self.v0 + dh01 * self.v1) / h + dh10 * self.d0 + dh11 * self.d1;
        (v, d)
    }
}

/// Piecewise cubic Hermite path through complex waypoints.
///
/// Nodes carry a parameter, a position and a velocity; between nodes the
/// position is the cubic Hermite interpolant, so the path is C¹ everywhere
/// and the stored velocity is the exact derivative of the stored position.
#[derive(Debug, Clone)]
pub struct CubicPath {
    nodes: Vec<(f64, Complex64, Complex64)>,
}

impl CubicPath {
    /// Build from explicit (s, position, velocity) nodes. Parameters must be
    /// strictly increasing.
    pub fn from_nodes(nodes: Vec<(f64, Complex64, Complex64)>) -> Result<CubicPath> {
        if nodes.len() < 2 {
            return Err(Error::invalid("cubic path needs at least two nodes"));
        }
        for w in nodes.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid("cubic path parameters must increase"));
            }
        }
        Ok(CubicPath { nodes })
    }

    /// Catmull-Rom style construction: velocities from central differences,
    /// with optional clamped end tangents.
    pub fn from_points(
        params: &[f64],
        points: &[Complex64],
        end_tangents: Option<(Complex64, Complex64)>,
    ) -> Result<CubicPath> {
        if params.len() != points.len() || params.len() < 2 {
            return Err(Error::invalid("cubic path needs matching params/points"));
        }
        let n = params.len();
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let v = if i == 0 {
                match end_tangents {
                    Some((t0, _)) => t0,
                    None => (points[1] - points[0]) / (params[1] - params[0]),
                }
            } else if i == n - 1 {
                match end_tangents {
                    Some((_, t1)) => t1,
                    None => (points[n - 1] - points[n - 2]) / (params[n - 1] - params[n - 2]),
                }
            } else {
                (points[i + 1] - points[i - 1]) / (params[i + 1] - params[i - 1])
            };
            nodes.push((params[i], points[i], v));
        }
        CubicPath::from_nodes(nodes)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0].0, self.nodes[self.nodes.len() - 1].0)
    }

    pub fn nodes(&self) -> &[(f64, Complex64, Complex64)] {
        &self.nodes
    }

    /// Position and velocity at parameter s (clamped to the domain).
    pub fn eval(&self, s: f64) -> (Complex64, Complex64) {
        let n = self.nodes.len();
        let s = s.clamp(self.nodes[0].0, self.nodes[n - 1].0);
        // binary search for the segment
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.nodes[mid].0 <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (s0, p0, v0) = self.nodes[lo];
        let (s1, p1, v1) = self.nodes[hi];
        let h = s1 - s0;
        let t = (s - s0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let pos = p0 * h00 + v0 * (h * h10) + p1 * h01 + v1 * (h * h11);
        let dh00 = (6.0 * t2 - 6.0 * t) / h;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = (-6.0 * t2 + 6.0 * t) / h;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let vel = p0 * dh00 + v0 * dh10 + p1 * dh01 + v1 * dh11;
        (pos, vel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unwrap_removes_jumps() {
        let args = vec![3.0, -3.0, 3.0, -3.0];
        let lifted = unwrap_angles(&args);
        for w in lifted.windows(2) {
            assert!((w[1] - w[0]).abs() < PI);
        }
        assert_relative_eq!(lifted[1], 2.0 * PI - 3.0);
    }

    #[test]
    fn ramp_is_odd_and_clamped() {
        assert_eq!(ramp_odd(-2.0), -1.0);
        assert_eq!(ramp_odd(1.0), 1.0);
        assert_relative_eq!(ramp_odd(0.3), -ramp_odd(-0.3));
        // derivative matches finite differences
        let h = 1e-6;
        for &t in &[-0.9, -0.4, 0.0, 0.5, 0.8] {
            let fd = (ramp_odd(t + h) - ramp_odd(t - h)) / (2.0 * h);
            assert_relative_eq!(fd, ramp_odd_deriv(t), epsilon = 1e-8);
        }
    }

    #[test]
    fn cubic_path_interpolates_and_differentiates() {
        // sample a circle and check mid-segment accuracy
        let n = 60;
        let params: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let points: Vec<Complex64> = params
            .iter()
            .map(|&t| Complex64::from_polar(1.0, 2.0 * t))
            .collect();
        let path = CubicPath::from_points(&params, &points, None).unwrap();
        let (p, v) = path.eval(0.4321);
        assert_relative_eq!(p.norm(), 1.0, epsilon = 1e-4);
        // velocity should be tangent: Re(v * conj(p)) ≈ 0
        assert!((v * p.conj()).re.abs() < 1e-2);
        // central-difference check of the velocity
        let h = 1e-6;
        let (pp, _) = path.eval(0.4321 + h);
        let (pm, _) = path.eval(0.4321 - h);
        let fd = (pp - pm) / (2.0 * h);
        assert!((fd - v).norm() < 1e-6);
    }
}
