//! Complex-valued integration of the stationary Schrödinger equation along a
//! contour.
//!
//! With u = ψ and v = dψ/dx, the equation -ψ'' + V ψ = E ψ pulled back to the
//! contour parameter reads
//!
//!   u'(s) = x'(s) · v,      v'(s) = x'(s) · (V(x(s)) - E) · u,
//!
//! a smooth non-stiff system solved by the Dormand–Prince embedded 5(4) pair
//! with PI step-size control.  Amplitudes are kept in range by power-of-two
//! rescaling with the cumulative binary exponent recorded on every node, so
//! linearity is preserved exactly.

use crate::contour::Contour;
use crate::geometry::angle_dist;
use crate::potential::PotentialField;
use crate::{Complex64, Error, Result};

/// Default relative tolerance of the embedded pair.
pub const DEFAULT_RTOL: f64 = 1e-10;

/// ψ and its x-derivative at one point of a contour.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryState {
    pub x: Complex64,
    pub psi: Complex64,
    pub dpsi_dx: Complex64,
}

impl BoundaryState {
    pub fn new(x: Complex64, psi: Complex64, dpsi_dx: Complex64) -> Result<BoundaryState> {
        if psi.norm() == 0.0 && dpsi_dx.norm() == 0.0 {
            return Err(Error::invalid("boundary state must not vanish identically"));
        }
        Ok(BoundaryState { x, psi, dpsi_dx })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// One recorded node of a propagation: the stored (ψ, dψ/dx) are scaled so
/// that the true values are `psi * 2^log2_scale`.
#[derive(Debug, Clone, Copy)]
pub struct TraceNode {
    pub s: f64,
    pub x: Complex64,
    pub psi: Complex64,
    pub dpsi_dx: Complex64,
    pub log2_scale: i64,
}

/// Sampled solution along a contour for one trial energy.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    pub nodes: Vec<TraceNode>,
    pub trial_energy: Complex64,
    pub direction: Direction,
}

impl SolutionTrace {
    pub fn last(&self) -> &TraceNode {
        self.nodes.last().expect("trace has at least the initial node")
    }

    pub fn first(&self) -> &TraceNode {
        &self.nodes[0]
    }
}

// Dormand–Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E_ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [Complex64; 2];

fn rhs(
    contour: &Contour,
    potential: &dyn PotentialField,
    energy: Complex64,
    s: f64,
    y: &State,
) -> Result<State> {
    let (x, xdot) = contour.eval(s);
    let v = potential.value(x)?;
    Ok([xdot * y[1], xdot * (v - energy) * y[0]])
}

/// Propagate a boundary state from `s_start` to `s_end` along the contour.
///
/// `from.x` must agree with the contour position at `s_start`.  The trace
/// records every accepted step together with the cumulative binary scale.
pub fn propagate(
    contour: &Contour,
    potential: &dyn PotentialField,
    energy: Complex64,
    from: &BoundaryState,
    s_start: f64,
    s_end: f64,
    rtol: f64,
) -> Result<SolutionTrace> {
    let (d0, d1) = contour.domain();
    if s_start == s_end {
        return Err(Error::invalid("propagation needs s_start != s_end"));
    }
    for s in [s_start, s_end] {
        if s < d0 - 1e-9 || s > d1 + 1e-9 {
            return Err(Error::invalid(format!(
                "s = {s} outside the contour domain [{d0}, {d1}]"
            )));
        }
    }
    let x0 = contour.position(s_start);
    if (x0 - from.x).norm() > 1e-6 * (1.0 + x0.norm()) {
        return Err(Error::invalid(
            "boundary state position does not match the contour",
        ));
    }
    let rtol = rtol.max(1e-14);
    let atol = 1e-280;

    let direction = if s_end > s_start {
        Direction::Forward
    } else {
        Direction::Backward
    };
    let span = s_end - s_start;
    let sign = span.signum();

    let mut s = s_start;
    let mut y: State = [from.psi, from.dpsi_dx];
    let mut log2_scale: i64 = 0;
    rescale(&mut y, &mut log2_scale);

    let mut nodes = vec![TraceNode {
        s,
        x: x0,
        psi: y[0],
        dpsi_dx: y[1],
        log2_scale,
    }];

    // initial step from the scale of the right-hand side
    let f0 = rhs(contour, potential, energy, s, &y)?;
    let ny = norm2(&y).max(1e-300);
    let nf = norm2(&f0).max(1e-300);
    let mut h = sign * (0.01 * ny / nf).min(span.abs() / 10.0).max(1e-10 * span.abs());

    let mut k1 = f0;
    let mut err_prev: f64 = 1.0;
    let max_steps = 4_000_000usize;
    let mut steps = 0usize;

    while (s_end - s) * sign > 0.0 {
        steps += 1;
        if steps > max_steps {
            return Err(Error::NumericFailure(format!(
                "step budget exhausted at s = {s}"
            )));
        }
        if h.abs() < 1e-14 * (1.0 + s.abs()) {
            return Err(Error::StiffRegion(s));
        }
        let mut last = false;
        if (s + h - s_end) * sign >= 0.0 {
            h = s_end - s;
            last = true;
        }

        let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
        k[0] = k1;
        let mut failed = false;
        for i in 0..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(i + 1) {
                let a = A[i][j];
                if a != 0.0 {
                    yi[0] += kj[0] * (a * h);
                    yi[1] += kj[1] * (a * h);
                }
            }
            match rhs(contour, potential, energy, s + C[i] * h, &yi) {
                Ok(f) => k[i + 1] = f,
                Err(Error::PoleEvaluation(_)) => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            h *= 0.5;
            continue;
        }

        let mut y5 = y;
        let mut err_vec = [Complex64::new(0.0, 0.0); 2];
        for (j, kj) in k.iter().enumerate() {
            if B5[j] != 0.0 {
                y5[0] += kj[0] * (B5[j] * h);
                y5[1] += kj[1] * (B5[j] * h);
            }
            if E_ERR[j] != 0.0 {
                err_vec[0] += kj[0] * (E_ERR[j] * h);
                err_vec[1] += kj[1] * (E_ERR[j] * h);
            }
        }
        if !finite(&y5) {
            return Err(Error::NumericFailure(format!(
                "non-finite state near s = {s}"
            )));
        }

        let mut err: f64 = 0.0;
        for i in 0..2 {
            let sc = atol + rtol * y[i].norm().max(y5[i].norm());
            err = err.max(err_vec[i].norm() / sc);
        }

        if err <= 1.0 {
            s = if last { s_end } else { s + h };
            y = y5;
            k1 = k[6]; // FSAL
            let scale_shift = rescale(&mut y, &mut log2_scale);
            if scale_shift != 0 {
                let f = (2.0f64).powi(-scale_shift as i32);
                k1[0] *= f;
                k1[1] *= f;
            }
            let x = contour.position(s);
            nodes.push(TraceNode {
                s,
                x,
                psi: y[0],
                dpsi_dx: y[1],
                log2_scale,
            });
            // PI controller
            let fac = 0.9 * err.max(1e-10).powf(-0.17) * err_prev.max(1e-10).powf(0.04);
            h *= fac.clamp(0.2, 5.0);
            err_prev = err.max(1e-10);
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    Ok(SolutionTrace {
        nodes,
        trial_energy: energy,
        direction,
    })
}

fn norm2(y: &State) -> f64 {
    y[0].norm().max(y[1].norm())
}

fn finite(y: &State) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Bring max(|ψ|, |ψ'|) back toward [1, 2) by a power of two once it leaves
/// a wide guard band; returns the exponent shift applied.
fn rescale(y: &mut State, log2_scale: &mut i64) -> i64 {
    let m = norm2(y);
    if m == 0.0 || !m.is_finite() {
        return 0;
    }
    let k = m.log2().floor() as i64;
    if k.abs() < 64 {
        return 0;
    }
    let f = (2.0f64).powi(-k as i32);
    y[0] *= f;
    y[1] *= f;
    *log2_scale += k;
    k
}

/// Leading-order WKB boundary state at a large-|x| point inside a decay
/// wedge: dψ/dx / ψ = -Q with Q the square-root branch that decays in the
/// outward radial direction, ψ normalized to 1 (the problem is projective).
///
/// With `prefactor` the subleading amplitude (V - E)^(-1/4) is included.
pub fn asymptotic_init(
    potential: &dyn PotentialField,
    x: Complex64,
    energy: Complex64,
    wedge: (f64, f64),
    prefactor: bool,
) -> Result<BoundaryState> {
    let v = potential.value(x)?;
    // sanity floor; the eigensolver places its endpoints at |V| >= 100|E|
    if v.norm() < 4.0 * energy.norm() {
        return Err(Error::invalid(format!(
            "|V(x)| = {:.3e} is not asymptotic against |E| = {:.3e} at x = {x}",
            v.norm(),
            energy.norm()
        )));
    }
    let (lo, hi) = wedge;
    if hi <= lo {
        return Err(Error::invalid("empty decay wedge"));
    }
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    if angle_dist(x.arg(), center) > half + 1e-9 {
        return Err(Error::invalid(format!(
            "arg x = {:.6} outside the decay wedge ({lo:.6}, {hi:.6})",
            x.arg()
        )));
    }
    let q0 = (v - energy).sqrt();
    let outward = x / x.norm();
    let growth = (q0 * outward).re;
    if growth.abs() < 1e-12 * q0.norm() {
        return Err(Error::AmbiguousBranch(x));
    }
    let q = if growth > 0.0 { q0 } else { -q0 };
    let psi = if prefactor {
        (v - energy).powf(-0.25)
    } else {
        Complex64::new(1.0, 0.0)
    };
    BoundaryState::new(x, psi, -q * psi)
}

/// Wronskian u₁v₂ - v₁u₂ of two states at a common point (the true value is
/// scaled by 2^(k₁+k₂) when the nodes carry binary scales k₁, k₂).
pub fn wronskian(a: (Complex64, Complex64), b: (Complex64, Complex64)) -> Complex64 {
    a.0 * b.1 - a.1 * b.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{make_segment, make_straight};
    use crate::potential::Potential;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn free() -> Potential {
        Potential::new(vec![], vec![]).unwrap()
    }

    #[test]
    fn free_particle_sine() {
        let c = make_segment(Complex64::new(0.0, 0.0), Complex64::new(FRAC_PI_2, 0.0)).unwrap();
        let from = BoundaryState::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let tol = 1e-10;
        let trace = propagate(
            &c,
            &free(),
            Complex64::new(1.0, 0.0),
            &from,
            0.0,
            FRAC_PI_2,
            tol,
        )
        .unwrap();
        let end = trace.last();
        let psi = end.psi * (2.0f64).powi(end.log2_scale as i32);
        assert_relative_eq!(psi.re, 1.0, epsilon = 1e-9);
        assert_relative_eq!(psi.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn harmonic_ground_state_decay() {
        // V = x², E = 1, ψ = exp(-x²/2): ψ(2) = e^(-2)
        let c = make_segment(Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)).unwrap();
        let v = Potential::pt_harmonic(0.0);
        let from = BoundaryState::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .unwrap();
        let tol = 1e-10;
        let trace = propagate(&c, &v, Complex64::new(1.0, 0.0), &from, 0.0, 2.0, tol).unwrap();
        let end = trace.last();
        let psi = end.psi * (2.0f64).powi(end.log2_scale as i32);
        assert!((psi.re - (-2.0f64).exp()).abs() < 10.0 * tol);
        assert!(psi.im.abs() < 10.0 * tol);
    }

    #[test]
    fn shifted_gaussian_along_straight_contour() {
        // along x = s - iε the harmonic E = 1 solution continues the Gaussian
        let eps = 0.5;
        let c = make_straight(eps, 4.0).unwrap();
        let v = Potential::pt_harmonic(0.0);
        let x0 = c.position(-4.0);
        let gauss = |x: Complex64| (-x * x / 2.0).exp();
        let from = BoundaryState::new(x0, gauss(x0), -x0 * gauss(x0)).unwrap();
        let tol = 1e-10;
        let trace = propagate(&c, &v, Complex64::new(1.0, 0.0), &from, -4.0, 4.0, tol).unwrap();
        for node in trace.nodes.iter().step_by(50) {
            let want = gauss(node.x);
            let got = node.psi * (2.0f64).powi(node.log2_scale as i32);
            assert!(
                (got - want).norm() <= 20.0 * tol * (1.0 + want.norm()),
                "at s={}: got {got}, want {want}",
                node.s
            );
        }
    }

    #[test]
    fn wkb_init_matches_harmonic_log_derivative() {
        let v = Potential::pt_harmonic(0.0);
        let x = Complex64::new(5.0, -0.5);
        let state = asymptotic_init(&v, x, Complex64::new(1.0, 0.0), (-0.5, 0.5), false).unwrap();
        let ratio = state.dpsi_dx / state.psi;
        assert!((ratio - (-x)).norm() < 0.1 * x.norm());
    }

    #[test]
    fn wkb_init_decadic_log_derivative() {
        // V ~ x^10 = -(ix)^10, bisector of the first right wedge
        let v = Potential::new(vec![(10, Complex64::new(-1.0, 0.0))], vec![]).unwrap();
        let theta = -std::f64::consts::PI / 3.0;
        let x = Complex64::from_polar(6.0, theta);
        let wedge = (theta - 0.2, theta + 0.2);
        let state = asymptotic_init(&v, x, Complex64::new(1.0, 0.0), wedge, false).unwrap();
        let ratio = state.dpsi_dx / state.psi;
        let want = -x.powi(5);
        assert!((ratio - want).norm() < 1e-2 * want.norm());
        // doubling |x| scales the ratio by about 2^5
        let x2 = x * 2.0;
        let s2 = asymptotic_init(&v, x2, Complex64::new(1.0, 0.0), wedge, false).unwrap();
        let r2 = s2.dpsi_dx / s2.psi;
        assert_relative_eq!((r2 / ratio).norm(), 32.0, epsilon = 0.5);
    }

    #[test]
    fn reversal_returns_initial_state() {
        let c = make_straight(0.5, 2.5).unwrap();
        let v = Potential::pt_harmonic(0.0);
        let e = Complex64::new(1.3, 0.0);
        let x0 = c.position(-2.5);
        let from = BoundaryState::new(x0, Complex64::new(1.0, 0.0), -x0).unwrap();
        let tol = 1e-11;
        let fwd = propagate(&c, &v, e, &from, -2.5, 2.5, tol).unwrap();
        let end = fwd.last();
        let back_from = BoundaryState::new(end.x, end.psi, end.dpsi_dx).unwrap();
        let back = propagate(&c, &v, e, &back_from, 2.5, -2.5, tol).unwrap();
        let ret = back.last();
        let scale = (2.0f64).powi((end.log2_scale + ret.log2_scale) as i32);
        let psi0 = ret.psi * scale;
        let dpsi0 = ret.dpsi_dx * scale;
        assert!((psi0 - from.psi).norm() <= 1e-6 * (1.0 + from.psi.norm()));
        assert!((dpsi0 - from.dpsi_dx).norm() <= 1e-6 * (1.0 + from.dpsi_dx.norm()));
    }

    #[test]
    fn wronskian_constant_along_trace() {
        let c = make_straight(0.5, 5.0).unwrap();
        let v = Potential::pt_harmonic(1.0);
        let e = Complex64::new(2.0, 0.0);
        let x0 = c.position(-5.0);
        let s1 = BoundaryState::new(x0, Complex64::new(1.0, 0.0), -x0).unwrap();
        let s2 =
            BoundaryState::new(x0, Complex64::new(0.3, 0.1), Complex64::new(1.0, -0.2)).unwrap();
        let tol = 1e-11;
        // checkpointed propagation so both solutions share exact nodes; the
        // drift is measured against the local product scale, which is where
        // the conservation law is well conditioned
        let checkpoints = [-5.0, -2.5, 0.0, 2.5, 5.0];
        let mut a = s1;
        let mut b = s2;
        let mut ka = 0i64;
        let mut kb = 0i64;
        let w0 = wronskian((s1.psi, s1.dpsi_dx), (s2.psi, s2.dpsi_dx));
        for w in checkpoints.windows(2) {
            let ta = propagate(&c, &v, e, &a, w[0], w[1], tol).unwrap();
            let tb = propagate(&c, &v, e, &b, w[0], w[1], tol).unwrap();
            let na = *ta.last();
            let nb = *tb.last();
            ka += na.log2_scale;
            kb += nb.log2_scale;
            let pow = (2.0f64).powi((ka + kb) as i32);
            let wr = wronskian((na.psi, na.dpsi_dx), (nb.psi, nb.dpsi_dx)) * pow;
            let scale = ((na.psi * nb.dpsi_dx).norm() + (na.dpsi_dx * nb.psi).norm()) * pow;
            assert!(
                (wr - w0).norm() <= 1e-6 * scale.max(w0.norm()),
                "wronskian drifted: {wr} vs {w0} at s={}, scale {scale:.3e}",
                w[1]
            );
            a = BoundaryState::new(na.x, na.psi, na.dpsi_dx).unwrap();
            b = BoundaryState::new(nb.x, nb.psi, nb.dpsi_dx).unwrap();
        }
    }
}
