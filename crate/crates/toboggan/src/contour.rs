//! Integration contours in the complex coordinate plane.
//!
//! All contours are immutable after construction and expose a parametrized
//! position map `s ↦ x(s)` together with its exact derivative.  The catalogue
//! covers the straight line below the real axis, the multisheet spiral that
//! winds a prescribed number of times around the origin, the U-shaped path
//! with both tails in the upper half plane, the two-branch-point toboggan
//! whose interior realizes a requested winding word, and the knot-like
//! pullbacks of a straight line under the two-branch-point rectification map.

use crate::geometry::{lift_near, ramp_odd, ramp_odd_deriv, CubicPath, Hermite1};
use crate::winding::{classify_word, Letter, WindingWord};
use crate::{Complex64, Error, Result};
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Set of branch points of the wavefunction in the coordinate plane.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPointSet {
    points: Vec<Complex64>,
}

impl BranchPointSet {
    pub fn new(points: Vec<Complex64>) -> Result<BranchPointSet> {
        for p in &points {
            if !p.re.is_finite() || !p.im.is_finite() {
                return Err(Error::invalid("branch point must be finite"));
            }
        }
        for (i, a) in points.iter().enumerate() {
            for b in points.iter().skip(i + 1) {
                if (a - b).norm() == 0.0 {
                    return Err(Error::invalid("branch points must be pairwise distinct"));
                }
            }
        }
        Ok(BranchPointSet { points })
    }

    /// The standard two-branch-point set {-1, +1}.
    pub fn pair_unit() -> BranchPointSet {
        BranchPointSet {
            points: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// True when the set is invariant under x ↦ -conj(x).
    pub fn is_pt_symmetric(&self, tol: f64) -> bool {
        self.points.iter().all(|p| {
            let mirror = -p.conj();
            self.points.iter().any(|q| (q - mirror).norm() <= tol)
        })
    }
}

/// Shape descriptor of a contour.
#[derive(Debug, Clone)]
pub enum Shape {
    Straight {
        eps: f64,
        half_width: f64,
    },
    Spiral {
        n: u32,
        eps: f64,
        cutoff: f64,
    },
    UShaped {
        eps: f64,
        xi: f64,
        s_bridge: f64,
        r_min: f64,
    },
    Toboggan2 {
        eta: f64,
        delta: f64,
        eps: f64,
        s_bridge: f64,
        r_min: f64,
        word: WindingWord,
        /// Present for non-default words realized by a waypoint bridge.
        bridge: Option<CubicPath>,
    },
    Pullback {
        kappa: f64,
        eps: f64,
        track: Track,
    },
    /// Image of another contour under a rectification map.
    Mapped {
        source: Box<Contour>,
        map: RectMap,
        track: Track,
    },
    Custom {
        path: CubicPath,
    },
    Reversed {
        inner: Box<Contour>,
    },
}

/// Rectification map applied to a source contour (inverse direction: the
/// source lives in the original coordinate, the image in the rectified one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RectMap {
    /// z = -i (i x)^(1/alpha), the inverse of ix = (iz)^alpha.
    AlphaInverse { alpha: f64 },
    /// z = -i sqrt((1 - x^2)^(1/kappa) - 1), the inverse of
    /// 1 + (ix)^2 = (1 + (iz)^2)^kappa.
    KappaInverse { kappa: f64 },
}

/// A parametrized complex integration path.
#[derive(Debug, Clone)]
pub struct Contour {
    shape: Shape,
    domain: (f64, f64),
    wedge_angles: (f64, f64),
}

impl Contour {
    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    /// Asymptotic arguments (θ_left, θ_right) of the two tails, as continuous
    /// multisheet angles (not reduced mod 2π).
    pub fn wedge_angles(&self) -> (f64, f64) {
        self.wedge_angles
    }

    /// Position x(s).  The parameter is clamped to the domain.
    pub fn position(&self, s: f64) -> Complex64 {
        self.eval(s).0
    }

    /// Velocity dx/ds, the exact derivative of [`Contour::position`].
    pub fn velocity(&self, s: f64) -> Complex64 {
        self.eval(s).1
    }

    pub fn eval(&self, s: f64) -> (Complex64, Complex64) {
        let s = s.clamp(self.domain.0, self.domain.1);
        match &self.shape {
            Shape::Straight { eps, .. } => {
                (Complex64::new(s, -eps), Complex64::new(1.0, 0.0))
            }
            Shape::Spiral { n, eps, .. } => {
                let m = 2.0 * *n as f64 + 1.0;
                let u = (s + PI / 2.0) / m;
                let rho = 1.0 / u.cos();
                let drho = u.sin() / (u.cos() * u.cos()) / m;
                let e = Complex64::from_polar(1.0, s);
                let x = *eps * rho * e;
                let v = *eps * (Complex64::new(drho, 0.0) + I * rho) * e;
                (x, v)
            }
            Shape::UShaped {
                eps,
                xi,
                s_bridge,
                r_min,
            } => {
                let center = Complex64::new(0.0, -eps);
                polar_blend(s, 0.0, *s_bridge, *r_min, 7.0 * PI / 8.0, *xi, center)
            }
            Shape::Toboggan2 {
                eta,
                delta,
                eps,
                s_bridge,
                r_min,
                bridge,
                ..
            } => {
                let center = Complex64::new(0.0, delta - eps);
                match bridge {
                    None => polar_blend(s, *eta, *s_bridge, *r_min, 9.0 * PI / 8.0, 0.0, center),
                    Some(path) => {
                        let (b0, b1) = path.domain();
                        if s < b0 {
                            let r = eta - s;
                            let e = Complex64::from_polar(1.0, 3.0 * PI / 8.0);
                            (center + r * e, -e)
                        } else if s > b1 {
                            let r = s - eta;
                            let e = Complex64::from_polar(1.0, 5.0 * PI / 8.0);
                            (center + r * e, e)
                        } else {
                            path.eval(s)
                        }
                    }
                }
            }
            Shape::Pullback { track, .. } => track.eval(s, None),
            Shape::Mapped { source, track, .. } => track.eval(s, Some(source)),
            Shape::Custom { path } => path.eval(s),
            Shape::Reversed { inner } => {
                let (a, b) = inner.domain;
                let (x, v) = inner.eval(a + b - s);
                (x, -v)
            }
        }
    }

    /// Uniformly sample the contour: (s, x, dx/ds) triplets.
    pub fn sample(&self, count: usize) -> Result<Vec<(f64, Complex64, Complex64)>> {
        if count < 2 {
            return Err(Error::invalid("sample count must be at least 2"));
        }
        let (s0, s1) = self.domain;
        Ok((0..count)
            .map(|i| {
                let s = s0 + (s1 - s0) * i as f64 / (count - 1) as f64;
                let (x, v) = self.eval(s);
                (s, x, v)
            })
            .collect())
    }

    /// The same geometric path traversed in the opposite direction.
    pub fn reverse(self) -> Contour {
        let domain = self.domain;
        let wedge = (self.wedge_angles.1, self.wedge_angles.0);
        Contour {
            shape: Shape::Reversed {
                inner: Box::new(self),
            },
            domain,
            wedge_angles: wedge,
        }
    }

    /// Mirror parameter s* with x(s*) = -conj(x(s)) for the PT-symmetric
    /// shapes, when one exists.
    pub fn pt_mirror_param(&self, s: f64) -> Option<f64> {
        match &self.shape {
            Shape::Straight { .. } | Shape::UShaped { .. } => Some(-s),
            Shape::Spiral { .. } => Some(-PI - s),
            Shape::Toboggan2 {
                eta, bridge: None, ..
            } if *eta == 0.0 => Some(-s),
            _ => None,
        }
    }

    /// One-line description used in run records and JSON outputs.
    pub fn descriptor(&self) -> String {
        match &self.shape {
            Shape::Straight { eps, half_width } => {
                format!("straight(eps={eps},half_width={half_width})")
            }
            Shape::Spiral { n, eps, cutoff } => {
                format!("spiral(n={n},eps={eps},cutoff={cutoff})")
            }
            Shape::UShaped { eps, xi, .. } => format!("ushaped(eps={eps},xi={xi})"),
            Shape::Toboggan2 {
                eta,
                delta,
                eps,
                word,
                ..
            } => format!("toboggan2(eta={eta},delta={delta},eps={eps},word={word})"),
            Shape::Pullback { kappa, eps, .. } => {
                let (s0, s1) = self.domain;
                format!("pullback(kappa={kappa},eps={eps},s0={s0},s1={s1})")
            }
            Shape::Mapped { source, map, .. } => match map {
                RectMap::AlphaInverse { alpha } => {
                    format!("mapped(alpha={alpha},source={})", source.descriptor())
                }
                RectMap::KappaInverse { kappa } => {
                    format!("mapped(kappa={kappa},source={})", source.descriptor())
                }
            },
            Shape::Custom { .. } => "custom".to_string(),
            Shape::Reversed { inner } => format!("reversed({})", inner.descriptor()),
        }
    }
}

/// Polar bridge shared by the U-shaped and default toboggan shapes: radial
/// tails r = |s - eta| at the asymptotic angles, a C¹ radius dip to `r_min`
/// and an odd quintic angle ramp of half-sweep `half_sweep` about -π/2.
fn polar_blend(
    s: f64,
    eta: f64,
    s_bridge: f64,
    r_min: f64,
    half_sweep: f64,
    xi: f64,
    center: Complex64,
) -> (Complex64, Complex64) {
    let t = s - eta;
    let theta = -PI / 2.0 + half_sweep * ramp_odd(t / s_bridge) + xi;
    let dtheta = half_sweep * ramp_odd_deriv(t / s_bridge) / s_bridge;
    let (r, dr) = if t <= -s_bridge {
        (-t, -1.0)
    } else if t >= s_bridge {
        (t, 1.0)
    } else if t <= 0.0 {
        Hermite1 {
            s0: -s_bridge,
            s1: 0.0,
            v0: s_bridge,
            v1: r_min,
            d0: -1.0,
            d1: 0.0,
        }
        .eval(t)
    } else {
        Hermite1 {
            s0: 0.0,
            s1: s_bridge,
            v0: r_min,
            v1: s_bridge,
            d0: 0.0,
            d1: 1.0,
        }
        .eval(t)
    };
    let e = Complex64::from_polar(1.0, theta);
    let x = center + r * e;
    let v = (Complex64::new(dr, 0.0) + I * (r * dtheta)) * e;
    (x, v)
}

/// Straight contour x = s - iε, s ∈ [-half_width, half_width].
pub fn make_straight(eps: f64, half_width: f64) -> Result<Contour> {
    if !(eps > 0.0) || !(half_width > 0.0) {
        return Err(Error::invalid("straight contour needs eps > 0 and half_width > 0"));
    }
    Ok(Contour {
        shape: Shape::Straight { eps, half_width },
        domain: (-half_width, half_width),
        wedge_angles: (PI, 0.0),
    })
}

/// Multisheet spiral x(φ) = ε ϱ(φ,N) e^{iφ} with
/// ϱ = sqrt(1 + tan²((φ + π/2)/(2N+1))), truncated by `cutoff` inside the
/// open angle interval (-(N+1)π, Nπ).
pub fn make_spiral(n: u32, eps: f64, cutoff: f64) -> Result<Contour> {
    if !(eps > 0.0) {
        return Err(Error::invalid("spiral contour needs eps > 0"));
    }
    if !(cutoff > 0.0 && cutoff < PI / 2.0) {
        return Err(Error::invalid("spiral cutoff must lie in (0, π/2)"));
    }
    let nf = n as f64;
    let domain = (-(nf + 1.0) * PI + cutoff, nf * PI - cutoff);
    Ok(Contour {
        shape: Shape::Spiral { n, eps, cutoff },
        domain,
        wedge_angles: domain,
    })
}

/// U-shaped contour: tails at arguments -11π/8 and 3π/8 about the center
/// -iε, connected by a left-right symmetric polar bridge.
pub fn make_u_shaped(eps: f64, s_range: (f64, f64)) -> Result<Contour> {
    make_u_shaped_with_xi(eps, s_range, 0.0)
}

/// U-shaped contour with a constant phase modulation ξ ∈ (-π/8, π/8) applied
/// to both tails.  ξ ≠ 0 breaks the left-right symmetry.
pub fn make_u_shaped_with_xi(eps: f64, s_range: (f64, f64), xi: f64) -> Result<Contour> {
    if !(eps > 0.0) {
        return Err(Error::invalid("u-shaped contour needs eps > 0"));
    }
    if xi.abs() >= PI / 8.0 {
        return Err(Error::invalid("xi must lie in (-π/8, π/8)"));
    }
    let (s0, s1) = s_range;
    if !(s0 < 0.0 && s1 > 0.0 && s0.is_finite() && s1.is_finite()) {
        return Err(Error::invalid("u-shaped s-range must straddle 0"));
    }
    let s_bridge = (2.0f64).min(0.5 * (-s0).min(s1));
    let r_min = 0.4 * s_bridge;
    Ok(Contour {
        shape: Shape::UShaped {
            eps,
            xi,
            s_bridge,
            r_min,
        },
        domain: s_range,
        wedge_angles: (-11.0 * PI / 8.0 + xi, 3.0 * PI / 8.0 + xi),
    })
}

/// Two-branch-point toboggan with the default interior, which realizes the
/// winding word LR around the branch points ±1.
pub fn make_toboggan2(eta: f64, delta: f64, eps: f64, s_range: (f64, f64)) -> Result<Contour> {
    make_toboggan2_with_word(eta, delta, eps, s_range, &WindingWord::from_str_word("LR")?)
}

/// Two-branch-point toboggan whose interior realizes the requested reduced
/// winding word.  Tails sit at the arguments -13π/8 and 5π/8 about the
/// shifted center i(δ - ε).  The realized word is verified at construction;
/// requests the bridge builder cannot realize yield an unsupported-word
/// error.
pub fn make_toboggan2_with_word(
    eta: f64,
    delta: f64,
    eps: f64,
    s_range: (f64, f64),
    word: &WindingWord,
) -> Result<Contour> {
    if !(delta > 0.0) {
        return Err(Error::invalid("toboggan2 needs delta > 0"));
    }
    if !(eps >= 0.0) {
        return Err(Error::invalid("toboggan2 needs eps >= 0"));
    }
    if !word.is_reduced() {
        return Err(Error::UnsupportedWord(format!(
            "{word} is not reduced; tobogganic paths realize reduced words only"
        )));
    }
    let (s0, s1) = s_range;
    if !(s0 < eta - 4.0 && s1 > eta + 4.0) {
        return Err(Error::invalid(
            "toboggan2 s-range must extend at least 4 beyond eta on both sides",
        ));
    }
    let center = Complex64::new(0.0, delta - eps);

    let default_word = WindingWord::from_str_word("LR")?;
    let shape = if *word == default_word {
        let s_bridge = 2.0;
        Shape::Toboggan2 {
            eta,
            delta,
            eps,
            s_bridge,
            r_min: 0.45,
            word: word.clone(),
            bridge: None,
        }
    } else {
        let bridge = weave_bridge(word, eta, center, s_range)?;
        let s_bridge = bridge.domain().1 - eta;
        Shape::Toboggan2 {
            eta,
            delta,
            eps,
            s_bridge,
            r_min: 0.45,
            word: word.clone(),
            bridge: Some(bridge),
        }
    };
    let contour = Contour {
        shape,
        domain: s_range,
        wedge_angles: (-13.0 * PI / 8.0, 5.0 * PI / 8.0),
    };
    // Every construction is checked against the cut-crossing classifier.
    let realized = classify_word(&contour, &BranchPointSet::pair_unit())?;
    if realized != *word {
        return Err(Error::UnsupportedWord(format!(
            "bridge builder produced {realized} instead of {word} for these parameters"
        )));
    }
    Ok(contour)
}

/// Waypoint bridge realizing an arbitrary reduced word.  The radial tails
/// already contribute the crossings R (inbound) and L (outbound), so the
/// bridge must realize B = L⁻¹ · word · R⁻¹ in composition order; letters
/// compose right to left, so the traversal sequence is B reversed.  Each
/// traversal letter becomes a horizontal gate segment across the upward cut
/// of one branch point, and consecutive gates are linked through the
/// cut-free lower half plane.
fn weave_bridge(
    word: &WindingWord,
    eta: f64,
    center: Complex64,
    s_range: (f64, f64),
) -> Result<CubicPath> {
    let l_inv = Letter::parse("L^-1")?;
    let r_inv = Letter::parse("R^-1")?;
    let bridge_word = WindingWord::new(vec![l_inv])
        .concat(word)
        .concat(&WindingWord::new(vec![r_inv]))
        .reduce();
    let traversal: Vec<Letter> = bridge_word.letters().iter().rev().copied().collect();

    let r_junction = 2.0;
    let gate_h = 2.2;
    let gate_half = 0.55;
    let south = center.im.min(0.0) - 1.5;
    let p_in = center + Complex64::from_polar(r_junction, 3.0 * PI / 8.0);
    let p_out = center + Complex64::from_polar(r_junction, 5.0 * PI / 8.0);

    let mut pts: Vec<Complex64> = vec![p_in];
    let mut push = |pts: &mut Vec<Complex64>, p: Complex64| {
        if (pts.last().unwrap() - p).norm() > 1e-12 {
            pts.push(p);
        }
    };
    // down from the entry junction into the south lane
    push(&mut pts, Complex64::new(p_in.re, south));
    for letter in &traversal {
        // rise, cross the gate and descend again
        let bp = if letter.is_left() { -1.0 } else { 1.0 };
        let (from_x, to_x) = if letter.is_counterclockwise() {
            (bp + gate_half, bp - gate_half)
        } else {
            (bp - gate_half, bp + gate_half)
        };
        push(&mut pts, Complex64::new(from_x, south));
        push(&mut pts, Complex64::new(from_x, gate_h));
        push(&mut pts, Complex64::new(to_x, gate_h));
        push(&mut pts, Complex64::new(to_x, south));
    }
    push(&mut pts, Complex64::new(p_out.re, south));
    push(&mut pts, p_out);

    // subdivide long segments so the spline stays close to the polyline
    let mut dense: Vec<Complex64> = vec![pts[0]];
    for w in pts.windows(2) {
        let seg = w[1] - w[0];
        let pieces = (seg.norm() / 0.8).ceil().max(1.0) as usize;
        for k in 1..=pieces {
            dense.push(w[0] + seg * (k as f64 / pieces as f64));
        }
    }

    // chord-length parametrization centered on eta, unit mean speed
    let mut cum = vec![0.0];
    for w in dense.windows(2) {
        cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = *cum.last().unwrap();
    let half = total / 2.0;
    let (s0, s1) = s_range;
    if eta - half <= s0 || eta + half >= s1 {
        return Err(Error::UnsupportedWord(format!(
            "word {word} needs a bridge of arc length {total:.1}, which does not fit the s-range"
        )));
    }
    let params: Vec<f64> = cum.iter().map(|c| eta - half + c).collect();
    let tangent_in = -Complex64::from_polar(1.0, 3.0 * PI / 8.0);
    let tangent_out = Complex64::from_polar(1.0, 5.0 * PI / 8.0);
    CubicPath::from_points(&params, &dense, Some((tangent_in, tangent_out)))
}

/// Pullback of the straight line z(s) = s - iε under the two-branch-point
/// rectification map x = -i sqrt((1 - z²)^κ - 1), evaluated with branch
/// continuity along s.
pub fn make_pullback(kappa: f64, eps: f64, s_range: (f64, f64)) -> Result<Contour> {
    if !(kappa > 1.0) {
        return Err(Error::invalid("pullback needs kappa > 1"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("pullback needs eps > 0"));
    }
    let (s0, s1) = s_range;
    if !(s1 > s0) {
        return Err(Error::invalid("pullback needs a nonempty s-range"));
    }
    let track = Track::build(TrackKind::KappaForward { kappa, eps }, s_range, None)?;
    let w_left = track.eval(s0, None).0;
    let w_right = track.eval(s1, None).0;
    Ok(Contour {
        shape: Shape::Pullback { kappa, eps, track },
        domain: s_range,
        wedge_angles: (w_left.arg(), w_right.arg()),
    })
}

/// Straight segment from a to b, parametrized by arc length.
pub fn make_segment(a: Complex64, b: Complex64) -> Result<Contour> {
    let len = (b - a).norm();
    if len == 0.0 {
        return Err(Error::invalid("segment endpoints coincide"));
    }
    let dir = (b - a) / len;
    let path = CubicPath::from_nodes(vec![(0.0, a, dir), (len, b, dir)])?;
    Ok(Contour {
        shape: Shape::Custom { path },
        domain: (0.0, len),
        wedge_angles: ((a - b).arg(), (b - a).arg()),
    })
}

/// Contour through explicit samples; tangents by central differences.
pub fn from_samples(samples: &[(f64, Complex64)]) -> Result<Contour> {
    let params: Vec<f64> = samples.iter().map(|p| p.0).collect();
    let points: Vec<Complex64> = samples.iter().map(|p| p.1).collect();
    let path = CubicPath::from_points(&params, &points, None)?;
    let domain = path.domain();
    let n = points.len();
    let wedge = ((points[0]).arg(), (points[n - 1]).arg());
    Ok(Contour {
        shape: Shape::Custom { path },
        domain,
        wedge_angles: wedge,
    })
}

/// Push a contour through a rectification map with branch continuity.
pub(crate) fn map_contour(source: Contour, map: RectMap) -> Result<Contour> {
    let kind = match map {
        RectMap::AlphaInverse { alpha } => {
            if !(alpha > 0.0) {
                return Err(Error::invalid("alpha map needs alpha > 0"));
            }
            TrackKind::AlphaInverse { alpha }
        }
        RectMap::KappaInverse { kappa } => {
            if !(kappa > 1.0) {
                return Err(Error::invalid("kappa map needs kappa > 1"));
            }
            TrackKind::KappaInverse { kappa }
        }
    };
    let domain = source.domain;
    let track = Track::build(kind, domain, Some(&source))?;
    let z_left = track.eval(domain.0, Some(&source));
    let z_right = track.eval(domain.1, Some(&source));
    // continuous (multisheet) tail arguments from the tracked angles
    let wedge = (
        track.image_angle(domain.0, Some(&source)),
        track.image_angle(domain.1, Some(&source)),
    );
    let _ = (z_left, z_right);
    Ok(Contour {
        shape: Shape::Mapped {
            source: Box::new(source),
            map,
            track,
        },
        domain,
        wedge_angles: wedge,
    })
}

/// Branch-continuous evaluation of the map x = -i sqrt((1 - z²)^κ - 1) along
/// an explicit polyline of z values.  The principal branch is anchored where
/// the polyline meets the negative imaginary axis (or at the first point if
/// it never does).
pub fn kappa_map_points(zs: &[Complex64], kappa: f64) -> Result<Vec<Complex64>> {
    if zs.is_empty() {
        return Err(Error::invalid("empty point list"));
    }
    let mut theta_u = Vec::with_capacity(zs.len());
    let mut us = Vec::with_capacity(zs.len());
    for (i, z) in zs.iter().enumerate() {
        let u = 1.0 - z * z;
        if u.norm() < 1e-12 {
            return Err(Error::NearSingularity {
                s: i as f64,
                what: "z too close to ±1".into(),
            });
        }
        us.push(u);
        let raw = u.arg();
        let lifted = if i == 0 {
            raw
        } else {
            lift_near(raw, *theta_u.last().unwrap())
        };
        theta_u.push(lifted);
    }
    // re-anchor so the angle is principal at the axis crossing
    let anchor = zs
        .iter()
        .position(|z| z.re.abs() < 1e-12 && z.im < 0.0)
        .or_else(|| {
            zs.windows(2)
                .position(|w| w[0].re.signum() != w[1].re.signum() && w[0].im < 0.0)
        })
        .unwrap_or(0);
    let shift = 2.0 * PI * (theta_u[anchor] / (2.0 * PI)).round();
    for t in &mut theta_u {
        *t -= shift;
    }
    let mut theta_w = Vec::with_capacity(zs.len());
    let mut out = Vec::with_capacity(zs.len());
    let mut ws = Vec::with_capacity(zs.len());
    for i in 0..zs.len() {
        let w = Complex64::from_polar(us[i].norm().powf(kappa), kappa * theta_u[i])
            - Complex64::new(1.0, 0.0);
        if w.norm() < 1e-14 {
            return Err(Error::NearSingularity {
                s: i as f64,
                what: "map hits its branch point (x = 0)".into(),
            });
        }
        let raw = w.arg();
        let lifted = if i == 0 {
            raw
        } else {
            lift_near(raw, *theta_w.last().unwrap())
        };
        theta_w.push(lifted);
        ws.push(w);
    }
    let shift_w = 2.0 * PI * (theta_w[anchor] / (2.0 * PI)).round();
    for i in 0..zs.len() {
        let tw = theta_w[i] - shift_w;
        let x = -I * Complex64::from_polar(ws[i].norm().sqrt(), tw / 2.0);
        out.push(x);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// branch-continuation tracks

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum TrackKind {
    /// z(s) = s - iε, image x = -i sqrt((1-z²)^κ - 1)
    KappaForward { kappa: f64, eps: f64 },
    /// source contour x(s), image z = -i (i x)^(1/α)
    AlphaInverse { alpha: f64 },
    /// source contour x(s), image z = -i sqrt((1-x²)^(1/κ) - 1)
    KappaInverse { kappa: f64 },
}

#[derive(Debug, Clone, Copy)]
struct TrackNode {
    s: f64,
    a0: f64,
    a1: f64,
}

/// Dense table of continuously-tracked arguments for a multivalued map along
/// a path, with local lifting for evaluation at arbitrary parameters.
#[derive(Debug, Clone)]
pub struct Track {
    kind: TrackKind,
    nodes: Vec<TrackNode>,
}

impl Track {
    fn source_point(kind: TrackKind, s: f64, src: Option<&Contour>) -> (Complex64, Complex64) {
        match kind {
            TrackKind::KappaForward { eps, .. } => {
                (Complex64::new(s, -eps), Complex64::new(1.0, 0.0))
            }
            _ => {
                let c = src.expect("mapped track needs its source contour");
                c.eval(s)
            }
        }
    }

    /// Principal-value stage angles at s, lifted next to the provided hints.
    fn angles(
        kind: TrackKind,
        s: f64,
        src: Option<&Contour>,
        hint: Option<(f64, f64)>,
    ) -> Result<(f64, f64)> {
        let (p, _) = Track::source_point(kind, s, src);
        match kind {
            TrackKind::KappaForward { kappa, .. } => {
                let u = 1.0 - p * p;
                if u.norm() < 1e-10 {
                    return Err(Error::NearSingularity {
                        s,
                        what: "path too close to z = ±1".into(),
                    });
                }
                let a0 = match hint {
                    Some((h0, _)) => lift_near(u.arg(), h0),
                    None => u.arg(),
                };
                let w = Complex64::from_polar(u.norm().powf(kappa), kappa * a0)
                    - Complex64::new(1.0, 0.0);
                if w.norm() < 1e-12 {
                    return Err(Error::NearSingularity {
                        s,
                        what: "path too close to a zero of (1-z²)^κ - 1".into(),
                    });
                }
                let a1 = match hint {
                    Some((_, h1)) => lift_near(w.arg(), h1),
                    None => w.arg(),
                };
                Ok((a0, a1))
            }
            TrackKind::AlphaInverse { .. } => {
                if p.norm() < 1e-12 {
                    return Err(Error::NearSingularity {
                        s,
                        what: "source passes through the branch point x = 0".into(),
                    });
                }
                let v = I * p;
                let a0 = match hint {
                    Some((h0, _)) => lift_near(v.arg(), h0),
                    None => v.arg(),
                };
                Ok((a0, 0.0))
            }
            TrackKind::KappaInverse { kappa } => {
                let u = 1.0 - p * p;
                if u.norm() < 1e-10 {
                    return Err(Error::NearSingularity {
                        s,
                        what: "source too close to x = ±1".into(),
                    });
                }
                let a0 = match hint {
                    Some((h0, _)) => lift_near(u.arg(), h0),
                    None => u.arg(),
                };
                let m = Complex64::from_polar(u.norm().powf(1.0 / kappa), a0 / kappa)
                    - Complex64::new(1.0, 0.0);
                if m.norm() < 1e-12 {
                    return Err(Error::NearSingularity {
                        s,
                        what: "source too close to a zero of (1-x²)^(1/κ) - 1".into(),
                    });
                }
                let a1 = match hint {
                    Some((_, h1)) => lift_near(m.arg(), h1),
                    None => m.arg(),
                };
                Ok((a0, a1))
            }
        }
    }

    fn build(kind: TrackKind, domain: (f64, f64), src: Option<&Contour>) -> Result<Track> {
        let (s0, s1) = domain;
        let span = s1 - s0;
        // anchor: negative-imaginary-axis crossing of the source, else s0
        let mut anchor = s0;
        let probes = 1024;
        let mut prev = Track::source_point(kind, s0, src).0;
        for i in 1..=probes {
            let s = s0 + span * i as f64 / probes as f64;
            let p = Track::source_point(kind, s, src).0;
            if prev.re.signum() != p.re.signum() && p.im < 0.0 && prev.im < 0.0 {
                // bisect to the crossing
                let mut lo = s - span / probes as f64;
                let mut hi = s;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let pm = Track::source_point(kind, mid, src).0;
                    if pm.re.signum() == prev.re.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                anchor = 0.5 * (lo + hi);
                break;
            }
            prev = p;
        }
        let (a0, a1) = Track::angles(kind, anchor, src, None)?;
        let anchor_node = TrackNode { s: anchor, a0, a1 };

        let march = |target: f64| -> Result<Vec<TrackNode>> {
            let mut nodes = Vec::new();
            let dir = (target - anchor).signum();
            if dir == 0.0 {
                return Ok(nodes);
            }
            let h_max = span / 256.0;
            let h_min = span * 1e-9;
            let mut h = span / 1024.0;
            let mut cur = anchor_node;
            while (target - cur.s) * dir > 1e-15 * span {
                let step = h.min((target - cur.s) * dir);
                let s_next = cur.s + dir * step;
                let (b0, b1) = Track::angles(kind, s_next, src, Some((cur.a0, cur.a1)))?;
                let jump = (b0 - cur.a0).abs().max((b1 - cur.a1).abs());
                if jump > 0.35 && step > h_min {
                    h = step / 2.0;
                    continue;
                }
                if jump < 0.05 {
                    h = (step * 1.6).min(h_max);
                }
                cur = TrackNode {
                    s: s_next,
                    a0: b0,
                    a1: b1,
                };
                nodes.push(cur);
            }
            Ok(nodes)
        };

        let right = march(s1)?;
        let mut left = march(s0)?;
        left.reverse();
        let mut nodes = left;
        nodes.push(anchor_node);
        nodes.extend(right);
        if nodes.len() < 2 {
            return Err(Error::invalid("degenerate track domain"));
        }
        Ok(Track { kind, nodes })
    }

    fn hint_at(&self, s: f64) -> (f64, f64) {
        let n = self.nodes.len();
        if s <= self.nodes[0].s {
            return (self.nodes[0].a0, self.nodes[0].a1);
        }
        if s >= self.nodes[n - 1].s {
            return (self.nodes[n - 1].a0, self.nodes[n - 1].a1);
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.nodes[mid].s <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = self.nodes[lo];
        let b = self.nodes[hi];
        let t = (s - a.s) / (b.s - a.s);
        (a.a0 + t * (b.a0 - a.a0), a.a1 + t * (b.a1 - a.a1))
    }

    /// Image point and velocity at parameter s.
    fn eval(&self, s: f64, src: Option<&Contour>) -> (Complex64, Complex64) {
        let hint = self.hint_at(s);
        let (a0, a1) = Track::angles(self.kind, s, src, Some(hint))
            .expect("track evaluation inside a built domain");
        let (p, pv) = Track::source_point(self.kind, s, src);
        match self.kind {
            TrackKind::KappaForward { kappa, .. } => {
                let u = 1.0 - p * p;
                let u_pow = Complex64::from_polar(u.norm().powf(kappa), kappa * a0);
                let w = u_pow - 1.0;
                let x = -I * Complex64::from_polar(w.norm().sqrt(), a1 / 2.0);
                // dx/dz = κ z u^{κ-1} / x, and dz/ds = 1
                let v = kappa * p * (u_pow / u) / x * pv;
                (x, v)
            }
            TrackKind::AlphaInverse { alpha } => {
                let v_ix = I * p;
                let z = -I * Complex64::from_polar(v_ix.norm().powf(1.0 / alpha), a0 / alpha);
                // dz/dx = z / (α x)
                let v = z / (alpha * p) * pv;
                (z, v)
            }
            TrackKind::KappaInverse { kappa } => {
                let u = 1.0 - p * p;
                let q = Complex64::from_polar(u.norm().powf(1.0 / kappa), a0 / kappa);
                let m = q - 1.0;
                let z = -I * Complex64::from_polar(m.norm().sqrt(), a1 / 2.0);
                // dz/dx = x q / (κ u z)
                let v = p * q / (kappa * u * z) * pv;
                (z, v)
            }
        }
    }

    /// Continuous argument of the image point at s (multisheet label).
    fn image_angle(&self, s: f64, src: Option<&Contour>) -> f64 {
        let hint = self.hint_at(s);
        match self.kind {
            TrackKind::KappaForward { .. } => -PI / 2.0 + hint.1 / 2.0,
            TrackKind::AlphaInverse { alpha } => {
                let _ = src;
                -PI / 2.0 + hint.0 / alpha
            }
            TrackKind::KappaInverse { .. } => -PI / 2.0 + hint.1 / 2.0,
        }
    }
}
