//! Analytic potentials with poles, and their asymptotic decay wedges.
//!
//! A potential is stored as a PT-polynomial Σ g_β (ix)^β with integer
//! exponents plus a sum of second-order poles Σ G/(x - x₀)².  Integer powers
//! of (ix) are single-valued, so evaluation carries no branch ambiguity;
//! non-integer exponents would introduce branch points of V itself and are
//! rejected at construction.

use crate::{Complex64, Error, Result};
use std::f64::consts::PI;
use std::fmt;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Anything that can serve as the potential term of the Schrödinger
/// equation along a contour.
pub trait PotentialField: Sync {
    fn value(&self, x: Complex64) -> Result<Complex64>;
}

/// Σ g_β (ix)^β + Σ G/(x - x₀)².
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    /// (exponent β, coefficient g_β), sorted by exponent, interpreted as
    /// g_β (ix)^β
    pt_polynomial: Vec<(i32, Complex64)>,
    /// (location, strength), interpreted as strength / (x - location)²
    poles: Vec<(Complex64, Complex64)>,
}

impl Potential {
    pub fn new(
        pt_polynomial: Vec<(i32, Complex64)>,
        poles: Vec<(Complex64, Complex64)>,
    ) -> Result<Potential> {
        let mut terms: Vec<(i32, Complex64)> = Vec::new();
        for (beta, g) in pt_polynomial {
            if !g.re.is_finite() || !g.im.is_finite() {
                return Err(Error::invalid("non-finite polynomial coefficient"));
            }
            if g.norm() == 0.0 {
                continue;
            }
            match terms.iter_mut().find(|(b, _)| *b == beta) {
                Some((_, acc)) => *acc += g,
                None => terms.push((beta, g)),
            }
        }
        terms.retain(|(_, g)| g.norm() > 0.0);
        terms.sort_by_key(|(b, _)| *b);
        for (loc, strength) in &poles {
            if !loc.is_finite() || !strength.is_finite() {
                return Err(Error::invalid("non-finite pole data"));
            }
        }
        Ok(Potential {
            pt_polynomial: terms,
            poles,
        })
    }

    /// The PT-symmetric harmonic oscillator V = x² + ℓ(ℓ+1)/x².
    /// x² = -(ix)² and the centrifugal term is a second-order pole at 0.
    pub fn pt_harmonic(ell: f64) -> Potential {
        let mut poles = Vec::new();
        let strength = ell * (ell + 1.0);
        if strength != 0.0 {
            poles.push((Complex64::new(0.0, 0.0), Complex64::new(strength, 0.0)));
        }
        Potential {
            pt_polynomial: vec![(2, Complex64::new(-1.0, 0.0))],
            poles,
        }
    }

    /// Two second-order poles of strengths G and G* at +1 and -1 on top of a
    /// PT-polynomial part.
    pub fn two_pole(regular: Vec<(i32, Complex64)>, g: Complex64) -> Result<Potential> {
        Potential::new(
            regular,
            vec![
                (Complex64::new(1.0, 0.0), g),
                (Complex64::new(-1.0, 0.0), g.conj()),
            ],
        )
    }

    pub fn pt_polynomial(&self) -> &[(i32, Complex64)] {
        &self.pt_polynomial
    }

    pub fn poles(&self) -> &[(Complex64, Complex64)] {
        &self.poles
    }

    /// Maximal polynomial exponent (dominant growth), if any.
    pub fn leading_power(&self) -> Option<(i32, Complex64)> {
        self.pt_polynomial.last().copied()
    }

    /// Evaluate at x.  Errors when x coincides with a pole location.
    pub fn evaluate(&self, x: Complex64) -> Result<Complex64> {
        let mut v = Complex64::new(0.0, 0.0);
        let ix = I * x;
        for &(beta, g) in &self.pt_polynomial {
            v += g * ix.powi(beta);
        }
        for &(loc, strength) in &self.poles {
            let d = x - loc;
            if d.norm() < 1e-12 * (1.0 + loc.norm()) {
                return Err(Error::PoleEvaluation(x));
            }
            v += strength / (d * d);
        }
        Ok(v)
    }

    /// Symbolic PT check: true iff V(-conj(x)) = conj(V(x)) for the stored
    /// representation, i.e. all polynomial coefficients are real and the
    /// pole set is invariant under (x₀, G) ↦ (-conj(x₀), conj(G)).
    pub fn pt_check(&self) -> bool {
        if self.pt_polynomial.iter().any(|(_, g)| g.im != 0.0) {
            return false;
        }
        self.poles.iter().all(|(loc, strength)| {
            let mloc = -loc.conj();
            let mstr = strength.conj();
            self.poles
                .iter()
                .any(|(l, s)| (l - mloc).norm() <= 1e-12 * (1.0 + loc.norm()) && (s - mstr).norm() <= 1e-12 * (1.0 + strength.norm()))
        })
    }

    /// Literal syntax: `poly:(beta,re,im);...|pole:(re,im,sre,sim);...`
    pub fn parse_literal(s: &str) -> Result<Potential> {
        let mut poly = Vec::new();
        let mut poles = Vec::new();
        for part in s.split('|') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            if let Some(body) = part.strip_prefix("poly:") {
                for term in body.split(';').filter(|t| !t.is_empty()) {
                    let nums = parse_tuple(term, 3)?;
                    poly.push((nums[0] as i32, Complex64::new(nums[1], nums[2])));
                }
            } else if let Some(body) = part.strip_prefix("pole:") {
                for term in body.split(';').filter(|t| !t.is_empty()) {
                    let nums = parse_tuple(term, 4)?;
                    poles.push((
                        Complex64::new(nums[0], nums[1]),
                        Complex64::new(nums[2], nums[3]),
                    ));
                }
            } else {
                return Err(Error::invalid(format!("unknown potential section `{part}`")));
            }
        }
        Potential::new(poly, poles)
    }

    /// Inverse of [`Potential::parse_literal`].
    pub fn literal(&self) -> String {
        let mut out = String::new();
        if !self.pt_polynomial.is_empty() {
            out.push_str("poly:");
            for (i, (b, g)) in self.pt_polynomial.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                out.push_str(&format!("({},{},{})", b, g.re, g.im));
            }
        }
        if !self.poles.is_empty() {
            if !out.is_empty() {
                out.push('|');
            }
            out.push_str("pole:");
            for (i, (l, s)) in self.poles.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                out.push_str(&format!("({},{},{},{})", l.re, l.im, s.re, s.im));
            }
        }
        if out.is_empty() {
            out.push_str("poly:");
        }
        out
    }
}

impl PotentialField for Potential {
    fn value(&self, x: Complex64) -> Result<Complex64> {
        self.evaluate(x)
    }
}

fn parse_tuple(term: &str, arity: usize) -> Result<Vec<f64>> {
    let t = term.trim();
    let inner = t
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::invalid(format!("expected (..) in `{term}`")))?;
    let nums: Vec<f64> = inner
        .split(',')
        .map(|n| n.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::invalid(format!("bad number in `{term}`: {e}")))?;
    if nums.len() != arity {
        return Err(Error::invalid(format!(
            "expected {arity} numbers in `{term}`, got {}",
            nums.len()
        )));
    }
    Ok(nums)
}

/// Exact rational multiple of π.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalPi {
    pub num: i64,
    pub den: i64,
}

impl RationalPi {
    pub fn new(num: i64, den: i64) -> RationalPi {
        RationalPi { num, den }
    }

    pub fn to_f64(self) -> f64 {
        PI * self.num as f64 / self.den as f64
    }
}

impl fmt::Display for RationalPi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}·π", self.num, self.den)
    }
}

/// One PT pair of anti-Stokes-bounded wedges, with exact rational-π
/// boundaries.  `branch_sign` records which WKB exponent sign decays in the
/// pair: -1 for exp(-x^(k+1)/(k+1)), +1 for its reciprocal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WedgePair {
    pub label: String,
    pub right: (RationalPi, RationalPi),
    pub left: (RationalPi, RationalPi),
    pub branch_sign: i32,
}

impl WedgePair {
    pub fn right_f64(&self) -> (f64, f64) {
        (self.right.0.to_f64(), self.right.1.to_f64())
    }

    pub fn left_f64(&self) -> (f64, f64) {
        (self.left.0.to_f64(), self.left.1.to_f64())
    }
}

const ORDINALS: [&str; 12] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
    "tenth", "eleventh", "twelfth",
];

/// Eligible PT pairs of angular wedges for a potential growing like x^(2k).
///
/// The wedges are bounded by the anti-Stokes lines of exp(±x^(k+1)/(k+1)),
/// i.e. by cos((k+1)θ) = 0; each has width π/(k+1).  Counting away from the
/// downward bisector arg x = -π/2, the m-th right wedge spans
///   (-π/2 + (2m-1)π/(2k+2), -π/2 + (2m+1)π/(2k+2)),
/// its left partner is the mirror about -π/2, and the pairs that stay inside
/// a single winding of the contour tails are m = 1..k.  In odd-m wedges the
/// exponentially small branch is exp(-x^(k+1)/(k+1)); in even-m wedges it is
/// the reciprocal.
pub fn decay_wedges(k: u32) -> Result<Vec<WedgePair>> {
    if k == 0 {
        return Err(Error::invalid("decay wedges need k >= 1"));
    }
    if k % 2 == 0 {
        return Err(Error::invalid(
            "wedge-pair enumeration about the downward bisector needs odd k; \
             for even k the bisector arg x = -π/2 is itself an anti-Stokes line",
        ));
    }
    let den = 2 * (k as i64 + 1);
    let mut pairs = Vec::new();
    for m in 1..=(k as i64) {
        let lo = 2 * m - 1;
        let hi = 2 * m + 1;
        // boundaries as single fractions of π with the uniform denominator
        let right = (
            RationalPi::new(-(k as i64 + 1) + lo, den),
            RationalPi::new(-(k as i64 + 1) + hi, den),
        );
        let left = (
            RationalPi::new(-(k as i64 + 1) - lo, den),
            RationalPi::new(-(k as i64 + 1) - hi, den),
        );
        let label = ORDINALS
            .get((m - 1) as usize)
            .map(|s| s.to_string())
            .unwrap_or_else(|| format!("#{m}"));
        // cos((k+1)·θ_mid) = (-1)^(m - (k+1)/2); exp(-x^(k+1)/(k+1)) decays
        // where that cosine is +1
        let half = (k as i64 + 1) / 2;
        let branch_sign = if (m - half).rem_euclid(2) == 0 { -1 } else { 1 };
        pairs.push(WedgePair {
            label,
            right,
            left,
            branch_sign,
        });
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn harmonic_is_x_squared() {
        let v = Potential::pt_harmonic(0.0);
        let val = v.evaluate(Complex64::new(2.0, 0.0)).unwrap();
        assert_relative_eq!(val.re, 4.0, epsilon = 1e-14);
        assert_relative_eq!(val.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn two_pole_value_at_i() {
        let v = Potential::two_pole(vec![], Complex64::new(1.0, 1.0)).unwrap();
        let val = v.evaluate(Complex64::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(val.re, -1.0, epsilon = 1e-14);
        assert_relative_eq!(val.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn centrifugal_pole() {
        let v = Potential::pt_harmonic(1.0);
        let val = v.evaluate(Complex64::new(0.5, 0.0)).unwrap();
        // x² + 2/x² = 0.25 + 8
        assert_relative_eq!(val.re, 8.25, epsilon = 1e-12);
        assert!(v.evaluate(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn evaluate_matches_independent_summation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let v = Potential::new(
            vec![
                (6, Complex64::new(-1.0, 0.0)),
                (3, Complex64::new(0.5, 0.0)),
                (-2, Complex64::new(2.0, 0.0)),
            ],
            vec![(Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.7))],
        )
        .unwrap();
        for _ in 0..50 {
            let x = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            if (x - Complex64::new(1.0, 0.0)).norm() < 0.1 || x.norm() < 0.1 {
                continue;
            }
            // direct summation without powi
            let ix = Complex64::new(0.0, 1.0) * x;
            let mut direct = Complex64::new(0.0, 0.0);
            let mut p6 = Complex64::new(1.0, 0.0);
            for _ in 0..6 {
                p6 *= ix;
            }
            let mut p3 = Complex64::new(1.0, 0.0);
            for _ in 0..3 {
                p3 *= ix;
            }
            direct += Complex64::new(-1.0, 0.0) * p6;
            direct += Complex64::new(0.5, 0.0) * p3;
            direct += Complex64::new(2.0, 0.0) / (ix * ix);
            let d = x - Complex64::new(1.0, 0.0);
            direct += Complex64::new(0.3, 0.7) / (d * d);
            let got = v.evaluate(x).unwrap();
            assert!((got - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn pt_check_cases() {
        // x² + i g₁ x = -(ix)² + g₁(ix): real coefficients in the (ix) basis
        let v = Potential::new(
            vec![(2, Complex64::new(-1.0, 0.0)), (1, Complex64::new(0.7, 0.0))],
            vec![],
        )
        .unwrap();
        assert!(v.pt_check());
        let single = Potential::new(
            vec![],
            vec![(Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.4))],
        )
        .unwrap();
        assert!(!single.pt_check());
        let pair = Potential::two_pole(vec![], Complex64::new(0.2, 0.4)).unwrap();
        assert!(pair.pt_check());
    }

    #[test]
    fn pt_check_implies_numeric_symmetry() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let v = Potential::two_pole(
            vec![(2, Complex64::new(-1.0, 0.0)), (4, Complex64::new(0.3, 0.0))],
            Complex64::new(0.5, 1.5),
        )
        .unwrap();
        assert!(v.pt_check());
        for _ in 0..100 {
            let x = Complex64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
            if (x - Complex64::new(1.0, 0.0)).norm() < 0.2
                || (x + Complex64::new(1.0, 0.0)).norm() < 0.2
            {
                continue;
            }
            let a = v.evaluate(-x.conj()).unwrap();
            let b = v.evaluate(x).unwrap().conj();
            assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn wedge_widths_and_midpoints() {
        for k in [1u32, 3, 5, 7] {
            let pairs = decay_wedges(k).unwrap();
            assert_eq!(pairs.len(), k as usize);
            for p in &pairs {
                let (a, b) = p.right_f64();
                assert_relative_eq!(b - a, PI / (k as f64 + 1.0), epsilon = 1e-12);
                let mid = 0.5 * (a + b);
                // wedge centers are extrema of cos((k+1)θ); the pairs where
                // exp(-x^(k+1)/(k+1)) itself decays sit at cos = +1 exactly
                let c = ((k as f64 + 1.0) * mid).cos();
                assert_relative_eq!(c.abs(), 1.0, epsilon = 1e-12);
                if p.branch_sign == -1 {
                    assert_relative_eq!(c, 1.0, epsilon = 1e-12);
                }
                // left is the mirror of right about -π/2
                let (la, lb) = p.left_f64();
                assert_relative_eq!(la + a, -PI, epsilon = 1e-12);
                assert_relative_eq!(lb + b, -PI, epsilon = 1e-12);
            }
        }
        assert!(decay_wedges(2).is_err());
    }

    #[test]
    fn decadic_wedges_match_known_pairs() {
        let pairs = decay_wedges(5).unwrap();
        assert_eq!(pairs.len(), 5);
        // first right = (-π/2 + π/12, -π/2 + 3π/12) = (-5π/12, -3π/12)
        assert_eq!(pairs[0].right.0, RationalPi::new(-5, 12));
        assert_eq!(pairs[0].right.1, RationalPi::new(-3, 12));
        // fifth left = (-π/2 - 9π/12, -π/2 - 11π/12) = (-15π/12, -17π/12)
        assert_eq!(pairs[4].left.0, RationalPi::new(-15, 12));
        assert_eq!(pairs[4].left.1, RationalPi::new(-17, 12));
    }

    #[test]
    fn harmonic_wedge_about_positive_real_axis() {
        let pairs = decay_wedges(1).unwrap();
        assert_eq!(pairs.len(), 1);
        let (a, b) = pairs[0].right_f64();
        assert_relative_eq!(a, -PI / 4.0, epsilon = 1e-14);
        assert_relative_eq!(b, PI / 4.0, epsilon = 1e-14);
        assert_eq!(pairs[0].branch_sign, -1);
    }

    #[test]
    fn literal_round_trip() {
        let v = Potential::two_pole(vec![(2, Complex64::new(-1.0, 0.0))], Complex64::new(1.0, 1.0))
            .unwrap();
        let lit = v.literal();
        let back = Potential::parse_literal(&lit).unwrap();
        assert_eq!(v, back);
    }
}
