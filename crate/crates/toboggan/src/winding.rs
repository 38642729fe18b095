//! Winding descriptors of contours around branch points.
//!
//! Paths around two branch points are labeled by reduced words over the
//! four-letter alphabet {L, R, L⁻¹, R⁻¹}: L and R stand for counterclockwise
//! loops around the left and right branch point, their inverses for the
//! clockwise loops.  Adjacent inverse pairs cancel, so the labels live in
//! the free group on two generators.
//!
//! Numerically a word is read off a contour by tracking signed crossings of
//! vertical cuts drawn upward from each branch point.  A counterclockwise
//! loop crosses its cut westward (decreasing real part).  Crossings compose
//! like monodromy operators, right to left: the first crossing along the
//! contour is the rightmost letter of the word.

use crate::contour::{BranchPointSet, Contour};
use crate::{Complex64, Error, Result};
use std::f64::consts::PI;
use std::fmt;

/// Which branch point a letter winds around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    L,
    R,
}

/// One letter of a winding word: a base and an orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    base: Base,
    /// false = counterclockwise (exponent +1), true = clockwise (exponent -1)
    inverse: bool,
}

impl Letter {
    pub fn new(base: Base, inverse: bool) -> Letter {
        Letter { base, inverse }
    }

    /// All four letters in lexicographic order L, L⁻¹, R, R⁻¹.
    pub fn alphabet() -> [Letter; 4] {
        [
            Letter::new(Base::L, false),
            Letter::new(Base::L, true),
            Letter::new(Base::R, false),
            Letter::new(Base::R, true),
        ]
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn exponent(&self) -> i32 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn is_left(&self) -> bool {
        self.base == Base::L
    }

    pub fn is_counterclockwise(&self) -> bool {
        !self.inverse
    }

    pub fn inverted(&self) -> Letter {
        Letter {
            base: self.base,
            inverse: !self.inverse,
        }
    }

    /// PT image of a letter: L ↔ R with the exponent preserved.
    pub fn pt_swapped(&self) -> Letter {
        Letter {
            base: match self.base {
                Base::L => Base::R,
                Base::R => Base::L,
            },
            inverse: self.inverse,
        }
    }

    pub fn cancels(&self, other: &Letter) -> bool {
        self.base == other.base && self.inverse != other.inverse
    }

    pub fn parse(tok: &str) -> Result<Letter> {
        match tok {
            "L" => Ok(Letter::new(Base::L, false)),
            "L^-1" => Ok(Letter::new(Base::L, true)),
            "R" => Ok(Letter::new(Base::R, false)),
            "R^-1" => Ok(Letter::new(Base::R, true)),
            _ => Err(Error::invalid(format!("unknown letter `{tok}`"))),
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.base {
            Base::L => "L",
            Base::R => "R",
        };
        if self.inverse {
            write!(f, "{b}^-1")
        } else {
            write!(f, "{b}")
        }
    }
}

/// A word over the four-letter alphabet; not necessarily reduced.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindingWord {
    letters: Vec<Letter>,
}

impl WindingWord {
    pub fn new(letters: Vec<Letter>) -> WindingWord {
        WindingWord { letters }
    }

    pub fn empty() -> WindingWord {
        WindingWord { letters: vec![] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// True when no adjacent pair cancels.
    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| !w[0].cancels(&w[1]))
    }

    /// Cancel adjacent inverse pairs until a fixed point is reached.
    pub fn reduce(&self) -> WindingWord {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if stack.last().is_some_and(|top| top.cancels(&l)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        WindingWord { letters: stack }
    }

    /// Plain concatenation (no reduction).
    pub fn concat(&self, other: &WindingWord) -> WindingWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        WindingWord { letters }
    }

    /// Group inverse: reversed order, every letter inverted.
    pub fn inverse(&self) -> WindingWord {
        WindingWord {
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    /// PT transpose: reversed order with L ↔ R and exponents preserved.
    pub fn pt_transpose(&self) -> WindingWord {
        WindingWord {
            letters: self.letters.iter().rev().map(|l| l.pt_swapped()).collect(),
        }
    }

    pub fn parse_word(s: &str) -> Result<WindingWord> {
        let s = s.trim();
        if s.is_empty() || s == "∅" {
            return Ok(WindingWord::empty());
        }
        let mut letters = Vec::new();
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c != 'L' && c != 'R' {
                return Err(Error::invalid(format!("unexpected `{c}` in word `{s}`")));
            }
            let mut inverse = false;
            if chars.get(i + 1) == Some(&'^') {
                if chars.get(i + 2) == Some(&'-') && chars.get(i + 3) == Some(&'1') {
                    inverse = true;
                    i += 3;
                } else {
                    return Err(Error::invalid(format!("bad exponent in word `{s}`")));
                }
            }
            letters.push(Letter::new(
                if c == 'L' { Base::L } else { Base::R },
                inverse,
            ));
            i += 1;
        }
        Ok(WindingWord { letters })
    }

    /// Shorthand used internally.
    pub fn from_str_word(s: &str) -> Result<WindingWord> {
        WindingWord::parse_word(s)
    }
}

impl fmt::Display for WindingWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "∅");
        }
        for l in &self.letters {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for WindingWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<WindingWord> {
        WindingWord::parse_word(s)
    }
}

/// PT extension ϱ = Ω · Ωᵀ of a reduced half-word.  The junction never
/// cancels because the transpose swaps the base but keeps the exponent.
pub fn pt_extend(half: &WindingWord) -> WindingWord {
    debug_assert!(half.is_reduced());
    let full = half.concat(&half.pt_transpose());
    debug_assert!(full.is_reduced());
    full
}

/// All reduced half-words of length n over the four-letter alphabet, in
/// lexicographic order (L < L⁻¹ < R < R⁻¹).  There are 4·3^(n-1) of them.
pub fn enumerate_half_words(n: usize) -> Result<Vec<WindingWord>> {
    if n == 0 {
        return Err(Error::invalid("half-word length must be at least 1"));
    }
    let mut words: Vec<Vec<Letter>> = Letter::alphabet().iter().map(|&l| vec![l]).collect();
    for _ in 1..n {
        let mut next = Vec::with_capacity(words.len() * 3);
        for w in &words {
            let last = *w.last().unwrap();
            for l in Letter::alphabet() {
                if !last.cancels(&l) {
                    let mut e = w.clone();
                    e.push(l);
                    next.push(e);
                }
            }
        }
        words = next;
    }
    Ok(words.into_iter().map(WindingWord::new).collect())
}

/// Total continuous change of arg(x(s) - point) along the whole contour.
pub fn winding_angle(contour: &Contour, point: Complex64) -> Result<f64> {
    let (s0, s1) = contour.domain();
    winding_angle_over(contour, point, s0, s1)
}

/// Total continuous change of arg(x(s) - point) over [sa, sb], by argument
/// tracking on progressively refined samples.
pub fn winding_angle_over(contour: &Contour, point: Complex64, sa: f64, sb: f64) -> Result<f64> {
    let guard = 1e-9 * (1.0 + point.norm());
    let mut count = 4096usize;
    let mut prev_total: Option<f64> = None;
    loop {
        let mut total = 0.0;
        let mut last_arg: Option<f64> = None;
        let mut max_jump = 0.0f64;
        for i in 0..=count {
            let s = sa + (sb - sa) * i as f64 / count as f64;
            let d = contour.position(s) - point;
            if d.norm() < guard {
                return Err(Error::NearSingularity {
                    s,
                    what: "contour sample coincides with the winding center".into(),
                });
            }
            let a = d.arg();
            if let Some(p) = last_arg {
                let mut step = a - p;
                while step > PI {
                    step -= 2.0 * PI;
                }
                while step < -PI {
                    step += 2.0 * PI;
                }
                max_jump = max_jump.max(step.abs());
                total += step;
            }
            last_arg = Some(a);
        }
        let stable = prev_total.is_some_and(|p| (p - total).abs() < 1e-10 * (1.0 + total.abs()));
        if (max_jump < PI / 2.0 && stable) || count >= (1 << 20) {
            if max_jump >= PI / 2.0 {
                return Err(Error::NumericFailure(
                    "argument tracking did not stabilize".into(),
                ));
            }
            return Ok(total);
        }
        prev_total = Some(total);
        count *= 2;
    }
}

/// Classify a contour around exactly two branch points by its reduced word
/// of signed cut crossings.  Cuts are vertical rays drawn upward from each
/// branch point; westward crossings are counterclockwise letters.  Crossings
/// compose right to left.
pub fn classify_word(contour: &Contour, branch_points: &BranchPointSet) -> Result<WindingWord> {
    if branch_points.points().len() != 2 {
        return Err(Error::invalid("classification needs exactly two branch points"));
    }
    let mut bps = branch_points.points().to_vec();
    bps.sort_by(|a, b| a.re.total_cmp(&b.re));
    if (bps[0].re - bps[1].re).abs() < 1e-12 {
        return Err(Error::invalid("branch points must differ in real part"));
    }

    let mut count = 4096usize;
    let mut prev: Option<WindingWord> = None;
    loop {
        let word = classify_at_density(contour, &bps, count)?;
        if prev.as_ref() == Some(&word) {
            return Ok(word);
        }
        if count >= (1 << 17) {
            return Err(Error::NumericFailure(
                "cut-crossing word did not stabilize under refinement".into(),
            ));
        }
        prev = Some(word);
        count *= 2;
    }
}

fn classify_at_density(
    contour: &Contour,
    bps: &[Complex64],
    count: usize,
) -> Result<WindingWord> {
    let (s0, s1) = contour.domain();
    let guard = 1e-9 * (1.0 + bps[1].norm());
    let xs: Vec<(f64, Complex64)> = (0..=count)
        .map(|i| {
            let s = s0 + (s1 - s0) * i as f64 / count as f64;
            (s, contour.position(s))
        })
        .collect();
    // traversal-ordered crossings, composed right to left
    let mut letters_rev: Vec<Letter> = Vec::new();
    let mut crossings: Vec<(f64, Letter)> = Vec::new();
    for (which, bp) in bps.iter().enumerate() {
        let base = if which == 0 { Base::L } else { Base::R };
        let mut prev_sign = 0i8;
        for w in xs.windows(2) {
            let (sa, xa) = w[0];
            let (sb, xb) = w[1];
            let da = xa.re - bp.re;
            let db = xb.re - bp.re;
            let sign_a = if da > 0.0 {
                1
            } else if da < 0.0 {
                -1
            } else {
                prev_sign
            };
            let sign_b = if db > 0.0 {
                1
            } else if db < 0.0 {
                -1
            } else {
                sign_a
            };
            if sign_a != 0 && sign_b != 0 && sign_a != sign_b {
                // bisect for the crossing parameter
                let (mut lo, mut hi) = (sa, sb);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let d = contour.position(mid).re - bp.re;
                    let sm = if d > 0.0 { 1 } else { -1 };
                    if sm == sign_a {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let s_cross = 0.5 * (lo + hi);
                let x_cross = contour.position(s_cross);
                let height = x_cross.im - bp.im;
                if height.abs() < guard {
                    return Err(Error::NearSingularity {
                        s: s_cross,
                        what: "contour touches a cut endpoint".into(),
                    });
                }
                if height > 0.0 {
                    // westward (sign 1 → -1) is counterclockwise
                    let inverse = sign_b > sign_a;
                    crossings.push((s_cross, Letter::new(base, inverse)));
                }
            }
            prev_sign = sign_b;
        }
    }
    crossings.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, l) in crossings {
        letters_rev.push(l);
    }
    letters_rev.reverse();
    Ok(WindingWord::new(letters_rev).reduce())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{make_spiral, make_straight, make_toboggan2, make_toboggan2_with_word};
    use approx::assert_relative_eq;

    fn w(s: &str) -> WindingWord {
        WindingWord::parse_word(s).unwrap()
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(w("LL^-1R").reduce(), w("R"));
        assert_eq!(w("LRL^-1").reduce(), w("LRL^-1"));
        assert_eq!(w("LL^-1L^-1L").reduce(), WindingWord::empty());
    }

    #[test]
    fn pt_extension_examples() {
        assert_eq!(pt_extend(&w("L")), w("LR"));
        assert_eq!(pt_extend(&w("R^-1")), w("R^-1L^-1"));
        // reverse of LR⁻¹ is R⁻¹L, swapping bases gives L⁻¹R
        assert_eq!(pt_extend(&w("LR^-1")), w("LR^-1L^-1R"));
    }

    #[test]
    fn enumeration_counts() {
        let n1 = enumerate_half_words(1).unwrap();
        assert_eq!(n1, vec![w("L"), w("L^-1"), w("R"), w("R^-1")]);
        assert_eq!(enumerate_half_words(2).unwrap().len(), 12);
        assert_eq!(enumerate_half_words(3).unwrap().len(), 36);
        for n in 1..=6 {
            let words = enumerate_half_words(n).unwrap();
            assert_eq!(words.len(), 4 * 3usize.pow(n as u32 - 1));
            for word in &words {
                assert!(word.is_reduced());
                assert_eq!(word.len(), n);
                let full = pt_extend(word);
                assert_eq!(full.len(), 2 * n);
                assert!(full.is_reduced());
            }
            let mut dedup = words.clone();
            dedup.dedup();
            assert_eq!(dedup.len(), words.len());
        }
    }

    #[test]
    fn n1_full_words_match_known_list() {
        let full: Vec<String> = enumerate_half_words(1)
            .unwrap()
            .iter()
            .map(|h| pt_extend(h).to_string())
            .collect();
        assert_eq!(full, vec!["LR", "L^-1R^-1", "RL", "R^-1L^-1"]);
    }

    #[test]
    fn straight_contour_winding_angles() {
        let c = make_straight(1.0, 100.0).unwrap();
        let below = winding_angle(&c, Complex64::new(0.0, -2.0)).unwrap();
        let above = winding_angle(&c, Complex64::new(0.0, 2.0)).unwrap();
        // the exact sweep for a finite segment: π - 2·atan(offset/halfWidth)
        let exact = std::f64::consts::PI - 2.0 * (1.0f64 / 100.0).atan();
        assert_relative_eq!(below.abs(), exact, epsilon = 1e-9);
        assert_relative_eq!(above.abs(), std::f64::consts::PI - 2.0 * (3.0f64 / 100.0).atan(), epsilon = 1e-9);
        assert!((below.abs() - std::f64::consts::PI).abs() < 0.07);
        assert!(below * above < 0.0);
    }

    #[test]
    fn spiral_winding_angle_matches_parameter_sweep() {
        for n in 0..=3u32 {
            let cutoff = 1e-2;
            let c = make_spiral(n, 1.0, cutoff).unwrap();
            let total = winding_angle(&c, Complex64::new(0.0, 0.0)).unwrap();
            let want = (2.0 * n as f64 + 1.0) * std::f64::consts::PI - 2.0 * cutoff;
            assert_relative_eq!(total, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn straight_contour_word_is_empty() {
        let c = make_straight(0.5, 30.0).unwrap();
        let word = classify_word(&c, &BranchPointSet::pair_unit()).unwrap();
        assert!(word.is_empty());
    }

    #[test]
    fn default_toboggan_realizes_lr_and_reversal_inverts() {
        let c = make_toboggan2(0.0, 0.2, 0.1, (-30.0, 30.0)).unwrap();
        let word = classify_word(&c, &BranchPointSet::pair_unit()).unwrap();
        assert_eq!(word, w("LR"));
        let rev = c.reverse();
        let word_rev = classify_word(&rev, &BranchPointSet::pair_unit()).unwrap();
        assert_eq!(word_rev, w("LR").inverse());
        assert_eq!(word_rev, w("R^-1L^-1"));
    }

    #[test]
    fn weave_realizes_other_n1_words() {
        for target in ["RL", "L^-1R^-1", "R^-1L^-1"] {
            let word = w(target);
            let c = make_toboggan2_with_word(0.0, 0.2, 0.1, (-60.0, 60.0), &word).unwrap();
            let got = classify_word(&c, &BranchPointSet::pair_unit()).unwrap();
            assert_eq!(got, word, "requested {target}");
        }
    }

    #[test]
    fn weave_realizes_an_n2_word() {
        let word = pt_extend(&w("LL"));
        assert_eq!(word, w("LLRR"));
        let c = make_toboggan2_with_word(0.0, 0.2, 0.1, (-80.0, 80.0), &word).unwrap();
        let got = classify_word(&c, &BranchPointSet::pair_unit()).unwrap();
        assert_eq!(got, word);
    }

    #[test]
    fn unreduced_requests_are_unsupported() {
        let word = w("LL^-1");
        let err = make_toboggan2_with_word(0.0, 0.2, 0.1, (-30.0, 30.0), &word).unwrap_err();
        assert!(matches!(err, Error::UnsupportedWord(_)));
    }

    #[test]
    fn classification_stable_under_resampling() {
        let c = make_toboggan2(0.0, 0.2, 0.1, (-30.0, 30.0)).unwrap();
        let bps = BranchPointSet::pair_unit();
        let w1 = super::classify_at_density(&c, bps.points(), 1000).unwrap();
        let w2 = super::classify_at_density(&c, bps.points(), 10000).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn winding_angle_is_additive() {
        let c = make_spiral(2, 1.0, 1e-2).unwrap();
        let p = Complex64::new(0.0, 0.0);
        let (s0, s1) = c.domain();
        let sm = 0.3 * s0 + 0.7 * s1;
        let total = winding_angle(&c, p).unwrap();
        let a = winding_angle_over(&c, p, s0, sm).unwrap();
        let b = winding_angle_over(&c, p, sm, s1).unwrap();
        assert_relative_eq!(a + b, total, epsilon = 1e-6);
    }
}
