//! Bound-state location by two-sided shooting and Wronskian matching.
//!
//! For a trial energy E two solutions are started from WKB boundary states
//! at large |x| on either tail of the contour and propagated to a matching
//! point s_m.  The scale-free Wronskian
//!
//!   W(E) = (ψ_L ψ'_R - ψ'_L ψ_R) / (|ψ_L ψ_R| + |ψ'_L ψ'_R|)
//!
//! vanishes exactly when the two half-solutions are linearly dependent,
//! i.e. at the bound-state energies.  Roots are bracketed on an energy grid
//! by sign changes and phase rotation of the analytic function W(E) and
//! polished by a Muller iteration.

use crate::contour::Contour;
use crate::integrator::{asymptotic_init, propagate, wronskian, BoundaryState};
use crate::potential::{Potential, PotentialField};
use crate::{Complex64, Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Energy window to scan: a real segment when `center` is real, otherwise a
/// square complex rectangle of the given half-width.
#[derive(Debug, Clone, Copy)]
pub struct SpectralWindow {
    pub center: Complex64,
    pub half_width: f64,
    pub grid_count: usize,
}

impl SpectralWindow {
    pub fn real(lo: f64, hi: f64, grid_count: usize) -> Result<SpectralWindow> {
        if !(hi > lo) {
            return Err(Error::invalid("window needs hi > lo"));
        }
        SpectralWindow::new(Complex64::new(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo), grid_count)
    }

    pub fn new(center: Complex64, half_width: f64, grid_count: usize) -> Result<SpectralWindow> {
        if grid_count < 3 {
            return Err(Error::invalid("window needs grid_count >= 3"));
        }
        if !(half_width > 0.0) {
            return Err(Error::invalid("window needs half_width > 0"));
        }
        Ok(SpectralWindow {
            center,
            half_width,
            grid_count,
        })
    }

    fn max_abs_energy(&self) -> f64 {
        self.center.norm() + 2.0 * self.half_width
    }
}

/// A converged bound-state energy.
#[derive(Debug, Clone, Copy)]
pub struct Eigenvalue {
    pub e: Complex64,
    /// |W| at the root, scale-free.
    pub residual: f64,
    /// ordinal in the scanned window, by increasing real part
    pub index: usize,
    pub degenerate: bool,
}

/// A bracket that failed to converge; reported, never silently dropped.
#[derive(Debug, Clone, Copy)]
pub struct RejectedCandidate {
    pub e: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    pub rejected: Vec<RejectedCandidate>,
    /// |x| at which the boundary conditions were imposed (largest of the two
    /// tails).
    pub r_max: f64,
    pub s_match: f64,
}

/// Knobs of the shooting solver.
#[derive(Debug, Clone, Copy)]
pub struct ShootingOpts {
    /// relative tolerance handed to the integrator
    pub rtol: f64,
    /// boundary conditions are imposed where |V| >= bc_ratio · max(|E|, 1)
    pub bc_ratio: f64,
    /// and where the accumulated decay action exceeds this
    pub min_action: f64,
    /// matching parameter; default is the negative-imaginary-axis crossing
    pub s_match: Option<f64>,
    /// include the WKB amplitude prefactor (V-E)^(-1/4)
    pub prefactor: bool,
}

impl Default for ShootingOpts {
    fn default() -> Self {
        ShootingOpts {
            rtol: 1e-12,
            bc_ratio: 100.0,
            min_action: 25.0,
            s_match: None,
            prefactor: false,
        }
    }
}

/// Matching parameter: where the contour crosses the negative imaginary
/// axis, or the domain midpoint if it never does.
pub fn default_match_point(contour: &Contour) -> f64 {
    let (s0, s1) = contour.domain();
    let n = 2048;
    let mut prev = contour.position(s0);
    let mut prev_s = s0;
    for i in 1..=n {
        let s = s0 + (s1 - s0) * i as f64 / n as f64;
        let x = contour.position(s);
        if prev.re.signum() != x.re.signum() && x.im < 0.0 && prev.im < 0.0 {
            let (mut lo, mut hi) = (prev_s, s);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if contour.position(mid).re.signum() == prev.re.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev = x;
        prev_s = s;
    }
    0.5 * (s0 + s1)
}

/// Walk outward from s_match and return the parameter where both the
/// potential-dominance and decay-action thresholds are met (or the contour
/// end).
fn shooting_endpoint(
    contour: &Contour,
    potential: &dyn PotentialField,
    energy: Complex64,
    s_match: f64,
    s_end: f64,
    opts: &ShootingOpts,
) -> Result<f64> {
    let n = 2000;
    let e_floor = energy.norm().max(1.0);
    let mut action = 0.0;
    let mut prev_x = contour.position(s_match);
    let mut prev_q = 0.0;
    for i in 1..=n {
        let s = s_match + (s_end - s_match) * i as f64 / n as f64;
        let x = contour.position(s);
        let v = match potential.value(x) {
            Ok(v) => v,
            Err(_) => {
                prev_x = x;
                continue;
            }
        };
        let q = (v - energy).sqrt().re.abs();
        action += 0.5 * (q + prev_q) * (x - prev_x).norm();
        prev_q = q;
        prev_x = x;
        if v.norm() >= opts.bc_ratio * e_floor && action >= opts.min_action {
            return Ok(s);
        }
    }
    Ok(s_end)
}

/// Scale-free Wronskian mismatch at the matching point for one trial energy.
pub fn mismatch(
    contour: &Contour,
    potential: &dyn PotentialField,
    energy: Complex64,
    s_match: f64,
) -> Result<Complex64> {
    mismatch_with(contour, potential, energy, s_match, &ShootingOpts::default())
}

pub fn mismatch_with(
    contour: &Contour,
    potential: &dyn PotentialField,
    energy: Complex64,
    s_match: f64,
    opts: &ShootingOpts,
) -> Result<Complex64> {
    let (s0, s1) = contour.domain();
    if !(s_match > s0 && s_match < s1) {
        return Err(Error::invalid("matching parameter outside the contour domain"));
    }
    let s_left = shooting_endpoint(contour, potential, energy, s_match, s0, opts)?;
    let s_right = shooting_endpoint(contour, potential, energy, s_match, s1, opts)?;

    let init = |s: f64| -> Result<BoundaryState> {
        let x = contour.position(s);
        let wedge = (x.arg() - 0.4, x.arg() + 0.4);
        asymptotic_init(potential, x, energy, wedge, opts.prefactor)
    };
    let left = propagate(
        contour,
        potential,
        energy,
        &init(s_left)?,
        s_left,
        s_match,
        opts.rtol,
    )?;
    let right = propagate(
        contour,
        potential,
        energy,
        &init(s_right)?,
        s_right,
        s_match,
        opts.rtol,
    )?;
    let l = left.last();
    let r = right.last();
    let w = wronskian((l.psi, l.dpsi_dx), (r.psi, r.dpsi_dx));
    let denom = (l.psi * r.psi).norm() + (l.dpsi_dx * r.dpsi_dx).norm();
    if denom == 0.0 {
        return Err(Error::NumericFailure("vanishing mismatch normalization".into()));
    }
    Ok(w / denom)
}

/// Outcome of the generic scan of an analytic function over a window.
pub struct ScanOutcome {
    pub roots: Vec<(Complex64, f64)>,
    pub rejected: Vec<RejectedCandidate>,
}

/// Locate zeros of an analytic function over the window: grid evaluation,
/// bracket detection by sign change / phase rotation (1D) or cell phase
/// winding (2D), then Muller polishing.
pub fn scan_complex_roots<F>(f: F, window: &SpectralWindow, tol: f64) -> Result<ScanOutcome>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let n = window.grid_count;
    let mut seeds: Vec<(Complex64, Complex64, Complex64)> = Vec::new();
    if window.center.im == 0.0 {
        let lo = window.center.re - window.half_width;
        let hi = window.center.re + window.half_width;
        let es: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(lo + (hi - lo) * j as f64 / (n - 1) as f64, 0.0))
            .collect();
        let ws: Vec<Result<Complex64>> = es.par_iter().map(|&e| f(e)).collect();
        let mut vals = Vec::with_capacity(n);
        for (e, w) in es.iter().zip(ws) {
            vals.push((*e, w?));
        }
        for pair in vals.windows(2) {
            let (ea, wa) = pair[0];
            let (eb, wb) = pair[1];
            let rot = (wb / wa).arg().abs();
            let re_flip = wa.re.signum() != wb.re.signum();
            if re_flip || rot > std::f64::consts::FRAC_PI_2 {
                seeds.push((ea, 0.5 * (ea + eb), eb));
            }
        }
    } else {
        let step = 2.0 * window.half_width / (n - 1) as f64;
        let base = window.center - Complex64::new(window.half_width, window.half_width);
        let grid: Vec<Vec<Complex64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let e = base + Complex64::new(step * j as f64, step * i as f64);
                        f(e).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
                    })
                    .collect()
            })
            .collect();
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                let cell = [
                    grid[i][j],
                    grid[i][j + 1],
                    grid[i + 1][j + 1],
                    grid[i + 1][j],
                ];
                if cell.iter().any(|w| !w.re.is_finite()) {
                    continue;
                }
                let mut winding = 0.0;
                for k in 0..4 {
                    winding += (cell[(k + 1) % 4] / cell[k]).arg();
                }
                if winding.abs() > 3.0 {
                    let e0 = base + Complex64::new(step * j as f64, step * i as f64);
                    let em = e0 + Complex64::new(0.5 * step, 0.5 * step);
                    seeds.push((e0, em, e0 + Complex64::new(step, step)));
                }
            }
        }
    }

    let polished: Vec<std::result::Result<(Complex64, f64), RejectedCandidate>> = seeds
        .par_iter()
        .map(|&(a, m, b)| muller(&f, a, m, b, tol))
        .collect();
    let mut roots = Vec::new();
    let mut rejected = Vec::new();
    for p in polished {
        match p {
            Ok(r) => roots.push(r),
            Err(r) => rejected.push(r),
        }
    }
    Ok(ScanOutcome { roots, rejected })
}

/// Muller iteration (three-point complex quadratic interpolation).
fn muller<F>(
    f: &F,
    a: Complex64,
    m: Complex64,
    b: Complex64,
    tol: f64,
) -> std::result::Result<(Complex64, f64), RejectedCandidate>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let eval = |e: Complex64| f(e).map_err(|_| RejectedCandidate { e, residual: f64::NAN });
    let mut x0 = a;
    let mut x1 = m;
    let mut x2 = b;
    let mut f0 = eval(x0)?;
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    let scale = 1.0 + x2.norm();
    for _ in 0..80 {
        if f2.norm() < tol {
            return Ok((x2, f2.norm()));
        }
        let q01 = (f1 - f0) / (x1 - x0);
        let q12 = (f2 - f1) / (x2 - x1);
        let d012 = (q12 - q01) / (x2 - x0);
        let w = q12 + (x2 - x1) * d012;
        let disc = (w * w - 4.0 * f2 * d012).sqrt();
        let den = if (w + disc).norm() > (w - disc).norm() {
            w + disc
        } else {
            w - disc
        };
        let step = if den.norm() == 0.0 {
            -f2 / q12
        } else {
            -2.0 * f2 / den
        };
        let x3 = x2 + step;
        if !x3.re.is_finite() || !x3.im.is_finite() {
            break;
        }
        let f3 = eval(x3)?;
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        x2 = x3;
        f2 = f3;
        if step.norm() < 1e-15 * scale && f2.norm() < tol.max(1e-14) {
            return Ok((x2, f2.norm()));
        }
    }
    if f2.norm() < tol {
        Ok((x2, f2.norm()))
    } else {
        Err(RejectedCandidate {
            e: x2,
            residual: f2.norm(),
        })
    }
}

/// Scan W(E) over the window and return the polished, deduplicated spectrum.
pub fn find_eigenvalues(
    contour: &Contour,
    potential: &Potential,
    window: &SpectralWindow,
    tol: f64,
) -> Result<Spectrum> {
    find_eigenvalues_with(contour, potential, window, tol, &ShootingOpts::default())
}

pub fn find_eigenvalues_with(
    contour: &Contour,
    potential: &Potential,
    window: &SpectralWindow,
    tol: f64,
    opts: &ShootingOpts,
) -> Result<Spectrum> {
    let s_match = opts.s_match.unwrap_or_else(|| default_match_point(contour));
    let outcome = scan_complex_roots(
        |e| mismatch_with(contour, potential, e, s_match, opts),
        window,
        tol,
    )?;
    // r_max actually used, reported for the widest-energy case
    let e_edge = Complex64::new(window.max_abs_energy(), 0.0);
    let (s0, s1) = contour.domain();
    let sl = shooting_endpoint(contour, potential, e_edge, s_match, s0, opts)?;
    let sr = shooting_endpoint(contour, potential, e_edge, s_match, s1, opts)?;
    let r_max = contour.position(sl).norm().max(contour.position(sr).norm());
    Ok(assemble_spectrum(outcome, window, r_max, s_match))
}

pub(crate) fn assemble_spectrum(
    outcome: ScanOutcome,
    window: &SpectralWindow,
    r_max: f64,
    s_match: f64,
) -> Spectrum {
    let resolution = window.half_width / (window.grid_count - 1) as f64;
    let mut roots = outcome.roots;
    roots.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
    let mut eigenvalues: Vec<Eigenvalue> = Vec::new();
    for (e, residual) in roots {
        match eigenvalues
            .iter_mut()
            .find(|ev| (ev.e - e).norm() < resolution)
        {
            Some(ev) => {
                ev.degenerate = true;
                if residual < ev.residual {
                    ev.e = e;
                    ev.residual = residual;
                }
            }
            None => eigenvalues.push(Eigenvalue {
                e,
                residual,
                index: 0,
                degenerate: false,
            }),
        }
    }
    for (i, ev) in eigenvalues.iter_mut().enumerate() {
        ev.index = i;
    }
    Spectrum {
        eigenvalues,
        rejected: outcome.rejected,
        r_max,
        s_match,
    }
}

/// One level of the closed-form reference spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefLevel {
    pub e: f64,
    pub degenerate: bool,
}

/// Closed-form PT harmonic-oscillator spectrum E = 4n + 2 ± 2α with
/// α = ℓ + 1/2, for n = 0..n_max, sorted.  Coinciding ± partners are merged
/// and flagged doubly degenerate.
pub fn pt_ho_reference(ell: f64, n_max: usize) -> Vec<RefLevel> {
    let alpha = ell + 0.5;
    let mut levels: Vec<f64> = Vec::new();
    for n in 0..=n_max {
        levels.push(4.0 * n as f64 + 2.0 - 2.0 * alpha);
        levels.push(4.0 * n as f64 + 2.0 + 2.0 * alpha);
    }
    levels.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<RefLevel> = Vec::new();
    for e in levels {
        match out.last_mut() {
            Some(last) if (last.e - e).abs() < 1e-12 => last.degenerate = true,
            _ => out.push(RefLevel {
                e,
                degenerate: false,
            }),
        }
    }
    out
}

// --- JSON records -----------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct WindowRecord {
    pub center_re: f64,
    pub center_im: f64,
    pub half_width: f64,
    pub grid_count: usize,
}

#[derive(Debug, Serialize)]
pub struct EigenvalueRecord {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
    pub index: usize,
    pub degenerate: bool,
}

#[derive(Debug, Serialize)]
pub struct RejectedRecord {
    pub re: f64,
    pub im: f64,
    pub residual: f64,
}

/// The JSON spectrum record written by the command-line tool; validated by
/// the shipped schema.
#[derive(Debug, Serialize)]
pub struct SpectrumRecord {
    pub potential: String,
    pub contour: String,
    pub window: WindowRecord,
    pub tolerance: f64,
    pub eigenvalues: Vec<EigenvalueRecord>,
    pub rejected: Vec<RejectedRecord>,
    pub rmax: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<ReferenceRecord>>,
}

#[derive(Debug, Serialize)]
pub struct ReferenceRecord {
    pub e: f64,
    pub degenerate: bool,
    /// deviation of the closest computed eigenvalue, when one exists
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
}

impl SpectrumRecord {
    pub fn from_spectrum(
        potential: &Potential,
        contour: &Contour,
        window: &SpectralWindow,
        tolerance: f64,
        spectrum: &Spectrum,
        runtime_ms: Option<u64>,
    ) -> SpectrumRecord {
        SpectrumRecord {
            potential: potential.literal(),
            contour: contour.descriptor(),
            window: WindowRecord {
                center_re: window.center.re,
                center_im: window.center.im,
                half_width: window.half_width,
                grid_count: window.grid_count,
            },
            tolerance,
            eigenvalues: spectrum
                .eigenvalues
                .iter()
                .map(|ev| EigenvalueRecord {
                    re: ev.e.re,
                    im: ev.e.im,
                    residual: ev.residual,
                    index: ev.index,
                    degenerate: ev.degenerate,
                })
                .collect(),
            rejected: spectrum
                .rejected
                .iter()
                .map(|r| RejectedRecord {
                    re: r.e.re,
                    im: r.e.im,
                    residual: r.residual,
                })
                .collect(),
            rmax: spectrum.r_max,
            runtime_ms,
            reference: None,
        }
    }

    pub fn attach_reference(&mut self, reference: &[RefLevel]) {
        self.reference = Some(
            reference
                .iter()
                .map(|r| ReferenceRecord {
                    e: r.e,
                    degenerate: r.degenerate,
                    deviation: self
                        .eigenvalues
                        .iter()
                        .map(|ev| ((ev.re - r.e).powi(2) + ev.im.powi(2)).sqrt())
                        .min_by(f64::total_cmp),
                })
                .collect(),
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::make_straight;

    #[test]
    fn reference_spectrum_examples() {
        let l0: Vec<f64> = pt_ho_reference(0.0, 1).iter().map(|r| r.e).collect();
        assert_eq!(l0, vec![1.0, 3.0, 5.0, 7.0]);
        let l2: Vec<f64> = pt_ho_reference(2.0, 1).iter().map(|r| r.e).collect();
        assert_eq!(l2, vec![-3.0, 1.0, 7.0, 11.0]);
        let merged = pt_ho_reference(-0.5, 1);
        assert_eq!(merged.len(), 2);
        assert!(merged.iter().all(|r| r.degenerate));
        assert_eq!(merged[0].e, 2.0);
        assert_eq!(merged[1].e, 6.0);
    }

    #[test]
    fn mismatch_small_at_eigenvalue_large_off() {
        let c = make_straight(0.5, 30.0).unwrap();
        let v = Potential::pt_harmonic(0.0);
        let s_m = default_match_point(&c);
        assert!(s_m.abs() < 1e-9);
        let on = mismatch(&c, &v, Complex64::new(1.0, 0.0), s_m).unwrap();
        assert!(on.norm() < 1e-6, "|W(1)| = {:.3e}", on.norm());
        let off = mismatch(&c, &v, Complex64::new(2.0, 0.0), s_m).unwrap();
        assert!(off.norm() > 1e-2, "|W(2)| = {:.3e}", off.norm());
    }

    #[test]
    fn self_wronskian_vanishes_exactly() {
        let a = (Complex64::new(0.3, 0.4), Complex64::new(-1.0, 2.0));
        assert_eq!(wronskian(a, a).norm(), 0.0);
    }

    #[test]
    fn ptho_spectrum_on_straight_contour() {
        let c = make_straight(0.5, 30.0).unwrap();
        let v = Potential::pt_harmonic(0.0);
        let window = SpectralWindow::real(0.5, 8.0, 32).unwrap();
        let spec = find_eigenvalues(&c, &v, &window, 1e-10).unwrap();
        let es: Vec<f64> = spec.eigenvalues.iter().map(|e| e.e.re).collect();
        assert_eq!(es.len(), 4, "found {es:?}, rejected {:?}", spec.rejected);
        for (got, want) in es.iter().zip([1.0, 3.0, 5.0, 7.0]) {
            assert!(
                (got - want).abs() < 1e-8,
                "eigenvalue {got} should be {want}"
            );
        }
        for ev in &spec.eigenvalues {
            assert!(ev.e.im.abs() < 1e-8);
            assert!(ev.residual < 1e-10);
        }
    }
}
