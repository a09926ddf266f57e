//! Monotone two-point numerical fluxes.
//!
//! All three constructions are consistent (`F(s, s) = f(s)`), non-decreasing
//! in the first argument and non-increasing in the second under the scheme's
//! CFL bound:
//!
//! - Godunov: `F(u, v) = min f on [u, v]` for `u <= v`, `max f on [v, u]`
//!   otherwise;
//! - Rusanov: `F(u, v) = (f(u) + f(v)) / 2 - L (v - u) / 2` with `L` at
//!   least the sampled Lipschitz constant of `f`;
//! - Engquist-Osher: `F(u, v) = f(0) + int_0^u max(f', 0) + int_0^v min(f', 0)`.
//!
//! Interval extrema of `f` are located once per flux at construction (dense
//! sampling plus golden-section refinement) and reused. The Engquist-Osher
//! integrals are evaluated as positive/negative variations of `f` over its
//! monotone segments, which equals the derivative integral for absolutely
//! continuous `f` and telescopes exactly on the diagonal.
//!
//! The Kruzhkov numerical entropy flux is the Crandall-Majda form
//! `G_k(u, v) = F(u max k, v max k) - F(u min k, v min k)`.

use crate::error::CoreError;
use crate::problem::{lipschitz_estimate, ScalarFn};

/// Dense sample count for extremum location.
const SCAN_SAMPLES: usize = 8192;

/// Golden-section refinement target width for extremum abscissae.
const REFINE_X_TOL: f64 = 1e-9;

/// Interior extrema of a scalar function over a fixed interval.
#[derive(Clone, Debug)]
struct CriticalPoints {
    lo: f64,
    hi: f64,
    /// `(x, f(x))` at refined local extrema, sorted by `x`.
    points: Vec<(f64, f64)>,
}

fn golden_refine(f: &ScalarFn, mut a: f64, mut b: f64, maximize: bool) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let better = |p: f64, q: f64| if maximize { p > q } else { p < q };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f.eval(x1);
    let mut f2 = f.eval(x2);
    while b - a > REFINE_X_TOL {
        if better(f1, f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f.eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f.eval(x2);
        }
    }
    if better(f1, f2) {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

impl CriticalPoints {
    fn build(f: &ScalarFn, lo: f64, hi: f64) -> Self {
        let n = SCAN_SAMPLES + 1;
        let h = (hi - lo) / SCAN_SAMPLES as f64;
        let vals: Vec<f64> = (0..n).map(|j| f.eval(lo + h * j as f64)).collect();
        let mut points = Vec::new();
        for j in 1..n - 1 {
            let (a, m, b) = (vals[j - 1], vals[j], vals[j + 1]);
            let is_max = m >= a && m >= b && (m > a || m > b);
            let is_min = m <= a && m <= b && (m < a || m < b);
            if !(is_max || is_min) {
                continue;
            }
            let xa = lo + h * (j - 1) as f64;
            let xb = lo + h * (j + 1) as f64;
            points.push(golden_refine(f, xa, xb, is_max));
        }
        points.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        Self { lo, hi, points }
    }

    fn covers(&self, lo: f64, hi: f64) -> bool {
        lo >= self.lo && hi <= self.hi
    }

    /// Points with abscissa strictly inside `(lo, hi)`.
    fn inside(&self, lo: f64, hi: f64) -> &[(f64, f64)] {
        let start = self.points.partition_point(|p| p.0 <= lo);
        let end = self.points.partition_point(|p| p.0 < hi);
        &self.points[start..end.max(start)]
    }
}

#[derive(Clone, Debug)]
enum Kernel {
    Godunov { crit: CriticalPoints },
    Rusanov { speed: f64 },
    EngquistOsher { crit: CriticalPoints, f_at_zero: f64 },
}

/// A monotone two-point flux together with its per-argument Lipschitz
/// bounds and the underlying convective flux.
#[derive(Clone, Debug)]
pub struct NumericalFlux {
    name: &'static str,
    f: ScalarFn,
    u_max: f64,
    f_lipschitz: f64,
    lip_u: f64,
    lip_v: f64,
    kernel: Kernel,
}

/// States are scanned on `[-u_max, 2 u_max]` so that runs which leave
/// `[0, u_max]` (violated hypotheses) stay on the fast path.
fn scan_range(u_max: f64) -> (f64, f64) {
    (-u_max, 2.0 * u_max)
}

fn build_critical(f: &ScalarFn, u_max: f64) -> CriticalPoints {
    let (lo, hi) = scan_range(u_max);
    let ext = CriticalPoints::build(f, lo, hi);
    let finite = ext.points.iter().all(|p| p.1.is_finite())
        && f.eval(lo).is_finite()
        && f.eval(hi).is_finite();
    if finite {
        ext
    } else {
        CriticalPoints::build(f, 0.0, u_max)
    }
}

pub fn godunov(f: &ScalarFn, u_max: f64) -> NumericalFlux {
    let l = lipschitz_estimate(f, 0.0, u_max);
    NumericalFlux {
        name: "godunov",
        f: f.clone(),
        u_max,
        f_lipschitz: l,
        lip_u: l,
        lip_v: l,
        kernel: Kernel::Godunov { crit: build_critical(f, u_max) },
    }
}

/// Rusanov flux with explicit speed; the speed must dominate the sampled
/// Lipschitz constant of `f` on `[0, u_max]`.
pub fn rusanov(f: &ScalarFn, u_max: f64, speed: f64) -> Result<NumericalFlux, CoreError> {
    let l = lipschitz_estimate(f, 0.0, u_max);
    if speed < l {
        return Err(CoreError::SpeedTooSmall { given: speed, required: l });
    }
    Ok(NumericalFlux {
        name: "rusanov",
        f: f.clone(),
        u_max,
        f_lipschitz: l,
        lip_u: 0.5 * (l + speed),
        lip_v: 0.5 * (l + speed),
        kernel: Kernel::Rusanov { speed },
    })
}

/// Rusanov flux with the default 5% safety margin on the sampled speed.
pub fn rusanov_default(f: &ScalarFn, u_max: f64) -> NumericalFlux {
    let l = lipschitz_estimate(f, 0.0, u_max);
    rusanov(f, u_max, 1.05 * l).expect("default speed dominates the estimate")
}

pub fn engquist_osher(f: &ScalarFn, u_max: f64) -> NumericalFlux {
    let l = lipschitz_estimate(f, 0.0, u_max);
    NumericalFlux {
        name: "engquist-osher",
        f: f.clone(),
        u_max,
        f_lipschitz: l,
        lip_u: l,
        lip_v: l,
        kernel: Kernel::EngquistOsher {
            crit: build_critical(f, u_max),
            f_at_zero: f.eval(0.0),
        },
    }
}

/// Flux constructor lookup used by configuration layers.
pub fn by_name(name: &str, f: &ScalarFn, u_max: f64) -> Result<NumericalFlux, CoreError> {
    match name {
        "godunov" => Ok(godunov(f, u_max)),
        "rusanov" => Ok(rusanov_default(f, u_max)),
        "engquist-osher" => Ok(engquist_osher(f, u_max)),
        other => Err(CoreError::InvalidInput(format!(
            "unknown flux '{other}' (expected godunov, rusanov or engquist-osher)"
        ))),
    }
}

/// Extremum of `f` over `[lo, hi]` from endpoint values plus cached interior
/// extrema; falls back to a direct scan outside the cached range.
fn interval_extremum(
    f: &ScalarFn,
    crit: &CriticalPoints,
    lo: f64,
    hi: f64,
    maximize: bool,
) -> f64 {
    let pick = |p: f64, q: f64| if maximize { p.max(q) } else { p.min(q) };
    let mut best = pick(f.eval(lo), f.eval(hi));
    if crit.covers(lo, hi) {
        for &(_, v) in crit.inside(lo, hi) {
            best = pick(best, v);
        }
        return best;
    }
    let tmp = CriticalPoints::build(f, lo, hi);
    for &(_, v) in tmp.inside(lo, hi) {
        best = pick(best, v);
    }
    best
}

/// Signed `int_0^x max(f', 0)` (or `min` with `positive = false`), taken as
/// the positive/negative variation of `f` over its monotone segments.
fn signed_variation(f: &ScalarFn, crit: &CriticalPoints, x: f64, positive: bool) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let (lo, hi) = if x > 0.0 { (0.0, x) } else { (x, 0.0) };
    let part = |d: f64| if positive { d.max(0.0) } else { d.min(0.0) };

    let tmp;
    let pts: &[(f64, f64)] = if crit.covers(lo, hi) {
        crit.inside(lo, hi)
    } else {
        tmp = CriticalPoints::build(f, lo, hi);
        tmp.inside(lo, hi)
    };

    let mut acc = 0.0;
    let mut prev = f.eval(lo);
    for &(_, v) in pts {
        acc += part(v - prev);
        prev = v;
    }
    acc += part(f.eval(hi) - prev);
    if x > 0.0 {
        acc
    } else {
        -acc
    }
}

impl NumericalFlux {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn f(&self) -> &ScalarFn {
        &self.f
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    /// Sampled Lipschitz constant of the underlying `f` on `[0, u_max]`.
    pub fn f_lipschitz(&self) -> f64 {
        self.f_lipschitz
    }

    /// Lipschitz bound in the first argument.
    pub fn lip_u(&self) -> f64 {
        self.lip_u
    }

    /// Lipschitz bound in the second argument.
    pub fn lip_v(&self) -> f64 {
        self.lip_v
    }

    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match &self.kernel {
            Kernel::Godunov { crit } => {
                if u == v {
                    self.f.eval(u)
                } else if u < v {
                    interval_extremum(&self.f, crit, u, v, false)
                } else {
                    interval_extremum(&self.f, crit, v, u, true)
                }
            }
            Kernel::Rusanov { speed } => {
                0.5 * (self.f.eval(u) + self.f.eval(v)) - 0.5 * speed * (v - u)
            }
            Kernel::EngquistOsher { crit, f_at_zero } => {
                f_at_zero
                    + signed_variation(&self.f, crit, u, true)
                    + signed_variation(&self.f, crit, v, false)
            }
        }
    }

    /// Crandall-Majda numerical entropy flux at level `k`.
    #[inline]
    pub fn entropy_eval(&self, k: f64, u: f64, v: f64) -> f64 {
        self.eval(u.max(k), v.max(k)) - self.eval(u.min(k), v.min(k))
    }

    /// The entropy flux at a fixed level as a two-argument rule.
    pub fn entropy_flux(&self, k: f64) -> EntropyFlux<'_> {
        EntropyFlux { flux: self, k }
    }
}

/// Two-argument Kruzhkov entropy flux `G_k` bound to a numerical flux.
#[derive(Clone, Copy, Debug)]
pub struct EntropyFlux<'a> {
    flux: &'a NumericalFlux,
    k: f64,
}

impl EntropyFlux<'_> {
    pub fn level(&self) -> f64 {
        self.k
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.flux.entropy_eval(self.k, u, v)
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn wiggly() -> ScalarFn {
        ScalarFn::custom("wiggly", 1.3, |u: f64| u + 0.05 * (6.0 * u).sin())
    }

    /// Brute-force interval extremum, independent of the cached machinery.
    fn brute_extremum(f: &ScalarFn, lo: f64, hi: f64, maximize: bool) -> f64 {
        let n = 200_000;
        let mut best = f.eval(lo);
        for j in 1..=n {
            let v = f.eval(lo + (hi - lo) * j as f64 / n as f64);
            best = if maximize { best.max(v) } else { best.min(v) };
        }
        best
    }

    /// Adaptive Simpson quadrature.
    fn simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            g: &dyn Fn(f64) -> f64,
            a: f64,
            fa: f64,
            b: f64,
            fb: f64,
            m: f64,
            fm: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = g(lm);
            let frm = g(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(g, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
                    + rec(g, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
            }
        }
        if a == b {
            return 0.0;
        }
        let m = 0.5 * (a + b);
        let (fa, fb, fm) = (g(a), g(b), g(m));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(g, a, fa, b, fb, m, fm, whole, tol, 40)
    }

    /// Engquist-Osher via quadrature of the closed-form derivative,
    /// independent of the variation construction.
    fn eo_oracle(f: &ScalarFn, df: &dyn Fn(f64) -> f64, u: f64, v: f64) -> f64 {
        let dpos = |s: f64| df(s).max(0.0);
        let dneg = |s: f64| df(s).min(0.0);
        f.eval(0.0) + simpson(&dpos, 0.0, u, 1e-10) + simpson(&dneg, 0.0, v, 1e-10)
    }

    #[test]
    fn godunov_traffic_values() {
        let fx = godunov(&ScalarFn::lwr(), 1.0);
        assert!((fx.eval(0.2, 0.4) - 0.16).abs() <= 1e-12);
        assert!((fx.eval(0.7, 0.2) - 0.25).abs() <= 1e-12);
        assert!((fx.eval(0.3, 0.3) - 0.21).abs() <= 1e-12);
    }

    #[test]
    fn godunov_burgers_values() {
        let fx = godunov(&ScalarFn::burgers(), 1.0);
        assert!((fx.eval(1.0, 0.0) - 0.5).abs() <= 1e-12);
        assert!(fx.eval(0.0, 1.0).abs() <= 1e-12);
        assert!((fx.eval(0.6, 0.9) - 0.18).abs() <= 1e-12);
    }

    #[test]
    fn godunov_outside_cached_range_falls_back() {
        let fx = godunov(&ScalarFn::burgers(), 1.0);
        // [2.5, 3.0] lies beyond the cached scan range [-1, 2].
        assert!((fx.eval(2.5, 3.0) - 3.125).abs() <= 1e-12);
        assert!((fx.eval(3.0, 2.5) - 4.5).abs() <= 1e-12);
    }

    #[test]
    fn godunov_matches_brute_force_on_wiggly_flux() {
        let f = wiggly();
        let fx = godunov(&f, 1.0);
        let pairs = [(0.05, 0.95), (0.95, 0.05), (0.2, 0.8), (0.8, 0.2), (0.13, 0.57)];
        for (u, v) in pairs {
            let expect = if u <= v {
                brute_extremum(&f, u, v, false)
            } else {
                brute_extremum(&f, v, u, true)
            };
            assert!(
                (fx.eval(u, v) - expect).abs() <= 1e-9,
                "F({u},{v}) = {} vs brute {expect}",
                fx.eval(u, v)
            );
        }
    }

    #[test]
    fn rusanov_burgers_value() {
        let fx = rusanov(&ScalarFn::burgers(), 1.0, 1.0).unwrap();
        assert!((fx.eval(1.0, 0.0) - 0.75).abs() <= 1e-12);
    }

    #[test]
    fn rusanov_rejects_small_speed() {
        match rusanov(&ScalarFn::burgers(), 1.0, 0.5) {
            Err(CoreError::SpeedTooSmall { given, required }) => {
                assert_eq!(given, 0.5);
                assert!(required > 0.99);
            }
            other => panic!("expected SpeedTooSmall, got {other:?}"),
        }
    }

    #[test]
    fn engquist_osher_traffic_value() {
        let fx = engquist_osher(&ScalarFn::lwr(), 1.0);
        assert!((fx.eval(0.7, 0.2) - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn engquist_osher_matches_quadrature_oracle() {
        let cases: [(ScalarFn, Box<dyn Fn(f64) -> f64>); 3] = [
            (ScalarFn::burgers(), Box::new(|s: f64| s)),
            (
                ScalarFn::lwr(),
                Box::new(|s: f64| if (0.0..=1.0).contains(&s) { 1.0 - 2.0 * s } else { 0.0 }),
            ),
            (wiggly(), Box::new(|s: f64| 1.0 + 0.3 * (6.0 * s).cos())),
        ];
        for (f, df) in &cases {
            let fx = engquist_osher(f, 1.0);
            for (u, v) in [(0.7, 0.2), (0.2, 0.7), (0.95, 0.4), (0.33, 0.66), (1.0, 0.0)] {
                let expect = eo_oracle(f, df, u, v);
                assert!(
                    (fx.eval(u, v) - expect).abs() <= 1e-8,
                    "{}: F({u},{v}) = {} vs oracle {expect}",
                    f.name(),
                    fx.eval(u, v)
                );
            }
        }
    }

    #[test]
    fn all_fluxes_consistent_on_diagonal() {
        for f in [ScalarFn::burgers(), ScalarFn::lwr()] {
            let fluxes = [
                godunov(&f, 1.0),
                rusanov_default(&f, 1.0),
                engquist_osher(&f, 1.0),
            ];
            for fx in &fluxes {
                for j in 0..=1000 {
                    let s = j as f64 / 1000.0;
                    let d = (fx.eval(s, s) - f.eval(s)).abs();
                    assert!(d <= 1e-12, "{} at {s}: off by {d}", fx.name());
                }
            }
        }
    }

    #[test]
    fn entropy_flux_at_zero_level_reduces_to_flux() {
        // With f(0) = 0 and states above zero, G_0(u, v) = F(u, v).
        for f in [ScalarFn::burgers(), ScalarFn::lwr()] {
            let fx = godunov(&f, 1.0);
            for j in 0..40 {
                let u = (j as f64 * 0.171) % 1.0;
                let v = (j as f64 * 0.377 + 0.21) % 1.0;
                let d = (fx.entropy_eval(0.0, u, v) - fx.eval(u, v)).abs();
                assert!(d <= 1e-12, "G_0({u},{v}) off by {d}");
            }
        }
    }

    #[test]
    fn entropy_flux_diagonal_is_kruzhkov_flux() {
        let f = ScalarFn::lwr();
        let fx = godunov(&f, 1.0);
        let g = fx.entropy_flux(0.4);
        for j in 0..=20 {
            let s = j as f64 / 20.0;
            let expect = (s - 0.4).signum() * (f.eval(s) - f.eval(0.4));
            let expect = if s == 0.4 { 0.0 } else { expect };
            assert!((g.eval(s, s) - expect).abs() <= 1e-12, "s = {s}");
        }
    }

    #[test]
    fn fluxes_are_monotone_on_probes() {
        let delta = 1e-3;
        for f in [ScalarFn::burgers(), ScalarFn::lwr()] {
            for fx in [
                godunov(&f, 1.0),
                rusanov_default(&f, 1.0),
                engquist_osher(&f, 1.0),
            ] {
                for j in 0..200 {
                    let u = (j as f64 * 0.0497) % 1.0;
                    let v = (j as f64 * 0.0713 + 0.3) % 1.0;
                    let base = fx.eval(u, v);
                    assert!(
                        fx.eval(u + delta, v) >= base - 1e-12,
                        "{} not monotone in u at ({u},{v})",
                        fx.name()
                    );
                    assert!(
                        fx.eval(u, v + delta) <= base + 1e-12,
                        "{} not antitone in v at ({u},{v})",
                        fx.name()
                    );
                }
            }
        }
    }

    #[test]
    fn lookup_by_name() {
        let f = ScalarFn::lwr();
        assert_eq!(by_name("godunov", &f, 1.0).unwrap().name(), "godunov");
        assert_eq!(by_name("rusanov", &f, 1.0).unwrap().name(), "rusanov");
        assert_eq!(
            by_name("engquist-osher", &f, 1.0).unwrap().name(),
            "engquist-osher"
        );
        assert!(by_name("upwind", &f, 1.0).is_err());
    }
}
