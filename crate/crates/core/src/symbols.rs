//! Closed-form frequency symbols: the smooth cone cutoff and its
//! direction-twisted form, wedge bumps, the telescoping eta partition,
//! one-dimensional Hormander-Mikhlin profiles, and Littlewood-Paley bumps.
//!
//! Every abstract bump is realized through the single canonical mollifier
//! [`smooth_step`], so one set of smoothness checks covers them all. All
//! symbols here are homogeneous of degree zero and use the max-norm.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::direction::{pow2, Direction, SigmaIndex, MAX_DIM};

/// Canonical smooth step: 0 for x <= 0, 1 for x >= 1, strictly increasing
/// in between, with s(x) + s(1-x) = 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let g = (-1.0 / x).exp();
        let h = (-1.0 / (1.0 - x)).exp();
        g / (g + h)
    }
}

/// Smooth ramp from 0 at `a` to 1 at `b`.
#[inline]
fn ramp(x: f64, a: f64, b: f64) -> f64 {
    smooth_step((x - a) / (b - a))
}

fn sup_norm(xi: &[f64]) -> f64 {
    xi.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Smooth cutoff equal to 1 where `|sum xi_i| < ||xi||_inf / (2 n^2)` and 0
/// where the ratio reaches `1 / n^2`; homogeneous of degree zero.
pub fn nsw_omega(xi: &[f64]) -> f64 {
    let n = xi.len() as f64;
    let sup = sup_norm(xi);
    assert!(sup > 0.0, "cone cutoff rejects the zero vector");
    let r = xi.iter().sum::<f64>().abs() / sup;
    let inner = 1.0 / (2.0 * n * n);
    1.0 - smooth_step((r - inner) / inner)
}

/// The cone cutoff twisted by a direction: `omega(v_1 xi_1, ..., v_n xi_n)`.
pub fn nsw_omega_v(xi: &[f64], v: &Direction) -> f64 {
    let n = v.dimension();
    debug_assert_eq!(xi.len(), n);
    let mut prod = [0.0; MAX_DIM];
    for k in 0..n {
        prod[k] = v[k] * xi[k];
    }
    nsw_omega(&prod[..n])
}

/// One-dimensional wedge bump: 1 on `[1/(2n), n]`, 0 outside
/// `[1/(2(n+1)), n+1]`, smooth ramps between.
pub fn kappa_profile(s: f64, n: usize) -> f64 {
    let nf = n as f64;
    let lo_outer = 1.0 / (2.0 * (nf + 1.0));
    let lo_inner = 1.0 / (2.0 * nf);
    if s <= lo_outer {
        0.0
    } else if s < lo_inner {
        ramp(s, lo_outer, lo_inner)
    } else if s <= nf {
        1.0
    } else if s < nf + 1.0 {
        1.0 - ramp(s, nf, nf + 1.0)
    } else {
        0.0
    }
}

/// Wedge symbol `kappa(-xi_first / (2^-ell xi_second))`; zero on the
/// removed hyperplane `xi_second = 0`.
pub fn kappa_sigma_ell(xi: &[f64], sigma: SigmaIndex, ell: i64) -> f64 {
    let denom = xi[sigma.second()];
    if denom == 0.0 {
        return 0.0;
    }
    kappa_profile(-xi[sigma.first()] / (pow2(-ell) * denom), xi.len())
}

/// Even ramp used by the eta partition: 0 on [-1/4, 1/4], 1 off (-1/2, 1/2).
#[inline]
fn phi(s: f64) -> f64 {
    smooth_step(4.0 * s.abs() - 1.0)
}

/// The telescoping partition `(eta_v^1, ..., eta_v^n)`; entries beyond `n`
/// are zero. The entries sum to 1 at every nonzero `xi`.
pub fn eta_family(xi: &[f64], v: &Direction) -> [f64; MAX_DIM] {
    let n = v.dimension();
    debug_assert_eq!(xi.len(), n);
    let mut prod = [0.0; MAX_DIM];
    for k in 0..n {
        prod[k] = v[k] * xi[k];
    }
    let sup = sup_norm(&prod[..n]);
    assert!(sup > 0.0, "eta partition rejects the zero vector");
    let nf = n as f64;
    let mut eta = [0.0; MAX_DIM];
    let mut rest = 1.0;
    for j in 0..n {
        let p = if j + 1 == n {
            1.0
        } else {
            phi(nf * prod[j] / sup)
        };
        eta[j] = p * rest;
        rest *= 1.0 - p;
    }
    eta
}

/// One-dimensional Hormander-Mikhlin multiplier profiles, addressable by
/// name from the CLI.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HmProfile {
    /// `1` on the positive half-line, `0` elsewhere.
    AnalyticProjection,
    /// `-i sign(s)`.
    HilbertSign,
    /// `s / sqrt(1 + s^2)`.
    SmoothOdd,
    /// `sign(s)` times the smooth radial factor `s^2 / (1 + s^2)`.
    RieszLike,
}

impl HmProfile {
    pub const ALL: [HmProfile; 4] = [
        HmProfile::AnalyticProjection,
        HmProfile::HilbertSign,
        HmProfile::SmoothOdd,
        HmProfile::RieszLike,
    ];

    pub fn eval(self, s: f64) -> Complex64 {
        match self {
            HmProfile::AnalyticProjection => {
                Complex64::new(if s > 0.0 { 1.0 } else { 0.0 }, 0.0)
            }
            HmProfile::HilbertSign => Complex64::new(0.0, -signum0(s)),
            HmProfile::SmoothOdd => Complex64::new(s / (1.0 + s * s).sqrt(), 0.0),
            HmProfile::RieszLike => Complex64::new(signum0(s) * s * s / (1.0 + s * s), 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HmProfile::AnalyticProjection => "analytic_projection",
            HmProfile::HilbertSign => "hilbert_sign",
            HmProfile::SmoothOdd => "smooth_odd",
            HmProfile::RieszLike => "riesz_like",
        }
    }
}

fn signum0(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl FromStr for HmProfile {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        HmProfile::ALL
            .iter()
            .copied()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown multiplier profile {s:?}"))
    }
}

/// Highest derivative order probed by [`hm_constants`].
pub const HM_ALPHA_MAX: usize = 3;

/// Finite-difference Hormander-Mikhlin constants `sup |s|^a |d^a m(s)|`
/// for `a = 0..=3`, measured on a geometric grid `|s|` in `[1e-6, 1e6]`.
/// Steps are relative, so the stencil never crosses the origin.
pub fn hm_constants(profile: HmProfile) -> [f64; HM_ALPHA_MAX + 1] {
    let mut c = [0.0f64; HM_ALPHA_MAX + 1];
    let decades = 12.0;
    let points = 241;
    for sign in [-1.0, 1.0] {
        for i in 0..points {
            let s = sign * 1e-6 * 10f64.powf(decades * i as f64 / (points - 1) as f64);
            let m = |x: f64| profile.eval(x);
            c[0] = c[0].max(m(s).norm());
            let h1 = 1e-5 * s.abs();
            let d1 = (m(s + h1) - m(s - h1)) / (2.0 * h1);
            c[1] = c[1].max(s.abs() * d1.norm());
            let h2 = 1e-4 * s.abs();
            let d2 = (m(s + h2) - 2.0 * m(s) + m(s - h2)) / (h2 * h2);
            c[2] = c[2].max(s.abs().powi(2) * d2.norm());
            let h3 = 2e-3 * s.abs();
            let d3 = (m(s + 2.0 * h3) - 2.0 * m(s + h3) + 2.0 * m(s - h3) - m(s - 2.0 * h3))
                / (2.0 * h3 * h3 * h3);
            c[3] = c[3].max(s.abs().powi(3) * d3.norm());
        }
    }
    c
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpBumpKind {
    /// Supported in `1/2 < |s| < 2`, dyadic partition of unity.
    P,
    /// Supported in `1/4 < |s| < 4`, identically 1 on `1/2 <= |s| <= 2`.
    Q,
}

/// Littlewood-Paley bumps built as differences of log-scale ramps, so the
/// `p` family sums to exactly 1 over dyadic rescalings.
pub fn lp_bump(s: f64, kind: LpBumpKind) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let y = s.abs().log2();
    match kind {
        LpBumpKind::P => smooth_step(y + 1.0) - smooth_step(y),
        LpBumpKind::Q => smooth_step(y + 2.0) - smooth_step(y - 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::cone_membership;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn dir(ray: &[f64]) -> Direction {
        Direction::from_ray(ray).unwrap()
    }

    #[test]
    fn smooth_step_endpoints_and_symmetry() {
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(-3.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
        assert_eq!(smooth_step(7.0), 1.0);
        assert_eq!(smooth_step(0.5), 0.5);
        // Frozen from g(1/4) / (g(1/4) + g(3/4)) = 1 / (1 + e^(8/3)).
        assert_abs_diff_eq!(smooth_step(0.25), 0.06496916912866406, epsilon = 1e-14);
        for x in [0.05, 0.2, 0.37, 0.61, 0.93] {
            assert_abs_diff_eq!(smooth_step(x) + smooth_step(1.0 - x), 1.0, epsilon = 1e-15);
        }
        // Strictly increasing where f64 can resolve it; the tails saturate
        // below one ulp of 0 and 1.
        let mut prev = 0.0;
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let v = smooth_step(x);
            if (0.15..=0.85).contains(&x) {
                assert!(v > prev, "not strict at {x}");
            } else {
                assert!(v >= prev, "not monotone at {x}");
            }
            prev = v;
        }
    }

    #[test]
    fn nsw_omega_thresholds() {
        assert_eq!(nsw_omega(&[1.0, -1.0]), 1.0);
        assert_eq!(nsw_omega(&[1.0, 1.0]), 0.0);
        // Midpoint of the ramp [1/8, 1/4] for n = 2.
        assert_abs_diff_eq!(nsw_omega(&[1.0, -1.0 + 0.1875]), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn nsw_omega_v_support_and_homogeneity() {
        let v = dir(&[1.0, 1.0]);
        assert_eq!(nsw_omega_v(&[1.0, -1.0], &v), 1.0);
        assert_eq!(nsw_omega_v(&[1.0, 1.0], &v), 0.0);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..200 {
            let v = dir(&[rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)]);
            let xi = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if xi[0] == 0.0 && xi[1] == 0.0 {
                continue;
            }
            let w = nsw_omega_v(&xi, &v);
            for t in [1e-6, 1e3] {
                assert_abs_diff_eq!(nsw_omega_v(&[xi[0] * t, xi[1] * t], &v), w, epsilon = 1e-12);
            }
            if w > 0.0 {
                assert!(cone_membership(&xi, &v));
            }
        }
    }

    #[test]
    fn kappa_profile_examples() {
        assert_eq!(kappa_profile(1.0, 2), 1.0);
        assert_eq!(kappa_profile(3.5, 2), 0.0);
        assert_abs_diff_eq!(kappa_profile(2.5, 2), 0.5, epsilon = 1e-15);
        assert_eq!(kappa_profile(-1.0, 2), 0.0);
        assert_eq!(kappa_profile(0.0, 2), 0.0);
    }

    #[test]
    fn kappa_sigma_examples() {
        let s = SigmaIndex::new(0, 1).unwrap();
        assert_eq!(kappa_sigma_ell(&[-1.0, 1.0], s, 0), 1.0);
        assert_eq!(kappa_sigma_ell(&[1.0, 1.0], s, 0), 0.0);
        assert_eq!(kappa_sigma_ell(&[1.0, 0.0], s, 0), 0.0);
    }

    #[test]
    fn kappa_matches_wedge_membership() {
        use crate::direction::wedge_membership;
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for n in 2..=4usize {
            let sigmas = SigmaIndex::all(n);
            for _ in 0..2000 {
                let mut xi = vec![0.0; n];
                for x in xi.iter_mut() {
                    *x = rng.gen_range(-2.0..2.0);
                }
                let sigma = sigmas[rng.gen_range(0..sigmas.len())];
                let ell = rng.gen_range(-3..6);
                let k = kappa_sigma_ell(&xi, sigma, ell);
                if k > 0.0 {
                    assert!(wedge_membership(&xi, sigma, ell, true), "xi={xi:?}");
                }
                if wedge_membership(&xi, sigma, ell, false) {
                    assert_eq!(k, 1.0, "xi={xi:?} ell={ell}");
                }
            }
        }
    }

    #[test]
    fn eta_family_telescopes() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for n in 2..=4usize {
            for _ in 0..2000 {
                let mut ray = vec![0.0; n];
                for r in ray.iter_mut() {
                    *r = rng.gen_range(0.05..1.0);
                }
                let v = dir(&ray);
                let mut xi = vec![0.0; n];
                for x in xi.iter_mut() {
                    *x = rng.gen_range(-3.0..3.0);
                }
                if xi.iter().all(|x| *x == 0.0) {
                    continue;
                }
                let eta = eta_family(&xi, &v);
                let sum: f64 = eta[..n].iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12, "sum {sum}");
                assert!(eta[..n].iter().all(|e| *e >= 0.0 && *e <= 1.0));
            }
        }
    }

    #[test]
    fn eta_family_saturates_on_dominant_axes() {
        let v = dir(&[1.0, 1.0]);
        let eta = eta_family(&[1.0, 1e-6], &v);
        assert_eq!(eta[0], 1.0);
        assert_eq!(eta[1], 0.0);
        let eta = eta_family(&[1e-6, 1.0], &v);
        assert_eq!(eta[0], 0.0);
        assert_eq!(eta[1], 1.0);
    }

    #[test]
    fn hm_profile_values() {
        assert_eq!(
            HmProfile::AnalyticProjection.eval(2.0),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            HmProfile::AnalyticProjection.eval(-2.0),
            Complex64::new(0.0, 0.0)
        );
        assert_eq!(HmProfile::HilbertSign.eval(-3.0), Complex64::new(0.0, 1.0));
        assert_eq!(HmProfile::HilbertSign.eval(3.0), Complex64::new(0.0, -1.0));
        assert!("nope".parse::<HmProfile>().is_err());
        assert_eq!("hilbert_sign".parse::<HmProfile>(), Ok(HmProfile::HilbertSign));
    }

    #[test]
    fn hm_constants_bounded() {
        for p in HmProfile::ALL {
            let c = hm_constants(p);
            assert!(c[0] <= 1.0 + 1e-12, "{p:?}: {c:?}");
            for a in 0..=HM_ALPHA_MAX {
                assert!(c[a] <= 10.0, "{p:?} alpha={a}: {c:?}");
            }
        }
    }

    #[test]
    fn lp_bump_support_and_partition() {
        assert_eq!(lp_bump(1.0, LpBumpKind::P), 1.0);
        assert_eq!(lp_bump(3.0, LpBumpKind::P), 0.0);
        assert_eq!(lp_bump(0.5, LpBumpKind::P), 0.0);
        assert_eq!(lp_bump(1.0, LpBumpKind::Q), 1.0);
        assert_eq!(lp_bump(0.5, LpBumpKind::Q), 1.0);
        assert_eq!(lp_bump(2.0, LpBumpKind::Q), 1.0);
        assert_eq!(lp_bump(4.5, LpBumpKind::Q), 0.0);
        assert_eq!(lp_bump(0.0, LpBumpKind::P), 0.0);

        for s in [0.73, -0.73, 1.9, 42.0, 3e-4] {
            let total: f64 = (-60..60).map(|t| lp_bump(pow2(-t) * s, LpBumpKind::P)).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        }
        // q dominates p on its plateau, so Q_t P_t = P_t.
        for s in [0.6, 1.0, 1.7, -1.3] {
            assert!(lp_bump(s, LpBumpKind::P) <= lp_bump(s, LpBumpKind::Q));
        }
    }

    #[test]
    fn symbol_gradients_scale_with_dyadic_annuli() {
        // Finite-difference gradient magnitude times ||xi||_inf should be
        // stable across annuli for degree-zero symbols.
        let v = dir(&[1.0, 0.4, 0.2]);
        let sigma = SigmaIndex::new(0, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let dirs: Vec<[f64; 3]> = (0..64)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0f64),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .filter(|x| x.iter().any(|c| c.abs() > 0.1))
            .collect();
        let mut per_annulus = Vec::new();
        for a in 3..=6 {
            let scale = pow2(a);
            let mut worst = 0.0f64;
            for d in &dirs {
                let sup = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let xi = [d[0] * scale / sup, d[1] * scale / sup, d[2] * scale / sup];
                let h = 1e-4 * scale;
                for axis in 0..3 {
                    let mut plus = xi;
                    plus[axis] += h;
                    let mut minus = xi;
                    minus[axis] -= h;
                    let fns: [&dyn Fn(&[f64]) -> f64; 3] = [
                        &|x: &[f64]| nsw_omega_v(x, &v),
                        &|x: &[f64]| kappa_sigma_ell(x, sigma, 1),
                        &|x: &[f64]| eta_family(x, &v)[0],
                    ];
                    for f in fns {
                        let g = (f(&plus) - f(&minus)).abs() / (2.0 * h);
                        worst = worst.max(g * scale);
                    }
                }
            }
            per_annulus.push(worst);
        }
        let lo = per_annulus.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = per_annulus.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi > 0.0 && hi / lo < 2.0, "annulus constants {per_annulus:?}");
    }
}
