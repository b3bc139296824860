//! Extreme-value limit of the survival MGL copula: Pickands dependence
//! function, stable tail dependence function ℓ (any dimension), the bivariate
//! MGL-EV cdf/density/h-function, the lower-tail limiting copula, and a
//! conditional-inverse sampler.
//!
//! ∂ℓ derivatives are taken by central finite differences in z-space; the
//! mixed second derivative uses a wider step than the first derivatives to
//! balance truncation against rounding in the double difference.

use crate::copula::{clamp_unit, CLAMP_HI, CLAMP_LO};
use crate::error::{Error, Result};
use crate::specfun::{inc_beta, BetaShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Pickands dependence function A_δ(w) on [0, 1]:
/// A(w) = w·I_{1/2,c}((1−w)^{−δ}/((1−w)^{−δ}+w^{−δ})) + (1−w)·I_{1/2,c}(w^{−δ}/(…)),
/// c = 1/δ + 1/2. Satisfies A(0) = A(1) = 1 and max(w, 1−w) ≤ A ≤ 1.
pub fn pickands_a(w: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(0.0..=1.0).contains(&w) || w.is_nan() {
        return Err(Error::domain(format!("Pickands argument must be in [0,1], got {w}")));
    }
    if w <= 0.0 || w >= 1.0 {
        return Ok(1.0);
    }
    let c = BetaShape::half(1.0 / delta + 0.5)?;
    // arguments as logistic transforms of r = log((1-w)/w), exact at both ends
    let r = (-w).ln_1p() - w.ln();
    let a1 = 1.0 / (1.0 + (delta * r).exp());
    let a2 = 1.0 / (1.0 + (-delta * r).exp());
    Ok(w * inc_beta(a1, c)? + (1.0 - w) * inc_beta(a2, c)?)
}

/// Stable tail dependence function ℓ(u_1,…,u_d; δ):
/// ℓ(u) = Σ_j u_j I_{1/2, 1/δ+1/2}(1 − u_j^{−δ}/Σ_k u_k^{−δ}).
/// Homogeneous of degree 1 with ℓ(u, 0, …, 0) = u.
pub fn stable_tail_l(u: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if u.is_empty() {
        return Err(Error::Validation("stable_tail_l needs at least one coordinate".into()));
    }
    if let Some(bad) = u.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("components must be nonnegative, got {bad}")));
    }
    let pos: Vec<f64> = u.iter().copied().filter(|&v| v > 0.0).collect();
    match pos.len() {
        0 => Ok(0.0),
        1 => Ok(pos[0]),
        _ => {
            let c = BetaShape::half(1.0 / delta + 0.5)?;
            let x: Vec<f64> = pos.iter().map(|&v| -delta * v.ln()).collect();
            let m = x.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let lse = m + x.iter().map(|&v| (v - m).exp()).sum::<f64>().ln();
            let mut acc = 0.0;
            for (&uj, &xj) in pos.iter().zip(&x) {
                // x_j <= lse, so the exponential is in (0, 1]
                let arg = 1.0 - (xj - lse).exp();
                acc += uj * inc_beta(arg.clamp(0.0, 1.0), c)?;
            }
            Ok(acc)
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain(format!("delta must be positive finite, got {delta}")));
    }
    Ok(())
}

fn ell2(z1: f64, z2: f64, delta: f64) -> Result<f64> {
    stable_tail_l(&[z1, z2], delta)
}

/// ∂ℓ/∂z_i at (z1, z2), central differences with step 1e-6 (shrunk near the
/// z = 0 boundary to keep the stencil inside the domain).
fn dell(z1: f64, z2: f64, delta: f64, which: usize) -> Result<f64> {
    let z = if which == 0 { z1 } else { z2 };
    let h = 1e-6_f64.min(0.5 * z).max(1e-300);
    let (up, dn) = if which == 0 {
        (ell2(z1 + h, z2, delta)?, ell2(z1 - h, z2, delta)?)
    } else {
        (ell2(z1, z2 + h, delta)?, ell2(z1, z2 - h, delta)?)
    };
    Ok((up - dn) / (2.0 * h))
}

/// Mixed second derivative ∂²ℓ/∂z1∂z2 by the four-point cross stencil.
fn d2ell(z1: f64, z2: f64, delta: f64) -> Result<f64> {
    let h1 = (1e-4 * z1.max(1.0)).min(0.5 * z1).max(1e-300);
    let h2 = (1e-4 * z2.max(1.0)).min(0.5 * z2).max(1e-300);
    let pp = ell2(z1 + h1, z2 + h2, delta)?;
    let pm = ell2(z1 + h1, z2 - h2, delta)?;
    let mp = ell2(z1 - h1, z2 + h2, delta)?;
    let mm = ell2(z1 - h1, z2 - h2, delta)?;
    Ok((pp - pm - mp + mm) / (4.0 * h1 * h2))
}

/// Bivariate MGL-EV copula cdf:
/// C(u1, u2) = exp[log(u1 u2) · A_δ(log u2 / log(u1 u2))] = exp(−ℓ(−log u1, −log u2)).
pub fn ev_cdf(u1: f64, u2: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if u1 <= 0.0 || u2 <= 0.0 {
        return Ok(0.0);
    }
    if u1 >= 1.0 && u2 >= 1.0 {
        return Ok(1.0);
    }
    let (z1, z2) = (-u1.min(1.0).ln(), -u2.min(1.0).ln());
    Ok((-ell2(z1, z2, delta)?).exp())
}

/// Bivariate MGL-EV copula density:
/// c(u1,u2) = C(u1,u2)/(u1 u2) · [∂₁ℓ·∂₂ℓ − ∂₁∂₂ℓ] at z = −log u.
pub fn ev_pdf(u1: f64, u2: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let (u1, u2) = (clamp_unit(u1), clamp_unit(u2));
    let (z1, z2) = (-u1.ln(), -u2.ln());
    let c = (-ell2(z1, z2, delta)?).exp();
    let d1 = dell(z1, z2, delta, 0)?;
    let d2 = dell(z1, z2, delta, 1)?;
    let d12 = d2ell(z1, z2, delta)?;
    Ok((c / (u1 * u2) * (d1 * d2 - d12)).max(0.0))
}

/// Conditional cdf h(u_target | u_given) = C(u)/u_given · ∂ℓ/∂z_given.
pub fn ev_h(u_target: f64, u_given: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let (ut, ug) = (clamp_unit(u_target), clamp_unit(u_given));
    let (zg, zt) = (-ug.ln(), -ut.ln());
    let c = (-ell2(zg, zt, delta)?).exp();
    let d = dell(zg, zt, delta, 0)?;
    Ok((c / ug * d).clamp(0.0, 1.0))
}

/// Limiting lower-tail copula of the MGL copula:
/// (u1+u2)·(1 − A_δ(u1/(u1+u2))) / (2·(1 − A_δ(1/2))).
pub fn ev_lower_copula(u1: f64, u2: f64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(u1 >= 0.0 && u2 >= 0.0) {
        return Err(Error::domain("arguments must be nonnegative".into()));
    }
    let denom = 1.0 - pickands_a(0.5, delta)?;
    if denom < 1e-12 {
        return Err(Error::domain(
            "lower-tail copula degenerates as delta -> 0 (A(1/2) = 1)".into(),
        ));
    }
    if u1 + u2 == 0.0 {
        return Ok(0.0);
    }
    let a = pickands_a(u1 / (u1 + u2), delta)?;
    Ok((u1 + u2) * (1.0 - a) / (2.0 * denom))
}

/// Sample the bivariate MGL-EV copula by conditional inversion: u1 uniform,
/// then solve ev_h(u2 | u1) = w by bracketed bisection to 1e-10.
pub fn sample_ev(delta: f64, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::Validation("sample size must be >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let u1: f64 = rng.gen_range(1e-12..1.0 - 1e-12);
        let w: f64 = rng.gen_range(1e-12..1.0 - 1e-12);
        let u2 = invert_ev_h(w, u1, delta)?;
        out.push(vec![u1, u2]);
    }
    Ok(out)
}

fn invert_ev_h(w: f64, u1: f64, delta: f64) -> Result<f64> {
    let (mut lo, mut hi) = (CLAMP_LO, CLAMP_HI);
    let f_lo = ev_h(lo, u1, delta)?;
    let f_hi = ev_h(hi, u1, delta)?;
    if !(f_lo <= w && w <= f_hi) {
        // h is a conditional cdf; values outside the bracket sit on a boundary
        if w < f_lo {
            return Ok(lo);
        }
        if w > f_hi {
            return Ok(hi);
        }
        return Err(Error::BracketingFailure(format!(
            "ev_h bracket [{f_lo}, {f_hi}] does not contain {w}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ev_h(mid, u1, delta)? < w {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn pickands_boundaries_and_closed_form() {
        for &delta in &[0.3, 1.0, 4.0] {
            assert_eq!(pickands_a(0.0, delta).unwrap(), 1.0);
            assert_eq!(pickands_a(1.0, delta).unwrap(), 1.0);
        }
        // A_1(1/2) = I_{1/2,3/2}(1/2) = 1/2 + 1/pi
        assert_abs_diff_eq!(
            pickands_a(0.5, 1.0).unwrap(),
            0.5 + 1.0 / PI,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(pickands_a(0.5, 1.0).unwrap(), 0.8183, epsilon = 5e-5);
        // lambda_u of the survival family: 2 - 2A(1/2) equals the MGL lambda_l
        let lam = crate::copula::tail_dependence(1.0).unwrap().0;
        assert_abs_diff_eq!(2.0 - 2.0 * pickands_a(0.5, 1.0).unwrap(), lam, epsilon = 1e-12);
    }

    #[test]
    fn pickands_bounds_and_convexity() {
        for &delta in &[0.2, 1.0, 3.0] {
            let a = |w: f64| pickands_a(w, delta).unwrap();
            for i in 0..=200 {
                let w = i as f64 / 200.0;
                let v = a(w);
                assert!(v <= 1.0 + 1e-12);
                assert!(v >= w.max(1.0 - w) - 1e-12);
            }
            // midpoint convexity on a grid
            for i in 0..100 {
                let w1 = i as f64 / 100.0;
                let w2 = (i + 37) as f64 % 101.0 / 100.0;
                let lhs = a(0.5 * (w1 + w2));
                let rhs = 0.5 * (a(w1) + a(w2));
                assert!(lhs <= rhs + 1e-10, "convexity at ({w1},{w2})");
            }
        }
    }

    #[test]
    fn stable_tail_boundary_homogeneity_consistency() {
        let delta = 1.3;
        assert_abs_diff_eq!(stable_tail_l(&[0.7, 0.0], delta).unwrap(), 0.7, epsilon = 1e-14);
        assert_abs_diff_eq!(stable_tail_l(&[0.0, 0.4], delta).unwrap(), 0.4, epsilon = 1e-14);
        // degree-1 homogeneity at d=3
        let u = [0.3, 1.1, 0.6];
        let l1 = stable_tail_l(&u, delta).unwrap();
        let l2 = stable_tail_l(&[0.6, 2.2, 1.2], delta).unwrap();
        assert_abs_diff_eq!(l2, 2.0 * l1, epsilon = 1e-12);
        // d=2 definitional consistency with the Pickands function
        for i in 1..20 {
            let w = i as f64 / 20.0;
            let lhs = stable_tail_l(&[w, 1.0 - w], delta).unwrap();
            let rhs = pickands_a(1.0 - w, delta).unwrap();
            // ell(u1,u2) = (u1+u2) A(u2/(u1+u2)); here u1+u2 = 1
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
    }

    #[test]
    fn ev_cdf_margins_and_max_stability() {
        let delta = 1.0;
        for &u in &[0.2, 0.5, 0.8] {
            assert_abs_diff_eq!(ev_cdf(u, 1.0, delta).unwrap(), u, epsilon = 1e-12);
            assert_abs_diff_eq!(ev_cdf(1.0, u, delta).unwrap(), u, epsilon = 1e-12);
        }
        for &k in &[2.0, 5.0] {
            let v = ev_cdf(0.3_f64.powf(1.0 / k), 0.7_f64.powf(1.0 / k), delta)
                .unwrap()
                .powf(k);
            assert_abs_diff_eq!(v, ev_cdf(0.3, 0.7, delta).unwrap(), epsilon = 1e-8);
        }
    }

    #[test]
    fn ev_pdf_integrates_to_one() {
        use crate::quad::GaussLegendre;
        let gl = GaussLegendre::new(96);
        for &delta in &[0.5, 1.0, 2.0] {
            let nodes = gl.scaled(1e-9, 1.0 - 1e-9);
            let mut acc = 0.0;
            for &(x, wx) in &nodes {
                for &(y, wy) in &nodes {
                    acc += wx * wy * ev_pdf(x, y, delta).unwrap();
                }
            }
            assert!((acc - 1.0).abs() < 1e-4, "delta={delta}: integral {acc}");
        }
    }

    #[test]
    fn ev_h_matches_cdf_derivative_and_inverts() {
        let delta = 1.2;
        for &(ug, ut) in &[(0.3, 0.6), (0.5, 0.5), (0.8, 0.2)] {
            let h = 1e-6;
            let fd = (ev_cdf(ug + h, ut, delta).unwrap() - ev_cdf(ug - h, ut, delta).unwrap())
                / (2.0 * h);
            let hv = ev_h(ut, ug, delta).unwrap();
            assert!((fd - hv).abs() < 1e-5, "({ug},{ut}): fd {fd} vs h {hv}");
        }
        let w = ev_h(0.3, 0.6, 1.0).unwrap();
        assert_abs_diff_eq!(invert_ev_h(w, 0.6, 1.0).unwrap(), 0.3, epsilon = 1e-8);
    }

    #[test]
    fn domain_of_attraction_limit() {
        // s^{-1}(1 - Cbar(1-s u1, 1-s u2)) -> ell(u1, u2) at s = 1e-5.
        // The remainder is O(s^{1/a}); at s = 1e-5 the 1e-3 window needs
        // delta >= 1.
        let s = 1e-5;
        for &delta in &[1.0, 2.0] {
            let cdf = crate::copula::MglCdf::new(delta).unwrap();
            for &(u1, u2) in &[(1.0, 1.0), (0.5, 1.5), (0.2, 0.8), (1.0, 2.0), (0.3, 0.3)] {
                // 1 - Cbar(1-su1, 1-su2) = s(u1+u2) - C(s u1, s u2)
                let val = (s * u1 + s * u2 - cdf.eval(&[s * u1, s * u2]).unwrap()) / s;
                let lim = stable_tail_l(&[u1, u2], delta).unwrap();
                assert!(
                    (val - lim).abs() < 1e-3,
                    "delta={delta} u=({u1},{u2}): {val} vs {lim}"
                );
            }
        }
    }

    #[test]
    fn lower_tail_copula() {
        // symmetric, normalized at (1,1), degenerate as delta -> 0
        let delta = 1.0;
        assert_abs_diff_eq!(ev_lower_copula(1.0, 1.0, delta).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            ev_lower_copula(1.0, 2.0, delta).unwrap(),
            ev_lower_copula(2.0, 1.0, delta).unwrap(),
            epsilon = 1e-12
        );
        // direct evaluation through the Pickands closed form
        let a13 = pickands_a(1.0 / 3.0, delta).unwrap();
        let a12 = pickands_a(0.5, delta).unwrap();
        assert_abs_diff_eq!(
            ev_lower_copula(1.0, 2.0, delta).unwrap(),
            3.0 * (1.0 - a13) / (2.0 * (1.0 - a12)),
            epsilon = 1e-12
        );
        assert!(ev_lower_copula(1.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn ev_sampler_margins_and_determinism() {
        let n = 20_000;
        let s = sample_ev(1.0, n, 11).unwrap();
        for j in 0..2 {
            let mut col: Vec<f64> = s.iter().map(|r| r[j]).collect();
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ks = col
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    ((i + 1) as f64 / n as f64 - v).abs().max((v - i as f64 / n as f64).abs())
                })
                .fold(0.0_f64, f64::max);
            assert!(ks < 0.012, "margin {j} KS = {ks}");
        }
        let again = sample_ev(1.0, 5, 11).unwrap();
        assert_eq!(s[..5], again[..]);
    }
}
