//! Univariate GLMGA distribution (gamma mixture of the generalized log-Moyal)
//! and the underlying GlogM distribution: density, cdf, quantile, moments,
//! sampling, and maximum-likelihood fitting.

use crate::error::{Error, Result};
use crate::optim::{minimize, numeric_hessian, standard_errors, OptimOptions};
use crate::specfun::{self, erfc, erfc_inv, inv_inc_beta_parts_compl, BetaShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Parameters (σ, a, b) of the GLMGA distribution. The Pareto tail index is
/// 1/(2σ); all three parameters are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlmgaParams {
    pub sigma: f64,
    pub a: f64,
    pub b: f64,
}

impl GlmgaParams {
    pub fn new(sigma: f64, a: f64, b: f64) -> Result<Self> {
        if !(sigma > 0.0 && a > 0.0 && b > 0.0)
            || !sigma.is_finite()
            || !a.is_finite()
            || !b.is_finite()
        {
            return Err(Error::domain(format!(
                "GLMGA parameters must be positive finite, got ({sigma}, {a}, {b})"
            )));
        }
        Ok(GlmgaParams { sigma, a, b })
    }

    /// Pareto tail index 1/(2σ).
    pub fn tail_index(&self) -> f64 {
        1.0 / (2.0 * self.sigma)
    }
}

/// Parameters (θ, σ) of the generalized log-Moyal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlogmParams {
    pub theta: f64,
    pub sigma: f64,
}

impl GlogmParams {
    pub fn new(theta: f64, sigma: f64) -> Result<Self> {
        if !(theta > 0.0 && sigma > 0.0) {
            return Err(Error::domain(format!(
                "GlogM parameters must be positive, got ({theta}, {sigma})"
            )));
        }
        Ok(GlogmParams { theta, sigma })
    }
}

fn check_positive(y: f64) -> Result<()> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain(format!("observation must be positive, got {y}")));
    }
    Ok(())
}

/// Log density of GLMGA(σ, a, b).
pub fn glmga_ln_pdf(y: f64, p: &GlmgaParams) -> Result<f64> {
    check_positive(y)?;
    let (s, a, b) = (p.sigma, p.a, p.b);
    let ln_2b = (2.0 * b).ln();
    // log(y^{-1/σ} + 2b) without overflow on either side
    let ln_sum = logaddexp(-y.ln() / s, ln_2b);
    Ok(a * ln_2b - s.ln() - specfun::ln_beta(a, 0.5) - (1.0 / (2.0 * s) + 1.0) * y.ln()
        - (a + 0.5) * ln_sum)
}

/// Density of GLMGA(σ, a, b).
pub fn glmga_pdf(y: f64, p: &GlmgaParams) -> Result<f64> {
    Ok(glmga_ln_pdf(y, p)?.exp())
}

fn logaddexp(x: f64, y: f64) -> f64 {
    if x > y {
        x + (y - x).exp().ln_1p()
    } else {
        y + (x - y).exp().ln_1p()
    }
}

/// Distribution function F(y) = 1 − I_{1/2,a}(y^{-1/σ} / (y^{-1/σ} + 2b)).
pub fn glmga_cdf(y: f64, p: &GlmgaParams) -> Result<f64> {
    check_positive(y)?;
    // r = 1 / (1 + 2b·y^{1/σ})
    let r = 1.0 / (1.0 + ((2.0 * p.b).ln() + y.ln() / p.sigma).exp());
    Ok(1.0 - specfun::inc_beta(r, BetaShape::half(p.a)?)?)
}

/// Quantile function F⁻¹(q) = (2b)^{-σ} [w/(1−w)]^{-σ}, w = I⁻¹_{1/2,a}(1−q).
pub fn glmga_quantile(q: f64, p: &GlmgaParams) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("quantile level must be in (0,1), got {q}")));
    }
    let (w, wc) = inv_inc_beta_parts_compl(q, BetaShape::half(p.a)?)?;
    let ln_t = w.ln() - wc.ln();
    Ok((-p.sigma * ((2.0 * p.b).ln() + ln_t)).exp())
}

/// Mean and variance from the closed forms; the mean needs σ < 1/2 and the
/// variance σ < 1/4.
pub fn glmga_mean_var(p: &GlmgaParams) -> Result<(f64, f64)> {
    let mean = glmga_mean(p)?;
    let (s, a) = (p.sigma, p.a);
    if s >= 0.25 {
        return Err(Error::MomentUndefined(format!(
            "variance requires sigma < 1/4, got {s}"
        )));
    }
    let lb = specfun::ln_beta;
    let ratio =
        (lb(a + 2.0 * s, a) - lb(a + s, a + s) + lb(0.5 - 2.0 * s, 0.5) - lb(0.5 - s, 0.5 - s))
            .exp();
    Ok((mean, mean * mean * (ratio - 1.0)))
}

/// Mean (2b)^{-σ} B(1/2−σ, a+σ) / B(1/2, a), for σ < 1/2.
pub fn glmga_mean(p: &GlmgaParams) -> Result<f64> {
    let (s, a, b) = (p.sigma, p.a, p.b);
    if s >= 0.5 {
        return Err(Error::MomentUndefined(format!(
            "mean requires sigma < 1/2, got {s}"
        )));
    }
    let lb = specfun::ln_beta;
    Ok((-s * (2.0 * b).ln() + lb(0.5 - s, a + s) - lb(0.5, a)).exp())
}

/// Deterministic sample of size n via the quantile transform.
pub fn glmga_sample(p: &GlmgaParams, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen_range(1e-16..1.0 - 1e-16);
            glmga_quantile(u, p)
        })
        .collect()
}

/// Maximum-likelihood fit report for the GLMGA distribution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlmgaFit {
    pub params: GlmgaParams,
    /// Standard errors for (σ, a, b) from the inverse observed information.
    pub se: [f64; 3],
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub iterations: usize,
}

/// Fit GLMGA by quasi-Newton on log-parameterized (σ, a, b).
pub fn glmga_fit(data: &[f64]) -> Result<GlmgaFit> {
    if data.len() < 10 {
        return Err(Error::Validation(format!(
            "need at least 10 observations, got {}",
            data.len()
        )));
    }
    if let Some(bad) = data.iter().find(|y| !(**y > 0.0) || !y.is_finite()) {
        return Err(Error::domain(format!("nonpositive observation {bad}")));
    }
    let n = data.len() as f64;
    let nll = |lp: &[f64]| -> f64 {
        let p = GlmgaParams {
            sigma: lp[0].exp(),
            a: lp[1].exp(),
            b: lp[2].exp(),
        };
        if !(p.sigma.is_finite() && p.a.is_finite() && p.b.is_finite()) {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for &y in data {
            match glmga_ln_pdf(y, &p) {
                Ok(v) if v.is_finite() => acc -= v,
                _ => return f64::INFINITY,
            }
        }
        acc
    };
    // scale-aware start: b from the median level, sigma/a neutral
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = sorted[sorted.len() / 2].max(1e-12);
    let start = [0.5_f64.ln(), 0.0, (0.5 / med).ln()];
    let res = minimize(nll, None::<fn(&[f64]) -> Vec<f64>>, &start, &OptimOptions::default())?;
    let params = GlmgaParams::new(res.x[0].exp(), res.x[1].exp(), res.x[2].exp())?;
    // observed information in natural parameter space
    let nll_nat = |q: &[f64]| -> f64 {
        if q.iter().any(|v| !(*v > 0.0)) {
            return f64::INFINITY;
        }
        nll(&[q[0].ln(), q[1].ln(), q[2].ln()])
    };
    let hess = numeric_hessian(&nll_nat, &[params.sigma, params.a, params.b]);
    let se = standard_errors(&hess).unwrap_or(vec![f64::NAN; 3]);
    let loglik = -res.f;
    Ok(GlmgaFit {
        params,
        se: [se[0], se[1], se[2]],
        loglik,
        aic: -2.0 * loglik + 2.0 * 3.0,
        bic: -2.0 * loglik + 3.0 * n.ln(),
        iterations: res.iterations,
    })
}

// --- GlogM ----------------------------------------------------------------

/// Density of GlogM(θ, σ).
pub fn glogm_pdf(y: f64, p: &GlogmParams) -> Result<f64> {
    check_positive(y)?;
    let (th, s) = (p.theta, p.sigma);
    let ln = 0.5 * th.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - s.ln()
        - (1.0 / (2.0 * s) + 1.0) * y.ln()
        - 0.5 * th * (-y.ln() / s).exp();
    Ok(ln.exp())
}

/// Distribution function of GlogM(θ, σ): erfc(√(θ/2) · y^{-1/(2σ)}).
pub fn glogm_cdf(y: f64, p: &GlogmParams) -> Result<f64> {
    check_positive(y)?;
    Ok(erfc((p.theta / 2.0).sqrt() * (-y.ln() / (2.0 * p.sigma)).exp()))
}

/// Quantile of GlogM(θ, σ) (used by the Monte-Carlo oracles).
pub fn glogm_quantile(q: f64, p: &GlogmParams) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("quantile level must be in (0,1), got {q}")));
    }
    // erfc(sqrt(th/2) y^{-1/(2s)}) = q
    let z = erfc_inv(q);
    Ok(((p.theta / 2.0).sqrt() / z).powf(2.0 * p.sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{GammaMeasure, GaussLegendre};
    use approx::assert_abs_diff_eq;

    fn integrate_pdf(p: &GlmgaParams) -> f64 {
        // integrate in log-space between extreme quantiles
        let lo = glmga_quantile(1e-12, p).unwrap().ln();
        let hi = glmga_quantile(1.0 - 1e-12, p).unwrap().ln();
        let gl = GaussLegendre::new(32);
        let panels = 200;
        let mut acc = 0.0;
        for k in 0..panels {
            let a = lo + (hi - lo) * k as f64 / panels as f64;
            let b = lo + (hi - lo) * (k + 1) as f64 / panels as f64;
            acc += gl.integrate(a, b, |s| glmga_pdf(s.exp(), p).unwrap() * s.exp());
        }
        acc
    }

    #[test]
    fn pdf_normalizes() {
        for p in [
            GlmgaParams::new(0.5, 1.0, 1.0).unwrap(),
            GlmgaParams::new(0.82, 0.7, 0.005).unwrap(),
            GlmgaParams::new(0.2, 2.0, 3.0).unwrap(),
        ] {
            assert_abs_diff_eq!(integrate_pdf(&p), 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn pdf_matches_gb2_embedding() {
        // GB2(tau=a, mu=(2b)^{-sigma}, nu=1/2, p=-1/sigma)
        let p = GlmgaParams::new(0.7, 1.3, 2.0).unwrap();
        let gb2 = |y: f64| {
            let (tau, nu) = (p.a, 0.5);
            let mu = (2.0 * p.b).powf(-p.sigma);
            let pw = -1.0 / p.sigma;
            pw.abs() / ((specfun::ln_beta(nu, tau)).exp() * y) * mu.powf(pw * tau)
                * y.powf(pw * nu)
                / (y.powf(pw) + mu.powf(pw)).powf(nu + tau)
        };
        for &y in &[0.5, 1.0, 2.0] {
            let lhs = glmga_pdf(y, &p).unwrap();
            assert!((lhs - gb2(y)).abs() / gb2(y) < 1e-12);
        }
    }

    #[test]
    fn tails_vanish() {
        let p = GlmgaParams::new(0.5, 1.0, 1.0).unwrap();
        assert!(glmga_pdf(1e-12, &p).unwrap() < 1e-6);
        assert!(glmga_pdf(1e12, &p).unwrap() < 1e-6);
        assert!(glmga_pdf(-1.0, &p).is_err());
        assert!(glmga_pdf(0.0, &p).is_err());
    }

    #[test]
    fn cdf_quantile_roundtrip() {
        let p = GlmgaParams::new(0.5, 1.0, 2.0).unwrap();
        for &q in &[0.001, 0.1, 0.37, 0.5, 0.9, 0.999] {
            let y = glmga_quantile(q, &p).unwrap();
            let back = glmga_cdf(y, &p).unwrap();
            assert!((back - q).abs() / q < 1e-8, "q={q} back={back}");
        }
        assert!(glmga_quantile(0.0, &p).is_err());
        assert!(glmga_cdf(0.0, &p).is_err());
    }

    #[test]
    fn survival_tail_constant() {
        // (1-F(y))·y^{1/(2σ)} -> 2/((2b)^{1/2} B(a,1/2))
        let p = GlmgaParams::new(0.5, 1.0, 1.0).unwrap();
        let y = 1e8;
        let lhs = (1.0 - glmga_cdf(y, &p).unwrap()) * y.powf(p.tail_index());
        let c = 2.0 / ((2.0 * p.b).sqrt() * specfun::ln_beta(p.a, 0.5).exp());
        assert!((lhs - c).abs() < 1e-4 * c);
    }

    #[test]
    fn regular_variation_at_zero() {
        let p = GlmgaParams::new(0.5, 1.0, 1.0).unwrap();
        let t = 1e-8;
        let ratio = glmga_cdf(2.0 * t, &p).unwrap() / glmga_cdf(t, &p).unwrap();
        assert_abs_diff_eq!(ratio, 2.0_f64.powf(p.a / p.sigma), epsilon = 1e-4);
    }

    #[test]
    fn moments_match_monte_carlo() {
        let p = GlmgaParams::new(0.1, 2.0, 1.0).unwrap();
        let (mean, var) = glmga_mean_var(&p).unwrap();
        // gamma-mixture sampling oracle
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let n = 1_000_000;
        let shape = p.a;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            // Gamma(a, rate b) via Marsaglia-Tsang on statrs
            let g: f64 = rng.sample(
                statrs::distribution::Gamma::new(shape, p.b).unwrap(),
            );
            let u: f64 = rng.gen_range(1e-16..1.0 - 1e-16);
            let y = glogm_quantile(u, &GlogmParams::new(g, p.sigma).unwrap()).unwrap();
            sum += y;
            sumsq += y * y;
        }
        let mc_mean = sum / n as f64;
        let mc_var = sumsq / n as f64 - mc_mean * mc_mean;
        let se_mean = (var / n as f64).sqrt();
        assert!(
            (mc_mean - mean).abs() < 3.0 * se_mean,
            "mc {mc_mean} vs closed {mean} (se {se_mean})"
        );
        assert!((mc_var - var).abs() / var < 0.05);
    }

    #[test]
    fn moment_domain_errors() {
        let p = GlmgaParams::new(0.3, 1.0, 1.0).unwrap();
        assert!(matches!(
            glmga_mean_var(&p),
            Err(Error::MomentUndefined(_))
        ));
        let p = GlmgaParams::new(0.6, 1.0, 1.0).unwrap();
        assert!(matches!(glmga_mean(&p), Err(Error::MomentUndefined(_))));
        // sigma -> 0 limit: mean -> 1
        let p = GlmgaParams::new(1e-9, 1.3, 0.5).unwrap();
        assert_abs_diff_eq!(glmga_mean(&p).unwrap(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn fit_recovers_simulated_parameters() {
        let truth = GlmgaParams::new(0.5, 1.0, 2.0).unwrap();
        let data = glmga_sample(&truth, 100_000, 4242).unwrap();
        let fit = glmga_fit(&data).unwrap();
        for (est, (tr, se)) in [fit.params.sigma, fit.params.a, fit.params.b]
            .iter()
            .zip([(truth.sigma, fit.se[0]), (truth.a, fit.se[1]), (truth.b, fit.se[2])])
        {
            assert!(
                (est - tr).abs() < 3.0 * se,
                "estimate {est} vs truth {tr} (se {se})"
            );
        }
        assert_abs_diff_eq!(fit.aic, -2.0 * fit.loglik + 6.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            fit.bic,
            -2.0 * fit.loglik + 3.0 * (data.len() as f64).ln(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn fit_input_validation() {
        assert!(glmga_fit(&[1.0; 5]).is_err());
        let mut data = vec![1.0; 20];
        data[3] = -2.0;
        assert!(glmga_fit(&data).is_err());
    }

    #[test]
    fn glogm_cdf_boundary_and_normalization() {
        let p = GlogmParams::new(1.5, 0.5).unwrap();
        assert!(glogm_cdf(1e30, &p).unwrap() > 1.0 - 1e-6);
        let gl = GaussLegendre::new(32);
        let mut acc = 0.0;
        let lo = glogm_quantile(1e-10, &p).unwrap().ln();
        let hi = glogm_quantile(1.0 - 1e-10, &p).unwrap().ln();
        for k in 0..200 {
            let a = lo + (hi - lo) * k as f64 / 200.0;
            let b = lo + (hi - lo) * (k + 1) as f64 / 200.0;
            acc += gl.integrate(a, b, |s| glogm_pdf(s.exp(), &p).unwrap() * s.exp());
        }
        assert_abs_diff_eq!(acc, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn gamma_mixture_identity() {
        // ∫ glogm_pdf(y | θ, σ) gamma(θ; a, rate b) dθ = glmga_pdf(y; σ, a, b)
        let (s, a, b) = (0.5, 1.0, 1.0);
        let measure = GammaMeasure::new(a, 32).unwrap();
        for &y in &[0.5, 1.0, 2.0] {
            // θ ~ Gamma(a, rate b) means θ = φ/b with φ ~ Gamma(a,1)
            let mix = measure.expect(|phi| {
                glogm_pdf(y, &GlogmParams::new(phi / b, s).unwrap()).unwrap()
            });
            let direct = glmga_pdf(y, &GlmgaParams::new(s, a, b).unwrap()).unwrap();
            assert!((mix - direct).abs() / direct < 1e-6, "y={y}: {mix} vs {direct}");
        }
    }

    #[test]
    fn tail_index_slope_on_simulated_data() {
        // log-survival regression slope ≈ -1/(2σ)
        let p = GlmgaParams::new(0.5, 1.0, 1.0).unwrap();
        let mut data = glmga_sample(&p, 1_000_000, 7).unwrap();
        data.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = data.len();
        // regression of log(1-F_n) on log(y) over the top 1% tail
        let top = n / 100;
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..top {
            let idx = n - top + i;
            let x = data[idx].ln();
            let yv = ((n - idx) as f64 / n as f64).ln();
            sx += x;
            sy += yv;
            sxx += x * x;
            sxy += x * yv;
        }
        let m = top as f64;
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let target = -p.tail_index();
        assert!(
            ((slope - target) / target).abs() < 0.10,
            "slope {slope} vs {target}"
        );
    }
}
