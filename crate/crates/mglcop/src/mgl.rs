//! Multivariate GLMGA (MGL) distribution: joint density, moments and
//! correlations, conditional distributions, and the sequential sampling chain.

use crate::error::{Error, Result};
use crate::glmga::{glmga_ln_pdf, glmga_mean, glmga_mean_var, GlmgaParams};
use crate::specfun::{inv_inc_beta_parts_compl, ln_beta, BetaShape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Parameters of the d-dimensional MGL distribution: per-margin σ_j and b_j
/// with one shared gamma shape a. Margin j is GLMGA(σ_j, a, b_j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MglParams {
    pub sigma: Vec<f64>,
    pub a: f64,
    pub b: Vec<f64>,
}

impl MglParams {
    pub fn new(sigma: Vec<f64>, a: f64, b: Vec<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::Validation("dimension must be >= 1".into()));
        }
        if sigma.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: sigma.len(),
                got: b.len(),
            });
        }
        if !(a > 0.0) || sigma.iter().chain(b.iter()).any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::domain("MGL parameters must be positive finite".into()));
        }
        Ok(MglParams { sigma, a, b })
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// Margin j as a univariate GLMGA.
    pub fn margin(&self, j: usize) -> GlmgaParams {
        GlmgaParams {
            sigma: self.sigma[j],
            a: self.a,
            b: self.b[j],
        }
    }
}

/// Log joint density of the MGL distribution.
pub fn mgl_ln_pdf(y: &[f64], p: &MglParams) -> Result<f64> {
    let d = p.dim();
    if y.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: y.len(),
        });
    }
    if let Some(bad) = y.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("components must be positive, got {bad}")));
    }
    let a = p.a;
    let half_d = d as f64 / 2.0;
    let lg = statrs::function::gamma::ln_gamma;
    // Γ(1/2)^d = π^{d/2}
    let mut acc = lg(a + half_d) - lg(a) - d as f64 * 0.5 * std::f64::consts::PI.ln();
    // Σ_j exp(-(1/σ_j)(σ_j ln 2b_j + ln y_j)) + 1, in log space
    let mut ln_terms = Vec::with_capacity(d);
    for j in 0..d {
        let s = p.sigma[j];
        let ln_scaled = s * (2.0 * p.b[j]).ln() + y[j].ln(); // ln((2b_j)^{σ_j} y_j)
        acc -= s.ln() + y[j].ln() + ln_scaled / (2.0 * s);
        ln_terms.push(-ln_scaled / s);
    }
    let lse = ln_terms
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, logaddexp);
    acc -= (a + half_d) * logaddexp(lse, 0.0);
    Ok(acc)
}

/// Joint density of the MGL distribution; reduces to the GLMGA density at d=1.
pub fn mgl_pdf(y: &[f64], p: &MglParams) -> Result<f64> {
    Ok(mgl_ln_pdf(y, p)?.exp())
}

fn logaddexp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if x > y {
        x + (y - x).exp().ln_1p()
    } else {
        y + (x - y).exp().ln_1p()
    }
}

/// Mean vector, covariance matrix, and correlation matrix; requires
/// max_j σ_j < 1/4.
pub fn mgl_moments(p: &MglParams) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let d = p.dim();
    if p.sigma.iter().any(|s| *s >= 0.25) {
        return Err(Error::MomentUndefined(
            "correlations require max sigma_j < 1/4".into(),
        ));
    }
    let a = p.a;
    let means: Vec<f64> = (0..d)
        .map(|j| glmga_mean(&p.margin(j)))
        .collect::<Result<_>>()?;
    let vars: Vec<f64> = (0..d)
        .map(|j| glmga_mean_var(&p.margin(j)).map(|mv| mv.1))
        .collect::<Result<_>>()?;
    let mut cov = vec![vec![0.0; d]; d];
    let mut corr = vec![vec![0.0; d]; d];
    for j in 0..d {
        cov[j][j] = vars[j];
        corr[j][j] = 1.0;
        for k in (j + 1)..d {
            let (sj, sk) = (p.sigma[j], p.sigma[k]);
            let factor = (ln_beta(a + sj + sk, a) - ln_beta(a + sj, a + sk)).exp() - 1.0;
            let c = means[j] * means[k] * factor;
            cov[j][k] = c;
            cov[k][j] = c;
            let r = c / (vars[j] * vars[k]).sqrt();
            corr[j][k] = r;
            corr[k][j] = r;
        }
    }
    Ok((means, cov, corr))
}

/// Condition on a subset of coordinates: the conditional law of the remaining
/// coordinates is MGL with a* = a + r/2 (r observed coordinates) and
/// b*_j = b_j · [1 + Σ_k y_k^{-1/σ_k} / (2 b_k)] over the observed k.
pub fn mgl_conditional(p: &MglParams, observed: &[(usize, f64)]) -> Result<MglParams> {
    let d = p.dim();
    if observed.is_empty() {
        return Ok(p.clone());
    }
    if observed.len() >= d {
        return Err(Error::Validation(
            "observed index set must be a proper subset".into(),
        ));
    }
    let mut seen = vec![false; d];
    let mut shift = 0.0;
    for &(idx, y) in observed {
        if idx >= d {
            return Err(Error::Validation(format!("index {idx} out of range")));
        }
        if seen[idx] {
            return Err(Error::Validation(format!("index {idx} repeated")));
        }
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::domain(format!("observed value must be positive, got {y}")));
        }
        seen[idx] = true;
        shift += (-y.ln() / p.sigma[idx]).exp() / (2.0 * p.b[idx]);
    }
    let factor = 1.0 + shift;
    let mut sigma = Vec::new();
    let mut b = Vec::new();
    for j in 0..d {
        if !seen[j] {
            sigma.push(p.sigma[j]);
            b.push(p.b[j] * factor);
        }
    }
    MglParams::new(sigma, p.a + observed.len() as f64 / 2.0, b)
}

/// Sequential sampling chain: Y_1 from the GLMGA quantile, then each Y_j from
/// its conditional GLMGA with shape a + (j−1)/2 and the accumulated rate
/// update. Deterministic for a given seed.
pub fn mgl_sample(p: &MglParams, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Validation("sample size must be >= 1".into()));
    }
    let d = p.dim();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::with_capacity(d);
        // running 1 + Σ_{k<j} M_k where M_k = Y_k^{-1/σ_k}/(2 b_k)
        let mut s = 0.0;
        for j in 0..d {
            let u: f64 = rng.gen_range(1e-16..1.0 - 1e-16);
            let kj = p.a + j as f64 / 2.0;
            let (w, wc) = inv_inc_beta_parts_compl(u, BetaShape::half(kj)?)?;
            let z = w / wc;
            let m = (1.0 + s) * z;
            s += m;
            // Y_j = (2 b_j M_j)^{-σ_j}
            row.push((-p.sigma[j] * ((2.0 * p.b[j]).ln() + m.ln())).exp());
        }
        out.push(row);
    }
    Ok(out)
}
