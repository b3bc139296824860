//! Marginal modelling: pseudo-observation transforms (ranks and kernel
//! smoothing), the spliced truncated-count + generalized-Pareto margin for
//! semi-continuous data, randomized quantile residuals, and bootstrap
//! goodness-of-fit tests.

use crate::error::{Error, Result};
use crate::glmga::{glmga_cdf, glmga_fit, glmga_sample, GlmgaParams};
use crate::optim::{minimize, numeric_hessian, standard_errors, OptimOptions};
use crate::specfun::normal_quantile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Provenance of a pseudo-observation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PseudoMethod {
    Rank,
    Kernel,
    Parametric,
}

/// n×d matrix with entries strictly inside (0,1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PseudoSample {
    pub values: Vec<Vec<f64>>,
    pub method: PseudoMethod,
}

impl PseudoSample {
    pub fn new(values: Vec<Vec<f64>>, method: PseudoMethod) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("pseudo sample must be non-empty".into()));
        }
        let d = values[0].len();
        for row in &values {
            if row.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: row.len() });
            }
            if row.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return Err(Error::Validation(
                    "pseudo-observations must lie strictly inside (0,1)".into(),
                ));
            }
        }
        Ok(PseudoSample { values, method })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }
}

/// Rank transform u_ij = rank(y_ij)/(n+1), with average ranks on ties.
pub fn rank_pseudo_obs(data: &[Vec<f64>]) -> Result<PseudoSample> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Validation("rank transform needs n >= 2".into()));
    }
    let d = data[0].len();
    let mut out = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| data[a][j].partial_cmp(&data[b][j]).unwrap());
        let mut i = 0;
        while i < n {
            // tie block [i, k)
            let mut k = i + 1;
            while k < n && data[idx[k]][j] == data[idx[i]][j] {
                k += 1;
            }
            let avg_rank = (i + 1 + k) as f64 / 2.0; // mean of ranks i+1..=k
            for &row in &idx[i..k] {
                out[row][j] = avg_rank / (n as f64 + 1.0);
            }
            i = k;
        }
    }
    PseudoSample::new(out, PseudoMethod::Rank)
}

/// Kernel-smoothed cdf estimate evaluated at the observations:
/// û(y) = n⁻¹ Σ_k Φ((y − y_k)/h) with a Gaussian kernel.
pub fn kernel_pseudo_obs(data: &[Vec<f64>], bandwidth: f64) -> Result<PseudoSample> {
    if !(bandwidth > 0.0) {
        return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth}")));
    }
    let n = data.len();
    if n < 2 {
        return Err(Error::Validation("kernel transform needs n >= 2".into()));
    }
    let d = data[0].len();
    let phi = |x: f64| 0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2);
    let mut out = vec![vec![0.0; d]; n];
    for j in 0..d {
        let col: Vec<f64> = data.iter().map(|r| r[j]).collect();
        for i in 0..n {
            let s: f64 = col.iter().map(|&yk| phi((col[i] - yk) / bandwidth)).sum();
            out[i][j] = (s / n as f64).clamp(1e-12, 1.0 - 1e-12);
        }
    }
    PseudoSample::new(out, PseudoMethod::Kernel)
}

// --- truncated count component ----------------------------------------------

/// Variance convention of the NBII count model. The standard form has
/// variance λ + φλ²; the alternative keeps the variance-to-mean ratio 1 + φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NbiiForm {
    #[default]
    MeanPlusPhiMeanSq,
    OnePlusPhi,
}

/// Negative binomial count model with mean λ and dispersion φ,
/// right-truncated and renormalized on {0, …, u}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncNbii {
    pub lambda: f64,
    pub phi: f64,
    pub threshold: u64,
    pub form: NbiiForm,
}

impl TruncNbii {
    pub fn new(lambda: f64, phi: f64, threshold: u64, form: NbiiForm) -> Result<Self> {
        if !(lambda > 0.0 && phi > 0.0) {
            return Err(Error::domain("NBII parameters must be positive".into()));
        }
        Ok(TruncNbii { lambda, phi, threshold, form })
    }

    fn ln_pmf_untrunc(&self, y: u64) -> f64 {
        let lg = statrs::function::gamma::ln_gamma;
        let (r, ln_p, ln_q) = match self.form {
            NbiiForm::MeanPlusPhiMeanSq => {
                let r = 1.0 / self.phi;
                (r, (r / (r + self.lambda)).ln(), (self.lambda / (r + self.lambda)).ln())
            }
            NbiiForm::OnePlusPhi => {
                let r = self.lambda / self.phi;
                (r, -(1.0 + self.phi).ln(), (self.phi / (1.0 + self.phi)).ln())
            }
        };
        let y = y as f64;
        lg(y + r) - lg(r) - lg(y + 1.0) + r * ln_p + y * ln_q
    }

    fn ln_norm(&self) -> f64 {
        let mut acc = f64::NEG_INFINITY;
        for y in 0..=self.threshold {
            let v = self.ln_pmf_untrunc(y);
            acc = if acc > v {
                acc + (v - acc).exp().ln_1p()
            } else {
                v + (acc - v).exp().ln_1p()
            };
        }
        acc
    }

    /// Truncated pmf on {0, …, u}.
    pub fn pmf(&self, y: u64) -> f64 {
        if y > self.threshold {
            return 0.0;
        }
        (self.ln_pmf_untrunc(y) - self.ln_norm()).exp()
    }

    /// Truncated cdf; reaches exactly 1 at the threshold.
    pub fn cdf(&self, y: i64) -> f64 {
        if y < 0 {
            return 0.0;
        }
        let y = (y as u64).min(self.threshold);
        let norm = self.ln_norm();
        (0..=y).map(|k| (self.ln_pmf_untrunc(k) - norm).exp()).sum::<f64>().min(1.0)
    }

    pub fn sample(&self, n: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let probs: Vec<f64> = (0..=self.threshold).map(|y| self.pmf(y)).collect();
        (0..n)
            .map(|_| {
                let v: f64 = rng.gen();
                let mut acc = 0.0;
                for (y, p) in probs.iter().enumerate() {
                    acc += p;
                    if v <= acc {
                        return y as u64;
                    }
                }
                self.threshold
            })
            .collect()
    }
}

// --- generalized Pareto tail --------------------------------------------------

/// Generalized Pareto distribution with fixed location, positive shape ξ and
/// scale β: F(y) = 1 − (1 + ξ(y−μ)/β)^{−1/ξ} for y > μ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenPareto {
    pub location: f64,
    pub shape: f64,
    pub scale: f64,
}

impl GenPareto {
    pub fn new(location: f64, shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && scale > 0.0) {
            return Err(Error::domain("GP shape and scale must be positive".into()));
        }
        Ok(GenPareto { location, shape, scale })
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y <= self.location {
            return 0.0;
        }
        let z = (y - self.location) / self.scale;
        (1.0 + self.shape * z).powf(-1.0 / self.shape - 1.0) / self.scale
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y <= self.location {
            return 0.0;
        }
        let z = (y - self.location) / self.scale;
        1.0 - (1.0 + self.shape * z).powf(-1.0 / self.shape)
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("quantile level must be in (0,1), got {q}")));
        }
        Ok(self.location + self.scale / self.shape * ((1.0 - q).powf(-self.shape) - 1.0))
    }

    /// ML fit with the location held fixed.
    pub fn fit(data: &[f64], location: f64) -> Result<GenPareto> {
        if data.len() < 5 {
            return Err(Error::Validation("GP fit needs at least 5 exceedances".into()));
        }
        if data.iter().any(|&y| y <= location) {
            return Err(Error::domain("all observations must exceed the location".into()));
        }
        let nll = |lp: &[f64]| -> f64 {
            let (scale, shape) = (lp[0].exp(), lp[1].exp());
            let gp = GenPareto { location, shape, scale };
            let mut acc = 0.0;
            for &y in data {
                let v = gp.pdf(y);
                if !(v > 0.0) || !v.is_finite() {
                    return f64::INFINITY;
                }
                acc -= v.ln();
            }
            acc
        };
        let mean_exc = data.iter().map(|y| y - location).sum::<f64>() / data.len() as f64;
        let res = minimize(
            nll,
            None::<fn(&[f64]) -> Vec<f64>>,
            &[mean_exc.max(1e-6).ln(), 0.0],
            &OptimOptions::default(),
        )?;
        GenPareto::new(location, res.x[1].exp(), res.x[0].exp())
    }
}

// --- spliced margin -----------------------------------------------------------

/// Two-component spliced margin: truncated count model with weight w below
/// the threshold, generalized Pareto above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplicedMargin {
    pub w: f64,
    pub threshold: u64,
    pub count: TruncNbii,
    pub tail: GenPareto,
}

/// Fit report for [`spliced_fit`]: parameters with the count-component
/// standard errors from the observed information.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplicedFit {
    pub margin: SplicedMargin,
    pub se_lambda: f64,
    pub se_phi: f64,
    pub count_loglik: f64,
    pub tail_loglik: f64,
}

impl SplicedMargin {
    pub fn new(w: f64, threshold: u64, count: TruncNbii, tail: GenPareto) -> Result<Self> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::domain(format!("weight must be in (0,1), got {w}")));
        }
        Ok(SplicedMargin { w, threshold, count, tail })
    }

    /// Density/mass: w·f_count(y) for integer y ≤ u, (1−w)·f_GP(y) above.
    pub fn pdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        if y <= self.threshold as f64 {
            self.w * self.count.pmf(y.round() as u64)
        } else {
            (1.0 - self.w) * self.tail.pdf(y)
        }
    }

    /// Distribution function; equals w exactly at the threshold.
    pub fn cdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        if y <= self.threshold as f64 {
            self.w * self.count.cdf(y.floor() as i64)
        } else {
            self.w + (1.0 - self.w) * self.tail.cdf(y)
        }
    }

    /// Generalized inverse of the spliced cdf: the count part inverts the
    /// jump structure, the tail maps through the GP quantile.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("quantile level must be in (0,1), got {q}")));
        }
        if q <= self.w {
            let target = q / self.w;
            for y in 0..=self.threshold {
                if self.count.cdf(y as i64) >= target - 1e-15 {
                    return Ok(y as f64);
                }
            }
            Ok(self.threshold as f64)
        } else {
            self.tail.quantile((q - self.w) / (1.0 - self.w))
        }
    }

    /// Sample, mixing the two components with weight w.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let counts = self.count.sample(n, seed ^ 0x9e37_79b9_7f4a_7c15);
        (0..n)
            .map(|i| {
                if rng.gen::<f64>() < self.w {
                    counts[i] as f64
                } else {
                    let q: f64 = rng.gen_range(1e-12..1.0 - 1e-12);
                    self.tail.quantile(q).unwrap()
                }
            })
            .collect()
    }
}

/// Fit the spliced margin: w from the exceedance count, ML for the truncated
/// count component below u, GP ML above u with location fixed at u.
pub fn spliced_fit(data: &[f64], threshold: u64, form: NbiiForm) -> Result<SplicedFit> {
    let u = threshold as f64;
    let below: Vec<u64> = data
        .iter()
        .filter(|&&y| y <= u)
        .map(|&y| y.round().max(0.0) as u64)
        .collect();
    let above: Vec<f64> = data.iter().copied().filter(|&y| y > u).collect();
    if below.is_empty() {
        return Err(Error::EmptyComponent("no observations at or below the threshold".into()));
    }
    if above.len() < 5 {
        return Err(Error::EmptyComponent("too few exceedances above the threshold".into()));
    }
    let n = data.len() as f64;
    let n_c = above.len() as f64;
    let w = (n - n_c) / n;
    // truncated count ML
    let nll = |lp: &[f64]| -> f64 {
        let (lambda, phi) = (lp[0].exp(), lp[1].exp());
        match TruncNbii::new(lambda, phi, threshold, form) {
            Ok(m) => {
                let norm = m.ln_norm();
                let mut acc = 0.0;
                for &y in &below {
                    acc -= m.ln_pmf_untrunc(y) - norm;
                }
                if acc.is_finite() {
                    acc
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    };
    let mean0 = (below.iter().sum::<u64>() as f64 / below.len() as f64).max(0.5);
    let res = minimize(
        nll,
        None::<fn(&[f64]) -> Vec<f64>>,
        &[mean0.ln(), 0.0],
        &OptimOptions::default(),
    )?;
    let count = TruncNbii::new(res.x[0].exp(), res.x[1].exp(), threshold, form)?;
    let nat = |q: &[f64]| -> f64 {
        if q.iter().any(|v| !(*v > 0.0)) {
            return f64::INFINITY;
        }
        nll(&[q[0].ln(), q[1].ln()])
    };
    let hess = numeric_hessian(&nat, &[count.lambda, count.phi]);
    let se = standard_errors(&hess).unwrap_or(vec![f64::NAN; 2]);
    let tail = GenPareto::fit(&above, u)?;
    let tail_ll: f64 = above.iter().map(|&y| tail.pdf(y).ln()).sum();
    let margin = SplicedMargin::new(w, threshold, count, tail)?;
    Ok(SplicedFit {
        margin,
        se_lambda: se[0],
        se_phi: se[1],
        count_loglik: -res.f,
        tail_loglik: tail_ll,
    })
}

/// Randomized normal quantile residuals of a fitted spliced margin. Returns
/// (discrete-part residuals, continuous-part residuals). The discrete part is
/// randomized uniformly over the cdf jump [F(y−1), F(y)].
pub fn quantile_residuals(
    data: &[f64],
    m: &SplicedMargin,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut disc = Vec::new();
    let mut cont = Vec::new();
    for &y in data {
        if y <= m.threshold as f64 {
            let yi = y.round() as i64;
            let lo = m.cdf(yi as f64 - 1.0);
            let hi = m.cdf(yi as f64);
            let v: f64 = rng.gen_range(lo..hi.max(lo + 1e-300));
            disc.push(normal_quantile(v.clamp(1e-12, 1.0 - 1e-12))?);
        } else {
            let v = m.cdf(y);
            cont.push(normal_quantile(v.clamp(1e-12, 1.0 - 1e-12))?);
        }
    }
    Ok((disc, cont))
}

// --- goodness of fit ----------------------------------------------------------

/// A fitted continuous model that can be tested and re-simulated.
pub trait GofModel: Sync {
    fn cdf(&self, y: f64) -> f64;
    fn sample(&self, n: usize, seed: u64) -> Vec<f64>;
}

/// GLMGA as a goodness-of-fit target.
pub struct GlmgaGof(pub GlmgaParams);

impl GofModel for GlmgaGof {
    fn cdf(&self, y: f64) -> f64 {
        glmga_cdf(y, &self.0).unwrap_or(0.0)
    }
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        glmga_sample(&self.0, n, seed).unwrap_or_default()
    }
}

impl GofModel for GlmgaParams {
    fn cdf(&self, y: f64) -> f64 {
        glmga_cdf(y, self).unwrap_or(0.0)
    }
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        glmga_sample(self, n, seed).unwrap_or_default()
    }
}

impl GofModel for GlmgaFitModel {
    fn cdf(&self, y: f64) -> f64 {
        glmga_cdf(y, &self.0).unwrap_or(0.0)
    }
    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        glmga_sample(&self.0, n, seed).unwrap_or_default()
    }
}

/// Newtype for the refitted model used inside the bootstrap.
pub struct GlmgaFitModel(pub GlmgaParams);

/// KS, Cramér–von Mises, and Anderson–Darling statistics of `cdf` on data.
pub fn gof_statistics<C: Fn(f64) -> f64>(data: &[f64], cdf: C) -> (f64, f64, f64) {
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let nf = n as f64;
    let f: Vec<f64> = sorted.iter().map(|&y| cdf(y).clamp(1e-15, 1.0 - 1e-15)).collect();
    let mut ks = 0.0_f64;
    let mut cvm = 1.0 / (12.0 * nf);
    let mut ad = -nf;
    for i in 0..n {
        let hi = (i + 1) as f64 / nf;
        let lo = i as f64 / nf;
        ks = ks.max((f[i] - hi).abs()).max((f[i] - lo).abs());
        let mid = (2.0 * (i + 1) as f64 - 1.0) / (2.0 * nf);
        cvm += (f[i] - mid).powi(2);
        ad -= (2.0 * (i + 1) as f64 - 1.0) / nf * (f[i].ln() + (1.0 - f[n - 1 - i]).ln());
    }
    (ks, cvm, ad)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GofReport {
    pub ks: f64,
    pub cvm: f64,
    pub ad: f64,
    pub p_ks: f64,
    pub p_cvm: f64,
    pub p_ad: f64,
    pub n_boot: usize,
    pub refit_failures: usize,
}

/// Parametric-bootstrap goodness-of-fit: the model is refit on each simulated
/// sample and the statistics recomputed; p = (1 + #{boot ≥ observed})/(n_boot+1).
/// Aborts when more than 10% of the refits fail.
pub fn gof_tests<M, F>(data: &[f64], fit: F, n_boot: usize, seed: u64) -> Result<GofReport>
where
    M: GofModel,
    F: Fn(&[f64]) -> Result<M> + Sync,
{
    if data.len() < 10 {
        return Err(Error::Validation("gof needs n >= 10".into()));
    }
    if n_boot < 99 {
        return Err(Error::Validation("gof needs n_boot >= 99".into()));
    }
    let fitted = fit(data)?;
    let (ks, cvm, ad) = gof_statistics(data, |y| fitted.cdf(y));
    let n = data.len();
    let boot: Vec<Option<(f64, f64, f64)>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let sim = fitted.sample(n, seed.wrapping_add(1 + b as u64));
            match fit(&sim) {
                Ok(refit) => Some(gof_statistics(&sim, |y| refit.cdf(y))),
                Err(_) => None,
            }
        })
        .collect();
    let failures = boot.iter().filter(|b| b.is_none()).count();
    if failures * 10 > n_boot {
        return Err(Error::RefitFailures { failed: failures, total: n_boot });
    }
    let ok: Vec<(f64, f64, f64)> = boot.into_iter().flatten().collect();
    let m = ok.len() as f64;
    let p = |obs: f64, pick: fn(&(f64, f64, f64)) -> f64| {
        (1.0 + ok.iter().filter(|b| pick(b) >= obs).count() as f64) / (m + 1.0)
    };
    Ok(GofReport {
        ks,
        cvm,
        ad,
        p_ks: p(ks, |b| b.0),
        p_cvm: p(cvm, |b| b.1),
        p_ad: p(ad, |b| b.2),
        n_boot,
        refit_failures: failures,
    })
}

/// Bootstrap-refit adapter for the GLMGA margin.
pub fn glmga_gof(data: &[f64], n_boot: usize, seed: u64) -> Result<GofReport> {
    gof_tests(
        data,
        |d| glmga_fit(d).map(|f| GlmgaFitModel(f.params)),
        n_boot,
        seed,
    )
}
