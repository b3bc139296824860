//! Model-comparison diagnostics: empirical copula, region fit error e_A,
//! tail-weighted dependence measures (empirical and model-based), parametric
//! bootstrap confidence intervals, and the simulation-study harness.

use crate::copula::{CopulaModel, MglCdf, TParts};
use crate::error::{Error, Result};
use crate::margins::{PseudoMethod, PseudoSample};
use crate::quad::{GammaMeasure, GaussLegendre};
use crate::regression::{fit_copula_reg, DesignMatrix, RegFamily};
use crate::specfun::erfc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sample Kendall's τ (tau-b) by Knight's O(n log n) algorithm.
pub fn sample_kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return Err(Error::Validation("kendall tau needs two equal vectors, n >= 2".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b]).unwrap().then(y[a].partial_cmp(&y[b]).unwrap())
    });
    let n0 = n as f64 * (n as f64 - 1.0) / 2.0;
    // tie counts in x and joint ties
    let mut n1 = 0.0;
    let mut n3 = 0.0;
    {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && x[idx[j]] == x[idx[i]] {
                j += 1;
            }
            let t = (j - i) as f64;
            n1 += t * (t - 1.0) / 2.0;
            // joint ties within the x block
            let mut a = i;
            while a < j {
                let mut b = a + 1;
                while b < j && y[idx[b]] == y[idx[a]] {
                    b += 1;
                }
                let tt = (b - a) as f64;
                n3 += tt * (tt - 1.0) / 2.0;
                a = b;
            }
            i = j;
        }
    }
    // swaps = inversions of the y-sequence (merge sort count)
    let mut seq: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = count_inversions(&mut seq, &mut buf, 0, n);
    // tie count in y
    let mut ys = y.to_vec();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut n2 = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        n2 += t * (t - 1.0) / 2.0;
        i = j;
    }
    let denom = ((n0 - n1) * (n0 - n2)).sqrt();
    if denom == 0.0 {
        return Err(Error::Validation("degenerate (constant) input to kendall tau".into()));
    }
    Ok((n0 - n1 - n2 + n3 - 2.0 * swaps as f64) / denom)
}

fn count_inversions(seq: &mut [f64], buf: &mut [f64], lo: usize, hi: usize) -> u64 {
    if hi - lo < 2 {
        return 0;
    }
    let mid = (lo + hi) / 2;
    let mut inv = count_inversions(seq, buf, lo, mid) + count_inversions(seq, buf, mid, hi);
    let (mut i, mut j, mut k) = (lo, mid, lo);
    while i < mid && j < hi {
        if seq[j] < seq[i] {
            inv += (mid - i) as u64;
            buf[k] = seq[j];
            j += 1;
        } else {
            buf[k] = seq[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + (mid - i)].copy_from_slice(&seq[i..mid]);
    buf[k + (mid - i)..hi].copy_from_slice(&seq[j..hi]);
    seq[lo..hi].copy_from_slice(&buf[lo..hi]);
    inv
}

/// Empirical copula C^emp(t) = n⁻¹ Σ_i ∏_j 1{u_ij < t_j} (strict inequality,
/// so t_j = 1 counts every point).
pub fn empirical_copula(pseudo: &PseudoSample, t: &[f64]) -> Result<f64> {
    if t.len() != pseudo.dim() {
        return Err(Error::DimensionMismatch { expected: pseudo.dim(), got: t.len() });
    }
    if t.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::domain("empirical copula arguments must be in [0,1]".into()));
    }
    let count = pseudo
        .values
        .iter()
        .filter(|row| row.iter().zip(t).all(|(u, tv)| u < tv || *tv >= 1.0))
        .count();
    Ok(count as f64 / pseudo.n() as f64)
}

/// Rectangular region A = [a1,b1]×[a2,b2] inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Region {
    pub fn square(lo: f64, hi: f64) -> Self {
        Region { a1: lo, b1: hi, a2: lo, b2: hi }
    }
}

/// Root-mean-square fit error between a copula cdf and the empirical copula
/// over a midpoint tensor grid on the region (default 50×50), i.e. the
/// Lebesgue-normalized L² distance.
pub fn fit_error_ea<F>(
    pseudo: &PseudoSample,
    copula_cdf: F,
    region: &Region,
    grid: usize,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    if !(region.a1 < region.b1 && region.a2 < region.b2) {
        return Err(Error::Validation("empty region".into()));
    }
    if !(region.a1 >= 0.0 && region.b1 <= 1.0 && region.a2 >= 0.0 && region.b2 <= 1.0) {
        return Err(Error::Validation("region must lie inside the unit square".into()));
    }
    if grid == 0 {
        return Err(Error::Validation("grid must be positive".into()));
    }
    let mut acc = 0.0;
    for i in 0..grid {
        let t1 = region.a1 + (region.b1 - region.a1) * (i as f64 + 0.5) / grid as f64;
        for j in 0..grid {
            let t2 = region.a2 + (region.b2 - region.a2) * (j as f64 + 0.5) / grid as f64;
            let c = copula_cdf(t1, t2)?;
            let ce = empirical_copula(pseudo, &[t1, t2])?;
            acc += (c - ce).powi(2);
        }
    }
    Ok((acc / (grid * grid) as f64).sqrt())
}

/// Weight configuration of the tail-weighted dependence measures:
/// a(u) = u^k with truncation level p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailWeightConfig {
    pub k: u32,
    pub p: f64,
}

impl Default for TailWeightConfig {
    fn default() -> Self {
        TailWeightConfig { k: 6, p: 0.5 }
    }
}

/// Empirical upper-tail weighted dependence ϱ_U(a, p): the weighted
/// conditional correlation of a(1−(1−R_j)/p) over the joint tail region
/// {1−R_1 < p, 1−R_2 < p}.
pub fn tw_dep_empirical(pseudo: &PseudoSample, cfg: &TailWeightConfig) -> Result<f64> {
    if pseudo.dim() != 2 {
        return Err(Error::DimensionLimit { limit: 2, got: pseudo.dim() });
    }
    let p = cfg.p;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("truncation level must be in (0,1), got {p}")));
    }
    let a = |v: f64| v.powi(cfg.k as i32);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in &pseudo.values {
        if 1.0 - row[0] < p && 1.0 - row[1] < p {
            xs.push(a(1.0 - (1.0 - row[0]) / p));
            ys.push(a(1.0 - (1.0 - row[1]) / p));
        }
    }
    if xs.len() < 30 {
        return Err(Error::InsufficientTailData { needed: 30, found: xs.len() });
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (xv, yv) in xs.iter().zip(&ys) {
        sxx += (xv - mx).powi(2);
        syy += (yv - my).powi(2);
        sxy += (xv - mx) * (yv - my);
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// The reflected (survival) cdf of a fitted data copula, which is what the
/// upper-tail m-integrals are taken over. For a fitted survival-MGL model the
/// reflection is the plain MGL copula cdf, evaluated on a shared gamma
/// measure for the whole grid.
struct ReflectedCdf<'a> {
    model: &'a CopulaModel,
    mgl_fast: Option<(GammaMeasure, GammaMeasure, f64)>, // coarse, fine, a
}

impl<'a> ReflectedCdf<'a> {
    fn new(model: &'a CopulaModel) -> Result<Self> {
        let mgl_fast = match model {
            CopulaModel::SurvMgl { delta } => {
                let a = 1.0 / delta;
                Some((GammaMeasure::new(a, 16)?, GammaMeasure::new(a, 32)?, a))
            }
            _ => None,
        };
        Ok(ReflectedCdf { model, mgl_fast })
    }

    fn eval(&self, u1: f64, u2: f64) -> Result<f64> {
        match (&self.mgl_fast, self.model) {
            (Some((coarse, fine, a)), _) => {
                // reflection of survival MGL is the MGL copula itself
                let t1 = TParts::at(u1, *a)?.t;
                let t2 = TParts::at(u2, *a)?.t;
                if !t1.is_finite() || !t2.is_finite() {
                    return Ok(0.0);
                }
                let f = |th: f64| erfc((t1 * th).sqrt()) * erfc((t2 * th).sqrt());
                let v1 = coarse.expect(f);
                let v2 = fine.expect(f);
                if (v1 - v2).abs() > 1e-8 {
                    return Err(Error::QuadratureNonconvergence((v1 - v2).abs()));
                }
                Ok(v2)
            }
            (None, model) => {
                // generic reflection: u1 + u2 - 1 + C(1-u1, 1-u2)
                Ok((u1 + u2 - 1.0 + model.cdf(&[1.0 - u1, 1.0 - u2])?).clamp(0.0, 1.0))
            }
        }
    }
}

/// Model-based upper-tail weighted dependence ρ_U(a, p; C) via the m-integral
/// representation, with a'(u) = k·u^{k−1} analytic and Gauss–Legendre
/// quadrature (tensor rule for m₁₂).
pub fn tw_dep_model(model: &CopulaModel, cfg: &TailWeightConfig) -> Result<f64> {
    let p = cfg.p;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("truncation level must be in (0,1), got {p}")));
    }
    let refl = ReflectedCdf::new(model)?;
    let k = cfg.k as f64;
    let a = |v: f64| v.powf(k);
    let ap = |v: f64| k * v.powf(k - 1.0);
    let gl = GaussLegendre::new(64);
    let nodes = gl.scaled(0.0, p);
    let m = nodes.len();
    let us: Vec<f64> = nodes.iter().map(|v| v.0).collect();
    let ws: Vec<f64> = nodes.iter().map(|v| v.1).collect();
    // C(u_i, p) and C(p, u_j); exchangeable families give the same values,
    // but evaluate both sides anyway
    let mut c_up = vec![0.0; m];
    let mut c_pu = vec![0.0; m];
    for i in 0..m {
        c_up[i] = refl.eval(us[i], p)?;
        c_pu[i] = refl.eval(p, us[i])?;
    }
    let cpp = refl.eval(p, p)?;
    let g: Vec<f64> = us.iter().map(|&u| ap(1.0 - u / p)).collect();
    let m1 = (0..m).map(|i| ws[i] * g[i] * c_up[i]).sum::<f64>() / p;
    let m2 = (0..m).map(|i| ws[i] * g[i] * c_pu[i]).sum::<f64>() / p;
    let m11 = (0..m)
        .map(|i| ws[i] * 2.0 * a(1.0 - us[i] / p) * g[i] * c_up[i])
        .sum::<f64>()
        / p;
    let m22 = (0..m)
        .map(|i| ws[i] * 2.0 * a(1.0 - us[i] / p) * g[i] * c_pu[i])
        .sum::<f64>()
        / p;
    let mut m12 = 0.0;
    for i in 0..m {
        for j in 0..m {
            m12 += ws[i] * ws[j] * g[i] * g[j] * refl.eval(us[i], us[j])?;
        }
    }
    m12 /= p * p;
    let denom = ((cpp * m11 - m1 * m1) * (cpp * m22 - m2 * m2)).sqrt();
    Ok((cpp * m12 - m1 * m2) / denom)
}

/// Percentile parametric-bootstrap confidence interval: simulate from the
/// fitted copula, refit, recompute the statistic. Aborts when more than 10%
/// of the refits fail.
pub fn bootstrap_ci<F, S>(
    fitted: &CopulaModel,
    n: usize,
    refit: F,
    statistic: S,
    n_boot: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64)>
where
    F: Fn(&PseudoSample) -> Result<CopulaModel> + Sync,
    S: Fn(&CopulaModel) -> Result<f64> + Sync,
{
    if n_boot < 100 {
        return Err(Error::Validation("bootstrap needs n_boot >= 100".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Validation(format!("level must be in (0,1), got {level}")));
    }
    let stats: Vec<Option<f64>> = (0..n_boot)
        .into_par_iter()
        .map(|b| {
            let sim = fitted.sample(2, n, seed.wrapping_add(1 + b as u64)).ok()?;
            let ps = PseudoSample::new(sim, PseudoMethod::Parametric).ok()?;
            let model = refit(&ps).ok()?;
            statistic(&model).ok()
        })
        .collect();
    let failed = stats.iter().filter(|s| s.is_none()).count();
    if failed * 10 > n_boot {
        return Err(Error::RefitFailures { failed, total: n_boot });
    }
    let mut ok: Vec<f64> = stats.into_iter().flatten().collect();
    ok.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    let pick = |q: f64| {
        let pos = q * (ok.len() - 1) as f64;
        let i = pos.floor() as usize;
        let frac = pos - i as f64;
        if i + 1 < ok.len() {
            ok[i] * (1.0 - frac) + ok[i + 1] * frac
        } else {
            ok[i]
        }
    };
    Ok((pick(alpha), pick(1.0 - alpha)))
}

// --- simulation study ---------------------------------------------------------

/// Covariate law of a simulation-study scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CovariateLaw {
    /// Intercept plus k standard-normal covariates (k = beta.len() - 1).
    StdNormal,
    /// Intercept plus a time index cycling over 1..=t_max (dynamic scenario).
    TimeGrid { t_max: usize },
}

/// Scenario configuration for [`simstudy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub n_grid: Vec<usize>,
    pub d: usize,
    pub beta: Vec<f64>,
    pub replicates: usize,
    pub covariates: CovariateLaw,
}

/// Per-sample-size aggregate of the replicated fits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimStudyRow {
    pub n: usize,
    pub replicates_ok: usize,
    pub failures: usize,
    pub bias: Vec<f64>,
    pub variance: Vec<f64>,
    pub mse: Vec<f64>,
    pub median_beta: Vec<f64>,
    /// Monte-Carlo standard error of the mean estimate per coefficient.
    pub mc_se: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimStudyReport {
    pub scenario: SimScenario,
    pub seed: u64,
    pub rows: Vec<SimStudyRow>,
}

fn scenario_design(
    scenario: &SimScenario,
    n: usize,
    rng: &mut ChaCha12Rng,
) -> Result<DesignMatrix> {
    let k = scenario.beta.len();
    let mut data = Vec::with_capacity(n * k);
    match &scenario.covariates {
        CovariateLaw::StdNormal => {
            for _ in 0..n {
                data.push(1.0);
                for _ in 1..k {
                    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.gen_range(0.0..1.0);
                    data.push(
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos(),
                    );
                }
            }
        }
        CovariateLaw::TimeGrid { t_max } => {
            if k != 2 {
                return Err(Error::Validation(
                    "time-grid scenario expects beta = (b0, b1)".into(),
                ));
            }
            for i in 0..n {
                data.push(1.0);
                data.push((i % t_max + 1) as f64);
            }
        }
    }
    DesignMatrix::new(data, n, k)
}

/// Replicated copula-regression study: per sample size, simulates data at the
/// true β under the survival-MGL copula, refits, and aggregates bias,
/// variance, and MSE per coefficient (MSE = bias² + variance exactly on the
/// replicate aggregates). Per-replicate failures are logged and excluded.
pub fn simstudy(scenario: &SimScenario, seed: u64) -> Result<SimStudyReport> {
    if scenario.replicates == 0 {
        return Err(Error::Validation("replicate count must be positive".into()));
    }
    if scenario.n_grid.is_empty() {
        return Err(Error::Validation("n grid must be non-empty".into()));
    }
    if scenario.beta.is_empty() {
        return Err(Error::Validation("beta must be non-empty".into()));
    }
    let k = scenario.beta.len();
    let mut rows = Vec::new();
    for (ni, &n) in scenario.n_grid.iter().enumerate() {
        let fits: Vec<Option<Vec<f64>>> = (0..scenario.replicates)
            .into_par_iter()
            .map(|rep| {
                let rep_seed = seed
                    .wrapping_add(1_000_003 * (ni as u64 + 1))
                    .wrapping_add(rep as u64);
                let mut rng = ChaCha12Rng::seed_from_u64(rep_seed);
                let x = scenario_design(scenario, n, &mut rng).ok()?;
                let mut raw = Vec::with_capacity(n);
                for i in 0..n {
                    let eta: f64 = x
                        .row(i)
                        .iter()
                        .zip(&scenario.beta)
                        .map(|(a, b)| a * b)
                        .sum();
                    let delta = eta.clamp(-30.0, 30.0).exp();
                    let row = crate::copula::sample_surv_mgl_copula(
                        delta,
                        scenario.d,
                        1,
                        rep_seed ^ (0x5851_f42d_4c95_7f2d_u64.wrapping_mul(i as u64 + 1)),
                    )
                    .ok()?
                    .remove(0);
                    raw.push(row);
                }
                let pseudo = PseudoSample::new(raw, PseudoMethod::Parametric).ok()?;
                fit_copula_reg(&pseudo, &x, RegFamily::SurvMgl, None)
                    .ok()
                    .map(|f| f.beta)
            })
            .collect();
        let ok: Vec<&Vec<f64>> = fits.iter().flatten().collect();
        let failures = scenario.replicates - ok.len();
        if ok.is_empty() {
            return Err(Error::RefitFailures { failed: failures, total: scenario.replicates });
        }
        let r = ok.len() as f64;
        let mut bias = vec![0.0; k];
        let mut variance = vec![0.0; k];
        let mut mse = vec![0.0; k];
        let mut median_beta = vec![0.0; k];
        let mut mc_se = vec![0.0; k];
        for h in 0..k {
            let vals: Vec<f64> = ok.iter().map(|b| b[h]).collect();
            let mean = vals.iter().sum::<f64>() / r;
            bias[h] = mean - scenario.beta[h];
            variance[h] = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / r;
            mse[h] = vals.iter().map(|v| (v - scenario.beta[h]).powi(2)).sum::<f64>() / r;
            let mut sorted = vals.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            median_beta[h] = sorted[sorted.len() / 2];
            mc_se[h] = (variance[h] / r).sqrt();
        }
        rows.push(SimStudyRow {
            n,
            replicates_ok: ok.len(),
            failures,
            bias,
            variance,
            mse,
            median_beta,
            mc_se,
        });
    }
    Ok(SimStudyReport { scenario: scenario.clone(), seed, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn brute_tau(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut conc, mut disc, mut tx, mut ty) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let a = (x[i] - x[j]) * (y[i] - y[j]);
                if x[i] == x[j] && y[i] == y[j] {
                    tx += 1.0;
                    ty += 1.0;
                } else if x[i] == x[j] {
                    tx += 1.0;
                } else if y[i] == y[j] {
                    ty += 1.0;
                } else if a > 0.0 {
                    conc += 1.0;
                } else {
                    disc += 1.0;
                }
            }
        }
        let n0 = n as f64 * (n as f64 - 1.0) / 2.0;
        (conc - disc) / ((n0 - tx) * (n0 - ty)).sqrt()
    }

    #[test]
    fn kendall_tau_matches_brute_force() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let x: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..1.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| v * 0.5 + rng.gen_range(0.0..0.5))
            .collect();
        assert_abs_diff_eq!(
            sample_kendall_tau(&x, &y).unwrap(),
            brute_tau(&x, &y),
            epsilon = 1e-12
        );
        // with ties
        let xt: Vec<f64> = (0..100).map(|i| (i % 7) as f64).collect();
        let yt: Vec<f64> = (0..100).map(|i| ((i * 3) % 11) as f64).collect();
        assert_abs_diff_eq!(
            sample_kendall_tau(&xt, &yt).unwrap(),
            brute_tau(&xt, &yt),
            epsilon = 1e-12
        );
        assert!(sample_kendall_tau(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }

    fn uniform_pseudo(n: usize, seed: u64) -> PseudoSample {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        PseudoSample::new(
            (0..n)
                .map(|_| vec![rng.gen_range(1e-9..1.0), rng.gen_range(1e-9..1.0)])
                .collect(),
            PseudoMethod::Parametric,
        )
        .unwrap()
    }

    #[test]
    fn empirical_copula_boundaries_and_independence() {
        let ps = uniform_pseudo(100_000, 17);
        assert_eq!(empirical_copula(&ps, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(empirical_copula(&ps, &[0.0, 0.5]).unwrap(), 0.0);
        let v = empirical_copula(&ps, &[0.5, 0.5]).unwrap();
        assert!((v - 0.25).abs() < 0.01, "C_emp(0.5,0.5) = {v}");
        assert!(empirical_copula(&ps, &[0.5]).is_err());
        assert!(empirical_copula(&ps, &[0.5, 1.2]).is_err());
    }

    #[test]
    fn fit_error_perfect_model_and_grid_stability() {
        let ps = uniform_pseudo(5_000, 23);
        let region = Region::square(0.2, 0.8);
        // the empirical copula against itself is exactly zero
        let e0 = fit_error_ea(
            &ps,
            |t1, t2| empirical_copula(&ps, &[t1, t2]),
            &region,
            50,
        )
        .unwrap();
        assert_eq!(e0, 0.0);
        // smooth model: doubling the grid moves the value by < 5%
        let e1 = fit_error_ea(&ps, |t1, t2| Ok(t1 * t2), &region, 50).unwrap();
        let e2 = fit_error_ea(&ps, |t1, t2| Ok(t1 * t2), &region, 100).unwrap();
        assert!((e1 - e2).abs() / e1 < 0.05, "{e1} vs {e2}");
        assert!(fit_error_ea(&ps, |t1, t2| Ok(t1 * t2), &Region::square(0.5, 0.5), 10).is_err());
    }

    #[test]
    fn tw_dep_model_reproduces_published_row() {
        // frozen against the independent quadrature oracle; matches the
        // published Danish survival-MGL row at delta = 0.892
        let model = CopulaModel::SurvMgl { delta: 0.892 };
        let vals: Vec<f64> = [5_u32, 6, 7]
            .iter()
            .map(|&k| tw_dep_model(&model, &TailWeightConfig { k, p: 0.5 }).unwrap())
            .collect();
        assert_abs_diff_eq!(vals[0], 0.420, epsilon = 3e-3);
        assert_abs_diff_eq!(vals[1], 0.429, epsilon = 3e-3);
        assert_abs_diff_eq!(vals[2], 0.436, epsilon = 3e-3);
        // near-independence vanishes
        let v0 = tw_dep_model(
            &CopulaModel::SurvMgl { delta: 1e-4 },
            &TailWeightConfig::default(),
        )
        .unwrap();
        assert!(v0.abs() < 1e-3, "near-independence rho_U = {v0}");
        // the Gumbel row through the generic reflection path
        let vg = tw_dep_model(
            &CopulaModel::Gumbel { delta: 1.211 },
            &TailWeightConfig::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(vg, 0.324, epsilon = 5e-3);
    }

    #[test]
    fn tw_dep_empirical_matches_model_on_simulated_data() {
        let delta = 0.892;
        let raw = crate::copula::sample_surv_mgl_copula(delta, 2, 100_000, 55).unwrap();
        let ps = PseudoSample::new(raw, PseudoMethod::Parametric).unwrap();
        let emp = tw_dep_empirical(&ps, &TailWeightConfig::default()).unwrap();
        let model =
            tw_dep_model(&CopulaModel::SurvMgl { delta }, &TailWeightConfig::default()).unwrap();
        assert!((emp - model).abs() < 0.03, "empirical {emp} vs model {model}");
        // insufficient tail data
        let small = uniform_pseudo(20, 3);
        assert!(matches!(
            tw_dep_empirical(&small, &TailWeightConfig::default()),
            Err(Error::InsufficientTailData { .. })
        ));
    }

    #[test]
    fn bootstrap_ci_contains_point_and_degenerate_width() {
        let fitted = CopulaModel::SurvMgl { delta: 0.9 };
        // statistic = fitted delta; refit via intercept-only regression
        let refit = |ps: &PseudoSample| -> Result<CopulaModel> {
            let x = DesignMatrix::intercept_only(ps.n());
            let fit = fit_copula_reg(ps, &x, RegFamily::SurvMgl, None)?;
            Ok(CopulaModel::SurvMgl { delta: fit.fitted_delta[0] })
        };
        let stat = |m: &CopulaModel| -> Result<f64> {
            match m {
                CopulaModel::SurvMgl { delta } => Ok(*delta),
                _ => unreachable!(),
            }
        };
        let (lo, hi) = bootstrap_ci(&fitted, 400, refit, stat, 100, 0.95, 77).unwrap();
        assert!(lo < 0.9 && 0.9 < hi, "CI ({lo}, {hi}) misses 0.9");
        // degenerate statistic gives a zero-width interval
        let (l2, h2) = bootstrap_ci(&fitted, 50, refit, |_| Ok(1.23), 100, 0.95, 78).unwrap();
        assert_eq!(l2, 1.23);
        assert_eq!(h2, 1.23);
    }

    #[test]
    fn simstudy_smoke_and_identity() {
        let scenario = SimScenario {
            n_grid: vec![60, 120],
            d: 2,
            beta: vec![-0.3, 0.4],
            replicates: 8,
            covariates: CovariateLaw::StdNormal,
        };
        let report = simstudy(&scenario, 5).unwrap();
        assert_eq!(report.rows.len(), 2);
        for row in &report.rows {
            for h in 0..2 {
                // MSE = bias^2 + variance exactly on the aggregates
                assert_abs_diff_eq!(
                    row.mse[h],
                    row.bias[h].powi(2) + row.variance[h],
                    epsilon = 1e-12
                );
            }
        }
        // zero replicates rejected
        let bad = SimScenario { replicates: 0, ..scenario };
        assert!(simstudy(&bad, 5).is_err());
    }
}
