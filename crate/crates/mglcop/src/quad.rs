//! Numerical integration: Gauss–Legendre rules and a gamma-weighted
//! expectation built from graded composite panels.
//!
//! The expectation E[f(Θ)] with Θ ~ Gamma(a, 1) drives the copula cdf. Its
//! integrand carries √θ-type behaviour at the origin (from erfc(√(tθ))), so a
//! single global rule converges poorly; dyadic panels toward zero restore
//! spectral accuracy per panel, and a block of uniform panels covers the bulk
//! around θ ≈ a when the shape is large.

use crate::error::{Error, Result};
use crate::specfun::log_gamma;

/// Gauss–Legendre rule of given degree on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-based initial guess
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * j as f64 + 1.0) * z * p2 - j as f64 * p3) / (j as f64 + 1.0);
                }
                pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// ∫_lo^hi f(x) dx.
    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        half * acc
    }

    /// Nodes and weights mapped to [lo, hi].
    pub fn scaled(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }
}

/// Discrete approximation of the Gamma(a, 1) measure: nodes θ_k and weights
/// w_k ≥ 0 with Σ w_k ≈ 1, so E[f(Θ)] ≈ Σ w_k f(θ_k).
#[derive(Debug, Clone)]
pub struct GammaMeasure {
    pub shape: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GammaMeasure {
    /// Build the panel set for shape `a` with `deg`-point Gauss–Legendre per
    /// panel. Panels are dyadic from the mass cutoff up to max(1, a/2), then
    /// uniform with width ≈ 2√a across the bulk of the distribution.
    pub fn new(a: f64, deg: usize) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("gamma shape must be positive, got {a}")));
        }
        let lg = log_gamma(a)?;
        let gl = GaussLegendre::new(deg);
        // lower cutoff: mass of (0, eps) below 1e-18 since f is bounded by 1
        // on our integrands; eps^a/(a Γ(a)) <= 1e-18
        let log_eps = ((1e-18_f64).ln() + a.ln() + lg) / a;
        let k_lo = (log_eps / std::f64::consts::LN_2).floor().max(-1020.0) as i32;
        let bulk_lo = a.max(1.0) / 2.0;
        let k_mid = (bulk_lo.log2().ceil() as i32).max(k_lo + 1);
        let mut bounds: Vec<f64> = Vec::new();
        let mut k = k_lo;
        while k <= k_mid {
            bounds.push((k as f64).exp2());
            k += 1;
        }
        // uniform panels over the bulk and upper tail
        let width = (2.0 * a.sqrt()).max(4.0);
        let hi = a + 40.0 * a.sqrt() + 80.0;
        let mut x = *bounds.last().unwrap();
        while x < hi {
            x += width;
            bounds.push(x);
        }
        let mut nodes = Vec::with_capacity(deg * (bounds.len() - 1));
        let mut weights = Vec::with_capacity(deg * (bounds.len() - 1));
        for win in bounds.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                let th = mid + half * x;
                let lw = (a - 1.0) * th.ln() - th - lg;
                let wt = half * w * lw.exp();
                if wt > 0.0 && wt.is_finite() {
                    nodes.push(th);
                    weights.push(wt);
                }
            }
        }
        Ok(GammaMeasure {
            shape: a,
            nodes,
            weights,
        })
    }

    /// E[f(Θ)].
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&th, &w)| w * f(th))
            .sum()
    }
}

/// E[f(Θ)] for Θ ~ Gamma(a,1) with a node-doubling convergence check:
/// the 16- and 32-point-per-panel results must agree within `tol`.
pub fn gamma_expectation<F: Fn(f64) -> f64>(a: f64, tol: f64, f: F) -> Result<f64> {
    let coarse = GammaMeasure::new(a, 16)?;
    let fine = GammaMeasure::new(a, 32)?;
    let v1 = coarse.expect(&f);
    let v2 = fine.expect(&f);
    if (v1 - v2).abs() > tol {
        return Err(Error::QuadratureNonconvergence((v1 - v2).abs()));
    }
    Ok(v2)
}
