//! The extended multivariate von Mises family on the search torus:
//! sampling, fitting to weighted elites under a KL step bound, KL
//! estimation, and concentration measurement.
//!
//! The density on the n-torus is
//!
//! ```text
//! f(θ) ∝ exp( Σ a_i cos θ_i + b_i sin θ_i
//!           + Σ_{i<j} c_ij cos θ_i cos θ_j + d_ij sin θ_i sin θ_j
//!                   + e_ij cos θ_i sin θ_j + g_ij sin θ_i cos θ_j )
//! ```
//!
//! a full first-order plus all four pairwise trigonometric products, which
//! gives `p = 2n + 2n(n−1)` natural parameters (72 at n = 6). All-zero
//! parameters are the uniform distribution. Full conditionals are ordinary
//! von Mises distributions, so Gibbs sweeps are exact per step.

use crate::rng::rng_for;
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

pub const TAU: f64 = std::f64::consts::TAU;

/// Number of natural parameters for torus dimension `n`.
pub fn param_count(dim: usize) -> usize {
    2 * dim + 2 * dim * (dim - 1)
}

/// Batch size rule: the smallest sample count with `p/N < 0.07`, rounded up
/// to a multiple of 16 (1040 at p = 72).
pub fn batch_size(p: usize) -> usize {
    assert!(p >= 2);
    // p/N < 0.07 is exactly N > 100p/7; integer arithmetic keeps the
    // boundary cases strict.
    let raw = (100 * p) / 7 + 1;
    raw.div_ceil(16) * 16
}

/// Natural parameters of the EMvM. Layout of `eta`:
/// `[a_0..a_n, b_0..b_n, (c,d,e,g) per pair (i<j) lexicographic]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EMvMParams {
    pub dim: usize,
    pub eta: Vec<f64>,
}

/// Uniform distribution on the torus: all coefficients zero.
pub fn uniform_params(dim: usize) -> EMvMParams {
    assert!(dim >= 1);
    EMvMParams {
        dim,
        eta: vec![0.0; param_count(dim)],
    }
}

impl EMvMParams {
    #[inline]
    fn pair_base(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.dim);
        let n = self.dim;
        let pair_idx = i * (2 * n - i - 1) / 2 + (j - i - 1);
        2 * n + 4 * pair_idx
    }

    pub fn a(&self, i: usize) -> f64 {
        self.eta[i]
    }
    pub fn b(&self, i: usize) -> f64 {
        self.eta[self.dim + i]
    }
    /// Pairwise coefficients for i < j: (cc, ss, cs, sc).
    pub fn pair(&self, i: usize, j: usize) -> (f64, f64, f64, f64) {
        let base = self.pair_base(i, j);
        (
            self.eta[base],
            self.eta[base + 1],
            self.eta[base + 2],
            self.eta[base + 3],
        )
    }

    pub fn is_uniform(&self) -> bool {
        self.eta.iter().all(|&x| x == 0.0)
    }

    /// Natural parameters (A_i, B_i) of the conditional von Mises of
    /// coordinate `i` given the other angles (passed as cos/sin caches).
    pub fn conditional_ab(&self, cs: &[f64], sn: &[f64], i: usize) -> (f64, f64) {
        let mut a = self.a(i);
        let mut b = self.b(i);
        for j in 0..self.dim {
            if j == i {
                continue;
            }
            if i < j {
                let (c, d, e, g) = self.pair(i, j);
                a += c * cs[j] + e * sn[j];
                b += d * sn[j] + g * cs[j];
            } else {
                let (c, d, e, g) = self.pair(j, i);
                a += c * cs[j] + g * sn[j];
                b += d * sn[j] + e * cs[j];
            }
        }
        (a, b)
    }

    /// Dot product of a parameter-space displacement with the sufficient
    /// statistics of one point.
    pub fn stat_dot(delta: &[f64], dim: usize, cs: &[f64], sn: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..dim {
            acc += delta[i] * cs[i] + delta[dim + i] * sn[i];
        }
        let mut base = 2 * dim;
        for i in 0..dim {
            for j in (i + 1)..dim {
                acc += delta[base] * cs[i] * cs[j]
                    + delta[base + 1] * sn[i] * sn[j]
                    + delta[base + 2] * cs[i] * sn[j]
                    + delta[base + 3] * sn[i] * cs[j];
                base += 4;
            }
        }
        acc
    }
}

/// A weighted sample from the torus.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub dim: usize,
    /// Row-major `len × dim` angles in `[0, 2π)`.
    pub points: Vec<f64>,
    /// Non-negative, summing to 1.
    pub weights: Vec<f64>,
    /// Seed the batch was drawn with, for bookkeeping.
    pub seed: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, s: usize) -> &[f64] {
        &self.points[s * self.dim..(s + 1) * self.dim]
    }

    pub fn set_uniform_weights(&mut self) {
        let w = 1.0 / self.len() as f64;
        self.weights.iter_mut().for_each(|x| *x = w);
    }
}

/// Draw from a 1-D von Mises via the Best–Fisher rejection method.
pub fn von_mises_draw<R: Rng>(rng: &mut R, mu: f64, kappa: f64) -> f64 {
    if kappa < 1e-8 {
        return rng.gen_range(0.0..TAU);
    }
    let s = 0.5 / kappa;
    let r = s + (1.0 + s * s).sqrt();
    loop {
        let u1: f64 = rng.gen();
        let z = (PI * u1).cos();
        let w = (1.0 + r * z) / (r + z);
        let y = kappa * (r - w);
        let v: f64 = rng.gen();
        if y * (2.0 - y) - v >= 0.0 || (y / v).ln() + 1.0 - y >= 0.0 {
            let u3: f64 = rng.gen();
            let ang = if u3 - 0.5 >= 0.0 {
                mu + w.clamp(-1.0, 1.0).acos()
            } else {
                mu - w.clamp(-1.0, 1.0).acos()
            };
            return ang.rem_euclid(TAU);
        }
    }
}

/// Gibbs sampling: independent chains, one draw per chain after `burn_in`
/// full-conditional sweeps. Weights come back uniform. Deterministic given
/// `(params, count, burn_in, seed)`; chains use seeds derived from their
/// index, so parallel scheduling cannot change the result.
pub fn gibbs_sample(params: &EMvMParams, count: usize, burn_in: usize, seed: u64) -> SampleBatch {
    assert!(count >= 1);
    let dim = params.dim;
    let diagonal = (0..dim).all(|i| ((i + 1)..dim).all(|j| params.pair(i, j) == (0.0, 0.0, 0.0, 0.0)));
    let points: Vec<f64> = (0..count)
        .into_par_iter()
        .flat_map_iter(|chain| {
            let mut rng = rng_for(seed, 0x6662, chain as u64);
            let mut theta: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect();
            if diagonal {
                // No coupling: the conditionals are the marginals, draw directly.
                for i in 0..dim {
                    let (a, b) = (params.a(i), params.b(i));
                    let kappa = a.hypot(b);
                    let mu = b.atan2(a);
                    theta[i] = von_mises_draw(&mut rng, mu, kappa);
                }
            } else {
                let mut cs: Vec<f64> = theta.iter().map(|t| t.cos()).collect();
                let mut sn: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
                for _ in 0..burn_in {
                    for i in 0..dim {
                        let (a, b) = params.conditional_ab(&cs, &sn, i);
                        let kappa = a.hypot(b);
                        let mu = b.atan2(a);
                        let t = von_mises_draw(&mut rng, mu, kappa);
                        theta[i] = t;
                        cs[i] = t.cos();
                        sn[i] = t.sin();
                    }
                }
            }
            theta
        })
        .collect();
    let weights = vec![1.0 / count as f64; count];
    SampleBatch {
        dim,
        points,
        weights,
        seed,
    }
}

/// Per-coordinate circular mean resultant lengths of the weighted sample,
/// each in [0, 1]; 1 means a point distribution in that coordinate.
pub fn concentration(batch: &SampleBatch) -> Vec<f64> {
    assert!(!batch.is_empty());
    let dim = batch.dim;
    let wsum: f64 = batch.weights.iter().sum();
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut c = 0.0;
        let mut s = 0.0;
        for (sidx, w) in batch.weights.iter().enumerate() {
            let t = batch.points[sidx * dim + i];
            c += w * t.cos();
            s += w * t.sin();
        }
        out.push(c.hypot(s) / wsum);
    }
    out
}

/// Modified Bessel ratio I1/I0 with exponential scaling, stable for all
/// non-negative arguments (polynomial approximations, ~1e-7 accuracy).
pub fn bessel_ratio(kappa: f64) -> f64 {
    if kappa <= 0.0 {
        return 0.0;
    }
    if kappa < 3.75 {
        let y = (kappa / 3.75) * (kappa / 3.75);
        let i0 = 1.0
            + y * (3.5156229
                + y * (3.0899424
                    + y * (1.2067492 + y * (0.2659732 + y * (0.0360768 + y * 0.0045813)))));
        let i1 = kappa
            * (0.5
                + y * (0.87890594
                    + y * (0.51498869
                        + y * (0.15084934 + y * (0.02658733 + y * (0.00301532 + y * 0.00032411))))));
        i1 / i0
    } else {
        let z = 3.75 / kappa;
        // exp(kappa)/sqrt(kappa) factors cancel in the ratio.
        let i0e = 0.39894228
            + z * (0.01328592
                + z * (0.00225319
                    + z * (-0.00157565
                        + z * (0.00916281
                            + z * (-0.02057706
                                + z * (0.02635537 + z * (-0.01647633 + z * 0.00392377)))))));
        let i1e = 0.39894228
            + z * (-0.03988024
                + z * (-0.00362018
                    + z * (0.00163801
                        + z * (-0.01031555
                            + z * (0.02282967
                                + z * (-0.02895312 + z * (0.01787654 + z * (-0.00420059))))))));
        i1e / i0e
    }
}

/// Conditional von Mises moments used by the fit: mean resultant R and the
/// second-harmonic ratio q = I2/I0 = 1 − 2R/κ.
fn vm_moments(kappa: f64) -> (f64, f64) {
    if kappa < 1e-9 {
        return (0.5 * kappa, kappa * kappa / 8.0);
    }
    let r = bessel_ratio(kappa);
    (r, (1.0 - 2.0 * r / kappa).max(0.0))
}

/// Sampled KL divergence `KL(old ‖ new)` using a batch drawn from `old`:
/// the moment term is the batch average of the sufficient statistics and
/// the log-partition difference is estimated by importance sampling on the
/// same batch. Small negatives from sampling noise clamp to 0. Batch
/// weights are ignored; the points are treated as iid draws from `old`.
pub fn kl_estimate(new: &EMvMParams, old: &EMvMParams, batch: &SampleBatch) -> f64 {
    assert_eq!(new.dim, old.dim);
    assert_eq!(batch.dim, old.dim);
    let dim = old.dim;
    let delta: Vec<f64> = new
        .eta
        .iter()
        .zip(old.eta.iter())
        .map(|(n, o)| n - o)
        .collect();
    if delta.iter().all(|&d| d == 0.0) {
        return 0.0;
    }
    let n = batch.len();
    let mut xs = Vec::with_capacity(n);
    let mut cs = vec![0.0; dim];
    let mut sn = vec![0.0; dim];
    for s in 0..n {
        let theta = batch.point(s);
        for i in 0..dim {
            cs[i] = theta[i].cos();
            sn[i] = theta[i].sin();
        }
        xs.push(EMvMParams::stat_dot(&delta, dim, &cs, &sn));
    }
    let mean: f64 = xs.iter().sum::<f64>() / n as f64;
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + (xs.iter().map(|x| (x - max).exp()).sum::<f64>() / n as f64).ln();
    (lse - mean).max(0.0)
}

/// Result of one elite fit.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub params: EMvMParams,
    /// True when the batch had fewer than two distinct points and the
    /// previous parameters were returned unchanged.
    pub degenerate: bool,
    /// Damping factor accepted by the KL line search (0 when degenerate).
    pub alpha: f64,
}

/// Per-conditional sparse row of the (A_i, B_i) parametrization: entries
/// (parameter index, coefficient in A, coefficient in B). The same rows
/// reconstruct A_i, B_i and act as the Jacobian of the pseudo-likelihood.
fn conditional_entries(
    params: &EMvMParams,
    cs: &[f64],
    sn: &[f64],
    i: usize,
    out: &mut Vec<(usize, f64, f64)>,
) {
    let n = params.dim;
    out.clear();
    out.push((i, 1.0, 0.0));
    out.push((n + i, 0.0, 1.0));
    for j in 0..n {
        if j == i {
            continue;
        }
        if i < j {
            let base = params.pair_base(i, j);
            out.push((base, cs[j], 0.0)); // c_ij
            out.push((base + 1, 0.0, sn[j])); // d_ij
            out.push((base + 2, sn[j], 0.0)); // e_ij: cosθ_i sinθ_j
            out.push((base + 3, 0.0, cs[j])); // g_ij: sinθ_i cosθ_j
        } else {
            let base = params.pair_base(j, i);
            out.push((base, cs[j], 0.0)); // c_ji
            out.push((base + 1, 0.0, sn[j])); // d_ji
            out.push((base + 2, 0.0, cs[j])); // e_ji: cosθ_j sinθ_i
            out.push((base + 3, sn[j], 0.0)); // g_ji: sinθ_j cosθ_i
        }
    }
}

/// Fit the EMvM to a weighted batch by damped pseudo-likelihood ascent.
///
/// The inner ascent is a Levenberg-damped Newton iteration on the weighted
/// pseudo-likelihood (concave in the natural parameters); its fixed point
/// matches the weighted sufficient statistics of the elites through the
/// conditional moments. The resulting displacement from `prev` is then
/// damped by the largest `α ∈ (0, 1]` whose sampled KL from `prev` stays
/// within `kl_budget`.
pub fn fit_weighted(batch: &SampleBatch, prev: &EMvMParams, kl_budget: f64) -> FitOutcome {
    assert!(kl_budget > 0.0);
    let dim = prev.dim;
    let p = param_count(dim);
    let n = batch.len();

    // Degenerate batch: fewer than two distinct points.
    let mut distinct = 1;
    'outer: for s in 1..n {
        for t in 0..s.min(8) {
            if batch.point(s) != batch.point(t) {
                distinct = 2;
                break 'outer;
            }
        }
    }
    if n < 2 || distinct < 2 {
        return FitOutcome {
            params: prev.clone(),
            degenerate: true,
            alpha: 0.0,
        };
    }

    // Cache trig of the weighted points.
    let active: Vec<usize> = (0..n).filter(|&s| batch.weights[s] > 0.0).collect();
    let mut cs_all = vec![0.0; active.len() * dim];
    let mut sn_all = vec![0.0; active.len() * dim];
    for (row, &s) in active.iter().enumerate() {
        let theta = batch.point(s);
        for i in 0..dim {
            cs_all[row * dim + i] = theta[i].cos();
            sn_all[row * dim + i] = theta[i].sin();
        }
    }
    let wsum: f64 = active.iter().map(|&s| batch.weights[s]).sum();

    let mut eta = prev.clone();
    let mut grad = vec![0.0; p];
    let mut curv = nalgebra::DMatrix::<f64>::zeros(p, p);
    let mut entries: Vec<(usize, f64, f64)> = Vec::with_capacity(2 + 4 * dim);

    // Proximal damping toward `prev`, scaled to the evidence: elite sets
    // are small (the effective sample size of rank weights is ~3m/4), so
    // the raw pseudo-likelihood maximizer is near-degenerate and full
    // Newton wanders along directions with no statistical support. A prior
    // worth about two observations keeps the ascent on directions the
    // weights actually pin down without biasing the fixed point (the
    // gradient at `prev` is untouched) and vanishes for large uniformly
    // weighted batches.
    let ess = 1.0
        / active
            .iter()
            .map(|&s| (batch.weights[s] / wsum).powi(2))
            .sum::<f64>();
    let prox = 2.0 / ess;

    for _ in 0..8 {
        grad.iter_mut().for_each(|x| *x = 0.0);
        curv.fill(0.0);
        for (row, &s) in active.iter().enumerate() {
            let w = batch.weights[s] / wsum;
            let cs = &cs_all[row * dim..(row + 1) * dim];
            let sn = &sn_all[row * dim..(row + 1) * dim];
            for i in 0..dim {
                conditional_entries(&eta, cs, sn, i, &mut entries);
                let mut a = 0.0;
                let mut b = 0.0;
                for &(k, ca, cb) in &entries {
                    a += eta.eta[k] * ca;
                    b += eta.eta[k] * cb;
                }
                let kappa = a.hypot(b);
                let (r, q) = vm_moments(kappa);
                // At κ = 0 the location is arbitrary but must stay a unit
                // direction: the conditional covariance of the uniform
                // distribution is I/2, not zero.
                let (cmu, smu) = if kappa > 1e-300 {
                    (a / kappa, b / kappa)
                } else {
                    (1.0, 0.0)
                };
                let ec = r * cmu;
                let es = r * smu;
                // Conditional covariance of (cos θ_i, sin θ_i).
                let vcc = 0.5 * (1.0 + q) * cmu * cmu + 0.5 * (1.0 - q) * smu * smu - ec * ec;
                let vss = 0.5 * (1.0 + q) * smu * smu + 0.5 * (1.0 - q) * cmu * cmu - es * es;
                let vcs = cmu * smu * (q - r * r);
                let rc = cs[i] - ec;
                let rs = sn[i] - es;
                for &(k, ca, cb) in &entries {
                    grad[k] += w * (rc * ca + rs * cb);
                }
                for &(k, ca, cb) in &entries {
                    let left_c = w * (ca * vcc + cb * vcs);
                    let left_s = w * (ca * vcs + cb * vss);
                    for &(l, ca2, cb2) in &entries {
                        curv[(k, l)] += left_c * ca2 + left_s * cb2;
                    }
                }
            }
        }
        // Proximal objective: PL(η) − prox/2 · |η − prev|².
        for k in 0..p {
            grad[k] -= prox * (eta.eta[k] - prev.eta[k]);
            curv[(k, k)] += prox;
        }
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gmax < 1e-6 {
            break;
        }
        let g = nalgebra::DVector::from_column_slice(&grad);
        let Some(step) = curv.clone().lu().solve(&g) else {
            break;
        };
        let mut scale = 1.0;
        let smax = step.amax();
        if smax > 50.0 {
            scale = 50.0 / smax;
        }
        for k in 0..p {
            eta.eta[k] += scale * step[k];
            eta.eta[k] = eta.eta[k].clamp(-1e6, 1e6);
        }
        if smax * scale < 1e-9 {
            break;
        }
    }

    // KL line search on the damping factor.
    let delta: Vec<f64> = eta
        .eta
        .iter()
        .zip(prev.eta.iter())
        .map(|(n, o)| n - o)
        .collect();
    let mut alpha = 1.0;
    let damped = |alpha: f64| -> EMvMParams {
        let mut out = prev.clone();
        for k in 0..p {
            out.eta[k] += alpha * delta[k];
        }
        out
    };
    loop {
        let candidate = damped(alpha);
        if kl_estimate(&candidate, prev, batch) <= kl_budget {
            return FitOutcome {
                params: candidate,
                degenerate: false,
                alpha,
            };
        }
        alpha *= 0.7;
        if alpha < 1e-4 {
            return FitOutcome {
                params: prev.clone(),
                degenerate: false,
                alpha: 0.0,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Series evaluation of the modified Bessel function I_nu, nu in {0,1}.
    /// Independent oracle for the polynomial approximation used by the fit.
    fn bessel_series(nu: u32, x: f64) -> f64 {
        let mut sum = 0.0;
        let half = x / 2.0;
        let mut term = half.powi(nu as i32);
        for k in 1..=nu {
            term /= k as f64;
        }
        for k in 0..60 {
            if k > 0 {
                term *= half * half / (k as f64 * (k as f64 + nu as f64));
            }
            sum += term;
        }
        sum
    }

    fn bessel_ratio_oracle(kappa: f64) -> f64 {
        bessel_series(1, kappa) / bessel_series(0, kappa)
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(param_count(6), 72);
        assert_eq!(param_count(4), 32);
        assert_eq!(param_count(1), 2);
        for n in 1..=8 {
            assert_eq!(param_count(n), 2 * n + 2 * n * (n - 1));
        }
        assert!(uniform_params(6).is_uniform());
        assert_eq!(uniform_params(6).eta.len(), 72);
    }

    #[test]
    fn batch_sizes_match_rule() {
        assert_eq!(batch_size(72), 1040);
        assert_eq!(batch_size(32), 464);
        assert_eq!(batch_size(2), 32);
        // Monotone in p.
        let mut prev = 0;
        for p in 2..200 {
            let n = batch_size(p);
            assert!(n >= prev);
            assert!((p as f64) / (n as f64) < 0.07);
            prev = n;
        }
    }

    #[test]
    fn bessel_ratio_matches_series() {
        for kappa in [0.1, 0.5, 1.0, 2.0, 3.7, 5.0, 10.0, 20.0] {
            assert_relative_eq!(
                bessel_ratio(kappa),
                bessel_ratio_oracle(kappa),
                epsilon = 1e-6,
                max_relative = 1e-6
            );
        }
    }

    #[test]
    fn uniform_sampling_has_low_resultant() {
        let params = uniform_params(3);
        let batch = gibbs_sample(&params, 10_000, 5, 11);
        for r in concentration(&batch) {
            assert!(r < 0.05, "resultant {r} too high for uniform");
        }
    }

    #[test]
    fn one_dimensional_von_mises_matches_moments() {
        // a = κ cos μ, b = κ sin μ with κ = 5, μ = 1.
        let (kappa, mu): (f64, f64) = (5.0, 1.0);
        let mut params = uniform_params(1);
        params.eta[0] = kappa * mu.cos();
        params.eta[1] = kappa * mu.sin();
        let batch = gibbs_sample(&params, 10_000, 30, 17);
        let mut c = 0.0;
        let mut s = 0.0;
        for i in 0..batch.len() {
            c += batch.point(i)[0].cos();
            s += batch.point(i)[0].sin();
        }
        c /= batch.len() as f64;
        s /= batch.len() as f64;
        let mean = s.atan2(c);
        let resultant = c.hypot(s);
        assert!((mean - mu).abs() < 0.05, "circular mean {mean}");
        let expect = bessel_ratio_oracle(kappa); // ≈ 0.8934
        assert!(
            (resultant - expect).abs() < 0.03,
            "resultant {resultant} vs {expect}"
        );
    }

    #[test]
    fn sine_coupling_induces_positive_correlation() {
        // d_12 = 3 rewards aligned sines.
        let mut params = uniform_params(2);
        let base = params.pair_base(0, 1);
        params.eta[base + 1] = 3.0;
        let batch = gibbs_sample(&params, 10_000, 30, 23);
        let mut s1 = Vec::with_capacity(batch.len());
        let mut s2 = Vec::with_capacity(batch.len());
        for i in 0..batch.len() {
            s1.push(batch.point(i)[0].sin());
            s2.push(batch.point(i)[1].sin());
        }
        let m1 = s1.iter().sum::<f64>() / s1.len() as f64;
        let m2 = s2.iter().sum::<f64>() / s2.len() as f64;
        let mut cov = 0.0;
        let mut v1 = 0.0;
        let mut v2 = 0.0;
        for i in 0..s1.len() {
            cov += (s1[i] - m1) * (s2[i] - m2);
            v1 += (s1[i] - m1).powi(2);
            v2 += (s2[i] - m2).powi(2);
        }
        let corr = cov / (v1 * v2).sqrt();
        assert!(corr > 0.3, "correlation {corr} not positive enough");
    }

    #[test]
    fn concentration_limits() {
        let mut batch = SampleBatch {
            dim: 2,
            points: vec![1.0, 2.0].repeat(50),
            weights: vec![1.0 / 50.0; 50],
            seed: 0,
        };
        for r in concentration(&batch) {
            assert_relative_eq!(r, 1.0, epsilon = 1e-12);
        }
        batch.points = (0..50)
            .flat_map(|k| {
                let t = TAU * k as f64 / 50.0;
                vec![t, TAU - t]
            })
            .collect();
        for r in concentration(&batch) {
            assert!(r < 1e-9);
        }
    }

    #[test]
    fn kl_of_identical_params_is_zero() {
        let params = uniform_params(3);
        let batch = gibbs_sample(&params, 256, 5, 3);
        assert_eq!(kl_estimate(&params, &params, &batch), 0.0);
    }

    #[test]
    fn kl_uniform_to_von_mises_matches_quadrature() {
        // KL(uniform ‖ vM(μ, κ)) = log I0(κ): the quadrature value for
        // κ = 1 is log(1.2660658…) ≈ 0.2359140.
        let old = uniform_params(1);
        let mut new = uniform_params(1);
        new.eta[0] = 1.0 * 0.7f64.cos();
        new.eta[1] = 1.0 * 0.7f64.sin();
        let batch = gibbs_sample(&old, 10_000, 5, 31);
        let est = kl_estimate(&new, &old, &batch);
        let analytic = bessel_series(0, 1.0).ln();
        assert_relative_eq!(analytic, 0.235_914, epsilon = 1e-5);
        assert!(
            (est - analytic).abs() < 0.02,
            "KL estimate {est} vs {analytic}"
        );
    }

    #[test]
    fn kl_grows_with_concentration() {
        let old = uniform_params(1);
        let batch = gibbs_sample(&old, 20_000, 5, 37);
        let mut prev = 0.0;
        for kappa in [0.5, 1.0, 2.0, 4.0] {
            let mut new = uniform_params(1);
            new.eta[0] = kappa;
            let est = kl_estimate(&new, &old, &batch);
            let analytic = bessel_series(0, kappa).ln();
            assert!(
                (est - analytic).abs() < 0.05 * (1.0 + analytic),
                "κ={kappa}: {est} vs {analytic}"
            );
            assert!(est > prev, "KL must grow with κ");
            prev = est;
        }
    }

    #[test]
    fn fit_of_uniform_batch_stays_near_uniform() {
        let prev = uniform_params(2);
        let batch = gibbs_sample(&prev, 4096, 5, 41);
        let fit = fit_weighted(&batch, &prev, 50.0);
        assert!(!fit.degenerate);
        let bound = 3.0 / (batch.len() as f64).sqrt();
        for (k, v) in fit.params.eta.iter().enumerate() {
            assert!(v.abs() < bound, "coefficient {k} = {v} exceeds {bound}");
        }
    }

    #[test]
    fn point_mass_weights_concentrate_monotonically() {
        let dim = 2;
        let mut params = uniform_params(dim);
        let mut batch = gibbs_sample(&params, 64, 5, 43);
        // All weight on a single elite point.
        batch.weights.iter_mut().for_each(|w| *w = 0.0);
        batch.weights[7] = 1.0;
        let target = [batch.point(7)[0], batch.point(7)[1]];
        let mut prev_kappa = [0.0; 2];
        for fit_round in 0..10 {
            let fit = fit_weighted(&batch, &params, 1e9);
            params = fit.params;
            for i in 0..dim {
                let mut cs = vec![0.0; dim];
                let mut sn = vec![0.0; dim];
                for j in 0..dim {
                    cs[j] = target[j].cos();
                    sn[j] = target[j].sin();
                }
                let (a, b) = params.conditional_ab(&cs, &sn, i);
                let kappa = a.hypot(b);
                let mu = b.atan2(a);
                // Location converges to the elite point.
                let mut diff = (mu - target[i]).abs();
                if diff > PI {
                    diff = TAU - diff;
                }
                assert!(diff < 0.75, "coordinate {i} location {mu} vs {}", target[i]);
                // Strict growth until the point-mass regime; beyond κ ≈ 500
                // the Bessel-ratio approximation limits resolution.
                assert!(
                    kappa > prev_kappa[i] || kappa > 500.0,
                    "concentration must grow: {kappa} vs {} (round {fit_round})",
                    prev_kappa[i]
                );
                prev_kappa[i] = kappa;
            }
        }
        assert!(prev_kappa.iter().all(|&k| k > 3.0));
    }

    #[test]
    fn fit_recovers_one_dimensional_von_mises() {
        let (kappa, mu): (f64, f64) = (5.0, 1.0);
        let mut gen = uniform_params(1);
        gen.eta[0] = kappa * mu.cos();
        gen.eta[1] = kappa * mu.sin();
        let batch = gibbs_sample(&gen, 10_000, 30, 47);
        let fit = fit_weighted(&batch, &uniform_params(1), 1e9);
        let a = fit.params.eta[0];
        let b = fit.params.eta[1];
        let k_hat = a.hypot(b);
        let mu_hat = b.atan2(a);
        assert!((mu_hat - mu).abs() < 0.05, "mu {mu_hat}");
        assert!((k_hat - kappa).abs() < 0.15 * kappa, "kappa {k_hat}");
    }

    #[test]
    fn fit_is_a_fixed_point_on_its_own_samples() {
        let mut prev = uniform_params(2);
        prev.eta[0] = 1.0;
        prev.eta[1] = 0.3;
        prev.eta[2] = -0.4;
        prev.eta[3] = 0.8;
        let base = prev.pair_base(0, 1);
        prev.eta[base + 1] = 1.5;
        let batch = gibbs_sample(&prev, 8192, 40, 53);
        let fit = fit_weighted(&batch, &prev, 1e9);
        for (k, (a, b)) in fit.params.eta.iter().zip(prev.eta.iter()).enumerate() {
            assert!(
                (a - b).abs() < 0.25,
                "parameter {k} drifted: {a} vs {b} (sampling noise bound)"
            );
        }
    }

    #[test]
    fn degenerate_batch_returns_prev() {
        let prev = uniform_params(2);
        let batch = SampleBatch {
            dim: 2,
            points: vec![1.0, 2.0].repeat(16),
            weights: vec![1.0 / 16.0; 16],
            seed: 0,
        };
        let fit = fit_weighted(&batch, &prev, 1.0);
        assert!(fit.degenerate);
        assert_eq!(fit.params, prev);
    }

    #[test]
    fn trust_region_is_honored() {
        // 100 randomized fits: sampled KL of the accepted update stays
        // within budget plus a sampling-error margin.
        use rand::Rng;
        let mut seed_rng = crate::rng::rng_for(59, 0, 0);
        for trial in 0..100 {
            let dim = 1 + (trial % 3);
            let mut prev = uniform_params(dim);
            for k in 0..prev.eta.len() {
                prev.eta[k] = seed_rng.gen_range(-0.5..0.5);
            }
            let batch = gibbs_sample(&prev, 512, 20, 1000 + trial as u64);
            let budget = seed_rng.gen_range(0.05..0.5);
            // Rank-style weights concentrated on a random elite subset.
            let mut weighted = batch.clone();
            let m = 52;
            weighted.weights.iter_mut().for_each(|w| *w = 0.0);
            for r in 0..m {
                weighted.weights[(trial * 7 + r * 3) % 512] = (m - r) as f64;
            }
            let wsum: f64 = weighted.weights.iter().sum();
            weighted.weights.iter_mut().for_each(|w| *w /= wsum);
            let fit = fit_weighted(&weighted, &prev, budget);
            let kl = kl_estimate(&fit.params, &prev, &weighted);
            // Standard error of the KL estimate at this batch size.
            let se = 3.0 * (1.0 / (512f64).sqrt());
            assert!(
                kl <= budget + se,
                "trial {trial}: KL {kl} exceeds budget {budget} + {se}"
            );
        }
    }

    #[test]
    fn fit_is_rotation_equivariant() {
        // Shift the batch by φ, fit, sample, shift back: per-coordinate
        // distributions match the fit of the unshifted batch (two-sample
        // KS at α = 0.01).
        let mut gen = uniform_params(2);
        gen.eta[0] = 1.2;
        gen.eta[3] = 0.9;
        let base = gen.pair_base(0, 1);
        gen.eta[base] = 0.8;
        let batch = gibbs_sample(&gen, 4096, 30, 61);
        let phi = [1.1, -0.6];
        let mut shifted = batch.clone();
        for s in 0..shifted.len() {
            for i in 0..2 {
                shifted.points[s * 2 + i] = (shifted.points[s * 2 + i] + phi[i]).rem_euclid(TAU);
            }
        }
        let fit_a = fit_weighted(&batch, &uniform_params(2), 1e9).params;
        let fit_b = fit_weighted(&shifted, &uniform_params(2), 1e9).params;
        let sample_a = gibbs_sample(&fit_a, 4096, 30, 67);
        let sample_b = gibbs_sample(&fit_b, 4096, 30, 71);
        for i in 0..2 {
            let mut xs: Vec<f64> = (0..sample_a.len()).map(|s| sample_a.point(s)[i]).collect();
            let mut ys: Vec<f64> = (0..sample_b.len())
                .map(|s| (sample_b.point(s)[i] - phi[i]).rem_euclid(TAU))
                .collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let d = two_sample_ks(&xs, &ys);
            let crit = 1.628 * ((xs.len() + ys.len()) as f64 / (xs.len() * ys.len()) as f64).sqrt();
            assert!(d < crit, "coordinate {i}: KS {d} ≥ {crit}");
        }
    }

    fn two_sample_ks(xs: &[f64], ys: &[f64]) -> f64 {
        let mut d = 0.0f64;
        let mut i = 0;
        let mut j = 0;
        while i < xs.len() && j < ys.len() {
            if xs[i] <= ys[j] {
                i += 1;
            } else {
                j += 1;
            }
            let fx = i as f64 / xs.len() as f64;
            let fy = j as f64 / ys.len() as f64;
            d = d.max((fx - fy).abs());
        }
        d
    }

    #[test]
    fn diagonal_sampler_passes_ks_against_quadrature() {
        // One-sample KS at α = 0.01 against the numerically integrated
        // von Mises CDF, per coordinate of a diagonal 3-D EMvM.
        let mus: [f64; 3] = [0.7, 2.9, 4.4];
        let kappas = [0.8, 2.5, 6.0];
        let mut params = uniform_params(3);
        for i in 0..3 {
            params.eta[i] = kappas[i] * mus[i].cos();
            params.eta[3 + i] = kappas[i] * mus[i].sin();
        }
        let batch = gibbs_sample(&params, 4096, 30, 73);
        for i in 0..3 {
            let mut xs: Vec<f64> = (0..batch.len()).map(|s| batch.point(s)[i]).collect();
            xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // Trapezoid CDF of exp(κ cos(t−μ)) on [0, 2π), normalized.
            let grid = 8192;
            let mut pdf = Vec::with_capacity(grid + 1);
            for g in 0..=grid {
                let t = TAU * g as f64 / grid as f64;
                pdf.push((kappas[i] * (t - mus[i]).cos()).exp());
            }
            let mut cdf = vec![0.0; grid + 1];
            for g in 1..=grid {
                cdf[g] = cdf[g - 1] + 0.5 * (pdf[g - 1] + pdf[g]);
            }
            let total = cdf[grid];
            let eval_cdf = |x: f64| -> f64 {
                let pos = x / TAU * grid as f64;
                let idx = (pos.floor() as usize).min(grid - 1);
                let frac = pos - idx as f64;
                (cdf[idx] * (1.0 - frac) + cdf[idx + 1] * frac) / total
            };
            let n = xs.len() as f64;
            let mut d = 0.0f64;
            for (k, x) in xs.iter().enumerate() {
                let f = eval_cdf(*x);
                d = d.max((f - k as f64 / n).abs());
                d = d.max(((k + 1) as f64 / n - f).abs());
            }
            let crit = 1.628 / n.sqrt();
            assert!(d < crit, "coordinate {i}: KS {d} ≥ {crit}");
        }
    }
}
