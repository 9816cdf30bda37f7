//! One-dimensional moment-matched Gaussian mixtures and the joint
//! `(x, y)` hard instance built from them.
//!
//! For a conditional mean `mu_s` and variance `sigma_s2`, the mixture is
//! `(1 - rate) N(mu_s, sigma_s2) + rate * B` where the noise part `B` is
//! chosen so that the first three moments equal those of `N(0, 1)`. Three
//! constructions cover small, moderate and large `|mu_s|`.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{validation, Error, Result};
use crate::model::{Covariance, Dataset, LinearModelSpec, SpikedCovariance};
use crate::oracles::integrate_with_breaks;
use crate::rng::Seed;

/// Split between the small-mean and moderate-mean constructions, as a
/// multiple of `sqrt(eps)`.
pub const SMALL_MEAN_FACTOR: f64 = 1e-4;
/// Split between the moderate-mean and large-mean constructions.
pub const LARGE_MEAN_THRESHOLD: f64 = 0.65;
/// Upper end of the corruption-rate bracket for the moderate construction.
pub const MID_RATE_MAX: f64 = 0.51;
/// Variance of the heavy noise component in the moderate construction.
pub const MID_NARROW_VAR: f64 = 0.2;
/// Mean/weight scaling in the large-mean construction.
pub const LARGE_SHRINK: f64 = 0.8;

/// Node offsets (in units of the noise-mean spread) for the small-mean
/// construction.
const SMALL_NODES: [f64; 4] = [-1.5, -0.5, 0.5, 1.5];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussComponent {
    pub weight: f64,
    pub mean: f64,
    pub var: f64,
}

impl GaussComponent {
    /// Raw moment `E[X^p]` for `p <= 4`.
    pub fn raw_moment(&self, p: u32) -> f64 {
        let (m, v) = (self.mean, self.var);
        match p {
            0 => 1.0,
            1 => m,
            2 => m * m + v,
            3 => m * m * m + 3.0 * m * v,
            4 => m.powi(4) + 6.0 * m * m * v + 3.0 * v * v,
            _ => panic!("raw_moment supports p <= 4"),
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let z = x - self.mean;
        (-0.5 * z * z / self.var).exp() / (2.0 * std::f64::consts::PI * self.var).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    SmallMean,
    MidMean,
    LargeMean,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SmallMean => "small",
            Regime::MidMean => "mid",
            Regime::LargeMean => "large",
        }
    }
}

/// A mixture whose first component is the signal `(1 - eps_mu, mu_s, sigma_s2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqMixture {
    pub regime: Regime,
    pub components: Vec<GaussComponent>,
    pub eps_mu: f64,
    pub mu_s: f64,
    pub sigma_s2: f64,
}

impl SqMixture {
    pub fn moment(&self, p: u32) -> f64 {
        self.components.iter().map(|c| c.weight * c.raw_moment(p)).sum()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components.iter().map(|c| c.weight * c.pdf(x)).sum()
    }

    pub fn noise(&self) -> &[GaussComponent] {
        &self.components[1..]
    }

    /// Sorted break points enclosing essentially all of the mass, for
    /// quadrature over components that may sit far from the origin.
    pub fn support_breaks(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        for c in &self.components {
            let s = c.var.sqrt();
            for k in [-40.0, -10.0, -3.0, 0.0, 3.0, 10.0, 40.0] {
                pts.push(c.mean + k * s);
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_components(&self.components, 1.0, rng)
    }

    /// Draw from the noise part `B` only.
    pub fn sample_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_components(self.noise(), self.eps_mu, rng)
    }
}

fn sample_components<R: Rng + ?Sized>(comps: &[GaussComponent], total: f64, rng: &mut R) -> f64 {
    let mut u: f64 = rng.random::<f64>() * total;
    let mut chosen = comps[comps.len() - 1];
    for c in comps {
        if u < c.weight {
            chosen = *c;
            break;
        }
        u -= c.weight;
    }
    let z: f64 = rng.sample(StandardNormal);
    chosen.mean + chosen.var.sqrt() * z
}

/// Signal mean attained by the moderate construction at corruption rate `rate`.
pub fn mid_signal_mean(rate: f64, sigma_s2: f64) -> f64 {
    let e = rate;
    let num = 3.0 * e * (20.0 * e * sigma_s2 - 4.0 * e - 15.0 * sigma_s2 + 15.0);
    let den = 5.0 * (17.0 * e * e - 45.0 * e + 27.0);
    (num / den).sqrt()
}

/// Variance of the light (weight 1/9) noise component in the moderate construction.
pub fn mid_wide_var(rate: f64, sigma_s2: f64) -> f64 {
    let (e, s) = (rate, sigma_s2);
    let num = -315.0 * e * e * s + 80.0 * e * e + 720.0 * e * s - 225.0 * e - 405.0 * s + 108.0;
    num / (5.0 * (17.0 * e * e - 45.0 * e + 27.0))
}

/// Noise variances `(v2, v3)` of the large-mean construction.
pub fn large_noise_vars(rate: f64, sigma_s2: f64) -> (f64, f64) {
    let (e, s) = (rate, sigma_s2);
    let a = 9.0 * e - 5.0;
    let b = 189.0 * e - 125.0;
    let v2 = (42525.0 * e * e * s - 58554.0 * e * s + 20125.0 * s + 5157.0 * e - 3429.0) / (25.0 * a * b);
    let poly = 107163.0 * e.powi(3) * s - 248913.0 * e * e * s + 188625.0 * e * s - 46875.0 * s
        + 36243.0 * e * e
        - 48102.0 * e
        + 15955.0;
    let v3 = 3.0 * poly / (a * b * b);
    (v2, v3)
}

/// Rate at which the moderate construction reaches `|mu_s|`, by bisection.
pub fn mid_rate_for_mean(mu_abs: f64, sigma_s2: f64) -> Result<f64> {
    let (mut lo, mut hi) = (1e-12, MID_RATE_MAX);
    if !(mid_signal_mean(hi, sigma_s2) >= mu_abs) || !(mid_signal_mean(lo, sigma_s2) <= mu_abs) {
        return Err(Error::MuOutOfRange(mu_abs));
    }
    while hi - lo > 1e-12 * hi.max(1e-300) && hi - lo > 1e-300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid_signal_mean(mid, sigma_s2) < mu_abs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which construction handles `mu_s` at contamination level `eps`.
pub fn regime_for(mu_s: f64, eps: f64) -> Regime {
    let a = mu_s.abs();
    if a < SMALL_MEAN_FACTOR * eps.sqrt() {
        Regime::SmallMean
    } else if a < LARGE_MEAN_THRESHOLD {
        Regime::MidMean
    } else {
        Regime::LargeMean
    }
}

/// Corruption rate used at conditional mean `mu_s`.
pub fn corruption_rate(mu_s: f64, sigma_s2: f64, eps: f64) -> Result<f64> {
    let a = mu_s.abs();
    Ok(match regime_for(mu_s, eps) {
        Regime::SmallMean => eps,
        Regime::MidMean => mid_rate_for_mean(a, sigma_s2)?,
        Regime::LargeMean => 1.0 - 1.0 / (9.0 * a * a),
    })
}

fn check_sigma_s2(sigma_s2: f64) -> Result<()> {
    if !(sigma_s2 > 0.0 && sigma_s2 <= 0.1) {
        return Err(validation(format!("sigma_s^2 = {sigma_s2} outside (0, 0.1]")));
    }
    Ok(())
}

/// Build the mixture for conditional mean `mu_s`, signal variance `sigma_s2`
/// and contamination level `eps`, choosing the construction by `|mu_s|`.
pub fn build_mixture(mu_s: f64, sigma_s2: f64, eps: f64) -> Result<SqMixture> {
    build_mixture_in(regime_for(mu_s, eps), mu_s, sigma_s2, eps)
}

/// Build the mixture with an explicitly chosen construction. Each
/// construction is only valid on part of the `mu_s` axis; the moment checks
/// on the result are the caller's guard when forcing a regime.
pub fn build_mixture_in(regime: Regime, mu_s: f64, sigma_s2: f64, eps: f64) -> Result<SqMixture> {
    check_sigma_s2(sigma_s2)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(validation(format!("eps = {eps} outside (0, 0.5)")));
    }
    if !mu_s.is_finite() {
        return Err(Error::MuOutOfRange(mu_s));
    }
    let a = mu_s.abs();
    let (eps_mu, mut comps) = match regime {
        Regime::SmallMean => (eps, small_mean_components(a, sigma_s2, eps)?),
        Regime::MidMean => {
            let e = mid_rate_for_mean(a, sigma_s2)?;
            let mu_n = -3.0 * (1.0 - e) * a / (2.0 * e);
            let comps = vec![
                GaussComponent { weight: 1.0 - e, mean: a, var: sigma_s2 },
                GaussComponent { weight: e / 9.0, mean: -2.0 * mu_n, var: mid_wide_var(e, sigma_s2) },
                GaussComponent { weight: 8.0 * e / 9.0, mean: mu_n, var: MID_NARROW_VAR },
            ];
            (e, comps)
        }
        Regime::LargeMean => {
            let e = 1.0 - 1.0 / (9.0 * a * a);
            let k = LARGE_SHRINK;
            let k3 = k * k * k;
            let (v2, v3) = large_noise_vars(e, sigma_s2);
            let mu3 = 36.0 * (1.0 - e) * a / (189.0 * e - 125.0);
            let comps = vec![
                GaussComponent { weight: 1.0 - e, mean: a, var: sigma_s2 },
                GaussComponent { weight: (1.0 - e) / k3, mean: -k * a, var: v2 },
                GaussComponent { weight: e - (1.0 - e) / k3, mean: mu3, var: v3 },
            ];
            (e, comps)
        }
    };
    if mu_s < 0.0 {
        for c in &mut comps {
            c.mean = -c.mean;
        }
    }
    for c in &comps {
        if !(c.weight >= 0.0 && c.var > 0.0 && c.mean.is_finite()) {
            return Err(validation(format!(
                "construction produced an invalid component {c:?} at mu_s = {mu_s}, sigma_s^2 = {sigma_s2}"
            )));
        }
    }
    Ok(SqMixture { regime, components: comps, eps_mu, mu_s, sigma_s2 })
}

/// Signal `(1 - eps, mu, sigma_s2)` plus four unit-variance noise components
/// whose means are placed on an equispaced grid and weighted to match the
/// remaining first three moments.
fn small_mean_components(mu: f64, sigma_s2: f64, eps: f64) -> Result<Vec<GaussComponent>> {
    let keep = 1.0 - eps;
    // Moments the noise part must supply.
    let m1 = -keep * mu / eps;
    let m2 = (1.0 - keep * (mu * mu + sigma_s2)) / eps;
    let m3 = -keep * (mu.powi(3) + 3.0 * mu * sigma_s2) / eps;
    // Unit-variance components: the means M must satisfy E[M] = m1,
    // E[M^2] = m2 - 1, E[M^3] = m3 - 3 m1.
    let mm2 = m2 - 1.0;
    let mm3 = m3 - 3.0 * m1;
    let spread2 = mm2 - m1 * m1;
    if !(spread2 > 0.0) {
        return Err(validation("noise mixture has no room for unit-variance components"));
    }
    let s = spread2.sqrt();
    let skew = (mm3 - 3.0 * m1 * mm2 + 2.0 * m1.powi(3)) / s.powi(3);
    // Weights w on nodes c with sum w c^j = (1, 0, 1, skew), j = 0..3.
    let vander = nalgebra::Matrix4::from_fn(|j, i| SMALL_NODES[i].powi(j as i32));
    let rhs = nalgebra::Vector4::new(1.0, 0.0, 1.0, skew);
    let w = vander
        .lu()
        .solve(&rhs)
        .ok_or_else(|| validation("node system is singular"))?;
    if w.iter().any(|&x| x < 0.0) {
        return Err(validation(format!("small-mean construction infeasible: skewness {skew:.3e} too large")));
    }
    let mut comps = vec![GaussComponent { weight: keep, mean: mu, var: sigma_s2 }];
    for (i, c) in SMALL_NODES.iter().enumerate() {
        comps.push(GaussComponent { weight: eps * w[i], mean: m1 + s * c, var: 1.0 });
    }
    Ok(comps)
}

/// `chi^2(N(mu1, var1), N(mu2, var2)) = int p1^2 / p2 - 1`.
pub fn chi2_gaussians(mu1: f64, var1: f64, mu2: f64, var2: f64) -> Result<f64> {
    check_vars(&[var1, var2])?;
    let gap = 2.0 * var2 - var1;
    if !(gap > 0.0) {
        return Err(Error::InfiniteDivergence);
    }
    Ok(var2 / (var1.sqrt() * gap.sqrt()) * ((mu1 - mu2).powi(2) / gap).exp() - 1.0)
}

/// Pairwise correlation `int p1 p2 / phi - 1` relative to the standard normal.
pub fn chi2_pair_corr(mu1: f64, var1: f64, mu2: f64, var2: f64) -> Result<f64> {
    check_vars(&[var1, var2])?;
    let s = var1 + var2 - var1 * var2;
    if !(s > 0.0) {
        return Err(Error::InfiniteDivergence);
    }
    let num = mu1 * mu1 * (var2 - 1.0) + 2.0 * mu1 * mu2 + mu2 * mu2 * (var1 - 1.0);
    let den = 2.0 * var1 * (var2 - 1.0) - 2.0 * var2;
    Ok((-num / den).exp() / s.sqrt() - 1.0)
}

/// `chi^2(A, N(0, 1))` summed over pairs of components.
pub fn chi2_mixture(mix: &SqMixture) -> Result<f64> {
    if mix.components.iter().any(|c| !(c.var < 2.0)) {
        return Err(Error::InfiniteDivergence);
    }
    let mut total = 0.0;
    for a in &mix.components {
        for b in &mix.components {
            total += a.weight * b.weight * chi2_pair_corr(a.mean, a.var, b.mean, b.var)?;
        }
    }
    Ok(total)
}

fn check_vars(vars: &[f64]) -> Result<()> {
    if vars.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(validation("variances must be positive and finite"));
    }
    Ok(())
}

fn std_normal_pdf(y: f64) -> f64 {
    (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

const NORMALIZER_TOL: f64 = 1e-10;
const Y_RANGE: f64 = 12.0;

/// Break points on `[-12, 12]` at the regime switches of `mu_s(y) = c1 sqrt(eps) y`.
fn y_breaks(eps: f64, c1: f64) -> Vec<f64> {
    let slope = c1 * eps.sqrt();
    let mut pts = vec![-Y_RANGE, -6.0, -3.0, 0.0, 3.0, 6.0, Y_RANGE];
    for t in [SMALL_MEAN_FACTOR * eps.sqrt() / slope, LARGE_MEAN_THRESHOLD / slope] {
        if t < Y_RANGE {
            pts.push(t);
            pts.push(-t);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `C = int G(y) / (1 - eps_mu(y)) dy`, the normalizer of the label marginal.
pub fn marginal_normalizer(eps: f64, c1: f64, kappa: f64) -> Result<f64> {
    if eps == 0.0 {
        return Ok(1.0);
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(validation(format!("eps = {eps} outside [0, 0.5)")));
    }
    if !(c1 > 0.0) || !(kappa >= 1.0) {
        return Err(validation("need c1 > 0 and kappa >= 1"));
    }
    let sigma_s2 = 1.0 / kappa - c1 * c1 * eps;
    check_sigma_s2(sigma_s2)?;
    let slope = c1 * eps.sqrt();
    // The rate can only fail for y outside the moderate range, which the
    // large-mean branch handles; surface any failure after integration.
    let failure = std::cell::Cell::new(None);
    let integrand = |y: f64| match corruption_rate(slope * y, sigma_s2, eps) {
        Ok(e) => std_normal_pdf(y) / (1.0 - e),
        Err(err) => {
            failure.set(Some(err));
            0.0
        }
    };
    let c = integrate_with_breaks(integrand, &y_breaks(eps, c1), NORMALIZER_TOL)?;
    if let Some(err) = failure.take() {
        return Err(err);
    }
    let limit = 1.0 / (1.0 - eps);
    if c > limit * (1.0 + 1e-6) {
        return Err(Error::C1TooLarge { normalizer: c, limit });
    }
    Ok(c)
}

/// Parameters of the joint hard instance in dimension `d`.
#[derive(Debug, Clone)]
pub struct SqInstanceSpec {
    pub d: usize,
    pub kappa: f64,
    pub eps: f64,
    pub c1: f64,
    pub v: DVector<f64>,
    pub sigma_s2: f64,
    pub normalizer: f64,
}

/// Minimum acceptance rate before the rejection samplers give up.
const MIN_ACCEPTANCE: f64 = 0.01;

impl SqInstanceSpec {
    pub fn new(kappa: f64, eps: f64, c1: f64, v: DVector<f64>) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(validation(format!("eps = {eps} outside (0, 0.5)")));
        }
        // Validates v and kappa.
        SpikedCovariance::new(v.clone(), kappa)?;
        let sigma_s2 = 1.0 / kappa - c1 * c1 * eps;
        check_sigma_s2(sigma_s2)?;
        let normalizer = marginal_normalizer(eps, c1, kappa)?;
        Ok(Self { d: v.len(), kappa, eps, c1, v, sigma_s2, normalizer })
    }

    /// Conditional mean of `<v, x>` given `y`.
    pub fn mean_at(&self, y: f64) -> f64 {
        self.c1 * self.eps.sqrt() * y
    }

    pub fn mixture_at(&self, y: f64) -> Result<SqMixture> {
        build_mixture(self.mean_at(y), self.sigma_s2, self.eps)
    }

    /// Unnormalized label density `G(y) / (1 - eps_mu(y))`.
    pub fn label_density_unnormalized(&self, y: f64) -> Result<f64> {
        let e = corruption_rate(self.mean_at(y), self.sigma_s2, self.eps)?;
        Ok(std_normal_pdf(y) / (1.0 - e))
    }

    /// The uncorrupted regression model: `x ~ N(0, Sigma_v)`, unit label
    /// variance, `beta = c1 sqrt(eps) kappa v`.
    pub fn inlier_model(&self) -> Result<LinearModelSpec> {
        let cov = SpikedCovariance::new(self.v.clone(), self.kappa)?;
        let beta = &self.v * (self.c1 * self.eps.sqrt() * self.kappa);
        let noise = 1.0 - self.c1 * self.c1 * self.eps * self.kappa;
        if !(noise >= 0.0) {
            return Err(validation("c1^2 eps kappa exceeds 1: no valid noise level"));
        }
        LinearModelSpec::new(Covariance::Spiked(cov), beta, noise)
    }

    /// Fill `out` (length `d + 1`) with `x` whose `v`-coordinate is `xv` and
    /// whose orthogonal part is standard normal, followed by `y`.
    fn fill_row<R: Rng + ?Sized>(&self, rng: &mut R, xv: f64, y: f64, out: &mut [f64]) {
        let d = self.d;
        for o in out[..d].iter_mut() {
            *o = rng.sample(StandardNormal);
        }
        let proj: f64 = out[..d].iter().zip(self.v.iter()).map(|(a, b)| a * b).sum();
        let shift = xv - proj;
        for (o, vi) in out[..d].iter_mut().zip(self.v.iter()) {
            *o += shift * vi;
        }
        out[d] = y;
    }

    /// One row from the corrupted joint distribution.
    fn sample_joint_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64], tries: &mut u64) -> Result<()> {
        let slope2 = self.c1 * self.c1 * self.eps;
        let base = 1.0 / (1.0 - self.eps);
        let env_mass = base + 9.0 * slope2;
        let chi3 = ChiSquared::<f64>::new(3.0).expect("valid dof");
        loop {
            *tries += 1;
            let y = if rng.random::<f64>() * env_mass < base {
                rng.sample(StandardNormal)
            } else {
                let r: f64 = chi3.sample(rng).sqrt();
                if rng.random::<bool>() {
                    r
                } else {
                    -r
                }
            };
            let e = corruption_rate(self.mean_at(y), self.sigma_s2, self.eps)?;
            let ratio = (1.0 / (1.0 - e)) / (base + 9.0 * slope2 * y * y);
            if ratio > 1.0 + 1e-9 {
                return Err(validation(format!("label envelope violated at y = {y}: ratio {ratio}")));
            }
            if rng.random::<f64>() < ratio {
                let mix = self.mixture_at(y)?;
                let xv = mix.sample(rng);
                self.fill_row(rng, xv, y, out);
                return Ok(());
            }
        }
    }

    /// One row from the corrupting distribution `E_v` in the decomposition
    /// `Q'_v = (1 - eps) P_v + eps E_v`, where `P_v` is the inlier model.
    pub fn sample_noise_row<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<()> {
        let c = self.normalizer;
        // Mass of the inlier-shaped part of E_v.
        let p_inlier = ((1.0 / c - (1.0 - self.eps)) / self.eps).clamp(0.0, 1.0);
        if rng.random::<f64>() < p_inlier {
            let y: f64 = rng.sample(StandardNormal);
            let z: f64 = rng.sample(StandardNormal);
            let xv = self.mean_at(y) + self.sigma_s2.sqrt() * z;
            self.fill_row(rng, xv, y, out);
            return Ok(());
        }
        // Otherwise y has density proportional to G(y) r(y), r = e / (1 - e),
        // and <v, x> is drawn from the noise part of the mixture at y.
        let slope2 = self.c1 * self.c1 * self.eps;
        let y_small = SMALL_MEAN_FACTOR / self.c1;
        let small_rate = self.eps / (1.0 - self.eps);
        let small_mass = small_rate * central_mass(y_small)?;
        let tail_mass = 9.0 * slope2 * tail_second_moment(y_small)?;
        let chi3 = ChiSquared::<f64>::new(3.0).expect("valid dof");
        let mut tries = 0u64;
        loop {
            tries += 1;
            if tries as f64 * MIN_ACCEPTANCE > 1000.0 {
                return Err(Error::LowAcceptance { rate: 1.0 / tries as f64 });
            }
            let y = if rng.random::<f64>() * (small_mass + tail_mass) < small_mass {
                // G is nearly flat on the tiny central interval.
                let y = (2.0 * rng.random::<f64>() - 1.0) * y_small;
                if rng.random::<f64>() >= (-0.5 * y * y).exp() {
                    continue;
                }
                y
            } else {
                let r: f64 = chi3.sample(rng).sqrt();
                if r < y_small {
                    continue;
                }
                if rng.random::<bool>() {
                    r
                } else {
                    -r
                }
            };
            let mu = self.mean_at(y);
            let e = corruption_rate(mu, self.sigma_s2, self.eps)?;
            let r = e / (1.0 - e);
            let env = if y.abs() < y_small { small_rate } else { 9.0 * slope2 * y * y };
            let ratio = r / env;
            if ratio > 1.0 + 1e-9 {
                return Err(validation(format!("noise envelope violated at y = {y}: ratio {ratio}")));
            }
            if rng.random::<f64>() < ratio {
                let mix = self.mixture_at(y)?;
                let xv = mix.sample_noise(rng);
                self.fill_row(rng, xv, y, out);
                return Ok(());
            }
        }
    }
}

/// `P(|Z| < t)` for standard normal `Z`.
fn central_mass(t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(0.0);
    }
    integrate_with_breaks(std_normal_pdf, &[-t.min(40.0), 0.0, t.min(40.0)], 1e-14)
}

/// `E[Z^2; |Z| >= t]` for standard normal `Z`.
fn tail_second_moment(t: f64) -> Result<f64> {
    let inner = if t > 0.0 {
        integrate_with_breaks(|y| y * y * std_normal_pdf(y), &[-t.min(40.0), 0.0, t.min(40.0)], 1e-14)?
    } else {
        0.0
    };
    Ok((1.0 - inner).max(0.0))
}

/// Draw `n` rows from the corrupted joint distribution `Q'_v`.
pub fn sample_sq_joint(spec: &SqInstanceSpec, n: usize, seed: Seed) -> Result<Dataset> {
    if n == 0 {
        return Err(validation("n must be >= 1"));
    }
    let mut rng = seed.rng();
    let width = spec.d + 1;
    let mut rows = vec![0.0; n * width];
    let mut tries = 0u64;
    for (i, row) in rows.chunks_mut(width).enumerate() {
        spec.sample_joint_row(&mut rng, row, &mut tries)?;
        if tries > 10_000 {
            let rate = (i + 1) as f64 / tries as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(Error::LowAcceptance { rate });
            }
        }
    }
    Dataset::new(spec.d, rows, seed.0)
}
