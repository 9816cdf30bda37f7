//! The verification suite behind `verify-all`, plus the regression sweep
//! used by `bench`.
//!
//! Every check is seeded from the root seed and the check number, and emits
//! only deterministic quantities, so two runs with the same seed are
//! byte-identical.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use crate::certificate::{certificate_sample_size, certify, CertificateConfig};
use crate::error::{validation, Error, Result};
use crate::lowdeg::{
    advantage_bound, build_lowdeg_instance, combinatorial_coeff_check, hermite_cross_coeff, hermite_poly,
    moment_matching_exact, sample_lowdeg, Hypothesis,
};
use crate::model::{basis_vector, mahalanobis_error, random_unit_vector, Covariance, LinearModelSpec, SpikedCovariance};
use crate::oracles::{gauss_hermite_2d, integrate, integrate_with_breaks, normal_pdf, quad_moment_on, MomentEstimate, Rational};
use crate::reduction::{null_variance, run_reduction, test_statistic, DirectionEstimator, ReductionConfig, ReductionRegime};
use crate::regress::{fit_ols, fit_robust, RegressorConfig};
use crate::rng::Seed;
use crate::sampling::{contaminate, sample_clean, Adversary, ContaminationSpec};
use crate::sq::{
    build_mixture, chi2_gaussians, chi2_mixture, chi2_pair_corr, corruption_rate, large_noise_vars, marginal_normalizer,
    mid_signal_mean, mid_wide_var, sample_sq_joint, Regime, SqInstanceSpec, SMALL_MEAN_FACTOR,
};

/// Problem sizes for the suite. `Full` uses the sizes of the acceptance
/// criteria; `Quick` is a reduced smoke run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Quick,
    Full,
}

impl Scale {
    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            Scale::Quick => quick,
            Scale::Full => full,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub criterion: u32,
    pub name: &'static str,
    pub pass: bool,
    /// Headline number for the check (meaning given in `detail`).
    pub metric: f64,
    pub detail: String,
}

/// Numbers and names of the checks run by [`verify_all`].
pub const CHECKS: [(u32, &str); 10] = [
    (1, "moment_matching"),
    (2, "parameter_ranges"),
    (3, "huber_realizability"),
    (4, "chi2_closed_forms"),
    (5, "lowdeg_instance"),
    (6, "hermite_closed_form"),
    (7, "advantage_threshold"),
    (8, "robust_scaling"),
    (9, "certificate"),
    (10, "reduction_tester"),
];

pub fn check_name(criterion: u32) -> Option<&'static str> {
    CHECKS.iter().find(|c| c.0 == criterion).map(|c| c.1)
}

/// Run one numbered check.
pub fn run_check(criterion: u32, scale: Scale, seed: Seed) -> Result<CheckOutcome> {
    let name = check_name(criterion).ok_or_else(|| validation(format!("no check numbered {criterion}")))?;
    let seed = seed.derive("check", criterion as u64);
    let (pass, metric, detail) = match criterion {
        1 => moment_matching(scale)?,
        2 => parameter_ranges(scale)?,
        3 => huber_realizability(scale, seed)?,
        4 => chi2_closed_forms(scale, seed)?,
        5 => lowdeg_instance()?,
        6 => hermite_closed_form(scale, seed)?,
        7 => advantage_threshold(scale, seed)?,
        8 => robust_scaling(scale, seed)?,
        9 => certificate_check(scale, seed)?,
        10 => reduction_check(scale, seed)?,
        _ => unreachable!(),
    };
    Ok(CheckOutcome { criterion, name, pass, metric, detail })
}

/// All checks in order.
pub fn verify_all(scale: Scale, seed: Seed) -> Result<Vec<CheckOutcome>> {
    CHECKS.iter().map(|&(id, _)| run_check(id, scale, seed)).collect()
}

type Verdict = (bool, f64, String);

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a, b, n).into_iter().map(|e| 10f64.powf(e)).collect()
}

const GRID_EPS: f64 = 0.01;

/// Signal means spanning all three constructions for signal variance `s`.
fn mean_axis(s: f64, per_regime: [usize; 3]) -> Vec<f64> {
    let small = SMALL_MEAN_FACTOR * GRID_EPS.sqrt();
    let mut out = Vec::new();
    for k in 0..per_regime[0] {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * 0.99 * small * k as f64 / per_regime[0] as f64);
    }
    for (k, rate) in linspace(0.02, 0.5, per_regime[1]).into_iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * mid_signal_mean(rate, s));
    }
    // Large-mean rates start where the signal mean clears the 0.65 switch.
    for (k, rate) in linspace(0.74, 0.99, per_regime[2]).into_iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign / (3.0 * (1.0 - rate).sqrt()));
    }
    out
}

fn moment_matching(scale: Scale) -> Result<Verdict> {
    let per_regime = scale.pick([2, 4, 4], [8, 16, 16]);
    let sigmas = linspace(0.005, 0.1, scale.pick(5, 20));
    let cells: Vec<(f64, f64)> = sigmas
        .iter()
        .flat_map(|&s| mean_axis(s, per_regime).into_iter().map(move |mu| (mu, s)))
        .collect();
    let results: Vec<Result<(Regime, f64, f64)>> = cells
        .par_iter()
        .map(|&(mu, s)| {
            let m = build_mixture(mu, s, GRID_EPS)?;
            let analytic = (m.moment(1).abs()).max((m.moment(2) - 1.0).abs()).max(m.moment(3).abs());
            let breaks = m.support_breaks();
            let mut quad: f64 = 0.0;
            for (p, target) in [(1, 0.0), (2, 1.0), (3, 0.0)] {
                let q = quad_moment_on(|x| m.pdf(x), p, &breaks, 1e-11)?;
                quad = quad.max((q - target).abs());
            }
            Ok((m.regime, analytic, quad))
        })
        .collect();
    let mut counts = [0usize; 3];
    let (mut worst_analytic, mut worst_quad) = (0.0f64, 0.0f64);
    for r in results {
        let (regime, a, q) = r?;
        counts[regime as usize] += 1;
        worst_analytic = worst_analytic.max(a);
        worst_quad = worst_quad.max(q);
    }
    let pass = worst_analytic <= 1e-9 && worst_quad <= 1e-7 && counts.iter().all(|&c| c > 0);
    let detail = format!(
        "{} mixtures (small/mid/large = {}/{}/{}); max analytic deviation {:.3e}, max quadrature deviation {:.3e}",
        cells.len(),
        counts[0],
        counts[1],
        counts[2],
        worst_analytic,
        worst_quad
    );
    Ok((pass, worst_quad, detail))
}

fn parameter_ranges(scale: Scale) -> Result<Verdict> {
    let g = scale.pick(30, 100);
    let mut violations = 0usize;
    // Moderate construction: wide variance range and monotone mean.
    for j in 1..=g {
        let s = 0.1 * j as f64 / (g + 1) as f64;
        let mut prev = 0.0;
        for i in 1..=g {
            let rate = 0.51 * i as f64 / g as f64;
            let var_n = mid_wide_var(rate, s);
            violations += !(var_n > 0.01 && var_n < 0.8) as usize;
            let mu = mid_signal_mean(rate, s);
            violations += !(mu > prev) as usize;
            prev = mu;
        }
    }
    // Large-mean construction noise variances.
    for j in 1..=g {
        let s = 0.1 * j as f64 / g as f64;
        for i in 0..g {
            let rate = 0.7 + 0.3 * i as f64 / g as f64;
            let (v2, v3) = large_noise_vars(rate, s);
            violations += !(v2 > 0.2 && v2 < 1.0) as usize;
            violations += !(v3 > 0.7 && v3 < 1.9) as usize;
        }
    }
    // Ratio bound above the small-mean cutoff.
    let mut ratio_cells = 0usize;
    for eps in [0.005f64, 0.01, 0.02] {
        let cutoff = SMALL_MEAN_FACTOR * eps.sqrt();
        for s in linspace(0.005, 0.1, scale.pick(5, 20)) {
            for mu in logspace((cutoff * 1.0001).log10(), 1.0, scale.pick(50, 200)) {
                let e = corruption_rate(mu, s, eps)?;
                violations += !(e / (1.0 - e) <= 9.0 * mu * mu * (1.0 + 1e-12)) as usize;
                ratio_cells += 1;
            }
        }
    }
    let detail = format!(
        "{g}x{g} moderate grid, {g}x{g} large grid, {ratio_cells} ratio-bound points; {violations} violations"
    );
    Ok((violations == 0, violations as f64, detail))
}

/// `P(a < Z < b)` for a standard normal, by quadrature.
fn normal_mass(a: f64, b: f64) -> Result<f64> {
    integrate(|x| normal_pdf(x, 0.0, 1.0), a, b, 1e-14)
}

fn huber_realizability(scale: Scale, seed: Seed) -> Result<Verdict> {
    let c1 = 0.01;
    let mut ok = true;
    let mut lines = Vec::new();
    for eps in [0.005, 0.01, 0.02] {
        for kappa in [20.0, 50.0, 100.0] {
            let c = marginal_normalizer(eps, c1, kappa)?;
            let in_range = c >= 1.0 - 1e-9 && c <= 1.0 / (1.0 - eps) + 1e-9;
            ok &= in_range;
            lines.push(format!("C(eps={eps},kappa={kappa})={c:.12}"));
        }
    }
    let configs: Vec<(f64, f64)> = match scale {
        Scale::Quick => vec![(0.01, 50.0)],
        Scale::Full => [0.005, 0.01, 0.02].iter().flat_map(|&e| [20.0, 50.0, 100.0].map(|k| (e, k))).collect(),
    };
    let n = scale.pick(100_000, 1_000_000);
    let width = 0.2;
    let edges = linspace(-5.0, 5.0, 51);
    let masses: Vec<f64> = edges.windows(2).map(|w| normal_mass(w[0], w[1])).collect::<Result<_>>()?;
    let mut worst = f64::INFINITY;
    let mut bins_checked = 0usize;
    for (idx, &(eps, kappa)) in configs.iter().enumerate() {
        let spec = SqInstanceSpec::new(kappa, eps, c1, basis_vector(2, 0))?;
        let data = sample_sq_joint(&spec, n, seed.derive("sq-joint", idx as u64))?;
        let mut hits = vec![0usize; masses.len()];
        for i in 0..n {
            let y = data.y(i);
            if (-5.0..5.0).contains(&y) {
                hits[(((y + 5.0) / width) as usize).min(masses.len() - 1)] += 1;
            }
        }
        for (h, m) in hits.iter().zip(&masses) {
            if *h < 500 {
                continue;
            }
            bins_checked += 1;
            let ratio = *h as f64 / (n as f64 * m);
            let floor = (1.0 - eps) * (1.0 - 4.0 / (*h as f64).sqrt());
            worst = worst.min(ratio / floor);
        }
    }
    ok &= worst >= 1.0 && bins_checked > 0;
    let detail = format!(
        "{}; histogram n={n} over {} configs, {bins_checked} bins: min ratio/floor {worst:.6}",
        lines.join(" "),
        configs.len()
    );
    Ok((ok, worst, detail))
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-3)
}

fn chi2_closed_forms(scale: Scale, seed: Seed) -> Result<Verdict> {
    let mut rng = seed.stream("chi2", 0);
    let tuples = scale.pick(10, 50);
    let breaks: Vec<f64> = (-32..=32).map(|k| 2.5 * k as f64).collect();
    let mut worst: f64 = 0.0;
    for _ in 0..tuples {
        let (m1, m2) = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let v2: f64 = rng.random_range(0.3..1.7);
        let v1: f64 = rng.random_range(0.3..(1.7f64).min(2.0 * v2 - 0.2));
        let logpdf = |x: f64, m: f64, v: f64| -0.5 * (x - m).powi(2) / v - 0.5 * (2.0 * std::f64::consts::PI * v).ln();
        let q = integrate_with_breaks(|x| (2.0 * logpdf(x, m1, v1) - logpdf(x, m2, v2)).exp(), &breaks, 1e-11)? - 1.0;
        worst = worst.max(rel_err(chi2_gaussians(m1, v1, m2, v2)?, q));
        let q = integrate_with_breaks(
            |x| (logpdf(x, m1, v1) + logpdf(x, m2, v2) - logpdf(x, 0.0, 1.0)).exp(),
            &breaks,
            1e-11,
        )? - 1.0;
        worst = worst.max(rel_err(chi2_pair_corr(m1, v1, m2, v2)?, q));
        // Mixture divergence on a random mixture from the grid.
        let s = rng.random_range(0.01..0.1);
        let mu = match rng.random_range(0..3) {
            0 => 0.0,
            1 => mid_signal_mean(rng.random_range(0.05..0.5), s),
            _ => 1.0 / (3.0 * (1.0 - rng.random_range(0.74..0.95f64)).sqrt()),
        };
        let mix = build_mixture(mu, s, GRID_EPS)?;
        let closed = chi2_mixture(&mix)?;
        // Each product p_i p_j / phi peaks where its exponent is stationary;
        // those points anchor the integration breaks.
        let mut mb = mix.support_breaks();
        for a in &mix.components {
            for b in &mix.components {
                let curv = 1.0 / a.var + 1.0 / b.var - 1.0;
                mb.push((a.mean / a.var + b.mean / b.var) / curv);
            }
        }
        let lo = mb.iter().cloned().fold(f64::MAX, f64::min) - 60.0;
        let hi = mb.iter().cloned().fold(f64::MIN, f64::max) + 60.0;
        mb.extend(linspace(lo, hi, 97));
        mb.sort_by(f64::total_cmp);
        mb.dedup();
        let q = integrate_with_breaks(
            |x| {
                let a = mix.pdf(x);
                if a == 0.0 {
                    0.0
                } else {
                    (2.0 * a.ln() - logpdf(x, 0.0, 1.0)).exp()
                }
            },
            &mb,
            1e-11 * (1.0 + closed.abs()),
        )? - 1.0;
        worst = worst.max(rel_err(closed, q));
    }
    let detail = format!("{tuples} tuples x 3 formulas; max relative deviation {worst:.3e}");
    Ok((worst <= 1e-6, worst, detail))
}

fn lowdeg_instance() -> Result<Verdict> {
    let r = Rational::new;
    let cases: [(Vec<Rational>, Rational, Rational, Rational, Rational); 10] = [
        (vec![r(3, 5), r(4, 5)], r(10, 1), r(1, 10), r(1, 1), r(1, 1)),
        (vec![r(5, 13), r(12, 13)], r(4, 1), r(1, 4), r(1, 2), r(0, 1)),
        (vec![r(1, 1), r(0, 1)], r(2, 1), r(1, 3), r(3, 1), r(1, 4)),
        (vec![r(2, 3), r(1, 3), r(2, 3)], r(20, 1), r(1, 10), r(2, 1), r(1, 1)),
        (vec![r(1, 3), r(2, 3), r(2, 3)], r(9, 2), r(1, 5), r(1, 1), r(3, 2)),
        (vec![r(0, 1), r(3, 5), r(4, 5)], r(100, 1), r(1, 20), r(7, 3), r(0, 1)),
        (vec![r(-3, 5), r(4, 5)], r(3, 1), r(2, 5), r(5, 1), r(2, 1)),
        (vec![r(8, 17), r(15, 17)], r(12, 1), r(1, 12), r(1, 3), r(1, 1)),
        (vec![r(2, 7), r(3, 7), r(6, 7)], r(7, 1), r(1, 7), r(1, 1), r(5, 7)),
        (vec![r(1, 2), r(1, 2), r(1, 2), r(1, 2)], r(50, 1), r(1, 25), r(4, 1), r(1, 9)),
    ];
    let mut exact_ok = 0;
    for (v, kappa, eps, delta, s2) in &cases {
        exact_ok += moment_matching_exact(v, *kappa, *eps, *delta, *s2)? as usize;
    }
    let mut flips_ok = 0;
    let mut worst_boundary: f64 = 0.0;
    let epss = [0.05, 0.1, 0.2, 0.3, 0.4];
    for eps in epss {
        let k_star = (1.0 - eps) / eps;
        let v = basis_vector(3, 1);
        let above = build_lowdeg_instance(3, k_star * (1.0 + 1e-6), eps, 1.0, 0.0, v.clone()).is_ok();
        let below = matches!(
            build_lowdeg_instance(3, k_star * (1.0 - 1e-6), eps, 1.0, 0.0, v.clone()),
            Err(Error::NotPsd { .. })
        );
        let at = build_lowdeg_instance(3, k_star, eps, 1.0, 0.0, v)?;
        let lam = at.corrupt_block().min_eigenvalue();
        worst_boundary = worst_boundary.max(lam.abs());
        flips_ok += (above && below && lam.abs() <= 1e-9) as usize;
    }
    let pass = exact_ok == cases.len() && flips_ok == epss.len();
    let detail = format!(
        "exact moment matching {exact_ok}/{}; PSD flips {flips_ok}/{}; max |min eigenvalue| at boundary {worst_boundary:.3e}",
        cases.len(),
        epss.len()
    );
    Ok((pass, worst_boundary, detail))
}

const HERMITE_MAX: usize = 10;

fn hermite_closed_form(scale: Scale, seed: Seed) -> Result<Verdict> {
    let tuples = scale.pick(5, 20);
    let n_mc = scale.pick(20_000, 200_000);
    let mut worst_gh: f64 = 0.0;
    let mut mc_fail = 0usize;
    let mut mc_checks = 0usize;
    for t in 0..tuples {
        let mut rng = seed.stream("hermite", t as u64);
        let sxx: f64 = rng.random_range(0.2..3.0);
        let syy: f64 = rng.random_range(0.3..3.0);
        let rho: f64 = rng.random_range(-0.9..0.9);
        let sxy = rho * (sxx * syy).sqrt();
        let sy = syy.sqrt();
        // Monte Carlo accumulators for every (k, l).
        let dim = HERMITE_MAX + 1;
        let mut sums = vec![0.0; dim * dim];
        let (a, c) = (sxy / sy, (sxx - sxy * sxy / syy).max(0.0).sqrt());
        let mut hx = vec![0.0; dim];
        let mut hy = vec![0.0; dim];
        for _ in 0..n_mc {
            let z1: f64 = rng.sample(rand_distr::StandardNormal);
            let z2: f64 = rng.sample(rand_distr::StandardNormal);
            let (x, y) = (a * z1 + c * z2, sy * z1);
            for k in 0..dim {
                hx[k] = hermite_poly(k, x)?;
                hy[k] = hermite_poly(k, y / sy)?;
            }
            for k in 0..dim {
                for l in 0..dim {
                    let p = hx[k] * hy[l];
                    sums[k * dim + l] += p;
                }
            }
        }
        for k in 0..dim {
            for l in 0..dim {
                let closed = hermite_cross_coeff(k, l, sxx, sxy, syy);
                let gh = gauss_hermite_2d(
                    |x, y| hermite_poly(k, x).unwrap_or(f64::NAN) * hermite_poly(l, y / sy).unwrap_or(f64::NAN),
                    sxx,
                    sxy,
                    syy,
                    16,
                )?;
                worst_gh = worst_gh.max((closed - gh).abs() / closed.abs().max(1.0));
                // The products are heavy-tailed at high degree, so the sample
                // variance is unreliable; the standard error uses the exact
                // second moment (degree <= 40, exact with 24 nodes).
                let second = gauss_hermite_2d(
                    |x, y| (hermite_poly(k, x).unwrap_or(f64::NAN) * hermite_poly(l, y / sy).unwrap_or(f64::NAN)).powi(2),
                    sxx,
                    sxy,
                    syy,
                    24,
                )?;
                let nf = n_mc as f64;
                let var = (second - closed * closed).max(0.0);
                let est = MomentEstimate { value: sums[k * dim + l] / nf, std_err: (var / nf).sqrt(), n_samples: n_mc };
                mc_checks += 1;
                mc_fail += !est.within(closed, 4.0) as usize;
            }
        }
    }
    let mut comb_ok = true;
    for p in (4..=12).step_by(2) {
        comb_ok &= combinatorial_coeff_check(p)?;
    }
    let pass = worst_gh <= 1e-8 && mc_fail == 0 && comb_ok;
    let detail = format!(
        "{tuples} covariances x {} (k,l); max Gauss-Hermite deviation {worst_gh:.3e}; Monte Carlo (n={n_mc}) outside 4 SE: {mc_fail}/{mc_checks}; combinatorial bound p<=12: {}",
        (HERMITE_MAX + 1) * (HERMITE_MAX + 1),
        if comb_ok { "holds" } else { "fails" }
    );
    Ok((pass, worst_gh, detail))
}

/// Parameters `(d, eps, kappa, D)` for the threshold check: `d` in
/// `[1e4, 1e8]`, a valid instance (`eps kappa >= 1 - eps`) and a lower
/// sample size `n_lo` with `n_lo eps^2 >= 1`.
fn advantage_tuple<R: Rng>(rng: &mut R) -> (f64, f64, f64, usize, f64, f64) {
    loop {
        let d = 10f64.powf(rng.random_range(4.0..8.0));
        let eps: f64 = rng.random_range(0.02..0.45);
        let kappa = 10f64.powf(rng.random_range(0.0..5.0));
        let big_d = if rng.random_bool(0.5) { 4 } else { 8 };
        if eps * kappa < 1.0 - eps {
            continue;
        }
        let scale = (d * eps * eps * kappa * kappa).min(eps * eps * d * d);
        let n_lo = 1e-2 * scale / (big_d as f64).powi(6);
        let n_hi = 1e4 * scale;
        if n_lo * eps * eps >= 1.0 {
            return (d, eps, kappa, big_d, n_lo, n_hi);
        }
    }
}

fn advantage_threshold(scale: Scale, seed: Seed) -> Result<Verdict> {
    let mut rng = seed.stream("advantage", 0);
    let tuples = scale.pick(10, 20);
    let mut crossed = 0;
    let mut worst_lo: f64 = 0.0;
    for _ in 0..tuples {
        let (d, eps, kappa, big_d, n_lo, n_hi) = advantage_tuple(&mut rng);
        let lo = advantage_bound(n_lo, d, eps, kappa, big_d)?;
        let hi = advantage_bound(n_hi, d, eps, kappa, big_d)?;
        worst_lo = worst_lo.max(lo);
        crossed += (lo < 1.0 && hi >= 1.0) as usize;
    }
    // Monotonicity around a base point.
    let (n0, d0, e0, k0, big_d0) = (1e4, 1e6, 0.1, 1e3, 8usize);
    let mut mono_fail = 0usize;
    let mut series = |vals: Vec<f64>, increasing: bool| {
        for w in vals.windows(2) {
            let ok = if increasing { w[1] >= w[0] } else { w[1] <= w[0] };
            mono_fail += !ok as usize;
        }
    };
    series(logspace(0.0, 12.0, 25).iter().map(|&n| advantage_bound(n, d0, e0, k0, big_d0)).collect::<Result<_>>()?, true);
    series(logspace(4.0, 9.0, 21).iter().map(|&d| advantage_bound(n0, d, e0, k0, big_d0)).collect::<Result<_>>()?, false);
    series(linspace(0.02, 0.45, 21).iter().map(|&e| advantage_bound(n0, d0, e, k0, big_d0)).collect::<Result<_>>()?, false);
    series(logspace(1.0, 6.0, 21).iter().map(|&k| advantage_bound(n0, d0, e0, k, big_d0)).collect::<Result<_>>()?, false);
    series((2..=8).map(|h| advantage_bound(n0, d0, e0, k0, 2 * h)).collect::<Result<_>>()?, true);
    let pass = crossed == tuples && mono_fail == 0;
    let detail = format!(
        "crossing between n_lo and n_hi in {crossed}/{tuples} tuples (max bound at n_lo {worst_lo:.3e}); monotonicity violations {mono_fail}"
    );
    Ok((pass, worst_lo, detail))
}

/// One row of the regression sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub kappa: f64,
    pub n: usize,
    pub estimator: &'static str,
    pub err_mean: f64,
    pub err_se: f64,
    pub err_over_sqrt_epskappa: f64,
}

/// Spiked covariance with a random spike, unit noise, and a random `beta`
/// with `|beta|_Sigma = 1`.
pub fn sweep_model(d: usize, kappa: f64, seed: Seed) -> Result<LinearModelSpec> {
    let mut rng = seed.rng();
    let v = random_unit_vector(d, &mut rng)?;
    let cov = Covariance::Spiked(SpikedCovariance::new(v, kappa)?);
    let b = random_unit_vector(d, &mut rng)?;
    let beta = &b / cov.quad_form(b.as_slice()).sqrt();
    LinearModelSpec::new(cov, beta, 1.0)
}

/// Mean Mahalanobis error of the zero, least-squares and robust estimators
/// under the targeted label attack, for every `(eps, kappa)` cell.
pub fn regression_sweep(
    eps_grid: &[f64],
    kappa_grid: &[f64],
    d: usize,
    n: usize,
    trials: usize,
    seed: Seed,
) -> Result<Vec<SweepRow>> {
    if trials == 0 {
        return Err(validation("trials must be >= 1"));
    }
    let mut rows = Vec::new();
    for (ie, &eps) in eps_grid.iter().enumerate() {
        for (ik, &kappa) in kappa_grid.iter().enumerate() {
            let cell = seed.derive("cell", (ie * kappa_grid.len() + ik) as u64);
            let errs: Vec<Result<[f64; 3]>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let ts = cell.derive("trial", t as u64);
                    let model = sweep_model(d, kappa, ts.derive("model", 0))?;
                    let clean = sample_clean(&model, n, ts.derive("clean", 0))?;
                    let spec = ContaminationSpec::new(eps, Adversary::TargetedLabels { scale: None, noise_sd: 1.0 })?;
                    let data = contaminate(&clean, &spec, ts.derive("adversary", 0))?;
                    let cfg = RegressorConfig::new(eps)?;
                    let zero = mahalanobis_error(&DVector::zeros(d), &model.beta, &model.covariance)?;
                    let ols = mahalanobis_error(&fit_ols(&data)?.beta_hat, &model.beta, &model.covariance)?;
                    let rob = mahalanobis_error(&fit_robust(&data, &cfg)?.beta_hat, &model.beta, &model.covariance)?;
                    Ok([zero, ols, rob])
                })
                .collect();
            let errs: Vec<[f64; 3]> = errs.into_iter().collect::<Result<_>>()?;
            for (j, name) in ["zero", "ols", "robust"].into_iter().enumerate() {
                let vals: Vec<f64> = errs.iter().map(|e| e[j]).collect();
                let est = MomentEstimate::from_values(&vals);
                rows.push(SweepRow {
                    eps,
                    kappa,
                    n,
                    estimator: name,
                    err_mean: est.value,
                    err_se: est.std_err,
                    err_over_sqrt_epskappa: est.value / (eps * kappa).sqrt(),
                });
            }
        }
    }
    Ok(rows)
}

fn robust_scaling(scale: Scale, seed: Seed) -> Result<Verdict> {
    let eps_grid: Vec<f64> = scale.pick(vec![0.05, 0.1], vec![0.02, 0.05, 0.1]);
    let kappa_grid: Vec<f64> = scale.pick(vec![1.0, 4.0], vec![1.0, 2.0, 4.0, 8.0]);
    let (d, n, trials) = scale.pick((20, 5000, 4), (50, 20_000, 20));
    let mut ok = true;
    let mut parts = Vec::new();
    let mut worst_span: f64 = 0.0;
    for &eps in &eps_grid {
        let kappas: Vec<f64> = kappa_grid.iter().copied().filter(|k| eps * k <= 0.8).collect();
        let rows = regression_sweep(&[eps], &kappas, d, n, trials, seed.derive("eps", eps.to_bits()))?;
        let rob: Vec<&SweepRow> = rows.iter().filter(|r| r.estimator == "robust").collect();
        let ols: Vec<&SweepRow> = rows.iter().filter(|r| r.estimator == "ols").collect();
        for (r, o) in rob.iter().zip(&ols) {
            ok &= r.err_over_sqrt_epskappa <= 5.0;
            ok &= o.err_mean >= 5.0 * r.err_mean;
            parts.push(format!(
                "eps={} kappa={}: robust {:.4e} ({:.3} sqrt(eps kappa)), ols {:.4e}",
                eps, r.kappa, r.err_mean, r.err_over_sqrt_epskappa, o.err_mean
            ));
        }
        let ratios: Vec<f64> = rob.iter().map(|r| r.err_over_sqrt_epskappa).collect();
        let span = ratios.iter().cloned().fold(f64::MIN, f64::max) / ratios.iter().cloned().fold(f64::MAX, f64::min);
        worst_span = worst_span.max(span);
        ok &= span <= 3.0;
    }
    let detail = format!("d={d} n={n} trials={trials}; {}; worst ratio span {worst_span:.3}", parts.join("; "));
    Ok((ok, worst_span, detail))
}

fn certificate_check(scale: Scale, seed: Seed) -> Result<Verdict> {
    let (d, eps) = (30usize, 0.1);
    let n = scale.pick(50_000, certificate_sample_size(d, eps));
    let trials = scale.pick(20, 100);
    let need = (0.97 * trials as f64).ceil() as usize;
    let cfg = CertificateConfig::new(eps)?;
    let mut ok = true;
    let mut parts = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for (idx, kappa) in [1.0, 8.0].into_iter().enumerate() {
        let cov = if kappa == 1.0 {
            Covariance::identity(d)
        } else {
            let v = random_unit_vector(d, &mut seed.stream("spike", 0))?;
            Covariance::Spiked(SpikedCovariance::new(v, kappa)?)
        };
        let model = LinearModelSpec::new(cov, DVector::zeros(d), 1.0)?;
        let data = sample_clean(&model, n, seed.derive("data", idx as u64))?;
        let reports = certify(&data, &model, &cfg, trials, seed.derive("directions", idx as u64))?;
        let big = reports.iter().filter(|r| r.g_u_size as f64 >= (1.0 - eps * eps) * n as f64).count();
        let spec = reports.iter().filter(|r| r.spectral_value <= r.bound_value).count();
        for r in &reports {
            worst_ratio = worst_ratio.max(r.spectral_value / r.bound_value);
        }
        ok &= big >= need && spec >= need;
        parts.push(format!("kappa={kappa}: |G_u| ok {big}/{trials}, spectral ok {spec}/{trials}"));
    }
    let detail = format!("d={d} eps={eps} n={n}; {}; max spectral/bound {worst_ratio:.4}", parts.join("; "));
    Ok((ok, worst_ratio, detail))
}

fn reduction_check(scale: Scale, seed: Seed) -> Result<Verdict> {
    let decisions = scale.pick(10, 20);
    let need = (0.9 * decisions as f64).ceil() as usize;
    let moment_trials = scale.pick(100, 500);
    let cfg = ReductionConfig::default();
    let points = [(100usize, 10.0, 0.1, 5000usize), (16, 8.0, 0.2, 2000)];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut worst_var_ratio: f64 = 0.0;
    for (idx, &(d, kappa, eps, n)) in points.iter().enumerate() {
        let ps = seed.derive("point", idx as u64);
        let v = random_unit_vector(d, &mut ps.stream("v", 0))?;
        // alpha = 1, sigma^2 = 1.
        let inst = build_lowdeg_instance(d, kappa, eps, kappa.sqrt(), 1.0, v)?;
        let regime = ReductionRegime::for_instance(d, kappa);
        let outcomes: Vec<Result<(bool, bool)>> = (0..decisions)
            .into_par_iter()
            .map(|k| {
                let alt = run_reduction(&inst, n, Hypothesis::Alternative, &DirectionEstimator::Oracle, &cfg, ps.derive("alt", k as u64))?;
                let null = run_reduction(&inst, n, Hypothesis::Null, &DirectionEstimator::Oracle, &cfg, ps.derive("null", k as u64))?;
                Ok((alt.decide_alternative, !null.decide_alternative))
            })
            .collect();
        let outcomes: Vec<(bool, bool)> = outcomes.into_iter().collect::<Result<_>>()?;
        let alt_right = outcomes.iter().filter(|o| o.0).count();
        let null_right = outcomes.iter().filter(|o| o.1).count();
        let stats: Vec<Result<f64>> = (0..moment_trials)
            .into_par_iter()
            .map(|k| {
                let data = sample_lowdeg(&inst, n, Hypothesis::Null, ps.derive("moments", k as u64))?;
                test_statistic(&data, &inst.v, regime, inst.alpha, inst.label_var)
            })
            .collect();
        let stats: Vec<f64> = stats.into_iter().collect::<Result<_>>()?;
        let est = MomentEstimate::from_values(&stats);
        let var = est.std_err.powi(2) * moment_trials as f64;
        let bound = null_variance(regime, n, inst.alpha);
        worst_var_ratio = worst_var_ratio.max(var / bound);
        ok &= alt_right >= need && null_right >= need && est.within(0.0, 4.0) && var <= 1.5 * bound;
        parts.push(format!(
            "{} (d={d}, kappa={kappa}, eps={eps}, n={n}): alt {alt_right}/{decisions}, null {null_right}/{decisions}, null mean {:.3e} (se {:.3e}), var/bound {:.4}",
            regime.as_str(),
            est.value,
            est.std_err,
            var / bound
        ));
    }
    Ok((ok, worst_var_ratio, parts.join("; ")))
}
