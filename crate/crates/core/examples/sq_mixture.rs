//! Build the one-dimensional moment-matched mixtures across the three mean
//! regimes and check their moments and chi-square divergence from N(0, 1).

use robreg::oracles::quad_moment_on;
use robreg::sq::{build_mixture, chi2_mixture, marginal_normalizer};

fn main() -> robreg::Result<()> {
    let (sigma_s2, eps) = (0.05, 0.01);
    println!("{:>7} {:>6} {:>9} {:>10} {:>10} {:>10} {:>10}", "mu_s", "regime", "rate", "m1", "m2", "m3", "chi2");
    for mu in [0.0, 0.05, 0.3, 0.55, 0.7, 1.2] {
        let mix = build_mixture(mu, sigma_s2, eps)?;
        let breaks = mix.support_breaks();
        let m: Vec<f64> = (1..=3).map(|p| quad_moment_on(|x| mix.pdf(x), p, &breaks, 1e-10)).collect::<Result<_, _>>()?;
        println!(
            "{mu:>7.3} {:>6} {:>9.5} {:>10.2e} {:>10.7} {:>10.2e} {:>10.3e}",
            mix.regime.as_str(),
            mix.eps_mu,
            m[0],
            m[1],
            m[2],
            chi2_mixture(&mix)?
        );
    }
    println!("label normalizer at kappa = 50: {:.9}", marginal_normalizer(eps, 0.01, 50.0)?);
    Ok(())
}
