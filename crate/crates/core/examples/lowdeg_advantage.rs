//! Degree-D advantage bound as the sample size grows past the threshold.

use robreg::lowdeg::advantage_bound;

fn main() -> robreg::Result<()> {
    let (d, eps, kappa): (f64, f64, f64) = (1e6, 0.1, 1e3);
    let scale = (d * eps * eps * kappa * kappa).min(eps * eps * d * d);
    println!("min(d eps^2 kappa^2, eps^2 d^2) = {scale:.3e}");
    for degree in [4, 8] {
        for exp in 0..=9 {
            let n = 10f64.powi(exp);
            let b = advantage_bound(n, d, eps, kappa, degree)?;
            println!("D={degree} n=1e{exp}: {b:.4e}{}", if b > 1.0 { "  (above 1)" } else { "" });
        }
    }
    Ok(())
}
