//! Small version of the error-versus-(eps, kappa) table: the filtered
//! estimator's error divided by sqrt(eps kappa) stays within a narrow band.

use robreg::suite::regression_sweep;
use robreg::Seed;

fn main() -> robreg::Result<()> {
    let rows = regression_sweep(&[0.05, 0.1], &[1.0, 4.0], 20, 5000, 5, Seed(1))?;
    println!("{:>5} {:>5} {:>7} {:>10} {:>10}", "eps", "kappa", "est", "err", "err/sqrt");
    for r in rows {
        println!("{:>5} {:>5} {:>7} {:>10.4} {:>10.4}", r.eps, r.kappa, r.estimator, r.err_mean, r.err_over_sqrt_epskappa);
    }
    Ok(())
}
