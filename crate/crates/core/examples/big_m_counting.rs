//! Exact signed scaled errors of Sobol' nets with up to 2^100 points.

use num_rational::BigRational;
use qmclab::netcount::{netcount_row, CountOptions};
use qmclab::sequences::{builtin_direction_numbers, sobol_generator_set};

fn main() -> qmclab::Result<()> {
    let alpha = BigRational::new(2.into(), 3.into());
    let records = builtin_direction_numbers();
    for (d, m_max) in [(2, 100), (3, 100), (4, 50)] {
        let gens = sobol_generator_set(&records, d, m_max)?;
        for m in [10, 20, m_max / 2, m_max] {
            let row = netcount_row(&gens, d, m, &alpha, CountOptions::default())?;
            println!(
                "d = {d}, m = {m:3}: count {:>32}  count - 2^m (A/2^m)^d = {:>10.4}",
                row.count.to_string(),
                row.error.to_f64()
            );
        }
    }
    Ok(())
}
