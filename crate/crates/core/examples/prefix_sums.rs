//! Exact van der Corput prefix sums against direct summation.

use num_rational::BigRational;
use qmclab::errorlab::vdc_prefix_sum;
use qmclab::sequences::van_der_corput;

fn main() {
    for n in [1u64, 2, 3, 7, 100, 1000, 4095] {
        let direct: BigRational = (0..n).map(|i| van_der_corput(i).to_ratio()).sum();
        let closed = vdc_prefix_sum(n);
        let half = BigRational::new(n.into(), 2.into());
        println!("n = {n:4}: sum = {closed}  minus n/2 = {}  agrees {}", &closed - half, closed == direct);
    }
}
