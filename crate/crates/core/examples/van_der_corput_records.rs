//! Records of `n |mean - 1/2|` for the van der Corput sequence on f(x) = x.

use qmclab::errorlab::{n_l, prop2_check, running_trace, Scaling};
use qmclab::integrands::IntegrandSpec;
use qmclab::sequences::{Sequence, SequenceKind};

fn main() -> qmclab::Result<()> {
    let n_max = 1 << 12;
    let seq = Sequence::build(SequenceKind::VanDerCorput, 1, n_max, &[])?;
    let trace = running_trace(&seq, &IntegrandSpec::linear(), n_max)?;
    let records = trace.records(Scaling::N);
    println!("{} records up to n = {n_max}", records.len());

    for l in 1..=5 {
        let n = n_l(l)? as u64;
        let e = trace.at(n).expect("within trace");
        println!(
            "L = {l}: n_L = {n:5}  scaled error {:.4}  record {}",
            e.scaled_error.to_f64(),
            records.contains(n)
        );
    }

    for l in [5, 10, 20, 30] {
        let c = prop2_check(l)?;
        println!(
            "L = {l:2}: n |mean - 1/2| = {:.4} >= bitlen/8 = {}  ({})",
            c.lhs_over_log * (c.n as f64).ln(),
            c.rhs,
            if c.pass { "ok" } else { "violated" }
        );
    }
    Ok(())
}
