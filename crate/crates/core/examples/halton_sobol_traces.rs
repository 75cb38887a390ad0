//! Scaled errors of Halton and Sobol' points on the centered product and a box.

use qmclab::errorlab::{running_trace, Scaling};
use qmclab::integrands::{IntegrandSpec, Threshold};
use qmclab::sequences::{builtin_direction_numbers, Sequence, SequenceKind};

fn main() -> qmclab::Result<()> {
    let n_max = 1 << 13;
    let records = builtin_direction_numbers();
    let product = IntegrandSpec::centered_product(2)?;
    let corner = IntegrandSpec::box_indicator(vec![Threshold::rational(2, 3)?; 2])?;

    for kind in [SequenceKind::Halton, SequenceKind::Sobol] {
        let seq = Sequence::build(kind, 2, n_max, &records)?;
        for (name, f, scaling) in [
            ("product", &product, Scaling::N),
            ("box", &corner, Scaling::NOverLog),
        ] {
            let trace = running_trace(&seq, f, n_max)?;
            let rec = trace.records(scaling);
            let last = trace.at(n_max).expect("full trace");
            println!(
                "{:7} {name:8} records {:3}  last at {:5}  n|err| at N = {:.4}",
                format!("{kind:?}"),
                rec.len(),
                rec.last().unwrap_or(0),
                last.scaled_error.to_f64()
            );
        }
    }
    Ok(())
}
