//! Smallest `t` for which the first `2^m` Sobol' points form a `(t, m, d)`-net.

use qmclab::sequences::{builtin_direction_numbers, Sequence, SequenceKind, smallest_t};

fn main() -> qmclab::Result<()> {
    let records = builtin_direction_numbers();
    for d in 2..=4 {
        let seq = Sequence::build(SequenceKind::Sobol, d, 1 << 10, &records)?;
        let ts: Vec<u32> = (1..=10)
            .map(|m| smallest_t(&seq.points(1 << m)?, m, d, 2))
            .collect::<qmclab::Result<_>>()?;
        println!("d = {d}: t for m = 1..10 is {ts:?}");
    }
    Ok(())
}
