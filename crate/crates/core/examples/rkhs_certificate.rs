//! Worst-case errors with equal and optimal weights and their lower bounds.

use qmclab::rkhs::{certificate, equal_weights, optimal_weights, to_f64_points, wce};
use qmclab::sequences::{builtin_direction_numbers, Sequence, SequenceKind};

fn main() -> qmclab::Result<()> {
    let seq = Sequence::build(SequenceKind::Sobol, 2, 256, &builtin_direction_numbers())?;
    for n in [16, 64, 256] {
        let pts = to_f64_points(&seq.points(n)?);
        let eq = wce(&pts, &equal_weights(pts.len()))?;
        let (w, opt) = optimal_weights(&pts)?;
        let c = certificate(&pts, &w)?;
        println!("n = {n:3}: equal {eq:.5}  optimal {opt:.5}  lower bound {:.5}", c.lower_bound);
        for s in &c.steps {
            println!("    {:16} {:.5}  {}", s.step, s.bound, s.holds);
        }
    }
    Ok(())
}
