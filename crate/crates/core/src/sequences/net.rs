use crate::error::{Error, Result};

use super::coord::Point;

/// The half-open box `prod_j [c_j / b^k_j, (c_j + 1) / b^k_j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryInterval {
    k: Vec<u32>,
    c: Vec<u128>,
    base: u64,
}

impl ElementaryInterval {
    pub fn new(k: Vec<u32>, c: Vec<u128>, base: u64) -> Result<Self> {
        if base < 2 {
            return Err(Error::InvalidBase(base));
        }
        if k.len() != c.len() {
            return Err(Error::DimensionMismatch {
                expected: k.len(),
                actual: c.len(),
            });
        }
        for (&kj, &cj) in k.iter().zip(&c) {
            let cells = (base as u128).checked_pow(kj);
            if cells.map_or(false, |n| cj >= n) {
                return Err(Error::InvalidArgument(format!(
                    "c = {cj} is not below {base}^{kj}"
                )));
            }
        }
        Ok(ElementaryInterval { k, c, base })
    }

    /// Base-2 interval.
    pub fn dyadic(k: Vec<u32>, c: Vec<u128>) -> Result<Self> {
        Self::new(k, c, 2)
    }

    pub fn k(&self) -> &[u32] {
        &self.k
    }

    pub fn c(&self) -> &[u128] {
        &self.c
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// `|k|`; the volume is `base^-|k|`.
    pub fn order(&self) -> u32 {
        self.k.iter().sum()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim()
            && x
                .coords()
                .iter()
                .zip(self.k.iter().zip(&self.c))
                .all(|(xj, (&kj, &cj))| xj.cell_index(self.base, kj) == cj)
    }
}

/// All `k` in `N_0^d` with `|k| = total`, in lexicographic order.
pub fn compositions(total: u32, d: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=remaining {
            prefix.push(first);
            rec(remaining - first, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(total, d, &mut Vec::with_capacity(d), &mut out);
    out
}

/// True iff every elementary interval with `|k| <= m - t` holds exactly
/// `b^(m - |k|)` of the `b^m` points.
pub fn is_tmd_net(points: &[Point], t: u32, m: u32, d: usize, b: u64) -> Result<bool> {
    if b < 2 {
        return Err(Error::InvalidBase(b));
    }
    let n = (b as usize)
        .checked_pow(m)
        .ok_or_else(|| Error::InvalidArgument(format!("{b}^{m} points is too many")))?;
    if points.len() != n {
        return Err(Error::WrongPointCount {
            expected: n,
            actual: points.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: p.dim(),
        });
    }
    if t > m {
        return Ok(true);
    }
    let mut counts = Vec::new();
    for order in 0..=m - t {
        let expected = b.pow(m - order) as usize;
        let cells = b.pow(order) as usize;
        for k in compositions(order, d) {
            counts.clear();
            counts.resize(cells, 0usize);
            for p in points {
                let mut flat = 0usize;
                for (xj, &kj) in p.coords().iter().zip(&k) {
                    flat = flat * b.pow(kj) as usize + xj.cell_index(b, kj) as usize;
                }
                counts[flat] += 1;
            }
            if counts.iter().any(|&c| c != expected) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Smallest `t` for which the `b^m` points form a `(t, m, d)`-net.
pub fn smallest_t(points: &[Point], m: u32, d: usize, b: u64) -> Result<u32> {
    for t in 0..=m {
        if is_tmd_net(points, t, m, d, b)? {
            return Ok(t);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{
        builtin_direction_numbers, halton_point, sobol_generator_set, van_der_corput, Coordinate,
        Sequence,
    };

    #[test]
    fn compositions_count_is_binomial() {
        assert_eq!(compositions(3, 1), vec![vec![3]]);
        assert_eq!(compositions(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        // binom(m + d - 1, d - 1)
        assert_eq!(compositions(6, 3).len(), 28);
        assert_eq!(compositions(5, 4).len(), 56);
        assert_eq!(compositions(0, 0).len(), 1);
    }

    #[test]
    fn interval_validation_and_membership() {
        assert!(ElementaryInterval::dyadic(vec![2], vec![4]).is_err());
        let e = ElementaryInterval::dyadic(vec![1, 2], vec![1, 3]).unwrap();
        assert_eq!(e.order(), 3);
        let inside = Point::new(vec![
            Coordinate::Dyadic(van_der_corput(1)),  // 1/2
            Coordinate::Dyadic(van_der_corput(3)),  // 3/4
        ]);
        assert!(e.contains(&inside));
        let outside = Point::new(vec![
            Coordinate::Dyadic(van_der_corput(1)),
            Coordinate::Dyadic(van_der_corput(2)), // 1/4
        ]);
        assert!(!e.contains(&outside));
    }

    #[test]
    fn van_der_corput_prefixes_are_zero_nets() {
        let seq = Sequence::VanDerCorput { base: 2 };
        for m in 0..=10 {
            let pts = seq.points(1 << m).unwrap();
            assert!(is_tmd_net(&pts, 0, m, 1, 2).unwrap());
        }
    }

    #[test]
    fn repeated_origin_is_not_a_net() {
        for m in 1..6 {
            let pts = vec![Point::origin(1); 1 << m];
            assert!(!is_tmd_net(&pts, 0, m, 1, 2).unwrap());
        }
    }

    #[test]
    fn wrong_point_count_is_an_error() {
        let pts = vec![Point::origin(1); 5];
        assert!(matches!(
            is_tmd_net(&pts, 0, 3, 1, 2),
            Err(Error::WrongPointCount { expected: 8, actual: 5 })
        ));
    }

    #[test]
    fn sobol_sixteen_points_form_a_zero_net() {
        let g = sobol_generator_set(&builtin_direction_numbers(), 2, 4).unwrap();
        let pts = Sequence::Sobol(g).points(16).unwrap();
        assert!(is_tmd_net(&pts, 0, 4, 2, 2).unwrap());
    }

    #[test]
    fn halton_in_base_three_is_a_net_in_one_dimension() {
        let pts: Vec<Point> = (0..81)
            .map(|i| {
                let p = halton_point(i, &[3]).unwrap();
                p
            })
            .collect();
        assert!(is_tmd_net(&pts, 0, 4, 1, 3).unwrap());
    }

    #[test]
    fn two_dimensional_halton_is_not_a_binary_net() {
        let pts: Vec<Point> = (0..16).map(|i| halton_point(i, &[2, 3]).unwrap()).collect();
        assert!(!is_tmd_net(&pts, 0, 4, 2, 2).unwrap());
        assert!(smallest_t(&pts, 4, 2, 2).unwrap() > 0);
    }
}
