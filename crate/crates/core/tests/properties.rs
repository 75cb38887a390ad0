use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use qmclab::errorlab::{record_positions, vdc_prefix_sum};
use qmclab::experiments::MRange;
use qmclab::gf2::{BitMatrix, Echelon};
use qmclab::integrands::Threshold;
use qmclab::netcount::{
    count_in_box, solve_count, truncate, CountMethod, CountOptions, LinearSystemGF2,
};
use qmclab::rkhs;
use qmclab::sequences::{
    builtin_direction_numbers, radical_inverse, sobol_generator_set, van_der_corput,
    DyadicRational, GeneratorSet,
};

fn gens(d: usize) -> GeneratorSet {
    sobol_generator_set(&builtin_direction_numbers(), d, 64).unwrap()
}

fn points(max_n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, d), 1..max_n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solution_count_matches_enumeration(
        rows in prop::collection::vec(0u128..256, 0..10),
        target in prop::collection::vec(any::<bool>(), 10),
    ) {
        let m = 8;
        let target = target[..rows.len()].to_vec();
        let matrix = BitMatrix::from_rows(rows.clone(), m).unwrap();
        let sys = LinearSystemGF2::new(matrix.clone(), target.clone()).unwrap();
        let direct = (0..1u128 << m)
            .filter(|&x| {
                let y = matrix.mul_vec(x);
                target.iter().enumerate().all(|(r, &t)| ((y >> r) & 1 == 1) == t)
            })
            .count();
        prop_assert_eq!(solve_count(&sys, m).unwrap(), BigUint::from(direct));

        let mut e = Echelon::new();
        for (&r, &t) in rows.iter().zip(&target) {
            e.insert(r, t);
        }
        prop_assert_eq!(e.is_consistent(), direct > 0);
        if e.is_consistent() {
            prop_assert_eq!(e.rank(), matrix.rank());
            prop_assert_eq!(direct, 1usize << (m - e.rank()));
        }
    }

    #[test]
    fn counts_are_monotone_in_the_box(d in 1usize..=3, m in 1u32..=24, a in any::<u32>(), b in any::<u32>()) {
        let g = gens(d);
        let mask = (1u128 << m) - 1;
        let (lo, hi) = {
            let (x, y) = (a as u128 & mask, b as u128 & mask);
            (x.min(y), x.max(y))
        };
        let c_lo = count_in_box(&g, d, m, &DyadicRational::new(lo, m).unwrap()).unwrap();
        let c_hi = count_in_box(&g, d, m, &DyadicRational::new(hi, m).unwrap()).unwrap();
        prop_assert!(c_lo <= c_hi);
        prop_assert!(c_hi <= BigUint::one() << m as usize);
    }

    #[test]
    fn one_dimensional_counts_are_exact(m in 1u32..=60, a in any::<u64>()) {
        let a = a as u128 & ((1u128 << m) - 1);
        let c = count_in_box(&gens(1), 1, m, &DyadicRational::new(a, m).unwrap()).unwrap();
        prop_assert_eq!(c, BigUint::from(a));
    }

    #[test]
    fn counting_methods_agree(d in 1usize..=3, m in 1u32..=12, a in any::<u16>()) {
        let a = DyadicRational::new(a as u128 & ((1u128 << m) - 1), m).unwrap();
        let g = gens(d);
        let naive = CountOptions { workers: 1, method: CountMethod::Naive };
        let par = CountOptions { workers: 3, method: CountMethod::Incremental };
        let x = count_in_box(&g, d, m, &a).unwrap();
        prop_assert_eq!(&x, &qmclab::netcount::count_in_box_with(&g, d, m, &a, naive).unwrap());
        prop_assert_eq!(&x, &qmclab::netcount::count_in_box_with(&g, d, m, &a, par).unwrap());
    }

    #[test]
    fn truncation_brackets_alpha(p in 1i64..1000, extra in 1i64..1000, m in 1u32..=100) {
        let alpha = BigRational::new(p.into(), (p + extra).into());
        let a = truncate(&alpha, m).unwrap().to_ratio();
        let step = BigRational::new(1.into(), num_bigint::BigInt::one() << m as usize);
        prop_assert!(a <= alpha);
        prop_assert!(alpha < a + step);
    }

    #[test]
    fn radical_inverse_stays_in_unit_interval(i in any::<u32>(), base in 2u64..40) {
        let x = radical_inverse(i as u64, base).unwrap().to_ratio();
        prop_assert!(x >= BigRational::zero() && x < BigRational::one());
    }

    #[test]
    fn van_der_corput_blocks_are_permutations(m in 1u32..=12, block in 0u64..64) {
        let n = 1u64 << m;
        let mut cells: Vec<u128> = (block * n..(block + 1) * n)
            .map(|i| van_der_corput(i).cell_index(m))
            .collect();
        cells.sort_unstable();
        prop_assert_eq!(cells, (0..n as u128).collect::<Vec<_>>());
    }

    #[test]
    fn prefix_sum_closed_form(n in 1u64..3000) {
        let direct: BigRational = (0..n).map(|i| van_der_corput(i).to_ratio()).sum();
        prop_assert_eq!(vdc_prefix_sum(n), direct);
    }

    #[test]
    fn records_strictly_increase(values in prop::collection::vec(0u32..50, 1..60)) {
        let pos = record_positions(&values);
        prop_assert_eq!(pos.first(), Some(&0));
        for w in pos.windows(2) {
            prop_assert!(values[w[1]] > values[w[0]]);
            prop_assert!(values[w[0] + 1..w[1]].iter().all(|v| *v <= values[w[0]]));
        }
    }

    #[test]
    fn rational_thresholds_round_trip(p in 1i64..500, extra in 1i64..500) {
        let t = Threshold::rational(p, p + extra).unwrap();
        prop_assert_eq!(Threshold::parse(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn m_ranges_round_trip(a in 1u32..200, len in 0u32..50) {
        let r = MRange::new(a, a + len).unwrap();
        prop_assert_eq!(r.to_string().parse::<MRange>().unwrap(), r);
    }

    #[test]
    fn kernel_is_symmetric_and_gram_is_psd(pts in points(12, 3)) {
        let g = rkhs::gram_matrix(&pts).unwrap();
        prop_assert!((&g - g.transpose()).abs().max() == 0.0);
        let eig = g.symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&l| l > -1e-10));
    }

    #[test]
    fn optimal_weights_never_lose(pts in points(16, 2)) {
        let n = pts.len();
        let e = rkhs::wce(&pts, &rkhs::equal_weights(n)).unwrap();
        if let Ok((_, r)) = rkhs::optimal_weights(&pts) {
            prop_assert!(r <= e + 1e-12);
            prop_assert!(r >= 0.0);
        }
    }

    #[test]
    fn fooling_function_vanishes_on_points(pts in points(20, 2)) {
        let h = rkhs::build_fooling(&pts).unwrap();
        for x in &pts {
            prop_assert_eq!(h.eval(x), 0);
        }
        let norm = rkhs::h_l2_norm_sq(&h);
        prop_assert!(norm <= BigRational::from_integer(h.k_vectors().into()));
    }

    #[test]
    fn certificate_chain_holds(pts in points(24, 2)) {
        let a = rkhs::equal_weights(pts.len());
        let c = rkhs::certificate(&pts, &a).unwrap();
        prop_assert!(c.steps.iter().all(|s| s.holds));
        prop_assert!(c.lower_bound <= c.wce + rkhs::CERTIFICATE_TOLERANCE);
    }
}
