//! Cross-module oracle checks.

use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;

use super::{PointSource, WeightScheme};
use crate::error::Result;
use crate::errorlab;
use crate::netcount::{count_in_box_with, truncate, CountMethod, CountOptions};
use crate::rkhs;
use crate::sequences::{
    direction_numbers_from_env, is_tmd_net, smallest_t, sobol_generator_set, sobol_point,
    van_der_corput, DirectionNumberRecord, SequenceKind, DIRECTION_NUMBERS_ENV,
};

/// Smallest `t` of the first `2^m` Sobol' points, `m = 1..=12`, for the
/// shipped direction numbers.
const SMALLEST_T_D3: [u32; 12] = [0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1];
const SMALLEST_T_D4: [u32; 12] = [0, 1, 2, 2, 2, 2, 2, 3, 3, 2, 2, 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Largest dimension for the counting checks.
    pub d: usize,
    /// Largest `m` for the counting checks.
    pub m: u32,
    pub workers: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            d: 3,
            m: 12,
            workers: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

pub const CHECK_DIRECTION_NUMBERS: &str = "direction numbers";
pub const CHECK_BRUTE_FORCE: &str = "brute-force counting";
pub const CHECK_METHODS: &str = "incremental vs naive counting";
pub const CHECK_WORKERS: &str = "worker independence";
pub const CHECK_PREFIX_SUM: &str = "van der Corput prefix sums";
pub const CHECK_PROP2: &str = "n_L lower bound";
pub const CHECK_NETS: &str = "net certificates";
pub const CHECK_KERNEL_MEAN: &str = "kernel mean";
pub const CHECK_CHAINS: &str = "certificate chains";
pub const CHECK_OPTIMAL: &str = "optimal weights";

fn outcome(name: &str, r: Result<String>) -> CheckResult {
    match r {
        Ok(detail) => CheckResult {
            name: name.into(),
            passed: true,
            detail,
        },
        Err(e) => CheckResult {
            name: name.into(),
            passed: false,
            detail: e.to_string(),
        },
    }
}

fn fail(msg: String) -> crate::Error {
    crate::Error::CheckFailed(msg)
}

/// Runs every check and reports each one; never stops at the first failure.
pub fn verify(cfg: &VerifyConfig) -> VerifyReport {
    let mut checks = Vec::new();
    let records = direction_numbers_from_env();
    let source = std::env::var(DIRECTION_NUMBERS_ENV).unwrap_or_else(|_| "builtin".into());
    checks.push(outcome(
        CHECK_DIRECTION_NUMBERS,
        records
            .as_ref()
            .map(|r| format!("{} records from {source}", r.len()))
            .map_err(|e| fail(e.to_string())),
    ));
    let with_records = |f: &dyn Fn(&[DirectionNumberRecord]) -> Result<String>| match &records {
        Ok(r) => f(r),
        Err(e) => Err(fail(format!("no direction numbers: {e}"))),
    };
    checks.push(outcome(CHECK_BRUTE_FORCE, with_records(&|r| brute_force(r, cfg))));
    checks.push(outcome(CHECK_METHODS, with_records(&|r| methods_agree(r, cfg))));
    checks.push(outcome(CHECK_WORKERS, with_records(&|r| workers_agree(r, cfg))));
    checks.push(outcome(CHECK_PREFIX_SUM, prefix_sums(1 << 12)));
    checks.push(outcome(CHECK_PROP2, prop2(12)));
    checks.push(outcome(CHECK_NETS, with_records(&|r| net_certificates(r, cfg.m.min(10)))));
    checks.push(outcome(CHECK_KERNEL_MEAN, kernel_mean()));
    checks.push(outcome(CHECK_CHAINS, with_records(&certificate_chains)));
    checks.push(outcome(CHECK_OPTIMAL, with_records(&optimal_below_equal)));
    VerifyReport { checks }
}

fn alphas() -> [BigRational; 3] {
    [(2, 3), (3, 5), (1, 2)].map(|(p, q)| BigRational::new(p.into(), q.into()))
}

fn brute_force(records: &[DirectionNumberRecord], cfg: &VerifyConfig) -> Result<String> {
    let opts = CountOptions {
        workers: cfg.workers,
        ..CountOptions::default()
    };
    let mut cases = 0;
    for d in 1..=cfg.d {
        let full = sobol_generator_set(records, d, cfg.m)?;
        for m in 1..=cfg.m {
            let gens = full.truncated(m)?;
            let pts = (0..1u128 << m)
                .map(|i| sobol_point(i, &gens))
                .collect::<Result<Vec<_>>>()?;
            for alpha in alphas() {
                let a = truncate(&alpha, m)?;
                let direct = pts
                    .iter()
                    .filter(|p| p.coords().iter().all(|x| x.lt_dyadic(&a)))
                    .count();
                let count = count_in_box_with(&gens, d, m, &a, opts)?;
                if count != BigUint::from(direct) {
                    return Err(fail(format!(
                        "d = {d}, m = {m}, alpha = {alpha}: {count} vs {direct}"
                    )));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} boxes, d <= {}, m <= {}", cfg.d, cfg.m))
}

fn methods_agree(records: &[DirectionNumberRecord], cfg: &VerifyConfig) -> Result<String> {
    let m_max = cfg.m.min(10);
    let naive = CountOptions {
        workers: 1,
        method: CountMethod::Naive,
    };
    for d in 1..=cfg.d.min(3) {
        let gens = sobol_generator_set(records, d, m_max)?;
        for m in 1..=m_max {
            for alpha in alphas() {
                let a = truncate(&alpha, m)?;
                let x = count_in_box_with(&gens, d, m, &a, CountOptions::default())?;
                let y = count_in_box_with(&gens, d, m, &a, naive)?;
                if x != y {
                    return Err(fail(format!("d = {d}, m = {m}: {x} vs {y}")));
                }
            }
        }
    }
    Ok(format!("d <= {}, m <= {m_max}", cfg.d.min(3)))
}

fn workers_agree(records: &[DirectionNumberRecord], cfg: &VerifyConfig) -> Result<String> {
    let (d, m) = (cfg.d.max(2), 40);
    let gens = sobol_generator_set(records, d, m)?;
    let a = truncate(&alphas()[0], m)?;
    let one = count_in_box_with(&gens, d, m, &a, CountOptions::default())?;
    for workers in [2, 4, cfg.workers.max(1)] {
        let opts = CountOptions {
            workers,
            ..CountOptions::default()
        };
        let c = count_in_box_with(&gens, d, m, &a, opts)?;
        if c != one {
            return Err(fail(format!("{workers} workers: {c} vs {one}")));
        }
    }
    Ok(format!("d = {d}, m = {m}: {one} points"))
}

fn prefix_sums(n_max: u64) -> Result<String> {
    let mut sum = BigRational::zero();
    for n in 1..=n_max {
        sum += van_der_corput(n - 1).to_ratio();
        let closed = errorlab::vdc_prefix_sum(n);
        if closed != sum {
            return Err(fail(format!("n = {n}: closed form {closed}, direct {sum}")));
        }
    }
    Ok(format!("n <= {n_max}"))
}

fn prop2(l_max: u32) -> Result<String> {
    for l in 1..=l_max {
        let c = errorlab::prop2_check(l)?;
        if !c.pass {
            return Err(fail(format!("L = {l}: {} < {}", c.lhs, c.rhs)));
        }
    }
    Ok(format!("1 <= L <= {l_max}"))
}

fn net_certificates(records: &[DirectionNumberRecord], m_max: u32) -> Result<String> {
    let m_max = m_max.max(2);
    for (d, pinned) in [(2, None), (3, Some(&SMALLEST_T_D3)), (4, Some(&SMALLEST_T_D4))] {
        let gens = sobol_generator_set(records, d, m_max)?;
        for m in 1..=m_max {
            let g = gens.truncated(m)?;
            let pts = (0..1u128 << m)
                .map(|i| sobol_point(i, &g))
                .collect::<Result<Vec<_>>>()?;
            match pinned {
                None => {
                    if !is_tmd_net(&pts, 0, m, d, 2)? {
                        return Err(fail(format!("d = 2, m = {m}: not a (0, m, 2)-net")));
                    }
                }
                Some(ts) => {
                    let t = smallest_t(&pts, m, d, 2)?;
                    if t != ts[m as usize - 1] {
                        return Err(fail(format!(
                            "d = {d}, m = {m}: smallest t is {t}, expected {}",
                            ts[m as usize - 1]
                        )));
                    }
                }
            }
        }
    }
    Ok(format!("t = 0 for d = 2 and pinned t for d = 3, 4, m <= {m_max}"))
}

fn kernel_mean() -> Result<String> {
    // Composite Simpson on each side of the kink at y = x.
    let simpson = |a: f64, b: f64, x: f64| {
        let k = 2000;
        let h = (b - a) / k as f64;
        let mut s = rkhs::kernel_1d(x, a) + rkhs::kernel_1d(x, b);
        for i in 1..k {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * rkhs::kernel_1d(x, a + i as f64 * h);
        }
        s * h / 3.0
    };
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        let v = simpson(0.0, x, x) + simpson(x, 1.0, x);
        worst = worst.max((v - 1.0).abs());
    }
    if worst > 1e-10 {
        return Err(fail(format!("integral of K(x, .) off by {worst:e}")));
    }
    Ok(format!("max deviation {worst:e}"))
}

fn sources() -> [PointSource; 3] {
    [
        PointSource::Sequence(SequenceKind::Sobol),
        PointSource::Sequence(SequenceKind::Halton),
        PointSource::Random { seed: 0 },
    ]
}

fn certificate_chains(records: &[DirectionNumberRecord]) -> Result<String> {
    let mut count = 0;
    for src in sources() {
        for d in 1..=3 {
            for weights in [WeightScheme::Equal, WeightScheme::Optimal] {
                let rows = super::rkhs_rows(src, d, &[8, 32, 64], weights, true, records)?;
                for r in rows {
                    let c = r.certificate.expect("requested");
                    if let Some(s) = c.steps.iter().find(|s| !s.holds) {
                        return Err(fail(format!("{src}, d = {d}, n = {}: {}", r.n, s.step)));
                    }
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} point sets"))
}

fn optimal_below_equal(records: &[DirectionNumberRecord]) -> Result<String> {
    for src in sources() {
        for d in 1..=3 {
            let pts = src.points(d, 64, records)?;
            for n in [8, 16, 32, 64] {
                let e = rkhs::wce(&pts[..n], &rkhs::equal_weights(n))?;
                let (_, r) = rkhs::optimal_weights(&pts[..n])?;
                if r > e + 1e-12 {
                    return Err(fail(format!("{src}, d = {d}, n = {n}: r_n {r} > wce {e}")));
                }
            }
        }
    }
    Ok("r_n <= equal-weight wce, n <= 64, d <= 3".into())
}
