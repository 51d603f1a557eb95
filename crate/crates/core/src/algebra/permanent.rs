//! Ryser permanents over column multisets.
//!
//! Identical columns are grouped first. For distinct columns `c_j` with
//! multiplicities `m_j` (total `N`), Ryser's formula becomes
//!
//! ```text
//! per = sum over 0 <= s_j <= m_j of (-1)^(N - sum s) prod_j C(m_j, s_j) prod_i (sum_j s_j c_j[i])
//! ```
//!
//! and the vectors `s` are walked in reflected mixed-radix Gray order, so
//! every step changes one row-sum vector by a single column. With all
//! multiplicities one this is the classic Gray-code Ryser.

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use super::IntMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DIM: usize = 24;
pub const MAX_DIM_ENV: &str = "TWCHOOSE_MAX_DIM";
const HARD_MAX_DIM: usize = 60;
const PARALLEL_TERMS: u128 = 1 << 15;
/// Moduli up to this size use discrete-log bookkeeping.
const LOG_TABLE_LIMIT: u64 = 1 << 16;

/// Permanent evaluator with a dimension cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermanentKernel {
    max_dim: usize,
}

impl Default for PermanentKernel {
    fn default() -> Self {
        PermanentKernel {
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl PermanentKernel {
    pub fn new(max_dim: usize) -> Result<Self> {
        if max_dim == 0 || max_dim > HARD_MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "permanent cap must lie in 1..={HARD_MAX_DIM}, got {max_dim}"
            )));
        }
        Ok(PermanentKernel { max_dim })
    }

    /// Cap from `TWCHOOSE_MAX_DIM` when set, the default otherwise.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_DIM_ENV) {
            Ok(raw) => {
                let cap = raw.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidParameter(format!("{MAX_DIM_ENV}={raw:?} is not an integer"))
                })?;
                PermanentKernel::new(cap)
            }
            Err(_) => Ok(PermanentKernel::default()),
        }
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    fn check(&self, m: &IntMatrix) -> Result<()> {
        if m.rows() != m.cols() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if m.rows() > self.max_dim {
            return Err(Error::DimensionCap {
                dim: m.rows(),
                cap: self.max_dim,
            });
        }
        Ok(())
    }

    pub fn exact(&self, m: &IntMatrix) -> Result<BigInt> {
        self.check(m)?;
        let Some(plan) = Plan::new(m) else {
            return Ok(BigInt::zero());
        };
        Ok(plan.run(ExactAcc::default, |a, b| a.merge(b), Plan::sweep).finish())
    }

    pub fn modular(&self, m: &IntMatrix, p: u64) -> Result<u64> {
        if !is_prime(p) || p >= 1 << 31 {
            return Err(Error::NotPrime(p));
        }
        self.check(m)?;
        let Some(plan) = Plan::new(m) else {
            return Ok(0);
        };
        if p <= LOG_TABLE_LIMIT {
            let table = LogTable::new(p);
            let sweep = |plan: &Plan, free: usize, fixed: &[u64], acc: &mut ModAcc| plan.sweep_log(&table, free, fixed, acc);
            return Ok(plan.run(|| ModAcc::new(p), |a, b| a.merge(b), sweep).value);
        }
        Ok(plan.run(|| ModAcc::new(p), |a, b| a.merge(b), Plan::sweep).value)
    }
}

/// Exact permanent under the default cap.
pub fn permanent_exact(m: &IntMatrix) -> Result<BigInt> {
    PermanentKernel::default().exact(m)
}

/// `per(m) mod p` in `[0, p)` under the default cap.
pub fn permanent_mod(m: &IntMatrix, p: u64) -> Result<u64> {
    PermanentKernel::default().modular(m, p)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Distinct columns in sparse form with their multiplicities.
struct Plan {
    dim: usize,
    columns: Vec<Vec<(usize, i64)>>,
    mults: Vec<u64>,
    binom: Vec<Vec<u64>>,
}

impl Plan {
    /// `None` when the permanent is trivially zero.
    fn new(m: &IntMatrix) -> Option<Plan> {
        let dim = m.rows();
        let mut columns: Vec<Vec<(usize, i64)>> = Vec::new();
        let mut mults: Vec<u64> = Vec::new();
        let mut index = std::collections::HashMap::new();
        for j in 0..dim {
            let col: Vec<(usize, i64)> = (0..dim)
                .filter_map(|i| {
                    let x = m.get(i, j);
                    (x != 0).then_some((i, x))
                })
                .collect();
            if col.is_empty() {
                return None;
            }
            match index.get(&col) {
                Some(&k) => mults[k] += 1,
                None => {
                    index.insert(col.clone(), columns.len());
                    columns.push(col);
                    mults.push(1);
                }
            }
        }
        // The Gray walk moves low coordinates most often; give them the sparsest columns.
        let mut order: Vec<usize> = (0..columns.len()).collect();
        order.sort_by_key(|&k| columns[k].len());
        let columns: Vec<Vec<(usize, i64)>> = order.iter().map(|&k| columns[k].clone()).collect();
        let mults: Vec<u64> = order.iter().map(|&k| mults[k]).collect();
        let mut covered = vec![false; dim];
        for col in &columns {
            for &(i, _) in col {
                covered[i] = true;
            }
        }
        if covered.iter().any(|c| !c) {
            return None;
        }
        let binom = mults
            .iter()
            .map(|&mj| (0..=mj).map(|s| binomial(mj, s)).collect())
            .collect();
        Some(Plan {
            dim,
            columns,
            mults,
            binom,
        })
    }

    fn run<A, F, M, S>(&self, init: F, merge: M, sweep: S) -> A
    where
        A: Accumulator + Send,
        F: Fn() -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
        S: Fn(&Plan, usize, &[u64], &mut A) + Sync + Send,
    {
        if self.dim == 0 {
            let mut acc = init();
            acc.add_term(true, 1, &[]);
            return acc;
        }
        let k = self.columns.len();
        let total: u128 = self.mults.iter().map(|&m| m as u128 + 1).product();
        // Fix the trailing coordinates for parallel chunks.
        let mut split = k;
        if total >= PARALLEL_TERMS && k >= 2 {
            let mut chunks = 1u128;
            while split > 1 && chunks < 64 {
                split -= 1;
                chunks *= self.mults[split] as u128 + 1;
            }
        }
        let prefixes = mixed_radix(&self.mults[split..]);
        if prefixes.len() == 1 {
            let mut acc = init();
            sweep(self, split, &prefixes[0], &mut acc);
            return acc;
        }
        prefixes
            .par_iter()
            .map(|fixed| {
                let mut acc = init();
                sweep(self, split, fixed, &mut acc);
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(init(), merge)
    }

    /// Gray walk over coordinates `0..free` with the rest fixed to `fixed`.
    fn sweep<A: Accumulator>(&self, free: usize, fixed: &[u64], acc: &mut A) {
        let mut rows = vec![0i64; self.dim];
        let mut weight = 1u64;
        let mut chosen = 0u64;
        for (off, &s) in fixed.iter().enumerate() {
            let j = free + off;
            for &(i, x) in &self.columns[j] {
                rows[i] += s as i64 * x;
            }
            weight *= self.binom[j][s as usize];
            chosen += s;
        }
        let n = self.dim as u64;
        let mut s = vec![0u64; free];
        let mut up = vec![true; free];
        loop {
            acc.add_term((n - chosen).is_multiple_of(2), weight, &rows);
            let Some(j) = (0..free).find(|&j| if up[j] { s[j] < self.mults[j] } else { s[j] > 0 }) else {
                break;
            };
            for flip in up.iter_mut().take(j) {
                *flip = !*flip;
            }
            let old = s[j];
            let delta: i64 = if up[j] { 1 } else { -1 };
            s[j] = (old as i64 + delta) as u64;
            for &(i, x) in &self.columns[j] {
                rows[i] += delta * x;
            }
            weight = weight / self.binom[j][old as usize] * self.binom[j][s[j] as usize];
            chosen = (chosen as i64 + delta) as u64;
        }
    }

    /// Same walk modulo a small prime. Row sums are kept as residues with a
    /// running zero count and discrete-log sum, so a step costs the support
    /// of one column instead of a full product.
    fn sweep_log(&self, t: &LogTable, free: usize, fixed: &[u64], acc: &mut ModAcc) {
        let p = t.p as i64;
        let mut rows = vec![0i64; self.dim];
        let mut chosen = 0u64;
        let mut w = LogProduct::default();
        for (off, &s) in fixed.iter().enumerate() {
            let j = free + off;
            for &(i, x) in &self.columns[j] {
                rows[i] += s as i64 * x;
            }
            w.mul(t, self.binom[j][s as usize] % t.p);
            chosen += s;
        }
        let mut res: Vec<u32> = rows.iter().map(|r| r.rem_euclid(p) as u32).collect();
        let mut prod = LogProduct::default();
        for &r in &res {
            prod.mul(t, r as u64);
        }
        // Per column: (row, residue added on a step up, residue added on a step down).
        let steps: Vec<Vec<(usize, u32, u32)>> = self.columns[..free]
            .iter()
            .map(|col| {
                col.iter()
                    .map(|&(i, x)| (i, x.rem_euclid(p) as u32, (-x).rem_euclid(p) as u32))
                    .collect()
            })
            .collect();
        let binom: Vec<Vec<u64>> = self.binom[..free]
            .iter()
            .map(|b| b.iter().map(|&x| x % t.p).collect())
            .collect();
        for b in &binom {
            w.mul(t, b[0]);
        }
        let pu = t.p as u32;
        let n = self.dim as u64;
        let mut s = vec![0u64; free];
        let mut up = vec![true; free];
        loop {
            if prod.zeros == 0 && w.zeros == 0 {
                let v = t.exp[((prod.log + w.log) % t.order) as usize];
                acc.value = if (n - chosen).is_multiple_of(2) {
                    (acc.value + v) % t.p
                } else {
                    (acc.value + t.p - v) % t.p
                };
            }
            let Some(j) = (0..free).find(|&j| if up[j] { s[j] < self.mults[j] } else { s[j] > 0 }) else {
                break;
            };
            for flip in up.iter_mut().take(j) {
                *flip = !*flip;
            }
            let old = s[j];
            if up[j] {
                s[j] += 1;
                chosen += 1;
                for &(i, add, _) in &steps[j] {
                    let mut new = res[i] + add;
                    if new >= pu {
                        new -= pu;
                    }
                    prod.replace(t, res[i], new);
                    res[i] = new;
                }
            } else {
                s[j] -= 1;
                chosen -= 1;
                for &(i, _, add) in &steps[j] {
                    let mut new = res[i] + add;
                    if new >= pu {
                        new -= pu;
                    }
                    prod.replace(t, res[i], new);
                    res[i] = new;
                }
            }
            w.replace(t, binom[j][old as usize] as u32, binom[j][s[j] as usize] as u32);
        }
    }
}

/// Discrete logarithms modulo a prime.
struct LogTable {
    p: u64,
    order: u64,
    log: Vec<u32>,
    exp: Vec<u64>,
}

impl LogTable {
    fn new(p: u64) -> LogTable {
        let order = p - 1;
        let generator = (1..p)
            .find(|&g| {
                let mut x = 1u64;
                for k in 1..=order {
                    x = x * g % p;
                    if x == 1 {
                        return k == order;
                    }
                }
                false
            })
            .expect("prime modulus has a generator");
        // log[0] stays 0; zeros are counted separately.
        let mut log = vec![0u32; p as usize];
        let mut exp = vec![0u64; order as usize];
        let mut x = 1u64;
        for k in 0..order {
            exp[k as usize] = x;
            log[x as usize] = k as u32;
            x = x * generator % p;
        }
        LogTable { p, order, log, exp }
    }
}

/// A product of residues as (number of zero factors, sum of logs of the rest).
#[derive(Default)]
struct LogProduct {
    zeros: u32,
    log: u64,
}

impl LogProduct {
    fn mul(&mut self, t: &LogTable, r: u64) {
        if r == 0 {
            self.zeros += 1;
        } else {
            self.log += t.log[r as usize] as u64;
        }
    }

    #[inline]
    fn replace(&mut self, t: &LogTable, old: u32, new: u32) {
        self.zeros = self.zeros + u32::from(new == 0) - u32::from(old == 0);
        self.log = self.log + t.log[new as usize] as u64 - t.log[old as usize] as u64;
    }
}

fn mixed_radix(mults: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for &m in mults {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..=m).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out
}

trait Accumulator {
    fn add_term(&mut self, positive: bool, weight: u64, rows: &[i64]);
}

#[derive(Default)]
struct ExactAcc {
    small: i128,
    big: BigInt,
}

impl ExactAcc {
    fn push(&mut self, term: i128) {
        match self.small.checked_add(term) {
            Some(v) => self.small = v,
            None => {
                self.big += BigInt::from(self.small);
                self.small = term;
            }
        }
    }

    fn merge(mut self, other: ExactAcc) -> ExactAcc {
        self.big += other.big;
        self.big += BigInt::from(self.small);
        self.big += BigInt::from(other.small);
        self.small = 0;
        self
    }

    fn finish(self) -> BigInt {
        self.big + BigInt::from(self.small)
    }
}

impl Accumulator for ExactAcc {
    fn add_term(&mut self, positive: bool, weight: u64, rows: &[i64]) {
        let mut prod: i128 = weight as i128;
        for (k, &r) in rows.iter().enumerate() {
            if r == 0 {
                return;
            }
            match prod.checked_mul(r as i128) {
                Some(v) => prod = v,
                None => {
                    let mut big = BigInt::from(prod);
                    for &r in &rows[k..] {
                        big *= r;
                    }
                    if positive {
                        self.big += big;
                    } else {
                        self.big -= big;
                    }
                    return;
                }
            }
        }
        if positive {
            self.push(prod);
        } else if let Some(neg) = prod.checked_neg() {
            self.push(neg);
        } else {
            self.big -= BigInt::from(prod);
        }
    }
}

struct ModAcc {
    p: u64,
    value: u64,
}

impl ModAcc {
    fn new(p: u64) -> Self {
        ModAcc { p, value: 0 }
    }

    fn merge(mut self, other: ModAcc) -> ModAcc {
        self.value = (self.value + other.value) % self.p;
        self
    }
}

impl Accumulator for ModAcc {
    fn add_term(&mut self, positive: bool, weight: u64, rows: &[i64]) {
        let p = self.p;
        let mut prod = weight % p;
        for &r in rows {
            if prod == 0 {
                return;
            }
            prod = prod * (r.rem_euclid(p as i64) as u64) % p;
        }
        self.value = if positive {
            (self.value + prod) % p
        } else {
            (self.value + p - prod) % p
        };
    }
}
