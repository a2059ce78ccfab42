//! Integer partitions, monomial symmetric polynomials and Jack polynomials.
//!
//! Jack polynomials `P_τ^{(α)}` are expanded in the monomial basis,
//! `P_τ = Σ_{λ ≤ τ} u_{τλ}(α) m_λ`, with the coefficients obtained from the
//! eigen-equation of the Laplace–Beltrami type operator
//!
//! ```text
//! D(α) = (α/2) Σ_i x_i² ∂_i² + Σ_{i≠j} x_i² / (x_i − x_j) ∂_i
//! ```
//!
//! which is upper triangular on monomials in dominance order. Writing
//! `D m_μ = E_μ m_μ + Σ_{λ<μ} d_{μλ} m_λ`, the coefficients follow from
//! `(E_τ − E_λ) u_{τλ} = Σ_{λ<μ≤τ} d_{μλ} u_{τμ}`. The off-diagonal weight
//! `d_{μλ}` is `λ_i − λ_j + 2t` for every position pair `i < j` and shift
//! `t ≥ 1` such that sorting `(…, λ_i + t, …, λ_j − t, …)` gives `μ`.
//!
//! Expansions are cached per `(α, degree, max_len)`; the cache is shared
//! between threads behind a mutex.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest modulus for which partitions and Jack expansions are produced.
pub const MAX_DEGREE: u32 = 30;

/// A weakly decreasing sequence of positive integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    /// Builds a partition from weakly decreasing parts. Trailing zeroes are
    /// dropped.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!(
                "partition parts must be weakly decreasing, got {parts:?}"
            )));
        }
        Ok(Partition(parts))
    }

    /// Sorts arbitrary naturals into a partition.
    pub fn from_unsorted(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Number of nonzero parts, `l(τ)`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|τ|`, the sum of the parts.
    pub fn modulus(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Part `i` (zero based), zero past the length.
    pub fn part(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// The transposed partition `τ′`.
    pub fn conjugate(&self) -> Self {
        let first = self.part(0);
        let parts = (1..=first)
            .map(|j| self.0.iter().filter(|&&p| p >= j).count() as u32)
            .collect();
        Partition(parts)
    }

    /// `λ! = Π λ_i!`.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&p| factorial(p)).product()
    }

    /// `(2λ)! = Π (2λ_i)!`.
    pub fn double_factorial(&self) -> f64 {
        self.0.iter().map(|&p| factorial(2 * p)).product()
    }

    /// Cells `(i, j)` of the Young diagram, one based.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (1..=p).map(move |j| (i as u32 + 1, j)))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, p) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn check_degree(n: u32) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::Capacity {
            what: format!("partitions of modulus {n}"),
            limit: MAX_DEGREE as usize,
        });
    }
    Ok(())
}

/// All partitions of `n` with at most `max_len` parts, in reverse
/// lexicographic order (`(3), (2,1), (1,1,1)`).
pub fn partitions_up_to(n: u32, max_len: usize) -> Result<Vec<Partition>> {
    if max_len == 0 {
        return Err(Error::invalid("max_len must be at least 1"));
    }
    check_degree(n)?;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(max_len);
    fill_partitions(n, n, max_len, &mut current, &mut out);
    Ok(out)
}

fn fill_partitions(
    remaining: u32,
    largest: u32,
    slots: usize,
    current: &mut Vec<u32>,
    out: &mut Vec<Partition>,
) {
    if remaining == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    if slots == 0 {
        return;
    }
    for p in (1..=largest.min(remaining)).rev() {
        // remaining mass must fit into the free slots
        if (p as usize) * slots < remaining as usize {
            break;
        }
        current.push(p);
        fill_partitions(remaining - p, p, slots - 1, current, out);
        current.pop();
    }
}

/// Dominance order `λ ≤ τ`: every partial sum of `λ` is bounded by the
/// corresponding partial sum of `τ`. Partitions of different moduli are
/// never comparable and give `false`.
pub fn dominance_leq(lambda: &Partition, tau: &Partition) -> bool {
    if lambda.modulus() != tau.modulus() {
        return false;
    }
    let len = lambda.len().max(tau.len());
    let (mut sl, mut st) = (0u32, 0u32);
    for i in 0..len {
        sl += lambda.part(i);
        st += tau.part(i);
        if sl > st {
            return false;
        }
    }
    true
}

/// `M(λ, N) = N! / Π l_i!`, the number of distinct arrangements of `λ`
/// padded with zeroes to `N` entries.
pub fn multinomial_m(lambda: &Partition, n: usize) -> Result<u128> {
    if lambda.len() > n {
        return Err(Error::invalid(format!(
            "partition {lambda} has more than {n} parts"
        )));
    }
    // product of binomials C(placed + k, k) over multiplicity blocks
    let mut result: u128 = 1;
    let mut placed: u128 = 0;
    let zeros = (n - lambda.len()) as u128;
    for k in multiplicities(lambda)
        .into_iter()
        .chain(std::iter::once(zeros))
    {
        for i in 1..=k {
            result = result
                .checked_mul(placed + i)
                .ok_or_else(|| Error::Overflow(format!("M({lambda}, {n})")))?
                / i;
        }
        placed += k;
    }
    Ok(result)
}

fn multiplicities(lambda: &Partition) -> Vec<u128> {
    let mut out: Vec<u128> = Vec::new();
    let mut prev = None;
    for &p in lambda.parts() {
        if prev == Some(p) {
            *out.last_mut().unwrap() += 1;
        } else {
            out.push(1);
            prev = Some(p);
        }
    }
    out
}

/// Monomial symmetric polynomial `m_λ(x)`.
pub fn monomial_eval(lambda: &Partition, x: &[f64]) -> Result<f64> {
    if lambda.len() > x.len() {
        return Err(Error::invalid(format!(
            "partition {lambda} has more parts than the {} variables",
            x.len()
        )));
    }
    Ok(monomial_eval_unchecked(lambda, x))
}

/// Sums `Π x_i^{a_i}` over the distinct rearrangements `a` of `λ` by
/// assigning parts to variables one at a time; the state is the vector of
/// parts still unassigned, indexed in mixed radix.
fn monomial_eval_unchecked(lambda: &Partition, x: &[f64]) -> f64 {
    let n = x.len();
    // distinct values (including zero) with multiplicities
    let mut values: Vec<u32> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for &p in lambda.parts() {
        if values.last() == Some(&p) {
            *counts.last_mut().unwrap() += 1;
        } else {
            values.push(p);
            counts.push(1);
        }
    }
    if n > lambda.len() {
        values.push(0);
        counts.push(n - lambda.len());
    }
    let mut radix = Vec::with_capacity(counts.len());
    let mut size = 1usize;
    for &c in &counts {
        radix.push(size);
        size *= c + 1;
    }
    // state index encodes how many of each value were already used
    let mut table = vec![0.0; size];
    table[0] = 1.0;
    let mut next = vec![0.0; size];
    for &xv in x {
        next.iter_mut().for_each(|v| *v = 0.0);
        let powers: Vec<f64> = values.iter().map(|&p| xv.powi(p as i32)).collect();
        for (state, &acc) in table.iter().enumerate() {
            if acc == 0.0 {
                continue;
            }
            for (k, &c) in counts.iter().enumerate() {
                let used = (state / radix[k]) % (c + 1);
                if used < c {
                    next[state + radix[k]] += acc * powers[k];
                }
            }
        }
        std::mem::swap(&mut table, &mut next);
    }
    table[size - 1]
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!(
            "Jack parameter must be positive, got {alpha}"
        )));
    }
    Ok(())
}

/// Lower hook product `c_τ(α) = Π (α(τ_i − j) + τ′_j − i + 1)`.
pub fn hook_c(tau: &Partition, alpha: f64) -> f64 {
    ln_hook_c(tau, alpha).exp()
}

/// Upper hook product `c′_τ(α) = Π (α(τ_i − j + 1) + τ′_j − i)`.
pub fn hook_c_prime(tau: &Partition, alpha: f64) -> f64 {
    ln_hook_c_prime(tau, alpha).exp()
}

pub fn ln_hook_c(tau: &Partition, alpha: f64) -> f64 {
    let conj = tau.conjugate();
    tau.cells()
        .map(|(i, j)| {
            let arm = f64::from(tau.part(i as usize - 1) - j);
            let leg = f64::from(conj.part(j as usize - 1) - i);
            (alpha * arm + leg + 1.0).ln()
        })
        .sum()
}

pub fn ln_hook_c_prime(tau: &Partition, alpha: f64) -> f64 {
    let conj = tau.conjugate();
    tau.cells()
        .map(|(i, j)| {
            let arm = f64::from(tau.part(i as usize - 1) - j);
            let leg = f64::from(conj.part(j as usize - 1) - i);
            (alpha * (arm + 1.0) + leg).ln()
        })
        .sum()
}

/// Generalized Pochhammer symbol `(b)_τ^{(α)}`, evaluated as the rising
/// product `Π_i Π_{j≤τ_i} (b − (i−1)/α + j − 1)`.
pub fn gen_pochhammer(b: f64, tau: &Partition, alpha: f64) -> Result<f64> {
    let (ln_abs, sign) = ln_gen_pochhammer(b, tau, alpha)?;
    Ok(sign * ln_abs.exp())
}

/// Log-magnitude and sign of `(b)_τ^{(α)}`.
pub fn ln_gen_pochhammer(b: f64, tau: &Partition, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let mut ln_abs = 0.0;
    let mut sign = 1.0;
    for (i, &p) in tau.parts().iter().enumerate() {
        let base = b - i as f64 / alpha;
        if base <= 0.0 && (base - base.round()).abs() < 1e-12 {
            return Err(Error::domain(format!(
                "generalized Pochhammer pole: b − {i}/α = {base} is a nonpositive integer"
            )));
        }
        for j in 0..p {
            let f = base + f64::from(j);
            if f < 0.0 {
                sign = -sign;
            }
            ln_abs += f.abs().ln();
        }
    }
    Ok((ln_abs, sign))
}

/// Polynomial expanded in monomial symmetric polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialExpansion {
    pub coeffs: BTreeMap<Partition, f64>,
    pub degree: u32,
}

impl MonomialExpansion {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.coeffs
            .iter()
            .filter(|(lambda, _)| lambda.len() <= x.len())
            .map(|(lambda, c)| Ok(c * monomial_eval(lambda, x)?))
            .sum()
    }
}

/// Jack coefficients `u_{τλ}(α)` for every pair of partitions of one degree
/// with at most `max_len` parts.
#[derive(Debug)]
pub struct JackTable {
    degree: u32,
    alpha: f64,
    max_len: usize,
    partitions: Vec<Partition>,
    index: HashMap<Partition, usize>,
    /// Row `a` holds `(b, u_{τ_a λ_b})` for the nonzero coefficients.
    rows: Vec<Vec<(usize, f64)>>,
}

type CacheKey = (u64, u32, usize);

fn jack_cache() -> &'static Mutex<HashMap<CacheKey, Arc<JackTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<JackTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl JackTable {
    /// Fetches (or builds and caches) the table for `(degree, α, max_len)`.
    pub fn get(degree: u32, alpha: f64, max_len: usize) -> Result<Arc<JackTable>> {
        check_alpha(alpha)?;
        check_degree(degree)?;
        let key = (alpha.to_bits(), degree, max_len);
        if let Some(t) = jack_cache().lock().unwrap().get(&key) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(Self::build(degree, alpha, max_len)?);
        let mut cache = jack_cache().lock().unwrap();
        Ok(Arc::clone(cache.entry(key).or_insert(table)))
    }

    fn build(degree: u32, alpha: f64, max_len: usize) -> Result<Self> {
        let partitions = partitions_up_to(degree, max_len)?;
        let index: HashMap<Partition, usize> = partitions
            .iter()
            .enumerate()
            .map(|(k, p)| (p.clone(), k))
            .collect();
        let count = partitions.len();

        // E_λ up to an additive constant that cancels in differences
        let eigen: Vec<f64> = partitions
            .iter()
            .map(|p| {
                p.parts()
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| {
                        let l = f64::from(l);
                        0.5 * alpha * l * (l - 1.0) - i as f64 * l
                    })
                    .sum()
            })
            .collect();

        // raising moves λ → μ with their weights, independent of τ
        let raises: Vec<Vec<(usize, f64)>> = partitions
            .iter()
            .map(|lambda| {
                let mut acc: HashMap<usize, f64> = HashMap::new();
                let parts = lambda.parts();
                for i in 0..parts.len() {
                    for j in i + 1..parts.len() {
                        for t in 1..=parts[j] {
                            let mut mu = parts.to_vec();
                            mu[i] += t;
                            mu[j] -= t;
                            let mu = Partition::from_unsorted(mu);
                            let weight = f64::from(parts[i] - parts[j] + 2 * t);
                            *acc.entry(index[&mu]).or_insert(0.0) += weight;
                        }
                    }
                }
                let mut v: Vec<_> = acc.into_iter().collect();
                v.sort_unstable_by_key(|&(k, _)| k);
                v
            })
            .collect();

        let mut rows = Vec::with_capacity(count);
        let mut u = vec![0.0; count];
        for a in 0..count {
            u.iter_mut().for_each(|v| *v = 0.0);
            u[a] = 1.0;
            // reverse-lex order is a linear extension of dominance, so
            // every μ > λ has a smaller index than λ
            for b in a + 1..count {
                let s: f64 = raises[b].iter().map(|&(c, w)| w * u[c]).sum();
                if s != 0.0 {
                    u[b] = s / (eigen[a] - eigen[b]);
                }
            }
            rows.push(
                u.iter()
                    .enumerate()
                    .skip(a)
                    .filter(|(_, &v)| v != 0.0)
                    .map(|(k, &v)| (k, v))
                    .collect(),
            );
        }
        Ok(JackTable {
            degree,
            alpha,
            max_len,
            partitions,
            index,
            rows,
        })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// Partitions of the table, reverse lexicographic.
    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Nonzero `(λ index, u_{τλ})` pairs for the partition at `tau_index`.
    pub fn row(&self, tau_index: usize) -> &[(usize, f64)] {
        &self.rows[tau_index]
    }

    /// `u_{τλ}` by index; zero outside the triangular support.
    pub fn coefficient(&self, tau_index: usize, lambda_index: usize) -> f64 {
        self.rows[tau_index]
            .iter()
            .find(|&&(k, _)| k == lambda_index)
            .map_or(0.0, |&(_, v)| v)
    }

    /// Monomial polynomials `m_λ(x)` for every partition of the table.
    pub fn monomials_at(&self, x: &[f64]) -> Vec<f64> {
        self.partitions
            .iter()
            .map(|p| {
                if p.len() > x.len() {
                    0.0
                } else {
                    monomial_eval_unchecked(p, x)
                }
            })
            .collect()
    }

    /// `P_τ(x)` for every partition of the table.
    pub fn eval_all(&self, x: &[f64]) -> Vec<f64> {
        let m = self.monomials_at(x);
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(k, u)| u * m[k]).sum())
            .collect()
    }
}

/// Monomial expansion of the Jack polynomial `P_τ^{(α)}` in `n` variables.
pub fn jack_in_monomial_basis(tau: &Partition, alpha: f64, n: usize) -> Result<MonomialExpansion> {
    if tau.len() > n {
        return Err(Error::invalid(format!(
            "partition {tau} has more than {n} parts"
        )));
    }
    let table = JackTable::get(tau.modulus(), alpha, n)?;
    let a = table
        .index_of(tau)
        .expect("partition present in its own table");
    let coeffs = table
        .row(a)
        .iter()
        .map(|&(k, u)| (table.partitions[k].clone(), u))
        .collect();
    Ok(MonomialExpansion {
        coeffs,
        degree: tau.modulus(),
    })
}

/// Evaluates `P_τ^{(α)}(x)`. The polynomial vanishes identically when `τ`
/// has more parts than there are variables.
pub fn jack_eval(tau: &Partition, alpha: f64, x: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    if tau.len() > x.len() {
        return Ok(0.0);
    }
    jack_in_monomial_basis(tau, alpha, x.len())?.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn enumeration_small_cases() {
        assert_eq!(partitions_up_to(0, 3).unwrap(), vec![Partition::empty()]);
        assert_eq!(partitions_up_to(3, 2).unwrap(), vec![p(&[3]), p(&[2, 1])]);
        assert_eq!(partitions_up_to(6, 3).unwrap().len(), 7);
        assert!(matches!(
            partitions_up_to(31, 2),
            Err(Error::Capacity { .. })
        ));
        assert!(partitions_up_to(3, 0).is_err());
    }

    #[test]
    fn enumeration_matches_brute_force() {
        // every weakly decreasing tuple of length ≤ max_len with entries ≤ n
        fn brute(n: u32, max_len: usize) -> Vec<Partition> {
            let mut out = Vec::new();
            let total = (n as usize + 1).pow(max_len as u32);
            for code in 0..total {
                let mut c = code;
                let mut v = Vec::new();
                for _ in 0..max_len {
                    v.push((c % (n as usize + 1)) as u32);
                    c /= n as usize + 1;
                }
                if v.iter().sum::<u32>() == n && v.windows(2).all(|w| w[0] >= w[1]) {
                    out.push(Partition::new(v).unwrap());
                }
            }
            out.sort();
            out.dedup();
            out
        }
        for n in 0..=8 {
            for len in 1..=4 {
                let mut got = partitions_up_to(n, len).unwrap();
                got.sort();
                assert_eq!(got, brute(n, len), "n={n} len={len}");
            }
        }
    }

    #[test]
    fn partition_normalization() {
        assert_eq!(p(&[2, 1, 0, 0]).parts(), &[2, 1]);
        assert!(Partition::new(vec![1, 2]).is_err());
        assert_eq!(p(&[3, 1]).conjugate(), p(&[2, 1, 1]));
        assert_eq!(Partition::empty().conjugate(), Partition::empty());
    }

    #[test]
    fn dominance_examples() {
        assert!(dominance_leq(&p(&[1, 1, 1]), &p(&[3])));
        assert!(!dominance_leq(&p(&[3]), &p(&[1, 1, 1])));
        assert!(dominance_leq(&p(&[2, 2]), &p(&[3, 1])));
        assert!(!dominance_leq(&p(&[2]), &p(&[3])));
        // incomparable pair
        assert!(!dominance_leq(&p(&[3, 1, 1, 1]), &p(&[2, 2, 2])));
        assert!(!dominance_leq(&p(&[2, 2, 2]), &p(&[3, 1, 1, 1])));
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(multinomial_m(&p(&[2]), 3).unwrap(), 3);
        assert_eq!(multinomial_m(&p(&[1, 1, 1]), 3).unwrap(), 1);
        assert_eq!(multinomial_m(&p(&[2, 1]), 3).unwrap(), 6);
        assert_eq!(multinomial_m(&Partition::empty(), 4).unwrap(), 1);
        assert!(multinomial_m(&p(&[1, 1]), 1).is_err());
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(monomial_eval(&p(&[1]), &[1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(monomial_eval(&p(&[2, 1]), &[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(
            monomial_eval(&Partition::empty(), &[0.3, 7.0]).unwrap(),
            1.0
        );
        assert!(monomial_eval(&p(&[1, 1, 1]), &[1.0, 2.0]).is_err());
        // m_(2,1)(x,y,z) at (1,2,3): Σ_{i≠j} x_i² x_j
        let x = [1.0, 2.0, 3.0];
        let mut direct = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    direct += x[i] * x[i] * x[j];
                }
            }
        }
        assert_relative_eq!(monomial_eval(&p(&[2, 1]), &x).unwrap(), direct);
    }

    #[test]
    fn hooks_and_pochhammer() {
        let one = p(&[1]);
        assert_relative_eq!(hook_c(&one, 2.0), 1.0);
        assert_relative_eq!(hook_c_prime(&one, 2.0), 2.0);
        assert_eq!(hook_c(&Partition::empty(), 0.7), 1.0);
        assert_eq!(hook_c_prime(&Partition::empty(), 0.7), 1.0);
        assert_relative_eq!(hook_c(&p(&[2]), 1.0), 2.0);
        assert_relative_eq!(hook_c_prime(&p(&[2]), 1.0), 2.0);

        assert_relative_eq!(gen_pochhammer(3.0, &one, 0.4).unwrap(), 3.0);
        assert_relative_eq!(gen_pochhammer(2.0, &p(&[2]), 5.0).unwrap(), 6.0);
        assert_eq!(gen_pochhammer(2.0, &Partition::empty(), 5.0).unwrap(), 1.0);
        // second row base b − 1/α = 0 is a pole
        assert!(matches!(
            gen_pochhammer(1.0, &p(&[1, 1]), 1.0),
            Err(Error::Domain(_))
        ));
        // negative non-integer base gives a sign
        assert_relative_eq!(gen_pochhammer(-0.5, &p(&[2]), 1.0).unwrap(), -0.5 * 0.5);
    }

    #[test]
    fn jack_small_expansions() {
        let e = jack_in_monomial_basis(&p(&[1]), 1.7, 3).unwrap();
        assert_eq!(e.coeffs.len(), 1);
        assert_eq!(e.coeffs[&p(&[1])], 1.0);

        for &alpha in &[0.5, 1.0, 2.0, 7.0] {
            let e = jack_in_monomial_basis(&p(&[2]), alpha, 2).unwrap();
            assert_eq!(e.coeffs[&p(&[2])], 1.0);
            assert_relative_eq!(
                e.coeffs[&p(&[1, 1])],
                2.0 / (1.0 + alpha),
                max_relative = 1e-14
            );
        }
        let e = jack_in_monomial_basis(&p(&[1, 1]), 3.0, 2).unwrap();
        assert_eq!(e.coeffs.len(), 1);
        assert_eq!(e.coeffs[&p(&[1, 1])], 1.0);
        assert!(jack_in_monomial_basis(&p(&[1, 1, 1]), 1.0, 2).is_err());
    }

    #[test]
    fn jack_eval_examples() {
        assert_relative_eq!(jack_eval(&p(&[1]), 3.0, &[1.0, 2.0]).unwrap(), 3.0);
        // m_(2)(1,1) = 2, m_(1,1)(1,1) = 1
        assert_relative_eq!(
            jack_eval(&p(&[2]), 2.0, &[1.0, 1.0]).unwrap(),
            8.0 / 3.0,
            max_relative = 1e-14
        );
        assert_eq!(jack_eval(&p(&[3, 1]), 0.5, &[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(jack_eval(&p(&[1, 1, 1]), 0.5, &[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn cache_returns_same_table() {
        let a = JackTable::get(5, 0.25, 3).unwrap();
        let b = JackTable::get(5, 0.25, 3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
