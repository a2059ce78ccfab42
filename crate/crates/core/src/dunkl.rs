//! Type-B Dunkl machinery for the interacting Bessel processes: the weight
//! function and its Selberg normalization, truncated hypergeometric series of
//! two vector arguments, the generalized Bessel function, the intertwining
//! operators on symmetric polynomials, and their large-β and large-ν limits.

use std::collections::BTreeMap;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};
use crate::symfunc::{
    gen_pochhammer, ln_gen_pochhammer, ln_hook_c, ln_hook_c_prime, monomial_eval, multinomial_m,
    partitions_up_to, JackTable, Partition, MAX_DEGREE,
};

/// Model parameters `(β, ν, N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    beta: f64,
    nu: f64,
    n_particles: usize,
}

impl ModelParams {
    pub fn new(beta: f64, nu: f64, n_particles: usize) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "β must be positive and finite, got {beta}"
            )));
        }
        if !(nu >= -0.5 && nu.is_finite()) {
            return Err(Error::invalid(format!(
                "ν must be finite and >= -1/2, got {nu}"
            )));
        }
        if n_particles == 0 {
            return Err(Error::invalid("at least one particle is required"));
        }
        Ok(ModelParams {
            beta,
            nu,
            n_particles,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    /// Laguerre parameter `ν − 1/2`.
    pub fn alpha(&self) -> f64 {
        self.nu - 0.5
    }

    /// Multiplicity on the short roots `±e_i`.
    pub fn k1(&self) -> f64 {
        self.beta * (self.nu + 0.5) / 2.0
    }

    /// Multiplicity on the long roots `±e_i ± e_j`.
    pub fn k2(&self) -> f64 {
        self.beta / 2.0
    }

    /// Sum of multiplicities over the positive roots.
    pub fn gamma_r(&self) -> f64 {
        let n = self.n_particles as f64;
        n * self.k1() + n * (n - 1.0) * self.k2()
    }

    /// Jack parameter `2/β`.
    pub fn jack_alpha(&self) -> f64 {
        2.0 / self.beta
    }

    /// Lower parameter `β(ν+N−1/2)/2 + 1/2` of the type-B `₁F₁`.
    pub fn bessel_b(&self) -> f64 {
        self.beta * (self.nu + self.n_particles as f64 - 0.5) / 2.0 + 0.5
    }

    fn check_dim(&self, v: &[f64], what: &str) -> Result<()> {
        if v.len() != self.n_particles {
            return Err(Error::invalid(format!(
                "{what} has {} coordinates, expected N = {}",
                v.len(),
                self.n_particles
            )));
        }
        Ok(())
    }
}

/// Truncation controls for the hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub max_degree: u32,
    /// Stop once two consecutive degree contributions fall below this
    /// fraction of the running sum.
    pub rel_term_tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            max_degree: 20,
            rel_term_tol: 1e-12,
        }
    }
}

impl SeriesControl {
    pub fn new(max_degree: u32, rel_term_tol: f64) -> Result<Self> {
        let ctrl = SeriesControl {
            max_degree,
            rel_term_tol,
        };
        ctrl.validate()?;
        Ok(ctrl)
    }

    fn validate(&self) -> Result<()> {
        if self.max_degree > MAX_DEGREE {
            return Err(Error::Capacity {
                what: format!("series degree {}", self.max_degree),
                limit: MAX_DEGREE as usize,
            });
        }
        if !(self.rel_term_tol > 0.0) {
            return Err(Error::invalid("rel_term_tol must be positive"));
        }
        Ok(())
    }
}

/// A truncated series with its convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    /// `|last degree contribution| / |value|`.
    pub last_term_ratio: f64,
    pub converged: bool,
    /// Contribution of each homogeneous degree `|τ| = 0, 1, …`.
    pub degree_terms: Vec<f64>,
}

impl SeriesResult {
    fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.degree_terms.iter_mut().for_each(|t| *t *= factor);
        self
    }
}

/// Series family: `₀F₀` or `₁F₁` with lower parameter `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypergeoKind {
    F00,
    F11 { b: f64 },
}

/// Generalized hypergeometric series of two vector arguments,
/// `Σ_τ c_τ/c′_τ · P_τ(x) P_τ(y) / ((N/α)_τ [(b)_τ])` with Jack polynomials
/// `P_τ^{(α)}`, summed degree by degree.
pub fn hypergeo_pfq(
    kind: HypergeoKind,
    x: &[f64],
    y: &[f64],
    alpha: f64,
    ctrl: &SeriesControl,
) -> Result<SeriesResult> {
    ctrl.validate()?;
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::invalid(format!(
            "arguments must share a positive dimension, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid(format!(
            "Jack parameter must be positive, got {alpha}"
        )));
    }
    let upper = n as f64 / alpha;
    let mut sum = 0.0;
    let mut degree_terms = Vec::new();
    let mut small_run = 0;
    for degree in 0..=ctrl.max_degree {
        let table = JackTable::get(degree, alpha, n)?;
        let px = table.eval_all(x);
        let py = table.eval_all(y);
        let mut term = 0.0;
        for (k, tau) in table.partitions().iter().enumerate() {
            if px[k] == 0.0 || py[k] == 0.0 {
                continue;
            }
            let (ln_up, sign_up) = ln_gen_pochhammer(upper, tau, alpha)?;
            let mut ln_coeff = ln_hook_c(tau, alpha) - ln_hook_c_prime(tau, alpha) - ln_up;
            let mut sign = sign_up;
            if let HypergeoKind::F11 { b } = kind {
                let (ln_b, sign_b) = ln_gen_pochhammer(b, tau, alpha)?;
                ln_coeff -= ln_b;
                sign *= sign_b;
            }
            term += sign
                * (px[k] * py[k]).signum()
                * (ln_coeff + px[k].abs().ln() + py[k].abs().ln()).exp();
        }
        if !term.is_finite() {
            return Err(Error::Overflow(format!(
                "series term of degree {degree} is not finite"
            )));
        }
        sum += term;
        degree_terms.push(term);
        if degree > 0 && term.abs() <= ctrl.rel_term_tol * sum.abs() {
            small_run += 1;
            if small_run == 2 {
                break;
            }
        } else {
            small_run = 0;
        }
    }
    let last = *degree_terms.last().unwrap();
    let last_term_ratio = if sum == 0.0 { 0.0 } else { (last / sum).abs() };
    Ok(SeriesResult {
        value: sum,
        last_term_ratio,
        converged: last_term_ratio <= ctrl.rel_term_tol,
        degree_terms,
    })
}

fn squares_halved(v: &[f64]) -> Vec<f64> {
    v.iter().map(|c| 0.5 * c * c).collect()
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum()
}

/// `|W_B| = 2^N N!`.
pub fn weyl_b_order(n: usize) -> f64 {
    (1..=n).map(|i| 2.0 * i as f64).product()
}

/// Type-B generalized Bessel function
/// `2^N N! · ₁F₁^{(2/β)}(β(ν+N−1/2)/2 + 1/2; x²/2, y²/2)`.
pub fn gen_bessel_b(
    x: &[f64],
    y: &[f64],
    params: &ModelParams,
    ctrl: &SeriesControl,
) -> Result<SeriesResult> {
    params.check_dim(x, "x")?;
    params.check_dim(y, "y")?;
    let series = hypergeo_pfq(
        HypergeoKind::F11 {
            b: params.bessel_b(),
        },
        &squares_halved(x),
        &squares_halved(y),
        params.jack_alpha(),
        ctrl,
    )?;
    Ok(series.scaled(weyl_b_order(params.n_particles)))
}

/// Even part of `Σ_{ρ∈W_B} e^{x·ρy}` expanded in monomials of the squared
/// coordinates, truncated at total degree `max_degree` in `x`.
pub fn symmetrized_exp_expansion(x: &[f64], y: &[f64], max_degree: u32) -> Result<f64> {
    let n = x.len();
    if n == 0 || y.len() != n {
        return Err(Error::invalid("arguments must share a positive dimension"));
    }
    let x2: Vec<f64> = x.iter().map(|v| v * v).collect();
    let y2: Vec<f64> = y.iter().map(|v| v * v).collect();
    let order = weyl_b_order(n);
    let mut total = 0.0;
    for half in 0..=max_degree / 2 {
        for mu in partitions_up_to(half, n)? {
            let count = multinomial_m(&mu, n)? as f64;
            total += order / (mu.double_factorial() * count)
                * monomial_eval(&mu, &x2)?
                * monomial_eval(&mu, &y2)?;
        }
    }
    Ok(total)
}

/// A signed permutation: `(ρx)_i = sign_i · x_{perm_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.perm
            .iter()
            .zip(&self.signs)
            .map(|(&p, &s)| f64::from(s) * x[p])
            .collect()
    }
}

/// All `2^N N!` elements of the hyperoctahedral group `W_B`.
pub fn weyl_b_elements(n: usize) -> Vec<SignedPermutation> {
    let mut perms = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    heap_permutations(n, &mut current, &mut perms);
    let mut out = Vec::with_capacity(perms.len() << n);
    for perm in perms {
        for mask in 0..(1u64 << n) {
            let signs = (0..n)
                .map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })
                .collect();
            out.push(SignedPermutation {
                perm: perm.clone(),
                signs,
            });
        }
    }
    out
}

fn heap_permutations(k: usize, v: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(v.clone());
        return;
    }
    for i in 0..k - 1 {
        heap_permutations(k - 1, v, out);
        if k % 2 == 0 {
            v.swap(i, k - 1);
        } else {
            v.swap(0, k - 1);
        }
    }
    heap_permutations(k - 1, v, out);
}

/// Image of `x` in the closed chamber `0 ≤ x_1 ≤ … ≤ x_N`.
pub fn chamber_b_representative(x: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = x.iter().map(|c| c.abs()).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `0 < x_1 < … < x_N`.
pub fn in_open_chamber_b(x: &[f64]) -> bool {
    x.first().is_some_and(|&v| v > 0.0) && x.windows(2).all(|w| w[0] < w[1])
}

/// `x_1 < … < x_N`.
pub fn in_open_chamber_a(x: &[f64]) -> bool {
    x.windows(2).all(|w| w[0] < w[1]) && x.iter().all(|v| v.is_finite())
}

/// Expansion in Jack polynomials `P_τ^{(α)}` of one degree.
#[derive(Debug, Clone, PartialEq)]
pub struct JackExpansion {
    pub coeffs: BTreeMap<Partition, f64>,
    pub alpha: f64,
    pub degree: u32,
}

impl JackExpansion {
    /// `Σ_τ coeff_τ P_τ(z)`.
    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        if z.is_empty() {
            return Err(Error::invalid("empty argument"));
        }
        let table = JackTable::get(self.degree, self.alpha, z.len())?;
        let p = table.eval_all(z);
        self.coeffs
            .iter()
            .map(|(tau, c)| {
                let k = table.index_of(tau).ok_or_else(|| {
                    Error::invalid(format!("partition {tau} has more than {} parts", z.len()))
                })?;
                Ok(c * p[k])
            })
            .sum()
    }

    /// Evaluates at the squared coordinates `(x_1², …, x_N²)`.
    pub fn eval_squared(&self, x: &[f64]) -> Result<f64> {
        let z: Vec<f64> = x.iter().map(|v| v * v).collect();
        self.eval(&z)
    }
}

/// Jack coefficients of an intertwiner applied to `m_λ`:
/// `prefactor · c_τ/c′_τ · u_{τλ} / ((βN/2)_τ [(b)_τ])`.
fn intertwiner_expansion(
    lambda: &Partition,
    beta: f64,
    n: usize,
    prefactor: f64,
    lower: Option<f64>,
) -> Result<JackExpansion> {
    if lambda.len() > n {
        return Err(Error::invalid(format!(
            "partition {lambda} has more than {n} parts"
        )));
    }
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("β must be positive, got {beta}")));
    }
    let alpha = 2.0 / beta;
    let degree = lambda.modulus();
    let table = JackTable::get(degree, alpha, n)?;
    let col = table.index_of(lambda).expect("λ fits in its own table");
    let upper = beta * n as f64 / 2.0;
    let mut coeffs = BTreeMap::new();
    for (a, tau) in table.partitions().iter().enumerate().take(col + 1) {
        let u = table.coefficient(a, col);
        if u == 0.0 {
            continue;
        }
        let mut c = prefactor * (ln_hook_c(tau, alpha) - ln_hook_c_prime(tau, alpha)).exp() * u
            / gen_pochhammer(upper, tau, alpha)?;
        if let Some(b) = lower {
            c /= gen_pochhammer(b, tau, alpha)?;
        }
        coeffs.insert(tau.clone(), c);
    }
    Ok(JackExpansion {
        coeffs,
        alpha,
        degree,
    })
}

/// `V_B m_λ(x²)` as a polynomial in the squared coordinates, expanded in
/// Jack polynomials with parameter `2/β`.
pub fn vb_on_monomial(lambda: &Partition, params: &ModelParams) -> Result<JackExpansion> {
    let n = params.n_particles;
    let count = multinomial_m(lambda, n)? as f64;
    let prefactor = lambda.double_factorial() * count / 2f64.powi(2 * lambda.modulus() as i32);
    intertwiner_expansion(lambda, params.beta, n, prefactor, Some(params.bessel_b()))
}

/// Type-A intertwiner `V_A m_λ` expanded in Jack polynomials with
/// parameter `2/β`.
pub fn va_on_monomial(lambda: &Partition, beta: f64, n: usize) -> Result<JackExpansion> {
    let count = multinomial_m(lambda, n)? as f64;
    intertwiner_expansion(lambda, beta, n, lambda.factorial() * count, None)
}

/// `ln` of the large-β limit kernel `|x|²|y|² / (2N(N+α))`.
pub fn ln_kernel_e_beta_limit(x: &[f64], y: &[f64], params: &ModelParams) -> Result<f64> {
    params.check_dim(x, "x")?;
    params.check_dim(y, "y")?;
    let n = params.n_particles as f64;
    let denom = 2.0 * n * (n + params.alpha());
    if !(denom > 0.0) {
        return Err(Error::domain("N + ν − 1/2 must be positive"));
    }
    Ok(norm_sq(x) * norm_sq(y) / denom)
}

/// Large-β limit of the normalized generalized Bessel function,
/// `exp(|x|²|y|² / (2N(N+α)))`.
pub fn kernel_e_beta_limit(x: &[f64], y: &[f64], params: &ModelParams) -> Result<f64> {
    let ln = ln_kernel_e_beta_limit(x, y, params)?;
    if ln > f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "limit kernel exponent {ln} too large"
        )));
    }
    Ok(ln.exp())
}

/// Large-ν limit of the normalized generalized Bessel function,
/// `₀F₀^{(2/β)}(x²/√(2β), y²/√(2β))`.
pub fn kernel_e_nu_limit(
    x: &[f64],
    y: &[f64],
    beta: f64,
    ctrl: &SeriesControl,
) -> Result<SeriesResult> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("β must be positive, got {beta}")));
    }
    let s = (2.0 * beta).sqrt();
    let xs: Vec<f64> = x.iter().map(|v| v * v / s).collect();
    let ys: Vec<f64> = y.iter().map(|v| v * v / s).collect();
    hypergeo_pfq(HypergeoKind::F00, &xs, &ys, 2.0 / beta, ctrl)
}

/// `|value| ≤ e^{scale·|x|·|y|}`.
pub fn kernel_bound_check(x: &[f64], y: &[f64], scale: f64, value: f64) -> bool {
    let bound = scale * norm_sq(x).sqrt() * norm_sq(y).sqrt();
    value.abs().ln() <= bound
}

/// `ln w_B(x)`; `−∞` on the walls of the chamber.
pub fn ln_weight_wb(x: &[f64], params: &ModelParams) -> f64 {
    let beta = params.beta;
    let short = beta * (params.nu + 0.5);
    let mut ln = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            if short > 0.0 {
                return f64::NEG_INFINITY;
            }
        } else {
            ln += short * xi.abs().ln();
        }
        for &xj in &x[i + 1..] {
            let gap = (xj * xj - xi * xi).abs();
            if gap == 0.0 {
                return f64::NEG_INFINITY;
            }
            ln += beta * gap.ln();
        }
    }
    ln
}

/// Weight `Π|x_i|^{β(ν+1/2)} Π_{i<j}|x_j² − x_i²|^β`.
pub fn weight_wb(x: &[f64], params: &ModelParams) -> f64 {
    ln_weight_wb(x, params).exp()
}

/// `ln c_B`, where `c_B = ∫_{ℝ^N} e^{−|x|²/2} w_B(x) dx`.
pub fn ln_selberg_cb(params: &ModelParams) -> Result<f64> {
    let n = params.n_particles as f64;
    let beta = params.beta;
    let mut ln = (params.gamma_r() + n / 2.0) * std::f64::consts::LN_2;
    for j in 1..=params.n_particles {
        let j = j as f64;
        let shifted = beta * (params.nu + j - 0.5) / 2.0 + 0.5;
        if !(shifted > 0.0) {
            return Err(Error::domain(format!("Gamma pole at argument {shifted}")));
        }
        ln += ln_gamma(1.0 + j * beta / 2.0) + ln_gamma(shifted) - ln_gamma(beta / 2.0 + 1.0);
    }
    Ok(ln)
}

pub fn selberg_cb(params: &ModelParams) -> Result<f64> {
    let ln = ln_selberg_cb(params)?;
    if ln > f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "c_B = e^{ln} exceeds the f64 range"
        )));
    }
    Ok(ln.exp())
}

/// Direct product of Gamma functions for `c_B`; only usable for small
/// parameters.
pub fn selberg_cb_direct(params: &ModelParams) -> f64 {
    let beta = params.beta;
    let mut v = 2f64.powf(params.gamma_r() + params.n_particles as f64 / 2.0);
    for j in 1..=params.n_particles {
        let j = j as f64;
        v *= gamma(1.0 + j * beta / 2.0) * gamma(beta * (params.nu + j - 0.5) / 2.0 + 0.5)
            / gamma(beta / 2.0 + 1.0);
    }
    v
}

/// Transition density of the interacting Bessel processes from `x` to `y`
/// (with `y` in the open chamber) after time `t`.
pub fn tpd_radial_b(
    t: f64,
    y: &[f64],
    x: &[f64],
    params: &ModelParams,
    ctrl: &SeriesControl,
) -> Result<SeriesResult> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    params.check_dim(x, "x")?;
    params.check_dim(y, "y")?;
    if !in_open_chamber_b(y) {
        return Err(Error::domain(format!(
            "y = {y:?} is outside the open type-B chamber"
        )));
    }
    if x.iter().any(|v| !(v.is_finite())) {
        return Err(Error::invalid("x must be finite"));
    }
    let sqrt_t = t.sqrt();
    let ys: Vec<f64> = y.iter().map(|v| v / sqrt_t).collect();
    let xs: Vec<f64> = x.iter().map(|v| v / sqrt_t).collect();
    let kernel = gen_bessel_b(&xs, &ys, params, ctrl)?;
    let ln_prefactor = ln_weight_wb(&ys, params)
        - (norm_sq(y) + norm_sq(x)) / (2.0 * t)
        - ln_selberg_cb(params)?
        - params.n_particles as f64 / 2.0 * t.ln();
    Ok(kernel.scaled(ln_prefactor.exp()))
}

/// Integrability class of the initial distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialTail {
    /// Decay `|x|^{−N−η}`; `η` only sets the error order `t^{−η/4}`.
    PowerLaw { eta: f64 },
    /// Support inside the ball of radius `r_μ`.
    Compact { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    LargeBeta,
    LargeNu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationEstimate {
    pub t_min: f64,
    /// Lower bound on β (large-β regime) or ν (large-ν regime).
    pub parameter_min: f64,
}

/// Order-of-magnitude constant in the validity thresholds.
pub const THRESHOLD_CONSTANT: f64 = 10.0;

/// Time after which the scaled density is within the steady-state regime.
pub fn relaxation_time_estimate(
    params: &ModelParams,
    regime: Regime,
    tail: InitialTail,
    eps: f64,
) -> Result<RelaxationEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("ε must lie in (0, 1), got {eps}")));
    }
    let n = params.n_particles as f64;
    let beta = params.beta;
    let parameter_min = match regime {
        Regime::LargeBeta => {
            let denom = n + params.alpha();
            if !(denom > 0.0) {
                return Err(Error::domain("N + ν − 1/2 must be positive"));
            }
            THRESHOLD_CONSTANT / denom
        }
        Regime::LargeNu => THRESHOLD_CONSTANT * beta * n,
    };
    let t_min = match tail {
        InitialTail::Compact { radius } => {
            if !(radius >= 0.0) {
                return Err(Error::invalid(format!(
                    "support radius must be >= 0, got {radius}"
                )));
            }
            radius * radius / (eps * eps)
        }
        InitialTail::PowerLaw { eta } => {
            if !(eta > 0.0) {
                return Err(Error::invalid(format!(
                    "tail exponent η must be positive, got {eta}"
                )));
            }
            match regime {
                Regime::LargeBeta => THRESHOLD_CONSTANT / (beta * n * (n + params.alpha())).powi(2),
                Regime::LargeNu => THRESHOLD_CONSTANT / (beta * params.nu).powi(2),
            }
        }
    };
    Ok(RelaxationEstimate {
        t_min,
        parameter_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(beta: f64, nu: f64, n: usize) -> ModelParams {
        ModelParams::new(beta, nu, n).unwrap()
    }

    #[test]
    fn model_params_validation() {
        assert!(ModelParams::new(0.0, 0.5, 2).is_err());
        assert!(ModelParams::new(1.0, -0.6, 2).is_err());
        assert!(ModelParams::new(1.0, 0.5, 0).is_err());
        let p = params(2.0, 0.5, 3);
        assert_eq!(p.alpha(), 0.0);
        assert_eq!(p.k1(), 1.0);
        assert_eq!(p.k2(), 1.0);
        assert_eq!(p.gamma_r(), 3.0 + 6.0);
    }

    #[test]
    fn series_at_zero_is_one() {
        let ctrl = SeriesControl::default();
        let r = hypergeo_pfq(HypergeoKind::F00, &[0.0, 0.0], &[1.0, 2.0], 0.7, &ctrl).unwrap();
        assert_eq!(r.value, 1.0);
        assert!(r.converged);
        let r = hypergeo_pfq(
            HypergeoKind::F11 { b: 2.5 },
            &[0.0; 3],
            &[1.0; 3],
            0.7,
            &ctrl,
        )
        .unwrap();
        assert_eq!(r.value, 1.0);
    }

    #[test]
    fn f00_one_variable_is_exponential() {
        let ctrl = SeriesControl::new(25, 1e-16).unwrap();
        for &(x, y) in &[(1.0, 1.0), (-1.5, 2.0), (3.0, 1.0), (0.3, -0.2)] {
            for &alpha in &[0.5, 1.0, 4.0] {
                let r = hypergeo_pfq(HypergeoKind::F00, &[x], &[y], alpha, &ctrl).unwrap();
                assert_relative_eq!(r.value, f64::exp(x * y), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn f00_against_all_ones() {
        let ctrl = SeriesControl::new(30, 1e-15).unwrap();
        for &beta in &[0.5, 2.0, 16.0] {
            let x = [0.4, 1.1, 0.9];
            let r = hypergeo_pfq(HypergeoKind::F00, &x, &[1.0; 3], 2.0 / beta, &ctrl).unwrap();
            assert!(r.converged);
            assert_relative_eq!(r.value, f64::exp(2.4), max_relative = 1e-12);
        }
    }

    #[test]
    fn series_control_limits() {
        assert!(matches!(
            SeriesControl::new(31, 1e-12),
            Err(Error::Capacity { .. })
        ));
        assert!(SeriesControl::new(10, 0.0).is_err());
        let ctrl = SeriesControl::new(2, 1e-12).unwrap();
        let r = hypergeo_pfq(HypergeoKind::F00, &[3.0], &[3.0], 1.0, &ctrl).unwrap();
        assert!(!r.converged);
        assert_eq!(r.degree_terms.len(), 3);
        assert!(r.last_term_ratio > 0.1);
    }

    #[test]
    fn gen_bessel_basics() {
        let p = params(2.0, 0.5, 2);
        let ctrl = SeriesControl::default();
        let r = gen_bessel_b(&[0.7, 1.2], &[0.0, 0.0], &p, &ctrl).unwrap();
        assert_eq!(r.value, 8.0);
        let a = gen_bessel_b(&[0.3, 0.8], &[0.5, 1.1], &p, &ctrl)
            .unwrap()
            .value;
        let b = gen_bessel_b(&[0.5, 1.1], &[0.3, 0.8], &p, &ctrl)
            .unwrap()
            .value;
        assert_relative_eq!(a, b, max_relative = 1e-14);
        assert!(gen_bessel_b(&[0.3], &[0.5, 1.1], &p, &ctrl).is_err());
    }

    #[test]
    fn gen_bessel_one_particle_is_bessel() {
        // N = 1: 2·Γ(b)(z/2)^{1−b} I_{b−1}(z) with z = xy
        let ctrl = SeriesControl::new(30, 1e-15).unwrap();
        for &(beta, nu) in &[(2.0, 0.5), (1.0, 3.0), (6.0, -0.5)] {
            let p = params(beta, nu, 1);
            let b = p.bessel_b();
            let (x, y) = (1.3, 0.9);
            let z: f64 = x * y;
            let want = 2.0
                * ln_gamma(b).exp()
                * (z / 2.0).powf(1.0 - b)
                * crate::orthopoly::modified_bessel_i(b - 1.0, z).unwrap();
            let got = gen_bessel_b(&[x], &[y], &p, &ctrl).unwrap().value;
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn symmetrized_expansion_examples() {
        assert_eq!(
            symmetrized_exp_expansion(&[0.3, 1.0], &[2.0, 0.1], 0).unwrap(),
            8.0
        );
        let got = symmetrized_exp_expansion(&[0.7], &[1.3], 30).unwrap();
        assert_relative_eq!(got, 2.0 * f64::cosh(0.91), max_relative = 1e-14);
        for n in 1..=3 {
            let x: Vec<f64> = (0..n).map(|i| 0.3 + 0.25 * i as f64).collect();
            let y: Vec<f64> = (0..n).map(|i| 0.8 - 0.2 * i as f64).collect();
            let direct: f64 = weyl_b_elements(n)
                .iter()
                .map(|rho| {
                    let ry = rho.apply(&y);
                    x.iter().zip(&ry).map(|(a, b)| a * b).sum::<f64>().exp()
                })
                .sum();
            let series = symmetrized_exp_expansion(&x, &y, 40).unwrap();
            assert_relative_eq!(series, direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn weyl_group_size_and_chamber() {
        assert_eq!(weyl_b_elements(3).len(), 48);
        assert_eq!(weyl_b_order(3), 48.0);
        assert_eq!(
            chamber_b_representative(&[-2.0, 0.5, -1.0]),
            vec![0.5, 1.0, 2.0]
        );
        assert!(in_open_chamber_b(&[0.1, 0.2]));
        assert!(!in_open_chamber_b(&[0.0, 0.2]));
        assert!(!in_open_chamber_b(&[0.3, 0.2]));
        assert!(in_open_chamber_a(&[-1.0, 0.2]));
    }

    #[test]
    fn weight_examples() {
        let p = params(2.0, 0.5, 1);
        assert_eq!(weight_wb(&[2.0], &p), 4.0);
        let p = params(1.5, 1.0, 3);
        assert_eq!(weight_wb(&[0.0, 1.0, 2.0], &p), 0.0);
        let x = [0.4, -1.2, 2.0];
        let w = weight_wb(&x, &p);
        for rho in weyl_b_elements(3) {
            assert_relative_eq!(weight_wb(&rho.apply(&x), &p), w, max_relative = 1e-13);
        }
    }

    #[test]
    fn selberg_examples() {
        let p = params(2.0, 0.5, 1);
        let want = 2f64.powf(1.5) * ln_gamma(1.5).exp();
        assert_relative_eq!(selberg_cb(&p).unwrap(), want, max_relative = 1e-14);
        assert_relative_eq!(
            want,
            (2.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-14
        );
        assert!(ln_selberg_cb(&params(64.0, 10.0, 20)).unwrap().is_finite());
        for &(beta, nu, n) in &[(2.0, 0.5, 2), (1.0, 2.0, 3), (0.5, -0.5, 4), (4.0, 1.0, 2)] {
            let p = params(beta, nu, n);
            assert_relative_eq!(
                selberg_cb(&p).unwrap(),
                selberg_cb_direct(&p),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn intertwiner_degree_zero_and_one() {
        let p = params(3.0, 1.5, 2);
        let e = vb_on_monomial(&Partition::empty(), &p).unwrap();
        assert_eq!(e.eval(&[0.3, 0.9]).unwrap(), 1.0);
        let e = va_on_monomial(&Partition::empty(), 3.0, 2).unwrap();
        assert_eq!(e.eval(&[0.3, 0.9]).unwrap(), 1.0);
        let one = Partition::new(vec![1]).unwrap();
        for n in 1..=4 {
            let e = va_on_monomial(&one, 2.7, n).unwrap();
            assert_relative_eq!(e.coeffs[&one], 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn vb_degree_one_matches_series() {
        // N = 1, λ = (1): the degree-one term of gen_bessel_b equals
        // 2/(2!·1)·y²·V_B m_(1)(x²)
        let ctrl = SeriesControl::default();
        for &(beta, nu) in &[(2.0, 0.5), (5.0, 1.0)] {
            let p = params(beta, nu, 1);
            let (x, y) = (0.8, 1.7);
            let e = vb_on_monomial(&Partition::new(vec![1]).unwrap(), &p).unwrap();
            let from_vb = 2.0 / 2.0 * y * y * e.eval_squared(&[x]).unwrap();
            let series = gen_bessel_b(&[x], &[y], &p, &ctrl).unwrap();
            assert_relative_eq!(series.degree_terms[1], from_vb, max_relative = 1e-13);
        }
    }

    #[test]
    fn limit_kernel_examples() {
        let p = params(5.0, 0.5, 1);
        assert_eq!(kernel_e_beta_limit(&[0.0], &[3.0], &p).unwrap(), 1.0);
        assert_relative_eq!(
            kernel_e_beta_limit(&[1.0], &[1.0], &p).unwrap(),
            f64::exp(0.5)
        );
        let ctrl = SeriesControl::default();
        assert_eq!(
            kernel_e_nu_limit(&[1.0, 2.0], &[0.0, 0.0], 2.0, &ctrl)
                .unwrap()
                .value,
            1.0
        );
    }

    #[test]
    fn bound_check_examples() {
        let x = [0.3, 0.4];
        let y = [1.0, 0.0];
        let v = f64::exp(2.0 * 0.5);
        assert!(kernel_bound_check(&x, &y, 2.0, v * 0.99));
        assert!(!kernel_bound_check(&x, &y, 2.0, v * 1.01));
        assert!(kernel_bound_check(&[0.0, 0.0], &y, 2.0, 1.0));
        assert!(!kernel_bound_check(&[0.0, 0.0], &y, 2.0, 1.0001));
    }

    #[test]
    fn relaxation_examples() {
        let p = params(2.0, 0.5, 3);
        let eps = 1.0 - 1e-12;
        let r = relaxation_time_estimate(
            &p,
            Regime::LargeBeta,
            InitialTail::Compact {
                radius: 14f64.sqrt(),
            },
            eps,
        )
        .unwrap();
        assert_relative_eq!(r.t_min, 14.0, max_relative = 1e-10);
        let r = relaxation_time_estimate(
            &p,
            Regime::LargeBeta,
            InitialTail::Compact {
                radius: 0.014f64.sqrt(),
            },
            eps,
        )
        .unwrap();
        assert_relative_eq!(r.t_min, 0.014, max_relative = 1e-10);
        let p7 = params(2.0, 0.5, 7);
        let r = relaxation_time_estimate(
            &p7,
            Regime::LargeBeta,
            InitialTail::PowerLaw { eta: 1.0 },
            0.5,
        )
        .unwrap();
        assert_relative_eq!(r.t_min, 10.0 / (4.0 * 49.0 * 49.0));
        assert_relative_eq!(r.parameter_min, 10.0 / 7.0);
        let r = relaxation_time_estimate(
            &p7,
            Regime::LargeNu,
            InitialTail::PowerLaw { eta: 1.0 },
            0.5,
        )
        .unwrap();
        assert_relative_eq!(r.t_min, 10.0 / 1.0);
        assert_relative_eq!(r.parameter_min, 140.0);
        assert!(relaxation_time_estimate(
            &p,
            Regime::LargeBeta,
            InitialTail::PowerLaw { eta: 1.0 },
            1.0
        )
        .is_err());
    }

    #[test]
    fn tpd_zero_start() {
        let p = params(2.0, 0.5, 2);
        let ctrl = SeriesControl::default();
        let y = [0.4, 1.3];
        let t = 0.8;
        let got = tpd_radial_b(t, &y, &[0.0, 0.0], &p, &ctrl).unwrap().value;
        let ys: Vec<f64> = y.iter().map(|v| v / f64::sqrt(t)).collect();
        let want = weight_wb(&ys, &p) * f64::exp(-norm_sq(&y) / (2.0 * t)) * 8.0
            / (selberg_cb(&p).unwrap() * t);
        assert_relative_eq!(got, want, max_relative = 1e-13);
        assert!(matches!(
            tpd_radial_b(t, &[1.3, 0.4], &[0.0, 0.0], &p, &ctrl),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tpd_one_particle_matches_bessel() {
        // effective Bessel index β(ν+1/2)/2 − 1/2
        let ctrl = SeriesControl::new(30, 1e-15).unwrap();
        for &(beta, nu) in &[(2.0, 0.5), (3.0, 1.0), (1.0, 0.0)] {
            let p = params(beta, nu, 1);
            let nu_eff = beta * (nu + 0.5) / 2.0 - 0.5;
            for &(t, x, y) in &[(1.0, 0.0, 0.7), (0.5, 0.6, 1.1), (2.0, 1.5, 0.4)] {
                let got = tpd_radial_b(t, &[y], &[x], &p, &ctrl).unwrap().value;
                let want = crate::orthopoly::bessel_tpd_single(t, y, x, nu_eff).unwrap();
                assert_relative_eq!(got, want, max_relative = 1e-11);
            }
        }
    }
}
