//! Laguerre and Hermite polynomials and their zeroes, Gauss rules, the
//! modified Bessel function `I_ν`, and the potentials whose minima locate the
//! frozen particle configurations.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Which polynomial a [`ZeroSet`] came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroFamily {
    /// Zeroes `s_i` of `L_N^{(α)}`.
    Laguerre { n: usize, alpha: f64 },
    /// Zeroes of the physicists' Hermite polynomial `H_N`.
    Hermite { n: usize },
    /// Square roots `√s_i` of the Laguerre zeroes.
    SqrtLaguerre { n: usize, alpha: f64 },
}

/// Strictly increasing zeroes of an orthogonal polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub values: Vec<f64>,
    pub family: ZeroFamily,
}

impl ZeroSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The square roots of a Laguerre zero set.
    pub fn sqrt(&self) -> Result<ZeroSet> {
        match self.family {
            ZeroFamily::Laguerre { n, alpha } => Ok(ZeroSet {
                values: self.values.iter().map(|s| s.sqrt()).collect(),
                family: ZeroFamily::SqrtLaguerre { n, alpha },
            }),
            other => Err(Error::invalid(format!(
                "square roots taken of {other:?} zeroes"
            ))),
        }
    }
}

fn check_laguerre_alpha(alpha: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!(
            "Laguerre parameter must exceed -1, got {alpha}"
        )));
    }
    Ok(())
}

/// `(L_N^{(α)}(x), L_{N−1}^{(α)}(x))` from the three-term recurrence.
fn laguerre_pair(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 1..=n {
        let k = k as f64;
        let next = ((2.0 * k - 1.0 + alpha - x) * cur - (k - 1.0 + alpha) * prev) / k;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Generalized Laguerre polynomial `L_N^{(α)}(x)`.
pub fn laguerre_eval(n: usize, alpha: f64, x: f64) -> Result<f64> {
    check_laguerre_alpha(alpha)?;
    Ok(laguerre_pair(n, alpha, x).0)
}

/// Physicists' Hermite polynomial `H_N(x)` with `H_{N−1}(x)`.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 1..=n {
        let next = 2.0 * x * cur - 2.0 * (k as f64 - 1.0) * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

pub fn hermite_eval(n: usize, x: f64) -> f64 {
    hermite_pair(n, x).0
}

/// Eigen-decomposition of a symmetric tridiagonal matrix; returns ascending
/// eigenvalues with the first component of each normalized eigenvector.
fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Vec<(f64, f64)> {
    let n = diag.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

fn laguerre_jacobi(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    let diag = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let off = (1..n)
        .map(|k| (k as f64 * (k as f64 + alpha)).sqrt())
        .collect();
    (diag, off)
}

/// Newton polish of a root guess given `value/derivative`; keeps the better
/// of the old and new point.
fn polish(mut x: f64, step: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    let (mut fx, mut dfx) = step(x);
    for _ in 0..3 {
        if dfx == 0.0 || fx == 0.0 {
            break;
        }
        let cand = x - fx / dfx;
        let (fc, dfc) = step(cand);
        if fc.abs() >= fx.abs() {
            break;
        }
        x = cand;
        fx = fc;
        dfx = dfc;
    }
    (
        x,
        if dfx == 0.0 {
            f64::INFINITY
        } else {
            (fx / dfx).abs()
        },
    )
}

/// Zeroes of `L_N^{(α)}`, ascending.
pub fn laguerre_zeros(n: usize, alpha: f64) -> Result<ZeroSet> {
    check_laguerre_alpha(alpha)?;
    if n == 0 {
        return Err(Error::invalid("Laguerre zeroes need N >= 1"));
    }
    let (diag, off) = laguerre_jacobi(n, alpha);
    let mut values = Vec::with_capacity(n);
    for (guess, _) in tridiagonal_eigen(&diag, &off) {
        let (s, newton_step) = polish(guess, |x| {
            let (ln, lm1) = laguerre_pair(n, alpha, x);
            (ln, (n as f64 * ln - (n as f64 + alpha) * lm1) / x)
        });
        if !(s > 0.0) || newton_step > 1e-10 * s {
            return Err(Error::NonConvergence(format!(
                "Laguerre zero near {guess} for N = {n}, α = {alpha}: Newton step {newton_step:e}"
            )));
        }
        values.push(s);
    }
    check_strictly_increasing(&values, "Laguerre")?;
    Ok(ZeroSet {
        values,
        family: ZeroFamily::Laguerre { n, alpha },
    })
}

/// `√s_i` for the zeroes `s_i` of `L_N^{(α)}`.
pub fn sqrt_laguerre_zeros(n: usize, alpha: f64) -> Result<ZeroSet> {
    laguerre_zeros(n, alpha)?.sqrt()
}

/// Zeroes of the physicists' Hermite polynomial `H_N`, ascending and
/// symmetric about the origin.
pub fn hermite_zeros(n: usize) -> Result<ZeroSet> {
    if n == 0 {
        return Err(Error::invalid("Hermite zeroes need N >= 1"));
    }
    let diag = vec![0.0; n];
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut values = Vec::with_capacity(n);
    for (guess, _) in tridiagonal_eigen(&diag, &off) {
        let (s, newton_step) = polish(guess, |x| {
            let (h, hm1) = hermite_pair(n, x);
            (h, 2.0 * n as f64 * hm1)
        });
        if newton_step > 1e-10 * s.abs().max(1.0) {
            return Err(Error::NonConvergence(format!(
                "Hermite zero near {guess} for N = {n}: Newton step {newton_step:e}"
            )));
        }
        values.push(s);
    }
    // enforce the reflection symmetry exactly
    for i in 0..n / 2 {
        let m = 0.5 * (values[n - 1 - i] - values[i]);
        values[i] = -m;
        values[n - 1 - i] = m;
    }
    if n % 2 == 1 {
        values[n / 2] = 0.0;
    }
    check_strictly_increasing(&values, "Hermite")?;
    Ok(ZeroSet {
        values,
        family: ZeroFamily::Hermite { n },
    })
}

fn check_strictly_increasing(values: &[f64], what: &str) -> Result<()> {
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::NonConvergence(format!(
            "{what} zeroes not separated: {values:?}"
        )));
    }
    Ok(())
}

/// Gauss quadrature rule.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss–Legendre rule on `[−1, 1]`.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let diag = vec![0.0; n];
        let off: Vec<f64> = (1..n)
            .map(|k| {
                let k = k as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            })
            .collect();
        let (nodes, weights) = tridiagonal_eigen(&diag, &off)
            .into_iter()
            .map(|(x, v)| (x, 2.0 * v * v))
            .unzip();
        GaussRule { nodes, weights }
    }

    /// Gauss–Laguerre rule for the weight `x^α e^{−x}` on `(0, ∞)`.
    pub fn laguerre(n: usize, alpha: f64) -> Self {
        assert!(n >= 1, "a Gauss rule needs at least one node");
        let (diag, off) = laguerre_jacobi(n, alpha);
        let mass = ln_gamma(alpha + 1.0).exp();
        let (nodes, weights) = tridiagonal_eigen(&diag, &off)
            .into_iter()
            .map(|(x, v)| (x, mass * v * v))
            .unzip();
        GaussRule { nodes, weights }
    }

    /// `∫_a^b f` with the (Legendre) rule mapped onto `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite integral over `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = a + p as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

/// `ln I_ν(x)` for `ν ≥ −1/2`, `x ≥ 0`.
pub fn ln_modified_bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= -0.5) || !nu.is_finite() {
        return Err(Error::invalid(format!(
            "Bessel order must be >= -1/2, got {nu}"
        )));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!(
            "Bessel argument must be finite and >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 { 0.0 } else { f64::NEG_INFINITY });
    }
    if x >= 20.0 && 4.0 * nu * nu < 2.0 * x {
        if let Some(v) = ln_bessel_asymptotic(nu, x) {
            return Ok(v);
        }
    }
    Ok(ln_bessel_series(nu, x))
}

/// Power series `Σ (x/2)^{2k+ν} / (k! Γ(k+ν+1))` summed relative to its
/// first term; all terms are positive.
fn ln_bessel_series(nu: f64, x: f64) -> f64 {
    let lead = nu * (0.5 * x).ln() - ln_gamma(nu + 1.0);
    let q = 0.25 * x * x;
    // log of the running sum relative to `lead`, rescaled when large
    let mut ln_scale = 0.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + nu));
        sum += term;
        if term < 1e-17 * sum && k > q.sqrt() {
            break;
        }
        if sum > 1e250 {
            ln_scale += sum.ln();
            term /= sum;
            sum = 1.0;
        }
    }
    lead + ln_scale + sum.ln()
}

/// Hankel expansion `e^x/√(2πx) Σ (−1)^k a_k(ν)/x^k`; `None` when the
/// terms stop shrinking before reaching double precision.
fn ln_bessel_asymptotic(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() && next != 0.0 {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            return Some(x - 0.5 * (2.0 * std::f64::consts::PI * x).ln() + sum.ln());
        }
    }
    None
}

/// Modified Bessel function of the first kind `I_ν(x)`.
pub fn modified_bessel_i(nu: f64, x: f64) -> Result<f64> {
    let ln = ln_modified_bessel_i(nu, x)?;
    if ln > f64::MAX.ln() {
        return Err(Error::Overflow(format!(
            "I_{nu}({x}) exceeds the f64 range"
        )));
    }
    Ok(ln.exp())
}

/// Exponentially scaled `e^{−x} I_ν(x)`.
pub fn modified_bessel_i_scaled(nu: f64, x: f64) -> Result<f64> {
    Ok((ln_modified_bessel_i(nu, x)? - x).exp())
}

/// Transition density of a single Bessel process of index `ν` from `x` to
/// `y` in time `t`. At `x = 0` the `x → 0` limit is used.
pub fn bessel_tpd_single(t: f64, y: f64, x: f64, nu: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("start point must be >= 0, got {x}")));
    }
    if !(nu >= -0.5) {
        return Err(Error::invalid(format!(
            "Bessel index must be >= -1/2, got {nu}"
        )));
    }
    if !(y > 0.0) {
        return Ok(if y == 0.0 && nu > -0.5 { 0.0 } else { f64::NAN });
    }
    let z = x * y / t;
    let ln = if z == 0.0 {
        (2.0 * nu + 1.0) * y.ln()
            - (nu + 1.0) * t.ln()
            - nu * std::f64::consts::LN_2
            - ln_gamma(nu + 1.0)
            - y * y / (2.0 * t)
    } else {
        (nu + 1.0) * y.ln() - nu * x.ln() - t.ln() - (x - y).powi(2) / (2.0 * t)
            + ln_modified_bessel_i(nu, z)?
            - z
    };
    Ok(ln.exp())
}

/// A scalar potential with its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialValue {
    pub value: f64,
    pub gradient: Vec<f64>,
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_nonzero(z: &[f64]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::invalid("empty configuration"));
    }
    if let Some(i) = z.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(Error::domain(format!(
            "coordinate {i} is zero or not finite"
        )));
    }
    Ok(())
}

/// Differences `z_i² − z_j²`, rejecting near-coincident squares.
fn square_gaps(z: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = z.len();
    let mut gaps = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let g = z[i] * z[i] - z[j] * z[j];
                if g.abs() < 1e-300 {
                    return Err(Error::domain(format!(
                        "coordinates {i} and {j} coincide up to sign"
                    )));
                }
                gaps[i][j] = g;
            }
        }
    }
    Ok(gaps)
}

/// Constant that shifts the minimum of [`potential_f`] to zero.
fn potential_f_offset(nu: f64, n: usize) -> f64 {
    let nf = n as f64;
    let mut c = -nf * (nf + nu - 0.5);
    for i in 1..=n {
        let i = i as f64;
        c += xlogx(i) + xlogx(nu + i - 0.5);
    }
    c
}

/// The type-B freezing potential
/// `F(z) = |z|² − (ν+½) Σ ln z_i² − 2 Σ_{i<j} ln|z_j² − z_i²| + const`,
/// with the constant chosen so that `min F = 0`.
pub fn potential_f(z: &[f64], nu: f64) -> Result<PotentialValue> {
    check_nonzero(z)?;
    let gaps = square_gaps(z)?;
    let n = z.len();
    let a = nu + 0.5;
    let mut value = potential_f_offset(nu, n);
    let mut gradient = vec![0.0; n];
    for i in 0..n {
        let zi = z[i];
        value += zi * zi - a * (zi * zi).ln();
        let mut pair = 0.0;
        for j in 0..n {
            if j != i {
                pair += 1.0 / gaps[i][j];
                if j > i {
                    value -= 2.0 * gaps[i][j].abs().ln();
                }
            }
        }
        gradient[i] = 2.0 * zi - 2.0 * a / zi - 4.0 * zi * pair;
    }
    Ok(PotentialValue { value, gradient })
}

/// Hessian of [`potential_f`].
pub fn potential_f_hessian(z: &[f64], nu: f64) -> Result<DMatrix<f64>> {
    check_nonzero(z)?;
    let gaps = square_gaps(z)?;
    let n = z.len();
    let a = nu + 0.5;
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut d = 2.0 + 2.0 * a / (z[i] * z[i]);
        for j in 0..n {
            if j != i {
                let g2 = gaps[i][j] * gaps[i][j];
                d += 4.0 * (z[i] * z[i] + z[j] * z[j]) / g2;
                h[(i, j)] = -8.0 * z[i] * z[j] / g2;
            }
        }
        h[(i, i)] = d;
    }
    Ok(h)
}

/// The large-`ν` potential `F̃(z) = |z|² − β Σ ln z_i² + βN(ln β − 1)`.
pub fn potential_f_tilde(z: &[f64], beta: f64) -> Result<PotentialValue> {
    check_nonzero(z)?;
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("β must be positive, got {beta}")));
    }
    let n = z.len() as f64;
    let value =
        z.iter().map(|&v| v * v - beta * (v * v).ln()).sum::<f64>() + beta * n * (beta.ln() - 1.0);
    let gradient = z.iter().map(|&v| 2.0 * v - 2.0 * beta / v).collect();
    Ok(PotentialValue { value, gradient })
}

/// `z_i² − (ν+½) − Σ_{j≠i} 2z_i²/(z_i² − z_j²)`; vanishes at the critical
/// points of [`potential_f`].
pub fn stationarity_residual(z: &[f64], nu: f64) -> Result<Vec<f64>> {
    check_nonzero(z)?;
    let gaps = square_gaps(z)?;
    Ok((0..z.len())
        .map(|i| {
            let zi2 = z[i] * z[i];
            let pair: f64 = (0..z.len())
                .filter(|&j| j != i)
                .map(|j| 2.0 * zi2 / gaps[i][j])
                .sum();
            zi2 - (nu + 0.5) - pair
        })
        .collect())
}

/// Residuals of the three sum rules satisfied by the Laguerre zeroes.
#[derive(Debug, Clone, PartialEq)]
pub struct RootIdentities {
    pub zeros: Vec<f64>,
    /// `Σ s_i − N(α+N)`.
    pub sum_residual: f64,
    /// `Σ ln s_i − Σ ln(α+i)`.
    pub logsum_residual: f64,
    /// `2Σ_{i<j} ln|s_j − s_i| − Σ [(i−1) ln(α+i) + i ln i]`.
    pub logpair_residual: f64,
    pub sum_ok: bool,
    pub logsum_ok: bool,
    pub logpair_ok: bool,
}

impl RootIdentities {
    pub fn all_ok(&self) -> bool {
        self.sum_ok && self.logsum_ok && self.logpair_ok
    }
}

/// Evaluates the Laguerre-zero sum rules with tolerance `1e−8·N`.
pub fn root_identities(n: usize, alpha: f64) -> Result<RootIdentities> {
    let zeros = laguerre_zeros(n, alpha)?.values;
    let nf = n as f64;
    let sum_residual = zeros.iter().sum::<f64>() - nf * (alpha + nf);
    let logsum_residual = zeros.iter().map(|s| s.ln()).sum::<f64>()
        - (1..=n).map(|i| (alpha + i as f64).ln()).sum::<f64>();
    let mut pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pairs += (zeros[j] - zeros[i]).abs().ln();
        }
    }
    let rhs: f64 = (1..=n)
        .map(|i| {
            let i = i as f64;
            (i - 1.0) * (alpha + i).ln() + xlogx(i)
        })
        .sum();
    let logpair_residual = 2.0 * pairs - rhs;
    let tol = 1e-8 * nf;
    Ok(RootIdentities {
        zeros,
        sum_residual,
        logsum_residual,
        logpair_residual,
        sum_ok: sum_residual.abs() <= tol,
        logsum_ok: logsum_residual.abs() <= tol,
        logpair_ok: logpair_residual.abs() <= tol,
    })
}
