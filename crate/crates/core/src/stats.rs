//! Density estimation from ensembles, the exact `β = 2` one-point density,
//! the large-β and large-ν steady-state densities with their maximizers and
//! numerical normalizers, peak detection and histogram distances.

use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use statrs::function::gamma::ln_gamma;

use crate::dunkl::{in_open_chamber_b, ModelParams};
use crate::error::{Error, Result};
use crate::orthopoly::{
    laguerre_eval, potential_f, potential_f_hessian, potential_f_tilde, GaussRule,
};
use crate::sde::EnsembleResult;

/// Which coordinates a histogram pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HistogramMode {
    /// All `N` coordinates of every sample.
    Pooled,
    /// Only the `i`-th (zero based) ordered coordinate.
    Coordinate(usize),
}

/// Histogram on the lattice of bins `[k·w, (k+1)·w)`, covering every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// Lattice index of the first bin; the left edge is `first_bin·bin_width`.
    pub first_bin: i64,
    pub counts: Vec<u64>,
    pub scale_applied: f64,
    pub n_samples: u64,
    pub n_particles: usize,
    pub mode: HistogramMode,
}

impl Histogram {
    /// Pools all coordinates of a row-major `n_samples × n_particles` matrix
    /// after dividing by `scale`.
    pub fn pooled(finals: &[f64], n_particles: usize, bin_width: f64, scale: f64) -> Result<Self> {
        Self::check_shape(finals, n_particles)?;
        Self::build(
            finals.iter().copied(),
            finals.len() / n_particles,
            n_particles,
            bin_width,
            scale,
            HistogramMode::Pooled,
        )
    }

    /// Histogram of one ordered coordinate.
    pub fn coordinate(
        finals: &[f64],
        n_particles: usize,
        index: usize,
        bin_width: f64,
        scale: f64,
    ) -> Result<Self> {
        Self::check_shape(finals, n_particles)?;
        if index >= n_particles {
            return Err(Error::invalid(format!(
                "coordinate {index} out of range for N = {n_particles}"
            )));
        }
        let values = finals.chunks_exact(n_particles).map(|row| row[index]);
        Self::build(
            values,
            finals.len() / n_particles,
            n_particles,
            bin_width,
            scale,
            HistogramMode::Coordinate(index),
        )
    }

    /// Pooled histogram of an ensemble's completed paths.
    pub fn from_ensemble(result: &EnsembleResult, bin_width: f64, scale: f64) -> Result<Self> {
        Self::pooled(&result.finals, result.n_particles, bin_width, scale)
    }

    /// Assembles a histogram from explicit counts.
    pub fn from_counts(
        first_bin: i64,
        bin_width: f64,
        counts: Vec<u64>,
        n_samples: u64,
        n_particles: usize,
        mode: HistogramMode,
    ) -> Result<Self> {
        check_width(bin_width)?;
        if counts.is_empty() || n_samples == 0 || n_particles == 0 {
            return Err(Error::invalid("empty histogram"));
        }
        Ok(Histogram {
            bin_width,
            first_bin,
            counts,
            scale_applied: 1.0,
            n_samples,
            n_particles,
            mode,
        })
    }

    fn check_shape(finals: &[f64], n_particles: usize) -> Result<()> {
        if n_particles == 0 || finals.is_empty() {
            return Err(Error::invalid("empty ensemble"));
        }
        if finals.len() % n_particles != 0 {
            return Err(Error::invalid("ensemble length is not a multiple of N"));
        }
        Ok(())
    }

    fn build(
        values: impl Iterator<Item = f64> + Clone,
        n_samples: usize,
        n_particles: usize,
        bin_width: f64,
        scale: f64,
        mode: HistogramMode,
    ) -> Result<Self> {
        check_width(bin_width)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::invalid(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let lattice = |v: f64| (v / scale / bin_width).floor() as i64;
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for v in values.clone() {
            if !v.is_finite() {
                return Err(Error::invalid("non-finite sample"));
            }
            let k = lattice(v);
            lo = lo.min(k);
            hi = hi.max(k);
        }
        let mut counts = vec![0u64; (hi - lo + 1) as usize];
        for v in values {
            counts[(lattice(v) - lo) as usize] += 1;
        }
        Ok(Histogram {
            bin_width,
            first_bin: lo,
            counts,
            scale_applied: scale,
            n_samples: n_samples as u64,
            n_particles,
            mode,
        })
    }

    pub fn origin(&self) -> f64 {
        self.first_bin as f64 * self.bin_width
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn center(&self, bin: usize) -> f64 {
        (self.first_bin as f64 + bin as f64 + 0.5) * self.bin_width
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_bins()).map(|b| self.center(b)).collect()
    }

    /// Number of binned values: `n_samples·N` when pooled.
    pub fn expected_total(&self) -> u64 {
        match self.mode {
            HistogramMode::Pooled => self.n_samples * self.n_particles as u64,
            HistogramMode::Coordinate(_) => self.n_samples,
        }
    }

    /// Normalized density per bin, integrating to one.
    pub fn densities(&self) -> Vec<f64> {
        let norm = self.expected_total() as f64 * self.bin_width;
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// CSV with header `bin_center,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_center,density")?;
        for (c, d) in self.centers().iter().zip(self.densities()) {
            writeln!(w, "{c:.16e},{d:.16e}")?;
        }
        Ok(())
    }
}

fn check_width(bin_width: f64) -> Result<()> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid(format!(
            "bin width must be positive, got {bin_width}"
        )));
    }
    Ok(())
}

/// Pooled histogram of all coordinates divided by `scale`.
pub fn histogram(
    finals: &[f64],
    n_particles: usize,
    bin_width: f64,
    scale: f64,
) -> Result<Histogram> {
    Histogram::pooled(finals, n_particles, bin_width, scale)
}

/// Indices of peaks whose topographic prominence is at least `min_height`.
///
/// A peak is a maximal plateau higher than its neighbours; a plateau touching
/// an end of the array counts when it is higher than its single neighbour.
/// Prominence is the height above the higher of the two lowest points
/// reached on each side before meeting something taller (or the array end).
/// A monotone sequence has exactly one peak, at its high end.
pub fn peak_indices(heights: &[f64], min_height: f64) -> Vec<usize> {
    let n = heights.len();
    let mut peaks = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && heights[j + 1] == heights[i] {
            j += 1;
        }
        let left_lower = i == 0 || heights[i - 1] < heights[i];
        let right_lower = j + 1 == n || heights[j + 1] < heights[i];
        if left_lower && right_lower && n > 1 && heights[i] > 0.0 {
            let top = heights[i];
            // ties to the left count as taller so equal twins report once
            let mut left_min = top;
            let mut k = i;
            while k > 0 && heights[k - 1] < top {
                k -= 1;
                left_min = left_min.min(heights[k]);
            }
            let mut right_min = top;
            let mut k = j;
            while k + 1 < n && heights[k + 1] <= top {
                k += 1;
                right_min = right_min.min(heights[k]);
            }
            // a peak sitting on an array end is bounded by its other side only
            let base = match (i == 0, j + 1 == n) {
                (true, true) => 0.0,
                (true, false) => right_min,
                (false, true) => left_min,
                (false, false) => left_min.max(right_min),
            };
            if top - base >= min_height {
                peaks.push((i + j) / 2);
            }
        }
        i = j + 1;
    }
    peaks
}

/// Centers of histogram peaks with prominence at least
/// `min_prominence × max density`, ascending.
pub fn find_peaks(h: &Histogram, min_prominence: f64) -> Vec<f64> {
    let d = h.densities();
    let top = d.iter().cloned().fold(0.0, f64::max);
    peak_indices(&d, min_prominence * top)
        .into_iter()
        .map(|b| h.center(b))
        .collect()
}

/// Full width at half maximum of the peak containing `center`, using linear
/// interpolation between bin centers.
pub fn full_width_half_max(h: &Histogram, center: f64) -> Option<f64> {
    let d = h.densities();
    let k =
        ((center / h.bin_width).floor() as i64 - h.first_bin).clamp(0, d.len() as i64 - 1) as usize;
    let top = d[k];
    if top <= 0.0 {
        return None;
    }
    let half = 0.5 * top;
    let mut l = k;
    while l > 0 && d[l] > half {
        l -= 1;
    }
    let mut r = k;
    while r + 1 < d.len() && d[r] > half {
        r += 1;
    }
    if d[l] > half || d[r] > half {
        return None;
    }
    let cross = |a: usize, b: usize| {
        let (ya, yb) = (d[a], d[b]);
        h.center(a) + (half - ya) / (yb - ya) * (h.center(b) - h.center(a))
    };
    Some(cross(r - 1, r) - cross(l, l + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceKind {
    L1,
    Sup,
}

/// Distance between the normalized histogram and `f` on the bin centers.
pub fn density_distance(h: &Histogram, f: impl Fn(f64) -> f64, kind: DistanceKind) -> f64 {
    let diffs = h
        .densities()
        .into_iter()
        .enumerate()
        .map(|(b, d)| (d - f(h.center(b))).abs());
    match kind {
        DistanceKind::L1 => diffs.sum::<f64>() * h.bin_width,
        DistanceKind::Sup => diffs.fold(0.0, f64::max),
    }
}

/// `count` equal bins on `[lo, hi]`, evaluated at the bin centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) || count == 0 {
            return Err(Error::invalid(format!("invalid grid {lo}:{hi}:{count}")));
        }
        Ok(UniformGrid { lo, hi, count })
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.count)
            .map(|i| self.lo + (i as f64 + 0.5) * w)
            .collect()
    }
}

/// One-point density `K_{N,t}(y, y)` of `N` noncolliding Bessel processes at
/// `β = 2` started from the origin; integrates to `N` over `(0, ∞)`.
pub fn exact_density_beta2(y: f64, t: f64, n: usize, nu: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if !(nu > -1.0) {
        return Err(Error::invalid(format!("ν must exceed -1, got {nu}")));
    }
    if !(y > 0.0) {
        return Ok(0.0);
    }
    let z = y * y / (2.0 * t);
    let l_n = laguerre_eval(n, nu, z)?;
    let l_prev = laguerre_eval(n - 1, nu, z)?;
    let l_next = laguerre_eval(n + 1, nu, z)?;
    let nf = n as f64;
    let bracket = nf * l_n * l_n + l_n * l_prev - (nf + 1.0) * l_next * l_prev;
    let ln_pref = ln_gamma(nf + 1.0) - ln_gamma(nu + nf) + (2.0 / y).ln() + nu * z.ln() - z;
    Ok((bracket * ln_pref.exp()).max(0.0))
}

fn check_chamber(u: &[f64], params: &ModelParams) -> Result<()> {
    if u.len() != params.n_particles() {
        return Err(Error::invalid(format!(
            "expected {} coordinates, got {}",
            params.n_particles(),
            u.len()
        )));
    }
    if !in_open_chamber_b(u) {
        return Err(Error::domain(format!(
            "{u:?} is outside the open type-B chamber"
        )));
    }
    Ok(())
}

/// `ln` of the large-β steady density `e^{−βF(u)/2} β^{N/2}` (unnormalized).
pub fn ln_steady_density_beta(u: &[f64], params: &ModelParams) -> Result<f64> {
    check_chamber(u, params)?;
    let f = potential_f(u, params.nu())?;
    let beta = params.beta();
    Ok(-0.5 * beta * f.value + 0.5 * u.len() as f64 * beta.ln())
}

pub fn steady_density_beta(u: &[f64], params: &ModelParams) -> Result<f64> {
    Ok(ln_steady_density_beta(u, params)?.exp())
}

/// `ln` of the large-ν steady density
/// `e^{−νF̃(u)/2} ν^{N/2} Π_{i<j}|ν(u_j² − u_i²)|^β` (unnormalized).
pub fn ln_steady_density_nu(u: &[f64], params: &ModelParams) -> Result<f64> {
    check_chamber(u, params)?;
    let (beta, nu) = (params.beta(), params.nu());
    if !(nu > 0.0) {
        return Err(Error::invalid("the large-ν density needs ν > 0"));
    }
    let f = potential_f_tilde(u, beta)?;
    let mut ln = -0.5 * nu * f.value + 0.5 * u.len() as f64 * nu.ln();
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            ln += beta * (nu * (u[j] * u[j] - u[i] * u[i])).abs().ln();
        }
    }
    Ok(ln)
}

pub fn steady_density_nu(u: &[f64], params: &ModelParams) -> Result<f64> {
    Ok(ln_steady_density_nu(u, params)?.exp())
}

/// Exponent `β(ν + 1/2 − 1/β)/2` of `λ_i` in the β-Laguerre density.
fn laguerre_ensemble_power(params: &ModelParams) -> f64 {
    params.beta() * (params.nu() + 0.5 - 1.0 / params.beta()) / 2.0
}

/// `ln` of `e^{−Σλ_i/2} Π λ_i^{β(ν+1/2−1/β)/2} Π_{i<j}|λ_j − λ_i|^β`.
pub fn ln_laguerre_ensemble_density(lambda: &[f64], params: &ModelParams) -> Result<f64> {
    check_chamber(lambda, params)?;
    let a = laguerre_ensemble_power(params);
    let beta = params.beta();
    let mut ln = 0.0;
    for i in 0..lambda.len() {
        ln += -0.5 * lambda[i] + a * lambda[i].ln();
        for j in i + 1..lambda.len() {
            ln += beta * (lambda[j] - lambda[i]).ln();
        }
    }
    Ok(ln)
}

pub fn laguerre_ensemble_density(lambda: &[f64], params: &ModelParams) -> Result<f64> {
    Ok(ln_laguerre_ensemble_density(lambda, params)?.exp())
}

/// The three chamber densities with their analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyKind {
    /// Large-β density in `u = y/√(βt)`.
    Beta,
    /// Large-ν density in `u = y/√(νt)`.
    Nu,
    /// β-Laguerre eigenvalue density in `λ = βu²`.
    LaguerreEnsemble,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamberDensity {
    pub kind: SteadyKind,
    pub params: ModelParams,
}

/// Log-density with gradient and Hessian at a point.
struct Derivatives {
    value: f64,
    gradient: DVector<f64>,
    hessian: DMatrix<f64>,
}

impl ChamberDensity {
    pub fn new(kind: SteadyKind, params: ModelParams) -> Self {
        ChamberDensity { kind, params }
    }

    pub fn dim(&self) -> usize {
        self.params.n_particles()
    }

    /// Unnormalized log-density.
    pub fn ln_value(&self, u: &[f64]) -> Result<f64> {
        match self.kind {
            SteadyKind::Beta => ln_steady_density_beta(u, &self.params),
            SteadyKind::Nu => ln_steady_density_nu(u, &self.params),
            SteadyKind::LaguerreEnsemble => ln_laguerre_ensemble_density(u, &self.params),
        }
    }

    fn derivatives(&self, u: &[f64]) -> Result<Derivatives> {
        let value = self.ln_value(u)?;
        let n = u.len();
        let beta = self.params.beta();
        let (gradient, hessian) = match self.kind {
            SteadyKind::Beta => {
                let f = potential_f(u, self.params.nu())?;
                let h = potential_f_hessian(u, self.params.nu())?;
                (
                    DVector::from_iterator(n, f.gradient.iter().map(|g| -0.5 * beta * g)),
                    h * (-0.5 * beta),
                )
            }
            SteadyKind::Nu => {
                let nu = self.params.nu();
                let mut g = DVector::zeros(n);
                let mut h = DMatrix::zeros(n, n);
                for k in 0..n {
                    let uk = u[k];
                    g[k] = -nu * (uk - beta / uk);
                    h[(k, k)] = -nu * (1.0 + beta / (uk * uk));
                    for j in 0..n {
                        if j == k {
                            continue;
                        }
                        let gap = uk * uk - u[j] * u[j];
                        g[k] += beta * 2.0 * uk / gap;
                        h[(k, k)] -= beta * 2.0 * (uk * uk + u[j] * u[j]) / (gap * gap);
                        h[(k, j)] = beta * 4.0 * uk * u[j] / (gap * gap);
                    }
                }
                (g, h)
            }
            SteadyKind::LaguerreEnsemble => {
                let a = laguerre_ensemble_power(&self.params);
                let mut g = DVector::zeros(n);
                let mut h = DMatrix::zeros(n, n);
                for k in 0..n {
                    g[k] = -0.5 + a / u[k];
                    h[(k, k)] = -a / (u[k] * u[k]);
                    for j in 0..n {
                        if j == k {
                            continue;
                        }
                        let d = u[k] - u[j];
                        g[k] += beta / d;
                        h[(k, k)] -= beta / (d * d);
                        h[(k, j)] = beta / (d * d);
                    }
                }
                (g, h)
            }
        };
        Ok(Derivatives {
            value,
            gradient,
            hessian,
        })
    }

    /// A generic ordered starting point that knows nothing of the maximizer.
    fn starting_point(&self) -> Vec<f64> {
        let n = self.dim();
        let nf = n as f64;
        let nu = self.params.nu();
        let beta = self.params.beta();
        (1..=n)
            .map(|i| {
                let frac = i as f64 / (nf + 1.0);
                match self.kind {
                    SteadyKind::Beta => (4.0 * (nf + nu + 0.5) * frac).sqrt(),
                    SteadyKind::Nu => beta.sqrt() * (1.0 + (frac - 0.5) / nu.sqrt().max(1.0)),
                    SteadyKind::LaguerreEnsemble => 4.0 * beta * (nf + nu + 0.5) * frac,
                }
            })
            .collect()
    }

    /// Maximizer of the density by damped Newton iteration with a
    /// backtracking line search that stays inside the chamber.
    pub fn argmax(&self) -> Result<Vec<f64>> {
        let mut u = self.starting_point();
        let n = u.len();
        let mut d = self.derivatives(&u)?;
        for _ in 0..500 {
            let grad_norm = d.gradient.norm();
            let neg_h = -d.hessian.clone();
            let direction = match neg_h.clone().cholesky() {
                Some(ch) => ch.solve(&d.gradient),
                None => d.gradient.clone() / neg_h.diagonal().amax().max(1.0),
            };
            let slope = direction.dot(&d.gradient);
            let mut step = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let cand: Vec<f64> = (0..n).map(|k| u[k] + step * direction[k]).collect();
                if in_open_chamber_b(&cand) {
                    if let Ok(v) = self.ln_value(&cand) {
                        if v >= d.value + 1e-4 * step * slope
                            || step * direction.amax()
                                < 1e-15 * (1.0 + u.iter().cloned().fold(0.0, f64::max))
                        {
                            u = cand;
                            moved = true;
                            break;
                        }
                    }
                }
                step *= 0.5;
            }
            let size = step * direction.amax();
            if moved {
                d = self.derivatives(&u)?;
            }
            let scale = 1.0 + u.iter().cloned().fold(0.0, f64::max);
            if !moved
                || size <= 1e-14 * scale
                || d.gradient.norm() <= 1e-12 * scale * (1.0 + d.value.abs())
            {
                if d.gradient.norm() <= 1e-6 * (1.0 + grad_norm.max(1.0)) * scale {
                    return Ok(u);
                }
                if !moved {
                    break;
                }
            }
        }
        Err(Error::NonConvergence(format!(
            "{:?} argmax did not converge",
            self.kind
        )))
    }

    /// Mode with per-coordinate spreads `1/√(−∂²ln f)` there.
    fn mode_and_widths(&self) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mode = self.argmax()?;
        let d = self.derivatives(&mode)?;
        let widths = (0..mode.len())
            .map(|k| 1.0 / (-d.hessian[(k, k)]).max(1e-300).sqrt())
            .collect();
        Ok((mode, widths, d.value))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMethod {
    Quadrature,
    ImportanceSampling,
}

/// `ln ∫_{C_B} f` with a relative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub ln_integral: f64,
    pub rel_error: f64,
    pub method: NormalizationMethod,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizeOptions {
    pub seed: u64,
    pub samples: usize,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            seed: 0x5eed,
            samples: 200_000,
        }
    }
}

/// Nested Gauss–Legendre integration over ordered coordinates.
struct OrderedQuadrature<'a> {
    density: &'a ChamberDensity,
    rule: GaussRule,
    panels: usize,
    upper: f64,
    ln_shift: f64,
}

impl OrderedQuadrature<'_> {
    /// Integral over `point[k..]` with `point[k−1] = lo`; `fixed` pins one
    /// coordinate to a value.
    fn integrate(
        &self,
        k: usize,
        lo: f64,
        point: &mut Vec<f64>,
        fixed: Option<(usize, f64)>,
    ) -> f64 {
        let n = self.density.dim();
        if k == n {
            return match self.density.ln_value(point) {
                Ok(v) => (v - self.ln_shift).exp(),
                Err(_) => 0.0,
            };
        }
        if let Some((slot, v)) = fixed {
            if slot == k {
                if v <= lo {
                    return 0.0;
                }
                point[k] = v;
                return self.integrate(k + 1, v, point, fixed);
            }
        }
        let hi = match fixed {
            Some((slot, v)) if slot > k => v,
            _ => self.upper,
        };
        if hi <= lo {
            return 0.0;
        }
        let h = (hi - lo) / self.panels as f64;
        let mut total = 0.0;
        for p in 0..self.panels {
            let a = lo + p as f64 * h;
            let mid = a + 0.5 * h;
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                point[k] = mid + 0.5 * h * x;
                total += w * 0.5 * h * self.integrate(k + 1, point[k], point, fixed);
            }
        }
        total
    }
}

/// Upper edge of the integration box around the mode.
fn box_upper(mode: &[f64], widths: &[f64]) -> f64 {
    mode.iter()
        .zip(widths)
        .map(|(m, w)| m + 14.0 * w)
        .fold(0.0, f64::max)
}

/// Largest dimension handled by nested quadrature.
pub const QUADRATURE_MAX_DIM: usize = 3;

/// `∫_{C_B} f` by nested quadrature (`N ≤ 3`, refined until two successive
/// panel counts agree) or by importance sampling from independent scaled
/// chi distributions fitted at the mode (`N > 3`).
pub fn normalize_over_chamber(
    density: &ChamberDensity,
    opts: &NormalizeOptions,
) -> Result<Normalization> {
    let (mode, widths, ln_max) = density.mode_and_widths()?;
    if density.dim() <= QUADRATURE_MAX_DIM {
        let upper = box_upper(&mode, &widths);
        let mut previous: Option<f64> = None;
        let mut panels = 4;
        loop {
            let q = OrderedQuadrature {
                density,
                rule: GaussRule::legendre(10),
                panels,
                upper,
                ln_shift: ln_max,
            };
            let mut point = vec![0.0; density.dim()];
            let value = q.integrate(0, 0.0, &mut point, None);
            if let Some(prev) = previous {
                let rel = ((value - prev) / value).abs();
                if rel < 1e-9 || panels >= 32 {
                    return Ok(Normalization {
                        ln_integral: value.ln() + ln_max,
                        rel_error: rel,
                        method: NormalizationMethod::Quadrature,
                    });
                }
            }
            previous = Some(value);
            panels *= 2;
        }
    }
    importance_sample(density, &mode, &widths, ln_max, opts)
}

/// Scaled chi proposal `σ·√χ²_k` with mode `m` and curvature matched to a
/// spread `s` (inflated for heavier tails).
struct ChiProposal {
    dof: f64,
    sigma: f64,
    dist: ChiSquared<f64>,
    ln_norm: f64,
}

impl ChiProposal {
    fn fitted(mode: f64, spread: f64) -> Result<Self> {
        let spread = 1.5 * spread;
        // −(ln g)'' at the mode equals 2/σ²
        let sigma = std::f64::consts::SQRT_2 * spread;
        let dof = (mode / sigma).powi(2) + 1.0;
        let dist = ChiSquared::new(dof)
            .map_err(|e| Error::NonConvergence(format!("chi proposal: {e}")))?;
        let ln_norm =
            (dof / 2.0 - 1.0) * std::f64::consts::LN_2 + ln_gamma(dof / 2.0) + dof * sigma.ln();
        Ok(ChiProposal {
            dof,
            sigma,
            dist,
            ln_norm,
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.sigma * self.dist.sample(rng).sqrt()
    }

    fn ln_pdf(&self, u: f64) -> f64 {
        (self.dof - 1.0) * u.ln() - u * u / (2.0 * self.sigma * self.sigma) - self.ln_norm
    }
}

fn importance_sample(
    density: &ChamberDensity,
    mode: &[f64],
    widths: &[f64],
    ln_max: f64,
    opts: &NormalizeOptions,
) -> Result<Normalization> {
    if opts.samples < 2 {
        return Err(Error::invalid(
            "importance sampling needs at least two samples",
        ));
    }
    let proposals: Vec<ChiProposal> = mode
        .iter()
        .zip(widths)
        .map(|(&m, &w)| ChiProposal::fitted(m, w))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut u = vec![0.0; mode.len()];
    for _ in 0..opts.samples {
        let mut ln_q = 0.0;
        for (k, p) in proposals.iter().enumerate() {
            u[k] = p.sample(&mut rng);
            ln_q += p.ln_pdf(u[k]);
        }
        let w = if in_open_chamber_b(&u) {
            density
                .ln_value(&u)
                .map(|v| (v - ln_max - ln_q).exp())
                .unwrap_or(0.0)
        } else {
            0.0
        };
        sum += w;
        sum_sq += w * w;
    }
    let m = opts.samples as f64;
    let mean = sum / m;
    if !(mean > 0.0) {
        return Err(Error::NonConvergence("importance weights vanished".into()));
    }
    let var = (sum_sq / m - mean * mean).max(0.0) / (m - 1.0);
    Ok(Normalization {
        ln_integral: mean.ln() + ln_max,
        rel_error: var.sqrt() / mean,
        method: NormalizationMethod::ImportanceSampling,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalOptions {
    pub seed: u64,
    /// Metropolis samples after burn-in (`N > 3` only).
    pub samples: usize,
}

impl Default for MarginalOptions {
    fn default() -> Self {
        MarginalOptions {
            seed: 0x5eed,
            samples: 400_000,
        }
    }
}

/// Pooled single-coordinate density (integrating to one) at the centers of
/// `grid`. Uses nested quadrature for `N ≤ 3` and a seeded random-walk
/// Metropolis chain binned on the grid for `N > 3`.
pub fn pooled_marginal(
    density: &ChamberDensity,
    grid: &UniformGrid,
    opts: &MarginalOptions,
) -> Result<Vec<f64>> {
    let (mode, widths, ln_max) = density.mode_and_widths()?;
    let n = density.dim();
    if n <= QUADRATURE_MAX_DIM {
        let upper = box_upper(&mode, &widths).max(grid.hi);
        let quad = |fixed: Option<(usize, f64)>, panels: usize| {
            let q = OrderedQuadrature {
                density,
                rule: GaussRule::legendre(10),
                panels,
                upper,
                ln_shift: ln_max,
            };
            let mut point = vec![0.0; n];
            q.integrate(0, 0.0, &mut point, fixed)
        };
        let z = quad(None, 16);
        return Ok(grid
            .centers()
            .into_iter()
            .map(|v| {
                if v <= 0.0 || v >= upper {
                    return 0.0;
                }
                (0..n).map(|slot| quad(Some((slot, v)), 8)).sum::<f64>() / (n as f64 * z)
            })
            .collect());
    }
    metropolis_marginal(density, &mode, &widths, grid, opts)
}

fn metropolis_marginal(
    density: &ChamberDensity,
    mode: &[f64],
    widths: &[f64],
    grid: &UniformGrid,
    opts: &MarginalOptions,
) -> Result<Vec<f64>> {
    let n = mode.len();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let step: Vec<f64> = widths
        .iter()
        .map(|w| 2.38 / (n as f64).sqrt() * w)
        .collect();
    let mut x = mode.to_vec();
    let mut ln_x = density.ln_value(&x)?;
    let mut cand = vec![0.0; n];
    let mut counts = vec![0u64; grid.count];
    let burn_in = opts.samples / 10;
    let w = grid.width();
    for it in 0..burn_in + opts.samples {
        for k in 0..n {
            let g: f64 = StandardNormal.sample(&mut rng);
            cand[k] = x[k] + step[k] * g;
        }
        if in_open_chamber_b(&cand) {
            if let Ok(ln_c) = density.ln_value(&cand) {
                if ln_c >= ln_x || rng.gen::<f64>() < (ln_c - ln_x).exp() {
                    x.copy_from_slice(&cand);
                    ln_x = ln_c;
                }
            }
        }
        if it >= burn_in {
            for &v in &x {
                let b = ((v - grid.lo) / w).floor();
                if b >= 0.0 && (b as usize) < grid.count {
                    counts[b as usize] += 1;
                }
            }
        }
    }
    let norm = (opts.samples * n) as f64 * w;
    Ok(counts.into_iter().map(|c| c as f64 / norm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orthopoly::sqrt_laguerre_zeros;
    use approx::assert_relative_eq;

    fn params(beta: f64, nu: f64, n: usize) -> ModelParams {
        ModelParams::new(beta, nu, n).unwrap()
    }

    #[test]
    fn histogram_binning() {
        let h = Histogram::pooled(&[0.105], 1, 0.01, 1.0).unwrap();
        assert_eq!(h.counts, vec![1]);
        assert_relative_eq!(h.origin(), 0.10, epsilon = 1e-15);
        assert_relative_eq!(h.center(0), 0.105, epsilon = 1e-15);
        let h = Histogram::pooled(&[0.21, 0.5], 2, 0.01, 2.0).unwrap();
        assert_eq!(h.first_bin, 10);
        assert_eq!(h.n_bins(), 16);
        assert_eq!(h.counts.iter().sum::<u64>(), h.expected_total());
        let total: f64 = h.densities().iter().sum::<f64>() * h.bin_width;
        assert_relative_eq!(total, 1.0, max_relative = 1e-14);
        assert!(Histogram::pooled(&[], 1, 0.01, 1.0).is_err());
        assert!(Histogram::pooled(&[1.0], 1, 0.0, 1.0).is_err());
        let c = Histogram::coordinate(&[1.0, 2.0, 3.0, 4.0], 2, 1, 1.0, 1.0).unwrap();
        assert_eq!(c.counts, vec![1, 0, 1]);
        assert_eq!(c.expected_total(), 2);
    }

    #[test]
    fn histogram_csv() {
        let h = Histogram::pooled(&[0.5, 1.5], 1, 1.0, 1.0).unwrap();
        let mut out = Vec::new();
        h.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "bin_center,density\n5.0000000000000000e-1,5.0000000000000000e-1\n1.5000000000000000e0,5.0000000000000000e-1\n"
        );
    }

    #[test]
    fn uniform_samples_give_flat_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let samples: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let h = Histogram::pooled(&samples, 1, 0.05, 1.0).unwrap();
        assert_eq!(h.n_bins(), 20);
        let p = 0.05;
        let sd = (p * (1.0 - p) / n as f64).sqrt() / 0.05;
        for d in h.densities() {
            assert!((d - 1.0).abs() < 4.0 * sd, "{d}");
        }
    }

    #[test]
    fn peaks_of_synthetic_histograms() {
        // two bumps at 0.3 and 0.7
        let counts: Vec<u64> = (0..100)
            .map(|b| {
                let c = (b as f64 + 0.5) * 0.01;
                (1000.0
                    * ((-((c - 0.3) / 0.04).powi(2)).exp()
                        + 0.6 * (-((c - 0.7) / 0.05).powi(2)).exp())) as u64
            })
            .collect();
        let total = counts.iter().sum();
        let h = Histogram::from_counts(0, 0.01, counts.clone(), total, 1, HistogramMode::Pooled)
            .unwrap();
        let peaks = find_peaks(&h, 0.1);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0] - 0.3).abs() <= 0.01);
        assert!((peaks[1] - 0.7).abs() <= 0.01);
        // rescaling counts changes nothing
        let scaled: Vec<u64> = counts.iter().map(|c| 7 * c).collect();
        let h7 =
            Histogram::from_counts(0, 0.01, scaled, 7 * total, 1, HistogramMode::Pooled).unwrap();
        assert_eq!(find_peaks(&h7, 0.1), peaks);
        // monotone histogram: the high end is the only peak
        let mono =
            Histogram::from_counts(0, 1.0, vec![1, 2, 3, 4], 10, 1, HistogramMode::Pooled).unwrap();
        assert_eq!(find_peaks(&mono, 0.1), vec![3.5]);
        // small noise bumps are not prominent
        assert_eq!(peak_indices(&[0.0, 5.0, 4.9, 5.0, 0.0], 1.0).len(), 1);
        assert_eq!(peak_indices(&[0.0, 5.0, 1.0, 5.0, 0.0], 1.0).len(), 2);
    }

    #[test]
    fn fwhm_of_triangle() {
        let h = Histogram::from_counts(0, 1.0, vec![0, 2, 4, 2, 0], 8, 1, HistogramMode::Pooled)
            .unwrap();
        assert_relative_eq!(
            full_width_half_max(&h, 2.5).unwrap(),
            2.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn distances() {
        let h = Histogram::from_counts(0, 0.5, vec![1, 3], 4, 1, HistogramMode::Pooled).unwrap();
        assert_relative_eq!(density_distance(&h, |_| 0.0, DistanceKind::L1), 1.0);
        let exact = |x: f64| if x < 0.5 { 0.5 } else { 1.5 };
        assert_eq!(density_distance(&h, exact, DistanceKind::L1), 0.0);
        assert_eq!(density_distance(&h, exact, DistanceKind::Sup), 0.0);
        assert_relative_eq!(density_distance(&h, |_| 1.0, DistanceKind::Sup), 0.5);
    }

    #[test]
    fn grid_centers() {
        let g = UniformGrid::new(0.0, 5.0, 500).unwrap();
        assert_relative_eq!(g.centers()[0], 0.005);
        assert_relative_eq!(g.width(), 0.01);
        assert!(UniformGrid::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn exact_density_integrates_to_n() {
        let g = GaussRule::legendre(30);
        for &(n, nu, t) in &[(3usize, 0.5, 1.0), (1, 0.5, 2.0), (7, 2.0, 0.5)] {
            let hi = (2.0 * t * (4.0 * n as f64 + 2.0 * nu + 40.0)).sqrt();
            let total =
                g.integrate_composite(0.0, hi, 100, |y| exact_density_beta2(y, t, n, nu).unwrap());
            assert_relative_eq!(total, n as f64, max_relative = 1e-9);
        }
        assert_eq!(exact_density_beta2(0.0, 1.0, 3, 0.5).unwrap(), 0.0);
        assert!(exact_density_beta2(1e-8, 1.0, 3, 0.5).unwrap() < 1e-6);
    }

    #[test]
    fn exact_density_one_particle_is_bessel() {
        // N = 1, β = 2 from the origin is a Bessel process of index ν
        for &y in &[0.2, 0.9, 2.5] {
            let a = exact_density_beta2(y, 1.3, 1, 0.5).unwrap();
            let b = crate::orthopoly::bessel_tpd_single(1.3, y, 0.0, 0.5).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn steady_beta_maximum() {
        for &(beta, nu, n) in &[(2.0, 0.5, 3), (64.0, 0.5, 7), (5.0, 2.0, 4)] {
            let p = params(beta, nu, n);
            let z = sqrt_laguerre_zeros(n, nu - 0.5).unwrap().values;
            let d = ChamberDensity::new(SteadyKind::Beta, p);
            let u = d.argmax().unwrap();
            for (a, b) in u.iter().zip(&z) {
                assert!((a - b).abs() < 1e-9, "{u:?} vs {z:?}");
            }
            let top = steady_density_beta(&z, &p).unwrap();
            assert_relative_eq!(top, beta.powf(n as f64 / 2.0), max_relative = 1e-7);
        }
    }

    #[test]
    fn steady_nu_one_particle() {
        let p = params(3.0, 40.0, 1);
        let d = ChamberDensity::new(SteadyKind::Nu, p);
        assert_relative_eq!(d.argmax().unwrap()[0], 3f64.sqrt(), max_relative = 1e-10);
        let u: f64 = 1.3;
        let want = (-40.0 * (u * u - 3.0 * (u * u).ln() + 3.0 * 3f64.ln() - 3.0) / 2.0).exp()
            * 40f64.sqrt();
        assert_relative_eq!(
            steady_density_nu(&[u], &p).unwrap(),
            want,
            max_relative = 1e-12
        );
        assert!(steady_density_nu(&[1e-3], &p).unwrap() < 1e-100);
    }

    #[test]
    fn chamber_checks() {
        let p = params(2.0, 0.5, 2);
        assert!(matches!(
            steady_density_beta(&[1.0, 0.5], &p),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            laguerre_ensemble_density(&[0.0, 0.5], &p),
            Err(Error::Domain(_))
        ));
        assert!(steady_density_beta(&[1.0], &p).is_err());
    }

    #[test]
    fn laguerre_ensemble_one_particle() {
        // e^{−λ/2} λ^{1/2}: maximized at λ = 1
        let p = params(2.0, 0.5, 1);
        let d = ChamberDensity::new(SteadyKind::LaguerreEnsemble, p);
        assert_relative_eq!(d.argmax().unwrap()[0], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn normalizer_matches_closed_form() {
        for n in 1..=3 {
            let p = params(2.0, 0.5, n);
            let d = ChamberDensity::new(SteadyKind::Beta, p);
            let z = normalize_over_chamber(&d, &NormalizeOptions::default()).unwrap();
            assert_eq!(z.method, NormalizationMethod::Quadrature);
            let want = closed_form_ln_normalizer(&p);
            assert!(
                (z.ln_integral - want).abs() < 1e-6,
                "N={n}: {} vs {want}",
                z.ln_integral
            );
        }
    }

    /// `∫_{C_B} e^{−βF/2} β^{N/2} = c_B β^{−γ} e^{−β·offset/2} / (2^N N!)`.
    fn closed_form_ln_normalizer(p: &ModelParams) -> f64 {
        let n = p.n_particles();
        let nf = n as f64;
        let (beta, nu) = (p.beta(), p.nu());
        let mut offset = -nf * (nf + nu - 0.5);
        for i in 1..=n {
            let i = i as f64;
            offset += i * i.ln() + (nu + i - 0.5) * (nu + i - 0.5).ln();
        }
        crate::dunkl::ln_selberg_cb(p).unwrap()
            - p.gamma_r() * beta.ln()
            - 0.5 * beta * offset
            - crate::dunkl::weyl_b_order(n).ln()
    }

    #[test]
    fn importance_sampling_normalizer() {
        let p = params(8.0, 0.5, 5);
        let d = ChamberDensity::new(SteadyKind::Beta, p);
        let z = normalize_over_chamber(
            &d,
            &NormalizeOptions {
                seed: 1,
                samples: 100_000,
            },
        )
        .unwrap();
        assert_eq!(z.method, NormalizationMethod::ImportanceSampling);
        let want = closed_form_ln_normalizer(&p);
        assert!(z.rel_error < 0.02);
        assert!(
            (z.ln_integral - want).abs() < 4.0 * z.rel_error + 1e-3,
            "{} vs {want} ± {}",
            z.ln_integral,
            z.rel_error
        );
    }

    #[test]
    fn marginal_integrates_to_one() {
        let p = params(2.0, 0.5, 2);
        let d = ChamberDensity::new(SteadyKind::Beta, p);
        let grid = UniformGrid::new(0.0, 4.0, 200).unwrap();
        let m = pooled_marginal(&d, &grid, &MarginalOptions::default()).unwrap();
        let total: f64 = m.iter().sum::<f64>() * grid.width();
        assert_relative_eq!(total, 1.0, max_relative = 1e-3);
    }
}
