//! Numerical inversion of Laplace transforms on the Bromwich line.
//!
//! The trapezoidal rule with step `h = pi / (ell s)` on the contour `Re(lambda) = r`,
//! `r = A / (2 ell s)`, gives
//!
//! ```text
//! f(s) ~ e^{A/(2 ell)} / (ell s) * [ L(r)/2 + sum_{k>=1} Re( L(r + i k pi/(ell s)) e^{i k pi / ell} ) ]
//! ```
//!
//! with aliasing error bounded by `e^{-A} / (1 - e^{-A})`. The series is truncated
//! after `n + m` blocks and the last `m + 1` partial sums are combined with binomial
//! (Euler) weights. When the law is concentrated relative to `s` the terms stop
//! alternating and decay slowly; the truncation point is then doubled until two
//! successive Euler estimates agree.
//!
//! Handles that supply a lower-tail bound allow the period `2 ell s` to be divided by
//! an odd factor `q`, which keeps the terms alternating. Left aliases `f(s - kT)` then
//! appear amplified by `e^{sigma k T}`; `q` is the largest factor for which the bound
//! certifies them below the aliasing target. The contour is also moved to the saddle
//! point of `e^{lambda s} L(lambda)` when that lies further right, so densities far in
//! the left tail keep their relative accuracy.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CsbpError, Result};

/// A Laplace transform `L(lambda)` that can be evaluated on a Bromwich contour.
pub trait LaplaceTransform: Sync {
    fn evaluate(&self, lambda: Complex64) -> Complex64;

    /// Largest real part among singularities of `evaluate`; contours must lie to its right.
    fn abscissa(&self) -> f64;

    /// Unit-state contour requirement used to refuse numerically unstable parameter
    /// regions. `None` disables the check.
    fn stability_abscissa(&self) -> Option<f64> {
        None
    }

    /// `e^{shift} L(lambda)`. Override when `L` underflows for large `Re(lambda)`.
    fn scaled(&self, lambda: Complex64, shift: f64) -> Complex64 {
        self.evaluate(lambda) * shift.exp()
    }

    /// Upper bound on the log of the mass the inverted density puts on `(0, z]`, with the
    /// tilt attaining it. `None` disables period contraction.
    fn lower_tail(&self, _z: f64) -> Option<(f64, f64)> {
        None
    }
}

/// Closure-backed transform.
pub struct FnTransform<F> {
    f: F,
    abscissa: f64,
}

impl<F> FnTransform<F>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    pub fn new(abscissa: f64, f: F) -> Self {
        FnTransform { f, abscissa }
    }
}

impl<F> LaplaceTransform for FnTransform<F>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    fn evaluate(&self, lambda: Complex64) -> Complex64 {
        (self.f)(lambda)
    }

    fn abscissa(&self) -> f64 {
        self.abscissa
    }
}

/// `L(lambda) / lambda`, the transform of the distribution function.
struct Integrated<'a, T: ?Sized>(&'a T);

impl<T: LaplaceTransform + ?Sized> LaplaceTransform for Integrated<'_, T> {
    #[inline]
    fn evaluate(&self, lambda: Complex64) -> Complex64 {
        self.0.evaluate(lambda) / lambda
    }

    fn abscissa(&self) -> f64 {
        self.0.abscissa().max(0.0)
    }

    fn stability_abscissa(&self) -> Option<f64> {
        self.0.stability_abscissa()
    }

    #[inline]
    fn scaled(&self, lambda: Complex64, shift: f64) -> Complex64 {
        self.0.scaled(lambda, shift) / lambda
    }

    fn lower_tail(&self, z: f64) -> Option<(f64, f64)> {
        self.0.lower_tail(z)
    }
}

/// Controls of the Euler-summation inversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InversionConfig {
    pub ell: u32,
    /// Euler averaging depth.
    pub euler_m: usize,
    /// Minimum truncation point of the series.
    pub euler_n: usize,
    /// Minimum aliasing parameter.
    pub a_target: f64,
    /// Largest aliasing parameter accepted before refusing.
    pub a_cap: f64,
    pub abscissa_safety: f64,
    /// Hard limit on the adaptive truncation point.
    pub max_terms: usize,
    /// Relative agreement required between successive Euler estimates.
    pub rel_tol: f64,
    /// Allow period contraction for handles with a lower-tail bound.
    pub contract: bool,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            ell: 1,
            euler_m: 11,
            euler_n: 38,
            a_target: 18.4,
            a_cap: 500.0,
            abscissa_safety: 1.05,
            max_terms: 1 << 17,
            rel_tol: 1e-9,
            contract: true,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ell == 0 || self.euler_m == 0 || self.euler_n == 0 {
            return Err(CsbpError::Config("ell, euler_m and euler_n must be positive".into()));
        }
        if !(self.a_target > 0.0 && self.a_cap >= self.a_target) {
            return Err(CsbpError::Config("need 0 < a_target <= a_cap".into()));
        }
        if !(self.abscissa_safety >= 1.0) {
            return Err(CsbpError::Config("abscissa_safety must be >= 1".into()));
        }
        if self.max_terms < self.euler_n + self.euler_m {
            return Err(CsbpError::Config("max_terms must be at least euler_n + euler_m".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(CsbpError::Config("rel_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Discretization error bound `e^{-A} / (1 - e^{-A})`.
pub fn aliasing_bound(a: f64) -> f64 {
    let e = (-a).exp();
    e / (1.0 - e)
}

/// One inversion with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inversion {
    pub value: f64,
    /// Aliasing parameter used.
    pub a: f64,
    /// Contour abscissa, `q A / (2 ell s)` or the saddle point if larger.
    pub contour: f64,
    /// Odd period contraction factor `q` (1 for the plain contour).
    pub contraction: usize,
    pub aliasing_bound: f64,
    /// Truncation point (in blocks of `ell` terms) of the accepted estimate.
    pub terms: usize,
    pub converged: bool,
    /// Raw estimate fell outside the valid range and was clamped.
    pub clamped: bool,
}

/// Running partial sums over blocks of `ell` series terms.
struct Series {
    partial: Vec<f64>,
    acc: f64,
    k: usize,
    max_abs: f64,
}

impl Series {
    fn with_capacity(n: usize) -> Self {
        Series {
            partial: Vec::with_capacity(n),
            acc: 0.0,
            k: 0,
            max_abs: 0.0,
        }
    }

    fn extend(&mut self, blocks: usize, ell: usize, term: &mut impl FnMut(usize) -> f64) {
        while self.partial.len() < blocks + 1 {
            for _ in 0..ell {
                let t = term(self.k);
                self.max_abs = self.max_abs.max(t.abs());
                self.acc += t;
                self.k += 1;
            }
            self.partial.push(self.acc);
        }
    }
}

/// Euler-summation inverter with precomputed binomial weights.
#[derive(Debug)]
pub struct Inverter {
    cfg: InversionConfig,
    weights: Vec<f64>,
    clamped: AtomicU64,
    unconverged: AtomicU64,
}

impl Clone for Inverter {
    fn clone(&self) -> Self {
        Inverter {
            cfg: self.cfg.clone(),
            weights: self.weights.clone(),
            clamped: AtomicU64::new(self.clamped.load(Ordering::Relaxed)),
            unconverged: AtomicU64::new(self.unconverged.load(Ordering::Relaxed)),
        }
    }
}

impl Default for Inverter {
    fn default() -> Self {
        Inverter::new(InversionConfig::default()).expect("default config is valid")
    }
}

fn binomial_weights(m: usize) -> Vec<f64> {
    // C(m, j) / 2^m, built row by row to stay exact for moderate m
    let mut row = vec![1.0f64];
    for _ in 0..m {
        let mut next = vec![1.0; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    let scale = 0.5f64.powi(m as i32);
    row.into_iter().map(|c| c * scale).collect()
}

impl Inverter {
    pub fn new(cfg: InversionConfig) -> Result<Self> {
        cfg.validate()?;
        let weights = binomial_weights(cfg.euler_m);
        Ok(Inverter {
            cfg,
            weights,
            clamped: AtomicU64::new(0),
            unconverged: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &InversionConfig {
        &self.cfg
    }

    /// Number of estimates clamped into range so far.
    pub fn clamp_count(&self) -> u64 {
        self.clamped.load(Ordering::Relaxed)
    }

    /// Number of estimates that hit `max_terms` before converging.
    pub fn unconverged_count(&self) -> u64 {
        self.unconverged.load(Ordering::Relaxed)
    }

    /// Aliasing parameter for evaluation at `s`:
    /// `max(a_target, 2 * safety * abscissa * ell * s)`.
    ///
    /// Refuses when that value, or the unit-state requirement of the handle, exceeds `a_cap`.
    pub fn effective_a<T: LaplaceTransform + ?Sized>(&self, handle: &T, s: f64) -> Result<f64> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(CsbpError::Domain(format!("inversion point must be positive, got {s}")));
        }
        let ell = self.cfg.ell as f64;
        let a = self
            .cfg
            .a_target
            .max(2.0 * self.cfg.abscissa_safety * handle.abscissa() * ell * s);
        if a > self.cfg.a_cap {
            return Err(CsbpError::Instability {
                required: a,
                cap: self.cfg.a_cap,
            });
        }
        if let Some(r) = handle.stability_abscissa() {
            let unit = 2.0 * self.cfg.abscissa_safety * r * ell;
            if !(unit <= self.cfg.a_cap) {
                return Err(CsbpError::Instability {
                    required: unit,
                    cap: self.cfg.a_cap,
                });
            }
        }
        Ok(a)
    }

    /// Density at `s`, clamped below at 0.
    pub fn density<T: LaplaceTransform + ?Sized>(&self, handle: &T, s: f64) -> Result<f64> {
        Ok(self.density_detailed(handle, s)?.value)
    }

    pub fn density_detailed<T: LaplaceTransform + ?Sized>(&self, handle: &T, s: f64) -> Result<Inversion> {
        let mut inv = self.raw(handle, s)?;
        if inv.value < 0.0 || inv.value.is_nan() {
            inv.value = 0.0;
            inv.clamped = true;
            self.clamped.fetch_add(1, Ordering::Relaxed);
        }
        Ok(inv)
    }

    /// Distribution function at `s` (inverts `L(lambda)/lambda`), clamped to `[0, 1]`.
    pub fn cdf<T: LaplaceTransform + ?Sized>(&self, handle: &T, s: f64) -> Result<f64> {
        Ok(self.cdf_detailed(handle, s)?.value)
    }

    pub fn cdf_detailed<T: LaplaceTransform + ?Sized>(&self, handle: &T, s: f64) -> Result<Inversion> {
        let mut inv = self.raw(&Integrated(handle), s)?;
        if !(0.0..=1.0).contains(&inv.value) {
            inv.value = if inv.value > 1.0 { 1.0 } else { 0.0 };
            inv.clamped = true;
            self.clamped.fetch_add(1, Ordering::Relaxed);
        }
        Ok(inv)
    }

    /// Contraction factor and contour abscissa for evaluation at `s`.
    fn contour<T: LaplaceTransform + ?Sized>(&self, handle: &T, s: f64, a: f64) -> (usize, f64) {
        let ell = self.cfg.ell as f64;
        let plain = (1, a / (2.0 * ell * s));
        if !self.cfg.contract {
            return plain;
        }
        let Some((tilt, _)) = handle.lower_tail(s) else {
            return plain;
        };
        let certified = |q: usize| -> Option<f64> {
            let period = 2.0 * ell * s / q as f64;
            let sigma = (q as f64 * a / (2.0 * ell * s)).max(tilt);
            if period >= s {
                return Some(sigma);
            }
            let (_, mid) = handle.lower_tail(s - 0.5 * period)?;
            let z1 = s - 0.75 * period;
            let (_, c1) = handle.lower_tail(z1)?;
            if !(mid <= -10.0 && c1 + sigma * period <= -a - 22.0) {
                return None;
            }
            let z2 = z1 - period;
            if z2 > 0.0 {
                let (_, c2) = handle.lower_tail(z2)?;
                if !(c1 - c2 >= sigma * period) {
                    return None;
                }
            }
            Some(sigma)
        };
        let Some(mut sigma) = certified(3) else {
            return plain;
        };
        let (mut good, mut bad) = (1usize, None);
        while bad.is_none() && good < 1 << 24 {
            match certified(2 * (2 * good) + 1) {
                Some(sg) => {
                    good *= 2;
                    sigma = sg;
                }
                None => bad = Some(2 * good),
            }
        }
        if let Some(mut bad) = bad {
            while bad - good > 1 {
                let mid = (good + bad) / 2;
                match certified(2 * mid + 1) {
                    Some(sg) => {
                        good = mid;
                        sigma = sg;
                    }
                    None => bad = mid,
                }
            }
        }
        (2 * good + 1, sigma)
    }

    /// Unclamped Euler estimate of the inverse transform at `s`.
    pub fn raw<T: LaplaceTransform + ?Sized>(&self, handle: &T, s: f64) -> Result<Inversion> {
        let a = self.effective_a(handle, s)?;
        let (q, r) = self.contour(handle, s, a);
        let ell = self.cfg.ell as usize;
        let ell_f = self.cfg.ell as f64;
        let step = q as f64 * std::f64::consts::PI / (ell_f * s);
        let shift = r * s;
        let m = self.cfg.euler_m;

        // rotation e^{i k q pi / ell} cycles with period 2 ell since q is odd
        let rotations: Vec<Complex64> = (0..2 * ell)
            .map(|k| Complex64::from_polar(1.0, (k * q % (2 * ell)) as f64 * std::f64::consts::PI / ell_f))
            .collect();

        let mut series = Series::with_capacity(2 * (self.cfg.euler_n + m) + 2);
        let mut term = |k: usize| {
            let lambda = Complex64::new(r, k as f64 * step);
            let t = (handle.scaled(lambda, shift) * rotations[k % (2 * ell)]).re;
            if k == 0 {
                0.5 * t
            } else {
                t
            }
        };
        let euler = |n: usize, partial: &[f64]| -> f64 {
            self.weights
                .iter()
                .zip(&partial[n..=n + m])
                .map(|(w, s)| w * s)
                .sum()
        };

        let mut n = self.cfg.euler_n;
        series.extend(n + m, ell, &mut term);
        let mut estimate = euler(n, &series.partial);
        let mut converged = false;
        loop {
            let next = 2 * n;
            if next + m > self.cfg.max_terms {
                break;
            }
            series.extend(next + m, ell, &mut term);
            let refined = euler(next, &series.partial);
            let tol = self.cfg.rel_tol * refined.abs() + 1e-12 * series.max_abs;
            let done = (refined - estimate).abs() <= tol;
            n = next;
            estimate = refined;
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            self.unconverged.fetch_add(1, Ordering::Relaxed);
        }

        let prefactor = q as f64 / (ell_f * s);
        Ok(Inversion {
            value: prefactor * estimate,
            a,
            contour: r,
            contraction: q,
            aliasing_bound: aliasing_bound(a),
            terms: n,
            converged,
            clamped: false,
        })
    }
}
