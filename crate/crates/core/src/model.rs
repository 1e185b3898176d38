//! Closed-form pieces of the alpha-stable CSBP with branching mechanism
//! `psi(u) = beta * u^alpha + gamma * u`.
//!
//! The Laplace exponent solves `du/dt = -psi(u)`, `u_0(lambda) = lambda`, and has the
//! explicit form
//!
//! ```text
//! u_t(lambda) = e^{-gamma t} (lambda^{1-alpha} + K_t)^{1/(1-alpha)},
//! K_t = (beta/gamma) (1 - e^{gamma (1-alpha) t})      (K_t = beta t (alpha-1) when gamma = 0)
//! ```
//!
//! All complex powers use the principal branch.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CsbpError, Result};
use crate::inversion::LaplaceTransform;

/// Safety margin applied to the largest singularity real part.
pub const SINGULARITY_SAFETY: f64 = 1.05;

/// Survival probability below which conditioning on `X_t > 0` is refused.
const DEGENERATE_SURVIVAL: f64 = 1e-12;

/// Parameters `(gamma, beta, alpha)` of the stable branching mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    gamma: f64,
    beta: f64,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    gamma: f64,
    beta: f64,
    alpha: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = CsbpError;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.gamma, raw.beta, raw.alpha)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            gamma: p.gamma,
            beta: p.beta,
            alpha: p.alpha,
        }
    }
}

impl ModelParams {
    pub fn new(gamma: f64, beta: f64, alpha: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(CsbpError::InvalidParams(format!("gamma must be finite, got {gamma}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(CsbpError::InvalidParams(format!("beta must be positive, got {beta}")));
        }
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(CsbpError::InvalidParams(format!("alpha must lie in (1, 2), got {alpha}")));
        }
        Ok(ModelParams { gamma, beta, alpha })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same parameters with a different stability index.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ModelParams::new(self.gamma, self.beta, alpha)
    }

    /// Branching mechanism `beta u^alpha + gamma u`.
    pub fn psi(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        self.beta * u.powf(self.alpha) + self.gamma * u
    }

    /// `K_t = (beta/gamma)(1 - e^{gamma(1-alpha)t})`, with the `gamma -> 0` limit
    /// `beta t (alpha - 1)`. Always positive for valid parameters.
    pub fn bracket_constant(&self, t: f64) -> f64 {
        if self.gamma == 0.0 {
            self.beta * t * (self.alpha - 1.0)
        } else {
            -(self.beta / self.gamma) * (self.gamma * (1.0 - self.alpha) * t).exp_m1()
        }
    }

    /// Laplace exponent `u_t(lambda)` for real `lambda >= 0`.
    ///
    /// `lambda = 0` returns the limit 0 and `lambda = +inf` returns `u_t(inf)`.
    pub fn laplace_exponent(&self, lambda: f64, t: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        if lambda.is_infinite() {
            return self.exponent_at_infinity(t);
        }
        let k = self.bracket_constant(t);
        let e = 1.0 - self.alpha;
        (-self.gamma * t).exp() * (lambda.powf(e) + k).powf(1.0 / e)
    }

    /// Laplace exponent on the principal branch for complex `lambda`.
    pub fn laplace_exponent_complex(&self, lambda: Complex64, t: f64) -> Result<Complex64> {
        if lambda == Complex64::new(0.0, 0.0) {
            return Err(CsbpError::Domain(
                "laplace exponent is undefined at complex lambda = 0".into(),
            ));
        }
        let k = self.bracket_constant(t);
        Ok(principal_exponent(lambda, k, self.alpha, (-self.gamma * t).exp()))
    }

    /// `u_t(inf) = e^{-gamma t} K_t^{1/(1-alpha)}`, evaluated without going through large `lambda`.
    pub fn exponent_at_infinity(&self, t: f64) -> f64 {
        let k = self.bracket_constant(t);
        (-self.gamma * t).exp() * k.powf(1.0 / (1.0 - self.alpha))
    }

    /// Common modulus `R = K_t^{-1/(alpha-1)}` of the singularity set.
    pub fn singularity_modulus(&self, t: f64) -> f64 {
        self.bracket_constant(t).powf(-1.0 / (self.alpha - 1.0))
    }

    /// Singularities `R e^{i (pi + 2 pi n)/(alpha - 1)}` of the transform, truncated at
    /// `max_count` distinct angles.
    pub fn singularities(&self, t: f64, max_count: usize) -> SingularitySet {
        let max_count = max_count.max(1);
        let modulus = self.singularity_modulus(t);
        let v = self.alpha - 1.0;
        let rational = rational_approximation(v, 64, 1e-12);

        let mut angles: Vec<f64> = Vec::new();
        let mut branches: Vec<i64> = Vec::new();
        match rational {
            Some((p, q)) => {
                // theta_n = pi (2n+1) q / p; periodic in n with period p.
                for n in 0..p as i64 {
                    let num = (q as i64 * (2 * n + 1)).rem_euclid(2 * p as i64);
                    let angle = PI * num as f64 / p as f64;
                    if !angles.iter().any(|a| angle_close(*a, angle)) {
                        angles.push(angle);
                        branches.push(n);
                        if angles.len() == max_count {
                            break;
                        }
                    }
                }
            }
            None => {
                let mut i: i64 = 0;
                while angles.len() < max_count && i < 1000 * max_count as i64 {
                    // 0, 1, -1, 2, -2, ...
                    let n = if i % 2 == 0 { -(i / 2) } else { i / 2 + 1 };
                    i += 1;
                    let angle = ((PI + 2.0 * PI * n as f64) / v).rem_euclid(2.0 * PI);
                    if !angles.iter().any(|a| angle_close(*a, angle)) {
                        angles.push(angle);
                        branches.push(n);
                    }
                }
            }
        }

        let max_cos = angles.iter().map(|a| a.cos()).fold(f64::NEG_INFINITY, f64::max);
        let max_real_part = modulus * max_cos;
        let abscissa_bound = if max_real_part > 0.0 {
            SINGULARITY_SAFETY * max_real_part
        } else {
            // all singularities sit in the closed left half-plane
            (SINGULARITY_SAFETY - 1.0) * modulus
        };

        SingularitySet {
            modulus,
            angles,
            branches,
            is_finite: rational.is_some(),
            max_real_part,
            abscissa_bound,
            alpha: self.alpha,
            bracket_constant: self.bracket_constant(t),
        }
    }
}

fn angle_close(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * PI);
    d < 1e-9 || 2.0 * PI - d < 1e-9
}

/// Continued-fraction search for `p/q` with `q <= max_den` and `|v - p/q| <= tol`.
pub fn rational_approximation(v: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if !(v.is_finite() && v > 0.0) {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut x = v;
    for _ in 0..64 {
        let a = x.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        if (v - h2 as f64 / k2 as f64).abs() <= tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a as f64;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

/// `e^{-gamma t} (lambda^{1-alpha} + K)^{1/(1-alpha)}` on the principal branch.
#[inline]
fn principal_exponent(lambda: Complex64, k: f64, alpha: f64, decay: f64) -> Complex64 {
    let e = 1.0 - alpha;
    let (r, theta) = lambda.to_polar();
    let w = Complex64::from_polar(r.powf(e), e * theta) + k;
    let (rw, tw) = w.to_polar();
    Complex64::from_polar(decay * rw.powf(1.0 / e), tw / e)
}

/// `e^z - 1` without cancellation for small `|z|`.
#[inline]
pub(crate) fn cexpm1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// Singularity geometry of the conditional transform at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularitySet {
    pub modulus: f64,
    /// Distinct angles in `[0, 2 pi)`.
    pub angles: Vec<f64>,
    /// Branch index `n` that produced each angle.
    pub branches: Vec<i64>,
    pub is_finite: bool,
    pub max_real_part: f64,
    pub abscissa_bound: f64,
    alpha: f64,
    bracket_constant: f64,
}

impl SingularitySet {
    /// Points `R e^{i angle}`.
    pub fn points(&self) -> Vec<Complex64> {
        self.angles
            .iter()
            .map(|a| Complex64::from_polar(self.modulus, *a))
            .collect()
    }

    /// Relative residual of `lambda^{1-alpha} + K = 0` at the `i`-th point, with the
    /// power taken on the sheet of its branch index (the principal sheet only
    /// contains none of these points).
    pub fn relative_residual(&self, i: usize) -> f64 {
        let n = self.branches[i];
        let e = 1.0 - self.alpha;
        let theta = (PI + 2.0 * PI * n as f64) / (self.alpha - 1.0);
        let w = Complex64::from_polar(self.modulus.powf(e), e * theta);
        (w + self.bracket_constant).norm() / self.bracket_constant.abs()
    }
}

/// Conditioning state `x` and elapsed time `t` for one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionContext {
    pub x: f64,
    pub t: f64,
    pub params: ModelParams,
}

impl TransitionContext {
    pub fn new(x: f64, t: f64, params: ModelParams) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(CsbpError::Domain(format!("state must be nonnegative, got {x}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(CsbpError::Domain(format!("time must be positive, got {t}")));
        }
        Ok(TransitionContext { x, t, params })
    }

    /// `P(X_t = 0 | X_0 = x) = exp(-x u_t(inf))`.
    pub fn extinction_probability(&self) -> f64 {
        if self.x == 0.0 {
            return 1.0;
        }
        (-self.x * self.params.exponent_at_infinity(self.t)).exp()
    }

    /// Unconditional transform `E[exp(-lambda X_t) | X_0 = x] = exp(-x u_t(lambda))`.
    pub fn laplace(&self, lambda: Complex64) -> Result<Complex64> {
        if lambda == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let u = self.params.laplace_exponent_complex(lambda, self.t)?;
        Ok((-self.x * u).exp())
    }

    /// Chernoff bound on the mass of the continuous part on `(0, z]`:
    /// `min_theta [theta z - x u_t(theta)]`, returned with the minimizing `theta`.
    /// The bound is trivial (0) at or above the mean `x e^{-gamma t}`.
    pub fn lower_tail_bound(&self, z: f64) -> (f64, f64) {
        let x = self.x;
        if x == 0.0 {
            return (0.0, 0.0);
        }
        if z <= 0.0 {
            return (f64::INFINITY, f64::NEG_INFINITY);
        }
        let (gamma, alpha, t) = (self.params.gamma(), self.params.alpha(), self.t);
        if z >= x * (-gamma * t).exp() {
            return (0.0, 0.0);
        }
        let e = 1.0 - alpha;
        let lk = self.params.bracket_constant(t).ln();
        // ln(theta^{1-alpha} + K) in psi = ln(theta)
        let log_bracket = |psi: f64| {
            let w = e * psi;
            if w > lk {
                w + (lk - w).exp().ln_1p()
            } else {
                lk + (w - lk).exp().ln_1p()
            }
        };
        // ln u'(theta), decreasing in psi from -gamma t to -inf
        let slope = |psi: f64| -gamma * t + (alpha / e) * log_bracket(psi) - alpha * psi;
        let dslope = |psi: f64| -alpha / (1.0 + (e * psi - lk).exp());
        let target = (z / x).ln();

        let mut hi = (-gamma * t + (alpha / e) * lk - target) / alpha;
        let mut lo = hi - 1.0;
        let mut width = 1.0;
        while slope(lo) <= target {
            width *= 2.0;
            lo = hi - width;
        }
        let mut psi = hi;
        for _ in 0..200 {
            let f = slope(psi) - target;
            if f > 0.0 {
                lo = psi;
            } else {
                hi = psi;
            }
            let mut next = psi - f / dslope(psi);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - psi).abs() <= 1e-13 * (1.0 + psi.abs());
            psi = next;
            if done {
                break;
            }
        }
        let theta = psi.exp();
        let u = (-gamma * t).exp() * (log_bracket(psi) / e).exp();
        (theta, (theta * z - x * u).min(0.0))
    }

    /// Transform of `X_t` conditioned on survival: `(e^{-x u_t(lambda)} - p) / (1 - p)`.
    pub fn conditional_laplace(&self, lambda: Complex64) -> Result<Complex64> {
        let handle = ConditionalTransform::conditional(*self)?;
        if lambda == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(1.0, 0.0));
        }
        if lambda.re.is_infinite() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(handle.evaluate(lambda))
    }
}

/// Continuous part of the transition law as a Laplace-transform handle.
///
/// With `normalized` the transform is the law conditioned on survival; otherwise it is
/// the defective transform `e^{-x u_t(lambda)} - p` whose inverse is `(1 - p)` times
/// the conditional density.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalTransform {
    ctx: TransitionContext,
    k: f64,
    decay: f64,
    u_inf: f64,
    p_zero: f64,
    scale: f64,
    modulus: f64,
}

impl ConditionalTransform {
    pub fn conditional(ctx: TransitionContext) -> Result<Self> {
        let mut h = Self::continuous_part(ctx)?;
        let survival = -(-ctx.x * h.u_inf).exp_m1();
        if survival < DEGENERATE_SURVIVAL {
            return Err(CsbpError::DegenerateConditioning { p_zero: h.p_zero });
        }
        h.scale = 1.0 / survival;
        Ok(h)
    }

    pub fn continuous_part(ctx: TransitionContext) -> Result<Self> {
        if !(ctx.x > 0.0) {
            return Err(CsbpError::Domain("conditioning state must be positive".into()));
        }
        let p = ctx.params;
        let u_inf = p.exponent_at_infinity(ctx.t);
        Ok(ConditionalTransform {
            ctx,
            k: p.bracket_constant(ctx.t),
            decay: (-p.gamma() * ctx.t).exp(),
            u_inf,
            p_zero: (-ctx.x * u_inf).exp(),
            scale: 1.0,
            modulus: p.singularity_modulus(ctx.t),
        })
    }

    pub fn context(&self) -> &TransitionContext {
        &self.ctx
    }

    pub fn extinction_probability(&self) -> f64 {
        self.p_zero
    }

    /// Mean of the law represented by this transform.
    pub fn mean(&self) -> f64 {
        self.ctx.x * self.decay * self.scale
    }
}

impl LaplaceTransform for ConditionalTransform {
    #[inline]
    fn evaluate(&self, lambda: Complex64) -> Complex64 {
        let x = self.ctx.x;
        let u = principal_exponent(lambda, self.k, self.ctx.params.alpha(), self.decay);
        let d = (self.u_inf - u) * x;
        let numerator = if self.p_zero > 1e-300 && d.norm() < 1.0 {
            self.p_zero * cexpm1(d)
        } else {
            (-x * u).exp() - self.p_zero
        };
        numerator * self.scale
    }

    fn scaled(&self, lambda: Complex64, shift: f64) -> Complex64 {
        let x = self.ctx.x;
        let u = principal_exponent(lambda, self.k, self.ctx.params.alpha(), self.decay);
        let d = (self.u_inf - u) * x;
        let log_p = -x * self.u_inf;
        let numerator = if log_p > -690.0 && d.norm() < 1.0 {
            (shift + log_p).exp() * cexpm1(d)
        } else {
            (shift - x * u).exp() - (shift + log_p).exp()
        };
        numerator * self.scale
    }

    fn lower_tail(&self, z: f64) -> Option<(f64, f64)> {
        let (theta, bound) = self.ctx.lower_tail_bound(z);
        Some((theta, bound + self.scale.ln()))
    }

    /// The principal-branch transform is analytic on `Re(lambda) > 0`: there
    /// `lambda^{1-alpha}` has positive real part, so the bracket never vanishes.
    fn abscissa(&self) -> f64 {
        0.0
    }

    fn stability_abscissa(&self) -> Option<f64> {
        Some(self.modulus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> ModelParams {
        ModelParams::new(-6.0, 6.0, 1.5).unwrap()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ModelParams::new(-6.0, 0.0, 1.5).is_err());
        assert!(ModelParams::new(-6.0, 6.0, 1.0).is_err());
        assert!(ModelParams::new(-6.0, 6.0, 2.0).is_err());
        assert!(ModelParams::new(f64::NAN, 6.0, 1.5).is_err());
        assert!(ModelParams::new(0.0, 6.0, 1.5).is_ok());
    }

    #[test]
    fn psi_values() {
        let p = reference();
        assert_eq!(p.psi(0.0), 0.0);
        assert_relative_eq!(p.psi(1.0), 0.0, epsilon = 1e-14);
        assert_relative_eq!(p.psi(4.0), 24.0, epsilon = 1e-12);
    }

    #[test]
    fn exponent_limits() {
        let p = reference();
        assert_eq!(p.laplace_exponent(0.0, 1.0 / 6.0), 0.0);
        assert_relative_eq!(p.laplace_exponent(2.0, 1e-12), 2.0, max_relative = 1e-9);
        assert_eq!(p.laplace_exponent(f64::INFINITY, 0.5), p.exponent_at_infinity(0.5));
        assert!(p.laplace_exponent_complex(Complex64::new(0.0, 0.0), 0.5).is_err());
    }

    #[test]
    fn complex_exponent_matches_real_on_positive_axis() {
        let p = reference();
        for lam in [0.1, 1.0, 7.5, 1e4] {
            let c = p.laplace_exponent_complex(Complex64::new(lam, 0.0), 0.2).unwrap();
            assert_relative_eq!(c.re, p.laplace_exponent(lam, 0.2), max_relative = 1e-13);
            assert!(c.im.abs() < 1e-13 * c.re);
        }
    }

    #[test]
    fn gamma_zero_branch_matches_nearby_gamma() {
        let p0 = ModelParams::new(0.0, 6.0, 1.5).unwrap();
        for g in [1e-8, -1e-8] {
            let pg = ModelParams::new(g, 6.0, 1.5).unwrap();
            for lam in [0.1, 1.0, 10.0] {
                assert_relative_eq!(
                    p0.laplace_exponent(lam, 0.3),
                    pg.laplace_exponent(lam, 0.3),
                    max_relative = 1e-5
                );
            }
            assert_relative_eq!(p0.exponent_at_infinity(0.3), pg.exponent_at_infinity(0.3), max_relative = 1e-5);
        }
    }

    #[test]
    fn extinction_probability_edges() {
        let p = reference();
        let ctx = TransitionContext::new(0.0, 1.0, p).unwrap();
        assert_eq!(ctx.extinction_probability(), 1.0);
        let ctx = TransitionContext::new(1.0, 1.0 / 6.0, p).unwrap();
        let large = p.laplace_exponent(1e18, 1.0 / 6.0);
        assert_relative_eq!(ctx.extinction_probability(), (-large).exp(), max_relative = 1e-5);
    }

    #[test]
    fn conditional_transform_limits_and_monotonicity() {
        let ctx = TransitionContext::new(1.0, 1.0 / 6.0, reference()).unwrap();
        let at = |l: f64| ctx.conditional_laplace(Complex64::new(l, 0.0)).unwrap().re;
        assert_eq!(at(0.0), 1.0);
        assert_eq!(at(f64::INFINITY), 0.0);
        assert!(at(1e14) < 1e-5);
        let vals: Vec<f64> = [0.5, 1.0, 2.0, 4.0].iter().map(|l| at(*l)).collect();
        assert!(vals.iter().all(|v| *v > 0.0 && *v < 1.0));
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn degenerate_conditioning_is_refused() {
        // tiny state: survival probability vanishes
        let ctx = TransitionContext::new(1e-300, 1.0 / 6.0, reference()).unwrap();
        assert!(matches!(
            ConditionalTransform::conditional(ctx),
            Err(CsbpError::DegenerateConditioning { .. })
        ));
    }

    #[test]
    fn singularities_at_half_index() {
        let s = reference().singularities(1.0 / 6.0, 16);
        assert_eq!(s.angles, vec![0.0]);
        assert!(s.is_finite);
        assert_relative_eq!(s.abscissa_bound, 1.05 * s.modulus, max_relative = 1e-15);
        assert!(s.relative_residual(0) < 1e-10);
    }

    #[test]
    fn singularities_irrational_index() {
        let p = ModelParams::new(-6.0, 6.0, 1.0 + std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let s = p.singularities(1.0 / 6.0, 16);
        assert_eq!(s.angles.len(), 16);
        assert!(!s.is_finite);
        for i in 0..s.angles.len() {
            assert!(s.relative_residual(i) < 1e-10, "residual at {i}");
            assert!(s.angles[i] >= 0.0 && s.angles[i] < 2.0 * PI);
        }
        assert!(s.abscissa_bound > s.max_real_part);
    }

    #[test]
    fn singularities_rational_with_several_angles() {
        // alpha - 1 = 3/5: angles pi/3, pi, 5pi/3
        let p = ModelParams::new(-6.0, 6.0, 1.6).unwrap();
        let s = p.singularities(0.25, 64);
        assert!(s.is_finite);
        assert_eq!(s.angles.len(), 3);
        assert_relative_eq!(s.max_real_part, 0.5 * s.modulus, max_relative = 1e-12);
        for i in 0..3 {
            assert!(s.relative_residual(i) < 1e-10);
        }
    }

    #[test]
    fn continued_fraction_detection() {
        assert_eq!(rational_approximation(0.5, 64, 1e-12), Some((1, 2)));
        assert_eq!(rational_approximation(0.9, 64, 1e-12), Some((9, 10)));
        assert_eq!(rational_approximation(0.3, 64, 1e-12), Some((3, 10)));
        assert_eq!(rational_approximation(std::f64::consts::FRAC_1_SQRT_2, 64, 1e-12), None);
    }

    #[test]
    fn cexpm1_small_argument() {
        let z = Complex64::new(1e-12, -3e-13);
        let r = cexpm1(z);
        assert_relative_eq!(r.re, 1e-12, max_relative = 1e-6);
        assert_relative_eq!(r.im, -3e-13, max_relative = 1e-6);
        let z = Complex64::new(0.7, 2.0);
        let d = cexpm1(z) - (z.exp() - 1.0);
        assert!(d.norm() < 1e-14);
    }
}
