//! Point kernels `phi(x)` and their antiderivatives
//!
//! ```text
//! I1(l) = ∫_0^l phi(x) dx,     I2(l) = ∫_0^l ∫_0^r phi(x) dx dr = ∫_0^l (l - x) phi(x) dx
//! ```
//!
//! Exponential, constant and polynomial build-up kernels carry closed
//! forms. Tabulated and user-supplied kernels have only `phi`; their
//! antiderivatives come from [`numeric_antiderivatives`].

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::math;

/// Sub-steps per grid interval for numeric antiderivatives.
pub const SIMPSON_REFINEMENT: usize = 8;

pub type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Kernel {
    /// `phi(x) = value`.
    Constant { value: f64 },
    /// `phi(x) = sigma · exp(-sigma x)`.
    Exponential { sigma: f64 },
    /// `phi(x) = B(x) · sigma · exp(-sigma x)` with `B(x) = Σ c_n x^n`, `c_0 = 1`.
    Buildup { sigma: f64, coefficients: Vec<f64> },
    /// Piecewise-linear `phi` through `(x, phi)` nodes, zero past the last node.
    Table { x: Vec<f64>, phi: Vec<f64> },
    /// Arbitrary `phi` without closed-form antiderivatives.
    Custom { name: String, phi: KernelFn },
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Constant { value } => f.debug_struct("Constant").field("value", value).finish(),
            Kernel::Exponential { sigma } => {
                f.debug_struct("Exponential").field("sigma", sigma).finish()
            }
            Kernel::Buildup {
                sigma,
                coefficients,
            } => f
                .debug_struct("Buildup")
                .field("sigma", sigma)
                .field("coefficients", coefficients)
                .finish(),
            Kernel::Table { x, .. } => f.debug_struct("Table").field("nodes", &x.len()).finish(),
            Kernel::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

impl Kernel {
    pub fn exponential(sigma: f64) -> Result<Kernel> {
        check_sigma(sigma)?;
        Ok(Kernel::Exponential { sigma })
    }

    /// `phi = 1`.
    pub fn constant() -> Kernel {
        Kernel::Constant { value: 1.0 }
    }

    /// `phi = 0`, handy for sanity checks.
    pub fn zero() -> Kernel {
        Kernel::Constant { value: 0.0 }
    }

    pub fn buildup(sigma: f64, coefficients: Vec<f64>) -> Result<Kernel> {
        check_sigma(sigma)?;
        if coefficients.first() != Some(&1.0) {
            return Err(Error::Kernel(String::from(
                "build-up polynomial must satisfy B(0) = 1",
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Kernel(String::from("build-up coefficients must be finite")));
        }
        Ok(Kernel::Buildup {
            sigma,
            coefficients,
        })
    }

    pub fn table(x: Vec<f64>, phi: Vec<f64>) -> Result<Kernel> {
        if x.len() != phi.len() || x.len() < 2 {
            return Err(Error::Kernel(String::from(
                "table needs at least two (x, phi) rows of equal length",
            )));
        }
        if x[0] != 0.0 {
            return Err(Error::Kernel(String::from("table must start at x = 0")));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Kernel(String::from("table x must be strictly increasing")));
        }
        if phi.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::Kernel(String::from("table values must be finite")));
        }
        Ok(Kernel::Table { x, phi })
    }

    pub fn custom(name: impl Into<String>, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Kernel {
        Kernel::Custom {
            name: name.into(),
            phi: Arc::new(phi),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Constant { value } => alloc::format!("constant({value})"),
            Kernel::Exponential { sigma } => alloc::format!("exponential({sigma})"),
            Kernel::Buildup { sigma, coefficients } => {
                alloc::format!("buildup({sigma}; {coefficients:?})")
            }
            Kernel::Table { x, .. } => alloc::format!("table({} nodes)", x.len()),
            Kernel::Custom { name, .. } => name.to_string(),
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        match self {
            Kernel::Constant { value } => *value,
            Kernel::Exponential { sigma } => sigma * math::exp(-sigma * x),
            Kernel::Buildup {
                sigma,
                coefficients,
            } => horner(coefficients, x) * sigma * math::exp(-sigma * x),
            Kernel::Table { x: xs, phi } => table_phi(xs, phi, x),
            Kernel::Custom { phi, .. } => phi(x),
        }
    }

    /// Closed-form `I1`, when the kernel has one.
    pub fn i1(&self, l: f64) -> Option<f64> {
        match self {
            Kernel::Constant { value } => Some(value * l),
            Kernel::Exponential { sigma } => Some(-math::expm1(-sigma * l)),
            Kernel::Buildup {
                sigma,
                coefficients,
            } => Some(
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(n, c)| c * moment_integral(n, *sigma, l))
                    .sum(),
            ),
            _ => None,
        }
    }

    /// Closed-form `I2`, when the kernel has one.
    pub fn i2(&self, l: f64) -> Option<f64> {
        match self {
            Kernel::Constant { value } => Some(0.5 * value * l * l),
            Kernel::Exponential { sigma } => {
                Some(l * moment_integral(0, *sigma, l) - moment_integral(1, *sigma, l))
            }
            Kernel::Buildup {
                sigma,
                coefficients,
            } => Some(
                coefficients
                    .iter()
                    .enumerate()
                    .map(|(n, c)| {
                        c * (l * moment_integral(n, *sigma, l) - moment_integral(n + 1, *sigma, l))
                    })
                    .sum(),
            ),
            _ => None,
        }
    }

    pub fn has_analytic_antiderivatives(&self) -> bool {
        self.i1(0.0).is_some() && self.i2(0.0).is_some()
    }

    /// `phi`, `I1` and `I2` on `grid`, numerically where no closed form exists.
    pub fn tabulate(&self, grid: &[f64]) -> Result<KernelTable> {
        let phi: Vec<f64> = grid.iter().map(|&x| self.phi(x)).collect();
        if phi.iter().any(|v| v.is_nan()) {
            return Err(Error::Kernel(String::from("phi evaluated to NaN")));
        }
        if self.has_analytic_antiderivatives() {
            let i1 = grid.iter().map(|&l| self.i1(l).unwrap_or(f64::NAN)).collect();
            let i2 = grid.iter().map(|&l| self.i2(l).unwrap_or(f64::NAN)).collect();
            return Ok(KernelTable { phi, i1, i2 });
        }
        let (i1, i2) = numeric_antiderivatives(|x| self.phi(x), grid)?;
        Ok(KernelTable { phi, i1, i2 })
    }
}

/// `phi`, `I1`, `I2` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub phi: Vec<f64>,
    pub i1: Vec<f64>,
    pub i2: Vec<f64>,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Kernel(alloc::format!(
            "attenuation sigma must be positive, got {sigma}"
        )));
    }
    Ok(())
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn table_phi(xs: &[f64], phi: &[f64], x: f64) -> f64 {
    if x < 0.0 || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let t = (x - x0) / (x1 - x0);
    phi[i - 1] + t * (phi[i] - phi[i - 1])
}

/// `∫_0^l x^n σ e^{-σx} dx = n!/σ^n · P(n+1, σl)`.
fn moment_integral(n: usize, sigma: f64, l: f64) -> f64 {
    let mut fact_over_pow = 1.0;
    for k in 1..=n {
        fact_over_pow *= k as f64 / sigma;
    }
    fact_over_pow * lower_regularized_gamma(n + 1, sigma * l)
}

/// `P(a, x)` for integer `a >= 1`: series for small `x`, complement sum
/// otherwise.
fn lower_regularized_gamma(a: usize, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a as f64 + 1.0 {
        // e^{-x} Σ_{m >= a} x^m / m!
        let mut term = 1.0;
        for m in 1..=a {
            term *= x / m as f64;
        }
        let mut sum = term;
        let mut m = a;
        loop {
            m += 1;
            term *= x / m as f64;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        sum * math::exp(-x)
    } else {
        // 1 - e^{-x} Σ_{m < a} x^m / m!
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..a {
            term *= x / m as f64;
            sum += term;
        }
        1.0 - sum * math::exp(-x)
    }
}

/// Cumulative `I1` and `I2` of `phi` at the points of an ascending,
/// non-negative `grid`, from 0. Each interval is split into
/// [`SIMPSON_REFINEMENT`] composite Simpson steps.
pub fn numeric_antiderivatives<F>(phi: F, grid: &[f64]) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64) -> f64,
{
    if grid.iter().any(|&g| g < 0.0 || g.is_nan()) {
        return Err(Error::Kernel(String::from("grid must be non-negative")));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Kernel(String::from("grid must be ascending")));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = phi(x);
        if v.is_nan() {
            Err(Error::Kernel(alloc::format!("phi({x}) is NaN")))
        } else {
            Ok(v)
        }
    };
    let mut i1_out = Vec::with_capacity(grid.len());
    let mut i2_out = Vec::with_capacity(grid.len());
    let mut x = 0.0f64;
    let (mut i1, mut i2) = (CompensatedSum::default(), CompensatedSum::default());
    let mut fa = eval(0.0)?;
    for &g in grid {
        let h = (g - x) / SIMPSON_REFINEMENT as f64;
        if h > 0.0 {
            let node = |s: usize| if s == SIMPSON_REFINEMENT { g } else { x + s as f64 * h };
            for s in 0..SIMPSON_REFINEMENT {
                let (a, b) = (node(s), node(s + 1));
                let m = 0.5 * (a + b);
                let (fm, fb) = (eval(m)?, eval(b)?);
                let step = b - a;
                // ∫_a^b I1 = step·I1(a) + ∫_a^b (b - x) phi(x) dx
                i2.add(step * i1.value());
                i2.add(step * step * (fa + 2.0 * fm) / 6.0);
                i1.add(step * (fa + 4.0 * fm + fb) / 6.0);
                fa = fb;
            }
        }
        x = g;
        i1_out.push(i1.value());
        i2_out.push(i2.value());
    }
    Ok((i1_out, i2_out))
}

/// Neumaier summation.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if math::abs(self.sum) >= math::abs(v) {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn probe_grid() -> Vec<f64> {
        (1..200).map(|i| i as f64 * 0.037).collect()
    }

    #[test]
    fn exponential_limits() {
        let k = Kernel::exponential(1.7).unwrap();
        assert_eq!(k.i1(0.0), Some(0.0));
        assert_eq!(k.i2(0.0), Some(0.0));
        assert!((k.i1(60.0).unwrap() - 1.0).abs() < 1e-15);
        let l = 1e6;
        assert!((k.i2(l).unwrap() / l - 1.0).abs() < 1e-5);
    }

    #[test]
    fn exponential_small_argument_is_accurate() {
        let k = Kernel::exponential(1.0).unwrap();
        let l: f64 = 1e-6;
        // I2 = l²/2 - l³/6 + ...
        let expect = l * l / 2.0 - l * l * l / 6.0;
        assert!((k.i2(l).unwrap() / expect - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_kernel() {
        let k = Kernel::constant();
        assert_eq!(k.i1(3.0), Some(3.0));
        assert_eq!(k.i2(3.0), Some(4.5));
    }

    #[test]
    fn unit_buildup_equals_exponential() {
        let e = Kernel::exponential(0.8).unwrap();
        let b = Kernel::buildup(0.8, vec![1.0]).unwrap();
        for l in probe_grid() {
            assert!((e.phi(l) - b.phi(l)).abs() < 1e-15);
            assert!((e.i1(l).unwrap() - b.i1(l).unwrap()).abs() < 1e-15);
            assert!((e.i2(l).unwrap() - b.i2(l).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_buildup_matches_closed_form() {
        let (s, b) = (1.3, 0.6);
        let k = Kernel::buildup(s, vec![1.0, b]).unwrap();
        for l in probe_grid() {
            let e = (-s * l).exp();
            let expect = (1.0 - e) + b * (1.0 / s - e * (l + 1.0 / s));
            assert!((k.i1(l).unwrap() - expect).abs() < 1e-13, "l={l}");
        }
    }

    #[test]
    fn buildup_rejects_bad_polynomial() {
        assert!(Kernel::buildup(1.0, vec![2.0, 1.0]).is_err());
        assert!(Kernel::buildup(1.0, vec![]).is_err());
        assert!(Kernel::buildup(-1.0, vec![1.0]).is_err());
    }

    #[test]
    fn closed_forms_differentiate_back() {
        let kernels = [
            Kernel::exponential(0.5).unwrap(),
            Kernel::exponential(3.0).unwrap(),
            Kernel::constant(),
            Kernel::buildup(1.1, vec![1.0, 0.4, 0.05]).unwrap(),
        ];
        let h = 1e-5;
        for k in &kernels {
            for l in probe_grid() {
                let d1 = (k.i1(l + h).unwrap() - k.i1(l - h).unwrap()) / (2.0 * h);
                let d2 = (k.i2(l + h).unwrap() - k.i2(l - h).unwrap()) / (2.0 * h);
                let (p, i1) = (k.phi(l), k.i1(l).unwrap());
                assert!((d1 - p).abs() <= 1e-6 * p.abs().max(1e-3), "{k:?} l={l}");
                assert!((d2 - i1).abs() <= 1e-6 * i1.abs().max(1e-3), "{k:?} l={l}");
            }
        }
    }

    #[test]
    fn numeric_constant_is_exact() {
        let g = probe_grid();
        let (i1, i2) = numeric_antiderivatives(|_| 1.0, &g).unwrap();
        for ((l, a), b) in g.iter().zip(&i1).zip(&i2) {
            assert!((a - l).abs() < 1e-12);
            assert!((b - 0.5 * l * l).abs() < 1e-12, "{} vs {}", b, 0.5 * l * l);
        }
    }

    #[test]
    fn numeric_quadratic_is_exact() {
        let g = probe_grid();
        let (i1, _) = numeric_antiderivatives(|x| x * x, &g).unwrap();
        for (l, a) in g.iter().zip(&i1) {
            assert!((a - l * l * l / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn numeric_matches_exponential_closed_form() {
        let k = Kernel::exponential(1.0).unwrap();
        let g = probe_grid();
        let (i1, i2) = numeric_antiderivatives(|x| k.phi(x), &g).unwrap();
        for ((l, a), b) in g.iter().zip(&i1).zip(&i2) {
            assert!((a - k.i1(*l).unwrap()).abs() < 1e-8);
            assert!((b - k.i2(*l).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn numeric_rejects_nan_and_negative_grid() {
        assert!(numeric_antiderivatives(|x| if x > 1.0 { f64::NAN } else { 1.0 }, &[0.5, 2.0]).is_err());
        assert!(numeric_antiderivatives(|_| 1.0, &[-1.0, 2.0]).is_err());
    }

    #[test]
    fn table_kernel_goes_numeric() {
        let k = Kernel::table(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 0.0]).unwrap();
        assert!(!k.has_analytic_antiderivatives());
        assert_eq!(k.phi(1.5), 0.5);
        assert_eq!(k.phi(5.0), 0.0);
        let t = k.tabulate(&[1.0, 2.0]).unwrap();
        assert!((t.i1[0] - 1.0).abs() < 1e-12);
        assert!((t.i1[1] - 1.5).abs() < 1e-12);
        // I2(1) = 1/2, I2(2) = 1/2 + 1 + ∫_1^2 (I1(r) - 1) dr = 1.5 + 1/3
        assert!((t.i2[0] - 0.5).abs() < 1e-12);
        assert!((t.i2[1] - (1.5 + 1.0 / 3.0)).abs() < 1e-12);
    }
}
