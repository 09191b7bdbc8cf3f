//! q-deformed combinatorics, q-Hermite polynomials and their orthogonality
//! weight v(x|q).
//!
//! The weight interpolates between the standard normal density (q = 1) and
//! the unit-variance semicircle (q = 0). Everything here works with the
//! standardized variable x (zero mean, unit variance), whose support for
//! q < 1 is |x| <= x0 = 2/sqrt(1-q).

use crate::error::{QembedError, Result};
use crate::quadrature;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

/// Above this value the Gaussian closed forms are used: the support bound
/// exceeds 63 and the infinite product converges too slowly to be useful.
pub const GAUSSIAN_CUTOFF: f64 = 0.999;

/// Interpolation parameter, restricted to the real interval [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QValue(f64);

impl QValue {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(QembedError::Domain(format!("q = {q} outside [0, 1]")));
        }
        Ok(QValue(q))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Whether the Gaussian closed forms should be used in place of the
    /// product representation.
    pub fn is_gaussian(self) -> bool {
        self.0 > GAUSSIAN_CUTOFF
    }
}

/// Numerical knobs for evaluating the weight function.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSettings {
    /// Number of kappa factors retained from the infinite product.
    pub product_truncation: usize,
    /// Total quadrature abscissae over the support.
    pub quadrature_points: usize,
    /// Accepted defect in the normalization integral.
    pub normalization_tolerance: f64,
}

impl Default for WeightSettings {
    fn default() -> Self {
        WeightSettings {
            product_truncation: 500,
            quadrature_points: 2048,
            normalization_tolerance: 1e-8,
        }
    }
}

impl WeightSettings {
    /// Truncation chosen so the dropped factors differ from 1 by less than
    /// 1e-14; the factors approach 1 geometrically in q^kappa.
    pub fn adaptive(q: QValue) -> Self {
        let q = q.get();
        let k = if q <= 0.0 {
            1
        } else {
            ((2.5e-15_f64.ln() / q.ln()).ceil() as usize).clamp(1, 500)
        };
        WeightSettings {
            product_truncation: k,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.product_truncation < 1 {
            return Err(QembedError::Domain("product_truncation must be >= 1".into()));
        }
        if self.quadrature_points < 16 {
            return Err(QembedError::Domain("quadrature_points must be >= 16".into()));
        }
        Ok(())
    }
}

/// Support bound x0 = 2/sqrt(1-q); infinite at q = 1.
pub fn support_bound(q: QValue) -> f64 {
    2.0 / (1.0 - q.get()).sqrt()
}

/// The q-number [n]_q = 1 + q + ... + q^(n-1).
pub fn q_number(n: u32, q: QValue) -> f64 {
    let q = q.get();
    if q == 1.0 {
        n as f64
    } else {
        (1.0 - q.powi(n as i32)) / (1.0 - q)
    }
}

/// The q-factorial [n]_q! with [0]_q! = 1.
pub fn q_factorial(n: u32, q: QValue) -> f64 {
    (1..=n).map(|j| q_number(j, q)).product()
}

/// H_n(x|q) by the three-term recursion
/// H_{n+1} = x H_n - [n]_q H_{n-1}, H_0 = 1, H_{-1} = 0.
pub fn q_hermite(n: u32, x: f64, q: QValue) -> f64 {
    let mut prev = 0.0; // H_{-1}
    let mut cur = 1.0; // H_0
    for j in 0..n {
        let next = x * cur - q_number(j, q) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// One factor of the infinite product, in the cancellation-free form
/// 1 - 4 u q^kappa / (1 + q^kappa)^2 with u = x^2/x0^2.
fn product_factor(u: f64, q_pow_kappa: f64) -> f64 {
    1.0 - 4.0 * u * q_pow_kappa / ((1.0 + q_pow_kappa) * (1.0 + q_pow_kappa))
}

/// The unnormalized weight sqrt(1 - x^2/x0^2) * prod_kappa [...] for q < 1.
pub fn weight_unnormalized(x: f64, q: QValue, settings: &WeightSettings) -> Result<f64> {
    settings.validate()?;
    if q.get() >= 1.0 {
        return Err(QembedError::Domain(
            "weight_unnormalized requires q < 1; use the Gaussian closed form".into(),
        ));
    }
    let x0 = support_bound(q);
    if x.abs() > x0 * (1.0 + 1e-12) {
        return Err(QembedError::Domain(format!(
            "|x| = {} outside support bound {x0}",
            x.abs()
        )));
    }
    let u = (x / x0) * (x / x0);
    let mut v = (1.0 - u).max(0.0).sqrt();
    let mut qk = 1.0;
    for _ in 0..settings.product_truncation {
        qk *= q.get();
        if qk == 0.0 {
            break;
        }
        v *= product_factor(u, qk);
        // Remaining factors are within 4*qk of unity.
        if 4.0 * qk < 1e-16 {
            break;
        }
    }
    Ok(v.max(0.0))
}

/// Quadrature grid over the support, substituted as x = x0 sin(theta) so the
/// square-root endpoint behavior becomes a smooth cos^2 and Gauss-Legendre
/// converges spectrally.
pub fn weight_grid(q: QValue, settings: &WeightSettings) -> Vec<(f64, f64)> {
    let x0 = support_bound(q);
    let half_pi = std::f64::consts::FRAC_PI_2;
    quadrature::panel_rule(-half_pi, half_pi, settings.quadrature_points)
        .into_iter()
        .map(|(theta, w)| (x0 * theta.sin(), w * x0 * theta.cos()))
        .collect()
}

type NormKey = (u64, usize, usize);
static NORM_CACHE: Lazy<Mutex<HashMap<NormKey, f64>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn norm_key(q: QValue, settings: &WeightSettings) -> NormKey {
    // q rounded to 12 digits so nearby floats share a cache slot.
    let rounded = (q.get() * 1e12).round() as u64;
    (rounded, settings.product_truncation, settings.quadrature_points)
}

/// Normalization constant N_q with int N_q * weight_unnormalized = 1.
pub fn normalization_constant(q: QValue, settings: &WeightSettings) -> Result<f64> {
    settings.validate()?;
    if q.get() >= 1.0 {
        return Err(QembedError::Domain(
            "normalization_constant requires q < 1".into(),
        ));
    }
    let key = norm_key(q, settings);
    if let Some(&n) = NORM_CACHE.lock().unwrap().get(&key) {
        return Ok(n);
    }
    let raw: f64 = weight_grid(q, settings)
        .iter()
        .map(|&(x, w)| w * weight_unnormalized(x, q, settings).unwrap_or(0.0))
        .sum();
    if !raw.is_finite() || raw <= 0.0 {
        return Err(QembedError::Numerical(format!(
            "weight integral non-positive or non-finite ({raw}) at q = {}",
            q.get()
        )));
    }
    // Cross-check against a coarser rule to detect non-convergence.
    let coarse_settings = WeightSettings {
        quadrature_points: settings.quadrature_points / 2,
        ..settings.clone()
    };
    let coarse: f64 = weight_grid(q, &coarse_settings)
        .iter()
        .map(|&(x, w)| w * weight_unnormalized(x, q, settings).unwrap_or(0.0))
        .sum();
    let defect = ((raw - coarse) / raw).abs();
    if defect > settings.normalization_tolerance {
        return Err(QembedError::Numerical(format!(
            "normalization quadrature not converged at q = {}: defect {defect:e} \
             with {} points",
            q.get(),
            settings.quadrature_points
        )));
    }
    let n = 1.0 / raw;
    NORM_CACHE.lock().unwrap().insert(key, n);
    Ok(n)
}

/// Normalized density v(x|q).
///
/// Exact closed forms are used at the endpoints of the q interval: the
/// standard normal at q = 1 (and q > 0.999) and the unit-variance
/// semicircle at q = 0.
pub fn weight_pdf(x: f64, q: QValue, settings: &WeightSettings) -> Result<f64> {
    if q.is_gaussian() || q.get() == 1.0 {
        return Ok((-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt());
    }
    if q.get() == 0.0 {
        return Ok(if x.abs() >= 2.0 {
            0.0
        } else {
            (4.0 - x * x).sqrt() / (2.0 * std::f64::consts::PI)
        });
    }
    let x0 = support_bound(q);
    if x.abs() >= x0 {
        return Ok(0.0);
    }
    let n = normalization_constant(q, settings)?;
    Ok(n * weight_unnormalized(x, q, settings)?)
}

/// Coefficients (exact integers) of the polynomial
/// mu_2n(q) = (1-q)^{-n} sum_r C(2n, n+r) (-1)^r q^{r(r-1)/2}.
///
/// The alternating sum is divisible by (1-q)^n; carrying out that division
/// exactly avoids the catastrophic cancellation of the raw formula near
/// q = 1 and gives the q = 1 limit (2n-1)!! for free.
fn moment_polynomial(n: u32) -> Vec<BigInt> {
    let n = n as usize;
    let max_pow = n * (n + 1) / 2;
    let mut p = vec![BigInt::zero(); max_pow + 1];
    // C(2n, j) row of Pascal's triangle.
    let mut c = vec![BigInt::from(1u32)];
    for j in 1..=2 * n {
        let prev = c.last().unwrap().clone();
        c.push(prev * (2 * n - j + 1) / j);
    }
    for r in -(n as i64)..=(n as i64) {
        let pow = (r * (r - 1) / 2) as usize;
        let coeff = c[(n as i64 + r) as usize].clone();
        if r % 2 == 0 {
            p[pow] += coeff;
        } else {
            p[pow] -= coeff;
        }
    }
    // Divide by (1-q) n times: s_i = p_i + s_{i-1}, exact each round.
    for _ in 0..n {
        let len = p.len();
        let mut s = vec![BigInt::zero(); len - 1];
        let mut acc = BigInt::zero();
        for i in 0..len - 1 {
            acc += &p[i];
            s[i] = acc.clone();
        }
        debug_assert!(*s.last().unwrap() == -p[len - 1].clone(), "non-zero remainder");
        p = s;
    }
    p
}

/// The 2n-th reduced moment of v(x|q); mu_0 = 1, mu_2 = 1, mu_4 = 2 + q.
pub fn moment_closed_form(n: u32, q: QValue) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let coeffs = moment_polynomial(n);
    let mut acc = 0.0;
    for c in coeffs.iter().rev() {
        acc = acc * q.get() + big_to_f64(c);
    }
    acc
}

fn big_to_f64(b: &BigInt) -> f64 {
    b.to_f64().unwrap_or_else(|| {
        if b.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
