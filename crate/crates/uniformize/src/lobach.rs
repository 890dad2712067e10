//! Lobachevsky-type special functions.
//!
//! The Lobachevsky function
//!
//! Л(x) = −∫₀ˣ log|2 sin ϑ| dϑ
//!
//! is odd, π-periodic and real analytic away from πℤ, with derivative
//! Л′(x) = −log|2 sin x| and second derivative Л″(x) = −cot x. Its global
//! maximum is Л(π/6) ≈ 0.507470803. On top of Л this module provides the two
//! edge functions
//!
//! I⁺_φ(x) = Л(x) + Л(φ−x) − 2Л(φ/2),
//! I⁻_φ(x) = Л(x) − Л(φ+x) + 2Л(π/2 + φ/2),
//!
//! the orthoscheme volume kernel V(x,y) and the auxiliary angle ω_γ(x,y); the
//! circle-pattern functional and both volume routes are assembled from these.
//!
//! Л is evaluated by reducing the argument to [−π/2, π/2] (oddness and
//! π-periodicity) and summing the log-sine series
//!
//! Л(x) = x(1 − log|2x|) + Σ_{k≥1} ζ(2k)·x^{2k+1} / (k(2k+1)π^{2k}),
//!
//! whose term ratio on the reduced interval is at most 1/4, so roughly thirty
//! terms give full double accuracy. The classical Fourier expansion
//! Л(x) = ½·Σ_{n≥1} sin(2nx)/n² is also implemented, as [`lob_fourier`]; it
//! converges far too slowly for production use and serves as an independent
//! cross-check oracle in tests.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use thiserror::Error;

/// Global maximum of |Л|, attained at x = π/6 + πℤ.
pub const LOB_MAX: f64 = 0.507_470_803_204_826_8;

/// Errors from the edge functions I⁺ and I⁻.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFnError {
    /// The opening parameter φ of an edge function must lie in (0, π).
    #[error("edge function parameter φ = {phi} lies outside the open interval (0, π)")]
    PhiOutOfRange { phi: f64 },
}

/// Tuning knobs for the slow Fourier evaluation of Л.
///
/// `series_terms` truncates the Fourier sum ½·Σ sin(2nx)/n²; `tol` is the
/// accuracy the caller intends to rely on (the truncation tail is below
/// 2/(N²·|sin x'|) where x' is the distance of x from πℤ, so callers must pick
/// `series_terms` to match `tol` on their domain).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnConfig {
    /// Number of Fourier terms retained.
    pub series_terms: usize,
    /// Target absolute accuracy.
    pub tol: f64,
}

impl Default for SpecialFnConfig {
    fn default() -> Self {
        Self {
            series_terms: 200_000,
            tol: 1e-8,
        }
    }
}

/// Number of cached even zeta values ζ(2), ζ(4), …
const ZETA_TERMS: usize = 36;

/// ζ(2k) for k = 1..=ZETA_TERMS.
///
/// The first five have the classical closed forms in powers of π; beyond
/// those, direct summation Σ n^{−2k} converges geometrically and is summed to
/// machine accuracy.
fn zeta_even_table() -> &'static [f64; ZETA_TERMS] {
    static TABLE: OnceLock<[f64; ZETA_TERMS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0_f64; ZETA_TERMS];
        t[0] = PI * PI / 6.0;
        t[1] = PI.powi(4) / 90.0;
        t[2] = PI.powi(6) / 945.0;
        t[3] = PI.powi(8) / 9450.0;
        t[4] = PI.powi(10) / 93555.0;
        for (k, slot) in t.iter_mut().enumerate().skip(5) {
            let exponent = -2.0 * (k + 1) as f64;
            let mut sum = 0.0;
            let mut n = 1.0_f64;
            loop {
                let term = n.powf(exponent);
                sum += term;
                if term < 1e-22 {
                    break;
                }
                n += 1.0;
            }
            *slot = sum;
        }
        t
    })
}

/// Л on the reduced interval [0, π/2].
fn lob_reduced(x: f64) -> f64 {
    debug_assert!((0.0..=FRAC_PI_2 + 1e-9).contains(&x));
    if x == 0.0 {
        return 0.0;
    }
    let mut sum = x * (1.0 - (2.0 * x).ln());
    let ratio = (x / PI) * (x / PI);
    let mut power = x;
    for (k, zeta) in zeta_even_table().iter().enumerate() {
        let kf = (k + 1) as f64;
        power *= ratio;
        let term = zeta * power / (kf * (2.0 * kf + 1.0));
        sum += term;
        if term < 1e-22 {
            break;
        }
    }
    sum
}

/// The Lobachevsky function Л(x) = −∫₀ˣ log|2 sin ϑ| dϑ.
///
/// Odd and π-periodic; accurate to roughly machine precision for arguments of
/// moderate size (the argument reduction subtracts the nearest multiple of π).
pub fn lob(x: f64) -> f64 {
    let reduced = x - PI * (x / PI).round();
    if reduced >= 0.0 {
        lob_reduced(reduced)
    } else {
        -lob_reduced(-reduced)
    }
}

/// First derivative Л′(x) = −log|2 sin x|. Diverges at x ∈ πℤ.
pub fn lob_deriv(x: f64) -> f64 {
    -(2.0 * x.sin()).abs().ln()
}

/// Second derivative Л″(x) = −cot x. Diverges at x ∈ πℤ.
pub fn lob_deriv2(x: f64) -> f64 {
    -x.cos() / x.sin()
}

/// Truncated Fourier expansion Л(x) ≈ ½·Σ_{n=1}^{N} sin(2nx)/n².
///
/// Converges like 1/N² away from πℤ (and only like 1/N uniformly), so this is
/// not the production evaluator; it exists as an independent oracle for
/// cross-checking [`lob`], summed smallest terms first for stable rounding.
pub fn lob_fourier(x: f64, cfg: &SpecialFnConfig) -> f64 {
    let mut sum = 0.0;
    for n in (1..=cfg.series_terms).rev() {
        let nf = n as f64;
        sum += (2.0 * nf * x).sin() / (nf * nf);
    }
    0.5 * sum
}

/// Ensures φ ∈ (0, π) for the edge functions.
fn check_phi(phi: f64) -> Result<(), SpecialFnError> {
    if phi > 0.0 && phi < PI {
        Ok(())
    } else {
        Err(SpecialFnError::PhiOutOfRange { phi })
    }
}

/// Edge function I⁺_φ(x) = Л(x) + Л(φ−x) − 2Л(φ/2).
///
/// Strictly concave in x on [0, φ], non-positive, with maximum 0 at x = φ/2
/// and minimum 2Л(π/2 + φ/2) at the endpoints.
///
/// # Errors
///
/// [`SpecialFnError::PhiOutOfRange`] if φ ∉ (0, π).
pub fn i_plus(phi: f64, x: f64) -> Result<f64, SpecialFnError> {
    check_phi(phi)?;
    Ok(lob(x) + lob(phi - x) - 2.0 * lob(phi / 2.0))
}

/// Edge function I⁻_φ(x) = Л(x) − Л(φ+x) + 2Л(π/2 + φ/2).
///
/// Normalized so that I⁻_φ(0) = −2Л(φ/2); for x ≤ 0 it satisfies
/// −I⁻_φ(x) − I⁺_φ(−x) = 2Л(φ/2) − 2Л(π/2 + φ/2), a constant in x.
///
/// # Errors
///
/// [`SpecialFnError::PhiOutOfRange`] if φ ∉ (0, π).
pub fn i_minus(phi: f64, x: f64) -> Result<f64, SpecialFnError> {
    check_phi(phi)?;
    Ok(lob(x) - lob(phi + x) + 2.0 * lob(FRAC_PI_2 + phi / 2.0))
}

/// Auxiliary angle ω_γ(x, y) = arctan( cos x · sin γ / (cos y + cos x · cos γ) ).
///
/// Uses the principal arctan branch extended to ±∞ ↦ ±π/2: a vanishing
/// denominator with non-vanishing numerator yields ±π/2 with the numerator's
/// sign, and 0/0 yields 0 by convention. Satisfies
/// ω_γ(x,y) + ω_γ(y,x) ≡ γ (mod π).
pub fn omega(gamma: f64, x: f64, y: f64) -> f64 {
    let numerator = x.cos() * gamma.sin();
    let denominator = y.cos() + x.cos() * gamma.cos();
    let quotient = numerator / denominator;
    if quotient.is_nan() {
        0.0
    } else {
        quotient.atan()
    }
}

/// Orthoscheme volume kernel V(x, y) = ¼Л(x+π/2−y) + ¼Л(−x+π/2−y) + ½Л(y).
///
/// Odd in y, symmetric under x ↦ π−x, and V(x, 0) = 0 for every x. The volume
/// of an ideal orthoscheme pair attached to a dart with angles (ψ, ψ′) across
/// an edge of exterior angle γ is 2V(ψ, ω_γ(ψ, ψ′)).
pub fn ortho_v(x: f64, y: f64) -> f64 {
    0.25 * lob(x + FRAC_PI_2 - y) + 0.25 * lob(-x + FRAC_PI_2 - y) + 0.5 * lob(y)
}
