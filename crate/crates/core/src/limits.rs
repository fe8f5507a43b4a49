//! Limits at infinity of black-box evaluators via Richardson extrapolation.
//!
//! Samples are taken on a geometric ladder `y_k = y0 * 2^k`. All the
//! representations are analytic in `1/y` at infinity, so two elimination
//! passes (orders 1 and 2 in `1/y`) give rapid convergence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::stieltjes_repr::Evaluator;

pub const Y0: f64 = 1.0;
pub const K_MAX: usize = 48;
pub const LIM_RTOL: f64 = 1e-10;
/// Rounding floor for the reported error bound, in units of machine epsilon
/// times the largest ladder sample.
const ROUNDING_ULPS: f64 = 32.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    #[serde(serialize_with = "crate::json::ser_mat")]
    pub value: CMat,
    pub error_bound: f64,
    pub ladder_depth: usize,
}

/// Extrapolate `lim_{h -> 0} sample(h)` along `h_k = h0 * 2^-k`, for `sample` analytic in `h`.
pub fn richardson<G>(h0: f64, k_max: usize, sample: G) -> Result<LimitEstimate>
where
    G: Fn(f64) -> Result<CMat>,
{
    ladder(k_max, |k| sample(h0 * 0.5f64.powi(k as i32)))
}

fn ladder<G>(k_max: usize, sample: G) -> Result<LimitEstimate>
where
    G: Fn(usize) -> Result<CMat>,
{
    let mut a_prev = sample(0)?;
    let mut sample_max = linalg::frobenius(&a_prev);
    let mut e_prev = a_prev.clone();
    let mut r1_prev: Option<CMat> = None;
    let mut increment = f64::INFINITY;
    for k in 1..=k_max {
        let a = sample(k)?;
        sample_max = sample_max.max(linalg::frobenius(&a));
        let r1 = a.scale(2.0) - &a_prev;
        let e = match &r1_prev {
            None => r1.clone(),
            Some(r1p) => (r1.scale(4.0) - r1p).unscale(3.0),
        };
        increment = linalg::frobenius(&(&e - &e_prev));
        let norm = linalg::frobenius(&e);
        if increment < LIM_RTOL * (1.0 + norm) {
            let floor = ROUNDING_ULPS * f64::EPSILON * sample_max;
            return Ok(LimitEstimate { value: e, error_bound: increment.max(floor), ladder_depth: k });
        }
        a_prev = a;
        r1_prev = Some(r1);
        if k == k_max {
            return Err(Error::NoConvergence {
                depth: k,
                increment,
                last_norm: norm,
                last: linalg::to_pairs(&e),
                previous: linalg::to_pairs(&e_prev),
            });
        }
        e_prev = e;
    }
    Err(Error::NoConvergence {
        depth: k_max,
        increment,
        last_norm: linalg::frobenius(&e_prev),
        last: linalg::to_pairs(&e_prev),
        previous: linalg::to_pairs(&e_prev),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum LimitMode {
    /// `lim F(iy)`
    PlainIy,
    /// `lim -i y F(iy)`
    YScaled,
    /// `lim F(c + r e^{i phi})`, `phi` in `(pi/2, 3pi/2)`, `c` the endpoint
    Radial { phi: f64 },
    /// `-lim G(iy)`
    NegPlain,
    /// `lim -i y G(iy)` for T-side functions
    NegYScaled,
}

impl LimitMode {
    pub fn radial_default() -> Self {
        LimitMode::Radial { phi: std::f64::consts::PI }
    }

    pub fn parse(s: &str, phi: Option<f64>) -> Option<Self> {
        Some(match s {
            "plain_iy" => LimitMode::PlainIy,
            "y_scaled" => LimitMode::YScaled,
            "radial" => LimitMode::Radial { phi: phi.unwrap_or(std::f64::consts::PI) },
            "neg_plain" => LimitMode::NegPlain,
            "neg_y_scaled" => LimitMode::NegYScaled,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    pub y0: f64,
    pub k_max: usize,
    /// Center of radial rays; defaults to the evaluator's endpoint.
    pub center: Option<f64>,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { y0: Y0, k_max: K_MAX, center: None }
    }
}

pub fn limit_at_infinity(f: &Evaluator, mode: LimitMode) -> Result<LimitEstimate> {
    limit_at_infinity_with(f, mode, LimitOptions::default())
}

pub fn limit_at_infinity_with(f: &Evaluator, mode: LimitMode, opts: LimitOptions) -> Result<LimitEstimate> {
    let i = C64::new(0.0, 1.0);
    let y_at = |k: usize| opts.y0 * 2f64.powi(k as i32);
    match mode {
        LimitMode::PlainIy => ladder(opts.k_max, |k| f.eval(i * y_at(k))),
        LimitMode::NegPlain => ladder(opts.k_max, |k| Ok(-f.eval(i * y_at(k))?)),
        LimitMode::YScaled | LimitMode::NegYScaled => ladder(opts.k_max, |k| {
            let y = y_at(k);
            Ok(f.eval(i * y)? * C64::new(0.0, -y))
        }),
        LimitMode::Radial { phi } => {
            let (lo, hi) = (std::f64::consts::FRAC_PI_2, 3.0 * std::f64::consts::FRAC_PI_2);
            if !(phi > lo && phi < hi) {
                return Err(Error::InvalidInput(format!("radial angle {phi} outside (pi/2, 3pi/2)")));
            }
            let c = opts.center.unwrap_or_else(|| f.endpoint());
            let dir = C64::from_polar(1.0, phi);
            ladder(opts.k_max, |k| f.eval(C64::new(c, 0.0) + dir * y_at(k)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimedClass {
    S,
    S0,
    Sdot,
    /// `F` in the S-infinity class, read through `P(z) = F(z)/(z - alpha)`.
    SinfProduct,
    T,
    T0,
}

impl ClaimedClass {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "s" => ClaimedClass::S,
            "s0" => ClaimedClass::S0,
            "sdot" => ClaimedClass::Sdot,
            "sinf" | "sinf_product" => ClaimedClass::SinfProduct,
            "t" => ClaimedClass::T,
            "t0" => ClaimedClass::T0,
            _ => return None,
        })
    }
}

/// Limit-defined parameters recovered from an evaluator.
#[derive(Debug, Clone, Serialize)]
pub struct ParamRecord {
    pub class: ClaimedClass,
    pub endpoint: f64,
    /// gamma for S, Sdot, S0 (must vanish for the latter two); E for S-infinity; gamma for T, T0.
    pub constant: LimitEstimate,
    /// Total mass of the alpha-Stieltjes measure (S0, T0), or of `(1+t-alpha) mu` for S.
    pub mass: Option<LimitEstimate>,
    /// `lim F(alpha + r e^{i pi})`, cross-checked against `constant`.
    pub radial: Option<LimitEstimate>,
}

fn hermitian_psd_violation(m: &CMat) -> f64 {
    let asym = linalg::frobenius(&(m - m.adjoint()));
    let lmin = linalg::lambda_min(m);
    asym.max(-lmin)
}

pub fn extract_params(f: &Evaluator, alpha: f64, class: ClaimedClass) -> Result<ParamRecord> {
    let opts = LimitOptions { center: Some(alpha), ..LimitOptions::default() };
    let scale = 1.0 + linalg::frobenius(&f.eval(C64::new(alpha - 1.0, 1.0))?);
    let slack = |e: &LimitEstimate| e.error_bound + 1e-9 * (1.0 + linalg::frobenius(&e.value));
    let require_psd = |name: &str, e: &LimitEstimate| -> Result<()> {
        let v = hermitian_psd_violation(&e.value);
        if v > slack(e) {
            return Err(Error::ClassMismatch(format!("{name} is not Hermitian PSD (violation {v:.3e})")));
        }
        Ok(())
    };
    let require_zero = |name: &str, e: &LimitEstimate| -> Result<()> {
        let n = linalg::frobenius(&e.value);
        if n > e.error_bound + 1e-9 * scale {
            return Err(Error::ClassMismatch(format!("{name} should vanish but has norm {n:.3e}")));
        }
        Ok(())
    };
    let radial_check = |g: &Evaluator, constant: &LimitEstimate| -> Result<LimitEstimate> {
        let r = limit_at_infinity_with(g, LimitMode::radial_default(), opts)?;
        let gap = linalg::frobenius(&(&r.value - &constant.value));
        if gap > r.error_bound + constant.error_bound {
            return Err(Error::ClassMismatch(format!(
                "radial limit differs from the imaginary-axis limit by {gap:.3e} (bounds {:.3e} + {:.3e})",
                r.error_bound, constant.error_bound
            )));
        }
        Ok(r)
    };

    let record = match class {
        ClaimedClass::S => {
            let gamma = limit_at_infinity_with(f, LimitMode::PlainIy, opts)?;
            require_psd("gamma", &gamma)?;
            let radial = radial_check(f, &gamma)?;
            // -2iy (F(iy) - F(2iy)) -> int (1+t-alpha) mu(dt) for atomic mu
            let i = C64::new(0.0, 1.0);
            let mass = ladder(K_MAX, |k| {
                let y = 2f64.powi(k as i32);
                Ok((f.eval(i * y)? - f.eval(i * (2.0 * y))?) * C64::new(0.0, -2.0 * y))
            })
            .ok();
            ParamRecord { class, endpoint: alpha, constant: gamma, mass, radial: Some(radial) }
        }
        ClaimedClass::Sdot => {
            let gamma = limit_at_infinity_with(f, LimitMode::PlainIy, opts)?;
            require_zero("lim F(iy)", &gamma)?;
            let radial = radial_check(f, &gamma)?;
            ParamRecord { class, endpoint: alpha, constant: gamma, mass: None, radial: Some(radial) }
        }
        ClaimedClass::S0 => {
            let gamma = limit_at_infinity_with(f, LimitMode::PlainIy, opts)?;
            require_zero("lim F(iy)", &gamma)?;
            let mass = limit_at_infinity_with(f, LimitMode::YScaled, opts)?;
            require_psd("sigma mass", &mass)?;
            ParamRecord { class, endpoint: alpha, constant: gamma, mass: Some(mass), radial: None }
        }
        ClaimedClass::SinfProduct => {
            let p = f.div_linear(alpha);
            let e = limit_at_infinity_with(&p, LimitMode::PlainIy, opts)?;
            require_psd("E", &e)?;
            let radial = radial_check(&p, &e)?;
            ParamRecord { class, endpoint: alpha, constant: e, mass: None, radial: Some(radial) }
        }
        ClaimedClass::T => {
            let gamma = limit_at_infinity_with(f, LimitMode::NegPlain, opts)?;
            require_psd("gamma", &gamma)?;
            ParamRecord { class, endpoint: alpha, constant: gamma, mass: None, radial: None }
        }
        ClaimedClass::T0 => {
            let gamma = limit_at_infinity_with(f, LimitMode::NegPlain, opts)?;
            require_zero("lim G(iy)", &gamma)?;
            let mass = limit_at_infinity_with(f, LimitMode::NegYScaled, opts)?;
            require_psd("sigma mass", &mass)?;
            ParamRecord { class, endpoint: alpha, constant: gamma, mass: Some(mass), radial: None }
        }
    };
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_diag;
    use crate::matmeasure::{MatrixMeasure, PsdMatrix, SupportSet};
    use crate::stieltjes_repr::{Repr, StieltjesPair};

    fn e1256(alpha: f64, a: &[f64], b: &[f64]) -> Repr {
        let s = SupportSet::right_ray(alpha);
        let mu = MatrixMeasure::dirac(alpha, PsdMatrix::new(real_diag(b)).unwrap(), s).unwrap();
        Repr::Pair(StieltjesPair::new(alpha, PsdMatrix::new(real_diag(a)).unwrap(), mu).unwrap())
    }

    #[test]
    fn constant_converges_at_depth_one() {
        let g = real_diag(&[2.0, 0.5]);
        let f = Evaluator::constant(g.clone(), SupportSet::right_ray(0.0));
        let est = limit_at_infinity(&f, LimitMode::PlainIy).unwrap();
        assert_eq!(est.ladder_depth, 1);
        assert_eq!(est.value, g);
    }

    #[test]
    fn e1256_plain_limit_is_a() {
        let f = e1256(0.0, &[1.0, 3.0], &[2.0, 5.0]).evaluator();
        let est = limit_at_infinity(&f, LimitMode::PlainIy).unwrap();
        assert!((est.value - real_diag(&[1.0, 3.0])).norm() <= 1e-8);
    }

    #[test]
    fn y_scaled_gives_mass() {
        let f = e1256(0.75, &[0.0, 0.0], &[2.0, 5.0]).evaluator();
        let est = limit_at_infinity(&f, LimitMode::YScaled).unwrap();
        assert!((est.value - real_diag(&[2.0, 5.0])).norm() <= 1e-8);
    }

    #[test]
    fn divergent_limit_reports_no_convergence() {
        let f = Evaluator::from_fn(1, SupportSet::right_ray(0.0), |z: C64| Ok(real_diag(&[1.0]) * z));
        let r = limit_at_infinity_with(&f, LimitMode::PlainIy, LimitOptions { k_max: 10, ..Default::default() });
        assert!(matches!(r, Err(Error::NoConvergence { depth: 10, .. })));
    }

    #[test]
    fn radial_angle_validated() {
        let f = Evaluator::constant(real_diag(&[1.0]), SupportSet::right_ray(0.0));
        assert!(limit_at_infinity(&f, LimitMode::Radial { phi: 0.1 }).is_err());
    }

    #[test]
    fn extract_examples() {
        let c = e1256(0.0, &[1.5, 0.5], &[0.0, 0.0]).evaluator();
        let rec = extract_params(&c, 0.0, ClaimedClass::S).unwrap();
        assert_eq!(rec.constant.value, real_diag(&[1.5, 0.5]));
        assert!(rec.mass.unwrap().value.norm() < 1e-12);

        let b = e1256(0.0, &[0.0, 0.0], &[2.0, 1.0]).evaluator();
        let rec = extract_params(&b, 0.0, ClaimedClass::S0).unwrap();
        assert!((rec.mass.unwrap().value - real_diag(&[2.0, 1.0])).norm() < 1e-8);

        let s = SupportSet::right_ray(0.0);
        let mu = MatrixMeasure::dirac(1.0, PsdMatrix::identity(2), s).unwrap();
        let p = Repr::Pair(StieltjesPair::new(0.0, PsdMatrix::new(real_diag(&[1.0, 0.0])).unwrap(), mu).unwrap());
        let rec = extract_params(&p.evaluator(), 0.0, ClaimedClass::S).unwrap();
        assert!((rec.constant.value - real_diag(&[1.0, 0.0])).norm() < 1e-8);

        let mismatch = extract_params(&p.evaluator(), 0.0, ClaimedClass::Sdot);
        assert!(matches!(mismatch, Err(Error::ClassMismatch(_))));
    }
}
