//! Moore-Penrose inverses and the class-preserving maps built on them:
//! pinv maps, the reflection duality between the S and T sides, congruence
//! sums and transposition.

use serde::Serialize;

use crate::classifier::{self, RTOL_RANK};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};
use crate::matmeasure::{Atom, HermMatrix, MatrixMeasure, PsdMatrix, SupportSet, PSD_RTOL};
use crate::stieltjes_repr::{
    Evaluator, KKPair, NevanlinnaTriple, Repr, S0Measure, SInfTriple, StieltjesPair, T0Measure, TInfTriple, TPair,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinvResult {
    #[serde(serialize_with = "crate::json::ser_mat")]
    pub pinv: CMat,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Default relative cutoff for numerical rank: `1e-12 q`.
pub fn default_rtol(q: usize) -> f64 {
    1e-12 * q as f64
}

/// SVD-based pseudoinverse; singular values at or below `rtol * sigma_1` are dropped.
pub fn pinv(m: &CMat, rtol: f64) -> PinvResult {
    let d = linalg::svd(m);
    let rank = linalg::rank_of(&d.s, rtol);
    let mut p = CMat::zeros(m.ncols(), m.nrows());
    for k in 0..rank {
        let v = d.v.column(k);
        let u = d.u.column(k);
        p += (v * u.adjoint()).unscale(d.s[k]);
    }
    PinvResult { pinv: p, rank, singular_values: d.s }
}

/// Worst relative residual of the four Penrose identities.
pub fn penrose_residual(a: &CMat, ap: &CMat) -> f64 {
    let na = 1.0 + linalg::opnorm(a);
    let np = 1.0 + linalg::opnorm(ap);
    let aap = a * ap;
    let apa = ap * a;
    [
        linalg::opnorm(&(&aap * a - a)) / na,
        linalg::opnorm(&(&apa * ap - ap)) / np,
        linalg::opnorm(&(aap.adjoint() - &aap)) / (1.0 + linalg::opnorm(&aap)),
        linalg::opnorm(&(apa.adjoint() - &apa)) / (1.0 + linalg::opnorm(&apa)),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// For an EP matrix (`R(A*) = R(A)`), the residual of `Im(A+) = -A+ (Im A) (A+)*`.
/// `None` if `A` is not EP to projector tolerance.
pub fn ep_identity_residual(a: &CMat, rtol: f64) -> Option<f64> {
    let r = linalg::range_projector(a, RTOL_RANK);
    let r_adj = linalg::range_projector(&a.adjoint(), RTOL_RANK);
    if linalg::opnorm(&(&r - &r_adj)) > classifier::PROJ_TOL {
        return None;
    }
    let ap = pinv(a, rtol).pinv;
    let lhs = linalg::im_part(&ap);
    let rhs = -(&ap * linalg::im_part(a) * ap.adjoint());
    Some(linalg::opnorm(&(&lhs - &rhs)) / (1.0 + linalg::opnorm(&ap).powi(2) * linalg::opnorm(a)))
}

/// Refuse maps through pinv when the rank of `F` is not constant on eight
/// probe points, since pinv is discontinuous across rank changes.
fn rank_guard(f: &Evaluator) -> Result<usize> {
    let ex = f.excluded();
    let pts = classifier::structure_points(ex.endpoint, !ex.is_right());
    Ok(classifier::rank_constancy(f, &pts[..8])?.rank)
}

fn pinv_eval(f: &Evaluator, z: C64) -> Result<CMat> {
    let v = f.eval(z)?;
    Ok(pinv(&v, default_rtol(v.nrows())).pinv)
}

/// `G(z) = -(z - alpha)^{-1} F(z)+` for an S-side `F`, or
/// `-(beta - z)^{-1} F(z)+` for a T-side one. The side and endpoint
/// come from the evaluator's excluded set.
pub fn pinv_map(f: &Evaluator) -> Result<Evaluator> {
    rank_guard(f)?;
    let ex = f.excluded();
    let c = C64::new(ex.endpoint, 0.0);
    let right = ex.is_right();
    let inner = f.clone();
    Ok(Evaluator::from_fn(f.q(), ex, move |z| {
        let lin = if right { z - c } else { c - z };
        Ok(-pinv_eval(&inner, z)? / lin)
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// S-infinity to S.
    SinfToS,
    /// S to S-infinity.
    SToSinf,
    /// T-infinity to T.
    TinfToT,
    /// T to T-infinity.
    TToTinf,
}

impl Direction {
    pub fn source(self) -> classifier::ClassKind {
        use classifier::ClassKind as K;
        match self {
            Direction::SinfToS => K::Sinf,
            Direction::SToSinf => K::S,
            Direction::TinfToT => K::Tinf,
            Direction::TToTinf => K::T,
        }
    }

    pub fn target(self) -> classifier::ClassKind {
        use classifier::ClassKind as K;
        match self {
            Direction::SinfToS => K::S,
            Direction::SToSinf => K::Sinf,
            Direction::TinfToT => K::T,
            Direction::TToTinf => K::Tinf,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "sinf_to_s" => Direction::SinfToS,
            "s_to_sinf" => Direction::SToSinf,
            "tinf_to_t" => Direction::TinfToT,
            "t_to_tinf" => Direction::TToTinf,
            _ => return None,
        })
    }
}

/// `G(z) = -F(z)+`. The map is its own inverse on the classes it connects;
/// `direction` records which side of the equivalence is being exercised.
pub fn neg_pinv_map(f: &Evaluator, direction: Direction) -> Result<Evaluator> {
    if f.excluded().is_right() == direction.source().is_t_side() {
        return Err(Error::ClassMismatch(format!("{direction:?} does not match the excluded set {}", f.excluded())));
    }
    rank_guard(f)?;
    let inner = f.clone();
    Ok(Evaluator::from_fn(f.q(), f.excluded(), move |z| Ok(-pinv_eval(&inner, z)?)))
}

/// Pushforward under `t -> c - t`, landing on `target`; nodes that rounding
/// moves past the new endpoint are clamped onto it.
fn reflect(mu: &MatrixMeasure, c: f64, target: SupportSet) -> Result<MatrixMeasure> {
    let e = target.endpoint;
    let atoms = mu
        .atoms()
        .iter()
        .map(|a| {
            let s = c - a.t;
            let s = if target.is_right() { s.max(e) } else { s.min(e) };
            Atom { t: s, w: a.w.clone() }
        })
        .collect();
    MatrixMeasure::from_atoms(mu.q(), target, atoms)
}

fn open(s: SupportSet) -> SupportSet {
    if s.is_right() {
        SupportSet::open_right_ray(s.endpoint)
    } else {
        SupportSet::open_left_ray(s.endpoint)
    }
}

/// The reflected function `G(z) = -[F(a + b - conj z)]*` between the S and T sides,
/// where `a` is the current endpoint and `b = target`. Applying it twice with
/// the endpoints swapped returns the input.
pub fn dual_map(repr: &Repr, target: f64) -> Result<Repr> {
    let e = repr.endpoint().ok_or_else(|| Error::UnsupportedKind(repr.kind().to_string()))?;
    let c = e + target;
    Ok(match repr {
        Repr::Pair(p) => {
            Repr::TPair(TPair::new(target, p.gamma().clone(), reflect(p.mu(), c, SupportSet::left_ray(target))?)?)
        }
        Repr::S0(s) => Repr::T0(T0Measure::new(target, reflect(s.sigma(), c, SupportSet::left_ray(target))?)?),
        Repr::SInf(s) => Repr::TInf(TInfTriple::new(
            target,
            s.d().clone(),
            s.e().clone(),
            reflect(s.rho(), c, open(SupportSet::left_ray(target)))?,
        )?),
        Repr::TPair(p) => Repr::Pair(StieltjesPair::new(
            target,
            p.gamma().clone(),
            reflect(p.mu(), c, SupportSet::right_ray(target))?,
        )?),
        Repr::T0(s) => Repr::S0(S0Measure::new(target, reflect(s.sigma(), c, SupportSet::right_ray(target))?)?),
        Repr::TInf(s) => Repr::SInf(SInfTriple::new(
            target,
            s.d().clone(),
            s.e().clone(),
            reflect(s.rho(), c, open(SupportSet::right_ray(target)))?,
        )?),
        Repr::Kk(_) | Repr::Nevanlinna(_) => return Err(Error::UnsupportedKind(repr.kind().to_string())),
    })
}

/// `-[F(a + b - conj z)]*` computed directly from an evaluator.
pub fn dual_evaluator(f: &Evaluator, target: f64) -> Evaluator {
    let c = f.endpoint() + target;
    let ex = if f.excluded().is_right() { SupportSet::left_ray(target) } else { SupportSet::right_ray(target) };
    let inner = f.clone();
    Evaluator::from_fn(f.q(), ex, move |z| Ok(-inner.eval(C64::new(c, 0.0) - z.conj())?.adjoint()))
}

fn congruence(a: &CMat, m: &CMat) -> CMat {
    linalg::re_part(&(a.adjoint() * m * a))
}

fn as_pair(repr: &Repr) -> Result<StieltjesPair> {
    match repr {
        Repr::Pair(p) => Ok(p.clone()),
        Repr::S0(s) => crate::stieltjes_repr::s0_to_pair(s),
        Repr::Kk(k) => crate::stieltjes_repr::kk_to_pair(k),
        _ => Err(Error::UnsupportedKind(repr.kind().to_string())),
    }
}

/// `G = sum A_k* F_k A_k` for pairs `F_k` (q_k x q_k) sharing `alpha` and `A_k` of size q_k x q.
pub fn congruence_sum(terms: &[(CMat, Repr)]) -> Result<StieltjesPair> {
    let (first_a, first_r) = terms.first().ok_or_else(|| Error::InvalidInput("empty congruence sum".into()))?;
    let q = first_a.ncols();
    let alpha = first_r.endpoint().ok_or_else(|| Error::UnsupportedKind(first_r.kind().to_string()))?;
    let mut gamma = linalg::zeros(q);
    let mut atoms = Vec::new();
    for (k, (a, r)) in terms.iter().enumerate() {
        let p = as_pair(r)?;
        if p.alpha() != alpha {
            return Err(Error::InvalidInput(format!("term {k} has alpha {} but term 0 has {alpha}", p.alpha())));
        }
        if a.ncols() != q || a.nrows() != p.q() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{q}", p.q()),
                found: format!("{}x{} in term {k}", a.nrows(), a.ncols()),
            });
        }
        gamma += congruence(a, p.gamma().mat());
        for at in p.mu().atoms() {
            atoms.push(Atom { t: at.t, w: PsdMatrix::new(congruence(a, at.w.mat()))? });
        }
    }
    let mu = MatrixMeasure::from_atoms(q, SupportSet::right_ray(alpha), atoms)?;
    StieltjesPair::new(alpha, PsdMatrix::new(gamma)?, mu)
}

/// S0 variant: `sigma_G = sum A_k* sigma_k A_k`.
pub fn congruence_sum_s0(terms: &[(CMat, S0Measure)]) -> Result<S0Measure> {
    let (first_a, first) = terms.first().ok_or_else(|| Error::InvalidInput("empty congruence sum".into()))?;
    let q = first_a.ncols();
    let alpha = first.alpha();
    let mut atoms = Vec::new();
    for (k, (a, s)) in terms.iter().enumerate() {
        if s.alpha() != alpha {
            return Err(Error::InvalidInput(format!("term {k} has alpha {} but term 0 has {alpha}", s.alpha())));
        }
        if a.ncols() != q || a.nrows() != s.q() {
            return Err(Error::DimensionMismatch {
                expected: format!("{}x{q}", s.q()),
                found: format!("{}x{} in term {k}", a.nrows(), a.ncols()),
            });
        }
        for at in s.sigma().atoms() {
            atoms.push(Atom { t: at.t, w: PsdMatrix::new(congruence(a, at.w.mat()))? });
        }
    }
    S0Measure::new(alpha, MatrixMeasure::from_atoms(q, SupportSet::right_ray(alpha), atoms)?)
}

/// Block-diagonal direct sum `diag(F_1, ..., F_n)` of pairs sharing `alpha`.
pub fn direct_sum(pairs: &[StieltjesPair]) -> Result<StieltjesPair> {
    let total: usize = pairs.iter().map(|p| p.q()).sum();
    let mut terms = Vec::with_capacity(pairs.len());
    let mut offset = 0;
    for p in pairs {
        // Selector A_k = [0 .. I .. 0] of size q_k x total.
        let mut a = CMat::zeros(p.q(), total);
        for i in 0..p.q() {
            a[(i, offset + i)] = C64::new(1.0, 0.0);
        }
        offset += p.q();
        terms.push((a, Repr::Pair(p.clone())));
    }
    congruence_sum(&terms)
}

/// `F + A` for Hermitian `A`, provided `gamma + A` stays PSD.
pub fn shift(pair: &StieltjesPair, a: &HermMatrix) -> Result<StieltjesPair> {
    let g = pair.gamma().mat() + a.mat();
    let lmin = linalg::lambda_min(&g);
    if lmin < -PSD_RTOL * (1.0 + linalg::opnorm(&g)) {
        return Err(Error::ShiftNotPsd { lambda_min: lmin });
    }
    StieltjesPair::new(pair.alpha(), PsdMatrix::new(g)?, pair.mu().clone())
}

/// Transpose every matrix parameter; the result represents `F(z)^T`.
pub fn transpose_map(repr: &Repr) -> Result<Repr> {
    Ok(match repr {
        Repr::Pair(p) => Repr::Pair(StieltjesPair::new(p.alpha(), p.gamma().transpose(), p.mu().transpose())?),
        Repr::Kk(k) => Repr::Kk(KKPair::new(k.alpha(), k.c().transpose(), k.eta().transpose())?),
        Repr::Nevanlinna(n) => {
            Repr::Nevanlinna(NevanlinnaTriple::new(n.a().transpose(), n.b().transpose(), n.nu().transpose())?)
        }
        Repr::S0(s) => Repr::S0(S0Measure::new(s.alpha(), s.sigma().transpose())?),
        Repr::SInf(s) => {
            Repr::SInf(SInfTriple::new(s.alpha(), s.d().transpose(), s.e().transpose(), s.rho().transpose())?)
        }
        Repr::TPair(p) => Repr::TPair(TPair::new(p.beta(), p.gamma().transpose(), p.mu().transpose())?),
        Repr::T0(s) => Repr::T0(T0Measure::new(s.beta(), s.sigma().transpose())?),
        Repr::TInf(s) => {
            Repr::TInf(TInfTriple::new(s.beta(), s.d().transpose(), s.e().transpose(), s.rho().transpose())?)
        }
    })
}
