//! Parameterizations of matrix Stieltjes functions and their dual classes.
//!
//! S-side (singularities on `[alpha, +inf)`):
//!
//! | type | formula |
//! |------|---------|
//! | [`StieltjesPair`] | `gamma + sum (1+t-alpha)/(t-z) W` |
//! | [`KKPair`] | `C + sum (1+t^2)/(t-z) eta` |
//! | [`NevanlinnaTriple`] | `A + z B + sum (1+t z)/(t-z) nu` |
//! | [`S0Measure`] | `sum W/(t-z)` |
//! | [`SInfTriple`] | `-D + (z-alpha) [E + sum (1+t-alpha)/(t-z) rho]` |
//!
//! T-side (singularities on `(-inf, beta]`):
//!
//! | type | formula |
//! |------|---------|
//! | [`TPair`] | `-gamma + sum (1+beta-t)/(t-z) W` |
//! | [`T0Measure`] | `sum W/(t-z)` |
//! | [`TInfTriple`] | `D + (beta-z) [-E + sum (1+beta-t)/(t-z) rho]` |
//!
//! All evaluations are finite atomic sums. The accumulation order is fixed so
//! that `F(conj z) == F(z)*` holds bit for bit.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{self, LimitEstimate};
use crate::linalg::{self, CMat, C64};
use crate::matmeasure::{Atom, HermMatrix, MatrixMeasure, PsdMatrix, SupportSet};

pub const NEAR_RTOL: f64 = 1e-9;

pub fn near_tol(z: C64) -> f64 {
    NEAR_RTOL * (1.0 + z.norm())
}

fn check_pole(z: C64, excluded: &SupportSet) -> Result<()> {
    let tol = near_tol(z);
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // a NaN distance counts as too close
    if !(excluded.distance(z) >= tol) {
        return Err(Error::PoleProximity { re: z.re, im: z.im, tol });
    }
    Ok(())
}

fn check_dim(what: &str, found: usize, q: usize) -> Result<()> {
    if found != q {
        return Err(Error::DimensionMismatch {
            expected: format!("{what} of size {q}x{q}"),
            found: format!("{found}x{found}"),
        });
    }
    Ok(())
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(1 + t - alpha)/(t - z)`
fn kernel_s(t: f64, alpha: f64, z: C64) -> C64 {
    re(1.0 + t - alpha) / (re(t) - z)
}

/// `(1 + beta - t)/(t - z)`
fn kernel_t(t: f64, beta: f64, z: C64) -> C64 {
    re(1.0 + beta - t) / (re(t) - z)
}

fn kernel_0(t: f64, z: C64) -> C64 {
    re(1.0) / (re(t) - z)
}

fn accumulate<K: Fn(f64) -> C64>(acc: &mut CMat, mu: &MatrixMeasure, k: K) {
    for a in mu.atoms() {
        *acc += a.w.mat() * k(a.t);
    }
}

fn is_negligible(m: &PsdMatrix, scale: f64) -> bool {
    m.is_zero() || linalg::opnorm(m.mat()) <= crate::matmeasure::PSD_RTOL * (1.0 + scale)
}

// ---------------------------------------------------------------------------
// S-side types

#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesPair {
    alpha: f64,
    gamma: PsdMatrix,
    mu: MatrixMeasure,
}

impl StieltjesPair {
    /// The measure's nodes must lie in `[alpha, +inf)`; it is re-supported there.
    pub fn new(alpha: f64, gamma: PsdMatrix, mu: MatrixMeasure) -> Result<Self> {
        check_dim("gamma", gamma.q(), mu.q())?;
        let mu = mu.with_support(SupportSet::right_ray(alpha))?;
        Ok(StieltjesPair { alpha, gamma, mu })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn gamma(&self) -> &PsdMatrix {
        &self.gamma
    }
    pub fn mu(&self) -> &MatrixMeasure {
        &self.mu
    }
    pub fn q(&self) -> usize {
        self.gamma.q()
    }

    pub fn eval(&self, z: C64) -> Result<CMat> {
        check_pole(z, &SupportSet::right_ray(self.alpha))?;
        let mut f = self.gamma.mat().clone();
        accumulate(&mut f, &self.mu, |t| kernel_s(t, self.alpha, z));
        Ok(f)
    }

    /// `F^mulz(z) = (z - alpha) F(z)`.
    pub fn eval_mulz(&self, z: C64) -> Result<CMat> {
        Ok(self.eval(z)? * (z - re(self.alpha)))
    }

    /// Closed-form `(Re F(z), Im F(z))` from the atomic sums.
    pub fn im_re_parts(&self, z: C64) -> Result<(HermMatrix, HermMatrix)> {
        check_pole(z, &SupportSet::right_ray(self.alpha))?;
        let mut re_f = self.gamma.mat().clone();
        let mut im_f = linalg::zeros(self.q());
        for a in self.mu.atoms() {
            let d2 = (re(a.t) - z).norm_sqr();
            let c = 1.0 + a.t - self.alpha;
            re_f += a.w.mat().scale(c * (a.t - z.re) / d2);
            im_f += a.w.mat().scale(z.im * c / d2);
        }
        Ok((HermMatrix::new(re_f)?, HermMatrix::new(im_f)?))
    }

    /// Closed form of `Im F^mulz(z) = Im z [gamma + sum (1+t-alpha)(t-alpha)/|t-z|^2 W]`.
    pub fn mulz_im_closed(&self, z: C64) -> Result<HermMatrix> {
        check_pole(z, &SupportSet::right_ray(self.alpha))?;
        let mut acc = self.gamma.mat().clone();
        for a in self.mu.atoms() {
            let d2 = (re(a.t) - z).norm_sqr();
            acc += a.w.mat().scale((1.0 + a.t - self.alpha) * (a.t - self.alpha) / d2);
        }
        HermMatrix::new(acc.scale(z.im))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KKPair {
    alpha: f64,
    c: PsdMatrix,
    eta: MatrixMeasure,
}

impl KKPair {
    pub fn new(alpha: f64, c: PsdMatrix, eta: MatrixMeasure) -> Result<Self> {
        check_dim("C", c.q(), eta.q())?;
        let eta = eta.with_support(SupportSet::right_ray(alpha))?;
        Ok(KKPair { alpha, c, eta })
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn c(&self) -> &PsdMatrix {
        &self.c
    }
    pub fn eta(&self) -> &MatrixMeasure {
        &self.eta
    }
    pub fn q(&self) -> usize {
        self.c.q()
    }
    pub fn eval(&self, z: C64) -> Result<CMat> {
        check_pole(z, &SupportSet::right_ray(self.alpha))?;
        let mut f = self.c.mat().clone();
        accumulate(&mut f, &self.eta, |t| re(1.0 + t * t) / (re(t) - z));
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NevanlinnaTriple {
    a: HermMatrix,
    b: PsdMatrix,
    nu: MatrixMeasure,
}

impl NevanlinnaTriple {
    /// `nu` is re-supported on the whole line.
    pub fn new(a: HermMatrix, b: PsdMatrix, nu: MatrixMeasure) -> Result<Self> {
        check_dim("A", a.q(), nu.q())?;
        check_dim("B", b.q(), nu.q())?;
        let nu = nu.with_support(SupportSet::line())?;
        Ok(NevanlinnaTriple { a, b, nu })
    }
    pub fn a(&self) -> &HermMatrix {
        &self.a
    }
    pub fn b(&self) -> &PsdMatrix {
        &self.b
    }
    pub fn nu(&self) -> &MatrixMeasure {
        &self.nu
    }
    pub fn q(&self) -> usize {
        self.a.q()
    }

    /// Smallest right ray containing every node of `nu`.
    pub fn pole_ray(&self) -> SupportSet {
        match self.nu.node_range() {
            Some((lo, _)) => SupportSet::right_ray(lo),
            None => SupportSet::right_ray(f64::INFINITY),
        }
    }

    pub fn eval(&self, z: C64) -> Result<CMat> {
        if let Some((lo, hi)) = self.nu.node_range() {
            let x = z.re.clamp(lo, hi);
            let tol = near_tol(z);
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !((z.re - x).hypot(z.im) >= tol) {
                return Err(Error::PoleProximity { re: z.re, im: z.im, tol });
            }
        }
        let mut f = self.a.mat() + self.b.mat() * z;
        accumulate(&mut f, &self.nu, |t| (re(1.0) + z * t) / (re(t) - z));
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct S0Measure {
    alpha: f64,
    sigma: MatrixMeasure,
}

impl S0Measure {
    pub fn new(alpha: f64, sigma: MatrixMeasure) -> Result<Self> {
        let sigma = sigma.with_support(SupportSet::right_ray(alpha))?;
        Ok(S0Measure { alpha, sigma })
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn sigma(&self) -> &MatrixMeasure {
        &self.sigma
    }
    pub fn q(&self) -> usize {
        self.sigma.q()
    }
    pub fn eval(&self, z: C64) -> Result<CMat> {
        check_pole(z, &SupportSet::right_ray(self.alpha))?;
        let mut f = linalg::zeros(self.q());
        accumulate(&mut f, &self.sigma, |t| kernel_0(t, z));
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SInfTriple {
    alpha: f64,
    d: PsdMatrix,
    e: PsdMatrix,
    rho: MatrixMeasure,
}

impl SInfTriple {
    /// `rho` must not charge `alpha` itself; its support is `(alpha, +inf)`.
    pub fn new(alpha: f64, d: PsdMatrix, e: PsdMatrix, rho: MatrixMeasure) -> Result<Self> {
        check_dim("D", d.q(), rho.q())?;
        check_dim("E", e.q(), rho.q())?;
        let rho = rho.with_support(SupportSet::open_right_ray(alpha))?;
        Ok(SInfTriple { alpha, d, e, rho })
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn d(&self) -> &PsdMatrix {
        &self.d
    }
    pub fn e(&self) -> &PsdMatrix {
        &self.e
    }
    pub fn rho(&self) -> &MatrixMeasure {
        &self.rho
    }
    pub fn q(&self) -> usize {
        self.d.q()
    }
    pub fn eval(&self, z: C64) -> Result<CMat> {
        check_pole(z, &SupportSet::right_ray(self.alpha))?;
        let mut inner = self.e.mat().clone();
        accumulate(&mut inner, &self.rho, |t| kernel_s(t, self.alpha, z));
        Ok(inner * (z - re(self.alpha)) - self.d.mat())
    }
}

// ---------------------------------------------------------------------------
// T-side types

#[derive(Debug, Clone, PartialEq)]
pub struct TPair {
    beta: f64,
    gamma: PsdMatrix,
    mu: MatrixMeasure,
}

impl TPair {
    pub fn new(beta: f64, gamma: PsdMatrix, mu: MatrixMeasure) -> Result<Self> {
        check_dim("gamma", gamma.q(), mu.q())?;
        let mu = mu.with_support(SupportSet::left_ray(beta))?;
        Ok(TPair { beta, gamma, mu })
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn gamma(&self) -> &PsdMatrix {
        &self.gamma
    }
    pub fn mu(&self) -> &MatrixMeasure {
        &self.mu
    }
    pub fn q(&self) -> usize {
        self.gamma.q()
    }
    pub fn eval(&self, z: C64) -> Result<CMat> {
        check_pole(z, &SupportSet::left_ray(self.beta))?;
        let mut f = -self.gamma.mat();
        accumulate(&mut f, &self.mu, |t| kernel_t(t, self.beta, z));
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct T0Measure {
    beta: f64,
    sigma: MatrixMeasure,
}

impl T0Measure {
    pub fn new(beta: f64, sigma: MatrixMeasure) -> Result<Self> {
        let sigma = sigma.with_support(SupportSet::left_ray(beta))?;
        Ok(T0Measure { beta, sigma })
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn sigma(&self) -> &MatrixMeasure {
        &self.sigma
    }
    pub fn q(&self) -> usize {
        self.sigma.q()
    }
    pub fn eval(&self, z: C64) -> Result<CMat> {
        check_pole(z, &SupportSet::left_ray(self.beta))?;
        let mut f = linalg::zeros(self.q());
        accumulate(&mut f, &self.sigma, |t| kernel_0(t, z));
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TInfTriple {
    beta: f64,
    d: PsdMatrix,
    e: PsdMatrix,
    rho: MatrixMeasure,
}

impl TInfTriple {
    pub fn new(beta: f64, d: PsdMatrix, e: PsdMatrix, rho: MatrixMeasure) -> Result<Self> {
        check_dim("D", d.q(), rho.q())?;
        check_dim("E", e.q(), rho.q())?;
        let rho = rho.with_support(SupportSet::open_left_ray(beta))?;
        Ok(TInfTriple { beta, d, e, rho })
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn d(&self) -> &PsdMatrix {
        &self.d
    }
    pub fn e(&self) -> &PsdMatrix {
        &self.e
    }
    pub fn rho(&self) -> &MatrixMeasure {
        &self.rho
    }
    pub fn q(&self) -> usize {
        self.d.q()
    }
    pub fn eval(&self, z: C64) -> Result<CMat> {
        check_pole(z, &SupportSet::left_ray(self.beta))?;
        let mut inner = -self.e.mat();
        accumulate(&mut inner, &self.rho, |t| kernel_t(t, self.beta, z));
        Ok(inner * (re(self.beta) - z) + self.d.mat())
    }
}

// ---------------------------------------------------------------------------
// Tagged union

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprKind {
    StieltjesPair,
    KkPair,
    Nevanlinna,
    S0,
    SinfTriple,
    TPair,
    T0,
    TinfTriple,
}

impl ReprKind {
    pub const ALL: [ReprKind; 8] = [
        ReprKind::StieltjesPair,
        ReprKind::KkPair,
        ReprKind::Nevanlinna,
        ReprKind::S0,
        ReprKind::SinfTriple,
        ReprKind::TPair,
        ReprKind::T0,
        ReprKind::TinfTriple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReprKind::StieltjesPair => "stieltjes_pair",
            ReprKind::KkPair => "kk_pair",
            ReprKind::Nevanlinna => "nevanlinna",
            ReprKind::S0 => "s0",
            ReprKind::SinfTriple => "sinf_triple",
            ReprKind::TPair => "t_pair",
            ReprKind::T0 => "t0",
            ReprKind::TinfTriple => "tinf_triple",
        }
    }

    pub fn parse(s: &str) -> Option<ReprKind> {
        ReprKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_t_side(self) -> bool {
        matches!(self, ReprKind::TPair | ReprKind::T0 | ReprKind::TinfTriple)
    }
}

impl fmt::Display for ReprKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Repr {
    Pair(StieltjesPair),
    Kk(KKPair),
    Nevanlinna(NevanlinnaTriple),
    S0(S0Measure),
    SInf(SInfTriple),
    TPair(TPair),
    T0(T0Measure),
    TInf(TInfTriple),
}

impl Repr {
    pub fn kind(&self) -> ReprKind {
        match self {
            Repr::Pair(_) => ReprKind::StieltjesPair,
            Repr::Kk(_) => ReprKind::KkPair,
            Repr::Nevanlinna(_) => ReprKind::Nevanlinna,
            Repr::S0(_) => ReprKind::S0,
            Repr::SInf(_) => ReprKind::SinfTriple,
            Repr::TPair(_) => ReprKind::TPair,
            Repr::T0(_) => ReprKind::T0,
            Repr::TInf(_) => ReprKind::TinfTriple,
        }
    }

    pub fn q(&self) -> usize {
        match self {
            Repr::Pair(r) => r.q(),
            Repr::Kk(r) => r.q(),
            Repr::Nevanlinna(r) => r.q(),
            Repr::S0(r) => r.q(),
            Repr::SInf(r) => r.q(),
            Repr::TPair(r) => r.q(),
            Repr::T0(r) => r.q(),
            Repr::TInf(r) => r.q(),
        }
    }

    /// `alpha` for S-side kinds, `beta` for T-side kinds, `None` for Nevanlinna triples.
    pub fn endpoint(&self) -> Option<f64> {
        match self {
            Repr::Pair(r) => Some(r.alpha()),
            Repr::Kk(r) => Some(r.alpha()),
            Repr::Nevanlinna(_) => None,
            Repr::S0(r) => Some(r.alpha()),
            Repr::SInf(r) => Some(r.alpha()),
            Repr::TPair(r) => Some(r.beta()),
            Repr::T0(r) => Some(r.beta()),
            Repr::TInf(r) => Some(r.beta()),
        }
    }

    /// The closed ray off which the represented function is holomorphic.
    pub fn excluded_set(&self) -> SupportSet {
        match self {
            Repr::Nevanlinna(r) => r.pole_ray(),
            Repr::TPair(_) | Repr::T0(_) | Repr::TInf(_) => SupportSet::left_ray(self.endpoint().unwrap()),
            _ => SupportSet::right_ray(self.endpoint().unwrap()),
        }
    }

    pub fn eval(&self, z: C64) -> Result<CMat> {
        match self {
            Repr::Pair(r) => r.eval(z),
            Repr::Kk(r) => r.eval(z),
            Repr::Nevanlinna(r) => r.eval(z),
            Repr::S0(r) => r.eval(z),
            Repr::SInf(r) => r.eval(z),
            Repr::TPair(r) => r.eval(z),
            Repr::T0(r) => r.eval(z),
            Repr::TInf(r) => r.eval(z),
        }
    }

    pub fn evaluator(&self) -> Evaluator {
        let r = Arc::new(self.clone());
        Evaluator::from_fn(self.q(), self.excluded_set(), move |z| r.eval(z))
    }

    /// The principal measure (mu, eta, nu, sigma or rho).
    pub fn measure(&self) -> &MatrixMeasure {
        match self {
            Repr::Pair(r) => r.mu(),
            Repr::Kk(r) => r.eta(),
            Repr::Nevanlinna(r) => r.nu(),
            Repr::S0(r) => r.sigma(),
            Repr::SInf(r) => r.rho(),
            Repr::TPair(r) => r.mu(),
            Repr::T0(r) => r.sigma(),
            Repr::TInf(r) => r.rho(),
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluator

type EvalFn = dyn Fn(C64) -> Result<CMat> + Send + Sync;

/// A black-box matrix function with a declared excluded set.
#[derive(Clone)]
pub struct Evaluator {
    q: usize,
    excluded: SupportSet,
    f: Arc<EvalFn>,
}

impl fmt::Debug for Evaluator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Evaluator").field("q", &self.q).field("excluded", &self.excluded).finish()
    }
}

impl Evaluator {
    pub fn from_fn<F>(q: usize, excluded: SupportSet, f: F) -> Self
    where
        F: Fn(C64) -> Result<CMat> + Send + Sync + 'static,
    {
        Evaluator { q, excluded, f: Arc::new(f) }
    }

    pub fn constant(value: CMat, excluded: SupportSet) -> Self {
        let q = value.nrows();
        Evaluator::from_fn(q, excluded, move |_| Ok(value.clone()))
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn excluded(&self) -> SupportSet {
        self.excluded
    }

    pub fn endpoint(&self) -> f64 {
        self.excluded.endpoint
    }

    pub fn eval(&self, z: C64) -> Result<CMat> {
        check_pole(z, &self.excluded)?;
        let v = (self.f)(z)?;
        if v.nrows() != self.q || v.ncols() != self.q {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", self.q),
                found: format!("{}x{}", v.nrows(), v.ncols()),
            });
        }
        if !linalg::is_finite(&v) {
            return Err(Error::EvaluationFailed { re: z.re, im: z.im, reason: "non-finite value".into() });
        }
        Ok(v)
    }

    /// `z -> (z - c) F(z)`.
    pub fn mul_linear(&self, c: f64) -> Evaluator {
        let inner = self.clone();
        Evaluator::from_fn(self.q, self.excluded, move |z| Ok(inner.eval(z)? * (z - re(c))))
    }

    /// `z -> F(z) / (z - c)`.
    pub fn div_linear(&self, c: f64) -> Evaluator {
        let inner = self.clone();
        Evaluator::from_fn(self.q, self.excluded, move |z| Ok(inner.eval(z)? / (z - re(c))))
    }

    /// `z -> F(z) + shift`.
    pub fn shifted(&self, shift: CMat) -> Evaluator {
        let inner = self.clone();
        Evaluator::from_fn(self.q, self.excluded, move |z| Ok(inner.eval(z)? + &shift))
    }
}

// ---------------------------------------------------------------------------
// Conversions

fn same_function_edges(kind: ReprKind) -> &'static [ReprKind] {
    use ReprKind::*;
    match kind {
        StieltjesPair => &[KkPair, S0],
        KkPair => &[StieltjesPair, Nevanlinna],
        Nevanlinna => &[KkPair],
        S0 => &[StieltjesPair],
        TPair => &[T0],
        T0 => &[TPair],
        SinfTriple | TinfTriple => &[],
    }
}

/// Convert between parameterizations.
///
/// Function-preserving conversions are composed along the graph
/// pair - KK - Nevanlinna, pair - S0, t_pair - t0. The S-infinity and
/// T-infinity triples convert only directly to and from the pair of the
/// quotient `P(z) = F(z)/(z - alpha)` (resp. `Q(z) = G(z)/(beta - z)`).
/// `endpoint` supplies `alpha` when leaving a Nevanlinna triple; it is
/// ignored otherwise.
pub fn convert(repr: &Repr, target: ReprKind, endpoint: Option<f64>) -> Result<Repr> {
    use ReprKind::*;
    let from = repr.kind();
    if from == target {
        return Ok(repr.clone());
    }
    match (from, target) {
        (SinfTriple, StieltjesPair) | (StieltjesPair, SinfTriple) | (TinfTriple, TPair) | (TPair, TinfTriple) => {
            return convert_step(repr, target, endpoint)
        }
        _ => {}
    }
    let mut prev: HashMap<ReprKind, ReprKind> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    while let Some(k) = queue.pop_front() {
        for &n in same_function_edges(k) {
            if n != from && !prev.contains_key(&n) {
                prev.insert(n, k);
                queue.push_back(n);
            }
        }
    }
    if !prev.contains_key(&target) {
        return Err(Error::UnsupportedPath { from: from.to_string(), to: target.to_string() });
    }
    let mut path = vec![target];
    while let Some(&p) = prev.get(path.last().unwrap()) {
        path.push(p);
        if p == from {
            break;
        }
    }
    path.reverse();
    let mut cur = repr.clone();
    for &k in &path[1..] {
        cur = convert_step(&cur, k, endpoint)?;
    }
    Ok(cur)
}

fn convert_step(repr: &Repr, target: ReprKind, endpoint: Option<f64>) -> Result<Repr> {
    use ReprKind as K;
    match (repr, target) {
        (Repr::Pair(p), K::KkPair) => Ok(Repr::Kk(pair_to_kk(p)?)),
        (Repr::Kk(k), K::StieltjesPair) => Ok(Repr::Pair(kk_to_pair(k)?)),
        (Repr::Kk(k), K::Nevanlinna) => Ok(Repr::Nevanlinna(kk_to_nevanlinna(k)?)),
        (Repr::Nevanlinna(n), K::KkPair) => Ok(Repr::Kk(nevanlinna_to_kk(n, endpoint)?)),
        (Repr::Pair(p), K::S0) => Ok(Repr::S0(pair_to_s0(p)?)),
        (Repr::S0(s), K::StieltjesPair) => Ok(Repr::Pair(s0_to_pair(s)?)),
        (Repr::SInf(s), K::StieltjesPair) => Ok(Repr::Pair(sinf_to_quotient_pair(s)?)),
        (Repr::Pair(p), K::SinfTriple) => Ok(Repr::SInf(quotient_pair_to_sinf(p)?)),
        (Repr::TPair(p), K::T0) => Ok(Repr::T0(tpair_to_t0(p)?)),
        (Repr::T0(s), K::TPair) => Ok(Repr::TPair(t0_to_tpair(s)?)),
        (Repr::TInf(s), K::TPair) => Ok(Repr::TPair(tinf_to_quotient_tpair(s)?)),
        (Repr::TPair(p), K::TinfTriple) => Ok(Repr::TInf(quotient_tpair_to_tinf(p)?)),
        _ => Err(Error::UnsupportedPath { from: repr.kind().to_string(), to: target.to_string() }),
    }
}

/// `C = gamma`, `eta = (1+t-alpha)/(1+t^2) mu`.
pub fn pair_to_kk(p: &StieltjesPair) -> Result<KKPair> {
    let a = p.alpha;
    let eta = p.mu.map_weights(p.mu.support(), |t, w| w.scale((1.0 + t - a) / (1.0 + t * t)))?;
    KKPair::new(a, p.gamma.clone(), eta)
}

/// `gamma = C`, `mu = (1+t^2)/(1+t-alpha) eta`.
pub fn kk_to_pair(k: &KKPair) -> Result<StieltjesPair> {
    let a = k.alpha;
    let mu = k.eta.map_weights(k.eta.support(), |t, w| w.scale((1.0 + t * t) / (1.0 + t - a)))?;
    StieltjesPair::new(a, k.c.clone(), mu)
}

fn first_moment(mu: &MatrixMeasure) -> CMat {
    let mut s = linalg::zeros(mu.q());
    for a in mu.atoms() {
        s += a.w.mat().scale(a.t);
    }
    s
}

/// `A = C + int t eta(dt)`, `B = 0`, `nu = eta` on the whole line.
pub fn kk_to_nevanlinna(k: &KKPair) -> Result<NevanlinnaTriple> {
    let a = HermMatrix::new(k.c.mat() + first_moment(&k.eta))?;
    NevanlinnaTriple::new(a, PsdMatrix::zero(k.q()), k.eta.clone())
}

/// Inverse of [`kk_to_nevanlinna`]; needs `B = 0`, `nu` on `[alpha, +inf)` and
/// `A - int t nu(dt)` PSD. Without an explicit `alpha` the smallest node is used.
pub fn nevanlinna_to_kk(n: &NevanlinnaTriple, alpha: Option<f64>) -> Result<KKPair> {
    let alpha = match (alpha, n.nu.node_range()) {
        (Some(a), _) => a,
        (None, Some((lo, _))) => lo,
        (None, None) => {
            return Err(Error::IllegalConversion("an endpoint alpha is required for a triple with zero measure".into()))
        }
    };
    if !is_negligible(&n.b, 0.0) {
        return Err(Error::IllegalConversion("B must vanish for a Stieltjes-class triple".into()));
    }
    let eta =
        n.nu.with_support(SupportSet::right_ray(alpha))
            .map_err(|_| Error::IllegalConversion(format!("nu charges (-inf, {alpha})")))?;
    let c = PsdMatrix::new(n.a.mat() - first_moment(&n.nu))
        .map_err(|e| Error::IllegalConversion(format!("A - int t nu(dt) is not PSD: {e}")))?;
    KKPair::new(alpha, c, eta)
}

/// Requires `gamma = 0`; `sigma = (1+t-alpha) mu`.
pub fn pair_to_s0(p: &StieltjesPair) -> Result<S0Measure> {
    let scale = linalg::opnorm(p.mu.total_mass().mat());
    if !is_negligible(&p.gamma, scale) {
        return Err(Error::IllegalConversion("gamma is nonzero, so the function is not in the S0 class".into()));
    }
    let a = p.alpha;
    let sigma = p.mu.map_weights(p.mu.support(), |t, w| w.scale(1.0 + t - a))?;
    S0Measure::new(a, sigma)
}

/// `gamma = 0`, `mu = sigma/(1+t-alpha)`.
pub fn s0_to_pair(s: &S0Measure) -> Result<StieltjesPair> {
    let a = s.alpha;
    let mu = s.sigma.map_weights(s.sigma.support(), |t, w| w.unscale(1.0 + t - a))?;
    StieltjesPair::new(a, PsdMatrix::zero(s.q()), mu)
}

/// Pair of `P(z) = F(z)/(z - alpha)`: `gamma_P = E`, `mu_P = rho + delta_alpha D`.
pub fn sinf_to_quotient_pair(s: &SInfTriple) -> Result<StieltjesPair> {
    let mut atoms: Vec<Atom> = s.rho.atoms().to_vec();
    atoms.push(Atom { t: s.alpha, w: s.d.clone() });
    let mu = MatrixMeasure::from_atoms(s.q(), SupportSet::right_ray(s.alpha), atoms)?;
    StieltjesPair::new(s.alpha, s.e.clone(), mu)
}

/// Inverse of [`sinf_to_quotient_pair`]: `D = mu({alpha})`, `E = gamma`, `rho = mu` off `alpha`.
pub fn quotient_pair_to_sinf(p: &StieltjesPair) -> Result<SInfTriple> {
    let (d, rho) = split_endpoint_atom(&p.mu, p.alpha, SupportSet::open_right_ray(p.alpha))?;
    SInfTriple::new(p.alpha, d, p.gamma.clone(), rho)
}

fn split_endpoint_atom(mu: &MatrixMeasure, e: f64, open: SupportSet) -> Result<(PsdMatrix, MatrixMeasure)> {
    let d = mu.atom_at(e).map_or_else(|| PsdMatrix::zero(mu.q()), |a| a.w.clone());
    let tol = crate::matmeasure::MERGE_RTOL * (1.0 + e.abs());
    let rho = mu.restrict(open, |t| (t - e).abs() > tol)?;
    Ok((d, rho))
}

pub fn tpair_to_t0(p: &TPair) -> Result<T0Measure> {
    let scale = linalg::opnorm(p.mu.total_mass().mat());
    if !is_negligible(&p.gamma, scale) {
        return Err(Error::IllegalConversion("gamma is nonzero, so the function is not in the T0 class".into()));
    }
    let b = p.beta;
    let sigma = p.mu.map_weights(p.mu.support(), |t, w| w.scale(1.0 + b - t))?;
    T0Measure::new(b, sigma)
}

pub fn t0_to_tpair(s: &T0Measure) -> Result<TPair> {
    let b = s.beta;
    let mu = s.sigma.map_weights(s.sigma.support(), |t, w| w.unscale(1.0 + b - t))?;
    TPair::new(b, PsdMatrix::zero(s.q()), mu)
}

/// Pair of `Q(z) = G(z)/(beta - z)`: `gamma_Q = E`, `mu_Q = rho + delta_beta D`.
pub fn tinf_to_quotient_tpair(s: &TInfTriple) -> Result<TPair> {
    let mut atoms: Vec<Atom> = s.rho.atoms().to_vec();
    atoms.push(Atom { t: s.beta, w: s.d.clone() });
    let mu = MatrixMeasure::from_atoms(s.q(), SupportSet::left_ray(s.beta), atoms)?;
    TPair::new(s.beta, s.e.clone(), mu)
}

pub fn quotient_tpair_to_tinf(p: &TPair) -> Result<TInfTriple> {
    let (d, rho) = split_endpoint_atom(&p.mu, p.beta, SupportSet::open_left_ray(p.beta))?;
    TInfTriple::new(p.beta, d, p.gamma.clone(), rho)
}

// ---------------------------------------------------------------------------
// Residues

/// Analytic mass of the pole at the atom `t0`: `(1+t0-alpha) W_0` for a pair,
/// `W_0` for an S0 measure.
pub fn residue_weight(repr: &Repr, t0: f64) -> Result<PsdMatrix> {
    let (mu, factor) = match repr {
        Repr::Pair(p) => (p.mu(), true),
        Repr::S0(s) => (s.sigma(), false),
        _ => return Err(Error::UnsupportedKind(repr.kind().to_string())),
    };
    let alpha = repr.endpoint().unwrap();
    let atom = mu.atom_at(t0).ok_or(Error::NotAnAtom { t0 })?;
    let scale = if factor { 1.0 + atom.t - alpha } else { 1.0 };
    PsdMatrix::new(atom.w.mat().scale(scale))
}

/// Numerical residue `lim (t0 - z) F(z)` along `z = t0 + i eps`, `eps = 2^-k`.
pub fn residue_weight_numeric(repr: &Repr, t0: f64) -> Result<LimitEstimate> {
    let ev = repr.evaluator();
    limits::richardson(1.0, limits::K_MAX, |h| {
        let z = C64::new(t0, h);
        Ok(ev.eval(z)? * (re(t0) - z))
    })
}
