//! Sampled certification of class membership and of the structural
//! (kernel, range, rank, eigenspace) statements.
//!
//! A certificate is evidence on a finite grid, never a proof. Every condition
//! reports its worst scaled margin together with the point where it occurred.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::limits::{self, LimitMode};
use crate::linalg::{self, CMat, C64};
use crate::matmeasure::PSD_RTOL;
use crate::stieltjes_repr::{self, Evaluator, Repr, StieltjesPair};
use crate::transforms;

pub const TOL_CERT: f64 = 1e-9;
pub const TOL_CR: f64 = 1e-6;
pub const RTOL_RANK: f64 = 1e-9;
pub const PROJ_TOL: f64 = 1e-9;
/// Largest relative growth of `y |F(iy)|` between `y = 2^20` and `y = 2^40`
/// still read as bounded.
pub const BOUNDED_GROWTH: f64 = 1e-3;
pub const MONO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    S,
    SViaPair,
    S0,
    Sdot,
    Sinf,
    T,
    TViaPair,
    T0,
    Tdot,
    Tinf,
}

impl ClassKind {
    pub const ALL: [ClassKind; 10] = [
        ClassKind::S,
        ClassKind::SViaPair,
        ClassKind::S0,
        ClassKind::Sdot,
        ClassKind::Sinf,
        ClassKind::T,
        ClassKind::TViaPair,
        ClassKind::T0,
        ClassKind::Tdot,
        ClassKind::Tinf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassKind::S => "s",
            ClassKind::SViaPair => "s_via_pair",
            ClassKind::S0 => "s0",
            ClassKind::Sdot => "sdot",
            ClassKind::Sinf => "sinf",
            ClassKind::T => "t",
            ClassKind::TViaPair => "t_via_pair",
            ClassKind::T0 => "t0",
            ClassKind::Tdot => "tdot",
            ClassKind::Tinf => "tinf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_t_side(self) -> bool {
        matches!(self, ClassKind::T | ClassKind::TViaPair | ClassKind::T0 | ClassKind::Tdot | ClassKind::Tinf)
    }
}

impl std::fmt::Display for ClassKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_upper: usize,
    pub n_lower: usize,
    pub n_gap: usize,
    /// Imaginary parts are drawn log-uniformly from this range; gap distances are log-spaced over it.
    pub im_range: [f64; 2],
    /// Real parts are drawn uniformly from `endpoint + re_offsets`.
    pub re_offsets: [f64; 2],
    pub seed: u64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n_upper: 64, n_lower: 64, n_gap: 32, im_range: [1e-3, 1e3], re_offsets: [-8.0, 8.0], seed: 42 }
    }
}

impl GridConfig {
    pub fn with_seed(seed: u64) -> Self {
        GridConfig { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.im_range;
        let [a, b] = self.re_offsets;
        if self.n_upper == 0 || self.n_lower == 0 || self.n_gap == 0 {
            return Err(Error::InvalidInput("grid counts must be at least 1".into()));
        }
        if !(lo > 0.0 && lo < hi && hi.is_finite()) || !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "bad grid ranges im {:?}, re {:?}",
                self.im_range, self.re_offsets
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_upper + self.n_lower + self.n_gap
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Upper,
    Lower,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub z: C64,
    pub region: Region,
}

/// Deterministic sample grid around `endpoint`. Gap points lie on the real
/// axis on the holomorphic side: left of `endpoint` for S-side classes,
/// right of it for T-side classes.
pub fn grid_points(cfg: &GridConfig, endpoint: f64, t_side: bool) -> Vec<GridPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (llo, lhi) = (cfg.im_range[0].log10(), cfg.im_range[1].log10());
    let [a, b] = cfg.re_offsets;
    let mut pts = Vec::with_capacity(cfg.len());
    for (n, sign, region) in [(cfg.n_upper, 1.0, Region::Upper), (cfg.n_lower, -1.0, Region::Lower)] {
        for _ in 0..n {
            let re = endpoint + rng.random_range(a..b);
            let im = 10f64.powf(rng.random_range(llo..lhi));
            pts.push(GridPoint { z: C64::new(re, sign * im), region });
        }
    }
    let side = if t_side { 1.0 } else { -1.0 };
    for k in 0..cfg.n_gap {
        let u = if cfg.n_gap == 1 { llo } else { llo + (lhi - llo) * k as f64 / (cfg.n_gap - 1) as f64 };
        pts.push(GridPoint { z: C64::new(endpoint + side * 10f64.powf(u), 0.0), region: Region::Gap });
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub name: String,
    pub margin: f64,
    pub witness_z: [f64; 2],
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: ClassKind,
    pub verdict: Verdict,
    pub endpoint: f64,
    pub tol_cert: f64,
    pub tol_cr: f64,
    pub conditions: Vec<ConditionResult>,
    pub grid: GridConfig,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn worst(&self) -> Option<&ConditionResult> {
        self.conditions.iter().min_by(|a, b| a.margin.total_cmp(&b.margin))
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Re-judge the same margins against a different certification tolerance.
    pub fn with_tol_cert(mut self, tol: f64) -> Self {
        self.tol_cert = tol;
        self.verdict = if self.conditions.iter().all(|c| c.margin >= -tol) { Verdict::Pass } else { Verdict::Fail };
        self
    }
}

fn finite_or_worst(m: f64) -> f64 {
    if m.is_finite() {
        m
    } else {
        -f64::MAX
    }
}

/// Scaled PSD margin of the Hermitian part.
fn psd_margin(m: &CMat, scale: f64) -> f64 {
    linalg::lambda_min(m) / (1.0 + scale)
}

/// Margin of `s * M >= 0` for a value that should be Hermitian (real axis).
fn real_psd_margin(m: &CMat, sign: f64) -> f64 {
    let norm = linalg::opnorm(m);
    let asym = linalg::opnorm(&linalg::im_part(m));
    let lmin = linalg::lambda_min(&m.scale(sign));
    lmin.min(-asym) / (1.0 + norm)
}

/// Cauchy-Riemann residual from symmetric differences in the real and
/// imaginary directions, scaled by the natural size `|F|/d` of a derivative.
fn cr_margin(f: &Evaluator, z: C64, value: &CMat) -> Result<f64> {
    let d = f.excluded().distance(z);
    let h = (1e-5 * (1.0 + z.norm())).min(1e-4 * d);
    let hx = C64::new(h, 0.0);
    let hy = C64::new(0.0, h);
    let dx = (f.eval(z + hx)? - f.eval(z - hx)?) / C64::new(2.0 * h, 0.0);
    let dy = (f.eval(z + hy)? - f.eval(z - hy)?) / C64::new(2.0 * h, 0.0);
    let num = linalg::opnorm(&(&dx + &dy * linalg::I));
    let den = linalg::opnorm(&dx) + linalg::opnorm(&dy) + linalg::opnorm(value) / d;
    let residual = if num == 0.0 { 0.0 } else { num / den };
    Ok(TOL_CR - residual)
}

struct PointEval {
    z: C64,
    region: Region,
    value: CMat,
    /// `(z - c) F(z)` with `c` the endpoint (S side) or `(c - z) F(z)` (T side).
    linear: CMat,
    norm: f64,
    cr: f64,
}

fn fold(name: &str, items: impl Iterator<Item = (f64, C64)>) -> Option<ConditionResult> {
    let mut best: Option<ConditionResult> = None;
    let mut n = 0;
    for (m, z) in items {
        n += 1;
        let m = finite_or_worst(m);
        if best.as_ref().is_none_or(|b| m < b.margin) {
            best = Some(ConditionResult { name: name.into(), margin: m, witness_z: [z.re, z.im], points: 0 });
        }
    }
    best.map(|mut b| {
        b.points = n;
        b
    })
}

pub fn certify_class(f: &Evaluator, endpoint: f64, kind: ClassKind, grid: &GridConfig) -> Result<Certificate> {
    certify_class_with(f, endpoint, kind, grid, Exec::default())
}

pub fn certify_class_with(
    f: &Evaluator,
    endpoint: f64,
    kind: ClassKind,
    grid: &GridConfig,
    exec: Exec,
) -> Result<Certificate> {
    grid.validate()?;
    let t_side = kind.is_t_side();
    let pts = grid_points(grid, endpoint, t_side);
    let c = C64::new(endpoint, 0.0);
    // F is undefined somewhere the class requires holomorphy: fail with the offending point.
    let undefined = pts.iter().filter(|p| f.excluded().distance(p.z) <= stieltjes_repr::near_tol(p.z));
    if let Some(domain) = fold("domain", undefined.map(|p| (-1.0, p.z))) {
        let conditions = vec![domain];
        return Ok(Certificate {
            kind,
            verdict: Verdict::Fail,
            endpoint,
            tol_cert: TOL_CERT,
            tol_cr: TOL_CR,
            conditions,
            grid: *grid,
        });
    }
    let evals = exec.map(&pts, |p| -> Result<PointEval> {
        let value = f.eval(p.z)?;
        let lin = if t_side { c - p.z } else { p.z - c };
        let linear = &value * lin;
        let norm = linalg::opnorm(&value);
        let cr = cr_margin(f, p.z, &value)?;
        Ok(PointEval { z: p.z, region: p.region, value, linear, norm, cr })
    });
    let evals = evals.into_iter().collect::<Result<Vec<_>>>()?;

    let upper = || evals.iter().filter(|e| e.region == Region::Upper);
    let lower = || evals.iter().filter(|e| e.region == Region::Lower);
    let gap = || evals.iter().filter(|e| e.region == Region::Gap);
    let off_axis = || evals.iter().filter(|e| e.region != Region::Gap);
    // Half-plane on the holomorphic side of the endpoint.
    let beyond = |e: &&PointEval| if t_side { e.z.re > endpoint } else { e.z.re < endpoint };

    let holo = || fold("holomorphy", evals.iter().map(|e| (e.cr, e.z)));
    let im_up = || fold("im_upper", upper().map(|e| (psd_margin(&linalg::im_part(&e.value), e.norm), e.z)));
    let im_low = || fold("im_lower", lower().map(|e| (psd_margin(&-linalg::im_part(&e.value), e.norm), e.z)));
    let im_up_linear = || {
        fold(
            "im_upper_linear_product",
            upper().map(|e| (psd_margin(&linalg::im_part(&e.linear), linalg::opnorm(&e.linear)), e.z)),
        )
    };
    let gap_sign = |name: &str, sign: f64| fold(name, gap().map(|e| (real_psd_margin(&e.value, sign), e.z)));
    let re_side = |name: &str, sign: f64| {
        fold(name, off_axis().filter(beyond).map(|e| (psd_margin(&linalg::re_part(&e.value).scale(sign), e.norm), e.z)))
    };

    // Every class is increasing along the real gap; a stray pole breaks this.
    let monotone = || {
        let mut g: Vec<&PointEval> = gap().collect();
        g.sort_by(|a, b| a.z.re.total_cmp(&b.z.re));
        fold(
            "gap_monotone",
            g.windows(2).map(|w| {
                let diff = linalg::re_part(&(&w[1].value - &w[0].value));
                (linalg::lambda_min(&diff) / (1.0 + w[0].norm + w[1].norm), w[1].z)
            }),
        )
    };

    let mut conds: Vec<Option<ConditionResult>> = Vec::new();
    match kind {
        ClassKind::S | ClassKind::S0 | ClassKind::Sdot => {
            conds.extend([
                holo(),
                im_up(),
                im_low(),
                gap_sign("gap_psd", 1.0),
                monotone(),
                re_side("re_left_psd", 1.0),
            ]);
        }
        ClassKind::SViaPair | ClassKind::TViaPair => conds.extend([holo(), im_up(), im_up_linear()]),
        ClassKind::Sinf => conds.extend([holo(), im_up(), im_low(), gap_sign("gap_nsd", -1.0), monotone()]),
        ClassKind::T | ClassKind::T0 | ClassKind::Tdot => {
            conds.extend([
                holo(),
                im_up(),
                im_low(),
                gap_sign("gap_nsd", -1.0),
                monotone(),
                re_side("re_right_nsd", -1.0),
            ]);
        }
        ClassKind::Tinf => conds.extend([holo(), im_up(), im_low(), gap_sign("gap_psd", 1.0), monotone()]),
    }
    match kind {
        ClassKind::S0 | ClassKind::T0 => conds.push(Some(boundedness(f)?)),
        ClassKind::Sdot | ClassKind::Tdot => conds.push(Some(vanishing(f)?)),
        _ => {}
    }
    let conditions: Vec<ConditionResult> = conds.into_iter().flatten().collect();
    let verdict = if conditions.iter().all(|c| c.margin >= -TOL_CERT) { Verdict::Pass } else { Verdict::Fail };
    Ok(Certificate { kind, verdict, endpoint, tol_cert: TOL_CERT, tol_cr: TOL_CR, conditions, grid: *grid })
}

/// `y |F(iy)|` must level off: compare `y = 2^20` against `y = 2^40`.
fn boundedness(f: &Evaluator) -> Result<ConditionResult> {
    let v = |y: f64| -> Result<f64> { Ok(y * linalg::opnorm(&f.eval(C64::new(0.0, y))?)) };
    let (y_mid, y_end) = (2f64.powi(20), 2f64.powi(40));
    let (v_mid, v_end) = (v(y_mid)?, v(y_end)?);
    let growth = (v_end - v_mid) / (1.0 + v_mid);
    Ok(ConditionResult {
        name: "bounded_y_norm".into(),
        margin: finite_or_worst(BOUNDED_GROWTH - growth),
        witness_z: [0.0, y_end],
        points: 2,
    })
}

/// `lim F(iy) = 0`.
fn vanishing(f: &Evaluator) -> Result<ConditionResult> {
    let scale = linalg::opnorm(&f.eval(linalg::I)?);
    let (margin, y) = match limits::limit_at_infinity(f, LimitMode::PlainIy) {
        Ok(est) => (-linalg::opnorm(&est.value) / (1.0 + scale), limits::Y0 * 2f64.powi(est.ladder_depth as i32)),
        Err(Error::NoConvergence { depth, last_norm, .. }) => {
            (-last_norm / (1.0 + scale), limits::Y0 * 2f64.powi(depth as i32))
        }
        Err(e) => return Err(e),
    };
    Ok(ConditionResult {
        name: "vanishing_at_infinity".into(),
        margin: finite_or_worst(margin),
        witness_z: [0.0, y],
        points: 1,
    })
}

// ---------------------------------------------------------------------------
// Structure statements

/// Ten moderate sample points off the excluded ray: eight complex, two real.
pub fn structure_points(endpoint: f64, t_side: bool) -> Vec<C64> {
    let s = if t_side { -1.0 } else { 1.0 };
    let e = endpoint;
    vec![
        C64::new(e - 4.0 * s, 1.0),
        C64::new(e - s, 0.1),
        C64::new(e + 0.5 * s, 2.0),
        C64::new(e + 3.0 * s, 10.0),
        C64::new(e + 8.0 * s, -0.5),
        C64::new(e + 1.5 * s, -5.0),
        C64::new(e - 2.0 * s, -0.25),
        C64::new(e, 1.0),
        C64::new(e - 0.5 * s, 0.0),
        C64::new(e - 2.0 * s, 0.0),
    ]
}

fn repr_points(repr: &Repr) -> Vec<C64> {
    let ex = repr.excluded_set();
    structure_points(ex.endpoint, !ex.is_right())
}

/// The parameter matrices whose common kernel is `N(F(z))`.
fn structure_params(repr: &Repr) -> Result<Vec<CMat>> {
    let mass = |r: &Repr| r.measure().total_mass().into_mat();
    Ok(match repr {
        Repr::Pair(p) => vec![p.gamma().mat().clone(), mass(repr)],
        Repr::Kk(k) => vec![k.c().mat().clone(), mass(repr)],
        Repr::Nevanlinna(n) => vec![n.a().mat().clone(), n.b().mat().clone(), mass(repr)],
        Repr::S0(_) | Repr::T0(_) => vec![mass(repr)],
        Repr::SInf(s) => vec![s.d().mat().clone(), s.e().mat().clone(), mass(repr)],
        Repr::TPair(p) => vec![p.gamma().mat().clone(), mass(repr)],
        Repr::TInf(s) => vec![s.d().mat().clone(), s.e().mat().clone(), mass(repr)],
    })
}

/// Projectors onto the intersection of kernels and the sum of ranges of Hermitian matrices.
pub fn common_null_and_range(ms: &[CMat]) -> (CMat, CMat) {
    let refs: Vec<&CMat> = ms.iter().collect();
    (
        linalg::null_projector(&linalg::vstack(&refs), RTOL_RANK),
        linalg::range_projector(&linalg::hstack(&refs), RTOL_RANK),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubspaceReport {
    pub kind: String,
    pub theory_rank: usize,
    pub ranks: Vec<usize>,
    pub common_rank: Option<usize>,
    /// Worst `|P_theory - P_sample|` over samples, for kernels and ranges.
    pub null_deviation: f64,
    pub range_deviation: f64,
    /// Worst `|P_R(F*) - P_R(F)|`: values are EP matrices.
    pub ep_deviation: f64,
    pub passed: bool,
}

pub fn kernel_range_report(repr: &Repr) -> Result<SubspaceReport> {
    let (pn, pr) = common_null_and_range(&structure_params(repr)?);
    let q = repr.q();
    let theory_rank = q - (linalg::frobenius(&pn).powi(2).round() as usize).min(q);
    let mut ranks = Vec::new();
    let (mut dn, mut dr, mut dep) = (0f64, 0f64, 0f64);
    for z in repr_points(repr) {
        let v = repr.eval(z)?;
        ranks.push(linalg::rank(&v, RTOL_RANK));
        let n = linalg::null_projector(&v, RTOL_RANK);
        let r = linalg::range_projector(&v, RTOL_RANK);
        let r_adj = linalg::range_projector(&v.adjoint(), RTOL_RANK);
        dn = dn.max(linalg::opnorm(&(&n - &pn)));
        dr = dr.max(linalg::opnorm(&(&r - &pr)));
        dep = dep.max(linalg::opnorm(&(&r_adj - &r)));
    }
    let common_rank = ranks.iter().all(|&r| r == ranks[0]).then_some(ranks[0]);
    let passed = dn <= PROJ_TOL && dr <= PROJ_TOL && dep <= PROJ_TOL && common_rank == Some(theory_rank);
    Ok(SubspaceReport {
        kind: repr.kind().to_string(),
        theory_rank,
        ranks,
        common_rank,
        null_deviation: dn,
        range_deviation: dr,
        ep_deviation: dep,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub ranks: Vec<usize>,
    pub zero_everywhere: bool,
}

/// Numerical rank of `F(z)` at every sample; `RankInstability` if they differ.
pub fn rank_constancy(f: &Evaluator, samples: &[C64]) -> Result<RankReport> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("rank constancy needs at least two samples".into()));
    }
    let ranks = samples.iter().map(|&z| Ok(linalg::rank(&f.eval(z)?, RTOL_RANK))).collect::<Result<Vec<_>>>()?;
    if ranks.iter().any(|&r| r != ranks[0]) {
        return Err(Error::RankInstability { ranks });
    }
    Ok(RankReport { rank: ranks[0], zero_everywhere: ranks[0] == 0, ranks })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenReport {
    pub lambda: f64,
    pub dimension: usize,
    /// Worst pairwise distance between sampled eigenspace projectors.
    pub pairwise_deviation: f64,
    /// Worst distance to the eigenspace predicted from the parameters.
    pub theory_deviation: f64,
    pub passed: bool,
}

fn shifted_psd(m: &CMat, shift: f64) -> CMat {
    m + linalg::identity(m.nrows()).scale(shift)
}

/// The constant part whose eigenspace persists, with `F(z) - lambda I` having
/// kernel `N(constant) ∩ N(rest)`. Fails if the precondition is unmet.
fn eigen_precondition(repr: &Repr, lambda: f64) -> Result<Vec<CMat>> {
    let q = repr.q();
    let mass = repr.measure().total_mass().into_mat();
    let check = |what: &str, m: CMat| -> Result<CMat> {
        let lmin = linalg::lambda_min(&m);
        if lmin < -PSD_RTOL * (1.0 + linalg::opnorm(&m)) {
            return Err(Error::PreconditionUnmet(format!("{what} is not PSD (lambda_min {lmin:.3e})")));
        }
        Ok(m)
    };
    Ok(match repr {
        Repr::Pair(p) => vec![check("gamma - lambda I", shifted_psd(p.gamma().mat(), -lambda))?, mass],
        Repr::Kk(k) => vec![check("C - lambda I", shifted_psd(k.c().mat(), -lambda))?, mass],
        Repr::S0(_) => vec![check("-lambda I", shifted_psd(&linalg::zeros(q), -lambda))?, mass],
        Repr::SInf(s) => {
            vec![check("D + lambda I", shifted_psd(s.d().mat(), lambda))?, s.e().mat().clone(), mass]
        }
        Repr::TPair(p) => vec![check("gamma + lambda I", shifted_psd(p.gamma().mat(), lambda))?, mass],
        Repr::T0(_) => vec![check("lambda I", shifted_psd(&linalg::zeros(q), lambda))?, mass],
        Repr::TInf(s) => {
            vec![check("D - lambda I", shifted_psd(s.d().mat(), -lambda))?, s.e().mat().clone(), mass]
        }
        Repr::Nevanlinna(_) => return Err(Error::UnsupportedKind(repr.kind().to_string())),
    })
}

pub fn eigen_invariance(repr: &Repr, lambda: f64) -> Result<EigenReport> {
    let (theory, _) = common_null_and_range(&eigen_precondition(repr, lambda)?);
    let q = repr.q();
    let shift = linalg::identity(q).scale(lambda);
    let projs = repr_points(repr)
        .into_iter()
        .map(|z| Ok(linalg::null_projector(&(repr.eval(z)? - &shift), RTOL_RANK)))
        .collect::<Result<Vec<_>>>()?;
    let mut pairwise = 0f64;
    for (k, a) in projs.iter().enumerate() {
        for b in &projs[k + 1..] {
            pairwise = pairwise.max(linalg::opnorm(&(a - b)));
        }
    }
    let theory_deviation = projs.iter().map(|p| linalg::opnorm(&(p - &theory))).fold(0.0, f64::max);
    let dimension = linalg::frobenius(&projs[0]).powi(2).round() as usize;
    Ok(EigenReport {
        lambda,
        dimension,
        pairwise_deviation: pairwise,
        theory_deviation,
        passed: pairwise <= PROJ_TOL && theory_deviation <= PROJ_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullDominationReport {
    /// `(label, holds)` for each of the eight equivalent statements.
    pub conditions: Vec<(String, bool)>,
    pub holds: bool,
}

/// Checks the equivalent forms of `N(A) ⊆ N(F)` for a pair `F` and a `p x q` matrix `A`.
/// All statements must agree; disagreement is a tolerance breach.
pub fn null_domination(pair: &StieltjesPair, a: &CMat) -> Result<NullDominationReport> {
    let q = pair.q();
    if a.ncols() != q {
        return Err(Error::DimensionMismatch {
            expected: format!("{q} columns"),
            found: format!("{} columns", a.ncols()),
        });
    }
    let ap = transforms::pinv(a, transforms::default_rtol(a.nrows().max(q)));
    let p = &ap.pinv * a;
    let n = linalg::identity(q) - &p;
    let small = |m: &CMat, scale: f64| linalg::opnorm(m) <= PROJ_TOL * (1.0 + scale);

    let pts = structure_points(pair.alpha(), false);
    let vals = pts.iter().map(|&z| pair.eval(z)).collect::<Result<Vec<_>>>()?;
    let gamma = pair.gamma().mat();
    let mass = pair.mu().total_mass().into_mat();

    let right_kernel = |f: &CMat| small(&(f * &n), linalg::opnorm(f));
    let left_range = |f: &CMat| small(&(&n * f), linalg::opnorm(f));
    let fix_right = |f: &CMat| small(&(f * &p - f), linalg::opnorm(f));
    let fix_left = |f: &CMat| small(&(&p * f - f), linalg::opnorm(f));

    let conditions = vec![
        ("i: N(A) in N(F(z)) for all z".to_string(), vals.iter().all(right_kernel)),
        ("i1: N(A) in N(F(z0))".to_string(), right_kernel(&vals[0])),
        ("ii: N(A) in N(gamma) and N(mu)".to_string(), right_kernel(gamma) && right_kernel(&mass)),
        ("iii: F A+ A = F".to_string(), vals.iter().all(fix_right)),
        ("iv: R(F(z)) in N(A)^perp for all z".to_string(), vals.iter().all(left_range)),
        ("iv1: R(F(z0)) in N(A)^perp".to_string(), left_range(&vals[0])),
        ("v: R(gamma) + R(mu) in N(A)^perp".to_string(), left_range(gamma) && left_range(&mass)),
        ("vi: A+ A F = F".to_string(), vals.iter().all(fix_left)),
    ];
    let holds = conditions[0].1;
    if conditions.iter().any(|c| c.1 != holds) {
        let detail: Vec<String> = conditions.iter().map(|(l, b)| format!("{l}={b}")).collect();
        return Err(Error::InconsistentEquivalence(detail.join(", ")));
    }
    Ok(NullDominationReport { conditions, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub points: Vec<f64>,
    /// Sign condition at the end of the chain nearest zero, as an unscaled minimum eigenvalue.
    pub anchor_margin: f64,
    /// Smallest eigenvalue among successive differences `F(x_{k+1}) - F(x_k)`.
    pub step_margin: f64,
    pub passed: bool,
}

/// Eight ordered real points on the holomorphic side, `0.01` to `100` away from the endpoint.
pub fn chain_points(endpoint: f64, t_side: bool) -> Vec<f64> {
    let d: Vec<f64> = (0..8).map(|k| 10f64.powf(2.0 - 4.0 * k as f64 / 7.0)).collect();
    if t_side {
        d.iter().rev().map(|x| endpoint + x).collect()
    } else {
        d.iter().map(|x| endpoint - x).collect()
    }
}

/// Monotonicity of `F` along the real gap: values increase with `x`, with the
/// sign anchor set by the class (`S`: `0 <= F(x1)`; `Sinf`: `F(x8) <= 0`;
/// `T`: `G(x8) <= 0`; `Tinf`: `0 <= G(x1)`).
pub fn monotonicity_chain(f: &Evaluator, endpoint: f64, kind: ClassKind) -> Result<ChainReport> {
    let t_side = kind.is_t_side();
    let xs = chain_points(endpoint, t_side);
    let vals = xs.iter().map(|&x| Ok(linalg::re_part(&f.eval(C64::new(x, 0.0))?))).collect::<Result<Vec<_>>>()?;
    let anchor_margin = match kind {
        ClassKind::S | ClassKind::S0 | ClassKind::Sdot | ClassKind::SViaPair => linalg::lambda_min(&vals[0]),
        ClassKind::Sinf | ClassKind::T | ClassKind::T0 | ClassKind::Tdot | ClassKind::TViaPair => {
            linalg::lambda_min(&-&vals[7])
        }
        ClassKind::Tinf => linalg::lambda_min(&vals[0]),
    };
    let step_margin = vals.windows(2).map(|w| linalg::lambda_min(&(&w[1] - &w[0]))).fold(f64::INFINITY, f64::min);
    Ok(ChainReport {
        points: xs,
        anchor_margin,
        step_margin,
        passed: anchor_margin >= -MONO_TOL && step_margin >= -MONO_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, real_diag};
    use crate::matmeasure::{MatrixMeasure, PsdMatrix, SupportSet};

    fn psd(d: &[f64]) -> PsdMatrix {
        PsdMatrix::new(real_diag(d)).unwrap()
    }

    /// `A + B/(alpha - z)`
    fn e1256(alpha: f64, a: &[f64], b: &[f64]) -> Repr {
        let mu = MatrixMeasure::dirac(alpha, psd(b), SupportSet::right_ray(alpha)).unwrap();
        Repr::Pair(StieltjesPair::new(alpha, psd(a), mu).unwrap())
    }

    #[test]
    fn grid_is_deterministic_and_on_the_right_side() {
        let g = GridConfig::default();
        let a = grid_points(&g, 1.0, false);
        assert_eq!(a.len(), 160);
        assert_eq!(
            a.iter().map(|p| p.z).collect::<Vec<_>>(),
            grid_points(&g, 1.0, false).iter().map(|p| p.z).collect::<Vec<_>>()
        );
        assert!(a.iter().filter(|p| p.region == Region::Gap).all(|p| p.z.re < 1.0 && p.z.im == 0.0));
        assert!(grid_points(&g, 1.0, true).iter().filter(|p| p.region == Region::Gap).all(|p| p.z.re > 1.0));
        assert!(a.iter().filter(|p| p.region == Region::Lower).all(|p| p.z.im < 0.0));
    }

    #[test]
    fn e1256_is_stieltjes() {
        let r = e1256(0.5, &[1.0, 0.0], &[2.0, 1.0]);
        let c = certify_class(&r.evaluator(), 0.5, ClassKind::S, &GridConfig::default()).unwrap();
        assert!(c.passed(), "{c:?}");
        let c = certify_class(&r.evaluator(), 0.5, ClassKind::SViaPair, &GridConfig::default()).unwrap();
        assert!(c.passed(), "{c:?}");
    }

    #[test]
    fn zero_function_is_in_every_s_subclass() {
        let f = Evaluator::constant(linalg::zeros(2), SupportSet::right_ray(0.0));
        for kind in [ClassKind::S, ClassKind::Sdot, ClassKind::S0, ClassKind::Sinf] {
            let c = certify_class(&f, 0.0, kind, &GridConfig::default()).unwrap();
            assert!(c.passed(), "{kind}: {c:?}");
        }
    }

    #[test]
    fn e0913_is_in_t() {
        // G(z) = -A + B/(beta - z)
        let (a, b, beta) = (real_diag(&[1.0, 0.5]), real_diag(&[0.0, 3.0]), -1.0);
        let f = Evaluator::from_fn(2, SupportSet::left_ray(beta), move |z| Ok(-&a + &b / (C64::new(beta, 0.0) - z)));
        let c = certify_class(&f, beta, ClassKind::T, &GridConfig::default()).unwrap();
        assert!(c.passed(), "{c:?}");
        let s = certify_class(&f, beta, ClassKind::S, &GridConfig::default()).unwrap();
        assert!(!s.passed());
        assert_eq!(s.worst().unwrap().name, "domain");
    }

    #[test]
    fn negative_gamma_eigenvalue_fails_with_witness() {
        let g = real_diag(&[1.0, -0.5]);
        let f = Evaluator::constant(g, SupportSet::right_ray(0.0));
        let c = certify_class(&f, 0.0, ClassKind::S, &GridConfig::default()).unwrap();
        assert!(!c.passed());
        let w = c.condition("gap_psd").unwrap();
        assert!(w.margin < -1e-6);
        assert!(w.witness_z[0] < 0.0);
    }

    #[test]
    fn sequential_and_parallel_certificates_match() {
        let r = e1256(0.0, &[1.0, 2.0], &[1.0, 0.0]);
        let g = GridConfig::default();
        let a = certify_class_with(&r.evaluator(), 0.0, ClassKind::S, &g, Exec::Sequential).unwrap();
        let b = certify_class_with(&r.evaluator(), 0.0, ClassKind::S, &g, Exec::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kernel_range_examples() {
        let r = e1256(0.0, &[1.0, 0.0], &[0.0, 0.0]);
        let rep = kernel_range_report(&r).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.common_rank, Some(1));

        let z = e1256(0.0, &[0.0, 0.0], &[0.0, 0.0]);
        let rep = kernel_range_report(&z).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.common_rank, Some(0));

        let mu = MatrixMeasure::dirac(1.0, psd(&[1.0, 0.0]), SupportSet::right_ray(0.0)).unwrap();
        let p = Repr::Pair(StieltjesPair::new(0.0, psd(&[0.0, 0.0]), mu).unwrap());
        let rep = kernel_range_report(&p).unwrap();
        assert!(rep.passed);
        let v = p.eval(C64::new(-1.0, 1.0)).unwrap();
        let pr = linalg::range_projector(&v, RTOL_RANK);
        assert!((pr - real_diag(&[1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn rank_constancy_examples() {
        let pts = structure_points(0.0, false);
        let r = e1256(0.0, &[1.0, 0.0], &[0.0, 0.0]);
        assert_eq!(rank_constancy(&r.evaluator(), &pts).unwrap().rank, 1);
        let z = Evaluator::constant(linalg::zeros(3), SupportSet::right_ray(0.0));
        assert!(rank_constancy(&z, &pts).unwrap().zero_everywhere);
        let i = Evaluator::constant(identity(3), SupportSet::right_ray(0.0));
        assert_eq!(rank_constancy(&i, &pts).unwrap().rank, 3);
        // A function outside every class with a rank drop at z = 1 + i.
        let bad = Evaluator::from_fn(1, SupportSet::right_ray(10.0), |z| {
            Ok(CMat::from_element(1, 1, z - C64::new(1.0, 1.0)))
        });
        let pts = [C64::new(1.0, 1.0), C64::new(0.0, 1.0)];
        assert!(matches!(rank_constancy(&bad, &pts), Err(Error::RankInstability { .. })));
    }

    #[test]
    fn eigen_invariance_examples() {
        let r = e1256(0.0, &[2.0, 1.0], &[0.0, 0.0]);
        let rep = eigen_invariance(&r, 1.0).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.dimension, 1);
        assert!(matches!(eigen_invariance(&r, 3.0), Err(Error::PreconditionUnmet(_))));
        let r = e1256(0.0, &[2.0, 0.0], &[1.0, 0.0]);
        assert!(eigen_invariance(&r, 0.0).unwrap().passed);
    }

    #[test]
    fn null_domination_examples() {
        let alpha = 0.0;
        let mu = MatrixMeasure::zero(2, SupportSet::right_ray(alpha));
        let pair = StieltjesPair::new(alpha, psd(&[1.0, 0.0]), mu).unwrap();
        assert!(null_domination(&pair, pair.gamma().mat()).unwrap().holds);
        assert!(null_domination(&pair, &identity(2)).unwrap().holds);
        assert!(!null_domination(&pair, &CMat::zeros(3, 2)).unwrap().holds);
        let zero =
            StieltjesPair::new(alpha, psd(&[0.0, 0.0]), MatrixMeasure::zero(2, SupportSet::right_ray(0.0))).unwrap();
        assert!(null_domination(&zero, &CMat::zeros(3, 2)).unwrap().holds);
    }

    #[test]
    fn monotone_chain_for_stieltjes() {
        let r = e1256(0.0, &[1.0, 0.0], &[1.0, 2.0]);
        let rep = monotonicity_chain(&r.evaluator(), 0.0, ClassKind::S).unwrap();
        assert!(rep.passed, "{rep:?}");
        let dec = Evaluator::constant(linalg::zeros(1), SupportSet::right_ray(0.0));
        assert!(monotonicity_chain(&dec, 0.0, ClassKind::Sinf).unwrap().passed);
    }
}
