//! Finite atomic nonnegative Hermitian matrix measures.
//!
//! Every measure in this crate is a finite sum of Dirac masses with PSD matrix
//! weights. Absolutely continuous parts enter through [`quadrature_ingest`].
//! Measures are kept canonical: nodes strictly increasing, nodes closer than
//! `1e-12 * (1 + |t|)` merged, zero weights dropped.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, C64};

pub const HERM_RTOL: f64 = 1e-10;
pub const PSD_RTOL: f64 = 1e-10;
pub const MERGE_RTOL: f64 = 1e-12;

fn merge_tol(t: f64) -> f64 {
    MERGE_RTOL * (1.0 + t.abs())
}

fn check_square(m: &CMat) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            expected: "non-empty square matrix".into(),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(m.nrows())
}

/// A Hermitian matrix, stored exactly symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix(CMat);

impl HermMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        check_square(&m)?;
        if !linalg::is_finite(&m) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let asym = linalg::opnorm(&(&m - m.adjoint()));
        let tol = HERM_RTOL * (1.0 + linalg::opnorm(&m));
        if asym > tol {
            return Err(Error::NotHermitian { asymmetry: asym, tol });
        }
        Ok(HermMatrix(linalg::re_part(&m)))
    }

    pub fn zero(q: usize) -> Self {
        HermMatrix(linalg::zeros(q))
    }

    pub fn q(&self) -> usize {
        self.0.nrows()
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::herm_eigenvalues(&self.0)
    }

    pub fn is_psd(&self) -> bool {
        let ev = self.eigenvalues();
        let norm = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        ev.first().is_none_or(|&l| l >= -PSD_RTOL * (1.0 + norm))
    }

    pub fn transpose(&self) -> Self {
        HermMatrix(self.0.transpose())
    }
}

/// A positive semidefinite Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMatrix(HermMatrix);

impl PsdMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        Self::from_herm(HermMatrix::new(m)?)
    }

    pub fn from_herm(h: HermMatrix) -> Result<Self> {
        let ev = h.eigenvalues();
        let norm = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let tol = PSD_RTOL * (1.0 + norm);
        match ev.first() {
            Some(&l) if l < -tol => Err(Error::NotPsd { lambda_min: l, tol }),
            _ => Ok(PsdMatrix(h)),
        }
    }

    pub fn zero(q: usize) -> Self {
        PsdMatrix(HermMatrix::zero(q))
    }

    pub fn identity(q: usize) -> Self {
        PsdMatrix(HermMatrix(linalg::identity(q)))
    }

    pub fn q(&self) -> usize {
        self.0.q()
    }

    pub fn mat(&self) -> &CMat {
        self.0.mat()
    }

    pub fn herm(&self) -> &HermMatrix {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0.into_mat()
    }

    pub fn is_zero(&self) -> bool {
        self.mat().iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn transpose(&self) -> Self {
        PsdMatrix(self.0.transpose())
    }

    // Sum of two PSD matrices; exact Hermitian symmetry is preserved by addition.
    fn add(&self, other: &PsdMatrix) -> PsdMatrix {
        PsdMatrix(HermMatrix(self.mat() + other.mat()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportKind {
    RightRay,
    OpenRightRay,
    LeftRay,
    OpenLeftRay,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportSet {
    pub kind: SupportKind,
    pub endpoint: f64,
}

impl SupportSet {
    pub fn right_ray(alpha: f64) -> Self {
        SupportSet { kind: SupportKind::RightRay, endpoint: alpha }
    }
    pub fn open_right_ray(alpha: f64) -> Self {
        SupportSet { kind: SupportKind::OpenRightRay, endpoint: alpha }
    }
    pub fn left_ray(beta: f64) -> Self {
        SupportSet { kind: SupportKind::LeftRay, endpoint: beta }
    }
    pub fn open_left_ray(beta: f64) -> Self {
        SupportSet { kind: SupportKind::OpenLeftRay, endpoint: beta }
    }
    pub fn line() -> Self {
        SupportSet { kind: SupportKind::Line, endpoint: 0.0 }
    }

    pub fn contains(&self, t: f64) -> bool {
        if !t.is_finite() {
            return false;
        }
        let e = self.endpoint;
        match self.kind {
            SupportKind::RightRay => t >= e,
            SupportKind::OpenRightRay => t > e,
            SupportKind::LeftRay => t <= e,
            SupportKind::OpenLeftRay => t < e,
            SupportKind::Line => true,
        }
    }

    /// Euclidean distance from `z` to the closure of the set.
    pub fn distance(&self, z: C64) -> f64 {
        let e = self.endpoint;
        match self.kind {
            SupportKind::RightRay | SupportKind::OpenRightRay => {
                if z.re >= e {
                    z.im.abs()
                } else {
                    (e - z.re).hypot(z.im)
                }
            }
            SupportKind::LeftRay | SupportKind::OpenLeftRay => {
                if z.re <= e {
                    z.im.abs()
                } else {
                    (z.re - e).hypot(z.im)
                }
            }
            SupportKind::Line => z.im.abs(),
        }
    }

    /// Image of the set under `t -> a*t + b`.
    pub fn image(&self, a: f64, b: f64) -> Self {
        use SupportKind::*;
        let endpoint = if self.kind == Line { 0.0 } else { a * self.endpoint + b };
        let kind = if a > 0.0 {
            self.kind
        } else {
            match self.kind {
                RightRay => LeftRay,
                OpenRightRay => OpenLeftRay,
                LeftRay => RightRay,
                OpenLeftRay => OpenRightRay,
                Line => Line,
            }
        };
        SupportSet { kind, endpoint }
    }

    pub fn is_right(&self) -> bool {
        matches!(self.kind, SupportKind::RightRay | SupportKind::OpenRightRay)
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = self.endpoint;
        match self.kind {
            SupportKind::RightRay => write!(f, "[{e}, +inf)"),
            SupportKind::OpenRightRay => write!(f, "({e}, +inf)"),
            SupportKind::LeftRay => write!(f, "(-inf, {e}]"),
            SupportKind::OpenLeftRay => write!(f, "(-inf, {e})"),
            SupportKind::Line => write!(f, "(-inf, +inf)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub t: f64,
    pub w: PsdMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMeasure {
    q: usize,
    support: SupportSet,
    atoms: Vec<Atom>,
}

impl MatrixMeasure {
    /// Build from raw `(node, weight)` pairs, validating and canonicalizing.
    pub fn new(q: usize, support: SupportSet, atoms: Vec<(f64, CMat)>) -> Result<Self> {
        let atoms = atoms
            .into_iter()
            .map(|(t, w)| {
                if w.nrows() != q || w.ncols() != q {
                    return Err(Error::DimensionMismatch {
                        expected: format!("{q}x{q}"),
                        found: format!("{}x{}", w.nrows(), w.ncols()),
                    });
                }
                Ok(Atom { t, w: PsdMatrix::new(w)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(q, support, atoms)
    }

    pub fn from_atoms(q: usize, support: SupportSet, atoms: Vec<Atom>) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("dimension q must be positive".into()));
        }
        for a in &atoms {
            if a.w.q() != q {
                return Err(Error::DimensionMismatch {
                    expected: format!("{q}x{q}"),
                    found: format!("{0}x{0}", a.w.q()),
                });
            }
            if !support.contains(a.t) {
                return Err(Error::OutOfSupport { t: a.t, support: support.to_string() });
            }
        }
        Ok(MatrixMeasure { q, support, atoms }.canonicalize())
    }

    pub fn zero(q: usize, support: SupportSet) -> Self {
        MatrixMeasure { q, support, atoms: Vec::new() }
    }

    pub fn dirac(t: f64, w: PsdMatrix, support: SupportSet) -> Result<Self> {
        Self::from_atoms(w.q(), support, vec![Atom { t, w }])
    }

    /// Sort nodes, merge near-coincident ones by weight addition, drop zero weights.
    pub fn canonicalize(self) -> Self {
        let MatrixMeasure { q, support, mut atoms } = self;
        atoms.sort_by(|a, b| a.t.total_cmp(&b.t));
        let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match out.last_mut() {
                Some(last) if (a.t - last.t).abs() < merge_tol(last.t) => {
                    last.w = last.w.add(&a.w);
                }
                _ => out.push(a),
            }
        }
        out.retain(|a| !a.w.is_zero());
        MatrixMeasure { q, support, atoms: out }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn support(&self) -> SupportSet {
        self.support
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> PsdMatrix {
        let mut acc = linalg::zeros(self.q);
        for a in &self.atoms {
            acc += a.w.mat();
        }
        PsdMatrix(HermMatrix(acc))
    }

    /// `sum_k f(t_k) W_k`.
    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> Result<CMat> {
        let mut acc = linalg::zeros(self.q);
        for a in &self.atoms {
            let v = f(a.t);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteKernel { t: a.t });
            }
            acc += a.w.mat() * v;
        }
        Ok(acc)
    }

    /// Pushforward under `t -> a*t + b`.
    pub fn image_measure(&self, a: f64, b: f64) -> Result<Self> {
        if a == 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::DegenerateMap);
        }
        let support = self.support.image(a, b);
        let atoms = self.atoms.iter().map(|x| Atom { t: a * x.t + b, w: x.w.clone() }).collect();
        Self::from_atoms(self.q, support, atoms)
    }

    /// Power moments `s_j = sum_k t_k^j W_k` for `j = 0..=m`.
    pub fn moments(&self, m: usize) -> Vec<HermMatrix> {
        (0..=m)
            .map(|j| {
                let mut acc = linalg::zeros(self.q);
                for a in &self.atoms {
                    acc += a.w.mat().scale(a.t.powi(j as i32));
                }
                HermMatrix(acc)
            })
            .collect()
    }

    pub fn scalar_projection(&self, u: &DVector<C64>) -> Result<ScalarMeasure> {
        if u.len() != self.q {
            return Err(Error::DimensionMismatch {
                expected: format!("vector of length {}", self.q),
                found: format!("length {}", u.len()),
            });
        }
        if u.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::InvalidInput("projection vector must be nonzero".into()));
        }
        let atoms = self.atoms.iter().map(|a| (a.t, (u.adjoint() * a.w.mat() * u)[(0, 0)].re.max(0.0))).collect();
        Ok(ScalarMeasure { support: self.support, atoms })
    }

    /// Reweight every atom, `W_k -> f(t_k, W_k)`, on a (possibly new) support.
    pub fn map_weights<F>(&self, support: SupportSet, f: F) -> Result<Self>
    where
        F: Fn(f64, &CMat) -> CMat,
    {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok(Atom { t: a.t, w: PsdMatrix::new(f(a.t, a.w.mat()))? }))
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(self.q, support, atoms)
    }

    /// Same atoms on a different support; fails if a node falls outside it.
    pub fn with_support(&self, support: SupportSet) -> Result<Self> {
        Self::from_atoms(self.q, support, self.atoms.clone())
    }

    /// Keep the atoms whose node satisfies `keep`, on the given support.
    pub fn restrict<P: Fn(f64) -> bool>(&self, support: SupportSet, keep: P) -> Result<Self> {
        let atoms = self.atoms.iter().filter(|a| keep(a.t)).cloned().collect();
        Self::from_atoms(self.q, support, atoms)
    }

    pub fn atom_at(&self, t0: f64) -> Option<&Atom> {
        self.atoms.iter().find(|a| (a.t - t0).abs() <= merge_tol(t0))
    }

    pub fn transpose(&self) -> Self {
        let atoms = self.atoms.iter().map(|a| Atom { t: a.t, w: a.w.transpose() }).collect();
        MatrixMeasure { q: self.q, support: self.support, atoms }
    }

    pub fn node_range(&self) -> Option<(f64, f64)> {
        Some((self.atoms.first()?.t, self.atoms.last()?.t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMeasure {
    pub support: SupportSet,
    pub atoms: Vec<(f64, f64)>,
}

impl ScalarMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        self.atoms.iter().map(|&(t, w)| f(t) * w).sum()
    }
}

/// Block Hankel matrix `[s_{j+k}]_{j,k=0}^{n}` with `n = floor(m/2)`.
pub fn block_hankel(moments: &[HermMatrix]) -> CMat {
    let Some(first) = moments.first() else {
        return CMat::zeros(0, 0);
    };
    let q = first.q();
    let n = (moments.len() - 1) / 2;
    let mut h = CMat::zeros((n + 1) * q, (n + 1) * q);
    for j in 0..=n {
        for k in 0..=n {
            h.view_mut((j * q, k * q), (q, q)).copy_from(moments[j + k].mat());
        }
    }
    h
}

/// Scaled smallest eigenvalue of the block Hankel matrix; nonnegative up to
/// rounding for every moment sequence of a nonnegative measure on R.
pub fn hankel_psd_margin(moments: &[HermMatrix]) -> f64 {
    let h = block_hankel(moments);
    if h.is_empty() {
        return 0.0;
    }
    let ev = linalg::herm_eigenvalues(&h);
    let norm = ev.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    ev[0] / (1.0 + norm)
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Discretize `density(t) dt` on `[a, b]` with an `n`-point Gauss-Legendre rule.
pub fn quadrature_ingest<D>(density: D, a: f64, b: f64, n: usize, support: SupportSet) -> Result<MatrixMeasure>
where
    D: Fn(f64) -> CMat,
{
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN bounds too
    if !(a < b) || n == 0 {
        return Err(Error::InvalidInput(format!("need a < b and n >= 1, got [{a}, {b}], n = {n}")));
    }
    if !support.contains(a) || !support.contains(b) {
        return Err(Error::OutOfSupport { t: if support.contains(a) { b } else { a }, support: support.to_string() });
    }
    let (x, w) = gauss_legendre(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut q = None;
    let mut atoms = Vec::with_capacity(n);
    for (xi, wi) in x.into_iter().zip(w) {
        let t = mid + half * xi;
        let d = density(t);
        let qd = check_square(&d)?;
        if *q.get_or_insert(qd) != qd {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{0}", q.unwrap()),
                found: format!("{qd}x{qd}"),
            });
        }
        let h = HermMatrix::new(d)?;
        let ev = h.eigenvalues();
        let norm = ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if ev[0] < -PSD_RTOL * (1.0 + norm) {
            return Err(Error::NonPsdDensity { t, lambda_min: ev[0] });
        }
        let d = if ev[0] < 0.0 { linalg::psd_project(h.mat()) } else { h.into_mat() };
        atoms.push(Atom { t, w: PsdMatrix(HermMatrix(d.scale(wi * half))) });
    }
    MatrixMeasure::from_atoms(q.unwrap_or(1), support, atoms)
}
