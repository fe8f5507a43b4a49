//! Small dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn zeros(q: usize) -> CMat {
    CMat::zeros(q, q)
}

pub fn identity(q: usize) -> CMat {
    CMat::identity(q, q)
}

pub fn real_diag(d: &[f64]) -> CMat {
    let mut m = zeros(d.len());
    for (k, &x) in d.iter().enumerate() {
        m[(k, k)] = C64::new(x, 0.0);
    }
    m
}

/// `Re A = (A + A*)/2`.
pub fn re_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// `Im A = (A - A*)/(2i)`.
pub fn im_part(m: &CMat) -> CMat {
    (m - m.adjoint()) * C64::new(0.0, -0.5)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    svd(m).s
}

/// Spectral norm.
pub fn opnorm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Eigen-decomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = re_part(m);
    let eig = SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMat::from_fn(m.nrows(), idx.len(), |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut v: Vec<f64> = SymmetricEigen::new(re_part(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Smallest eigenvalue of the Hermitian part.
pub fn lambda_min(m: &CMat) -> f64 {
    herm_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Clip negative eigenvalues of the Hermitian part to zero.
pub fn psd_project(m: &CMat) -> CMat {
    let (vals, vecs) = herm_eigen(m);
    let d = real_diag(&vals.iter().map(|&x| x.max(0.0)).collect::<Vec<_>>());
    let p = &vecs * d * vecs.adjoint();
    re_part(&p)
}

/// Thin SVD `m = u diag(s) v*` with singular values sorted descending.
/// Columns of `u` belonging to zero singular values are zero.
pub struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD for a matrix with at least as many rows as columns.
fn jacobi_tall(m: &CMat) -> Svd {
    let n = m.ncols();
    let mut a = m.clone();
    let mut v = identity(n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                // [x_p x_q] <- [x_p x_q] [[c, s e^{i phi}], [-s e^{-i phi}, c]]
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let xp = mat[(r, p)];
                        let xq = mat[(r, q)];
                        mat[(r, p)] = xp * c - xq * phase.conj() * sn;
                        mat[(r, q)] = xp * phase * sn + xq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let u = CMat::from_fn(m.nrows(), n, |r, c| {
        let s = norms[idx[c]];
        if s > 0.0 {
            a[(r, idx[c])] / s
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Svd { u, s: idx.iter().map(|&i| norms[i]).collect(), v: CMat::from_fn(n, n, |r, c| v[(r, idx[c])]) }
}

pub fn svd(m: &CMat) -> Svd {
    let (nr, nc) = m.shape();
    if nr.min(nc) == 0 {
        return Svd { u: CMat::zeros(nr, 0), s: Vec::new(), v: CMat::zeros(nc, 0) };
    }
    if nr >= nc {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.adjoint());
        Svd { u: t.v, s: t.s, v: t.u }
    }
}

/// Numerical rank: singular values above `rtol * sigma_1`. The zero matrix has rank 0.
pub fn rank_of(s: &[f64], rtol: f64) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 && s1.is_finite() => s.iter().filter(|&&x| x > rtol * s1).count(),
        _ => 0,
    }
}

pub fn rank(m: &CMat, rtol: f64) -> usize {
    rank_of(&singular_values(m), rtol)
}

/// Orthogonal projector onto the column space of `m`.
pub fn range_projector(m: &CMat, rtol: f64) -> CMat {
    let d = svd(m);
    let r = rank_of(&d.s, rtol);
    let ur = d.u.columns(0, r).into_owned();
    &ur * ur.adjoint()
}

/// Orthogonal projector onto the null space of `m`.
pub fn null_projector(m: &CMat, rtol: f64) -> CMat {
    let d = svd(m);
    let r = rank_of(&d.s, rtol);
    let vr = d.v.columns(0, r).into_owned();
    identity(m.ncols()) - &vr * vr.adjoint()
}

/// Stack matrices with equal column counts vertically.
pub fn vstack(ms: &[&CMat]) -> CMat {
    let nc = ms.first().map_or(0, |m| m.ncols());
    let nr: usize = ms.iter().map(|m| m.nrows()).sum();
    let mut out = CMat::zeros(nr, nc);
    let mut row = 0;
    for m in ms {
        out.view_mut((row, 0), (m.nrows(), nc)).copy_from(*m);
        row += m.nrows();
    }
    out
}

/// Place matrices with equal row counts side by side.
pub fn hstack(ms: &[&CMat]) -> CMat {
    let nr = ms.first().map_or(0, |m| m.nrows());
    let nc: usize = ms.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(nr, nc);
    let mut col = 0;
    for m in ms {
        out.view_mut((0, col), (nr, m.ncols())).copy_from(*m);
        col += m.ncols();
    }
    out
}

pub fn block_diag(ms: &[&CMat]) -> CMat {
    let nr: usize = ms.iter().map(|m| m.nrows()).sum();
    let nc: usize = ms.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(nr, nc);
    let (mut r, mut c) = (0, 0);
    for m in ms {
        out.view_mut((r, c), m.shape()).copy_from(*m);
        r += m.nrows();
        c += m.ncols();
    }
    out
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn to_pairs(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}
