//! Seeded random instances for tests, benches and the acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{self, CMat, C64};
use crate::matmeasure::{Atom, MatrixMeasure, PsdMatrix, SupportSet};
use crate::stieltjes_repr::{
    self, Evaluator, Repr, ReprKind, S0Measure, SInfTriple, StieltjesPair, T0Measure, TInfTriple, TPair,
};

/// Shape and flavor of generated instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub q_max: usize,
    pub atoms_max: usize,
    /// All parameters share a random subspace of dimension below `q`, so
    /// `F(z)` has a nontrivial common kernel.
    pub deficient: bool,
    /// Endpoints, nodes and matrix entries are small dyadic rationals, so
    /// reflections and sums are exact in floating point.
    pub dyadic: bool,
}

impl Default for Profile {
    fn default() -> Self {
        Profile { q_max: 3, atoms_max: 6, deficient: false, dyadic: false }
    }
}

impl Profile {
    pub fn deficient() -> Self {
        Profile { deficient: true, ..Self::default() }
    }

    pub fn dyadic() -> Self {
        Profile { dyadic: true, ..Self::default() }
    }
}

pub struct Corpus {
    rng: ChaCha8Rng,
    profile: Profile,
}

/// Parameters drawn for one instance: dimension and the column space all matrices live in.
struct Frame {
    q: usize,
    basis: CMat,
}

impl Corpus {
    pub fn new(seed: u64, profile: Profile) -> Self {
        Corpus { rng: ChaCha8Rng::seed_from_u64(seed), profile }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn uniform(&mut self, a: f64, b: f64) -> f64 {
        self.rng.random_range(a..b)
    }

    fn dyadic_entry(&mut self) -> f64 {
        self.rng.random_range(-8i32..=8) as f64 / 8.0
    }

    pub fn complex_matrix(&mut self, r: usize, c: usize) -> CMat {
        let dyadic = self.profile.dyadic;
        CMat::from_fn(r, c, |_, _| {
            if dyadic {
                C64::new(self.dyadic_entry(), self.dyadic_entry())
            } else {
                C64::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0))
            }
        })
    }

    /// `B B*` with `B` of size `q x r`; full-rank draws get a small identity
    /// shift to stay well conditioned.
    pub fn psd(&mut self, q: usize, r: usize) -> PsdMatrix {
        let b = self.complex_matrix(q, r);
        let mut m = &b * b.adjoint();
        if r >= q && !self.profile.dyadic {
            m += linalg::identity(q).scale(0.1);
        }
        PsdMatrix::new(linalg::re_part(&m)).expect("B B* is PSD")
    }

    fn frame(&mut self) -> Frame {
        let q = self.rng.random_range(1..=self.profile.q_max);
        let r = if self.profile.deficient && q > 1 { self.rng.random_range(1..q) } else { q };
        let basis = if r == q { linalg::identity(q) } else { self.complex_matrix(q, r) };
        Frame { q, basis }
    }

    /// PSD matrix with range inside the frame's column space; `allow_zero` may return 0.
    fn framed_psd(&mut self, f: &Frame, allow_zero: bool) -> PsdMatrix {
        if allow_zero && self.rng.random_bool(0.15) {
            return PsdMatrix::zero(f.q);
        }
        let r = f.basis.ncols();
        let inner_rank = if self.profile.deficient { self.rng.random_range(1..=r) } else { r };
        let m = self.psd(r, inner_rank);
        if r == f.q {
            return m;
        }
        PsdMatrix::new(linalg::re_part(&(&f.basis * m.mat() * f.basis.adjoint()))).expect("congruence of PSD")
    }

    fn node_offset(&mut self) -> f64 {
        if self.profile.dyadic {
            self.rng.random_range(1..=96) as f64 / 8.0
        } else {
            10f64.powf(self.rng.random_range(-1.5..1.3))
        }
    }

    fn endpoint(&mut self) -> f64 {
        if self.profile.dyadic {
            self.rng.random_range(-12i32..=12) as f64 / 4.0
        } else {
            self.rng.random_range(-3.0..3.0)
        }
    }

    /// Random atomic measure on `support` (a ray), sometimes with an atom at its endpoint.
    fn measure(&mut self, f: &Frame, support: SupportSet) -> MatrixMeasure {
        let n = self.rng.random_range(0..=self.profile.atoms_max);
        let closed = support.contains(support.endpoint);
        let sign = if support.is_right() { 1.0 } else { -1.0 };
        let mut atoms = Vec::with_capacity(n + 1);
        for _ in 0..n {
            let t = support.endpoint + sign * self.node_offset();
            atoms.push(Atom { t, w: self.framed_psd(f, false) });
        }
        if closed && self.rng.random_bool(0.3) {
            atoms.push(Atom { t: support.endpoint, w: self.framed_psd(f, false) });
        }
        MatrixMeasure::from_atoms(f.q, support, atoms).expect("nodes lie in the support")
    }

    pub fn pair(&mut self) -> StieltjesPair {
        let f = self.frame();
        let a = self.endpoint();
        let gamma = self.framed_psd(&f, true);
        let mu = self.measure(&f, SupportSet::right_ray(a));
        StieltjesPair::new(a, gamma, mu).expect("valid pair")
    }

    pub fn s0(&mut self) -> S0Measure {
        let f = self.frame();
        let a = self.endpoint();
        let sigma = self.measure(&f, SupportSet::right_ray(a));
        S0Measure::new(a, sigma).expect("valid S0 measure")
    }

    /// S0 measure with at least one atom.
    pub fn s0_nonzero(&mut self) -> S0Measure {
        loop {
            let s = self.s0();
            if !s.sigma().is_zero() {
                return s;
            }
        }
    }

    pub fn sinf(&mut self) -> SInfTriple {
        let f = self.frame();
        let a = self.endpoint();
        let d = self.framed_psd(&f, true);
        let e = self.framed_psd(&f, true);
        let rho = self.measure(&f, SupportSet::open_right_ray(a));
        SInfTriple::new(a, d, e, rho).expect("valid S-infinity triple")
    }

    pub fn tpair(&mut self) -> TPair {
        let f = self.frame();
        let b = self.endpoint();
        let gamma = self.framed_psd(&f, true);
        let mu = self.measure(&f, SupportSet::left_ray(b));
        TPair::new(b, gamma, mu).expect("valid T pair")
    }

    pub fn t0(&mut self) -> T0Measure {
        let f = self.frame();
        let b = self.endpoint();
        let sigma = self.measure(&f, SupportSet::left_ray(b));
        T0Measure::new(b, sigma).expect("valid T0 measure")
    }

    pub fn tinf(&mut self) -> TInfTriple {
        let f = self.frame();
        let b = self.endpoint();
        let d = self.framed_psd(&f, true);
        let e = self.framed_psd(&f, true);
        let rho = self.measure(&f, SupportSet::open_left_ray(b));
        TInfTriple::new(b, d, e, rho).expect("valid T-infinity triple")
    }

    /// A random instance of any kind; KK and Nevanlinna forms are converted from pairs.
    pub fn repr(&mut self, kind: ReprKind) -> Repr {
        match kind {
            ReprKind::StieltjesPair => Repr::Pair(self.pair()),
            ReprKind::KkPair => Repr::Kk(stieltjes_repr::pair_to_kk(&self.pair()).expect("pair converts")),
            ReprKind::Nevanlinna => {
                let kk = stieltjes_repr::pair_to_kk(&self.pair()).expect("pair converts");
                Repr::Nevanlinna(stieltjes_repr::kk_to_nevanlinna(&kk).expect("kk converts"))
            }
            ReprKind::S0 => Repr::S0(self.s0()),
            ReprKind::SinfTriple => Repr::SInf(self.sinf()),
            ReprKind::TPair => Repr::TPair(self.tpair()),
            ReprKind::T0 => Repr::T0(self.t0()),
            ReprKind::TinfTriple => Repr::TInf(self.tinf()),
        }
    }

    /// A point off the real axis near the endpoint, away from the ray.
    pub fn sample_z(&mut self, endpoint: f64) -> C64 {
        let re = endpoint + self.uniform(-4.0, 8.0);
        let im = self.uniform(0.1, 10.0) * if self.rng.random_bool(0.5) { 1.0 } else { -1.0 };
        C64::new(re, im)
    }
}

/// `F` of a pair with one atom moved to `t_new` (possibly outside the
/// declared support), wrapped as an evaluator that still claims the
/// original excluded set. Used to build out-of-class controls.
pub fn pair_with_moved_atom(pair: &StieltjesPair, index: usize, t_new: f64) -> Result<Evaluator> {
    let alpha = pair.alpha();
    let gamma = pair.gamma().mat().clone();
    let mut nodes: Vec<(f64, CMat)> = pair.mu().atoms().iter().map(|a| (a.t, a.w.mat().clone())).collect();
    if index >= nodes.len() {
        return Err(crate::error::Error::InvalidInput(format!("no atom {index}")));
    }
    nodes[index].0 = t_new;
    Ok(Evaluator::from_fn(pair.q(), SupportSet::right_ray(alpha), move |z| {
        let mut acc = gamma.clone();
        for (t, w) in &nodes {
            acc += w * (C64::new(1.0 + t - alpha, 0.0) / (C64::new(*t, 0.0) - z));
        }
        Ok(acc)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible() {
        let mut a = Corpus::new(7, Profile::default());
        let mut b = Corpus::new(7, Profile::default());
        for kind in ReprKind::ALL {
            assert_eq!(a.repr(kind), b.repr(kind));
        }
    }

    #[test]
    fn deficient_profile_has_common_kernel() {
        let mut c = Corpus::new(3, Profile { q_max: 4, ..Profile::deficient() });
        let mut seen = false;
        for _ in 0..20 {
            let p = c.pair();
            if p.q() > 1 {
                let r = linalg::rank(&p.eval(C64::new(-10.0, 1.0)).unwrap(), 1e-9);
                assert!(r < p.q());
                seen = true;
            }
        }
        assert!(seen);
    }

    #[test]
    fn dyadic_profile_is_dyadic() {
        let mut c = Corpus::new(5, Profile::dyadic());
        for _ in 0..10 {
            let p = c.pair();
            assert_eq!((p.alpha() * 4.0).fract(), 0.0);
            for a in p.mu().atoms() {
                assert_eq!((a.t * 8.0).fract(), 0.0);
            }
        }
    }
}
