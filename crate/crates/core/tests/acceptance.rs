//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::Instant;

use stieltjes_kit::classifier::{
    self, certify_class, chain_points, grid_points, kernel_range_report, monotonicity_chain, rank_constancy,
    structure_points, ClassKind, GridConfig,
};
use stieltjes_kit::corpus::{self, Corpus, Profile};
use stieltjes_kit::limits::{limit_at_infinity, LimitMode};
use stieltjes_kit::linalg::{self, CMat, C64};
use stieltjes_kit::matmeasure::MatrixMeasure;
use stieltjes_kit::stieltjes_repr::{self as sr, Evaluator, Repr, ReprKind};
use stieltjes_kit::transforms::{self, Direction};

type Check = Result<String, String>;

fn norm(m: &CMat) -> f64 {
    linalg::opnorm(m)
}

/// `|a - b| / (1 + |b|)` in operator norm.
fn rel(a: &CMat, b: &CMat) -> f64 {
    norm(&(a - b)) / (1.0 + norm(b))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> String + '_ {
    move |err| format!("{ctx}: {err}")
}

fn own_class(kind: ReprKind) -> ClassKind {
    match kind {
        ReprKind::StieltjesPair | ReprKind::KkPair | ReprKind::Nevanlinna => ClassKind::S,
        ReprKind::S0 => ClassKind::S0,
        ReprKind::SinfTriple => ClassKind::Sinf,
        ReprKind::TPair => ClassKind::T,
        ReprKind::T0 => ClassKind::T0,
        ReprKind::TinfTriple => ClassKind::Tinf,
    }
}

const SIX: [ReprKind; 6] =
    [ReprKind::StieltjesPair, ReprKind::S0, ReprKind::SinfTriple, ReprKind::TPair, ReprKind::T0, ReprKind::TinfTriple];

fn c1_representations_certify() -> Check {
    let grid = GridConfig::default();
    let mut worst = f64::INFINITY;
    for (k, kind) in SIX.into_iter().enumerate() {
        let mut c = Corpus::new(100 + k as u64, if k % 2 == 0 { Profile::default() } else { Profile::deficient() });
        for n in 0..50 {
            let r = c.repr(kind);
            let cert = certify_class(&r.evaluator(), r.endpoint().unwrap(), own_class(kind), &grid)
                .map_err(e(&format!("{kind} #{n}")))?;
            let w = cert.worst().unwrap();
            worst = worst.min(w.margin);
            ensure(w.margin >= -1e-10, || {
                format!("{kind} #{n}: {} margin {:.3e} at {:?}", w.name, w.margin, w.witness_z)
            })?;
        }
    }
    Ok(format!("300 instances, worst margin {worst:.2e}"))
}

fn c2_parameter_extraction() -> Check {
    let mut c = Corpus::new(200, Profile::default());
    let (mut wg, mut wm, mut wr) = (0f64, 0f64, 0f64);
    for n in 0..20 {
        let p = c.pair();
        let f = Repr::Pair(p.clone()).evaluator();
        let est = limit_at_infinity(&f, LimitMode::PlainIy).map_err(e(&format!("pair #{n}")))?;
        let d = rel(&est.value, p.gamma().mat());
        wg = wg.max(d);
        ensure(d <= 1e-7, || format!("pair #{n}: gamma off by {d:.3e}"))?;
        let rad = limit_at_infinity(&f, LimitMode::radial_default()).map_err(e(&format!("pair #{n} radial")))?;
        let gap = norm(&(&rad.value - &est.value));
        let bound = rad.error_bound + est.error_bound;
        wr = wr.max(gap / bound.max(f64::MIN_POSITIVE));
        ensure(gap <= bound, || format!("pair #{n}: radial vs plain {gap:.3e} > {bound:.3e}"))?;
    }
    for n in 0..20 {
        let s = c.s0();
        let f = Repr::S0(s.clone()).evaluator();
        let est = limit_at_infinity(&f, LimitMode::YScaled).map_err(e(&format!("s0 #{n}")))?;
        let d = rel(&est.value, s.sigma().total_mass().mat());
        wm = wm.max(d);
        ensure(d <= 1e-7, || format!("s0 #{n}: mass off by {d:.3e}"))?;
    }
    Ok(format!("gamma err {wg:.1e}, mass err {wm:.1e}, radial/bound ratio {wr:.2}"))
}

fn c3_closed_forms() -> Check {
    let mut c = Corpus::new(300, Profile::default());
    let mut worst = 0f64;
    for n in 0..100 {
        let p = c.pair();
        let z = c.sample_z(p.alpha());
        let f = p.eval(z).map_err(e("eval"))?;
        let (re, im) = p.im_re_parts(z).map_err(e("closed form"))?;
        let fz = p.eval_mulz(z).map_err(e("eval (z-alpha)F"))?;
        let imz = p.mulz_im_closed(z).map_err(e("closed form (z-alpha)F"))?;
        let d = [
            rel(re.mat(), &linalg::re_part(&f)),
            rel(im.mat(), &linalg::im_part(&f)),
            norm(&(imz.mat() - linalg::im_part(&fz))) / (1.0 + norm(&fz)),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        worst = worst.max(d);
        ensure(d <= 1e-12, || format!("#{n} at {z}: closed form off by {d:.3e}"))?;
    }
    Ok(format!("100 (repr, z), worst {worst:.1e}"))
}

fn c4_structure() -> Check {
    let mut worst = 0f64;
    for (k, kind) in SIX.into_iter().enumerate() {
        let mut c = Corpus::new(400 + k as u64, Profile::deficient());
        let mut d = Corpus::new(410 + k as u64, Profile::default());
        for n in 0..20 {
            let r = if n % 4 == 3 { d.repr(kind) } else { c.repr(kind) };
            let rep = kernel_range_report(&r).map_err(e(&format!("{kind} #{n}")))?;
            worst = worst.max(rep.null_deviation).max(rep.range_deviation).max(rep.ep_deviation);
            ensure(rep.passed, || format!("{kind} #{n}: {rep:?}"))?;
        }
    }
    Ok(format!("120 instances, worst projector gap {worst:.1e}"))
}

fn c5_rank_constancy() -> Check {
    let mut c = Corpus::new(500, Profile::deficient());
    let mut ranks = [0usize; 8];
    for n in 0..100 {
        let r = c.repr(SIX[n % 6]);
        let ex = r.excluded_set();
        let rep = rank_constancy(&r.evaluator(), &structure_points(ex.endpoint, !ex.is_right()))
            .map_err(e(&format!("{} #{n}", r.kind())))?;
        ranks[rep.rank.min(7)] += 1;
    }
    let zero = Evaluator::constant(linalg::zeros(3), stieltjes_kit::matmeasure::SupportSet::right_ray(0.0));
    let z = rank_constancy(&zero, &structure_points(0.0, false)).map_err(e("zero"))?;
    ensure(z.zero_everywhere, || "zero function not rank 0".into())?;
    let mut nz = Corpus::new(501, Profile::default());
    for n in 0..10 {
        let s = nz.s0_nonzero();
        let rep = rank_constancy(&Repr::S0(s.clone()).evaluator(), &structure_points(s.alpha(), false))
            .map_err(e(&format!("nonzero #{n}")))?;
        ensure(rep.rank > 0 && !rep.zero_everywhere, || format!("nonzero #{n} vanishes somewhere"))?;
    }
    Ok(format!("100 instances, rank histogram {ranks:?}; zero-iff-zero on 11 functions"))
}

fn c6_moore_penrose() -> Check {
    let grid = GridConfig::default();
    let mut c = Corpus::new(600, Profile::deficient());
    let mut worst = f64::INFINITY;
    for n in 0..50 {
        let p = c.pair();
        let g = transforms::pinv_map(&Repr::Pair(p.clone()).evaluator()).map_err(e(&format!("L375 #{n}")))?;
        let cert = certify_class(&g, p.alpha(), ClassKind::S, &grid).map_err(e(&format!("L375 #{n}")))?;
        let w = cert.worst().unwrap();
        worst = worst.min(w.margin);
        ensure(cert.passed(), || format!("L375 #{n}: {} margin {:.3e} at {:?}", w.name, w.margin, w.witness_z))?;
    }
    let mut gam = 0f64;
    for n in 0..20 {
        let s = c.s0_nonzero();
        let g = transforms::pinv_map(&Repr::S0(s.clone()).evaluator()).map_err(e(&format!("L395 #{n}")))?;
        let est = limit_at_infinity(&g, LimitMode::PlainIy).map_err(e(&format!("L395 #{n}")))?;
        let mass = s.sigma().total_mass();
        let want = transforms::pinv(mass.mat(), transforms::default_rtol(s.q())).pinv;
        let d = rel(&est.value, &want);
        gam = gam.max(d);
        ensure(d <= 1e-6, || format!("L395 #{n}: gamma_G off by {d:.3e}"))?;
        let cert = certify_class(&g, s.alpha(), ClassKind::S0, &grid).map_err(e(&format!("L395 #{n}")))?;
        ensure(!cert.passed(), || format!("L395 #{n}: output certified as S0"))?;
    }
    let cases: [(ReprKind, Direction); 4] = [
        (ReprKind::SinfTriple, Direction::SinfToS),
        (ReprKind::StieltjesPair, Direction::SToSinf),
        (ReprKind::TinfTriple, Direction::TinfToT),
        (ReprKind::TPair, Direction::TToTinf),
    ];
    for (kind, dir) in cases {
        for n in 0..20 {
            let r = c.repr(kind);
            let g = transforms::neg_pinv_map(&r.evaluator(), dir).map_err(e(&format!("{dir:?} #{n}")))?;
            let cert =
                certify_class(&g, r.endpoint().unwrap(), dir.target(), &grid).map_err(e(&format!("{dir:?} #{n}")))?;
            let w = cert.worst().unwrap();
            worst = worst.min(w.margin);
            ensure(cert.passed(), || format!("{dir:?} #{n}: {} margin {:.3e} at {:?}", w.name, w.margin, w.witness_z))?;
        }
    }
    Ok(format!("worst certified margin {worst:.2e}, gamma_G err {gam:.1e}, 80 iff instances"))
}

const LATTICE: f64 = (1u64 << 30) as f64;

fn c7_duality() -> Check {
    let mut c = Corpus::new(700, Profile::dyadic());
    let cfg = GridConfig { n_upper: 20, n_lower: 20, n_gap: 10, seed: 7, ..GridConfig::default() };
    let mut worst = 0f64;
    for kind in [
        ReprKind::StieltjesPair,
        ReprKind::S0,
        ReprKind::SinfTriple,
        ReprKind::TPair,
        ReprKind::T0,
        ReprKind::TinfTriple,
    ] {
        for n in 0..20 {
            let r = c.repr(kind);
            let a = r.endpoint().unwrap();
            let b = c.uniform(-12.0, 12.0).round() / 4.0;
            let d = transforms::dual_map(&r, b).map_err(e(&format!("{kind} #{n}")))?;
            for p in grid_points(&cfg, b, !kind.is_t_side()) {
                // Snap to a 2^-30 lattice so that a + b - conj(z) is exact and only the maps are compared.
                let snap = |x: f64| (x * LATTICE).round() / LATTICE;
                let z = C64::new(snap(p.z.re), snap(p.z.im));
                let g = d.eval(z).map_err(e("dual eval"))?;
                let f = r.eval(C64::new(a + b, 0.0) - z.conj()).map_err(e("eval"))?;
                let want = -f.adjoint();
                let dev = rel(&g, &want);
                worst = worst.max(dev);
                ensure(dev <= 1e-13, || format!("{kind} #{n} at {}: identity off by {dev:.3e}", z))?;
            }
            check_dual_parameters(&r, &d, a + b).map_err(|m| format!("{kind} #{n}: {m}"))?;
            let back = transforms::dual_map(&d, a).map_err(e("dual back"))?;
            ensure(back == r, || format!("{kind} #{n}: involution not exact"))?;
        }
    }
    Ok(format!("120 instances x 50 points, worst {worst:.1e}; involution exact"))
}

fn reflected(mu: &MatrixMeasure, c: f64) -> Vec<(f64, CMat)> {
    let mut v: Vec<(f64, CMat)> = mu.atoms().iter().map(|a| (c - a.t, a.w.mat().clone())).collect();
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    v
}

fn atoms(mu: &MatrixMeasure) -> Vec<(f64, CMat)> {
    mu.atoms().iter().map(|a| (a.t, a.w.mat().clone())).collect()
}

fn check_dual_parameters(r: &Repr, d: &Repr, c: f64) -> Result<(), String> {
    let ok = match (r, d) {
        (Repr::Pair(p), Repr::TPair(t)) => p.gamma() == t.gamma() && reflected(p.mu(), c) == atoms(t.mu()),
        (Repr::TPair(t), Repr::Pair(p)) => p.gamma() == t.gamma() && reflected(t.mu(), c) == atoms(p.mu()),
        (Repr::S0(s), Repr::T0(t)) => reflected(s.sigma(), c) == atoms(t.sigma()),
        (Repr::T0(t), Repr::S0(s)) => reflected(t.sigma(), c) == atoms(s.sigma()),
        (Repr::SInf(s), Repr::TInf(t)) => s.d() == t.d() && s.e() == t.e() && reflected(s.rho(), c) == atoms(t.rho()),
        (Repr::TInf(t), Repr::SInf(s)) => s.d() == t.d() && s.e() == t.e() && reflected(t.rho(), c) == atoms(s.rho()),
        _ => false,
    };
    ensure(ok, || "parameter mapping not reproduced".into())
}

fn params_close(a: &Repr, b: &Repr) -> Result<(), String> {
    let mats = |r: &Repr| -> Vec<CMat> {
        match r {
            Repr::Pair(p) => vec![p.gamma().mat().clone()],
            Repr::Kk(k) => vec![k.c().mat().clone()],
            Repr::Nevanlinna(n) => vec![n.a().mat().clone(), n.b().mat().clone()],
            Repr::S0(_) | Repr::T0(_) => vec![],
            Repr::SInf(s) => vec![s.d().mat().clone(), s.e().mat().clone()],
            Repr::TPair(p) => vec![p.gamma().mat().clone()],
            Repr::TInf(s) => vec![s.d().mat().clone(), s.e().mat().clone()],
        }
    };
    ensure(a.kind() == b.kind(), || "kind changed".into())?;
    ensure(a.endpoint() == b.endpoint(), || "endpoint changed".into())?;
    for (x, y) in mats(a).iter().zip(mats(b).iter()) {
        ensure(rel(x, y) <= 1e-13, || format!("matrix parameter off by {:.3e}", rel(x, y)))?;
    }
    let (ma, mb) = (a.measure().atoms(), b.measure().atoms());
    ensure(ma.len() == mb.len(), || format!("atom count {} vs {}", ma.len(), mb.len()))?;
    for (x, y) in ma.iter().zip(mb) {
        ensure(x.t == y.t, || format!("node {} vs {}", x.t, y.t))?;
        let dw = rel(x.w.mat(), y.w.mat());
        ensure(dw <= 1e-13, || format!("weight at {} off by {dw:.3e}", x.t))?;
    }
    Ok(())
}

fn c8_conversions() -> Check {
    let mut c = Corpus::new(800, Profile::default());
    let cfg = GridConfig { n_upper: 16, n_lower: 16, n_gap: 8, seed: 8, ..GridConfig::default() };
    let mut worst_eval = 0f64;
    let mut trips = 0;
    let routes: [(ReprKind, &[ReprKind]); 6] = [
        (ReprKind::StieltjesPair, &[ReprKind::KkPair, ReprKind::Nevanlinna, ReprKind::S0]),
        (ReprKind::KkPair, &[ReprKind::StieltjesPair, ReprKind::Nevanlinna]),
        (ReprKind::S0, &[ReprKind::StieltjesPair, ReprKind::KkPair, ReprKind::Nevanlinna]),
        (ReprKind::SinfTriple, &[ReprKind::StieltjesPair]),
        (ReprKind::TPair, &[ReprKind::T0]),
        (ReprKind::T0, &[ReprKind::TPair]),
    ];
    for (from, targets) in routes {
        for n in 0..20 {
            let mut r = c.repr(from);
            if from == ReprKind::StieltjesPair && n % 2 == 0 {
                // gamma = 0 so the S0 route is legal
                r = Repr::Pair(sr::s0_to_pair(&c.s0()).unwrap());
            }
            if from == ReprKind::TPair && n % 2 == 0 {
                r = Repr::TPair(sr::t0_to_tpair(&c.t0()).unwrap());
            }
            let alpha = r.endpoint().unwrap();
            for &to in targets {
                let conv = match sr::convert(&r, to, Some(alpha)) {
                    Ok(x) => x,
                    Err(stieltjes_kit::Error::IllegalConversion(_)) if matches!(to, ReprKind::S0 | ReprKind::T0) => {
                        continue
                    }
                    Err(err) => return Err(format!("{from}->{to} #{n}: {err}")),
                };
                if let Repr::Nevanlinna(nv) = &conv {
                    ensure(nv.b().is_zero(), || "B nonzero".into())?;
                    ensure(nv.nu().atoms().iter().all(|a| a.t >= alpha), || "nu charges (-inf, alpha)".into())?;
                }
                let back = sr::convert(&conv, from, Some(alpha)).map_err(e(&format!("{to}->{from} #{n}")))?;
                params_close(&r, &back).map_err(|m| format!("{from}->{to}->{from} #{n}: {m}"))?;
                trips += 1;
                // SInf converts to the pair of F/(z - alpha), a different function.
                let quotient = from == ReprKind::SinfTriple;
                for p in grid_points(&cfg, alpha, from.is_t_side()) {
                    let f = r.eval(p.z).map_err(e("eval"))?;
                    let f = if quotient { f / (p.z - C64::new(alpha, 0.0)) } else { f };
                    let g = conv.eval(p.z).map_err(e("eval converted"))?;
                    let d = rel(&g, &f);
                    worst_eval = worst_eval.max(d);
                    ensure(d <= 1e-12, || format!("{from}->{to} #{n} at {}: eval off by {d:.3e}", p.z))?;
                }
            }
        }
    }
    Ok(format!("{trips} round trips, worst eval gap {worst_eval:.1e}"))
}

fn c9_monotonicity() -> Check {
    let mut worst = f64::INFINITY;
    let cases = [
        (ReprKind::StieltjesPair, ClassKind::S),
        (ReprKind::SinfTriple, ClassKind::Sinf),
        (ReprKind::TPair, ClassKind::T),
        (ReprKind::TinfTriple, ClassKind::Tinf),
    ];
    for (k, (kind, class)) in cases.into_iter().enumerate() {
        let mut c = Corpus::new(900 + k as u64, Profile::default());
        for n in 0..20 {
            let r = c.repr(kind);
            let rep =
                monotonicity_chain(&r.evaluator(), r.endpoint().unwrap(), class).map_err(e(&format!("{kind} #{n}")))?;
            worst = worst.min(rep.anchor_margin).min(rep.step_margin);
            ensure(rep.passed, || format!("{kind} #{n}: {rep:?}"))?;
        }
    }
    let _ = chain_points(0.0, false);
    Ok(format!("80 chains x 8 points, worst lambda_min {worst:.2e}"))
}

fn c10_negative_controls() -> Check {
    let grid = GridConfig::default();
    let mut c = Corpus::new(1000, Profile::default());
    let mut weakest = f64::NEG_INFINITY;
    for n in 0..20 {
        let p = c.pair();
        let q = p.q();
        let (vals, vecs) = linalg::herm_eigen(p.gamma().mat());
        let u = vecs.column(0).into_owned();
        let spread: CMat = p.mu().integrate(|t| C64::new(1.0 + t - p.alpha(), 0.0)).map_err(e("integrate"))?;
        let target = -(0.5 + 2e-3 * norm(&spread));
        let bump = (&u * u.adjoint()).scale(target - vals[0]);
        let f = Repr::Pair(p.clone()).evaluator().shifted(bump);
        let cert = certify_class(&f, p.alpha(), ClassKind::S, &grid).map_err(e(&format!("gamma #{n}")))?;
        let w = cert.worst().unwrap();
        weakest = weakest.max(w.margin);
        ensure(!cert.passed() && w.margin < -1e-6, || format!("gamma #{n} (q={q}): silent pass, worst {w:?}"))?;
    }
    let mut moved = 0;
    while moved < 20 {
        let p = c.pair();
        if p.mu().is_zero() {
            continue;
        }
        let heaviest = (0..p.mu().atoms().len())
            .max_by(|&i, &j| norm(p.mu().atoms()[i].w.mat()).total_cmp(&norm(p.mu().atoms()[j].w.mat())))
            .unwrap();
        let f = corpus::pair_with_moved_atom(&p, heaviest, p.alpha() - 0.5).map_err(e("move"))?;
        let cert = certify_class(&f, p.alpha(), ClassKind::S, &grid).map_err(e(&format!("moved #{moved}")))?;
        let w = cert.worst().unwrap();
        weakest = weakest.max(w.margin);
        ensure(!cert.passed() && w.margin < -1e-6, || format!("moved #{moved}: silent pass, worst {w:?}"))?;
        moved += 1;
    }
    Ok(format!("40 controls rejected, weakest rejection margin {weakest:.2e}"))
}

type Criterion = (&'static str, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("representations certify for their own class", c1_representations_certify),
        ("parameter extraction by limits", c2_parameter_extraction),
        ("imaginary and real part closed forms", c3_closed_forms),
        ("kernel and range structure", c4_structure),
        ("rank constancy and zero-iff-zero", c5_rank_constancy),
        ("Moore-Penrose closure", c6_moore_penrose),
        ("reflection duality", c7_duality),
        ("conversions", c8_conversions),
        ("monotonicity chains", c9_monotonicity),
        ("negative controls", c10_negative_controls),
    ];
    let _ = classifier::TOL_CERT;
    let mut failed = 0;
    let start = Instant::now();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = run();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("{} of 10 criteria passed in {:.1}s", 10 - failed, start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
