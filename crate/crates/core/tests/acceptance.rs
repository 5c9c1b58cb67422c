//! Acceptance criteria, one test and one status line per criterion.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use fejerlab::algorithms::{certificate, fast_certificate_skm, Iteration, RngState};
use fejerlab::config::{Experiment, ExperimentConfig};
use fejerlab::harness::{
    certificate_audit, curves_csv, fast_audit, fejer_margin, liminf_audit, run_ensemble, AuditStatus, EnsembleStats,
    RecordKind,
};
use fejerlab::moduli::{recursion_bound_u, AlgorithmTag, StepSchedule};
use fejerlab::problems::{sample_in_ball, Atom, BusemannProblem, CostKind, FixedPointProblem, MeanMinProblem, Operator, Problem};
use fejerlab::spaces::suite::{default_sets, run_geometry_suite, sample_point};
use fejerlab::spaces::{ConvexSet, Point, SpaceKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FLAGSHIP: &str = include_str!("../../../configs/flagship_skm.json");
const TRIPOD: &str = include_str!("../../../configs/tripod_median_sppa.json");
const SEGMENT: &str = include_str!("../../../configs/segment_sb.json");

/// Writes past the test harness capture so every line lands in the log.
fn report(ac: u32, ok: bool, elapsed: Duration, detail: &str) {
    let mut out = std::io::stdout().lock();
    let word = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(out, "AC{ac} {word} ({:.1}s): {detail}", elapsed.as_secs_f64());
    let _ = out.flush();
}

fn experiment(text: &str) -> Experiment {
    ExperimentConfig::from_json(text).unwrap().build().unwrap()
}

fn e2(x: f64, y: f64) -> Point {
    Point::euclidean(&[x, y])
}

#[test]
fn ac1_geometry_suite() {
    let t = Instant::now();
    let mut worst_cn: f64 = 0.0;
    let mut worst_q: f64 = 0.0;
    let mut ok = true;
    for space in [SpaceKind::Euclidean(3), SpaceKind::Tripod, SpaceKind::HalfPlane] {
        let r = run_geometry_suite(space, 10_000, 1, &default_sets(space)).unwrap();
        worst_cn = worst_cn.max(r.cn);
        worst_q = r.quasi_triangle.iter().fold(worst_q, |a, b| a.max(*b));
        ok &= r.passed && r.symmetry == 0.0 && r.cn <= 1e-10 && r.quasi_triangle.iter().all(|q| *q <= 1e-10);
        ok &= r.identity <= 1e-10 && r.triangle <= 1e-10 && r.geodesic_parameter <= 1e-10;
    }
    let el = t.elapsed();
    ok &= el < Duration::from_secs(5);
    report(1, ok, el, &format!("max CN residual {worst_cn:.2e}, max quasi-triangle residual {worst_q:.2e} (q = 1, 2, 3)"));
    assert!(ok);
}

#[test]
fn ac2_recursion_bound() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let c: f64 = rng.random_range(1.01..6.0);
        let r: u64 = rng.random_range(c.ceil() as u64..=64);
        let d: f64 = rng.random_range(0.0..10.0);
        let x0: f64 = rng.random_range(0.0..10.0);
        let u = recursion_bound_u(c, d, r, x0).unwrap();
        let mut x = x0;
        for n in 0..100_000u64 {
            let m = (n + r) as f64;
            worst = worst.max(x * m / u - 1.0);
            x = (1.0 - c / m) * x + d / (m * m);
        }
    }
    let el = t.elapsed();
    let ok = worst <= 1e-12 && el < Duration::from_secs(5);
    report(2, ok, el, &format!("max relative excess of x_n (n+r) over u: {worst:.2e}"));
    assert!(ok);
}

fn frozen_states(it: &Iteration, x0: &Point, count: usize, seed: u64) -> Vec<(u64, Point)> {
    let per = 50;
    let mut out = Vec::new();
    let mut k = 0;
    while out.len() < count {
        let tr = it.run(x0, per as u64, seed + k).unwrap();
        for (n, x) in tr.points.into_iter().enumerate().take(per) {
            out.push((n as u64, x));
        }
        k += 1;
    }
    out.truncate(count);
    out
}

#[test]
fn ac3_one_step_fejer() {
    let t = Instant::now();
    let mut rng = RngState::new(3);
    let mut worst_exact = f64::INFINITY;
    let mut count_exact = 0;
    let skm = experiment(FLAGSHIP);
    let harm = StepSchedule::Harmonic { a: 1.0, shift: 2.0 };
    for sched in [skm.config.schedule.clone(), harm.clone()] {
        let it = Iteration::new(AlgorithmTag::Skm, &skm.problem, &sched, &skm.config.start).unwrap();
        for (n, x) in frozen_states(&it, &e2(2.0, 1.5), 500, 10) {
            let z = skm.problem.solution().project(&sample_in_ball(skm.problem.space(), skm.problem.center(), 3.0, &mut rng).unwrap()).unwrap();
            let m = fejer_margin(&it, &x, &z, n, 0, &mut rng).unwrap();
            worst_exact = worst_exact.min(m.slack);
            count_exact += 1;
        }
    }
    let sb = experiment(SEGMENT);
    let it = Iteration::new(AlgorithmTag::Sb, &sb.problem, &sb.config.schedule, &sb.config.start).unwrap();
    for (i, (n, x)) in frozen_states(&it, &sb.config.start, 1000, 20).into_iter().enumerate() {
        let z = e2(-1.0 + 2.0 * (i % 11) as f64 / 10.0, 0.0);
        let m = fejer_margin(&it, &x, &z, n, 0, &mut rng).unwrap();
        worst_exact = worst_exact.min(m.slack);
        count_exact += 1;
    }
    let sppa = experiment(TRIPOD);
    let it = Iteration::new(AlgorithmTag::Sppa, &sppa.problem, &sppa.config.schedule, &sppa.config.start).unwrap();
    let mut worst_mc = f64::INFINITY;
    for (n, x) in frozen_states(&it, &sppa.config.start, 100, 30) {
        let m = fejer_margin(&it, &x, &Point::tripod_origin(), n, 100_000, &mut rng).unwrap();
        worst_mc = worst_mc.min(m.slack / m.stderr.max(1e-300));
        if m.stderr == 0.0 {
            worst_mc = worst_mc.min(if m.slack >= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY });
        }
    }
    let el = t.elapsed();
    let ok = worst_exact >= -1e-10 && worst_mc >= -3.0 && el < Duration::from_secs(120);
    report(
        3,
        ok,
        el,
        &format!(
            "exact slack min {worst_exact:.2e} over {count_exact} skm/sb states; \
             sppa MC slack min {worst_mc:.2} stderr over 100 states (m = 1e5)"
        ),
    );
    assert!(ok);
}

fn flagship_stats() -> &'static (Experiment, EnsembleStats, Duration) {
    static CELL: OnceLock<(Experiment, EnsembleStats, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let exp = experiment(FLAGSHIP);
        let c = &exp.config;
        let it = Iteration::new(c.algorithm, &exp.problem, &c.schedule, &c.start).unwrap();
        let s = run_ensemble(&it, &c.start, c.ensemble.paths, c.ensemble.horizon, c.ensemble.seed, &c.audit.epsilons)
            .unwrap();
        let el = t.elapsed();
        (exp, s, el)
    })
}

#[test]
fn ac4_flagship_main_audit() {
    let (exp, stats, run_time) = flagship_stats();
    let t = Instant::now();
    let c = &exp.config;
    assert_eq!((stats.paths, stats.horizon), (2000, 20000));
    let cert = certificate(c.algorithm, &exp.problem, &c.schedule, &c.start, &c.certificate).unwrap();
    let rep = certificate_audit(stats, &cert, &[0.3, 0.2], 0.1).unwrap();
    let mean = rep
        .records
        .iter()
        .find(|r| r.kind == RecordKind::Mean && r.epsilon == Some(0.2))
        .unwrap();
    let index = mean.predicted_index.unwrap();
    let printed = (480.0f64 / 0.04).ceil() as u64;
    let covers_printed = index <= printed
        && (printed..=stats.horizon).all(|n| stats.mean_dist[n as usize] < 0.2 + 3.0 * stats.stderr_dist(n as usize));
    let asr = rep
        .records
        .iter()
        .find(|r| r.kind == RecordKind::DistAlmostSure && r.epsilon == Some(0.3))
        .unwrap();
    let el = *run_time + t.elapsed();
    let ok = mean.status == AuditStatus::Pass
        && covers_printed
        && asr.status == AuditStatus::Pass
        && rep.passed()
        && el < Duration::from_secs(180);
    report(
        4,
        ok,
        el,
        &format!(
            "mean index {index} (stated {printed}): E[dist] < 0.2 + 3se on [{index}, 20000]; \
             a.s. index {} at eps 0.3, lambda 0.1: tail frequency {:.4} <= 0.1 + {:.4}; \
             truncated tail only",
            asr.predicted_index.unwrap(),
            asr.observed_value_at_index.unwrap(),
            asr.mc_margin.unwrap()
        ),
    );
    assert!(ok);
}

#[test]
fn ac5_fast_rate() {
    let t = Instant::now();
    let exp = experiment(FLAGSHIP);
    let c = &exp.config;
    let Problem::FixedPoint(fp) = &exp.problem else { unreachable!() };
    let fc = fast_certificate_skm(fp, 2.0, 16, &c.start).unwrap();
    let it = Iteration::new(AlgorithmTag::Skm, &exp.problem, &fc.schedule, &c.start).unwrap();
    let s = run_ensemble(&it, &c.start, 2000, 10_000, c.ensemble.seed, &[0.3, 0.2]).unwrap();
    let recs = fast_audit(&s, &fc, &[0.3, 0.2]).unwrap();
    let el = t.elapsed();
    let ok = (fc.u - 32.0).abs() < 1e-9
        && recs.iter().all(|r| r.status == AuditStatus::Pass)
        && recs.iter().filter(|r| r.kind == RecordKind::FastTail).count() == 2
        && el < Duration::from_secs(120);
    report(
        5,
        ok,
        el,
        &format!("u = {}, r = 16: E[dist^2] <= u/(n+16) + 3se for all n <= 10000; tail bound at 5 indices for eps 0.3, 0.2", fc.u),
    );
    assert!(ok);
}

#[test]
fn ac6_liminf_audits() {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for text in [TRIPOD, SEGMENT] {
        let exp = experiment(text);
        let c = &exp.config;
        let cert = certificate(c.algorithm, &exp.problem, &c.schedule, &c.start, &c.certificate).unwrap();
        let it = Iteration::new(c.algorithm, &exp.problem, &c.schedule, &c.start).unwrap();
        let s = run_ensemble(&it, &c.start, c.ensemble.paths, c.ensemble.horizon, c.ensemble.seed, &[]).unwrap();
        for l in &c.audit.liminf {
            let r = liminf_audit(&s, &cert, l.epsilon, l.start).unwrap();
            if l.start == 0 {
                ok &= r.predicted_index.unwrap() <= 2000;
            }
            ok &= r.status == AuditStatus::Pass;
            parts.push(format!("{} eps {} N {}: {}", c.algorithm, l.epsilon, l.start, r.note));
        }
        let small = cert.rho(0.05).unwrap();
        parts.push(format!("{} rho(0.05) = {small}", c.algorithm));
    }
    let el = t.elapsed();
    ok &= el < Duration::from_secs(180);
    report(
        6,
        ok,
        el,
        &format!(
            "{}; note: full rate indices for small epsilon are astronomically large and are certified only \
             through the ingredient checks of AC1-3 and AC7",
            parts.join("; ")
        ),
    );
    assert!(ok);
}

fn instances() -> Vec<(&'static str, Problem)> {
    let w = 1.0 / 3.0;
    let tp = |r, c| Point::tripod(r, c).unwrap();
    let e1 = |x| Point::euclidean(&[x]);
    vec![
        (
            "frechet line",
            Problem::MeanMin(
                MeanMinProblem::new(
                    SpaceKind::Euclidean(1),
                    vec![Atom { point: e1(1.0), weight: 0.5 }, Atom { point: e1(-1.0), weight: 0.5 }],
                    CostKind::HalfSquaredDistance,
                    4.0,
                )
                .unwrap(),
            ),
        ),
        (
            "frechet half-plane",
            Problem::MeanMin(
                MeanMinProblem::new(
                    SpaceKind::HalfPlane,
                    vec![
                        Atom { point: Point::half_plane(0.0, 1.0).unwrap(), weight: 0.4 },
                        Atom { point: Point::half_plane(1.0, 2.0).unwrap(), weight: 0.6 },
                    ],
                    CostKind::HalfSquaredDistance,
                    2.0,
                )
                .unwrap(),
            ),
        ),
        (
            "tripod median",
            Problem::MeanMin(
                MeanMinProblem::new(
                    SpaceKind::Tripod,
                    (0..3).map(|r| Atom { point: tp(r, 1.0), weight: w }).collect(),
                    CostKind::Distance,
                    2.0,
                )
                .unwrap(),
            ),
        ),
        (
            "tripod weighted pair",
            Problem::MeanMin(
                MeanMinProblem::new(
                    SpaceKind::Tripod,
                    vec![Atom { point: tp(0, 2.0), weight: 0.7 }, Atom { point: tp(2, 1.0), weight: 0.3 }],
                    CostKind::Distance,
                    3.0,
                )
                .unwrap(),
            ),
        ),
        ("two halfspaces", experiment(FLAGSHIP).problem),
        (
            "three euclidean sets",
            Problem::FixedPoint(
                FixedPointProblem::new(
                    SpaceKind::Euclidean(2),
                    vec![
                        Operator { set: ConvexSet::Halfspace { normal: vec![1.0, 0.0], offset: 1.0 }, prob: 0.25 },
                        Operator { set: ConvexSet::Halfspace { normal: vec![0.0, -1.0], offset: 0.0 }, prob: 0.25 },
                        Operator { set: ConvexSet::Box { lo: vec![-1.0, -1.0], hi: vec![2.0, 2.0] }, prob: 0.5 },
                    ],
                    4.0,
                    3.0,
                )
                .unwrap(),
            ),
        ),
        ("segment argmin", experiment(SEGMENT).problem),
        (
            "tripod busemann",
            Problem::Busemann(
                BusemannProblem::new(
                    SpaceKind::Tripod,
                    (0..3).map(|r| Atom { point: tp(r, 1.0), weight: w }).collect(),
                    ConvexSet::TripodSegment { max: [2.0, 2.0, 2.0] },
                    1.0,
                    2.0,
                )
                .unwrap(),
            ),
        ),
    ]
}

#[test]
fn ac7_regularity_moduli() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ok = true;
    let mut checked = Vec::new();
    for (name, p) in instances() {
        for q in [1u32, 2] {
            let m = p.regularity_modulus_for(q).unwrap();
            let b = m.region_bound.unwrap();
            let mut worst = f64::INFINITY;
            for _ in 0..1000 {
                let k = rng.random_range(1..=6);
                let ws: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
                let total: f64 = ws.iter().sum();
                let (mut ed, mut eg) = (0.0, 0.0);
                for w in ws {
                    let x = if rng.random_bool(0.2) {
                        p.solution().project(&sample_point(p.space(), &mut rng)).unwrap()
                    } else {
                        sample_in_ball(p.space(), p.center(), b, &mut rng).unwrap()
                    };
                    let x = if fejerlab::spaces::distance(&x, p.center()).unwrap() <= b { x } else { p.center().clone() };
                    ed += w / total * p.dist_to_solutions(&x, q).unwrap();
                    eg += w / total * p.gap(&x).unwrap();
                }
                let lhs = if ed > 0.0 { m.modulus.eval(ed).unwrap() } else { 0.0 };
                worst = worst.min(eg + 1e-9 - lhs);
            }
            ok &= worst >= 0.0;
            checked.push(format!("{name} q={q}"));
        }
    }
    let el = t.elapsed();
    ok &= el < Duration::from_secs(30);
    report(7, ok, el, &format!("tau(E[dist^q]) <= E[F] + 1e-9 on 1000 random points each: {}", checked.join(", ")));
    assert!(ok);
}

#[test]
fn ac8_determinism() {
    let (exp, stats, _) = flagship_stats();
    let t = Instant::now();
    let c = &exp.config;
    let it = Iteration::new(c.algorithm, &exp.problem, &c.schedule, &c.start).unwrap();
    let reference = curves_csv(stats);
    let runs: Vec<String> = [1usize, 4]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                curves_csv(
                    &run_ensemble(&it, &c.start, c.ensemble.paths, c.ensemble.horizon, c.ensemble.seed, &c.audit.epsilons)
                        .unwrap(),
                )
            })
        })
        .collect();
    let el = t.elapsed();
    let ok = runs.iter().all(|r| *r == reference);
    report(
        8,
        ok,
        el,
        &format!("flagship curves.csv ({} bytes) identical across default, 1 and 4 thread pools", reference.len()),
    );
    assert!(ok);
}
