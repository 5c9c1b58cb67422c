use super::*;
use crate::algorithms::{certificate_skm, fast_certificate_skm, CertificateInputs};
use crate::moduli::StepSchedule;
use crate::problems::{Atom, CostKind, FixedPointProblem, MeanMinProblem, Operator};
use crate::spaces::{ConvexSet, SpaceKind};

fn e2(x: f64, y: f64) -> Point {
    Point::euclidean(&[x, y])
}

fn halfspaces() -> Problem {
    Problem::FixedPoint(
        FixedPointProblem::new(
            SpaceKind::Euclidean(2),
            vec![
                Operator { set: ConvexSet::Halfspace { normal: vec![1.0, 0.0], offset: 0.0 }, prob: 0.5 },
                Operator { set: ConvexSet::Halfspace { normal: vec![0.0, 1.0], offset: 0.0 }, prob: 0.5 },
            ],
            2.0,
            3.0,
        )
        .unwrap(),
    )
}

fn tripod_median() -> Problem {
    let w = 1.0 / 3.0;
    let atoms = (0..3).map(|r| Atom { point: Point::tripod(r, 1.0).unwrap(), weight: w }).collect();
    Problem::MeanMin(MeanMinProblem::new(SpaceKind::Tripod, atoms, CostKind::Distance, 2.0).unwrap())
}

const HALF: StepSchedule = StepSchedule::Constant { value: 0.5 };

#[test]
fn start_in_solution_gives_zero_curves() {
    let p = halfspaces();
    let x0 = e2(-1.0, -0.5);
    let it = Iteration::new(AlgorithmTag::Skm, &p, &HALF, &x0).unwrap();
    let s = run_ensemble(&it, &x0, 40, 50, 1, &[0.1]).unwrap();
    assert!(s.mean_dist.iter().chain(&s.mean_gap).all(|v| *v == 0.0));
    assert_eq!(s.tail_probability(0, 0.1).unwrap(), 0.0);
    assert_eq!(s.tail_probability(0, 0.0).unwrap(), 1.0);
    assert!(run_ensemble(&it, &x0, 0, 5, 1, &[]).is_err());
}

#[test]
fn single_path_matches_trajectory() {
    let p = tripod_median();
    let sched = StepSchedule::Harmonic { a: 1.0, shift: 1.0 };
    let x0 = Point::tripod(0, 1.0).unwrap();
    let it = Iteration::new(AlgorithmTag::Sppa, &p, &sched, &x0).unwrap();
    let s = run_ensemble(&it, &x0, 1, 100, 17, &[0.05]).unwrap();
    let tr = it.run(&x0, 100, 17).unwrap();
    assert_eq!(s.mean_dist.len(), 101);
    for (n, x) in tr.points.iter().enumerate() {
        assert_eq!(s.mean_dist[n], p.dist_to_solutions(x, 1).unwrap());
        assert_eq!(s.mean_gap[n], p.gap(x).unwrap());
    }
}

#[test]
fn doubling_paths_shrinks_stderr_by_root_two() {
    let p = halfspaces();
    let x0 = e2(1.0, 1.0);
    let it = Iteration::new(AlgorithmTag::Skm, &p, &HALF, &x0).unwrap();
    let n = 4;
    let ratios: Vec<f64> = (0..20)
        .map(|rep| {
            let a = run_ensemble(&it, &x0, 200, n as u64, 1000 + rep, &[]).unwrap();
            let b = run_ensemble(&it, &x0, 400, n as u64, 5000 + rep, &[]).unwrap();
            b.stderr_dist(n) / a.stderr_dist(n)
        })
        .collect();
    let mean = ratios.iter().sum::<f64>() / 20.0;
    let sd = (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 19.0).sqrt();
    assert!((mean - std::f64::consts::FRAC_1_SQRT_2).abs() <= 3.0 * sd / 20f64.sqrt(), "{mean} ± {sd}");
}

#[test]
fn tail_frequencies_are_monotone() {
    let p = halfspaces();
    let x0 = e2(1.0, 1.0);
    let eps = [0.05, 0.1, 0.3, 10.0];
    let it = Iteration::new(AlgorithmTag::Skm, &p, &HALF, &x0).unwrap();
    let s = run_ensemble(&it, &x0, 300, 60, 4, &eps).unwrap();
    for j in 0..eps.len() {
        for n in 0..60 {
            assert!(s.tail[j][n + 1] <= s.tail[j][n]);
            if j + 1 < eps.len() {
                assert!(s.tail[j + 1][n] <= s.tail[j][n]);
            }
            assert!(s.point_tail[j][n] <= s.tail[j][n]);
        }
    }
    assert!(s.tail[3].iter().all(|v| *v == 0.0));
    assert!(s.tail_probability(61, 0.1).is_err());
    assert!(s.tail_probability(0, 0.2).is_err());
}

#[test]
fn fejer_margins() {
    let p = halfspaces();
    let it = Iteration::new(AlgorithmTag::Skm, &p, &HALF, &e2(1.0, 1.0)).unwrap();
    let mut rng = RngState::new(0);
    let m = fejer_margin(&it, &e2(1.0, 2.0), &e2(0.0, -1.0), 0, 1000, &mut rng).unwrap();
    assert_eq!(m.stderr, 0.0);
    assert!(m.slack >= -1e-10);

    let single = Problem::MeanMin(
        MeanMinProblem::new(SpaceKind::Euclidean(1), vec![Atom { point: Point::euclidean(&[2.0]), weight: 1.0 }], CostKind::HalfSquaredDistance, 4.0)
            .unwrap(),
    );
    let sched = StepSchedule::Harmonic { a: 1.0, shift: 1.0 };
    let it = Iteration::new(AlgorithmTag::Sppa, &single, &sched, &Point::euclidean(&[0.0])).unwrap();
    for x in [-3.0, 0.0, 1.9, 5.0] {
        for n in [0, 3, 50] {
            let m = fejer_margin(&it, &Point::euclidean(&[x]), &Point::euclidean(&[2.0]), n, 0, &mut rng).unwrap();
            assert!(m.slack >= 0.0);
        }
    }
    let t = tripod_median();
    let it = Iteration::new(AlgorithmTag::Sppa, &t, &sched, &Point::tripod(0, 1.0).unwrap()).unwrap();
    let m = fejer_margin(&it, &Point::tripod(1, 0.7).unwrap(), &Point::tripod_origin(), 2, 100_000, &mut rng).unwrap();
    assert!(m.stderr > 0.0);
    assert!(m.slack >= -3.0 * m.stderr);
}

#[test]
fn liminf_witnesses() {
    let p = tripod_median();
    let sched = StepSchedule::Harmonic { a: 1.0, shift: 1.0 };
    let x0 = Point::tripod(0, 1.0).unwrap();
    let it = Iteration::new(AlgorithmTag::Sppa, &p, &sched, &x0).unwrap();
    let s = run_ensemble(&it, &x0, 200, 400, 8, &[]).unwrap();
    assert_eq!(liminf_witness_check(&s, s.mean_gap[5] + 0.01, 5, 100), Some(5));
    assert_eq!(liminf_witness_check(&s, 0.0, 0, 400), None);
    let cert = crate::algorithms::certificate_sppa(&p, &sched, &x0, &CertificateInputs {
        b: Some(1.1),
        t: Some(1.645),
        ..Default::default()
    })
    .unwrap();
    let phi = cert.liminf_bound(10.0, 0).unwrap();
    assert!(phi < 400, "{phi}");
    let r = liminf_audit(&s, &cert, 10.0, 0).unwrap();
    assert_eq!(r.status, AuditStatus::Pass);
}

#[test]
fn flagship_scale_model_audit() {
    let p = halfspaces();
    let x0 = e2(1.0, 1.0);
    let it = Iteration::new(AlgorithmTag::Skm, &p, &HALF, &x0).unwrap();
    let s = run_ensemble(&it, &x0, 256, 3000, 2, &[0.5, 1.0]).unwrap();
    let cert = certificate_skm(&p, &HALF, &x0, &CertificateInputs { b: Some(2.5), ..Default::default() }).unwrap();
    let rep = certificate_audit(&s, &cert, &[0.5, 1.0], 0.1).unwrap();
    assert!(rep.passed());
    assert!(rep.records.iter().any(|r| r.status == AuditStatus::Pass));
    assert!(rep.records.iter().any(|r| r.status == AuditStatus::Unchecked));
    for r in rep.records.iter().filter(|r| matches!(r.kind, RecordKind::AlmostSure | RecordKind::DistAlmostSure)) {
        assert!(r.note.contains(TRUNCATION_CAVEAT));
    }
    // supermartingale envelope: mean squared distance does not grow
    for n in 0..3000 {
        assert!(s.mean_sq_dist[n + 1] <= s.mean_sq_dist[n] + 3.0 * s.stderr_sq_dist(n + 1));
    }
    let Problem::FixedPoint(fp) = &p else { unreachable!() };
    let fast = fast_certificate_skm(fp, 2.0, 16, &x0).unwrap();
    let fit = Iteration::new(AlgorithmTag::Skm, &p, &fast.schedule, &x0).unwrap();
    let fs = run_ensemble(&fit, &x0, 256, 1000, 3, &[0.3]).unwrap();
    let recs = fast_audit(&fs, &fast, &[0.3]).unwrap();
    assert!(recs.iter().all(|r| r.status == AuditStatus::Pass), "{recs:?}");
}

#[test]
fn consistency_conversion_on_recorded_states() {
    let p = halfspaces();
    let x0 = e2(1.0, 1.0);
    let it = Iteration::new(AlgorithmTag::Skm, &p, &HALF, &x0).unwrap();
    for seed in 0..50 {
        let tr = it.run(&x0, 40, seed).unwrap();
        for x in &tr.points {
            let d2 = p.dist_to_solutions(x, 2).unwrap();
            let d = p.dist_to_solutions(x, 1).unwrap();
            for eps in [0.01, 0.1, 0.5, 1.0] {
                if d2 < eps * eps {
                    assert!(d < eps);
                }
            }
        }
    }
}

#[test]
fn export_round_trip_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let p = halfspaces();
    let x0 = e2(1.0, 1.0);
    let it = Iteration::new(AlgorithmTag::Skm, &p, &HALF, &x0).unwrap();
    let s = run_ensemble(&it, &x0, 70, 30, 5, &[0.3, 0.2]).unwrap();
    export_results(&s, None, dir.path()).unwrap();
    assert_eq!(read_curves(&dir.path().join(CURVES_FILE)).unwrap(), s);

    let bare = run_ensemble(&it, &x0, 3, 4, 5, &[]).unwrap();
    let csv = curves_csv(&bare);
    assert!(csv.starts_with("n,mean_dist,mean_sq_dist,mean_gap,mean_quartic_dist,mean_sq_gap\n"));
    assert_eq!(csv.lines().count(), 6);

    let pools: Vec<String> = [1, 4]
        .iter()
        .map(|&t| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
            pool.install(|| curves_csv(&run_ensemble(&it, &x0, 100, 40, 9, &[0.3]).unwrap()))
        })
        .collect();
    assert_eq!(pools[0], pools[1]);

    let corrupt = dir.path().join(CURVES_FILE);
    std::fs::write(&corrupt, "n,mean_dist\n0,abc\n").unwrap();
    assert!(read_curves(&corrupt).is_err());
}
