//! The ten acceptance criteria, each with its time budget. Every criterion
//! prints one PASS/FAIL line; the test fails if any of them fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tjurina_core::detvar::{minors, strata_report, transpose_presentation};
use tjurina_core::ideal::{dimension_of, ideals_equal};
use tjurina_core::modellab::{generic_presentation, model_check, ModelSpec, WitnessOutcome};
use tjurina_core::resolve::{
    parse_script, parse_script_file, run_script, run_transform, TransformOptions,
};
use tjurina_core::smooth::{is_smooth_point, singular_locus_ideal, smoothness_report, Verdict};
use tjurina_core::tjurina::{
    chart_presentation, eliminate_linear, stacked_matrix, tjur_equals_tilde,
};
use tjurina_core::{
    parse_poly, ChartIndex, DetPresentation, GroebnerLimits, PolyMatrix, Polynomial, Rational,
    VarSet,
};

const SCRIPTS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scripts");

fn pres(names: &[&str], rows: &[&[&str]], t: usize) -> DetPresentation {
    let v = VarSet::new(names.iter().copied()).unwrap();
    let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
    DetPresentation::new(PolyMatrix::parse(&v, &rows).unwrap(), t, "").unwrap()
}

fn polys(v: &Arc<VarSet>, s: &[&str]) -> Vec<Polynomial> {
    s.iter().map(|e| parse_poly(e, v).unwrap()).collect()
}

fn f1() -> DetPresentation {
    pres(
        &["x", "y", "z", "w"],
        &[&["w^3", "y", "x"], &["z", "w", "y^3"]],
        2,
    )
}

fn f2() -> DetPresentation {
    pres(
        &["x", "y", "z", "w"],
        &[&["w^3", "z"], &["y", "w"], &["x", "y^3"]],
        2,
    )
}

fn lim() -> GroebnerLimits {
    GroebnerLimits::default()
}

fn row(i: &[usize]) -> ChartIndex {
    ChartIndex::row(i).unwrap()
}

fn criterion_1() {
    let cp = chart_presentation(&f1(), &row(&[2])).unwrap();
    assert_eq!(
        cp.generators(),
        polys(
            cp.vars(),
            &["w^3 - a1*y", "x - a3*y", "z - a1*w", "y^3 - a3*w"]
        )
    );
    let opts = TransformOptions {
        eliminate: true,
        saturate_by: Some("y*w".into()),
        smoothness: false,
    };
    let r = run_transform(&f1(), &row(&[2]), &opts, &lim()).unwrap();
    assert_eq!(r.reduced_vars.names(), &["y", "w", "a1", "a3"]);
    let out = PolyMatrix::parse(
        &r.reduced_vars,
        &[vec!["w^2", "y", "a3"], vec!["a1", "w", "y^2"]],
    )
    .unwrap();
    let target = minors(&out, 2).unwrap();
    assert!(ideals_equal(&r.reduced_vars, &r.generators, &target, &lim()).unwrap());
    // The component equation with exponents k-1, l-1.
    let g = parse_poly("y^2*w^2 - a1*a3", &r.reduced_vars).unwrap();
    assert!(ideals_equal(
        &r.reduced_vars,
        &r.generators,
        &[&target[..], &[g]].concat(),
        &lim()
    )
    .unwrap());
}

fn criterion_2() {
    // Hand computations label the chart variable by its chart (a1 in chart
    // {1}); here it is named by the column it sits in, so rename it.
    let displayed: [(&[usize], &[&str], &str); 2] = [
        (&[1], &["z - a1*w^3", "w - a1*y", "y^3 - a1*x"], "a2"),
        (&[2], &["w^3 - a2*z", "y - a2*w", "x - a2*y^3"], "a1"),
    ];
    for (i, expected, ours) in displayed {
        let cp = chart_presentation(&f2(), &row(i)).unwrap();
        assert_eq!(cp.vars().names()[4], ours);
        let shown =
            VarSet::new(["x", "y", "z", "w", if ours == "a2" { "a1" } else { "a2" }]).unwrap();
        let renamed: Vec<Polynomial> = cp
            .generators()
            .iter()
            .map(|g| {
                g.map_vars(
                    &shown,
                    &(0..5)
                        .map(|k| Polynomial::var(&shown, k))
                        .collect::<Vec<_>>(),
                )
            })
            .collect();
        assert_eq!(renamed, polys(&shown, expected));
    }
}

fn criterion_3() {
    let an = pres(&["x", "y", "z"], &[&["x", "z^2"], &["z^3", "y"]], 2);
    let c1 = eliminate_linear(&chart_presentation(&an, &row(&[1])).unwrap());
    assert_eq!(c1.generators(), polys(c1.vars(), &["z^2 - a2*x"]));
    let c2 = eliminate_linear(&chart_presentation(&an, &row(&[2])).unwrap());
    assert_eq!(c2.generators(), polys(c2.vars(), &["z^3 - a1*y"]));
    for (cp, node) in [(&c1, "y"), (&c2, "x")] {
        // A1 and A2: isolated singular point at the origin.
        let (vars, gens) = tjurina_core::resolve::reduced_space(cp).unwrap();
        assert!(!vars.names().iter().any(|n| n == node));
        let r = smoothness_report(&vars, &gens, &lim()).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::SingularAt {
                points: vec![vec![Rational::zero(); 3]],
                complete: true
            }
        );
    }
    let script = parse_script_file(format!("{SCRIPTS}/a4.rsc")).unwrap();
    let report = run_script(&script, &lim());
    assert!(report.passed(), "{report}");
    let mut terminal = 0;
    for (step, spec) in report.steps.iter().zip(&script.steps) {
        for (c, cs) in step.charts.iter().zip(&spec.charts) {
            if cs.continue_to.is_none() {
                let s = c.smoothness.as_ref().unwrap();
                assert!(s.is_smooth() && s.certified, "{} {}", step.label, c.chart);
                terminal += 1;
            }
        }
    }
    assert_eq!(terminal, 3);
}

fn criterion_4() {
    let script = parse_script_file(format!("{SCRIPTS}/e7.rsc")).unwrap();
    let report = run_script(&script, &lim());
    assert!(report.passed(), "{report}");
    let surfaces = [
        "x^2 + z^3 + w^2*x",
        "z^2 + y*w^2 + y^2*z",
        "x*y^2 + w^2 + x^2*y",
        "x*y + z^2*(x + y)",
        "z*x - w*x - w*z^2",
        "y*z + y*w - w*z",
    ];
    for (k, expected) in surfaces.iter().enumerate() {
        let step = &script.steps[k + 1];
        let e = parse_poly(expected, &step.vars).unwrap();
        assert!(step.claim == e || step.claim == -&e, "step {}", step.label);
        // The previous step's chart reaches this claim.
        let prev = &report.steps[k];
        assert!(prev.charts.iter().any(|c| c
            .continuation
            .as_ref()
            .is_some_and(|x| x.target == step.label && x.passed)));
    }
    for s in &report.steps {
        assert!(s.determinant.passed);
    }
    let last = report.steps.last().unwrap();
    assert_eq!(last.charts.len(), 2);
    for c in &last.charts {
        let s = c.smoothness.as_ref().unwrap();
        assert!(s.is_smooth() && s.certified);
    }
    let e7 = last.nodes.iter().find(|n| n.name == "E7").unwrap();
    assert_eq!(e7.neighbours, vec!["E4", "E5", "E6"]);
    assert_eq!((e7.smooth_points, e7.singular_points), (3, 0));
    for pair in [("E4", "E7"), ("E5", "E7"), ("E6", "E7")] {
        let edge = last
            .graph
            .iter()
            .find(|e| (e.a.as_str(), e.b.as_str()) == pair)
            .unwrap();
        assert_eq!(
            (edge.smooth_points, edge.singular_points, edge.curve),
            (1, 0, false)
        );
    }
}

fn criterion_5(m: usize, n: usize, t: usize) {
    let p = generic_presentation(&ModelSpec::new(m, n, t).unwrap()).unwrap();
    let d = dimension_of(p.vars(), &p.ideal(), &lim()).unwrap();
    assert_eq!(d, (m * n - (m - t + 1) * (n - t + 1)) as i64);
}

fn criterion_6() {
    assert_eq!(transpose_presentation(&f1()), f2());
    assert!(!tjur_equals_tilde(&strata_report(&f1(), &lim()).unwrap()));
    assert!(tjur_equals_tilde(&strata_report(&f2(), &lim()).unwrap()));
}

fn criterion_7() {
    let p = pres(
        &["x", "y", "z"],
        &[&["z", "x^2 + y^3"], &["x^2 + y^5", "z"]],
        2,
    );
    let cp = eliminate_linear(&chart_presentation(&p, &row(&[1])).unwrap());
    let expected = parse_poly("x^2 + y^3 - a2^2*(x^2 + y^5)", cp.vars()).unwrap();
    assert_eq!(cp.generators().len(), 1);
    assert!(cp.generators()[0] == expected || cp.generators()[0] == -&expected);
    let (vars, gens) = tjurina_core::resolve::reduced_space(&cp).unwrap();
    assert_eq!(vars.names(), &["x", "y", "a2"]);
    let r = smoothness_report(&vars, &gens, &lim()).unwrap();
    assert!(
        matches!(r.verdict, Verdict::SingularPositiveDim { dim } if dim >= 1),
        "{r:?}"
    );
    let sing = singular_locus_ideal(&vars, &gens, 1);
    for c in -3..=3 {
        let pt = vec![
            Rational::zero(),
            Rational::zero(),
            Rational::from_integer(c.into()),
        ];
        assert!(sing.iter().all(|g| g.evaluate(&pt).is_zero()));
        assert!(!is_smooth_point(&vars, &gens, 1, &pt));
    }
}

fn criterion_8() {
    for (m, n, t) in [(2, 3, 2), (3, 2, 2), (3, 3, 2)] {
        let spec = ModelSpec::new(m, n, t).unwrap();
        let r = model_check(&spec, 2024, 200, false, &lim()).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert_eq!(r.failures(), 0);
        for p in &r.properties {
            assert_eq!(p.passed, 200, "{}", p.name);
        }
        assert!(
            matches!(
                r.witness,
                WitnessOutcome::Distinct {
                    samples_ok: true,
                    ..
                }
            ),
            "{:?}",
            r.witness
        );
    }
}

fn random_point(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
    let small = rng.random_bool(0.7);
    (0..len)
        .map(|_| {
            if small {
                Rational::from_integer(rng.random_range(-1..=1).into())
            } else {
                Rational::new(
                    rng.random_range(-5..=5).into(),
                    rng.random_range(1..=4).into(),
                )
            }
        })
        .collect()
}

fn criterion_9() {
    let e7_steps: Vec<DetPresentation> = parse_script_file(format!("{SCRIPTS}/e7.rsc"))
        .unwrap()
        .steps
        .into_iter()
        .map(|s| DetPresentation::new(s.matrix, s.t, s.label).unwrap())
        .collect();
    let mut examples = vec![
        f1(),
        f2(),
        pres(&["x", "y", "z"], &[&["x", "z^2"], &["z^3", "y"]], 2),
        pres(
            &["x", "y", "z"],
            &[&["z", "x^2 + y^3"], &["x^2 + y^5", "z"]],
            2,
        ),
    ];
    examples.extend(e7_steps);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut on, mut total) = (0, 0);
    for p in &examples {
        for chart in ChartIndex::all(p.t(), p.n(), tjurina_core::Side::Row) {
            let cp = chart_presentation(p, &chart).unwrap();
            let stacked = stacked_matrix(p, &chart).unwrap().embed(cp.vars()).unwrap();
            let ms = minors(&stacked, p.t()).unwrap();
            for _ in 0..50 {
                let q = random_point(&mut rng, cp.vars().len());
                let by_minors = ms.iter().all(|g| g.evaluate(&q).is_zero());
                let by_chart = cp.generators().iter().all(|g| g.evaluate(&q).is_zero());
                assert_eq!(by_minors, by_chart, "{} chart {chart} at {q:?}", p.label());
                on += usize::from(by_chart);
                total += 1;
            }
        }
    }
    // Both outcomes must actually occur.
    assert!(on > 0 && on < total, "{on} of {total} points on the charts");
}

fn criterion_10() {
    let text = std::fs::read_to_string(format!("{SCRIPTS}/e7.rsc")).unwrap();
    let corrupted = text.replacen("matrix (y) (z)\n", "matrix (y) (-z)\n", 1);
    assert_ne!(corrupted, text);
    let report = run_script(&parse_script(&corrupted).unwrap(), &lim());
    assert!(!report.passed());
    let f = report.first_failure().unwrap();
    assert_eq!(
        (f.step.as_str(), f.step_number, f.chart.as_deref()),
        ("s3", 3, None)
    );
    let residue = f.residue.as_deref().expect("a residue polynomial");
    let vars = &parse_script(&corrupted).unwrap().steps[2].vars;
    assert!(!parse_poly(residue, vars).unwrap().is_zero());
    assert!(report.steps[..2].iter().all(|s| s.determinant.passed));
}

#[test]
fn acceptance() {
    type Check = Box<dyn Fn()>;
    let criteria: Vec<(&str, u64, Check)> = vec![
        (
            "1 chart {2} of F1 and its saturation",
            5,
            Box::new(criterion_1),
        ),
        ("2 both charts of F2 as displayed", 1, Box::new(criterion_2)),
        (
            "3 A4 splits into A1 and A2 and resolves",
            10,
            Box::new(criterion_3),
        ),
        (
            "4 E7 pipeline and the E7 incidences",
            60,
            Box::new(criterion_4),
        ),
        (
            "5 dimension formula (2,2,2)",
            30,
            Box::new(|| criterion_5(2, 2, 2)),
        ),
        (
            "5 dimension formula (2,3,2)",
            30,
            Box::new(|| criterion_5(2, 3, 2)),
        ),
        (
            "5 dimension formula (3,3,2)",
            30,
            Box::new(|| criterion_5(3, 3, 2)),
        ),
        (
            "5 dimension formula (3,3,3)",
            30,
            Box::new(|| criterion_5(3, 3, 3)),
        ),
        (
            "6 strata criterion separates F1 and F2",
            10,
            Box::new(criterion_6),
        ),
        ("7 non-normal transform", 10, Box::new(criterion_7)),
        (
            "8 model-lab suite, 200 trials per spec",
            30,
            Box::new(criterion_8),
        ),
        ("9 minors versus chart equations", 10, Box::new(criterion_9)),
        (
            "10 corrupted E7 script is caught",
            10,
            Box::new(criterion_10),
        ),
    ];
    let mut failed = Vec::new();
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let within = elapsed <= Duration::from_secs(*budget);
        let ok = outcome.is_ok() && within;
        let note = match (&outcome, within) {
            (Err(_), _) => " (check failed)".to_string(),
            (Ok(()), false) => format!(" (over the {budget} s budget)"),
            _ => String::new(),
        };
        println!(
            "{} criterion {name}: {:.3} s{note}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !ok {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
