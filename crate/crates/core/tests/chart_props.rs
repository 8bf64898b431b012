use std::sync::Arc;

use num_traits::Zero;
use proptest::prelude::*;

use tjurina_core::detvar::{
    minors, rank_at, reduce_presentation, strata_report, transpose_presentation,
};
use tjurina_core::ideal::dimension_of;
use tjurina_core::modellab::{model_check, ModelSpec};
use tjurina_core::poly::ratio;
use tjurina_core::tjurina::{
    chart_matrix, chart_presentation, chart_transition, eliminate_linear, stacked_matrix,
};
use tjurina_core::{
    ChartIndex, DetPresentation, GroebnerLimits, Monomial, PolyMatrix, Polynomial, Rational, Side,
    StrataReport, VarSet,
};

fn vars() -> Arc<VarSet> {
    VarSet::new(["x", "y", "z"]).unwrap()
}

fn entry() -> impl Strategy<Value = Polynomial> {
    entry_with(2, 3)
}

fn entry_with(max_exp: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(
        (-3i64..=3, prop::array::uniform3(0u32..=max_exp)),
        0..=max_terms,
    )
    .prop_map(|terms| {
        Polynomial::from_terms(
            &vars(),
            terms
                .into_iter()
                .map(|(c, e)| (Monomial::from_exponents(e.to_vec()), ratio(c, 1))),
        )
    })
}

/// A random presentation with m, n in 1..=3 and t in 1..=min(m, n).
fn presentation() -> impl Strategy<Value = DetPresentation> {
    presentation_of(entry().boxed())
}

/// Squarefree entries with at most two terms. Denser random minors can send
/// Buchberger into coefficient blow-up long before any cap trips.
fn light_presentation() -> impl Strategy<Value = DetPresentation> {
    presentation_of(entry_with(1, 2).boxed())
}

fn presentation_of(entry: BoxedStrategy<Polynomial>) -> impl Strategy<Value = DetPresentation> {
    (1usize..=3, 1usize..=3)
        .prop_flat_map(move |(m, n)| {
            (
                Just(m),
                Just(n),
                1..=m.min(n),
                prop::collection::vec(entry.clone(), m * n),
            )
        })
        .prop_map(|(m, n, t, entries)| {
            DetPresentation::new(PolyMatrix::new(&vars(), m, n, entries).unwrap(), t, "").unwrap()
        })
}

fn small_point(len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-1i64..=1).prop_map(|c| ratio(c, 1)), len)
}

fn names(ps: &[Polynomial]) -> Vec<String> {
    ps.iter().map(ToString::to_string).collect()
}

fn pick_chart(p: &DetPresentation, side: Side, k: usize) -> ChartIndex {
    let width = if side == Side::Row { p.n() } else { p.m() };
    let all = ChartIndex::all(p.t(), width, side);
    all[k % all.len()].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minors_are_transpose_invariant(p in presentation()) {
        let mut a = names(&minors(p.matrix(), p.t()).unwrap());
        let mut b = names(&minors(&p.matrix().transpose(), p.t()).unwrap());
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn rank_matches_minors(p in presentation(), pt in small_point(3)) {
        let vanish = minors(p.matrix(), p.t()).unwrap().iter().all(|g| g.evaluate(&pt).is_zero());
        prop_assert_eq!(rank_at(p.matrix(), &pt) < p.t(), vanish);
    }

    #[test]
    fn transpose_duality(p in presentation(), k in 0usize..8) {
        let chart = pick_chart(&p, Side::Column, k);
        let row = ChartIndex::row(&chart.one_based()).unwrap();
        let lhs = chart_presentation(&p, &chart).unwrap();
        let rhs = chart_presentation(&transpose_presentation(&p), &row).unwrap();
        prop_assert_eq!(lhs.vars().names(), rhs.vars().names());
        prop_assert_eq!(names(lhs.generators()), names(rhs.generators()));
    }

    #[test]
    fn chart_rows_are_independent(p in presentation(), k in 0usize..8, coords in prop::collection::vec(-4i64..=4, 9)) {
        let chart = pick_chart(&p, Side::Row, k);
        let a = chart_matrix(&chart, p.t(), p.n()).unwrap();
        let pt: Vec<Rational> = (0..a.vars().len()).map(|i| ratio(coords[i], 1)).collect();
        prop_assert_eq!(a.evaluate(&pt).rank(), p.t() - 1);
    }

    #[test]
    fn minors_match_chart_equations(p in presentation(), k in 0usize..8, pt in small_point(12)) {
        let chart = pick_chart(&p, Side::Row, k);
        let cp = chart_presentation(&p, &chart).unwrap();
        let stacked = stacked_matrix(&p, &chart).unwrap().embed(cp.vars()).unwrap();
        let q = &pt[..cp.vars().len()];
        let by_minors = minors(&stacked, p.t()).unwrap().iter().all(|g| g.evaluate(q).is_zero());
        let by_chart = cp.generators().iter().all(|g| g.evaluate(q).is_zero());
        prop_assert_eq!(by_minors, by_chart);
    }

    #[test]
    fn stacked_reduction_agrees_with_formula(p in presentation(), k in 0usize..8) {
        prop_assume!(p.t() >= 2);
        // Germs at the origin: drop constant terms so F(0) = 0.
        let p = DetPresentation::new(
            p.matrix().map(|e| e - &Polynomial::constant(e.vars(), e.constant_term())),
            p.t(),
            "",
        )
        .unwrap();
        let chart = pick_chart(&p, Side::Row, k);
        let cp = chart_presentation(&p, &chart).unwrap();
        let stacked = DetPresentation::new(stacked_matrix(&p, &chart).unwrap(), p.t(), "").unwrap();
        let reduced = reduce_presentation(&stacked).unwrap();
        prop_assert_eq!(reduced.t(), 1);
        prop_assert_eq!(reduced.matrix(), cp.matrix());
    }

    #[test]
    fn elimination_is_sound(p in presentation(), k in 0usize..8, pt in small_point(12)) {
        let chart = pick_chart(&p, Side::Row, k);
        let cp = chart_presentation(&p, &chart).unwrap();
        let e = eliminate_linear(&cp);
        for (v, g) in e.ledger() {
            let h = &Polynomial::var(e.vars(), *v) - g;
            prop_assert!(!h.involves(*v));
        }
        let vanish = |gens: &[Polynomial], q: &[Rational]| gens.iter().all(|g| g.evaluate(q).is_zero());
        let q = &pt[..cp.vars().len()];
        prop_assert_eq!(vanish(cp.generators(), q), vanish(&e.full_ideal(), q));
        // Lifted points satisfy the ledger, and then both descriptions agree.
        let lifted = e.lift_point(q);
        let ledger: Vec<Polynomial> = e.ledger().iter().map(|(_, g)| g.clone()).collect();
        prop_assert!(vanish(&ledger, &lifted));
        prop_assert_eq!(vanish(cp.generators(), &lifted), vanish(e.generators(), &lifted));
    }

    #[test]
    fn strata_reports_reproduce_from_dims(p in light_presentation()) {
        let lim = GroebnerLimits::default();
        if let Ok(r) = strata_report(&p, &lim) {
            let again = StrataReport::from_dims(r.m, r.n, r.t, r.ambient_dim, r.dims.clone());
            prop_assert_eq!(again, r);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chart_coherence(width in 2usize..=4, t in 2usize..=3, pick in (0usize..16, 0usize..16), coords in prop::collection::vec((-4i64..=4, 1i64..=3), 8)) {
        prop_assume!(t <= width);
        let all = ChartIndex::all(t, width, Side::Row);
        let i = &all[pick.0 % all.len()];
        let j = &all[pick.1 % all.len()];
        let a: Vec<Rational> = coords.iter().take((t - 1) * (width - t + 1)).map(|&(n, d)| ratio(n, d)).collect();
        match chart_transition(i, j, width, &a) {
            Ok(b) => prop_assert_eq!(chart_transition(j, i, width, &b).unwrap(), a),
            Err(_) => prop_assert!(i != j),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn model_suite_holds_for_any_seed(seed in any::<u64>(), spec in prop::sample::select(vec![(2usize, 2usize, 2usize), (2, 3, 2), (3, 2, 2), (3, 3, 2), (3, 3, 3), (2, 3, 1)])) {
        let spec = ModelSpec::new(spec.0, spec.1, spec.2).unwrap();
        let r = model_check(&spec, seed, 8, false, &GroebnerLimits::default()).unwrap();
        prop_assert!(r.all_passed(), "{:?}", r);
    }
}

/// Whenever the chart has the dimension of X, its codimension in
/// ambient-plus-chart space is m(n-t+1).
#[test]
fn equidimensional_charts_are_determinantal() {
    let lim = GroebnerLimits::default();
    let v = VarSet::new(["x", "y", "z", "w"]).unwrap();
    let f1 = PolyMatrix::parse(&v, &[vec!["w^3", "y", "x"], vec!["z", "w", "y^3"]]).unwrap();
    let mut checked = 0;
    for p in [
        DetPresentation::new(f1.clone(), 2, "").unwrap(),
        DetPresentation::new(f1.transpose(), 2, "").unwrap(),
    ] {
        let dim_x = dimension_of(p.vars(), &p.ideal(), &lim).unwrap();
        for chart in ChartIndex::all(p.t(), p.n(), Side::Row) {
            let cp = chart_presentation(&p, &chart).unwrap();
            let d = dimension_of(cp.vars(), cp.generators(), &lim).unwrap();
            if d == dim_x {
                let codim = cp.vars().len() as i64 - d;
                assert_eq!(codim, (p.m() * (p.n() - p.t() + 1)) as i64, "chart {chart}");
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}
