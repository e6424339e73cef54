use speclab::hausdorff::{
    cover_measure, dimension_fit, dyadic_schedule, measure_limit, Gauge, MeasureVerdict,
    PointCloud, Strategy,
};

#[test]
fn square_measure_is_positive_under_both_strategies() {
    let sq = PointCloud::square_lattice(316);
    let g = Gauge::square(0.25).unwrap();
    let deltas = dyadic_schedule(3.0, 6.0, 0.5);
    for strategy in [Strategy::Grid, Strategy::Greedy] {
        let rep = measure_limit(&sq, &g, &deltas, strategy).unwrap();
        assert_eq!(rep.verdict, MeasureVerdict::Positive, "{strategy:?}");
        let lo = rep.sums.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(
            rep.packing_lower_bound.is_some_and(|b| b > 0.0 && b <= lo),
            "{strategy:?}: {rep:?}"
        );
    }
}

#[test]
fn dimension_estimates() {
    let deltas = dyadic_schedule(3.0, 7.0, 1.0);
    let seg = dimension_fit(&PointCloud::segment(100_000), &deltas).unwrap();
    assert!((seg.dimension.unwrap() - 1.0).abs() < 0.05, "{seg:?}");
    let sq = dimension_fit(&PointCloud::square_lattice(400), &deltas).unwrap();
    assert!((sq.dimension.unwrap() - 2.0).abs() < 0.1, "{sq:?}");
}

#[test]
fn scales_outside_the_gauge_range_are_refused() {
    let g = Gauge::square(0.25).unwrap();
    let seg = PointCloud::segment(1000);
    assert!(cover_measure(&seg, &g, 0.5, Strategy::Grid).is_err());
    assert!(measure_limit(&seg, &g, &dyadic_schedule(3.0, 5.0, 1.0), Strategy::Grid).is_err());
}
