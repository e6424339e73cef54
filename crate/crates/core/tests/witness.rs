use speclab::comparison::{convexity_data, solve_h, CurvatureBound};
use speclab::spectrum::{barta_witness, ConvexDomain, CoverBall, WitnessBarriers};
use speclab::surfaces::flat_disk;
use speclab::Error;

fn pair(r1: f64) -> [CoverBall; 2] {
    [
        CoverBall {
            center: [0.5, 0.0, 0.0],
            radius: r1,
        },
        CoverBall {
            center: [-0.5, 0.0, 0.0],
            radius: r1,
        },
    ]
}

#[test]
fn witness_preconditions_and_bound() {
    let model = solve_h(CurvatureBound::from_b(0.0), 2.5, 1e-3).unwrap();
    let data = convexity_data(&model, 1.0).unwrap();
    let domain = ConvexDomain::from_convexity(&data, &model, [0.0; 3]);
    let patch = flat_disk(1.0).unwrap();
    let barriers = WitnessBarriers {
        model: &model,
        theta: 1.0,
        r: 2.0,
    };
    let dx = 1.0 / 512.0;

    let rep = barta_witness(&patch, dx, &domain, &pair(0.02), 0.02, &barriers).unwrap();
    assert!(rep.min_w1 > 0.0);
    assert!(
        rep.measured_bound > 0.0 && rep.measured_bound >= rep.baseline,
        "{rep:?}"
    );
    assert!(rep.cover_sum <= rep.r1);
    assert_eq!(rep.sup_norms.len(), 2);

    let one = [pair(0.02)[0]];
    assert!(matches!(
        barta_witness(&patch, dx, &domain, &one, 0.02, &barriers),
        Err(Error::NonPositive(_))
    ));
    assert!(barta_witness(&patch, dx, &domain, &pair(0.03), 0.02, &barriers).is_err());
    assert!(barta_witness(&patch, dx, &domain, &pair(0.02), -1.0, &barriers).is_err());
}
