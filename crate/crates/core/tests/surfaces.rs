use speclab::spectrum::{geodesic_distance, Grid};
use speclab::surfaces::{
    andrade_surface, cylinder_extents, flat_disk, hyperbolic_disk, labyrinth_patch,
    limit_set_sample, AndradeParams, ConformalPatch, LabyrinthParams,
};

fn golden() -> AndradeParams {
    AndradeParams::new((5f64.sqrt() - 1.0) / 2.0, 1.0).unwrap()
}

#[test]
fn labyrinth_crossings_are_long() {
    for n in 1..=4 {
        let params = LabyrinthParams::harmonic(n, [0.2, 0.1]);
        let patch = labyrinth_patch(params).unwrap();
        let dx = params.r_n / 64.0;
        let grid = Grid::build(&patch, dx).unwrap();
        let radius = |k: usize| {
            let (u, v) = grid.coords(k);
            u.hypot(v)
        };
        let inner: Vec<usize> = (0..grid.len())
            .filter(|&k| grid.in_region[k] && radius(k) < 1.0 + dx)
            .collect();
        let outer: Vec<usize> = (0..grid.len())
            .filter(|&k| grid.in_region[k] && radius(k) > 1.0 + params.r_n - dx)
            .collect();
        assert!(!inner.is_empty() && !outer.is_empty());
        let d = geodesic_distance(&grid, &inner, f64::INFINITY);
        let shortest = outer.iter().map(|&k| d[k]).fold(f64::INFINITY, f64::min);
        assert!(shortest.is_finite());
        assert!(
            shortest >= params.crossing_bound(),
            "n = {n}: {shortest} < {}",
            params.crossing_bound()
        );
    }
}

#[test]
fn andrade_limit_points_lie_in_the_shell() {
    let params = golden();
    let v_extent = 3.0;
    let patch = andrade_surface(params, 0.5, v_extent).unwrap();
    let pts = limit_set_sample(&patch, 0.1, 500, 11).unwrap();
    assert_eq!(pts.len(), 500);
    let worst = [-0.5, 0.0, 0.5].map(|u| cylinder_extents(&params, u, v_extent, 4001));
    let s1 = worst.iter().map(|c| c.s1).fold(0.0, f64::max);
    let l = worst.iter().map(|c| c.l).fold(0.0, f64::max);
    for p in &pts {
        assert!(
            p[0].hypot(p[1]) <= s1 * (1.0 + 1e-9) && p[2].abs() <= l * (1.0 + 1e-9),
            "{p:?}"
        );
    }
    assert_eq!(pts, limit_set_sample(&patch, 0.1, 500, 11).unwrap());
}

#[test]
fn limit_sampling_needs_an_escape_boundary() {
    let plane = ConformalPatch::new([0.0, 1.0], [0.0, 1.0], |_, _| 1.0, "square")
        .unwrap()
        .with_immersion(|u, v| [u, v, 0.0]);
    assert!(limit_set_sample(&plane, 0.1, 10, 1).is_err());
    assert!(limit_set_sample(&flat_disk(1.0).unwrap(), 0.1, 10, 1).is_ok());
}

#[test]
fn hyperbolic_mass_entries() {
    let dx = 1.0 / 32.0;
    let p = speclab::spectrum::discretize(&hyperbolic_disk(0.1).unwrap(), dx, None).unwrap();
    for (k, &n) in p.interior.iter().enumerate() {
        let (u, v) = p.grid.coords(n as usize);
        let lam = 2.0 / (1.0 - u * u - v * v);
        assert!((p.mass[k] / (lam * lam * dx * dx) - 1.0).abs() < 1e-12);
    }
}
