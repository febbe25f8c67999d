use nlfrac::geometry::{boundary_weight, build_grid, BoundaryMode, DomainSpec, Segment};
use nlfrac::neighbors::build_neighbors;
use nlfrac::operators::Discretization;
use nlfrac::potentials::{MaterialModel, MaterialPreset};
use nlfrac::verification::lipschitz::random_field;
use nlfrac::verification::oracle::{max_relative_deviation, OracleProblem};
use rand::SeedableRng;

fn setup(
    convex_concave: bool,
    mode: BoundaryMode,
    cracks: Vec<Segment>,
) -> (Discretization, Vec<Segment>) {
    let h = 1e-3;
    let eps = 4.0 * h;
    let mut spec = DomainSpec::rectangle(0.0, 15.0 * h, 0.0, 15.0 * h);
    spec.cracks = cracks.clone();
    let g = build_grid(&spec, h, eps).unwrap();
    let t = build_neighbors(&g, eps, &cracks).unwrap();
    let w = boundary_weight(&g, mode);
    let m = if convex_concave {
        MaterialModel::preset_convex_concave(MaterialPreset::Nu0245, eps).unwrap()
    } else {
        MaterialModel::preset(MaterialPreset::Nu0245, eps).unwrap()
    };
    (Discretization::new(g, t, w, mode, m).unwrap(), cracks)
}

fn check(convex_concave: bool, mode: BoundaryMode, cracks: Vec<Segment>, seed: u64) -> f64 {
    let (d, cracks) = setup(convex_concave, mode, cracks);
    let oracle = OracleProblem {
        grid: &d.grid,
        omega: &d.omega,
        material: &d.material,
        cracks: &cracks,
    };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let amp = d.material.f.r_bar() * d.material.horizon.sqrt();
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let u = random_field(&d, amp, &mut rng);
        let a = d.internal_force(&u).unwrap();
        let b = oracle.force(&u).unwrap();
        worst = worst.max(max_relative_deviation(&a, &b));
        let theta = d.hydrostatic_strain_field(&u);
        let pd: f64 = (0..d.len())
            .map(|i| d.bond_energy_density(&u, i) + d.dilatational_energy_density(theta[i], i))
            .sum::<f64>()
            * d.grid.cell_volume();
        let pd_ref = oracle.potential_energy(&u).unwrap();
        assert!((pd - pd_ref).abs() <= 1e-12 * pd_ref.abs(), "{pd} {pd_ref}");
    }
    worst
}

#[test]
fn production_matches_oracle_quadratic() {
    let w = check(false, BoundaryMode::Indicator, vec![], 1);
    assert!(w < 1e-12, "{w}");
}

#[test]
fn production_matches_oracle_convex_concave() {
    let w = check(true, BoundaryMode::Indicator, vec![], 2);
    assert!(w < 1e-12, "{w}");
}

#[test]
fn production_matches_oracle_with_taper_and_crack() {
    let crack = Segment::new([7.5e-3, 0.0], [7.5e-3, 6e-3]);
    let w = check(
        false,
        BoundaryMode::LinearTaper { width: 4e-3 },
        vec![crack],
        3,
    );
    assert!(w < 1e-12, "{w}");
}
