use nlfrac::diagnostics::{crack_length, l2_difference, CrackTip};
use nlfrac::geometry::BoundaryMode;
use nlfrac::geometry::{build_grid, DomainSpec, Grid, Segment, Vec2};
use nlfrac::neighbors::{build_neighbors, build_neighbors_brute_force};
use nlfrac::scenario::{parse_config_str, presets};
use nlfrac::verification::suite::square_disc;
use proptest::prelude::*;

fn grid(h: f64) -> Grid {
    build_grid(&DomainSpec::rectangle(0.0, 0.016, 0.0, 0.016), h, 0.004).unwrap()
}

fn field(n: usize, vals: &[f64]) -> Vec<Vec2> {
    (0..n)
        .map(|k| [vals[(2 * k) % vals.len()], vals[(2 * k + 1) % vals.len()]])
        .collect()
}

fn point() -> impl Strategy<Value = Vec2> {
    (-0.002..0.018f64, -0.002..0.018f64).prop_map(|(x, y)| [x, y])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn neighbor_table_is_symmetric_under_random_cracks(a in point(), b in point(), c in point(), d in point()) {
        let g = grid(1e-3);
        let cracks = [Segment::new(a, b), Segment::new(c, d)];
        let t = build_neighbors(&g, 0.004, &cracks).unwrap();
        t.check_symmetry().unwrap();
        let brute = build_neighbors_brute_force(&g, 0.004, &cracks).unwrap();
        prop_assert_eq!(t, brute);
    }

    #[test]
    fn l2_difference_is_a_metric(
        a in prop::collection::vec(-1.0..1.0f64, 1..64),
        b in prop::collection::vec(-1.0..1.0f64, 1..64),
        c in prop::collection::vec(-1.0..1.0f64, 1..64),
        k in -4.0..4.0f64,
    ) {
        let (g1, g2) = (grid(2e-3), grid(1e-3));
        let (fa, fb, fc) = (field(g1.len(), &a), field(g2.len(), &b), field(g2.len(), &c));
        let ab = l2_difference(&g1, &fa, &g2, &fb).unwrap();
        let ba = l2_difference(&g2, &fb, &g1, &fa).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.max(1e-300));
        prop_assert_eq!(l2_difference(&g2, &fb, &g2, &fb).unwrap(), 0.0);
        let ac = l2_difference(&g1, &fa, &g2, &fc).unwrap();
        let bc = l2_difference(&g2, &fb, &g2, &fc).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        let scale = |f: &[Vec2]| f.iter().map(|v| [k * v[0], k * v[1]]).collect::<Vec<_>>();
        let kab = l2_difference(&g1, &scale(&fa), &g2, &scale(&fb)).unwrap();
        prop_assert!((kab - k.abs() * ab).abs() <= 1e-12 * (1.0 + kab));
    }

    #[test]
    fn rigid_translation_carries_no_force(i in -64i32..64, j in -64i32..64) {
        let d = square_disc(12, false, BoundaryMode::Indicator).unwrap();
        let shift = [i as f64 * 2f64.powi(-20), j as f64 * 2f64.powi(-20)];
        let u: Vec<Vec2> = d.grid.interior.iter().map(|&m| if m { shift } else { [0.0; 2] }).collect();
        let f = d.internal_force(&u).unwrap();
        for (p, force) in d.grid.coords.iter().zip(&f) {
            if d.grid.domain.boundary_distance(*p) > d.material.horizon + d.grid.h {
                prop_assert_eq!(*force, [0.0, 0.0]);
            }
        }
    }

    #[test]
    fn more_damage_never_shortens_the_crack(z in prop::collection::vec(0.0..2.0f64, 1..200), bump in 0.0..1.0f64) {
        let g = grid(1e-3);
        let tip = CrackTip::upward([0.008, 0.004], 0.004);
        let za: Vec<f64> = (0..g.len()).map(|k| z[k % z.len()]).collect();
        let zb: Vec<f64> = za.iter().map(|v| v + bump).collect();
        let la = crack_length(&za, &g, &tip).unwrap();
        let lb = crack_length(&zb, &g, &tip).unwrap();
        prop_assert!(la >= 0.004 && lb >= la);
    }

    #[test]
    fn config_parser_never_panics(text in "(\\PC|\n|=|\\[|\\]){0,200}") {
        let _ = parse_config_str(&text, "fuzz");
    }

    #[test]
    fn config_parser_survives_line_edits(line in 0usize..60, junk in "[a-z_ =.0-9\\[\\]-]{0,24}") {
        let base = presets::relaxation().to_ini();
        let mut lines: Vec<&str> = base.lines().collect();
        let at = line.min(lines.len());
        lines.insert(at, &junk);
        let _ = parse_config_str(&lines.join("\n"), "fuzz");
    }
}
