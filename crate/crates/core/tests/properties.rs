//! Randomized invariants of the filter bank, norms, maximal operator,
//! paraproducts and Euler right-hand side.

use lp_euler::euler::{euler_rhs, leray_project};
use lp_euler::field::calculus::{dealiased_product, divergence, gradient};
use lp_euler::field::io::{decode, encode, FieldData};
use lp_euler::field::random::{random_scalar, random_vector, SpectrumSpec};
use lp_euler::field::{Grid, GridField, VectorField};
use lp_euler::lp_bank::{LPFilterBank, Profile};
use lp_euler::maximal::{hl_maximal, MaximalConfig, Window};
use lp_euler::norms::{lp_norm, norm, NormSpec};
use lp_euler::paraproduct::bony;
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    prop_oneof![
        Just(Grid::new(2, 16).unwrap()),
        Just(Grid::new(2, 32).unwrap()),
        Just(Grid::new(3, 8).unwrap()),
    ]
}

fn scalar(grid: Grid, decay: f64, seed: u64) -> GridField {
    let top = (grid.n() / 2 - 1) as f64;
    random_scalar(grid, &SpectrumSpec::new(decay, 1.0, top, seed)).unwrap()
}

fn sup(f: &GridField) -> f64 {
    lp_norm(&f.to_physical(), f64::INFINITY)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_resum_and_separate(grid in grid_strategy(), seed in any::<u64>(), decay in 0.0f64..3.0) {
        let bank = LPFilterBank::new(grid, Profile::SmoothStep);
        let f = scalar(grid, decay, seed);
        let dec = bank.decompose(&f).unwrap();
        prop_assert!(sup(&dec.recompose().sub(&f)) <= 1e-12 * sup(&f));
        let l2 = lp_norm(&f, 2.0);
        for (j, b) in dec.blocks.iter().enumerate() {
            prop_assert!(lp_norm(b, 2.0) <= l2 * (1.0 + 1e-12));
            for k in j + 2..dec.blocks.len() {
                // ψ_j ψ_k = 0 once the annuli are two apart
                prop_assert!(bank.psi(j).iter().zip(bank.psi(k)).all(|(a, b)| a * b == 0.0));
                let both = bank.delta_j(b, k).unwrap();
                prop_assert!(both.spectral_max() <= 1e-14 * f.spectral_max(), "blocks {} and {} overlap", j, k);
            }
        }
    }

    #[test]
    fn norms_are_homogeneous(seed in any::<u64>(), a in -50.0f64..50.0, s in 0.0f64..3.0) {
        let grid = Grid::new(2, 32).unwrap();
        let bank = LPFilterBank::new(grid, Profile::SmoothStep);
        let f = scalar(grid, 2.0, seed);
        for spec in [NormSpec::tl(s, 1.0, 1.0).unwrap(), NormSpec::besov(s, 2.0, f64::INFINITY).unwrap()] {
            let n1 = norm(&bank, &f, &spec).unwrap();
            let na = norm(&bank, &f.scale(a), &spec).unwrap();
            prop_assert!(close(na, a.abs() * n1, 1e-12));
        }
    }

    #[test]
    fn norms_satisfy_triangle_inequality(seed in any::<u64>(), p in 1.0f64..4.0, q in 1.0f64..4.0) {
        let grid = Grid::new(2, 32).unwrap();
        let bank = LPFilterBank::new(grid, Profile::SmoothStep);
        let f = scalar(grid, 2.0, seed);
        let g = scalar(grid, 1.0, seed.wrapping_add(1));
        for spec in [NormSpec::tl(1.5, p, q).unwrap(), NormSpec::besov(1.5, p, q).unwrap()] {
            let lhs = norm(&bank, &f.add(&g), &spec).unwrap();
            let rhs = norm(&bank, &f, &spec).unwrap() + norm(&bank, &g, &spec).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tl_sits_between_besov_spaces(seed in any::<u64>(), p in 1.0f64..4.0, q in 1.0f64..4.0) {
        // Minkowski: B_{p,max(p,q)} ≤ F_{p,q} ≤ B_{p,min(p,q)}
        let grid = Grid::new(2, 32).unwrap();
        let bank = LPFilterBank::new(grid, Profile::SmoothStep);
        let f = scalar(grid, 1.5, seed);
        let f_norm = norm(&bank, &f, &NormSpec::tl(1.0, p, q).unwrap()).unwrap();
        let upper = norm(&bank, &f, &NormSpec::besov(1.0, p, p.min(q)).unwrap()).unwrap();
        let lower = norm(&bank, &f, &NormSpec::besov(1.0, p, p.max(q)).unwrap()).unwrap();
        prop_assert!(lower <= f_norm * (1.0 + 1e-12));
        prop_assert!(f_norm <= upper * (1.0 + 1e-12));
    }

    #[test]
    fn maximal_operator_is_sublinear_and_dominating(seed in any::<u64>(), c in -5.0f64..5.0) {
        let grid = Grid::new(2, 16).unwrap();
        let cfg = MaximalConfig::dyadic(grid, Window::Cube);
        let f = scalar(grid, 1.0, seed);
        let g = scalar(grid, 0.5, seed.wrapping_add(9));
        let mf = hl_maximal(&f, &cfg).real_values();
        let mg = hl_maximal(&g, &cfg).real_values();
        let mfg = hl_maximal(&f.add(&g), &cfg).real_values();
        let mcf = hl_maximal(&f.scale(c), &cfg).real_values();
        let abs_f = f.abs_values();
        for x in 0..grid.len() {
            prop_assert!(mfg[x] <= (mf[x] + mg[x]) * (1.0 + 1e-12) + 1e-14);
            prop_assert!(close(mcf[x], c.abs() * mf[x], 1e-12));
            prop_assert!(mf[x] >= abs_f[x] * (1.0 - 1e-12));
        }
    }

    #[test]
    fn leray_projection_is_idempotent(grid in grid_strategy(), seed in any::<u64>()) {
        let comps: Vec<GridField> = (0..grid.dim()).map(|i| scalar(grid, 1.0, seed.wrapping_add(i as u64))).collect();
        let u = VectorField::new(comps).unwrap();
        let p = leray_project(&u);
        let pp = leray_project(&p);
        prop_assert!(pp.sub(&p).max_magnitude() <= 1e-12 * p.max_magnitude());
        prop_assert!(sup(&divergence(&p)) <= 1e-10 * p.max_magnitude());
        let phi = scalar(grid, 2.0, seed.wrapping_add(17));
        prop_assert!(leray_project(&gradient(&phi)).max_magnitude() <= 1e-12 * gradient(&phi).max_magnitude());
    }

    #[test]
    fn bony_pieces_sum_to_the_product(seed in any::<u64>()) {
        let grid = Grid::new(2, 32).unwrap();
        let bank = LPFilterBank::new(grid, Profile::SmoothStep);
        let f = scalar(grid, 1.0, seed);
        let g = scalar(grid, 1.0, seed.wrapping_add(3));
        let sum = bony(&bank, &f, &g).unwrap().sum();
        let prod = dealiased_product(&f, &g);
        prop_assert!(sup(&sum.sub(&prod)) <= 1e-12 * sup(&prod));
    }

    #[test]
    fn euler_rhs_conserves_energy(grid in grid_strategy(), seed in any::<u64>()) {
        let k_hi = (grid.dealias_cutoff() as f64).min((grid.n() / 2 - 1) as f64);
        let u = random_vector(grid, &SpectrumSpec::new(2.0, 1.0, k_hi, seed)).unwrap();
        let r = euler_rhs(&u).unwrap().to_physical();
        let u = u.to_physical();
        let mut dot = 0.0;
        for (a, b) in u.components().iter().zip(r.components()) {
            dot += a.real_values().iter().zip(b.real_values()).map(|(x, y)| x * y).sum::<f64>();
        }
        let scale = u.max_magnitude() * r.max_magnitude() * grid.len() as f64;
        prop_assert!(dot.abs() <= 1e-12 * scale.max(1e-300));
        prop_assert!(sup(&divergence(&r)) <= 1e-10 * r.max_magnitude().max(1e-300));
    }

    #[test]
    fn field_files_round_trip(grid in grid_strategy(), seed in any::<u64>()) {
        let f = scalar(grid, 1.0, seed);
        let back = decode(&encode(&FieldData::Scalar(f.clone()))).unwrap();
        prop_assert_eq!(back, FieldData::Scalar(f));
        let u = random_vector(grid, &SpectrumSpec::new(1.0, 1.0, 3.0, seed)).unwrap();
        let back = decode(&encode(&FieldData::Vector(u.clone()))).unwrap();
        prop_assert_eq!(back, FieldData::Vector(u));
    }
}
