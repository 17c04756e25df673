mod common;

use num::{BigRational, One};
use proptest::prelude::*;

use common::{brute_max_separated, distinct_values, walk_enumeration, CarryAutomaton};
use resonance_core::boxdim::{
    attractor_cover, box_count, estimate_dimension, BoxCountRow, BoxCountSeries,
};
use resonance_core::config::{apply_override, config_from_table, parse_table};
use resonance_core::drop::{
    essential_deficit, essential_pair_bound, hit_probability, representation_threshold,
    DropInstance,
};
use resonance_core::marstrand::{audit_separated, greedy_separated, greedy_separated_exact};
use resonance_core::planar::{ball_cover, projection_profile, PlanarWindow};
use resonance_core::resonance::check_pair;
use resonance_core::{central_cantor, Budget, Ifs1d, Ifs2d, Scalar, Similitude2d};

fn q(n: i64, d: i64) -> Scalar {
    Scalar::exact(n, d)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Exact probabilities from positive integer weights.
fn normalised(weights: &[i64]) -> Vec<BigRational> {
    let total: i64 = weights.iter().sum();
    weights.iter().map(|&w| rat(w, total)).collect()
}

fn planar_system() -> impl Strategy<Value = Ifs2d> {
    (
        2usize..=4,
        0.15f64..0.45,
        0.0f64..std::f64::consts::TAU,
        any::<bool>(),
    )
        .prop_map(|(n, zeta, theta, reflect)| {
            let maps = (0..n)
                .map(|j| {
                    let a = std::f64::consts::TAU * j as f64 / n as f64;
                    let d = 1.0 - zeta;
                    Similitude2d::new(
                        zeta,
                        theta * (j + 1) as f64,
                        reflect && j == 0,
                        [d * a.cos(), d * a.sin()],
                    )
                    .unwrap()
                })
                .collect();
            Ifs2d::new(maps, [0.0, 0.0], 1.0).unwrap()
        })
}

fn rotated(ifs: &Ifs2d, phi: f64) -> Ifs2d {
    let (s, c) = phi.sin_cos();
    let rot = |p: [f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
    let maps = ifs
        .maps()
        .iter()
        .map(|f| {
            // R f R^{-1}: a reflection about the line at angle α becomes one
            // about α + φ, a rotation is unchanged.
            let angle = if f.reflect {
                f.angle + 2.0 * phi
            } else {
                f.angle
            };
            Similitude2d::new(f.scale, angle, f.reflect, rot(f.translation)).unwrap()
        })
        .collect();
    Ifs2d::new(maps, rot(ifs.center()), ifs.radius()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn carry_automaton_counts_values(
        base in 3usize..8,
        extra in prop::collection::btree_set(1usize..14, 1..5),
        levels in 1u32..6,
    ) {
        let digits: Vec<usize> = std::iter::once(0)
            .chain(extra.into_iter().filter(|&d| d < 2 * base))
            .collect();
        let aut = CarryAutomaton::new(base, &digits);
        let d64: Vec<u64> = digits.iter().map(|&d| d as u64).collect();
        prop_assert_eq!(aut.values(levels), distinct_values(base as u64, &d64, levels) as u128);
    }

    #[test]
    fn hit_probability_matches_enumeration(
        steps in prop::collection::btree_set(1u64..6, 1..4),
        seed in prop::collection::vec(1i64..9, 3),
        target in 0u64..=15,
    ) {
        let steps: Vec<u64> = steps.into_iter().collect();
        let probs = normalised(&seed[..steps.len()]);
        let scalars: Vec<Scalar> = probs.iter().cloned().map(Scalar::Exact).collect();
        let got = hit_probability(target, &steps, &scalars).unwrap();
        prop_assert_eq!(got.as_exact().unwrap(), &walk_enumeration(target, &steps, &probs));
    }

    #[test]
    fn threshold_is_tight(steps in prop::collection::btree_set(1u64..9, 1..4)) {
        let steps: Vec<u64> = steps.into_iter().collect();
        let (g, m0) = representation_threshold(&steps).unwrap();
        prop_assert_eq!(m0 % g, 0);
        let limit = (m0 + 3 * steps[steps.len() - 1]) as usize;
        let mut rep = vec![false; limit + 1];
        rep[0] = true;
        for m in 1..=limit {
            rep[m] = steps.iter().any(|&s| s as usize <= m && rep[m - s as usize]);
        }
        for m in (m0 as usize..=limit).step_by(g as usize) {
            prop_assert!(rep[m], "{m} not representable");
        }
        if m0 > g {
            prop_assert!(!rep[(m0 - g) as usize]);
        }
    }

    #[test]
    fn essential_bound_sits_below_the_sum(
        xi_den in 2i64..5,
        a in prop::collection::vec(1u64..4, 2..4),
        b in prop::collection::vec(1u64..4, 2..4),
    ) {
        let xi = q(1, xi_den);
        // Left-packed maps: translations 0, r_1, r_1 + r_2, ... scaled into [0, 1].
        let place = |e: &[u64]| -> Option<Vec<Scalar>> {
            let r: Vec<Scalar> = e.iter().map(|&k| xi.powi(k as i32)).collect();
            let total = r.iter().fold(Scalar::int(0), |s, x| &s + x);
            if total.to_f64() > 1.0 {
                return None;
            }
            let gap = &(&Scalar::int(1) - &total) / &Scalar::int(r.len() as i64 - 1);
            let mut t = vec![Scalar::int(0)];
            for i in 1..r.len() {
                t.push(&(&t[i - 1] + &r[i - 1]) + &gap);
            }
            Some(t)
        };
        let (Some(t), Some(t2)) = (place(&a), place(&b)) else {
            return Err(TestCaseError::reject("maps do not fit"));
        };
        let inst = DropInstance::new(xi, &a, &b, t, t2).unwrap();
        let bound = essential_pair_bound(&inst).unwrap().to_f64();
        prop_assert!(inst.q > 0.0 && inst.q < 1.0);
        prop_assert!(essential_deficit(&inst).unwrap() > 0.0);
        prop_assert!(bound <= inst.beta + inst.beta2);
        prop_assert!(inst.m % (inst.a * inst.b) == 0);
        prop_assert!(inst.m >= inst.m0 + inst.a_max.max(inst.b_max));
    }

    #[test]
    fn greedy_is_maximum(
        raw in prop::collection::vec((0i64..60, 1i64..12), 1..13),
        rho in 0i64..5,
    ) {
        let exact: Vec<(BigRational, BigRational)> =
            raw.iter().map(|&(lo, len)| (rat(lo, 7), rat(lo + len, 7))).collect();
        let rho_q = rat(rho, 7);
        let chosen = greedy_separated_exact(&exact, &rho_q);
        prop_assert!(audit_separated(&exact, &chosen, &rho_q));
        let float: Vec<(f64, f64)> = raw.iter().map(|&(lo, len)| (lo as f64, (lo + len) as f64)).collect();
        prop_assert_eq!(chosen.len(), brute_max_separated(&float, rho as f64));
        prop_assert_eq!(greedy_separated(&float, &(rho as f64)).len(), chosen.len());
    }

    #[test]
    fn box_count_is_scale_covariant(a_den in 3i64..9, lambda_n in 1i64..30, lambda_d in 1i64..30, k in 2u32..6) {
        let c = central_cantor(q(1, a_den)).unwrap();
        let lambda = q(lambda_n, lambda_d);
        let pairs: Vec<(Scalar, Scalar)> =
            c.maps().iter().map(|f| (f.ratio.clone(), &f.translation * &lambda)).collect();
        let big = Ifs1d::from_pairs(&pairs).unwrap();
        let delta = q(1, a_den).powi(k as i32);
        let small_cover = attractor_cover(&c, &delta, &Budget::default()).unwrap();
        let big_cover = attractor_cover(&big, &(&delta * &lambda), &Budget::default()).unwrap();
        prop_assert_eq!(small_cover.len(), big_cover.len());
        prop_assert_eq!(
            box_count(&small_cover, &delta).unwrap(),
            box_count(&big_cover, &(&delta * &lambda)).unwrap()
        );
    }

    #[test]
    fn estimate_recovers_power_laws(c in 1u64..50, exps in prop::collection::vec(1u32..3, 4..8)) {
        // N_k = c·2^{Σ e_j} on δ_k = 2^{-k}: the slope lies between the
        // smallest and largest increment.
        let mut rows = Vec::new();
        let mut count = c;
        for (k, e) in exps.iter().enumerate() {
            count <<= e;
            rows.push(BoxCountRow { k: k as u32, delta: q(1, 1 << k), count });
        }
        let est = estimate_dimension(&BoxCountSeries::new(rows).unwrap()).unwrap();
        let (lo, hi) = (*exps[1..].iter().min().unwrap(), *exps[1..].iter().max().unwrap());
        prop_assert!(est.value >= lo as f64 - 1e-9 && est.value <= hi as f64 + 1e-9);
    }

    #[test]
    fn resonance_is_symmetric(p in 2i64..6, e1 in 1i32..4, e2 in 1i32..4) {
        let base = q(1, p);
        let l = central_cantor(base.powi(e1)).unwrap_or_else(|_| central_cantor(q(1, 3)).unwrap());
        let r = central_cantor(base.powi(e2)).unwrap_or_else(|_| central_cantor(q(1, 3)).unwrap());
        let lr = check_pair(&l, &r, 1_000_000, 1e-12).unwrap();
        let rl = check_pair(&r, &l, 1_000_000, 1e-12).unwrap();
        prop_assert_eq!(lr.resonant, rl.resonant);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ball_covers_nest(ifs in planar_system(), fine in 0.01f64..0.05) {
        let coarse = ball_cover(&ifs, 4.0 * fine, &Budget::default()).unwrap();
        let fine = ball_cover(&ifs, fine, &Budget::default()).unwrap();
        for ball in &fine.balls {
            let parent = coarse
                .balls
                .iter()
                .find(|b| ball.word.0.starts_with(&b.word.0))
                .expect("some coarse ball is a prefix");
            let d = (ball.center[0] - parent.center[0]).hypot(ball.center[1] - parent.center[1]);
            prop_assert!(d + ball.radius <= parent.radius + 1e-9);
            prop_assert!(ball.radius <= fine.delta * (1.0 + 1e-9));
        }
    }

    #[test]
    fn ball_covers_rotate_with_the_system(ifs in planar_system(), phi in 0.0f64..std::f64::consts::PI, xi in 0.0f64..std::f64::consts::PI) {
        let delta = 0.03;
        let a = ball_cover(&ifs, delta, &Budget::default()).unwrap();
        let b = ball_cover(&rotated(&ifs, phi), delta, &Budget::default()).unwrap();
        prop_assert_eq!(a.len(), b.len());
        let mut pa = a.project(xi);
        let mut pb = b.project(xi + phi);
        pa.sort_by(|x, y| x.0.total_cmp(&y.0));
        pb.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (x, y) in pa.iter().zip(&pb) {
            prop_assert!((x.0 - y.0).abs() < 1e-9 && (x.1 - y.1).abs() < 1e-9);
        }
    }

    #[test]
    fn profile_stays_below_one(ifs in planar_system()) {
        let win = PlanarWindow::for_system(&ifs, 2, 5).unwrap();
        let profile = projection_profile(&ifs, 8, &win, &Budget::default()).unwrap();
        for row in &profile.rows {
            prop_assert!(row.estimate.value <= 1.0 + row.estimate.stderr + 0.05, "{}", row.estimate.value);
        }
    }

    #[test]
    fn override_order_wins(k1 in 2u32..8, k2 in 9u32..14) {
        let mut table = parse_table(&format!("command = \"dim\"\na = \"1/3\"\nk_max = {k1}\n")).unwrap();
        apply_override(&mut table, &format!("--k_max={k2}")).unwrap();
        let cfg = config_from_table(&table).unwrap();
        prop_assert_eq!(cfg.k_max, Some(k2));
    }
}

#[test]
fn probabilities_must_sum_to_one() {
    let probs = [Scalar::Exact(rat(1, 2)), Scalar::Exact(rat(1, 3))];
    assert!(hit_probability(3, &[1, 2], &probs).is_err());
    let ok = [
        Scalar::Exact(rat(1, 2)),
        Scalar::Exact(BigRational::one() - rat(1, 2)),
    ];
    assert!(hit_probability(3, &[1, 2], &ok).is_ok());
}
