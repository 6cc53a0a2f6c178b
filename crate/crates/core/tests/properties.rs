use proptest::prelude::*;

use mirrorgeo::costs::{Adversary, CostFunction};
use mirrorgeo::game_value::{tree_payoff, tree_payoff_mc, value_lower_bound, SignTree, ValueBudget};
use mirrorgeo::geometry::{BallSpec, GeometryPair};
use mirrorgeo::md;
use mirrorgeo::prox::bregman_project;
use mirrorgeo::regularizers::Regularizer;

fn vec_in(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, d)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bregman_three_point(a in vec_in(4), b in vec_in(4), c in vec_in(4), r in 1.2f64..3.0) {
        let reg = Regularizer::psi_r(r, 4).unwrap();
        let lhs = reg.bregman(&a, &c).unwrap();
        let gb = reg.grad(&b).unwrap();
        let gc = reg.grad(&c).unwrap();
        let diff: Vec<f64> = gb.iter().zip(&gc).map(|(x, y)| x - y).collect();
        let amb: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        let rhs = reg.bregman(&a, &b).unwrap() + reg.bregman(&b, &c).unwrap() + dot(&diff, &amb);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn bregman_nonnegative(a in vec_in(3), b in vec_in(3)) {
        let reg = Regularizer::psi_r(1.7, 3).unwrap();
        prop_assert!(reg.bregman(&a, &b).unwrap() >= -1e-12);
    }

    #[test]
    fn projection_is_feasible(y in prop::collection::vec(-4.0f64..4.0, 5), p in 1.1f64..4.0) {
        let ball = BallSpec::lp(p, 5).unwrap();
        let reg = Regularizer::euclidean(5);
        let res = bregman_project(&reg, &ball, &y).unwrap();
        prop_assert!(ball.gauge(&res.point).unwrap() <= 1.0 + 1e-6);
        if ball.gauge(&y).unwrap() <= 1.0 {
            for (u, v) in res.point.iter().zip(&y) {
                prop_assert!((u - v).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn md_iterates_stay_feasible(seed in 0u64..1000, p in 1.2f64..3.0) {
        let w = BallSpec::lp(p, 3).unwrap();
        let x = BallSpec::lp(p / (p - 1.0), 3).unwrap();
        let pair = GeometryPair::new(w.clone(), x.clone()).unwrap();
        let reg = Regularizer::euclidean(3).bind(&w).unwrap();
        let mut state = md::init(&reg, &pair, 50).unwrap();
        let mut adv = Adversary::random_vertex(x, seed);
        for t in 1..=50 {
            let f = adv.next_cost(&state.w, t).unwrap();
            state.advance(&f.subgradient(&state.w).unwrap()).unwrap();
            prop_assert!(w.gauge(&state.w).unwrap() <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn subgradient_inequality(x in vec_in(3), y in -1.0f64..1.0, w in vec_in(3), v in vec_in(3)) {
        for f in [CostFunction::abs_loss(x.clone(), y, 1.0).unwrap(), CostFunction::hinge(x.clone(), y.signum()).unwrap(), CostFunction::Linear { x: x.clone() }] {
            let g = f.subgradient(&w).unwrap();
            let step: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
            prop_assert!(f.eval(&v).unwrap() >= f.eval(&w).unwrap() + dot(&g, &step) - 1e-12);
        }
    }

    #[test]
    fn gauge_is_a_norm(a in vec_in(4), b in vec_in(4), s in -3.0f64..3.0, p in 1.0f64..6.0) {
        let ball = BallSpec::lp(p, 4).unwrap();
        let n = |v: &[f64]| ball.gauge(v).unwrap();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let scaled: Vec<f64> = a.iter().map(|x| s * x).collect();
        prop_assert!(n(&sum) <= n(&a) + n(&b) + 1e-12);
        prop_assert!((n(&scaled) - s.abs() * n(&a)).abs() <= 1e-9 * (1.0 + n(&a)));
    }

    #[test]
    fn dual_norm_is_support(a in vec_in(4), x in vec_in(4), p in 1.1f64..6.0) {
        let ball = BallSpec::lp(p, 4).unwrap();
        let dn = ball.dual_norm(&x).unwrap();
        prop_assert!(dot(&a, &x) <= dn * ball.gauge(&a).unwrap() + 1e-9);
        let s = ball.support_point(&x).unwrap();
        prop_assert!((dot(&s, &x) - dn).abs() <= 1e-9 * (1.0 + dn));
    }

    #[test]
    fn tree_payoff_sign_flip(nodes in prop::collection::vec(vec_in(2), 7), flip in 0usize..7) {
        let pair = GeometryPair::new(BallSpec::l2(2), BallSpec::l2(2)).unwrap();
        let tree = SignTree::new(3, 2, nodes.clone(), None).unwrap();
        let mut flipped = nodes;
        flipped[flip] = flipped[flip].iter().map(|v| -v).collect();
        let swapped = swap_subtrees(&flipped, flip);
        let other = SignTree::new(3, 2, swapped, None).unwrap();
        let a = tree_payoff(&tree, &pair).unwrap();
        let b = tree_payoff(&other, &pair).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }
}

/// Exchange the left and right subtrees below heap node `i`.
fn swap_subtrees(nodes: &[Vec<f64>], i: usize) -> Vec<Vec<f64>> {
    let mut out = nodes.to_vec();
    let mut left = vec![2 * i + 1];
    let mut right = vec![2 * i + 2];
    while left[0] < nodes.len() {
        for (l, r) in left.iter().zip(&right) {
            out[*l] = nodes[*r].clone();
            out[*r] = nodes[*l].clone();
        }
        left = left.iter().flat_map(|l| [2 * l + 1, 2 * l + 2]).collect();
        right = right.iter().flat_map(|r| [2 * r + 1, 2 * r + 2]).collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mc_payoff_matches_exact(nodes in prop::collection::vec(vec_in(2), 15), seed in 0u64..100) {
        let pair = GeometryPair::new(BallSpec::l1(2), BallSpec::linf(2)).unwrap();
        let tree = SignTree::new(4, 2, nodes, None).unwrap();
        let exact = tree_payoff(&tree, &pair).unwrap();
        let mc = tree_payoff_mc(&tree, &pair, 100_000, seed).unwrap();
        prop_assert!((mc.mean - exact).abs() <= 5.0 * mc.std_err + 1e-9);
    }
}

#[test]
fn value_monotone_under_inclusion() {
    // A larger data ball can only help the adversary.
    let small = GeometryPair::new(BallSpec::l2(2), BallSpec::l1(2)).unwrap();
    let big = GeometryPair::new(BallSpec::l2(2), BallSpec::l2(2)).unwrap();
    for n in [1, 2, 3] {
        let a = value_lower_bound(&small, n, ValueBudget::default()).unwrap();
        let b = value_lower_bound(&big, n, ValueBudget::default()).unwrap();
        assert!(a.value <= b.value + 1e-9, "n={n}: {} > {}", a.value, b.value);
    }
}

#[test]
fn entropy_simplex_sign_greedy_example() {
    let pair = GeometryPair::new(BallSpec::simplex(4), BallSpec::linf(4)).unwrap();
    let reg = Regularizer::entropy(4).bind(&pair.w_ball).unwrap();
    let mut adv = Adversary::sign_greedy(BallSpec::linf(4));
    let trace = md::run(&reg, &pair, &mut adv, 1024).unwrap();
    let bound = 2.0 * (4f64.ln() / 1024.0).sqrt();
    assert!((bound - 0.0736).abs() < 1e-4);
    assert!(trace.final_regret() <= bound + 1e-6, "{} > {bound}", trace.final_regret());
    assert!(trace.bound_holds(1e-9));
}
