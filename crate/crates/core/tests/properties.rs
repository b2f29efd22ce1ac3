//! Property tests for the structural invariants of graphs, kernels, calculus
//! and functionals.

use std::collections::BTreeMap;

use proptest::prelude::*;
use rieszlab_core::builders::{build, free_product, lazify, BuilderSpec};
use rieszlab_core::calculus::{
    codifferential, differential, form_inner, gradient_length, resolvent, resolvent_sqrt, Calculus,
};
use rieszlab_core::functionals::{
    lp_functional_g, maximal_function, pseudo_gradient, tent_a, TentField,
};
use rieszlab_core::markov::MarkovOperator;
use rieszlab_core::spectral::SpectralDecomposition;
use rieszlab_core::vecops::{norm_p, project_mean_zero};
use rieszlab_core::{Edge, QuasiMetric, Space, WeightedGraph};

/// Random connected weighted graph: a random tree plus extra edges and loops.
fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n).prop_flat_map(|n| {
        let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
        (
            Just(n),
            parents,
            prop::collection::vec((0..n, 0..n, 0.1f64..3.0), 0..2 * n),
            prop::collection::vec(0.1f64..3.0, n - 1),
        )
            .prop_map(|(n, parents, extra, tree_w)| {
                let mut edges = BTreeMap::new();
                for (i, (&p, &w)) in parents.iter().zip(&tree_w).enumerate() {
                    edges.insert((p, i + 1), w);
                }
                for (u, v, w) in extra {
                    edges.entry((u.min(v), u.max(v))).or_insert(w);
                }
                WeightedGraph::from_edges(n, edges.into_iter().map(|((u, v), w)| Edge::new(u, v, w))).unwrap()
            })
    })
}

fn arb_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

fn inner(f: &[f64], g: &[f64], m: &[f64]) -> f64 {
    f.iter().zip(g).zip(m).map(|((a, b), w)| a * b * w).sum()
}

fn graph_and_two(max_n: usize) -> impl Strategy<Value = (WeightedGraph, Vec<f64>, Vec<f64>)> {
    arb_graph(max_n).prop_flat_map(|g| {
        let n = g.vertex_count();
        (Just(g), arb_values(n), arb_values(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_are_symmetric(g in arb_graph(14)) {
        for x in 0..g.vertex_count() {
            for (y, w) in g.neighbors(x) {
                prop_assert_eq!(g.weight(y, x), Some(w));
            }
        }
    }

    #[test]
    fn quasi_triangle_holds(g in arb_graph(12), beta in 1.0f64..3.5) {
        let q = QuasiMetric::power(&g, beta).unwrap();
        let c = q.triangle_constant();
        let n = g.vertex_count();
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    prop_assert!(q.rho(x, z) <= c * (q.rho(x, y) + q.rho(y, z)) * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn annuli_are_separated(g in arb_graph(14), beta in 1.0f64..3.0, k in 0.5f64..4.0) {
        let n = g.vertex_count();
        let q = QuasiMetric::power(&g, beta).unwrap();
        let space = Space::new(g, q, vec![]).unwrap();
        for x in 0..n {
            let ball = space.ball(x, k);
            for j in 1..4u32 {
                let annulus = space.annulus(x, k, j);
                if annulus.is_empty() {
                    continue;
                }
                let sep = space.set_distance(&ball.members, &annulus);
                prop_assert!(sep >= (j as f64).exp2() * k * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn kernels_are_stochastic_and_symmetric(g in arb_graph(12), steps in 1usize..30) {
        let p = MarkovOperator::new(&g);
        let n = g.vertex_count();
        let rows: Vec<_> = (0..n).map(|x| p.kernel_rows(x, steps)).collect();
        for (x, row) in rows.iter().enumerate() {
            prop_assert!(row.mass_defect(g.measure()) <= 1e-12);
            for y in 0..n {
                prop_assert!(row.symmetry_gap(&rows[y]) <= 1e-12 || x == y);
            }
        }
    }

    #[test]
    fn markov_is_self_adjoint_and_contractive((g, f, h) in graph_and_two(16)) {
        let p = MarkovOperator::new(&g);
        let m = g.measure();
        let pf = p.apply(&f).unwrap();
        let ph = p.apply(&h).unwrap();
        prop_assert!((inner(&pf, &h, m) - inner(&f, &ph, m)).abs() <= 1e-12);
        for q in [1.0, 2.0, f64::INFINITY] {
            prop_assert!(norm_p(&pf, m, q) <= norm_p(&f, m, q) * (1.0 + 1e-12));
        }
        let ones = vec![1.0; g.vertex_count()];
        prop_assert!(p.apply(&ones).unwrap().iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn calculus_identities((g, f, h) in graph_and_two(16)) {
        let m = g.measure();
        let df = differential(&g, &f).unwrap();
        let dh = differential(&g, &h).unwrap();
        // Adjointness <df, dh> = <f, d* dh>, and d* d = Delta.
        let lap = MarkovOperator::new(&g).laplacian(&h).unwrap();
        let dsdh = codifferential(&g, &dh);
        for (a, b) in dsdh.iter().zip(&lap) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let lhs = form_inner(&g, &df, &dh);
        let rhs = inner(&f, &dsdh, m);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        // Energy identity |grad f|_2^2 = <Delta f, f>.
        let grad = gradient_length(&g, &f).unwrap();
        let energy: f64 = grad.iter().zip(m).map(|(v, w)| v * v * w).sum();
        let lf = MarkovOperator::new(&g).laplacian(&f).unwrap();
        prop_assert!((energy - inner(&lf, &f, m)).abs() <= 1e-10 * (1.0 + energy));
    }

    #[test]
    fn series_matches_spectral_resolvents(g in arb_graph(10), s in 0.1f64..10.0, seed in 0u64..1000) {
        let lazy = lazify(&g, 0.5).unwrap();
        let n = lazy.vertex_count();
        let f: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * (seed as f64 + 0.5)).sin()).collect();
        let sd = SpectralDecomposition::new(&lazy).unwrap();
        let exact = Calculus::Spectral(&sd);
        let series = Calculus::series(1e-10);
        let a = resolvent(&lazy, &exact, s, &f).unwrap();
        let b = resolvent(&lazy, &series, s, &f).unwrap();
        let c = resolvent_sqrt(&lazy, &exact, s, &f).unwrap();
        let d = resolvent_sqrt(&lazy, &series, s, &f).unwrap();
        for i in 0..n {
            prop_assert!((a[i] - b[i]).abs() <= 1e-8);
            prop_assert!((c[i] - d[i]).abs() <= 1e-8);
        }
    }

    #[test]
    fn lazify_reaches_target(g in arb_graph(14), alpha in 0.05f64..0.95) {
        let lazy = lazify(&g, alpha).unwrap();
        prop_assert!(lazy.laziness() >= alpha - 1e-12);
        let again = lazify(&lazy, alpha).unwrap();
        prop_assert_eq!(again, lazy);
    }

    #[test]
    fn functionals_are_homogeneous((g, f, _h) in graph_and_two(10), c in -3.0f64..3.0) {
        let lazy = lazify(&g, 0.5).unwrap();
        let q = QuasiMetric::power(&lazy, 2.0).unwrap();
        let space = Space::new(lazy, q, vec![]).unwrap();
        let n = space.vertex_count();
        let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
        let mf = maximal_function(&space, &f).unwrap();
        let mcf = maximal_function(&space, &cf).unwrap();
        let gf = lp_functional_g(space.graph(), &Calculus::series(1e-12), 1.0, &f, 16).unwrap();
        let gcf = lp_functional_g(space.graph(), &Calculus::series(1e-12), 1.0, &cf, 16).unwrap();
        for i in 0..n {
            prop_assert!((mcf[i] - c.abs() * mf[i]).abs() <= 1e-12 * (1.0 + mf[i]));
            prop_assert!((gcf.values[i] - c.abs() * gf.values[i]).abs() <= 1e-10 * (1.0 + gf.values[i]));
            prop_assert!(mf[i] >= f[i].abs() - 1e-15);
        }
        let ones = vec![1.0; n];
        let g1 = lp_functional_g(space.graph(), &Calculus::series(1e-12), 1.0, &ones, 8).unwrap();
        prop_assert!(g1.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn tent_a_is_monotone(g in arb_graph(10), vals in prop::collection::vec(-1.0f64..1.0, 10 * 4), t in 0.0f64..1.0) {
        let n = g.vertex_count();
        let q = QuasiMetric::power(&g, 2.0).unwrap();
        let space = Space::new(g, q, vec![]).unwrap();
        let small = TentField::from_values(n, 4, vals[..n * 4].iter().map(|v| t * v).collect()).unwrap();
        let big = TentField::from_values(n, 4, vals[..n * 4].to_vec()).unwrap();
        let a = tent_a(&space, &small).unwrap();
        let b = tent_a(&space, &big).unwrap();
        for i in 0..n {
            prop_assert!(a[i] <= b[i] + 1e-15);
        }
    }

    #[test]
    fn pseudo_gradient_is_nonnegative(g in arb_graph(12), p in 1.05f64..=2.0, k in 1usize..20, seed in 0u64..1000) {
        let lazy = lazify(&g, 0.5).unwrap();
        let n = lazy.vertex_count();
        let f: Vec<f64> = (0..n).map(|i| (((i as u64 + 3) * (seed + 7)) % 11) as f64).collect();
        prop_assume!(f.iter().any(|v| *v > 0.0));
        let pg = pseudo_gradient(&lazy, p, &f, k).unwrap();
        prop_assert!(pg.j.iter().all(|v| *v >= -1e-12));
    }

    #[test]
    fn free_product_factorizes(a in 2usize..5, b in 2usize..5, cyc in any::<bool>()) {
        let first = build(&BuilderSpec::path(a)).unwrap();
        let second = build(&if cyc { BuilderSpec::cycle(b + 1) } else { BuilderSpec::path(b) }).unwrap();
        let prod = free_product(&first, &second).unwrap();
        let (n1, n2) = (first.vertex_count(), second.vertex_count());
        let g = prod.graph();
        for x1 in 0..n1 {
            for x2 in 0..n2 {
                let x = x1 * n2 + x2;
                let want = first.measure()[x1] * second.measure()[x2];
                prop_assert!((g.measure()[x] - want).abs() <= 1e-12 * want);
                for y1 in 0..n1 {
                    for y2 in 0..n2 {
                        let d = g.graph_distance(x, y1 * n2 + y2).unwrap();
                        let d1 = first.graph().graph_distance(x1, y1).unwrap();
                        let d2 = second.graph().graph_distance(x2, y2).unwrap();
                        prop_assert_eq!(d, d1.max(d2));
                    }
                }
            }
        }
    }
}

#[test]
fn mean_zero_projection_removes_mean() {
    let s = build(&BuilderSpec::sierpinski(2)).unwrap();
    let mut f: Vec<f64> = (0..s.vertex_count()).map(|i| i as f64).collect();
    project_mean_zero(&mut f, s.measure());
    assert!(inner(&f, &vec![1.0; f.len()], s.measure()).abs() < 1e-12);
}
