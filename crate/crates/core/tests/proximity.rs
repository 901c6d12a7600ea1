mod common;

use transprox::evaluate::spearman;
use transprox::ppr::exact_ppr_matrix;
use transprox::synthetic::power_law_digraph;
use transprox::{build_transpose_proximity, Direction};

#[test]
fn entries_bracketed_by_oracle() {
    for seed in 0..10 {
        let g = common::random_digraph(500 + seed);
        let n = g.node_count();
        let alpha = [0.2, 0.5, 0.8][seed as usize % 3];
        let fwd = exact_ppr_matrix(&g, alpha, 1e-12);
        let bwd = exact_ppr_matrix(&g.transpose(), alpha, 1e-12);
        for eps in [0.1, 0.02] {
            let p = build_transpose_proximity(&g, alpha, eps).unwrap();
            assert!(p.nnz() as f64 <= 4.0 * n as f64 / eps);
            for u in 0..n {
                for v in 0..n {
                    let exact = fwd[u][v] + bwd[v][u];
                    match p.get(u, v) {
                        Some(x) => {
                            assert!(x >= exact - 2.0 * eps - 1e-12 && x <= exact + 1e-12);
                        }
                        None => {
                            assert!(fwd[u][v] < eps && bwd[v][u] < eps, "({u},{v})");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn undirected_input_gives_symmetric_matrix() {
    for seed in 0..10 {
        let g = common::random_undirected(600 + seed);
        for eps in [0.1, 1e-3] {
            let p = build_transpose_proximity(&g, 0.5, eps).unwrap();
            assert!(p.matrix().is_symmetric(), "seed {seed} eps {eps}");
            let logged = p.log_transform().unwrap();
            assert!(logged.matrix().is_symmetric());
        }
    }
}

#[test]
fn row_and_column_sums_track_degrees() {
    let g = power_law_digraph(2000, 10.0, 2.2, 42).unwrap();
    let p = build_transpose_proximity(&g, 0.5, 1e-4).unwrap();
    p.check_invariants().unwrap();
    let as_f64 = |d: Vec<usize>| d.into_iter().map(|x| x as f64).collect::<Vec<_>>();
    let rows = p.row_sums().unwrap();
    let cols = p.col_sums().unwrap();
    let rho_out = spearman(&rows, &as_f64(g.degrees(Direction::Out)));
    let rho_in = spearman(&cols, &as_f64(g.degrees(Direction::In)));
    eprintln!("row-sum/out-degree rho = {rho_out:.4}, col-sum/in-degree rho = {rho_in:.4}");
    assert!(rho_out >= 0.8);
    assert!(rho_in >= 0.8);
}

#[test]
fn row_sums_split_into_forward_and_transpose_shares() {
    for seed in 0..6 {
        let g = common::random_digraph(700 + seed);
        let n = g.node_count();
        let bwd = exact_ppr_matrix(&g.transpose(), 0.5, 1e-12);
        let p = build_transpose_proximity(&g, 0.5, 1e-3).unwrap();
        let rows = p.row_sums().unwrap();
        for u in 0..n {
            let transpose_share: f64 = (0..n).map(|v| bwd[v][u]).sum();
            assert!(rows[u] <= 1.0 + transpose_share + 1e-12, "seed {seed} row {u}");
        }
    }
}

#[test]
fn star_center_row_sum_grows_with_fan_out() {
    // P(c,c) = 1, P(c,l) = 1/(4k) + 1/4, so the row sum is 1.25 + k/4.
    for k in [1u32, 3, 8] {
        let p = build_transpose_proximity(&common::star(k), 0.5, 1e-6).unwrap();
        let want = 1.25 + k as f64 / 4.0;
        assert!((p.row_sums().unwrap()[0] - want).abs() <= 2e-6 * (k as f64 + 1.0));
    }
}
