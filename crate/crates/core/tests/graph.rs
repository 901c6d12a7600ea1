use std::io::Cursor;
use std::path::Path;

use proptest::prelude::*;
use transprox::graph::{read_edge_list, write_edge_list};
use transprox::{degree_histogram, load_edge_list, Direction, Graph, GraphKind, LoadedGraph};

fn edges_strategy() -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (1usize..40).prop_flat_map(|n| {
        let e = prop::collection::vec((0..n as u32, 0..n as u32), 0..120);
        (Just(n), e)
    })
}

fn kind_strategy() -> impl Strategy<Value = GraphKind> {
    prop_oneof![Just(GraphKind::Directed), Just(GraphKind::Undirected)]
}

proptest! {
    #[test]
    fn write_then_reload_is_identity((n, edges) in edges_strategy(), kind in kind_strategy(), offset in 0u64..1000) {
        let graph = Graph::from_edges(n, &edges, kind).unwrap();
        let ids: Vec<u64> = (0..n as u64).map(|i| i * 3 + offset).collect();
        let loaded = LoadedGraph { graph, ids };
        let mut buf = Vec::new();
        write_edge_list(&loaded, &mut buf).unwrap();
        let back = read_edge_list(Cursor::new(buf), Path::new("mem"), kind).unwrap();
        prop_assert_eq!(&back.ids, &loaded.ids);
        prop_assert_eq!(&back.graph, &loaded.graph);
    }

    #[test]
    fn out_histogram_equals_transposed_in_histogram((n, edges) in edges_strategy(), kind in kind_strategy()) {
        let g = Graph::from_edges(n, &edges, kind).unwrap();
        prop_assert_eq!(degree_histogram(&g, Direction::Out), degree_histogram(&g.transpose(), Direction::In));
        prop_assert_eq!(degree_histogram(&g, Direction::Out).values().sum::<usize>(), n);
    }

    #[test]
    fn adjacency_is_consistent((n, edges) in edges_strategy(), kind in kind_strategy()) {
        let g = Graph::from_edges(n, &edges, kind).unwrap();
        g.check_consistency().unwrap();
        for (u, v) in g.arcs() {
            prop_assert!(u != v);
            prop_assert!(g.in_neighbors(v as usize).binary_search(&u).is_ok());
        }
        for v in 0..n {
            for &u in g.in_neighbors(v) {
                prop_assert!(g.has_edge(u as usize, v));
            }
        }
        prop_assert_eq!(g.transpose().transpose(), g);
    }
}

#[test]
fn loads_with_comments_and_sparse_ids() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "# header\n\n100 7\n7 100 extra\n100 100\n42 7\n").unwrap();
    let loaded = load_edge_list(&path, GraphKind::Directed).unwrap();
    assert_eq!(loaded.ids, vec![7, 42, 100]);
    assert_eq!(loaded.graph.edge_count(), 3);
    assert!(loaded.graph.has_edge(2, 0));
    assert!(loaded.graph.has_edge(1, 0));
    assert_eq!(loaded.dense_id(42), Some(1));
    assert_eq!(loaded.dense_id(8), None);
}

#[test]
fn parse_error_reports_line() {
    let err = read_edge_list(Cursor::new("0 1\nx 2\n"), Path::new("bad"), GraphKind::Directed).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}
