use std::ffi::{CStr, CString};
use std::ptr;

use transprox_ffi::*;

fn last_error() -> String {
    let p = tp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn two_cycle() -> *mut TpGraph {
    let (src, dst) = ([0u32, 1], [1u32, 0]);
    let mut g = ptr::null_mut();
    let s = unsafe { tp_graph_from_edges(2, src.as_ptr(), dst.as_ptr(), 2, true, &mut g) };
    assert_eq!(s, TpStatus::Ok);
    g
}

#[test]
fn push_matches_closed_form() {
    let g = two_cycle();
    let mut pi = [0.0; 2];
    assert_eq!(unsafe { tp_backward_push(g, 1, 0.5, 1e-9, pi.as_mut_ptr(), 2) }, TpStatus::Ok);
    assert!((pi[0] - 1.0 / 3.0).abs() <= 1e-9);
    assert!((pi[1] - 2.0 / 3.0).abs() <= 1e-9);

    let mut small = [0.0; 1];
    assert_eq!(unsafe { tp_backward_push(g, 1, 0.5, 1e-9, small.as_mut_ptr(), 1) }, TpStatus::InvalidArgument);
    assert_eq!(unsafe { tp_backward_push(g, 5, 0.5, 1e-9, pi.as_mut_ptr(), 2) }, TpStatus::OutOfRange);
    assert!(last_error().contains('5'));
    assert_eq!(unsafe { tp_backward_push(g, 0, 1.5, 1e-9, pi.as_mut_ptr(), 2) }, TpStatus::InvalidArgument);
    unsafe { tp_graph_free(g) };
}

#[test]
fn embedding_scores_and_copies() {
    let g = two_cycle();
    let mut config = tp_config_default();
    config.dim = 2;
    config.eps = 1e-4;
    let mut emb = ptr::null_mut();
    assert_eq!(unsafe { tp_embed(g, &config, &mut emb) }, TpStatus::Ok);
    assert_eq!(unsafe { (tp_embedding_dim(emb), tp_embedding_node_count(emb)) }, (2, 2));

    let mut score = 0.0;
    assert_eq!(unsafe { tp_embedding_score(emb, 0, 1, &mut score) }, TpStatus::Ok);
    assert!((score - (2.0f64 / 1e-4 * (2.0 / 3.0)).ln()).abs() <= 1e-3);
    assert_eq!(unsafe { tp_embedding_score(emb, 0, 2, &mut score) }, TpStatus::OutOfRange);

    let (mut s, mut t) = ([0.0; 4], [0.0; 4]);
    assert_eq!(unsafe { tp_embedding_copy_source(emb, s.as_mut_ptr(), 4) }, TpStatus::Ok);
    assert_eq!(unsafe { tp_embedding_copy_target(emb, t.as_mut_ptr(), 4) }, TpStatus::Ok);
    let dot = s[0] * t[2] + s[1] * t[3];
    unsafe { tp_embedding_score(emb, 0, 1, &mut score) };
    assert!((dot - score).abs() <= 1e-12);

    let mut precision = 0.0;
    assert_eq!(unsafe { tp_reconstruction_precision(g, emb, &mut precision) }, TpStatus::Ok);
    assert_eq!(precision, 1.0);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("e.txt").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { tp_embedding_write(emb, g, path.as_ptr()) }, TpStatus::Ok);
    let text = std::fs::read_to_string(dir.path().join("e.txt")).unwrap();
    assert!(text.starts_with("2 2\n"));
    unsafe {
        tp_embedding_free(emb);
        tp_graph_free(g);
    }
}

#[test]
fn load_reports_io_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut g = ptr::null_mut();
    let missing = CString::new(dir.path().join("none.txt").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { tp_graph_load(missing.as_ptr(), true, &mut g) }, TpStatus::Io);
    assert!(g.is_null());

    std::fs::write(dir.path().join("bad.txt"), "1 2\nx y\n").unwrap();
    let bad = CString::new(dir.path().join("bad.txt").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { tp_graph_load(bad.as_ptr(), true, &mut g) }, TpStatus::Parse);
    assert!(last_error().contains(":2:"));

    std::fs::write(dir.path().join("ok.txt"), "10 20\n20 30\n").unwrap();
    let ok = CString::new(dir.path().join("ok.txt").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { tp_graph_load(ok.as_ptr(), false, &mut g) }, TpStatus::Ok);
    assert_eq!(unsafe { (tp_graph_node_count(g), tp_graph_edge_count(g)) }, (3, 4));
    let mut id = 0;
    assert_eq!(unsafe { tp_graph_original_id(g, 2, &mut id) }, TpStatus::Ok);
    assert_eq!(id, 30);
    assert_eq!(unsafe { tp_graph_original_id(g, 3, &mut id) }, TpStatus::OutOfRange);
    unsafe { tp_graph_free(g) };
}

#[test]
fn null_handles_are_rejected() {
    let mut out = 0.0;
    assert_eq!(unsafe { tp_embedding_score(ptr::null(), 0, 0, &mut out) }, TpStatus::NullPointer);
    assert_eq!(unsafe { tp_graph_load(ptr::null(), true, &mut ptr::null_mut()) }, TpStatus::NullPointer);
    assert_eq!(unsafe { tp_graph_from_edges(2, ptr::null(), ptr::null(), 1, true, &mut ptr::null_mut()) }, TpStatus::NullPointer);
    assert_eq!(unsafe { tp_graph_node_count(ptr::null()) }, 0);
    unsafe {
        tp_graph_free(ptr::null_mut());
        tp_embedding_free(ptr::null_mut());
    }
}

#[test]
fn invalid_config_is_reported() {
    let g = two_cycle();
    let mut config = tp_config_default();
    config.dim = 3;
    let mut emb = ptr::null_mut();
    assert_eq!(unsafe { tp_embed(g, &config, &mut emb) }, TpStatus::InvalidArgument);
    assert!(emb.is_null());
    unsafe { tp_graph_free(g) };
}
