use apikg::eval::{Bm25, Bm25Config};

fn toy() -> Bm25 {
    let docs = vec![vec!["a", "b"], vec!["a", "a", "c"], vec!["b", "c", "c", "d"]];
    Bm25::new(&docs, Bm25Config::default()).unwrap()
}

#[test]
fn hand_computed_scores() {
    // N = 3, average length 3. For "a": df 2, idf ln(1.6).
    // doc 0: tf 1, length norm 0.75 -> idf * 2.2 / 1.9
    // doc 1: tf 2, length norm 1.0  -> idf * 4.4 / 3.2
    let bm = toy();
    let s = bm.scores(&["a"]);
    assert!((s[0] - 0.5442147286003255).abs() < 1e-12);
    assert!((s[1] - 0.6462549902128865).abs() < 1e-12);
    assert_eq!(s[2], 0.0);

    // "d" only in doc 2: idf ln(1 + 2.5/1.5), norm 1.25 -> idf * 2.2 / 2.5
    let s = bm.scores(&["d"]);
    assert!((s[2] - 0.8631297426503192).abs() < 1e-12);
}

#[test]
fn idf_of_unseen_term_is_maximal() {
    let bm = toy();
    assert!((bm.idf("zzz") - (1.0f64 + 3.5 / 0.5).ln()).abs() < 1e-15);
    assert!(bm.idf("a") < bm.idf("d"));
}

#[test]
fn scores_add_over_query_terms() {
    let bm = toy();
    let (a, d, both) = (bm.scores(&["a"]), bm.scores(&["d"]), bm.scores(&["a", "d"]));
    for i in 0..3 {
        assert!((both[i] - (a[i] + d[i])).abs() < 1e-15);
    }
}

#[test]
fn top_orders_and_filters() {
    let bm = toy();
    let hits = bm.top(&["a"], |_| true);
    assert_eq!(hits.iter().map(|h| h.0).collect::<Vec<_>>(), vec![1, 0]);
    let hits = bm.top(&["a"], |d| d != 1);
    assert_eq!(hits.iter().map(|h| h.0).collect::<Vec<_>>(), vec![0]);
    assert!(bm.top(&["nothing"], |_| true).is_empty());
}

#[test]
fn rejects_bad_parameters() {
    let docs: Vec<Vec<&str>> = vec![vec!["x"]];
    let bad = Bm25Config {
        b: 1.5,
        ..Bm25Config::default()
    };
    assert!(Bm25::new(&docs, bad).is_err());
}
