mod common;

use proptest::prelude::*;

use tweetkg::corpus_io::{levenshtein_distance, levenshtein_similarity, load_conllu};
use tweetkg::entity_refine::{clean_entity_default, is_valid_key};
use tweetkg::kg_emit::{mint_entity_uri, RESOURCE_NS};
use tweetkg::metrics::cohen_kappa;
use tweetkg::preprocess::{strip_nonsyntactic, truncate_tag_sequences};
use tweetkg::relation_cluster::silhouette_mean;

fn text() -> impl Strategy<Value = String> {
    "[a-cé #@.,:'\\-😀]{0,16}"
}

proptest! {
    #[test]
    fn levenshtein_is_a_metric(a in text(), b in text(), c in text()) {
        let ab = levenshtein_distance(&a, &b);
        prop_assert_eq!(ab, levenshtein_distance(&b, &a));
        prop_assert_eq!(levenshtein_distance(&a, &a), 0);
        prop_assert!(ab <= levenshtein_distance(&a, &c) + levenshtein_distance(&c, &b));
        let s = levenshtein_similarity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn cleaning_is_idempotent(s in text()) {
        if let Some(once) = clean_entity_default(&s) {
            prop_assert_eq!(clean_entity_default(&once), Some(once.clone()));
        }
    }

    #[test]
    fn valid_keys_mint_parseable_iris(a in "[a-z0-9é]{1,6}", mid in "[a-z0-9 é&/%?()'_.-]{0,12}", b in "[a-z0-9é]{0,6}") {
        let s = format!("{a}{mid}{b}");
        prop_assume!(is_valid_key(&s));
        let iri = mint_entity_uri(&s, RESOURCE_NS).unwrap();
        prop_assert!(iri.starts_with(RESOURCE_NS));
        prop_assert!(oxrdf::NamedNode::new(&iri).is_ok());
        prop_assert!(!iri.contains(' '));
    }

    #[test]
    fn cohen_is_symmetric(pairs in prop::collection::vec((0u8..3, 0u8..3), 2..60)) {
        let (a, b): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        match (cohen_kappa(&a, &b), cohen_kappa(&b, &a)) {
            (Ok(x), Ok(y)) => prop_assert!((x - y).abs() < 1e-12 || (x.is_nan() && y.is_nan())),
            (x, y) => prop_assert_eq!(x.is_err(), y.is_err()),
        }
    }

    #[test]
    fn silhouette_ignores_label_names(
        points in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 6..40),
        seed in prop::collection::vec(prop::option::weighted(0.9, 0usize..3), 40),
        shift in 1usize..50,
    ) {
        let pts: Vec<Vec<f64>> = points.iter().map(|(x, y)| vec![*x, *y]).collect();
        let labels: Vec<Option<usize>> = seed[..pts.len()].to_vec();
        let renamed: Vec<Option<usize>> = labels.iter().map(|l| l.map(|c| (2 - c) * 7 + shift)).collect();
        let (s1, d1) = silhouette_mean(&pts, &labels);
        let (s2, d2) = silhouette_mean(&pts, &renamed);
        prop_assert_eq!(d1, d2);
        prop_assert!((s1 - s2).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&s1));
    }
}

#[test]
fn token_rules_are_idempotent_on_fixture() {
    let corpus = load_conllu(common::data_dir().join("first_pass.conllu")).unwrap();
    for s in corpus.values().flatten() {
        let once = strip_nonsyntactic(s);
        assert_eq!(strip_nonsyntactic(&once), once, "{}/{}", s.post_id, s.sent_index);
        let once = truncate_tag_sequences(s);
        assert_eq!(truncate_tag_sequences(&once), once, "{}/{}", s.post_id, s.sent_index);
    }
}
