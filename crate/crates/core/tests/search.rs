mod support;

use std::collections::BTreeMap;

use cfb_core::annotate::ConceptLexicon;
use cfb_core::relevance::{highlight_levels, query_vector, search, search_with_vector, ConceptVector, HighlightLevel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::scenarios::{highlight_monotone, random_catalog, rankings_agree};
use support::oracles::search_oracle;

#[test]
fn ranking_matches_brute_force_cosine() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..50 {
        let (videos, raw) = random_catalog(&mut rng, 20);
        let refs: Vec<_> = videos.iter().collect();
        let mut q = BTreeMap::new();
        for _ in 0..rng.random_range(1..=4) {
            q.insert(format!("C{}", rng.random_range(0..12)), rng.random_range(0.05..1.0));
        }
        let hits = search_with_vector(&ConceptVector::from_weights(q.clone()), &refs, 20);
        let got: Vec<(String, f64)> = hits.iter().map(|h| (h.video_id.clone(), h.video_score)).collect();
        rankings_agree(&got, &search_oracle(&q, &raw)).unwrap();
    }
}

#[test]
fn limit_truncates_after_ranking() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (videos, _) = random_catalog(&mut rng, 20);
    let refs: Vec<_> = videos.iter().collect();
    let q = ConceptVector::from_weights([("C1", 1.0), ("C2", 0.5)]);
    let all = search_with_vector(&q, &refs, 20);
    let top = search_with_vector(&q, &refs, 5);
    assert_eq!(top, all[..5].to_vec());
}

#[test]
fn text_query_goes_through_linker() {
    let lexicon = ConceptLexicon::from_bytes(
        br#"{"surface":"C3 topic","concepts":[{"id":"C3","title":"C3","url":"","prior":1.0}]}"#,
    )
    .unwrap();
    assert_eq!(query_vector("about c3 TOPIC", &lexicon).get("C3"), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (videos, _) = random_catalog(&mut rng, 20);
    let refs: Vec<_> = videos.iter().collect();
    let hits = search("c3 topic", &refs, 20, &lexicon);
    assert!(hits.windows(2).all(|w| w[0].video_score >= w[1].video_score));
    assert!(search("nothing known", &refs, 20, &lexicon).iter().all(|h| h.video_score == 0.0));
}

#[test]
fn highlight_examples() {
    let levels = highlight_levels(&[0.0, 0.1, 0.34, 0.5, 1.0], 4);
    assert_eq!(levels, vec![HighlightLevel(0), HighlightLevel(1), HighlightLevel(2), HighlightLevel(2), HighlightLevel(3)]);
    assert!(highlight_levels(&[0.0, 0.0], 4).iter().all(|l| l.0 == 0));
}

proptest! {
    #[test]
    fn highlight_is_monotone(scores in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 1..40), n in 2usize..8) {
        let levels = highlight_levels(&scores, n);
        prop_assert!(highlight_monotone(&scores, &levels, n));
    }
}
