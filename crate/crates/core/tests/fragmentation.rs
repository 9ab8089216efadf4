mod support;

use cfb_core::fragment::{fragment, full_text, span_char_lengths, time_of_char, DEFAULT_TARGET_CHARS};
use cfb_core::transcript::{TimedSpan, Transcript};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::oracles::{fragment_oracle, random_transcript};

fn arb_transcript() -> impl Strategy<Value = Transcript> {
    prop::collection::vec(("[a-z]{1,12}( [a-z]{1,12}){0,40}", 0.1f64..5.0, 0.0f64..2.0), 0..120).prop_map(|parts| {
        let mut t = 0.0;
        let spans = parts
            .into_iter()
            .map(|(text, dur, gap)| {
                let span = TimedSpan::new(t + gap, t + gap + dur, text);
                t += gap + dur;
                span
            })
            .collect();
        Transcript::new("p", t, spans)
    })
}

proptest! {
    #[test]
    fn fragments_tile_the_text(t in arb_transcript(), target in 20usize..600) {
        let frags = fragment(&t, target);
        let text = full_text(&t);
        let joined: String = frags.iter().map(|f| f.text.as_str()).collect();
        prop_assert_eq!(&joined, &text);
        let mut offset = 0;
        for f in &frags {
            prop_assert_eq!(f.char_start, offset);
            prop_assert_eq!(f.text.chars().count(), f.char_len());
            offset = f.char_end;
        }
        prop_assert_eq!(offset, text.chars().count());
    }

    #[test]
    fn non_final_lengths_bounded(t in arb_transcript(), target in 20usize..600) {
        let frags = fragment(&t, target);
        let longest = span_char_lengths(&t).into_iter().max().unwrap_or(0);
        if let Some((_, init)) = frags.split_last() {
            for f in init {
                prop_assert!(f.char_len() >= target);
                prop_assert!(f.char_len() < target + longest);
            }
        }
    }

    #[test]
    fn time_ranges_contiguous(t in arb_transcript(), target in 20usize..600) {
        let frags = fragment(&t, target);
        for pair in frags.windows(2) {
            prop_assert_eq!(pair[0].time_end, pair[1].time_start);
            prop_assert!(pair[0].time_start <= pair[0].time_end);
        }
    }

    #[test]
    fn time_of_char_monotone(t in arb_transcript(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let total: usize = span_char_lengths(&t).iter().sum();
        prop_assume!(total > 0);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let x = time_of_char(&t, (lo * total as f64) as usize).unwrap();
        let y = time_of_char(&t, (hi * total as f64) as usize).unwrap();
        prop_assert!(x <= y);
    }

    #[test]
    fn matches_greedy_oracle(t in arb_transcript(), target in 20usize..600) {
        let got: Vec<(usize, usize)> = fragment(&t, target).iter().map(|f| (f.char_start, f.char_end)).collect();
        prop_assert_eq!(got, fragment_oracle(&t, target));
    }
}

#[test]
fn random_long_transcripts_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let t = random_transcript(&mut rng, 100_000);
        let got: Vec<(usize, usize)> =
            fragment(&t, DEFAULT_TARGET_CHARS).iter().map(|f| (f.char_start, f.char_end)).collect();
        assert_eq!(got, fragment_oracle(&t, DEFAULT_TARGET_CHARS));
    }
}

#[test]
fn single_long_span_is_one_fragment() {
    let t = Transcript::new("v", 10.0, vec![TimedSpan::new(0.0, 10.0, "y".repeat(12_000))]);
    let frags = fragment(&t, DEFAULT_TARGET_CHARS);
    assert_eq!(frags.len(), 1);
    assert_eq!(frags[0].char_len(), 12_001);
}

#[test]
fn multibyte_text_counts_chars() {
    let t = Transcript::new("v", 4.0, vec![TimedSpan::new(0.0, 2.0, "héllo"), TimedSpan::new(2.0, 4.0, "日本語")]);
    let frags = fragment(&t, 3);
    assert_eq!(frags.iter().map(|f| f.char_len()).collect::<Vec<_>>(), vec![6, 4]);
}
