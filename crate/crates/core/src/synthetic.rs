//! Small generated corpora with known structure, for tests and smoke runs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{CorpusSplit, Dialect, Sample, Topic, NE_TOKEN};

const COMMON: &[&str] = &[
    "și", "în", "de", "la", "cu", "pe", "care", "este", "au", "fost", "un", "o", "pentru", "din", "mai", "anul",
    "acest", "dar", "după", "între", "ei", "noi", "spus", "oameni", "țară", "astăzi", "multe", "foarte",
];

fn dialect_words(d: Dialect) -> &'static [&'static str] {
    match d {
        Dialect::MD => &["sînt", "cînd", "pînă", "decît", "tenismen", "cîteva", "pămînt", "cuvîntul", "mîine"],
        Dialect::RO => &["sunt", "când", "până", "decât", "jucător", "câteva", "pământ", "județ", "firme", "mâine"],
    }
}

fn dialect_entities(d: Dialect) -> &'static [&'static str] {
    match d {
        Dialect::MD => &["Chișinău", "Moldova", "Dodon", "Bălți"],
        Dialect::RO => &["București", "România", "Dragnea", "Cluj"],
    }
}

fn topic_words(t: Topic) -> &'static [&'static str] {
    match t {
        Topic::Culture => &["muzică", "artist", "teatru", "carte", "festival", "film"],
        Topic::Finance => &["bani", "bancă", "credit", "lei", "investiții", "economie"],
        Topic::Politics => &["guvern", "partid", "alegeri", "ministru", "parlament", "lege"],
        Topic::Science => &["cercetare", "studiu", "savanți", "planetă", "celule", "spațiu"],
        Topic::Sports => &["campion", "fotbal", "meci", "echipa", "gol", "turneu"],
        Topic::Tech => &["internet", "telefon", "aplicație", "rețea", "date", "calculator"],
    }
}

/// Draws a news-like document. Dialect and topic words each make up about
/// `signal` of the tokens; the rest are shared function words. Entity names
/// are written out, or replaced by the placeholder when `masked`.
pub fn document(rng: &mut impl Rng, dialect: Dialect, topic: Topic, tokens: usize, signal: f64, masked: bool) -> String {
    let mut words = Vec::with_capacity(tokens);
    for _ in 0..tokens {
        let r: f64 = rng.gen();
        let w = if r < signal {
            *dialect_words(dialect).choose(rng).unwrap()
        } else if r < 2.0 * signal {
            *topic_words(topic).choose(rng).unwrap()
        } else if r < 2.0 * signal + 0.05 {
            if masked { NE_TOKEN } else { *dialect_entities(dialect).choose(rng).unwrap() }
        } else {
            *COMMON.choose(rng).unwrap()
        };
        words.push(w);
    }
    words.join(" ")
}

/// A corpus with `per_stratum` documents for each (dialect, topic) pair and
/// subset, ids `"{subset}-{dialect}-{topic}-{i}"`.
pub fn toy_corpus(per_stratum: [usize; 3], tokens: usize, signal: f64, masked: bool, seed: u64) -> CorpusSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subsets: [Vec<Sample>; 3] = Default::default();
    for (s, subset) in subsets.iter_mut().enumerate() {
        let name = ["train", "validation", "test"][s];
        for d in Dialect::ALL {
            for t in Topic::ALL {
                for i in 0..per_stratum[s] {
                    let text = document(&mut rng, d, t, tokens, signal, masked);
                    subset.push(Sample::new(format!("{name}-{d}-{t}-{i}"), d, t, &text).unwrap());
                }
            }
        }
    }
    let [train, validation, test] = subsets;
    CorpusSplit { train, validation, test, ner_masked: masked }
}

/// Documents whose characters are unique to their (dialect, topic) class, so
/// any n-gram kernel separates the classes perfectly.
pub fn separable_corpus(per_stratum: [usize; 3], seed: u64) -> CorpusSplit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subsets: [Vec<Sample>; 3] = Default::default();
    for (s, subset) in subsets.iter_mut().enumerate() {
        for (di, d) in Dialect::ALL.into_iter().enumerate() {
            for (ti, t) in Topic::ALL.into_iter().enumerate() {
                // two private letters per class from a block of CJK code points
                let base = 0x4e00 + 2 * (di * Topic::ALL.len() + ti) as u32;
                let letters = [char::from_u32(base).unwrap(), char::from_u32(base + 1).unwrap()];
                for i in 0..per_stratum[s] {
                    let text: String = (0..rng.gen_range(8..20)).map(|_| letters[rng.gen_range(0..2)]).collect();
                    subset.push(Sample::new(format!("{s}-{d}-{t}-{i}"), d, t, &text).unwrap());
                }
            }
        }
    }
    let [train, validation, test] = subsets;
    CorpusSplit { train, validation, test, ner_masked: false }
}

/// Random string over the first `alphabet` lowercase letters.
pub fn random_string(rng: &mut impl Rng, alphabet: usize, max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| (b'a' + rng.gen_range(0..alphabet as u8)) as char).collect()
}
