//! Random presentations in the few-relator model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::word::{Letter, Word};
use super::Presentation;
use crate::error::{Error, Result};

/// Generator names `a, b, c, ...`, falling back to `x26, x27, ...`.
pub(crate) fn default_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

/// `num_relators` relators drawn uniformly from the cyclically reduced words
/// of the given length over `num_gens` generators.
///
/// A uniform reduced word is drawn letter by letter and rejected when its
/// ends cancel, which leaves the cyclically reduced words uniformly likely.
pub fn random_presentation(
    num_gens: usize,
    num_relators: usize,
    length: usize,
    seed: u64,
) -> Result<Presentation> {
    if num_gens < 2 || length < 1 || num_gens > u16::MAX as usize {
        return Err(Error::InvalidParameters(
            "need at least 2 generators and relator length at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let relators = (0..num_relators)
        .map(|_| loop {
            let w = random_reduced_word(&mut rng, num_gens, length);
            if w.is_cyclically_reduced() {
                break w;
            }
        })
        .collect();
    Presentation::new(default_names(num_gens), relators)
}

fn random_reduced_word<R: Rng>(rng: &mut R, num_gens: usize, length: usize) -> Word {
    let k = 2 * num_gens;
    let mut letters: Vec<Letter> = Vec::with_capacity(length);
    for _ in 0..length {
        let l = match letters.last() {
            None => code_letter(rng.gen_range(0..k)),
            Some(prev) => {
                // uniform over the k - 1 letters that do not cancel `prev`
                let forbidden = letter_code(prev.inv());
                let c = rng.gen_range(0..k - 1);
                code_letter(if c >= forbidden { c + 1 } else { c })
            }
        };
        letters.push(l);
    }
    Word::new(letters)
}

fn letter_code(l: Letter) -> usize {
    2 * l.generator as usize + l.inverse as usize
}

fn code_letter(c: usize) -> Letter {
    Letter::new((c / 2) as u16, c % 2 == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_one_relators() {
        for seed in 0..20 {
            let p = random_presentation(2, 1, 1, seed).unwrap();
            assert_eq!(p.relators().len(), 1);
            assert_eq!(p.relators()[0].len(), 1);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = random_presentation(2, 2, 40, 7).unwrap();
        let b = random_presentation(2, 2, 40, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.relators().iter().all(|r| r.len() == 40 && r.word().is_cyclically_reduced()));
        assert_ne!(a, random_presentation(2, 2, 40, 8).unwrap());
    }

    #[test]
    fn invalid_parameters() {
        assert!(random_presentation(1, 1, 5, 0).is_err());
        assert!(random_presentation(2, 1, 0, 0).is_err());
    }

    #[test]
    fn all_length_two_words_appear() {
        // 4 * 3 reduced words, minus the 4 whose ends cancel... none at length 2
        // except x x^-1 patterns, which are not reduced. So 12 cyclically reduced.
        let mut seen = std::collections::HashSet::new();
        for seed in 0..400 {
            let p = random_presentation(2, 1, 2, seed).unwrap();
            seen.insert(p.relators()[0].clone());
        }
        // up to rotation: aa, AA, bb, BB, ab~ba, aB~Ba, Ab~bA, AB~BA
        assert_eq!(seen.len(), 8);
    }
}
