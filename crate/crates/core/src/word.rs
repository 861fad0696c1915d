//! Path words of the candidate family: `CGC`, `CCC` and their degenerate
//! subwords, with `C` a tight left or right turn and `G` a great-circle arc.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SphereError};
use crate::sabban::SegmentKind;

/// Every word of the candidate family, in canonical order.
pub const FAMILY: [&str; 15] = [
    "G", "L", "R", "LG", "GL", "RG", "GR", "LR", "RL", "LGL", "LGR", "RGL", "RGR", "LRL", "RLR",
];

/// A word of the candidate family.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathWord {
    kinds: Vec<SegmentKind>,
}

impl PathWord {
    /// Accepts only words of the candidate family.
    pub fn from_kinds(kinds: &[SegmentKind]) -> Result<Self> {
        if is_family_word(kinds) {
            Ok(Self {
                kinds: kinds.to_vec(),
            })
        } else {
            Err(SphereError::InvalidWord(letters(kinds)))
        }
    }

    pub fn kinds(&self) -> &[SegmentKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    /// The same word with left and right turns exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            kinds: self.kinds.iter().map(|k| k.mirrored()).collect(),
        }
    }
}

impl fmt::Display for PathWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&letters(&self.kinds))
    }
}

impl FromStr for PathWord {
    type Err = SphereError;

    fn from_str(s: &str) -> Result<Self> {
        let kinds = parse_letters(s)?;
        Self::from_kinds(&kinds)
    }
}

impl Ord for PathWord {
    /// Lexicographic on the letter string.
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_string().cmp(&other.to_string())
    }
}

impl PartialOrd for PathWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn letters(kinds: &[SegmentKind]) -> String {
    kinds.iter().map(|k| k.letter()).collect()
}

/// Parses any string over `{L, R, G}`, family member or not.
pub fn parse_letters(s: &str) -> Result<Vec<SegmentKind>> {
    s.chars()
        .map(|c| SegmentKind::from_letter(c).ok_or_else(|| SphereError::InvalidWord(s.to_string())))
        .collect()
}

/// Membership test for the candidate family.
pub fn is_family_word(kinds: &[SegmentKind]) -> bool {
    use SegmentKind::*;
    if kinds.is_empty() || kinds.len() > 3 {
        return false;
    }
    if kinds.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    match kinds {
        [_] | [_, _] => true,
        [a, GreatCircle, b] => *a != GreatCircle && *b != GreatCircle,
        [a, b, c] => *b != GreatCircle && *a == *c && *a != GreatCircle && *b != *a,
        _ => false,
    }
}

/// The fifteen candidate words.
pub fn enumerate_words() -> Vec<PathWord> {
    FAMILY
        .iter()
        .map(|w| w.parse().expect("family words are valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn fifteen_words() {
        let words = enumerate_words();
        assert_eq!(words.len(), 15);
        let names: BTreeSet<String> = words.iter().map(|w| w.to_string()).collect();
        assert_eq!(names.len(), 15);
        assert!(names.contains("LRL") && names.contains("RLR"));
        assert!(!names.contains("LLR"));
        assert!(!names.contains("GLG"));
    }

    #[test]
    fn family_matches_brute_force_subwords() {
        // every string over {L,R,G} of length 1..=3 that is a contiguous
        // subword of a CGC or CCC instance, with no repeated adjacent letters
        let alphabet = ['L', 'R', 'G'];
        let mut parents = Vec::new();
        for a in ['L', 'R'] {
            for b in ['L', 'R'] {
                parents.push(format!("{a}G{b}"));
            }
        }
        parents.push("LRL".to_string());
        parents.push("RLR".to_string());
        let mut expected = BTreeSet::new();
        for p in &parents {
            for i in 0..3 {
                for j in i + 1..=3 {
                    expected.insert(p[i..j].to_string());
                }
            }
        }
        let mut all = Vec::new();
        for n in 1..=3 {
            let mut acc = vec![String::new()];
            for _ in 0..n {
                acc = acc
                    .iter()
                    .flat_map(|s| alphabet.iter().map(move |c| format!("{s}{c}")))
                    .collect();
            }
            all.extend(acc);
        }
        let found: BTreeSet<String> = all
            .into_iter()
            .filter(|s| is_family_word(&parse_letters(s).unwrap()))
            .collect();
        assert_eq!(found, expected);
        assert_eq!(found.len(), 15);
    }

    #[test]
    fn parsing_and_order() {
        assert!("LGR".parse::<PathWord>().is_ok());
        assert!("LLR".parse::<PathWord>().is_err());
        assert!("LRLR".parse::<PathWord>().is_err());
        assert!("X".parse::<PathWord>().is_err());
        let a: PathWord = "GL".parse().unwrap();
        let b: PathWord = "L".parse().unwrap();
        assert!(a < b);
        assert_eq!("LGR".parse::<PathWord>().unwrap().mirrored().to_string(), "RGL");
    }
}
