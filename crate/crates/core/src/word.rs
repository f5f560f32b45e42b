use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Variable class. The derived order `A < X < H < E` is the canonical
/// generator order used for every word comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    A,
    X,
    H,
    E,
}

impl Kind {
    pub fn letter(self) -> char {
        match self {
            Kind::A => 'a',
            Kind::X => 'x',
            Kind::H => 'h',
            Kind::E => 'e',
        }
    }

    pub fn from_letter(c: char) -> Option<Kind> {
        match c {
            'a' => Some(Kind::A),
            'x' => Some(Kind::X),
            'h' => Some(Kind::H),
            'e' => Some(Kind::E),
            _ => None,
        }
    }
}

/// A symmetric generator such as `a1` or `x2`. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub kind: Kind,
    pub index: u16,
}

impl Generator {
    pub fn new(kind: Kind, index: usize) -> Generator {
        assert!(index >= 1, "generator indices are 1-based");
        Generator {
            kind,
            index: index as u16,
        }
    }

    pub fn a(i: usize) -> Generator {
        Generator::new(Kind::A, i)
    }
    pub fn x(i: usize) -> Generator {
        Generator::new(Kind::X, i)
    }
    pub fn h(i: usize) -> Generator {
        Generator::new(Kind::H, i)
    }
    pub fn e(i: usize) -> Generator {
        Generator::new(Kind::E, i)
    }

    pub fn idx(&self) -> usize {
        self.index as usize
    }

    /// Same index, different class (used for x -> h and a -> e substitution).
    pub fn with_kind(self, kind: Kind) -> Generator {
        Generator { kind, index: self.index }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.index)
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Generator> {
        let mut chars = s.chars();
        let kind = chars
            .next()
            .and_then(Kind::from_letter)
            .ok_or_else(|| Error::Input(format!("bad generator `{s}`")))?;
        let rest = chars.as_str();
        let index: usize = rest
            .parse()
            .map_err(|_| Error::Input(format!("bad generator index in `{s}`")))?;
        if index == 0 || index > u16::MAX as usize {
            return Err(Error::Input(format!("generator index out of range in `{s}`")));
        }
        Ok(Generator::new(kind, index))
    }
}

/// A word in the free monoid. Ordered by length first, then
/// lexicographically in the generator order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<Generator>) -> Word {
        Word(letters)
    }

    pub fn single(g: Generator) -> Word {
        Word(vec![g])
    }

    /// Parse a space-free or space-separated word such as `x2 x2 a1 x1`.
    /// The empty string and `1` give the empty word.
    pub fn parse(s: &str) -> Result<Word> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::new();
        let mut chars = s.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            let kind = Kind::from_letter(c)
                .ok_or_else(|| Error::Input(format!("unexpected `{c}` in word `{s}`")))?;
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let index: usize = digits
                .parse()
                .map_err(|_| Error::Input(format!("missing index after `{c}` in `{s}`")))?;
            if index == 0 {
                return Err(Error::Input(format!("index 0 in `{s}`")));
            }
            letters.push(Generator::new(kind, index));
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, g: Generator) {
        self.0.push(g);
    }

    pub fn prepend(&self, g: Generator) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(g);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// The involution: letters reversed (all generators are symmetric).
    pub fn involution(&self) -> Word {
        let mut v = self.0.clone();
        v.reverse();
        Word(v)
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word(self.0[from..to].to_vec())
    }

    pub fn count(&self, kind: Kind) -> usize {
        self.0.iter().filter(|g| g.kind == kind).count()
    }

    pub fn positions(&self, kind: Kind) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, g)| g.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn max_index(&self, kind: Kind) -> usize {
        self.0
            .iter()
            .filter(|g| g.kind == kind)
            .map(|g| g.idx())
            .max()
            .unwrap_or(0)
    }

    /// Length of the longest run of consecutive `a` letters.
    pub fn max_a_run(&self) -> usize {
        let mut best = 0;
        let mut cur = 0;
        for g in &self.0 {
            if g.kind == Kind::A {
                cur += 1;
                best = best.max(cur);
            } else {
                cur = 0;
            }
        }
        best
    }

    /// Replace the letter at `pos`.
    pub fn replaced(&self, pos: usize, g: Generator) -> Word {
        let mut v = self.0.clone();
        v[pos] = g;
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

impl From<Vec<Generator>> for Word {
    fn from(v: Vec<Generator>) -> Word {
        Word(v)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.0.iter().map(|g| g.to_string()).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Word, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        let letters = v
            .iter()
            .map(|s| s.parse::<Generator>())
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(Word(letters))
    }
}

/// All words in `a_1..a_ga` of length at most `max_len`, canonical order.
pub fn a_words(ga: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * ga);
        for w in &layer {
            for i in 1..=ga {
                let mut nw = w.clone();
                nw.push(Generator::a(i));
                next.push(nw);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}
