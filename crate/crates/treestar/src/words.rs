//! Group words over automaton states and vertices of the rooted tree.

use std::fmt;

/// One letter of a group word: a state index plus an exponent sign.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    pub state: u16,
    pub inverse: bool,
}

impl Letter {
    pub fn new(state: u16, inverse: bool) -> Self {
        Letter { state, inverse }
    }

    pub fn inverted(self) -> Self {
        Letter {
            state: self.state,
            inverse: !self.inverse,
        }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.state == other.state && self.inverse != other.inverse
    }
}

/// A freely reduced word in the states and their inverses.
///
/// The empty word is the identity. Reduction happens on construction, so
/// two `Word` values compare equal as free words whenever possible; equality
/// as tree automorphisms is a separate, automaton-dependent question.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn single(state: u16) -> Self {
        Word {
            letters: vec![Letter::new(state, false)],
        }
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if stack.last().is_some_and(|top| top.cancels(l)) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word { letters: stack }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverted()).collect(),
        }
    }

    /// Product `self · other` (with `other` acting first on the tree).
    pub fn concat(&self, other: &Word) -> Word {
        Word::from_letters(self.letters.iter().chain(other.letters.iter()).copied())
    }

    /// Conjugate `self · g · self^-1`.
    pub fn conjugate(&self, g: &Word) -> Word {
        self.concat(g).concat(&self.inverse())
    }

    /// Total order by length, then lexicographically; used for canonical
    /// term ordering in algebra elements.
    pub fn length_lex_key(&self) -> (usize, &[Letter]) {
        (self.letters.len(), &self.letters)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "#{}{}", l.state, if l.inverse { "^-1" } else { "" })?;
        }
        Ok(())
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.length_lex_key().cmp(&other.length_lex_key())
    }
}

/// A vertex of the rooted tree: a finite string of 0-based letters.
///
/// The root is the empty string. Level-n vertices in lexicographic order
/// correspond to indices `0..d^n` with the first tree letter most
/// significant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Vertex {
    path: Vec<u16>,
}

impl Vertex {
    pub fn root() -> Self {
        Vertex::default()
    }

    pub fn new(path: Vec<u16>) -> Self {
        Vertex { path }
    }

    pub fn level(&self) -> usize {
        self.path.len()
    }

    pub fn path(&self) -> &[u16] {
        &self.path
    }

    pub fn child(&self, letter: u16) -> Vertex {
        let mut path = self.path.clone();
        path.push(letter);
        Vertex { path }
    }

    /// Lexicographic index among level-n vertices.
    pub fn index(&self, d: usize) -> usize {
        self.path
            .iter()
            .fold(0usize, |acc, &x| acc * d + x as usize)
    }

    /// Vertex of level `n` with the given lexicographic index.
    pub fn from_index(mut index: usize, level: u32, d: usize) -> Vertex {
        let mut path = vec![0u16; level as usize];
        for slot in path.iter_mut().rev() {
            *slot = (index % d) as u16;
            index /= d;
        }
        Vertex { path }
    }

    /// One-based digit string, e.g. "12" for (0,1); levels are joined with
    /// '.' once an alphabet has more than nine letters.
    pub fn display(&self, d: usize) -> String {
        if self.path.is_empty() {
            return "@".to_string();
        }
        let sep = if d > 9 { "." } else { "" };
        self.path
            .iter()
            .map(|&x| (x + 1).to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parses the `display` syntax back: "@" or "" is the root, otherwise
    /// 1-based letters, one character each for alphabets up to nine letters
    /// and dot-separated beyond.
    pub fn parse(text: &str, d: usize) -> Result<Vertex, VertexParseError> {
        let t = text.trim();
        if t.is_empty() || t == "@" {
            return Ok(Vertex::root());
        }
        let bad = || VertexParseError {
            text: t.to_owned(),
            d,
        };
        let labels: Vec<String> = if d > 9 {
            t.split('.').map(str::to_owned).collect()
        } else {
            t.chars().map(|c| c.to_string()).collect()
        };
        let mut path = Vec::with_capacity(labels.len());
        for label in &labels {
            let k = label
                .parse::<usize>()
                .ok()
                .filter(|&k| (1..=d).contains(&k))
                .ok_or_else(bad)?;
            path.push((k - 1) as u16);
        }
        Ok(Vertex { path })
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
#[error("vertex `{text}`: every step must be a 1-based letter in 1..={d}")]
pub struct VertexParseError {
    pub text: String,
    pub d: usize,
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(9))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: u16, inv: bool) -> Letter {
        Letter::new(s, inv)
    }

    #[test]
    fn free_reduction_cancels_adjacent_inverses() {
        let w = Word::from_letters([l(0, false), l(1, false), l(1, true), l(0, true)]);
        assert!(w.is_empty());
    }

    #[test]
    fn concat_reduces_at_the_seam() {
        let a = Word::from_letters([l(0, false), l(1, false)]);
        let b = Word::from_letters([l(1, true), l(2, false)]);
        let ab = a.concat(&b);
        assert_eq!(ab.letters(), &[l(0, false), l(2, false)]);
    }

    #[test]
    fn inverse_reverses_and_flips() {
        let w = Word::from_letters([l(0, false), l(1, true)]);
        assert_eq!(w.inverse().letters(), &[l(1, false), l(0, true)]);
        assert!(w.concat(&w.inverse()).is_empty());
    }

    #[test]
    fn vertex_indexing_is_lexicographic() {
        let d = 2;
        let v = Vertex::new(vec![0, 1]); // "12"
        assert_eq!(v.index(d), 1);
        assert_eq!(Vertex::from_index(1, 2, d), v);
        // all level-2 indices round trip
        for i in 0..4 {
            assert_eq!(Vertex::from_index(i, 2, d).index(d), i);
        }
        assert_eq!(v.display(d), "12");
    }

    #[test]
    fn vertex_parse_inverts_display() {
        assert_eq!(Vertex::parse("@", 2), Ok(Vertex::root()));
        assert_eq!(Vertex::parse("", 2), Ok(Vertex::root()));
        assert_eq!(Vertex::parse("12", 2), Ok(Vertex::new(vec![0, 1])));
        assert_eq!(Vertex::parse("3.11", 12), Ok(Vertex::new(vec![2, 10])));
        assert!(Vertex::parse("13", 2).is_err());
        assert!(Vertex::parse("1x", 2).is_err());
        for i in 0..9 {
            let v = Vertex::from_index(i, 2, 3);
            assert_eq!(Vertex::parse(&v.display(3), 3), Ok(v));
        }
    }
}
