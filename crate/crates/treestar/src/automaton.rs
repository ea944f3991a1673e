//! Automaton definitions: states, outputs, section words, validation.
//!
//! An automaton over the alphabet {1..d} assigns to every state an output
//! permutation of the alphabet and a d-tuple of section words. Sections are
//! indexed by the *target* letter: the tuple entry at position t is the
//! section at target t, so a state q satisfies
//! `q(x·w) = q(x) · sections[q(x)](w)`.

use crate::defaults;
use crate::perm::Perm;
use crate::words::{Letter, Word};
use serde::Deserialize;
use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone)]
pub struct State {
    pub name: String,
    pub output: Perm,
    /// Section words indexed by target letter (0-based).
    pub sections: Vec<Word>,
}

#[derive(Debug, Clone)]
pub struct Automaton {
    alphabet: usize,
    states: Vec<State>,
    index: HashMap<String, u16>,
    /// Largest permitted level size d^n for level-indexed operations.
    pub level_cap: u64,
}

/// A single validation failure; `validate` collects all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyAlphabet {
        given: i64,
    },
    NoStates,
    DuplicateState {
        name: String,
    },
    MalformedPermutation {
        state: String,
        detail: String,
    },
    MalformedSections {
        state: String,
        detail: String,
    },
    UnknownStateInSection {
        state: String,
        target: usize,
        symbol: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAlphabet { given } => {
                write!(f, "alphabet_size must be at least 2, got {}", given)
            }
            Violation::NoStates => write!(f, "automaton declares no states"),
            Violation::DuplicateState { name } => write!(f, "duplicate state name '{}'", name),
            Violation::MalformedPermutation { state, detail } => {
                write!(f, "state '{}': output is not a permutation ({})", state, detail)
            }
            Violation::MalformedSections { state, detail } => {
                write!(f, "state '{}': bad section tuple ({})", state, detail)
            }
            Violation::UnknownStateInSection { state, target, symbol } => write!(
                f,
                "state '{}': section at target {} references unknown state '{}'",
                state,
                target + 1,
                symbol
            ),
        }
    }
}

/// All violations found while validating one definition.
#[derive(Debug, Clone)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid automaton ({} problem(s)):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  - {}", v)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationError {}

#[derive(Debug, thiserror::Error)]
pub enum AutomatonError {
    #[error("cannot read definition: {0}")]
    Format(String),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Word-syntax parse failures.
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum WordParseError {
    #[error("unknown state '{name}'")]
    UnknownState { name: String },
    #[error("malformed word factor '{factor}'")]
    Malformed { factor: String },
}

#[derive(Deserialize)]
struct RawAutomaton {
    alphabet_size: i64,
    #[serde(default)]
    states: Vec<RawState>,
}

#[derive(Deserialize)]
struct RawState {
    name: String,
    output: Vec<i64>,
    sections: Vec<String>,
}

impl Automaton {
    /// Parses and validates a definition in the automaton file format.
    pub fn from_definition(text: &str) -> Result<Automaton, AutomatonError> {
        let raw: RawAutomaton =
            toml::from_str(text).map_err(|e| AutomatonError::Format(e.to_string()))?;
        Ok(Self::validate(raw)?)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Automaton, AutomatonError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AutomatonError::Format(format!("{}: {}", path.display(), e)))?;
        Self::from_definition(&text)
    }

    fn validate(raw: RawAutomaton) -> Result<Automaton, ValidationError> {
        let mut violations = Vec::new();
        if raw.alphabet_size < 2 {
            violations.push(Violation::EmptyAlphabet {
                given: raw.alphabet_size,
            });
        }
        if raw.states.is_empty() {
            violations.push(Violation::NoStates);
        }
        let d = raw.alphabet_size.max(2) as usize;

        let mut index: HashMap<String, u16> = HashMap::new();
        for (k, rs) in raw.states.iter().enumerate() {
            if index.insert(rs.name.clone(), k as u16).is_some() {
                violations.push(Violation::DuplicateState {
                    name: rs.name.clone(),
                });
            }
        }

        let mut states = Vec::with_capacity(raw.states.len());
        for rs in &raw.states {
            let output = if rs.output.len() != d {
                violations.push(Violation::MalformedPermutation {
                    state: rs.name.clone(),
                    detail: format!("expected {} entries, got {}", d, rs.output.len()),
                });
                Perm::identity(d)
            } else if rs.output.iter().any(|&y| y < 1 || y > d as i64) {
                violations.push(Violation::MalformedPermutation {
                    state: rs.name.clone(),
                    detail: format!("entries must lie in 1..={}", d),
                });
                Perm::identity(d)
            } else {
                match Perm::from_images(rs.output.iter().map(|&y| (y - 1) as u32).collect()) {
                    Some(p) => p,
                    None => {
                        violations.push(Violation::MalformedPermutation {
                            state: rs.name.clone(),
                            detail: "entries repeat".to_string(),
                        });
                        Perm::identity(d)
                    }
                }
            };

            let mut sections = Vec::with_capacity(d);
            if rs.sections.len() != d {
                violations.push(Violation::MalformedSections {
                    state: rs.name.clone(),
                    detail: format!("expected {} entries, got {}", d, rs.sections.len()),
                });
                sections = vec![Word::identity(); d];
            } else {
                for (t, sec) in rs.sections.iter().enumerate() {
                    match parse_word_with(sec, &index) {
                        Ok(w) => sections.push(w),
                        Err(WordParseError::UnknownState { name }) => {
                            violations.push(Violation::UnknownStateInSection {
                                state: rs.name.clone(),
                                target: t,
                                symbol: name,
                            });
                            sections.push(Word::identity());
                        }
                        Err(WordParseError::Malformed { factor }) => {
                            violations.push(Violation::MalformedSections {
                                state: rs.name.clone(),
                                detail: format!("unreadable factor '{}' at target {}", factor, t + 1),
                            });
                            sections.push(Word::identity());
                        }
                    }
                }
            }

            states.push(State {
                name: rs.name.clone(),
                output,
                sections,
            });
        }

        if !violations.is_empty() {
            return Err(ValidationError { violations });
        }
        Ok(Automaton {
            alphabet: d,
            states,
            index,
            level_cap: defaults::LEVEL_CAP,
        })
    }

    /// Builds an automaton directly from parts; used by tests and by the
    /// tensor extension. Panics on inconsistent shapes.
    pub fn from_parts(alphabet: usize, states: Vec<State>) -> Automaton {
        assert!(alphabet >= 2);
        let mut index = HashMap::new();
        for (k, s) in states.iter().enumerate() {
            assert_eq!(s.output.degree(), alphabet);
            assert_eq!(s.sections.len(), alphabet);
            let prev = index.insert(s.name.clone(), k as u16);
            assert!(prev.is_none(), "duplicate state {}", s.name);
        }
        Automaton {
            alphabet,
            states,
            index,
            level_cap: defaults::LEVEL_CAP,
        }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, id: u16) -> &State {
        &self.states[id as usize]
    }

    pub fn state_id(&self, name: &str) -> Option<u16> {
        self.index.get(name).copied()
    }

    pub fn level_size(&self, n: u32) -> Option<u64> {
        let mut size: u64 = 1;
        for _ in 0..n {
            size = size.checked_mul(self.alphabet as u64)?;
            if size > self.level_cap {
                return None;
            }
        }
        Some(size)
    }

    /// Parses the word syntax: "1" or state factors joined by '*', each with
    /// an optional '^-1'.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordParseError> {
        parse_word_with(text, &self.index)
    }

    /// Renders a word in the same syntax `parse_word` accepts.
    pub fn render_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|l| {
                let name = &self.states[l.state as usize].name;
                if l.inverse {
                    format!("{}^-1", name)
                } else {
                    name.clone()
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    /// Renders the definition back in the automaton file format.
    pub fn render_definition(&self) -> String {
        let mut out = format!("alphabet_size = {}\n", self.alphabet);
        for s in &self.states {
            out.push_str("\n[[states]]\n");
            out.push_str(&format!("name = {:?}\n", s.name));
            let output: Vec<String> = s.output.one_based().iter().map(|y| y.to_string()).collect();
            out.push_str(&format!("output = [{}]\n", output.join(", ")));
            let sections: Vec<String> = s
                .sections
                .iter()
                .map(|w| format!("{:?}", self.render_word(w)))
                .collect();
            out.push_str(&format!("sections = [{}]\n", sections.join(", ")));
        }
        out
    }

    /// Extension adding, for every current state g, a fresh state with
    /// trivial output and sections (identity, g). Only defined for binary
    /// alphabets. Fresh names append '~' until unused, so iterating the
    /// construction keeps all generations of states.
    pub fn tensor_extension(&self) -> Result<Automaton, TensorError> {
        if self.alphabet != 2 {
            return Err(TensorError::UnsupportedAlphabet { d: self.alphabet });
        }
        let mut states = self.states.clone();
        let mut index = self.index.clone();
        for (k, original) in self.states.iter().enumerate() {
            let mut name = format!("{}~", original.name);
            while index.contains_key(&name) {
                name.push('~');
            }
            index.insert(name.clone(), states.len() as u16);
            states.push(State {
                name,
                output: Perm::identity(2),
                sections: vec![Word::identity(), Word::single(k as u16)],
            });
        }
        Ok(Automaton {
            alphabet: 2,
            states,
            index,
            level_cap: self.level_cap,
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TensorError {
    #[error("tensor extension requires a binary alphabet, got {d}")]
    UnsupportedAlphabet { d: usize },
}

fn parse_word_with(text: &str, index: &HashMap<String, u16>) -> Result<Word, WordParseError> {
    let text = text.trim();
    if text == "1" {
        return Ok(Word::identity());
    }
    let mut letters = Vec::new();
    for factor in text.split('*') {
        let factor = factor.trim();
        if factor == "1" {
            continue;
        }
        let (name, inverse) = match factor.strip_suffix("^-1") {
            Some(base) => (base.trim(), true),
            None => (factor, false),
        };
        if name.is_empty() || name.contains('^') {
            return Err(WordParseError::Malformed {
                factor: factor.to_string(),
            });
        }
        match index.get(name) {
            Some(&id) => letters.push(Letter::new(id, inverse)),
            None => {
                return Err(WordParseError::UnknownState {
                    name: name.to_string(),
                })
            }
        }
    }
    Ok(Word::from_letters(letters))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWAP: &str = r#"
alphabet_size = 2

[[states]]
name = "t"
output = [2, 1]
sections = ["1", "1"]
"#;

    #[test]
    fn parses_a_minimal_definition() {
        let aut = Automaton::from_definition(SWAP).unwrap();
        assert_eq!(aut.alphabet(), 2);
        assert_eq!(aut.states().len(), 1);
        assert_eq!(aut.state(0).output.one_based(), vec![2, 1]);
        assert!(aut.state(0).sections.iter().all(|w| w.is_empty()));
    }

    #[test]
    fn validation_collects_every_violation() {
        let bad = r#"
alphabet_size = 1

[[states]]
name = "x"
output = [1, 1]
sections = ["x", "y"]
"#;
        let err = match Automaton::from_definition(bad) {
            Err(AutomatonError::Invalid(e)) => e,
            other => panic!("expected validation failure, got {:?}", other.map(|_| ())),
        };
        assert!(err
            .violations
            .iter()
            .any(|v: &Violation| matches!(v, Violation::EmptyAlphabet { .. })));
        assert!(err
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MalformedPermutation { .. })));
        assert!(err.violations.iter().any(
            |v| matches!(v, Violation::UnknownStateInSection { symbol, .. } if symbol == "y")
        ));
    }

    #[test]
    fn word_syntax_round_trips() {
        let defn = r#"
alphabet_size = 2

[[states]]
name = "t"
output = [2, 1]
sections = ["1", "1"]

[[states]]
name = "s"
output = [1, 2]
sections = ["t", "1"]
"#;
        let aut = Automaton::from_definition(defn).unwrap();
        for text in ["1", "t", "s*t^-1*s", "t^-1"] {
            let w = aut.parse_word(text).unwrap();
            assert_eq!(aut.render_word(&w), text);
        }
        // reduction happens at parse time
        let w = aut.parse_word("t*t^-1").unwrap();
        assert!(w.is_empty());
        assert_eq!(
            aut.parse_word("t*u"),
            Err(WordParseError::UnknownState {
                name: "u".to_string()
            })
        );
    }

    #[test]
    fn definition_render_round_trips() {
        let aut = Automaton::from_definition(SWAP).unwrap();
        let again = Automaton::from_definition(&aut.render_definition()).unwrap();
        assert_eq!(again.states().len(), 1);
        assert_eq!(again.state(0).output.one_based(), vec![2, 1]);
    }

    #[test]
    fn tensor_extension_adds_tilde_states() {
        let aut = Automaton::from_definition(SWAP).unwrap();
        let ext = aut.tensor_extension().unwrap();
        assert_eq!(ext.states().len(), 2);
        let tilde = ext.state(ext.state_id("t~").unwrap());
        assert!(tilde.output.is_identity());
        assert!(tilde.sections[0].is_empty());
        assert_eq!(tilde.sections[1], Word::single(0));
        // iterating resolves name collisions with more tildes
        let ext2 = ext.tensor_extension().unwrap();
        assert_eq!(ext2.states().len(), 4);
        assert!(ext2.state_id("t~~").is_some());
        assert!(ext2.state_id("t~~~").is_some());
    }
}
