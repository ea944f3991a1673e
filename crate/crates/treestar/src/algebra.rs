//! Linear combinations of group words with Gaussian-rational coefficients.
//!
//! Terms are kept canonical: words are pairwise distinct as tree
//! automorphisms (not merely as free words), coefficients are nonzero, and
//! terms are sorted by word length then lexicographically. Every binary
//! operation therefore needs the automaton, which decides word equality.

use crate::automaton::Automaton;
use crate::scalar::GaussianRational;
use crate::words::Word;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    terms: Vec<(Word, GaussianRational)>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_word(Word::identity())
    }

    pub fn from_word(w: Word) -> Self {
        AlgebraElement {
            terms: vec![(w, GaussianRational::one())],
        }
    }

    pub fn scalar(c: GaussianRational) -> Self {
        Self::monomial(c, Word::identity())
    }

    pub fn monomial(c: GaussianRational, w: Word) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            AlgebraElement { terms: vec![(w, c)] }
        }
    }

    /// Canonicalizes an arbitrary term list.
    pub fn from_terms(aut: &Automaton, terms: Vec<(Word, GaussianRational)>) -> Self {
        AlgebraElement {
            terms: merge_terms(aut, terms),
        }
    }

    pub fn terms(&self) -> &[(Word, GaussianRational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &AlgebraElement, aut: &Automaton) -> AlgebraElement {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::from_terms(aut, terms)
    }

    pub fn sub(&self, other: &AlgebraElement, aut: &Automaton) -> AlgebraElement {
        self.add(&other.neg(), aut)
    }

    pub fn neg(&self) -> AlgebraElement {
        AlgebraElement {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> AlgebraElement {
        if c.is_zero() {
            return Self::zero();
        }
        AlgebraElement {
            terms: self.terms.iter().map(|(w, k)| (w.clone(), c * k)).collect(),
        }
    }

    pub fn mul(&self, other: &AlgebraElement, aut: &Automaton) -> AlgebraElement {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (wa, ca) in &self.terms {
            for (wb, cb) in &other.terms {
                terms.push((wa.concat(wb), ca * cb));
            }
        }
        Self::from_terms(aut, terms)
    }

    /// The adjoint: conjugate coefficients, invert words.
    pub fn star(&self) -> AlgebraElement {
        let mut terms: Vec<(Word, GaussianRational)> = self
            .terms
            .iter()
            .map(|(w, c)| (w.inverse(), c.conj()))
            .collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        AlgebraElement { terms }
    }

    pub fn equal(&self, other: &AlgebraElement, aut: &Automaton) -> bool {
        self.sub(other, aut).is_zero()
    }

    pub fn is_self_adjoint(&self, aut: &Automaton) -> bool {
        self.equal(&self.star(), aut)
    }

    /// Coefficient of the identity, summed over all terms whose words act
    /// trivially.
    pub fn coefficient_at_identity(&self, aut: &Automaton) -> GaussianRational {
        let mut total = GaussianRational::zero();
        for (w, c) in &self.terms {
            if aut.is_trivial(w) {
                total = &total + c;
            }
        }
        total
    }

    /// Renders in the expression grammar; parsing the result reproduces an
    /// equal element.
    pub fn render(&self, aut: &Automaton) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let (sign_negative, body) = render_term(aut, w, c);
            if k == 0 {
                if sign_negative {
                    out.push('-');
                }
                out.push_str(&body);
            } else {
                out.push_str(if sign_negative { " - " } else { " + " });
                out.push_str(&body);
            }
        }
        out
    }
}

/// Splits a term into an extracted sign and an unsigned body string.
fn render_term(aut: &Automaton, w: &Word, c: &GaussianRational) -> (bool, String) {
    use num_traits::{One, Signed, Zero};
    let word_part = if w.is_empty() {
        None
    } else {
        Some(aut.render_word(w))
    };
    let (negative, coeff) = if c.is_real() {
        (c.re.is_negative(), render_rational_abs(&c.re))
    } else if c.re.is_zero() {
        // pure imaginary: extract the sign of the imaginary part
        let mag = c.im.abs();
        let s = if mag.is_one() {
            "i".to_string()
        } else {
            format!("{}*i", render_rational_abs(&c.im))
        };
        (c.im.is_negative(), s)
    } else {
        // general complex coefficients stay parenthesized with inner signs
        let im_abs = c.im.abs();
        let im_str = if im_abs.is_one() {
            "i".to_string()
        } else {
            format!("{}*i", render_rational_abs(&c.im))
        };
        let joint = if c.im.is_negative() { " - " } else { " + " };
        (false, format!("({}{}{})", c.re, joint, im_str))
    };
    let body = match word_part {
        None => coeff,
        Some(ws) => {
            if coeff == "1" {
                ws
            } else {
                format!("{}*{}", coeff, ws)
            }
        }
    };
    (negative, body)
}

fn render_rational_abs(q: &num_rational::BigRational) -> String {
    use num_traits::Signed;
    q.abs().to_string()
}

/// Sorts terms canonically and merges words that are equal as automorphisms;
/// the smallest word of each class is kept as its representative.
fn merge_terms(
    aut: &Automaton,
    mut terms: Vec<(Word, GaussianRational)>,
) -> Vec<(Word, GaussianRational)> {
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut reps: Vec<(Word, GaussianRational)> = Vec::new();
    let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
    for (w, c) in terms {
        if c.is_zero() {
            continue;
        }
        let sig = aut.signature(&w);
        let bucket = buckets.entry(sig).or_default();
        match bucket.iter().find(|&&k| aut.words_equal(&reps[k].0, &w)) {
            Some(&k) => {
                let sum = &reps[k].1 + &c;
                reps[k].1 = sum;
            }
            None => {
                bucket.push(reps.len());
                reps.push((w, c));
            }
        }
    }
    reps.retain(|(_, c)| !c.is_zero());
    reps.sort_by(|a, b| a.0.cmp(&b.0));
    reps
}
