//! The matrix recursion: algebra elements as level-n matrices over the
//! algebra, and the slice-wise conditional expectation back onto the image.
//!
//! A word g becomes the matrix with section(g, v_i) at (i, j) whenever g
//! maps v_j to v_i (rows are targets, columns sources, acting on column
//! vectors); elements extend linearly. The embedding is a *-homomorphism,
//! and evaluating each entry at level m reproduces the level n+m matrix of
//! the original element block by block.

use crate::action::LevelError;
use crate::algebra::AlgebraElement;
use crate::automaton::Automaton;
use crate::defaults;
use crate::levelrep::{rho_level, LevelMatrix};
use crate::scalar::GaussianRational;
use crate::words::{Vertex, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionMatrix {
    n: u32,
    dim: usize,
    /// Row-major, dim*dim entries.
    entries: Vec<AlgebraElement>,
}

impl RecursionMatrix {
    pub fn zero(n: u32, dim: usize) -> Self {
        RecursionMatrix {
            n,
            dim,
            entries: vec![AlgebraElement::zero(); dim * dim],
        }
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.entries[i * self.dim + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, value: AlgebraElement) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(AlgebraElement::is_zero)
    }

    pub fn add(&self, other: &RecursionMatrix, aut: &Automaton) -> RecursionMatrix {
        assert_eq!(self.dim, other.dim, "level mismatch");
        RecursionMatrix {
            n: self.n,
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b, aut))
                .collect(),
        }
    }

    pub fn sub(&self, other: &RecursionMatrix, aut: &Automaton) -> RecursionMatrix {
        self.add(&other.neg(), aut)
    }

    pub fn neg(&self) -> RecursionMatrix {
        RecursionMatrix {
            n: self.n,
            dim: self.dim,
            entries: self.entries.iter().map(AlgebraElement::neg).collect(),
        }
    }

    pub fn scale(&self, c: &GaussianRational) -> RecursionMatrix {
        RecursionMatrix {
            n: self.n,
            dim: self.dim,
            entries: self.entries.iter().map(|e| e.scale(c)).collect(),
        }
    }

    pub fn mul(&self, other: &RecursionMatrix, aut: &Automaton) -> RecursionMatrix {
        assert_eq!(self.dim, other.dim, "level mismatch");
        let mut out = RecursionMatrix::zero(self.n, self.dim);
        for i in 0..self.dim {
            for k in 0..self.dim {
                let a = self.entry(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..self.dim {
                    let b = other.entry(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.entry(i, j).add(&a.mul(b, aut), aut);
                    out.set_entry(i, j, cur);
                }
            }
        }
        out
    }

    /// Conjugate transpose with entrywise star.
    pub fn star(&self) -> RecursionMatrix {
        let mut out = RecursionMatrix::zero(self.n, self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set_entry(j, i, self.entry(i, j).star());
            }
        }
        out
    }

    pub fn equal(&self, other: &RecursionMatrix, aut: &Automaton) -> bool {
        self.dim == other.dim
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.equal(b, aut))
    }

    /// `[[0, b], [c, 0]]` style rendering with entries in word syntax.
    pub fn render(&self, aut: &Automaton) -> String {
        let rows: Vec<String> = (0..self.dim)
            .map(|i| {
                let cells: Vec<String> =
                    (0..self.dim).map(|j| self.entry(i, j).render(aut)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("[{}]", rows.join(", "))
    }
}

fn level_dim(aut: &Automaton, n: u32) -> Result<usize, LevelError> {
    let dim = aut.level_size(n).ok_or(LevelError::TooLarge {
        d: aut.alphabet(),
        n,
        cap: aut.level_cap,
    })? as usize;
    // the matrix form is dense in its dimension; keep it within the dense cap
    if dim > defaults::DENSE_CAP {
        return Err(LevelError::TooLarge {
            d: aut.alphabet(),
            n,
            cap: defaults::DENSE_CAP as u64,
        });
    }
    Ok(dim)
}

/// The level-n matrix form of an element.
pub fn recursion_matrix(
    aut: &Automaton,
    x: &AlgebraElement,
    n: u32,
) -> Result<RecursionMatrix, LevelError> {
    let dim = level_dim(aut, n)?;
    let d = aut.alphabet();
    let mut cells: Vec<Vec<(Word, GaussianRational)>> = vec![Vec::new(); dim * dim];
    for (w, c) in x.terms() {
        for j in 0..dim {
            let source = Vertex::from_index(j, n, d);
            let target = aut.act(w, &source);
            let i = target.index(d);
            cells[i * dim + j].push((aut.section(w, &target), c.clone()));
        }
    }
    let mut out = RecursionMatrix::zero(n, dim);
    for (k, terms) in cells.into_iter().enumerate() {
        if !terms.is_empty() {
            out.entries[k] = AlgebraElement::from_terms(aut, terms);
        }
    }
    Ok(out)
}

/// Evaluates every entry at level m and assembles the blocks; equals the
/// level n+m matrix of the original element.
pub fn block_evaluate(
    aut: &Automaton,
    b: &RecursionMatrix,
    m: u32,
) -> Result<LevelMatrix, LevelError> {
    let inner = aut.level_size(m).ok_or(LevelError::TooLarge {
        d: aut.alphabet(),
        n: m,
        cap: aut.level_cap,
    })? as usize;
    let total = b.dim() * inner;
    let mut acc = LevelMatrix::zero(b.level() + m, total);
    for i in 0..b.dim() {
        for j in 0..b.dim() {
            let e = b.entry(i, j);
            if e.is_zero() {
                continue;
            }
            let block = rho_level(aut, e, m)?;
            acc = acc.add(&block.shifted(i * inner, j * inner, total, b.level() + m));
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ExpectError {
    #[error(
        "non-unique lift for entry ({i},{j}): words `{first}` and `{second}` both map \
         vertex {j} to {i} with the same section; the group is not free enough"
    )]
    NonUniqueLift {
        i: usize,
        j: usize,
        first: String,
        second: String,
    },
    #[error(transparent)]
    Level(#[from] LevelError),
}

#[derive(Debug, Clone)]
pub struct ExpectationOutcome {
    pub matrix: RecursionMatrix,
    /// Entry coordinates and rendered words for which no lift existed within
    /// the search length; their contribution is 0, possibly a false
    /// negative.
    pub exhausted: Vec<(usize, usize, String)>,
}

impl ExpectationOutcome {
    pub fn search_exhausted(&self) -> bool {
        !self.exhausted.is_empty()
    }
}

/// The slice-wise conditional expectation onto the image of the matrix
/// form. Each elementary slice e_{i,j} tensor g is replaced by (1/dⁿ) times
/// the matrix form of the word h carrying v_j to v_i with section g at v_i,
/// found by breadth-first search in word length; the search continues
/// through the first match's length to detect non-uniqueness, which would
/// contradict the freeness hypothesis behind the expectation.
pub fn conditional_expectation(
    aut: &Automaton,
    b: &RecursionMatrix,
    search_len: usize,
) -> Result<ExpectationOutcome, ExpectError> {
    let n = b.level();
    let dim = b.dim();
    let d = aut.alphabet();
    let words = aut.reduced_words(search_len);
    let perms: Vec<_> = words
        .iter()
        .map(|w| aut.act_level(w, n))
        .collect::<Result<Vec<_>, _>>()?;
    let weight = GaussianRational::from_rational(BigRational::new(
        BigInt::one(),
        BigInt::from(dim),
    ));
    let mut acc = RecursionMatrix::zero(n, dim);
    let mut exhausted = Vec::new();
    for i in 0..dim {
        let target = Vertex::from_index(i, n, d);
        for j in 0..dim {
            let cell = b.entry(i, j);
            for (g, c) in cell.terms() {
                let mut found: Option<(usize, usize)> = None;
                for (k, h) in words.iter().enumerate() {
                    if let Some((k0, len0)) = found {
                        if h.len() > len0 {
                            break;
                        }
                        if perms[k].apply(j as u32) as usize == i
                            && aut.words_equal(&aut.section(h, &target), g)
                            && !aut.words_equal(&words[k0], h)
                        {
                            return Err(ExpectError::NonUniqueLift {
                                i,
                                j,
                                first: aut.render_word(&words[k0]),
                                second: aut.render_word(h),
                            });
                        }
                        continue;
                    }
                    if perms[k].apply(j as u32) as usize == i
                        && aut.words_equal(&aut.section(h, &target), g)
                    {
                        found = Some((k, h.len()));
                    }
                }
                match found {
                    Some((k0, _)) => {
                        let lift = recursion_matrix(aut, &AlgebraElement::from_word(words[k0].clone()), n)?;
                        acc = acc.add(&lift.scale(&(&weight * c)), aut);
                    }
                    None => exhausted.push((i, j, aut.render_word(g))),
                }
            }
        }
    }
    Ok(ExpectationOutcome {
        matrix: acc,
        exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

    fn aleshin() -> Automaton {
        Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "a"
output = [2, 1]
sections = ["b", "c"]

[[states]]
name = "b"
output = [2, 1]
sections = ["c", "b"]

[[states]]
name = "c"
output = [1, 2]
sections = ["a", "a"]
"#,
        )
        .unwrap()
    }

    fn subfix() -> Automaton {
        Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "t"
output = [2, 1]
sections = ["1", "1"]

[[states]]
name = "s"
output = [1, 2]
sections = ["t", "1"]
"#,
        )
        .unwrap()
    }

    #[test]
    fn matrix_form_of_the_generators() {
        let aut = aleshin();
        let a = parse_expression(&aut, "a").unwrap();
        let m = recursion_matrix(&aut, &a, 1).unwrap();
        assert_eq!(m.render(&aut), "[[0, b], [c, 0]]");
        let aut2 = subfix();
        let s = parse_expression(&aut2, "s").unwrap();
        let m = recursion_matrix(&aut2, &s, 1).unwrap();
        assert_eq!(m.render(&aut2), "[[t, 0], [0, 1]]");
        let one = parse_expression(&aut2, "1").unwrap();
        let m = recursion_matrix(&aut2, &one, 2).unwrap();
        assert_eq!(m.render(&aut2), "[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]");
    }

    #[test]
    fn matrix_form_is_a_star_homomorphism() {
        let aut = aleshin();
        let x = parse_expression(&aut, "(1 + i)*a*b - c").unwrap();
        let y = parse_expression(&aut, "b^-1 + 2*c*a").unwrap();
        for n in 1..=2u32 {
            let mx = recursion_matrix(&aut, &x, n).unwrap();
            let my = recursion_matrix(&aut, &y, n).unwrap();
            let mxy = recursion_matrix(&aut, &x.mul(&y, &aut), n).unwrap();
            assert!(mx.mul(&my, &aut).equal(&mxy, &aut));
            let mxs = recursion_matrix(&aut, &x.star(), n).unwrap();
            assert!(mx.star().equal(&mxs, &aut));
        }
    }

    #[test]
    fn block_evaluation_reproduces_the_level_matrix() {
        let aut = aleshin();
        let x = parse_expression(&aut, "a + 2*b*c^-1 - i").unwrap();
        for n in 1..=2u32 {
            let b = recursion_matrix(&aut, &x, n).unwrap();
            for m in 0..=2u32 {
                let big = block_evaluate(&aut, &b, m).unwrap();
                assert_eq!(big, rho_level(&aut, &x, n + m).unwrap());
            }
        }
    }

    #[test]
    fn expectation_fixes_the_image() {
        let aut = aleshin();
        for gen in ["a", "b", "c"] {
            let x = parse_expression(&aut, gen).unwrap();
            let b = recursion_matrix(&aut, &x, 1).unwrap();
            let e = conditional_expectation(&aut, &b, 3).unwrap();
            assert!(!e.search_exhausted());
            assert!(e.matrix.equal(&b, &aut));
        }
    }

    #[test]
    fn elementary_slice_lifts_through_the_generator() {
        let aut = aleshin();
        // the (0,1) slice holding b lifts to a, whose matrix form has b
        // exactly there
        let mut b = RecursionMatrix::zero(1, 2);
        b.set_entry(0, 1, parse_expression(&aut, "b").unwrap());
        let e = conditional_expectation(&aut, &b, 3).unwrap();
        assert!(!e.search_exhausted());
        let a = recursion_matrix(&aut, &parse_expression(&aut, "a").unwrap(), 1).unwrap();
        let expected = a.scale(&GaussianRational::from_ratio(1, 2));
        assert!(e.matrix.equal(&expected, &aut));
    }

    #[test]
    fn unliftable_slice_is_flagged() {
        let aut = aleshin();
        // sections of reduced words never cancel here, so a single-letter
        // section needs a single-letter fixing word, and those have section
        // a or its inverse, never b
        let mut b = RecursionMatrix::zero(1, 2);
        b.set_entry(0, 0, parse_expression(&aut, "b").unwrap());
        let e = conditional_expectation(&aut, &b, 3).unwrap();
        assert!(e.search_exhausted());
        assert!(e.matrix.is_zero());
        assert_eq!(e.exhausted, vec![(0, 0, "b".to_string())]);
    }

    #[test]
    fn expectation_is_idempotent_on_samples() {
        let aut = aleshin();
        let mut b = RecursionMatrix::zero(1, 2);
        b.set_entry(0, 1, parse_expression(&aut, "b").unwrap());
        b.set_entry(1, 1, parse_expression(&aut, "2*c").unwrap());
        let e1 = conditional_expectation(&aut, &b, 3).unwrap();
        let e2 = conditional_expectation(&aut, &e1.matrix, 3).unwrap();
        assert!(e2.matrix.equal(&e1.matrix, &aut));
    }

    #[test]
    fn expectation_is_a_bimodule_map_on_a_sample() {
        let aut = aleshin();
        let phi_a = recursion_matrix(&aut, &parse_expression(&aut, "a").unwrap(), 1).unwrap();
        let phi_c = recursion_matrix(&aut, &parse_expression(&aut, "c").unwrap(), 1).unwrap();
        let mut b = RecursionMatrix::zero(1, 2);
        b.set_entry(0, 1, parse_expression(&aut, "b").unwrap());
        b.set_entry(0, 0, parse_expression(&aut, "c*b").unwrap());
        let lhs = conditional_expectation(&aut, &phi_a.mul(&b, &aut).mul(&phi_c, &aut), 4)
            .unwrap()
            .matrix;
        let rhs = phi_a
            .mul(&conditional_expectation(&aut, &b, 4).unwrap().matrix, &aut)
            .mul(&phi_c, &aut);
        assert!(lhs.equal(&rhs, &aut));
    }
}
