//! Kernel-element certificates for the boundary representation.
//!
//! An element of the group algebra lies in the kernel of the quasi-regular
//! boundary representation exactly when it annihilates every delta at every
//! boundary point. Products of (1 - g) over elements g that pointwise fix
//! complementary subtrees do so by construction; this module builds such
//! candidates, searches automata for the ingredients, and provides the
//! finite-level verification that the annihilation actually happens.

use crate::algebra::AlgebraElement;
use crate::automaton::Automaton;
use crate::action::LevelError;
use crate::levelrep::tensor_power_apply;
use crate::words::{Vertex, Word};

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("kernel product inputs must commute pairwise; {left} and {right} do not")]
    NonCommutingInputs { left: String, right: String },
    #[error("no kernel construction found among words of length at most {max_length}")]
    SearchExhausted { max_length: usize },
    #[error("the stabilizer-based search drivers support alphabets of size 2 and 3, not {d}")]
    UnsupportedAlphabet { d: usize },
}

/// Expanded product with a nonzero certificate.
#[derive(Debug, Clone)]
pub struct KernelCandidate {
    pub element: AlgebraElement,
    /// Whether the expansion survives word canonicalization.
    pub nonzero: bool,
}

/// Expands the product over (1 - g) for pairwise commuting inputs. The
/// commutation requirement is what lets the annihilation argument reorder
/// factors so that each boundary point meets its own stabilizer last.
pub fn kernel_candidate_stab(
    aut: &Automaton,
    gs: &[Word],
) -> Result<KernelCandidate, KernelError> {
    for i in 0..gs.len() {
        for j in i + 1..gs.len() {
            let lhs = gs[i].concat(&gs[j]);
            let rhs = gs[j].concat(&gs[i]);
            if !aut.words_equal(&lhs, &rhs) {
                return Err(KernelError::NonCommutingInputs {
                    left: aut.render_word(&gs[i]),
                    right: aut.render_word(&gs[j]),
                });
            }
        }
    }
    let mut product = AlgebraElement::one();
    for g in gs {
        let factor = AlgebraElement::one().sub(&AlgebraElement::from_word(g.clone()), aut);
        product = product.mul(&factor, aut);
    }
    let nonzero = !product.is_zero();
    Ok(KernelCandidate {
        element: product,
        nonzero,
    })
}

/// True iff the element annihilates the delta at every p-tuple of vertices
/// of levels at most `max_level`. Finite evidence for membership in the
/// kernel of the p-fold tensor power of the boundary representation.
pub fn verify_kernel(
    aut: &Automaton,
    x: &AlgebraElement,
    p: usize,
    max_level: u32,
) -> Result<bool, LevelError> {
    assert!(p >= 1, "tensor power must be at least 1");
    let d = aut.alphabet();
    let mut verts: Vec<Vertex> = Vec::new();
    for level in 0..=max_level {
        let size = aut
            .level_size(level)
            .ok_or(LevelError::TooLarge {
                d,
                n: level,
                cap: aut.level_cap,
            })?;
        for index in 0..size as usize {
            verts.push(Vertex::from_index(index, level, d));
        }
    }
    let mut tuple = vec![0usize; p];
    loop {
        let z: Vec<Vertex> = tuple.iter().map(|&k| verts[k].clone()).collect();
        if !tensor_power_apply(aut, x, &z).is_empty() {
            return Ok(false);
        }
        // odometer step over the tuple index vector
        let mut pos = 0;
        loop {
            if pos == p {
                return Ok(true);
            }
            tuple[pos] += 1;
            if tuple[pos] < verts.len() {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

/// Which construction produced a kernel element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelCase {
    /// d = 2: a subtree stabilizer conjugated across the root swap.
    StabilizerConjugate,
    /// d = 3: a stabilizer of two subtrees conjugated off its support.
    PairStabilizerConjugate,
    /// d = 3: a commutator of single-subtree stabilizers promoted to a
    /// two-subtree stabilizer, then conjugated off its support.
    CommutatorConjugate,
    /// d = 3: a product over single-subtree stabilizers at all three
    /// level-1 vertices.
    TripleProduct,
}

impl KernelCase {
    /// The kebab-case tag, matching the serialized form.
    pub fn name(self) -> &'static str {
        match self {
            KernelCase::StabilizerConjugate => "stabilizer-conjugate",
            KernelCase::PairStabilizerConjugate => "pair-stabilizer-conjugate",
            KernelCase::CommutatorConjugate => "commutator-conjugate",
            KernelCase::TripleProduct => "triple-product",
        }
    }
}

#[derive(Debug, Clone)]
pub struct KernelConstruction {
    pub case: KernelCase,
    pub element: AlgebraElement,
    /// The commuting inputs of the final product.
    pub generators: Vec<Word>,
    /// The conjugating word, when the case uses one.
    pub conjugator: Option<Word>,
}

/// Searches for a kernel element among words of bounded length, following
/// the stabilizer case analysis for alphabets of size 2 and 3.
pub fn kernel_search(
    aut: &Automaton,
    max_len: usize,
) -> Result<KernelConstruction, KernelError> {
    match aut.alphabet() {
        2 => kernel_search_d2(aut, max_len),
        3 => kernel_search_d3(aut, max_len),
        d => Err(KernelError::UnsupportedAlphabet { d }),
    }
}

/// Whether the word fixes the first level and fixes the subtree below each
/// listed letter pointwise.
fn fixes_subtrees_pointwise(aut: &Automaton, w: &Word, targets: &[u16]) -> bool {
    aut.root_permutation(w).is_identity()
        && targets
            .iter()
            .all(|&i| aut.is_trivial(&aut.section_at_letter(w, i)))
}

/// Words fixing the first level and fixing each subtree in `targets`
/// pointwise, nontrivial, up to group equality.
fn level1_subtree_stabilizers(
    aut: &Automaton,
    elements: &[Word],
    targets: &[u16],
) -> Vec<Word> {
    elements
        .iter()
        .filter(|w| !aut.is_trivial(w) && fixes_subtrees_pointwise(aut, w, targets))
        .cloned()
        .collect()
}

/// First word in enumeration order whose root permutation moves the vertex
/// set off itself.
fn set_mover<'a>(aut: &Automaton, elements: &'a [Word], set: &[u16]) -> Option<&'a Word> {
    elements.iter().find(|h| {
        let perm = aut.root_permutation(h);
        set.iter().any(|&v| !set.contains(&(perm.apply(v as u32) as u16)))
    })
}

fn conjugate_construction(
    aut: &Automaton,
    case: KernelCase,
    g: Word,
    h: &Word,
) -> Result<KernelConstruction, KernelError> {
    let conjugate = h.concat(&g).concat(&h.inverse());
    let candidate = kernel_candidate_stab(aut, &[g.clone(), conjugate.clone()])?;
    Ok(KernelConstruction {
        case,
        element: candidate.element,
        generators: vec![g, conjugate],
        conjugator: Some(h.clone()),
    })
}

fn kernel_search_d2(aut: &Automaton, max_len: usize) -> Result<KernelConstruction, KernelError> {
    let elements = aut.distinct_elements(max_len);
    // g pointwise fixes one subtree; h swaps the two subtrees; the
    // conjugate then pointwise fixes the other, so the supports split the
    // boundary between the two factors.
    let exhausted = KernelError::SearchExhausted {
        max_length: max_len,
    };
    let g = elements
        .iter()
        .find(|w| {
            !aut.is_trivial(w)
                && (fixes_subtrees_pointwise(aut, w, &[0])
                    || fixes_subtrees_pointwise(aut, w, &[1]))
        })
        .ok_or(exhausted.clone())?;
    let h = elements
        .iter()
        .find(|w| !aut.root_permutation(w).is_identity())
        .ok_or(exhausted)?;
    conjugate_construction(aut, KernelCase::StabilizerConjugate, g.clone(), h)
}

fn kernel_search_d3(aut: &Automaton, max_len: usize) -> Result<KernelConstruction, KernelError> {
    let elements = aut.distinct_elements(max_len);
    let pairs: [[u16; 2]; 3] = [[0, 1], [0, 2], [1, 2]];
    let movers: Vec<Option<&Word>> = pairs
        .iter()
        .map(|pair| set_mover(aut, &elements, pair))
        .collect();
    // first case: some pair of subtrees has a nontrivial pointwise
    // stabilizer inside the level stabilizer; scan element-major so the
    // shortest witness fires
    for g in &elements {
        if aut.is_trivial(g) {
            continue;
        }
        for (pair, mover) in pairs.iter().zip(&movers) {
            let Some(h) = mover else { continue };
            if fixes_subtrees_pointwise(aut, g, pair) {
                return conjugate_construction(
                    aut,
                    KernelCase::PairStabilizerConjugate,
                    g.clone(),
                    h,
                );
            }
        }
    }
    let singles: Vec<Vec<Word>> = (0..3u16)
        .map(|v| level1_subtree_stabilizers(aut, &elements, &[v]))
        .collect();
    // second case: two single-subtree stabilizers at different vertices
    // fail to commute; their commutator pointwise fixes both subtrees
    for (k, pair) in pairs.iter().enumerate() {
        let Some(h) = movers[k] else { continue };
        let (u, w) = (pair[0] as usize, pair[1] as usize);
        for g1 in &singles[u] {
            for g2 in &singles[w] {
                let lhs = g1.concat(g2);
                let rhs = g2.concat(g1);
                if aut.words_equal(&lhs, &rhs) {
                    continue;
                }
                let commutator = lhs.concat(&g1.inverse()).concat(&g2.inverse());
                return conjugate_construction(
                    aut,
                    KernelCase::CommutatorConjugate,
                    commutator,
                    h,
                );
            }
        }
    }
    // third case: everything commutes; some triple product across the
    // three vertices survives canonicalization
    for g1 in &singles[0] {
        for g2 in &singles[1] {
            for g3 in &singles[2] {
                let gs = vec![g1.clone(), g2.clone(), g3.clone()];
                let candidate = kernel_candidate_stab(aut, &gs)?;
                if candidate.nonzero {
                    return Ok(KernelConstruction {
                        case: KernelCase::TripleProduct,
                        element: candidate.element,
                        generators: gs,
                        conjugator: None,
                    });
                }
            }
        }
    }
    Err(KernelError::SearchExhausted {
        max_length: max_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expression;

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

    fn odo() -> Automaton {
        Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "a"
output = [2, 1]
sections = ["a", "1"]
"#,
        )
        .unwrap()
    }

    fn t3fix() -> Automaton {
        Automaton::from_definition(
            r#"
alphabet_size = 3

[[states]]
name = "r"
output = [2, 3, 1]
sections = ["1", "1", "1"]

[[states]]
name = "s"
output = [1, 2, 3]
sections = ["r", "1", "1"]
"#,
        )
        .unwrap()
    }

    #[test]
    fn candidate_on_the_subtree_fixer() {
        let aut = subfix();
        let s = aut.parse_word("s").unwrap();
        let conj = aut.parse_word("t*s*t^-1").unwrap();
        let c = kernel_candidate_stab(&aut, &[s, conj]).unwrap();
        assert!(c.nonzero);
        assert_eq!(c.element.support_size(), 4);
        let direct = parse_expression(&aut, "(1 - s)*(1 - t*s*t^-1)").unwrap();
        assert!(c.element.equal(&direct, &aut));
    }

    #[test]
    fn candidate_of_a_trivial_input_is_zero() {
        let aut = subfix();
        let w = aut.parse_word("t*t").unwrap();
        let c = kernel_candidate_stab(&aut, &[w]).unwrap();
        assert!(!c.nonzero);
        assert!(c.element.is_zero());
    }

    #[test]
    fn non_commuting_inputs_are_rejected() {
        let aut = subfix();
        let s = aut.parse_word("s").unwrap();
        let t = aut.parse_word("t").unwrap();
        let err = kernel_candidate_stab(&aut, &[s, t]).unwrap_err();
        assert!(matches!(err, KernelError::NonCommutingInputs { .. }));
    }

    #[test]
    fn verification_accepts_the_stabilizer_product() {
        let aut = subfix();
        let x = parse_expression(&aut, "(1 - s)*(1 - t*s*t^-1)").unwrap();
        assert!(verify_kernel(&aut, &x, 1, 6).unwrap());
    }

    #[test]
    fn verification_rejects_a_moving_word() {
        let aut = subfix();
        let x = parse_expression(&aut, "1 - t").unwrap();
        assert!(!verify_kernel(&aut, &x, 1, 3).unwrap());
        let y = parse_expression(&aut, "1 - s").unwrap();
        assert!(!verify_kernel(&aut, &y, 1, 3).unwrap());
    }

    #[test]
    fn two_factor_products_certify_only_the_first_power() {
        // a tuple split across the two subtrees escapes both factors, so
        // the element is not in the kernel of the second tensor power
        let aut = subfix();
        let x = parse_expression(&aut, "(1 - s)*(1 - t*s*t^-1)").unwrap();
        assert!(verify_kernel(&aut, &x, 1, 6).unwrap());
        assert!(!verify_kernel(&aut, &x, 2, 2).unwrap());
    }

    #[test]
    fn level_two_rist_products_clear_higher_powers() {
        // with one commuting factor per level-2 subtree, any tuple of
        // fewer than four vertices misses some subtree, whose factor then
        // annihilates the whole delta
        let aut = odo().tensor_extension().unwrap().tensor_extension().unwrap();
        let witnesses: Vec<Word> = (0..4)
            .map(|k| {
                let v = Vertex::from_index(k, 2, 2);
                aut.rist_witness(&v, 4).expect("level-2 rist witness")
            })
            .collect();
        let c = kernel_candidate_stab(&aut, &witnesses).unwrap();
        assert!(c.nonzero);
        assert_eq!(c.element.support_size(), 16);
        assert!(verify_kernel(&aut, &c.element, 1, 3).unwrap());
        assert!(verify_kernel(&aut, &c.element, 2, 2).unwrap());
        assert!(verify_kernel(&aut, &c.element, 3, 2).unwrap());
    }

    #[test]
    fn binary_driver_finds_the_expected_product() {
        let aut = subfix();
        let found = kernel_search(&aut, 3).unwrap();
        assert_eq!(found.case, KernelCase::StabilizerConjugate);
        let expected = parse_expression(&aut, "(1 - s)*(1 - t*s*t^-1)").unwrap();
        assert!(found.element.equal(&expected, &aut));
        assert!(verify_kernel(&aut, &found.element, 1, 6).unwrap());
    }

    #[test]
    fn binary_driver_fails_on_a_free_action() {
        let aut = odo();
        let err = kernel_search(&aut, 4).unwrap_err();
        assert_eq!(err, KernelError::SearchExhausted { max_length: 4 });
    }

    #[test]
    fn ternary_driver_fires_the_pair_stabilizer_case() {
        let aut = t3fix();
        let found = kernel_search(&aut, 3).unwrap();
        assert_eq!(found.case, KernelCase::PairStabilizerConjugate);
        assert_eq!(aut.render_word(&found.generators[0]), "s");
        assert_eq!(aut.render_word(found.conjugator.as_ref().unwrap()), "r");
        assert_eq!(found.element.support_size(), 4);
        assert!(verify_kernel(&aut, &found.element, 1, 4).unwrap());
    }

    #[test]
    fn triple_products_over_disjoint_supports_verify() {
        let aut = t3fix();
        let x = parse_expression(&aut, "(1 - s)*(1 - r*s*r^-1)*(1 - r^-1*s*r)").unwrap();
        assert_eq!(x.support_size(), 8);
        assert!(verify_kernel(&aut, &x, 1, 3).unwrap());
    }

    #[test]
    fn tensor_extension_gives_rist_products() {
        let aut = odo().tensor_extension().unwrap();
        let found = kernel_search(&aut, 3).unwrap();
        assert_eq!(found.case, KernelCase::StabilizerConjugate);
        let expected = parse_expression(&aut, "(1 - a~)*(1 - a*a~*a^-1)").unwrap();
        assert!(found.element.equal(&expected, &aut));
        assert!(verify_kernel(&aut, &found.element, 1, 6).unwrap());
    }
}
