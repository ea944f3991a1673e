//! The action of words on the rooted tree: images, sections, level
//! permutations, triviality and bounded searches.
//!
//! Sections are target-indexed throughout. The defining identity, for a word
//! g, a letter x and a suffix w, is
//!
//! ```text
//! act(g, x·w) = act(g, x) · act(section_at(g, act(g, x)), w)
//! ```
//!
//! Products compose right to left: `(g·h)` acts by h first. The section of a
//! product then splits as `section_at(g·h, t) = section_at(g, t) ·
//! section_at(h, act(g^-1, t))`, and for inverses `section_at(g^-1, t) =
//! section_at(g, act(g, t))^-1`; both are consequences of the identity above
//! and are exercised against it by the property tests.

use crate::automaton::Automaton;
use crate::defaults;
use crate::perm::Perm;
use crate::words::{Letter, Word};
use crate::words::Vertex;
use std::collections::{HashMap, HashSet, VecDeque};
use std::rc::Rc;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum LevelError {
    #[error("level {n} too large: {d}^{n} exceeds the cap {cap}")]
    TooLarge { d: usize, n: u32, cap: u64 },
}

impl Automaton {
    /// Image of a letter of the alphabet under one word letter.
    fn act_letter(&self, l: Letter, x: u16) -> u16 {
        let out = &self.state(l.state).output;
        if l.inverse {
            // inverse images are looked up, not precomputed: alphabets are tiny
            (0..out.degree() as u16)
                .find(|&y| out.apply(y as u32) == x as u32)
                .expect("output is a bijection")
        } else {
            out.apply(x as u32) as u16
        }
    }

    /// Section of one word letter at a target letter.
    fn section_letter(&self, l: Letter, target: u16) -> Word {
        let state = self.state(l.state);
        if l.inverse {
            let u = state.output.apply(target as u32) as u16;
            state.sections[u as usize].inverse()
        } else {
            state.sections[target as usize].clone()
        }
    }

    /// Image of an alphabet letter under a word (rightmost letter first).
    pub fn act_on_letter(&self, w: &Word, x: u16) -> u16 {
        w.letters().iter().rev().fold(x, |y, &l| self.act_letter(l, y))
    }

    /// Section of a word at a target letter.
    pub fn section_at_letter(&self, w: &Word, target: u16) -> Word {
        let mut parts: Vec<Letter> = Vec::new();
        let mut t = target;
        for &l in w.letters() {
            parts.extend(self.section_letter(l, t).letters().iter().copied());
            t = self.act_letter(l.inverted(), t);
        }
        Word::from_letters(parts)
    }

    /// Image of a vertex; levels are preserved.
    pub fn act(&self, w: &Word, v: &Vertex) -> Vertex {
        let mut path = Vec::with_capacity(v.level());
        let mut cur = w.clone();
        for &x in v.path() {
            let y = self.act_on_letter(&cur, x);
            path.push(y);
            cur = self.section_at_letter(&cur, y);
        }
        Vertex::new(path)
    }

    /// Section of a word at a target vertex of any level.
    pub fn section(&self, w: &Word, v: &Vertex) -> Word {
        let mut cur = w.clone();
        for &t in v.path() {
            cur = self.section_at_letter(&cur, t);
        }
        cur
    }

    /// The permutation a word induces on the alphabet.
    pub fn root_permutation(&self, w: &Word) -> Perm {
        let images = (0..self.alphabet() as u16)
            .map(|x| self.act_on_letter(w, x) as u32)
            .collect();
        Perm::from_images(images).expect("letter actions are bijections")
    }

    /// The permutation a word induces on level n, vertices in lexicographic
    /// order. Level 0 is the one-point root level.
    pub fn act_level(&self, w: &Word, n: u32) -> Result<Perm, LevelError> {
        let size = self.level_size(n).ok_or(LevelError::TooLarge {
            d: self.alphabet(),
            n,
            cap: self.level_cap,
        })? as usize;
        let mut memo: HashMap<(Word, u32), Rc<Vec<u32>>> = HashMap::new();
        let images = self.level_images(w, n, &mut memo);
        debug_assert_eq!(images.len(), size);
        Ok(Perm::from_images(images.as_ref().clone()).expect("level actions are bijections"))
    }

    fn level_images(
        &self,
        w: &Word,
        n: u32,
        memo: &mut HashMap<(Word, u32), Rc<Vec<u32>>>,
    ) -> Rc<Vec<u32>> {
        if n == 0 {
            return Rc::new(vec![0]);
        }
        if let Some(hit) = memo.get(&(w.clone(), n)) {
            return hit.clone();
        }
        let d = self.alphabet();
        let block = d.pow(n - 1) as u32;
        let mut images = vec![0u32; d * block as usize];
        for x in 0..d as u16 {
            let y = self.act_on_letter(w, x);
            let sub = self.level_images(&self.section_at_letter(w, y), n - 1, memo);
            let base_in = x as usize * block as usize;
            let base_out = y as u32 * block;
            for (i, &z) in sub.iter().enumerate() {
                images[base_in + i] = base_out + z;
            }
        }
        let rc = Rc::new(images);
        memo.insert((w.clone(), n), rc.clone());
        rc
    }

    /// Decides whether a word acts trivially on the whole tree, by closing
    /// the word under sections and checking every root permutation.
    pub fn is_trivial(&self, w: &Word) -> bool {
        let mut seen: HashSet<Word> = HashSet::new();
        let mut queue: VecDeque<Word> = VecDeque::new();
        seen.insert(w.clone());
        queue.push_back(w.clone());
        while let Some(u) = queue.pop_front() {
            if !self.root_permutation(&u).is_identity() {
                return false;
            }
            for t in 0..self.alphabet() as u16 {
                let s = self.section_at_letter(&u, t);
                if seen.insert(s.clone()) {
                    queue.push_back(s);
                }
            }
            assert!(
                seen.len() <= defaults::CLOSURE_CAP,
                "section closure exceeded {} words; the automaton's section words expand",
                defaults::CLOSURE_CAP
            );
        }
        true
    }

    /// Equality as tree automorphisms.
    pub fn words_equal(&self, a: &Word, b: &Word) -> bool {
        a == b || self.is_trivial(&a.concat(&b.inverse()))
    }

    /// Whether the generated group acts transitively on level n.
    pub fn level_transitive(&self, n: u32) -> Result<bool, LevelError> {
        let size = self.level_size(n).ok_or(LevelError::TooLarge {
            d: self.alphabet(),
            n,
            cap: self.level_cap,
        })? as usize;
        let perms: Vec<Perm> = (0..self.states().len() as u16)
            .flat_map(|s| {
                [
                    self.act_level(&Word::single(s), n),
                    self.act_level(&Word::from_letters([Letter::new(s, true)]), n),
                ]
            })
            .collect::<Result<_, _>>()?;
        let mut seen = vec![false; size];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for p in &perms {
                let u = p.apply(v);
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        Ok(count == size)
    }

    /// Action signature at a small level; equal automorphisms share it, so
    /// it prefilters the exact equality check during deduplication.
    pub(crate) fn signature(&self, w: &Word) -> Vec<u32> {
        let n = self.signature_level();
        self.act_level(w, n)
            .expect("signature level is below the cap")
            .images()
            .to_vec()
    }

    /// Deepest level with at most 64 vertices, also capped by `level_cap`
    /// so the prefilter stays usable under a tiny cap (it only gets
    /// coarser; exact equality still decides).
    pub(crate) fn signature_level(&self) -> u32 {
        let mut n = 0;
        let mut size = 1u64;
        let bound = 64u64.min(self.level_cap);
        while size * self.alphabet() as u64 <= bound {
            size *= self.alphabet() as u64;
            n += 1;
        }
        n
    }

    /// All freely reduced words of length at most `max_len`, in order of
    /// length and then lexicographically by (state, exponent); the positive
    /// exponent sorts first and the identity comes before everything.
    pub fn reduced_words(&self, max_len: usize) -> Vec<Word> {
        let letters: Vec<Letter> = (0..self.states().len() as u16)
            .flat_map(|s| [Letter::new(s, false), Letter::new(s, true)])
            .collect();
        let mut all = vec![Word::identity()];
        let mut frontier = vec![Word::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for &l in &letters {
                    if w.letters().last().is_some_and(|&top| top.cancels(l)) {
                        continue;
                    }
                    let mut letters2 = w.letters().to_vec();
                    letters2.push(l);
                    next.push(Word::from_letters(letters2));
                }
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        all
    }

    /// Distinct group elements among the reduced words of length at most
    /// `max_len`, each represented by its first word in enumeration order.
    pub fn distinct_elements(&self, max_len: usize) -> Vec<Word> {
        let mut reps: Vec<Word> = Vec::new();
        let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
        for w in self.reduced_words(max_len) {
            let sig = self.signature(&w);
            let bucket = buckets.entry(sig).or_default();
            if !bucket.iter().any(|&k| self.words_equal(&reps[k], &w)) {
                bucket.push(reps.len());
                reps.push(w);
            }
        }
        reps
    }

    /// First nontrivial word (in enumeration order) fixing the subtree at
    /// `v` pointwise, if one exists within the length bound.
    pub fn stabilizer_search(&self, v: &Vertex, max_len: usize) -> Option<Word> {
        self.reduced_words(max_len).into_iter().find(|w| {
            !w.is_empty()
                && self.act(w, v) == *v
                && self.is_trivial(&self.section(w, v))
                && !self.is_trivial(w)
        })
    }

    /// First nontrivial word acting trivially outside the subtree at `v`:
    /// every other vertex of the same level is fixed with trivial section.
    pub fn rist_witness(&self, v: &Vertex, max_len: usize) -> Option<Word> {
        let n = v.level() as u32;
        let size = self.level_size(n)? as usize;
        let target = v.index(self.alphabet());
        'words: for w in self.reduced_words(max_len) {
            if w.is_empty() {
                continue;
            }
            let perm = match self.act_level(&w, n) {
                Ok(p) => p,
                Err(_) => return None,
            };
            for u in 0..size {
                if u != target && perm.apply(u as u32) != u as u32 {
                    continue 'words;
                }
            }
            for u in 0..size {
                if u == target {
                    continue;
                }
                let vu = Vertex::from_index(u, n, self.alphabet());
                if !self.is_trivial(&self.section(&w, &vu)) {
                    continue 'words;
                }
            }
            if !self.is_trivial(&w) {
                return Some(w);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Automaton;

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

    fn v(_aut: &Automaton, digits: &str) -> Vertex {
        Vertex::new(digits.bytes().map(|b| (b - b'1') as u16).collect())
    }

    /// Independent oracle: the state `a` of ODO adds one to the reversed
    /// binary counter. Index a level-n vertex by its digits least
    /// significant first and the action is x -> x + 1 mod 2^n.
    fn odometer_oracle(vertex: &str, n: usize) -> String {
        let mut val: u64 = vertex
            .bytes()
            .rev()
            .fold(0, |acc, b| acc * 2 + (b - b'1') as u64);
        val = (val + 1) % (1 << n);
        (0..n)
            .map(|k| char::from(b'1' + ((val >> k) & 1) as u8))
            .collect()
    }

    #[test]
    fn odometer_action_matches_counter_oracle() {
        let aut = odo();
        let a = aut.parse_word("a").unwrap();
        // frozen values computed with the counter oracle
        assert_eq!(odometer_oracle("11", 2), "21");
        assert_eq!(odometer_oracle("21", 2), "12");
        assert_eq!(aut.act(&a, &v(&aut, "11")).display(2), "21");
        assert_eq!(aut.act(&a, &v(&aut, "21")).display(2), "12");
        for n in 1..=6usize {
            for idx in 0..(1usize << n) {
                let vx = Vertex::from_index(idx, n as u32, 2);
                let image = aut.act(&a, &vx).display(2);
                assert_eq!(image, odometer_oracle(&vx.display(2), n));
            }
        }
    }

    #[test]
    fn odometer_square_has_diagonal_sections() {
        let aut = odo();
        let aa = aut.parse_word("a*a").unwrap();
        let a = aut.parse_word("a").unwrap();
        assert!(aut.root_permutation(&aa).is_identity());
        assert!(aut.words_equal(&aut.section_at_letter(&aa, 0), &a));
        assert!(aut.words_equal(&aut.section_at_letter(&aa, 1), &a));
    }

    #[test]
    fn target_indexed_sections_on_subfix() {
        let aut = subfix();
        let s = aut.parse_word("s").unwrap();
        let t = aut.parse_word("t").unwrap();
        assert!(aut.words_equal(&aut.section(&s, &v(&aut, "1")), &t));
        assert!(aut.is_trivial(&aut.section(&s, &v(&aut, "2"))));
    }

    #[test]
    fn defining_identity_holds_on_sampled_words() {
        let aut = subfix();
        for text in ["t", "s", "t*s", "s*t^-1*s*t", "t^-1*s^-1"] {
            let g = aut.parse_word(text).unwrap();
            for x in 0..2u16 {
                for suffix_idx in 0..8usize {
                    let suffix = Vertex::from_index(suffix_idx, 3, 2);
                    let mut path = vec![x];
                    path.extend(suffix.path());
                    let whole = Vertex::new(path);
                    let y = aut.act_on_letter(&g, x);
                    let sec = aut.section_at_letter(&g, y);
                    let mut expect = vec![y];
                    expect.extend(aut.act(&sec, &suffix).path());
                    assert_eq!(aut.act(&g, &whole), Vertex::new(expect));
                }
            }
        }
    }

    #[test]
    fn inverse_section_rule_is_consistent() {
        // section_at(g^-1, t) = section_at(g, act(g, t))^-1, checked
        // against the action it must induce
        let aut = subfix();
        let g = aut.parse_word("s*t").unwrap();
        let ginv = g.inverse();
        for t in 0..2u16 {
            let direct = aut.section_at_letter(&ginv, t);
            let image = aut.act_on_letter(&g, t);
            let expect = aut.section_at_letter(&g, image).inverse();
            assert!(aut.words_equal(&direct, &expect));
        }
    }

    #[test]
    fn level_permutation_is_a_homomorphism() {
        let aut = subfix();
        let g = aut.parse_word("s*t").unwrap();
        let h = aut.parse_word("t*s^-1").unwrap();
        for n in 0..=4 {
            let lhs = aut.act_level(&g.concat(&h), n).unwrap();
            let rhs = aut
                .act_level(&g, n)
                .unwrap()
                .compose_after(&aut.act_level(&h, n).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn odometer_is_a_full_cycle_on_each_level() {
        let aut = odo();
        let a = aut.parse_word("a").unwrap();
        let p = aut.act_level(&a, 2).unwrap();
        // frozen: the 4-cycle 11 -> 21 -> 12 -> 22 -> 11, i.e. 0->2->1->3->0
        assert_eq!(p.images(), &[2, 3, 1, 0]);
        for n in 1..=8 {
            let p = aut.act_level(&a, n).unwrap();
            let mut x = 0u32;
            let mut steps = 0u64;
            loop {
                x = p.apply(x);
                steps += 1;
                if x == 0 {
                    break;
                }
            }
            assert_eq!(steps, 1 << n, "single cycle at level {}", n);
        }
    }

    #[test]
    fn triviality_and_equality() {
        let aut = subfix();
        let s = aut.parse_word("s").unwrap();
        let t = aut.parse_word("t").unwrap();
        assert!(aut.is_trivial(&aut.parse_word("1").unwrap()));
        assert!(aut.is_trivial(&aut.parse_word("t*t").unwrap()));
        assert!(aut.is_trivial(&aut.parse_word("s*s").unwrap()));
        assert!(!aut.is_trivial(&s));
        // ts and st differ: their actions at level 2 disagree
        let ts = t.concat(&s);
        let st = s.concat(&t);
        assert!(!aut.words_equal(&ts, &st));
        assert_ne!(
            aut.act_level(&ts, 2).unwrap(),
            aut.act_level(&st, 2).unwrap()
        );
    }

    #[test]
    fn transitivity_checks() {
        assert!(odo().level_transitive(3).unwrap());
        assert!(subfix().level_transitive(1).unwrap());
        let idle = Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "e"
output = [1, 2]
sections = ["1", "1"]
"#,
        )
        .unwrap();
        assert!(!idle.level_transitive(1).unwrap());
    }

    #[test]
    fn enumeration_is_length_then_lex() {
        let aut = subfix();
        let words = aut.reduced_words(2);
        // 1 + 4 + 4*3 = 17 freely reduced words over two states
        assert_eq!(words.len(), 17);
        assert!(words[0].is_empty());
        assert_eq!(aut.render_word(&words[1]), "t");
        assert_eq!(aut.render_word(&words[2]), "t^-1");
        assert_eq!(aut.render_word(&words[3]), "s");
        assert_eq!(aut.render_word(&words[5]), "t*t");
        // no word contains a cancelling pair
        assert!(words.iter().all(|w| w
            .letters()
            .windows(2)
            .all(|p| !p[0].cancels(p[1]))));
    }

    #[test]
    fn distinct_elements_deduplicates_involutions() {
        let aut = subfix();
        // t^-1 = t and s^-1 = s, so length <= 1 gives {1, t, s}
        let elems = aut.distinct_elements(1);
        assert_eq!(elems.len(), 3);
    }

    #[test]
    fn stabilizer_searches() {
        let aut = subfix();
        let found = aut.stabilizer_search(&v(&aut, "2"), 1).unwrap();
        assert_eq!(aut.render_word(&found), "s");
        // SWAP has no subtree stabilizers at all
        let swap = Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "t"
output = [2, 1]
sections = ["1", "1"]
"#,
        )
        .unwrap();
        assert!(swap.stabilizer_search(&v(&swap, "1"), 4).is_none());
        // the odometer fixes vertex "1" only with nontrivial sections
        assert!(odo().stabilizer_search(&v(&odo(), "1"), 6).is_none());
    }

    #[test]
    fn rist_witnesses_on_the_tensor_extension() {
        let aut = odo().tensor_extension().unwrap();
        let w2 = aut.rist_witness(&v(&aut, "2"), 1).unwrap();
        assert_eq!(aut.render_word(&w2), "a~");
        let w1 = aut.rist_witness(&v(&aut, "1"), 3).unwrap();
        assert_eq!(w1.len(), 3);
        // no witness hides below vertex "1" in the plain odometer
        assert!(odo().rist_witness(&v(&odo(), "1"), 6).is_none());
    }
}
