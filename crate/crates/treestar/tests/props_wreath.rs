//! Wreath-recursion identities on randomly generated automata.
//!
//! The generators here produce arbitrary valid automata over binary and
//! ternary alphabets, with section words that may use inverses, so the
//! identities are exercised well beyond the shipped fixtures.

use proptest::prelude::*;
use treestar::{Automaton, Letter, Perm, State, Vertex, Word};

fn arb_word(states: usize, max_len: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec((0..states as u16, any::<bool>()), 0..=max_len)
        .prop_map(|ls| Word::from_letters(ls.into_iter().map(|(s, i)| Letter::new(s, i))))
}

fn arb_automaton() -> impl Strategy<Value = Automaton> {
    (2usize..=3, 1usize..=3).prop_flat_map(|(d, count)| {
        let image = Just((0..d as u32).collect::<Vec<u32>>()).prop_shuffle();
        // sections a single optionally inverted state, so that sections of
        // a word never exceed its length and triviality closures stay
        // finite on arbitrary inputs
        let state = (image, prop::collection::vec(arb_word(count, 1), d));
        prop::collection::vec(state, count).prop_map(move |specs| {
            let states = specs
                .into_iter()
                .enumerate()
                .map(|(k, (images, sections))| State {
                    name: format!("g{k}"),
                    output: Perm::from_images(images).expect("shuffled range is a bijection"),
                    sections,
                })
                .collect();
            Automaton::from_parts(d, states)
        })
    })
}

fn arb_vertex(d: usize, max_level: usize) -> impl Strategy<Value = Vertex> {
    prop::collection::vec(0..d as u16, 0..=max_level).prop_map(Vertex::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn action_splits_along_path_prefixes(
        (aut, g, v) in arb_automaton().prop_flat_map(|aut| {
            let d = aut.alphabet();
            let s = aut.states().len();
            (Just(aut), arb_word(s, 5), arb_vertex(d, 5))
        }),
    ) {
        // act(g, x&w) = act(g,x) & act(section(g, act(g,x)), w) at every split
        let image = aut.act(&g, &v);
        for cut in 0..=v.level() {
            let prefix = Vertex::new(v.path()[..cut].to_vec());
            let suffix = Vertex::new(v.path()[cut..].to_vec());
            let head = aut.act(&g, &prefix);
            let tail = aut.act(&aut.section(&g, &head), &suffix);
            let mut joined = head.path().to_vec();
            joined.extend_from_slice(tail.path());
            prop_assert_eq!(Vertex::new(joined), image.clone());
        }
    }

    #[test]
    fn products_act_as_composites(
        (aut, g, h, v) in arb_automaton().prop_flat_map(|aut| {
            let d = aut.alphabet();
            let s = aut.states().len();
            (Just(aut), arb_word(s, 4), arb_word(s, 4), arb_vertex(d, 4))
        }),
    ) {
        let gh = g.concat(&h);
        prop_assert_eq!(aut.act(&gh, &v), aut.act(&g, &aut.act(&h, &v)));
    }

    #[test]
    fn sections_of_products_factor(
        (aut, g, h, t) in arb_automaton().prop_flat_map(|aut| {
            let d = aut.alphabet();
            let s = aut.states().len();
            (Just(aut), arb_word(s, 4), arb_word(s, 4), arb_vertex(d, 4))
        }),
    ) {
        // section(g&h, t) = section(g, t) & section(h, act(g^-1, t))
        let gh = g.concat(&h);
        let lhs = aut.section(&gh, &t);
        let mid = aut.act(&g.inverse(), &t);
        let rhs = aut.section(&g, &t).concat(&aut.section(&h, &mid));
        prop_assert!(aut.words_equal(&lhs, &rhs));
    }

    #[test]
    fn sections_of_inverses_invert(
        (aut, g, t) in arb_automaton().prop_flat_map(|aut| {
            let d = aut.alphabet();
            let s = aut.states().len();
            (Just(aut), arb_word(s, 4), arb_vertex(d, 4))
        }),
    ) {
        let lhs = aut.section(&g.inverse(), &t);
        let rhs = aut.section(&g, &aut.act(&g, &t)).inverse();
        prop_assert!(aut.words_equal(&lhs, &rhs));
    }

    #[test]
    fn level_action_is_vertexwise(
        (aut, g, v) in arb_automaton().prop_flat_map(|aut| {
            let d = aut.alphabet();
            let s = aut.states().len();
            (Just(aut), arb_word(s, 4), arb_vertex(d, 4))
        }),
    ) {
        let n = v.level() as u32;
        let perm = aut.act_level(&g, n).unwrap();
        let d = aut.alphabet();
        let expected = aut.act(&g, &v).index(d) as u32;
        prop_assert_eq!(perm.apply(v.index(d) as u32), expected);
    }

    #[test]
    fn equality_agrees_with_cancellation(
        (aut, g, h) in arb_automaton().prop_flat_map(|aut| {
            let s = aut.states().len();
            (Just(aut), arb_word(s, 4), arb_word(s, 4))
        }),
    ) {
        let difference = g.concat(&h.inverse());
        prop_assert_eq!(aut.words_equal(&g, &h), aut.is_trivial(&difference));
    }
}
