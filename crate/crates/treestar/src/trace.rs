//! Exact traces from the boundary measure.
//!
//! The trace of a word is the measure of its fixed boundary points. At level
//! n it is the proportion of fixed vertices, which obeys a recursion over
//! the word's sections at fixed letters; in the limit it satisfies an exact
//! rational linear system on the finite graph of those sections. Everything
//! here is computed over the rationals, no floating point.

use crate::algebra::AlgebraElement;
use crate::automaton::Automaton;
use crate::defaults;
use crate::recursion::recursion_matrix;
use crate::scalar::GaussianRational;
use crate::words::{Vertex, Word};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::HashMap;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("trace system is singular; the section graph violated its mass-loss invariant")]
    InconsistentSystem,
}

/// The closure of a word under sections at fixed letters.
///
/// Nodes are canonical representatives up to group equality; an edge labeled
/// by letter i leads from a word to its section at i whenever the word fixes
/// i. Boundary points surviving forever inside the graph without meeting a
/// trivial node form a null set, which is what makes the trace system
/// solvable.
#[derive(Debug, Clone)]
pub struct SectionGraph {
    d: usize,
    nodes: Vec<Word>,
    trivial: Vec<bool>,
    edges: Vec<Vec<Option<usize>>>,
}

impl SectionGraph {
    pub fn build(aut: &Automaton, g: &Word) -> SectionGraph {
        let d = aut.alphabet();
        let mut nodes: Vec<Word> = vec![g.clone()];
        let mut trivial = vec![aut.is_trivial(g)];
        let mut buckets: HashMap<Vec<u32>, Vec<usize>> = HashMap::new();
        buckets.insert(aut.signature(g), vec![0]);
        let mut edges: Vec<Vec<Option<usize>>> = Vec::new();
        let mut k = 0;
        while k < nodes.len() {
            let w = nodes[k].clone();
            let perm = aut.root_permutation(&w);
            let mut row = vec![None; d];
            for i in 0..d as u32 {
                if perm.apply(i) != i {
                    continue;
                }
                let sec = aut.section_at_letter(&w, i as u16);
                let sig = aut.signature(&sec);
                let bucket = buckets.entry(sig).or_default();
                let id = match bucket
                    .iter()
                    .find(|&&c| aut.words_equal(&nodes[c], &sec))
                {
                    Some(&c) => c,
                    None => {
                        let id = nodes.len();
                        trivial.push(aut.is_trivial(&sec));
                        nodes.push(sec);
                        bucket.push(id);
                        id
                    }
                };
                row[i as usize] = Some(id);
            }
            edges.push(row);
            k += 1;
            assert!(
                nodes.len() <= defaults::CLOSURE_CAP,
                "section graph exceeded {} nodes",
                defaults::CLOSURE_CAP
            );
        }
        let graph = SectionGraph {
            d,
            nodes,
            trivial,
            edges,
        };
        graph.assert_recurrent_components_trivial(aut);
        graph
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, k: usize) -> &Word {
        &self.nodes[k]
    }

    pub fn is_trivial_node(&self, k: usize) -> bool {
        self.trivial[k]
    }

    pub fn edge(&self, k: usize, letter: usize) -> Option<usize> {
        self.edges[k][letter]
    }

    /// Nodes from which some trivial node is reachable along edges. A
    /// vertex whose section sits at an unmarked node has no fixed subtree
    /// anywhere below it.
    pub fn trivial_reachable(&self) -> Vec<bool> {
        let n = self.nodes.len();
        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (from, row) in self.edges.iter().enumerate() {
            for target in row.iter().flatten() {
                incoming[*target].push(from);
            }
        }
        let mut marked = self.trivial.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&k| marked[k]).collect();
        while let Some(k) = stack.pop() {
            for &from in &incoming[k] {
                if !marked[from] {
                    marked[from] = true;
                    stack.push(from);
                }
            }
        }
        marked
    }

    /// Proportion of level-n vertices fixed by the root word, by the exact
    /// recursion over fixed-letter sections.
    pub fn level_trace(&self, n: u32) -> BigRational {
        let den = BigRational::from_integer(BigInt::from(self.d));
        let mut prev: Vec<BigRational> = vec![BigRational::one(); self.nodes.len()];
        for _ in 0..n {
            let cur: Vec<BigRational> = self
                .edges
                .iter()
                .map(|row| {
                    let mut s = BigRational::zero();
                    for target in row.iter().flatten() {
                        s += &prev[*target];
                    }
                    s / &den
                })
                .collect();
            prev = cur;
        }
        prev[0].clone()
    }

    /// The exact limit trace of the root word: measure of its fixed
    /// boundary points.
    pub fn exact_trace(&self) -> Result<BigRational, TraceError> {
        // unknowns are the nontrivial nodes; trivial nodes contribute 1
        let vars: Vec<usize> = (0..self.nodes.len()).filter(|&k| !self.trivial[k]).collect();
        if self.trivial[0] {
            return Ok(BigRational::one());
        }
        let index: HashMap<usize, usize> = vars.iter().enumerate().map(|(v, &k)| (k, v)).collect();
        // d*f(w) - sum over nontrivial fixed-letter sections f(sec) =
        // number of fixed letters with trivial section
        let m = vars.len();
        let mut aug: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); m + 1]; m];
        for (v, &k) in vars.iter().enumerate() {
            aug[v][v] = BigInt::from(self.d);
            for target in self.edges[k].iter().flatten() {
                if self.trivial[*target] {
                    aug[v][m] += BigInt::one();
                } else {
                    aug[v][index[target]] -= BigInt::one();
                }
            }
        }
        let solution = solve_fraction_free(aug).ok_or(TraceError::InconsistentSystem)?;
        Ok(solution[index[&0]].clone())
    }

    /// Sanity assertion behind solvability: a strongly connected component
    /// whose nodes all fix every letter with all sections inside the
    /// component acts trivially at every level, so its nodes must carry the
    /// trivial mark.
    fn assert_recurrent_components_trivial(&self, aut: &Automaton) {
        for component in strongly_connected(&self.edges) {
            let closed = component.iter().all(|&k| {
                self.edges[k].iter().all(|e| match e {
                    Some(t) => component.contains(t),
                    None => false,
                })
            });
            if closed {
                for &k in &component {
                    assert!(
                        self.trivial[k],
                        "fully fixing closed component contains nontrivial word {}",
                        aut.render_word(&self.nodes[k])
                    );
                }
            }
        }
    }
}

/// Tarjan's strongly connected components, iterative.
fn strongly_connected(edges: &[Vec<Option<usize>>]) -> Vec<Vec<usize>> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0;
    let mut components = Vec::new();
    // explicit DFS frames: (node, next edge position)
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut frames: Vec<(usize, usize)> = vec![(root, 0)];
        while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
            if *pos == 0 {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            let mut advanced = false;
            while *pos < edges[v].len() {
                let slot = edges[v][*pos];
                *pos += 1;
                if let Some(w) = slot {
                    if index[w] == usize::MAX {
                        frames.push((w, 0));
                        advanced = true;
                        break;
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                }
            }
            if advanced {
                continue;
            }
            frames.pop();
            if let Some(&(parent, _)) = frames.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                components.push(component);
            }
        }
    }
    components
}

/// Fraction-free Gaussian elimination on an augmented integer system,
/// followed by exact rational back-substitution. Returns None when the
/// matrix is singular.
fn solve_fraction_free(mut aug: Vec<Vec<BigInt>>) -> Option<Vec<BigRational>> {
    let n = aug.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let cols = n + 1;
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot_row = (k..n).find(|&r| !aug[r][k].is_zero())?;
        aug.swap(k, pivot_row);
        for i in k + 1..n {
            for j in k + 1..cols {
                let num = &aug[k][k] * &aug[i][j] - &aug[i][k] * &aug[k][j];
                aug[i][j] = num / &prev; // exact by the Bareiss identity
            }
            aug[i][k] = BigInt::zero();
        }
        prev = aug[k][k].clone();
    }
    let mut x = vec![BigRational::zero(); n];
    for k in (0..n).rev() {
        let mut acc = BigRational::from_integer(aug[k][n].clone());
        for j in k + 1..n {
            acc -= BigRational::from_integer(aug[k][j].clone()) * &x[j];
        }
        x[k] = acc / BigRational::from_integer(aug[k][k].clone());
    }
    Some(x)
}

/// tr_n of a word: the proportion of level-n vertices it fixes.
pub fn level_trace(aut: &Automaton, g: &Word, n: u32) -> BigRational {
    SectionGraph::build(aut, g).level_trace(n)
}

/// The exact boundary trace of a word.
pub fn boundary_trace(aut: &Automaton, g: &Word) -> Result<BigRational, TraceError> {
    SectionGraph::build(aut, g).exact_trace()
}

/// Linear extension of the trace to algebra elements.
pub fn trace_element(
    aut: &Automaton,
    x: &AlgebraElement,
) -> Result<GaussianRational, TraceError> {
    let mut total = GaussianRational::zero();
    for (w, c) in x.terms() {
        let t = boundary_trace(aut, w)?;
        total = &total + &c.mul_rational(&t);
    }
    Ok(total)
}

/// |Tr(x) - (tr_n tensor Tr)(matrix form of x)| as an exact magnitude;
/// zero is the compatibility identity between the trace and the recursion.
pub fn trace_recursion_residual(
    aut: &Automaton,
    x: &AlgebraElement,
    n: u32,
) -> Result<BigRational, TraceError> {
    let lhs = trace_element(aut, x)?;
    let b = recursion_matrix(aut, x, n).expect("level within cap");
    let mut diag = GaussianRational::zero();
    for i in 0..b.dim() {
        diag = &diag + &trace_element(aut, b.entry(i, i))?;
    }
    let rhs = diag.mul_rational(&BigRational::new(BigInt::one(), BigInt::from(b.dim())));
    Ok((&lhs - &rhs).l1_magnitude())
}

#[derive(Debug, Clone)]
pub struct BoundaryPartition {
    /// Roots of subtrees fixed pointwise.
    pub fixed_roots: Vec<Vertex>,
    /// Roots of subtrees with no fixed subtree anywhere below.
    pub free_roots: Vec<Vertex>,
    /// Vertices at the depth limit that are neither.
    pub unresolved: Vec<Vertex>,
    pub explored_depth: u32,
    pub fixed_mass: BigRational,
    pub free_mass: BigRational,
    pub residual_mass: BigRational,
}

/// Partitions the boundary under a word into fixed subtrees, certified
/// fixed-point-free subtrees, and an unresolved remainder whose measure
/// shrinks with depth.
pub fn boundary_partition(aut: &Automaton, g: &Word, depth: u32) -> BoundaryPartition {
    let graph = SectionGraph::build(aut, g);
    let reachable = graph.trivial_reachable();
    let d = aut.alphabet();
    let mut out = BoundaryPartition {
        fixed_roots: Vec::new(),
        free_roots: Vec::new(),
        unresolved: Vec::new(),
        explored_depth: depth,
        fixed_mass: BigRational::zero(),
        free_mass: BigRational::zero(),
        residual_mass: BigRational::zero(),
    };
    let mass = |level: usize| {
        BigRational::new(BigInt::one(), BigInt::from(d).pow(level as u32))
    };
    // frontier pairs a fixed vertex with the node holding its section
    let mut frontier: Vec<(Vertex, usize)> = vec![(Vertex::root(), 0)];
    while let Some((v, node)) = frontier.pop() {
        if graph.is_trivial_node(node) {
            out.fixed_mass += mass(v.level());
            out.fixed_roots.push(v);
        } else if !reachable[node] {
            out.free_mass += mass(v.level());
            out.free_roots.push(v);
        } else if v.level() as u32 == depth {
            out.residual_mass += mass(v.level());
            out.unresolved.push(v);
        } else {
            for i in 0..d {
                match graph.edge(node, i) {
                    Some(target) => frontier.push((v.child(i as u16), target)),
                    None => {
                        // the child is moved, hence so is everything below
                        out.free_mass += mass(v.level() + 1);
                        out.free_roots.push(v.child(i as u16));
                    }
                }
            }
        }
    }
    out.fixed_roots.sort();
    out.free_roots.sort();
    out.unresolved.sort();
    out
}

#[derive(Debug, Clone)]
pub struct FreenessReport {
    pub max_length: usize,
    /// Distinct nontrivial elements inspected.
    pub checked_elements: usize,
    /// Nontrivial elements with positive trace, against essential freeness.
    pub witnesses: Vec<(Word, BigRational)>,
}

impl FreenessReport {
    /// No witness up to the bound; evidence, not a proof.
    pub fn free_up_to_bound(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Checks every distinct nontrivial element up to the length bound for
/// positive trace.
pub fn freeness_report(
    aut: &Automaton,
    max_length: usize,
) -> Result<FreenessReport, TraceError> {
    let mut checked = 0;
    let mut witnesses = Vec::new();
    for w in aut.distinct_elements(max_length) {
        if aut.is_trivial(&w) {
            continue;
        }
        checked += 1;
        let t = boundary_trace(aut, &w)?;
        if t.is_positive() {
            witnesses.push((w, t));
        }
    }
    Ok(FreenessReport {
        max_length,
        checked_elements: checked,
        witnesses,
    })
}
