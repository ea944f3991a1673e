//! Block structure of the finite-level matrix algebras.
//!
//! The words of an automaton group span, at each tree level, a finite
//! dimensional *-algebra of permutation matrices. Such an algebra is a
//! direct sum of full matrix blocks; the block dimensions and their
//! multiplicities are computable invariants, and how the largest block
//! grows with the level is the bounded-dimension diagnostic: bounded
//! block sizes are consistent with a virtually abelian group, while
//! growth witnesses the opposite.

use crate::action::LevelError;
use crate::automaton::Automaton;
use crate::defaults;
use crate::levelrep::rho_level;
use crate::words::{Letter, Word};
use nalgebra::{Complex, DMatrix};
use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};
use std::collections::HashSet;

type C64 = Complex<f64>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum WedderburnError {
    #[error("level {n} needs dense dimension {dim}, above the cap {cap}")]
    DenseCapExceeded { n: u32, dim: u64, cap: usize },
    #[error("closure still growing at ball radius {radius}; block data would be unreliable")]
    TruncatedClosure { radius: usize },
    #[error("eigenvalue clustering failed at level {level} after {attempts} seeded attempts")]
    DegenerateSplit { level: u32, attempts: usize },
    #[error(transparent)]
    Level(#[from] LevelError),
}

/// Frobenius-orthonormal basis of the algebra spanned by the level-n
/// matrices of group words.
#[derive(Debug, Clone)]
pub struct MatrixAlgebraBasis {
    pub level: u32,
    /// Matrix side length at this level.
    pub dim: usize,
    /// Generating ball radius at which the dimension stabilized.
    pub ball_radius: usize,
    /// Set when the radius cap was reached while the dimension still grew.
    pub truncated: bool,
    basis: Vec<DMatrix<C64>>,
}

fn frobenius_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

fn frobenius_norm(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Distance from `m` to the span of the orthonormal family, consuming the
/// residual when it is numerically nonzero.
fn orthogonalize(basis: &[DMatrix<C64>], m: &DMatrix<C64>) -> (DMatrix<C64>, f64) {
    let mut r = m.clone();
    for b in basis {
        let c = frobenius_inner(b, &r);
        r -= b * c;
    }
    // a second pass keeps the family orthonormal to machine precision
    for b in basis {
        let c = frobenius_inner(b, &r);
        r -= b * c;
    }
    let norm = frobenius_norm(&r);
    (r, norm)
}

impl MatrixAlgebraBasis {
    pub fn algebra_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DMatrix<C64>] {
        &self.basis
    }

    /// Largest projection residual of an adjoint of a basis element onto
    /// the span; small values certify *-closure.
    pub fn adjoint_residual(&self) -> f64 {
        self.basis
            .iter()
            .map(|b| orthogonalize(&self.basis, &b.adjoint()).1)
            .fold(0.0, f64::max)
    }

    /// Projection residual of a product of two basis elements onto the
    /// span; small values certify closure under multiplication.
    pub fn product_residual(&self, i: usize, j: usize) -> f64 {
        orthogonalize(&self.basis, &(&self.basis[i] * &self.basis[j])).1
    }
}

fn dense_dim(aut: &Automaton, n: u32) -> Result<usize, WedderburnError> {
    let dim = aut.level_size(n).ok_or(LevelError::TooLarge {
        d: aut.alphabet(),
        n,
        cap: aut.level_cap,
    })?;
    if dim > defaults::DENSE_CAP as u64 {
        return Err(WedderburnError::DenseCapExceeded {
            n,
            dim,
            cap: defaults::DENSE_CAP,
        });
    }
    Ok(dim as usize)
}

/// Spans the level-n matrices of group words over growing word balls until
/// the dimension stabilizes across two consecutive radii or the radius cap
/// is reached.
pub fn algebra_closure(
    aut: &Automaton,
    n: u32,
    max_ball: usize,
) -> Result<MatrixAlgebraBasis, WedderburnError> {
    let dim = dense_dim(aut, n)?;
    let letters: Vec<Letter> = (0..aut.states().len() as u16)
        .flat_map(|s| [Letter::new(s, false), Letter::new(s, true)])
        .collect();
    // the level-n matrix of a word depends only on its level-n vertex
    // permutation, so the ball is walked in the level-n quotient
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut basis: Vec<DMatrix<C64>> = Vec::new();
    let mut frontier: Vec<Word> = vec![Word::identity()];
    seen.insert(aut.act_level(&Word::identity(), n)?.images().to_vec());
    let add = |basis: &mut Vec<DMatrix<C64>>, w: &Word| -> Result<(), WedderburnError> {
        let m = rho_level(aut, &crate::algebra::AlgebraElement::from_word(w.clone()), n)?
            .to_dense();
        let (residual, norm) = orthogonalize(basis, &m);
        if norm > defaults::RANK_TOL * frobenius_norm(&m).max(1.0) {
            basis.push(residual / C64::new(norm, 0.0));
        }
        Ok(())
    };
    add(&mut basis, &Word::identity())?;
    let mut prev_dim = basis.len();
    let mut radius = 0;
    let mut truncated = false;
    loop {
        if frontier.is_empty() {
            // the quotient group itself was exhausted
            break;
        }
        if radius == max_ball {
            truncated = true;
            break;
        }
        radius += 1;
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &letters {
                if w.letters().last().is_some_and(|&top| top.cancels(l)) {
                    continue;
                }
                let mut ls = w.letters().to_vec();
                ls.push(l);
                let extended = Word::from_letters(ls);
                let image = aut.act_level(&extended, n)?.images().to_vec();
                if seen.insert(image) {
                    add(&mut basis, &extended)?;
                    next.push(extended);
                }
            }
        }
        frontier = next;
        if basis.len() == prev_dim {
            break;
        }
        prev_dim = basis.len();
    }
    Ok(MatrixAlgebraBasis {
        level: n,
        dim,
        ball_radius: radius,
        truncated,
        basis,
    })
}

/// One matrix block: dimension and multiplicity in the level space.
pub type Block = (usize, usize);

#[derive(Debug, Clone)]
pub struct BlockReport {
    pub level: u32,
    /// (dimension, multiplicity) pairs, sorted.
    pub blocks: Vec<Block>,
    pub algebra_dim: usize,
    pub center_dim: usize,
}

impl BlockReport {
    pub fn max_block_dim(&self) -> usize {
        self.blocks.iter().map(|&(d, _)| d).max().unwrap_or(0)
    }

    /// The exact integer identities every semisimple decomposition obeys.
    pub fn identities_hold(&self, dim: usize) -> bool {
        let sq: usize = self.blocks.iter().map(|&(d, _)| d * d).sum();
        let weighted: usize = self.blocks.iter().map(|&(d, m)| d * m).sum();
        sq == self.algebra_dim && weighted == dim && self.center_dim == self.blocks.len()
    }
}

/// Orthonormal coefficient vectors spanning the center of the algebra:
/// elements commuting with the matrices of all generator states.
fn center_coefficients(
    aut: &Automaton,
    basis: &MatrixAlgebraBasis,
) -> Result<Vec<Vec<C64>>, WedderburnError> {
    let k = basis.algebra_dim();
    let dim = basis.dim;
    let states: Vec<DMatrix<C64>> = (0..aut.states().len() as u16)
        .map(|s| {
            let w = crate::algebra::AlgebraElement::from_word(Word::single(s));
            Ok(rho_level(aut, &w, basis.level)?.to_dense())
        })
        .collect::<Result<_, WedderburnError>>()?;
    let rows = dim * dim * states.len();
    let mut constraints = DMatrix::<C64>::zeros(rows, k);
    for (j, b) in basis.basis().iter().enumerate() {
        for (s, g) in states.iter().enumerate() {
            let comm = g * b - b * g;
            for (idx, value) in comm.iter().enumerate() {
                constraints[(s * dim * dim + idx, j)] = *value;
            }
        }
    }
    let svd = constraints.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let threshold = defaults::RANK_TOL * top.max(1.0);
    let mut center = Vec::new();
    for (r, sigma) in svd.singular_values.iter().enumerate() {
        if *sigma < threshold {
            center.push(v_t.row(r).iter().map(|c| c.conj()).collect());
        }
    }
    // rows of v_t beyond the singular-value count (rows < cols cannot
    // happen here: the constraint matrix always has at least k rows)
    Ok(center)
}

fn random_central_matrix(
    basis: &MatrixAlgebraBasis,
    center: &[Vec<C64>],
    seed: u64,
) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = || rng.next_u64() as f64 / u64::MAX as f64 * 2.0 - 1.0;
    let mut x = DMatrix::<C64>::zeros(basis.dim, basis.dim);
    for coeffs in center {
        let gamma = C64::new(unit(), unit());
        for (j, c) in coeffs.iter().enumerate() {
            x += &basis.basis()[j] * (gamma * c);
        }
    }
    // the center is closed under adjoints, so this stays central
    (&x + x.adjoint()) * C64::new(0.5, 0.0)
}

/// Sorted eigenvalue clusters separated by more than the gap tolerance,
/// returned as index groups into the eigenvalue vector.
fn cluster_indices(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        match clusters.last_mut() {
            Some(cluster)
                if values[idx] - values[*cluster.last().unwrap()] <= gap =>
            {
                cluster.push(idx)
            }
            _ => clusters.push(vec![idx]),
        }
    }
    clusters
}

/// Splits the algebra into isotypic pieces with a random self-adjoint
/// central element and reads each block dimension off the rank of the
/// compressed algebra.
pub fn block_dimensions(
    aut: &Automaton,
    basis: &MatrixAlgebraBasis,
    seed: u64,
) -> Result<BlockReport, WedderburnError> {
    if basis.truncated {
        return Err(WedderburnError::TruncatedClosure {
            radius: basis.ball_radius,
        });
    }
    let center = center_coefficients(aut, basis)?;
    let attempts = 5;
    'attempt: for attempt in 0..attempts {
        let z = random_central_matrix(basis, &center, seed.wrapping_add(attempt as u64));
        let eigen = z.symmetric_eigen();
        let values: Vec<f64> = eigen.eigenvalues.iter().cloned().collect();
        let clusters = cluster_indices(&values, defaults::CLUSTER_GAP);
        if clusters.len() != center.len() {
            continue;
        }
        let mut blocks = Vec::new();
        for cluster in &clusters {
            let span = DMatrix::<C64>::from_columns(
                &cluster
                    .iter()
                    .map(|&i| eigen.eigenvectors.column(i).into_owned())
                    .collect::<Vec<_>>(),
            );
            // compress the algebra onto the isotypic subspace; its span
            // there is a single full matrix block repeated by multiplicity
            let mut compressed: Vec<DMatrix<C64>> = Vec::new();
            for b in basis.basis() {
                let r = span.adjoint() * b * &span;
                let (residual, norm) = orthogonalize(&compressed, &r);
                if norm > defaults::RANK_TOL * frobenius_norm(&r).max(1.0) {
                    compressed.push(residual / C64::new(norm, 0.0));
                }
            }
            let rank = compressed.len();
            let d = (rank as f64).sqrt().round() as usize;
            if d * d != rank || d == 0 || cluster.len() % d != 0 {
                continue 'attempt;
            }
            blocks.push((d, cluster.len() / d));
        }
        let report = BlockReport {
            level: basis.level,
            blocks: {
                blocks.sort();
                blocks
            },
            algebra_dim: basis.algebra_dim(),
            center_dim: center.len(),
        };
        if !report.identities_hold(basis.dim) {
            continue;
        }
        return Ok(report);
    }
    Err(WedderburnError::DegenerateSplit {
        level: basis.level,
        attempts,
    })
}

#[derive(Debug, Clone)]
pub struct TrendReport {
    /// (level, largest block dimension) per computed level.
    pub max_block_by_level: Vec<(u32, usize)>,
    /// Heuristic verdict from finitely many levels.
    pub verdict: String,
}

pub const VERDICT_BOUNDED: &str = "bounded-so-far (consistent with virtually abelian)";
pub const VERDICT_GROWING: &str = "growing (witnesses non-virtually-abelian behavior)";

/// Largest block dimension per level, with a verdict that is explicitly
/// heuristic: only finitely many levels are seen.
pub fn dimension_trend(
    aut: &Automaton,
    max_level: u32,
    max_ball: usize,
    seed: u64,
) -> Result<TrendReport, WedderburnError> {
    let mut rows = Vec::new();
    for n in 1..=max_level {
        let basis = algebra_closure(aut, n, max_ball)?;
        let report = block_dimensions(aut, &basis, seed)?;
        rows.push((n, report.max_block_dim()));
    }
    let growing = match rows.split_last() {
        Some(((_, last), rest)) if !rest.is_empty() => {
            *last > rest.iter().map(|&(_, d)| d).max().unwrap_or(0)
        }
        _ => false,
    };
    Ok(TrendReport {
        max_block_by_level: rows,
        verdict: if growing {
            VERDICT_GROWING.to_string()
        } else {
            VERDICT_BOUNDED.to_string()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defaults::POWER_SEED;

    fn swap() -> Automaton {
        Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "t"
output = [2, 1]
sections = ["1", "1"]
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

    fn trivial() -> Automaton {
        Automaton::from_definition(
            r#"
alphabet_size = 2

[[states]]
name = "e"
output = [1, 2]
sections = ["1", "1"]
"#,
        )
        .unwrap()
    }

    #[test]
    fn closure_dimensions_on_small_fixtures() {
        let basis = algebra_closure(&swap(), 1, 8).unwrap();
        assert_eq!(basis.algebra_dim(), 2);
        assert!(!basis.truncated);
        let basis = algebra_closure(&odo(), 2, 8).unwrap();
        assert_eq!(basis.algebra_dim(), 4);
        let basis = algebra_closure(&trivial(), 3, 8).unwrap();
        assert_eq!(basis.algebra_dim(), 1);
    }

    #[test]
    fn closure_is_star_and_product_closed() {
        let basis = algebra_closure(&subfix(), 2, 8).unwrap();
        assert!(basis.adjoint_residual() < 1e-8);
        for i in 0..basis.algebra_dim() {
            for j in 0..basis.algebra_dim() {
                assert!(basis.product_residual(i, j) < 1e-8);
            }
        }
    }

    #[test]
    fn truncation_is_flagged_and_blocks_refuse_it() {
        let basis = algebra_closure(&aleshin(), 2, 1).unwrap();
        assert!(basis.truncated);
        let err = block_dimensions(&aleshin(), &basis, POWER_SEED).unwrap_err();
        assert!(matches!(err, WedderburnError::TruncatedClosure { .. }));
    }

    #[test]
    fn swap_splits_into_the_two_characters() {
        let aut = swap();
        let basis = algebra_closure(&aut, 1, 8).unwrap();
        let report = block_dimensions(&aut, &basis, POWER_SEED).unwrap();
        assert_eq!(report.blocks, vec![(1, 1), (1, 1)]);
        assert!(report.identities_hold(2));
        // one level deeper the same two characters appear with multiplicity
        let basis = algebra_closure(&aut, 2, 8).unwrap();
        let report = block_dimensions(&aut, &basis, POWER_SEED).unwrap();
        assert_eq!(report.blocks, vec![(1, 2), (1, 2)]);
    }

    #[test]
    fn odometer_levels_are_commutative_regular() {
        let aut = odo();
        for n in 1..=3u32 {
            let basis = algebra_closure(&aut, n, 8).unwrap();
            let report = block_dimensions(&aut, &basis, POWER_SEED).unwrap();
            let size = 1usize << n;
            assert_eq!(report.blocks, vec![(1, 1); size], "level {n}");
            assert!(report.identities_hold(size));
        }
    }

    #[test]
    fn subtree_fixer_blocks_at_level_two() {
        let aut = subfix();
        let basis = algebra_closure(&aut, 2, 8).unwrap();
        let report = block_dimensions(&aut, &basis, POWER_SEED).unwrap();
        assert!(report.max_block_dim() <= 2);
        assert!(report.identities_hold(4));
    }

    #[test]
    fn trivial_group_is_a_single_scalar_block() {
        let aut = trivial();
        let basis = algebra_closure(&aut, 2, 8).unwrap();
        let report = block_dimensions(&aut, &basis, POWER_SEED).unwrap();
        assert_eq!(report.blocks, vec![(1, 4)]);
    }

    #[test]
    fn odometer_trend_is_bounded() {
        // the level-4 quotient is cyclic of order 16, whose ball needs
        // radius 9 to stabilize, so the radius cap must exceed the default
        let report = dimension_trend(&odo(), 4, 12, POWER_SEED).unwrap();
        assert!(report
            .max_block_by_level
            .iter()
            .all(|&(_, d)| d == 1));
        assert_eq!(report.verdict, VERDICT_BOUNDED);
    }

    #[test]
    fn free_generators_make_blocks_grow() {
        // the level-2 quotient collapses to a cyclic group of order 4
        // (the images of a and b^-1 coincide there), so the largest block
        // stays 1 until level 3 and then doubles with each level
        let report = dimension_trend(&aleshin(), 4, 8, POWER_SEED).unwrap();
        let dims: Vec<usize> = report.max_block_by_level.iter().map(|&(_, d)| d).collect();
        assert_eq!(dims, vec![1, 1, 2, 4]);
        assert_eq!(report.verdict, VERDICT_GROWING);
    }
}
