//! The finite-level representation: algebra elements as exact sparse
//! matrices on the level-n vertices.
//!
//! A group word permutes the dⁿ vertices of level n, so it becomes a
//! permutation matrix; an algebra element becomes the corresponding linear
//! combination. Entries are exact Gaussian rationals, floated only when a
//! numeric solver needs them. The matrix acts on column vectors: the entry
//! at (image, source) of a word's matrix is 1.

use crate::action::LevelError;
use crate::algebra::AlgebraElement;
use crate::automaton::Automaton;
use crate::scalar::GaussianRational;
use crate::words::Vertex;
use nalgebra::{Complex, DMatrix};
use num_rational::BigRational;
use num_traits::Zero;

#[derive(Debug, Clone)]
pub struct LevelMatrix {
    n: u32,
    dim: usize,
    /// Row-compressed: `rows[i]` lists (column, entry), sorted by column,
    /// zero entries dropped.
    rows: Vec<Vec<(usize, GaussianRational)>>,
    is_permutation: bool,
}

/// Equality is mathematical; the permutation flag is a conservative cache
/// (products drop it even when they happen to be permutations again).
impl PartialEq for LevelMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.dim == other.dim && self.rows == other.rows
    }
}

impl Eq for LevelMatrix {}

/// The matrix of an element at level n.
pub fn rho_level(
    aut: &Automaton,
    x: &AlgebraElement,
    n: u32,
) -> Result<LevelMatrix, LevelError> {
    let dim = aut.level_size(n).ok_or(LevelError::TooLarge {
        d: aut.alphabet(),
        n,
        cap: aut.level_cap,
    })? as usize;
    let mut triplets: Vec<(usize, usize, GaussianRational)> = Vec::new();
    for (w, c) in x.terms() {
        let p = aut.act_level(w, n)?;
        for j in 0..dim {
            triplets.push((p.apply(j as u32) as usize, j, c.clone()));
        }
    }
    let is_permutation =
        x.terms().len() == 1 && x.terms()[0].1 == GaussianRational::one();
    Ok(LevelMatrix::from_triplets(n, dim, triplets, is_permutation))
}

impl LevelMatrix {
    fn from_triplets(
        n: u32,
        dim: usize,
        mut triplets: Vec<(usize, usize, GaussianRational)>,
        is_permutation: bool,
    ) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut rows: Vec<Vec<(usize, GaussianRational)>> = vec![Vec::new(); dim];
        for (i, j, c) in triplets {
            match rows[i].last_mut() {
                Some((last_j, acc)) if *last_j == j => {
                    *acc = &*acc + &c;
                }
                _ => rows[i].push((j, c)),
            }
        }
        for row in &mut rows {
            row.retain(|(_, c)| !c.is_zero());
        }
        LevelMatrix {
            n,
            dim,
            rows,
            is_permutation,
        }
    }

    pub fn zero(n: u32, dim: usize) -> Self {
        LevelMatrix {
            n,
            dim,
            rows: vec![Vec::new(); dim],
            is_permutation: false,
        }
    }

    pub fn identity(n: u32, dim: usize) -> Self {
        LevelMatrix {
            n,
            dim,
            rows: (0..dim).map(|i| vec![(i, GaussianRational::one())]).collect(),
            is_permutation: true,
        }
    }

    pub fn level(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_permutation(&self) -> bool {
        self.is_permutation
    }

    pub fn rows(&self) -> &[Vec<(usize, GaussianRational)>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> GaussianRational {
        self.rows[i]
            .iter()
            .find(|(col, _)| *col == j)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(GaussianRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn mul(&self, other: &LevelMatrix) -> LevelMatrix {
        assert_eq!(self.dim, other.dim, "level dimension mismatch");
        let mut rows: Vec<Vec<(usize, GaussianRational)>> = Vec::with_capacity(self.dim);
        let mut dense: Vec<GaussianRational> = vec![GaussianRational::zero(); self.dim];
        let mut touched: Vec<usize> = Vec::new();
        for row in &self.rows {
            for (j, a) in row {
                for (k, b) in &other.rows[*j] {
                    if dense[*k].is_zero() {
                        touched.push(*k);
                    }
                    dense[*k] = &dense[*k] + &(a * b);
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for &k in &touched {
                let v = std::mem::replace(&mut dense[k], GaussianRational::zero());
                if !v.is_zero() {
                    out.push((k, v));
                }
            }
            touched.clear();
            rows.push(out);
        }
        LevelMatrix {
            n: self.n,
            dim: self.dim,
            rows,
            is_permutation: false,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> LevelMatrix {
        let mut triplets = Vec::with_capacity(self.nnz());
        for (i, row) in self.rows.iter().enumerate() {
            for (j, c) in row {
                triplets.push((*j, i, c.conj()));
            }
        }
        LevelMatrix::from_triplets(self.n, self.dim, triplets, false)
    }

    pub fn add(&self, other: &LevelMatrix) -> LevelMatrix {
        assert_eq!(self.dim, other.dim, "level dimension mismatch");
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for (i, row) in self.rows.iter().enumerate() {
            for (j, c) in row {
                triplets.push((i, *j, c.clone()));
            }
        }
        for (i, row) in other.rows.iter().enumerate() {
            for (j, c) in row {
                triplets.push((i, *j, c.clone()));
            }
        }
        LevelMatrix::from_triplets(self.n, self.dim, triplets, false)
    }

    pub fn sub(&self, other: &LevelMatrix) -> LevelMatrix {
        assert_eq!(self.dim, other.dim, "level dimension mismatch");
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for (i, row) in self.rows.iter().enumerate() {
            for (j, c) in row {
                triplets.push((i, *j, c.clone()));
            }
        }
        for (i, row) in other.rows.iter().enumerate() {
            for (j, c) in row {
                triplets.push((i, *j, -c));
            }
        }
        LevelMatrix::from_triplets(self.n, self.dim, triplets, false)
    }

    /// Exact squared Frobenius norm.
    pub fn frobenius_sq(&self) -> BigRational {
        let mut total = BigRational::zero();
        for row in &self.rows {
            for (_, c) in row {
                total += c.norm_sq();
            }
        }
        total
    }

    /// Floated copy of the sparse rows.
    pub fn float_rows(&self) -> Vec<Vec<(usize, Complex<f64>)>> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(j, c)| (*j, c.to_complex())).collect())
            .collect()
    }

    /// Re-embeds this matrix as a block of a larger zero matrix, offset to
    /// (row_off, col_off).
    pub fn shifted(&self, row_off: usize, col_off: usize, total: usize, level: u32) -> LevelMatrix {
        assert!(row_off + self.dim <= total && col_off + self.dim <= total);
        let mut rows: Vec<Vec<(usize, GaussianRational)>> = vec![Vec::new(); total];
        for (i, row) in self.rows.iter().enumerate() {
            rows[row_off + i] = row.iter().map(|(j, c)| (col_off + j, c.clone())).collect();
        }
        LevelMatrix {
            n: level,
            dim: total,
            rows,
            is_permutation: false,
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex<f64>> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for (j, c) in row {
                m[(i, *j)] = c.to_complex();
            }
        }
        m
    }
}

/// Frobenius distance between ρ at consecutive levels, transported by the
/// isometry that sends a level-n vertex to the normalized sum of its
/// children. Zero exactly whenever both representations exist: the child map
/// intertwines them.
pub fn intertwiner_check(
    aut: &Automaton,
    x: &AlgebraElement,
    n: u32,
) -> Result<f64, LevelError> {
    use num_traits::ToPrimitive;
    let sq = intertwiner_residual_sq(aut, x, n)?;
    Ok(sq.to_f64().unwrap_or(f64::NAN).sqrt())
}

/// Exact squared residual of the intertwining identity; the public check
/// floats it.
pub(crate) fn intertwiner_residual_sq(
    aut: &Automaton,
    x: &AlgebraElement,
    n: u32,
) -> Result<BigRational, LevelError> {
    let d = aut.alphabet();
    let low = rho_level(aut, x, n)?;
    let high = rho_level(aut, x, n + 1)?;
    let dim_low = low.dim();
    // B = sqrt(d) * Q: the 0/1 child-incidence matrix, rows indexed by level
    // n+1, columns by level n. Column z has ones at the children of z, which
    // occupy the contiguous block [z*d, (z+1)*d).
    // E = B * rho_n(x) - rho_{n+1}(x) * B, exact; the residual divides the
    // Frobenius norm back by sqrt(d).
    let mut triplets: Vec<(usize, usize, GaussianRational)> = Vec::new();
    for (z, row) in low.rows().iter().enumerate() {
        for (j, c) in row {
            for k in 0..d {
                triplets.push((z * d + k, *j, c.clone()));
            }
        }
    }
    for (i, row) in high.rows().iter().enumerate() {
        for (child, c) in row {
            // (rho_{n+1}(x) * B)_{i,z} sums the entries over children of z
            triplets.push((i, child / d, -c));
        }
    }
    // the difference is rectangular (d^{n+1} rows, d^n columns); the square
    // container of size d^{n+1} holds it with the trailing columns empty
    let diff = LevelMatrix::from_triplets(n, dim_low * d, triplets, false);
    Ok(diff.frobenius_sq() / BigRational::from_integer(d.into()))
}

/// Image of the indicator of a vertex tuple under the p-fold tensor power,
/// as a sparse coefficient map. The full tensor space is never built: each
/// word of the element contributes one image tuple.
pub fn tensor_power_apply(
    aut: &Automaton,
    x: &AlgebraElement,
    z: &[Vertex],
) -> Vec<(Vec<Vertex>, GaussianRational)> {
    let mut out: Vec<(Vec<Vertex>, GaussianRational)> = Vec::new();
    for (w, c) in x.terms() {
        let image: Vec<Vertex> = z.iter().map(|v| aut.act(w, v)).collect();
        out.push((image, c.clone()));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(Vec<Vertex>, GaussianRational)> = Vec::new();
    for (tuple, c) in out {
        match merged.last_mut() {
            Some((last, acc)) if *last == tuple => {
                *acc = &*acc + &c;
            }
            _ => merged.push((tuple, c)),
        }
    }
    merged.retain(|(_, c)| !c.is_zero());
    merged
}
