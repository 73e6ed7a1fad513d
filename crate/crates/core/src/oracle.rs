//! Independent dense-matrix oracle for the GHZ stabilizer state.
//!
//! Pauli words become `2^n × 2^n` matrices over the Gaussian integers, built
//! from 2×2 blocks by Kronecker product. The state is found as the column
//! space of `Π_i (1 + g_i)`, which must be one-dimensional.

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::pauli::{Letter, PauliWord};
use crate::scenario::{Observable, Setting};
use crate::stabilizer::make_generators;

pub const MAX_ORACLE_N: usize = 6;

type C = Complex<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    pub dim: usize,
    pub data: Vec<C>,
}

impl DenseMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C::zero(); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C::one();
        }
        Self { dim, data }
    }

    pub fn at(&self, r: usize, c: usize) -> C {
        self.data[r * self.dim + c]
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        let d = self.dim;
        let mut data = vec![C::zero(); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * other.at(k, c);
                }
            }
        }
        DenseMatrix { dim: d, data }
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, factor: C) -> DenseMatrix {
        DenseMatrix {
            dim: self.dim,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    /// Rank over the complex rationals (entries here are always real for the projector).
    fn real_rank(&self) -> usize {
        let d = self.dim;
        let mut rows: Vec<Vec<Rational>> = (0..d)
            .map(|r| {
                (0..d)
                    .map(|c| {
                        let z = self.at(r, c);
                        assert_eq!(z.im, 0, "projector must be real");
                        Rational::from_integer(BigInt::from(z.re))
                    })
                    .collect()
            })
            .collect();
        let mut rank = 0;
        for col in 0..d {
            let Some(p) = (rank..d).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank][col].clone();
            for r in 0..d {
                if r != rank && !rows[r][col].is_zero() {
                    let f = &rows[r][col] / &pivot;
                    for c in col..d {
                        let delta = &f * &rows[rank][c];
                        rows[r][c] -= delta;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

fn letter_block(letter: Letter) -> [[C; 2]; 2] {
    let z = C::zero();
    let o = C::one();
    let i = C::new(0, 1);
    match letter {
        Letter::I => [[o, z], [z, o]],
        Letter::X => [[z, o], [o, z]],
        Letter::Y => [[z, -i], [i, z]],
        Letter::Z => [[o, z], [z, -o]],
    }
}

fn phase_value(word: &PauliWord) -> C {
    match word.phase.exponent() {
        0 => C::new(1, 0),
        1 => C::new(0, 1),
        2 => C::new(-1, 0),
        _ => C::new(0, -1),
    }
}

/// `phase × ⊗_i letter_i`, basis bit `i` of an index belonging to particle `i`.
pub fn dense_matrix(word: &PauliWord) -> DenseMatrix {
    let n = word.n();
    let dim = 1usize << n;
    let blocks: Vec<_> = word.letters.iter().map(|&l| letter_block(l)).collect();
    let phase = phase_value(word);
    let mut data = vec![C::zero(); dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let mut v = phase;
            for (i, b) in blocks.iter().enumerate() {
                v *= b[r >> i & 1][c >> i & 1];
                if v.is_zero() {
                    break;
                }
            }
            data[r * dim + c] = v;
        }
    }
    DenseMatrix { dim, data }
}

/// Product of two words computed by matrix multiplication.
pub fn dense_product(a: &PauliWord, b: &PauliWord) -> DenseMatrix {
    dense_matrix(a).matmul(&dense_matrix(b))
}

/// The generator-defined GHZ state as an (unnormalized) integer vector.
#[derive(Clone, Debug)]
pub struct GhzOracle {
    pub n: usize,
    pub amplitudes: Vec<C>,
    norm_sq: i64,
}

impl GhzOracle {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_ORACLE_N {
            return Err(Error::TooManyParticles { n, max: MAX_ORACLE_N });
        }
        let gens = make_generators(n)?;
        let dim = 1usize << n;
        let id = DenseMatrix::identity(dim);
        let projector = gens
            .iter()
            .fold(id.clone(), |acc, g| acc.matmul(&id.add(&dense_matrix(g))));
        let rank = projector.real_rank();
        if rank != 1 {
            return Err(Error::EigenspaceDimension(rank));
        }
        let col = (0..dim)
            .find(|&c| (0..dim).any(|r| !projector.at(r, c).is_zero()))
            .expect("rank one projector has a nonzero column");
        let amplitudes: Vec<C> = (0..dim).map(|r| projector.at(r, col)).collect();
        let norm_sq = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        let oracle = Self {
            n,
            amplitudes,
            norm_sq,
        };
        for g in &gens {
            debug_assert_eq!(oracle.apply(g), oracle.amplitudes);
        }
        Ok(oracle)
    }

    fn apply(&self, word: &PauliWord) -> Vec<C> {
        let m = dense_matrix(word);
        (0..m.dim)
            .map(|r| (0..m.dim).map(|c| m.at(r, c) * self.amplitudes[c]).sum())
            .collect()
    }

    /// `⟨ψ|W|ψ⟩ / ⟨ψ|ψ⟩` for a Hermitian word.
    pub fn expectation(&self, word: &PauliWord) -> Result<Rational> {
        if word.n() != self.n {
            return Err(Error::Mismatch(word.n(), self.n));
        }
        let image = self.apply(word);
        let value: C = self
            .amplitudes
            .iter()
            .zip(&image)
            .map(|(a, b)| a.conj() * b)
            .sum();
        if value.im != 0 {
            return Err(Error::Solver(format!("non-real expectation for {word}")));
        }
        Ok(Rational::new(BigInt::from(value.re), BigInt::from(self.norm_sq)))
    }

    /// Correlator of the X/Z letters of `setting` on `subset`, identity elsewhere.
    pub fn correlator(&self, setting: Setting, subset: u32) -> Rational {
        let letters = (0..self.n)
            .map(|i| {
                if subset >> i & 1 == 0 {
                    Letter::I
                } else if setting.observable(i) == Observable::X {
                    Letter::X
                } else {
                    Letter::Z
                }
            })
            .collect();
        self.expectation(&PauliWord::new(letters, crate::pauli::Phase::ONE))
            .expect("X/Z words are Hermitian")
    }
}
