//! GHZ stabilizer group, the Mermin Bell operator and its closed-form bounds.
//!
//! The GHZ state here is the joint +1 eigenvector of the generators
//! `g_i = X_i ⊗_{j≠i} Z_j`. Each product of an odd number of generators is a
//! full-weight X/Z word, X on the chosen subset; signs come from the phase
//! arithmetic in [`PauliWord::multiply`].

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, Rational, SqrtTwoPower};
use crate::pauli::{Letter, PauliWord};
use crate::scenario::{check_n, Observable, Setting};

/// Upper limit on `n` for enumerating the 2^(n-1) Mermin terms.
pub const MAX_MERMIN_N: usize = 24;

pub fn make_generators(n: usize) -> Result<Vec<PauliWord>> {
    check_n(n)?;
    Ok((0..n).map(|i| generator(n, i)).collect())
}

fn generator(n: usize, i: usize) -> PauliWord {
    let letters = (0..n)
        .map(|j| if j == i { Letter::X } else { Letter::Z })
        .collect();
    PauliWord::new(letters, crate::pauli::Phase::ONE)
}

/// Ordered product of the generators in `subset` (bit `i` selects `g_i`), ascending index.
pub fn stabilizer_element(n: usize, subset: u32) -> Result<PauliWord> {
    if n < 32 && subset >> n != 0 {
        let index = (0..32).rev().find(|b| subset >> b & 1 == 1).unwrap_or(0);
        return Err(Error::IndexOutOfRange { index, n });
    }
    let mut acc = PauliWord::identity(n);
    for i in (0..n).filter(|i| subset >> i & 1 == 1) {
        acc = acc.multiply(&generator(n, i))?;
    }
    Ok(acc)
}

/// Intrinsic sign of the odd-subset element with X exactly on a set of size `x_count`.
///
/// Closed form `(-1)^((x_count - 1) / 2)`; cross-checked against
/// [`stabilizer_element`] in tests.
pub fn odd_term_sign(x_count: u32) -> i8 {
    debug_assert!(x_count % 2 == 1);
    if (x_count / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Full-weight X/Z stabilizer element: X on an odd subset, Z elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedSetting {
    pub n: usize,
    pub letters: Vec<Observable>,
    pub sign: i8,
}

impl SignedSetting {
    pub fn setting(&self) -> Setting {
        Setting::from_letters(&self.letters)
    }

    pub fn word(&self) -> String {
        let sign = if self.sign > 0 { '+' } else { '-' };
        std::iter::once(sign)
            .chain(self.letters.iter().map(|o| o.as_char()))
            .collect()
    }

    fn from_word(word: &PauliWord) -> Option<Self> {
        let sign = word.phase.sign()?;
        let letters = word
            .letters
            .iter()
            .map(|l| match l {
                Letter::X => Some(Observable::X),
                Letter::Z => Some(Observable::Z),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            n: word.n(),
            letters,
            sign,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MerminSpec {
    pub n: usize,
    pub terms: Vec<SignedSetting>,
    /// LHV bound `2^((n-1)/2)` of the Mermin inequality.
    pub classical_bound: SqrtTwoPower,
    /// `2^(n-1)`.
    pub quantum_value: BigInt,
    /// `2^((1-n)/2)`.
    pub v_crit: SqrtTwoPower,
    /// `n / (2n - 2)`.
    pub eta_crit: Rational,
}

impl MerminSpec {
    /// Ratio `quantum_value / classical_bound` as a power of √2.
    pub fn violation_ratio(&self) -> SqrtTwoPower {
        SqrtTwoPower::new(2 * (self.n as i64 - 1)).div(self.classical_bound)
    }

    pub fn summary(&self) -> MerminSummary {
        MerminSummary {
            n: self.n,
            terms: self.terms.iter().map(|t| t.word()).collect(),
            classical_bound: self.classical_bound.to_string(),
            classical_bound_f64: self.classical_bound.to_f64(),
            quantum_value: self.quantum_value.to_string(),
            eta_crit: format_rational(&self.eta_crit),
            eta_crit_f64: crate::exact::to_f64(&self.eta_crit),
            v_crit: self.v_crit.to_string(),
            v_crit_f64: self.v_crit.to_f64(),
            deterministic_lhv_max: (self.n <= 12).then(|| deterministic_lhv_max(self)),
        }
    }
}

/// Serializable view of a [`MerminSpec`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MerminSummary {
    pub n: usize,
    pub terms: Vec<String>,
    pub classical_bound: String,
    pub classical_bound_f64: f64,
    pub quantum_value: String,
    pub eta_crit: String,
    pub eta_crit_f64: f64,
    pub v_crit: String,
    pub v_crit_f64: f64,
    /// Maximum of the Mermin sum over deterministic ±1 assignments, when enumerated.
    pub deterministic_lhv_max: Option<i64>,
}

pub fn eta_crit(n: usize) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(2 * n - 2))
}

pub fn mermin_terms(n: usize) -> Result<MerminSpec> {
    check_n(n)?;
    if n > MAX_MERMIN_N {
        return Err(Error::TooManyParticles { n, max: MAX_MERMIN_N });
    }
    let mut terms = Vec::with_capacity(1 << (n - 1));
    for subset in (1u32..1 << n).filter(|s| s.count_ones() % 2 == 1) {
        let word = stabilizer_element(n, subset)?;
        let term = SignedSetting::from_word(&word)
            .expect("odd generator products are real full-weight X/Z words");
        terms.push(term);
    }
    let h = n as i64 - 1;
    Ok(MerminSpec {
        n,
        terms,
        classical_bound: SqrtTwoPower::new(h),
        quantum_value: BigInt::one() << (n - 1),
        v_crit: SqrtTwoPower::new(-h),
        eta_crit: eta_crit(n),
    })
}

/// Brute-force maximum of `Σ sign · Π_i a_i(letter_i)` over deterministic
/// assignments `a_i(X), a_i(Z) ∈ {±1}`.
///
/// Equals `classical_bound` for odd `n`. For even `n` in the X/Z scenario it is
/// `2^(n/2)`, larger than `2^((n-1)/2)`.
pub fn deterministic_lhv_max(spec: &MerminSpec) -> i64 {
    let n = spec.n;
    let masks: Vec<(u32, i64)> = spec
        .terms
        .iter()
        .map(|t| (t.setting().x_mask, t.sign as i64))
        .collect();
    let full = (1u32 << n) - 1;
    let mut best = i64::MIN;
    // bits of xs / zs select which particles answer -1 for X / Z
    for xs in 0u32..1 << n {
        for zs in 0u32..1 << n {
            let total: i64 = masks
                .iter()
                .map(|&(x, sign)| {
                    let minus = (xs & x) | (zs & (full & !x));
                    if minus.count_ones() % 2 == 0 {
                        sign
                    } else {
                        -sign
                    }
                })
                .sum();
            best = best.max(total.abs());
        }
    }
    best
}
