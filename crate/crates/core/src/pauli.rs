//! Signed Pauli words with exact phase tracking over {+1, +i, -1, -i}.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    /// Single-qubit product `self * other` as (phase, letter).
    fn mul(self, other: Letter) -> (Phase, Letter) {
        use Letter::*;
        match (self, other) {
            (I, b) => (Phase::ONE, b),
            (a, I) => (Phase::ONE, a),
            (a, b) if a == b => (Phase::ONE, I),
            (X, Y) => (Phase::I, Z),
            (Y, Z) => (Phase::I, X),
            (Z, X) => (Phase::I, Y),
            (Y, X) => (Phase::MINUS_I, Z),
            (Z, Y) => (Phase::MINUS_I, X),
            (X, Z) => (Phase::MINUS_I, Y),
            _ => unreachable!(),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// A power of `i`, stored modulo 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 % 2 == 0
    }

    /// `Some(±1)` for real phases.
    pub fn sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliWord {
    pub letters: Vec<Letter>,
    pub phase: Phase,
}

impl PauliWord {
    pub fn identity(n: usize) -> Self {
        Self {
            letters: vec![Letter::I; n],
            phase: Phase::ONE,
        }
    }

    pub fn new(letters: Vec<Letter>, phase: Phase) -> Self {
        Self { letters, phase }
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity_letters(&self) -> bool {
        self.letters.iter().all(|&l| l == Letter::I)
    }

    pub fn multiply(&self, other: &PauliWord) -> Result<PauliWord> {
        if self.n() != other.n() {
            return Err(Error::Mismatch(self.n(), other.n()));
        }
        let mut phase = self.phase * other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (p, l) = a.mul(b);
                phase = phase * p;
                l
            })
            .collect();
        Ok(PauliWord { letters, phase })
    }

    pub fn letter_string(&self) -> String {
        self.letters.iter().map(|l| l.as_char()).collect()
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.phase, self.letter_string())
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (phase, rest) = if let Some(r) = s.strip_prefix("+i") {
            (Phase::I, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (Phase::MINUS_I, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (Phase::ONE, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (Phase::MINUS_ONE, r)
        } else {
            (Phase::ONE, s)
        };
        let letters = rest
            .chars()
            .map(|c| Letter::from_char(c).ok_or_else(|| Error::Parse(format!("bad Pauli word {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::Parse(format!("empty Pauli word {s:?}")));
        }
        Ok(PauliWord { letters, phase })
    }
}

impl Serialize for PauliWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> PauliWord {
        s.parse().unwrap()
    }

    #[test]
    fn single_letter_table() {
        assert_eq!(w("X").multiply(&w("Y")).unwrap(), w("+iZ"));
        assert_eq!(w("Y").multiply(&w("X")).unwrap(), w("-iZ"));
        assert_eq!(w("Z").multiply(&w("X")).unwrap(), w("+iY"));
        assert_eq!(w("X").multiply(&w("Z")).unwrap(), w("-iY"));
        assert_eq!(w("Y").multiply(&w("Y")).unwrap(), w("I"));
    }

    #[test]
    fn generator_pair_product() {
        // (XZ)(ZX)(ZZ) = (-iY)(+iY)(I) = +YYI
        let p = w("XZZ").multiply(&w("ZXZ")).unwrap();
        assert_eq!(p.to_string(), "+YYI");
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(matches!(
            w("XZ").multiply(&w("XZZ")),
            Err(Error::Mismatch(2, 3))
        ));
    }

    #[test]
    fn text_form_round_trips() {
        for s in ["-XXX", "+iYZI", "-iXX", "+ZZZZ"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert_eq!(w("XZZ").to_string(), "+XZZ");
        assert!("+XQ".parse::<PauliWord>().is_err());
    }

    #[test]
    fn identity_is_neutral() {
        let a = w("-iXYZ");
        assert_eq!(a.multiply(&PauliWord::identity(3)).unwrap(), a);
        assert_eq!(PauliWord::identity(3).multiply(&a).unwrap(), a);
    }
}
