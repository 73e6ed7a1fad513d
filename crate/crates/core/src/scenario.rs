//! Measurement settings and outcome vectors of the X/Z scenario.
//!
//! Particles are indexed from 0. A setting is the bitmask of particles
//! measuring X. An outcome vector is packed in base 3, digit `i` holding the
//! [`Click`] code of particle `i`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest particle count for which dense `(setting, outcome)` tables are built.
pub const MAX_TABLE_N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    X,
    Z,
}

impl Observable {
    pub fn other(self) -> Self {
        match self {
            Observable::X => Observable::Z,
            Observable::Z => Observable::X,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Observable::X => 'X',
            Observable::Z => 'Z',
        }
    }
}

/// Result of measuring one particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Click {
    NoClick,
    Minus,
    Plus,
}

impl Click {
    pub const ALL: [Click; 3] = [Click::NoClick, Click::Minus, Click::Plus];

    pub fn code(self) -> u8 {
        match self {
            Click::NoClick => 0,
            Click::Minus => 1,
            Click::Plus => 2,
        }
    }

    pub fn from_code(code: u8) -> Click {
        match code {
            0 => Click::NoClick,
            1 => Click::Minus,
            _ => Click::Plus,
        }
    }

    pub fn is_click(self) -> bool {
        self != Click::NoClick
    }

    /// +1 / -1 for detections, 0 for no click.
    pub fn value(self) -> i8 {
        match self {
            Click::NoClick => 0,
            Click::Minus => -1,
            Click::Plus => 1,
        }
    }

    pub fn flipped(self) -> Click {
        match self {
            Click::NoClick => Click::NoClick,
            Click::Minus => Click::Plus,
            Click::Plus => Click::Minus,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Click::NoClick => '0',
            Click::Minus => '-',
            Click::Plus => '+',
        }
    }

    pub fn from_char(c: char) -> Option<Click> {
        match c {
            '0' => Some(Click::NoClick),
            '-' => Some(Click::Minus),
            '+' => Some(Click::Plus),
            _ => None,
        }
    }
}

pub fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::TooFewParticles(n));
    }
    Ok(())
}

pub fn check_table_n(n: usize) -> Result<()> {
    check_n(n)?;
    if n > MAX_TABLE_N {
        return Err(Error::TooManyParticles { n, max: MAX_TABLE_N });
    }
    Ok(())
}

pub fn pow3(n: usize) -> usize {
    3usize.pow(n as u32)
}

/// Global choice of observable per particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting {
    pub n: usize,
    pub x_mask: u32,
}

impl Setting {
    pub fn new(n: usize, x_mask: u32) -> Self {
        debug_assert!(x_mask < (1 << n));
        Self { n, x_mask }
    }

    pub fn from_letters(letters: &[Observable]) -> Self {
        let x_mask = letters
            .iter()
            .enumerate()
            .filter(|(_, &o)| o == Observable::X)
            .fold(0, |m, (i, _)| m | (1 << i));
        Self::new(letters.len(), x_mask)
    }

    pub fn all(n: usize) -> impl Iterator<Item = Setting> {
        (0..1u32 << n).map(move |m| Setting::new(n, m))
    }

    pub fn index(self) -> usize {
        self.x_mask as usize
    }

    pub fn observable(self, particle: usize) -> Observable {
        if self.x_mask >> particle & 1 == 1 {
            Observable::X
        } else {
            Observable::Z
        }
    }

    pub fn letters(self) -> Vec<Observable> {
        (0..self.n).map(|i| self.observable(i)).collect()
    }

    pub fn x_count(self) -> u32 {
        self.x_mask.count_ones()
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "{}", self.observable(i).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Setting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c {
                'X' => Ok(Observable::X),
                'Z' => Ok(Observable::Z),
                _ => Err(Error::Parse(format!("bad setting {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Setting::from_letters(&letters))
    }
}

/// Packed outcome vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Outcome {
    pub n: usize,
    pub code: u32,
}

impl Outcome {
    pub fn new(n: usize, code: u32) -> Self {
        Self { n, code }
    }

    pub fn from_clicks(clicks: &[Click]) -> Self {
        let code = clicks
            .iter()
            .rev()
            .fold(0u32, |acc, c| acc * 3 + c.code() as u32);
        Self::new(clicks.len(), code)
    }

    pub fn all(n: usize) -> impl Iterator<Item = Outcome> {
        (0..pow3(n) as u32).map(move |c| Outcome::new(n, c))
    }

    pub fn no_click(n: usize) -> Self {
        Self::new(n, 0)
    }

    pub fn index(self) -> usize {
        self.code as usize
    }

    pub fn click(self, particle: usize) -> Click {
        Click::from_code((self.code / 3u32.pow(particle as u32) % 3) as u8)
    }

    pub fn clicks(self) -> Vec<Click> {
        (0..self.n).map(|i| self.click(i)).collect()
    }

    /// Bitmask of detected particles.
    pub fn detected(self) -> u32 {
        let mut mask = 0;
        let mut code = self.code;
        for i in 0..self.n {
            if code % 3 != 0 {
                mask |= 1 << i;
            }
            code /= 3;
        }
        mask
    }

    /// Bitmask of detected particles with result -1.
    pub fn minus_mask(self) -> u32 {
        let mut mask = 0;
        let mut code = self.code;
        for i in 0..self.n {
            if code % 3 == 1 {
                mask |= 1 << i;
            }
            code /= 3;
        }
        mask
    }

    /// Product of the results of the particles in `subset`, all of which must be detected.
    pub fn product_over(self, subset: u32) -> i8 {
        if (self.minus_mask() & subset).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "{}", self.click(i).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for Outcome {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let clicks = s
            .chars()
            .map(|c| Click::from_char(c).ok_or_else(|| Error::Parse(format!("bad outcome {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Outcome::from_clicks(&clicks))
    }
}
