//! Exact quantum statistics of the noisy GHZ state under X/Z settings with
//! independent inefficient detectors.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, Rational};
use crate::exec::Execution;
use crate::scenario::{check_table_n, pow3, Outcome, Setting};
use crate::stabilizer::{mermin_terms, odd_term_sign};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScenarioParams {
    pub n: usize,
    pub eta: Rational,
    pub v: Rational,
}

impl ScenarioParams {
    pub fn new(n: usize, eta: Rational, v: Rational) -> Result<Self> {
        crate::scenario::check_n(n)?;
        for (name, value) in [("eta", &eta), ("v", &v)] {
            if value.is_negative() || *value > Rational::one() {
                return Err(Error::OutOfUnitInterval {
                    name,
                    value: format_rational(value),
                });
            }
        }
        Ok(Self { n, eta, v })
    }
}

/// Sign `±1` of the stabilizer element whose X/Z letters on `subset` match
/// `setting` (identity elsewhere), or `None` if no group element has that form.
///
/// Odd generator products are the full-weight words with X on an odd set;
/// nonempty even products carry Y letters. So apart from the empty word, only
/// `subset = all particles` with an odd number of X letters qualifies.
pub fn stabilizer_sign(setting: Setting, subset: u32) -> Option<i8> {
    let full = (1u32 << setting.n) - 1;
    if subset == 0 {
        return Some(1);
    }
    if subset == full && setting.x_count() % 2 == 1 {
        return Some(odd_term_sign(setting.x_count()));
    }
    None
}

/// `⟨Π_{i∈subset} A_i⟩` on `V·GHZ + (1-V)·1/2^n`, `A_i` given by `setting`.
pub fn correlator(setting: Setting, subset: u32, v: &Rational) -> Rational {
    if subset == 0 {
        return Rational::one();
    }
    match stabilizer_sign(setting, subset) {
        Some(sign) => v * Rational::from_integer(sign.into()),
        None => Rational::zero(),
    }
}

/// Target probability `P(outcome | setting)`, generic over the number type.
///
/// `η^|D| (1-η)^(n-|D|) 2^-|D| Σ_{T⊆D} corr(T) Π_{i∈T} o_i`, where the only
/// nonzero correlators are the empty one and, when every particle is detected,
/// the full-weight signed term.
pub fn entry_value<T>(setting: Setting, outcome: Outcome, eta: &T, v: &T) -> T
where
    T: Clone + num_traits::Num + Signed,
{
    let n = setting.n;
    let detected = outcome.detected();
    let d = detected.count_ones() as usize;
    let one = T::one();
    let two = one.clone() + one.clone();
    let mut click_factor = one.clone();
    for _ in 0..d {
        click_factor = click_factor * eta.clone() / two.clone();
    }
    let lost = one.clone() - eta.clone();
    for _ in d..n {
        click_factor = click_factor * lost.clone();
    }
    let mut sum = one;
    if let Some(sign) = stabilizer_sign(setting, detected).filter(|_| detected != 0) {
        let term = v.clone();
        let signed = if sign * outcome.product_over(detected) > 0 {
            term
        } else {
            -term
        };
        sum = sum + signed;
    }
    click_factor * sum
}

/// Probabilities for every `(setting, outcome)` pair, setting-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StatTable<T> {
    pub n: usize,
    pub entries: Vec<T>,
}

pub type ExactTable = StatTable<Rational>;

impl<T: Clone> StatTable<T> {
    pub fn outcomes_per_setting(&self) -> usize {
        pow3(self.n)
    }

    pub fn index(&self, setting: Setting, outcome: Outcome) -> usize {
        setting.index() * pow3(self.n) + outcome.index()
    }

    pub fn get(&self, setting: Setting, outcome: Outcome) -> &T {
        &self.entries[self.index(setting, outcome)]
    }

    pub fn row(&self, setting: Setting) -> &[T] {
        let w = pow3(self.n);
        &self.entries[setting.index() * w..(setting.index() + 1) * w]
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> StatTable<U> {
        StatTable {
            n: self.n,
            entries: self.entries.iter().map(f).collect(),
        }
    }
}

impl ExactTable {
    pub fn to_f64(&self) -> StatTable<f64> {
        self.map(crate::exact::to_f64)
    }

    /// `Σ_o P(o|s) - 1` for each setting; all zero for a normalized table.
    pub fn normalization_defects(&self) -> Vec<Rational> {
        Setting::all(self.n)
            .map(|s| self.row(s).iter().sum::<Rational>() - Rational::one())
            .collect()
    }

    /// Probability that every particle of `subset` clicks under `setting`.
    pub fn click_probability(&self, setting: Setting, subset: u32) -> Rational {
        Outcome::all(self.n)
            .filter(|o| o.detected() & subset == subset)
            .map(|o| self.get(setting, o).clone())
            .sum()
    }
}

impl StatTable<f64> {
    pub fn max_abs_diff(&self, other: &StatTable<f64>) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Marginal over `particle`'s outcome: entries indexed by `(setting, outcome)`
/// with `particle`'s outcome digit forced to zero.
pub fn marginal_over<T>(table: &StatTable<T>, particle: usize) -> StatTable<T>
where
    T: Clone + Zero + std::ops::AddAssign,
{
    let n = table.n;
    let mut entries = vec![T::zero(); table.entries.len()];
    let place = 3u32.pow(particle as u32);
    for s in Setting::all(n) {
        for o in Outcome::all(n) {
            let digit = o.code / place % 3;
            let reduced = Outcome::new(n, o.code - digit * place);
            let idx = table.index(s, reduced);
            entries[idx] += table.get(s, o).clone();
        }
    }
    StatTable { n, entries }
}

/// True iff every one-particle marginal is independent of that particle's setting.
pub fn is_no_signaling<T>(table: &StatTable<T>) -> bool
where
    T: Clone + Zero + std::ops::AddAssign + PartialEq,
{
    (0..table.n).all(|i| {
        let m = marginal_over(table, i);
        Setting::all(table.n).all(|s| {
            let flipped = Setting::new(table.n, s.x_mask ^ (1 << i));
            m.row(s) == m.row(flipped)
        })
    })
}

pub fn target_table(params: &ScenarioParams) -> Result<ExactTable> {
    target_table_with(params, Execution::default())
}

pub fn target_table_with(params: &ScenarioParams, exec: Execution) -> Result<ExactTable> {
    let n = params.n;
    check_table_n(n)?;
    let rows = exec.map(1 << n, |s| {
        let setting = Setting::new(n, s as u32);
        Outcome::all(n)
            .map(|o| entry_value(setting, o, &params.eta, &params.v))
            .collect::<Vec<_>>()
    });
    let entries: Vec<Rational> = rows.into_iter().flatten().collect();
    let table = StatTable { n, entries };
    for s in Setting::all(n) {
        for o in Outcome::all(n) {
            let p = table.get(s, o);
            if p.is_negative() {
                return Err(Error::NegativeProbability {
                    setting: s.to_string(),
                    outcome: o.to_string(),
                    value: format_rational(p),
                });
            }
        }
    }
    Ok(table)
}

/// `Σ_terms sign · ⟨term⟩ = v · 2^(n-1)`, evaluated on detected statistics.
pub fn mermin_value(params: &ScenarioParams) -> Result<Rational> {
    let spec = mermin_terms(params.n)?;
    let full = (1u32 << params.n) - 1;
    Ok(spec
        .terms
        .iter()
        .map(|t| Rational::from_integer(t.sign.into()) * correlator(t.setting(), full, &params.v))
        .sum())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutcomeJson {
    pub o: String,
    pub p: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RowJson {
    pub setting: String,
    pub outcomes: Vec<OutcomeJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StatTableJson {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub v: Option<String>,
    pub rows: Vec<RowJson>,
}

impl ExactTable {
    /// JSON form listing the nonzero outcomes of each setting.
    pub fn to_json(&self, params: Option<&ScenarioParams>) -> StatTableJson {
        let rows = Setting::all(self.n)
            .map(|s| RowJson {
                setting: s.to_string(),
                outcomes: Outcome::all(self.n)
                    .filter(|&o| !self.get(s, o).is_zero())
                    .map(|o| OutcomeJson {
                        o: o.to_string(),
                        p: format_rational(self.get(s, o)),
                    })
                    .collect(),
            })
            .collect();
        StatTableJson {
            n: self.n,
            eta: params.map(|p| format_rational(&p.eta)),
            v: params.map(|p| format_rational(&p.v)),
            rows,
        }
    }

    pub fn from_json(json: &StatTableJson) -> Result<Self> {
        let n = json.n;
        check_table_n(n)?;
        let mut entries = vec![Rational::zero(); (1 << n) * pow3(n)];
        let mut seen = BTreeMap::new();
        for row in &json.rows {
            let s: Setting = row.setting.parse()?;
            if s.n != n {
                return Err(Error::Mismatch(s.n, n));
            }
            for cell in &row.outcomes {
                let o: crate::scenario::Outcome = cell.o.parse()?;
                if o.n != n {
                    return Err(Error::Mismatch(o.n, n));
                }
                let idx = s.index() * pow3(n) + o.index();
                entries[idx] = parse_rational(&cell.p)?;
                *seen.entry(idx).or_insert(0) += 1;
            }
        }
        if let Some((&idx, _)) = seen.iter().find(|(_, &c)| c > 1) {
            return Err(Error::Parse(format!("duplicate table cell {idx}")));
        }
        Ok(StatTable { n, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, pow, rat};

    fn params(n: usize, eta: Rational, v: Rational) -> ScenarioParams {
        ScenarioParams::new(n, eta, v).unwrap()
    }

    fn s(text: &str) -> Setting {
        text.parse().unwrap()
    }

    fn o(text: &str) -> Outcome {
        text.parse().unwrap()
    }

    #[test]
    fn correlator_examples() {
        let one = int(1);
        assert_eq!(correlator(s("XZZ"), 0b111, &one), int(1));
        assert_eq!(correlator(s("XZZ"), 0, &rat(1, 3)), int(1));
        for letters in ["XZZ", "ZZZ", "XXX"] {
            assert_eq!(correlator(s(letters), 0b001, &one), int(0));
        }
        assert_eq!(correlator(s("XXX"), 0b111, &one), int(-1));
        assert_eq!(correlator(s("ZZZ"), 0b011, &one), int(0));
        assert_eq!(correlator(s("XZZ"), 0b111, &rat(1, 2)), rat(1, 2));
    }

    #[test]
    fn perfect_efficiency_row() {
        let t = target_table(&params(3, int(1), int(1))).unwrap();
        for out in Outcome::all(3) {
            let p = t.get(s("XZZ"), out).clone();
            if out.detected() == 0b111 && out.product_over(0b111) == 1 {
                assert_eq!(p, rat(1, 4));
            } else {
                assert_eq!(p, int(0));
            }
        }
    }

    #[test]
    fn half_efficiency_single_click() {
        let t = target_table(&params(3, rat(1, 2), int(1))).unwrap();
        assert_eq!(*t.get(s("XZZ"), o("+00")), rat(1, 16));
    }

    #[test]
    fn zero_efficiency() {
        let t = target_table(&params(4, int(0), rat(2, 3))).unwrap();
        for st in Setting::all(4) {
            assert_eq!(*t.get(st, Outcome::no_click(4)), int(1));
        }
    }

    #[test]
    fn invariants_hold() {
        let t = target_table(&params(4, rat(2, 3), rat(3, 5))).unwrap();
        assert!(t.normalization_defects().iter().all(|d| d.is_zero()));
        assert!(is_no_signaling(&t));
        for st in Setting::all(4) {
            for a in 0u32..16 {
                assert_eq!(
                    t.click_probability(st, a),
                    pow(&rat(2, 3), a.count_ones() as usize)
                );
            }
        }
    }

    #[test]
    fn mermin_values() {
        assert_eq!(mermin_value(&params(3, int(1), int(1))).unwrap(), int(4));
        assert_eq!(mermin_value(&params(3, int(1), rat(1, 2))).unwrap(), int(2));
        assert_eq!(mermin_value(&params(5, int(1), int(1))).unwrap(), int(16));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ScenarioParams::new(3, rat(3, 2), int(1)).is_err());
        assert!(ScenarioParams::new(3, int(1), int(-1)).is_err());
        assert!(ScenarioParams::new(2, int(1), int(1)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = params(3, rat(3, 4), int(1));
        let t = target_table(&p).unwrap();
        let json = t.to_json(Some(&p));
        assert_eq!(json.rows.len(), 8);
        assert_eq!(ExactTable::from_json(&json).unwrap(), t);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("\"setting\":\"XZZ\""));
    }

    #[test]
    fn float_entries_agree() {
        let n = 3;
        for st in Setting::all(n) {
            for out in Outcome::all(n) {
                let exact = entry_value(st, out, &rat(3, 4), &rat(1, 2));
                let float = entry_value(st, out, &0.75f64, &0.5f64);
                assert!((crate::exact::to_f64(&exact) - float).abs() < 1e-15);
            }
        }
    }
}
