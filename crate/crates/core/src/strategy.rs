//! Deterministic local instruction sets with no-click answers, their
//! `(k, l, m)` classification, and evaluation of LHV models.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, Rational};
use crate::exec::Execution;
use crate::scenario::{check_table_n, pow3, Click, Observable, Outcome, Setting};
use crate::target::{ExactTable, StatTable};

/// What one particle answers for X and for Z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalStrategy {
    pub answer_x: Click,
    pub answer_z: Click,
}

impl LocalStrategy {
    pub fn new(answer_x: Click, answer_z: Click) -> Self {
        Self { answer_x, answer_z }
    }

    pub fn all() -> impl Iterator<Item = LocalStrategy> {
        (0..9u8).map(LocalStrategy::from_code)
    }

    /// `3·code(X answer) + code(Z answer)`.
    pub fn code(self) -> u8 {
        3 * self.answer_x.code() + self.answer_z.code()
    }

    pub fn from_code(code: u8) -> Self {
        Self::new(Click::from_code(code / 3), Click::from_code(code % 3))
    }

    pub fn answer(self, obs: Observable) -> Click {
        match obs {
            Observable::X => self.answer_x,
            Observable::Z => self.answer_z,
        }
    }

    pub fn defined_count(self) -> usize {
        self.answer_x.is_click() as usize + self.answer_z.is_click() as usize
    }
}

/// Base-9 packed per-particle strategies; digit `i` is particle `i`'s [`LocalStrategy::code`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GlobalStrategy(pub u64);

pub fn pow9(n: usize) -> u64 {
    9u64.pow(n as u32)
}

impl GlobalStrategy {
    pub fn from_locals(locals: &[LocalStrategy]) -> Self {
        Self(
            locals
                .iter()
                .rev()
                .fold(0u64, |acc, l| acc * 9 + l.code() as u64),
        )
    }

    /// Every particle answers `click` for both observables.
    pub fn uniform(n: usize, local: LocalStrategy) -> Self {
        Self::from_locals(&vec![local; n])
    }

    pub fn local(self, particle: usize) -> LocalStrategy {
        LocalStrategy::from_code((self.0 / pow9(particle) % 9) as u8)
    }

    pub fn locals(self, n: usize) -> Vec<LocalStrategy> {
        (0..n).map(|i| self.local(i)).collect()
    }

    pub fn answer(self, setting: Setting) -> Outcome {
        let mut code = 0u32;
        let mut place = 1u32;
        let mut rest = self.0;
        for i in 0..setting.n {
            let digit = (rest % 9) as u32;
            rest /= 9;
            let c = if setting.x_mask >> i & 1 == 1 {
                digit / 3
            } else {
                digit % 3
            };
            code += c * place;
            place *= 3;
        }
        Outcome::new(setting.n, code)
    }

    pub fn classify(self, n: usize) -> InstructionClass {
        let mut counts = [0usize; 3];
        for i in 0..n {
            counts[self.local(i).defined_count()] += 1;
        }
        InstructionClass {
            k: counts[2],
            l: counts[1],
            m: counts[0],
        }
    }

    pub fn display(self, n: usize) -> String {
        self.locals(n)
            .iter()
            .map(|l| format!("{}{}", l.answer_x.as_char(), l.answer_z.as_char()))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// `k` particles define both observables, `l` exactly one, `m` none.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstructionClass {
    pub k: usize,
    pub l: usize,
    pub m: usize,
}

impl InstructionClass {
    pub fn new(k: usize, l: usize, m: usize) -> Self {
        Self { k, l, m }
    }

    pub fn n(self) -> usize {
        self.k + self.l + self.m
    }

    pub fn all(n: usize) -> impl Iterator<Item = InstructionClass> {
        (0..=n).flat_map(move |k| (0..=n - k).map(move |l| InstructionClass::new(k, l, n - k - l)))
    }
}

impl fmt::Display for InstructionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I_{{{},{},{}}}", self.k, self.l, self.m)
    }
}

pub fn classify(g: GlobalStrategy, n: usize) -> InstructionClass {
    g.classify(n)
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Structural configurations (who defines what, signs ignored): `C(n,k)·C(n-k,l)·2^l`.
pub fn class_size_structural(n: usize, c: InstructionClass) -> Result<u128> {
    if c.n() != n {
        return Err(Error::Mismatch(c.n(), n));
    }
    Ok((binomial(n, c.k) * binomial(n - c.k, c.l)) << c.l)
}

/// A request that each listed (distinct) particle has the given observable defined.
pub type DetectionQuery = [(usize, Observable)];

fn validate_query(n: usize, query: &DetectionQuery) -> Result<()> {
    let mut seen = 0u64;
    for &(i, _) in query {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if seen >> i & 1 == 1 {
            return Err(Error::InvalidQuery(format!("particle {i} listed twice")));
        }
        seen |= 1 << i;
    }
    Ok(())
}

/// Number of structural configurations of `c` in which all `q` queried
/// observables are defined. Queried particles are either among the `k`
/// both-defined ones or among the `l` one-defined ones with the matching
/// observable.
fn covering_configurations(n: usize, c: InstructionClass, q: usize) -> u128 {
    (0..=q.min(c.k))
        .filter(|&j| q - j <= c.l)
        .map(|j| {
            let free = n - q;
            let rest_k = c.k - j;
            let rest_l = c.l - (q - j);
            binomial(q, j)
                * binomial(free, rest_k)
                * if rest_k <= free {
                    binomial(free - rest_k, rest_l) << rest_l
                } else {
                    0
                }
        })
        .sum()
}

/// Probability that every queried observable is defined, averaged uniformly
/// over the structural configurations of `c`.
pub fn class_detection_prob(
    n: usize,
    c: InstructionClass,
    query: &DetectionQuery,
) -> Result<Rational> {
    validate_query(n, query)?;
    let total = class_size_structural(n, c)?;
    let hits = covering_configurations(n, c, query.len());
    Ok(Rational::new(BigInt::from(hits), BigInt::from(total)))
}

/// `P(target | given)` within class `c`; `None` when `P(given) = 0`.
pub fn class_conditional_prob(
    n: usize,
    c: InstructionClass,
    target: (usize, Observable),
    given: &DetectionQuery,
) -> Result<Option<Rational>> {
    let mut joint: Vec<_> = given.to_vec();
    joint.push(target);
    validate_query(n, &joint)?;
    let denominator = class_detection_prob(n, c, given)?;
    if denominator.is_zero() {
        return Ok(None);
    }
    Ok(Some(class_detection_prob(n, c, &joint)? / denominator))
}

/// Aggregate weight per instruction class.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ClassWeights(pub BTreeMap<InstructionClass, Rational>);

impl ClassWeights {
    pub fn from_pairs(pairs: &[(InstructionClass, Rational)]) -> Self {
        Self(pairs.iter().cloned().collect())
    }

    pub fn total(&self) -> Rational {
        self.0.values().sum()
    }

    /// Probability that all queried observables are defined, for a model whose
    /// classes are each structurally uniform.
    pub fn detection_prob(&self, n: usize, query: &DetectionQuery) -> Result<Rational> {
        let mut total = Rational::zero();
        for (&c, rho) in &self.0 {
            total += rho * class_detection_prob(n, c, query)?;
        }
        Ok(total)
    }

    /// Single-observable click rate `P(A_i)`, checked identical for every `A`, `i`.
    pub fn single_click_rate(&self, n: usize) -> Result<Rational> {
        let reference = self.detection_prob(n, &[(0, Observable::X)])?;
        for i in 0..n {
            for obs in [Observable::X, Observable::Z] {
                let rate = self.detection_prob(n, &[(i, obs)])?;
                if rate != reference {
                    return Err(Error::AsymmetricClickRates {
                        a: format!("{}_0 = {}", 'X', format_rational(&reference)),
                        b: format!("{}_{i} = {}", obs.as_char(), format_rational(&rate)),
                    });
                }
            }
        }
        Ok(reference)
    }

    pub fn summaries(&self) -> Vec<ClassSummary> {
        self.0
            .iter()
            .filter(|(_, rho)| !rho.is_zero())
            .map(|(c, rho)| ClassSummary {
                k: c.k,
                l: c.l,
                m: c.m,
                rho: format_rational(rho),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub rho: String,
}

/// A probability distribution over global strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct LhvModel {
    pub n: usize,
    pub weights: BTreeMap<GlobalStrategy, Rational>,
}

impl LhvModel {
    pub fn new(n: usize, weights: BTreeMap<GlobalStrategy, Rational>) -> Result<Self> {
        check_table_n(n)?;
        let limit = pow9(n);
        if let Some(g) = weights.keys().find(|g| g.0 >= limit) {
            return Err(Error::Parse(format!("strategy {} out of range for n = {n}", g.0)));
        }
        if weights.values().any(|w| w.is_negative()) {
            return Err(Error::BadWeights("negative weight".into()));
        }
        let total: Rational = weights.values().sum();
        if total != Rational::one() {
            return Err(Error::BadWeights(format_rational(&total)));
        }
        let weights = weights.into_iter().filter(|(_, w)| !w.is_zero()).collect();
        Ok(Self { n, weights })
    }

    /// Like [`LhvModel::new`] but rescales weights whose sum deviates from 1 by rounding.
    pub fn normalized(n: usize, weights: BTreeMap<GlobalStrategy, Rational>) -> Result<Self> {
        let cleaned: BTreeMap<_, _> = weights
            .into_iter()
            .filter(|(_, w)| w.is_positive())
            .collect();
        let total: Rational = cleaned.values().sum();
        if total.is_zero() {
            return Err(Error::BadWeights("0".into()));
        }
        Self::new(n, cleaned.into_iter().map(|(g, w)| (g, w / &total)).collect())
    }

    pub fn deterministic(n: usize, g: GlobalStrategy) -> Result<Self> {
        Self::new(n, BTreeMap::from([(g, Rational::one())]))
    }

    pub fn class_weights(&self) -> ClassWeights {
        let mut out = BTreeMap::new();
        for (g, w) in &self.weights {
            *out.entry(g.classify(self.n)).or_insert_with(Rational::zero) += w;
        }
        ClassWeights(out)
    }

    /// Exact `P(o | s) = Σ_g w_g [g answers o under s]`.
    pub fn model_statistics(&self) -> ExactTable {
        self.model_statistics_with(Execution::default())
    }

    pub fn model_statistics_with(&self, exec: Execution) -> ExactTable {
        let n = self.n;
        let width = pow3(n);
        let rows = exec.map(1 << n, |s| {
            let setting = Setting::new(n, s as u32);
            let mut row = vec![Rational::zero(); width];
            for (g, w) in &self.weights {
                row[g.answer(setting).index()] += w;
            }
            row
        });
        StatTable {
            n,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    /// Floating-point statistics, for large witnesses.
    pub fn model_statistics_f64(&self) -> StatTable<f64> {
        let n = self.n;
        let width = pow3(n);
        let weights: Vec<(GlobalStrategy, f64)> = self
            .weights
            .iter()
            .map(|(g, w)| (*g, crate::exact::to_f64(w)))
            .collect();
        let mut entries = vec![0.0; (1 << n) * width];
        for setting in Setting::all(n) {
            let base = setting.index() * width;
            for &(g, w) in &weights {
                entries[base + g.answer(setting).index()] += w;
            }
        }
        StatTable { n, entries }
    }

    /// `P(A_i defined)`, required equal for all observables `A` and particles `i`.
    pub fn single_click_rate(&self) -> Result<Rational> {
        let rate = |i: usize, obs: Observable| -> Rational {
            self.weights
                .iter()
                .filter(|(g, _)| g.local(i).answer(obs).is_click())
                .map(|(_, w)| w.clone())
                .sum()
        };
        let reference = rate(0, Observable::X);
        for i in 0..self.n {
            for obs in [Observable::X, Observable::Z] {
                let r = rate(i, obs);
                if r != reference {
                    return Err(Error::AsymmetricClickRates {
                        a: format!("X_0 = {}", format_rational(&reference)),
                        b: format!("{}_{i} = {}", obs.as_char(), format_rational(&r)),
                    });
                }
            }
        }
        Ok(reference)
    }

    pub fn to_json(&self) -> LhvModelJson {
        LhvModelJson {
            n: self.n,
            weights: self
                .weights
                .iter()
                .map(|(g, w)| WeightJson {
                    strategy: g.0,
                    p: format_rational(w),
                })
                .collect(),
            classes: Some(self.class_weights().summaries()),
        }
    }

    pub fn from_json(json: &LhvModelJson) -> Result<Self> {
        let mut weights = BTreeMap::new();
        for entry in &json.weights {
            *weights
                .entry(GlobalStrategy(entry.strategy))
                .or_insert_with(Rational::zero) += parse_rational(&entry.p)?;
        }
        Self::new(json.n, weights)
    }

    /// Mixture `Σ λ_j · model_j` of models on the same `n`.
    pub fn mixture(parts: &[(Rational, &LhvModel)]) -> Result<Self> {
        let n = parts.first().map(|(_, m)| m.n).unwrap_or(3);
        let mut weights = BTreeMap::new();
        for (lambda, model) in parts {
            if model.n != n {
                return Err(Error::Mismatch(model.n, n));
            }
            for (g, w) in &model.weights {
                *weights.entry(*g).or_insert_with(Rational::zero) += lambda * w;
            }
        }
        Self::new(n, weights)
    }

    /// Keeps every defined answer independently with probability `keep`,
    /// separately for X and Z, which rescales the click rate by `keep`.
    pub fn downsample(&self, keep: &Rational) -> Result<Self> {
        if keep.is_negative() || *keep > Rational::one() {
            return Err(Error::OutOfUnitInterval {
                name: "keep",
                value: format_rational(keep),
            });
        }
        let drop = Rational::one() - keep;
        let mut weights: BTreeMap<GlobalStrategy, Rational> = BTreeMap::new();
        for (g, w) in &self.weights {
            let mut variants = vec![(Vec::with_capacity(self.n), w.clone())];
            for local in g.locals(self.n) {
                let options = |answer: Click| -> Vec<(Click, Rational)> {
                    if answer.is_click() {
                        vec![(answer, keep.clone()), (Click::NoClick, drop.clone())]
                    } else {
                        vec![(Click::NoClick, Rational::one())]
                    }
                };
                let mut next = Vec::new();
                for (prefix, p) in &variants {
                    for (x, px) in options(local.answer_x) {
                        for (z, pz) in options(local.answer_z) {
                            let q = p * &px * &pz;
                            if q.is_zero() {
                                continue;
                            }
                            let mut locals = prefix.clone();
                            locals.push(LocalStrategy::new(x, z));
                            next.push((locals, q));
                        }
                    }
                }
                variants = next;
            }
            for (locals, p) in variants {
                *weights
                    .entry(GlobalStrategy::from_locals(&locals))
                    .or_insert_with(Rational::zero) += p;
            }
        }
        Self::new(self.n, weights)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightJson {
    pub strategy: u64,
    pub p: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LhvModelJson {
    pub n: usize,
    pub weights: Vec<WeightJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub classes: Option<Vec<ClassSummary>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use Click::*;
    use Observable::*;

    fn both_plus() -> LocalStrategy {
        LocalStrategy::new(Plus, Plus)
    }

    fn nothing() -> LocalStrategy {
        LocalStrategy::new(NoClick, NoClick)
    }

    #[test]
    fn nine_local_strategies() {
        let all: std::collections::BTreeSet<_> = LocalStrategy::all().collect();
        assert_eq!(all.len(), 9);
        assert_eq!(LocalStrategy::new(Plus, Minus).code(), 7);
    }

    #[test]
    fn encoding_round_trips() {
        let locals = [both_plus(), nothing(), LocalStrategy::new(Minus, NoClick)];
        let g = GlobalStrategy::from_locals(&locals);
        assert_eq!(g.locals(3), locals);
        assert_eq!(g.0, 8 + 3 * 81);
        let s: Setting = "XZX".parse().unwrap();
        assert_eq!(g.answer(s).to_string(), "+0-");
    }

    #[test]
    fn classification_examples() {
        assert_eq!(
            GlobalStrategy::uniform(4, both_plus()).classify(4),
            InstructionClass::new(4, 0, 0)
        );
        let g = GlobalStrategy::from_locals(&[both_plus(), nothing(), nothing()]);
        assert_eq!(classify(g, 3), InstructionClass::new(1, 0, 2));
        let g = GlobalStrategy::from_locals(&[
            both_plus(),
            LocalStrategy::new(Minus, Plus),
            LocalStrategy::new(Plus, NoClick),
        ]);
        assert_eq!(classify(g, 3), InstructionClass::new(2, 1, 0));
    }

    #[test]
    fn structural_sizes() {
        assert_eq!(class_size_structural(3, InstructionClass::new(2, 1, 0)).unwrap(), 6);
        for n in 3..8 {
            assert_eq!(
                class_size_structural(n, InstructionClass::new(0, n, 0)).unwrap(),
                1 << n
            );
            assert_eq!(class_size_structural(n, InstructionClass::new(n, 0, 0)).unwrap(), 1);
        }
        assert!(class_size_structural(3, InstructionClass::new(1, 1, 0)).is_err());
    }

    #[test]
    fn class_ratio_values() {
        let all_x = |n: usize, skip: usize| -> Vec<(usize, Observable)> {
            (skip..n).map(|i| (i, X)).collect()
        };
        let c3 = InstructionClass::new(2, 1, 0);
        assert_eq!(
            class_conditional_prob(3, c3, (0, X), &all_x(3, 1)).unwrap(),
            Some(rat(3, 4))
        );
        for n in 3..=9usize {
            let c = InstructionClass::new(2, n - 2, 0);
            let full = class_detection_prob(n, c, &all_x(n, 0)).unwrap();
            assert_eq!(full, Rational::new(1.into(), BigInt::from(1u64 << (n - 2))));
            let rest = class_detection_prob(n, c, &all_x(n, 1)).unwrap();
            assert_eq!(
                rest,
                Rational::new(BigInt::from(2 * n - 2), BigInt::from(n as u64 * (1 << (n - 2))))
            );
            assert_eq!(full / rest, rat(n as i64, 2 * n as i64 - 2));
            let trivial = InstructionClass::new(0, n, 0);
            assert_eq!(
                class_conditional_prob(n, trivial, (0, X), &all_x(n, 1)).unwrap(),
                Some(rat(1, 2))
            );
        }
        let c = InstructionClass::new(1, 4, 0);
        assert_eq!(
            class_conditional_prob(5, c, (0, X), &all_x(5, 1)).unwrap(),
            Some(rat(5, 9))
        );
        assert_eq!(
            class_conditional_prob(5, InstructionClass::new(2, 2, 1), (0, X), &all_x(5, 1)).unwrap(),
            Some(int(0))
        );
        assert_eq!(
            class_conditional_prob(5, InstructionClass::new(2, 1, 2), (0, X), &all_x(5, 1)).unwrap(),
            None
        );
    }

    #[test]
    fn rejects_bad_queries() {
        let c = InstructionClass::new(1, 1, 1);
        assert!(class_detection_prob(3, c, &[(0, X), (0, Z)]).is_err());
        assert!(class_detection_prob(3, c, &[(3, X)]).is_err());
    }

    #[test]
    fn m3_click_rates() {
        let w = ClassWeights::from_pairs(&[
            (InstructionClass::new(2, 1, 0), rat(54, 64)),
            (InstructionClass::new(1, 0, 2), rat(9, 64)),
            (InstructionClass::new(0, 0, 3), rat(1, 64)),
        ]);
        assert_eq!(w.single_click_rate(3).unwrap(), rat(3, 4));
        assert_eq!(w.detection_prob(3, &[(0, X), (1, X)]).unwrap(), rat(9, 16));
        assert_eq!(
            ClassWeights::from_pairs(&[(InstructionClass::new(4, 0, 0), int(1))])
                .single_click_rate(4)
                .unwrap(),
            int(1)
        );
    }

    #[test]
    fn deterministic_statistics() {
        let g = GlobalStrategy::uniform(3, both_plus());
        let t = LhvModel::deterministic(3, g).unwrap().model_statistics();
        let plus: Outcome = "+++".parse().unwrap();
        for s in Setting::all(3) {
            assert_eq!(*t.get(s, plus), int(1));
        }
    }

    #[test]
    fn two_strategy_mixture() {
        let x_only = GlobalStrategy::uniform(3, LocalStrategy::new(Plus, NoClick));
        let z_only = GlobalStrategy::uniform(3, LocalStrategy::new(NoClick, Plus));
        let model =
            LhvModel::new(3, BTreeMap::from([(x_only, rat(1, 2)), (z_only, rat(1, 2))])).unwrap();
        let t = model.model_statistics();
        let xxx: Setting = "XXX".parse().unwrap();
        assert_eq!(*t.get(xxx, "+++".parse().unwrap()), rat(1, 2));
        assert_eq!(*t.get(xxx, Outcome::no_click(3)), rat(1, 2));
        assert_eq!(model.single_click_rate().unwrap(), rat(1, 2));
    }

    #[test]
    fn asymmetric_rates_are_reported() {
        let g = GlobalStrategy::from_locals(&[both_plus(), nothing(), nothing()]);
        let err = LhvModel::deterministic(3, g).unwrap().single_click_rate();
        assert!(matches!(err, Err(Error::AsymmetricClickRates { .. })));
    }

    #[test]
    fn rejects_bad_weights() {
        let g = GlobalStrategy(0);
        assert!(LhvModel::new(3, BTreeMap::from([(g, rat(1, 2))])).is_err());
        assert!(LhvModel::new(3, BTreeMap::from([(GlobalStrategy(729), int(1))])).is_err());
    }

    #[test]
    fn json_round_trip() {
        let model = LhvModel::new(
            3,
            BTreeMap::from([(GlobalStrategy(5), rat(1, 3)), (GlobalStrategy(80), rat(2, 3))]),
        )
        .unwrap();
        let text = serde_json::to_string(&model.to_json()).unwrap();
        let back: LhvModelJson = serde_json::from_str(&text).unwrap();
        assert_eq!(LhvModel::from_json(&back).unwrap(), model);
    }
}
