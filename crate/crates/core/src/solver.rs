//! LHV simulability as linear-program feasibility over symmetry orbits of
//! strategies, with bisection on η and maximization of the visibility V.
//!
//! Variables are the total weights of strategy orbits under the verified
//! symmetry group, spread uniformly over each orbit. Since the target table
//! is invariant, restricting to such symmetric models loses nothing.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use log::{debug, info};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, from_f64, int, rat, Rational};
use crate::exec::Execution;
use crate::scenario::{check_n, pow3, Outcome, Setting};
use crate::simplex::{LinearProgram, LpNum, LpOutcome};
use crate::stabilizer::eta_crit;
use crate::strategy::{GlobalStrategy, InstructionClass, LhvModel, LhvModelJson};
use crate::symmetry::{entry_orbits, strategy_orbits, symmetry_group_with, Orbits, SymmetryGroup};
use crate::target::{entry_value, target_table, StatTable, ScenarioParams};

/// Default enumeration budget (9^7 strategies before the quotient).
pub const MAX_SOLVER_N: usize = 7;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_ETA_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Reproduce every entry of the target table.
    Full,
    /// Only click-rate products, full-detection Mermin correlations and
    /// unbiased single-particle outcomes.
    PaperConditions,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(Mode::Full),
            "paper" | "paper_conditions" | "paper-conditions" => Ok(Mode::PaperConditions),
            _ => Err(Error::Parse(format!("unknown mode {s:?} (full | paper)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::PaperConditions => "paper_conditions",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Arithmetic {
    Exact,
    Float { tol: f64 },
}

impl Default for Arithmetic {
    fn default() -> Self {
        Arithmetic::Float { tol: DEFAULT_TOL }
    }
}

/// One strategy orbit.
#[derive(Clone, Debug)]
pub struct Column {
    pub rep: GlobalStrategy,
    pub size: u64,
    pub class: InstructionClass,
}

/// A linear equality on orbit weights: `Σ coeffs · w = Σ rhs_coeffs · T(rep_R)`.
#[derive(Clone, Debug)]
pub struct ConstraintRow {
    pub coeffs: Vec<(usize, Rational)>,
    /// Functional over entry orbits defining the right-hand side from the target.
    pub rhs_terms: Vec<(usize, Rational)>,
    /// Weight in the L1 violation objective.
    pub weight: Rational,
}

/// Everything about a feasibility LP that does not depend on (η, V).
#[derive(Clone, Debug)]
pub struct ProblemTemplate {
    pub n: usize,
    pub mode: Mode,
    pub group: SymmetryGroup,
    pub columns: Vec<Column>,
    pub strategy_orbits: Orbits,
    /// Representative `(setting, outcome)` of each entry orbit.
    pub entry_reps: Vec<(Setting, Outcome)>,
    pub rows: Vec<ConstraintRow>,
}

/// Target table at the point where candidate symmetries are checked.
///
/// Transforms never change how many particles click, and the target is
/// `click_factor(|D|) · (1 + V·c(s, o))`, so agreement at one η ∈ (0, 1) with
/// V ≠ 0 implies agreement for all (η, V).
pub fn reference_table(n: usize) -> Result<crate::target::ExactTable> {
    target_table(&ScenarioParams::new(n, rat(1, 3), int(1))?)
}

fn check_budget(n: usize) -> Result<()> {
    check_n(n)?;
    if n > MAX_SOLVER_N {
        return Err(Error::TooManyParticles { n, max: MAX_SOLVER_N });
    }
    Ok(())
}

impl ProblemTemplate {
    /// Template quotiented by the verified symmetry group of the target.
    pub fn new(n: usize, mode: Mode) -> Result<Self> {
        Self::new_with(n, mode, Execution::default())
    }

    pub fn new_with(n: usize, mode: Mode, exec: Execution) -> Result<Self> {
        check_budget(n)?;
        let group = symmetry_group_with(&reference_table(n)?, exec)?;
        Self::with_group(n, mode, group, exec)
    }

    /// Template over an explicitly given group; `SymmetryGroup::trivial(n)` disables the quotient.
    pub fn with_group(n: usize, mode: Mode, group: SymmetryGroup, exec: Execution) -> Result<Self> {
        check_budget(n)?;
        let width = pow3(n);
        let strategy_orbits = strategy_orbits(&group);
        let eorbits = entry_orbits(&group);
        let columns: Vec<Column> = strategy_orbits
            .reps
            .iter()
            .zip(&strategy_orbits.sizes)
            .map(|(&rep, &size)| Column {
                rep: GlobalStrategy(rep),
                size,
                class: GlobalStrategy(rep).classify(n),
            })
            .collect();
        // A[R][O] = #{(s, o) ∈ R : rep_O(s) = o} / |R|
        let per_column: Vec<Vec<(usize, u64)>> = exec.map(columns.len(), |c| {
            let rep = columns[c].rep;
            let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
            for s in Setting::all(n) {
                let e = s.index() * width + rep.answer(s).index();
                *counts.entry(eorbits.orbit_of[e] as usize).or_default() += 1;
            }
            counts.into_iter().collect()
        });
        let mut by_entry: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); eorbits.len()];
        for (c, list) in per_column.iter().enumerate() {
            for &(r, count) in list {
                let size = eorbits.sizes[r] as i64;
                by_entry[r].push((c, rat(count as i64, size)));
            }
        }
        let entry_reps: Vec<(Setting, Outcome)> = eorbits
            .reps
            .iter()
            .map(|&e| {
                let e = e as usize;
                (
                    Setting::new(n, (e / width) as u32),
                    Outcome::new(n, (e % width) as u32),
                )
            })
            .collect();

        let mut rows = match mode {
            Mode::Full => by_entry
                .iter()
                .enumerate()
                .map(|(r, coeffs)| ConstraintRow {
                    coeffs: coeffs.clone(),
                    rhs_terms: vec![(r, Rational::one())],
                    weight: int(eorbits.sizes[r] as i64),
                })
                .collect(),
            Mode::PaperConditions => paper_rows(n, &eorbits, &by_entry),
        };
        rows.push(ConstraintRow {
            coeffs: (0..columns.len()).map(|c| (c, Rational::one())).collect(),
            rhs_terms: Vec::new(),
            weight: Rational::one(),
        });
        info!(
            "template n={n} mode={mode}: |G|={} columns={} entry orbits={} rows={}",
            group.order,
            columns.len(),
            eorbits.len(),
            rows.len()
        );
        Ok(Self {
            n,
            mode,
            group,
            columns,
            strategy_orbits,
            entry_reps,
            rows,
        })
    }

    /// `(t0, t1)` with right-hand side `t0 + V·t1` for each row. The final
    /// (normalization) row is `(1, 0)`.
    fn rhs_affine<T>(&self, eta: &T) -> Vec<(T, T)>
    where
        T: LpNum + num_traits::Num + Signed,
    {
        let zero = T::zero();
        let one = T::one();
        let values: Vec<(T, T)> = self
            .entry_reps
            .iter()
            .map(|&(s, o)| {
                let base = entry_value(s, o, eta, &zero);
                let with_v = entry_value(s, o, eta, &one);
                (base.clone(), with_v - base)
            })
            .collect();
        let last = self.rows.len() - 1;
        self.rows
            .iter()
            .enumerate()
            .map(|(j, row)| {
                if j == last {
                    return (T::one(), T::zero());
                }
                row.rhs_terms.iter().fold((T::zero(), T::zero()), |(a, b), (r, coef)| {
                    let c: T = convert(coef);
                    (
                        a + c.clone() * values[*r].0.clone(),
                        b + c * values[*r].1.clone(),
                    )
                })
            })
            .collect()
    }

    pub fn class_members(&self, class: InstructionClass) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&c| self.columns[c].class == class)
            .collect()
    }

    /// Strategy-level model spreading each orbit weight uniformly over the orbit.
    pub fn expand(&self, orbit_weights: &[(usize, Rational)]) -> Result<LhvModel> {
        let wanted: HashMap<usize, Rational> = orbit_weights
            .iter()
            .filter(|(_, w)| w.is_positive())
            .cloned()
            .collect();
        let mut weights = BTreeMap::new();
        for (x, &o) in self.strategy_orbits.orbit_of.iter().enumerate() {
            if let Some(w) = wanted.get(&(o as usize)) {
                let size = self.columns[o as usize].size as i64;
                weights.insert(GlobalStrategy(x as u64), w / int(size));
            }
        }
        LhvModel::normalized(self.n, weights)
    }
}

fn convert<T: LpNum>(value: &Rational) -> T {
    T::from_rational(value)
}

/// Constraint families on observable statistics:
/// click products `P(all of A click | s) = η^|A|`, full-detection Mermin
/// correlations `E[Π o · 1{all click} | σ] = V·sign(σ)·η^n`, and unbiased
/// single-particle outcomes `E[o_i · 1{i clicks} | s] = 0`.
fn paper_rows(
    n: usize,
    eorbits: &Orbits,
    by_entry: &[Vec<(usize, Rational)>],
) -> Vec<ConstraintRow> {
    let width = pow3(n);
    let full = (1u32 << n) - 1;
    let mut functionals: Vec<BTreeMap<usize, Rational>> = Vec::new();
    let mut add = |cells: &mut dyn Iterator<Item = (usize, Rational)>| {
        let mut f: BTreeMap<usize, Rational> = BTreeMap::new();
        for (e, c) in cells {
            *f.entry(eorbits.orbit_of[e] as usize).or_insert_with(Rational::zero) += c;
        }
        f.retain(|_, c| !c.is_zero());
        if !f.is_empty() {
            functionals.push(f);
        }
    };
    for s in Setting::all(n) {
        let base = s.index() * width;
        for a in 1..=full {
            add(&mut Outcome::all(n)
                .filter(|o| o.detected() & a == a)
                .map(|o| (base + o.index(), Rational::one())));
        }
        if s.x_count() % 2 == 1 {
            add(&mut Outcome::all(n)
                .filter(|o| o.detected() == full)
                .map(|o| (base + o.index(), int(o.product_over(full) as i64))));
        }
        for i in 0..n {
            add(&mut Outcome::all(n)
                .filter(|o| o.click(i).is_click())
                .map(|o| (base + o.index(), int(o.click(i).value() as i64))));
        }
    }
    // aggregate to strategy-orbit rows and drop duplicates
    let mut seen = std::collections::HashSet::new();
    let mut rows = Vec::new();
    for f in functionals {
        let mut coeffs: BTreeMap<usize, Rational> = BTreeMap::new();
        for (&r, c) in &f {
            for (col, a) in &by_entry[r] {
                *coeffs.entry(*col).or_insert_with(Rational::zero) += c * a;
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        let coeffs: Vec<(usize, Rational)> = coeffs.into_iter().collect();
        let rhs_terms: Vec<(usize, Rational)> = f.into_iter().collect();
        let key = format!("{coeffs:?}|{rhs_terms:?}");
        if seen.insert(key) {
            rows.push(ConstraintRow {
                coeffs,
                rhs_terms,
                weight: Rational::one(),
            });
        }
    }
    rows
}

#[derive(Clone, Debug, PartialEq)]
pub enum Visibility {
    Fixed(Rational),
    /// Maximize V ∈ [0, 1].
    Free,
}

/// One feasibility question on a template.
#[derive(Clone, Debug)]
pub struct FeasibilityProblem<'a> {
    pub template: &'a ProblemTemplate,
    pub eta: Rational,
    pub v: Visibility,
    /// Columns admitted as variables; `None` admits all.
    pub allowed: Option<Vec<bool>>,
    /// Additional equalities `Σ_{orbits in class} w = ρ`.
    pub class_weights: Vec<(InstructionClass, Rational)>,
}

pub fn build_problem(template: &ProblemTemplate, eta: Rational, v: Visibility) -> FeasibilityProblem<'_> {
    FeasibilityProblem {
        template,
        eta,
        v,
        allowed: None,
        class_weights: Vec::new(),
    }
}

impl<'a> FeasibilityProblem<'a> {
    pub fn restrict_to_classes(mut self, classes: &[InstructionClass]) -> Self {
        self.allowed = Some(
            self.template
                .columns
                .iter()
                .map(|c| classes.contains(&c.class))
                .collect(),
        );
        self
    }

    pub fn with_class_weights(mut self, weights: &[(InstructionClass, Rational)]) -> Self {
        let classes: Vec<_> = weights.iter().map(|(c, _)| *c).collect();
        self = self.restrict_to_classes(&classes);
        self.class_weights = weights.to_vec();
        self
    }

    fn variables(&self) -> Vec<usize> {
        (0..self.template.columns.len())
            .filter(|&c| self.allowed.as_ref().is_none_or(|a| a[c]))
            .collect()
    }

    fn fixed_rhs<T: LpNum + num_traits::Num + Signed>(&self, v: &Rational) -> Vec<T> {
        let eta: T = convert(&self.eta);
        let v: T = convert(v);
        self.template
            .rhs_affine(&eta)
            .into_iter()
            .map(|(a, b)| a + v.clone() * b)
            .collect()
    }

    fn class_rows<T: LpNum + num_traits::Num + Signed>(
        &self,
        index_of: &HashMap<usize, usize>,
    ) -> Vec<(Vec<(usize, T)>, T)> {
        self.class_weights
            .iter()
            .map(|(class, rho)| {
                let coeffs = self
                    .template
                    .class_members(*class)
                    .into_iter()
                    .filter_map(|c| index_of.get(&c).map(|&j| (j, T::one())))
                    .collect();
                (coeffs, convert(rho))
            })
            .collect()
    }
}

/// Weights found by the solver.
#[derive(Clone, Debug)]
pub struct Witness {
    /// `(column, orbit weight)` for positive weights.
    pub orbit_weights: Vec<(usize, Rational)>,
    pub v: Rational,
    /// Weighted L1 violation at the optimum (zero on the exact path when feasible).
    pub violation: f64,
}

impl Witness {
    pub fn model(&self, template: &ProblemTemplate) -> Result<LhvModel> {
        template.expand(&self.orbit_weights)
    }

    pub fn class_weights(&self, template: &ProblemTemplate) -> BTreeMap<InstructionClass, Rational> {
        let mut out = BTreeMap::new();
        for (c, w) in &self.orbit_weights {
            *out.entry(template.columns[*c].class).or_insert_with(Rational::zero) += w;
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum Feasibility {
    Feasible(Witness),
    Infeasible { violation: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible { .. } => None,
        }
    }
}

/// Minimizes the weighted L1 violation of the constraints over the simplex
/// of orbit weights at fixed V; feasible iff the minimum is at most `tol`
/// (exactly zero on the exact path).
pub fn solve_feasibility(problem: &FeasibilityProblem<'_>, arithmetic: Arithmetic) -> Result<Feasibility> {
    let Visibility::Fixed(v) = &problem.v else {
        return Err(Error::Solver("solve_feasibility needs a fixed visibility; use v_max".into()));
    };
    match arithmetic {
        Arithmetic::Exact => l1_feasibility::<Rational>(problem, v, 0.0),
        Arithmetic::Float { tol } => l1_feasibility::<f64>(problem, v, tol),
    }
}

fn l1_feasibility<T>(problem: &FeasibilityProblem<'_>, v: &Rational, tol: f64) -> Result<Feasibility>
where
    T: LpNum + num_traits::Num + Signed,
{
    let template = problem.template;
    let vars = problem.variables();
    let index_of: HashMap<usize, usize> = vars.iter().enumerate().map(|(j, &c)| (c, j)).collect();
    let rhs = problem.fixed_rhs::<T>(v);
    let mut rows: Vec<(Vec<(usize, T)>, T, T)> = template
        .rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let coeffs = row
                .coeffs
                .iter()
                .filter_map(|(c, a)| index_of.get(c).map(|&j| (j, convert::<T>(a))))
                .collect();
            (coeffs, b, convert::<T>(&row.weight))
        })
        .collect();
    for (coeffs, b) in problem.class_rows::<T>(&index_of) {
        rows.push((coeffs, b, T::one()));
    }
    let nw = vars.len();
    let m = rows.len();
    // columns: weights, then s+ and s- per row
    let mut lp = LinearProgram::<T>::new(nw + 2 * m);
    for (j, (mut coeffs, b, weight)) in rows.into_iter().enumerate() {
        coeffs.push((nw + j, T::one()));
        coeffs.push((nw + m + j, -T::one()));
        lp.cost[nw + j] = weight.clone();
        lp.cost[nw + m + j] = weight;
        lp.add_row(coeffs, b);
    }
    let (x, objective) = match lp.solve()? {
        LpOutcome::Optimal { x, objective } => (x, objective),
        other => return Err(Error::Solver(format!("L1 phase returned {other:?}"))),
    };
    let violation = objective.to_f64();
    let feasible = if tol == 0.0 {
        objective.is_zero()
    } else {
        violation <= tol
    };
    debug!(
        "feasibility n={} eta={} v={}: violation={violation:e}",
        template.n,
        crate::exact::to_f64(&problem.eta),
        crate::exact::to_f64(v)
    );
    if !feasible {
        return Ok(Feasibility::Infeasible { violation });
    }
    let orbit_weights = vars
        .iter()
        .enumerate()
        .filter(|(j, _)| x[*j].positive())
        .map(|(j, &c)| (c, x[j].to_rational()))
        .collect();
    Ok(Feasibility::Feasible(Witness {
        orbit_weights,
        v: v.clone(),
        violation,
    }))
}

/// Equality-constrained LP over orbit weights and (optionally) V with a given objective.
fn equality_lp<T>(
    problem: &FeasibilityProblem<'_>,
    objective: impl Fn(usize) -> T,
    maximize_v: bool,
) -> Result<Option<(Vec<(usize, Rational)>, Rational)>>
where
    T: LpNum + num_traits::Num + Signed,
{
    let template = problem.template;
    let vars = problem.variables();
    let index_of: HashMap<usize, usize> = vars.iter().enumerate().map(|(j, &c)| (c, j)).collect();
    let nw = vars.len();
    let eta: T = convert(&problem.eta);
    let affine = template.rhs_affine(&eta);
    let fixed_v: Option<T> = match &problem.v {
        Visibility::Fixed(v) => Some(convert(v)),
        Visibility::Free => None,
    };
    // columns: weights, [v, slack for v ≤ 1]
    let extra = if fixed_v.is_none() { 2 } else { 0 };
    let mut lp = LinearProgram::<T>::new(nw + extra);
    for (row, (t0, t1)) in template.rows.iter().zip(affine) {
        let mut coeffs: Vec<(usize, T)> = row
            .coeffs
            .iter()
            .filter_map(|(c, a)| index_of.get(c).map(|&j| (j, convert::<T>(a))))
            .collect();
        let rhs = match &fixed_v {
            Some(v) => t0 + v.clone() * t1,
            None => {
                if !t1.is_zero() {
                    coeffs.push((nw, -t1));
                }
                t0
            }
        };
        lp.add_row(coeffs, rhs);
    }
    for (coeffs, b) in problem.class_rows::<T>(&index_of) {
        lp.add_row(coeffs, b);
    }
    if fixed_v.is_none() {
        lp.add_row(vec![(nw, T::one()), (nw + 1, T::one())], T::one());
        if maximize_v {
            lp.cost[nw] = -T::one();
        }
    }
    for j in 0..nw {
        lp.cost[j] = objective(vars[j]);
    }
    match lp.solve()? {
        LpOutcome::Optimal { x, .. } => {
            let weights = vars
                .iter()
                .enumerate()
                .filter(|(j, _)| x[*j].positive())
                .map(|(j, &c)| (c, x[j].to_rational()))
                .collect();
            let v = match &problem.v {
                Visibility::Fixed(v) => v.clone(),
                Visibility::Free => x[nw].to_rational(),
            };
            Ok(Some((weights, v)))
        }
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded => Err(Error::Solver("bounded LP reported unbounded".into())),
    }
}

#[derive(Clone, Debug)]
pub struct TradeoffPoint {
    pub n: usize,
    pub mode: Mode,
    pub eta: Rational,
    pub v_max: Rational,
    pub witness: Witness,
}

impl TradeoffPoint {
    pub fn v_max_f64(&self) -> f64 {
        crate::exact::to_f64(&self.v_max)
    }
}

/// Largest V for which some LHV model reproduces the constraints at `eta`.
pub fn v_max(template: &ProblemTemplate, eta: Rational, arithmetic: Arithmetic) -> Result<TradeoffPoint> {
    let problem = build_problem(template, eta.clone(), Visibility::Free);
    let found = match arithmetic {
        Arithmetic::Exact => equality_lp::<Rational>(&problem, |_| Rational::zero(), true)?,
        Arithmetic::Float { .. } => equality_lp::<f64>(&problem, |_| 0.0, true)?,
    };
    let (weights, v) = found.ok_or_else(|| {
        Error::Solver(format!(
            "no LHV model even at V = 0 for eta = {}",
            format_rational(&eta)
        ))
    })?;
    Ok(TradeoffPoint {
        n: template.n,
        mode: template.mode,
        eta,
        v_max: v.clone(),
        witness: Witness {
            orbit_weights: weights,
            v,
            violation: 0.0,
        },
    })
}

/// `v_max` at each grid point (points run concurrently under `exec`).
pub fn tradeoff_curve(
    template: &ProblemTemplate,
    eta_grid: &[Rational],
    arithmetic: Arithmetic,
    exec: Execution,
) -> Result<Vec<TradeoffPoint>> {
    for eta in eta_grid {
        if *eta < rat(1, 2) || *eta > Rational::one() {
            return Err(Error::OutOfUnitInterval {
                name: "eta grid point (want [1/2, 1])",
                value: format_rational(eta),
            });
        }
    }
    exec.map(eta_grid.len(), |i| v_max(template, eta_grid[i].clone(), arithmetic))
        .into_iter()
        .collect()
}

#[derive(Clone, Debug)]
pub struct ThresholdResult {
    pub n: usize,
    pub mode: Mode,
    pub v: Rational,
    /// Largest efficiency certified feasible.
    pub eta_low: f64,
    /// Smallest efficiency found infeasible; `None` if η = 1 is feasible.
    pub eta_high: Option<f64>,
    pub witness: Witness,
    /// Exact-arithmetic verdict at η = n/(2n-2), probed when V = 1.
    pub exact_boundary_feasible: Option<bool>,
    /// Largest per-entry deviation of the witness statistics from the target
    /// (full table) at `(eta_low, v)`.
    pub max_deviation: f64,
    pub iterations: usize,
}

impl ThresholdResult {
    pub fn gap(&self) -> Option<f64> {
        self.eta_high.map(|h| h - self.eta_low)
    }
}

#[derive(Clone, Debug)]
pub struct ThresholdOptions {
    pub tol_eta: f64,
    pub arithmetic: Arithmetic,
    pub exact_probe: bool,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            tol_eta: DEFAULT_ETA_TOL,
            arithmetic: Arithmetic::default(),
            exact_probe: true,
        }
    }
}

fn feasible_at(template: &ProblemTemplate, eta: f64, v: &Rational, arithmetic: Arithmetic) -> Result<Feasibility> {
    let problem = build_problem(template, from_f64(eta)?, Visibility::Fixed(v.clone()));
    solve_feasibility(&problem, arithmetic)
}

/// Bisection on η over `[1/2, 1]`.
///
/// Sound because feasibility is downward closed in η: a model can be made to
/// lose each click independently with probability `1 - η'/η`.
pub fn eta_threshold(template: &ProblemTemplate, v: Rational, options: &ThresholdOptions) -> Result<ThresholdResult> {
    let arithmetic = options.arithmetic;
    let mut lo = 0.5f64;
    let mut hi = 1.0f64;
    let low_arithmetic = if options.exact_probe { Arithmetic::Exact } else { arithmetic };
    let mut witness = match feasible_at(template, lo, &v, low_arithmetic)? {
        Feasibility::Feasible(w) => w,
        Feasibility::Infeasible { violation } => {
            return Err(Error::Solver(format!(
                "eta = 1/2 is infeasible (violation {violation:e})"
            )))
        }
    };
    let mut eta_high = None;
    let mut iterations = 0;
    match feasible_at(template, hi, &v, arithmetic)? {
        Feasibility::Feasible(w) => {
            lo = hi;
            witness = w;
        }
        Feasibility::Infeasible { .. } => {
            eta_high = Some(hi);
            while hi - lo > options.tol_eta {
                let mid = 0.5 * (lo + hi);
                iterations += 1;
                match feasible_at(template, mid, &v, arithmetic)? {
                    Feasibility::Feasible(w) => {
                        lo = mid;
                        witness = w;
                    }
                    Feasibility::Infeasible { .. } => hi = mid,
                }
                info!("bisection n={} step {iterations}: [{lo:.9}, {hi:.9}]", template.n);
            }
            eta_high = eta_high.map(|_| hi);
        }
    }
    let exact_boundary_feasible = if options.exact_probe && v == Rational::one() {
        let problem = build_problem(template, eta_crit(template.n), Visibility::Fixed(v.clone()));
        Some(solve_feasibility(&problem, Arithmetic::Exact)?.is_feasible())
    } else {
        None
    };
    let model = witness.model(template)?;
    let max_deviation = deviation_from_target(&model, &from_f64(lo)?, &v)?;
    Ok(ThresholdResult {
        n: template.n,
        mode: template.mode,
        v,
        eta_low: lo,
        eta_high,
        witness,
        exact_boundary_feasible,
        max_deviation,
        iterations,
    })
}

/// Max over all cells of `|P_model(o|s) - P_target(o|s)|`.
pub fn deviation_from_target(model: &LhvModel, eta: &Rational, v: &Rational) -> Result<f64> {
    let target = target_table(&ScenarioParams::new(model.n, eta.clone(), v.clone())?)?.to_f64();
    Ok(model.model_statistics_f64().max_abs_diff(&target))
}

/// Distinct feasible vertices obtained by minimizing random linear objectives.
pub fn distinct_witnesses(
    template: &ProblemTemplate,
    eta: Rational,
    v: Rational,
    attempts: usize,
    seed: u64,
) -> Result<Vec<Vec<(usize, Rational)>>> {
    use rand::{Rng, SeedableRng};
    let problem = build_problem(template, eta, Visibility::Fixed(v));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<Vec<(usize, Rational)>> = Vec::new();
    for _ in 0..attempts {
        let costs: Vec<f64> = (0..template.columns.len()).map(|_| rng.random::<f64>()).collect();
        if let Some((w, _)) = equality_lp::<f64>(&problem, |c| costs[c], false)? {
            let support: Vec<usize> = w.iter().map(|(c, _)| *c).collect();
            if !found
                .iter()
                .any(|f| f.iter().map(|(c, _)| *c).collect::<Vec<_>>() == support)
            {
                found.push(w);
            }
        }
    }
    Ok(found)
}

/// Statistics of a symmetric model given by orbit weights, computed on the
/// quotient (one value per entry orbit).
pub fn orbit_statistics(template: &ProblemTemplate, witness: &Witness) -> Vec<Rational> {
    template
        .rows
        .iter()
        .take(template.rows.len() - 1)
        .map(|row| {
            row.coeffs
                .iter()
                .map(|(c, a)| {
                    witness
                        .orbit_weights
                        .iter()
                        .find(|(wc, _)| wc == c)
                        .map_or_else(Rational::zero, |(_, w)| a * w)
                })
                .sum()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThresholdJson {
    pub n: usize,
    pub mode: Mode,
    pub v: String,
    pub eta_low: f64,
    pub eta_high: Option<f64>,
    pub gap: Option<f64>,
    pub eta_crit: String,
    pub exact_boundary_feasible: Option<bool>,
    pub max_deviation: f64,
    pub iterations: usize,
    pub class_weights: Vec<crate::strategy::ClassSummary>,
    pub certified_model: LhvModelJson,
}

impl ThresholdResult {
    pub fn to_json(&self, template: &ProblemTemplate) -> Result<ThresholdJson> {
        let model = self.witness.model(template)?;
        Ok(ThresholdJson {
            n: self.n,
            mode: self.mode,
            v: format_rational(&self.v),
            eta_low: self.eta_low,
            eta_high: self.eta_high,
            gap: self.gap(),
            eta_crit: format_rational(&eta_crit(self.n)),
            exact_boundary_feasible: self.exact_boundary_feasible,
            max_deviation: self.max_deviation,
            iterations: self.iterations,
            class_weights: model.class_weights().summaries(),
            certified_model: model.to_json(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TradeoffJson {
    pub n: usize,
    pub mode: Mode,
    pub eta: String,
    pub eta_f64: f64,
    pub v_max: String,
    pub v_max_f64: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<LhvModelJson>,
}

impl TradeoffPoint {
    pub fn to_json(&self, template: &ProblemTemplate, with_model: bool) -> Result<TradeoffJson> {
        Ok(TradeoffJson {
            n: self.n,
            mode: self.mode,
            eta: format_rational(&self.eta),
            eta_f64: crate::exact::to_f64(&self.eta),
            v_max: format_rational(&self.v_max),
            v_max_f64: self.v_max_f64(),
            model: if with_model {
                Some(self.witness.model(template)?.to_json())
            } else {
                None
            },
        })
    }
}

/// `n,eta,v_max` rows with 12 significant digits.
pub fn curve_csv(points: &[TradeoffPoint]) -> String {
    let mut out = String::from("n,eta,v_max\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            p.n,
            sig12(crate::exact::to_f64(&p.eta)),
            sig12(p.v_max_f64())
        ));
    }
    out
}

/// Decimal with 12 significant digits, trailing zeros trimmed.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let digits = 11 - x.abs().log10().floor() as i32;
    let s = format!("{:.*}", digits.max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Exact table of a symmetric model, for tests against the quotient.
pub fn model_table(template: &ProblemTemplate, witness: &Witness) -> Result<StatTable<Rational>> {
    Ok(witness.model(template)?.model_statistics())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_formatting() {
        assert_eq!(sig12(0.5), "0.5");
        assert_eq!(sig12(0.353_553_390_593_273_8), "0.353553390593");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.75), "0.75");
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("full".parse::<Mode>().unwrap(), Mode::Full);
        assert_eq!("paper".parse::<Mode>().unwrap(), Mode::PaperConditions);
        assert!("other".parse::<Mode>().is_err());
    }

    #[test]
    fn n3_template_sizes() {
        let t = ProblemTemplate::new(3, Mode::Full).unwrap();
        assert_eq!(t.group.order, 48);
        assert_eq!(t.columns.iter().map(|c| c.size).sum::<u64>(), 729);
        assert_eq!(t.rows.len(), t.entry_reps.len() + 1);
    }

    #[test]
    fn zero_efficiency_is_feasible_with_no_clicks_only() {
        let t = ProblemTemplate::new(3, Mode::Full).unwrap();
        let p = build_problem(&t, int(0), Visibility::Fixed(rat(1, 3)));
        let f = solve_feasibility(&p, Arithmetic::Exact).unwrap();
        let w = f.witness().unwrap();
        assert_eq!(w.orbit_weights.len(), 1);
        assert_eq!(t.columns[w.orbit_weights[0].0].rep, GlobalStrategy(0));
    }

    #[test]
    fn n3_boundary() {
        let t = ProblemTemplate::new(3, Mode::Full).unwrap();
        let at = build_problem(&t, rat(3, 4), Visibility::Fixed(int(1)));
        assert!(solve_feasibility(&at, Arithmetic::Exact).unwrap().is_feasible());
        let above = build_problem(&t, rat(76, 100), Visibility::Fixed(int(1)));
        assert!(!solve_feasibility(&above, Arithmetic::default()).unwrap().is_feasible());
    }
}
