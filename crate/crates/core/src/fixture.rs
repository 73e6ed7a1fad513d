//! Reference class weights of the explicit models at η = n/(2n-2), completed
//! to strategy-level models by a class-constrained feasibility LP.

use log::info;

use crate::error::{Error, Result};
use crate::exact::{int, rat, Rational};
use crate::solver::{build_problem, solve_feasibility, Arithmetic, Feasibility, Mode, ProblemTemplate, Visibility};
use crate::stabilizer::eta_crit;
use crate::strategy::{ClassWeights, InstructionClass, LhvModel};

/// Class weights `ρ_{k,l,m}` of the reference model for `n ∈ {3, 4, 5}`.
pub fn paper_class_weights(n: usize) -> Result<ClassWeights> {
    let c = InstructionClass::new;
    let pairs = match n {
        3 => vec![
            (c(2, 1, 0), rat(54, 64)),
            (c(1, 0, 2), rat(9, 64)),
            (c(0, 0, 3), rat(1, 64)),
        ],
        4 => vec![
            (c(2, 2, 0), rat(64, 81)),
            (c(2, 0, 2), rat(8, 81)),
            (c(1, 0, 3), rat(8, 81)),
            (c(0, 0, 4), rat(1, 81)),
        ],
        5 => {
            let d = 1 << 15;
            vec![
                (c(2, 3, 0), rat(25000, d)),
                (c(2, 1, 2), rat(3750, d)),
                (c(2, 0, 3), rat(1750, d)),
                (c(1, 0, 4), rat(2025, d)),
                (c(0, 0, 5), rat(243, d)),
            ]
        }
        _ => return Err(Error::NoFixture(n)),
    };
    Ok(ClassWeights::from_pairs(&pairs))
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub n: usize,
    pub eta: Rational,
    pub class_weights: ClassWeights,
    pub model: LhvModel,
}

/// Completes the reference class weights to a model reproducing the full
/// target table at `(n/(2n-2), 1)`, solved in exact arithmetic.
pub fn paper_fixture(n: usize) -> Result<Fixture> {
    let template = ProblemTemplate::new(n, Mode::Full)?;
    paper_fixture_with(&template)
}

pub fn paper_fixture_with(template: &ProblemTemplate) -> Result<Fixture> {
    let n = template.n;
    let class_weights = paper_class_weights(n)?;
    let eta = eta_crit(n);
    let pairs: Vec<(InstructionClass, Rational)> = class_weights
        .0
        .iter()
        .map(|(c, w)| (*c, w.clone()))
        .collect();
    let problem = build_problem(template, eta.clone(), Visibility::Fixed(int(1))).with_class_weights(&pairs);
    let witness = match solve_feasibility(&problem, Arithmetic::Exact)? {
        Feasibility::Feasible(w) => w,
        Feasibility::Infeasible { .. } => return Err(Error::FixtureInfeasible(n)),
    };
    let model = witness.model(template)?;
    info!(
        "fixture n={n}: {} orbits, {} strategies",
        witness.orbit_weights.len(),
        model.weights.len()
    );
    Ok(Fixture {
        n,
        eta,
        class_weights,
        model,
    })
}
