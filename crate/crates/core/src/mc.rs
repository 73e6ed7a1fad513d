//! Shot-by-shot simulation of the experiment from the quantum target or an
//! LHV model, and comparison of empirical counts with exact tables.
//!
//! Shots are split into fixed chunks; chunk `c` draws from ChaCha8 seeded with
//! `seed` on stream `c`, so the counts do not depend on the worker count.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, rat, to_f64};
use crate::exec::Execution;
use crate::scenario::{check_table_n, pow3, Outcome, Setting};
use crate::stabilizer::MerminSpec;
use crate::strategy::{GlobalStrategy, LhvModel};
use crate::target::{target_table, ExactTable, OutcomeJson, RowJson, ScenarioParams};

pub const CHUNK_SHOTS: u64 = 1 << 16;
pub const MIN_MERMIN_EVENTS: u64 = 100;
pub const Z_PASS: f64 = 5.0;

#[derive(Clone, Debug)]
pub enum Source {
    Quantum(ScenarioParams),
    Lhv(LhvModel),
}

impl Source {
    pub fn n(&self) -> usize {
        match self {
            Source::Quantum(p) => p.n,
            Source::Lhv(m) => m.n,
        }
    }

    /// Exact table the source samples from.
    pub fn exact_table(&self) -> Result<ExactTable> {
        match self {
            Source::Quantum(p) => target_table(p),
            Source::Lhv(m) => Ok(m.model_statistics()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: Source,
    pub shots: u64,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(source: Source, shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Parse("shots must be positive".into()));
        }
        check_table_n(source.n())?;
        Ok(Self { source, shots, seed })
    }
}

enum Sampler {
    Rows(Vec<WeightedIndex<f64>>),
    Strategies(Vec<GlobalStrategy>, WeightedIndex<f64>),
}

impl Sampler {
    fn new(source: &Source) -> Result<Self> {
        let bad = |e: rand::distr::weighted::Error| Error::BadWeights(e.to_string());
        match source {
            Source::Quantum(p) => {
                let table = target_table(p)?;
                let rows = Setting::all(p.n)
                    .map(|s| WeightedIndex::new(table.row(s).iter().map(to_f64)).map_err(bad))
                    .collect::<Result<_>>()?;
                Ok(Sampler::Rows(rows))
            }
            Source::Lhv(m) => {
                let strategies: Vec<GlobalStrategy> = m.weights.keys().copied().collect();
                let index = WeightedIndex::new(m.weights.values().map(to_f64)).map_err(bad)?;
                Ok(Sampler::Strategies(strategies, index))
            }
        }
    }

    fn outcome<R: Rng>(&self, setting: Setting, rng: &mut R) -> usize {
        match self {
            Sampler::Rows(rows) => rows[setting.index()].sample(rng),
            Sampler::Strategies(strategies, index) => strategies[index.sample(rng)].answer(setting).index(),
        }
    }
}

/// Counts per `(setting, outcome)`, setting-major like [`crate::target::StatTable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalTable {
    pub n: usize,
    pub shots: u64,
    pub counts: Vec<u64>,
}

pub fn run(config: &RunConfig) -> Result<EmpiricalTable> {
    run_with(config, Execution::default())
}

pub fn run_with(config: &RunConfig, exec: Execution) -> Result<EmpiricalTable> {
    let n = config.source.n();
    let sampler = Sampler::new(&config.source)?;
    let cells = (1usize << n) * pow3(n);
    let width = pow3(n);
    let chunks = config.shots.div_ceil(CHUNK_SHOTS) as usize;
    let counts = exec.map_reduce(
        chunks,
        || vec![0u64; cells],
        |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(c as u64);
            let start = c as u64 * CHUNK_SHOTS;
            let len = CHUNK_SHOTS.min(config.shots - start);
            let mut counts = vec![0u64; cells];
            for _ in 0..len {
                let setting = Setting::new(n, rng.random_range(0..1u32 << n));
                let o = sampler.outcome(setting, &mut rng);
                counts[setting.index() * width + o] += 1;
            }
            counts
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    );
    Ok(EmpiricalTable {
        n,
        shots: config.shots,
        counts,
    })
}

impl EmpiricalTable {
    fn width(&self) -> usize {
        pow3(self.n)
    }

    pub fn count(&self, setting: Setting, outcome: Outcome) -> u64 {
        self.counts[setting.index() * self.width() + outcome.index()]
    }

    pub fn setting_count(&self, setting: Setting) -> u64 {
        let w = self.width();
        self.counts[setting.index() * w..(setting.index() + 1) * w].iter().sum()
    }

    /// Empirical `P(o | s)`; zero for a setting never drawn.
    pub fn frequency(&self, setting: Setting, outcome: Outcome) -> f64 {
        let total = self.setting_count(setting);
        if total == 0 {
            0.0
        } else {
            self.count(setting, outcome) as f64 / total as f64
        }
    }

    /// Binomial standard error of [`EmpiricalTable::frequency`].
    pub fn stderr(&self, setting: Setting, outcome: Outcome) -> f64 {
        let total = self.setting_count(setting);
        if total == 0 {
            return 0.0;
        }
        let p = self.frequency(setting, outcome);
        (p * (1.0 - p) / total as f64).sqrt()
    }

    /// Empirical click rate of `particle` over all shots.
    pub fn click_rate(&self, particle: usize) -> f64 {
        let clicked: u64 = Setting::all(self.n)
            .flat_map(|s| Outcome::all(self.n).map(move |o| (s, o)))
            .filter(|(_, o)| o.click(particle).is_click())
            .map(|(s, o)| self.count(s, o))
            .sum();
        clicked as f64 / self.shots as f64
    }

    pub fn to_json(&self) -> EmpiricalJson {
        let rows = Setting::all(self.n)
            .map(|s| {
                let total = self.setting_count(s);
                let cells: Vec<Outcome> = Outcome::all(self.n).filter(|&o| self.count(s, o) > 0).collect();
                let outcomes = cells
                    .iter()
                    .map(|&o| OutcomeJson {
                        o: o.to_string(),
                        p: format_rational(&rat(self.count(s, o) as i64, total as i64)),
                    })
                    .collect();
                let counts = cells
                    .iter()
                    .map(|&o| CountJson {
                        o: o.to_string(),
                        count: self.count(s, o),
                    })
                    .collect();
                (
                    RowJson {
                        setting: s.to_string(),
                        outcomes,
                    },
                    CountRowJson {
                        setting: s.to_string(),
                        total,
                        outcomes: counts,
                    },
                )
            })
            .unzip();
        EmpiricalJson {
            n: self.n,
            shots: self.shots,
            rows: rows.0,
            counts: rows.1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountJson {
    pub o: String,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountRowJson {
    pub setting: String,
    pub total: u64,
    pub outcomes: Vec<CountJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmpiricalJson {
    pub n: usize,
    pub shots: u64,
    pub rows: Vec<RowJson>,
    pub counts: Vec<CountRowJson>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// `|value - reference| ≤ k · stderr`, with slack for an exact zero stderr.
    pub fn within(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.stderr + 1e-12
    }
}

/// `Σ sign · E[Π o | σ, all click]` with standard error from independent terms.
pub fn empirical_mermin(table: &EmpiricalTable, spec: &MerminSpec) -> Result<Estimate> {
    if table.n != spec.n {
        return Err(Error::Mismatch(table.n, spec.n));
    }
    let n = table.n;
    let full = (1u32 << n) - 1;
    let mut value = 0.0;
    let mut variance = 0.0;
    for term in &spec.terms {
        let s = term.setting();
        let (mut plus, mut minus) = (0u64, 0u64);
        for o in Outcome::all(n).filter(|o| o.detected() == full) {
            if o.product_over(full) > 0 {
                plus += table.count(s, o);
            } else {
                minus += table.count(s, o);
            }
        }
        let events = plus + minus;
        if events < MIN_MERMIN_EVENTS {
            return Err(Error::InsufficientStatistics {
                term: term.word(),
                events,
                needed: MIN_MERMIN_EVENTS,
            });
        }
        let e = (plus as f64 - minus as f64) / events as f64;
        value += f64::from(term.sign) * e;
        variance += (1.0 - e * e) / events as f64;
    }
    Ok(Estimate {
        value,
        stderr: variance.sqrt(),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellZ {
    pub setting: String,
    pub o: String,
    pub count: u64,
    pub expected: f64,
    /// `None` for an event the exact table forbids (or forces) but which was
    /// contradicted by the counts.
    pub z: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompareReport {
    pub n: usize,
    pub shots: u64,
    pub max_abs_z: Option<f64>,
    pub impossible_events: usize,
    pub pass: bool,
    pub cells: Vec<CellZ>,
}

/// z-scores of the counts conditional on each setting's count; passes iff
/// every cell has `|z| ≤ 5`.
pub fn compare(empirical: &EmpiricalTable, exact: &ExactTable) -> Result<CompareReport> {
    if empirical.n != exact.n {
        return Err(Error::Mismatch(empirical.n, exact.n));
    }
    let n = exact.n;
    let mut cells = Vec::new();
    let mut max_abs_z = 0.0f64;
    let mut impossible = 0;
    for s in Setting::all(n) {
        let total = empirical.setting_count(s) as f64;
        for o in Outcome::all(n) {
            let p = to_f64(exact.get(s, o));
            let count = empirical.count(s, o);
            if p == 0.0 && count == 0 {
                continue;
            }
            let expected = total * p;
            let var = total * p * (1.0 - p);
            let z = if var > 0.0 {
                Some((count as f64 - expected) / var.sqrt())
            } else if (count as f64 - expected).abs() < 0.5 {
                Some(0.0)
            } else {
                None
            };
            match z {
                Some(z) => max_abs_z = max_abs_z.max(z.abs()),
                None => impossible += 1,
            }
            cells.push(CellZ {
                setting: s.to_string(),
                o: o.to_string(),
                count,
                expected,
                z,
            });
        }
    }
    let pass = impossible == 0 && max_abs_z <= Z_PASS;
    Ok(CompareReport {
        n,
        shots: empirical.shots,
        max_abs_z: if impossible == 0 { Some(max_abs_z) } else { None },
        impossible_events: impossible,
        pass,
        cells,
    })
}
