//! Verified symmetries of a statistics table, and orbits of strategies and
//! table cells under them.
//!
//! A [`Transform`] relabels particles, optionally exchanges X and Z on every
//! particle, and flips the ±1 outcomes of selected (particle, observable)
//! pairs. Candidates are admitted only after an exact comparison of the
//! table with its image.

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::scenario::{pow3, Observable, Outcome, Setting};
use crate::strategy::{pow9, GlobalStrategy, LocalStrategy};
use crate::target::StatTable;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transform {
    /// Particle `i` moves to position `perm[i]`.
    pub perm: Vec<usize>,
    /// Particles whose X outcome is negated (indexed before permuting).
    pub flip_x: u32,
    /// Particles whose Z outcome is negated (indexed before permuting).
    pub flip_z: u32,
    /// Exchange X and Z on every particle.
    pub swap: bool,
}

impl Transform {
    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            flip_x: 0,
            flip_z: 0,
            swap: false,
        }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut t = Self::identity(n);
        t.perm.swap(a, b);
        t
    }

    pub fn flips(n: usize, flip_x: u32, flip_z: u32) -> Self {
        Self {
            flip_x,
            flip_z,
            ..Self::identity(n)
        }
    }

    fn flips_outcome(&self, particle: usize, obs: Observable) -> bool {
        let mask = match obs {
            Observable::X => self.flip_x,
            Observable::Z => self.flip_z,
        };
        mask >> particle & 1 == 1
    }

    pub fn apply_entry(&self, setting: Setting, outcome: Outcome) -> (Setting, Outcome) {
        let n = self.n();
        let mut x_mask = 0u32;
        let mut clicks = vec![crate::scenario::Click::NoClick; n];
        for i in 0..n {
            let obs = setting.observable(i);
            let new_obs = if self.swap { obs.other() } else { obs };
            let mut c = outcome.click(i);
            if self.flips_outcome(i, obs) {
                c = c.flipped();
            }
            let p = self.perm[i];
            if new_obs == Observable::X {
                x_mask |= 1 << p;
            }
            clicks[p] = c;
        }
        (Setting::new(n, x_mask), Outcome::from_clicks(&clicks))
    }

    /// Image strategy, defined so that `(τg)(τs) = τ(g(s))`.
    pub fn apply_strategy(&self, g: GlobalStrategy) -> GlobalStrategy {
        let n = self.n();
        let mut locals = vec![LocalStrategy::from_code(0); n];
        for i in 0..n {
            let l = g.local(i);
            let fx = if self.flips_outcome(i, Observable::X) {
                l.answer_x.flipped()
            } else {
                l.answer_x
            };
            let fz = if self.flips_outcome(i, Observable::Z) {
                l.answer_z.flipped()
            } else {
                l.answer_z
            };
            locals[self.perm[i]] = if self.swap {
                LocalStrategy::new(fz, fx)
            } else {
                LocalStrategy::new(fx, fz)
            };
        }
        GlobalStrategy::from_locals(&locals)
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &Transform) -> Transform {
        let n = self.n();
        let mut perm = vec![0; n];
        let mut flip_x = self.flip_x;
        let mut flip_z = self.flip_z;
        for i in 0..n {
            let p = self.perm[i];
            perm[i] = other.perm[p];
            // the observable particle i reaches `other` with, in self's output frame
            let (after_x, after_z) = if self.swap {
                (Observable::Z, Observable::X)
            } else {
                (Observable::X, Observable::Z)
            };
            if other.flips_outcome(p, after_x) {
                flip_x ^= 1 << i;
            }
            if other.flips_outcome(p, after_z) {
                flip_z ^= 1 << i;
            }
        }
        Transform {
            perm,
            flip_x,
            flip_z,
            swap: self.swap ^ other.swap,
        }
    }

    /// True iff the table equals its image under this transform, entry by entry.
    pub fn preserves<T: PartialEq + Clone>(&self, table: &StatTable<T>) -> bool {
        let n = table.n;
        Setting::all(n).all(|s| {
            Outcome::all(n).all(|o| {
                let (s2, o2) = self.apply_entry(s, o);
                table.get(s, o) == table.get(s2, o2)
            })
        })
    }
}

/// A group given by admitted generators.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    pub n: usize,
    pub generators: Vec<Transform>,
    pub order: u128,
    pub flip_rank: u32,
    pub has_swap: bool,
}

impl SymmetryGroup {
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            generators: Vec::new(),
            order: 1,
            flip_rank: 0,
            has_swap: false,
        }
    }

    /// Every element, by closure under the generators. Intended for small `n`.
    pub fn elements(&self) -> Vec<Transform> {
        let id = Transform::identity(self.n);
        let mut seen: HashSet<Transform> = HashSet::from([id.clone()]);
        let mut queue = VecDeque::from([id]);
        while let Some(t) = queue.pop_front() {
            for g in &self.generators {
                let next = t.then(g);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        seen.into_iter().collect()
    }
}

/// Incremental GF(2) basis for flip patterns encoded as `flip_x | flip_z << n`.
#[derive(Default)]
struct Gf2Basis {
    rows: Vec<u64>,
}

impl Gf2Basis {
    fn reduce(&self, mut v: u64) -> u64 {
        for &r in &self.rows {
            v = v.min(v ^ r);
        }
        v
    }

    fn insert(&mut self, v: u64) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        self.rows.push(r);
        self.rows.sort_unstable_by(|a, b| b.cmp(a));
        true
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Largest group of candidate transforms preserving `table`.
///
/// Candidates: adjacent transpositions (which must all pass), every
/// outcome-flip pattern, and every flip pattern combined with the X↔Z swap.
pub fn symmetry_group<T: PartialEq + Clone + Sync>(table: &StatTable<T>) -> Result<SymmetryGroup> {
    symmetry_group_with(table, Execution::default())
}

pub fn symmetry_group_with<T: PartialEq + Clone + Sync>(
    table: &StatTable<T>,
    exec: Execution,
) -> Result<SymmetryGroup> {
    let n = table.n;
    let mut generators = Vec::new();
    for a in 0..n.saturating_sub(1) {
        let t = Transform::transposition(n, a, a + 1);
        if !t.preserves(table) {
            return Err(Error::PermutationNotSymmetry(t.perm));
        }
        generators.push(t);
    }
    let patterns = 1usize << (2 * n);
    let unpack = |p: usize| ((p & ((1 << n) - 1)) as u32, (p >> n) as u32);

    let flips: Vec<bool> = exec.map(patterns, |p| {
        let (fx, fz) = unpack(p);
        Transform::flips(n, fx, fz).preserves(table)
    });
    let mut basis = Gf2Basis::default();
    for p in (1..patterns).filter(|&p| flips[p]) {
        if basis.insert(p as u64) {
            let (fx, fz) = unpack(p);
            generators.push(Transform::flips(n, fx, fz));
        }
    }
    let flip_rank = basis.rows.len() as u32;

    let swapped: Vec<bool> = exec.map(patterns, |p| {
        let (fx, fz) = unpack(p);
        Transform {
            swap: true,
            ..Transform::flips(n, fx, fz)
        }
        .preserves(table)
    });
    let has_swap = match swapped.iter().position(|&ok| ok) {
        Some(p) => {
            let (fx, fz) = unpack(p);
            generators.push(Transform {
                swap: true,
                ..Transform::flips(n, fx, fz)
            });
            true
        }
        None => false,
    };
    let order = factorial(n) << flip_rank << (has_swap as u32);
    Ok(SymmetryGroup {
        n,
        generators,
        order,
        flip_rank,
        has_swap,
    })
}

/// Partition of `0..size` into orbits.
#[derive(Clone, Debug)]
pub struct Orbits {
    pub orbit_of: Vec<u32>,
    /// Smallest element of each orbit, in increasing order.
    pub reps: Vec<u64>,
    pub sizes: Vec<u64>,
}

impl Orbits {
    pub fn compute<F>(size: usize, images: F) -> Self
    where
        F: Fn(usize, &mut Vec<usize>),
    {
        let mut orbit_of = vec![u32::MAX; size];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        let mut buf = Vec::new();
        for start in 0..size {
            if orbit_of[start] != u32::MAX {
                continue;
            }
            let id = reps.len() as u32;
            orbit_of[start] = id;
            stack.push(start);
            let mut count = 0u64;
            while let Some(x) = stack.pop() {
                count += 1;
                buf.clear();
                images(x, &mut buf);
                for &y in &buf {
                    if orbit_of[y] == u32::MAX {
                        orbit_of[y] = id;
                        stack.push(y);
                    }
                }
            }
            reps.push(start as u64);
            sizes.push(count);
        }
        Self {
            orbit_of,
            reps,
            sizes,
        }
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Members of every orbit, grouped.
    pub fn members(&self) -> Vec<Vec<u64>> {
        let mut out: Vec<Vec<u64>> = self
            .sizes
            .iter()
            .map(|&s| Vec::with_capacity(s as usize))
            .collect();
        for (x, &o) in self.orbit_of.iter().enumerate() {
            out[o as usize].push(x as u64);
        }
        out
    }
}

pub fn strategy_orbits(group: &SymmetryGroup) -> Orbits {
    let n = group.n;
    Orbits::compute(pow9(n) as usize, |x, out| {
        for g in &group.generators {
            out.push(g.apply_strategy(GlobalStrategy(x as u64)).0 as usize);
        }
    })
}

/// Orbits of table cells, cell index `setting · 3^n + outcome`.
pub fn entry_orbits(group: &SymmetryGroup) -> Orbits {
    let n = group.n;
    let width = pow3(n);
    Orbits::compute((1 << n) * width, |x, out| {
        let s = Setting::new(n, (x / width) as u32);
        let o = Outcome::new(n, (x % width) as u32);
        for g in &group.generators {
            let (s2, o2) = g.apply_entry(s, o);
            out.push(s2.index() * width + o2.index());
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};
    use crate::target::{target_table, ScenarioParams};

    fn table(n: usize) -> crate::target::ExactTable {
        target_table(&ScenarioParams::new(n, rat(1, 3), int(1)).unwrap()).unwrap()
    }

    #[test]
    fn strategy_action_is_equivariant() {
        let n = 3;
        let t = Transform {
            perm: vec![2, 0, 1],
            flip_x: 0b101,
            flip_z: 0b010,
            swap: true,
        };
        for g in (0..pow9(n)).step_by(7).map(GlobalStrategy) {
            for s in Setting::all(n) {
                let (s2, o2) = t.apply_entry(s, g.answer(s));
                assert_eq!(t.apply_strategy(g).answer(s2), o2);
            }
        }
    }

    #[test]
    fn composition_matches_sequential_application() {
        let n = 3;
        let a = Transform {
            perm: vec![1, 2, 0],
            flip_x: 0b011,
            flip_z: 0b100,
            swap: true,
        };
        let b = Transform {
            perm: vec![0, 2, 1],
            flip_x: 0b110,
            flip_z: 0b001,
            swap: false,
        };
        let ab = a.then(&b);
        for s in Setting::all(n) {
            for o in Outcome::all(n) {
                let (s1, o1) = a.apply_entry(s, o);
                assert_eq!(ab.apply_entry(s, o), b.apply_entry(s1, o1));
            }
        }
    }

    #[test]
    fn n3_group() {
        let t = table(3);
        let g = symmetry_group(&t).unwrap();
        // all 6 permutations times 2^3 flips; no X/Z swap for odd n
        assert_eq!(g.order, 48);
        assert!(!g.has_swap);
        let elements = g.elements();
        assert_eq!(elements.len() as u128, g.order);
        assert!(elements.iter().all(|e| e.preserves(&t)));
        let perms: HashSet<Vec<usize>> = elements.iter().map(|e| e.perm.clone()).collect();
        assert_eq!(perms.len(), 6);
        assert!(Transform::identity(3).preserves(&t));
        let swap = Transform {
            swap: true,
            ..Transform::identity(3)
        };
        assert!(!swap.preserves(&t));
    }

    #[test]
    fn single_particle_flip_is_rejected() {
        let t = table(3);
        assert!(!Transform::flips(3, 0b001, 0b001).preserves(&t));
        assert!(Transform::flips(3, 0b011, 0b011).preserves(&t));
    }

    #[test]
    fn broken_table_is_detected() {
        let mut t = table(3);
        t.entries[1] = rat(1, 7);
        assert!(matches!(
            symmetry_group(&t),
            Err(Error::PermutationNotSymmetry(_))
        ));
    }

    #[test]
    fn orbit_sizes_sum_to_domain() {
        let g = symmetry_group(&table(3)).unwrap();
        let so = strategy_orbits(&g);
        assert_eq!(so.sizes.iter().sum::<u64>(), 729);
        assert!(so.sizes.iter().all(|&s| g.order % s as u128 == 0));
        let eo = entry_orbits(&g);
        assert_eq!(eo.sizes.iter().sum::<u64>(), 216);
        let trivial = strategy_orbits(&SymmetryGroup::trivial(3));
        assert_eq!(trivial.len(), 729);
    }
}
