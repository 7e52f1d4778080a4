//! Forward simulation with explicit parent pointers: the whole genealogy is
//! kept, survivor marks are computed in one backward sweep, and the reduced
//! process, ancestor birth generation, and ancestor type are extracted from
//! the marks. Memory is O(total particles); meant for short horizons, raw
//! dumps, and as the reference the streaming engine is checked against.

use rand::RngCore;

use crate::sim::compiled::SimModel;

pub const NO_PARENT: u32 = u32::MAX;

/// Marker that a generation-cap or population-cap abort happened.
pub const DEFAULT_POPULATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Particle {
    pub ty: u8,
    /// Index into the previous generation; `NO_PARENT` for roots.
    pub parent: u32,
}

/// One simulated tree to the horizon (or to extinction), with survivor marks
/// and everything derived from them.
#[derive(Debug, Clone)]
pub struct GenealogyRun {
    pub horizon: u64,
    pub initial: Vec<u32>,
    pub generations: Vec<Vec<Particle>>,
    pub survivor_mark: Vec<Vec<bool>>,
    /// `reduced_counts[m][ty]`: particles of `ty` alive at `m` with
    /// descendants alive at the horizon. All-zero when the run dies early.
    pub reduced_counts: Vec<Vec<u32>>,
    /// Birth generation of the most recent common ancestor: the last
    /// `m <= horizon-1` at which the reduced population is one particle.
    pub beta: Option<u64>,
    /// 1-based type of that ancestor.
    pub zeta: Option<usize>,
    pub survived: bool,
    /// The run was aborted because the population cap was hit; all derived
    /// fields are unset.
    pub overflow: bool,
}

pub fn simulate_forward(
    model: &SimModel,
    horizon: u64,
    initial: &[u32],
    rng: &mut impl RngCore,
    population_cap: u64,
) -> GenealogyRun {
    let n_types = model.n_types();
    assert_eq!(initial.len(), n_types, "initial vector length");
    let mut generations: Vec<Vec<Particle>> = Vec::with_capacity(horizon as usize + 1);
    let mut gen0 = Vec::new();
    for (ty, &cnt) in initial.iter().enumerate() {
        for _ in 0..cnt {
            gen0.push(Particle {
                ty: ty as u8,
                parent: NO_PARENT,
            });
        }
    }
    let mut total_particles = gen0.len() as u64;
    generations.push(gen0);

    let mut overflow = false;
    for _ in 0..horizon {
        let current = generations.last().unwrap();
        if current.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for (p_idx, particle) in current.iter().enumerate() {
            let entry = model.table(particle.ty as usize).sample(rng.next_u64());
            for &child_ty in model.offspring(particle.ty as usize, entry) {
                next.push(Particle {
                    ty: child_ty,
                    parent: p_idx as u32,
                });
            }
        }
        total_particles += next.len() as u64;
        if total_particles > population_cap {
            overflow = true;
            break;
        }
        generations.push(next);
    }

    let mut run = GenealogyRun {
        horizon,
        initial: initial.to_vec(),
        generations,
        survivor_mark: Vec::new(),
        reduced_counts: vec![vec![0; n_types]; horizon as usize + 1],
        beta: None,
        zeta: None,
        survived: false,
        overflow,
    };
    if overflow {
        return run;
    }

    run.survivor_mark = run
        .generations
        .iter()
        .map(|g| vec![false; g.len()])
        .collect();
    let reached = run.generations.len() as u64 - 1;
    run.survived = reached == horizon && !run.generations[horizon as usize].is_empty();
    if run.survived {
        let h = horizon as usize;
        for mark in run.survivor_mark[h].iter_mut() {
            *mark = true;
        }
        for g in (0..h).rev() {
            // Split around g so marks of generation g+1 drive generation g.
            let (lower, upper) = run.survivor_mark.split_at_mut(g + 1);
            let parents = &mut lower[g];
            for (p_idx, particle) in run.generations[g + 1].iter().enumerate() {
                if upper[0][p_idx] {
                    parents[particle.parent as usize] = true;
                }
            }
        }
        for (g, marks) in run.survivor_mark.iter().enumerate() {
            for (p_idx, &marked) in marks.iter().enumerate() {
                if marked {
                    run.reduced_counts[g][run.generations[g][p_idx].ty as usize] += 1;
                }
            }
        }
        for m in (0..horizon as usize).rev() {
            let total: u32 = run.reduced_counts[m].iter().sum();
            if total == 1 {
                run.beta = Some(m as u64);
                let ty = run.reduced_counts[m]
                    .iter()
                    .position(|&c| c == 1)
                    .unwrap();
                run.zeta = Some(ty + 1);
                break;
            }
        }
    }
    debug_assert_eq!(run.check_invariants(), Ok(()));
    run
}

impl GenealogyRun {
    /// Population counts per type at generation `m` (alive, not reduced).
    pub fn counts_at(&self, m: u64) -> Vec<u32> {
        let n_types = self.reduced_counts[0].len();
        let mut counts = vec![0u32; n_types];
        if let Some(generation) = self.generations.get(m as usize) {
            for p in generation {
                counts[p.ty as usize] += 1;
            }
        }
        counts
    }

    /// Structural invariants of a completed (non-overflow) run.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.overflow {
            return Ok(());
        }
        let h = self.horizon as usize;
        if self.survived {
            // Z(n,n) = Z(n)
            let alive = self.counts_at(self.horizon);
            if self.reduced_counts[h] != alive {
                return Err("reduced counts at the horizon differ from the population".into());
            }
            if self.beta.is_none() || self.zeta.is_none() {
                return Err("surviving run lacks ancestor data".into());
            }
        } else if self.beta.is_some() || self.zeta.is_some() {
            return Err("extinct run carries ancestor data".into());
        }
        // Reduced totals never decrease with m.
        let mut prev = 0u32;
        for (m, row) in self.reduced_counts.iter().enumerate() {
            let total: u32 = row.iter().sum();
            if m > 0 && total < prev {
                return Err(format!("reduced total dropped at m={m}"));
            }
            prev = total;
        }
        // Every marked particle's parent is marked.
        for g in 1..self.generations.len() {
            for (p_idx, particle) in self.generations[g].iter().enumerate() {
                if self.survivor_mark[g][p_idx]
                    && !self.survivor_mark[g - 1][particle.parent as usize]
                {
                    return Err(format!("unmarked parent of a marked particle at gen {g}"));
                }
            }
        }
        // beta is the last singleton level.
        if let Some(beta) = self.beta {
            let total: u32 = self.reduced_counts[beta as usize].iter().sum();
            if total != 1 {
                return Err("beta does not point at a singleton level".into());
            }
            for m in (beta as usize + 1)..h {
                let t: u32 = self.reduced_counts[m].iter().sum();
                if t == 1 {
                    return Err("a singleton level exists beyond beta".into());
                }
            }
        }
        Ok(())
    }
}
