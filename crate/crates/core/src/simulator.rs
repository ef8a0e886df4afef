//! Monte Carlo simulator for the cell population.
//!
//! Cells step synchronously, one generation at a time. All randomness is
//! keyed by (run seed, cell id, generation) through `rng::step_rng`, and
//! daughter ids are assigned in parent-id order, so a run is a pure function
//! of its seed: thread counts and scheduling cannot change the output.

use rand_core::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{ModelParams, ModelSpec};
use crate::rng::{step_rng, uniform};
use crate::stats::mean_and_std_error;
use crate::Result;

/// Default ceiling on living cells in a population run.
pub const DEFAULT_POPULATION_CAP: u64 = 1_000_000;
/// Default ceiling on steps in a single simulated lineage.
pub const DEFAULT_STEP_CAP: u64 = 10_000_000;

/// Outcome of one cell over one generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellStep {
    pub new_age: usize,
    /// Age of the newborn daughter, if the cell divided (may be n when the
    /// daughter is senescent at birth).
    pub daughter: Option<usize>,
    pub divided: bool,
}

/// Advances one cell by one generation: draw the inflow, decide division,
/// and split the load binomially between mother and daughter. The senescent
/// state is absorbing and consumes no randomness.
pub fn step_cell<R: RngCore>(params: &ModelParams, age: usize, rng: &mut R) -> CellStep {
    let n = params.n();
    debug_assert!(age <= n, "age out of range");
    if age >= n {
        return CellStep {
            new_age: n,
            daughter: None,
            divided: false,
        };
    }
    let loaded = age + sample_inflow(params, rng);
    if uniform(rng) < params.division_prob(loaded) {
        let kept = sample_binomial(loaded, params.retention(), rng);
        CellStep {
            new_age: kept.min(n),
            daughter: Some((loaded - kept).min(n)),
            divided: true,
        }
    } else {
        CellStep {
            new_age: loaded.min(n),
            daughter: None,
            divided: false,
        }
    }
}

fn sample_inflow<R: RngCore>(params: &ModelParams, rng: &mut R) -> usize {
    let u = uniform(rng);
    let pmf = params.inflow_pmf();
    let mut acc = 0.0;
    for (k, q) in pmf.iter().enumerate() {
        acc += q;
        if u < acc {
            return k;
        }
    }
    pmf.len() - 1
}

/// Exact Binomial(count, p) draw by inverse-CDF walk on the pmf recurrence;
/// probabilities above one half go through the complement so the walk stays
/// short and the start term cannot underflow.
pub fn sample_binomial<R: RngCore>(count: usize, p: f64, rng: &mut R) -> usize {
    if count == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return count;
    }
    if p > 0.5 {
        count - binomial_walk(count, 1.0 - p, rng)
    } else {
        binomial_walk(count, p, rng)
    }
}

fn binomial_walk<R: RngCore>(count: usize, p: f64, rng: &mut R) -> usize {
    let u = uniform(rng);
    let q = 1.0 - p;
    let ratio = p / q;
    let mut pmf = q.powi(count as i32);
    let mut cdf = pmf;
    let mut j = 0usize;
    while u >= cdf && j < count {
        j += 1;
        pmf *= (count - j + 1) as f64 / j as f64 * ratio;
        cdf += pmf;
    }
    j
}

/// Replicative lifespans (division counts until senescence) of independent
/// lineages started at `start_age`.
#[derive(Debug, Clone, PartialEq)]
pub struct LifespanSamples {
    pub samples: Vec<u64>,
    pub mean: f64,
    pub std_error: f64,
}

/// Follows `n_samples` single-cell lineages (ignoring daughters) until
/// absorption at n, counting divisions. Lineage `s` draws from cell stream
/// `s` under the given seed, so results are reproducible and order-free.
pub fn simulate_lifespan(
    params: &ModelParams,
    start_age: usize,
    n_samples: u64,
    seed: u64,
    step_cap: u64,
) -> Result<LifespanSamples> {
    let n = params.n();
    if start_age >= n {
        return Err(Error::InvalidParams(format!(
            "start age must be below n = {n}, got {start_age}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParams("need at least one lineage".into()));
    }
    let runs: Vec<Result<u64>> = (0..n_samples)
        .into_par_iter()
        .map(|s| {
            let mut age = start_age;
            let mut divisions = 0u64;
            let mut t = 0u32;
            while age < n {
                if u64::from(t) >= step_cap {
                    return Err(Error::LineageStepCap {
                        lineage: s,
                        cap: step_cap,
                    });
                }
                let mut rng = step_rng(seed, s, t);
                let step = step_cell(params, age, &mut rng);
                if step.divided {
                    divisions += 1;
                }
                age = step.new_age;
                t += 1;
            }
            Ok(divisions)
        })
        .collect();
    let mut samples = Vec::with_capacity(runs.len());
    for r in runs {
        samples.push(r?);
    }
    let as_f64: Vec<f64> = samples.iter().map(|&x| x as f64).collect();
    let (mean, std_error) = mean_and_std_error(&as_f64);
    Ok(LifespanSamples {
        samples,
        mean,
        std_error,
    })
}

/// Population snapshot: living cells per age plus the cumulative count of
/// cells absorbed at n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationState {
    pub t: u32,
    pub counts: Vec<u64>,
    pub senescent: u64,
}

impl PopulationState {
    pub fn new(counts: Vec<u64>) -> Self {
        PopulationState {
            t: 0,
            counts,
            senescent: 0,
        }
    }

    /// One cell of the given age in a model with n states.
    pub fn single(n: usize, age: usize) -> Self {
        assert!(age < n);
        let mut counts = vec![0; n];
        counts[age] = 1;
        PopulationState::new(counts)
    }

    /// Living (non-senescent) cells.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// One cell's full record in a lineage tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: u64,
    pub parent: Option<u64>,
    pub birth_time: u32,
    /// Age at birth followed by the age after each lived generation; ends at
    /// n if the cell senesced.
    pub ages: Vec<usize>,
    /// One flag per lived generation.
    pub divided: Vec<bool>,
    /// Birth ages of the daughters, in division order.
    pub daughter_types: Vec<usize>,
    pub senescent: bool,
}

/// Full genealogy of a recorded run.
#[derive(Debug, Clone, PartialEq)]
pub struct LineageTree {
    params: ModelParams,
    seed: u64,
    horizon: u32,
    cells: Vec<Cell>,
    children: Vec<Vec<u64>>,
}

impl LineageTree {
    fn assemble(params: ModelParams, seed: u64, horizon: u32, cells: Vec<Cell>) -> Self {
        let mut children = vec![Vec::new(); cells.len()];
        for cell in &cells {
            if let Some(p) = cell.parent {
                children[p as usize].push(cell.id);
            }
        }
        LineageTree {
            params,
            seed,
            horizon,
            cells,
            children,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn get(&self, id: u64) -> Option<&Cell> {
        self.cells.get(id as usize)
    }

    /// The first founding cell.
    pub fn root(&self) -> &Cell {
        &self.cells[0]
    }

    pub fn roots(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.parent.is_none())
    }

    pub fn children(&self, id: u64) -> &[u64] {
        &self.children[id as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Json,
    Dot,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeJson {
    params: ModelSpec,
    seed: u64,
    horizon: u32,
    cells: Vec<CellJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellJson {
    id: u64,
    parent: Option<u64>,
    birth_time: u32,
    ages: Vec<usize>,
    divided: Vec<bool>,
    senescent: bool,
}

/// Serializes a tree. JSON carries the whole record and parses back with
/// `parse_tree`; dot is a one-way rendering with nodes labeled
/// "id:birth-age@birth-time".
pub fn export_tree(tree: &LineageTree, format: TreeFormat) -> Vec<u8> {
    match format {
        TreeFormat::Json => {
            let doc = TreeJson {
                params: ModelSpec::from(tree.params()),
                seed: tree.seed,
                horizon: tree.horizon,
                cells: tree
                    .cells
                    .iter()
                    .map(|c| CellJson {
                        id: c.id,
                        parent: c.parent,
                        birth_time: c.birth_time,
                        ages: c.ages.clone(),
                        divided: c.divided.clone(),
                        senescent: c.senescent,
                    })
                    .collect(),
            };
            let mut out = serde_json::to_vec_pretty(&doc).expect("tree serializes");
            out.push(b'\n');
            out
        }
        TreeFormat::Dot => {
            let mut out = String::from("digraph lineage {\n");
            for cell in &tree.cells {
                out.push_str(&format!(
                    "  \"{}\" [label=\"{}:{}@{}\"];\n",
                    cell.id, cell.id, cell.ages[0], cell.birth_time
                ));
            }
            for cell in &tree.cells {
                if let Some(p) = cell.parent {
                    out.push_str(&format!("  \"{}\" -> \"{}\";\n", p, cell.id));
                }
            }
            out.push_str("}\n");
            out.into_bytes()
        }
    }
}

/// Parses a JSON tree produced by `export_tree`, checking structural
/// consistency and rebuilding the daughter birth-age lists.
pub fn parse_tree(bytes: &[u8]) -> Result<LineageTree> {
    let doc: TreeJson =
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(format!("tree json: {e}")))?;
    let params = ModelParams::try_from(doc.params)?;
    let n = params.n();
    let mut cells: Vec<Cell> = Vec::with_capacity(doc.cells.len());
    for (idx, c) in doc.cells.into_iter().enumerate() {
        if c.id != idx as u64 {
            return Err(Error::Parse(format!(
                "cell ids must be dense and ascending; found {} at position {idx}",
                c.id
            )));
        }
        if c.ages.is_empty() || c.divided.len() + 1 != c.ages.len() {
            return Err(Error::Parse(format!(
                "cell {}: ages/divided lengths are inconsistent",
                c.id
            )));
        }
        if c.ages.iter().any(|&a| a > n) {
            return Err(Error::Parse(format!("cell {}: age above n", c.id)));
        }
        if c.senescent != (*c.ages.last().unwrap() == n) {
            return Err(Error::Parse(format!(
                "cell {}: senescent flag contradicts the trajectory",
                c.id
            )));
        }
        match c.parent {
            Some(p) if p >= c.id => {
                return Err(Error::Parse(format!(
                    "cell {}: parent {} does not precede it",
                    c.id, p
                )))
            }
            _ => {}
        }
        cells.push(Cell {
            id: c.id,
            parent: c.parent,
            birth_time: c.birth_time,
            ages: c.ages,
            divided: c.divided,
            daughter_types: Vec::new(),
            senescent: c.senescent,
        });
    }
    // Rebuild daughter birth ages; child ids ascend in division order.
    for id in 0..cells.len() {
        if let Some(p) = cells[id].parent {
            let birth_age = cells[id].ages[0];
            let bt = cells[id].birth_time;
            let parent = &cells[p as usize];
            let step = bt
                .checked_sub(parent.birth_time + 1)
                .ok_or_else(|| Error::Parse(format!("cell {id}: born before parent")))?
                as usize;
            if step >= parent.divided.len() || !parent.divided[step] {
                return Err(Error::Parse(format!(
                    "cell {id}: no division of parent {p} at generation {bt}"
                )));
            }
            cells[p as usize].daughter_types.push(birth_age);
        }
    }
    Ok(LineageTree::assemble(params, doc.seed, doc.horizon, cells))
}

/// Result of a population run: per-generation snapshots, plus the genealogy
/// when recording was requested.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRun {
    pub states: Vec<PopulationState>,
    pub tree: Option<LineageTree>,
}

struct ActiveCell {
    id: u64,
    age: usize,
}

/// Generation-by-generation population stepper. `advance` returns each new
/// snapshot and fails once the living population would exceed the cap, so a
/// caller can stream partial output before the failure.
pub struct PopulationSim {
    params: ModelParams,
    seed: u64,
    cap: u64,
    t: u32,
    active: Vec<ActiveCell>,
    senescent: u64,
    next_id: u64,
    cells: Option<Vec<Cell>>,
}

impl PopulationSim {
    pub fn new(
        params: &ModelParams,
        initial: &PopulationState,
        seed: u64,
        cap: u64,
        record_tree: bool,
    ) -> Result<Self> {
        let n = params.n();
        if initial.counts.len() != n {
            return Err(Error::InvalidParams(format!(
                "initial state must have {n} age counts, got {}",
                initial.counts.len()
            )));
        }
        let total = initial.total();
        if total == 0 {
            return Err(Error::InvalidParams("initial population is empty".into()));
        }
        if total > cap {
            return Err(Error::InvalidParams(format!(
                "initial population {total} exceeds the cap {cap}"
            )));
        }
        let mut active = Vec::with_capacity(total as usize);
        let mut cells = record_tree.then(|| Vec::with_capacity(total as usize));
        let mut id = 0u64;
        for (age, &count) in initial.counts.iter().enumerate() {
            for _ in 0..count {
                active.push(ActiveCell { id, age });
                if let Some(cells) = &mut cells {
                    cells.push(Cell {
                        id,
                        parent: None,
                        birth_time: 0,
                        ages: vec![age],
                        divided: Vec::new(),
                        daughter_types: Vec::new(),
                        senescent: false,
                    });
                }
                id += 1;
            }
        }
        Ok(PopulationSim {
            params: params.clone(),
            seed,
            cap,
            t: 0,
            active,
            senescent: initial.senescent,
            next_id: id,
            cells,
        })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    /// Snapshot of the current generation.
    pub fn state(&self) -> PopulationState {
        let mut counts = vec![0u64; self.params.n()];
        for cell in &self.active {
            counts[cell.age] += 1;
        }
        PopulationState {
            t: self.t,
            counts,
            senescent: self.senescent,
        }
    }

    /// Steps every living cell one generation. Cell outcomes depend only on
    /// (seed, cell id, generation); the par_iter preserves input order, and
    /// daughter ids are assigned in that same order afterwards.
    pub fn advance(&mut self) -> Result<PopulationState> {
        let t = self.t;
        let params = &self.params;
        let seed = self.seed;
        let outcomes: Vec<CellStep> = self
            .active
            .par_iter()
            .map(|cell| {
                let mut rng = step_rng(seed, cell.id, t);
                step_cell(params, cell.age, &mut rng)
            })
            .collect();
        let n = self.params.n();
        let mut next = Vec::with_capacity(self.active.len() + self.active.len() / 2);
        for (cell, out) in self.active.iter().zip(&outcomes) {
            if let Some(cells) = &mut self.cells {
                let rec = &mut cells[cell.id as usize];
                rec.ages.push(out.new_age);
                rec.divided.push(out.divided);
                if out.new_age == n {
                    rec.senescent = true;
                }
            }
            if out.new_age == n {
                self.senescent += 1;
            } else {
                next.push(ActiveCell {
                    id: cell.id,
                    age: out.new_age,
                });
            }
            if let Some(d) = out.daughter {
                let did = self.next_id;
                self.next_id += 1;
                if let Some(cells) = &mut self.cells {
                    cells[cell.id as usize].daughter_types.push(d);
                    cells.push(Cell {
                        id: did,
                        parent: Some(cell.id),
                        birth_time: t + 1,
                        ages: vec![d],
                        divided: Vec::new(),
                        daughter_types: Vec::new(),
                        senescent: d == n,
                    });
                }
                if d == n {
                    self.senescent += 1;
                } else {
                    next.push(ActiveCell { id: did, age: d });
                }
            }
        }
        self.active = next;
        self.t += 1;
        let living = self.active.len() as u64;
        if living > self.cap {
            return Err(Error::PopulationCap {
                t: self.t,
                population: living,
                cap: self.cap,
            });
        }
        Ok(self.state())
    }

    /// Consumes the stepper and yields the recorded tree, if any.
    pub fn into_tree(self) -> Option<LineageTree> {
        let horizon = self.t;
        self.cells
            .map(|cells| LineageTree::assemble(self.params, self.seed, horizon, cells))
    }
}

/// Runs a full population simulation for `horizon` generations.
pub fn simulate_population(
    params: &ModelParams,
    initial: &PopulationState,
    horizon: u32,
    seed: u64,
    cap: u64,
    record_tree: bool,
) -> Result<PopulationRun> {
    let mut sim = PopulationSim::new(params, initial, seed, cap, record_tree)?;
    let mut states = Vec::with_capacity(horizon as usize + 1);
    states.push(sim.state());
    for _ in 0..horizon {
        states.push(sim.advance()?);
    }
    Ok(PopulationRun {
        states,
        tree: sim.into_tree(),
    })
}

/// Normalized age distribution of the living population at generation t.
pub fn empirical_type_distribution(states: &[PopulationState], t: u32) -> Result<Vec<f64>> {
    let state = states
        .iter()
        .find(|s| s.t == t)
        .ok_or_else(|| Error::InvalidParams(format!("no snapshot at generation {t}")))?;
    let total = state.total();
    if total == 0 {
        return Err(Error::Extinct { t });
    }
    Ok(state
        .counts
        .iter()
        .map(|&c| c as f64 / total as f64)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MAlphaParams;
    use crate::rng::step_rng;

    fn reference_params() -> ModelParams {
        MAlphaParams::new(100, 15, 0.5, 2.0).unwrap().params()
    }

    #[test]
    fn senescent_cells_do_not_move() {
        let params = reference_params();
        let mut rng = step_rng(1, 0, 0);
        let step = step_cell(&params, 100, &mut rng);
        assert_eq!(step.new_age, 100);
        assert!(!step.divided);
        assert!(step.daughter.is_none());
    }

    #[test]
    fn binomial_sampler_bounds_and_edges() {
        let mut rng = step_rng(3, 0, 0);
        assert_eq!(sample_binomial(0, 0.5, &mut rng), 0);
        assert_eq!(sample_binomial(10, 0.0, &mut rng), 0);
        assert_eq!(sample_binomial(10, 1.0, &mut rng), 10);
        for t in 0..200 {
            let mut rng = step_rng(3, 1, t);
            let x = sample_binomial(20, 0.3, &mut rng);
            assert!(x <= 20);
        }
    }

    #[test]
    fn binomial_sampler_mean_close() {
        let (count, p, draws) = (40usize, 0.35f64, 100_000u32);
        let mut total = 0u64;
        for t in 0..draws {
            let mut rng = step_rng(11, 0, t);
            total += sample_binomial(count, p, &mut rng) as u64;
        }
        let mean = total as f64 / draws as f64;
        let expect = count as f64 * p;
        let sigma = (count as f64 * p * (1.0 - p) / draws as f64).sqrt();
        assert!(
            (mean - expect).abs() < 4.0 * sigma,
            "mean {mean} vs {expect} (sigma {sigma})"
        );
    }

    #[test]
    fn full_retention_keeps_everything_with_mother() {
        let params = MAlphaParams::new(10, 2, 1.0, 1.0).unwrap().params();
        for t in 0..100 {
            let mut rng = step_rng(5, 0, t);
            let step = step_cell(&params, 0, &mut rng);
            if let Some(d) = step.daughter {
                assert_eq!(d, 0);
                assert_eq!(step.new_age, 2);
            }
        }
    }

    #[test]
    fn lifespan_two_state_matches_closed_form() {
        // n=2, m=1, p=0.5: expected lifespan from age 0 is 2/3.
        let params = MAlphaParams::new(2, 1, 0.5, 1.0).unwrap().params();
        let res = simulate_lifespan(&params, 0, 20_000, 9, DEFAULT_STEP_CAP).unwrap();
        assert!(
            (res.mean - 2.0 / 3.0).abs() < 3.0 * res.std_error,
            "mean {} se {}",
            res.mean,
            res.std_error
        );
    }

    #[test]
    fn lifespan_rejects_senescent_start() {
        let params = reference_params();
        assert!(simulate_lifespan(&params, 100, 10, 1, 100).is_err());
    }

    #[test]
    fn lifespan_step_cap_triggers_on_non_absorbing_chain() {
        let params = ModelParams::new(2, vec![1.0], 0.5, vec![1.0, 1.0]).unwrap();
        match simulate_lifespan(&params, 0, 4, 1, 50) {
            Err(Error::LineageStepCap { cap: 50, .. }) => {}
            other => panic!("expected step-cap error, got {other:?}"),
        }
    }

    #[test]
    fn population_bookkeeping_is_conserved() {
        let params = reference_params();
        let initial = PopulationState::single(100, 0);
        let run = simulate_population(&params, &initial, 12, 77, 1_000_000, true).unwrap();
        let tree = run.tree.unwrap();
        let divisions: usize = tree
            .cells()
            .iter()
            .map(|c| c.divided.iter().filter(|&&d| d).count())
            .sum();
        assert_eq!(tree.cells().len(), 1 + divisions);
        let last = run.states.last().unwrap();
        assert_eq!(last.total() + last.senescent, tree.cells().len() as u64);
        for w in run.states.windows(2) {
            assert!(w[1].senescent >= w[0].senescent, "senescence is cumulative");
        }
    }

    #[test]
    fn trajectories_freeze_at_senescence() {
        let params = MAlphaParams::new(6, 3, 0.5, 1.0).unwrap().params();
        let initial = PopulationState::single(6, 0);
        let run = simulate_population(&params, &initial, 15, 3, 100_000, true).unwrap();
        for cell in run.tree.unwrap().cells() {
            assert_eq!(cell.ages.len(), cell.divided.len() + 1);
            if let Some(pos) = cell.ages.iter().position(|&a| a == 6) {
                assert_eq!(pos, cell.ages.len() - 1, "recording stops at absorption");
                assert!(cell.senescent);
            }
        }
    }

    #[test]
    fn population_cap_is_enforced() {
        let params = reference_params();
        let initial = PopulationState::single(100, 0);
        match simulate_population(&params, &initial, 40, 5, 50, false) {
            Err(Error::PopulationCap { cap: 50, t, .. }) => assert!(t > 0),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn same_seed_same_run_different_seed_diverges() {
        let params = reference_params();
        let initial = PopulationState::single(100, 0);
        let a = simulate_population(&params, &initial, 10, 42, 1_000_000, true).unwrap();
        let b = simulate_population(&params, &initial, 10, 42, 1_000_000, true).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.tree, b.tree);
        let c = simulate_population(&params, &initial, 10, 43, 1_000_000, false).unwrap();
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let params = reference_params();
        let initial = PopulationState::single(100, 0);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate_population(&params, &initial, 12, 2024, 1_000_000, true).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| simulate_population(&params, &initial, 12, 2024, 1_000_000, true).unwrap());
        assert_eq!(single.states, many.states);
        assert_eq!(single.tree, many.tree);
    }

    #[test]
    fn tree_round_trips_through_json() {
        let params = reference_params();
        let initial = PopulationState::single(100, 0);
        let run = simulate_population(&params, &initial, 8, 11, 100_000, true).unwrap();
        let tree = run.tree.unwrap();
        let json = export_tree(&tree, TreeFormat::Json);
        let back = parse_tree(&json).unwrap();
        assert_eq!(tree, back);
        assert_eq!(export_tree(&back, TreeFormat::Json), json);
    }

    #[test]
    fn dot_export_labels_cells() {
        let params = MAlphaParams::new(6, 2, 0.5, 2.0).unwrap().params();
        let initial = PopulationState::single(6, 0);
        let run = simulate_population(&params, &initial, 4, 5, 1000, true).unwrap();
        let dot = String::from_utf8(export_tree(run.tree.as_ref().unwrap(), TreeFormat::Dot)).unwrap();
        assert!(dot.starts_with("digraph lineage {"));
        assert!(dot.contains("label=\"0:0@0\""));
        assert!(dot.trim_end().ends_with('}'));
    }

    #[test]
    fn parse_rejects_corrupted_trees() {
        let params = MAlphaParams::new(6, 2, 0.5, 2.0).unwrap().params();
        let initial = PopulationState::single(6, 0);
        let run = simulate_population(&params, &initial, 3, 5, 1000, true).unwrap();
        let json = String::from_utf8(export_tree(run.tree.as_ref().unwrap(), TreeFormat::Json)).unwrap();
        let bad = json.replacen("\"senescent\": false", "\"senescent\": true", 1);
        assert!(parse_tree(bad.as_bytes()).is_err());
    }

    #[test]
    fn extinct_population_is_reported() {
        // n=2, m=1: age-1 cells jump straight to senescence without dividing.
        let params = MAlphaParams::new(2, 1, 0.5, 1.0).unwrap().params();
        let initial = PopulationState::new(vec![0, 1]);
        let run = simulate_population(&params, &initial, 1, 8, 1000, false).unwrap();
        match empirical_type_distribution(&run.states, 1) {
            Err(Error::Extinct { t: 1 }) => {}
            other => panic!("expected extinction, got {other:?}"),
        }
    }
}
