use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::genome::{crossover, enforce_size_limit, mutate_m, mutate_v, random_individual, Individual};
use super::Registry;
use crate::data::{subsample, Dataset};
use crate::ensembles::ModelCache;
use crate::error::{Error, Result};
use crate::eval::{cross_validate_with, proportional_eval_with};
use crate::learners::LearnerSpec;
use crate::seed::{self, DEFAULT_SEED};

/// RMSE values at or below this get the maximal fitness.
pub const RMSE_FLOOR: f64 = 1e-9;
pub const MAX_FITNESS: f64 = 1e9;

pub fn fitness_from_rmse(rmse: f64) -> f64 {
    if rmse <= RMSE_FLOOR {
        MAX_FITNESS
    } else {
        1.0 / rmse
    }
}

/// How a genome's RMSE is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitnessMode {
    /// k-fold cross-validation on folds fixed for the whole run.
    CrossValidation { folds: usize },
    /// One random train/test split, drawn anew every iteration.
    Proportional { train_ratio: f64 },
}

impl fmt::Display for FitnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitnessMode::CrossValidation { folds } => write!(f, "cv{folds}"),
            FitnessMode::Proportional { train_ratio } => write!(f, "split{train_ratio}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    /// Population size S.
    pub population: usize,
    /// Elite size E.
    pub elite: usize,
    /// Number of iterations Max.
    pub iterations: usize,
    /// Probability of `mutate_m` per child.
    pub p_mutate_m: f64,
    /// Probability of `mutate_v` per child.
    pub p_mutate_v: f64,
    /// Maximum number of level-1 members.
    pub size_limit: Option<usize>,
    pub fitness: FitnessMode,
    /// Fraction of the data, drawn once per run, used for fitness.
    pub subsample: Option<f64>,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig::unlimited()
    }
}

impl GaConfig {
    /// S = 16, E = 1, Max = 100, Pm_M = 0.2, Pm_v = 0.5, 5-fold CV, no size
    /// limit.
    pub fn unlimited() -> Self {
        GaConfig {
            population: 16,
            elite: 1,
            iterations: 100,
            p_mutate_m: 0.2,
            p_mutate_v: 0.5,
            size_limit: None,
            fitness: FitnessMode::CrossValidation { folds: 5 },
            subsample: None,
            seed: DEFAULT_SEED,
        }
    }

    /// S = 10 with at most 5 members, otherwise as [`unlimited`](Self::unlimited).
    pub fn size_limited() -> Self {
        GaConfig {
            population: 10,
            size_limit: Some(5),
            ..GaConfig::unlimited()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::param(format!("population must be at least 2, got {}", self.population)));
        }
        if self.elite > self.population {
            return Err(Error::param(format!(
                "elite size {} exceeds population {}",
                self.elite, self.population
            )));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations must be at least 1"));
        }
        for (name, p) in [("Pm_M", self.p_mutate_m), ("Pm_v", self.p_mutate_v)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::param(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if self.size_limit == Some(0) {
            return Err(Error::param("size limit must be at least 1"));
        }
        match self.fitness {
            FitnessMode::CrossValidation { folds } if folds < 2 => {
                return Err(Error::param(format!("fitness folds must be at least 2, got {folds}")))
            }
            FitnessMode::Proportional { train_ratio } if !(train_ratio > 0.0 && train_ratio < 1.0) => {
                return Err(Error::param(format!("train ratio must be in (0, 1), got {train_ratio}")))
            }
            _ => {}
        }
        if let Some(f) = self.subsample {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::param(format!("subsample fraction must be in (0, 1], got {f}")));
            }
        }
        Ok(())
    }

    /// One `key = value` line per parameter.
    pub fn describe(&self) -> String {
        let limit = self.size_limit.map_or("none".to_string(), |l| l.to_string());
        let sub = self.subsample.map_or("none".to_string(), |f| f.to_string());
        format!(
            "population = {}\nelite = {}\niterations = {}\np_mutate_m = {}\np_mutate_v = {}\nsize_limit = {}\nfitness = {}\nsubsample = {}\nseed = {}\n",
            self.population, self.elite, self.iterations, self.p_mutate_m, self.p_mutate_v, limit, self.fitness, sub, self.seed
        )
    }
}

/// Memoized genome evaluation.
///
/// Cross-validation folds are fixed by `derive(seed, "fitness", 0)` for the
/// whole run, so a genome always gets the same RMSE. In proportional mode
/// iteration `t` uses the split from `derive(seed, "fitness", t)`.
pub struct FitnessEvaluator<'a> {
    data: Dataset,
    registry: &'a Registry,
    mode: FitnessMode,
    seed: u64,
    memo: Mutex<HashMap<(Individual, u64), f64>>,
    cache: ModelCache,
    evaluations: AtomicUsize,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(data: Dataset, registry: &'a Registry, mode: FitnessMode, seed: u64) -> Self {
        FitnessEvaluator {
            data,
            registry,
            mode,
            seed,
            memo: Mutex::new(HashMap::new()),
            cache: ModelCache::new(),
            evaluations: AtomicUsize::new(0),
        }
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    fn eval_seed(&self, iteration: usize) -> u64 {
        match self.mode {
            FitnessMode::CrossValidation { .. } => seed::derive(self.seed, "fitness", 0),
            FitnessMode::Proportional { .. } => seed::derive(self.seed, "fitness", iteration as u64),
        }
    }

    /// Number of genomes actually trained (memo misses).
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn model_cache(&self) -> &ModelCache {
        &self.cache
    }

    fn compute(&self, ind: &Individual, eval_seed: u64) -> Result<f64> {
        let wrap = |e: Error| Error::Fitness { genome: ind.to_string(), source: Box::new(e) };
        let spec = LearnerSpec::Stacking(ind.to_stacking(self.registry).map_err(wrap)?);
        let report = match self.mode {
            FitnessMode::CrossValidation { folds } => {
                cross_validate_with(&spec, &self.data, folds, eval_seed, Some(&self.cache))
            }
            FitnessMode::Proportional { train_ratio } => {
                proportional_eval_with(&spec, &self.data, train_ratio, eval_seed, Some(&self.cache))
            }
        }
        .map_err(wrap)?;
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        Ok(report.pooled_rmse)
    }

    /// RMSE of the genome's stacking ensemble at `iteration` (1-based).
    pub fn rmse(&self, ind: &Individual, iteration: usize) -> Result<f64> {
        Ok(self.rmse_all(std::slice::from_ref(ind), iteration)?[0])
    }

    pub fn fitness(&self, ind: &Individual, iteration: usize) -> Result<f64> {
        self.rmse(ind, iteration).map(fitness_from_rmse)
    }

    /// RMSEs of a population. Distinct unseen genomes are evaluated in
    /// parallel; each is trained once.
    pub fn rmse_all(&self, pop: &[Individual], iteration: usize) -> Result<Vec<f64>> {
        let s = self.eval_seed(iteration);
        let mut todo: Vec<&Individual> = {
            let memo = self.memo.lock().expect("memo lock");
            pop.iter().filter(|i| !memo.contains_key(&((*i).clone(), s))).collect()
        };
        todo.sort();
        todo.dedup();
        let fresh = todo
            .par_iter()
            .map(|i| self.compute(i, s).map(|r| ((*i).clone(), r)))
            .collect::<Result<Vec<_>>>()?;
        let mut memo = self.memo.lock().expect("memo lock");
        for (i, r) in fresh {
            memo.insert((i, s), r);
        }
        Ok(pop.iter().map(|i| memo[&(i.clone(), s)]).collect())
    }

    /// Drops trained models (memoized RMSEs are kept).
    pub fn clear_models(&self) {
        self.cache.clear();
    }
}

/// Indices drawn with probability proportional to `fitnesses`.
pub fn roulette_indices<R: Rng + ?Sized>(fitnesses: &[f64], count: usize, rng: &mut R) -> Result<Vec<usize>> {
    if fitnesses.is_empty() {
        return Err(Error::param("roulette selection over an empty population"));
    }
    if let Some(f) = fitnesses.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
        return Err(Error::param(format!("roulette selection needs positive fitness, got {f}")));
    }
    let cumulative: Vec<f64> = fitnesses
        .iter()
        .scan(0.0, |acc, f| {
            *acc += f;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("non-empty");
    Ok((0..count)
        .map(|_| {
            let r = rng.random::<f64>() * total;
            cumulative.partition_point(|&c| c <= r).min(fitnesses.len() - 1)
        })
        .collect())
}

/// `count` independent fitness-proportional draws from `pop`.
pub fn roulette_select<R: Rng + ?Sized>(
    pop: &[Individual],
    fitnesses: &[f64],
    count: usize,
    rng: &mut R,
) -> Result<Vec<Individual>> {
    if pop.len() != fitnesses.len() {
        return Err(Error::Dimension { expected: pop.len(), actual: fitnesses.len() });
    }
    Ok(roulette_indices(fitnesses, count, rng)?.into_iter().map(|i| pop[i].clone()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based.
    pub iteration: usize,
    pub best_rmse: f64,
    pub mean_rmse: f64,
    pub best: Individual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub records: Vec<IterationRecord>,
    /// Best genome over all iterations.
    pub best: Individual,
    pub best_rmse: f64,
    /// Best genome of the final population.
    pub last_best: Individual,
    pub last_best_rmse: f64,
    /// Distinct genome evaluations performed.
    pub evaluations: usize,
}

impl EvolutionTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iteration,best_rmse,mean_rmse,best_genome\n");
        for r in &self.records {
            s.push_str(&format!("{},{},{},{}\n", r.iteration, r.best_rmse, r.mean_rmse, r.best));
        }
        s
    }

    /// Running minimum of the per-iteration best RMSE.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.records
            .iter()
            .scan(f64::INFINITY, |m, r| {
                *m = m.min(r.best_rmse);
                Some(*m)
            })
            .collect()
    }
}

pub fn ga_run(data: &Dataset, cfg: &GaConfig, registry: &Registry) -> Result<EvolutionTrace> {
    ga_run_with(data, cfg, registry, &[], &mut |_| {})
}

/// The genetic algorithm. `initial` genomes (at most S) start the
/// population, the rest are random. `observer` sees each iteration record
/// as it is produced.
pub fn ga_run_with(
    data: &Dataset,
    cfg: &GaConfig,
    registry: &Registry,
    initial: &[Individual],
    observer: &mut dyn FnMut(&IterationRecord),
) -> Result<EvolutionTrace> {
    cfg.validate()?;
    if initial.len() > cfg.population {
        return Err(Error::param(format!(
            "{} initial genomes exceed population {}",
            initial.len(),
            cfg.population
        )));
    }
    for g in initial {
        g.check(registry.len())?;
    }
    let n = registry.len();
    let fitness_data = match cfg.subsample {
        Some(f) if f < 1.0 => subsample(data, f, &mut seed::rng(seed::derive(cfg.seed, "fitness-subsample", 0)))?,
        _ => data.clone(),
    };
    let evaluator = FitnessEvaluator::new(fitness_data, registry, cfg.fitness, cfg.seed);

    let mut rng = seed::rng(seed::derive(cfg.seed, "ga-init", 0));
    let mut pop: Vec<Individual> = initial.to_vec();
    while pop.len() < cfg.population {
        pop.push(random_individual(n, cfg.size_limit, &mut rng));
    }
    if let Some(l) = cfg.size_limit {
        pop = pop.iter().map(|g| enforce_size_limit(g, l, &mut rng)).collect();
    }

    let mut records = Vec::with_capacity(cfg.iterations);
    let mut global: Option<(Individual, f64)> = None;
    let mut last: Option<(Individual, f64)> = None;
    for iteration in 1..=cfg.iterations {
        if matches!(cfg.fitness, FitnessMode::Proportional { .. }) {
            evaluator.clear_models();
        }
        let rmses = evaluator.rmse_all(&pop, iteration)?;
        let fitnesses: Vec<f64> = rmses.iter().map(|&r| fitness_from_rmse(r)).collect();

        // Stable order: best first, earlier position wins ties.
        let mut order: Vec<usize> = (0..pop.len()).collect();
        order.sort_by(|&a, &b| fitnesses[b].total_cmp(&fitnesses[a]));
        let top = order[0];
        let record = IterationRecord {
            iteration,
            best_rmse: rmses[top],
            mean_rmse: rmses.iter().sum::<f64>() / rmses.len() as f64,
            best: pop[top].clone(),
        };
        observer(&record);
        if global.as_ref().is_none_or(|(_, r)| rmses[top] < *r) {
            global = Some((pop[top].clone(), rmses[top]));
        }
        last = Some((pop[top].clone(), rmses[top]));
        records.push(record);
        if iteration == cfg.iterations {
            break;
        }

        let mut rng = seed::rng(seed::derive(cfg.seed, "ga-breed", iteration as u64));
        let pairs = (cfg.population - cfg.elite) / 2;
        let picks = roulette_select(&pop, &fitnesses, 2 * pairs, &mut rng)?;
        let mut children = Vec::with_capacity(cfg.population - cfg.elite);
        for pair in picks.chunks_exact(2) {
            children.push(crossover(&pair[0], &pair[1], &mut rng)?);
            children.push(crossover(&pair[1], &pair[0], &mut rng)?);
        }
        for child in children.iter_mut() {
            if rng.random::<f64>() < cfg.p_mutate_m {
                *child = mutate_m(child, &mut rng);
            }
            if rng.random::<f64>() < cfg.p_mutate_v {
                *child = mutate_v(child, &mut rng);
            }
        }
        if children.len() + cfg.elite < cfg.population {
            children.push(mutate_v(&pop[top], &mut rng));
        }
        if let Some(l) = cfg.size_limit {
            children = children.iter().map(|c| enforce_size_limit(c, l, &mut rng)).collect();
        }
        let mut next: Vec<Individual> = order[..cfg.elite].iter().map(|&i| pop[i].clone()).collect();
        next.extend(children);
        pop = next;
    }

    let (best, best_rmse) = global.expect("at least one iteration");
    let (last_best, last_best_rmse) = last.expect("at least one iteration");
    Ok(EvolutionTrace {
        records,
        best,
        best_rmse,
        last_best,
        last_best_rmse,
        evaluations: evaluator.evaluations(),
    })
}
