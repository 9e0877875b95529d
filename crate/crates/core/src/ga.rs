//! Generational genetic algorithm over GBDT hyperparameters: tournament
//! selection, uniform crossover, Gaussian mutation, and elitism, maximizing
//! held-out fitness (negative MAE). Elites are carried unchanged, so the
//! best fitness never regresses across generations.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::Frame;
use crate::metrics;
use crate::models::{fit_gbdt, predict_gbdt, GbdtConfig, ModelError};

#[derive(Debug, Error)]
pub enum GaError {
    #[error("gene `{gene}` has lo {lo} > hi {hi}")]
    BadBounds { gene: String, lo: f64, hi: f64 },
    #[error("genomes have different schemas")]
    SchemaMismatch,
    #[error("invalid GA config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneKind {
    Int,
    Real,
}

/// One bounded hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gene {
    pub name: String,
    pub kind: GeneKind,
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl Gene {
    fn clamp(&mut self) {
        if self.kind == GeneKind::Int {
            self.value = self.value.round();
        }
        self.value = self.value.clamp(self.lo, self.hi);
    }
}

/// Bounded search space: names, kinds, and ranges, without values.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneSpec {
    pub name: &'static str,
    pub kind: GeneKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    pub genes: Vec<GeneSpec>,
}

impl SearchSpace {
    pub fn validate(&self) -> Result<(), GaError> {
        for g in &self.genes {
            if g.lo > g.hi {
                return Err(GaError::BadBounds {
                    gene: g.name.to_string(),
                    lo: g.lo,
                    hi: g.hi,
                });
            }
        }
        Ok(())
    }
}

/// Default GBDT search bounds. The trainer's seed is not evolved; fitness
/// evaluation fixes it so identical genomes always score identically.
pub fn default_search_space() -> SearchSpace {
    SearchSpace {
        genes: vec![
            GeneSpec { name: "n_rounds", kind: GeneKind::Int, lo: 20.0, hi: 300.0 },
            GeneSpec { name: "eta", kind: GeneKind::Real, lo: 0.01, hi: 0.5 },
            GeneSpec { name: "max_depth", kind: GeneKind::Int, lo: 2.0, hi: 10.0 },
            GeneSpec { name: "min_child_weight", kind: GeneKind::Real, lo: 0.0, hi: 10.0 },
            GeneSpec { name: "lambda", kind: GeneKind::Real, lo: 0.0, hi: 10.0 },
            GeneSpec { name: "gamma", kind: GeneKind::Real, lo: 0.0, hi: 5.0 },
            GeneSpec { name: "subsample", kind: GeneKind::Real, lo: 0.5, hi: 1.0 },
            GeneSpec { name: "colsample", kind: GeneKind::Real, lo: 0.5, hi: 1.0 },
        ],
    }
}

/// A fixed-order vector of genes; decodes to a trainer config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub genes: Vec<Gene>,
}

impl Genome {
    pub fn in_bounds(&self) -> bool {
        self.genes.iter().all(|g| {
            g.value >= g.lo
                && g.value <= g.hi
                && (g.kind == GeneKind::Real || g.value.fract() == 0.0)
        })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.genes.iter().find(|g| g.name == name).map(|g| g.value)
    }

    fn same_schema(&self, other: &Genome) -> bool {
        self.genes.len() == other.genes.len()
            && self
                .genes
                .iter()
                .zip(&other.genes)
                .all(|(a, b)| a.name == b.name && a.kind == b.kind && a.lo == b.lo && a.hi == b.hi)
    }

    /// Bit-pattern key for fitness caching by value.
    fn cache_key(&self) -> Vec<u64> {
        self.genes.iter().map(|g| g.value.to_bits()).collect()
    }

    /// JSON object of gene values, in a stable key order.
    pub fn to_json(&self) -> String {
        let map: serde_json::Map<String, serde_json::Value> = self
            .genes
            .iter()
            .map(|g| (g.name.clone(), serde_json::json!(g.value)))
            .collect();
        serde_json::Value::Object(map).to_string()
    }

    /// Decode into a trainer config. Requires the default search space's
    /// gene names. The config seed is fixed at 0.
    pub fn decode(&self) -> Result<GbdtConfig, GaError> {
        let get = |name: &str| {
            self.get(name)
                .ok_or_else(|| GaError::InvalidConfig(format!("genome lacks gene `{name}`")))
        };
        let cfg = GbdtConfig {
            n_rounds: get("n_rounds")? as usize,
            eta: get("eta")?,
            max_depth: get("max_depth")? as usize,
            min_child_weight: get("min_child_weight")?,
            lambda: get("lambda")?,
            gamma: get("gamma")?,
            subsample: get("subsample")?,
            colsample: get("colsample")?,
            seed: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Mutation noise std as a fraction of each gene's range.
    pub mutation_sigma: f64,
    pub elite_count: usize,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 16,
            generations: 10,
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            mutation_sigma: 0.1,
            elite_count: 2,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.population_size == 0 {
            return Err(GaError::InvalidConfig("population_size must be >= 1".into()));
        }
        if self.elite_count >= self.population_size {
            return Err(GaError::InvalidConfig(format!(
                "elite_count {} must be < population_size {}",
                self.elite_count, self.population_size
            )));
        }
        if self.elite_count == 0 {
            return Err(GaError::InvalidConfig("elite_count must be >= 1".into()));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return Err(GaError::InvalidConfig(format!(
                "tournament_size {} not in [1, {}]",
                self.tournament_size, self.population_size
            )));
        }
        for (name, v) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(GaError::InvalidConfig(format!("{name} {v} not in [0, 1]")));
            }
        }
        Ok(())
    }
}

/// Seeded initial population: each gene uniform over its bounds.
pub fn init_population(space: &SearchSpace, cfg: &GaConfig) -> Result<Vec<Genome>, GaError> {
    space.validate()?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut population = Vec::with_capacity(cfg.population_size);
    for _ in 0..cfg.population_size {
        let genes = space
            .genes
            .iter()
            .map(|spec| {
                let value = if spec.lo == spec.hi {
                    spec.lo
                } else {
                    match spec.kind {
                        GeneKind::Int => rng.gen_range(spec.lo as i64..=spec.hi as i64) as f64,
                        GeneKind::Real => rng.gen_range(spec.lo..spec.hi),
                    }
                };
                Gene {
                    name: spec.name.to_string(),
                    kind: spec.kind,
                    lo: spec.lo,
                    hi: spec.hi,
                    value,
                }
            })
            .collect();
        population.push(Genome { genes });
    }
    Ok(population)
}

/// Pick the fittest of `tournament_size` members sampled with replacement.
/// Fitness ties keep the earliest sampled genome.
pub fn tournament_select(
    population: &[Genome],
    fitnesses: &[f64],
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Genome {
    let mut winner = rng.gen_range(0..population.len());
    for _ in 1..cfg.tournament_size {
        let c = rng.gen_range(0..population.len());
        if fitnesses[c] > fitnesses[winner] {
            winner = c;
        }
    }
    population[winner].clone()
}

/// With probability `crossover_rate`, exchange genes uniformly; otherwise
/// return clones of the parents.
pub fn crossover(
    a: &Genome,
    b: &Genome,
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Genome, Genome), GaError> {
    if !a.same_schema(b) {
        return Err(GaError::SchemaMismatch);
    }
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    if rng.gen_range(0.0..1.0) < cfg.crossover_rate {
        for i in 0..c1.genes.len() {
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut c1.genes[i].value, &mut c2.genes[i].value);
            }
        }
    }
    Ok((c1, c2))
}

/// Perturb each gene independently with probability `mutation_rate` by
/// Gaussian noise scaled to the gene's range; results stay in bounds and
/// integer genes stay integral.
pub fn mutate(genome: &Genome, cfg: &GaConfig, rng: &mut ChaCha8Rng) -> Genome {
    let mut out = genome.clone();
    for gene in out.genes.iter_mut() {
        if rng.gen_range(0.0..1.0) < cfg.mutation_rate {
            let sigma = cfg.mutation_sigma * (gene.hi - gene.lo);
            let noise = Normal::new(0.0, sigma).expect("sigma >= 0").sample(rng);
            gene.value += noise;
            gene.clamp();
        }
    }
    out
}

/// Anything that can score a genome. Implementations may be called from
/// multiple threads; caching is handled by the evolve loop.
pub trait Fitness: Sync {
    fn eval(&self, genome: &Genome) -> Result<f64, GaError>;
}

impl<F> Fitness for F
where
    F: Fn(&Genome) -> Result<f64, GaError> + Sync,
{
    fn eval(&self, genome: &Genome) -> Result<f64, GaError> {
        self(genome)
    }
}

/// Held-out fitness for the GBDT trainer: decode, fit on `train`, return
/// negative MAE on `holdout`. Counts trainer invocations for cache tests.
pub struct GbdtFitness<'a> {
    train: &'a Frame,
    holdout: &'a Frame,
    trainer_calls: AtomicUsize,
}

impl<'a> GbdtFitness<'a> {
    pub fn new(train: &'a Frame, holdout: &'a Frame) -> Self {
        GbdtFitness {
            train,
            holdout,
            trainer_calls: AtomicUsize::new(0),
        }
    }

    pub fn trainer_calls(&self) -> usize {
        self.trainer_calls.load(Ordering::Relaxed)
    }
}

impl Fitness for GbdtFitness<'_> {
    fn eval(&self, genome: &Genome) -> Result<f64, GaError> {
        self.trainer_calls.fetch_add(1, Ordering::Relaxed);
        let cfg = genome.decode()?;
        let model = fit_gbdt(self.train, &cfg)?;
        let preds = predict_gbdt(&model, self.holdout)?;
        Ok(-metrics::mae(self.holdout.y(), &preds)?)
    }
}

/// Score one genome against a train/holdout pair (no caching).
pub fn fitness(genome: &Genome, train: &Frame, holdout: &Frame) -> Result<f64, GaError> {
    GbdtFitness::new(train, holdout).eval(genome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_genome: Genome,
}

/// Per-generation trace of an evolve run.
#[derive(Debug, Clone, Default)]
pub struct GaHistory {
    pub generations: Vec<GenerationStats>,
}

impl GaHistory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("generation,best_fitness,mean_fitness,best_genome\n");
        for g in &self.generations {
            // The genome JSON is quoted; any embedded quotes are doubled.
            let json = g.best_genome.to_json().replace('"', "\"\"");
            let _ = writeln!(
                s,
                "{},{},{},\"{}\"",
                g.generation, g.best_fitness, g.mean_fitness, json
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), std::io::Error> {
        std::fs::write(path, self.to_csv())
    }
}

/// Fitness store keyed by genome value, plus deterministic batch evaluation.
struct FitnessCache {
    map: HashMap<Vec<u64>, f64>,
}

impl FitnessCache {
    fn eval_all<F: Fitness + ?Sized>(
        &mut self,
        population: &[Genome],
        fitness: &F,
    ) -> Result<Vec<f64>, GaError> {
        // Evaluate uncached unique genomes in first-appearance order; rayon
        // may run them concurrently but results are keyed back by index.
        let mut pending: Vec<(Vec<u64>, &Genome)> = Vec::new();
        for g in population {
            let key = g.cache_key();
            if !self.map.contains_key(&key) && !pending.iter().any(|(k, _)| *k == key) {
                pending.push((key, g));
            }
        }
        let results: Vec<Result<f64, GaError>> = pending
            .par_iter()
            .map(|(_, g)| fitness.eval(g))
            .collect();
        for ((key, _), res) in pending.into_iter().zip(results) {
            self.map.insert(key, res?);
        }
        Ok(population
            .iter()
            .map(|g| self.map[&g.cache_key()])
            .collect())
    }
}

/// Run the generational loop and return the all-time best genome with the
/// full history. With `generations == 0` only the initial population is
/// evaluated.
pub fn evolve<F: Fitness + ?Sized>(
    space: &SearchSpace,
    cfg: &GaConfig,
    fitness_fn: &F,
) -> Result<(Genome, GaHistory), GaError> {
    space.validate()?;
    cfg.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1); // init_population uses stream 0 of the same seed

    let mut population = init_population(space, cfg)?;
    let mut cache = FitnessCache { map: HashMap::new() };
    let mut fits = cache.eval_all(&population, fitness_fn)?;

    let mut history = GaHistory::default();
    let record =
        |generation: usize, population: &[Genome], fits: &[f64], history: &mut GaHistory| {
            let best_idx = best_index(fits);
            history.generations.push(GenerationStats {
                generation,
                best_fitness: fits[best_idx],
                mean_fitness: fits.iter().sum::<f64>() / fits.len() as f64,
                best_genome: population[best_idx].clone(),
            });
            best_idx
        };

    let mut best_idx = record(0, &population, &fits, &mut history);
    let mut all_time_best = population[best_idx].clone();
    let mut all_time_fitness = fits[best_idx];

    for generation in 1..=cfg.generations {
        // Elites first, unchanged, in fitness order.
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| fits[b].total_cmp(&fits[a]).then(a.cmp(&b)));
        let mut next: Vec<Genome> = order[..cfg.elite_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();

        while next.len() < cfg.population_size {
            let pa = tournament_select(&population, &fits, cfg, &mut rng);
            let pb = tournament_select(&population, &fits, cfg, &mut rng);
            let (c1, c2) = crossover(&pa, &pb, cfg, &mut rng)?;
            next.push(mutate(&c1, cfg, &mut rng));
            if next.len() < cfg.population_size {
                next.push(mutate(&c2, cfg, &mut rng));
            }
        }

        population = next;
        fits = cache.eval_all(&population, fitness_fn)?;
        best_idx = record(generation, &population, &fits, &mut history);
        if fits[best_idx] > all_time_fitness {
            all_time_fitness = fits[best_idx];
            all_time_best = population[best_idx].clone();
        }
    }

    Ok((all_time_best, history))
}

fn best_index(fits: &[f64]) -> usize {
    let mut best = 0;
    for (i, f) in fits.iter().enumerate() {
        if *f > fits[best] {
            best = i;
        }
    }
    best
}

/// Spec'd entry point: evolve GBDT hyperparameters against a held-out slice.
pub fn evolve_gbdt(
    space: &SearchSpace,
    cfg: &GaConfig,
    train: &Frame,
    holdout: &Frame,
) -> Result<(Genome, GaHistory), GaError> {
    let fitness = GbdtFitness::new(train, holdout);
    evolve(space, cfg, &fitness)
}
