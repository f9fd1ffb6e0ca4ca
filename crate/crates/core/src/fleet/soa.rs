use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::genome::{crossover, mutate, CrossoverKind, MutationKind, ScheduleGenome};
use super::resolve::{check_regulations, objective_in, ConflictIndex, Objective, Schedule};
use super::{config_err, FleetError, FleetScenario};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(default))]
pub struct SoaConfig {
    pub omega6: f64,
    pub omega7: f64,
    /// Seconds per unit of average delay inside W.
    pub delay_unit: f64,
    pub population: usize,
    pub generations: usize,
    pub t0: f64,
    pub xi: f64,
    pub t_final: f64,
    pub elite_fraction: f64,
    /// Share of the population that goes through SA acceptance.
    pub sa_fraction: f64,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Ordering jitter of the initial population (s).
    pub init_jitter: f64,
    /// Chance that an initial gene gets a random delay.
    pub init_delay_prob: f64,
    pub seed: u64,
}

impl Default for SoaConfig {
    fn default() -> Self {
        Self {
            omega6: 0.6,
            omega7: 0.4,
            delay_unit: 60.0,
            population: 50,
            generations: 200,
            t0: 100.0,
            xi: 0.99,
            t_final: 0.1,
            elite_fraction: 0.1,
            sa_fraction: 0.1,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            init_jitter: 300.0,
            init_delay_prob: 0.1,
            seed: 0,
        }
    }
}

impl SoaConfig {
    pub fn validate(&self) -> Result<(), FleetError> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.xi > 0.0 && self.xi < 1.0) {
            return Err(config_err("xi must lie in (0, 1)"));
        }
        if !(self.t_final > 0.0 && self.t_final < self.t0) {
            return Err(config_err("need 0 < t_final < t0"));
        }
        if self.generations == 0 || self.population < 2 {
            return Err(config_err("need generations > 0 and population >= 2"));
        }
        if ![self.elite_fraction, self.sa_fraction, self.crossover_rate, self.mutation_rate, self.init_delay_prob]
            .into_iter()
            .all(unit)
        {
            return Err(config_err("fractions and rates must lie in [0, 1]"));
        }
        if !(self.delay_unit > 0.0) {
            return Err(config_err("delay_unit must be > 0"));
        }
        if !(self.init_jitter >= 0.0) {
            return Err(config_err("init_jitter must be >= 0"));
        }
        Ok(())
    }

    /// Annealing temperature at generation `l`.
    pub fn temperature(&self, l: usize) -> f64 {
        (self.t0 * math::powf(self.xi, l as f64)).max(self.t_final)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub genome: ScheduleGenome,
    pub schedule: Schedule,
    pub objective: Objective,
    pub feasible: bool,
}

/// Best-ever objective after a generation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TracePoint {
    pub generation: usize,
    pub best_w: f64,
    pub t_d: f64,
    pub s: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub best: Evaluated,
    pub trace: Vec<TracePoint>,
}

fn evaluate(scenario: &FleetScenario, index: &ConflictIndex, cfg: &SoaConfig, genome: ScheduleGenome) -> Evaluated {
    let schedule = Schedule::decode(scenario, index, &genome);
    let feasible = check_regulations(scenario, &schedule).is_empty();
    let objective = objective_in(&schedule, cfg.omega6, cfg.omega7, scenario.aircraft.len(), cfg.delay_unit);
    Evaluated { genome, schedule, objective, feasible }
}

/// Min-max normalised objective, `(W_max - W) / (W_max - W_min)` over the
/// feasible individuals, so lower W scores higher. Infeasible individuals
/// score 0; if every feasible W is equal they all score 1.
pub fn normalize_fitness(w: &[f64], feasible: &[bool]) -> Vec<f64> {
    let ok = || w.iter().zip(feasible).filter(|(_, &f)| f).map(|(&x, _)| x);
    let (lo, hi) = (ok().fold(f64::INFINITY, f64::min), ok().fold(f64::NEG_INFINITY, f64::max));
    w.iter()
        .zip(feasible)
        .map(|(&x, &f)| {
            if !f {
                0.0
            } else if hi - lo <= 1e-12 * hi.abs().max(1.0) {
                1.0
            } else {
                (hi - x) / (hi - lo)
            }
        })
        .collect()
}

/// Metropolis rule on fitness (higher is better): a candidate at least as fit
/// is always taken, a worse one with probability `exp((q_cand - q_cur) / T)`.
pub fn sa_accept<R: Rng + ?Sized>(q_cur: f64, q_cand: f64, temperature: f64, rng: &mut R) -> bool {
    if q_cand >= q_cur {
        return true;
    }
    if !(temperature > 0.0) {
        return false;
    }
    rng.gen::<f64>() < math::exp((q_cand - q_cur) / temperature)
}

/// Parent pool for the next generation, as indices into the population.
///
/// Infeasible individuals are dropped. The least fit `fraction` are paired
/// at random; in each pair the better one is the incumbent and the worse one
/// survives instead only if annealing accepts it. Every slot freed this way,
/// and by dropping infeasible individuals, is refilled with the fittest
/// individuals in rank order.
pub fn sa_select<R: Rng + ?Sized>(fitness: &[f64], feasible: &[bool], fraction: f64, temperature: f64, rng: &mut R) -> Vec<usize> {
    let n = fitness.len();
    let mut ranked: Vec<usize> = (0..n).filter(|&i| feasible[i]).collect();
    if ranked.is_empty() {
        return ranked;
    }
    ranked.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    let bottom = math::ceil(fraction * ranked.len() as f64) as usize;
    let split = ranked.len() - bottom.min(ranked.len());
    let mut pool: Vec<usize> = ranked[..split].to_vec();
    let mut weak = ranked[split..].to_vec();
    weak.shuffle(rng);
    for pair in weak.chunks(2) {
        match *pair {
            [x, y] => {
                let (better, worse) = if fitness[x] >= fitness[y] { (x, y) } else { (y, x) };
                pool.push(if sa_accept(fitness[better], fitness[worse], temperature, rng) { worse } else { better });
            }
            [x] => pool.push(x),
            _ => unreachable!(),
        }
    }
    let mut top = ranked.iter().cycle();
    while pool.len() < n {
        pool.push(*top.next().unwrap());
    }
    pool
}

fn initial_population(scenario: &FleetScenario, cfg: &SoaConfig, rng: &mut ChaCha8Rng) -> Vec<ScheduleGenome> {
    let mut pop = Vec::with_capacity(cfg.population);
    pop.push(ScheduleGenome::base(scenario));
    while pop.len() < cfg.population {
        pop.push(ScheduleGenome::random(scenario, cfg.init_jitter, cfg.init_delay_prob, rng));
    }
    pop
}

struct Tracker {
    best: Option<Evaluated>,
    trace: Vec<TracePoint>,
}

impl Tracker {
    fn observe(&mut self, generation: usize, evals: &[Evaluated]) {
        for e in evals.iter().filter(|e| e.feasible) {
            if self.best.as_ref().is_none_or(|b| e.objective.w < b.objective.w) {
                self.best = Some(e.clone());
            }
        }
        if let Some(b) = &self.best {
            self.trace.push(TracePoint { generation, best_w: b.objective.w, t_d: b.objective.t_d, s: b.objective.s });
        }
    }

    fn finish(self) -> Result<OptimizationResult, FleetError> {
        let best = self.best.ok_or(FleetError::NoFeasible)?;
        Ok(OptimizationResult { best, trace: self.trace })
    }
}

fn prepare(scenario: &FleetScenario, cfg: &SoaConfig) -> Result<(), FleetError> {
    cfg.validate()?;
    scenario.validate()
}

/// Annealing-enhanced GA. Each generation evaluates the population, draws a
/// parent pool with [`sa_select`], copies the elite and breeds the rest.
/// Pairs less fit than the population mean use single-point crossover and
/// multi-point mutation; the others two-point crossover and single-point
/// mutation.
pub fn optimize_schedule(scenario: &FleetScenario, index: &ConflictIndex, cfg: &SoaConfig) -> Result<OptimizationResult, FleetError> {
    prepare(scenario, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop = initial_population(scenario, cfg, &mut rng);
    let mut tracker = Tracker { best: None, trace: Vec::with_capacity(cfg.generations) };
    let n_elite = math::ceil(cfg.elite_fraction * cfg.population as f64) as usize;

    for l in 0..cfg.generations {
        let evals: Vec<Evaluated> = pop.into_iter().map(|g| evaluate(scenario, index, cfg, g)).collect();
        tracker.observe(l, &evals);
        let w: Vec<f64> = evals.iter().map(|e| e.objective.w).collect();
        let feasible: Vec<bool> = evals.iter().map(|e| e.feasible).collect();
        let fitness = normalize_fitness(&w, &feasible);
        let mean = fitness.iter().sum::<f64>() / fitness.len() as f64;

        let mut ranked: Vec<usize> = (0..evals.len()).filter(|&i| feasible[i]).collect();
        ranked.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
        let mut next: Vec<ScheduleGenome> = ranked.iter().take(n_elite).map(|&i| evals[i].genome.clone()).collect();

        let pool = sa_select(&fitness, &feasible, cfg.sa_fraction, cfg.temperature(l), &mut rng);
        if pool.is_empty() {
            pop = initial_population(scenario, cfg, &mut rng);
            continue;
        }
        let pool_fit: Vec<f64> = pool.iter().map(|&i| fitness[i]).collect();
        while next.len() < cfg.population {
            let (i, j) = (pool[roulette(&pool_fit, &mut rng)], pool[roulette(&pool_fit, &mut rng)]);
            let weak = 0.5 * (fitness[i] + fitness[j]) < mean;
            let (xk, mk) = if weak {
                (CrossoverKind::SinglePoint, MutationKind::MultiPoint)
            } else {
                (CrossoverKind::TwoPoint, MutationKind::SinglePoint)
            };
            let (mut a, mut b) = if rng.gen_bool(cfg.crossover_rate) {
                crossover(&evals[i].genome, &evals[j].genome, xk, scenario, &mut rng)
            } else {
                (evals[i].genome.clone(), evals[j].genome.clone())
            };
            mutate(&mut a, mk, cfg.mutation_rate, scenario, &mut rng);
            mutate(&mut b, mk, cfg.mutation_rate, scenario, &mut rng);
            next.push(a);
            if next.len() < cfg.population {
                next.push(b);
            }
        }
        pop = next;
    }
    tracker.finish()
}

fn roulette<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> usize {
    let total: f64 = fitness.iter().sum();
    if !(total > 0.0) {
        return rng.gen_range(0..fitness.len());
    }
    let mut r = rng.gen::<f64>() * total;
    for (i, &f) in fitness.iter().enumerate() {
        if r < f {
            return i;
        }
        r -= f;
    }
    fitness.iter().rposition(|&f| f > 0.0).unwrap()
}

/// Plain GA with the same loop and seed discipline: fitness-proportional
/// parent selection, single-point crossover and single-point mutation only,
/// no elitism.
pub fn run_baseline_ga(scenario: &FleetScenario, index: &ConflictIndex, cfg: &SoaConfig) -> Result<OptimizationResult, FleetError> {
    prepare(scenario, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop = initial_population(scenario, cfg, &mut rng);
    let mut tracker = Tracker { best: None, trace: Vec::with_capacity(cfg.generations) };

    for l in 0..cfg.generations {
        let evals: Vec<Evaluated> = pop.into_iter().map(|g| evaluate(scenario, index, cfg, g)).collect();
        tracker.observe(l, &evals);
        let w: Vec<f64> = evals.iter().map(|e| e.objective.w).collect();
        let feasible: Vec<bool> = evals.iter().map(|e| e.feasible).collect();
        let fitness = normalize_fitness(&w, &feasible);
        let mut next = Vec::with_capacity(cfg.population);
        while next.len() < cfg.population {
            let (i, j) = (roulette(&fitness, &mut rng), roulette(&fitness, &mut rng));
            let (mut a, mut b) = if rng.gen_bool(cfg.crossover_rate) {
                crossover(&evals[i].genome, &evals[j].genome, CrossoverKind::SinglePoint, scenario, &mut rng)
            } else {
                (evals[i].genome.clone(), evals[j].genome.clone())
            };
            mutate(&mut a, MutationKind::SinglePoint, cfg.mutation_rate, scenario, &mut rng);
            mutate(&mut b, MutationKind::SinglePoint, cfg.mutation_rate, scenario, &mut rng);
            next.push(a);
            if next.len() < cfg.population {
                next.push(b);
            }
        }
        pop = next;
    }
    tracker.finish()
}
