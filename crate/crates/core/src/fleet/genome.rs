use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::FleetScenario;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Gene {
    pub flight: usize,
    /// Minimum delay (s), a multiple of the delay quantum.
    pub delay: u32,
}

/// Conflict-resolution order and per-flight delay floors.
///
/// Valid genomes list every flight exactly once, keep each aircraft's
/// flights in number order, and hold delays between 0 and the flight's cap.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduleGenome {
    pub genes: Vec<Gene>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverKind {
    SinglePoint,
    TwoPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutationKind {
    SinglePoint,
    MultiPoint,
}

/// Largest allowed delay gene for a flight.
fn max_delay(scenario: &FleetScenario, flight: usize) -> u32 {
    let q = scenario.regulations.delay_quantum;
    (math::floor(scenario.flights[flight].cap / q + 1e-9) * q) as u32
}

fn random_delay<R: Rng + ?Sized>(scenario: &FleetScenario, flight: usize, rng: &mut R) -> u32 {
    let q = scenario.regulations.delay_quantum;
    let steps = (max_delay(scenario, flight) as f64 / q) as u32;
    (rng.gen_range(0..=steps) as f64 * q) as u32
}

impl ScheduleGenome {
    /// Departure order (ties by aircraft, then flight number) with no delays.
    pub fn base(scenario: &FleetScenario) -> Self {
        let f = &scenario.flights;
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|&a, &b| {
            f[a].departure.total_cmp(&f[b].departure).then(f[a].aircraft.cmp(&f[b].aircraft)).then(f[a].number.cmp(&f[b].number))
        });
        Self { genes: order.into_iter().map(|flight| Gene { flight, delay: 0 }).collect() }
    }

    /// Orders flights by departure plus uniform jitter in `[0, jitter)` and
    /// gives each flight a random delay with probability `p_delay`.
    pub fn random<R: Rng + ?Sized>(scenario: &FleetScenario, jitter: f64, p_delay: f64, rng: &mut R) -> Self {
        let f = &scenario.flights;
        let keys: Vec<f64> = f.iter().map(|x| x.departure + if jitter > 0.0 { rng.gen_range(0.0..jitter) } else { 0.0 }).collect();
        let mut order: Vec<usize> = (0..f.len()).collect();
        order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
        let genes = order
            .into_iter()
            .map(|flight| {
                let delay = if rng.gen_bool(p_delay) { random_delay(scenario, flight, rng) } else { 0 };
                Gene { flight, delay }
            })
            .collect();
        let mut g = Self { genes };
        g.repair(scenario);
        g
    }

    /// Restores the genome invariants: duplicates dropped and missing flights
    /// appended, each aircraft's flights put back in number order within the
    /// slots they occupy, and delays snapped into `[0, cap]` on the quantum.
    pub fn repair(&mut self, scenario: &FleetScenario) {
        let flights = &scenario.flights;
        let n = flights.len();
        let mut seen = vec![false; n];
        self.genes.retain(|g| g.flight < n && !core::mem::replace(&mut seen[g.flight], true));
        for (flight, s) in seen.iter().enumerate() {
            if !s {
                self.genes.push(Gene { flight, delay: 0 });
            }
        }
        let mut slots: Vec<Vec<usize>> = vec![Vec::new(); scenario.aircraft.len()];
        for (pos, g) in self.genes.iter().enumerate() {
            slots[flights[g.flight].aircraft].push(pos);
        }
        for s in &slots {
            let mut mine: Vec<Gene> = s.iter().map(|&p| self.genes[p]).collect();
            mine.sort_by_key(|g| flights[g.flight].number);
            for (&p, g) in s.iter().zip(mine) {
                self.genes[p] = g;
            }
        }
        let q = scenario.regulations.delay_quantum;
        for g in &mut self.genes {
            let snapped = (math::floor(g.delay as f64 / q + 1e-9) * q) as u32;
            g.delay = snapped.min(max_delay(scenario, g.flight));
        }
    }

    pub fn is_valid(&self, scenario: &FleetScenario) -> bool {
        let flights = &scenario.flights;
        if self.genes.len() != flights.len() {
            return false;
        }
        let mut seen = vec![false; flights.len()];
        let mut last: Vec<u32> = vec![0; scenario.aircraft.len()];
        let q = scenario.regulations.delay_quantum;
        for g in &self.genes {
            if g.flight >= flights.len() || core::mem::replace(&mut seen[g.flight], true) {
                return false;
            }
            let f = &flights[g.flight];
            if f.number <= last[f.aircraft] {
                return false;
            }
            last[f.aircraft] = f.number;
            let steps = g.delay as f64 / q;
            if g.delay > max_delay(scenario, g.flight) || (steps - math::round(steps)).abs() > 1e-9 {
                return false;
            }
        }
        true
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }
}

/// `a`'s genes before the cut, then the remaining flights in `b`'s order with
/// `b`'s delays.
fn splice(a: &ScheduleGenome, b: &ScheduleGenome, c1: usize, c2: usize) -> ScheduleGenome {
    let n = a.genes.len();
    let mut inside = vec![false; n];
    for g in &a.genes[c1..c2] {
        inside[g.flight] = true;
    }
    let mut genes = a.genes[..c1].to_vec();
    genes.extend(b.genes.iter().filter(|g| inside[g.flight]));
    genes.extend_from_slice(&a.genes[c2..]);
    ScheduleGenome { genes }
}

/// Offspring pair. Single-point keeps each parent's prefix up to a random cut
/// and takes the rest from the other parent (a cut at 0 swaps the parents).
/// Two-point re-orders a random interior segment after the other parent.
pub fn crossover<R: Rng + ?Sized>(
    a: &ScheduleGenome,
    b: &ScheduleGenome,
    kind: CrossoverKind,
    scenario: &FleetScenario,
    rng: &mut R,
) -> (ScheduleGenome, ScheduleGenome) {
    let n = a.genes.len();
    if n == 0 {
        return (a.clone(), b.clone());
    }
    let (c1, c2) = match kind {
        CrossoverKind::SinglePoint => (rng.gen_range(0..n), n),
        CrossoverKind::TwoPoint => {
            let x = rng.gen_range(0..=n);
            let y = rng.gen_range(0..=n);
            (x.min(y), x.max(y))
        }
    };
    let mut c = splice(a, b, c1, c2);
    let mut d = splice(b, a, c1, c2);
    c.repair(scenario);
    d.repair(scenario);
    (c, d)
}

/// Single-point: with probability `rate`, one random gene gets a different
/// delay. Multi-point: every gene is resampled with probability `rate`, and
/// with the same probability two random slots swap.
pub fn mutate<R: Rng + ?Sized>(
    genome: &mut ScheduleGenome,
    kind: MutationKind,
    rate: f64,
    scenario: &FleetScenario,
    rng: &mut R,
) {
    let n = genome.genes.len();
    if n == 0 || rate <= 0.0 {
        return;
    }
    let rate = rate.min(1.0);
    match kind {
        MutationKind::SinglePoint => {
            if rng.gen_bool(rate) {
                let g = &mut genome.genes[rng.gen_range(0..n)];
                let q = scenario.regulations.delay_quantum as u32;
                let steps = max_delay(scenario, g.flight) / q.max(1);
                if steps > 0 {
                    // uniform over the other allowed values
                    let mut s = rng.gen_range(0..steps);
                    if s >= g.delay / q.max(1) {
                        s += 1;
                    }
                    g.delay = s * q;
                }
            }
        }
        MutationKind::MultiPoint => {
            for x in 0..n {
                if rng.gen_bool(rate) {
                    genome.genes[x].delay = random_delay(scenario, genome.genes[x].flight, rng);
                }
            }
            if n > 1 && rng.gen_bool(rate) {
                let idx: Vec<usize> = (0..n).collect();
                let pick: Vec<&usize> = idx.choose_multiple(rng, 2).collect();
                genome.genes.swap(*pick[0], *pick[1]);
            }
            genome.repair(scenario);
        }
    }
}
