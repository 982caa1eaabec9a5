//! Genetic search over connected graph topologies with the spectral
//! deformation `D_n` as fitness.
//!
//! One run: a seeded population of path-plus-random-edge graphs, truncation
//! selection of the top half, edge-intersection crossover (with connectivity
//! repair and an optional diversity edge), add-only mutation and single-elite
//! carry-over. Every random draw comes from a stream keyed by
//! `(seed, generation, slot)`, so results do not depend on evaluation order.

use std::cmp::Ordering;
use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{add_random_missing_edge, random_connected_init, Edge, Graph};
use crate::hamiltonian::{check_size, SpinSystemParams, DEFAULT_SIZE_CAP};
use crate::rng::stream;
use crate::spectral::spectral_deformation_dn;
use crate::thermal::thermal_qfi_sld;

/// Largest node count accepted by [`exhaustive_best`].
pub const EXHAUSTIVE_MAX_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossoverMode {
    /// Child keeps the edges common to both parents.
    Intersection,
    /// Child keeps every edge of either parent.
    Union,
}

impl std::str::FromStr for CrossoverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(CrossoverMode::Intersection),
            "union" => Ok(CrossoverMode::Union),
            other => Err(Error::InvalidParameter(format!("unknown crossover mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub n: usize,
    pub population: usize,
    pub generations: usize,
    pub mutation_prob: f64,
    pub crossover_extra_edge_prob: f64,
    pub crossover_mode: CrossoverMode,
    /// Upper bound on random extra edges in the initial population; `None` means `n`.
    pub extra_edge_budget: Option<usize>,
    pub physics: SpinSystemParams,
    pub seed: u64,
    /// Evaluate the thermal Fisher information of the winner.
    pub compute_qfi: bool,
    pub size_cap: usize,
}

impl GaConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        GaConfig {
            n,
            population: 100,
            generations: 15,
            mutation_prob: 0.3,
            crossover_extra_edge_prob: 0.5,
            crossover_mode: CrossoverMode::Intersection,
            extra_edge_budget: None,
            physics: SpinSystemParams::default(),
            seed,
            compute_qfi: true,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_size(self.n, self.size_cap)?;
        if self.population < 2 {
            return Err(Error::InvalidParameter("population must be at least 2".into()));
        }
        if self.generations < 1 {
            return Err(Error::InvalidParameter("need at least one generation".into()));
        }
        for (name, p) in [
            ("mutation_prob", self.mutation_prob),
            ("crossover_extra_edge_prob", self.crossover_extra_edge_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
            }
        }
        self.physics.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_graph: Graph,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub best_graph: Graph,
    pub best_dn: f64,
    pub best_qfi: Option<f64>,
    /// First generation whose best fitness reaches the final best.
    pub first_hit_generation: usize,
    pub distinct_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaRunRecord {
    pub config: GaConfig,
    pub seed: u64,
    pub generations: Vec<GenerationRecord>,
    pub summary: RunSummary,
}

impl GaRunRecord {
    /// Best fitness never decreases from one generation to the next.
    pub fn is_elitist(&self) -> bool {
        self.generations
            .windows(2)
            .all(|w| w[1].best_fitness >= w[0].best_fitness)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialization is infallible")
    }
}

fn random_pair_between_components<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> Option<Edge> {
    let comp = g.components();
    let mut candidates = Vec::new();
    for u in 0..g.n() {
        for v in (u + 1)..g.n() {
            if comp[u] != comp[v] {
                candidates.push((u, v));
            }
        }
    }
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.random_range(0..candidates.len())])
    }
}

/// Combines two parents, repairs connectivity, then adds one diversity edge
/// with probability `extra_edge_prob`.
pub fn crossover<R: Rng + ?Sized>(
    a: &Graph,
    b: &Graph,
    mode: CrossoverMode,
    extra_edge_prob: f64,
    rng: &mut R,
) -> Result<Graph> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let edges: Vec<Edge> = match mode {
        CrossoverMode::Intersection => a
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| b.has_edge(u, v))
            .collect(),
        CrossoverMode::Union => a.edges().iter().chain(b.edges()).copied().collect(),
    };
    let mut child = Graph::new(a.n(), edges)?;
    while let Some((u, v)) = random_pair_between_components(&child, rng) {
        child = child.with_edge(u, v)?;
    }
    if rng.random_bool(extra_edge_prob) {
        child = add_random_missing_edge(&child, rng);
    }
    Ok(child)
}

/// Add-only mutation: one random missing edge with probability `mutation_prob`.
pub fn mutate<R: Rng + ?Sized>(g: &Graph, mutation_prob: f64, rng: &mut R) -> Graph {
    if rng.random_bool(mutation_prob) {
        add_random_missing_edge(g, rng)
    } else {
        g.clone()
    }
}

/// Descending fitness, then ascending canonical key.
fn rank_order(a: (&Graph, f64), b: (&Graph, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.edges().cmp(b.0.edges()))
}

struct FitnessCache {
    physics: SpinSystemParams,
    values: HashMap<Vec<Edge>, f64>,
}

impl FitnessCache {
    fn evaluate(&mut self, population: &[Graph]) -> Result<Vec<f64>> {
        let mut pending: Vec<&Graph> = Vec::new();
        for g in population {
            if !self.values.contains_key(g.edges()) && !pending.iter().any(|p| p == &g) {
                pending.push(g);
            }
        }
        let physics = self.physics;
        let fresh: Vec<Result<f64>> = pending
            .par_iter()
            .map(|g| spectral_deformation_dn(g, &physics))
            .collect();
        for (g, value) in pending.into_iter().zip(fresh) {
            self.values.insert(g.canonical_key(), value?);
        }
        Ok(population.iter().map(|g| self.values[g.edges()]).collect())
    }
}

pub fn evolve(config: &GaConfig) -> Result<GaRunRecord> {
    evolve_with(config, |_, _| {})
}

/// Runs the GA, handing every evaluated population to `observe`.
pub fn evolve_with(
    config: &GaConfig,
    mut observe: impl FnMut(usize, &[Graph]),
) -> Result<GaRunRecord> {
    config.validate()?;
    let n = config.n;
    let p = config.population;
    let budget = config.extra_edge_budget.unwrap_or(n);
    let mut cache = FitnessCache {
        physics: config.physics,
        values: HashMap::new(),
    };

    let mut population: Vec<Graph> = (0..p)
        .map(|slot| random_connected_init(n, budget, &mut stream(config.seed, 0, slot as u32)))
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(config.generations);
    for generation in 0..config.generations {
        observe(generation, &population);
        let fitness = cache.evaluate(&population)?;
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&x, &y| rank_order((&population[x], fitness[x]), (&population[y], fitness[y])));
        let best = order[0];
        records.push(GenerationRecord {
            generation,
            best_graph: population[best].clone(),
            best_fitness: fitness[best],
            mean_fitness: fitness.iter().sum::<f64>() / p as f64,
        });
        if generation + 1 == config.generations {
            break;
        }

        let parents: Vec<&Graph> = order[..p.div_ceil(2)].iter().map(|&i| &population[i]).collect();
        let mut next = Vec::with_capacity(p);
        next.push(population[best].clone());
        for slot in 1..p {
            let mut rng = stream(config.seed, generation as u32 + 1, slot as u32);
            let i = rng.random_range(0..parents.len());
            let j = if parents.len() >= 2 {
                let k = rng.random_range(0..parents.len() - 1);
                if k >= i {
                    k + 1
                } else {
                    k
                }
            } else {
                i
            };
            let child = crossover(
                parents[i],
                parents[j],
                config.crossover_mode,
                config.crossover_extra_edge_prob,
                &mut rng,
            )?;
            next.push(mutate(&child, config.mutation_prob, &mut rng));
        }
        population = next;
    }

    let last = records.last().expect("at least one generation");
    let best_graph = last.best_graph.clone();
    let best_dn = last.best_fitness;
    let tol = 1e-12 * best_dn.abs().max(1.0);
    let first_hit_generation = records
        .iter()
        .position(|r| r.best_fitness >= best_dn - tol)
        .unwrap_or(0);
    let best_qfi = if config.compute_qfi && config.physics.t > 0.0 {
        Some(thermal_qfi_sld(&best_graph, &config.physics)?.value)
    } else {
        None
    };
    Ok(GaRunRecord {
        config: config.clone(),
        seed: config.seed,
        generations: records,
        summary: RunSummary {
            best_graph,
            best_dn,
            best_qfi,
            first_hit_generation,
            distinct_evaluations: cache.values.len(),
        },
    })
}

/// All labeled connected graphs on `n` nodes, in ascending edge-mask order.
pub fn connected_labeled_graphs(n: usize) -> Result<Vec<Graph>> {
    if n == 0 || n > EXHAUSTIVE_MAX_NODES {
        return Err(Error::InvalidSize(format!(
            "exhaustive enumeration supports 1..={EXHAUSTIVE_MAX_NODES} nodes, got {n}"
        )));
    }
    let pairs: Vec<Edge> = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, e)| *e);
        let g = Graph::new(n, edges.collect::<Vec<_>>())?;
        if g.is_connected() {
            out.push(g);
        }
    }
    Ok(out)
}

/// Brute-force maximum of `D_n` over every labeled connected graph.
pub fn exhaustive_best(n: usize, p: &SpinSystemParams) -> Result<(Graph, f64)> {
    let graphs = connected_labeled_graphs(n)?;
    let fitness: Vec<f64> = graphs
        .par_iter()
        .map(|g| spectral_deformation_dn(g, p))
        .collect::<Result<_>>()?;
    let best = (0..graphs.len())
        .min_by(|&x, &y| rank_order((&graphs[x], fitness[x]), (&graphs[y], fitness[y])))
        .expect("at least one connected graph");
    Ok((graphs[best].clone(), fitness[best]))
}
