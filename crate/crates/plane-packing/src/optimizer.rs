//! The entropic trust-region search loop: uniform torus initialization,
//! batch evaluation, feasibility-aware ranking, elite fits under the KL
//! budget, point-distribution convergence, and the shrinking-neighborhood
//! refinement stage.

use crate::emvm::{
    batch_size, concentration, fit_weighted, gibbs_sample, param_count, uniform_params,
};
use crate::packing::{tau_contact, Configuration, PackingError, PackingReport};
use crate::rng::derive;
use crate::symmetry::{
    dof_layout, group_by_name, CellBounds, DofKind, DofLayout, GroupName,
};
use crate::geometry::Shape;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("no feasible candidate was found in {0} iterations")]
    NoFeasibleCandidate(usize),
    #[error(transparent)]
    Packing(#[from] PackingError),
}

/// Knobs of one search run. `fast` is the desk-scale profile; `full`
/// matches the published budget (8000 iterations, 30 refinement rounds).
#[derive(Debug, Clone, Copy)]
pub struct SearchSettings {
    pub max_iterations: usize,
    pub kl_budget: f64,
    pub elite_fraction: f64,
    pub refine_rounds: usize,
    pub refine_shrink: f64,
    /// Initial refinement half-width as a fraction of each axis range.
    pub epsilon0: f64,
    pub seed: u64,
    /// Minimum half-width of the neighbor block (the block grows
    /// automatically for small oblique cells).
    pub neighbor_block: usize,
    pub burn_in: usize,
    /// Stop a run after this many iterations without improvement.
    pub stagnation_limit: usize,
    /// Halve the KL budget after this many stagnant iterations.
    pub kl_halving_stagnation: usize,
    /// Cell parameter ranges; defaults derived from the shape when absent.
    pub cell_bounds: Option<CellBounds>,
}

impl Default for SearchSettings {
    fn default() -> Self {
        SearchSettings::full(0)
    }
}

impl SearchSettings {
    pub fn full(seed: u64) -> Self {
        SearchSettings {
            max_iterations: 8000,
            kl_budget: 1.0,
            elite_fraction: 0.1,
            refine_rounds: 30,
            refine_shrink: 0.75,
            epsilon0: 0.1,
            seed,
            neighbor_block: 5,
            burn_in: 30,
            stagnation_limit: 500,
            kl_halving_stagnation: 50,
            cell_bounds: None,
        }
    }

    pub fn fast(seed: u64) -> Self {
        SearchSettings {
            max_iterations: 2000,
            refine_rounds: 15,
            stagnation_limit: 250,
            ..SearchSettings::full(seed)
        }
    }
}

/// One iteration of the best-so-far trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub best_density: f64,
    pub mean_violation: f64,
    pub min_concentration: f64,
}

/// Outcome of a search: the best feasible configuration ever seen, its
/// report, and the per-iteration trace.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: Configuration,
    pub report: PackingReport,
    pub trace: Vec<TracePoint>,
    pub iterations_used: usize,
    pub converged: bool,
    /// Decoded parameter values of the best candidate, in layout order.
    pub best_values: Vec<f64>,
}

/// Feasibility-aware ranking: feasible candidates first, by density
/// descending; infeasible after, by violation ascending; ties broken by
/// the lexicographic parameter vector so the order is deterministic.
pub fn rank_batch(evals: &[(Configuration, PackingReport)]) -> Vec<usize> {
    assert!(!evals.is_empty());
    let key = |c: &Configuration| -> [f64; 6] {
        [
            c.cell.a,
            c.cell.b,
            c.cell.gamma,
            c.centroid.x,
            c.centroid.y,
            c.motif_rotation,
        ]
    };
    let mut order: Vec<usize> = (0..evals.len()).collect();
    order.sort_by(|&x, &y| {
        let (cx, rx) = &evals[x];
        let (cy, ry) = &evals[y];
        match (rx.feasible, ry.feasible) {
            (true, false) => std::cmp::Ordering::Less,
            (false, true) => std::cmp::Ordering::Greater,
            (true, true) => ry
                .density
                .partial_cmp(&rx.density)
                .unwrap()
                .then_with(|| key(cx).partial_cmp(&key(cy)).unwrap()),
            (false, false) => rx
                .violation
                .partial_cmp(&ry.violation)
                .unwrap()
                .then_with(|| key(cx).partial_cmp(&key(cy)).unwrap()),
        }
    });
    order
}

struct Candidate {
    values: Vec<f64>,
    config: Configuration,
    density: f64,
    violation: f64,
    feasible: bool,
}

/// Search one fixed layout. `stream` separates the RNG streams of the
/// initial run and each refinement round.
fn search_layout(
    layout: &DofLayout,
    settings: &SearchSettings,
    stream: u64,
) -> Result<SearchResult, SearchError> {
    let dim = layout.count();
    let p = param_count(dim);
    let n_batch = batch_size(p);
    let tau = tau_contact(&layout.shape);
    let min_half = (settings.neighbor_block / 2).max(1);

    let mut params = uniform_params(dim);
    let mut kl_budget = settings.kl_budget;
    let mut best: Option<Candidate> = None;
    let mut trace = Vec::new();
    let mut stagnant = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    for iter in 0..settings.max_iterations {
        iterations = iter + 1;
        let mut batch = gibbs_sample(
            &params,
            n_batch,
            settings.burn_in,
            derive(settings.seed, stream, iter as u64),
        );

        let candidates: Vec<Candidate> = (0..batch.len())
            .into_par_iter()
            .map(|s| {
                let theta = batch.point(s);
                let values = layout.values(theta);
                let config = layout.assemble(&values);
                let density = config.density().expect("search cells are nondegenerate");
                let half = config.required_half_block().max(min_half);
                let violation = config
                    .violation_block(half)
                    .expect("search cells are nondegenerate");
                let feasible = violation <= tau;
                Candidate {
                    values,
                    config,
                    density,
                    violation,
                    feasible,
                }
            })
            .collect();

        // Rank: feasible by density, then infeasible by violation, with the
        // deterministic parameter-vector tie break.
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&x, &y| {
            let a = &candidates[x];
            let b = &candidates[y];
            match (a.feasible, b.feasible) {
                (true, false) => std::cmp::Ordering::Less,
                (false, true) => std::cmp::Ordering::Greater,
                (true, true) => b
                    .density
                    .partial_cmp(&a.density)
                    .unwrap()
                    .then_with(|| a.values.partial_cmp(&b.values).unwrap()),
                (false, false) => a
                    .violation
                    .partial_cmp(&b.violation)
                    .unwrap()
                    .then_with(|| a.values.partial_cmp(&b.values).unwrap()),
            }
        });

        let mut improved = false;
        let top = &candidates[order[0]];
        if top.feasible {
            let better = match &best {
                None => true,
                Some(b) => top.density > b.density,
            };
            if better {
                best = Some(Candidate {
                    values: top.values.clone(),
                    config: top.config.clone(),
                    density: top.density,
                    violation: top.violation,
                    feasible: true,
                });
                improved = true;
            }
        }

        let mean_violation =
            candidates.iter().map(|c| c.violation).sum::<f64>() / candidates.len() as f64;
        let conc = concentration(&batch);
        let min_conc = conc.iter().cloned().fold(f64::INFINITY, f64::min);
        trace.push(TracePoint {
            best_density: best.as_ref().map_or(0.0, |b| b.density),
            mean_violation,
            min_concentration: min_conc,
        });

        // Point-distribution convergence.
        if min_conc >= 0.999 {
            converged = true;
            break;
        }
        if improved {
            stagnant = 0;
        } else {
            stagnant += 1;
            if best.is_some() && stagnant >= settings.stagnation_limit {
                break;
            }
            if stagnant % settings.kl_halving_stagnation == 0 {
                kl_budget = (kl_budget / 2.0).max(1e-3);
            }
        }

        // Elite weights: top fraction of the ranking, linear rank decay.
        let m = ((settings.elite_fraction * n_batch as f64).ceil() as usize).clamp(1, n_batch);
        batch.weights.iter_mut().for_each(|w| *w = 0.0);
        for (r, &idx) in order[..m].iter().enumerate() {
            batch.weights[idx] = (m - r) as f64;
        }
        let wsum: f64 = batch.weights.iter().sum();
        batch.weights.iter_mut().for_each(|w| *w /= wsum);

        params = fit_weighted(&batch, &params, kl_budget).params;
    }

    let best = best.ok_or(SearchError::NoFeasibleCandidate(iterations))?;
    let report = best.config.verify(tau)?;
    Ok(SearchResult {
        best: best.config,
        report,
        trace,
        iterations_used: iterations,
        converged,
        best_values: best.values,
    })
}

/// Full ETRPA search of a shape in one plane group.
pub fn etrpa_search(
    shape: &Shape,
    group: GroupName,
    settings: &SearchSettings,
) -> Result<SearchResult, SearchError> {
    let spec = group_by_name(group);
    let bounds = settings
        .cell_bounds
        .unwrap_or_else(|| CellBounds::for_shape(shape));
    let layout = dof_layout(spec, shape, bounds);
    search_layout(&layout, settings, 0)
}

/// Refinement stage: repeated restricted searches in a toroidal box of
/// half-width ε (per axis, as a fraction of the original range) around the
/// incumbent. Improvement recenters the box without shrinking it; anything
/// else shrinks ε. The returned density is never below the input density.
pub fn refine(
    result: &SearchResult,
    shape: &Shape,
    group: GroupName,
    settings: &SearchSettings,
) -> Result<SearchResult, SearchError> {
    assert!(result.report.feasible, "refine requires a feasible incumbent");
    let spec = group_by_name(group);
    let bounds = settings
        .cell_bounds
        .unwrap_or_else(|| CellBounds::for_shape(shape));
    let base_layout = dof_layout(spec, shape, bounds);
    let ranges: Vec<f64> = base_layout
        .bounds
        .iter()
        .map(|(lo, hi)| hi - lo)
        .collect();

    let mut eps = settings.epsilon0;
    let mut best = result.clone();
    let mut trace = result.trace.clone();
    let mut iterations = result.iterations_used;

    for round in 0..settings.refine_rounds {
        let mut layout = base_layout.clone();
        for (k, kind) in layout.kinds.clone().iter().enumerate() {
            let w = eps * ranges[k];
            let center = best.best_values[k];
            let (olo, ohi) = base_layout.bounds[k];
            layout.bounds[k] = match kind {
                // Periodic axes wrap; decode folds them back into range.
                DofKind::FracX | DofKind::FracY | DofKind::MotifAngle => {
                    (center - w, center + w)
                }
                DofKind::CellA | DofKind::CellB | DofKind::CellGamma => {
                    ((center - w).max(olo), (center + w).min(ohi))
                }
            };
        }
        let sub = search_layout(&layout, settings, 1 + round as u64)?;
        iterations += sub.iterations_used;
        trace.extend_from_slice(&sub.trace);
        if sub.report.density > best.report.density {
            best = SearchResult {
                trace: Vec::new(),
                ..sub
            };
            // Improvement recenters the neighborhood but keeps its size.
        } else {
            eps *= settings.refine_shrink;
        }
    }

    Ok(SearchResult {
        best: best.best,
        report: best.report,
        trace,
        iterations_used: iterations,
        converged: best.converged,
        best_values: best.best_values,
    })
}

/// Search plus refinement in one call.
pub fn search_and_refine(
    shape: &Shape,
    group: GroupName,
    settings: &SearchSettings,
) -> Result<SearchResult, SearchError> {
    let coarse = etrpa_search(shape, group, settings)?;
    refine(&coarse, shape, group, settings)
}

/// A rank-table row: for each motif, groups sorted by density with ties
/// (within the five-decimal truncation scale) sharing a rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankEntry {
    /// Vertex count; 0 encodes the disc.
    pub n: u32,
    pub group: GroupName,
    pub density: f64,
    pub rank: usize,
}

/// Equal-density tolerance for rank ties, matching the published tables'
/// five-decimal truncation.
pub const RANK_TIE_TOLERANCE: f64 = 5e-4;

/// Build the rank table for a set of (n, group) densities. Every requested
/// cell must be present; missing ones are reported as an error.
pub fn rank_table(
    n_values: &[u32],
    groups: &[GroupName],
    density: impl Fn(u32, GroupName) -> Option<f64>,
) -> Result<Vec<RankEntry>, String> {
    let mut missing = Vec::new();
    let mut table = Vec::new();
    for &n in n_values {
        let mut row: Vec<(GroupName, f64)> = Vec::new();
        for &g in groups {
            match density(n, g) {
                Some(d) => row.push((g, d)),
                None => missing.push(format!("n={n} group={g}")),
            }
        }
        row.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap()
                .then_with(|| a.0.as_str().cmp(b.0.as_str()))
        });
        let mut rank = 0usize;
        let mut cluster_top = f64::INFINITY;
        for (g, d) in row {
            if cluster_top - d > RANK_TIE_TOLERANCE {
                rank += 1;
                cluster_top = d;
            } else if rank == 0 {
                rank = 1;
                cluster_top = d;
            }
            table.push(RankEntry {
                n,
                group: g,
                density: d,
                rank,
            });
        }
    }
    if missing.is_empty() {
        Ok(table)
    } else {
        Err(format!("missing results: {}", missing.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_disc, make_regular_ngon, Vec2};
    use crate::symmetry::CellParams;
    use std::f64::consts::PI;

    fn report(density: f64, violation: f64, feasible: bool) -> PackingReport {
        PackingReport {
            density,
            violation,
            feasible,
            contacts: 0,
        }
    }

    fn dummy_config(a: f64) -> Configuration {
        Configuration {
            group: GroupName::p1,
            cell: CellParams {
                a,
                b: 4.0,
                gamma: PI / 2.0,
            },
            centroid: Vec2::zeros(),
            motif_rotation: 0.0,
            shape: make_regular_ngon(4, 1.0, Vec2::zeros(), 0.0).unwrap(),
        }
    }

    #[test]
    fn ranking_prefers_feasible_by_density() {
        let evals = vec![
            (dummy_config(3.0), report(0.8, 0.0, true)),
            (dummy_config(4.0), report(0.9, 0.0, true)),
            (dummy_config(5.0), report(1.2, 0.7, false)),
        ];
        assert_eq!(rank_batch(&evals), vec![1, 0, 2]);
    }

    #[test]
    fn ranking_orders_infeasible_by_violation() {
        let evals = vec![
            (dummy_config(3.0), report(0.0, 3.0, false)),
            (dummy_config(4.0), report(0.0, 1.0, false)),
            (dummy_config(5.0), report(0.0, 2.0, false)),
        ];
        assert_eq!(rank_batch(&evals), vec![1, 2, 0]);
    }

    #[test]
    fn ranking_ties_are_deterministic() {
        let evals = vec![
            (dummy_config(4.0), report(0.9, 0.0, true)),
            (dummy_config(3.0), report(0.9, 0.0, true)),
        ];
        let first = rank_batch(&evals);
        for _ in 0..5 {
            assert_eq!(rank_batch(&evals), first);
        }
        // Smaller parameter vector wins the tie.
        assert_eq!(first, vec![1, 0]);
    }

    #[test]
    fn disc_in_p3_search_converges_toward_triangular_packing() {
        let disc = make_disc(1.0, Vec2::zeros()).unwrap();
        let mut settings = SearchSettings::fast(7);
        settings.max_iterations = 600;
        settings.stagnation_limit = 200;
        let result = etrpa_search(&disc, GroupName::p3, &settings).unwrap();
        assert!(result.report.feasible);
        assert!(
            result.report.density > 0.85,
            "density {} too low",
            result.report.density
        );
        assert!(result.report.density <= 1.0 + 1e-9);
        // Monotone incumbent trace.
        let mut prev = 0.0;
        for t in &result.trace {
            assert!(t.best_density + 1e-15 >= prev);
            prev = t.best_density;
        }
    }

    #[test]
    fn search_is_deterministic_for_fixed_seed() {
        let disc = make_disc(1.0, Vec2::zeros()).unwrap();
        let mut settings = SearchSettings::fast(12345);
        settings.max_iterations = 40;
        settings.stagnation_limit = 1000;
        let a = etrpa_search(&disc, GroupName::p1, &settings).unwrap();
        let b = etrpa_search(&disc, GroupName::p1, &settings).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best_values, b.best_values);
        assert_eq!(a.report.density.to_bits(), b.report.density.to_bits());
    }

    #[test]
    fn refine_never_worsens_the_incumbent() {
        let disc = make_disc(1.0, Vec2::zeros()).unwrap();
        let mut settings = SearchSettings::fast(3);
        settings.max_iterations = 250;
        settings.stagnation_limit = 120;
        settings.refine_rounds = 4;
        let coarse = etrpa_search(&disc, GroupName::p3, &settings).unwrap();
        let refined = refine(&coarse, &disc, GroupName::p3, &settings).unwrap();
        assert!(refined.report.density >= coarse.report.density);
        assert!(refined.report.feasible);
    }

    #[test]
    fn rank_table_clusters_near_equal_densities() {
        let density = |n: u32, g: GroupName| -> Option<f64> {
            Some(match (n, g) {
                (12, GroupName::p2) => 0.92820,
                (12, GroupName::p2gg) => 0.92819,
                (12, GroupName::pg) => 0.92818,
                (12, GroupName::p3) => 0.92820,
                (12, GroupName::p1) => 0.92815,
                (12, GroupName::p6) => 0.79560,
                _ => return None,
            })
        };
        let groups = [
            GroupName::p2,
            GroupName::p2gg,
            GroupName::pg,
            GroupName::p3,
            GroupName::p1,
            GroupName::p6,
        ];
        let table = rank_table(&[12], &groups, density).unwrap();
        let rank_of = |g: GroupName| table.iter().find(|e| e.group == g).unwrap().rank;
        assert_eq!(rank_of(GroupName::p2), 1);
        assert_eq!(rank_of(GroupName::p2gg), 1);
        assert_eq!(rank_of(GroupName::pg), 1);
        assert_eq!(rank_of(GroupName::p3), 1);
        assert_eq!(rank_of(GroupName::p1), 1);
        assert_eq!(rank_of(GroupName::p6), 2);
    }

    #[test]
    fn rank_table_reports_missing_cells() {
        let err = rank_table(&[5], &[GroupName::p2, GroupName::pg], |_, g| {
            (g == GroupName::p2).then_some(0.9)
        })
        .unwrap_err();
        assert!(err.contains("n=5 group=pg"), "{err}");
    }

    #[test]
    fn single_group_gets_rank_one() {
        let table = rank_table(&[7], &[GroupName::p2], |_, _| Some(0.89269)).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table[0].rank, 1);
    }
}
