//! Table-aggregation planning under a memory budget.
//!
//! [`plan`] decides which aggregates of functional blocks become lookup
//! tables. It is a recursive enclose-and-release loop:
//!
//! 1. Enclose the whole remaining system in one table boundary. If the
//!    implied table fits the remaining budget, commit it.
//! 2. Otherwise repeatedly release the computationally lightest enclosed
//!    block. Releasing a block also releases every member that depends on
//!    its output through released or outside blocks, which keeps the
//!    boundary consumer-closed; if the boundary falls apart, the heaviest
//!    connected piece is kept. When a single block remains and still does
//!    not fit, its declared segmentation replaces it with finer sub-blocks
//!    and the release loop continues inside them; a block with no
//!    segmentation is left computational. While working inside a
//!    segmented region, the boundary is re-initialized around the whole
//!    remaining system as soon as its enclosed cost stops dominating
//!    every untabled block outside.
//! 3. Commit the fitting boundary as a table, deduct its footprint, and
//!    start over on the remainder until the budget is exhausted or
//!    everything is tabled.
//!
//! The loop is greedy and therefore sub-optimal. [`exhaustive_plan`]
//! enumerates every disjoint family of valid aggregates on small graphs
//! and maximizes the speedup outright; it exists as the oracle that
//! bounds what the greedy loop gives up.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::model::{
    boundary_stats, AccelMetrics, BlockGraph, BlockId, ModelError, Platform, Rational,
    TableBoundary, TableCosts,
};

/// Block-count guard for [`exhaustive_plan`].
pub const EXHAUSTIVE_MAX_BLOCKS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanError {
    /// The table budget exceeds the platform's memory.
    BudgetExceedsMemory,
    /// Too many blocks for exhaustive enumeration.
    TooLarge { blocks: usize, limit: usize },
    Model(ModelError),
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanError::BudgetExceedsMemory => {
                write!(f, "table budget exceeds the platform memory")
            }
            PlanError::TooLarge { blocks, limit } => {
                write!(f, "{blocks} blocks exceed the exhaustive search limit of {limit}")
            }
            PlanError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl From<ModelError> for PlanError {
    fn from(e: ModelError) -> Self {
        PlanError::Model(e)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PlanError {}

/// One committed table.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanTable {
    pub boundary: TableBoundary,
    /// Estimated per-use management cost on the target platform.
    pub management_cost: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Every block ended up inside a table.
    FullyTabled,
    /// Some blocks stayed computational for lack of memory (or of a
    /// segmentation fine enough to make them fit).
    MemoryExhausted,
}

/// Outcome of planning: committed tables in commit order, the blocks left
/// computational, and why planning stopped.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub tables: Vec<PlanTable>,
    pub residual: Vec<BlockId>,
    pub residual_cost: Rational,
    pub termination: Termination,
    pub diagnostics: Vec<String>,
}

impl Plan {
    pub fn total_table_bytes(&self) -> BigUint {
        self.tables.iter().fold(BigUint::zero(), |acc, t| acc + &t.boundary.table_bytes)
    }

    pub fn tabled_cost(&self) -> Rational {
        self.tables.iter().map(|t| t.boundary.enclosed_cost.clone()).sum()
    }

    /// Headline figures for this plan on `platform`.
    pub fn metrics(&self, platform: &Platform) -> Result<AccelMetrics, ModelError> {
        let costs: Vec<TableCosts> = self
            .tables
            .iter()
            .map(|t| TableCosts {
                tabled_cost: t.boundary.enclosed_cost.clone(),
                management_cost: t.management_cost.clone(),
                table_bytes: t.boundary.table_bytes.clone(),
            })
            .collect();
        AccelMetrics::compute(&costs, &self.residual_cost, platform)
    }
}

/// Drop members fed (through non-members) by member outputs. Removing
/// them restores consumer-closure after a release opens a hole.
fn closure_fixpoint(graph: &BlockGraph, members: &mut BTreeSet<usize>) {
    loop {
        let mut marked: BTreeSet<usize> = BTreeSet::new();
        let mut stack: Vec<usize> = members
            .iter()
            .flat_map(|&m| graph.consumers(m).iter().copied())
            .filter(|c| !members.contains(c))
            .collect();
        while let Some(n) = stack.pop() {
            if !marked.insert(n) {
                continue;
            }
            for &next in graph.consumers(n) {
                if !members.contains(&next) {
                    stack.push(next);
                }
            }
        }
        let violators: Vec<usize> = members
            .iter()
            .copied()
            .filter(|&m| graph.producers(m).iter().any(|p| marked.contains(p)))
            .collect();
        if violators.is_empty() {
            return;
        }
        for v in violators {
            members.remove(&v);
        }
    }
}

/// Keep the heaviest weakly-connected component (ties to the one holding
/// the smallest block index).
fn keep_main_component(graph: &BlockGraph, members: &mut BTreeSet<usize>) {
    if members.len() <= 1 {
        return;
    }
    let mut unvisited = members.clone();
    let mut best: Option<(Rational, usize, BTreeSet<usize>)> = None;
    while let Some(&start) = unvisited.iter().next() {
        let mut component = BTreeSet::new();
        let mut stack = alloc::vec![start];
        while let Some(n) = stack.pop() {
            if !component.insert(n) {
                continue;
            }
            unvisited.remove(&n);
            for &next in graph.consumers(n).iter().chain(graph.producers(n)) {
                if members.contains(&next) && !component.contains(&next) {
                    stack.push(next);
                }
            }
        }
        let cost: Rational = component.iter().map(|&i| graph.block_at(i).cost.clone()).sum();
        let min_idx = *component.iter().next().expect("component is non-empty");
        let better = match &best {
            None => true,
            Some((best_cost, best_min, _)) => {
                cost > *best_cost || (cost == *best_cost && min_idx < *best_min)
            }
        };
        if better {
            best = Some((cost, min_idx, component));
        }
    }
    *members = best.expect("at least one component").2;
}

fn normalize_boundary(graph: &BlockGraph, mut members: BTreeSet<usize>) -> BTreeSet<usize> {
    closure_fixpoint(graph, &mut members);
    keep_main_component(graph, &mut members);
    members
}

fn indices_of(graph: &BlockGraph, ids: &BTreeSet<BlockId>) -> BTreeSet<usize> {
    ids.iter().map(|id| graph.index_of(id).expect("id tracked in working graph")).collect()
}

fn ids_of(graph: &BlockGraph, indices: &BTreeSet<usize>) -> BTreeSet<BlockId> {
    indices.iter().map(|&i| graph.block_at(i).id.clone()).collect()
}

/// Greedy enclose-release-commit planning.
pub fn plan(graph: &BlockGraph, platform: &Platform, budget: &BigUint) -> Result<Plan, PlanError> {
    if budget > &platform.memory_bytes {
        return Err(PlanError::BudgetExceedsMemory);
    }

    let mut work = graph.clone();
    let mut tabled: BTreeSet<BlockId> = BTreeSet::new();
    let mut residual: BTreeSet<BlockId> = BTreeSet::new();
    let mut tables: Vec<PlanTable> = Vec::new();
    let mut diagnostics: Vec<String> = Vec::new();
    let mut remaining = budget.clone();

    'outer: loop {
        let active: BTreeSet<BlockId> = work
            .ids()
            .filter(|id| !tabled.contains(*id) && !residual.contains(*id))
            .cloned()
            .collect();
        if active.is_empty() {
            break;
        }
        let mut boundary = normalize_boundary(&work, indices_of(&work, &active));
        let mut segmented_mode = false;

        loop {
            debug_assert!(!boundary.is_empty(), "normalization keeps a member");
            if boundary.is_empty() {
                break 'outer;
            }
            let stats = boundary_stats(&work, &boundary);
            if stats.table_bytes <= remaining {
                let member_ids = ids_of(&work, &boundary);
                let tb = TableBoundary::compute(&work, &member_ids)
                    .expect("normalized boundary is valid");
                remaining -= &tb.table_bytes;
                let management_cost = tb.management_cost(platform);
                tabled.extend(member_ids);
                tables.push(PlanTable { boundary: tb, management_cost });
                continue 'outer;
            }

            if boundary.len() == 1 {
                let idx = *boundary.iter().next().expect("singleton");
                let id = work.block_at(idx).id.clone();
                if work.block_at(idx).segmentation.is_some() {
                    let before: BTreeSet<BlockId> = work.ids().cloned().collect();
                    work = work.apply_segmentation(&id)?;
                    let sub_ids: BTreeSet<BlockId> =
                        work.ids().filter(|b| !before.contains(*b)).cloned().collect();
                    diagnostics.push(format!(
                        "atomicity limit: segmented {id} into {} sub-blocks",
                        sub_ids.len()
                    ));
                    boundary = normalize_boundary(&work, indices_of(&work, &sub_ids));
                    segmented_mode = true;
                    continue;
                }
                residual.insert(id.clone());
                diagnostics.push(format!(
                    "block {id} hit the atomicity limit with no segmentation; left computational"
                ));
                continue 'outer;
            }

            // Release the computationally lightest block; ties go to the
            // lowest id.
            let victim = boundary
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    let (ba, bb) = (work.block_at(a), work.block_at(b));
                    ba.cost.cmp(&bb.cost).then_with(|| ba.id.cmp(&bb.id))
                })
                .expect("boundary is non-empty");
            boundary.remove(&victim);
            boundary = normalize_boundary(&work, boundary);

            if segmented_mode && !boundary.is_empty() {
                let enclosed: Rational =
                    boundary.iter().map(|&i| work.block_at(i).cost.clone()).sum();
                let outside_max = work
                    .ids()
                    .filter(|id| !tabled.contains(*id) && !residual.contains(*id))
                    .filter(|id| {
                        let idx = work.index_of(id).expect("known id");
                        !boundary.contains(&idx)
                    })
                    .map(|id| work.block(id).expect("known id").cost.clone())
                    .max();
                if let Some(max) = outside_max {
                    if enclosed <= max {
                        diagnostics.push(String::from(
                            "segmented boundary no longer dominates; re-enclosing the remainder",
                        ));
                        let everything: BTreeSet<BlockId> = work
                            .ids()
                            .filter(|id| !tabled.contains(*id) && !residual.contains(*id))
                            .cloned()
                            .collect();
                        boundary = normalize_boundary(&work, indices_of(&work, &everything));
                        segmented_mode = false;
                    }
                }
            }
        }
    }

    let residual_cost: Rational = residual
        .iter()
        .map(|id| work.block(id).expect("residual id tracked").cost.clone())
        .sum();
    let termination =
        if residual.is_empty() { Termination::FullyTabled } else { Termination::MemoryExhausted };
    Ok(Plan {
        tables,
        residual: residual.into_iter().collect(),
        residual_cost,
        termination,
        diagnostics,
    })
}

struct Aggregate {
    mask: u32,
    boundary: TableBoundary,
    management_cost: Rational,
    gain: Rational,
}

/// Optimal aggregation by enumeration, for graphs of at most
/// [`EXHAUSTIVE_MAX_BLOCKS`] blocks.
///
/// Every connected, consumer-closed aggregate that fits the budget is a
/// candidate; the search picks the disjoint family that maximizes the
/// speedup (equivalently, the total saved cost net of management) under
/// the budget. Declared segmentations are not applied: the graph is taken
/// at the granularity it already has.
pub fn exhaustive_plan(
    graph: &BlockGraph,
    platform: &Platform,
    budget: &BigUint,
) -> Result<Plan, PlanError> {
    if budget > &platform.memory_bytes {
        return Err(PlanError::BudgetExceedsMemory);
    }
    let n = graph.len();
    if n > EXHAUSTIVE_MAX_BLOCKS {
        return Err(PlanError::TooLarge { blocks: n, limit: EXHAUSTIVE_MAX_BLOCKS });
    }

    let ids: Vec<BlockId> = graph.ids().cloned().collect();
    let mut aggregates: Vec<Aggregate> = Vec::new();
    for mask in 1u32..(1 << n) {
        let members: BTreeSet<BlockId> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| ids[i].clone())
            .collect();
        let Ok(boundary) = TableBoundary::compute(graph, &members) else { continue };
        if &boundary.table_bytes > budget {
            continue;
        }
        let management_cost = boundary.management_cost(platform);
        let gain = &boundary.enclosed_cost - &management_cost;
        aggregates.push(Aggregate { mask, boundary, management_cost, gain });
    }

    struct Search<'a> {
        aggregates: &'a [Aggregate],
        n: usize,
        best_gain: Rational,
        best: Vec<usize>,
    }

    impl Search<'_> {
        fn run(
            &mut self,
            covered: u32,
            budget_left: &BigUint,
            chosen: &mut Vec<usize>,
            gain: &Rational,
        ) {
            let Some(next) = (0..self.n).find(|i| covered & (1 << i) == 0) else {
                if *gain > self.best_gain {
                    self.best_gain = gain.clone();
                    self.best = chosen.clone();
                }
                return;
            };
            for (idx, agg) in self.aggregates.iter().enumerate() {
                if agg.mask & (1 << next) == 0 || agg.mask & covered != 0 {
                    continue;
                }
                if &agg.boundary.table_bytes > budget_left {
                    continue;
                }
                chosen.push(idx);
                let left = budget_left - &agg.boundary.table_bytes;
                let total = gain + &agg.gain;
                self.run(covered | agg.mask, &left, chosen, &total);
                chosen.pop();
            }
            // Leave `next` computational.
            self.run(covered | (1 << next), budget_left, chosen, gain);
        }
    }

    let mut search =
        Search { aggregates: &aggregates, n, best_gain: Rational::zero(), best: Vec::new() };
    search.run(0, budget, &mut Vec::new(), &Rational::zero());

    let mut chosen: Vec<&Aggregate> = search.best.iter().map(|&i| &aggregates[i]).collect();
    chosen.sort_by_key(|a| a.mask.trailing_zeros());
    let mut covered = 0u32;
    let tables: Vec<PlanTable> = chosen
        .iter()
        .map(|a| {
            covered |= a.mask;
            PlanTable { boundary: a.boundary.clone(), management_cost: a.management_cost.clone() }
        })
        .collect();
    let residual: Vec<BlockId> =
        (0..n).filter(|i| covered & (1 << i) == 0).map(|i| ids[i].clone()).collect();
    let residual_cost: Rational =
        residual.iter().map(|id| graph.block(id).expect("known id").cost.clone()).sum();
    let termination =
        if residual.is_empty() { Termination::FullyTabled } else { Termination::MemoryExhausted };
    Ok(Plan { tables, residual, residual_cost, termination, diagnostics: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ratio, CostConvention, FunctionalBlock, LatencyModel, SegmentationRule};
    use alloc::vec;

    fn platform() -> Platform {
        Platform::new(
            ratio(100, 1),
            BigUint::from(1u64 << 40),
            ratio(1, 100),
            ratio(1, 100),
            LatencyModel::flat(ratio(1, 10)),
        )
        .unwrap()
    }

    fn block(id: &str, cost: i64, items: u64) -> FunctionalBlock {
        FunctionalBlock::new(id, ratio(cost, 1), items, 2, 1)
    }

    fn chain_edges(ids: &[&str]) -> Vec<(BlockId, BlockId)> {
        ids.windows(2).map(|w| (w[0].into(), w[1].into())).collect()
    }

    #[test]
    fn single_fitting_block_is_fully_tabled() {
        let graph = BlockGraph::new(
            vec![block("only", 4, 8)], // 2^8 entries of 1 byte = 256 B
            vec![],
            CostConvention::CpuTime,
        )
        .unwrap();
        let plan = plan(&graph, &platform(), &BigUint::from(1024u32)).unwrap();
        assert_eq!(plan.termination, Termination::FullyTabled);
        assert_eq!(plan.tables.len(), 1);
        assert_eq!(plan.tables[0].boundary.table_bytes, BigUint::from(256u32));
        assert!(plan.residual.is_empty());
    }

    #[test]
    fn zero_budget_leaves_everything_computational() {
        let graph = BlockGraph::new(
            vec![block("a", 1, 4), block("b", 2, 4)],
            chain_edges(&["a", "b"]),
            CostConvention::CpuTime,
        )
        .unwrap();
        let plan = plan(&graph, &platform(), &BigUint::zero()).unwrap();
        assert!(plan.tables.is_empty());
        assert_eq!(plan.termination, Termination::MemoryExhausted);
        assert_eq!(plan.residual.len(), 2);
        let metrics = plan.metrics(&platform()).unwrap();
        assert_eq!(metrics.accel_factor, ratio(1, 1));
    }

    #[test]
    fn heaviest_block_is_committed_first_on_the_receiver_profile() {
        // Demodulation front (0.5 time units, enormous input space)
        // feeding the decoder (7.71 time units, 16 MiB table).
        let front = FunctionalBlock::new("ofdm_front", ratio(1, 2), 8192, 256, 2);
        let viterbi = FunctionalBlock::new("viterbi", ratio(771, 100), 22, 2, 4);
        let graph = BlockGraph::new(
            vec![front, viterbi],
            chain_edges(&["ofdm_front", "viterbi"]),
            CostConvention::CpuTime,
        )
        .unwrap();
        let budget = BigUint::from(50u64 << 20);
        let plan = plan(&graph, &platform(), &budget).unwrap();
        assert_eq!(plan.tables[0].boundary.members, ["viterbi".into()].into());
        assert_eq!(plan.tables[0].boundary.table_bytes, BigUint::from(16u64 << 20));
        assert_eq!(plan.termination, Termination::MemoryExhausted);
        assert_eq!(plan.residual, vec![BlockId::from("ofdm_front")]);
        assert_eq!(plan.residual_cost, ratio(1, 2));
    }

    #[test]
    fn releasing_a_mid_chain_block_releases_its_consumers() {
        // In a -> b -> c -> d, dropping b from the boundary must also
        // drop c and d or the boundary output would tunnel back in
        // through b.
        let graph = BlockGraph::new(
            vec![block("a", 5, 4), block("b", 1, 4), block("c", 5, 4), block("d", 5, 4)],
            chain_edges(&["a", "b", "c", "d"]),
            CostConvention::CpuTime,
        )
        .unwrap();
        let all: BTreeSet<usize> = (0..4).collect();
        let mut without_b = all.clone();
        without_b.remove(&graph.index_of(&"b".into()).unwrap());
        let normalized = normalize_boundary(&graph, without_b);
        assert_eq!(ids_of(&graph, &normalized), ["a".into()].into());
    }

    #[test]
    fn split_boundaries_keep_the_heavier_component() {
        // a -> b and c -> b: dropping b leaves {a} and {c}; the heavier
        // source wins.
        let mut join = block("b", 1, 4);
        join.items = 4; // two lanes, two items each
        let graph = BlockGraph::new(
            vec![block("a", 2, 4), join, block("c", 9, 4)],
            vec![("a".into(), "b".into()), ("c".into(), "b".into())],
            CostConvention::CpuTime,
        )
        .unwrap();
        let members: BTreeSet<usize> =
            [graph.index_of(&"a".into()).unwrap(), graph.index_of(&"c".into()).unwrap()].into();
        let normalized = normalize_boundary(&graph, members);
        assert_eq!(ids_of(&graph, &normalized), ["c".into()].into());
    }

    #[test]
    fn atomicity_limit_triggers_segmentation() {
        // One oversized block whose segmentation chain fits once its
        // wide-input head sub-block is released.
        let rule = SegmentationRule {
            blocks: vec![block("head", 1, 26), block("mid", 2, 4), block("tail", 3, 4)],
            edges: chain_edges(&["head", "mid", "tail"]),
            entry: "head".into(),
            exit: "tail".into(),
        };
        let whole = FunctionalBlock::new("whole", ratio(6, 1), 26, 2, 1).with_segmentation(rule);
        let graph = BlockGraph::new(vec![whole], vec![], CostConvention::CpuTime).unwrap();
        let budget = BigUint::from(1u64 << 20); // 1 MiB, well under 2^26
        let result = plan(&graph, &platform(), &budget).unwrap();
        assert_eq!(result.tables.len(), 1);
        assert_eq!(result.tables[0].boundary.members, ["mid".into(), "tail".into()].into());
        assert_eq!(result.residual, vec![BlockId::from("head")]);
        assert!(result.diagnostics.iter().any(|d| d.contains("segmented whole")));
        // Cost is conserved across the segmentation.
        assert_eq!(result.tabled_cost() + result.residual_cost.clone(), ratio(6, 1));
    }

    #[test]
    fn boundary_reinitializes_when_it_stops_dominating() {
        // After segmenting the heavy block and releasing its head, the
        // remaining sub-chain no longer outweighs the outside block, so
        // the boundary re-encloses the remainder.
        let rule = SegmentationRule {
            blocks: vec![block("s1", 3, 26), block("s2", 3, 4), block("s3", 4, 4)],
            edges: chain_edges(&["s1", "s2", "s3"]),
            entry: "s1".into(),
            exit: "s3".into(),
        };
        let heavy = FunctionalBlock::new("heavy", ratio(10, 1), 26, 2, 1).with_segmentation(rule);
        let outside = block("outside", 9, 26);
        let graph = BlockGraph::new(
            vec![outside, heavy],
            vec![("outside".into(), "heavy".into())],
            CostConvention::CpuTime,
        )
        .unwrap();
        let result = plan(&graph, &platform(), &BigUint::from(1u64 << 20)).unwrap();
        assert!(result.diagnostics.iter().any(|d| d.contains("re-enclosing the remainder")));
        assert_eq!(result.tables.len(), 1);
        assert_eq!(result.tables[0].boundary.members, ["s2".into(), "s3".into()].into());
        assert_eq!(result.residual, vec![BlockId::from("outside"), BlockId::from("s1")]);
    }

    #[test]
    fn plans_are_deterministic() {
        let graph = BlockGraph::new(
            vec![block("a", 3, 6), block("b", 3, 6), {
                let mut c = block("c", 1, 6);
                c.items = 6; // two lanes
                c
            }, block("d", 7, 6)],
            vec![("a".into(), "c".into()), ("b".into(), "c".into()), ("c".into(), "d".into())],
            CostConvention::CpuTime,
        )
        .unwrap();
        let budget = BigUint::from(200u32);
        let first = plan(&graph, &platform(), &budget).unwrap();
        let second = plan(&graph, &platform(), &budget).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn budget_above_platform_memory_is_rejected() {
        let graph =
            BlockGraph::new(vec![block("a", 1, 4)], vec![], CostConvention::CpuTime).unwrap();
        let small = Platform::new(
            ratio(1, 1),
            BigUint::from(1024u32),
            ratio(1, 1),
            ratio(1, 1),
            LatencyModel::flat(ratio(1, 1)),
        )
        .unwrap();
        assert_eq!(
            plan(&graph, &small, &BigUint::from(2048u32)).unwrap_err(),
            PlanError::BudgetExceedsMemory
        );
    }

    #[test]
    fn exhaustive_matches_plan_on_a_single_block() {
        let graph =
            BlockGraph::new(vec![block("only", 4, 8)], vec![], CostConvention::CpuTime).unwrap();
        let budget = BigUint::from(1024u32);
        let greedy = plan(&graph, &platform(), &budget).unwrap();
        let best = exhaustive_plan(&graph, &platform(), &budget).unwrap();
        assert_eq!(greedy.tables.len(), best.tables.len());
        assert_eq!(greedy.tables[0].boundary.members, best.tables[0].boundary.members);
    }

    #[test]
    fn exhaustive_beats_greedy_when_only_the_pair_fits() {
        // The joint table of {a, b} is 16 B; b's singleton table is 1 MiB.
        // Greedy releases a first and can then only table a alone; the
        // oracle finds the pair.
        let graph = BlockGraph::new(
            vec![block("a", 5, 4), block("b", 6, 20)],
            chain_edges(&["a", "b"]),
            CostConvention::CpuTime,
        )
        .unwrap();
        let budget = BigUint::from(4096u32);
        let greedy = plan(&graph, &platform(), &budget).unwrap();
        let best = exhaustive_plan(&graph, &platform(), &budget).unwrap();
        let a_greedy = greedy.metrics(&platform()).unwrap().accel_factor;
        let a_best = best.metrics(&platform()).unwrap().accel_factor;
        assert!(a_greedy <= a_best);
        assert_eq!(best.tables.len(), 1);
        assert_eq!(best.tables[0].boundary.members.len(), 2);
    }

    #[test]
    fn exhaustive_guard_rejects_large_graphs() {
        let blocks: Vec<FunctionalBlock> =
            (0..13).map(|i| block(&format!("b{i:02}"), 1, 4)).collect();
        let edges = (0..12)
            .map(|i| (BlockId::new(format!("b{i:02}")), BlockId::new(format!("b{:02}", i + 1))))
            .collect();
        let graph = BlockGraph::new(blocks, edges, CostConvention::CpuTime).unwrap();
        assert_eq!(
            exhaustive_plan(&graph, &platform(), &BigUint::from(1024u32)).unwrap_err(),
            PlanError::TooLarge { blocks: 13, limit: EXHAUSTIVE_MAX_BLOCKS }
        );
    }

    #[test]
    fn committed_tables_never_overrun_the_budget() {
        let graph = BlockGraph::new(
            vec![block("a", 2, 8), block("b", 3, 8), block("c", 4, 8)],
            chain_edges(&["a", "b", "c"]),
            CostConvention::CpuTime,
        )
        .unwrap();
        for budget_bytes in [0u64, 64, 256, 300, 1 << 12, 1 << 20] {
            let budget = BigUint::from(budget_bytes);
            let result = plan(&graph, &platform(), &budget).unwrap();
            let mut running = BigUint::zero();
            for table in &result.tables {
                running += &table.boundary.table_bytes;
                assert!(running <= budget, "commit overran the budget");
            }
        }
    }
}
