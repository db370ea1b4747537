//! Cost-annotated dataflow model of a radio and the acceleration
//! analytics computed over it.
//!
//! A radio is a directed acyclic web of [`FunctionalBlock`]s. Each block
//! declares its computational cost, the size and alphabet of the smallest
//! input chunk it can process independently, and the byte size of the
//! items it emits. Those four numbers are what the planner needs: the
//! input-space cardinality `alphabet^items` bounds the size of a table
//! that could replace the block, and the cost says what replacing it
//! saves.
//!
//! A [`TableBoundary`] is a connected, consumer-closed set of blocks being
//! considered for replacement by one table; its crossing input edges
//! define the key space, its crossing outputs the value size. All
//! analytics (speedup, per-byte efficiency, the overall merit figure) are
//! computed in exact rational arithmetic; floats appear only when results
//! are printed.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Exact rational used for every cost and metric.
pub type Rational = BigRational;

/// Convenience constructor for small rationals.
pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn biguint_to_rational(n: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

/// Largest representable input space, in bits of cardinality. Guards the
/// exact arithmetic against absurd `alphabet^items` blow-ups.
const MAX_CARDINALITY_BITS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    InvalidGraph(String),
    InvalidPlatform(String),
    UnknownBlock(BlockId),
    NoSegmentation(BlockId),
    EmptyBoundary,
    BoundaryDisconnected,
    BoundaryNotClosed,
    /// Efficiency is undefined without table memory.
    ZeroMemory,
    /// Speedup is undefined when the accelerated cost is zero.
    ZeroDenominator,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidGraph(msg) => write!(f, "invalid block graph: {msg}"),
            ModelError::InvalidPlatform(msg) => write!(f, "invalid platform: {msg}"),
            ModelError::UnknownBlock(id) => write!(f, "unknown block id {id}"),
            ModelError::NoSegmentation(id) => write!(f, "block {id} declares no segmentation"),
            ModelError::EmptyBoundary => write!(f, "table boundary has no members"),
            ModelError::BoundaryDisconnected => write!(f, "table boundary is not connected"),
            ModelError::BoundaryNotClosed => {
                write!(f, "table boundary output feeds back in through an outside block")
            }
            ModelError::ZeroMemory => write!(f, "no table memory: efficiency is undefined"),
            ModelError::ZeroDenominator => write!(f, "zero accelerated cost: ratio is undefined"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

/// Name of a functional block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(String);

impl BlockId {
    pub fn new(id: impl Into<String>) -> Self {
        BlockId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for BlockId {
    fn from(s: &str) -> Self {
        BlockId::new(s)
    }
}

/// How block costs are expressed; one convention per graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostConvention {
    /// Operations per second needed to keep up with real time.
    OpsPerSecond,
    /// CPU time consumed on a fixed workload, run unthrottled.
    CpuTime,
}

/// One computational stage of the radio.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalBlock {
    pub id: BlockId,
    /// Computational cost in the graph's convention.
    pub cost: Rational,
    /// Items in the smallest independently processable input set.
    pub items: u64,
    /// Alphabet cardinality of each input item.
    pub alphabet: u64,
    /// Byte size of one emitted output item.
    pub output_bytes: u64,
    /// Output-space cardinality; informational, no metric consumes it.
    pub output_cardinality: Option<BigUint>,
    /// How to split this block when it alone cannot fit a table.
    pub segmentation: Option<SegmentationRule>,
}

impl FunctionalBlock {
    pub fn new(
        id: impl Into<BlockId>,
        cost: Rational,
        items: u64,
        alphabet: u64,
        output_bytes: u64,
    ) -> Self {
        FunctionalBlock {
            id: id.into(),
            cost,
            items,
            alphabet,
            output_bytes,
            output_cardinality: None,
            segmentation: None,
        }
    }

    pub fn with_segmentation(mut self, rule: SegmentationRule) -> Self {
        self.segmentation = Some(rule);
        self
    }

    /// Input-space cardinality `alphabet^items`.
    pub fn input_cardinality(&self) -> BigUint {
        BigUint::from(self.alphabet).pow(self.items as u32)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: String| Err(ModelError::InvalidGraph(msg));
        if self.cost.is_negative() {
            return fail(format!("block {} has negative cost", self.id));
        }
        if self.items == 0 {
            return fail(format!("block {} must consume at least one item", self.id));
        }
        if self.alphabet < 2 {
            return fail(format!("block {} needs an alphabet of at least 2", self.id));
        }
        if self.output_bytes == 0 {
            return fail(format!("block {} must emit at least one byte", self.id));
        }
        let bits = 64 - self.alphabet.leading_zeros() as u64;
        if self.items.saturating_mul(bits) > MAX_CARDINALITY_BITS {
            return fail(format!("block {} input space is too large to represent", self.id));
        }
        if let Some(rule) = &self.segmentation {
            rule.validate(&self.id, &self.cost)?;
        }
        Ok(())
    }
}

/// Replacement sub-graph for one block.
///
/// The entry sub-block inherits every input of the replaced block and the
/// exit sub-block every output, so the replacement has the same external
/// arity. Splitting never changes cost: the sub-block costs must sum to
/// the replaced block's cost exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationRule {
    pub blocks: Vec<FunctionalBlock>,
    pub edges: Vec<(BlockId, BlockId)>,
    pub entry: BlockId,
    pub exit: BlockId,
}

impl SegmentationRule {
    fn validate(&self, target: &BlockId, target_cost: &Rational) -> Result<(), ModelError> {
        let fail = |msg: String| Err(ModelError::InvalidGraph(msg));
        if self.blocks.is_empty() {
            return fail(format!("segmentation of {target} has no sub-blocks"));
        }
        let mut ids = BTreeSet::new();
        for block in &self.blocks {
            if !ids.insert(block.id.clone()) {
                return fail(format!("segmentation of {target} repeats id {}", block.id));
            }
            block.validate()?;
        }
        if !ids.contains(&self.entry) || !ids.contains(&self.exit) {
            return fail(format!("segmentation of {target} must contain its entry and exit"));
        }
        let total: Rational = self.blocks.iter().map(|b| b.cost.clone()).sum();
        if &total != target_cost {
            return fail(format!(
                "segmentation of {target} changes its cost ({total} != {target_cost})"
            ));
        }
        for (from, to) in &self.edges {
            if !ids.contains(from) || !ids.contains(to) {
                return fail(format!("segmentation of {target} wires an unknown sub-block"));
            }
        }
        Ok(())
    }
}

/// The radio as a validated dataflow web.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGraph {
    blocks: Vec<FunctionalBlock>,
    index: BTreeMap<BlockId, usize>,
    in_edges: Vec<Vec<usize>>,
    out_edges: Vec<Vec<usize>>,
    external_inputs: BTreeSet<usize>,
    external_outputs: BTreeSet<usize>,
    cost_convention: CostConvention,
}

impl BlockGraph {
    /// Build a graph, inferring external inputs at blocks with no
    /// producers and external outputs at blocks with no consumers.
    pub fn new(
        blocks: Vec<FunctionalBlock>,
        edges: Vec<(BlockId, BlockId)>,
        cost_convention: CostConvention,
    ) -> Result<Self, ModelError> {
        Self::with_declared_io(blocks, edges, cost_convention, None, None)
    }

    /// Build a graph with explicitly declared external inputs/outputs.
    /// Declarations must cover at least the source and sink blocks or the
    /// reachability check fails.
    pub fn with_declared_io(
        blocks: Vec<FunctionalBlock>,
        edges: Vec<(BlockId, BlockId)>,
        cost_convention: CostConvention,
        external_inputs: Option<Vec<BlockId>>,
        external_outputs: Option<Vec<BlockId>>,
    ) -> Result<Self, ModelError> {
        let fail = |msg: String| Err(ModelError::InvalidGraph(msg));
        if blocks.is_empty() {
            return fail("graph has no blocks".into());
        }
        let mut index = BTreeMap::new();
        for (i, block) in blocks.iter().enumerate() {
            block.validate()?;
            if index.insert(block.id.clone(), i).is_some() {
                return fail(format!("duplicate block id {}", block.id));
            }
        }

        let mut in_edges = vec![Vec::new(); blocks.len()];
        let mut out_edges = vec![Vec::new(); blocks.len()];
        let mut seen = BTreeSet::new();
        for (from, to) in &edges {
            let (Some(&f), Some(&t)) = (index.get(from), index.get(to)) else {
                return fail(format!("edge {from} -> {to} references an unknown block"));
            };
            if f == t {
                return fail(format!("self loop on block {from}"));
            }
            if !seen.insert((f, t)) {
                return fail(format!("duplicate edge {from} -> {to}"));
            }
            out_edges[f].push(t);
            in_edges[t].push(f);
        }
        for adjacency in out_edges.iter_mut().chain(in_edges.iter_mut()) {
            adjacency.sort_unstable();
        }

        let resolve = |declared: Option<Vec<BlockId>>,
                       inferred: Vec<usize>|
         -> Result<BTreeSet<usize>, ModelError> {
            match declared {
                None => Ok(inferred.into_iter().collect()),
                Some(ids) => ids
                    .into_iter()
                    .map(|id| index.get(&id).copied().ok_or(ModelError::UnknownBlock(id)))
                    .collect(),
            }
        };
        let sources = (0..blocks.len()).filter(|&i| in_edges[i].is_empty()).collect();
        let sinks = (0..blocks.len()).filter(|&i| out_edges[i].is_empty()).collect();
        let external_inputs = resolve(external_inputs, sources)?;
        let external_outputs = resolve(external_outputs, sinks)?;

        let graph = BlockGraph {
            blocks,
            index,
            in_edges,
            out_edges,
            external_inputs,
            external_outputs,
            cost_convention,
        };
        graph.check_acyclic()?;
        graph.check_reachable()?;
        graph.check_lanes()?;
        Ok(graph)
    }

    fn check_acyclic(&self) -> Result<(), ModelError> {
        // Kahn's algorithm; leftovers mean a cycle.
        let mut degree: Vec<usize> = self.in_edges.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> =
            (0..self.blocks.len()).filter(|&i| degree[i] == 0).collect();
        let mut visited = 0;
        while let Some(n) = queue.pop() {
            visited += 1;
            for &next in &self.out_edges[n] {
                degree[next] -= 1;
                if degree[next] == 0 {
                    queue.push(next);
                }
            }
        }
        if visited != self.blocks.len() {
            return Err(ModelError::InvalidGraph("graph contains a cycle".into()));
        }
        Ok(())
    }

    fn check_reachable(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<usize> = self.external_inputs.iter().copied().collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(&self.out_edges[n]);
            }
        }
        if seen.len() != self.blocks.len() {
            let missing = (0..self.blocks.len())
                .find(|i| !seen.contains(i))
                .map(|i| self.blocks[i].id.clone())
                .expect("some block is unreachable");
            return Err(ModelError::InvalidGraph(format!(
                "block {missing} is not reachable from any external input"
            )));
        }
        Ok(())
    }

    fn check_lanes(&self) -> Result<(), ModelError> {
        for i in 0..self.blocks.len() {
            let lanes = self.input_lanes(i);
            if lanes == 0 || !self.blocks[i].items.is_multiple_of(lanes) {
                return Err(ModelError::InvalidGraph(format!(
                    "block {} consumes {} items over {} input lanes; items must split evenly",
                    self.blocks[i].id, self.blocks[i].items, lanes
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn cost_convention(&self) -> CostConvention {
        self.cost_convention
    }

    pub fn blocks(&self) -> &[FunctionalBlock] {
        &self.blocks
    }

    pub fn ids(&self) -> impl Iterator<Item = &BlockId> {
        self.blocks.iter().map(|b| &b.id)
    }

    pub fn block(&self, id: &BlockId) -> Result<&FunctionalBlock, ModelError> {
        self.index
            .get(id)
            .map(|&i| &self.blocks[i])
            .ok_or_else(|| ModelError::UnknownBlock(id.clone()))
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.index.contains_key(id)
    }

    pub fn total_cost(&self) -> Rational {
        self.blocks.iter().map(|b| b.cost.clone()).sum()
    }

    pub(crate) fn index_of(&self, id: &BlockId) -> Result<usize, ModelError> {
        self.index.get(id).copied().ok_or_else(|| ModelError::UnknownBlock(id.clone()))
    }

    pub(crate) fn block_at(&self, i: usize) -> &FunctionalBlock {
        &self.blocks[i]
    }

    pub(crate) fn producers(&self, i: usize) -> &[usize] {
        &self.in_edges[i]
    }

    pub(crate) fn consumers(&self, i: usize) -> &[usize] {
        &self.out_edges[i]
    }

    pub(crate) fn has_external_input(&self, i: usize) -> bool {
        self.external_inputs.contains(&i)
    }

    pub(crate) fn has_external_output(&self, i: usize) -> bool {
        self.external_outputs.contains(&i)
    }

    /// Number of input lanes: incoming edges plus the external feed.
    pub(crate) fn input_lanes(&self, i: usize) -> u64 {
        self.in_edges[i].len() as u64 + u64::from(self.external_inputs.contains(&i))
    }

    /// Cardinality of the data arriving on one input lane of block `i`.
    /// The block's input items split evenly across its lanes.
    pub(crate) fn lane_cardinality(&self, i: usize) -> BigUint {
        let block = &self.blocks[i];
        let per_lane = block.items / self.input_lanes(i);
        BigUint::from(block.alphabet).pow(per_lane as u32)
    }

    /// Input-space cardinality of one block, `alphabet^items`.
    pub fn input_cardinality(&self, id: &BlockId) -> Result<BigUint, ModelError> {
        Ok(self.block(id)?.input_cardinality())
    }

    /// Replace `target` with its declared segmentation. The entry
    /// sub-block inherits the target's producers and external feed, the
    /// exit its consumers and external output. Total cost is unchanged.
    pub fn apply_segmentation(&self, target: &BlockId) -> Result<BlockGraph, ModelError> {
        let target_idx = self.index_of(target)?;
        let rule = self.blocks[target_idx]
            .segmentation
            .clone()
            .ok_or_else(|| ModelError::NoSegmentation(target.clone()))?;

        for sub in &rule.blocks {
            if sub.id != *target && self.contains(&sub.id) {
                return Err(ModelError::InvalidGraph(format!(
                    "segmentation of {target} reuses existing id {}",
                    sub.id
                )));
            }
        }

        let mut blocks: Vec<FunctionalBlock> =
            self.blocks.iter().filter(|b| b.id != *target).cloned().collect();
        blocks.extend(rule.blocks.iter().cloned());

        let mut edges: Vec<(BlockId, BlockId)> = Vec::new();
        for (i, outs) in self.out_edges.iter().enumerate() {
            for &j in outs {
                let from = if i == target_idx { rule.exit.clone() } else { self.blocks[i].id.clone() };
                let to = if j == target_idx { rule.entry.clone() } else { self.blocks[j].id.clone() };
                edges.push((from, to));
            }
        }
        edges.extend(rule.edges.iter().cloned());

        let remap = |set: &BTreeSet<usize>, replacement: &BlockId| -> Vec<BlockId> {
            set.iter()
                .map(|&i| {
                    if i == target_idx {
                        replacement.clone()
                    } else {
                        self.blocks[i].id.clone()
                    }
                })
                .collect()
        };
        let inputs = remap(&self.external_inputs, &rule.entry);
        let outputs = remap(&self.external_outputs, &rule.exit);

        BlockGraph::with_declared_io(
            blocks,
            edges,
            self.cost_convention,
            Some(inputs),
            Some(outputs),
        )
    }
}

/// Is every input arrow, or every output arrow, of `block` crossing the
/// boundary? External feeds and external outputs always cross.
pub fn is_peripheral(
    graph: &BlockGraph,
    members: &BTreeSet<BlockId>,
    block: &BlockId,
) -> Result<bool, ModelError> {
    let i = graph.index_of(block)?;
    let member_idx: BTreeSet<usize> = members
        .iter()
        .map(|id| graph.index_of(id))
        .collect::<Result<_, _>>()?;
    let inputs_cross = graph.producers(i).iter().all(|p| !member_idx.contains(p));
    let outputs_cross = graph.consumers(i).iter().all(|c| !member_idx.contains(c));
    Ok(inputs_cross || outputs_cross)
}

/// Raw size and cost sums over a member set, with no validity checks.
/// The planner uses this for transient boundaries mid-release.
#[derive(Debug, Clone)]
pub(crate) struct BoundaryStats {
    pub input_count: u64,
    pub input_cardinality: BigUint,
    pub output_bytes: u64,
    pub table_bytes: BigUint,
    pub enclosed_cost: Rational,
}

pub(crate) fn boundary_stats(graph: &BlockGraph, members: &BTreeSet<usize>) -> BoundaryStats {
    let mut input_count = 0u64;
    let mut input_cardinality = BigUint::from(1u32);
    let mut output_bytes = 0u64;
    let mut enclosed_cost = Rational::zero();
    for &i in members {
        let block = graph.block_at(i);
        enclosed_cost += block.cost.clone();
        let lane = graph.lane_cardinality(i);
        let mut crossing_lanes = u64::from(graph.has_external_input(i));
        crossing_lanes += graph.producers(i).iter().filter(|p| !members.contains(p)).count() as u64;
        for _ in 0..crossing_lanes {
            input_cardinality *= &lane;
        }
        input_count += crossing_lanes;
        let crosses_out = graph.has_external_output(i)
            || graph.consumers(i).iter().any(|c| !members.contains(c));
        if crosses_out {
            output_bytes += block.output_bytes;
        }
    }
    let table_bytes = &input_cardinality * BigUint::from(output_bytes);
    BoundaryStats { input_count, input_cardinality, output_bytes, table_bytes, enclosed_cost }
}

fn weakly_connected(graph: &BlockGraph, members: &BTreeSet<usize>) -> bool {
    let Some(&start) = members.iter().next() else { return false };
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        for &next in graph.consumers(n).iter().chain(graph.producers(n)) {
            if members.contains(&next) && !seen.contains(&next) {
                stack.push(next);
            }
        }
    }
    seen.len() == members.len()
}

/// Does some member output reach a member input through outside blocks?
fn closure_violated(graph: &BlockGraph, members: &BTreeSet<usize>) -> bool {
    // Walk forward from member outputs through non-members only.
    let mut stack: Vec<usize> = members
        .iter()
        .flat_map(|&m| graph.consumers(m).iter().copied())
        .filter(|c| !members.contains(c))
        .collect();
    let mut seen = BTreeSet::new();
    while let Some(n) = stack.pop() {
        if !seen.insert(n) {
            continue;
        }
        for &next in graph.consumers(n) {
            if members.contains(&next) {
                return true;
            }
            stack.push(next);
        }
    }
    false
}

/// A validated candidate table: the enclosed blocks plus the key/value
/// geometry their crossing edges imply.
#[derive(Debug, Clone, PartialEq)]
pub struct TableBoundary {
    pub members: BTreeSet<BlockId>,
    /// Number of crossing input lanes.
    pub input_count: u64,
    /// Product of the crossing input lane cardinalities: table entries.
    pub input_cardinality: BigUint,
    /// Bytes emitted across the boundary per entry: table value size.
    pub output_bytes: u64,
    /// Table footprint: entries times value size.
    pub table_bytes: BigUint,
    /// Total computational cost enclosed.
    pub enclosed_cost: Rational,
}

impl TableBoundary {
    /// Validate and measure a member set: it must be non-empty, weakly
    /// connected, and consumer-closed (no member output may feed back
    /// into a member through an outside block).
    pub fn compute(graph: &BlockGraph, members: &BTreeSet<BlockId>) -> Result<Self, ModelError> {
        if members.is_empty() {
            return Err(ModelError::EmptyBoundary);
        }
        let member_idx: BTreeSet<usize> = members
            .iter()
            .map(|id| graph.index_of(id))
            .collect::<Result<_, _>>()?;
        if !weakly_connected(graph, &member_idx) {
            return Err(ModelError::BoundaryDisconnected);
        }
        if closure_violated(graph, &member_idx) {
            return Err(ModelError::BoundaryNotClosed);
        }
        let stats = boundary_stats(graph, &member_idx);
        Ok(TableBoundary {
            members: members.clone(),
            input_count: stats.input_count,
            input_cardinality: stats.input_cardinality,
            output_bytes: stats.output_bytes,
            table_bytes: stats.table_bytes,
            enclosed_cost: stats.enclosed_cost,
        })
    }

    /// Estimated cost of managing this table on `platform`.
    pub fn management_cost(&self, platform: &Platform) -> Rational {
        platform.table_management_cost(&self.table_bytes, self.input_count)
    }
}

/// Access latency as a step function of table size: cache tiers, then a
/// flat cost beyond the last tier.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyModel {
    tiers: Vec<(BigUint, Rational)>,
    beyond: Rational,
}

impl LatencyModel {
    pub fn new(mut tiers: Vec<(BigUint, Rational)>, beyond: Rational) -> Self {
        tiers.sort_by(|a, b| a.0.cmp(&b.0));
        LatencyModel { tiers, beyond }
    }

    /// Flat latency regardless of size.
    pub fn flat(cost: Rational) -> Self {
        LatencyModel { tiers: Vec::new(), beyond: cost }
    }

    pub fn cost(&self, table_bytes: &BigUint) -> Rational {
        for (limit, cost) in &self.tiers {
            if table_bytes <= limit {
                return cost.clone();
            }
        }
        self.beyond.clone()
    }

    pub fn tiers(&self) -> &[(BigUint, Rational)] {
        &self.tiers
    }

    pub fn beyond(&self) -> &Rational {
        &self.beyond
    }
}

/// The computing system the radio runs on.
#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    /// Total computational power available.
    pub compute_power: Rational,
    /// Total memory available, bytes.
    pub memory_bytes: BigUint,
    /// Cost of one multiplication by a constant.
    pub mul_cost: Rational,
    /// Cost of one sum with a variable.
    pub add_cost: Rational,
    pub latency: LatencyModel,
}

impl Platform {
    pub fn new(
        compute_power: Rational,
        memory_bytes: BigUint,
        mul_cost: Rational,
        add_cost: Rational,
        latency: LatencyModel,
    ) -> Result<Self, ModelError> {
        let fail = |msg: &str| Err(ModelError::InvalidPlatform(msg.into()));
        if compute_power <= Rational::zero() {
            return fail("compute power must be positive");
        }
        if memory_bytes.is_zero() {
            return fail("memory size must be positive");
        }
        if mul_cost <= Rational::zero() || add_cost <= Rational::zero() {
            return fail("operation costs must be positive");
        }
        Ok(Platform { compute_power, memory_bytes, mul_cost, add_cost, latency })
    }

    /// Estimated per-use table management cost: one access latency plus
    /// the key-composition arithmetic for multi-input tables.
    pub fn table_management_cost(&self, table_bytes: &BigUint, input_count: u64) -> Rational {
        assert!(input_count >= 1, "a table has at least one input");
        let compose = Rational::from_integer(BigInt::from(input_count - 1))
            * (self.mul_cost.clone() + self.add_cost.clone());
        self.latency.cost(table_bytes) + compose
    }
}

/// Computation saved per byte of table memory: saved cost net of
/// management, divided by the footprint. Negative values mean the tables
/// slow the system down and must be flagged.
pub fn acceleration_efficiency(
    tabled_cost: &Rational,
    management_cost: &Rational,
    table_bytes: &BigUint,
) -> Result<Rational, ModelError> {
    if table_bytes.is_zero() {
        return Err(ModelError::ZeroMemory);
    }
    Ok((tabled_cost - management_cost) / biguint_to_rational(table_bytes))
}

/// Speedup of the accelerated implementation: original cost over
/// residual-plus-management cost.
pub fn acceleration_factor(
    residual_cost: &Rational,
    tabled_cost: &Rational,
    management_cost: &Rational,
) -> Result<Rational, ModelError> {
    let denominator = residual_cost + management_cost;
    if denominator.is_zero() {
        return Err(ModelError::ZeroDenominator);
    }
    Ok((residual_cost + tabled_cost) / denominator)
}

/// Best-case speedup estimate assuming everything tabled fits: tabled
/// cost over the summed per-table management estimates
/// `latency + (inputs - 1) * (mul + add)`.
pub fn acceleration_factor_bound(
    tabled_cost: &Rational,
    per_table: &[(Rational, u64)],
    mul_cost: &Rational,
    add_cost: &Rational,
) -> Result<Rational, ModelError> {
    let mut denominator = Rational::zero();
    for (latency, input_count) in per_table {
        denominator += latency
            + &(Rational::from_integer(BigInt::from(input_count - 1))
                * (mul_cost + add_cost));
    }
    if denominator.is_zero() {
        return Err(ModelError::ZeroDenominator);
    }
    Ok(tabled_cost / denominator)
}

/// Overall merit of an accelerated implementation: memory utilization
/// times compute utilization times efficiency.
pub fn merit(
    table_bytes: &BigUint,
    memory_bytes: &BigUint,
    compute_utilization: &Rational,
    efficiency: &Rational,
) -> Result<Rational, ModelError> {
    if memory_bytes.is_zero() {
        return Err(ModelError::ZeroMemory);
    }
    Ok(biguint_to_rational(table_bytes) / biguint_to_rational(memory_bytes)
        * compute_utilization
        * efficiency)
}

/// Merit under the unthrottled convention (compute utilization 1): the
/// table footprint cancels and only saved cost per byte of system memory
/// remains.
pub fn merit_unthrottled(
    tabled_cost: &Rational,
    management_cost: &Rational,
    memory_bytes: &BigUint,
) -> Result<Rational, ModelError> {
    if memory_bytes.is_zero() {
        return Err(ModelError::ZeroMemory);
    }
    Ok((tabled_cost - management_cost) / biguint_to_rational(memory_bytes))
}

/// Cost, management and footprint of one committed table, as consumed by
/// [`AccelMetrics::compute`].
#[derive(Debug, Clone, PartialEq)]
pub struct TableCosts {
    pub tabled_cost: Rational,
    pub management_cost: Rational,
    pub table_bytes: BigUint,
}

/// Every headline figure for one accelerated implementation, in exact
/// rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct AccelMetrics {
    /// Speedup over the computation-only implementation.
    pub accel_factor: Rational,
    /// Best-case speedup estimate; absent without tables.
    pub accel_factor_bound: Option<Rational>,
    /// Saved cost per table byte; absent without tables.
    pub efficiency: Option<Rational>,
    /// Set when the tables cost more to manage than they save.
    pub efficiency_negative: bool,
    pub per_table_efficiency: Vec<Rational>,
    /// Merit under the unthrottled convention.
    pub merit: Rational,
    pub residual_cost: Rational,
    pub tabled_cost: Rational,
    pub management_cost: Rational,
    pub table_bytes: BigUint,
}

impl AccelMetrics {
    /// Metrics for a set of committed tables plus the residual
    /// computational cost. Management costs are the platform estimates.
    pub fn compute(
        tables: &[TableCosts],
        residual_cost: &Rational,
        platform: &Platform,
    ) -> Result<Self, ModelError> {
        let tabled_cost: Rational = tables.iter().map(|t| t.tabled_cost.clone()).sum();
        let management_cost: Rational = tables.iter().map(|t| t.management_cost.clone()).sum();
        let table_bytes: BigUint =
            tables.iter().fold(BigUint::zero(), |acc, t| acc + &t.table_bytes);

        let accel_factor = acceleration_factor(residual_cost, &tabled_cost, &management_cost)?;
        let accel_factor_bound = if tables.is_empty() || management_cost.is_zero() {
            None
        } else {
            Some(&tabled_cost / &management_cost)
        };
        let efficiency = if tables.is_empty() {
            None
        } else {
            Some(acceleration_efficiency(&tabled_cost, &management_cost, &table_bytes)?)
        };
        let efficiency_negative =
            efficiency.as_ref().map(|e| e.is_negative()).unwrap_or(false);
        let per_table_efficiency = tables
            .iter()
            .map(|t| acceleration_efficiency(&t.tabled_cost, &t.management_cost, &t.table_bytes))
            .collect::<Result<_, _>>()?;
        let merit = merit_unthrottled(&tabled_cost, &management_cost, &platform.memory_bytes)?;

        Ok(AccelMetrics {
            accel_factor,
            accel_factor_bound,
            efficiency,
            efficiency_negative,
            per_table_efficiency,
            merit,
            residual_cost: residual_cost.clone(),
            tabled_cost,
            management_cost,
            table_bytes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn block(id: &str, cost: i64) -> FunctionalBlock {
        FunctionalBlock::new(id, ratio(cost, 1), 4, 2, 1)
    }

    fn chain(n: usize) -> BlockGraph {
        let blocks: Vec<FunctionalBlock> =
            (0..n).map(|i| block(&format!("b{i}"), (i + 1) as i64)).collect();
        let edges = (0..n - 1)
            .map(|i| (BlockId::new(format!("b{i}")), BlockId::new(format!("b{}", i + 1))))
            .collect();
        BlockGraph::new(blocks, edges, CostConvention::CpuTime).unwrap()
    }

    fn members(ids: &[&str]) -> BTreeSet<BlockId> {
        ids.iter().map(|&s| BlockId::from(s)).collect()
    }

    fn flat_platform() -> Platform {
        Platform::new(
            ratio(1, 1),
            BigUint::from(1u64 << 32),
            ratio(1, 1),
            ratio(1, 1),
            LatencyModel::flat(ratio(2, 1)),
        )
        .unwrap()
    }

    #[test]
    fn input_cardinality_powers() {
        assert_eq!(block("x", 1).input_cardinality(), BigUint::from(16u32));
        let b = FunctionalBlock::new("y", ratio(1, 1), 3, 4, 1);
        assert_eq!(b.input_cardinality(), BigUint::from(64u32));
    }

    #[test]
    fn boundary_input_cardinality_multiplies_crossing_lanes() {
        // Two sources with input spaces 16 and 64 joined by a sink:
        // the joint key space is their product.
        let a = FunctionalBlock::new("a", ratio(1, 1), 4, 2, 1);
        let b = FunctionalBlock::new("b", ratio(1, 1), 3, 4, 1);
        let mut sink = FunctionalBlock::new("sink", ratio(5, 1), 2, 2, 1);
        sink.items = 2; // two lanes, one item each
        let graph = BlockGraph::new(
            vec![a, b, sink],
            vec![("a".into(), "sink".into()), ("b".into(), "sink".into())],
            CostConvention::CpuTime,
        )
        .unwrap();
        let tb = TableBoundary::compute(&graph, &members(&["a", "b", "sink"])).unwrap();
        assert_eq!(tb.input_cardinality, BigUint::from(16u32 * 64));
        assert_eq!(tb.input_count, 2);
        assert_eq!(tb.table_bytes, BigUint::from(1024u32));

        // Enumerating the joint inputs agrees with the product rule.
        let enumerated = (0..16u32).flat_map(|x| (0..64u32).map(move |y| (x, y))).count();
        assert_eq!(BigUint::from(enumerated), tb.input_cardinality);
    }

    #[test]
    fn chain_ends_are_peripheral() {
        let graph = chain(4);
        let all = members(&["b0", "b1", "b2", "b3"]);
        assert!(is_peripheral(&graph, &all, &"b0".into()).unwrap());
        assert!(is_peripheral(&graph, &all, &"b3".into()).unwrap());
        assert!(!is_peripheral(&graph, &all, &"b1".into()).unwrap());
        assert!(!is_peripheral(&graph, &all, &"b2".into()).unwrap());
    }

    #[test]
    fn mixed_crossing_block_is_not_peripheral() {
        // d has one crossing input (from outside the boundary) and one
        // internal input, and its only output stays internal.
        let mut d = block("d", 1);
        d.items = 4; // two lanes after the edges below
        let blocks = vec![block("a", 1), block("o", 1), d, block("s", 1)];
        let graph = BlockGraph::new(
            blocks,
            vec![
                ("a".into(), "d".into()),
                ("o".into(), "d".into()),
                ("d".into(), "s".into()),
            ],
            CostConvention::CpuTime,
        )
        .unwrap();
        let boundary = members(&["a", "d", "s"]);
        assert!(!is_peripheral(&graph, &boundary, &"d".into()).unwrap());
    }

    #[test]
    fn cycles_and_unreachable_blocks_are_rejected() {
        let err = BlockGraph::new(
            vec![block("a", 1), block("b", 1)],
            vec![("a".into(), "b".into()), ("b".into(), "a".into())],
            CostConvention::CpuTime,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidGraph(_)));

        let err = BlockGraph::with_declared_io(
            vec![block("a", 1), block("b", 1)],
            vec![],
            CostConvention::CpuTime,
            Some(vec!["a".into()]),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::InvalidGraph(_)));
    }

    #[test]
    fn boundary_rejects_disconnected_and_unclosed_sets() {
        let graph = chain(3);
        assert_eq!(
            TableBoundary::compute(&graph, &members(&["b0", "b2"])).unwrap_err(),
            ModelError::BoundaryDisconnected
        );

        // a -> b -> c plus a -> c: {a, c} is connected but a's output
        // returns through b.
        let graph2 = BlockGraph::new(
            vec![block("a", 1), block("b", 1), {
                let mut c = block("c", 1);
                c.items = 4; // two lanes
                c
            }],
            vec![
                ("a".into(), "b".into()),
                ("b".into(), "c".into()),
                ("a".into(), "c".into()),
            ],
            CostConvention::CpuTime,
        )
        .unwrap();
        assert_eq!(
            TableBoundary::compute(&graph2, &members(&["a", "c"])).unwrap_err(),
            ModelError::BoundaryNotClosed
        );
        assert!(TableBoundary::compute(&graph2, &members(&["a", "b", "c"])).is_ok());
    }

    #[test]
    fn segmentation_conserves_cost_and_rewires_ends() {
        let rule = SegmentationRule {
            blocks: vec![block("m1", 2), block("m2", 3)],
            edges: vec![("m1".into(), "m2".into())],
            entry: "m1".into(),
            exit: "m2".into(),
        };
        let mid = block("mid", 5).with_segmentation(rule);
        let graph = BlockGraph::new(
            vec![block("src", 1), mid, block("dst", 1)],
            vec![("src".into(), "mid".into()), ("mid".into(), "dst".into())],
            CostConvention::CpuTime,
        )
        .unwrap();
        let total = graph.total_cost();
        let applied = graph.apply_segmentation(&"mid".into()).unwrap();
        assert_eq!(applied.total_cost(), total);
        assert!(applied.contains(&"m1".into()));
        assert!(!applied.contains(&"mid".into()));
        // src now feeds m1 and m2 feeds dst.
        let src = applied.index_of(&"src".into()).unwrap();
        let m1 = applied.index_of(&"m1".into()).unwrap();
        assert_eq!(applied.consumers(src), &[m1]);
    }

    #[test]
    fn segmentation_with_wrong_cost_sum_is_rejected() {
        let rule = SegmentationRule {
            blocks: vec![block("m1", 2), block("m2", 2)],
            edges: vec![("m1".into(), "m2".into())],
            entry: "m1".into(),
            exit: "m2".into(),
        };
        let bad = block("mid", 5).with_segmentation(rule);
        let err = BlockGraph::new(vec![bad], vec![], CostConvention::CpuTime).unwrap_err();
        assert!(matches!(err, ModelError::InvalidGraph(_)));
    }

    #[test]
    fn efficiency_examples() {
        let eta = acceleration_efficiency(&ratio(100, 1), &ratio(10, 1), &BigUint::from(1000u32))
            .unwrap();
        assert_eq!(eta, ratio(9, 100));

        let negative =
            acceleration_efficiency(&ratio(5, 1), &ratio(10, 1), &BigUint::from(1000u32))
                .unwrap();
        assert!(negative.is_negative());

        assert_eq!(
            acceleration_efficiency(&ratio(1, 1), &ratio(1, 1), &BigUint::zero()),
            Err(ModelError::ZeroMemory)
        );
    }

    #[test]
    fn acceleration_factor_examples() {
        // The measured decoder costs: 7.71 over 0.74.
        let a = acceleration_factor(&ratio(0, 1), &ratio(771, 100), &ratio(74, 100)).unwrap();
        assert_eq!(a, ratio(771, 74));

        let a = acceleration_factor(&ratio(1, 2), &ratio(771, 100), &ratio(74, 100)).unwrap();
        assert_eq!(a, ratio(821, 124));

        let a = acceleration_factor(&ratio(3, 1), &ratio(10, 1), &ratio(10, 1)).unwrap();
        assert_eq!(a, Rational::one());

        assert_eq!(
            acceleration_factor(&ratio(0, 1), &ratio(1, 1), &ratio(0, 1)),
            Err(ModelError::ZeroDenominator)
        );
    }

    #[test]
    fn acceleration_bound_examples() {
        let bound =
            acceleration_factor_bound(&ratio(20, 1), &[(ratio(2, 1), 1)], &ratio(1, 1), &ratio(1, 1))
                .unwrap();
        assert_eq!(bound, ratio(10, 1));

        let bound =
            acceleration_factor_bound(&ratio(20, 1), &[(ratio(2, 1), 3)], &ratio(1, 1), &ratio(1, 1))
                .unwrap();
        assert_eq!(bound, ratio(20, 6));
    }

    #[test]
    fn merit_examples_and_identity() {
        let i = merit_unthrottled(&ratio(100, 1), &ratio(10, 1), &BigUint::from(1000u32)).unwrap();
        assert_eq!(i, ratio(9, 100));

        // The general form with full memory use and utilization 1
        // collapses to the efficiency.
        let eta = acceleration_efficiency(&ratio(100, 1), &ratio(10, 1), &BigUint::from(1000u32))
            .unwrap();
        let general =
            merit(&BigUint::from(1000u32), &BigUint::from(1000u32), &Rational::one(), &eta)
                .unwrap();
        assert_eq!(general, eta);
    }

    #[test]
    fn latency_model_steps_through_tiers() {
        let model = LatencyModel::new(
            vec![
                (BigUint::from(32u32 << 10), ratio(1, 1)),
                (BigUint::from(256u32 << 10), ratio(4, 1)),
            ],
            ratio(40, 1),
        );
        assert_eq!(model.cost(&BigUint::from(1024u32)), ratio(1, 1));
        assert_eq!(model.cost(&BigUint::from(100u32 << 10)), ratio(4, 1));
        assert_eq!(model.cost(&BigUint::from(1u32 << 30)), ratio(40, 1));
    }

    #[test]
    fn metrics_flag_negative_efficiency() {
        let platform = flat_platform();
        let costly = TableCosts {
            tabled_cost: ratio(1, 1),
            management_cost: ratio(5, 1),
            table_bytes: BigUint::from(64u32),
        };
        let metrics = AccelMetrics::compute(&[costly], &ratio(1, 1), &platform).unwrap();
        assert!(metrics.efficiency_negative);
        assert!(metrics.accel_factor < Rational::one());

        let saving = TableCosts {
            tabled_cost: ratio(9, 1),
            management_cost: ratio(1, 1),
            table_bytes: BigUint::from(64u32),
        };
        let metrics = AccelMetrics::compute(&[saving], &ratio(1, 1), &platform).unwrap();
        assert!(!metrics.efficiency_negative);
        assert_eq!(metrics.accel_factor, ratio(5, 1));
    }
}
