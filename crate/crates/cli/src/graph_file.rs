//! The on-disk graph description format.
//!
//! JSON, schema documented in `docs/graph-format.md`. Costs are decimal
//! strings (or `a/b` fractions) so they survive the trip into exact
//! rational arithmetic; sizes are plain byte counts. `to_model` builds
//! the validated core types.

use anyhow::{bail, Context, Result};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use memaccel::model::{
    BlockGraph, BlockId, CostConvention, FunctionalBlock, LatencyModel, Platform,
    SegmentationRule,
};

use crate::numeric::parse_rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    /// "cpu-time" or "ops-per-second".
    pub cost_convention: String,
    pub platform: PlatformFile,
    /// Table memory budget for the planner.
    pub budget_bytes: u64,
    /// Blocks fed from outside the radio; defaults to blocks with no
    /// producers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_inputs: Option<Vec<String>>,
    /// Blocks delivering outside the radio; defaults to blocks with no
    /// consumers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_outputs: Option<Vec<String>>,
    pub blocks: Vec<BlockFile>,
    /// Producer/consumer id pairs.
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformFile {
    pub compute_power: String,
    pub memory_bytes: u64,
    /// Cost of one multiplication by a constant.
    pub mul_cost: String,
    /// Cost of one sum with a variable.
    pub add_cost: String,
    /// Access-latency step function over table size.
    #[serde(default)]
    pub latency_tiers: Vec<LatencyTierFile>,
    /// Latency past the last tier.
    pub latency_beyond: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyTierFile {
    pub max_bytes: u64,
    pub cost: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    pub id: String,
    /// Computational cost in the graph's convention.
    pub cost: String,
    /// Items in the smallest independently processable input set.
    pub items: u64,
    /// Alphabet cardinality per item.
    pub alphabet: u64,
    /// Bytes per emitted output item.
    pub output_bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_cardinality: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<SegmentationFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentationFile {
    pub blocks: Vec<BlockFile>,
    pub edges: Vec<(String, String)>,
    /// Sub-block that inherits the replaced block's inputs.
    pub entry: String,
    /// Sub-block that produces the replaced block's outputs.
    pub exit: String,
}

impl BlockFile {
    fn to_model(&self) -> Result<FunctionalBlock> {
        let cost = parse_rational(&self.cost)
            .map_err(|e| anyhow::anyhow!("block {}: {e}", self.id))?;
        let mut block =
            FunctionalBlock::new(self.id.as_str(), cost, self.items, self.alphabet, self.output_bytes);
        block.output_cardinality = self.output_cardinality.map(BigUint::from);
        if let Some(seg) = &self.segmentation {
            let blocks = seg
                .blocks
                .iter()
                .map(BlockFile::to_model)
                .collect::<Result<Vec<_>>>()?;
            block.segmentation = Some(SegmentationRule {
                blocks,
                edges: seg
                    .edges
                    .iter()
                    .map(|(a, b)| (BlockId::new(a.as_str()), BlockId::new(b.as_str())))
                    .collect(),
                entry: BlockId::new(seg.entry.as_str()),
                exit: BlockId::new(seg.exit.as_str()),
            });
        }
        Ok(block)
    }
}

impl GraphFile {
    pub fn parse(json: &str) -> Result<GraphFile> {
        serde_json::from_str(json).context("parsing graph description")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph file serializes")
    }

    /// Build the validated model: graph, platform, and planner budget.
    pub fn to_model(&self) -> Result<(BlockGraph, Platform, BigUint)> {
        let convention = match self.cost_convention.as_str() {
            "cpu-time" => CostConvention::CpuTime,
            "ops-per-second" => CostConvention::OpsPerSecond,
            other => bail!("unknown cost convention {other:?}"),
        };
        let blocks = self
            .blocks
            .iter()
            .map(BlockFile::to_model)
            .collect::<Result<Vec<_>>>()?;
        let edges = self
            .edges
            .iter()
            .map(|(a, b)| (BlockId::new(a.as_str()), BlockId::new(b.as_str())))
            .collect();
        let to_ids = |names: &Option<Vec<String>>| {
            names
                .as_ref()
                .map(|v| v.iter().map(|s| BlockId::new(s.as_str())).collect::<Vec<_>>())
        };
        let graph = BlockGraph::with_declared_io(
            blocks,
            edges,
            convention,
            to_ids(&self.external_inputs),
            to_ids(&self.external_outputs),
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;

        let tiers = self
            .platform
            .latency_tiers
            .iter()
            .map(|t| {
                Ok((
                    BigUint::from(t.max_bytes),
                    parse_rational(&t.cost).map_err(|e| anyhow::anyhow!("latency tier: {e}"))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let latency = LatencyModel::new(
            tiers,
            parse_rational(&self.platform.latency_beyond)
                .map_err(|e| anyhow::anyhow!("latency beyond: {e}"))?,
        );
        let platform = Platform::new(
            parse_rational(&self.platform.compute_power)
                .map_err(|e| anyhow::anyhow!("compute power: {e}"))?,
            BigUint::from(self.platform.memory_bytes),
            parse_rational(&self.platform.mul_cost).map_err(|e| anyhow::anyhow!("mul cost: {e}"))?,
            parse_rational(&self.platform.add_cost).map_err(|e| anyhow::anyhow!("add cost: {e}"))?,
            latency,
        )
        .map_err(|e| anyhow::anyhow!("{e}"))?;

        Ok((graph, platform, BigUint::from(self.budget_bytes)))
    }
}
