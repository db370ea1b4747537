//! The verify / bench / plan / report / nco-bench runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigUint;
use num_complex::Complex64;
use num_rational::BigRational;
use serde_json::json;
use sha2::{Digest, Sha256};

use memaccel::accel::{TabledDecoder, ACS_LOOKUPS_PER_STEP, MIN_SELECT_LOOKUPS_PER_STEP};
use memaccel::model::{acceleration_efficiency, acceleration_factor, merit_unthrottled};
use memaccel::nco::ToneBank;
use memaccel::planner::{exhaustive_plan, plan, Termination, EXHAUSTIVE_MAX_BLOCKS};
use memaccel::tables::{AcsTable, MinSelectTable};
use memaccel::trellis::CodeSpec;
use memaccel::viterbi::{acs_group, Decoder, DecoderConfig};

use crate::channel::{bits_to_dibits, bsc, dibits_to_bits, random_bits};
use crate::graph_file::GraphFile;
use crate::numeric::{format_sig, parse_rational, rational_to_f64};
use crate::report::{hex, Report, TableDigests};
use crate::table_io;

/// Default table budget when building in memory: generous headroom over
/// the 16 MiB the decoder tables need.
pub const DEFAULT_TABLE_BUDGET: u64 = 64 << 20;

/// Crossover probabilities swept by `verify`.
pub const VERIFY_CROSSOVERS: [f64; 4] = [0.0, 0.01, 0.05, 0.1];

#[derive(Debug, Clone)]
pub struct DecodeRunConfig {
    pub seed: u64,
    pub info_bits: usize,
    pub bsc_p: f64,
    pub depth: usize,
    pub reps: usize,
    pub tables_dir: Option<PathBuf>,
    pub budget: u64,
}

impl DecodeRunConfig {
    fn decoder_config(&self) -> Result<DecoderConfig> {
        DecoderConfig::new(CodeSpec::dvbt(), self.depth).map_err(|e| anyhow!("{e}"))
    }

    fn config_json(&self, command: &str) -> serde_json::Value {
        json!({
            "command": command,
            "seed": self.seed,
            "info_bits": self.info_bits,
            "bsc_p": self.bsc_p,
            "traceback_depth": self.depth,
            "repetitions": self.reps,
            "tables_dir": self.tables_dir.as_ref().map(|p| p.display().to_string()),
            "budget_bytes": self.budget,
        })
    }
}

fn obtain_tables(
    code: &CodeSpec,
    dir: Option<&Path>,
    budget: u64,
) -> Result<(AcsTable, MinSelectTable)> {
    match dir {
        Some(dir) => table_io::load_decoder_tables(code, dir)
            .with_context(|| format!("loading tables from {} (run build-tables first)", dir.display())),
        None => {
            let acs = AcsTable::build(code, budget).map_err(|e| anyhow!("{e}"))?;
            let min_select = MinSelectTable::build(code, budget).map_err(|e| anyhow!("{e}"))?;
            Ok((acs, min_select))
        }
    }
}

fn digests(acs: &AcsTable, min_select: &MinSelectTable) -> TableDigests {
    TableDigests {
        acs: hex(acs.as_table().digest()),
        min_select: hex(min_select.as_table().digest()),
    }
}

/// Info bits plus flush tail, and the corresponding noisy dibit stream.
pub fn workload(
    code: &CodeSpec,
    info_bits: usize,
    seed: u64,
    p: f64,
    channel_seed: u64,
) -> (Vec<u8>, Vec<u8>) {
    let mut bits = random_bits(info_bits, seed);
    bits.extend(std::iter::repeat_n(0u8, code.constraint_length() as usize - 1));
    let (dibits, _) = code.encode(&bits);
    let noisy = bsc(&dibits_to_bits(&dibits), p, channel_seed);
    (bits, bits_to_dibits(&noisy))
}

fn median_seconds(mut times: Vec<f64>) -> f64 {
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = times.len();
    if n % 2 == 1 {
        times[n / 2]
    } else {
        (times[n / 2 - 1] + times[n / 2]) / 2.0
    }
}

pub fn cmd_build_tables(dir: &Path, budget: u64) -> Result<Report> {
    let code = CodeSpec::dvbt();
    let mut report = Report::new(
        "build-tables",
        json!({ "tables_dir": dir.display().to_string(), "budget_bytes": budget }),
    );
    let started = Instant::now();
    let acs = AcsTable::build(&code, budget).map_err(|e| anyhow!("{e}"))?;
    let remaining = budget.saturating_sub(AcsTable::SPEC.total_bytes());
    let min_select = MinSelectTable::build(&code, remaining).map_err(|e| anyhow!("{e}"))?;
    let build_seconds = started.elapsed().as_secs_f64();
    table_io::save_decoder_tables(dir, &acs, &min_select)?;
    report.table_digests = Some(digests(&acs, &min_select));
    report.results = json!({
        "acs_bytes": AcsTable::SPEC.total_bytes(),
        "min_select_bytes": MinSelectTable::SPEC.total_bytes(),
        "build_seconds": build_seconds,
    });
    report.check("tables-written", true, format!("wrote tables into {}", dir.display()));
    Ok(report)
}

/// Exhaustive table equivalence, differential decoding across the
/// crossover sweep, and the noiseless round trip.
pub fn cmd_verify(cfg: &DecodeRunConfig) -> Result<Report> {
    let code = CodeSpec::dvbt();
    let decoder_config = cfg.decoder_config()?;
    let mut report = Report::new("verify", cfg.config_json("verify"));
    let (acs, min_select) = obtain_tables(&code, cfg.tables_dir.as_deref(), cfg.budget)?;
    report.table_digests = Some(digests(&acs, &min_select));

    let mut acs_mismatches = 0u64;
    for key in 0..AcsTable::SPEC.entry_count() {
        let (group, dibit, metrics) = AcsTable::split_key(key);
        if acs.lookup(group, dibit, metrics) != acs_group(&code, group, dibit, metrics) {
            acs_mismatches += 1;
        }
    }
    report.check(
        "acs-table-exhaustive",
        acs_mismatches == 0,
        format!("{} keys checked, {acs_mismatches} mismatches", AcsTable::SPEC.entry_count()),
    );

    let mut min_select_mismatches = 0u64;
    for key in 0..=u16::MAX {
        let mut best = (0u8, (key & 0xF) as u8);
        for slot in 1..4u8 {
            let value = ((key >> (4 * slot)) & 0xF) as u8;
            if value < best.1 {
                best = (slot, value);
            }
        }
        if min_select.lookup(key) != best {
            min_select_mismatches += 1;
        }
    }
    report.check(
        "min-select-table-exhaustive",
        min_select_mismatches == 0,
        format!("65536 keys checked, {min_select_mismatches} mismatches"),
    );

    let mut reference = Decoder::new(decoder_config.clone());
    let mut tabled = TabledDecoder::new(decoder_config, acs, min_select)
        .map_err(|e| anyhow!("{e}"))?;
    for (round, &p) in VERIFY_CROSSOVERS.iter().enumerate() {
        let (bits, dibits) =
            workload(&code, cfg.info_bits, cfg.seed, p, cfg.seed.wrapping_add(round as u64 + 1));
        let expected = reference.decode(&dibits);
        let got = tabled.decode(&dibits);
        report.check(
            &format!("differential-decode-p{p}"),
            got == expected,
            format!("{} info bits", cfg.info_bits),
        );
        if p == 0.0 {
            report.check(
                "noiseless-round-trip",
                expected == bits,
                format!("{} bits including tail", bits.len()),
            );
        }
    }
    Ok(report)
}

/// Unthrottled wall-clock throughput of both decoders on one workload,
/// repeated and summarized by the median.
pub fn cmd_bench(cfg: &DecodeRunConfig) -> Result<Report> {
    let code = CodeSpec::dvbt();
    let decoder_config = cfg.decoder_config()?;
    if cfg.reps == 0 {
        bail!("bench needs at least one repetition");
    }
    let mut report = Report::new("bench", cfg.config_json("bench"));
    let (acs, min_select) = obtain_tables(&code, cfg.tables_dir.as_deref(), cfg.budget)?;
    report.table_digests = Some(digests(&acs, &min_select));

    let (_, dibits) = workload(&code, cfg.info_bits, cfg.seed, cfg.bsc_p, cfg.seed ^ 0x5eed);
    let steps = dibits.len() as u64;

    let mut reference = Decoder::new(decoder_config.clone());
    let mut tabled = TabledDecoder::new(decoder_config, acs, min_select)
        .map_err(|e| anyhow!("{e}"))?;

    // Untimed warm-up, then interleaved repetitions so clock drift hits
    // both decoders alike and cancels out of the ratio.
    let reference_out = reference.decode(&dibits);
    let tabled_warmup = tabled.decode(&dibits);
    report.check(
        "decoders-agree-warmup",
        tabled_warmup == reference_out,
        format!("{steps} trellis steps"),
    );
    tabled.reset_lookup_counts();

    let mut reference_times = Vec::with_capacity(cfg.reps);
    let mut tabled_times = Vec::with_capacity(cfg.reps);
    let mut tabled_out = Vec::new();
    for rep in 0..cfg.reps {
        let started = Instant::now();
        let out = reference.decode(&dibits);
        reference_times.push(started.elapsed().as_secs_f64());
        if out != reference_out {
            report.check("reference-repeatable", false, "decode changed between repetitions");
        }

        let started = Instant::now();
        let out = tabled.decode(&dibits);
        tabled_times.push(started.elapsed().as_secs_f64());
        if rep == 0 {
            tabled_out = out;
        } else if out != tabled_out {
            report.check("tabled-repeatable", false, "decode changed between repetitions");
        }
    }

    report.check("decoders-agree", tabled_out == reference_out, format!("{steps} trellis steps"));

    // Per timed decode: 16 ACS reads per step, 21 min-select reads per
    // step plus one final 21-read tournament for the flush.
    let (acs_reads, min_select_reads) = tabled.lookup_counts();
    let expected_acs = ACS_LOOKUPS_PER_STEP * steps * cfg.reps as u64;
    let expected_min_select =
        MIN_SELECT_LOOKUPS_PER_STEP * (steps + 1) * cfg.reps as u64;
    report.check(
        "lookup-counts-exact",
        (acs_reads, min_select_reads) == (expected_acs, expected_min_select),
        format!(
            "acs {acs_reads}/{expected_acs}, min-select {min_select_reads}/{expected_min_select}"
        ),
    );

    let median_reference = median_seconds(reference_times.clone());
    let median_tabled = median_seconds(tabled_times.clone());
    // The speedup is the median of the per-repetition ratios: each ratio
    // pairs measurements adjacent in time, so machine drift cancels.
    let accel = median_seconds(
        reference_times.iter().zip(&tabled_times).map(|(r, t)| r / t).collect(),
    );
    let digest = hex(&Sha256::digest(&tabled_out));
    report.results = json!({
        "trellis_steps": steps,
        "median_reference_seconds": median_reference,
        "median_tabled_seconds": median_tabled,
        "reference_bits_per_second": cfg.info_bits as f64 / median_reference,
        "tabled_bits_per_second": cfg.info_bits as f64 / median_tabled,
        "measured_accel_factor": accel,
        "decoded_sha256": digest,
        "lookups": {
            "acs": { "observed": acs_reads, "expected": expected_acs },
            "min_select": { "observed": min_select_reads, "expected": expected_min_select },
        },
    });
    Ok(report)
}

/// Decoded-bit error rate of the reference decoder against the
/// transmitted bits.
pub fn measure_ber(info_bits: usize, p: f64, depth: usize, seed: u64) -> Result<(u64, f64)> {
    let code = CodeSpec::dvbt();
    let config = DecoderConfig::new(code.clone(), depth).map_err(|e| anyhow!("{e}"))?;
    let (bits, dibits) = workload(&code, info_bits, seed, p, seed.wrapping_add(1));
    let mut decoder = Decoder::new(config);
    let decoded = decoder.decode(&dibits);
    let errors = bits
        .iter()
        .take(info_bits)
        .zip(decoded.iter())
        .filter(|(a, b)| a != b)
        .count() as u64;
    Ok((errors, errors as f64 / info_bits as f64))
}

fn rational_json(value: &BigRational) -> serde_json::Value {
    json!({ "exact": value.to_string(), "approx": rational_to_f64(value) })
}

pub fn cmd_plan(graph_path: &Path, budget_override: Option<u64>, compare: bool) -> Result<Report> {
    let text = std::fs::read_to_string(graph_path)
        .with_context(|| format!("reading {}", graph_path.display()))?;
    let file = GraphFile::parse(&text)?;
    let (graph, platform, file_budget) = file.to_model()?;
    let budget = budget_override.map(BigUint::from).unwrap_or(file_budget);

    let mut report = Report::new(
        "plan",
        json!({
            "graph": graph_path.display().to_string(),
            "budget_bytes": budget.to_string(),
            "blocks": graph.len(),
            "compare_exhaustive": compare,
        }),
    );

    let result = plan(&graph, &platform, &budget).map_err(|e| anyhow!("{e}"))?;
    let metrics = result.metrics(&platform).map_err(|e| anyhow!("{e}"))?;

    let tables: Vec<serde_json::Value> = result
        .tables
        .iter()
        .map(|t| {
            let efficiency = acceleration_efficiency(
                &t.boundary.enclosed_cost,
                &t.management_cost,
                &t.boundary.table_bytes,
            )
            .ok();
            json!({
                "members": t.boundary.members.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "input_count": t.boundary.input_count,
                "input_cardinality": t.boundary.input_cardinality.to_string(),
                "output_bytes": t.boundary.output_bytes,
                "table_bytes": t.boundary.table_bytes.to_string(),
                "enclosed_cost": rational_json(&t.boundary.enclosed_cost),
                "management_cost": rational_json(&t.management_cost),
                "efficiency": efficiency.as_ref().map(rational_json),
            })
        })
        .collect();

    let mut results = json!({
        "tables": tables,
        "residual": result.residual.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "residual_cost": rational_json(&result.residual_cost),
        "termination": match result.termination {
            Termination::FullyTabled => "fully-tabled",
            Termination::MemoryExhausted => "memory-exhausted",
        },
        "total_table_bytes": result.total_table_bytes().to_string(),
        "metrics": {
            "accel_factor": rational_json(&metrics.accel_factor),
            "accel_factor_bound": metrics.accel_factor_bound.as_ref().map(rational_json),
            "efficiency": metrics.efficiency.as_ref().map(rational_json),
            "efficiency_negative": metrics.efficiency_negative,
            "merit": rational_json(&metrics.merit),
        },
        "diagnostics": result.diagnostics,
    });

    report.check(
        "budget-respected",
        result.total_table_bytes() <= budget,
        format!("{} of {budget} bytes", result.total_table_bytes()),
    );

    if compare {
        if graph.len() <= EXHAUSTIVE_MAX_BLOCKS {
            let oracle = exhaustive_plan(&graph, &platform, &budget).map_err(|e| anyhow!("{e}"))?;
            let oracle_metrics = oracle.metrics(&platform).map_err(|e| anyhow!("{e}"))?;
            report.check(
                "within-exhaustive-bound",
                metrics.accel_factor <= oracle_metrics.accel_factor,
                format!(
                    "greedy {} vs exhaustive {}",
                    format_sig(rational_to_f64(&metrics.accel_factor), 3),
                    format_sig(rational_to_f64(&oracle_metrics.accel_factor), 3),
                ),
            );
            results["exhaustive_accel_factor"] = rational_json(&oracle_metrics.accel_factor);
        } else {
            report.check(
                "within-exhaustive-bound",
                true,
                format!("skipped: {} blocks exceed the {EXHAUSTIVE_MAX_BLOCKS}-block oracle", graph.len()),
            );
        }
    }

    report.results = results;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct ReportInputs {
    pub tabled_cost: String,
    pub management_cost: String,
    pub residual_cost: String,
    pub table_bytes: Option<u64>,
    pub memory_bytes: Option<u64>,
}

/// Metric computation from measured or modeled costs.
pub fn cmd_report(inputs: &ReportInputs) -> Result<Report> {
    let tabled = parse_rational(&inputs.tabled_cost).map_err(|e| anyhow!("tabled cost: {e}"))?;
    let management =
        parse_rational(&inputs.management_cost).map_err(|e| anyhow!("management cost: {e}"))?;
    let residual =
        parse_rational(&inputs.residual_cost).map_err(|e| anyhow!("residual cost: {e}"))?;

    let mut report = Report::new(
        "report",
        json!({
            "tabled_cost": inputs.tabled_cost,
            "management_cost": inputs.management_cost,
            "residual_cost": inputs.residual_cost,
            "table_bytes": inputs.table_bytes,
            "memory_bytes": inputs.memory_bytes,
        }),
    );

    let accel = acceleration_factor(&residual, &tabled, &management).map_err(|e| anyhow!("{e}"))?;
    let mut results = json!({
        "accel_factor": rational_json(&accel),
        "accel_factor_3sf": format_sig(rational_to_f64(&accel), 3),
    });
    if let Some(bytes) = inputs.table_bytes {
        let eta = acceleration_efficiency(&tabled, &management, &BigUint::from(bytes))
            .map_err(|e| anyhow!("{e}"))?;
        results["efficiency"] = rational_json(&eta);
        results["efficiency_negative"] = json!(eta < BigRational::from_integer(0.into()));
    }
    if let Some(memory) = inputs.memory_bytes {
        let merit = merit_unthrottled(&tabled, &management, &BigUint::from(memory))
            .map_err(|e| anyhow!("{e}"))?;
        results["merit"] = rational_json(&merit);
    }
    report.results = results;
    report.check("computed", true, "metrics computed from supplied costs");
    Ok(report)
}

/// Tone-bank accuracy against the computed oscillator, plus unthrottled
/// throughput of both corrector implementations.
pub fn cmd_nco_bench(period: usize, offset_count: usize, seed: u64, reps: usize) -> Result<Report> {
    if offset_count == 0 || reps == 0 {
        bail!("nco-bench needs offsets and repetitions");
    }
    let mut report = Report::new(
        "nco-bench",
        json!({ "period": period, "offset_count": offset_count, "seed": seed, "repetitions": reps }),
    );

    let offsets: Vec<f64> =
        (0..offset_count).map(|i| (i as f64 - offset_count as f64 / 2.0) / offset_count as f64).collect();
    let started = Instant::now();
    let bank = ToneBank::build(period, &offsets);
    let build_seconds = started.elapsed().as_secs_f64();

    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Complex64> = (0..period)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect();

    let computed = |offset: f64| -> Vec<Complex64> {
        samples
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let phase = -std::f64::consts::TAU * offset * k as f64 / period as f64;
                s * Complex64::new(phase.cos(), phase.sin())
            })
            .collect()
    };

    let mut max_error = 0.0f64;
    for (idx, &offset) in offsets.iter().enumerate() {
        let tabled = bank.correct(&samples, idx).map_err(|e| anyhow!("{e}"))?;
        for (a, b) in tabled.iter().zip(computed(offset)) {
            max_error = max_error.max((a.re - b.re).abs()).max((a.im - b.im).abs());
        }
    }
    report.check(
        "tabled-corrector-accuracy",
        max_error <= 1e-3,
        format!("max per-component error {max_error:.3e} (bound 1e-3)"),
    );

    let probe = offset_count / 2;
    let mut tabled_times = Vec::with_capacity(reps);
    let mut computed_times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let started = Instant::now();
        let out = bank.correct(&samples, probe).map_err(|e| anyhow!("{e}"))?;
        tabled_times.push(started.elapsed().as_secs_f64());
        std::hint::black_box(out);

        let started = Instant::now();
        let out = computed(offsets[probe]);
        computed_times.push(started.elapsed().as_secs_f64());
        std::hint::black_box(out);
    }
    let median_tabled = median_seconds(tabled_times);
    let median_computed = median_seconds(computed_times);
    report.results = json!({
        "table_bytes": bank.table_bytes(),
        "build_seconds": build_seconds,
        "max_error": max_error,
        "median_tabled_seconds": median_tabled,
        "median_computed_seconds": median_computed,
        "measured_accel_factor": median_computed / median_tabled,
    });
    Ok(report)
}
