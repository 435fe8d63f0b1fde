//! Random binary networks and the search that finds a gadget plan inside
//! one by pruning alone.
//!
//! The random network is `width_factor` times wider than the plan's logical
//! hidden layers; every logical hidden neuron owns a disjoint slab of
//! `width_factor` candidate rows. The search is greedy and layerwise: units
//! are matched against the incoming signs from already-selected predecessors
//! only, which makes per-unit failure events independent across units of a
//! layer. Selection (block-output) layers are exact-width: their rows are
//! fixed, and adaptivity comes from choosing which retained chain finals
//! each row taps. The analytic reference bound d*l*log2(W)^2 * (15/16)^k is
//! intentionally conservative with respect to this search.

use crate::construct::{plan_network, GadgetPlan};
use crate::error::{Error, Result};
use crate::network::{BinaryNetwork, EvalPoint, IntegerNetwork, MaskSet, TargetNetwork};
use crate::precision::{
    required_precision, scale_to_integer, truncate_network, PrecisionSpec, TruncationReport,
};
use crate::ratio::{pow10_inv, Rat};
use crate::rng::derive_indexed_seed;
use crate::{par, verify};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Parameters of one embedding attempt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedConfig {
    /// Failure probability target used to derive the width factor.
    pub delta: f64,
    /// Candidate multiplicity per logical hidden neuron (k).
    pub width_factor: usize,
    /// Seed of the random source.
    pub seed: u64,
}

impl EmbedConfig {
    pub fn new(delta: f64, width_factor: usize, seed: u64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("delta must be in (0,1), got {delta}")));
        }
        if width_factor == 0 {
            return Err(Error::Config("width factor must be >= 1".into()));
        }
        Ok(EmbedConfig {
            delta,
            width_factor,
            seed,
        })
    }
}

/// Search statistics for one logical unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitStat {
    pub layer: usize,
    pub unit: String,
    pub candidates_examined: u32,
    pub matches_found: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedSummary {
    pub units: usize,
    pub candidates_examined: u64,
    pub matches_found: u64,
}

/// Successful embedding: masks over the random network plus search
/// statistics. Identical (plan, seed, config) inputs yield byte-identical
/// results.
#[derive(Debug, Clone)]
pub struct EmbedResult {
    pub masks: MaskSet,
    pub success: bool,
    pub stats: Vec<UnitStat>,
    pub summary: EmbedSummary,
}

#[derive(Serialize)]
struct EmbedResultRepr<'a> {
    success: bool,
    summary: &'a EmbedSummary,
    stats: &'a [UnitStat],
}

impl EmbedResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&EmbedResultRepr {
            success: self.success,
            summary: &self.summary,
            stats: &self.stats,
        })?)
    }
}

/// Uniform random ±1 network of the given widths; deterministic in the seed
/// and never materialized (entries are computed on demand).
pub fn sample_binary(widths: &[usize], depth: usize, seed: u64) -> Result<BinaryNetwork> {
    if widths.len() != depth + 1 {
        return Err(Error::Shape(format!(
            "depth {depth} inconsistent with {} widths",
            widths.len()
        )));
    }
    BinaryNetwork::seeded(widths.to_vec(), seed)
}

/// log2 of a positive integer bound, as a float (0 for W <= 1).
fn log2_weight(bound: &BigInt) -> f64 {
    let w = bound.to_f64().unwrap_or(0.0);
    if w <= 1.0 {
        0.0
    } else {
        w.log2()
    }
}

/// Number of diamond-shaped structures the union bound counts:
/// d * l * log2(W)^2.
pub fn diamond_count(d: usize, l: usize, weight_bound: &BigInt) -> f64 {
    let lg = log2_weight(weight_bound);
    (d * l) as f64 * lg * lg
}

/// Analytic failure bound d*l*log2(W)^2 * (15/16)^k, clamped to [0,1].
pub fn analytic_failure_bound(d: usize, l: usize, weight_bound: &BigInt, k: usize) -> f64 {
    let b = diamond_count(d, l, weight_bound) * (15.0f64 / 16.0).powi(k as i32);
    b.clamp(0.0, 1.0)
}

/// Smallest width factor k with d*l*log2(W)^2 * (15/16)^k <= delta, clamped
/// to at least 1.
pub fn min_width_factor(d: usize, l: usize, weight_bound: &BigInt, delta: f64) -> Result<usize> {
    if d == 0 || l == 0 {
        return Err(Error::Config("width and depth must be >= 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("delta must be in (0,1), got {delta}")));
    }
    let count = diamond_count(d, l, weight_bound);
    if count <= delta {
        return Ok(1);
    }
    let k = ((count / delta).ln() / (16.0f64 / 15.0).ln()).ceil();
    Ok((k as usize).max(1))
}

/// Widths of the random network an embedding searches: hidden (mirror and
/// chain) layers are width_factor times the logical widths; block-output
/// interfaces and the input stay exact.
pub fn embed_widths(plan: &GadgetPlan, width_factor: usize) -> Vec<usize> {
    let mut widths = vec![plan.input_dim];
    for block in &plan.blocks {
        widths.push(2 * block.in_width * width_factor);
        for _ in 0..plan.chain_len {
            widths.push(plan.chain_width(block.in_width) * width_factor);
        }
        widths.push(block.out_width);
    }
    widths
}

// ---------------------------------------------------------------------------
// The greedy layerwise search
// ---------------------------------------------------------------------------

/// A retained chain final: one physical row of the last chain layer whose
/// incoming signs continue the chain, and whether a selection row tapped it.
#[derive(Debug)]
struct FinalRow {
    row: usize,
    used: bool,
}

struct Embedder<'a> {
    plan: &'a GadgetPlan,
    net: &'a BinaryNetwork,
    k: usize,
    masks: MaskSet,
    stats: Vec<UnitStat>,
}

impl Embedder<'_> {
    fn record(&mut self, layer: usize, unit: String, examined: u32, matches: u32) {
        self.stats.push(UnitStat {
            layer,
            unit,
            candidates_examined: examined,
            matches_found: matches,
        });
    }

    fn fail(&self, layer: usize, unit: &str) -> Error {
        Error::EmbedFailure {
            layer,
            unit: unit.to_string(),
        }
    }

    /// True when every predecessor column carries the wanted sign into
    /// `row`.
    fn row_matches(&self, layer: usize, row: usize, prev_cols: &[usize], want: i8) -> bool {
        prev_cols
            .iter()
            .all(|&c| self.net.sign(layer, row, c) == want)
    }

    /// Scans `slab` in order for up to `need` rows matching the pattern;
    /// returns (selected rows, candidates examined, matches found).
    fn scan(
        &self,
        layer: usize,
        slab: std::ops::Range<usize>,
        prev_cols: &[usize],
        want: i8,
        need: usize,
    ) -> (Vec<usize>, u32, u32) {
        let mut rows = Vec::with_capacity(need);
        let mut examined = 0;
        for r in slab {
            examined += 1;
            if self.row_matches(layer, r, prev_cols, want) {
                rows.push(r);
                if rows.len() == need {
                    break;
                }
            }
        }
        let matches = rows.len() as u32;
        (rows, examined, matches)
    }

    /// Scans the whole slab and keeps every matching row (final positions,
    /// where retained alternatives give selection rows sign diversity).
    fn scan_all(
        &self,
        layer: usize,
        slab: std::ops::Range<usize>,
        prev_cols: &[usize],
    ) -> (Vec<usize>, u32, u32) {
        let mut rows = Vec::new();
        let mut examined = 0;
        for r in slab {
            examined += 1;
            if self.row_matches(layer, r, prev_cols, 1) {
                rows.push(r);
            }
        }
        let matches = rows.len() as u32;
        (rows, examined, matches)
    }

    fn keep(&mut self, layer: usize, row: usize, cols: &[usize]) {
        for &c in cols {
            self.masks.mask_mut(layer).set(row, c, true);
        }
    }

    fn embed(&mut self) -> Result<()> {
        let k = self.k;
        let chain_len = self.plan.chain_len;
        let power_count = self.plan.power_count;

        for (b, block) in self.plan.blocks.iter().enumerate() {
            let mirror_layer = block.layer_offset;
            let sel_layer = mirror_layer + chain_len + 1;

            // liveness: a bundle is searched only if some selection row taps
            // it; a mirror pair only if some bundle of its input is live
            let mut bundle_live = vec![false; block.bundles.len()];
            for row in &block.selections {
                for tap in &row.taps {
                    bundle_live[tap.input * power_count + tap.power] = true;
                }
            }
            let mut input_live = vec![false; block.in_width];
            for (idx, bundle) in block.bundles.iter().enumerate() {
                if bundle_live[idx] {
                    input_live[bundle.input] = true;
                }
            }

            // mirror layer: one +1 row and one -1 row per live input; the
            // predecessor column is the input coordinate (block 0) or the
            // previous block's selection row (exact width), both at index j
            let mut mirror_rows: Vec<[usize; 2]> = vec![[0, 0]; block.in_width];
            for j in 0..block.in_width {
                if !input_live[j] {
                    continue;
                }
                for (side, want) in [(0usize, 1i8), (1usize, -1i8)] {
                    let slab = (2 * j + side) * k..(2 * j + side + 1) * k;
                    let (rows, examined, matches) = self.scan(mirror_layer, slab, &[j], want, 1);
                    let unit = format!("mirror{} b{b} j{j}", if side == 0 { "+" } else { "-" });
                    self.record(mirror_layer, unit.clone(), examined, matches);
                    match rows.first() {
                        Some(&r) => {
                            self.keep(mirror_layer, r, &[j]);
                            mirror_rows[j][side] = r;
                        }
                        None => return Err(self.fail(mirror_layer, &unit)),
                    }
                }
            }

            // chain layers: diamonds position by position; the last position
            // retains every matching row as a potential tap point
            let mut live_rows: Vec<[Vec<usize>; 2]> =
                vec![[Vec::new(), Vec::new()]; block.bundles.len()];
            let mut finals: Vec<[Vec<FinalRow>; 2]> = (0..block.bundles.len())
                .map(|_| [Vec::new(), Vec::new()])
                .collect();
            for t in 1..=chain_len {
                let layer = mirror_layer + t;
                for (idx, bundle) in block.bundles.iter().enumerate() {
                    if !bundle_live[idx] {
                        continue;
                    }
                    for side in 0..2 {
                        let prev_cols: Vec<usize> = if t == 1 {
                            vec![mirror_rows[bundle.input][side]]
                        } else {
                            live_rows[idx][side].clone()
                        };
                        let full = t <= bundle.full_positions;
                        let base = (bundle.row_base + 2 * side) * k;
                        let slab = base..base + 2 * k;
                        let unit = format!(
                            "diamond b{b} j{} p{} {} t{t}",
                            bundle.input,
                            bundle.power,
                            if side == 0 { "+" } else { "-" }
                        );
                        if t < chain_len {
                            let need = if full { 2 } else { 1 };
                            let (rows, examined, matches) =
                                self.scan(layer, slab, &prev_cols, 1, need);
                            self.record(layer, unit.clone(), examined, matches);
                            if rows.len() < need {
                                return Err(self.fail(layer, &unit));
                            }
                            for &r in &rows {
                                self.keep(layer, r, &prev_cols);
                            }
                            live_rows[idx][side] = rows;
                        } else {
                            // final position: the tap atoms a full diamond
                            // needs two of, a pass-through one of
                            let (rows, examined, matches) =
                                self.scan_all(layer, slab, &prev_cols);
                            self.record(layer, unit.clone(), examined, matches);
                            let need = if full { 2 } else { 1 };
                            if rows.len() < need {
                                return Err(self.fail(layer, &unit));
                            }
                            for &r in &rows {
                                self.keep(layer, r, &prev_cols);
                            }
                            finals[idx][side] = rows
                                .into_iter()
                                .map(|row| FinalRow { row, used: false })
                                .collect();
                        }
                    }
                }
            }

            // selection layer: rows are fixed; each tap picks atoms with the
            // required signs among the bundle's retained finals
            for (o, selection) in block.selections.iter().enumerate() {
                for tap in &selection.taps {
                    let idx = tap.input * power_count + tap.power;
                    let bundle = &block.bundles[idx];
                    let atoms_needed = if bundle.full_positions == chain_len {
                        2
                    } else {
                        1
                    };
                    let sign: i8 = if tap.negative { -1 } else { 1 };
                    for (side, want) in [(0usize, sign), (1usize, -sign)] {
                        let pool = &mut finals[idx][side];
                        let mut picked = Vec::with_capacity(atoms_needed);
                        let mut examined = 0;
                        for f in pool.iter_mut() {
                            examined += 1;
                            if self.net.sign(sel_layer, o, f.row) == want {
                                f.used = true;
                                picked.push(f.row);
                                if picked.len() == atoms_needed {
                                    break;
                                }
                            }
                        }
                        let unit = format!(
                            "tap b{b} row{o} j{} p{} {}",
                            tap.input,
                            tap.power,
                            if side == 0 { "+" } else { "-" }
                        );
                        self.record(sel_layer, unit.clone(), examined, picked.len() as u32);
                        if picked.len() < atoms_needed {
                            return Err(self.fail(sel_layer, &unit));
                        }
                        for r in picked {
                            self.masks.mask_mut(sel_layer).set(o, r, true);
                        }
                    }
                }
            }

            // prune retained finals nothing tapped
            let final_layer = mirror_layer + chain_len;
            for (idx, bundle) in block.bundles.iter().enumerate() {
                if !bundle_live[idx] {
                    continue;
                }
                for side in 0..2 {
                    let prev_cols: Vec<usize> = if chain_len == 1 {
                        vec![mirror_rows[bundle.input][side]]
                    } else {
                        live_rows[idx][side].clone()
                    };
                    for f in &finals[idx][side] {
                        if !f.used {
                            for &c in &prev_cols {
                                self.masks.mask_mut(final_layer).set(f.row, c, false);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Finds the plan inside a random binary network by pruning alone. Errors
/// with the first unmatched unit; the caller may resample and retry.
pub fn embed_plan(
    plan: &GadgetPlan,
    random: &BinaryNetwork,
    config: &EmbedConfig,
) -> Result<EmbedResult> {
    let k = config.width_factor;
    let expected = embed_widths(plan, k);
    if random.depth() + 1 != expected.len() {
        return Err(Error::Shape(format!(
            "random network depth {} does not match plan depth {}",
            random.depth(),
            expected.len() - 1
        )));
    }
    let actual = random.widths();
    if actual[0] != expected[0] || actual[expected.len() - 1] != expected[expected.len() - 1] {
        return Err(Error::Shape(
            "random network interface widths must match the plan exactly".into(),
        ));
    }
    for (i, (&a, &e)) in actual.iter().zip(&expected).enumerate() {
        if a < e {
            return Err(Error::Shape(format!(
                "random layer {i} width {a} below required {e}"
            )));
        }
    }

    let mut embedder = Embedder {
        plan,
        net: random,
        k,
        masks: MaskSet::zeros_for(random),
        stats: Vec::new(),
    };
    embedder.embed()?;
    let summary = EmbedSummary {
        units: embedder.stats.len(),
        candidates_examined: embedder
            .stats
            .iter()
            .map(|s| u64::from(s.candidates_examined))
            .sum(),
        matches_found: embedder
            .stats
            .iter()
            .map(|s| u64::from(s.matches_found))
            .sum(),
    };
    Ok(EmbedResult {
        masks: embedder.masks,
        success: true,
        stats: embedder.stats,
        summary,
    })
}

// ---------------------------------------------------------------------------
// Monte-Carlo failure estimation
// ---------------------------------------------------------------------------

/// Empirical embed failure rate with a 95% Wilson confidence interval,
/// paired with the analytic reference bound at the same width factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub width_factor: usize,
    pub trials: u64,
    pub failures: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub analytic_bound: f64,
}

/// 95% Wilson score interval for x successes in n trials.
pub fn wilson_interval(x: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64;
    let n_f = n as f64;
    let p = x as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn mc_report(plan: &GadgetPlan, width_factor: usize, trials: u64, failures: u64) -> McReport {
    let (ci_low, ci_high) = wilson_interval(failures, trials);
    McReport {
        width_factor,
        trials,
        failures,
        rate: failures as f64 / trials as f64,
        ci_low,
        ci_high,
        analytic_bound: analytic_failure_bound(
            plan.target_max_width(),
            plan.target_depth(),
            &plan.weight_bound_int(),
            width_factor,
        ),
    }
}

fn mc_trial(plan: &GadgetPlan, widths: &[usize], config: &EmbedConfig, seed: u64, t: u64) -> u64 {
    let trial_seed = derive_indexed_seed(seed, "mc-trial", t);
    let net = match sample_binary(widths, widths.len() - 1, trial_seed) {
        Ok(net) => net,
        Err(_) => return 1,
    };
    match embed_plan(plan, &net, config) {
        Ok(_) => 0,
        Err(_) => 1,
    }
}

/// Runs `trials` seeded embedding attempts of `plan` at width factor `k`
/// and reports the failure fraction. Trials are independent and run in
/// parallel; per-trial seeds derive from (seed, trial index), so the counts
/// do not depend on the worker count.
pub fn failure_rate_mc(
    plan: &GadgetPlan,
    width_factor: usize,
    trials: u64,
    seed: u64,
) -> Result<McReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let config = EmbedConfig::new(0.5, width_factor, seed)?;
    let widths = embed_widths(plan, width_factor);
    let failures = par::sum_indexed(trials, |t| mc_trial(plan, &widths, &config, seed, t));
    Ok(mc_report(plan, width_factor, trials, failures))
}

/// Sequential twin of [`failure_rate_mc`]; identical output, used as the
/// bench baseline.
pub fn failure_rate_mc_seq(
    plan: &GadgetPlan,
    width_factor: usize,
    trials: u64,
    seed: u64,
) -> Result<McReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let config = EmbedConfig::new(0.5, width_factor, seed)?;
    let widths = embed_widths(plan, width_factor);
    let failures = par::sum_indexed_seq(trials, |t| mc_trial(plan, &widths, &config, seed, t));
    Ok(mc_report(plan, width_factor, trials, failures))
}

// ---------------------------------------------------------------------------
// End-to-end pipeline
// ---------------------------------------------------------------------------

/// Everything the end-to-end run produces: the scaled binary network and
/// masks, the intermediate artifacts, and the exact-equality certificate.
#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub precision: PrecisionSpec,
    pub truncation: TruncationReport,
    pub truncated: TargetNetwork,
    pub integer: IntegerNetwork,
    pub plan: GadgetPlan,
    pub width_factor: usize,
    /// The sampled random network with the last-layer scale pushed in.
    pub binary: BinaryNetwork,
    pub masks: MaskSet,
    pub embed: EmbedResult,
    pub attempts: u32,
    /// Exact-equality witness between the masked scaled network and the
    /// rescaled truncated target.
    pub exact_certificate: verify::Certificate,
}

/// Resampling cap before the pipeline gives up.
pub const RESAMPLE_CAP: u32 = 16;

/// Truncate, rescale to integers, build the gadget plan, sample a random
/// binary network at the bound-derived width factor, embed (resampling on
/// failure), push the scale 10^(-p*l) into the last layer, and certify
/// exact equality with the rescaled target on the default point set.
pub fn strong_lth_pipeline(
    f: &TargetNetwork,
    eps: &Rat,
    delta: f64,
    seed: u64,
) -> Result<PipelineResult> {
    f.check_unit_norms()?;
    let d = f.max_width();
    let l = f.depth();
    let precision = required_precision(d, l, eps)?;
    let (truncated, truncation) = truncate_network(f, &precision)?;
    let integer = scale_to_integer(&truncated, precision.digits())?;
    let bound = integer.weight_bound();
    let plan = plan_network(&integer, &bound)?;
    let width_factor = min_width_factor(d, l, &bound, delta)?;
    let config = EmbedConfig::new(delta, width_factor, seed)?;
    let widths = embed_widths(&plan, width_factor);
    let depth = widths.len() - 1;

    let mut last_err = None;
    for attempt in 0..RESAMPLE_CAP {
        let net_seed = derive_indexed_seed(seed, "resample", u64::from(attempt));
        let random = sample_binary(&widths, depth, net_seed)?;
        match embed_plan(&plan, &random, &config) {
            Ok(embed) => {
                let scale = if integer.output_scale().is_one() {
                    Rat::one()
                } else {
                    pow10_inv(precision.digits() * l as u32)
                };
                let binary = random.with_last_layer_scale(scale)?;
                let points = verify::default_points(
                    f.input_dim(),
                    100,
                    derive_indexed_seed(seed, "verify", 0),
                );
                let exact_certificate =
                    verify::verify_exact(&integer, &binary, &embed.masks, &points)?;
                return Ok(PipelineResult {
                    precision,
                    truncation,
                    truncated,
                    integer,
                    plan,
                    width_factor,
                    binary,
                    masks: embed.masks.clone(),
                    embed,
                    attempts: attempt + 1,
                    exact_certificate,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    match last_err {
        Some(Error::EmbedFailure { layer, unit }) => Err(Error::EmbedExhausted {
            attempts: RESAMPLE_CAP,
            layer,
            unit,
        }),
        Some(e) => Err(e),
        None => unreachable!("resample loop ran"),
    }
}

/// Evaluates the pipeline's pruned network at a point, exactly.
pub fn pipeline_eval(result: &PipelineResult, x: &EvalPoint) -> Result<Vec<Rat>> {
    crate::network::masked_eval_rational(&result.binary, &result.masks, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::build_network;
    use crate::matrix::Matrix;
    use crate::network::masked_eval_rational;
    use crate::ratio::{parse_rat, rat_from_f64, rat_to_f64};
    use crate::rng::Stream;
    use num_traits::Zero;

    fn rat(s: &str) -> Rat {
        parse_rat(s).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_balanced() {
        let a = sample_binary(&[10, 100, 10], 2, 7).unwrap();
        let b = sample_binary(&[10, 100, 10], 2, 7).unwrap();
        let mut sum = 0i64;
        let mut n = 0u64;
        for layer in 0..2 {
            let (rows, cols) = a.layer_shape(layer);
            for r in 0..rows {
                for c in 0..cols {
                    assert_eq!(a.sign(layer, r, c), b.sign(layer, r, c));
                    sum += i64::from(a.sign(layer, r, c));
                    n += 1;
                }
            }
        }
        assert!(n >= 2000);
        assert!((sum as f64 / n as f64).abs() < 0.05);
    }

    #[test]
    fn all_plus_one_diamond_pattern_frequency() {
        // fixed 2x2 sub-pattern of the first layer across 10^5 seeds
        let trials = 100_000u64;
        let hits = par::sum_indexed(trials, |t| {
            let net = sample_binary(&[2, 2], 1, derive_indexed_seed(0, "pattern", t)).unwrap();
            let all_ones = (0..2).all(|r| (0..2).all(|c| net.sign(0, r, c) == 1));
            u64::from(all_ones)
        });
        let freq = hits as f64 / trials as f64;
        assert!((freq - 1.0 / 16.0).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn min_width_factor_examples() {
        assert_eq!(min_width_factor(4, 2, &BigInt::from(16), 0.05).unwrap(), 122);
        // count <= delta collapses to the clamp
        assert_eq!(min_width_factor(1, 1, &BigInt::from(1), 0.9).unwrap(), 1);
        // one more bit of W moves k only slightly
        let k16 = min_width_factor(4, 2, &BigInt::from(16), 0.05).unwrap();
        let k32 = min_width_factor(4, 2, &BigInt::from(32), 0.05).unwrap();
        assert!(k32 > k16);
        assert!(k32 - k16 <= 10, "k16={k16} k32={k32}");
    }

    #[test]
    fn embed_scalar_plan_end_to_end() {
        let construction = crate::construct::build_scalar(5).unwrap();
        let plan = &construction.plan;
        let k = min_width_factor(1, 1, &BigInt::from(5), 0.1).unwrap();
        assert_eq!(k, 62);
        let widths = embed_widths(plan, k);
        let config = EmbedConfig::new(0.1, k, 3).unwrap();
        let random = sample_binary(&widths, widths.len() - 1, 3).unwrap();
        let result = embed_plan(plan, &random, &config).unwrap();
        assert!(result.success);

        let mut stream = Stream::new(11);
        for _ in 0..50 {
            let x = rat_from_f64(stream.next_range(-4.0, 4.0)).unwrap();
            let point = EvalPoint::new(vec![x.clone()]);
            let got = masked_eval_rational(&random, &result.masks, &point).unwrap();
            let pre = rat("5") * &x;
            let expected = if pre > Rat::zero() { pre } else { Rat::zero() };
            assert_eq!(got, vec![expected]);
        }
    }

    #[test]
    fn embedding_reproduces_the_deterministic_function() {
        let f = IntegerNetwork::from_i64_layers(&[(2, 2, vec![3, -2, 0, 7])]).unwrap();
        let construction = build_network(&f).unwrap();
        let k = min_width_factor(2, 1, &BigInt::from(7), 0.1).unwrap();
        let widths = embed_widths(&construction.plan, k);
        let random = sample_binary(&widths, widths.len() - 1, 19).unwrap();
        let config = EmbedConfig::new(0.1, k, 19).unwrap();
        let result = embed_plan(&construction.plan, &random, &config).unwrap();

        let mut stream = Stream::new(5);
        for _ in 0..50 {
            let coords = vec![
                rat_from_f64(stream.next_range(-2.0, 2.0)).unwrap(),
                rat_from_f64(stream.next_range(-2.0, 2.0)).unwrap(),
            ];
            let point = EvalPoint::new(coords);
            assert_eq!(
                masked_eval_rational(&random, &result.masks, &point).unwrap(),
                masked_eval_rational(&construction.binary, &construction.masks, &point).unwrap()
            );
        }
    }

    #[test]
    fn no_overparameterization_mostly_fails() {
        let construction = crate::construct::build_scalar(5).unwrap();
        let report = failure_rate_mc(&construction.plan, 1, 500, 1).unwrap();
        assert!(report.rate >= 0.5, "rate {}", report.rate);
    }

    #[test]
    fn adversarial_all_minus_network_fails_at_the_first_unit() {
        let construction = crate::construct::build_scalar(3).unwrap();
        let widths = embed_widths(&construction.plan, 2);
        let depth = widths.len() - 1;
        let layers: Vec<Matrix<i8>> = (0..depth)
            .map(|i| Matrix::from_fn(widths[i + 1], widths[i], |_, _| -1i8))
            .collect();
        let net = BinaryNetwork::from_sign_matrices(layers).unwrap();
        let config = EmbedConfig::new(0.1, 2, 0).unwrap();
        match embed_plan(&construction.plan, &net, &config) {
            Err(Error::EmbedFailure { layer, unit }) => {
                assert_eq!(layer, 0);
                assert!(unit.starts_with("mirror+"), "unit {unit}");
            }
            other => panic!("expected EmbedFailure, got {other:?}"),
        }
    }

    #[test]
    fn failure_rate_bound_holds_at_the_derived_factor() {
        let f = IntegerNetwork::from_i64_layers(&[(1, 2, vec![5, -3])]).unwrap();
        let construction = build_network(&f).unwrap();
        let k = min_width_factor(2, 1, &BigInt::from(5), 0.1).unwrap();
        let report = failure_rate_mc(&construction.plan, k, 300, 9).unwrap();
        assert!(report.ci_high <= 0.1, "ci {}", report.ci_high);
        assert!(report.ci_high <= report.analytic_bound.max(0.1));

        // generous width factor: no failures at all
        let generous = failure_rate_mc(&construction.plan, 10 * k, 200, 10).unwrap();
        assert_eq!(generous.failures, 0);

        assert!(failure_rate_mc(&construction.plan, k, 0, 1).is_err());
    }

    #[test]
    fn mc_parallel_and_sequential_agree() {
        let construction = crate::construct::build_scalar(5).unwrap();
        let a = failure_rate_mc(&construction.plan, 4, 100, 42).unwrap();
        let b = failure_rate_mc_seq(&construction.plan, 4, 100, 42).unwrap();
        assert_eq!(a.failures, b.failures);
        assert_eq!(a.rate, b.rate);
    }

    #[test]
    fn pipeline_scalar_target() {
        let f =
            TargetNetwork::new(vec![Matrix::from_vec(1, 1, vec![rat("0.5")]).unwrap()]).unwrap();
        let result = strong_lth_pipeline(&f, &rat("1/10"), 0.1, 5).unwrap();
        assert!(result.truncation.certified_bound <= rat("1/10"));
        let y = pipeline_eval(&result, &EvalPoint::from_i64(&[1])).unwrap();
        let y_f = rat_to_f64(&y[0]);
        assert!((0.4..=0.6).contains(&y_f), "g(1) = {y_f}");
    }

    #[test]
    fn pipeline_zero_target_is_all_pruned() {
        let f = TargetNetwork::new(vec![Matrix::from_vec(
            2,
            2,
            vec![Rat::zero(), Rat::zero(), Rat::zero(), Rat::zero()],
        )
        .unwrap()])
        .unwrap();
        let result = strong_lth_pipeline(&f, &rat("1/10"), 0.2, 8).unwrap();
        assert_eq!(result.masks.kept_count(), 0);
        let y = pipeline_eval(&result, &EvalPoint::from_i64(&[1, -1])).unwrap();
        assert!(y.iter().all(|v| v.is_zero()));
    }

    #[test]
    fn pipeline_random_target_certificate_dominates_sampling() {
        let mut stream = Stream::new(31);
        let mut data: Vec<f64> = (0..6).map(|_| stream.next_range(-1.0, 1.0)).collect();
        let norm = data.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut data {
            *x *= 0.9 / norm;
        }
        let f = TargetNetwork::from_f64_layers(&[(2, 3, data.clone())]).unwrap();
        let result = strong_lth_pipeline(&f, &rat("1/20"), 0.1, 77).unwrap();
        assert!(result.truncation.certified_bound <= rat("1/20"));

        let bound = rat_to_f64(&result.truncation.certified_bound);
        let mut worst = 0.0f64;
        for _ in 0..2_000 {
            let x: Vec<f64> = (0..3).map(|_| stream.next_range(-0.5, 0.5)).collect();
            let fy = f.eval_f64(&x).unwrap();
            let gy = crate::network::masked_eval_f64(&result.binary, &result.masks, &x).unwrap();
            for (a, b) in fy.iter().zip(&gy) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst <= bound + 1e-12, "sampled {worst} vs bound {bound}");
    }

    #[test]
    fn embed_result_json_is_deterministic() {
        let construction = crate::construct::build_scalar(5).unwrap();
        let k = 62;
        let widths = embed_widths(&construction.plan, k);
        let config = EmbedConfig::new(0.1, k, 3).unwrap();
        let run = || {
            let random = sample_binary(&widths, widths.len() - 1, 3).unwrap();
            embed_plan(&construction.plan, &random, &config)
                .unwrap()
                .to_json()
                .unwrap()
        };
        assert_eq!(run(), run());
    }
}
