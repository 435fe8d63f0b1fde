//! Deterministic gadget constructions: binary expansion of integer weights,
//! diamond chains, mirrored chain pairs, and their composition into a binary
//! network + supermask pair that reproduces any integer-weight FC ReLU
//! network exactly.
//!
//! Layout conventions (fixed so plans are reproducible byte-for-byte):
//!
//! - Each target layer becomes a block of `chain_len + 2` binary layers:
//!   a mirror split, `chain_len` diamond-chain layers, and a selection layer
//!   whose rows are the target layer's output neurons.
//! - The mirror layer has two rows per input j: row 2j computes sigma(x_j)
//!   (weight +1) and row 2j+1 computes sigma(-x_j) (weight -1).
//! - Chain layers hold one bundle of four rows per (input j, power p),
//!   ordered lexicographically: rows 4(j*P+p)..+4 are the positive pair
//!   followed by the negative pair.
//! - A chain realizing gain 2^p makes its first p diamonds full (both
//!   branches kept) and pads the rest as pass-throughs (single branch), so
//!   every block is rectangular.
//! - Only the selection layer depends on the actual weight values: row o
//!   keeps, per nonzero entry w and set bit k of |w|, the final live columns
//!   of bundle (j, k), signed +sign(w) on the positive side and -sign(w) on
//!   the negative side. This is what lets many output rows re-use one
//!   bundle.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::{BinaryNetwork, IntegerNetwork, MaskMatrix, MaskSet, TargetNetwork};
use crate::precision::scale_to_integer;
use crate::ratio::Rat;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Binary expansion
// ---------------------------------------------------------------------------

/// Base-2 expansion of a nonzero integer: w = sign * sum z_k 2^k with the
/// top bit always set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryExpansion {
    negative: bool,
    bits: Vec<bool>,
}

impl BinaryExpansion {
    pub fn is_negative(&self) -> bool {
        self.negative
    }

    /// Highest power with a set bit; floor(log2 |w|).
    pub fn top_power(&self) -> usize {
        self.bits.len() - 1
    }

    pub fn bit(&self, k: usize) -> bool {
        self.bits.get(k).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn reconstruct(&self) -> BigInt {
        let mut v = BigInt::zero();
        for (k, &set) in self.bits.iter().enumerate() {
            if set {
                v += BigInt::from(1u8) << k;
            }
        }
        if self.negative {
            -v
        } else {
            v
        }
    }
}

/// Expands a nonzero integer; zero weights are handled by pruning every
/// selection bit instead of expanding.
pub fn binary_expand(w: &BigInt) -> Result<BinaryExpansion> {
    if w.is_zero() {
        return Err(Error::Domain("cannot expand 0; prune the weight".into()));
    }
    let mag = w.magnitude();
    let bits: Vec<bool> = (0..mag.bits()).map(|k| mag.bit(k)).collect();
    Ok(BinaryExpansion {
        negative: w.is_negative(),
        bits,
    })
}

/// floor(log2 W) for W >= 1; 0 for W = 0 (degenerate all-pruned plans).
fn weight_bits(w: &BigInt) -> usize {
    let b = w.magnitude().bits();
    (b.max(1) - 1) as usize
}

// ---------------------------------------------------------------------------
// Standalone gadgets
// ---------------------------------------------------------------------------

/// Width-2 diamond chain computing 2^(n-k) * max(0, x): n diamonds, k of
/// them pruned to pass-throughs (here the trailing k, matching the
/// in-network padding convention). The final combine is materialized as a
/// 1x2 output layer.
#[derive(Debug, Clone)]
pub struct DiamondChain {
    pub net: BinaryNetwork,
    pub masks: MaskSet,
    pub diamonds: usize,
    pub pruned: usize,
}

impl DiamondChain {
    pub fn eval(&self, x: &Rat) -> Result<Rat> {
        let point = crate::network::EvalPoint::new(vec![x.clone()]);
        Ok(crate::network::masked_eval_rational(&self.net, &self.masks, &point)?[0].clone())
    }
}

pub fn build_diamond_chain(n: usize, k: usize) -> Result<DiamondChain> {
    if k > n {
        return Err(Error::Domain(format!("prune count {k} exceeds length {n}")));
    }
    let full = n - k; // positions 1..=full are full diamonds
    let mut widths = vec![1usize];
    widths.extend(std::iter::repeat(2).take(n));
    widths.push(1);
    let depth = widths.len() - 1;

    let mut layers = Vec::with_capacity(depth);
    let mut masks = Vec::with_capacity(depth);
    for i in 0..depth {
        let (rows, cols) = (widths[i + 1], widths[i]);
        layers.push(Matrix::from_fn(rows, cols, |_, _| 1i8));
        masks.push(MaskMatrix::zeros(rows, cols));
    }

    // live rows of the previous layer feeding position t
    let mut prev_live: Vec<usize> = vec![0];
    for t in 1..=n {
        let rows = if t <= full { vec![0, 1] } else { vec![0] };
        for &r in &rows {
            for &c in &prev_live {
                masks[t - 1].set(r, c, true);
            }
        }
        prev_live = rows;
    }
    // materialized combine
    for &c in &prev_live {
        masks[depth - 1].set(0, c, true);
    }

    Ok(DiamondChain {
        net: BinaryNetwork::from_sign_matrices(layers)?,
        masks: MaskSet::new(masks),
        diamonds: n,
        pruned: k,
    })
}

/// Mirrored pair of diamond chains exposing two linear taps 2^(n-k) x and
/// -2^(n-k) x. The taps are pre-activation combinations meant to be folded
/// into a consumer layer's ±1 selection weights, so they are returned as
/// signed column lists over the final layer.
#[derive(Debug, Clone)]
pub struct MirroredPair {
    pub net: BinaryNetwork,
    pub masks: MaskSet,
    /// (column, sign) entries whose signed sum is 2^(n-k) x.
    pub plus_tap: Vec<(usize, i8)>,
    /// (column, sign) entries whose signed sum is -2^(n-k) x.
    pub minus_tap: Vec<(usize, i8)>,
}

impl MirroredPair {
    /// Evaluates both taps at x (exact).
    pub fn taps(&self, x: &Rat) -> Result<(Rat, Rat)> {
        let point = crate::network::EvalPoint::new(vec![x.clone()]);
        let hidden = crate::network::masked_eval_rational(&self.net, &self.masks, &point)?;
        let combine = |tap: &[(usize, i8)]| -> Rat {
            tap.iter()
                .map(|&(c, s)| {
                    if s == 1 {
                        hidden[c].clone()
                    } else {
                        -hidden[c].clone()
                    }
                })
                .sum()
        };
        Ok((combine(&self.plus_tap), combine(&self.minus_tap)))
    }
}

pub fn build_mirrored_pair(n: usize, k: usize) -> Result<MirroredPair> {
    if k > n {
        return Err(Error::Domain(format!("prune count {k} exceeds length {n}")));
    }
    let full = n - k;
    let mut widths = vec![1usize, 2];
    widths.extend(std::iter::repeat(4).take(n));
    let depth = widths.len() - 1;

    let mut layers = Vec::with_capacity(depth);
    let mut masks = Vec::with_capacity(depth);
    // mirror split
    layers.push(Matrix::from_vec(2, 1, vec![1i8, -1]).unwrap());
    let mut mirror_mask = MaskMatrix::zeros(2, 1);
    mirror_mask.set(0, 0, true);
    mirror_mask.set(1, 0, true);
    masks.push(mirror_mask);

    for i in 1..depth {
        let (rows, cols) = (widths[i + 1], widths[i]);
        layers.push(Matrix::from_fn(rows, cols, |_, _| 1i8));
        masks.push(MaskMatrix::zeros(rows, cols));
    }

    // two chains side by side: rows 0,1 follow sigma(x), rows 2,3 follow
    // sigma(-x)
    let mut live = [vec![0usize], vec![1usize]]; // columns of the previous layer
    for t in 1..=n {
        let side_rows: [Vec<usize>; 2] = if t <= full {
            [vec![0, 1], vec![2, 3]]
        } else {
            [vec![0], vec![2]]
        };
        for side in 0..2 {
            for &r in &side_rows[side] {
                for &c in &live[side] {
                    masks[t].set(r, c, true);
                }
            }
        }
        live = side_rows;
    }

    let plus_tap: Vec<(usize, i8)> = live[0]
        .iter()
        .map(|&c| (c, 1i8))
        .chain(live[1].iter().map(|&c| (c, -1i8)))
        .collect();
    let minus_tap: Vec<(usize, i8)> = plus_tap.iter().map(|&(c, s)| (c, -s)).collect();

    Ok(MirroredPair {
        net: BinaryNetwork::from_sign_matrices(layers)?,
        masks: MaskSet::new(masks),
        plus_tap,
        minus_tap,
    })
}

// ---------------------------------------------------------------------------
// Gadget plans
// ---------------------------------------------------------------------------

/// One kept term of a selection row: take the final taps of bundle
/// (input, power) with this sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tap {
    pub input: usize,
    pub power: usize,
    pub negative: bool,
}

/// Selection bits for one output neuron of a block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRow {
    pub taps: Vec<Tap>,
}

/// Mirrored chain bundle for one (input, power): four rows per chain layer,
/// `power` leading full diamonds, pass-through padding after.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundlePlan {
    pub input: usize,
    pub power: usize,
    /// First of the bundle's four rows within every chain layer.
    pub row_base: usize,
    /// Number of leading full diamonds (= power).
    pub full_positions: usize,
    /// Number of trailing pass-through pads.
    pub pad_positions: usize,
}

/// Plan of one block (one target layer).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub in_width: usize,
    pub out_width: usize,
    /// Index of the block's mirror layer within the binary network.
    pub layer_offset: usize,
    pub bundles: Vec<BundlePlan>,
    pub selections: Vec<SelectionRow>,
}

/// Symbolic placement of every gadget: enough to rebuild the deterministic
/// construction or to search for it inside a random network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetPlan {
    /// Weight bound W the skeleton was sized for (decimal string).
    pub weight_bound: String,
    /// floor(log2 W) of the weight bound the skeleton was sized for.
    pub weight_bits: usize,
    /// Number of power bundles per input (weight_bits + 1).
    pub power_count: usize,
    /// Diamonds per chain (max(1, weight_bits)).
    pub chain_len: usize,
    pub input_dim: usize,
    pub blocks: Vec<BlockPlan>,
}

impl GadgetPlan {
    pub fn weight_bound_int(&self) -> BigInt {
        self.weight_bound.parse().unwrap_or_else(|_| BigInt::zero())
    }

    /// Layer count of the planned binary network.
    pub fn depth(&self) -> usize {
        self.blocks.len() * (self.chain_len + 2)
    }

    /// Chain-layer rows per block with `in_width` inputs.
    pub fn chain_width(&self, in_width: usize) -> usize {
        4 * self.power_count * in_width
    }

    /// Widths of the deterministic (width factor 1) binary network.
    pub fn logical_widths(&self) -> Vec<usize> {
        let mut widths = vec![self.input_dim];
        for block in &self.blocks {
            widths.push(2 * block.in_width);
            for _ in 0..self.chain_len {
                widths.push(self.chain_width(block.in_width));
            }
            widths.push(block.out_width);
        }
        widths
    }

    /// Width parameter d = max_i d_i of the planned target.
    pub fn target_max_width(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| [b.in_width, b.out_width])
            .max()
            .unwrap_or(1)
    }

    pub fn target_depth(&self) -> usize {
        self.blocks.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Widths/depth/parameter accounting of one construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionSizes {
    pub widths: Vec<usize>,
    pub depth: usize,
    pub max_width: usize,
    pub param_count: u128,
    pub kept_weights: usize,
}

/// A built construction: the binary network, its supermasks, the plan they
/// came from, and size accounting.
#[derive(Debug, Clone)]
pub struct ConstructionResult {
    pub binary: BinaryNetwork,
    pub masks: MaskSet,
    pub plan: GadgetPlan,
    pub sizes: ConstructionSizes,
}

// ---------------------------------------------------------------------------
// Plan construction and materialization
// ---------------------------------------------------------------------------

/// Final live columns of a bundle side in the last chain layer, relative to
/// the chain-layer row base. `positive` picks the sigma(x) or sigma(-x)
/// chain.
fn final_live_cols(bundle: &BundlePlan, chain_len: usize, positive: bool) -> Vec<usize> {
    let side = bundle.row_base + if positive { 0 } else { 2 };
    if bundle.full_positions == chain_len {
        vec![side, side + 1]
    } else {
        vec![side]
    }
}

/// Lays out the plan for an integer network against an explicit weight
/// bound. The skeleton depends only on shapes and the bound; the selection
/// rows encode the actual weights.
pub fn plan_network(f: &IntegerNetwork, bound: &BigInt) -> Result<GadgetPlan> {
    if bound.is_negative() {
        return Err(Error::Domain("weight bound must be nonnegative".into()));
    }
    if &f.weight_bound() > bound {
        return Err(Error::Domain(format!(
            "network weight bound {} exceeds plan bound {}",
            f.weight_bound(),
            bound
        )));
    }
    let weight_bits = weight_bits(bound);
    let power_count = weight_bits + 1;
    let chain_len = weight_bits.max(1);

    let mut blocks = Vec::with_capacity(f.depth());
    let mut layer_offset = 0;
    for i in 0..f.depth() {
        let layer = f.layer(i);
        let (out_width, in_width) = (layer.rows(), layer.cols());
        let bundles = (0..in_width)
            .flat_map(|j| {
                (0..power_count).map(move |p| BundlePlan {
                    input: j,
                    power: p,
                    row_base: 4 * (j * power_count + p),
                    full_positions: p,
                    pad_positions: chain_len - p,
                })
            })
            .collect();
        let selections = (0..out_width)
            .map(|o| {
                let mut taps = Vec::new();
                for j in 0..in_width {
                    let w = layer.get(o, j);
                    if w.is_zero() {
                        continue;
                    }
                    let exp = binary_expand(w)?;
                    for k in 0..=exp.top_power() {
                        if exp.bit(k) {
                            taps.push(Tap {
                                input: j,
                                power: k,
                                negative: exp.is_negative(),
                            });
                        }
                    }
                }
                Ok(SelectionRow { taps })
            })
            .collect::<Result<Vec<_>>>()?;
        blocks.push(BlockPlan {
            in_width,
            out_width,
            layer_offset,
            bundles,
            selections,
        });
        layer_offset += chain_len + 2;
    }

    Ok(GadgetPlan {
        weight_bound: bound.to_string(),
        weight_bits,
        power_count,
        chain_len,
        input_dim: f.input_dim(),
        blocks,
    })
}

/// Materializes the deterministic binary network and masks for a plan.
/// Unmasked entries default to +1.
fn materialize_plan(plan: &GadgetPlan) -> Result<(BinaryNetwork, MaskSet)> {
    let widths = plan.logical_widths();
    let depth = widths.len() - 1;
    let mut layers: Vec<Matrix<i8>> = (0..depth)
        .map(|i| Matrix::from_fn(widths[i + 1], widths[i], |_, _| 1i8))
        .collect();
    let mut masks: Vec<MaskMatrix> = (0..depth)
        .map(|i| MaskMatrix::zeros(widths[i + 1], widths[i]))
        .collect();

    let chain_len = plan.chain_len;
    for block in &plan.blocks {
        let mirror = block.layer_offset;
        for j in 0..block.in_width {
            layers[mirror].set(2 * j + 1, j, -1);
            masks[mirror].set(2 * j, j, true);
            masks[mirror].set(2 * j + 1, j, true);
        }
        for bundle in &block.bundles {
            for side in 0..2 {
                let base = bundle.row_base + 2 * side;
                let mut prev: Vec<usize> = vec![2 * bundle.input + side];
                for t in 1..=chain_len {
                    let layer = mirror + t;
                    let rows: Vec<usize> = if t <= bundle.full_positions {
                        vec![base, base + 1]
                    } else {
                        vec![base]
                    };
                    for &r in &rows {
                        for &c in &prev {
                            masks[layer].set(r, c, true);
                        }
                    }
                    prev = rows;
                }
            }
        }
        let selection = mirror + chain_len + 1;
        for (o, row) in block.selections.iter().enumerate() {
            for tap in &row.taps {
                let bundle = &block.bundles[tap.input * plan.power_count + tap.power];
                let sign: i8 = if tap.negative { -1 } else { 1 };
                for c in final_live_cols(bundle, chain_len, true) {
                    layers[selection].set(o, c, sign);
                    masks[selection].set(o, c, true);
                }
                for c in final_live_cols(bundle, chain_len, false) {
                    layers[selection].set(o, c, -sign);
                    masks[selection].set(o, c, true);
                }
            }
        }
    }

    Ok((
        BinaryNetwork::from_sign_matrices(layers)?,
        MaskSet::new(masks),
    ))
}

fn sizes_of(binary: &BinaryNetwork, masks: &MaskSet) -> ConstructionSizes {
    ConstructionSizes {
        widths: binary.widths().to_vec(),
        depth: binary.depth(),
        max_width: *binary.widths().iter().max().unwrap(),
        param_count: binary.param_count(),
        kept_weights: masks.kept_count(),
    }
}

/// Builds the exact binary representation of an integer network: masked
/// evaluation of the result times the target's output scale reproduces the
/// target on every input.
pub fn build_network(f: &IntegerNetwork) -> Result<ConstructionResult> {
    build_network_with_bound(f, &f.weight_bound())
}

/// Same as [`build_network`] but sizes the skeleton for an explicit weight
/// bound (>= the network's own), so plans for a whole weight class share one
/// shape.
pub fn build_network_with_bound(f: &IntegerNetwork, bound: &BigInt) -> Result<ConstructionResult> {
    let plan = plan_network(f, bound)?;
    let (binary, masks) = materialize_plan(&plan)?;
    let sizes = sizes_of(&binary, &masks);
    Ok(ConstructionResult {
        binary,
        masks,
        plan,
        sizes,
    })
}

/// Construction for a single integer weight h(x) = sigma(w x). Zero yields
/// the all-pruned selection.
pub fn build_scalar(w: i64) -> Result<ConstructionResult> {
    let f = IntegerNetwork::from_i64_layers(&[(1, 1, vec![w])])?;
    build_network(&f)
}

/// Construction for one neuron h(x) = sigma(w' x).
pub fn build_neuron(w: &[i64]) -> Result<ConstructionResult> {
    let f = IntegerNetwork::from_i64_layers(&[(1, w.len(), w.to_vec())])?;
    build_network(&f)
}

/// Construction for one layer h(x) = sigma(W1 x), output per row. Bundles
/// are shared across all output rows, which is what keeps the width linear
/// in max(d0, d1) instead of quadratic.
pub fn build_layer(w1: &Matrix<BigInt>) -> Result<ConstructionResult> {
    let f = IntegerNetwork::new(vec![w1.clone()], Rat::from_integer(1.into()))?;
    build_network(&f)
}

/// Classification variant: a p-digit finite-precision target is rescaled to
/// integers and built; the output scale is dropped entirely because sign is
/// invariant under positive scaling. Requires every weight to be
/// representable with `digits` decimal digits.
pub fn build_classifier(f: &TargetNetwork, digits: u32) -> Result<ConstructionResult> {
    let integer = scale_to_integer(f, digits)?;
    build_network(&integer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{masked_eval_rational, EvalPoint};
    use crate::ratio::parse_rat;
    use crate::rng::Stream;
    use num_traits::One;

    fn rat(s: &str) -> Rat {
        parse_rat(s).unwrap()
    }

    fn eval_construction(c: &ConstructionResult, coords: &[Rat]) -> Vec<Rat> {
        masked_eval_rational(&c.binary, &c.masks, &EvalPoint::new(coords.to_vec())).unwrap()
    }

    #[test]
    fn binary_expansion_examples() {
        let e = binary_expand(&BigInt::from(13)).unwrap();
        assert!(!e.is_negative());
        assert_eq!(e.bits(), &[true, false, true, true]);
        assert_eq!(e.top_power(), 3);

        let one = binary_expand(&BigInt::from(1)).unwrap();
        assert_eq!(one.bits(), &[true]);
        assert_eq!(one.top_power(), 0);

        let neg = binary_expand(&BigInt::from(-6)).unwrap();
        assert!(neg.is_negative());
        assert_eq!(neg.bits(), &[false, true, true]);
        assert_eq!(neg.reconstruct(), BigInt::from(-6));

        assert!(binary_expand(&BigInt::zero()).is_err());
    }

    proptest::proptest! {
        #[test]
        fn expansion_reconstructs(w in -1_000_000i64..1_000_000) {
            proptest::prop_assume!(w != 0);
            let e = binary_expand(&BigInt::from(w)).unwrap();
            proptest::prop_assert_eq!(e.reconstruct(), BigInt::from(w));
        }
    }

    #[test]
    fn diamond_chain_examples() {
        let c = build_diamond_chain(3, 0).unwrap();
        assert_eq!(c.eval(&rat("2")).unwrap(), rat("16"));

        let c = build_diamond_chain(3, 2).unwrap();
        assert_eq!(c.eval(&rat("5")).unwrap(), rat("10"));

        let c = build_diamond_chain(4, 1).unwrap();
        assert_eq!(c.eval(&rat("-7")).unwrap(), rat("0"));

        assert!(build_diamond_chain(3, 4).is_err());
    }

    #[test]
    fn diamond_chain_identity_small_sweep() {
        for n in 0..=8usize {
            for k in 0..=n {
                let chain = build_diamond_chain(n, k).unwrap();
                let gain = Rat::from_integer(BigInt::from(1u8) << (n - k));
                for x in ["-2", "0", "1/3", "7/2"] {
                    let x = rat(x);
                    let expected = if x.is_positive() { &gain * &x } else { Rat::zero() };
                    assert_eq!(chain.eval(&x).unwrap(), expected, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn mirrored_pair_examples() {
        let p = build_mirrored_pair(2, 0).unwrap();
        assert_eq!(p.taps(&rat("-3")).unwrap(), (rat("-12"), rat("12")));

        let p = build_mirrored_pair(0, 0).unwrap();
        assert_eq!(p.taps(&rat("5")).unwrap(), (rat("5"), rat("-5")));

        let p = build_mirrored_pair(3, 3).unwrap();
        assert_eq!(p.taps(&rat("3/2")).unwrap(), (rat("3/2"), rat("-3/2")));
    }

    #[test]
    fn scalar_construction_examples() {
        let five = build_scalar(5).unwrap();
        assert_eq!(eval_construction(&five, &[rat("2")]), vec![rat("10")]);
        assert_eq!(eval_construction(&five, &[rat("-2")]), vec![rat("0")]);

        let neg3 = build_scalar(-3).unwrap();
        assert_eq!(eval_construction(&neg3, &[rat("2")]), vec![rat("0")]);
        assert_eq!(eval_construction(&neg3, &[rat("-2")]), vec![rat("6")]);

        let one = build_scalar(1).unwrap();
        assert_eq!(one.sizes.depth, 3);
        assert_eq!(one.plan.blocks[0].bundles.len(), 1);
        assert_eq!(one.plan.blocks[0].bundles[0].pad_positions, 1);
        for x in ["4", "-4", "1/7"] {
            let x = rat(x);
            let expected = if x.is_positive() { x.clone() } else { Rat::zero() };
            assert_eq!(eval_construction(&one, &[x]), vec![expected]);
        }

        let zero = build_scalar(0).unwrap();
        assert_eq!(eval_construction(&zero, &[rat("3")]), vec![Rat::zero()]);
        assert!(zero.plan.blocks[0].selections[0].taps.is_empty());
    }

    #[test]
    fn scalar_sizes_match_the_depth_and_width_accounting() {
        let c = build_scalar(5).unwrap();
        // floor(log2 5) = 2, so depth 2 + 2 and chain width 4 * 3 powers.
        assert_eq!(c.sizes.depth, 4);
        assert_eq!(c.sizes.max_width, 12);
        assert!(c.sizes.max_width <= 4 * (2 + 1) + 4);
    }

    #[test]
    fn neuron_construction_examples() {
        let n = build_neuron(&[2, -1]).unwrap();
        assert_eq!(eval_construction(&n, &[rat("1"), rat("1")]), vec![rat("1")]);
        assert_eq!(
            eval_construction(&n, &[rat("-1"), rat("3")]),
            vec![rat("0")]
        );

        let n = build_neuron(&[7, 0, -2]).unwrap();
        let mut stream = Stream::new(3);
        for _ in 0..100 {
            let coords: Vec<Rat> = (0..3)
                .map(|_| {
                    crate::ratio::rat_from_f64(stream.next_range(-2.0, 2.0)).unwrap()
                })
                .collect();
            let pre = rat("7") * &coords[0] - rat("2") * &coords[2];
            let expected = if pre.is_positive() { pre } else { Rat::zero() };
            assert_eq!(eval_construction(&n, &coords), vec![expected]);
        }
    }

    #[test]
    fn layer_construction_examples() {
        let w1 = Matrix::from_vec(2, 1, vec![BigInt::from(3), BigInt::from(-2)]).unwrap();
        let c = build_layer(&w1).unwrap();
        assert_eq!(eval_construction(&c, &[rat("2")]), vec![rat("6"), rat("0")]);
        assert_eq!(eval_construction(&c, &[rat("-2")]), vec![rat("0"), rat("4")]);

        let identity = Matrix::from_vec(
            2,
            2,
            vec![
                BigInt::one(),
                BigInt::zero(),
                BigInt::zero(),
                BigInt::one(),
            ],
        )
        .unwrap();
        let c = build_layer(&identity).unwrap();
        assert_eq!(
            eval_construction(&c, &[rat("3"), rat("-4")]),
            vec![rat("3"), rat("0")]
        );
    }

    #[test]
    fn layer_construction_random_oracle_and_width() {
        let mut stream = Stream::new(17);
        let data: Vec<BigInt> = (0..12)
            .map(|_| BigInt::from((stream.next_u64() % 31) as i64 - 15))
            .collect();
        let w1 = Matrix::from_vec(4, 3, data).unwrap();
        let c = build_layer(&w1).unwrap();
        let f = IntegerNetwork::new(vec![w1], Rat::one()).unwrap();
        for _ in 0..100 {
            let coords: Vec<Rat> = (0..3)
                .map(|_| crate::ratio::rat_from_f64(stream.next_range(-1.0, 1.0)).unwrap())
                .collect();
            let point = EvalPoint::new(coords);
            assert_eq!(
                masked_eval_rational(&c.binary, &c.masks, &point).unwrap(),
                f.eval_rational(&point).unwrap()
            );
        }
        // linear, not quadratic: 4 * P * d0 with P = floor(log2 15) + 1 = 4
        assert!(c.sizes.max_width <= 4 * 4 * 4 + 8);
    }

    #[test]
    fn network_construction_examples() {
        // single weight reduces to the scalar construction
        let f = IntegerNetwork::from_i64_layers(&[(1, 1, vec![5])]).unwrap();
        let c = build_network(&f).unwrap();
        let s = build_scalar(5).unwrap();
        assert_eq!(c.plan, s.plan);

        // two-layer oracle
        let f2 =
            IntegerNetwork::from_i64_layers(&[(2, 1, vec![2, 1]), (1, 2, vec![1, -3])]).unwrap();
        let c2 = build_network(&f2).unwrap();
        let mut stream = Stream::new(23);
        for _ in 0..100 {
            let x = EvalPoint::from_f64(&[stream.next_range(-3.0, 3.0)]).unwrap();
            assert_eq!(
                masked_eval_rational(&c2.binary, &c2.masks, &x).unwrap(),
                f2.eval_rational(&x).unwrap()
            );
        }

        // identity single layer: depth 3, function sigma(x)
        let ident = IntegerNetwork::from_i64_layers(&[(1, 1, vec![1])]).unwrap();
        let c3 = build_network(&ident).unwrap();
        assert_eq!(c3.sizes.depth, 3);
        assert_eq!(eval_construction(&c3, &[rat("2")]), vec![rat("2")]);
        assert_eq!(eval_construction(&c3, &[rat("-2")]), vec![rat("0")]);
    }

    #[test]
    fn output_scale_is_external_to_the_construction() {
        let f = IntegerNetwork::new(
            vec![Matrix::from_vec(1, 1, vec![BigInt::from(7)]).unwrap()],
            rat("1/10"),
        )
        .unwrap();
        let c = build_network(&f).unwrap();
        let x = EvalPoint::from_i64(&[3]);
        let masked = masked_eval_rational(&c.binary, &c.masks, &x).unwrap();
        let scaled: Vec<Rat> = masked.iter().map(|v| v * f.output_scale()).collect();
        assert_eq!(scaled, f.eval_rational(&x).unwrap());
    }

    #[test]
    fn adversarial_grid_exactness() {
        let f = IntegerNetwork::from_i64_layers(&[
            (2, 2, vec![13, -6, 7, 3]),
            (1, 2, vec![-2, 9]),
        ])
        .unwrap();
        let c = build_network(&f).unwrap();
        for a in [-1i64, 0, 1] {
            for b in [-1i64, 0, 1] {
                let x = EvalPoint::from_i64(&[a, b]);
                assert_eq!(
                    masked_eval_rational(&c.binary, &c.masks, &x).unwrap(),
                    f.eval_rational(&x).unwrap()
                );
            }
        }
    }

    #[test]
    fn skeleton_is_reused_across_same_shape_targets() {
        let bound = BigInt::from(15);
        let a = IntegerNetwork::from_i64_layers(&[(2, 2, vec![13, -6, 7, 3])]).unwrap();
        let b = IntegerNetwork::from_i64_layers(&[(2, 2, vec![1, 15, -8, 0])]).unwrap();
        let ca = build_network_with_bound(&a, &bound).unwrap();
        let cb = build_network_with_bound(&b, &bound).unwrap();
        // chain skeleton identical: same widths, same bundle layout, and
        // identical masks everywhere except the selection layer
        assert_eq!(ca.sizes.widths, cb.sizes.widths);
        assert_eq!(ca.plan.blocks[0].bundles, cb.plan.blocks[0].bundles);
        let depth = ca.binary.depth();
        for layer in 0..depth - 1 {
            assert_eq!(ca.masks.mask(layer), cb.masks.mask(layer), "layer {layer}");
        }
        assert_ne!(ca.masks.mask(depth - 1), cb.masks.mask(depth - 1));
    }

    #[test]
    fn classifier_drops_the_scale_but_keeps_the_sign() {
        let f = TargetNetwork::new(vec![Matrix::from_vec(1, 1, vec![rat("0.5")]).unwrap()])
            .unwrap();
        let c = build_classifier(&f, 1).unwrap();
        assert_eq!(c.binary.last_layer_scale(), &Rat::one());
        // x = 2: target sigma(1) > 0; construction sigma(5 * 2) > 0
        let pos = eval_construction(&c, &[rat("2")]);
        assert!(pos[0].is_positive());
        // x = -2: both zero
        let neg = eval_construction(&c, &[rat("-2")]);
        assert!(neg[0].is_zero());
    }

    #[test]
    fn plan_json_round_trip() {
        let c = build_scalar(13).unwrap();
        let json = c.plan.to_json().unwrap();
        assert_eq!(GadgetPlan::from_json(&json).unwrap(), c.plan);
    }
}
