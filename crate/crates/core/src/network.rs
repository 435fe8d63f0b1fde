//! Shape-checked dense FC ReLU networks with float and exact rational
//! evaluation backends, plus supermask-style masked evaluation.
//!
//! Three weight domains share the same layer/width conventions: real targets
//! (stored as exact rationals so finite-precision weights survive IO), integer
//! networks with an output scale, and ±1 binary networks with an optional
//! last-layer scale. Pruned networks are always a (BinaryNetwork, MaskSet)
//! pair; zeros are never materialized into the weight matrices.

use crate::error::{Error, Result};
use crate::matrix::{chained_widths, Matrix};
use crate::ratio::{format_rat, parse_rat, rat_from_f64, rat_to_f64, Rat};
use crate::rng::entry_sign;
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Evaluation backend selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Float,
    Rational,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Backend::Float),
            "rational" => Ok(Backend::Rational),
            other => Err(Error::Config(format!("unknown backend {other:?}"))),
        }
    }
}

#[inline]
fn relu_rat(v: Rat) -> Rat {
    if v.is_negative() {
        Rat::zero()
    } else {
        v
    }
}

#[inline]
fn relu_f64(v: f64) -> f64 {
    v.max(0.0)
}

/// Input point. Coordinates are exact rationals; the float backend projects
/// them on the fly.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    coords: Vec<Rat>,
}

impl EvalPoint {
    pub fn new(coords: Vec<Rat>) -> Self {
        EvalPoint { coords }
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Ok(EvalPoint {
            coords: coords
                .iter()
                .map(|&x| rat_from_f64(x))
                .collect::<Result<_>>()?,
        })
    }

    pub fn from_i64(coords: &[i64]) -> Self {
        EvalPoint {
            coords: coords.iter().map(|&x| Rat::from_integer(x.into())).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords.iter().map(rat_to_f64).collect()
    }

    /// Exact check of the unit-ball membership ||x|| <= 1.
    pub fn in_unit_ball(&self) -> bool {
        let sq: Rat = self.coords.iter().map(|x| x * x).sum();
        sq <= Rat::one()
    }

    fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::Dimension {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// Per-layer norm summary: Frobenius as a float, max-norm exact.
#[derive(Debug, Clone)]
pub struct LayerNorms {
    pub frobenius: f64,
    pub max_abs: Rat,
}

// ---------------------------------------------------------------------------
// Target networks (real weights)
// ---------------------------------------------------------------------------

/// FC ReLU network with real weights, the approximation target. Weights are
/// held as exact rationals so truncated (finite-precision) networks stay
/// representable without float loss.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetNetwork {
    layers: Vec<Matrix<Rat>>,
    widths: Vec<usize>,
}

impl TargetNetwork {
    pub fn new(layers: Vec<Matrix<Rat>>) -> Result<Self> {
        let widths = chained_widths(&layers)?;
        Ok(TargetNetwork { layers, widths })
    }

    pub fn from_f64_layers(layers: &[(usize, usize, Vec<f64>)]) -> Result<Self> {
        let mut mats = Vec::with_capacity(layers.len());
        for (rows, cols, data) in layers {
            let rat: Vec<Rat> = data.iter().map(|&x| rat_from_f64(x)).collect::<Result<_>>()?;
            mats.push(Matrix::from_vec(*rows, *cols, rat)?);
        }
        TargetNetwork::new(mats)
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    /// max_i d_i, the width parameter of the approximation bounds.
    pub fn max_width(&self) -> usize {
        *self.widths.iter().max().unwrap()
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layer(&self, i: usize) -> &Matrix<Rat> {
        &self.layers[i]
    }

    pub fn layers(&self) -> &[Matrix<Rat>] {
        &self.layers
    }

    /// Exact squared Frobenius norm per layer.
    pub fn frobenius_sq(&self, i: usize) -> Rat {
        self.layers[i].entries().map(|w| w * w).sum()
    }

    /// Checks the norm precondition ||W_i||_F <= 1 for every layer, exactly.
    pub fn check_unit_norms(&self) -> Result<()> {
        for i in 0..self.depth() {
            if self.frobenius_sq(i) > Rat::one() {
                return Err(Error::NormBound(format!(
                    "layer {} has Frobenius norm > 1",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn max_norms(&self) -> Vec<LayerNorms> {
        self.layers.iter().map(norms_of_rat_matrix).collect()
    }

    pub fn eval_rational(&self, x: &EvalPoint) -> Result<Vec<Rat>> {
        x.check_dim(self.input_dim())?;
        let mut v = x.coords().to_vec();
        for layer in &self.layers {
            v = rat_layer(layer, &v);
        }
        Ok(v)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut v = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            v = f64_layer(&layer.map(rat_to_f64), &v);
            check_finite(&v, i)?;
        }
        Ok(v)
    }
}

fn norms_of_rat_matrix(m: &Matrix<Rat>) -> LayerNorms {
    let sq: Rat = m.entries().map(|w| w * w).sum();
    let max_abs = m
        .entries()
        .map(|w| w.abs())
        .max()
        .unwrap_or_else(Rat::zero);
    LayerNorms {
        frobenius: rat_to_f64(&sq).sqrt(),
        max_abs,
    }
}

fn rat_layer(layer: &Matrix<Rat>, v: &[Rat]) -> Vec<Rat> {
    (0..layer.rows())
        .map(|r| {
            let pre: Rat = layer
                .row(r)
                .iter()
                .zip(v)
                .filter(|(w, _)| !w.is_zero())
                .map(|(w, x)| w * x)
                .sum();
            relu_rat(pre)
        })
        .collect()
}

fn f64_layer(layer: &Matrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..layer.rows())
        .map(|r| relu_f64(layer.row(r).iter().zip(v).map(|(w, x)| w * x).sum()))
        .collect()
}

fn check_finite(v: &[f64], layer: usize) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::FloatOverflow { layer: layer + 1 });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Integer networks
// ---------------------------------------------------------------------------

/// FC ReLU network with integer weights and an exact rational output scale
/// (the scale is 1 for pure-integer targets, 10^{-p*l} for rescaled
/// finite-precision ones).
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerNetwork {
    layers: Vec<Matrix<BigInt>>,
    widths: Vec<usize>,
    output_scale: Rat,
}

impl IntegerNetwork {
    pub fn new(layers: Vec<Matrix<BigInt>>, output_scale: Rat) -> Result<Self> {
        let widths = chained_widths(&layers)?;
        if !output_scale.is_positive() {
            return Err(Error::Domain("output scale must be positive".into()));
        }
        Ok(IntegerNetwork {
            layers,
            widths,
            output_scale,
        })
    }

    pub fn from_i64_layers(layers: &[(usize, usize, Vec<i64>)]) -> Result<Self> {
        let mut mats = Vec::with_capacity(layers.len());
        for (rows, cols, data) in layers {
            let ints: Vec<BigInt> = data.iter().map(|&x| BigInt::from(x)).collect();
            mats.push(Matrix::from_vec(*rows, *cols, ints)?);
        }
        IntegerNetwork::new(mats, Rat::one())
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn max_width(&self) -> usize {
        *self.widths.iter().max().unwrap()
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layer(&self, i: usize) -> &Matrix<BigInt> {
        &self.layers[i]
    }

    pub fn output_scale(&self) -> &Rat {
        &self.output_scale
    }

    /// Largest |entry| over all layers (the W of the size bounds).
    pub fn weight_bound(&self) -> BigInt {
        self.layers
            .iter()
            .flat_map(|m| m.entries())
            .map(|w| w.magnitude().clone())
            .max()
            .map(BigInt::from)
            .unwrap_or_else(BigInt::zero)
    }

    pub fn max_norms(&self) -> Vec<LayerNorms> {
        self.layers
            .iter()
            .map(|m| norms_of_rat_matrix(&m.map(|w| Rat::from_integer(w.clone()))))
            .collect()
    }

    pub fn eval_rational(&self, x: &EvalPoint) -> Result<Vec<Rat>> {
        x.check_dim(self.input_dim())?;
        let mut v = x.coords().to_vec();
        for layer in &self.layers {
            v = (0..layer.rows())
                .map(|r| {
                    let pre: Rat = layer
                        .row(r)
                        .iter()
                        .zip(&v)
                        .filter(|(w, _)| !w.is_zero())
                        .map(|(w, x)| Rat::from_integer(w.clone()) * x)
                        .sum();
                    relu_rat(pre)
                })
                .collect();
        }
        Ok(v.into_iter().map(|y| y * &self.output_scale).collect())
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut v = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            v = f64_layer(&layer.map(|w| w.to_f64().unwrap_or(f64::INFINITY)), &v);
            check_finite(&v, i)?;
        }
        let scale = rat_to_f64(&self.output_scale);
        Ok(v.into_iter().map(|y| y * scale).collect())
    }
}

// ---------------------------------------------------------------------------
// Binary networks
// ---------------------------------------------------------------------------

/// Weight storage for binary networks: either materialized ±1 matrices or a
/// seed that defines every entry through a counter-mode PRF. The seeded form
/// makes very wide sampled networks free to hold in memory; both forms answer
/// entry queries identically.
#[derive(Debug, Clone)]
enum SignLayers {
    Dense(Vec<Matrix<i8>>),
    Seeded { seed: u64 },
}

/// FC ReLU network with all weights in {-1, +1}; the last layer may carry a
/// positive rational scale (applied to the pre-activation of the final
/// layer).
#[derive(Debug, Clone)]
pub struct BinaryNetwork {
    widths: Vec<usize>,
    layers: SignLayers,
    last_layer_scale: Rat,
}

impl BinaryNetwork {
    pub fn from_sign_matrices(layers: Vec<Matrix<i8>>) -> Result<Self> {
        let widths = chained_widths(&layers)?;
        for (i, m) in layers.iter().enumerate() {
            if m.entries().any(|&s| s != 1 && s != -1) {
                return Err(Error::Domain(format!(
                    "layer {} has an entry outside {{-1,+1}}",
                    i + 1
                )));
            }
        }
        Ok(BinaryNetwork {
            widths,
            layers: SignLayers::Dense(layers),
            last_layer_scale: Rat::one(),
        })
    }

    /// Network whose entries are i.i.d. uniform ±1 determined by `seed`.
    /// Nothing is materialized; entries are computed on demand.
    pub fn seeded(widths: Vec<usize>, seed: u64) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::Shape("need at least one layer".into()));
        }
        if widths.iter().any(|&w| w == 0) {
            return Err(Error::Shape("zero width".into()));
        }
        Ok(BinaryNetwork {
            widths,
            layers: SignLayers::Seeded { seed },
            last_layer_scale: Rat::one(),
        })
    }

    pub fn with_last_layer_scale(mut self, scale: Rat) -> Result<Self> {
        if scale.is_negative() {
            return Err(Error::Domain("last layer scale must be >= 0".into()));
        }
        self.last_layer_scale = scale;
        Ok(self)
    }

    pub fn depth(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layer_shape(&self, i: usize) -> (usize, usize) {
        (self.widths[i + 1], self.widths[i])
    }

    pub fn last_layer_scale(&self) -> &Rat {
        &self.last_layer_scale
    }

    pub fn is_seeded(&self) -> bool {
        matches!(self.layers, SignLayers::Seeded { .. })
    }

    /// Total number of weights.
    pub fn param_count(&self) -> u128 {
        (0..self.depth())
            .map(|i| self.widths[i] as u128 * self.widths[i + 1] as u128)
            .sum()
    }

    /// The ±1 entry of layer `i` (0-based) at (row, col).
    #[inline]
    pub fn sign(&self, layer: usize, row: usize, col: usize) -> i8 {
        match &self.layers {
            SignLayers::Dense(mats) => *mats[layer].get(row, col),
            SignLayers::Seeded { seed } => entry_sign(*seed, layer, row, col),
        }
    }

    /// Densifies a seeded network (or clones a dense one). Intended for
    /// small networks and file output; the memory cost is the full matrix
    /// set.
    pub fn materialize(&self) -> Self {
        let mats = (0..self.depth())
            .map(|i| {
                let (rows, cols) = self.layer_shape(i);
                Matrix::from_fn(rows, cols, |r, c| self.sign(i, r, c))
            })
            .collect();
        BinaryNetwork {
            widths: self.widths.clone(),
            layers: SignLayers::Dense(mats),
            last_layer_scale: self.last_layer_scale.clone(),
        }
    }

    /// Unmasked forward pass, rational backend.
    pub fn eval_rational(&self, x: &EvalPoint) -> Result<Vec<Rat>> {
        x.check_dim(self.input_dim())?;
        let mut v = x.coords().to_vec();
        for i in 0..self.depth() {
            let (rows, cols) = self.layer_shape(i);
            let scale = (i + 1 == self.depth()).then_some(&self.last_layer_scale);
            v = (0..rows)
                .map(|r| {
                    let mut pre = Rat::zero();
                    for c in 0..cols {
                        if !v[c].is_zero() {
                            if self.sign(i, r, c) == 1 {
                                pre += &v[c];
                            } else {
                                pre -= &v[c];
                            }
                        }
                    }
                    if let Some(s) = scale {
                        pre *= s;
                    }
                    relu_rat(pre)
                })
                .collect();
        }
        Ok(v)
    }

    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let scale = rat_to_f64(&self.last_layer_scale);
        let mut v = x.to_vec();
        for i in 0..self.depth() {
            let (rows, cols) = self.layer_shape(i);
            let s = if i + 1 == self.depth() { scale } else { 1.0 };
            v = (0..rows)
                .map(|r| {
                    let pre: f64 = (0..cols)
                        .map(|c| f64::from(self.sign(i, r, c)) * v[c])
                        .sum();
                    relu_f64(pre * s)
                })
                .collect();
            check_finite(&v, i)?;
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Mask sets
// ---------------------------------------------------------------------------

/// One 0/1 mask per binary layer, stored sparsely as sorted kept-column lists
/// per row. Congruence with the bound network is checked at use sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskMatrix {
    rows: usize,
    cols: usize,
    row_cols: Vec<Vec<u32>>,
}

impl MaskMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MaskMatrix {
            rows,
            cols,
            row_cols: vec![Vec::new(); rows],
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        MaskMatrix {
            rows,
            cols,
            row_cols: vec![(0..cols as u32).collect(); rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row_cols[r].binary_search(&(c as u32)).is_ok()
    }

    pub fn set(&mut self, r: usize, c: usize, kept: bool) {
        let col = c as u32;
        match self.row_cols[r].binary_search(&col) {
            Ok(i) if !kept => {
                self.row_cols[r].remove(i);
            }
            Err(i) if kept => self.row_cols[r].insert(i, col),
            _ => {}
        }
    }

    pub fn kept_cols(&self, r: usize) -> &[u32] {
        &self.row_cols[r]
    }

    pub fn kept_count(&self) -> usize {
        self.row_cols.iter().map(Vec::len).sum()
    }
}

/// Supermask set bound to a binary network's shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSet {
    masks: Vec<MaskMatrix>,
}

impl MaskSet {
    pub fn new(masks: Vec<MaskMatrix>) -> Self {
        MaskSet { masks }
    }

    pub fn zeros_for(net: &BinaryNetwork) -> Self {
        MaskSet {
            masks: (0..net.depth())
                .map(|i| {
                    let (r, c) = net.layer_shape(i);
                    MaskMatrix::zeros(r, c)
                })
                .collect(),
        }
    }

    pub fn all_ones_for(net: &BinaryNetwork) -> Self {
        MaskSet {
            masks: (0..net.depth())
                .map(|i| {
                    let (r, c) = net.layer_shape(i);
                    MaskMatrix::ones(r, c)
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn mask(&self, i: usize) -> &MaskMatrix {
        &self.masks[i]
    }

    pub fn mask_mut(&mut self, i: usize) -> &mut MaskMatrix {
        &mut self.masks[i]
    }

    pub fn kept_count(&self) -> usize {
        self.masks.iter().map(MaskMatrix::kept_count).sum()
    }

    pub fn check_congruent(&self, net: &BinaryNetwork) -> Result<()> {
        if self.masks.len() != net.depth() {
            return Err(Error::Shape(format!(
                "mask set has {} layers, network has {}",
                self.masks.len(),
                net.depth()
            )));
        }
        for (i, m) in self.masks.iter().enumerate() {
            let (rows, cols) = net.layer_shape(i);
            if m.rows != rows || m.cols != cols {
                return Err(Error::Shape(format!(
                    "mask {} is {}x{}, layer is {}x{}",
                    i + 1,
                    m.rows,
                    m.cols,
                    rows,
                    cols
                )));
            }
        }
        Ok(())
    }
}

/// Masked forward pass sigma(eps' (M_l ⊙ B_l) sigma(... (M_1 ⊙ B_1) x)),
/// exact rational backend.
pub fn masked_eval_rational(
    net: &BinaryNetwork,
    masks: &MaskSet,
    x: &EvalPoint,
) -> Result<Vec<Rat>> {
    masks.check_congruent(net)?;
    x.check_dim(net.input_dim())?;
    let mut v = x.coords().to_vec();
    for i in 0..net.depth() {
        let (rows, _) = net.layer_shape(i);
        let mask = masks.mask(i);
        let scale = (i + 1 == net.depth()).then_some(net.last_layer_scale());
        v = (0..rows)
            .map(|r| {
                let mut pre = Rat::zero();
                for &c in mask.kept_cols(r) {
                    let c = c as usize;
                    if !v[c].is_zero() {
                        if net.sign(i, r, c) == 1 {
                            pre += &v[c];
                        } else {
                            pre -= &v[c];
                        }
                    }
                }
                if let Some(s) = scale {
                    pre *= s;
                }
                relu_rat(pre)
            })
            .collect();
    }
    Ok(v)
}

/// Masked forward pass, float backend.
pub fn masked_eval_f64(net: &BinaryNetwork, masks: &MaskSet, x: &[f64]) -> Result<Vec<f64>> {
    masks.check_congruent(net)?;
    if x.len() != net.input_dim() {
        return Err(Error::Dimension {
            expected: net.input_dim(),
            got: x.len(),
        });
    }
    let scale = rat_to_f64(net.last_layer_scale());
    let mut v = x.to_vec();
    for i in 0..net.depth() {
        let (rows, _) = net.layer_shape(i);
        let mask = masks.mask(i);
        let s = if i + 1 == net.depth() { scale } else { 1.0 };
        v = (0..rows)
            .map(|r| {
                let pre: f64 = mask
                    .kept_cols(r)
                    .iter()
                    .map(|&c| f64::from(net.sign(i, r, c as usize)) * v[c as usize])
                    .sum();
                relu_f64(pre * s)
            })
            .collect();
        check_finite(&v, i)?;
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

/// Any of the three network kinds, as read from or written to a network file.
#[derive(Debug, Clone)]
pub enum NetworkFile {
    Target(TargetNetwork),
    Integer(IntegerNetwork),
    Binary(BinaryNetwork),
}

#[derive(Serialize, Deserialize)]
struct NetworkRepr {
    kind: String,
    widths: Vec<usize>,
    layers: Vec<Vec<serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output_scale: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    last_layer_scale: Option<String>,
}

fn value_to_rat(v: &serde_json::Value) -> Result<Rat> {
    match v {
        serde_json::Value::String(s) => parse_rat(s),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rat::from_integer(i.into()))
            } else {
                rat_from_f64(
                    n.as_f64()
                        .ok_or_else(|| Error::Domain(format!("bad number {n}")))?,
                )
            }
        }
        other => Err(Error::Domain(format!("bad weight entry {other}"))),
    }
}

fn layers_to_values<T>(
    widths: &[usize],
    entry: impl Fn(usize, usize, usize) -> T,
    to_value: impl Fn(T) -> serde_json::Value,
) -> Vec<Vec<serde_json::Value>> {
    (0..widths.len() - 1)
        .map(|i| {
            let (rows, cols) = (widths[i + 1], widths[i]);
            let mut flat = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    flat.push(to_value(entry(i, r, c)));
                }
            }
            flat
        })
        .collect()
}

impl NetworkFile {
    pub fn to_json(&self) -> Result<String> {
        let repr = match self {
            NetworkFile::Target(net) => NetworkRepr {
                kind: "target".into(),
                widths: net.widths().to_vec(),
                layers: layers_to_values(
                    net.widths(),
                    |i, r, c| net.layer(i).get(r, c).clone(),
                    |w| serde_json::Value::String(format_rat(&w)),
                ),
                output_scale: None,
                last_layer_scale: None,
            },
            NetworkFile::Integer(net) => NetworkRepr {
                kind: "integer".into(),
                widths: net.widths().to_vec(),
                layers: layers_to_values(
                    net.widths(),
                    |i, r, c| net.layer(i).get(r, c).clone(),
                    |w| serde_json::Value::String(w.to_string()),
                ),
                output_scale: Some(format_rat(net.output_scale())),
                last_layer_scale: None,
            },
            NetworkFile::Binary(net) => NetworkRepr {
                kind: "binary".into(),
                widths: net.widths().to_vec(),
                layers: layers_to_values(
                    net.widths(),
                    |i, r, c| net.sign(i, r, c),
                    |s| serde_json::Value::Number(s.into()),
                ),
                output_scale: None,
                last_layer_scale: Some(format_rat(net.last_layer_scale())),
            },
        };
        Ok(serde_json::to_string_pretty(&repr)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: NetworkRepr = serde_json::from_str(text)?;
        if repr.widths.len() < 2 {
            return Err(Error::Shape("widths must list d_0..d_l".into()));
        }
        if repr.layers.len() + 1 != repr.widths.len() {
            return Err(Error::Shape(format!(
                "{} layers inconsistent with {} widths",
                repr.layers.len(),
                repr.widths.len()
            )));
        }
        let shapes: Vec<(usize, usize)> = (0..repr.layers.len())
            .map(|i| (repr.widths[i + 1], repr.widths[i]))
            .collect();
        for (i, (layer, &(rows, cols))) in repr.layers.iter().zip(&shapes).enumerate() {
            if layer.len() != rows * cols {
                return Err(Error::Shape(format!(
                    "layer {} has {} entries, expected {}",
                    i + 1,
                    layer.len(),
                    rows * cols
                )));
            }
        }
        match repr.kind.as_str() {
            "target" => {
                let mats = repr
                    .layers
                    .iter()
                    .zip(&shapes)
                    .map(|(layer, &(rows, cols))| {
                        let data = layer.iter().map(value_to_rat).collect::<Result<Vec<_>>>()?;
                        Matrix::from_vec(rows, cols, data)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(NetworkFile::Target(TargetNetwork::new(mats)?))
            }
            "integer" => {
                let mats = repr
                    .layers
                    .iter()
                    .zip(&shapes)
                    .map(|(layer, &(rows, cols))| {
                        let data = layer
                            .iter()
                            .map(|v| {
                                let r = value_to_rat(v)?;
                                if !r.denom().is_one() {
                                    return Err(Error::Domain(format!(
                                        "non-integer weight {} in integer network",
                                        format_rat(&r)
                                    )));
                                }
                                Ok(r.numer().clone())
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Matrix::from_vec(rows, cols, data)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let scale = match &repr.output_scale {
                    Some(s) => parse_rat(s)?,
                    None => Rat::one(),
                };
                Ok(NetworkFile::Integer(IntegerNetwork::new(mats, scale)?))
            }
            "binary" => {
                let mats = repr
                    .layers
                    .iter()
                    .zip(&shapes)
                    .map(|(layer, &(rows, cols))| {
                        let data = layer
                            .iter()
                            .map(|v| {
                                let r = value_to_rat(v)?;
                                if r == Rat::one() {
                                    Ok(1i8)
                                } else if r == -Rat::one() {
                                    Ok(-1i8)
                                } else {
                                    Err(Error::Domain(format!(
                                        "binary weight must be ±1, got {}",
                                        format_rat(&r)
                                    )))
                                }
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Matrix::from_vec(rows, cols, data)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let net = BinaryNetwork::from_sign_matrices(mats)?;
                let net = match &repr.last_layer_scale {
                    Some(s) => net.with_last_layer_scale(parse_rat(s)?)?,
                    None => net,
                };
                Ok(NetworkFile::Binary(net))
            }
            other => Err(Error::Domain(format!("unknown network kind {other:?}"))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        NetworkFile::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct MaskRepr {
    kind: String,
    widths: Vec<usize>,
    layers: Vec<Vec<u8>>,
}

impl MaskSet {
    pub fn to_json(&self) -> Result<String> {
        let mut widths = vec![self.masks[0].cols()];
        for m in &self.masks {
            widths.push(m.rows());
        }
        let layers = self
            .masks
            .iter()
            .map(|m| {
                let mut flat = vec![0u8; m.rows() * m.cols()];
                for r in 0..m.rows() {
                    for &c in m.kept_cols(r) {
                        flat[r * m.cols() + c as usize] = 1;
                    }
                }
                flat
            })
            .collect();
        Ok(serde_json::to_string_pretty(&MaskRepr {
            kind: "masks".into(),
            widths,
            layers,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: MaskRepr = serde_json::from_str(text)?;
        if repr.kind != "masks" {
            return Err(Error::Domain(format!("expected kind \"masks\", got {:?}", repr.kind)));
        }
        if repr.widths.len() < 2 || repr.layers.len() + 1 != repr.widths.len() {
            return Err(Error::Shape("mask widths/layers inconsistent".into()));
        }
        let mut masks = Vec::with_capacity(repr.layers.len());
        for (i, flat) in repr.layers.iter().enumerate() {
            let (rows, cols) = (repr.widths[i + 1], repr.widths[i]);
            if flat.len() != rows * cols {
                return Err(Error::Shape(format!(
                    "mask layer {} has {} entries, expected {}",
                    i + 1,
                    flat.len(),
                    rows * cols
                )));
            }
            let mut m = MaskMatrix::zeros(rows, cols);
            for r in 0..rows {
                for c in 0..cols {
                    match flat[r * cols + c] {
                        0 => {}
                        1 => m.set(r, c, true),
                        other => {
                            return Err(Error::Domain(format!(
                                "mask entry must be 0/1, got {other}"
                            )))
                        }
                    }
                }
            }
            masks.push(m);
        }
        Ok(MaskSet { masks })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        MaskSet::from_json(&text)
    }
}
