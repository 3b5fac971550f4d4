//! Differentiable primitives and their backward rules.
//!
//! Each backward rule is itself expressed with the public ops below, so the
//! gradient it returns carries a graph whenever recording is enabled.

use std::rc::Rc;

use super::kernels::{self, ConvDims, MatRef};
use super::tensor::Tensor;
use super::Real;
use crate::error::{Error, Result};

/// Stride and symmetric zero padding of a 2-D convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeometry {
    pub stride: usize,
    pub pad: usize,
}

impl ConvGeometry {
    pub fn new(stride: usize, pad: usize) -> Self {
        ConvGeometry { stride, pad }
    }

    /// `floor((n + 2p − k)/s) + 1`, or `None` when the kernel does not fit.
    pub fn out_len(&self, n: usize, k: usize) -> Option<usize> {
        let padded = n + 2 * self.pad;
        (self.stride > 0 && padded >= k).then(|| (padded - k) / self.stride + 1)
    }
}

pub(crate) enum Op<T: Real> {
    Add(Tensor<T>, Tensor<T>),
    Sub(Tensor<T>, Tensor<T>),
    Mul(Tensor<T>, Tensor<T>),
    Div(Tensor<T>, Tensor<T>),
    Scale(Tensor<T>, T),
    AddScalar(Tensor<T>),
    Relu(Tensor<T>),
    LeakyRelu(Tensor<T>, T),
    Tanh(Tensor<T>),
    Sigmoid(Tensor<T>),
    Square(Tensor<T>),
    Sqrt(Tensor<T>),
    Sum(Tensor<T>),
    Expand(Tensor<T>),
    RowSum(Tensor<T>),
    RowExpand(Tensor<T>),
    ChannelSum(Tensor<T>),
    ChannelExpand(Tensor<T>),
    Reshape(Tensor<T>),
    MatMul(Tensor<T>, Tensor<T>, bool, bool),
    Conv(Tensor<T>, Tensor<T>, ConvGeometry),
    ConvInputGrad(Tensor<T>, Tensor<T>, ConvGeometry),
    ConvWeightGrad(Tensor<T>, Tensor<T>, ConvGeometry),
    Upsample(Tensor<T>),
    SumPool(Tensor<T>),
    Gather(Tensor<T>, Rc<Vec<usize>>),
    Scatter(Tensor<T>, Rc<Vec<usize>>),
}

impl<T: Real> Op<T> {
    pub(crate) fn inputs(&self) -> Vec<&Tensor<T>> {
        use Op::*;
        match self {
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | MatMul(a, b, ..) | Conv(a, b, _) => {
                vec![a, b]
            }
            ConvInputGrad(a, b, ..) | ConvWeightGrad(a, b, ..) => vec![a, b],
            Scale(a, _) | AddScalar(a) | Relu(a) | LeakyRelu(a, _) | Tanh(a) | Sigmoid(a)
            | Square(a) | Sqrt(a) | Sum(a) | Expand(a) | RowSum(a) | RowExpand(a)
            | ChannelSum(a) | ChannelExpand(a) | Reshape(a) | Upsample(a) | SumPool(a)
            | Gather(a, _) | Scatter(a, _) => vec![a],
        }
    }

    /// Gradients for each tracked input, given the gradient `g` of the output.
    pub(crate) fn backward(&self, g: &Tensor<T>) -> Result<Vec<(Tensor<T>, Tensor<T>)>> {
        use Op::*;
        let mut out = Vec::with_capacity(2);
        let mut push = |t: &Tensor<T>, f: &dyn Fn() -> Result<Tensor<T>>| -> Result<()> {
            if t.is_tracked() {
                out.push((t.clone(), f()?));
            }
            Ok(())
        };
        match self {
            Add(a, b) => {
                push(a, &|| Ok(g.clone()))?;
                push(b, &|| Ok(g.clone()))?;
            }
            Sub(a, b) => {
                push(a, &|| Ok(g.clone()))?;
                push(b, &|| Ok(scale(g, T::lit(-1.0))))?;
            }
            Mul(a, b) => {
                push(a, &|| mul(g, b))?;
                push(b, &|| mul(g, a))?;
            }
            Div(a, b) => {
                push(a, &|| div(g, b))?;
                push(b, &|| Ok(scale(&div(&mul(g, a)?, &square(b))?, T::lit(-1.0))))?;
            }
            Scale(a, c) => push(a, &|| Ok(scale(g, *c)))?,
            AddScalar(a) => push(a, &|| Ok(g.clone()))?,
            Relu(a) => push(a, &|| {
                let mask = a.map_values(|v| if v > T::zero() { T::one() } else { T::zero() });
                mul(g, &mask)
            })?,
            LeakyRelu(a, alpha) => push(a, &|| {
                let mask = a.map_values(|v| if v > T::zero() { T::one() } else { *alpha });
                mul(g, &mask)
            })?,
            Tanh(a) => push(a, &|| {
                let t = tanh(a);
                mul(g, &add_scalar(&scale(&square(&t), T::lit(-1.0)), T::one()))
            })?,
            Sigmoid(a) => push(a, &|| {
                let s = sigmoid(a);
                mul(&mul(g, &s)?, &add_scalar(&scale(&s, T::lit(-1.0)), T::one()))
            })?,
            Square(a) => push(a, &|| Ok(scale(&mul(g, a)?, T::lit(2.0))))?,
            Sqrt(a) => push(a, &|| div(&scale(g, T::lit(0.5)), &sqrt(a)))?,
            Sum(a) => push(a, &|| expand(g, a.shape()))?,
            Expand(a) => push(a, &|| reshape(&sum(g), a.shape()))?,
            RowSum(a) => push(a, &|| row_expand(g, a.shape()))?,
            RowExpand(a) => push(a, &|| row_sum(g))?,
            ChannelSum(a) => push(a, &|| channel_expand(g, a.shape()))?,
            ChannelExpand(a) => push(a, &|| channel_sum(g))?,
            Reshape(a) => push(a, &|| reshape(g, a.shape()))?,
            MatMul(a, b, ta, tb) => {
                let (ta, tb) = (*ta, *tb);
                push(a, &|| if ta { matmul(b, g, tb, true) } else { matmul(g, b, false, !tb) })?;
                push(b, &|| if tb { matmul(g, a, true, ta) } else { matmul(a, g, !ta, false) })?;
            }
            Conv(x, w, geo) => {
                let hw = [x.shape()[2], x.shape()[3]];
                let khw = [w.shape()[2], w.shape()[3]];
                push(x, &|| conv2d_input_grad(g, w, *geo, hw))?;
                push(w, &|| conv2d_weight_grad(x, g, *geo, khw))?;
            }
            ConvInputGrad(gy, w, geo) => {
                let khw = [w.shape()[2], w.shape()[3]];
                push(gy, &|| conv2d(g, w, *geo))?;
                push(w, &|| conv2d_weight_grad(g, gy, *geo, khw))?;
            }
            ConvWeightGrad(x, gy, geo) => {
                let hw = [x.shape()[2], x.shape()[3]];
                push(x, &|| conv2d_input_grad(gy, g, *geo, hw))?;
                push(gy, &|| conv2d(x, g, *geo))?;
            }
            Upsample(a) => push(a, &|| sum_pool2x2(g))?,
            SumPool(a) => push(a, &|| upsample2x(g))?,
            Gather(a, idx) => push(a, &|| scatter(g, idx.clone(), a.shape()))?,
            Scatter(a, idx) => push(a, &|| gather(g, idx.clone(), a.shape()))?,
        }
        Ok(out)
    }
}

fn same_shape<T: Real>(op: &'static str, a: &Tensor<T>, b: &Tensor<T>) -> Result<()> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(Error::shape(op, format!("{:?} vs {:?}", a.shape(), b.shape())))
    }
}

fn zip_map<T: Real>(a: &Tensor<T>, b: &Tensor<T>, f: impl Fn(T, T) -> T) -> Vec<T> {
    a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect()
}

fn unary<T: Real>(a: &Tensor<T>, f: impl Fn(T) -> T, op: Op<T>) -> Tensor<T> {
    Tensor::from_op(a.shape().to_vec(), a.data().iter().map(|&v| f(v)).collect(), op)
}

pub fn add<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape("add", a, b)?;
    Ok(Tensor::from_op(a.shape().to_vec(), zip_map(a, b, |x, y| x + y), Op::Add(a.clone(), b.clone())))
}

pub fn sub<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape("sub", a, b)?;
    Ok(Tensor::from_op(a.shape().to_vec(), zip_map(a, b, |x, y| x - y), Op::Sub(a.clone(), b.clone())))
}

pub fn mul<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape("mul", a, b)?;
    Ok(Tensor::from_op(a.shape().to_vec(), zip_map(a, b, |x, y| x * y), Op::Mul(a.clone(), b.clone())))
}

pub fn div<T: Real>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    same_shape("div", a, b)?;
    Ok(Tensor::from_op(a.shape().to_vec(), zip_map(a, b, |x, y| x / y), Op::Div(a.clone(), b.clone())))
}

pub fn scale<T: Real>(a: &Tensor<T>, c: T) -> Tensor<T> {
    unary(a, |v| v * c, Op::Scale(a.clone(), c))
}

pub fn add_scalar<T: Real>(a: &Tensor<T>, c: T) -> Tensor<T> {
    unary(a, |v| v + c, Op::AddScalar(a.clone()))
}

/// `max(x, 0)`; the derivative at 0 is taken as 0.
pub fn relu<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    unary(a, |v| if v > T::zero() { v } else { T::zero() }, Op::Relu(a.clone()))
}

pub fn leaky_relu<T: Real>(a: &Tensor<T>, alpha: T) -> Tensor<T> {
    unary(a, |v| if v > T::zero() { v } else { alpha * v }, Op::LeakyRelu(a.clone(), alpha))
}

pub fn tanh<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    unary(a, |v| v.tanh(), Op::Tanh(a.clone()))
}

pub fn sigmoid<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    unary(a, |v| T::one() / (T::one() + (-v).exp()), Op::Sigmoid(a.clone()))
}

pub fn square<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    unary(a, |v| v * v, Op::Square(a.clone()))
}

pub fn sqrt<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    unary(a, |v| v.sqrt(), Op::Sqrt(a.clone()))
}

/// Sum of all elements, as a rank-0 tensor.
pub fn sum<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    let s = a.data().iter().fold(T::zero(), |acc, &v| acc + v);
    Tensor::from_op(vec![], vec![s], Op::Sum(a.clone()))
}

pub fn mean<T: Real>(a: &Tensor<T>) -> Tensor<T> {
    let n = a.len().max(1);
    scale(&sum(a), T::one() / T::lit(n as f64))
}

/// Broadcast a one-element tensor to `shape`.
pub(crate) fn expand<T: Real>(a: &Tensor<T>, shape: &[usize]) -> Result<Tensor<T>> {
    let v = a.item()?;
    let n = shape.iter().product();
    Ok(Tensor::from_op(shape.to_vec(), vec![v; n], Op::Expand(a.clone())))
}

fn rows_of(op: &'static str, shape: &[usize]) -> Result<(usize, usize)> {
    match shape.split_first() {
        Some((&n, rest)) => Ok((n, rest.iter().product())),
        None => Err(Error::shape(op, "expected rank ≥ 1, got a scalar")),
    }
}

/// `[N, …] → [N]`: sum over everything but the leading axis.
pub fn row_sum<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, inner) = rows_of("row_sum", a.shape())?;
    let data = (0..n)
        .map(|i| a.data()[i * inner..(i + 1) * inner].iter().fold(T::zero(), |s, &v| s + v))
        .collect();
    Ok(Tensor::from_op(vec![n], data, Op::RowSum(a.clone())))
}

/// `[N] → shape` with `shape[0] == N`: repeat each value over its row.
pub fn row_expand<T: Real>(a: &Tensor<T>, shape: &[usize]) -> Result<Tensor<T>> {
    let (n, inner) = rows_of("row_expand", shape)?;
    if a.shape() != [n] {
        return Err(Error::shape("row_expand", format!("{:?} onto {:?}", a.shape(), shape)));
    }
    let data = a.data().iter().flat_map(|&v| std::iter::repeat_n(v, inner)).collect();
    Ok(Tensor::from_op(shape.to_vec(), data, Op::RowExpand(a.clone())))
}

fn channel_layout(op: &'static str, shape: &[usize]) -> Result<(usize, usize, usize)> {
    if shape.len() < 2 {
        return Err(Error::shape(op, format!("expected rank ≥ 2, got {shape:?}")));
    }
    Ok((shape[0], shape[1], shape[2..].iter().product()))
}

/// `[N, C, …] → [C]`.
pub fn channel_sum<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, c, s) = channel_layout("channel_sum", a.shape())?;
    let mut data = vec![T::zero(); c];
    for i in 0..n {
        for (ch, acc) in data.iter_mut().enumerate() {
            let off = (i * c + ch) * s;
            *acc += a.data()[off..off + s].iter().fold(T::zero(), |t, &v| t + v);
        }
    }
    Ok(Tensor::from_op(vec![c], data, Op::ChannelSum(a.clone())))
}

/// `[C] → [N, C, …]`.
pub fn channel_expand<T: Real>(a: &Tensor<T>, shape: &[usize]) -> Result<Tensor<T>> {
    let (n, c, s) = channel_layout("channel_expand", shape)?;
    if a.shape() != [c] {
        return Err(Error::shape("channel_expand", format!("{:?} onto {:?}", a.shape(), shape)));
    }
    let mut data = Vec::with_capacity(n * c * s);
    for _ in 0..n {
        for &v in a.data() {
            data.extend(std::iter::repeat_n(v, s));
        }
    }
    Ok(Tensor::from_op(shape.to_vec(), data, Op::ChannelExpand(a.clone())))
}

/// Adds a per-channel bias `[C]` to `[N, C, …]`.
pub fn bias_add<T: Real>(x: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    add(x, &channel_expand(b, x.shape())?)
}

pub fn reshape<T: Real>(a: &Tensor<T>, shape: &[usize]) -> Result<Tensor<T>> {
    if shape.iter().product::<usize>() != a.len() {
        return Err(Error::shape("reshape", format!("{:?} to {:?}", a.shape(), shape)));
    }
    Ok(Tensor::from_op(shape.to_vec(), a.to_vec(), Op::Reshape(a.clone())))
}

fn as_matrix<'a, T: Real>(op: &'static str, t: &'a Tensor<T>, trans: bool) -> Result<MatRef<'a, T>> {
    match *t.shape() {
        [r, c] => {
            let m = MatRef::row_major(t.data(), r, c);
            Ok(if trans { m.transposed() } else { m })
        }
        ref s => Err(Error::shape(op, format!("expected a matrix, got {s:?}"))),
    }
}

/// `op(A)·op(B)` where `op` optionally transposes a rank-2 operand.
pub fn matmul<T: Real>(a: &Tensor<T>, b: &Tensor<T>, trans_a: bool, trans_b: bool) -> Result<Tensor<T>> {
    let ma = as_matrix("matmul", a, trans_a)?;
    let mb = as_matrix("matmul", b, trans_b)?;
    if ma.cols != mb.rows {
        return Err(Error::shape(
            "matmul",
            format!("{:?}{} · {:?}{}", a.shape(), if trans_a { "ᵀ" } else { "" }, b.shape(), if trans_b { "ᵀ" } else { "" }),
        ));
    }
    let mut out = vec![T::zero(); ma.rows * mb.cols];
    kernels::gemm(T::one(), ma, mb, T::zero(), &mut out);
    Ok(Tensor::from_op(vec![ma.rows, mb.cols], out, Op::MatMul(a.clone(), b.clone(), trans_a, trans_b)))
}

/// Fully connected layer: `x [N, in] · wᵀ [in, out] + b [out]`.
pub fn linear<T: Real>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    bias_add(&matmul(x, w, false, true)?, b)
}

fn rank4(op: &'static str, t: &[usize]) -> Result<[usize; 4]> {
    t.try_into().map_err(|_| Error::shape(op, format!("expected rank 4, got {t:?}")))
}

fn conv_dims(
    op: &'static str,
    xs: [usize; 4],
    ws: [usize; 4],
    geo: ConvGeometry,
) -> Result<ConvDims> {
    let [n, c, h, w] = xs;
    let [o, wc, kh, kw] = ws;
    if c != wc {
        return Err(Error::shape(op, format!("input {xs:?} has {c} channels, kernel {ws:?} expects {wc}")));
    }
    let (oh, ow) = match (geo.out_len(h, kh), geo.out_len(w, kw)) {
        (Some(oh), Some(ow)) => (oh, ow),
        _ => return Err(Error::shape(op, format!("kernel {ws:?} does not fit input {xs:?} with {geo:?}"))),
    };
    Ok(ConvDims { n, c, h, w, o, kh, kw, stride: geo.stride, pad: geo.pad, oh, ow })
}

/// Cross-correlation of `x [N, C, H, W]` with `w [O, C, KH, KW]`, no bias.
pub fn conv2d<T: Real>(x: &Tensor<T>, w: &Tensor<T>, geo: ConvGeometry) -> Result<Tensor<T>> {
    let d = conv_dims("conv2d", rank4("conv2d", x.shape())?, rank4("conv2d", w.shape())?, geo)?;
    let out = kernels::conv2d_forward(x.data(), w.data(), &d);
    Ok(Tensor::from_op(vec![d.n, d.o, d.oh, d.ow], out, Op::Conv(x.clone(), w.clone(), geo)))
}

/// Adjoint of [`conv2d`] in its input: maps `g [N, O, OH, OW]` to `[N, C, H, W]`.
pub fn conv2d_input_grad<T: Real>(
    g: &Tensor<T>,
    w: &Tensor<T>,
    geo: ConvGeometry,
    in_hw: [usize; 2],
) -> Result<Tensor<T>> {
    let gs = rank4("conv2d_input_grad", g.shape())?;
    let ws = rank4("conv2d_input_grad", w.shape())?;
    let d = conv_dims("conv2d_input_grad", [gs[0], ws[1], in_hw[0], in_hw[1]], ws, geo)?;
    if [d.n, d.o, d.oh, d.ow] != gs {
        return Err(Error::shape("conv2d_input_grad", format!("gradient {gs:?} inconsistent with kernel {ws:?}, input {in_hw:?}")));
    }
    let out = kernels::conv2d_input_grad(g.data(), w.data(), &d);
    Ok(Tensor::from_op(vec![d.n, d.c, d.h, d.w], out, Op::ConvInputGrad(g.clone(), w.clone(), geo)))
}

/// Adjoint of [`conv2d`] in its kernel: maps `(x, g)` to `[O, C, KH, KW]`.
pub fn conv2d_weight_grad<T: Real>(
    x: &Tensor<T>,
    g: &Tensor<T>,
    geo: ConvGeometry,
    k_hw: [usize; 2],
) -> Result<Tensor<T>> {
    let xs = rank4("conv2d_weight_grad", x.shape())?;
    let gs = rank4("conv2d_weight_grad", g.shape())?;
    let d = conv_dims("conv2d_weight_grad", xs, [gs[1], xs[1], k_hw[0], k_hw[1]], geo)?;
    if [d.n, d.o, d.oh, d.ow] != gs {
        return Err(Error::shape("conv2d_weight_grad", format!("gradient {gs:?} inconsistent with input {xs:?}")));
    }
    let out = kernels::conv2d_weight_grad(x.data(), g.data(), &d);
    Ok(Tensor::from_op(vec![d.o, d.c, d.kh, d.kw], out, Op::ConvWeightGrad(x.clone(), g.clone(), geo)))
}

fn plane_dims(op: &'static str, s: &[usize]) -> Result<(usize, usize, usize, Vec<usize>)> {
    if s.len() < 2 {
        return Err(Error::shape(op, format!("expected rank ≥ 2, got {s:?}")));
    }
    let (h, w) = (s[s.len() - 2], s[s.len() - 1]);
    let planes = s[..s.len() - 2].iter().product();
    Ok((planes, h, w, s[..s.len() - 2].to_vec()))
}

pub fn upsample2x<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    let (p, h, w, mut lead) = plane_dims("upsample2x", a.shape())?;
    let out = kernels::upsample2x(a.data(), p, h, w);
    lead.extend([2 * h, 2 * w]);
    Ok(Tensor::from_op(lead, out, Op::Upsample(a.clone())))
}

/// 2×2 window sums (the adjoint of [`upsample2x`]); spatial dims must be even.
pub fn sum_pool2x2<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    let (p, h, w, mut lead) = plane_dims("sum_pool2x2", a.shape())?;
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::shape("sum_pool2x2", format!("odd spatial size {:?}", a.shape())));
    }
    let out = kernels::sum_pool2x2(a.data(), p, h, w);
    lead.extend([h / 2, w / 2]);
    Ok(Tensor::from_op(lead, out, Op::SumPool(a.clone())))
}

/// 2×2 max pooling with stride 2; a trailing odd row/column is dropped.
pub fn maxpool2x2<T: Real>(a: &Tensor<T>) -> Result<Tensor<T>> {
    let (p, h, w, mut lead) = plane_dims("maxpool2x2", a.shape())?;
    if h < 2 || w < 2 {
        return Err(Error::shape("maxpool2x2", format!("spatial size too small: {:?}", a.shape())));
    }
    let idx = kernels::maxpool2x2_indices(a.data(), p, h, w);
    lead.extend([h / 2, w / 2]);
    gather(a, Rc::new(idx), &lead)
}

/// `out[i] = a[idx[i]]`, shaped as `shape`.
pub fn gather<T: Real>(a: &Tensor<T>, idx: Rc<Vec<usize>>, shape: &[usize]) -> Result<Tensor<T>> {
    if shape.iter().product::<usize>() != idx.len() || idx.iter().any(|&i| i >= a.len()) {
        return Err(Error::shape("gather", format!("{} indices into {:?} as {:?}", idx.len(), a.shape(), shape)));
    }
    let data = idx.iter().map(|&i| a.data()[i]).collect();
    Ok(Tensor::from_op(shape.to_vec(), data, Op::Gather(a.clone(), idx)))
}

/// `out[idx[i]] += a[i]` into a zero tensor of `shape` (adjoint of [`gather`]).
pub fn scatter<T: Real>(a: &Tensor<T>, idx: Rc<Vec<usize>>, shape: &[usize]) -> Result<Tensor<T>> {
    let n: usize = shape.iter().product();
    if a.len() != idx.len() || idx.iter().any(|&i| i >= n) {
        return Err(Error::shape("scatter", format!("{:?} with {} indices into {:?}", a.shape(), idx.len(), shape)));
    }
    let mut data = vec![T::zero(); n];
    for (&i, &v) in idx.iter().zip(a.data()) {
        data[i] += v;
    }
    Ok(Tensor::from_op(shape.to_vec(), data, Op::Scatter(a.clone(), idx)))
}

/// Per-sample Euclidean norm `[N, …] → [N]`, `sqrt(Σx² + eps)`.
pub fn l2_norm_per_sample<T: Real>(a: &Tensor<T>, eps: T) -> Result<Tensor<T>> {
    Ok(sqrt(&add_scalar(&row_sum(&square(a))?, eps)))
}

/// Per-sample, per-channel normalisation of `[N, C, H, W]` to zero mean and unit variance.
pub fn instance_norm<T: Real>(x: &Tensor<T>, eps: T) -> Result<Tensor<T>> {
    let [n, c, h, w] = rank4("instance_norm", x.shape())?;
    let hw = T::lit((h * w) as f64);
    let rows = reshape(x, &[n * c, h * w])?;
    let mu = scale(&row_sum(&rows)?, T::one() / hw);
    let centered = sub(&rows, &row_expand(&mu, rows.shape())?)?;
    let var = scale(&row_sum(&square(&centered))?, T::one() / hw);
    let std = sqrt(&add_scalar(&var, eps));
    let y = div(&centered, &row_expand(&std, rows.shape())?)?;
    reshape(&y, &[n, c, h, w])
}
