//! Central finite-difference gradient checks (64-bit).

use rand::Rng;
use sasforge::autodiff::{self as ad, Tensor};

use super::{rel_err, rng, uniform_vec};

pub const FD_STEP: f64 = 1e-5;

/// Scalar function of a list of tensors.
pub type ScalarFn<'a> = dyn Fn(&[Tensor<f64>]) -> Tensor<f64> + 'a;

/// Central-difference gradient of `f` with respect to `inputs[which]`.
pub fn fd_grad(f: &ScalarFn, inputs: &[(Vec<usize>, Vec<f64>)], which: usize, h: f64) -> Vec<f64> {
    let eval = |vals: &[(Vec<usize>, Vec<f64>)]| -> f64 {
        let ts: Vec<_> = vals.iter().map(|(s, d)| Tensor::constant(s, d.clone()).unwrap()).collect();
        f(&ts).item().unwrap()
    };
    let mut work = inputs.to_vec();
    (0..inputs[which].1.len())
        .map(|i| {
            let orig = work[which].1[i];
            work[which].1[i] = orig + h;
            let up = eval(&work);
            work[which].1[i] = orig - h;
            let down = eval(&work);
            work[which].1[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Analytic gradients of `f` with respect to every input.
pub fn analytic_grads(f: &ScalarFn, inputs: &[(Vec<usize>, Vec<f64>)]) -> Vec<Vec<f64>> {
    let ts: Vec<_> = inputs.iter().map(|(s, d)| Tensor::param(s, d.clone()).unwrap()).collect();
    let out = f(&ts);
    ad::backward(&out, &ts, false).unwrap().into_iter().map(|g| g.to_vec()).collect()
}

/// Worst per-input relative error between analytic and finite-difference gradients.
pub fn max_rel_err(f: &ScalarFn, inputs: &[(Vec<usize>, Vec<f64>)]) -> f64 {
    let analytic = analytic_grads(f, inputs);
    (0..inputs.len())
        .map(|k| rel_err(&analytic[k], &fd_grad(f, inputs, k, FD_STEP)))
        .fold(0.0, f64::max)
}

/// Contract a tensor to a scalar with fixed pseudo-random weights so every
/// output element contributes a distinct gradient.
pub fn weighted_sum(t: &Tensor<f64>, seed: u64) -> Tensor<f64> {
    let mut r = rng(seed ^ 0x9e37_79b9);
    let w = Tensor::constant(t.shape(), uniform_vec(&mut r, t.len(), -1.0, 1.0)).unwrap();
    ad::sum(&ad::mul(t, &w).unwrap())
}

/// Values bounded away from zero, for ops with a kink at 0.
pub fn away_from_zero(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let mag = rng.random_range(0.05..1.0);
            if rng.random_bool(0.5) { mag } else { -mag }
        })
        .collect()
}

/// A named primitive check: builds random inputs for a seed and the scalar function.
pub struct PrimitiveCase {
    pub name: &'static str,
    pub build: fn(u64) -> (Vec<(Vec<usize>, Vec<f64>)>, Box<ScalarFn<'static>>),
}

fn dims(r: &mut impl Rng, lo: usize, hi: usize) -> usize {
    r.random_range(lo..=hi)
}

macro_rules! case {
    ($name:literal, |$seed:ident, $r:ident| $body:block) => {
        PrimitiveCase {
            name: $name,
            build: |$seed| {
                let mut $r = rng($seed);
                $body
            },
        }
    };
}

fn unary_case(
    seed: u64,
    r: &mut impl Rng,
    kink_free: bool,
    positive: bool,
    op: fn(&Tensor<f64>) -> Tensor<f64>,
) -> (Vec<(Vec<usize>, Vec<f64>)>, Box<ScalarFn<'static>>) {
    let shape = vec![dims(r, 1, 3), dims(r, 2, 5), dims(r, 2, 5)];
    let n = shape.iter().product();
    let data = if positive {
        (0..n).map(|_| r.random_range(0.2..2.0)).collect()
    } else if kink_free {
        away_from_zero(r, n)
    } else {
        (0..n).map(|_| r.random_range(-2.0..2.0)).collect()
    };
    (vec![(shape, data)], Box::new(move |t: &[Tensor<f64>]| weighted_sum(&op(&t[0]), seed)))
}

fn binary_case(
    seed: u64,
    r: &mut impl Rng,
    op: fn(&Tensor<f64>, &Tensor<f64>) -> sasforge::Result<Tensor<f64>>,
    positive_b: bool,
) -> (Vec<(Vec<usize>, Vec<f64>)>, Box<ScalarFn<'static>>) {
    let shape = vec![dims(r, 1, 4), dims(r, 1, 6)];
    let n = shape.iter().product();
    let a: Vec<f64> = (0..n).map(|_| r.random_range(-2.0..2.0)).collect();
    let b: Vec<f64> = if positive_b {
        (0..n).map(|_| r.random_range(0.5..2.0)).collect()
    } else {
        (0..n).map(|_| r.random_range(-2.0..2.0)).collect()
    };
    (
        vec![(shape.clone(), a), (shape, b)],
        Box::new(move |t: &[Tensor<f64>]| weighted_sum(&op(&t[0], &t[1]).unwrap(), seed)),
    )
}

fn conv_case(seed: u64, r: &mut impl Rng) -> (Vec<(Vec<usize>, Vec<f64>)>, [usize; 4], [usize; 4], ad::ConvGeometry) {
    let stride = dims(r, 1, 2);
    let k = [1usize, 3, 4][dims(r, 0, 2)];
    let pad = dims(r, 0, 1);
    let xs = [dims(r, 1, 2), dims(r, 1, 3), dims(r, k.max(3), 7), dims(r, k.max(3), 7)];
    let ws = [dims(r, 1, 3), xs[1], k, k];
    let x = uniform_vec(&mut super::rng(seed + 1), xs.iter().product(), -1.0, 1.0);
    let w = uniform_vec(&mut super::rng(seed + 2), ws.iter().product(), -1.0, 1.0);
    (vec![(xs.to_vec(), x), (ws.to_vec(), w)], xs, ws, ad::ConvGeometry::new(stride, pad))
}

/// Every primitive, each with a randomized shape per seed.
pub fn primitive_cases() -> Vec<PrimitiveCase> {
    vec![
        case!("add", |s, r| { binary_case(s, &mut r, ad::add, false) }),
        case!("sub", |s, r| { binary_case(s, &mut r, ad::sub, false) }),
        case!("mul", |s, r| { binary_case(s, &mut r, ad::mul, false) }),
        case!("div", |s, r| { binary_case(s, &mut r, ad::div, true) }),
        case!("relu", |s, r| { unary_case(s, &mut r, true, false, ad::relu) }),
        case!("leaky_relu", |s, r| { unary_case(s, &mut r, true, false, |t| ad::leaky_relu(t, 0.2)) }),
        case!("tanh", |s, r| { unary_case(s, &mut r, false, false, ad::tanh) }),
        case!("sigmoid", |s, r| { unary_case(s, &mut r, false, false, ad::sigmoid) }),
        case!("square", |s, r| { unary_case(s, &mut r, false, false, ad::square) }),
        case!("sqrt", |s, r| { unary_case(s, &mut r, false, true, ad::sqrt) }),
        case!("scale", |s, r| { unary_case(s, &mut r, false, false, |t| ad::scale(t, -1.7)) }),
        case!("add_scalar", |s, r| { unary_case(s, &mut r, false, false, |t| ad::add_scalar(t, 0.3)) }),
        case!("mean", |s, r| {
            let (inp, _) = unary_case(s, &mut r, false, false, ad::square);
            (inp, Box::new(|t: &[Tensor<f64>]| ad::mean(&ad::square(&t[0]))))
        }),
        case!("sum", |s, r| {
            let (inp, _) = unary_case(s, &mut r, false, false, ad::square);
            (inp, Box::new(|t: &[Tensor<f64>]| ad::sum(&ad::tanh(&t[0]))))
        }),
        case!("l2_norm_per_sample", |s, r| {
            unary_case(s, &mut r, false, false, |t| ad::l2_norm_per_sample(t, 1e-12).unwrap())
        }),
        case!("row_sum", |s, r| { unary_case(s, &mut r, false, false, |t| ad::row_sum(t).unwrap()) }),
        case!("channel_sum", |s, r| { unary_case(s, &mut r, false, false, |t| ad::channel_sum(t).unwrap()) }),
        case!("reshape", |s, r| {
            unary_case(s, &mut r, false, false, |t| ad::reshape(t, &[t.len()]).unwrap())
        }),
        case!("bias_add", |s, r| {
            let shape = vec![dims(&mut r, 1, 3), dims(&mut r, 1, 4), dims(&mut r, 1, 4)];
            let x = uniform_vec(&mut r, shape.iter().product(), -1.0, 1.0);
            let b = uniform_vec(&mut r, shape[1], -1.0, 1.0);
            (
                vec![(shape, x), (vec![b.len()], b)],
                Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::bias_add(&t[0], &t[1]).unwrap(), s)),
            )
        }),
        case!("row_expand", |s, r| {
            let shape = vec![dims(&mut r, 1, 4), dims(&mut r, 1, 4), dims(&mut r, 1, 3)];
            let v = uniform_vec(&mut r, shape[0], -1.0, 1.0);
            (
                vec![(vec![shape[0]], v)],
                Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::row_expand(&t[0], &shape).unwrap(), s)),
            )
        }),
        case!("matmul", |s, r| {
            let (m, k, n) = (dims(&mut r, 1, 4), dims(&mut r, 1, 5), dims(&mut r, 1, 4));
            let ta = r.random_bool(0.5);
            let tb = r.random_bool(0.5);
            let a_shape = if ta { vec![k, m] } else { vec![m, k] };
            let b_shape = if tb { vec![n, k] } else { vec![k, n] };
            let a = uniform_vec(&mut r, m * k, -1.0, 1.0);
            let b = uniform_vec(&mut r, k * n, -1.0, 1.0);
            (
                vec![(a_shape, a), (b_shape, b)],
                Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::matmul(&t[0], &t[1], ta, tb).unwrap(), s)),
            )
        }),
        case!("linear", |s, r| {
            let (n, i, o) = (dims(&mut r, 1, 4), dims(&mut r, 1, 6), dims(&mut r, 1, 4));
            let x = uniform_vec(&mut r, n * i, -1.0, 1.0);
            let w = uniform_vec(&mut r, o * i, -1.0, 1.0);
            let b = uniform_vec(&mut r, o, -1.0, 1.0);
            (
                vec![(vec![n, i], x), (vec![o, i], w), (vec![o], b)],
                Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::linear(&t[0], &t[1], &t[2]).unwrap(), s)),
            )
        }),
        case!("conv2d", |s, r| {
            let (inp, _, _, geo) = conv_case(s, &mut r);
            (inp, Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::conv2d(&t[0], &t[1], geo).unwrap(), s)))
        }),
        case!("conv2d_input_grad", |s, r| {
            let (inp, xs, ws, geo) = conv_case(s, &mut r);
            let oh = geo.out_len(xs[2], ws[2]).unwrap();
            let ow = geo.out_len(xs[3], ws[3]).unwrap();
            let gs = vec![xs[0], ws[0], oh, ow];
            let g = uniform_vec(&mut r, gs.iter().product(), -1.0, 1.0);
            let hw = [xs[2], xs[3]];
            (
                vec![(gs, g), inp[1].clone()],
                Box::new(move |t: &[Tensor<f64>]| {
                    weighted_sum(&ad::conv2d_input_grad(&t[0], &t[1], geo, hw).unwrap(), s)
                }),
            )
        }),
        case!("conv2d_weight_grad", |s, r| {
            let (inp, xs, ws, geo) = conv_case(s, &mut r);
            let oh = geo.out_len(xs[2], ws[2]).unwrap();
            let ow = geo.out_len(xs[3], ws[3]).unwrap();
            let gs = vec![xs[0], ws[0], oh, ow];
            let g = uniform_vec(&mut r, gs.iter().product(), -1.0, 1.0);
            let khw = [ws[2], ws[3]];
            (
                vec![inp[0].clone(), (gs, g)],
                Box::new(move |t: &[Tensor<f64>]| {
                    weighted_sum(&ad::conv2d_weight_grad(&t[0], &t[1], geo, khw).unwrap(), s)
                }),
            )
        }),
        case!("upsample2x", |s, r| {
            let shape = vec![dims(&mut r, 1, 2), dims(&mut r, 1, 3), dims(&mut r, 1, 4), dims(&mut r, 1, 4)];
            let x = uniform_vec(&mut r, shape.iter().product(), -1.0, 1.0);
            (vec![(shape, x)], Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::upsample2x(&t[0]).unwrap(), s)))
        }),
        case!("sum_pool2x2", |s, r| {
            let shape = vec![dims(&mut r, 1, 2), dims(&mut r, 1, 3), 2 * dims(&mut r, 1, 3), 2 * dims(&mut r, 1, 3)];
            let x = uniform_vec(&mut r, shape.iter().product(), -1.0, 1.0);
            (vec![(shape, x)], Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::sum_pool2x2(&t[0]).unwrap(), s)))
        }),
        case!("maxpool2x2", |s, r| {
            let shape = vec![dims(&mut r, 1, 2), dims(&mut r, 1, 3), 2 * dims(&mut r, 1, 3), 2 * dims(&mut r, 1, 3)];
            // A shuffled ladder keeps window maxima separated by far more than the step.
            let n: usize = shape.iter().product();
            let mut x: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
            for i in (1..n).rev() {
                x.swap(i, r.random_range(0..=i));
            }
            (vec![(shape, x)], Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::maxpool2x2(&t[0]).unwrap(), s)))
        }),
        case!("instance_norm", |s, r| {
            let shape = vec![dims(&mut r, 1, 2), dims(&mut r, 1, 3), dims(&mut r, 2, 4), dims(&mut r, 2, 4)];
            let x = uniform_vec(&mut r, shape.iter().product(), -1.0, 1.0);
            (
                vec![(shape, x)],
                Box::new(move |t: &[Tensor<f64>]| weighted_sum(&ad::instance_norm(&t[0], 1e-5).unwrap(), s)),
            )
        }),
    ]
}

/// Small strided conv critic used for the double-backward checks:
/// conv(4×4, s2) → leaky-ReLU → conv(3×3, s2) → leaky-ReLU → linear → scalar per sample.
pub struct TinyCritic {
    pub shapes: Vec<Vec<usize>>,
}

impl TinyCritic {
    pub fn new(channels: usize, size: usize) -> Self {
        let s1 = (size + 2 - 4) / 2 + 1;
        let s2 = (s1 + 2 - 3) / 2 + 1;
        TinyCritic {
            shapes: vec![
                vec![4, channels, 4, 4],
                vec![4],
                vec![3, 4, 3, 3],
                vec![3],
                vec![1, 3 * s2 * s2],
                vec![1],
            ],
        }
    }

    pub fn init(&self, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng(seed);
        self.shapes
            .iter()
            .map(|s| uniform_vec(&mut r, s.iter().product(), -0.5, 0.5))
            .collect()
    }

    pub fn forward(&self, p: &[Tensor<f64>], x: &Tensor<f64>) -> Tensor<f64> {
        let g = ad::ConvGeometry::new(2, 1);
        let h = ad::leaky_relu(&ad::bias_add(&ad::conv2d(x, &p[0], g).unwrap(), &p[1]).unwrap(), 0.2);
        let h = ad::leaky_relu(&ad::bias_add(&ad::conv2d(&h, &p[2], g).unwrap(), &p[3]).unwrap(), 0.2);
        let n = h.shape()[0];
        let flat = ad::reshape(&h, &[n, h.len() / n]).unwrap();
        ad::linear(&flat, &p[4], &p[5]).unwrap()
    }

    /// `mean_n (‖∂ΣD/∂x‖₂ − 1)²`, built with a recorded backward pass.
    pub fn penalty(&self, p: &[Tensor<f64>], x: &Tensor<f64>) -> Tensor<f64> {
        let x = if x.is_tracked() { x.clone() } else { x.detach_tracked() };
        let d = self.forward(p, &x);
        let gx = ad::grad_scalar(&ad::sum(&d), &x, true).unwrap();
        let norm = ad::l2_norm_per_sample(&gx, 1e-12).unwrap();
        ad::mean(&ad::square(&ad::add_scalar(&norm, -1.0)))
    }
}
