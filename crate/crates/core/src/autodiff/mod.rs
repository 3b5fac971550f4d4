//! Define-by-run reverse-mode automatic differentiation over dense n-d arrays.
//!
//! Every forward op records its inputs on the output [`Tensor`]. Backward
//! rules are written in terms of the same differentiable ops, so running
//! [`backward`] with `create_graph = true` yields gradients that are
//! themselves differentiable. That is what the critic's gradient-norm
//! penalty needs: the penalty is a function of `∂D/∂x̂`, and its own gradient
//! with respect to the critic weights is a second-order quantity.
//!
//! Graphs are `Rc`-linked and confined to the thread that built them. The
//! numeric kernels underneath may still fan out through [`crate::par`].

mod adam;
mod backward;
mod kernels;
mod ops;
mod tensor;

use std::cell::Cell;
use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use backward::{backward, grad_scalar};
pub use ops::{
    add, add_scalar, bias_add, channel_expand, channel_sum, conv2d, conv2d_input_grad,
    conv2d_weight_grad, div, gather, instance_norm, l2_norm_per_sample, leaky_relu, linear,
    matmul, maxpool2x2, mean, mul, relu, reshape, row_expand, row_sum, scale, scatter, sigmoid,
    sqrt, square, sub, sum, sum_pool2x2, tanh, upsample2x, ConvGeometry,
};
pub use tensor::Tensor;

/// Floating-point element type of a [`Tensor`].
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + 'static
{
    /// `C ← α·A·B + β·C` over strided row/column layouts.
    ///
    /// # Safety
    /// The strides and extents must address memory inside the given buffers.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal fits the float type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f32,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Real for f64 {
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: f64,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

thread_local! {
    static GRAD_ENABLED: Cell<bool> = const { Cell::new(true) };
}

/// Whether ops on this thread currently record graph edges.
pub fn grad_enabled() -> bool {
    GRAD_ENABLED.with(|g| g.get())
}

/// Runs `f` with graph recording switched to `enabled`, restoring the previous
/// mode afterwards (also on unwind).
pub fn with_grad_mode<R>(enabled: bool, f: impl FnOnce() -> R) -> R {
    struct Restore(bool);
    impl Drop for Restore {
        fn drop(&mut self) {
            GRAD_ENABLED.with(|g| g.set(self.0));
        }
    }
    let _restore = Restore(GRAD_ENABLED.with(|g| g.replace(enabled)));
    f()
}

/// Runs `f` without recording any graph edges.
pub fn no_grad<R>(f: impl FnOnce() -> R) -> R {
    with_grad_mode(false, f)
}
