use std::fmt;
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};

use super::ops::Op;
use super::{grad_enabled, Real};
use crate::error::{Error, Result};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

pub(crate) struct Node<T: Real> {
    pub(crate) id: u64,
    pub(crate) shape: Vec<usize>,
    pub(crate) data: Vec<T>,
    pub(crate) tracked: bool,
    pub(crate) op: Option<Op<T>>,
}

/// A dense row-major array, optionally a node of a differentiable graph.
///
/// Cloning is cheap (reference-counted) and yields the same graph node.
pub struct Tensor<T: Real = f64> {
    pub(crate) node: Rc<Node<T>>,
}

impl<T: Real> Clone for Tensor<T> {
    fn clone(&self) -> Self {
        Tensor { node: Rc::clone(&self.node) }
    }
}

impl<T: Real> fmt::Debug for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let preview: Vec<_> = self.node.data.iter().take(8).collect();
        f.debug_struct("Tensor")
            .field("id", &self.node.id)
            .field("shape", &self.node.shape)
            .field("tracked", &self.node.tracked)
            .field("data", &preview)
            .finish()
    }
}

fn numel(shape: &[usize]) -> usize {
    shape.iter().product()
}

impl<T: Real> Tensor<T> {
    fn leaf(shape: Vec<usize>, data: Vec<T>, tracked: bool) -> Result<Self> {
        if numel(&shape) != data.len() {
            return Err(Error::shape(
                "tensor",
                format!("shape {shape:?} needs {} values, got {}", numel(&shape), data.len()),
            ));
        }
        Ok(Self::raw(shape, data, tracked, None))
    }

    pub(crate) fn raw(shape: Vec<usize>, data: Vec<T>, tracked: bool, op: Option<Op<T>>) -> Self {
        debug_assert_eq!(numel(&shape), data.len());
        Tensor {
            node: Rc::new(Node { id: NEXT_ID.fetch_add(1, Ordering::Relaxed), shape, data, tracked, op }),
        }
    }

    /// Result of a recorded op. Tracking (and the edge) is kept only when
    /// recording is enabled and some input is tracked.
    pub(crate) fn from_op(shape: Vec<usize>, data: Vec<T>, op: Op<T>) -> Self {
        let tracked = grad_enabled() && op.inputs().iter().any(|t| t.is_tracked());
        if tracked {
            Self::raw(shape, data, true, Some(op))
        } else {
            Self::raw(shape, data, false, None)
        }
    }

    /// Untracked value.
    pub fn constant(shape: &[usize], data: Vec<T>) -> Result<Self> {
        Self::leaf(shape.to_vec(), data, false)
    }

    /// Tracked leaf (a parameter or an input we differentiate against).
    pub fn param(shape: &[usize], data: Vec<T>) -> Result<Self> {
        Self::leaf(shape.to_vec(), data, true)
    }

    pub fn scalar(v: T) -> Self {
        Self::raw(vec![], vec![v], false, None)
    }

    pub fn full(shape: &[usize], v: T) -> Self {
        Self::raw(shape.to_vec(), vec![v; numel(shape)], false, None)
    }

    pub fn zeros(shape: &[usize]) -> Self {
        Self::full(shape, T::zero())
    }

    pub fn ones(shape: &[usize]) -> Self {
        Self::full(shape, T::one())
    }

    pub fn shape(&self) -> &[usize] {
        &self.node.shape
    }

    pub fn data(&self) -> &[T] {
        &self.node.data
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.node.data.clone()
    }

    pub fn len(&self) -> usize {
        self.node.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node.data.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.node.shape.len()
    }

    pub fn is_tracked(&self) -> bool {
        self.node.tracked
    }

    pub fn id(&self) -> u64 {
        self.node.id
    }

    /// The single value of a one-element tensor.
    pub fn item(&self) -> Result<T> {
        match self.node.data.as_slice() {
            [v] => Ok(*v),
            d => Err(Error::Contract(format!("item() on a tensor with {} elements", d.len()))),
        }
    }

    /// Same values, cut from the graph.
    pub fn detach(&self) -> Self {
        Self::raw(self.node.shape.clone(), self.node.data.clone(), false, None)
    }

    /// Same values as a fresh tracked leaf.
    pub fn detach_tracked(&self) -> Self {
        Self::raw(self.node.shape.clone(), self.node.data.clone(), true, None)
    }

    pub fn all_finite(&self) -> bool {
        self.node.data.iter().all(|v| v.is_finite())
    }

    /// Element-wise map producing an untracked tensor of the same shape.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> Self {
        Self::raw(self.node.shape.clone(), self.node.data.iter().map(|&v| f(v)).collect(), false, None)
    }
}
