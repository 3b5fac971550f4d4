use std::collections::HashMap;

use super::ops::add;
use super::tensor::Tensor;
use super::{with_grad_mode, Real};
use crate::error::{Error, Result};

/// Reverse-mode gradients of the one-element `output` with respect to each of
/// `wrt`.
///
/// With `create_graph` the backward pass is recorded from differentiable ops,
/// so the returned gradients can be fed into further ops and differentiated
/// again. Without it they are plain constants. A `wrt` tensor that `output`
/// does not depend on receives an all-zero gradient.
pub fn backward<T: Real>(
    output: &Tensor<T>,
    wrt: &[Tensor<T>],
    create_graph: bool,
) -> Result<Vec<Tensor<T>>> {
    if output.len() != 1 {
        return Err(Error::Contract(format!(
            "backward needs a one-element output, got shape {:?}",
            output.shape()
        )));
    }
    if let Some(t) = wrt.iter().find(|t| !t.is_tracked()) {
        return Err(Error::Contract(format!("backward wrt an untracked tensor (id {})", t.id())));
    }

    // Consumer counts over the tracked subgraph, so each node is expanded only
    // once all of its gradient contributions have arrived.
    let mut pending: HashMap<u64, usize> = HashMap::new();
    if output.is_tracked() {
        let mut stack = vec![output.clone()];
        pending.insert(output.id(), 0);
        while let Some(t) = stack.pop() {
            if let Some(op) = &t.node.op {
                for p in op.inputs() {
                    if !p.is_tracked() {
                        continue;
                    }
                    let seen = pending.contains_key(&p.id());
                    *pending.entry(p.id()).or_insert(0) += 1;
                    if !seen {
                        stack.push(p.clone());
                    }
                }
            }
        }
    }

    let keep: HashMap<u64, usize> = wrt.iter().enumerate().map(|(i, t)| (t.id(), i)).collect();
    let mut kept: Vec<Option<Tensor<T>>> = vec![None; wrt.len()];

    with_grad_mode(create_graph, || -> Result<()> {
        if !output.is_tracked() {
            return Ok(());
        }
        let mut grads: HashMap<u64, Tensor<T>> = HashMap::new();
        grads.insert(output.id(), Tensor::ones(output.shape()));
        let mut ready = vec![output.clone()];
        while let Some(t) = ready.pop() {
            let g = grads.remove(&t.id()).expect("gradient present once a node is ready");
            if let Some(&i) = keep.get(&t.id()) {
                kept[i] = Some(g.clone());
            }
            let Some(op) = &t.node.op else { continue };
            for (parent, pg) in op.backward(&g)? {
                let acc = match grads.remove(&parent.id()) {
                    Some(prev) => add(&prev, &pg)?,
                    None => pg,
                };
                grads.insert(parent.id(), acc);
                let left = pending.get_mut(&parent.id()).expect("parent was visited");
                *left -= 1;
                if *left == 0 {
                    ready.push(parent);
                }
            }
        }
        Ok(())
    })?;

    Ok(kept
        .into_iter()
        .zip(wrt)
        .map(|(g, t)| g.unwrap_or_else(|| Tensor::zeros(t.shape())))
        .collect())
}

/// Gradient of `output` with respect to a single tensor.
pub fn grad_scalar<T: Real>(output: &Tensor<T>, wrt: &Tensor<T>, create_graph: bool) -> Result<Tensor<T>> {
    Ok(backward(output, std::slice::from_ref(wrt), create_graph)?.remove(0))
}
