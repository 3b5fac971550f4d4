//! Raw numeric kernels on flat row-major buffers. No graph bookkeeping here.

use super::Real;
use crate::par;

/// Strided read-only matrix view used by [`gemm`].
#[derive(Clone, Copy)]
pub(crate) struct MatRef<'a, T> {
    pub data: &'a [T],
    pub rows: usize,
    pub cols: usize,
    pub rs: usize,
    pub cs: usize,
}

impl<'a, T> MatRef<'a, T> {
    pub fn row_major(data: &'a [T], rows: usize, cols: usize) -> Self {
        MatRef { data, rows, cols, rs: cols, cs: 1 }
    }

    pub fn transposed(self) -> Self {
        MatRef { data: self.data, rows: self.cols, cols: self.rows, rs: self.cs, cs: self.rs }
    }

    fn fits(&self) -> bool {
        self.rows == 0
            || self.cols == 0
            || (self.rows - 1) * self.rs + (self.cols - 1) * self.cs < self.data.len()
    }
}

/// `C ← α·A·B + β·C` with `C` row-major `[a.rows, b.cols]`.
pub(crate) fn gemm<T: Real>(alpha: T, a: MatRef<T>, b: MatRef<T>, beta: T, c: &mut [T]) {
    assert_eq!(a.cols, b.rows, "gemm inner dimension");
    assert!(a.fits() && b.fits(), "gemm operand out of bounds");
    let (m, k, n) = (a.rows, a.cols, b.cols);
    assert!(c.len() >= m * n, "gemm output too small");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c[..m * n].iter_mut().for_each(|v| *v = beta * *v);
        return;
    }
    // SAFETY: extents checked above against each buffer length.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            a.rs as isize,
            a.cs as isize,
            b.data.as_ptr(),
            b.rs as isize,
            b.cs as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        )
    }
}

/// Dimensions of one 2-D convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct ConvDims {
    pub n: usize,
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub o: usize,
    pub kh: usize,
    pub kw: usize,
    pub stride: usize,
    pub pad: usize,
    pub oh: usize,
    pub ow: usize,
}

impl ConvDims {
    fn ckk(&self) -> usize {
        self.c * self.kh * self.kw
    }

    fn ohw(&self) -> usize {
        self.oh * self.ow
    }
}

fn im2col<T: Real>(x: &[T], d: &ConvDims, cols: &mut [T]) {
    let ohw = d.ohw();
    for c in 0..d.c {
        let plane = &x[c * d.h * d.w..(c + 1) * d.h * d.w];
        for ky in 0..d.kh {
            for kx in 0..d.kw {
                let row = (c * d.kh + ky) * d.kw + kx;
                let dst = &mut cols[row * ohw..(row + 1) * ohw];
                for oy in 0..d.oh {
                    let iy = (oy * d.stride + ky) as isize - d.pad as isize;
                    let out_row = &mut dst[oy * d.ow..(oy + 1) * d.ow];
                    if iy < 0 || iy >= d.h as isize {
                        out_row.iter_mut().for_each(|v| *v = T::zero());
                        continue;
                    }
                    let src = &plane[iy as usize * d.w..(iy as usize + 1) * d.w];
                    for (ox, v) in out_row.iter_mut().enumerate() {
                        let ix = (ox * d.stride + kx) as isize - d.pad as isize;
                        *v = if ix < 0 || ix >= d.w as isize { T::zero() } else { src[ix as usize] };
                    }
                }
            }
        }
    }
}

fn col2im_add<T: Real>(cols: &[T], d: &ConvDims, x: &mut [T]) {
    let ohw = d.ohw();
    for c in 0..d.c {
        let plane = &mut x[c * d.h * d.w..(c + 1) * d.h * d.w];
        for ky in 0..d.kh {
            for kx in 0..d.kw {
                let row = (c * d.kh + ky) * d.kw + kx;
                let src = &cols[row * ohw..(row + 1) * ohw];
                for oy in 0..d.oh {
                    let iy = (oy * d.stride + ky) as isize - d.pad as isize;
                    if iy < 0 || iy >= d.h as isize {
                        continue;
                    }
                    let dst = &mut plane[iy as usize * d.w..(iy as usize + 1) * d.w];
                    for ox in 0..d.ow {
                        let ix = (ox * d.stride + kx) as isize - d.pad as isize;
                        if ix >= 0 && (ix as usize) < d.w {
                            dst[ix as usize] += src[oy * d.ow + ox];
                        }
                    }
                }
            }
        }
    }
}

/// `y[n] = W · im2col(x[n])`, no bias.
pub(crate) fn conv2d_forward<T: Real>(x: &[T], w: &[T], d: &ConvDims) -> Vec<T> {
    let (ckk, ohw) = (d.ckk(), d.ohw());
    let mut out = vec![T::zero(); d.n * d.o * ohw];
    let in_len = d.c * d.h * d.w;
    par::for_each_chunk_mut(&mut out, d.o * ohw, |n, y| {
        let mut cols = vec![T::zero(); ckk * ohw];
        im2col(&x[n * in_len..(n + 1) * in_len], d, &mut cols);
        gemm(
            T::one(),
            MatRef::row_major(w, d.o, ckk),
            MatRef::row_major(&cols, ckk, ohw),
            T::zero(),
            y,
        );
    });
    out
}

/// Gradient of the convolution with respect to its input: `col2im(Wᵀ · g[n])`.
pub(crate) fn conv2d_input_grad<T: Real>(g: &[T], w: &[T], d: &ConvDims) -> Vec<T> {
    let (ckk, ohw) = (d.ckk(), d.ohw());
    let in_len = d.c * d.h * d.w;
    let mut dx = vec![T::zero(); d.n * in_len];
    par::for_each_chunk_mut(&mut dx, in_len, |n, xn| {
        let mut cols = vec![T::zero(); ckk * ohw];
        gemm(
            T::one(),
            MatRef::row_major(w, d.o, ckk).transposed(),
            MatRef::row_major(&g[n * d.o * ohw..(n + 1) * d.o * ohw], d.o, ohw),
            T::zero(),
            &mut cols,
        );
        col2im_add(&cols, d, xn);
    });
    dx
}

/// Gradient of the convolution with respect to its kernel:
/// `Σₙ g[n] · im2col(x[n])ᵀ`, summed in batch order.
pub(crate) fn conv2d_weight_grad<T: Real>(x: &[T], g: &[T], d: &ConvDims) -> Vec<T> {
    let (ckk, ohw) = (d.ckk(), d.ohw());
    let in_len = d.c * d.h * d.w;
    let partials = par::map_range(d.n, |n| {
        let mut cols = vec![T::zero(); ckk * ohw];
        im2col(&x[n * in_len..(n + 1) * in_len], d, &mut cols);
        let mut dw = vec![T::zero(); d.o * ckk];
        gemm(
            T::one(),
            MatRef::row_major(&g[n * d.o * ohw..(n + 1) * d.o * ohw], d.o, ohw),
            MatRef::row_major(&cols, ckk, ohw).transposed(),
            T::zero(),
            &mut dw,
        );
        dw
    });
    let mut dw = vec![T::zero(); d.o * ckk];
    for p in partials {
        dw.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    dw
}

/// Nearest-neighbour 2× upsampling of `[planes, h, w]`.
pub(crate) fn upsample2x<T: Real>(x: &[T], planes: usize, h: usize, w: usize) -> Vec<T> {
    let mut out = vec![T::zero(); planes * 4 * h * w];
    par::for_each_chunk_mut(&mut out, 4 * h * w, |p, dst| {
        let src = &x[p * h * w..(p + 1) * h * w];
        for oy in 0..2 * h {
            let row = &src[(oy / 2) * w..(oy / 2 + 1) * w];
            for (ox, v) in dst[oy * 2 * w..(oy + 1) * 2 * w].iter_mut().enumerate() {
                *v = row[ox / 2];
            }
        }
    });
    out
}

/// 2×2 sum pooling of `[planes, h, w]` (h, w even), the adjoint of [`upsample2x`].
pub(crate) fn sum_pool2x2<T: Real>(x: &[T], planes: usize, h: usize, w: usize) -> Vec<T> {
    let (oh, ow) = (h / 2, w / 2);
    let mut out = vec![T::zero(); planes * oh * ow];
    par::for_each_chunk_mut(&mut out, oh * ow, |p, dst| {
        let src = &x[p * h * w..(p + 1) * h * w];
        for oy in 0..oh {
            for ox in 0..ow {
                let i = 2 * oy * w + 2 * ox;
                dst[oy * ow + ox] = src[i] + src[i + 1] + src[i + w] + src[i + w + 1];
            }
        }
    });
    out
}

/// Flat input index of each 2×2 window maximum (first one on ties).
pub(crate) fn maxpool2x2_indices<T: Real>(x: &[T], planes: usize, h: usize, w: usize) -> Vec<usize> {
    let (oh, ow) = (h / 2, w / 2);
    let mut idx = vec![0usize; planes * oh * ow];
    par::for_each_chunk_mut(&mut idx, oh * ow, |p, dst| {
        let base = p * h * w;
        for oy in 0..oh {
            for ox in 0..ow {
                let i0 = base + 2 * oy * w + 2 * ox;
                let mut best = i0;
                for cand in [i0 + 1, i0 + w, i0 + w + 1] {
                    if x[cand] > x[best] {
                        best = cand;
                    }
                }
                dst[oy * ow + ox] = best;
            }
        }
    });
    idx
}
