//! Tensor contractions shared by overlap, expectation, and sweep code.
//!
//! Index conventions, used everywhere without exception:
//! - state tensor: (left bond, physical, right bond)
//! - operator tensor: (left op-bond, physical out, physical in, right op-bond)
//! - environment: (bra bond, op bond, ket bond), trivially 1x1x1 at the ends
//!
//! Each contraction is a chain of permute/reshape/matmul steps so the heavy
//! lifting stays in BLAS. `mat` materializes a view in row-major order; the
//! copies it makes are linear in tensor size and negligible next to the
//! matrix products.

use ndarray::{Array2, Array3, Array4, ArrayView, ArrayView2, Dimension};

pub(crate) fn mat<D: Dimension>(v: ArrayView<f64, D>, rows: usize, cols: usize) -> Array2<f64> {
    let data: Vec<f64> = v.iter().copied().collect();
    Array2::from_shape_vec((rows, cols), data).expect("element count preserved")
}

/// Overlap transfer step: E'[x',y'] = Σ_{x,σ,y} A[x,σ,x'] E[x,y] B[y,σ,y'].
pub(crate) fn overlap_step(a: &Array3<f64>, e: ArrayView2<f64>, b: &Array3<f64>) -> Array2<f64> {
    let (x, _, xr) = a.dim();
    let (y, _, yr) = b.dim();
    let t = e.dot(&mat(b.view(), y, 2 * yr)); // (x, sigma*y')
    let t = mat(t.view(), x * 2, yr);
    let a2 = mat(a.view(), x * 2, xr);
    a2.t().dot(&t)
}

/// Grows a left environment by one site:
/// L'[a',w',b'] = Σ L[a,w,b] bra[a,σ,a'] W[w,σ,τ,w'] ket[b,τ,b'].
pub(crate) fn env_left_update(
    l: &Array3<f64>,
    bra: &Array3<f64>,
    w: &Array4<f64>,
    ket: &Array3<f64>,
) -> Array3<f64> {
    let (la, lw, lb) = l.dim();
    let (_, _, ar) = bra.dim();
    let (_, _, _, wr) = w.dim();
    let (_, _, br) = ket.dim();
    // t1[a,w,tau,b'] = sum_b L[a,w,b] ket[b,tau,b']
    let t1 = mat(l.view(), la * lw, lb).dot(&mat(ket.view(), lb, 2 * br));
    let t1 = t1
        .into_shape_with_order((la, lw, 2, br))
        .expect("element count preserved");
    // t2[a,b',sigma,w'] = sum_{w,tau} t1[a,b',w,tau] W[w,tau,sigma,w']
    let t1 = mat(t1.view().permuted_axes([0, 3, 1, 2]), la * br, lw * 2);
    let w2 = mat(w.view().permuted_axes([0, 2, 1, 3]), lw * 2, 2 * wr);
    let t2 = t1.dot(&w2);
    let t2 = t2
        .into_shape_with_order((la, br, 2, wr))
        .expect("element count preserved");
    // out[b',w',a'] = sum_{a,sigma} t2[b',w',a,sigma] bra[a,sigma,a']
    let t2 = mat(t2.view().permuted_axes([1, 3, 0, 2]), br * wr, la * 2);
    let out = t2.dot(&mat(bra.view(), la * 2, ar));
    let out = out
        .into_shape_with_order((br, wr, ar))
        .expect("element count preserved");
    let transposed: Vec<f64> = out.view().permuted_axes([2, 1, 0]).iter().copied().collect();
    Array3::from_shape_vec((ar, wr, br), transposed).expect("element count preserved")
}

/// Grows a right environment by one site:
/// R'[a,w,b] = Σ bra[a,σ,a'] W[w,σ,τ,w'] ket[b,τ,b'] R[a',w',b'].
pub(crate) fn env_right_update(
    r: &Array3<f64>,
    bra: &Array3<f64>,
    w: &Array4<f64>,
    ket: &Array3<f64>,
) -> Array3<f64> {
    let (ra, rw, rb) = r.dim();
    let (al, _, _) = bra.dim();
    let (wl, _, _, _) = w.dim();
    let (bl, _, _) = ket.dim();
    // y1[b,tau,a',w'] = sum_{b'} ket[b,tau,b'] R[b',a',w']
    let r2 = mat(r.view().permuted_axes([2, 0, 1]), rb, ra * rw);
    let y1 = mat(ket.view(), bl * 2, rb).dot(&r2);
    let y1 = y1
        .into_shape_with_order((bl, 2, ra, rw))
        .expect("element count preserved");
    // y2[w,sigma,b,a'] = sum_{tau,w'} W[w,sigma,tau,w'] y1[tau,w',b,a']
    let y1 = mat(y1.view().permuted_axes([1, 3, 0, 2]), 2 * rw, bl * ra);
    let y2 = mat(w.view(), wl * 2, 2 * rw).dot(&y1);
    let y2 = y2
        .into_shape_with_order((wl, 2, bl, ra))
        .expect("element count preserved");
    // out[a,w,b] = sum_{sigma,a'} bra[a,sigma,a'] y2[sigma,a',w,b]
    let y2 = mat(y2.view().permuted_axes([1, 3, 0, 2]), 2 * ra, wl * bl);
    let out = mat(bra.view(), al, 2 * ra).dot(&y2);
    out.into_shape_with_order((al, wl, bl))
        .expect("element count preserved")
}

/// Applies the effective two-site operator:
/// out[a,σ,τ,b] = Σ L[a,w0,a'] W1[w0,σ,σ',w1] W2[w1,τ,τ',w2] R[b,w2,b'] v[a',σ',τ',b'].
pub(crate) fn apply_two_site(
    l: &Array3<f64>,
    w1: &Array4<f64>,
    w2: &Array4<f64>,
    r: &Array3<f64>,
    v: &Array4<f64>,
) -> Array4<f64> {
    let (la, lw, lk) = l.dim();
    let (_, _, _, wm) = w1.dim();
    let (_, _, _, wr) = w2.dim();
    let (_, _, _, vb) = v.dim();
    let (rb, _, _) = r.dim();
    // x1[a,w0,sigma',tau',b'] = sum_{a'} L[a,w0,a'] v[a',sigma',tau',b']
    let x1 = mat(l.view(), la * lw, lk).dot(&mat(v.view(), lk, 4 * vb));
    let x1 = x1
        .into_shape_with_order((la, lw, 2, 2, vb))
        .expect("element count preserved");
    // x2[a,tau',b',sigma,w1] = sum_{w0,sigma'} x1[a,tau',b',w0,sigma'] W1[w0,sigma',sigma,w1]
    let x1 = mat(x1.view().permuted_axes([0, 3, 4, 1, 2]), la * 2 * vb, lw * 2);
    let w1p = mat(w1.view().permuted_axes([0, 2, 1, 3]), lw * 2, 2 * wm);
    let x2 = x1.dot(&w1p);
    let x2 = x2
        .into_shape_with_order((la, 2, vb, 2, wm))
        .expect("element count preserved");
    // x3[a,b',sigma,tau,w2] = sum_{w1,tau'} x2[a,b',sigma,w1,tau'] W2[w1,tau',tau,w2]
    let x2 = mat(x2.view().permuted_axes([0, 2, 3, 4, 1]), la * vb * 2, wm * 2);
    let w2p = mat(w2.view().permuted_axes([0, 2, 1, 3]), wm * 2, 2 * wr);
    let x3 = x2.dot(&w2p);
    let x3 = x3
        .into_shape_with_order((la, vb, 2, 2, wr))
        .expect("element count preserved");
    // out[a,sigma,tau,b] = sum_{w2,b'} x3[a,sigma,tau,w2,b'] R[w2,b',b]
    let x3 = mat(x3.view().permuted_axes([0, 2, 3, 4, 1]), la * 4, wr * vb);
    let r2 = mat(r.view().permuted_axes([1, 2, 0]), wr * vb, rb);
    let out = x3.dot(&r2);
    out.into_shape_with_order((la, 2, 2, rb))
        .expect("element count preserved")
}

/// Scalar environment for the boundary.
pub(crate) fn unit_env() -> Array3<f64> {
    Array3::from_elem((1, 1, 1), 1.0)
}
