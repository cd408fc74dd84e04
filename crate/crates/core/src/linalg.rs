//! Small dense helpers on top of faer used across the crate.

use faer::{c64, Mat, MatRef};

/// Largest absolute entry of a real matrix.
pub fn max_abs(m: MatRef<'_, f64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].abs());
        }
    }
    out
}

/// Largest modulus of a complex matrix.
pub fn max_abs_c(m: MatRef<'_, c64>) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// Real and imaginary parts of a complex matrix.
pub fn split_complex(m: MatRef<'_, c64>) -> (Mat<f64>, Mat<f64>) {
    let re = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re);
    let im = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].im);
    (re, im)
}

pub fn join_complex(re: MatRef<'_, f64>, im: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(re.nrows(), re.ncols(), |i, j| c64::new(re[(i, j)], im[(i, j)]))
}

pub fn to_complex(m: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0))
}

/// `a * b` where `a` is mostly zeros. Cost is O(nnz(a) * ncols(b)).
pub fn sparse_mul(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = Mat::<f64>::zeros(a.nrows(), b.ncols());
    let nonzeros: Vec<(usize, usize, f64)> = (0..a.ncols())
        .flat_map(|k| (0..a.nrows()).map(move |i| (i, k)))
        .filter_map(|(i, k)| {
            let v = a[(i, k)];
            (v != 0.0).then_some((i, k, v))
        })
        .collect();
    for j in 0..b.ncols() {
        for &(i, k, v) in &nonzeros {
            let bkj = b[(k, j)];
            if bkj != 0.0 {
                out[(i, j)] += v * bkj;
            }
        }
    }
    out
}

fn is_zero(m: MatRef<'_, f64>) -> bool {
    max_abs(m) == 0.0
}

/// Transforms an operator given in the product basis into the eigenbasis
/// spanned by the real orthonormal columns of `v`: returns `vᵀ s v`.
pub fn to_eigenbasis(v: MatRef<'_, f64>, s: MatRef<'_, c64>) -> Mat<c64> {
    let (re, im) = split_complex(s);
    let n = v.ncols();
    let rotate = |part: &Mat<f64>| -> Mat<f64> {
        if is_zero(part.as_ref()) {
            Mat::zeros(n, n)
        } else {
            let sv = sparse_mul(part.as_ref(), v);
            v.transpose() * &sv
        }
    };
    join_complex(rotate(&re).as_ref(), rotate(&im).as_ref())
}

/// `vᵀ s v` for a real operator.
pub fn to_eigenbasis_real(v: MatRef<'_, f64>, s: MatRef<'_, f64>) -> Mat<f64> {
    let sv = sparse_mul(s, v);
    v.transpose() * &sv
}

macro_rules! impl_expm {
    ($name:ident, $t:ty, $abs:expr, $from_f64:expr) => {
        /// Matrix exponential by scaling and squaring of a degree-18 Taylor
        /// polynomial. The scaled matrix has 1-norm below one half, so the
        /// truncation error is below 1e-22 before squaring.
        pub fn $name(a: MatRef<'_, $t>) -> Mat<$t> {
            const DEGREE: usize = 18;
            let n = a.nrows();
            assert_eq!(n, a.ncols());
            let abs = $abs;
            let from = $from_f64;
            let norm1 = (0..n)
                .map(|j| (0..n).map(|i| abs(a[(i, j)])).sum::<f64>())
                .fold(0.0f64, f64::max);
            let squarings = if norm1 > 0.5 {
                (norm1 / 0.5).log2().ceil() as u32
            } else {
                0
            };
            let scale = from(0.5f64.powi(squarings as i32));
            let b = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
            let identity = Mat::<$t>::from_fn(n, n, |i, j| if i == j { from(1.0) } else { from(0.0) });
            // Horner: I + B/1 (I + B/2 (I + ... (I + B/DEGREE)))
            let mut acc = identity.clone();
            for k in (1..=DEGREE).rev() {
                let step = &b * &acc;
                let inv = from(1.0 / k as f64);
                acc = Mat::from_fn(n, n, |i, j| identity[(i, j)] + step[(i, j)] * inv);
            }
            for _ in 0..squarings {
                acc = &acc * &acc;
            }
            acc
        }
    };
}

impl_expm!(expm_real, f64, |x: f64| x.abs(), |x: f64| x);
impl_expm!(expm_complex, c64, |x: c64| x.norm(), |x: f64| c64::new(x, 0.0));
