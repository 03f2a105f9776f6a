//! Small dense linear-algebra toolkit over `Complex64`.
//!
//! Everything in the crate works with [`CMat`] (a dynamically sized complex
//! matrix). Tensor products follow the row-major convention: in `A ⊗ B` the
//! index of `A` is the more significant one.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Complex scalar.
pub type C64 = Complex64;
/// Dense complex matrix.
pub type CMat = DMatrix<C64>;

/// Shorthand for a real number as a complex scalar.
#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(r: usize, c_: usize) -> CMat {
    CMat::zeros(r, c_)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Kronecker product, first factor most significant.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a list; the empty product is the 1×1 identity.
pub fn kron_all<'a, I: IntoIterator<Item = &'a CMat>>(ms: I) -> CMat {
    ms.into_iter().fold(eye(1), |acc, m| kron(&acc, m))
}

/// Largest singular value. Empty matrices have norm zero.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    svd(m).1.iter().copied().fold(0.0, f64::max)
}

/// Thin SVD `m = U diag(s) V_t`, singular values descending.
///
/// Computed with faer: nalgebra 0.35 returns wrong factors for some
/// rank-deficient complex inputs.
pub fn svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, cc) = (m.nrows(), m.ncols());
    let k = r.min(cc);
    if k == 0 {
        return (zeros(r, 0), vec![], zeros(0, cc));
    }
    let f = faer::Mat::<C64>::from_fn(r, cc, |i, j| m[(i, j)]);
    let d = f.thin_svd().expect("svd converges");
    let (u, sv, v) = (d.U(), d.S().column_vector(), d.V());
    let s = (0..k).map(|i| sv[i].re).collect();
    (CMat::from_fn(r, k, |i, j| u[(i, j)]), s, CMat::from_fn(k, cc, |i, j| v[(j, i)].conj()))
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Returns `(values, vectors)` with eigenvectors as columns.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = zeros(n, n);
    for (col, &k) in idx.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(k));
    }
    (vals, vecs)
}

/// Smallest eigenvalue of the Hermitian part (`+inf` for empty input).
pub fn min_eig(m: &CMat) -> f64 {
    eigh(m).0.first().copied().unwrap_or(f64::INFINITY)
}

/// Apply a real function to the spectrum of a Hermitian matrix.
pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut d = zeros(n, n);
    for (k, v) in vals.iter().enumerate() {
        d[(k, k)] = c(f(*v));
    }
    &vecs * d * vecs.adjoint()
}

/// Square root of a positive semidefinite matrix (negative noise clipped).
pub fn psd_sqrt(m: &CMat) -> CMat {
    herm_fn(m, |x| x.max(0.0).sqrt())
}

/// `m^{-1/2}` on the range of `m`; eigenvalues at most `cutoff` are sent to zero.
pub fn pinv_sqrt(m: &CMat, cutoff: f64) -> CMat {
    herm_fn(m, |x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 })
}

/// Moore–Penrose pseudo-inverse with relative singular-value cutoff.
pub fn pinv(m: &CMat, rel_cutoff: f64) -> CMat {
    let (r, cc) = (m.nrows(), m.ncols());
    if r == 0 || cc == 0 {
        return zeros(cc, r);
    }
    let (u, sv, vt) = svd(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let k = sv.len();
    let mut sinv = zeros(k, k);
    for i in 0..k {
        let s = sv[i];
        if s > rel_cutoff * smax && s > 0.0 {
            sinv[(i, i)] = c(1.0 / s);
        }
    }
    vt.adjoint() * sinv * u.adjoint()
}

/// Thin SVD `m = U diag(s) V†` truncated to the numerical rank.
///
/// Returns `(U_r, s_r, V_r)`; singular values at most `rel_cutoff * s_max` are dropped.
pub fn svd_truncated(m: &CMat, rel_cutoff: f64) -> (CMat, Vec<f64>, CMat) {
    let (u, sv, vt) = svd(m);
    let v = vt.adjoint();
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap());
    let smax = idx.first().map(|&k| sv[k]).unwrap_or(0.0);
    let keep: Vec<usize> =
        idx.into_iter().filter(|&k| sv[k] > rel_cutoff * smax && sv[k] > 0.0).collect();
    let mut ur = zeros(m.nrows(), keep.len());
    let mut vr = zeros(m.ncols(), keep.len());
    let mut s = Vec::with_capacity(keep.len());
    for (col, &k) in keep.iter().enumerate() {
        ur.set_column(col, &u.column(k));
        vr.set_column(col, &v.column(k));
        s.push(sv[k]);
    }
    (ur, s, vr)
}

/// Residual `‖m†m − I‖`.
pub fn isometry_residual(m: &CMat) -> f64 {
    op_norm(&(m.adjoint() * m - eye(m.ncols())))
}

/// Residual `‖mm† − I‖`.
pub fn coisometry_residual(m: &CMat) -> f64 {
    op_norm(&(m * m.adjoint() - eye(m.nrows())))
}

/// Multi-index helper: row-major strides for the given dimensions.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// The permutation matrix sending `⊗_k V_k` to `⊗_k V_{perm[k]}`.
///
/// Output factor `k` is input factor `perm[k]`.
pub fn permutation_matrix(dims: &[usize], perm: &[usize]) -> CMat {
    assert_eq!(dims.len(), perm.len());
    let n: usize = dims.iter().product();
    let in_st = strides(dims);
    let out_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let out_st = strides(&out_dims);
    let mut p = zeros(n, n);
    for idx in 0..n {
        let mut out = 0;
        for (k, &src) in perm.iter().enumerate() {
            let digit = (idx / in_st[src]) % dims[src];
            out += digit * out_st[k];
        }
        p[(out, idx)] = c(1.0);
    }
    p
}

/// Conjugate an operator on `⊗ V_k` into the reordered space `⊗ V_{perm[k]}`.
pub fn permute_operator(op: &CMat, dims: &[usize], perm: &[usize]) -> CMat {
    let p = permutation_matrix(dims, perm);
    &p * op * p.adjoint()
}

/// Partial trace of an operator on `⊗ V_k` over the factors in `traced`.
pub fn partial_trace(op: &CMat, dims: &[usize], traced: &[usize]) -> CMat {
    let keep: Vec<usize> = (0..dims.len()).filter(|k| !traced.contains(k)).collect();
    let mut perm = keep.clone();
    perm.extend_from_slice(traced);
    let moved = permute_operator(op, dims, &perm);
    let dk: usize = keep.iter().map(|&k| dims[k]).product();
    let dt: usize = traced.iter().map(|&k| dims[k]).product();
    let mut out = zeros(dk, dk);
    for a in 0..dk {
        for b in 0..dk {
            let mut s = C64::new(0.0, 0.0);
            for t in 0..dt {
                s += moved[(a * dt + t, b * dt + t)];
            }
            out[(a, b)] = s;
        }
    }
    out
}

/// Apply a map given by its Choi matrix to the first tensor factor of `z`.
///
/// The Choi matrix is `Σ_ab |a⟩⟨b| ⊗ Φ(|a⟩⟨b|)` (input factor first) with
/// input dimension `din` and output `dout`. `z` acts on `C^din ⊗ C^rest`
/// and the result on `C^dout ⊗ C^rest`.
pub fn apply_choi_first(choi: &CMat, din: usize, dout: usize, z: &CMat) -> CMat {
    let rest = if din == 0 { 0 } else { z.nrows() / din };
    let mut out = zeros(dout * rest, dout * rest);
    for a in 0..din {
        for b in 0..din {
            let zab = z.view((a * rest, b * rest), (rest, rest));
            if zab.iter().all(|x| x.norm_sqr() == 0.0) {
                continue;
            }
            let phi = choi.view((a * dout, b * dout), (dout, dout));
            out += kron(&phi.into_owned(), &zab.into_owned());
        }
    }
    out
}

/// Matrix unit `|a⟩⟨b|` of size `n`.
pub fn unit(n: usize, a: usize, b: usize) -> CMat {
    let mut m = zeros(n, n);
    m[(a, b)] = c(1.0);
    m
}

/// Row-major vectorization as a column.
pub fn vec_row(m: &CMat) -> CMat {
    let (r, cc) = (m.nrows(), m.ncols());
    CMat::from_fn(r * cc, 1, |k, _| m[(k / cc, k % cc)])
}

/// Inverse of [`vec_row`].
pub fn unvec_row(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |r, cc| v[r * cols + cc])
}

/// Rescale a vector so that its largest-magnitude entry is real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0;
    let mut bestn = -1.0;
    for (k, x) in v.iter().enumerate() {
        // tie-break towards the earliest index, robust to 1e-14 noise
        if x.norm() > bestn * (1.0 + 1e-9) {
            bestn = x.norm();
            best = k;
        }
    }
    if bestn <= 0.0 {
        return;
    }
    let ph = v[best] / v[best].norm();
    for x in v.iter_mut() {
        *x /= ph;
    }
}

/// A matrix with i.i.d. standard complex Gaussian entries.
pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, r: usize, cc: usize) -> CMat {
    CMat::from_fn(r, cc, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// A Haar-random unitary (QR of a Gaussian matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return zeros(0, 0);
    }
    let g = random_gaussian(rng, n, n);
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut ph = zeros(n, n);
    for k in 0..n {
        let d = r[(k, k)];
        ph[(k, k)] = if d.norm() > 0.0 { d / d.norm() } else { c(1.0) };
    }
    q * ph
}

/// A random isometry `C^cols → C^rows` (`rows >= cols`).
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let u = random_unitary(rng, rows);
    u.columns(0, cols).into_owned()
}

/// A random density matrix of the given rank.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> CMat {
    let g = random_gaussian(rng, n, rank);
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

/// Maximum of a list of residuals (0 for an empty list).
pub fn max_of<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}
