//! Gabor analysis/synthesis, frame operator and bounds, canonical dual and
//! tight windows, and the Wexler-Raz system on the adjoint lattice.
//!
//! Analysis windows in this crate are real and the Wexler-Raz equations are
//! reduced to an equivalent real system by stacking real and imaginary parts
//! of each row, so solutions stay real throughout.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{GabError, Result};
use crate::signal::{self, CircularSignal, Window};

/// Lattice record: hop size `a`, number of channels `m`, signal length `l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaborParams {
    a: usize,
    m: usize,
    l: usize,
}

impl GaborParams {
    pub fn new(a: usize, m: usize, l: usize) -> Result<Self> {
        if a < 1 || m < 1 || l < 1 {
            return Err(GabError::InvalidLattice(format!(
                "a, M, L must be positive, got a={a}, M={m}, L={l}"
            )));
        }
        if l % a != 0 {
            return Err(GabError::Divisibility(format!("hop size a={a}"), l));
        }
        if l % m != 0 {
            return Err(GabError::Divisibility(format!("channel count M={m}"), l));
        }
        Ok(GaborParams { a, m, l })
    }

    pub fn hop(&self) -> usize {
        self.a
    }

    pub fn channels(&self) -> usize {
        self.m
    }

    pub fn signal_len(&self) -> usize {
        self.l
    }

    /// Number of time shifts L/a.
    pub fn shifts(&self) -> usize {
        self.l / self.a
    }

    /// Oversampling factor M/a; a frame requires at least 1.
    pub fn redundancy(&self) -> f64 {
        self.m as f64 / self.a as f64
    }
}

/// Gabor coefficients: M rows (channel m) by L/a columns (time index n).
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    data: DMatrix<Complex64>,
}

impl Coefficients {
    pub fn zeros(p: &GaborParams) -> Self {
        Coefficients {
            data: DMatrix::zeros(p.channels(), p.shifts()),
        }
    }

    pub fn from_matrix(data: DMatrix<Complex64>) -> Self {
        Coefficients { data }
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn shifts(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check(&self, p: &GaborParams) -> Result<()> {
        if self.channels() != p.channels() || self.shifts() != p.shifts() {
            return Err(GabError::DimensionMismatch {
                expected_rows: p.channels(),
                expected_cols: p.shifts(),
                rows: self.channels(),
                cols: self.shifts(),
            });
        }
        Ok(())
    }
}

/// Gabor analysis: c[m, n] = sum_l f[l] conj(g[l - n a]) e^{-2 pi i m l / M},
/// indices modulo L.
pub fn analyze(g: &CircularSignal, p: &GaborParams, f: &CircularSignal) -> Result<Coefficients> {
    for (name, len) in [("window", g.len()), ("signal", f.len())] {
        if len != p.signal_len() {
            let _ = name;
            return Err(GabError::LengthMismatch {
                expected: p.signal_len(),
                got: len,
            });
        }
    }
    let l = p.signal_len();
    let m = p.channels();
    let plan = signal::fft_plan(m);
    let mut data = DMatrix::zeros(m, p.shifts());
    let mut folded = vec![Complex64::default(); m];
    for n in 0..p.shifts() {
        folded.iter_mut().for_each(|v| *v = Complex64::default());
        let shift = n * p.hop();
        for li in 0..l {
            let gv = g.values()[(li + l - shift % l) % l].conj();
            folded[li % m] += f.values()[li] * gv;
        }
        plan.process(&mut folded);
        data.column_mut(n)
            .iter_mut()
            .zip(&folded)
            .for_each(|(d, &v)| *d = v);
    }
    Ok(Coefficients { data })
}

/// Gabor synthesis, the adjoint of [`analyze`]:
/// f[l] = sum_{m,n} c[m, n] h[l - n a] e^{2 pi i m l / M}.
pub fn synthesize(h: &CircularSignal, p: &GaborParams, c: &Coefficients) -> Result<CircularSignal> {
    if h.len() != p.signal_len() {
        return Err(GabError::LengthMismatch {
            expected: p.signal_len(),
            got: h.len(),
        });
    }
    c.check(p)?;
    let l = p.signal_len();
    let m = p.channels();
    let plan = signal::ifft_plan(m);
    let mut out = vec![Complex64::default(); l];
    let mut col = vec![Complex64::default(); m];
    for n in 0..p.shifts() {
        col.iter_mut()
            .zip(c.data.column(n).iter())
            .for_each(|(b, &v)| *b = v);
        // unnormalized inverse FFT: s[j] = sum_m c[m] e^{2 pi i m j / M}
        plan.process(&mut col);
        let shift = n * p.hop();
        for li in 0..l {
            let hv = h.values()[(li + l - shift % l) % l];
            out[li] += col[li % m] * hv;
        }
    }
    Ok(CircularSignal::new(out))
}

/// Dense frame operator S = G* G for a real window, assembled from the
/// Walnut-type entries S[l, l'] = M sum_n g[l - n a] g[l' - n a] supported on
/// l = l' (mod M).
pub fn frame_operator(g: &DVector<f64>, p: &GaborParams) -> DMatrix<f64> {
    let l = p.signal_len();
    let m = p.channels();
    assert_eq!(g.len(), l, "window length must equal L");
    let mut s = DMatrix::zeros(l, l);
    for li in 0..l {
        for k in 0..l / m {
            let lj = (li + k * m) % l;
            if lj < li {
                continue;
            }
            let mut acc = 0.0;
            for n in 0..p.shifts() {
                let shift = n * p.hop();
                acc += g[(li + l - shift) % l] * g[(lj + l - shift) % l];
            }
            acc *= m as f64;
            s[(li, lj)] = acc;
            s[(lj, li)] = acc;
        }
    }
    s
}

/// Frame bounds 0 <= A <= B: extreme eigenvalues of the frame operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
}

/// Eigendecomposition of the frame operator, reused by the canonical dual,
/// the canonical tight window and the Parseval projection.
pub(crate) struct FrameFactor {
    eigvals: DVector<f64>,
    eigvecs: DMatrix<f64>,
}

impl FrameFactor {
    pub fn new(g: &DVector<f64>, p: &GaborParams) -> Self {
        let s = frame_operator(g, p);
        let eig = s.symmetric_eigen();
        FrameFactor {
            eigvals: eig.eigenvalues,
            eigvecs: eig.eigenvectors,
        }
    }

    pub fn bounds(&self) -> FrameBounds {
        let lower = self.eigvals.iter().cloned().fold(f64::INFINITY, f64::min);
        let upper = self.eigvals.iter().cloned().fold(0.0_f64, f64::max);
        FrameBounds {
            lower: lower.max(0.0),
            upper,
        }
    }

    fn check_invertible(&self) -> Result<()> {
        let b = self.bounds();
        let tol = self.eigvals.len() as f64 * f64::EPSILON * b.upper;
        if b.lower <= tol {
            return Err(GabError::SingularFrame {
                lower: b.lower,
                tol,
            });
        }
        Ok(())
    }

    /// S^{-1} x.
    pub fn solve(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_invertible()?;
        let proj = self.eigvecs.transpose() * x;
        let scaled = DVector::from_fn(proj.len(), |i, _| proj[i] / self.eigvals[i]);
        Ok(&self.eigvecs * scaled)
    }

    /// S^{-1/2} x.
    pub fn inv_sqrt_apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_invertible()?;
        let proj = self.eigvecs.transpose() * x;
        let scaled = DVector::from_fn(proj.len(), |i, _| proj[i] / self.eigvals[i].sqrt());
        Ok(&self.eigvecs * scaled)
    }
}

pub fn frame_bounds(g: &DVector<f64>, p: &GaborParams) -> FrameBounds {
    FrameFactor::new(g, p).bounds()
}

/// Canonical dual window S^{-1} g: the minimal-l2-norm solution of the
/// Wexler-Raz equations.
pub fn canonical_dual(g: &DVector<f64>, p: &GaborParams) -> Result<DVector<f64>> {
    FrameFactor::new(g, p).solve(g)
}

/// Canonical tight window S^{-1/2} g; generates a Parseval frame.
pub fn canonical_tight(g: &DVector<f64>, p: &GaborParams) -> Result<DVector<f64>> {
    FrameFactor::new(g, p).inv_sqrt_apply(g)
}

/// Coefficients of the singular value decomposition of a real matrix,
/// truncated at the relative cutoff, stored for repeated pseudoinverse
/// application.
#[derive(Debug, Clone)]
pub(crate) struct PinvFactor {
    u: DMatrix<f64>,
    sinv: DVector<f64>,
    v_t: DMatrix<f64>,
    rank: usize,
}

impl PinvFactor {
    /// SVD-based pseudoinverse. A singular triplet is kept when its squared
    /// singular value exceeds tau = max(rows, cols) * eps * sigma_max^2, the
    /// cutoff of the Gram-matrix pseudoinverse (G G*)^+.
    pub fn new(matrix: &DMatrix<f64>) -> Self {
        let (rows, cols) = matrix.shape();
        let svd = matrix.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        let cutoff = smax * ((rows.max(cols) as f64) * f64::EPSILON).sqrt();
        let mut sinv = DVector::zeros(svd.singular_values.len());
        let mut rank = 0;
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > cutoff {
                sinv[i] = 1.0 / s;
                rank += 1;
            }
        }
        PinvFactor {
            u: svd.u.expect("svd with u"),
            sinv,
            v_t: svd.v_t.expect("svd with v_t"),
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// A^+ r = V S^+ U^T r.
    pub fn apply(&self, r: &DVector<f64>) -> DVector<f64> {
        let mut proj = self.u.transpose() * r;
        proj.component_mul_assign(&self.sinv);
        self.v_t.transpose() * proj
    }

    /// Orthonormal basis of the kernel (right null space), one column per
    /// dropped singular direction. Used by tests probing the feasible set.
    #[allow(dead_code)]
    pub fn nullspace(&self) -> DMatrix<f64> {
        let n = self.v_t.ncols();
        let kept = self.rank;
        let total = self.v_t.nrows();
        let mut cols = Vec::new();
        for i in 0..total {
            if self.sinv[i] == 0.0 {
                cols.push(self.v_t.row(i).transpose());
            }
        }
        let _ = kept;
        let mut out = DMatrix::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            out.set_column(j, c);
        }
        out
    }
}

/// The Wexler-Raz system for a real window g on lattice (a, M, L): the dense
/// analysis matrix G_{g,M,a} on the adjoint lattice (hop M, a channels), the
/// right-hand side (a/M) e_0, and a cached pseudoinverse of the realified
/// system.
pub struct WrSystem {
    params: GaborParams,
    matrix: DMatrix<Complex64>,
    rhs: DVector<f64>,
    real_matrix: DMatrix<f64>,
    real_rhs: DVector<f64>,
    pinv: PinvFactor,
}

impl WrSystem {
    pub fn params(&self) -> &GaborParams {
        &self.params
    }

    /// Number of Wexler-Raz equations a L / M.
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Right-hand side: rhs[0] = a/M, zero elsewhere.
    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub(crate) fn real_matrix(&self) -> &DMatrix<f64> {
        &self.real_matrix
    }

    pub(crate) fn real_rhs(&self) -> &DVector<f64> {
        &self.real_rhs
    }

    pub(crate) fn pinv(&self) -> &PinvFactor {
        &self.pinv
    }

    /// Infinity norm of G h - rhs over the complex equations.
    pub fn residual_inf(&self, h: &DVector<f64>) -> f64 {
        assert_eq!(h.len(), self.params.signal_len());
        let mut worst = 0.0_f64;
        for r in 0..self.matrix.nrows() {
            let mut acc = Complex64::default();
            for c in 0..self.matrix.ncols() {
                acc += self.matrix[(r, c)] * h[c];
            }
            acc -= Complex64::new(self.rhs[r], 0.0);
            worst = worst.max(acc.norm());
        }
        worst
    }
}

/// Assembles the Wexler-Raz system. Row m + n a holds the conjugate of the
/// modulated translate g[. - n M] e^{2 pi i m . / a}; the pseudoinverse uses
/// the SVD cutoff described in [`PinvFactor`].
pub fn wr_system(g: &DVector<f64>, p: &GaborParams) -> WrSystem {
    let l = p.signal_len();
    let a = p.hop();
    let m = p.channels();
    assert_eq!(g.len(), l, "window length must equal L");
    let rows = a * l / m;
    let mut matrix = DMatrix::zeros(rows, l);
    for n in 0..l / m {
        for mi in 0..a {
            let r = mi + n * a;
            for c in 0..l {
                let shift = (c + l - (n * m) % l) % l;
                let phase = -2.0 * PI * (mi as f64) * (c as f64) / (a as f64);
                matrix[(r, c)] = Complex64::from_polar(g[shift], phase);
            }
        }
    }
    let mut rhs = DVector::zeros(rows);
    rhs[0] = a as f64 / m as f64;
    let mut real_matrix = DMatrix::zeros(2 * rows, l);
    for r in 0..rows {
        for c in 0..l {
            real_matrix[(r, c)] = matrix[(r, c)].re;
            real_matrix[(rows + r, c)] = matrix[(r, c)].im;
        }
    }
    let mut real_rhs = DVector::zeros(2 * rows);
    real_rhs[0] = rhs[0];
    let pinv = PinvFactor::new(&real_matrix);
    WrSystem {
        params: *p,
        matrix,
        rhs,
        real_matrix,
        real_rhs,
        pinv,
    }
}

/// Periodizes a compactly supported pair to each length in `lengths` and
/// returns the Wexler-Raz residual per length. For dual pairs the residual
/// is length-independent once L exceeds the combined support length.
pub fn verify_duality(
    g: &Window,
    h: &Window,
    a: usize,
    m: usize,
    lengths: &[usize],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(lengths.len());
    for &l in lengths {
        let p = GaborParams::new(a, m, l)?;
        let g_fin = g.periodize(l);
        let h_fin = h.periodize(l);
        let wr = wr_system(&g_fin, &p);
        out.push(wr.residual_inf(&h_fin));
    }
    Ok(out)
}
