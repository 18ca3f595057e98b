//! Projections onto the constraint sets: the support subspace, the
//! Wexler-Raz affine set, their intersection, and the Parseval set.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GabError, Result};
use crate::gabor::{self, GaborParams, PinvFactor, WrSystem};
use crate::signal;

/// Post-projection residual above `FEASIBILITY_TOL * ||rhs||` declares the
/// constraint set numerically empty.
pub const FEASIBILITY_TOL: f64 = 1e-8;

/// A closed signed index interval I_h within {-floor(L/2), ..., ceil(L/2)-1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SupportSpec {
    lo: i64,
    hi: i64,
}

impl SupportSpec {
    pub fn new(lo: i64, hi: i64, l: usize) -> Result<Self> {
        if lo > hi {
            return Err(GabError::InvalidSupport(format!(
                "empty interval [{lo}, {hi}]"
            )));
        }
        if lo < signal::index_lo(l) || hi > signal::index_hi(l) {
            return Err(GabError::InvalidSupport(format!(
                "interval [{lo}, {hi}] exceeds the signed range of L = {l}"
            )));
        }
        Ok(SupportSpec { lo, hi })
    }

    /// Centered interval of length `len_h`.
    pub fn centered(len_h: usize, l: usize) -> Result<Self> {
        if len_h == 0 || len_h > l {
            return Err(GabError::InvalidSupport(format!(
                "support length {len_h} must lie in 1..=L ({l})"
            )));
        }
        SupportSpec::new(signal::index_lo(len_h), signal::index_hi(len_h), l)
    }

    /// The full signed range; the support constraint becomes vacuous.
    pub fn full(l: usize) -> Self {
        SupportSpec {
            lo: signal::index_lo(l),
            hi: signal::index_hi(l),
        }
    }

    pub fn bounds(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, l: i64) -> bool {
        l >= self.lo && l <= self.hi
    }

    pub fn is_full(&self, l: usize) -> bool {
        self.len() == l
    }

    /// Storage positions of the interval in a length-`l` circular buffer.
    pub fn positions(&self, l: usize) -> Vec<usize> {
        (self.lo..=self.hi).map(|i| signal::position(i, l)).collect()
    }
}

/// Zeros all entries outside the interval; the orthogonal projection onto
/// the support subspace.
pub fn project_support(y: &DVector<f64>, s: &SupportSpec) -> DVector<f64> {
    let l = y.len();
    DVector::from_fn(l, |i, _| {
        if s.contains(signal::signed_index(i, l)) {
            y[i]
        } else {
            0.0
        }
    })
}

/// Energy of `y` outside the interval, relative to ||y||.
pub fn support_residual(y: &DVector<f64>, s: &SupportSpec) -> f64 {
    let n = y.norm();
    if n == 0.0 {
        return 0.0;
    }
    (y - project_support(y, s)).norm() / n
}

/// Orthogonal projection onto the affine set {x : G x = rhs} of the
/// realified Wexler-Raz system: x = y - G^+ (G y - rhs).
pub fn project_dual(y: &DVector<f64>, wr: &WrSystem) -> Result<DVector<f64>> {
    let a = wr.real_matrix();
    let r = a * y - wr.real_rhs();
    let x = y - wr.pinv().apply(&r);
    let post = (a * &x - wr.real_rhs()).norm();
    if post > FEASIBILITY_TOL * wr.real_rhs().norm() {
        return Err(GabError::InfeasibleSupport {
            residual: post,
            tol: FEASIBILITY_TOL * wr.real_rhs().norm(),
        });
    }
    Ok(x)
}

/// Cached projector onto C_dual intersected with a support subspace.
///
/// The intersection projection is exact: restricting the Wexler-Raz columns
/// to the interval gives a reduced affine set whose projection embeds back
/// with zeros outside, because the support set is a coordinate subspace
/// containing the reduced set.
pub struct DualSupportProjector {
    wr: Arc<WrSystem>,
    support: SupportSpec,
    positions: Vec<usize>,
    reduced: DMatrix<f64>,
    reduced_pinv: PinvFactor,
}

impl DualSupportProjector {
    pub fn new(wr: Arc<WrSystem>, support: SupportSpec) -> Result<Self> {
        let l = wr.params().signal_len();
        let positions = support.positions(l);
        let full = wr.real_matrix();
        let mut reduced = DMatrix::zeros(full.nrows(), positions.len());
        for (j, &c) in positions.iter().enumerate() {
            reduced.set_column(j, &full.column(c));
        }
        let reduced_pinv = PinvFactor::new(&reduced);
        let projector = DualSupportProjector {
            wr,
            support,
            positions,
            reduced,
            reduced_pinv,
        };
        // feasibility probe: the least-norm point must satisfy the system
        projector.project(&DVector::zeros(l))?;
        Ok(projector)
    }

    pub fn support(&self) -> &SupportSpec {
        &self.support
    }

    pub fn wr(&self) -> &WrSystem {
        &self.wr
    }

    pub fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        let l = self.wr.params().signal_len();
        let rhs = self.wr.real_rhs();
        let yr = DVector::from_fn(self.positions.len(), |j, _| y[self.positions[j]]);
        let r = &self.reduced * &yr - rhs;
        let xr = &yr - self.reduced_pinv.apply(&r);
        let post = (&self.reduced * &xr - rhs).norm();
        if post > FEASIBILITY_TOL * rhs.norm() {
            return Err(GabError::InfeasibleSupport {
                residual: post,
                tol: FEASIBILITY_TOL * rhs.norm(),
            });
        }
        let mut x = DVector::zeros(l);
        for (j, &c) in self.positions.iter().enumerate() {
            x[c] = xr[j];
        }
        Ok(x)
    }

    /// Least-norm feasible point G_I^+ rhs, embedded.
    pub fn least_norm(&self) -> Result<DVector<f64>> {
        self.project(&DVector::zeros(self.wr.params().signal_len()))
    }

    /// Orthonormal basis of the reduced null space, embedded; spans the
    /// directions that keep iterates feasible.
    pub fn nullspace(&self) -> DMatrix<f64> {
        let ns = self.reduced_pinv.nullspace();
        let l = self.wr.params().signal_len();
        let mut out = DMatrix::zeros(l, ns.ncols());
        for j in 0..ns.ncols() {
            for (i, &c) in self.positions.iter().enumerate() {
                out[(c, j)] = ns[(i, j)];
            }
        }
        out
    }
}

/// One-shot exact projection onto C_dual intersected with the support set.
pub fn project_dual_supported(
    y: &DVector<f64>,
    wr: Arc<WrSystem>,
    s: &SupportSpec,
) -> Result<DVector<f64>> {
    DualSupportProjector::new(wr, *s)?.project(y)
}

/// Projection onto the set of Parseval windows: the canonical tight window
/// S_{y}^{-1/2} y of the input.
pub fn project_parseval(y: &DVector<f64>, p: &GaborParams) -> Result<DVector<f64>> {
    gabor::canonical_tight(y, p)
}

/// Uniform interface over the constraint projections used by the solvers.
pub trait Projection: Sync {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>>;
    /// Constraint violation of `x`, on the scale of the constraint data.
    fn residual(&self, x: &DVector<f64>) -> f64;
    fn label(&self) -> String;
}

pub struct SupportProjection(pub SupportSpec);

impl Projection for SupportProjection {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(project_support(y, &self.0))
    }

    fn residual(&self, x: &DVector<f64>) -> f64 {
        (x - project_support(x, &self.0)).norm()
    }

    fn label(&self) -> String {
        let (lo, hi) = self.0.bounds();
        format!("support[{lo},{hi}]")
    }
}

pub struct DualProjection(pub Arc<WrSystem>);

impl Projection for DualProjection {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        project_dual(y, &self.0)
    }

    fn residual(&self, x: &DVector<f64>) -> f64 {
        self.0.residual_inf(x)
    }

    fn label(&self) -> String {
        "wexler-raz".into()
    }
}

impl Projection for DualSupportProjector {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        DualSupportProjector::project(self, y)
    }

    fn residual(&self, x: &DVector<f64>) -> f64 {
        let sup = support_residual(x, &self.support) * x.norm();
        self.wr.residual_inf(x).max(sup)
    }

    fn label(&self) -> String {
        let (lo, hi) = self.support.bounds();
        format!("wexler-raz & support[{lo},{hi}]")
    }
}

pub struct ParsevalProjection(pub GaborParams);

impl Projection for ParsevalProjection {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        project_parseval(y, &self.0)
    }

    fn residual(&self, x: &DVector<f64>) -> f64 {
        let b = gabor::frame_bounds(x, &self.0);
        (b.lower - 1.0).abs().max((b.upper - 1.0).abs())
    }

    fn label(&self) -> String {
        "parseval".into()
    }
}

/// Projection onto the line spanned by a model window.
pub struct SpanProjection {
    unit: DVector<f64>,
}

impl SpanProjection {
    pub fn new(model: &DVector<f64>) -> Result<Self> {
        let n = model.norm();
        if n == 0.0 {
            return Err(GabError::InvalidParameter(
                "span model window must be nonzero".into(),
            ));
        }
        Ok(SpanProjection { unit: model / n })
    }
}

impl Projection for SpanProjection {
    fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.unit * self.unit.dot(y))
    }

    fn residual(&self, x: &DVector<f64>) -> f64 {
        (x - &self.unit * self.unit.dot(x)).norm()
    }

    fn label(&self) -> String {
        "span".into()
    }
}


#[cfg(test)]
mod diag {
    use super::*;
    use crate::gabor::wr_system;
    use crate::signal::{make_window, WindowKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diag_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (lw, a, m, l, lh) in [(40usize, 10usize, 20usize, 120usize, 40usize), (120, 30, 60, 360, 120)] {
            let w = make_window(WindowKind::Nuttall, lw).unwrap();
            let p = GaborParams::new(a, m, l).unwrap();
            let g = w.periodize(l);
            let wr = std::sync::Arc::new(wr_system(&g, &p));
            let s = SupportSpec::centered(lh, l).unwrap();
            let projector = DualSupportProjector::new(wr.clone(), s).unwrap();
            let mut worst = 0.0f64;
            for _ in 0..5 {
                let y = DVector::from_fn(l, |_, _| rng.gen_range(-1.0..1.0));
                let x = projector.project(&y).unwrap();
                worst = worst.max(wr.residual_inf(&x));
            }
            println!("geometry ({lw},{a},{m},{l},{lh}): worst residual_inf = {worst:.3e}, reduced rank = {}", projector.reduced_pinv.rank());
        }
    }
}
