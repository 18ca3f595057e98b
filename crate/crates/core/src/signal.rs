//! Window prototypes, periodization and the unitary DFT.
//!
//! Finitely supported windows live on the signed index range
//! {-floor(Lw/2), ..., ceil(Lw/2)-1} with the peak at index 0; length-L
//! circular signals are indexed modulo L with the same signed convention
//! (index i maps to i for i < ceil(L/2) and to i - L otherwise).

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{GabError, Result};

/// First signed index of a length-`len` range.
pub fn index_lo(len: usize) -> i64 {
    -((len / 2) as i64)
}

/// Last signed index (inclusive) of a length-`len` range.
pub fn index_hi(len: usize) -> i64 {
    (len as i64 + 1) / 2 - 1
}

/// Signed index of storage position `i` in a length-`len` circular buffer.
pub fn signed_index(i: usize, len: usize) -> i64 {
    debug_assert!(i < len);
    if (i as i64) <= index_hi(len) {
        i as i64
    } else {
        i as i64 - len as i64
    }
}

/// Storage position of signed index `l` in a length-`len` circular buffer.
pub fn position(l: i64, len: usize) -> usize {
    l.rem_euclid(len as i64) as usize
}

/// Supported window prototypes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowKind {
    Itersine,
    /// Tukey window with transition area ratio `r` in [0, 1].
    Tukey { r: f64 },
    Nuttall,
    Hann,
    /// Gaussian g(t) = exp(-c t^2) with width factor `c` > 0.
    Gaussian { c: f64 },
    Rect,
}

impl WindowKind {
    /// Parses a kind name plus a parameter map, as used by the CLI and FFI.
    pub fn parse(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        match name {
            "itersine" => Ok(WindowKind::Itersine),
            "tukey" => {
                let r = *params.get("r").ok_or_else(|| GabError::MissingParameter {
                    kind: "tukey".into(),
                    param: "r".into(),
                })?;
                if !(0.0..=1.0).contains(&r) {
                    return Err(GabError::InvalidParameter(format!(
                        "tukey ratio r must lie in [0, 1], got {r}"
                    )));
                }
                Ok(WindowKind::Tukey { r })
            }
            "nuttall" => Ok(WindowKind::Nuttall),
            "hann" => Ok(WindowKind::Hann),
            "gaussian" => {
                let c = *params.get("c").ok_or_else(|| GabError::MissingParameter {
                    kind: "gaussian".into(),
                    param: "c".into(),
                })?;
                if c <= 0.0 {
                    return Err(GabError::InvalidParameter(format!(
                        "gaussian width factor c must be positive, got {c}"
                    )));
                }
                Ok(WindowKind::Gaussian { c })
            }
            "rect" => Ok(WindowKind::Rect),
            other => Err(GabError::UnknownWindowKind(other.into())),
        }
    }

    fn sample(&self, t: f64) -> f64 {
        match *self {
            WindowKind::Itersine => (0.5 * PI * (PI * t).cos().powi(2)).sin(),
            WindowKind::Tukey { r } => {
                let flat = (1.0 - r) / 2.0;
                if t.abs() <= flat {
                    1.0
                } else if r > 0.0 && t.abs() <= 0.5 {
                    // taper: raised cosine from 1 at |t| = (1-r)/2 down to 0 at |t| = 1/2
                    0.5 + 0.5 * (PI * (2.0 * t.abs() + r - 1.0) / r).cos()
                } else {
                    0.0
                }
            }
            WindowKind::Nuttall => {
                const C: [f64; 4] = [0.355768, 0.487396, 0.144232, 0.012604];
                if t.abs() <= 0.5 {
                    (0..4).map(|k| C[k] * (2.0 * k as f64 * PI * t).cos()).sum()
                } else {
                    0.0
                }
            }
            WindowKind::Hann => {
                if t.abs() <= 0.5 {
                    0.5 + 0.5 * (2.0 * PI * t).cos()
                } else {
                    0.0
                }
            }
            WindowKind::Gaussian { c } => (-c * t * t).exp(),
            WindowKind::Rect => {
                if t.abs() <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// A real, finitely supported window on the signed index range
/// {-floor(Lw/2), ..., ceil(Lw/2)-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    values: Vec<f64>,
    support: (i64, i64),
    symmetric: bool,
}

impl Window {
    /// Builds a window from values in index order (position 0 holds index
    /// -floor(Lw/2)). Support and symmetry are detected from the data.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(GabError::WindowTooShort(values.len()));
        }
        let len = values.len();
        let lo = index_lo(len);
        let nz: Vec<i64> = (0..len)
            .filter(|&i| values[i] != 0.0)
            .map(|i| lo + i as i64)
            .collect();
        let support = match (nz.first(), nz.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0, 0),
        };
        let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * peak.max(1.0);
        let symmetric = (1..=index_hi(len)).all(|l| {
            let neg = values[(l - lo) as usize];
            let pos = values[(-l - lo) as usize];
            (neg - pos).abs() <= tol
        });
        Ok(Window {
            values,
            support,
            symmetric,
        })
    }

    /// Extracts a window from a full-length circular signal: values are read
    /// at signed indices and the index range is the smallest centered one
    /// containing all entries above `tol` in magnitude.
    pub fn from_circular(x: &DVector<f64>, tol: f64) -> Result<Self> {
        let l = x.len();
        let mut lo = 0i64;
        let mut hi = 0i64;
        let mut any = false;
        for i in 0..l {
            if x[i].abs() > tol {
                let s = signed_index(i, l);
                if !any {
                    lo = s;
                    hi = s;
                    any = true;
                } else {
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
            }
        }
        if !any {
            return Err(GabError::InvalidParameter(
                "cannot extract a window from an all-zero signal".into(),
            ));
        }
        let half = (-lo).max(hi + 1) as usize;
        let len = (2 * half).min(l);
        let start = index_lo(len);
        let values = (0..len)
            .map(|i| x[position(start + i as i64, l)])
            .collect();
        Window::from_values(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Closed signed support interval (lo, hi).
    pub fn support(&self) -> (i64, i64) {
        self.support
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Signed index range (first, last) of the window.
    pub fn index_range(&self) -> (i64, i64) {
        (index_lo(self.len()), index_hi(self.len()))
    }

    /// Value at signed index `l`; zero outside the index range.
    pub fn value(&self, l: i64) -> f64 {
        let lo = index_lo(self.len());
        if l < lo || l > index_hi(self.len()) {
            0.0
        } else {
            self.values[(l - lo) as usize]
        }
    }

    /// Values in index order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// L-periodic wrap of the window: out[l mod L] += w[l] over the full
    /// index range. Always defined; overlapping terms add up when L < Lw.
    pub fn periodize(&self, l: usize) -> DVector<f64> {
        let mut out = DVector::zeros(l);
        let lo = index_lo(self.len());
        for (i, &v) in self.values.iter().enumerate() {
            out[position(lo + i as i64, l)] += v;
        }
        out
    }
}

/// Samples a continuous prototype at t_l = l / Lw over the signed index
/// range, giving a unit peak at index 0.
pub fn make_window(kind: WindowKind, len: usize) -> Result<Window> {
    if len < 2 {
        return Err(GabError::WindowTooShort(len));
    }
    if let WindowKind::Tukey { r } = kind {
        if !(0.0..=1.0).contains(&r) {
            return Err(GabError::InvalidParameter(format!(
                "tukey ratio r must lie in [0, 1], got {r}"
            )));
        }
    }
    if let WindowKind::Gaussian { c } = kind {
        if c <= 0.0 {
            return Err(GabError::InvalidParameter(format!(
                "gaussian width factor c must be positive, got {c}"
            )));
        }
    }
    let lo = index_lo(len);
    let values = (0..len)
        .map(|i| kind.sample((lo + i as i64) as f64 / len as f64))
        .collect();
    Window::from_values(values)
}

/// Convenience wrapper taking a kind name and parameter map.
pub fn make_window_named(
    name: &str,
    len: usize,
    params: &BTreeMap<String, f64>,
) -> Result<Window> {
    make_window(WindowKind::parse(name, params)?, len)
}

/// The S0 gauge: a dilation-balanced Gaussian g[l] = exp(-pi l^2 / L),
/// l2-normalized on the length-L circle.
pub fn s0_gauge(l: usize) -> DVector<f64> {
    let mut g = DVector::from_fn(l, |i, _| {
        let s = signed_index(i, l) as f64;
        (-PI * s * s / l as f64).exp()
    });
    let n = g.norm();
    g /= n;
    g
}

/// A complex sequence of length L with indexing modulo L.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularSignal {
    values: Vec<Complex64>,
}

impl CircularSignal {
    pub fn new(values: Vec<Complex64>) -> Self {
        assert!(!values.is_empty(), "circular signal must have positive length");
        CircularSignal { values }
    }

    pub fn zeros(l: usize) -> Self {
        CircularSignal::new(vec![Complex64::new(0.0, 0.0); l])
    }

    pub fn from_real(x: &DVector<f64>) -> Self {
        CircularSignal::new(x.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Unit impulse at position `at` (modulo L).
    pub fn delta(l: usize, at: i64) -> Self {
        let mut s = CircularSignal::zeros(l);
        s.values[position(at, l)] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Value at signed (or any) index, modulo L.
    pub fn value(&self, l: i64) -> Complex64 {
        self.values[position(l, self.len())]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real parts as a vector (imaginary parts are dropped).
    pub fn real_part(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.values.iter().map(|v| v.re))
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn ifft_plan(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// Unitary DFT: X[k] = L^{-1/2} sum_l x[l] e^{-2 pi i k l / L}.
pub fn dft(x: &CircularSignal) -> CircularSignal {
    let mut buf = x.values().to_vec();
    fft_plan(buf.len()).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    CircularSignal::new(buf)
}

/// Unitary inverse DFT.
pub fn idft(x: &CircularSignal) -> CircularSignal {
    let mut buf = x.values().to_vec();
    ifft_plan(buf.len()).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    CircularSignal::new(buf)
}

/// Unitary DFT of a real vector.
pub(crate) fn dft_real(x: &DVector<f64>) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_plan(buf.len()).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

/// Unitary inverse DFT, then real part. Exact for spectra with Hermitian
/// symmetry, which all priors in this crate preserve.
pub(crate) fn idft_to_real(spec: &[Complex64]) -> DVector<f64> {
    let mut buf = spec.to_vec();
    ifft_plan(buf.len()).process(&mut buf);
    let scale = 1.0 / (buf.len() as f64).sqrt();
    DVector::from_iterator(buf.len(), buf.iter().map(|v| v.re * scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn itersine_peak_is_one() {
        let w = make_window(WindowKind::Itersine, 60).unwrap();
        assert_abs_diff_eq!(w.value(0), 1.0, epsilon = 1e-15);
        assert!(w.is_symmetric());
    }

    #[test]
    fn nuttall_coefficients_sum_to_one_at_the_peak() {
        let w = make_window(WindowKind::Nuttall, 120).unwrap();
        assert_abs_diff_eq!(w.value(0), 1.000000, epsilon = 1e-12);
        // edge samples vanish: c0 - c1 + c2 - c3 = 0
        assert_abs_diff_eq!(w.value(-60), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn tukey_flat_top() {
        let w = make_window(WindowKind::Tukey { r: 0.6 }, 240).unwrap();
        // flat for |t| <= (1-r)/2 = 0.2, i.e. |l| <= 48
        for l in -48..=48 {
            assert_abs_diff_eq!(w.value(l), 1.0, epsilon = 1e-15);
        }
        assert!(w.value(60) < 1.0 && w.value(60) > 0.0);
        // tapers to zero at the boundary
        assert_abs_diff_eq!(w.value(-120), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn itersine_half_overlap_squares_sum_to_a_constant() {
        // brute-force sum of squared shifts at Lw = 60, hop a = Lw/2
        let lw = 60;
        let w = make_window(WindowKind::Itersine, lw).unwrap();
        let l = 240;
        let g = w.periodize(l);
        let a = lw / 2;
        let sums: Vec<f64> = (0..l)
            .map(|i| {
                (0..l / a)
                    .map(|n| {
                        let v = g[(i + l - n * a) % l];
                        v * v
                    })
                    .sum()
            })
            .collect();
        for s in &sums {
            assert_abs_diff_eq!(*s, sums[0], epsilon = 1e-12);
        }
    }

    #[test]
    fn all_kinds_have_unit_peak_and_symmetry() {
        for kind in [
            WindowKind::Itersine,
            WindowKind::Tukey { r: 0.5 },
            WindowKind::Nuttall,
            WindowKind::Hann,
            WindowKind::Gaussian { c: 30.0 },
            WindowKind::Rect,
        ] {
            let w = make_window(kind, 64).unwrap();
            assert_abs_diff_eq!(w.value(0), 1.0, epsilon = 1e-12);
            assert!(w.is_symmetric(), "{kind:?} should be symmetric");
            assert!(
                w.values().iter().all(|v| v.abs() <= 1.0 + 1e-12),
                "{kind:?} should peak at index 0"
            );
        }
    }

    #[test]
    fn make_window_rejects_bad_input() {
        assert!(make_window(WindowKind::Itersine, 1).is_err());
        assert!(make_window(WindowKind::Tukey { r: 1.5 }, 32).is_err());
        assert!(make_window(WindowKind::Gaussian { c: -1.0 }, 32).is_err());
        let empty = BTreeMap::new();
        assert!(matches!(
            make_window_named("tukey", 32, &empty),
            Err(GabError::MissingParameter { .. })
        ));
        assert!(matches!(
            make_window_named("blackman", 32, &empty),
            Err(GabError::UnknownWindowKind(_))
        ));
    }

    #[test]
    fn periodize_delta() {
        let mut vals = vec![0.0; 4];
        vals[2] = 1.0; // index 0 for Lw = 4
        let w = Window::from_values(vals).unwrap();
        let p = w.periodize(8);
        assert_eq!(p[0], 1.0);
        assert_eq!(p.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn periodize_overlapped_wrap_matches_truncated_infinite_sum() {
        // Lw = 6 wrapped to L = 4: compare against a direct sum over k in -2..=2
        let w = Window::from_values(vec![0.3, -0.7, 1.0, 0.5, -0.2, 0.1]).unwrap();
        let p = w.periodize(4);
        for pos in 0..4 {
            let mut direct = 0.0;
            for k in -2i64..=2 {
                // value at signed index matching pos + 4k
                for l in index_lo(6)..=index_hi(6) {
                    if (l - pos as i64).rem_euclid(4) == 0 && (l - pos as i64) / 4 == k {
                        direct += w.value(l);
                    }
                }
            }
            assert_abs_diff_eq!(p[pos], direct, epsilon = 1e-15);
        }
    }

    #[test]
    fn periodize_at_own_length_preserves_energy() {
        let w = make_window(WindowKind::Hann, 16).unwrap();
        let p = w.periodize(16);
        let e: f64 = p.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(e, w.norm_sq(), epsilon = 1e-14);
        assert_abs_diff_eq!(p[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn dft_of_delta_is_flat() {
        let x = CircularSignal::delta(4, 0);
        let spec = dft(&x);
        for v in spec.values() {
            assert_abs_diff_eq!(v.re, 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn dft_is_unitary_on_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for l in [16usize, 100, 729, 4096] {
            let x = CircularSignal::new(
                (0..l)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            );
            let spec = dft(&x);
            assert_abs_diff_eq!(spec.norm(), x.norm(), epsilon = 1e-12 * x.norm());
            let back = idft(&spec);
            let err: f64 = back
                .values()
                .iter()
                .zip(x.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-12 * x.norm(), "round trip error {err} at L={l}");
            let fwd = dft(&idft(&x));
            let err2: f64 = fwd
                .values()
                .iter()
                .zip(x.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err2 < 1e-12 * x.norm());
        }
    }

    #[test]
    fn signed_index_round_trips() {
        for l in [5usize, 8] {
            for i in 0..l {
                let s = signed_index(i, l);
                assert_eq!(position(s, l), i);
                assert!(s >= index_lo(l) && s <= index_hi(l));
            }
        }
        assert_eq!(index_lo(5), -2);
        assert_eq!(index_hi(5), 2);
        assert_eq!(index_lo(8), -4);
        assert_eq!(index_hi(8), 3);
    }

    #[test]
    fn window_from_circular_recovers_compact_support() {
        let w = make_window(WindowKind::Hann, 30).unwrap();
        let p = w.periodize(96);
        let back = Window::from_circular(&p, 0.0).unwrap();
        for l in -15..15 {
            assert_abs_diff_eq!(back.value(l), w.value(l), epsilon = 1e-15);
        }
        assert!(back.len() <= 32);
    }

    #[test]
    fn s0_gauge_is_normalized_and_symmetric() {
        let g = s0_gauge(128);
        assert_abs_diff_eq!(g.norm(), 1.0, epsilon = 1e-14);
        for l in 1..63 {
            assert_abs_diff_eq!(
                g[position(l, 128)],
                g[position(-l, 128)],
                epsilon = 1e-15
            );
        }
    }
}
