//! Concentration measures and classical window quality measures.
//!
//! The concentration half evaluates every functional the solver can
//! optimize, with the exact same definitions the proximity operators use;
//! the quality half measures widths and sidelobe levels on a 16x
//! zero-padded magnitude spectrum.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{GabError, Result};
use crate::gabor::{self, GaborParams};
use crate::signal::{self, CircularSignal};

/// Relative floor below which spectrum segments are ignored.
pub const SIDELOBE_FLOOR_DB: f64 = -120.0;

/// Zero-padding factor for all spectrum-based quality measures.
pub const ZERO_PAD: usize = 16;

/// Quadratic-weight entry w[l] = l / sqrt(L) on the signed index.
pub fn linear_weight(i: usize, l: usize) -> f64 {
    signal::signed_index(i, l) as f64 / (l as f64).sqrt()
}

/// psi[l] = 2 - 2 cos(2 pi l / L), the squared symbol of the circular
/// difference operator.
pub fn grad_symbol(i: usize, l: usize) -> f64 {
    2.0 - 2.0 * (2.0 * PI * i as f64 / l as f64).cos()
}

/// l1 norm of a complex sequence.
fn l1_complex(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}

/// var(|x|) = sum_i (i^2 / sqrt(L)) |x_i| with the center of gravity pinned
/// to index 0.
pub fn var_abs(x: &[Complex64]) -> f64 {
    let l = x.len();
    x.iter()
        .enumerate()
        .map(|(i, z)| {
            let s = signal::signed_index(i, l) as f64;
            s * s / (l as f64).sqrt() * z.norm()
        })
        .sum()
}

/// var(x^2) = || w . x ||_2^2 with linear weight w[l] = l / sqrt(L).
pub fn var_energy(x: &[Complex64]) -> f64 {
    let l = x.len();
    x.iter()
        .enumerate()
        .map(|(i, z)| {
            let w = linear_weight(i, l);
            w * w * z.norm_sqr()
        })
        .sum()
}

/// || grad x ||_2^2 by circular forward differences.
pub fn grad_sq(x: &[Complex64]) -> f64 {
    let l = x.len();
    (0..l).map(|i| (x[(i + 1) % l] - x[i]).norm_sqr()).sum()
}

/// || grad F x ||_2^2 = sum_l psi[l] |x[l]|^2, the time-domain form of the
/// squared gradient of the unitary DFT.
pub fn grad_freq_sq(x: &[Complex64]) -> f64 {
    let l = x.len();
    x.iter()
        .enumerate()
        .map(|(i, z)| grad_symbol(i, l) * z.norm_sqr())
        .sum()
}

/// The circular TF weight W[m, n] = ln(1 + w^2[n] + w^2[m]) of the weighted
/// S0 norm.
pub fn s0_weight_matrix(l: usize) -> DMatrix<f64> {
    DMatrix::from_fn(l, l, |m, n| {
        let wm = linear_weight(m, l);
        let wn = linear_weight(n, l);
        (1.0 + wn * wn + wm * wm).ln()
    })
}

fn check_gauge(gauge: &DVector<f64>, l: usize) -> Result<()> {
    if gauge.len() != l {
        return Err(GabError::LengthMismatch {
            expected: l,
            got: gauge.len(),
        });
    }
    let n = gauge.norm();
    if (n - 1.0).abs() > 1e-8 {
        return Err(GabError::GaugeNotNormalized(n));
    }
    Ok(())
}

/// ||x||_{S0} = || G_{g,1,L} x ||_1 with the unit-norm gauge window, or the
/// weighted variant when a TF weight matrix is given.
pub fn s0_norm(
    x: &DVector<f64>,
    gauge: &DVector<f64>,
    weights: Option<&DMatrix<f64>>,
) -> Result<f64> {
    let l = x.len();
    check_gauge(gauge, l)?;
    let p = GaborParams::new(1, l, l)?;
    let c = gabor::analyze(
        &CircularSignal::from_real(gauge),
        &p,
        &CircularSignal::from_real(x),
    )?;
    let total = match weights {
        None => c.matrix().iter().map(|z| z.norm()).sum(),
        Some(w) => {
            assert_eq!(w.shape(), (l, l), "TF weight matrix must be L x L");
            c.matrix()
                .iter()
                .zip(w.iter())
                .map(|(z, &wv)| wv * z.norm())
                .sum()
        }
    };
    Ok(total)
}

/// All concentration measures of a real window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationMeasures {
    pub grad_time: f64,
    pub grad_freq: f64,
    pub var_time: f64,
    pub var_freq: f64,
    pub envar_time: f64,
    pub envar_freq: f64,
    pub s0: f64,
    pub s0_weighted: f64,
    pub l1_time: f64,
    pub l1_freq: f64,
    pub l2: f64,
}

/// Evaluates every concentration functional on `x` with the module-wide
/// definitions; `gauge` is the unit-norm S0 gauge window of length L.
pub fn concentration_report(
    x: &DVector<f64>,
    gauge: &DVector<f64>,
) -> Result<ConcentrationMeasures> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spec = signal::dft_real(x);
    let w = s0_weight_matrix(x.len());
    Ok(ConcentrationMeasures {
        grad_time: grad_sq(&xc).sqrt(),
        grad_freq: grad_freq_sq(&xc).sqrt(),
        var_time: var_abs(&xc),
        var_freq: var_abs(&spec),
        envar_time: var_energy(&xc).sqrt(),
        envar_freq: var_energy(&spec).sqrt(),
        s0: s0_norm(x, gauge, None)?,
        s0_weighted: s0_norm(x, gauge, Some(&w))?,
        l1_time: x.iter().map(|v| v.abs()).sum(),
        l1_freq: l1_complex(&spec),
        l2: x.norm(),
    })
}

/// Classical window quality measures. Sidelobe fields are `None` when no
/// sidelobe rises above the -120 dB floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityMeasures {
    /// -3 dB width around the time peak, percent of the support length L_h.
    pub width3db: f64,
    /// Main lobe width in frequency, percent of the full frequency range.
    pub mainlobe_width: Option<f64>,
    /// 1 / (width3db * mainlobe_width) with both widths as fractions.
    pub inv_product: Option<f64>,
    /// dB gap between the spectral peak and the highest sidelobe.
    pub sidelobe_attenuation: Option<f64>,
    /// dB gap between the highest sidelobe and the largest of the final 3
    /// sidelobes below Nyquist.
    pub sidelobe_decay: Option<f64>,
}

/// Magnitude spectrum of `x` zero-padded by [`ZERO_PAD`]; values are placed
/// by signed index so compact windows stay centered.
pub fn padded_spectrum(x: &DVector<f64>) -> Vec<f64> {
    let l = x.len();
    let p = ZERO_PAD * l;
    let mut buf = vec![Complex64::default(); p];
    for i in 0..l {
        let s = signal::signed_index(i, l);
        buf[signal::position(s, p)] = Complex64::new(x[i], 0.0);
    }
    signal::fft_plan(p).process(&mut buf);
    buf.iter().map(|z| z.norm()).collect()
}

/// -3 dB width of |x| around its peak, in samples, with linear
/// interpolation at the crossings.
fn width_3db_samples(x: &DVector<f64>) -> f64 {
    let l = x.len();
    let mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let (peak_idx, peak) = mags
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let thresh = peak / 2.0_f64.sqrt();
    let extent = |dir: i64| -> f64 {
        let mut prev = peak;
        for d in 1..l as i64 {
            let v = mags[(peak_idx as i64 + dir * d).rem_euclid(l as i64) as usize];
            if v < thresh {
                let frac = if prev > v { (prev - thresh) / (prev - v) } else { 0.0 };
                return (d - 1) as f64 + frac;
            }
            prev = v;
        }
        (l - 1) as f64
    };
    extent(1) + extent(-1)
}

struct SpectrumShape {
    mainlobe_bins: Option<f64>,
    /// dB levels of positive-frequency sidelobe peaks, in frequency order.
    sidelobes: Vec<f64>,
}

fn spectrum_shape(mags: &[f64]) -> SpectrumShape {
    let p = mags.len();
    let (peak_idx, peak) = mags
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let floor = peak * 10.0_f64.powf(SIDELOBE_FLOOR_DB / 20.0);
    // first local minimum on either side of the peak
    let first_min = |dir: i64| -> Option<usize> {
        let at = |d: i64| mags[(peak_idx as i64 + dir * d).rem_euclid(p as i64) as usize];
        (1..p as i64 / 2).find(|&d| at(d + 1) >= at(d)).map(|d| d as usize)
    };
    let up = first_min(1);
    let down = first_min(-1);
    let mainlobe_bins = match (up, down) {
        (Some(u), Some(d)) => Some((u + d) as f64),
        _ => None,
    };
    let mut sidelobes = Vec::new();
    if let Some(u) = up {
        // local maxima strictly between the mainlobe edge and Nyquist
        let nyquist = p / 2;
        let start = peak_idx + u;
        for k in start + 1..peak_idx + nyquist {
            let v = mags[k % p];
            if v > mags[(k - 1) % p] && v >= mags[(k + 1) % p] && v > floor {
                sidelobes.push(20.0 * (v / peak).log10());
            }
        }
    }
    SpectrumShape {
        mainlobe_bins,
        sidelobes,
    }
}

/// Measures widths and sidelobe levels of a real window; `l_h` is the
/// support length that normalizes the -3 dB width.
pub fn quality_report(x: &DVector<f64>, l_h: usize) -> Result<QualityMeasures> {
    if x.norm() == 0.0 {
        return Err(GabError::InvalidParameter(
            "quality measures are undefined for the zero window".into(),
        ));
    }
    let width3db = 100.0 * width_3db_samples(x) / l_h as f64;
    let mags = padded_spectrum(x);
    let shape = spectrum_shape(&mags);
    let mainlobe_width = shape.mainlobe_bins.map(|b| 100.0 * b / mags.len() as f64);
    let inv_product = mainlobe_width.and_then(|ml| {
        (width3db > 0.0 && ml > 0.0).then(|| 1.0e4 / (width3db * ml))
    });
    let highest = shape
        .sidelobes
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let sidelobe_attenuation = shape.sidelobes.is_empty().then_some(None).unwrap_or(Some(-highest));
    let sidelobe_decay = if shape.sidelobes.is_empty() {
        None
    } else {
        let tail = &shape.sidelobes[shape.sidelobes.len().saturating_sub(3)..];
        let tail_max = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some(highest - tail_max)
    };
    Ok(QualityMeasures {
        width3db,
        mainlobe_width,
        inv_product,
        sidelobe_attenuation,
        sidelobe_decay,
    })
}

/// Concentration and quality measures of one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub concentration: ConcentrationMeasures,
    pub quality: QualityMeasures,
}

/// Full report with the default S0 gauge.
pub fn metrics_report(x: &DVector<f64>, l_h: usize) -> Result<MetricsReport> {
    let gauge = signal::s0_gauge(x.len());
    Ok(MetricsReport {
        concentration: concentration_report(x, &gauge)?,
        quality: quality_report(x, l_h)?,
    })
}

/// Ambiguity function G_{x,1,L} x as an L x L matrix, DC-centered so the
/// origin sits at (floor(L/2), floor(L/2)).
pub fn ambiguity(x: &DVector<f64>) -> Result<DMatrix<Complex64>> {
    let l = x.len();
    let p = GaborParams::new(1, l, l)?;
    let xc = CircularSignal::from_real(x);
    let c = gabor::analyze(&xc, &p, &xc)?;
    let half = l / 2;
    Ok(DMatrix::from_fn(l, l, |m, n| {
        c.matrix()[((m + l - half) % l, (n + l - half) % l)]
    }))
}
