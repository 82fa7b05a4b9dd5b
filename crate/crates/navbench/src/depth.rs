//! Relative-to-metric depth rescaling.
//!
//! Monocular depth networks output *relative* inverse depth: correct up to an
//! unknown per-frame affine transform. Given a handful of sparse metric
//! anchors (e.g. triangulated visual-odometry features), this module
//! recovers that transform by least squares in disparity space, smooths it
//! over time with an exponential moving average, masks depth-discontinuity
//! pixels whose values are unreliable after interpolation/blur, and finally
//! converts the rescaled disparity into a metric point cloud.

use crate::geometry::{backproject, CameraIntrinsics, PointCloud, Pose3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative disparity image (inverse depth up to an affine transform),
/// row-major, normalised to [0, 1] by the producer.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityImage {
    pub width: usize,
    pub height: usize,
    /// Row-major values; finite wherever `valid` is set.
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl DisparityImage {
    pub fn new_filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            values: vec![value; width * height],
            valid: vec![true; width * height],
        }
    }

    #[inline]
    pub fn idx(&self, u: usize, v: usize) -> usize {
        debug_assert!(u < self.width && v < self.height);
        v * self.width + u
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let i = self.idx(u, v);
        self.valid[i].then(|| self.values[i])
    }

    /// Value with invalid pixels read as 0 (used by gradient stencils).
    #[inline]
    fn sample_or_zero(&self, u: isize, v: isize) -> f64 {
        // Clamp-to-edge addressing.
        let u = u.clamp(0, self.width as isize - 1) as usize;
        let v = v.clamp(0, self.height as isize - 1) as usize;
        let i = v * self.width + u;
        if self.valid[i] {
            self.values[i]
        } else {
            0.0
        }
    }
}

/// One metric depth anchor at an integer pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub u: usize,
    pub v: usize,
    /// Metric camera-frame depth (m), > 0.
    pub z: f64,
}

/// Sparse metric anchors for one frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseAnchors {
    pub anchors: Vec<Anchor>,
}

/// Affine disparity correction: metric disparity = `s` * relative + `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleShift {
    pub s: f64,
    pub b: f64,
}

/// Boolean mask of pixels to drop before metricisation.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMask {
    pub width: usize,
    pub height: usize,
    pub masked: Vec<bool>,
}

impl EdgeMask {
    /// All-clear mask; also the exact meaning of "edge masking disabled".
    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, masked: vec![false; width * height] }
    }

    #[inline]
    pub fn is_masked(&self, u: usize, v: usize) -> bool {
        self.masked[v * self.width + u]
    }

    pub fn count(&self) -> usize {
        self.masked.iter().filter(|&&m| m).count()
    }
}

#[derive(Debug, Error)]
pub enum DepthError {
    #[error("need at least 2 usable anchors, got {0}")]
    TooFewAnchors(usize),
    #[error("anchor disparities are degenerate (variance below {0:e})")]
    DegenerateAnchors(f64),
    #[error("smoothing factor must lie in [0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("metricisation produced no points")]
    EmptyOutput,
}

/// Variance floor below which the affine fit is declared degenerate.
const MIN_DISPARITY_VARIANCE: f64 = 1e-12;

/// Recovers the affine disparity correction from sparse metric anchors.
///
/// Solves `min_(s,b) sum_i (s*d_i + b - 1/z_i)^2` over anchors that land on
/// valid pixels, via the closed-form 2x2 normal equations. With
/// `robust_trim` the fit runs once, drops anchors whose residual deviates
/// from the median by more than 3x the median absolute deviation, and
/// refits on the survivors (one pass).
pub fn fit_scale_shift(
    disp: &DisparityImage,
    anchors: &SparseAnchors,
    robust_trim: bool,
) -> Result<ScaleShift, DepthError> {
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(anchors.anchors.len());
    for a in &anchors.anchors {
        if a.u >= disp.width || a.v >= disp.height || !(a.z > 0.0) {
            continue;
        }
        if let Some(d) = disp.get(a.u, a.v) {
            samples.push((d, 1.0 / a.z));
        }
    }
    let first = solve_affine(&samples)?;
    if !robust_trim {
        return Ok(first);
    }

    let residuals: Vec<f64> =
        samples.iter().map(|&(d, y)| first.s * d + first.b - y).collect();
    let med = median(&residuals);
    let mad = median(&residuals.iter().map(|r| (r - med).abs()).collect::<Vec<_>>());
    if mad < 1e-12 {
        // Residuals are essentially identical; nothing to trim.
        return Ok(first);
    }
    let kept: Vec<(f64, f64)> = samples
        .iter()
        .zip(&residuals)
        .filter(|(_, &r)| (r - med).abs() <= 3.0 * mad)
        .map(|(&s, _)| s)
        .collect();
    // If trimming leaves too little to refit, fall back to the full fit.
    match solve_affine(&kept) {
        Ok(ss) => Ok(ss),
        Err(_) => Ok(first),
    }
}

fn solve_affine(samples: &[(f64, f64)]) -> Result<ScaleShift, DepthError> {
    let n = samples.len();
    if n < 2 {
        return Err(DepthError::TooFewAnchors(n));
    }
    let nf = n as f64;
    let mean_d = samples.iter().map(|&(d, _)| d).sum::<f64>() / nf;
    let mean_y = samples.iter().map(|&(_, y)| y).sum::<f64>() / nf;
    let var_d = samples.iter().map(|&(d, _)| (d - mean_d).powi(2)).sum::<f64>() / nf;
    if var_d < MIN_DISPARITY_VARIANCE {
        return Err(DepthError::DegenerateAnchors(MIN_DISPARITY_VARIANCE));
    }
    let cov = samples
        .iter()
        .map(|&(d, y)| (d - mean_d) * (y - mean_y))
        .sum::<f64>()
        / nf;
    let s = cov / var_d;
    let b = mean_y - s * mean_d;
    Ok(ScaleShift { s, b })
}

fn median(xs: &[f64]) -> f64 {
    debug_assert!(!xs.is_empty());
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Exponential moving average over per-frame fits:
/// `smoothed_t = alpha * smoothed_(t-1) + (1 - alpha) * fit_t`.
///
/// `alpha = 0` reproduces the raw per-frame fit exactly, which is how the
/// smoothing ablation is expressed.
pub fn smooth_scale_shift(
    prev: ScaleShift,
    new: ScaleShift,
    alpha: f64,
) -> Result<ScaleShift, DepthError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(DepthError::AlphaOutOfRange(alpha));
    }
    Ok(ScaleShift {
        s: alpha * prev.s + (1.0 - alpha) * new.s,
        b: alpha * prev.b + (1.0 - alpha) * new.b,
    })
}

/// Marks pixels near strong disparity gradients.
///
/// A 3x3 Sobel magnitude is thresholded at `grad_threshold` times the
/// valid-pixel disparity range, then dilated by `radius` in the Chebyshev
/// metric (a square structuring element of side `2*radius + 1`). Invalid
/// pixels read as 0 in the stencil, so silhouettes against invalid regions
/// (sky) also register as edges.
pub fn edge_mask(disp: &DisparityImage, grad_threshold: f64, radius: usize) -> EdgeMask {
    let (w, h) = (disp.width, disp.height);
    let mut mask = EdgeMask::empty(w, h);

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..w * h {
        if disp.valid[i] {
            lo = lo.min(disp.values[i]);
            hi = hi.max(disp.values[i]);
        }
    }
    if !lo.is_finite() || hi - lo <= 0.0 {
        return mask; // Uniform or fully invalid image: no edges.
    }
    let threshold = grad_threshold * (hi - lo);

    let mut edges = vec![false; w * h];
    for v in 0..h as isize {
        for u in 0..w as isize {
            let s = |du: isize, dv: isize| disp.sample_or_zero(u + du, v + dv);
            let gx = (s(1, -1) + 2.0 * s(1, 0) + s(1, 1))
                - (s(-1, -1) + 2.0 * s(-1, 0) + s(-1, 1));
            let gy = (s(-1, 1) + 2.0 * s(0, 1) + s(1, 1))
                - (s(-1, -1) + 2.0 * s(0, -1) + s(1, -1));
            if (gx * gx + gy * gy).sqrt() > threshold {
                edges[(v as usize) * w + u as usize] = true;
            }
        }
    }

    // Chebyshev dilation is separable: a horizontal running-OR window
    // followed by a vertical one.
    let r = radius as isize;
    let mut horiz = vec![false; w * h];
    for v in 0..h {
        for u in 0..w as isize {
            let lo_u = (u - r).max(0) as usize;
            let hi_u = ((u + r) as usize).min(w - 1);
            horiz[v * w + u as usize] = edges[v * w + lo_u..=v * w + hi_u].contains(&true);
        }
    }
    for v in 0..h as isize {
        let lo_v = (v - r).max(0) as usize;
        let hi_v = ((v + r) as usize).min(h - 1);
        for u in 0..w {
            let mut m = false;
            for vv in lo_v..=hi_v {
                if horiz[vv * w + u] {
                    m = true;
                    break;
                }
            }
            mask.masked[(v as usize) * w + u] = m;
        }
    }
    mask
}

/// Subsampling and filtering knobs for [`metricize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricizeOptions {
    /// Pixel subsampling stride in both axes.
    pub stride: usize,
    /// Metric disparities at or below this are treated as "at infinity".
    pub epsilon_disp: f64,
    /// Points farther than this (m) are dropped.
    pub max_range: f64,
}

impl Default for MetricizeOptions {
    fn default() -> Self {
        Self { stride: 4, epsilon_disp: 1e-6, max_range: 30.0 }
    }
}

/// Converts rescaled disparity into a world-frame metric point cloud.
///
/// Applies the affine correction per pixel, inverts to depth, and
/// backprojects through the camera at `pose`. Pixels that are invalid,
/// masked, out past `max_range`, or whose corrected disparity falls at or
/// below `epsilon_disp` are dropped.
pub fn metricize(
    disp: &DisparityImage,
    ss: ScaleShift,
    mask: &EdgeMask,
    opts: &MetricizeOptions,
    pose: &Pose3,
    k: &CameraIntrinsics,
) -> Result<PointCloud, DepthError> {
    assert_eq!((disp.width, disp.height), (mask.width, mask.height), "mask/image size mismatch");
    assert!(opts.stride >= 1, "stride must be at least 1");
    let mut points = Vec::new();
    let mut v = 0;
    while v < disp.height {
        let mut u = 0;
        while u < disp.width {
            if let Some(d) = disp.get(u, v) {
                if !mask.is_masked(u, v) {
                    let md = ss.s * d + ss.b;
                    if md > opts.epsilon_disp {
                        let z = 1.0 / md;
                        if z <= opts.max_range {
                            // Depth is positive here by construction (md > 0).
                            let p = backproject(u as f64, v as f64, z, pose, k)
                                .expect("positive depth");
                            points.push(p);
                        }
                    }
                }
            }
            u += opts.stride;
        }
        v += opts.stride;
    }
    if points.is_empty() {
        return Err(DepthError::EmptyOutput);
    }
    Ok(PointCloud::new(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::camera_pose;
    use approx::assert_relative_eq;
    use nalgebra::Point3;
    use rand::Rng;

    /// Synthetic scene: ground-truth depths varying smoothly across the
    /// image, hidden affine (a, c) applied to the true disparity.
    fn synthetic(a: f64, c: f64) -> (DisparityImage, Vec<Vec<f64>>) {
        let (w, h) = (64, 48);
        let mut disp = DisparityImage::new_filled(w, h, 0.0);
        let mut gt = vec![vec![0.0; w]; h];
        for v in 0..h {
            for u in 0..w {
                let z = 2.0 + 0.05 * u as f64 + 0.1 * v as f64;
                gt[v][u] = z;
                disp.values[v * w + u] = a * (1.0 / z) + c;
            }
        }
        (disp, gt)
    }

    fn anchors_from(gt: &[Vec<f64>], pts: &[(usize, usize)]) -> SparseAnchors {
        SparseAnchors {
            anchors: pts.iter().map(|&(u, v)| Anchor { u, v, z: gt[v][u] }).collect(),
        }
    }

    #[test]
    fn fit_inverts_hidden_affine_exactly() {
        let (a, c) = (0.7, 0.05);
        let (disp, gt) = synthetic(a, c);
        let anchors = anchors_from(&gt, &[(3, 5), (60, 40), (31, 2), (10, 44), (50, 17)]);
        let ss = fit_scale_shift(&disp, &anchors, false).unwrap();
        // The exact inverse of d' = a*d + c is s = 1/a, b = -c/a.
        assert_relative_eq!(ss.s, 1.0 / a, epsilon = 1e-9);
        assert_relative_eq!(ss.b, -c / a, epsilon = 1e-9);
        // Round-trip depth at a non-anchor pixel.
        let d = disp.get(20, 20).unwrap();
        assert_relative_eq!(1.0 / (ss.s * d + ss.b), gt[20][20], epsilon = 1e-9);
    }

    #[test]
    fn fit_needs_two_anchors() {
        let (disp, gt) = synthetic(1.0, 0.0);
        let one = anchors_from(&gt, &[(5, 5)]);
        assert!(matches!(
            fit_scale_shift(&disp, &one, false),
            Err(DepthError::TooFewAnchors(1))
        ));
    }

    #[test]
    fn fit_rejects_constant_disparity() {
        let disp = DisparityImage::new_filled(8, 8, 0.5);
        let anchors = SparseAnchors {
            anchors: vec![Anchor { u: 1, v: 1, z: 2.0 }, Anchor { u: 6, v: 6, z: 4.0 }],
        };
        assert!(matches!(
            fit_scale_shift(&disp, &anchors, false),
            Err(DepthError::DegenerateAnchors(_))
        ));
    }

    #[test]
    fn anchors_on_invalid_pixels_are_ignored() {
        let (mut disp, gt) = synthetic(1.0, 0.0);
        let i = disp.idx(3, 3);
        disp.valid[i] = false;
        let anchors = anchors_from(&gt, &[(3, 3), (10, 10)]);
        // Only one usable anchor remains.
        assert!(matches!(
            fit_scale_shift(&disp, &anchors, false),
            Err(DepthError::TooFewAnchors(1))
        ));
    }

    #[test]
    fn robust_trim_discards_glitched_anchors() {
        let (a, c) = (1.4, -0.02);
        let (disp, gt) = synthetic(a, c);
        let mut pts = Vec::new();
        for i in 0..40 {
            pts.push((1 + (i * 3) % 60, 1 + (i * 7) % 45));
        }
        let mut anchors = anchors_from(&gt, &pts);
        // Corrupt four anchors the way a tracking glitch would: depth off by 60%.
        for j in [4usize, 11, 23, 37] {
            anchors.anchors[j].z *= 1.6;
        }
        let plain = fit_scale_shift(&disp, &anchors, false).unwrap();
        let trimmed = fit_scale_shift(&disp, &anchors, true).unwrap();
        assert_relative_eq!(trimmed.s, 1.0 / a, epsilon = 1e-9);
        assert_relative_eq!(trimmed.b, -c / a, epsilon = 1e-9);
        assert!(
            (plain.s - 1.0 / a).abs() > (trimmed.s - 1.0 / a).abs(),
            "trim should strictly improve on corrupted data"
        );
    }

    #[test]
    fn trim_is_a_no_op_on_clean_data() {
        let (disp, gt) = synthetic(0.9, 0.01);
        let anchors = anchors_from(&gt, &[(3, 5), (60, 40), (31, 2), (10, 44)]);
        let plain = fit_scale_shift(&disp, &anchors, false).unwrap();
        let trimmed = fit_scale_shift(&disp, &anchors, true).unwrap();
        assert_relative_eq!(plain.s, trimmed.s, epsilon = 1e-12);
        assert_relative_eq!(plain.b, trimmed.b, epsilon = 1e-12);
    }

    #[test]
    fn smoothing_recurrence_matches_hand_rolled_ema() {
        let fits = [
            ScaleShift { s: 1.0, b: 0.0 },
            ScaleShift { s: 2.0, b: 0.1 },
            ScaleShift { s: 0.5, b: -0.2 },
        ];
        let alpha = 0.8;
        let mut sm = fits[0];
        let mut expect_s = fits[0].s;
        let mut expect_b = fits[0].b;
        for f in &fits[1..] {
            sm = smooth_scale_shift(sm, *f, alpha).unwrap();
            expect_s = alpha * expect_s + (1.0 - alpha) * f.s;
            expect_b = alpha * expect_b + (1.0 - alpha) * f.b;
            assert_relative_eq!(sm.s, expect_s, epsilon = 1e-15);
            assert_relative_eq!(sm.b, expect_b, epsilon = 1e-15);
        }
    }

    #[test]
    fn alpha_zero_passes_fits_through() {
        let prev = ScaleShift { s: 3.0, b: 1.0 };
        let new = ScaleShift { s: 0.25, b: -0.5 };
        let out = smooth_scale_shift(prev, new, 0.0).unwrap();
        assert_eq!(out, new);
    }

    #[test]
    fn alpha_out_of_range_is_rejected() {
        let ss = ScaleShift { s: 1.0, b: 0.0 };
        assert!(smooth_scale_shift(ss, ss, 1.0).is_err());
        assert!(smooth_scale_shift(ss, ss, -0.1).is_err());
    }

    #[test]
    fn uniform_image_has_empty_mask() {
        let disp = DisparityImage::new_filled(32, 32, 0.37);
        let mask = edge_mask(&disp, 0.05, 5);
        assert_eq!(mask.count(), 0);
    }

    /// Brute-force oracle for the whole mask: direct Sobel at every pixel
    /// followed by an O(r^2) dilation scan.
    fn mask_oracle(disp: &DisparityImage, grad_threshold: f64, radius: usize) -> Vec<bool> {
        let (w, h) = (disp.width, disp.height);
        let sample = |u: isize, v: isize| -> f64 {
            let u = u.clamp(0, w as isize - 1) as usize;
            let v = v.clamp(0, h as isize - 1) as usize;
            if disp.valid[v * w + u] {
                disp.values[v * w + u]
            } else {
                0.0
            }
        };
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..w * h {
            if disp.valid[i] {
                lo = lo.min(disp.values[i]);
                hi = hi.max(disp.values[i]);
            }
        }
        let thr = grad_threshold * (hi - lo);
        let mut edges = vec![false; w * h];
        let kx = [[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]];
        for v in 0..h as isize {
            for u in 0..w as isize {
                let mut gx = 0.0;
                let mut gy = 0.0;
                for (dj, row) in kx.iter().enumerate() {
                    for (di, &c) in row.iter().enumerate() {
                        let val = sample(u + di as isize - 1, v + dj as isize - 1);
                        gx += c * val;
                        // gy kernel is the transpose of gx.
                        gy += kx[di][dj] * val;
                    }
                }
                if gx.hypot(gy) > thr {
                    edges[v as usize * w + u as usize] = true;
                }
            }
        }
        let r = radius as isize;
        let mut out = vec![false; w * h];
        for v in 0..h as isize {
            for u in 0..w as isize {
                'scan: for dv in -r..=r {
                    for du in -r..=r {
                        let (uu, vv) = (u + du, v + dv);
                        if uu >= 0
                            && vv >= 0
                            && uu < w as isize
                            && vv < h as isize
                            && edges[vv as usize * w + uu as usize]
                        {
                            out[v as usize * w + u as usize] = true;
                            break 'scan;
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn mask_matches_brute_force_oracle() {
        let mut rng = crate::seeding::rng(901);
        let (w, h) = (40, 30);
        let mut disp = DisparityImage::new_filled(w, h, 0.0);
        for v in 0..h {
            for u in 0..w {
                // Smooth ramp plus a sharp block to create real edges.
                let base = 0.2 + 0.3 * (u as f64 / w as f64);
                let block = if (10..18).contains(&u) && (8..14).contains(&v) { 0.5 } else { 0.0 };
                disp.values[v * w + u] = base + block + rng.random_range(-0.01..0.01);
            }
        }
        // A few invalid pixels as a sky stand-in.
        for u in 25..30 {
            let i = disp.idx(u, 2);
            disp.valid[i] = false;
        }
        for &(thr, r) in &[(0.05, 5usize), (0.1, 2), (0.02, 0)] {
            let fast = edge_mask(&disp, thr, r);
            let slow = mask_oracle(&disp, thr, r);
            assert_eq!(fast.masked, slow, "threshold {thr} radius {r}");
        }
        // Sanity: the block must actually produce a mask.
        assert!(edge_mask(&disp, 0.05, 5).count() > 0);
    }

    #[test]
    fn metricize_round_trips_exact_disparity() {
        let k = CameraIntrinsics::from_hfov(64, 48, 1.2).unwrap();
        let pose = camera_pose(Point3::new(0.5, -0.25, 1.0), 0.3, 0.2);
        let mut disp = DisparityImage::new_filled(64, 48, 0.0);
        for v in 0..48 {
            for u in 0..64 {
                let z = 3.0 + 0.1 * u as f64 + 0.05 * v as f64;
                disp.values[v * 64 + u] = 1.0 / z;
            }
        }
        let opts = MetricizeOptions { stride: 4, epsilon_disp: 1e-6, max_range: 1e9 };
        let cloud = metricize(
            &disp,
            ScaleShift { s: 1.0, b: 0.0 },
            &EdgeMask::empty(64, 48),
            &opts,
            &pose,
            &k,
        )
        .unwrap();
        assert_eq!(cloud.len(), 16 * 12);
        // Spot-check pixel (8, 4).
        let z = 3.0 + 0.1 * 8.0 + 0.05 * 4.0;
        let expect = backproject(8.0, 4.0, z, &pose, &k).unwrap();
        assert!(cloud.points.iter().any(|p| (p - expect).norm() < 1e-9));
    }

    #[test]
    fn metricize_filters_masked_far_and_infinite_pixels() {
        let k = CameraIntrinsics::from_hfov(8, 8, 1.2).unwrap();
        let pose = Pose3::identity();
        let mut disp = DisparityImage::new_filled(8, 8, 0.1); // 10 m everywhere
        disp.values[0] = 0.0; // at infinity -> dropped via epsilon_disp
        disp.values[2] = 0.02; // 50 m -> dropped via max_range
        let mut mask = EdgeMask::empty(8, 8);
        mask.masked[4] = true; // pixel (4, 0) dropped via mask
        let opts = MetricizeOptions { stride: 2, epsilon_disp: 1e-6, max_range: 30.0 };
        let cloud =
            metricize(&disp, ScaleShift { s: 1.0, b: 0.0 }, &mask, &opts, &pose, &k).unwrap();
        // Stride-2 grid has 16 candidates; three are dropped.
        assert_eq!(cloud.len(), 13);
        assert!(cloud.points.iter().all(|p| p.z <= 30.0 + 1e-9));
    }

    #[test]
    fn metricize_empty_output_is_an_error() {
        let k = CameraIntrinsics::from_hfov(4, 4, 1.2).unwrap();
        let disp = DisparityImage::new_filled(4, 4, 0.5);
        let mut mask = EdgeMask::empty(4, 4);
        mask.masked.iter_mut().for_each(|m| *m = true);
        let out = metricize(
            &disp,
            ScaleShift { s: 1.0, b: 0.0 },
            &mask,
            &MetricizeOptions::default(),
            &Pose3::identity(),
            &k,
        );
        assert!(matches!(out, Err(DepthError::EmptyOutput)));
    }
}
