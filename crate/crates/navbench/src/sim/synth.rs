//! Turn ground-truth depth into the kind of output a monocular network
//! actually produces: relative (unknown scale/shift), blurred at object
//! borders, mushy over vegetation, noisy, and normalized to [0, 1].
//!
//! The hidden affine drawn here is exactly what the rescaling stage has to
//! recover, so the whole degradation is deliberately invertible in the
//! anchor-consistent least-squares sense.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::depth::{Anchor, DisparityImage, SparseAnchors};
use crate::seeding;

use super::sensors::DepthImage;
use super::SimError;

/// Degradation knobs for the synthetic relative-depth frames.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DepthArtifacts {
    /// Strength of the hidden per-frame affine: 1.0 draws scale in [0.5, 2]
    /// and shift in [-0.1, 0.1]; 0.0 pins scale=1, shift=0.
    pub affine_drift: f64,
    /// Gaussian blur sigma in pixels applied across the whole frame.
    pub border_blur_sigma: f64,
    /// Extra blur over grass: sigma multiplier inside the (dilated) grass
    /// silhouette, modelling how indistinct vegetation looks to the network.
    pub grass_blur_multiplier: f64,
    /// Per-pixel additive Gaussian noise, in pre-normalization disparity units.
    pub noise_sigma: f64,
}

impl Default for DepthArtifacts {
    fn default() -> Self {
        DepthArtifacts {
            affine_drift: 1.0,
            border_blur_sigma: 2.5,
            grass_blur_multiplier: 3.0,
            noise_sigma: 0.01,
        }
    }
}

/// Where sparse metric anchors come from and how they misbehave.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnchorModel {
    /// Anchors drawn per frame. Deliberately few: sparse-feature depth is
    /// exactly the regime where the robust fit and temporal smoothing have
    /// to earn their keep.
    pub count: usize,
    /// Keep pixels whose ground-truth depth gradient is above this quantile;
    /// corners and object borders are where a tracker would lock on.
    pub pixel_gradient_percentile: f64,
    /// Multiplicative 1-sigma noise on anchor depths. Triangulated feature
    /// depths are this bad; the per-frame scale/shift estimate inherits the
    /// jitter unless it is smoothed away.
    pub depth_noise_sigma: f64,
    /// Probability that an entire frame's anchors share a common scale error.
    pub glitch_prob: f64,
    /// Scale applied to every anchor depth in a glitched frame. Values < 1
    /// collapse the scene toward the camera, which is the damaging
    /// direction: obstacles teleport into the robot's path instead of
    /// hiding in their own occlusion shadow.
    pub glitch_scale: f64,
}

impl Default for AnchorModel {
    fn default() -> Self {
        AnchorModel {
            count: 10,
            pixel_gradient_percentile: 0.85,
            depth_noise_sigma: 0.3,
            glitch_prob: 0.1,
            glitch_scale: 0.5,
        }
    }
}

/// Separable Gaussian blur with clamp-to-edge boundaries. Sigma <= 0 is a
/// no-op copy.
fn gaussian_blur(src: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    if sigma <= 0.0 {
        return src.to_vec();
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let mut kernel = Vec::with_capacity((2 * radius + 1) as usize);
    let mut sum = 0.0;
    for i in -radius..=radius {
        let w = (-0.5 * (i as f64 / sigma).powi(2)).exp();
        kernel.push(w);
        sum += w;
    }
    for w in &mut kernel {
        *w /= sum;
    }

    let mut tmp = vec![0.0; src.len()];
    for v in 0..height {
        for u in 0..width {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                let uu = (u as i64 + k as i64 - radius).clamp(0, width as i64 - 1) as usize;
                acc += w * src[v * width + uu];
            }
            tmp[v * width + u] = acc;
        }
    }
    let mut out = vec![0.0; src.len()];
    for v in 0..height {
        for u in 0..width {
            let mut acc = 0.0;
            for (k, w) in kernel.iter().enumerate() {
                let vv = (v as i64 + k as i64 - radius).clamp(0, height as i64 - 1) as usize;
                acc += w * tmp[vv * width + u];
            }
            out[v * width + u] = acc;
        }
    }
    out
}

/// Dilate the grass silhouette in image space. Each grass pixel splats a
/// square whose radius matches `soft_edge_m` metres at that pixel's depth,
/// so near grass bleeds wider than far grass — like defocus does.
fn dilate_grass(
    grass: &[bool],
    depth: &DepthImage,
    fx: f64,
    soft_edge_m: f64,
) -> Vec<bool> {
    let (w, h) = (depth.width, depth.height);
    let mut out = vec![false; w * h];
    for v in 0..h {
        for u in 0..w {
            let i = v * w + u;
            if !grass[i] {
                continue;
            }
            let z = depth.values[i].max(0.5);
            let r = ((soft_edge_m * fx / z).ceil() as i64).clamp(1, 40);
            let v0 = (v as i64 - r).max(0) as usize;
            let v1 = ((v as i64 + r) as usize).min(h - 1);
            let u0 = (u as i64 - r).max(0) as usize;
            let u1 = ((u as i64 + r) as usize).min(w - 1);
            for vv in v0..=v1 {
                for uu in u0..=u1 {
                    out[vv * w + uu] = true;
                }
            }
        }
    }
    out
}

/// Produce a normalized relative-disparity frame from ground-truth depth.
///
/// Pipeline: invert depth (invalid/sky reads as zero disparity), apply a
/// hidden per-frame affine, blur (harder over the dilated grass mask), add
/// noise, then min-max normalize to [0, 1]. Every output pixel is valid —
/// networks do not return holes. `soft_edge_m` and `fx` size the grass
/// bleed in image space.
pub fn synthesize_relative_depth(
    gt: &DepthImage,
    grass_mask: &[bool],
    artifacts: &DepthArtifacts,
    fx: f64,
    soft_edge_m: f64,
    seed: u64,
) -> DisparityImage {
    assert_eq!(gt.values.len(), grass_mask.len());
    let (w, h) = (gt.width, gt.height);
    let mut rng = seeding::rng(seed);

    // Hidden affine in disparity space; drift 0 collapses to identity.
    let a = artifacts.affine_drift;
    let (scale, shift) = if a > 0.0 {
        (
            rng.random_range(1.0 - 0.5 * a..=1.0 + a),
            rng.random_range(-0.1 * a..=0.1 * a),
        )
    } else {
        (1.0, 0.0)
    };

    let mut disp = vec![0.0; w * h];
    for i in 0..w * h {
        let d = if gt.valid[i] { 1.0 / gt.values[i] } else { 0.0 };
        disp[i] = scale * d + shift;
    }

    let base = gaussian_blur(&disp, w, h, artifacts.border_blur_sigma);
    let out = if artifacts.border_blur_sigma > 0.0
        && artifacts.grass_blur_multiplier > 1.0
        && grass_mask.iter().any(|&g| g)
    {
        let heavy = gaussian_blur(
            &disp,
            w,
            h,
            artifacts.border_blur_sigma * artifacts.grass_blur_multiplier,
        );
        let region = dilate_grass(grass_mask, gt, fx, soft_edge_m);
        base.iter()
            .zip(heavy.iter())
            .zip(region.iter())
            .map(|((&b, &hv), &g)| if g { hv } else { b })
            .collect()
    } else {
        base
    };

    let mut values = out;
    if artifacts.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, artifacts.noise_sigma).unwrap();
        for v in &mut values {
            *v += noise.sample(&mut rng);
        }
    }

    // Min-max normalize last: the network's output convention.
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in &values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let range = hi - lo;
    if range < 1e-12 {
        values.iter_mut().for_each(|v| *v = 0.0);
    } else {
        values.iter_mut().for_each(|v| *v = (*v - lo) / range);
    }

    DisparityImage {
        width: w,
        height: h,
        values,
        valid: vec![true; w * h],
    }
}

/// Sample sparse metric anchors from a ground-truth frame.
///
/// Candidates are valid pixels in the top gradient quantile of the depth
/// image (a stand-in for trackable corners); `count` of them are drawn
/// uniformly, depth-noised, and occasionally hit by a whole-frame scale
/// glitch. Errors if the frame has fewer valid pixels than `count`.
pub fn sample_anchors(
    gt: &DepthImage,
    model: &AnchorModel,
    seed: u64,
) -> Result<SparseAnchors, SimError> {
    let (w, h) = (gt.width, gt.height);
    let valid_total = gt.valid_count();
    if valid_total < model.count {
        return Err(SimError::TooFewValidPixels {
            have: valid_total,
            need: model.count,
        });
    }

    // Gradient magnitude of GT depth with one-sided fallbacks near invalid
    // neighbours; silhouette pixels score high, flat ground scores low.
    let grad_at = |u: usize, v: usize| -> f64 {
        let z = |uu: usize, vv: usize| -> Option<f64> {
            let i = vv * w + uu;
            gt.valid[i].then(|| gt.values[i])
        };
        let c = z(u, v).unwrap();
        let axis = |m: Option<f64>, p: Option<f64>| match (m, p) {
            (Some(a), Some(b)) => (b - a) / 2.0,
            (None, Some(b)) => b - c,
            (Some(a), None) => c - a,
            (None, None) => 0.0,
        };
        let gx = axis(
            (u > 0).then(|| z(u - 1, v)).flatten(),
            (u + 1 < w).then(|| z(u + 1, v)).flatten(),
        );
        let gy = axis(
            (v > 0).then(|| z(u, v - 1)).flatten(),
            (v + 1 < h).then(|| z(u, v + 1)).flatten(),
        );
        gx.hypot(gy)
    };

    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(valid_total);
    for v in 0..h {
        for u in 0..w {
            if gt.valid[v * w + u] {
                scored.push((v * w + u, grad_at(u, v)));
            }
        }
    }
    let mut grads: Vec<f64> = scored.iter().map(|&(_, g)| g).collect();
    grads.sort_by(|a, b| a.total_cmp(b));
    let q = model.pixel_gradient_percentile.clamp(0.0, 1.0);
    let rank = ((q * grads.len() as f64).ceil() as usize).min(grads.len() - 1);
    let threshold = grads[rank];

    let mut candidates: Vec<usize> = scored
        .iter()
        .filter(|&&(_, g)| g >= threshold)
        .map(|&(i, _)| i)
        .collect();
    if candidates.len() < model.count {
        // Degenerate frames (uniform depth) fall back to all valid pixels.
        candidates = scored.iter().map(|&(i, _)| i).collect();
    }

    let mut rng = seeding::rng(seed);
    // Partial Fisher-Yates: draw `count` distinct indices.
    let n = candidates.len();
    for k in 0..model.count {
        let j = rng.random_range(k..n);
        candidates.swap(k, j);
    }

    let noise = (model.depth_noise_sigma > 0.0)
        .then(|| Normal::new(0.0, model.depth_noise_sigma).unwrap());
    let glitched = rng.random_range(0.0..1.0) < model.glitch_prob;
    let anchors = candidates[..model.count]
        .iter()
        .map(|&i| {
            let mut z = gt.values[i];
            if let Some(n) = &noise {
                z *= 1.0 + n.sample(&mut rng);
            }
            if glitched {
                z *= model.glitch_scale;
            }
            Anchor {
                u: i % w,
                v: i / w,
                z: z.max(0.01),
            }
        })
        .collect();
    Ok(SparseAnchors { anchors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CameraIntrinsics, RobotState};
    use crate::sim::{render_view, CameraMount, Primitive, Terrain, World};

    fn rendered_scene() -> (DepthImage, Vec<bool>, CameraIntrinsics) {
        let w = World {
            half_size: 40.0,
            terrain: Terrain::Flat,
            obstacles: vec![
                Primitive::Box {
                    cx: 6.0,
                    cy: 1.0,
                    half_x: 0.5,
                    half_y: 0.5,
                    z0: 0.0,
                    z1: 1.5,
                },
                Primitive::Grass {
                    polygon: vec![(3.0, -3.0), (5.0, -3.0), (5.0, -1.0), (3.0, -1.0)],
                    height: 0.8,
                    soft_edge: 0.3,
                },
            ],
        };
        let k = CameraIntrinsics::from_hfov(80, 60, std::f64::consts::FRAC_PI_2).unwrap();
        let mount = CameraMount::default();
        let (depth, grass) = render_view(&w, &mount.pose(&w, &RobotState::at(0.0, 0.0, 0.0)), &k, 30.0);
        (depth, grass, k)
    }

    #[test]
    fn output_is_dense_and_normalized() {
        let (depth, grass, k) = rendered_scene();
        let disp = synthesize_relative_depth(
            &depth,
            &grass,
            &DepthArtifacts::default(),
            k.fx,
            0.3,
            99,
        );
        assert_eq!(disp.values.len(), depth.values.len());
        assert!(disp.valid.iter().all(|&v| v));
        let lo = disp.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = disp.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo - 0.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clean_artifacts_preserve_disparity_ordering() {
        // No blur/noise/drift: output must be a monotone map of 1/z, so the
        // nearest pixel stays the brightest.
        let (depth, grass, k) = rendered_scene();
        let clean = DepthArtifacts {
            affine_drift: 0.0,
            border_blur_sigma: 0.0,
            grass_blur_multiplier: 1.0,
            noise_sigma: 0.0,
        };
        let disp = synthesize_relative_depth(&depth, &grass, &clean, k.fx, 0.3, 1);
        // The brightest disparity pixel must sit at the minimum GT depth
        // (symmetric scenes tie, so compare depths rather than indices).
        let min_z = depth
            .values
            .iter()
            .zip(depth.valid.iter())
            .filter(|&(_, &ok)| ok)
            .map(|(&z, _)| z)
            .fold(f64::INFINITY, f64::min);
        let best_disp = (0..disp.values.len())
            .max_by(|&a, &b| disp.values[a].total_cmp(&disp.values[b]))
            .unwrap();
        assert!(depth.valid[best_disp]);
        assert!((depth.values[best_disp] - min_z).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_frame_different_seed_differs() {
        let (depth, grass, k) = rendered_scene();
        let art = DepthArtifacts::default();
        let a = synthesize_relative_depth(&depth, &grass, &art, k.fx, 0.3, 5);
        let b = synthesize_relative_depth(&depth, &grass, &art, k.fx, 0.3, 5);
        let c = synthesize_relative_depth(&depth, &grass, &art, k.fx, 0.3, 6);
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn grass_multiplier_flattens_the_grass_region() {
        // A/B with identical seed and blur base: tripling the sigma inside
        // the grass silhouette must reduce local detail there.
        let (depth, grass, k) = rendered_scene();
        let soft = DepthArtifacts {
            noise_sigma: 0.0,
            affine_drift: 0.0,
            border_blur_sigma: 1.5,
            grass_blur_multiplier: 3.0,
        };
        let uniform = DepthArtifacts {
            grass_blur_multiplier: 1.0,
            ..soft.clone()
        };
        let a = synthesize_relative_depth(&depth, &grass, &soft, k.fx, 0.3, 7);
        let b = synthesize_relative_depth(&depth, &grass, &uniform, k.fx, 0.3, 7);
        let region = dilate_grass(&grass, &depth, k.fx, 0.3);
        let detail = |disp: &crate::depth::DisparityImage| {
            let mut sum = 0.0;
            let mut n = 0usize;
            for v in 0..depth.height {
                for u in 1..depth.width {
                    let i = v * depth.width + u;
                    if region[i] && region[i - 1] {
                        sum += (disp.values[i] - disp.values[i - 1]).abs();
                        n += 1;
                    }
                }
            }
            sum / n as f64
        };
        let (blurred, sharp) = (detail(&a), detail(&b));
        assert!(
            blurred < 0.8 * sharp,
            "grass should lose detail: {blurred} vs {sharp}"
        );
    }

    #[test]
    fn anchors_prefer_depth_discontinuities() {
        let (depth, _, _) = rendered_scene();
        let model = AnchorModel {
            count: 50,
            depth_noise_sigma: 0.0,
            glitch_prob: 0.0,
            ..AnchorModel::default()
        };
        let anchors = sample_anchors(&depth, &model, 3).unwrap();
        assert_eq!(anchors.anchors.len(), 50);
        // Noise-free anchors must carry exact GT depth at their pixel.
        for a in &anchors.anchors {
            let i = depth.idx(a.u, a.v);
            assert!(depth.valid[i]);
            assert_eq!(a.z, depth.values[i]);
        }
        // Distinct pixels.
        let mut seen: Vec<(usize, usize)> = anchors.anchors.iter().map(|a| (a.u, a.v)).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 50);
    }

    #[test]
    fn glitched_frames_scale_every_anchor() {
        let (depth, _, _) = rendered_scene();
        let always = AnchorModel {
            depth_noise_sigma: 0.0,
            glitch_prob: 1.0,
            glitch_scale: 1.5,
            ..AnchorModel::default()
        };
        let never = AnchorModel {
            glitch_prob: 0.0,
            ..always.clone()
        };
        let g = sample_anchors(&depth, &always, 12).unwrap();
        let c = sample_anchors(&depth, &never, 12).unwrap();
        assert_eq!(g.anchors.len(), c.anchors.len());
        for (a, b) in g.anchors.iter().zip(c.anchors.iter()) {
            assert_eq!((a.u, a.v), (b.u, b.v));
            assert!((a.z - 1.5 * b.z).abs() < 1e-12);
        }
    }

    #[test]
    fn too_few_valid_pixels_is_an_error() {
        let depth = DepthImage {
            width: 8,
            height: 8,
            values: vec![1.0; 64],
            valid: vec![false; 64],
        };
        let model = AnchorModel {
            count: 50,
            ..AnchorModel::default()
        };
        let err = sample_anchors(&depth, &model, 0).unwrap_err();
        assert!(matches!(err, SimError::TooFewValidPixels { have: 0, need: 50 }));
    }
}
