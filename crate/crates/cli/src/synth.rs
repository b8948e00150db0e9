//! Seeded synthetic datasets with exact annotations.
//!
//! Two families:
//!
//! * **Localization suites** — still images on smoothed-noise clutter with
//!   one fully-opaque planted template plus reduced-contrast distractor
//!   copies, split into train/test with per-image center annotations.
//! * **Tracking sequences** — a textured patch translating at constant
//!   speed over static clutter, with a per-frame ground-truth table.
//!
//! Every pixel is a deterministic function of the seed and the generator
//! configuration: regenerating with the same inputs reproduces the dataset
//! byte for byte. Targets sit at integer centers, so with distractor
//! contrast zero and no clutter the planted region equals the template
//! exactly.

use std::fs;
use std::path::{Path, PathBuf};

use corrfilt_core::signal::Signal2D;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{MotionKind, SynthConfig, SynthKind};
use crate::errors::{Classify, CliError, Result};
use crate::formats::{write_annotations, write_pgm, Annotation};

/// Sidecar metadata written next to a generated dataset so benchmarks can
/// recover the geometry without re-deriving it from pixels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub kind: SynthKind,
    pub seed: u64,
    pub config: SynthConfig,
}

pub fn read_meta(dir: &Path) -> Result<DatasetMeta> {
    let path = dir.join("meta.json");
    let text = fs::read_to_string(&path).input(&format!("reading {}", path.display()))?;
    serde_json::from_str(&text).input(&format!("parsing {}", path.display()))
}

fn write_meta(dir: &Path, meta: &DatasetMeta) -> Result<()> {
    let path = dir.join("meta.json");
    let mut text = serde_json::to_string_pretty(meta).input("serializing dataset metadata")?;
    text.push('\n');
    fs::write(&path, text).input(&format!("writing {}", path.display()))
}

// ---------------------------------------------------------------------------
// Building blocks
// ---------------------------------------------------------------------------

/// White noise smoothed by repeated 3x3 box blurs (clamped edges), then
/// rescaled to peak magnitude 1 around zero mean.
pub(crate) fn smooth_noise(
    rng: &mut ChaCha8Rng,
    height: usize,
    width: usize,
    passes: usize,
) -> Signal2D {
    let mut field: Vec<f64> = (0..height * width)
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    let mut scratch = vec![0.0; field.len()];
    for _ in 0..passes {
        for r in 0..height {
            for c in 0..width {
                let mut sum = 0.0;
                let mut n = 0.0;
                for dr in -1i64..=1 {
                    for dc in -1i64..=1 {
                        let rr = r as i64 + dr;
                        let cc = c as i64 + dc;
                        if rr >= 0 && rr < height as i64 && cc >= 0 && cc < width as i64 {
                            sum += field[rr as usize * width + cc as usize];
                            n += 1.0;
                        }
                    }
                }
                scratch[r * width + c] = sum / n;
            }
        }
        std::mem::swap(&mut field, &mut scratch);
    }
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    for v in field.iter_mut() {
        *v -= mean;
    }
    let peak = field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        for v in field.iter_mut() {
            *v /= peak;
        }
    }
    Signal2D::new(height, width, field).expect("noise field dimensions are positive")
}

/// A high-contrast textured template in `[0, 1]`: a bright center blob over
/// seeded smoothed noise, so instances are easy to tell from raw clutter but
/// still carry enough texture to localize sharply.
///
/// The texture is made even-symmetric about the patch center (averaged with
/// its 180-degree rotation, matching the symmetry the blob and ring already
/// have) so the appearance centroid coincides with the geometric center;
/// correlation peaks on these patches then measure pure translation rather
/// than a per-realization one-pixel lock-point offset.
fn make_template(rng: &mut ChaCha8Rng, side: usize) -> Signal2D {
    let raw = smooth_noise(rng, side, side, 1);
    let texture = Signal2D::from_fn(side, side, |r, c| {
        0.5 * (raw.get(r, c) + raw.get(side - 1 - r, side - 1 - c))
    })
    .expect("template dimensions are positive");
    let center = (side as f64 - 1.0) / 2.0;
    let sigma = side as f64 / 4.0;
    Signal2D::from_fn(side, side, |r, c| {
        let dr = r as f64 - center;
        let dc = c as f64 - center;
        let blob = (-(dr * dr + dc * dc) / (2.0 * sigma * sigma)).exp();
        let ring = if (dr * dr + dc * dc).sqrt() > side as f64 * 0.42 {
            -0.35
        } else {
            0.0
        };
        (0.5 + 0.45 * blob + 0.3 * texture.get(r, c) + ring).clamp(0.0, 1.0)
    })
    .expect("template dimensions are positive")
}

/// Alpha-composite `patch` onto `canvas` with its top-left at `(top, left)`.
fn composite(
    canvas: &mut [f64],
    width: usize,
    patch: &Signal2D,
    top: usize,
    left: usize,
    alpha: f64,
) {
    let (ph, pw) = patch.shape();
    for r in 0..ph {
        for c in 0..pw {
            let idx = (top + r) * width + (left + c);
            canvas[idx] = (1.0 - alpha) * canvas[idx] + alpha * patch.get(r, c);
        }
    }
}

fn background(rng: &mut ChaCha8Rng, side_h: usize, side_w: usize, clutter: f64) -> Vec<f64> {
    let noise = smooth_noise(rng, side_h, side_w, 2);
    noise
        .samples()
        .iter()
        .map(|&v| 0.5 + 0.5 * clutter * v)
        .collect()
}

// ---------------------------------------------------------------------------
// Localization suites
// ---------------------------------------------------------------------------

fn generate_localization_split(
    rng: &mut ChaCha8Rng,
    dir: &Path,
    template: &Signal2D,
    count: usize,
    cfg: &SynthConfig,
) -> Result<()> {
    fs::create_dir_all(dir).input(&format!("creating {}", dir.display()))?;
    let side = cfg.image_size;
    let d = cfg.template_size;
    let margin = d; // keeps a 2x window around any planted center inside the image
    if side < 2 * margin + 1 {
        return Err(CliError::Input(format!(
            "image_size {side} too small for template_size {d} (need at least {})",
            2 * margin + 1
        )));
    }
    let mut annotations = Vec::with_capacity(count);
    for index in 0..count {
        let mut canvas = background(rng, side, side, cfg.clutter);
        // Target at an integer center; top-left = center - d/2.
        let center_r = rng.gen_range(margin..side - margin);
        let center_c = rng.gen_range(margin..side - margin);
        let (top, left) = (center_r - d / 2, center_c - d / 2);

        // Distractors: same template at reduced contrast, kept clear of the
        // target so a distractor hit is an unambiguous localization failure.
        let mut placed = vec![(center_r as i64, center_c as i64)];
        let mut attempts = 0;
        let mut planted = 0;
        while planted < cfg.distractors && attempts < 200 {
            attempts += 1;
            let r = rng.gen_range(margin..side - margin) as i64;
            let c = rng.gen_range(margin..side - margin) as i64;
            let clear = placed
                .iter()
                .all(|&(pr, pc)| (r - pr).abs().max((c - pc).abs()) >= d as i64 + 2);
            if !clear {
                continue;
            }
            placed.push((r, c));
            if cfg.distractor_contrast > 0.0 {
                composite(
                    &mut canvas,
                    side,
                    template,
                    r as usize - d / 2,
                    c as usize - d / 2,
                    cfg.distractor_contrast,
                );
            }
            planted += 1;
        }
        composite(&mut canvas, side, template, top, left, 1.0);

        let image = Signal2D::new(side, side, canvas).expect("canvas dimensions are positive");
        write_pgm(&dir.join(format!("img_{index:04}.pgm")), &image)?;
        annotations.push(Annotation {
            frame: index,
            center: (center_r as f64, center_c as f64),
            size: Some((d, d)),
        });
    }
    write_annotations(&dir.join("annotations.txt"), &annotations)
}

// ---------------------------------------------------------------------------
// Tracking sequences
// ---------------------------------------------------------------------------

/// Integer center path at constant speed, reflecting off the margins.
fn motion_path(cfg: &SynthConfig) -> Result<Vec<(usize, usize)>> {
    let side = cfg.frame_size as f64;
    let margin = cfg.patch_size as f64;
    if side < 2.0 * margin + 4.0 {
        return Err(CliError::Input(format!(
            "frame_size {} too small for patch_size {}",
            cfg.frame_size, cfg.patch_size
        )));
    }
    let (lo, hi) = (margin, side - margin - 1.0);
    let mut r = lo + (hi - lo) * 0.25;
    let mut c = lo + (hi - lo) * 0.25;
    let speed = cfg.step_px;
    // Per-axis velocities keep the per-frame displacement at `step_px`:
    // diagonal splits it across both axes, zigzag sweeps horizontally and
    // reverses at the margins.
    let (mut vr, mut vc) = match cfg.motion {
        MotionKind::Diagonal => (speed / 2f64.sqrt(), speed / 2f64.sqrt()),
        MotionKind::Zigzag => (0.0, speed),
    };
    let mut path = Vec::with_capacity(cfg.frames);
    for _ in 0..cfg.frames {
        path.push((r.round() as usize, c.round() as usize));
        r += vr;
        c += vc;
        if r < lo || r > hi {
            vr = -vr;
            r = r.clamp(lo, hi);
        }
        if c < lo || c > hi {
            vc = -vc;
            c = c.clamp(lo, hi);
        }
    }
    Ok(path)
}

fn generate_tracking(
    rng: &mut ChaCha8Rng,
    dir: &Path,
    cfg: &SynthConfig,
) -> Result<Vec<Annotation>> {
    let frames_dir = dir.join("frames");
    fs::create_dir_all(&frames_dir).input(&format!("creating {}", frames_dir.display()))?;
    let side = cfg.frame_size;
    let d = cfg.patch_size;
    let patch = make_template(rng, d);
    write_pgm(&dir.join("template.pgm"), &patch)?;
    let scene = background(rng, side, side, cfg.clutter);
    let path = motion_path(cfg)?;

    let mut annotations = Vec::with_capacity(path.len());
    for (index, &(center_r, center_c)) in path.iter().enumerate() {
        let mut canvas = scene.clone();
        let (top, left) = (center_r - d / 2, center_c - d / 2);
        composite(&mut canvas, side, &patch, top, left, 1.0);
        let frame = Signal2D::new(side, side, canvas).expect("frame dimensions are positive");
        write_pgm(&frames_dir.join(format!("frame_{index:04}.pgm")), &frame)?;
        annotations.push(Annotation {
            frame: index,
            center: (center_r as f64, center_c as f64),
            size: Some((d, d)),
        });
    }
    write_annotations(&dir.join("ground_truth.txt"), &annotations)?;
    Ok(annotations)
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Generate the dataset described by `cfg` under `out_dir`, returning the
/// files' root directory.
pub fn generate(out_dir: &Path, seed: u64, cfg: &SynthConfig) -> Result<PathBuf> {
    fs::create_dir_all(out_dir).input(&format!("creating {}", out_dir.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match cfg.kind {
        SynthKind::Localization => {
            let template = make_template(&mut rng, cfg.template_size);
            write_pgm(&out_dir.join("template.pgm"), &template)?;
            generate_localization_split(
                &mut rng,
                &out_dir.join("train"),
                &template,
                cfg.train_count,
                cfg,
            )?;
            generate_localization_split(
                &mut rng,
                &out_dir.join("test"),
                &template,
                cfg.test_count,
                cfg,
            )?;
        }
        SynthKind::Tracking => {
            generate_tracking(&mut rng, out_dir, cfg)?;
        }
    }
    write_meta(
        out_dir,
        &DatasetMeta {
            kind: cfg.kind,
            seed,
            config: cfg.clone(),
        },
    )?;
    Ok(out_dir.to_path_buf())
}
