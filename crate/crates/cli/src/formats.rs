//! On-disk formats: grayscale images, trained-model containers, and
//! annotation tables.
//!
//! * Images are written as binary PGM (`P5`, maxval 255); both PGM and PNG
//!   are accepted on ingest. Pixels map to `f64` in `[0, 1]`.
//! * Trained models use a little-endian binary container (magic `CFLB`)
//!   holding the spatial taps, the support placement, the ridge weight, and
//!   the accumulated energy statistics, so a loaded model can keep adapting.
//! * Annotation tables are plain text: one
//!   `frame_index,center_row,center_col[,height,width]` row per line,
//!   0-indexed frames, `#` comments allowed.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use corrfilt_core::signal::{MaskSpec, Signal2D};
use corrfilt_core::solvers::FilterModel;
use corrfilt_core::spectral::{Complex64, SpectralEnergies, Spectrum2D};

use crate::errors::{Classify, CliError, Result};

// ---------------------------------------------------------------------------
// Grayscale images
// ---------------------------------------------------------------------------

/// Write a signal as a binary PGM, clamping samples to `[0, 1]`.
pub fn write_pgm(path: &Path, image: &Signal2D) -> Result<()> {
    let (h, w) = image.shape();
    let mut bytes = Vec::with_capacity(32 + h * w);
    bytes.extend_from_slice(format!("P5\n{w} {h}\n255\n").as_bytes());
    for &v in image.samples() {
        bytes.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
    }
    fs::write(path, bytes).input(&format!("writing {}", path.display()))
}

/// Read a grayscale image (`.pgm` or `.png`), mapping pixels to `[0, 1]`.
pub fn read_image(path: &Path) -> Result<Signal2D> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .unwrap_or_default();
    match ext.as_str() {
        "pgm" => read_pgm(path),
        "png" => read_png(path),
        other => Err(CliError::input_at(
            path,
            format!("unsupported image extension {other:?} (expected pgm or png)"),
        )),
    }
}

fn read_pgm(path: &Path) -> Result<Signal2D> {
    let bytes = fs::read(path).input(&format!("reading {}", path.display()))?;
    let mut cursor = 0usize;

    fn skip_separators(bytes: &[u8], mut i: usize) -> usize {
        loop {
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                return i;
            }
        }
    }

    fn token(bytes: &[u8], i: &mut usize) -> Option<String> {
        *i = skip_separators(bytes, *i);
        let start = *i;
        while *i < bytes.len() && !bytes[*i].is_ascii_whitespace() {
            *i += 1;
        }
        if start == *i {
            None
        } else {
            Some(String::from_utf8_lossy(&bytes[start..*i]).into_owned())
        }
    }

    let bad = |message: &str| CliError::input_at(path, message);

    let magic = token(&bytes, &mut cursor).ok_or_else(|| bad("empty file"))?;
    if magic != "P5" {
        return Err(bad(&format!("not a binary PGM (magic {magic:?})")));
    }
    let mut dim = |name: &str| -> Result<usize> {
        token(&bytes, &mut cursor)
            .ok_or_else(|| bad(&format!("missing {name}")))?
            .parse::<usize>()
            .input(&format!("{}: parsing {name}", path.display()))
    };
    let w = dim("width")?;
    let h = dim("height")?;
    let maxval = dim("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(bad(&format!(
            "unsupported maxval {maxval} (expected 1..=255)"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if cursor >= bytes.len() || !bytes[cursor].is_ascii_whitespace() {
        return Err(bad("missing header/raster separator"));
    }
    cursor += 1;
    let need = h
        .checked_mul(w)
        .ok_or_else(|| bad("image dimensions overflow"))?;
    let raster = &bytes[cursor..];
    if raster.len() < need {
        return Err(bad(&format!(
            "raster truncated: expected {need} bytes, found {}",
            raster.len()
        )));
    }
    let scale = 1.0 / maxval as f64;
    let samples = raster[..need].iter().map(|&b| b as f64 * scale).collect();
    Signal2D::new(h, w, samples).input(&path.display().to_string())
}

fn read_png(path: &Path) -> Result<Signal2D> {
    let img = image::open(path)
        .input(&format!("reading {}", path.display()))?
        .into_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let samples = img.as_raw().iter().map(|&b| b as f64 / 255.0).collect();
    Signal2D::new(h, w, samples).input(&path.display().to_string())
}

/// List the images in a directory, ordered by the first integer embedded in
/// each file name (ties and unnumbered names fall back to lexicographic).
pub fn list_images(dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    let entries = fs::read_dir(dir).input(&format!("reading directory {}", dir.display()))?;
    let mut paths: Vec<std::path::PathBuf> = Vec::new();
    for entry in entries {
        let path = entry
            .input(&format!("reading directory {}", dir.display()))?
            .path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        if path.is_file() && (ext == "pgm" || ext == "png") {
            paths.push(path);
        }
    }
    fn embedded_number(path: &Path) -> Option<u64> {
        let name = path.file_stem()?.to_str()?;
        let digits: String = name.chars().filter(|c| c.is_ascii_digit()).collect();
        digits.parse().ok()
    }
    paths.sort_by(|a, b| {
        let ka = embedded_number(a);
        let kb = embedded_number(b);
        ka.cmp(&kb).then_with(|| a.cmp(b))
    });
    if paths.is_empty() {
        return Err(CliError::input_at(dir, "no .pgm or .png images found"));
    }
    Ok(paths)
}

// ---------------------------------------------------------------------------
// Model container
// ---------------------------------------------------------------------------

const MODEL_MAGIC: &[u8; 4] = b"CFLB";
const MODEL_VERSION: u32 = 1;

/// Serialize a trained model. Layout (all little-endian):
/// magic `CFLB`, version `u32`, filter dims `u32 x2`, window dims `u32 x2`,
/// support offset `u32 x2`, lambda `f64`, exemplar count `u64`, filter taps
/// (`f64`, row-major), auto-energy spectrum (`f64` re/im pairs, row-major),
/// cross-energy spectrum (same).
pub fn write_model(path: &Path, model: &FilterModel) -> Result<()> {
    let (fh, fw) = model.filter().shape();
    let (oh, ow) = model.mask().outer();
    let (or_, oc) = model.mask().offset();
    let mut bytes = Vec::new();
    bytes.extend_from_slice(MODEL_MAGIC);
    bytes.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    for dim in [fh, fw, oh, ow, or_, oc] {
        let dim = u32::try_from(dim).input("model dimensions exceed u32")?;
        bytes.extend_from_slice(&dim.to_le_bytes());
    }
    bytes.extend_from_slice(&model.lambda().to_le_bytes());
    bytes.extend_from_slice(&(model.energies().count() as u64).to_le_bytes());
    for &tap in model.filter().samples() {
        bytes.extend_from_slice(&tap.to_le_bytes());
    }
    for spectrum in [model.energies().auto(), model.energies().cross()] {
        for c in spectrum.coefficients() {
            bytes.extend_from_slice(&c.re.to_le_bytes());
            bytes.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    fs::write(path, bytes).input(&format!("writing {}", path.display()))
}

fn take_bytes<'a>(reader: &mut &'a [u8], n: usize, path: &Path) -> Result<&'a [u8]> {
    if reader.len() < n {
        return Err(CliError::input_at(path, "container truncated"));
    }
    let (head, tail) = reader.split_at(n);
    *reader = tail;
    Ok(head)
}

fn take_u32(reader: &mut &[u8], path: &Path) -> Result<u32> {
    let b = take_bytes(reader, 4, path)?;
    Ok(u32::from_le_bytes(b.try_into().unwrap()))
}

fn take_f64s(reader: &mut &[u8], n: usize, path: &Path) -> Result<Vec<f64>> {
    let b = take_bytes(
        reader,
        n.checked_mul(8)
            .ok_or_else(|| CliError::input_at(path, "container dimensions overflow"))?,
        path,
    )?;
    Ok(b.chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn take_spectrum(reader: &mut &[u8], h: usize, w: usize, path: &Path) -> Result<Spectrum2D> {
    let parts = take_f64s(
        reader,
        h.checked_mul(w)
            .and_then(|n| n.checked_mul(2))
            .ok_or_else(|| CliError::input_at(path, "container dimensions overflow"))?,
        path,
    )?;
    let coeffs = parts
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    Spectrum2D::new(h, w, coeffs).input(&path.display().to_string())
}

/// Load a model written by [`write_model`].
pub fn read_model(path: &Path) -> Result<FilterModel> {
    let bytes = fs::read(path).input(&format!("reading {}", path.display()))?;
    let mut reader = &bytes[..];
    let bad = |message: &str| CliError::input_at(path, message);

    let magic = take_bytes(&mut reader, 4, path)?;
    if magic != MODEL_MAGIC {
        return Err(bad("not a model container (bad magic)"));
    }
    let version = take_u32(&mut reader, path)?;
    if version != MODEL_VERSION {
        return Err(bad(&format!("unsupported container version {version}")));
    }
    let fh = take_u32(&mut reader, path)? as usize;
    let fw = take_u32(&mut reader, path)? as usize;
    let oh = take_u32(&mut reader, path)? as usize;
    let ow = take_u32(&mut reader, path)? as usize;
    let or_ = take_u32(&mut reader, path)? as usize;
    let oc = take_u32(&mut reader, path)? as usize;
    let lambda = take_f64s(&mut reader, 1, path)?[0];
    let count = {
        let b = take_bytes(&mut reader, 8, path)?;
        u64::from_le_bytes(b.try_into().unwrap()) as usize
    };
    let taps = take_f64s(
        &mut reader,
        fh.checked_mul(fw)
            .ok_or_else(|| bad("container dimensions overflow"))?,
        path,
    )?;
    let auto = take_spectrum(&mut reader, oh, ow, path)?;
    let cross = take_spectrum(&mut reader, oh, ow, path)?;
    if !reader.is_empty() {
        return Err(bad("trailing bytes after container payload"));
    }

    let filter = Signal2D::new(fh, fw, taps).input(&path.display().to_string())?;
    let mask = MaskSpec::new((oh, ow), (fh, fw), (or_, oc)).input(&path.display().to_string())?;
    let energies =
        SpectralEnergies::from_parts(auto, cross, count).input(&path.display().to_string())?;
    FilterModel::new(filter, energies, mask, lambda).input(&path.display().to_string())
}

// ---------------------------------------------------------------------------
// Annotation tables
// ---------------------------------------------------------------------------

/// One annotated frame: a 0-indexed frame number, a target center, and an
/// optional box size.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub frame: usize,
    pub center: (f64, f64),
    pub size: Option<(usize, usize)>,
}

/// Parse an annotation table: `frame_index,center_row,center_col[,height,width]`
/// per line, `#` comments and blank lines ignored. Rows must be sorted by
/// frame index and contiguous from zero.
pub fn read_annotations(path: &Path) -> Result<Vec<Annotation>> {
    let text = fs::read_to_string(path).input(&format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad =
            |message: String| CliError::input_at(path, format!("line {}: {message}", line_no + 1));
        if fields.len() != 3 && fields.len() != 5 {
            return Err(bad(format!(
                "expected 3 or 5 comma-separated fields, found {}",
                fields.len()
            )));
        }
        let frame: usize = fields[0]
            .parse()
            .map_err(|e| bad(format!("frame index: {e}")))?;
        let row: f64 = fields[1]
            .parse()
            .map_err(|e| bad(format!("center row: {e}")))?;
        let col: f64 = fields[2]
            .parse()
            .map_err(|e| bad(format!("center col: {e}")))?;
        let size = if fields.len() == 5 {
            let h: usize = fields[3].parse().map_err(|e| bad(format!("height: {e}")))?;
            let w: usize = fields[4].parse().map_err(|e| bad(format!("width: {e}")))?;
            Some((h, w))
        } else {
            None
        };
        if frame != rows.len() {
            return Err(bad(format!(
                "frame indices must be contiguous from 0 (expected {}, found {frame})",
                rows.len()
            )));
        }
        rows.push(Annotation {
            frame,
            center: (row, col),
            size,
        });
    }
    if rows.is_empty() {
        return Err(CliError::input_at(path, "annotation table is empty"));
    }
    Ok(rows)
}

/// Write an annotation table in the format accepted by [`read_annotations`].
pub fn write_annotations(path: &Path, rows: &[Annotation]) -> Result<()> {
    let mut out = String::from("# frame_index,center_row,center_col[,height,width]\n");
    for a in rows {
        match a.size {
            Some((h, w)) => {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    a.frame, a.center.0, a.center.1, h, w
                ));
            }
            None => out.push_str(&format!("{},{},{}\n", a.frame, a.center.0, a.center.1)),
        }
    }
    let mut file = fs::File::create(path).input(&format!("creating {}", path.display()))?;
    file.write_all(out.as_bytes())
        .input(&format!("writing {}", path.display()))
}
