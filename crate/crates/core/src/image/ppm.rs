//! Binary PPM (P6) and PGM (P5) read/write, maxval 255.
//!
//! PPM P6 is the interchange format for RGB images; PGM P5 carries masks and
//! heatmaps. Writers round half-up so golden files are deterministic.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{Image, ImageError, Result};

/// Rounds a `[0,1]` sample to a byte, half-up: 0.5 -> 128.
#[inline]
fn quantize(v: f64) -> u8 {
    (v * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Loads a binary PPM (P6, 3 channels) or PGM (P5, 1 channel) file.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path.as_ref())?).read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub(crate) fn decode(bytes: &[u8]) -> Result<Image> {
    let magic = bytes.get(..2).ok_or_else(|| {
        ImageError::CorruptFile("file shorter than magic number".into())
    })?;
    let channels = match magic {
        b"P6" => 3,
        b"P5" => 1,
        _ => {
            return Err(ImageError::UnsupportedFormat(format!(
                "magic {:?} (only binary PPM/PGM supported)",
                String::from_utf8_lossy(magic)
            )))
        }
    };

    let mut pos = 2;
    let mut fields = [0usize; 3]; // width, height, maxval
    for field in fields.iter_mut() {
        *field = parse_header_int(bytes, &mut pos)?;
    }
    let (width, height, maxval) = (fields[0], fields[1], fields[2]);
    if maxval != 255 {
        return Err(ImageError::UnsupportedFormat(format!(
            "maxval {maxval} (only 255 supported)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(ImageError::ZeroDimension);
    }
    // Exactly one whitespace byte separates the header from the payload.
    pos += 1;
    let need = width * height * channels;
    let payload = bytes
        .get(pos..pos + need)
        .ok_or_else(|| ImageError::CorruptFile(format!("payload shorter than {need} bytes")))?;
    let data = payload.iter().map(|&b| b as f64 / 255.0).collect();
    Image::from_data(height, width, channels, data)
}

fn parse_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    // Skip whitespace and '#' comment lines.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(_) => break,
            None => return Err(ImageError::CorruptFile("truncated header".into())),
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(ImageError::CorruptFile("expected integer in header".into()));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ImageError::CorruptFile("bad header integer".into()))
}

/// Saves an image as binary PPM (3 channels) or PGM (1 channel).
///
/// `comment` lines (without the leading `#`) are embedded in the header;
/// the CLI uses this to record the seed of the producing run.
pub fn save_image_with_comment(
    img: &Image,
    path: impl AsRef<Path>,
    comment: Option<&str>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    let magic = if img.channels() == 3 { "P6" } else { "P5" };
    writeln!(w, "{magic}")?;
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(w, "# {line}")?;
        }
    }
    writeln!(w, "{} {}", img.width(), img.height())?;
    writeln!(w, "255")?;
    let bytes: Vec<u8> = img.data().iter().map(|&v| quantize(v)).collect();
    w.write_all(&bytes)?;
    Ok(())
}

/// Saves an image as binary PPM/PGM (maxval 255, round-half-up).
pub fn save_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    save_image_with_comment(img, path, None)
}

/// Saves a 1-channel image as PGM P5.
pub fn save_pgm(img: &Image, path: impl AsRef<Path>, comment: Option<&str>) -> Result<()> {
    if img.channels() != 1 {
        return Err(ImageError::WrongChannelCount {
            expected: 1,
            got: img.channels(),
        });
    }
    save_image_with_comment(img, path, comment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn p6_all_white_loads_as_ones() {
        let bytes = b"P6\n2 2\n255\n\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff\xff";
        let img = decode(bytes).unwrap();
        assert_eq!((img.height(), img.width(), img.channels()), (2, 2, 3));
        assert!(img.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn p6_single_black_pixel() {
        let bytes = b"P6\n1 1\n255\n\x00\x00\x00";
        let img = decode(bytes).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn short_payload_is_corrupt() {
        // Declares 4x4 but carries only 3 pixels.
        let mut bytes = b"P6\n4 4\n255\n".to_vec();
        bytes.extend_from_slice(&[7u8; 9]);
        assert!(matches!(decode(&bytes), Err(ImageError::CorruptFile(_))));
    }

    #[test]
    fn unknown_magic_rejected() {
        assert!(matches!(
            decode(b"P3\n1 1\n255\n0 0 0"),
            Err(ImageError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn round_trip_within_quantization() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let img = Image::from_fn(8, 8, 3, |_, _, _| rng.gen::<f64>()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.ppm");
        save_image(&img, &path).unwrap();
        let back = load_image(&path).unwrap();
        let max_diff = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max_diff <= 1.0 / 255.0, "max diff {max_diff}");
    }

    #[test]
    fn half_gray_rounds_up_to_128() {
        let img = Image::from_fn(3, 3, 3, |_, _, _| 0.5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gray.ppm");
        save_image(&img, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let payload = &bytes[bytes.len() - 27..];
        assert!(payload.iter().all(|&b| b == 128));
    }

    #[test]
    fn unwritable_path_is_io_failure() {
        let img = Image::new(2, 2, 3).unwrap();
        let err = save_image(&img, "/nonexistent-dir/x/y.ppm").unwrap_err();
        assert!(matches!(err, ImageError::IoFailure(_)));
    }

    #[test]
    fn comments_in_header_are_skipped() {
        let bytes = b"P5\n# seed=42\n2 1\n255\n\x80\x40";
        let img = decode(bytes).unwrap();
        assert_eq!(img.channels(), 1);
        assert_eq!(img.get(0, 0, 0), 128.0 / 255.0);
    }
}
