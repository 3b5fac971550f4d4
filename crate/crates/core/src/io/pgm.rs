//! Binary PGM (P5) images, 8- or 16-bit.

use std::path::Path;

use crate::error::{Error, Result};
use crate::render::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BitDepth {
    #[default]
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn maxval(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

/// Encodes `round(clamp(v) · maxval)` per pixel, row-major, big-endian for 16-bit.
pub fn encode_pgm(img: &Image, depth: BitDepth) -> Vec<u8> {
    let maxval = depth.maxval();
    let mut out = format!("P5\n{} {}\n{}\n", img.width(), img.height(), maxval).into_bytes();
    for &v in img.pixels() {
        let q = (v.clamp(0.0, 1.0) * maxval as f64).round() as u32;
        match depth {
            BitDepth::Eight => out.push(q as u8),
            BitDepth::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    out
}

pub fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Data("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1; // single whitespace byte after maxval
    if fields[0] != "P5" {
        return Err(Error::Data(format!("not a binary PGM (magic {:?})", fields[0])));
    }
    let num = |s: &str, what: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Data(format!("bad PGM {what}: {s:?}")))
    };
    let (w, h, maxval) = (num(&fields[1], "width")?, num(&fields[2], "height")?, num(&fields[3], "maxval")?);
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Data(format!("PGM maxval {maxval} out of range")));
    }
    let bpp = if maxval < 256 { 1 } else { 2 };
    let body = bytes.get(pos..).unwrap_or_default();
    if body.len() < w * h * bpp {
        return Err(Error::Data(format!("PGM body has {} bytes, need {}", body.len(), w * h * bpp)));
    }
    let scale = maxval as f64;
    let px = (0..w * h)
        .map(|i| {
            let q = if bpp == 1 { body[i] as u32 } else { u16::from_be_bytes([body[2 * i], body[2 * i + 1]]) as u32 };
            (q as f64 / scale).min(1.0)
        })
        .collect();
    Image::new(w, h, px)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &Image, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, encode_pgm(img, depth)).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Sorted `*.pgm` files in `dir`.
pub fn list_pgm(dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    Ok(files)
}

/// Reads every PGM in `dir` in name order; an empty directory is a data error.
pub fn read_pgm_dir(dir: impl AsRef<Path>) -> Result<Vec<(String, Image)>> {
    let dir = dir.as_ref();
    let files = list_pgm(dir)?;
    if files.is_empty() {
        return Err(Error::Data(format!("no PGM images in {}", dir.display())));
    }
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, read_pgm(&p)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_bit_quantisation() {
        let img = Image::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        let bytes = encode_pgm(&img, BitDepth::Eight);
        assert_eq!(&bytes[..11], b"P5\n3 1\n255\n");
        assert_eq!(&bytes[11..], &[0, 128, 255]);
        let back = decode_pgm(&bytes).unwrap();
        assert_eq!(back.pixels(), &[0.0, 128.0 / 255.0, 1.0]);
    }

    #[test]
    fn sixteen_bit_round_trip_is_exact_on_the_grid() {
        let px: Vec<f64> = (0..16).map(|i| (i * 4000) as f64 / 65535.0).collect();
        let img = Image::new(4, 4, px).unwrap();
        assert_eq!(decode_pgm(&encode_pgm(&img, BitDepth::Sixteen)).unwrap(), img);
    }

    #[test]
    fn comments_in_header_are_skipped() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend([10, 20]);
        assert_eq!(decode_pgm(&bytes).unwrap().width(), 2);
    }

    #[test]
    fn malformed_input_is_a_data_error() {
        assert!(matches!(decode_pgm(b"P2\n1 1\n255\n0"), Err(Error::Data(_))));
        assert!(matches!(decode_pgm(b"P5\n4 4\n255\n\x00"), Err(Error::Data(_))));
    }
}
