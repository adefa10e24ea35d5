//! VGT1 raw tensor files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "VGT1"
//! 4       4     width     u32 little-endian
//! 8       4     height    u32 little-endian
//! 12      4     channels  u32 little-endian (1 or 3)
//! 16      w*h*c payload, u8, row-major, channel-interleaved
//! ```
//!
//! Nothing may follow the payload.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{payload_len, ImageTensor};

pub const MAGIC: [u8; 4] = *b"VGT1";
pub const HEADER_LEN: usize = 16;

pub fn encode(img: &ImageTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + img.pixels().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&img.width().to_le_bytes());
    out.extend_from_slice(&img.height().to_le_bytes());
    out.extend_from_slice(&img.channels().to_le_bytes());
    out.extend_from_slice(img.pixels());
    out
}

pub fn decode(bytes: &[u8]) -> Result<ImageTensor> {
    let magic_len = bytes.len().min(MAGIC.len());
    if bytes[..magic_len] != MAGIC[..magic_len] {
        return Err(Error::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated);
    }
    let field = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let (width, height, channels) = (field(4), field(8), field(12));
    if channels != 1 && channels != 3 {
        return Err(Error::UnsupportedChannels(channels));
    }
    let payload = payload_len(width, height, channels)
        .and_then(|p| p.checked_add(HEADER_LEN))
        .ok_or(Error::DimensionOverflow)?;
    match bytes.len().cmp(&payload) {
        std::cmp::Ordering::Less => Err(Error::Truncated),
        std::cmp::Ordering::Greater => Err(Error::TrailingBytes),
        std::cmp::Ordering::Equal => {
            ImageTensor::new(width, height, channels, bytes[HEADER_LEN..].to_vec())
        }
    }
}

pub fn write_tensor(img: &ImageTensor, path: &Path) -> Result<()> {
    fs::write(path, encode(img))?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<ImageTensor> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_two_layout() {
        let img = ImageTensor::new(2, 2, 1, vec![0, 255, 128, 1]).unwrap();
        let bytes = encode(&img);
        assert_eq!(bytes.len(), 20);
        assert_eq!(
            bytes,
            [b'V', b'G', b'T', b'1', 2, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 0, 255, 128, 1]
        );
        assert_eq!(decode(&bytes).unwrap(), img);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.vgt");
        let img = ImageTensor::new(3, 1, 3, (0..9).collect()).unwrap();
        write_tensor(&img, &p).unwrap();
        assert_eq!(fs::metadata(&p).unwrap().len(), 25);
        assert_eq!(read_tensor(&p).unwrap(), img);
    }

    #[test]
    fn corrupt_inputs() {
        let good = encode(&ImageTensor::new(2, 2, 3, vec![7; 12]).unwrap());

        let mut bad = good.clone();
        bad[0] = b'X';
        let err = decode(&bad).unwrap_err();
        assert!(matches!(err, Error::BadMagic));
        assert_eq!(err.to_string(), "bad magic");
        assert!(matches!(decode(b"PNG"), Err(Error::BadMagic)));

        assert!(matches!(decode(&good[..10]), Err(Error::Truncated)));
        assert!(matches!(
            decode(&good[..good.len() - 1]),
            Err(Error::Truncated)
        ));
        assert!(matches!(decode(b"VG"), Err(Error::Truncated)));
        assert!(matches!(decode(b""), Err(Error::Truncated)));

        let mut long = good.clone();
        long.push(0);
        assert!(matches!(decode(&long), Err(Error::TrailingBytes)));

        let mut chans = good.clone();
        chans[12] = 2;
        assert!(matches!(decode(&chans), Err(Error::UnsupportedChannels(2))));
    }

    #[test]
    #[cfg(target_pointer_width = "64")]
    fn huge_dimensions_do_not_allocate() {
        let mut bytes = MAGIC.to_vec();
        bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        bytes.extend_from_slice(&u32::MAX.to_le_bytes());
        bytes.extend_from_slice(&3u32.to_le_bytes());
        // u32::MAX^2 * 3 exceeds a 64-bit usize.
        assert!(matches!(decode(&bytes), Err(Error::DimensionOverflow)));
    }

    fn tensors() -> impl Strategy<Value = ImageTensor> {
        (0u32..16, 0u32..16, prop_oneof![Just(1u32), Just(3u32)]).prop_flat_map(|(w, h, c)| {
            proptest::collection::vec(any::<u8>(), (w * h * c) as usize)
                .prop_map(move |px| ImageTensor::new(w, h, c, px).unwrap())
        })
    }

    proptest! {
        #[test]
        fn round_trip(img in tensors()) {
            let bytes = encode(&img);
            prop_assert_eq!(bytes.len(), HEADER_LEN + img.pixels().len());
            prop_assert_eq!(decode(&bytes).unwrap(), img);
        }
    }
}
