//! Single-file binary persistence for [`DatasetIndex`].
//!
//! All integers are little-endian.
//!
//! ```text
//! header
//!   magic            8 bytes  "LGHPIDX1"
//!   version          u32      1
//!   kind             u8       0 = lghp, 1 = lbp
//!   binning          u8       0 = full-512, 1 = paper-256, 2 = u2
//!   reserved         u16      0
//!   radius_limit     u32
//!   side             u32
//!   grid             u32
//!   gabor_kernels    u32      0 when Gabor prefiltering is off
//!   per kernel:
//!     frequency      f64
//!     sigma_s        f64
//!     sigma_t        f64
//!     orientation    u32      degrees, 0 or 90
//!   descriptor_len   u32
//!   entry_count      u32
//! entries (entry_count times)
//!   image_id         u32
//!   label            u32
//!   path_len         u32
//!   path             path_len bytes of UTF-8
//!   counts           descriptor_len × u32
//! ```
//!
//! Writers produce a sibling temporary file and rename it into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::config::{Binning, DescriptorConfig, DescriptorKind, LghpParams};
use crate::error::{Error, Result};
use crate::gabor::{GaborOrientation, GaborSpec};
use crate::index::{DatasetIndex, IndexEntry};

pub const MAGIC: &[u8; 8] = b"LGHPIDX1";
pub const VERSION: u32 = 1;

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn as_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidParameter(format!("{what} {v} exceeds u32")))
}

/// Serializes an index to bytes.
pub fn encode_index(index: &DatasetIndex) -> Result<Vec<u8>> {
    let config = index.config();
    let len = config.descriptor_len();
    let mut buf = Vec::with_capacity(64 + index.len() * (12 + 4 * len));
    buf.extend_from_slice(MAGIC);
    put_u32(&mut buf, VERSION);
    buf.push(match config.kind {
        DescriptorKind::Lghp => 0,
        DescriptorKind::Lbp => 1,
    });
    buf.push(match config.params.binning {
        Binning::Full512 => 0,
        Binning::Paper256 => 1,
        Binning::U2 => 2,
    });
    buf.extend_from_slice(&[0, 0]);
    put_u32(
        &mut buf,
        as_u32(config.params.radius_limit, "radius limit")?,
    );
    put_u32(&mut buf, as_u32(config.params.side, "side")?);
    put_u32(&mut buf, as_u32(config.params.grid, "grid")?);
    put_u32(&mut buf, as_u32(config.gabor.len(), "gabor kernel count")?);
    for g in &config.gabor {
        put_f64(&mut buf, g.frequency);
        put_f64(&mut buf, g.sigma_s);
        put_f64(&mut buf, g.sigma_t);
        put_u32(&mut buf, g.orientation.degrees());
    }
    put_u32(&mut buf, as_u32(len, "descriptor length")?);
    put_u32(&mut buf, as_u32(index.len(), "entry count")?);
    for e in index.entries() {
        put_u32(&mut buf, e.image_id);
        put_u32(&mut buf, e.label);
        put_u32(&mut buf, as_u32(e.path.len(), "path length")?);
        buf.extend_from_slice(e.path.as_bytes());
        for &c in &e.counts {
            put_u32(&mut buf, c);
        }
    }
    Ok(buf)
}

pub fn save_index(index: &DatasetIndex, path: &Path) -> Result<()> {
    let bytes = encode_index(index)?;
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::Io(e)
    })
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&end| end <= self.buf.len())
            .ok_or_else(|| Error::CorruptFile(format!("truncated while reading {what}")))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptFile(msg.into())
}

/// Parses bytes produced by [`encode_index`].
pub fn decode_index(bytes: &[u8]) -> Result<DatasetIndex> {
    if bytes.len() < MAGIC.len() {
        return Err(if MAGIC.starts_with(bytes) {
            corrupt("truncated magic")
        } else {
            Error::BadMagic
        });
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic);
    }
    let mut r = Reader {
        buf: bytes,
        pos: MAGIC.len(),
    };
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let kind = match r.u8("descriptor kind")? {
        0 => DescriptorKind::Lghp,
        1 => DescriptorKind::Lbp,
        k => return Err(corrupt(format!("unknown descriptor kind {k}"))),
    };
    let binning = match r.u8("binning")? {
        0 => Binning::Full512,
        1 => Binning::Paper256,
        2 => Binning::U2,
        b => return Err(corrupt(format!("unknown binning {b}"))),
    };
    r.take(2, "reserved")?;
    let params = LghpParams {
        radius_limit: r.u32("radius limit")? as usize,
        side: r.u32("side")? as usize,
        grid: r.u32("grid")? as usize,
        binning,
    };
    let kernels = r.u32("gabor kernel count")? as usize;
    if kernels > r.remaining() / 28 {
        return Err(corrupt("gabor kernel count exceeds file size"));
    }
    let mut gabor = Vec::with_capacity(kernels);
    for _ in 0..kernels {
        let frequency = r.f64("gabor frequency")?;
        let sigma_s = r.f64("gabor sigma_s")?;
        let sigma_t = r.f64("gabor sigma_t")?;
        let deg = r.u32("gabor orientation")?;
        let orientation = GaborOrientation::from_degrees(deg)
            .ok_or_else(|| corrupt(format!("unsupported gabor orientation {deg}")))?;
        gabor.push(GaborSpec {
            frequency,
            sigma_s,
            sigma_t,
            orientation,
        });
    }
    let config = DescriptorConfig {
        kind,
        params,
        gabor,
    };
    let declared_len = r.u32("descriptor length")? as usize;
    if declared_len != config.descriptor_len() {
        return Err(corrupt(format!(
            "descriptor length {declared_len} disagrees with configuration ({})",
            config.descriptor_len()
        )));
    }
    let count = r.u32("entry count")? as usize;
    let min_record = 12 + 4 * declared_len;
    if count > r.remaining() / min_record.max(1) {
        return Err(corrupt(format!(
            "{count} entries cannot fit in {} remaining bytes",
            r.remaining()
        )));
    }
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let image_id = r.u32("image id")?;
        let label = r.u32("label")?;
        let path_len = r.u32("path length")? as usize;
        let path = std::str::from_utf8(r.take(path_len, "path")?)
            .map_err(|_| corrupt("path is not UTF-8"))?
            .to_owned();
        let counts = r
            .take(4 * declared_len, "counts")?
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        entries.push(IndexEntry {
            image_id,
            label,
            path,
            counts,
        });
    }
    if r.remaining() != 0 {
        return Err(corrupt(format!("{} trailing bytes", r.remaining())));
    }
    DatasetIndex::new(config, entries).map_err(|e| corrupt(e.to_string()))
}

pub fn load_index(path: &Path) -> Result<DatasetIndex> {
    decode_index(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gabor::default_bank;

    fn sample(n: u32, gabor: bool) -> DatasetIndex {
        let mut config = DescriptorConfig::lghp(LghpParams {
            radius_limit: 1,
            side: 16,
            binning: Binning::U2,
            grid: 1,
        });
        if gabor {
            config.gabor = default_bank();
        }
        let len = config.descriptor_len();
        let entries = (0..n)
            .map(|i| IndexEntry {
                image_id: i,
                label: i / 2,
                path: format!("faces/s{}/{i}.pgm", i / 2),
                counts: (0..len as u32).map(|k| k * 7 + i).collect(),
            })
            .collect();
        DatasetIndex::new(config, entries).unwrap()
    }

    #[test]
    fn empty_index_is_header_only() {
        let bytes = encode_index(&sample(0, false)).unwrap();
        assert_eq!(bytes.len(), 8 + 4 + 4 + 4 * 4 + 4 + 4);
        let with_bank = encode_index(&sample(0, true)).unwrap();
        assert_eq!(with_bank.len(), bytes.len() + 4 * 28);
        assert_eq!(decode_index(&bytes).unwrap(), sample(0, false));
    }

    #[test]
    fn round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let idx = sample(5, true);
        let (a, b) = (dir.path().join("a.idx"), dir.path().join("b.idx"));
        save_index(&idx, &a).unwrap();
        save_index(&idx, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert_eq!(load_index(&a).unwrap(), idx);
        let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(leftovers.len(), 2);
    }

    #[test]
    fn rejects_damage() {
        let bytes = encode_index(&sample(3, false)).unwrap();
        assert!(matches!(
            decode_index(&bytes[..bytes.len() - 1]),
            Err(Error::CorruptFile(_))
        ));
        assert!(matches!(
            decode_index(&bytes[..20]),
            Err(Error::CorruptFile(_))
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode_index(&extra), Err(Error::CorruptFile(_))));

        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode_index(&magic), Err(Error::BadMagic)));
        assert!(matches!(decode_index(b"PNG"), Err(Error::BadMagic)));

        let mut version = bytes.clone();
        version[8] = 2;
        assert!(matches!(
            decode_index(&version),
            Err(Error::UnsupportedVersion(2))
        ));

        // declared descriptor length disagreeing with the configuration
        let mut len = bytes;
        let at = 8 + 4 + 4 + 16;
        len[at] ^= 1;
        assert!(matches!(decode_index(&len), Err(Error::CorruptFile(_))));
    }
}
