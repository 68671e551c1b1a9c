//! Versioned binary container for trained models.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic          4 bytes  "MLP1"
//! activation     u8       0 = relu, 1 = identity
//! reserved       u8       0
//! dim count      u16
//! dims           u32 * dim count
//! norm mean      f64 * 7
//! norm std       f64 * 7
//! per layer:     weights f64 * (out * in), row-major [out][in]; biases f64 * out
//! crc32          u32      over every preceding byte
//! ```

use std::path::Path;

use crate::checksum::crc32;
use crate::error::{Error, Result};
use crate::net::mlp::{Activation, MlpModel, Normalization, INPUT_DIM};

pub const MODEL_MAGIC: &[u8; 4] = b"MLP1";

pub fn to_bytes(model: &MlpModel) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MODEL_MAGIC);
    buf.push(model.activation.code());
    buf.push(0);
    buf.extend_from_slice(&(model.dims.len() as u16).to_le_bytes());
    for &d in &model.dims {
        buf.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in model.norm.mean {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in model.norm.std {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for layer in &model.layers {
        for w in &layer.weights {
            buf.extend_from_slice(&w.to_le_bytes());
        }
        for b in &layer.biases {
            buf.extend_from_slice(&b.to_le_bytes());
        }
    }
    let crc = crc32(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::Corrupt(format!(
                "truncated: wanted {n} bytes at offset {}, have {}",
                self.pos,
                self.data.len() - self.pos
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn from_bytes(data: &[u8]) -> Result<MlpModel> {
    if data.len() < MODEL_MAGIC.len() + 4 {
        return Err(Error::Corrupt("container too short".into()));
    }
    let (body, crc_bytes) = data.split_at(data.len() - 4);
    let stored = u32::from_le_bytes(crc_bytes.try_into().unwrap());
    let actual = crc32(body);
    if stored != actual {
        return Err(Error::Corrupt(format!(
            "crc mismatch: stored {stored:08x}, computed {actual:08x}"
        )));
    }

    let mut cur = Cursor { data: body, pos: 0 };
    if cur.take(4)? != MODEL_MAGIC {
        return Err(Error::Corrupt("bad magic".into()));
    }
    let activation = Activation::from_code(cur.u8()?)?;
    let _reserved = cur.u8()?;
    let dim_count = cur.u16()? as usize;
    if dim_count < 2 {
        return Err(Error::Corrupt(format!("bad dim count {dim_count}")));
    }
    let mut dims = Vec::with_capacity(dim_count);
    for _ in 0..dim_count {
        dims.push(cur.u32()? as usize);
    }
    let mut norm = Normalization::identity();
    for i in 0..INPUT_DIM {
        norm.mean[i] = cur.f64()?;
    }
    for i in 0..INPUT_DIM {
        norm.std[i] = cur.f64()?;
    }

    let mut model = MlpModel::zeroed(dims, activation)
        .map_err(|e| Error::Corrupt(format!("invalid dims: {e}")))?;
    model.norm = norm;
    for layer in &mut model.layers {
        for w in &mut layer.weights {
            *w = cur.f64()?;
        }
        for b in &mut layer.biases {
            *b = cur.f64()?;
        }
    }
    if cur.pos != body.len() {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes after parameters",
            body.len() - cur.pos
        )));
    }
    if !model.is_finite() {
        return Err(Error::Corrupt("non-finite parameters".into()));
    }
    Ok(model)
}

pub fn save(model: &MlpModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<MlpModel> {
    from_bytes(&std::fs::read(path)?)
}
