//! Binary model checkpoints. All integers and floats little-endian:
//!
//! ```text
//! b"MR2CKPT"                       magic, 7 bytes
//! u32 version                      currently 1
//! u32 board size, u32 input planes
//! config: u32 channels, u32 blocks, u32 policy_channels, u32 value_hidden,
//!         u32 epochs, u32 batch_size, f64 learning_rate, f64 dropout, f64 l2
//! u32 tensor count
//! per tensor, in layout order: u32 length, then length x f32
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::net::{Arch, PolicyValueNet};
use super::scalar::Scalar;
use super::{ModelConfig, ModelError};

pub const CHECKPOINT_MAGIC: &[u8; 7] = b"MR2CKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

fn corrupt(msg: impl Into<String>) -> ModelError {
    ModelError::CorruptCheckpoint(msg.into())
}

pub fn save_checkpoint<F: Scalar>(net: &PolicyValueNet<F>, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let bytes = to_bytes(net);
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn load_checkpoint<F: Scalar>(path: impl AsRef<Path>) -> Result<PolicyValueNet<F>, ModelError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}

/// Loads a checkpoint and checks that it was built for boards of side `size`.
pub fn load_checkpoint_for_board<F: Scalar>(
    path: impl AsRef<Path>,
    size: usize,
) -> Result<PolicyValueNet<F>, ModelError> {
    let net: PolicyValueNet<F> = load_checkpoint(path)?;
    if net.arch().size != size {
        return Err(ModelError::ShapeMismatch { expected: size, found: net.arch().size });
    }
    Ok(net)
}

pub(crate) fn to_bytes<F: Scalar>(net: &PolicyValueNet<F>) -> Vec<u8> {
    let a = net.arch();
    let c = net.config();
    let mut out = Vec::with_capacity(64 + 4 * net.param_count());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    let u32s = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
    u32s(&mut out, CHECKPOINT_VERSION as usize);
    for v in [a.size, a.in_planes, a.channels, a.blocks, a.policy_channels, a.value_hidden, c.epochs, c.batch_size] {
        u32s(&mut out, v);
    }
    for v in [c.learning_rate, c.dropout, c.l2] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let layout = net.layout();
    u32s(&mut out, layout.tensors.len());
    for t in &layout.tensors {
        u32s(&mut out, t.len);
        for &p in &net.params()[t.offset..t.offset + t.len] {
            out.extend_from_slice(&(p.to_f64() as f32).to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, ModelError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub(crate) fn from_bytes<F: Scalar>(bytes: &[u8]) -> Result<PolicyValueNet<F>, ModelError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(CHECKPOINT_MAGIC.len())? != CHECKPOINT_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = r.u32()? as u32;
    if version != CHECKPOINT_VERSION {
        return Err(corrupt(format!("unsupported version {version}")));
    }
    let size = r.u32()?;
    let in_planes = r.u32()?;
    let channels = r.u32()?;
    let blocks = r.u32()?;
    let policy_channels = r.u32()?;
    let value_hidden = r.u32()?;
    let epochs = r.u32()?;
    let batch_size = r.u32()?;
    let learning_rate = r.f64()?;
    let dropout = r.f64()?;
    let l2 = r.f64()?;
    let config = ModelConfig {
        epochs,
        batch_size,
        learning_rate,
        dropout,
        channels,
        blocks,
        l2,
        policy_channels,
        value_hidden,
    };
    config.validate().map_err(|e| corrupt(e.to_string()))?;
    if size < 5 || size > 1024 || in_planes == 0 || in_planes > 64 || channels > 4096 || blocks > 256 {
        return Err(corrupt("implausible architecture"));
    }
    let arch = Arch::new(size, in_planes, &config);
    let mut net = PolicyValueNet::<F>::zeroed(arch, config);
    let layout = net.layout().clone();
    let count = r.u32()?;
    if count != layout.tensors.len() {
        return Err(corrupt(format!("expected {} tensors, found {count}", layout.tensors.len())));
    }
    for t in &layout.tensors {
        let len = r.u32()?;
        if len != t.len {
            return Err(corrupt(format!("tensor {} has length {len}, expected {}", t.name, t.len)));
        }
        for i in 0..len {
            net.params_mut()[t.offset + i] = F::from_f64(r.f32()? as f64);
        }
    }
    if r.pos != bytes.len() {
        return Err(corrupt(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(net)
}
