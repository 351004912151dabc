//! Checkpoint serialization.
//!
//! Binary little-endian layout:
//!
//! ```text
//! magic "RSAD"
//! u32 version (currently 1)
//! u32 x6 config: n_rrg, n_dab_per_rrg, channels, ca_reduction,
//!                sa_kernel, use_rsgb (0/1)
//! u32 tensor count
//! per tensor: u16 name length, UTF-8 name, u8 rank, u32 dims,
//!             raw f32 values
//! u8 optimizer flag
//! if set: u32 step counter, then per tensor in the same order the raw
//!         f32 first- and second-moment arrays
//! u32 training step count
//! ```
//!
//! Tensors appear in the network's canonical parameter order and are
//! verified against it on load, so a checkpoint can never silently
//! permute or drop a layer.

use std::path::Path;

use thiserror::Error;

use super::network::{Network, NetworkConfig};
use super::optim::AdamState;

pub const CHECKPOINT_VERSION: u32 = 1;

const MAGIC: &[u8; 4] = b"RSAD";

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint file is truncated")]
    Truncated,
    #[error("checkpoint config rejected: {0}")]
    ConfigMismatch(String),
    #[error("checkpoint tensor data inconsistent: {0}")]
    BadTensor(String),
}

/// A loaded checkpoint: the network carries the weights (and the moment
/// buffers when the optimizer section was present).
pub struct Checkpoint {
    pub network: Network<f32>,
    pub optimizer: Option<AdamState>,
    pub train_steps: u32,
}

fn push_u16(buf: &mut Vec<u8>, v: u16) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_f32s(buf: &mut Vec<u8>, vals: &[f32]) {
    for v in vals {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

/// Writes the network (and optionally its optimizer moments) to `path`.
/// Takes the network mutably only because the parameter walker does; the
/// network is not modified.
pub fn save(
    path: &Path,
    net: &mut Network<f32>,
    optimizer: Option<&AdamState>,
    train_steps: u32,
) -> Result<(), CheckpointError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    push_u32(&mut buf, CHECKPOINT_VERSION);
    let cfg = net.config;
    for field in [
        cfg.n_rrg,
        cfg.n_dab_per_rrg,
        cfg.channels,
        cfg.ca_reduction,
        cfg.sa_kernel,
        usize::from(cfg.use_rsgb),
    ] {
        push_u32(&mut buf, field as u32);
    }
    let mut count = 0u32;
    net.visit_params(|_, _| count += 1);
    push_u32(&mut buf, count);
    net.visit_params(|name, p| {
        push_u16(&mut buf, name.len() as u16);
        buf.extend_from_slice(name.as_bytes());
        buf.push(p.dims.len() as u8);
        for &d in &p.dims {
            push_u32(&mut buf, d as u32);
        }
        push_f32s(&mut buf, &p.values);
    });
    match optimizer {
        Some(state) => {
            buf.push(1);
            push_u32(&mut buf, state.t);
            net.visit_params(|_, p| {
                push_f32s(&mut buf, &p.m);
                push_f32s(&mut buf, &p.v);
            });
        }
        None => buf.push(0),
    }
    push_u32(&mut buf, train_steps);
    std::fs::write(path, buf)?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.buf.len() {
            return Err(CheckpointError::Truncated);
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>, CheckpointError> {
        let raw = self.take(n.checked_mul(4).ok_or(CheckpointError::Truncated)?)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

/// Reads a checkpoint back; see the module docs for the layout.
pub fn load(path: &Path) -> Result<Checkpoint, CheckpointError> {
    let buf = std::fs::read(path)?;
    if buf.len() < 4 || &buf[0..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let mut r = Reader { buf: &buf, pos: 4 };
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let fields: Vec<u32> = (0..6).map(|_| r.u32()).collect::<Result<_, _>>()?;
    let config = NetworkConfig {
        n_rrg: fields[0] as usize,
        n_dab_per_rrg: fields[1] as usize,
        channels: fields[2] as usize,
        ca_reduction: fields[3] as usize,
        sa_kernel: fields[4] as usize,
        use_rsgb: fields[5] != 0,
    };
    config.validate().map_err(CheckpointError::ConfigMismatch)?;

    let count = r.u32()? as usize;
    let mut tensors: Vec<(String, Vec<usize>, Vec<f32>)> = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = r.u16()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| CheckpointError::BadTensor("name is not UTF-8".into()))?;
        let rank = r.u8()? as usize;
        if rank == 0 || rank > 4 {
            return Err(CheckpointError::BadTensor(format!(
                "tensor {name} has unsupported rank {rank}"
            )));
        }
        let mut dims = Vec::with_capacity(rank);
        let mut len = 1usize;
        for _ in 0..rank {
            let d = r.u32()? as usize;
            len = len
                .checked_mul(d)
                .ok_or_else(|| CheckpointError::BadTensor(format!("tensor {name} overflows")))?;
            dims.push(d);
        }
        let values = r.f32s(len)?;
        tensors.push((name, dims, values));
    }

    let mut net = Network::<f32>::new(config);
    let mut idx = 0usize;
    let mut problem: Option<CheckpointError> = None;
    net.visit_params(|name, p| {
        if problem.is_some() {
            return;
        }
        let Some((stored_name, dims, values)) = tensors.get(idx) else {
            problem = Some(CheckpointError::BadTensor(format!(
                "missing tensor {name}: file has only {idx}"
            )));
            return;
        };
        idx += 1;
        if stored_name != name {
            problem = Some(CheckpointError::BadTensor(format!(
                "expected tensor {name}, found {stored_name}"
            )));
            return;
        }
        if dims != &p.dims {
            problem = Some(CheckpointError::BadTensor(format!(
                "tensor {name} dims {dims:?} do not match {:?}",
                p.dims
            )));
            return;
        }
        p.set_values(values.clone());
    });
    if let Some(e) = problem {
        return Err(e);
    }
    if idx != tensors.len() {
        return Err(CheckpointError::BadTensor(format!(
            "file has {} tensors, config implies {idx}",
            tensors.len()
        )));
    }

    let optimizer = match r.u8()? {
        0 => None,
        1 => {
            let t = r.u32()?;
            let mut moment_problem: Option<CheckpointError> = None;
            let mut moments: Vec<(Vec<f32>, Vec<f32>)> = Vec::with_capacity(tensors.len());
            for (name, _, values) in &tensors {
                match (r.f32s(values.len()), r.f32s(values.len())) {
                    (Ok(m), Ok(v)) => moments.push((m, v)),
                    _ => {
                        moment_problem = Some(CheckpointError::BadTensor(format!(
                            "optimizer moments for {name} are truncated"
                        )));
                        break;
                    }
                }
            }
            if let Some(e) = moment_problem {
                return Err(e);
            }
            let mut it = moments.into_iter();
            net.visit_params(|_, p| {
                let (m, v) = it.next().expect("moment count matches tensor count");
                p.m = m;
                p.v = v;
            });
            Some(AdamState {
                t,
                ..AdamState::default()
            })
        }
        other => {
            return Err(CheckpointError::BadTensor(format!(
                "optimizer flag must be 0 or 1, found {other}"
            )))
        }
    };
    let train_steps = r.u32()?;
    if r.remaining() != 0 {
        return Err(CheckpointError::BadTensor(format!(
            "{} trailing bytes after checkpoint payload",
            r.remaining()
        )));
    }
    Ok(Checkpoint {
        network: net,
        optimizer,
        train_steps,
    })
}
