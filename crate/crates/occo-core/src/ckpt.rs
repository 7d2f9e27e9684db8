//! Binary weight checkpoints (magic "OCWT", little-endian). Kind 1 carries
//! the encoder stack only; kind 2 is a full training checkpoint with all
//! stacks, Adam moments, the step counter, and a config hash.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::net::{Dense, ModelDims, ModelParams};

pub const OCWT_MAGIC: &[u8; 4] = b"OCWT";
pub const OCWT_VERSION: u16 = 1;

pub const KIND_ENCODER: u8 = 1;
pub const KIND_TRAIN: u8 = 2;

/// Encoder-only checkpoint contents.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderCkpt {
    pub dims: ModelDims,
    pub layers: Vec<Dense>,
}

impl EncoderCkpt {
    pub fn from_params(params: &ModelParams) -> Self {
        EncoderCkpt { dims: params.dims.clone(), layers: params.encoder.clone() }
    }

    /// Reject use with a model expecting different dims.
    pub fn require_dims(&self, dims: &ModelDims) -> Result<()> {
        if &self.dims != dims {
            return Err(Error::DimsMismatch(format!(
                "checkpoint embed_dim {} vs expected {}",
                self.dims.embed_dim, dims.embed_dim
            )));
        }
        Ok(())
    }
}

/// Full training checkpoint contents.
#[derive(Debug, Clone)]
pub struct TrainCkpt {
    pub params: ModelParams,
    pub adam_m: ModelParams,
    pub adam_v: ModelParams,
    pub step: u64,
    pub config_hash: u64,
}

struct Writer<W: Write> {
    out: W,
}

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> Result<()> {
        Ok(self.out.write_all(&[v])?)
    }
    fn u16(&mut self, v: u16) -> Result<()> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn u32(&mut self, v: u32) -> Result<()> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.out.write_all(&v.to_le_bytes())?)
    }
    fn widths(&mut self, ws: &[usize]) -> Result<()> {
        self.u32(ws.len() as u32)?;
        for &w in ws {
            self.u32(w as u32)?;
        }
        Ok(())
    }
    fn dims(&mut self, d: &ModelDims) -> Result<()> {
        self.widths(&d.point_mlp_widths)?;
        self.u32(d.embed_dim as u32)?;
        self.widths(&d.coarse_mlp_widths)?;
        self.u32(d.n_coarse as u32)?;
        self.u32(d.grid_side as u32)?;
        self.f64(d.grid_span)?;
        self.widths(&d.fold_mlp_widths)
    }
    fn stack(&mut self, layers: &[Dense]) -> Result<()> {
        for d in layers {
            for &v in &d.w.data {
                self.f64(v)?;
            }
            for &v in &d.b {
                self.f64(v)?;
            }
        }
        Ok(())
    }
}

struct Reader<R: Read> {
    inp: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inp
            .read_exact(&mut buf)
            .map_err(|_| Error::DimsMismatch("checkpoint truncated".into()))?;
        Ok(buf)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn widths(&mut self) -> Result<Vec<usize>> {
        let n = self.u32()? as usize;
        if n > 64 {
            return Err(Error::DimsMismatch(format!("implausible layer count {n}")));
        }
        (0..n).map(|_| Ok(self.u32()? as usize)).collect()
    }
    fn dims(&mut self) -> Result<ModelDims> {
        Ok(ModelDims {
            point_mlp_widths: self.widths()?,
            embed_dim: self.u32()? as usize,
            coarse_mlp_widths: self.widths()?,
            n_coarse: self.u32()? as usize,
            grid_side: self.u32()? as usize,
            grid_span: self.f64()?,
            fold_mlp_widths: self.widths()?,
        })
    }
    fn stack(&mut self, shapes: &[(usize, usize)]) -> Result<Vec<Dense>> {
        shapes
            .iter()
            .map(|&(fan_in, fan_out)| {
                let mut w = Matrix::zeros(fan_in, fan_out);
                for v in &mut w.data {
                    *v = self.f64()?;
                }
                let mut b = vec![0.0; fan_out];
                for v in &mut b {
                    *v = self.f64()?;
                }
                Ok(Dense { w, b })
            })
            .collect()
    }
}

fn open_reader(path: &Path, expect_kind: u8) -> Result<Reader<std::io::BufReader<std::fs::File>>> {
    let file = std::fs::File::open(path)?;
    let mut r = Reader { inp: std::io::BufReader::new(file) };
    let magic = r.bytes::<4>()?;
    if &magic != OCWT_MAGIC {
        return Err(Error::DimsMismatch("bad checkpoint magic".into()));
    }
    let version = r.u16()?;
    if version != OCWT_VERSION {
        return Err(Error::DimsMismatch(format!("unsupported checkpoint version {version}")));
    }
    let kind = r.u8()?;
    if kind != expect_kind {
        return Err(Error::DimsMismatch(format!(
            "checkpoint kind {kind}, expected {expect_kind}"
        )));
    }
    Ok(r)
}

/// Save the encoder stack with its dims header.
pub fn save_encoder(params: &ModelParams, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = Writer { out: std::io::BufWriter::new(file) };
    w.out.write_all(OCWT_MAGIC)?;
    w.u16(OCWT_VERSION)?;
    w.u8(KIND_ENCODER)?;
    w.dims(&params.dims)?;
    w.stack(&params.encoder)?;
    Ok(w.out.flush()?)
}

pub fn load_encoder(path: &Path) -> Result<EncoderCkpt> {
    let mut r = open_reader(path, KIND_ENCODER)?;
    let dims = r.dims()?;
    dims.validate().map_err(|_| Error::DimsMismatch("invalid dims block".into()))?;
    let shapes = encoder_shapes(&dims);
    let layers = r.stack(&shapes)?;
    Ok(EncoderCkpt { dims, layers })
}

fn encoder_shapes(dims: &ModelDims) -> Vec<(usize, usize)> {
    let mut shapes = Vec::new();
    let mut prev = 3;
    for &w in dims.point_mlp_widths.iter().chain(std::iter::once(&dims.embed_dim)) {
        shapes.push((prev, w));
        prev = w;
    }
    shapes
}

fn stack_shapes(dims: &ModelDims) -> (Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<(usize, usize)>) {
    let shapes = dims.layer_shapes();
    let ne = dims.point_mlp_widths.len() + 1;
    let nc = dims.coarse_mlp_widths.len() + 1;
    (
        shapes[..ne].to_vec(),
        shapes[ne..ne + nc].to_vec(),
        shapes[ne + nc..].to_vec(),
    )
}

/// Save the full training state (weights, Adam moments, step, config hash).
pub fn save_train(ckpt: &TrainCkpt, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = Writer { out: std::io::BufWriter::new(file) };
    w.out.write_all(OCWT_MAGIC)?;
    w.u16(OCWT_VERSION)?;
    w.u8(KIND_TRAIN)?;
    w.dims(&ckpt.params.dims)?;
    for p in [&ckpt.params, &ckpt.adam_m, &ckpt.adam_v] {
        w.stack(&p.encoder)?;
        w.stack(&p.coarse)?;
        w.stack(&p.fold)?;
    }
    w.u64(ckpt.step)?;
    w.u64(ckpt.config_hash)?;
    Ok(w.out.flush()?)
}

pub fn load_train(path: &Path) -> Result<TrainCkpt> {
    let mut r = open_reader(path, KIND_TRAIN)?;
    let dims = r.dims()?;
    dims.validate().map_err(|_| Error::DimsMismatch("invalid dims block".into()))?;
    let (enc, coarse, fold) = stack_shapes(&dims);
    let read_params = |r: &mut Reader<_>| -> Result<ModelParams> {
        Ok(ModelParams {
            dims: dims.clone(),
            encoder: r.stack(&enc)?,
            coarse: r.stack(&coarse)?,
            fold: r.stack(&fold)?,
        })
    };
    let params = read_params(&mut r)?;
    let adam_m = read_params(&mut r)?;
    let adam_v = read_params(&mut r)?;
    let step = r.u64()?;
    let config_hash = r.u64()?;
    Ok(TrainCkpt { params, adam_m, adam_v, step, config_hash })
}
