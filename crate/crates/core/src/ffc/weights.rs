//! The `FFCW` weight file.
//!
//! Little-endian layout:
//!
//! ```text
//! "FFCW"  u32 version (= 1)  u32 block_count
//! per block: u32 kind (0 same, 1 down, 2 up)  u32 in_ch  u32 out_ch
//!            f32 ratio_in  f32 ratio_out  u32 flags (bit0 norm, bit1 relu, bit2 residual)
//! u32 tensor_count
//! per tensor: u32 name_len  name (UTF-8)  u32 rank  rank × u32 dims  f32 values
//! ```
//!
//! Tensor names are `blocks.{i}.{param}` with `param` one of
//!
//! | param | shape |
//! |---|---|
//! | `l2l.weight`, `g2l.weight`, `l2g.weight` | `[out, in, 3, 3]` |
//! | `l2l.bias`, `g2l.bias`, `l2g.bias` | `[out]` (optional) |
//! | `g2g.pre.weight` / `.bias` | `[hidden, in_g]` / `[hidden]` |
//! | `g2g.freq.weight` / `.bias` | `[2·hidden, 2·hidden]` / `[2·hidden]` |
//! | `g2g.post.weight` / `.bias` | `[out_g, hidden]` / `[out_g]` |
//! | `g2g.pre_norm`, `g2g.freq_norm`, `norm_l`, `norm_g` `.scale` / `.shift` | `[channels]` |
//!
//! 1×1 kernels may also be stored as `[out, in, 1, 1]`. Missing biases are
//! zero. Normalization tensors are required exactly when the norm flag is set.
//! Every other missing, unknown or misshapen tensor is a format error.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::block::{BlockKind, BlockSpec, FfcNetwork, FfcWeights};
use super::ops::{Affine, Conv1x1, Conv3x3, SpectralTransformWeights};
use super::tensor::{put_tensor_body, Cursor, RawTensor};
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &[u8; 4] = b"FFCW";
pub const WEIGHTS_VERSION: u32 = 1;

const FLAG_NORM: u32 = 1;
const FLAG_ACTIVATION: u32 = 2;
const FLAG_RESIDUAL: u32 = 4;
const MAX_NAME_LEN: usize = 4096;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn raw(dims: Vec<usize>, values: &[f64]) -> RawTensor {
    RawTensor {
        dims,
        values: values.iter().map(|&v| v as f32).collect(),
    }
}

/// Named tensors of one block in file order.
fn block_tensors(w: &FfcWeights) -> Vec<(String, RawTensor)> {
    let mut out = Vec::new();
    let mut conv3 = |name: &str, k: &Option<Conv3x3>| {
        if let Some(k) = k {
            out.push((
                format!("{name}.weight"),
                raw(vec![k.out_channels, k.in_channels, 3, 3], &k.weight),
            ));
            out.push((format!("{name}.bias"), raw(vec![k.out_channels], &k.bias)));
        }
    };
    conv3("l2l", &w.l2l);
    conv3("g2l", &w.g2l);
    conv3("l2g", &w.l2g);

    let conv1 = |out: &mut Vec<(String, RawTensor)>, name: &str, k: &Conv1x1| {
        out.push((
            format!("{name}.weight"),
            raw(vec![k.out_channels, k.in_channels], &k.weight),
        ));
        out.push((format!("{name}.bias"), raw(vec![k.out_channels], &k.bias)));
    };
    let affine = |out: &mut Vec<(String, RawTensor)>, name: &str, a: &Option<Affine>| {
        if let Some(a) = a {
            out.push((format!("{name}.scale"), raw(vec![a.scale.len()], &a.scale)));
            out.push((format!("{name}.shift"), raw(vec![a.shift.len()], &a.shift)));
        }
    };
    if let Some(st) = &w.g2g {
        conv1(&mut out, "g2g.pre", &st.pre);
        affine(&mut out, "g2g.pre_norm", &st.pre_norm);
        conv1(&mut out, "g2g.freq", &st.freq);
        affine(&mut out, "g2g.freq_norm", &st.freq_norm);
        conv1(&mut out, "g2g.post", &st.post);
    }
    affine(&mut out, "norm_l", &w.norm_l);
    affine(&mut out, "norm_g", &w.norm_g);
    out
}

/// Serializes a network; values are rounded to `f32`.
pub fn encode_weights(net: &FfcNetwork) -> Vec<u8> {
    let mut out = WEIGHTS_MAGIC.to_vec();
    put_u32(&mut out, WEIGHTS_VERSION);
    put_u32(&mut out, net.blocks.len() as u32);
    for b in &net.blocks {
        let s = &b.spec;
        put_u32(&mut out, s.kind.code());
        put_u32(&mut out, s.in_channels as u32);
        put_u32(&mut out, s.out_channels as u32);
        out.extend_from_slice(&(s.ratio_in as f32).to_le_bytes());
        out.extend_from_slice(&(s.ratio_out as f32).to_le_bytes());
        let flags =
            (s.norm as u32 * FLAG_NORM) | (s.activation as u32 * FLAG_ACTIVATION) | (s.residual as u32 * FLAG_RESIDUAL);
        put_u32(&mut out, flags);
    }
    let tensors: Vec<(String, RawTensor)> = net
        .blocks
        .iter()
        .enumerate()
        .flat_map(|(i, b)| {
            block_tensors(b)
                .into_iter()
                .map(move |(name, t)| (format!("blocks.{i}.{name}"), t))
        })
        .collect();
    put_u32(&mut out, tensors.len() as u32);
    for (name, t) in &tensors {
        put_u32(&mut out, name.len() as u32);
        out.extend_from_slice(name.as_bytes());
        put_tensor_body(&mut out, t);
    }
    out
}

/// Tensors read from the file, keyed by name, with their byte offsets.
struct TensorTable {
    entries: BTreeMap<String, (usize, RawTensor)>,
    /// Offset of the tensor table, reported for missing tensors.
    table_at: usize,
}

impl TensorTable {
    fn take(&mut self, name: &str) -> Option<(usize, RawTensor)> {
        self.entries.remove(name)
    }

    fn required(&mut self, name: &str, shapes: &[&[usize]]) -> Result<Vec<f64>> {
        let (at, t) = self
            .take(name)
            .ok_or_else(|| Error::format(self.table_at, format!("missing tensor {name}")))?;
        check_shape(name, at, &t, shapes)?;
        Ok(t.values.iter().map(|&v| v as f64).collect())
    }

    fn optional(&mut self, name: &str, len: usize) -> Result<Vec<f64>> {
        match self.take(name) {
            Some((at, t)) => {
                check_shape(name, at, &t, &[&[len]])?;
                Ok(t.values.iter().map(|&v| v as f64).collect())
            }
            None => Ok(vec![0.0; len]),
        }
    }

    fn conv3(&mut self, prefix: &str, out_channels: usize, in_channels: usize) -> Result<Option<Conv3x3>> {
        if out_channels == 0 || in_channels == 0 {
            return Ok(None);
        }
        Ok(Some(Conv3x3 {
            out_channels,
            in_channels,
            weight: self.required(&format!("{prefix}.weight"), &[&[out_channels, in_channels, 3, 3]])?,
            bias: self.optional(&format!("{prefix}.bias"), out_channels)?,
        }))
    }

    fn conv1(&mut self, prefix: &str, out_channels: usize, in_channels: usize) -> Result<Conv1x1> {
        Ok(Conv1x1 {
            out_channels,
            in_channels,
            weight: self.required(
                &format!("{prefix}.weight"),
                &[&[out_channels, in_channels], &[out_channels, in_channels, 1, 1]],
            )?,
            bias: self.optional(&format!("{prefix}.bias"), out_channels)?,
        })
    }

    fn affine(&mut self, prefix: &str, channels: usize, present: bool) -> Result<Option<Affine>> {
        if !present {
            return Ok(None);
        }
        Ok(Some(Affine {
            scale: self.required(&format!("{prefix}.scale"), &[&[channels]])?,
            shift: self.required(&format!("{prefix}.shift"), &[&[channels]])?,
        }))
    }
}

fn check_shape(name: &str, at: usize, t: &RawTensor, shapes: &[&[usize]]) -> Result<()> {
    if shapes.iter().any(|s| t.dims == *s) {
        return Ok(());
    }
    Err(Error::format(
        at,
        format!("tensor {name} has shape {:?}, expected {:?}", t.dims, shapes[0]),
    ))
}

fn read_block(table: &mut TensorTable, i: usize, spec: BlockSpec) -> Result<FfcWeights> {
    let (cli, cgi) = spec.input_split();
    let (clo, cgo) = spec.output_split();
    let p = |name: &str| format!("blocks.{i}.{name}");
    let l2l = table.conv3(&p("l2l"), clo, cli)?;
    let g2l = table.conv3(&p("g2l"), clo, cgi)?;
    let l2g = table.conv3(&p("l2g"), cgo, cli)?;
    let g2g = if cgo > 0 && cgi > 0 {
        let pre_name = p("g2g.pre.weight");
        let hidden = match table.entries.get(&pre_name) {
            Some((_, t)) if !t.dims.is_empty() && t.dims[0] > 0 => t.dims[0],
            Some((at, t)) => return Err(Error::format(*at, format!("tensor {pre_name} has shape {:?}", t.dims))),
            None => return Err(Error::format(table.table_at, format!("missing tensor {pre_name}"))),
        };
        Some(SpectralTransformWeights {
            pre: table.conv1(&p("g2g.pre"), hidden, cgi)?,
            pre_norm: table.affine(&p("g2g.pre_norm"), hidden, spec.norm)?,
            freq: table.conv1(&p("g2g.freq"), 2 * hidden, 2 * hidden)?,
            freq_norm: table.affine(&p("g2g.freq_norm"), 2 * hidden, spec.norm)?,
            post: table.conv1(&p("g2g.post"), cgo, hidden)?,
            activation: spec.activation,
        })
    } else {
        None
    };
    Ok(FfcWeights {
        spec,
        l2l,
        g2l,
        l2g,
        g2g,
        norm_l: table.affine(&p("norm_l"), clo, spec.norm && clo > 0)?,
        norm_g: table.affine(&p("norm_g"), cgo, spec.norm && cgo > 0)?,
    })
}

pub fn decode_weights(bytes: &[u8]) -> Result<FfcNetwork> {
    let mut cur = Cursor::new(bytes);
    cur.magic(WEIGHTS_MAGIC)?;
    let version_at = cur.pos;
    let version = cur.u32("version")?;
    if version != WEIGHTS_VERSION {
        return Err(Error::format(
            version_at,
            format!("unsupported weight file version {version}"),
        ));
    }
    let count_at = cur.pos;
    let block_count = cur.u32("block count")? as usize;
    if block_count == 0 {
        return Err(Error::format(count_at, "weight file has no blocks"));
    }
    let mut specs = Vec::new();
    for i in 0..block_count {
        let at = cur.pos;
        let kind_code = cur.u32("block manifest")?;
        let kind = BlockKind::from_code(kind_code)
            .ok_or_else(|| Error::format(at, format!("block {i}: unknown kind {kind_code}")))?;
        let in_channels = cur.u32("block manifest")? as usize;
        let out_channels = cur.u32("block manifest")? as usize;
        let ratio_in = cur.f32("block manifest")? as f64;
        let ratio_out = cur.f32("block manifest")? as f64;
        let flags_at = cur.pos;
        let flags = cur.u32("block manifest")?;
        if flags & !(FLAG_NORM | FLAG_ACTIVATION | FLAG_RESIDUAL) != 0 {
            return Err(Error::format(flags_at, format!("block {i}: unknown flags {flags:#x}")));
        }
        let spec = BlockSpec {
            kind,
            in_channels,
            out_channels,
            ratio_in,
            ratio_out,
            norm: flags & FLAG_NORM != 0,
            activation: flags & FLAG_ACTIVATION != 0,
            residual: flags & FLAG_RESIDUAL != 0,
        };
        spec.validate()
            .map_err(|e| Error::format(at, format!("block {i}: {e}")))?;
        specs.push(spec);
    }

    let table_at = cur.pos;
    let tensor_count = cur.u32("tensor count")? as usize;
    let mut entries = BTreeMap::new();
    for _ in 0..tensor_count {
        let at = cur.pos;
        let name_len = cur.u32("tensor name length")? as usize;
        if name_len == 0 || name_len > MAX_NAME_LEN {
            return Err(Error::format(at, format!("tensor name length {name_len} out of range")));
        }
        let name = std::str::from_utf8(cur.take(name_len, "tensor name")?)
            .map_err(|_| Error::format(at + 4, "tensor name is not UTF-8"))?
            .to_owned();
        let t = cur.tensor_body()?;
        if entries.insert(name.clone(), (at, t)).is_some() {
            return Err(Error::format(at, format!("duplicate tensor {name}")));
        }
    }
    cur.finish()?;

    let mut table = TensorTable { entries, table_at };
    let blocks = specs
        .into_iter()
        .enumerate()
        .map(|(i, spec)| read_block(&mut table, i, spec))
        .collect::<Result<Vec<_>>>()?;
    if let Some((name, (at, _))) = table.entries.iter().next() {
        return Err(Error::format(*at, format!("unknown tensor {name}")));
    }
    FfcNetwork::new(blocks).map_err(|e| Error::format(count_at, e.to_string()))
}

pub fn write_weights(path: &Path, net: &FfcNetwork) -> Result<()> {
    fs::write(path, encode_weights(net))?;
    Ok(())
}

pub fn read_weights(path: &Path) -> Result<FfcNetwork> {
    decode_weights(&fs::read(path)?)
}
