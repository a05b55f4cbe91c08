//! Binary model serialization.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic        8 bytes  "CSLMNET\0"
//! version      u32      currently 1
//! order        u32
//! projection   u32
//! vocab_size   u32
//! shortlist    u32
//! batch_size   u32
//! emb_train    u32      0 or 1: embedding trainable flag
//! n_layers     u32
//! seed         u64
//! epoch        u64
//! per layer:   u32 out_dim, u32 activation tag (0 linear, 1 tanh, 2 softmax)
//! payload:     embedding (V×d_p f32, row-major), then per layer:
//!              weights (out×in f32, row-major), bias (out f32),
//!              one trainable-flag byte
//! checksum     u64      FNV-1a over the payload bytes
//! ```
//!
//! Parameters are stored in IEEE-754 single precision; in-memory f64 values
//! are narrowed on save and widened exactly on load, so save→load→save is
//! byte-identical.
//!
//! Load failures are classified: a bad magic or version is
//! [`Error::FormatVersion`]; a file ending inside the header is
//! [`Error::Truncated`]; a self-consistent header whose implied payload length
//! disagrees with the file length (either direction) is
//! [`Error::InvalidDimensions`]; a payload that hashes to something other than
//! the stored checksum is [`Error::ChecksumMismatch`].

use std::io::Cursor;
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};

use super::{Activation, Layer, Model, NetworkConfig};
use crate::error::{Error, Result};

pub const MAGIC: [u8; 8] = *b"CSLMNET\0";
pub const VERSION: u32 = 1;

/// Sanity cap on the layer count; real models have a handful of layers.
const MAX_LAYERS: u32 = 1024;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Serializes a model to its binary file format.
pub fn model_to_bytes(model: &Model) -> Vec<u8> {
    let cfg = &model.config;
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.write_u32::<LE>(VERSION).unwrap();
    out.write_u32::<LE>(cfg.order as u32).unwrap();
    out.write_u32::<LE>(cfg.projection_dim as u32).unwrap();
    out.write_u32::<LE>(cfg.vocab_size as u32).unwrap();
    out.write_u32::<LE>(cfg.shortlist_size as u32).unwrap();
    out.write_u32::<LE>(cfg.batch_size as u32).unwrap();
    out.write_u32::<LE>(model.embedding_trainable as u32)
        .unwrap();
    out.write_u32::<LE>(model.layers.len() as u32).unwrap();
    out.write_u64::<LE>(cfg.seed).unwrap();
    out.write_u64::<LE>(model.epoch).unwrap();
    for layer in &model.layers {
        out.write_u32::<LE>(layer.output_dim() as u32).unwrap();
        out.write_u32::<LE>(layer.activation.tag()).unwrap();
    }

    let mut payload = Vec::new();
    for &v in model.embedding.iter() {
        payload.write_f32::<LE>(v as f32).unwrap();
    }
    for layer in &model.layers {
        for &v in layer.weight.iter() {
            payload.write_f32::<LE>(v as f32).unwrap();
        }
        for &v in layer.bias.iter() {
            payload.write_f32::<LE>(v as f32).unwrap();
        }
        payload.push(layer.trainable as u8);
    }
    let checksum = fnv1a64(&payload);
    out.extend_from_slice(&payload);
    out.write_u64::<LE>(checksum).unwrap();
    out
}

/// Writes the binary model format to a file.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_bytes(model))?;
    Ok(())
}

/// Parses the binary model format.
pub fn model_from_bytes(bytes: &[u8]) -> Result<Model> {
    if bytes.len() < MAGIC.len() {
        return Err(Error::Truncated("file shorter than the magic".into()));
    }
    if bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::FormatVersion("bad magic".into()));
    }
    let mut cur = Cursor::new(&bytes[MAGIC.len()..]);
    let read_u32 = |cur: &mut Cursor<&[u8]>, what: &str| -> Result<u32> {
        cur.read_u32::<LE>()
            .map_err(|_| Error::Truncated(format!("file ends inside the header at {what}")))
    };
    let version = read_u32(&mut cur, "version")?;
    if version != VERSION {
        return Err(Error::FormatVersion(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let order = read_u32(&mut cur, "order")? as usize;
    let projection_dim = read_u32(&mut cur, "projection")? as usize;
    let vocab_size = read_u32(&mut cur, "vocab size")? as usize;
    let shortlist_size = read_u32(&mut cur, "shortlist size")? as usize;
    let batch_size = read_u32(&mut cur, "batch size")? as usize;
    let emb_trainable = read_u32(&mut cur, "embedding flag")?;
    let n_layers = read_u32(&mut cur, "layer count")?;
    let seed = cur
        .read_u64::<LE>()
        .map_err(|_| Error::Truncated("file ends inside the header at seed".into()))?;
    let epoch = cur
        .read_u64::<LE>()
        .map_err(|_| Error::Truncated("file ends inside the header at epoch".into()))?;

    if emb_trainable > 1 {
        return Err(Error::InvalidDimensions(format!(
            "embedding trainable flag must be 0 or 1, got {emb_trainable}"
        )));
    }
    if n_layers == 0 || n_layers > MAX_LAYERS {
        return Err(Error::InvalidDimensions(format!(
            "implausible layer count {n_layers}"
        )));
    }

    let mut out_dims = Vec::with_capacity(n_layers as usize);
    let mut activations = Vec::with_capacity(n_layers as usize);
    for l in 0..n_layers {
        let dim = read_u32(&mut cur, "layer dims")? as usize;
        let tag = read_u32(&mut cur, "layer dims")?;
        let act = Activation::from_tag(tag).ok_or_else(|| {
            Error::InvalidDimensions(format!("unknown activation tag {tag} in layer {l}"))
        })?;
        out_dims.push(dim);
        activations.push(act);
    }
    if *activations.last().unwrap() != Activation::Softmax {
        return Err(Error::InvalidDimensions(
            "final layer must be softmax".into(),
        ));
    }
    if out_dims[n_layers as usize - 1] != shortlist_size {
        return Err(Error::InvalidDimensions(format!(
            "final layer width {} != shortlist size {}",
            out_dims[n_layers as usize - 1],
            shortlist_size
        )));
    }

    let config = NetworkConfig {
        order,
        projection_dim,
        hidden_sizes: out_dims[..n_layers as usize - 1].to_vec(),
        hidden_activations: activations[..n_layers as usize - 1].to_vec(),
        shortlist_size,
        vocab_size,
        batch_size,
        seed,
    };
    config
        .validate()
        .map_err(|e| Error::InvalidDimensions(e.to_string()))?;

    // The header fully determines the payload length; a disagreement with the
    // actual file length is a dimension error, not a truncation.
    let mut in_dims = Vec::with_capacity(out_dims.len());
    in_dims.push(config.context_width());
    in_dims.extend_from_slice(&out_dims[..out_dims.len() - 1]);
    let param_count: usize = vocab_size * projection_dim
        + out_dims
            .iter()
            .zip(&in_dims)
            .map(|(&o, &i)| o * i + o)
            .sum::<usize>();
    let payload_len = param_count * 4 + n_layers as usize;
    let header_len = MAGIC.len() + cur.position() as usize;
    let expected_total = header_len + payload_len + 8;
    if bytes.len() != expected_total {
        return Err(Error::InvalidDimensions(format!(
            "header implies a {expected_total}-byte file, got {} bytes",
            bytes.len()
        )));
    }

    let payload = &bytes[header_len..header_len + payload_len];
    let stored = u64::from_le_bytes(bytes[header_len + payload_len..].try_into().unwrap());
    let computed = fnv1a64(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch { stored, computed });
    }

    let mut cur = Cursor::new(payload);
    let read_matrix = |cur: &mut Cursor<&[u8]>, rows: usize, cols: usize| -> Array2<f64> {
        let mut m = Array2::zeros((rows, cols));
        for i in 0..rows {
            for j in 0..cols {
                // Length was verified above; reads cannot fail.
                m[[i, j]] = cur.read_f32::<LE>().unwrap() as f64;
            }
        }
        m
    };

    let embedding = read_matrix(&mut cur, vocab_size, projection_dim);
    let mut layers = Vec::with_capacity(out_dims.len());
    for (l, (&out_dim, &in_dim)) in out_dims.iter().zip(&in_dims).enumerate() {
        let weight = read_matrix(&mut cur, out_dim, in_dim);
        let mut bias = Array1::zeros(out_dim);
        for i in 0..out_dim {
            bias[i] = cur.read_f32::<LE>().unwrap() as f64;
        }
        let flag = cur.read_u8().unwrap();
        if flag > 1 {
            return Err(Error::InvalidDimensions(format!(
                "trainable flag of layer {l} must be 0 or 1, got {flag}"
            )));
        }
        layers.push(Layer {
            weight,
            bias,
            activation: activations[l],
            trainable: flag == 1,
        });
    }

    Ok(Model {
        embedding,
        embedding_trainable: emb_trainable == 1,
        layers,
        config,
        epoch,
    })
}

/// Reads a model file written by [`save_model`].
pub fn load_model(path: &Path) -> Result<Model> {
    let bytes = std::fs::read(path)?;
    model_from_bytes(&bytes)
}
