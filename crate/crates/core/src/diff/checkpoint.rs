//! Binary checkpoint format, all integers and floats little-endian:
//!
//! ```text
//! magic    b"SHRCKPT1"
//! step     u64
//! tables   u64            2 or 3 (third = separate encoder item table)
//! adam     5 x f64        lr, beta1, beta2, epsilon, l2
//! per table:
//!   rows u64, cols u64, then rows*cols f64 each for value, first, second
//! ```

use std::io::{Read, Write};

use super::{AdamConfig, EmbeddingState, Param};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::Real;

const MAGIC: &[u8; 8] = b"SHRCKPT1";

pub fn write_checkpoint<W: Write>(state: &EmbeddingState, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&state.step.to_le_bytes())?;
    out.write_all(&(state.params().len() as u64).to_le_bytes())?;
    let a = state.adam;
    for x in [a.learning_rate, a.beta1, a.beta2, a.epsilon, a.l2] {
        out.write_all(&x.to_le_bytes())?;
    }
    for p in state.params() {
        let (r, c) = p.value.shape();
        out.write_all(&(r as u64).to_le_bytes())?;
        out.write_all(&(c as u64).to_le_bytes())?;
        for m in [&p.value, &p.first, &p.second] {
            for &x in m.as_slice() {
                out.write_all(&(x as f64).to_le_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<EmbeddingState> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let step = read_u64(&mut input)?;
    let tables = read_u64(&mut input)?;
    if !(2..=3).contains(&tables) {
        return Err(Error::Checkpoint(format!("unexpected table count {tables}")));
    }
    let adam = AdamConfig {
        learning_rate: read_f64(&mut input)?,
        beta1: read_f64(&mut input)?,
        beta2: read_f64(&mut input)?,
        epsilon: read_f64(&mut input)?,
        l2: read_f64(&mut input)?,
    };
    let mut params = Vec::with_capacity(tables as usize);
    for _ in 0..tables {
        let rows = read_u64(&mut input)? as usize;
        let cols = read_u64(&mut input)? as usize;
        let len = rows
            .checked_mul(cols)
            .filter(|&n| n < (1 << 34))
            .ok_or_else(|| Error::Checkpoint(format!("implausible table shape {rows}x{cols}")))?;
        let mut read_matrix = || -> Result<Matrix> {
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                data.push(read_f64(&mut input)? as Real);
            }
            Ok(Matrix::from_vec(rows, cols, data))
        };
        let value = read_matrix()?;
        let first = read_matrix()?;
        let second = read_matrix()?;
        params.push(Param { value, first, second });
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    let mut params = params.into_iter();
    let user = params.next().unwrap();
    let item = params.next().unwrap();
    let encoder_item = params.next();
    if user.value.cols() != item.value.cols() || encoder_item.as_ref().is_some_and(|p| p.value.shape() != item.value.shape()) {
        return Err(Error::Checkpoint("inconsistent table shapes".into()));
    }
    Ok(EmbeddingState {
        user,
        item,
        encoder_item,
        step,
        adam,
    })
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::Gradients;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut s = EmbeddingState::init(5, 7, 3, true, 11).unwrap();
        let mut g = Gradients::zeros_like(&s);
        g.item.as_mut_slice().iter_mut().enumerate().for_each(|(k, x)| *x = (k as Real).sin());
        s.adam_step(&g).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&s, &mut buf).unwrap();
        let back = read_checkpoint(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        let mut again = Vec::new();
        write_checkpoint(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let s = EmbeddingState::init(2, 2, 2, false, 0).unwrap();
        let mut buf = Vec::new();
        write_checkpoint(&s, &mut buf).unwrap();
        assert!(read_checkpoint(&buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_checkpoint(bad.as_slice()), Err(Error::Checkpoint(_))));
        buf.push(0);
        assert!(read_checkpoint(buf.as_slice()).is_err());
    }
}
