//! Little-endian primitives for the QVID/QVRM/.qdist binary formats.

use std::io::{Read, Write};

use crate::error::{Error, Result};

fn read_bytes<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::TruncatedFile
        } else {
            Error::Io(e)
        }
    })?;
    Ok(buf)
}

pub fn read_magic(r: &mut impl Read, expected: &'static str) -> Result<()> {
    let found: [u8; 4] = read_bytes(r)?;
    if found != expected.as_bytes() {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

pub fn read_u16(r: &mut impl Read) -> Result<u16> {
    Ok(u16::from_le_bytes(read_bytes(r)?))
}

pub fn read_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(read_bytes(r)?))
}

pub fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_bytes(r)?))
}

pub fn read_f32(r: &mut impl Read) -> Result<f32> {
    Ok(f32::from_le_bytes(read_bytes(r)?))
}

pub fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_bytes(r)?))
}

pub fn write_u16(w: &mut impl Write, v: u16) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

pub fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

pub fn write_u64(w: &mut impl Write, v: u64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

pub fn write_f32(w: &mut impl Write, v: f32) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

pub fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}
