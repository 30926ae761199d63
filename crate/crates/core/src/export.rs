//! Snapshot dumps.
//!
//! Text form: one tap per line, `time_s q p delay_s re_gain im_gain`.
//!
//! Binary form, all integers and floats little-endian:
//!
//! ```text
//! file    := magic "GBSMCIR1" , u32 version (=1) , record*
//! record  := u32 byte_len , body               (byte_len counts body only)
//! body    := f64 time , u32 m_r , u32 m_t ,
//!            pair{m_r*m_t}  (order q-major: q * m_t + p) ,
//!            u32 n_paths , path{n_paths}
//! pair    := u32 n_taps , (f64 delay , f64 re , f64 im){n_taps}
//! path    := u64 cluster_id , u32 ray , f64 delay , f64 power
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::channel::{CirSnapshot, PathRecord, Tap};
use crate::error::{GbsmError, Result};

pub const MAGIC: &[u8; 8] = b"GBSMCIR1";
pub const VERSION: u32 = 1;

pub fn write_text<W: Write>(out: &mut W, snapshots: &[CirSnapshot]) -> Result<()> {
    writeln!(out, "# time_s q p delay_s re_gain im_gain")?;
    for s in snapshots {
        for q in 0..s.rx_elements {
            for p in 0..s.tx_elements {
                for t in s.pair(q, p) {
                    writeln!(
                        out,
                        "{:.9e} {} {} {:.15e} {:.15e} {:.15e}",
                        s.time, q, p, t.delay, t.gain.re, t.gain.im
                    )?;
                }
            }
        }
    }
    Ok(())
}

pub fn write_header<W: Write>(out: &mut W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    Ok(())
}

fn encode(s: &CirSnapshot) -> Vec<u8> {
    let mut b = Vec::new();
    b.extend_from_slice(&s.time.to_le_bytes());
    b.extend_from_slice(&(s.rx_elements as u32).to_le_bytes());
    b.extend_from_slice(&(s.tx_elements as u32).to_le_bytes());
    for k in 0..s.rx_elements * s.tx_elements {
        let taps: &[Tap] = s.taps.get(k).map_or(&[], Vec::as_slice);
        b.extend_from_slice(&(taps.len() as u32).to_le_bytes());
        for t in taps {
            b.extend_from_slice(&t.delay.to_le_bytes());
            b.extend_from_slice(&t.gain.re.to_le_bytes());
            b.extend_from_slice(&t.gain.im.to_le_bytes());
        }
    }
    b.extend_from_slice(&(s.paths.len() as u32).to_le_bytes());
    for p in &s.paths {
        b.extend_from_slice(&p.cluster_id.to_le_bytes());
        b.extend_from_slice(&p.ray.to_le_bytes());
        b.extend_from_slice(&p.delay.to_le_bytes());
        b.extend_from_slice(&p.power.to_le_bytes());
    }
    b
}

pub fn write_record<W: Write>(out: &mut W, snapshot: &CirSnapshot) -> Result<()> {
    let body = encode(snapshot);
    out.write_all(&(body.len() as u32).to_le_bytes())?;
    out.write_all(&body)?;
    Ok(())
}

pub fn write_binary<W: Write>(out: &mut W, snapshots: &[CirSnapshot]) -> Result<()> {
    write_header(out)?;
    for s in snapshots {
        write_record(out, s)?;
    }
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self
            .buf
            .get(self.pos..end)
            .ok_or_else(|| GbsmError::Parse { line: 0, message: "truncated record".into() })?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice of length N"))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

fn decode(body: &[u8]) -> Result<CirSnapshot> {
    let mut c = Cursor { buf: body, pos: 0 };
    let time = c.f64()?;
    let m_r = c.u32()? as usize;
    let m_t = c.u32()? as usize;
    let mut taps = Vec::with_capacity(m_r * m_t);
    for _ in 0..m_r * m_t {
        let n = c.u32()? as usize;
        let mut v = Vec::with_capacity(n.min(body.len() / 24));
        for _ in 0..n {
            let delay = c.f64()?;
            let re = c.f64()?;
            let im = c.f64()?;
            v.push(Tap { delay, gain: Complex64::new(re, im) });
        }
        taps.push(v);
    }
    let n = c.u32()? as usize;
    let mut paths = Vec::with_capacity(n.min(body.len() / 28));
    for _ in 0..n {
        paths.push(PathRecord {
            cluster_id: c.u64()?,
            ray: c.u32()?,
            delay: c.f64()?,
            power: c.f64()?,
        });
    }
    if c.pos != body.len() {
        return Err(GbsmError::Parse { line: 0, message: "trailing bytes in record".into() });
    }
    Ok(CirSnapshot { time, rx_elements: m_r, tx_elements: m_t, taps, paths })
}

pub fn read_binary<R: Read>(input: &mut R) -> Result<Vec<CirSnapshot>> {
    let mut all = Vec::new();
    input.read_to_end(&mut all)?;
    if all.len() < 12 || &all[..8] != MAGIC {
        return Err(GbsmError::Parse { line: 0, message: "not a snapshot dump".into() });
    }
    let version = u32::from_le_bytes(all[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(GbsmError::Parse { line: 0, message: format!("unsupported version {version}") });
    }
    let mut pos = 12;
    let mut out = Vec::new();
    while pos < all.len() {
        let len_bytes = all
            .get(pos..pos + 4)
            .ok_or_else(|| GbsmError::Parse { line: 0, message: "truncated length prefix".into() })?;
        let len = u32::from_le_bytes(len_bytes.try_into().expect("4 bytes")) as usize;
        pos += 4;
        let body = all
            .get(pos..pos + len)
            .ok_or_else(|| GbsmError::Parse { line: 0, message: "truncated record".into() })?;
        out.push(decode(body)?);
        pos += len;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::run_realization;
    use crate::scenarios::{preset, PresetName};

    #[test]
    fn binary_round_trip() {
        let mut cfg = preset(PresetName::Mmwave3d);
        cfg.rician_k = 2.0;
        let snaps = run_realization(&cfg, 3e-3, 1e-3, 5).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &snaps).unwrap();
        let back = read_binary(&mut buf.as_slice()).unwrap();
        assert_eq!(back, snaps);
    }

    #[test]
    fn corrupt_input_rejected() {
        assert!(read_binary(&mut &b"nope"[..]).is_err());
        let snaps = run_realization(&preset(PresetName::Hst3d), 1e-3, 1e-3, 5).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &snaps).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_binary(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn text_has_one_line_per_tap() {
        let snaps = run_realization(&preset(PresetName::Hst3d), 2e-3, 1e-3, 5).unwrap();
        let mut buf = Vec::new();
        write_text(&mut buf, &snaps).unwrap();
        let lines = String::from_utf8(buf).unwrap().lines().count();
        let taps: usize = snaps.iter().flat_map(|s| s.taps.iter()).map(Vec::len).sum();
        assert_eq!(lines, taps + 1);
    }
}
