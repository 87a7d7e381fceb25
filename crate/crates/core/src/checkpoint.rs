//! Binary checkpoints.
//!
//! Layout (little endian): b"PCNS", version u32, n1 n2 n3 u32, then L, gamma,
//! mu, lambda, t as f64, then rho, u1, u2, u3 as row-major f64 arrays.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::params::PulseParams;
use crate::state::State;
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"PCNS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 12 + 40;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub length: f64,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub state: State,
}

impl Checkpoint {
    pub fn new(state: State, params: &PulseParams) -> Self {
        Checkpoint { length: state.grid().length(), gamma: params.gamma, mu: params.mu, lambda: params.lambda, state }
    }
}

pub fn encode(state: &State, params: &PulseParams) -> Vec<u8> {
    let g = state.grid();
    let n = g.n() as u32;
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for _ in 0..3 {
        out.extend_from_slice(&n.to_le_bytes());
    }
    for v in [g.length(), params.gamma, params.mu, params.lambda, state.t] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let [u0, u1, u2] = state.u.components();
    for f in [&state.rho, u0, u1, u2] {
        for v in f.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

/// Parses a checkpoint. Never panics; every size is checked before allocation.
pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let bad = |m: String| Error::Checkpoint(m);
    if bytes.len() < HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the {HEADER_LEN}-byte header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(bad("bad magic".into()));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let dims = [u32_at(bytes, 8), u32_at(bytes, 12), u32_at(bytes, 16)];
    if dims[0] != dims[1] || dims[1] != dims[2] {
        return Err(bad(format!("non-cubic grid {dims:?}")));
    }
    let n = dims[0] as usize;
    let length = f64_at(bytes, 20);
    let grid = Grid::new(n, length).map_err(|e| bad(e.to_string()))?;
    let [gamma, mu, lambda, t] = [28, 36, 44, 52].map(|at| f64_at(bytes, at));
    if ![gamma, mu, lambda, t].iter().all(|v| v.is_finite()) {
        return Err(bad("non-finite header value".into()));
    }
    let body = n.checked_pow(3).and_then(|c| c.checked_mul(32)).ok_or_else(|| bad("grid too large".into()))?;
    let expected = HEADER_LEN.checked_add(body).ok_or_else(|| bad("grid too large".into()))?;
    if bytes.len() != expected {
        return Err(bad(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let len = grid.len();
    let read = |k: usize| -> Result<ScalarField> {
        let start = HEADER_LEN + k * len * 8;
        let values = bytes[start..start + len * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        ScalarField::from_values(grid, values).map_err(|e| bad(e.to_string()))
    };
    let rho = read(0)?;
    let u = VectorField::new([read(1)?, read(2)?, read(3)?]).map_err(|e| bad(e.to_string()))?;
    let state = State::new(t, rho, u).map_err(|e| bad(e.to_string()))?;
    Ok(Checkpoint { length, gamma, mu, lambda, state })
}

pub fn write(path: &Path, state: &State, params: &PulseParams) -> Result<()> {
    std::fs::write(path, encode(state, params)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (State, PulseParams) {
        let g = Grid::new(8, 2.0).unwrap();
        let s = crate::diagnostics::state_from_fns(
            g,
            0.25,
            |x, y, z| 1.5 + 0.1 * (x + 2.0 * y - z).sin(),
            |x, y, z| [x.cos(), -y * z, 1e-300 * x],
        )
        .unwrap();
        (s, PulseParams { gamma: 1.4, mu: 0.3, lambda: 0.1, ..Default::default() })
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (s, p) = sample();
        let bytes = encode(&s, &p);
        assert_eq!(bytes.len(), HEADER_LEN + 32 * 512);
        let c = decode(&bytes).unwrap();
        assert_eq!(c.state, s);
        assert_eq!((c.length, c.gamma, c.mu, c.lambda), (2.0, 1.4, 0.3, 0.1));
        assert_eq!(encode(&c.state, &p), bytes);
    }

    #[test]
    fn header_fields_are_where_documented() {
        let (s, p) = sample();
        let b = encode(&s, &p);
        assert_eq!(&b[..4], b"PCNS");
        assert_eq!(u32_at(&b, 4), 1);
        assert_eq!(u32_at(&b, 16), 8);
        assert_eq!(f64_at(&b, 52), 0.25);
        assert_eq!(f64_at(&b, HEADER_LEN), s.rho.values()[0]);
    }

    #[test]
    fn rejects_damage() {
        let (s, p) = sample();
        let b = encode(&s, &p);
        assert!(decode(&b[..b.len() - 1]).is_err());
        assert!(decode(&b[..10]).is_err());
        let mut m = b.clone();
        m[0] = b'X';
        assert!(decode(&m).is_err());
        let mut v = b.clone();
        v[4] = 2;
        assert!(decode(&v).is_err());
        let mut huge = b.clone();
        huge[8..20].copy_from_slice(&[0xff; 12]);
        assert!(decode(&huge).is_err());
        let mut neg = b.clone();
        neg[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&(-1.0f64).to_le_bytes());
        assert!(decode(&neg).is_err());
        let mut nan = b;
        nan[HEADER_LEN + 8..HEADER_LEN + 16].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(decode(&nan).is_err());
    }
}
