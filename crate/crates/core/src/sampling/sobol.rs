//! Gray-code Sobol sequence over Joe-Kuo direction numbers.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const BITS: usize = 32;
const BUNDLED: &str = include_str!("../../data/new-joe-kuo-6.8192");

/// Direction numbers `v_1 ..= v_32` for every supported dimension.
#[derive(Debug, Clone)]
pub struct SobolTable {
    directions: Vec<[u32; BITS]>,
}

impl SobolTable {
    /// Parses the published layout: a header line, then one line per
    /// dimension `d s a m_1 .. m_s` starting at `d = 2`. Dimension 1 (the
    /// van der Corput sequence) is implicit.
    pub fn parse(text: &str) -> Result<Self> {
        let mut directions = vec![Self::first_dimension()];
        for (line_no, line) in text.lines().enumerate().skip(1) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |reason: &str| Error::DirectionTable {
                line: line_no + 1,
                reason: reason.to_string(),
            };
            let fields = line
                .split_whitespace()
                .map(str::parse::<u64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| bad(&e.to_string()))?;
            let [d, s, a, ref m @ ..] = fields[..] else {
                return Err(bad("expected `d s a m_1 .. m_s`"));
            };
            let s = s as usize;
            if d as usize != directions.len() + 1 {
                return Err(bad("dimensions must be consecutive"));
            }
            if s == 0 || s >= BITS || m.len() != s {
                return Err(bad("degree does not match the number of m_i values"));
            }
            if m.iter()
                .enumerate()
                .any(|(k, &mk)| mk % 2 == 0 || mk >= 1 << (k + 1))
            {
                return Err(bad("each m_k must be odd and below 2^k"));
            }
            directions.push(Self::directions(s, a as u32, m));
        }
        Ok(Self { directions })
    }

    /// The table compiled into the crate (8192 dimensions).
    pub fn bundled() -> &'static SobolTable {
        static TABLE: OnceLock<SobolTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            SobolTable::parse(BUNDLED).expect("bundled direction numbers are valid")
        })
    }

    fn first_dimension() -> [u32; BITS] {
        let mut v = [0u32; BITS];
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        v
    }

    fn directions(s: usize, a: u32, m: &[u64]) -> [u32; BITS] {
        let mut v = [0u32; BITS];
        for k in 0..s {
            v[k] = (m[k] as u32) << (BITS - 1 - k);
        }
        for k in s..BITS {
            let mut x = v[k - s] ^ (v[k - s] >> s);
            for j in 1..s {
                if (a >> (s - 1 - j)) & 1 == 1 {
                    x ^= v[k - j];
                }
            }
            v[k] = x;
        }
        v
    }

    pub fn max_dimension(&self) -> usize {
        self.directions.len()
    }

    fn check_dimension(&self, dimension: usize) -> Result<()> {
        if dimension > self.max_dimension() {
            return Err(Error::SobolDimension {
                requested: dimension,
                available: self.max_dimension(),
            });
        }
        Ok(())
    }

    fn check_index(index: u64) -> Result<u32> {
        u32::try_from(index).map_err(|_| Error::SampleIndex(index))
    }

    /// Point `index` of the raw sequence (index 0 is the origin), by random
    /// access.
    pub fn point(&self, index: u64, dimension: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; dimension];
        self.point_into(index, &mut out)?;
        Ok(out)
    }

    pub fn point_into(&self, index: u64, out: &mut [f64]) -> Result<()> {
        self.check_dimension(out.len())?;
        let gray = {
            let i = Self::check_index(index)?;
            i ^ (i >> 1)
        };
        for (x, v) in out.iter_mut().zip(&self.directions) {
            *x = to_unit(gray_xor(gray, v));
        }
        Ok(())
    }

    /// Sequential generator whose first point is `start`.
    pub fn stream(&self, start: u64, dimension: usize) -> Result<SobolStream<'_>> {
        self.check_dimension(dimension)?;
        let first = Self::check_index(start)?;
        let gray = first ^ (first >> 1);
        let state = self.directions[..dimension]
            .iter()
            .map(|v| gray_xor(gray, v))
            .collect();
        Ok(SobolStream {
            table: self,
            next: start,
            state,
            fresh: true,
        })
    }
}

fn gray_xor(gray: u32, v: &[u32; BITS]) -> u32 {
    let mut x = 0;
    let mut g = gray;
    while g != 0 {
        let k = g.trailing_zeros() as usize;
        x ^= v[k];
        g &= g - 1;
    }
    x
}

fn to_unit(x: u32) -> f64 {
    x as f64 * (1.0 / 4_294_967_296.0)
}

/// Sobol point `index >= 1` from the bundled table; the origin is never
/// produced.
pub fn sobol_point(index: u64, dimension: usize) -> Result<Vec<f64>> {
    if index == 0 {
        return Err(Error::SampleIndex(0));
    }
    SobolTable::bundled().point(index, dimension)
}

/// Successive Sobol points in gray-code order, one XOR per coordinate.
#[derive(Debug, Clone)]
pub struct SobolStream<'a> {
    table: &'a SobolTable,
    next: u64,
    state: Vec<u32>,
    fresh: bool,
}

impl SobolStream<'_> {
    pub fn dimension(&self) -> usize {
        self.state.len()
    }

    /// Writes the next point into `out` and returns its index.
    pub fn next_into(&mut self, out: &mut [f64]) -> Result<u64> {
        debug_assert_eq!(out.len(), self.state.len());
        if self.fresh {
            self.fresh = false;
        } else {
            let prev = Self::advance_index(self.next)?;
            let k = prev.trailing_ones() as usize;
            for (x, v) in self.state.iter_mut().zip(&self.table.directions) {
                *x ^= v[k];
            }
            self.next += 1;
        }
        for (o, &x) in out.iter_mut().zip(&self.state) {
            *o = to_unit(x);
        }
        Ok(self.next)
    }

    fn advance_index(current: u64) -> Result<u32> {
        match u32::try_from(current) {
            Ok(i) if i < u32::MAX => Ok(i),
            _ => Err(Error::SampleIndex(current + 1)),
        }
    }
}
