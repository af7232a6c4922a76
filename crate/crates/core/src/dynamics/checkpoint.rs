//! Binary restart files.
//!
//! Layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "ADYNCKPT"
//! 8       4     version (u32) = 1
//! 12      8     N (u64)
//! 20      8     step (u64)
//! 28      8     t (f64)
//! 36      8     dt (f64)
//! 44      8     C (f64)
//! 52      8     D (f64)
//! 60      8     tau_corr (f64)
//! 68      8     E0_mag (f64)
//! 76      8     noise epoch (u64)
//! 84      32    ξ₁..ξ₄ (4 × f64)
//! 116     32    RNG seed (ChaCha8, 32 bytes)
//! 148     8     RNG stream (u64)
//! 156     16    RNG word position (u128)
//! 172     4     history length H (u32)
//! 176     ...   y1: (N+2) × f64, nodes 0..=N and the ghost node
//!         ...   y2: (N+1) × f64, nodes 0..=N
//!         ...   H × [ N × f64, (N-1) × f64 ] multistep memory
//! ```

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::SimConfig;
use super::noise::NoiseState;
use super::sim::{SimState, Simulation};
use crate::error::{Error, Result};
use crate::io::write_atomic;

pub const MAGIC: &[u8; 8] = b"ADYNCKPT";
pub const VERSION: u32 = 1;

impl SimState {
    pub fn to_bytes(&self, config: &SimConfig) -> Vec<u8> {
        let n = self.n();
        let mut b = Vec::with_capacity(176 + 8 * (2 * n + 3) + self.history.len() * 8 * (2 * n - 1));
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&(n as u64).to_le_bytes());
        b.extend_from_slice(&self.step.to_le_bytes());
        for v in [self.t, config.dt, config.c, config.d, config.tau_corr, config.e0_mag] {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b.extend_from_slice(&self.noise.epoch().to_le_bytes());
        for v in self.noise.xi() {
            b.extend_from_slice(&v.to_le_bytes());
        }
        let rng = self.noise.rng();
        b.extend_from_slice(&rng.get_seed());
        b.extend_from_slice(&rng.get_stream().to_le_bytes());
        b.extend_from_slice(&rng.get_word_pos().to_le_bytes());
        b.extend_from_slice(&(self.history.len() as u32).to_le_bytes());
        for v in self.y1.iter().chain(&self.y2) {
            b.extend_from_slice(&v.to_le_bytes());
        }
        for (h1, h2) in &self.history {
            for v in h1.iter().chain(h2) {
                b.extend_from_slice(&v.to_le_bytes());
            }
        }
        b
    }

    /// Decodes a checkpoint written for `config`; the physical parameters
    /// and time step must match.
    pub fn from_bytes(bytes: &[u8], config: &SimConfig) -> Result<Self> {
        let mut r = Reader { b: bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let n = r.u64()? as usize;
        if n != config.n {
            return Err(Error::Checkpoint(format!("checkpoint has N = {n}, config has N = {}", config.n)));
        }
        let step = r.u64()?;
        let t = r.f64()?;
        for (name, want) in [
            ("dt", config.dt),
            ("c", config.c),
            ("d", config.d),
            ("tau_corr", config.tau_corr),
            ("e0_mag", config.e0_mag),
        ] {
            let got = r.f64()?;
            if got.to_bits() != want.to_bits() {
                return Err(Error::Checkpoint(format!("{name} = {got} in checkpoint, {want} in config")));
            }
        }
        let epoch = r.u64()?;
        let mut xi = [0.0; 4];
        for x in &mut xi {
            *x = r.f64()?;
        }
        let seed: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        let stream = r.u64()?;
        let word_pos = u128::from_le_bytes(r.take(16)?.try_into().expect("16 bytes"));
        let hist_len = r.u32()? as usize;
        if hist_len > 2 {
            return Err(Error::Checkpoint(format!("history length {hist_len} > 2")));
        }
        let y1 = r.f64s(n + 2)?;
        let y2 = r.f64s(n + 1)?;
        let mut history = Vec::with_capacity(hist_len);
        for _ in 0..hist_len {
            history.push((r.f64s(n)?, r.f64s(n - 1)?));
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        let noise = NoiseState::restore(config.d, config.tau_corr, config.noise, xi, epoch, rng);
        Ok(SimState {
            t,
            step,
            y1,
            y2,
            noise,
            history,
        })
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos + k;
        if end > self.b.len() {
            return Err(Error::Checkpoint(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.b[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, k: usize) -> Result<Vec<f64>> {
        (0..k).map(|_| self.f64()).collect()
    }
}

impl Simulation {
    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.state().to_bytes(self.config()))
    }

    /// Resumes from a checkpoint. The recorded series restarts at the
    /// checkpoint time.
    pub fn resume(config: SimConfig, path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let state = SimState::from_bytes(&bytes, &config)?;
        Simulation::with_state(config, state)
    }
}
