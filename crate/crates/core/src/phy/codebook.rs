use std::io::{Read, Write};

use ndarray::Array2;

use super::{
    continuous_phase, quantize, ApertureParams, Codeword, Direction, PhyError, RisAperture,
    SteeringPair,
};

/// Angle-ordered family of 1-bit codewords sweeping the azimuth cut.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    aperture: RisAperture,
    incident: Direction,
    scan_start_deg: f64,
    scan_end_deg: f64,
    step_deg: f64,
    codewords: Vec<Codeword>,
}

/// Number of codewords for a scan, end inclusive when it lands on the grid.
pub fn scan_len(scan_start_deg: f64, scan_end_deg: f64, step_deg: f64) -> usize {
    ((scan_end_deg - scan_start_deg) / step_deg + 1e-9).floor() as usize + 1
}

/// Codewords for azimuth angles `start, start + step, ..., end` under a fixed illumination.
pub fn build_codebook(
    aperture: &RisAperture,
    incident: Direction,
    scan_start_deg: f64,
    scan_end_deg: f64,
    step_deg: f64,
) -> Result<Codebook, PhyError> {
    if !(step_deg > 0.0) {
        return Err(PhyError::Argument("step_deg must be > 0".into()));
    }
    if !(scan_start_deg < scan_end_deg) {
        return Err(PhyError::Argument("scan_start must be < scan_end".into()));
    }
    let count = scan_len(scan_start_deg, scan_end_deg, step_deg);
    let codewords = (0..count)
        .map(|index| {
            let angle = scan_start_deg + index as f64 * step_deg;
            let steering = SteeringPair::new(incident, Direction::azimuth(angle))?;
            Ok(Codeword {
                states: quantize(&continuous_phase(aperture, &steering)),
                steering,
                index,
            })
        })
        .collect::<Result<Vec<_>, PhyError>>()?;
    Ok(Codebook {
        aperture: aperture.clone(),
        incident,
        scan_start_deg,
        scan_end_deg,
        step_deg,
        codewords,
    })
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codewords(&self) -> &[Codeword] {
        &self.codewords
    }

    pub fn get(&self, index: usize) -> Option<&Codeword> {
        self.codewords.get(index)
    }

    pub fn aperture(&self) -> &RisAperture {
        &self.aperture
    }

    pub fn incident(&self) -> Direction {
        self.incident
    }

    pub fn step_deg(&self) -> f64 {
        self.step_deg
    }

    pub fn scan_range(&self) -> (f64, f64) {
        (self.scan_start_deg, self.scan_end_deg)
    }

    /// Nominal steering azimuth of codeword `index`.
    pub fn angle_of(&self, index: usize) -> f64 {
        self.scan_start_deg + index as f64 * self.step_deg
    }

    /// Index whose nominal angle is closest to `angle_deg`, clamped to the scan.
    pub fn nearest_index(&self, angle_deg: f64) -> usize {
        let raw = ((angle_deg - self.scan_start_deg) / self.step_deg).round();
        raw.clamp(0.0, (self.len() - 1) as f64) as usize
    }

    /// Serialize in the versioned binary layout described in `docs/codebook-format.md`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), PhyError> {
        let p = self.aperture.params();
        let (kind, seed) = match self.aperture.pre_phase_seed() {
            Some(seed) => (1u8, seed),
            None if !self.aperture.has_pre_phase() => (0u8, 0u64),
            None => {
                return Err(PhyError::Config(
                    "pre-phase was not generated from a seed and cannot be exported".into(),
                ))
            }
        };
        let n = u16::try_from(p.n).map_err(|_| PhyError::Config("n too large".into()))?;
        let mut buf = Vec::with_capacity(HEADER_LEN + self.len() * packed_len(p.n));
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_be_bytes());
        buf.extend_from_slice(&n.to_be_bytes());
        for v in [
            p.element_spacing,
            p.carrier_frequency,
            p.efficiency,
            self.incident.theta_deg,
            self.incident.phi_deg,
            self.scan_start_deg,
            self.scan_end_deg,
            self.step_deg,
        ] {
            buf.extend_from_slice(&v.to_be_bytes());
        }
        buf.push(kind);
        buf.extend_from_slice(&seed.to_be_bytes());
        buf.extend_from_slice(&(self.len() as u32).to_be_bytes());
        debug_assert_eq!(buf.len(), HEADER_LEN);
        for cw in &self.codewords {
            buf.extend_from_slice(&pack_states(&cw.states));
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, PhyError> {
        let mut out = Vec::new();
        self.write_to(&mut out)?;
        Ok(out)
    }

    /// Parse a codebook file. The pre-phase is regenerated from the stored seed.
    pub fn read_from<R: Read>(mut r: R) -> Result<Codebook, PhyError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Codebook, PhyError> {
        let bad = |msg: &str| PhyError::Format(msg.to_string());
        if bytes.len() < HEADER_LEN {
            return Err(bad("file shorter than header"));
        }
        if &bytes[0..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u16::from_be_bytes([bytes[4], bytes[5]]);
        if version != FORMAT_VERSION {
            return Err(PhyError::Format(format!("unsupported version {version}")));
        }
        let n = u16::from_be_bytes([bytes[6], bytes[7]]) as usize;
        let f = |off: usize| f64::from_be_bytes(bytes[off..off + 8].try_into().unwrap());
        let params = ApertureParams {
            n,
            element_spacing: f(8),
            carrier_frequency: f(16),
            efficiency: f(24),
        };
        let incident = Direction::new(f(32), f(40));
        let (start, end, step) = (f(48), f(56), f(64));
        let kind = bytes[72];
        let seed = u64::from_be_bytes(bytes[73..81].try_into().unwrap());
        let count = u32::from_be_bytes(bytes[81..85].try_into().unwrap()) as usize;

        let aperture = match kind {
            0 => RisAperture::without_pre_phase(params)?,
            1 => RisAperture::seeded(params, seed)?,
            k => return Err(PhyError::Format(format!("unknown pre-phase kind {k}"))),
        };
        if !(step > 0.0 && start < end) || scan_len(start, end, step) != count {
            return Err(bad("scan range disagrees with codeword count"));
        }
        let stride = packed_len(n);
        if bytes.len() != HEADER_LEN + count * stride {
            return Err(PhyError::Format(format!(
                "expected {} bytes, found {}",
                HEADER_LEN + count * stride,
                bytes.len()
            )));
        }
        let codewords = (0..count)
            .map(|index| {
                let off = HEADER_LEN + index * stride;
                let steering = SteeringPair::new(incident, Direction::azimuth(start + index as f64 * step))?;
                Ok(Codeword {
                    states: unpack_states(&bytes[off..off + stride], n),
                    steering,
                    index,
                })
            })
            .collect::<Result<Vec<_>, PhyError>>()?;
        Ok(Codebook {
            aperture,
            incident,
            scan_start_deg: start,
            scan_end_deg: end,
            step_deg: step,
            codewords,
        })
    }
}

const MAGIC: &[u8; 4] = b"RISC";
const FORMAT_VERSION: u16 = 1;
/// Fixed header size in bytes.
pub const HEADER_LEN: usize = 85;

fn packed_len(n: usize) -> usize {
    (n * n).div_ceil(8)
}

/// Row-major (`m` outer), MSB-first bit packing; trailing pad bits are zero.
fn pack_states(states: &Array2<bool>) -> Vec<u8> {
    let mut out = vec![0u8; packed_len(states.nrows())];
    for (i, &s) in states.iter().enumerate() {
        if s {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

fn unpack_states(bytes: &[u8], n: usize) -> Array2<bool> {
    Array2::from_shape_fn((n, n), |(m, k)| {
        let i = m * n + k;
        bytes[i / 8] & (0x80 >> (i % 8)) != 0
    })
}
