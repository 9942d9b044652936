use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::CathodeConfig;
use super::optics::interpolate;
use super::BenchError;

/// Highest QE the planted truth may reach anywhere.
pub const MAX_QE: f64 = 0.45;

const BINARY_MAGIC: &[u8; 8] = b"QECMAP01";

/// A region whose response is scaled, in cathode-centred µm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Structure {
    Disc {
        x_um: f64,
        z_um: f64,
        radius_um: f64,
        multiplier: f64,
    },
    Ring {
        x_um: f64,
        z_um: f64,
        inner_um: f64,
        outer_um: f64,
        multiplier: f64,
    },
    Rect {
        x_min_um: f64,
        x_max_um: f64,
        z_min_um: f64,
        z_max_um: f64,
        multiplier: f64,
    },
    /// Two full-length bars through (x, z), one along each axis.
    Cross {
        x_um: f64,
        z_um: f64,
        half_width_um: f64,
        multiplier: f64,
    },
}

impl Structure {
    fn contains(&self, x: f64, z: f64) -> bool {
        match *self {
            Structure::Disc { x_um, z_um, radius_um, .. } => (x - x_um).hypot(z - z_um) <= radius_um,
            Structure::Ring {
                x_um,
                z_um,
                inner_um,
                outer_um,
                ..
            } => {
                let r = (x - x_um).hypot(z - z_um);
                r >= inner_um && r <= outer_um
            }
            Structure::Rect {
                x_min_um,
                x_max_um,
                z_min_um,
                z_max_um,
                ..
            } => x >= x_min_um && x <= x_max_um && z >= z_min_um && z <= z_max_um,
            Structure::Cross {
                x_um,
                z_um,
                half_width_um,
                ..
            } => (x - x_um).abs() <= half_width_um || (z - z_um).abs() <= half_width_um,
        }
    }

    fn multiplier(&self) -> f64 {
        match *self {
            Structure::Disc { multiplier, .. }
            | Structure::Ring { multiplier, .. }
            | Structure::Rect { multiplier, .. }
            | Structure::Cross { multiplier, .. } => multiplier,
        }
    }
}

/// Bialkali-like response used when the config gives no spectral table.
pub fn builtin_spectral() -> Vec<[f64; 2]> {
    vec![
        [250.0, 0.18],
        [280.0, 0.24],
        [320.0, 0.28],
        [360.0, 0.30],
        [400.0, 0.29],
        [450.0, 0.25],
        [500.0, 0.19],
        [550.0, 0.12],
        [600.0, 0.06],
        [650.0, 0.03],
        [700.0, 0.018],
        [800.0, 0.014],
        [900.0, 0.012],
        [1000.0, 0.011],
        [1100.0, 0.010],
    ]
}

/// Planted ground truth: a response-multiplier grid times a spectral curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CathodeMap {
    pub pitch_um: f64,
    pub nx: usize,
    pub nz: usize,
    /// Cathode-centred position of cell (0, 0).
    pub origin_x_um: f64,
    pub origin_z_um: f64,
    /// Row-major by z, zero outside the photocathode.
    pub multipliers: Vec<f64>,
    pub spectral: Vec<[f64; 2]>,
}

impl CathodeMap {
    pub fn build(config: &CathodeConfig) -> Result<Self, BenchError> {
        let spectral = if config.spectral.is_empty() {
            builtin_spectral()
        } else {
            config.spectral.clone()
        };
        let map = match &config.map_file {
            Some(path) => {
                let mut m = Self::load(path)?;
                m.spectral = spectral;
                m
            }
            None => Self::disc(config.radius_um, config.pitch_um, &config.structures, spectral),
        };
        map.validate()?;
        Ok(map)
    }

    pub fn disc(radius_um: f64, pitch_um: f64, structures: &[Structure], spectral: Vec<[f64; 2]>) -> Self {
        let half = (radius_um / pitch_um).ceil() as usize;
        let n = 2 * half + 1;
        let origin = -(half as f64) * pitch_um;
        let mut multipliers = Vec::with_capacity(n * n);
        for iz in 0..n {
            let z = origin + iz as f64 * pitch_um;
            for ix in 0..n {
                let x = origin + ix as f64 * pitch_um;
                let m = if x.hypot(z) <= radius_um {
                    structures
                        .iter()
                        .filter(|s| s.contains(x, z))
                        .map(Structure::multiplier)
                        .product()
                } else {
                    0.0
                };
                multipliers.push(m);
            }
        }
        CathodeMap {
            pitch_um,
            nx: n,
            nz: n,
            origin_x_um: origin,
            origin_z_um: origin,
            multipliers,
            spectral,
        }
    }

    /// A structure-free disc with flat spectral QE.
    pub fn uniform(qe: f64, radius_um: f64, pitch_um: f64) -> Self {
        Self::disc(radius_um, pitch_um, &[], vec![[250.0, qe], [1100.0, qe]])
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.multipliers.len() != self.nx * self.nz || self.nx == 0 || self.nz == 0 {
            return Err(BenchError::MapFormat(format!(
                "{} values for a {}x{} grid",
                self.multipliers.len(),
                self.nx,
                self.nz
            )));
        }
        if !(self.pitch_um > 0.0) {
            return Err(BenchError::MapFormat(format!("pitch {} must be positive", self.pitch_um)));
        }
        if self.spectral.is_empty() || self.spectral.windows(2).any(|w| w[0][0] >= w[1][0]) {
            return Err(BenchError::InvalidConfig("spectral table must be non-empty and sorted".into()));
        }
        let max_m = self.multipliers.iter().copied().fold(0.0, f64::max);
        let max_s = self.spectral.iter().map(|p| p[1]).fold(0.0, f64::max);
        if self.multipliers.iter().any(|m| !(*m >= 0.0)) || self.spectral.iter().any(|p| !(p[1] >= 0.0)) {
            return Err(BenchError::InvalidConfig("negative or NaN response in cathode map".into()));
        }
        if max_m * max_s > MAX_QE {
            return Err(BenchError::InvalidConfig(format!(
                "peak planted QE {} exceeds {MAX_QE}",
                max_m * max_s
            )));
        }
        Ok(())
    }

    pub fn spectral_qe(&self, nm: f64) -> f64 {
        interpolate(&self.spectral, nm)
    }

    fn cell(&self, ix: i64, iz: i64) -> f64 {
        if ix < 0 || iz < 0 || ix >= self.nx as i64 || iz >= self.nz as i64 {
            0.0
        } else {
            self.multipliers[iz as usize * self.nx + ix as usize]
        }
    }

    fn index_of(&self, x: f64, z: f64) -> (i64, i64) {
        (
            ((x - self.origin_x_um) / self.pitch_um).round() as i64,
            ((z - self.origin_z_um) / self.pitch_um).round() as i64,
        )
    }

    /// Multiplier of the cell nearest to a cathode-centred point.
    pub fn multiplier_at(&self, x: f64, z: f64) -> f64 {
        let (ix, iz) = self.index_of(x, z);
        self.cell(ix, iz)
    }

    /// Mean multiplier under a top-hat spot: cells whose centres lie inside the
    /// spot, or the nearest cell when the spot is smaller than one cell.
    pub fn spot_multiplier(&self, x: f64, z: f64, diameter_um: f64) -> f64 {
        let r = diameter_um / 2.0;
        let span = (r / self.pitch_um).ceil() as i64 + 1;
        let (cx, cz) = self.index_of(x, z);
        let (mut sum, mut n) = (0.0, 0usize);
        for iz in cz - span..=cz + span {
            let zc = self.origin_z_um + iz as f64 * self.pitch_um;
            for ix in cx - span..=cx + span {
                let xc = self.origin_x_um + ix as f64 * self.pitch_um;
                if (xc - x).hypot(zc - z) <= r {
                    sum += self.cell(ix, iz);
                    n += 1;
                }
            }
        }
        if n == 0 {
            self.cell(cx, cz)
        } else {
            sum / n as f64
        }
    }

    pub fn qe_spot(&self, x: f64, z: f64, diameter_um: f64, nm: f64) -> f64 {
        self.spot_multiplier(x, z, diameter_um) * self.spectral_qe(nm)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let bytes = fs::read(path)?;
        if bytes.starts_with(BINARY_MAGIC) {
            Self::from_binary(&bytes)
        } else {
            let text = String::from_utf8(bytes).map_err(|_| BenchError::MapFormat("map file is not UTF-8".into()))?;
            Self::from_csv(&text)
        }
    }

    /// `# key=value` header lines (pitch_um, origin_x_um, origin_z_um) then
    /// one comma-separated row of multipliers per z index.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# qe cathode multiplier grid v1\n");
        out.push_str(&format!("# pitch_um={:e}\n", self.pitch_um));
        out.push_str(&format!("# origin_x_um={:e}\n", self.origin_x_um));
        out.push_str(&format!("# origin_z_um={:e}\n", self.origin_z_um));
        for row in self.multipliers.chunks(self.nx) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, BenchError> {
        let mut pitch = None;
        let mut ox = None;
        let mut oz = None;
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            if let Some((k, v)) = line.trim().split_once('=') {
                let v: f64 = v
                    .trim()
                    .parse()
                    .map_err(|_| BenchError::MapFormat(format!("bad header value {v:?}")))?;
                match k.trim() {
                    "pitch_um" => pitch = Some(v),
                    "origin_x_um" => ox = Some(v),
                    "origin_z_um" => oz = Some(v),
                    _ => {}
                }
            }
        }
        let pitch = pitch.ok_or_else(|| BenchError::MapFormat("missing pitch_um header".into()))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut multipliers = Vec::new();
        let mut nx = 0;
        let mut nz = 0;
        for record in reader.records() {
            let record = record.map_err(|e| BenchError::MapFormat(e.to_string()))?;
            if nz == 0 {
                nx = record.len();
            } else if record.len() != nx {
                return Err(BenchError::MapFormat(format!("row {nz} has {} cells, expected {nx}", record.len())));
            }
            for cell in record.iter() {
                multipliers.push(
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|_| BenchError::MapFormat(format!("bad cell {cell:?}")))?,
                );
            }
            nz += 1;
        }
        let half = |n: usize| -((n.saturating_sub(1)) as f64) / 2.0 * pitch;
        let map = CathodeMap {
            pitch_um: pitch,
            nx,
            nz,
            origin_x_um: ox.unwrap_or(half(nx)),
            origin_z_um: oz.unwrap_or(half(nz)),
            multipliers,
            spectral: builtin_spectral(),
        };
        map.validate()?;
        Ok(map)
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + 8 * self.multipliers.len());
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&(self.nx as u32).to_le_bytes());
        out.extend_from_slice(&(self.nz as u32).to_le_bytes());
        for v in [self.pitch_um, self.origin_x_um, self.origin_z_um] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.multipliers {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self, BenchError> {
        let short = || BenchError::MapFormat("truncated binary map".into());
        if !bytes.starts_with(BINARY_MAGIC) {
            return Err(BenchError::MapFormat("missing binary map magic".into()));
        }
        let mut pos = BINARY_MAGIC.len();
        let mut take = |n: usize| -> Result<&[u8], BenchError> {
            let s = bytes.get(pos..pos + n).ok_or_else(short)?;
            pos += n;
            Ok(s)
        };
        let nx = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let nz = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let mut f = || -> Result<f64, BenchError> { Ok(f64::from_le_bytes(take(8)?.try_into().unwrap())) };
        let pitch_um = f()?;
        let origin_x_um = f()?;
        let origin_z_um = f()?;
        let count = nx.checked_mul(nz).ok_or_else(short)?;
        let multipliers = (0..count).map(|_| f()).collect::<Result<Vec<_>, _>>()?;
        let map = CathodeMap {
            pitch_um,
            nx,
            nz,
            origin_x_um,
            origin_z_um,
            multipliers,
            spectral: builtin_spectral(),
        };
        map.validate()?;
        Ok(map)
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let bytes = match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => self.to_csv().into_bytes(),
            _ => self.to_binary(),
        };
        let mut f = fs::File::create(path)?;
        f.write_all(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small() -> CathodeMap {
        CathodeMap::disc(
            5_000.0,
            250.0,
            &[Structure::Rect {
                x_min_um: 1_000.0,
                x_max_um: 3_000.0,
                z_min_um: -1_000.0,
                z_max_um: 1_000.0,
                multiplier: 1.2,
            }],
            builtin_spectral(),
        )
    }

    #[test]
    fn outside_disc_is_dark() {
        let m = small();
        assert_eq!(m.multiplier_at(0.0, 0.0), 1.0);
        assert_eq!(m.multiplier_at(4_900.0, 4_900.0), 0.0);
        assert_eq!(m.multiplier_at(90_000.0, 0.0), 0.0);
        assert_eq!(m.spot_multiplier(0.0, 0.0, 1000.0), 1.0);
    }

    #[test]
    fn structure_scales_response() {
        let m = small();
        let on = m.qe_spot(2_000.0, 0.0, 1000.0, 410.0);
        let off = m.qe_spot(-2_000.0, 0.0, 1000.0, 410.0);
        assert!((on / off - 1.2).abs() < 1e-12);
    }

    #[test]
    fn default_config_respects_peak() {
        let m = CathodeMap::build(&CathodeConfig::default()).unwrap();
        assert_eq!(m.nx, 801);
        let peak = m.multipliers.iter().copied().fold(0.0, f64::max) * 0.30;
        assert!(peak <= MAX_QE);
        assert!(m.spectral_qe(1100.0) >= 0.01);
    }

    #[test]
    fn too_bright_map_rejected() {
        let m = CathodeMap::uniform(0.5, 1000.0, 100.0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let m = small();
        let back = CathodeMap::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back.multipliers, m.multipliers);
        assert_eq!((back.nx, back.nz, back.pitch_um, back.origin_x_um), (m.nx, m.nz, m.pitch_um, m.origin_x_um));
        let back = CathodeMap::from_binary(&m.to_binary()).unwrap();
        assert_eq!(back.multipliers, m.multipliers);
        assert!(CathodeMap::from_binary(&m.to_binary()[..50]).is_err());
    }

    proptest! {
        #[test]
        fn planted_qe_bounded(x in -60_000.0f64..60_000.0, z in -60_000.0f64..60_000.0, nm in 250.0f64..1100.0) {
            let m = small();
            let q = m.qe_spot(x, z, 1000.0, nm);
            prop_assert!((0.0..=MAX_QE).contains(&q));
            if x.hypot(z) > 5_000.0 + 1_000.0 {
                prop_assert_eq!(q, 0.0);
            }
        }
    }
}
