use serde::{Deserialize, Serialize};

use super::EngineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMethod {
    /// One measurement with the heads in their normal places.
    Single,
    /// Normal and exchanged head positions, combined geometrically.
    Exchanged,
}

impl SplitMethod {
    pub fn name(self) -> &'static str {
        match self {
            SplitMethod::Single => "single",
            SplitMethod::Exchanged => "exchanged",
        }
    }
}

impl std::str::FromStr for SplitMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(SplitMethod::Single),
            "exchanged" => Ok(SplitMethod::Exchanged),
            other => Err(format!("unknown split method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitEntry {
    pub nm: f64,
    /// DUT-arm power per unit monitor-arm power.
    pub k: f64,
    pub method: SplitMethod,
    /// Relative statistical uncertainty of `k`.
    pub uncertainty_rel: f64,
    /// Monitor head gain relative to the geometric mean of the head pair.
    /// Exactly 1 for the single method, which cannot observe it.
    pub monitor_gain: f64,
}

/// Monitor-to-DUT conversion factors, sorted by wavelength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRatioTable {
    entries: Vec<SplitEntry>,
}

impl SplitRatioTable {
    pub fn new(mut entries: Vec<SplitEntry>) -> Result<Self, EngineError> {
        if entries.is_empty() {
            return Err(EngineError::Calibration("splitter table is empty".into()));
        }
        entries.sort_by(|a, b| a.nm.total_cmp(&b.nm));
        for e in &entries {
            if !(e.k > 0.0 && e.k.is_finite() && e.monitor_gain > 0.0 && e.monitor_gain.is_finite()) {
                return Err(EngineError::Calibration(format!(
                    "entry at {} nm has k = {}, monitor_gain = {}",
                    e.nm, e.k, e.monitor_gain
                )));
            }
        }
        if let Some(w) = entries.windows(2).find(|w| w[0].nm == w[1].nm) {
            return Err(EngineError::Calibration(format!("duplicate entry at {} nm", w[0].nm)));
        }
        Ok(SplitRatioTable { entries })
    }

    pub fn entries(&self) -> &[SplitEntry] {
        &self.entries
    }

    pub fn method(&self) -> SplitMethod {
        if self.entries.iter().all(|e| e.method == SplitMethod::Exchanged) {
            SplitMethod::Exchanged
        } else {
            SplitMethod::Single
        }
    }

    /// Entry at `nm`, linearly interpolated between neighbours. Wavelengths
    /// outside the calibrated span are refused.
    pub fn at(&self, nm: f64) -> Result<SplitEntry, EngineError> {
        let first = self.entries[0];
        let last = self.entries[self.entries.len() - 1];
        if nm < first.nm || nm > last.nm {
            return Err(EngineError::OutsideCalibration {
                nm,
                min: first.nm,
                max: last.nm,
            });
        }
        let i = self.entries.partition_point(|e| e.nm < nm);
        let hi = self.entries[i];
        if hi.nm == nm || i == 0 {
            return Ok(hi);
        }
        let lo = self.entries[i - 1];
        let f = (nm - lo.nm) / (hi.nm - lo.nm);
        let lerp = |a: f64, b: f64| a + (b - a) * f;
        Ok(SplitEntry {
            nm,
            k: lerp(lo.k, hi.k),
            method: if lo.method == hi.method { lo.method } else { SplitMethod::Single },
            uncertainty_rel: lo.uncertainty_rel.max(hi.uncertainty_rel),
            monitor_gain: lerp(lo.monitor_gain, hi.monitor_gain),
        })
    }
}

/// Combines the DUT/monitor ratios measured with the heads in normal and
/// exchanged positions. Returns (k, monitor_gain).
///
/// With head gains g1 (monitor in the normal layout) and g2,
/// `r_normal = k g2 / g1` and `r_swapped = k g1 / g2`, so their geometric mean
/// is k and `(r_swapped / r_normal)^(1/4) = sqrt(g1 / g2)`.
pub fn exchange_combine(r_normal: f64, r_swapped: f64) -> (f64, f64) {
    ((r_normal * r_swapped).sqrt(), (r_swapped / r_normal).powf(0.25))
}
