//! 8-bit binary PGM heatmaps.

use std::io::Write;

use dmcount_core::DensityMap;

/// Encodes `m` as a `P5` image with max value 255, scaling by `scale`
/// (pixels at or above `scale` are white). A zero scale gives a black image.
pub fn encode(m: &DensityMap, scale: f64) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", m.cols(), m.rows()).into_bytes();
    out.extend(m.values().iter().map(|&v| {
        if scale > 0.0 {
            (255.0 * v / scale).round().clamp(0.0, 255.0) as u8
        } else {
            0
        }
    }));
    out
}

/// Writes the heatmap scaled by the map's own maximum; returns that scale.
pub fn write(path: &std::path::Path, m: &DensityMap) -> std::io::Result<f64> {
    let scale = m.max_value();
    std::fs::File::create(path)?.write_all(&encode(m, scale))?;
    Ok(scale)
}
