//! Circular arithmetic on angles in degrees.
//!
//! Yaw values live on `[-180, 180)`. Every difference and interpolation in
//! the crate goes through these helpers so that crossing the ±180° seam is
//! handled in one place.

/// Wraps any finite angle into `[-180, 180)`.
pub fn wrap_deg(angle: f64) -> f64 {
    let w = (angle + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Signed shortest rotation taking `from` to `to`, in `[-180, 180)`.
pub fn signed_diff(from: f64, to: f64) -> f64 {
    wrap_deg(to - from)
}

/// Unsigned circular distance in `[0, 180]`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Linear interpolation along the shorter arc from `a` to `b`.
pub fn lerp_deg(a: f64, b: f64, frac: f64) -> f64 {
    wrap_deg(a + frac * signed_diff(a, b))
}

/// Sector index of `angle` when the circle is cut into `360 / sector_deg`
/// parts starting at the 0° line and increasing counter-clockwise.
pub fn sector_of(angle: f64, sector_deg: f64) -> usize {
    let sectors = (360.0 / sector_deg).round() as usize;
    let idx = (angle.rem_euclid(360.0) / sector_deg).floor() as usize;
    idx.min(sectors - 1)
}
