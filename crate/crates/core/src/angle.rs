//! Angle helpers shared by the extraction and matching stages.
//!
//! All angles in this crate are degrees in `[0, 360)`, measured from the
//! +column axis, counter-clockwise with the row axis pointing down (so a
//! vector toward decreasing rows points at 90°).

/// Normalizes an angle in degrees into `[0, 360)`.
pub fn normalize_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    // rem_euclid can return exactly 360.0 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Full-quadrant angle of the vector `(drow, dcol)` in image coordinates.
///
/// The zero vector maps to 0°. Axis-aligned vectors return exact
/// multiples of 90 and perfect diagonals exact multiples of 45, and a
/// quarter-turned input (`(drow, dcol)` -> `(-dcol, drow)`) lands on
/// exactly the base result plus 90° for those vectors; symmetry tests
/// rely on this being bit-exact.
pub fn of_vector_deg(drow: f64, dcol: f64) -> f64 {
    // Math axes: x = columns, y = up (negated rows).
    let x = dcol;
    let y = -drow;
    if x == 0.0 && y == 0.0 {
        return 0.0;
    }
    // Exact quadrant reduction: (qx, qy) lies in the first quadrant with
    // angle in [0, 90).
    let (quarter, qx, qy) = if x > 0.0 && y >= 0.0 {
        (0.0, x, y)
    } else if x <= 0.0 && y > 0.0 {
        (90.0, y, -x)
    } else if x < 0.0 && y <= 0.0 {
        (180.0, -x, -y)
    } else {
        (270.0, -y, x)
    };
    // atan2's rounding would put equal legs a few ulps off 45, and that
    // residue re-rounds differently under each quarter offset.
    let base = if qx == qy {
        45.0
    } else {
        qy.atan2(qx).to_degrees()
    };
    normalize_deg(quarter + base)
}

/// Circular distance between two angles in degrees, in `[0, 180]`.
pub fn circular_diff_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}
