//! Seeded value-noise heightfield.
//!
//! Lattice values come from an integer hash of the cell coordinates and the
//! seed, interpolated with a smoothstep fade — cheap, infinite in extent,
//! and identical on every platform. Two octaves give the terrain a little
//! character without violating the smoothness the planner assumes.

/// Deterministic hash of a lattice corner to [0, 1).
fn corner_value(ix: i64, iy: i64, seed: u64) -> f64 {
    let mut h = seed ^ 0x5bd1_e995_9d1b_54a3;
    h = h.wrapping_add((ix as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    h = h.wrapping_add((iy as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93));
    h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    h ^= h >> 31;
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Single octave of value noise in [-1, 1], lattice spacing `wavelength`.
fn octave(x: f64, y: f64, wavelength: f64, seed: u64) -> f64 {
    let fx = x / wavelength;
    let fy = y / wavelength;
    let ix = fx.floor();
    let iy = fy.floor();
    let tx = smoothstep(fx - ix);
    let ty = smoothstep(fy - iy);
    let (ix, iy) = (ix as i64, iy as i64);
    let v00 = corner_value(ix, iy, seed);
    let v10 = corner_value(ix + 1, iy, seed);
    let v01 = corner_value(ix, iy + 1, seed);
    let v11 = corner_value(ix + 1, iy + 1, seed);
    let a = v00 + tx * (v10 - v00);
    let b = v01 + tx * (v11 - v01);
    2.0 * (a + ty * (b - a)) - 1.0
}

/// Smooth heightfield: amplitude-scaled two-octave value noise.
///
/// The result is bounded by `amplitude` in magnitude (the octaves sum to at
/// most 1 in absolute value by construction: 2/3 + 1/3).
pub fn heightfield(x: f64, y: f64, amplitude: f64, wavelength: f64, seed: u64) -> f64 {
    let base = octave(x, y, wavelength, seed);
    let detail = octave(x, y, wavelength / 2.0, seed.wrapping_add(0x51ED));
    amplitude * (2.0 / 3.0 * base + 1.0 / 3.0 * detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = heightfield(3.7, -11.2, 1.2, 10.0, 42);
        let b = heightfield(3.7, -11.2, 1.2, 10.0, 42);
        let c = heightfield(3.7, -11.2, 1.2, 10.0, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn amplitude_bounds_hold_everywhere_sampled() {
        for i in 0..60 {
            for j in 0..60 {
                let (x, y) = (i as f64 * 1.37 - 40.0, j as f64 * 1.91 - 55.0);
                let z = heightfield(x, y, 1.5, 8.0, 7);
                assert!(z.abs() <= 1.5 + 1e-9, "around ({x}, {y}): {z}");
            }
        }
    }

    #[test]
    fn continuity_at_small_scales() {
        // No jumps: neighbouring samples stay close.
        let mut prev = heightfield(0.0, 5.0, 1.2, 10.0, 9);
        for i in 1..400 {
            let x = i as f64 * 0.05;
            let z = heightfield(x, 5.0, 1.2, 10.0, 9);
            assert!((z - prev).abs() < 0.05, "jump at x={x}");
            prev = z;
        }
    }
}
