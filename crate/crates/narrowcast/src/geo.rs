//! Prefix-grid geometry. Coordinates coarsen by truncating a sign-magnitude
//! fixed-point expansion with an 8-bit integer part:
//!
//! ```text
//! prefix(x, bits) = sign(x) · floor(|x| / 2^(8 − bits))
//! ```
//!
//! so 0 bits is one global cell, 8 bits are whole-degree cells (New York's
//! 40.71455 N, −74.00712 E coarsens to exactly 40 N, −74 E), and each
//! additional bit halves the cell. Sign-magnitude means the prefix-0 cell of
//! any precision spans both signs of zero; boundaries belong to the cell of
//! larger magnitude.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
pub const MIN_RADIUS_M: f64 = 10.0;
pub const MAX_PREFIX_BITS: u8 = 40;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} out of [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} out of [-180, 180]")]
    Longitude(f64),
    #[error("precision {0} exceeds {MAX_PREFIX_BITS} bits")]
    Precision(u8),
    #[error("prefix {prefix} not representable at {bits} bits")]
    Prefix { prefix: i64, bits: u8 },
    #[error("radius {0} below the {MIN_RADIUS_M} m minimum")]
    Radius(f64),
    #[error("time window begins after it ends")]
    TimeOrder,
}

/// A grid cell: latitude and longitude prefixes with their precisions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub lat_prefix: i64,
    pub lon_prefix: i64,
    pub lat_bits: u8,
    pub lon_bits: u8,
}

/// A circle on the sphere with a validity window: where and when a message
/// applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub lat: f64,
    pub lon: f64,
    pub radius_m: f64,
    pub t_begin: u64,
    pub t_end: u64,
}

pub(crate) fn check_lat(lat: f64) -> Result<(), GeoError> {
    if !(-90.0..=90.0).contains(&lat) || lat.is_nan() {
        return Err(GeoError::Latitude(lat));
    }
    Ok(())
}

pub(crate) fn check_lon(lon: f64) -> Result<(), GeoError> {
    if !(-180.0..=180.0).contains(&lon) || lon.is_nan() {
        return Err(GeoError::Longitude(lon));
    }
    Ok(())
}

/// Degrees per cell at a precision.
fn unit(bits: u8) -> f64 {
    256.0 / (1u64 << bits) as f64
}

/// The truncation itself: sign-magnitude floor in cell units.
fn prefix_of(x: f64, bits: u8) -> i64 {
    let m = (x.abs() / unit(bits)).floor() as i64;
    if x < 0.0 {
        -m
    } else {
        m
    }
}

/// Coarsens a full-precision location to the requested precisions.
pub fn region_of(lat: f64, lon: f64, lat_bits: u8, lon_bits: u8) -> Result<Region, GeoError> {
    check_lat(lat)?;
    check_lon(lon)?;
    if lat_bits > MAX_PREFIX_BITS {
        return Err(GeoError::Precision(lat_bits));
    }
    if lon_bits > MAX_PREFIX_BITS {
        return Err(GeoError::Precision(lon_bits));
    }
    Ok(Region {
        lat_prefix: prefix_of(lat, lat_bits),
        lon_prefix: prefix_of(lon, lon_bits),
        lat_bits,
        lon_bits,
    })
}

impl Region {
    pub fn validate(&self) -> Result<(), GeoError> {
        for (prefix, bits) in [
            (self.lat_prefix, self.lat_bits),
            (self.lon_prefix, self.lon_bits),
        ] {
            if bits > MAX_PREFIX_BITS {
                return Err(GeoError::Precision(bits));
            }
            if prefix.unsigned_abs() > (1u64 << bits) {
                return Err(GeoError::Prefix { prefix, bits });
            }
        }
        Ok(())
    }

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        prefix_of(lat, self.lat_bits) == self.lat_prefix
            && prefix_of(lon, self.lon_bits) == self.lon_prefix
    }

    /// The cell's coordinate intervals (lo, hi). Truncation toward zero
    /// makes the prefix-0 cell span both signs.
    pub fn lat_interval(&self) -> (f64, f64) {
        interval(self.lat_prefix, self.lat_bits)
    }

    pub fn lon_interval(&self) -> (f64, f64) {
        interval(self.lon_prefix, self.lon_bits)
    }
}

fn interval(prefix: i64, bits: u8) -> (f64, f64) {
    let u = unit(bits);
    match prefix.signum() {
        1 => (prefix as f64 * u, (prefix + 1) as f64 * u),
        -1 => ((prefix - 1) as f64 * u, prefix as f64 * u),
        _ => (-u, u),
    }
}

impl Area {
    pub fn validate(&self) -> Result<(), GeoError> {
        check_lat(self.lat)?;
        check_lon(self.lon)?;
        if self.radius_m.is_nan() || self.radius_m < MIN_RADIUS_M {
            return Err(GeoError::Radius(self.radius_m));
        }
        if self.t_begin > self.t_end {
            return Err(GeoError::TimeOrder);
        }
        Ok(())
    }

    pub fn contains_point(&self, lat: f64, lon: f64, t: u64) -> bool {
        t >= self.t_begin
            && t <= self.t_end
            && haversine_m(self.lat, self.lon, lat, lon) <= self.radius_m
    }
}

/// Great-circle distance in meters.
pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = (lat2 - lat1).to_radians();
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

/// Whether an area's circle intersects a region's cell. The single
/// predicate both the index path and the brute-force scan use: distance
/// from the circle center to the coordinate-clamped nearest point of the
/// cell rectangle, with longitude wrap handled by shifting.
pub fn area_intersects_region(area: &Area, region: &Region) -> bool {
    let (lat_lo, lat_hi) = region.lat_interval();
    let (lon_lo, lon_hi) = region.lon_interval();
    let clamped_lat = area.lat.clamp(lat_lo, lat_hi);
    for shift in [-360.0, 0.0, 360.0] {
        let lon = (area.lon + shift).clamp(lon_lo, lon_hi);
        if haversine_m(area.lat, area.lon + shift, clamped_lat, lon) <= area.radius_m {
            return true;
        }
    }
    false
}

/// Index cells a circle can touch: every cell in the circle's bounding box.
/// The latitude pad is the angular radius; the longitude pad uses the exact
/// spherical bound `sin(Δλ/2) ≤ sin(r/2) / cos(φ_max)`, widening to the
/// full range when the band nears a pole. A superset is fine — the final
/// filter is [`area_intersects_region`] — missing a cell is not.
pub fn covering_cells(area: &Area, lat_bits: u8, lon_bits: u8) -> Vec<(i64, i64)> {
    let ang = (area.radius_m / EARTH_RADIUS_M).to_degrees();
    let lat_lo = (area.lat - ang).max(-90.0);
    let lat_hi = (area.lat + ang).min(90.0);

    let max_abs_lat = lat_lo.abs().max(lat_hi.abs());
    let near_pole = max_abs_lat > 89.5;
    let half = (area.radius_m / EARTH_RADIUS_M / 2.0).sin();
    let ratio = half / max_abs_lat.to_radians().cos();
    let lon_pad = if near_pole || ratio >= 1.0 {
        180.0
    } else {
        (2.0 * ratio.asin()).to_degrees()
    };

    let lat_step = unit(lat_bits) / 2.0;
    let lon_step = unit(lon_bits) / 2.0;
    let mut cells = std::collections::HashSet::new();
    let mut lat = lat_lo;
    loop {
        let mut lon_off = -lon_pad;
        loop {
            let lon = wrap_lon(area.lon + lon_off);
            cells.insert((prefix_of(lat, lat_bits), prefix_of(lon, lon_bits)));
            if lon_off >= lon_pad {
                break;
            }
            lon_off = (lon_off + lon_step).min(lon_pad);
        }
        if lat >= lat_hi {
            break;
        }
        lat = (lat + lat_step).min(lat_hi);
    }
    cells.into_iter().collect()
}

/// Index cells overlapping a queried region, for query fan-out. Pure box
/// overlap on the coordinate intervals.
pub fn cells_overlapping_region(region: &Region, lat_bits: u8, lon_bits: u8) -> Vec<(i64, i64)> {
    let (lat_lo, lat_hi) = region.lat_interval();
    let (lon_lo, lon_hi) = region.lon_interval();
    let lat_step = unit(lat_bits) / 2.0;
    let lon_step = unit(lon_bits) / 2.0;
    let mut cells = std::collections::HashSet::new();
    let mut lat = lat_lo.max(-90.0);
    let lat_end = lat_hi.min(90.0);
    loop {
        let mut lon = lon_lo.max(-256.0);
        let lon_end = lon_hi.min(256.0);
        loop {
            cells.insert((prefix_of(lat, lat_bits), prefix_of(wrap_lon(lon), lon_bits)));
            if lon >= lon_end {
                break;
            }
            lon = (lon + lon_step).min(lon_end);
        }
        if lat >= lat_end {
            break;
        }
        lat = (lat + lat_step).min(lat_end);
    }
    cells.into_iter().collect()
}

fn wrap_lon(lon: f64) -> f64 {
    let wrapped = (lon + 180.0).rem_euclid(360.0) - 180.0;
    if wrapped == -180.0 {
        180.0
    } else {
        wrapped
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nyc_coarsens_to_whole_degrees() {
        let region = region_of(40.71455, -74.00712, 8, 8).unwrap();
        assert_eq!(region.lat_prefix, 40);
        assert_eq!(region.lon_prefix, -74);
        assert!(region.contains(40.0, -74.0));
        assert!(region.contains(40.71455, -74.00712));
    }

    #[test]
    fn zero_bits_is_the_global_region() {
        let region = region_of(40.71455, -74.00712, 0, 0).unwrap();
        assert_eq!((region.lat_prefix, region.lon_prefix), (0, 0));
        assert!(region.contains(-89.9, 179.9));
        assert!(region.contains(89.9, -179.9));
    }

    #[test]
    fn boundaries_go_to_the_higher_magnitude_cell() {
        // At 8 bits (1° cells), exactly 41.0 belongs to cell 41, not 40.
        let r = region_of(41.0, 10.0, 8, 8).unwrap();
        assert_eq!(r.lat_prefix, 41);
        let r = region_of(-41.0, 10.0, 8, 8).unwrap();
        assert_eq!(r.lat_prefix, -41);
    }

    #[test]
    fn precision_out_of_range_is_rejected() {
        assert_eq!(
            region_of(0.0, 0.0, 41, 8).unwrap_err(),
            GeoError::Precision(41)
        );
        assert!(region_of(91.0, 0.0, 8, 8).is_err());
        assert!(region_of(0.0, 181.0, 8, 8).is_err());
    }

    #[test]
    fn intervals_match_prefixes() {
        for (x, bits) in [(40.7, 8u8), (-74.0, 8), (0.3, 4), (-0.3, 4), (179.9, 9)] {
            let p = prefix_of(x, bits);
            let (lo, hi) = interval(p, bits);
            assert!(lo <= x && x <= hi, "x={x} bits={bits} p={p} [{lo},{hi}]");
        }
    }

    #[test]
    fn haversine_spot_checks() {
        // One degree of latitude ≈ 111.2 km.
        let d = haversine_m(0.0, 0.0, 1.0, 0.0);
        assert!((d - 111_195.0).abs() < 200.0, "{d}");
        assert_eq!(haversine_m(40.0, -74.0, 40.0, -74.0), 0.0);
    }

    #[test]
    fn covering_cells_contain_every_inside_point() {
        // Sample points inside random-ish circles; each point's cell must be
        // among the covering cells.
        let areas = [
            (40.7, -74.0, 50_000.0),
            (-33.9, 151.2, 120_000.0),
            (64.1, -21.9, 300_000.0),
            (0.0, 179.95, 80_000.0),
        ];
        for (lat, lon, radius) in areas {
            let area = Area {
                lat,
                lon,
                radius_m: radius,
                t_begin: 0,
                t_end: 1,
            };
            let cells: std::collections::HashSet<_> =
                covering_cells(&area, 8, 9).into_iter().collect();
            for i in 0..200 {
                let theta = i as f64 * 0.031415;
                let frac = (i % 10) as f64 / 10.0;
                let dlat = (radius / EARTH_RADIUS_M).to_degrees() * frac * theta.cos();
                let plat = (lat + dlat).clamp(-90.0, 90.0);
                let dlon = (radius / EARTH_RADIUS_M).to_degrees() * frac * theta.sin()
                    / plat.to_radians().cos().max(0.01);
                let plon = wrap_lon(lon + dlon);
                if haversine_m(lat, lon, plat, plon) <= radius {
                    let cell = (prefix_of(plat, 8), prefix_of(plon, 9));
                    assert!(cells.contains(&cell), "point ({plat},{plon}) cell {cell:?}");
                }
            }
        }
    }
}
