//! The narrowcast server: public-health authorities announce signed
//! (area, message) pairs; clients query by coarsened region and filter
//! against their privately held trace on-device. The server never sees a
//! full-precision client location — request handlers take a [`Region`] and
//! a timestamp, nothing else.

pub mod geo;
mod http;
mod service;

pub use geo::{
    area_intersects_region, haversine_m, region_of, Area, GeoError, Region, EARTH_RADIUS_M,
    MAX_PREFIX_BITS, MIN_RADIUS_M,
};
pub use http::{serve, RegionQuery, ServiceHandle};
pub use service::{
    announcement_signing_bytes, match_trace, negotiate_precision, response_size, sign_announcement,
    AnnounceOutcome, AnnounceReason, AuthorityWhitelist, MessageHit, Narrowcast, NarrowcastEntry,
    TracePoint,
};
