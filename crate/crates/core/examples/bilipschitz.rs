//! Distortion of piecewise geodesic paths: long segments stay close to
//! geodesics, short bent segments curl up.

use std::f64::consts::PI;
use surface_census::moebius::{self, GeodesicSegmentPath};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let th = 0.75 * PI;
    for len in [20.0, 10.0, 3.0, 1.0, 0.3, 0.1] {
        let path = GeodesicSegmentPath::planar(&[len; 6], &[th; 5])?;
        let d = moebius::bilipschitz_harness(&path, 2000, 1)?;
        let angle = moebius::nearly_geodesic_angle(&path, 0.05)?;
        println!("segments {len:>5}: distortion max {:>10.3} median {:.3}, nearly-geodesic angle {angle:.3}", d.max, d.median);
    }
    let zigzag = GeodesicSegmentPath::planar(&[0.1; 8], &[th, -th, th, -th, th, -th, th])?;
    println!("alternating bends on short segments: {:.3}", moebius::bilipschitz_harness(&zigzag, 2000, 1)?.max);
    Ok(())
}
