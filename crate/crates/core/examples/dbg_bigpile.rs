use num_bigint::BigUint;
use sandpile_core::coord::{Coord, Rect};
use sandpile_core::relax::{relax_bulk, RelaxConfig};
use sandpile_core::sink::SinkSpec;
use sandpile_core::state::SandState;
use std::time::Instant;

fn main() {
    let n: BigUint = "1000000000000000000000000000000".parse().unwrap(); // 1e30
    let spec = SinkSpec::periodic(6, 6).unwrap();
    let mut s = SandState::new(spec, Rect::new(-13, -13, 19, 19), 0).unwrap();
    s.add_grains(Coord::new(3, 3), &n).unwrap();
    let t0 = Instant::now();
    let report = relax_bulk(&s, &RelaxConfig::default()).unwrap();
    println!("elapsed {:?}", t0.elapsed());
    println!("sweeps {} window {} events {}", report.sweeps, report.peak_window, report.topple_events);
    // radii quick check
    let c = Coord::new(3, 3);
    let mut outer2: i64 = 0;
    for z in report.odometer.window().iter() {
        if report.odometer.get(z) > BigUint::from(0u8) {
            let d2 = (z.x - c.x).pow(2) + (z.y - c.y).pow(2);
            outer2 = outer2.max(d2);
        }
    }
    // inner: min distance of a non-sink cell NOT in D within outer
    let spec = report.stable.spec().clone();
    let mut miss2 = i64::MAX;
    let w = report.odometer.window();
    for z in w.grow(3).iter() {
        if spec.is_sink(z) || z == c { continue; }
        let in_d = w.contains(z) && report.odometer.get(z) > BigUint::from(0u8);
        if !in_d {
            let d2 = (z.x - c.x).pow(2) + (z.y - c.y).pow(2);
            miss2 = miss2.min(d2);
        }
    }
    let mut inner2: i64 = 0;
    for z in w.iter() {
        if report.odometer.get(z) > BigUint::from(0u8) {
            let d2 = (z.x - c.x).pow(2) + (z.y - c.y).pow(2);
            if d2 < miss2 { inner2 = inner2.max(d2); }
        }
    }
    println!("outer {:.2} inner {:.2}", (outer2 as f64).sqrt(), (inner2 as f64).sqrt());
}
