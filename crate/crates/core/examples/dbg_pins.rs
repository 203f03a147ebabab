use sandpile_core::coord::Coord;
use sandpile_core::harmonic::*;
use num_traits::ToPrimitive;

fn main() {
    // order-3 ray states for c_num = 1, 2: first 17 values
    for c in [1u64, 2] {
        let g = ray_state_from_torsion(3, c, 200, 20).unwrap();
        let seq: Vec<u64> = (1..=17).map(|x| g.get(Coord::new(x, 0)).to_u64().unwrap()).collect();
        println!("c_num={c}: {seq:?}");
    }
    // no-torsion prefix J = 3
    let p = no_torsion_prefix(3).unwrap();
    println!("intervals {:?} signs {:?} trivial {:?}", p.intervals, p.signs, p.kernel_trivial);
    // d/pi for small k
    for k in [2u64, 3, 5, 7] {
        println!("k={k}: {:?}", rank_and_period(k).unwrap());
    }
}
