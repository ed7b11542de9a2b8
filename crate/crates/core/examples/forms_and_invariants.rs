//! Field 2-forms, the Hodge star and the two Lorentz invariants.
//!
//! Run with `cargo run --example forms_and_invariants`.

use nled::forms4d::{invariants_of, wedge22, Form, TwoForm};
use nled::Vec3;

fn main() {
    let e = Vec3::new(0.3, -0.2, 0.5);
    let b = Vec3::new(0.1, 0.8, -0.4);
    let f = TwoForm::from_eb(&e, &b);
    println!("F slots [e01 e02 e03 e23 e31 e12] = {:?}", f.c);

    // ⋆F swaps the roles of E and B: (E, B) -> (-B, E)
    let (se, sb) = f.hodge().to_eb();
    println!("*F  -> E = {:?}, B = {:?}", se.as_slice(), sb.as_slice());

    let (x, y) = invariants_of(&f);
    println!("X = E^2 - B^2 = {x:.6} (direct {:.6})", e.norm_squared() - b.norm_squared());
    println!("Y = 2 E.B     = {y:.6} (direct {:.6})", 2.0 * e.dot(&b));
    println!("*(F ^ F)      = {:.6}", wedge22(&f, &f).hodge());

    println!("\n** on basis blades:");
    for idx in [vec![], vec![0], vec![1], vec![0, 1], vec![2, 3], vec![0, 1, 2], vec![0, 1, 2, 3]] {
        let blade = Form::basis(&idx);
        let twice = blade.hodge().hodge();
        let sign = if (twice - blade).max_abs() == 0.0 { "+1" } else { "-1" };
        println!("  e{idx:?}: {sign}");
    }
}
