//! Round-trips an attack through the JSON file format and checks that it is
//! a physical Kraus component.

use dps_qkd::state::C64;
use dps_qkd::AttackMatrix;

fn main() -> dps_qkd::Result<()> {
    let theta = 0.3f64;
    let e = AttackMatrix::from_fn(3, |r, c| match (r, c) {
        (1, 1) | (2, 2) => C64::new(theta.cos(), 0.0),
        (1, 2) => C64::new(-theta.sin(), 0.0),
        (2, 1) => C64::new(theta.sin(), 0.0),
        (3, 3) => C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    });
    let text = e.to_json_string();
    println!("{text}");

    let back = AttackMatrix::from_json_str(&text)?;
    println!("round trip exact: {}", back == e);
    println!("largest singular value: {:.12}", back.largest_singular_value());
    println!("physical: {}", back.is_physical());

    let bad = r#"{"n": 2, "entries": [[1, 0], [0, 0], [0, 0]]}"#;
    match AttackMatrix::from_json_str(bad) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(err) => println!("rejected: {err}"),
    }
    Ok(())
}
