//! Simulation-cost report: full tensor-grid size and basis size.

use num_bigint::BigUint;
use tenrec::gpc::basis_count;

/// Exact `n^d`.
pub fn grid_points(n: usize, d: usize) -> BigUint {
    BigUint::from(n).pow(d as u32)
}

/// Scientific notation with two significant figures, rounded half up,
/// e.g. `8.9×10^21`.
pub fn scientific_2sf(x: &BigUint) -> String {
    let digits = x.to_str_radix(10);
    let bytes = digits.as_bytes();
    let digit = |i: usize| bytes.get(i).map_or(0, |b| u32::from(b - b'0'));
    let mut exponent = digits.len() - 1;
    let mut mantissa = digit(0) * 10 + digit(1);
    if digit(2) >= 5 {
        mantissa += 1;
    }
    if mantissa == 100 {
        mantissa = 10;
        exponent += 1;
    }
    format!("{}.{}×10^{}", mantissa / 10, mantissa % 10, exponent)
}

/// The report printed by `tenrec counts`.
pub fn report(d: usize, n: usize, p: usize) -> String {
    let points = grid_points(n, d);
    let k = match basis_count(d, p) {
        Ok(k) => k.to_string(),
        Err(e) => format!("overflow ({e})"),
    };
    format!(
        "d = {d}, n = {n}, p = {p}\ntensor grid n^d = {} ({points})\nbasis size K = {k}",
        scientific_2sf(&points)
    )
}
