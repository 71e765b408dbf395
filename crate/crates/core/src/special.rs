//! Scalar special functions used by the fading and outage code.
//!
//! Only the handful of functions the crate actually needs live here:
//! modified Bessel functions of the first kind (orders 0 and 1) and a
//! log-factorial. Power series are used where they converge quickly and
//! the standard large-argument asymptotic expansions elsewhere; the
//! crossover at z = 20 keeps both branches well under 1e-10 relative error.

/// Power series for I_nu(z), nu in {0, 1}, accurate for moderate z.
fn bessel_series(nu: u32, z: f64) -> f64 {
    let q = z * z / 4.0;
    let mut term = if nu == 0 { 1.0 } else { z / 2.0 };
    let mut sum = term;
    for k in 1..200 {
        let k = f64::from(k);
        term *= q / (k * (k + f64::from(nu)));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Large-argument asymptotic series for I_nu(z) with the e^z / sqrt(2 pi z)
/// prefactor removed.
fn bessel_asymptotic_tail(nu: u32, z: f64) -> f64 {
    let mu = 4.0 * f64::from(nu * nu);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..30 {
        let k = f64::from(k);
        let num = mu - (2.0 * k + 1.0) * (2.0 * k + 1.0);
        let next = term * -num / (8.0 * z * (k + 1.0));
        if next.abs() >= term.abs() && k > 0.0 {
            break; // asymptotic series started diverging
        }
        term = next;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the first kind, order zero.
#[must_use]
pub fn bessel_i0(z: f64) -> f64 {
    let z = z.abs();
    if z <= 20.0 {
        bessel_series(0, z)
    } else {
        ln_bessel_i0(z).exp()
    }
}

/// ln I_0(z), safe for arguments where I_0 itself would overflow.
#[must_use]
pub fn ln_bessel_i0(z: f64) -> f64 {
    let z = z.abs();
    if z <= 20.0 {
        bessel_series(0, z).ln()
    } else {
        z - 0.5 * (std::f64::consts::TAU * z).ln() + bessel_asymptotic_tail(0, z).ln()
    }
}

/// Modified Bessel function of the first kind, order one.
#[must_use]
pub fn bessel_i1(z: f64) -> f64 {
    let a = z.abs();
    let v = if a <= 20.0 {
        bessel_series(1, a)
    } else {
        (a - 0.5 * (std::f64::consts::TAU * a).ln()).exp() * bessel_asymptotic_tail(1, a)
    };
    if z < 0.0 {
        -v
    } else {
        v
    }
}

/// ln I_1(z), safe for arguments where I_1 itself would overflow.
/// Defined for z >= 0 (I_1 is negative for negative z).
#[must_use]
pub fn ln_bessel_i1(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z <= 20.0 {
        bessel_series(1, z).ln()
    } else {
        z - 0.5 * (std::f64::consts::TAU * z).ln() + bessel_asymptotic_tail(1, z).ln()
    }
}

/// ln(n!) by direct summation. n stays small here (tens), so the O(n) loop
/// is exact enough and avoids a gamma-function dependency.
#[must_use]
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
