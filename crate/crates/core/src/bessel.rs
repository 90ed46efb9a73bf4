//! Bessel functions of the first kind for small arguments.

/// J_n(x) by its power series. Accurate to machine precision for |x| <= 10,
/// far beyond any modulation depth the engine is asked to handle.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    let half = 0.5 * x;
    // (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / f64::from(k);
    }
    let q = -half * half;
    let mut sum = term;
    for k in 1..200 {
        term *= q / (f64::from(k) * f64::from(k + n));
        sum += term;
        if term.abs() <= f64::EPSILON * sum.abs() * 1e-3 || term == 0.0 {
            break;
        }
    }
    sum
}

/// 1 - sum_{|n| <= order} J_n(x)^2: the power left outside a truncated expansion.
pub fn truncation_defect(x: f64, order: u32) -> f64 {
    // Summing the tail directly avoids cancellation against 1.
    let tail: f64 = ((order as i32 + 1)..(order as i32 + 60))
        .map(|n| bessel_j(n, x).powi(2))
        .sum();
    2.0 * tail
}

/// Smallest truncation order whose defect is below `tol`.
pub fn order_for_defect(x: f64, tol: f64) -> u32 {
    (1..64).find(|&n| truncation_defect(x, n) < tol).unwrap_or(64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        // Abramowitz & Stegun table values.
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(2, 1.0) - 0.114_903_484_931_900_5).abs() < 1e-15);
        assert!((bessel_j(0, 2.5) - (-0.048_383_776_468_197_98)).abs() < 1e-14);
    }

    #[test]
    fn small_argument_orders() {
        let m = 0.025;
        assert!((bessel_j(0, m) - 0.999_843_756_103_5).abs() < 1e-12);
        assert!((bessel_j(1, m) - m / 2.0).abs() < 1e-6);
        // order (m)^2 second harmonic
        assert!((bessel_j(2, m) - 7.812_0e-5).abs() < 1e-8);
    }

    #[test]
    fn negative_orders_follow_parity() {
        assert_eq!(bessel_j(-1, 0.3), -bessel_j(1, 0.3));
        assert_eq!(bessel_j(-2, 0.3), bessel_j(2, 0.3));
    }

    #[test]
    fn closure_and_chosen_order() {
        for &x in &[0.0125, 0.025, 0.05, 0.3] {
            let s: f64 = (-40..=40).map(|n| bessel_j(n, x).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-14, "closure at {x}: {s}");
        }
        assert!(truncation_defect(0.025, 4) < 1e-12);
        assert!(order_for_defect(0.025, 1e-12) <= 4);
    }
}
